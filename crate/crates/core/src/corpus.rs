//! Corpus handling: annotated-utterance parsing, de-lexicalization, the
//! domain/intent/slot hierarchy, vocabulary construction, pre-trained word
//! vectors, and per-intent utterance sampling.
//!
//! Corpus files are UTF-8 text, one utterance per line:
//!
//! ```text
//! domain<TAB>intent<TAB>word;slot word;slot ...
//! ```
//!
//! Lines starting with `#` are comments. The reserved slot label `other`
//! marks words that carry no slot.

use crate::error::{Error, Result};
use rand::rngs::StdRng;
use rand::Rng;
use serde::{Deserialize, Serialize};
use std::collections::{BTreeMap, BTreeSet};
use std::fs;
use std::path::Path;

/// Slot label for words that carry no slot.
pub const NO_SLOT: &str = "other";

/// One word together with its slot tag.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Token {
    pub word: String,
    pub slot: String,
}

impl Token {
    pub fn new(word: impl Into<String>, slot: impl Into<String>) -> Self {
        Token {
            word: word.into(),
            slot: slot.into(),
        }
    }

    pub fn has_slot(&self) -> bool {
        self.slot != NO_SLOT
    }
}

/// A raw utterance with its domain and intent labels.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LabeledUtterance {
    pub domain: String,
    pub intent: String,
    pub tokens: Vec<Token>,
}

/// A de-lexicalized utterance: literal words interleaved with slot names.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct DelexSequence {
    pub items: Vec<String>,
}

impl DelexSequence {
    pub fn len(&self) -> usize {
        self.items.len()
    }

    pub fn is_empty(&self) -> bool {
        self.items.is_empty()
    }
}

/// The domain -> intent -> slot containment tree plus the de-lexicalized
/// utterances observed per intent.
///
/// All name collections are kept lexicographically sorted so that every
/// traversal (aggregation order, export order, vocab ids) is deterministic.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Hierarchy {
    /// Domain names, sorted.
    pub domains: Vec<String>,
    /// Intent names per domain, sorted.
    pub intents_of: BTreeMap<String, Vec<String>>,
    /// Slot names observed in each intent's utterances, sorted.
    pub slots_of: BTreeMap<String, Vec<String>>,
    /// De-lexicalized utterances per intent, in corpus order.
    pub utterances_of: BTreeMap<String, Vec<DelexSequence>>,
    /// Every word observed under each slot, across the whole corpus.
    pub slot_words: BTreeMap<String, BTreeSet<String>>,
}

impl Hierarchy {
    /// Domain that owns `intent`.
    pub fn domain_of(&self, intent: &str) -> Option<&str> {
        self.intents_of
            .iter()
            .find(|(_, intents)| intents.iter().any(|i| i == intent))
            .map(|(d, _)| d.as_str())
    }

    /// All intent names across all domains, sorted.
    pub fn all_intents(&self) -> Vec<String> {
        let mut out: Vec<String> = self.intents_of.values().flatten().cloned().collect();
        out.sort();
        out
    }

    /// All slot names across all intents, sorted.
    pub fn all_slots(&self) -> Vec<String> {
        self.slot_words.keys().cloned().collect()
    }

    pub fn domain_index(&self, domain: &str) -> Option<usize> {
        self.domains.iter().position(|d| d == domain)
    }
}

/// Dense string-to-id mapping over everything that appears in a
/// de-lexicalized sequence (literal words and slot names alike).
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Vocab {
    pub id_of: BTreeMap<String, usize>,
    pub names: Vec<String>,
}

impl Vocab {
    pub fn len(&self) -> usize {
        self.names.len()
    }

    pub fn is_empty(&self) -> bool {
        self.names.is_empty()
    }

    pub fn id(&self, name: &str) -> Option<usize> {
        self.id_of.get(name).copied()
    }
}

/// Pre-trained word vectors, all of one fixed dimension.
#[derive(Debug, Clone)]
pub struct WordVectorTable {
    pub dim: usize,
    pub vectors: BTreeMap<String, Vec<f64>>,
}

impl WordVectorTable {
    pub fn get(&self, word: &str) -> Option<&[f64]> {
        self.vectors.get(word).map(|v| v.as_slice())
    }
}

/// Parse one corpus line: `domain<TAB>intent<TAB>word;slot word;slot ...`.
///
/// `line_no` is only used for error reporting.
pub fn parse_utterance_line(line: &str, line_no: usize) -> Result<LabeledUtterance> {
    let fields: Vec<&str> = line.split('\t').collect();
    if fields.len() != 3 {
        return Err(Error::MalformedLine {
            line_no,
            reason: format!("expected 3 tab-separated fields, found {}", fields.len()),
        });
    }
    let domain = fields[0].trim();
    let intent = fields[1].trim();
    if domain.is_empty() || intent.is_empty() {
        return Err(Error::MalformedLine {
            line_no,
            reason: "empty domain or intent".to_string(),
        });
    }
    let mut tokens = Vec::new();
    for pair in fields[2].split_whitespace() {
        let parts: Vec<&str> = pair.split(';').collect();
        if parts.len() != 2 || parts[0].is_empty() || parts[1].is_empty() {
            return Err(Error::MalformedLine {
                line_no,
                reason: format!("token '{}' is not exactly 'word;slot'", pair),
            });
        }
        tokens.push(Token::new(parts[0], parts[1]));
    }
    if tokens.is_empty() {
        return Err(Error::MalformedLine {
            line_no,
            reason: "empty token sequence".to_string(),
        });
    }
    Ok(LabeledUtterance {
        domain: domain.to_string(),
        intent: intent.to_string(),
        tokens,
    })
}

/// Parse a whole corpus file. Comment lines (`#`) and blank lines are skipped.
pub fn parse_corpus_file(path: impl AsRef<Path>) -> Result<Vec<LabeledUtterance>> {
    let path = path.as_ref();
    let text = fs::read_to_string(path).map_err(|source| Error::UnreadableFile {
        path: path.to_path_buf(),
        source,
    })?;
    parse_corpus_text(&text)
}

pub fn parse_corpus_text(text: &str) -> Result<Vec<LabeledUtterance>> {
    let mut out = Vec::new();
    for (i, line) in text.lines().enumerate() {
        if line.trim().is_empty() || line.starts_with('#') {
            continue;
        }
        out.push(parse_utterance_line(line, i + 1)?);
    }
    Ok(out)
}

/// De-lexicalize a token sequence: untagged words pass through, and each
/// maximal run of consecutive tokens sharing one slot collapses to a single
/// occurrence of that slot name.
pub fn delexicalize(tokens: &[Token]) -> DelexSequence {
    let mut items = Vec::with_capacity(tokens.len());
    let mut prev_slot: Option<&str> = None;
    for tok in tokens {
        if tok.has_slot() {
            if prev_slot != Some(tok.slot.as_str()) {
                items.push(tok.slot.clone());
            }
            prev_slot = Some(tok.slot.as_str());
        } else {
            items.push(tok.word.clone());
            prev_slot = None;
        }
    }
    DelexSequence { items }
}

/// Build the hierarchy from a labeled corpus.
pub fn build_hierarchy(utterances: &[LabeledUtterance]) -> Result<Hierarchy> {
    if utterances.is_empty() {
        return Err(Error::EmptyCorpus);
    }
    let mut domain_of_intent: BTreeMap<String, String> = BTreeMap::new();
    let mut domains: BTreeSet<String> = BTreeSet::new();
    let mut intents_of: BTreeMap<String, BTreeSet<String>> = BTreeMap::new();
    let mut slots_of: BTreeMap<String, BTreeSet<String>> = BTreeMap::new();
    let mut utterances_of: BTreeMap<String, Vec<DelexSequence>> = BTreeMap::new();
    let mut slot_words: BTreeMap<String, BTreeSet<String>> = BTreeMap::new();

    for utt in utterances {
        if let Some(existing) = domain_of_intent.get(&utt.intent) {
            if existing != &utt.domain {
                return Err(Error::IntentInMultipleDomains {
                    intent: utt.intent.clone(),
                    first: existing.clone(),
                    second: utt.domain.clone(),
                });
            }
        } else {
            domain_of_intent.insert(utt.intent.clone(), utt.domain.clone());
        }
        domains.insert(utt.domain.clone());
        intents_of
            .entry(utt.domain.clone())
            .or_default()
            .insert(utt.intent.clone());
        for tok in &utt.tokens {
            if tok.has_slot() {
                slots_of
                    .entry(utt.intent.clone())
                    .or_default()
                    .insert(tok.slot.clone());
                slot_words
                    .entry(tok.slot.clone())
                    .or_default()
                    .insert(tok.word.clone());
            }
        }
        utterances_of
            .entry(utt.intent.clone())
            .or_default()
            .push(delexicalize(&utt.tokens));
    }

    Ok(Hierarchy {
        domains: domains.into_iter().collect(),
        intents_of: intents_of
            .into_iter()
            .map(|(d, set)| (d, set.into_iter().collect()))
            .collect(),
        slots_of: slots_of
            .into_iter()
            .map(|(i, set)| (i, set.into_iter().collect()))
            .collect(),
        utterances_of,
        slot_words,
    })
}

/// Vocabulary over every item of every stored de-lexicalized sequence,
/// ids assigned in sorted-name order.
pub fn build_vocab(h: &Hierarchy) -> Vocab {
    let mut names: BTreeSet<String> = BTreeSet::new();
    for seqs in h.utterances_of.values() {
        for seq in seqs {
            for item in &seq.items {
                names.insert(item.clone());
            }
        }
    }
    let names: Vec<String> = names.into_iter().collect();
    let id_of = names
        .iter()
        .enumerate()
        .map(|(i, n)| (n.clone(), i))
        .collect();
    Vocab { id_of, names }
}

/// Load a word-vector file: one `word v1 v2 ... v_dim` entry per line,
/// space-separated. Duplicate words keep the last entry.
pub fn load_word_vectors(path: impl AsRef<Path>, dim: usize) -> Result<WordVectorTable> {
    let path = path.as_ref();
    let text = fs::read_to_string(path).map_err(|source| Error::UnreadableFile {
        path: path.to_path_buf(),
        source,
    })?;
    let mut vectors = BTreeMap::new();
    for (i, line) in text.lines().enumerate() {
        if line.trim().is_empty() {
            continue;
        }
        let mut parts = line.split_whitespace();
        let word = parts.next().unwrap().to_string();
        let values: Vec<f64> = parts
            .map(|p| {
                p.parse::<f64>().map_err(|_| Error::MalformedLine {
                    line_no: i + 1,
                    reason: format!("'{}' is not a number", p),
                })
            })
            .collect::<Result<_>>()?;
        if values.len() != dim {
            return Err(Error::DimensionMismatch {
                line_no: i + 1,
                expected: dim,
                found: values.len(),
            });
        }
        vectors.insert(word, values);
    }
    Ok(WordVectorTable { dim, vectors })
}

/// Initializer for slot and word embedding rows.
///
/// Slot rows are the element-wise mean of the pre-trained vectors of every
/// word observed under the slot. Words absent from the pre-trained table get
/// a uniform draw from [-0.1, 0.1]^dim from the shared generator, drawn once
/// per missing word and reused on every later reference.
pub struct EmbeddingInit<'a> {
    word_vectors: Option<&'a WordVectorTable>,
    dim: usize,
    fallback: BTreeMap<String, Vec<f64>>,
}

impl<'a> EmbeddingInit<'a> {
    pub fn new(word_vectors: Option<&'a WordVectorTable>, dim: usize) -> Self {
        if let Some(wv) = word_vectors {
            assert_eq!(wv.dim, dim, "word-vector table dimension mismatch");
        }
        EmbeddingInit {
            word_vectors,
            dim,
            fallback: BTreeMap::new(),
        }
    }

    /// Vector for a single word: pre-trained if available, cached fallback
    /// draw otherwise.
    pub fn word_embedding(&mut self, word: &str, rng: &mut StdRng) -> Vec<f64> {
        if let Some(v) = self.word_vectors.and_then(|wv| wv.get(word)) {
            return v.to_vec();
        }
        if let Some(v) = self.fallback.get(word) {
            return v.clone();
        }
        let v: Vec<f64> = (0..self.dim).map(|_| rng.gen_range(-0.1..0.1)).collect();
        self.fallback.insert(word.to_string(), v.clone());
        v
    }

    /// Initial embedding for a slot: mean over the embeddings of all words
    /// observed under it. Words iterate in sorted order so fallback draws are
    /// reproducible.
    pub fn slot_embedding(&mut self, slot: &str, h: &Hierarchy, rng: &mut StdRng) -> Vec<f64> {
        let words = h
            .slot_words
            .get(slot)
            .unwrap_or_else(|| panic!("slot '{}' not present in hierarchy", slot));
        let mut sum = vec![0.0; self.dim];
        for word in words {
            let v = self.word_embedding(word, rng);
            for (s, x) in sum.iter_mut().zip(&v) {
                *s += x;
            }
        }
        let n = words.len() as f64;
        for s in &mut sum {
            *s /= n;
        }
        sum
    }
}

/// Convenience wrapper matching the one-shot contract: mean of the slot's
/// word vectors with seeded fallback draws for missing words.
pub fn init_slot_embedding(
    slot: &str,
    h: &Hierarchy,
    wv: &WordVectorTable,
    rng: &mut StdRng,
) -> Vec<f64> {
    EmbeddingInit::new(Some(wv), wv.dim).slot_embedding(slot, h, rng)
}

/// Draw `min(n, available)` of the intent's utterances uniformly without
/// replacement. Deterministic for a fixed generator state.
pub fn sample_utterances<'h>(
    h: &'h Hierarchy,
    intent: &str,
    n: usize,
    rng: &mut StdRng,
) -> Result<Vec<&'h DelexSequence>> {
    let pool = h
        .utterances_of
        .get(intent)
        .ok_or_else(|| Error::UnknownIntent(intent.to_string()))?;
    if n >= pool.len() {
        return Ok(pool.iter().collect());
    }
    let picked = rand::seq::index::sample(rng, pool.len(), n);
    Ok(picked.into_iter().map(|i| &pool[i]).collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use rand::SeedableRng;

    fn tok(word: &str, slot: &str) -> Token {
        Token::new(word, slot)
    }

    #[test]
    fn parses_annotated_line() {
        let u = parse_utterance_line("Music\tPlayMusicIntent\tplay;other Thriller;song", 1)
            .unwrap();
        assert_eq!(u.domain, "Music");
        assert_eq!(u.intent, "PlayMusicIntent");
        assert_eq!(u.tokens, vec![tok("play", "other"), tok("Thriller", "song")]);
    }

    #[test]
    fn parses_minimal_line() {
        let u = parse_utterance_line("D\tI\thi;other", 1).unwrap();
        assert_eq!(u.domain, "D");
        assert_eq!(u.intent, "I");
        assert_eq!(u.tokens, vec![tok("hi", "other")]);
    }

    #[test]
    fn trims_fields() {
        let u = parse_utterance_line(" D \t I \t hi;other ", 1).unwrap();
        assert_eq!(u.domain, "D");
        assert_eq!(u.intent, "I");
    }

    #[test]
    fn rejects_malformed_lines() {
        for bad in [
            "D\tI\t",              // empty token sequence
            "D\tI",                // missing field
            "D\tI\ta;b\textra",    // too many fields
            "D\tI\tword",          // no separator
            "D\tI\ta;b;c",         // two separators
            "D\tI\t;slot",         // empty word
            "D\tI\tword;",         // empty slot
            "\tI\thi;other",       // empty domain
        ] {
            assert!(
                matches!(parse_utterance_line(bad, 1), Err(Error::MalformedLine { .. })),
                "expected MalformedLine for {:?}",
                bad
            );
        }
    }

    #[test]
    fn delexicalizes_worked_example() {
        let tokens = vec![
            tok("play", "other"),
            tok("Thriller", "song"),
            tok("of", "other"),
            tok("Michael", "artist"),
            tok("Jackson", "artist"),
        ];
        assert_eq!(
            delexicalize(&tokens).items,
            vec!["play", "song", "of", "artist"]
        );
    }

    #[test]
    fn delexicalize_no_slots_is_identity() {
        assert_eq!(delexicalize(&[tok("hello", "other")]).items, vec!["hello"]);
    }

    #[test]
    fn delexicalize_merges_full_run() {
        let tokens = vec![tok("a", "x"), tok("b", "x"), tok("c", "x")];
        assert_eq!(delexicalize(&tokens).items, vec!["x"]);
    }

    #[test]
    fn delexicalize_keeps_slots_split_by_plain_word() {
        let tokens = vec![tok("a", "artist"), tok("of", "other"), tok("b", "artist")];
        assert_eq!(delexicalize(&tokens).items, vec!["artist", "of", "artist"]);
    }

    proptest! {
        #[test]
        fn delexicalize_is_idempotent_and_never_longer(
            spec in proptest::collection::vec((0usize..4, 0usize..3), 1..20)
        ) {
            let words = ["w0", "w1", "w2", "w3"];
            let slots = ["other", "s1", "s2"];
            let tokens: Vec<Token> = spec
                .iter()
                .map(|&(w, s)| tok(words[w], slots[s]))
                .collect();
            let once = delexicalize(&tokens);
            prop_assert!(once.len() <= tokens.len());
            // Re-applying the merge rule to the output changes nothing: treat
            // each output item as a token tagged with itself when it is a slot.
            let as_tokens: Vec<Token> = once
                .items
                .iter()
                .map(|item| {
                    if item == "s1" || item == "s2" {
                        tok(item, item)
                    } else {
                        tok(item, "other")
                    }
                })
                .collect();
            prop_assert_eq!(delexicalize(&as_tokens), once);
        }
    }

    fn two_domain_corpus() -> Vec<LabeledUtterance> {
        parse_corpus_text(
            "A\ti1\tplay;other x;artist\nB\ti2\tstop;other y;city now;other",
        )
        .unwrap()
    }

    #[test]
    fn builds_hierarchy_counts() {
        let h = build_hierarchy(&two_domain_corpus()).unwrap();
        assert_eq!(h.domains, vec!["A", "B"]);
        assert_eq!(h.intents_of["A"], vec!["i1"]);
        assert_eq!(h.intents_of["B"], vec!["i2"]);
        assert_eq!(h.utterances_of["i1"].len(), 1);
        assert_eq!(h.slots_of["i1"], vec!["artist"]);
        assert_eq!(h.slot_words["artist"], BTreeSet::from(["x".to_string()]));
        // slot_words keys equal the union of slots_of values
        let union: BTreeSet<&String> = h.slots_of.values().flatten().collect();
        let keys: BTreeSet<&String> = h.slot_words.keys().collect();
        assert_eq!(union, keys);
    }

    #[test]
    fn builds_singleton_hierarchy() {
        let utts = parse_corpus_text("D\tI\thi;other").unwrap();
        let h = build_hierarchy(&utts).unwrap();
        assert_eq!(h.domains.len(), 1);
        assert_eq!(h.all_intents().len(), 1);
        assert_eq!(h.utterances_of["I"].len(), 1);
    }

    #[test]
    fn rejects_intent_in_two_domains() {
        let utts = parse_corpus_text("A\ti\thi;other\nB\ti\tyo;other").unwrap();
        assert!(matches!(
            build_hierarchy(&utts),
            Err(Error::IntentInMultipleDomains { .. })
        ));
    }

    #[test]
    fn rejects_empty_corpus() {
        assert!(matches!(build_hierarchy(&[]), Err(Error::EmptyCorpus)));
    }

    #[test]
    fn vocab_sorted_and_deduplicated() {
        let h = build_hierarchy(&parse_corpus_text("D\tI\tplay;other x;artist").unwrap()).unwrap();
        let v = build_vocab(&h);
        assert_eq!(v.names, vec!["artist", "play"]);
        assert_eq!(v.id("artist"), Some(0));
        assert_eq!(v.id("play"), Some(1));

        let h2 = build_hierarchy(
            &parse_corpus_text("D\tI\ta;other b;other\nD\tI\tb;other a;other").unwrap(),
        )
        .unwrap();
        let v2 = build_vocab(&h2);
        assert_eq!(v2.names, vec!["a", "b"]);
    }

    #[test]
    fn vocab_covers_every_stored_item() {
        let h = build_hierarchy(&two_domain_corpus()).unwrap();
        let v = build_vocab(&h);
        for seqs in h.utterances_of.values() {
            for seq in seqs {
                for item in &seq.items {
                    assert!(v.id(item).is_some(), "item '{}' missing from vocab", item);
                }
            }
        }
    }

    #[test]
    fn loads_word_vectors() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("vecs.txt");
        std::fs::write(&path, "hi 1.0 2.0\n").unwrap();
        let wv = load_word_vectors(&path, 2).unwrap();
        assert_eq!(wv.get("hi"), Some(&[1.0, 2.0][..]));
    }

    #[test]
    fn word_vector_dimension_mismatch() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("vecs.txt");
        std::fs::write(&path, "hi 1.0\n").unwrap();
        assert!(matches!(
            load_word_vectors(&path, 2),
            Err(Error::DimensionMismatch {
                expected: 2,
                found: 1,
                ..
            })
        ));
    }

    #[test]
    fn word_vector_duplicates_last_wins() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("vecs.txt");
        std::fs::write(&path, "a 1 0\na 0 1\n").unwrap();
        let wv = load_word_vectors(&path, 2).unwrap();
        assert_eq!(wv.get("a"), Some(&[0.0, 1.0][..]));
    }

    #[test]
    fn word_vector_unreadable_file() {
        assert!(matches!(
            load_word_vectors("/nonexistent/vecs.txt", 2),
            Err(Error::UnreadableFile { .. })
        ));
    }

    fn slot_hierarchy(words: &[&str]) -> Hierarchy {
        let body: Vec<String> = words.iter().map(|w| format!("{};s", w)).collect();
        let line = format!("D\tI\t{}", body.join(" "));
        build_hierarchy(&parse_corpus_text(&line).unwrap()).unwrap()
    }

    #[test]
    fn slot_embedding_is_mean_of_member_vectors() {
        let h = slot_hierarchy(&["Michael", "Jackson"]);
        let wv = WordVectorTable {
            dim: 2,
            vectors: BTreeMap::from([
                ("Michael".to_string(), vec![1.0, 0.0]),
                ("Jackson".to_string(), vec![0.0, 1.0]),
            ]),
        };
        let mut rng = StdRng::seed_from_u64(0);
        assert_eq!(init_slot_embedding("s", &h, &wv, &mut rng), vec![0.5, 0.5]);
    }

    #[test]
    fn slot_embedding_singleton() {
        let h = slot_hierarchy(&["w"]);
        let wv = WordVectorTable {
            dim: 2,
            vectors: BTreeMap::from([("w".to_string(), vec![2.0, 4.0])]),
        };
        let mut rng = StdRng::seed_from_u64(0);
        assert_eq!(init_slot_embedding("s", &h, &wv, &mut rng), vec![2.0, 4.0]);
    }

    #[test]
    fn slot_embedding_missing_word_uses_seeded_draw() {
        let h = slot_hierarchy(&["w"]);
        let wv = WordVectorTable {
            dim: 3,
            vectors: BTreeMap::new(),
        };
        let mut rng = StdRng::seed_from_u64(7);
        let got = init_slot_embedding("s", &h, &wv, &mut rng);
        // Oracle: the first dim draws of an identically seeded generator.
        let mut oracle_rng = StdRng::seed_from_u64(7);
        let expect: Vec<f64> = (0..3).map(|_| oracle_rng.gen_range(-0.1..0.1)).collect();
        assert_eq!(got, expect);
        assert!(got.iter().all(|&x| (-0.1..0.1).contains(&x)));
    }

    #[test]
    fn fallback_draw_is_reused_across_slots() {
        let utts =
            parse_corpus_text("D\tI\tshared;s1 a;other\nD\tI\tshared;s2 b;other").unwrap();
        let h = build_hierarchy(&utts).unwrap();
        let mut init = EmbeddingInit::new(None, 4);
        let mut rng = StdRng::seed_from_u64(3);
        let e1 = init.slot_embedding("s1", &h, &mut rng);
        let e2 = init.slot_embedding("s2", &h, &mut rng);
        // Both slots contain exactly the word "shared": one draw, reused.
        assert_eq!(e1, e2);
    }

    #[test]
    fn mean_identity_when_all_words_present() {
        let h = slot_hierarchy(&["u", "v", "w"]);
        let wv = WordVectorTable {
            dim: 2,
            vectors: BTreeMap::from([
                ("u".to_string(), vec![1.0, -2.0]),
                ("v".to_string(), vec![0.25, 8.0]),
                ("w".to_string(), vec![-3.5, 0.125]),
            ]),
        };
        let mut rng = StdRng::seed_from_u64(0);
        let got = init_slot_embedding("s", &h, &wv, &mut rng);
        let n = h.slot_words["s"].len() as f64;
        let mut sum = vec![0.0; 2];
        for v in wv.vectors.values() {
            for (s, x) in sum.iter_mut().zip(v) {
                *s += x;
            }
        }
        for (g, s) in got.iter().zip(&sum) {
            assert!((g * n - s).abs() < 1e-12);
        }
    }

    #[test]
    fn sampling_clamps_to_pool_size() {
        let utts = parse_corpus_text("D\tI\ta;other\nD\tI\tb;other\nD\tI\tc;other").unwrap();
        let h = build_hierarchy(&utts).unwrap();
        let mut rng = StdRng::seed_from_u64(1);
        let got = sample_utterances(&h, "I", 5, &mut rng).unwrap();
        assert_eq!(got.len(), 3);
    }

    #[test]
    fn sampling_single_forced() {
        let utts = parse_corpus_text("D\tI\tonly;other").unwrap();
        let h = build_hierarchy(&utts).unwrap();
        let mut rng = StdRng::seed_from_u64(1);
        let got = sample_utterances(&h, "I", 1, &mut rng).unwrap();
        assert_eq!(got[0].items, vec!["only"]);
    }

    #[test]
    fn sampling_is_seeded_and_duplicate_free() {
        let lines: Vec<String> = (0..10).map(|i| format!("D\tI\tw{};other", i)).collect();
        let h = build_hierarchy(&parse_corpus_text(&lines.join("\n")).unwrap()).unwrap();
        let a = sample_utterances(&h, "I", 4, &mut StdRng::seed_from_u64(9)).unwrap();
        let b = sample_utterances(&h, "I", 4, &mut StdRng::seed_from_u64(9)).unwrap();
        assert_eq!(a, b);
        let mut seen = BTreeSet::new();
        for seq in &a {
            assert!(seen.insert(seq.items.clone()), "duplicate draw");
        }
    }

    #[test]
    fn sampling_unknown_intent() {
        let h = build_hierarchy(&parse_corpus_text("D\tI\thi;other").unwrap()).unwrap();
        assert!(matches!(
            sample_utterances(&h, "nope", 1, &mut StdRng::seed_from_u64(0)),
            Err(Error::UnknownIntent(_))
        ));
    }

    #[test]
    fn comments_and_blank_lines_skipped() {
        let utts = parse_corpus_text("# header\nD\tI\thi;other\n\n# trailing\n").unwrap();
        assert_eq!(utts.len(), 1);
    }
}
