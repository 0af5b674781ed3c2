//! Named parameter storage with matching gradient slots, initialization
//! helpers, and the text checkpoint format.

use crate::error::{Error, Result};
use crate::numerics::tensor::Tensor;
use rand::rngs::StdRng;
use rand::Rng;
use std::collections::BTreeMap;
use std::fs;
use std::path::Path;

/// Format a double with 17 significant digits, enough for a bitwise
/// round-trip through decimal text.
pub fn fmt_f64(x: f64) -> String {
    format!("{:.16e}", x)
}

/// Every learnable weight, keyed by name, with a same-shaped gradient slot.
#[derive(Debug, Clone, Default)]
pub struct ParameterStore {
    params: BTreeMap<String, Tensor>,
    grads: BTreeMap<String, Tensor>,
}

impl ParameterStore {
    pub fn new() -> Self {
        Self::default()
    }

    /// Register a parameter. Names must be unique and space-free (the
    /// checkpoint format is space-delimited).
    pub fn insert(&mut self, name: &str, tensor: Tensor) {
        assert!(!name.contains(' '), "parameter names cannot contain spaces");
        assert!(
            !self.params.contains_key(name),
            "duplicate parameter '{}'",
            name
        );
        self.grads
            .insert(name.to_string(), Tensor::zeros_like(&tensor));
        self.params.insert(name.to_string(), tensor);
    }

    pub fn contains(&self, name: &str) -> bool {
        self.params.contains_key(name)
    }

    pub fn get(&self, name: &str) -> &Tensor {
        self.params
            .get(name)
            .unwrap_or_else(|| panic!("unknown parameter '{}'", name))
    }

    pub fn get_mut(&mut self, name: &str) -> &mut Tensor {
        self.params
            .get_mut(name)
            .unwrap_or_else(|| panic!("unknown parameter '{}'", name))
    }

    pub fn grad(&self, name: &str) -> &Tensor {
        self.grads
            .get(name)
            .unwrap_or_else(|| panic!("unknown parameter '{}'", name))
    }

    pub fn accumulate_grad(&mut self, name: &str, delta: &Tensor) {
        let g = self
            .grads
            .get_mut(name)
            .unwrap_or_else(|| panic!("unknown parameter '{}'", name));
        assert!(g.same_shape(delta), "gradient shape mismatch for '{}'", name);
        for (a, b) in g.data_mut().iter_mut().zip(delta.data()) {
            *a += b;
        }
    }

    pub fn zero_grads(&mut self) {
        for g in self.grads.values_mut() {
            g.data_mut().fill(0.0);
        }
    }

    /// Parameter names in sorted order.
    pub fn names(&self) -> Vec<String> {
        self.params.keys().cloned().collect()
    }

    pub fn iter(&self) -> impl Iterator<Item = (&String, &Tensor)> {
        self.params.iter()
    }

    pub fn len(&self) -> usize {
        self.params.len()
    }

    pub fn is_empty(&self) -> bool {
        self.params.is_empty()
    }

    pub fn coordinate_count(&self) -> usize {
        self.params.values().map(|t| t.len()).sum()
    }

    pub fn all_finite(&self) -> bool {
        self.params.values().all(|t| t.all_finite())
    }

    /// Serialize as text, one parameter per line: `name rows cols v1 v2 ...`,
    /// values at 17 significant digits.
    pub fn to_checkpoint_string(&self) -> String {
        let mut out = String::new();
        for (name, t) in &self.params {
            out.push_str(name);
            out.push_str(&format!(" {} {}", t.rows(), t.cols()));
            for v in t.data() {
                out.push(' ');
                out.push_str(&fmt_f64(*v));
            }
            out.push('\n');
        }
        out
    }

    pub fn save_checkpoint(&self, path: impl AsRef<Path>) -> Result<()> {
        let path = path.as_ref();
        fs::write(path, self.to_checkpoint_string()).map_err(|source| Error::UnreadableFile {
            path: path.to_path_buf(),
            source,
        })
    }

    pub fn from_checkpoint_str(text: &str) -> Result<ParameterStore> {
        let mut store = ParameterStore::new();
        for (i, line) in text.lines().enumerate() {
            if line.trim().is_empty() {
                continue;
            }
            let line_no = i + 1;
            let mut parts = line.split(' ');
            let name = parts.next().unwrap();
            let rows: usize = parse_field(parts.next(), line_no, "rows")?;
            let cols: usize = parse_field(parts.next(), line_no, "cols")?;
            let data: Vec<f64> = parts
                .map(|p| {
                    p.parse::<f64>().map_err(|_| Error::MalformedLine {
                        line_no,
                        reason: format!("'{}' is not a number", p),
                    })
                })
                .collect::<Result<_>>()?;
            if data.len() != rows * cols {
                return Err(Error::MalformedLine {
                    line_no,
                    reason: format!(
                        "expected {} values for {}x{}, found {}",
                        rows * cols,
                        rows,
                        cols,
                        data.len()
                    ),
                });
            }
            store.insert(name, Tensor::matrix(rows, cols, data));
        }
        Ok(store)
    }

    pub fn load_checkpoint(path: impl AsRef<Path>) -> Result<ParameterStore> {
        let path = path.as_ref();
        let text = fs::read_to_string(path).map_err(|source| Error::UnreadableFile {
            path: path.to_path_buf(),
            source,
        })?;
        Self::from_checkpoint_str(&text)
    }
}

fn parse_field<T: std::str::FromStr>(
    field: Option<&str>,
    line_no: usize,
    what: &str,
) -> Result<T> {
    field
        .and_then(|f| f.parse().ok())
        .ok_or_else(|| Error::MalformedLine {
            line_no,
            reason: format!("missing or invalid {}", what),
        })
}

/// Uniform Glorot initialization: values in [-a, a] with a = sqrt(6/(rows+cols)).
pub fn glorot_init(rows: usize, cols: usize, rng: &mut StdRng) -> Tensor {
    assert!(rows > 0 && cols > 0, "glorot_init needs positive dims");
    let a = (6.0 / (rows + cols) as f64).sqrt();
    let data = (0..rows * cols).map(|_| rng.gen_range(-a..a)).collect();
    Tensor::matrix(rows, cols, data)
}
