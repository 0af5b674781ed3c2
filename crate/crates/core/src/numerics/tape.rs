//! Tape-based reverse-mode differentiation.
//!
//! Each forward pass records its primitive operations onto a fresh [`Tape`];
//! [`Tape::backward`] replays the record once in reverse and accumulates
//! exact gradients into the [`ParameterStore`]. Tapes are cheap, per-pass
//! objects and are never shared between passes.

use crate::error::{Error, Result};
use crate::numerics::store::ParameterStore;
use crate::numerics::tensor::Tensor;
use std::collections::BTreeMap;

/// Handle to a value recorded on a tape.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct NodeId(usize);

/// Values below this floor are clamped inside `log` so losses stay finite.
const LOG_FLOOR: f64 = 1e-12;

#[derive(Debug)]
enum Op {
    Leaf,
    MatVec { m: NodeId, v: NodeId },
    Add { a: NodeId, b: NodeId },
    Mul { a: NodeId, b: NodeId },
    Tanh { x: NodeId },
    Sigmoid { x: NodeId },
    Softmax { x: NodeId },
    Mean { xs: Vec<NodeId> },
    Max { xs: Vec<NodeId>, winners: Vec<usize> },
    Concat { a: NodeId, b: NodeId },
    Dot { a: NodeId, b: NodeId },
    Log { x: NodeId },
    Neg { x: NodeId },
    Row { m: NodeId, index: usize },
    Pick { x: NodeId, index: usize },
}

struct Node {
    value: Tensor,
    op: Op,
}

/// Topologically ordered record of one forward pass.
pub struct Tape {
    nodes: Vec<Node>,
    /// Parameter leaves already on this tape, so repeated references share
    /// one node and their gradients accumulate in one place.
    param_nodes: BTreeMap<String, NodeId>,
}

impl Default for Tape {
    fn default() -> Self {
        Self::new()
    }
}

impl Tape {
    pub fn new() -> Self {
        Tape {
            nodes: Vec::new(),
            param_nodes: BTreeMap::new(),
        }
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn value(&self, id: NodeId) -> &Tensor {
        &self.nodes[id.0].value
    }

    fn push(&mut self, value: Tensor, op: Op) -> NodeId {
        self.nodes.push(Node { value, op });
        NodeId(self.nodes.len() - 1)
    }

    /// Record a constant. Gradients flowing into it are discarded.
    pub fn constant(&mut self, value: Tensor) -> NodeId {
        self.push(value, Op::Leaf)
    }

    /// Record a parameter leaf (copying its current value). Repeated calls
    /// for the same name return the same node.
    pub fn param(&mut self, store: &ParameterStore, name: &str) -> NodeId {
        if let Some(&id) = self.param_nodes.get(name) {
            return id;
        }
        let id = self.push(store.get(name).clone(), Op::Leaf);
        self.param_nodes.insert(name.to_string(), id);
        id
    }

    /// Matrix-vector product.
    pub fn matvec(&mut self, m: NodeId, v: NodeId) -> Result<NodeId> {
        let (mt, vt) = (self.value(m), self.value(v));
        if !vt.is_vector() || mt.cols() != vt.rows() {
            return Err(Error::ShapeMismatch(format!(
                "matvec {}x{} by {}x{}",
                mt.rows(),
                mt.cols(),
                vt.rows(),
                vt.cols()
            )));
        }
        let rows = mt.rows();
        let mut out = Vec::with_capacity(rows);
        for i in 0..rows {
            let mut acc = 0.0;
            for (a, b) in mt.row(i).iter().zip(vt.data()) {
                acc += a * b;
            }
            out.push(acc);
        }
        Ok(self.push(Tensor::vector(out), Op::MatVec { m, v }))
    }

    /// Element-wise addition of same-shaped tensors.
    pub fn add(&mut self, a: NodeId, b: NodeId) -> Result<NodeId> {
        let (at, bt) = (self.value(a), self.value(b));
        if !at.same_shape(bt) {
            return Err(Error::ShapeMismatch(format!(
                "add {}x{} to {}x{}",
                at.rows(),
                at.cols(),
                bt.rows(),
                bt.cols()
            )));
        }
        let mut out = at.clone();
        for (x, y) in out.data_mut().iter_mut().zip(bt.data()) {
            *x += y;
        }
        Ok(self.push(out, Op::Add { a, b }))
    }

    /// Element-wise (Hadamard) product of same-shaped tensors.
    pub fn mul(&mut self, a: NodeId, b: NodeId) -> Result<NodeId> {
        let (at, bt) = (self.value(a), self.value(b));
        if !at.same_shape(bt) {
            return Err(Error::ShapeMismatch(format!(
                "mul {}x{} by {}x{}",
                at.rows(),
                at.cols(),
                bt.rows(),
                bt.cols()
            )));
        }
        let mut out = at.clone();
        for (x, y) in out.data_mut().iter_mut().zip(bt.data()) {
            *x *= y;
        }
        Ok(self.push(out, Op::Mul { a, b }))
    }

    pub fn tanh(&mut self, x: NodeId) -> NodeId {
        let mut out = self.value(x).clone();
        for v in out.data_mut() {
            *v = v.tanh();
        }
        self.push(out, Op::Tanh { x })
    }

    pub fn sigmoid(&mut self, x: NodeId) -> NodeId {
        let mut out = self.value(x).clone();
        for v in out.data_mut() {
            *v = sigmoid(*v);
        }
        self.push(out, Op::Sigmoid { x })
    }

    /// Numerically stable softmax over a vector.
    pub fn softmax(&mut self, x: NodeId) -> Result<NodeId> {
        let xt = self.value(x);
        if !xt.is_vector() || xt.is_empty() {
            return Err(Error::ShapeMismatch(format!(
                "softmax needs a nonempty vector, got {}x{}",
                xt.rows(),
                xt.cols()
            )));
        }
        let max = xt.data().iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        let exps: Vec<f64> = xt.data().iter().map(|v| (v - max).exp()).collect();
        let sum: f64 = exps.iter().sum();
        let out = exps.into_iter().map(|e| e / sum).collect();
        Ok(self.push(Tensor::vector(out), Op::Softmax { x }))
    }

    /// Element-wise mean over a nonempty set of same-shaped tensors, summed
    /// in the order given.
    pub fn mean(&mut self, xs: &[NodeId]) -> Result<NodeId> {
        self.check_set(xs, "mean")?;
        let mut out = self.value(xs[0]).clone();
        for &x in &xs[1..] {
            for (acc, v) in out.data_mut().iter_mut().zip(self.nodes[x.0].value.data()) {
                *acc += v;
            }
        }
        let n = xs.len() as f64;
        for v in out.data_mut() {
            *v /= n;
        }
        Ok(self.push(out, Op::Mean { xs: xs.to_vec() }))
    }

    /// Element-wise max over a nonempty set of same-shaped tensors. The
    /// winning input index is recorded per coordinate; ties go to the lower
    /// set index.
    pub fn max(&mut self, xs: &[NodeId]) -> Result<NodeId> {
        self.check_set(xs, "max")?;
        let mut out = self.value(xs[0]).clone();
        let mut winners = vec![0usize; out.len()];
        for (k, &x) in xs.iter().enumerate().skip(1) {
            for (c, (acc, v)) in out
                .data_mut()
                .iter_mut()
                .zip(self.nodes[x.0].value.data())
                .enumerate()
            {
                if *v > *acc {
                    *acc = *v;
                    winners[c] = k;
                }
            }
        }
        Ok(self.push(
            out,
            Op::Max {
                xs: xs.to_vec(),
                winners,
            },
        ))
    }

    fn check_set(&self, xs: &[NodeId], what: &str) -> Result<()> {
        if xs.is_empty() {
            return Err(Error::ShapeMismatch(format!("{} over an empty set", what)));
        }
        let first = self.value(xs[0]);
        for &x in &xs[1..] {
            if !self.value(x).same_shape(first) {
                return Err(Error::ShapeMismatch(format!(
                    "{} over differently shaped tensors",
                    what
                )));
            }
        }
        Ok(())
    }

    /// Concatenate two vectors.
    pub fn concat(&mut self, a: NodeId, b: NodeId) -> Result<NodeId> {
        let (at, bt) = (self.value(a), self.value(b));
        if !at.is_vector() || !bt.is_vector() {
            return Err(Error::ShapeMismatch("concat needs vectors".to_string()));
        }
        let mut out = at.data().to_vec();
        out.extend_from_slice(bt.data());
        Ok(self.push(Tensor::vector(out), Op::Concat { a, b }))
    }

    /// Dot product of two same-length vectors; yields a scalar node.
    pub fn dot(&mut self, a: NodeId, b: NodeId) -> Result<NodeId> {
        let (at, bt) = (self.value(a), self.value(b));
        if !at.is_vector() || !bt.is_vector() || at.len() != bt.len() {
            return Err(Error::ShapeMismatch(format!(
                "dot of lengths {} and {}",
                at.len(),
                bt.len()
            )));
        }
        let value = at.data().iter().zip(bt.data()).map(|(x, y)| x * y).sum();
        Ok(self.push(Tensor::scalar(value), Op::Dot { a, b }))
    }

    /// Element-wise natural log, clamped below at 1e-12.
    pub fn log(&mut self, x: NodeId) -> NodeId {
        let mut out = self.value(x).clone();
        for v in out.data_mut() {
            *v = v.max(LOG_FLOOR).ln();
        }
        self.push(out, Op::Log { x })
    }

    pub fn neg(&mut self, x: NodeId) -> NodeId {
        let mut out = self.value(x).clone();
        for v in out.data_mut() {
            *v = -*v;
        }
        self.push(out, Op::Neg { x })
    }

    /// Extract row `index` of a matrix as a vector.
    pub fn row(&mut self, m: NodeId, index: usize) -> Result<NodeId> {
        let mt = self.value(m);
        if index >= mt.rows() {
            return Err(Error::IndexOutOfRange {
                index,
                len: mt.rows(),
            });
        }
        let out = Tensor::vector(mt.row(index).to_vec());
        Ok(self.push(out, Op::Row { m, index }))
    }

    /// Extract coordinate `index` of a vector as a scalar node.
    pub fn pick(&mut self, x: NodeId, index: usize) -> Result<NodeId> {
        let xt = self.value(x);
        if index >= xt.len() {
            return Err(Error::IndexOutOfRange {
                index,
                len: xt.len(),
            });
        }
        let value = xt.data()[index];
        Ok(self.push(Tensor::scalar(value), Op::Pick { x, index }))
    }

    /// Reverse sweep: accumulate d(loss)/d(parameter) into the store's
    /// gradient slots for every parameter leaf on this tape.
    pub fn backward(&self, loss: NodeId, store: &mut ParameterStore) -> Result<()> {
        let lt = self.value(loss);
        if !lt.is_scalar() {
            return Err(Error::NotScalarLoss {
                rows: lt.rows(),
                cols: lt.cols(),
            });
        }
        let mut grads: Vec<Tensor> = self
            .nodes
            .iter()
            .map(|n| Tensor::zeros_like(&n.value))
            .collect();
        grads[loss.0].data_mut()[0] = 1.0;

        for i in (0..=loss.0).rev() {
            // Split off this node's gradient so inputs (always earlier on
            // the tape) can be updated without aliasing.
            let (before, rest) = grads.split_at_mut(i);
            let g = &rest[0];
            match &self.nodes[i].op {
                Op::Leaf => {}
                Op::MatVec { m, v } => {
                    let mt = &self.nodes[m.0].value;
                    let vt = &self.nodes[v.0].value;
                    let (rows, cols) = (mt.rows(), mt.cols());
                    for r in 0..rows {
                        let gr = g.data()[r];
                        if gr == 0.0 {
                            continue;
                        }
                        let dm = before[m.0].row_mut(r);
                        for (dmj, vj) in dm.iter_mut().zip(vt.data()) {
                            *dmj += gr * vj;
                        }
                    }
                    let dv = before[v.0].data_mut();
                    for r in 0..rows {
                        let gr = g.data()[r];
                        if gr == 0.0 {
                            continue;
                        }
                        for (dvj, mj) in dv.iter_mut().zip(mt.row(r)) {
                            *dvj += gr * mj;
                        }
                    }
                    let _ = cols;
                }
                Op::Add { a, b } => {
                    accumulate(&mut before[a.0], g.data());
                    accumulate(&mut before[b.0], g.data());
                }
                Op::Mul { a, b } => {
                    let (ai, bi) = (a.0, b.0);
                    let av: Vec<f64> = self.nodes[ai].value.data().to_vec();
                    for ((da, gv), bv) in before[ai]
                        .data_mut()
                        .iter_mut()
                        .zip(g.data())
                        .zip(self.nodes[bi].value.data())
                    {
                        *da += gv * bv;
                    }
                    for ((db, gv), avx) in
                        before[bi].data_mut().iter_mut().zip(g.data()).zip(&av)
                    {
                        *db += gv * avx;
                    }
                }
                Op::Tanh { x } => {
                    let y = self.nodes[i].value.data();
                    for ((dx, gv), yv) in
                        before[x.0].data_mut().iter_mut().zip(g.data()).zip(y)
                    {
                        *dx += gv * (1.0 - yv * yv);
                    }
                }
                Op::Sigmoid { x } => {
                    let y = self.nodes[i].value.data();
                    for ((dx, gv), yv) in
                        before[x.0].data_mut().iter_mut().zip(g.data()).zip(y)
                    {
                        *dx += gv * yv * (1.0 - yv);
                    }
                }
                Op::Softmax { x } => {
                    let y = self.nodes[i].value.data();
                    let inner: f64 = g.data().iter().zip(y).map(|(gv, yv)| gv * yv).sum();
                    for ((dx, gv), yv) in
                        before[x.0].data_mut().iter_mut().zip(g.data()).zip(y)
                    {
                        *dx += yv * (gv - inner);
                    }
                }
                Op::Mean { xs } => {
                    let scale = 1.0 / xs.len() as f64;
                    for &x in xs {
                        for (dx, gv) in before[x.0].data_mut().iter_mut().zip(g.data()) {
                            *dx += gv * scale;
                        }
                    }
                }
                Op::Max { xs, winners } => {
                    for (c, &w) in winners.iter().enumerate() {
                        before[xs[w].0].data_mut()[c] += g.data()[c];
                    }
                }
                Op::Concat { a, b } => {
                    let split = self.nodes[a.0].value.len();
                    accumulate(&mut before[a.0], &g.data()[..split]);
                    accumulate(&mut before[b.0], &g.data()[split..]);
                }
                Op::Dot { a, b } => {
                    let gs = g.data()[0];
                    let (ai, bi) = (a.0, b.0);
                    let av: Vec<f64> = self.nodes[ai].value.data().to_vec();
                    for (da, bv) in before[ai]
                        .data_mut()
                        .iter_mut()
                        .zip(self.nodes[bi].value.data())
                    {
                        *da += gs * bv;
                    }
                    for (db, avx) in before[bi].data_mut().iter_mut().zip(&av) {
                        *db += gs * avx;
                    }
                }
                Op::Log { x } => {
                    let xv = self.nodes[x.0].value.data();
                    for ((dx, gv), v) in
                        before[x.0].data_mut().iter_mut().zip(g.data()).zip(xv)
                    {
                        if *v >= LOG_FLOOR {
                            *dx += gv / v;
                        }
                    }
                }
                Op::Neg { x } => {
                    for (dx, gv) in before[x.0].data_mut().iter_mut().zip(g.data()) {
                        *dx -= gv;
                    }
                }
                Op::Row { m, index } => {
                    accumulate_slice(before[m.0].row_mut(*index), g.data());
                }
                Op::Pick { x, index } => {
                    before[x.0].data_mut()[*index] += g.data()[0];
                }
            }
        }

        for (name, id) in &self.param_nodes {
            store.accumulate_grad(name, &grads[id.0]);
        }
        Ok(())
    }
}

fn accumulate(target: &mut Tensor, delta: &[f64]) {
    accumulate_slice(target.data_mut(), delta);
}

fn accumulate_slice(target: &mut [f64], delta: &[f64]) {
    for (t, d) in target.iter_mut().zip(delta) {
        *t += d;
    }
}

pub fn sigmoid(x: f64) -> f64 {
    1.0 / (1.0 + (-x).exp())
}
