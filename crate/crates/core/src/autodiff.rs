//! Tape-based reverse-mode differentiation over small dense matrices.
//!
//! Every operation appends a node to a [`Tape`]; [`Tape::backward`] walks the
//! nodes in reverse append order exactly once and accumulates gradients.
//! Values are row-major `f64` matrices; column vectors have shape `(n, 1)`.
//!
//! ```
//! use msan::autodiff::Tape;
//!
//! let mut tape = Tape::new();
//! let w = tape.leaf((1, 2), vec![2.0, -1.0]).unwrap();
//! let x = tape.leaf((2, 1), vec![3.0, 4.0]).unwrap();
//! let y = tape.matmul(w, x).unwrap();
//! let loss = tape.sum(y);
//! tape.backward(loss).unwrap();
//! assert_eq!(tape.grad(w), vec![3.0, 4.0]);
//! ```

use crate::error::{Error, Result};

/// Stand-in for `-inf` on masked logits.
pub const MASK_LOGIT: f64 = -1e30;

pub type Shape = (usize, usize);

/// Handle to a node recorded on a [`Tape`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct Tensor(usize);

impl Tensor {
    pub fn id(self) -> usize {
        self.0
    }
}

#[derive(Debug, Clone)]
enum Op {
    Leaf,
    MatMul(Tensor, Tensor),
    Add(Tensor, Tensor),
    Sub(Tensor, Tensor),
    Mul(Tensor, Tensor),
    Affine { src: Tensor, scale: f64 },
    ConcatRows(Vec<Tensor>),
    ConcatCols(Vec<Tensor>),
    SliceRows { src: Tensor, start: usize },
    Transpose(Tensor),
    Tanh(Tensor),
    Sigmoid(Tensor),
    Exp(Tensor),
    Log(Tensor),
    Sum(Tensor),
    Mean(Tensor),
    MaskedSoftmax(Tensor),
}

#[derive(Debug, Clone)]
struct Node {
    shape: Shape,
    value: Vec<f64>,
    op: Op,
}

#[derive(Debug, Default)]
pub struct Tape {
    nodes: Vec<Node>,
    grads: Vec<Option<Vec<f64>>>,
    backward_done: bool,
}

impl Tape {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    fn push(&mut self, shape: Shape, value: Vec<f64>, op: Op) -> Tensor {
        debug_assert_eq!(shape.0 * shape.1, value.len());
        self.nodes.push(Node { shape, value, op });
        Tensor(self.nodes.len() - 1)
    }

    fn node(&self, t: Tensor) -> &Node {
        &self.nodes[t.0]
    }

    pub fn leaf(&mut self, shape: Shape, value: Vec<f64>) -> Result<Tensor> {
        if shape.0 * shape.1 != value.len() {
            return Err(Error::Shape {
                op: "leaf",
                left: shape,
                right: (value.len(), 1),
            });
        }
        Ok(self.push(shape, value, Op::Leaf))
    }

    pub fn column(&mut self, value: Vec<f64>) -> Tensor {
        let n = value.len();
        self.push((n, 1), value, Op::Leaf)
    }

    pub fn shape(&self, t: Tensor) -> Shape {
        self.node(t).shape
    }

    pub fn value(&self, t: Tensor) -> &[f64] {
        &self.node(t).value
    }

    /// Value of a `(1, 1)` tensor.
    pub fn scalar(&self, t: Tensor) -> f64 {
        self.node(t).value[0]
    }

    /// Accumulated gradient; zeros if `t` did not influence the loss.
    pub fn grad(&self, t: Tensor) -> Vec<f64> {
        match self.grads.get(t.0) {
            Some(Some(g)) => g.clone(),
            _ => vec![0.0; self.node(t).value.len()],
        }
    }

    /// Drops gradients so `backward` may run again.
    pub fn zero_grad(&mut self) {
        self.grads.clear();
        self.backward_done = false;
    }

    fn same_shape(&self, op: &'static str, a: Tensor, b: Tensor) -> Result<Shape> {
        let (sa, sb) = (self.shape(a), self.shape(b));
        if sa != sb {
            return Err(Error::Shape {
                op,
                left: sa,
                right: sb,
            });
        }
        Ok(sa)
    }

    pub fn matmul(&mut self, a: Tensor, b: Tensor) -> Result<Tensor> {
        let ((m, k), (k2, n)) = (self.shape(a), self.shape(b));
        if k != k2 {
            return Err(Error::Shape {
                op: "matmul",
                left: (m, k),
                right: (k2, n),
            });
        }
        let value = matmul_raw(self.value(a), self.value(b), m, k, n);
        Ok(self.push((m, n), value, Op::MatMul(a, b)))
    }

    fn zip(&mut self, op: &'static str, a: Tensor, b: Tensor, f: fn(f64, f64) -> f64, node: Op) -> Result<Tensor> {
        let shape = self.same_shape(op, a, b)?;
        let value = self
            .value(a)
            .iter()
            .zip(self.value(b))
            .map(|(&x, &y)| f(x, y))
            .collect();
        Ok(self.push(shape, value, node))
    }

    pub fn add(&mut self, a: Tensor, b: Tensor) -> Result<Tensor> {
        self.zip("add", a, b, |x, y| x + y, Op::Add(a, b))
    }

    pub fn sub(&mut self, a: Tensor, b: Tensor) -> Result<Tensor> {
        self.zip("sub", a, b, |x, y| x - y, Op::Sub(a, b))
    }

    /// Elementwise product.
    pub fn mul(&mut self, a: Tensor, b: Tensor) -> Result<Tensor> {
        self.zip("mul", a, b, |x, y| x * y, Op::Mul(a, b))
    }

    /// `scale * x + offset`, elementwise.
    pub fn affine(&mut self, x: Tensor, scale: f64, offset: f64) -> Tensor {
        let shape = self.shape(x);
        let value = self.value(x).iter().map(|&v| scale * v + offset).collect();
        self.push(shape, value, Op::Affine { src: x, scale })
    }

    pub fn scale(&mut self, x: Tensor, scale: f64) -> Tensor {
        self.affine(x, scale, 0.0)
    }

    /// `1 - x`.
    pub fn one_minus(&mut self, x: Tensor) -> Tensor {
        self.affine(x, -1.0, 1.0)
    }

    /// Stacks tensors with equal column counts on top of each other.
    pub fn concat_rows(&mut self, parts: &[Tensor]) -> Result<Tensor> {
        let first = *parts.first().ok_or(Error::Shape {
            op: "concat_rows",
            left: (0, 0),
            right: (0, 0),
        })?;
        let cols = self.shape(first).1;
        let mut rows = 0;
        let mut value = Vec::new();
        for &p in parts {
            let s = self.shape(p);
            if s.1 != cols {
                return Err(Error::Shape {
                    op: "concat_rows",
                    left: self.shape(first),
                    right: s,
                });
            }
            rows += s.0;
            value.extend_from_slice(self.value(p));
        }
        Ok(self.push((rows, cols), value, Op::ConcatRows(parts.to_vec())))
    }

    /// Places tensors with equal row counts side by side.
    pub fn concat_cols(&mut self, parts: &[Tensor]) -> Result<Tensor> {
        let first = *parts.first().ok_or(Error::Shape {
            op: "concat_cols",
            left: (0, 0),
            right: (0, 0),
        })?;
        let rows = self.shape(first).0;
        let mut cols = 0;
        for &p in parts {
            let s = self.shape(p);
            if s.0 != rows {
                return Err(Error::Shape {
                    op: "concat_cols",
                    left: self.shape(first),
                    right: s,
                });
            }
            cols += s.1;
        }
        let mut value = vec![0.0; rows * cols];
        let mut offset = 0;
        for &p in parts {
            let (_, pc) = self.shape(p);
            let src = self.value(p);
            for r in 0..rows {
                value[r * cols + offset..r * cols + offset + pc]
                    .copy_from_slice(&src[r * pc..(r + 1) * pc]);
            }
            offset += pc;
        }
        Ok(self.push((rows, cols), value, Op::ConcatCols(parts.to_vec())))
    }

    /// Rows `start..start + len`.
    pub fn slice_rows(&mut self, x: Tensor, start: usize, len: usize) -> Result<Tensor> {
        let (rows, cols) = self.shape(x);
        if start + len > rows || len == 0 {
            return Err(Error::Shape {
                op: "slice_rows",
                left: (rows, cols),
                right: (start, start + len),
            });
        }
        let value = self.value(x)[start * cols..(start + len) * cols].to_vec();
        Ok(self.push((len, cols), value, Op::SliceRows { src: x, start }))
    }

    pub fn transpose(&mut self, x: Tensor) -> Tensor {
        let (rows, cols) = self.shape(x);
        let src = self.value(x);
        let mut value = vec![0.0; rows * cols];
        for r in 0..rows {
            for c in 0..cols {
                value[c * rows + r] = src[r * cols + c];
            }
        }
        self.push((cols, rows), value, Op::Transpose(x))
    }

    fn map(&mut self, x: Tensor, f: fn(f64) -> f64, op: Op) -> Tensor {
        let shape = self.shape(x);
        let value = self.value(x).iter().map(|&v| f(v)).collect();
        self.push(shape, value, op)
    }

    pub fn tanh(&mut self, x: Tensor) -> Tensor {
        self.map(x, f64::tanh, Op::Tanh(x))
    }

    pub fn sigmoid(&mut self, x: Tensor) -> Tensor {
        self.map(x, sigmoid, Op::Sigmoid(x))
    }

    pub fn exp(&mut self, x: Tensor) -> Tensor {
        self.map(x, f64::exp, Op::Exp(x))
    }

    pub fn log(&mut self, x: Tensor) -> Tensor {
        self.map(x, f64::ln, Op::Log(x))
    }

    pub fn sum(&mut self, x: Tensor) -> Tensor {
        let s = self.value(x).iter().sum();
        self.push((1, 1), vec![s], Op::Sum(x))
    }

    pub fn mean(&mut self, x: Tensor) -> Tensor {
        let v = self.value(x);
        let m = v.iter().sum::<f64>() / v.len() as f64;
        self.push((1, 1), vec![m], Op::Mean(x))
    }

    /// Softmax over all entries of `logits`, with `blocked[i] == true`
    /// forcing probability exactly 0 at position `i`.
    pub fn masked_softmax(&mut self, logits: Tensor, blocked: &[bool]) -> Result<Tensor> {
        let shape = self.shape(logits);
        let n = shape.0 * shape.1;
        if blocked.len() != n {
            return Err(Error::Shape {
                op: "masked_softmax",
                left: shape,
                right: (blocked.len(), 1),
            });
        }
        if blocked.iter().all(|&b| b) {
            return Err(Error::EmptyAction);
        }
        let value = masked_softmax_raw(self.value(logits), blocked);
        Ok(self.push(shape, value, Op::MaskedSoftmax(logits)))
    }

    pub fn softmax(&mut self, logits: Tensor) -> Result<Tensor> {
        let n = self.value(logits).len();
        self.masked_softmax(logits, &vec![false; n])
    }

    /// Populates gradients of the scalar `loss` with respect to every node.
    pub fn backward(&mut self, loss: Tensor) -> Result<()> {
        if self.backward_done {
            return Err(Error::StaleTape);
        }
        let shape = self.shape(loss);
        if shape != (1, 1) {
            return Err(Error::NonScalarLoss(shape));
        }
        let mut grads: Vec<Option<Vec<f64>>> = vec![None; self.nodes.len()];
        grads[loss.0] = Some(vec![1.0]);
        for id in (0..=loss.0).rev() {
            let Some(g) = grads[id].take() else { continue };
            self.propagate(id, &g, &mut grads);
            grads[id] = Some(g);
        }
        self.grads = grads;
        self.backward_done = true;
        Ok(())
    }

    fn propagate(&self, id: usize, g: &[f64], grads: &mut [Option<Vec<f64>>]) {
        let node = &self.nodes[id];
        match &node.op {
            Op::Leaf => {}
            Op::MatMul(a, b) => {
                let (m, k) = self.shape(*a);
                let n = self.shape(*b).1;
                let (av, bv) = (self.value(*a), self.value(*b));
                let mut ga = vec![0.0; m * k];
                let mut gb = vec![0.0; k * n];
                for i in 0..m {
                    for j in 0..n {
                        let gij = g[i * n + j];
                        if gij == 0.0 {
                            continue;
                        }
                        for p in 0..k {
                            ga[i * k + p] += gij * bv[p * n + j];
                            gb[p * n + j] += av[i * k + p] * gij;
                        }
                    }
                }
                accumulate(grads, *a, &ga);
                accumulate(grads, *b, &gb);
            }
            Op::Add(a, b) => {
                accumulate(grads, *a, g);
                accumulate(grads, *b, g);
            }
            Op::Sub(a, b) => {
                accumulate(grads, *a, g);
                let neg: Vec<f64> = g.iter().map(|v| -v).collect();
                accumulate(grads, *b, &neg);
            }
            Op::Mul(a, b) => {
                let (av, bv) = (self.value(*a), self.value(*b));
                let ga: Vec<f64> = g.iter().zip(bv).map(|(g, b)| g * b).collect();
                let gb: Vec<f64> = g.iter().zip(av).map(|(g, a)| g * a).collect();
                accumulate(grads, *a, &ga);
                accumulate(grads, *b, &gb);
            }
            Op::Affine { src, scale } => {
                let gs: Vec<f64> = g.iter().map(|v| v * scale).collect();
                accumulate(grads, *src, &gs);
            }
            Op::ConcatRows(parts) => {
                let mut offset = 0;
                for &p in parts {
                    let len = self.value(p).len();
                    accumulate(grads, p, &g[offset..offset + len]);
                    offset += len;
                }
            }
            Op::ConcatCols(parts) => {
                let (rows, cols) = node.shape;
                let mut offset = 0;
                for &p in parts {
                    let pc = self.shape(p).1;
                    let mut gp = Vec::with_capacity(rows * pc);
                    for r in 0..rows {
                        gp.extend_from_slice(&g[r * cols + offset..r * cols + offset + pc]);
                    }
                    accumulate(grads, p, &gp);
                    offset += pc;
                }
            }
            Op::SliceRows { src, start } => {
                let cols = self.shape(*src).1;
                let mut gs = vec![0.0; self.value(*src).len()];
                gs[start * cols..start * cols + g.len()].copy_from_slice(g);
                accumulate(grads, *src, &gs);
            }
            Op::Transpose(src) => {
                let (rows, cols) = self.shape(*src);
                let mut gs = vec![0.0; rows * cols];
                for r in 0..rows {
                    for c in 0..cols {
                        gs[r * cols + c] = g[c * rows + r];
                    }
                }
                accumulate(grads, *src, &gs);
            }
            Op::Tanh(src) => {
                let gs: Vec<f64> = g.iter().zip(&node.value).map(|(g, y)| g * (1.0 - y * y)).collect();
                accumulate(grads, *src, &gs);
            }
            Op::Sigmoid(src) => {
                let gs: Vec<f64> = g.iter().zip(&node.value).map(|(g, y)| g * y * (1.0 - y)).collect();
                accumulate(grads, *src, &gs);
            }
            Op::Exp(src) => {
                let gs: Vec<f64> = g.iter().zip(&node.value).map(|(g, y)| g * y).collect();
                accumulate(grads, *src, &gs);
            }
            Op::Log(src) => {
                let gs: Vec<f64> = g.iter().zip(self.value(*src)).map(|(g, x)| g / x).collect();
                accumulate(grads, *src, &gs);
            }
            Op::Sum(src) => {
                let gs = vec![g[0]; self.value(*src).len()];
                accumulate(grads, *src, &gs);
            }
            Op::Mean(src) => {
                let n = self.value(*src).len();
                let gs = vec![g[0] / n as f64; n];
                accumulate(grads, *src, &gs);
            }
            Op::MaskedSoftmax(src) => {
                let y = &node.value;
                let dot: f64 = y.iter().zip(g).map(|(y, g)| y * g).sum();
                // Masked entries have y == 0 and therefore zero gradient.
                let gs: Vec<f64> = y.iter().zip(g).map(|(y, g)| y * (g - dot)).collect();
                accumulate(grads, *src, &gs);
            }
        }
    }
}

fn accumulate(grads: &mut [Option<Vec<f64>>], t: Tensor, g: &[f64]) {
    match &mut grads[t.0] {
        Some(acc) => acc.iter_mut().zip(g).for_each(|(a, b)| *a += b),
        slot @ None => *slot = Some(g.to_vec()),
    }
}

fn sigmoid(x: f64) -> f64 {
    if x >= 0.0 {
        1.0 / (1.0 + (-x).exp())
    } else {
        let e = x.exp();
        e / (1.0 + e)
    }
}

pub(crate) fn matmul_raw(a: &[f64], b: &[f64], m: usize, k: usize, n: usize) -> Vec<f64> {
    let mut out = vec![0.0; m * n];
    for i in 0..m {
        for p in 0..k {
            let aip = a[i * k + p];
            if aip == 0.0 {
                continue;
            }
            let row = &b[p * n..(p + 1) * n];
            for (o, &bv) in out[i * n..(i + 1) * n].iter_mut().zip(row) {
                *o += aip * bv;
            }
        }
    }
    out
}

/// Forward masked softmax on plain slices. Blocked positions are exactly 0.
pub fn masked_softmax_raw(logits: &[f64], blocked: &[bool]) -> Vec<f64> {
    let masked: Vec<f64> = logits
        .iter()
        .zip(blocked)
        .map(|(&l, &b)| if b { MASK_LOGIT } else { l })
        .collect();
    let max = masked
        .iter()
        .zip(blocked)
        .filter(|(_, &b)| !b)
        .map(|(&l, _)| l)
        .fold(f64::NEG_INFINITY, f64::max);
    let mut out: Vec<f64> = masked
        .iter()
        .zip(blocked)
        .map(|(&l, &b)| if b { 0.0 } else { (l - max).exp() })
        .collect();
    let total: f64 = out.iter().sum();
    out.iter_mut().for_each(|v| *v /= total);
    out
}

/// Finite-difference helpers for checking analytic gradients.
pub mod gradcheck {
    /// Central difference of `f` at `x` along every coordinate in `coords`.
    pub fn central_difference<F>(f: &F, x: &[f64], coords: &[usize], h: f64) -> Vec<f64>
    where
        F: Fn(&[f64]) -> f64,
    {
        let mut probe = x.to_vec();
        coords
            .iter()
            .map(|&i| {
                let orig = probe[i];
                probe[i] = orig + h;
                let up = f(&probe);
                probe[i] = orig - h;
                let down = f(&probe);
                probe[i] = orig;
                (up - down) / (2.0 * h)
            })
            .collect()
    }

    /// `|a - n| / max(|a|, |n|, floor)`.
    pub fn relative_error(analytic: f64, numeric: f64, floor: f64) -> f64 {
        let denom = analytic.abs().max(numeric.abs()).max(floor);
        (analytic - numeric).abs() / denom
    }

    /// Largest relative error over paired slices.
    pub fn max_relative_error(analytic: &[f64], numeric: &[f64], floor: f64) -> f64 {
        analytic
            .iter()
            .zip(numeric)
            .map(|(&a, &n)| relative_error(a, n, floor))
            .fold(0.0, f64::max)
    }

    use super::{Shape, Tape, Tensor};

    pub const STEP: f64 = 1e-6;
    pub const TOLERANCE: f64 = 1e-5;
    /// Denominator floor so near-zero gradients are compared absolutely.
    pub const FLOOR: f64 = 1e-3;

    #[derive(Debug, Clone, PartialEq)]
    pub struct CheckReport {
        pub name: String,
        pub coords: usize,
        pub max_rel_err: f64,
    }

    impl CheckReport {
        pub fn passed(&self) -> bool {
            self.max_rel_err < TOLERANCE
        }
    }

    /// Non-uniform weighting so every output coordinate matters.
    fn weighted_sum(tape: &mut Tape, t: Tensor) -> Tensor {
        let n = tape.value(t).len();
        let shape = tape.shape(t);
        let w = tape
            .leaf(shape, (0..n).map(|i| 0.3 + 0.7 * ((i * 7 % 5) as f64)).collect())
            .expect("matching length");
        let p = tape.mul(t, w).expect("same shape");
        tape.sum(p)
    }

    /// Compares the gradient of `weighted_sum(build(x))` against central
    /// differences on every coordinate of `x`.
    pub fn check_op<F>(name: &str, shape: Shape, x: Vec<f64>, build: F) -> CheckReport
    where
        F: Fn(&mut Tape, Tensor) -> Tensor,
    {
        let mut tape = Tape::new();
        let leaf = tape.leaf(shape, x.clone()).expect("matching length");
        let out = build(&mut tape, leaf);
        let loss = weighted_sum(&mut tape, out);
        tape.backward(loss).expect("scalar loss");
        let analytic = tape.grad(leaf);
        let f = |v: &[f64]| {
            let mut t = Tape::new();
            let l = t.leaf(shape, v.to_vec()).expect("matching length");
            let o = build(&mut t, l);
            let s = weighted_sum(&mut t, o);
            t.scalar(s)
        };
        let coords: Vec<usize> = (0..x.len()).collect();
        let numeric = central_difference(&f, &x, &coords, STEP);
        CheckReport {
            name: name.to_owned(),
            coords: coords.len(),
            max_rel_err: max_relative_error(&analytic, &numeric, FLOOR),
        }
    }

    fn sample(n: usize, seed: u64) -> Vec<f64> {
        (0..n)
            .map(|i| (((i as u64 + 1) * 2654435761 + seed * 97) % 1000) as f64 / 500.0 - 1.0)
            .collect()
    }

    /// One check per differentiable primitive on the tape.
    pub fn primitive_suite() -> Vec<CheckReport> {
        let x = sample(6, 1);
        let pos: Vec<f64> = x.iter().map(|v| v.abs() + 0.5).collect();
        let c6 = sample(6, 9);
        let b = sample(8, 3);
        let a = sample(12, 5);
        let z = sample(5, 6);
        vec![
            check_op("tanh", (3, 2), x.clone(), |t, v| t.tanh(v)),
            check_op("sigmoid", (3, 2), x.clone(), |t, v| t.sigmoid(v)),
            check_op("exp", (3, 2), x.clone(), |t, v| t.exp(v)),
            check_op("log", (3, 2), pos, |t, v| t.log(v)),
            check_op("affine", (3, 2), x.clone(), |t, v| t.affine(v, -2.5, 0.75)),
            check_op("scale", (3, 2), x.clone(), |t, v| t.scale(v, 1.75)),
            check_op("one_minus", (3, 2), x.clone(), |t, v| t.one_minus(v)),
            check_op("mean", (3, 2), x.clone(), |t, v| t.mean(v)),
            check_op("sum", (3, 2), x.clone(), |t, v| t.sum(v)),
            check_op("mul", (3, 2), x.clone(), |t, v| t.mul(v, v).unwrap()),
            check_op("add_sub", (3, 2), x.clone(), |t, v| {
                let c = t.leaf((3, 2), c6.clone()).unwrap();
                let s = t.add(v, c).unwrap();
                let d = t.sub(s, c).unwrap();
                let e = t.sub(c, d).unwrap();
                t.mul(e, c).unwrap()
            }),
            check_op("transpose", (3, 2), x.clone(), |t, v| t.transpose(v)),
            check_op("slice_rows", (3, 2), x.clone(), |t, v| t.slice_rows(v, 1, 2).unwrap()),
            check_op("concat_rows", (3, 2), x.clone(), |t, v| {
                let c = t.leaf((1, 2), vec![0.5, -0.5]).unwrap();
                t.concat_rows(&[c, v, v]).unwrap()
            }),
            check_op("concat_cols", (3, 2), x.clone(), |t, v| {
                let c = t.leaf((3, 1), vec![0.5, -0.5, 1.0]).unwrap();
                t.concat_cols(&[v, c, v]).unwrap()
            }),
            check_op("matmul_lhs", (3, 4), sample(12, 4), |t, aa| {
                let bb = t.leaf((4, 2), b.clone()).unwrap();
                t.matmul(aa, bb).unwrap()
            }),
            check_op("matmul_rhs", (4, 2), b.clone(), |t, bb| {
                let aa = t.leaf((3, 4), a.clone()).unwrap();
                t.matmul(aa, bb).unwrap()
            }),
            check_op("softmax", (5, 1), z.clone(), |t, v| t.softmax(v).unwrap()),
            check_op("masked_softmax", (5, 1), z.clone(), |t, v| {
                t.masked_softmax(v, &[false, true, false, false, true]).unwrap()
            }),
            check_op("log_masked_softmax", (5, 1), z, |t, v| {
                let p = t.masked_softmax(v, &[true, false, false, false, false]).unwrap();
                let q = t.slice_rows(p, 2, 1).unwrap();
                t.log(q)
            }),
        ]
    }
}
