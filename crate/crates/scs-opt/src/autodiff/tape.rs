use alloc::format;
use alloc::vec;
use alloc::vec::Vec;

use super::tensor::Tensor;
use crate::math;
use crate::{Error, Result};

/// Handle to a node on a [`Tape`].  Only meaningful on the tape that issued
/// it; ops reject out-of-range handles from other tapes.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct Var(pub(crate) usize);

impl Var {
    /// Index of the node on its tape.
    pub fn index(self) -> usize {
        self.0
    }
}

enum Op {
    Param,
    Constant,
    Add(usize, usize),
    Sub(usize, usize),
    Mul(usize, usize),
    MatMul(usize, usize),
    AddRow(usize, usize),
    Sigmoid(usize),
    Tanh(usize),
    Scale(usize, f64),
    Sum(usize),
    Mean(usize),
    EmbedRows { table: usize, ids: Vec<u32> },
    ConcatRows(Vec<usize>),
    ConcatCols(Vec<usize>),
    NarrowRows { src: usize, start: usize, len: usize },
    NarrowCols { src: usize, start: usize, len: usize },
    SoftmaxXentMean { logits: usize, targets: Vec<u32>, probs: Vec<f64> },
}

fn op_name(op: &Op) -> &'static str {
    match op {
        Op::Param => "param",
        Op::Constant => "constant",
        Op::Add(..) => "add",
        Op::Sub(..) => "sub",
        Op::Mul(..) => "mul",
        Op::MatMul(..) => "matmul",
        Op::AddRow(..) => "add_row",
        Op::Sigmoid(..) => "sigmoid",
        Op::Tanh(..) => "tanh",
        Op::Scale(..) => "scale",
        Op::Sum(..) => "sum",
        Op::Mean(..) => "mean",
        Op::EmbedRows { .. } => "embed_rows",
        Op::ConcatRows(..) => "concat_rows",
        Op::ConcatCols(..) => "concat_cols",
        Op::NarrowRows { .. } => "narrow_rows",
        Op::NarrowCols { .. } => "narrow_cols",
        Op::SoftmaxXentMean { .. } => "softmax_xent_mean",
    }
}

/// Append-only reverse-mode tape over [`Tensor`] values.
///
/// Ops evaluate eagerly; every produced value is checked finite at creation
/// and failures name the offending node.  A single [`Tape::backward`] call
/// replays the record in reverse topological order (which is simply reverse
/// insertion order, since inputs always precede outputs) and visits each node
/// exactly once; afterwards the tape is consumed and further backward calls
/// error rather than silently double-counting.
pub struct Tape {
    ops: Vec<Op>,
    vals: Vec<Tensor>,
    is_param: Vec<bool>,
    consumed: bool,
}

impl Default for Tape {
    fn default() -> Self {
        Self::new()
    }
}

impl Tape {
    pub fn new() -> Tape {
        Tape {
            ops: Vec::new(),
            vals: Vec::new(),
            is_param: Vec::new(),
            consumed: false,
        }
    }

    /// Number of recorded nodes.
    pub fn len(&self) -> usize {
        self.ops.len()
    }

    pub fn is_empty(&self) -> bool {
        self.ops.is_empty()
    }

    /// Registers a differentiable leaf.  Its gradient is reported by
    /// [`Tape::backward`] even when nothing downstream uses it.
    pub fn param(&mut self, value: Tensor) -> Result<Var> {
        self.push(Op::Param, value)
    }

    /// Registers a non-differentiable leaf.
    pub fn constant(&mut self, value: Tensor) -> Result<Var> {
        self.push(Op::Constant, value)
    }

    /// Value of a node.  Panics on a handle from another tape; the fallible
    /// accessors and ops are the checked surface.
    pub fn value(&self, v: Var) -> &Tensor {
        &self.vals[v.0]
    }

    /// Scalar value of a single-element node.
    pub fn item(&self, v: Var) -> Result<f64> {
        self.chk(v, "item")?;
        let t = &self.vals[v.0];
        if t.numel() == 1 {
            Ok(t.data()[0])
        } else {
            Err(Error::NotScalar {
                node: v.0,
                len: t.numel(),
            })
        }
    }

    pub fn add(&mut self, a: Var, b: Var) -> Result<Var> {
        self.elementwise("add", a, b, |x, y| x + y, Op::Add(a.0, b.0))
    }

    pub fn sub(&mut self, a: Var, b: Var) -> Result<Var> {
        self.elementwise("sub", a, b, |x, y| x - y, Op::Sub(a.0, b.0))
    }

    pub fn mul(&mut self, a: Var, b: Var) -> Result<Var> {
        self.elementwise("mul", a, b, |x, y| x * y, Op::Mul(a.0, b.0))
    }

    /// Matrix product of rank-2 operands, `[m,k] @ [k,n] -> [m,n]`.
    pub fn matmul(&mut self, a: Var, b: Var) -> Result<Var> {
        self.chk(a, "matmul")?;
        self.chk(b, "matmul")?;
        let (m, k) = self.req_rank2("matmul", a)?;
        let (k2, n) = self.req_rank2("matmul", b)?;
        if k != k2 {
            return Err(self.shape_err(
                "matmul",
                format!(
                    "inner dimensions differ: [{m},{k}] @ [{k2},{n}] (nodes {} and {})",
                    a.0, b.0
                ),
            ));
        }
        let mut out = vec![0.0; m * n];
        matmul_into(m, k, n, self.vals[a.0].data(), self.vals[b.0].data(), &mut out);
        self.push(Op::MatMul(a.0, b.0), Tensor::from_vec(&[m, n], out)?)
    }

    /// Adds a length-`n` row vector to every row of an `[m,n]` matrix.
    pub fn add_row(&mut self, m: Var, r: Var) -> Result<Var> {
        self.chk(m, "add_row")?;
        self.chk(r, "add_row")?;
        let (rows, cols) = self.req_rank2("add_row", m)?;
        let (rr, rc) = self.req_rank2("add_row", r)?;
        if rr != 1 || rc != cols {
            return Err(self.shape_err(
                "add_row",
                format!("row operand is [{rr},{rc}], matrix has {cols} columns"),
            ));
        }
        let mut out = self.vals[m.0].data().to_vec();
        let row = self.vals[r.0].data();
        for chunk in out.chunks_exact_mut(cols) {
            for (o, &b) in chunk.iter_mut().zip(row) {
                *o += b;
            }
        }
        let _ = rows;
        self.push(Op::AddRow(m.0, r.0), Tensor::from_vec(self.vals[m.0].shape(), out)?)
    }

    pub fn sigmoid(&mut self, x: Var) -> Result<Var> {
        self.unary("sigmoid", x, math::sigmoid, Op::Sigmoid(x.0))
    }

    pub fn tanh(&mut self, x: Var) -> Result<Var> {
        self.unary("tanh", x, math::tanh, Op::Tanh(x.0))
    }

    /// Multiplies every element by a fixed scalar.
    pub fn scale(&mut self, x: Var, c: f64) -> Result<Var> {
        self.unary("scale", x, |v| c * v, Op::Scale(x.0, c))
    }

    /// Sum of all elements, as a scalar node.
    pub fn sum(&mut self, x: Var) -> Result<Var> {
        self.chk(x, "sum")?;
        let s: f64 = self.vals[x.0].data().iter().sum();
        self.push(Op::Sum(x.0), Tensor::scalar(s))
    }

    /// Mean of all elements, as a scalar node.
    pub fn mean(&mut self, x: Var) -> Result<Var> {
        self.chk(x, "mean")?;
        let n = self.vals[x.0].numel();
        if n == 0 {
            return Err(self.shape_err("mean", format!("node {} is empty", x.0)));
        }
        let s: f64 = self.vals[x.0].data().iter().sum();
        self.push(Op::Mean(x.0), Tensor::scalar(s / n as f64))
    }

    /// Gathers rows of a `[v,e]` table: output row `i` is table row `ids[i]`.
    pub fn embed_rows(&mut self, table: Var, ids: &[u32]) -> Result<Var> {
        self.chk(table, "embed_rows")?;
        let (v, e) = self.req_rank2("embed_rows", table)?;
        if ids.is_empty() {
            return Err(self.shape_err("embed_rows", format!("empty id list for node {}", table.0)));
        }
        if let Some(&bad) = ids.iter().find(|&&id| id as usize >= v) {
            return Err(self.shape_err(
                "embed_rows",
                format!("id {bad} out of range for table with {v} rows (node {})", table.0),
            ));
        }
        let tdata = self.vals[table.0].data();
        let mut out = Vec::with_capacity(ids.len() * e);
        for &id in ids {
            let r = id as usize * e;
            out.extend_from_slice(&tdata[r..r + e]);
        }
        self.push(
            Op::EmbedRows {
                table: table.0,
                ids: ids.to_vec(),
            },
            Tensor::from_vec(&[ids.len(), e], out)?,
        )
    }

    /// Stacks rank-2 operands with equal column counts on top of each other.
    pub fn concat_rows(&mut self, parts: &[Var]) -> Result<Var> {
        let shapes = self.concat_shapes("concat_rows", parts)?;
        let cols = shapes[0].1;
        let mut rows = 0;
        for (i, &(r, c)) in shapes.iter().enumerate() {
            if c != cols {
                return Err(self.shape_err(
                    "concat_rows",
                    format!("operand {i} (node {}) has {c} columns, expected {cols}", parts[i].0),
                ));
            }
            rows += r;
        }
        let mut out = Vec::with_capacity(rows * cols);
        for p in parts {
            out.extend_from_slice(self.vals[p.0].data());
        }
        let ids = parts.iter().map(|p| p.0).collect();
        self.push(Op::ConcatRows(ids), Tensor::from_vec(&[rows, cols], out)?)
    }

    /// Joins rank-2 operands with equal row counts side by side.
    pub fn concat_cols(&mut self, parts: &[Var]) -> Result<Var> {
        let shapes = self.concat_shapes("concat_cols", parts)?;
        let rows = shapes[0].0;
        let mut cols = 0;
        for (i, &(r, c)) in shapes.iter().enumerate() {
            if r != rows {
                return Err(self.shape_err(
                    "concat_cols",
                    format!("operand {i} (node {}) has {r} rows, expected {rows}", parts[i].0),
                ));
            }
            cols += c;
        }
        let mut out = Vec::with_capacity(rows * cols);
        for r in 0..rows {
            for (&(_, c), p) in shapes.iter().zip(parts) {
                let d = self.vals[p.0].data();
                out.extend_from_slice(&d[r * c..(r + 1) * c]);
            }
        }
        let ids = parts.iter().map(|p| p.0).collect();
        self.push(Op::ConcatCols(ids), Tensor::from_vec(&[rows, cols], out)?)
    }

    /// Contiguous row slice `[start, start+len)` of a rank-2 node.
    pub fn narrow_rows(&mut self, src: Var, start: usize, len: usize) -> Result<Var> {
        self.chk(src, "narrow_rows")?;
        let (rows, cols) = self.req_rank2("narrow_rows", src)?;
        if start + len > rows || len == 0 {
            return Err(self.shape_err(
                "narrow_rows",
                format!("rows [{start}, {}) out of a [{rows},{cols}] node {}", start + len, src.0),
            ));
        }
        let out = self.vals[src.0].data()[start * cols..(start + len) * cols].to_vec();
        self.push(
            Op::NarrowRows { src: src.0, start, len },
            Tensor::from_vec(&[len, cols], out)?,
        )
    }

    /// Contiguous column slice `[start, start+len)` of a rank-2 node.
    pub fn narrow_cols(&mut self, src: Var, start: usize, len: usize) -> Result<Var> {
        self.chk(src, "narrow_cols")?;
        let (rows, cols) = self.req_rank2("narrow_cols", src)?;
        if start + len > cols || len == 0 {
            return Err(self.shape_err(
                "narrow_cols",
                format!("cols [{start}, {}) out of a [{rows},{cols}] node {}", start + len, src.0),
            ));
        }
        let data = self.vals[src.0].data();
        let mut out = Vec::with_capacity(rows * len);
        for r in 0..rows {
            out.extend_from_slice(&data[r * cols + start..r * cols + start + len]);
        }
        self.push(
            Op::NarrowCols { src: src.0, start, len },
            Tensor::from_vec(&[rows, len], out)?,
        )
    }

    /// Mean cross-entropy of row softmaxes against integer targets, fused for
    /// stability: each row is shifted by its max before exponentiation, so
    /// adding a constant to a row leaves the loss unchanged up to rounding.
    pub fn softmax_xent_mean(&mut self, logits: Var, targets: &[u32]) -> Result<Var> {
        self.chk(logits, "softmax_xent_mean")?;
        let (rows, cols) = self.req_rank2("softmax_xent_mean", logits)?;
        if targets.len() != rows {
            return Err(self.shape_err(
                "softmax_xent_mean",
                format!("{} targets for {rows} logit rows (node {})", targets.len(), logits.0),
            ));
        }
        if let Some(&bad) = targets.iter().find(|&&t| t as usize >= cols) {
            return Err(self.shape_err(
                "softmax_xent_mean",
                format!("target {bad} out of range for {cols} classes (node {})", logits.0),
            ));
        }
        let data = self.vals[logits.0].data();
        let mut probs = vec![0.0; rows * cols];
        let mut total = 0.0;
        for r in 0..rows {
            let row = &data[r * cols..(r + 1) * cols];
            let hi = row.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
            let prow = &mut probs[r * cols..(r + 1) * cols];
            let mut z = 0.0;
            for (p, &l) in prow.iter_mut().zip(row) {
                *p = math::exp(l - hi);
                z += *p;
            }
            for p in prow.iter_mut() {
                *p /= z;
            }
            total += math::ln(z) - (row[targets[r] as usize] - hi);
        }
        self.push(
            Op::SoftmaxXentMean {
                logits: logits.0,
                targets: targets.to_vec(),
                probs,
            },
            Tensor::scalar(total / rows as f64),
        )
    }

    /// Accumulates `d root / d node` for every node below `root` and returns
    /// the gradients of the registered parameters.  Each parameter receives
    /// the sum of the contributions from every use site; a parameter with no
    /// path to `root` gets an exactly-zero buffer.
    pub fn backward(&mut self, root: Var) -> Result<Gradients> {
        self.chk(root, "backward")?;
        if self.consumed {
            return Err(Error::TapeConsumed);
        }
        self.consumed = true;
        if self.vals[root.0].numel() != 1 {
            return Err(Error::NotScalar {
                node: root.0,
                len: self.vals[root.0].numel(),
            });
        }

        let mut adj: Vec<Option<Vec<f64>>> = vec![None; self.ops.len()];
        adj[root.0] = Some(vec![1.0]);
        let mut out: Vec<Option<Tensor>> = vec![None; self.ops.len()];

        for i in (0..=root.0).rev() {
            let Some(g) = adj[i].take() else { continue };
            if !math::all_finite(&g) {
                return Err(Error::NonFinite {
                    place: format!("gradient at node {i} (`{}`)", op_name(&self.ops[i])),
                });
            }
            match &self.ops[i] {
                Op::Param => {
                    out[i] = Some(Tensor::from_vec(self.vals[i].shape(), g)?);
                    continue;
                }
                Op::Constant => continue,
                Op::Add(a, b) => {
                    accum(&mut adj, &self.vals, *a, |d| add_assign(d, &g));
                    accum(&mut adj, &self.vals, *b, |d| add_assign(d, &g));
                }
                Op::Sub(a, b) => {
                    accum(&mut adj, &self.vals, *a, |d| add_assign(d, &g));
                    accum(&mut adj, &self.vals, *b, |d| {
                        for (x, &y) in d.iter_mut().zip(&g) {
                            *x -= y;
                        }
                    });
                }
                Op::Mul(a, b) => {
                    let (a, b) = (*a, *b);
                    let vb = self.vals[b].data();
                    accum(&mut adj, &self.vals, a, |d| {
                        for ((x, &y), &v) in d.iter_mut().zip(&g).zip(vb) {
                            *x += y * v;
                        }
                    });
                    let va = self.vals[a].data();
                    accum(&mut adj, &self.vals, b, |d| {
                        for ((x, &y), &v) in d.iter_mut().zip(&g).zip(va) {
                            *x += y * v;
                        }
                    });
                }
                Op::MatMul(a, b) => {
                    let (a, b) = (*a, *b);
                    let (m, k) = self.vals[a].rank2().expect("checked at creation");
                    let (_, n) = self.vals[b].rank2().expect("checked at creation");
                    let vb = self.vals[b].data();
                    accum(&mut adj, &self.vals, a, |d| matmul_nt_acc(m, n, k, &g, vb, d));
                    let va = self.vals[a].data();
                    accum(&mut adj, &self.vals, b, |d| matmul_tn_acc(m, k, n, va, &g, d));
                }
                Op::AddRow(mat, row) => {
                    let (mat, row) = (*mat, *row);
                    let cols = self.vals[row].numel();
                    accum(&mut adj, &self.vals, mat, |d| add_assign(d, &g));
                    accum(&mut adj, &self.vals, row, |d| {
                        for chunk in g.chunks_exact(cols) {
                            for (x, &y) in d.iter_mut().zip(chunk) {
                                *x += y;
                            }
                        }
                    });
                }
                Op::Sigmoid(x) => {
                    let s = self.vals[i].data();
                    accum(&mut adj, &self.vals, *x, |d| {
                        for ((x, &y), &sv) in d.iter_mut().zip(&g).zip(s) {
                            *x += y * sv * (1.0 - sv);
                        }
                    });
                }
                Op::Tanh(x) => {
                    let u = self.vals[i].data();
                    accum(&mut adj, &self.vals, *x, |d| {
                        for ((x, &y), &uv) in d.iter_mut().zip(&g).zip(u) {
                            *x += y * (1.0 - uv * uv);
                        }
                    });
                }
                Op::Scale(x, c) => {
                    let c = *c;
                    accum(&mut adj, &self.vals, *x, |d| {
                        for (x, &y) in d.iter_mut().zip(&g) {
                            *x += c * y;
                        }
                    });
                }
                Op::Sum(x) => {
                    let s = g[0];
                    accum(&mut adj, &self.vals, *x, |d| {
                        for x in d.iter_mut() {
                            *x += s;
                        }
                    });
                }
                Op::Mean(x) => {
                    let x = *x;
                    let s = g[0] / self.vals[x].numel() as f64;
                    accum(&mut adj, &self.vals, x, |d| {
                        for x in d.iter_mut() {
                            *x += s;
                        }
                    });
                }
                Op::EmbedRows { table, ids } => {
                    let e = self.vals[i].rank2().expect("checked at creation").1;
                    accum(&mut adj, &self.vals, *table, |d| {
                        for (i, &id) in ids.iter().enumerate() {
                            let dst = id as usize * e;
                            let src = i * e;
                            for j in 0..e {
                                d[dst + j] += g[src + j];
                            }
                        }
                    });
                }
                Op::ConcatRows(parts) => {
                    let mut off = 0;
                    for &p in parts {
                        let n = self.vals[p].numel();
                        let seg = &g[off..off + n];
                        accum(&mut adj, &self.vals, p, |d| add_assign(d, seg));
                        off += n;
                    }
                }
                Op::ConcatCols(parts) => {
                    let (rows, cols) = self.vals[i].rank2().expect("checked at creation");
                    let mut off = 0;
                    for &p in parts {
                        let pc = self.vals[p].rank2().expect("checked at creation").1;
                        accum(&mut adj, &self.vals, p, |d| {
                            for r in 0..rows {
                                let src = r * cols + off;
                                let dst = r * pc;
                                for j in 0..pc {
                                    d[dst + j] += g[src + j];
                                }
                            }
                        });
                        off += pc;
                    }
                }
                Op::NarrowRows { src, start, len } => {
                    let cols = self.vals[i].rank2().expect("checked at creation").1;
                    let (start, len) = (*start, *len);
                    accum(&mut adj, &self.vals, *src, |d| {
                        let dst = &mut d[start * cols..(start + len) * cols];
                        add_assign(dst, &g);
                    });
                }
                Op::NarrowCols { src, start, len } => {
                    let src = *src;
                    let rows = self.vals[i].rank2().expect("checked at creation").0;
                    let cols = self.vals[src].rank2().expect("checked at creation").1;
                    let (start, len) = (*start, *len);
                    accum(&mut adj, &self.vals, src, |d| {
                        for r in 0..rows {
                            let dst = r * cols + start;
                            let srow = r * len;
                            for j in 0..len {
                                d[dst + j] += g[srow + j];
                            }
                        }
                    });
                }
                Op::SoftmaxXentMean { logits, targets, probs } => {
                    let (rows, cols) = self.vals[*logits].rank2().expect("checked at creation");
                    let s = g[0] / rows as f64;
                    accum(&mut adj, &self.vals, *logits, |d| {
                        for r in 0..rows {
                            let y = targets[r] as usize;
                            let base = r * cols;
                            for j in 0..cols {
                                let ind = if j == y { 1.0 } else { 0.0 };
                                d[base + j] += s * (probs[base + j] - ind);
                            }
                        }
                    });
                }
            }
        }

        for (i, param) in self.is_param.iter().enumerate() {
            if *param && out[i].is_none() {
                out[i] = Some(Tensor::zeros(self.vals[i].shape())?);
            }
        }
        Ok(Gradients { by_node: out })
    }

    fn push(&mut self, op: Op, value: Tensor) -> Result<Var> {
        let id = self.ops.len();
        if !math::all_finite(value.data()) {
            return Err(Error::NonFinite {
                place: format!("value at node {id} (`{}`)", op_name(&op)),
            });
        }
        self.is_param.push(matches!(op, Op::Param));
        self.ops.push(op);
        self.vals.push(value);
        Ok(Var(id))
    }

    fn chk(&self, v: Var, op: &'static str) -> Result<()> {
        if v.0 < self.ops.len() {
            Ok(())
        } else {
            Err(Error::Shape {
                op,
                node: Some(v.0),
                detail: format!("handle {} does not belong to this tape (len {})", v.0, self.ops.len()),
            })
        }
    }

    fn shape_err(&self, op: &'static str, detail: alloc::string::String) -> Error {
        Error::Shape {
            op,
            node: Some(self.ops.len()),
            detail,
        }
    }

    fn req_rank2(&self, op: &'static str, v: Var) -> Result<(usize, usize)> {
        self.vals[v.0].rank2().ok_or_else(|| {
            self.shape_err(op, format!("node {} has rank {} (want 1 or 2)", v.0, self.vals[v.0].shape().len()))
        })
    }

    fn concat_shapes(&self, op: &'static str, parts: &[Var]) -> Result<Vec<(usize, usize)>> {
        if parts.is_empty() {
            return Err(self.shape_err(op, "no operands".into()));
        }
        let mut shapes = Vec::with_capacity(parts.len());
        for &p in parts {
            self.chk(p, op)?;
            shapes.push(self.req_rank2(op, p)?);
        }
        Ok(shapes)
    }

    fn elementwise(
        &mut self,
        name: &'static str,
        a: Var,
        b: Var,
        f: impl Fn(f64, f64) -> f64,
        op: Op,
    ) -> Result<Var> {
        self.chk(a, name)?;
        self.chk(b, name)?;
        let (va, vb) = (&self.vals[a.0], &self.vals[b.0]);
        if va.shape() != vb.shape() {
            return Err(self.shape_err(
                name,
                format!(
                    "operand shapes {:?} and {:?} differ (nodes {} and {})",
                    va.shape(),
                    vb.shape(),
                    a.0,
                    b.0
                ),
            ));
        }
        let data = va.data().iter().zip(vb.data()).map(|(&x, &y)| f(x, y)).collect();
        let t = Tensor::from_vec(va.shape(), data)?;
        self.push(op, t)
    }

    fn unary(&mut self, name: &'static str, x: Var, f: impl Fn(f64) -> f64, op: Op) -> Result<Var> {
        self.chk(x, name)?;
        let v = &self.vals[x.0];
        let data = v.data().iter().map(|&x| f(x)).collect();
        let t = Tensor::from_vec(v.shape(), data)?;
        self.push(op, t)
    }
}

/// Per-parameter gradients produced by [`Tape::backward`].
#[derive(Debug)]
pub struct Gradients {
    by_node: Vec<Option<Tensor>>,
}

impl Gradients {
    /// Gradient of the backward root with respect to a parameter node.
    /// `None` for constants, interior nodes, and foreign handles.
    pub fn wrt(&self, v: Var) -> Option<&Tensor> {
        self.by_node.get(v.0).and_then(|t| t.as_ref())
    }

    /// Moves a parameter gradient out of the set.
    pub fn take(&mut self, v: Var) -> Option<Tensor> {
        self.by_node.get_mut(v.0).and_then(|t| t.take())
    }
}

fn add_assign(dst: &mut [f64], src: &[f64]) {
    for (d, &s) in dst.iter_mut().zip(src) {
        *d += s;
    }
}

fn accum(
    adj: &mut [Option<Vec<f64>>],
    vals: &[Tensor],
    id: usize,
    write: impl FnOnce(&mut [f64]),
) {
    let slot = &mut adj[id];
    if slot.is_none() {
        *slot = Some(vec![0.0; vals[id].numel()]);
    }
    write(slot.as_mut().expect("just filled"));
}

/// `out = a @ b` for row-major `a: [m,k]`, `b: [k,n]`.
fn matmul_into(m: usize, k: usize, n: usize, a: &[f64], b: &[f64], out: &mut [f64]) {
    for i in 0..m {
        let arow = &a[i * k..(i + 1) * k];
        let orow = &mut out[i * n..(i + 1) * n];
        for (p, &av) in arow.iter().enumerate() {
            let brow = &b[p * n..(p + 1) * n];
            for (o, &bv) in orow.iter_mut().zip(brow) {
                *o += av * bv;
            }
        }
    }
}

/// `da += g @ b^T` for `g: [m,n]`, `b: [k,n]`, `da: [m,k]`.
fn matmul_nt_acc(m: usize, n: usize, k: usize, g: &[f64], b: &[f64], da: &mut [f64]) {
    for i in 0..m {
        let grow = &g[i * n..(i + 1) * n];
        let drow = &mut da[i * k..(i + 1) * k];
        for (p, d) in drow.iter_mut().enumerate() {
            let brow = &b[p * n..(p + 1) * n];
            *d += math::dot(grow, brow);
        }
    }
}

/// `db += a^T @ g` for `a: [m,k]`, `g: [m,n]`, `db: [k,n]`.
fn matmul_tn_acc(m: usize, k: usize, n: usize, a: &[f64], g: &[f64], db: &mut [f64]) {
    for i in 0..m {
        let arow = &a[i * k..(i + 1) * k];
        let grow = &g[i * n..(i + 1) * n];
        for (p, &av) in arow.iter().enumerate() {
            let drow = &mut db[p * n..(p + 1) * n];
            for (d, &gv) in drow.iter_mut().zip(grow) {
                *d += av * gv;
            }
        }
    }
}
