use super::kernels::{self, axpy, matmul_acc, matmul_grad_a, matmul_grad_b, softmax_lane};
use super::{ParamId, ParamStore, Real, Tensor};
use crate::error::{Error, Result};

/// Handle to a node recorded on a [`Tape`].
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct Var(usize);

#[derive(Debug)]
enum Op<F> {
    Leaf,
    Param(ParamId),
    MatMul(Var, Var),
    Add(Var, Var),
    AddRow(Var, Var),
    Mul(Var, Var),
    Scale(Var, F),
    Concat(Vec<Var>, usize),
    Tanh(Var),
    Sigmoid(Var),
    Softmax(Var, usize),
    Slice {
        x: Var,
        axis: usize,
        start: usize,
    },
    Sum(Var),
    Mean(Var),
    Transpose(Var),
    Gather {
        table: Var,
        rows: Vec<usize>,
    },
    NegLogPick {
        x: Var,
        index: usize,
        weight: F,
    },
}

struct Node<F> {
    op: Op<F>,
    /// `None` for parameter nodes, whose value lives in the store.
    value: Option<Tensor<F>>,
    requires_grad: bool,
}

/// Records operations as they execute so gradients can be replayed in reverse.
///
/// Nodes are appended in execution order, so every node's inputs precede it.
pub struct Tape<'p, F: Real> {
    params: &'p ParamStore<F>,
    nodes: Vec<Node<F>>,
    param_vars: Vec<Option<Var>>,
}

/// Gradients produced by [`Tape::backward`].
#[derive(Debug)]
pub struct Gradients<F> {
    params: Vec<Option<Tensor<F>>>,
    leaves: Vec<(Var, Tensor<F>)>,
}

impl<F: Real> Gradients<F> {
    pub fn param(&self, id: ParamId) -> Option<&Tensor<F>> {
        self.params.get(id.0).and_then(|g| g.as_ref())
    }

    pub fn wrt(&self, var: Var) -> Option<&Tensor<F>> {
        self.leaves.iter().find(|(v, _)| *v == var).map(|(_, g)| g)
    }

    pub fn into_params(self) -> Vec<Option<Tensor<F>>> {
        self.params
    }
}

fn mismatch(op: &'static str, a: &Tensor<impl Real>, b: &Tensor<impl Real>) -> Error {
    Error::ShapeMismatch {
        op,
        left: a.shape().to_vec(),
        right: b.shape().to_vec(),
    }
}

impl<'p, F: Real> Tape<'p, F> {
    pub fn new(params: &'p ParamStore<F>) -> Self {
        Tape {
            params,
            nodes: Vec::new(),
            param_vars: vec![None; params.len()],
        }
    }

    pub fn params(&self) -> &'p ParamStore<F> {
        self.params
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn value(&self, v: Var) -> &Tensor<F> {
        let node = &self.nodes[v.0];
        match (&node.op, &node.value) {
            (Op::Param(id), _) => &self.params.get(*id).value,
            (_, Some(t)) => t,
            _ => unreachable!("non-parameter node without value"),
        }
    }

    fn push(&mut self, op: Op<F>, value: Tensor<F>, inputs: &[Var]) -> Var {
        let requires_grad = inputs.iter().any(|v| self.nodes[v.0].requires_grad);
        self.nodes.push(Node {
            op,
            value: Some(value),
            requires_grad,
        });
        Var(self.nodes.len() - 1)
    }

    /// Input that does not receive gradients.
    pub fn constant(&mut self, t: Tensor<F>) -> Var {
        self.nodes.push(Node {
            op: Op::Leaf,
            value: Some(t),
            requires_grad: false,
        });
        Var(self.nodes.len() - 1)
    }

    /// Input whose gradient is reported through [`Gradients::wrt`].
    pub fn leaf(&mut self, t: Tensor<F>) -> Var {
        self.nodes.push(Node {
            op: Op::Leaf,
            value: Some(t),
            requires_grad: true,
        });
        Var(self.nodes.len() - 1)
    }

    /// Node bound to a stored parameter; repeated calls return the same node.
    pub fn param(&mut self, id: ParamId) -> Var {
        if let Some(v) = self.param_vars[id.0] {
            return v;
        }
        self.nodes.push(Node {
            op: Op::Param(id),
            value: None,
            requires_grad: !self.params.get(id).frozen,
        });
        let v = Var(self.nodes.len() - 1);
        self.param_vars[id.0] = Some(v);
        v
    }

    pub fn matmul(&mut self, a: Var, b: Var) -> Result<Var> {
        let (ta, tb) = (self.value(a), self.value(b));
        let ((m, k), (k2, n)) = (ta.dims(), tb.dims());
        if k != k2 {
            return Err(mismatch("matmul", ta, tb));
        }
        let mut out = vec![F::zero(); m * n];
        matmul_acc(ta.data(), tb.data(), &mut out, m, k, n);
        let t = Tensor::new(vec![m, n], out)?;
        Ok(self.push(Op::MatMul(a, b), t, &[a, b]))
    }

    fn zip_same(&mut self, a: Var, b: Var, name: &'static str, f: impl Fn(F, F) -> F) -> Result<Tensor<F>> {
        let (ta, tb) = (self.value(a), self.value(b));
        if ta.shape() != tb.shape() {
            return Err(mismatch(name, ta, tb));
        }
        let data = ta.data().iter().zip(tb.data()).map(|(&x, &y)| f(x, y)).collect();
        Tensor::new(ta.shape().to_vec(), data)
    }

    pub fn add(&mut self, a: Var, b: Var) -> Result<Var> {
        let t = self.zip_same(a, b, "add", |x, y| x + y)?;
        Ok(self.push(Op::Add(a, b), t, &[a, b]))
    }

    pub fn mul(&mut self, a: Var, b: Var) -> Result<Var> {
        let t = self.zip_same(a, b, "mul", |x, y| x * y)?;
        Ok(self.push(Op::Mul(a, b), t, &[a, b]))
    }

    /// `a[r×c] + row[1×c]`, the row broadcast over every row of `a`.
    pub fn add_row(&mut self, a: Var, row: Var) -> Result<Var> {
        let (ta, tr) = (self.value(a), self.value(row));
        let (r, c) = ta.dims();
        if tr.dims() != (1, c) {
            return Err(mismatch("add_row", ta, tr));
        }
        let mut data = ta.data().to_vec();
        for i in 0..r {
            for (x, &b) in data[i * c..(i + 1) * c].iter_mut().zip(tr.data()) {
                *x += b;
            }
        }
        let t = Tensor::new(ta.shape().to_vec(), data)?;
        Ok(self.push(Op::AddRow(a, row), t, &[a, row]))
    }

    pub fn scale(&mut self, a: Var, k: F) -> Var {
        let ta = self.value(a);
        let data = ta.data().iter().map(|&x| x * k).collect();
        let t = Tensor::new(ta.shape().to_vec(), data).expect("same shape");
        self.push(Op::Scale(a, k), t, &[a])
    }

    fn map(&mut self, a: Var, op: Op<F>, f: impl Fn(F) -> F) -> Var {
        let ta = self.value(a);
        let data = ta.data().iter().map(|&x| f(x)).collect();
        let t = Tensor::new(ta.shape().to_vec(), data).expect("same shape");
        self.push(op, t, &[a])
    }

    pub fn tanh(&mut self, a: Var) -> Var {
        self.map(a, Op::Tanh(a), |x| x.tanh())
    }

    pub fn sigmoid(&mut self, a: Var) -> Var {
        self.map(a, Op::Sigmoid(a), kernels::sigmoid)
    }

    /// Softmax along `axis` (0: down columns, 1: across rows), max-shifted.
    pub fn softmax(&mut self, a: Var, axis: usize) -> Result<Var> {
        let ta = self.value(a);
        let (r, c) = ta.dims();
        let mut data = ta.data().to_vec();
        match axis {
            0 => (0..c).for_each(|j| softmax_lane(&mut data, j, r, c)),
            1 => (0..r).for_each(|i| softmax_lane(&mut data, i * c, c, 1)),
            _ => return Err(Error::Config(format!("softmax axis {axis} out of range"))),
        }
        let t = Tensor::new(ta.shape().to_vec(), data)?;
        Ok(self.push(Op::Softmax(a, axis), t, &[a]))
    }

    /// Concatenate along `axis` (0: stack rows, 1: join columns). Output is 2-D.
    pub fn concat(&mut self, xs: &[Var], axis: usize) -> Result<Var> {
        let first = *xs.first().ok_or(Error::EmptySequence)?;
        let (r0, c0) = self.value(first).dims();
        let t = match axis {
            0 => {
                let mut data = Vec::new();
                let mut rows = 0;
                for &x in xs {
                    let tx = self.value(x);
                    if tx.dims().1 != c0 {
                        return Err(mismatch("concat", self.value(first), tx));
                    }
                    rows += tx.dims().0;
                    data.extend_from_slice(tx.data());
                }
                Tensor::new(vec![rows, c0], data)?
            }
            1 => {
                let mut cols = 0;
                for &x in xs {
                    let tx = self.value(x);
                    if tx.dims().0 != r0 {
                        return Err(mismatch("concat", self.value(first), tx));
                    }
                    cols += tx.dims().1;
                }
                let mut data = Vec::with_capacity(r0 * cols);
                for i in 0..r0 {
                    for &x in xs {
                        data.extend_from_slice(self.value(x).row(i));
                    }
                }
                Tensor::new(vec![r0, cols], data)?
            }
            _ => return Err(Error::Config(format!("concat axis {axis} out of range"))),
        };
        Ok(self.push(Op::Concat(xs.to_vec(), axis), t, xs))
    }

    /// Rows (`axis = 0`) or columns (`axis = 1`) in `start..end`. Output is 2-D.
    pub fn slice(&mut self, x: Var, axis: usize, start: usize, end: usize) -> Result<Var> {
        let tx = self.value(x);
        let (r, c) = tx.dims();
        let limit = if axis == 0 { r } else { c };
        if start >= end || end > limit || axis > 1 {
            return Err(Error::ShapeMismatch {
                op: "slice",
                left: tx.shape().to_vec(),
                right: vec![axis, start, end],
            });
        }
        let t = if axis == 0 {
            Tensor::new(vec![end - start, c], tx.data()[start * c..end * c].to_vec())?
        } else {
            let w = end - start;
            let mut data = Vec::with_capacity(r * w);
            for i in 0..r {
                data.extend_from_slice(&tx.row(i)[start..end]);
            }
            Tensor::new(vec![r, w], data)?
        };
        Ok(self.push(Op::Slice { x, axis, start }, t, &[x]))
    }

    pub fn sum(&mut self, x: Var) -> Var {
        let s = self.value(x).data().iter().copied().sum();
        self.push(Op::Sum(x), Tensor::scalar(s), &[x])
    }

    pub fn mean(&mut self, x: Var) -> Var {
        let tx = self.value(x);
        let n = F::from_usize(tx.len()).expect("length fits");
        let s: F = tx.data().iter().copied().sum();
        self.push(Op::Mean(x), Tensor::scalar(s / n), &[x])
    }

    pub fn transpose(&mut self, x: Var) -> Var {
        let tx = self.value(x);
        let (r, c) = tx.dims();
        let mut data = vec![F::zero(); r * c];
        for i in 0..r {
            for j in 0..c {
                data[j * r + i] = tx.data()[i * c + j];
            }
        }
        let t = Tensor::new(vec![c, r], data).expect("transposed shape");
        self.push(Op::Transpose(x), t, &[x])
    }

    /// Row lookup: output row `i` is `table[rows[i]]`.
    pub fn gather(&mut self, table: Var, rows: &[usize]) -> Result<Var> {
        let tt = self.value(table);
        let (v, d) = tt.dims();
        let mut data = Vec::with_capacity(rows.len() * d);
        for &r in rows {
            if r >= v {
                return Err(Error::ShapeMismatch {
                    op: "gather",
                    left: tt.shape().to_vec(),
                    right: vec![r],
                });
            }
            data.extend_from_slice(tt.row(r));
        }
        let t = Tensor::new(vec![rows.len(), d], data)?;
        Ok(self.push(
            Op::Gather {
                table,
                rows: rows.to_vec(),
            },
            t,
            &[table],
        ))
    }

    /// `-weight · ln(max(x[index], 1e-12))` as a scalar, for probability inputs.
    pub fn neg_log_pick(&mut self, x: Var, index: usize, weight: F) -> Result<Var> {
        let tx = self.value(x);
        if index >= tx.len() {
            return Err(Error::LabelOutOfRange {
                label: index,
                num_classes: tx.len(),
            });
        }
        let p = tx.data()[index].max(F::from_f64_lossy(1e-12));
        let t = Tensor::scalar(-weight * p.ln());
        Ok(self.push(Op::NegLogPick { x, index, weight }, t, &[x]))
    }

    /// Reverse pass from a scalar `loss`. Consumes the tape.
    ///
    /// Gradients of nodes used more than once accumulate.
    pub fn backward(self, loss: Var) -> Result<Gradients<F>> {
        let lt = self.value(loss);
        if lt.len() != 1 {
            return Err(Error::NonScalarLoss(lt.shape().to_vec()));
        }
        let n = self.nodes.len();
        let mut grads: Vec<Option<Vec<F>>> = (0..n).map(|_| None).collect();
        grads[loss.0] = Some(vec![F::one()]);

        fn acc<F: Real>(grads: &mut [Option<Vec<F>>], v: Var, len: usize) -> &mut Vec<F> {
            grads[v.0].get_or_insert_with(|| vec![F::zero(); len])
        }

        for idx in (0..n).rev() {
            if !self.nodes[idx].requires_grad {
                continue;
            }
            let g = match grads[idx].take() {
                Some(g) => g,
                None => continue,
            };
            let node = &self.nodes[idx];
            let needs = |v: &Var| self.nodes[v.0].requires_grad;
            match &node.op {
                Op::Leaf | Op::Param(_) => {
                    grads[idx] = Some(g);
                }
                Op::MatMul(a, b) => {
                    let (ta, tb) = (self.value(*a), self.value(*b));
                    let ((m, k), (_, nn)) = (ta.dims(), tb.dims());
                    if needs(a) {
                        let da = acc(&mut grads, *a, m * k);
                        matmul_grad_a(&g, tb.data(), da, m, k, nn);
                    }
                    if needs(b) {
                        let db = acc(&mut grads, *b, k * nn);
                        matmul_grad_b(ta.data(), &g, db, m, k, nn);
                    }
                }
                Op::Add(a, b) => {
                    for v in [a, b] {
                        if needs(v) {
                            axpy(F::one(), &g, acc(&mut grads, *v, g.len()));
                        }
                    }
                }
                Op::AddRow(a, row) => {
                    if needs(a) {
                        axpy(F::one(), &g, acc(&mut grads, *a, g.len()));
                    }
                    if needs(row) {
                        let c = self.value(*row).len();
                        let dr = acc(&mut grads, *row, c);
                        for chunk in g.chunks(c) {
                            axpy(F::one(), chunk, dr);
                        }
                    }
                }
                Op::Mul(a, b) => {
                    let (ta, tb) = (self.value(*a), self.value(*b));
                    if needs(a) {
                        let da = acc(&mut grads, *a, g.len());
                        for ((d, &gi), &bi) in da.iter_mut().zip(&g).zip(tb.data()) {
                            *d += gi * bi;
                        }
                    }
                    if needs(b) {
                        let db = acc(&mut grads, *b, g.len());
                        for ((d, &gi), &ai) in db.iter_mut().zip(&g).zip(ta.data()) {
                            *d += gi * ai;
                        }
                    }
                }
                Op::Scale(a, k) => {
                    axpy(*k, &g, acc(&mut grads, *a, g.len()));
                }
                Op::Tanh(a) => {
                    let y = node.value.as_ref().expect("value").data();
                    let da = acc(&mut grads, *a, g.len());
                    for ((d, &gi), &yi) in da.iter_mut().zip(&g).zip(y) {
                        *d += gi * (F::one() - yi * yi);
                    }
                }
                Op::Sigmoid(a) => {
                    let y = node.value.as_ref().expect("value").data();
                    let da = acc(&mut grads, *a, g.len());
                    for ((d, &gi), &yi) in da.iter_mut().zip(&g).zip(y) {
                        *d += gi * yi * (F::one() - yi);
                    }
                }
                Op::Softmax(a, axis) => {
                    let yt = node.value.as_ref().expect("value");
                    let (r, c) = yt.dims();
                    let y = yt.data();
                    let da = acc(&mut grads, *a, g.len());
                    let (lanes, len, lane_stride, step) = if *axis == 0 { (c, r, 1, c) } else { (r, c, c, 1) };
                    for lane in 0..lanes {
                        let start = lane * lane_stride;
                        let mut s = F::zero();
                        for j in 0..len {
                            let i = start + j * step;
                            s += g[i] * y[i];
                        }
                        for j in 0..len {
                            let i = start + j * step;
                            da[i] += y[i] * (g[i] - s);
                        }
                    }
                }
                Op::Concat(xs, axis) => {
                    let out_cols = node.value.as_ref().expect("value").dims().1;
                    let mut offset = 0;
                    for x in xs {
                        let (xr, xc) = self.value(*x).dims();
                        if needs(x) {
                            let dx = acc(&mut grads, *x, xr * xc);
                            if *axis == 0 {
                                axpy(F::one(), &g[offset * out_cols..(offset + xr) * out_cols], dx);
                            } else {
                                for i in 0..xr {
                                    let src = &g[i * out_cols + offset..i * out_cols + offset + xc];
                                    axpy(F::one(), src, &mut dx[i * xc..(i + 1) * xc]);
                                }
                            }
                        }
                        offset += if *axis == 0 { xr } else { xc };
                    }
                }
                Op::Slice { x, axis, start } => {
                    let (xr, xc) = self.value(*x).dims();
                    let (or, oc) = node.value.as_ref().expect("value").dims();
                    let dx = acc(&mut grads, *x, xr * xc);
                    if *axis == 0 {
                        axpy(F::one(), &g, &mut dx[start * xc..(start + or) * xc]);
                    } else {
                        for i in 0..or {
                            let dst = &mut dx[i * xc + start..i * xc + start + oc];
                            axpy(F::one(), &g[i * oc..(i + 1) * oc], dst);
                        }
                    }
                }
                Op::Sum(x) => {
                    let len = self.value(*x).len();
                    for d in acc(&mut grads, *x, len).iter_mut() {
                        *d += g[0];
                    }
                }
                Op::Mean(x) => {
                    let len = self.value(*x).len();
                    let share = g[0] / F::from_usize(len).expect("length fits");
                    for d in acc(&mut grads, *x, len).iter_mut() {
                        *d += share;
                    }
                }
                Op::Transpose(x) => {
                    let (r, c) = self.value(*x).dims();
                    let dx = acc(&mut grads, *x, r * c);
                    for i in 0..r {
                        for j in 0..c {
                            dx[i * c + j] += g[j * r + i];
                        }
                    }
                }
                Op::Gather { table, rows } => {
                    let (v, d) = self.value(*table).dims();
                    let dt = acc(&mut grads, *table, v * d);
                    for (i, &r) in rows.iter().enumerate() {
                        axpy(F::one(), &g[i * d..(i + 1) * d], &mut dt[r * d..(r + 1) * d]);
                    }
                }
                Op::NegLogPick { x, index, weight } => {
                    let tx = self.value(*x);
                    let p = tx.data()[*index];
                    let dx = acc(&mut grads, *x, tx.len());
                    if p > F::from_f64_lossy(1e-12) {
                        dx[*index] += -g[0] * *weight / p;
                    }
                }
            }
        }

        let mut param_grads: Vec<Option<Tensor<F>>> = vec![None; self.params.len()];
        let mut leaves = Vec::new();
        for (idx, node) in self.nodes.iter().enumerate() {
            let g = match grads[idx].take() {
                Some(g) => g,
                None => continue,
            };
            match node.op {
                Op::Param(id) => {
                    let shape = self.params.get(id).value.shape().to_vec();
                    param_grads[id.0] = Some(Tensor::new(shape, g)?);
                }
                Op::Leaf => {
                    let shape = node.value.as_ref().expect("value").shape().to_vec();
                    leaves.push((Var(idx), Tensor::new(shape, g)?));
                }
                _ => {}
            }
        }
        Ok(Gradients {
            params: param_grads,
            leaves,
        })
    }
}
