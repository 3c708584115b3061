use crate::{DiffError, ParamId, ParamStore, Result, Tensor};

/// Handle to a node on a [`Graph`].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Var(usize);

#[derive(Debug, Clone)]
enum Op {
    Leaf,
    Param(ParamId),
    MatMul(Var, Var),
    Add(Var, Var),
    AddRow(Var, Var),
    Sub(Var, Var),
    Mul(Var, Var),
    Scale(Var, f64),
    Tanh(Var),
    Sigmoid(Var),
    Relu(Var),
    ConcatCols(Vec<Var>),
    ConcatRows(Vec<Var>),
    SliceCols(Var, usize),
    SliceRows(Var, usize),
    GatherRows(Var, Vec<usize>),
    ScaleRows(Var, Vec<f64>),
    ScatterAddRows(Var, Vec<usize>),
    Sum(Var),
    Mean(Var),
    SquaredEuclidean(Var, Var),
}

#[derive(Debug)]
struct Node {
    value: Tensor,
    grad: Option<Tensor>,
    op: Op,
}

/// Computation tape. Nodes are appended in evaluation order, so a reverse
/// sweep visits every node after all of its consumers.
#[derive(Debug, Default)]
pub struct Graph {
    nodes: Vec<Node>,
}

fn shape_str(t: &Tensor) -> String {
    format!("{}x{}", t.rows(), t.cols())
}

fn mismatch(op: &'static str, expected: String, got: String) -> DiffError {
    DiffError::ShapeMismatch { op, expected, got }
}

impl Graph {
    pub fn new() -> Self {
        Graph::default()
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    fn push(&mut self, value: Tensor, op: Op) -> Var {
        self.nodes.push(Node { value, grad: None, op });
        Var(self.nodes.len() - 1)
    }

    pub fn value(&self, v: Var) -> &Tensor {
        &self.nodes[v.0].value
    }

    /// Gradient of the last `backward` loss with respect to `v`, if `v` was
    /// reachable from it.
    pub fn grad(&self, v: Var) -> Option<&Tensor> {
        self.nodes[v.0].grad.as_ref()
    }

    /// A constant input; gradients reaching it are computed but go nowhere.
    pub fn constant(&mut self, t: Tensor) -> Var {
        self.push(t, Op::Leaf)
    }

    pub fn param(&mut self, store: &ParamStore, id: ParamId) -> Var {
        self.push(store.get(id).value.clone(), Op::Param(id))
    }

    pub fn matmul(&mut self, a: Var, b: Var) -> Result<Var> {
        let (ta, tb) = (self.value(a), self.value(b));
        if ta.cols() != tb.rows() {
            return Err(mismatch("matmul", format!("{}x{} @ {}x_", ta.rows(), ta.cols(), ta.cols()), shape_str(tb)));
        }
        let out = ta.matmul(tb);
        Ok(self.push(out, Op::MatMul(a, b)))
    }

    /// Elementwise sum. `b` may also be a single row broadcast over `a`'s rows.
    pub fn add(&mut self, a: Var, b: Var) -> Result<Var> {
        let (ta, tb) = (self.value(a), self.value(b));
        if ta.shape() == tb.shape() {
            let data = ta.data().iter().zip(tb.data()).map(|(x, y)| x + y).collect();
            let out = Tensor::new(ta.rows(), ta.cols(), data);
            return Ok(self.push(out, Op::Add(a, b)));
        }
        if tb.rows() == 1 && tb.cols() == ta.cols() {
            let cols = ta.cols();
            let data = ta.data().iter().enumerate().map(|(i, x)| x + tb.data()[i % cols]).collect();
            let out = Tensor::new(ta.rows(), cols, data);
            return Ok(self.push(out, Op::AddRow(a, b)));
        }
        Err(mismatch("add", shape_str(ta), shape_str(tb)))
    }

    pub fn sub(&mut self, a: Var, b: Var) -> Result<Var> {
        let (ta, tb) = (self.value(a), self.value(b));
        if ta.shape() != tb.shape() {
            return Err(mismatch("sub", shape_str(ta), shape_str(tb)));
        }
        let data = ta.data().iter().zip(tb.data()).map(|(x, y)| x - y).collect();
        let out = Tensor::new(ta.rows(), ta.cols(), data);
        Ok(self.push(out, Op::Sub(a, b)))
    }

    pub fn mul(&mut self, a: Var, b: Var) -> Result<Var> {
        let (ta, tb) = (self.value(a), self.value(b));
        if ta.shape() != tb.shape() {
            return Err(mismatch("mul", shape_str(ta), shape_str(tb)));
        }
        let data = ta.data().iter().zip(tb.data()).map(|(x, y)| x * y).collect();
        let out = Tensor::new(ta.rows(), ta.cols(), data);
        Ok(self.push(out, Op::Mul(a, b)))
    }

    pub fn scale(&mut self, a: Var, k: f64) -> Var {
        let out = self.value(a).map(|x| x * k);
        self.push(out, Op::Scale(a, k))
    }

    pub fn tanh(&mut self, a: Var) -> Var {
        let out = self.value(a).map(f64::tanh);
        self.push(out, Op::Tanh(a))
    }

    pub fn sigmoid(&mut self, a: Var) -> Var {
        let out = self.value(a).map(|x| 1.0 / (1.0 + (-x).exp()));
        self.push(out, Op::Sigmoid(a))
    }

    pub fn relu(&mut self, a: Var) -> Var {
        let out = self.value(a).map(|x| x.max(0.0));
        self.push(out, Op::Relu(a))
    }

    pub fn concat_cols(&mut self, parts: &[Var]) -> Result<Var> {
        let rows = parts.first().map_or(0, |&p| self.value(p).rows());
        for &p in parts {
            let t = self.value(p);
            if t.rows() != rows {
                return Err(mismatch("concat_cols", format!("{rows}x_"), shape_str(t)));
            }
        }
        let cols: usize = parts.iter().map(|&p| self.value(p).cols()).sum();
        let mut data = Vec::with_capacity(rows * cols);
        for r in 0..rows {
            for &p in parts {
                data.extend_from_slice(self.value(p).row_slice(r));
            }
        }
        Ok(self.push(Tensor::new(rows, cols, data), Op::ConcatCols(parts.to_vec())))
    }

    pub fn concat_rows(&mut self, parts: &[Var]) -> Result<Var> {
        let cols = parts.first().map_or(0, |&p| self.value(p).cols());
        let mut data = Vec::new();
        let mut rows = 0;
        for &p in parts {
            let t = self.value(p);
            if t.cols() != cols {
                return Err(mismatch("concat_rows", format!("_x{cols}"), shape_str(t)));
            }
            data.extend_from_slice(t.data());
            rows += t.rows();
        }
        Ok(self.push(Tensor::new(rows, cols, data), Op::ConcatRows(parts.to_vec())))
    }

    /// Columns `start..end`.
    pub fn slice_cols(&mut self, a: Var, start: usize, end: usize) -> Result<Var> {
        let t = self.value(a);
        if start > end || end > t.cols() {
            return Err(mismatch("slice_cols", format!("columns {start}..{end}"), shape_str(t)));
        }
        let width = end - start;
        let mut data = Vec::with_capacity(t.rows() * width);
        for r in 0..t.rows() {
            data.extend_from_slice(&t.row_slice(r)[start..end]);
        }
        let out = Tensor::new(t.rows(), width, data);
        Ok(self.push(out, Op::SliceCols(a, start)))
    }

    /// Rows `start..end`.
    pub fn slice_rows(&mut self, a: Var, start: usize, end: usize) -> Result<Var> {
        let t = self.value(a);
        if start > end || end > t.rows() {
            return Err(mismatch("slice_rows", format!("rows {start}..{end}"), shape_str(t)));
        }
        let c = t.cols();
        let out = Tensor::new(end - start, c, t.data()[start * c..end * c].to_vec());
        Ok(self.push(out, Op::SliceRows(a, start)))
    }

    /// Row selection with repetition allowed; gradients scatter-add back.
    pub fn gather_rows(&mut self, a: Var, indices: &[usize]) -> Result<Var> {
        let t = self.value(a);
        if let Some(&bad) = indices.iter().find(|&&i| i >= t.rows()) {
            return Err(mismatch("gather_rows", format!("row index < {}", t.rows()), format!("{bad}")));
        }
        let mut data = Vec::with_capacity(indices.len() * t.cols());
        for &i in indices {
            data.extend_from_slice(t.row_slice(i));
        }
        let out = Tensor::new(indices.len(), t.cols(), data);
        Ok(self.push(out, Op::GatherRows(a, indices.to_vec())))
    }

    /// Multiplies row `r` by the constant `weights[r]`.
    pub fn scale_rows(&mut self, a: Var, weights: &[f64]) -> Result<Var> {
        let t = self.value(a);
        if weights.len() != t.rows() {
            return Err(mismatch("scale_rows", format!("{} weights", t.rows()), format!("{}", weights.len())));
        }
        let cols = t.cols();
        let mut out = t.clone();
        for (r, w) in weights.iter().enumerate() {
            out.data_mut()[r * cols..(r + 1) * cols].iter_mut().for_each(|x| *x *= w);
        }
        Ok(self.push(out, Op::ScaleRows(a, weights.to_vec())))
    }

    /// Sums row `k` of `a` into output row `indices[k]`; the output has `out_rows` rows.
    pub fn scatter_add_rows(&mut self, a: Var, indices: &[usize], out_rows: usize) -> Result<Var> {
        let t = self.value(a);
        if indices.len() != t.rows() {
            return Err(mismatch("scatter_add_rows", format!("{} indices", t.rows()), format!("{}", indices.len())));
        }
        if let Some(&bad) = indices.iter().find(|&&i| i >= out_rows) {
            return Err(mismatch("scatter_add_rows", format!("row index < {out_rows}"), format!("{bad}")));
        }
        let cols = t.cols();
        let mut out = Tensor::zeros(out_rows, cols);
        for (k, &dst) in indices.iter().enumerate() {
            let row = &mut out.data_mut()[dst * cols..(dst + 1) * cols];
            row.iter_mut().zip(t.row_slice(k)).for_each(|(x, y)| *x += y);
        }
        Ok(self.push(out, Op::ScatterAddRows(a, indices.to_vec())))
    }

    pub fn sum(&mut self, a: Var) -> Var {
        let s = self.value(a).data().iter().sum();
        self.push(Tensor::scalar(s), Op::Sum(a))
    }

    pub fn mean(&mut self, a: Var) -> Var {
        let t = self.value(a);
        let m = t.data().iter().sum::<f64>() / t.len().max(1) as f64;
        self.push(Tensor::scalar(m), Op::Mean(a))
    }

    /// Row-wise squared Euclidean distance, an `n x 1` column.
    pub fn squared_euclidean(&mut self, a: Var, b: Var) -> Result<Var> {
        let (ta, tb) = (self.value(a), self.value(b));
        if ta.shape() != tb.shape() {
            return Err(mismatch("squared_euclidean", shape_str(ta), shape_str(tb)));
        }
        let data = (0..ta.rows()).map(|r| ta.row_slice(r).iter().zip(tb.row_slice(r)).map(|(x, y)| (x - y) * (x - y)).sum()).collect();
        let out = Tensor::new(ta.rows(), 1, data);
        Ok(self.push(out, Op::SquaredEuclidean(a, b)))
    }

    fn accumulate(&mut self, v: Var, delta: Tensor) {
        let node = &mut self.nodes[v.0];
        match &mut node.grad {
            Some(g) => g.data_mut().iter_mut().zip(delta.data()).for_each(|(a, b)| *a += b),
            None => node.grad = Some(delta),
        }
    }

    /// Reverse sweep from a scalar `loss`. Gradients of parameter nodes are
    /// added into `store`.
    pub fn backward(&mut self, loss: Var, store: &mut ParamStore) -> Result<()> {
        let [r, c] = self.value(loss).shape();
        if (r, c) != (1, 1) {
            return Err(DiffError::NonScalarLoss(r, c));
        }
        for n in &mut self.nodes {
            n.grad = None;
        }
        self.nodes[loss.0].grad = Some(Tensor::scalar(1.0));
        for i in (0..=loss.0).rev() {
            let Some(g) = self.nodes[i].grad.take() else { continue };
            let op = std::mem::replace(&mut self.nodes[i].op, Op::Leaf);
            self.propagate(i, &op, &g, store);
            self.nodes[i].op = op;
            self.nodes[i].grad = Some(g);
        }
        Ok(())
    }

    fn propagate(&mut self, i: usize, op: &Op, g: &Tensor, store: &mut ParamStore) {
        match *op {
            Op::Leaf => {}
            Op::Param(id) => {
                let pg = store.get_mut(id).grad.data_mut();
                pg.iter_mut().zip(g.data()).for_each(|(a, b)| *a += b);
            }
            Op::MatMul(a, b) => {
                let da = g.matmul_t(self.value(b));
                let db = self.value(a).t_matmul(g);
                self.accumulate(a, da);
                self.accumulate(b, db);
            }
            Op::Add(a, b) => {
                self.accumulate(a, g.clone());
                self.accumulate(b, g.clone());
            }
            Op::AddRow(a, b) => {
                let cols = g.cols();
                let mut db = vec![0.0; cols];
                for (k, v) in g.data().iter().enumerate() {
                    db[k % cols] += v;
                }
                self.accumulate(a, g.clone());
                self.accumulate(b, Tensor::new(1, cols, db));
            }
            Op::Sub(a, b) => {
                self.accumulate(a, g.clone());
                self.accumulate(b, g.map(|x| -x));
            }
            Op::Mul(a, b) => {
                let da = zip_map(g, self.value(b), |x, y| x * y);
                let db = zip_map(g, self.value(a), |x, y| x * y);
                self.accumulate(a, da);
                self.accumulate(b, db);
            }
            Op::Scale(a, k) => self.accumulate(a, g.map(|x| x * k)),
            Op::Tanh(a) => {
                let d = zip_map(g, &self.nodes[i].value, |x, y| x * (1.0 - y * y));
                self.accumulate(a, d);
            }
            Op::Sigmoid(a) => {
                let d = zip_map(g, &self.nodes[i].value, |x, y| x * y * (1.0 - y));
                self.accumulate(a, d);
            }
            Op::Relu(a) => {
                let d = zip_map(g, self.value(a), |x, y| if y > 0.0 { x } else { 0.0 });
                self.accumulate(a, d);
            }
            Op::ConcatCols(ref parts) => {
                let mut offset = 0;
                for &p in parts {
                    let [rows, cols] = self.value(p).shape();
                    let mut d = Vec::with_capacity(rows * cols);
                    for r in 0..rows {
                        d.extend_from_slice(&g.row_slice(r)[offset..offset + cols]);
                    }
                    offset += cols;
                    self.accumulate(p, Tensor::new(rows, cols, d));
                }
            }
            Op::ConcatRows(ref parts) => {
                let mut offset = 0;
                for &p in parts {
                    let [rows, cols] = self.value(p).shape();
                    let d = g.data()[offset * cols..(offset + rows) * cols].to_vec();
                    offset += rows;
                    self.accumulate(p, Tensor::new(rows, cols, d));
                }
            }
            Op::SliceCols(a, start) => {
                let [rows, cols] = self.value(a).shape();
                let mut d = Tensor::zeros(rows, cols);
                for r in 0..rows {
                    for (k, v) in g.row_slice(r).iter().enumerate() {
                        d.set(r, start + k, *v);
                    }
                }
                self.accumulate(a, d);
            }
            Op::SliceRows(a, start) => {
                let [rows, cols] = self.value(a).shape();
                let mut d = Tensor::zeros(rows, cols);
                d.data_mut()[start * cols..start * cols + g.len()].copy_from_slice(g.data());
                self.accumulate(a, d);
            }
            Op::GatherRows(a, ref indices) => {
                let [rows, cols] = self.value(a).shape();
                let mut d = Tensor::zeros(rows, cols);
                for (k, &src) in indices.iter().enumerate() {
                    let row = &mut d.data_mut()[src * cols..(src + 1) * cols];
                    row.iter_mut().zip(g.row_slice(k)).for_each(|(x, y)| *x += y);
                }
                self.accumulate(a, d);
            }
            Op::ScaleRows(a, ref weights) => {
                let cols = g.cols();
                let mut d = g.clone();
                for (r, w) in weights.iter().enumerate() {
                    d.data_mut()[r * cols..(r + 1) * cols].iter_mut().for_each(|x| *x *= w);
                }
                self.accumulate(a, d);
            }
            Op::ScatterAddRows(a, ref indices) => {
                let mut data = Vec::with_capacity(indices.len() * g.cols());
                for &dst in indices {
                    data.extend_from_slice(g.row_slice(dst));
                }
                self.accumulate(a, Tensor::new(indices.len(), g.cols(), data));
            }
            Op::Sum(a) => {
                let [rows, cols] = self.value(a).shape();
                self.accumulate(a, Tensor::filled(rows, cols, g.item()));
            }
            Op::Mean(a) => {
                let [rows, cols] = self.value(a).shape();
                let n = (rows * cols).max(1) as f64;
                self.accumulate(a, Tensor::filled(rows, cols, g.item() / n));
            }
            Op::SquaredEuclidean(a, b) => {
                let (ta, tb) = (self.value(a), self.value(b));
                let cols = ta.cols();
                let mut da = Tensor::zeros(ta.rows(), cols);
                for r in 0..ta.rows() {
                    let gr = g.get(r, 0);
                    for c in 0..cols {
                        da.set(r, c, 2.0 * gr * (ta.get(r, c) - tb.get(r, c)));
                    }
                }
                let db = da.map(|x| -x);
                self.accumulate(a, da);
                self.accumulate(b, db);
            }
        }
    }
}

fn zip_map(a: &Tensor, b: &Tensor, f: impl Fn(f64, f64) -> f64) -> Tensor {
    let data = a.data().iter().zip(b.data()).map(|(&x, &y)| f(x, y)).collect();
    Tensor::new(a.rows(), a.cols(), data)
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn tanh_at_zero() {
        let mut store = ParamStore::new();
        let x = store.add("x", Tensor::scalar(0.0));
        let mut g = Graph::new();
        let xv = g.param(&store, x);
        let y = g.tanh(xv);
        assert_eq!(g.value(y).item(), 0.0);
        g.backward(y, &mut store).unwrap();
        assert_eq!(store.get(x).grad.item(), 1.0);
    }

    #[test]
    fn squared_euclidean_hand_value() {
        let mut g = Graph::new();
        let a = g.constant(Tensor::row(&[3.0, 4.0]));
        let b = g.constant(Tensor::row(&[0.0, 0.0]));
        let d = g.squared_euclidean(a, b).unwrap();
        assert_eq!(g.value(d).item(), 25.0);
    }

    #[test]
    fn identity_matmul() {
        let mut g = Graph::new();
        let a = Tensor::new(3, 2, vec![1.0, -2.0, 0.5, 4.0, 7.0, 9.0]);
        let i = g.constant(Tensor::identity(3));
        let av = g.constant(a.clone());
        let out = g.matmul(i, av).unwrap();
        assert_eq!(g.value(out), &a);
    }

    #[test]
    fn shape_mismatch_is_reported() {
        let mut g = Graph::new();
        let a = g.constant(Tensor::zeros(2, 3));
        let b = g.constant(Tensor::zeros(2, 3));
        let err = g.matmul(a, b).unwrap_err();
        assert!(matches!(err, DiffError::ShapeMismatch { op: "matmul", .. }), "{err}");
        assert!(g.add(a, b).is_ok());
        let c = g.constant(Tensor::zeros(3, 2));
        assert!(g.mul(a, c).is_err());
        assert!(g.slice_cols(a, 2, 4).is_err());
        assert!(g.gather_rows(a, &[0, 2]).is_err());
    }

    #[test]
    fn non_scalar_loss_is_rejected() {
        let mut store = ParamStore::new();
        let mut g = Graph::new();
        let a = g.constant(Tensor::zeros(2, 2));
        assert_eq!(g.backward(a, &mut store), Err(DiffError::NonScalarLoss(2, 2)));
    }

    /// Central-difference gradient check of `f` against the tape.
    fn check(store: &mut ParamStore, f: impl Fn(&mut Graph, &ParamStore) -> Var) {
        store.zero_grad();
        let mut g = Graph::new();
        let loss = f(&mut g, store);
        g.backward(loss, store).unwrap();
        let analytic = store.grads_flat();
        let eps = 1e-5;
        for (k, &a) in analytic.iter().enumerate() {
            let orig = *store.flat_value_mut(k);
            *store.flat_value_mut(k) = orig + eps;
            let mut gp = Graph::new();
            let lp = f(&mut gp, store);
            let fp = gp.value(lp).item();
            *store.flat_value_mut(k) = orig - eps;
            let mut gm = Graph::new();
            let lm = f(&mut gm, store);
            let fm = gm.value(lm).item();
            *store.flat_value_mut(k) = orig;
            let numeric = (fp - fm) / (2.0 * eps);
            let rel = (numeric - a).abs() / numeric.abs().max(a.abs()).max(1e-6);
            assert!(rel < 1e-4, "param {k}: analytic {a} numeric {numeric}");
        }
    }

    fn random(rows: usize, cols: usize, rng: &mut ChaCha8Rng) -> Tensor {
        Tensor::new(rows, cols, (0..rows * cols).map(|_| rng.gen_range(-1.0..1.0)).collect())
    }

    #[test]
    fn every_op_matches_finite_differences() {
        for seed in 0..5 {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let mut store = ParamStore::new();
            let a = store.add("a", random(3, 4, &mut rng));
            let b = store.add("b", random(4, 2, &mut rng));
            let bias = store.add("bias", random(1, 2, &mut rng));
            let c = store.add("c", random(3, 2, &mut rng));
            let target = random(5, 2, &mut rng);
            check(&mut store, |g, s| {
                let (a, b, bias, c) = (g.param(s, a), g.param(s, b), g.param(s, bias), g.param(s, c));
                let ab = g.matmul(a, b).unwrap();
                let h = g.add(ab, bias).unwrap();
                let t = g.tanh(h);
                let sg = g.sigmoid(c);
                let m = g.mul(t, sg).unwrap();
                let r = g.relu(c);
                let d = g.sub(m, r).unwrap();
                let wide = g.concat_cols(&[d, t]).unwrap();
                let narrow = g.slice_cols(wide, 1, 3).unwrap();
                let tall = g.concat_rows(&[narrow, c]).unwrap();
                let picked = g.gather_rows(tall, &[0, 2, 2, 5, 4]).unwrap();
                let weighted = g.scale_rows(picked, &[0.5, -1.0, 2.0, 0.0, 1.5]).unwrap();
                let pooled = g.scatter_add_rows(weighted, &[1, 0, 1, 3, 3], 4).unwrap();
                let back = g.gather_rows(pooled, &[0, 1, 2, 3, 1]).unwrap();
                let mixed = g.add(back, picked).unwrap();
                let scaled = g.scale(mixed, 0.7);
                let tgt = g.constant(target.clone());
                let se = g.squared_euclidean(scaled, tgt).unwrap();
                let top = g.slice_rows(se, 1, 4).unwrap();
                let s1 = g.mean(top);
                let s2 = g.sum(se);
                let s2 = g.scale(s2, 0.1);
                g.add(s1, s2).unwrap()
            });
        }
    }
}
