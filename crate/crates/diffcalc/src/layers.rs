use rand::Rng;

use crate::{DiffError, Graph, ParamId, ParamStore, Result, Var};

/// Affine map `x @ W + b`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Linear {
    pub weight: ParamId,
    pub bias: Option<ParamId>,
    pub in_dim: usize,
    pub out_dim: usize,
}

impl Linear {
    pub fn new(store: &mut ParamStore, name: &str, in_dim: usize, out_dim: usize, rng: &mut impl Rng) -> Self {
        let weight = store.add_weight(format!("{name}.weight"), in_dim, out_dim, rng);
        let bias = Some(store.add_bias(format!("{name}.bias"), out_dim));
        Linear { weight, bias, in_dim, out_dim }
    }

    pub fn without_bias(store: &mut ParamStore, name: &str, in_dim: usize, out_dim: usize, rng: &mut impl Rng) -> Self {
        let weight = store.add_weight(format!("{name}.weight"), in_dim, out_dim, rng);
        Linear { weight, bias: None, in_dim, out_dim }
    }

    pub fn forward(&self, g: &mut Graph, store: &ParamStore, x: Var) -> Result<Var> {
        let w = g.param(store, self.weight);
        let y = g.matmul(x, w)?;
        match self.bias {
            Some(b) => {
                let b = g.param(store, b);
                g.add(y, b)
            }
            None => Ok(y),
        }
    }
}

#[derive(Debug, Clone, Copy)]
pub struct LstmState {
    pub h: Var,
    pub c: Var,
}

/// LSTM cell with gate blocks ordered input, forget, cell candidate, output.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LstmCell {
    pub weight: ParamId,
    pub bias: ParamId,
    pub input_dim: usize,
    pub hidden_dim: usize,
}

impl LstmCell {
    pub fn new(store: &mut ParamStore, name: &str, input_dim: usize, hidden_dim: usize, rng: &mut impl Rng) -> Self {
        let weight = store.add_weight(format!("{name}.weight"), input_dim + hidden_dim, 4 * hidden_dim, rng);
        let bias = store.add_bias(format!("{name}.bias"), 4 * hidden_dim);
        LstmCell { weight, bias, input_dim, hidden_dim }
    }

    /// Zero state for `batch` sequences.
    pub fn zero_state(&self, g: &mut Graph, batch: usize) -> LstmState {
        let h = g.constant(crate::Tensor::zeros(batch, self.hidden_dim));
        let c = g.constant(crate::Tensor::zeros(batch, self.hidden_dim));
        LstmState { h, c }
    }

    pub fn forward(&self, g: &mut Graph, store: &ParamStore, x: Var, state: LstmState) -> Result<LstmState> {
        let [_, in_cols] = g.value(x).shape();
        if in_cols != self.input_dim {
            return Err(DiffError::ShapeMismatch {
                op: "lstm_cell",
                expected: format!("_x{}", self.input_dim),
                got: format!("_x{in_cols}"),
            });
        }
        let hd = self.hidden_dim;
        let xh = g.concat_cols(&[x, state.h])?;
        let w = g.param(store, self.weight);
        let b = g.param(store, self.bias);
        let z = g.matmul(xh, w)?;
        let z = g.add(z, b)?;
        let i = g.slice_cols(z, 0, hd)?;
        let f = g.slice_cols(z, hd, 2 * hd)?;
        let cand = g.slice_cols(z, 2 * hd, 3 * hd)?;
        let o = g.slice_cols(z, 3 * hd, 4 * hd)?;
        let i = g.sigmoid(i);
        let f = g.sigmoid(f);
        let cand = g.tanh(cand);
        let o = g.sigmoid(o);
        let keep = g.mul(f, state.c)?;
        let write = g.mul(i, cand)?;
        let c = g.add(keep, write)?;
        let tc = g.tanh(c);
        let h = g.mul(o, tc)?;
        Ok(LstmState { h, c })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::Tensor;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn zero_parameters_give_zero_hidden_state() {
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        let mut store = ParamStore::new();
        let cell = LstmCell::new(&mut store, "lstm", 3, 4, &mut rng);
        store.load_flat(&vec![0.0; store.num_values()]).unwrap();
        let mut g = Graph::new();
        let x = g.constant(Tensor::row(&[1.0, -2.0, 0.5]));
        let state = LstmState { h: g.constant(Tensor::row(&[0.3; 4])), c: g.constant(Tensor::row(&[0.0; 4])) };
        let out = cell.forward(&mut g, &store, x, state).unwrap();
        assert!(g.value(out.h).data().iter().all(|&v| v == 0.0));
    }

    #[test]
    fn saturated_forget_and_closed_input_keep_cell() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let mut store = ParamStore::new();
        let cell = LstmCell::new(&mut store, "lstm", 2, 3, &mut rng);
        store.get_mut(cell.weight).value.data_mut().fill(0.0);
        let bias = store.get_mut(cell.bias).value.data_mut();
        bias[0..3].fill(-800.0); // input gate -> 0
        bias[3..6].fill(800.0); // forget gate -> 1
        let mut g = Graph::new();
        let x = g.constant(Tensor::row(&[0.4, 0.9]));
        let c_prev = [0.25, -1.5, 3.0];
        let state = LstmState { h: g.constant(Tensor::row(&[0.1, 0.2, 0.3])), c: g.constant(Tensor::row(&c_prev)) };
        let out = cell.forward(&mut g, &store, x, state).unwrap();
        assert_eq!(g.value(out.c).data(), &c_prev);
    }

    #[test]
    fn wrong_input_width_is_rejected() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let mut store = ParamStore::new();
        let cell = LstmCell::new(&mut store, "lstm", 2, 3, &mut rng);
        let mut g = Graph::new();
        let x = g.constant(Tensor::row(&[1.0, 2.0, 3.0]));
        let state = cell.zero_state(&mut g, 1);
        assert!(matches!(cell.forward(&mut g, &store, x, state), Err(DiffError::ShapeMismatch { .. })));
    }
}
