//! Building blocks recorded on a [`Tape`]: LSTM cell, bidirectional stack,
//! attention pooling and the softmax output layer.

use crate::error::{Error, Result};
use crate::tensor::{ParamId, Real, Tape, Var};

/// Parameters of one LSTM direction. Gate blocks along the `4H` axis are
/// ordered input, forget, output, candidate.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct LstmParams {
    /// `[in × 4H]`
    pub w_x: ParamId,
    /// `[H × 4H]`
    pub w_h: ParamId,
    /// `[1 × 4H]`
    pub b: ParamId,
    pub hidden: usize,
}

/// One step given the already-projected input `x_t·W_x + b` (`[1 × 4H]`).
pub fn lstm_step<F: Real>(tape: &mut Tape<'_, F>, x_proj: Var, h_prev: Var, c_prev: Var, cell: &LstmParams) -> Result<(Var, Var)> {
    let h = cell.hidden;
    let w_h = tape.param(cell.w_h);
    let rec = tape.matmul(h_prev, w_h)?;
    let z = tape.add(x_proj, rec)?;
    let sig_part = tape.slice(z, 1, 0, 3 * h)?;
    let gates = tape.sigmoid(sig_part);
    let cand_part = tape.slice(z, 1, 3 * h, 4 * h)?;
    let g = tape.tanh(cand_part);
    let i = tape.slice(gates, 1, 0, h)?;
    let f = tape.slice(gates, 1, h, 2 * h)?;
    let o = tape.slice(gates, 1, 2 * h, 3 * h)?;
    let keep = tape.mul(f, c_prev)?;
    let write = tape.mul(i, g)?;
    let c = tape.add(keep, write)?;
    let tc = tape.tanh(c);
    let h_t = tape.mul(o, tc)?;
    Ok((h_t, c))
}

/// `i,f,o = σ(·)`, `g = tanh(·)` over `x_t·W_x + h_prev·W_h + b`;
/// `c_t = f⊙c_prev + i⊙g`, `h_t = o⊙tanh(c_t)`.
pub fn lstm_cell<F: Real>(tape: &mut Tape<'_, F>, x_t: Var, h_prev: Var, c_prev: Var, cell: &LstmParams) -> Result<(Var, Var)> {
    let w_x = tape.param(cell.w_x);
    let b = tape.param(cell.b);
    let xw = tape.matmul(x_t, w_x)?;
    let x_proj = tape.add(xw, b)?;
    lstm_step(tape, x_proj, h_prev, c_prev, cell)
}

/// Runs one direction over `inputs` (`[T × in]`), returning the hidden
/// state at each position in input order.
pub fn lstm_sequence<F: Real>(tape: &mut Tape<'_, F>, inputs: Var, cell: &LstmParams, reverse: bool) -> Result<Vec<Var>> {
    let t_len = tape.value(inputs).dims().0;
    if t_len == 0 {
        return Err(Error::EmptySequence);
    }
    let w_x = tape.param(cell.w_x);
    let b = tape.param(cell.b);
    let xw = tape.matmul(inputs, w_x)?;
    let proj = tape.add_row(xw, b)?;
    let zero = crate::tensor::Tensor::zeros(&[1, cell.hidden]);
    let mut h = tape.constant(zero.clone());
    let mut c = tape.constant(zero);
    let mut out = vec![h; t_len];
    let order: Vec<usize> = if reverse { (0..t_len).rev().collect() } else { (0..t_len).collect() };
    for t in order {
        let x_t = tape.slice(proj, 0, t, t + 1)?;
        let (h_t, c_t) = lstm_step(tape, x_t, h, c, cell)?;
        out[t] = h_t;
        h = h_t;
        c = c_t;
    }
    Ok(out)
}

/// Concatenates forward and backward states per position: `[T × 2H]`.
pub fn bilstm_layer<F: Real>(tape: &mut Tape<'_, F>, inputs: Var, fwd: &LstmParams, bwd: &LstmParams) -> Result<Var> {
    let hf = lstm_sequence(tape, inputs, fwd, false)?;
    let hb = lstm_sequence(tape, inputs, bwd, true)?;
    let f = tape.concat(&hf, 0)?;
    let b = tape.concat(&hb, 0)?;
    tape.concat(&[f, b], 1)
}

/// Two stacked BiLSTM layers. `between` is applied to layer one's output
/// before layer two reads it (dropout in training).
pub fn bilstm_stack<F: Real>(
    tape: &mut Tape<'_, F>,
    inputs: Var,
    layers: &[[LstmParams; 2]; 2],
    between: Option<Var>,
) -> Result<Var> {
    let first = bilstm_layer(tape, inputs, &layers[0][0], &layers[0][1])?;
    let first = match between {
        Some(mask) => tape.mul(first, mask)?,
        None => first,
    };
    bilstm_layer(tape, first, &layers[1][0], &layers[1][1])
}

/// Attention pooling over annotations `h` (`[T × 2H]`):
/// `e_i = tanh(w·h_i + b)`, `a = softmax(e)`, `r = Σ a_i h_i`.
///
/// Returns `(a, r)` with `a` as `[T × 1]` and `r` as `[1 × 2H]`.
pub fn attention<F: Real>(tape: &mut Tape<'_, F>, h: Var, w: Var, b: Var) -> Result<(Var, Var)> {
    let scores = tape.matmul(h, w)?;
    let scores = tape.add_row(scores, b)?;
    let e = tape.tanh(scores);
    let a = tape.softmax(e, 0)?;
    let at = tape.transpose(a);
    let r = tape.matmul(at, h)?;
    Ok((a, r))
}

/// `softmax(r·W + b)` over classes: `[1 × C]`.
pub fn output_layer<F: Real>(tape: &mut Tape<'_, F>, r: Var, w: Var, b: Var) -> Result<Var> {
    let logits = tape.matmul(r, w)?;
    let logits = tape.add(logits, b)?;
    tape.softmax(logits, 1)
}
