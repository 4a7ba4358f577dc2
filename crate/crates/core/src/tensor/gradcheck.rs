use super::{ParamStore, Tape, Var};
use crate::error::Result;

/// `|a - n| / max(|a|, |n|, 1e-8)`
pub fn relative_error(analytic: f64, numeric: f64) -> f64 {
    (analytic - numeric).abs() / analytic.abs().max(numeric.abs()).max(1e-8)
}

/// Compares tape gradients of every non-frozen parameter against central
/// differences `(f(θ+ε) − f(θ−ε)) / 2ε` and returns the worst relative error.
///
/// Tensors with more than `max_coords` entries are checked on an evenly
/// strided subset. `loss` must be deterministic.
pub fn grad_check<L>(params: &mut ParamStore<f64>, eps: f64, max_coords: usize, loss: L) -> Result<f64>
where
    L: Fn(&mut Tape<'_, f64>) -> Result<Var>,
{
    let analytic = {
        let mut tape = Tape::new(params);
        let out = loss(&mut tape)?;
        tape.backward(out)?.into_params()
    };

    let eval = |store: &ParamStore<f64>| -> Result<f64> {
        let mut tape = Tape::new(store);
        let out = loss(&mut tape)?;
        Ok(tape.value(out).data()[0])
    };

    let ids: Vec<_> = params.iter().filter(|(_, p)| !p.frozen).map(|(id, _)| id).collect();
    let mut worst = 0.0f64;
    for id in ids {
        let n = params.get(id).value.len();
        let stride = n.div_ceil(max_coords.max(1)).max(1);
        for i in (0..n).step_by(stride) {
            let orig = params.get(id).value.data()[i];
            params.get_mut(id).value.data_mut()[i] = orig + eps;
            let plus = eval(params)?;
            params.get_mut(id).value.data_mut()[i] = orig - eps;
            let minus = eval(params)?;
            params.get_mut(id).value.data_mut()[i] = orig;

            let numeric = (plus - minus) / (2.0 * eps);
            let a = analytic[id.0].as_ref().map_or(0.0, |g| g.data()[i]);
            worst = worst.max(relative_error(a, numeric));
        }
    }
    Ok(worst)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::seeded_rng;
    use crate::tensor::Tensor;

    #[test]
    fn quadratic_is_exact() {
        let mut store = ParamStore::new();
        let mut rng = seeded_rng(1);
        let theta = store.add("theta", Tensor::uniform(&[3, 4], -2.0, 2.0, &mut rng), false);
        let err = grad_check(&mut store, 1e-5, 100, |tape| {
            let t = tape.param(theta);
            let sq = tape.mul(t, t)?;
            Ok(tape.sum(sq))
        })
        .unwrap();
        assert!(err < 1e-8, "{err}");
    }

    #[test]
    fn sigmoid_chain_of_depth_four() {
        let mut store = ParamStore::new();
        let mut rng = seeded_rng(2);
        let w = store.add("w", Tensor::uniform(&[3, 3], -1.0, 1.0, &mut rng), false);
        let x = store.add("x", Tensor::uniform(&[1, 3], -1.0, 1.0, &mut rng), false);
        let err = grad_check(&mut store, 1e-5, 100, |tape| {
            let wv = tape.param(w);
            let mut h = tape.param(x);
            for _ in 0..4 {
                let z = tape.matmul(h, wv)?;
                h = tape.sigmoid(z);
            }
            Ok(tape.sum(h))
        })
        .unwrap();
        assert!(err < 1e-4, "{err}");
    }

    #[test]
    fn every_primitive_differentiates() {
        let mut store = ParamStore::new();
        let mut rng = seeded_rng(3);
        let a = store.add("a", Tensor::uniform(&[3, 4], -1.0, 1.0, &mut rng), false);
        let b = store.add("b", Tensor::uniform(&[3, 4], -1.0, 1.0, &mut rng), false);
        let row = store.add("row", Tensor::uniform(&[1, 4], -1.0, 1.0, &mut rng), false);
        let emb = store.add("emb", Tensor::uniform(&[5, 4], -1.0, 1.0, &mut rng), false);
        let err = grad_check(&mut store, 1e-5, 100, |tape| {
            let (a, b, row, emb) = (tape.param(a), tape.param(b), tape.param(row), tape.param(emb));
            let m = tape.mul(a, b)?;
            let s = tape.add(m, a)?;
            let s = tape.add_row(s, row)?;
            let t = tape.tanh(s);
            let g = tape.gather(emb, &[0, 4, 4])?;
            let c0 = tape.concat(&[t, g], 0)?;
            let c1 = tape.concat(&[c0, c0], 1)?;
            let sl = tape.slice(c1, 1, 2, 7)?;
            let sl = tape.slice(sl, 0, 1, 5)?;
            let tr = tape.transpose(sl);
            let sm0 = tape.softmax(tr, 0)?;
            let sm1 = tape.softmax(sm0, 1)?;
            let sc = tape.scale(sm1, 3.0);
            let pick_src = tape.slice(sc, 0, 0, 1)?;
            let p = tape.softmax(pick_src, 1)?;
            let nll = tape.neg_log_pick(p, 2, 0.7)?;
            let mean = tape.mean(sc);
            tape.add(nll, mean)
        })
        .unwrap();
        assert!(err < 1e-6, "{err}");
    }
}
