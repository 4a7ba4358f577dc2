//! Row-major inner loops. All slices are contiguous; the loops are written
//! so the innermost index walks memory sequentially.

use super::Real;

#[inline]
pub(crate) fn axpy<F: Real>(alpha: F, x: &[F], y: &mut [F]) {
    for (yi, &xi) in y.iter_mut().zip(x) {
        *yi += alpha * xi;
    }
}

#[inline]
pub(crate) fn dot<F: Real>(x: &[F], y: &[F]) -> F {
    // Eight independent lanes so the loop vectorizes.
    let n = x.len().min(y.len());
    let (xc, yc) = (x[..n].chunks_exact(8), y[..n].chunks_exact(8));
    let (xr, yr) = (xc.remainder(), yc.remainder());
    let mut lanes = [F::zero(); 8];
    for (a, b) in xc.zip(yc) {
        for l in 0..8 {
            lanes[l] += a[l] * b[l];
        }
    }
    let mut acc = lanes.iter().fold(F::zero(), |s, &v| s + v);
    for (&a, &b) in xr.iter().zip(yr) {
        acc += a * b;
    }
    acc
}

/// `out[m×n] += a[m×k] · b[k×n]`
pub(crate) fn matmul_acc<F: Real>(a: &[F], b: &[F], out: &mut [F], m: usize, k: usize, n: usize) {
    for i in 0..m {
        let out_row = &mut out[i * n..(i + 1) * n];
        for p in 0..k {
            let aip = a[i * k + p];
            if aip != F::zero() {
                axpy(aip, &b[p * n..(p + 1) * n], out_row);
            }
        }
    }
}

/// `da[m×k] += g[m×n] · bᵀ` where `b` is `k×n`.
pub(crate) fn matmul_grad_a<F: Real>(g: &[F], b: &[F], da: &mut [F], m: usize, k: usize, n: usize) {
    for i in 0..m {
        let g_row = &g[i * n..(i + 1) * n];
        for p in 0..k {
            da[i * k + p] += dot(g_row, &b[p * n..(p + 1) * n]);
        }
    }
}

/// `db[k×n] += aᵀ · g` where `a` is `m×k` and `g` is `m×n`.
pub(crate) fn matmul_grad_b<F: Real>(a: &[F], g: &[F], db: &mut [F], m: usize, k: usize, n: usize) {
    for i in 0..m {
        let g_row = &g[i * n..(i + 1) * n];
        for p in 0..k {
            let aip = a[i * k + p];
            if aip != F::zero() {
                axpy(aip, g_row, &mut db[p * n..(p + 1) * n]);
            }
        }
    }
}

#[inline]
pub(crate) fn sigmoid<F: Real>(x: F) -> F {
    if x >= F::zero() {
        F::one() / (F::one() + (-x).exp())
    } else {
        let e = x.exp();
        e / (F::one() + e)
    }
}

/// Numerically stable softmax of a strided lane, in place.
pub(crate) fn softmax_lane<F: Real>(data: &mut [F], start: usize, len: usize, stride: usize) {
    let mut max = F::neg_infinity();
    for j in 0..len {
        max = max.max(data[start + j * stride]);
    }
    let mut total = F::zero();
    for j in 0..len {
        let idx = start + j * stride;
        let e = (data[idx] - max).exp();
        data[idx] = e;
        total += e;
    }
    for j in 0..len {
        data[start + j * stride] /= total;
    }
}
