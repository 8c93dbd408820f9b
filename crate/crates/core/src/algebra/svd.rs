//! One-sided Jacobi SVD for square complex blocks.

use nalgebra::{DMatrix, DVector};

use super::C64;
use crate::error::{QfaError, Result};

const MAX_SWEEPS: usize = 80;

/// `m = u · diag(s) · v*` with `s` sorted descending and `u`, `v` unitary.
#[derive(Clone, Debug)]
pub(crate) struct BlockSvd {
    pub u: DMatrix<C64>,
    pub s: Vec<f64>,
    pub v: DMatrix<C64>,
}

pub(crate) fn jacobi_svd(m: &DMatrix<C64>) -> Result<BlockSvd> {
    let n = m.ncols();
    assert_eq!(m.nrows(), n, "square blocks only");
    let mut a = m.clone();
    let mut v = DMatrix::<C64>::identity(n, n);
    let tol = n as f64 * f64::EPSILON;
    // columns below this squared norm are numerically zero
    let negligible = (f64::EPSILON * m.norm()).powi(2);
    let mut converged = n < 2;
    for _ in 0..MAX_SWEEPS {
        let mut rotated = false;
        for p in 0..n {
            for q in p + 1..n {
                let alpha = a.column(p).norm_squared();
                let beta = a.column(q).norm_squared();
                let gamma = a.column(p).dotc(&a.column(q));
                let g = gamma.norm();
                if alpha <= negligible || beta <= negligible || g <= tol * (alpha * beta).sqrt() {
                    continue;
                }
                rotated = true;
                let phase = gamma / g;
                let zeta = (beta - alpha) / (2.0 * g);
                let t = zeta.signum() / (zeta.abs() + (1.0 + zeta * zeta).sqrt());
                let c = 1.0 / (1.0 + t * t).sqrt();
                let s = c * t;
                rotate(&mut a, p, q, c, s, phase);
                rotate(&mut v, p, q, c, s, phase);
            }
        }
        if !rotated {
            converged = true;
            break;
        }
    }
    if !converged {
        return Err(QfaError::DecompositionFailure);
    }

    let norms: Vec<f64> = (0..n).map(|j| a.column(j).norm()).collect();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| norms[j].total_cmp(&norms[i]));
    let smax = norms.iter().copied().fold(0.0, f64::max);
    let floor = n as f64 * f64::EPSILON * smax;

    let mut u = DMatrix::<C64>::zeros(n, n);
    let mut vs = DMatrix::<C64>::zeros(n, n);
    let mut s = Vec::with_capacity(n);
    let mut filled = Vec::with_capacity(n);
    for (k, &j) in order.iter().enumerate() {
        vs.set_column(k, &v.column(j));
        if norms[j] > floor && norms[j] > 0.0 {
            s.push(norms[j]);
            u.set_column(k, &(a.column(j) / C64::new(norms[j], 0.0)));
            filled.push(k);
        } else {
            s.push(0.0);
        }
    }
    // complete u on the numerical kernel by Gram–Schmidt against the range,
    // each time taking the basis vector with the largest residual
    for k in 0..n {
        if filled.contains(&k) {
            continue;
        }
        let best = (0..n)
            .map(|e| {
                let mut cand = DVector::<C64>::zeros(n);
                cand[e] = C64::new(1.0, 0.0);
                for _ in 0..2 {
                    for &f in &filled {
                        let col = u.column(f).into_owned();
                        let proj = col.dotc(&cand);
                        cand -= col * proj;
                    }
                }
                cand
            })
            .max_by(|x, y| x.norm().total_cmp(&y.norm()))
            .expect("n > 0");
        let nc = best.norm();
        if nc == 0.0 {
            return Err(QfaError::DecompositionFailure);
        }
        u.set_column(k, &(best / C64::new(nc, 0.0)));
        filled.push(k);
    }
    Ok(BlockSvd { u, s, v: vs })
}

/// Applies the rotation that zeroes the `(p, q)` column inner product to
/// columns `p` and `q` of `m`.
fn rotate(m: &mut DMatrix<C64>, p: usize, q: usize, c: f64, s: f64, phase: C64) {
    let cp = m.column(p).into_owned();
    let cq = m.column(q).into_owned() * phase.conj();
    let (c, s) = (C64::new(c, 0.0), C64::new(s, 0.0));
    m.set_column(p, &(&cp * c - &cq * s));
    m.set_column(q, &(cp * s + cq * c));
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus::{random_matrix, sample_rng};
    use rand::Rng;

    fn check(m: &DMatrix<C64>) {
        let n = m.nrows();
        let d = jacobi_svd(m).unwrap();
        let smat = DMatrix::from_diagonal(&DVector::from_iterator(n, d.s.iter().map(|&x| C64::new(x, 0.0))));
        let rec = &d.u * smat * d.v.adjoint();
        let scale = m.norm().max(1e-300);
        assert!((rec - m).norm() <= 1e-13 * scale + 1e-300);
        let id = DMatrix::<C64>::identity(n, n);
        assert!((d.u.adjoint() * &d.u - &id).norm() < 1e-12);
        assert!((d.v.adjoint() * &d.v - &id).norm() < 1e-12);
        assert!(d.s.windows(2).all(|w| w[0] >= w[1]));
    }

    #[test]
    fn random_low_rank_blocks() {
        let mut rng = sample_rng(5, 0);
        for t in 0..5000 {
            let n = 1 + t % 6;
            let r = rng.random_range(0..=n);
            let mut m = DMatrix::<C64>::zeros(n, n);
            for _ in 0..r {
                let u = random_matrix(n, &mut rng).column(0).into_owned();
                let v = random_matrix(n, &mut rng).column(0).into_owned();
                m += &u * v.adjoint();
            }
            check(&m);
            let d = jacobi_svd(&m).unwrap();
            if r < n {
                assert_eq!(d.s[n - 1], 0.0);
            }
        }
    }

    #[test]
    fn known_values() {
        let m = DMatrix::from_row_slice(2, 2, &[C64::new(0.0, 0.0), C64::new(2.0, 0.0), C64::new(0.0, 0.0), C64::new(0.0, 0.0)]);
        let d = jacobi_svd(&m).unwrap();
        assert_eq!(d.s, vec![2.0, 0.0]);
        check(&m);
        check(&DMatrix::zeros(3, 3));
    }
}
