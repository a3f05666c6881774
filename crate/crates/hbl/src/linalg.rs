//! Dense complex linear algebra for small (pointwise) matrices.
//!
//! All matrices are `r x r`, stored row-major in flat slices. The bundle rank
//! is tiny (r <= 4 in practice), so a cyclic Jacobi eigensolver for Hermitian
//! matrices is both simple and exact enough; every matrix function used by the
//! metric cone (exp, log, sqrt, inverse) routes through it.

use crate::error::{HblError, Result};
use num_complex::Complex64;

pub type C64 = Complex64;

pub fn czero() -> C64 {
    C64::new(0.0, 0.0)
}

pub fn cone() -> C64 {
    C64::new(1.0, 0.0)
}

/// `c = a * b` for row-major `r x r` matrices.
pub fn matmul(a: &[C64], b: &[C64], r: usize) -> Vec<C64> {
    let mut c = vec![czero(); r * r];
    matmul_into(a, b, r, &mut c);
    c
}

pub fn matmul_into(a: &[C64], b: &[C64], r: usize, c: &mut [C64]) {
    for i in 0..r {
        for j in 0..r {
            let mut acc = czero();
            for l in 0..r {
                acc += a[i * r + l] * b[l * r + j];
            }
            c[i * r + j] = acc;
        }
    }
}

pub fn adjoint(a: &[C64], r: usize) -> Vec<C64> {
    let mut out = vec![czero(); r * r];
    for i in 0..r {
        for j in 0..r {
            out[j * r + i] = a[i * r + j].conj();
        }
    }
    out
}

pub fn trace(a: &[C64], r: usize) -> C64 {
    (0..r).map(|i| a[i * r + i]).sum()
}

pub fn identity(r: usize) -> Vec<C64> {
    let mut out = vec![czero(); r * r];
    for i in 0..r {
        out[i * r + i] = cone();
    }
    out
}

pub fn frobenius(a: &[C64]) -> f64 {
    a.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
}

/// Eigendecomposition of a Hermitian matrix by cyclic Jacobi rotations.
///
/// Returns eigenvalues (ascending) and eigenvectors as columns of a unitary
/// matrix `v`, so that `a = v * diag(w) * v^*`.
pub fn hermitian_eig(a: &[C64], r: usize) -> (Vec<f64>, Vec<C64>) {
    let mut m = a.to_vec();
    // symmetrize against roundoff in the caller
    for i in 0..r {
        for j in 0..r {
            let avg = 0.5 * (m[i * r + j] + m[j * r + i].conj());
            m[i * r + j] = avg;
            m[j * r + i] = avg.conj();
        }
    }
    let mut v = identity(r);
    let scale = frobenius(&m).max(1e-300);
    let tol = 1e-15 * scale;
    for _sweep in 0..60 {
        let mut off = 0.0f64;
        for p in 0..r {
            for q in (p + 1)..r {
                off += m[p * r + q].norm_sqr();
            }
        }
        if off.sqrt() <= tol {
            break;
        }
        for p in 0..r {
            for q in (p + 1)..r {
                let apq = m[p * r + q];
                let b = apq.norm();
                if b <= 1e-300 * scale {
                    continue;
                }
                let phase = apq / b;
                let app = m[p * r + p].re;
                let aqq = m[q * r + q].re;
                let tau = (aqq - app) / (2.0 * b);
                // smaller-magnitude root of t^2 + 2 tau t - 1 = 0
                let t = if tau >= 0.0 {
                    1.0 / (tau + (1.0 + tau * tau).sqrt())
                } else {
                    -1.0 / (-tau + (1.0 + tau * tau).sqrt())
                };
                let c = 1.0 / (1.0 + t * t).sqrt();
                let s = t * c;
                // column update: A <- A * U with
                //   U[.,p] = c e_p - s conj(phase) e_q ... chosen to zero (p,q)
                let cs = C64::new(c, 0.0);
                let sp = phase * s;
                for j in 0..r {
                    let ap = m[j * r + p];
                    let aq = m[j * r + q];
                    m[j * r + p] = ap * cs + aq * sp.conj() * -1.0;
                    m[j * r + q] = ap * sp + aq * cs;
                }
                // row update: A <- U^* A
                for j in 0..r {
                    let ap = m[p * r + j];
                    let aq = m[q * r + j];
                    m[p * r + j] = ap * cs + aq * (sp.conj() * -1.0).conj();
                    m[q * r + j] = ap * sp.conj() + aq * cs;
                }
                for j in 0..r {
                    let vp = v[j * r + p];
                    let vq = v[j * r + q];
                    v[j * r + p] = vp * cs + vq * sp.conj() * -1.0;
                    v[j * r + q] = vp * sp + vq * cs;
                }
            }
        }
    }
    let mut order: Vec<usize> = (0..r).collect();
    let vals: Vec<f64> = (0..r).map(|i| m[i * r + i].re).collect();
    order.sort_by(|&i, &j| vals[i].partial_cmp(&vals[j]).unwrap());
    let w: Vec<f64> = order.iter().map(|&i| vals[i]).collect();
    let mut vv = vec![czero(); r * r];
    for (newcol, &oldcol) in order.iter().enumerate() {
        for j in 0..r {
            vv[j * r + newcol] = v[j * r + oldcol];
        }
    }
    (w, vv)
}

/// Applies a real scalar function to a Hermitian matrix through its spectrum.
pub fn hermitian_fn<F: Fn(f64) -> f64>(a: &[C64], r: usize, f: F) -> Vec<C64> {
    let (w, v) = hermitian_eig(a, r);
    let mut out = vec![czero(); r * r];
    for i in 0..r {
        for j in 0..r {
            let mut acc = czero();
            for l in 0..r {
                acc += v[i * r + l] * f(w[l]) * v[j * r + l].conj();
            }
            out[i * r + j] = acc;
        }
    }
    out
}

pub fn min_eigenvalue(a: &[C64], r: usize) -> f64 {
    hermitian_eig(a, r).0[0]
}

/// `exp` of a Hermitian matrix.
pub fn herm_exp(a: &[C64], r: usize) -> Vec<C64> {
    hermitian_fn(a, r, f64::exp)
}

/// `log` of a Hermitian positive-definite matrix; eigenvalues below `floor`
/// are an error, not a clamp.
pub fn herm_log(a: &[C64], r: usize, floor: f64) -> Result<Vec<C64>> {
    let (w, v) = hermitian_eig(a, r);
    if w[0] < floor {
        return Err(HblError::DegenerateMetric(format!(
            "eigenvalue {} below floor {}",
            w[0], floor
        )));
    }
    Ok(apply_spectrum(&w, &v, r, f64::ln))
}

pub fn herm_inv(a: &[C64], r: usize, floor: f64) -> Result<Vec<C64>> {
    let (w, v) = hermitian_eig(a, r);
    if w[0] < floor {
        return Err(HblError::DegenerateMetric(format!(
            "eigenvalue {} below floor {}",
            w[0], floor
        )));
    }
    Ok(apply_spectrum(&w, &v, r, |x| 1.0 / x))
}

pub fn herm_sqrt(a: &[C64], r: usize, floor: f64) -> Result<Vec<C64>> {
    let (w, v) = hermitian_eig(a, r);
    if w[0] < floor {
        return Err(HblError::DegenerateMetric(format!(
            "eigenvalue {} below floor {}",
            w[0], floor
        )));
    }
    Ok(apply_spectrum(&w, &v, r, f64::sqrt))
}

pub fn herm_inv_sqrt(a: &[C64], r: usize, floor: f64) -> Result<Vec<C64>> {
    let (w, v) = hermitian_eig(a, r);
    if w[0] < floor {
        return Err(HblError::DegenerateMetric(format!(
            "eigenvalue {} below floor {}",
            w[0], floor
        )));
    }
    Ok(apply_spectrum(&w, &v, r, |x| 1.0 / x.sqrt()))
}

fn apply_spectrum<F: Fn(f64) -> f64>(w: &[f64], v: &[C64], r: usize, f: F) -> Vec<C64> {
    let mut out = vec![czero(); r * r];
    for i in 0..r {
        for j in 0..r {
            let mut acc = czero();
            for l in 0..r {
                acc += v[i * r + l] * f(w[l]) * v[j * r + l].conj();
            }
            out[i * r + j] = acc;
        }
    }
    out
}

/// Directional derivative of `exp` at Hermitian `x` in direction `e`
/// (Daleckii-Krein formula through the eigenbasis of `x`).
pub fn herm_dexp(x: &[C64], e: &[C64], r: usize) -> Vec<C64> {
    let (w, v) = hermitian_eig(x, r);
    // E' = V^* E V
    let vh = adjoint(&v, r);
    let ep = matmul(&matmul(&vh, e, r), &v, r);
    let mut f = vec![czero(); r * r];
    for i in 0..r {
        for j in 0..r {
            let (a, b) = (w[i], w[j]);
            let phi = if (a - b).abs() < 1e-9 {
                // symmetric expansion around the midpoint
                let m = 0.5 * (a + b);
                let d = 0.5 * (a - b);
                m.exp() * (1.0 + d * d / 6.0)
            } else {
                (a.exp() - b.exp()) / (a - b)
            };
            f[i * r + j] = ep[i * r + j] * phi;
        }
    }
    matmul(&matmul(&v, &f, r), &vh, r)
}

/// Pairwise (cascade) summation; the mandated deterministic reduction order
/// for all grid integrals.
pub fn pairwise_sum_c(xs: &[C64]) -> C64 {
    if xs.len() <= 32 {
        let mut acc = czero();
        for x in xs {
            acc += *x;
        }
        acc
    } else {
        let mid = xs.len() / 2;
        pairwise_sum_c(&xs[..mid]) + pairwise_sum_c(&xs[mid..])
    }
}

pub fn pairwise_sum_f(xs: &[f64]) -> f64 {
    if xs.len() <= 32 {
        xs.iter().sum()
    } else {
        let mid = xs.len() / 2;
        pairwise_sum_f(&xs[..mid]) + pairwise_sum_f(&xs[mid..])
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn random_hermitian(rng: &mut ChaCha8Rng, r: usize) -> Vec<C64> {
        let mut a = vec![czero(); r * r];
        for i in 0..r {
            for j in 0..r {
                a[i * r + j] = C64::new(rng.gen::<f64>() - 0.5, rng.gen::<f64>() - 0.5);
            }
        }
        let ah = adjoint(&a, r);
        for i in 0..r * r {
            a[i] = 0.5 * (a[i] + ah[i]);
        }
        a
    }

    #[test]
    fn jacobi_reconstructs() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for r in 1..=4 {
            for _ in 0..20 {
                let a = random_hermitian(&mut rng, r);
                let (w, v) = hermitian_eig(&a, r);
                // v diag(w) v^* == a
                let mut rec = vec![czero(); r * r];
                for i in 0..r {
                    for j in 0..r {
                        let mut acc = czero();
                        for l in 0..r {
                            acc += v[i * r + l] * w[l] * v[j * r + l].conj();
                        }
                        rec[i * r + j] = acc;
                    }
                }
                for i in 0..r * r {
                    assert!((rec[i] - a[i]).norm() < 1e-12, "r={r} entry {i}");
                }
                // unitarity
                let vh = adjoint(&v, r);
                let id = matmul(&vh, &v, r);
                for i in 0..r {
                    for j in 0..r {
                        let want = if i == j { 1.0 } else { 0.0 };
                        assert!((id[i * r + j] - want).norm() < 1e-12);
                    }
                }
            }
        }
    }

    #[test]
    fn known_eigenvalues() {
        // [[2, i],[-i, 2]] has eigenvalues 1 and 3
        let a = vec![
            C64::new(2.0, 0.0),
            C64::new(0.0, 1.0),
            C64::new(0.0, -1.0),
            C64::new(2.0, 0.0),
        ];
        let (w, _) = hermitian_eig(&a, 2);
        assert!((w[0] - 1.0).abs() < 1e-13);
        assert!((w[1] - 3.0).abs() < 1e-13);
    }

    #[test]
    fn exp_log_roundtrip() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for _ in 0..10 {
            let a = random_hermitian(&mut rng, 3);
            let e = herm_exp(&a, 3);
            let b = herm_log(&e, 3, 1e-12).unwrap();
            for i in 0..9 {
                assert!((a[i] - b[i]).norm() < 1e-11);
            }
        }
    }

    #[test]
    fn dexp_matches_finite_difference() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let x = random_hermitian(&mut rng, 3);
        let e = random_hermitian(&mut rng, 3);
        let d = herm_dexp(&x, &e, 3);
        let eps = 1e-6;
        let mut xp = x.clone();
        let mut xm = x.clone();
        for i in 0..9 {
            xp[i] += eps * e[i];
            xm[i] -= eps * e[i];
        }
        let fp = herm_exp(&xp, 3);
        let fm = herm_exp(&xm, 3);
        for i in 0..9 {
            let fd = (fp[i] - fm[i]) / (2.0 * eps);
            assert!((fd - d[i]).norm() < 1e-8, "entry {i}: fd={fd} an={}", d[i]);
        }
    }
}
