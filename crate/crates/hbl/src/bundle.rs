//! Hermitian metrics on the twisted trivial bundle and their Chern geometry.
//!
//! A metric is stored as the positive endomorphism field w relating it to the
//! flat background metric in the global frame; the full curvature is the
//! constant central part plus dbar(w^{-1} del w).

use crate::error::{HblError, Result};
use crate::geometry::background::Background;
use crate::geometry::calculus::{background_curvature, dbar, del, wedge};
use crate::geometry::form::EndForm;
use crate::geometry::grid::GridField;
use crate::geometry::spectral::{band_limit, field_from_fn};
use crate::linalg::{self, C64};
use rand::Rng;

/// Eigenvalue floor below which a metric counts as degenerate.
pub const METRIC_FLOOR: f64 = 1e-12;

#[derive(Clone, Debug)]
pub struct Metric {
    pub w: GridField,
}

impl Metric {
    pub fn new(mut w: GridField) -> Result<Self> {
        if !w.is_finite() {
            return Err(HblError::DegenerateMetric("non-finite or non-positive metric".into()));
        }
        w.hermitize();
        if w.min_eigenvalue() <= METRIC_FLOOR {
            return Err(HblError::DegenerateMetric("non-finite or non-positive metric".into()));
        }
        Ok(Metric { w })
    }

    pub fn background(bg: &Background) -> Self {
        Metric {
            w: GridField::identity(bg.points(), bg.rank),
        }
    }

    pub fn inv(&self) -> GridField {
        self.w.herm_map(METRIC_FLOOR, |x| 1.0 / x).expect("validated metric")
    }

    pub fn sqrt(&self) -> GridField {
        self.w.herm_map(METRIC_FLOOR, f64::sqrt).expect("validated metric")
    }

    pub fn inv_sqrt(&self) -> GridField {
        self.w
            .herm_map(METRIC_FLOOR, |x| 1.0 / x.sqrt())
            .expect("validated metric")
    }

    pub fn log(&self) -> GridField {
        self.w.herm_map(METRIC_FLOOR, f64::ln).expect("validated metric")
    }

    /// exp(S) for a Hermitian generator field.
    pub fn from_generator(s: &GridField) -> Result<Self> {
        let mut s = s.clone();
        s.hermitize();
        Metric::new(s.herm_map(f64::NEG_INFINITY, f64::exp)?)
    }

    /// Random smooth metric exp(S) with S Hermitian, band-limited and tapered.
    pub fn random(
        bg: &Background,
        rng: &mut impl Rng,
        band: usize,
        amplitude: f64,
    ) -> Result<Self> {
        let s = random_hermitian_field(bg, bg.rank, rng, band, amplitude);
        Metric::from_generator(&s)
    }

    /// One-parameter deformation w(eps) = w^{1/2} exp(eps S0) w^{1/2} for a
    /// Hermitian seed S0; at eps=0 the velocity w^{-1} w' is
    /// w^{-1/2} S0 w^{1/2}, an H-Hermitian endomorphism.
    pub fn deformed(&self, s0: &GridField, eps: f64) -> Result<Self> {
        let half = self.sqrt();
        let e = s0.scale(C64::new(eps, 0.0)).herm_map(f64::NEG_INFINITY, f64::exp)?;
        Metric::new(half.matmul(&e).matmul(&half))
    }

    /// The H-Hermitian velocity of `deformed` at eps=0.
    pub fn deformation_velocity(&self, s0: &GridField) -> GridField {
        self.inv_sqrt().matmul(&s0.matmul(&self.sqrt()))
    }
}

/// Band-limited random Hermitian endomorphism field with a Gaussian spectral
/// taper; amplitudes are scaled so identities hold to near round-off on the
/// dealiased grid.
pub fn random_hermitian_field(
    bg: &Background,
    r: usize,
    rng: &mut impl Rng,
    band: usize,
    amplitude: f64,
) -> GridField {
    let axes = bg.axes();
    // a handful of explicit low modes per matrix entry
    let modes: Vec<(Vec<i64>, C64)> = (0..(4 * axes))
        .map(|_| {
            let k: Vec<i64> = (0..axes)
                .map(|_| rng.gen_range(-(band as i64)..=band as i64))
                .collect();
            let c = C64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0));
            (k, c)
        })
        .collect();
    let coeffs: Vec<C64> = (0..r * r * modes.len())
        .map(|_| C64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)))
        .collect();
    let mut f = field_from_fn(bg, r, |x, m| {
        for (mi, (k, c)) in modes.iter().enumerate() {
            let phase: f64 = k
                .iter()
                .zip(x.iter())
                .map(|(&ki, &xi)| ki as f64 * xi)
                .sum::<f64>()
                * 2.0
                * std::f64::consts::PI;
            let e = C64::new(0.0, phase).exp() * c;
            for i in 0..r {
                for j in 0..r {
                    m[i * r + j] += e * coeffs[(i * r + j) * modes.len() + mi];
                }
            }
        }
    });
    f.hermitize();
    let f = band_limit(bg, &f, band, Some(band as f64 / 2.0));
    let sup = f.sup_frobenius().max(1e-30);
    let mut f = f.scale(C64::new(amplitude / sup, 0.0));
    f.hermitize();
    f
}

/// Connection (1,0)-form of the non-central part: theta_a = w^{-1} d_a w.
pub fn connection_form(bg: &Background, m: &Metric) -> EndForm {
    let winv = m.inv();
    let dw = del(bg, &EndForm::from_field(bg.n, m.w.clone()));
    let mut out = EndForm::zero(bg.n, 1, 0, bg.rank, bg.points());
    for a in 0..bg.n {
        *out.comp_mut(a, 0) = winv.matmul(dw.comp(a, 0));
    }
    out
}

/// Full curvature F_H = F_0 Id + dbar(w^{-1} del w) as a (1,1)-form whose
/// (a,b) component multiplies dz^a wedge dzbar^b.
pub fn curvature(bg: &Background, m: &Metric) -> EndForm {
    let theta = connection_form(bg, m);
    background_curvature(bg, bg.points()).add(&dbar(bg, &theta))
}

pub fn i_curvature(bg: &Background, m: &Metric) -> EndForm {
    curvature(bg, m).scale(C64::new(0.0, 1.0))
}

/// Chern covariant (1,0)-derivative on End(E)-valued forms:
/// D'f = del f + theta wedge f - (-1)^{deg f} f wedge theta.
pub fn chern_del(bg: &Background, theta: &EndForm, f: &EndForm) -> EndForm {
    let mut out = del(bg, f);
    out = out.add(&wedge(theta, f));
    let sign = if (f.p + f.q) % 2 == 0 { -1.0 } else { 1.0 };
    out.add(&wedge(f, theta).scale(C64::new(sign, 0.0)))
}

/// Riemannian geodesic between metrics in the space of Hermitian metrics,
/// computed through a similarity transform that keeps every step Hermitian.
pub fn geodesic(a: &Metric, b: &Metric, t: f64) -> Result<Metric> {
    let half = a.sqrt();
    let inv_half = a.inv_sqrt();
    let mut mid = inv_half.matmul(&b.w).matmul(&inv_half);
    mid.hermitize();
    let l = mid.herm_map(METRIC_FLOOR, f64::ln)?;
    let e = l.scale(C64::new(t, 0.0)).herm_map(f64::NEG_INFINITY, f64::exp)?;
    Metric::new(half.matmul(&e).matmul(&half))
}

/// s = log(w_a^{-1} w_b), so that the geodesic is w_a exp(t s).
pub fn log_map(a: &Metric, b: &Metric) -> Result<GridField> {
    let half = a.sqrt();
    let inv_half = a.inv_sqrt();
    let mut mid = inv_half.matmul(&b.w).matmul(&inv_half);
    mid.hermitize();
    let l = mid.herm_map(METRIC_FLOOR, f64::ln)?;
    Ok(inv_half.matmul(&l).matmul(&half))
}

fn kaehler_inverse(bg: &Background) -> Vec<C64> {
    linalg::herm_inv(&bg.kaehler, bg.n, METRIC_FLOOR).expect("validated Kaehler form")
}

/// Pointwise squared H-norm of an End(E)-valued (p,q)-form with p,q <= 1:
/// matrix indices contracted with w, form indices with the inverse Kaehler
/// metric. Returns a real scalar field.
pub fn pointwise_h_norm_sq(bg: &Background, f: &EndForm, m: &Metric) -> GridField {
    assert!(f.p <= 1 && f.q <= 1, "H-norm implemented for p,q <= 1");
    let n = bg.n;
    let ginv = kaehler_inverse(bg);
    let winv = m.inv();
    let pair = |a: &GridField, b: &GridField| -> GridField {
        // tr(w^{-1} a^dagger w b), pointwise
        winv.matmul(&a.adjoint().matmul(&m.w.matmul(b))).trace()
    };
    let mut acc = GridField::zeros(f.points, 1);
    let irange = if f.p == 1 { n } else { 1 };
    let jrange = if f.q == 1 { n } else { 1 };
    for i1 in 0..irange {
        for i2 in 0..irange {
            // holomorphic index pairs with ginv[i2 * n + i1] = g^{i1 bar-i2}
            let gi = if f.p == 1 {
                ginv[i2 * n + i1]
            } else {
                C64::new(1.0, 0.0)
            };
            for j1 in 0..jrange {
                for j2 in 0..jrange {
                    let gj = if f.q == 1 {
                        ginv[j1 * n + j2]
                    } else {
                        C64::new(1.0, 0.0)
                    };
                    let t = pair(f.comp(i1, j1), f.comp(i2, j2));
                    acc.axpy(gi * gj, &t);
                }
            }
        }
    }
    // Hermitian contraction: drop round-off imaginary parts.
    for v in acc.data.iter_mut() {
        *v = C64::new(v.re, 0.0);
    }
    acc
}

pub fn sup_h_norm(bg: &Background, f: &EndForm, m: &Metric) -> f64 {
    pointwise_h_norm_sq(bg, f, m)
        .data
        .iter()
        .fold(0.0_f64, |a, v| a.max(v.re.max(0.0)))
        .sqrt()
}

/// L2 norm with respect to the volume form.
pub fn l2_h_norm(bg: &Background, f: &EndForm, m: &Metric) -> f64 {
    let sq = pointwise_h_norm_sq(bg, f, m);
    let mean = sq.scalar_mean().re.max(0.0);
    (mean * crate::geometry::calculus::volume(bg)).sqrt()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::calculus::{contract_top, integrate_scalar};
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;
    use std::f64::consts::PI;

    fn small_bg() -> Background {
        Background::new(2, 16, 2, 1).unwrap()
    }

    #[test]
    fn background_curvature_is_central() {
        let bg = small_bg();
        let m = Metric::background(&bg);
        let f = i_curvature(&bg, &m);
        // iF = pi m omega Id: component (a,a) = i * pi m
        for a in 0..bg.n {
            for b in 0..bg.n {
                let want = if a == b { C64::new(0.0, PI) } else { C64::new(0.0, 0.0) };
                let got = f.comp(a, b);
                let diff = got.sub(&GridField::identity(bg.points(), 2).scale(want));
                assert!(diff.sup_frobenius() < 1e-12);
            }
        }
    }

    #[test]
    fn scalar_curvature_matches_dbar_del_log() {
        // rank-1 twist: F = F0 + dbar del log w, exactly
        let bg = Background::new(2, 16, 1, 1).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let s = random_hermitian_field(&bg, 1, &mut rng, 2, 0.2);
        let m = Metric::from_generator(&s).unwrap();
        let f = curvature(&bg, &m);
        let want = background_curvature(&bg, bg.points())
            .add(&dbar(&bg, &del(&bg, &EndForm::from_field(bg.n, s))));
        let diff = f.sub(&want).sup_norm();
        assert!(diff < 1e-9 * f.sup_norm().max(1.0), "diff={diff}");
    }

    #[test]
    fn curvature_is_h_hermitian() {
        // (F_{a bar b})^dagger = w F_{b bar a} w^{-1}
        let bg = small_bg();
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let m = Metric::random(&bg, &mut rng, 2, 0.15).unwrap();
        let f = curvature(&bg, &m);
        let winv = m.inv();
        let scale = f.sup_norm();
        for a in 0..bg.n {
            for b in 0..bg.n {
                let lhs = f.comp(a, b).adjoint();
                let rhs = m.w.matmul(f.comp(b, a)).matmul(&winv);
                assert!(lhs.sub(&rhs).sup_frobenius() < 1e-9 * scale);
            }
        }
    }

    #[test]
    fn chern_weil_degree_invariance() {
        // integral of tr(iF) wedge omega/(1)! is metric independent
        let bg = small_bg();
        let m0 = Metric::background(&bg);
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let m1 = Metric::random(&bg, &mut rng, 2, 0.15).unwrap();
        let d0 = contract_top(&bg, &i_curvature(&bg, &m0), 1).unwrap().trace();
        let d1 = contract_top(&bg, &i_curvature(&bg, &m1), 1).unwrap().trace();
        let v0 = integrate_scalar(&bg, &d0);
        let v1 = integrate_scalar(&bg, &d1);
        assert!((v0 - v1).norm() < 1e-8 * v0.norm().max(1.0));
        // r * pi m * n * vol = 2 * pi * 2 * 4
        let want = 16.0 * PI;
        assert!((v0.re - want).abs() < 1e-9 * want);
    }

    #[test]
    fn geodesic_endpoints_and_log() {
        let bg = Background::new(2, 8, 2, 1).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let a = Metric::random(&bg, &mut rng, 2, 0.4).unwrap();
        let b = Metric::random(&bg, &mut rng, 2, 0.4).unwrap();
        let g0 = geodesic(&a, &b, 0.0).unwrap();
        let g1 = geodesic(&a, &b, 1.0).unwrap();
        assert!(g0.w.sub(&a.w).sup_frobenius() < 1e-12);
        assert!(g1.w.sub(&b.w).sup_frobenius() < 1e-11);
        // w_a exp(s) = w_b
        let s = log_map(&a, &b).unwrap();
        // exp via similarity: w_a e^s = a.sqrt * exp(a.inv_sqrt s a.sqrt ... ) — instead
        // verify the differential identity at midpoints: g(t) = w_a e^{t s}
        let t = 0.37;
        let gt = geodesic(&a, &b, t).unwrap();
        let half = a.sqrt();
        let inv_half = a.inv_sqrt();
        let mut sim = half.matmul(&s).matmul(&inv_half);
        sim.hermitize();
        let e = sim.scale(C64::new(t, 0.0)).herm_map(f64::NEG_INFINITY, f64::exp).unwrap();
        let direct = a.w.matmul(&inv_half.matmul(&e).matmul(&half));
        assert!(gt.w.sub(&direct).sup_frobenius() < 1e-10);
    }

    #[test]
    fn h_norm_reduces_to_frobenius_at_identity() {
        let bg = Background::new(2, 8, 2, 0).unwrap();
        let m = Metric::background(&bg);
        let mut f = GridField::zeros(bg.points(), 2);
        for p in 0..bg.points() {
            f.at_mut(p)[1] = C64::new(1.0, 2.0);
        }
        let form = EndForm::from_field(bg.n, f);
        let sq = pointwise_h_norm_sq(&bg, &form, &m);
        assert!((sq.data[0].re - 5.0).abs() < 1e-13);
        assert!((sup_h_norm(&bg, &form, &m) - 5.0_f64.sqrt()).abs() < 1e-13);
    }

    #[test]
    fn deformation_matches_derivative() {
        let bg = Background::new(2, 8, 2, 1).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        let m = Metric::random(&bg, &mut rng, 2, 0.3).unwrap();
        let s0 = random_hermitian_field(&bg, 2, &mut rng, 2, 0.5);
        let eps = 1e-5;
        let plus = m.deformed(&s0, eps).unwrap();
        let minus = m.deformed(&s0, -eps).unwrap();
        let fd = plus.w.sub(&minus.w).scale(C64::new(0.5 / eps, 0.0));
        let v = m.w.matmul(&m.deformation_velocity(&s0));
        assert!(fd.sub(&v).sup_frobenius() < 1e-6);
    }
}
