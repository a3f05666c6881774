//! The generalized energy functional: topological constants, degrees and
//! slopes of split models, path-quadrature evaluation and its variations.

use crate::bundle::{
    connection_form, curvature, geodesic, log_map, Metric,
};
use crate::error::{HblError, Result};
use crate::geometry::background::Background;
use crate::geometry::calculus::{
    contract_top, dbar, integrate_scalar, kahler_form, volume, wedge, wedge_power,
};
use crate::geometry::form::EndForm;
use crate::geometry::grid::GridField;
use crate::linalg::C64;

#[derive(Clone, Debug)]
pub enum PathKind {
    /// h(s) = (1-s) h0 + s h1, pointwise convex combination.
    Linear,
    /// h(s) = h0 exp(s log(h0^{-1} h1)).
    Geodesic,
    /// Piecewise geodesic through interior waypoint metrics.
    Waypoints(Vec<Metric>),
}

#[derive(Clone, Debug)]
pub struct PathSpec {
    pub kind: PathKind,
    pub quad_order: usize,
}

impl PathSpec {
    pub fn geodesic(quad_order: usize) -> Self {
        PathSpec { kind: PathKind::Geodesic, quad_order }
    }
    pub fn linear(quad_order: usize) -> Self {
        PathSpec { kind: PathKind::Linear, quad_order }
    }
    pub fn validate(&self) -> Result<()> {
        if self.quad_order < 2 {
            return Err(HblError::Config("quadrature order must be >= 2".into()));
        }
        Ok(())
    }
    pub fn kind_name(&self) -> &'static str {
        match self.kind {
            PathKind::Linear => "linear",
            PathKind::Geodesic => "geodesic",
            PathKind::Waypoints(_) => "waypoints",
        }
    }
}

#[derive(Clone, Debug)]
pub struct FunctionalReport {
    pub k: usize,
    pub path_kind: String,
    pub quad_order: usize,
    pub m0: f64,
    pub logdet_term: f64,
    pub m: f64,
    pub lambda: f64,
}

/// Gauss-Legendre nodes and weights on [0,1], by Newton iteration on the
/// Legendre polynomial.
pub fn gauss_legendre(q: usize) -> Vec<(f64, f64)> {
    assert!(q >= 1);
    let mut out = Vec::with_capacity(q);
    let nf = q as f64;
    for i in 0..q {
        // Chebyshev-like initial guess on [-1,1]
        let mut x = (std::f64::consts::PI * (i as f64 + 0.75) / (nf + 0.5)).cos();
        for _ in 0..100 {
            // p = P_q(x), dp = P_q'(x)
            let (mut p0, mut p1) = (1.0_f64, x);
            for j in 2..=q {
                let jf = j as f64;
                let p2 = ((2.0 * jf - 1.0) * x * p1 - (jf - 1.0) * p0) / jf;
                p0 = p1;
                p1 = p2;
            }
            let dp = nf * (x * p1 - p0) / (x * x - 1.0);
            let dx = p1 / dp;
            x -= dx;
            if dx.abs() < 1e-15 {
                break;
            }
        }
        // weight on [-1,1]: 2 / ((1-x^2) P_q'(x)^2)
        let (mut p0, mut p1) = (1.0_f64, x);
        for j in 2..=q {
            let jf = j as f64;
            let p2 = ((2.0 * jf - 1.0) * x * p1 - (jf - 1.0) * p0) / jf;
            p0 = p1;
            p1 = p2;
        }
        let dp = nf * (x * p1 - p0) / (x * x - 1.0);
        let w = 2.0 / ((1.0 - x * x) * dp * dp);
        // map to [0,1], nodes come out descending; order fixed below
        out.push(((1.0 - x) / 2.0, w / 2.0));
    }
    out.sort_by(|a, b| a.0.partial_cmp(&b.0).unwrap());
    out
}

/// Psi_k(H) = [(iF_H)^k wedge omega^{n-k}/(n-k)!] / [omega^n/n!].
pub fn psi_k(bg: &Background, m: &Metric, k: usize) -> Result<GridField> {
    if k < 1 || k > bg.n {
        return Err(HblError::Config(format!("k={k} out of range 1..=n")));
    }
    let i_f = curvature(bg, m).scale(C64::new(0.0, 1.0));
    contract_top(bg, &wedge_power(&i_f, k), bg.n - k)
}

/// Topological constant lambda_{E,k}; computed through Chern-Weil on the
/// constant background so it is exact up to round-off.
pub fn lambda_k(bg: &Background, k: usize) -> Result<f64> {
    if k < 1 || k > bg.n {
        return Err(HblError::Config(format!("k={k} out of range 1..=n")));
    }
    // constant central curvature on a 1-point grid
    let c = std::f64::consts::PI * bg.level as f64;
    let i_f = kahler_form(bg, 1).scale(C64::new(c, 0.0));
    let psi = contract_top(bg, &wedge_power(&i_f, k), bg.n - k)?;
    Ok(psi.data[0].re)
}

/// Chern-Weil lambda from an arbitrary metric: the integral
/// tr(Psi_k) omega^n/n! divided by rank * vol. Metric-independence of this
/// value is one of the certified identities.
pub fn lambda_k_from_metric(bg: &Background, m: &Metric, k: usize) -> Result<f64> {
    let psi = psi_k(bg, m, k)?;
    let total = integrate_scalar(bg, &psi.trace()).re;
    Ok(total / (bg.rank as f64 * volume(bg)))
}

/// k-omega-degree and slope of a sub-sum of line factors of the split model
/// with the given twist levels. The slope is normalized by rank * vol so it
/// matches the lambda pipeline on the sub-bundle.
pub fn deg_slope(bg: &Background, levels: &[i64], sub: &[usize], k: usize) -> Result<(f64, f64)> {
    if sub.is_empty() {
        return Err(HblError::Config("empty line-factor subset".into()));
    }
    if k < 1 || k > bg.n {
        return Err(HblError::Config(format!("k={k} out of range 1..=n")));
    }
    let vol = volume(bg);
    let mut degree = 0.0;
    for &i in sub {
        let mi = *levels
            .get(i)
            .ok_or_else(|| HblError::Config(format!("line factor {i} out of range")))?;
        let c = std::f64::consts::PI * mi as f64;
        let i_f = kahler_form(bg, 1).scale(C64::new(c, 0.0));
        let psi = contract_top(bg, &wedge_power(&i_f, k), bg.n - k)?;
        degree += psi.data[0].re * vol;
    }
    let slope = degree / (sub.len() as f64 * vol);
    Ok((degree, slope))
}

/// Stability comparison of every proper sub-sum against the whole split
/// model: returns (subset, slope, slope - total_slope).
pub fn split_slopes(
    bg: &Background,
    levels: &[i64],
    k: usize,
) -> Result<Vec<(Vec<usize>, f64, f64)>> {
    let all: Vec<usize> = (0..levels.len()).collect();
    let (_, total) = deg_slope(bg, levels, &all, k)?;
    let mut out = Vec::new();
    for mask in 1u32..(1 << levels.len()) - 1 {
        let sub: Vec<usize> = (0..levels.len()).filter(|i| mask & (1 << i) != 0).collect();
        let (_, s) = deg_slope(bg, levels, &sub, k)?;
        out.push((sub, s, s - total));
    }
    Ok(out)
}

/// One quadrature node of the path integral:
/// integral of tr(Psi_k(H(s)) v) omega^n/n! with v = h^{-1} dh/ds.
fn node_value(bg: &Background, m: &Metric, v: &GridField, k: usize) -> Result<f64> {
    let psi = psi_k(bg, m, k)?;
    Ok(integrate_scalar(bg, &psi.matmul(v).trace()).re)
}

fn m0_segment_geodesic(
    bg: &Background,
    a: &Metric,
    b: &Metric,
    k: usize,
    quad: &[(f64, f64)],
) -> Result<f64> {
    // along w_a e^{ts} the velocity h^{-1} dh/dt is the constant field s
    let s = log_map(a, b)?;
    let mut acc = 0.0;
    for &(t, w) in quad {
        let mt = geodesic(a, b, t)?;
        acc += w * node_value(bg, &mt, &s, k)?;
    }
    Ok(acc)
}

fn m0_linear(
    bg: &Background,
    a: &Metric,
    b: &Metric,
    k: usize,
    quad: &[(f64, f64)],
) -> Result<f64> {
    let diff = b.w.sub(&a.w);
    let mut acc = 0.0;
    for &(t, w) in quad {
        let mut wt = a.w.scale(C64::new(1.0 - t, 0.0));
        wt.axpy(C64::new(t, 0.0), &b.w);
        let mt = Metric::new(wt)?;
        let v = mt.inv().matmul(&diff);
        acc += w * node_value(bg, &mt, &v, k)?;
    }
    Ok(acc)
}

/// The generalized energy functional M(H0, H) for exponent k along the
/// requested path. M = M0 - lambda * integral of log det(h0^{-1} h1).
pub fn donaldson_m(
    bg: &Background,
    h0: &Metric,
    h1: &Metric,
    k: usize,
    path: &PathSpec,
) -> Result<FunctionalReport> {
    path.validate()?;
    let quad = gauss_legendre(path.quad_order);
    let m0 = match &path.kind {
        PathKind::Linear => m0_linear(bg, h0, h1, k, &quad)?,
        PathKind::Geodesic => m0_segment_geodesic(bg, h0, h1, k, &quad)?,
        PathKind::Waypoints(ws) => {
            let mut acc = 0.0;
            let mut prev = h0.clone();
            for w in ws {
                acc += m0_segment_geodesic(bg, &prev, w, k, &quad)?;
                prev = w.clone();
            }
            acc + m0_segment_geodesic(bg, &prev, h1, k, &quad)?
        }
    };
    let lambda = lambda_k(bg, k)?;
    // log det(h0^{-1} h1) = tr log_map, telescoping over any waypoint chain
    let s = log_map(h0, h1)?;
    let logdet_term = lambda * integrate_scalar(bg, &s.trace()).re;
    Ok(FunctionalReport {
        k,
        path_kind: path.kind_name().to_string(),
        quad_order: path.quad_order,
        m0,
        logdet_term,
        m: m0 - logdet_term,
        lambda,
    })
}

/// First variation: dM/dt = integral of tr[(Psi_k - lambda Id) v] omega^n/n!
/// for the velocity v = h^{-1} dh/dt (an H-Hermitian endomorphism field).
pub fn first_variation(bg: &Background, m: &Metric, v: &GridField, k: usize) -> Result<f64> {
    let lambda = lambda_k(bg, k)?;
    let mut res = psi_k(bg, m, k)?;
    let id = GridField::identity(res.points, res.r);
    res.axpy(C64::new(-lambda, 0.0), &id);
    Ok(integrate_scalar(bg, &res.matmul(v).trace()).re)
}

/// Second variation of t -> M(H0, H(t)) along the geodesic H(t) = H e^{ts}:
/// integral of omega^{n-k}/(n-k)! wedge
/// tr[sum_i (iF)^i wedge i D's wedge (iF)^{k-1-i} wedge dbar s].
pub fn second_variation_geodesic(
    bg: &Background,
    h: &Metric,
    kk: &Metric,
    k: usize,
    t: f64,
) -> Result<f64> {
    let s = log_map(h, kk)?;
    let mt = geodesic(h, kk, t)?;
    let i_f = curvature(bg, &mt).scale(C64::new(0.0, 1.0));
    let theta = connection_form(bg, &mt);
    let s_form = EndForm::from_field(bg.n, s);
    let i_del_s = crate::bundle::chern_del(bg, &theta, &s_form).scale(C64::new(0.0, 1.0));
    let dbar_s = dbar(bg, &s_form);
    let mut total = EndForm::zero(bg.n, k, k, bg.rank, bg.points());
    for i in 0..k {
        let left = wedge_power(&i_f, i);
        let right = wedge_power(&i_f, k - 1 - i);
        let term = wedge(&wedge(&wedge(&left, &i_del_s), &right), &dbar_s);
        total = total.add(&term);
    }
    let density = contract_top(bg, &total, bg.n - k)?;
    Ok(integrate_scalar(bg, &density.trace()).re)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bundle::random_hermitian_field;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;
    use std::f64::consts::PI;

    #[test]
    fn gauss_legendre_integrates_polynomials() {
        let q = gauss_legendre(8);
        assert!((q.iter().map(|&(_, w)| w).sum::<f64>() - 1.0).abs() < 1e-14);
        // exact for degree <= 15: check x^10 on [0,1] = 1/11
        let v: f64 = q.iter().map(|&(x, w)| w * x.powi(10)).sum();
        assert!((v - 1.0 / 11.0).abs() < 1e-14);
    }

    #[test]
    fn lambda_values_at_central_model() {
        let bg = Background::new(2, 8, 2, 1).unwrap();
        assert!((lambda_k(&bg, 1).unwrap() - 2.0 * PI).abs() < 1e-12);
        assert!((lambda_k(&bg, 2).unwrap() - 2.0 * PI * PI).abs() < 1e-11);
        let bg0 = Background::new(2, 8, 2, 0).unwrap();
        assert!(lambda_k(&bg0, 1).unwrap().abs() < 1e-15);
        assert!(lambda_k(&bg0, 2).unwrap().abs() < 1e-15);
    }

    #[test]
    fn lambda_is_metric_independent() {
        let bg = Background::new(2, 16, 2, 1).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(21);
        let m = Metric::random(&bg, &mut rng, 2, 0.15).unwrap();
        for k in 1..=2 {
            let a = lambda_k(&bg, k).unwrap();
            let b = lambda_k_from_metric(&bg, &m, k).unwrap();
            assert!((a - b).abs() < 1e-9 * a.abs().max(1.0), "k={k}: {a} vs {b}");
        }
    }

    #[test]
    fn slopes_of_split_models() {
        let bg = Background::new(2, 8, 2, 1).unwrap();
        let (_, s1) = deg_slope(&bg, &[1, 2], &[0], 1).unwrap();
        let (_, s2) = deg_slope(&bg, &[1, 2], &[1], 1).unwrap();
        assert!((s1 - 2.0 * PI).abs() < 1e-12);
        assert!((s2 - 4.0 * PI).abs() < 1e-12);
        // identical factors: all slopes equal
        let rows = split_slopes(&bg, &[1, 1], 1).unwrap();
        for (_, _, gap) in rows {
            assert!(gap.abs() < 1e-12);
        }
    }

    #[test]
    fn m_vanishes_on_scalar_rescale() {
        let bg = Background::new(2, 8, 2, 1).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let h = Metric::random(&bg, &mut rng, 2, 0.15).unwrap();
        for a in [0.5, 2.0] {
            let ah = Metric::new(h.w.scale(C64::new(a, 0.0))).unwrap();
            for k in 1..=2 {
                let rep = donaldson_m(&bg, &h, &ah, k, &PathSpec::geodesic(8)).unwrap();
                assert!(rep.m.abs() < 1e-10, "k={k} a={a}: M={}", rep.m);
            }
        }
    }

    #[test]
    fn path_independence_linear_vs_geodesic() {
        let bg = Background::new(2, 16, 2, 1).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let h0 = Metric::random(&bg, &mut rng, 2, 0.12).unwrap();
        let h1 = Metric::random(&bg, &mut rng, 2, 0.12).unwrap();
        for k in 1..=2 {
            let a = donaldson_m(&bg, &h0, &h1, k, &PathSpec::geodesic(12)).unwrap();
            let b = donaldson_m(&bg, &h0, &h1, k, &PathSpec::linear(12)).unwrap();
            let scale = a.m.abs().max(1.0);
            assert!((a.m - b.m).abs() < 1e-8 * scale, "k={k}: {} vs {}", a.m, b.m);
        }
    }

    #[test]
    fn first_variation_matches_finite_difference() {
        let bg = Background::new(2, 16, 2, 1).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(6);
        let h = Metric::random(&bg, &mut rng, 2, 0.12).unwrap();
        let s0 = random_hermitian_field(&bg, 2, &mut rng, 2, 0.1);
        let v = h.deformation_velocity(&s0);
        let k = 2;
        let analytic = first_variation(&bg, &h, &v, k).unwrap();
        let eps = 1e-4;
        let h0 = Metric::background(&bg);
        let path = PathSpec::geodesic(8);
        let mp = donaldson_m(&bg, &h0, &h.deformed(&s0, eps).unwrap(), k, &path).unwrap();
        let mm = donaldson_m(&bg, &h0, &h.deformed(&s0, -eps).unwrap(), k, &path).unwrap();
        let fd = (mp.m - mm.m) / (2.0 * eps);
        assert!(
            (analytic - fd).abs() < 1e-6 * analytic.abs().max(1.0),
            "analytic={analytic} fd={fd}"
        );
    }

    #[test]
    fn second_variation_matches_finite_difference() {
        let bg = Background::new(2, 16, 2, 1).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(8);
        let h = Metric::random(&bg, &mut rng, 2, 0.1).unwrap();
        let kk = Metric::random(&bg, &mut rng, 2, 0.1).unwrap();
        let h0 = Metric::background(&bg);
        let k = 2;
        let t = 0.5;
        let analytic = second_variation_geodesic(&bg, &h, &kk, k, t).unwrap();
        let eps = 1e-3;
        let path = PathSpec::geodesic(8);
        let mval = |tt: f64| {
            let mt = geodesic(&h, &kk, tt).unwrap();
            donaldson_m(&bg, &h0, &mt, k, &path).unwrap().m
        };
        let fd = (mval(t + eps) - 2.0 * mval(t) + mval(t - eps)) / (eps * eps);
        assert!(
            (analytic - fd).abs() < 1e-5 * analytic.abs().max(1.0),
            "analytic={analytic} fd={fd}"
        );
    }
}
