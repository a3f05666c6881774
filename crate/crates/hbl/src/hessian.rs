//! The k-Hessian operator, equation residual, and pointwise positivity cones
//! assembled as Hermitian quadratic forms over the xi-space.

use crate::bundle::{curvature, l2_h_norm, sup_h_norm, Metric};
use crate::error::{HblError, Result};
use crate::functional::{lambda_k, psi_k};
use crate::geometry::background::Background;
use crate::geometry::calculus::{adjoint_form, contract_top, wedge, wedge_power};
use crate::geometry::form::EndForm;
use crate::geometry::grid::GridField;
use crate::linalg::{self, C64};
use rayon::prelude::*;

pub use crate::functional::psi_k as psi;

/// Equation residual Psi_k(H) - lambda_k Id together with its sup and L2
/// norms in the H-metric on endomorphisms.
pub fn residual(bg: &Background, m: &Metric, k: usize) -> Result<(GridField, f64, f64)> {
    let lambda = lambda_k(bg, k)?;
    let mut res = psi_k(bg, m, k)?;
    let id = GridField::identity(res.points, res.r);
    res.axpy(C64::new(-lambda, 0.0), &id);
    let form = EndForm::from_field(bg.n, res.clone());
    let sup = sup_h_norm(bg, &form, m);
    let l2 = l2_h_norm(bg, &form, m);
    Ok((res, sup, l2))
}

/// H-Hermitian symmetrization (A + A^{*H})/2 with A^{*H} = w^{-1} A^dagger w.
pub fn sym_h(a: &GridField, m: &Metric) -> GridField {
    let star = m.inv().matmul(&a.adjoint().matmul(&m.w));
    a.add(&star).scale(C64::new(0.5, 0.0))
}

#[derive(Clone, Debug)]
pub struct PositivityReport {
    pub cone: String,
    pub sampled_points: usize,
    /// minimum eigenvalue of the quadratic form at each sampled point
    pub per_point_min: Vec<f64>,
    pub min_eig: f64,
    pub argmin_point: usize,
    pub positive: bool,
}

impl PositivityReport {
    fn from_minima(cone: &str, per_point_min: Vec<f64>) -> Self {
        let (argmin, min_eig) = per_point_min
            .iter()
            .enumerate()
            .fold((0usize, f64::INFINITY), |(ai, av), (i, &v)| {
                if v < av { (i, v) } else { (ai, av) }
            });
        PositivityReport {
            cone: cone.to_string(),
            sampled_points: per_point_min.len(),
            per_point_min,
            min_eig,
            argmin_point: argmin,
            positive: min_eig > 0.0,
        }
    }
}

/// xi-space dimension: an End(E)-valued (0,1)-form has n matrix components.
pub fn xi_dim(n: usize, r: usize) -> usize {
    n * r * r
}

fn xi_basis_combo(n: usize, r: usize, points: usize, coeffs: &[(usize, C64)]) -> EndForm {
    let mut xi = EndForm::zero(n, 0, 1, r, points);
    for &(a, c) in coeffs {
        let beta = a / (r * r);
        let ij = a % (r * r);
        let comp = xi.comp_mut(0, beta);
        for p in 0..points {
            comp.at_mut(p)[ij] += c;
        }
    }
    xi
}

/// Which of the one-sided k=2 quadratic forms (or the full sigma_k sum) to
/// assemble.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ConeKind {
    SigmaK(usize),
    Sigma2Left,
    Sigma2Right,
}

impl ConeKind {
    pub fn name(&self) -> String {
        match self {
            ConeKind::SigmaK(k) => format!("sigma_{k}"),
            ConeKind::Sigma2Left => "sigma_2_left".to_string(),
            ConeKind::Sigma2Right => "sigma_2_right".to_string(),
        }
    }
}

/// The quadratic-form density Q(xi) as a real scalar field:
/// [omega^{n-k}/(n-k)! wedge i tr(sum_i (iF)^i xi^{*H} (iF)^{k-1-i} xi)] / [omega^n/n!].
fn q_density(
    bg: &Background,
    i_f: &EndForm,
    m: &Metric,
    m_inv: &GridField,
    xi: &EndForm,
    kind: ConeKind,
) -> Result<GridField> {
    let xi_star = adjoint_form(xi, &m.w, m_inv);
    let (total, k) = match kind {
        ConeKind::SigmaK(k) => {
            let mut acc = EndForm::zero(bg.n, k, k, bg.rank, xi.points);
            for i in 0..k {
                let left = wedge_power(i_f, i);
                let right = wedge_power(i_f, k - 1 - i);
                acc = acc.add(&wedge(&wedge(&wedge(&left, &xi_star), &right), xi));
            }
            (acc, k)
        }
        ConeKind::Sigma2Left => (wedge(&wedge(i_f, &xi_star), xi), 2),
        ConeKind::Sigma2Right => (wedge(&xi_star, &wedge(i_f, xi)), 2),
    };
    let density = contract_top(bg, &total.trace(), bg.n - k)?;
    // overall sqrt(-1) from the definition; the result is real
    let mut out = density.scale(C64::new(0.0, 1.0));
    for v in out.data.iter_mut() {
        *v = C64::new(v.re, 0.0);
    }
    Ok(out)
}

/// Hermitian matrices of the quadratic form at every point of the grid the
/// inputs live on, assembled by polarization over the standard xi basis.
/// Returns row-major d x d matrices, d = n r^2.
pub fn quadratic_form_field(
    bg: &Background,
    i_f: &EndForm,
    m: &Metric,
    kind: ConeKind,
) -> Result<Vec<Vec<C64>>> {
    let n = bg.n;
    let r = bg.rank;
    let d = xi_dim(n, r);
    let points = i_f.points;
    let m_inv = m.inv();
    let one = C64::new(1.0, 0.0);
    let i_unit = C64::new(0.0, 1.0);
    let q = |coeffs: &[(usize, C64)]| -> Result<GridField> {
        let xi = xi_basis_combo(n, r, points, coeffs);
        q_density(bg, i_f, m, &m_inv, &xi, kind)
    };
    let mut diag = Vec::with_capacity(d);
    for a in 0..d {
        diag.push(q(&[(a, one)])?);
    }
    // off-diagonal polarization data
    let mut cross = Vec::new();
    for a in 0..d {
        for b in (a + 1)..d {
            let qp = q(&[(a, one), (b, one)])?;
            let qi = q(&[(a, one), (b, i_unit)])?;
            cross.push((a, b, qp, qi));
        }
    }
    let mats: Vec<Vec<C64>> = (0..points)
        .into_par_iter()
        .map(|p| {
            let mut mat = vec![C64::new(0.0, 0.0); d * d];
            for a in 0..d {
                mat[a * d + a] = diag[a].data[p];
            }
            for (a, b, qp, qi) in &cross {
                let qa = diag[*a].data[p].re;
                let qb = diag[*b].data[p].re;
                let re = (qp.data[p].re - qa - qb) / 2.0;
                let im = (qa + qb - qi.data[p].re) / 2.0;
                // B conjugate-linear in the first slot: entry (a,b) pairs
                // conj(c_a) with c_b
                mat[*a * d + *b] = C64::new(re, im);
                mat[*b * d + *a] = C64::new(re, -im);
            }
            mat
        })
        .collect();
    Ok(mats)
}

fn minima_of(mats: &[Vec<C64>], d: usize) -> Vec<f64> {
    mats.par_iter()
        .map(|m| linalg::min_eigenvalue(m, d))
        .collect()
}

/// sigma_k quadratic form at a single grid point of the metric's curvature.
pub fn sigma_k_form(bg: &Background, m: &Metric, k: usize, point: usize) -> Result<Vec<C64>> {
    let i_f = curvature(bg, m).scale(C64::new(0.0, 1.0));
    let (fp, mp) = restrict_point(bg, &i_f, m, point)?;
    let mats = quadratic_form_field(bg, &fp, &mp, ConeKind::SigmaK(k))?;
    Ok(mats.into_iter().next().unwrap())
}

/// The two one-sided k=2 forms at a single point; the strong verdict needs
/// both positive definite.
pub fn strongly_sigma2_forms(
    bg: &Background,
    m: &Metric,
    point: usize,
) -> Result<(Vec<C64>, Vec<C64>)> {
    let i_f = curvature(bg, m).scale(C64::new(0.0, 1.0));
    let (fp, mp) = restrict_point(bg, &i_f, m, point)?;
    let left = quadratic_form_field(bg, &fp, &mp, ConeKind::Sigma2Left)?;
    let right = quadratic_form_field(bg, &fp, &mp, ConeKind::Sigma2Right)?;
    Ok((
        left.into_iter().next().unwrap(),
        right.into_iter().next().unwrap(),
    ))
}

fn restrict_point(
    bg: &Background,
    i_f: &EndForm,
    m: &Metric,
    point: usize,
) -> Result<(EndForm, Metric)> {
    if point >= i_f.points {
        return Err(HblError::Config(format!("point {point} out of range")));
    }
    let mut fp = EndForm::zero(bg.n, 1, 1, bg.rank, 1);
    for c in 0..i_f.comps.len() {
        fp.comps[c] = GridField::constant(1, bg.rank, i_f.comps[c].at(point));
    }
    let wp = GridField::constant(1, bg.rank, m.w.at(point));
    Ok((fp, Metric::new(wp)?))
}

/// Grid-wide positivity report for one cone. `sample` restricts the point
/// set; None means every grid point.
pub fn cone_report(
    bg: &Background,
    m: &Metric,
    kind: ConeKind,
    sample: Option<&[usize]>,
) -> Result<PositivityReport> {
    let i_f = curvature(bg, m).scale(C64::new(0.0, 1.0));
    let mats = quadratic_form_field(bg, &i_f, m, kind)?;
    let d = xi_dim(bg.n, bg.rank);
    let minima = match sample {
        None => minima_of(&mats, d),
        Some(idx) => idx
            .par_iter()
            .map(|&p| linalg::min_eigenvalue(&mats[p], d))
            .collect(),
    };
    Ok(PositivityReport::from_minima(&kind.name(), minima))
}

/// Margin of the sigma_k cone: global minimum eigenvalue over the grid.
pub fn sigma_k_margin(bg: &Background, m: &Metric, k: usize) -> Result<f64> {
    Ok(cone_report(bg, m, ConeKind::SigmaK(k), None)?.min_eig)
}

// ---------------------------------------------------------------------------
// Nakano / dual-Nakano positivity from pointwise curvature data.
// ---------------------------------------------------------------------------

/// Curvature components of F (not iF) in an H-unitary frame at one point:
/// comps[a * n + b] is the r x r matrix F_{a bar-b}.
pub fn unitary_frame_curvature(
    bg: &Background,
    m: &Metric,
    point: usize,
) -> Result<Vec<Vec<C64>>> {
    let f = curvature(bg, m);
    let half = m.sqrt();
    let inv_half = m.inv_sqrt();
    let n = bg.n;
    let mut out = Vec::with_capacity(n * n);
    for a in 0..n {
        for b in 0..n {
            let t = half.matmul(f.comp(a, b)).matmul(&inv_half);
            out.push(t.at(point).to_vec());
        }
    }
    Ok(out)
}

/// Nakano quadratic form < F_{a bar-b} u^a, u^b > as an (n r) x (n r)
/// Hermitian matrix, row index (b, i), column index (a, j).
pub fn nakano_form(f_comps: &[Vec<C64>], n: usize, r: usize) -> Vec<C64> {
    let d = n * r;
    let mut mat = vec![C64::new(0.0, 0.0); d * d];
    for a in 0..n {
        for b in 0..n {
            let fab = &f_comps[a * n + b];
            for i in 0..r {
                for j in 0..r {
                    mat[(b * r + i) * d + (a * r + j)] = fab[i * r + j];
                }
            }
        }
    }
    mat
}

/// Dual-Nakano form < F_{a bar-b} v^b, v^a >: the partial transpose in the
/// form indices, row (a, i), column (b, j).
pub fn dual_nakano_form(f_comps: &[Vec<C64>], n: usize, r: usize) -> Vec<C64> {
    let d = n * r;
    let mut mat = vec![C64::new(0.0, 0.0); d * d];
    for a in 0..n {
        for b in 0..n {
            let fab = &f_comps[a * n + b];
            for i in 0..r {
                for j in 0..r {
                    mat[(a * r + i) * d + (b * r + j)] = fab[i * r + j];
                }
            }
        }
    }
    mat
}

/// Direct index-sum evaluation of the two one-sided k=2 densities from
/// constant unitary-frame data (identity Kaehler form assumed):
/// left  = sum_{a != b} tr(F_{a bar-a} xi_b^dag xi_b - F_{a bar-b} xi_b^dag xi_a)
/// right = sum_{a != b} tr(xi_a^dag F_{b bar-b} xi_a - xi_a^dag F_{b bar-a} xi_b)
pub fn n1_n3_index_oracle(
    f_comps: &[Vec<C64>],
    xi_comps: &[Vec<C64>],
    n: usize,
    r: usize,
) -> (f64, f64) {
    let tr3 = |a: &[C64], b: &[C64], c: &[C64]| -> C64 {
        let ab = linalg::matmul(a, b, r);
        linalg::trace(&linalg::matmul(&ab, c, r), r)
    };
    let mut left = C64::new(0.0, 0.0);
    let mut right = C64::new(0.0, 0.0);
    for a in 0..n {
        for b in 0..n {
            if a == b {
                continue;
            }
            let xa = &xi_comps[a];
            let xb = &xi_comps[b];
            let xa_d = linalg::adjoint(xa, r);
            let xb_d = linalg::adjoint(xb, r);
            left += tr3(&f_comps[a * n + a], &xb_d, xb) - tr3(&f_comps[a * n + b], &xb_d, xa);
            right += tr3(&xa_d, &f_comps[b * n + b], xa) - tr3(&xa_d, &f_comps[b * n + a], xb);
        }
    }
    (left.re, right.re)
}

/// Evaluates the wedge-pipeline one-sided densities from the same constant
/// unitary-frame data, for oracle comparison. Returns (left, right).
pub fn sigma2_pipeline_from_constant(
    n: usize,
    r: usize,
    f_comps: &[Vec<C64>],
    xi_comps: &[Vec<C64>],
) -> Result<(f64, f64)> {
    let bg = Background::new(n, 8, r, 0)?;
    let mut i_f = EndForm::zero(n, 1, 1, r, 1);
    for a in 0..n {
        for b in 0..n {
            let v: Vec<C64> = f_comps[a * n + b].iter().map(|&x| x * C64::new(0.0, 1.0)).collect();
            *i_f.comp_mut(a, b) = GridField::constant(1, r, &v);
        }
    }
    let mut xi = EndForm::zero(n, 0, 1, r, 1);
    for b in 0..n {
        *xi.comp_mut(0, b) = GridField::constant(1, r, &xi_comps[b]);
    }
    let m = Metric::new(GridField::identity(1, r))?;
    let m_inv = m.inv();
    let l = q_density(&bg, &i_f, &m, &m_inv, &xi, ConeKind::Sigma2Left)?;
    let rr = q_density(&bg, &i_f, &m, &m_inv, &xi, ConeKind::Sigma2Right)?;
    Ok((l.data[0].re, rr.data[0].re))
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;
    use std::f64::consts::PI;

    #[test]
    fn residual_vanishes_at_background() {
        let bg = Background::new(2, 8, 2, 1).unwrap();
        let m = Metric::background(&bg);
        for k in 1..=2 {
            let (_, sup, l2) = residual(&bg, &m, k).unwrap();
            assert!(sup < 1e-10, "k={k}: sup={sup}");
            assert!(l2 < 1e-10, "k={k}: l2={l2}");
        }
    }

    #[test]
    fn residual_trace_integral_vanishes() {
        let bg = Background::new(2, 16, 2, 1).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(13);
        let m = Metric::random(&bg, &mut rng, 2, 0.15).unwrap();
        let (res, _, _) = residual(&bg, &m, 2).unwrap();
        let total = crate::geometry::calculus::integrate_scalar(&bg, &res.trace());
        assert!(total.norm() < 1e-8);
    }

    #[test]
    fn psi_is_h_self_adjoint() {
        let bg = Background::new(2, 16, 2, 1).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(17);
        let m = Metric::random(&bg, &mut rng, 2, 0.15).unwrap();
        let p = psi_k(&bg, &m, 2).unwrap();
        let wp = m.w.matmul(&p);
        let scale = wp.sup_frobenius();
        let asym = wp.sub(&wp.adjoint()).sup_frobenius();
        assert!(asym < 1e-9 * scale, "asym={asym} scale={scale}");
    }

    #[test]
    fn central_sigma2_form_is_two_pi() {
        let bg = Background::new(2, 8, 2, 1).unwrap();
        let m = Metric::background(&bg);
        let mat = sigma_k_form(&bg, &m, 2, 0).unwrap();
        let d = xi_dim(2, 2);
        let (evals, _) = linalg::hermitian_eig(&mat, d);
        for e in evals {
            assert!((e - 2.0 * PI).abs() < 1e-10, "eig={e}");
        }
    }

    #[test]
    fn negative_level_exits_cone() {
        let bg = Background::new(2, 8, 2, -1).unwrap();
        let m = Metric::background(&bg);
        let rep = cone_report(&bg, &m, ConeKind::SigmaK(2), Some(&[0])).unwrap();
        assert!(!rep.positive);
    }

    #[test]
    fn k1_form_is_metric_weighted_norm() {
        // single i=0 term: Q(xi) = |xi|^2-type form, positive for any metric
        let bg = Background::new(2, 8, 2, 1).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(19);
        let m = Metric::random(&bg, &mut rng, 1, 0.3).unwrap();
        let rep = cone_report(&bg, &m, ConeKind::SigmaK(1), Some(&[0, 7, 100])).unwrap();
        assert!(rep.positive, "min={}", rep.min_eig);
    }

    #[test]
    fn one_sided_forms_sum_to_sigma2() {
        let bg = Background::new(2, 8, 2, 1).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(23);
        let m = Metric::random(&bg, &mut rng, 1, 0.25).unwrap();
        let p = 17;
        let full = sigma_k_form(&bg, &m, 2, p).unwrap();
        let (l, r) = strongly_sigma2_forms(&bg, &m, p).unwrap();
        let d = xi_dim(2, 2);
        for i in 0..d * d {
            assert!((full[i] - l[i] - r[i]).norm() < 1e-10);
        }
    }

    #[test]
    fn nakano_identity_model() {
        // iF = omega Id -> stored F_{a bar-b} = delta_ab Id; both forms = Id
        let n = 2;
        let r = 2;
        let mut f_comps = vec![vec![C64::new(0.0, 0.0); r * r]; n * n];
        for a in 0..n {
            f_comps[a * n + a] = linalg::identity(r);
        }
        let nk = nakano_form(&f_comps, n, r);
        let dn = dual_nakano_form(&f_comps, n, r);
        let d = n * r;
        assert!((linalg::min_eigenvalue(&nk, d) - 1.0).abs() < 1e-14);
        assert!((linalg::min_eigenvalue(&dn, d) - 1.0).abs() < 1e-14);
    }

    fn random_curvature_data(
        rng: &mut ChaCha8Rng,
        n: usize,
        r: usize,
    ) -> Vec<Vec<C64>> {
        // Hermitian pairing: F_{b bar-a} = (F_{a bar-b})^dagger
        let mut f = vec![vec![C64::new(0.0, 0.0); r * r]; n * n];
        for a in 0..n {
            for b in a..n {
                let m: Vec<C64> = (0..r * r)
                    .map(|_| C64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)))
                    .collect();
                if a == b {
                    let mut h = m.clone();
                    let ad = linalg::adjoint(&m, r);
                    for i in 0..r * r {
                        h[i] = (h[i] + ad[i]) * 0.5;
                    }
                    f[a * n + a] = h;
                } else {
                    f[b * n + a] = linalg::adjoint(&m, r);
                    f[a * n + b] = m;
                }
            }
        }
        f
    }

    #[test]
    fn index_oracle_matches_wedge_pipeline() {
        let mut rng = ChaCha8Rng::seed_from_u64(29);
        for _ in 0..20 {
            let (n, r) = (2, 2);
            let f = random_curvature_data(&mut rng, n, r);
            let xi: Vec<Vec<C64>> = (0..n)
                .map(|_| {
                    (0..r * r)
                        .map(|_| C64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)))
                        .collect()
                })
                .collect();
            let (l_o, r_o) = n1_n3_index_oracle(&f, &xi, n, r);
            let (l_p, r_p) = sigma2_pipeline_from_constant(n, r, &f, &xi).unwrap();
            assert!((l_o - l_p).abs() < 1e-12, "{l_o} vs {l_p}");
            assert!((r_o - r_p).abs() < 1e-12, "{r_o} vs {r_p}");
        }
    }

    #[test]
    fn zero_xi_gives_zero() {
        let n = 2;
        let r = 2;
        let mut rng = ChaCha8Rng::seed_from_u64(31);
        let f = random_curvature_data(&mut rng, n, r);
        let xi = vec![vec![C64::new(0.0, 0.0); r * r]; n];
        let (a, b) = n1_n3_index_oracle(&f, &xi, n, r);
        assert_eq!(a, 0.0);
        assert_eq!(b, 0.0);
    }
}
