//! Gradient flow descending the energy functional to a solution of
//! Psi_k(H) = lambda Id. Steps are exponential-Euler (the metric stays
//! positive by construction), accepted only when the functional decreases.

use crate::bundle::{Metric, METRIC_FLOOR};
use crate::error::{HblError, Result};
use crate::functional::{donaldson_m, gauss_legendre, lambda_k, psi_k, PathSpec};
use crate::geometry::background::Background;
use crate::geometry::calculus::integrate_scalar;
use crate::geometry::grid::GridField;
use crate::hessian::{cone_report, residual, sym_h, ConeKind};
use crate::linalg::C64;

#[derive(Clone, Debug)]
pub struct SolveConfig {
    pub k: usize,
    pub max_iters: usize,
    /// stop when the sup H-norm of the residual falls below this
    pub tol_residual_sup: f64,
    pub dt_min: f64,
    /// evaluate the sigma_k cone margin every this many accepted steps
    /// (0 disables the check)
    pub cone_check_interval: usize,
    /// quadrature order for the per-step functional increment
    pub segment_quad: usize,
}

impl Default for SolveConfig {
    fn default() -> Self {
        SolveConfig {
            k: 2,
            max_iters: 5000,
            tol_residual_sup: 1e-6,
            dt_min: 1e-12,
            cone_check_interval: 50,
            segment_quad: 3,
        }
    }
}

#[derive(Clone, Debug)]
pub struct FlowState {
    pub h: Metric,
    pub iter: usize,
    pub m_value: f64,
    pub residual_sup: f64,
    pub residual_l2: f64,
    pub dt: f64,
    pub cone_margin: f64,
    pub monotone_ok: bool,
}

#[derive(Clone, Debug)]
pub struct TraceRow {
    pub iter: usize,
    pub dt: f64,
    pub m_value: f64,
    pub residual_sup: f64,
    pub residual_l2: f64,
    pub cone_margin: f64,
}

#[derive(Clone, Debug)]
pub struct SolveReport {
    pub converged: bool,
    pub iters: usize,
    pub trace: Vec<TraceRow>,
    pub final_residual_sup: f64,
    pub final_m: f64,
}

/// Scalar gauge fix: divide out exp(mean tr log w / r) so the flow cannot
/// drift along the flat central direction. Leaves M unchanged.
pub fn recenter(m: &Metric) -> Result<Metric> {
    let lw = m.log();
    let c = lw.trace().scalar_mean().re / m.w.r as f64;
    Metric::new(m.w.scale(C64::new((-c).exp(), 0.0)))
}

/// Functional increment M(H, H e^{-dt nu}) along the geodesic segment, by
/// short Gauss-Legendre quadrature; the cocycle identity makes the sum of
/// increments track M(H0, H_final).
fn segment_m(
    bg: &Background,
    h: &Metric,
    nu: &GridField,
    dt: f64,
    k: usize,
    quad: &[(f64, f64)],
    lambda: f64,
) -> Result<(Metric, f64)> {
    let half = h.sqrt();
    let inv_half = h.inv_sqrt();
    let mut b = half.matmul(&nu.matmul(&inv_half));
    b.hermitize();
    let step = |t: f64| -> Result<Metric> {
        let e = b
            .scale(C64::new(-dt * t, 0.0))
            .herm_map(f64::NEG_INFINITY, f64::exp)?;
        Metric::new(half.matmul(&e).matmul(&half))
    };
    // velocity field h^{-1} dh/dt is the constant -dt * nu
    let mut m0 = 0.0;
    for &(t, w) in quad {
        let mt = step(t)?;
        let psi = psi_k(bg, &mt, k)?;
        m0 += w * integrate_scalar(bg, &psi.matmul(nu).trace()).re;
    }
    m0 *= -dt;
    let logdet = -dt * lambda * integrate_scalar(bg, &nu.trace()).re;
    Ok((step(1.0)?, m0 - logdet))
}

/// One accepted flow step with monotone backtracking on dt.
pub fn flow_step(bg: &Background, state: &FlowState, cfg: &SolveConfig) -> Result<FlowState> {
    let lambda = lambda_k(bg, cfg.k)?;
    let quad = gauss_legendre(cfg.segment_quad);
    let (res, sup, _l2) = residual(bg, &state.h, cfg.k)?;
    if sup < cfg.tol_residual_sup {
        let mut s = state.clone();
        s.residual_sup = sup;
        return Ok(s);
    }
    let nu = sym_h(&res, &state.h);
    let mut dt = state.dt;
    loop {
        if dt < cfg.dt_min {
            return Err(HblError::Stall(format!(
                "dt underflow at iter {} (residual sup {sup:.3e})",
                state.iter
            )));
        }
        let (next, dm) = segment_m(bg, &state.h, &nu, dt, cfg.k, &quad, lambda)?;
        if dm < 0.0 {
            let next = recenter(&next)?;
            let (_, nsup, nl2) = residual(bg, &next, cfg.k)?;
            return Ok(FlowState {
                h: next,
                iter: state.iter + 1,
                m_value: state.m_value + dm,
                residual_sup: nsup,
                residual_l2: nl2,
                dt: dt * 1.25,
                cone_margin: state.cone_margin,
                monotone_ok: true,
            });
        }
        dt /= 2.0;
    }
}

/// Full descent loop; h0 is the reference metric of the functional.
pub fn solve(
    bg: &Background,
    h0: &Metric,
    start: &Metric,
    cfg: &SolveConfig,
) -> Result<(Metric, SolveReport)> {
    if cfg.k < 1 || cfg.k > bg.n {
        return Err(HblError::Config(format!("k={} out of range", cfg.k)));
    }
    let init = recenter(start)?;
    let (_, sup0, l2_0) = residual(bg, &init, cfg.k)?;
    let m_init = donaldson_m(bg, h0, &init, cfg.k, &PathSpec::geodesic(8))?.m;
    let mut state = FlowState {
        h: init,
        iter: 0,
        m_value: m_init,
        residual_sup: sup0,
        residual_l2: l2_0,
        dt: if sup0 > 0.0 { 0.1 / sup0 } else { 0.1 },
        cone_margin: f64::NAN,
        monotone_ok: true,
    };
    let mut trace = Vec::new();
    let mut push = |s: &FlowState| {
        trace.push(TraceRow {
            iter: s.iter,
            dt: s.dt,
            m_value: s.m_value,
            residual_sup: s.residual_sup,
            residual_l2: s.residual_l2,
            cone_margin: s.cone_margin,
        })
    };
    if cfg.cone_check_interval > 0 {
        state.cone_margin = cone_report(bg, &state.h, ConeKind::SigmaK(cfg.k), None)?.min_eig;
    }
    push(&state);
    let mut converged = state.residual_sup < cfg.tol_residual_sup;
    while !converged && state.iter < cfg.max_iters {
        let prev_m = state.m_value;
        state = flow_step(bg, &state, cfg)?;
        debug_assert!(state.m_value <= prev_m);
        if cfg.cone_check_interval > 0 && state.iter % cfg.cone_check_interval == 0 {
            state.cone_margin =
                cone_report(bg, &state.h, ConeKind::SigmaK(cfg.k), None)?.min_eig;
        }
        push(&state);
        converged = state.residual_sup < cfg.tol_residual_sup;
    }
    let report = SolveReport {
        converged,
        iters: state.iter,
        final_residual_sup: state.residual_sup,
        final_m: state.m_value,
        trace,
    };
    Ok((recenter(&state.h)?, report))
}

/// Sup distance between metrics after scalar gauge fixing; the uniqueness
/// witness compares solver endpoints with this.
pub fn gauge_distance(a: &Metric, b: &Metric) -> Result<f64> {
    let ra = recenter(a)?;
    let rb = recenter(b)?;
    Ok(ra.w.sub(&rb.w).sup_frobenius())
}

#[derive(Clone, Debug)]
pub struct LocalMinReport {
    pub trials: usize,
    pub eps: f64,
    pub min_diff: f64,
    pub max_diff: f64,
    pub nonpositive_noncentral: usize,
    pub diffs: Vec<f64>,
}

/// Theorem-level local-minimality witness: random H-tilde = H e^{eps s}
/// must not beat the solved metric, M(H0, H-tilde) >= M(H0, H) up to
/// round-off. By the cocycle identity the difference is M(H, H-tilde).
pub fn local_min_experiment(
    bg: &Background,
    h_solved: &Metric,
    k: usize,
    eps: f64,
    trials: usize,
    rng: &mut impl rand::Rng,
) -> Result<LocalMinReport> {
    let path = PathSpec::geodesic(8);
    let mut diffs = Vec::with_capacity(trials);
    let mut bad = 0usize;
    for _ in 0..trials {
        let s0 = crate::bundle::random_hermitian_field(bg, bg.rank, rng, 2, 1.0);
        let tilde = h_solved.deformed(&s0, eps)?;
        let d = donaldson_m(bg, h_solved, &tilde, k, &path)?.m;
        // flat central directions give exactly zero; anything else must pay
        let central = {
            let tr = s0.trace();
            let mean = tr.scalar_mean();
            let mut dev = tr;
            let c = GridField::scalar_constant(dev.points, mean);
            dev = dev.sub(&c);
            dev.sup_frobenius() < 1e-14 * bg.rank as f64
        };
        if !central && d <= 0.0 {
            bad += 1;
        }
        diffs.push(d);
    }
    let min_diff = diffs.iter().cloned().fold(f64::INFINITY, f64::min);
    let max_diff = diffs.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    Ok(LocalMinReport {
        trials,
        eps,
        min_diff,
        max_diff,
        nonpositive_noncentral: bad,
        diffs,
    })
}

/// Keeps metric validation handy for snapshot loads.
pub fn validated(w: GridField) -> Result<Metric> {
    if w.min_eigenvalue() <= METRIC_FLOOR {
        return Err(HblError::DegenerateMetric("loaded metric not PD".into()));
    }
    Metric::new(w)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bundle::random_hermitian_field;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn fixed_point_stays_put() {
        let bg = Background::new(2, 8, 2, 1).unwrap();
        let h0 = Metric::background(&bg);
        let cfg = SolveConfig { k: 2, max_iters: 10, ..Default::default() };
        let (m, rep) = solve(&bg, &h0, &h0, &cfg).unwrap();
        assert!(rep.converged);
        assert_eq!(rep.iters, 0);
        assert!(m.w.sub(&h0.w).sup_frobenius() < 1e-12);
    }

    #[test]
    fn recenter_normalizes_scalar_factor() {
        let bg = Background::new(2, 8, 2, 1).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(41);
        let m = Metric::random(&bg, &mut rng, 2, 0.2).unwrap();
        let scaled = Metric::new(m.w.scale(C64::new(3.0, 0.0))).unwrap();
        assert!(gauge_distance(&m, &scaled).unwrap() < 1e-10);
    }

    #[test]
    fn flow_descends_from_perturbation() {
        let bg = Background::new(2, 8, 2, 1).unwrap();
        let h0 = Metric::background(&bg);
        let mut rng = ChaCha8Rng::seed_from_u64(43);
        let s = random_hermitian_field(&bg, 2, &mut rng, 1, 1.0);
        let start = h0.deformed(&s, 0.1).unwrap();
        let cfg = SolveConfig {
            k: 2,
            max_iters: 400,
            tol_residual_sup: 1e-5,
            cone_check_interval: 0,
            ..Default::default()
        };
        let (sol, rep) = solve(&bg, &h0, &start, &cfg).unwrap();
        assert!(rep.converged, "residual {}", rep.final_residual_sup);
        // values monotone
        for w in rep.trace.windows(2) {
            assert!(w[1].m_value <= w[0].m_value + 1e-13);
        }
        // converged to the constant solution up to scalar gauge
        assert!(gauge_distance(&sol, &h0).unwrap() < 1e-4);
    }

    #[test]
    fn local_min_at_background() {
        let bg = Background::new(2, 8, 2, 1).unwrap();
        let h = Metric::background(&bg);
        let mut rng = ChaCha8Rng::seed_from_u64(47);
        let rep = local_min_experiment(&bg, &h, 2, 0.01, 10, &mut rng).unwrap();
        assert!(rep.min_diff >= -1e-10, "min diff {}", rep.min_diff);
        assert_eq!(rep.nonpositive_noncentral, 0);
    }
}
