//! Executable certification of the identities behind the library: exterior
//! calculus oracles, functional identities, the geodesic derivative bound,
//! curvature difference identities, positivity lemmas and the local-minimum
//! experiment.

use crate::bundle::{
    chern_del, connection_form, curvature, geodesic, log_map, pointwise_h_norm_sq,
    random_hermitian_field, Metric,
};
use crate::error::{HblError, Result};
use crate::functional::{
    donaldson_m, first_variation, gauss_legendre, lambda_k, lambda_k_from_metric, psi_k,
    second_variation_geodesic, deg_slope, PathKind, PathSpec,
};
use crate::geometry::background::Background;
use crate::geometry::calculus::{
    contract_top, dbar, del, integrate, integrate_scalar, volume, wedge, wedge_power,
};
use crate::geometry::form::{index_sets, EndForm};
use crate::geometry::grid::GridField;
use crate::geometry::spectral::field_from_fn;
use crate::hessian::{
    dual_nakano_form, n1_n3_index_oracle, nakano_form, sigma2_pipeline_from_constant,
};
use crate::linalg::{self, C64};
use crate::solver::local_min_experiment;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

#[derive(Clone, Debug, Serialize)]
pub struct Check {
    pub description: String,
    pub value: f64,
    pub tol: f64,
    pub pass: bool,
}

#[derive(Clone, Debug, Serialize)]
pub struct SuiteResult {
    pub name: String,
    pub checks: Vec<Check>,
    pub pass: bool,
}

impl SuiteResult {
    pub fn new(name: &str) -> Self {
        SuiteResult { name: name.to_string(), checks: Vec::new(), pass: true }
    }
    /// |value| must be <= tol
    pub fn check(&mut self, description: &str, value: f64, tol: f64) {
        let pass = value.abs() <= tol && value.is_finite();
        self.pass &= pass;
        self.checks.push(Check { description: description.to_string(), value, tol, pass });
    }
    /// value must be >= bound (recorded with tol = bound)
    pub fn check_at_least(&mut self, description: &str, value: f64, bound: f64) {
        let pass = value >= bound && value.is_finite();
        self.pass &= pass;
        self.checks.push(Check {
            description: description.to_string(),
            value,
            tol: bound,
            pass,
        });
    }
}

#[derive(Clone, Debug)]
pub struct VerifyOptions {
    pub n: usize,
    pub grid: usize,
    pub rank: usize,
    pub level: i64,
    pub seed: u64,
    /// random metric pairs for path independence
    pub pairs: usize,
    pub nakano_samples: usize,
    pub local_min_trials: usize,
    pub quad_order: usize,
    pub band: usize,
    pub amplitude: f64,
    /// multiply every tolerance (coarse-grid runs document their factor here)
    pub tol_scale: f64,
}

impl Default for VerifyOptions {
    fn default() -> Self {
        VerifyOptions {
            n: 2,
            grid: 16,
            rank: 2,
            level: 1,
            seed: 7,
            pairs: 20,
            nakano_samples: 1000,
            local_min_trials: 100,
            quad_order: 12,
            band: 2,
            amplitude: 0.12,
            tol_scale: 1.0,
        }
    }
}

impl VerifyOptions {
    pub fn background(&self) -> Result<Background> {
        Background::new(self.n, self.grid, self.rank, self.level)
    }
}

// ---------------------------------------------------------------------------
// geometry suite
// ---------------------------------------------------------------------------

/// Independent dense wedge oracle: forms as coefficient maps on explicit
/// generator index lists, signs by bubble-sort counting. Single-point,
/// scalar-rank only — enough to certify the bitmask pipeline.
fn oracle_sign(perm: &[usize]) -> f64 {
    let mut v = perm.to_vec();
    let mut swaps = 0usize;
    for i in 0..v.len() {
        for j in (i + 1)..v.len() {
            if v[j] < v[i] {
                v.swap(i, j);
                swaps += 1;
            }
        }
    }
    if swaps % 2 == 0 { 1.0 } else { -1.0 }
}

/// Generators ordered dz^1..dz^n, dzbar^1..dzbar^n as indices 0..2n; a form
/// is a map from ascending index lists to coefficients.
fn oracle_wedge(
    n: usize,
    a: &[(Vec<usize>, C64)],
    b: &[(Vec<usize>, C64)],
) -> Vec<(Vec<usize>, C64)> {
    let mut out: std::collections::BTreeMap<Vec<usize>, C64> = Default::default();
    for (ia, ca) in a {
        for (ib, cb) in b {
            let mut all: Vec<usize> = ia.iter().chain(ib.iter()).cloned().collect();
            if all.iter().collect::<std::collections::BTreeSet<_>>().len() != all.len() {
                continue;
            }
            let sign = oracle_sign(&all);
            all.sort_unstable();
            *out.entry(all).or_insert(C64::new(0.0, 0.0)) += *ca * *cb * sign;
        }
    }
    let _ = n;
    out.into_iter().collect()
}

fn endform_to_oracle(n: usize, f: &EndForm) -> Vec<(Vec<usize>, C64)> {
    // our component ordering is dz^I wedge dzbar^J with I, J ascending
    let isets = index_sets(n, f.p);
    let jsets = index_sets(n, f.q);
    let mut out = Vec::new();
    for (ir, &im) in isets.iter().enumerate() {
        for (jr, &jm) in jsets.iter().enumerate() {
            let mut idx: Vec<usize> = (0..n).filter(|i| im & (1 << i) != 0).collect();
            idx.extend((0..n).filter(|j| jm & (1 << j) != 0).map(|j| n + j));
            out.push((idx, f.comp(ir, jr).data[0]));
        }
    }
    out
}

fn random_oracle_form(n: usize, p: usize, q: usize, rng: &mut ChaCha8Rng) -> EndForm {
    let mut f = EndForm::zero(n, p, q, 1, 1);
    for c in f.comps.iter_mut() {
        c.data[0] = C64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0));
    }
    f
}

pub fn geometry_suite(opts: &VerifyOptions) -> Result<SuiteResult> {
    let mut suite = SuiteResult::new("geometry");
    let bg = opts.background()?;
    let ts = opts.tol_scale;
    let mut rng = ChaCha8Rng::seed_from_u64(opts.seed ^ 0x67656f);

    // wedge pipeline vs dense oracle on random degree combinations
    let mut worst = 0.0_f64;
    for _ in 0..40 {
        let n = bg.n;
        let pa = rng.gen_range(0..=n);
        let qa = rng.gen_range(0..=n);
        let pb = rng.gen_range(0..=(n - pa).min(n));
        let qb = rng.gen_range(0..=(n - qa).min(n));
        let a = random_oracle_form(n, pa, qa, &mut rng);
        let b = random_oracle_form(n, pb, qb, &mut rng);
        let w = wedge(&a, &b);
        let got = endform_to_oracle(n, &w);
        let want = oracle_wedge(n, &endform_to_oracle(n, &a), &endform_to_oracle(n, &b));
        let want_map: std::collections::BTreeMap<_, _> = want.into_iter().collect();
        for (idx, v) in got {
            let w0 = want_map.get(&idx).cloned().unwrap_or(C64::new(0.0, 0.0));
            worst = worst.max((v - w0).norm());
        }
    }
    suite.check("wedge vs dense sign oracle (sup mismatch)", worst, 1e-13 * ts);

    // spectral derivative of a single mode
    let f = field_from_fn(&bg, 1, |c, m| {
        m[0] = C64::new(0.0, 2.0 * std::f64::consts::PI * (c[0] - c[3])).exp()
    });
    let form = EndForm::from_field(bg.n, f.clone());
    let d = del(&bg, &form);
    let want = f.scale(C64::new(0.0, std::f64::consts::PI));
    suite.check(
        "del of single Fourier mode vs analytic",
        d.comp(0, 0).sub(&want).sup_frobenius(),
        1e-12 * ts,
    );

    // volume normalization
    suite.check("volume of the unit torus minus 4", volume(&bg) - 4.0, 1e-12 * ts);

    // Stokes: integrals of exact top forms vanish
    let raw = random_hermitian_field(&bg, 1, &mut rng, opts.band, 1.0);
    let mut fnm1 = EndForm::zero(bg.n, bg.n, bg.n - 1, 1, bg.points());
    for c in fnm1.comps.iter_mut() {
        *c = raw.clone();
    }
    let v = integrate(&bg, &dbar(&bg, &fnm1))?;
    suite.check("Stokes: integral of dbar-exact top form", v.norm(), 1e-11 * ts);
    let mut gnm1 = EndForm::zero(bg.n, bg.n - 1, bg.n, 1, bg.points());
    for c in gnm1.comps.iter_mut() {
        *c = raw.clone();
    }
    let v = integrate(&bg, &del(&bg, &gnm1))?;
    suite.check("Stokes: integral of del-exact top form", v.norm(), 1e-11 * ts);

    // integration by parts: tr(del a wedge b) = -(-1)^{deg a} tr(a wedge del b)
    let a1 = {
        let mut f = EndForm::zero(bg.n, 0, 1, 1, bg.points());
        *f.comp_mut(0, 0) = random_hermitian_field(&bg, 1, &mut rng, opts.band, 0.7);
        *f.comp_mut(0, 1) = random_hermitian_field(&bg, 1, &mut rng, opts.band, 0.7);
        f
    };
    let b1 = {
        let mut f = EndForm::zero(bg.n, bg.n - 1, bg.n - 1, 1, bg.points());
        for c in f.comps.iter_mut() {
            *c = random_hermitian_field(&bg, 1, &mut rng, opts.band, 0.7);
        }
        f
    };
    let lhs = integrate(&bg, &wedge(&del(&bg, &a1), &b1))?;
    let rhs = integrate(&bg, &wedge(&a1, &del(&bg, &b1)))?;
    // deg a1 = 1, so lhs = +rhs
    suite.check(
        "integration by parts for del on (0,1) x (n-1,n-1)",
        (lhs - rhs).norm(),
        1e-9 * ts,
    );
    Ok(suite)
}

// ---------------------------------------------------------------------------
// Chern-Weil suite
// ---------------------------------------------------------------------------

pub fn chern_weil_suite(opts: &VerifyOptions) -> Result<SuiteResult> {
    let mut suite = SuiteResult::new("chern_weil");
    let bg = opts.background()?;
    let ts = opts.tol_scale;
    let mut rng = ChaCha8Rng::seed_from_u64(opts.seed ^ 0x63770000);
    let pi = std::f64::consts::PI;

    if bg.n == 2 && bg.level == 1 {
        suite.check("lambda_1 minus 2 pi", lambda_k(&bg, 1)? - 2.0 * pi, 1e-8 * ts);
        suite.check(
            "lambda_2 minus 2 pi^2",
            lambda_k(&bg, 2)? - 2.0 * pi * pi,
            1e-8 * ts,
        );
    }
    let m = Metric::random(&bg, &mut rng, opts.band, opts.amplitude)?;
    for k in 1..=bg.n.min(2) {
        let a = lambda_k(&bg, k)?;
        let b = lambda_k_from_metric(&bg, &m, k)?;
        suite.check(
            &format!("lambda_{k} Chern-Weil metric independence (relative)"),
            (a - b) / a.abs().max(1.0),
            1e-8 * ts,
        );
    }
    // slopes of the split (1,2) model
    if bg.n == 2 {
        let (_, s1) = deg_slope(&bg, &[1, 2], &[0], 1)?;
        let (_, s2) = deg_slope(&bg, &[1, 2], &[1], 1)?;
        suite.check("slope of level-1 factor minus 2 pi", s1 - 2.0 * pi, 1e-10 * ts);
        suite.check("slope of level-2 factor minus 4 pi", s2 - 4.0 * pi, 1e-10 * ts);
    }
    Ok(suite)
}

// ---------------------------------------------------------------------------
// functional suite
// ---------------------------------------------------------------------------

pub fn functional_suite(opts: &VerifyOptions) -> Result<SuiteResult> {
    let mut suite = SuiteResult::new("functional");
    let bg = opts.background()?;
    let ts = opts.tol_scale;
    let mut rng = ChaCha8Rng::seed_from_u64(opts.seed ^ 0x66756e);

    // path independence over three path families
    let mut worst = 0.0_f64;
    for _ in 0..opts.pairs {
        let h0 = Metric::random(&bg, &mut rng, opts.band, opts.amplitude)?;
        let h1 = Metric::random(&bg, &mut rng, opts.band, opts.amplitude)?;
        let mid = geodesic(&h0, &h1, rng.gen_range(0.2..0.8))?;
        let bump = random_hermitian_field(&bg, bg.rank, &mut rng, opts.band, 0.05);
        let way = mid.deformed(&bump, 1.0)?;
        for k in 1..=bg.n.min(2) {
            let a = donaldson_m(&bg, &h0, &h1, k, &PathSpec::geodesic(opts.quad_order))?.m;
            let b = donaldson_m(&bg, &h0, &h1, k, &PathSpec::linear(opts.quad_order))?.m;
            let c = donaldson_m(
                &bg,
                &h0,
                &h1,
                k,
                &PathSpec { kind: PathKind::Waypoints(vec![way.clone()]), quad_order: opts.quad_order },
            )?
            .m;
            let scale = a.abs().max(1.0);
            worst = worst
                .max((a - b).abs() / scale)
                .max((a - c).abs() / scale)
                .max((b - c).abs() / scale);
        }
    }
    suite.check(
        &format!("path independence over {} pairs x 3 paths (relative spread)", opts.pairs),
        worst,
        1e-8 * ts,
    );

    // cocycle and normalization
    let h0 = Metric::random(&bg, &mut rng, opts.band, opts.amplitude)?;
    let h1 = Metric::random(&bg, &mut rng, opts.band, opts.amplitude)?;
    let h2 = Metric::random(&bg, &mut rng, opts.band, opts.amplitude)?;
    let path = PathSpec::geodesic(opts.quad_order);
    for k in 1..=bg.n.min(2) {
        let m01 = donaldson_m(&bg, &h0, &h1, k, &path)?.m;
        let m12 = donaldson_m(&bg, &h1, &h2, k, &path)?.m;
        let m02 = donaldson_m(&bg, &h0, &h2, k, &path)?.m;
        let scale = m01.abs().max(m12.abs()).max(m02.abs()).max(1.0);
        suite.check(
            &format!("cocycle M01+M12-M02, k={k} (relative)"),
            (m01 + m12 - m02) / scale,
            1e-8 * ts,
        );
        for a in [0.5, 2.0] {
            let ah = Metric::new(h0.w.scale(C64::new(a, 0.0)))?;
            let m = donaldson_m(&bg, &h0, &ah, k, &path)?.m;
            suite.check(&format!("normalization M(H, {a} H), k={k}"), m, 1e-10 * ts);
        }
    }

    // variation formulas vs finite differences (Richardson once)
    let h = Metric::random(&bg, &mut rng, opts.band, opts.amplitude)?;
    let href = Metric::background(&bg);
    for k in 1..=bg.n.min(2) {
        let mut worst_fv = 0.0_f64;
        for _ in 0..10 {
            let s0 = random_hermitian_field(&bg, bg.rank, &mut rng, opts.band, 0.1);
            let v = h.deformation_velocity(&s0);
            let analytic = first_variation(&bg, &h, &v, k)?;
            let fd = |eps: f64| -> Result<f64> {
                let p = donaldson_m(&bg, &href, &h.deformed(&s0, eps)?, k, &path)?.m;
                let m = donaldson_m(&bg, &href, &h.deformed(&s0, -eps)?, k, &path)?.m;
                Ok((p - m) / (2.0 * eps))
            };
            let c1 = fd(1e-4)?;
            let c2 = fd(2e-4)?;
            let rich = (4.0 * c1 - c2) / 3.0;
            worst_fv = worst_fv.max((analytic - rich).abs() / analytic.abs().max(1.0));
        }
        suite.check(
            &format!("first variation vs finite difference, k={k} (relative)"),
            worst_fv,
            1e-6 * ts,
        );
    }
    {
        let k = bg.n.min(2);
        let mut worst_sv = 0.0_f64;
        for _ in 0..10 {
            let kk = Metric::random(&bg, &mut rng, opts.band, opts.amplitude)?;
            let t = rng.gen_range(0.2..0.8);
            let analytic = second_variation_geodesic(&bg, &h, &kk, k, t)?;
            let mval = |tt: f64| -> Result<f64> {
                Ok(donaldson_m(&bg, &href, &geodesic(&h, &kk, tt)?, k, &path)?.m)
            };
            let fd = |eps: f64| -> Result<f64> {
                Ok((mval(t + eps)? - 2.0 * mval(t)? + mval(t - eps)?) / (eps * eps))
            };
            let c1 = fd(1e-3)?;
            let c2 = fd(2e-3)?;
            let rich = (4.0 * c1 - c2) / 3.0;
            worst_sv = worst_sv.max((analytic - rich).abs() / analytic.abs().max(1.0));
        }
        suite.check(
            &format!("second variation vs finite difference, k={k} (relative)"),
            worst_sv,
            1e-5 * ts,
        );
    }
    Ok(suite)
}

// ---------------------------------------------------------------------------
// geodesic derivative bound (z2)
// ---------------------------------------------------------------------------

fn sqrt_field(f: &GridField) -> GridField {
    let mut out = f.clone();
    for v in out.data.iter_mut() {
        *v = C64::new(v.re.max(0.0).sqrt(), 0.0);
    }
    out
}

pub fn z2_suite(opts: &VerifyOptions) -> Result<SuiteResult> {
    let mut suite = SuiteResult::new("z2_geodesic_bound");
    let bg = opts.background()?;
    let ts = opts.tol_scale;
    let mut rng = ChaCha8Rng::seed_from_u64(opts.seed ^ 0x7a32);
    let mut worst = f64::NEG_INFINITY;
    for _ in 0..10 {
        let h = Metric::random(&bg, &mut rng, opts.band, opts.amplitude)?;
        let kmet = Metric::random(&bg, &mut rng, opts.band, opts.amplitude)?;
        let s = log_map(&h, &kmet)?;
        let s_form = EndForm::from_field(bg.n, s.clone());
        let theta_h = connection_form(&bg, &h);
        let del_s = chern_del(&bg, &theta_h, &s_form);
        let dbar_s = dbar(&bg, &s_form);
        let dbar_del_s = dbar(&bg, &del_s);
        // pointwise ingredients at the fixed metric H
        let ns = sqrt_field(&pointwise_h_norm_sq(&bg, &s_form, &h));
        let nds = sqrt_field(&pointwise_h_norm_sq(&bg, &dbar_s, &h));
        let na = sqrt_field(&pointwise_h_norm_sq(&bg, &del_s, &h));
        let nb = sqrt_field(&pointwise_h_norm_sq(&bg, &dbar_del_s, &h));
        let hinv = h.inv();
        for j in 0..11 {
            let t = j as f64 / 10.0;
            let mt = geodesic(&h, &kmet, t)?;
            // h(t) = H^{-1} H(t) as an endomorphism field
            let ht = hinv.matmul(&mt.w);
            let ht_inv = {
                let mid = h
                    .inv_sqrt()
                    .matmul(&mt.w)
                    .matmul(&h.inv_sqrt());
                let mut mid = mid;
                mid.hermitize();
                let inv = mid.herm_map(crate::bundle::METRIC_FLOOR, |x| 1.0 / x)?;
                h.sqrt().matmul(&inv).matmul(&h.inv_sqrt())
            };
            let ht_form = EndForm::from_field(bg.n, ht.clone());
            let del_ht = chern_del(&bg, &theta_h, &ht_form);
            let mut a = del_ht.clone();
            for c in a.comps.iter_mut() {
                *c = ht_inv.matmul(c);
            }
            let da = dbar(&bg, &a);
            let lhs = sqrt_field(&pointwise_h_norm_sq(&bg, &a, &h))
                .add(&sqrt_field(&pointwise_h_norm_sq(&bg, &da, &h)));
            // rhs = (|dbar del s| + |del s|) (e^{4 t (|s|+|dbar s|)} - 1) / (4 (|s|+|dbar s|))
            let mut rhs = GridField::zeros(bg.points(), 1);
            for p in 0..bg.points() {
                let x = ns.data[p].re + nds.data[p].re;
                let amp = na.data[p].re + nb.data[p].re;
                let factor = if x < 1e-14 { t } else { ((4.0 * t * x).exp() - 1.0) / (4.0 * x) };
                rhs.data[p] = C64::new(amp * factor, 0.0);
            }
            for p in 0..bg.points() {
                worst = worst.max(lhs.data[p].re - rhs.data[p].re);
            }
        }
    }
    suite.check(
        "z2 bound violation over 10 geodesics x 11 samples (max lhs - rhs)",
        worst.max(0.0),
        1e-8 * ts,
    );
    Ok(suite)
}

// ---------------------------------------------------------------------------
// claim (2.8): tau-derivative of the s-quadrature equals boundary terms
// ---------------------------------------------------------------------------

struct TwoParamFamily {
    half: GridField,
    a: GridField,
    b: GridField,
    c: GridField,
}

impl TwoParamFamily {
    fn new(bg: &Background, rng: &mut ChaCha8Rng, band: usize, amp: f64) -> Self {
        let w0 = Metric::random(bg, rng, band, amp).unwrap();
        TwoParamFamily {
            half: w0.sqrt(),
            a: random_hermitian_field(bg, bg.rank, rng, band, amp),
            b: random_hermitian_field(bg, bg.rank, rng, band, amp),
            c: random_hermitian_field(bg, bg.rank, rng, band, amp * 0.5),
        }
    }

    fn gen(&self, tau: f64, s: f64) -> GridField {
        let mut g = self.a.scale(C64::new(tau, 0.0));
        g.axpy(C64::new(s, 0.0), &self.b);
        g.axpy(C64::new(tau * s, 0.0), &self.c);
        g
    }

    fn metric(&self, tau: f64, s: f64) -> Result<Metric> {
        let e = self.gen(tau, s).herm_map(f64::NEG_INFINITY, f64::exp)?;
        Metric::new(self.half.matmul(&e).matmul(&self.half))
    }

    /// velocity h^{-1} dh/ds (or dtau) through the exact differential of the
    /// matrix exponential
    fn velocity(&self, tau: f64, s: f64, wrt_s: bool) -> Result<GridField> {
        let g = self.gen(tau, s);
        let mut dg = if wrt_s { self.b.clone() } else { self.a.clone() };
        dg.axpy(C64::new(if wrt_s { tau } else { s }, 0.0), &self.c);
        // w = half e^G half, dw = half dexp_G(dG) half,
        // w^{-1} dw = half^{-1} e^{-G} dexp_G(dG) half
        let points = g.points;
        let r = g.r;
        let mut out = GridField::zeros(points, r);
        for p in 0..points {
            let de = linalg::herm_dexp(g.at(p), dg.at(p), r);
            out.at_mut(p).copy_from_slice(&de);
        }
        // out currently = dexp_G(dG); build w^{-1} dw = e^{-G}-conjugation
        let eneg = g.scale(C64::new(-1.0, 0.0)).herm_map(f64::NEG_INFINITY, f64::exp)?;
        let half_inv = {
            let mut hs = self.half.matmul(&self.half);
            hs.hermitize();
            Metric::new(hs)?.inv_sqrt()
        };
        Ok(half_inv.matmul(&eneg).matmul(&out).matmul(&self.half))
    }
}

/// tr[(iF)^k v] integrated against omega^{n-k}/(n-k)!, the quadrature kernel
/// of the functional.
fn kernel_integral(bg: &Background, m: &Metric, v: &GridField, k: usize) -> Result<f64> {
    let psi = psi_k(bg, m, k)?;
    Ok(integrate_scalar(bg, &psi.matmul(v).trace()).re)
}

pub fn claim1_suite(opts: &VerifyOptions) -> Result<SuiteResult> {
    let mut suite = SuiteResult::new("claim_exactness");
    let bg = opts.background()?;
    let ts = opts.tol_scale;
    let mut rng = ChaCha8Rng::seed_from_u64(opts.seed ^ 0x636c31);
    let fam = TwoParamFamily::new(&bg, &mut rng, opts.band, opts.amplitude * 0.6);
    let quad = gauss_legendre(opts.quad_order);
    let k = bg.n.min(2);

    let i_of_tau = |tau: f64| -> Result<f64> {
        let mut acc = 0.0;
        for &(snode, w) in &quad {
            let m = fam.metric(tau, snode)?;
            let v = fam.velocity(tau, snode, true)?;
            acc += w * kernel_integral(&bg, &m, &v, k)?;
        }
        Ok(acc)
    };
    let boundary = |tau: f64| -> Result<f64> {
        let j = |s: f64| -> Result<f64> {
            let m = fam.metric(tau, s)?;
            let v = fam.velocity(tau, s, false)?;
            kernel_integral(&bg, &m, &v, k)
        };
        Ok(j(1.0)? - j(0.0)?)
    };
    let tau0 = 0.3;
    let fd = |eps: f64| -> Result<f64> { Ok((i_of_tau(tau0 + eps)? - i_of_tau(tau0 - eps)?) / (2.0 * eps)) };
    let c1 = fd(1e-3)?;
    let c2 = fd(2e-3)?;
    let rich = (4.0 * c1 - c2) / 3.0;
    let bdy = boundary(tau0)?;
    suite.check(
        &format!("d/dtau of s-quadrature minus boundary terms, k={k}"),
        (rich - bdy) / bdy.abs().max(1.0),
        1e-7 * ts,
    );

    // commuting central family: difference vanishes identically
    let fam_c = TwoParamFamily {
        half: GridField::identity(bg.points(), bg.rank),
        a: GridField::identity(bg.points(), bg.rank).scale(C64::new(0.3, 0.0)),
        b: GridField::identity(bg.points(), bg.rank).scale(C64::new(-0.2, 0.0)),
        c: GridField::identity(bg.points(), bg.rank).scale(C64::new(0.15, 0.0)),
    };
    let i_c = |tau: f64| -> Result<f64> {
        let mut acc = 0.0;
        for &(snode, w) in &quad {
            let m = fam_c.metric(tau, snode)?;
            let v = fam_c.velocity(tau, snode, true)?;
            acc += w * kernel_integral(&bg, &m, &v, 1)?;
        }
        Ok(acc)
    };
    let j_c = |tau: f64, s: f64| -> Result<f64> {
        let m = fam_c.metric(tau, s)?;
        let v = fam_c.velocity(tau, s, false)?;
        kernel_integral(&bg, &m, &v, 1)
    };
    let d_c = (i_c(tau0 + 1e-4)? - i_c(tau0 - 1e-4)?) / 2e-4;
    let b_c = j_c(tau0, 1.0)? - j_c(tau0, 0.0)?;
    suite.check("central commuting family, k=1 (difference)", d_c - b_c, 1e-9 * ts);
    Ok(suite)
}

// ---------------------------------------------------------------------------
// (U1) telescoping curvature identity, pointwise
// ---------------------------------------------------------------------------

pub fn u1_suite(opts: &VerifyOptions) -> Result<SuiteResult> {
    let mut suite = SuiteResult::new("u1_telescoping");
    let bg = opts.background()?;
    let ts = opts.tol_scale;
    let mut rng = ChaCha8Rng::seed_from_u64(opts.seed ^ 0x7531);
    let hm = Metric::random(&bg, &mut rng, opts.band, opts.amplitude)?;
    let km = Metric::random(&bg, &mut rng, opts.band, opts.amplitude)?;
    for k in 1..=bg.n.min(2) {
        let i_fh = curvature(&bg, &hm).scale(C64::new(0.0, 1.0));
        let i_fk = curvature(&bg, &km).scale(C64::new(0.0, 1.0));
        let lhs = wedge_power(&i_fh, k).sub(&wedge_power(&i_fk, k));
        // h = K^{-1} H, middle factor i dbar(h^{-1} del_K h) = iF_H - iF_K
        let mid = i_fh.sub(&i_fk);
        let mut rhs = EndForm::zero(bg.n, k, k, bg.rank, bg.points());
        for i in 1..=k {
            let left = wedge_power(&i_fh, k - i);
            let right = wedge_power(&i_fk, i - 1);
            rhs = rhs.add(&wedge(&wedge(&left, &mid), &right));
        }
        let scale = lhs.sup_norm().max(1.0);
        suite.check(
            &format!("U1 pointwise mismatch, k={k} (relative sup)"),
            lhs.sub(&rhs).sup_norm() / scale,
            1e-9 * ts,
        );
        // and the middle factor really is dbar of the relative connection
        let h_rel = km.inv().matmul(&hm.w);
        let h_rel_inv = hm.inv().matmul(&km.w);
        let theta_k = connection_form(&bg, &km);
        let del_k_h = chern_del(&bg, &theta_k, &EndForm::from_field(bg.n, h_rel.clone()));
        let mut conn = del_k_h;
        for c in conn.comps.iter_mut() {
            *c = h_rel_inv.matmul(c);
        }
        let mid2 = dbar(&bg, &conn).scale(C64::new(0.0, 1.0));
        suite.check(
            &format!("iF_H - iF_K vs i dbar(h^-1 del_K h), k={k} (relative sup)"),
            mid.sub(&mid2).sup_norm() / mid.sup_norm().max(1.0),
            1e-5 * ts,
        );
    }
    // K = H: both sides vanish
    let i_fh = curvature(&bg, &hm).scale(C64::new(0.0, 1.0));
    let z = wedge_power(&i_fh, 2).sub(&wedge_power(&i_fh, 2));
    suite.check("U1 with K = H", z.sup_norm(), 1e-15);
    Ok(suite)
}

// ---------------------------------------------------------------------------
// Theorem-level integration-by-parts identity (k = 2)
// ---------------------------------------------------------------------------

/// Square roots of the relative endomorphism h = K^{-1}H through the
/// similarity transform that keeps them exact inverses of each other.
fn relative_sqrt(hm: &Metric, km: &Metric) -> Result<(GridField, GridField)> {
    let k_half = km.sqrt();
    let k_inv_half = km.inv_sqrt();
    let mut mid = k_inv_half.matmul(&hm.w).matmul(&k_inv_half);
    mid.hermitize();
    let p = mid.herm_map(crate::bundle::METRIC_FLOOR, f64::sqrt)?;
    let p_inv = mid.herm_map(crate::bundle::METRIC_FLOOR, |x| 1.0 / x.sqrt())?;
    let h_half = k_inv_half.matmul(&p).matmul(&k_half);
    let h_inv_half = k_inv_half.matmul(&p_inv).matmul(&k_half);
    Ok((h_half, h_inv_half))
}

pub fn thm2_suite(opts: &VerifyOptions) -> Result<SuiteResult> {
    let mut suite = SuiteResult::new("thm2_identity");
    let bg = opts.background()?;
    if bg.n < 2 {
        return Ok(suite);
    }
    let ts = opts.tol_scale;
    let mut rng = ChaCha8Rng::seed_from_u64(opts.seed ^ 0x746d32);
    let eval = |hm: &Metric, km: &Metric| -> Result<(f64, f64, f64)> {
        let i_fh = curvature(&bg, hm).scale(C64::new(0.0, 1.0));
        let i_fk = curvature(&bg, km).scale(C64::new(0.0, 1.0));
        let h_rel = km.inv().matmul(&hm.w);
        let (_h_half, h_inv_half) = relative_sqrt(hm, km)?;
        let h_form = EndForm::from_field(bg.n, h_rel.clone());
        // left: tr{[ (iF_H)^2 - (iF_K)^2 ] h}
        let lhs_form = wedge_power(&i_fh, 2).sub(&wedge_power(&i_fk, 2));
        let mut lh = lhs_form;
        for c in lh.comps.iter_mut() {
            *c = c.matmul(&h_rel);
        }
        let left = integrate_scalar(&bg, &contract_top(&bg, &lh.trace(), bg.n - 2)?).re;
        // right 1: tr{ iF_H wedge (i del_H h  h^{-1/2}) wedge (h^{-1/2} dbar h) }
        let theta_h = connection_form(&bg, hm);
        let mut a = chern_del(&bg, &theta_h, &h_form).scale(C64::new(0.0, 1.0));
        for c in a.comps.iter_mut() {
            *c = c.matmul(&h_inv_half);
        }
        let mut b = dbar(&bg, &h_form);
        for c in b.comps.iter_mut() {
            *c = h_inv_half.matmul(c);
        }
        let r1_form = wedge(&wedge(&i_fh, &a), &b);
        let r1 = integrate_scalar(&bg, &contract_top(&bg, &r1_form.trace(), bg.n - 2)?).re;
        // right 2: tr{ (i h^{-1/2} del_K h) wedge iF_K wedge (dbar h h^{-1/2}) }
        let theta_k = connection_form(&bg, km);
        let mut a2 = chern_del(&bg, &theta_k, &h_form).scale(C64::new(0.0, 1.0));
        for c in a2.comps.iter_mut() {
            *c = h_inv_half.matmul(c);
        }
        let mut b2 = dbar(&bg, &h_form);
        for c in b2.comps.iter_mut() {
            *c = c.matmul(&h_inv_half);
        }
        let r2_form = wedge(&wedge(&a2, &i_fk), &b2);
        let r2 = integrate_scalar(&bg, &contract_top(&bg, &r2_form.trace(), bg.n - 2)?).re;
        Ok((left, r1, r2))
    };

    let hm = Metric::random(&bg, &mut rng, opts.band, opts.amplitude)?;
    let km = Metric::random(&bg, &mut rng, opts.band, opts.amplitude)?;
    let (left, r1, r2) = eval(&hm, &km)?;
    let scale = left.abs().max(r1.abs()).max(r2.abs()).max(1.0);
    suite.check(
        "integration-by-parts identity left-(r1+r2) (relative)",
        (left - r1 - r2) / scale,
        1e-8 * ts,
    );

    // both constant solutions differing by a constant scalar factor
    let h_sol = Metric::background(&bg);
    let k_sol = Metric::new(h_sol.w.scale(C64::new(std::f64::consts::E, 0.0)))?;
    let (l0, r10, r20) = eval(&h_sol, &k_sol)?;
    suite.check("solutions-pair left side", l0, 1e-9 * ts);
    suite.check("solutions-pair right side 1 (holomorphic h)", r10, 1e-9 * ts);
    suite.check("solutions-pair right side 2 (holomorphic h)", r20, 1e-9 * ts);
    Ok(suite)
}

// ---------------------------------------------------------------------------
// Nakano lemma Monte-Carlo
// ---------------------------------------------------------------------------

/// Random curvature-type tensor with the Hermitian pairing F_{beta alpha-bar}
/// = F_{alpha beta-bar}^dagger, biased toward the positive cones by a random
/// identity shift on the diagonal blocks so the rejection sampler does not
/// starve.
fn random_hermitian_pairing_tensor(rng: &mut ChaCha8Rng, n: usize, r: usize) -> Vec<Vec<C64>> {
    let shift = rng.gen_range(0.3..2.0);
    let amp = rng.gen_range(0.2..1.0);
    let mut f = vec![vec![C64::new(0.0, 0.0); r * r]; n * n];
    for a in 0..n {
        for b in a..n {
            let m: Vec<C64> = (0..r * r)
                .map(|_| C64::new(rng.gen_range(-amp..amp), rng.gen_range(-amp..amp)))
                .collect();
            if a == b {
                let ad = linalg::adjoint(&m, r);
                let mut h: Vec<C64> =
                    m.iter().zip(ad.iter()).map(|(&x, &y)| (x + y) * 0.5).collect();
                for i in 0..r {
                    h[i * r + i] += shift;
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

pub fn nakano_suite(opts: &VerifyOptions) -> Result<SuiteResult> {
    let mut suite = SuiteResult::new("nakano_lemma");
    let n = opts.n;
    let r = opts.rank;
    let d = n * r;
    let xd = n * r * r;
    let ts = opts.tol_scale;
    let mut rng = ChaCha8Rng::seed_from_u64(opts.seed ^ 0x6e616b);
    let mut accepted = 0usize;
    let mut attempts = 0usize;
    let mut counterexamples = 0usize;
    let mut oracle_worst = 0.0_f64;
    while accepted < opts.nakano_samples {
        attempts += 1;
        if attempts > opts.nakano_samples * 1000 {
            return Err(HblError::Config("nakano sampler starvation".into()));
        }
        let f = random_hermitian_pairing_tensor(&mut rng, n, r);
        let nk = nakano_form(&f, n, r);
        let dn = dual_nakano_form(&f, n, r);
        let nak_pd = linalg::min_eigenvalue(&nk, d) > 0.0;
        let dual_pd = linalg::min_eigenvalue(&dn, d) > 0.0;
        if !(nak_pd && dual_pd) {
            continue;
        }
        accepted += 1;
        // the lemma: both one-sided sigma_2 forms must be PD. Certify by
        // polarization over the constant xi basis with the index oracle.
        let one = C64::new(1.0, 0.0);
        let iu = C64::new(0.0, 1.0);
        let q_pair = |coeffs: &[(usize, C64)]| -> (f64, f64) {
            let mut xi = vec![vec![C64::new(0.0, 0.0); r * r]; n];
            for &(idx, c) in coeffs {
                xi[idx / (r * r)][idx % (r * r)] += c;
            }
            n1_n3_index_oracle(&f, &xi, n, r)
        };
        let mut left = vec![C64::new(0.0, 0.0); xd * xd];
        let mut right = vec![C64::new(0.0, 0.0); xd * xd];
        let mut diag = Vec::with_capacity(xd);
        for a in 0..xd {
            diag.push(q_pair(&[(a, one)]));
        }
        for a in 0..xd {
            left[a * xd + a] = C64::new(diag[a].0, 0.0);
            right[a * xd + a] = C64::new(diag[a].1, 0.0);
            for b in (a + 1)..xd {
                let qp = q_pair(&[(a, one), (b, one)]);
                let qi = q_pair(&[(a, one), (b, iu)]);
                let re_l = (qp.0 - diag[a].0 - diag[b].0) / 2.0;
                let im_l = (diag[a].0 + diag[b].0 - qi.0) / 2.0;
                left[a * xd + b] = C64::new(re_l, im_l);
                left[b * xd + a] = C64::new(re_l, -im_l);
                let re_r = (qp.1 - diag[a].1 - diag[b].1) / 2.0;
                let im_r = (diag[a].1 + diag[b].1 - qi.1) / 2.0;
                right[a * xd + b] = C64::new(re_r, im_r);
                right[b * xd + a] = C64::new(re_r, -im_r);
            }
        }
        if linalg::min_eigenvalue(&left, xd) <= 0.0 || linalg::min_eigenvalue(&right, xd) <= 0.0 {
            counterexamples += 1;
        }
        // oracle vs wedge pipeline on one random xi per sample
        if accepted <= 50 {
            let xi: Vec<Vec<C64>> = (0..n)
                .map(|_| {
                    (0..r * r)
                        .map(|_| C64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)))
                        .collect()
                })
                .collect();
            let (lo, ro) = n1_n3_index_oracle(&f, &xi, n, r);
            let (lp, rp) = sigma2_pipeline_from_constant(n, r, &f, &xi)?;
            oracle_worst = oracle_worst.max((lo - lp).abs()).max((ro - rp).abs());
        }
    }
    suite.check(
        &format!("strongly-sigma2 counterexamples over {} samples", opts.nakano_samples),
        counterexamples as f64,
        0.0,
    );
    suite.check("index oracle vs wedge pipeline (sup)", oracle_worst, 1e-12 * ts);
    // central tensor margin: stored F = c delta_ab Id gives both one-sided
    // forms min eigenvalue (n-1) c
    let c = 1.7;
    let mut fc = vec![vec![C64::new(0.0, 0.0); r * r]; n * n];
    for a in 0..n {
        fc[a * n + a] = linalg::identity(r).iter().map(|&x| x * c).collect();
    }
    let mut worst_c = 0.0_f64;
    for beta in 0..n {
        for ij in 0..r * r {
            let mut xi = vec![vec![C64::new(0.0, 0.0); r * r]; n];
            xi[beta][ij] = C64::new(1.0, 0.0);
            let (l, rr) = n1_n3_index_oracle(&fc, &xi, n, r);
            worst_c = worst_c.max((l - (n as f64 - 1.0) * c).abs());
            worst_c = worst_c.max((rr - (n as f64 - 1.0) * c).abs());
        }
    }
    suite.check("central tensor margin vs analytic", worst_c, 1e-12 * ts);
    Ok(suite)
}

// ---------------------------------------------------------------------------
// local minimum experiment
// ---------------------------------------------------------------------------

pub fn local_min_suite(opts: &VerifyOptions) -> Result<SuiteResult> {
    let mut suite = SuiteResult::new("local_minimum");
    let bg = opts.background()?;
    let ts = opts.tol_scale;
    let mut rng = ChaCha8Rng::seed_from_u64(opts.seed ^ 0x6c6d);
    let h = Metric::background(&bg);
    let k = bg.n.min(2);
    let rep = local_min_experiment(&bg, &h, k, 0.01, opts.local_min_trials, &mut rng)?;
    suite.check_at_least(
        &format!("min M difference over {} trials at eps=0.01", rep.trials),
        rep.min_diff,
        -1e-10 * ts,
    );
    suite.check(
        "non-central trials with non-positive difference",
        rep.nonpositive_noncentral as f64,
        0.0,
    );
    // central flat direction
    let s_id = GridField::identity(bg.points(), bg.rank);
    let tilde = h.deformed(&s_id, 0.01)?;
    let d = donaldson_m(&bg, &h, &tilde, k, &PathSpec::geodesic(8))?.m;
    suite.check("central direction difference", d, 1e-11 * ts);
    Ok(suite)
}

// ---------------------------------------------------------------------------
// everything
// ---------------------------------------------------------------------------

#[derive(Clone, Debug, Serialize)]
pub struct Verdict {
    pub suites: Vec<SuiteResult>,
    pub pass: bool,
}

pub fn run_all(opts: &VerifyOptions) -> Result<Verdict> {
    let suites = vec![
        geometry_suite(opts)?,
        chern_weil_suite(opts)?,
        functional_suite(opts)?,
        z2_suite(opts)?,
        claim1_suite(opts)?,
        u1_suite(opts)?,
        thm2_suite(opts)?,
        nakano_suite(opts)?,
        local_min_suite(opts)?,
    ];
    let pass = suites.iter().all(|s| s.pass);
    Ok(Verdict { suites, pass })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn fast_opts() -> VerifyOptions {
        VerifyOptions {
            grid: 8,
            pairs: 3,
            nakano_samples: 50,
            local_min_trials: 5,
            quad_order: 10,
            amplitude: 0.06,
            tol_scale: 1e3,
            ..Default::default()
        }
    }

    #[test]
    fn geometry_suite_passes() {
        let s = geometry_suite(&fast_opts()).unwrap();
        assert!(s.pass, "{:?}", s.checks.iter().filter(|c| !c.pass).collect::<Vec<_>>());
    }

    #[test]
    fn chern_weil_suite_passes() {
        let s = chern_weil_suite(&fast_opts()).unwrap();
        assert!(s.pass, "{:?}", s.checks.iter().filter(|c| !c.pass).collect::<Vec<_>>());
    }

    #[test]
    fn u1_suite_passes() {
        let s = u1_suite(&fast_opts()).unwrap();
        assert!(s.pass, "{:?}", s.checks.iter().filter(|c| !c.pass).collect::<Vec<_>>());
    }

    #[test]
    fn z2_suite_passes() {
        let s = z2_suite(&fast_opts()).unwrap();
        assert!(s.pass, "{:?}", s.checks.iter().filter(|c| !c.pass).collect::<Vec<_>>());
    }

    #[test]
    fn claim1_suite_passes() {
        let s = claim1_suite(&fast_opts()).unwrap();
        assert!(s.pass, "{:?}", s.checks.iter().filter(|c| !c.pass).collect::<Vec<_>>());
    }

    #[test]
    fn thm2_suite_passes() {
        let s = thm2_suite(&fast_opts()).unwrap();
        assert!(s.pass, "{:?}", s.checks.iter().filter(|c| !c.pass).collect::<Vec<_>>());
    }

    #[test]
    fn nakano_suite_passes() {
        let s = nakano_suite(&fast_opts()).unwrap();
        assert!(s.pass, "{:?}", s.checks.iter().filter(|c| !c.pass).collect::<Vec<_>>());
    }

    #[test]
    fn local_min_suite_passes() {
        let s = local_min_suite(&fast_opts()).unwrap();
        assert!(s.pass, "{:?}", s.checks.iter().filter(|c| !c.pass).collect::<Vec<_>>());
    }

    #[test]
    fn functional_suite_passes() {
        let s = functional_suite(&fast_opts()).unwrap();
        assert!(s.pass, "{:?}", s.checks.iter().filter(|c| !c.pass).collect::<Vec<_>>());
    }
}
