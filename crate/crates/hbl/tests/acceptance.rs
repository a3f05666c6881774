//! Acceptance gate: nine criteria at n = 2, N = 16, rank 2, level 1,
//! k in {1, 2}. Each test prints one PASS/FAIL line. Tolerances are stated
//! inline and are not scaled. Run with --release or the optimized test
//! profile; the criteria do real spectral work.

use hbl::bundle::{geodesic, random_hermitian_field, Metric};
use hbl::functional::{
    donaldson_m, first_variation, lambda_k, lambda_k_from_metric, second_variation_geodesic,
    PathKind, PathSpec,
};
use hbl::geometry::background::Background;
use hbl::hessian::{sigma_k_form, strongly_sigma2_forms};
use hbl::linalg::{min_eigenvalue, C64};
use hbl::solver::{gauge_distance, local_min_experiment, solve, SolveConfig};
use hbl::verify::{claim1_suite, nakano_suite, thm2_suite, u1_suite, z2_suite, VerifyOptions};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

const N: usize = 16;
const RANK: usize = 2;
const LEVEL: i64 = 1;
const BAND: usize = 2;
const AMP: f64 = 0.12;

fn bg() -> Background {
    Background::new(2, N, RANK, LEVEL).unwrap()
}

fn verdict(criterion: usize, description: &str, value: f64, tol: f64) {
    let pass = value.abs() <= tol && value.is_finite();
    println!(
        "[{}] criterion {criterion}: {description} (value {value:.3e}, tol {tol:.3e})",
        if pass { "PASS" } else { "FAIL" }
    );
    assert!(pass, "criterion {criterion} failed: {description}: {value:.6e} vs {tol:.3e}");
}

fn opts() -> VerifyOptions {
    VerifyOptions {
        n: 2,
        grid: N,
        rank: RANK,
        level: LEVEL,
        band: BAND,
        amplitude: AMP,
        ..Default::default()
    }
}

#[test]
fn criterion_1_path_independence() {
    let bg = bg();
    let mut rng = ChaCha8Rng::seed_from_u64(101);
    let started = std::time::Instant::now();
    let q = 6;
    let mut worst = 0.0_f64;
    for _ in 0..20 {
        let a = Metric::random(&bg, &mut rng, BAND, AMP).unwrap();
        let b = Metric::random(&bg, &mut rng, BAND, AMP).unwrap();
        let mid = geodesic(&a, &b, rng.gen_range(0.2..0.8)).unwrap();
        let bump = random_hermitian_field(&bg, RANK, &mut rng, BAND, 0.05);
        let way = mid.deformed(&bump, 1.0).unwrap();
        for k in [1usize, 2] {
            let g = donaldson_m(&bg, &a, &b, k, &PathSpec::geodesic(q)).unwrap().m;
            let l = donaldson_m(&bg, &a, &b, k, &PathSpec::linear(q)).unwrap().m;
            let w = donaldson_m(
                &bg,
                &a,
                &b,
                k,
                &PathSpec { kind: PathKind::Waypoints(vec![way.clone()]), quad_order: q },
            )
            .unwrap()
            .m;
            let s = g.abs().max(1.0);
            worst = worst.max((g - l).abs() / s).max((g - w).abs() / s).max((l - w).abs() / s);
        }
    }
    let secs = started.elapsed().as_secs_f64();
    verdict(
        1,
        "path independence, 20 random pairs x 3 paths, k in {1,2} (relative)",
        worst,
        1e-8,
    );
    assert!(secs < 300.0, "criterion 1 exceeded the 5 minute budget: {secs:.0}s");
}

#[test]
fn criterion_2_cocycle_and_normalization() {
    let bg = bg();
    let mut rng = ChaCha8Rng::seed_from_u64(102);
    let path = PathSpec::geodesic(10);
    let h0 = Metric::random(&bg, &mut rng, BAND, AMP).unwrap();
    let h1 = Metric::random(&bg, &mut rng, BAND, AMP).unwrap();
    let h2 = Metric::random(&bg, &mut rng, BAND, AMP).unwrap();
    let mut worst_cocycle = 0.0_f64;
    let mut worst_scalar = 0.0_f64;
    for k in [1usize, 2] {
        let m01 = donaldson_m(&bg, &h0, &h1, k, &path).unwrap().m;
        let m12 = donaldson_m(&bg, &h1, &h2, k, &path).unwrap().m;
        let m02 = donaldson_m(&bg, &h0, &h2, k, &path).unwrap().m;
        let scale = m01.abs().max(m12.abs()).max(m02.abs()).max(1.0);
        worst_cocycle = worst_cocycle.max((m01 + m12 - m02).abs() / scale);
        for a in [0.5, 2.0] {
            let ah = Metric::new(h0.w.scale(C64::new(a, 0.0))).unwrap();
            worst_scalar = worst_scalar.max(donaldson_m(&bg, &h0, &ah, k, &path).unwrap().m.abs());
        }
    }
    verdict(2, "cocycle identity, k in {1,2} (relative)", worst_cocycle, 1e-8);
    verdict(2, "M(H, aH) for a in {0.5, 2}, k in {1,2}", worst_scalar, 1e-10);
}

#[test]
fn criterion_3_normalization_constants() {
    let bg = bg();
    let pi = std::f64::consts::PI;
    let l1 = lambda_k(&bg, 1).unwrap();
    let l2 = lambda_k(&bg, 2).unwrap();
    verdict(3, "lambda_1 = 2 pi (relative)", (l1 - 2.0 * pi) / (2.0 * pi), 1e-8);
    verdict(3, "lambda_2 = 2 pi^2 (relative)", (l2 - 2.0 * pi * pi) / (2.0 * pi * pi), 1e-8);
    let mut rng = ChaCha8Rng::seed_from_u64(103);
    let m = Metric::random(&bg, &mut rng, BAND, AMP).unwrap();
    let mut worst = 0.0_f64;
    for (k, l) in [(1usize, l1), (2, l2)] {
        worst = worst.max((lambda_k_from_metric(&bg, &m, k).unwrap() - l).abs() / l.abs());
    }
    verdict(3, "Chern-Weil metric independence of lambda_k (relative)", worst, 1e-8);
}

#[test]
fn criterion_4_variation_formulas() {
    let bg = bg();
    let mut rng = ChaCha8Rng::seed_from_u64(104);
    let href = Metric::background(&bg);
    let h = Metric::random(&bg, &mut rng, BAND, AMP).unwrap();
    let path = PathSpec::geodesic(8);
    let mut worst_first = 0.0_f64;
    for k in [1usize, 2] {
        for _ in 0..10 {
            let s0 = random_hermitian_field(&bg, RANK, &mut rng, BAND, 0.1);
            let v = h.deformation_velocity(&s0);
            let analytic = first_variation(&bg, &h, &v, k).unwrap();
            let fd = |eps: f64| {
                let p = donaldson_m(&bg, &href, &h.deformed(&s0, eps).unwrap(), k, &path)
                    .unwrap()
                    .m;
                let m = donaldson_m(&bg, &href, &h.deformed(&s0, -eps).unwrap(), k, &path)
                    .unwrap()
                    .m;
                (p - m) / (2.0 * eps)
            };
            let rich = (4.0 * fd(1e-4) - fd(2e-4)) / 3.0;
            worst_first = worst_first.max((analytic - rich).abs() / analytic.abs().max(1.0));
        }
    }
    verdict(4, "first variation vs finite difference, 10 directions, k in {1,2}", worst_first, 1e-6);
    let mut worst_second = 0.0_f64;
    for k in [1usize, 2] {
        for _ in 0..5 {
            let kk = Metric::random(&bg, &mut rng, BAND, AMP).unwrap();
            let t = rng.gen_range(0.2..0.8);
            let analytic = second_variation_geodesic(&bg, &h, &kk, k, t).unwrap();
            let mval = |tt: f64| {
                donaldson_m(&bg, &href, &geodesic(&h, &kk, tt).unwrap(), k, &path).unwrap().m
            };
            let fd = |eps: f64| (mval(t + eps) - 2.0 * mval(t) + mval(t - eps)) / (eps * eps);
            let rich = (4.0 * fd(1e-3) - fd(2e-3)) / 3.0;
            worst_second = worst_second.max((analytic - rich).abs() / analytic.abs().max(1.0));
        }
    }
    verdict(4, "second variation vs finite difference, 10 directions, k in {1,2}", worst_second, 1e-5);
}

#[test]
fn criterion_5_curvature_identities() {
    let o = opts();
    let u1 = u1_suite(&o).unwrap();
    let u1_worst = u1
        .checks
        .iter()
        .filter(|c| c.description.starts_with("U1"))
        .map(|c| c.value.abs())
        .fold(0.0, f64::max);
    verdict(5, "telescoping curvature identity pointwise, k in {1,2} (relative sup)", u1_worst, 1e-9);
    let claim = claim1_suite(&o).unwrap();
    verdict(
        5,
        "integrated exactness of the quadrature kernel (relative)",
        claim.checks[0].value,
        1e-7,
    );
    assert!(claim.pass);
    let thm2 = thm2_suite(&o).unwrap();
    verdict(
        5,
        "integration-by-parts identity for curvature squares (relative)",
        thm2.checks[0].value,
        1e-8,
    );
    assert!(thm2.pass);
    let z2 = z2_suite(&o).unwrap();
    verdict(
        5,
        "geodesic derivative bound, 10 geodesics x 11 samples (max violation)",
        z2.checks[0].value,
        1e-8,
    );
}

#[test]
fn criterion_6_positivity() {
    let bg = bg();
    let h = Metric::background(&bg);
    let form = sigma_k_form(&bg, &h, 2, 0).unwrap();
    let d = hbl::hessian::xi_dim(2, RANK);
    let two_pi = 2.0 * std::f64::consts::PI;
    let worst = (min_eigenvalue(&form, d) - two_pi).abs();
    verdict(6, "central sigma_2 form minimum eigenvalue = 2 pi", worst, 1e-8);
    // the one-sided forms split the margin evenly
    let (left, right) = strongly_sigma2_forms(&bg, &h, 0).unwrap();
    let worst_sides = (min_eigenvalue(&left, d) - 0.5 * two_pi)
        .abs()
        .max((min_eigenvalue(&right, d) - 0.5 * two_pi).abs());
    verdict(6, "central one-sided sigma_2 minimum eigenvalues = pi", worst_sides, 1e-8);
    let suite = nakano_suite(&opts()).unwrap();
    verdict(
        6,
        "strongly-sigma2 counterexamples over 1000 positive samples",
        suite.checks[0].value,
        0.0,
    );
    verdict(6, "index oracle vs wedge pipeline (sup)", suite.checks[1].value, 1e-12);
    assert!(suite.pass);
}

#[test]
fn criterion_7_solver() {
    let bg = bg();
    let h0 = Metric::background(&bg);
    let cfg = SolveConfig {
        k: 2,
        tol_residual_sup: 1e-6,
        max_iters: 5000,
        cone_check_interval: 100,
        ..SolveConfig::default()
    };
    let mut solutions = Vec::new();
    for seed in [1071u64, 1072] {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let s = random_hermitian_field(&bg, RANK, &mut rng, BAND, 1.0);
        let start = h0.deformed(&s, 0.1).unwrap();
        let (sol, report) = solve(&bg, &h0, &start, &cfg).unwrap();
        verdict(
            7,
            &format!("residual sup below 1e-6 within budget (seed {seed}, {} iters)", report.iters),
            if report.converged { report.final_residual_sup } else { f64::INFINITY },
            1e-6,
        );
        let monotone = report
            .trace
            .windows(2)
            .map(|w| w[1].m_value - w[0].m_value)
            .fold(f64::NEG_INFINITY, f64::max);
        verdict(
            7,
            &format!("functional decreases at every accepted step (seed {seed}, max increment)"),
            monotone.max(0.0),
            0.0,
        );
        solutions.push(sol);
    }
    let d = gauge_distance(&solutions[0], &solutions[1]).unwrap();
    verdict(7, "two starts agree after gauge fixing (sup distance)", d, 1e-5);
}

#[test]
fn criterion_8_local_minimum() {
    let bg = bg();
    let h = Metric::background(&bg);
    let mut rng = ChaCha8Rng::seed_from_u64(108);
    let rep = local_min_experiment(&bg, &h, 2, 0.01, 100, &mut rng).unwrap();
    let pass = rep.min_diff >= -1e-10 && rep.min_diff.is_finite();
    println!(
        "[{}] criterion 8: M difference over 100 trials at eps = 0.01 (min {:.3e}, floor -1e-10)",
        if pass { "PASS" } else { "FAIL" },
        rep.min_diff
    );
    assert!(pass, "criterion 8 failed: min diff {:.6e}", rep.min_diff);
    verdict(
        8,
        "non-central trials with non-positive M difference",
        rep.nonpositive_noncentral as f64,
        0.0,
    );
}

#[test]
fn criterion_9_reproducible_outputs() {
    let exe = env!("CARGO_BIN_EXE_hbl");
    let dir = tempfile::tempdir().unwrap();
    // identical file names in per-run directories so the manifests (which
    // embed output paths) are comparable byte for byte
    let run = |tag: &str| {
        let sub = dir.path().join(tag);
        std::fs::create_dir(&sub).unwrap();
        let st = std::process::Command::new(exe)
            .current_dir(&sub)
            .args(["--seed", "9", "functional", "--out", "functional.csv"])
            .status()
            .unwrap();
        assert!(st.success());
        let st = std::process::Command::new(exe)
            .current_dir(&sub)
            .args(["--seed", "9", "--grid", "8", "positivity", "--out", "positivity.csv"])
            .status()
            .unwrap();
        assert!(st.success());
        let st = std::process::Command::new(exe)
            .current_dir(&sub)
            .args([
                "--seed",
                "9",
                "report",
                "--out",
                "manifest.json",
                "functional.csv",
                "positivity.csv",
            ])
            .status()
            .unwrap();
        assert!(st.success());
        (
            std::fs::read(sub.join("functional.csv")).unwrap(),
            std::fs::read(sub.join("positivity.csv")).unwrap(),
            std::fs::read(sub.join("manifest.json")).unwrap(),
        )
    };
    let a = run("a");
    let b = run("b");
    let pass = a == b;
    println!(
        "[{}] criterion 9: byte-identical CSV and JSON outputs under identical config and seed",
        if pass { "PASS" } else { "FAIL" }
    );
    assert!(pass, "criterion 9 failed: outputs differ between identical runs");
}

#[test]
fn cli_exit_code_contract() {
    let exe = env!("CARGO_BIN_EXE_hbl");
    let dir = tempfile::tempdir().unwrap();
    let bad = dir.path().join("bad.json");
    std::fs::write(&bad, r#"{"grid": 12}"#).unwrap();
    let st = std::process::Command::new(exe)
        .args(["--config"])
        .arg(&bad)
        .args(["functional"])
        .status()
        .unwrap();
    assert_eq!(st.code(), Some(1), "config errors must exit 1");
    let st = std::process::Command::new(exe)
        .args(["functional", "--a", "/nonexistent/metric.hbl1"])
        .status()
        .unwrap();
    assert_eq!(st.code(), Some(2), "IO errors must exit 2");
}
