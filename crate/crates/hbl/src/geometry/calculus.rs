//! Exterior calculus of matrix-valued (p,q)-forms: spectral del/dbar, the
//! non-commutative wedge, trace, contraction against the Kaehler form и
//! integration over the torus.

use super::background::Background;
use super::form::{index_sets, insert_sign, merge_sign, EndForm};
use super::grid::GridField;
use super::spectral;
use crate::error::{HblError, Result};
use crate::linalg::C64;

fn rank_table(n: usize, p: usize) -> Vec<usize> {
    let mut t = vec![usize::MAX; 1 << n];
    for (r, &m) in index_sets(n, p).iter().enumerate() {
        t[m as usize] = r;
    }
    t
}

/// Holomorphic exterior derivative; degree overflow returns the zero form.
pub fn del(bg: &Background, f: &EndForm) -> EndForm {
    let n = f.n;
    let mut out = EndForm::zero(n, f.p + 1, f.q, f.rank, f.points);
    if f.p + 1 > n {
        return out;
    }
    let isets = index_sets(n, f.p);
    let jsets = index_sets(n, f.q);
    let out_rank = rank_table(n, f.p + 1);
    for (ir, &imask) in isets.iter().enumerate() {
        for (jr, _) in jsets.iter().enumerate() {
            let comp = f.comp(ir, jr);
            for alpha in 0..n {
                if imask & (1 << alpha) != 0 {
                    continue;
                }
                let d = spectral::dz(bg, comp, alpha);
                let sign = insert_sign(imask, alpha);
                let nr = out_rank[(imask | (1 << alpha)) as usize];
                out.comp_mut(nr, jr).axpy(C64::new(sign, 0.0), &d);
            }
        }
    }
    out
}

/// Anti-holomorphic exterior derivative; mirrors `del` with the graded sign
/// (-1)^p from moving dzbar past dz^I.
pub fn dbar(bg: &Background, f: &EndForm) -> EndForm {
    let n = f.n;
    let mut out = EndForm::zero(n, f.p, f.q + 1, f.rank, f.points);
    if f.q + 1 > n {
        return out;
    }
    let isets = index_sets(n, f.p);
    let jsets = index_sets(n, f.q);
    let out_rank = rank_table(n, f.q + 1);
    let psign = if f.p % 2 == 0 { 1.0 } else { -1.0 };
    for (ir, _) in isets.iter().enumerate() {
        for (jr, &jmask) in jsets.iter().enumerate() {
            let comp = f.comp(ir, jr);
            for beta in 0..n {
                if jmask & (1 << beta) != 0 {
                    continue;
                }
                let d = spectral::dzbar(bg, comp, beta);
                let sign = psign * insert_sign(jmask, beta);
                let nr = out_rank[(jmask | (1 << beta)) as usize];
                out.comp_mut(ir, nr).axpy(C64::new(sign, 0.0), &d);
            }
        }
    }
    out
}

/// Matrix-product wedge: signed shuffle sum over multi-index splits with
/// pointwise matrix products. Matrix factors do not commute; the graded sign
/// rule only tracks form degrees.
pub fn wedge(a: &EndForm, b: &EndForm) -> EndForm {
    assert_eq!(a.n, b.n, "dimension mismatch");
    assert_eq!(a.points, b.points, "grid mismatch");
    assert!(
        a.rank == b.rank || a.rank == 1 || b.rank == 1,
        "rank mismatch"
    );
    let n = a.n;
    let rank = a.rank.max(b.rank);
    let mut out = EndForm::zero(n, a.p + b.p, a.q + b.q, rank, a.points);
    if a.p + b.p > n || a.q + b.q > n {
        return out;
    }
    let cross = if (a.q * b.p) % 2 == 1 { -1.0 } else { 1.0 };
    let ia = index_sets(n, a.p);
    let ja = index_sets(n, a.q);
    let ib = index_sets(n, b.p);
    let jb = index_sets(n, b.q);
    let out_i = rank_table(n, a.p + b.p);
    let out_j = rank_table(n, a.q + b.q);
    for (ar, &i1) in ia.iter().enumerate() {
        for (arj, &j1) in ja.iter().enumerate() {
            for (br, &i2) in ib.iter().enumerate() {
                if i1 & i2 != 0 {
                    continue;
                }
                for (brj, &j2) in jb.iter().enumerate() {
                    if j1 & j2 != 0 {
                        continue;
                    }
                    let sign = cross * merge_sign(i1, i2) * merge_sign(j1, j2);
                    let prod = a.comp(ar, arj).matmul(b.comp(br, brj));
                    out.comp_mut(out_i[(i1 | i2) as usize], out_j[(j1 | j2) as usize])
                        .axpy(C64::new(sign, 0.0), &prod);
                }
            }
        }
    }
    out
}

/// The unit of the wedge algebra: the constant scalar (0,0)-form 1.
pub fn unit_form(n: usize, points: usize) -> EndForm {
    EndForm::from_field(n, GridField::scalar_constant(points, C64::new(1.0, 0.0)))
}

pub fn wedge_power(f: &EndForm, k: usize) -> EndForm {
    if k == 0 {
        return unit_form(f.n, f.points);
    }
    let mut acc = f.clone();
    for _ in 1..k {
        acc = wedge(&acc, f);
    }
    acc
}

/// omega = i sum g_{ab} dz^a wedge dzbar^b as a constant scalar-rank form.
pub fn kahler_form(bg: &Background, points: usize) -> EndForm {
    let n = bg.n;
    let mut out = EndForm::zero(n, 1, 1, 1, points);
    for a in 0..n {
        for b in 0..n {
            let val = C64::new(0.0, 1.0) * bg.kaehler[a * n + b];
            *out.comp_mut(a, b) = GridField::scalar_constant(points, val);
        }
    }
    out
}

/// Constant central background curvature F_0 = pi*m sum dz^a wedge dzbar^a
/// tensor Id, so that i F_0 = pi*m*omega for the identity Kaehler form.
pub fn background_curvature(bg: &Background, points: usize) -> EndForm {
    let n = bg.n;
    let r = bg.rank;
    let mut out = EndForm::zero(n, 1, 1, r, points);
    let c = std::f64::consts::PI * bg.level as f64;
    for a in 0..n {
        let mut id = GridField::identity(points, r);
        id = id.scale(C64::new(c, 0.0));
        *out.comp_mut(a, a) = id;
    }
    out
}

fn factorial(k: usize) -> f64 {
    (1..=k).map(|i| i as f64).product()
}

/// Coefficient of omega^n / n! on dz^{1..n} wedge dzbar^{1..n}.
pub fn top_coeff(bg: &Background) -> C64 {
    let w = kahler_form(bg, 1);
    let pw = wedge_power(&w, bg.n);
    pw.comps[0].data[0] / factorial(bg.n)
}

/// Divides a top (n,n)-form by the volume form omega^n/n!, returning the
/// matrix-valued density.
pub fn contract_against_volume(bg: &Background, f: &EndForm) -> Result<GridField> {
    if f.p != bg.n || f.q != bg.n {
        return Err(HblError::Config(format!(
            "expected an (n,n)-form, got ({},{})",
            f.p, f.q
        )));
    }
    let c = top_coeff(bg);
    Ok(f.comps[0].scale(c.inv()))
}

/// [f wedge omega^{n-k}/(n-k)!] / [omega^n/n!] for a (k,k)-form f.
pub fn contract_top(bg: &Background, f: &EndForm, j: usize) -> Result<GridField> {
    if f.p != f.q || f.p + j != bg.n {
        return Err(HblError::Config(format!(
            "contract_top degree mismatch: form ({},{}), j={}, n={}",
            f.p, f.q, j, bg.n
        )));
    }
    let wpow = wedge_power(&kahler_form(bg, f.points), j).scale(C64::new(1.0 / factorial(j), 0.0));
    let top = wedge(f, &wpow);
    contract_against_volume(bg, &top)
}

/// Integral of a scalar top form over the torus: grid mean times the
/// real-coordinate density of the top coefficient (unit coordinate volume).
pub fn integrate(bg: &Background, f: &EndForm) -> Result<C64> {
    if f.p != bg.n || f.q != bg.n {
        return Err(HblError::Config(format!(
            "integrate expects an (n,n)-form, got ({},{})",
            f.p, f.q
        )));
    }
    if f.rank != 1 {
        return Err(HblError::Config("integrate expects a scalar form".into()));
    }
    Ok(f.comps[0].scalar_mean() * bg.top_density())
}

/// Kaehler volume of the torus.
pub fn volume(bg: &Background) -> f64 {
    (top_coeff(bg) * bg.top_density()).re
}

/// Integral of a scalar (rank-1) grid function against the volume form.
pub fn integrate_scalar(bg: &Background, f: &GridField) -> C64 {
    assert_eq!(f.r, 1);
    f.scalar_mean() * top_coeff(bg) * bg.top_density()
}

/// H-adjoint of an End(E)-valued (0,1)-form:
/// xi = xi_b dzbar^b  ->  xi^{*H} = h^{-1} (xi_b)^dagger h dz^b.
pub fn adjoint_form(xi: &EndForm, h: &GridField, h_inv: &GridField) -> EndForm {
    assert!(xi.p == 0 && xi.q == 1, "adjoint_form expects a (0,1)-form");
    let n = xi.n;
    let mut out = EndForm::zero(n, 1, 0, xi.rank, xi.points);
    for b in 0..n {
        let adj = xi.comp(0, b).adjoint();
        *out.comp_mut(b, 0) = h_inv.matmul(&adj.matmul(h));
    }
    out
}

/// Dealiasing filter applied to every component of a form.
pub fn band_limit_form(bg: &Background, f: &EndForm, band: usize, taper: Option<f64>) -> EndForm {
    EndForm {
        comps: f
            .comps
            .iter()
            .map(|c| spectral::band_limit(bg, c, band, taper))
            .collect(),
        ..f.clone()
    }
}
