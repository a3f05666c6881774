//! Curvature difference identities and Chern-Weil invariance.
//!
//! For two metrics H, K with relative endomorphism h = K^{-1} H the
//! difference of curvature powers telescopes,
//!
//!   (iF_H)^k - (iF_K)^k
//!     = sum_i (iF_H)^{k-i} wedge i dbar(h^{-1} del_K h) wedge (iF_K)^{i-1},
//!
//! and the integrals of tr (iF)^k wedge omega^{n-k} do not depend on the
//! metric at all. Both facts are checked numerically here.

use hbl::bundle::{curvature, Metric};
use hbl::functional::lambda_k_from_metric;
use hbl::geometry::background::Background;
use hbl::geometry::form::EndForm;
use hbl::geometry::calculus::{wedge, wedge_power};
use hbl::linalg::C64;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn main() -> hbl::Result<()> {
    let bg = Background::new(2, 16, 2, 1)?;
    let mut rng = ChaCha8Rng::seed_from_u64(31);
    let h = Metric::random(&bg, &mut rng, 2, 0.15)?;
    let k_metric = Metric::random(&bg, &mut rng, 2, 0.15)?;

    let i_fh = curvature(&bg, &h).scale(C64::new(0.0, 1.0));
    let i_fk = curvature(&bg, &k_metric).scale(C64::new(0.0, 1.0));
    let mid = i_fh.sub(&i_fk);

    for k in [1usize, 2] {
        let lhs = wedge_power(&i_fh, k).sub(&wedge_power(&i_fk, k));
        let mut rhs = EndForm::zero(bg.n, k, k, bg.rank, bg.points());
        for i in 1..=k {
            rhs = rhs.add(&wedge(
                &wedge(&wedge_power(&i_fh, k - i), &mid),
                &wedge_power(&i_fk, i - 1),
            ));
        }
        println!(
            "telescoping identity, k={k}: sup|lhs - rhs| = {:.3e} (scale {:.3e})",
            lhs.sub(&rhs).sup_norm(),
            lhs.sup_norm()
        );
    }

    for k in [1usize, 2] {
        let a = lambda_k_from_metric(&bg, &h, k)?;
        let b = lambda_k_from_metric(&bg, &k_metric, k)?;
        println!("Chern-Weil invariant lambda_{k}: H gives {a:.12}, K gives {b:.12}");
    }
    Ok(())
}
