//! Pointwise positivity cones of the curvature.
//!
//! The k-th power equation is elliptic only while the curvature stays in the
//! Garding-type cone sigma_k; the sharper one-sided "strongly sigma_2"
//! cones control the Hessian of the energy functional. For the background
//! metric the one-sided sigma_2 forms have minimum eigenvalue exactly
//! 2 pi; a random deformation erodes the margin without leaving the cone
//! when the amplitude is small.

use hbl::bundle::Metric;
use hbl::hessian::{cone_report, ConeKind};
use hbl::geometry::background::Background;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn main() -> hbl::Result<()> {
    let bg = Background::new(2, 8, 2, 1)?;
    let mut rng = ChaCha8Rng::seed_from_u64(11);

    for (label, m) in [
        ("background".to_string(), Metric::background(&bg)),
        ("random deformation".to_string(), Metric::random(&bg, &mut rng, 2, 0.2)?),
    ] {
        println!("metric: {label}");
        for cone in [ConeKind::SigmaK(1), ConeKind::SigmaK(2), ConeKind::Sigma2Left, ConeKind::Sigma2Right]
        {
            let rep = cone_report(&bg, &m, cone, None)?;
            println!(
                "  {:<13} min eig {:+.6e} at point {:>5} over {} points -> {}",
                rep.cone,
                rep.min_eig,
                rep.argmin_point,
                rep.sampled_points,
                if rep.positive { "inside the cone" } else { "OUTSIDE the cone" }
            );
        }
    }

    // a negative level pushes the curvature out of the cones where it
    // enters (k >= 2; the k = 1 form is the curvature-free metric pairing)
    let bg_neg = Background::new(2, 8, 2, -1)?;
    let rep = cone_report(&bg_neg, &Metric::background(&bg_neg), ConeKind::SigmaK(2), None)?;
    println!(
        "level -1 background: sigma_2 min eig {:+.6e} -> {}",
        rep.min_eig,
        if rep.positive { "inside the cone" } else { "OUTSIDE the cone" }
    );
    Ok(())
}
