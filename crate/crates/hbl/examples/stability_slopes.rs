//! Degrees and slopes of split bundles.
//!
//! A direct sum of line-bundle powers L^{m_1} + ... + L^{m_r} admits a
//! solution of the k-th power equation exactly when no proper subsum has
//! slope above the total. This example tabulates degrees and slope gaps for
//! a few splittings and flags the destabilizing factors.

use hbl::functional::{deg_slope, split_slopes};
use hbl::geometry::background::Background;

fn main() -> hbl::Result<()> {
    for levels in [vec![1i64, 1], vec![1, 2], vec![1, 1, 3], vec![2, -1]] {
        // the background object carries the total level; slopes only need n
        // and the grid resolution
        let bg = Background::new(2, 8, levels.len(), 1)?;
        let all: Vec<usize> = (0..levels.len()).collect();
        let (deg, total) = deg_slope(&bg, &levels, &all, 1)?;
        println!("levels {levels:?}: degree {deg:.6}, slope {total:.6}");
        let mut stable = true;
        for (sub, slope, gap) in split_slopes(&bg, &levels, 1)? {
            let subs: Vec<i64> = sub.iter().map(|&i| levels[i]).collect();
            println!("  factor {subs:?}: slope {slope:+.6}, gap {gap:+.6}");
            if gap > 1e-12 {
                stable = false;
            }
        }
        println!(
            "  -> {}",
            if stable {
                "no destabilizing subsum; a solution exists"
            } else {
                "destabilized; no solution for this splitting"
            }
        );
    }
    Ok(())
}
