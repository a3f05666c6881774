//! Run every certification suite and print the verdict.
//!
//! This is the library-level equivalent of `hbl verify`. The options below
//! use a coarse grid and reduced sample counts so the run finishes quickly;
//! tolerances are widened by the documented factor to absorb the coarser
//! discretization. The full-resolution gate lives in the acceptance tests.

use hbl::verify::{run_all, VerifyOptions};

fn main() -> hbl::Result<()> {
    let opts = VerifyOptions {
        grid: 8,
        pairs: 5,
        nakano_samples: 200,
        local_min_trials: 10,
        quad_order: 10,
        amplitude: 0.06,
        tol_scale: 1e3,
        ..Default::default()
    };
    let verdict = run_all(&opts)?;
    for suite in &verdict.suites {
        println!("suite {}: {}", suite.name, if suite.pass { "pass" } else { "FAIL" });
        for c in &suite.checks {
            println!(
                "  [{}] {} (value {:.3e}, tol {:.3e})",
                if c.pass { "ok" } else { "FAIL" },
                c.description,
                c.value,
                c.tol
            );
        }
    }
    println!("{}", serde_json::to_string_pretty(&verdict).expect("verdict serializes"));
    if !verdict.pass {
        std::process::exit(3);
    }
    Ok(())
}
