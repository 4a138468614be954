//! Continue a degree-1 solution in τ, warm-starting each stage from the
//! previous one, and compare ‖φ‖² with the length identity τ·vol − 4πd.
//!
//!     cargo run --release --example tau_continuation

use std::f64::consts::PI;
use vortex_lattice::solver::{continue_in_tau, SolveConfig};

fn main() -> vortex_lattice::Result<()> {
    let cfg = SolveConfig::new(1, 1.0, 8.0 * PI, 32);
    let schedule = [2.0, 1.5, 1.0, 0.75, 0.6, 0.52, 0.5];
    for (tau, stage) in schedule.iter().zip(continue_in_tau(&cfg, &schedule)?) {
        match stage {
            Ok(rep) => println!(
                "τ={tau:<5} {:<14} ‖φ‖² {:>9.6} (identity {:>9.6}) max|φ|² {:.4} iterations {}",
                rep.classification.as_str(),
                rep.phi_norm_sq,
                (tau * cfg.vol - 4.0 * PI).max(0.0),
                rep.max_phi_sq,
                rep.iterations
            ),
            Err(e) => println!("τ={tau}: {e}"),
        }
    }
    Ok(())
}
