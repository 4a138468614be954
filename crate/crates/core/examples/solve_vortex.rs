//! Solve a single degree-1 vortex on the torus of area 8π and print the
//! residual history, the length identity and the located zero.
//!
//!     cargo run --release --example solve_vortex

use std::f64::consts::PI;
use vortex_lattice::solver::{solve, SolveConfig};
use vortex_lattice::verify::locate_zeros;
use vortex_lattice::vortex::VortexMap;

fn main() -> vortex_lattice::Result<()> {
    let cfg = SolveConfig::new(1, 1.0, 8.0 * PI, 64);
    let rep = solve(&cfg)?;
    println!("status {:?}, classification {}", rep.status, rep.classification.as_str());
    for (k, r) in rep.trace.iter().enumerate() {
        println!("  iteration {k:>2}: residual {r:.3e}");
    }
    println!("‖φ‖² = {:.12} (τ·vol − 4πd = {:.12})", rep.phi_norm_sq, 4.0 * PI);
    println!("max|φ|² = {:.6} ≤ τ", rep.max_phi_sq);
    let geom = rep.geometry();
    let conn = VortexMap::new(&geom, 1, 1.0, rep.picard_target_link)?.connection(&rep.state.alpha)?;
    for z in locate_zeros(&conn, &rep.state.phi)?.0 {
        println!("zero at ({:.4}, {:.4}) with multiplicity {}", z.x, z.y, z.multiplicity);
    }
    Ok(())
}
