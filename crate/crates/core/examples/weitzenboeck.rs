//! First-order convergence of the lattice Weitzenböck defect
//! ⟨φ, ∇*∇φ − 2∂̄*∂̄φ − i⋆F φ⟩ / ‖φ‖² on a fixed smooth section.
//!
//!     cargo run --release --example weitzenboeck

use std::f64::consts::PI;
use vortex_lattice::bundle::base_connection;
use vortex_lattice::geometry::TorusGeometry;
use vortex_lattice::operators::{smooth_test_section, weitzenboeck_defect};

fn main() -> vortex_lattice::Result<()> {
    let mut previous: Option<f64> = None;
    for n in [16usize, 32, 64, 128] {
        let g = TorusGeometry::new(n, 8.0 * PI)?;
        let defect = weitzenboeck_defect(&base_connection(&g, 1), &smooth_test_section(&g, 1, 1))?;
        match previous {
            Some(p) => println!("n={n:>3}: defect {defect:.4e}, ratio {:.3}", p / defect),
            None => println!("n={n:>3}: defect {defect:.4e}"),
        }
        previous = Some(defect);
    }
    Ok(())
}
