//! Numerical index of the linearized vortex map at the reducible point,
//! compared with Riemann–Roch, plus the fixed-point block analysis.
//!
//!     cargo run --release --example index_study

use std::f64::consts::PI;
use vortex_lattice::geometry::TorusGeometry;
use vortex_lattice::topology::riemann_roch;
use vortex_lattice::vortex::{fixed_point_analysis, numerical_index, VortexMap, VortexState};

fn main() -> vortex_lattice::Result<()> {
    for n in [8usize, 12] {
        let geom = TorusGeometry::new(n, 4.0 * PI)?;
        for d in 0..=2i64 {
            let map = VortexMap::new(&geom, d, 1.0, [0.0; 2])?;
            let ix = numerical_index(&map, &VortexState::zeros(&geom))?;
            let fp = fixed_point_analysis(d, n, 4.0 * PI)?;
            println!(
                "n={n} d={d}: index {} = {} + 2·({} − {}) (Riemann–Roch {}), gaps {:.1e}/{:.1e}; \
                 fixed point σ_min {:.3} kernel {} cokernel {}",
                ix.index,
                ix.real_index,
                ix.chiral_plus,
                ix.chiral_minus,
                riemann_roch(d, 1).real_index,
                ix.real.gap,
                ix.complex_gap,
                fp.sigma_min,
                fp.kernel,
                fp.cokernel
            );
        }
    }
    Ok(())
}
