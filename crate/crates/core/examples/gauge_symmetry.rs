//! Apply random gauge transformations (with windings) to a random field and
//! show that the residual norms, curvature and |φ| do not move.
//!
//!     cargo run --release --example gauge_symmetry

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use vortex_lattice::bundle::{gauge_transform, GaugeTransformation, Section};
use vortex_lattice::geometry::{Cochain, TorusGeometry};
use vortex_lattice::operators::curvature_scalar;
use vortex_lattice::vortex::{VortexMap, VortexState};

fn main() -> vortex_lattice::Result<()> {
    let geom = TorusGeometry::new(16, 10.0)?;
    let map = VortexMap::new(&geom, 2, 1.0, [0.0; 2])?;
    let mut rng = ChaCha8Rng::seed_from_u64(0);
    let ns = geom.num_sites();
    let state = VortexState {
        phi: Section((0..ns).map(|_| Complex64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0))).collect()),
        alpha: Cochain((0..2 * ns).map(|_| rng.gen_range(-0.2..0.2)).collect()),
    };
    let conn = map.connection(&state.alpha)?;
    let before = map.residual(&state)?.norms(&geom);
    let kappa = curvature_scalar(&conn)?;
    for k in 0..5 {
        let gt = GaugeTransformation {
            f: Cochain((0..ns).map(|_| rng.gen_range(-1.0..1.0)).collect()),
            winding: (k - 2, 2 - k),
        };
        let (phi, conn2) = gauge_transform(&gt, &state.phi, &conn)?;
        let moved = VortexState { phi, alpha: conn2.alpha.clone() };
        let after = map.residual(&moved)?.norms(&geom);
        let dk = curvature_scalar(&conn2)?.sub(&kappa).max_abs();
        let dphi = state.phi.0.iter().zip(&moved.phi.0).map(|(a, b)| (a.norm() - b.norm()).abs()).fold(0.0, f64::max);
        println!(
            "winding {:?}: Δ‖∂̄φ‖ {:.1e}, Δ‖b‖ {:.1e}, Δ curvature {dk:.1e}, Δ|φ| {dphi:.1e}",
            gt.winding,
            (after.psi - before.psi).abs(),
            (after.b - before.b).abs()
        );
    }
    Ok(())
}
