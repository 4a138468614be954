//! Covariant difference operators built on the link transports.
//!
//! `D_μ φ(s) = (U_μ(s) φ(s+μ) - φ(s)) / h` is the forward covariant
//! difference; `∂̄_A = ½(D_x + i D_y)`. (0,1)-forms carry inner product
//! `2h² Σ conj(ψ) χ` (`|dz̄|² = 2`), which makes `d*_A d_A = 2∂̄*_A ∂̄_A + i⋆F_A`
//! hold with its continuum constants.

use crate::bundle::{Connection, Section};
use crate::error::{check_len, Result, VortexError};
use crate::geometry::{Axis, Cochain2, TorusGeometry};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

const I: Complex64 = Complex64::new(0.0, 1.0);

/// `dz̄`-coefficient of an `L`-valued (0,1)-form, one value per site.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct AntiHolomorphicForm(pub Vec<Complex64>);

impl AntiHolomorphicForm {
    pub fn inner(&self, other: &AntiHolomorphicForm, geom: &TorusGeometry) -> Complex64 {
        2.0 * geom.plaquette_area()
            * self
                .0
                .iter()
                .zip(&other.0)
                .map(|(a, b)| a.conj() * b)
                .sum::<Complex64>()
    }

    pub fn norm_sq(&self, geom: &TorusGeometry) -> f64 {
        self.inner(self, geom).re
    }

    pub fn max_abs(&self) -> f64 {
        self.0.iter().fold(0.0, |m, z| m.max(z.norm()))
    }
}

/// Forward covariant difference along `axis`.
pub fn covariant_diff(c: &Connection, phi: &Section, axis: Axis) -> Result<Section> {
    let g = c.geometry();
    check_len(g.num_sites(), phi.len())?;
    let inv_h = 1.0 / g.h();
    Ok(Section(
        (0..g.num_sites())
            .map(|s| (c.transport(s, axis) * phi.0[g.shift(s, axis, 1)] - phi.0[s]) * inv_h)
            .collect(),
    ))
}

/// Adjoint of [`covariant_diff`] for the site inner product.
pub fn covariant_diff_adjoint(c: &Connection, chi: &Section, axis: Axis) -> Result<Section> {
    let g = c.geometry();
    check_len(g.num_sites(), chi.len())?;
    let inv_h = 1.0 / g.h();
    Ok(Section(
        (0..g.num_sites())
            .map(|s| {
                let back = g.shift(s, axis, -1);
                (c.transport(back, axis).conj() * chi.0[back] - chi.0[s]) * inv_h
            })
            .collect(),
    ))
}

pub fn dbar(c: &Connection, phi: &Section) -> Result<AntiHolomorphicForm> {
    let dx = covariant_diff(c, phi, Axis::X)?;
    let dy = covariant_diff(c, phi, Axis::Y)?;
    Ok(AntiHolomorphicForm(
        dx.0.iter().zip(&dy.0).map(|(a, b)| 0.5 * (a + I * b)).collect(),
    ))
}

pub fn dbar_adjoint(c: &Connection, psi: &AntiHolomorphicForm) -> Result<Section> {
    let chi = Section(psi.0.clone());
    let ax = covariant_diff_adjoint(c, &chi, Axis::X)?;
    let ay = covariant_diff_adjoint(c, &chi, Axis::Y)?;
    Ok(Section(ax.0.iter().zip(&ay.0).map(|(a, b)| a - I * b).collect()))
}

/// Bochner Laplacian `d*_A d_A = Σ_μ D_μ* D_μ`.
pub fn bochner_laplacian(c: &Connection, phi: &Section) -> Result<Section> {
    let mut out = Section::zeros(phi.len());
    for axis in [Axis::X, Axis::Y] {
        let t = covariant_diff_adjoint(c, &covariant_diff(c, phi, axis)?, axis)?;
        for (o, v) in out.0.iter_mut().zip(t.0) {
            *o += v;
        }
    }
    Ok(out)
}

/// `i⋆F_A` per plaquette.
pub fn curvature_scalar(c: &Connection) -> Result<Cochain2> {
    let g = c.geometry();
    Ok(c.plaquette_angles()?.scale(-1.0 / g.plaquette_area()))
}

/// `i⋆F_A` at sites: mean over the four plaquettes touching the site.
pub fn site_curvature(c: &Connection) -> Result<Vec<f64>> {
    let g = c.geometry();
    let k = curvature_scalar(c)?;
    Ok((0..g.num_sites())
        .map(|s| {
            let sx = g.shift(s, Axis::X, -1);
            let sy = g.shift(s, Axis::Y, -1);
            let sxy = g.shift(sx, Axis::Y, -1);
            0.25 * (k.0[s] + k.0[sx] + k.0[sy] + k.0[sxy])
        })
        .collect())
}

/// Relative defect of the Weitzenböck identity,
/// `|⟨d*d φ, φ⟩ - 2⟨∂̄*∂̄ φ, φ⟩ - ⟨i⋆F φ, φ⟩| / ‖φ‖²`.
pub fn weitzenboeck_defect(c: &Connection, phi: &Section) -> Result<f64> {
    let g = c.geometry();
    check_len(g.num_sites(), phi.len())?;
    let norm = phi.norm_sq(g);
    if norm == 0.0 {
        return Err(VortexError::ZeroSection);
    }
    let bochner = phi.inner(&bochner_laplacian(c, phi)?, g).re;
    let dolbeault = phi.inner(&dbar_adjoint(c, &dbar(c, phi)?)?, g).re;
    let kappa = site_curvature(c)?;
    let curv = g.plaquette_area()
        * phi
            .0
            .iter()
            .zip(&kappa)
            .map(|(z, k)| k * z.norm_sqr())
            .sum::<f64>();
    Ok((bochner - 2.0 * dolbeault - curv).abs() / norm)
}

/// Smooth section of the degree-`d` bundle adapted to the base gauge: a
/// periodized Gaussian profile in `x` whose periodic images carry the seam
/// transition `exp(2πi·d·y/L)`, times the plane wave `exp(2πi·q·y/L)`.
pub fn smooth_test_section(geom: &TorusGeometry, d: i64, q: i64) -> Section {
    let side = geom.side();
    let (x0, sigma) = (0.3 * side, 0.2 * side);
    Section(
        (0..geom.num_sites())
            .map(|s| {
                let (x, y) = geom.position(s);
                (-6..=6)
                    .map(|m: i64| {
                        let dx = x + m as f64 * side - x0;
                        let phase = 2.0 * std::f64::consts::PI * (q - d * m) as f64 * y / side;
                        Complex64::from_polar((-dx * dx / (2.0 * sigma * sigma)).exp(), phase)
                    })
                    .sum()
            })
            .collect(),
    )
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bundle::{base_connection, gauge_transform, GaugeTransformation};
    use crate::geometry::Cochain;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;
    use std::f64::consts::PI;

    fn random_section(n: usize, rng: &mut ChaCha8Rng) -> Section {
        Section((0..n).map(|_| Complex64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0))).collect())
    }

    #[test]
    fn constant_is_holomorphic_in_trivial_bundle() {
        let g = TorusGeometry::new(8, 4.0).unwrap();
        let c = base_connection(&g, 0);
        let phi = Section::constant(g.num_sites(), Complex64::new(1.0, 0.0));
        assert_eq!(dbar(&c, &phi).unwrap().max_abs(), 0.0);
    }

    #[test]
    fn plane_wave_truncation_error_is_first_order() {
        // exp(2πi k z / L) is holomorphic; the forward stencil error is O(h).
        let errs: Vec<f64> = [16usize, 32, 64]
            .iter()
            .map(|&n| {
                let g = TorusGeometry::new(n, 4.0).unwrap();
                let c = base_connection(&g, 0);
                let side = g.side();
                let phi = Section(
                    (0..g.num_sites())
                        .map(|s| {
                            let (x, y) = g.position(s);
                            // k = 1 in x; the y-dependence makes it holomorphic
                            let z = Complex64::new(x, y);
                            (2.0 * PI * I * z / side).exp()
                        })
                        .collect(),
                );
                // the sampled function is not periodic in y; skip the seam row
                let psi = dbar(&c, &phi).unwrap();
                (0..g.num_sites() - n).map(|s| psi.0[s].norm()).fold(0.0, f64::max)
            })
            .collect();
        for w in errs.windows(2) {
            let ratio = w[0] / w[1];
            assert!((1.8..2.2).contains(&ratio), "ratio {ratio}");
        }
    }

    #[test]
    fn dbar_is_gauge_covariant() {
        let g = TorusGeometry::new(8, 6.0).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(21);
        let phi = random_section(g.num_sites(), &mut rng);
        let c = base_connection(&g, 2);
        let t = GaugeTransformation {
            f: Cochain((0..g.num_sites()).map(|_| rng.gen_range(-1.0..1.0)).collect()),
            winding: (2, 1),
        };
        let before = dbar(&c, &phi).unwrap();
        let (p2, c2) = gauge_transform(&t, &phi, &c).unwrap();
        let after = dbar(&c2, &p2).unwrap();
        for s in 0..g.num_sites() {
            let u = p2.0[s] / phi.0[s];
            assert!((after.0[s] - u * before.0[s]).norm() < 1e-12);
        }
    }

    #[test]
    fn dbar_adjunction() {
        let mut rng = ChaCha8Rng::seed_from_u64(22);
        for n in [5usize, 8, 13] {
            let g = TorusGeometry::new(n, 3.0 + n as f64).unwrap();
            let alpha = Cochain((0..g.num_links()).map(|_| rng.gen_range(-0.5..0.5)).collect());
            let c = base_connection(&g, 1).with_alpha(alpha).unwrap();
            let phi = random_section(g.num_sites(), &mut rng);
            let psi = AntiHolomorphicForm(random_section(g.num_sites(), &mut rng).0);
            let lhs = dbar(&c, &phi).unwrap().inner(&psi, &g);
            let rhs = phi.inner(&dbar_adjoint(&c, &psi).unwrap(), &g);
            assert!((lhs - rhs).norm() <= 1e-10 * lhs.norm());
        }
    }

    #[test]
    fn dbar_adjoint_examples() {
        let g = TorusGeometry::new(6, 2.0).unwrap();
        let c = base_connection(&g, 0);
        let zero = AntiHolomorphicForm(vec![Complex64::new(0.0, 0.0); g.num_sites()]);
        assert!(dbar_adjoint(&c, &zero).unwrap().0.iter().all(|z| z.norm() == 0.0));
        let mut rng = ChaCha8Rng::seed_from_u64(23);
        let phi = random_section(g.num_sites(), &mut rng);
        let psi = dbar(&c, &phi).unwrap();
        assert!(dbar_adjoint(&c, &psi).unwrap().inner(&phi, &g).re >= 0.0);
    }

    #[test]
    fn curvature_examples() {
        let g = TorusGeometry::new(10, 5.0).unwrap();
        for d in [0i64, 1, 3] {
            let k = curvature_scalar(&base_connection(&g, d)).unwrap();
            let expected = 2.0 * PI * d as f64 / g.vol();
            assert!(k.0.iter().all(|v| (v - expected).abs() < 1e-10));
            let integral = k.sum() * g.plaquette_area();
            assert!((integral - 2.0 * PI * d as f64).abs() < 1e-10);
        }
    }

    #[test]
    fn weitzenboeck_exact_for_flat_real_sections() {
        let g = TorusGeometry::new(9, 3.0).unwrap();
        let c = base_connection(&g, 0);
        let mut rng = ChaCha8Rng::seed_from_u64(24);
        let phi = Section((0..g.num_sites()).map(|_| Complex64::new(rng.gen_range(-1.0..1.0), 0.0)).collect());
        assert!(weitzenboeck_defect(&c, &phi).unwrap() < 1e-10);
    }

    #[test]
    fn weitzenboeck_defect_converges_first_order() {
        let vol = 8.0 * PI;
        let defect = |n: usize| {
            let g = TorusGeometry::new(n, vol).unwrap();
            weitzenboeck_defect(&base_connection(&g, 1), &smooth_test_section(&g, 1, 1)).unwrap()
        };
        let ratio = defect(16) / defect(32);
        assert!((1.6..=2.4).contains(&ratio), "ratio {ratio}");
    }

    #[test]
    fn zero_section_is_rejected() {
        let g = TorusGeometry::new(4, 1.0).unwrap();
        let c = base_connection(&g, 1);
        assert_eq!(
            weitzenboeck_defect(&c, &Section::zeros(g.num_sites())),
            Err(VortexError::ZeroSection)
        );
    }
}
