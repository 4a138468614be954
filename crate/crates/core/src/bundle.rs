//! Degree-`d` Hermitian line bundle on the lattice torus.
//!
//! Sign convention: parallel transport along a link is `exp(i·θ)` with
//! `θ = base + alpha`. The counterclockwise plaquette angle of the base
//! connection is `-2πd/n²`, and the curvature scalar is
//! `i⋆F = -(reduced plaquette angle)/area`, so that `i⋆F_B = 2πd/vol` and
//! `degree = -Σ_p reduced_angle / 2π = d`. All other modules use these
//! definitions through [`Connection::plaquette_angles`].
//!
//! The base connection is a Landau-type gauge: y-links in column `i` carry
//! `Φ·i` and the x-links leaving column `n-1` carry the accumulated offset
//! `-Φ·n·j`, where `Φ = -2πd/n²` is the flux per plaquette.

use crate::error::{check_len, Result, VortexError};
use crate::geometry::{wrap_angle, Axis, Cochain0, Cochain1, Cochain2, TorusGeometry};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;

/// Reduced plaquette angles closer than this to `±π` are treated as ambiguous.
pub const BRANCH_TOLERANCE: f64 = 1e-9;

/// Unitary connection `A = B + iα` on the degree-`d` bundle.
#[derive(Debug, Clone, PartialEq)]
pub struct Connection {
    geom: TorusGeometry,
    degree: i64,
    base: Cochain1,
    pub alpha: Cochain1,
}

/// The Higgs field: one complex value per site.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Section(pub Vec<Complex64>);

impl Section {
    pub fn constant(len: usize, value: Complex64) -> Self {
        Section(vec![value; len])
    }

    pub fn zeros(len: usize) -> Self {
        Self::constant(len, Complex64::new(0.0, 0.0))
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    /// `|φ|²` per site.
    pub fn pointwise_norm_sq(&self) -> Vec<f64> {
        self.0.iter().map(|z| z.norm_sqr()).collect()
    }

    /// `‖φ‖² = h² Σ |φ|²`.
    pub fn norm_sq(&self, geom: &TorusGeometry) -> f64 {
        geom.plaquette_area() * self.0.iter().map(|z| z.norm_sqr()).sum::<f64>()
    }

    pub fn max_norm_sq(&self) -> f64 {
        self.0.iter().fold(0.0, |m, z| m.max(z.norm_sqr()))
    }

    /// Hermitian inner product `h² Σ conj(a) b`.
    pub fn inner(&self, other: &Section, geom: &TorusGeometry) -> Complex64 {
        geom.plaquette_area()
            * self
                .0
                .iter()
                .zip(&other.0)
                .map(|(a, b)| a.conj() * b)
                .sum::<Complex64>()
    }
}

/// Gauge transformation `u = exp(2πi(f + w_x·x/L + w_y·y/L))`.
#[derive(Debug, Clone, PartialEq)]
pub struct GaugeTransformation {
    pub f: Cochain0,
    pub winding: (i64, i64),
}

impl GaugeTransformation {
    pub fn inverse(&self) -> Self {
        Self {
            f: self.f.scale(-1.0),
            winding: (-self.winding.0, -self.winding.1),
        }
    }

    /// Phase angle `2π(f + w·x/L)` at every site.
    fn phase(&self, geom: &TorusGeometry) -> Vec<f64> {
        let n = geom.n() as f64;
        (0..geom.num_sites())
            .map(|s| {
                let (i, j) = geom.coords(s);
                2.0 * PI
                    * (self.f.0[s]
                        + self.winding.0 as f64 * i as f64 / n
                        + self.winding.1 as f64 * j as f64 / n)
            })
            .collect()
    }
}

/// Point of the Picard torus in fractional coordinates `[0, 1)²`; one unit
/// corresponds to one large-gauge shift of the harmonic part.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PicardPoint {
    pub x: f64,
    pub y: f64,
}

impl PicardPoint {
    /// Distance on the unit torus.
    pub fn distance(&self, other: &PicardPoint) -> f64 {
        let dx = (self.x - other.x).rem_euclid(1.0);
        let dy = (self.y - other.y).rem_euclid(1.0);
        dx.min(1.0 - dx).hypot(dy.min(1.0 - dy))
    }
}

/// Unitary base connection with constant curvature `i⋆F_B = 2πd/vol`.
pub fn base_connection(geom: &TorusGeometry, d: i64) -> Connection {
    let n = geom.n();
    let flux = -2.0 * PI * d as f64 / (n * n) as f64;
    let mut base = geom.zeros1();
    for s in 0..geom.num_sites() {
        let (i, j) = geom.coords(s);
        base.0[geom.link(s, Axis::Y)] = flux * i as f64;
        if i == n - 1 {
            base.0[geom.link(s, Axis::X)] = -flux * (n * j) as f64;
        }
    }
    Connection {
        geom: *geom,
        degree: d,
        alpha: geom.zeros1(),
        base,
    }
}

impl Connection {
    pub fn with_alpha(mut self, alpha: Cochain1) -> Result<Self> {
        check_len(self.geom.num_links(), alpha.len())?;
        self.alpha = alpha;
        Ok(self)
    }

    pub fn geometry(&self) -> &TorusGeometry {
        &self.geom
    }

    /// Degree the connection was constructed for.
    pub fn bundle_degree(&self) -> i64 {
        self.degree
    }

    pub fn base_angles(&self) -> &Cochain1 {
        &self.base
    }

    #[inline]
    pub fn link_angle(&self, l: usize) -> f64 {
        self.base.0[l] + self.alpha.0[l]
    }

    #[inline]
    pub fn transport(&self, s: usize, axis: Axis) -> Complex64 {
        Complex64::from_polar(1.0, self.link_angle(self.geom.link(s, axis)))
    }

    /// Counterclockwise plaquette angles reduced to `(-π, π]`.
    pub fn plaquette_angles(&self) -> Result<Cochain2> {
        let g = &self.geom;
        let mut out = g.zeros2();
        for p in 0..g.num_plaquettes() {
            let raw: f64 = g
                .plaquette_links(p)
                .iter()
                .map(|&(l, sgn)| sgn * self.link_angle(l))
                .sum();
            let reduced = wrap_angle(raw);
            if PI - reduced.abs() < BRANCH_TOLERANCE {
                return Err(VortexError::BranchCut {
                    plaquette: p,
                    angle: reduced,
                });
            }
            out.0[p] = reduced;
        }
        Ok(out)
    }

    /// First Chern number `(i/2π)∫F_A`, computed from the reduced holonomies.
    pub fn degree(&self) -> Result<i64> {
        let total = -self.plaquette_angles()?.sum() / (2.0 * PI);
        let rounded = total.round();
        debug_assert!((total - rounded).abs() < 1e-6, "non-integral flux {total}");
        Ok(rounded as i64)
    }

    /// Picard coordinate of the connection relative to the base point `[B]`.
    pub fn picard_coordinate(&self) -> PicardPoint {
        let [hx, hy] = self
            .geom
            .harmonic_part(&self.alpha)
            .expect("alpha is sized by construction");
        let quantum = 2.0 * PI / self.geom.n() as f64;
        PicardPoint {
            x: (hx / quantum).rem_euclid(1.0),
            y: (hy / quantum).rem_euclid(1.0),
        }
    }
}

/// Act with `g` on the pair `(φ, A)`: `φ ↦ uφ`, `α ↦ α - 2π·df - winding`.
pub fn gauge_transform(
    g: &GaugeTransformation,
    phi: &Section,
    conn: &Connection,
) -> Result<(Section, Connection)> {
    let geom = conn.geometry();
    check_len(geom.num_sites(), phi.len())?;
    check_len(geom.num_sites(), g.f.len())?;
    let chi = g.phase(geom);
    let new_phi = Section(
        phi.0
            .iter()
            .zip(&chi)
            .map(|(z, c)| z * Complex64::from_polar(1.0, *c))
            .collect(),
    );
    let df = geom.d0(&g.f)?;
    let n = geom.n() as f64;
    let mut alpha = conn.alpha.sub(&df.scale(2.0 * PI));
    let ns = geom.num_sites();
    for v in &mut alpha.0[..ns] {
        *v -= 2.0 * PI * g.winding.0 as f64 / n;
    }
    for v in &mut alpha.0[ns..] {
        *v -= 2.0 * PI * g.winding.1 as f64 / n;
    }
    let mut new_conn = conn.clone();
    new_conn.alpha = alpha;
    Ok((new_phi, new_conn))
}
