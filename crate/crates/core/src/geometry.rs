//! Flat square torus discretized as an `n × n` periodic lattice.
//!
//! Sites are indexed `s = j·n + i` with `i` the x-index. The x-link of site
//! `s` runs from `(i, j)` to `(i+1, j)` and has index `s`; the y-link runs
//! from `(i, j)` to `(i, j+1)` and has index `n² + s`. Plaquette `s` has
//! `(i, j)` as its lower-left corner.
//!
//! Storage conventions:
//! - 0-cochains hold point values, inner product `h² Σ f g`.
//! - 1-cochains hold line integrals along links, inner product `Σ a b`.
//! - 2-cochains hold integrated fluxes over plaquettes, inner product `h⁻² Σ w v`.
//!
//! With these weights every inner product approximates the continuum `L²`
//! product of the represented form.

use crate::error::{check_len, Result, VortexError};
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;

/// Real cochain of degree `K`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Cochain<const K: usize>(pub Vec<f64>);

pub type Cochain0 = Cochain<0>;
pub type Cochain1 = Cochain<1>;
pub type Cochain2 = Cochain<2>;

impl<const K: usize> Cochain<K> {
    pub fn zeros(len: usize) -> Self {
        Cochain(vec![0.0; len])
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn max_abs(&self) -> f64 {
        self.0.iter().fold(0.0, |m, v| m.max(v.abs()))
    }

    pub fn sum(&self) -> f64 {
        self.0.iter().sum()
    }

    pub fn add(&self, other: &Self) -> Self {
        Cochain(self.0.iter().zip(&other.0).map(|(a, b)| a + b).collect())
    }

    pub fn sub(&self, other: &Self) -> Self {
        Cochain(self.0.iter().zip(&other.0).map(|(a, b)| a - b).collect())
    }

    pub fn scale(&self, s: f64) -> Self {
        Cochain(self.0.iter().map(|a| a * s).collect())
    }
}

/// Discrete model of the square torus `[0, L)²` with `L = sqrt(vol)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TorusGeometry {
    n: usize,
    vol: f64,
    h: f64,
}

/// Direction of a link.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Axis {
    X,
    Y,
}

impl TorusGeometry {
    pub fn new(n: usize, vol: f64) -> Result<Self> {
        if n < 4 {
            return Err(VortexError::InvalidGeometry(format!(
                "need at least 4 sites per side, got {n}"
            )));
        }
        if !(vol > 0.0 && vol.is_finite()) {
            return Err(VortexError::InvalidGeometry(format!(
                "volume must be positive and finite, got {vol}"
            )));
        }
        Ok(Self {
            n,
            vol,
            h: vol.sqrt() / n as f64,
        })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn vol(&self) -> f64 {
        self.vol
    }

    /// Lattice spacing.
    pub fn h(&self) -> f64 {
        self.h
    }

    /// Side length of the fundamental domain.
    pub fn side(&self) -> f64 {
        self.vol.sqrt()
    }

    pub fn num_sites(&self) -> usize {
        self.n * self.n
    }

    pub fn num_links(&self) -> usize {
        2 * self.n * self.n
    }

    pub fn num_plaquettes(&self) -> usize {
        self.n * self.n
    }

    pub fn plaquette_area(&self) -> f64 {
        self.h * self.h
    }

    /// Site index with periodic wrap.
    #[inline]
    pub fn site(&self, i: isize, j: isize) -> usize {
        let n = self.n as isize;
        (j.rem_euclid(n) * n + i.rem_euclid(n)) as usize
    }

    #[inline]
    pub fn coords(&self, s: usize) -> (usize, usize) {
        (s % self.n, s / self.n)
    }

    /// Physical position of a site.
    pub fn position(&self, s: usize) -> (f64, f64) {
        let (i, j) = self.coords(s);
        (i as f64 * self.h, j as f64 * self.h)
    }

    /// Physical position of a plaquette centre.
    pub fn plaquette_center(&self, p: usize) -> (f64, f64) {
        let (i, j) = self.coords(p);
        ((i as f64 + 0.5) * self.h, (j as f64 + 0.5) * self.h)
    }

    #[inline]
    pub fn shift(&self, s: usize, axis: Axis, step: isize) -> usize {
        let (i, j) = self.coords(s);
        match axis {
            Axis::X => self.site(i as isize + step, j as isize),
            Axis::Y => self.site(i as isize, j as isize + step),
        }
    }

    #[inline]
    pub fn link(&self, s: usize, axis: Axis) -> usize {
        match axis {
            Axis::X => s,
            Axis::Y => self.num_sites() + s,
        }
    }

    /// Links of plaquette `p` in counterclockwise order with orientation signs.
    #[inline]
    pub fn plaquette_links(&self, p: usize) -> [(usize, f64); 4] {
        let px = self.shift(p, Axis::X, 1);
        let py = self.shift(p, Axis::Y, 1);
        [
            (self.link(p, Axis::X), 1.0),
            (self.link(px, Axis::Y), 1.0),
            (self.link(py, Axis::X), -1.0),
            (self.link(p, Axis::Y), -1.0),
        ]
    }

    /// Corner sites of plaquette `p`.
    #[inline]
    pub fn plaquette_corners(&self, p: usize) -> [usize; 4] {
        let px = self.shift(p, Axis::X, 1);
        [p, px, self.shift(px, Axis::Y, 1), self.shift(p, Axis::Y, 1)]
    }

    /// The two homology cycles as link sets: the x-links of row 0 and the
    /// y-links of column 0.
    pub fn cycle_basis(&self) -> [Vec<usize>; 2] {
        let n = self.n as isize;
        [
            (0..n).map(|i| self.link(self.site(i, 0), Axis::X)).collect(),
            (0..n).map(|j| self.link(self.site(0, j), Axis::Y)).collect(),
        ]
    }

    pub fn zeros0(&self) -> Cochain0 {
        Cochain::zeros(self.num_sites())
    }

    pub fn zeros1(&self) -> Cochain1 {
        Cochain::zeros(self.num_links())
    }

    pub fn zeros2(&self) -> Cochain2 {
        Cochain::zeros(self.num_plaquettes())
    }

    pub fn inner0(&self, a: &Cochain0, b: &Cochain0) -> Result<f64> {
        check_len(self.num_sites(), a.len())?;
        check_len(self.num_sites(), b.len())?;
        Ok(self.h * self.h * dot(&a.0, &b.0))
    }

    pub fn inner1(&self, a: &Cochain1, b: &Cochain1) -> Result<f64> {
        check_len(self.num_links(), a.len())?;
        check_len(self.num_links(), b.len())?;
        Ok(dot(&a.0, &b.0))
    }

    pub fn inner2(&self, a: &Cochain2, b: &Cochain2) -> Result<f64> {
        check_len(self.num_plaquettes(), a.len())?;
        check_len(self.num_plaquettes(), b.len())?;
        Ok(dot(&a.0, &b.0) / (self.h * self.h))
    }

    /// Forward difference along every link.
    pub fn d0(&self, f: &Cochain0) -> Result<Cochain1> {
        check_len(self.num_sites(), f.len())?;
        let mut out = self.zeros1();
        for s in 0..self.num_sites() {
            out.0[self.link(s, Axis::X)] = f.0[self.shift(s, Axis::X, 1)] - f.0[s];
            out.0[self.link(s, Axis::Y)] = f.0[self.shift(s, Axis::Y, 1)] - f.0[s];
        }
        Ok(out)
    }

    /// Counterclockwise circulation around every plaquette.
    pub fn d1(&self, a: &Cochain1) -> Result<Cochain2> {
        check_len(self.num_links(), a.len())?;
        let mut out = self.zeros2();
        for p in 0..self.num_plaquettes() {
            out.0[p] = self
                .plaquette_links(p)
                .iter()
                .map(|&(l, sgn)| sgn * a.0[l])
                .sum();
        }
        Ok(out)
    }

    pub fn d0_adjoint(&self, a: &Cochain1) -> Result<Cochain0> {
        check_len(self.num_links(), a.len())?;
        let inv_h2 = 1.0 / (self.h * self.h);
        let mut out = self.zeros0();
        for s in 0..self.num_sites() {
            let sx = self.shift(s, Axis::X, -1);
            let sy = self.shift(s, Axis::Y, -1);
            out.0[s] = inv_h2
                * (a.0[self.link(sx, Axis::X)] - a.0[self.link(s, Axis::X)]
                    + a.0[self.link(sy, Axis::Y)]
                    - a.0[self.link(s, Axis::Y)]);
        }
        Ok(out)
    }

    pub fn d1_adjoint(&self, w: &Cochain2) -> Result<Cochain1> {
        check_len(self.num_plaquettes(), w.len())?;
        let inv_h2 = 1.0 / (self.h * self.h);
        let mut out = self.zeros1();
        for p in 0..self.num_plaquettes() {
            for (l, sgn) in self.plaquette_links(p) {
                out.0[l] += inv_h2 * sgn * w.0[p];
            }
        }
        Ok(out)
    }

    /// Scalar Laplacian `d0* d0` (nonnegative).
    pub fn laplacian0(&self, f: &Cochain0) -> Result<Cochain0> {
        self.d0_adjoint(&self.d0(f)?)
    }

    /// Laplacian on 2-cochains `d1 d1*`.
    pub fn laplacian2(&self, w: &Cochain2) -> Result<Cochain2> {
        self.d1(&self.d1_adjoint(w)?)
    }

    /// Coefficients of the constant (harmonic) component of a 1-cochain, in
    /// link units: the mean value over x-links and over y-links.
    pub fn harmonic_part(&self, a: &Cochain1) -> Result<[f64; 2]> {
        check_len(self.num_links(), a.len())?;
        let ns = self.num_sites();
        let mean = |r: &[f64]| r.iter().sum::<f64>() / ns as f64;
        Ok([mean(&a.0[..ns]), mean(&a.0[ns..])])
    }

    /// Constant 1-cochain with the given harmonic coefficients.
    pub fn reconstruct_harmonic(&self, coeffs: [f64; 2]) -> Cochain1 {
        let ns = self.num_sites();
        let mut out = vec![coeffs[0]; ns];
        out.extend(std::iter::repeat(coeffs[1]).take(ns));
        Cochain(out)
    }

    /// Hodge decomposition `a = d0 f + d1* w + harmonic`.
    pub fn hodge_decompose(&self, a: &Cochain1) -> Result<HodgeParts> {
        let harmonic = self.reconstruct_harmonic(self.harmonic_part(a)?);
        let f = solve_zero_mean(|v| self.laplacian0(&Cochain(v.to_vec())).map(|c| c.0), &self.d0_adjoint(a)?.0)?;
        let w = solve_zero_mean(|v| self.laplacian2(&Cochain(v.to_vec())).map(|c| c.0), &self.d1(a)?.0)?;
        Ok(HodgeParts {
            exact: self.d0(&Cochain(f))?,
            coexact: self.d1_adjoint(&Cochain(w))?,
            harmonic,
        })
    }
}

#[derive(Debug, Clone)]
pub struct HodgeParts {
    pub exact: Cochain1,
    pub coexact: Cochain1,
    pub harmonic: Cochain1,
}

impl HodgeParts {
    pub fn sum(&self) -> Cochain1 {
        self.exact.add(&self.coexact).add(&self.harmonic)
    }
}

pub(crate) fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// Conjugate gradients for a symmetric positive semidefinite operator whose
/// kernel is the constants; the right-hand side is projected to zero mean.
fn solve_zero_mean<F>(apply: F, rhs: &[f64]) -> Result<Vec<f64>>
where
    F: Fn(&[f64]) -> Result<Vec<f64>>,
{
    let len = rhs.len();
    let mean = rhs.iter().sum::<f64>() / len as f64;
    let b: Vec<f64> = rhs.iter().map(|v| v - mean).collect();
    let bnorm = dot(&b, &b).sqrt();
    let mut x = vec![0.0; len];
    if bnorm == 0.0 {
        return Ok(x);
    }
    let mut r = b.clone();
    let mut p = r.clone();
    let mut rr = dot(&r, &r);
    for _ in 0..(10 * len).max(100) {
        let ap = apply(&p)?;
        let alpha = rr / dot(&p, &ap);
        for k in 0..len {
            x[k] += alpha * p[k];
            r[k] -= alpha * ap[k];
        }
        let rr_new = dot(&r, &r);
        if rr_new.sqrt() <= 1e-13 * bnorm {
            break;
        }
        let beta = rr_new / rr;
        for k in 0..len {
            p[k] = r[k] + beta * p[k];
        }
        rr = rr_new;
    }
    Ok(x)
}

/// Reduce an angle to `(-π, π]`.
#[inline]
pub fn wrap_angle(theta: f64) -> f64 {
    let mut t = theta.rem_euclid(2.0 * PI);
    if t > PI {
        t -= 2.0 * PI;
    }
    t
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn random<const K: usize>(len: usize, rng: &mut ChaCha8Rng) -> Cochain<K> {
        Cochain((0..len).map(|_| rng.gen_range(-1.0..1.0)).collect())
    }

    #[test]
    fn spacing_examples() {
        assert_eq!(TorusGeometry::new(4, 16.0).unwrap().h(), 1.0);
        let g = TorusGeometry::new(64, 8.0 * PI).unwrap();
        assert!((g.h() - (8.0 * PI).sqrt() / 64.0).abs() < 1e-15);
        assert!(TorusGeometry::new(3, 1.0).is_err());
        assert!(TorusGeometry::new(8, 0.0).is_err());
        assert!(TorusGeometry::new(8, -2.0).is_err());
    }

    #[test]
    fn counts_and_areas() {
        let g = TorusGeometry::new(7, 3.3).unwrap();
        assert_eq!(g.num_sites(), 49);
        assert_eq!(g.num_links(), 98);
        assert_eq!(g.num_plaquettes(), 49);
        let total = g.plaquette_area() * g.num_plaquettes() as f64;
        assert!((total - g.vol()).abs() <= 1e-12 * g.vol());
        let [cx, cy] = g.cycle_basis();
        assert_eq!(cx.len(), 7);
        assert!(cy.iter().all(|&l| l >= g.num_sites()));
    }

    #[test]
    fn d0_of_constant_vanishes() {
        let g = TorusGeometry::new(6, 2.0).unwrap();
        let f = Cochain(vec![3.5; g.num_sites()]);
        assert_eq!(g.d0(&f).unwrap().max_abs(), 0.0);
    }

    #[test]
    fn d_squared_is_zero() {
        let g = TorusGeometry::new(9, 5.0).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let f: Cochain0 = random(g.num_sites(), &mut rng);
        assert!(g.d1(&g.d0(&f).unwrap()).unwrap().max_abs() < 1e-12);
    }

    #[test]
    fn adjunctions_on_random_cochains() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        for trial in 0..100 {
            let g = TorusGeometry::new(4 + trial % 9, 0.5 + trial as f64).unwrap();
            let f: Cochain0 = random(g.num_sites(), &mut rng);
            let a: Cochain1 = random(g.num_links(), &mut rng);
            let w: Cochain2 = random(g.num_plaquettes(), &mut rng);
            let lhs = g.inner1(&g.d0(&f).unwrap(), &a).unwrap();
            let rhs = g.inner0(&f, &g.d0_adjoint(&a).unwrap()).unwrap();
            assert!((lhs - rhs).abs() <= 1e-10 * lhs.abs().max(rhs.abs()).max(1e-300));
            let lhs = g.inner2(&g.d1(&a).unwrap(), &w).unwrap();
            let rhs = g.inner1(&a, &g.d1_adjoint(&w).unwrap()).unwrap();
            assert!((lhs - rhs).abs() <= 1e-10 * lhs.abs().max(rhs.abs()).max(1e-300));
        }
    }

    #[test]
    fn d0_adjoint_sums_to_zero() {
        let g = TorusGeometry::new(8, 4.0).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let a: Cochain1 = random(g.num_links(), &mut rng);
        assert!(g.d0_adjoint(&a).unwrap().sum().abs() < 1e-10);
    }

    #[test]
    fn size_mismatch_is_rejected() {
        let g = TorusGeometry::new(5, 1.0).unwrap();
        assert_eq!(
            g.d0(&Cochain(vec![0.0; 3])),
            Err(VortexError::ShapeMismatch { expected: 25, found: 3 })
        );
        assert!(g.d1(&Cochain(vec![0.0; 7])).is_err());
        assert!(g.d1_adjoint(&Cochain(vec![0.0; 7])).is_err());
    }

    #[test]
    fn harmonic_part_examples() {
        let g = TorusGeometry::new(8, 3.0).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let f: Cochain0 = random(g.num_sites(), &mut rng);
        let h = g.harmonic_part(&g.d0(&f).unwrap()).unwrap();
        assert!(h[0].abs() < 1e-12 && h[1].abs() < 1e-12);

        let mut a = g.zeros1();
        for s in 0..g.num_sites() {
            a.0[g.link(s, Axis::X)] = 0.7;
        }
        let hp = g.harmonic_part(&a).unwrap();
        assert!((hp[0] - 0.7).abs() < 1e-14 && hp[1] == 0.0);

        let a: Cochain1 = random(g.num_links(), &mut rng);
        let rem = a.sub(&g.reconstruct_harmonic(g.harmonic_part(&a).unwrap()));
        for mode in [[1.0, 0.0], [0.0, 1.0]] {
            let m = g.reconstruct_harmonic(mode);
            assert!(g.inner1(&rem, &m).unwrap().abs() < 1e-10);
        }
    }

    #[test]
    fn hodge_decomposition_reconstructs() {
        let g = TorusGeometry::new(10, 6.0).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let a: Cochain1 = random(g.num_links(), &mut rng);
        let parts = g.hodge_decompose(&a).unwrap();
        let err = parts.sum().sub(&a);
        let rel = g.inner1(&err, &err).unwrap().sqrt() / g.inner1(&a, &a).unwrap().sqrt();
        assert!(rel < 1e-8, "relative residual {rel}");
        // pieces are mutually orthogonal
        assert!(g.inner1(&parts.exact, &parts.coexact).unwrap().abs() < 1e-8);
        assert!(g.inner1(&parts.exact, &parts.harmonic).unwrap().abs() < 1e-8);
    }

    #[test]
    fn scalar_laplacian_kernel_is_constants() {
        let g = TorusGeometry::new(6, 2.0).unwrap();
        let ns = g.num_sites();
        let mut m = nalgebra::DMatrix::<f64>::zeros(ns, ns);
        for k in 0..ns {
            let mut e = g.zeros0();
            e.0[k] = 1.0;
            let col = g.laplacian0(&e).unwrap();
            for r in 0..ns {
                m[(r, k)] = col.0[r];
            }
        }
        let mut ev: Vec<f64> = m.symmetric_eigenvalues().iter().copied().collect();
        ev.sort_by(|a, b| a.partial_cmp(b).unwrap());
        assert!(ev[0].abs() < 1e-10);
        // first nonzero mode 4 sin²(π/n)/h²
        let expected = 4.0 * (PI / 6.0).sin().powi(2) / (g.h() * g.h());
        assert!((ev[1] - expected).abs() < 1e-9 * expected);
    }

    #[test]
    fn wrap_angle_range() {
        assert_eq!(wrap_angle(PI), PI);
        assert!((wrap_angle(-PI) - PI).abs() < 1e-15);
        assert!((wrap_angle(3.0 * PI / 2.0) + PI / 2.0).abs() < 1e-15);
    }
}
