//! The vortex map as a nonlinear residual, its linearization, and index
//! computations at decoupled base points.
//!
//! Unknowns are packed as `x = [Re φ, Im φ, α]` (length `4N`, `N = n²`).
//! The weighted residual vector has length `4N + 2`, ordered
//! `[√2h·Re ψ, √2h·Im ψ, h·b, n·h_α, h·d*α]`, so that its Euclidean norm is
//! the sum of the component `L²` norms.

use crate::bundle::{base_connection, Connection, Section};
use crate::error::{check_len, Result, VortexError};
use crate::geometry::{Axis, Cochain, Cochain0, Cochain1, TorusGeometry};
use crate::operators::{curvature_scalar, dbar, AntiHolomorphicForm};
use crate::sparse::{CsrBuilder, CsrMatrix};
use nalgebra::{DMatrix, SymmetricEigen};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use std::f64::consts::{PI, SQRT_2};

const I: Complex64 = Complex64::new(0.0, 1.0);

/// Largest `n` for which dense assembly is allowed.
pub const DENSE_LIMIT: usize = 16;
/// Relative singular-value cutoff for counting zero modes.
pub const ZERO_THRESHOLD: f64 = 1e-8;
/// Required ratio between the smallest counted nonzero and the largest
/// counted zero singular value.
pub const REQUIRED_GAP: f64 = 1e3;

/// A point `(φ, α)` of the configuration space.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VortexState {
    pub phi: Section,
    pub alpha: Cochain1,
}

impl VortexState {
    pub fn zeros(geom: &TorusGeometry) -> Self {
        Self {
            phi: Section::zeros(geom.num_sites()),
            alpha: geom.zeros1(),
        }
    }

    /// `[Re φ, Im φ, α]`.
    pub fn pack(&self) -> Vec<f64> {
        let mut x: Vec<f64> = self.phi.0.iter().map(|z| z.re).collect();
        x.extend(self.phi.0.iter().map(|z| z.im));
        x.extend_from_slice(&self.alpha.0);
        x
    }

    pub fn unpack(geom: &TorusGeometry, x: &[f64]) -> Result<Self> {
        let ns = geom.num_sites();
        check_len(4 * ns, x.len())?;
        Ok(Self {
            phi: Section((0..ns).map(|s| Complex64::new(x[s], x[ns + s])).collect()),
            alpha: Cochain(x[2 * ns..].to_vec()),
        })
    }
}

/// The four components of the vortex map.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VortexResidual {
    /// `ψ = ∂̄_A φ`.
    pub psi: AntiHolomorphicForm,
    /// `b = i⋆F_A − ½(τ − |φ|²)` per plaquette (pointwise values; `|φ|²` is
    /// the mean over the four corners).
    pub b: Vec<f64>,
    /// Harmonic part of `α` minus the Picard target, in link units.
    pub h: [f64; 2],
    /// `d*α`, including its redundant zero-sum direction.
    pub gauge: Cochain0,
}

/// `L²` norms of the residual components.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ResidualNorms {
    pub psi: f64,
    pub b: f64,
    pub h: f64,
    pub gauge: f64,
    pub total: f64,
}

impl VortexResidual {
    pub fn norms(&self, geom: &TorusGeometry) -> ResidualNorms {
        let area = geom.plaquette_area();
        let psi = self.psi.norm_sq(geom);
        let b = area * self.b.iter().map(|v| v * v).sum::<f64>();
        let n2 = (geom.n() * geom.n()) as f64;
        let h = n2 * (self.h[0] * self.h[0] + self.h[1] * self.h[1]);
        let gauge = area * self.gauge.0.iter().map(|v| v * v).sum::<f64>();
        ResidualNorms {
            psi: psi.sqrt(),
            b: b.sqrt(),
            h: h.sqrt(),
            gauge: gauge.sqrt(),
            total: (psi + b + h + gauge).sqrt(),
        }
    }

    /// `Σ_p b(p)·area`, equal to `2π·deg − ½(τ·vol − ‖φ‖²)`.
    pub fn b_integral(&self, geom: &TorusGeometry) -> f64 {
        geom.plaquette_area() * self.b.iter().sum::<f64>()
    }

    /// Weighted residual vector (see module docs).
    pub fn to_weighted(&self, geom: &TorusGeometry) -> Vec<f64> {
        let h = geom.h();
        let w = SQRT_2 * h;
        let mut r: Vec<f64> = self.psi.0.iter().map(|z| w * z.re).collect();
        r.extend(self.psi.0.iter().map(|z| w * z.im));
        r.extend(self.b.iter().map(|v| h * v));
        let n = geom.n() as f64;
        r.push(n * self.h[0]);
        r.push(n * self.h[1]);
        r.extend(self.gauge.0.iter().map(|v| h * v));
        r
    }
}

/// The vortex map `(φ, α) ↦ (∂̄_A φ, i⋆F_A − ½(τ − |φ|²), h_α − target, d*α)`
/// based at the constant-curvature connection of degree `d`.
#[derive(Debug, Clone)]
pub struct VortexMap {
    base: Connection,
    tau: f64,
    target: [f64; 2],
}

impl VortexMap {
    /// `target` is the harmonic part of `α` to pin, in link units.
    pub fn new(geom: &TorusGeometry, d: i64, tau: f64, target: [f64; 2]) -> Result<Self> {
        if !tau.is_finite() || !target.iter().all(|t| t.is_finite()) {
            return Err(VortexError::InvalidParameter(
                "tau and the Picard target must be finite".into(),
            ));
        }
        Ok(Self {
            base: base_connection(geom, d),
            tau,
            target,
        })
    }

    pub fn geometry(&self) -> &TorusGeometry {
        self.base.geometry()
    }

    pub fn degree(&self) -> i64 {
        self.base.bundle_degree()
    }

    pub fn tau(&self) -> f64 {
        self.tau
    }

    pub fn target(&self) -> [f64; 2] {
        self.target
    }

    /// Same map with a different Taubes parameter.
    pub fn with_tau(&self, tau: f64) -> Result<Self> {
        Self::new(self.geometry(), self.degree(), tau, self.target)
    }

    /// The connection `B + iα`.
    pub fn connection(&self, alpha: &Cochain1) -> Result<Connection> {
        self.base.clone().with_alpha(alpha.clone())
    }

    /// Number of unknowns `4N`.
    pub fn num_unknowns(&self) -> usize {
        4 * self.geometry().num_sites()
    }

    /// Length `4N + 2` of the weighted residual.
    pub fn num_equations(&self) -> usize {
        4 * self.geometry().num_sites() + 2
    }

    pub fn residual(&self, state: &VortexState) -> Result<VortexResidual> {
        let g = *self.geometry();
        check_len(g.num_sites(), state.phi.len())?;
        let conn = self.connection(&state.alpha)?;
        let psi = dbar(&conn, &state.phi)?;
        let kappa = curvature_scalar(&conn)?;
        let rho = state.phi.pointwise_norm_sq();
        let b = (0..g.num_plaquettes())
            .map(|p| {
                let m = 0.25 * g.plaquette_corners(p).iter().map(|&c| rho[c]).sum::<f64>();
                kappa.0[p] - 0.5 * (self.tau - m)
            })
            .collect();
        let [hx, hy] = g.harmonic_part(&state.alpha)?;
        Ok(VortexResidual {
            psi,
            b,
            h: [hx - self.target[0], hy - self.target[1]],
            gauge: g.d0_adjoint(&state.alpha)?,
        })
    }

    /// Weighted residual at a packed point.
    pub fn weighted_residual(&self, x: &[f64]) -> Result<Vec<f64>> {
        let state = VortexState::unpack(self.geometry(), x)?;
        Ok(self.residual(&state)?.to_weighted(self.geometry()))
    }

    /// Sparse Jacobian of the weighted residual with respect to the packed
    /// unknowns.
    pub fn jacobian(&self, state: &VortexState) -> Result<CsrMatrix> {
        let g = *self.geometry();
        let ns = g.num_sites();
        check_len(ns, state.phi.len())?;
        let conn = self.connection(&state.alpha)?;
        let h = g.h();
        let phi = &state.phi.0;
        let a0 = 2 * ns;
        let mut jb = CsrBuilder::new(4 * ns);

        // ψ rows: ψ(s) = c_x φ(s+x) + c_y φ(s+y) + c_0 φ(s)
        let w = SQRT_2 * h;
        let c0 = -(Complex64::new(1.0, 1.0)) / (2.0 * h);
        let psi_terms = |s: usize| {
            let sx = g.shift(s, Axis::X, 1);
            let sy = g.shift(s, Axis::Y, 1);
            let ux = conn.transport(s, Axis::X);
            let uy = conn.transport(s, Axis::Y);
            let cx = ux / (2.0 * h);
            let cy = I * uy / (2.0 * h);
            let kx = I * cx * phi[sx];
            let ky = I * cy * phi[sy];
            (
                [(sx, cx), (sy, cy), (s, c0)],
                [(g.link(s, Axis::X), kx), (g.link(s, Axis::Y), ky)],
            )
        };
        for part in 0..2 {
            for s in 0..ns {
                let (phi_terms, alpha_terms) = psi_terms(s);
                for (t, c) in phi_terms {
                    if part == 0 {
                        jb.push(t, w * c.re);
                        jb.push(ns + t, -w * c.im);
                    } else {
                        jb.push(t, w * c.im);
                        jb.push(ns + t, w * c.re);
                    }
                }
                for (l, k) in alpha_terms {
                    jb.push(a0 + l, w * if part == 0 { k.re } else { k.im });
                }
                jb.finish_row();
            }
        }

        // b rows
        let inv_h2 = 1.0 / (h * h);
        for p in 0..g.num_plaquettes() {
            for (l, sgn) in g.plaquette_links(p) {
                jb.push(a0 + l, -h * sgn * inv_h2);
            }
            for c in g.plaquette_corners(p) {
                jb.push(c, 0.25 * h * phi[c].re);
                jb.push(ns + c, 0.25 * h * phi[c].im);
            }
            jb.finish_row();
        }

        // h rows
        let wh = 1.0 / g.n() as f64;
        for axis in [Axis::X, Axis::Y] {
            for s in 0..ns {
                jb.push(a0 + g.link(s, axis), wh);
            }
            jb.finish_row();
        }

        // gauge rows
        for s in 0..ns {
            let sx = g.shift(s, Axis::X, -1);
            let sy = g.shift(s, Axis::Y, -1);
            let c = h * inv_h2;
            jb.push(a0 + g.link(sx, Axis::X), c);
            jb.push(a0 + g.link(s, Axis::X), -c);
            jb.push(a0 + g.link(sy, Axis::Y), c);
            jb.push(a0 + g.link(s, Axis::Y), -c);
            jb.finish_row();
        }
        Ok(jb.build())
    }

    /// Dense Jacobian; refused above [`DENSE_LIMIT`].
    pub fn assemble_dense(&self, state: &VortexState) -> Result<DMatrix<f64>> {
        let n = self.geometry().n();
        if n > DENSE_LIMIT {
            return Err(VortexError::AssemblyTooLarge {
                n,
                limit: DENSE_LIMIT,
            });
        }
        Ok(self.jacobian(state)?.to_dense())
    }
}

/// Convenience form of [`VortexMap::residual`].
pub fn residual(
    phi: &Section,
    alpha: &Cochain1,
    d: i64,
    tau: f64,
    picard_target: [f64; 2],
    geom: &TorusGeometry,
) -> Result<VortexResidual> {
    VortexMap::new(geom, d, tau, picard_target)?.residual(&VortexState {
        phi: phi.clone(),
        alpha: alpha.clone(),
    })
}

/// Singular-value census of a block.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SpectrumCount {
    pub rows: usize,
    pub cols: usize,
    pub rank: usize,
    pub kernel: usize,
    pub cokernel: usize,
    pub sigma_max: f64,
    /// Smallest singular value counted as nonzero.
    pub sigma_min: f64,
    /// Smallest nonzero over largest zero singular value (or over the
    /// threshold when there are no zero singular values).
    pub gap: f64,
}

fn count_singular_values(sv: &[f64], rows: usize, cols: usize) -> Result<SpectrumCount> {
    let sigma_max = sv.iter().cloned().fold(0.0, f64::max);
    let threshold = ZERO_THRESHOLD * sigma_max;
    let rank = sv.iter().filter(|&&s| s >= threshold).count();
    let sigma_min = sv
        .iter()
        .cloned()
        .filter(|&s| s >= threshold)
        .fold(f64::INFINITY, f64::min);
    let largest_zero = sv.iter().cloned().filter(|&s| s < threshold).fold(-1.0, f64::max);
    let gap = if largest_zero < 0.0 {
        sigma_min / threshold
    } else if largest_zero == 0.0 {
        f64::INFINITY
    } else {
        sigma_min / largest_zero
    };
    if gap < REQUIRED_GAP {
        return Err(VortexError::NoSpectralGap {
            gap,
            required: REQUIRED_GAP,
        });
    }
    Ok(SpectrumCount {
        rows,
        cols,
        rank,
        kernel: cols - rank,
        cokernel: rows - rank,
        sigma_max,
        sigma_min,
        gap,
    })
}

/// Orthonormal basis of the zero-sum subspace of `ℝ^len`, as rows.
fn helmert_basis(len: usize) -> DMatrix<f64> {
    let mut q = DMatrix::zeros(len - 1, len);
    for k in 1..len {
        let norm = ((k * (k + 1)) as f64).sqrt();
        for c in 0..k {
            q[(k - 1, c)] = 1.0 / norm;
        }
        q[(k - 1, k)] = -(k as f64) / norm;
    }
    q
}

/// Real 1-form block `α ↦ (b, h, [d*α])` of the assembled linearization,
/// with the `d*α` rows projected to `Ω⁰/ℝ`.
fn real_block(map: &VortexMap, state: &VortexState) -> Result<DMatrix<f64>> {
    let ns = map.geometry().num_sites();
    let full = map.assemble_dense(state)?;
    let cols = 2 * ns..4 * ns;
    let b_and_h = full.view((2 * ns, 2 * ns), (ns + 2, 2 * ns)).into_owned();
    let gauge = full.view((3 * ns + 2, cols.start), (ns, 2 * ns)).into_owned();
    let projected = helmert_basis(ns) * gauge;
    let mut block = DMatrix::zeros(2 * ns + 1, 2 * ns);
    block.view_mut((0, 0), (ns + 2, 2 * ns)).copy_from(&b_and_h);
    block.view_mut((ns + 2, 0), (ns - 1, 2 * ns)).copy_from(&projected);
    Ok(block)
}

/// Index of `α ↦ (−dα, hα, [d*α])` and its singular-value data.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FixedPointReport {
    pub d: i64,
    pub n: usize,
    pub sigma_min: f64,
    pub kernel: usize,
    pub cokernel: usize,
    pub index: i64,
    pub gap: f64,
}

/// Analyse the real block of the linearization at `(φ, α) = (0, 0)`.
pub fn fixed_point_analysis(d: i64, n: usize, vol: f64) -> Result<FixedPointReport> {
    let geom = TorusGeometry::new(n, vol)?;
    if n > DENSE_LIMIT {
        return Err(VortexError::AssemblyTooLarge {
            n,
            limit: DENSE_LIMIT,
        });
    }
    let map = VortexMap::new(&geom, d, 1.0, [0.0; 2])?;
    let block = real_block(&map, &VortexState::zeros(&geom))?;
    let (rows, cols) = block.shape();
    let sv = block.singular_values();
    let count = count_singular_values(sv.as_slice(), rows, cols)?;
    Ok(FixedPointReport {
        d,
        n,
        sigma_min: count.sigma_min,
        kernel: count.kernel,
        cokernel: count.cokernel,
        index: count.kernel as i64 - count.cokernel as i64,
        gap: count.gap,
    })
}

/// Result of [`numerical_index`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct IndexReport {
    pub d: i64,
    pub n: usize,
    /// Real 1-form block (singular-value count).
    pub real: SpectrumCount,
    pub real_index: i64,
    /// Positive-chirality exact zero modes (`ker ∂̄_A`).
    pub chiral_plus: usize,
    /// Negative-chirality exact zero modes (`coker ∂̄_A`).
    pub chiral_minus: usize,
    pub complex_index: i64,
    pub complex_gap: f64,
    /// Real index of the full linearization: `real_index + 2·complex_index`.
    pub index: i64,
}

/// Index of the linearization at a decoupled point `(0, α)`.
///
/// The real block is counted from the singular values of its assembled
/// matrix with `d*α` quotiented by constants. A finite square matrix always
/// has index zero, so the complex `∂̄_A` block is counted through the exact
/// chiral zero modes of the overlap Dirac operator built on the same link
/// variables: `ker ∂̄_A` ↔ positive chirality, `coker ∂̄_A` ↔ negative.
pub fn numerical_index(map: &VortexMap, state: &VortexState) -> Result<IndexReport> {
    let g = *map.geometry();
    if g.n() > DENSE_LIMIT {
        return Err(VortexError::AssemblyTooLarge {
            n: g.n(),
            limit: DENSE_LIMIT,
        });
    }
    let max_phi = state.phi.max_norm_sq().sqrt();
    if max_phi > 1e-12 {
        return Err(VortexError::NotDecoupled(max_phi));
    }
    let block = real_block(map, state)?;
    let (rows, cols) = block.shape();
    let real = count_singular_values(block.singular_values().as_slice(), rows, cols)?;
    let real_index = real.kernel as i64 - real.cokernel as i64;

    let conn = map.connection(&state.alpha)?;
    let (plus, minus, complex_gap) = overlap_chiral_zero_modes(&conn)?;
    let complex_index = plus as i64 - minus as i64;
    Ok(IndexReport {
        d: map.degree(),
        n: g.n(),
        real,
        real_index,
        chiral_plus: plus,
        chiral_minus: minus,
        complex_index,
        complex_gap,
        index: real_index + 2 * complex_index,
    })
}

/// Wilson–Dirac operator in lattice units with `γ₁ = σ₁`, `γ₂ = σ₂`,
/// Wilson parameter `r = 1`. Spinor component `c` of site `s` has index
/// `2s + c`.
fn wilson_dirac(conn: &Connection) -> DMatrix<Complex64> {
    let g = conn.geometry();
    let ns = g.num_sites();
    let one = Complex64::new(1.0, 0.0);
    let zero = Complex64::new(0.0, 0.0);
    let gammas = [
        [[zero, one], [one, zero]],
        [[zero, -I], [I, zero]],
    ];
    let mut m = DMatrix::from_element(2 * ns, 2 * ns, zero);
    for s in 0..ns {
        for c in 0..2 {
            m[(2 * s + c, 2 * s + c)] += Complex64::new(2.0, 0.0);
        }
        for (mu, axis) in [Axis::X, Axis::Y].into_iter().enumerate() {
            let fwd = g.shift(s, axis, 1);
            let back = g.shift(s, axis, -1);
            let u_fwd = conn.transport(s, axis);
            let u_back = conn.transport(back, axis).conj();
            for a in 0..2 {
                for b in 0..2 {
                    let delta = if a == b { one } else { zero };
                    let gm = gammas[mu][a][b];
                    m[(2 * s + a, 2 * fwd + b)] -= 0.5 * (delta - gm) * u_fwd;
                    m[(2 * s + a, 2 * back + b)] -= 0.5 * (delta + gm) * u_back;
                }
            }
        }
    }
    m
}

/// Count exact zero modes of the overlap operator `1 + γ₅ sign(γ₅(D_W − 1))`
/// by chirality. Returns `(n₊, n₋, gap)`.
fn overlap_chiral_zero_modes(conn: &Connection) -> Result<(usize, usize, f64)> {
    let dim = 2 * conn.geometry().num_sites();
    let gamma5 = |m: &mut DMatrix<Complex64>| {
        for r in (1..dim).step_by(2) {
            for c in 0..m.ncols() {
                m[(r, c)] = -m[(r, c)];
            }
        }
    };
    let mut hw = wilson_dirac(conn) - DMatrix::<Complex64>::identity(dim, dim);
    gamma5(&mut hw);
    // symmetrize away rounding before the Hermitian eigensolver
    let hw = (&hw + hw.adjoint()) * Complex64::new(0.5, 0.0);
    let eig = SymmetricEigen::new(hw);
    let signs = DMatrix::from_diagonal(&eig.eigenvalues.map(|l| Complex64::new(l.signum(), 0.0)));
    let mut sign_h = &eig.eigenvectors * signs * eig.eigenvectors.adjoint();
    gamma5(&mut sign_h);
    let overlap = DMatrix::<Complex64>::identity(dim, dim) + sign_h;

    let svd = overlap.svd(false, true);
    let v_t = svd.v_t.expect("right singular vectors requested");
    let sv: Vec<f64> = svd.singular_values.iter().cloned().collect();
    let count = count_singular_values(&sv, dim, dim)?;
    let zero_rows: Vec<usize> = (0..sv.len())
        .filter(|&k| sv[k] < ZERO_THRESHOLD * count.sigma_max)
        .collect();
    if zero_rows.is_empty() {
        return Ok((0, 0, count.gap));
    }
    // chirality matrix K† γ₅ K on the kernel
    let k = zero_rows.len();
    let mut chir = DMatrix::from_element(k, k, Complex64::new(0.0, 0.0));
    for (a, &ra) in zero_rows.iter().enumerate() {
        for (b, &rb) in zero_rows.iter().enumerate() {
            // kernel vectors are the conjugated rows of v_t
            chir[(a, b)] = (0..dim)
                .map(|c| {
                    let sign = if c % 2 == 0 { 1.0 } else { -1.0 };
                    sign * v_t[(ra, c)] * v_t[(rb, c)].conj()
                })
                .sum();
        }
    }
    let chir = (&chir + chir.adjoint()) * Complex64::new(0.5, 0.0);
    let ev = SymmetricEigen::new(chir).eigenvalues;
    let plus = ev.iter().filter(|&&l| l > 0.5).count();
    let minus = ev.iter().filter(|&&l| l < -0.5).count();
    Ok((plus, minus, count.gap))
}

/// Pure-gauge tangent direction generated by the infinitesimal gauge
/// function `f`: `(2πi f φ, −2π d₀ f)`, packed.
pub fn gauge_direction(geom: &TorusGeometry, state: &VortexState, f: &Cochain0) -> Result<Vec<f64>> {
    check_len(geom.num_sites(), f.len())?;
    let phi = Section(
        state
            .phi
            .0
            .iter()
            .zip(&f.0)
            .map(|(z, fv)| 2.0 * PI * I * fv * z)
            .collect(),
    );
    let alpha = geom.d0(f)?.scale(-2.0 * PI);
    Ok(VortexState { phi, alpha }.pack())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bundle::{gauge_transform, GaugeTransformation};
    use crate::operators::smooth_test_section;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn random_state(geom: &TorusGeometry, rng: &mut ChaCha8Rng, amp: f64) -> VortexState {
        let ns = geom.num_sites();
        VortexState {
            phi: Section(
                (0..ns)
                    .map(|_| Complex64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)))
                    .collect(),
            ),
            alpha: Cochain((0..2 * ns).map(|_| amp * rng.gen_range(-1.0..1.0)).collect()),
        }
    }

    fn norm(v: &[f64]) -> f64 {
        v.iter().map(|x| x * x).sum::<f64>().sqrt()
    }

    #[test]
    fn trivial_solution_has_zero_residual() {
        let g = TorusGeometry::new(8, 5.0).unwrap();
        let map = VortexMap::new(&g, 0, 1.0, [0.0; 2]).unwrap();
        let state = VortexState {
            phi: Section::constant(g.num_sites(), Complex64::new(1.0, 0.0)),
            alpha: g.zeros1(),
        };
        let r = map.residual(&state).unwrap();
        assert!(r.norms(&g).total < 1e-12);
    }

    #[test]
    fn zero_section_in_degree_one() {
        let g = TorusGeometry::new(8, 8.0 * PI).unwrap();
        let map = VortexMap::new(&g, 1, 1.0, [0.0; 2]).unwrap();
        let r = map.residual(&VortexState::zeros(&g)).unwrap();
        assert_eq!(r.psi.max_abs(), 0.0);
        assert!(r.b.iter().all(|b| (b + 0.25).abs() < 1e-12));
        assert_eq!(r.h, [0.0, 0.0]);
        assert_eq!(r.gauge.max_abs(), 0.0);
    }

    #[test]
    fn weighted_norm_matches_component_norms() {
        let g = TorusGeometry::new(8, 3.0).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let map = VortexMap::new(&g, 1, 2.0, [0.1, -0.2]).unwrap();
        let r = map.residual(&random_state(&g, &mut rng, 0.1)).unwrap();
        let total = r.norms(&g).total;
        assert!((norm(&r.to_weighted(&g)) - total).abs() < 1e-12 * total);
    }

    #[test]
    fn b_integral_identity_and_lower_bound() {
        let g = TorusGeometry::new(10, 4.0 * PI).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        for d in [0i64, 1, 2, 3] {
            let map = VortexMap::new(&g, d, 1.0, [0.0; 2]).unwrap();
            let state = random_state(&g, &mut rng, 0.05);
            let r = map.residual(&state).unwrap();
            let expect = 2.0 * PI * d as f64 - 0.5 * (g.vol() - state.phi.norm_sq(&g));
            assert!((r.b_integral(&g) - expect).abs() < 1e-10);
            let bound = (2.0 * PI * d as f64 - 0.5 * g.vol()) / g.vol().sqrt();
            assert!(r.norms(&g).total >= bound);
        }
    }

    #[test]
    fn global_phase_rotates_psi_only() {
        let g = TorusGeometry::new(8, 6.0).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let map = VortexMap::new(&g, 2, 1.5, [0.0; 2]).unwrap();
        let state = random_state(&g, &mut rng, 0.1);
        let rot = Complex64::from_polar(1.0, 0.7);
        let mut turned = state.clone();
        turned.phi.0.iter_mut().for_each(|z| *z *= rot);
        let r0 = map.residual(&state).unwrap();
        let r1 = map.residual(&turned).unwrap();
        for (a, b) in r0.psi.0.iter().zip(&r1.psi.0) {
            assert!((a * rot - b).norm() < 1e-12);
        }
        for (a, b) in r0.b.iter().zip(&r1.b) {
            assert!((a - b).abs() < 1e-12);
        }
        assert_eq!(r0.h, r1.h);
        assert_eq!(r0.gauge, r1.gauge);
    }

    #[test]
    fn gauge_transform_preserves_psi_and_b_norms() {
        let g = TorusGeometry::new(8, 8.0).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let map = VortexMap::new(&g, 1, 1.0, [0.0; 2]).unwrap();
        let state = random_state(&g, &mut rng, 0.1);
        let gt = GaugeTransformation {
            f: Cochain((0..g.num_sites()).map(|_| rng.gen_range(-0.1..0.1)).collect()),
            winding: (1, -2),
        };
        let conn = map.connection(&state.alpha).unwrap();
        let (phi2, conn2) = gauge_transform(&gt, &state.phi, &conn).unwrap();
        let moved = VortexState {
            phi: phi2,
            alpha: conn2.alpha,
        };
        let n0 = map.residual(&state).unwrap().norms(&g);
        let n1 = map.residual(&moved).unwrap().norms(&g);
        assert!((n0.psi - n1.psi).abs() < 1e-9);
        assert!((n0.b - n1.b).abs() < 1e-9);
    }

    #[test]
    fn linearization_error_is_second_order() {
        let g = TorusGeometry::new(8, 6.0).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let map = VortexMap::new(&g, 1, 1.0, [0.0; 2]).unwrap();
        let state = random_state(&g, &mut rng, 0.2);
        let x = state.pack();
        let v: Vec<f64> = (0..x.len()).map(|_| rng.gen_range(-1.0..1.0)).collect();
        let jv = map.jacobian(&state).unwrap().apply(&v).unwrap();
        let r0 = map.weighted_residual(&x).unwrap();
        let err = |eps: f64| {
            let xe: Vec<f64> = x.iter().zip(&v).map(|(a, b)| a + eps * b).collect();
            let re = map.weighted_residual(&xe).unwrap();
            norm(&re.iter().zip(&r0).zip(&jv).map(|((a, b), c)| a - b - eps * c).collect::<Vec<_>>())
        };
        let ratio = err(1e-4) / err(1e-5);
        assert!((80.0..=120.0).contains(&ratio), "ratio {ratio}");
    }

    #[test]
    fn gauge_direction_is_annihilated_up_to_gauge_row() {
        let g = TorusGeometry::new(8, 5.0).unwrap();
        let map = VortexMap::new(&g, 0, 1.0, [0.0; 2]).unwrap();
        let state = VortexState {
            phi: Section::constant(g.num_sites(), Complex64::new(1.0, 0.0)),
            alpha: g.zeros1(),
        };
        let jac = map.jacobian(&state).unwrap();
        let ns = g.num_sites();
        let mut rng = ChaCha8Rng::seed_from_u64(6);
        let f = Cochain((0..ns).map(|_| rng.gen_range(-1.0..1.0)).collect());
        let jv = jac.apply(&gauge_direction(&g, &state, &f).unwrap()).unwrap();
        assert!(norm(&jv[..3 * ns + 2]) < 1e-8);
        let lap = g.laplacian0(&f).unwrap();
        for s in 0..ns {
            assert!((jv[3 * ns + 2 + s] + 2.0 * PI * g.h() * lap.0[s]).abs() < 1e-8);
        }
        let constant = Cochain(vec![0.3; ns]);
        let jc = jac.apply(&gauge_direction(&g, &state, &constant).unwrap()).unwrap();
        assert!(norm(&jc) < 1e-8);
    }

    #[test]
    fn blocks_decouple_at_zero_section() {
        let g = TorusGeometry::new(6, 4.0).unwrap();
        let map = VortexMap::new(&g, 2, 1.0, [0.0; 2]).unwrap();
        let m = map.assemble_dense(&VortexState::zeros(&g)).unwrap();
        let ns = g.num_sites();
        assert_eq!(m.view((0, 2 * ns), (2 * ns, 2 * ns)).amax(), 0.0);
        assert_eq!(m.view((2 * ns, 0), (2 * ns + 2, 2 * ns)).amax(), 0.0);
    }

    #[test]
    fn dense_assembly_is_guarded() {
        let g = TorusGeometry::new(17, 4.0).unwrap();
        let map = VortexMap::new(&g, 0, 1.0, [0.0; 2]).unwrap();
        assert!(matches!(
            map.assemble_dense(&VortexState::zeros(&g)),
            Err(VortexError::AssemblyTooLarge { n: 17, .. })
        ));
    }

    #[test]
    fn index_matches_riemann_roch_at_small_n() {
        for n in [8usize, 12] {
            let g = TorusGeometry::new(n, 4.0 * PI).unwrap();
            for d in [0i64, 1, 2] {
                let map = VortexMap::new(&g, d, 1.0, [0.0; 2]).unwrap();
                let rep = numerical_index(&map, &VortexState::zeros(&g)).unwrap();
                assert_eq!(rep.real_index, -1, "n={n} d={d}");
                assert_eq!(rep.index, 2 * d - 1, "n={n} d={d}: {rep:?}");
                assert!(rep.complex_gap >= REQUIRED_GAP && rep.real.gap >= REQUIRED_GAP);
            }
        }
    }

    #[test]
    fn index_needs_decoupled_point() {
        let g = TorusGeometry::new(6, 4.0).unwrap();
        let map = VortexMap::new(&g, 1, 1.0, [0.0; 2]).unwrap();
        let state = VortexState {
            phi: smooth_test_section(&g, 1, 0),
            alpha: g.zeros1(),
        };
        assert!(matches!(
            numerical_index(&map, &state),
            Err(VortexError::NotDecoupled(_))
        ));
    }

    #[test]
    fn fixed_point_block_is_injective_with_one_dimensional_cokernel() {
        for d in [0i64, 1, 2] {
            let rep = fixed_point_analysis(d, 8, 4.0 * PI).unwrap();
            assert!(rep.sigma_min > 0.0);
            assert_eq!((rep.kernel, rep.cokernel, rep.index), (0, 1, -1));
        }
    }
}
