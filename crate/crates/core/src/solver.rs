//! Levenberg–Marquardt solver for the vortex map with divisor seeding and
//! continuation in the Taubes parameter.

use crate::bundle::{PicardPoint, Section};
use crate::error::{Result, VortexError};
use crate::geometry::TorusGeometry;
use crate::sparse::CsrMatrix;
use crate::vortex::{ResidualNorms, VortexMap, VortexState};
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;
use std::time::Instant;

/// A point of an effective divisor, in physical coordinates.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DivisorPoint {
    pub x: f64,
    pub y: f64,
    pub multiplicity: i32,
}

/// Finite formal sum of torus points.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Divisor(pub Vec<DivisorPoint>);

impl Divisor {
    pub fn degree(&self) -> i64 {
        self.0.iter().map(|p| p.multiplicity as i64).sum()
    }

    pub fn is_effective(&self) -> bool {
        self.0.iter().all(|p| p.multiplicity > 0)
    }

    /// `d` points placed uniformly at random.
    pub fn random(geom: &TorusGeometry, d: i64, rng: &mut impl Rng) -> Self {
        let side = geom.side();
        Divisor(
            (0..d.max(0))
                .map(|_| DivisorPoint {
                    x: rng.gen_range(0.0..side),
                    y: rng.gen_range(0.0..side),
                    multiplicity: 1,
                })
                .collect(),
        )
    }
}

/// Shortest displacement between two points of the torus of side `side`.
pub fn torus_displacement(a: (f64, f64), b: (f64, f64), side: f64) -> (f64, f64) {
    let wrap = |v: f64| v - side * (v / side).round();
    (wrap(a.0 - b.0), wrap(a.1 - b.1))
}

/// Harmonic part of `α` (link units) at which the divisor is the zero set of
/// a holomorphic section: `Σ z_k ≡ (L²/2π)(c_y − i c_x) + d(L/2)(1 + i)`.
pub fn abel_jacobi_target(geom: &TorusGeometry, div: &Divisor) -> [f64; 2] {
    let side = geom.side();
    let d = div.degree() as f64;
    let (sx, sy) = div.0.iter().fold((0.0, 0.0), |(a, b), p| {
        (a + p.multiplicity as f64 * p.x, b + p.multiplicity as f64 * p.y)
    });
    let c_y = 2.0 * PI * (sx - d * side / 2.0) / (side * side);
    let c_x = -2.0 * PI * (sy - d * side / 2.0) / (side * side);
    [c_x * geom.h(), c_y * geom.h()]
}

/// Fractional Picard coordinates to link units, choosing the representative
/// closest to `near`.
pub fn picard_to_link_units(geom: &TorusGeometry, p: PicardPoint, near: [f64; 2]) -> [f64; 2] {
    let quantum = 2.0 * PI / geom.n() as f64;
    let pick = |frac: f64, near: f64| {
        let base = frac * quantum;
        base + quantum * ((near - base) / quantum).round()
    };
    [pick(p.x, near[0]), pick(p.y, near[1])]
}

/// Degree-one section vanishing at `(x0, y0)` for the base gauge with
/// harmonic part from [`abel_jacobi_target`].
fn theta_factor(geom: &TorusGeometry, x0: f64, y0: f64, x: f64, y: f64) -> Complex64 {
    let side = geom.side();
    let beta = 2.0 * PI / (side * side);
    let c_x = -2.0 * PI * (y0 - side / 2.0) / (side * side);
    (-4..=4)
        .map(|q: i32| {
            let q = q as f64;
            let xq = q * side + x0 - side / 2.0;
            let re = -beta * (x - xq) * (x - xq) / 2.0;
            let im = c_x * side * q - c_x * x + 2.0 * PI * q * y / side;
            Complex64::from_polar(re.exp(), im)
        })
        .sum()
}

/// Holomorphic-type section with zeros at the divisor points (product of
/// theta factors), unnormalized.
pub fn theta_section(geom: &TorusGeometry, div: &Divisor) -> Section {
    Section(
        (0..geom.num_sites())
            .map(|s| {
                let (x, y) = geom.position(s);
                div.0.iter().fold(Complex64::new(1.0, 0.0), |acc, p| {
                    acc * theta_factor(geom, p.x, p.y, x, y).powi(p.multiplicity)
                })
            })
            .collect(),
    )
}

/// Initial state built from a divisor.
#[derive(Debug, Clone, PartialEq)]
pub struct Seed {
    pub state: VortexState,
    pub warnings: Vec<String>,
}

/// `τ₀ = 4πd / vol`.
pub fn tau0(d: i64, vol: f64) -> f64 {
    4.0 * PI * d as f64 / vol
}

/// Vortex-profile seed: phase of the theta section, amplitude
/// `A·Π tanh(r_k/3h)^{m_k}`, and `α₀` the constant Abel–Jacobi form.
/// `amplitude` defaults to `sqrt(max(τ − τ₀, 0))`.
pub fn seed_from_divisor(
    geom: &TorusGeometry,
    d: i64,
    tau: f64,
    div: &Divisor,
    amplitude: Option<f64>,
) -> Result<Seed> {
    if div.degree() != d {
        return Err(VortexError::DivisorDegree {
            expected: d,
            found: div.degree(),
        });
    }
    if !div.is_effective() {
        return Err(VortexError::InvalidParameter(
            "divisor multiplicities must be positive".into(),
        ));
    }
    let side = geom.side();
    let h = geom.h();
    let mut warnings = Vec::new();
    for (a, pa) in div.0.iter().enumerate() {
        if !(0.0..side).contains(&pa.x) || !(0.0..side).contains(&pa.y) {
            return Err(VortexError::InvalidParameter(format!(
                "divisor point ({}, {}) outside the fundamental domain [0, {side})²",
                pa.x, pa.y
            )));
        }
        for pb in &div.0[a + 1..] {
            let (dx, dy) = torus_displacement((pa.x, pa.y), (pb.x, pb.y), side);
            if dx.hypot(dy) < 3.0 * h {
                warnings.push(format!(
                    "divisor points ({:.4}, {:.4}) and ({:.4}, {:.4}) are closer than 3h",
                    pa.x, pa.y, pb.x, pb.y
                ));
            }
        }
    }
    let amp = amplitude.unwrap_or_else(|| (tau - tau0(d, geom.vol())).max(0.0).sqrt());
    let theta = theta_section(geom, div);
    let phi = Section(
        (0..geom.num_sites())
            .map(|s| {
                let pos = geom.position(s);
                let profile = div.0.iter().fold(1.0, |acc, p| {
                    let (dx, dy) = torus_displacement(pos, (p.x, p.y), side);
                    acc * (dx.hypot(dy) / (3.0 * h)).tanh().powi(p.multiplicity)
                });
                let z = theta.0[s];
                if z.norm() == 0.0 {
                    Complex64::new(0.0, 0.0)
                } else {
                    amp * profile * z / z.norm()
                }
            })
            .collect(),
    );
    let alpha = geom.reconstruct_harmonic(abel_jacobi_target(geom, div));
    Ok(Seed {
        state: VortexState { phi, alpha },
        warnings,
    })
}

/// Levenberg–Marquardt damping parameters.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct Damping {
    pub initial: f64,
    pub ceiling: f64,
    pub floor: f64,
}

impl Default for Damping {
    fn default() -> Self {
        Self {
            initial: 1e-3,
            ceiling: 1e10,
            floor: 1e-12,
        }
    }
}

/// Inputs of a single solve.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SolveConfig {
    pub d: i64,
    pub tau: f64,
    pub vol: f64,
    pub n: usize,
    /// Seed divisor; random points (from `rng_seed`) when absent.
    #[serde(default)]
    pub divisor: Option<Divisor>,
    /// Picard target in fractional coordinates; the Abel–Jacobi point of the
    /// seed divisor when absent.
    #[serde(default)]
    pub picard_target: Option<[f64; 2]>,
    #[serde(default = "default_max_iter")]
    pub max_iter: usize,
    #[serde(default = "default_rtol")]
    pub rtol: f64,
    #[serde(default)]
    pub damping: Damping,
    #[serde(default)]
    pub rng_seed: u64,
    /// Seed amplitude used when `τ ≤ τ₀` (the profile would otherwise vanish).
    /// A stall at or below this residual is a discretization floor near a
    /// solution, not an obstruction.
    #[serde(default = "default_floor_tol")]
    pub floor_tol: f64,
    #[serde(default = "default_probe")]
    pub probe_amplitude: f64,
    /// Standard deviation of the complex Gaussian noise added to the seed.
    #[serde(default)]
    pub seed_noise: f64,
}

fn default_max_iter() -> usize {
    200
}
fn default_rtol() -> f64 {
    1e-9
}
fn default_floor_tol() -> f64 {
    1e-6
}
fn default_probe() -> f64 {
    0.3
}

impl SolveConfig {
    pub fn new(d: i64, tau: f64, vol: f64, n: usize) -> Self {
        Self {
            d,
            tau,
            vol,
            n,
            divisor: None,
            picard_target: None,
            max_iter: default_max_iter(),
            rtol: default_rtol(),
            floor_tol: default_floor_tol(),
            damping: Damping::default(),
            rng_seed: 0,
            probe_amplitude: default_probe(),
            seed_noise: 0.0,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(VortexError::InvalidParameter(m));
        if !(self.rtol > 0.0) {
            return bad(format!("rtol must be positive, got {}", self.rtol));
        }
        if !(self.floor_tol >= self.rtol && self.floor_tol.is_finite()) {
            return bad(format!("floor_tol must be finite and at least rtol, got {}", self.floor_tol));
        }
        if self.max_iter < 1 {
            return bad("max_iter must be at least 1".into());
        }
        if !self.tau.is_finite() {
            return bad("tau must be finite".into());
        }
        let dp = &self.damping;
        if !(dp.floor > 0.0 && dp.floor <= dp.initial && dp.initial <= dp.ceiling) {
            return bad("damping must satisfy 0 < floor ≤ initial ≤ ceiling".into());
        }
        if !(self.probe_amplitude > 0.0) || !(self.seed_noise >= 0.0) {
            return bad("probe_amplitude must be positive and seed_noise nonnegative".into());
        }
        if let Some(div) = &self.divisor {
            if div.degree() != self.d {
                return Err(VortexError::DivisorDegree {
                    expected: self.d,
                    found: div.degree(),
                });
            }
        }
        if let Some(t) = self.picard_target {
            if !t.iter().all(|v| v.is_finite()) {
                return bad("picard_target must be finite".into());
            }
        }
        TorusGeometry::new(self.n, self.vol).map(|_| ())
    }
}

/// Terminal state of the iteration.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SolveStatus {
    Converged,
    /// Progress stalled above `rtol` but at or below `floor_tol`: a solution
    /// up to the discretization floor, which shrinks under refinement.
    LatticeFloor,
    /// Progress stalled at a residual above `floor_tol` (no solution nearby).
    ObstructionFloor,
    Diverged,
    MaxIterations,
}

/// Classification of the solution space from a solve outcome.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Classification {
    Empty,
    PicardTorus,
    VortexModuli,
    Inconclusive,
}

impl Classification {
    pub fn as_str(&self) -> &'static str {
        match self {
            Self::Empty => "empty",
            Self::PicardTorus => "picard_torus",
            Self::VortexModuli => "vortex_moduli",
            Self::Inconclusive => "inconclusive",
        }
    }
}

/// Below this `max|φ|` a converged solution is classified as a Picard point.
pub const PICARD_AMPLITUDE: f64 = 0.05;

/// Outcome of [`solve`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SolveReport {
    pub config: SolveConfig,
    pub status: SolveStatus,
    pub converged: bool,
    pub classification: Classification,
    pub iterations: usize,
    /// Residual norm before the first step and after every iteration.
    pub trace: Vec<f64>,
    pub residual: ResidualNorms,
    pub b_integral: f64,
    pub phi_norm_sq: f64,
    pub max_phi_sq: f64,
    pub max_damping: f64,
    pub gradient_steps: usize,
    /// Picard target actually used, in link units.
    pub picard_target_link: [f64; 2],
    /// Divisor the seed was built from.
    pub seed_divisor: Divisor,
    pub warnings: Vec<String>,
    pub state: VortexState,
    /// Wall-clock seconds; excluded from determinism comparisons.
    #[serde(skip)]
    pub wall_time: f64,
}

impl SolveReport {
    pub fn geometry(&self) -> TorusGeometry {
        TorusGeometry::new(self.config.n, self.config.vol).expect("validated config")
    }
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// Preconditioned CG for `(JᵀJ + λ·diag(D)) δ = rhs`.
fn pcg(jac: &CsrMatrix, diag: &[f64], lambda: f64, rhs: &[f64], rel_tol: f64, max_iter: usize) -> Result<Vec<f64>> {
    let len = rhs.len();
    let precond: Vec<f64> = diag.iter().map(|d| 1.0 / (d * (1.0 + lambda))).collect();
    let apply = |v: &[f64]| -> Result<Vec<f64>> {
        let jtjv = jac.apply_transpose(&jac.apply(v)?)?;
        Ok(jtjv.iter().zip(v).zip(diag).map(|((a, x), d)| a + lambda * d * x).collect())
    };
    let mut x = vec![0.0; len];
    let mut r = rhs.to_vec();
    let bnorm = dot(&r, &r).sqrt();
    if bnorm == 0.0 {
        return Ok(x);
    }
    let mut z: Vec<f64> = r.iter().zip(&precond).map(|(a, m)| a * m).collect();
    let mut p = z.clone();
    let mut rz = dot(&r, &z);
    for _ in 0..max_iter {
        let ap = apply(&p)?;
        let pap = dot(&p, &ap);
        if pap <= 0.0 {
            break;
        }
        let step = rz / pap;
        for k in 0..len {
            x[k] += step * p[k];
            r[k] -= step * ap[k];
        }
        if dot(&r, &r).sqrt() <= rel_tol * bnorm {
            break;
        }
        z = r.iter().zip(&precond).map(|(a, m)| a * m).collect();
        let rz_new = dot(&r, &z);
        let beta = rz_new / rz;
        rz = rz_new;
        for k in 0..len {
            p[k] = z[k] + beta * p[k];
        }
    }
    Ok(x)
}

/// Inner CG tolerance (inexact Gauss–Newton).
const CG_TOL: f64 = 1e-3;
const CG_MAX_ITER: usize = 2000;
/// Relative decrease below which an accepted step counts as a stall.
const STALL_DECREASE: f64 = 1e-10;
const STALL_COUNT: usize = 5;
const MAX_REJECTIONS: usize = 5;

/// Outcome of an iteration run from a given initial state.
struct Iteration {
    status: SolveStatus,
    iterations: usize,
    trace: Vec<f64>,
    max_damping: f64,
    gradient_steps: usize,
    state: VortexState,
}

fn evaluate(map: &VortexMap, x: &[f64]) -> Option<Vec<f64>> {
    map.weighted_residual(x)
        .ok()
        .filter(|r| r.iter().all(|v| v.is_finite()))
}

fn iterate(map: &VortexMap, start: VortexState, cfg: &SolveConfig) -> Result<Iteration> {
    let geom = *map.geometry();
    let mut x = start.pack();
    let mut r = map.weighted_residual(&x)?;
    let mut f = 0.5 * dot(&r, &r);
    let r0 = f.sqrt() * std::f64::consts::SQRT_2;
    let mut trace = vec![r0];
    let dp = cfg.damping;
    let mut lambda = dp.initial;
    let mut nu = 2.0;
    let mut max_damping = lambda;
    let (mut rejections, mut stalls, mut gradient_steps) = (0usize, 0usize, 0usize);
    let mut status = SolveStatus::MaxIterations;
    let mut iterations = 0;

    if r0 <= cfg.rtol {
        status = SolveStatus::Converged;
    }
    while status == SolveStatus::MaxIterations && iterations < cfg.max_iter {
        iterations += 1;
        let state = VortexState::unpack(&geom, &x)?;
        let jac = map.jacobian(&state)?;
        let g = jac.apply_transpose(&r)?;
        let colnorms = jac.column_norms_sq();
        let dmax = colnorms.iter().cloned().fold(0.0, f64::max);
        let diag: Vec<f64> = colnorms.iter().map(|c| c.max(1e-10 * dmax)).collect();

        let mut accepted = None;
        if rejections < MAX_REJECTIONS {
            let rhs: Vec<f64> = g.iter().map(|v| -v).collect();
            let delta = pcg(&jac, &diag, lambda, &rhs, CG_TOL, CG_MAX_ITER)?;
            let jd = jac.apply(&delta)?;
            let pred = -dot(&g, &delta) - 0.5 * dot(&jd, &jd);
            let trial: Vec<f64> = x.iter().zip(&delta).map(|(a, b)| a + b).collect();
            let rho = match evaluate(map, &trial) {
                Some(rt) if pred > 0.0 => {
                    let ft = 0.5 * dot(&rt, &rt);
                    let rho = (f - ft) / pred;
                    if rho > 1e-4 {
                        accepted = Some((trial, rt, ft));
                    }
                    rho
                }
                _ => -1.0,
            };
            if accepted.is_some() {
                lambda = (lambda * (1.0f64 / 3.0).max(1.0 - (2.0 * rho - 1.0).powi(3))).max(dp.floor);
                nu = 2.0;
                rejections = 0;
            } else {
                lambda = (lambda * nu).min(dp.ceiling);
                nu *= 2.0;
                rejections += 1;
            }
            max_damping = max_damping.max(lambda);
        } else {
            // scaled gradient step with Armijo backtracking
            let dir: Vec<f64> = g.iter().zip(&diag).map(|(gv, d)| -gv / d).collect();
            let slope = dot(&g, &dir);
            let mut t = 1.0;
            for _ in 0..40 {
                let trial: Vec<f64> = x.iter().zip(&dir).map(|(a, b)| a + t * b).collect();
                if let Some(rt) = evaluate(map, &trial) {
                    let ft = 0.5 * dot(&rt, &rt);
                    if ft <= f + 1e-4 * t * slope {
                        accepted = Some((trial, rt, ft));
                        break;
                    }
                }
                t *= 0.5;
            }
            gradient_steps += 1;
            rejections = 0;
            if accepted.is_none() {
                trace.push(trace[trace.len() - 1]);
                status = SolveStatus::ObstructionFloor;
                break;
            }
        }

        if let Some((trial, rt, ft)) = accepted {
            if (f - ft) < STALL_DECREASE * f {
                stalls += 1;
            } else {
                stalls = 0;
            }
            x = trial;
            r = rt;
            f = ft;
        }
        let norm = (2.0 * f).sqrt();
        trace.push(norm);
        if !norm.is_finite() || norm > 10.0 * r0 {
            status = SolveStatus::Diverged;
        } else if norm <= cfg.rtol {
            status = SolveStatus::Converged;
        } else if stalls >= STALL_COUNT || lambda >= dp.ceiling {
            status = SolveStatus::ObstructionFloor;
        }
    }
    Ok(Iteration {
        status,
        iterations,
        trace,
        max_damping,
        gradient_steps,
        state: VortexState::unpack(&geom, &x)?,
    })
}

/// Seed, target and map for a configuration.
fn prepare(cfg: &SolveConfig) -> Result<(VortexMap, Seed, [f64; 2], Divisor)> {
    cfg.validate()?;
    let geom = TorusGeometry::new(cfg.n, cfg.vol)?;
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.rng_seed);
    let div = match &cfg.divisor {
        Some(div) => div.clone(),
        None => Divisor::random(&geom, cfg.d, &mut rng),
    };
    let t0 = tau0(cfg.d, cfg.vol);
    let amplitude = (cfg.tau <= t0).then_some(cfg.probe_amplitude);
    let mut seed = if cfg.d >= 0 {
        seed_from_divisor(&geom, cfg.d, cfg.tau, &div, amplitude)?
    } else {
        // no effective divisors: probe with a constant section
        Seed {
            state: VortexState {
                phi: Section::constant(geom.num_sites(), Complex64::new(cfg.probe_amplitude, 0.0)),
                alpha: geom.zeros1(),
            },
            warnings: vec!["negative degree: seeded with a constant section".into()],
        }
    };
    if cfg.seed_noise > 0.0 {
        for z in &mut seed.state.phi.0 {
            let re: f64 = rng.sample(StandardNormal);
            let im: f64 = rng.sample(StandardNormal);
            *z += cfg.seed_noise * Complex64::new(re, im);
        }
    }
    let aj = geom.harmonic_part(&seed.state.alpha)?;
    let target = match cfg.picard_target {
        Some([px, py]) => picard_to_link_units(&geom, PicardPoint { x: px, y: py }, aj),
        None => aj,
    };
    Ok((VortexMap::new(&geom, cfg.d, cfg.tau, target)?, seed, target, div))
}

fn finish(cfg: &SolveConfig, map: &VortexMap, it: Iteration, seed: (Seed, [f64; 2], Divisor), started: Instant) -> Result<SolveReport> {
    let (Seed { warnings, .. }, target, seed_divisor) = seed;
    let geom = *map.geometry();
    let res = map.residual(&it.state)?;
    let max_phi_sq = it.state.phi.max_norm_sq();
    let mut warnings = warnings;
    let status = match it.status {
        SolveStatus::ObstructionFloor if it.trace.last().is_some_and(|&r| r <= cfg.floor_tol) => {
            warnings.push(format!(
                "stalled at residual {:.3e} above rtol {:.1e}: discretization floor, refine n",
                it.trace[it.trace.len() - 1],
                cfg.rtol
            ));
            SolveStatus::LatticeFloor
        }
        s => s,
    };
    let it = Iteration { status, ..it };
    let classification = match it.status {
        SolveStatus::Converged | SolveStatus::LatticeFloor if max_phi_sq.sqrt() < PICARD_AMPLITUDE => {
            Classification::PicardTorus
        }
        SolveStatus::Converged | SolveStatus::LatticeFloor => Classification::VortexModuli,
        SolveStatus::ObstructionFloor => Classification::Empty,
        _ => Classification::Inconclusive,
    };
    Ok(SolveReport {
        config: cfg.clone(),
        status: it.status,
        converged: it.status == SolveStatus::Converged,
        classification,
        iterations: it.iterations,
        trace: it.trace,
        residual: res.norms(&geom),
        b_integral: res.b_integral(&geom),
        phi_norm_sq: it.state.phi.norm_sq(&geom),
        max_phi_sq,
        max_damping: it.max_damping,
        gradient_steps: it.gradient_steps,
        picard_target_link: target,
        seed_divisor,
        warnings,
        state: it.state,
        wall_time: started.elapsed().as_secs_f64(),
    })
}

/// Solve `residual = 0` from the configured seed.
pub fn solve(cfg: &SolveConfig) -> Result<SolveReport> {
    let started = Instant::now();
    let (map, seed, target, div) = prepare(cfg)?;
    let it = iterate(&map, seed.state.clone(), cfg)?;
    finish(cfg, &map, it, (seed, target, div), started)
}

/// Solve from an explicit initial state (warm start).
pub fn solve_from(cfg: &SolveConfig, start: VortexState) -> Result<SolveReport> {
    let started = Instant::now();
    let (map, seed, target, div) = prepare(cfg)?;
    let geom = map.geometry();
    if start.phi.len() != geom.num_sites() || start.alpha.len() != geom.num_links() {
        return Err(VortexError::ShapeMismatch {
            expected: geom.num_sites(),
            found: start.phi.len(),
        });
    }
    let it = iterate(&map, start, cfg)?;
    finish(cfg, &map, it, (seed, target, div), started)
}

/// Solve along a monotone `τ` schedule, warm-starting each stage from the
/// previous one. A stage whose predecessor ended with a negligible section is
/// reseeded from the divisor.
pub fn continue_in_tau(cfg: &SolveConfig, schedule: &[f64]) -> Result<Vec<Result<SolveReport>>> {
    let increasing = schedule.windows(2).all(|w| w[0] <= w[1]);
    let decreasing = schedule.windows(2).all(|w| w[0] >= w[1]);
    if !(increasing || decreasing) {
        return Err(VortexError::InvalidParameter("tau schedule must be monotone".into()));
    }
    let mut out = Vec::with_capacity(schedule.len());
    let mut previous: Option<VortexState> = None;
    for &tau in schedule {
        let stage = SolveConfig { tau, ..cfg.clone() };
        let result = match previous.take() {
            Some(state) if state.phi.max_norm_sq() > 1e-6 => solve_from(&stage, state),
            _ => solve(&stage),
        };
        if let Ok(rep) = &result {
            previous = Some(rep.state.clone());
        }
        out.push(result);
    }
    Ok(out)
}

/// Convenience: the Picard-target link units to fractional coordinates.
pub fn link_units_to_picard(geom: &TorusGeometry, t: [f64; 2]) -> PicardPoint {
    let quantum = 2.0 * PI / geom.n() as f64;
    PicardPoint {
        x: (t[0] / quantum).rem_euclid(1.0),
        y: (t[1] / quantum).rem_euclid(1.0),
    }
}
