//! Named, parameterized checks with measured values and verdicts.

use crate::bundle::{Connection, Section};
use crate::error::{Result, VortexError};
use crate::geometry::{Axis, TorusGeometry};
use crate::operators::{bochner_laplacian, covariant_diff, dbar, dbar_adjoint, site_curvature};
use crate::solver::{solve, tau0, Classification, Divisor, DivisorPoint, SolveConfig, SolveReport, SolveStatus};
use crate::vortex::VortexMap;
use num_rational::BigRational;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use std::collections::BTreeMap;
use std::f64::consts::PI;

/// How `measured` is compared with `expected`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Tolerance {
    /// `|measured − expected| ≤ tol·|expected|`.
    Relative,
    /// `|measured − expected| ≤ tol`.
    Absolute,
    /// `measured ≤ expected + tol`.
    UpperBound,
}

/// Outcome of one check.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CheckResult {
    pub name: String,
    pub parameters: BTreeMap<String, f64>,
    pub measured: f64,
    pub expected: f64,
    pub tolerance: f64,
    pub tolerance_kind: Tolerance,
    pub pass: bool,
    /// Extra measured quantities.
    pub details: BTreeMap<String, f64>,
    /// The mathematical statement the check exercises.
    pub provenance: String,
    /// Why the check could not be evaluated, when it failed for that reason.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub note: Option<String>,
}

impl CheckResult {
    fn new(
        name: &str,
        parameters: BTreeMap<String, f64>,
        measured: f64,
        expected: f64,
        tolerance: f64,
        kind: Tolerance,
        provenance: &str,
    ) -> Self {
        let pass = match kind {
            Tolerance::Relative => (measured - expected).abs() <= tolerance * expected.abs(),
            Tolerance::Absolute => (measured - expected).abs() <= tolerance,
            Tolerance::UpperBound => measured <= expected + tolerance,
        };
        Self {
            name: name.into(),
            parameters,
            measured,
            expected,
            tolerance,
            tolerance_kind: kind,
            pass,
            details: BTreeMap::new(),
            provenance: provenance.into(),
            note: None,
        }
    }

    /// A failed check that could not be evaluated.
    pub fn not_evaluated(name: &str, parameters: BTreeMap<String, f64>, reason: String) -> Self {
        Self {
            name: name.into(),
            parameters,
            measured: f64::NAN,
            expected: f64::NAN,
            tolerance: f64::NAN,
            tolerance_kind: Tolerance::Absolute,
            pass: false,
            details: BTreeMap::new(),
            provenance: String::new(),
            note: Some(reason),
        }
    }
}

pub fn report_parameters(rep: &SolveReport) -> BTreeMap<String, f64> {
    let c = &rep.config;
    BTreeMap::from([
        ("d".into(), c.d as f64),
        ("tau".into(), c.tau),
        ("vol".into(), c.vol),
        ("n".into(), c.n as f64),
    ])
}

fn require_converged(rep: &SolveReport, check: &str) -> Result<()> {
    if rep.converged || rep.status == SolveStatus::LatticeFloor {
        Ok(())
    } else {
        Err(VortexError::Unconverged(check.into()))
    }
}

/// Default relative slack of the length identity.
pub const LENGTH_TOLERANCE: f64 = 0.02;
/// Default relative slack of the sup bound.
pub const SUP_SLACK: f64 = 0.02;

/// `‖φ‖² = (τ − τ₀)·vol` at a solution.
pub fn check_length_identity(rep: &SolveReport, rel_tol: f64) -> Result<CheckResult> {
    require_converged(rep, "length_identity")?;
    let c = &rep.config;
    let expected = (c.tau - tau0(c.d, c.vol)) * c.vol;
    let mut r = CheckResult::new(
        "length_identity",
        report_parameters(rep),
        rep.phi_norm_sq,
        expected,
        rel_tol,
        Tolerance::Relative,
        "length identity: integrating the second vortex equation gives ‖φ‖² = (τ − τ₀)·vol",
    );
    let rel = if expected != 0.0 {
        (rep.phi_norm_sq - expected).abs() / expected.abs()
    } else {
        rep.phi_norm_sq.abs()
    };
    r.details.insert("relative_error".into(), rel);
    Ok(r)
}

/// `max |φ|² ≤ τ·(1 + slack)` at a solution.
pub fn check_sup_bound(rep: &SolveReport, slack: f64) -> Result<CheckResult> {
    require_converged(rep, "sup_bound")?;
    let tau = rep.config.tau;
    Ok(CheckResult::new(
        "sup_bound",
        report_parameters(rep),
        rep.max_phi_sq,
        tau,
        slack * tau.abs(),
        Tolerance::UpperBound,
        "a priori bound: solutions satisfy ‖φ‖²_∞ ≤ τ",
    ))
}

/// Sitewise sides of the pointwise estimate
/// `Δ|φ|² ≤ 4 Re⟨∂̄*∂̄φ, φ⟩ + 2 i⋆F |φ|²`, with `Δ = d*d ≥ 0`.
pub fn pointwise_estimate_sides(conn: &Connection, phi: &Section) -> Result<(Vec<f64>, Vec<f64>)> {
    let g = conn.geometry();
    let rho = crate::geometry::Cochain(phi.pointwise_norm_sq());
    let lhs = g.laplacian0(&rho)?.0;
    let dd = dbar_adjoint(conn, &dbar(conn, phi)?)?;
    let kappa = site_curvature(conn)?;
    let rhs = (0..g.num_sites())
        .map(|s| 4.0 * (phi.0[s].conj() * dd.0[s]).re + 2.0 * kappa[s] * phi.0[s].norm_sqr())
        .collect();
    Ok((lhs, rhs))
}

/// The slack constant `C` in `max(LHS − RHS) ≤ C·h`.
pub const POINTWISE_CONSTANT: f64 = 0.5;

/// Evaluate the pointwise estimate at the report's state. Passes when the
/// largest violation is at most `c_max·h`; `C = violation/h` is reported.
pub fn check_pointwise_estimate(rep: &SolveReport, c_max: f64) -> Result<CheckResult> {
    let geom = rep.geometry();
    let map = VortexMap::new(&geom, rep.config.d, rep.config.tau, rep.picard_target_link)?;
    let conn = map.connection(&rep.state.alpha)?;
    let (lhs, rhs) = pointwise_estimate_sides(&conn, &rep.state.phi)?;
    let violation = lhs.iter().zip(&rhs).map(|(l, r)| l - r).fold(0.0, f64::max);
    let mut r = CheckResult::new(
        "pointwise_estimate",
        report_parameters(rep),
        violation,
        0.0,
        c_max * geom.h(),
        Tolerance::UpperBound,
        "pointwise estimate from the Weitzenböck formula: Δ|φ|² ≤ 4⟨∂̄*∂̄φ, φ⟩ + 2⟨i⋆Fφ, φ⟩",
    );
    r.details.insert("h".into(), geom.h());
    r.details.insert("constant".into(), violation / geom.h());
    Ok(r)
}

/// Exact identity behind the estimate, for diagnostics: the lattice satisfies
/// `Δ|φ|² = 2 Re(φ̄ ∇*∇φ) − Σ_μ (|D⁺_μφ|² + |D⁻_μφ|²)` sitewise.
pub fn bochner_identity_defect(conn: &Connection, phi: &Section) -> Result<f64> {
    let g = conn.geometry();
    let rho = crate::geometry::Cochain(phi.pointwise_norm_sq());
    let lhs = g.laplacian0(&rho)?.0;
    let lap = bochner_laplacian(conn, phi)?;
    let mut grad = vec![0.0; g.num_sites()];
    for axis in [Axis::X, Axis::Y] {
        let fwd = covariant_diff(conn, phi, axis)?;
        for s in 0..g.num_sites() {
            grad[s] += fwd.0[s].norm_sqr() + fwd.0[g.shift(s, axis, -1)].norm_sqr();
        }
    }
    Ok((0..g.num_sites())
        .map(|s| (lhs[s] - (2.0 * (phi.0[s].conj() * lap.0[s]).re - grad[s])).abs())
        .fold(0.0, f64::max))
}

/// Winding census of a converged state: total winding equals `d`, and each
/// seed point has a census point within `spacings·h`.
pub fn check_zero_census(rep: &SolveReport, spacings: f64) -> Result<CheckResult> {
    require_converged(rep, "zero_census")?;
    let geom = rep.geometry();
    let map = VortexMap::new(&geom, rep.config.d, rep.config.tau, rep.picard_target_link)?;
    let conn = map.connection(&rep.state.alpha)?;
    let census = locate_zeros(&conn, &rep.state.phi)?;
    let worst = rep
        .seed_divisor
        .0
        .iter()
        .map(|p| {
            census
                .0
                .iter()
                .map(|q| torus_distance(&geom, (p.x, p.y), (q.x, q.y)))
                .fold(f64::INFINITY, f64::min)
        })
        .fold(0.0, f64::max)
        / geom.h();
    // the seed positions only pin zeros when the section does not vanish
    let located = rep.classification != Classification::VortexModuli || worst <= spacings;
    let mut r = CheckResult::new(
        "zero_census",
        report_parameters(rep),
        census.degree() as f64,
        rep.config.d as f64,
        0.0,
        Tolerance::Absolute,
        "zeros of φ form an effective divisor of degree d",
    );
    r.pass &= located;
    r.details.insert("zero_points".into(), census.0.len() as f64);
    r.details.insert("max_seed_distance_h".into(), if worst.is_finite() { worst } else { -1.0 });
    r.details.insert("allowed_distance_h".into(), spacings);
    Ok(r)
}

/// Compare the report's classification with the analytic trichotomy.
pub fn check_classification(rep: &SolveReport) -> CheckResult {
    let c = &rep.config;
    let expected = classify_degree(c.d, VolSpec::Value(c.vol), c.tau);
    let code = |k: Classification| match k {
        Classification::Empty => 0.0,
        Classification::PicardTorus => 1.0,
        Classification::VortexModuli => 2.0,
        Classification::Inconclusive => -1.0,
    };
    let mut r = CheckResult::new(
        "classification",
        report_parameters(rep),
        code(rep.classification),
        code(expected),
        0.0,
        Tolerance::Absolute,
        "trichotomy: τ₀ > τ no solutions, τ₀ = τ Picard torus, τ₀ < τ symmetric product",
    );
    r.note = Some(format!(
        "measured {}, expected {} (codes: empty 0, picard_torus 1, vortex_moduli 2, inconclusive -1)",
        rep.classification.as_str(),
        expected.as_str()
    ));
    r
}

/// Volume given either as a float or as an exact multiple of `π`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum VolSpec {
    Value(f64),
    PiTimes(f64),
}

impl VolSpec {
    pub fn value(&self) -> f64 {
        match *self {
            VolSpec::Value(v) => v,
            VolSpec::PiTimes(k) => k * PI,
        }
    }
}

/// Position of `τ₀` relative to `τ`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TauRelation {
    /// `τ₀ < τ`.
    Below,
    /// `τ₀ = τ`.
    Critical,
    /// `τ₀ > τ`.
    Above,
}

/// Compare `τ₀ = 4πd/vol` with `τ`: exactly (rational arithmetic on the
/// binary inputs) when the volume is a multiple of `π`, otherwise with
/// relative tolerance `1e-12`.
pub fn tau_relation(d: i64, vol: VolSpec, tau: f64) -> TauRelation {
    use std::cmp::Ordering;
    let ord = match vol {
        VolSpec::PiTimes(k) => {
            let lhs = BigRational::from_integer((4 * d).into());
            let rhs = BigRational::from_float(tau).expect("finite tau")
                * BigRational::from_float(k).expect("finite volume factor");
            lhs.cmp(&rhs)
        }
        VolSpec::Value(v) => {
            let (a, b) = (4.0 * PI * d as f64, tau * v);
            if (a - b).abs() <= 1e-12 * a.abs().max(b.abs()) {
                Ordering::Equal
            } else {
                a.partial_cmp(&b).expect("finite inputs")
            }
        }
    };
    match ord {
        Ordering::Less => TauRelation::Below,
        Ordering::Equal => TauRelation::Critical,
        Ordering::Greater => TauRelation::Above,
    }
}

/// Analytic classification for degree `d`: negative degrees carry no
/// effective divisors and are empty.
pub fn classify_degree(d: i64, vol: VolSpec, tau: f64) -> Classification {
    if d < 0 {
        return Classification::Empty;
    }
    match tau_relation(d, vol, tau) {
        TauRelation::Below => Classification::VortexModuli,
        TauRelation::Critical => Classification::PicardTorus,
        TauRelation::Above => Classification::Empty,
    }
}

/// Degrees `0 ≤ d ≤ τ·vol/4π` with their analytic classification.
pub fn admissible_degrees(vol: VolSpec, tau: f64) -> Vec<(i64, Classification)> {
    let max = (tau * vol.value() / (4.0 * PI) + 1e-9).floor() as i64;
    (0..=max.max(-1)).map(|d| (d, classify_degree(d, vol, tau))).collect()
}

/// Seeds used by [`classify_solution_space`].
pub const CLASSIFICATION_SEEDS: u64 = 5;

/// Result of a multi-seed classification.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SpaceClassification {
    pub d: i64,
    pub vol: f64,
    pub tau: f64,
    pub n: usize,
    pub classification: Classification,
    pub per_seed: Vec<Classification>,
    pub residuals: Vec<f64>,
    pub expected: Classification,
    pub agrees: bool,
}

/// Solve from [`CLASSIFICATION_SEEDS`] random divisors and noise levels and
/// classify by the common outcome; disagreeing seeds give `inconclusive`.
pub fn classify_solution_space(d: i64, vol: VolSpec, tau: f64, n: usize, base_seed: u64) -> Result<SpaceClassification> {
    let reports: Vec<Result<SolveReport>> = (0..CLASSIFICATION_SEEDS)
        .into_par_iter()
        .map(|k| {
            let mut cfg = SolveConfig::new(d, tau, vol.value(), n);
            cfg.rng_seed = base_seed.wrapping_add(k);
            cfg.seed_noise = 0.02;
            solve(&cfg)
        })
        .collect();
    let reports = reports.into_iter().collect::<Result<Vec<_>>>()?;
    let per_seed: Vec<Classification> = reports.iter().map(|r| r.classification).collect();
    let classification = if per_seed.iter().all(|c| *c == per_seed[0]) {
        per_seed[0]
    } else {
        Classification::Inconclusive
    };
    let expected = classify_degree(d, vol, tau);
    Ok(SpaceClassification {
        d,
        vol: vol.value(),
        tau,
        n,
        classification,
        residuals: reports.iter().map(|r| r.residual.total).collect(),
        per_seed,
        expected,
        agrees: classification == expected,
    })
}

/// Values of `|φ|` below this make the phase undefined.
pub const ZERO_AMPLITUDE: f64 = 1e-12;

/// Gauge-invariant phase increment of `φ` along the link from `s` in
/// direction `axis`.
fn link_phase(conn: &Connection, phi: &Section, s: usize, axis: Axis) -> f64 {
    let g = conn.geometry();
    (phi.0[s].conj() * conn.transport(s, axis) * phi.0[g.shift(s, axis, 1)]).arg()
}

/// Winding of `φ` around plaquette `p`.
fn plaquette_winding(conn: &Connection, phi: &Section, p: usize, angle: f64) -> i64 {
    let g = conn.geometry();
    let px = g.shift(p, Axis::X, 1);
    let py = g.shift(p, Axis::Y, 1);
    let circ = link_phase(conn, phi, p, Axis::X) + link_phase(conn, phi, px, Axis::Y)
        - link_phase(conn, phi, py, Axis::X)
        - link_phase(conn, phi, p, Axis::Y);
    ((circ - angle) / (2.0 * PI)).round() as i64
}

/// Winding around the ring of 8 neighbours of site `s` (the boundary of its
/// 2×2 block of plaquettes), or `None` if the ring touches a zero.
fn ring_winding(conn: &Connection, phi: &Section, s: usize, angles: &[f64], zero: &[bool]) -> Option<i64> {
    let g = conn.geometry();
    let (i, j) = g.coords(s);
    let (i, j) = (i as isize, j as isize);
    let start = g.site(i - 1, j - 1);
    let steps = [
        (Axis::X, 1),
        (Axis::X, 1),
        (Axis::Y, 1),
        (Axis::Y, 1),
        (Axis::X, -1),
        (Axis::X, -1),
        (Axis::Y, -1),
        (Axis::Y, -1),
    ];
    let mut at = start;
    let mut circ = 0.0;
    for (axis, dir) in steps {
        if zero[at] {
            return None;
        }
        let next = g.shift(at, axis, dir);
        circ += if dir > 0 {
            link_phase(conn, phi, at, axis)
        } else {
            -link_phase(conn, phi, next, axis)
        };
        at = next;
    }
    let enclosed: f64 = [g.site(i - 1, j - 1), g.site(i, j - 1), g.site(i - 1, j), g.site(i, j)]
        .iter()
        .map(|&p| angles[p])
        .sum();
    Some(((circ - enclosed) / (2.0 * PI)).round() as i64)
}

/// Winding census of `φ`: plaquette centres (or sites where `φ` vanishes)
/// with nonzero phase winding and their multiplicities. The total equals
/// the degree of the connection.
pub fn locate_zeros(conn: &Connection, phi: &Section) -> Result<Divisor> {
    let g = *conn.geometry();
    crate::error::check_len(g.num_sites(), phi.len())?;
    let angles = conn.plaquette_angles()?.0;
    let zero: Vec<bool> = phi.0.iter().map(|z| z.norm() < ZERO_AMPLITUDE).collect();
    let mut consumed = vec![false; g.num_plaquettes()];
    let mut points = Vec::new();
    let mut assigned = 0i64;
    let mut unresolved_site = None;
    for s in (0..g.num_sites()).filter(|&s| zero[s]) {
        let (i, j) = g.coords(s);
        let (i, j) = (i as isize, j as isize);
        let block = [g.site(i - 1, j - 1), g.site(i, j - 1), g.site(i - 1, j), g.site(i, j)];
        for p in block {
            consumed[p] = true;
        }
        match ring_winding(conn, phi, s, &angles, &zero) {
            Some(w) => {
                if w != 0 {
                    let (x, y) = g.position(s);
                    points.push(DivisorPoint { x, y, multiplicity: w as i32 });
                    assigned += w;
                }
            }
            None => {
                unresolved_site.get_or_insert(s);
            }
        }
    }
    // plaquettes whose block ring was resolved must not be counted twice;
    // plaquettes touching an unresolved cluster are settled by the total
    for p in 0..g.num_plaquettes() {
        if consumed[p] || g.plaquette_corners(p).iter().any(|&c| zero[c]) {
            continue;
        }
        let w = plaquette_winding(conn, phi, p, angles[p]);
        if w != 0 {
            let (x, y) = g.plaquette_center(p);
            points.push(DivisorPoint { x, y, multiplicity: w as i32 });
            assigned += w;
        }
    }
    if let Some(s) = unresolved_site {
        let rest = -angles.iter().sum::<f64>() / (2.0 * PI);
        let rest = rest.round() as i64 - assigned;
        if rest != 0 {
            let (x, y) = g.position(s);
            points.push(DivisorPoint { x, y, multiplicity: rest as i32 });
        }
    }
    Ok(Divisor(points))
}

/// Distance on the torus between two physical points.
pub fn torus_distance(geom: &TorusGeometry, a: (f64, f64), b: (f64, f64)) -> f64 {
    let (dx, dy) = crate::solver::torus_displacement(a, b, geom.side());
    dx.hypot(dy)
}
