//! Command-line front end: `vortex {solve,verify,index,sweep,topology}`.
//!
//! Exit codes: 0 success or classified outcome, 1 configuration error,
//! 2 numerical divergence, 3 verification failure.

use crate::config::{CheckName, Command, Format, RunConfig, CODE_VERSION};
use crate::error::VortexError;
use crate::operators::curvature_scalar;
use crate::solver::{continue_in_tau, solve, tau0, SolveReport, SolveStatus};
use crate::topology::{
    chern_coefficient, format_rational, genus0_group_order, moduli_dimension, riemann_roch, GroupOrder,
};
use crate::verify::{
    check_classification, check_length_identity, check_pointwise_estimate, check_sup_bound,
    check_zero_census, classify_solution_space, report_parameters, CheckResult, TauRelation,
};
use crate::vortex::{fixed_point_analysis, numerical_index, VortexMap, VortexState};
use clap::{Args, Parser, Subcommand};
use rayon::prelude::*;
use serde::Serialize;
use std::ffi::OsString;
use std::fmt::Write as _;
use std::path::{Path, PathBuf};
use std::time::{Instant, SystemTime, UNIX_EPOCH};

pub const EXIT_OK: i32 = 0;
pub const EXIT_CONFIG: i32 = 1;
pub const EXIT_DIVERGED: i32 = 2;
pub const EXIT_VERIFY: i32 = 3;

#[derive(Debug, Parser)]
#[command(name = "vortex", version, about = "Lattice solver and checks for abelian vortex equations on a flat torus")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Sub,
}

#[derive(Debug, Subcommand)]
pub enum Sub {
    /// Solve one configuration; writes solve_report.json and fields.csv.
    Solve(RunArgs),
    /// Solve and run the selected checks; writes checks.json.
    Verify(RunArgs),
    /// Numerical index over a (d, n) grid; writes index_report.json.
    Index(RunArgs),
    /// τ-continuation or (d, vol) classification grid; writes sweep files.
    Sweep(RunArgs),
    /// Closed-form tables; writes topology.json and topology.txt.
    Topology(RunArgs),
}

#[derive(Debug, Args)]
pub struct RunArgs {
    /// JSON configuration file (optional for `topology`).
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// Output directory (created if missing).
    #[arg(long)]
    pub out: PathBuf,
    /// Worker threads for parallel cells.
    #[arg(long)]
    pub jobs: Option<usize>,
    /// Override every rng seed in the configuration.
    #[arg(long)]
    pub seed: Option<u64>,
}

#[derive(Serialize)]
struct Metadata {
    created_unix_s: u64,
    wall_time_s: f64,
    jobs: usize,
}

/// Report wrapper: everything except `metadata` is deterministic.
#[derive(Serialize)]
struct Envelope<'a, T: Serialize> {
    code_version: &'static str,
    config_hash: &'a str,
    command: Command,
    result: &'a T,
    metadata: Metadata,
}

struct Context {
    command: Command,
    config: RunConfig,
    hash: String,
    out: PathBuf,
    jobs: usize,
    started: Instant,
}

#[derive(Debug)]
enum Failure {
    Config(String),
    Numerical(String),
    Io(String),
}

impl From<std::io::Error> for Failure {
    fn from(e: std::io::Error) -> Self {
        Failure::Io(e.to_string())
    }
}

/// Library errors caused by bad inputs are configuration errors.
fn classify_error(e: VortexError) -> Failure {
    match e {
        VortexError::InvalidGeometry(_)
        | VortexError::InvalidParameter(_)
        | VortexError::DivisorDegree { .. }
        | VortexError::AssemblyTooLarge { .. } => Failure::Config(e.to_string()),
        _ => Failure::Numerical(e.to_string()),
    }
}

impl Context {
    fn write_json<T: Serialize>(&self, name: &str, result: &T) -> Result<(), Failure> {
        if !self.config.output.wants(Format::Json) {
            return Ok(());
        }
        let env = Envelope {
            code_version: CODE_VERSION,
            config_hash: &self.hash,
            command: self.command,
            result,
            metadata: Metadata {
                created_unix_s: SystemTime::now()
                    .duration_since(UNIX_EPOCH)
                    .map(|d| d.as_secs())
                    .unwrap_or(0),
                wall_time_s: self.started.elapsed().as_secs_f64(),
                jobs: self.jobs,
            },
        };
        let mut text = serde_json::to_string_pretty(&env).map_err(|e| Failure::Io(e.to_string()))?;
        text.push('\n');
        std::fs::write(self.out.join(name), text)?;
        Ok(())
    }

    fn write_csv(&self, name: &str, text: &str) -> Result<(), Failure> {
        if self.config.output.wants(Format::Csv) {
            std::fs::write(self.out.join(name), text)?;
        }
        Ok(())
    }
}

/// Parse arguments and run; returns the process exit code.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_CONFIG } else { EXIT_OK };
            let _ = e.print();
            return code;
        }
    };
    let (command, args) = match cli.command {
        Sub::Solve(a) => (Command::Solve, a),
        Sub::Verify(a) => (Command::Verify, a),
        Sub::Index(a) => (Command::Index, a),
        Sub::Sweep(a) => (Command::Sweep, a),
        Sub::Topology(a) => (Command::Topology, a),
    };
    match execute(command, &args) {
        Ok(code) => code,
        Err(Failure::Config(m)) => {
            eprintln!("config error: {m}");
            EXIT_CONFIG
        }
        Err(Failure::Numerical(m)) => {
            eprintln!("numerical failure: {m}");
            EXIT_DIVERGED
        }
        Err(Failure::Io(m)) => {
            eprintln!("i/o error: {m}");
            EXIT_CONFIG
        }
    }
}

fn load_config(command: Command, path: Option<&Path>) -> Result<RunConfig, Failure> {
    match path {
        Some(p) => RunConfig::load(p).map_err(|e| Failure::Config(e.0)),
        None if command == Command::Topology => Ok(RunConfig::parse("{}").expect("empty config parses")),
        None => Err(Failure::Config(format!("`{command}` needs --config <path>"))),
    }
}

fn execute(command: Command, args: &RunArgs) -> Result<i32, Failure> {
    let started = Instant::now();
    let mut config = load_config(command, args.config.as_deref())?;
    if let Some(seed) = args.seed {
        config = config.with_seed(seed);
    }
    config.validate(command).map_err(|e| Failure::Config(e.0))?;
    if args.jobs == Some(0) {
        return Err(Failure::Config("--jobs must be at least 1".into()));
    }
    std::fs::create_dir_all(&args.out)?;
    let jobs = args.jobs.unwrap_or_else(rayon::current_num_threads);
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(jobs)
        .build()
        .map_err(|e| Failure::Config(e.to_string()))?;
    let ctx = Context {
        command,
        hash: config.hash(command),
        config,
        out: args.out.clone(),
        jobs,
        started,
    };
    pool.install(|| match command {
        Command::Solve => cmd_solve(&ctx),
        Command::Verify => cmd_verify(&ctx),
        Command::Index => cmd_index(&ctx),
        Command::Sweep => cmd_sweep(&ctx),
        Command::Topology => cmd_topology(&ctx),
    })
}

fn status_exit(rep: &SolveReport) -> i32 {
    match rep.status {
        SolveStatus::Converged | SolveStatus::LatticeFloor | SolveStatus::ObstructionFloor => EXIT_OK,
        SolveStatus::Diverged | SolveStatus::MaxIterations => EXIT_DIVERGED,
    }
}

/// Rows `site,x,y,re_phi,im_phi,abs_phi_sq,curvature`; `curvature` is i⋆F on
/// the plaquette whose lower-left corner is the site.
pub fn fields_csv(rep: &SolveReport) -> Result<String, VortexError> {
    let geom = rep.geometry();
    let map = VortexMap::new(&geom, rep.config.d, rep.config.tau, rep.picard_target_link)?;
    let kappa = curvature_scalar(&map.connection(&rep.state.alpha)?)?;
    let mut out = String::from("site,x,y,re_phi,im_phi,abs_phi_sq,curvature\n");
    for s in 0..geom.num_sites() {
        let (x, y) = geom.position(s);
        let z = rep.state.phi.0[s];
        writeln!(out, "{s},{x},{y},{},{},{},{}", z.re, z.im, z.norm_sqr(), kappa.0[s]).expect("write to string");
    }
    Ok(out)
}

fn run_solve(ctx: &Context) -> Result<SolveReport, Failure> {
    let cfg = ctx.config.solve.as_ref().expect("validated");
    solve(cfg).map_err(classify_error)
}

fn summary_line(rep: &SolveReport) -> String {
    format!(
        "status={:?} classification={} iterations={} residual={:.3e} phi_norm_sq={:.6} max_phi_sq={:.6}",
        rep.status,
        rep.classification.as_str(),
        rep.iterations,
        rep.residual.total,
        rep.phi_norm_sq,
        rep.max_phi_sq
    )
}

fn cmd_solve(ctx: &Context) -> Result<i32, Failure> {
    let rep = run_solve(ctx)?;
    ctx.write_json("solve_report.json", &rep)?;
    ctx.write_csv("fields.csv", &fields_csv(&rep).map_err(classify_error)?)?;
    println!("{}", summary_line(&rep));
    Ok(status_exit(&rep))
}

#[derive(Serialize)]
struct VerifyResult<'a> {
    status: SolveStatus,
    classification: &'static str,
    residual: f64,
    iterations: usize,
    all_pass: bool,
    /// Checks that need a converged solution and were skipped.
    skipped: usize,
    checks: &'a [CheckResult],
}

fn run_check(name: CheckName, rep: &SolveReport, ctx: &Context) -> CheckResult {
    let t = &ctx.config.tolerances;
    let label = serde_json::to_value(name)
        .ok()
        .and_then(|v| v.as_str().map(String::from))
        .unwrap_or_default();
    let result = match name {
        CheckName::LengthIdentity => check_length_identity(rep, t.length_identity),
        CheckName::SupBound => check_sup_bound(rep, t.sup_bound),
        CheckName::PointwiseEstimate => check_pointwise_estimate(rep, t.pointwise_constant),
        CheckName::ZeroCensus => check_zero_census(rep, t.census_spacings),
        CheckName::Classification => Ok(check_classification(rep)),
    };
    result.unwrap_or_else(|e| CheckResult::not_evaluated(&label, report_parameters(rep), e.to_string()))
}

fn cmd_verify(ctx: &Context) -> Result<i32, Failure> {
    let rep = run_solve(ctx)?;
    let names = ctx
        .config
        .checks
        .clone()
        .unwrap_or_else(|| CheckName::DEFAULT_SUITE.to_vec());
    let checks: Vec<CheckResult> = names.par_iter().map(|&n| run_check(n, &rep, ctx)).collect();
    // a check with a note was not evaluated (e.g. no solution exists); it is
    // reported but does not count as a verification failure
    let skipped = checks.iter().filter(|c| c.note.is_some()).count();
    let all_pass = checks.iter().all(|c| c.pass || c.note.is_some());
    ctx.write_json(
        "checks.json",
        &VerifyResult {
            status: rep.status,
            classification: rep.classification.as_str(),
            residual: rep.residual.total,
            iterations: rep.iterations,
            all_pass,
            skipped,
            checks: &checks,
        },
    )?;
    for c in &checks {
        if let Some(note) = &c.note {
            println!("SKIP {}: {note}", c.name);
            continue;
        }
        println!(
            "{} {}: measured {:e}, expected {:e}, tolerance {:e}",
            if c.pass { "PASS" } else { "FAIL" },
            c.name,
            c.measured,
            c.expected,
            c.tolerance
        );
    }
    Ok(match (rep.status, all_pass) {
        (SolveStatus::Diverged, _) => EXIT_DIVERGED,
        (_, true) => EXIT_OK,
        (_, false) => EXIT_VERIFY,
    })
}

#[derive(Serialize)]
struct IndexRow {
    d: i64,
    n: usize,
    expected_index: i64,
    numerical_index: Option<i64>,
    real_index: Option<i64>,
    complex_index: Option<i64>,
    chiral_plus: Option<usize>,
    chiral_minus: Option<usize>,
    real_gap: Option<f64>,
    complex_gap: Option<f64>,
    fixed_point_sigma_min: Option<f64>,
    fixed_point_cokernel: Option<usize>,
    fixed_point_index: Option<i64>,
    matches: bool,
    error: Option<String>,
}

fn index_row(d: i64, n: usize, vol: f64) -> IndexRow {
    let expected = riemann_roch(d, 1).real_index;
    let mut row = IndexRow {
        d,
        n,
        expected_index: expected,
        numerical_index: None,
        real_index: None,
        complex_index: None,
        chiral_plus: None,
        chiral_minus: None,
        real_gap: None,
        complex_gap: None,
        fixed_point_sigma_min: None,
        fixed_point_cokernel: None,
        fixed_point_index: None,
        matches: false,
        error: None,
    };
    let computed = crate::geometry::TorusGeometry::new(n, vol).and_then(|g| {
        let map = VortexMap::new(&g, d, 1.0, [0.0; 2])?;
        let ix = numerical_index(&map, &VortexState::zeros(&g))?;
        let fp = fixed_point_analysis(d, n, vol)?;
        Ok((ix, fp))
    });
    match computed {
        Ok((ix, fp)) => {
            row.numerical_index = Some(ix.index);
            row.real_index = Some(ix.real_index);
            row.complex_index = Some(ix.complex_index);
            row.chiral_plus = Some(ix.chiral_plus);
            row.chiral_minus = Some(ix.chiral_minus);
            row.real_gap = Some(ix.real.gap);
            row.complex_gap = Some(ix.complex_gap);
            row.fixed_point_sigma_min = Some(fp.sigma_min);
            row.fixed_point_cokernel = Some(fp.cokernel);
            row.fixed_point_index = Some(fp.index);
            row.matches = ix.index == expected && fp.sigma_min > 0.0 && fp.cokernel == 1;
        }
        Err(e) => row.error = Some(e.to_string()),
    }
    row
}

fn opt<T: std::fmt::Display>(v: &Option<T>) -> String {
    v.as_ref().map(|x| x.to_string()).unwrap_or_default()
}

fn cmd_index(ctx: &Context) -> Result<i32, Failure> {
    let ix = ctx.config.index.as_ref().expect("validated");
    let cells: Vec<(i64, usize)> = ix.n.iter().flat_map(|&n| ix.degrees.iter().map(move |&d| (d, n))).collect();
    let rows: Vec<IndexRow> = cells.par_iter().map(|&(d, n)| index_row(d, n, ix.vol)).collect();
    ctx.write_json("index_report.json", &rows)?;
    let mut csv = String::from("d,n,expected_index,numerical_index,chiral_plus,chiral_minus,fixed_point_sigma_min,fixed_point_cokernel,matches\n");
    for r in &rows {
        writeln!(
            csv,
            "{},{},{},{},{},{},{},{},{}",
            r.d,
            r.n,
            r.expected_index,
            opt(&r.numerical_index),
            opt(&r.chiral_plus),
            opt(&r.chiral_minus),
            opt(&r.fixed_point_sigma_min),
            opt(&r.fixed_point_cokernel),
            r.matches
        )
        .expect("write to string");
        println!(
            "d={} n={}: index {} (expected {}) {}",
            r.d,
            r.n,
            opt(&r.numerical_index),
            r.expected_index,
            if r.matches { "match" } else { "MISMATCH" }
        );
    }
    ctx.write_csv("index.csv", &csv)?;
    Ok(if rows.iter().all(|r| r.matches) { EXIT_OK } else { EXIT_VERIFY })
}

#[derive(Serialize)]
struct TauStage {
    tau: f64,
    status: Option<SolveStatus>,
    classification: Option<&'static str>,
    residual: Option<f64>,
    phi_norm_sq: Option<f64>,
    expected_phi_norm_sq: f64,
    iterations: Option<usize>,
    error: Option<String>,
}

fn cmd_sweep(ctx: &Context) -> Result<i32, Failure> {
    let sw = ctx.config.sweep.as_ref().expect("validated");
    if let Some(ts) = &sw.tau_schedule {
        let base = &ts.base;
        let reports = continue_in_tau(base, &ts.schedule).map_err(classify_error)?;
        let stages: Vec<TauStage> = ts
            .schedule
            .iter()
            .zip(&reports)
            .map(|(&tau, r)| {
                let expected = ((tau - tau0(base.d, base.vol)) * base.vol).max(0.0);
                match r {
                    Ok(rep) => TauStage {
                        tau,
                        status: Some(rep.status),
                        classification: Some(rep.classification.as_str()),
                        residual: Some(rep.residual.total),
                        phi_norm_sq: Some(rep.phi_norm_sq),
                        expected_phi_norm_sq: expected,
                        iterations: Some(rep.iterations),
                        error: None,
                    },
                    Err(e) => TauStage {
                        tau,
                        status: None,
                        classification: None,
                        residual: None,
                        phi_norm_sq: None,
                        expected_phi_norm_sq: expected,
                        iterations: None,
                        error: Some(e.to_string()),
                    },
                }
            })
            .collect();
        ctx.write_json("sweep_report.json", &stages)?;
        let mut csv = String::from("tau,status,classification,residual,phi_norm_sq,expected_phi_norm_sq\n");
        for s in &stages {
            writeln!(
                csv,
                "{},{},{},{},{},{}",
                s.tau,
                s.status.map(|v| format!("{v:?}")).unwrap_or_default(),
                s.classification.unwrap_or(""),
                opt(&s.residual),
                opt(&s.phi_norm_sq),
                s.expected_phi_norm_sq
            )
            .expect("write to string");
        }
        ctx.write_csv("sweep.csv", &csv)?;
        print!("{csv}");
        let diverged = stages
            .iter()
            .any(|s| s.error.is_some() || matches!(s.status, Some(SolveStatus::Diverged | SolveStatus::MaxIterations)));
        return Ok(if diverged { EXIT_DIVERGED } else { EXIT_OK });
    }
    let grid = sw.grid.as_ref().expect("validated");
    let cells: Vec<_> = grid.degrees.iter().flat_map(|&d| grid.vols.iter().map(move |&v| (d, v))).collect();
    let results: Vec<_> = cells
        .par_iter()
        .map(|&(d, vol)| classify_solution_space(d, vol, grid.tau, grid.n, grid.seed))
        .collect();
    let results = results.into_iter().collect::<Result<Vec<_>, _>>().map_err(classify_error)?;
    ctx.write_json("sweep_report.json", &results)?;
    let mut csv = String::from("d,vol,tau,n,classification,expected,agrees\n");
    for r in &results {
        writeln!(
            csv,
            "{},{},{},{},{},{},{}",
            r.d,
            r.vol,
            r.tau,
            r.n,
            r.classification.as_str(),
            r.expected.as_str(),
            r.agrees
        )
        .expect("write to string");
    }
    ctx.write_csv("sweep.csv", &csv)?;
    print!("{csv}");
    Ok(if results.iter().all(|r| r.agrees) { EXIT_OK } else { EXIT_VERIFY })
}

#[derive(Serialize)]
struct TopologyTables {
    riemann_roch: Vec<crate::topology::IndexData>,
    chern_coefficients: Vec<(u32, String)>,
    genus0_orders: Vec<crate::topology::Genus0Order>,
    moduli_dimensions: Vec<(i64, u32, TauRelation, i64)>,
}

fn cmd_topology(ctx: &Context) -> Result<i32, Failure> {
    let t = ctx.config.topology.clone().unwrap_or_default();
    let degrees = t.min_degree..=t.max_degree;
    let tables = TopologyTables {
        riemann_roch: t
            .genera
            .iter()
            .flat_map(|&g| degrees.clone().map(move |d| riemann_roch(d, g)))
            .collect(),
        chern_coefficients: (0..=t.max_k).map(|k| (k, format_rational(&chern_coefficient(k)))).collect(),
        genus0_orders: degrees.clone().map(genus0_group_order).collect(),
        moduli_dimensions: t
            .genera
            .iter()
            .flat_map(|&g| {
                degrees.clone().filter(|d| *d >= 0).flat_map(move |d| {
                    [TauRelation::Below, TauRelation::Critical, TauRelation::Above]
                        .map(|rel| (d, g, rel, moduli_dimension(d, g, rel)))
                })
            })
            .collect(),
    };
    ctx.write_json("topology.json", &tables)?;
    let mut txt = String::from("# genus-0 group orders\n");
    for o in &tables.genus0_orders {
        match o.order {
            GroupOrder::Known(k) => writeln!(txt, "d={}: order {k}", o.d),
            GroupOrder::Unknown => writeln!(txt, "d={}: order unknown (finite)", o.d),
        }
        .expect("write to string");
    }
    txt.push_str("# Riemann-Roch indices (complex d+1-g, real 2(d+1-g)-1)\n");
    for r in &tables.riemann_roch {
        writeln!(txt, "d={} g={}: complex {} real {}", r.d, r.g, r.complex_index, r.real_index).expect("write to string");
    }
    txt.push_str("# Chern coefficients of theta^k\n");
    for (k, c) in &tables.chern_coefficients {
        writeln!(txt, "k={k}: {c}").expect("write to string");
    }
    std::fs::write(ctx.out.join("topology.txt"), &txt)?;
    print!("{txt}");
    Ok(EXIT_OK)
}
