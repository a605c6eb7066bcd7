//! Command-line front end.
//!
//! Exit codes: 0 success, 2 validation or usage error, 3 I/O or parse
//! error, 4 numeric failure (a verification check or the optimizer failed).

use std::ffi::OsString;
use std::fs;
use std::io::{self, Write};
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use thiserror::Error;

use crate::constructions::{self, ConstructionError};
use crate::hilbert::{self, Operator, TOL_CHECK};
use crate::nchv::{self, NchvError, Propagation, Status, MAX_EXHAUSTIVE};
use crate::optimizer::{
    self, OptimizationResult, OptimizerError, SearchOptions, DEFAULT_EXCLUSIVITY_TOL, DEFAULT_MAX_ITERATIONS, MIN_GRID,
};
use crate::prepost::{self, PrePostError};
use crate::report::Report;
use crate::scenario::{self, context_name, ForcedValue, Justification, LoadOptions, PrePostScenario, ScenarioError};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ExitStatus {
    Success = 0,
    Validation = 2,
    Io = 3,
    Numeric = 4,
}

impl ExitStatus {
    pub fn code(self) -> i32 {
        self as i32
    }
}

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),
    #[error("{0}")]
    Validation(String),
    #[error("cannot read {path}: {source}")]
    Read { path: PathBuf, source: io::Error },
    #[error("cannot write {path}: {source}")]
    Write { path: PathBuf, source: io::Error },
    #[error("{path}: {source}")]
    Load { path: PathBuf, source: ScenarioError },
    #[error("{0}")]
    Numeric(String),
}

impl CliError {
    pub fn status(&self) -> ExitStatus {
        match self {
            CliError::Usage(_) | CliError::Validation(_) => ExitStatus::Validation,
            CliError::Read { .. } | CliError::Write { .. } => ExitStatus::Io,
            // Syntax and schema problems make the file malformed; anything
            // that parses but describes an invalid scenario is a validation error.
            CliError::Load { source, .. } => match source {
                ScenarioError::Parse { .. }
                | ScenarioError::UnknownField { .. }
                | ScenarioError::WrongDimension { .. } => ExitStatus::Io,
                _ => ExitStatus::Validation,
            },
            CliError::Numeric(_) => ExitStatus::Numeric,
        }
    }
}

impl From<OptimizerError> for CliError {
    fn from(e: OptimizerError) -> Self {
        match e {
            OptimizerError::GridTooSmall(_) | OptimizerError::BadTolerance(_) => CliError::Usage(e.to_string()),
            _ => CliError::Numeric(e.to_string()),
        }
    }
}

impl From<NchvError> for CliError {
    fn from(e: NchvError) -> Self {
        match e {
            NchvError::TooManyProjectors(_) | NchvError::UnknownLabel(_) => CliError::Validation(e.to_string()),
            NchvError::PrePost(inner) => inner.into(),
            _ => CliError::Numeric(e.to_string()),
        }
    }
}

impl From<PrePostError> for CliError {
    fn from(e: PrePostError) -> Self {
        match e {
            PrePostError::SelectionInconsistency { .. }
            | PrePostError::UnknownLabel(_)
            | PrePostError::PostselectionImpossible(_) => CliError::Validation(e.to_string()),
            _ => CliError::Numeric(e.to_string()),
        }
    }
}

/// A finished command: the report to print and the exit status it implies.
#[derive(Debug, Clone, PartialEq)]
pub struct Outcome {
    pub report: Report,
    pub status: ExitStatus,
}

#[derive(Debug, Parser)]
#[command(
    name = "qpp",
    version,
    about = "Verify pre- and post-selected no-hidden-variables scenarios"
)]
pub struct Cli {
    /// Tolerance for certainty, normalization and validation checks.
    #[arg(long, global = true, env = "QPP_TOL", default_value_t = TOL_CHECK, value_parser = positive)]
    pub tol: f64,
    /// Print the report as JSON instead of aligned text.
    #[arg(long, global = true)]
    pub json: bool,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Rebuild a construction and check it against its expected properties.
    Verify {
        #[command(subcommand)]
        target: VerifyTarget,
    },
    /// Analyse a scenario file: validation, forced values, assignments.
    Check(CheckArgs),
    /// Search for the maximal selection probability.
    Optimize(OptimizeArgs),
}

#[derive(Debug, Subcommand)]
pub enum VerifyTarget {
    /// Two unentangled spin-1/2 particles, seven propositions.
    Cabello(ScenarioIo),
    /// Hardy's entangled construction at given or optimal angles.
    Hardy(HardyArgs),
}

#[derive(Debug, Args)]
pub struct ScenarioIo {
    /// Verify this scenario file instead of the built-in construction.
    #[arg(long)]
    pub scenario: Option<PathBuf>,
    /// Write the verified scenario to this path.
    #[arg(long)]
    pub export: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct HardyArgs {
    #[arg(
        long,
        allow_negative_numbers = true,
        requires = "theta_b",
        conflicts_with = "optimal"
    )]
    pub theta_a: Option<f64>,
    #[arg(
        long,
        allow_negative_numbers = true,
        requires = "theta_a",
        conflicts_with = "optimal"
    )]
    pub theta_b: Option<f64>,
    /// Use the angles found by `optimize hardy`.
    #[arg(long)]
    pub optimal: bool,
    #[arg(long, default_value_t = 64, value_parser = grid)]
    pub grid: usize,
    #[arg(long, default_value_t = 1e-9, value_parser = positive)]
    pub refine_tol: f64,
    #[command(flatten)]
    pub io: ScenarioIo,
}

#[derive(Debug, Args)]
pub struct CheckArgs {
    pub path: PathBuf,
    /// Largest number of SAT witnesses listed.
    #[arg(long, default_value_t = 16)]
    pub max_witnesses: usize,
    /// Ignore unknown fields in the scenario file.
    #[arg(long)]
    pub lax: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum OptimizeTarget {
    Hardy,
    CabelloFamily,
}

#[derive(Debug, Args)]
pub struct OptimizeArgs {
    pub target: OptimizeTarget,
    #[arg(long, default_value_t = 64, value_parser = grid)]
    pub grid: usize,
    #[arg(long, default_value_t = 1e-9, value_parser = positive)]
    pub refine_tol: f64,
    /// Worker threads; the result does not depend on it.
    #[arg(long, value_parser = clap::value_parser!(u16).range(1..))]
    pub threads: Option<u16>,
    #[arg(long, default_value_t = DEFAULT_MAX_ITERATIONS)]
    pub max_iter: usize,
    /// Largest |<delta+|delta->| accepted as exclusive (cabello-family only).
    #[arg(long, default_value_t = DEFAULT_EXCLUSIVITY_TOL, value_parser = positive)]
    pub exclusivity_tol: f64,
}

fn positive(s: &str) -> Result<f64, String> {
    match s.parse::<f64>() {
        Ok(v) if v.is_finite() && v > 0.0 => Ok(v),
        Ok(v) => Err(format!("{v} is not a positive finite number")),
        Err(e) => Err(e.to_string()),
    }
}

fn grid(s: &str) -> Result<usize, String> {
    let n: usize = s.parse().map_err(|e: std::num::ParseIntError| e.to_string())?;
    if n < MIN_GRID {
        return Err(format!("grid resolution must be at least {MIN_GRID}"));
    }
    Ok(n)
}

/// ((√5 − 1)/2)⁵, the largest selection probability of Hardy's construction.
pub fn golden_fifth() -> f64 {
    ((5f64.sqrt() - 1.0) / 2.0).powi(5)
}

/// Labels of the seven propositions in the order
/// α, β+, β−, γ+, γ−, δ+, δ−.
#[derive(Debug, Clone, Copy)]
pub struct Roles {
    pub alpha: &'static str,
    pub beta: [&'static str; 2],
    pub gamma: [&'static str; 2],
    pub delta: [&'static str; 2],
}

impl Roles {
    pub const CABELLO: Roles = Roles {
        alpha: constructions::ALPHA,
        beta: [constructions::BETA_PLUS, constructions::BETA_MINUS],
        gamma: [constructions::GAMMA_PLUS, constructions::GAMMA_MINUS],
        delta: [constructions::DELTA_PLUS, constructions::DELTA_MINUS],
    };
    pub const HARDY: Roles = Roles {
        alpha: constructions::HAT_ALPHA,
        beta: [constructions::HAT_BETA_PLUS, constructions::HAT_BETA_MINUS],
        gamma: [constructions::HAT_GAMMA_PLUS, constructions::HAT_GAMMA_MINUS],
        delta: [constructions::HAT_DELTA_PLUS, constructions::HAT_DELTA_MINUS],
    };

    fn all(&self) -> [&'static str; 7] {
        [
            self.alpha,
            self.beta[0],
            self.beta[1],
            self.gamma[0],
            self.gamma[1],
            self.delta[0],
            self.delta[1],
        ]
    }

    fn expected_forced(&self) -> Vec<ForcedValue> {
        let zero = |label: &str, justification| ForcedValue {
            label: label.to_string(),
            bit: hilbert::Bit::Zero,
            justification,
        };
        let mut out = vec![
            zero(self.alpha, Justification::Prediction),
            zero(self.beta[0], Justification::Prediction),
            zero(self.beta[1], Justification::Prediction),
            zero(self.gamma[0], Justification::Retrodiction),
            zero(self.gamma[1], Justification::Retrodiction),
        ];
        out.sort_by(|a, b| a.label.cmp(&b.label));
        out
    }

    pub fn expected_conclusions(&self) -> Vec<String> {
        let [p, m] = self.delta;
        vec![format!("{p}=1"), format!("{m}=1"), format!("CONFLICT({p}, {m})")]
    }
}

/// What `verify` expects of the selection probability.
#[derive(Debug, Clone, Copy)]
pub enum ProbabilityExpectation {
    /// Equal to `value` within `tol`.
    Exact { value: f64, tol: f64 },
    /// Equal to `value` within `tol` and strictly below `below`.
    Optimal { value: f64, tol: f64, below: f64 },
    /// At most `bound` (plus 1e-12), and equal to the closed form at the
    /// given angles when they are known.
    AtMost { bound: f64, angles: Option<(f64, f64)> },
}

#[derive(Debug, Clone, Copy)]
pub struct Expectation {
    pub roles: Roles,
    pub probability: ProbabilityExpectation,
    /// Largest entry of `ΣP − I` accepted per context.
    pub identity_tol: f64,
}

impl Expectation {
    pub fn cabello() -> Self {
        Self {
            roles: Roles::CABELLO,
            probability: ProbabilityExpectation::Exact {
                value: 1.0 / 9.0,
                tol: 1e-12,
            },
            identity_tol: 1e-12,
        }
    }

    pub fn hardy(probability: ProbabilityExpectation) -> Self {
        Self {
            roles: Roles::HARDY,
            probability,
            identity_tol: 1e-9,
        }
    }
}

const EXCLUSIVE_OVERLAP_TOL: f64 = 1e-12;
const ABL_TOL: f64 = 1e-12;

/// Hardy's selection probability from its closed form
/// `(ca·sa·cb·sb)² / (sa²cb² + ca²sb² + ca²cb²)`.
fn hardy_closed_form(theta_a: f64, theta_b: f64) -> f64 {
    let (sa, ca) = theta_a.sin_cos();
    let (sb, cb) = theta_b.sin_cos();
    let num = ca * sa * cb * sb;
    num * num / (sa * sa * cb * cb + ca * ca * sb * sb + ca * ca * cb * cb)
}

fn show_forced(fv: &[ForcedValue]) -> String {
    if fv.is_empty() {
        return "none".into();
    }
    fv.iter().map(ForcedValue::to_string).collect::<Vec<_>>().join(", ")
}

fn push_validation(report: &mut Report, s: &PrePostScenario, tol: f64) -> bool {
    let validation = scenario::validate(s, tol);
    for c in &validation.checks {
        let verdict = if c.pass { "pass" } else { "fail" };
        report.check(
            format!("validate: {}", c.name),
            "pass",
            verdict,
            Some(c.deviation),
            c.pass,
        );
    }
    validation.passed()
}

fn context_operators(s: &PrePostScenario, members: &[String]) -> Vec<Operator> {
    members
        .iter()
        .map(|m| s.projector(m).expect("validated labels resolve").operator().clone())
        .collect()
}

/// Runs the full verification suite on `s`. Validation failures give exit
/// status 2; any other failed check gives 4.
pub fn verify_scenario(s: &PrePostScenario, command: &str, exp: &Expectation, tol: f64) -> Result<Outcome, CliError> {
    let mut report = Report::new(command);
    let roles = exp.roles;

    if !push_validation(&mut report, s, tol) {
        return Ok(Outcome {
            report,
            status: ExitStatus::Validation,
        });
    }
    if let Some(missing) = roles.all().into_iter().find(|l| s.projector(l).is_none()) {
        return Err(CliError::Validation(format!("scenario has no projector `{missing}`")));
    }

    let prob = prepost::selection_probability(s);
    report.value("selection probability", prob);
    match exp.probability {
        ProbabilityExpectation::Exact { value, tol } => {
            report.check_close("selection probability", value, prob, tol);
        }
        ProbabilityExpectation::Optimal { value, tol, below } => {
            report.check_close("selection probability", value, prob, tol);
            report.check(
                "selection probability below bound",
                format!("< {below:.17}"),
                format!("{prob:.17}"),
                Some(below - prob),
                prob < below,
            );
        }
        ProbabilityExpectation::AtMost { bound, angles } => {
            report.check(
                "selection probability at most maximum",
                format!("<= {bound:.17}"),
                format!("{prob:.17}"),
                Some((prob - bound).max(0.0)),
                prob <= bound + 1e-12,
            );
            if let Some((a, b)) = angles {
                report.check_close(
                    "selection probability closed form",
                    hardy_closed_form(a, b),
                    prob,
                    1e-12,
                );
            }
        }
    }

    for (i, ctx) in s.contexts().iter().enumerate() {
        let ops = context_operators(s, &ctx.members);
        let dev = hilbert::identity_deviation(&ops).map_err(|e| CliError::Numeric(e.to_string()))?;
        let pass = hilbert::is_resolution_of_identity(&ops, exp.identity_tol).unwrap_or(false);
        report.check(
            format!("{} resolution of identity", context_name(i, ctx)),
            format!("max |ΣP − I| < {:e}", exp.identity_tol),
            format!("{dev:.3e}"),
            Some(dev),
            pass,
        );
    }

    for (a, b) in s.exclusive_pairs() {
        let (pa, pb) = (s.projector(a), s.projector(b));
        let overlap = match (pa, pb) {
            (Some(pa), Some(pb)) => hilbert::vdot(pa.state().amps(), pb.state().amps()).norm(),
            _ => f64::INFINITY,
        };
        report.check(
            format!("exclusive pair ({a}, {b}) overlap"),
            format!("< {EXCLUSIVE_OVERLAP_TOL:e}"),
            format!("{overlap:.3e}"),
            Some(overlap),
            overlap < EXCLUSIVE_OVERLAP_TOL,
        );
    }

    let forced = prepost::forced_values(s, tol)?;
    let expected_forced = roles.expected_forced();
    report.check(
        "forced values",
        show_forced(&expected_forced),
        show_forced(&forced),
        None,
        forced == expected_forced,
    );

    let sat = nchv::enumerate_assignments(s, &forced)?;
    let total = 1u64 << s.projectors().len();
    report.value("assignments examined", sat.assignments_examined as f64);
    report.check(
        "noncontextual assignments",
        format!("UNSAT over {total} assignments"),
        format!("{} over {} assignments", sat.status, sat.assignments_examined),
        None,
        sat.status == Status::Unsat && sat.assignments_examined == total,
    );

    let expected_trace = roles.expected_conclusions();
    let actual_trace = match nchv::propagate(s, &forced)? {
        Propagation::Conflict(trace) => {
            for (k, step) in trace.steps.iter().enumerate() {
                report.note(format!("step {}: {step}", k + 1));
            }
            trace.conclusions()
        }
        Propagation::Fixpoint(_) => {
            report.note("UNSAT without unit-propagation certificate");
            Vec::new()
        }
    };
    report.check(
        "contradiction trace",
        expected_trace.join(", "),
        if actual_trace.is_empty() {
            "no certificate".to_string()
        } else {
            actual_trace.join(", ")
        },
        None,
        actual_trace == expected_trace,
    );

    for skip in &forced {
        let subset: Vec<ForcedValue> = forced.iter().filter(|f| f.label != skip.label).cloned().collect();
        let r = nchv::enumerate_assignments(s, &subset)?;
        report.check(
            format!("minimality without {}", skip.label),
            "SAT",
            r.status.to_string(),
            None,
            r.status == Status::Sat,
        );
    }

    for label in roles.all() {
        let expected = if roles.delta.contains(&label) { 1.0 } else { 0.0 };
        let name = format!("ABL probability {label}");
        match prepost::abl_probability(s, label, tol) {
            Ok(p) => {
                report.check_close(name, expected, p, ABL_TOL);
            }
            Err(e) => {
                report.check(name, format!("{expected}"), e.to_string(), None, false);
            }
        }
    }

    let status = if report.overall() {
        ExitStatus::Success
    } else {
        ExitStatus::Numeric
    };
    Ok(Outcome { report, status })
}

fn read_scenario(path: &Path, opts: LoadOptions) -> Result<PrePostScenario, CliError> {
    let text = fs::read_to_string(path).map_err(|source| CliError::Read {
        path: path.to_path_buf(),
        source,
    })?;
    scenario::load_with(&text, opts).map_err(|source| CliError::Load {
        path: path.to_path_buf(),
        source,
    })
}

fn export(path: Option<&Path>, s: &PrePostScenario) -> Result<(), CliError> {
    if let Some(path) = path {
        fs::write(path, scenario::save(s)).map_err(|source| CliError::Write {
            path: path.to_path_buf(),
            source,
        })?;
    }
    Ok(())
}

fn degenerate(e: ConstructionError) -> CliError {
    match e {
        ConstructionError::Degenerate(_) => CliError::Validation(e.to_string()),
        other => CliError::Validation(format!("degenerate configuration: {other}")),
    }
}

pub fn verify_cabello(io: &ScenarioIo, tol: f64) -> Result<Outcome, CliError> {
    let (s, source) = match &io.scenario {
        Some(path) => (
            read_scenario(path, LoadOptions { lax: false, tol })?,
            format!("source: {}", path.display()),
        ),
        None => (
            constructions::cabello_scenario(),
            "source: built-in construction".to_string(),
        ),
    };
    export(io.export.as_deref(), &s)?;
    let mut out = verify_scenario(&s, "verify cabello", &Expectation::cabello(), tol)?;
    out.report.note(source);
    Ok(out)
}

pub fn verify_hardy(args: &HardyArgs, tol: f64) -> Result<Outcome, CliError> {
    let mut extra = Vec::new();
    let (s, probability, source) = if let Some(path) = &args.io.scenario {
        let s = read_scenario(path, LoadOptions { lax: false, tol })?;
        let exp = ProbabilityExpectation::AtMost {
            bound: golden_fifth(),
            angles: None,
        };
        (s, exp, format!("source: {}", path.display()))
    } else if args.optimal {
        let opts = SearchOptions::new(args.grid, args.refine_tol);
        let best = optimizer::maximize_hardy(&opts)?;
        let (a, b) = (best.parameter("theta_a").unwrap(), best.parameter("theta_b").unwrap());
        extra.push(("theta_a", a));
        extra.push(("theta_b", b));
        let s = constructions::hardy_scenario(a, b).map_err(degenerate)?;
        let exp = ProbabilityExpectation::Optimal {
            value: golden_fifth(),
            tol: 1e-6,
            below: 1.0 / 9.0,
        };
        (s, exp, "source: optimal angles".to_string())
    } else if let (Some(a), Some(b)) = (args.theta_a, args.theta_b) {
        extra.push(("theta_a", a));
        extra.push(("theta_b", b));
        let s = constructions::hardy_scenario(a, b).map_err(degenerate)?;
        let exp = ProbabilityExpectation::AtMost {
            bound: golden_fifth(),
            angles: Some((a, b)),
        };
        (s, exp, "source: given angles".to_string())
    } else {
        return Err(CliError::Usage(
            "verify hardy needs --theta-a and --theta-b, --optimal, or --scenario".into(),
        ));
    };
    export(args.io.export.as_deref(), &s)?;
    let command = if args.optimal {
        "verify hardy --optimal"
    } else {
        "verify hardy"
    };
    let mut out = verify_scenario(&s, command, &Expectation::hardy(probability), tol)?;
    for (name, v) in extra {
        out.report.value(name, v);
    }
    out.report.note(source);
    Ok(out)
}

/// Neutral analysis of a scenario file. SAT and UNSAT both succeed.
pub fn check(args: &CheckArgs, tol: f64) -> Result<Outcome, CliError> {
    let s = read_scenario(&args.path, LoadOptions { lax: args.lax, tol })?;
    let n = s.projectors().len();
    if n > MAX_EXHAUSTIVE {
        return Err(CliError::Validation(NchvError::TooManyProjectors(n).to_string()));
    }
    let mut report = Report::new("check");
    if !push_validation(&mut report, &s, tol) {
        return Ok(Outcome {
            report,
            status: ExitStatus::Validation,
        });
    }

    report.value("selection probability", prepost::selection_probability(&s));
    let forced = prepost::forced_values(&s, tol)?;
    report.note(format!("forced values: {}", show_forced(&forced)));

    let sat = nchv::enumerate_assignments(&s, &forced)?;
    report.value("assignments examined", sat.assignments_examined as f64);
    report.value("witnesses", sat.witnesses.len() as f64);
    report.note(format!("status: {}", sat.status));
    match sat.status {
        Status::Sat => {
            for (k, w) in sat.witnesses.iter().take(args.max_witnesses).enumerate() {
                report.note(format!("witness {}: {w}", k + 1));
            }
            if sat.witnesses.len() > args.max_witnesses {
                report.note(format!(
                    "... {} more witnesses",
                    sat.witnesses.len() - args.max_witnesses
                ));
            }
        }
        Status::Unsat => match nchv::propagate(&s, &forced)? {
            Propagation::Conflict(trace) => {
                for (k, step) in trace.steps.iter().enumerate() {
                    report.note(format!("step {}: {step}", k + 1));
                }
            }
            Propagation::Fixpoint(_) => report.note("UNSAT without unit-propagation certificate"),
        },
    }
    Ok(Outcome {
        report,
        status: ExitStatus::Success,
    })
}

fn optimization_report(command: &str, r: &OptimizationResult) -> Report {
    let mut report = Report::new(command);
    for (name, v) in &r.parameters {
        if v.is_finite() {
            report.value(name.clone(), *v);
        } else {
            report.note(format!("{name}: no feasible value"));
        }
    }
    report.value("objective", r.objective);
    report.value("evaluations", r.evaluations as f64);
    report.value("iterations", r.iterations as f64);
    report.value("grid", r.grid_resolution as f64);
    report.value("refine_tol", r.refine_tolerance);
    if let Some(t) = r.exclusivity_tol {
        report.value("exclusivity_tol", t);
    }
    report.check(
        "refinement converged",
        format!("box width < {:e}", r.refine_tolerance),
        format!("converged after {} refinements", r.iterations),
        None,
        true,
    );
    report
}

pub fn optimize(args: &OptimizeArgs) -> Result<Outcome, CliError> {
    let opts = SearchOptions {
        grid: args.grid,
        refine_tol: args.refine_tol,
        max_iterations: args.max_iter,
        threads: args.threads.map(usize::from),
    };
    let (command, result) = match args.target {
        OptimizeTarget::Hardy => ("optimize hardy", optimizer::maximize_hardy(&opts)),
        OptimizeTarget::CabelloFamily => (
            "optimize cabello-family",
            optimizer::maximize_cabello_family(&opts, args.exclusivity_tol),
        ),
    };
    match result {
        Ok(r) => {
            let mut report = optimization_report(command, &r);
            if args.target == OptimizeTarget::CabelloFamily {
                report.note(
                    "scope: maximality is checked over the real two-parameter family \
                     with the relations of orthogonality preserved, not over all states",
                );
            }
            Ok(Outcome {
                report,
                status: ExitStatus::Success,
            })
        }
        Err(OptimizerError::NotConverged { iterations, width }) => {
            let mut report = Report::new(command);
            report.check(
                "refinement converged",
                format!("box width < {:e}", args.refine_tol),
                format!("box width {width:e} after {iterations} refinements"),
                Some(width),
                false,
            );
            Ok(Outcome {
                report,
                status: ExitStatus::Numeric,
            })
        }
        Err(e) => Err(e.into()),
    }
}

pub fn execute(cli: &Cli) -> Result<Outcome, CliError> {
    match &cli.command {
        Command::Verify {
            target: VerifyTarget::Cabello(io),
        } => verify_cabello(io, cli.tol),
        Command::Verify {
            target: VerifyTarget::Hardy(args),
        } => verify_hardy(args, cli.tol),
        Command::Check(args) => check(args, cli.tol),
        Command::Optimize(args) => optimize(args),
    }
}

/// Parses `args`, runs the command, prints the report to stdout and any
/// diagnostic to stderr, and returns the process exit code.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return e.exit_code();
        }
    };
    match execute(&cli) {
        Ok(out) => {
            let text = if cli.json {
                out.report.to_json()
            } else {
                out.report.to_text()
            };
            let mut stdout = io::stdout().lock();
            let _ = stdout.write_all(text.as_bytes());
            let _ = stdout.flush();
            if out.status != ExitStatus::Success {
                let failed = out.report.checks.iter().filter(|c| !c.pass).count();
                eprintln!("qpp: {failed} check(s) failed");
            }
            out.status.code()
        }
        Err(e) => {
            eprintln!("qpp: error: {e}");
            e.status().code()
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn parse(args: &[&str]) -> Result<Cli, clap::Error> {
        Cli::try_parse_from(std::iter::once("qpp").chain(args.iter().copied()))
    }

    #[test]
    fn small_grid_is_usage_error() {
        let err = parse(&["optimize", "hardy", "--grid", "8"]).unwrap_err();
        assert_eq!(err.exit_code(), 2);
        assert!(parse(&["optimize", "hardy", "--grid", "16"]).is_ok());
    }

    #[test]
    fn zero_threads_rejected() {
        assert!(parse(&["optimize", "hardy", "--threads", "0"]).is_err());
    }

    #[test]
    fn tol_defaults_and_overrides() {
        assert_eq!(parse(&["verify", "cabello"]).unwrap().tol, TOL_CHECK);
        assert_eq!(parse(&["verify", "cabello", "--tol", "1e-7"]).unwrap().tol, 1e-7);
        assert!(parse(&["verify", "cabello", "--tol", "-1"]).is_err());
    }

    #[test]
    fn angles_conflict_with_optimal() {
        assert!(parse(&["verify", "hardy", "--theta-a", "0.3", "--theta-b", "0.4", "--optimal"]).is_err());
        assert!(parse(&["verify", "hardy", "--theta-a", "0.3"]).is_err());
    }

    #[test]
    fn verify_cabello_passes() {
        let out = verify_cabello(
            &ScenarioIo {
                scenario: None,
                export: None,
            },
            TOL_CHECK,
        )
        .unwrap();
        assert_eq!(out.status, ExitStatus::Success, "{}", out.report.to_text());
        assert!(out.report.overall());
        let trace: Vec<&str> = out
            .report
            .notes
            .iter()
            .filter(|n| n.starts_with("step "))
            .map(String::as_str)
            .collect();
        assert_eq!(
            trace,
            [
                "step 1: alpha=0 [pred], beta+=0 [pred], gamma+=0 [retro] => delta+=1 (sum rule)",
                "step 2: alpha=0 [pred], beta-=0 [pred], gamma-=0 [retro] => delta-=1 (sum rule)",
                "step 3: delta+=1 [step 1], delta-=1 [step 2] => CONFLICT(delta+, delta-) (exclusivity)",
            ]
        );
    }

    #[test]
    fn hardy_degenerate_angles() {
        let args = HardyArgs {
            theta_a: Some(0.0),
            theta_b: Some(0.5),
            optimal: false,
            grid: 64,
            refine_tol: 1e-9,
            io: ScenarioIo {
                scenario: None,
                export: None,
            },
        };
        let err = verify_hardy(&args, TOL_CHECK).unwrap_err();
        assert_eq!(err.status(), ExitStatus::Validation);
        assert!(err.to_string().contains("degenerate configuration"), "{err}");
    }

    #[test]
    fn hardy_given_angles_pass() {
        let args = HardyArgs {
            theta_a: Some(0.7),
            theta_b: Some(0.9),
            optimal: false,
            grid: 64,
            refine_tol: 1e-9,
            io: ScenarioIo {
                scenario: None,
                export: None,
            },
        };
        let out = verify_hardy(&args, TOL_CHECK).unwrap();
        assert!(out.report.overall(), "{}", out.report.to_text());
    }

    #[test]
    fn closed_form_matches_construction() {
        for (a, b) in [(0.3, 1.2), (0.9, 0.9), (1.5, 0.05)] {
            let direct = constructions::hardy_selection_probability(a, b).unwrap();
            assert!((hardy_closed_form(a, b) - direct).abs() < 1e-14);
        }
    }

    #[test]
    fn load_error_statuses() {
        let parse = CliError::Load {
            path: "x".into(),
            source: ScenarioError::Parse {
                line: 1,
                column: 2,
                message: "eof".into(),
            },
        };
        assert_eq!(parse.status(), ExitStatus::Io);
        let dup = CliError::Load {
            path: "x".into(),
            source: ScenarioError::DuplicateLabel("a".into()),
        };
        assert_eq!(dup.status(), ExitStatus::Validation);
    }
}
