//! Command implementations behind the `nupbr` binary.
//!
//! Exit codes: 0 the checked property holds (or no disagreement), 1 a suite
//! disagreement or an internal failure, 2 invalid input or an unmet
//! precondition, 3 NUPBR is violated (a certificate is emitted).

use std::fs;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;
use serde_json::{json, Value};

use nupbr_core::deflator::{build_after, build_before, jump_ratio_identities, JumpRatioReport};
use nupbr_core::format::{model_digest, process_table, ModelFile};
use nupbr_core::harness::gen::{gen_model, ModelGenParams};
use nupbr_core::harness::suites::{run_suite, SuiteId, TheoremReport};
use nupbr_core::measures::{qg_after, qg_before, qprime, qt, qtilde, qtilde_prime, PredictableTime};
use nupbr_core::nupbr::{deflator_from_densities, nupbr_check, NupbrVerdict};
use nupbr_core::process::{after, is_martingale, stop, Process};
use nupbr_core::random_time::is_honest;
use nupbr_core::rational::{format_rational, zero};
use nupbr_core::{azema, enlarge, Error, Filtration, Measure, Model};

pub const EXIT_OK: i32 = 0;
pub const EXIT_DISAGREEMENT: i32 = 1;
pub const EXIT_INVALID: i32 = 2;
pub const EXIT_VIOLATED: i32 = 3;

pub const REPORT_SCHEMA: u32 = 1;

#[derive(Debug, Parser)]
#[command(name = "nupbr", version, about = "Exact NUPBR checks under progressive enlargement on finite models")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Decide NUPBR of S, S^tau or S - S^tau and emit a certificate.
    Check(CheckArgs),
    /// Build the explicit deflator before or after tau and check its invariants.
    Deflate(DeflateArgs),
    /// Run verification suites on generated models.
    Theorems(TheoremArgs),
    /// Generate a random model file.
    Gen(GenArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum FiltrationArg {
    #[value(name = "F")]
    F,
    #[value(name = "G")]
    G,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum ModeArg {
    /// `S` itself.
    Plain,
    /// `S^tau`.
    Stopped,
    /// `S - S^tau`.
    After,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum MeasureArg {
    #[value(name = "P")]
    P,
    #[value(name = "QT")]
    Qt,
    #[value(name = "Qtilde")]
    Qtilde,
    #[value(name = "Qprime")]
    Qprime,
    #[value(name = "Qtildeprime")]
    Qtildeprime,
    #[value(name = "QG-before")]
    QgBefore,
    #[value(name = "QG-after")]
    QgAfter,
}

#[derive(Debug, Args)]
pub struct CheckArgs {
    pub model: PathBuf,
    #[arg(long, value_enum, default_value = "F")]
    pub filtration: FiltrationArg,
    #[arg(long, value_enum, default_value = "plain")]
    pub mode: ModeArg,
    #[arg(long, value_enum, default_value = "P")]
    pub measure: MeasureArg,
    /// Grid time of the single-jump measures.
    #[arg(long)]
    pub at: Option<usize>,
    #[arg(short, long)]
    pub output: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum SideArg {
    Before,
    After,
}

#[derive(Debug, Args)]
pub struct DeflateArgs {
    pub model: PathBuf,
    #[arg(long, value_enum, default_value = "before")]
    pub side: SideArg,
    #[arg(short, long)]
    pub output: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct GenParamArgs {
    #[arg(long, default_value_t = 12)]
    pub max_outcomes: usize,
    #[arg(long, default_value_t = 4)]
    pub max_horizon: usize,
    #[arg(long, default_value_t = 2)]
    pub assets: usize,
    #[arg(long, default_value_t = 3)]
    pub branching: usize,
    #[arg(long, default_value_t = 500)]
    pub max_rejections: usize,
}

impl GenParamArgs {
    fn params(&self, seed: u64) -> ModelGenParams {
        ModelGenParams {
            max_outcomes: self.max_outcomes,
            max_horizon: self.max_horizon,
            n_assets: self.assets,
            max_branching: self.branching,
            max_rejections: self.max_rejections,
            seed,
            ..ModelGenParams::default()
        }
    }
}

#[derive(Debug, Args)]
pub struct TheoremArgs {
    /// A suite name, `before`, `after` or `all`.
    #[arg(long, default_value = "all")]
    pub suite: String,
    #[arg(long, default_value_t = 100)]
    pub models: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Worker threads (0: one per core). Does not change the report.
    #[arg(long, default_value_t = 0)]
    pub jobs: usize,
    #[command(flatten)]
    pub gen: GenParamArgs,
    #[arg(short, long)]
    pub output: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct GenArgs {
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long)]
    pub honest_only: bool,
    #[arg(long)]
    pub force_before: bool,
    #[arg(long)]
    pub force_after: bool,
    #[command(flatten)]
    pub gen: GenParamArgs,
    #[arg(short, long)]
    pub output: Option<PathBuf>,
}

/// What a command produced: the JSON document, side files and the exit code.
#[derive(Debug)]
pub struct Outcome {
    pub document: String,
    pub side_files: Vec<(PathBuf, String)>,
    pub code: i32,
    pub summary: String,
}

/// A failure that maps to an exit code.
#[derive(Debug)]
pub struct Failure {
    pub code: i32,
    pub message: String,
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        let code = match e {
            Error::Internal(_) | Error::PositivityFailure { .. } => EXIT_DISAGREEMENT,
            _ => EXIT_INVALID,
        };
        Failure { code, message: e.to_string() }
    }
}

fn invalid(message: impl Into<String>) -> Failure {
    Failure { code: EXIT_INVALID, message: message.into() }
}

pub fn load_model(path: &Path) -> Result<(ModelFile, Model), Failure> {
    let text = fs::read_to_string(path).map_err(|e| invalid(format!("{}: {e}", path.display())))?;
    let file = ModelFile::parse(&text).map_err(|e| invalid(format!("{}: {e}", path.display())))?;
    let model = file.to_model().map_err(|e| invalid(format!("{}: {e}", path.display())))?;
    Ok((file, model))
}

fn pretty<T: Serialize>(value: &T) -> String {
    let mut s = serde_json::to_string_pretty(value).expect("report serialises");
    s.push('\n');
    s
}

fn verdict_json(verdict: &NupbrVerdict, x: &Process, h: &Filtration, measure: &Measure) -> Result<Value, Failure> {
    Ok(match verdict {
        NupbrVerdict::Holds { densities } => {
            let d = deflator_from_densities(verdict, x, h, measure)?;
            json!({
                "verdict": "holds",
                "certificate": {
                    "kind": "deflator",
                    "densities": process_table(densities),
                    "deflator": process_table(&d.y),
                    "theta": process_table(&d.theta),
                    "verified": d.certifies(x, h, measure)?,
                }
            })
        }
        NupbrVerdict::Violated { witness } => {
            let terminal = witness.terminal_value(x)?;
            json!({
                "verdict": "violated",
                "certificate": {
                    "kind": "arbitrage",
                    "t": witness.t,
                    "atom": witness.atom,
                    "h": witness.h.iter().map(format_rational).collect::<Vec<_>>(),
                    "strategy": process_table(&witness.process),
                    "terminal_value": terminal.iter().map(format_rational).collect::<Vec<_>>(),
                    "verified": witness.is_valid_certificate(x, h, measure),
                }
            })
        }
    })
}

pub fn cmd_check(args: &CheckArgs) -> Result<Outcome, Failure> {
    let (file, model) = load_model(&args.model)?;
    if args.mode == ModeArg::After {
        if let Some(w) = (0..model.n_outcomes()).find(|&w| model.tau.time(w).is_none()) {
            return Err(invalid(format!("--mode after needs a finite tau: tau[{w}] = inf")));
        }
    }
    let x = match args.mode {
        ModeArg::Plain => model.s.clone(),
        ModeArg::Stopped => stop(&model.s, &model.tau),
        ModeArg::After => after(&model.s, &model.tau),
    };
    let az = azema(&model.tau, &model.f, &model.space)?;
    let g = enlarge(&model.f, &model.tau);
    let h = match args.filtration {
        FiltrationArg::F => {
            if args.mode != ModeArg::Plain {
                // S^tau and S - S^tau are generally not F-adapted.
                x.check_adapted(&model.f)?;
            }
            &model.f
        }
        FiltrationArg::G => &g,
    };
    let needs_time = args.measure != MeasureArg::P;
    let pt = match (needs_time, args.at) {
        (false, _) => None,
        (true, Some(t)) => Some(PredictableTime::deterministic(model.n_outcomes(), t, &model.f)?),
        (true, None) => return Err(invalid("this measure needs --at T")),
    };
    let on_f = matches!(args.measure, MeasureArg::Qt | MeasureArg::Qtilde | MeasureArg::Qprime | MeasureArg::Qtildeprime);
    let on_g = matches!(args.measure, MeasureArg::QgBefore | MeasureArg::QgAfter);
    if (on_f && args.filtration != FiltrationArg::F) || (on_g && args.filtration != FiltrationArg::G) {
        return Err(invalid("the measure does not match --filtration"));
    }
    let (f, space, tau) = (&model.f, &model.space, &model.tau);
    let measure = match (args.measure, &pt) {
        (MeasureArg::P, _) => model.space.measure().clone(),
        (MeasureArg::Qt, Some(pt)) => qt(pt, &az, f, space)?.measure,
        (MeasureArg::Qtilde, Some(pt)) => qtilde(pt, &az, f, space)?.measure,
        (MeasureArg::Qprime, Some(pt)) => qprime(pt, &az, f, space)?.measure,
        (MeasureArg::Qtildeprime, Some(pt)) => qtilde_prime(pt, &az, f, space)?.measure,
        (MeasureArg::QgBefore, Some(pt)) => qg_before(pt, &az, tau, &g, space)?.measure,
        (MeasureArg::QgAfter, Some(pt)) => qg_after(pt, &az, tau, f, &g, space)?.measure,
        (_, None) => unreachable!("checked above"),
    };
    let verdict = nupbr_check(&x, h, &measure)?;
    let mut report = verdict_json(&verdict, &x, h, &measure)?;
    let extra = json!({
        "schema": REPORT_SCHEMA,
        "command": "check",
        "model_digest": file.digest(),
        "filtration": format!("{:?}", args.filtration),
        "mode": format!("{:?}", args.mode).to_lowercase(),
        "measure": measure_name(args.measure),
        "at": args.at,
    });
    merge(&mut report, extra);
    let (code, summary) = if verdict.holds() {
        (EXIT_OK, "NUPBR holds".to_string())
    } else {
        let w = verdict.witness().expect("violated");
        (EXIT_VIOLATED, format!("NUPBR violated at t={} on atom {:?}", w.t, w.atom))
    };
    Ok(Outcome { document: pretty(&report), side_files: Vec::new(), code, summary })
}

fn measure_name(m: MeasureArg) -> &'static str {
    match m {
        MeasureArg::P => "P",
        MeasureArg::Qt => "QT",
        MeasureArg::Qtilde => "Qtilde",
        MeasureArg::Qprime => "Qprime",
        MeasureArg::Qtildeprime => "Qtildeprime",
        MeasureArg::QgBefore => "QG-before",
        MeasureArg::QgAfter => "QG-after",
    }
}

fn merge(target: &mut Value, extra: Value) {
    if let (Value::Object(t), Value::Object(e)) = (target, extra) {
        for (k, v) in e {
            t.insert(k, v);
        }
    }
}

fn positive(x: &Process) -> bool {
    (0..=x.horizon()).all(|t| (0..x.n_outcomes()).all(|w| x.scalar_at(t, w) > &zero()))
}

fn jump_json(r: &JumpRatioReport) -> Value {
    json!({
        "holds": r.holds(),
        "before_checked": r.before_checked,
        "after_checked": r.after_checked,
        "before_failures": r.before_failures,
        "after_failures": r.after_failures,
    })
}

pub fn cmd_deflate(args: &DeflateArgs) -> Result<Outcome, Failure> {
    let (file, model) = load_model(&args.model)?;
    let (f, space, tau) = (&model.f, &model.space, &model.tau);
    let az = azema(tau, f, space)?;
    let g = enlarge(f, tau);
    let before = build_before(&az, tau, f, &g, space)?;
    let (tables, l, jumps) = match args.side {
        SideArg::Before => {
            let jumps = jump_ratio_identities(&before, None, &az, tau, f, space);
            let tables = json!({
                "K_G": process_table(&before.k_g),
                "V_G": process_table(&before.v_g),
                "m_hat": process_table(&before.m_hat),
                "L_tilde": process_table(&before.l_tilde),
            });
            (tables, before.l_tilde.clone(), jumps)
        }
        SideArg::After => {
            let a = build_after(&az, tau, f, &g, space)?;
            let jumps = jump_ratio_identities(&before, Some(&a), &az, tau, f, space);
            let tables = json!({
                "K_a": process_table(&a.k_a),
                "W_G": process_table(&a.w_g),
                "m_hat_a": process_table(&a.m_hat_a),
                "L_tilde_a": process_table(&a.l_tilde_a),
            });
            (tables, a.l_tilde_a.clone(), jumps)
        }
    };
    let invariants = json!({
        "positive": positive(&l),
        "g_martingale": is_martingale(&l, &g, space),
        "jump_ratio": jump_json(&jumps),
    });
    let ok = positive(&l) && is_martingale(&l, &g, space) && jumps.holds();
    let report = json!({
        "schema": REPORT_SCHEMA,
        "command": "deflate",
        "side": format!("{:?}", args.side).to_lowercase(),
        "model_digest": file.digest(),
        "honest": is_honest(tau, f),
        "tables": tables,
        "invariants": invariants,
    });
    let code = if ok { EXIT_OK } else { EXIT_DISAGREEMENT };
    let summary = if ok { "deflator invariants hold".into() } else { "a deflator invariant failed".into() };
    Ok(Outcome { document: pretty(&report), side_files: Vec::new(), code, summary })
}

pub fn suites_for(name: &str) -> Result<Vec<SuiteId>, Failure> {
    match name {
        "all" => Ok(SuiteId::ALL.to_vec()),
        "after" => Ok(SuiteId::AFTER.to_vec()),
        "before" => Ok(SuiteId::ALL.iter().copied().filter(|id| !SuiteId::AFTER.contains(id)).collect()),
        other => other.parse::<SuiteId>().map(|id| vec![id]).map_err(|e| invalid(e.to_string())),
    }
}

#[derive(Debug, Serialize)]
struct TheoremsReport<'a> {
    schema: u32,
    command: &'static str,
    suite: &'a str,
    models: usize,
    seed: u64,
    params: &'a ModelGenParams,
    passed: bool,
    reports: &'a [TheoremReport],
}

pub fn cmd_theorems(args: &TheoremArgs) -> Result<Outcome, Failure> {
    let ids = suites_for(&args.suite)?;
    let params = args.gen.params(args.seed);
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(args.jobs)
        .build()
        .map_err(|e| invalid(format!("--jobs: {e}")))?;
    let reports: Vec<TheoremReport> =
        pool.install(|| ids.iter().map(|&id| run_suite(id, args.models, args.seed, &params)).collect());
    let passed = reports.iter().all(TheoremReport::passed);
    let doc = TheoremsReport {
        schema: REPORT_SCHEMA,
        command: "theorems",
        suite: &args.suite,
        models: args.models,
        seed: args.seed,
        params: &params,
        passed,
        reports: &reports,
    };
    let mut side_files = Vec::new();
    if let Some(out) = &args.output {
        for r in &reports {
            for d in &r.disagreements {
                let name = format!(
                    "{}.{}-{}.model.json",
                    out.file_stem().and_then(|s| s.to_str()).unwrap_or("report"),
                    r.suite,
                    d.index
                );
                side_files.push((out.with_file_name(name), d.model.to_json()));
            }
        }
    }
    let cases: usize = reports.iter().map(|r| r.cases).sum();
    let bad: usize = reports.iter().map(|r| r.disagreements.len()).sum();
    let summary = format!("{} suite(s), {} models each, {cases} cases, {bad} disagreement(s)", reports.len(), args.models);
    Ok(Outcome {
        document: pretty(&doc),
        side_files,
        code: if passed { EXIT_OK } else { EXIT_DISAGREEMENT },
        summary,
    })
}

pub fn cmd_gen(args: &GenArgs) -> Result<Outcome, Failure> {
    let mut params = args.gen.params(args.seed);
    params.honest_only = args.honest_only;
    params.force_before_set = args.force_before;
    params.force_after_set = args.force_after;
    let model = gen_model(&params)?;
    let mut document = ModelFile::from_model(&model).to_json();
    document.push('\n');
    let summary = format!(
        "{} outcomes, horizon {}, {} asset(s), digest {}",
        model.n_outcomes(),
        model.horizon(),
        model.s.dim(),
        model_digest(&model)
    );
    Ok(Outcome { document, side_files: Vec::new(), code: EXIT_OK, summary })
}

/// Runs a parsed command line, writes its outputs and returns the exit code.
pub fn run(cli: &Cli) -> i32 {
    let (result, output) = match &cli.command {
        Command::Check(a) => (cmd_check(a), &a.output),
        Command::Deflate(a) => (cmd_deflate(a), &a.output),
        Command::Theorems(a) => (cmd_theorems(a), &a.output),
        Command::Gen(a) => (cmd_gen(a), &a.output),
    };
    match result {
        Ok(outcome) => {
            let written = match output {
                Some(path) => fs::write(path, &outcome.document).map_err(|e| format!("{}: {e}", path.display())),
                None => {
                    print!("{}", outcome.document);
                    Ok(())
                }
            };
            let written = written.and_then(|()| {
                outcome
                    .side_files
                    .iter()
                    .try_for_each(|(p, text)| fs::write(p, text).map_err(|e| format!("{}: {e}", p.display())))
            });
            if let Err(e) = written {
                eprintln!("error: {e}");
                return EXIT_INVALID;
            }
            eprintln!("{}", outcome.summary);
            outcome.code
        }
        Err(f) => {
            eprintln!("error: {}", f.message);
            f.code
        }
    }
}
