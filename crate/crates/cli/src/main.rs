//! `qtwist`: build, analyze and search qudit CSS codes on twisted tori.

mod output;

use std::io::Read;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use rayon::prelude::*;
use serde::Serialize;
use serde_json::json;

use qtwist_core::distance::{brute_force_distance_with_budget, estimate_sector, EstimatorConfig, BRUTE_FORCE_BUDGET};
use qtwist_core::groebner::{laurent_dim_with_budget, to_condition_with_budget, GroebnerBudget, LaurentDim};
use qtwist_core::search::{run_search, RunOptions, SearchConfig};
use qtwist_core::tables::{self, TableRow};
use qtwist_core::{CodeSpec, Error, LaurentPoly, PrimeField, Sector};

use output::{field, opt, Format, Report, View};

const USAGE_ERROR: u8 = 2;
const DOMAIN_ERROR: u8 = 1;

#[derive(Parser)]
#[command(name = "qtwist", version, about = "Qudit CSS codes on twisted tori")]
struct Cli {
    /// Output format.
    #[arg(long, global = true, value_enum, default_value = "json")]
    format: Format,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Exact n and k of a code, with optional algebraic checks.
    Analyze {
        #[command(flatten)]
        spec: SpecArgs,
        /// Also check the topological-order condition.
        #[arg(long)]
        to: bool,
        /// Also compute k_max.
        #[arg(long)]
        kmax: bool,
        #[command(flatten)]
        budget: BudgetArgs,
    },
    /// Upper bound on the distance by random information sets.
    Distance {
        #[command(flatten)]
        spec: SpecArgs,
        /// Information sets per sector.
        #[arg(long, default_value_t = 50_000)]
        trials: u64,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, value_enum, default_value = "both")]
        sector: SectorArg,
        /// Pair search depth of the estimator (1 or 2).
        #[arg(long, default_value_t = 2, value_parser = clap::value_parser!(u8).range(1..=2))]
        depth: u8,
        /// Also enumerate the kernel exhaustively when it is small enough.
        #[arg(long)]
        certify_exact: bool,
        /// Vector budget for --certify-exact.
        #[arg(long, default_value_t = BRUTE_FORCE_BUDGET)]
        exact_budget: u64,
    },
    /// Largest k over all tori, 2 dim R/(f, g).
    Kmax {
        #[command(flatten)]
        pair: PairArgs,
        #[command(flatten)]
        budget: BudgetArgs,
    },
    /// Check (f) ∩ (g) = (fg) in the Laurent ring.
    CheckTo {
        #[command(flatten)]
        pair: PairArgs,
        #[command(flatten)]
        budget: BudgetArgs,
    },
    /// Run or resume an ansatz search.
    Search {
        /// Search configuration (JSON).
        #[arg(long)]
        config: PathBuf,
        /// JSON-lines checkpoint; resumed if it exists.
        #[arg(long)]
        checkpoint: Option<PathBuf>,
        /// Start over if the checkpoint belongs to another configuration or
        /// is damaged.
        #[arg(long)]
        overwrite: bool,
        /// Stop after this many batches.
        #[arg(long)]
        max_batches: Option<u64>,
    },
    /// Rebuild the reference table rows and compare parameters.
    VerifyTables {
        /// Table file; the bundled transcription when omitted.
        table_file: Option<PathBuf>,
        /// `all`, `table:N`, or 1-based row numbers and ranges (`1,4-6`).
        #[arg(long, default_value = "all")]
        rows: String,
        /// Information sets per sector; 0 checks n and k only.
        #[arg(long, default_value_t = 0)]
        trials: u64,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum SectorArg {
    X,
    Z,
    Both,
}

#[derive(Args)]
struct SpecArgs {
    /// Code-spec JSON file (`-` for stdin).
    #[arg(long, conflicts_with_all = ["q", "f", "g", "alpha", "beta", "gamma"])]
    spec: Option<PathBuf>,
    #[arg(long)]
    q: Option<u64>,
    #[arg(long, allow_hyphen_values = true)]
    f: Option<String>,
    #[arg(long, allow_hyphen_values = true)]
    g: Option<String>,
    #[arg(long)]
    alpha: Option<i64>,
    #[arg(long)]
    beta: Option<i64>,
    #[arg(long, allow_hyphen_values = true)]
    gamma: Option<i64>,
}

#[derive(Args)]
struct PairArgs {
    /// Code-spec JSON file (`-` for stdin); the twist is ignored.
    #[arg(long, conflicts_with_all = ["q", "f", "g"])]
    spec: Option<PathBuf>,
    #[arg(long)]
    q: Option<u64>,
    #[arg(long, allow_hyphen_values = true)]
    f: Option<String>,
    #[arg(long, allow_hyphen_values = true)]
    g: Option<String>,
}

#[derive(Args)]
struct BudgetArgs {
    /// Largest total degree allowed during Groebner basis computation.
    #[arg(long, default_value_t = 60)]
    max_degree: u32,
    /// Largest Groebner basis size.
    #[arg(long, default_value_t = 5000)]
    max_basis: usize,
}

impl BudgetArgs {
    fn budget(&self) -> GroebnerBudget {
        GroebnerBudget {
            max_degree: self.max_degree,
            max_basis: self.max_basis,
        }
    }
}

enum Failure {
    Usage(String),
    Domain(Error),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure::Domain(e)
    }
}

type CmdResult = std::result::Result<(Report, u8), Failure>;

fn read_source(path: &Path) -> Result<String, Error> {
    if path == Path::new("-") {
        let mut s = String::new();
        std::io::stdin().read_to_string(&mut s)?;
        Ok(s)
    } else {
        Ok(std::fs::read_to_string(path)?)
    }
}

fn missing(what: &str) -> Failure {
    Failure::Usage(format!("either --spec or --{what} is required"))
}

impl SpecArgs {
    fn resolve(&self) -> Result<CodeSpec, Failure> {
        if let Some(path) = &self.spec {
            return Ok(serde_json::from_str(&read_source(path)?).map_err(Error::from)?);
        }
        Ok(CodeSpec {
            q: self.q.ok_or_else(|| missing("q"))?,
            f: self.f.clone().ok_or_else(|| missing("f"))?,
            g: self.g.clone().ok_or_else(|| missing("g"))?,
            alpha: self.alpha.ok_or_else(|| missing("alpha"))?,
            beta: self.beta.ok_or_else(|| missing("beta"))?,
            gamma: self.gamma.unwrap_or(0),
        })
    }
}

impl PairArgs {
    fn resolve(&self) -> Result<(u64, LaurentPoly, LaurentPoly), Failure> {
        let (q, f, g) = match &self.spec {
            Some(path) => {
                let spec: CodeSpec = serde_json::from_str(&read_source(path)?).map_err(Error::from)?;
                (spec.q, spec.f, spec.g)
            }
            None => (
                self.q.ok_or_else(|| missing("q"))?,
                self.f.clone().ok_or_else(|| missing("f"))?,
                self.g.clone().ok_or_else(|| missing("g"))?,
            ),
        };
        let field = PrimeField::new(q)?;
        Ok((q, LaurentPoly::parse(&f, &field)?, LaurentPoly::parse(&g, &field)?))
    }
}

#[derive(Serialize)]
struct AnalyzeReport {
    spec: CodeSpec,
    n: usize,
    k: usize,
    hx: [usize; 2],
    hz: [usize; 2],
    rank_hx: usize,
    rank_hz: usize,
    css_ok: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    to_condition: Option<Option<bool>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    k_max: Option<Option<usize>>,
}

/// `Ok(None)` stands for a Groebner budget overrun.
fn within_budget<T>(r: qtwist_core::Result<T>) -> Result<Option<T>, Failure> {
    match r {
        Ok(v) => Ok(Some(v)),
        Err(Error::ResourceLimit(_)) => Ok(None),
        Err(e) => Err(e.into()),
    }
}

fn k_max_of(f: &LaurentPoly, g: &LaurentPoly, budget: &GroebnerBudget) -> Result<Option<LaurentDim>, Failure> {
    within_budget(laurent_dim_with_budget(f, g, budget))
}

fn cmd_analyze(spec: &SpecArgs, to: bool, kmax: bool, budget: &BudgetArgs) -> CmdResult {
    let spec = spec.resolve()?;
    let (_, f, g, _) = spec.parts()?;
    let code = spec.build()?;
    let budget = budget.budget();
    let mut report = AnalyzeReport {
        spec: spec.clone(),
        n: code.n(),
        k: code.k(),
        hx: [code.hx().rows(), code.hx().cols()],
        hz: [code.hz().rows(), code.hz().cols()],
        rank_hx: code.rank_hx(),
        rank_hz: code.rank_hz(),
        css_ok: code.css_condition_holds(),
        to_condition: None,
        k_max: None,
    };
    if to {
        report.to_condition = Some(within_budget(to_condition_with_budget(&f, &g, &budget))?);
    }
    if kmax {
        report.k_max = Some(k_max_of(&f, &g, &budget)?.and_then(dim_to_kmax));
    }
    let mut fields = vec![
        field("code", format!("[[{},{}]]_{}", code.n(), code.k(), spec.q)),
        field("n", code.n()),
        field("k", code.k()),
        field("hx", format!("{}x{}", report.hx[0], report.hx[1])),
        field("hz", format!("{}x{}", report.hz[0], report.hz[1])),
        field("rank_hx", report.rank_hx),
        field("rank_hz", report.rank_hz),
        field("css_ok", report.css_ok),
    ];
    if let Some(t) = report.to_condition {
        fields.push(field("to_condition", t.map_or("unknown".into(), |b| b.to_string())));
    }
    if let Some(k) = report.k_max {
        fields.push(field(
            "k_max",
            k.map_or("infinite or unknown".into(), |k| k.to_string()),
        ));
    }
    Ok((Report::new(&report, View::Fields(fields)), 0))
}

fn dim_to_kmax(d: LaurentDim) -> Option<usize> {
    match d {
        LaurentDim::Finite(d) => Some(2 * d),
        LaurentDim::Infinite => None,
    }
}

#[derive(Serialize)]
struct DistanceReport {
    spec: CodeSpec,
    n: usize,
    k: usize,
    d_upper: usize,
    d_x_upper: Option<usize>,
    d_z_upper: Option<usize>,
    trials_per_sector: u64,
    seed: u64,
    depth: u8,
    /// Exhaustive result, when requested and affordable.
    d_exact: Option<usize>,
    certified: bool,
    summary: String,
}

#[allow(clippy::too_many_arguments)]
fn cmd_distance(
    spec: &SpecArgs,
    trials: u64,
    seed: u64,
    sector: SectorArg,
    depth: u8,
    certify: bool,
    exact_budget: u64,
) -> CmdResult {
    if trials == 0 {
        return Err(Failure::Usage("--trials must be positive".into()));
    }
    let spec = spec.resolve()?;
    let code = spec.build()?;
    let config = EstimatorConfig { trials, seed, depth };
    let sectors: &[Sector] = match sector {
        SectorArg::X => &[Sector::X],
        SectorArg::Z => &[Sector::Z],
        SectorArg::Both => &Sector::BOTH,
    };
    let mut dx = None;
    let mut dz = None;
    for &s in sectors {
        let est = estimate_sector(&code, s, &config)?;
        match s {
            Sector::X => dx = Some(est.d_upper),
            Sector::Z => dz = Some(est.d_upper),
        }
    }
    let d_upper = dx.into_iter().chain(dz).min().expect("at least one sector");
    let mut d_exact = None;
    if certify {
        let mut best = usize::MAX;
        let mut ok = true;
        for &s in sectors {
            match brute_force_distance_with_budget(&code, s, exact_budget) {
                Ok(d) => best = best.min(d),
                Err(Error::BudgetExceeded { .. }) => ok = false,
                Err(e) => return Err(e.into()),
            }
        }
        if ok {
            d_exact = Some(best);
        }
    }
    let certified = d_exact == Some(d_upper);
    let summary = match d_exact {
        Some(d) => format!("d = {d}"),
        None => format!("d ≤ {d_upper}"),
    };
    let report = DistanceReport {
        spec: spec.clone(),
        n: code.n(),
        k: code.k(),
        d_upper,
        d_x_upper: dx,
        d_z_upper: dz,
        trials_per_sector: trials,
        seed,
        depth,
        d_exact,
        certified,
        summary: summary.clone(),
    };
    let fields = vec![
        field("code", format!("[[{},{}]]_{}", code.n(), code.k(), spec.q)),
        field("distance", summary),
        field("d_x_upper", opt(&dx)),
        field("d_z_upper", opt(&dz)),
        field("trials_per_sector", trials),
        field("seed", seed),
    ];
    Ok((Report::new(&report, View::Fields(fields)), 0))
}

fn cmd_kmax(pair: &PairArgs, budget: &BudgetArgs) -> CmdResult {
    let (q, f, g) = pair.resolve()?;
    let dim = k_max_of(&f, &g, &budget.budget())?;
    let (dim_json, k_max) = match dim {
        Some(LaurentDim::Finite(d)) => (json!(d), json!(2 * d)),
        Some(LaurentDim::Infinite) => (json!("infinite"), json!(null)),
        None => (json!("unknown"), json!(null)),
    };
    let doc = json!({
        "q": q,
        "f": f.to_string(),
        "g": g.to_string(),
        "laurent_dim": dim_json,
        "k_max": k_max,
        "resource_limit": dim.is_none(),
    });
    let fields = vec![
        field("f", &f),
        field("g", &g),
        field("laurent_dim", dim_json.to_string().trim_matches('"')),
        field("k_max", if k_max.is_null() { "-".into() } else { k_max.to_string() }),
    ];
    Ok((Report::new(&doc, View::Fields(fields)), 0))
}

fn cmd_check_to(pair: &PairArgs, budget: &BudgetArgs) -> CmdResult {
    let (q, f, g) = pair.resolve()?;
    let holds = within_budget(to_condition_with_budget(&f, &g, &budget.budget()))?;
    let doc = json!({
        "q": q,
        "f": f.to_string(),
        "g": g.to_string(),
        "to_condition": holds,
        "resource_limit": holds.is_none(),
    });
    let fields = vec![
        field("f", &f),
        field("g", &g),
        field("to_condition", holds.map_or("unknown".into(), |b| b.to_string())),
    ];
    Ok((Report::new(&doc, View::Fields(fields)), 0))
}

fn cmd_search(config: &Path, checkpoint: Option<&Path>, overwrite: bool, max_batches: Option<u64>) -> CmdResult {
    let config: SearchConfig = serde_json::from_str(&read_source(config)?).map_err(Error::from)?;
    let options = RunOptions { overwrite, max_batches };
    let outcome = run_search(&config, checkpoint, &options)?;
    let view = View::Text {
        csv: outcome.leaderboard.to_csv()?,
        table: outcome.leaderboard.to_table(),
    };
    Ok((Report::new(&outcome, view), 0))
}

fn select_rows(rows: &[TableRow], filter: &str) -> Result<Vec<usize>, Failure> {
    let filter = filter.trim();
    if filter == "all" {
        return Ok((0..rows.len()).collect());
    }
    if let Some(t) = filter.strip_prefix("table:") {
        let t: u32 = t
            .parse()
            .map_err(|_| Failure::Usage(format!("bad table number {t:?}")))?;
        return Ok((0..rows.len()).filter(|&i| rows[i].table == t).collect());
    }
    let bad = || Failure::Usage(format!("bad --rows value {filter:?}"));
    let mut out = Vec::new();
    for part in filter.split(',') {
        let (lo, hi) = match part.split_once('-') {
            Some((a, b)) => (
                a.trim().parse().map_err(|_| bad())?,
                b.trim().parse().map_err(|_| bad())?,
            ),
            None => {
                let v: usize = part.trim().parse().map_err(|_| bad())?;
                (v, v)
            }
        };
        if lo == 0 || hi < lo || hi > rows.len() {
            return Err(Failure::Usage(format!("row range {part:?} outside 1..={}", rows.len())));
        }
        out.extend(lo - 1..hi);
    }
    Ok(out)
}

fn cmd_verify_tables(file: Option<&Path>, rows: &str, trials: u64, seed: u64) -> CmdResult {
    let table = match file {
        Some(p) => tables::load(p)?,
        None => tables::bundled()?,
    };
    let selected = select_rows(&table.rows, rows)?;
    let picked: Vec<TableRow> = selected.iter().map(|&i| table.rows[i].clone()).collect();
    let reports: Vec<_> = picked
        .par_iter()
        .map(|row| tables::verify_row(row, trials, seed))
        .collect();
    let summary = tables::summarize(&picked, &reports);
    let errors = reports.iter().filter(|r| r.error.is_some()).count();
    let ok = summary.nk_ok() && errors == 0;
    let header = [
        "row", "table", "label", "q", "n", "k", "n_ok", "k_ok", "merit", "merit_ok", "d_est", "verdict",
    ]
    .map(String::from)
    .to_vec();
    let body = selected
        .iter()
        .zip(&reports)
        .map(|(i, r)| {
            vec![
                (i + 1).to_string(),
                r.table.to_string(),
                r.label.clone(),
                r.q.to_string(),
                opt(&r.computed_n),
                opt(&r.computed_k),
                r.n_ok.to_string(),
                r.k_ok.to_string(),
                r.printed_merit.clone(),
                r.merit_ok.to_string(),
                opt(&r.distance.as_ref().map(|d| d.estimate.d_upper)),
                r.distance.as_ref().map_or("-".into(), |d| {
                    output::to_value(&d.verdict).as_str().unwrap_or("").to_string()
                }),
            ]
        })
        .collect();
    let doc = json!({
        "ok": ok,
        "trials": trials,
        "seed": seed,
        "summary": summary,
        "rows": reports,
    });
    Ok((
        Report::new(&doc, View::Rows(header, body)),
        if ok { 0 } else { DOMAIN_ERROR },
    ))
}

fn configure_threads() -> Result<(), String> {
    let Ok(value) = std::env::var("QTWIST_THREADS") else {
        return Ok(());
    };
    let n: usize = value
        .trim()
        .parse()
        .ok()
        .filter(|&n| n > 0)
        .ok_or_else(|| format!("QTWIST_THREADS must be a positive integer, got {value:?}"))?;
    rayon::ThreadPoolBuilder::new()
        .num_threads(n)
        .build_global()
        .map_err(|e| e.to_string())
}

fn run(cli: &Cli) -> CmdResult {
    match &cli.command {
        Command::Analyze { spec, to, kmax, budget } => cmd_analyze(spec, *to, *kmax, budget),
        Command::Distance {
            spec,
            trials,
            seed,
            sector,
            depth,
            certify_exact,
            exact_budget,
        } => cmd_distance(spec, *trials, *seed, *sector, *depth, *certify_exact, *exact_budget),
        Command::Kmax { pair, budget } => cmd_kmax(pair, budget),
        Command::CheckTo { pair, budget } => cmd_check_to(pair, budget),
        Command::Search {
            config,
            checkpoint,
            overwrite,
            max_batches,
        } => cmd_search(config, checkpoint.as_deref(), *overwrite, *max_batches),
        Command::VerifyTables {
            table_file,
            rows,
            trials,
            seed,
        } => cmd_verify_tables(table_file.as_deref(), rows, *trials, *seed),
    }
}

fn error_document(kind: &str, message: &str) -> String {
    output::render_json(&json!({ "error": { "kind": kind, "message": message } }))
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    if let Err(msg) = configure_threads() {
        eprintln!("error: {msg}");
        if cli.format == Format::Json {
            print!("{}", error_document("UsageError", &msg));
        }
        return ExitCode::from(USAGE_ERROR);
    }
    match run(&cli) {
        Ok((report, code)) => {
            print!("{}", report.render(cli.format));
            ExitCode::from(code)
        }
        Err(Failure::Usage(msg)) => {
            eprintln!("error: {msg}");
            if cli.format == Format::Json {
                print!("{}", error_document("UsageError", &msg));
            }
            ExitCode::from(USAGE_ERROR)
        }
        Err(Failure::Domain(e)) => {
            eprintln!("error: {e}");
            if cli.format == Format::Json {
                print!("{}", error_document(e.kind(), &e.to_string()));
            }
            ExitCode::from(DOMAIN_ERROR)
        }
    }
}
