//! The `gibbsfrag` command line.
//!
//! Exit codes: 0 success, 1 usage or parse error, 2 verification failure,
//! 3 resource guard tripped. Machine-readable output always carries a
//! top-level `"schema"` field and writes rationals as `"p/q"` strings.

use std::ffi::OsString;
use std::fmt::Write as _;
use std::io::Write;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use rayon::prelude::*;
use serde_json::{json, Value};

use crate::coupling::{
    build_cover_graph, chain_couplings, extreme_coupling, strassen_feasible, ChainOutcome,
    CouplingChoice, CoverGraph, Direction, Feasibility, MonotoneCoupling,
};
use crate::crp::{
    all_seating_choices, rng_stream, split_check, CrpSampler, RecordChainSampler, RecursiveSampler,
};
use crate::error::{Error, Result};
use crate::lattice::{partition_strassen_explore, record_law_oracle};
use crate::layer::LayerDistribution;
use crate::rational::{self, Rational};
use crate::records::{
    bernoulli_layers, conditional_bernoulli, harmonic_probabilities, layer_states, record_law,
    record_law_with, record_layers, threshold_law_with, RecordVector,
};
use crate::weights::{
    stirling_table, v_array, verify_v_recursion, Alpha, StirlingTable, WeightSystem,
};

pub const EXIT_OK: i32 = 0;
pub const EXIT_USAGE: i32 = 1;
pub const EXIT_VERIFY: i32 = 2;
pub const EXIT_GUARD: i32 = 3;

#[derive(Debug, Parser)]
#[command(
    name = "gibbsfrag",
    version,
    about = "Exact Gibbs fragmentation processes"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Generalized Stirling triangle S_alpha(n, k).
    Stirling(StirlingArgs),
    /// Record-vector law of one layer, or the block-count law when --k is omitted.
    Dist(DistArgs),
    /// Monotone coupling of layers k and k+1.
    Couple(CoupleArgs),
    /// Fragmentation paths, partition triangles or record chains.
    Sample(SampleArgs),
    /// Exact invariant suites.
    Verify(VerifyArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Json,
    Dot,
    Table,
}

/// Flags shared by every subcommand.
#[derive(Debug, Args)]
pub struct Common {
    /// Rational alpha < 1, or -inf.
    #[arg(long, default_value = "0", allow_hyphen_values = true, value_parser = parse_alpha)]
    pub alpha: Alpha,
    #[arg(long, default_value = "json")]
    pub format: Format,
    /// Write to this file instead of stdout.
    #[arg(long)]
    pub output: Option<PathBuf>,
    /// Add approximate decimal fields next to exact values.
    #[arg(long)]
    pub float: bool,
}

#[derive(Debug, Args)]
pub struct StirlingArgs {
    #[command(flatten)]
    pub common: Common,
    #[arg(long)]
    pub n: usize,
}

#[derive(Debug, Args)]
pub struct DistArgs {
    #[command(flatten)]
    pub common: Common,
    #[arg(long)]
    pub n: usize,
    #[arg(long)]
    pub k: Option<usize>,
    /// Comma-separated Bernoulli parameters with p_1 = 1; overrides alpha.
    #[arg(long, value_delimiter = ',', value_parser = parse_rational)]
    pub p: Option<Vec<Rational>>,
    /// Needed for the block-count law.
    #[arg(long, allow_hyphen_values = true, value_parser = parse_rational)]
    pub theta: Option<Rational>,
}

#[derive(Debug, Args)]
pub struct CoupleArgs {
    #[command(flatten)]
    pub common: Common,
    #[arg(long)]
    pub n: usize,
    /// Lower level; the coupling goes from k to k+1.
    #[arg(long)]
    pub k: usize,
    #[arg(long, value_delimiter = ',', value_parser = parse_rational)]
    pub p: Option<Vec<Rational>>,
    /// Put the largest or smallest possible mass on --edge.
    #[arg(long, value_parser = parse_direction, requires = "edge")]
    pub extreme: Option<Direction>,
    /// `A:X` (lower A, B, … and upper X, Y, Z), `<bits>:<bits>`, `<i>:<j>`
    /// state indices, or a plain cover-edge index.
    #[arg(long, requires = "extreme")]
    pub edge: Option<String>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Mode {
    Crp,
    Recursive,
    Records,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum CouplingFlag {
    Flow,
    Max,
    Min,
}

#[derive(Debug, Args)]
pub struct SampleArgs {
    #[command(flatten)]
    pub common: Common,
    #[arg(long, default_value = "crp")]
    pub mode: Mode,
    #[arg(long)]
    pub n: usize,
    #[arg(long, default_value_t = 1)]
    pub samples: u64,
    #[arg(long)]
    pub seed: u64,
    /// Coupling used by the crp sampler between record layers.
    #[arg(long, default_value = "flow")]
    pub coupling: CouplingFlag,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Suite {
    All,
    StirlingRecursion,
    LogConcavity,
    ThresholdMonotonicity,
    VRecursion,
    RecordOracle,
    RecordFeasibility,
    Split,
    StrassenPartitions,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum WeightFamily {
    /// w_j = 1.
    Ones,
    /// w_j = (j-1)!.
    Factorial,
}

#[derive(Debug, Args)]
pub struct VerifyArgs {
    #[arg(long, default_value = "json")]
    pub format: Format,
    #[arg(long)]
    pub output: Option<PathBuf>,
    #[arg(long, default_value = "all")]
    pub suite: Suite,
    #[arg(long, default_value_t = 10)]
    pub n: usize,
    #[arg(long, default_value_t = 1)]
    pub jobs: usize,
    /// Weights for the partition explorer.
    #[arg(long, default_value = "ones")]
    pub w: WeightFamily,
    /// Adds 1 to S_alpha(n, k) before the recursion suite runs.
    #[arg(long, hide = true, value_parser = parse_cell)]
    pub corrupt_stirling: Option<(usize, usize)>,
}

fn parse_alpha(s: &str) -> std::result::Result<Alpha, String> {
    s.parse().map_err(|e: Error| e.to_string())
}

fn parse_rational(s: &str) -> std::result::Result<Rational, String> {
    rational::parse(s).map_err(|e| e.to_string())
}

fn parse_direction(s: &str) -> std::result::Result<Direction, String> {
    s.parse().map_err(|e: Error| e.to_string())
}

fn parse_cell(s: &str) -> std::result::Result<(usize, usize), String> {
    let (n, k) = s.split_once(',').ok_or("expected n,k")?;
    Ok((
        n.trim().parse().map_err(|_| format!("bad n in {s:?}"))?,
        k.trim().parse().map_err(|_| format!("bad k in {s:?}"))?,
    ))
}

/// Parses `args` (including the program name) and runs the command, writing
/// to `out` unless `--output` is given. Returns the process exit code.
pub fn run<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
            let rendered = e.render().to_string();
            let target: &mut dyn Write = if e.use_stderr() { err } else { out };
            let _ = target.write_all(rendered.as_bytes());
            return code;
        }
    };
    match execute(&cli.command) {
        Ok((text, output, code)) => {
            let written = match output {
                Some(path) => std::fs::write(path, text.as_bytes()),
                None => out.write_all(text.as_bytes()),
            };
            if let Err(e) = written {
                let _ = writeln!(err, "error: {e}");
                return EXIT_USAGE;
            }
            code
        }
        Err(e) => {
            let _ = writeln!(err, "error: {e}");
            match e {
                Error::GuardExceeded { .. } => EXIT_GUARD,
                _ => EXIT_USAGE,
            }
        }
    }
}

type Rendered<'a> = (String, Option<&'a PathBuf>, i32);

fn execute(command: &Command) -> Result<Rendered<'_>> {
    match command {
        Command::Stirling(a) => Ok((cmd_stirling(a)?, a.common.output.as_ref(), EXIT_OK)),
        Command::Dist(a) => Ok((cmd_dist(a)?, a.common.output.as_ref(), EXIT_OK)),
        Command::Couple(a) => Ok((cmd_couple(a)?, a.common.output.as_ref(), EXIT_OK)),
        Command::Sample(a) => Ok((cmd_sample(a)?, a.common.output.as_ref(), EXIT_OK)),
        Command::Verify(a) => {
            let (text, passed) = cmd_verify(a)?;
            Ok((
                text,
                a.output.as_ref(),
                if passed { EXIT_OK } else { EXIT_VERIFY },
            ))
        }
    }
}

fn pretty(v: &Value) -> String {
    let mut s = serde_json::to_string_pretty(v).expect("json values serialize");
    s.push('\n');
    s
}

fn r(x: &Rational) -> Value {
    json!(rational::to_string(x))
}

fn reject_format(format: Format, allowed: &[Format]) -> Result<()> {
    if allowed.contains(&format) {
        Ok(())
    } else {
        Err(Error::Parse(format!(
            "format {format:?} is not available here"
        )))
    }
}

fn check_n(n: usize) -> Result<()> {
    if n == 0 || n > crate::records::MAX_N {
        return Err(Error::OutOfRange(format!(
            "n = {n} not in 1..={}",
            crate::records::MAX_N
        )));
    }
    Ok(())
}

fn cmd_stirling(a: &StirlingArgs) -> Result<String> {
    reject_format(a.common.format, &[Format::Json, Format::Table])?;
    if a.n == 0 {
        return Err(Error::OutOfRange("n must be at least 1".into()));
    }
    let table = stirling_table(&a.common.alpha, a.n);
    if a.common.format == Format::Table {
        let mut s = String::new();
        for n in 1..=a.n {
            let row: Vec<String> = table.row(n).iter().map(ToString::to_string).collect();
            let _ = writeln!(s, "{n:>3}: {}", row.join(" "));
        }
        return Ok(s);
    }
    let rows: Vec<Value> = (1..=a.n)
        .map(|n| {
            json!(table
                .row(n)
                .iter()
                .map(rational::to_string)
                .collect::<Vec<_>>())
        })
        .collect();
    let mut v = json!({
        "schema": "gibbsfrag.stirling/1",
        "alpha": a.common.alpha.to_string(),
        "n": a.n,
        "rows": rows,
    });
    if a.common.float {
        v["rows_approx"] = json!((1..=a.n)
            .map(|n| table
                .row(n)
                .iter()
                .map(rational::to_f64)
                .collect::<Vec<_>>())
            .collect::<Vec<_>>());
    }
    Ok(pretty(&v))
}

fn layer_for(
    alpha: &Alpha,
    p: Option<&Vec<Rational>>,
    n: usize,
    k: usize,
) -> Result<LayerDistribution<RecordVector>> {
    match p {
        Some(p) => {
            if p.len() != n {
                return Err(Error::Malformed(format!(
                    "{} Bernoulli parameters for n = {n}",
                    p.len()
                )));
            }
            conditional_bernoulli(p, k)
        }
        None => {
            if k == 0 || k > n {
                return Err(Error::OutOfRange(format!("k = {k} not in 1..={n}")));
            }
            Ok(record_law(alpha, n, k))
        }
    }
}

fn layer_json(d: &LayerDistribution<RecordVector>, with_float: bool) -> Vec<Value> {
    d.iter()
        .map(|(s, p)| {
            let mut v = json!({ "state": s.to_string(), "prob": r(p) });
            if with_float {
                v["approx"] = json!(rational::to_f64(p));
            }
            v
        })
        .collect()
}

fn cmd_dist(a: &DistArgs) -> Result<String> {
    reject_format(a.common.format, &[Format::Json, Format::Table])?;
    check_n(a.n)?;
    let Some(k) = a.k else {
        let theta = a
            .theta
            .clone()
            .ok_or_else(|| Error::Parse("either --k or --theta is required".into()))?;
        let system = WeightSystem::new(a.common.alpha.clone(), Some(theta.clone()))?;
        let d = system.block_count_distribution(a.n)?;
        if a.common.format == Format::Table {
            return Ok(d.iter().map(|(k, p)| format!("{k}\t{p}\n")).collect());
        }
        let mut v = json!({
            "schema": "gibbsfrag.block-count/1",
            "alpha": a.common.alpha.to_string(),
            "theta": r(&theta),
            "n": a.n,
            "law": d.iter().map(|(k, p)| json!({ "k": k, "prob": r(p) })).collect::<Vec<_>>(),
        });
        if a.common.float {
            v["law_approx"] = json!(d.probs().iter().map(rational::to_f64).collect::<Vec<_>>());
        }
        return Ok(pretty(&v));
    };
    let d = layer_for(&a.common.alpha, a.p.as_ref(), a.n, k)?;
    if a.common.format == Format::Table {
        return Ok(d.iter().map(|(s, p)| format!("{s}\t{p}\n")).collect());
    }
    let mut v = json!({
        "schema": "gibbsfrag.layer/1",
        "n": a.n,
        "k": k,
        "states": layer_json(&d, a.common.float),
    });
    match &a.p {
        Some(p) => v["p"] = json!(p.iter().map(rational::to_string).collect::<Vec<_>>()),
        None => v["alpha"] = json!(a.common.alpha.to_string()),
    }
    Ok(pretty(&v))
}

/// Resolves an `--edge` label against the cover graph.
pub fn parse_edge(label: &str, graph: &CoverGraph<RecordVector>) -> Result<usize> {
    let bad = || Error::Parse(format!("cannot resolve edge {label:?}"));
    let Some((from, to)) = label.split_once(':') else {
        let idx: usize = label.trim().parse().map_err(|_| bad())?;
        return if idx < graph.edges().len() {
            Ok(idx)
        } else {
            Err(bad())
        };
    };
    let lower = resolve_state(from.trim(), graph.lower(), 'A').ok_or_else(bad)?;
    let upper = resolve_state(to.trim(), graph.upper(), 'X').ok_or_else(bad)?;
    graph
        .edge_index(lower, upper)
        .ok_or_else(|| Error::Parse(format!("{label:?} is not a cover edge")))
}

fn resolve_state(token: &str, states: &[RecordVector], first_letter: char) -> Option<usize> {
    let mut chars = token.chars();
    if let (Some(c), None) = (chars.next(), chars.next()) {
        if c.is_ascii_uppercase() {
            let idx = (c as u32).checked_sub(first_letter as u32)? as usize;
            return (idx < states.len()).then_some(idx);
        }
    }
    if token.len() > 1 && token.chars().all(|c| c == '0' || c == '1') {
        let b = RecordVector::parse(token).ok()?;
        return states.binary_search(&b).ok();
    }
    let idx: usize = token.parse().ok()?;
    (idx < states.len()).then_some(idx)
}

fn cmd_couple(a: &CoupleArgs) -> Result<String> {
    check_n(a.n)?;
    if a.k == 0 || a.k >= a.n {
        return Err(Error::OutOfRange(format!("k = {} not in 1..{}", a.k, a.n)));
    }
    let lower = layer_for(&a.common.alpha, a.p.as_ref(), a.n, a.k)?;
    let upper = layer_for(&a.common.alpha, a.p.as_ref(), a.n, a.k + 1)?;
    let graph = build_cover_graph(&lower, &upper)?;
    let mut target = None;
    let outcome = match (&a.extreme, &a.edge) {
        (Some(dir), Some(label)) => {
            let e = parse_edge(label, &graph)?;
            target = Some((e, *dir));
            match strassen_feasible(&lower, &upper, &graph)? {
                Feasibility::Coupled(_) => {
                    Feasibility::Coupled(extreme_coupling(&lower, &upper, &graph, e, *dir)?)
                }
                violated => violated,
            }
        }
        _ => strassen_feasible(&lower, &upper, &graph)?,
    };
    match a.common.format {
        Format::Dot => match &outcome {
            Feasibility::Coupled(c) => Ok(c.to_dot()),
            Feasibility::Violated(_) => Err(Error::Infeasible(
                "no coupling to draw; use --format json for the certificate".into(),
            )),
        },
        Format::Table => Ok(match &outcome {
            Feasibility::Coupled(c) => coupling_table(c),
            Feasibility::Violated(cert) => format!(
                "infeasible: mass {} of {} states exceeds neighbourhood mass {}\n",
                cert.lhs,
                cert.subset.len(),
                cert.rhs
            ),
        }),
        Format::Json => {
            let mut v = match &outcome {
                Feasibility::Coupled(c) => c.to_json(a.common.float),
                Feasibility::Violated(cert) => cert.to_json(a.common.float),
            };
            v["schema"] = json!("gibbsfrag.coupling/1");
            v["n"] = json!(a.n);
            v["k"] = json!(a.k);
            match &a.p {
                Some(p) => v["p"] = json!(p.iter().map(rational::to_string).collect::<Vec<_>>()),
                None => v["alpha"] = json!(a.common.alpha.to_string()),
            }
            v["objective"] = match target {
                None => json!("flow"),
                Some((e, dir)) => {
                    let (i, j) = graph.edges()[e];
                    json!({
                        "direction": if dir == Direction::Max { "max" } else { "min" },
                        "from": graph.lower()[i].to_string(),
                        "to": graph.upper()[j].to_string(),
                    })
                }
            };
            Ok(pretty(&v))
        }
    }
}

fn coupling_table(c: &MonotoneCoupling<RecordVector>) -> String {
    let g = c.graph();
    g.edges()
        .iter()
        .zip(c.joint())
        .map(|(&(i, j), m)| format!("{} -> {}\t{m}\n", g.lower()[i], g.upper()[j]))
        .collect()
}

fn cmd_sample(a: &SampleArgs) -> Result<String> {
    reject_format(a.common.format, &[Format::Json])?;
    check_n(a.n)?;
    if a.mode != Mode::Records && !a.common.alpha.is_zero() {
        return Err(Error::Domain(format!(
            "partition fragmentation samplers exist only for alpha = 0; for alpha = {} a \
             process with Gibbs partition marginals need not exist (for alpha = -inf it fails \
             at n = 20), so only the record chain is available: use --mode records",
            a.common.alpha
        )));
    }
    let mut s = String::new();
    let mut line = |mut v: Value, index: u64| {
        v["schema"] = json!("gibbsfrag.sample/1");
        v["index"] = json!(index);
        v["n"] = json!(a.n);
        v["seed"] = json!(a.seed);
        s.push_str(&serde_json::to_string(&v).expect("json values serialize"));
        s.push('\n');
    };
    match a.mode {
        Mode::Crp => {
            let choice = match a.coupling {
                CouplingFlag::Flow => CouplingChoice::Flow,
                CouplingFlag::Max => CouplingChoice::Extreme(Direction::Max),
                CouplingFlag::Min => CouplingChoice::Extreme(Direction::Min),
            };
            let sampler = CrpSampler::new(a.n, choice)?;
            for i in 0..a.samples {
                let draw = sampler.sample_detailed(&mut rng_stream(a.seed, i));
                line(
                    json!({
                        "mode": "crp",
                        "choices": draw.choices.as_slice(),
                        "records": draw.records.iter().map(ToString::to_string).collect::<Vec<_>>(),
                        "cycles": draw.cycles(),
                        "path": draw.path.to_json(),
                    }),
                    i,
                );
            }
        }
        Mode::Recursive => {
            let sampler = RecursiveSampler::new(a.n)?;
            for i in 0..a.samples {
                let triangle = sampler.sample(&mut rng_stream(a.seed, i));
                line(
                    json!({ "mode": "recursive", "triangle": triangle.to_json() }),
                    i,
                );
            }
        }
        Mode::Records => {
            let sampler = RecordChainSampler::new(&a.common.alpha, a.n)?;
            for i in 0..a.samples {
                let chain = sampler.sample(&mut rng_stream(a.seed, i));
                line(
                    json!({
                        "mode": "records",
                        "alpha": a.common.alpha.to_string(),
                        "chain": chain.iter().map(ToString::to_string).collect::<Vec<_>>(),
                    }),
                    i,
                );
            }
        }
    }
    Ok(s)
}

/// Outcome of one verification suite.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SuiteReport {
    pub name: &'static str,
    pub checked: u64,
    pub counterexample: Option<String>,
    pub detail: Option<Value>,
}

impl SuiteReport {
    pub fn passed(&self) -> bool {
        self.counterexample.is_none()
    }

    fn to_json(&self) -> Value {
        let mut v = json!({
            "name": self.name,
            "passed": self.passed(),
            "checked": self.checked,
            "counterexample": self.counterexample,
        });
        if let Some(d) = &self.detail {
            v["detail"] = d.clone();
        }
        v
    }
}

const SPLIT_EXHAUSTIVE_MAX: usize = 7;

fn cmd_verify(a: &VerifyArgs) -> Result<(String, bool)> {
    reject_format(a.format, &[Format::Json, Format::Table])?;
    if a.n == 0 || a.n > crate::records::MAX_N {
        return Err(Error::OutOfRange(format!("n = {}", a.n)));
    }
    let suites: Vec<Suite> = match a.suite {
        Suite::All => vec![
            Suite::StirlingRecursion,
            Suite::LogConcavity,
            Suite::ThresholdMonotonicity,
            Suite::VRecursion,
            Suite::RecordOracle,
            Suite::RecordFeasibility,
            Suite::Split,
        ],
        s => vec![s],
    };
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(a.jobs.max(1))
        .build()
        .map_err(|e| Error::Parse(e.to_string()))?;
    let reports: Vec<SuiteReport> = pool.install(|| {
        suites
            .par_iter()
            .map(|&s| run_suite(s, a))
            .collect::<Result<_>>()
    })?;
    let passed = reports.iter().all(SuiteReport::passed);
    let text = if a.format == Format::Table {
        reports
            .iter()
            .map(|r| {
                let status = if r.passed() { "PASS" } else { "FAIL" };
                let mut line = format!("{status} {} ({} checks)", r.name, r.checked);
                if let Some(c) = &r.counterexample {
                    let _ = write!(line, ": {c}");
                }
                line.push('\n');
                line
            })
            .collect()
    } else {
        pretty(&json!({
            "schema": "gibbsfrag.verify/1",
            "n": a.n,
            "alpha_grid": Alpha::grid().iter().map(ToString::to_string).collect::<Vec<_>>(),
            "all_passed": passed,
            "suites": reports.iter().map(SuiteReport::to_json).collect::<Vec<_>>(),
        }))
    };
    Ok((text, passed))
}

fn run_suite(suite: Suite, a: &VerifyArgs) -> Result<SuiteReport> {
    let n = a.n;
    let grid = Alpha::grid();
    let mut checked = 0u64;
    let report = |name, counterexample: Option<String>, checked: u64| SuiteReport {
        name,
        checked,
        counterexample,
        detail: None,
    };
    Ok(match suite {
        Suite::All => unreachable!("expanded by the caller"),
        Suite::StirlingRecursion => {
            let mut found = None;
            for alpha in &grid {
                let mut table = stirling_table(alpha, n);
                if let Some((cn, ck)) = a.corrupt_stirling {
                    table = corrupt(table, cn, ck)?;
                }
                checked += 1;
                let check = table.check();
                if let Some((fn_, fk)) = check.first_failure {
                    found = Some(format!(
                        "alpha = {alpha}: recursion fails at cell (n = {fn_}, k = {fk})"
                    ));
                    break;
                }
            }
            report("stirling-recursion", found, checked)
        }
        Suite::LogConcavity => {
            let found = grid.iter().find_map(|alpha| {
                checked += 1;
                stirling_table(alpha, n)
                    .log_concavity_violation()
                    .map(|(vn, vk)| format!("alpha = {alpha}: fails at (n = {vn}, k = {vk})"))
            });
            report("log-concavity", found, checked)
        }
        Suite::ThresholdMonotonicity => {
            let mut found = None;
            'outer: for alpha in &grid {
                let table = stirling_table(alpha, n);
                for m in 2..=n {
                    checked += 1;
                    if let Err(e) = threshold_law_with(&table, m) {
                        found = Some(format!("alpha = {alpha}: {e}"));
                        break 'outer;
                    }
                }
            }
            report("threshold-monotonicity", found, checked)
        }
        Suite::VRecursion => {
            let mut found = None;
            for alpha in &grid {
                let Some(al) = alpha.as_finite() else {
                    continue;
                };
                let theta = Rational::from_integer(1.into()) - al;
                let v = v_array(al, &theta, n)?;
                checked += 1;
                let check = verify_v_recursion(&v, alpha, n);
                if let Some((fn_, fk)) = check.first_failure {
                    found = Some(format!(
                        "alpha = {alpha}, theta = {theta}: fails at (n = {fn_}, k = {fk})"
                    ));
                    break;
                }
            }
            report("v-recursion", found, checked)
        }
        Suite::RecordOracle => {
            let mut found = None;
            'outer: for alpha in &grid {
                let table = stirling_table(alpha, n);
                let w = alpha.weights(n);
                for m in 1..=n {
                    for k in 1..=m {
                        checked += 1;
                        if record_law_with(&table, m, k) != record_law_oracle(&w, m, k)? {
                            found = Some(format!("alpha = {alpha}: differs at (n = {m}, k = {k})"));
                            break 'outer;
                        }
                    }
                }
            }
            report("record-oracle", found, checked)
        }
        Suite::RecordFeasibility => {
            let mut found = None;
            let mut families: Vec<(String, Vec<LayerDistribution<RecordVector>>)> = grid
                .iter()
                .map(|alpha| (format!("alpha = {alpha}"), record_layers(alpha, n)))
                .collect();
            families.push((
                "p_i = 1/i".into(),
                bernoulli_layers(&harmonic_probabilities(n))?,
            ));
            for (label, layers) in &families {
                match chain_couplings(layers)? {
                    ChainOutcome::Infeasible { lower_level, .. } => {
                        found = Some(format!(
                            "{label}: infeasible at {lower_level} -> {}",
                            lower_level + 1
                        ));
                        break;
                    }
                    ChainOutcome::Coupled(cs) => {
                        let bad = cs
                            .iter()
                            .zip(layers.windows(2))
                            .position(|(c, pair)| c.verify_against(&pair[0], &pair[1]).is_err());
                        checked += cs.len() as u64;
                        if let Some(k) = bad {
                            found = Some(format!(
                                "{label}: coupling {} -> {} fails verification",
                                k + 1,
                                k + 2
                            ));
                            break;
                        }
                    }
                }
            }
            report("record-feasibility", found, checked)
        }
        Suite::Split => {
            let top = n.min(SPLIT_EXHAUSTIVE_MAX);
            let found = split_exhaustive(top, &mut checked)?;
            let mut rep = report("split", found, checked);
            rep.detail = Some(json!({ "exhaustive_up_to": top }));
            rep
        }
        Suite::StrassenPartitions => {
            let w: Vec<Rational> = match a.w {
                WeightFamily::Ones => Alpha::NegInfinity.weights(n),
                WeightFamily::Factorial => Alpha::zero().weights(n),
            };
            let explored = partition_strassen_explore(&w, n)?;
            let mut found = None;
            for level in &explored.levels {
                checked += 1;
                if let Some(c) = level.coupling() {
                    if let Err(e) = c.verify() {
                        found = Some(format!("level {}: {e}", level.k));
                        break;
                    }
                } else if let Some(cert) = level.certificate() {
                    if cert.lhs <= cert.rhs {
                        found = Some(format!("level {}: certificate does not violate", level.k));
                        break;
                    }
                }
            }
            let mut rep = report("strassen-partitions", found, checked);
            rep.detail = Some(explored.to_json());
            rep
        }
    })
}

fn corrupt(table: StirlingTable, n: usize, k: usize) -> Result<StirlingTable> {
    if k == 0 || k > n || n > table.max_n() {
        return Err(Error::OutOfRange(format!("cell (n = {n}, k = {k})")));
    }
    let alpha = table.alpha().clone();
    let mut entries = table.entries().clone();
    let bumped = entries.get(n, k) + Rational::from_integer(1.into());
    entries.set(n, k, bumped);
    Ok(StirlingTable::from_entries(alpha, entries))
}

/// Every `(b, b', c)` with `b ⋖ b'` in `{0,1}^m`, `m ≤ top`.
fn split_exhaustive(top: usize, checked: &mut u64) -> Result<Option<String>> {
    for m in 1..=top {
        let all_choices = all_seating_choices(m);
        for k in 1..m {
            for b in layer_states(m, k) {
                for i in b.zeros().collect::<Vec<_>>() {
                    let next = b.with_set(i);
                    for c in &all_choices {
                        *checked += 1;
                        if !split_check(&b, &next, c)? {
                            return Ok(Some(format!(
                                "b = {b}, b' = {next}, C = {:?}",
                                c.as_slice()
                            )));
                        }
                    }
                }
            }
        }
    }
    Ok(None)
}
