use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use rc_fluct::budget::power_size;
use rc_fluct::combin::parse_rational;
use rc_fluct::config::{Centering, DistributionName, ExperimentConfig, OutputFormat, TracePath};
use rc_fluct::harness::{run_check, run_experiment, VerifyOptions};
use rc_fluct::index::{cluster_ratio_scan, count_a, count_a_s_closed_form, enumerate_a, limit_ratio, Selection};
use rc_fluct::model::w_samples;
use rc_fluct::oracle::{exact_cov_w, exact_expected_trace};
use rc_fluct::output::format_f64;
use rc_fluct::theory::{sigma, sigma_q, PolynomialQ};
use rc_fluct::{Budget, Error, Exact, Scalar};

/// Fluctuations of even trace powers of reverse circulant random matrices.
#[derive(Debug, Parser)]
#[command(name = "rc-fluct", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Sizes of the index sets A_{2p,s}: closed form, enumeration and limit.
    Count(CountArgs),
    /// Limiting covariances sigma_{p,q} or sigma_Q.
    Sigma(SigmaArgs),
    /// List the members of A_{2p} or A_{2p,s}.
    Enumerate(EnumerateArgs),
    /// Exact finite-n expectation and covariance of the trace statistics.
    Oracle(OracleArgs),
    /// Monte Carlo experiment against the limiting covariance.
    Simulate(SimulateArgs),
    /// Run the acceptance checks.
    Verify(VerifyArgs),
    /// Scaling of the cluster counts |B_P|.
    ClusterScan(ClusterArgs),
}

#[derive(Debug, Args)]
struct Common {
    #[arg(long, default_value = "csv")]
    format: OutputFormat,
    /// Write output here instead of stdout.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Enumeration budget in tuples (default from RC_FLUCT_BUDGET or built in).
    #[arg(long)]
    budget: Option<u64>,
}

#[derive(Debug, Args)]
struct CountArgs {
    #[arg(long, required = true, value_delimiter = ',')]
    n: Vec<u64>,
    #[arg(long, required = true, value_delimiter = ',')]
    p: Vec<u32>,
    /// Only this slice; prints the bare closed-form count.
    #[arg(long, allow_hyphen_values = true)]
    s: Option<i64>,
    #[command(flatten)]
    common: Common,
}

#[derive(Debug, Args)]
struct SigmaArgs {
    #[arg(long, value_delimiter = ',')]
    p: Vec<u32>,
    #[arg(long)]
    q: Option<u32>,
    /// Coefficients a_1,…,a_d of Q(x) = Σ a_k x^{2k}.
    #[arg(long = "Q")]
    poly: Option<PolynomialQ>,
    /// Fourth moment, e.g. 3, 9/5 or 1.8 (overrides --dist).
    #[arg(long)]
    mu4: Option<String>,
    #[arg(long, default_value = "gaussian")]
    dist: DistributionName,
    #[command(flatten)]
    common: Common,
}

#[derive(Debug, Args)]
struct EnumerateArgs {
    #[arg(long)]
    n: u32,
    #[arg(long)]
    p: u32,
    #[arg(long, allow_hyphen_values = true)]
    s: Option<i64>,
    /// Pairwise-distinct entries only.
    #[arg(long)]
    distinct: bool,
    /// With --distinct: only neighbouring entries must differ.
    #[arg(long, requires = "distinct")]
    consecutive: bool,
    #[command(flatten)]
    common: Common,
}

#[derive(Debug, Args)]
struct OracleArgs {
    #[arg(long)]
    n: u32,
    #[arg(long)]
    p: u32,
    /// Second exponent for the covariance (defaults to p).
    #[arg(long)]
    q: Option<u32>,
    #[arg(long, default_value = "gaussian")]
    dist: DistributionName,
    #[command(flatten)]
    common: Common,
}

#[derive(Debug, Args)]
struct SimulateArgs {
    /// JSON or TOML experiment file; flags given alongside override it.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long, required_unless_present = "config")]
    n: Option<u32>,
    #[arg(long, value_delimiter = ',')]
    p: Vec<u32>,
    #[arg(long = "Q")]
    poly: Option<PolynomialQ>,
    #[arg(long)]
    dist: Option<DistributionName>,
    #[arg(long)]
    reps: Option<usize>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    path: Option<TracePath>,
    #[arg(long)]
    centering: Option<Centering>,
    /// Also write the replicate table as CSV.
    #[arg(long)]
    samples: Option<PathBuf>,
    /// Leave out the runtime block so reports are byte-identical.
    #[arg(long)]
    no_meta: bool,
    #[arg(long)]
    format: Option<OutputFormat>,
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long)]
    budget: Option<u64>,
}

#[derive(Debug, Args)]
struct VerifyArgs {
    #[arg(long)]
    seed: Option<u64>,
    /// Run only these checks (1 to 11).
    #[arg(long, value_delimiter = ',')]
    only: Vec<u8>,
    #[arg(long)]
    budget: Option<u64>,
}

#[derive(Debug, Args)]
struct ClusterArgs {
    /// Vector lengths 2p_1,…,2p_l, e.g. 2,2,2.
    #[arg(long = "P", required = true, value_delimiter = ',')]
    lengths: Vec<usize>,
    #[arg(long, required = true, value_delimiter = ',')]
    n: Vec<u32>,
    #[command(flatten)]
    common: Common,
}

/// Outcome of a command that ran to completion.
enum Status {
    Ok,
    ValidationFailed,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match dispatch(cli.command) {
        Ok(Status::Ok) => ExitCode::SUCCESS,
        Ok(Status::ValidationFailed) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e}");
            match e {
                Error::InvalidArgument(_) | Error::Config(_) => ExitCode::from(2),
                _ => ExitCode::from(1),
            }
        }
    }
}

fn dispatch(cmd: Command) -> rc_fluct::Result<Status> {
    match cmd {
        Command::Count(a) => count(a),
        Command::Sigma(a) => sigma_cmd(a),
        Command::Enumerate(a) => enumerate(a),
        Command::Oracle(a) => oracle(a),
        Command::Simulate(a) => simulate(a),
        Command::Verify(a) => verify(a),
        Command::ClusterScan(a) => cluster_scan(a),
    }
}

fn sink(out: &Option<PathBuf>) -> rc_fluct::Result<Box<dyn Write>> {
    Ok(match out {
        Some(path) => Box::new(BufWriter::new(File::create(path)?)),
        None => Box::new(BufWriter::new(io::stdout().lock())),
    })
}

fn budget(explicit: Option<u64>, default: Budget) -> Budget {
    explicit.map(Budget).unwrap_or_else(|| Budget::from_env_or(default))
}

/// Rows of string cells as CSV or as a JSON array of objects.
fn emit(out: &mut dyn Write, format: OutputFormat, header: &[&str], rows: &[Vec<serde_json::Value>]) -> rc_fluct::Result<()> {
    match format {
        OutputFormat::Csv => {
            writeln!(out, "{}", header.join(","))?;
            for row in rows {
                let cells: Vec<String> = row
                    .iter()
                    .map(|v| match v {
                        serde_json::Value::String(s) => s.clone(),
                        serde_json::Value::Number(n) => n.as_f64().filter(|_| n.is_f64()).map_or(n.to_string(), format_f64),
                        other => other.to_string(),
                    })
                    .collect();
                writeln!(out, "{}", cells.join(","))?;
            }
        }
        OutputFormat::Json => {
            let objs: Vec<serde_json::Value> = rows
                .iter()
                .map(|row| header.iter().map(|h| h.to_string()).zip(row.iter().cloned()).collect())
                .collect();
            writeln!(out, "{}", serde_json::to_string_pretty(&objs)?)?;
        }
    }
    out.flush()?;
    Ok(())
}

fn exact_cells(v: &Exact) -> Vec<serde_json::Value> {
    vec![v.numer().to_string().into(), v.denom().to_string().into(), v.to_f64().into()]
}

fn count(a: CountArgs) -> rc_fluct::Result<Status> {
    let mut out = sink(&a.common.out)?;
    if let (Some(s), [n], [p]) = (a.s, a.n.as_slice(), a.p.as_slice()) {
        if a.common.format == OutputFormat::Csv {
            writeln!(out, "{}", count_a_s_closed_form(*n, *p, s)?)?;
            out.flush()?;
            return Ok(Status::Ok);
        }
    }
    let b = budget(a.common.budget, Budget::INDEX_DEFAULT);
    let mut rows = Vec::new();
    let mut mismatch = false;
    for &n in &a.n {
        for &p in &a.p {
            let pi = p as i64;
            let slices: Vec<i64> = match a.s {
                Some(s) => vec![s],
                None => (-(pi - 1)..=(pi - 1)).collect(),
            };
            for s in slices {
                let formula = count_a_s_closed_form(n, p, s)?;
                let enumerated = if n <= u32::MAX as u64 && b.allows(power_size(n, 2 * p)) {
                    let c = count_a(n as u32, 2 * p as usize, Selection::exact_sum(s), b)?;
                    mismatch |= formula != c.into();
                    serde_json::Value::from(c)
                } else {
                    serde_json::Value::String(String::new())
                };
                let limit = limit_ratio(p, s)?;
                rows.push(vec![
                    n.into(),
                    p.into(),
                    s.into(),
                    formula.to_string().into(),
                    enumerated,
                    limit.to_string().into(),
                ]);
            }
        }
    }
    emit(&mut *out, a.common.format, &["n", "p", "s", "count", "enumerated", "limit_ratio"], &rows)?;
    if mismatch {
        eprintln!("closed form and enumeration disagree");
        return Ok(Status::ValidationFailed);
    }
    Ok(Status::Ok)
}

fn sigma_cmd(a: SigmaArgs) -> rc_fluct::Result<Status> {
    let mu4 = match &a.mu4 {
        Some(text) => parse_rational(text).ok_or_else(|| Error::InvalidArgument(format!("bad --mu4 value {text:?}")))?,
        None => a.dist.distribution().moments().mu4()?,
    };
    let mut out = sink(&a.common.out)?;
    if let Some(q) = &a.poly {
        let v = sigma_q(q, &mu4)?;
        return single(&mut *out, a.common.format, "sigma_Q", &v);
    }
    match (a.p.as_slice(), a.q) {
        ([], _) => Err(Error::InvalidArgument("sigma needs --p or --Q".into())),
        ([p], q) => {
            let v = sigma(*p, q.unwrap_or(*p), &mu4)?;
            single(&mut *out, a.common.format, "sigma", &v)
        }
        (ps, _) => {
            let mut rows = Vec::new();
            for &p in ps {
                for &q in ps {
                    let mut row: Vec<serde_json::Value> = vec![p.into(), q.into()];
                    row.extend(exact_cells(&sigma(p, q, &mu4)?));
                    rows.push(row);
                }
            }
            emit(&mut *out, a.common.format, &["p", "q", "numerator", "denominator", "value"], &rows)?;
            Ok(Status::Ok)
        }
    }
}

fn single(out: &mut dyn Write, format: OutputFormat, name: &str, v: &Exact) -> rc_fluct::Result<Status> {
    match format {
        OutputFormat::Csv => writeln!(out, "{v} {}", format_f64(v.to_f64()))?,
        OutputFormat::Json => writeln!(
            out,
            "{}",
            serde_json::json!({ "quantity": name, "exact": v.to_string(), "value": v.to_f64() })
        )?,
    }
    out.flush()?;
    Ok(Status::Ok)
}

fn enumerate(a: EnumerateArgs) -> rc_fluct::Result<Status> {
    let mut sel = match (a.s, a.distinct) {
        (None, false) => Selection::mod_n(),
        (Some(s), false) => Selection::exact_sum(s),
        (None, true) => Selection::distinct(),
        (Some(s), true) => Selection::distinct_exact_sum(s),
    };
    if a.consecutive {
        sel = sel.consecutive();
    }
    let b = budget(a.common.budget, Budget::INDEX_DEFAULT);
    let iter = enumerate_a(a.n, 2 * a.p as usize, sel, b)?;
    let mut out = sink(&a.common.out)?;
    let width = 2 * a.p as usize;
    match a.common.format {
        OutputFormat::Csv => {
            let header: Vec<String> = (1..=width).map(|k| format!("i_{k}")).collect();
            writeln!(out, "{},alt_sum", header.join(","))?;
            for v in iter {
                let cells: Vec<String> = v.entries().iter().map(u32::to_string).collect();
                writeln!(out, "{},{}", cells.join(","), v.alt_sum())?;
            }
        }
        OutputFormat::Json => {
            let all: Vec<serde_json::Value> = iter
                .map(|v| serde_json::json!({ "entries": v.entries(), "alt_sum": v.alt_sum() }))
                .collect();
            writeln!(out, "{}", serde_json::to_string_pretty(&all)?)?;
        }
    }
    out.flush()?;
    Ok(Status::Ok)
}

fn oracle(a: OracleArgs) -> rc_fluct::Result<Status> {
    let b = budget(a.common.budget, Budget::ORACLE_DEFAULT);
    let moments = a.dist.distribution().moments().clone();
    let q = a.q.unwrap_or(a.p);
    let mean = exact_expected_trace(a.n, a.p, &moments, b)?;
    let cov = exact_cov_w(a.n, a.p, q, &moments, b)?;
    let mut rows = Vec::new();
    for (name, qq, v) in [("expected_trace", a.p, &mean), ("cov_w", q, &cov)] {
        let mut row: Vec<serde_json::Value> = vec![name.into(), a.n.into(), a.p.into(), qq.into()];
        row.extend(exact_cells(v));
        rows.push(row);
    }
    let mut out = sink(&a.common.out)?;
    emit(&mut *out, a.common.format, &["quantity", "n", "p", "q", "numerator", "denominator", "value"], &rows)?;
    Ok(Status::Ok)
}

fn simulate(a: SimulateArgs) -> rc_fluct::Result<Status> {
    let mut cfg = match &a.config {
        Some(path) => ExperimentConfig::from_file(path)?,
        None => ExperimentConfig::new(0, Vec::new(), DistributionName::Gaussian, 4000, 0),
    };
    if let Some(n) = a.n {
        cfg.n = n;
    }
    if !a.p.is_empty() {
        cfg.ps = a.p;
    }
    if a.poly.is_some() {
        cfg.q = a.poly;
    }
    if let Some(d) = a.dist {
        cfg.distribution = d;
    }
    if let Some(r) = a.reps {
        cfg.replicates = r;
    }
    if let Some(s) = a.seed {
        cfg.seed = s;
    }
    if let Some(p) = a.path {
        cfg.trace_path = p;
    }
    if let Some(c) = a.centering {
        cfg.centering = c;
    }
    if let Some(f) = a.format {
        cfg.format = f;
    }
    if a.out.is_some() {
        cfg.output = a.out;
    }
    if a.budget.is_some() {
        cfg.budget = a.budget;
    }
    if cfg.ps.is_empty() && cfg.q.is_none() {
        cfg.ps = vec![1];
    }
    cfg.validate()?;

    let report = run_experiment(&cfg)?;
    if let Some(path) = &a.samples {
        w_samples(&cfg)?.write_csv(BufWriter::new(File::create(path)?))?;
    }
    let mut out = sink(&cfg.output)?;
    match cfg.format {
        OutputFormat::Csv => report.write_csv(&mut out)?,
        OutputFormat::Json => writeln!(out, "{}", report.to_json(!a.no_meta)?)?,
    }
    out.flush()?;
    Ok(Status::Ok)
}

fn verify(a: VerifyArgs) -> rc_fluct::Result<Status> {
    let mut opts = VerifyOptions::default();
    if let Some(s) = a.seed {
        opts.seed = s;
    }
    if let Some(b) = a.budget {
        opts.budget = Budget(b);
    }
    let ids: Vec<u8> = if a.only.is_empty() { (1..=11).collect() } else { a.only };
    if let Some(bad) = ids.iter().find(|id| !(1..=11).contains(*id)) {
        return Err(Error::InvalidArgument(format!("no check numbered {bad}")));
    }
    let mut all = true;
    for id in ids {
        let outcome = run_check(id, &opts);
        all &= outcome.passed;
        println!("{outcome}");
    }
    Ok(if all { Status::Ok } else { Status::ValidationFailed })
}

fn cluster_scan(a: ClusterArgs) -> rc_fluct::Result<Status> {
    let b = budget(a.common.budget, Budget::INDEX_DEFAULT);
    let rows: Vec<Vec<serde_json::Value>> = cluster_ratio_scan(&a.lengths, &a.n, b)?
        .into_iter()
        .map(|r| vec![r.n.into(), r.count.to_string().into(), r.ratio.into()])
        .collect();
    let mut out = sink(&a.common.out)?;
    emit(&mut *out, a.common.format, &["n", "count", "ratio"], &rows)?;
    Ok(Status::Ok)
}
