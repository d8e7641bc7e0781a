use std::fs;
use std::io::{self, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};

use benford::ingest::{self, ScanPolicy, SkipShape, TableFormat, TokenScan};
use benford::model;
use benford::report::{round_sig, Level, Meta, ReportDocument, EXIT_ACCEPT, EXIT_ERROR};
use benford::sequences::{SequenceError, SequenceSpec};
use benford::sim::{self, ProcessSpec};

/// Significant-digit analysis: goodness of fit to the logarithmic digit law,
/// exact series generation, process simulation and reference tables.
#[derive(Parser)]
#[command(name = "benford", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Test the digits of numbers found in a text, CSV or TSV file.
    Analyze(AnalyzeArgs),
    /// Generate a series' digits, values or census.
    Generate(GenerateArgs),
    /// Simulate an ensemble of random processes and print its convergence curve.
    Simulate(SimulateArgs),
    /// Print tables of the expected digit law.
    Expected(ExpectedArgs),
}

#[derive(Clone, Copy, ValueEnum)]
enum Format {
    Json,
    Csv,
    Text,
}

#[derive(Args)]
struct AnalyzeArgs {
    path: PathBuf,
    /// Column to read from a CSV/TSV file (repeatable; default all).
    #[arg(long)]
    column: Vec<String>,
    #[arg(long, default_value_t = 1)]
    position: usize,
    #[arg(long, default_value_t = 10)]
    base: u32,
    #[arg(long, value_enum, default_value = "json")]
    format: Format,
    /// Significance level (percent) that decides the exit status.
    #[arg(long, default_value = "5")]
    level: Level,
    /// Accept comma thousands separators such as 2,300.
    #[arg(long)]
    separators: bool,
    /// Exclude tokens of this shape; `#` is any digit, `year` = 19## or 20##.
    #[arg(long = "skip-shape")]
    skip_shape: Vec<String>,
    /// Also write the extracted tokens as CSV to this file.
    #[arg(long)]
    dump_tokens: Option<PathBuf>,
}

#[derive(Args)]
struct GenerateArgs {
    /// fibonacci, primes, power-alpha, factorial, power-n or pascal.
    kind: Option<String>,
    /// Read the series from a config file instead of flags.
    #[arg(long, conflicts_with = "kind")]
    config: Option<PathBuf>,
    #[arg(long)]
    a1: Option<String>,
    #[arg(long)]
    a2: Option<String>,
    #[arg(long)]
    terms: Option<String>,
    #[arg(long)]
    below: Option<String>,
    /// Ratio p/q, integer or decimal.
    #[arg(long)]
    alpha: Option<String>,
    #[arg(long)]
    n: Option<String>,
    #[arg(long)]
    k: Option<String>,
    #[arg(long)]
    rows: Option<String>,
    #[arg(long)]
    base: Option<String>,
    /// Print exact values instead of first digits.
    #[arg(long, conflicts_with = "census")]
    values: bool,
    /// Print the first-digit census with its statistics.
    #[arg(long)]
    census: bool,
    #[arg(long, value_enum, default_value = "json")]
    format: Format,
    #[arg(long, default_value = "5")]
    level: Level,
}

#[derive(Clone, Copy, ValueEnum)]
enum CurveFormat {
    Csv,
    Json,
}

#[derive(Args)]
struct SimulateArgs {
    /// mult or add.
    #[arg(long, default_value = "mult")]
    kind: String,
    /// lognormal:MU,SIGMA, uniform:LO,HI, constant:V or ln:FAMILY:PARAMS.
    #[arg(long, default_value = "lognormal:0,1")]
    noise: String,
    #[arg(long, default_value_t = 50)]
    steps: usize,
    #[arg(long, default_value_t = 10_000)]
    walkers: usize,
    #[arg(long, default_value_t = 1.0)]
    initial: f64,
    #[arg(long, default_value_t = 10)]
    base: u32,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, value_enum, default_value = "csv")]
    format: CurveFormat,
}

#[derive(Clone, Copy, ValueEnum)]
enum Table {
    Probs,
    Moments,
    Tvd,
    Corr,
}

#[derive(Args)]
struct ExpectedArgs {
    #[arg(long, value_enum, default_value = "probs")]
    table: Table,
    /// Digit position or inclusive range such as 1..7.
    #[arg(long)]
    k: Option<String>,
    #[arg(long, default_value_t = 10)]
    base: u32,
    /// Add expected counts for a sample of this size.
    #[arg(long)]
    sample_size: Option<u64>,
    /// Largest position for the correlation table.
    #[arg(long, default_value_t = 5)]
    max_j: usize,
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { EXIT_ERROR as u8 } else { 0 });
        }
    };
    let result = match cli.command {
        Command::Analyze(a) => analyze(a),
        Command::Generate(a) => generate(a),
        Command::Simulate(a) => simulate(a),
        Command::Expected(a) => expected(a),
    };
    match result {
        Ok(code) => ExitCode::from(code as u8),
        Err(e) if is_broken_pipe(&e) => ExitCode::from(EXIT_ACCEPT as u8),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(EXIT_ERROR as u8)
        }
    }
}

fn is_broken_pipe(e: &anyhow::Error) -> bool {
    e.downcast_ref::<io::Error>()
        .is_some_and(|e| e.kind() == io::ErrorKind::BrokenPipe)
}

fn table_format(path: &Path) -> Option<TableFormat> {
    match path.extension()?.to_str()?.to_ascii_lowercase().as_str() {
        "csv" => Some(TableFormat::Csv),
        "tsv" | "tab" => Some(TableFormat::Tsv),
        _ => None,
    }
}

fn emit(doc: &ReportDocument, format: Format) -> Result<()> {
    let text = match format {
        Format::Json => doc.to_json() + "\n",
        Format::Csv => doc.to_csv(),
        Format::Text => doc.to_text(),
    };
    io::stdout().lock().write_all(text.as_bytes())?;
    Ok(())
}

fn analyze(args: AnalyzeArgs) -> Result<i32> {
    let path = &args.path;
    let shown = path.display();
    let bytes = fs::read(path).with_context(|| format!("{shown}: cannot read"))?;
    let policy = ScanPolicy {
        thousands_separators: args.separators,
        skip_shapes: args.skip_shape.iter().flat_map(|p| SkipShape::parse_all(p)).collect(),
        columns: (!args.column.is_empty()).then(|| args.column.clone()),
    };
    let scan = match table_format(path) {
        Some(format) => ingest::read_table(&bytes, format, &policy),
        None if policy.columns.is_some() => bail!("{shown}: --column needs a .csv or .tsv input"),
        None => TokenScan::from_text(&bytes, &policy),
    }
    .with_context(|| format!("{shown}"))?;
    if let Some(out) = &args.dump_tokens {
        let file = fs::File::create(out).with_context(|| format!("{}: cannot create", out.display()))?;
        ingest::write_tokens_csv(&scan.tokens, BufWriter::new(file))?;
    }
    let census = scan.census(args.position, args.base).with_context(|| format!("{shown}"))?;
    let meta = Meta::new(shown.to_string(), policy.describe(), args.position, args.base);
    let doc = ReportDocument::from_census(meta, &census).with_context(|| format!("{shown}"))?;
    emit(&doc, args.format)?;
    Ok(doc.exit_code(args.level))
}

/// Builds a sequence spec from the config-file syntax so that flags and
/// files share one parser. Errors name the offending flag.
fn spec_from_flags(args: &GenerateArgs) -> Result<SequenceSpec> {
    let Some(kind) = &args.kind else {
        bail!("generate needs a series kind or --config FILE");
    };
    let flags = [
        ("a1", &args.a1),
        ("a2", &args.a2),
        ("terms", &args.terms),
        ("below", &args.below),
        ("alpha", &args.alpha),
        ("n", &args.n),
        ("k", &args.k),
        ("rows", &args.rows),
        ("base", &args.base),
    ];
    let mut text = format!("kind = {kind}\n");
    let mut names = vec![kind.as_str()];
    for (key, value) in flags {
        if let Some(v) = value {
            text += &format!("{key} = {v}\n");
            names.push(key);
        }
    }
    SequenceSpec::from_config_str(&text).map_err(|e| match e {
        SequenceError::Config { line, message } if line >= 2 => {
            anyhow::anyhow!("--{}: {message}", names[line - 1])
        }
        SequenceError::Config { message, .. } => anyhow::anyhow!("{message}"),
        other => other.into(),
    })
}

fn generate(args: GenerateArgs) -> Result<i32> {
    let (spec, source) = match &args.config {
        Some(path) => {
            let text = fs::read_to_string(path).with_context(|| format!("{}: cannot read", path.display()))?;
            let spec = SequenceSpec::from_config_str(&text).with_context(|| format!("{}", path.display()))?;
            (spec, path.display().to_string())
        }
        None => {
            let spec = spec_from_flags(&args)?;
            (spec, format!("generate {}", args.kind.as_deref().unwrap_or_default()))
        }
    };
    if args.census {
        let census = spec.census()?;
        let policy = spec.to_config_string().trim_end().replace('\n', "; ");
        let doc = ReportDocument::from_census(Meta::new(source, policy, 1, spec.base), &census)?;
        emit(&doc, args.format)?;
        return Ok(doc.exit_code(args.level));
    }
    let mut out = BufWriter::new(io::stdout().lock());
    if args.values {
        for v in spec.values()? {
            writeln!(out, "{v}")?;
        }
    } else {
        for d in spec.digits()? {
            writeln!(out, "{d}")?;
        }
    }
    out.flush()?;
    Ok(EXIT_ACCEPT)
}

fn simulate(args: SimulateArgs) -> Result<i32> {
    let spec = ProcessSpec {
        kind: args.kind.parse()?,
        noise: args.noise.parse()?,
        steps: args.steps,
        walkers: args.walkers,
        initial_value: args.initial,
        base: args.base,
        seed: args.seed,
    };
    let run = sim::run_ensemble(&spec)?;
    let curve = sim::curve_of(&run)?;
    let mut out = BufWriter::new(io::stdout().lock());
    match args.format {
        CurveFormat::Csv => {
            writeln!(out, "# seed={} rng={}", spec.seed, run.rng)?;
            writeln!(
                out,
                "# kind={} noise={} steps={} walkers={} initial={} base={} exact_reads={}",
                args.kind, spec.noise, spec.steps, spec.walkers, spec.initial_value, spec.base, run.exact_reads
            )?;
            writeln!(out, "step,d1")?;
            for p in &curve {
                writeln!(out, "{},{}", p.step, round_sig(p.d1))?;
            }
        }
        CurveFormat::Json => {
            let points: Vec<_> = curve
                .iter()
                .map(|p| serde_json::json!({ "step": p.step, "d1": round_sig(p.d1) }))
                .collect();
            let doc = serde_json::json!({
                "meta": {
                    "seed": spec.seed,
                    "rng": run.rng,
                    "tool_version": env!("CARGO_PKG_VERSION"),
                    "noise": spec.noise.to_string(),
                },
                "spec": spec,
                "exact_reads": run.exact_reads,
                "curve": points,
            });
            writeln!(out, "{}", serde_json::to_string_pretty(&doc)?)?;
        }
    }
    out.flush()?;
    Ok(EXIT_ACCEPT)
}

fn parse_range(text: &str) -> Result<std::ops::RangeInclusive<usize>> {
    let parse = |s: &str| s.trim().parse::<usize>().with_context(|| format!("bad position {s:?}"));
    let range = match text.split_once("..") {
        Some((a, b)) => parse(a)?..=parse(b.trim_start_matches('='))?,
        None => {
            let k = parse(text)?;
            k..=k
        }
    };
    if range.is_empty() {
        bail!("empty range {text:?}");
    }
    Ok(range)
}

fn expected(args: ExpectedArgs) -> Result<i32> {
    let default_k = match args.table {
        Table::Probs => "1",
        _ => "1..7",
    };
    let ks = parse_range(args.k.as_deref().unwrap_or(default_k))?;
    if args.base != 10 && !(matches!(args.table, Table::Probs) && *ks.end() == 1) {
        bail!("only first-digit probabilities are available in base {}", args.base);
    }
    let mut out = BufWriter::new(io::stdout().lock());
    match args.table {
        Table::Probs => {
            let count_col = if args.sample_size.is_some() { ",expected_count" } else { "" };
            writeln!(out, "position,digit,probability{count_col}")?;
            for k in ks {
                let dist = if k == 1 {
                    model::first_digit_distribution(args.base)?
                } else {
                    model::marginal_distribution(k)?.clone()
                };
                for (d, p) in dist.digits().zip(dist.probabilities()) {
                    write!(out, "{k},{d},{}", round_sig(*p))?;
                    if let Some(s) = args.sample_size {
                        write!(out, ",{}", round_sig(p * s as f64))?;
                    }
                    writeln!(out)?;
                }
            }
        }
        Table::Moments => {
            writeln!(out, "k,mean,variance")?;
            for k in ks {
                let m = model::moments(k)?;
                writeln!(out, "{k},{},{}", round_sig(m.mean), round_sig(m.variance))?;
            }
        }
        Table::Tvd => {
            writeln!(out, "k,tvd,ratio")?;
            let mut prev: Option<f64> = None;
            for k in ks {
                let t = model::tvd_from_uniform(k)?;
                let ratio = prev.map_or(String::new(), |p| round_sig(t / p).to_string());
                writeln!(out, "{k},{},{ratio}", round_sig(t))?;
                prev = Some(t);
            }
        }
        Table::Corr => {
            writeln!(out, "i,j,rho")?;
            for j in 2..=args.max_j {
                for i in 1..j {
                    writeln!(out, "{i},{j},{}", round_sig(model::digit_correlation(i, j)?))?;
                }
            }
        }
    }
    out.flush()?;
    Ok(EXIT_ACCEPT)
}
