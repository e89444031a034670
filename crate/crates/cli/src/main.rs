use std::collections::BTreeMap;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::sync::atomic::{AtomicBool, Ordering};

use clap::{Args, Parser, Subcommand};
use rayon::prelude::*;
use serde::Serialize;

use nsgb::dsl::{self, parse_document, Document, Sample};
use nsgb::groebner::{buchberger_with, hilbert_series, CompletionOptions, GbSummary, HilbertEntry, TruncatedGB};
use nsgb::linalg::Coeff;
use nsgb::nschreier::{verdict, CheckOptions, NsReport, OrderingFamily, SCHEMA_VERSION};
use nsgb::oracle::{Membership, Oracle};
use nsgb::ordering::{parse_generator_order, parse_ordering, OrderingSpec};
use nsgb::poly::Polynomial;
use nsgb::presentation::{multilinearize, Presentation};
use nsgb::symmetrize::{present_shuffle, ShufflePresentation};
use nsgb::Error;

static JSON_ON_STDOUT: AtomicBool = AtomicBool::new(false);

macro_rules! say {
    ($($t:tt)*) => {
        if JSON_ON_STDOUT.load(Ordering::Relaxed) { eprintln!($($t)*) } else { println!($($t)*) }
    };
}

macro_rules! say_raw {
    ($($t:tt)*) => {
        if JSON_ON_STDOUT.load(Ordering::Relaxed) { eprint!($($t)*) } else { print!($($t)*) }
    };
}

#[derive(Parser)]
#[command(name = "nsgb", version, about = "Shuffle operad Gröbner bases and Nielsen-Schreier criteria")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Clone)]
struct Common {
    /// Presentation file in the `.ops` language.
    file: PathBuf,
    /// Largest arity to complete.
    #[arg(long, default_value_t = 5)]
    max_arity: usize,
    /// Ordering preset or `custom:<keys>`.
    #[arg(long, default_value = "rgpl")]
    order: String,
    /// Generator variants from largest to smallest, e.g. "b>c".
    #[arg(long)]
    gens: Option<String>,
    /// Write a JSON report to this path (`-` for standard output).
    #[arg(long)]
    json: Option<PathBuf>,
    /// Write the completion trace as JSON lines to this path.
    #[arg(long)]
    trace: Option<PathBuf>,
    /// Parameter values for a parametric file, e.g. "a=1,b=-1/2".
    #[arg(long)]
    sample: Option<String>,
}

#[derive(Subcommand)]
enum Command {
    /// Complete the relations to a Gröbner basis up to the arity bound.
    Gb(Common),
    /// Dimensions of the operad by arity.
    Dims {
        #[command(flatten)]
        common: Common,
        /// Cross-check against the brute-force oracle up to this arity.
        #[arg(long)]
        oracle: Option<usize>,
    },
    /// Evaluate both leading-term conditions and report a verdict.
    CheckNs {
        #[command(flatten)]
        common: Common,
        /// Evaluate only the first condition.
        #[arg(long)]
        conjecture_mode: bool,
        /// Koszul dual dimensions for arities 1, 2, ..., e.g. "1,2,3,4".
        #[arg(long)]
        koszul_dims: Option<String>,
    },
    /// Normal form of a polynomial such as "b(b(b(1,2),3),4)".
    Reduce {
        #[command(flatten)]
        common: Common,
        polynomial: String,
    },
    /// Brute-force computations in the free symmetric operad.
    Oracle {
        #[command(subcommand)]
        command: OracleCommand,
    },
    /// Run the criterion on every sample point of a parametric file.
    Scan {
        #[command(flatten)]
        common: Common,
        #[arg(long)]
        conjecture_mode: bool,
    },
    /// Print the presentation as parsed, after any change of basis.
    Print {
        file: PathBuf,
        #[arg(long)]
        sample: Option<String>,
    },
}

#[derive(Subcommand)]
enum OracleCommand {
    /// Free, consequence and quotient dimensions.
    Dims {
        file: PathBuf,
        #[arg(long, default_value_t = 4)]
        max_arity: usize,
        /// Largest arity the oracle will attempt.
        #[arg(long, default_value_t = nsgb::oracle::DEFAULT_GUARD)]
        guard: usize,
        #[arg(long)]
        json: Option<PathBuf>,
        #[arg(long)]
        sample: Option<String>,
    },
    /// Whether a multilinear identity such as "(x*y)*z + (y*x)*z = 0" follows.
    Member {
        file: PathBuf,
        identity: String,
        #[arg(long, default_value_t = nsgb::oracle::DEFAULT_GUARD)]
        guard: usize,
        #[arg(long)]
        json: Option<PathBuf>,
        #[arg(long)]
        sample: Option<String>,
    },
}

enum Failure {
    Input(String),
    Resource(String),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        match e {
            Error::BoundExceeded { .. } => Failure::Resource(e.to_string()),
            other => Failure::Input(other.to_string()),
        }
    }
}

type Outcome = Result<(), Failure>;

fn read(path: &Path) -> Result<String, Failure> {
    fs::read_to_string(path).map_err(|e| Failure::Input(format!("{}: {e}", path.display())))
}

fn parse_sample(text: &str) -> Result<Sample, Failure> {
    dsl::parse_sample(text).map_err(|e| Failure::Input(e.to_string()))
}

fn file_stem(path: &Path) -> String {
    path.file_stem().map(|s| s.to_string_lossy().into_owned()).unwrap_or_default()
}

fn load_document(path: &Path) -> Result<Document, Failure> {
    let text = read(path)?;
    let mut doc = parse_document(&text).map_err(|e| Failure::Input(format!("{}:{e}", path.display())))?;
    if doc.name.is_none() {
        doc.name = Some(file_stem(path));
    }
    Ok(doc)
}

fn load(path: &Path, sample: Option<&str>) -> Result<(Document, Presentation), Failure> {
    let doc = load_document(path)?;
    let p = match sample {
        Some(s) => doc.instantiate(&parse_sample(s)?)?,
        None if doc.is_parametric() => {
            return Err(Failure::Input(format!(
                "{} has parameters ({}); pass --sample or use `scan`",
                path.display(),
                doc.params.join(", ")
            )))
        }
        None => doc.presentation()?,
    };
    Ok((doc, p))
}

fn emit_json<T: Serialize>(target: &Option<PathBuf>, value: &T) -> Outcome {
    let Some(path) = target else { return Ok(()) };
    let text = serde_json::to_string_pretty(value).map_err(|e| Failure::Input(e.to_string()))? + "\n";
    if path.as_os_str() == "-" {
        print!("{text}");
        Ok(())
    } else {
        fs::write(path, text).map_err(|e| Failure::Input(format!("{}: {e}", path.display())))
    }
}

fn ordering_for(c: &Common, sp: &ShufflePresentation) -> Result<OrderingSpec, Failure> {
    Ok(parse_ordering(&c.order, c.gens.as_deref(), &sp.signature)?)
}

fn complete(c: &Common, sp: &ShufflePresentation, ord: &OrderingSpec) -> Result<TruncatedGB, Failure> {
    let opts = CompletionOptions {
        record_trace: c.trace.is_some(),
        ..CompletionOptions::parallel()
    };
    let gb = buchberger_with(sp, ord, c.max_arity.max(sp.max_relation_arity()), &opts);
    if let Some(path) = &c.trace {
        let mut f = fs::File::create(path).map_err(|e| Failure::Input(format!("{}: {e}", path.display())))?;
        for r in &gb.log {
            let line = serde_json::to_string(r).map_err(|e| Failure::Input(e.to_string()))?;
            writeln!(f, "{line}").map_err(|e| Failure::Input(e.to_string()))?;
        }
    }
    Ok(gb)
}

fn truncation(gb: &TruncatedGB) -> Outcome {
    match &gb.truncated {
        Some(why) => Err(Failure::Resource(format!("completion stopped: {why}"))),
        None => Ok(()),
    }
}

fn print_dims(series: &[HilbertEntry]) {
    let dims: Vec<String> = series
        .iter()
        .map(|h| if h.exact { h.dim.to_string() } else { format!("{}?", h.dim) })
        .collect();
    say!("dims: {}", dims.join(", "));
}

#[derive(Serialize)]
struct GbReport {
    schema_version: u32,
    presentation: String,
    gb: GbSummary,
}

fn cmd_gb(c: &Common) -> Outcome {
    let (_, p) = load(&c.file, c.sample.as_deref())?;
    let sp = present_shuffle(&p)?;
    let ord = ordering_for(c, &sp)?;
    let gb = complete(c, &sp, &ord)?;
    let summary = gb.summary();
    say!("presentation: {}", p.name);
    say!("ordering: {}", ord.describe(&sp.signature));
    for (e, lt) in summary.elements.iter().zip(&summary.leading_terms) {
        say!("  [{lt}]  {e}");
    }
    say!("complete through arity {}", gb.complete_up_to());
    emit_json(
        &c.json,
        &GbReport {
            schema_version: SCHEMA_VERSION,
            presentation: p.name.clone(),
            gb: summary,
        },
    )?;
    truncation(&gb)
}

#[derive(Serialize)]
struct DimsReport {
    schema_version: u32,
    presentation: String,
    ordering: nsgb::ordering::OrderingSummary,
    dims: Vec<HilbertEntry>,
    oracle: Option<Vec<usize>>,
}

fn cmd_dims(c: &Common, oracle: Option<usize>) -> Outcome {
    let (_, p) = load(&c.file, c.sample.as_deref())?;
    let sp = present_shuffle(&p)?;
    let ord = ordering_for(c, &sp)?;
    let gb = complete(c, &sp, &ord)?;
    let series = hilbert_series(&gb, c.max_arity)?;
    print_dims(&series);
    let checked = match oracle {
        Some(k) => {
            let mut o = Oracle::new(&p)?.with_guard(k.max(nsgb::oracle::DEFAULT_GUARD));
            let dims = (1..=k.min(c.max_arity)).map(|n| o.operad_dim(n)).collect::<Result<Vec<_>, _>>()?;
            let shown: Vec<String> = dims.iter().map(usize::to_string).collect();
            say!("oracle: {}", shown.join(", "));
            let agree = dims.iter().zip(&series).all(|(d, h)| *d == h.dim);
            say!("agreement: {}", if agree { "yes" } else { "NO" });
            Some(dims)
        }
        None => None,
    };
    emit_json(
        &c.json,
        &DimsReport {
            schema_version: SCHEMA_VERSION,
            presentation: p.name.clone(),
            ordering: ord.summary(&sp.signature),
            dims: series,
            oracle: checked,
        },
    )?;
    truncation(&gb)
}

fn parse_dims(text: &str) -> Result<Vec<u64>, Failure> {
    text.split(',')
        .map(str::trim)
        .filter(|s| !s.is_empty())
        .map(|s| s.parse().map_err(|_| Failure::Input(format!("bad dimension `{s}`"))))
        .collect()
}

#[derive(Serialize)]
struct CheckReport {
    schema_version: u32,
    presentation: String,
    ordering: nsgb::ordering::OrderingSummary,
    gb: GbSummary,
    dims: Vec<HilbertEntry>,
    m1: nsgb::nschreier::ConditionResult,
    m2: Option<nsgb::nschreier::ConditionResult>,
    verdict: String,
    conjecture_mode: bool,
    note: String,
}

fn check_options(c: &Common, doc: &Document, sp: &ShufflePresentation, conjecture_mode: bool, koszul: Option<&str>) -> Result<CheckOptions, Failure> {
    let family = OrderingFamily {
        generator_orders: match &c.gens {
            Some(g) => Some(vec![parse_generator_order(g, &sp.signature)?]),
            None => None,
        },
        ..OrderingFamily::default()
    };
    let koszul_dims = match koszul {
        Some(k) => Some(parse_dims(k)?),
        None => doc.koszul.clone(),
    };
    Ok(CheckOptions {
        family,
        conjecture_mode,
        koszul_dims,
        completion: CompletionOptions::parallel(),
    })
}

fn cmd_check(c: &Common, conjecture_mode: bool, koszul: Option<&str>) -> Outcome {
    let (doc, p) = load(&c.file, c.sample.as_deref())?;
    let sp = present_shuffle(&p)?;
    let opts = check_options(c, &doc, &sp, conjecture_mode, koszul)?;
    let report = verdict(&p, c.max_arity, &opts)?;
    let ord = ordering_for(c, &sp)?;
    let gb = complete(c, &sp, &ord)?;
    let dims = hilbert_series(&gb, gb.arity_bound)?;
    say_raw!("{}", report.summary());
    print_dims(&dims);
    emit_json(
        &c.json,
        &CheckReport {
            schema_version: SCHEMA_VERSION,
            presentation: p.name.clone(),
            ordering: ord.summary(&sp.signature),
            gb: gb.summary(),
            dims,
            m1: report.m1.clone(),
            m2: report.m2.clone(),
            verdict: report.verdict.label().into(),
            conjecture_mode,
            note: report.note.clone(),
        },
    )?;
    resource_check(&report)
}

fn resource_check(report: &NsReport) -> Outcome {
    let runs = report.m1.runs.iter().chain(report.m2.iter().flat_map(|m| m.runs.iter()));
    for r in runs {
        if let Some(why) = &r.truncated {
            return Err(Failure::Resource(format!("completion stopped: {why}")));
        }
    }
    Ok(())
}

fn cmd_reduce(c: &Common, text: &str) -> Outcome {
    let (_, p) = load(&c.file, c.sample.as_deref())?;
    let sp = present_shuffle(&p)?;
    let ord = ordering_for(c, &sp)?;
    let poly = Polynomial::parse(text, &sp.signature)?;
    let mut common = c.clone();
    common.max_arity = c.max_arity.max(poly.arity());
    let gb = complete(&common, &sp, &ord)?;
    let nf = gb.reduce(&poly);
    let shown = nf.format(&sp.signature, Some(&ord));
    say!("{shown}");
    #[derive(Serialize)]
    struct R {
        schema_version: u32,
        input: String,
        normal_form: String,
        ordering: nsgb::ordering::OrderingSummary,
    }
    emit_json(
        &c.json,
        &R {
            schema_version: SCHEMA_VERSION,
            input: poly.format(&sp.signature, Some(&ord)),
            normal_form: shown,
            ordering: ord.summary(&sp.signature),
        },
    )?;
    truncation(&gb)
}

#[derive(Serialize)]
struct OracleRow {
    arity: usize,
    free: usize,
    consequences: usize,
    quotient: usize,
}

fn cmd_oracle_dims(file: &Path, max: usize, guard: usize, json: &Option<PathBuf>, sample: Option<&str>) -> Outcome {
    let (_, p) = load(file, sample)?;
    let mut o = Oracle::new(&p)?.with_guard(guard);
    let mut rows = Vec::new();
    for n in 1..=max {
        let consequences = o.consequence_dim(n)?;
        let free = o.free_dim(n)?;
        rows.push(OracleRow {
            arity: n,
            free,
            consequences,
            quotient: free - consequences,
        });
    }
    say!("arity  free  consequences  quotient");
    for r in &rows {
        say!("{:>5}  {:>4}  {:>12}  {:>8}", r.arity, r.free, r.consequences, r.quotient);
    }
    emit_json(json, &rows)
}

fn cmd_oracle_member(file: &Path, identity: &str, guard: usize, json: &Option<PathBuf>, sample: Option<&str>) -> Outcome {
    let text = read(file)?;
    let combined = format!("{text}\n{};\n", identity.trim().trim_end_matches(';'));
    let doc = parse_document(&combined).map_err(|e| Failure::Input(format!("element: {e}")))?;
    let mut full = match sample {
        Some(s) => doc.instantiate(&parse_sample(s)?)?,
        None => doc.presentation()?,
    };
    let element = full
        .identities
        .pop()
        .ok_or_else(|| Failure::Input("no element given".into()))?;
    let (_, p) = load(file, sample)?;
    let ml = multilinearize(&full.generators, &element)?;
    let Some(ml) = ml.into_iter().next() else {
        return Err(Failure::Input("the element vanishes identically".into()));
    };
    let mut o = Oracle::new(&p)?.with_guard(guard);
    let m: Membership = o.is_consequence(&ml)?;
    say!("{}", if m.member { "consequence" } else { "not a consequence" });
    for (c, d) in &m.witness {
        say!("  {c} * {d}");
    }
    emit_json(json, &m)
}

#[derive(Serialize)]
struct ScanRow {
    index: usize,
    sample: BTreeMap<String, String>,
    verdict: Option<String>,
    m1: Option<String>,
    m2: Option<String>,
    degenerate: bool,
    error: Option<String>,
}

fn generic_point(params: &[String]) -> Sample {
    params
        .iter()
        .enumerate()
        .map(|(i, p)| {
            let num = 7919 + 104_729 * i as i64;
            let den = 7907 + 13 * i as i64;
            (p.clone(), Coeff::new(num.into(), den.into()))
        })
        .collect()
}

fn leading_shapes(p: &Presentation) -> Option<Vec<String>> {
    let sp = present_shuffle(p).ok()?;
    let ord = OrderingSpec::preset_default("rgpl", &sp.signature).ok()?;
    let mut out: Vec<String> = sp
        .relations
        .iter()
        .filter_map(|r| r.leading_monomial(&ord))
        .map(|t| nsgb::shuffle_tree::format_tree(&sp.signature, t))
        .collect();
    out.sort();
    Some(out)
}

fn cmd_scan(c: &Common, conjecture_mode: bool) -> Outcome {
    let doc = load_document(&c.file)?;
    if doc.samples.is_empty() {
        return Err(Failure::Input(format!("{} declares no samples", c.file.display())));
    }
    let generic = doc.instantiate(&generic_point(&doc.params)).ok().and_then(|p| leading_shapes(&p));
    let rows: Vec<Result<ScanRow, Failure>> = doc
        .samples
        .par_iter()
        .enumerate()
        .map(|(index, s)| {
            let shown: BTreeMap<String, String> = s.iter().map(|(k, v)| (k.clone(), v.to_string())).collect();
            let p = match doc.instantiate(s) {
                Ok(p) => p,
                Err(e) => {
                    return Ok(ScanRow {
                        index,
                        sample: shown,
                        verdict: None,
                        m1: None,
                        m2: None,
                        degenerate: true,
                        error: Some(e.to_string()),
                    })
                }
            };
            let sp = present_shuffle(&p)?;
            let opts = check_options(c, &doc, &sp, conjecture_mode, None)?;
            let report = verdict(&p, c.max_arity, &opts)?;
            resource_check(&report)?;
            Ok(ScanRow {
                index,
                sample: shown,
                verdict: Some(report.verdict.label().into()),
                m1: Some(format!("{:?}", report.m1.status)),
                m2: report.m2.as_ref().map(|m| format!("{:?}", m.status)),
                degenerate: generic.is_some() && leading_shapes(&p) != generic,
                error: None,
            })
        })
        .collect();
    let rows = rows.into_iter().collect::<Result<Vec<_>, _>>()?;
    say!("sample | verdict | M1 | M2 | degenerate");
    for r in &rows {
        let point: Vec<String> = r.sample.iter().map(|(k, v)| format!("{k}={v}")).collect();
        say!(
            "{} | {} | {} | {} | {}",
            point.join(","),
            r.verdict.as_deref().or(r.error.as_deref()).unwrap_or("-"),
            r.m1.as_deref().unwrap_or("-"),
            r.m2.as_deref().unwrap_or("-"),
            if r.degenerate { "yes" } else { "no" }
        );
    }
    emit_json(&c.json, &rows)
}

fn cmd_print(file: &Path, sample: Option<&str>) -> Outcome {
    let (_, p) = load(file, sample)?;
    say_raw!("{}", nsgb::dsl::print_presentation(&p));
    Ok(())
}

impl Command {
    fn json_target(&self) -> Option<&PathBuf> {
        match self {
            Command::Gb(c)
            | Command::Dims { common: c, .. }
            | Command::CheckNs { common: c, .. }
            | Command::Reduce { common: c, .. }
            | Command::Scan { common: c, .. } => c.json.as_ref(),
            Command::Oracle { command } => match command {
                OracleCommand::Dims { json, .. } | OracleCommand::Member { json, .. } => json.as_ref(),
            },
            Command::Print { .. } => None,
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    JSON_ON_STDOUT.store(cli.command.json_target().is_some_and(|p| p.as_os_str() == "-"), Ordering::Relaxed);
    let result = match &cli.command {
        Command::Gb(c) => cmd_gb(c),
        Command::Dims { common, oracle } => cmd_dims(common, *oracle),
        Command::CheckNs {
            common,
            conjecture_mode,
            koszul_dims,
        } => cmd_check(common, *conjecture_mode, koszul_dims.as_deref()),
        Command::Reduce { common, polynomial } => cmd_reduce(common, polynomial),
        Command::Oracle { command } => match command {
            OracleCommand::Dims {
                file,
                max_arity,
                guard,
                json,
                sample,
            } => cmd_oracle_dims(file, *max_arity, *guard, json, sample.as_deref()),
            OracleCommand::Member {
                file,
                identity,
                guard,
                json,
                sample,
            } => cmd_oracle_member(file, identity, *guard, json, sample.as_deref()),
        },
        Command::Scan { common, conjecture_mode } => cmd_scan(common, *conjecture_mode),
        Command::Print { file, sample } => cmd_print(file, sample.as_deref()),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Input(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(2)
        }
        Err(Failure::Resource(msg)) => {
            eprintln!("resource limit: {msg}");
            ExitCode::from(3)
        }
    }
}
