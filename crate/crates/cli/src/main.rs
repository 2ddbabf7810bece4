use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use serde_json::{json, Value};

use digitshift::analyze::{
    analyze_missing_digits, analyze_naturals, analyze_sft, chain_direct, AnalysisReport, Coset, LimitTable, Verdict,
    SCHEMA_VERSION,
};
use digitshift::dimension::{empirical_dimension, mass_dimension, progression_dimension, DimensionEstimate};
use digitshift::numeral::{GAdditiveFamily, GAdditiveFunction, ModulusVector, ResidueVector};
use digitshift::oracle::{self, Bound, CensusTable, DEFAULT_TOLERANCE};
use digitshift::shift::{build_cover, fischer_cover, ShiftKind, ShiftSpec};
use digitshift::Error;

#[derive(Parser)]
#[command(
    name = "digitshift",
    version,
    about = "Residue distribution and dimension of digit-restricted integer sets"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
    /// Worker threads for the oracle (default: available parallelism).
    #[arg(long, global = true)]
    threads: Option<usize>,
    /// Write the JSON document to this path.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Write the census table as CSV to this path.
    #[arg(long, global = true)]
    csv: Option<PathBuf>,
    /// Print words most-significant digit first.
    #[arg(long, global = true)]
    msb: bool,
    /// Print JSON on stdout instead of text.
    #[arg(long, global = true)]
    json: bool,
}

#[derive(Args)]
struct Target {
    /// Shift spec file (JSON).
    #[arg(long)]
    shift: PathBuf,
    /// Modulus a of n.
    #[arg(long = "mod")]
    modulus: Option<u64>,
    /// Modulus a' of the digit sum.
    #[arg(long)]
    summod: Option<u64>,
    /// g-additive function: a JSON file, or `id:A` / `sum_digits:A`. Repeatable.
    #[arg(long = "fn")]
    functions: Vec<String>,
}

#[derive(Subcommand)]
enum Command {
    /// Print the Fischer cover.
    Cover {
        /// Shift spec file (JSON).
        #[arg(long)]
        shift: PathBuf,
    },
    /// Predict the limit distribution of residues.
    Analyze(Target),
    /// Check the prediction against the enumeration oracle.
    Verify {
        #[command(flatten)]
        target: Target,
        /// Census horizon: count elements below g^mmax.
        #[arg(long, default_value_t = 8)]
        mmax: usize,
        /// Largest total-variation distance that passes.
        #[arg(long, default_value_t = DEFAULT_TOLERANCE)]
        tol: f64,
    },
    /// Mass dimension of the set, or of its intersection with a progression.
    Dimension {
        /// Shift spec file (JSON).
        #[arg(long)]
        shift: PathBuf,
        /// Intersect with the progression aN + b.
        #[arg(long, num_args = 2, value_names = ["A", "B"])]
        progression: Option<Vec<u64>>,
        /// Largest m for the counts over [0, g^m).
        #[arg(long, default_value_t = 12)]
        mmax: usize,
    },
    /// Residue counts over A ∩ [0, g^m).
    OracleCensus {
        #[command(flatten)]
        target: Target,
        /// Census horizon: count elements below g^mmax.
        #[arg(long, default_value_t = 6)]
        mmax: usize,
    },
}

/// Outcome classes with stable exit codes.
enum Failure {
    Verify(String),
    Unsupported(String),
    Malformed(String),
}

impl Failure {
    fn code(&self) -> u8 {
        match self {
            Failure::Verify(_) => 1,
            Failure::Unsupported(_) => 2,
            Failure::Malformed(_) => 3,
        }
    }

    fn message(&self) -> &str {
        match self {
            Failure::Verify(m) | Failure::Unsupported(m) | Failure::Malformed(m) => m,
        }
    }
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        match e {
            Error::InvalidSpec(_) | Error::Json(_) | Error::Io(_) | Error::Domain(_) => {
                Failure::Malformed(e.to_string())
            }
            _ => Failure::Unsupported(e.to_string()),
        }
    }
}

type CliResult<T> = std::result::Result<T, Failure>;

struct Output<'a> {
    cli: &'a Cli,
}

impl Output<'_> {
    fn emit(&self, text: &str, doc: &Value) -> CliResult<()> {
        let pretty = serde_json::to_string_pretty(doc).expect("json renders");
        if self.cli.json {
            println!("{pretty}");
        } else {
            print!("{text}");
        }
        if let Some(path) = &self.cli.out {
            write_file(path, &(pretty + "\n"))?;
        }
        Ok(())
    }

    fn csv(&self, table: &CensusTable) -> CliResult<()> {
        match &self.cli.csv {
            Some(path) => write_file(path, &table.to_csv()),
            None => Ok(()),
        }
    }
}

fn write_file(path: &Path, text: &str) -> CliResult<()> {
    fs::write(path, text).map_err(|e| Failure::Malformed(format!("cannot write {}: {e}", path.display())))
}

fn load_spec(path: &Path) -> CliResult<ShiftSpec> {
    let text =
        fs::read_to_string(path).map_err(|e| Failure::Malformed(format!("cannot read {}: {e}", path.display())))?;
    Ok(ShiftSpec::from_json(&text)?)
}

fn load_function(arg: &str, base: u32) -> CliResult<GAdditiveFunction> {
    if let Some((name, m)) = arg.split_once(':') {
        if name == "id" || name == "sum_digits" {
            let m: u64 = m
                .parse()
                .map_err(|_| Failure::Malformed(format!("bad modulus in {arg:?}")))?;
            return Ok(GAdditiveFunction::builtin(name, base, m)?);
        }
    }
    let text = fs::read_to_string(arg).map_err(|e| Failure::Malformed(format!("cannot read {arg}: {e}")))?;
    let f = GAdditiveFunction::from_json(&text)?;
    if f.base() != base {
        return Err(Failure::Malformed(format!(
            "function {arg} has base {}, shift has base {base}",
            f.base()
        )));
    }
    Ok(f)
}

/// What to analyze: `(id mod a, S_g mod a')`, or an explicit family.
enum Plan {
    Pair { a: u64, a_sum: Option<u64> },
    Family(GAdditiveFamily),
}

impl Target {
    fn resolve(&self) -> CliResult<(ShiftSpec, Plan)> {
        let spec = load_spec(&self.shift)?;
        if !self.functions.is_empty() {
            if self.modulus.is_some() || self.summod.is_some() {
                return Err(Failure::Malformed("--fn excludes --mod and --summod".into()));
            }
            let fs = self
                .functions
                .iter()
                .map(|f| load_function(f, spec.base))
                .collect::<CliResult<Vec<_>>>()?;
            return Ok((spec, Plan::Family(GAdditiveFamily::new(fs)?)));
        }
        let a = self
            .modulus
            .ok_or_else(|| Failure::Malformed("--mod or --fn is required".into()))?;
        if a == 0 || self.summod == Some(0) {
            return Err(Failure::Malformed("moduli must be >= 1".into()));
        }
        Ok((spec, Plan::Pair { a, a_sum: self.summod }))
    }
}

/// Report and the family whose residues its table describes.
fn analyze(spec: &ShiftSpec, plan: &Plan) -> CliResult<(AnalysisReport, GAdditiveFamily)> {
    let g = spec.base;
    let (a, a_sum) = match plan {
        Plan::Family(fam) => return Ok((chain_direct(spec, fam)?, fam.clone())),
        Plan::Pair { a, a_sum } => (*a, *a_sum),
    };
    let s = a_sum.unwrap_or(1);
    let pair = GAdditiveFamily::id_sum(g, a, s)?;
    let mut report = match &spec.kind {
        ShiftKind::Full { digits } if digits.len() == g as usize => analyze_naturals(g, a, s)?,
        ShiftKind::Full { digits } => {
            let r = analyze_missing_digits(g, digits, a, s)?;
            if r.verdict == Verdict::Unsupported {
                let mut direct = chain_direct(spec, &pair)?;
                direct.notes.insert(
                    0,
                    format!("missing-digit criterion not applicable: {}", r.notes.join("; ")),
                );
                direct
            } else {
                r
            }
        }
        ShiftKind::Sft1 { .. } => analyze_sft(spec, a, s)?,
        _ => chain_direct(spec, &pair)?,
    };
    if a_sum.is_some() {
        return Ok((report, pair));
    }
    drop_digit_sum(&mut report, a)?;
    Ok((report, GAdditiveFamily::identity(g, a)?))
}

/// Rewrites a report over `(a, 1)` as a report over `a` alone.
fn drop_digit_sum(report: &mut AnalysisReport, a: u64) -> CliResult<()> {
    let moduli = ModulusVector::new(vec![a])?;
    let strip = |t: &LimitTable| LimitTable::new(moduli.clone(), t.cells().to_vec());
    report.table = report.table.as_ref().map(strip);
    report.per_i = report.per_i.iter().map(|(i, t)| (*i, strip(t))).collect();
    report.cosets = report
        .cosets
        .iter()
        .map(|c| Coset {
            i: c.i,
            representative: ResidueVector(vec![c.representative.0[0]]),
        })
        .collect();
    report.inputs.moduli = vec![a];
    report.inputs.functions = vec!["id".into()];
    Ok(())
}

fn report_text(report: &AnalysisReport, msb: bool) -> String {
    let mut s = String::new();
    report.render(&mut s, msb).expect("string write");
    s
}

fn cmd_cover(out: &Output, path: &Path) -> CliResult<()> {
    let spec = load_spec(path)?;
    let cover = build_cover(&spec)?;
    let fc = match fischer_cover(&cover) {
        Ok(fc) => fc,
        Err(Error::NotTransitive(parts)) => {
            let mut text = format!("not transitive: {} strongly connected components\n", parts.len());
            for (i, p) in parts.iter().enumerate() {
                let _ = write!(text, "component {i}: {p}");
            }
            let doc = json!({
                "schema": SCHEMA_VERSION,
                "transitive": false,
                "components": parts.iter().map(|p| p.names().to_vec()).collect::<Vec<_>>(),
            });
            out.emit(&text, &doc)?;
            return Err(Failure::Unsupported("shift is not transitive".into()));
        }
        Err(e) => return Err(e.into()),
    };
    let n = fc.node_count();
    let k = fc.k().map_or("irregular".to_string(), |k| format!("k={k}"));
    let kind = if fc.is_mixing() { "mixing" } else { "transitive" };
    let text = format!("{n} node{}, {k}, {kind}\n{}", if n == 1 { "" } else { "s" }, fc.cover());
    let c = fc.cover();
    let doc = json!({
        "schema": SCHEMA_VERSION,
        "nodes": c.names(),
        "edges": c.edges().iter().map(|e| json!({ "from": c.names()[e.from], "to": c.names()[e.to], "label": e.label })).collect::<Vec<_>>(),
        "k": fc.k(),
        "transitive": true,
        "mixing": fc.is_mixing(),
        "origin": fc.origin(),
    });
    out.emit(&text, &doc)
}

fn cmd_analyze(out: &Output, target: &Target) -> CliResult<()> {
    let (spec, plan) = target.resolve()?;
    let (report, _) = analyze(&spec, &plan)?;
    out.emit(&report_text(&report, out.cli.msb), &report.to_json())?;
    if report.verdict == Verdict::Unsupported {
        return Err(Failure::Unsupported(report.notes.join("; ")));
    }
    Ok(())
}

fn cmd_verify(out: &Output, target: &Target, mmax: usize, tol: f64) -> CliResult<()> {
    if !(tol > 0.0 && tol < 1.0) {
        return Err(Failure::Malformed("--tol must lie in (0, 1)".into()));
    }
    let (spec, plan) = target.resolve()?;
    let (report, family) = analyze(&spec, &plan)?;
    if report.table.is_none() {
        out.emit(&report_text(&report, out.cli.msb), &report.to_json())?;
        return Err(Failure::Unsupported(format!(
            "verdict {} has no limit table to verify",
            report.verdict
        )));
    }
    let table = oracle::census(&spec, &family, Bound::Power(mmax))?;
    let cmp = oracle::compare(&report, &table, tol)?;
    out.csv(&table)?;
    let mut text = report_text(&report, out.cli.msb);
    let _ = writeln!(
        text,
        "oracle: m={mmax} elements={} tv={:.6} max_cell_error={:.6} tolerance={tol} -> {}",
        table.total,
        cmp.tv_distance,
        cmp.max_cell_error,
        if cmp.pass { "pass" } else { "FAIL" }
    );
    if !cmp.oscillating.is_empty() {
        let _ = writeln!(text, "oscillating cells (not scored): {:?}", cmp.oscillating);
    }
    let doc = json!({
        "schema": SCHEMA_VERSION,
        "report": report.to_json(),
        "census": table.to_json(),
        "comparison": cmp,
        "mmax": mmax,
    });
    out.emit(&text, &doc)?;
    if cmp.pass {
        Ok(())
    } else {
        Err(Failure::Verify(format!(
            "tv {:.6} exceeds tolerance {tol}",
            cmp.tv_distance
        )))
    }
}

fn dimension_text(est: &DimensionEstimate, msb: bool) -> String {
    let mut s = String::new();
    if let Some(e) = &est.exact {
        let _ = writeln!(s, "exact: {:.6} (log {:.12} / log {})", e.value(), e.eigenvalue, e.base);
    }
    if let Some(e) = &est.empirical {
        let _ = writeln!(
            s,
            "empirical fit: {:.6} (last-third slopes in [{:.6}, {:.6}])",
            e.fit, e.lower, e.upper
        );
        for &(m, slope) in &e.slopes {
            let _ = writeln!(s, "  m={m:<3} slope={slope:.6}");
        }
        if e.empty {
            let _ = writeln!(s, "empty at the horizon");
        }
    }
    if let Some(t) = &est.transversality {
        let _ = write!(s, "transversality: {}", t.verdict.as_str());
        if let Some(w) = &t.witness {
            let shown = if msb { w.to_msb_string() } else { w.to_lsb_string() };
            let _ = write!(s, " witness({})={shown}", if msb { "msb" } else { "lsb" });
        }
        if let Some(set) = &t.finite_set {
            let _ = write!(s, " elements={set:?}");
        }
        let _ = writeln!(s);
    }
    for n in &est.notes {
        let _ = writeln!(s, "note: {n}");
    }
    s
}

fn cmd_dimension(out: &Output, path: &Path, progression: Option<&[u64]>, mmax: usize) -> CliResult<()> {
    let spec = load_spec(path)?;
    let est = match progression {
        None => mass_dimension(&spec, mmax)?,
        Some(&[a, b]) => {
            if a == 0 {
                return Err(Failure::Malformed("progression modulus must be >= 1".into()));
            }
            match progression_dimension(&spec, a, b, mmax) {
                Ok(est) => est,
                Err(Error::NotTransitive(_)) => {
                    let mut est = empirical_dimension(&spec, a, b, mmax)?;
                    est.notes
                        .push("shift is not transitive sofic: empirical estimate only".into());
                    est
                }
                Err(e) => return Err(e.into()),
            }
        }
        Some(_) => return Err(Failure::Malformed("--progression takes A and B".into())),
    };
    out.emit(&dimension_text(&est, out.cli.msb), &est.to_json())
}

fn cmd_census(out: &Output, target: &Target, mmax: usize) -> CliResult<()> {
    let (spec, plan) = target.resolve()?;
    let family = match plan {
        Plan::Family(f) => f,
        Plan::Pair { a, a_sum: Some(s) } => GAdditiveFamily::id_sum(spec.base, a, s)?,
        Plan::Pair { a, a_sum: None } => GAdditiveFamily::identity(spec.base, a)?,
    };
    let table = oracle::census(&spec, &family, Bound::Power(mmax))?;
    out.csv(&table)?;
    let mut text = format!("A ∩ [0, {}^{mmax}): {} elements\n", spec.base, table.total);
    let _ = writeln!(text, "{:<16} {:>12} {:>10}", "residue", "count", "frequency");
    let freqs = table.frequencies_f64();
    for (idx, &c) in table.counts.iter().enumerate() {
        let _ = writeln!(
            text,
            "{:<16} {:>12} {:>10.6}",
            table.moduli.residue_at(idx).to_string(),
            c,
            freqs[idx]
        );
    }
    out.emit(&text, &table.to_json())
}

fn run(cli: &Cli) -> CliResult<()> {
    if let Some(k) = cli.threads {
        rayon::ThreadPoolBuilder::new()
            .num_threads(k)
            .build_global()
            .map_err(|e| Failure::Malformed(format!("thread pool: {e}")))?;
    }
    let out = Output { cli };
    match &cli.command {
        Command::Cover { shift } => cmd_cover(&out, shift),
        Command::Analyze(t) => cmd_analyze(&out, t),
        Command::Verify { target, mmax, tol } => cmd_verify(&out, target, *mmax, *tol),
        Command::Dimension {
            shift,
            progression,
            mmax,
        } => cmd_dimension(&out, shift, progression.as_deref(), *mmax),
        Command::OracleCensus { target, mmax } => cmd_census(&out, target, *mmax),
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 3 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match run(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            eprintln!("digitshift: {}", f.message());
            ExitCode::from(f.code())
        }
    }
}
