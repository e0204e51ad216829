//! `leggett` command-line tool. Angles are taken in degrees; every command
//! prints JSON (full precision), a text table or CSV (six significant digits).

mod config;

use std::fs::File;
use std::io::{self, BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use leggett::expsim::sig6;
use leggett::{
    analyze_counts, bound, bound_normalized, canonical_layout, cosine_sum_min, k_factor,
    optimal_angle, quantum_s, read_counts_csv, relaxed_max_s, run_experiment, write_counts_csv,
    write_landscape, Criterion, Error, ExperimentConfig, MeasurementLayout, PolarizationState,
    RunReport, SearchParams,
};
use serde::Serialize;
use serde_json::{json, Value};

use config::RunConfigFile;

#[derive(Parser, Debug)]
#[command(
    name = "leggett",
    version,
    about = "Leggett-type inequalities for N settings per plane"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Quantum value of S for a Werner state against the hidden-variable bound.
    Predict {
        #[command(flatten)]
        ineq: IneqArgs,
        #[arg(long, default_value_t = 1.0)]
        visibility: f64,
        #[command(flatten)]
        out: OutArgs,
    },
    /// Hidden-variable bound and its ingredients.
    Bound {
        #[command(flatten)]
        ineq: IneqArgs,
        #[command(flatten)]
        out: OutArgs,
    },
    /// Angle that maximizes the violation, and the visibility it needs.
    Optimize {
        #[arg(long, default_value_t = 2)]
        n: usize,
        #[arg(long, value_enum, default_value_t = CriterionArg::Ratio)]
        criterion: CriterionArg,
        #[command(flatten)]
        out: OutArgs,
    },
    /// Monte Carlo run of the full measurement campaign.
    Simulate(SimulateArgs),
    /// Adversarial search for the largest hidden-variable value of S. With
    /// `--format csv` the coarse-grid landscape is written instead.
    Adversary {
        #[command(flatten)]
        ineq: IneqArgs,
        /// Points per sphere; grid^2 subensembles are scanned.
        #[arg(long, default_value_t = SearchParams::default().grid)]
        grid: usize,
        /// Local refinement iterations per seed.
        #[arg(long, default_value_t = SearchParams::default().refine)]
        refine: usize,
        #[command(flatten)]
        out: OutArgs,
    },
    /// Minimum of the cosine sum against cot(pi / 2N).
    Lemma {
        #[arg(long, default_value_t = 2)]
        n: usize,
        #[command(flatten)]
        out: OutArgs,
    },
    /// Estimates correlations and S from a counts CSV.
    Analyze {
        /// CSV with header `pair_id,n_pp,n_pm,n_mp,n_mm`.
        #[arg(long)]
        counts: PathBuf,
        /// Layout JSON as written by `simulate --layout-out`; otherwise the
        /// canonical layout for `--n` / `--phi-deg` is used.
        #[arg(long, conflicts_with_all = ["n", "phi_deg", "criterion"])]
        layout: Option<PathBuf>,
        #[command(flatten)]
        ineq: IneqArgs,
        #[command(flatten)]
        out: OutArgs,
    },
}

#[derive(Args, Debug, Clone)]
struct IneqArgs {
    #[arg(long, default_value_t = 2)]
    n: usize,
    /// Relative angle in degrees; defaults to the optimum for `--criterion`.
    #[arg(long, allow_negative_numbers = true)]
    phi_deg: Option<f64>,
    #[arg(long, value_enum, default_value_t = CriterionArg::Ratio)]
    criterion: CriterionArg,
}

#[derive(Args, Debug, Clone)]
struct OutArgs {
    #[arg(long, value_enum, default_value_t = Format::Json)]
    format: Format,
    /// Also write the JSON result to this file.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args, Debug)]
struct SimulateArgs {
    /// Run description in JSON; flags override its keys.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    n: Option<usize>,
    #[arg(long, allow_negative_numbers = true)]
    phi_deg: Option<f64>,
    #[arg(long, value_enum)]
    criterion: Option<CriterionArg>,
    /// Werner-state visibility; replaces the configured state.
    #[arg(long)]
    visibility: Option<f64>,
    /// Coincidences per measured pair.
    #[arg(long)]
    counts: Option<u64>,
    #[arg(long, allow_negative_numbers = true)]
    jitter_deg: Option<f64>,
    #[arg(long)]
    seed: Option<u64>,
    /// Write the measurement layout as JSON, for later `analyze --layout`.
    #[arg(long)]
    layout_out: Option<PathBuf>,
    #[command(flatten)]
    out: OutArgs,
}

#[derive(ValueEnum, Clone, Copy, Debug, PartialEq, Eq)]
enum CriterionArg {
    Ratio,
    Difference,
}

impl From<CriterionArg> for Criterion {
    fn from(c: CriterionArg) -> Self {
        match c {
            CriterionArg::Ratio => Criterion::Ratio,
            CriterionArg::Difference => Criterion::Difference,
        }
    }
}

#[derive(ValueEnum, Clone, Copy, Debug, PartialEq, Eq)]
enum Format {
    Json,
    Table,
    Csv,
}

fn resolve_phi(n: usize, phi_deg: Option<f64>, criterion: Criterion) -> leggett::Result<f64> {
    match phi_deg {
        Some(d) if (0.0..=180.0).contains(&d) => Ok(d.to_radians()),
        Some(d) => Err(Error::Input(format!("phi_deg = {d} is outside [0, 180]"))),
        None => Ok(optimal_angle::<f64>(n, criterion)?.phi_star),
    }
}

impl IneqArgs {
    fn phi(&self) -> leggett::Result<f64> {
        resolve_phi(self.n, self.phi_deg, self.criterion.into())
    }
}

fn write_json_file<T: Serialize>(path: &Path, value: &T) -> leggett::Result<()> {
    let mut w = BufWriter::new(File::create(path)?);
    serde_json::to_writer_pretty(&mut w, value)?;
    writeln!(w)?;
    w.flush()?;
    Ok(())
}

fn print_json<T: Serialize>(value: &T) -> leggett::Result<()> {
    let mut out = io::stdout().lock();
    serde_json::to_writer_pretty(&mut out, value)?;
    writeln!(out)?;
    Ok(())
}

fn cell(v: &Value) -> String {
    match v {
        Value::Number(n) if n.is_f64() => sig6(n.as_f64().unwrap_or(f64::NAN)),
        Value::String(s) => s.clone(),
        Value::Array(items) => items.iter().map(cell).collect::<Vec<_>>().join(" "),
        Value::Object(m) => m
            .iter()
            .map(|(k, v)| format!("{k}=({})", cell(v)))
            .collect::<Vec<_>>()
            .join(" "),
        other => other.to_string(),
    }
}

/// Emits a flat key/value record in the requested format.
fn emit_record(value: Value, out: &OutArgs) -> leggett::Result<()> {
    if let Some(path) = &out.out {
        write_json_file(path, &value)?;
    }
    let Value::Object(record) = &value else {
        unreachable!("records are built from json objects")
    };
    match out.format {
        Format::Json => print_json(&value)?,
        Format::Table => {
            let width = record.keys().map(String::len).max().unwrap_or(0);
            let mut w = io::stdout().lock();
            for (k, v) in record {
                writeln!(w, "{k:<width$}  {}", cell(v))?;
            }
        }
        Format::Csv => {
            let mut w = csv::Writer::from_writer(io::stdout().lock());
            w.write_record(record.keys())?;
            w.write_record(record.values().map(cell))?;
            w.flush()?;
        }
    }
    Ok(())
}

fn emit_report(
    report: &RunReport,
    layout: &MeasurementLayout,
    state: Option<&PolarizationState>,
    out: &OutArgs,
) -> leggett::Result<()> {
    if let Some(path) = &out.out {
        write_json_file(path, report)?;
    }
    match out.format {
        Format::Json => print_json(report)?,
        Format::Table => print!("{}", report.to_table(layout, state)),
        Format::Csv => write_counts_csv(report, io::stdout().lock())?,
    }
    Ok(())
}

fn cmd_predict(ineq: &IneqArgs, visibility: f64, out: &OutArgs) -> leggett::Result<()> {
    let phi = ineq.phi()?;
    let s = quantum_s(ineq.n, phi, visibility)?;
    let b = bound(ineq.n, phi)?;
    emit_record(
        json!({
            "n": ineq.n,
            "phi_deg": phi.to_degrees(),
            "visibility": visibility,
            "S_quantum": s,
            "bound": b,
            "margin": s - b,
        }),
        out,
    )
}

fn cmd_bound(ineq: &IneqArgs, out: &OutArgs) -> leggett::Result<()> {
    let phi = ineq.phi()?;
    emit_record(
        json!({
            "n": ineq.n,
            "phi_deg": phi.to_degrees(),
            "k_factor": k_factor::<f64>(ineq.n)?,
            "bound": bound(ineq.n, phi)?,
            "bound_normalized": bound_normalized(ineq.n, phi)?,
        }),
        out,
    )
}

fn cmd_optimize(n: usize, criterion: Criterion, out: &OutArgs) -> leggett::Result<()> {
    let opt = optimal_angle::<f64>(n, criterion)?;
    emit_record(
        json!({
            "n": n,
            "criterion": criterion,
            "phi_star_deg": opt.phi_star.to_degrees(),
            "v_crit": opt.v_crit,
            "bound_at_star": opt.bound_at_star,
            "S_at_star": opt.s_at_star,
        }),
        out,
    )
}

fn cmd_simulate(args: &SimulateArgs) -> leggett::Result<()> {
    let file = match &args.config {
        Some(path) => RunConfigFile::load(path)?,
        None => RunConfigFile::default(),
    };
    let n = args.n.or(file.n).unwrap_or(2);
    let criterion = args
        .criterion
        .map(Criterion::from)
        .or(file.criterion)
        .unwrap_or_default();
    let phi = resolve_phi(n, args.phi_deg.or(file.phi_deg), criterion)?;
    let state = match args.visibility {
        Some(v) => PolarizationState::werner(v)?,
        None => file.state()?,
    };
    let config = ExperimentConfig {
        state,
        layout: canonical_layout(n, phi)?,
        counts_per_pair: args.counts.unwrap_or(file.counts_per_pair()),
        jitter_deg: args.jitter_deg.unwrap_or(file.jitter_deg()),
        seed: args.seed.unwrap_or(file.seed()),
    };
    let report = run_experiment(&config)?;
    if let Some(path) = &args.layout_out {
        write_json_file(path, &config.layout)?;
    }
    emit_report(&report, &config.layout, Some(&config.state), &args.out)
}

fn cmd_adversary(
    ineq: &IneqArgs,
    grid: usize,
    refine: usize,
    out: &OutArgs,
) -> leggett::Result<()> {
    let layout = canonical_layout(ineq.n, ineq.phi()?)?;
    if out.format == Format::Csv {
        return write_landscape(&layout, grid, BufWriter::new(io::stdout().lock()));
    }
    let params = SearchParams {
        grid,
        refine,
        ..SearchParams::default()
    };
    let r = relaxed_max_s(&layout, &params)?;
    emit_record(
        json!({
            "n": ineq.n,
            "phi_deg": layout.phi().to_degrees(),
            "relaxed_max_S": r.relaxed_max_s,
            "grid_max_S": r.grid_max_s,
            "bound": r.bound,
            "gap": r.gap,
            "argmax": r.argmax,
            "evaluated": r.evaluated,
        }),
        out,
    )
}

fn cmd_lemma(n: usize, out: &OutArgs) -> leggett::Result<()> {
    let m = cosine_sum_min::<f64>(n)?;
    let k = k_factor::<f64>(n)?;
    emit_record(
        json!({
            "n": n,
            "cosine_sum_min": m,
            "k_factor": k,
            "abs_diff": (m - k).abs(),
        }),
        out,
    )
}

fn cmd_analyze(
    counts: &Path,
    layout_path: Option<&Path>,
    ineq: &IneqArgs,
    out: &OutArgs,
) -> leggett::Result<()> {
    let layout: MeasurementLayout = match layout_path {
        Some(p) => {
            let text = std::fs::read_to_string(p)?;
            serde_json::from_str(&text)?
        }
        None => canonical_layout(ineq.n, ineq.phi()?)?,
    };
    let rows = read_counts_csv(BufReader::new(File::open(counts)?))?;
    let report = analyze_counts(&rows, &layout)?;
    emit_report(&report, &layout, None, out)
}

fn run(cli: &Cli) -> leggett::Result<()> {
    match &cli.command {
        Command::Predict {
            ineq,
            visibility,
            out,
        } => cmd_predict(ineq, *visibility, out),
        Command::Bound { ineq, out } => cmd_bound(ineq, out),
        Command::Optimize { n, criterion, out } => cmd_optimize(*n, (*criterion).into(), out),
        Command::Simulate(args) => cmd_simulate(args),
        Command::Adversary {
            ineq,
            grid,
            refine,
            out,
        } => cmd_adversary(ineq, *grid, *refine, out),
        Command::Lemma { n, out } => cmd_lemma(*n, out),
        Command::Analyze {
            counts,
            layout,
            ineq,
            out,
        } => cmd_analyze(counts, layout.as_deref(), ineq, out),
    }
}

fn exit_code(err: &Error) -> u8 {
    if err.is_schema() {
        3
    } else {
        2
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("leggett: {e}");
            ExitCode::from(exit_code(&e))
        }
    }
}
