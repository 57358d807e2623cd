use std::fmt::Write as _;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use stocon::input::{load_log, load_net};
use stocon::plot::{read_series, render_svg};
use stocon::sweep::{portion_grid, run_sweep, SweepSpec};
use stocon::{read_file, write_file, CliError, Result};
use stocon_core::batch::{align_log, format_number};
use stocon_core::cost::{CostProfile, ProfileKind};
use stocon_core::log::serialize_log;
use stocon_core::oracle::brute_force_alignment;
use stocon_core::perturb::{generate_experiment_log, Mode, PerturbConfig, SplitMode};
use stocon_core::search::{SearchOptions, DEFAULT_NODE_CAP};
use stocon_core::xes::import_xes;

#[derive(Parser)]
#[command(name = "stocon", version, about = "Alignment-based conformance checking for stochastically known event logs")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Align every trace of a log against a net and write per-trace results.
    Align(AlignArgs),
    /// Turn a deterministic log into a seeded stochastic experiment log.
    Perturb(PerturbArgs),
    /// Run a parameter sweep and write the figure CSVs.
    Sweep(SweepArgs),
    /// Compare the search against brute-force realization enumeration.
    Oracle(OracleArgs),
    /// Render a figure CSV as an SVG line chart.
    Plot(PlotArgs),
    /// Convert an XES log into the JSON log format.
    ImportXes(ImportXesArgs),
}

#[derive(Args)]
struct ModelArgs {
    #[arg(long)]
    net: PathBuf,
    /// Final marking for PNML nets without one, e.g. `sink` or `p1,p2:2`.
    #[arg(long)]
    final_marking: Option<String>,
}

#[derive(Args)]
struct ProfileArgs {
    #[arg(long, default_value = "stochastic")]
    profile: ProfileKind,
    /// Cost of model moves on silent transitions.
    #[arg(long, default_value_t = 0.0)]
    tau_cost: f64,
}

impl ProfileArgs {
    fn profile(&self) -> CostProfile {
        CostProfile {
            tau_model_move_cost: self.tau_cost,
            ..CostProfile::new(self.profile)
        }
    }
}

#[derive(Args)]
struct AlignArgs {
    #[command(flatten)]
    model: ModelArgs,
    #[arg(long)]
    log: PathBuf,
    #[command(flatten)]
    profile: ProfileArgs,
    /// A* with the trace-suffix heuristic instead of Dijkstra.
    #[arg(long)]
    heuristic: bool,
    #[arg(long, default_value_t = DEFAULT_NODE_CAP)]
    node_cap: usize,
    #[arg(long)]
    out: PathBuf,
    /// Also dump every alignment, one move per line.
    #[arg(long)]
    detail: Option<PathBuf>,
}

#[derive(Args)]
struct PerturbArgs {
    #[arg(long)]
    log: PathBuf,
    #[arg(long)]
    nt: usize,
    #[arg(long)]
    pf: f64,
    #[arg(long)]
    tp: f64,
    #[arg(long, default_value = "none")]
    mode: Mode,
    #[arg(long, default_value_t = 0.3)]
    fraction: f64,
    #[arg(long, default_value = "simplex")]
    split: SplitMode,
    #[arg(long)]
    seed: u64,
    /// Output log; the provenance sidecar goes next to it as `*.provenance.json`.
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args)]
struct SweepArgs {
    #[command(flatten)]
    model: ModelArgs,
    /// Deterministic input log.
    #[arg(long)]
    log: PathBuf,
    #[arg(long, value_delimiter = ',', default_value = "0.55,0.75,0.95")]
    pf: Vec<f64>,
    #[arg(long, default_value_t = 0.05)]
    tp_step: f64,
    #[arg(long, value_delimiter = ',', default_value = "2,3,4")]
    nt: Vec<usize>,
    #[arg(long, value_delimiter = ',', default_value = "none,relabel,swap,duplicate,all")]
    modes: Vec<Mode>,
    #[arg(long, value_delimiter = ',', default_value = "stochastic,lower-bound")]
    profiles: Vec<ProfileKind>,
    #[arg(long, default_value_t = 0.3)]
    fraction: f64,
    #[arg(long, default_value = "simplex")]
    split: SplitMode,
    /// Seeds `seed, seed+1, ...` whose costs are pooled per row.
    #[arg(long, default_value_t = 1)]
    repetitions: usize,
    /// Lower edges of the trace-length groups.
    #[arg(long, value_delimiter = ',', default_value = "0,10,30,50")]
    length_edges: Vec<usize>,
    #[arg(long)]
    heuristic: bool,
    #[arg(long, default_value_t = DEFAULT_NODE_CAP)]
    node_cap: usize,
    #[arg(long)]
    seed: u64,
    #[arg(long)]
    out_dir: PathBuf,
}

#[derive(Args)]
struct OracleArgs {
    #[command(flatten)]
    model: ModelArgs,
    #[arg(long)]
    log: PathBuf,
    #[command(flatten)]
    profile: ProfileArgs,
    /// Maximum realizations per trace.
    #[arg(long, default_value_t = 256)]
    cap: usize,
}

#[derive(Args)]
struct PlotArgs {
    #[arg(long)]
    csv: PathBuf,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args)]
struct ImportXesArgs {
    #[arg(long)]
    xes: PathBuf,
    #[arg(long)]
    out: PathBuf,
}

const TOLERANCE: f64 = 1e-9;

fn partial(ok: bool) -> ExitCode {
    if ok {
        ExitCode::SUCCESS
    } else {
        ExitCode::from(2)
    }
}

fn cmd_align(args: AlignArgs) -> Result<ExitCode> {
    let model = load_net(&args.model.net, args.model.final_marking.as_deref())?;
    let log = load_log(&args.log)?;
    let options = SearchOptions {
        heuristic: args.heuristic,
        node_cap: args.node_cap,
    };
    let batch = align_log(&model, &log, &args.profile.profile(), &options, 0)?;
    write_file(&args.out, batch.csv().as_bytes())?;
    if let Some(path) = &args.detail {
        let mut dump = String::new();
        for t in &batch.traces {
            if let Ok(r) = &t.result {
                let _ = writeln!(dump, "# {} cost={}", t.case_id, format_number(r.alignment.total_cost));
                dump.push_str(&r.alignment.detail());
            }
        }
        write_file(path, dump.as_bytes())?;
    }
    let failures = batch.failures();
    for (case, e) in &failures {
        eprintln!("case {case}: {e}");
    }
    match batch.mean_cost() {
        Some(mean) => println!(
            "aligned {} of {} traces, mean cost {}",
            log.traces.len() - failures.len(),
            log.traces.len(),
            format_number(mean)
        ),
        None => println!("aligned 0 of {} traces", log.traces.len()),
    }
    Ok(partial(failures.is_empty()))
}

fn sidecar_path(out: &Path) -> PathBuf {
    out.with_extension("provenance.json")
}

fn cmd_perturb(args: PerturbArgs) -> Result<ExitCode> {
    let log = load_log(&args.log)?;
    let config = PerturbConfig {
        n_parallel: args.nt,
        original_prob: args.pf,
        uncertain_portion: args.tp,
        mode: args.mode,
        mode_fraction: args.fraction,
        seed: args.seed,
        split: args.split,
    };
    let generated = generate_experiment_log(&log, &config)?;
    write_file(&args.out, &serialize_log(&generated.log))?;
    write_file(&sidecar_path(&args.out), &generated.provenance.to_json())?;
    Ok(ExitCode::SUCCESS)
}

fn cmd_sweep(args: SweepArgs) -> Result<ExitCode> {
    let model = load_net(&args.model.net, args.model.final_marking.as_deref())?;
    let log = load_log(&args.log)?;
    let spec = SweepSpec {
        original_probs: args.pf,
        uncertain_portions: portion_grid(args.tp_step)?,
        n_parallel: args.nt,
        modes: args.modes,
        profiles: args.profiles,
        seed: args.seed,
        repetitions: args.repetitions,
        mode_fraction: args.fraction,
        split: args.split,
        length_edges: args.length_edges,
        search: SearchOptions {
            heuristic: args.heuristic,
            node_cap: args.node_cap,
        },
    };
    let report = run_sweep(&model, &log, &spec)?;
    report.write(&args.out_dir)?;
    for c in &report.checks {
        println!("{} {}: {}", if c.passed { "PASS" } else { "FAIL" }, c.check, c.detail);
    }
    if !report.errors.is_empty() {
        eprintln!(
            "{} failures recorded in {}",
            report.errors.len(),
            args.out_dir.join("errors.csv").display()
        );
    }
    Ok(partial(report.errors.is_empty() && report.all_checks_passed()))
}

fn cmd_oracle(args: OracleArgs) -> Result<ExitCode> {
    let model = load_net(&args.model.net, args.model.final_marking.as_deref())?;
    let log = load_log(&args.log)?;
    let profile = args.profile.profile();
    let batch = align_log(&model, &log, &profile, &SearchOptions::default(), 0)?;
    println!("case_id\tsearch\toracle\tstatus");
    let mut agree = 0;
    for (trace, outcome) in log.traces.iter().zip(&batch.traces) {
        let search = outcome.result.as_ref().map(|r| r.alignment.total_cost);
        let oracle = brute_force_alignment(&model, trace, &profile, args.cap).map(|a| a.total_cost);
        let show = |r: &std::result::Result<f64, &stocon_core::Error>| match r {
            Ok(c) => format_number(*c),
            Err(e) => format!("error ({e})"),
        };
        let ok = match (&search, &oracle) {
            (Ok(s), Ok(o)) => (s - o).abs() <= TOLERANCE,
            (Err(stocon_core::Error::NoAlignment { .. }), Err(stocon_core::Error::NoAlignment { .. })) => true,
            _ => false,
        };
        agree += usize::from(ok);
        println!(
            "{}\t{}\t{}\t{}",
            trace.case_id,
            show(&search),
            show(&oracle.as_ref().map(|c| *c)),
            if ok { "PASS" } else { "FAIL" }
        );
    }
    let all = agree == log.traces.len();
    println!(
        "{}: {agree}/{} traces agree within {TOLERANCE:e}",
        if all { "PASS" } else { "FAIL" },
        log.traces.len()
    );
    Ok(partial(all))
}

fn cmd_plot(args: PlotArgs) -> Result<ExitCode> {
    let series = read_series(&read_file(&args.csv)?)?;
    if series.is_empty() {
        return Err(CliError::Usage(format!("{}: no plottable rows", args.csv.display())));
    }
    let title = args
        .csv
        .file_stem()
        .map_or_else(String::new, |s| s.to_string_lossy().into_owned());
    let x_label = match title.as_str() {
        "fig4" => "P_f",
        "fig5" => "T_p",
        "fig6" => "length group",
        _ => "x",
    };
    write_file(&args.out, render_svg(&title, x_label, &series).as_bytes())?;
    Ok(ExitCode::SUCCESS)
}

fn cmd_import_xes(args: ImportXesArgs) -> Result<ExitCode> {
    let import = import_xes(&read_file(&args.xes)?)?;
    if import.skipped_events > 0 {
        eprintln!("warning: skipped {} events without concept:name", import.skipped_events);
    }
    write_file(&args.out, &serialize_log(&import.log))?;
    println!("{} traces", import.log.traces.len());
    Ok(ExitCode::SUCCESS)
}

fn configure_threads() -> Result<()> {
    let Ok(value) = std::env::var("STOCON_THREADS") else {
        return Ok(());
    };
    let n: usize = value
        .trim()
        .parse()
        .map_err(|_| CliError::Usage(format!("STOCON_THREADS={value:?} is not a thread count")))?;
    if n > 0 {
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .map_err(|e| CliError::Usage(format!("thread pool: {e}")))?;
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let run = || -> Result<ExitCode> {
        configure_threads()?;
        match cli.command {
            Command::Align(a) => cmd_align(a),
            Command::Perturb(a) => cmd_perturb(a),
            Command::Sweep(a) => cmd_sweep(a),
            Command::Oracle(a) => cmd_oracle(a),
            Command::Plot(a) => cmd_plot(a),
            Command::ImportXes(a) => cmd_import_xes(a),
        }
    };
    match run() {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(1)
        }
    }
}
