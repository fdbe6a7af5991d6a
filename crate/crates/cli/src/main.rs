use std::fs::File;
use std::io::BufWriter;
use std::path::{Path, PathBuf};
use std::time::Instant;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};
use surveil_core::experiment::{
    run_sweep, write_rows, write_summary, write_traces, ExperimentConfig, Method,
};

/// Monte Carlo experiments for proactive eavesdropping through an active
/// reconfigurable surface.
#[derive(Parser)]
#[command(name = "surveil", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run the sweep described by a JSON config file.
    Run {
        #[arg(long)]
        config: PathBuf,
        #[command(flatten)]
        out: OutputArgs,
    },
    /// Run one of the built-in figure sweeps.
    Sweep {
        #[arg(long, value_enum)]
        figure: Figure,
        #[arg(long, default_value_t = 100)]
        realizations: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[command(flatten)]
        out: OutputArgs,
    },
}

#[derive(Args)]
struct OutputArgs {
    /// Per-realization CSV.
    #[arg(long)]
    out: PathBuf,
    /// Summary CSV (default: `<out>` with a `_summary` suffix).
    #[arg(long)]
    summary: Option<PathBuf>,
    /// Comma-separated subset of active-sca, active-elementwise, passive.
    #[arg(long, value_delimiter = ',')]
    methods: Option<Vec<String>>,
    /// Also write SCA round traces (`<out>` with a `_trace` suffix).
    #[arg(long)]
    verbose: bool,
}

#[derive(Clone, Copy, ValueEnum)]
enum Figure {
    Fig3,
    Fig4,
}

fn sibling(path: &Path, suffix: &str) -> PathBuf {
    let stem = path.file_stem().and_then(|s| s.to_str()).unwrap_or("results");
    path.with_file_name(format!("{stem}_{suffix}.csv"))
}

fn create(path: &Path) -> Result<BufWriter<File>> {
    let f = File::create(path).with_context(|| format!("creating {}", path.display()))?;
    Ok(BufWriter::new(f))
}

fn execute(mut cfg: ExperimentConfig, out: &OutputArgs) -> Result<()> {
    if let Some(names) = &out.methods {
        cfg.methods = names
            .iter()
            .map(|n| n.trim().parse::<Method>())
            .collect::<surveil_core::Result<_>>()?;
    }
    if cfg.methods.is_empty() {
        bail!("no methods selected");
    }
    let started = Instant::now();
    let res = run_sweep(&cfg)?;
    write_rows(create(&out.out)?, res.rows())?;
    let summary_path = out.summary.clone().unwrap_or_else(|| sibling(&out.out, "summary"));
    write_summary(create(&summary_path)?, &res.summary)?;
    eprintln!(
        "{} rows -> {}, summary -> {} ({:.1} s)",
        res.runs.len(),
        out.out.display(),
        summary_path.display(),
        started.elapsed().as_secs_f64()
    );
    if out.verbose {
        let trace_path = sibling(&out.out, "trace");
        write_traces(create(&trace_path)?, &res.runs)?;
        eprintln!("traces -> {}", trace_path.display());
    }
    Ok(())
}

fn main() -> Result<()> {
    let cli = Cli::parse();
    match cli.command {
        Command::Run { config, out } => {
            let text = std::fs::read_to_string(&config)
                .with_context(|| format!("reading {}", config.display()))?;
            let cfg = ExperimentConfig::from_json(&text)
                .with_context(|| format!("parsing {}", config.display()))?;
            execute(cfg, &out)
        }
        Command::Sweep {
            figure,
            realizations,
            seed,
            out,
        } => {
            let cfg = match figure {
                Figure::Fig3 => ExperimentConfig::fig3(realizations, seed),
                Figure::Fig4 => ExperimentConfig::fig4(realizations, seed),
            };
            cfg.validate()?;
            execute(cfg, &out)
        }
    }
}
