use std::path::PathBuf;
use std::process::ExitCode;
use std::time::Instant;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand};
use eigenbound::driver::{
    preset_names, preset_text, read_csv, run_experiment_with, summarize, ExperimentConfig,
};

/// Finite element eigenvalue computations with guaranteed error bounds.
#[derive(Parser)]
#[command(name = "eigenbound", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run an experiment from a config file or a shipped preset.
    Run(RunArgs),
    /// List the shipped presets, or print one.
    Presets {
        /// print the config text of this preset
        name: Option<String>,
    },
    /// Summarize a results CSV.
    Summary { csv: PathBuf },
}

#[derive(Args)]
struct RunArgs {
    /// config file (`key = value` lines)
    #[arg(long, conflicts_with = "preset")]
    config: Option<PathBuf>,
    /// shipped preset name
    #[arg(long)]
    preset: Option<String>,
    /// unit_square, l_shape or a mesh file
    #[arg(long)]
    domain: Option<String>,
    #[arg(long)]
    fe_degree: Option<usize>,
    /// comma-separated, e.g. 0,1
    #[arg(long)]
    rt_degrees: Option<String>,
    /// uniform refinement with this many levels
    #[arg(long, conflicts_with = "adaptive")]
    levels: Option<usize>,
    /// estimator-driven adaptive refinement
    #[arg(long)]
    adaptive: bool,
    #[arg(long)]
    theta: Option<f64>,
    #[arg(long)]
    max_dofs: Option<usize>,
    #[arg(long)]
    loops: Option<usize>,
    #[arg(long)]
    eigs: Option<usize>,
    #[arg(long)]
    kappa: Option<f64>,
    /// lower bound of the eigenvalue after the guaranteed cluster
    #[arg(long)]
    lambda_next_lower: Option<f64>,
    /// output directory; results go to <out>/<name>
    #[arg(long)]
    out: Option<PathBuf>,
    /// write SVG plots (`--svg false` disables them)
    #[arg(long, num_args = 0..=1, default_missing_value = "true")]
    svg: Option<bool>,
    /// extra `key=value` overrides
    #[arg(long = "set", value_name = "KEY=VALUE")]
    set: Vec<String>,
    #[arg(short, long)]
    quiet: bool,
}

fn build_config(args: &RunArgs) -> Result<ExperimentConfig> {
    let mut cfg = match (&args.config, &args.preset) {
        (Some(path), _) => ExperimentConfig::load(path)?,
        (None, Some(name)) => ExperimentConfig::preset(name)?,
        (None, None) => bail!("either --config or --preset is required"),
    };
    let mut overrides: Vec<(String, String)> = Vec::new();
    let mut put = |k: &str, v: String| overrides.push((k.to_string(), v));
    if let Some(v) = &args.domain {
        put("domain", v.clone());
    }
    if let Some(v) = args.fe_degree {
        put("fe_degree", v.to_string());
    }
    if let Some(v) = &args.rt_degrees {
        put("rt_degrees", v.clone());
    }
    if let Some(v) = args.levels {
        put("refinement", "uniform".into());
        put("levels", v.to_string());
    }
    if args.adaptive {
        put("refinement", "adaptive".into());
    }
    if let Some(v) = args.theta {
        put("theta", v.to_string());
    }
    if let Some(v) = args.max_dofs {
        put("max_dofs", v.to_string());
    }
    if let Some(v) = args.loops {
        put("loops", v.to_string());
    }
    if let Some(v) = args.eigs {
        put("eigs", v.to_string());
    }
    if let Some(v) = args.kappa {
        put("kappa", v.to_string());
    }
    if let Some(v) = args.lambda_next_lower {
        put("lambda_next_lower", format!("{v:?}"));
    }
    if let Some(v) = &args.out {
        put("output_dir", v.display().to_string());
    }
    if let Some(v) = args.svg {
        put("svg", v.to_string());
    }
    for kv in &args.set {
        let (k, v) = kv
            .split_once('=')
            .with_context(|| format!("--set expects KEY=VALUE, got '{kv}'"))?;
        put(k.trim(), v.trim().to_string());
    }
    // lowering eigs must not trip the guaranteed_m <= eigs check
    if let Some(v) = args.eigs {
        if cfg.guaranteed_m > v {
            cfg.guaranteed_m = v;
        }
    }
    for (k, v) in overrides {
        cfg.set(&k, &v)
            .with_context(|| format!("override {k} = {v}"))?;
    }
    Ok(cfg)
}

fn run(args: RunArgs) -> Result<()> {
    let cfg = build_config(&args)?;
    let start = Instant::now();
    let quiet = args.quiet;
    let artifacts = run_experiment_with(&cfg, |ctx| {
        if !quiet {
            let r = &ctx.rows[0];
            eprintln!(
                "step {:>3}: {:>8} triangles {:>8} dofs  lambda_1,h = {:.12}  eta = {:.4e}  [{:.1} s]",
                ctx.step,
                r.n_elements,
                r.n_dofs,
                ctx.pairs[0].value,
                r.eta,
                start.elapsed().as_secs_f64()
            );
        }
        Ok(())
    })
    .context("experiment failed")?;
    for w in &artifacts.outcome.warnings {
        eprintln!("warning: {w}");
    }
    println!("results: {}", artifacts.csv.display());
    for s in &artifacts.svgs {
        println!("plot:    {}", s.display());
    }
    if !quiet && !artifacts.outcome.rows.is_empty() {
        print!("{}", summarize(&artifacts.outcome.rows));
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Run(args) => run(args),
        Command::Presets { name: None } => {
            for n in preset_names() {
                println!("{n}");
            }
            Ok(())
        }
        Command::Presets { name: Some(n) } => {
            preset_text(&n).map(|t| print!("{t}")).map_err(Into::into)
        }
        Command::Summary { csv } => read_csv(&csv)
            .map(|rows| print!("{}", summarize(&rows)))
            .map_err(Into::into),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}
