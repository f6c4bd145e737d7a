use std::path::{Path, PathBuf};
use std::process::ExitCode;

use cartoon_scatter::frames::bessel_bound;
use cartoon_scatter::harness::{
    self, build_network, exit_code, ExperimentConfig, ExperimentKind, Report,
};
use cartoon_scatter::network::extract_features;
use cartoon_scatter::signal::io::{read_pgm, read_signal};
use cartoon_scatter::{Error, Execution, Signal};
use clap::{Args, Parser, Subcommand};

/// Deformation-stability experiments for convolutional feature extractors
/// on cartoon functions.
#[derive(Parser)]
#[command(name = "cscatter", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
    /// Evaluate ladder rungs and feature paths on one thread.
    #[arg(long, global = true)]
    sequential: bool,
}

#[derive(Args, Clone, Default)]
struct Common {
    /// Experiment config (TOML).
    #[arg(long)]
    config: Option<PathBuf>,
    /// Output directory for results.csv and plot.svg.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Replaces every seed in the config.
    #[arg(long)]
    seed: Option<u64>,
    /// Halve the grid spacing this many times.
    #[arg(long, default_value_t = 0)]
    grid_refine: u32,
}

#[derive(Subcommand)]
enum Command {
    /// Run the experiment named in a config.
    Run(Common),
    /// Input deformation errors along the ladder of a config.
    Deform(Common),
    /// Indicator translations (default config built in).
    Sharpness {
        #[command(flatten)]
        common: Common,
        /// Use the concentrated-indicator family instead.
        #[arg(long)]
        counterexample: bool,
    },
    /// Smooth decaying inputs (default config built in).
    Smooth(Common),
    /// Growing bandwidth at fixed displacement (default config built in).
    Bandlimited(Common),
    /// Extract features of one signal and list their norms.
    Extract {
        #[command(flatten)]
        common: Common,
        /// Signal file (.scs binary or .pgm image); defaults to the config's source.
        #[arg(long)]
        input: Option<PathBuf>,
    },
    /// Bessel bounds and admissibility of every module.
    Bessel(Common),
}

fn load(
    common: &Common,
    default: Option<fn() -> ExperimentConfig>,
) -> Result<ExperimentConfig, Error> {
    let mut cfg = match (&common.config, default) {
        (Some(path), _) => ExperimentConfig::load(path)?,
        (None, Some(make)) => make(),
        (None, None) => return Err(Error::Config("--config is required".into())),
    };
    if let Some(seed) = common.seed {
        cfg = cfg.with_seed(seed);
    }
    if common.grid_refine > 0 {
        cfg = cfg.with_grid_refinement(common.grid_refine);
    }
    Ok(cfg)
}

fn out_dir(common: &Common, cfg: &ExperimentConfig) -> PathBuf {
    common
        .out
        .clone()
        .or_else(|| cfg.output_dir.clone())
        .unwrap_or_else(|| PathBuf::from("out"))
}

fn run(common: &Common, cfg: &ExperimentConfig, exec: Execution) -> Result<Report, Error> {
    let dir = out_dir(common, cfg);
    let report = harness::run_to_dir(cfg, &dir, exec)?;
    print!("{}", report.summary());
    if let Some(fit) = report.fit() {
        println!(
            "fit: alpha = {:.6}, log-constant = {:.6}, residual = {:.3e}",
            fit.alpha, fit.log_constant, fit.residual
        );
    }
    println!("wrote {}", dir.display());
    Ok(report)
}

fn read_input(path: &Path) -> Result<Signal, Error> {
    match path.extension().and_then(|e| e.to_str()) {
        Some("pgm") => read_pgm(path),
        _ => read_signal(path),
    }
}

fn execute(cli: &Cli) -> Result<bool, Error> {
    let exec = if cli.sequential {
        Execution::Sequential
    } else {
        Execution::Parallel
    };
    match &cli.command {
        Command::Run(c) => {
            let cfg = load(c, None)?;
            Ok(run(c, &cfg, exec)?.passed())
        }
        Command::Deform(c) => {
            let mut cfg = load(c, None)?;
            cfg.experiment = ExperimentKind::Deformation;
            Ok(run(c, &cfg, exec)?.passed())
        }
        Command::Sharpness {
            common,
            counterexample,
        } => {
            let default = if *counterexample {
                ExperimentConfig::default_counterexample
            } else {
                ExperimentConfig::default_sharpness
            };
            let cfg = load(common, Some(default))?;
            Ok(run(common, &cfg, exec)?.passed())
        }
        Command::Smooth(c) => {
            let cfg = load(c, Some(ExperimentConfig::default_smooth))?;
            Ok(run(c, &cfg, exec)?.passed())
        }
        Command::Bandlimited(c) => {
            let cfg = load(c, Some(ExperimentConfig::default_bandlimited))?;
            Ok(run(c, &cfg, exec)?.passed())
        }
        Command::Extract { common, input } => {
            let cfg = load(common, None)?;
            let signal = match input {
                Some(p) => read_input(p)?,
                None => harness::source_signal(&cfg)?,
            };
            let seq = build_network(cfg.network.as_ref(), signal.grid())?;
            seq.check_admissible()?;
            let features = extract_features(&seq, &signal, exec)?;
            let mut csv = String::from("layer,path,norm\n");
            for (layer, feature) in features.iter() {
                csv.push_str(&format!(
                    "{layer},{},{:.17e}\n",
                    feature.path,
                    feature.signal.l2_norm()
                ));
            }
            let dir = out_dir(common, &cfg);
            std::fs::create_dir_all(&dir)
                .map_err(|e| Error::Config(format!("{}: {e}", dir.display())))?;
            let path = dir.join("features.csv");
            std::fs::write(&path, csv)
                .map_err(|e| Error::Config(format!("{}: {e}", path.display())))?;
            println!(
                "{} features, |||Phi(f)||| = {:.6e}, |f| = {:.6e}",
                features.len(),
                features.norm(),
                signal.l2_norm()
            );
            println!("wrote {}", path.display());
            Ok(true)
        }
        Command::Bessel(c) => {
            let cfg = load(c, None)?;
            let grid = cfg.grid.build()?;
            let seq = build_network(cfg.network.as_ref(), &grid)?;
            println!("module,atoms,bessel_bound,lipschitz,admissibility");
            let mut ok = true;
            for (n, m) in seq.modules().iter().enumerate() {
                let v = m.admissibility_value();
                ok &= v <= 1.0 + cartoon_scatter::network::ADMISSIBILITY_SLACK;
                println!(
                    "{n},{},{:.17e},{},{:.17e}",
                    m.bank().atoms().len() + 1,
                    bessel_bound(m.bank()),
                    m.nonlinearity().lipschitz(),
                    v
                );
            }
            if let Err(e) = seq.check_admissible() {
                eprintln!("error: {e}");
            }
            Ok(ok)
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match execute(&cli) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => {
            eprintln!("assertion failed");
            ExitCode::from(1)
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(exit_code(&e) as u8)
        }
    }
}
