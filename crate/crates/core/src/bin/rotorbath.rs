use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use rotorbath::runner::{error_record, exit_code, parse_config_text, run, sweep, Experiment, RunConfig};
use rotorbath::Result;

/// Quantum Brownian rotation experiments.
#[derive(Parser)]
#[command(name = "rotorbath", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Thermalization of an up/down superposition of a linear rotor.
    Fig2(Flags),
    /// Decoherence and relaxation of a two-blob planar-rotor state.
    Fig3(Flags),
    /// Stationary state of the linear rotor.
    StationaryLinear(Flags),
    /// Stationary state of the planar rotor.
    StationaryPlanar(Flags),
    /// Classical linear-rotor ensemble.
    ClassicalLinear(Flags),
    /// Dissipator residual of the thermal state over temperatures.
    GibbsScaling(Flags),
    /// Tensors and classical ensemble of a rotor given by a particle file.
    Custom(Flags),
    /// Repeat an experiment over values of one parameter.
    Sweep(SweepArgs),
}

#[derive(Args, Clone, Default)]
struct Flags {
    /// Configuration file of `key = value` lines; flags override it.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    out: Option<String>,
    #[arg(long, allow_hyphen_values = true)]
    xi: Option<String>,
    #[arg(long, allow_hyphen_values = true)]
    gamma: Option<String>,
    #[arg(long, allow_hyphen_values = true)]
    sigma: Option<String>,
    #[arg(long, allow_hyphen_values = true)]
    m0: Option<String>,
    #[arg(long)]
    lmax: Option<String>,
    #[arg(long)]
    mmax: Option<String>,
    #[arg(long)]
    t_final: Option<String>,
    #[arg(long)]
    dt_output: Option<String>,
    /// Comma-separated output times.
    #[arg(long)]
    times: Option<String>,
    #[arg(long)]
    n_alpha: Option<String>,
    /// `full` or `high_T`.
    #[arg(long)]
    variant: Option<String>,
    /// `true` for the full generator, `false` for the high-temperature form.
    #[arg(long = "include-1overT-terms")]
    include_1over_t_terms: Option<String>,
    #[arg(long)]
    inversion_symmetric: bool,
    #[arg(long)]
    seed: Option<String>,
    #[arg(long)]
    trajectories: Option<String>,
    #[arg(long)]
    dt: Option<String>,
    /// Comma-separated temperatures.
    #[arg(long)]
    xi_list: Option<String>,
    #[arg(long)]
    geometry: Option<String>,
    #[arg(long)]
    kt: Option<String>,
    #[arg(long)]
    rtol: Option<String>,
    #[arg(long)]
    atol: Option<String>,
}

#[derive(Args)]
struct SweepArgs {
    /// Experiment to repeat.
    experiment: String,
    /// Configuration key to vary.
    #[arg(long)]
    param: String,
    /// Comma-separated values.
    #[arg(long, allow_hyphen_values = true)]
    values: String,
    /// Runs executed at the same time.
    #[arg(long, default_value_t = 1)]
    jobs: usize,
    #[command(flatten)]
    flags: Flags,
}

impl Flags {
    fn pairs(&self) -> Result<Vec<(String, String)>> {
        let mut pairs = match &self.config {
            Some(p) => parse_config_text(&std::fs::read_to_string(p)?)?,
            None => Vec::new(),
        };
        let flags = [
            ("out", &self.out),
            ("xi", &self.xi),
            ("gamma", &self.gamma),
            ("sigma", &self.sigma),
            ("m0", &self.m0),
            ("l_max", &self.lmax),
            ("m_max", &self.mmax),
            ("t_final", &self.t_final),
            ("dt_output", &self.dt_output),
            ("times", &self.times),
            ("n_alpha", &self.n_alpha),
            ("variant", &self.variant),
            ("include_1overT_terms", &self.include_1over_t_terms),
            ("seed", &self.seed),
            ("trajectories", &self.trajectories),
            ("dt", &self.dt),
            ("xi_list", &self.xi_list),
            ("geometry", &self.geometry),
            ("kt", &self.kt),
            ("rtol", &self.rtol),
            ("atol", &self.atol),
        ];
        pairs.extend(flags.into_iter().filter_map(|(k, v)| v.clone().map(|v| (k.to_string(), v))));
        if self.inversion_symmetric {
            pairs.push(("inversion_symmetric".into(), "true".into()));
        }
        Ok(pairs)
    }
}

fn execute(cli: Cli) -> Result<serde_json::Value> {
    let (experiment, flags) = match cli.command {
        Command::Fig2(f) => (Experiment::Fig2, f),
        Command::Fig3(f) => (Experiment::Fig3, f),
        Command::StationaryLinear(f) => (Experiment::StationaryLinear, f),
        Command::StationaryPlanar(f) => (Experiment::StationaryPlanar, f),
        Command::ClassicalLinear(f) => (Experiment::ClassicalLinear, f),
        Command::GibbsScaling(f) => (Experiment::GibbsScaling, f),
        Command::Custom(f) => (Experiment::Custom, f),
        Command::Sweep(s) => {
            let experiment: Experiment = s.experiment.parse()?;
            let values: Vec<String> = s.values.split(',').map(str::trim).filter(|v| !v.is_empty()).map(String::from).collect();
            let summary = sweep(&s.flags.pairs()?, experiment, &s.param, &values, s.jobs)?;
            return Ok(serde_json::to_value(summary)?);
        }
    };
    let config = RunConfig::from_pairs(Some(experiment), &flags.pairs()?)?;
    Ok(serde_json::to_value(run(&config)?)?)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match execute(cli) {
        Ok(summary) => {
            if let Some(w) = summary.get("warnings").and_then(|w| w.as_array()) {
                for line in w {
                    eprintln!("warning: {}", line.as_str().unwrap_or_default());
                }
            }
            println!("{}", serde_json::to_string_pretty(&summary).unwrap_or_default());
            ExitCode::SUCCESS
        }
        Err(e) => {
            let record = error_record(&e);
            eprintln!("{record}");
            ExitCode::from(exit_code(&e) as u8)
        }
    }
}

