use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use matterwave::cli::{self, Outcome};
use matterwave::Error;

/// Gaussian matter-wave propagation, partial coherence and slit-diffraction analysis.
#[derive(Debug, Parser)]
#[command(name = "matterwave", version)]
struct Args {
    #[command(subcommand)]
    command: Command,

    /// Flat `key = value` config file.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Output directory.
    #[arg(long, global = true, default_value = "out")]
    out: PathBuf,
    /// Transverse momentum spread delta_kx (1/m).
    #[arg(long, global = true)]
    dkx: Option<f64>,
    /// Time of flight (s).
    #[arg(long, global = true)]
    t: Option<f64>,
    /// Initial packet width b (m).
    #[arg(long, global = true)]
    b: Option<f64>,
    /// Longitudinal velocity (m/s).
    #[arg(long, global = true)]
    vz: Option<f64>,
    /// Detector resolution FWHM (m).
    #[arg(long, global = true)]
    detector_fwhm: Option<f64>,
    /// b = factor x slit width.
    #[arg(long, global = true)]
    slit_factor: Option<f64>,
    #[arg(long, global = true, value_parser = ["gaussian", "tophat"])]
    kernel: Option<String>,
    #[arg(long, global = true, value_parser = ["sigma", "sqrt2-sigma"])]
    theta_convention: Option<String>,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Pure-state width, curvature, Gouy phase and covariance over time.
    Propagate,
    /// Width, sigma_xp and Gouy phase versus slit width, as CSV and SVG.
    Curves,
    /// Fit delta_kx to a measured dataset.
    Fit { dataset: PathBuf },
    /// Compare closed forms against grid propagation.
    OracleVerify,
    /// Print physical constants and derived scales.
    Constants,
    /// Write a synthetic dataset generated from the model.
    Synth {
        #[arg(default_value = "synthetic.csv")]
        output: PathBuf,
    },
}

fn overrides(args: &Args) -> Vec<(&'static str, String)> {
    let mut o = Vec::new();
    let mut num = |key, v: Option<f64>| {
        if let Some(v) = v {
            o.push((key, format!("{v:e}")));
        }
    };
    num("coherence.delta_kx", args.dkx);
    num("experiment.t_s", args.t);
    num("packet.b", args.b);
    num("particle.v_z", args.vz);
    num("detector.fwhm_m", args.detector_fwhm);
    num("experiment.slit_factor", args.slit_factor);
    if let Some(k) = &args.kernel {
        o.push(("detector.kernel", k.clone()));
    }
    if let Some(c) = &args.theta_convention {
        o.push(("output.theta_convention", c.clone()));
    }
    o
}

fn run(args: &Args) -> Result<Outcome, Error> {
    let cfg = cli::load_config(args.config.as_deref(), &overrides(args))?;
    match &args.command {
        Command::Propagate => cli::cmd_propagate(&cfg, &args.out),
        Command::Curves => cli::cmd_curves(&cfg, &args.out),
        Command::Fit { dataset } => cli::cmd_fit(&cfg, dataset, &args.out),
        Command::OracleVerify => cli::cmd_oracle_verify(&cfg, &args.out),
        Command::Constants => Ok(Outcome {
            files: Vec::new(),
            summary: cli::cmd_constants(&cfg)?,
            exit_code: 0,
        }),
        Command::Synth { output } => cli::cmd_synth(&cfg, output),
    }
}

fn main() -> ExitCode {
    let args = Args::parse();
    match run(&args) {
        Ok(outcome) => {
            println!("{}", outcome.summary.trim_end());
            for f in &outcome.files {
                println!("wrote {}", f.display());
            }
            ExitCode::from(outcome.exit_code as u8)
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
