use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use choquard::analysis::{
    bubble_params, default_window, make_bubble, morse_spectrum, scaling_report, shell_csv,
    shell_profile, MorseOptions,
};
use choquard::io::{read_field, write_field, write_json, write_run, Manifest, RunConfig};
use choquard::params::Thresholds;
use choquard::solvers::Termination;
use choquard::trial::{gaussian, gaussian_mixture};
use choquard::{
    certify, classify_regime, CertifyOptions, Choquard, ConvolutionMode, Error, Grid, Normalization,
    ProblemParams, SolveReport, Spectral,
};
use clap::{Args, Parser, Subcommand, ValueEnum};
use rayon::prelude::*;

#[derive(Parser)]
#[command(name = "choquard", version, about = "Ground states and certificates for the fractional Choquard equation")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run a solver from a config file and write field, report and certificate.
    Solve {
        #[arg(long)]
        config: PathBuf,
        /// Overrides `out` from the config.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Certify a stored field.
    Certify {
        #[arg(long)]
        field: PathBuf,
        #[command(flatten)]
        model: ModelArgs,
        /// Certify at this frequency.
        #[arg(long, conflicts_with = "rho")]
        omega: Option<f64>,
        /// Certify as a mass-constrained critical point.
        #[arg(long)]
        rho: Option<f64>,
        /// Hessian eigenvalues to compute; 0 skips.
        #[arg(long, default_value_t = 0)]
        morse_k: usize,
        /// Fit the decay exponent on the default window and write shells.csv.
        #[arg(long)]
        decay: bool,
        /// Write certificate.json here instead of printing it.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Sample an explicit zero-mass bubble and report its residual.
    Bubble {
        #[arg(long)]
        dim: usize,
        #[arg(long)]
        s: f64,
        #[arg(long, default_value_t = 1.0)]
        t: f64,
        #[arg(long)]
        n: usize,
        #[arg(long = "L")]
        half_width: f64,
        /// Amplitude; calibrated when absent.
        #[arg(long)]
        c: Option<f64>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Scaling identities on a trial field.
    ScalingTest {
        #[command(flatten)]
        model: ModelArgs,
        #[arg(long)]
        dim: usize,
        #[arg(long, default_value_t = 1.0)]
        omega: f64,
        #[arg(long)]
        n: usize,
        #[arg(long = "L")]
        half_width: f64,
        #[arg(long, value_enum, default_value_t = Trial::Gaussian)]
        trial: Trial,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
    /// Lowest Hessian eigenvalues around a stored field.
    Spectrum {
        #[arg(long)]
        field: PathBuf,
        #[command(flatten)]
        model: ModelArgs,
        #[arg(long)]
        lambda: f64,
        #[arg(long, default_value_t = 8)]
        k: usize,
    },
    /// Solve over a list of `p` or `omega` values in parallel.
    Sweep {
        #[arg(long)]
        config: PathBuf,
        #[arg(long, value_enum)]
        param: SweepParam,
        #[arg(long, value_delimiter = ',', required = true)]
        values: Vec<f64>,
        #[arg(long)]
        out: PathBuf,
    },
    /// Thresholds and regime of each `p`.
    Regime {
        #[arg(long)]
        dim: usize,
        #[arg(long)]
        s: f64,
        #[arg(long)]
        alpha: f64,
        #[arg(long, value_delimiter = ',')]
        p: Vec<f64>,
    },
}

#[derive(Args)]
struct ModelArgs {
    #[arg(long)]
    s: f64,
    #[arg(long)]
    alpha: f64,
    #[arg(long)]
    p: f64,
    #[arg(long, value_enum, default_value_t = Mode::Free)]
    mode: Mode,
}

#[derive(Clone, Copy, ValueEnum)]
enum Mode {
    Free,
    Periodic,
}

impl From<Mode> for ConvolutionMode {
    fn from(m: Mode) -> Self {
        match m {
            Mode::Free => ConvolutionMode::FreeSpacePadded,
            Mode::Periodic => ConvolutionMode::PeriodicMultiplier,
        }
    }
}

#[derive(Clone, Copy, ValueEnum)]
enum Trial {
    Gaussian,
    Mixture,
}

#[derive(Clone, Copy, PartialEq, ValueEnum)]
enum SweepParam {
    P,
    Omega,
}

/// Failures sorted by exit code.
enum Failure {
    Validation(String),
    NoConvergence(String),
    Io(String),
}

impl Failure {
    fn code(&self) -> u8 {
        match self {
            Failure::Validation(_) => 2,
            Failure::NoConvergence(_) => 3,
            Failure::Io(_) => 4,
        }
    }
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        match e {
            Error::Io(_) | Error::Format(_) => Failure::Io(e.to_string()),
            e if e.is_validation() => Failure::Validation(e.to_string()),
            e => Failure::NoConvergence(e.to_string()),
        }
    }
}

impl From<std::io::Error> for Failure {
    fn from(e: std::io::Error) -> Self {
        Failure::Io(e.to_string())
    }
}

type Outcome = Result<(), Failure>;

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            let (Failure::Validation(m) | Failure::NoConvergence(m) | Failure::Io(m)) = &f;
            eprintln!("error: {m}");
            ExitCode::from(f.code())
        }
    }
}

fn command_line() -> Vec<String> {
    std::env::args().collect()
}

fn run(command: Command) -> Outcome {
    match command {
        Command::Solve { config, out } => solve(&config, out),
        Command::Certify { field, model, omega, rho, morse_k, decay, out } => {
            certify_field(&field, &model, omega, rho, morse_k, decay, out)
        }
        Command::Bubble { dim, s, t, n, half_width, c, out } => bubble(dim, s, t, n, half_width, c, out),
        Command::ScalingTest { model, dim, omega, n, half_width, trial, seed } => {
            let params = ProblemParams::new(dim, model.s, model.alpha, model.p, omega)?;
            let grid = Grid::new(dim, n, half_width)?;
            let u = match trial {
                Trial::Gaussian => gaussian::<f64>(grid),
                Trial::Mixture => gaussian_mixture::<f64>(grid, seed),
            };
            let spectral = Spectral::<f64>::new(grid);
            let values = Choquard::new(&spectral, params).with_mode(model.mode.into()).suite(&u)?;
            let report = scaling_report(&values, &params)?;
            print_json(&serde_json::json!({ "functionals": values, "scaling": report }))
        }
        Command::Spectrum { field, model, lambda, k } => {
            let u = read_field(&field)?;
            let params = model_params(&model, u.grid().dim(), lambda.max(0.0))?;
            let spectral = Spectral::<f64>::new(*u.grid());
            let choquard = Choquard::new(&spectral, params).with_mode(model.mode.into());
            let data = morse_spectrum(&choquard, &u, lambda, &MorseOptions { k, ..Default::default() })?;
            print_json(&data)
        }
        Command::Sweep { config, param, values, out } => sweep(&config, param, &values, &out),
        Command::Regime { dim, s, alpha, p } => regime_table(dim, s, alpha, &p),
    }
}

fn model_params(model: &ModelArgs, dim: usize, omega: f64) -> Result<ProblemParams, Failure> {
    Ok(ProblemParams::new(dim, model.s, model.alpha, model.p, omega)?)
}

fn print_json<V: serde::Serialize>(value: &V) -> Outcome {
    let text = serde_json::to_string_pretty(value).map_err(|e| Failure::Io(e.to_string()))?;
    println!("{text}");
    Ok(())
}

fn regime_message(params: &ProblemParams) -> String {
    match classify_regime(params) {
        Ok(r) => format!(
            "p = {} lies in regime {:?} (p_low = {}, p_mass = {}, p_high = {})",
            params.p, r.tag, r.thresholds.p_low, r.thresholds.p_mass, r.thresholds.p_high
        ),
        Err(e) => e.to_string(),
    }
}

/// One CSV row per run; shared by `solve` and `sweep`.
const SUMMARY_HEADER: &str =
    "p,omega,solver,termination,iterations,lambda,rho,e_omega,nehari_res,pohozaev_res,gradient_res";

fn summary_row(cfg: &RunConfig, outcome: &Result<SolveReport<f64>, Error>) -> String {
    let head = format!("{:?},{:?},{:?}", cfg.params.p, cfg.params.omega, cfg.solver);
    match outcome {
        Ok(r) => {
            let tail = match &r.certificate {
                Some(c) => format!(
                    "{:e},{:e},{:e},{:e}",
                    c.functionals.e_omega, c.functionals.nehari_res, c.functionals.pohozaev_res, c.gradient_res
                ),
                None => ",,,".into(),
            };
            format!("{head},{:?},{},{:e},{:e},{tail}", r.termination, r.iterations, r.lambda, r.rho)
        }
        Err(Error::RegimeUnsupported(_)) => format!("{head},{:?},0,,,,,,", Termination::RegimeUnsupported),
        Err(_) => format!("{head},Error,0,,,,,,"),
    }
}

fn solve(config: &Path, out: Option<PathBuf>) -> Outcome {
    let mut cfg = RunConfig::from_file(config)?;
    if out.is_some() {
        cfg.out = out;
    }
    let dir = cfg
        .out
        .clone()
        .ok_or_else(|| Failure::Validation("no output directory: set `out` or pass --out".into()))?;
    fs::create_dir_all(&dir)?;
    Manifest::new(command_line(), Some(&cfg)).write(&dir)?;
    let outcome = cfg.execute();
    fs::write(dir.join("summary.csv"), format!("{SUMMARY_HEADER}\n{}\n", summary_row(&cfg, &outcome)))?;
    let report = match outcome {
        Err(Error::RegimeUnsupported(tag)) => {
            return Err(Failure::Validation(format!(
                "regime {tag:?} is not supported by the {:?} solver: {}",
                cfg.solver,
                regime_message(&cfg.params)
            )))
        }
        other => other?,
    };
    write_run(&dir, &report)?;
    eprintln!(
        "{:?} after {} iterations, residual {:e}",
        report.termination,
        report.iterations,
        report.final_residual()
    );
    if !report.converged() {
        return Err(Failure::NoConvergence(format!(
            "{:?}: {}",
            report.termination,
            report.message.as_deref().unwrap_or("tolerance not reached")
        )));
    }
    Ok(())
}

fn certify_field(
    field: &Path,
    model: &ModelArgs,
    omega: Option<f64>,
    rho: Option<f64>,
    morse_k: usize,
    decay: bool,
    out: Option<PathBuf>,
) -> Outcome {
    let u = read_field(field)?;
    let grid = *u.grid();
    let (normalization, omega) = match (omega, rho) {
        (Some(w), None) => (Normalization::Frequency(w), w),
        (None, Some(r)) => (Normalization::Mass(r), 0.0),
        _ => return Err(Failure::Validation("pass exactly one of --omega and --rho".into())),
    };
    let params = model_params(model, grid.dim(), omega)?;
    let spectral = Spectral::<f64>::new(grid);
    let choquard = Choquard::new(&spectral, params).with_mode(model.mode.into());
    let opts = CertifyOptions {
        morse: (morse_k > 0).then(|| MorseOptions { k: morse_k, ..Default::default() }),
        decay_window: decay.then(|| default_window(&grid)),
    };
    let cert = certify(&choquard, &u, normalization, &opts)?;
    match out {
        Some(dir) => {
            fs::create_dir_all(&dir)?;
            Manifest::new(command_line(), None).write(&dir)?;
            write_json(dir.join("certificate.json"), &cert)?;
            if decay {
                let centred = if u.argmax() == grid.origin_index() { u.clone() } else { u.recentered() };
                fs::write(dir.join("shells.csv"), shell_csv(&shell_profile(&centred.sign_normalized())))?;
            }
            Ok(())
        }
        None => print_json(&cert),
    }
}

fn bubble(dim: usize, s: f64, t: f64, n: usize, half_width: f64, c: Option<f64>, out: Option<PathBuf>) -> Outcome {
    bubble_params(dim, s)?;
    let grid = Grid::new(dim, n, half_width)?;
    let spectral = Spectral::<f64>::new(grid);
    let (field, summary) = make_bubble(&spectral, s, t, &vec![0.0; dim], c)?;
    match out {
        Some(dir) => {
            fs::create_dir_all(&dir)?;
            Manifest::new(command_line(), None).write(&dir)?;
            write_field(dir.join("field.chqf"), &field)?;
            write_json(dir.join("bubble.json"), &summary)?;
            Ok(())
        }
        None => print_json(&summary),
    }
}

fn sweep(config: &Path, param: SweepParam, values: &[f64], out: &Path) -> Outcome {
    let base = RunConfig::from_file(config)?;
    let configs = values
        .iter()
        .enumerate()
        .map(|(i, &v)| {
            let mut cfg = base.clone();
            cfg.params = match param {
                SweepParam::P => cfg.params.with_p(v)?,
                SweepParam::Omega => cfg.params.with_omega(v)?,
            };
            cfg.out = Some(out.join(format!("run_{i:03}")));
            Ok(cfg)
        })
        .collect::<Result<Vec<_>, Error>>()?;
    fs::create_dir_all(out)?;
    Manifest::new(command_line(), Some(&base)).write(out)?;
    let rows = configs
        .par_iter()
        .map(|cfg| -> Result<String, Failure> {
            let dir = cfg.out.as_ref().expect("set above");
            fs::create_dir_all(dir)?;
            Manifest::new(command_line(), Some(cfg)).write(dir)?;
            let outcome = cfg.execute();
            let row = summary_row(cfg, &outcome);
            fs::write(dir.join("summary.csv"), format!("{SUMMARY_HEADER}\n{row}\n"))?;
            if let Ok(report) = &outcome {
                write_run(dir, report)?;
            }
            Ok(row)
        })
        .collect::<Result<Vec<_>, Failure>>()?;
    let mut csv = format!("{SUMMARY_HEADER}\n");
    for row in &rows {
        csv.push_str(row);
        csv.push('\n');
    }
    fs::write(out.join("summary.csv"), &csv)?;
    print!("{csv}");
    Ok(())
}

fn regime_table(dim: usize, s: f64, alpha: f64, ps: &[f64]) -> Outcome {
    let t = Thresholds::new(dim, s, alpha)?;
    println!("p_low,p_mass,p_high");
    println!("{:?},{:?},{:?}", t.p_low, t.p_mass, t.p_high);
    if !ps.is_empty() {
        println!("p,regime");
        for &p in ps {
            let params = ProblemParams::new(dim, s, alpha, p, 1.0)?;
            println!("{p:?},{:?}", classify_regime(&params)?.tag);
        }
    }
    Ok(())
}
