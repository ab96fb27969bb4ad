use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use num_complex::Complex64;

use gdnls::config::{load_config, InitialSpec, RunConfig};
use gdnls::experiments::{self, ExperimentReport, HamiltonianTolerances, Verdict};
use gdnls::integrator::{evolve, Trajectory};
use gdnls::io::{read_trajectory, write_trajectory, WriteOptions};
use gdnls::model::plane_wave_solution;
use gdnls::{GdnlsError, SpectralField};

const EXIT_FAIL: u8 = 1;
const EXIT_USAGE: u8 = 2;
const EXIT_ABORTED: u8 = 3;

/// Tolerance on the plane-wave error printed by `run`.
const PLANE_WAVE_TOLERANCE: f64 = 1e-8;

#[derive(Parser)]
#[command(name = "gdnls", version, about = "Pseudospectral gDNLS solver and verification harness")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Clone)]
struct Common {
    /// Run configuration (JSON).
    #[arg(long)]
    config: Option<PathBuf>,
    /// Output root; defaults to `outputs.dir` from the config, else `runs`.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Overrides the config seed.
    #[arg(long)]
    seed: Option<u64>,
    /// Dotted-path config override, e.g. `solver.dt=0.002`. Repeatable.
    #[arg(long = "override", value_name = "KEY=VALUE")]
    overrides: Vec<String>,
}

#[derive(Subcommand)]
enum Command {
    /// Evolve the configured initial datum and store the trajectory.
    Run {
        #[command(flatten)]
        common: Common,
    },
    /// Mollifier-convergence sweep over cutoffs against a reference cutoff.
    Sweep {
        #[command(flatten)]
        common: Common,
        #[arg(long, value_delimiter = ',', default_values_t = vec![8, 16, 32, 64])]
        cutoffs: Vec<usize>,
        /// Reference cutoff; defaults to `num_modes`.
        #[arg(long)]
        reference: Option<usize>,
    },
    /// Run one probe on a stored trajectory (`--trajectory`) or a fresh run (`--config`).
    Probe {
        #[command(flatten)]
        common: Common,
        #[arg(long, value_enum)]
        name: ProbeName,
        #[arg(long)]
        trajectory: Option<PathBuf>,
        /// Exponent for the lower-order probe.
        #[arg(long, default_value_t = 2.0)]
        r: f64,
        #[arg(long = "s-prime", value_delimiter = ',', default_values_t = vec![0.0, 1.0])]
        s_prime: Vec<f64>,
        #[arg(long, value_delimiter = ',', default_values_t = vec![1e-2, 1e-3, 1e-4])]
        deltas: Vec<f64>,
        /// Duhamel residual tolerance.
        #[arg(long, default_value_t = 1e-6)]
        tolerance: f64,
        /// Lipschitz probe: cutoffs, sample count and σ (σ defaults to the config's).
        #[arg(long, value_delimiter = ',', default_values_t = vec![8, 16, 32, 64])]
        cutoffs: Vec<usize>,
        #[arg(long, default_value_t = 200)]
        samples: usize,
        #[arg(long)]
        sigma: Option<f64>,
    },
    /// Small-data dichotomy over multiples of the configured initial datum.
    Dichotomy {
        #[command(flatten)]
        common: Common,
        #[arg(long, value_delimiter = ',', default_values_t = vec![0.0, 0.05, 0.1, 0.2])]
        amplitudes: Vec<f64>,
    },
    /// H²-monitored runs over several σ with a refinement cross-check.
    BlowupScan {
        #[command(flatten)]
        common: Common,
        #[arg(long, value_delimiter = ',', default_values_t = vec![1.0, 1.5, 2.0])]
        sigmas: Vec<f64>,
    },
    /// Mollifier, interpolation, norm-energy and c_σ suites on random fields.
    VerifyStatic {
        #[command(flatten)]
        common: Common,
        #[arg(long, default_value_t = 1000)]
        samples: usize,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum ProbeName {
    LowerOrder,
    H2Growth,
    Hamiltonian,
    Duhamel,
    ContinuousDependence,
    Lipschitz,
}

/// Loaded configuration with CLI overrides applied.
struct Setup {
    cfg: RunConfig,
    u0: SpectralField,
    out: PathBuf,
    seed: u64,
}

impl Common {
    fn setup(&self) -> gdnls::Result<Setup> {
        let path = self.config.as_deref().ok_or_else(|| GdnlsError::Config {
            path: "--config".into(),
            message: "this subcommand needs a configuration file".into(),
        })?;
        let cfg = load_config(path, &self.overrides)?;
        let base = path.parent().unwrap_or(Path::new("."));
        let u0 = cfg.initial.resolve(cfg.num_modes, base)?;
        Ok(Setup {
            out: self.out.clone().unwrap_or_else(|| cfg.outputs.dir.clone()),
            seed: self.seed.unwrap_or(cfg.seed),
            cfg,
            u0,
        })
    }

    fn out_or_default(&self) -> PathBuf {
        self.out.clone().unwrap_or_else(|| PathBuf::from("runs"))
    }
}

enum Outcome {
    Verdict(Verdict),
    Aborted,
}

fn emit(mut reports: Vec<ExperimentReport>, out: &Path, seed: u64) -> gdnls::Result<Outcome> {
    let mut verdict = Verdict::Pass;
    for rep in &mut reports {
        rep.seed = seed;
        let dir = rep.run_dir(out);
        rep.write_to(&dir)?;
        println!("{}  [{}]", rep.summary(), dir.display());
        for note in &rep.notes {
            println!("    note: {note}");
        }
        verdict = verdict.combine(rep.verdict);
    }
    Ok(Outcome::Verdict(verdict))
}

fn cmd_run(common: &Common) -> gdnls::Result<Outcome> {
    let s = common.setup()?;
    let traj = evolve(&s.u0, &s.cfg.model, &s.cfg.solver)?;
    let mut cfg = s.cfg.clone();
    cfg.seed = s.seed;
    let dir = s.out.join(cfg.run_name());
    write_trajectory(
        &dir,
        &traj,
        WriteOptions {
            snapshots: cfg.outputs.snapshots,
            invariants: cfg.outputs.invariants,
        },
    )?;
    std::fs::write(dir.join("config.json"), cfg.to_canonical_json())?;

    let last = traj.last();
    println!("termination: {:?} at t = {}", traj.termination, last.t);
    if let (Some(first), Some(end)) = (traj.invariant_trace.first(), traj.invariant_trace.last()) {
        let rel = |a: f64, b: f64| (b - a).abs() / a.abs().max(f64::MIN_POSITIVE);
        println!(
            "relative drift: mass {:.3e}, momentum {:.3e}, hamiltonian_eps {:.3e}",
            if first.mass == 0.0 { 0.0 } else { rel(first.mass, end.mass) },
            if first.momentum == 0.0 { 0.0 } else { rel(first.momentum, end.momentum) },
            if first.hamiltonian_eps == 0.0 { 0.0 } else { rel(first.hamiltonian_eps, end.hamiltonian_eps) },
        );
    }
    println!("trajectory: {}", dir.display());
    if !traj.completed() {
        return Ok(Outcome::Aborted);
    }
    if let InitialSpec::PlaneWave { amplitude, k } = &cfg.initial {
        let a = Complex64::new(amplitude[0], amplitude[1]);
        let exact = plane_wave_solution(cfg.num_modes, a, *k, &cfg.model, last.t)?;
        let err = (&last.field - &exact).l2_norm();
        let ok = err <= PLANE_WAVE_TOLERANCE;
        println!(
            "{} plane-wave L² error vs exact solution: {err:.3e} (tolerance {PLANE_WAVE_TOLERANCE:.0e})",
            if ok { "PASS" } else { "FAIL" }
        );
        return Ok(Outcome::Verdict(Verdict::from_bool(ok)));
    }
    Ok(Outcome::Verdict(Verdict::Pass))
}

fn trajectory_for(common: &Common, stored: Option<&Path>) -> gdnls::Result<(Trajectory, PathBuf, u64)> {
    match stored {
        Some(dir) => Ok((read_trajectory(dir)?, common.out_or_default(), common.seed.unwrap_or(0))),
        None => {
            let s = common.setup()?;
            let traj = evolve(&s.u0, &s.cfg.model, &s.cfg.solver)?;
            Ok((traj, s.out, s.seed))
        }
    }
}

fn run(cli: Cli) -> gdnls::Result<Outcome> {
    match cli.command {
        Command::Run { common } => cmd_run(&common),
        Command::Sweep {
            common,
            cutoffs,
            reference,
        } => {
            let s = common.setup()?;
            let reference = reference.unwrap_or(s.cfg.num_modes);
            let rep = experiments::eps_convergence(&s.u0, s.cfg.model.sigma, &cutoffs, reference, &s.cfg.solver)?;
            emit(vec![rep], &s.out, s.seed)
        }
        Command::Probe {
            common,
            name,
            trajectory,
            r,
            s_prime,
            deltas,
            tolerance,
            cutoffs,
            samples,
            sigma,
        } => {
            if let ProbeName::Lipschitz = name {
                let (sigma, out, seed) = match (sigma, &common.config) {
                    (Some(sig), _) => (sig, common.out_or_default(), common.seed.unwrap_or(0)),
                    (None, Some(_)) => {
                        let s = common.setup()?;
                        (s.cfg.model.sigma, s.out, s.seed)
                    }
                    (None, None) => (1.5, common.out_or_default(), common.seed.unwrap_or(0)),
                };
                let rep = experiments::lipschitz_scaling(seed, sigma, &cutoffs, samples)?;
                return emit(vec![rep], &out, seed);
            }
            let (traj, out, seed) = trajectory_for(&common, trajectory.as_deref())?;
            let rep = match name {
                ProbeName::LowerOrder => experiments::lower_order_probe(&traj, r)?,
                ProbeName::H2Growth => experiments::h2_growth_probe(&traj, traj.params.sigma)?,
                ProbeName::Hamiltonian => {
                    experiments::hamiltonian_monotonicity(&traj, HamiltonianTolerances::default())?
                }
                ProbeName::Duhamel => experiments::duhamel_probe(&traj, tolerance)?,
                ProbeName::ContinuousDependence => experiments::continuous_dependence_probe(
                    traj.initial(),
                    &deltas,
                    &s_prime,
                    &traj.params,
                    &traj.config,
                )?,
                ProbeName::Lipschitz => unreachable!("handled above"),
            };
            emit(vec![rep], &out, seed)
        }
        Command::Dichotomy { common, amplitudes } => {
            let s = common.setup()?;
            let rep = experiments::dichotomy_experiment(&s.u0, &amplitudes, &s.cfg.model, &s.cfg.solver)?;
            emit(vec![rep], &s.out, s.seed)
        }
        Command::BlowupScan { common, sigmas } => {
            let s = common.setup()?;
            let rep = experiments::blowup_scan(&s.u0, &sigmas, &s.cfg.model, &s.cfg.solver)?;
            emit(vec![rep], &s.out, s.seed)
        }
        Command::VerifyStatic { common, samples } => {
            let seed = common.seed.unwrap_or(0);
            let reports = experiments::verify_static(seed, samples)?;
            emit(reports, &common.out_or_default(), seed)
        }
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { ExitCode::from(EXIT_USAGE) } else { ExitCode::SUCCESS };
        }
    };
    match run(cli) {
        Ok(Outcome::Verdict(Verdict::Fail)) => ExitCode::from(EXIT_FAIL),
        Ok(Outcome::Verdict(_)) => ExitCode::SUCCESS,
        Ok(Outcome::Aborted) => {
            eprintln!("run aborted");
            ExitCode::from(EXIT_ABORTED)
        }
        Err(e @ (GdnlsError::RunAborted(_) | GdnlsError::NonFinite { .. })) => {
            eprintln!("error: {e}");
            ExitCode::from(EXIT_ABORTED)
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(EXIT_USAGE)
        }
    }
}
