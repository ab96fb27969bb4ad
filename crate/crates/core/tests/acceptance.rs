//! Acceptance suite. Runs every criterion in order, prints one PASS/FAIL line
//! each, and exits non-zero if any fails. Runs with `harness = false`.

use std::f64::consts::PI;
use std::time::{Duration, Instant};

use num_complex::Complex64;

use gdnls::config::bump;
use gdnls::experiments::{
    self, duhamel_probe, eps_convergence, h2_growth_probe, hamiltonian_monotonicity, lower_order_probe,
    sampling::log_log_slope, ExperimentReport, HamiltonianTolerances, Verdict,
};
use gdnls::integrator::{evolve, SolverConfig, Trajectory};
use gdnls::invariants::DichotomyParams;
use gdnls::model::plane_wave_solution;
use gdnls::{Cutoff, ModelParams, SpectralField};

const SEED: u64 = 20_240_601;
const BUMP_AMPLITUDE: f64 = 0.8;

struct Outcome {
    pass: bool,
    detail: String,
}

impl Outcome {
    fn new(pass: bool, detail: impl Into<String>) -> Self {
        Self {
            pass,
            detail: detail.into(),
        }
    }
}

fn within_budget(o: Outcome, elapsed: Duration, budget: Option<Duration>) -> Outcome {
    match budget {
        Some(b) if elapsed > b => Outcome::new(false, format!("{}; over the {:?} budget", o.detail, b)),
        _ => o,
    }
}

fn c(re: f64) -> Complex64 {
    Complex64::new(re, 0.0)
}

fn run_ok(u0: &SpectralField, p: &ModelParams, cfg: &SolverConfig) -> Trajectory {
    let t = evolve(u0, p, cfg).expect("run failed");
    assert!(t.completed(), "run ended with {:?}", t.termination);
    t
}

fn report_outcome(reps: &[ExperimentReport]) -> Outcome {
    let pass = reps.iter().all(|r| r.verdict == Verdict::Pass);
    let detail = reps
        .iter()
        .map(|r| match &r.violation {
            Some(v) => format!("{}: {v}", r.name),
            None if r.verdict == Verdict::Inconclusive => format!("{}: inconclusive {:?}", r.name, r.notes),
            None => r.name.clone(),
        })
        .collect::<Vec<_>>()
        .join("; ");
    Outcome::new(pass, detail)
}

fn plane_wave_error(sigma: f64, dt: f64) -> f64 {
    let (n, k, a) = (64, 2, c(0.5));
    let p = ModelParams::new(sigma, Cutoff::Unbounded).unwrap();
    let u0 = SpectralField::plane_wave(n, a, k).unwrap();
    let traj = run_ok(&u0, &p, &SolverConfig::new(dt, 1.0).sampled_every(usize::MAX));
    let exact = plane_wave_solution(n, a, k, &p, 1.0).unwrap();
    (&traj.last().field - &exact).l2_norm()
}

/// Plane-wave error at dt = 1e-3, and the order ratio from dt = 0.1 → 0.05
/// (finer steps sit at round-off).
fn criterion_1() -> Outcome {
    let mut pass = true;
    let mut parts = Vec::new();
    for sigma in [1.0, 1.5, 2.0] {
        let fine = plane_wave_error(sigma, 1e-3);
        let ratio = plane_wave_error(sigma, 0.1) / plane_wave_error(sigma, 0.05);
        pass &= fine <= 1e-8 && (14.0..=18.0).contains(&ratio);
        parts.push(format!("σ={sigma}: err {fine:.1e}, ratio {ratio:.2}"));
    }
    Outcome::new(pass, parts.join(", "))
}

fn relative_drifts(traj: &Trajectory) -> [f64; 3] {
    let r0 = &traj.invariant_trace[0];
    let mut out = [0.0f64; 3];
    for r in &traj.invariant_trace {
        out[0] = out[0].max(((r.mass - r0.mass) / r0.mass).abs());
        out[1] = out[1].max(((r.momentum - r0.momentum) / r0.momentum).abs());
        out[2] = out[2].max(((r.hamiltonian_eps - r0.hamiltonian_eps) / r0.hamiltonian_eps).abs());
    }
    out
}

/// Drift of M, P, H_ε at dt = 1e-3 and the fitted drift order over a dt ladder
/// chosen so that every drift sits well above the round-off floor.
fn criterion_2() -> Outcome {
    let u0 = bump(64, BUMP_AMPLITUDE).unwrap();
    let p = ModelParams::new(1.5, Cutoff::Modes(16)).unwrap();
    let fine = relative_drifts(&run_ok(&u0, &p, &SolverConfig::new(1e-3, 1.0)));
    let ladder = [0.02, 0.01, 0.005, 0.0025];
    let drifts: Vec<[f64; 3]> = ladder
        .iter()
        .map(|&dt| relative_drifts(&run_ok(&u0, &p, &SolverConfig::new(dt, 1.0).sampled_every(1))))
        .collect();
    let names = ["M", "P", "H_ε"];
    let mut pass = true;
    let mut parts = Vec::new();
    for q in 0..3 {
        let series: Vec<f64> = drifts.iter().map(|d| d[q]).collect();
        let order = log_log_slope(&ladder, &series).unwrap();
        let ok = fine[q] <= 1e-8 && (order - 4.0).abs() <= 0.3;
        pass &= ok;
        parts.push(format!("{}: drift {:.1e}, order {order:.2}", names[q], fine[q]));
    }
    Outcome::new(pass, parts.join(", "))
}

fn criterion_3() -> Outcome {
    let rep = experiments::norm_energy_suite(SEED, 1000).unwrap();
    let mut o = report_outcome(std::slice::from_ref(&rep));
    o.detail = format!(
        "{}; min relative margin {:.3e}",
        o.detail, rep.fitted_constants["min_relative_margin"]
    );
    o
}

fn criterion_4() -> Outcome {
    report_outcome(&[
        experiments::mollifier_suite(SEED, 1000).unwrap(),
        experiments::interpolation_suite(SEED + 1, 1000).unwrap(),
        experiments::c_sigma_suite(SEED + 2, 1000).unwrap(),
    ])
}

fn criterion_5() -> Outcome {
    let u0 = bump(128, BUMP_AMPLITUDE).unwrap();
    let cfg = SolverConfig::new(1e-3, 1.0).sampled_every(10);
    let rep = eps_convergence(&u0, 1.5, &[8, 16, 32, 64], 128, &cfg).unwrap();
    let strictly = rep.fitted_constants["strictly_decreasing"] == 1.0;
    let e = rep.tables["distances"].column("distance").unwrap();
    let mut o = report_outcome(std::slice::from_ref(&rep));
    o.pass &= strictly;
    o.detail = format!(
        "E = {:?}, ratio {:.2e}",
        e[..4].iter().map(|v| format!("{v:.2e}")).collect::<Vec<_>>(),
        rep.fitted_constants["ratio"]
    );
    o
}

fn criterion_6() -> Outcome {
    let mut reps = Vec::new();
    let cfg = SolverConfig::new(1e-3, 1.0).sampled_every(10);
    for sigma in [1.0, 1.5, 2.0] {
        for cutoff in [Cutoff::Modes(16), Cutoff::Unbounded] {
            let p = ModelParams::new(sigma, cutoff).unwrap();
            let traj = run_ok(&bump(64, BUMP_AMPLITUDE).unwrap(), &p, &cfg);
            reps.push(hamiltonian_monotonicity(&traj, HamiltonianTolerances::default()).unwrap());
        }
    }
    let p = ModelParams::new(1.0, Cutoff::Unbounded).unwrap();
    let traj = run_ok(&SpectralField::plane_wave(64, c(0.5), 2).unwrap(), &p, &cfg);
    reps.push(hamiltonian_monotonicity(&traj, HamiltonianTolerances::default()).unwrap());
    let worst = reps
        .iter()
        .map(|r| r.fitted_constants["max_relative_drift"])
        .fold(0.0f64, f64::max);
    let mut o = report_outcome(&reps);
    o.detail = format!("{} runs, worst relative drift {worst:.2e}", reps.len());
    o
}

fn criterion_7() -> Outcome {
    let p = ModelParams::new(1.5, Cutoff::Modes(16)).unwrap();
    let traj = run_ok(
        &bump(64, BUMP_AMPLITUDE).unwrap(),
        &p,
        &SolverConfig::new(1e-3, 1.0).sampled_every(10),
    );
    let reps = [
        lower_order_probe(&traj, 1.0).unwrap(),
        lower_order_probe(&traj, 2.0).unwrap(),
        h2_growth_probe(&traj, 1.5).unwrap(),
    ];
    let mut o = report_outcome(&reps);
    o.detail = format!(
        "worst margins r=1 {:.3e}, r=2 {:.3e}, H² {:.3e}",
        reps[0].fitted_constants["worst_margin"],
        reps[1].fitted_constants["worst_margin"],
        reps[2].fitted_constants["worst_margin"]
    );
    o
}

fn criterion_8() -> Outcome {
    let p = ModelParams::new(1.5, Cutoff::Modes(16)).unwrap();
    let cfg = SolverConfig::new(1e-3, 1.0).sampled_every(10);
    let rep = experiments::continuous_dependence_probe(
        &bump(64, BUMP_AMPLITUDE).unwrap(),
        &[1e-2, 1e-3, 1e-4],
        &[0.0, 1.0],
        &p,
        &cfg,
    )
    .unwrap();
    let fc = &rep.fitted_constants;
    let mut o = report_outcome(std::slice::from_ref(&rep));
    o.detail = format!(
        "exponents s'=0 {:.3}, s'=1 {:.3}; growth rate {:.3}",
        fc["exponent_s0"], fc["exponent_s1"], fc["max_growth_rate"]
    );
    o
}

/// Small plane wave `A e^{ix}` with closed-form `H + M` and `‖u₀‖_{H¹}`.
fn criterion_9() -> Outcome {
    let (n, k, a, sigma) = (32usize, 1i64, 0.1f64, 1.0f64);
    let d = DichotomyParams::for_grid(sigma, n).unwrap();
    let kf = k as f64;
    let h_plus_m = 2.0 * PI * a * a * (1.0 + kf * kf) + 2.0 * PI * kf * a.powf(2.0 * sigma + 2.0) / (sigma + 1.0);
    let h1 = (2.0 * PI * (1.0 + kf * kf)).sqrt() * a;
    let hypothesis = h_plus_m < d.f_at_x_star && h1 < d.x_star;

    let base = SpectralField::plane_wave(n, c(1.0), k).unwrap();
    let p = ModelParams::new(sigma, Cutoff::Unbounded).unwrap();
    let cfg = SolverConfig::new(1e-3, 5.0).sampled_every(10);
    let rep = experiments::dichotomy_experiment(&base, &[a], &p, &cfg).unwrap();
    let row = &rep.tables["amplitudes"].rows[0];
    let measured_agrees = (row[2] - h_plus_m).abs() <= 1e-12 * h_plus_m && (row[3] - h1).abs() <= 1e-12 * h1;
    let margin = row[5];
    let mut o = report_outcome(std::slice::from_ref(&rep));
    o.pass &= hypothesis && measured_agrees && margin > 0.0 && row[6] == 5.0;
    o.detail = format!(
        "H+M {h_plus_m:.4e} < f(x⋆) {:.4e}, ‖u₀‖ {h1:.4e} < x⋆ {:.4e}, margin {margin:.4e}",
        d.f_at_x_star, d.x_star
    );
    o
}

fn criterion_10() -> Outcome {
    let p = ModelParams::new(1.0, Cutoff::Unbounded).unwrap();
    let u0 = SpectralField::plane_wave(64, c(0.5), 2).unwrap();
    let traj = run_ok(&u0, &p, &SolverConfig::new(1e-3, 1.0).sampled_every(10));
    let rep = duhamel_probe(&traj, 1e-6).unwrap();
    let mut o = report_outcome(std::slice::from_ref(&rep));
    o.detail = format!(
        "residual {:.2e}, order {:.2}",
        rep.fitted_constants["residual"],
        rep.fitted_constants.get("order").copied().unwrap_or(f64::NAN)
    );
    o
}

fn main() {
    type Criterion = (&'static str, fn() -> Outcome, Option<u64>);
    let criteria: [Criterion; 10] = [
        ("plane-wave exactness and order", criterion_1, Some(5)),
        ("invariant drift and drift order", criterion_2, Some(10)),
        ("energy domination", criterion_3, Some(5)),
        ("static inequality suite", criterion_4, Some(10)),
        ("mollifier convergence", criterion_5, Some(60)),
        ("Hamiltonian monotonicity/conservation", criterion_6, None),
        ("growth-bound probes", criterion_7, Some(20)),
        ("continuous dependence", criterion_8, Some(60)),
        ("small-data dichotomy", criterion_9, Some(30)),
        ("Duhamel residual", criterion_10, None),
    ];
    let filter: Vec<String> = std::env::args().skip(1).filter(|a| !a.starts_with('-')).collect();
    let mut failed = 0;
    for (i, (name, f, budget)) in criteria.iter().enumerate() {
        let id = format!("criterion {}", i + 1);
        if !filter.is_empty() && !filter.iter().any(|s| id.ends_with(&format!(" {s}"))) {
            continue;
        }
        let start = Instant::now();
        let o = within_budget(f(), start.elapsed(), budget.map(Duration::from_secs));
        let tag = if o.pass { "PASS" } else { "FAIL" };
        println!("{tag} {id:>12}  {name} [{:.2?}]: {}", start.elapsed(), o.detail);
        if !o.pass {
            failed += 1;
        }
    }
    if failed > 0 {
        println!("{failed} acceptance criteria failed");
        std::process::exit(1);
    }
}
