//! Scripted numerical experiments. Each returns an [`ExperimentReport`] with a
//! verdict, data tables, fitted constants and the tolerances used.
//!
//! Sweeps run their member trajectories on a rayon pool whose width can be
//! bounded with the `GDNLS_THREADS` environment variable.

mod dynamics;
pub mod report;
pub mod sampling;
mod statics;

use std::sync::OnceLock;

use rayon::ThreadPool;

pub use dynamics::{
    blowup_scan, continuous_dependence_probe, dichotomy_experiment, duhamel_probe, eps_convergence, h2_growth_probe,
    hamiltonian_monotonicity, lower_order_probe, unit_h2_perturbation, HamiltonianTolerances,
};
pub use report::{ExperimentReport, Table, Verdict};
pub use statics::{
    c_sigma_suite, interpolation_suite, lipschitz_scaling, mollifier_suite, norm_energy_suite,
    verify_static, STATIC_SIGMAS,
};

pub const THREADS_ENV: &str = "GDNLS_THREADS";

/// Shared pool for sweeps, sized by `GDNLS_THREADS` when set.
pub fn pool() -> &'static ThreadPool {
    static POOL: OnceLock<ThreadPool> = OnceLock::new();
    POOL.get_or_init(|| {
        let threads = std::env::var(THREADS_ENV)
            .ok()
            .and_then(|v| v.trim().parse::<usize>().ok())
            .filter(|&n| n > 0)
            .unwrap_or(0);
        rayon::ThreadPoolBuilder::new()
            .num_threads(threads)
            .build()
            .expect("failed to build the sweep thread pool")
    })
}
