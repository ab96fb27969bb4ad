//! Inequality suites over seeded random fields; no time stepping involved.

use num_complex::Complex64;
use rand::Rng;

use super::report::{ExperimentReport, Table};
use super::sampling::{log_log_slope, random_field, random_in_h1_ball, rng};
use crate::error::{invalid, Result};
use crate::invariants::{c_sigma_sides, compute_c_sigma, energy_with};
use crate::model::{lipschitz_probe, ModelParams, DEFAULT_OVERSAMPLE};
use crate::spectral::{
    hs_norm, interpolation_sides, mollifier_gain_probe, project, Cutoff, SobolevIndex, SpectralField,
    INTERPOLATION_CONSTANT,
};

/// Mode count of the random fields used by the static suites.
const FIELD_MODES: usize = 32;
pub const STATIC_SIGMAS: [f64; 4] = [1.0, 1.5, 2.0, 2.5];
const SOBOLEV_GRID: [f64; 5] = [0.0, 0.5, 1.0, 1.5, 2.0];
const MOLLIFIER_INDICES: [f64; 7] = [0.0, 0.5, 1.0, 1.5, 2.0, 3.0, 4.0];

/// Non-expansiveness in `H^s`, idempotence, self-adjointness and the gain
/// bound `‖Jf‖_{H^s} ≤ √2 K^s ‖f‖_{L²}`; all but the gain are exact comparisons.
pub fn mollifier_suite(seed: u64, samples: usize) -> Result<ExperimentReport> {
    let mut r = rng(seed);
    let mut rep = ExperimentReport::new("mollifier", seed);
    let mut table = Table::new(&["sample", "cutoff", "s", "gain", "nonexpansive_margin"]);
    let mut max_gain = 0.0f64;
    for i in 0..samples {
        let f = random_field(&mut r, FIELD_MODES);
        let g = random_field(&mut r, FIELD_MODES);
        let k = r.gen_range(1..=FIELD_MODES);
        let cutoff = Cutoff::Modes(k);
        let s = SobolevIndex::new(MOLLIFIER_INDICES[r.gen_range(0..MOLLIFIER_INDICES.len())])?;
        let jf = project(&f, cutoff)?;

        let (before, after) = (hs_norm(&f, s), hs_norm(&jf, s));
        rep.check(after <= before, || {
            format!("sample {i}: ‖Jf‖_{{H^{}}} = {after:e} > ‖f‖ = {before:e} (K = {k})", s.value())
        });
        rep.check(project(&jf, cutoff)? == jf, || format!("sample {i}: J∘J ≠ J (K = {k})"));
        let (lhs, rhs) = (jf.inner(&g), f.inner(&project(&g, cutoff)?));
        rep.check(lhs == rhs, || format!("sample {i}: ⟨Jf,g⟩ = {lhs} ≠ ⟨f,Jg⟩ = {rhs}"));
        let gain = mollifier_gain_probe(&f, s, cutoff)?;
        max_gain = max_gain.max(gain);
        rep.check(gain <= INTERPOLATION_CONSTANT, || {
            format!("sample {i}: gain ratio {gain} > √2 (K = {k}, s = {})", s.value())
        });
        table.push(vec![i as f64, k as f64, s.value(), gain, before - after]);
    }
    rep.constant("max_gain", max_gain);
    rep.tolerance("gain_bound", INTERPOLATION_CONSTANT);
    rep.table("samples", table);
    Ok(rep)
}

/// `‖f‖_{H^m} ≤ √2 ‖f‖_{H^l}^{m/l} ‖f‖_{L²}^{1−m/l}` over the grid
/// `{0, ½, 1, 3/2, 2}²` restricted to `m ≤ l`.
pub fn interpolation_suite(seed: u64, samples: usize) -> Result<ExperimentReport> {
    let mut r = rng(seed);
    let mut rep = ExperimentReport::new("interpolation", seed);
    let mut worst = Table::new(&["m", "l", "max_ratio"]);
    let pairs: Vec<(f64, f64)> = SOBOLEV_GRID
        .iter()
        .flat_map(|&m| SOBOLEV_GRID.iter().filter(move |&&l| m <= l).map(move |&l| (m, l)))
        .collect();
    let mut max_ratio = vec![0.0f64; pairs.len()];
    for i in 0..samples {
        let f = random_field(&mut r, FIELD_MODES);
        for (j, &(m, l)) in pairs.iter().enumerate() {
            let (lhs, rhs) = interpolation_sides(&f, SobolevIndex::new(m)?, SobolevIndex::new(l)?)?;
            max_ratio[j] = max_ratio[j].max(lhs / rhs);
            rep.check(lhs <= rhs, || format!("sample {i}, (m, l) = ({m}, {l}): {lhs:e} > {rhs:e}"));
        }
    }
    for (&(m, l), &ratio) in pairs.iter().zip(&max_ratio) {
        worst.push(vec![m, l, ratio]);
    }
    rep.constant("max_ratio", max_ratio.iter().copied().fold(0.0, f64::max));
    rep.table("pairs", worst);
    Ok(rep)
}

/// `E_ε[f] ≥ ½‖f‖²_{H¹}` for each σ in [`STATIC_SIGMAS`] and a random cutoff.
pub fn norm_energy_suite(seed: u64, samples: usize) -> Result<ExperimentReport> {
    let mut r = rng(seed);
    let mut rep = ExperimentReport::new("norm_energy", seed);
    let mut table = Table::new(&["sample", "sigma", "cutoff", "energy", "half_h1_sq", "margin"]);
    let mut min_rel = f64::INFINITY;
    for i in 0..samples {
        let f = random_field(&mut r, FIELD_MODES);
        let k = r.gen_range(0..=FIELD_MODES);
        // K = 0 in the draw stands for the unmollified functional.
        let cutoff = if k == 0 { Cutoff::Unbounded } else { Cutoff::Modes(k) };
        let h1 = hs_norm(&f, SobolevIndex::H1);
        for sigma in STATIC_SIGMAS {
            let e = energy_with(&f, sigma, cutoff, DEFAULT_OVERSAMPLE)?;
            let half = 0.5 * h1 * h1;
            let margin = e - half;
            min_rel = min_rel.min(margin / half);
            rep.check(margin > 0.0, || {
                format!("sample {i}, σ = {sigma}, K = {k}: energy {e:e} ≤ ½‖f‖²_{{H¹}} = {half:e}")
            });
            table.push(vec![i as f64, sigma, k as f64, e, half, margin]);
        }
    }
    rep.constant("min_relative_margin", min_rel);
    rep.table("samples", table);
    Ok(rep)
}

/// `(σ+1)⁻¹‖u‖_{L^{4σ+2}}^{2σ+1}‖u_x‖ ≤ c_σ‖u‖_{H¹}^{2σ+2}` with σ cycling
/// through [`STATIC_SIGMAS`].
pub fn c_sigma_suite(seed: u64, samples: usize) -> Result<ExperimentReport> {
    let mut r = rng(seed);
    let mut rep = ExperimentReport::new("c_sigma", seed);
    let mut table = Table::new(&["sample", "sigma", "lhs", "rhs"]);
    let mut max_ratio = 0.0f64;
    for i in 0..samples {
        let f = random_field(&mut r, FIELD_MODES);
        let sigma = STATIC_SIGMAS[i % STATIC_SIGMAS.len()];
        let c = compute_c_sigma(sigma, FIELD_MODES);
        let (lhs, rhs) = c_sigma_sides(&f, sigma, c, DEFAULT_OVERSAMPLE)?;
        max_ratio = max_ratio.max(lhs / rhs);
        rep.check(lhs <= rhs, || format!("sample {i}, σ = {sigma}: {lhs:e} > {rhs:e}"));
        table.push(vec![i as f64, sigma, lhs, rhs]);
    }
    for sigma in STATIC_SIGMAS {
        rep.constant(&format!("c_sigma_{sigma}"), compute_c_sigma(sigma, FIELD_MODES));
    }
    rep.constant("max_ratio", max_ratio);
    rep.table("samples", table);
    Ok(rep)
}

/// All non-dynamical suites with a shared seed.
pub fn verify_static(seed: u64, samples: usize) -> Result<Vec<ExperimentReport>> {
    Ok(vec![
        mollifier_suite(seed, samples)?,
        interpolation_suite(seed.wrapping_add(1), samples)?,
        norm_energy_suite(seed.wrapping_add(2), samples)?,
        c_sigma_suite(seed.wrapping_add(3), samples)?,
    ])
}

/// Largest `H¹` Lipschitz quotients of the mollified right-hand side per
/// cutoff. Pairs are a smooth base field `f` in the unit `H¹` ball (the same
/// draws for every `K`) and `g = f + w`, with `w` small and supported on
/// `K/2 ≤ |k| ≤ K`. The nonlinear term should grow at most linearly in `K`
/// (log-log slope ≤ 1.1); the dispersive term is reported alongside and grows
/// like `K²`.
pub fn lipschitz_scaling(seed: u64, sigma: f64, cutoffs: &[usize], samples: usize) -> Result<ExperimentReport> {
    const SLOPE_BOUND: f64 = 1.1;
    const BASE_BAND: usize = 2;
    if cutoffs.len() < 2 || cutoffs.windows(2).any(|w| w[0] >= w[1]) || cutoffs[0] < 4 * BASE_BAND {
        return Err(invalid(format!(
            "need at least two strictly increasing cutoffs, the first ≥ {}",
            4 * BASE_BAND
        )));
    }
    let n = *cutoffs.last().unwrap();
    let mut rep = ExperimentReport::new("lipschitz", seed);
    let mut table = Table::new(&["cutoff", "max_ratio", "max_nonlinear_ratio", "max_linear_ratio", "c_estimate"]);
    let mut maxima = Vec::new();
    for &k in cutoffs {
        let p = ModelParams::new(sigma, Cutoff::Modes(k))?;
        let mut r = rng(seed);
        let (mut full, mut nl, mut lin) = (0.0f64, 0.0f64, 0.0f64);
        for _ in 0..samples {
            let f = random_in_h1_ball(&mut r, n, BASE_BAND, 1.0);
            let mut w = SpectralField::zeros(n);
            for q in (k / 2).max(1)..=k {
                for q in [q as i64, -(q as i64)] {
                    *w.coeff_mut(q) = Complex64::new(r.gen_range(-1.0..1.0), r.gen_range(-1.0..1.0));
                }
            }
            let w = &w * (1e-4 / hs_norm(&w, SobolevIndex::H1));
            let s = lipschitz_probe(&f, &(&f + &w), &p)?;
            full = full.max(s.ratio);
            nl = nl.max(s.nonlinear_ratio);
            lin = lin.max(s.linear_ratio);
        }
        table.push(vec![k as f64, full, nl, lin, nl / k as f64]);
        maxima.push((k as f64, full, nl));
    }
    let ks: Vec<f64> = maxima.iter().map(|m| m.0).collect();
    let full: Vec<f64> = maxima.iter().map(|m| m.1).collect();
    let nl: Vec<f64> = maxima.iter().map(|m| m.2).collect();
    let nl_slope = log_log_slope(&ks, &nl)?;
    rep.constant("nonlinear_slope", nl_slope);
    rep.constant("full_slope", log_log_slope(&ks, &full)?);
    rep.tolerance("nonlinear_slope_bound", SLOPE_BOUND);
    rep.check(nl_slope <= SLOPE_BOUND, || {
        format!("nonlinear Lipschitz quotient grows like K^{nl_slope:.2}")
    });
    rep.table("cutoffs", table);
    Ok(rep)
}
