//! Conserved functionals, the mollified energy, and the small-data dichotomy.

use std::io::{BufRead, Write};

use serde::{Deserialize, Serialize};

use crate::error::{invalid, Result};
use crate::model::{modulus_power, ModelParams, DEFAULT_OVERSAMPLE};
use crate::spectral::{
    grid_integral, grid_size, hs_norm, project_unchecked, to_physical_on, Cutoff, SobolevIndex,
    SpectralField, TWO_PI,
};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct InvariantRecord {
    pub t: f64,
    pub mass: f64,
    pub momentum: f64,
    pub hamiltonian: f64,
    pub hamiltonian_eps: f64,
    pub energy_eps: f64,
    pub h1_norm: f64,
    pub h2_norm: f64,
}

pub const CSV_HEADER: &str = "t,mass,momentum,hamiltonian,hamiltonian_eps,energy_eps,h1,h2";

impl InvariantRecord {
    pub fn measure(t: f64, f: &SpectralField, p: &ModelParams) -> Result<Self> {
        let hamiltonian = hamiltonian_with(f, p.sigma, Cutoff::Unbounded, p.oversample)?;
        let hamiltonian_eps = if p.cutoff.is_identity_on(f.num_modes()) {
            hamiltonian
        } else {
            hamiltonian_with(f, p.sigma, p.cutoff, p.oversample)?
        };
        let mass = mass(f);
        let energy_eps = hamiltonian_eps
            + 0.5 * mass
            + energy_constant(p.sigma) * lp_integral(&project_unchecked(f, p.cutoff), 4.0 * p.sigma + 2.0, p.oversample)?;
        Ok(Self {
            t,
            mass,
            momentum: momentum(f),
            hamiltonian,
            hamiltonian_eps,
            energy_eps,
            h1_norm: hs_norm(f, SobolevIndex::H1),
            h2_norm: hs_norm(f, SobolevIndex::H2),
        })
    }

    pub fn values(&self) -> [f64; 8] {
        [
            self.t,
            self.mass,
            self.momentum,
            self.hamiltonian,
            self.hamiltonian_eps,
            self.energy_eps,
            self.h1_norm,
            self.h2_norm,
        ]
    }

    pub fn is_finite(&self) -> bool {
        self.values().iter().all(|v| v.is_finite())
    }

    fn from_values(v: [f64; 8]) -> Self {
        Self {
            t: v[0],
            mass: v[1],
            momentum: v[2],
            hamiltonian: v[3],
            hamiltonian_eps: v[4],
            energy_eps: v[5],
            h1_norm: v[6],
            h2_norm: v[7],
        }
    }
}

/// Formats with 17 significant digits, enough to parse back bit-for-bit.
pub fn format_float(v: f64) -> String {
    format!("{v:.16e}")
}

pub fn write_csv<W: Write>(mut w: W, records: &[InvariantRecord]) -> std::io::Result<()> {
    writeln!(w, "{CSV_HEADER}")?;
    for r in records {
        let row: Vec<String> = r.values().iter().map(|&v| format_float(v)).collect();
        writeln!(w, "{}", row.join(","))?;
    }
    Ok(())
}

pub fn read_csv<R: BufRead>(r: R) -> Result<Vec<InvariantRecord>> {
    let mut lines = r.lines();
    let header = lines.next().transpose()?.unwrap_or_default();
    if header.trim() != CSV_HEADER {
        return Err(invalid("invariant CSV is missing its header row"));
    }
    let mut out = Vec::new();
    for (i, line) in lines.enumerate() {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        let vals: Vec<f64> = line
            .split(',')
            .map(|s| s.trim().parse::<f64>())
            .collect::<std::result::Result<_, _>>()
            .map_err(|e| invalid(format!("invariant CSV row {}: {e}", i + 2)))?;
        let vals: [f64; 8] = vals
            .try_into()
            .map_err(|_| invalid(format!("invariant CSV row {} needs 8 columns", i + 2)))?;
        out.push(InvariantRecord::from_values(vals));
    }
    Ok(out)
}

/// `M = ∫|u|²`, by Plancherel.
pub fn mass(f: &SpectralField) -> f64 {
    TWO_PI * f.coeffs().iter().map(|c| c.norm_sqr()).sum::<f64>()
}

/// `P = -½ ∫ ū D_x u = -π Σ k |f̂(k)|²`.
pub fn momentum(f: &SpectralField) -> f64 {
    -0.5 * TWO_PI * f.modes().map(|(k, c)| k as f64 * c.norm_sqr()).sum::<f64>()
}

/// `‖f_x‖²_{L²}`.
pub fn kinetic(f: &SpectralField) -> f64 {
    TWO_PI * f.modes().map(|(k, c)| (k * k) as f64 * c.norm_sqr()).sum::<f64>()
}

/// `∫ |f|^p dx` by trapezoid quadrature on the oversampled grid.
pub fn lp_integral(f: &SpectralField, p: f64, oversample: usize) -> Result<f64> {
    let m = grid_size(f.num_modes(), oversample)?;
    let u = to_physical_on(f, m);
    Ok(grid_integral(u.iter().map(|z| modulus_power(z.norm_sqr(), 0.5 * p)), m))
}

/// `∫ |v|^{2σ} Im(v̄ v_x) dx` with `v = J f`.
pub fn potential_integral(f: &SpectralField, sigma: f64, cutoff: Cutoff, oversample: usize) -> Result<f64> {
    let v = project_unchecked(f, cutoff);
    let m = grid_size(v.num_modes(), oversample)?;
    let u = to_physical_on(&v, m);
    let ux = to_physical_on(&v.derivative(), m);
    Ok(grid_integral(
        u.iter()
            .zip(&ux)
            .map(|(u, ux)| modulus_power(u.norm_sqr(), sigma) * (u.conj() * ux).im),
        m,
    ))
}

/// `H_ε[f] = ‖f_x‖² + (σ+1)⁻¹ ∫ |Jf|^{2σ} Im(conj(Jf) (Jf)_x)`; the unmollified
/// Hamiltonian for `Cutoff::Unbounded`.
pub fn hamiltonian(f: &SpectralField, sigma: f64, cutoff: Cutoff) -> Result<f64> {
    hamiltonian_with(f, sigma, cutoff, DEFAULT_OVERSAMPLE)
}

pub fn hamiltonian_with(f: &SpectralField, sigma: f64, cutoff: Cutoff, oversample: usize) -> Result<f64> {
    Ok(kinetic(f) + potential_integral(f, sigma, cutoff, oversample)? / (sigma + 1.0))
}

/// `c̄ = 1 / (2(σ+1)²)`.
pub fn energy_constant(sigma: f64) -> f64 {
    0.5 / ((sigma + 1.0) * (sigma + 1.0))
}

/// `E_ε = H_ε + ½ M + c̄ ∫ |J f|^{4σ+2}`.
pub fn energy(f: &SpectralField, sigma: f64, cutoff: Cutoff) -> Result<f64> {
    energy_with(f, sigma, cutoff, DEFAULT_OVERSAMPLE)
}

pub fn energy_with(f: &SpectralField, sigma: f64, cutoff: Cutoff, oversample: usize) -> Result<f64> {
    let v = project_unchecked(f, cutoff);
    Ok(hamiltonian_with(f, sigma, cutoff, oversample)?
        + 0.5 * mass(f)
        + energy_constant(sigma) * lp_integral(&v, 4.0 * sigma + 2.0, oversample)?)
}

/// Embedding constant with `‖u‖_{L^∞} ≤ C_∞ ‖u‖_{H¹}` for fields with at most
/// `num_modes` modes: `C_∞² = (2π)⁻¹ Σ_{|k|≤N} (1+k²)⁻¹` (Cauchy–Schwarz on `Σ|û_k|`).
pub fn sup_embedding_constant(num_modes: usize) -> f64 {
    let n = num_modes as i64;
    ((-n..=n).map(|k| 1.0 / (1.0 + (k * k) as f64)).sum::<f64>() / TWO_PI).sqrt()
}

/// Constant with `(σ+1)⁻¹ ‖u‖_{L^{4σ+2}}^{2σ+1} ‖u_x‖ ≤ c_σ ‖u‖_{H¹}^{2σ+2}`.
///
/// `∫|u|^{4σ+2} ≤ ‖u‖_∞^{4σ} ‖u‖²_{L²} ≤ C_∞^{4σ} ‖u‖_{H¹}^{4σ+2}`, so the
/// `L^{4σ+2}` factor is at most `C_∞^{2σ} ‖u‖_{H¹}^{2σ+1}`, and `‖u_x‖ ≤ ‖u‖_{H¹}`.
/// Hence `c_σ = C_∞^{2σ} / (σ+1)`.
pub fn compute_c_sigma(sigma: f64, num_modes: usize) -> f64 {
    sup_embedding_constant(num_modes).powf(2.0 * sigma) / (sigma + 1.0)
}

/// Left and right sides of the `c_σ` inequality for one field.
pub fn c_sigma_sides(f: &SpectralField, sigma: f64, c_sigma: f64, oversample: usize) -> Result<(f64, f64)> {
    let lp = lp_integral(f, 4.0 * sigma + 2.0, oversample)?;
    let lhs = lp.sqrt() * kinetic(f).sqrt() / (sigma + 1.0);
    let rhs = c_sigma * hs_norm(f, SobolevIndex::H1).powf(2.0 * sigma + 2.0);
    Ok((lhs, rhs))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DichotomyParams {
    pub sigma: f64,
    pub c_sigma: f64,
    pub x_star: f64,
    pub f_at_x_star: f64,
}

impl DichotomyParams {
    pub fn new(sigma: f64, c_sigma: f64) -> Result<Self> {
        if !(sigma >= 1.0 && sigma.is_finite()) {
            return Err(invalid(format!("sigma must be ≥ 1, got {sigma}")));
        }
        if !(c_sigma > 0.0 && c_sigma.is_finite()) {
            return Err(invalid(format!("c_sigma must be positive, got {c_sigma}")));
        }
        let x_star = ((sigma + 1.0) * c_sigma).powf(-1.0 / (2.0 * sigma));
        let mut d = Self {
            sigma,
            c_sigma,
            x_star,
            f_at_x_star: 0.0,
        };
        d.f_at_x_star = f_sigma(x_star, &d);
        Ok(d)
    }

    /// Uses [`compute_c_sigma`] for the grid size.
    pub fn for_grid(sigma: f64, num_modes: usize) -> Result<Self> {
        Self::new(sigma, compute_c_sigma(sigma, num_modes))
    }
}

/// `f_σ(x) = x² - c_σ x^{2σ+2}`.
pub fn f_sigma(x: f64, d: &DichotomyParams) -> f64 {
    x * x - d.c_sigma * x.powf(2.0 * d.sigma + 2.0)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DichotomyClass {
    Below,
    Above,
    NotApplicable,
}

pub fn dichotomy_classify(r: &InvariantRecord, d: &DichotomyParams) -> DichotomyClass {
    if r.mass + r.hamiltonian >= d.f_at_x_star {
        DichotomyClass::NotApplicable
    } else if r.h1_norm < d.x_star {
        DichotomyClass::Below
    } else {
        DichotomyClass::Above
    }
}
