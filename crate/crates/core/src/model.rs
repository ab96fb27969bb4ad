//! The gDNLS right-hand side `u_t = i u_xx - |u|^{2σ} u_x` and its mollified form
//! `u_t = -J(|Ju|^{2σ} (Ju)_x) + i ∂_x²(Ju)`.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{invalid, GdnlsError, Result};
use crate::spectral::{
    grid_size, hs_norm, project_unchecked, to_physical_on, to_spectral, Cutoff, SobolevIndex,
    SpectralField,
};

pub const DEFAULT_OVERSAMPLE: usize = 2;
pub const MAX_OVERSAMPLE: usize = 8;

/// `|u|²` below this is treated as an exact zero of `u`.
const ZERO_MODULUS_SQR: f64 = 1e-300;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModelParams {
    pub sigma: f64,
    #[serde(default)]
    pub cutoff: Cutoff,
    #[serde(default = "default_oversample")]
    pub oversample: usize,
    /// Test hook: drop the nonlinear term and keep only the dispersive part.
    #[serde(skip)]
    pub linear_only: bool,
}

fn default_oversample() -> usize {
    DEFAULT_OVERSAMPLE
}

impl ModelParams {
    pub fn new(sigma: f64, cutoff: Cutoff) -> Result<Self> {
        let p = Self {
            sigma,
            cutoff,
            oversample: DEFAULT_OVERSAMPLE,
            linear_only: false,
        };
        p.validate()?;
        Ok(p)
    }

    pub fn with_oversample(mut self, oversample: usize) -> Result<Self> {
        self.oversample = oversample;
        self.validate()?;
        Ok(self)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.sigma >= 1.0 && self.sigma.is_finite()) {
            return Err(invalid(format!("sigma must be a finite value ≥ 1, got {}", self.sigma)));
        }
        if !(1..=MAX_OVERSAMPLE).contains(&self.oversample) {
            return Err(invalid(format!(
                "oversample must lie in 1..={MAX_OVERSAMPLE}, got {}",
                self.oversample
            )));
        }
        Ok(())
    }

    pub fn check_field(&self, f: &SpectralField) -> Result<()> {
        self.cutoff.check_against(f.num_modes())
    }
}

/// `(|u|²)^σ` with exact zeros mapped to 0.
#[inline]
pub fn modulus_power(modulus_sqr: f64, sigma: f64) -> f64 {
    if modulus_sqr < ZERO_MODULUS_SQR {
        0.0
    } else {
        modulus_sqr.powf(sigma)
    }
}

/// Pseudospectral `|u|^{2σ} u_x`, formed on the oversampled grid and truncated
/// back to the field's modes.
pub fn nonlinearity(f: &SpectralField, p: &ModelParams) -> Result<SpectralField> {
    f.check_finite()?;
    let m = grid_size(f.num_modes(), p.oversample)?;
    let u = to_physical_on(f, m);
    let ux = to_physical_on(&f.derivative(), m);
    let product: Vec<Complex64> = u
        .iter()
        .zip(&ux)
        .map(|(u, ux)| ux * modulus_power(u.norm_sqr(), p.sigma))
        .collect();
    to_spectral(&product, f.num_modes())
}

/// `-J(|Ju|^{2σ} (Ju)_x)`: the part of the mollified right-hand side that the
/// integrating factor does not absorb.
pub fn nonlinear_rhs(f: &SpectralField, p: &ModelParams) -> Result<SpectralField> {
    if p.linear_only {
        return Ok(SpectralField::zeros(f.num_modes()));
    }
    let v = project_unchecked(f, p.cutoff);
    let g = nonlinearity(&v, p)?;
    Ok(&project_unchecked(&g, p.cutoff) * -1.0)
}

/// `i ∂_x²(J f)`.
pub fn linear_rhs(f: &SpectralField, cutoff: Cutoff) -> SpectralField {
    f.map_modes(|k, c| {
        if cutoff.keeps(k) {
            c * Complex64::new(0.0, -((k * k) as f64))
        } else {
            Complex64::new(0.0, 0.0)
        }
    })
}

pub fn rhs_mollified(f: &SpectralField, p: &ModelParams) -> Result<SpectralField> {
    p.check_field(f)?;
    let nl = nonlinear_rhs(f, p)?;
    Ok(&nl + &linear_rhs(f, p.cutoff))
}

/// Exact solution from `A e^{ikx}`: `A e^{i(kx − ωt)}` with `ω = k² + k|A|^{2σ}`
/// when the cutoff keeps `k`; a mode the cutoff removes does not move.
pub fn plane_wave_solution(
    num_modes: usize,
    amplitude: Complex64,
    k: i64,
    p: &ModelParams,
    t: f64,
) -> Result<SpectralField> {
    let omega = if p.cutoff.keeps(k) {
        let nl = if p.linear_only { 0.0 } else { k as f64 * amplitude.norm_sqr().powf(p.sigma) };
        (k * k) as f64 + nl
    } else {
        0.0
    };
    SpectralField::plane_wave(num_modes, amplitude * Complex64::from_polar(1.0, -omega * t), k)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LipschitzSample {
    /// `‖rhs(f) - rhs(g)‖_{H¹} / ‖f - g‖_{H¹}`.
    pub ratio: f64,
    /// Same quotient restricted to the nonlinear term.
    pub nonlinear_ratio: f64,
    /// Same quotient restricted to `i ∂_x² J`.
    pub linear_ratio: f64,
}

pub fn lipschitz_probe(f: &SpectralField, g: &SpectralField, p: &ModelParams) -> Result<LipschitzSample> {
    if f.num_modes() != g.num_modes() {
        return Err(GdnlsError::ModeMismatch {
            left: f.num_modes(),
            right: g.num_modes(),
        });
    }
    let diff = hs_norm(&(f - g), SobolevIndex::H1);
    if diff == 0.0 {
        return Err(invalid("Lipschitz probe needs two distinct fields"));
    }
    p.check_field(f)?;
    let nl = &nonlinear_rhs(f, p)? - &nonlinear_rhs(g, p)?;
    let lin = linear_rhs(&(f - g), p.cutoff);
    let total = &nl + &lin;
    Ok(LipschitzSample {
        ratio: hs_norm(&total, SobolevIndex::H1) / diff,
        nonlinear_ratio: hs_norm(&nl, SobolevIndex::H1) / diff,
        linear_ratio: hs_norm(&lin, SobolevIndex::H1) / diff,
    })
}
