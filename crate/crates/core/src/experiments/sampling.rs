//! Seeded random band-limited fields and small numeric helpers shared by the
//! probes.

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{GdnlsError, Result};
use crate::spectral::{hs_norm, SobolevIndex, SpectralField};

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// A random field on `num_modes` modes: random bandwidth, random algebraic
/// decay, and an overall scale drawn log-uniformly from `[1e-3, 3]`.
pub fn random_field(rng: &mut impl Rng, num_modes: usize) -> SpectralField {
    let band = rng.gen_range(1..=num_modes.max(1)) as i64;
    let decay: f64 = rng.gen_range(0.0..2.0);
    let scale = 10f64.powf(rng.gen_range(-3.0..0.5));
    let mut f = SpectralField::zeros(num_modes);
    for k in -band..=band {
        let z = Complex64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0));
        *f.coeff_mut(k) = z * scale / (1.0 + k.unsigned_abs() as f64).powf(decay);
    }
    f
}

/// Uniform sample from the `H¹` ball of the given radius, restricted to
/// `|k| ≤ band`.
pub fn random_in_h1_ball(rng: &mut impl Rng, num_modes: usize, band: usize, radius: f64) -> SpectralField {
    let band = band.min(num_modes) as i64;
    let mut f = SpectralField::zeros(num_modes);
    for k in -band..=band {
        *f.coeff_mut(k) = Complex64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0));
    }
    let norm = hs_norm(&f, SobolevIndex::H1);
    let r = radius * rng.gen_range(0.05f64..1.0).sqrt();
    &f * (r / norm)
}

/// Least-squares line `y = a + b x`; returns `(a, b)`.
pub fn linear_fit(x: &[f64], y: &[f64]) -> Result<(f64, f64)> {
    if x.len() != y.len() || x.len() < 2 {
        return Err(GdnlsError::InsufficientData(format!(
            "linear fit needs ≥ 2 paired points, got {} and {}",
            x.len(),
            y.len()
        )));
    }
    let n = x.len() as f64;
    let mx = x.iter().sum::<f64>() / n;
    let my = y.iter().sum::<f64>() / n;
    let sxx: f64 = x.iter().map(|v| (v - mx).powi(2)).sum();
    if sxx == 0.0 {
        return Err(GdnlsError::InsufficientData("linear fit over a single abscissa".into()));
    }
    let sxy: f64 = x.iter().zip(y).map(|(a, b)| (a - mx) * (b - my)).sum();
    let b = sxy / sxx;
    Ok((my - b * mx, b))
}

/// Slope of `log y` against `log x`.
pub fn log_log_slope(x: &[f64], y: &[f64]) -> Result<f64> {
    let lx: Vec<f64> = x.iter().map(|v| v.ln()).collect();
    let ly: Vec<f64> = y.iter().map(|v| v.ln()).collect();
    Ok(linear_fit(&lx, &ly)?.1)
}

/// Central differences of a uniformly sampled series with a truncation error
/// estimate at each interior point.
#[derive(Debug, Clone, PartialEq)]
pub struct CentralDifference {
    /// Indices into the original series.
    pub index: Vec<usize>,
    pub derivative: Vec<f64>,
    /// Estimated error: `|D_h − D_{2h}| / 3` plus a round-off term.
    pub error: Vec<f64>,
}

pub fn central_difference(values: &[f64], h: f64) -> Result<CentralDifference> {
    let n = values.len();
    if n < 5 {
        return Err(GdnlsError::InsufficientData(format!(
            "central differences with an error estimate need ≥ 5 samples, got {n}"
        )));
    }
    if !(h > 0.0) {
        return Err(GdnlsError::InvalidParameter(format!("sample spacing must be positive, got {h}")));
    }
    let d = |i: usize, s: usize| (values[i + s] - values[i - s]) / (2.0 * s as f64 * h);
    let scale = values.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    let roundoff = 8.0 * f64::EPSILON * scale / h;
    let mut out = CentralDifference {
        index: Vec::with_capacity(n - 2),
        derivative: Vec::with_capacity(n - 2),
        error: Vec::with_capacity(n - 2),
    };
    for i in 1..n - 1 {
        // Points next to the ends borrow the estimate of their inner neighbour.
        let j = i.clamp(2, n - 3);
        let trunc = (d(j, 1) - d(j, 2)).abs() / 3.0;
        out.index.push(i);
        out.derivative.push(d(i, 1));
        out.error.push(trunc + roundoff);
    }
    Ok(out)
}

/// Uniform spacing of a sample grid, ignoring a shortened final interval.
pub fn uniform_spacing(times: &[f64]) -> Result<(f64, usize)> {
    if times.len() < 2 {
        return Err(GdnlsError::InsufficientData("need at least two samples".into()));
    }
    let h = times[1] - times[0];
    let mut usable = 1;
    for w in times.windows(2) {
        let gap = w[1] - w[0];
        if (gap - h).abs() > 1e-9 * h.abs().max(1.0) {
            break;
        }
        usable += 1;
    }
    if usable < times.len() - 1 {
        return Err(GdnlsError::InvalidParameter("samples are not uniformly spaced".into()));
    }
    Ok((h, usable))
}
