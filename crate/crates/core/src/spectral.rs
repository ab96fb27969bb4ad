//! Periodic Fourier representation on `[0, 2π)`.
//!
//! A field is stored as its Fourier coefficients `f̂(k)` for `k = -N..=N`,
//! with `f(x) = Σ f̂(k) e^{ikx}`. Norms follow the measure convention
//! `‖f‖²_{L²} = 2π Σ |f̂(k)|²`, and the Sobolev norm of index `s > 0` is
//! `‖f‖²_{H^s} = 2π Σ (1 + |k|^{2s}) |f̂(k)|²` (index 0 is the plain L² norm).

use std::collections::HashMap;
use std::f64::consts::PI;
use std::io::{Read, Write};
use std::ops::{Add, Mul, Sub};
use std::sync::{Arc, Mutex, OnceLock};

use num_complex::Complex64;
use rustfft::{Fft, FftPlanner};
use serde::{Deserialize, Serialize};

use crate::error::{invalid, GdnlsError, Result};

pub const TWO_PI: f64 = 2.0 * PI;

/// Largest physical grid any transform will allocate.
pub const MAX_GRID_POINTS: usize = 1 << 22;

/// Largest Sobolev index accepted by [`SobolevIndex::new`].
pub const MAX_SOBOLEV_INDEX: f64 = 4.0;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "FieldRecord", into = "FieldRecord")]
pub struct SpectralField {
    num_modes: usize,
    coeffs: Vec<Complex64>,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct FieldRecord {
    #[serde(rename = "N")]
    n: usize,
    coeffs: Vec<[f64; 2]>,
}

impl TryFrom<FieldRecord> for SpectralField {
    type Error = GdnlsError;

    fn try_from(rec: FieldRecord) -> Result<Self> {
        if rec.coeffs.len() != 2 * rec.n + 1 {
            return Err(invalid(format!(
                "field record declares N = {} but holds {} coefficients",
                rec.n,
                rec.coeffs.len()
            )));
        }
        SpectralField::from_coeffs(
            rec.coeffs
                .into_iter()
                .map(|[re, im]| Complex64::new(re, im))
                .collect(),
        )
    }
}

impl From<SpectralField> for FieldRecord {
    fn from(f: SpectralField) -> Self {
        FieldRecord {
            n: f.num_modes,
            coeffs: f.coeffs.iter().map(|c| [c.re, c.im]).collect(),
        }
    }
}

impl SpectralField {
    pub fn zeros(num_modes: usize) -> Self {
        Self {
            num_modes,
            coeffs: vec![Complex64::new(0.0, 0.0); 2 * num_modes + 1],
        }
    }

    /// Builds a field from coefficients ordered `k = -N..=N`.
    pub fn from_coeffs(coeffs: Vec<Complex64>) -> Result<Self> {
        if coeffs.len().is_multiple_of(2) {
            return Err(GdnlsError::BadLength { len: coeffs.len() });
        }
        let num_modes = coeffs.len() / 2;
        let field = Self { num_modes, coeffs };
        field.check_finite()?;
        Ok(field)
    }

    pub fn from_modes(num_modes: usize, modes: &[(i64, Complex64)]) -> Result<Self> {
        let mut f = Self::zeros(num_modes);
        for &(k, value) in modes {
            if k.unsigned_abs() as usize > num_modes {
                return Err(invalid(format!(
                    "wavenumber {k} outside -{num_modes}..={num_modes}"
                )));
            }
            *f.coeff_mut(k) += value;
        }
        f.check_finite()?;
        Ok(f)
    }

    /// `amplitude · e^{ikx}`.
    pub fn plane_wave(num_modes: usize, amplitude: Complex64, k: i64) -> Result<Self> {
        Self::from_modes(num_modes, &[(k, amplitude)])
    }

    pub fn num_modes(&self) -> usize {
        self.num_modes
    }

    pub fn coeffs(&self) -> &[Complex64] {
        &self.coeffs
    }

    pub fn coeff(&self, k: i64) -> Complex64 {
        self.coeffs[self.index(k)]
    }

    pub fn coeff_mut(&mut self, k: i64) -> &mut Complex64 {
        let i = self.index(k);
        &mut self.coeffs[i]
    }

    fn index(&self, k: i64) -> usize {
        let n = self.num_modes as i64;
        assert!((-n..=n).contains(&k), "wavenumber {k} out of range for N = {n}");
        (k + n) as usize
    }

    /// Iterates `(k, f̂(k))` from `k = -N` upward.
    pub fn modes(&self) -> impl Iterator<Item = (i64, Complex64)> + '_ {
        let n = self.num_modes as i64;
        self.coeffs.iter().enumerate().map(move |(i, &c)| (i as i64 - n, c))
    }

    pub fn check_finite(&self) -> Result<()> {
        match self.modes().find(|(_, c)| !c.re.is_finite() || !c.im.is_finite()) {
            Some((k, _)) => Err(GdnlsError::NonFinite { wavenumber: k }),
            None => Ok(()),
        }
    }

    pub fn is_finite(&self) -> bool {
        self.check_finite().is_ok()
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.iter().all(|c| c.re == 0.0 && c.im == 0.0)
    }

    /// Applies a per-mode multiplier `c ↦ symbol(k) · c`.
    pub fn map_modes(&self, mut symbol: impl FnMut(i64, Complex64) -> Complex64) -> Self {
        let n = self.num_modes as i64;
        Self {
            num_modes: self.num_modes,
            coeffs: self
                .coeffs
                .iter()
                .enumerate()
                .map(|(i, &c)| symbol(i as i64 - n, c))
                .collect(),
        }
    }

    /// Spectral derivative `∂_x f`.
    pub fn derivative(&self) -> Self {
        self.map_modes(|k, c| c * Complex64::new(0.0, k as f64))
    }

    pub fn second_derivative(&self) -> Self {
        self.map_modes(|k, c| -c * (k * k) as f64)
    }

    /// Multiplies every mode by `e^{iθ}`.
    pub fn rotate_phase(&self, theta: f64) -> Self {
        let p = Complex64::from_polar(1.0, theta);
        self.map_modes(|_, c| c * p)
    }

    /// The field `x ↦ f(x - shift)`.
    pub fn translate(&self, shift: f64) -> Self {
        self.map_modes(|k, c| c * Complex64::from_polar(1.0, -(k as f64) * shift))
    }

    /// Plancherel inner product `⟨f, g⟩ = ∫ f̄ g dx = 2π Σ conj(f̂) ĝ`.
    pub fn inner(&self, other: &Self) -> Complex64 {
        assert_eq!(self.num_modes, other.num_modes);
        self.coeffs
            .iter()
            .zip(&other.coeffs)
            .map(|(a, b)| a.conj() * b)
            .sum::<Complex64>()
            * TWO_PI
    }

    pub fn l2_norm(&self) -> f64 {
        (TWO_PI * self.coeffs.iter().map(|c| c.norm_sqr()).sum::<f64>()).sqrt()
    }

    /// Returns the same field padded with zeros (or truncated) to `num_modes`.
    pub fn resized(&self, num_modes: usize) -> Self {
        let mut out = Self::zeros(num_modes);
        let m = self.num_modes.min(num_modes) as i64;
        for k in -m..=m {
            *out.coeff_mut(k) = self.coeff(k);
        }
        out
    }

    pub fn axpy(&self, alpha: Complex64, other: &Self) -> Self {
        assert_eq!(self.num_modes, other.num_modes);
        Self {
            num_modes: self.num_modes,
            coeffs: self
                .coeffs
                .iter()
                .zip(&other.coeffs)
                .map(|(a, b)| a + alpha * b)
                .collect(),
        }
    }

    /// Flat little-endian record: `[re, im]` pairs for `k = -N..=N`.
    pub fn write_binary<W: Write>(&self, mut w: W) -> std::io::Result<()> {
        let mut buf = Vec::with_capacity(16 * self.coeffs.len());
        for c in &self.coeffs {
            buf.extend_from_slice(&c.re.to_le_bytes());
            buf.extend_from_slice(&c.im.to_le_bytes());
        }
        w.write_all(&buf)
    }

    pub fn to_binary(&self) -> Vec<u8> {
        let mut buf = Vec::new();
        self.write_binary(&mut buf).expect("writing to a Vec cannot fail");
        buf
    }

    pub fn read_binary<R: Read>(mut r: R) -> Result<Self> {
        let mut buf = Vec::new();
        r.read_to_end(&mut buf)?;
        Self::from_binary(&buf)
    }

    pub fn from_binary(bytes: &[u8]) -> Result<Self> {
        if !bytes.len().is_multiple_of(16) {
            return Err(invalid(format!(
                "binary field record of {} bytes is not a whole number of complex values",
                bytes.len()
            )));
        }
        let coeffs = bytes
            .chunks_exact(16)
            .map(|c| {
                let re = f64::from_le_bytes(c[..8].try_into().unwrap());
                let im = f64::from_le_bytes(c[8..].try_into().unwrap());
                Complex64::new(re, im)
            })
            .collect();
        Self::from_coeffs(coeffs)
    }
}

impl Add for &SpectralField {
    type Output = SpectralField;
    fn add(self, rhs: &SpectralField) -> SpectralField {
        self.axpy(Complex64::new(1.0, 0.0), rhs)
    }
}

impl Sub for &SpectralField {
    type Output = SpectralField;
    fn sub(self, rhs: &SpectralField) -> SpectralField {
        self.axpy(Complex64::new(-1.0, 0.0), rhs)
    }
}

impl Mul<Complex64> for &SpectralField {
    type Output = SpectralField;
    fn mul(self, rhs: Complex64) -> SpectralField {
        self.map_modes(|_, c| c * rhs)
    }
}

impl Mul<f64> for &SpectralField {
    type Output = SpectralField;
    fn mul(self, rhs: f64) -> SpectralField {
        self.map_modes(|_, c| c * rhs)
    }
}

/// Sharp Fourier cutoff keeping `|k| ≤ K`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(from = "Option<usize>", into = "Option<usize>")]
#[derive(Default)]
pub enum Cutoff {
    Modes(usize),
    /// No mollification.
    #[default]
    Unbounded,
}

impl From<Option<usize>> for Cutoff {
    fn from(v: Option<usize>) -> Self {
        v.map_or(Cutoff::Unbounded, Cutoff::Modes)
    }
}

impl From<Cutoff> for Option<usize> {
    fn from(c: Cutoff) -> Self {
        c.modes()
    }
}


impl Cutoff {
    /// `K = ⌈1/ε⌉`.
    pub fn from_eps(eps: f64) -> Result<Self> {
        if !(eps > 0.0 && eps.is_finite()) {
            return Err(invalid(format!("mollification parameter must be positive, got {eps}")));
        }
        Ok(Cutoff::Modes((1.0 / eps).ceil() as usize))
    }

    pub fn modes(self) -> Option<usize> {
        match self {
            Cutoff::Modes(k) => Some(k),
            Cutoff::Unbounded => None,
        }
    }

    pub fn keeps(self, k: i64) -> bool {
        match self {
            Cutoff::Modes(kmax) => k.unsigned_abs() as usize <= kmax,
            Cutoff::Unbounded => true,
        }
    }

    pub fn check_against(self, num_modes: usize) -> Result<()> {
        match self {
            Cutoff::Modes(k) if k > num_modes => Err(GdnlsError::CutoffExceedsModes {
                cutoff: k,
                num_modes,
            }),
            _ => Ok(()),
        }
    }

    /// True when the cutoff acts as the identity on fields with `num_modes` modes.
    pub fn is_identity_on(self, num_modes: usize) -> bool {
        match self {
            Cutoff::Modes(k) => k >= num_modes,
            Cutoff::Unbounded => true,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, PartialOrd)]
pub struct SobolevIndex(f64);

impl SobolevIndex {
    pub const L2: SobolevIndex = SobolevIndex(0.0);
    pub const H1: SobolevIndex = SobolevIndex(1.0);
    pub const H2: SobolevIndex = SobolevIndex(2.0);

    pub fn new(s: f64) -> Result<Self> {
        if !(0.0..=MAX_SOBOLEV_INDEX).contains(&s) {
            return Err(invalid(format!(
                "Sobolev index {s} outside [0, {MAX_SOBOLEV_INDEX}]"
            )));
        }
        Ok(SobolevIndex(s))
    }

    pub fn value(self) -> f64 {
        self.0
    }

    /// `1 + |k|^{2s}`, or 1 at `s = 0`.
    pub fn weight(self, k: i64) -> f64 {
        if self.0 == 0.0 {
            1.0
        } else {
            1.0 + (k.unsigned_abs() as f64).powf(2.0 * self.0)
        }
    }
}

// ---------------------------------------------------------------------------
// Transforms

type Plans = (Arc<dyn Fft<f64>>, Arc<dyn Fft<f64>>);

fn plans(len: usize) -> Plans {
    static CACHE: OnceLock<Mutex<HashMap<usize, Plans>>> = OnceLock::new();
    let mut cache = CACHE.get_or_init(Default::default).lock().unwrap();
    cache
        .entry(len)
        .or_insert_with(|| {
            let mut planner = FftPlanner::new();
            (planner.plan_fft_forward(len), planner.plan_fft_inverse(len))
        })
        .clone()
}

/// Smallest `2^a 3^b 5^c` that is at least `n`.
pub fn fft_friendly_size(n: usize) -> usize {
    let mut m = n.max(1);
    loop {
        let mut r = m;
        for p in [2, 3, 5] {
            while r.is_multiple_of(p) {
                r /= p;
            }
        }
        if r == 1 {
            return m;
        }
        m += 1;
    }
}

/// Number of physical points used for a field with `num_modes` modes.
pub fn grid_size(num_modes: usize, oversample: usize) -> Result<usize> {
    if oversample == 0 {
        return Err(invalid("oversample factor must be at least 1"));
    }
    let requested = oversample
        .checked_mul(2 * num_modes + 1)
        .ok_or(GdnlsError::GridTooLarge {
            requested: usize::MAX,
            max: MAX_GRID_POINTS,
        })?;
    if requested > MAX_GRID_POINTS {
        return Err(GdnlsError::GridTooLarge {
            requested,
            max: MAX_GRID_POINTS,
        });
    }
    Ok(fft_friendly_size(requested))
}

/// Samples `f` at `x_j = 2πj/M`, `j = 0..M`, where `M = grid_size(N, oversample)`.
pub fn to_physical(f: &SpectralField, oversample: usize) -> Result<Vec<Complex64>> {
    let m = grid_size(f.num_modes, oversample)?;
    Ok(to_physical_on(f, m))
}

pub(crate) fn to_physical_on(f: &SpectralField, m: usize) -> Vec<Complex64> {
    debug_assert!(m > 2 * f.num_modes);
    let mut buf = vec![Complex64::new(0.0, 0.0); m];
    for (k, c) in f.modes() {
        buf[k.rem_euclid(m as i64) as usize] = c;
    }
    plans(m).1.process(&mut buf);
    buf
}

/// Projects grid samples onto wavenumbers `-N..=N` (exact for band-limited data
/// when the grid has more than `2N` points).
pub fn to_spectral(values: &[Complex64], num_modes: usize) -> Result<SpectralField> {
    let m = values.len();
    if m <= 2 * num_modes {
        return Err(invalid(format!(
            "{m} grid points cannot resolve {num_modes} modes"
        )));
    }
    let mut buf = values.to_vec();
    plans(m).0.process(&mut buf);
    let scale = 1.0 / m as f64;
    let n = num_modes as i64;
    let coeffs = (-n..=n)
        .map(|k| buf[k.rem_euclid(m as i64) as usize] * scale)
        .collect();
    SpectralField::from_coeffs(coeffs)
}

/// Trapezoid rule for `∫_0^{2π} g dx` from `M` equispaced samples.
pub fn grid_integral(samples: impl Iterator<Item = f64>, m: usize) -> f64 {
    TWO_PI / m as f64 * samples.sum::<f64>()
}

// ---------------------------------------------------------------------------
// Operators and norms

/// Sharp projection `J_ε`: zero every mode with `|k| > K`.
pub fn project(f: &SpectralField, cutoff: Cutoff) -> Result<SpectralField> {
    cutoff.check_against(f.num_modes)?;
    Ok(project_unchecked(f, cutoff))
}

pub(crate) fn project_unchecked(f: &SpectralField, cutoff: Cutoff) -> SpectralField {
    if cutoff.is_identity_on(f.num_modes) {
        return f.clone();
    }
    f.map_modes(|k, c| if cutoff.keeps(k) { c } else { Complex64::new(0.0, 0.0) })
}

pub fn hs_norm(f: &SpectralField, s: SobolevIndex) -> f64 {
    (TWO_PI * f.modes().map(|(k, c)| s.weight(k) * c.norm_sqr()).sum::<f64>()).sqrt()
}

/// `‖J f‖_{H^s} / (K^s ‖f‖_{L²})`, bounded by √2 for every `K ≥ 1`.
pub fn mollifier_gain_probe(f: &SpectralField, s: SobolevIndex, cutoff: Cutoff) -> Result<f64> {
    let k = cutoff
        .modes()
        .ok_or_else(|| invalid("gain probe needs a finite cutoff"))?;
    if k == 0 {
        return Err(invalid("gain probe needs K ≥ 1"));
    }
    let l2 = f.l2_norm();
    if l2 == 0.0 {
        return Err(GdnlsError::ZeroField);
    }
    let projected = project(f, cutoff)?;
    Ok(hs_norm(&projected, s) / ((k as f64).powf(s.value()) * l2))
}

/// Constant in the interpolation inequality checked by [`interpolation_check`].
pub const INTERPOLATION_CONSTANT: f64 = std::f64::consts::SQRT_2;

/// Both sides of `‖f‖_{H^m} ≤ √2 ‖f‖_{H^l}^{m/l} ‖f‖_{L²}^{1-m/l}`.
pub fn interpolation_sides(f: &SpectralField, m: SobolevIndex, l: SobolevIndex) -> Result<(f64, f64)> {
    if m > l {
        return Err(invalid(format!(
            "interpolation needs m ≤ l, got m = {}, l = {}",
            m.value(),
            l.value()
        )));
    }
    let l2 = f.l2_norm();
    if l2 == 0.0 {
        return Err(GdnlsError::ZeroField);
    }
    let theta = if l.value() == 0.0 { 1.0 } else { m.value() / l.value() };
    let lhs = hs_norm(f, m);
    let rhs = INTERPOLATION_CONSTANT * hs_norm(f, l).powf(theta) * l2.powf(1.0 - theta);
    Ok((lhs, rhs))
}

pub fn interpolation_check(f: &SpectralField, m: SobolevIndex, l: SobolevIndex) -> Result<bool> {
    let (lhs, rhs) = interpolation_sides(f, m, l)?;
    Ok(lhs <= rhs)
}

/// Free Schrödinger flow `e^{i J ∂_x² t}`: mode `k` picks up `e^{-ik²t}` when kept
/// by the cutoff and is left untouched otherwise.
pub fn free_semigroup(f: &SpectralField, t: f64, cutoff: Cutoff) -> SpectralField {
    if t == 0.0 {
        return f.clone();
    }
    f.map_modes(|k, c| {
        if cutoff.keeps(k) {
            c * Complex64::from_polar(1.0, -((k * k) as f64) * t)
        } else {
            c
        }
    })
}
