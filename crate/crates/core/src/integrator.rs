//! Integrating-factor time stepping of the mollified system.
//!
//! With `S(t) = e^{iJ∂_x²t}` the solution is written `u = S(t) w`, so the
//! stepper only sees `w' = S(-t) N(S(t) w)` where `N(u) = -J(|Ju|^{2σ}(Ju)_x)`.
//! The dispersive part is advanced exactly.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{invalid, GdnlsError, Result};
use crate::invariants::InvariantRecord;
use crate::model::{nonlinear_rhs, nonlinearity, ModelParams};
use crate::spectral::{free_semigroup, hs_norm, project_unchecked, SobolevIndex, SpectralField};

/// Largest accepted time step.
pub const MAX_DT: f64 = 0.5;

/// Largest snapshot spacing accepted by [`duhamel_residual`].
pub const DUHAMEL_MAX_SPACING: f64 = 0.01;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum Scheme {
    #[default]
    IfRk4,
    IfEuler,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SolverConfig {
    pub dt: f64,
    pub t_final: f64,
    #[serde(default)]
    pub scheme: Scheme,
    #[serde(default = "default_every")]
    pub snapshot_every: usize,
    #[serde(default = "default_every")]
    pub invariant_every: usize,
    #[serde(default = "default_blowup_threshold")]
    pub blowup_threshold: f64,
}

fn default_every() -> usize {
    10
}

fn default_blowup_threshold() -> f64 {
    1e8
}

impl SolverConfig {
    pub fn new(dt: f64, t_final: f64) -> Self {
        Self {
            dt,
            t_final,
            scheme: Scheme::IfRk4,
            snapshot_every: default_every(),
            invariant_every: default_every(),
            blowup_threshold: default_blowup_threshold(),
        }
    }

    /// Snapshots and invariants every `every` steps.
    pub fn sampled_every(mut self, every: usize) -> Self {
        self.snapshot_every = every;
        self.invariant_every = every;
        self
    }

    pub fn with_scheme(mut self, scheme: Scheme) -> Self {
        self.scheme = scheme;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.dt > 0.0 && self.dt.is_finite()) {
            return Err(invalid(format!("dt must be positive, got {}", self.dt)));
        }
        if self.dt > MAX_DT {
            return Err(invalid(format!("dt = {} exceeds the maximum {MAX_DT}", self.dt)));
        }
        if !(self.t_final > 0.0 && self.t_final.is_finite()) {
            return Err(invalid(format!("t_final must be positive, got {}", self.t_final)));
        }
        if self.dt > self.t_final {
            return Err(invalid(format!(
                "dt = {} exceeds t_final = {}",
                self.dt, self.t_final
            )));
        }
        if self.snapshot_every == 0 || self.invariant_every == 0 {
            return Err(invalid("snapshot_every and invariant_every must be at least 1"));
        }
        if !(self.blowup_threshold > 0.0) {
            return Err(invalid("blowup_threshold must be positive"));
        }
        Ok(())
    }

    pub fn num_steps(&self) -> usize {
        ((self.t_final / self.dt) - 1e-9).ceil().max(1.0) as usize
    }

    fn step_size(&self, index: usize) -> f64 {
        let n = self.num_steps();
        if index + 1 == n {
            self.t_final - (n - 1) as f64 * self.dt
        } else {
            self.dt
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Termination {
    Completed,
    BlowupAbort,
    NonfiniteAbort,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Snapshot {
    pub t: f64,
    pub field: SpectralField,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Trajectory {
    pub params: ModelParams,
    pub config: SolverConfig,
    pub snapshots: Vec<Snapshot>,
    pub invariant_trace: Vec<InvariantRecord>,
    pub termination: Termination,
}

impl Trajectory {
    pub fn initial(&self) -> &SpectralField {
        &self.snapshots[0].field
    }

    pub fn last(&self) -> &Snapshot {
        self.snapshots.last().expect("trajectory always holds the initial snapshot")
    }

    pub fn completed(&self) -> bool {
        self.termination == Termination::Completed
    }

    pub fn times(&self) -> Vec<f64> {
        self.snapshots.iter().map(|s| s.t).collect()
    }
}

fn rk4(u: &SpectralField, p: &ModelParams, h: f64) -> Result<SpectralField> {
    let half = free_semigroup(u, 0.5 * h, p.cutoff);
    let hc = |x: f64| Complex64::new(x, 0.0);

    let k1 = nonlinear_rhs(u, p)?;
    let k2 = nonlinear_rhs(&free_semigroup(&u.axpy(hc(0.5 * h), &k1), 0.5 * h, p.cutoff), p)?;
    let k3 = nonlinear_rhs(&half.axpy(hc(0.5 * h), &k2), p)?;
    let k4 = nonlinear_rhs(
        &free_semigroup(&half, 0.5 * h, p.cutoff).axpy(hc(h), &free_semigroup(&k3, 0.5 * h, p.cutoff)),
        p,
    )?;

    // S(h) u + h/6 (S(h) k1 + 2 S(h/2)(k2 + k3) + k4)
    let outer = free_semigroup(&u.axpy(hc(h / 6.0), &k1), h, p.cutoff);
    let mid = free_semigroup(&(&k2 + &k3), 0.5 * h, p.cutoff);
    Ok(outer.axpy(hc(h / 3.0), &mid).axpy(hc(h / 6.0), &k4))
}

fn euler(u: &SpectralField, p: &ModelParams, h: f64) -> Result<SpectralField> {
    let k1 = nonlinear_rhs(u, p)?;
    Ok(free_semigroup(&u.axpy(Complex64::new(h, 0.0), &k1), h, p.cutoff))
}

/// Advances `f` by `dt` (negative `dt` integrates the time-reversed system).
pub fn step_with(f: &SpectralField, p: &ModelParams, dt: f64, scheme: Scheme) -> Result<SpectralField> {
    let out = match scheme {
        Scheme::IfRk4 => rk4(f, p, dt)?,
        Scheme::IfEuler => euler(f, p, dt)?,
    };
    out.check_finite()?;
    Ok(out)
}

/// One integrating-factor RK4 step.
pub fn step(f: &SpectralField, p: &ModelParams, dt: f64) -> Result<SpectralField> {
    if !(dt > 0.0) {
        return Err(invalid(format!("step size must be positive, got {dt}")));
    }
    if dt > MAX_DT {
        return Err(invalid(format!("dt = {dt} exceeds the maximum {MAX_DT}")));
    }
    step_with(f, p, dt, Scheme::IfRk4)
}

pub fn evolve(u0: &SpectralField, p: &ModelParams, cfg: &SolverConfig) -> Result<Trajectory> {
    run(u0, p, cfg, 1.0)
}

/// Integrates `-iv_s + i|v|^{2σ}v_x + v_xx = 0` (the original system run
/// backwards in time) from `v(0) = u_t`.
pub fn evolve_reversed(u_t: &SpectralField, p: &ModelParams, cfg: &SolverConfig) -> Result<Trajectory> {
    run(u_t, p, cfg, -1.0)
}

fn run(u0: &SpectralField, p: &ModelParams, cfg: &SolverConfig, direction: f64) -> Result<Trajectory> {
    p.validate()?;
    cfg.validate()?;
    p.check_field(u0)?;
    u0.check_finite()?;
    let h2 = hs_norm(u0, SobolevIndex::H2);
    if h2 >= cfg.blowup_threshold {
        return Err(invalid(format!(
            "blowup_threshold {} must exceed the initial H² norm {h2}",
            cfg.blowup_threshold
        )));
    }

    let n_steps = cfg.num_steps();
    let mut traj = Trajectory {
        params: *p,
        config: *cfg,
        snapshots: vec![Snapshot { t: 0.0, field: u0.clone() }],
        invariant_trace: vec![InvariantRecord::measure(0.0, u0, p)?],
        termination: Termination::Completed,
    };

    let mut u = u0.clone();
    for i in 0..n_steps {
        let h = cfg.step_size(i);
        u = match step_with(&u, p, direction * h, cfg.scheme) {
            Ok(next) => next,
            Err(GdnlsError::NonFinite { .. }) => {
                traj.termination = Termination::NonfiniteAbort;
                return Ok(traj);
            }
            Err(e) => return Err(e),
        };
        let n = i + 1;
        let t = if n == n_steps { cfg.t_final } else { n as f64 * cfg.dt };
        let blowup = hs_norm(&u, SobolevIndex::H2) > cfg.blowup_threshold;
        let last = n == n_steps || blowup;

        if n % cfg.snapshot_every == 0 || last {
            traj.snapshots.push(Snapshot { t, field: u.clone() });
        }
        if n % cfg.invariant_every == 0 || last {
            let rec = InvariantRecord::measure(t, &u, p)?;
            if !rec.is_finite() {
                traj.termination = Termination::NonfiniteAbort;
                return Ok(traj);
            }
            traj.invariant_trace.push(rec);
        }
        if blowup {
            traj.termination = Termination::BlowupAbort;
            return Ok(traj);
        }
    }
    Ok(traj)
}

/// `J(|Ju|^{2σ} (Ju)_x)`, the Duhamel integrand before the semigroup.
fn duhamel_source(u: &SpectralField, p: &ModelParams) -> Result<SpectralField> {
    if p.linear_only {
        return Ok(SpectralField::zeros(u.num_modes()));
    }
    let v = project_unchecked(u, p.cutoff);
    Ok(project_unchecked(&nonlinearity(&v, p)?, p.cutoff))
}

/// Composite Simpson weights on `n` intervals of width `h`; an odd interval
/// count closes with a 3/8 panel, a single interval falls back to the trapezoid.
fn simpson_weights(n: usize, h: f64) -> Vec<f64> {
    let mut w = vec![0.0; n + 1];
    match n {
        0 => {}
        1 => {
            w[0] = 0.5 * h;
            w[1] = 0.5 * h;
        }
        _ => {
            let simpson_end = if n.is_multiple_of(2) { n } else { n - 3 };
            for j in (0..simpson_end).step_by(2) {
                w[j] += h / 3.0;
                w[j + 1] += 4.0 * h / 3.0;
                w[j + 2] += h / 3.0;
            }
            if simpson_end < n {
                let j = simpson_end;
                w[j] += 3.0 * h / 8.0;
                w[j + 1] += 9.0 * h / 8.0;
                w[j + 2] += 9.0 * h / 8.0;
                w[j + 3] += 3.0 * h / 8.0;
            }
        }
    }
    w
}

/// `‖u(t) - [S(t)u₀ - ∫₀ᵗ S(t-s) J(|Ju|^{2σ}(Ju)_x) ds]‖_{L²}` at snapshot `t_index`,
/// with the time integral taken by composite Simpson over the stored snapshots.
pub fn duhamel_residual(traj: &Trajectory, t_index: usize) -> Result<f64> {
    duhamel_residual_with_spacing(traj, t_index, DUHAMEL_MAX_SPACING)
}

pub fn duhamel_residual_with_spacing(traj: &Trajectory, t_index: usize, max_spacing: f64) -> Result<f64> {
    if t_index >= traj.snapshots.len() {
        return Err(GdnlsError::InsufficientData(format!(
            "snapshot index {t_index} beyond the {} stored snapshots",
            traj.snapshots.len()
        )));
    }
    if t_index == 0 {
        return Ok(0.0);
    }
    let snaps = &traj.snapshots[..=t_index];
    let h = snaps[1].t - snaps[0].t;
    if h > max_spacing * (1.0 + 1e-9) {
        return Err(GdnlsError::InsufficientData(format!(
            "snapshot spacing {h} exceeds {max_spacing}"
        )));
    }
    if snaps
        .windows(2)
        .any(|w| ((w[1].t - w[0].t) - h).abs() > 1e-9 * h.max(1.0))
    {
        return Err(GdnlsError::InsufficientData(
            "snapshots are not uniformly spaced".into(),
        ));
    }

    let p = &traj.params;
    let t = snaps[t_index].t;
    let weights = simpson_weights(t_index, h);
    let mut integral = SpectralField::zeros(snaps[0].field.num_modes());
    for (snap, w) in snaps.iter().zip(weights) {
        let src = free_semigroup(&duhamel_source(&snap.field, p)?, t - snap.t, p.cutoff);
        integral = integral.axpy(Complex64::new(w, 0.0), &src);
    }
    let mild = &free_semigroup(&snaps[0].field, t, p.cutoff) - &integral;
    Ok((&snaps[t_index].field - &mild).l2_norm())
}
