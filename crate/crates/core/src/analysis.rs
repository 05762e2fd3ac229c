//! Long-time diagnostics.
//!
//! Asymptotic quantities are estimated over a trailing window of a finite run:
//! `L₁, l₁` are the largest/smallest per-sample spatial max/min of `u` in the
//! window, `L₂, l₂` the same for `v`. Persistence floors are reported as the
//! measured minima; they are empirical, not certified.

use std::fmt;

use thiserror::Error;

use crate::model::{ExtremaTable, FieldState, ModelError, ModelParams};
use crate::pde::{simulate, state_distance, Model, SimError, SimFailure, StepperConfig, TrajectorySummary};

pub const MIN_TAIL_SAMPLES: usize = 10;
pub const DEFAULT_TAIL_FRACTION: f64 = 0.2;
pub const DEFAULT_EPS_EXTINCTION: f64 = 1e-4;
pub const DEFAULT_ETA_PERSISTENCE: f64 = 1e-2;
/// Period used for the Poincaré map when every coefficient is constant in time.
pub const DEFAULT_AUTONOMOUS_PERIOD: f64 = 1.0;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum AnalysisError {
    #[error("tail window holds {found} samples, need at least {needed}")]
    TooFewTailSamples { found: usize, needed: usize },
    #[error("tail_fraction must be in (0, 1) (got {0})")]
    InvalidTailFraction(f64),
    #[error("{what} must be positive (got {value})")]
    NonPositiveDenominator { what: &'static str, value: f64 },
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum PoincareError {
    #[error("period map did not converge after {iterations} iterations (best residual {best_residual:e})")]
    NonConvergence {
        iterations: usize,
        best_residual: f64,
        best: Box<FieldState>,
    },
    #[error("initial guess must be positive everywhere")]
    NonPositiveGuess,
    #[error("invalid iteration settings: {0}")]
    InvalidSettings(String),
    #[error(transparent)]
    Model(#[from] ModelError),
    #[error(transparent)]
    Simulation(#[from] SimError),
}

impl From<SimFailure> for PoincareError {
    fn from(f: SimFailure) -> Self {
        PoincareError::Simulation(f.error)
    }
}

/// Tail-window extrema. `u_upper`/`u_lower` estimate `L₁`/`l₁`, `v_upper`/`v_lower`
/// estimate `L₂`/`l₂`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TailStats {
    pub u_upper: f64,
    pub u_lower: f64,
    pub v_upper: f64,
    pub v_lower: f64,
    pub w_upper: f64,
    pub w_lower: f64,
    pub tail_fraction: f64,
    pub samples: usize,
}

pub fn tail_stats(summary: &TrajectorySummary, tail_fraction: f64) -> Result<TailStats, AnalysisError> {
    if !(tail_fraction > 0.0 && tail_fraction < 1.0) {
        return Err(AnalysisError::InvalidTailFraction(tail_fraction));
    }
    let (t0, t1) = (summary.t_start(), summary.t_final());
    let cut = t0 + (1.0 - tail_fraction) * (t1 - t0);
    let slack = 1e-12 * cut.abs().max(1.0);
    let tail: Vec<_> = summary.samples.iter().filter(|s| s.t >= cut - slack).collect();
    if tail.len() < MIN_TAIL_SAMPLES {
        return Err(AnalysisError::TooFewTailSamples {
            found: tail.len(),
            needed: MIN_TAIL_SAMPLES,
        });
    }
    let fold_max = |f: fn(&crate::pde::Sample) -> f64| tail.iter().map(|s| f(s)).fold(f64::NEG_INFINITY, f64::max);
    let fold_min = |f: fn(&crate::pde::Sample) -> f64| tail.iter().map(|s| f(s)).fold(f64::INFINITY, f64::min);
    Ok(TailStats {
        u_upper: fold_max(|s| s.max_u),
        u_lower: fold_min(|s| s.min_u),
        v_upper: fold_max(|s| s.max_v),
        v_lower: fold_min(|s| s.min_v),
        w_upper: fold_max(|s| s.max_w),
        w_lower: fold_min(|s| s.min_w),
        tail_fraction,
        samples: tail.len(),
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum VerdictLabel {
    ExtinctionOfU,
    Persistence,
    Indeterminate,
}

impl fmt::Display for VerdictLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            VerdictLabel::ExtinctionOfU => "ExtinctionOfU",
            VerdictLabel::Persistence => "Persistence",
            VerdictLabel::Indeterminate => "Indeterminate",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Evidence {
    pub stats: TailStats,
    pub eps_extinction: f64,
    pub eta_persistence: f64,
}

impl Evidence {
    pub fn label(&self) -> VerdictLabel {
        let s = &self.stats;
        if s.u_upper < self.eps_extinction && s.v_lower > self.eta_persistence {
            VerdictLabel::ExtinctionOfU
        } else if s.u_lower > self.eta_persistence && s.v_lower > self.eta_persistence {
            VerdictLabel::Persistence
        } else {
            VerdictLabel::Indeterminate
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Verdict {
    pub label: VerdictLabel,
    pub evidence: Evidence,
}

impl Verdict {
    /// Label recomputed from the stored evidence.
    pub fn rederive(&self) -> VerdictLabel {
        self.evidence.label()
    }

    /// Measured persistence floors `(min u, min v)` over the tail window.
    pub fn empirical_floors(&self) -> (f64, f64) {
        (self.evidence.stats.u_lower, self.evidence.stats.v_lower)
    }
}

/// Thresholds are expected positive with `eps_extinction < eta_persistence`.
pub fn classify(stats: &TailStats, eps_extinction: f64, eta_persistence: f64) -> Verdict {
    let evidence = Evidence {
        stats: *stats,
        eps_extinction,
        eta_persistence,
    };
    Verdict {
        label: evidence.label(),
        evidence,
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BandCheck {
    pub v_band: bool,
    pub w_band: bool,
}

impl BandCheck {
    pub fn holds(&self) -> bool {
        self.v_band && self.w_band
    }
}

/// Checks `α − tol ≤ l₂`, `L₂ ≤ β + tol`, and the signal band
/// `lα − tol ≤ λ·min w`, `λ·max w ≤ lβ + tol`.
pub fn check_extinction_limits(stats: &TailStats, alpha: f64, beta: f64, tol: f64, p: &ModelParams) -> BandCheck {
    BandCheck {
        v_band: stats.v_lower >= alpha - tol && stats.v_upper <= beta + tol,
        w_band: p.lambda * stats.w_lower >= p.l * alpha - tol && p.lambda * stats.w_upper <= p.l * beta + tol,
    }
}

/// Upper bound on `L₁` given the lower tail value `l₂` of the surviving species:
/// `{a₀,sup − a₂,inf·l₂}₊ / (a₁,inf − χ₁k/d₃)`.
pub fn extinction_tail_bound(e: &ExtremaTable, p: &ModelParams, v_lower: f64) -> Result<f64, AnalysisError> {
    let den = e.a1.inf - p.k_chi1();
    if den <= 0.0 {
        return Err(AnalysisError::NonPositiveDenominator {
            what: "a1_inf - chi1 k / d3",
            value: den,
        });
    }
    Ok((e.a0.sup - e.a2.inf * v_lower).max(0.0) / den)
}

/// Bound on the total mass of `u`: `max(∫u₀, |Ω|·a₀,sup/a₁,inf)`.
pub fn mass_bound_u(e: &ExtremaTable, initial_mass: f64, volume: f64) -> Result<f64, AnalysisError> {
    if e.a1.inf <= 0.0 {
        return Err(AnalysisError::NonPositiveDenominator {
            what: "a1_inf",
            value: e.a1.inf,
        });
    }
    Ok(initial_mass.max(volume * e.a0.sup / e.a1.inf))
}

#[derive(Debug, Clone, PartialEq)]
pub struct PeriodicState {
    /// Fixed point of the period map, stamped with the start time.
    pub state: FieldState,
    pub period: f64,
    /// `‖Φ(z) − z‖_∞` at the accepted iterate.
    pub residual: f64,
    /// Distance after one further period from the returned state.
    pub verification_residual: f64,
    pub iterations: usize,
    /// Smallest `u` and `v` seen over the verification period.
    pub empirical_floors: (f64, f64),
    /// Whether the verification period stays inside `(0, Ā]` (or `(0, B̄]`);
    /// `None` when neither persistence hypothesis holds.
    pub within_attracting_rect: Option<bool>,
}

/// Period of the map: the common temporal period of the coefficients, or
/// [`DEFAULT_AUTONOMOUS_PERIOD`] when none is time dependent.
pub fn map_period(model: &Model) -> Result<f64, ModelError> {
    Ok(model
        .coefficients()
        .common_period()?
        .unwrap_or(DEFAULT_AUTONOMOUS_PERIOD))
}

fn advance_period(
    model: &Model,
    z: &FieldState,
    period: f64,
    stepper: &StepperConfig,
) -> Result<TrajectorySummary, PoincareError> {
    Ok(simulate(model, z, z.t + period, stepper, period / 8.0)?)
}

/// Picard iteration of the period map until `‖Φ(z) − z‖_∞ ≤ tol`.
pub fn poincare_fixed_point(
    model: &Model,
    guess: &FieldState,
    stepper: &StepperConfig,
    tol: f64,
    max_iter: usize,
) -> Result<PeriodicState, PoincareError> {
    if !(tol > 0.0) || max_iter == 0 {
        return Err(PoincareError::InvalidSettings(format!(
            "tol = {tol}, max_iter = {max_iter}"
        )));
    }
    if guess.u.iter().chain(&guess.v).any(|&x| !(x > 0.0)) {
        return Err(PoincareError::NonPositiveGuess);
    }
    let period = map_period(model)?;
    let t0 = guess.t;
    let mut z = model.prepare(guess)?;
    let mut best = (f64::INFINITY, z.clone());
    for iteration in 1..=max_iter {
        let mut next = advance_period(model, &z, period, stepper)?.final_state;
        next.t = t0;
        let residual = state_distance(&next, &z);
        if residual < best.0 {
            best = (residual, z.clone());
        }
        z = next;
        if residual <= tol {
            let check = advance_period(model, &z, period, stepper)?;
            let verification_residual = state_distance(&check.final_state, &z);
            let u_min = check.samples.iter().map(|s| s.min_u).fold(f64::INFINITY, f64::min);
            let v_min = check.samples.iter().map(|s| s.min_v).fold(f64::INFINITY, f64::min);
            let u_max = check.samples.iter().map(|s| s.max_u).fold(0.0, f64::max);
            let v_max = check.samples.iter().map(|s| s.max_v).fold(0.0, f64::max);
            let report = model.report();
            let slack = 1e-6;
            let within_attracting_rect = report
                .upper_bounds()
                .filter(|_| report.h4.holds || report.h5.holds)
                .map(|(bu, bv)| u_min > 0.0 && v_min > 0.0 && u_max <= bu + slack && v_max <= bv + slack);
            return Ok(PeriodicState {
                state: z,
                period,
                residual,
                verification_residual,
                iterations: iteration,
                empirical_floors: (u_min, v_min),
                within_attracting_rect,
            });
        }
    }
    Err(PoincareError::NonConvergence {
        iterations: max_iter,
        best_residual: best.0,
        best: Box::new(best.1),
    })
}
