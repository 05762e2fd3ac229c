//! Time integration of the two species equations coupled to the elliptic
//! signal equation.
//!
//! One step of size `dt` is a Lie splitting:
//!
//! 1. transport: the upwinded chemotactic flux divergence is applied
//!    explicitly and diffusion implicitly, `(I − dt·d Δ_N) u* = u − dt ∇·J`;
//! 2. reaction: the pointwise kinetic system is advanced over `[t, t+dt]` with
//!    one explicit RK4 step, using the coefficients at `t`, `t+dt/2`, `t+dt`;
//! 3. tiny negatives are clamped, and `w` is re-solved from the new `(u, v)`.
//!
//! For spatially constant data and coefficients the transport stage is the
//! identity, so the scheme reduces to RK4 on the kinetic ODE.

use thiserror::Error;

use crate::elliptic::{max_abs, EllipticOperator, NeumannHelmholtz, SolveError};
use crate::hypothesis::HypothesisReport;
use crate::model::{CoefficientBundle, ExtremaTable, FieldState, Grid, ModelError, ModelParams, COEFFICIENT_NAMES};

/// Any nodal magnitude above this is treated as blow-up.
pub const BLOW_UP_THRESHOLD: f64 = 1e12;
/// Largest admissible residual of the carried signal before a step.
pub const SIGNAL_CONSISTENCY_TOL: f64 = 1e-8;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum SimError {
    #[error("blow-up at t = {t}: |{species}| reached {value:e}")]
    BlowUp { t: f64, species: &'static str, value: f64 },
    #[error("positivity violated at t = {t}: {species} = {value:e}")]
    Positivity { t: f64, species: &'static str, value: f64 },
    #[error("signal inconsistent with densities at t = {t} (residual {residual:e})")]
    InconsistentSignal { t: f64, residual: f64 },
    #[error("invalid step: {0}")]
    InvalidStep(String),
    #[error(transparent)]
    Solve(#[from] SolveError),
    #[error(transparent)]
    Model(#[from] ModelError),
}

impl SimError {
    /// Failure time, when the error happened during integration.
    pub fn time(&self) -> Option<f64> {
        match self {
            SimError::BlowUp { t, .. } | SimError::Positivity { t, .. } | SimError::InconsistentSignal { t, .. } => {
                Some(*t)
            }
            _ => None,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StepperConfig {
    pub dt_max: f64,
    /// Fraction of the stability bounds actually used. Positivity of the
    /// upwind transport is guaranteed for `safety <= 1/(2·dim)`.
    pub safety: f64,
    pub tol_neg: f64,
    pub clamp_small: bool,
}

impl Default for StepperConfig {
    fn default() -> Self {
        Self {
            dt_max: 0.01,
            safety: 0.25,
            tol_neg: 1e-12,
            clamp_small: true,
        }
    }
}

impl StepperConfig {
    pub fn validate(&self) -> Result<(), SimError> {
        if !(self.dt_max > 0.0 && self.dt_max.is_finite()) {
            return Err(SimError::InvalidStep(format!(
                "dt_max must be > 0, got {}",
                self.dt_max
            )));
        }
        if !(self.safety > 0.0 && self.safety <= 1.0) {
            return Err(SimError::InvalidStep(format!(
                "safety must lie in (0, 1], got {}",
                self.safety
            )));
        }
        if !(self.tol_neg >= 0.0) {
            return Err(SimError::InvalidStep(format!(
                "tol_neg must be >= 0, got {}",
                self.tol_neg
            )));
        }
        Ok(())
    }
}

/// Parameters, coefficients and grid of one scenario, with the operators and
/// coefficient profiles precomputed.
#[derive(Debug, Clone)]
pub struct Model {
    params: ModelParams,
    coefficients: CoefficientBundle,
    grid: Grid,
    extrema: ExtremaTable,
    elliptic: EllipticOperator,
    /// Spatial parts of the six coefficients at every node, storage order a0..b2.
    profiles: [Vec<f64>; 6],
}

impl Model {
    pub fn new(params: ModelParams, coefficients: CoefficientBundle, grid: Grid) -> Result<Self, SimError> {
        params.validate()?;
        let extrema = coefficients.extrema()?;
        for (field, name) in coefficients.fields().iter().zip(COEFFICIENT_NAMES) {
            for axis in grid.dim()..field.spatial_amplitude.len() {
                if field.spatial_amplitude[axis] != 0.0 {
                    return Err(ModelError::MalformedCoefficient {
                        name: name.to_string(),
                        reason: format!("spatial modulation on axis {axis} of a {}D grid", grid.dim()),
                    }
                    .into());
                }
            }
        }
        let elliptic = EllipticOperator::new(&grid, &params)?;
        let profiles = coefficients
            .fields()
            .map(|f| grid.sample(|x| f.spatial_part(x, grid.lengths())));
        Ok(Self {
            params,
            coefficients,
            grid,
            extrema,
            elliptic,
            profiles,
        })
    }

    pub fn params(&self) -> &ModelParams {
        &self.params
    }

    pub fn coefficients(&self) -> &CoefficientBundle {
        &self.coefficients
    }

    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    pub fn extrema(&self) -> &ExtremaTable {
        &self.extrema
    }

    pub fn elliptic(&self) -> &EllipticOperator {
        &self.elliptic
    }

    pub fn report(&self) -> HypothesisReport {
        HypothesisReport::evaluate(&self.extrema, &self.params, self.grid.dim() as u32)
    }

    /// Space-independent parts `base + temporal(t)` of the six coefficients.
    fn temporal_values(&self, t: f64) -> [f64; 6] {
        self.coefficients.fields().map(|f| f.base + f.temporal_part(t))
    }

    /// Coefficient values at node `i` given the temporal values at some time.
    fn node_rates(&self, temporal: &[f64; 6], i: usize) -> [f64; 6] {
        std::array::from_fn(|c| temporal[c] + self.profiles[c][i])
    }

    /// Copies `u, v` from `init` and solves the matching signal.
    pub fn prepare(&self, init: &FieldState) -> Result<FieldState, SimError> {
        if init.len() != self.grid.len() {
            return Err(ModelError::InvalidState(format!(
                "state has {} nodes, grid has {}",
                init.len(),
                self.grid.len()
            ))
            .into());
        }
        init.check(0.0)?;
        let w = self.elliptic.solve_w(&init.u, &init.v)?;
        Ok(FieldState {
            t: init.t,
            u: init.u.clone(),
            v: init.v.clone(),
            w,
        })
    }

    /// State from nodal densities at time `t`, with its signal.
    pub fn initial_state(&self, t: f64, u: Vec<f64>, v: Vec<f64>) -> Result<FieldState, SimError> {
        self.prepare(&FieldState::new(t, u, v)?)
    }
}

/// Chemotactic fluxes through the interior faces of the grid.
///
/// `x[j * (nx-1) + i]` is the face between nodes `(i, j)` and `(i+1, j)`;
/// `y[j * nx + i]` the face between `(i, j)` and `(i, j+1)`. Boundary faces
/// carry no flux and are not stored.
#[derive(Debug, Clone, PartialEq)]
pub struct FaceFlux {
    pub x: Vec<f64>,
    pub y: Vec<f64>,
}

/// Face flux `χ · ρ_up · Δw/h`, the density taken from the upwind side of the
/// face as given by the sign of the `w` difference.
pub fn chemotaxis_flux(grid: &Grid, density: &[f64], w: &[f64], chi: f64) -> FaceFlux {
    let nx = grid.counts()[0];
    let ny = if grid.dim() == 2 { grid.counts()[1] } else { 1 };
    let face = |a: usize, b: usize, h: f64| {
        let dw = w[b] - w[a];
        if chi == 0.0 || dw == 0.0 {
            return 0.0;
        }
        let upwind = if dw > 0.0 { density[a] } else { density[b] };
        chi * upwind * dw / h
    };
    let hx = grid.spacing()[0];
    let mut x = Vec::with_capacity((nx - 1) * ny);
    for j in 0..ny {
        for i in 0..nx - 1 {
            x.push(face(j * nx + i, j * nx + i + 1, hx));
        }
    }
    let mut y = Vec::new();
    if grid.dim() == 2 {
        let hy = grid.spacing()[1];
        y.reserve(nx * (ny - 1));
        for j in 0..ny - 1 {
            for i in 0..nx {
                y.push(face(j * nx + i, (j + 1) * nx + i, hy));
            }
        }
    }
    FaceFlux { x, y }
}

/// Nodal divergence of face fluxes over the vertex control volumes (half
/// width at boundary nodes), consistent with the trapezoidal rule.
pub fn flux_divergence(grid: &Grid, flux: &FaceFlux) -> Vec<f64> {
    let nx = grid.counts()[0];
    let ny = if grid.dim() == 2 { grid.counts()[1] } else { 1 };
    let mut div = vec![0.0; grid.len()];
    let hx = grid.spacing()[0];
    for j in 0..ny {
        for i in 0..nx {
            let right = if i + 1 < nx { flux.x[j * (nx - 1) + i] } else { 0.0 };
            let left = if i > 0 { flux.x[j * (nx - 1) + i - 1] } else { 0.0 };
            let width = if i == 0 || i + 1 == nx { 0.5 * hx } else { hx };
            div[j * nx + i] = (right - left) / width;
        }
    }
    if grid.dim() == 2 {
        let hy = grid.spacing()[1];
        for j in 0..ny {
            let width = if j == 0 || j + 1 == ny { 0.5 * hy } else { hy };
            for i in 0..nx {
                let up = if j + 1 < ny { flux.y[j * nx + i] } else { 0.0 };
                let down = if j > 0 { flux.y[(j - 1) * nx + i] } else { 0.0 };
                div[j * nx + i] += (up - down) / width;
            }
        }
    }
    div
}

/// Largest `|Δw|/h` over all interior faces, per axis.
fn max_signal_gradient(grid: &Grid, w: &[f64]) -> Vec<f64> {
    let nx = grid.counts()[0];
    let ny = if grid.dim() == 2 { grid.counts()[1] } else { 1 };
    let mut gx: f64 = 0.0;
    for j in 0..ny {
        for i in 0..nx - 1 {
            gx = gx.max((w[j * nx + i + 1] - w[j * nx + i]).abs());
        }
    }
    let mut out = vec![gx / grid.spacing()[0]];
    if grid.dim() == 2 {
        let mut gy: f64 = 0.0;
        for j in 0..ny - 1 {
            for i in 0..nx {
                gy = gy.max((w[(j + 1) * nx + i] - w[j * nx + i]).abs());
            }
        }
        out.push(gy / grid.spacing()[1]);
    }
    out
}

/// `safety · min(dt_max, h/max|face velocity|, 1/max|per-capita reaction rate|)`.
///
/// The reaction rate is `|a0 − a1 u − a2 v|` (resp. the `b` analogue) at nodes
/// where the species is present; absent constraints count as `+∞`.
pub fn adaptive_dt(state: &FieldState, model: &Model, stepper: &StepperConfig) -> f64 {
    let grid = model.grid();
    let p = model.params();
    let chi = p.chi1.max(p.chi2);
    let mut bound = stepper.dt_max;
    if chi > 0.0 {
        for (axis, g) in max_signal_gradient(grid, &state.w).into_iter().enumerate() {
            let velocity = chi * g;
            if velocity > 0.0 {
                bound = bound.min(grid.spacing()[axis] / velocity);
            }
        }
    }
    let temporal = model.temporal_values(state.t);
    let mut rate: f64 = 0.0;
    for i in 0..grid.len() {
        let [a0, a1, a2, b0, b1, b2] = model.node_rates(&temporal, i);
        let (u, v) = (state.u[i], state.v[i]);
        if u > 0.0 {
            rate = rate.max((a0 - a1 * u - a2 * v).abs());
        }
        if v > 0.0 {
            rate = rate.max((b0 - b1 * u - b2 * v).abs());
        }
    }
    if rate > 0.0 {
        bound = bound.min(1.0 / rate);
    }
    stepper.safety * bound
}

fn kinetics(r: &[f64; 6], u: f64, v: f64) -> (f64, f64) {
    (u * (r[0] - r[1] * u - r[2] * v), v * (r[3] - r[4] * u - r[5] * v))
}

/// Stateful stepper that caches the implicit diffusion operators for the
/// last step size used.
#[derive(Debug, Clone)]
pub struct Integrator<'m> {
    model: &'m Model,
    config: StepperConfig,
    diffusion: Option<(f64, NeumannHelmholtz, NeumannHelmholtz)>,
}

impl<'m> Integrator<'m> {
    pub fn new(model: &'m Model, config: StepperConfig) -> Result<Self, SimError> {
        config.validate()?;
        Ok(Self {
            model,
            config,
            diffusion: None,
        })
    }

    pub fn config(&self) -> &StepperConfig {
        &self.config
    }

    pub fn adaptive_dt(&self, state: &FieldState) -> f64 {
        adaptive_dt(state, self.model, &self.config)
    }

    fn diffusion_ops(&mut self, dt: f64) -> Result<(&NeumannHelmholtz, &NeumannHelmholtz), SimError> {
        let stale = !matches!(&self.diffusion, Some((cached, _, _)) if *cached == dt);
        if stale {
            let p = self.model.params();
            let template = self.model.elliptic().helmholtz();
            let du = template.reparametrized(1.0 / dt, p.d1)?;
            let dv = template.reparametrized(1.0 / dt, p.d2)?;
            self.diffusion = Some((dt, du, dv));
        }
        let (_, du, dv) = self.diffusion.as_ref().expect("diffusion operators cached");
        Ok((du, dv))
    }

    fn transport(
        &mut self,
        density: &[f64],
        w: &[f64],
        chi: f64,
        dt: f64,
        species: usize,
    ) -> Result<Vec<f64>, SimError> {
        let model = self.model;
        let grid = model.grid();
        let div = flux_divergence(grid, &chemotaxis_flux(grid, density, w, chi));
        // (1/dt) u* − d Δ u* = (u − dt ∇·J)/dt
        let rhs: Vec<f64> = density.iter().zip(&div).map(|(u, d)| u / dt - d).collect();
        let (du, dv) = self.diffusion_ops(dt)?;
        let op = if species == 0 { du } else { dv };
        Ok(op.solve(&rhs)?)
    }

    /// One IMEX step of size `dt`.
    pub fn step(&mut self, state: &FieldState, dt: f64) -> Result<FieldState, SimError> {
        if !(dt > 0.0 && dt.is_finite()) {
            return Err(SimError::InvalidStep(format!("dt must be > 0, got {dt}")));
        }
        let model = self.model;
        let residual = model.elliptic().residual_norm(&state.u, &state.v, &state.w);
        if !(residual <= SIGNAL_CONSISTENCY_TOL) {
            return Err(SimError::InconsistentSignal { t: state.t, residual });
        }
        let p = *model.params();
        let mut u = self.transport(&state.u, &state.w, p.chi1, dt, 0)?;
        let mut v = self.transport(&state.v, &state.w, p.chi2, dt, 1)?;

        let t0 = state.t;
        let t1 = t0 + dt;
        let c0 = model.temporal_values(t0);
        let ch = model.temporal_values(t0 + 0.5 * dt);
        let c1 = model.temporal_values(t1);
        for i in 0..u.len() {
            let (r0, rh, r1) = (
                model.node_rates(&c0, i),
                model.node_rates(&ch, i),
                model.node_rates(&c1, i),
            );
            let (u0, v0) = (u[i], v[i]);
            let k1 = kinetics(&r0, u0, v0);
            let k2 = kinetics(&rh, u0 + 0.5 * dt * k1.0, v0 + 0.5 * dt * k1.1);
            let k3 = kinetics(&rh, u0 + 0.5 * dt * k2.0, v0 + 0.5 * dt * k2.1);
            let k4 = kinetics(&r1, u0 + dt * k3.0, v0 + dt * k3.1);
            u[i] = u0 + dt / 6.0 * (k1.0 + 2.0 * k2.0 + 2.0 * k3.0 + k4.0);
            v[i] = v0 + dt / 6.0 * (k1.1 + 2.0 * k2.1 + 2.0 * k3.1 + k4.1);
        }

        for (species, values) in [("u", &mut u), ("v", &mut v)] {
            self.screen(species, values, t1)?;
        }
        let w = model.elliptic().solve_w(&u, &v)?;
        Ok(FieldState { t: t1, u, v, w })
    }

    fn screen(&self, species: &'static str, values: &mut [f64], t: f64) -> Result<(), SimError> {
        for x in values.iter_mut() {
            if !x.is_finite() || x.abs() > BLOW_UP_THRESHOLD {
                return Err(SimError::BlowUp {
                    t,
                    species,
                    value: x.abs(),
                });
            }
            if *x < -self.config.tol_neg {
                return Err(SimError::Positivity { t, species, value: *x });
            }
            if *x < 0.0 && self.config.clamp_small {
                *x = 0.0;
            }
        }
        Ok(())
    }
}

/// One IMEX step; see [`Integrator::step`].
pub fn step(state: &FieldState, model: &Model, stepper: &StepperConfig, dt: f64) -> Result<FieldState, SimError> {
    Integrator::new(model, *stepper)?.step(state, dt)
}

/// Per-sample diagnostics of a trajectory.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Sample {
    pub t: f64,
    pub min_u: f64,
    pub max_u: f64,
    pub min_v: f64,
    pub max_v: f64,
    pub min_w: f64,
    pub max_w: f64,
    pub mass_u: f64,
    pub mass_v: f64,
}

impl Sample {
    pub fn of(state: &FieldState, grid: &Grid) -> Self {
        let range = |x: &[f64]| {
            x.iter().fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &v| {
                (lo.min(v), hi.max(v))
            })
        };
        let (min_u, max_u) = range(&state.u);
        let (min_v, max_v) = range(&state.v);
        let (min_w, max_w) = range(&state.w);
        Self {
            t: state.t,
            min_u,
            max_u,
            min_v,
            max_v,
            min_w,
            max_w,
            mass_u: grid.integrate(&state.u),
            mass_v: grid.integrate(&state.v),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct TrajectorySummary {
    pub samples: Vec<Sample>,
    /// Full fields at the requested snapshot times.
    pub snapshots: Vec<FieldState>,
    pub final_state: FieldState,
    pub steps: usize,
}

impl TrajectorySummary {
    pub fn t_start(&self) -> f64 {
        self.samples.first().map_or(self.final_state.t, |s| s.t)
    }

    pub fn t_final(&self) -> f64 {
        self.samples.last().map_or(self.final_state.t, |s| s.t)
    }
}

/// A simulation that stopped early, with everything recorded until then.
#[derive(Debug, Clone, PartialEq, Error)]
#[error("{error}")]
pub struct SimFailure {
    pub error: SimError,
    pub partial: Option<TrajectorySummary>,
}

impl From<SimError> for SimFailure {
    fn from(error: SimError) -> Self {
        Self { error, partial: None }
    }
}

/// Absolute tolerance for landing on a scheduled time.
fn time_slack(t: f64) -> f64 {
    1e-12 * t.abs().max(1.0)
}

fn schedule(t0: f64, t_final: f64, sample_every: f64, snapshots: &[f64]) -> Vec<(f64, bool, bool)> {
    let mut times: Vec<(f64, bool, bool)> = Vec::new();
    let mut k = 1usize;
    loop {
        let t = t0 + k as f64 * sample_every;
        if t >= t_final - time_slack(t_final) {
            break;
        }
        times.push((t, true, false));
        k += 1;
    }
    times.push((t_final, true, false));
    for &s in snapshots {
        if s <= t0 + time_slack(t0) || s > t_final + time_slack(t_final) {
            continue;
        }
        match times.iter_mut().find(|(t, _, _)| (t - s).abs() <= time_slack(s)) {
            Some(entry) => entry.2 = true,
            None => times.push((s, false, true)),
        }
    }
    times.sort_by(|a, b| a.0.total_cmp(&b.0));
    times
}

/// Advances `init` to `t_final`, recording a [`Sample`] every `sample_every`
/// (and at both ends). Steps are clipped to land exactly on sample times.
pub fn simulate(
    model: &Model,
    init: &FieldState,
    t_final: f64,
    stepper: &StepperConfig,
    sample_every: f64,
) -> Result<TrajectorySummary, SimFailure> {
    simulate_with_snapshots(model, init, t_final, stepper, sample_every, &[])
}

/// [`simulate`], also keeping full fields at `snapshot_times`.
pub fn simulate_with_snapshots(
    model: &Model,
    init: &FieldState,
    t_final: f64,
    stepper: &StepperConfig,
    sample_every: f64,
    snapshot_times: &[f64],
) -> Result<TrajectorySummary, SimFailure> {
    if !(t_final > init.t) {
        return Err(SimError::InvalidStep(format!("t_final {t_final} must exceed start time {}", init.t)).into());
    }
    if !(sample_every > 0.0) {
        return Err(SimError::InvalidStep(format!("sample_every must be > 0, got {sample_every}")).into());
    }
    let mut integrator = Integrator::new(model, *stepper)?;
    let mut state = model.prepare(init)?;
    let grid = model.grid();
    let mut summary = TrajectorySummary {
        samples: vec![Sample::of(&state, grid)],
        snapshots: Vec::new(),
        final_state: state.clone(),
        steps: 0,
    };
    if snapshot_times.iter().any(|&s| (s - state.t).abs() <= time_slack(s)) {
        summary.snapshots.push(state.clone());
    }
    for (target, record, snapshot) in schedule(init.t, t_final, sample_every, snapshot_times) {
        while state.t < target - time_slack(target) {
            let mut dt = integrator.adaptive_dt(&state);
            if state.t + dt >= target - time_slack(target) {
                dt = target - state.t;
            }
            match integrator.step(&state, dt) {
                Ok(mut next) => {
                    if (next.t - target).abs() <= time_slack(target) {
                        next.t = target;
                    }
                    state = next;
                    summary.steps += 1;
                }
                Err(error) => {
                    summary.final_state = state;
                    return Err(SimFailure {
                        error,
                        partial: Some(summary),
                    });
                }
            }
        }
        if record {
            summary.samples.push(Sample::of(&state, grid));
        }
        if snapshot {
            summary.snapshots.push(state.clone());
        }
    }
    summary.final_state = state;
    Ok(summary)
}

/// Largest nodal difference between two states, over both species.
pub fn state_distance(a: &FieldState, b: &FieldState) -> f64 {
    let du: Vec<f64> = a.u.iter().zip(&b.u).map(|(x, y)| x - y).collect();
    let dv: Vec<f64> = a.v.iter().zip(&b.v).map(|(x, y)| x - y).collect();
    max_abs(&du).max(max_abs(&dv))
}
