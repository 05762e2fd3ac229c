//! Reference ODE systems and a fixed-step RK4 integrator.
//!
//! * the four-dimensional comparison system whose solution brackets the PDE
//!   extrema (upper/lower envelopes of `u` and `v`);
//! * the spatially homogeneous reduction of the full model;
//! * the chemotaxis-free Lotka–Volterra kinetics.

use thiserror::Error;

use crate::model::{CoefficientBundle, ModelParams, Rates};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum OdeError {
    #[error("coefficients vary in space; the homogeneous reduction needs uniform coefficients")]
    SpatiallyVarying,
    #[error("non-finite state at t = {t}")]
    NonFinite { t: f64 },
    #[error("invalid integration request: {0}")]
    InvalidRequest(String),
}

/// Upper and lower envelopes `(ū, u̲, v̄, v̲)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ComparisonState {
    pub u_bar: f64,
    pub u_under: f64,
    pub v_bar: f64,
    pub v_under: f64,
}

impl ComparisonState {
    pub fn to_array(self) -> [f64; 4] {
        [self.u_bar, self.u_under, self.v_bar, self.v_under]
    }

    pub fn from_array(a: [f64; 4]) -> Self {
        Self {
            u_bar: a[0],
            u_under: a[1],
            v_bar: a[2],
            v_under: a[3],
        }
    }

    pub fn is_ordered(&self) -> bool {
        0.0 <= self.u_under && self.u_under <= self.u_bar && 0.0 <= self.v_under && self.v_under <= self.v_bar
    }
}

/// Right-hand side of the comparison system, with the spatial extrema of the
/// coefficients taken at time `t`.
pub fn rhs_comparison(s: &ComparisonState, t: f64, coeffs: &CoefficientBundle, p: &ModelParams) -> ComparisonState {
    let e = coeffs.extrema_at(t);
    let (k, l) = (p.k, p.l);
    let up = k * s.u_bar + l * s.v_bar;
    let down = k * s.u_under + l * s.v_under;
    let c1 = p.chi1 / p.d3;
    let c2 = p.chi2 / p.d3;
    ComparisonState {
        u_bar: c1 * s.u_bar * (up - down) + s.u_bar * (e.a0.sup - e.a1.inf * s.u_bar - e.a2.inf * s.v_under),
        u_under: c1 * s.u_under * (down - up) + s.u_under * (e.a0.inf - e.a1.sup * s.u_under - e.a2.sup * s.v_bar),
        v_bar: c2 * s.v_bar * (up - down) + s.v_bar * (e.b0.sup - e.b2.inf * s.v_bar - e.b1.inf * s.u_under),
        v_under: c2 * s.v_under * (down - up) + s.v_under * (e.b0.inf - e.b2.sup * s.v_under - e.b1.sup * s.u_bar),
    }
}

/// Chemotaxis-free two species kinetics at given coefficient values.
pub fn lv_kinetics(u: f64, v: f64, r: &Rates) -> (f64, f64) {
    (u * (r.a0 - r.a1 * u - r.a2 * v), v * (r.b0 - r.b1 * u - r.b2 * v))
}

/// Chemotaxis-free two species law with time-dependent coefficients. Spatial
/// modulation, if any, is ignored.
pub fn rhs_lv(u: f64, v: f64, t: f64, coeffs: &CoefficientBundle) -> (f64, f64) {
    lv_kinetics(u, v, &coeffs.uniform_rates_at(t))
}

/// Coefficient values of a spatially uniform bundle at time `t`.
pub fn uniform_rates(coeffs: &CoefficientBundle, t: f64) -> Result<Rates, OdeError> {
    if coeffs.is_space_dependent() {
        return Err(OdeError::SpatiallyVarying);
    }
    Ok(coeffs.uniform_rates_at(t))
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HomogeneousRhs {
    pub du: f64,
    pub dv: f64,
    /// Signal slaved to the densities, `(ku + lv)/λ`.
    pub w: f64,
}

/// Right-hand side of the homogeneous reduction; chemotaxis drops out.
pub fn rhs_homogeneous(
    u: f64,
    v: f64,
    t: f64,
    coeffs: &CoefficientBundle,
    p: &ModelParams,
) -> Result<HomogeneousRhs, OdeError> {
    let r = uniform_rates(coeffs, t)?;
    let (du, dv) = lv_kinetics(u, v, &r);
    Ok(HomogeneousRhs {
        du,
        dv,
        w: (p.k * u + p.l * v) / p.lambda,
    })
}

/// Sampled output of [`integrate_rk4`]: one entry per step, both ends included.
#[derive(Debug, Clone, PartialEq)]
pub struct OdeTrajectory<const N: usize> {
    pub times: Vec<f64>,
    pub states: Vec<[f64; N]>,
}

impl<const N: usize> OdeTrajectory<N> {
    pub fn last(&self) -> [f64; N] {
        *self.states.last().expect("trajectory has at least one sample")
    }

    pub fn iter(&self) -> impl Iterator<Item = (f64, &[f64; N])> {
        self.times.iter().copied().zip(&self.states)
    }
}

/// Classical fixed-step RK4 from `t0` to `t1`. The step is `dt` shrunk to
/// `(t1 − t0)/ceil((t1 − t0)/dt)` so the last sample lands exactly on `t1`.
pub fn integrate_rk4<const N: usize, F>(
    mut rhs: F,
    y0: [f64; N],
    t0: f64,
    t1: f64,
    dt: f64,
) -> Result<OdeTrajectory<N>, OdeError>
where
    F: FnMut(f64, &[f64; N]) -> [f64; N],
{
    if !(dt > 0.0) || !(t1 >= t0) || !t0.is_finite() || !t1.is_finite() {
        return Err(OdeError::InvalidRequest(format!("t0 = {t0}, t1 = {t1}, dt = {dt}")));
    }
    let span = t1 - t0;
    let steps = ((span / dt) - 1e-9).ceil().max(0.0) as usize;
    let h = if steps == 0 { 0.0 } else { span / steps as f64 };
    let mut times = Vec::with_capacity(steps + 1);
    let mut states = Vec::with_capacity(steps + 1);
    let mut y = y0;
    times.push(t0);
    states.push(y);
    let axpy = |y: &[f64; N], a: f64, k: &[f64; N]| -> [f64; N] { std::array::from_fn(|i| y[i] + a * k[i]) };
    for n in 0..steps {
        let t = t0 + n as f64 * h;
        let k1 = rhs(t, &y);
        let k2 = rhs(t + 0.5 * h, &axpy(&y, 0.5 * h, &k1));
        let k3 = rhs(t + 0.5 * h, &axpy(&y, 0.5 * h, &k2));
        let k4 = rhs(t + h, &axpy(&y, h, &k3));
        for i in 0..N {
            y[i] += h / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]);
        }
        let t_next = if n + 1 == steps { t1 } else { t0 + (n + 1) as f64 * h };
        if y.iter().any(|x| !x.is_finite()) {
            return Err(OdeError::NonFinite { t: t_next });
        }
        times.push(t_next);
        states.push(y);
    }
    Ok(OdeTrajectory { times, states })
}

/// Integrates the comparison system.
pub fn integrate_comparison(
    init: ComparisonState,
    t0: f64,
    t1: f64,
    dt: f64,
    coeffs: &CoefficientBundle,
    p: &ModelParams,
) -> Result<OdeTrajectory<4>, OdeError> {
    integrate_rk4(
        |t, y| rhs_comparison(&ComparisonState::from_array(*y), t, coeffs, p).to_array(),
        init.to_array(),
        t0,
        t1,
        dt,
    )
}

/// Integrates the chemotaxis-free law `(u, v)`.
pub fn integrate_lv(
    u0: f64,
    v0: f64,
    t0: f64,
    t1: f64,
    dt: f64,
    coeffs: &CoefficientBundle,
) -> Result<OdeTrajectory<2>, OdeError> {
    integrate_rk4(
        |t, y| {
            let (du, dv) = rhs_lv(y[0], y[1], t, coeffs);
            [du, dv]
        },
        [u0, v0],
        t0,
        t1,
        dt,
    )
}

/// Integrates the homogeneous reduction `(u, v)`; the signal follows as
/// `(ku + lv)/λ`.
pub fn integrate_homogeneous(
    u0: f64,
    v0: f64,
    t0: f64,
    t1: f64,
    dt: f64,
    coeffs: &CoefficientBundle,
) -> Result<OdeTrajectory<2>, OdeError> {
    if coeffs.is_space_dependent() {
        return Err(OdeError::SpatiallyVarying);
    }
    integrate_lv(u0, v0, t0, t1, dt, coeffs)
}
