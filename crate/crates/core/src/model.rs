//! Model data: constants, space-time coefficient fields with exact extrema,
//! the box grid and the evolving field state.

use std::f64::consts::PI;

use thiserror::Error;

/// Maximum number of spatial axes supported by the simulator.
pub const MAX_DIM: usize = 2;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ModelError {
    #[error("{name} must be {requirement} (got {value})")]
    InvalidParameter {
        name: &'static str,
        requirement: &'static str,
        value: f64,
    },
    #[error("coefficient {name} has non-positive infimum {inf}")]
    NonPositiveInfimum { name: String, inf: f64 },
    #[error("coefficient {name}: {reason}")]
    MalformedCoefficient { name: String, reason: String },
    #[error("grid: {0}")]
    InvalidGrid(String),
    #[error("field state: {0}")]
    InvalidState(String),
    #[error("coefficient temporal periods differ: {0} vs {1}")]
    MismatchedPeriods(f64, f64),
}

/// Diffusion, chemotaxis and signal constants.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ModelParams {
    pub d1: f64,
    pub d2: f64,
    pub d3: f64,
    pub chi1: f64,
    pub chi2: f64,
    pub k: f64,
    pub l: f64,
    pub lambda: f64,
}

impl ModelParams {
    #[allow(clippy::too_many_arguments)]
    pub fn new(
        d1: f64,
        d2: f64,
        d3: f64,
        chi1: f64,
        chi2: f64,
        k: f64,
        l: f64,
        lambda: f64,
    ) -> Result<Self, ModelError> {
        let params = Self {
            d1,
            d2,
            d3,
            chi1,
            chi2,
            k,
            l,
            lambda,
        };
        params.validate()?;
        Ok(params)
    }

    pub fn validate(&self) -> Result<(), ModelError> {
        let positive = [
            ("params.d1", self.d1),
            ("params.d2", self.d2),
            ("params.d3", self.d3),
            ("params.lambda", self.lambda),
        ];
        for (name, value) in positive {
            if !(value.is_finite() && value > 0.0) {
                return Err(ModelError::InvalidParameter {
                    name,
                    requirement: "> 0",
                    value,
                });
            }
        }
        let nonneg = [
            ("params.chi1", self.chi1),
            ("params.chi2", self.chi2),
            ("params.k", self.k),
            ("params.l", self.l),
        ];
        for (name, value) in nonneg {
            if !(value.is_finite() && value >= 0.0) {
                return Err(ModelError::InvalidParameter {
                    name,
                    requirement: ">= 0",
                    value,
                });
            }
        }
        Ok(())
    }

    /// `k * chi1 / d3`
    pub fn k_chi1(&self) -> f64 {
        self.k * self.chi1 / self.d3
    }

    /// `l * chi1 / d3`
    pub fn l_chi1(&self) -> f64 {
        self.l * self.chi1 / self.d3
    }

    /// `k * chi2 / d3`
    pub fn k_chi2(&self) -> f64 {
        self.k * self.chi2 / self.d3
    }

    /// `l * chi2 / d3`
    pub fn l_chi2(&self) -> f64 {
        self.l * self.chi2 / self.d3
    }

    pub fn has_chemotaxis(&self) -> bool {
        self.chi1 != 0.0 || self.chi2 != 0.0
    }
}

/// A positive space-time coefficient with additive cosine modulation:
///
/// `c(t,x) = base + A cos(2π(t - phase)/P) + Σ_axis a_axis cos(m_axis π x_axis / L_axis)`.
///
/// Temporal and spatial parts vary independently, so the infimum and supremum
/// are available in closed form.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CoefficientField {
    pub base: f64,
    pub temporal_amplitude: f64,
    pub temporal_period: f64,
    pub temporal_phase: f64,
    pub spatial_amplitude: [f64; MAX_DIM],
    pub spatial_mode: [u32; MAX_DIM],
}

impl Default for CoefficientField {
    fn default() -> Self {
        Self::constant(1.0)
    }
}

impl CoefficientField {
    pub fn constant(base: f64) -> Self {
        Self {
            base,
            temporal_amplitude: 0.0,
            temporal_period: 1.0,
            temporal_phase: 0.0,
            spatial_amplitude: [0.0; MAX_DIM],
            spatial_mode: [0; MAX_DIM],
        }
    }

    pub fn with_temporal(mut self, amplitude: f64, period: f64, phase: f64) -> Self {
        self.temporal_amplitude = amplitude;
        self.temporal_period = period;
        self.temporal_phase = phase;
        self
    }

    pub fn with_spatial(mut self, axis: usize, amplitude: f64, mode: u32) -> Self {
        self.spatial_amplitude[axis] = amplitude;
        self.spatial_mode[axis] = mode;
        self
    }

    /// Checks finiteness and that a modulated field has a positive period.
    pub fn check_form(&self, name: &str) -> Result<(), ModelError> {
        let malformed = |reason: &str| ModelError::MalformedCoefficient {
            name: name.to_string(),
            reason: reason.to_string(),
        };
        let finite = self.base.is_finite()
            && self.temporal_amplitude.is_finite()
            && self.temporal_period.is_finite()
            && self.temporal_phase.is_finite()
            && self.spatial_amplitude.iter().all(|a| a.is_finite());
        if !finite {
            return Err(malformed("non-finite entry"));
        }
        if self.temporal_amplitude != 0.0 && self.temporal_period <= 0.0 {
            return Err(malformed("temporal_period must be > 0 when temporal_amplitude != 0"));
        }
        Ok(())
    }

    pub fn is_time_dependent(&self) -> bool {
        self.temporal_amplitude != 0.0
    }

    /// True when the field varies in space (a mode-0 amplitude is a constant shift).
    pub fn is_space_dependent(&self) -> bool {
        self.spatial_amplitude
            .iter()
            .zip(&self.spatial_mode)
            .any(|(&a, &m)| a != 0.0 && m != 0)
    }

    pub fn temporal_part(&self, t: f64) -> f64 {
        if self.temporal_amplitude == 0.0 {
            return 0.0;
        }
        self.temporal_amplitude * (2.0 * PI * (t - self.temporal_phase) / self.temporal_period).cos()
    }

    /// Spatial part at a point; `x` and `lengths` carry one entry per grid axis.
    pub fn spatial_part(&self, x: &[f64], lengths: &[f64]) -> f64 {
        x.iter()
            .zip(lengths)
            .enumerate()
            .map(|(axis, (&xa, &la))| {
                let amp = self.spatial_amplitude[axis];
                if amp == 0.0 {
                    0.0
                } else {
                    amp * (self.spatial_mode[axis] as f64 * PI * xa / la).cos()
                }
            })
            .sum()
    }

    pub fn eval(&self, t: f64, x: &[f64], lengths: &[f64]) -> f64 {
        self.base + self.temporal_part(t) + self.spatial_part(x, lengths)
    }

    /// Range of the spatial part over the box: modes >= 1 sweep `±|a|`,
    /// mode 0 is a constant shift by `a`.
    fn spatial_range(&self) -> (f64, f64) {
        let mut lo = 0.0;
        let mut hi = 0.0;
        for (&a, &m) in self.spatial_amplitude.iter().zip(&self.spatial_mode) {
            if m == 0 {
                lo += a;
                hi += a;
            } else {
                lo -= a.abs();
                hi += a.abs();
            }
        }
        (lo, hi)
    }

    /// Exact extrema over all `(t, x)`, without the positivity check.
    pub fn raw_extrema(&self) -> Extrema {
        let (lo, hi) = self.spatial_range();
        let amp = self.temporal_amplitude.abs();
        Extrema {
            inf: self.base - amp + lo,
            sup: self.base + amp + hi,
        }
    }

    /// Exact extrema over all `(t, x)`; fails when the infimum is not positive.
    pub fn extrema(&self) -> Result<Extrema, ModelError> {
        self.named_extrema("coefficient")
    }

    pub fn named_extrema(&self, name: &str) -> Result<Extrema, ModelError> {
        self.check_form(name)?;
        let ext = self.raw_extrema();
        if ext.inf <= 0.0 {
            return Err(ModelError::NonPositiveInfimum {
                name: name.to_string(),
                inf: ext.inf,
            });
        }
        Ok(ext)
    }

    /// Spatial extrema at a fixed time.
    pub fn extrema_at(&self, t: f64) -> Extrema {
        let (lo, hi) = self.spatial_range();
        let c = self.base + self.temporal_part(t);
        Extrema {
            inf: c + lo,
            sup: c + hi,
        }
    }
}

/// `eval_coefficient`: the value law at `(t, x)`.
pub fn eval_coefficient(field: &CoefficientField, t: f64, x: &[f64], lengths: &[f64]) -> f64 {
    field.eval(t, x, lengths)
}

/// `coeff_extrema`: exact `(inf, sup)` of a field.
pub fn coeff_extrema(field: &CoefficientField) -> Result<Extrema, ModelError> {
    field.extrema()
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Extrema {
    pub inf: f64,
    pub sup: f64,
}

impl Extrema {
    pub fn constant(c: f64) -> Self {
        Self { inf: c, sup: c }
    }
}

/// Names of the six reaction coefficients, in storage order.
pub const COEFFICIENT_NAMES: [&str; 6] = ["a0", "a1", "a2", "b0", "b1", "b2"];

/// Reaction coefficients of both species.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct CoefficientBundle {
    pub a0: CoefficientField,
    pub a1: CoefficientField,
    pub a2: CoefficientField,
    pub b0: CoefficientField,
    pub b1: CoefficientField,
    pub b2: CoefficientField,
}

impl CoefficientBundle {
    pub fn constant(a0: f64, a1: f64, a2: f64, b0: f64, b1: f64, b2: f64) -> Self {
        Self {
            a0: CoefficientField::constant(a0),
            a1: CoefficientField::constant(a1),
            a2: CoefficientField::constant(a2),
            b0: CoefficientField::constant(b0),
            b1: CoefficientField::constant(b1),
            b2: CoefficientField::constant(b2),
        }
    }

    pub fn fields(&self) -> [&CoefficientField; 6] {
        [&self.a0, &self.a1, &self.a2, &self.b0, &self.b1, &self.b2]
    }

    pub fn field_mut(&mut self, name: &str) -> Option<&mut CoefficientField> {
        match name {
            "a0" => Some(&mut self.a0),
            "a1" => Some(&mut self.a1),
            "a2" => Some(&mut self.a2),
            "b0" => Some(&mut self.b0),
            "b1" => Some(&mut self.b1),
            "b2" => Some(&mut self.b2),
            _ => None,
        }
    }

    /// `bundle_extrema`: global extrema of all six coefficients.
    pub fn extrema(&self) -> Result<ExtremaTable, ModelError> {
        let e: Vec<Extrema> = self
            .fields()
            .iter()
            .zip(COEFFICIENT_NAMES)
            .map(|(f, name)| f.named_extrema(name))
            .collect::<Result<_, _>>()?;
        Ok(ExtremaTable {
            a0: e[0],
            a1: e[1],
            a2: e[2],
            b0: e[3],
            b1: e[4],
            b2: e[5],
        })
    }

    /// Spatial extrema of every coefficient at time `t`.
    pub fn extrema_at(&self, t: f64) -> ExtremaTable {
        ExtremaTable {
            a0: self.a0.extrema_at(t),
            a1: self.a1.extrema_at(t),
            a2: self.a2.extrema_at(t),
            b0: self.b0.extrema_at(t),
            b1: self.b1.extrema_at(t),
            b2: self.b2.extrema_at(t),
        }
    }

    pub fn rates_at(&self, t: f64, x: &[f64], lengths: &[f64]) -> Rates {
        Rates {
            a0: self.a0.eval(t, x, lengths),
            a1: self.a1.eval(t, x, lengths),
            a2: self.a2.eval(t, x, lengths),
            b0: self.b0.eval(t, x, lengths),
            b1: self.b1.eval(t, x, lengths),
            b2: self.b2.eval(t, x, lengths),
        }
    }

    pub fn is_space_dependent(&self) -> bool {
        self.fields().iter().any(|f| f.is_space_dependent())
    }

    /// Values of a spatially uniform bundle at time `t` (spatial parts ignored
    /// except constant mode-0 shifts).
    pub fn uniform_rates_at(&self, t: f64) -> Rates {
        let at = |f: &CoefficientField| f.extrema_at(t).inf;
        Rates {
            a0: at(&self.a0),
            a1: at(&self.a1),
            a2: at(&self.a2),
            b0: at(&self.b0),
            b1: at(&self.b1),
            b2: at(&self.b2),
        }
    }

    /// Common temporal period of the time-dependent coefficients; `None` when
    /// every coefficient is constant in time.
    pub fn common_period(&self) -> Result<Option<f64>, ModelError> {
        let mut period: Option<f64> = None;
        for f in self.fields() {
            if !f.is_time_dependent() {
                continue;
            }
            match period {
                None => period = Some(f.temporal_period),
                Some(p) => {
                    if (p - f.temporal_period).abs() > 1e-12 * p.abs().max(1.0) {
                        return Err(ModelError::MismatchedPeriods(p, f.temporal_period));
                    }
                }
            }
        }
        Ok(period)
    }
}

/// Coefficient values at one `(t, x)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Rates {
    pub a0: f64,
    pub a1: f64,
    pub a2: f64,
    pub b0: f64,
    pub b1: f64,
    pub b2: f64,
}

/// Global infima and suprema of the six coefficients (`a_{i,inf}`, `b_{i,sup}`, ...).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ExtremaTable {
    pub a0: Extrema,
    pub a1: Extrema,
    pub a2: Extrema,
    pub b0: Extrema,
    pub b1: Extrema,
    pub b2: Extrema,
}

impl ExtremaTable {
    /// Table for constant coefficients.
    pub fn constant(a0: f64, a1: f64, a2: f64, b0: f64, b1: f64, b2: f64) -> Self {
        Self {
            a0: Extrema::constant(a0),
            a1: Extrema::constant(a1),
            a2: Extrema::constant(a2),
            b0: Extrema::constant(b0),
            b1: Extrema::constant(b1),
            b2: Extrema::constant(b2),
        }
    }

    pub fn entries(&self) -> [(&'static str, Extrema); 6] {
        [
            ("a0", self.a0),
            ("a1", self.a1),
            ("a2", self.a2),
            ("b0", self.b0),
            ("b1", self.b1),
            ("b2", self.b2),
        ]
    }
}

/// Vertex-centered grid on `[0,L_x]` or `[0,L_x]×[0,L_y]`. Nodes are stored
/// x-fastest: `index = i + counts[0] * j`.
#[derive(Debug, Clone, PartialEq)]
pub struct Grid {
    lengths: Vec<f64>,
    counts: Vec<usize>,
    spacing: Vec<f64>,
}

impl Grid {
    pub fn new(lengths: &[f64], counts: &[usize]) -> Result<Self, ModelError> {
        let dim = lengths.len();
        if dim == 0 || dim > MAX_DIM {
            return Err(ModelError::InvalidGrid(format!("dim must be 1 or 2, got {dim}")));
        }
        if counts.len() != dim {
            return Err(ModelError::InvalidGrid(format!(
                "{} lengths but {} counts",
                dim,
                counts.len()
            )));
        }
        for (&l, &n) in lengths.iter().zip(counts) {
            if !(l.is_finite() && l > 0.0) {
                return Err(ModelError::InvalidGrid(format!("length must be > 0, got {l}")));
            }
            if n < 3 {
                return Err(ModelError::InvalidGrid(format!("node count must be >= 3, got {n}")));
            }
        }
        let spacing = lengths.iter().zip(counts).map(|(&l, &n)| l / (n - 1) as f64).collect();
        Ok(Self {
            lengths: lengths.to_vec(),
            counts: counts.to_vec(),
            spacing,
        })
    }

    pub fn line(length: f64, count: usize) -> Result<Self, ModelError> {
        Self::new(&[length], &[count])
    }

    pub fn dim(&self) -> usize {
        self.lengths.len()
    }

    pub fn lengths(&self) -> &[f64] {
        &self.lengths
    }

    pub fn counts(&self) -> &[usize] {
        &self.counts
    }

    pub fn spacing(&self) -> &[f64] {
        &self.spacing
    }

    pub fn min_spacing(&self) -> f64 {
        self.spacing.iter().copied().fold(f64::INFINITY, f64::min)
    }

    pub fn len(&self) -> usize {
        self.counts.iter().product()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Measure of the box.
    pub fn volume(&self) -> f64 {
        self.lengths.iter().product()
    }

    /// Coordinate of node `i` along `axis`.
    pub fn coord(&self, axis: usize, i: usize) -> f64 {
        if i + 1 == self.counts[axis] {
            self.lengths[axis]
        } else {
            i as f64 * self.spacing[axis]
        }
    }

    /// Point of a flat node index.
    pub fn point(&self, index: usize) -> [f64; MAX_DIM] {
        let mut p = [0.0; MAX_DIM];
        let nx = self.counts[0];
        p[0] = self.coord(0, index % nx);
        if self.dim() == 2 {
            p[1] = self.coord(1, index / nx);
        }
        p
    }

    /// Trapezoidal quadrature weights (cell measure attached to each node).
    pub fn quadrature_weights(&self) -> Vec<f64> {
        let axis_weights: Vec<Vec<f64>> = (0..self.dim())
            .map(|a| {
                let n = self.counts[a];
                let h = self.spacing[a];
                (0..n).map(|i| if i == 0 || i + 1 == n { 0.5 * h } else { h }).collect()
            })
            .collect();
        match self.dim() {
            1 => axis_weights[0].clone(),
            _ => {
                let mut w = Vec::with_capacity(self.len());
                for wy in &axis_weights[1] {
                    for wx in &axis_weights[0] {
                        w.push(wx * wy);
                    }
                }
                w
            }
        }
    }

    /// Trapezoidal integral of a nodal field.
    pub fn integrate(&self, values: &[f64]) -> f64 {
        self.quadrature_weights().iter().zip(values).map(|(w, v)| w * v).sum()
    }

    /// Samples `f(x)` at every node.
    pub fn sample(&self, f: impl Fn(&[f64]) -> f64) -> Vec<f64> {
        (0..self.len())
            .map(|i| {
                let p = self.point(i);
                f(&p[..self.dim()])
            })
            .collect()
    }
}

/// Nodal values of `(u, v, w)` at time `t`.
#[derive(Debug, Clone, PartialEq)]
pub struct FieldState {
    pub t: f64,
    pub u: Vec<f64>,
    pub v: Vec<f64>,
    pub w: Vec<f64>,
}

impl FieldState {
    /// State with `w` zeroed; the signal is filled in by the simulator.
    pub fn new(t: f64, u: Vec<f64>, v: Vec<f64>) -> Result<Self, ModelError> {
        if u.len() != v.len() {
            return Err(ModelError::InvalidState(format!(
                "u has {} nodes, v has {}",
                u.len(),
                v.len()
            )));
        }
        let w = vec![0.0; u.len()];
        let state = Self { t, u, v, w };
        state.check(0.0)?;
        Ok(state)
    }

    pub fn constant(grid: &Grid, t: f64, u: f64, v: f64) -> Result<Self, ModelError> {
        Self::new(t, vec![u; grid.len()], vec![v; grid.len()])
    }

    /// Finite entries and `u, v >= -tol_neg`.
    pub fn check(&self, tol_neg: f64) -> Result<(), ModelError> {
        if !self.t.is_finite() {
            return Err(ModelError::InvalidState("non-finite time".into()));
        }
        for (name, values) in [("u", &self.u), ("v", &self.v), ("w", &self.w)] {
            if let Some(x) = values.iter().find(|x| !x.is_finite()) {
                return Err(ModelError::InvalidState(format!("{name} has non-finite entry {x}")));
            }
        }
        for (name, values) in [("u", &self.u), ("v", &self.v)] {
            if let Some(x) = values.iter().find(|&&x| x < -tol_neg) {
                return Err(ModelError::InvalidState(format!("{name} has negative entry {x}")));
            }
        }
        Ok(())
    }

    pub fn len(&self) -> usize {
        self.u.len()
    }

    pub fn is_empty(&self) -> bool {
        self.u.is_empty()
    }
}
