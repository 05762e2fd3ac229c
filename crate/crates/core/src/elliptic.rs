//! Neumann Helmholtz solves `(σI − κΔ_N) x = f` on the vertex grid.
//!
//! `Δ_N` is the second-order central Laplacian with reflected ghost nodes, so
//! boundary rows carry a doubled inward weight and every row sums to zero.
//! The operator is symmetric with respect to the trapezoidal inner product and
//! is an M-matrix, which gives the discrete maximum principle.
//!
//! 1D systems are solved with the Thomas algorithm. 2D systems are
//! diagonalized exactly by the discrete cosine basis `cos(mπi/N)` along each
//! axis. Either way the result is checked against the residual contract and
//! refined if needed.

use std::f64::consts::PI;
use std::sync::Arc;

use thiserror::Error;

use crate::model::{Grid, ModelParams};

/// Relative residual every solve must reach.
pub const RESIDUAL_TOL: f64 = 1e-10;
const MAX_REFINEMENTS: usize = 4;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum SolveError {
    #[error("linear solve did not reach tolerance after {iterations} refinements (residual {residual:e})")]
    NotConverged { iterations: usize, residual: f64 },
    #[error("right-hand side has {got} entries, grid has {expected}")]
    ShapeMismatch { expected: usize, got: usize },
    #[error("operator requires shift > 0 and diffusivity >= 0 (shift {shift}, diffusivity {diffusivity})")]
    InvalidOperator { shift: f64, diffusivity: f64 },
}

/// `out = Δ_N x`.
pub fn neumann_laplacian(grid: &Grid, x: &[f64], out: &mut [f64]) {
    out.iter_mut().for_each(|o| *o = 0.0);
    let nx = grid.counts()[0];
    let ny = if grid.dim() == 2 { grid.counts()[1] } else { 1 };
    let hx2 = grid.spacing()[0].powi(2);
    for j in 0..ny {
        let row = &x[j * nx..(j + 1) * nx];
        for i in 0..nx {
            let left = if i == 0 { row[1] } else { row[i - 1] };
            let right = if i + 1 == nx { row[nx - 2] } else { row[i + 1] };
            out[j * nx + i] += (left - 2.0 * row[i] + right) / hx2;
        }
    }
    if grid.dim() == 2 {
        let hy2 = grid.spacing()[1].powi(2);
        for j in 0..ny {
            let down = if j == 0 { 1 } else { j - 1 };
            let up = if j + 1 == ny { ny - 2 } else { j + 1 };
            for i in 0..nx {
                out[j * nx + i] += (x[down * nx + i] - 2.0 * x[j * nx + i] + x[up * nx + i]) / hy2;
            }
        }
    }
}

/// Cosine eigenbasis of the 1D reflected-ghost Neumann Laplacian.
#[derive(Debug, Clone)]
struct CosineBasis {
    n: usize,
    /// `modes[m * n + i] = cos(mπi/(n-1))`
    modes: Vec<f64>,
    /// Forward-transform weights `ω_i / c_m` folded per `(m, i)`.
    forward: Vec<f64>,
    /// Eigenvalues of `-Δ`: `4/h² sin²(mπ/(2(n-1)))`.
    eigenvalues: Vec<f64>,
}

impl CosineBasis {
    fn new(n: usize, h: f64) -> Self {
        let intervals = (n - 1) as f64;
        let mut modes = vec![0.0; n * n];
        let mut forward = vec![0.0; n * n];
        for m in 0..n {
            let norm = if m == 0 || m + 1 == n {
                intervals
            } else {
                0.5 * intervals
            };
            for i in 0..n {
                // Exact reduction of the angle keeps cos symmetric to rounding.
                let phase = (m * i) % (2 * (n - 1));
                let c = (PI * phase as f64 / intervals).cos();
                modes[m * n + i] = c;
                let weight = if i == 0 || i + 1 == n { 0.5 } else { 1.0 };
                forward[m * n + i] = weight * c / norm;
            }
        }
        let eigenvalues = (0..n)
            .map(|m| 4.0 / (h * h) * (PI * m as f64 / (2.0 * intervals)).sin().powi(2))
            .collect();
        Self {
            n,
            modes,
            forward,
            eigenvalues,
        }
    }
}

#[derive(Debug, Clone)]
enum Backend {
    /// Forward-eliminated tridiagonal system.
    Tridiagonal {
        lower: Vec<f64>,
        upper_mod: Vec<f64>,
        pivot: Vec<f64>,
    },
    Cosine {
        x: Arc<CosineBasis>,
        y: Arc<CosineBasis>,
    },
}

/// `(σI − κΔ_N)` on a fixed grid, ready to solve.
#[derive(Debug, Clone)]
pub struct NeumannHelmholtz {
    grid: Grid,
    shift: f64,
    diffusivity: f64,
    backend: Backend,
}

impl NeumannHelmholtz {
    pub fn new(grid: &Grid, shift: f64, diffusivity: f64) -> Result<Self, SolveError> {
        if !(shift > 0.0 && shift.is_finite() && diffusivity >= 0.0 && diffusivity.is_finite()) {
            return Err(SolveError::InvalidOperator { shift, diffusivity });
        }
        let backend = match grid.dim() {
            1 => Self::tridiagonal(grid, shift, diffusivity),
            _ => Backend::Cosine {
                x: Arc::new(CosineBasis::new(grid.counts()[0], grid.spacing()[0])),
                y: Arc::new(CosineBasis::new(grid.counts()[1], grid.spacing()[1])),
            },
        };
        Ok(Self {
            grid: grid.clone(),
            shift,
            diffusivity,
            backend,
        })
    }

    /// Same grid, new `σ` and `κ`; the 2D cosine basis is shared.
    pub fn reparametrized(&self, shift: f64, diffusivity: f64) -> Result<Self, SolveError> {
        if !(shift > 0.0 && shift.is_finite() && diffusivity >= 0.0 && diffusivity.is_finite()) {
            return Err(SolveError::InvalidOperator { shift, diffusivity });
        }
        let backend = match &self.backend {
            Backend::Tridiagonal { .. } => Self::tridiagonal(&self.grid, shift, diffusivity),
            Backend::Cosine { x, y } => Backend::Cosine {
                x: Arc::clone(x),
                y: Arc::clone(y),
            },
        };
        Ok(Self {
            grid: self.grid.clone(),
            shift,
            diffusivity,
            backend,
        })
    }

    fn tridiagonal(grid: &Grid, shift: f64, diffusivity: f64) -> Backend {
        let n = grid.len();
        let g = diffusivity / grid.spacing()[0].powi(2);
        let mut lower = vec![-g; n];
        let mut upper = vec![-g; n];
        let diag = shift + 2.0 * g;
        lower[0] = 0.0;
        upper[0] = -2.0 * g;
        lower[n - 1] = -2.0 * g;
        upper[n - 1] = 0.0;
        let mut upper_mod = vec![0.0; n];
        let mut pivot = vec![0.0; n];
        pivot[0] = diag;
        upper_mod[0] = upper[0] / pivot[0];
        for i in 1..n {
            pivot[i] = diag - lower[i] * upper_mod[i - 1];
            upper_mod[i] = upper[i] / pivot[i];
        }
        Backend::Tridiagonal {
            lower,
            upper_mod,
            pivot,
        }
    }

    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    pub fn shift(&self) -> f64 {
        self.shift
    }

    pub fn diffusivity(&self) -> f64 {
        self.diffusivity
    }

    /// `out = (σI − κΔ_N) x`.
    pub fn apply(&self, x: &[f64], out: &mut [f64]) {
        neumann_laplacian(&self.grid, x, out);
        for (o, &xi) in out.iter_mut().zip(x) {
            *o = self.shift * xi - self.diffusivity * *o;
        }
    }

    /// Max-norm residual `‖(σI − κΔ_N)x − f‖_∞ / max(1, ‖f‖_∞)`.
    pub fn relative_residual(&self, x: &[f64], rhs: &[f64]) -> f64 {
        let mut ax = vec![0.0; x.len()];
        self.apply(x, &mut ax);
        let res = ax.iter().zip(rhs).map(|(a, f)| (a - f).abs()).fold(0.0, f64::max);
        res / max_abs(rhs).max(1.0)
    }

    fn direct(&self, rhs: &[f64], out: &mut [f64]) {
        match &self.backend {
            Backend::Tridiagonal {
                lower,
                upper_mod,
                pivot,
            } => {
                let n = rhs.len();
                out[0] = rhs[0] / pivot[0];
                for i in 1..n {
                    out[i] = (rhs[i] - lower[i] * out[i - 1]) / pivot[i];
                }
                for i in (0..n - 1).rev() {
                    out[i] -= upper_mod[i] * out[i + 1];
                }
            }
            Backend::Cosine { x, y } => self.cosine_solve(x, y, rhs, out),
        }
    }

    fn cosine_solve(&self, bx: &CosineBasis, by: &CosineBasis, rhs: &[f64], out: &mut [f64]) {
        let (nx, ny) = (bx.n, by.n);
        // Forward transform along x: tmp[j][m] = Σ_i F[m,i] f[j][i]
        let mut tmp = vec![0.0; nx * ny];
        for j in 0..ny {
            let row = &rhs[j * nx..(j + 1) * nx];
            for m in 0..nx {
                let basis = &bx.forward[m * nx..(m + 1) * nx];
                tmp[j * nx + m] = basis.iter().zip(row).map(|(b, f)| b * f).sum();
            }
        }
        // Along y, then scale by the inverse eigenvalue.
        let mut coeff = vec![0.0; nx * ny];
        for q in 0..ny {
            let basis = &by.forward[q * ny..(q + 1) * ny];
            for m in 0..nx {
                let s: f64 = (0..ny).map(|j| basis[j] * tmp[j * nx + m]).sum();
                let eig = self.shift + self.diffusivity * (bx.eigenvalues[m] + by.eigenvalues[q]);
                coeff[q * nx + m] = s / eig;
            }
        }
        // Back along y.
        for j in 0..ny {
            for m in 0..nx {
                tmp[j * nx + m] = (0..ny).map(|q| by.modes[q * ny + j] * coeff[q * nx + m]).sum();
            }
        }
        // Back along x.
        for j in 0..ny {
            for i in 0..nx {
                out[j * nx + i] = (0..nx).map(|m| bx.modes[m * nx + i] * tmp[j * nx + m]).sum();
            }
        }
    }

    /// Solves `(σI − κΔ_N) x = rhs` to relative residual [`RESIDUAL_TOL`].
    pub fn solve(&self, rhs: &[f64]) -> Result<Vec<f64>, SolveError> {
        let n = self.grid.len();
        if rhs.len() != n {
            return Err(SolveError::ShapeMismatch {
                expected: n,
                got: rhs.len(),
            });
        }
        let mut x = vec![0.0; n];
        self.direct(rhs, &mut x);
        let scale = max_abs(rhs).max(1.0);
        let mut ax = vec![0.0; n];
        let mut correction = vec![0.0; n];
        for iteration in 0..=MAX_REFINEMENTS {
            self.apply(&x, &mut ax);
            let r: Vec<f64> = rhs.iter().zip(&ax).map(|(f, a)| f - a).collect();
            let residual = max_abs(&r) / scale;
            if residual <= RESIDUAL_TOL {
                return Ok(x);
            }
            if iteration == MAX_REFINEMENTS {
                return Err(SolveError::NotConverged {
                    iterations: iteration,
                    residual,
                });
            }
            self.direct(&r, &mut correction);
            x.iter_mut().zip(&correction).for_each(|(xi, c)| *xi += c);
        }
        unreachable!()
    }
}

pub(crate) fn max_abs(x: &[f64]) -> f64 {
    x.iter().fold(0.0, |m, v| m.max(v.abs()))
}

/// Signal operator `λI − d₃Δ_N` with source `ku + lv`.
#[derive(Debug, Clone)]
pub struct EllipticOperator {
    helmholtz: NeumannHelmholtz,
    k: f64,
    l: f64,
}

impl EllipticOperator {
    pub fn new(grid: &Grid, params: &ModelParams) -> Result<Self, SolveError> {
        Ok(Self {
            helmholtz: NeumannHelmholtz::new(grid, params.lambda, params.d3)?,
            k: params.k,
            l: params.l,
        })
    }

    pub fn grid(&self) -> &Grid {
        self.helmholtz.grid()
    }

    pub fn helmholtz(&self) -> &NeumannHelmholtz {
        &self.helmholtz
    }

    pub fn source(&self, u: &[f64], v: &[f64]) -> Vec<f64> {
        u.iter().zip(v).map(|(a, b)| self.k * a + self.l * b).collect()
    }

    /// Signal `w` solving `0 = d₃Δw + ku + lv − λw`.
    pub fn solve_w(&self, u: &[f64], v: &[f64]) -> Result<Vec<f64>, SolveError> {
        if u.len() != v.len() {
            return Err(SolveError::ShapeMismatch {
                expected: u.len(),
                got: v.len(),
            });
        }
        self.helmholtz.solve(&self.source(u, v))
    }

    /// `‖(λI − d₃Δ_N)w − (ku+lv)‖_∞ / max(1, ‖ku+lv‖_∞)`.
    pub fn residual_norm(&self, u: &[f64], v: &[f64], w: &[f64]) -> f64 {
        self.helmholtz.relative_residual(w, &self.source(u, v))
    }
}
