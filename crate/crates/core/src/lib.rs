//! Two-species chemotaxis competition laboratory: a finite-volume simulator for
//!
//! ```text
//! u_t = d1 Δu − χ1 ∇·(u∇w) + u(a0 − a1 u − a2 v)
//! v_t = d2 Δv − χ2 ∇·(v∇w) + v(b0 − b1 u − b2 v)
//!   0 = d3 Δw + k u + l v − λ w
//! ```
//!
//! on a box with no-flux boundaries, together with the closed-form hypothesis
//! checker, reference ODE systems and long-time diagnostics.

// `!(x > 0.0)` is used on purpose so NaN is rejected too.
#![allow(clippy::neg_cmp_op_on_partial_ord)]
// A failed run hands back its partial trajectory.
#![allow(clippy::result_large_err)]

pub mod analysis;
pub mod cli;
pub mod elliptic;
pub mod hypothesis;
pub mod model;
pub mod ode;
pub mod pde;
