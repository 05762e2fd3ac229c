//! Closed-form conditions and bounds evaluated from the coefficient extrema
//! and the model constants.
//!
//! Every inequality is recorded with a margin `(lhs - rhs) / max(1, |rhs|)`,
//! positive when satisfied. Truth values are decided on `lhs`/`rhs` directly,
//! strict or non-strict as the condition demands, with no epsilon slack.

use thiserror::Error;

use crate::model::{ExtremaTable, ModelParams};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum HypothesisError {
    #[error("{what}: denominator {value} is not positive")]
    NonPositiveDenominator { what: &'static str, value: f64 },
    #[error("{what}: ordering violated ({detail})")]
    OrderingViolated { what: &'static str, detail: String },
}

/// One inequality with its scaled margin.
#[derive(Debug, Clone, PartialEq)]
pub struct Margin {
    pub name: &'static str,
    pub value: f64,
    pub holds: bool,
}

#[derive(Debug, Clone, Copy, PartialEq)]
enum Strictness {
    Strict,
    NonStrict,
}

fn margin(name: &'static str, lhs: f64, rhs: f64, strictness: Strictness) -> Margin {
    let holds = match strictness {
        Strictness::Strict => lhs > rhs,
        Strictness::NonStrict => lhs >= rhs,
    };
    Margin {
        name,
        value: (lhs - rhs) / rhs.abs().max(1.0),
        holds,
    }
}

/// Truth value of a set of inequalities.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct Condition {
    pub holds: bool,
    pub margins: Vec<Margin>,
}

impl Condition {
    fn from_margins(margins: Vec<Margin>) -> Self {
        Self {
            holds: margins.iter().all(|m| m.holds),
            margins,
        }
    }

    /// Condition that fails because a prerequisite does.
    fn unmet() -> Self {
        Self {
            holds: false,
            margins: Vec::new(),
        }
    }

    pub fn min_margin(&self) -> Option<f64> {
        self.margins.iter().map(|m| m.value).reduce(f64::min)
    }
}

fn pos(x: f64) -> f64 {
    x.max(0.0)
}

fn neg(x: f64) -> f64 {
    (-x).max(0.0)
}

/// First boundedness condition: chemotaxis dominated coefficient-wise.
pub fn check_h1(e: &ExtremaTable, p: &ModelParams) -> Condition {
    use Strictness::*;
    Condition::from_margins(vec![
        margin("a1_inf > k*chi1/d3", e.a1.inf, p.k_chi1(), Strict),
        margin("a2_inf >= l*chi1/d3", e.a2.inf, p.l_chi1(), NonStrict),
        margin("b1_inf >= k*chi2/d3", e.b1.inf, p.k_chi2(), NonStrict),
        margin("b2_inf > l*chi2/d3", e.b2.inf, p.l_chi2(), Strict),
    ])
}

/// Second boundedness condition: determinant form.
pub fn check_h2(e: &ExtremaTable, p: &ModelParams) -> Condition {
    use Strictness::*;
    let ra = e.a1.inf - p.k_chi1();
    let rb = e.b2.inf - p.l_chi2();
    Condition::from_margins(vec![
        margin("a1_inf > k*chi1/d3", e.a1.inf, p.k_chi1(), Strict),
        margin("b2_inf > l*chi2/d3", e.b2.inf, p.l_chi2(), Strict),
        margin(
            "(a1_inf - k*chi1/d3)(b2_inf - l*chi2/d3) > (k*chi2/d3)(l*chi1/d3)",
            ra * rb,
            p.k_chi2() * p.l_chi1(),
            Strict,
        ),
    ])
}

/// Third boundedness condition for space dimension `n`.
pub fn check_h3(e: &ExtremaTable, p: &ModelParams, n: u32) -> Condition {
    use Strictness::*;
    let n = n.max(1) as f64;
    let factor = (n - 2.0) / (n * p.d3);
    Condition::from_margins(vec![
        margin(
            "a1_inf > max(0, chi1*k*(n-2)/(d3*n))",
            e.a1.inf,
            pos(p.chi1 * p.k * factor),
            Strict,
        ),
        margin(
            "a2_inf > max(0, chi1*l*(n-2)/(d3*n))",
            e.a2.inf,
            pos(p.chi1 * p.l * factor),
            Strict,
        ),
        margin(
            "b1_inf > max(0, chi2*k*(n-2)/(d3*n))",
            e.b1.inf,
            pos(p.chi2 * p.k * factor),
            Strict,
        ),
        margin(
            "b2_inf > max(0, chi2*l*(n-2)/(d3*n))",
            e.b2.inf,
            pos(p.chi2 * p.l * factor),
            Strict,
        ),
    ])
}

/// Eventual upper bounds `(Ā₁, Ā₂)` under the first boundedness condition.
pub fn bounds_upper_a(e: &ExtremaTable, p: &ModelParams) -> Result<(f64, f64), HypothesisError> {
    let da = e.a1.inf - p.k_chi1();
    let db = e.b2.inf - p.l_chi2();
    if da <= 0.0 {
        return Err(HypothesisError::NonPositiveDenominator {
            what: "A_bar1",
            value: da,
        });
    }
    if db <= 0.0 {
        return Err(HypothesisError::NonPositiveDenominator {
            what: "A_bar2",
            value: db,
        });
    }
    Ok((e.a0.sup / da, e.b0.sup / db))
}

/// Eventual upper bounds `(B̄₁, B̄₂)` under the determinant condition: the
/// positive equilibrium of the cooperative majorant system.
pub fn bounds_upper_b(e: &ExtremaTable, p: &ModelParams) -> Result<(f64, f64), HypothesisError> {
    let ra = e.a1.inf - p.k_chi1();
    let rb = e.b2.inf - p.l_chi2();
    let det = ra * rb - p.l * p.k * p.chi1 * p.chi2 / (p.d3 * p.d3);
    if ra <= 0.0 || rb <= 0.0 || det <= 0.0 {
        return Err(HypothesisError::NonPositiveDenominator {
            what: "B_bar",
            value: if ra <= 0.0 {
                ra
            } else if rb <= 0.0 {
                rb
            } else {
                det
            },
        });
    }
    let b1 = (e.a0.sup * rb + p.l_chi1() * e.b0.sup) / det;
    let b2 = (e.b0.sup * ra + p.k_chi2() * e.a0.sup) / det;
    Ok((b1, b2))
}

/// Invariant-rectangle persistence condition built on `(Ā₁, Ā₂)`.
pub fn check_h4(e: &ExtremaTable, p: &ModelParams) -> Condition {
    if !check_h1(e, p).holds {
        return Condition::unmet();
    }
    let Ok((a1, a2)) = bounds_upper_a(e, p) else {
        return Condition::unmet();
    };
    use Strictness::*;
    Condition::from_margins(vec![
        margin("a0_inf > a2_sup*A_bar2", e.a0.inf, e.a2.sup * a2, Strict),
        margin("b0_inf > b1_sup*A_bar1", e.b0.inf, e.b1.sup * a1, Strict),
    ])
}

/// Persistence condition built on `(B̄₁, B̄₂)` with positive parts.
pub fn check_h5(e: &ExtremaTable, p: &ModelParams) -> Condition {
    if !check_h2(e, p).holds {
        return Condition::unmet();
    }
    let Ok((b1, b2)) = bounds_upper_b(e, p) else {
        return Condition::unmet();
    };
    let c1 = p.l_chi1();
    let c2 = p.k_chi2();
    use Strictness::*;
    Condition::from_margins(vec![
        margin(
            "a0_inf > (a2_sup - chi1*l/d3)_+ B_bar2 + (chi1*l/d3) B_bar2",
            e.a0.inf,
            pos(e.a2.sup - c1) * b2 + c1 * b2,
            Strict,
        ),
        margin(
            "b0_inf > (b1_sup - chi2*k/d3)_+ B_bar1 + (chi2*k/d3) B_bar1",
            e.b0.inf,
            pos(e.b1.sup - c2) * b1 + c2 * b1,
            Strict,
        ),
    ])
}

/// Instability of both semitrivial states of the chemotaxis-free system.
pub fn check_semitrivial_instability(e: &ExtremaTable) -> Condition {
    use Strictness::*;
    Condition::from_margins(vec![
        margin(
            "a0_inf*b2_inf > a2_sup*b0_sup",
            e.a0.inf * e.b2.inf,
            e.a2.sup * e.b0.sup,
            Strict,
        ),
        margin(
            "b0_inf*a1_inf > b1_sup*a0_sup",
            e.b0.inf * e.a1.inf,
            e.b1.sup * e.a0.sup,
            Strict,
        ),
    ])
}

/// The three groups of extinction conditions for species `u`.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct ExtinctionConditions {
    /// `b2_inf > 2 chi2 l/d3` and `a2_inf >= chi1 l/d3`.
    pub sensitivity: Condition,
    /// Competition pressure of `v` on `u` against the carrying capacity of `v`.
    pub competition: Condition,
    /// Self-limitation of `u` against the growth of `v`.
    pub self_limitation: Condition,
}

impl ExtinctionConditions {
    pub fn all_hold(&self) -> bool {
        self.sensitivity.holds && self.competition.holds && self.self_limitation.holds
    }
}

pub fn check_extinction_conditions(e: &ExtremaTable, p: &ModelParams) -> ExtinctionConditions {
    use Strictness::*;
    let c = p.l_chi2();
    let ck2 = p.k_chi2();
    let rb_inf = e.b2.inf - c;
    let rb_sup = e.b2.sup - c;
    let growth_v = e.b0.inf * rb_inf - e.b0.sup * c;

    let sensitivity = Condition::from_margins(vec![
        margin("b2_inf > 2*chi2*l/d3", e.b2.inf, 2.0 * c, Strict),
        margin("a2_inf >= chi1*l/d3", e.a2.inf, p.l_chi1(), NonStrict),
    ]);
    let competition = Condition::from_margins(vec![margin(
        "a2_inf*(b0_inf*(b2_inf - c) - b0_sup*c) >= a0_sup*((b2_inf - c)(b2_sup - c) - c^2)",
        e.a2.inf * growth_v,
        e.a0.sup * (rb_inf * rb_sup - c * c),
        NonStrict,
    )]);
    let self_limitation = Condition::from_margins(vec![margin(
        "(a1_inf - chi1*k/d3)(b0_inf*(b2_inf - c) - b0_sup*c) > [((b1_sup - chi2*k/d3)_+ + chi2*k/d3)(b2_inf - c) + c*(b1_inf - chi2*k/d3)_-]*a0_sup",
        (e.a1.inf - p.k_chi1()) * growth_v,
        ((pos(e.b1.sup - ck2) + ck2) * rb_inf + c * neg(e.b1.inf - ck2)) * e.a0.sup,
        Strict,
    )]);
    ExtinctionConditions {
        sensitivity,
        competition,
        self_limitation,
    }
}

/// Asymptotic band `[α, β]` for `v` when `u` goes extinct.
pub fn extinction_limits(e: &ExtremaTable, p: &ModelParams) -> Result<(f64, f64), HypothesisError> {
    let c = p.l_chi2();
    let rb_inf = e.b2.inf - c;
    let rb_sup = e.b2.sup - c;
    let den_beta = rb_inf * rb_sup - c * c;
    if den_beta <= 0.0 {
        return Err(HypothesisError::NonPositiveDenominator {
            what: "beta",
            value: den_beta,
        });
    }
    if rb_sup <= 0.0 {
        return Err(HypothesisError::NonPositiveDenominator {
            what: "alpha",
            value: rb_sup,
        });
    }
    let beta = (e.b0.sup * rb_sup - c * e.b0.inf) / den_beta;
    let alpha = (e.b0.inf - c * beta) / rb_sup;
    // alpha and beta coincide analytically for constant coefficients; allow rounding
    if !(alpha > 0.0 && alpha <= beta + 1e-12 * beta.abs().max(1.0)) {
        return Err(HypothesisError::OrderingViolated {
            what: "extinction band",
            detail: format!("alpha = {alpha}, beta = {beta}"),
        });
    }
    Ok((alpha, beta))
}

/// Invariant rectangle `(s₁, r₁, r₂, s₂)` of the chemotaxis-free kinetic system,
/// with `0 < s₁ <= r₁` and `0 < r₂ <= s₂`.
pub fn lv_invariant_rect(e: &ExtremaTable) -> Result<[f64; 4], HypothesisError> {
    let quotient = |what: &'static str, num: f64, den: f64| {
        if den > 0.0 {
            Ok(num / den)
        } else {
            Err(HypothesisError::NonPositiveDenominator { what, value: den })
        }
    };
    let s1 = quotient(
        "s1",
        e.b2.inf * e.a0.inf - e.a2.sup * e.b0.sup,
        e.b2.inf * e.a1.sup - e.a2.sup * e.b1.inf,
    )?;
    let r1 = quotient(
        "r1",
        e.b2.sup * e.a0.sup - e.a2.inf * e.b0.inf,
        e.b2.sup * e.a1.inf - e.a2.inf * e.b1.sup,
    )?;
    let r2 = quotient(
        "r2",
        e.a1.inf * e.b0.inf - e.b1.sup * e.a0.sup,
        e.a1.inf * e.b2.sup - e.b1.sup * e.a2.inf,
    )?;
    let s2 = quotient(
        "s2",
        e.a1.sup * e.b0.sup - e.b1.inf * e.a0.inf,
        e.a1.sup * e.b2.inf - e.b1.inf * e.a2.sup,
    )?;
    if !(s1 > 0.0 && s1 <= r1 && r2 > 0.0 && r2 <= s2) {
        return Err(HypothesisError::OrderingViolated {
            what: "invariant rectangle",
            detail: format!("s1 = {s1}, r1 = {r1}, r2 = {r2}, s2 = {s2}"),
        });
    }
    Ok([s1, r1, r2, s2])
}

/// Everything the checker knows about one parameter set.
#[derive(Debug, Clone, PartialEq)]
pub struct HypothesisReport {
    pub h1: Condition,
    pub h2: Condition,
    pub h3: Condition,
    pub h4: Condition,
    pub h5: Condition,
    pub a_bar: Option<(f64, f64)>,
    pub b_bar: Option<(f64, f64)>,
    pub semitrivial_instability: Condition,
    pub extinction: ExtinctionConditions,
    pub alpha_beta: Option<(f64, f64)>,
    pub lv_rect: Option<[f64; 4]>,
    pub dimension: u32,
}

impl HypothesisReport {
    pub fn evaluate(e: &ExtremaTable, p: &ModelParams, dimension: u32) -> Self {
        let h1 = check_h1(e, p);
        let h2 = check_h2(e, p);
        let a_bar = if h1.holds { bounds_upper_a(e, p).ok() } else { None };
        let b_bar = if h2.holds { bounds_upper_b(e, p).ok() } else { None };
        let extinction = check_extinction_conditions(e, p);
        let alpha_beta = if extinction.all_hold() && (h1.holds || h2.holds) {
            extinction_limits(e, p).ok()
        } else {
            None
        };
        let semitrivial_instability = check_semitrivial_instability(e);
        let lv_rect = if semitrivial_instability.holds {
            lv_invariant_rect(e).ok()
        } else {
            None
        };
        Self {
            h3: check_h3(e, p, dimension),
            h4: check_h4(e, p),
            h5: check_h5(e, p),
            h1,
            h2,
            a_bar,
            b_bar,
            semitrivial_instability,
            extinction,
            alpha_beta,
            lv_rect,
            dimension,
        }
    }

    /// Upper bounds the solution eventually respects, preferring `Ā` when both exist.
    pub fn upper_bounds(&self) -> Option<(f64, f64)> {
        self.a_bar.or(self.b_bar)
    }
}
