//! Parameter sets for the generalized-α family: the γ-rules, the C(p) table,
//! the four closed-form ρ∞ → (α_m, α_f) branches and the closed-form
//! unconditional-stability predicate of the third-order scheme.

use std::fmt;
use std::str::FromStr;

use num_rational::Ratio;

use crate::{Error, Result};

pub type Rational = Ratio<i64>;

/// C(p) for p = 2..=11, as (numerator, denominator).
const C_TABLE: [(i64, i64); 10] = [
    (1, 2),
    (5, 12),
    (1, 3),
    (31, 120),
    (1, 5),
    (41, 252),
    (1, 7),
    (31, 240),
    (1, 9),
    (61, 660),
];

/// Absolute slack applied to the closed inequalities of [`in_stability_region`]
/// so that corner points computed in floating point (e.g. 28/48 vs 7/12) are
/// not rejected by a rounding ulp.
pub const REGION_SLACK: f64 = 1e-12;

/// Rule used to fill the γ vector.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Variant {
    /// γ_j = C(p) + α_m − α_f for every j.
    EqualGamma,
    /// The alternative third-order pair γ₁ = 3α_m/(2+3α_f), γ₂ = (…)/(12+18α_f).
    RemarkOne,
}

impl Variant {
    pub fn name(self) -> &'static str {
        match self {
            Variant::EqualGamma => "equal-gamma",
            Variant::RemarkOne => "remark-one",
        }
    }
}

impl fmt::Display for Variant {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Variant {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "equal-gamma" | "equal" | "equalgamma" => Ok(Variant::EqualGamma),
            "remark-one" | "remark1" | "remarkone" => Ok(Variant::RemarkOne),
            other => Err(Error::InvalidArgument(format!("unknown variant '{other}'"))),
        }
    }
}

/// One of the four positive-ρ∞ closed-form maps ρ∞ → (α_m, α_f).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum RhoBranch {
    Main,
    Alt1,
    Alt2,
    Alt3,
}

impl RhoBranch {
    pub const ALL: [RhoBranch; 4] = [RhoBranch::Main, RhoBranch::Alt1, RhoBranch::Alt2, RhoBranch::Alt3];

    pub fn name(self) -> &'static str {
        match self {
            RhoBranch::Main => "main",
            RhoBranch::Alt1 => "alt1",
            RhoBranch::Alt2 => "alt2",
            RhoBranch::Alt3 => "alt3",
        }
    }
}

impl fmt::Display for RhoBranch {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for RhoBranch {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "main" => Ok(RhoBranch::Main),
            "alt1" => Ok(RhoBranch::Alt1),
            "alt2" => Ok(RhoBranch::Alt2),
            "alt3" => Ok(RhoBranch::Alt3),
            other => Err(Error::InvalidArgument(format!("unknown rho branch '{other}'"))),
        }
    }
}

/// Complete description of one integrator instance.
#[derive(Debug, Clone, PartialEq)]
pub struct SchemeParams {
    pub p: usize,
    pub alpha_m: f64,
    pub alpha_f: f64,
    /// γ₁ … γ_{p−1}; `gammas[0]` is γ₁.
    pub gammas: Vec<f64>,
    pub variant: Variant,
}

impl SchemeParams {
    /// Order p with the γ-rule selected by `variant`.
    pub fn new(p: usize, alpha_m: f64, alpha_f: f64, variant: Variant) -> Result<Self> {
        make_scheme(p, alpha_m, alpha_f, variant)
    }

    /// EqualGamma scheme at the (α_m, α_f) of a ρ∞ branch.
    pub fn from_rho(p: usize, rho_inf: f64, branch: RhoBranch) -> Result<Self> {
        let (am, af) = params_from_rho(rho_inf, branch)?;
        make_scheme(p, am, af, Variant::EqualGamma)
    }

    pub fn gamma(&self, j: usize) -> f64 {
        self.gammas[j - 1]
    }

    /// γ₁
    pub fn gamma1(&self) -> f64 {
        self.gammas[0]
    }
}

/// The tabulated constant C(p) of the γ-rule γ_j = C(p) + α_m − α_f.
pub fn c_of_p(p: usize) -> Result<Rational> {
    if !(2..=11).contains(&p) {
        return Err(Error::OutOfTable(p));
    }
    let (n, d) = C_TABLE[p - 2];
    Ok(Rational::new(n, d))
}

pub fn rational_to_f64(r: Rational) -> f64 {
    *r.numer() as f64 / *r.denom() as f64
}

/// EqualGamma γ in exact arithmetic for rational (α_m, α_f).
pub fn equal_gamma_exact(p: usize, alpha_m: Rational, alpha_f: Rational) -> Result<Rational> {
    Ok(c_of_p(p)? + alpha_m - alpha_f)
}

pub fn make_scheme(p: usize, alpha_m: f64, alpha_f: f64, variant: Variant) -> Result<SchemeParams> {
    if p < 2 {
        return Err(Error::InvalidArgument(format!("order p must be at least 2, got {p}")));
    }
    if !alpha_m.is_finite() || !alpha_f.is_finite() {
        return Err(Error::InvalidArgument("alpha_m and alpha_f must be finite".into()));
    }
    let gammas = match variant {
        Variant::EqualGamma => {
            let cp = rational_to_f64(c_of_p(p)?);
            vec![cp + alpha_m - alpha_f; p - 1]
        }
        Variant::RemarkOne => {
            if p != 3 {
                return Err(Error::VariantUnsupported(format!(
                    "remark-one variant is defined for p = 3 only (got p = {p})"
                )));
            }
            let den = 2.0 + 3.0 * alpha_f;
            if den == 0.0 {
                return Err(Error::DegenerateParams("2 + 3 alpha_f = 0".into()));
            }
            let g1 = 3.0 * alpha_m / den;
            let g2 = (10.0 - 9.0 * alpha_f - 36.0 * alpha_f * alpha_f
                + 6.0 * alpha_m
                + 36.0 * alpha_m * alpha_f)
                / (6.0 * den);
            vec![g1, g2]
        }
    };
    Ok(SchemeParams {
        p,
        alpha_m,
        alpha_f,
        gammas,
        variant,
    })
}

/// Closed-form (α_m, α_f) for a ρ∞ branch.
pub fn params_from_rho(rho: f64, branch: RhoBranch) -> Result<(f64, f64)> {
    if !(0.0..=1.0).contains(&rho) {
        return Err(Error::InvalidArgument(format!("rho_inf must lie in [0, 1], got {rho}")));
    }
    let r = rho;
    let pole = || Error::PoleAtRho {
        branch: branch.name(),
        rho,
    };
    let out = match branch {
        RhoBranch::Main => {
            let q = (r + 1.0) * (r + 1.0);
            ((13.0 + 20.0 * r - 5.0 * r * r) / (12.0 * q), (1.0 + 3.0 * r) / (2.0 * q))
        }
        RhoBranch::Alt1 => {
            let q = (r + 1.0) * (r + 1.0);
            if r == 1.0 {
                return Err(pole());
            }
            (
                (-13.0 - 31.0 * r + r * r - 5.0 * r * r * r) / (12.0 * q * (r - 1.0)),
                (1.0 + 3.0 * r) / (2.0 * q),
            )
        }
        RhoBranch::Alt2 | RhoBranch::Alt3 => {
            let den = 1.0 - r * r;
            if den == 0.0 {
                return Err(pole());
            }
            let s = (7.0 + 18.0 * r * r).sqrt();
            if branch == RhoBranch::Alt2 {
                (
                    (22.0 - 12.0 * r + 5.0 * r * r + 3.0 * s) / (12.0 * den),
                    (5.0 + s) / (4.0 * den),
                )
            } else {
                (
                    (22.0 + 12.0 * r + 5.0 * r * r - 3.0 * s) / (12.0 * den),
                    (5.0 - s) / (4.0 * den),
                )
            }
        }
    };
    Ok(out)
}

/// Closed-form unconditional-stability region of the third-order EqualGamma
/// scheme: α_m ≥ 7/12 and 1/2 ≤ α_f ≤ α_m − 1/12 (boundary included).
pub fn in_stability_region(alpha_m: f64, alpha_f: f64) -> bool {
    alpha_m >= 7.0 / 12.0 - REGION_SLACK
        && alpha_f >= 0.5 - REGION_SLACK
        && alpha_f <= alpha_m - 1.0 / 12.0 + REGION_SLACK
}

/// Third-order conditions (r₁, r₂):
/// r₁ = −5 + 6γ₁ + 6γ₂ + 12α_f − 12α_m,
/// r₂ = −5 − 2γ₁ + 6γ₂ + 12α_f − 12γ₁α_f.
pub fn order_condition_residuals(params: &SchemeParams) -> Result<(f64, f64)> {
    if params.p != 3 {
        return Err(Error::VariantUnsupported(format!(
            "order conditions are defined for p = 3 (got p = {})",
            params.p
        )));
    }
    Ok(residuals(params.gammas[0], params.gammas[1], params.alpha_m, params.alpha_f))
}

pub(crate) fn residuals(g1: f64, g2: f64, am: f64, af: f64) -> (f64, f64) {
    (
        -5.0 + 6.0 * g1 + 6.0 * g2 + 12.0 * af - 12.0 * am,
        -5.0 - 2.0 * g1 + 6.0 * g2 + 12.0 * af - 12.0 * g1 * af,
    )
}

/// [`order_condition_residuals`] in exact rational arithmetic.
pub fn residuals_exact(g1: Rational, g2: Rational, am: Rational, af: Rational) -> (Rational, Rational) {
    let k = |n: i64| Rational::from_integer(n);
    (
        k(-5) + k(6) * g1 + k(6) * g2 + k(12) * af - k(12) * am,
        k(-5) - k(2) * g1 + k(6) * g2 + k(12) * af - k(12) * g1 * af,
    )
}
