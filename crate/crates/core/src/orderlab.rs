//! Empirical order of accuracy and recovery of the C(p) constants.
//!
//! [`measure_order`] integrates the scalar test equation at a ladder of step
//! sizes and fits the log-log slope. [`recover_c`] treats C as unknown in
//! γ_j = C + α_m − α_f and finds the value that cancels the leading error
//! term of the principal eigenvalue of G(T), working in 320-bit binary
//! floating point so that the O(T^{p+1}) signal sits far above round-off.

use std::io::{self, Write};

use dashu_float::round::mode::HalfEven;
use dashu_float::FBig;
use num_complex::Complex64;

use crate::amplification::{lr_entries, LrScalar};
use crate::integrator::{integrate, step_count, DiagonalProblem};
use crate::numkit::CVector;
use crate::schemes::{c_of_p, rational_to_f64, SchemeParams};
use crate::stability::fmt17;
use crate::{Error, Result};

/// Errors below this are treated as round-off and left out of the fit.
pub const ROUNDOFF_FLOOR: f64 = 1e-13;

/// Working precision, in bits, of the C(p) oracle.
pub const HP_BITS: usize = 320;

/// Reference step ladder 2⁻³ … 2⁻⁸.
pub fn default_taus() -> Vec<f64> {
    (3..=8).map(|k| 0.5f64.powi(k)).collect()
}

/// Step sizes, final-time errors and the fitted slope.
#[derive(Debug, Clone, PartialEq)]
pub struct ConvergenceReport {
    pub taus: Vec<f64>,
    pub errors: Vec<f64>,
    /// True where the error sits under [`ROUNDOFF_FLOOR`].
    pub at_floor: Vec<bool>,
    /// Least-squares slope of log₂ error against log₂ τ over the kept points.
    pub slope: f64,
    /// Slope between consecutive points; `None` for the first point or when
    /// either end is at the floor.
    pub pairwise_slopes: Vec<Option<f64>>,
}

impl ConvergenceReport {
    /// Builds a report from raw data; `taus` must be strictly decreasing.
    pub fn from_errors(taus: Vec<f64>, errors: Vec<f64>) -> Result<Self> {
        if taus.len() != errors.len() {
            return Err(Error::DimensionMismatch(format!(
                "{} step sizes but {} errors",
                taus.len(),
                errors.len()
            )));
        }
        if taus.len() < 2 {
            return Err(Error::TooShort { need: 2, got: taus.len() });
        }
        if taus.windows(2).any(|w| !(w[1] < w[0])) || taus.iter().any(|t| !(*t > 0.0)) {
            return Err(Error::InvalidArgument("step sizes must be positive and strictly decreasing".into()));
        }
        let at_floor: Vec<bool> = errors.iter().map(|e| !(*e >= ROUNDOFF_FLOOR)).collect();
        let kept: Vec<(f64, f64)> = taus
            .iter()
            .zip(&errors)
            .zip(&at_floor)
            .filter(|(_, f)| !**f)
            .map(|((t, e), _)| (t.log2(), e.log2()))
            .collect();
        if kept.is_empty() {
            return Err(Error::AllAtRoundoff);
        }
        if kept.len() < 2 {
            return Err(Error::TooShort { need: 2, got: kept.len() });
        }
        let slope = ols_slope(&kept);
        let mut pairwise_slopes = vec![None];
        for i in 1..taus.len() {
            pairwise_slopes.push(if at_floor[i] || at_floor[i - 1] {
                None
            } else {
                Some((errors[i - 1] / errors[i]).log2() / (taus[i - 1] / taus[i]).log2())
            });
        }
        Ok(ConvergenceReport {
            taus,
            errors,
            at_floor,
            slope,
            pairwise_slopes,
        })
    }

    /// CSV `tau,error,pairwise_slope`; the slope cell is empty where undefined.
    pub fn write_csv<W: Write>(&self, mut w: W) -> io::Result<()> {
        writeln!(w, "tau,error,pairwise_slope")?;
        for i in 0..self.taus.len() {
            let s = self.pairwise_slopes[i].map(fmt17).unwrap_or_default();
            writeln!(w, "{},{},{}", fmt17(self.taus[i]), fmt17(self.errors[i]), s)?;
        }
        Ok(())
    }
}

fn ols_slope(points: &[(f64, f64)]) -> f64 {
    let n = points.len() as f64;
    let mx = points.iter().map(|p| p.0).sum::<f64>() / n;
    let my = points.iter().map(|p| p.1).sum::<f64>() / n;
    let sxy: f64 = points.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let sxx: f64 = points.iter().map(|p| (p.0 - mx) * (p.0 - mx)).sum();
    sxy / sxx
}

/// Final-time error of the scalar problem `u' + λu = 0`, `u(0) = 1`.
pub fn final_error(params: &SchemeParams, lambda: Complex64, t_end: f64, tau: f64) -> Result<f64> {
    let prob = DiagonalProblem::scalar(lambda);
    let traj = integrate(params, &prob, &CVector(vec![Complex64::new(1.0, 0.0)]), tau, t_end)?;
    let n = step_count(tau, t_end)?;
    let exact = (-lambda * (n as f64 * tau)).exp();
    let (_, u) = traj.last().expect("trajectory has the initial sample");
    Ok((u[0] - exact).norm())
}

/// Integrates at each τ and fits the convergence slope.
pub fn measure_order(params: &SchemeParams, lambda: Complex64, t_end: f64, taus: &[f64]) -> Result<ConvergenceReport> {
    let errors = taus
        .iter()
        .map(|&tau| final_error(params, lambda, t_end, tau))
        .collect::<Result<Vec<_>>>()?;
    ConvergenceReport::from_errors(taus.to_vec(), errors)
}

type Hp = FBig<HalfEven, 2>;

impl LrScalar for Hp {
    fn from_int(n: i64) -> Self {
        Hp::from(n).with_precision(HP_BITS).value()
    }
}

fn hp(x: f64) -> Hp {
    Hp::try_from(x).expect("finite f64").with_precision(HP_BITS).value()
}

fn hp_abs(x: &Hp) -> Hp {
    if *x < Hp::ZERO {
        -x.clone()
    } else {
        x.clone()
    }
}

/// Determinant by partial-pivoted elimination, row-major `n×n`.
fn hp_det(mut a: Vec<Hp>, n: usize) -> Hp {
    let mut det = Hp::from_int(1);
    for col in 0..n {
        let piv = (col..n)
            .max_by(|&i, &j| hp_abs(&a[i * n + col]).partial_cmp(&hp_abs(&a[j * n + col])).unwrap())
            .unwrap();
        if a[piv * n + col] == Hp::ZERO {
            return Hp::from_int(0);
        }
        if piv != col {
            for j in 0..n {
                a.swap(piv * n + j, col * n + j);
            }
            det = -det;
        }
        let d = a[col * n + col].clone();
        det *= d.clone();
        for i in col + 1..n {
            let f = a[i * n + col].clone() / d.clone();
            if f == Hp::ZERO {
                continue;
            }
            for j in col + 1..n {
                let v = a[i * n + j].clone() - f.clone() * a[col * n + j].clone();
                a[i * n + j] = v;
            }
        }
    }
    det
}

/// Principal eigenvalue of G(T) for real T as the root of det(R − μL) next to
/// e^{−T}, refined by secant iteration.
fn hp_principal(p: usize, am: &Hp, af: &Hp, gammas: &[Hp], t: &Hp) -> Result<Hp> {
    let (l, r) = lr_entries(p, am, af, gammas, t);
    let f = |mu: &Hp| -> Hp {
        let m: Vec<Hp> = r.iter().zip(&l).map(|(ri, li)| ri.clone() - mu.clone() * li.clone()).collect();
        hp_det(m, p)
    };
    let tol = Hp::from_int(1) / Hp::from_int(2).powi((HP_BITS as i64 - 40).into());
    let mut x0 = (-t.clone()).exp();
    let mut x1 = x0.clone() * (Hp::from_int(1) + Hp::from_int(1) / Hp::from_int(1_000_000_000));
    let mut f0 = f(&x0);
    let mut f1 = f(&x1);
    for _ in 0..200 {
        if f1 == Hp::ZERO {
            return Ok(x1);
        }
        let den = f1.clone() - f0.clone();
        if den == Hp::ZERO {
            break;
        }
        let x2 = x1.clone() - f1.clone() * (x1.clone() - x0.clone()) / den;
        let step = hp_abs(&(x2.clone() - x1.clone()));
        x0 = x1;
        f0 = f1;
        x1 = x2;
        f1 = f(&x1);
        if step <= tol {
            return Ok(x1);
        }
    }
    Err(Error::NoConvergence { iterations: 200 })
}

/// E(C) = [μ(T) − e^{−T}]/T^{p+1} in extended precision, returned as f64.
pub fn error_functional(p: usize, alpha_m: f64, alpha_f: f64, c: f64, t: f64) -> Result<f64> {
    let v = error_functional_hp(p, &hp(alpha_m), &hp(alpha_f), c, &hp(t))?;
    Ok(v.to_f64().value())
}

fn error_functional_hp(p: usize, am: &Hp, af: &Hp, c: f64, t: &Hp) -> Result<Hp> {
    let g = hp(c) + am.clone() - af.clone();
    let gammas = vec![g; p - 1];
    let mu = hp_principal(p, am, af, &gammas, t)?;
    let e = (-t.clone()).exp();
    Ok((mu - e) / t.powi(((p + 1) as i64).into()))
}

/// Root of E(C) on [0, 1] at one T, by Illinois-modified regula falsi.
fn root_at(p: usize, am: &Hp, af: &Hp, t: &Hp, t_f64: f64) -> Result<f64> {
    let e = |c: f64| -> Result<f64> { Ok(error_functional_hp(p, am, af, c, t)?.to_f64().value()) };
    let (mut a, mut b) = (0.0f64, 1.0f64);
    let (mut fa, mut fb) = (e(a)?, e(b)?);
    if fa == 0.0 {
        return Ok(a);
    }
    if fb == 0.0 {
        return Ok(b);
    }
    if fa.signum() == fb.signum() {
        return Err(Error::NoRoot { lo: a, hi: b, t: t_f64 });
    }
    let mut side = 0i8;
    for _ in 0..200 {
        let c = (a * fb - b * fa) / (fb - fa);
        let c = if c > a.min(b) && c < a.max(b) { c } else { 0.5 * (a + b) };
        let fc = e(c)?;
        if fc == 0.0 || (b - a).abs() <= 4.0 * f64::EPSILON * c.abs().max(1e-3) {
            return Ok(c);
        }
        if fc.signum() == fb.signum() {
            b = c;
            fb = fc;
            if side == -1 {
                fa *= 0.5;
            }
            side = -1;
        } else {
            a = c;
            fa = fc;
            if side == 1 {
                fb *= 0.5;
            }
            side = 1;
        }
        if (b - a).abs() <= 2.0 * f64::EPSILON * c.abs().max(1e-3) {
            return Ok(0.5 * (a + b));
        }
    }
    Ok(0.5 * (a + b))
}

/// Base of the T-ladder; successive rungs halve it.
pub const C_RECOVERY_T: f64 = 1e-2;
/// Number of ladder rungs used for extrapolation.
pub const C_RECOVERY_RUNGS: usize = 6;

/// Outcome of a C(p) recovery.
#[derive(Debug, Clone, PartialEq)]
pub struct CRecovery {
    pub p: usize,
    pub alpha_m: f64,
    pub alpha_f: f64,
    /// Extrapolated T → 0 root.
    pub c: f64,
    /// Raw roots at each rung, largest T first.
    pub ladder: Vec<(f64, f64)>,
}

impl CRecovery {
    /// Raw root at T = 1e−2, carrying its O(T) bias.
    pub fn raw_at_base(&self) -> f64 {
        self.ladder[0].1
    }

    /// Raw root at T = 5e−3, the sensitivity check.
    pub fn raw_at_half(&self) -> f64 {
        self.ladder[1].1
    }
}

/// Neville evaluation at x = 0 of the interpolant through `(x_i, y_i)`.
fn neville_at_zero(xs: &[f64], ys: &[f64]) -> f64 {
    let mut p = ys.to_vec();
    let n = xs.len();
    for m in 1..n {
        for i in 0..n - m {
            p[i] = (xs[i + m] * p[i] - xs[i] * p[i + 1]) / (xs[i + m] - xs[i]);
        }
    }
    p[0]
}

/// Recovers C(p) with (α_m, α_f) held fixed. Orders 7 … 11 are accepted on
/// a best-effort basis.
pub fn recover_c_with(p: usize, alpha_m: f64, alpha_f: f64) -> Result<CRecovery> {
    if !(2..=11).contains(&p) {
        return Err(Error::OutOfTable(p));
    }
    let (am, af) = (hp(alpha_m), hp(alpha_f));
    let base = Hp::from_int(1) / Hp::from_int(100);
    let mut ladder = Vec::with_capacity(C_RECOVERY_RUNGS);
    for j in 0..C_RECOVERY_RUNGS {
        let t = base.clone() / Hp::from_int(1i64 << j);
        let t_f64 = C_RECOVERY_T / (1u64 << j) as f64;
        ladder.push((t_f64, root_at(p, &am, &af, &t, t_f64)?));
    }
    let xs: Vec<f64> = ladder.iter().map(|r| r.0).collect();
    let ys: Vec<f64> = ladder.iter().map(|r| r.1).collect();
    Ok(CRecovery {
        p,
        alpha_m,
        alpha_f,
        c: neville_at_zero(&xs, &ys),
        ladder,
    })
}

/// C(p) for 2 ≤ p ≤ 6 at (α_m, α_f) = (1, 3/4).
pub fn recover_c(p: usize) -> Result<f64> {
    if !(2..=6).contains(&p) {
        return Err(Error::OutOfTable(p));
    }
    Ok(recover_c_with(p, 1.0, 0.75)?.c)
}

/// Table value of C(p) as f64.
pub fn table_c(p: usize) -> Result<f64> {
    Ok(rational_to_f64(c_of_p(p)?))
}
