//! One-step matrices of the generalized-α family.
//!
//! With the scaled state 𝐔 = (U⁽⁰⁾, τU⁽¹⁾, …, τ^{p−1}U^{(p−1)}) and T = λτ, one
//! step of the scheme is `L 𝐔_{n+1} = R 𝐔_n`. Rows `0..p−1` are the Taylor
//! ladder for the lower derivatives, the last row is the consistency equation
//! `V^{α_m} = −λ U^{α_f}` multiplied through by τ.

use std::ops::{Add, Div, Mul, Neg, Sub};

use num_complex::Complex64;

use crate::numkit::{self, CMatrix};
use crate::schemes::{SchemeParams, Variant};
use crate::{Error, Result};

/// Field operations needed to assemble L and R. Implemented for `Complex64`
/// here and for the extended-precision float in [`crate::orderlab`].
pub trait LrScalar:
    Clone + Add<Output = Self> + Sub<Output = Self> + Mul<Output = Self> + Div<Output = Self> + Neg<Output = Self>
{
    fn from_int(n: i64) -> Self;
}

impl LrScalar for Complex64 {
    fn from_int(n: i64) -> Self {
        Complex64::new(n as f64, 0.0)
    }
}

fn factorial(n: usize) -> i64 {
    (1..=n as i64).product()
}

/// Row-major entries of (L, R) for order `p`, with `gammas[j-1] = γ_j`.
pub fn lr_entries<S: LrScalar>(p: usize, alpha_m: &S, alpha_f: &S, gammas: &[S], t: &S) -> (Vec<S>, Vec<S>) {
    assert!(p >= 2, "order must be at least 2");
    assert_eq!(gammas.len(), p - 1, "need p-1 gammas");
    let q = p - 1;
    let k = p - 2;
    let zero = S::from_int(0);
    let one = S::from_int(1);
    let inv_fact = |n: usize| S::from_int(1) / S::from_int(factorial(n));
    let mut l = vec![zero.clone(); p * p];
    let mut r = vec![zero.clone(); p * p];
    let at = |i: usize, j: usize| i * p + j;

    for i in 0..q {
        let g = gammas[q - i - 1].clone() * inv_fact(q - i);
        l[at(i, i)] = one.clone();
        l[at(i, q)] = l[at(i, q)].clone() - g.clone();
        for s in 0..=q - i {
            r[at(i, i + s)] = r[at(i, i + s)].clone() + inv_fact(s);
        }
        r[at(i, q)] = r[at(i, q)].clone() - g;
    }

    let kf = inv_fact(k);
    l[at(q, k)] = l[at(q, k)].clone() + alpha_f.clone() * t.clone() * kf.clone();
    l[at(q, q)] = l[at(q, q)].clone() + alpha_m.clone() * kf.clone();
    for j in 0..=k {
        let mut v = -(t.clone() * inv_fact(j));
        if j >= 1 {
            v = v - inv_fact(j - 1);
        }
        r[at(q, j)] = r[at(q, j)].clone() + v;
    }
    r[at(q, k)] = r[at(q, k)].clone() + t.clone() * alpha_f.clone() * kf.clone();
    r[at(q, q)] = (alpha_m.clone() - one) * kf;
    (l, r)
}

/// L and R at a given T = λτ.
#[derive(Debug, Clone, PartialEq)]
pub struct AmplificationPair {
    pub l: CMatrix,
    pub r: CMatrix,
    pub t: Complex64,
}

impl AmplificationPair {
    pub fn amplification(&self) -> Result<CMatrix> {
        numkit::solve_matrix(&self.l, &self.r).map_err(|e| match e {
            Error::SingularMatrix { .. } => Error::SingularAtT {
                re: self.t.re,
                im: self.t.im,
            },
            other => other,
        })
    }
}

pub fn build_lr(params: &SchemeParams, t: Complex64) -> AmplificationPair {
    let p = params.p;
    let gammas: Vec<Complex64> = params.gammas.iter().map(|&g| Complex64::new(g, 0.0)).collect();
    let (l, r) = lr_entries(
        p,
        &Complex64::new(params.alpha_m, 0.0),
        &Complex64::new(params.alpha_f, 0.0),
        &gammas,
        &t,
    );
    AmplificationPair {
        l: CMatrix::from_vec(p, p, l),
        r: CMatrix::from_vec(p, p, r),
        t,
    }
}

/// G(T) = L⁻¹R, formed by a linear solve.
pub fn amplification_matrix(params: &SchemeParams, t: Complex64) -> Result<CMatrix> {
    build_lr(params, t).amplification()
}

fn require_p3(params: &SchemeParams, what: &str) -> Result<()> {
    if params.p != 3 {
        return Err(Error::VariantUnsupported(format!("{what} is defined for p = 3 (got p = {})", params.p)));
    }
    Ok(())
}

/// The T → 0 limit of G for p = 3.
///
/// Row 1 is (1, 1 − γ₂/(2α_m), 1/2 − γ₂/(2α_m)), which is what L⁻¹R actually
/// tends to; the block-triangular structure means the eigenvalues depend only
/// on the lower 2×2 block.
pub fn limit_matrix_zero(params: &SchemeParams) -> Result<CMatrix> {
    require_p3(params, "A0")?;
    let am = params.alpha_m;
    if am == 0.0 {
        return Err(Error::DegenerateAlphaM);
    }
    let (g1, g2) = (params.gammas[0], params.gammas[1]);
    Ok(CMatrix::from_real_rows(&[
        &[1.0, 1.0 - g2 / (2.0 * am), 0.5 - g2 / (2.0 * am)],
        &[0.0, 1.0 - g1 / am, 1.0 - g1 / am],
        &[0.0, -1.0 / am, 1.0 - 1.0 / am],
    ]))
}

/// The Re(T) → ∞ limit of G for the p = 3 EqualGamma scheme.
pub fn limit_matrix_inf(params: &SchemeParams) -> Result<CMatrix> {
    require_p3(params, "A_inf")?;
    if params.variant != Variant::EqualGamma {
        return Err(Error::VariantUnsupported("A_inf closed form exists for equal-gamma only".into()));
    }
    let af = params.alpha_f;
    let g = params.gammas[0];
    if af == 0.0 || g == 0.0 {
        return Err(Error::DegenerateParams("A_inf needs alpha_f != 0 and gamma_1 != 0".into()));
    }
    let a = 1.0 - 1.0 / (2.0 * af);
    Ok(CMatrix::from_real_rows(&[
        &[a, a, 0.0],
        &[-1.0 / af, 1.0 - 1.0 / af, 0.0],
        &[-1.0 / (g * af), -1.0 / (g * af), 1.0 - 1.0 / g],
    ]))
}

/// Closed-form eigenvalues of A₀ for the third-order EqualGamma scheme:
/// η₁ = 1 and η₂,₃ = (12α_f + 12α_m − 17 ± √((17−12α_f)² − 24α_m(7+12α_f) + 144α_m²)) / (24α_m).
pub fn a0_eigenvalues_closed_form(alpha_m: f64, alpha_f: f64) -> [Complex64; 3] {
    let disc = (17.0 - 12.0 * alpha_f).powi(2) - 24.0 * alpha_m * (7.0 + 12.0 * alpha_f) + 144.0 * alpha_m * alpha_m;
    let s = Complex64::new(disc, 0.0).sqrt();
    let b = Complex64::new(12.0 * alpha_f + 12.0 * alpha_m - 17.0, 0.0);
    let d = 24.0 * alpha_m;
    [Complex64::new(1.0, 0.0), (b + s) / d, (b - s) / d]
}

/// Closed-form eigenvalues of A∞ for the third-order EqualGamma scheme:
/// η₁ = 1 − 12/(5 − 12α_f + 12α_m) (= 1 − 1/γ₁) and the roots
/// ((4α_f − 3) ± √(9 − 16α_f)) / (4α_f) of the upper-left 2×2 block, which are
/// real for α_f ≤ 9/16 and complex above.
pub fn ainf_eigenvalues_closed_form(alpha_m: f64, alpha_f: f64) -> [Complex64; 3] {
    let eta1 = 1.0 - 12.0 / (5.0 - 12.0 * alpha_f + 12.0 * alpha_m);
    let s = Complex64::new(9.0 - 16.0 * alpha_f, 0.0).sqrt();
    let b = Complex64::new(4.0 * alpha_f - 3.0, 0.0);
    let d = 4.0 * alpha_f;
    [Complex64::new(eta1, 0.0), (b + s) / d, (b - s) / d]
}

/// Eigenvalue of G(T) nearest to e^{−T}; ties go to the larger real part.
pub fn principal_eigenvalue(params: &SchemeParams, t: Complex64) -> Result<Complex64> {
    let g = amplification_matrix(params, t)?;
    let eig = numkit::eigenvalues(&g)?;
    Ok(pick_principal(&eig, t))
}

pub(crate) fn pick_principal(eig: &[Complex64], t: Complex64) -> Complex64 {
    let target = (-t).exp();
    let mut best = eig[0];
    for &z in &eig[1..] {
        let dz = (z - target).norm();
        let db = (best - target).norm();
        if dz < db || (dz == db && z.re > best.re) {
            best = z;
        }
    }
    best
}

/// max over n of |Σ_{j=0}^{p} (−1)ʲ G_j U_{n+1−j}| with G₀ = 1 and G_j the
/// principal-minor sums of G(T).
pub fn characteristic_recurrence_residual(params: &SchemeParams, t: Complex64, sequence: &[Complex64]) -> Result<f64> {
    let p = params.p;
    if sequence.len() < p + 1 {
        return Err(Error::TooShort {
            need: p + 1,
            got: sequence.len(),
        });
    }
    let g = amplification_matrix(params, t)?;
    let mut inv = vec![Complex64::new(1.0, 0.0)];
    inv.extend(numkit::principal_minor_sums(&g)?);
    let mut worst = 0.0f64;
    for top in p..sequence.len() {
        let mut acc = Complex64::new(0.0, 0.0);
        for (j, gj) in inv.iter().enumerate() {
            let sign = if j % 2 == 0 { 1.0 } else { -1.0 };
            acc += gj * sequence[top - j] * sign;
        }
        worst = worst.max(acc.norm());
    }
    Ok(worst)
}

/// The two bracket coefficients of the third-order truncation residual,
/// b₀ = −5 + 6γ₁ + 6γ₂ + 12α_f − 12α_m and b₁ = −5 − 2γ₁ + 6γ₂ + 12α_f − 12γ₁α_f.
/// `_t` is unused; the full residual is [`truncation_residual`].
pub fn truncation_bracket(params: &SchemeParams, _t: Complex64) -> Result<(f64, f64)> {
    require_p3(params, "truncation bracket")?;
    Ok(crate::schemes::residuals(
        params.gammas[0],
        params.gammas[1],
        params.alpha_m,
        params.alpha_f,
    ))
}

/// (b₀ + T b₁)·T³ / (12(α_m + γ₁α_f T)).
pub fn truncation_residual(params: &SchemeParams, t: Complex64) -> Result<Complex64> {
    let (b0, b1) = truncation_bracket(params, t)?;
    let den = (Complex64::new(params.alpha_m, 0.0) + t * (params.gammas[0] * params.alpha_f)) * 12.0;
    Ok((t * b1 + b0) * t * t * t / den)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numkit::{multiset_close, re};
    use crate::schemes::make_scheme;

    fn corner() -> SchemeParams {
        make_scheme(3, 7.0 / 12.0, 0.5, Variant::EqualGamma).unwrap()
    }

    #[test]
    fn p3_matrices_at_zero() {
        let s = make_scheme(3, 0.8, 0.6, Variant::EqualGamma).unwrap();
        let g = s.gammas[0];
        let pair = build_lr(&s, re(0.0));
        let l = CMatrix::from_real_rows(&[&[1.0, 0.0, -g / 2.0], &[0.0, 1.0, -g], &[0.0, 0.0, 0.8]]);
        let r = CMatrix::from_real_rows(&[&[1.0, 1.0, (1.0 - g) / 2.0], &[0.0, 1.0, 1.0 - g], &[0.0, -1.0, 0.8 - 1.0]]);
        assert!(pair.l.max_abs_diff(&l) < 1e-15);
        assert!(pair.r.max_abs_diff(&r) < 1e-15);
    }

    #[test]
    fn p3_matrices_general_t() {
        let s = make_scheme(3, 0.9, 0.55, Variant::RemarkOne).unwrap();
        let (g1, g2) = (s.gammas[0], s.gammas[1]);
        let t = Complex64::new(0.7, -0.3);
        let pair = build_lr(&s, t);
        let l = CMatrix::from_rows(&[
            vec![re(1.0), re(0.0), re(-g2 / 2.0)],
            vec![re(0.0), re(1.0), re(-g1)],
            vec![re(0.0), t * 0.55, re(0.9)],
        ]);
        let r = CMatrix::from_rows(&[
            vec![re(1.0), re(1.0), re((1.0 - g2) / 2.0)],
            vec![re(0.0), re(1.0), re(1.0 - g1)],
            vec![-t, t * (0.55 - 1.0) - 1.0, re(0.9 - 1.0)],
        ]);
        assert!(pair.l.max_abs_diff(&l) < 1e-15);
        assert!(pair.r.max_abs_diff(&r) < 1e-15);
    }

    #[test]
    fn corner_last_row_of_l() {
        let pair = build_lr(&corner(), re(1.0));
        assert_eq!(pair.l.row(2), &[re(0.0), re(0.5), re(7.0 / 12.0)]);
    }

    #[test]
    fn p2_at_zero_eigenvalues() {
        let am = 0.8;
        let s = make_scheme(2, am, 0.6, Variant::EqualGamma).unwrap();
        let e = numkit::eigenvalues(&amplification_matrix(&s, re(0.0)).unwrap()).unwrap();
        assert!(multiset_close(&e, &[re(1.0), re(1.0 - 1.0 / am)], 1e-13));
    }

    #[test]
    fn first_column_at_zero() {
        let g = amplification_matrix(&corner(), re(0.0)).unwrap();
        assert_eq!(g.column(0).0, vec![re(1.0), re(0.0), re(0.0)]);
    }

    #[test]
    fn entry_31_closed_form() {
        let s = make_scheme(3, 0.9, 0.6, Variant::EqualGamma).unwrap();
        let t = Complex64::new(2.0, 1.0);
        let g = amplification_matrix(&s, t).unwrap();
        let want = -t / (t * (s.gammas[0] * 0.6) + 0.9);
        assert!((g[(2, 0)] - want).norm() < 1e-14);
    }

    #[test]
    fn singular_l_reports_pole() {
        // α_m + γ₁α_f T = 0 at T = −α_m/(γ₁α_f)
        let s = corner();
        let t = re(-s.alpha_m / (s.gammas[0] * s.alpha_f));
        assert!(matches!(amplification_matrix(&s, t), Err(Error::SingularAtT { .. })));
    }

    #[test]
    fn a0_contains_unit_eigenvalue() {
        let a0 = limit_matrix_zero(&corner()).unwrap();
        let e = numkit::eigenvalues(&a0).unwrap();
        assert!(e.iter().any(|z| (z - 1.0).norm() < 1e-12));
        let closed = a0_eigenvalues_closed_form(7.0 / 12.0, 0.5);
        assert!(multiset_close(&e, &closed, 1e-12));
    }

    #[test]
    fn a0_degenerate_row_when_gamma_equals_alpha_m() {
        let s = SchemeParams {
            p: 3,
            alpha_m: 0.8,
            alpha_f: 0.6,
            gammas: vec![0.8, 0.8],
            variant: Variant::EqualGamma,
        };
        let a0 = limit_matrix_zero(&s).unwrap();
        assert_eq!(a0.row(1), &[re(0.0), re(0.0), re(0.0)]);
    }

    #[test]
    fn a0_requires_nonzero_alpha_m() {
        let s = make_scheme(3, 0.0, 0.6, Variant::EqualGamma).unwrap();
        assert_eq!(limit_matrix_zero(&s), Err(Error::DegenerateAlphaM));
    }

    #[test]
    fn ainf_at_half_rho() {
        let s = make_scheme(3, 29.0 / 36.0, 5.0 / 9.0, Variant::EqualGamma).unwrap();
        let ainf = limit_matrix_inf(&s).unwrap();
        assert!((ainf[(2, 2)] - re(1.0 - 1.0 / s.gammas[0])).norm() < 1e-15);
        let eta1 = 1.0 - 12.0 / (5.0 - 12.0 * s.alpha_f + 12.0 * s.alpha_m);
        assert!((eta1 + 0.5).abs() < 1e-14);
        let e = numkit::eigenvalues(&ainf).unwrap();
        assert!(e.iter().any(|z| (z - eta1).norm() < 1e-12));
    }

    #[test]
    fn ainf_at_corner_is_on_unit_circle() {
        let ainf = limit_matrix_inf(&corner()).unwrap();
        let e = numkit::eigenvalues(&ainf).unwrap();
        let rho = e.iter().map(|z| z.norm()).fold(0.0, f64::max);
        assert!((rho - 1.0).abs() < 1e-7);
    }

    #[test]
    fn ainf_rejects_remark_one() {
        let s = make_scheme(3, 2.0 / 3.0, 1.0 / 3.0, Variant::RemarkOne).unwrap();
        assert!(matches!(limit_matrix_inf(&s), Err(Error::VariantUnsupported(_))));
    }

    #[test]
    fn bracket_values() {
        let s = make_scheme(3, 1.0, 0.6, Variant::EqualGamma).unwrap();
        assert!(truncation_bracket(&s, re(0.3)).unwrap().0.abs() < 1e-13);
        let s = make_scheme(3, 2.0 / 3.0, 1.0 / 3.0, Variant::RemarkOne).unwrap();
        let (b0, b1) = truncation_bracket(&s, re(0.3)).unwrap();
        assert!(b0.abs() < 1e-13 && b1.abs() < 1e-13);
        let z = SchemeParams {
            p: 3,
            alpha_m: 0.0,
            alpha_f: 0.0,
            gammas: vec![0.0, 0.0],
            variant: Variant::EqualGamma,
        };
        assert_eq!(truncation_bracket(&z, re(0.0)).unwrap(), (-5.0, -5.0));
    }

    #[test]
    fn recurrence_short_sequence() {
        let err = characteristic_recurrence_residual(&corner(), re(0.1), &[re(1.0); 3]).unwrap_err();
        assert_eq!(err, Error::TooShort { need: 4, got: 3 });
    }

    #[test]
    fn recurrence_constant_sequence_at_zero() {
        let r = characteristic_recurrence_residual(&corner(), re(0.0), &[re(1.0); 8]).unwrap();
        assert!(r < 1e-14);
    }

    #[test]
    fn recurrence_eigen_sequence() {
        let s = make_scheme(3, 1.0, 0.6, Variant::EqualGamma).unwrap();
        let t = Complex64::new(0.4, 0.2);
        for rho in numkit::eigenvalues(&amplification_matrix(&s, t).unwrap()).unwrap() {
            let seq: Vec<Complex64> = (0..10).map(|n| rho.powu(n)).collect();
            assert!(characteristic_recurrence_residual(&s, t, &seq).unwrap() <= 1e-9);
        }
    }

    #[test]
    fn principal_tie_breaks_on_real_part() {
        let t = re(0.0);
        let z = pick_principal(&[Complex64::new(1.0, 0.0), Complex64::new(0.0, 1.0), Complex64::new(1.0, 0.0)], t);
        assert_eq!(z, re(1.0));
        let z = pick_principal(&[Complex64::new(0.5, 0.5), Complex64::new(1.5, -0.5)], t);
        assert_eq!(z, Complex64::new(1.5, -0.5));
    }
}
