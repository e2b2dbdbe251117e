//! G(T) against matrices written straight from the method equations, plus
//! the spectral invariants of the one-step map.

use genalpha::amplification::{amplification_matrix, build_lr, limit_matrix_inf, limit_matrix_zero};
use genalpha::integrator::{init_state, march, step, DiagonalProblem};
use genalpha::numkit::{determinant, eigenvalues, principal_minor_sums, spectral_radius, CMatrix};
use genalpha::schemes::{in_stability_region, make_scheme, params_from_rho};
use genalpha::{CVector, Complex64, RhoBranch, Variant};
use proptest::prelude::*;

fn cx(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

/// Third-order G(T) from u₁ = u₀ + v₀ + w₀/2 + γ₂(w₁ − w₀)/2,
/// v₁ = v₀ + w₀ + γ₁(w₁ − w₀) and
/// v₀ + w₀ + α_m(w₁ − w₀) = −T(u₀ + v₀ + α_f(v₁ − v₀)).
fn g3_oracle(am: f64, af: f64, g1: f64, g2: f64, t: Complex64) -> CMatrix {
    let d = t * (af * g1) + am;
    let one = cx(1.0, 0.0);
    let rows = [
        [t * (af * g1) + am - t * (0.5 * g2), t * (af * g1) + am - t * (0.5 * g2) - 0.5 * g2, t * (0.5 * af * g1) - t * (0.5 * af * g2) + 0.5 * am - 0.5 * g2],
        [-t * g1, t * (af * g1) + am - t * g1 - g1, cx(am - g1, 0.0)],
        [-t, -t - one, t * (af * g1) - t * af + am - 1.0],
    ];
    CMatrix::from_rows(&rows.iter().map(|r| r.iter().map(|z| z / d).collect()).collect::<Vec<_>>())
}

/// Second-order G(T) from u₁ = u₀ + v₀ + γ₁(v₁ − v₀) and
/// α_m v₁ + (1 − α_m)v₀ = −T(α_f u₁ + (1 − α_f)u₀).
fn g2_oracle(am: f64, af: f64, g1: f64, t: Complex64) -> CMatrix {
    // [[1, −γ₁], [α_f T, α_m]]·x₁ = [[1, 1 − γ₁], [−(1 − α_f)T, α_m − 1]]·x₀
    let l = [[cx(1.0, 0.0), cx(-g1, 0.0)], [t * af, cx(am, 0.0)]];
    let r = [[cx(1.0, 0.0), cx(1.0 - g1, 0.0)], [-t * (1.0 - af), cx(am - 1.0, 0.0)]];
    let det = l[0][0] * l[1][1] - l[0][1] * l[1][0];
    let inv = [[l[1][1] / det, -l[0][1] / det], [-l[1][0] / det, l[0][0] / det]];
    let mut rows = vec![vec![cx(0.0, 0.0); 2]; 2];
    for i in 0..2 {
        for j in 0..2 {
            rows[i][j] = inv[i][0] * r[0][j] + inv[i][1] * r[1][j];
        }
    }
    CMatrix::from_rows(&rows)
}

fn admissible() -> impl Strategy<Value = (f64, f64)> {
    (7.0 / 12.0..1.5f64, 0.0..1.0f64).prop_map(|(am, s)| (am, 0.5 + s * (am - 1.0 / 12.0 - 0.5)))
}

fn any_t() -> impl Strategy<Value = Complex64> {
    (0.0..50.0f64, -50.0..50.0f64).prop_map(|(a, b)| cx(a, b))
}

#[test]
fn oracle_at_reference_point() {
    let s = make_scheme(3, 1.0, 0.75, Variant::EqualGamma).unwrap();
    let t = cx(0.3, -0.2);
    let g = amplification_matrix(&s, t).unwrap();
    let o = g3_oracle(1.0, 0.75, s.gammas[0], s.gammas[1], t);
    assert!(g.max_abs_diff(&o) < 1e-14, "{g:?} vs {o:?}");
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(128))]

    #[test]
    fn g3_matches_method_equations((am, af) in admissible(), t in any_t()) {
        let s = make_scheme(3, am, af, Variant::EqualGamma).unwrap();
        let g = amplification_matrix(&s, t).unwrap();
        let o = g3_oracle(am, af, s.gammas[0], s.gammas[1], t);
        prop_assert!(g.max_abs_diff(&o) <= 1e-12 * (1.0 + o.norm_inf()));
    }

    #[test]
    fn remark_one_matches_method_equations(am in 0.3..1.5f64, af in 0.1..1.2f64, t in any_t()) {
        let s = make_scheme(3, am, af, Variant::RemarkOne).unwrap();
        let d = t * (af * s.gammas[0]) + am;
        prop_assume!(d.norm() > 1e-3);
        let g = amplification_matrix(&s, t).unwrap();
        let o = g3_oracle(am, af, s.gammas[0], s.gammas[1], t);
        prop_assert!(g.max_abs_diff(&o) <= 1e-10 * (1.0 + o.norm_inf()));
    }

    #[test]
    fn g2_matches_method_equations(am in 0.3..1.5f64, af in 0.3..1.5f64, t in any_t()) {
        let s = make_scheme(2, am, af, Variant::EqualGamma).unwrap();
        let g = amplification_matrix(&s, t).unwrap();
        let o = g2_oracle(am, af, s.gammas[0], t);
        prop_assert!(g.max_abs_diff(&o) <= 1e-12 * (1.0 + o.norm_inf()));
    }

    #[test]
    fn lg_equals_r(p in 2usize..=6, (am, af) in admissible(), t in any_t()) {
        let s = make_scheme(p, am, af, Variant::EqualGamma).unwrap();
        let pair = build_lr(&s, t);
        let g = pair.amplification().unwrap();
        let lg = pair.l.matmul(&g);
        prop_assert!(lg.max_abs_diff(&pair.r) <= 1e-10 * (1.0 + pair.r.norm_inf()));
    }

    #[test]
    fn limits_are_approached((am, af) in admissible()) {
        let s = make_scheme(3, am, af, Variant::EqualGamma).unwrap();
        let g0 = amplification_matrix(&s, cx(1e-9, 0.0)).unwrap();
        prop_assert!(g0.max_abs_diff(&limit_matrix_zero(&s).unwrap()) < 1e-7);
        let ginf = amplification_matrix(&s, cx(1e9, 0.0)).unwrap();
        prop_assert!(ginf.max_abs_diff(&limit_matrix_inf(&s).unwrap()) < 1e-6);
    }

    #[test]
    fn admissible_real_axis_is_contractive((am, af) in admissible(), e in -4.0..8.0f64) {
        let s = make_scheme(3, am, af, Variant::EqualGamma).unwrap();
        let g = amplification_matrix(&s, cx(10f64.powf(e), 0.0)).unwrap();
        prop_assert!(spectral_radius(&g).unwrap() <= 1.0 + 1e-9);
    }

    #[test]
    fn minor_sums_are_spectral_invariants(p in 2usize..=6, (am, af) in admissible(), t in any_t()) {
        let s = make_scheme(p, am, af, Variant::EqualGamma).unwrap();
        let g = amplification_matrix(&s, t).unwrap();
        let sums = principal_minor_sums(&g).unwrap();
        let eig = eigenvalues(&g).unwrap();
        let trace: Complex64 = eig.iter().sum();
        let prod: Complex64 = eig.iter().product();
        let scale = 1.0 + g.norm_inf().powi(p as i32);
        prop_assert!((sums[0] - trace).norm() <= 1e-9 * scale);
        prop_assert!((sums[p - 1] - prod).norm() <= 1e-9 * scale);
        prop_assert!((sums[p - 1] - determinant(&g)).norm() <= 1e-9 * scale);
    }

    #[test]
    fn scalar_step_is_g_multiplication(p in 2usize..=5, (am, af) in admissible(), lr in 0.0..20.0f64, li in -20.0..20.0f64, tau in 0.01..1.0f64) {
        let s = make_scheme(p, am, af, Variant::EqualGamma).unwrap();
        let lambda = cx(lr, li);
        let prob = DiagonalProblem::scalar(lambda);
        let s0 = init_state(&prob, &CVector(vec![cx(1.0, 0.0)]), p, tau).unwrap();
        let s1 = step(&s, &prob, &s0).unwrap();
        let expect = amplification_matrix(&s, lambda * tau).unwrap().mul_vec(&s0.scalar_stack());
        let scale = expect.norm_inf().max(s0.norm_inf());
        for (a, b) in s1.scalar_stack().iter().zip(expect.iter()) {
            prop_assert!((a - b).norm() <= 1e-12 * scale);
        }
    }

    #[test]
    fn diagonal_system_decouples(d in proptest::collection::vec((0.0..10.0f64, -5.0..5.0f64), 1..5), tau in 0.01..0.5f64) {
        let s = make_scheme(3, 1.0, 0.75, Variant::EqualGamma).unwrap();
        let diag: Vec<Complex64> = d.iter().map(|&(a, b)| cx(a, b)).collect();
        let prob = DiagonalProblem::new(diag.clone());
        let u0 = CVector(vec![cx(1.0, 0.0); diag.len()]);
        let joint = march(&s, &prob, init_state(&prob, &u0, 3, tau).unwrap(), 10, |_, _| {}).unwrap();
        for (i, &l) in diag.iter().enumerate() {
            let single = DiagonalProblem::scalar(l);
            let one = march(&s, &single, init_state(&single, &CVector(vec![cx(1.0, 0.0)]), 3, tau).unwrap(), 10, |_, _| {}).unwrap();
            for b in 0..3 {
                prop_assert_eq!(joint.blocks[b][i], one.blocks[b][0]);
            }
        }
    }

    #[test]
    fn main_branch_is_inside_region(rho in 0.0..=1.0f64) {
        let (am, af) = params_from_rho(rho, RhoBranch::Main).unwrap();
        prop_assert!(in_stability_region(am, af));
    }
}
