use genalpha::numkit::{determinant, eigenvalues, multiset_close, principal_minor_sums, solve, CMatrix};
use genalpha::{CVector, Complex64};
use proptest::prelude::*;

fn entry() -> impl Strategy<Value = Complex64> {
    (-1.0..1.0f64, -1.0..1.0f64).prop_map(|(a, b)| Complex64::new(a, b))
}

fn matrix(n: usize) -> impl Strategy<Value = CMatrix> {
    proptest::collection::vec(entry(), n * n).prop_map(move |v| CMatrix::from_vec(n, n, v))
}

fn sized() -> impl Strategy<Value = CMatrix> {
    (1usize..=8).prop_flat_map(matrix)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn solve_residual_small(a in sized(), shift in 2.0..5.0f64) {
        let n = a.rows();
        let mut m = a.clone();
        for i in 0..n {
            m[(i, i)] += Complex64::new(shift * n as f64, 0.0);
        }
        let b = CVector((0..n).map(|i| Complex64::new(i as f64 + 1.0, -(i as f64))).collect());
        let x = solve(&m, &b).unwrap();
        let r = m.mul_vec(&x);
        for i in 0..n {
            prop_assert!((r[i] - b[i]).norm() <= 1e-12 * (1.0 + b.norm_inf()));
        }
    }

    #[test]
    fn triangular_eigenvalues_are_diagonal(a in sized()) {
        let n = a.rows();
        let mut t = a.clone();
        for i in 0..n {
            for j in 0..i {
                t[(i, j)] = Complex64::new(0.0, 0.0);
            }
        }
        let diag: Vec<Complex64> = (0..n).map(|i| t[(i, i)]).collect();
        let e = eigenvalues(&t).unwrap();
        // clustered diagonals are ill-conditioned; compare loosely
        prop_assert!(multiset_close(&e, &diag, 1e-5));
    }

    #[test]
    fn eigen_trace_and_determinant(a in sized()) {
        let e = eigenvalues(&a).unwrap();
        let n = a.rows();
        let trace: Complex64 = (0..n).map(|i| a[(i, i)]).sum();
        let sum: Complex64 = e.iter().sum();
        let prod: Complex64 = e.iter().product();
        prop_assert!((trace - sum).norm() <= 1e-10 * (1.0 + trace.norm()));
        prop_assert!((determinant(&a) - prod).norm() <= 1e-9 * (1.0 + prod.norm()));
    }

    #[test]
    fn determinant_is_multiplicative(a in matrix(4), b in matrix(4)) {
        let lhs = determinant(&a.matmul(&b));
        let rhs = determinant(&a) * determinant(&b);
        prop_assert!((lhs - rhs).norm() <= 1e-11 * (1.0 + rhs.norm()));
    }

    #[test]
    fn minor_sums_match_characteristic_polynomial(a in sized()) {
        // det(μI − A) = Σ (−1)ʲ E_j μ^{n−j}; check at μ = 0.37 − 0.2i
        let n = a.rows();
        let sums = principal_minor_sums(&a).unwrap();
        let mu = Complex64::new(0.37, -0.2);
        let mut shifted = a.scale(Complex64::new(-1.0, 0.0));
        for i in 0..n {
            shifted[(i, i)] += mu;
        }
        let direct = determinant(&shifted);
        let mut poly = mu.powu(n as u32);
        for (j, s) in sums.iter().enumerate() {
            let sign = if j % 2 == 0 { -1.0 } else { 1.0 };
            poly += s * mu.powu((n - j - 1) as u32) * sign;
        }
        prop_assert!((direct - poly).norm() <= 1e-10 * (1.0 + direct.norm()));
    }
}
