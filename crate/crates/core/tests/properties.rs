use nalgebra::DMatrix;
use num_bigint::BigInt;
use num_rational::BigRational;
use proptest::prelude::*;

use sos_ggm::boundary_law::{
    build_p, build_q, build_u, psi_k, residual_scale, residuals, solve_generic, ModelParams,
};
use sos_ggm::ggm::{boundary_law_from_pair, kernel_prob, series_sums, truncated_tails};
use sos_ggm::polyroots::{
    isolate_positive_roots, solve_cubic, solve_quartic_ferrari, RealPolynomial,
};

/// Real eigenvalues of the companion matrix of a monic polynomial (ascending coefficients).
fn companion_real_roots(monic: &[f64]) -> Vec<f64> {
    let n = monic.len() - 1;
    let mut m = DMatrix::<f64>::zeros(n, n);
    for i in 1..n {
        m[(i, i - 1)] = 1.0;
    }
    for i in 0..n {
        m[(i, n - 1)] = -monic[i];
    }
    let mut out: Vec<f64> = m
        .complex_eigenvalues()
        .iter()
        .filter(|z| z.im.abs() < 1e-7)
        .map(|z| z.re)
        .collect();
    out.sort_by(f64::total_cmp);
    out
}

fn rational_tau() -> impl Strategy<Value = BigRational> {
    (1i64..=40).prop_flat_map(|q| {
        (2 * q + 1..12 * q).prop_map(move |p| BigRational::new(BigInt::from(p), BigInt::from(q)))
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn p_factors_through_q(k in 2u32..=4, tau in rational_tau()) {
        let params = ModelParams::exact(k, tau).unwrap();
        let (quot, rem) = build_p(&params).divide_exact(&build_q(&params)).unwrap();
        prop_assert!(rem.is_zero());
        prop_assert_eq!(quot, -&build_u(&params));
    }

    #[test]
    fn solutions_and_swaps_solve_the_system(k in 2u32..=4, tau in 2.05f64..12.0) {
        let params = ModelParams::new(k, tau).unwrap();
        for p in solve_generic(&params, 1e-12).unwrap() {
            let scale = residual_scale(k, tau, p.a, p.b);
            for r in [residuals(k, tau, p.a, p.b), residuals(k, tau, p.b, p.a)] {
                prop_assert!(r[0].abs() < 1e-12 * scale && r[1].abs() < 1e-12 * scale);
            }
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn root_count_within_descartes_bound(c in prop::collection::vec(-30i64..=30, 2..10)) {
        let p = RealPolynomial::from_i64s(&c);
        prop_assume!(!p.is_zero());
        let roots = isolate_positive_roots(&p, 1e-12).unwrap();
        prop_assert!(roots.count <= p.descartes_bound());
        let bound = 1e-12 * (1.0 + p.abs_coeff_sum());
        for r in &roots.roots {
            let scale = r.value.max(1.0).powi(p.degree() as i32);
            prop_assert!(p.evaluate(r.value).abs() <= bound * scale);
        }
    }

    #[test]
    fn isolation_agrees_with_companion_eigenvalues(c in prop::collection::vec(-30i64..=30, 3..8)) {
        let p = RealPolynomial::from_i64s(&c);
        prop_assume!(p.degree() >= 2);
        let sqf = p.square_free_decomposition().unwrap();
        prop_assume!(sqf.len() == 1 && sqf[0].1 == 1);
        let lead = *c.iter().rev().find(|v| **v != 0).unwrap() as f64;
        let monic: Vec<f64> = p.coeffs_f64().iter().map(|v| v / lead).collect();
        let eig: Vec<f64> = companion_real_roots(&monic).into_iter().filter(|x| *x > 1e-9).collect();
        let iso = isolate_positive_roots(&p, 1e-13).unwrap().values();
        prop_assert_eq!(eig.len(), iso.len(), "{:?} vs {:?}", eig, iso);
        for (x, y) in eig.iter().zip(&iso) {
            prop_assert!((x - y).abs() < 1e-6 * x.abs().max(1.0));
        }
    }

    #[test]
    fn cubic_roots_reproduce_the_cubic(
        a3 in prop_oneof![-10.0f64..-0.1, 0.1f64..10.0],
        a2 in -10.0f64..10.0, a1 in -10.0f64..10.0, a0 in -10.0f64..10.0,
    ) {
        let sol = solve_cubic(a3, a2, a1, a0).unwrap();
        for x in sol.values() {
            let v = ((a3 * x + a2) * x + a1) * x + a0;
            let m = ((a3.abs() * x.abs() + a2.abs()) * x.abs() + a1.abs()) * x.abs() + a0.abs();
            prop_assert!(v.abs() < 1e-12 * m.max(1.0));
        }
    }

    #[test]
    fn quartic_matches_isolation_and_eigenvalues(tau in 2.01f64..40.0) {
        let q = solve_quartic_ferrari(tau).unwrap();
        let iso = isolate_positive_roots(&RealPolynomial::float(vec![2.0, tau, 0.0, -tau, 1.0]), 1e-13)
            .unwrap()
            .values();
        let mut ferrari: Vec<f64> = q.roots.iter().copied().filter(|x| *x > 0.0).collect();
        ferrari.sort_by(f64::total_cmp);
        prop_assert_eq!(ferrari.len(), iso.len());
        for (x, y) in ferrari.iter().zip(&iso) {
            prop_assert!((x - y).abs() < 1e-10);
        }
        let eig: Vec<f64> = companion_real_roots(&[2.0, tau, 0.0, -tau, 1.0]).into_iter().filter(|x| *x > 0.0).collect();
        prop_assert_eq!(eig.len(), iso.len());
        for (x, y) in eig.iter().zip(&iso) {
            prop_assert!((x - y).abs() < 1e-8 * x.max(1.0));
        }
    }

    #[test]
    fn psi_is_smallest_at_one(k in 2u32..=6, a in 1e-3f64..10.0) {
        prop_assert!(psi_k(k, 1.0).unwrap() <= psi_k(k, a).unwrap() * (1.0 + 1e-14));
    }

    #[test]
    fn kernel_commutes_with_period_shift(tau in 4.2f64..12.0, i in -20i64..20, j in -20i64..20) {
        let params = ModelParams::new(2, tau).unwrap();
        for p in solve_generic(&params, 1e-12).unwrap() {
            let law = boundary_law_from_pair(&p).unwrap();
            prop_assert_eq!(kernel_prob(&law, i, j), kernel_prob(&law, i + 4, j + 4));
            prop_assert_eq!(kernel_prob(&law, i, j), kernel_prob(&law, i - 8, j - 8));
        }
    }

    #[test]
    fn series_closed_form_matches_truncation(tau in 2.1f64..12.0, i in -12i64..12) {
        let params = ModelParams::new(3, tau).unwrap();
        for p in solve_generic(&params, 1e-12).unwrap() {
            let law = boundary_law_from_pair(&p).unwrap();
            let s = series_sums(&law).unwrap();
            let (l, r) = truncated_tails(&law, i, 200 + i.abs());
            prop_assert!((s.l_at(i) - l).abs() <= 1e-12 * l.max(1.0));
            prop_assert!((s.r_at(i) - r).abs() <= 1e-12 * r.max(1.0));
        }
    }
}
