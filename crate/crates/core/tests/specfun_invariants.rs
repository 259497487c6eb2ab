use mimo_hwi::specfun::{expint_en, expint_en_scaled, hyp0f1, hyp1f1, hyp2f2, ln_gamma, ln_pochhammer};
use proptest::prelude::*;

fn rel(a: f64, b: f64) -> f64 {
    (a - b).abs() / b.abs().max(f64::MIN_POSITIVE)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(400))]

    #[test]
    fn expint_recurrence(n in 1u32..30, x in 1e-3f64..50.0) {
        let lhs = expint_en(n + 1, x).unwrap();
        let rhs = ((-x).exp() - x * expint_en(n, x).unwrap()) / n as f64;
        // the right side cancels badly once x ≫ n; compare against the
        // size of the terms being subtracted
        let scale = (-x).exp() / n as f64;
        prop_assert!((lhs - rhs).abs() <= 1e-9 * lhs.max(scale), "n={n} x={x}: {lhs} vs {rhs}");
    }

    #[test]
    fn scaled_and_unscaled_agree(n in 1u32..40, x in 1e-3f64..20.0) {
        let scaled = expint_en_scaled(n, x).unwrap() * (-x).exp();
        prop_assert!(rel(scaled, expint_en(n, x).unwrap()) <= 1e-12);
    }

    #[test]
    fn expint_decreasing_in_n_and_x(n in 1u32..30, x in 1e-3f64..40.0, dx in 1e-3f64..5.0) {
        let e = expint_en(n, x).unwrap();
        prop_assert!(expint_en(n + 1, x).unwrap() < e);
        prop_assert!(expint_en(n, x + dx).unwrap() < e);
    }

    #[test]
    fn kummer_transform(a in 0.5f64..6.0, b in 0.5f64..6.0, z in 0.0f64..10.0) {
        let direct = hyp1f1(a, b, z).unwrap();
        let transformed = z.exp() * hyp1f1(b - a, b, -z).unwrap();
        prop_assert!(rel(transformed, direct) <= 1e-9, "{direct} vs {transformed}");
    }

    #[test]
    fn matched_parameters_collapse_to_exp(c in 0.1f64..20.0, d in 0.1f64..20.0, z in 0.0f64..30.0) {
        let e = z.exp();
        prop_assert!(rel(hyp1f1(c, c, z).unwrap(), e) <= 1e-12);
        prop_assert!(rel(hyp2f2(c, d, c, d, z).unwrap(), e) <= 1e-12);
        prop_assert!(rel(hyp2f2(c, d, d, c, z).unwrap(), e) <= 1e-12);
    }

    #[test]
    fn pochhammer_is_a_gamma_ratio(x in 0.5f64..50.0, k in 0u32..60) {
        let direct = ln_gamma(x + k as f64).unwrap() - ln_gamma(x).unwrap();
        prop_assert!((ln_pochhammer(x, k).unwrap() - direct).abs() <= 1e-11 * direct.abs().max(1.0));
    }
}

#[test]
fn zero_f_one_with_half_integer_parameter_is_cosh() {
    // ₀F₁(; 1/2; z²/4) = cosh z
    for z in [0.1, 1.0, 3.0, 7.5] {
        assert!(rel(hyp0f1(0.5, z * z / 4.0).unwrap(), f64::cosh(z)) < 1e-13);
    }
}

#[test]
fn gamma_recurrence_holds_on_a_grid() {
    let mut x = 0.5;
    while x < 150.0 {
        let lhs = ln_gamma(x + 1.0).unwrap();
        let rhs = ln_gamma(x).unwrap() + f64::ln(x);
        assert!((lhs - rhs).abs() <= 1e-13 * lhs.abs().max(1.0), "x = {x}");
        x += 0.37;
    }
}
