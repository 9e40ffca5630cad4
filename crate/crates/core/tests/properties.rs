use std::sync::{Arc, OnceLock};

use approx::assert_relative_eq;
use proptest::prelude::*;

use riesz_core::one_dim::{solve_halfline, solve_interval, CompactSource, HalfLineProblem, IntervalProblem};
use riesz_core::verify::{parseval_check, surface_fourier};
use riesz_core::{
    assemble, kernel_eval, BoundaryDensity, Dimension, DiscreteBoundaryOperator, FractionalOrder, Point3,
    TriangulatedSurface,
};

fn level_one(alpha: f64) -> &'static DiscreteBoundaryOperator {
    static OPS: OnceLock<Vec<DiscreteBoundaryOperator>> = OnceLock::new();
    let ops = OPS.get_or_init(|| {
        let s = Arc::new(TriangulatedSurface::sphere(1.0, 1).unwrap());
        [1.25, 1.5, 2.0]
            .iter()
            .map(|&a| assemble(s.clone(), FractionalOrder::three_d(a).unwrap()).unwrap())
            .collect()
    });
    let i = [1.25, 1.5, 2.0].iter().position(|&a| a == alpha).unwrap();
    &ops[i]
}

fn point() -> impl Strategy<Value = [f64; 3]> {
    prop::array::uniform3(-3.0..3.0f64)
}

fn density(n: usize) -> impl Strategy<Value = BoundaryDensity> {
    prop::collection::vec(-1.0..1.0f64, n).prop_map(BoundaryDensity::new)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn kernel_is_symmetric_and_homogeneous(
        alpha in 1.01..2.0f64,
        x in point(),
        y in point(),
        t in 0.1..10.0f64,
    ) {
        prop_assume!((0..3).map(|i| (x[i] - y[i]).powi(2)).sum::<f64>() > 1e-6);
        let a = FractionalOrder::three_d(alpha).unwrap();
        let k = kernel_eval(Dimension::Three, a, &x, &y).unwrap();
        prop_assert!(k > 0.0);
        assert_relative_eq!(k, kernel_eval(Dimension::Three, a, &y, &x).unwrap(), max_relative = 1e-14);
        let tx = x.map(|v| t * v);
        let ty = y.map(|v| t * v);
        let scaled = kernel_eval(Dimension::Three, a, &tx, &ty).unwrap();
        assert_relative_eq!(scaled, t.powf(alpha - 3.0) * k, max_relative = 1e-12);
        let shift = [0.5, -1.0, 2.0];
        let sx: Vec<f64> = (0..3).map(|i| x[i] + shift[i]).collect();
        let sy: Vec<f64> = (0..3).map(|i| y[i] + shift[i]).collect();
        assert_relative_eq!(kernel_eval(Dimension::Three, a, &sx, &sy).unwrap(), k, max_relative = 1e-12);
    }

    #[test]
    fn one_dim_kernel_is_homogeneous(alpha in 0.05..0.95f64, x in -5.0..5.0f64, t in 0.1..10.0f64) {
        prop_assume!(x.abs() > 1e-3);
        let a = FractionalOrder::one_d(alpha).unwrap();
        let k = kernel_eval(Dimension::One, a, &[x], &[0.0]).unwrap();
        let scaled = kernel_eval(Dimension::One, a, &[t * x], &[0.0]).unwrap();
        assert_relative_eq!(scaled, t.powf(alpha - 1.0) * k, max_relative = 1e-12);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(16))]

    #[test]
    fn operator_is_linear_symmetric_and_positive(
        which in 0usize..3,
        g in density(80),
        h in density(80),
        s in -2.0..2.0f64,
    ) {
        let op = level_one([1.25, 1.5, 2.0][which]);
        let areas = op.areas();
        let lhs = op.apply(&g.axpy(s, &h)).unwrap();
        let rhs = op.apply(&g).unwrap().axpy(s, &op.apply(&h).unwrap());
        for (a, b) in lhs.values.iter().zip(&rhs.values) {
            prop_assert!((a - b).abs() <= 1e-12 * (1.0 + b.abs()));
        }
        let gbh = g.dot(&op.apply(&h).unwrap(), areas);
        let hbg = h.dot(&op.apply(&g).unwrap(), areas);
        prop_assert!((gbh - hbg).abs() <= 1e-12 * (1.0 + gbh.abs()));
        prop_assert!(op.quadratic_form(&g).unwrap() > 0.0);
    }

    #[test]
    fn surface_transform_is_linear_and_hermitian(
        g in density(80),
        h in density(80),
        xi in point(),
    ) {
        let s = level_one(1.5).surface();
        let xi = Point3::from(xi);
        let a = surface_fourier(s, &g.axpy(2.0, &h), &xi).unwrap();
        let b = surface_fourier(s, &g, &xi).unwrap() + surface_fourier(s, &h, &xi).unwrap() * 2.0;
        prop_assert!((a - b).norm() <= 1e-10 * (1.0 + b.norm()));
        let conj = surface_fourier(s, &g, &(-xi)).unwrap();
        let direct = surface_fourier(s, &g, &xi).unwrap();
        prop_assert!((conj - direct.conj()).norm() <= 1e-12 * (1.0 + direct.norm()));
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(6))]

    #[test]
    fn parseval_integrals_grow_toward_the_quadratic_form(g in density(80)) {
        let op = level_one(1.5);
        let r = parseval_check(&g, op, &[2.0, 4.0, 8.0]).unwrap();
        prop_assert!(r.monotone, "{:?}", r.integrals);
        prop_assert!(r.inequality_satisfied, "{:?} vs {}", r.integrals, r.quadratic_form);
    }
}

fn one_d(alpha: f64) -> FractionalOrder {
    FractionalOrder::one_d(alpha).unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn halfline_solution_is_linear_in_the_data(
        alpha in 0.1..0.9f64,
        c0 in -2.0..2.0f64,
        amp in -2.0..2.0f64,
        s in -3.0..3.0f64,
        x in 0.05..4.0f64,
    ) {
        let a = one_d(alpha);
        let src = |k: f64| CompactSource::new(move |y: f64| k * (y - 1.0) * (3.0 - y), (1.0, 3.0)).unwrap();
        let p = HalfLineProblem::new(a, 0.0, c0, src(amp)).unwrap();
        let q = HalfLineProblem::new(a, 0.0, s * c0, src(s * amp)).unwrap();
        let u = solve_halfline(&p, x).unwrap();
        let v = solve_halfline(&q, x).unwrap();
        prop_assert!((v - s * u).abs() <= 1e-8 * (1.0 + u.abs()));
    }

    #[test]
    fn halfline_solution_is_translation_covariant(
        alpha in 0.1..0.9f64,
        c0 in -2.0..2.0f64,
        shift in -5.0..5.0f64,
        x in 0.05..4.0f64,
    ) {
        let a = one_d(alpha);
        let p = HalfLineProblem::new(a, 0.0, c0, CompactSource::constant(1.0, (1.0, 2.0)).unwrap()).unwrap();
        let q = HalfLineProblem::new(a, shift, c0, CompactSource::constant(1.0, (1.0 + shift, 2.0 + shift)).unwrap()).unwrap();
        let u = solve_halfline(&p, x).unwrap();
        let v = solve_halfline(&q, x + shift).unwrap();
        prop_assert!((u - v).abs() <= 1e-8 * (1.0 + u.abs()));
    }

    #[test]
    fn halfline_solution_scales_with_the_domain(
        alpha in 0.1..0.9f64,
        c0 in -2.0..2.0f64,
        lambda in 0.25..4.0f64,
        x in 0.05..4.0f64,
    ) {
        // u_lambda(lambda x) = lambda^(alpha-1) c0 |x|^(alpha-1) + lambda^alpha S(x)
        // when the source is stretched by lambda.
        let a = one_d(alpha);
        let boundary = HalfLineProblem::new(a, 0.0, c0, CompactSource::zero()).unwrap();
        let source = HalfLineProblem::new(a, 0.0, 0.0, CompactSource::constant(1.0, (1.0, 2.0)).unwrap()).unwrap();
        let stretched = HalfLineProblem::new(a, 0.0, c0, CompactSource::constant(1.0, (lambda, 2.0 * lambda)).unwrap()).unwrap();
        let want = lambda.powf(alpha - 1.0) * solve_halfline(&boundary, x).unwrap()
            + lambda.powf(alpha) * solve_halfline(&source, x).unwrap();
        let got = solve_halfline(&stretched, lambda * x).unwrap();
        prop_assert!((got - want).abs() <= 1e-8 * (1.0 + want.abs()));
    }

    #[test]
    fn interval_solution_reflects(
        alpha in 0.1..0.9f64,
        cm in -2.0..2.0f64,
        cp in -2.0..2.0f64,
        x in -0.99..0.99f64,
    ) {
        let a = one_d(alpha);
        let f = |sign: f64| CompactSource::new(move |y: f64| 1.0 + sign * 0.5 * y, (-1.0, 1.0)).unwrap();
        let p = IntervalProblem::new(a, 1.0, cm, cp, f(1.0)).unwrap();
        let q = IntervalProblem::new(a, 1.0, cp, cm, f(-1.0)).unwrap();
        let u = solve_interval(&p, x).unwrap();
        let v = solve_interval(&q, -x).unwrap();
        prop_assert!((u - v).abs() <= 1e-8 * (1.0 + u.abs()));
    }
}
