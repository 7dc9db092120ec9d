use std::collections::BTreeMap;

use homothetic::expr::{parse, Expr, VarSpec};
use homothetic::geometry::{gauss_kronecker, ma_residual};
use homothetic::homogeneity::{estimate_degree, mrs_degree_zero_residual};
use homothetic::models::Model;
use homothetic::sampling::default_samples;
use homothetic::smalllin::relative_difference;
use homothetic::theorems::OuterFamily;
use homothetic::Matrix;
use proptest::prelude::*;

fn leaf(n: usize) -> impl Strategy<Value = Expr> {
    prop_oneof![
        (0..n).prop_map(Expr::Var),
        (0.25f64..4.0).prop_map(Expr::Const),
        (-3.0f64..-0.25).prop_map(Expr::Const),
    ]
}

/// Raw (unfolded) trees, smooth on the positive orthant for most draws.
fn expr(n: usize) -> impl Strategy<Value = Expr> {
    leaf(n).prop_recursive(4, 24, 2, |inner| {
        prop_oneof![
            (inner.clone(), inner.clone()).prop_map(|(a, b)| Expr::add(a, b)),
            (inner.clone(), inner.clone()).prop_map(|(a, b)| Expr::Binary(
                homothetic::expr::BinOp::Sub,
                Box::new(a),
                Box::new(b)
            )),
            (inner.clone(), inner.clone()).prop_map(|(a, b)| Expr::mul(a, b)),
            (inner.clone(), inner.clone()).prop_map(|(a, b)| Expr::div(a, b)),
            (inner.clone(), 0i32..4).prop_map(|(a, k)| Expr::powf(a, k as f64)),
            inner.clone().prop_map(Expr::neg),
            inner
                .clone()
                .prop_map(|a| Expr::exp(Expr::div(a, Expr::constant(8.0)))),
            inner
                .clone()
                .prop_map(|a| Expr::ln(Expr::add(Expr::constant(1.0), Expr::powf(a, 2.0)))),
            inner.prop_map(|a| Expr::sqrt(Expr::add(Expr::constant(1.0), Expr::powf(a, 2.0)))),
        ]
    })
}

fn point(n: usize) -> impl Strategy<Value = Vec<f64>> {
    prop::collection::vec(0.5f64..2.0, n)
}

fn same_value(a: Result<f64, impl std::fmt::Debug>, b: Result<f64, impl std::fmt::Debug>) -> bool {
    match (a, b) {
        (Ok(x), Ok(y)) => relative_difference(x, y, 0.0) <= 1e-12,
        (Err(_), Err(_)) => true,
        _ => false,
    }
}

fn square(n: usize) -> impl Strategy<Value = Matrix> {
    prop::collection::vec(-2.0f64..2.0, n * (n + 1) / 2).prop_map(move |upper| {
        let mut it = upper.into_iter();
        Matrix::from_upper(n, |_, _| it.next().unwrap())
    })
}

proptest! {
    #[test]
    fn print_parse_round_trip(e in expr(3), p in point(3)) {
        let vars = VarSpec::indexed(3);
        let printed = e.display(&vars).to_string();
        let back = parse(&printed, &vars).unwrap();
        prop_assert!(same_value(e.eval_scalar(&p), back.eval_scalar(&p)), "{printed}");
        let again = back.display(&vars).to_string();
        prop_assert_eq!(parse(&again, &vars).unwrap().display(&vars).to_string(), again);
    }

    #[test]
    fn substitution_matches_composition(
        e in expr(2),
        b0 in expr(3),
        b1 in expr(3),
        p in point(3),
    ) {
        let (Ok(v0), Ok(v1)) = (b0.eval_scalar(&p), b1.eval_scalar(&p)) else {
            return Ok(());
        };
        let mut map = BTreeMap::new();
        map.insert(0, b0);
        map.insert(1, b1);
        let s = e.substitute(&map, 3).unwrap();
        let direct = e.eval_scalar(&[v0, v1]);
        let composed = s.eval_scalar(&p);
        if let (Ok(a), Ok(b)) = (&direct, &composed) {
            prop_assert!(relative_difference(*a, *b, 0.0) <= 1e-12, "{a} vs {b}");
        }
    }

    #[test]
    fn determinant_lemma(
        (m, v) in (2usize..=4).prop_flat_map(|n| (square(n), prop::collection::vec(-2.0f64..2.0, n))),
        s in prop_oneof![-2.0f64..-0.1, 0.1f64..2.0],
        c in -2.0f64..2.0,
    ) {
        let n = m.order();
        let lhs = m.scaled_plus_outer(s, c, &v).unwrap().determinant();
        let rhs = s.powi(n as i32) * m.determinant()
            + c * s.powi(n as i32 - 1) * m.adjugate_quadratic_form(&v).unwrap();
        let scale = (s.abs() * m.frobenius_norm() + c.abs() * v.iter().map(|x| x * x).sum::<f64>())
            .powi(n as i32);
        prop_assert!(relative_difference(lhs, rhs, scale) <= 1e-9, "{lhs} vs {rhs}");
    }

    #[test]
    fn cofactors_invert(m in (2usize..=4).prop_flat_map(square)) {
        let n = m.order();
        let cof = m.cofactor_matrix().unwrap();
        let det = m.determinant();
        let scale = m.frobenius_norm().powi(n as i32).max(1.0);
        for i in 0..n {
            for j in 0..n {
                let dot: f64 = (0..n).map(|k| m.get(i, k) * cof.get(j, k)).sum();
                let want = if i == j { det } else { 0.0 };
                prop_assert!((dot - want).abs() <= 1e-12 * scale);
            }
        }
    }

    #[test]
    fn curvature_sign_matches_determinant(e in expr(2), p in point(2)) {
        if let (Ok(k), Ok(m)) = (gauss_kronecker(&e, &p), ma_residual(&e, &p)) {
            prop_assert_eq!(k.signum(), m.raw.signum());
            prop_assert_eq!(k == 0.0, m.raw == 0.0);
        }
    }

    #[test]
    fn translation_invariance(e in expr(2), c in -10.0f64..10.0, p in point(2)) {
        let shifted = Expr::add(e.clone(), Expr::Const(c));
        if let (Ok(a), Ok(b)) = (ma_residual(&e, &p), ma_residual(&shifted, &p)) {
            prop_assert_eq!(a, b);
        }
    }

    #[test]
    fn cobb_douglas_degree(alpha in prop::collection::vec(0.1f64..1.5, 2..=4), gamma in 0.2f64..3.0) {
        let total: f64 = alpha.iter().sum();
        let m = Model::cobb_douglas(gamma, alpha.clone()).unwrap();
        let est = estimate_degree(&m.to_expr(), &default_samples(alpha.len(), 3)).unwrap();
        prop_assert!((est.degree - total).abs() <= 1e-10);
        prop_assert!(est.spread <= 1e-10);
    }

    #[test]
    fn homothetic_mrs_degree_zero(
        a in prop::collection::vec(0.3f64..2.0, 2),
        rho in prop_oneof![-1.5f64..-0.2, 0.2f64..0.9, 1.1f64..3.0],
        d in 0.3f64..2.5,
        p in point(2),
        t in 0.5f64..10.0,
    ) {
        let m = Model::acms(1.0, a, rho, d).unwrap();
        for o in [OuterFamily::power(1.0, 3.0, 0.0), OuterFamily::Log { alpha: 1.0, beta: 2.0 }] {
            let f = o.compose(&m.to_expr(), 2).unwrap();
            prop_assert!(mrs_degree_zero_residual(&f, &p, t).unwrap() <= 1e-9);
        }
    }

    #[test]
    fn models_scale_with_degree(
        a in prop::collection::vec(0.3f64..2.0, 3),
        rho in prop_oneof![-1.5f64..-0.2, 0.2f64..3.0],
        d in prop_oneof![-2.0f64..-0.2, 0.2f64..3.0],
        p in point(3),
        t in 0.2f64..5.0,
    ) {
        let models = [
            Model::perfect_substitute(a.clone()).unwrap(),
            Model::cobb_douglas(1.3, a.iter().map(|x| x * d / 3.0).collect()).unwrap(),
            Model::acms(0.7, a, rho, d).unwrap(),
        ];
        for m in models {
            let e = m.to_expr();
            let tp: Vec<f64> = p.iter().map(|x| t * x).collect();
            let want = t.powf(m.degree()) * e.eval_scalar(&p).unwrap();
            prop_assert!(relative_difference(e.eval_scalar(&tp).unwrap(), want, 0.0) <= 1e-10, "{m}");
        }
    }
}
