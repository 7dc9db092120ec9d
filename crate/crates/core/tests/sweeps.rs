use homothetic::battery::{
    counterexample_profile, flat_inner_battery, homogeneous_battery, homogeneous_battery_for,
    linearly_homogeneous, outer_battery, singular_profile_outers, singular_profiles,
    smooth_battery, two_input_suite, CaseLabel,
};
use homothetic::expr::EvalError;
use homothetic::geometry::{flatness, ma_residual, Verdict};
use homothetic::homogeneity::{
    euler_residual, mrs_degree_zero_residual, radial_affinity_residual, second_euler_residual,
    DEFAULT_RADIAL_TS,
};
use homothetic::jets::{fd_discrepancy, DEFAULT_FD_STEP};
use homothetic::sampling::{default_samples, uniform};
use homothetic::theorems::{
    bracket_chain, classify_two_input, composite_hessian_identity, construct_from_profile,
    factorization_identity, ode_residual, HomotheticSpec, OuterFamily,
};
use homothetic::Error;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn points(n: usize, count: usize, seed: u64) -> Vec<Vec<f64>> {
    uniform(&mut ChaCha8Rng::seed_from_u64(seed), n, count, 0.5, 2.0)
}

#[test]
fn linearly_homogeneous_functions_are_flat() {
    for h in linearly_homogeneous(11, 100) {
        for p in points(h.arity, 50, 1) {
            let r = ma_residual(&h.expr, &p).unwrap().normalized;
            assert!(r <= 1e-8, "{} at {p:?}: {r:e}", h.label);
        }
    }
}

#[test]
fn corrected_composite_identity() {
    let inners = homogeneous_battery(5);
    for o in outer_battery() {
        for h in &inners {
            let spec = HomotheticSpec::new(o.clone(), h.expr.clone(), h.degree, h.arity).unwrap();
            for p in points(h.arity, 50, 2) {
                let c = composite_hessian_identity(&spec, &p).unwrap();
                assert!(c.relerr <= 1e-9, "{o} of {}: {:e}", h.label, c.relerr);
                if c.lhs.abs() > 1e-6 * c.scale {
                    let ratio = c.rhs_uncorrected / c.lhs;
                    assert!(
                        (ratio - c.f_prime).abs() <= 1e-9 * c.f_prime.abs(),
                        "{o} of {}: ratio {ratio} vs F' {}",
                        h.label,
                        c.f_prime
                    );
                }
            }
        }
    }
}

#[test]
fn factorization_identity_holds() {
    let inners = homogeneous_battery_for(6, &[2.0, 3.0, -1.0, 0.5]);
    for o in outer_battery() {
        for h in &inners {
            let spec = HomotheticSpec::new(o.clone(), h.expr.clone(), h.degree, h.arity).unwrap();
            for p in points(h.arity, 20, 3) {
                let c = factorization_identity(&spec, &p).unwrap();
                assert!(c.relerr <= 1e-9, "{o} of {}: {:e}", h.label, c.relerr);
            }
        }
    }
}

#[test]
fn power_ode() {
    let us: Vec<f64> = (0..=30).map(|k| 0.5 + 1.5 * k as f64 / 30.0).collect();
    for d in [2.0, 3.0, -1.0, 0.5] {
        let sol = OuterFamily::power(1.7, 1.0 / d, -0.4);
        for &u in &us {
            assert!(ode_residual(&sol, d, u).unwrap() <= 1e-12);
        }
        for o in outer_battery() {
            if matches!(o, OuterFamily::Power { p, .. } if (p * d - 1.0).abs() < 1e-12) {
                continue;
            }
            let worst = us
                .iter()
                .map(|&u| ode_residual(&o, d, u).unwrap())
                .fold(0.0, f64::max);
            assert!(worst >= 1e-2, "{o} d={d}: {worst}");
        }
    }
}

#[test]
fn bracket_chain_for_linear_homogeneous() {
    for h in linearly_homogeneous(8, 40)
        .into_iter()
        .filter(|h| h.arity == 2)
    {
        for p in points(2, 20, 4) {
            let b = bracket_chain(&h.expr, &p).unwrap();
            assert!(
                b.bracket_relerr <= 1e-9,
                "{}: {:e}",
                h.label,
                b.bracket_relerr
            );
            assert!(b.euler_relerr <= 1e-9, "{}: {:e}", h.label, b.euler_relerr);
        }
    }
}

#[test]
fn euler_relations() {
    for h in homogeneous_battery(9) {
        for p in points(h.arity, 100, 5) {
            let r1 = euler_residual(&h.expr, &p, h.degree).unwrap();
            let r2 = second_euler_residual(&h.expr, &p, h.degree).unwrap();
            assert!(r1 <= 1e-9, "{}: {r1:e}", h.label);
            assert!(r2 <= 1e-8, "{}: {r2:e}", h.label);
        }
    }
}

#[test]
fn homothetic_mrs_is_degree_zero() {
    let mut overflowed = 0;
    for h in homogeneous_battery(10) {
        for o in outer_battery() {
            let f = o.compose(&h.expr, h.arity).unwrap();
            for p in points(h.arity, 5, 6) {
                for t in [0.5, 2.0, 10.0] {
                    match mrs_degree_zero_residual(&f, &p, t) {
                        Ok(r) => assert!(r <= 1e-9, "{o} of {} t={t}: {r:e}", h.label),
                        // exp of a scaled high-degree inner leaves f64 range
                        Err(Error::Eval(EvalError::Domain { value, .. }))
                            if matches!(o, OuterFamily::Exp { .. }) && !value.is_finite() =>
                        {
                            overflowed += 1
                        }
                        Err(e) => panic!("{o} of {} t={t}: {e}", h.label),
                    }
                }
            }
        }
    }
    assert!(overflowed < 100, "{overflowed}");
}

#[test]
fn radial_membership() {
    for inst in two_input_suite() {
        let f = inst.spec.composite().unwrap();
        let r = default_samples(2, 42)
            .iter()
            .take(8)
            .map(|p| radial_affinity_residual(&f, p, &DEFAULT_RADIAL_TS).unwrap())
            .fold(0.0, f64::max);
        if inst.label == CaseLabel::LinearUpToConstants {
            assert!(r <= 1e-8, "{}: {r:e}", inst.description);
        } else {
            assert!(r >= 1e-3, "{}: {r:e}", inst.description);
        }
    }
}

#[test]
fn flat_inner_closure() {
    for h in flat_inner_battery(12) {
        let s = default_samples(h.arity, 42);
        for p in &s {
            assert!(
                ma_residual(&h.expr, p).unwrap().normalized <= 1e-9,
                "{}",
                h.label
            );
        }
        for o in outer_battery() {
            let f = o.compose(&h.expr, h.arity).unwrap();
            assert_eq!(
                flatness(&f, &s).unwrap().verdict,
                Verdict::Flat,
                "{o} of {}",
                h.label
            );
        }
    }
}

#[test]
fn two_input_classifier() {
    let s = default_samples(2, 42);
    for inst in two_input_suite() {
        let c = classify_two_input(&inst.spec, &s).unwrap();
        assert!(
            inst.label.matches(&c.case),
            "{}: {:?}",
            inst.description,
            c.case
        );
    }
}

#[test]
fn singular_profile_constructions() {
    for ((phi, k), o) in singular_profiles()
        .into_iter()
        .zip(singular_profile_outers())
    {
        let c = construct_from_profile(&o, &phi, k).unwrap();
        assert!(c.singular_profile);
        let v = flatness(&c.expr, &default_samples(c.arity, 42)).unwrap();
        assert_eq!(v.verdict, Verdict::Flat, "{o}: {:e}", v.max_residual);
        assert!(v.max_residual <= 1e-8);
    }
    let c = construct_from_profile(
        &OuterFamily::power(1.0, 2.0, 0.0),
        &counterexample_profile(),
        2,
    )
    .unwrap();
    assert!(!c.singular_profile);
    assert_eq!(
        flatness(&c.expr, &default_samples(3, 42)).unwrap().verdict,
        Verdict::NotFlat
    );
}

#[test]
fn jets_match_finite_differences() {
    let mut pairs = 0;
    for (label, e, n) in smooth_battery(13) {
        for p in points(n, 10, 7) {
            let r = fd_discrepancy(&e, &p, DEFAULT_FD_STEP).unwrap();
            assert!(r <= 1e-5, "{label} at {p:?}: {r:e}");
            pairs += 1;
        }
    }
    assert!(pairs >= 500);
}
