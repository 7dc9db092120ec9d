//! Deterministic instance generators for sweeps: random homogeneous functions,
//! outer functions, a labeled two-input suite and singular-profile
//! constructions.

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::expr::{parse, Expr, VarSpec};
use crate::models::Model;
use crate::theorems::{construct_from_profile, Case2, HomotheticSpec, OuterFamily};

/// Degrees swept by [`homogeneous_battery`].
pub const DEGREES: [f64; 5] = [-1.0, 0.5, 1.0, 2.0, 3.0];
/// Input counts swept by the generators.
pub const ARITIES: [usize; 3] = [2, 3, 4];

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Family {
    PerfectSubstitute,
    CobbDouglas,
    Acms,
    LinearPower,
    QuadraticPower,
    Profile,
}

#[derive(Debug, Clone)]
pub struct HomogeneousInstance {
    pub label: String,
    pub family: Family,
    pub expr: Expr,
    pub arity: usize,
    pub degree: f64,
}

fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

fn coefficients(rng: &mut impl Rng, n: usize, lo: f64, hi: f64) -> Vec<f64> {
    (0..n).map(|_| rng.gen_range(lo..hi)).collect()
}

fn cobb_douglas(rng: &mut impl Rng, n: usize, d: f64) -> Expr {
    let raw = coefficients(rng, n, 0.2, 1.0);
    let total: f64 = raw.iter().sum();
    let alpha = raw.iter().map(|a| a * d / total).collect();
    Model::cobb_douglas(rng.gen_range(0.5..2.0), alpha)
        .expect("generated Cobb-Douglas is valid")
        .to_expr()
}

fn acms(rng: &mut impl Rng, n: usize, d: f64) -> Expr {
    let rho = *[-1.0, -0.5, 0.5, 2.0, 3.0].choose(rng).expect("nonempty");
    Model::acms(
        rng.gen_range(0.5..2.0),
        coefficients(rng, n, 0.5, 1.5),
        rho,
        d,
    )
    .expect("generated ACMS is valid")
    .to_expr()
}

fn linear(rng: &mut impl Rng, n: usize) -> Expr {
    Model::perfect_substitute(coefficients(rng, n, 0.5, 2.0))
        .expect("generated coefficients are nonzero")
        .to_expr()
}

fn quadratic(rng: &mut impl Rng, n: usize) -> Expr {
    let mut terms = Vec::new();
    for i in 0..n {
        for j in i..n {
            let c = Expr::constant(rng.gen_range(0.2..1.5));
            terms.push(Expr::mul(c, Expr::mul(Expr::var(i), Expr::var(j))));
        }
    }
    Expr::sum(terms)
}

/// Random smooth profile in `k` variables, positive on the positive orthant.
pub fn random_profile(rng: &mut impl Rng, k: usize) -> Expr {
    let mut terms = vec![Expr::constant(rng.gen_range(0.5..1.5))];
    for i in 0..k {
        let u = Expr::var(i);
        let c = Expr::constant(rng.gen_range(0.2..1.5));
        let g = match rng.gen_range(0..4) {
            0 => Expr::exp(Expr::mul(Expr::constant(rng.gen_range(0.1..0.5)), u)),
            1 => Expr::sqrt(u),
            2 => Expr::ln(Expr::add(Expr::constant(1.0), u)),
            _ => Expr::powf(u, rng.gen_range(0.3..2.5)),
        };
        terms.push(Expr::mul(c, g));
    }
    if k >= 2 {
        let c = Expr::constant(rng.gen_range(0.1..0.8));
        terms.push(Expr::mul(c, Expr::mul(Expr::var(0), Expr::var(k - 1))));
    }
    Expr::sum(terms)
}

/// `x_1 φ(x_2/x_1, …, x_n/x_1)` with a random smooth `φ`.
fn profile_family(rng: &mut impl Rng, n: usize) -> Expr {
    let phi = random_profile(rng, n - 1);
    construct_from_profile(&OuterFamily::identity(), &phi, n - 1)
        .expect("profile construction is valid")
        .expr
}

fn instance(rng: &mut impl Rng, family: Family, n: usize, d: f64) -> HomogeneousInstance {
    let expr = match family {
        Family::PerfectSubstitute => linear(rng, n),
        Family::CobbDouglas => cobb_douglas(rng, n, d),
        Family::Acms => acms(rng, n, d),
        Family::LinearPower => Expr::powf(linear(rng, n), d),
        Family::QuadraticPower => Expr::powf(quadratic(rng, n), d / 2.0),
        Family::Profile => Expr::powf(profile_family(rng, n), d),
    };
    HomogeneousInstance {
        label: format!("{family:?}(n={n}, d={d})"),
        family,
        expr: unit_at_ones(expr, n),
        arity: n,
        degree: if family == Family::PerfectSubstitute {
            1.0
        } else {
            d
        },
    }
}

/// Rescale so that the value at `(1, …, 1)` is 1.
fn unit_at_ones(e: Expr, n: usize) -> Expr {
    let v = e
        .eval_scalar(&vec![1.0; n])
        .expect("battery function is defined at ones");
    Expr::mul(Expr::constant(1.0 / v), e)
}

/// Random homogeneous functions for every degree in [`DEGREES`] and arity in
/// [`ARITIES`].
pub fn homogeneous_battery(seed: u64) -> Vec<HomogeneousInstance> {
    homogeneous_battery_for(seed, &DEGREES)
}

pub fn homogeneous_battery_for(seed: u64, degrees: &[f64]) -> Vec<HomogeneousInstance> {
    let mut rng = rng(seed);
    let families = [
        Family::CobbDouglas,
        Family::Acms,
        Family::LinearPower,
        Family::QuadraticPower,
        Family::Profile,
    ];
    let mut out = Vec::new();
    for &d in degrees {
        for &n in &ARITIES {
            for &f in &families {
                out.push(instance(&mut rng, f, n, d));
            }
        }
    }
    out
}

/// `count` linearly homogeneous functions cycling through perfect
/// substitutes, Cobb-Douglas with `Σα = 1`, ACMS with `d = 1` and
/// `x_1 φ(x_2/x_1, …)`, over `n ∈ {2, 3, 4}`.
pub fn linearly_homogeneous(seed: u64, count: usize) -> Vec<HomogeneousInstance> {
    let mut rng = rng(seed);
    let families = [
        Family::PerfectSubstitute,
        Family::CobbDouglas,
        Family::Acms,
        Family::Profile,
    ];
    (0..count)
        .map(|k| {
            let n = ARITIES[(k / families.len()) % ARITIES.len()];
            instance(&mut rng, families[k % families.len()], n, 1.0)
        })
        .collect()
}

/// Homogeneous functions of degree `≠ 1` with singular Hessian.
pub fn flat_inner_battery(seed: u64) -> Vec<HomogeneousInstance> {
    let mut rng = rng(seed);
    let mut out = Vec::new();
    for &d in &[-1.0, 0.5, 2.0, 3.0] {
        for &n in &ARITIES {
            out.push(instance(&mut rng, Family::LinearPower, n, d));
        }
    }
    for (profile, k) in singular_profiles() {
        let g = construct_from_profile(&OuterFamily::identity(), &profile, k)
            .expect("profile construction is valid")
            .expr;
        let d = *[0.5, 2.0].choose(&mut rng).expect("nonempty");
        out.push(HomogeneousInstance {
            label: format!("singular profile power (n={}, d={d})", k + 1),
            family: Family::Profile,
            expr: Expr::powf(g, d),
            arity: k + 1,
            degree: d,
        });
    }
    out
}

/// Increasing outer functions: affine, powers, log and exp.
pub fn outer_battery() -> Vec<OuterFamily> {
    vec![
        OuterFamily::identity(),
        OuterFamily::Affine {
            alpha: 2.0,
            beta: 1.0,
        },
        OuterFamily::power(1.0, 2.0, 0.0),
        OuterFamily::power(0.5, 3.0, 1.0),
        OuterFamily::power(2.0, 0.5, 0.0),
        OuterFamily::power(-1.0, -1.0, 0.0),
        OuterFamily::Log {
            alpha: 1.0,
            beta: 0.0,
        },
        OuterFamily::Exp {
            alpha: 0.5,
            beta: 0.0,
        },
    ]
}

/// Random smooth expressions for derivative checks: the homogeneous battery,
/// outer compositions and a few general expressions.
pub fn smooth_battery(seed: u64) -> Vec<(String, Expr, usize)> {
    let mut out: Vec<(String, Expr, usize)> = homogeneous_battery(seed)
        .into_iter()
        .map(|h| (h.label, h.expr, h.arity))
        .collect();
    let outers = outer_battery();
    let mut rng = rng(seed ^ 0x0dd);
    for &n in &ARITIES {
        for o in &outers {
            let h = cobb_douglas(&mut rng, n, 1.0);
            out.push((
                format!("{o} of Cobb-Douglas (n={n})"),
                o.compose(&h, n).expect("composable"),
                n,
            ));
        }
    }
    for text in [
        "exp(x1*x2) + ln(x1 + x2^2)",
        "x1^x2 + sqrt(x1)/x2",
        "(x1 - x2)^3 / (1 + x1*x2)",
        "exp(-x1^2 - x2^2) * x1",
        "sqrt(x1*x2*x3) + x3^x1",
        "ln(x1 + x2 + x3) * exp(x2/x3)",
        "x1*x2*x3*x4 - x1^2*x4 + 1/(x2 + x3)",
    ] {
        let n = 2 + ["x3", "x4"].iter().filter(|v| text.contains(*v)).count();
        let e = parse(text, &VarSpec::indexed(n)).expect("battery text parses");
        out.push((text.to_string(), e, n));
    }
    out
}

/// Expected two-input classification.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CaseLabel {
    PerfectSubstitutePower,
    LinearUpToConstants,
    NotFlat,
}

impl CaseLabel {
    pub fn matches(self, case: &Case2) -> bool {
        matches!(
            (self, case),
            (
                CaseLabel::PerfectSubstitutePower,
                Case2::InnerPerfectSubstitutePower { .. }
            ) | (
                CaseLabel::LinearUpToConstants,
                Case2::LinearHomogeneousUpToConstants
            ) | (CaseLabel::NotFlat, Case2::NotFlat)
        )
    }
}

#[derive(Debug, Clone)]
pub struct LabeledInstance {
    pub label: CaseLabel,
    pub description: String,
    pub spec: HomotheticSpec,
}

const TWO_INPUT_SUITE: [(CaseLabel, &str, &str, f64); 30] = {
    use CaseLabel::*;
    [
        (
            PerfectSubstitutePower,
            "affine:alpha=1,beta=0",
            "(2*x+3*y)^2",
            2.0,
        ),
        (
            PerfectSubstitutePower,
            "affine:alpha=1,beta=0",
            "(x+y)^3",
            3.0,
        ),
        (
            PerfectSubstitutePower,
            "log:alpha=1,beta=0",
            "(x+2*y)^2",
            2.0,
        ),
        (PerfectSubstitutePower, "exp:alpha=0.5,beta=0", "x+y", 1.0),
        (
            PerfectSubstitutePower,
            "power:alpha=1,p=2,beta=0",
            "3*x+y",
            1.0,
        ),
        (
            PerfectSubstitutePower,
            "power:alpha=1,p=3,beta=0",
            "(x+y)^0.5",
            0.5,
        ),
        (
            PerfectSubstitutePower,
            "power:alpha=-1,p=-1,beta=0",
            "(x+2*y)^2",
            2.0,
        ),
        (
            PerfectSubstitutePower,
            "affine:alpha=2,beta=1",
            "(0.5*x+y)^3",
            3.0,
        ),
        (
            PerfectSubstitutePower,
            "log:alpha=1,beta=0",
            "(x+y)^(-1)",
            -1.0,
        ),
        (
            PerfectSubstitutePower,
            "power:alpha=0.5,p=3,beta=1",
            "(2*x+y)^2",
            2.0,
        ),
        (
            LinearUpToConstants,
            "affine:alpha=1,beta=0",
            "x^0.3*y^0.7",
            1.0,
        ),
        (
            LinearUpToConstants,
            "affine:alpha=2,beta=1",
            "sqrt(x^2+y^2)",
            1.0,
        ),
        (
            LinearUpToConstants,
            "power:alpha=1,p=0.5,beta=0",
            "x*y",
            2.0,
        ),
        (
            LinearUpToConstants,
            "power:alpha=1,p=0.3333333333333333,beta=0",
            "x^2*y",
            3.0,
        ),
        (
            LinearUpToConstants,
            "power:alpha=2,p=2,beta=1",
            "x^0.25*y^0.25",
            0.5,
        ),
        (
            LinearUpToConstants,
            "power:alpha=-1,p=-1,beta=0",
            "1/x+1/y",
            -1.0,
        ),
        (
            LinearUpToConstants,
            "affine:alpha=1,beta=0",
            "(sqrt(x)+2*sqrt(y))^2",
            1.0,
        ),
        (
            LinearUpToConstants,
            "power:alpha=1,p=0.5,beta=3",
            "x^2+x*y+y^2",
            2.0,
        ),
        (
            LinearUpToConstants,
            "affine:alpha=1,beta=0",
            "x*exp(y/x)",
            1.0,
        ),
        (
            LinearUpToConstants,
            "power:alpha=1,p=0.3333333333333333,beta=0",
            "x^3+y^3",
            3.0,
        ),
        (NotFlat, "affine:alpha=1,beta=0", "x^2*y", 3.0),
        (NotFlat, "power:alpha=1,p=2,beta=0", "x^0.5*y^0.5", 1.0),
        (NotFlat, "log:alpha=1,beta=0", "x^2+y^2", 2.0),
        (NotFlat, "exp:alpha=1,beta=0", "x^0.3*y^0.7", 1.0),
        (NotFlat, "affine:alpha=1,beta=0", "x^0.2*y^0.3", 0.5),
        (NotFlat, "power:alpha=1,p=3,beta=0", "sqrt(x^2+y^2)", 1.0),
        (NotFlat, "affine:alpha=1,beta=0", "x^2+y^2", 2.0),
        (NotFlat, "log:alpha=1,beta=0", "x^0.3*y^0.7", 1.0),
        (NotFlat, "affine:alpha=3,beta=-1", "x^1.5*y^1.5", 3.0),
        (
            NotFlat,
            "power:alpha=1,p=2,beta=0",
            "(sqrt(x)+sqrt(y))^2",
            1.0,
        ),
    ]
};

/// Thirty two-input instances, ten per case.
pub fn two_input_suite() -> Vec<LabeledInstance> {
    let vars = VarSpec::new(["x", "y"]).expect("valid names");
    TWO_INPUT_SUITE
        .iter()
        .map(|&(label, outer, inner, d)| {
            let outer: OuterFamily = outer.parse().expect("suite outer parses");
            let inner = parse(inner, &vars).expect("suite inner parses");
            let description = format!("{outer} of {}", inner.display(&vars));
            LabeledInstance {
                label,
                description,
                spec: HomotheticSpec::new(outer, inner, d, 2).expect("suite spec is valid"),
            }
        })
        .collect()
}

const SINGULAR_PROFILES: [(&str, usize); 10] = [
    ("exp(u2)+u3", 2),
    ("(u2+2*u3)^2", 2),
    ("ln(1+u2+u3)", 2),
    ("u2^0.4*u3^0.6", 2),
    ("sqrt(u2*u3)+u2", 2),
    ("exp(u2+u3)", 2),
    ("exp(u2)+u3+u4", 3),
    ("(u2+u3+2*u4)^3/100", 3),
    ("u2^0.3*u3^0.3*u4^0.4", 3),
    ("sqrt(u2^2+u3^2+u4^2)+u4", 3),
];

fn profile_vars(k: usize) -> VarSpec {
    VarSpec::new((2..k + 2).map(|i| format!("u{i}"))).expect("valid names")
}

/// Profiles `φ(u_2, …)` with `det(φ_ij) = 0`, paired with their arity.
pub fn singular_profiles() -> Vec<(Expr, usize)> {
    SINGULAR_PROFILES
        .iter()
        .map(|&(text, k)| (parse(text, &profile_vars(k)).expect("profile parses"), k))
        .collect()
}

/// Outer functions paired with [`singular_profiles`] by index.
pub fn singular_profile_outers() -> Vec<OuterFamily> {
    let b = outer_battery();
    (0..SINGULAR_PROFILES.len())
        .map(|i| b[i % b.len()].clone())
        .collect()
}

/// The non-singular profile `u_2 u_3`.
pub fn counterexample_profile() -> Expr {
    parse("u2*u3", &profile_vars(2)).expect("profile parses")
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::homogeneity::estimate_degree;
    use crate::sampling::default_samples;

    #[test]
    fn deterministic() {
        let a = homogeneous_battery(7);
        let b = homogeneous_battery(7);
        assert_eq!(a.len(), DEGREES.len() * ARITIES.len() * 5);
        assert!(a.iter().zip(&b).all(|(x, y)| x.expr == y.expr));
    }

    #[test]
    fn degrees_match() {
        for h in homogeneous_battery(3)
            .iter()
            .chain(&linearly_homogeneous(3, 12))
        {
            let est = estimate_degree(&h.expr, &default_samples(h.arity, 1)).unwrap();
            assert!(
                (est.degree - h.degree).abs() < 1e-9,
                "{}: {}",
                h.label,
                est.degree
            );
            assert!(est.is_homogeneous(), "{}", h.label);
        }
    }

    #[test]
    fn suite_shape() {
        let s = two_input_suite();
        assert_eq!(s.len(), 30);
        for l in [
            CaseLabel::PerfectSubstitutePower,
            CaseLabel::LinearUpToConstants,
            CaseLabel::NotFlat,
        ] {
            assert_eq!(s.iter().filter(|i| i.label == l).count(), 10);
        }
        assert_eq!(singular_profiles().len(), 10);
        assert_eq!(smooth_battery(1).len(), 75 + 24 + 7);
    }
}
