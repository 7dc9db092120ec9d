//! `verify`: randomized identity batteries.

use clap::{Args, ValueEnum};
use homothetic::battery::{
    homogeneous_battery, homogeneous_battery_for, linearly_homogeneous, outer_battery,
    random_profile, HomogeneousInstance,
};
use homothetic::sampling::uniform;
use homothetic::smalllin::relative_difference;
use homothetic::theorems::{
    bracket_chain, composite_hessian_identity, factorization_identity, ode_residual,
    profile_identity, HomotheticSpec, OuterFamily,
};
use homothetic::{Expr, VarSpec};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde_json::{json, Value};

use crate::failure::{Failure, EXIT_TOLERANCE};
use crate::report::Report;
use crate::Global;

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Identity {
    /// det(f_ij) = F'^{n-1} (F' det(h_ij) + F'' Σ h_i h_j H_ij).
    #[value(name = "composite-hessian", alias = "eq2.5")]
    CompositeHessian,
    /// The same identity with F'^n in place of F'^{n-1}; fails by design.
    #[value(name = "composite-hessian-full-power", alias = "eq2.5-paper-exponent")]
    CompositeHessianFullPower,
    /// det(f_ij) = det(h_ij) F'^{n-1} ((d-1) F' + d h F'') / (d-1).
    #[value(name = "factorization", alias = "eq2.8")]
    Factorization,
    /// d u F'' + (d-1) F' = 0 for F = α u^{1/d} + β.
    #[value(name = "power-ode", alias = "eq2.9")]
    PowerOde,
    /// h_1² h_22 + h_2² h_11 - 2 h_1 h_2 h_12 = -(h_12/(xy)) (x h_1 + y h_2)².
    #[value(name = "bracket-chain", aliases = ["eq3.3", "eq3.4"])]
    BracketChain,
    /// x_1^{n-1} det(f_ij) = φ² F'^{n-1} F'' det(φ_ij).
    #[value(name = "profile", alias = "eq4.4")]
    Profile,
}

impl Identity {
    fn name(self) -> String {
        self.to_possible_value()
            .expect("no skipped variants")
            .get_name()
            .to_string()
    }

    fn tolerance(self) -> f64 {
        match self {
            Identity::PowerOde => 1e-12,
            _ => 1e-9,
        }
    }
}

#[derive(Debug, Args)]
pub struct VerifyArgs {
    /// Identity to check.
    #[arg(long, value_enum)]
    pub identity: Identity,
    /// Number of random trials.
    #[arg(long, default_value_t = 100)]
    pub trials: usize,
}

fn pick<'a, T>(rng: &mut impl Rng, items: &'a [T]) -> &'a T {
    &items[rng.gen_range(0..items.len())]
}

fn point(rng: &mut impl Rng, n: usize) -> Vec<f64> {
    uniform(rng, n, 1, 0.5, 2.0).remove(0)
}

fn text(e: &Expr, n: usize) -> String {
    e.display(&VarSpec::indexed(n)).to_string()
}

/// Runs one trial and returns its record and relative error.
fn composite_trial(
    rng: &mut impl Rng,
    inners: &[HomogeneousInstance],
    outers: &[OuterFamily],
    full_power: bool,
) -> Result<(Value, f64), Failure> {
    let h = pick(rng, inners);
    let o = pick(rng, outers);
    let p = point(rng, h.arity);
    let spec = HomotheticSpec::new(o.clone(), h.expr.clone(), h.degree, h.arity)?;
    let c = composite_hessian_identity(&spec, &p)?;
    let relerr = if full_power {
        relative_difference(c.lhs, c.rhs_uncorrected, c.scale)
    } else {
        c.relerr
    };
    let ratio = (c.lhs != 0.0).then(|| c.rhs_uncorrected / c.lhs);
    Ok((
        json!({
            "outer": o.to_string(),
            "inner": text(&h.expr, h.arity),
            "family": h.label,
            "degree": h.degree,
            "point": p,
            "u": c.u,
            "f_prime": c.f_prime,
            "f_second": c.f_second,
            "lhs": c.lhs,
            "rhs_corrected": c.rhs_corrected,
            "rhs_uncorrected": c.rhs_uncorrected,
            "ratio_uncorrected_to_lhs": ratio,
            "scale": c.scale,
            "relerr": relerr,
        }),
        relerr,
    ))
}

fn factorization_trial(
    rng: &mut impl Rng,
    inners: &[HomogeneousInstance],
    outers: &[OuterFamily],
) -> Result<(Value, f64), Failure> {
    let h = pick(rng, inners);
    let o = pick(rng, outers);
    let p = point(rng, h.arity);
    let spec = HomotheticSpec::new(o.clone(), h.expr.clone(), h.degree, h.arity)?;
    let c = factorization_identity(&spec, &p)?;
    Ok((
        json!({
            "outer": o.to_string(),
            "inner": text(&h.expr, h.arity),
            "family": h.label,
            "degree": h.degree,
            "point": p,
            "lhs": c.lhs,
            "rhs": c.rhs,
            "relerr": c.relerr,
        }),
        c.relerr,
    ))
}

fn ode_trial(rng: &mut impl Rng, trial: usize) -> Result<(Value, f64), Failure> {
    let d = [2.0, 3.0, -1.0, 0.5][trial % 4];
    let o = OuterFamily::power(rng.gen_range(0.5..2.0), 1.0 / d, rng.gen_range(-1.0..1.0));
    let u = rng.gen_range(0.5..2.0);
    let r = ode_residual(&o, d, u)?;
    Ok((
        json!({ "outer": o.to_string(), "degree": d, "u": u, "residual": r }),
        r,
    ))
}

fn bracket_trial(
    rng: &mut impl Rng,
    inners: &[HomogeneousInstance],
) -> Result<(Value, f64), Failure> {
    let h = pick(rng, inners);
    let p = point(rng, 2);
    let b = bracket_chain(&h.expr, &p)?;
    let relerr = b.bracket_relerr.max(b.euler_relerr);
    Ok((
        json!({
            "inner": text(&h.expr, 2),
            "family": h.label,
            "point": p,
            "bracket": b.bracket,
            "substituted": b.substituted,
            "euler_square": b.euler_square,
            "value_square": b.value_square,
            "bracket_relerr": b.bracket_relerr,
            "euler_relerr": b.euler_relerr,
            "relerr": relerr,
        }),
        relerr,
    ))
}

fn profile_trial(
    rng: &mut impl Rng,
    trial: usize,
    outers: &[OuterFamily],
) -> Result<(Value, f64), Failure> {
    let (o, phi, k, p) = if trial == 0 {
        let phi = homothetic::parse("v^2", &VarSpec::new(["v"]).expect("valid name"))
            .expect("literal parses");
        (OuterFamily::power(1.0, 2.0, 0.0), phi, 1, vec![1.0, 2.0])
    } else {
        let k = rng.gen_range(1..=3);
        let phi = random_profile(rng, k);
        let o = pick(rng, outers).clone();
        let p = point(rng, k + 1);
        (o, phi, k, p)
    };
    let c = profile_identity(&o, &phi, &p)?;
    let names = VarSpec::new((2..k + 2).map(|i| format!("u{i}"))).expect("valid names");
    Ok((
        json!({
            "outer": o.to_string(),
            "profile": phi.display(&names).to_string(),
            "point": p,
            "lhs": c.lhs,
            "rhs": c.rhs,
            "relerr": c.relerr,
        }),
        c.relerr,
    ))
}

pub fn verify(global: &Global, args: &VerifyArgs) -> Result<Report, Failure> {
    if args.trials == 0 {
        return Err(Failure::usage("--trials must be positive"));
    }
    let id = args.identity;
    let tol = id.tolerance();
    let mut rng = ChaCha8Rng::seed_from_u64(global.seed);
    let outers = outer_battery();
    let inners = match id {
        Identity::CompositeHessian | Identity::CompositeHessianFullPower => {
            homogeneous_battery(global.seed)
        }
        Identity::Factorization => homogeneous_battery_for(global.seed, &[2.0, 3.0, -1.0, 0.5]),
        Identity::BracketChain => linearly_homogeneous(global.seed, 24)
            .into_iter()
            .filter(|h| h.arity == 2)
            .collect(),
        Identity::PowerOde | Identity::Profile => Vec::new(),
    };
    let mut trials = Vec::with_capacity(args.trials);
    let mut failures = Vec::new();
    let mut max_relerr = 0.0_f64;
    for t in 0..args.trials {
        let (mut rec, err) = match id {
            Identity::CompositeHessian => composite_trial(&mut rng, &inners, &outers, false)?,
            Identity::CompositeHessianFullPower => {
                composite_trial(&mut rng, &inners, &outers, true)?
            }
            Identity::Factorization => factorization_trial(&mut rng, &inners, &outers)?,
            Identity::PowerOde => ode_trial(&mut rng, t)?,
            Identity::BracketChain => bracket_trial(&mut rng, &inners)?,
            Identity::Profile => profile_trial(&mut rng, t, &outers)?,
        };
        rec["trial"] = json!(t);
        max_relerr = max_relerr.max(err);
        if !(err <= tol) {
            failures.push(rec.clone());
        }
        trials.push(rec);
    }
    let mut r = Report::new("verify", global);
    r.set(
        "input",
        json!({ "identity": id.name(), "trials": args.trials, "seed": global.seed }),
    );
    r.set("tolerance", tol);
    r.set("max_relerr", max_relerr);
    r.set("passed", failures.is_empty());
    r.set("failure_count", failures.len());
    r.set("failures", &failures);
    r.set("trials", trials);
    if !failures.is_empty() {
        let msg = format!(
            "{} of {} trials exceed relative tolerance {tol:e} (max {max_relerr:e})",
            failures.len(),
            args.trials
        );
        return Err(Failure::new("ToleranceExceeded", msg, EXIT_TOLERANCE)
            .with_evidence(failures[0].clone())
            .with_report(r));
    }
    Ok(r)
}
