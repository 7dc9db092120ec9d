//! `analyze`, `classify` and `models` subcommands.

use clap::Args;
use homothetic::geometry::{flatness_with, gauss_kronecker, ma_residual, FlatnessThresholds};
use homothetic::homogeneity::{
    estimate_degree, euler_residual, mrs_degree_zero_residual, radial_affinity_residual,
    second_euler_residual, DEFAULT_RADIAL_TS, RADIAL_AFFINITY_TOL,
};
use homothetic::models::{analytic_flatness, composite, prediction_grid, CrossCheck, Model};
use homothetic::theorems::{
    classify_n_input_with, classify_two_input_with, composite_hessian_identity,
    factorization_identity, CaseN, HomotheticSpec, OuterFamily,
};
use homothetic::{Error, Expr, VarSpec};
use serde_json::{json, Value};

use crate::failure::{Failure, EXIT_TOLERANCE};
use crate::input;
use crate::report::Report;
use crate::Global;

/// MRS degree-zero residual accepted as homothetic.
const MRS_TOL: f64 = 1e-8;
/// Points reported individually in curvature and radial checks.
const DETAIL_POINTS: usize = 8;

#[derive(Debug, Args)]
pub struct AnalyzeArgs {
    /// Expression to analyze.
    #[arg(long, required_unless_present = "model", conflicts_with = "model")]
    pub expr: Option<String>,
    /// Model literal, e.g. `cobb-douglas:gamma=1,alpha=0.3:0.7`.
    #[arg(long)]
    pub model: Option<String>,
    /// Treat the expression as the inner function of this outer function and
    /// classify the composite.
    #[arg(long)]
    pub outer: Option<String>,
    /// Degree of the inner function for classification; estimated when absent.
    #[arg(long, requires = "outer")]
    pub degree: Option<f64>,
}

#[derive(Debug, Args)]
pub struct ClassifyArgs {
    /// Homogeneous inner function `h`.
    #[arg(long)]
    pub inner: String,
    /// Outer function literal, e.g. `power:alpha=1,p=3,beta=0`.
    #[arg(long)]
    pub outer: String,
    /// Homogeneity degree of `h`.
    #[arg(long, allow_hyphen_values = true)]
    pub degree: f64,
}

#[derive(Debug, Args)]
pub struct ModelsArgs {
    /// Model literal; runs the full prediction grid when absent.
    #[arg(long)]
    pub model: Option<String>,
    /// Outer function literal.
    #[arg(long, requires = "model", default_value = "affine:alpha=1,beta=0")]
    pub outer: String,
}

fn parse_outer(text: &str) -> Result<OuterFamily, Failure> {
    Ok(text.parse::<OuterFamily>()?)
}

fn parse_model(text: &str) -> Result<Model, Failure> {
    Ok(text.parse::<Model>()?)
}

fn input_echo(global: &Global, source: &str, e: &Expr, vars: &VarSpec) -> Value {
    json!({
        "source": source,
        "expression": e.display(vars).to_string(),
        "vars": vars.names(),
        "constants": input::constants(global).unwrap_or_default(),
        "seed": global.seed,
        "samples": global.samples,
        "tol_flat": global.tol_flat,
        "tol_reject": global.tol_reject,
    })
}

fn max_over(
    points: &[Vec<f64>],
    mut f: impl FnMut(&[f64]) -> Result<f64, Error>,
) -> Result<f64, Error> {
    points.iter().try_fold(0.0_f64, |m, p| Ok(m.max(f(p)?)))
}

fn degree_block(e: &Expr, samples: &[Vec<f64>]) -> Result<Value, Failure> {
    let est = match estimate_degree(e, samples) {
        Ok(est) => est,
        Err(err @ Error::ZeroValue { .. }) => return Ok(json!({ "error": err.to_string() })),
        Err(err) => return Err(err.into()),
    };
    let mut v = json!({
        "degree": est.degree,
        "spread": est.spread,
        "homogeneous": est.is_homogeneous(),
    });
    if est.is_homogeneous() {
        let d = est.degree;
        v["max_euler_residual"] = json!(max_over(samples, |p| euler_residual(e, p, d))?);
        v["max_second_euler_residual"] =
            json!(max_over(samples, |p| second_euler_residual(e, p, d))?);
    }
    Ok(v)
}

fn homothetic_block(e: &Expr, samples: &[Vec<f64>]) -> Value {
    if samples.first().map_or(0, Vec::len) < 2 {
        return json!({ "error": "marginal rates of substitution need at least two inputs" });
    }
    let r = max_over(samples, |p| {
        [0.5, 2.0, 10.0].iter().try_fold(0.0_f64, |m, &t| {
            Ok(m.max(mrs_degree_zero_residual(e, p, t)?))
        })
    });
    match r {
        Ok(r) => json!({
            "max_mrs_degree_zero_residual": r,
            "tolerance": MRS_TOL,
            "homothetic": r <= MRS_TOL,
        }),
        Err(err) => json!({ "error": err.to_string() }),
    }
}

fn radial_block(e: &Expr, samples: &[Vec<f64>]) -> Value {
    let pts = &samples[..samples.len().min(DETAIL_POINTS)];
    match max_over(pts, |p| radial_affinity_residual(e, p, &DEFAULT_RADIAL_TS)) {
        Ok(r) => json!({
            "max_residual": r,
            "tolerance": RADIAL_AFFINITY_TOL,
            "linear_homogeneous_up_to_constants": r <= RADIAL_AFFINITY_TOL,
        }),
        Err(err) => json!({ "error": err.to_string() }),
    }
}

fn curvature_block(e: &Expr, samples: &[Vec<f64>]) -> Result<Value, Failure> {
    let mut rows = Vec::new();
    for p in samples.iter().take(DETAIL_POINTS) {
        let m = ma_residual(e, p)?;
        rows.push(json!({
            "point": p,
            "det_hess": m.raw,
            "normalized_residual": m.normalized,
            "gauss_kronecker": gauss_kronecker(e, p)?,
        }));
    }
    Ok(Value::Array(rows))
}

fn classification_value(
    global: &Global,
    spec: &HomotheticSpec,
    samples: &[Vec<f64>],
) -> Result<Value, Failure> {
    let th = input::thresholds(global);
    let fail = |e| inconsistent(e, spec, samples, th);
    if spec.arity == 2 {
        let c = classify_two_input_with(spec, samples, th).map_err(fail)?;
        Ok(serde_json::to_value(c).expect("classification serializes"))
    } else if spec.arity >= 3 {
        let c = classify_n_input_with(spec, samples, th).map_err(fail)?;
        let mut v = serde_json::to_value(&c).expect("classification serializes");
        if let CaseN::ProfileFlat { profile } = &c.case {
            let names =
                VarSpec::new((2..=spec.arity).map(|i| format!("u{i}"))).expect("valid names");
            v["profile_text"] = json!(profile.display(&names).to_string());
        }
        Ok(v)
    } else {
        Err(Failure::usage("classification needs at least two inputs"))
    }
}

/// Attaches flatness and radial evidence to an inconsistent outcome.
fn inconsistent(
    e: Error,
    spec: &HomotheticSpec,
    samples: &[Vec<f64>],
    th: FlatnessThresholds,
) -> Failure {
    let is_inconsistent = matches!(e, Error::Inconsistent(_));
    let f = Failure::from(e);
    if !is_inconsistent {
        return f;
    }
    let evidence = spec.composite().ok().map(|c| {
        json!({
            "flatness": flatness_with(&c, samples, th).ok(),
            "radial": radial_block(&c, samples),
        })
    });
    match evidence {
        Some(ev) => f.with_evidence(ev),
        None => f,
    }
}

fn identity_block(spec: &HomotheticSpec, samples: &[Vec<f64>]) -> Result<Value, Failure> {
    let composite = max_over(samples, |p| {
        composite_hessian_identity(spec, p).map(|c| c.relerr)
    })?;
    let mut v = json!({ "composite_hessian": { "max_relerr": composite } });
    if spec.degree != 1.0 {
        let fact = max_over(samples, |p| {
            factorization_identity(spec, p).map(|c| c.relerr)
        })?;
        v["factorization"] = json!({ "max_relerr": fact });
    }
    Ok(v)
}

pub fn analyze(global: &Global, args: &AnalyzeArgs) -> Result<Report, Failure> {
    let (source, e, vars) = match (&args.expr, &args.model) {
        (Some(text), _) => {
            let (e, vars) = input::expression(global, text)?;
            (text.clone(), e, vars)
        }
        (None, Some(m)) => {
            let model = parse_model(m)?;
            (m.clone(), model.to_expr(), VarSpec::indexed(model.arity()))
        }
        (None, None) => return Err(Failure::usage("pass --expr or --model")),
    };
    let n = vars.arity();
    let samples = input::samples(global, n)?;
    let mut r = Report::new("analyze", global);
    r.set("input", input_echo(global, &source, &e, &vars));
    let degree = degree_block(&e, &samples)?;
    r.set("degree", &degree);
    r.set("homotheticity", homothetic_block(&e, &samples));
    r.set("radial_affinity", radial_block(&e, &samples));
    r.set(
        "flatness",
        flatness_with(&e, &samples, input::thresholds(global))?,
    );
    r.set("curvature", curvature_block(&e, &samples)?);
    if let Some(outer) = &args.outer {
        let outer = parse_outer(outer)?;
        let d = match args.degree.or_else(|| degree["degree"].as_f64()) {
            Some(d) => d,
            None => {
                return Err(Failure::usage(
                    "degree could not be estimated; pass --degree",
                ))
            }
        };
        let spec = HomotheticSpec::new(outer, e, d, n)?;
        r.set("composite", spec.composite()?.display(&vars).to_string());
        r.set(
            "classification",
            classification_value(global, &spec, &samples)?,
        );
        r.set("identities", identity_block(&spec, &samples)?);
    }
    Ok(r)
}

pub fn classify(global: &Global, args: &ClassifyArgs) -> Result<Report, Failure> {
    let (h, vars) = input::expression(global, &args.inner)?;
    let outer = parse_outer(&args.outer)?;
    let n = vars.arity();
    let samples = input::samples(global, n)?;
    let spec = HomotheticSpec::new(outer, h.clone(), args.degree, n)?;
    let est = spec.validate(&samples)?;
    let mut r = Report::new("classify", global);
    let mut echo = input_echo(global, &args.inner, &h, &vars);
    echo["outer"] = json!(args.outer);
    echo["degree"] = json!(args.degree);
    r.set("input", echo);
    r.set("degree_estimate", est);
    r.set("composite", spec.composite()?.display(&vars).to_string());
    r.set(
        "classification",
        classification_value(global, &spec, &samples)?,
    );
    Ok(r)
}

fn cross_check_row(c: &CrossCheck) -> Value {
    json!({
        "model": c.model,
        "outer": c.outer,
        "expected": c.analytic.expected,
        "strict_reading": c.analytic.strict_reading,
        "admits_additive_constant": c.analytic.admits_additive_constant,
        "reason": c.analytic.reason,
        "numerical": c.numerical.verdict,
        "max_residual": c.numerical.max_residual,
        "agrees": c.agrees(),
    })
}

fn compare_with(
    global: &Global,
    model: &Model,
    outer: &OuterFamily,
) -> Result<CrossCheck, Failure> {
    let samples = input::samples(global, model.arity())?;
    let analytic = analytic_flatness(model, outer)?;
    let numerical = flatness_with(
        &composite(model, outer)?,
        &samples,
        input::thresholds(global),
    )?;
    Ok(CrossCheck {
        model: model.to_string(),
        outer: outer.to_string(),
        analytic,
        numerical,
    })
}

pub fn models(global: &Global, args: &ModelsArgs) -> Result<Report, Failure> {
    let mut r = Report::new("models", global);
    let pairs = match &args.model {
        Some(m) => {
            let model = parse_model(m)?;
            let outer = parse_outer(&args.outer)?;
            let mut info = json!({
                "literal": model.to_string(),
                "arity": model.arity(),
                "degree": model.degree(),
                "expression": model.to_expr().display(&VarSpec::indexed(model.arity())).to_string(),
            });
            if let Model::Acms(a) = &model {
                info["elasticity"] = json!(a.elasticity());
            }
            r.set("model", info);
            if let OuterFamily::Expr { .. } = outer {
                let samples = input::samples(global, model.arity())?;
                let f = composite(&model, &outer)?;
                r.set(
                    "analytic",
                    json!({ "error": Error::UnsupportedOuter(outer.to_string()).to_string() }),
                );
                r.set(
                    "numerical",
                    flatness_with(&f, &samples, input::thresholds(global))?,
                );
                return Ok(r);
            }
            vec![(model, outer)]
        }
        None => prediction_grid(),
    };
    let mut rows = Vec::new();
    let mut mismatches = 0;
    for (m, o) in &pairs {
        let c = compare_with(global, m, o)?;
        mismatches += usize::from(!c.agrees());
        rows.push(cross_check_row(&c));
    }
    r.set("seed", global.seed);
    r.set("pairs", rows);
    r.set("mismatches", mismatches);
    if mismatches > 0 {
        let msg =
            format!("{mismatches} analytic prediction(s) contradicted by the numerical verdict");
        return Err(Failure::new("Mismatch", msg, EXIT_TOLERANCE).with_report(r));
    }
    Ok(r)
}
