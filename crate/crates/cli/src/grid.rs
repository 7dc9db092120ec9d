//! `grid`: CSV tabulation with a JSON sidecar.

use std::fmt::Write as _;
use std::path::PathBuf;

use clap::Args;
use homothetic::geometry::{gauss_kronecker, ma_residual};
use homothetic::homogeneity::mrs;
use homothetic::models::Model;
use homothetic::{Error, Expr, VarSpec};
use serde_json::json;

use crate::failure::Failure;
use crate::input;
use crate::report::Report;
use crate::Global;

#[derive(Debug, Args)]
pub struct GridArgs {
    /// Expression to tabulate.
    #[arg(long, required_unless_present = "model", conflicts_with = "model")]
    pub expr: Option<String>,
    /// Model literal to tabulate.
    #[arg(long)]
    pub model: Option<String>,
    /// Coordinate range `lo:hi`, shared by all axes.
    #[arg(long, default_value = "0.5:2")]
    pub range: String,
    /// Grid points per axis.
    #[arg(long, default_value_t = 50)]
    pub steps: usize,
    /// CSV destination; stdout when absent. The sidecar defaults to the same
    /// path with a `.json` extension.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

fn parse_range(s: &str) -> Result<(f64, f64), Failure> {
    let bad = || Failure::usage(format!("--range `{s}` is not lo:hi with finite lo < hi"));
    let (lo, hi) = s.split_once(':').ok_or_else(bad)?;
    let lo: f64 = lo.trim().parse().map_err(|_| bad())?;
    let hi: f64 = hi.trim().parse().map_err(|_| bad())?;
    if !(lo.is_finite() && hi.is_finite() && lo < hi) {
        return Err(bad());
    }
    Ok((lo, hi))
}

fn axis(lo: f64, hi: f64, steps: usize) -> Vec<f64> {
    if steps == 1 {
        return vec![lo];
    }
    (0..steps)
        .map(|k| lo + (hi - lo) * k as f64 / (steps - 1) as f64)
        .collect()
}

/// Value, Hessian determinant, curvature and MRS per pair; `None` where the
/// denominator partial vanishes.
type Row = (f64, f64, f64, Vec<Option<f64>>);

fn tabulate(e: &Expr, p: &[f64], pairs: &[(usize, usize)]) -> Result<Row, Error> {
    let f = e.eval_scalar(p)?;
    let det = ma_residual(e, p)?.raw;
    let k = gauss_kronecker(e, p)?;
    let mut m = Vec::with_capacity(pairs.len());
    for &(i, j) in pairs {
        m.push(match mrs(e, p, i, j) {
            Ok(v) => Some(v),
            Err(Error::ZeroDerivative { .. }) => None,
            Err(err) => return Err(err),
        });
    }
    Ok((f, det, k, m))
}

/// Rows failing with these errors are skipped and counted.
fn is_domain(e: &Error) -> bool {
    matches!(e, Error::Eval(_) | Error::ZeroDerivative { .. })
}

pub fn grid(global: &Global, args: &GridArgs) -> Result<Report, Failure> {
    if args.steps == 0 {
        return Err(Failure::usage("--steps must be at least 1"));
    }
    let (lo, hi) = parse_range(&args.range)?;
    let (source, e, n) = match (&args.expr, &args.model) {
        (Some(text), _) => {
            let (e, vars) = input::expression(global, text)?;
            (text.clone(), e, vars.arity())
        }
        (None, Some(m)) => {
            let model: Model = m.parse()?;
            (m.clone(), model.to_expr(), model.arity())
        }
        (None, None) => return Err(Failure::usage("pass --expr or --model")),
    };
    let rows_total = (args.steps as u128).pow(n as u32);
    if rows_total > 10_000_000 {
        return Err(Failure::usage(format!("grid would have {rows_total} rows")));
    }
    let ax = axis(lo, hi, args.steps);
    let pairs: Vec<(usize, usize)> = (0..n)
        .flat_map(|i| (i + 1..n).map(move |j| (i, j)))
        .collect();

    let mut csv = String::new();
    let mut header: Vec<String> = (1..=n).map(|i| format!("x{i}")).collect();
    header.extend(["f", "det_hess", "gauss_kronecker"].map(String::from));
    header.extend(
        pairs
            .iter()
            .map(|(i, j)| format!("mrs_{}_{}", i + 1, j + 1)),
    );
    csv.push_str(&header.join(","));
    csv.push('\n');

    let mut written = 0usize;
    let mut skipped = 0usize;
    let mut max_abs_k = 0.0_f64;
    let mut idx = vec![0usize; n];
    'rows: for _ in 0..rows_total {
        let p: Vec<f64> = idx.iter().map(|&k| ax[k]).collect();
        for d in (0..n).rev() {
            idx[d] += 1;
            if idx[d] < args.steps {
                break;
            }
            idx[d] = 0;
        }
        let row = tabulate(&e, &p, &pairs);
        let (f, det, k, m) = match row {
            Ok(r) => r,
            Err(err) if is_domain(&err) => {
                skipped += 1;
                continue 'rows;
            }
            Err(err) => return Err(err.into()),
        };
        max_abs_k = max_abs_k.max(k.abs());
        let mut line: Vec<String> = p.iter().map(|v| format!("{v:?}")).collect();
        line.extend([f, det, k].map(|v| format!("{v:?}")));
        line.extend(
            m.iter()
                .map(|v| v.map(|v| format!("{v:?}")).unwrap_or_default()),
        );
        let _ = writeln!(csv, "{}", line.join(","));
        written += 1;
    }

    let mut r = Report::new("grid", global);
    r.set(
        "input",
        json!({
            "source": source,
            "expression": e.display(&VarSpec::indexed(n)).to_string(),
            "range": [lo, hi],
            "steps": args.steps,
        }),
    );
    r.set("columns", &header);
    r.set("rows_written", written);
    r.set("rows_skipped", skipped);
    r.set("max_abs_gauss_kronecker", max_abs_k);
    match &args.out {
        Some(path) => {
            std::fs::write(path, &csv).map_err(|e| Failure::io(e, path))?;
            r.set("csv", path.display().to_string());
            let sidecar = global
                .json
                .clone()
                .unwrap_or_else(|| path.with_extension("json"));
            std::fs::write(&sidecar, r.to_json()).map_err(|e| Failure::io(e, &sidecar))?;
        }
        None => {
            print!("{csv}");
            if let Some(path) = &global.json {
                std::fs::write(path, r.to_json()).map_err(|e| Failure::io(e, path))?;
            }
        }
    }
    r.emitted = true;
    Ok(r)
}
