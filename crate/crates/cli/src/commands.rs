use std::path::PathBuf;

use mopuc::cd::{self, LatticePath, PathKind};
use mopuc::recurrence::{self, Status};
use mopuc::{parse_system, Backend, ComplexFloat, GaussianRational, MopucError, MopucSystem, MultiIndex, Scalar, TolerancePolicy};
use serde_json::{json, Value};
use thiserror::Error;

use crate::output::{index_cells, index_header, Output};
use crate::{Cli, Command};

#[derive(Debug, Error)]
pub enum CliError {
    #[error("no measure system given (use --system PATH)")]
    NoSystem,
    #[error("cannot read {}: {source}", .path.display())]
    Io { path: PathBuf, source: std::io::Error },
    #[error(transparent)]
    Mopuc(#[from] MopucError),
    #[error("{0}")]
    Usage(String),
    #[error("cannot write output: {0}")]
    Output(String),
}

/// Runs the parsed command; `Ok(false)` means some identity check failed.
pub fn run(cli: &Cli) -> Result<bool, CliError> {
    let g = &cli.global;
    let policy = g.policy()?;
    let path = g.system.as_ref().ok_or(CliError::NoSystem)?;
    let text = std::fs::read_to_string(path).map_err(|source| CliError::Io {
        path: path.clone(),
        source,
    })?;
    let out = match g.backend {
        Backend::Exact => run_with::<GaussianRational>(cli, &text, policy)?,
        Backend::Float => run_with::<ComplexFloat>(cli, &text, policy)?,
    };
    out.emit(g.format, g.out.as_deref())?;
    Ok(out.ok)
}

fn run_with<S: Scalar>(cli: &Cli, text: &str, policy: TolerancePolicy) -> Result<Output, CliError> {
    let measures = parse_system::<S>(text, &policy)?;
    for w in measures.warnings() {
        eprintln!("warning: {w}");
    }
    let sys = MopucSystem::new(measures, policy);
    match &cli.command {
        Command::Moments { measure, range } => moments(&sys, *measure, range),
        Command::Coeffs { max } => coeffs(&sys, max),
        Command::Verify { max, index } => {
            let indices = match max {
                Some(max) => box_indices(&sys, max)?,
                None => {
                    for n in index {
                        check_dim(&sys, n)?;
                    }
                    index.clone()
                }
            };
            verify(&sys, &indices)
        }
        Command::Cd {
            path,
            len,
            target,
            points,
            bivariate,
        } => {
            let path = build_path(&sys, path, *len, target.as_ref(), cli.global.seed)?;
            cd_eval(&sys, &path, points, *bivariate, cli.global.seed)
        }
        Command::NormalityMap { max } => normality_map(&sys, max),
    }
}

fn check_dim<S: Scalar>(sys: &MopucSystem<S>, n: &MultiIndex) -> Result<(), CliError> {
    if n.dim() != sys.r() {
        return Err(MopucError::DimensionMismatch {
            index: n.clone(),
            got: n.dim(),
            expected: sys.r(),
        }
        .into());
    }
    Ok(())
}

fn box_indices<S: Scalar>(sys: &MopucSystem<S>, max: &MultiIndex) -> Result<Vec<MultiIndex>, CliError> {
    check_dim(sys, max)?;
    Ok(MultiIndex::graded_box(max))
}

fn parse_range(range: &str) -> Result<(i64, i64), CliError> {
    let bad = || CliError::Usage(format!("invalid range {range:?}; expected a..b"));
    let (a, b) = range.split_once("..").ok_or_else(bad)?;
    let a: i64 = a.trim().parse().map_err(|_| bad())?;
    let b: i64 = b.trim().parse().map_err(|_| bad())?;
    if a > b {
        return Err(bad());
    }
    Ok((a, b))
}

fn moments<S: Scalar>(sys: &MopucSystem<S>, measure: usize, range: &str) -> Result<Output, CliError> {
    let (a, b) = parse_range(range)?;
    if measure == 0 || measure > sys.r() {
        return Err(MopucError::MeasureOutOfRange { index: measure, r: sys.r() }.into());
    }
    let j = measure - 1;
    let mut list = Vec::new();
    let mut rows = Vec::new();
    for p in a..=b {
        let v = sys.measures().moment(j, p)?;
        list.push(json!({ "p": p, "value": v.to_json() }));
        rows.push(vec![p.to_string(), v.to_cell()]);
    }
    Ok(Output {
        json: json!({ "backend": S::BACKEND.to_string(), "measure": measure, "moments": list }),
        header: vec!["p".into(), "value".into()],
        rows,
        ok: true,
    })
}

fn coeffs<S: Scalar>(sys: &MopucSystem<S>, max: &MultiIndex) -> Result<Output, CliError> {
    let r = sys.r();
    let mut header = index_header(r);
    header.extend(["status".into(), "alpha".into(), "beta".into()]);
    header.extend((1..=r).map(|k| format!("rho{k}")));
    header.extend((1..=r).map(|k| format!("kappa{k}")));

    let mut list = Vec::new();
    let mut rows = Vec::new();
    for n in box_indices(sys, max)? {
        let mut row = index_cells(&n);
        if !sys.is_normal(&n)?.0 {
            list.push(json!({ "index": n, "status": "non-normal" }));
            row.push("non-normal".into());
            row.extend(std::iter::repeat(String::new()).take(2 + 2 * r));
            rows.push(row);
            continue;
        }
        let alpha = recurrence::alpha(sys, &n)?;
        let beta = recurrence::beta(sys, &n)?;
        // rho_{n,k} needs n - e_k normal as well
        let rho: Vec<Option<S>> = (0..r)
            .map(|k| match n.minus(k) {
                Some(down) if !sys.is_normal(&down)?.0 => Ok(None),
                _ => recurrence::rho(sys, &n, k).map(Some),
            })
            .collect::<Result<_, MopucError>>()?;
        let kappa: Vec<S> = (0..r).map(|k| recurrence::kappa(sys, &n, k)).collect::<Result<_, _>>()?;
        let status = if rho.iter().all(Option::is_some) { "ok" } else { "partial" };

        list.push(json!({
            "index": n,
            "status": status,
            "alpha": alpha.to_json(),
            "beta": beta.to_json(),
            "rho": rho.iter().map(|x| x.as_ref().map_or(Value::Null, S::to_json)).collect::<Vec<_>>(),
            "kappa": kappa.iter().map(S::to_json).collect::<Vec<_>>(),
        }));
        row.extend([status.to_string(), alpha.to_cell(), beta.to_cell()]);
        row.extend(rho.iter().map(|x| x.as_ref().map_or(String::new(), S::to_cell)));
        row.extend(kappa.iter().map(S::to_cell));
        rows.push(row);
    }
    Ok(Output {
        json: json!({ "backend": S::BACKEND.to_string(), "coeffs": list }),
        header,
        rows,
        ok: true,
    })
}

fn verify<S: Scalar>(sys: &MopucSystem<S>, indices: &[MultiIndex]) -> Result<Output, CliError> {
    let suite = recurrence::run_suite(sys, indices)?;
    let mut non_normal = Vec::new();
    for n in indices {
        if !sys.is_normal(n)?.0 {
            non_normal.push(n.clone());
        }
    }
    let mut json = suite.to_json();
    json["backend"] = json!(S::BACKEND.to_string());
    json["non_normal"] = json!(non_normal);

    let mut header = vec!["identity".to_string()];
    header.extend(index_header(sys.r()));
    header.extend(["k", "l", "status", "pass", "residual"].map(String::from));
    let rows = suite
        .reports
        .iter()
        .map(|rep| {
            let mut row = vec![rep.identity.name()];
            row.extend(index_cells(&rep.index));
            let dir = |d: Option<usize>| d.map_or(String::new(), |d| (d + 1).to_string());
            let status = match rep.status {
                Status::Ok => "ok",
                Status::PreconditionFailed => "precondition-failed",
                Status::NotApplicable => "not-applicable",
            };
            row.extend([dir(rep.k), dir(rep.l), status.into(), rep.pass.to_string(), rep.residual.to_string()]);
            row
        })
        .collect();
    Ok(Output {
        json,
        header,
        rows,
        ok: suite.all_ok(),
    })
}

fn build_path<S: Scalar>(sys: &MopucSystem<S>, spec: &str, len: Option<usize>, target: Option<&MultiIndex>, seed: u64) -> Result<LatticePath, CliError> {
    let r = sys.r();
    let need_len = || len.ok_or_else(|| CliError::Usage(format!("--N is required for --path {spec}")));
    let path = match spec {
        "round-robin" => cd::make_path(&PathKind::RoundRobin, r, need_len()?)?,
        "random" => cd::make_path(&PathKind::Random(seed), r, need_len()?)?,
        "admissible" => cd::random_admissible_path(sys, need_len()?, seed)?,
        "stepline" => {
            let target = target.ok_or_else(|| CliError::Usage("--target is required for --path stepline".into()))?;
            cd::make_path(&PathKind::Stepline(target.clone()), r, len.unwrap_or(target.norm()))?
        }
        explicit => {
            let steps = explicit
                .split(',')
                .map(|s| match s.trim().parse::<usize>() {
                    Ok(k) if k >= 1 => Ok(k - 1),
                    _ => Err(MopucError::InvalidPath(format!("bad step {s:?} in {explicit:?}"))),
                })
                .collect::<Result<Vec<_>, _>>()?;
            let n = len.unwrap_or(steps.len());
            cd::make_path(&PathKind::Explicit(steps), r, n)?
        }
    };
    Ok(path)
}

fn point_pairs<S: Scalar>(spec: &str, seed: u64) -> Result<Vec<(S, S)>, CliError> {
    if spec == "circle" {
        return Ok(cd::unit_circle_points::<S>().into_iter().map(|z| (z.clone(), z)).collect());
    }
    let count = spec
        .strip_prefix("random:")
        .and_then(|k| k.parse::<usize>().ok())
        .ok_or_else(|| CliError::Usage(format!("invalid --points {spec:?}; expected random:K or circle")))?;
    let pts = cd::random_points::<S>(seed, 2 * count);
    Ok(pts.chunks(2).map(|p| (p[0].clone(), p[1].clone())).collect())
}

fn cd_eval<S: Scalar>(sys: &MopucSystem<S>, path: &LatticePath, points: &str, bivariate: bool, seed: u64) -> Result<Output, CliError> {
    let required = cd::cd_hypothesis(sys, path)?;
    let mut ok = true;
    let mut evals = Vec::new();
    let mut rows = Vec::new();
    let mut max_residual = 0.0_f64;
    for (z, zeta) in point_pairs::<S>(points, seed)? {
        let ev = cd::cd_check(sys, path, &z, &zeta)?;
        ok &= ev.pass;
        max_residual = max_residual.max(ev.residual);
        rows.push(vec![
            z.to_cell(),
            zeta.to_cell(),
            ev.lhs_total.to_cell(),
            ev.rhs_total.to_cell(),
            ev.residual.to_string(),
            ev.pass.to_string(),
        ]);
        evals.push(ev.to_json());
    }
    let mut json = json!({
        "backend": S::BACKEND.to_string(),
        "path": path.to_json(),
        "hypothesis": required,
        "evaluations": evals,
        "max_residual": max_residual,
    });
    if bivariate {
        let bi = cd::cd_bivariate(sys, path)?;
        let agree = if S::EXACT {
            bi.agree()
        } else {
            bi.residual() <= sys.policy().residual_tol
        };
        ok &= agree;
        json["bivariate"] = json!({
            "agree": agree,
            "residual": bi.residual(),
            "lhs": bi.lhs.iter().map(cd::Bivariate::to_json).collect::<Vec<_>>(),
            "rhs": bi.rhs.iter().map(cd::Bivariate::to_json).collect::<Vec<_>>(),
        });
    }
    json["pass"] = json!(ok);
    Ok(Output {
        json,
        header: ["z", "zeta", "lhs", "rhs", "residual", "pass"].map(String::from).to_vec(),
        rows,
        ok,
    })
}

fn normality_map<S: Scalar>(sys: &MopucSystem<S>, max: &MultiIndex) -> Result<Output, CliError> {
    let mut header = index_header(sys.r());
    header.extend(["verdict", "det", "abs_det", "det_is_zero", "rcond", "scaled_det"].map(String::from));
    let mut list = Vec::new();
    let mut rows = Vec::new();
    for n in box_indices(sys, max)? {
        let (normal, diag) = sys.is_normal(&n)?;
        let mut entry = diag.to_json();
        entry["index"] = json!(n);
        entry["normal"] = json!(normal);
        list.push(entry);
        let mut row = index_cells(&n);
        row.extend([
            serde_json::to_value(diag.verdict)
                .ok()
                .and_then(|v| v.as_str().map(String::from))
                .unwrap_or_default(),
            diag.det.to_cell(),
            diag.det.magnitude().to_string(),
            diag.det.is_exact_zero().to_string(),
            diag.rcond.map_or(String::new(), |x| x.to_string()),
            diag.scaled_det.to_string(),
        ]);
        rows.push(row);
    }
    Ok(Output {
        json: json!({ "backend": S::BACKEND.to_string(), "normality": list }),
        header,
        rows,
        ok: true,
    })
}
