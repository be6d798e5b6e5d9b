use std::path::{Path, PathBuf};

use evmix::diagnostics::{diagnostic_report, DiagnosticReport};
use evmix::estimation::{delta_method_interval, fit_ma1, fit_random_effects, FitOptions, FitResult, Interval};
use evmix::mixture::{
    gev_translate, simulate, HiddenArSpec, HiddenMaSpec, HierarchicalSpec, Neighborhood, RandomEffectsSpec,
    SpatialMaSpec,
};
use evmix::risk::{risk_return_period, RiskQuery, RiskResult};
use evmix::{ExtremeModel, MixtureSpec};
use serde::{Deserialize, Serialize};

use crate::args::{Command, DiagnoseArgs, FitArgs, Model, RiskArgs, SigmaStart, SimulateArgs};
use crate::data::{emit, read_groups, read_series, to_csv, Labelled};
use crate::error::{CliError, CliResult};

/// What `fit` writes and `diagnose`/`risk` read back.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FitDocument {
    pub model: String,
    pub labels: Vec<String>,
    pub observations: usize,
    pub fit: FitResult,
}

#[derive(Debug, Serialize)]
struct DiagnoseDocument<'a> {
    labels: &'a [String],
    report: DiagnosticReport,
}

#[derive(Debug, Serialize)]
struct RiskDocument {
    query: RiskQuery,
    result: RiskResult,
    return_period_infinite: bool,
    interval: Option<Interval>,
    warnings: Vec<String>,
}

pub fn run(command: Command) -> CliResult<()> {
    match command {
        Command::Fit(a) => fit(a),
        Command::Simulate(a) => simulate_cmd(a),
        Command::Diagnose(a) => diagnose(a),
        Command::Risk(a) => risk(a),
    }
}

fn model_name(model: Model) -> &'static str {
    match model {
        Model::Re => "re",
        Model::Ma1 => "ma1",
        Model::Ar1 => "ar1",
        Model::Spatial => "spatial",
        Model::Hierarchical => "hierarchical",
    }
}

fn to_json<T: Serialize>(value: &T) -> CliResult<Vec<u8>> {
    let mut text = serde_json::to_vec_pretty(value)?;
    text.push(b'\n');
    Ok(text)
}

fn read_json<T: for<'de> Deserialize<'de>>(path: &Path) -> CliResult<T> {
    let text = std::fs::read(path).map_err(|source| CliError::Io {
        path: path.to_path_buf(),
        source,
    })?;
    serde_json::from_slice(&text).map_err(|e| CliError::Data {
        path: path.to_path_buf(),
        message: e.to_string(),
    })
}

fn fit(a: FitArgs) -> CliResult<()> {
    if a.starts == 0 {
        return Err(CliError::Usage("--starts must be at least 1".into()));
    }
    let opts = FitOptions {
        starts: a.starts,
        seed: a.seed,
        sigma_start: match a.sigma_start {
            SigmaStart::Half => evmix::estimation::SigmaStart::Half,
            SigmaStart::Double => evmix::estimation::SigmaStart::Double,
        },
        ..FitOptions::default()
    };
    let (data, result) = match a.model {
        Model::Re => {
            let data = read_groups(&a.input)?;
            let result = fit_random_effects(&data.values, &opts)?;
            (data, result)
        }
        Model::Ma1 => {
            let data = read_series(&a.input)?;
            let result = fit_ma1(&data.values, &opts)?;
            (data, result)
        }
        other => {
            return Err(CliError::Usage(format!(
                "fitting is available for re and ma1, not {}",
                model_name(other)
            )))
        }
    };
    let converged = result.converged;
    let doc = FitDocument {
        model: model_name(a.model).into(),
        observations: data.values.iter().map(Vec::len).sum(),
        labels: data.labels,
        fit: result,
    };
    emit(a.output.as_deref(), &to_json(&doc)?)?;
    if !converged {
        return Err(CliError::NotConverged("evaluation budget exhausted; estimates were written".into()));
    }
    Ok(())
}

fn reject_flag(present: bool, flag: &str, model: Model) -> CliResult<()> {
    if present {
        return Err(CliError::Usage(format!("{flag} does not apply to model {}", model_name(model))));
    }
    Ok(())
}

fn required(value: Option<f64>, flag: &str, model: Model) -> CliResult<f64> {
    value.ok_or_else(|| CliError::Usage(format!("model {} needs {flag}", model_name(model))))
}

/// Draws with Gumbel margins, or GEV margins when `gamma` is set.
fn draw(spec: MixtureSpec, gamma: Option<f64>, replicates: usize, seed: u64) -> CliResult<Vec<Vec<f64>>> {
    Ok(match gamma {
        Some(g) => gev_translate(&spec, g)?.simulate(replicates, seed),
        None => simulate(&spec, replicates, seed),
    })
}

fn grouped_rows(draws: &[Vec<f64>], m: usize, n: usize) -> Vec<[String; 2]> {
    let mut rows = Vec::with_capacity(draws.len() * m * n);
    for (r, x) in draws.iter().enumerate() {
        for (g, chunk) in x.chunks(n).enumerate() {
            for v in chunk {
                rows.push([(r * m + g + 1).to_string(), v.to_string()]);
            }
        }
    }
    rows
}

fn series_rows(draws: &[Vec<f64>]) -> Vec<[String; 3]> {
    draws
        .iter()
        .enumerate()
        .flat_map(|(r, x)| {
            x.iter()
                .enumerate()
                .map(move |(t, v)| [(r + 1).to_string(), (t + 1).to_string(), v.to_string()])
        })
        .collect()
}

fn simulate_cmd(a: SimulateArgs) -> CliResult<()> {
    let seed = a.seed.ok_or_else(|| CliError::Usage("--seed is required".into()))?;
    if a.replicates == 0 || a.n == 0 || a.m == 0 {
        return Err(CliError::Usage("--replicates, --m and --n must be at least 1".into()));
    }
    let model = a.model;
    if model != Model::Ma1 {
        reject_flag(a.b.is_some(), "--b", model)?;
    }
    if model != Model::Ar1 {
        reject_flag(a.rho.is_some(), "--rho", model)?;
    }
    if model != Model::Hierarchical {
        reject_flag(a.beta.is_some(), "--beta", model)?;
    }
    let bytes = match model {
        Model::Re => {
            let spec = RandomEffectsSpec::new(a.mu, a.sigma, a.alpha, vec![a.n; a.m])?;
            let draws = draw(spec.to_mixture(), a.gamma, a.replicates, seed)?;
            to_csv(&["group", "value"], &grouped_rows(&draws, a.m, a.n))?
        }
        Model::Hierarchical => {
            reject_flag(a.gamma.is_some(), "--gamma", model)?;
            let beta = required(a.beta, "--beta", model)?;
            let spec = HierarchicalSpec::new(a.mu, a.sigma, a.alpha, beta, vec![vec![a.n; a.m]])?;
            let draws = spec.simulate(a.replicates, seed);
            to_csv(&["group", "value"], &grouped_rows(&draws, a.m, a.n))?
        }
        Model::Ma1 => {
            let b = required(a.b, "--b", model)?;
            let spec = HiddenMaSpec::ma1(a.mu, b, a.sigma, a.alpha, a.n)?;
            let draws = draw(spec.to_mixture(), a.gamma, a.replicates, seed)?;
            to_csv(&["series", "index", "value"], &series_rows(&draws))?
        }
        Model::Ar1 => {
            let rho = required(a.rho, "--rho", model)?;
            let spec = HiddenArSpec::new(vec![a.mu; a.n], a.sigma, a.alpha, rho)?;
            let draws = draw(spec.to_mixture(), a.gamma, a.replicates, seed)?;
            to_csv(&["series", "index", "value"], &series_rows(&draws))?
        }
        Model::Spatial => {
            let cells = a.n.checked_mul(a.n).ok_or_else(|| CliError::Usage("--n is too large".into()))?;
            let spec = SpatialMaSpec::new(a.n, a.delta, vec![a.mu; cells], a.sigma, a.alpha, Neighborhood::cross())?;
            let draws = draw(spec.to_mixture(), a.gamma, a.replicates, seed)?;
            to_csv(&["series", "index", "value"], &series_rows(&draws))?
        }
    };
    emit(a.output.as_deref(), &bytes)
}

fn read_re_fit(path: &Path) -> CliResult<FitDocument> {
    let doc: FitDocument = read_json(path)?;
    if doc.model != "re" {
        return Err(CliError::Usage(format!(
            "{} holds a {} fit; a random-effects fit is needed",
            path.display(),
            doc.model
        )));
    }
    Ok(doc)
}

/// `report.json` → `report.gumbel.csv`, `report.qq.csv`
fn sibling(path: &Path, suffix: &str) -> PathBuf {
    let stem = path.file_stem().map(|s| s.to_string_lossy().into_owned()).unwrap_or_default();
    path.with_file_name(format!("{stem}.{suffix}.csv"))
}

fn diagnose(a: DiagnoseArgs) -> CliResult<()> {
    let doc = read_re_fit(&a.fit)?;
    let data: Labelled = read_groups(&a.input)?;
    if data.labels != doc.labels {
        return Err(CliError::Data {
            path: a.input.clone(),
            message: "groups differ from those in the fit document".into(),
        });
    }
    let report = diagnostic_report(&doc.fit, &data.values)?;
    if let Some(out) = &a.output {
        let gumbel: Vec<[String; 3]> = report
            .gumbel_plots
            .iter()
            .flat_map(|p| {
                let label = &data.labels[p.group];
                p.points.iter().map(move |(x, y)| [label.clone(), x.to_string(), y.to_string()])
            })
            .collect();
        emit(
            Some(&sibling(out, "gumbel")),
            &to_csv(&["group", "value", "reduced_variate"], &gumbel)?,
        )?;
        if let Some(qq) = &report.qq {
            let rows: Vec<[String; 2]> = qq
                .theoretical
                .iter()
                .zip(&qq.empirical)
                .map(|(t, e)| [t.to_string(), e.to_string()])
                .collect();
            emit(Some(&sibling(out, "qq")), &to_csv(&["theoretical", "empirical"], &rows)?)?;
        }
    }
    let body = DiagnoseDocument {
        labels: &data.labels,
        report,
    };
    emit(a.output.as_deref(), &to_json(&body)?)
}

fn risk(a: RiskArgs) -> CliResult<()> {
    let mut warnings = Vec::new();
    let doc = a.fit.as_deref().map(read_re_fit).transpose()?;
    let (mu, sigma, alpha) = match &doc {
        Some(d) => {
            if a.mu.is_some() || a.sigma.is_some() || a.alpha.is_some() {
                return Err(CliError::Usage("give either --fit or --mu/--sigma/--alpha, not both".into()));
            }
            let get = |name: &str| {
                d.fit
                    .get(name)
                    .ok_or_else(|| CliError::Usage(format!("fit document lacks `{name}`")))
            };
            (get("mu")?, get("sigma")?, get("alpha")?)
        }
        None => match (a.mu, a.sigma, a.alpha) {
            (Some(m), Some(s), Some(al)) => (m, s, al),
            _ => return Err(CliError::Usage("--mu, --sigma and --alpha are required without --fit".into())),
        },
    };
    if !(a.level > 0.0 && a.level < 1.0) {
        return Err(CliError::Usage("--level must lie in (0, 1)".into()));
    }
    let query = RiskQuery {
        m: a.m,
        n: a.n,
        threshold: a.threshold,
        mu,
        sigma,
        alpha,
    };
    let result = risk_return_period(&query)?;
    let interval = match (&doc, result.return_period) {
        (Some(d), Some(_)) => {
            let period = |t: &[f64]| {
                let q = RiskQuery {
                    mu: t[0],
                    sigma: t[1],
                    alpha: t[2].min(1.0),
                    ..query
                };
                risk_return_period(&q)
                    .ok()
                    .and_then(|r| r.return_period)
                    .unwrap_or(f64::NAN)
            };
            match delta_method_interval(period, &d.fit, a.level) {
                Ok(ci) if ci.std_error.is_finite() => Some(ci),
                Ok(_) => {
                    warnings.push("return period is not differentiable at the estimate".into());
                    None
                }
                Err(e) => {
                    warnings.push(format!("no interval: {e}"));
                    None
                }
            }
        }
        (Some(_), None) => {
            warnings.push("return period is infinite; no interval".into());
            None
        }
        (None, _) => None,
    };
    let body = RiskDocument {
        query,
        return_period_infinite: result.return_period.is_none(),
        result,
        interval,
        warnings,
    };
    emit(a.output.as_deref(), &to_json(&body)?)
}
