//! Subcommand bodies. Each takes its fully resolved config, validates it,
//! runs the library, writes artifacts that echo the config and returns the
//! lines to print on standard output.

use std::fs;
use std::path::{Path, PathBuf};

use anyhow::{bail, ensure, Context, Result};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use argap::arcore::{distance_cov, distance_mc, distance_resultant, distance_roots, ArFilter};
use argap::clustering::{CurveKey, ReferenceCache, ReferenceParams, DEFAULT_DELTA};
use argap::formats::{
    artifact_to_json, curve_to_csv, filters_to_csv, model_to_json, read_filters, read_model, read_series,
    series_to_csv, table_to_csv, Artifact,
};
use argap::gapselect::{
    report_to_csv, run_benchmark, scenario, simulate_instance, BenchmarkConfig, BenchmarkReport, GapCurves,
    Method, SelectConfig, Variant, DEFAULT_REF_ITERATIONS, MAX_REF_COUNT,
};
use argap::sampler::sample_batch;
use argap::seeding::derive_seed;
use argap::switching::{default_window, fit_em, init_split, simulate as simulate_model, EmConfig, SwitchingArModel};

const DEFAULT_MAX_STATES: usize = 6;

fn echo<C: Serialize>(config: &C) -> Result<serde_json::Value> {
    Ok(serde_json::to_value(config)?)
}

fn required<'a, T>(value: &'a Option<T>, name: &str) -> Result<&'a T> {
    value.as_ref().with_context(|| format!("missing required `--{name}`"))
}

/// Refuse to write over any input file.
fn guard_output(out: &Path, inputs: &[&Path]) -> Result<()> {
    let canon = |p: &Path| fs::canonicalize(p).unwrap_or_else(|_| p.to_path_buf());
    let target = canon(out);
    for input in inputs {
        ensure!(
            canon(input) != target,
            "output {} would overwrite the input file",
            out.display()
        );
    }
    Ok(())
}

fn write(path: &Path, contents: &str) -> Result<()> {
    fs::write(path, contents).with_context(|| format!("writing {}", path.display()))
}

/// `dir/stem_suffix.csv` next to `out`.
fn sibling(out: &Path, suffix: &str) -> PathBuf {
    let stem = out.file_stem().map_or_else(|| "out".into(), |s| s.to_string_lossy().into_owned());
    out.with_file_name(format!("{stem}_{suffix}.csv"))
}

fn em_config(max_iter: usize, tol: f64, window: Option<usize>) -> Result<EmConfig> {
    ensure!(max_iter > 0, "max-iter must be positive");
    ensure!(tol > 0.0 && tol.is_finite(), "tol must be a positive number");
    Ok(EmConfig { max_iter, tol, window })
}

fn cache_for(dir: &Option<PathBuf>) -> Result<ReferenceCache> {
    Ok(match dir {
        Some(d) => ReferenceCache::with_dir(d)?,
        None => ReferenceCache::in_memory(),
    })
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields, rename_all = "kebab-case")]
pub struct SimulateConfig {
    pub scenario: Option<String>,
    pub model: Option<PathBuf>,
    pub n: usize,
    pub seed: u64,
    pub out: Option<PathBuf>,
    pub model_out: Option<PathBuf>,
}

impl Default for SimulateConfig {
    fn default() -> Self {
        Self {
            scenario: None,
            model: None,
            n: 1000,
            seed: 0,
            out: None,
            model_out: None,
        }
    }
}

pub fn simulate(c: SimulateConfig) -> Result<Vec<String>> {
    let out = required(&c.out, "out")?;
    ensure!(c.n > 0, "n must be positive");
    let (model, sim) = match (&c.scenario, &c.model) {
        (Some(name), None) => simulate_instance(&scenario(name)?, c.n, c.seed)?,
        (None, Some(path)) => {
            guard_output(out, &[path])?;
            let model = read_model(path)?;
            let sim = simulate_model(&model, c.n, &[], derive_seed(c.seed, "simulate", 0))?;
            (model, sim)
        }
        _ => bail!("give exactly one of `--scenario` or `--model`"),
    };
    let config = echo(&c)?;
    write(out, &series_to_csv(&sim.series, Some(&sim.states), Some(&config))?)?;
    if let Some(path) = &c.model_out {
        if let Some(input) = &c.model {
            guard_output(path, &[input])?;
        }
        write(path, &model_to_json(&model, config)?)?;
    }
    Ok(Vec::new())
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields, rename_all = "kebab-case")]
pub struct FitConfig {
    pub input: Option<PathBuf>,
    pub order: Option<usize>,
    pub states: Option<usize>,
    pub seed: u64,
    pub window: Option<usize>,
    pub max_iter: usize,
    pub tol: f64,
    pub out: Option<PathBuf>,
}

impl Default for FitConfig {
    fn default() -> Self {
        let em = EmConfig::default();
        Self {
            input: None,
            order: None,
            states: None,
            seed: 0,
            window: None,
            max_iter: em.max_iter,
            tol: em.tol,
            out: None,
        }
    }
}

#[derive(Serialize)]
struct FitPayload {
    model: SwitchingArModel,
    loglik: f64,
    mspe: f64,
    n_iter: usize,
    converged: bool,
    warnings: Vec<String>,
}

pub fn fit(c: FitConfig) -> Result<Vec<String>> {
    let input = required(&c.input, "input")?;
    let out = required(&c.out, "out")?;
    let order = *required(&c.order, "order")?;
    let states = *required(&c.states, "states")?;
    ensure!(order > 0 && states > 0, "order and states must be positive");
    guard_output(out, &[input])?;
    let em = em_config(c.max_iter, c.tol, c.window)?;
    let x = read_series(input)?.values;
    let window = c.window.unwrap_or_else(|| default_window(order).min(x.len()));
    let inits = init_split(&x, order, states, window, derive_seed(c.seed, "select-init", 0))?;
    let fit = fit_em(&x, &inits[states - 1], &em)?;
    let lines = vec![format!("loglik={}", fit.loglik()), format!("mspe={}", fit.mspe)];
    let payload = FitPayload {
        loglik: fit.loglik(),
        mspe: fit.mspe,
        n_iter: fit.n_iter,
        converged: fit.converged,
        warnings: fit.warnings,
        model: fit.model,
    };
    write(out, &artifact_to_json(&Artifact::new(echo(&c)?, payload))?)?;
    Ok(lines)
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields, rename_all = "kebab-case")]
pub struct SelectCliConfig {
    pub input: Option<PathBuf>,
    pub order: Option<usize>,
    pub max_states: usize,
    pub variant: String,
    pub seed: u64,
    pub window: Option<usize>,
    pub max_iter: usize,
    pub tol: f64,
    pub ref_count: Option<usize>,
    pub ref_iterations: usize,
    pub cache_dir: Option<PathBuf>,
    pub out: Option<PathBuf>,
}

impl Default for SelectCliConfig {
    fn default() -> Self {
        let em = EmConfig::default();
        Self {
            input: None,
            order: None,
            max_states: DEFAULT_MAX_STATES,
            variant: "B".into(),
            seed: 0,
            window: None,
            max_iter: em.max_iter,
            tol: em.tol,
            ref_count: None,
            ref_iterations: DEFAULT_REF_ITERATIONS,
            cache_dir: None,
            out: None,
        }
    }
}

pub fn select(c: SelectCliConfig) -> Result<Vec<String>> {
    let input = required(&c.input, "input")?;
    let out = required(&c.out, "out")?;
    let order = *required(&c.order, "order")?;
    ensure!(order > 0, "order must be positive");
    ensure!(c.max_states > 0, "max-states must be positive");
    ensure!(c.ref_iterations > 0, "ref-iterations must be positive");
    if let Some(f) = c.ref_count {
        ensure!(f >= c.max_states, "ref-count must be at least max-states");
    }
    let (observed_csv, reference_csv) = (sibling(out, "observed"), sibling(out, "reference"));
    for path in [out.as_path(), &observed_csv, &reference_csv] {
        guard_output(path, &[input])?;
    }
    let variant: Variant = c.variant.parse()?;
    let cfg = SelectConfig {
        variant,
        em: em_config(c.max_iter, c.tol, c.window)?,
        window: c.window,
        ref_count: c.ref_count,
        ref_iterations: c.ref_iterations,
        ..SelectConfig::seeded(c.seed)
    };
    let x = read_series(input)?.values;
    let curves: GapCurves = argap::gapselect::select(&x, order, c.max_states, &cfg, &cache_for(&c.cache_dir)?)?;
    for w in &curves.warnings {
        eprintln!("warning: {w}");
    }
    let config = echo(&c)?;
    write(out, &artifact_to_json(&Artifact::new(config.clone(), curves.clone()))?)?;
    write(&observed_csv, &curve_to_csv("log_W_hat", &curves.observed, Some(&config))?)?;
    write(&reference_csv, &curve_to_csv("log_W", &curves.reference, Some(&config))?)?;
    Ok(vec![format!("selected_M={}", curves.selected_m), format!("r_used={}", curves.r_used)])
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields, rename_all = "kebab-case")]
pub struct GenFiltersConfig {
    pub order: Option<usize>,
    pub radius: f64,
    pub count: Option<usize>,
    pub seed: u64,
    pub out: Option<PathBuf>,
}

impl Default for GenFiltersConfig {
    fn default() -> Self {
        Self {
            order: None,
            radius: 1.0,
            count: None,
            seed: 0,
            out: None,
        }
    }
}

pub fn gen_filters(c: GenFiltersConfig) -> Result<Vec<String>> {
    let out = required(&c.out, "out")?;
    let order = *required(&c.order, "order")?;
    let count = *required(&c.count, "count")?;
    ensure!(order > 0 && count > 0, "order and count must be positive");
    ensure!(c.radius > 0.0 && c.radius <= 1.0, "radius must lie in (0, 1]");
    let batch = sample_batch(order, c.radius, count, c.seed)?;
    write(out, &filters_to_csv(&batch.filters, Some(&echo(&c)?))?)?;
    Ok(Vec::new())
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields, rename_all = "kebab-case")]
pub struct DistanceConfig {
    pub a: Option<Vec<f64>>,
    pub b: Option<Vec<f64>>,
    pub filters: Option<PathBuf>,
    pub method: String,
    pub samples: usize,
    pub seed: u64,
    pub out: Option<PathBuf>,
}

impl Default for DistanceConfig {
    fn default() -> Self {
        Self {
            a: None,
            b: None,
            filters: None,
            method: "cov".into(),
            samples: 1_000_000,
            seed: 0,
            out: None,
        }
    }
}

#[derive(Serialize)]
struct DistancePayload {
    distance: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    std_error: Option<f64>,
}

pub fn distance(c: DistanceConfig) -> Result<Vec<String>> {
    let method = c.method.as_str();
    ensure!(
        ["cov", "roots", "resultant", "mc"].contains(&method),
        "unknown method `{method}`, expected cov, roots, resultant or mc"
    );
    if method == "mc" {
        ensure!(c.samples >= 2, "samples must be at least 2");
    }
    let eval = |a: &ArFilter, b: &ArFilter, index: u64| -> Result<DistancePayload> {
        let plain = |d: f64| DistancePayload {
            distance: d,
            std_error: None,
        };
        Ok(match method {
            "cov" => plain(distance_cov(a, b)?),
            "roots" => plain(distance_roots(a, b)?),
            "resultant" => plain(distance_resultant(a, b)?),
            _ => {
                let e = distance_mc(a, b, c.samples, derive_seed(c.seed, "distance-mc", index))?;
                DistancePayload {
                    distance: e.estimate,
                    std_error: Some(e.std_error),
                }
            }
        })
    };
    match (&c.a, &c.b, &c.filters) {
        (Some(a), Some(b), None) => {
            let d = eval(&ArFilter::new(a.clone())?, &ArFilter::new(b.clone())?, 0)?;
            let mut lines = vec![format!("distance={}", d.distance)];
            lines.extend(d.std_error.map(|se| format!("std_error={se}")));
            if let Some(out) = &c.out {
                write(out, &artifact_to_json(&Artifact::new(echo(&c)?, d))?)?;
            }
            Ok(lines)
        }
        (None, None, Some(path)) => {
            let out = required(&c.out, "out")?;
            guard_output(out, &[path])?;
            let filters = read_filters(path)?;
            ensure!(!filters.is_empty(), "filter file has no rows");
            let k = filters.len();
            let rows: Vec<Vec<String>> = (0..k)
                .into_par_iter()
                .map(|u| {
                    let mut row = vec![u.to_string()];
                    for v in 0..k {
                        let d = eval(&filters[u], &filters[v], (u * k + v) as u64)?;
                        row.push(format!("{:?}", d.distance));
                    }
                    Ok(row)
                })
                .collect::<Result<_>>()?;
            let mut header = vec!["generator".to_string()];
            header.extend((0..k).map(|v| v.to_string()));
            write(out, &table_to_csv(&header, &rows, Some(&echo(&c)?))?)?;
            Ok(Vec::new())
        }
        _ => bail!("give either both `--a` and `--b`, or `--filters`"),
    }
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields, rename_all = "kebab-case")]
pub struct BenchmarkCliConfig {
    pub scenario: String,
    pub instances: usize,
    pub n: usize,
    pub max_states: usize,
    pub seed: u64,
    pub methods: String,
    pub ref_count: Option<usize>,
    pub ref_iterations: usize,
    pub max_iter: usize,
    pub tol: f64,
    pub cache_dir: Option<PathBuf>,
    pub out: Option<PathBuf>,
}

impl Default for BenchmarkCliConfig {
    fn default() -> Self {
        let em = EmConfig::default();
        Self {
            scenario: "3".into(),
            instances: 20,
            n: 1000,
            max_states: DEFAULT_MAX_STATES,
            seed: 0,
            methods: "gap-b,gap-u,aic,bic".into(),
            ref_count: None,
            ref_iterations: DEFAULT_REF_ITERATIONS,
            max_iter: em.max_iter,
            tol: em.tol,
            cache_dir: None,
            out: None,
        }
    }
}

#[derive(Serialize)]
struct BenchmarkPayload {
    reports: Vec<BenchmarkReport>,
}

pub fn benchmark(c: BenchmarkCliConfig) -> Result<Vec<String>> {
    let out = required(&c.out, "out")?;
    ensure!(c.instances > 0 && c.n > 0, "instances and n must be positive");
    ensure!(c.max_states > 0, "max-states must be positive");
    ensure!(c.ref_iterations > 0, "ref-iterations must be positive");
    if let Some(f) = c.ref_count {
        ensure!(f >= c.max_states, "ref-count must be at least max-states");
    }
    let names: Vec<&str> = match c.scenario.trim() {
        "all" => vec!["1", "2", "3"],
        list => list.split(',').map(str::trim).collect(),
    };
    let scenarios = names.iter().map(|n| scenario(n)).collect::<argap::Result<Vec<_>>>()?;
    let methods = c
        .methods
        .split(',')
        .map(str::parse)
        .collect::<argap::Result<Vec<Method>>>()?;
    let template = SelectConfig {
        em: em_config(c.max_iter, c.tol, None)?,
        ref_count: c.ref_count,
        ref_iterations: c.ref_iterations,
        ..SelectConfig::seeded(c.seed)
    };
    let cache = cache_for(&c.cache_dir)?;
    let config = echo(&c)?;
    let mut reports = Vec::with_capacity(scenarios.len());
    let mut lines = Vec::new();
    for s in scenarios {
        let report = run_benchmark(
            &BenchmarkConfig {
                scenario: s,
                instances: c.instances,
                n: c.n,
                max_states: c.max_states,
                seed: c.seed,
                methods: methods.clone(),
                select: template.clone(),
            },
            &cache,
        )?;
        for m in &report.methods {
            lines.push(format!(
                "scenario={} method={} correct={}/{} histogram={:?}",
                report.scenario.name,
                m.name(),
                report.correct[m],
                report.instances,
                report.histograms[m]
            ));
        }
        lines.push(format!("scenario={} skipped={}", report.scenario.name, report.skipped));
        let csv_path = sibling(out, &format!("scenario-{}", report.scenario.name));
        write(&csv_path, &report_to_csv(&report, Some(&config))?)?;
        reports.push(report);
    }
    write(out, &artifact_to_json(&Artifact::new(config, BenchmarkPayload { reports }))?)?;
    Ok(lines)
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields, rename_all = "kebab-case")]
pub struct RefcurveConfig {
    pub order: Option<usize>,
    pub radius: f64,
    pub max_states: usize,
    pub count: usize,
    pub iterations: usize,
    pub seed: u64,
    pub cache_dir: Option<PathBuf>,
    pub out: Option<PathBuf>,
}

impl Default for RefcurveConfig {
    fn default() -> Self {
        Self {
            order: None,
            radius: 1.0,
            max_states: DEFAULT_MAX_STATES,
            count: MAX_REF_COUNT,
            iterations: DEFAULT_REF_ITERATIONS,
            seed: 0,
            cache_dir: None,
            out: None,
        }
    }
}

pub fn refcurve(c: RefcurveConfig) -> Result<Vec<String>> {
    let out = required(&c.out, "out")?;
    let order = *required(&c.order, "order")?;
    ensure!(c.iterations > 0, "iterations must be positive");
    // Same reference seed as `select --seed`, so the curves line up.
    let params = ReferenceParams {
        order,
        radius: c.radius,
        max_states: c.max_states,
        count: c.count,
        iterations: c.iterations,
        delta: DEFAULT_DELTA,
        seed: SelectConfig::seeded(c.seed).reference_seed,
    };
    let w = cache_for(&c.cache_dir)?.get_or_compute(&params)?;
    let log_w: Vec<f64> = w.iter().map(|v| v.ln()).collect();
    write(out, &curve_to_csv("log_W", &log_w, Some(&echo(&c)?))?)?;
    Ok(vec![format!("radius_used={}", CurveKey::new(&params).radius())])
}
