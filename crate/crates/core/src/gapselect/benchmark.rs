use std::collections::BTreeMap;

use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{aic_bic, curves_from, fit_all, radius_for, reference_params, SelectConfig, Variant};
use crate::arcore::ArFilter;
use crate::clustering::{CurveKey, ReferenceCache};
use crate::error::{Error, Result};
use crate::formats::table_to_csv;
use crate::sampler::sample_batch;
use crate::seeding::{derive_seed, derived_rng};
use crate::switching::{simulate, FitResult, Simulation, SwitchingArModel};

/// Steps simulated and discarded before each benchmark series.
pub const BURN_IN: usize = 200;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Method {
    GapB,
    GapU,
    Aic,
    Bic,
}

impl Method {
    pub const ALL: [Method; 4] = [Method::GapB, Method::GapU, Method::Aic, Method::Bic];

    pub fn name(self) -> &'static str {
        match self {
            Method::GapB => "gap-b",
            Method::GapU => "gap-u",
            Method::Aic => "aic",
            Method::Bic => "bic",
        }
    }
}

impl std::str::FromStr for Method {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        Method::ALL
            .into_iter()
            .find(|m| m.name().eq_ignore_ascii_case(s.trim()))
            .ok_or_else(|| Error::invalid(format!("unknown method `{s}`, expected gap-b, gap-u, aic or bic")))
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Scenario {
    pub name: String,
    pub order: usize,
    pub states: usize,
    pub radius: f64,
    /// Self-transition probability; the rest is spread evenly.
    pub stay: f64,
    /// State means are uniform on `[-mean_range, mean_range]`.
    pub mean_range: f64,
}

/// Named scenarios: `1`, `2`, `3` and `fig3` (zero means, `L = 4`, `M = 3`).
pub fn scenario(name: &str) -> Result<Scenario> {
    let (order, states, radius, mean_range) = match name {
        "1" => (4, 3, 1.0, 4.0),
        "2" => (1, 4, 0.8, 4.0),
        "3" => (2, 2, 0.6, 4.0),
        "fig3" => (4, 3, 1.0, 0.0),
        other => return Err(Error::invalid(format!("unknown scenario `{other}`, expected 1, 2, 3 or fig3"))),
    };
    Ok(Scenario {
        name: name.to_string(),
        order,
        states,
        radius,
        stay: 0.98,
        mean_range,
    })
}

impl Scenario {
    pub fn validate(&self) -> Result<()> {
        if self.order == 0 || self.states == 0 {
            return Err(Error::invalid("scenario needs a positive order and state count"));
        }
        if !(self.radius > 0.0 && self.radius <= 1.0) {
            return Err(Error::invalid("scenario radius must lie in (0, 1]"));
        }
        if !(0.0..=1.0).contains(&self.stay) || !(self.mean_range >= 0.0 && self.mean_range.is_finite()) {
            return Err(Error::invalid("scenario stay probability or mean range out of range"));
        }
        Ok(())
    }

    /// Ground-truth model for one instance seed.
    pub fn draw_model(&self, seed: u64) -> Result<SwitchingArModel> {
        self.validate()?;
        let batch = sample_batch(self.order, self.radius, self.states, derive_seed(seed, "instance-filters", 0))?;
        let mut rng = derived_rng(seed, "instance-means", 0);
        let filters = batch
            .filters
            .into_iter()
            .map(|f| {
                let mu = if self.mean_range > 0.0 {
                    rng.random_range(-self.mean_range..=self.mean_range)
                } else {
                    0.0
                };
                let psi0 = ArFilter::intercept_for_mean(f.coeffs(), mu);
                ArFilter::with_params(f.coeffs().to_vec(), psi0, 1.0)
            })
            .collect::<Result<Vec<_>>>()?;
        SwitchingArModel::with_sticky_transition(filters, self.stay)
    }
}

/// Ground truth and a length-`n` series (after [`BURN_IN`] discarded steps).
pub fn simulate_instance(s: &Scenario, n: usize, seed: u64) -> Result<(SwitchingArModel, Simulation)> {
    let model = s.draw_model(seed)?;
    let mut sim = simulate(&model, n + BURN_IN, &[], derive_seed(seed, "instance-sim", 0))?;
    sim.series.drain(..BURN_IN);
    sim.states.drain(..BURN_IN);
    Ok((model, sim))
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BenchmarkConfig {
    pub scenario: Scenario,
    pub instances: usize,
    pub n: usize,
    pub max_states: usize,
    pub seed: u64,
    pub methods: Vec<Method>,
    /// Template for the gap selectors; seeds are overridden per instance.
    pub select: SelectConfig,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct InstanceRecord {
    pub index: usize,
    pub seed: u64,
    pub selected: BTreeMap<Method, usize>,
    pub argmax_gap: BTreeMap<Method, usize>,
    pub r_estimated: Option<f64>,
    pub warnings: Vec<String>,
    pub error: Option<String>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BenchmarkReport {
    pub scenario: Scenario,
    pub n: usize,
    pub instances: usize,
    pub max_states: usize,
    pub seed: u64,
    pub methods: Vec<Method>,
    /// Count of instances selecting `M = i + 1` at index `i`.
    pub histograms: BTreeMap<Method, Vec<usize>>,
    pub correct: BTreeMap<Method, usize>,
    pub skipped: usize,
    pub records: Vec<InstanceRecord>,
}

impl BenchmarkReport {
    /// Fraction of all instances (skips count as wrong) choosing the true `M`.
    pub fn accuracy(&self, method: Method) -> f64 {
        if self.instances == 0 {
            return 0.0;
        }
        self.correct.get(&method).copied().unwrap_or(0) as f64 / self.instances as f64
    }
}

struct Prepared {
    fits: Vec<FitResult>,
    r_estimated: f64,
    aic: usize,
    bic: usize,
}

fn prepare(cfg: &BenchmarkConfig, seed: u64) -> Result<Prepared> {
    let (_, sim) = simulate_instance(&cfg.scenario, cfg.n, seed)?;
    let select = SelectConfig {
        seed: derive_seed(seed, "select-init", 0),
        ..cfg.select.clone()
    };
    let fits = fit_all(&sim.series, cfg.scenario.order, cfg.max_states, &select)?;
    let (r_estimated, _) = radius_for(&fits, Variant::Bounded)?;
    let (aic, bic) = aic_bic(&fits, cfg.n)?;
    Ok(Prepared {
        fits,
        r_estimated,
        aic,
        bic,
    })
}

fn variant_of(method: Method) -> Option<Variant> {
    match method {
        Method::GapB => Some(Variant::Bounded),
        Method::GapU => Some(Variant::Unit),
        _ => None,
    }
}

/// Seeded benchmark: every instance draws a model, simulates, fits all `M`
/// once and applies each requested selector to the shared fits. Failing
/// instances are recorded and skipped.
pub fn run_benchmark(cfg: &BenchmarkConfig, cache: &ReferenceCache) -> Result<BenchmarkReport> {
    cfg.scenario.validate()?;
    if cfg.max_states == 0 {
        return Err(Error::invalid("M_max must be at least 1"));
    }
    if cfg.methods.is_empty() {
        return Err(Error::invalid("no selection methods requested"));
    }
    let mut methods = cfg.methods.clone();
    methods.sort_unstable();
    methods.dedup();

    // Fits run in parallel; reference curves are computed afterwards so no
    // task waits on a cache slot while nested inside the pool.
    let seeds: Vec<u64> = (0..cfg.instances).map(|i| derive_seed(cfg.seed, "instance", i as u64)).collect();
    let prepared: Vec<Result<Prepared>> = seeds.par_iter().map(|&s| prepare(cfg, s)).collect();

    let radius_of = |p: &Prepared, v: Variant| match v {
        Variant::Bounded => p.r_estimated,
        Variant::Unit => 1.0,
    };
    let mut keys = BTreeMap::new();
    for p in prepared.iter().flatten() {
        for v in methods.iter().filter_map(|&m| variant_of(m)) {
            let params = reference_params(cfg.n, cfg.scenario.order, cfg.max_states, radius_of(p, v), &cfg.select);
            keys.entry(CurveKey::new(&params).radius_centi).or_insert(params);
        }
    }
    for params in keys.values() {
        cache.get_or_compute(params)?;
    }

    let mut histograms: BTreeMap<Method, Vec<usize>> = methods.iter().map(|&m| (m, vec![0; cfg.max_states])).collect();
    let mut correct: BTreeMap<Method, usize> = methods.iter().map(|&m| (m, 0)).collect();
    let mut records = Vec::with_capacity(cfg.instances);
    let mut skipped = 0;
    for (index, (seed, prep)) in seeds.iter().zip(prepared).enumerate() {
        let mut rec = InstanceRecord {
            index,
            seed: *seed,
            selected: BTreeMap::new(),
            argmax_gap: BTreeMap::new(),
            r_estimated: None,
            warnings: Vec::new(),
            error: None,
        };
        let outcome = prep.and_then(|p| {
            rec.r_estimated = Some(p.r_estimated);
            for &m in &methods {
                let choice = match variant_of(m) {
                    Some(v) => {
                        let r = radius_of(&p, v);
                        let params = reference_params(cfg.n, cfg.scenario.order, cfg.max_states, r, &cfg.select);
                        let w = cache.get_or_compute(&params)?;
                        let curves = curves_from(
                            &p.fits,
                            w.iter().map(|v| v.ln()).collect(),
                            v,
                            p.r_estimated,
                            CurveKey::new(&params).radius(),
                        );
                        rec.argmax_gap.insert(m, curves.argmax_gap);
                        if rec.warnings.is_empty() {
                            rec.warnings = curves.warnings;
                        }
                        curves.selected_m
                    }
                    None if m == Method::Aic => p.aic,
                    None => p.bic,
                };
                rec.selected.insert(m, choice);
            }
            Ok(())
        });
        match outcome {
            Ok(()) => {
                for (&m, &choice) in &rec.selected {
                    histograms.get_mut(&m).expect("requested method")[choice - 1] += 1;
                    if choice == cfg.scenario.states {
                        *correct.get_mut(&m).expect("requested method") += 1;
                    }
                }
            }
            Err(e) => {
                skipped += 1;
                rec.selected.clear();
                rec.error = Some(e.to_string());
            }
        }
        records.push(rec);
    }
    Ok(BenchmarkReport {
        scenario: cfg.scenario.clone(),
        n: cfg.n,
        instances: cfg.instances,
        max_states: cfg.max_states,
        seed: cfg.seed,
        methods,
        histograms,
        correct,
        skipped,
        records,
    })
}

/// Methods by selected-`M` histogram, one row per method.
pub fn report_to_csv(report: &BenchmarkReport, config: Option<&serde_json::Value>) -> Result<String> {
    let mut header = vec!["method".to_string()];
    header.extend((1..=report.max_states).map(|m| format!("M={m}")));
    header.extend(["correct".to_string(), "skipped".to_string()]);
    let rows: Vec<Vec<String>> = report
        .methods
        .iter()
        .map(|m| {
            let mut row = vec![m.name().to_string()];
            row.extend(report.histograms[m].iter().map(usize::to_string));
            row.push(report.correct[m].to_string());
            row.push(report.skipped.to_string());
            row
        })
        .collect();
    table_to_csv(&header, &rows, config)
}
