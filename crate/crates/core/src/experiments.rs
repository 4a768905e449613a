//! Seeded Monte Carlo harnesses: risk scaling of min-max ERM, the partial
//! concept uniform-convergence event, and the flipped-domain lower bound.
//!
//! Trial `t` at sample count `n` is seeded by `derive_seed(master, [n, t])`;
//! rows are always assembled in `(n, t)` order.

use std::collections::BTreeSet;
use std::fs;
use std::path::{Path, PathBuf};

use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

use crate::constructions::{
    adversarial_meta, clean_domain, large_k_family, lower_bound_family, product_family,
    LowerBoundFamily, DEFAULT_PRODUCT_CAP,
};
use crate::dimensions::{
    gdim, induce_partial_class, DimensionQuery, PartialConceptClass, PartialLabel,
};
use crate::error::{Error, Result};
use crate::io;
use crate::learner::{
    estimate_errors, exact_errors, minmax_erm, sample_domain_indices, sample_size_for,
    sample_training_set, ErrorTable,
};
use crate::model::{domain_risk, optimal_tau, HypothesisClass, MetaDistribution};
use crate::rational::{q, Rational};
use crate::sampling::{derive_seed, rng_from_seed, DiscreteSampler, DEFAULT_SEED};

/// Where the class and meta-distribution of a run come from.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case", deny_unknown_fields)]
pub enum Generator {
    /// Class and meta-distribution files.
    Explicit { class: PathBuf, meta: PathBuf },
    /// The large-k family with uniform weights over its domains.
    LargeKUniform { alpha: Rational },
    /// `P_b` over a lower-bound family built on `copies` copies of the large-k
    /// family; `b` is redrawn each trial.
    Adversarial {
        alpha: Rational,
        #[serde(default = "one_copy")]
        copies: usize,
        gamma: GammaSpec,
    },
}

fn one_copy() -> usize {
    1
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case", deny_unknown_fields)]
pub enum GammaSpec {
    Fixed(Rational),
    /// `gamma_n = scale * d / n`.
    PerN {
        scale: Rational,
    },
}

impl GammaSpec {
    fn at(&self, d: usize, n: usize) -> Rational {
        match self {
            GammaSpec::Fixed(g) => g.clone(),
            GammaSpec::PerN { scale } => scale * q(d as i64, n as i64),
        }
    }
}

/// How the learner sees each sampled domain.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case", deny_unknown_fields)]
pub enum Estimate {
    /// True errors of the sampled domains.
    Exact,
    /// `m` labeled points per sampled domain.
    Samples { m: usize },
    /// Enough points per domain for `epsilon`-accurate tables w.p. `1 - delta`.
    Accuracy { epsilon: Rational, delta: Rational },
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ScalingConfig {
    pub generator: Generator,
    pub n_grid: Vec<usize>,
    pub estimate: Estimate,
    pub tau: Rational,
    pub alpha: Rational,
    pub trials: usize,
    /// Confidence used in the reported rate constant.
    pub delta: Rational,
    pub seed: u64,
}

impl Default for ScalingConfig {
    fn default() -> Self {
        ScalingConfig {
            generator: Generator::Adversarial {
                alpha: q(1, 100),
                copies: 1,
                gamma: GammaSpec::PerN { scale: q(1, 8) },
            },
            n_grid: vec![8, 16, 32, 64, 128, 256],
            estimate: Estimate::Exact,
            tau: q(3, 10),
            alpha: q(1, 100),
            trials: 200,
            delta: q(1, 10),
            seed: DEFAULT_SEED,
        }
    }
}

/// Source of the partial class for the uniform-convergence check.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case", deny_unknown_fields)]
pub enum ConceptSource {
    Explicit { class: PathBuf, meta: PathBuf },
    LargeKUniform { alpha: Rational },
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct UniformConvergenceConfig {
    pub source: ConceptSource,
    pub tau: Rational,
    pub alpha: Rational,
    pub n_grid: Vec<usize>,
    pub trials: usize,
    pub delta: Rational,
    pub c_grid: Vec<Rational>,
    /// Dimension used in `gamma(n)`; the class's own dimension when absent.
    pub dimension: Option<usize>,
    pub seed: u64,
}

impl Default for UniformConvergenceConfig {
    fn default() -> Self {
        UniformConvergenceConfig {
            source: ConceptSource::LargeKUniform { alpha: q(1, 100) },
            tau: q(3, 10),
            alpha: q(1, 100),
            n_grid: vec![16, 32, 64, 128, 256],
            trials: 200,
            delta: q(1, 10),
            c_grid: [1, 2, 4, 8]
                .into_iter()
                .map(Rational::from_integer)
                .collect(),
            dimension: None,
            seed: DEFAULT_SEED,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct LowerBoundConfig {
    /// Large-k parameter of the base construction.
    pub base_alpha: Rational,
    pub copies: usize,
    pub tau: Rational,
    pub alpha: Rational,
    pub gamma: Rational,
    pub n_grid: Vec<usize>,
    pub trials: usize,
    /// Defaults to `lambda/(1+lambda) - 1/1000`.
    pub tau_prime: Option<Rational>,
    pub seed: u64,
}

impl Default for LowerBoundConfig {
    fn default() -> Self {
        LowerBoundConfig {
            base_alpha: q(1, 100),
            copies: 2,
            tau: q(3, 10),
            alpha: q(1, 100),
            gamma: q(1, 50),
            n_grid: vec![25],
            trials: 200,
            tau_prime: None,
            seed: DEFAULT_SEED,
        }
    }
}

/// Execution knobs that never change report contents.
#[derive(Clone, Copy, Debug, Default)]
pub struct RunOptions {
    pub threads: Option<usize>,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ReportRow {
    pub experiment: String,
    pub n: usize,
    pub trial: usize,
    pub seed: u64,
    pub hypothesis_index: Option<usize>,
    pub er_exact: Rational,
    pub er_float: f64,
    pub max_train_err: Option<Rational>,
    pub extra: Value,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ScalingPoint {
    pub n: usize,
    pub trials: usize,
    pub median_er: Rational,
    pub mean_er: f64,
    pub zero_fraction: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ScalingAggregates {
    pub dimension: usize,
    pub per_n: Vec<ScalingPoint>,
    /// Additive floor inside the log of the slope fit.
    pub floor: f64,
    /// Least-squares slope of `ln(median + floor)` on `ln n` over grid points
    /// with a nonzero median.
    pub slope: Option<f64>,
    pub slope_all: Option<f64>,
    /// Grid steps where the median increases.
    pub inversions: usize,
    /// `max_n median * n / (d ln^2 n + ln(1/delta))` over nonzero medians.
    pub rate_constant: Option<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct UcCell {
    pub n: usize,
    pub gamma: f64,
    pub violations: usize,
    pub trials: usize,
    pub frequency: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct UcCurve {
    pub c: Rational,
    pub cells: Vec<UcCell>,
    pub within_delta: bool,
    pub non_increasing: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct UcAggregates {
    pub dimension: usize,
    pub delta: Rational,
    pub curves: Vec<UcCurve>,
    /// Smallest `C` whose frequencies stay within `delta` and never increase.
    pub calibrated_c: Option<Rational>,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct LbPoint {
    pub n: usize,
    pub trials: usize,
    pub exceed_count: usize,
    pub exceed_frequency: f64,
    pub unseen_total: usize,
    pub failed_unseen_total: usize,
    /// Failed unseen indices over all unseen indices; `None` if nothing was unseen.
    pub failure_rate: Option<f64>,
    pub mean_unseen: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct LbAggregates {
    pub d: usize,
    pub lambda: Rational,
    pub pair_floor: Rational,
    pub tau_prime: Rational,
    pub gamma: Rational,
    pub per_n: Vec<LbPoint>,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
#[serde(untagged)]
pub enum Aggregates {
    Scaling(ScalingAggregates),
    UniformConvergence(UcAggregates),
    LowerBound(LbAggregates),
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ExperimentReport {
    pub experiment: String,
    pub config: Value,
    pub rows: Vec<ReportRow>,
    pub aggregates: Aggregates,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Series {
    pub name: String,
    pub points: Vec<[f64; 2]>,
}

fn check_grid(grid: &[usize], trials: usize) -> Result<()> {
    if grid.is_empty() || grid[0] == 0 || grid.windows(2).any(|w| w[0] >= w[1]) {
        return Err(Error::Config(format!(
            "n grid must be non-empty, positive and strictly increasing, got {grid:?}"
        )));
    }
    if trials == 0 {
        return Err(Error::Config("trials must be at least 1".into()));
    }
    Ok(())
}

fn pool(opts: &RunOptions) -> Result<rayon::ThreadPool> {
    let mut b = rayon::ThreadPoolBuilder::new();
    if let Some(t) = opts.threads {
        b = b.num_threads(t.max(1));
    }
    b.build()
        .map_err(|e| Error::Config(format!("thread pool: {e}")))
}

/// Runs `f(n, trial, seed)` over the grid in canonical order.
fn run_trials<T: Send>(
    grid: &[usize],
    trials: usize,
    master: u64,
    opts: &RunOptions,
    f: impl Fn(usize, usize, u64) -> Result<T> + Sync,
) -> Result<Vec<T>> {
    let cells: Vec<(usize, usize)> = grid
        .iter()
        .flat_map(|&n| (0..trials).map(move |t| (n, t)))
        .collect();
    pool(opts)?.install(|| {
        cells
            .into_par_iter()
            .map(|(n, t)| f(n, t, derive_seed(master, &[n as u64, t as u64])))
            .collect()
    })
}

pub fn median(values: &[Rational]) -> Option<Rational> {
    if values.is_empty() {
        return None;
    }
    let mut v = values.to_vec();
    v.sort();
    let mid = v.len() / 2;
    Some(if v.len() % 2 == 1 {
        v[mid].clone()
    } else {
        (&v[mid - 1] + &v[mid]) / Rational::from_integer(2)
    })
}

/// Least-squares slope; `None` with fewer than two distinct `x`.
pub fn fit_slope(points: &[(f64, f64)]) -> Option<f64> {
    let n = points.len() as f64;
    if points.len() < 2 {
        return None;
    }
    let mx = points.iter().map(|p| p.0).sum::<f64>() / n;
    let my = points.iter().map(|p| p.1).sum::<f64>() / n;
    let sxx: f64 = points.iter().map(|p| (p.0 - mx).powi(2)).sum();
    if sxx == 0.0 {
        return None;
    }
    let sxy: f64 = points.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    Some(sxy / sxx)
}

fn load_explicit(class: &Path, meta: &Path) -> Result<(HypothesisClass, MetaDistribution)> {
    Ok((io::load_class(class)?, io::load_meta(meta)?))
}

enum ScalingSetup {
    Fixed {
        class: HypothesisClass,
        meta: MetaDistribution,
    },
    Adversarial {
        class: HypothesisClass,
        lbf: Box<LowerBoundFamily>,
        gamma: GammaSpec,
    },
}

impl ScalingSetup {
    fn class(&self) -> &HypothesisClass {
        match self {
            ScalingSetup::Fixed { class, .. } | ScalingSetup::Adversarial { class, .. } => class,
        }
    }
}

fn adversarial_family(
    base_alpha: &Rational,
    copies: usize,
    tau: &Rational,
    alpha: &Rational,
) -> Result<(HypothesisClass, LowerBoundFamily)> {
    let base = large_k_family(base_alpha)?;
    let prod = product_family(&base, copies, DEFAULT_PRODUCT_CAP)?;
    let d0 = clean_domain(&prod.class)?;
    let lbf = lower_bound_family(
        &prod.class,
        &prod.family,
        &d0,
        &prod.certificate,
        tau,
        alpha,
    )?;
    Ok((prod.class, lbf))
}

fn check_margin(p: &MetaDistribution, hc: &HypothesisClass, limit: &Rational) -> Result<()> {
    let (tau_star, _) = optimal_tau(p, hc)?;
    if &tau_star > limit {
        return Err(Error::Config(format!(
            "realized tau* = {tau_star} exceeds tau - alpha - 2 epsilon = {limit}"
        )));
    }
    Ok(())
}

fn epsilon_of(e: &Estimate) -> Rational {
    match e {
        Estimate::Accuracy { epsilon, .. } => epsilon.clone(),
        _ => Rational::zero(),
    }
}

/// Draws `n` domains from `p`, builds the learner's table, returns the table
/// and the sampled family indices.
fn training_table(
    hc: &HypothesisClass,
    p: &MetaDistribution,
    n: usize,
    estimate: &Estimate,
    seed: u64,
) -> Result<(ErrorTable, Vec<usize>)> {
    let m = match estimate {
        Estimate::Exact => {
            let idx = sample_domain_indices(p, n, seed);
            return Ok((exact_errors(hc, p.family(), &idx)?, idx));
        }
        Estimate::Samples { m } => *m,
        Estimate::Accuracy { epsilon, delta } => sample_size_for(epsilon, delta, n, hc.len())?,
    };
    let t = sample_training_set(p, n, m, seed)?;
    Ok((estimate_errors(hc, &t)?, t.domain_indices))
}

fn random_bits(seed: u64, d: usize) -> Vec<bool> {
    let mut rng = rng_from_seed(seed);
    (0..d).map(|_| rng.random_bool(0.5)).collect()
}

fn bit_string(b: &[bool]) -> String {
    b.iter().map(|&x| if x { '1' } else { '0' }).collect()
}

pub fn run_scaling(cfg: &ScalingConfig, opts: &RunOptions) -> Result<ExperimentReport> {
    check_grid(&cfg.n_grid, cfg.trials)?;
    let query = DimensionQuery::new(cfg.tau.clone(), cfg.alpha.clone())?;
    if let Estimate::Samples { m: 0 } = cfg.estimate {
        return Err(Error::Config("m must be at least 1".into()));
    }
    let limit = query.low_threshold() - Rational::from_integer(2) * epsilon_of(&cfg.estimate);
    let (setup, dimension) = match &cfg.generator {
        Generator::Explicit { class, meta } => {
            let (class, meta) = load_explicit(class, meta)?;
            let dim = gdim(&class, meta.family(), &query)?.dimension;
            (ScalingSetup::Fixed { class, meta }, dim)
        }
        Generator::LargeKUniform { alpha } => {
            let fam = large_k_family(alpha)?;
            let class = fam.class();
            let meta = MetaDistribution::uniform(fam.family.clone())?;
            let dim = gdim(&class, &fam.family, &query)?.dimension;
            (ScalingSetup::Fixed { class, meta }, dim)
        }
        Generator::Adversarial {
            alpha,
            copies,
            gamma,
        } => {
            let (class, lbf) = adversarial_family(alpha, *copies, &cfg.tau, &cfg.alpha)?;
            let d = lbf.d();
            for &n in &cfg.n_grid {
                let g = gamma.at(d, n);
                if !g.is_positive() || g >= q(1, 8) {
                    return Err(Error::Config(format!(
                        "gamma = {g} at n = {n} outside (0, 1/8)"
                    )));
                }
            }
            (
                ScalingSetup::Adversarial {
                    class,
                    lbf: Box::new(lbf),
                    gamma: gamma.clone(),
                },
                d,
            )
        }
    };
    if let ScalingSetup::Fixed { class, meta } = &setup {
        check_margin(meta, class, &limit)?;
    }

    let rows = run_trials(&cfg.n_grid, cfg.trials, cfg.seed, opts, |n, trial, seed| {
        let hc = setup.class();
        let (meta, mut extra) = match &setup {
            ScalingSetup::Fixed { meta, .. } => (meta.clone(), json!({})),
            ScalingSetup::Adversarial { lbf, gamma, .. } => {
                let b = random_bits(derive_seed(seed, &[0]), lbf.d());
                let g = gamma.at(lbf.d(), n);
                let p = adversarial_meta(lbf, &b, &g)?;
                check_margin(&p, hc, &limit)?;
                (p, json!({ "b": bit_string(&b), "gamma": g.to_string() }))
            }
        };
        let (table, idx) = training_table(hc, &meta, n, &cfg.estimate, derive_seed(seed, &[1]))?;
        let h = minmax_erm(&table)?;
        let er = domain_risk(&meta, &cfg.tau, &hc.members()[h])?;
        let seen: BTreeSet<usize> = idx.iter().copied().collect();
        extra["seen"] = json!(seen.len());
        Ok(ReportRow {
            experiment: "scaling".into(),
            n,
            trial,
            seed,
            hypothesis_index: Some(h),
            er_float: er.to_f64(),
            er_exact: er,
            max_train_err: table.row_max(h).cloned(),
            extra,
        })
    })?;
    let aggregates = scaling_aggregates(&rows, &cfg.n_grid, dimension, &cfg.delta);
    Ok(ExperimentReport {
        experiment: "scaling".into(),
        config: serde_json::to_value(cfg)?,
        rows,
        aggregates: Aggregates::Scaling(aggregates),
    })
}

/// Aggregates of a scaling run, recomputed from its rows.
pub fn scaling_aggregates(
    rows: &[ReportRow],
    grid: &[usize],
    dimension: usize,
    delta: &Rational,
) -> ScalingAggregates {
    let n_max = grid.iter().copied().max().unwrap_or(1);
    let floor = 1.0 / (10.0 * n_max as f64);
    let per_n: Vec<ScalingPoint> = grid
        .iter()
        .map(|&n| {
            let ers: Vec<Rational> = rows
                .iter()
                .filter(|r| r.n == n)
                .map(|r| r.er_exact.clone())
                .collect();
            let trials = ers.len();
            let denom = trials.max(1) as f64;
            ScalingPoint {
                n,
                trials,
                median_er: median(&ers).unwrap_or_default(),
                mean_er: ers.iter().map(Rational::to_f64).sum::<f64>() / denom,
                zero_fraction: ers.iter().filter(|e| e.is_zero()).count() as f64 / denom,
            }
        })
        .collect();
    let log_point = |p: &ScalingPoint| ((p.n as f64).ln(), (p.median_er.to_f64() + floor).ln());
    let nonzero: Vec<(f64, f64)> = per_n
        .iter()
        .filter(|p| p.median_er.is_positive())
        .map(log_point)
        .collect();
    let all: Vec<(f64, f64)> = per_n.iter().map(log_point).collect();
    let inversions = per_n
        .windows(2)
        .filter(|w| w[1].median_er > w[0].median_er)
        .count();
    let log_inv_delta = delta.recip().to_f64().ln();
    let rate_constant = per_n
        .iter()
        .filter(|p| p.median_er.is_positive())
        .map(|p| {
            let ln = (p.n as f64).ln();
            p.median_er.to_f64() * p.n as f64 / (dimension as f64 * ln * ln + log_inv_delta)
        })
        .fold(None, |acc: Option<f64>, c| {
            Some(acc.map_or(c, |a| a.max(c)))
        });
    ScalingAggregates {
        dimension,
        per_n,
        floor,
        slope: fit_slope(&nonzero),
        slope_all: fit_slope(&all),
        inversions,
        rate_constant,
    }
}

/// `C (d ln^2 n + ln(1/delta)) / n`.
pub fn uc_gamma(c: &Rational, d: usize, n: usize, delta: &Rational) -> f64 {
    let ln = (n as f64).ln();
    c.to_f64() * (d as f64 * ln * ln + delta.recip().to_f64().ln()) / n as f64
}

/// Largest exact `1`-mass among concepts that are `0` on every sampled point,
/// with the lowest index attaining it.
fn worst_consistent(
    f: &PartialConceptClass,
    weights: &[Rational],
    seen: &BTreeSet<usize>,
) -> Option<(usize, Rational)> {
    let mut best: Option<(usize, Rational)> = None;
    for (c, row) in f.concepts().iter().enumerate() {
        if seen.iter().any(|&p| row[p] != PartialLabel::Zero) {
            continue;
        }
        let mass: Rational = row
            .iter()
            .zip(weights)
            .filter(|(v, _)| **v == PartialLabel::One)
            .map(|(_, w)| w)
            .sum();
        if best.as_ref().is_none_or(|(_, b)| &mass > b) {
            best = Some((c, mass));
        }
    }
    best
}

pub fn run_uniform_convergence(
    cfg: &UniformConvergenceConfig,
    opts: &RunOptions,
) -> Result<ExperimentReport> {
    check_grid(&cfg.n_grid, cfg.trials)?;
    if !cfg.delta.is_positive() || cfg.delta >= Rational::one() {
        return Err(Error::Config(format!(
            "delta = {} outside (0, 1)",
            cfg.delta
        )));
    }
    if cfg.c_grid.is_empty() || cfg.c_grid.iter().any(|c| !c.is_positive()) {
        return Err(Error::Config(
            "c grid must be non-empty and positive".into(),
        ));
    }
    let query = DimensionQuery::new(cfg.tau.clone(), cfg.alpha.clone())?;
    let (class, meta) = match &cfg.source {
        ConceptSource::Explicit { class, meta } => load_explicit(class, meta)?,
        ConceptSource::LargeKUniform { alpha } => {
            let fam = large_k_family(alpha)?;
            (fam.class(), MetaDistribution::uniform(fam.family)?)
        }
    };
    let f = induce_partial_class(&class, meta.family(), &query)?;
    let dimension = match cfg.dimension {
        Some(d) => d,
        None => gdim(&class, meta.family(), &query)?.dimension,
    };
    let sampler = DiscreteSampler::new(meta.weights());
    let weights = meta.weights();

    let rows = run_trials(&cfg.n_grid, cfg.trials, cfg.seed, opts, |n, trial, seed| {
        let mut rng = rng_from_seed(seed);
        let seen: BTreeSet<usize> = (0..n).map(|_| sampler.sample(&mut rng)).collect();
        let worst = worst_consistent(&f, weights, &seen);
        let (index, mass) = match worst {
            Some((c, m)) => (Some(c), m),
            None => (None, Rational::zero()),
        };
        Ok(ReportRow {
            experiment: "uniform-convergence".into(),
            n,
            trial,
            seed,
            hypothesis_index: index,
            er_float: mass.to_f64(),
            er_exact: mass,
            max_train_err: None,
            extra: json!({ "distinct_points": seen.len() }),
        })
    })?;
    let aggregates = uc_aggregates(&rows, &cfg.n_grid, &cfg.c_grid, dimension, &cfg.delta);
    Ok(ExperimentReport {
        experiment: "uniform-convergence".into(),
        config: serde_json::to_value(cfg)?,
        rows,
        aggregates: Aggregates::UniformConvergence(aggregates),
    })
}

/// A trial violates at `gamma` when its worst consistent mass exceeds `gamma`.
pub fn uc_aggregates(
    rows: &[ReportRow],
    grid: &[usize],
    c_grid: &[Rational],
    dimension: usize,
    delta: &Rational,
) -> UcAggregates {
    let curves: Vec<UcCurve> = c_grid
        .iter()
        .map(|c| {
            let cells: Vec<UcCell> = grid
                .iter()
                .map(|&n| {
                    let gamma = uc_gamma(c, dimension, n, delta);
                    let at_n: Vec<&ReportRow> = rows.iter().filter(|r| r.n == n).collect();
                    let violations = at_n.iter().filter(|r| r.er_float > gamma).count();
                    UcCell {
                        n,
                        gamma,
                        violations,
                        trials: at_n.len(),
                        frequency: violations as f64 / at_n.len().max(1) as f64,
                    }
                })
                .collect();
            let d = delta.to_f64();
            UcCurve {
                c: c.clone(),
                within_delta: cells.iter().all(|x| x.frequency <= d),
                non_increasing: cells.windows(2).all(|w| w[1].frequency <= w[0].frequency),
                cells,
            }
        })
        .collect();
    let calibrated_c = curves
        .iter()
        .filter(|c| c.within_delta && c.non_increasing)
        .map(|c| c.c.clone())
        .min();
    UcAggregates {
        dimension,
        delta: delta.clone(),
        curves,
        calibrated_c,
    }
}

pub fn run_lower_bound(cfg: &LowerBoundConfig, opts: &RunOptions) -> Result<ExperimentReport> {
    check_grid(&cfg.n_grid, cfg.trials)?;
    if !cfg.gamma.is_positive() || cfg.gamma >= q(1, 8) {
        return Err(Error::precondition(format!(
            "lower-bound run needs 0 < gamma < 1/8, got {}",
            cfg.gamma
        )));
    }
    let (class, lbf) = adversarial_family(&cfg.base_alpha, cfg.copies, &cfg.tau, &cfg.alpha)?;
    let tau_prime = cfg
        .tau_prime
        .clone()
        .unwrap_or_else(|| lbf.default_tau_prime());
    if tau_prime.is_negative() || tau_prime >= Rational::one() {
        return Err(Error::Config(format!("tau' = {tau_prime} outside [0, 1)")));
    }
    let d = lbf.d();

    let rows = run_trials(&cfg.n_grid, cfg.trials, cfg.seed, opts, |n, trial, seed| {
        let b = random_bits(derive_seed(seed, &[0]), d);
        let p = adversarial_meta(&lbf, &b, &cfg.gamma)?;
        let idx = sample_domain_indices(&p, n, derive_seed(seed, &[1]));
        let table = exact_errors(&class, p.family(), &idx)?;
        let h = minmax_erm(&table)?;
        let hyp = &class.members()[h];
        let er = domain_risk(&p, &tau_prime, hyp)?;
        let seen: BTreeSet<usize> = idx.iter().copied().collect();
        // family index 0 is D_0; index i + 1 is the i-th shattered domain or its flip
        let unseen: Vec<usize> = (0..d).filter(|i| !seen.contains(&(i + 1))).collect();
        let failed = unseen
            .iter()
            .filter(|&&i| p.family().domains()[i + 1].error_unchecked(hyp) > tau_prime)
            .count();
        Ok(ReportRow {
            experiment: "lower-bound".into(),
            n,
            trial,
            seed,
            hypothesis_index: Some(h),
            er_float: er.to_f64(),
            er_exact: er,
            max_train_err: table.row_max(h).cloned(),
            extra: json!({
                "b": bit_string(&b),
                "unseen": unseen.len(),
                "failed_unseen": failed,
            }),
        })
    })?;
    let aggregates = LbAggregates {
        d,
        lambda: lbf.lambda.clone(),
        pair_floor: lbf.pair_floor(),
        per_n: lb_points(&rows, &cfg.n_grid, &cfg.gamma),
        tau_prime,
        gamma: cfg.gamma.clone(),
    };
    Ok(ExperimentReport {
        experiment: "lower-bound".into(),
        config: serde_json::to_value(cfg)?,
        rows,
        aggregates: Aggregates::LowerBound(aggregates),
    })
}

pub fn lb_points(rows: &[ReportRow], grid: &[usize], gamma: &Rational) -> Vec<LbPoint> {
    let count = |r: &ReportRow, key: &str| r.extra[key].as_u64().unwrap_or(0) as usize;
    grid.iter()
        .map(|&n| {
            let at_n: Vec<&ReportRow> = rows.iter().filter(|r| r.n == n).collect();
            let trials = at_n.len();
            let exceed_count = at_n.iter().filter(|r| &r.er_exact > gamma).count();
            let unseen_total: usize = at_n.iter().map(|r| count(r, "unseen")).sum();
            let failed_unseen_total: usize = at_n.iter().map(|r| count(r, "failed_unseen")).sum();
            LbPoint {
                n,
                trials,
                exceed_count,
                exceed_frequency: exceed_count as f64 / trials.max(1) as f64,
                unseen_total,
                failed_unseen_total,
                failure_rate: (unseen_total > 0)
                    .then(|| failed_unseen_total as f64 / unseen_total as f64),
                mean_unseen: unseen_total as f64 / trials.max(1) as f64,
            }
        })
        .collect()
}

impl ExperimentReport {
    /// Plot-ready `(x, y)` series.
    pub fn series(&self) -> Vec<Series> {
        let s = |name: &str, points: Vec<[f64; 2]>| Series {
            name: name.into(),
            points,
        };
        match &self.aggregates {
            Aggregates::Scaling(a) => vec![
                s(
                    "median_er",
                    a.per_n
                        .iter()
                        .map(|p| [p.n as f64, p.median_er.to_f64()])
                        .collect(),
                ),
                s(
                    "mean_er",
                    a.per_n.iter().map(|p| [p.n as f64, p.mean_er]).collect(),
                ),
            ],
            Aggregates::UniformConvergence(a) => a
                .curves
                .iter()
                .map(|c| {
                    s(
                        &format!(
                            "violation_frequency_c{}",
                            c.c.to_string().replace("/1", "").replace('/', "_")
                        ),
                        c.cells.iter().map(|x| [x.n as f64, x.frequency]).collect(),
                    )
                })
                .collect(),
            Aggregates::LowerBound(a) => vec![
                s(
                    "exceed_frequency",
                    a.per_n
                        .iter()
                        .map(|p| [p.n as f64, p.exceed_frequency])
                        .collect(),
                ),
                s(
                    "unseen_failure_rate",
                    a.per_n
                        .iter()
                        .map(|p| [p.n as f64, p.failure_rate.unwrap_or(f64::NAN)])
                        .collect(),
                ),
            ],
        }
    }
}

fn round_to(x: f64, precision: usize) -> f64 {
    let scale = 10f64.powi(precision.min(15) as i32);
    (x * scale).round() / scale
}

fn round_value(v: &mut Value, precision: usize) {
    match v {
        Value::Number(num) if num.is_f64() => {
            if let Some(r) = num.as_f64().map(|x| round_to(x, precision)) {
                if let Some(n) = serde_json::Number::from_f64(r) {
                    *num = n;
                }
            }
        }
        Value::Array(items) => items.iter_mut().for_each(|x| round_value(x, precision)),
        Value::Object(map) => map.values_mut().for_each(|x| round_value(x, precision)),
        _ => {}
    }
}

pub fn report_csv(report: &ExperimentReport, precision: usize) -> Result<String> {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record([
        "experiment",
        "n",
        "trial",
        "seed",
        "hypothesis_index",
        "er_exact",
        "er_float",
        "max_train_err",
        "extra",
    ])?;
    for r in &report.rows {
        w.write_record([
            r.experiment.clone(),
            r.n.to_string(),
            r.trial.to_string(),
            r.seed.to_string(),
            r.hypothesis_index.map_or(String::new(), |h| h.to_string()),
            r.er_exact.to_string(),
            format!("{:.*}", precision, r.er_float),
            r.max_train_err
                .as_ref()
                .map_or(String::new(), ToString::to_string),
            serde_json::to_string(&r.extra)?,
        ])?;
    }
    let bytes = w
        .into_inner()
        .map_err(|e| Error::Io(std::io::Error::other(e.to_string())))?;
    String::from_utf8(bytes).map_err(|e| Error::Io(std::io::Error::other(e.to_string())))
}

pub fn report_json(report: &ExperimentReport, precision: usize) -> Result<String> {
    let mut v = serde_json::to_value(report)?;
    round_value(&mut v, precision);
    io::to_json(&v)
}

pub fn series_json(report: &ExperimentReport, precision: usize) -> Result<String> {
    let mut v = serde_json::to_value(report.series())?;
    round_value(&mut v, precision);
    io::to_json(&v)
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ReportPaths {
    pub csv: PathBuf,
    pub json: PathBuf,
    pub series: PathBuf,
}

/// Writes `<experiment>.csv`, `<experiment>.json` and `<experiment>-series.json`.
pub fn write_report(
    report: &ExperimentReport,
    dir: &Path,
    precision: usize,
) -> Result<ReportPaths> {
    fs::create_dir_all(dir)?;
    let paths = ReportPaths {
        csv: dir.join(format!("{}.csv", report.experiment)),
        json: dir.join(format!("{}.json", report.experiment)),
        series: dir.join(format!("{}-series.json", report.experiment)),
    };
    let csv = report_csv(report, precision)?;
    let json = report_json(report, precision)?;
    let series = series_json(report, precision)?;
    io::write_atomic(&paths.csv, csv.as_bytes())?;
    io::write_atomic(&paths.json, json.as_bytes())?;
    io::write_atomic(&paths.series, series.as_bytes())?;
    Ok(paths)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::io::{class_to_json, meta_to_json};
    use crate::model::{DomainFamily, Hypothesis, InstanceSpace, LabeledDistribution};

    fn small_scaling() -> ScalingConfig {
        ScalingConfig {
            n_grid: vec![8, 16],
            trials: 5,
            ..ScalingConfig::default()
        }
    }

    #[test]
    fn median_of_even_count_averages() {
        assert_eq!(median(&[q(1, 2), q(0, 1), q(1, 4), q(1, 1)]), Some(q(3, 8)));
        assert_eq!(median(&[]), None);
    }

    #[test]
    fn slope_of_exact_power_law() {
        let pts: Vec<(f64, f64)> = [1.0f64, 2.0, 4.0, 8.0]
            .iter()
            .map(|&x: &f64| (x.ln(), (3.0 / x).ln()))
            .collect();
        assert!((fit_slope(&pts).unwrap() + 1.0).abs() < 1e-12);
        assert_eq!(fit_slope(&pts[..1]), None);
    }

    #[test]
    fn grid_validation() {
        let cfg = ScalingConfig {
            n_grid: vec![16, 8],
            ..small_scaling()
        };
        assert!(matches!(
            run_scaling(&cfg, &RunOptions::default()),
            Err(Error::Config(_))
        ));
        let cfg = ScalingConfig {
            trials: 0,
            ..small_scaling()
        };
        assert!(run_scaling(&cfg, &RunOptions::default()).is_err());
    }

    #[test]
    fn point_mass_with_perfect_hypothesis_has_zero_risk() {
        let dir = tempfile::tempdir().unwrap();
        let s = InstanceSpace::new(2).unwrap();
        let hc = HypothesisClass::new(
            s,
            vec![
                Hypothesis::new(vec![true, true]),
                Hypothesis::new(vec![false, true]),
            ],
        )
        .unwrap();
        let d =
            LabeledDistribution::from_merged(s, [(0, false, q(1, 2)), (1, true, q(1, 2))]).unwrap();
        let p = MetaDistribution::point_mass(DomainFamily::new(s, vec![d]).unwrap(), 0).unwrap();
        let class = dir.path().join("h.json");
        let meta = dir.path().join("p.json");
        io::write_atomic(&class, class_to_json(&hc).unwrap().as_bytes()).unwrap();
        io::write_atomic(&meta, meta_to_json(&p).unwrap().as_bytes()).unwrap();
        let cfg = ScalingConfig {
            generator: Generator::Explicit { class, meta },
            ..small_scaling()
        };
        let r = run_scaling(&cfg, &RunOptions::default()).unwrap();
        assert_eq!(r.rows.len(), 10);
        assert!(r
            .rows
            .iter()
            .all(|row| row.er_exact.is_zero() && row.hypothesis_index == Some(1)));
    }

    #[test]
    fn margin_violation_reports_tau_star() {
        let dir = tempfile::tempdir().unwrap();
        let s = InstanceSpace::new(1).unwrap();
        let hc = HypothesisClass::new(s, vec![Hypothesis::new(vec![true])]).unwrap();
        let d = LabeledDistribution::point(s, 0, false).unwrap();
        let p = MetaDistribution::point_mass(DomainFamily::new(s, vec![d]).unwrap(), 0).unwrap();
        let class = dir.path().join("h.json");
        let meta = dir.path().join("p.json");
        io::write_atomic(&class, class_to_json(&hc).unwrap().as_bytes()).unwrap();
        io::write_atomic(&meta, meta_to_json(&p).unwrap().as_bytes()).unwrap();
        let cfg = ScalingConfig {
            generator: Generator::Explicit { class, meta },
            ..small_scaling()
        };
        let err = run_scaling(&cfg, &RunOptions::default()).unwrap_err();
        assert!(err.to_string().contains("tau* = 1/1"), "{err}");
    }

    #[test]
    fn thread_count_does_not_change_rows() {
        let cfg = small_scaling();
        let a = run_scaling(&cfg, &RunOptions { threads: Some(1) }).unwrap();
        let b = run_scaling(&cfg, &RunOptions { threads: Some(4) }).unwrap();
        assert_eq!(report_csv(&a, 6).unwrap(), report_csv(&b, 6).unwrap());
        assert_eq!(report_json(&a, 6).unwrap(), report_json(&b, 6).unwrap());
    }

    #[test]
    fn scaling_aggregates_recompute_from_rows() {
        let cfg = small_scaling();
        let r = run_scaling(&cfg, &RunOptions::default()).unwrap();
        let Aggregates::Scaling(a) = &r.aggregates else {
            panic!()
        };
        assert_eq!(a, &scaling_aggregates(&r.rows, &cfg.n_grid, 4, &cfg.delta));
    }

    #[test]
    fn gamma_one_never_violates() {
        let cfg = UniformConvergenceConfig {
            n_grid: vec![1, 2, 4],
            trials: 20,
            ..UniformConvergenceConfig::default()
        };
        let r = run_uniform_convergence(&cfg, &RunOptions::default()).unwrap();
        assert!(r.rows.iter().all(|row| row.er_exact <= 1));
        let big = uc_aggregates(
            &r.rows,
            &cfg.n_grid,
            &[Rational::from_integer(1000)],
            4,
            &cfg.delta,
        );
        assert!(big.curves[0].cells.iter().all(|c| c.violations == 0));
    }

    #[test]
    fn single_zero_concept_never_violates() {
        let f = PartialConceptClass::new(2, vec![vec![PartialLabel::Zero; 2]]).unwrap();
        let seen = BTreeSet::from([0]);
        let w = [q(1, 2), q(1, 2)];
        assert_eq!(worst_consistent(&f, &w, &seen), Some((0, Rational::zero())));
    }

    #[test]
    fn lower_bound_gamma_precondition() {
        let cfg = LowerBoundConfig {
            gamma: q(1, 8),
            ..LowerBoundConfig::default()
        };
        assert!(matches!(
            run_lower_bound(&cfg, &RunOptions::default()),
            Err(Error::Precondition(_))
        ));
    }

    #[test]
    fn huge_n_sees_everything() {
        let cfg = LowerBoundConfig {
            copies: 1,
            n_grid: vec![2000],
            trials: 3,
            gamma: q(1, 10),
            ..LowerBoundConfig::default()
        };
        let r = run_lower_bound(&cfg, &RunOptions::default()).unwrap();
        let Aggregates::LowerBound(a) = &r.aggregates else {
            panic!()
        };
        assert_eq!(a.per_n[0].unseen_total, 0);
        assert_eq!(a.per_n[0].failure_rate, None);
    }

    #[test]
    fn write_report_emits_three_files() {
        let dir = tempfile::tempdir().unwrap();
        let r = run_scaling(&small_scaling(), &RunOptions::default()).unwrap();
        let paths = write_report(&r, dir.path(), 4).unwrap();
        let csv = fs::read_to_string(&paths.csv).unwrap();
        assert!(csv.starts_with(
            "experiment,n,trial,seed,hypothesis_index,er_exact,er_float,max_train_err,extra"
        ));
        assert_eq!(csv.lines().count(), 11);
        assert!(fs::read_to_string(&paths.series)
            .unwrap()
            .contains("median_er"));
    }

    #[test]
    fn config_defaults_parse_from_partial_json() {
        let cfg: ScalingConfig = serde_json::from_str(r#"{"trials": 3}"#).unwrap();
        assert_eq!(cfg.trials, 3);
        assert_eq!(cfg.n_grid, ScalingConfig::default().n_grid);
        let cfg: ScalingConfig = serde_json::from_str(
            r#"{"generator": {"kind": "adversarial", "alpha": "1/100", "gamma": {"fixed": "1/50"}}}"#,
        )
        .unwrap();
        assert!(matches!(
            cfg.generator,
            Generator::Adversarial { copies: 1, .. }
        ));
        assert!(serde_json::from_str::<ScalingConfig>(r#"{"bogus": 1}"#).is_err());
    }
}
