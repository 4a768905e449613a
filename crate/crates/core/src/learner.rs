//! Domain sampling, error tables and the min-max / pooled ERM selectors.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{
    empirical_error, DomainFamily, HypothesisClass, LabeledSample, MetaDistribution,
};
use crate::rational::Rational;
use crate::sampling::{derive_seed, rng_from_seed, DiscreteSampler, DomainSampler};

/// `n` i.i.d. domain draws with `m` labeled points each.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct TrainingSet {
    pub domain_indices: Vec<usize>,
    pub samples: Vec<LabeledSample>,
    pub master_seed: u64,
    pub draw_seeds: Vec<u64>,
}

impl TrainingSet {
    pub fn n(&self) -> usize {
        self.domain_indices.len()
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum TableMode {
    Empirical,
    Exact,
}

/// Rows are hypotheses, columns are sampled domains.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ErrorTable {
    pub mode: TableMode,
    pub rows: Vec<Vec<Rational>>,
}

impl ErrorTable {
    pub fn new(mode: TableMode, rows: Vec<Vec<Rational>>) -> Result<Self> {
        let cols = rows.first().map_or(0, Vec::len);
        if rows.iter().any(|r| r.len() != cols) {
            return Err(Error::precondition("ragged error table"));
        }
        if let Some(bad) = rows.iter().flatten().find(|e| !e.is_probability()) {
            return Err(Error::precondition(format!(
                "error entry {bad} outside [0, 1]"
            )));
        }
        Ok(ErrorTable { mode, rows })
    }

    pub fn hypotheses(&self) -> usize {
        self.rows.len()
    }

    pub fn columns(&self) -> usize {
        self.rows.first().map_or(0, Vec::len)
    }

    pub fn row_max(&self, row: usize) -> Option<&Rational> {
        self.rows[row].iter().max()
    }
}

/// Draw `n` domains from `p` and `m` points from each, fully determined by `seed`.
///
/// Draw `i` uses its own generator seeded by `derive_seed(seed, [i])`.
pub fn sample_training_set(
    p: &MetaDistribution,
    n: usize,
    m: usize,
    seed: u64,
) -> Result<TrainingSet> {
    if n == 0 || m == 0 {
        return Err(Error::precondition(format!(
            "training set needs n >= 1 and m >= 1, got n = {n}, m = {m}"
        )));
    }
    let picker = DiscreteSampler::new(p.weights());
    let samplers: Vec<DomainSampler> = p
        .family()
        .domains()
        .iter()
        .map(DomainSampler::new)
        .collect();
    let draws: Vec<(u64, usize, LabeledSample)> = (0..n)
        .into_par_iter()
        .map(|i| {
            let draw_seed = derive_seed(seed, &[i as u64]);
            let mut rng = rng_from_seed(draw_seed);
            let di = picker.sample(&mut rng);
            (draw_seed, di, samplers[di].sample(&mut rng, m))
        })
        .collect();
    let mut out = TrainingSet {
        domain_indices: Vec::with_capacity(n),
        samples: Vec::with_capacity(n),
        master_seed: seed,
        draw_seeds: Vec::with_capacity(n),
    };
    for (s, di, sample) in draws {
        out.draw_seeds.push(s);
        out.domain_indices.push(di);
        out.samples.push(sample);
    }
    Ok(out)
}

/// Draw only domain indices (no points), with the same per-draw seeding.
pub fn sample_domain_indices(p: &MetaDistribution, n: usize, seed: u64) -> Vec<usize> {
    let picker = DiscreteSampler::new(p.weights());
    (0..n)
        .map(|i| picker.sample(&mut rng_from_seed(derive_seed(seed, &[i as u64]))))
        .collect()
}

/// Empirical error of every hypothesis on every per-domain sample.
pub fn estimate_errors(hc: &HypothesisClass, t: &TrainingSet) -> Result<ErrorTable> {
    let rows = hc
        .members()
        .par_iter()
        .map(|h| t.samples.iter().map(|s| empirical_error(h, s)).collect())
        .collect::<Result<Vec<Vec<Rational>>>>()?;
    ErrorTable::new(TableMode::Empirical, rows)
}

/// True error of every hypothesis on the listed domains of `g`.
pub fn exact_errors(
    hc: &HypothesisClass,
    g: &DomainFamily,
    columns: &[usize],
) -> Result<ErrorTable> {
    Error::check_space(g.space().size(), hc.space().size())?;
    let domains = columns
        .iter()
        .map(|&i| g.get(i))
        .collect::<Result<Vec<_>>>()?;
    let rows = hc
        .members()
        .par_iter()
        .map(|h| domains.iter().map(|d| d.error_unchecked(h)).collect())
        .collect();
    ErrorTable::new(TableMode::Exact, rows)
}

/// Row minimizing the maximum entry; ties go to the lowest row.
pub fn minmax_erm(table: &ErrorTable) -> Result<usize> {
    if table.hypotheses() == 0 || table.columns() == 0 {
        return Err(Error::precondition("min-max ERM on an empty table"));
    }
    let mut best: Option<(&Rational, usize)> = None;
    for i in 0..table.hypotheses() {
        let worst = table.row_max(i).expect("non-empty row");
        if best.is_none_or(|(b, _)| worst < b) {
            best = Some((worst, i));
        }
    }
    Ok(best.expect("non-empty").1)
}

/// Row minimizing the weighted column average; ties go to the lowest row.
pub fn pooled_erm(table: &ErrorTable, weights: &[Rational]) -> Result<usize> {
    if table.hypotheses() == 0 || table.columns() == 0 {
        return Err(Error::precondition("pooled ERM on an empty table"));
    }
    if weights.len() != table.columns() {
        return Err(Error::precondition(format!(
            "{} weights for {} columns",
            weights.len(),
            table.columns()
        )));
    }
    let total: Rational = weights.iter().sum();
    if total != 1 || weights.iter().any(Rational::is_negative) {
        return Err(Error::precondition(format!(
            "pooled weights must be non-negative and sum to 1, sum is {total}"
        )));
    }
    let mut best: Option<(Rational, usize)> = None;
    for (i, row) in table.rows.iter().enumerate() {
        let pooled: Rational = row.iter().zip(weights).map(|(e, w)| e * w).sum();
        if best.as_ref().is_none_or(|(b, _)| &pooled < b) {
            best = Some((pooled, i));
        }
    }
    Ok(best.expect("non-empty").1)
}

/// Uniform column weights.
pub fn uniform_weights(columns: usize) -> Vec<Rational> {
    vec![Rational::new(1, columns as i64); columns]
}

/// `ceil(ln(2 |H| n / delta) / (2 epsilon^2))`: points per domain so that all
/// `|H| n` estimates are `epsilon`-accurate with probability `1 - delta`.
pub fn sample_size_for(
    epsilon: &Rational,
    delta: &Rational,
    n: usize,
    class_size: usize,
) -> Result<usize> {
    let in_unit = |r: &Rational| r.is_positive() && r < &Rational::one();
    if !in_unit(epsilon) || !in_unit(delta) {
        return Err(Error::precondition(format!(
            "need 0 < epsilon, delta < 1, got epsilon = {epsilon}, delta = {delta}"
        )));
    }
    if n == 0 || class_size == 0 {
        return Err(Error::precondition("sample size needs n >= 1 and |H| >= 1"));
    }
    let eps = epsilon.to_f64();
    let m = ((2.0 * class_size as f64 * n as f64 / delta.to_f64()).ln() / (2.0 * eps * eps)).ceil();
    Ok(m.max(1.0) as usize)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::q;

    fn table(rows: &[&[Rational]]) -> ErrorTable {
        ErrorTable::new(TableMode::Exact, rows.iter().map(|r| r.to_vec()).collect()).unwrap()
    }

    #[test]
    fn flat_vs_split_selectors_disagree() {
        let t = table(&[&[q(3, 10), q(3, 10)], &[q(0, 1), q(1, 2)]]);
        assert_eq!(minmax_erm(&t).unwrap(), 0);
        assert_eq!(pooled_erm(&t, &uniform_weights(2)).unwrap(), 1);
    }

    #[test]
    fn single_hypothesis_and_column() {
        let t = table(&[&[q(1, 2), q(1, 3)]]);
        assert_eq!(minmax_erm(&t).unwrap(), 0);
        let t = table(&[&[q(1, 2)], &[q(1, 5)], &[q(1, 5)]]);
        assert_eq!(minmax_erm(&t).unwrap(), 1);
        assert_eq!(pooled_erm(&t, &[Rational::one()]).unwrap(), 1);
    }

    #[test]
    fn empty_and_bad_tables() {
        assert!(minmax_erm(&ErrorTable::new(TableMode::Exact, vec![]).unwrap()).is_err());
        assert!(ErrorTable::new(TableMode::Exact, vec![vec![q(3, 2)]]).is_err());
        assert!(ErrorTable::new(TableMode::Exact, vec![vec![q(1, 2)], vec![]]).is_err());
        let t = table(&[&[q(1, 2), q(1, 3)]]);
        assert!(pooled_erm(&t, &[q(1, 2)]).is_err());
        assert!(pooled_erm(&t, &[q(1, 2), q(1, 3)]).is_err());
    }

    #[test]
    fn sample_size_formula() {
        assert_eq!(sample_size_for(&q(1, 10), &q(1, 10), 1, 1).unwrap(), 150);
        let one = sample_size_for(&q(1, 10), &q(1, 10), 1, 1).unwrap();
        let two = sample_size_for(&q(1, 10), &q(1, 10), 1, 2).unwrap();
        assert!((34..=35).contains(&(two - one)), "{one} {two}");
        assert!(sample_size_for(&q(0, 1), &q(1, 10), 1, 1).is_err());
        assert!(sample_size_for(&q(1, 10), &q(1, 1), 1, 1).is_err());
    }
}
