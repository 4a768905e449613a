#![allow(dead_code)]

use genlab::model::{
    DomainFamily, Hypothesis, HypothesisClass, InstanceSpace, LabeledDistribution,
};
use genlab::{q, Rational};
use rand::seq::SliceRandom;
use rand::Rng;

/// Error computed straight from the atom list.
pub fn naive_error(h: &Hypothesis, d: &LabeledDistribution) -> Rational {
    let mut e = Rational::zero();
    for a in d.atoms() {
        if h.labels()[a.x] != a.y {
            e += &a.mass;
        }
    }
    e
}

/// Largest subset of domain indices such that every sub-pattern has a
/// hypothesis below `tau - alpha` inside and above `tau` outside. Tries every
/// subset and every pattern.
pub fn naive_gdim(
    hc: &HypothesisClass,
    g: &DomainFamily,
    tau: &Rational,
    alpha: &Rational,
) -> usize {
    let low = tau - alpha;
    let k = g.len();
    let errs: Vec<Vec<Rational>> = hc
        .members()
        .iter()
        .map(|h| g.domains().iter().map(|d| naive_error(h, d)).collect())
        .collect();
    let mut best = 0;
    for subset in 0u32..(1 << k) {
        let members: Vec<usize> = (0..k).filter(|j| subset >> j & 1 == 1).collect();
        if members.len() <= best {
            continue;
        }
        let all_patterns = (0u32..(1 << members.len())).all(|pattern| {
            errs.iter().any(|row| {
                members.iter().enumerate().all(|(t, &j)| {
                    if pattern >> t & 1 == 1 {
                        row[j] < low
                    } else {
                        &row[j] > tau
                    }
                })
            })
        });
        if all_patterns {
            best = members.len();
        }
    }
    best
}

/// Random distribution with small-denominator masses over `space`.
pub fn random_domain<R: Rng>(rng: &mut R, space: InstanceSpace) -> LabeledDistribution {
    let n = space.size();
    let atoms = rng.random_range(1..=(2 * n).min(6));
    let mut slots: Vec<(usize, bool)> = (0..n).flat_map(|x| [(x, false), (x, true)]).collect();
    slots.shuffle(rng);
    let weights: Vec<i64> = (0..atoms).map(|_| rng.random_range(1..=6)).collect();
    let total: i64 = weights.iter().sum();
    LabeledDistribution::from_merged(
        space,
        slots[..atoms]
            .iter()
            .zip(&weights)
            .map(|(&(x, y), &w)| (x, y, q(w, total))),
    )
    .unwrap()
}

/// Up to `max_h` distinct random labelings of `{0..n}`.
pub fn random_class<R: Rng>(rng: &mut R, space: InstanceSpace, max_h: usize) -> HypothesisClass {
    let n = space.size();
    let target = rng.random_range(1..=max_h.min(1 << n));
    let mut codes: Vec<u32> = (0..1u32 << n).collect();
    codes.shuffle(rng);
    let members = codes[..target]
        .iter()
        .map(|&c| Hypothesis::from_fn(space, |x| c >> x & 1 == 1))
        .collect();
    HypothesisClass::new(space, members).unwrap()
}

pub struct Instance {
    pub hc: HypothesisClass,
    pub g: DomainFamily,
    pub tau: Rational,
    pub alpha: Rational,
}

pub fn random_instance<R: Rng>(rng: &mut R, max_h: usize, max_g: usize) -> Instance {
    let space = InstanceSpace::new(rng.random_range(2..=5)).unwrap();
    let hc = random_class(rng, space, max_h);
    let k = rng.random_range(1..=max_g);
    let g = DomainFamily::new(space, (0..k).map(|_| random_domain(rng, space)).collect()).unwrap();
    let taus = [q(3, 10), q(2, 5), q(1, 2)];
    let alphas = [Rational::zero(), q(1, 20), q(1, 10)];
    Instance {
        hc,
        g,
        tau: taus[rng.random_range(0..3)].clone(),
        alpha: alphas[rng.random_range(0..3)].clone(),
    }
}
