//! H-divergence, the thresholded (H, tau)-divergence, greedy covers, the
//! cover bound on Gdim, and smooth domain families.

use serde::{Deserialize, Serialize};

use crate::dimensions::{gdim, DimensionQuery};
use crate::error::{Error, Result};
use crate::model::{Atom, DomainFamily, HypothesisClass, LabeledDistribution};
use crate::rational::{q, Rational};
use crate::sampling::rng_from_seed;
use rand::Rng;

/// `tau = None` is the classic H-divergence.
#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct DivergenceQuery {
    #[serde(default)]
    pub tau: Option<Rational>,
}

impl DivergenceQuery {
    pub fn classic() -> Self {
        DivergenceQuery { tau: None }
    }

    pub fn thresholded(tau: Rational) -> Result<Self> {
        if !tau.is_probability() {
            return Err(Error::precondition(format!(
                "divergence tau {tau} outside [0, 1]"
            )));
        }
        Ok(DivergenceQuery { tau: Some(tau) })
    }
}

/// A divergence value; `vacuous` marks a thresholded sup over no hypotheses,
/// which is reported as zero.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Divergence {
    pub value: Rational,
    pub vacuous: bool,
}

fn divergence_from_errors(
    errs1: &[Rational],
    errs2: &[Rational],
    q: &DivergenceQuery,
) -> Divergence {
    let mut best: Option<Rational> = None;
    for (e1, e2) in errs1.iter().zip(errs2) {
        if let Some(tau) = &q.tau {
            if e1.min(e2) > tau {
                continue;
            }
        }
        let gap = (e1 - e2).abs();
        if best.as_ref().is_none_or(|b| &gap > b) {
            best = Some(gap);
        }
    }
    match best {
        Some(value) => Divergence {
            value,
            vacuous: false,
        },
        None => Divergence {
            value: Rational::zero(),
            vacuous: true,
        },
    }
}

fn errors_of(hc: &HypothesisClass, d: &LabeledDistribution) -> Vec<Rational> {
    hc.members().iter().map(|h| d.error_unchecked(h)).collect()
}

/// `max |err_D1(h) - err_D2(h)|` over `hc`, restricted to hypotheses with
/// `min(err_D1, err_D2) <= tau` when `q.tau` is set.
pub fn h_divergence(
    hc: &HypothesisClass,
    d1: &LabeledDistribution,
    d2: &LabeledDistribution,
    q: &DivergenceQuery,
) -> Result<Divergence> {
    Error::check_space(hc.space().size(), d1.space().size())?;
    Error::check_space(hc.space().size(), d2.space().size())?;
    Ok(divergence_from_errors(
        &errors_of(hc, d1),
        &errors_of(hc, d2),
        q,
    ))
}

/// Pairwise divergence matrix over a family.
pub fn divergence_matrix(
    hc: &HypothesisClass,
    g: &DomainFamily,
    q: &DivergenceQuery,
) -> Result<Vec<Vec<Rational>>> {
    Error::check_space(hc.space().size(), g.space().size())?;
    let errs: Vec<Vec<Rational>> = g.domains().iter().map(|d| errors_of(hc, d)).collect();
    Ok(errs
        .iter()
        .map(|a| {
            errs.iter()
                .map(|b| divergence_from_errors(a, b, q).value)
                .collect()
        })
        .collect())
}

/// Triples `(i, j, k)` with `m[i][k] > m[i][j] + m[j][k]`.
///
/// Always empty for the plain divergence; the thresholded one is only
/// measured.
pub fn triangle_violations(m: &[Vec<Rational>]) -> Vec<(usize, usize, usize)> {
    let n = m.len();
    let mut out = Vec::new();
    for i in 0..n {
        for j in 0..n {
            for k in 0..n {
                if m[i][k] > &m[i][j] + &m[j][k] {
                    out.push((i, j, k));
                }
            }
        }
    }
    out
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Cover {
    pub centers: Vec<usize>,
    pub radius: Rational,
    pub metric: DivergenceQuery,
    /// Center chosen for each family member (the first center within radius).
    pub assignment: Vec<usize>,
}

impl Cover {
    pub fn len(&self) -> usize {
        self.centers.len()
    }

    pub fn is_empty(&self) -> bool {
        self.centers.is_empty()
    }
}

/// Repeatedly makes the lowest-index uncovered domain a center.
pub fn greedy_cover(
    g: &DomainFamily,
    hc: &HypothesisClass,
    radius: &Rational,
    q: &DivergenceQuery,
) -> Result<Cover> {
    if radius.is_negative() {
        return Err(Error::precondition(format!(
            "negative cover radius {radius}"
        )));
    }
    let dist = divergence_matrix(hc, g, q)?;
    let n = g.len();
    let mut assignment: Vec<Option<usize>> = vec![None; n];
    let mut centers = Vec::new();
    while let Some(c) = assignment.iter().position(Option::is_none) {
        centers.push(c);
        for (i, slot) in assignment.iter_mut().enumerate() {
            if slot.is_none() && &dist[c][i] <= radius {
                *slot = Some(c);
            }
        }
    }
    Ok(Cover {
        centers,
        radius: radius.clone(),
        metric: q.clone(),
        assignment: assignment
            .into_iter()
            .map(|a| a.expect("covered"))
            .collect(),
    })
}

/// Re-evaluates every member's distance to some center.
pub fn verify_cover(cover: &Cover, g: &DomainFamily, hc: &HypothesisClass) -> Result<bool> {
    for &c in &cover.centers {
        g.get(c)?;
    }
    for d in g.domains() {
        let mut covered = false;
        for &c in &cover.centers {
            let div = h_divergence(hc, d, &g.domains()[c], &cover.metric)?;
            if div.value <= cover.radius {
                covered = true;
                break;
            }
        }
        if !covered {
            return Ok(false);
        }
    }
    Ok(true)
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct CoverBound {
    pub gdim: usize,
    pub gdim_exact: bool,
    pub cover_size: usize,
    pub holds: bool,
}

/// Compares `Gdim(H, G, tau, alpha)` with a greedy `alpha/2`-cover under `d_{H,tau}`.
pub fn cover_bound_check(
    g: &DomainFamily,
    hc: &HypothesisClass,
    tau: &Rational,
    alpha: &Rational,
) -> Result<CoverBound> {
    let query = DimensionQuery::new(tau.clone(), alpha.clone())?;
    let dim = gdim(hc, g, &query)?;
    let cover = greedy_cover(
        g,
        hc,
        &(alpha / Rational::from_integer(2)),
        &DivergenceQuery::thresholded(tau.clone())?,
    )?;
    Ok(CoverBound {
        gdim: dim.dimension,
        gdim_exact: dim.exact,
        cover_size: cover.len(),
        holds: dim.dimension <= cover.len(),
    })
}

/// Grid resolution for multiplicative perturbation factors.
const FACTOR_STEPS: i64 = 64;

/// `count` domains whose marginals stay within `[gamma, 1/gamma]` of `mu0`
/// pointwise, all labeled by `pstar`.
///
/// Each domain scales `mu0` by factors drawn from either `[1, 1/gamma]` or
/// `[gamma, 1]` and renormalizes; either band keeps every ratio inside
/// `[gamma, 1/gamma]`, which is re-checked exactly.
pub fn smooth_family(
    mu0: &[Rational],
    pstar: &[bool],
    gamma: &Rational,
    count: usize,
    seed: u64,
) -> Result<DomainFamily> {
    if !gamma.is_positive() || gamma > &Rational::one() {
        return Err(Error::Construction(format!("gamma {gamma} outside (0, 1]")));
    }
    if mu0.len() != pstar.len() {
        return Err(Error::Construction(format!(
            "{} marginal weights for {} labels",
            mu0.len(),
            pstar.len()
        )));
    }
    if mu0.iter().any(Rational::is_negative) || mu0.iter().sum::<Rational>() != 1 {
        return Err(Error::Construction(
            "mu0 must be a probability vector".into(),
        ));
    }
    if count == 0 {
        return Err(Error::Construction("smooth family of zero domains".into()));
    }
    let space = crate::model::InstanceSpace::new(mu0.len())?;
    let inv = gamma.recip();
    let mut rng = rng_from_seed(seed);
    let mut domains = Vec::with_capacity(count);
    for _ in 0..count {
        let (lo, hi) = if rng.random_bool(0.5) {
            (Rational::one(), inv.clone())
        } else {
            (gamma.clone(), Rational::one())
        };
        let span = &hi - &lo;
        let scaled: Vec<Rational> = mu0
            .iter()
            .map(|w| {
                let step = rng.random_range(0..=FACTOR_STEPS);
                let f = &lo + &span * q(step, FACTOR_STEPS);
                w * f
            })
            .collect();
        let z: Rational = scaled.iter().sum();
        let mu: Vec<Rational> = scaled.iter().map(|s| s / &z).collect();
        for (m, m0) in mu.iter().zip(mu0) {
            if m0.is_positive() {
                let ratio = m / m0;
                if &ratio < gamma || ratio > inv {
                    return Err(Error::Construction(format!(
                        "marginal ratio {ratio} left [{gamma}, {inv}]"
                    )));
                }
            }
        }
        let atoms = mu
            .into_iter()
            .enumerate()
            .filter(|(_, m)| m.is_positive())
            .map(|(x, mass)| Atom {
                x,
                y: pstar[x],
                mass,
            })
            .collect();
        domains.push(LabeledDistribution::new(space, atoms)?);
    }
    DomainFamily::new(space, domains)
}

/// `(1/gamma^2 - 1) tau`.
pub fn smooth_divergence_bound(gamma: &Rational, tau: &Rational) -> Rational {
    let g2 = gamma * gamma;
    (g2.recip() - Rational::one()) * tau
}
