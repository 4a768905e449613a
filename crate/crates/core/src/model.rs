//! Finite domains, hypothesis classes and meta-distributions, with exact
//! error rates, domain risk and the optimal domain error bound.

use std::collections::{BTreeMap, HashSet};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::rational::Rational;

/// Instance indices `0..size`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct InstanceSpace(usize);

impl InstanceSpace {
    pub fn new(size: usize) -> Result<Self> {
        if size == 0 {
            return Err(Error::precondition("instance space must be non-empty"));
        }
        Ok(InstanceSpace(size))
    }

    pub fn size(self) -> usize {
        self.0
    }
}

/// A total binary labeling of an instance space.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Hypothesis {
    labels: Vec<bool>,
}

impl Hypothesis {
    pub fn new(labels: Vec<bool>) -> Self {
        Hypothesis { labels }
    }

    pub fn from_fn(space: InstanceSpace, f: impl Fn(usize) -> bool) -> Self {
        Hypothesis {
            labels: (0..space.size()).map(f).collect(),
        }
    }

    #[inline]
    pub fn label(&self, x: usize) -> bool {
        self.labels[x]
    }

    pub fn labels(&self) -> &[bool] {
        &self.labels
    }

    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }
}

/// Finite hypothesis class; a member's position is its identity.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct HypothesisClass {
    space: InstanceSpace,
    members: Vec<Hypothesis>,
}

impl HypothesisClass {
    /// Rejects members of the wrong length and duplicate labelings.
    pub fn new(space: InstanceSpace, members: Vec<Hypothesis>) -> Result<Self> {
        let mut seen = HashSet::with_capacity(members.len());
        for (i, h) in members.iter().enumerate() {
            if h.len() != space.size() {
                return Err(Error::InvalidClass(format!(
                    "hypothesis {i} has {} labels, space has {}",
                    h.len(),
                    space.size()
                )));
            }
            if !seen.insert(h.labels()) {
                return Err(Error::InvalidClass(format!(
                    "hypothesis {i} duplicates an earlier member"
                )));
            }
        }
        Ok(HypothesisClass { space, members })
    }

    pub fn space(&self) -> InstanceSpace {
        self.space
    }

    pub fn members(&self) -> &[Hypothesis] {
        &self.members
    }

    pub fn get(&self, index: usize) -> Result<&Hypothesis> {
        self.members.get(index).ok_or(Error::IndexOutOfRange {
            what: "hypothesis",
            index,
            len: self.members.len(),
        })
    }

    pub fn len(&self) -> usize {
        self.members.len()
    }

    pub fn is_empty(&self) -> bool {
        self.members.is_empty()
    }
}

/// One point mass of a labeled distribution.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Atom {
    pub x: usize,
    #[serde(with = "bit")]
    pub y: bool,
    pub mass: Rational,
}

pub(crate) mod bit {
    use serde::{de::Error, Deserialize, Deserializer, Serializer};

    pub fn serialize<S: Serializer>(v: &bool, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_u8(u8::from(*v))
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<bool, D::Error> {
        match u8::deserialize(d)? {
            0 => Ok(false),
            1 => Ok(true),
            other => Err(D::Error::custom(format!(
                "label must be 0 or 1, got {other}"
            ))),
        }
    }
}

/// A domain: finite-support distribution over `(instance, label)`.
///
/// Atoms are kept sorted by `(x, y)` so that equal distributions compare equal.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct LabeledDistribution {
    space: InstanceSpace,
    atoms: Vec<Atom>,
}

impl LabeledDistribution {
    pub fn new(space: InstanceSpace, mut atoms: Vec<Atom>) -> Result<Self> {
        if atoms.is_empty() {
            return Err(Error::InvalidDistribution("no atoms".into()));
        }
        for a in &atoms {
            if a.x >= space.size() {
                return Err(Error::InvalidDistribution(format!(
                    "atom instance {} outside space of size {}",
                    a.x,
                    space.size()
                )));
            }
            if !a.mass.is_positive() {
                return Err(Error::InvalidDistribution(format!(
                    "atom ({}, {}) has non-positive mass {}",
                    a.x,
                    u8::from(a.y),
                    a.mass
                )));
            }
        }
        atoms.sort_by_key(|a| (a.x, a.y));
        if let Some(w) = atoms
            .windows(2)
            .find(|w| (w[0].x, w[0].y) == (w[1].x, w[1].y))
        {
            return Err(Error::InvalidDistribution(format!(
                "duplicate atom ({}, {})",
                w[0].x,
                u8::from(w[0].y)
            )));
        }
        let total: Rational = atoms.iter().map(|a| &a.mass).sum();
        if total != 1 {
            return Err(Error::InvalidDistribution(format!(
                "masses sum to {total}, expected 1"
            )));
        }
        Ok(LabeledDistribution { space, atoms })
    }

    /// Builds from possibly repeated `(x, y)` entries, summing their masses.
    pub fn from_merged(
        space: InstanceSpace,
        entries: impl IntoIterator<Item = (usize, bool, Rational)>,
    ) -> Result<Self> {
        let mut merged: BTreeMap<(usize, bool), Rational> = BTreeMap::new();
        for (x, y, mass) in entries {
            *merged.entry((x, y)).or_insert_with(Rational::zero) += mass;
        }
        let atoms = merged
            .into_iter()
            .filter(|(_, m)| !m.is_zero())
            .map(|((x, y), mass)| Atom { x, y, mass })
            .collect();
        Self::new(space, atoms)
    }

    /// Point mass on `(x, y)`.
    pub fn point(space: InstanceSpace, x: usize, y: bool) -> Result<Self> {
        Self::new(
            space,
            vec![Atom {
                x,
                y,
                mass: Rational::one(),
            }],
        )
    }

    pub fn space(&self) -> InstanceSpace {
        self.space
    }

    pub fn atoms(&self) -> &[Atom] {
        &self.atoms
    }

    /// Distinct instances carrying mass, ascending.
    pub fn support(&self) -> Vec<usize> {
        let mut xs: Vec<usize> = self.atoms.iter().map(|a| a.x).collect();
        xs.dedup();
        xs
    }

    /// Marginal mass of instance `x`.
    pub fn marginal(&self, x: usize) -> Rational {
        self.atoms
            .iter()
            .filter(|a| a.x == x)
            .map(|a| &a.mass)
            .sum()
    }

    /// Error of `h` with no space check. `h` must cover every atom's instance.
    pub(crate) fn error_unchecked(&self, h: &Hypothesis) -> Rational {
        self.atoms
            .iter()
            .filter(|a| h.label(a.x) != a.y)
            .map(|a| &a.mass)
            .sum()
    }
}

/// Ordered family of domains over one instance space.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct DomainFamily {
    space: InstanceSpace,
    domains: Vec<LabeledDistribution>,
}

impl DomainFamily {
    pub fn new(space: InstanceSpace, domains: Vec<LabeledDistribution>) -> Result<Self> {
        for d in &domains {
            Error::check_space(space.size(), d.space().size())?;
        }
        Ok(DomainFamily { space, domains })
    }

    pub fn space(&self) -> InstanceSpace {
        self.space
    }

    pub fn domains(&self) -> &[LabeledDistribution] {
        &self.domains
    }

    pub fn get(&self, index: usize) -> Result<&LabeledDistribution> {
        self.domains.get(index).ok_or(Error::IndexOutOfRange {
            what: "domain",
            index,
            len: self.domains.len(),
        })
    }

    pub fn len(&self) -> usize {
        self.domains.len()
    }

    pub fn is_empty(&self) -> bool {
        self.domains.is_empty()
    }

    pub fn into_domains(self) -> Vec<LabeledDistribution> {
        self.domains
    }
}

/// Probability vector over a domain family.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct MetaDistribution {
    family: DomainFamily,
    weights: Vec<Rational>,
}

impl MetaDistribution {
    pub fn new(family: DomainFamily, weights: Vec<Rational>) -> Result<Self> {
        if weights.len() != family.len() {
            return Err(Error::InvalidDistribution(format!(
                "{} weights for {} domains",
                weights.len(),
                family.len()
            )));
        }
        if let Some(w) = weights.iter().find(|w| w.is_negative()) {
            return Err(Error::InvalidDistribution(format!("negative weight {w}")));
        }
        let total: Rational = weights.iter().sum();
        if total != 1 {
            return Err(Error::InvalidDistribution(format!(
                "weights sum to {total}, expected 1"
            )));
        }
        Ok(MetaDistribution { family, weights })
    }

    pub fn uniform(family: DomainFamily) -> Result<Self> {
        let n = family.len();
        if n == 0 {
            return Err(Error::InvalidDistribution(
                "uniform over empty family".into(),
            ));
        }
        let w = Rational::new(1, n as i64);
        Self::new(family, vec![w; n])
    }

    pub fn point_mass(family: DomainFamily, index: usize) -> Result<Self> {
        family.get(index)?;
        let weights = (0..family.len())
            .map(|i| {
                if i == index {
                    Rational::one()
                } else {
                    Rational::zero()
                }
            })
            .collect();
        Self::new(family, weights)
    }

    pub fn family(&self) -> &DomainFamily {
        &self.family
    }

    pub fn weights(&self) -> &[Rational] {
        &self.weights
    }

    /// Indices with positive weight.
    pub fn support(&self) -> impl Iterator<Item = usize> + '_ {
        self.weights
            .iter()
            .enumerate()
            .filter(|(_, w)| w.is_positive())
            .map(|(i, _)| i)
    }
}

/// Labeled points drawn from one domain.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct LabeledSample {
    pub points: Vec<(usize, u8)>,
}

impl LabeledSample {
    pub fn new(points: impl IntoIterator<Item = (usize, bool)>) -> Self {
        LabeledSample {
            points: points.into_iter().map(|(x, y)| (x, u8::from(y))).collect(),
        }
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }
}

/// `err_D(h)`: mass of atoms that `h` mislabels.
pub fn domain_error(h: &Hypothesis, d: &LabeledDistribution) -> Result<Rational> {
    Error::check_space(d.space().size(), h.len())?;
    Ok(d.error_unchecked(h))
}

/// Fraction of sample points that `h` mislabels, with denominator `|s|`.
pub fn empirical_error(h: &Hypothesis, s: &LabeledSample) -> Result<Rational> {
    if s.is_empty() {
        return Err(Error::precondition("empirical error of an empty sample"));
    }
    let mut mistakes = 0i64;
    for &(x, y) in &s.points {
        if x >= h.len() {
            return Err(Error::IndexOutOfRange {
                what: "sample instance",
                index: x,
                len: h.len(),
            });
        }
        if h.label(x) != (y != 0) {
            mistakes += 1;
        }
    }
    Ok(Rational::new(mistakes, s.len() as i64))
}

/// The label-negated domain `¬D`.
pub fn flip_labels(d: &LabeledDistribution) -> LabeledDistribution {
    let mut atoms: Vec<Atom> = d
        .atoms()
        .iter()
        .map(|a| Atom {
            x: a.x,
            y: !a.y,
            mass: a.mass.clone(),
        })
        .collect();
    atoms.sort_by_key(|a| (a.x, a.y));
    LabeledDistribution {
        space: d.space(),
        atoms,
    }
}

/// `(1 - lambda) d0 + lambda d1`, merging identical atoms.
pub fn mix(
    d0: &LabeledDistribution,
    d1: &LabeledDistribution,
    lambda: &Rational,
) -> Result<LabeledDistribution> {
    if !lambda.is_probability() {
        return Err(Error::precondition(format!(
            "mixture weight {lambda} outside [0, 1]"
        )));
    }
    Error::check_space(d0.space().size(), d1.space().size())?;
    let keep = lambda.complement();
    let entries = d0
        .atoms()
        .iter()
        .map(|a| (a.x, a.y, &a.mass * &keep))
        .chain(d1.atoms().iter().map(|a| (a.x, a.y, &a.mass * lambda)));
    LabeledDistribution::from_merged(d0.space(), entries)
}

/// `Er_{P,tau}(h)`: weight of domains on which `err_D(h) > tau`.
pub fn domain_risk(p: &MetaDistribution, tau: &Rational, h: &Hypothesis) -> Result<Rational> {
    Error::check_space(p.family().space().size(), h.len())?;
    Ok(p.family()
        .domains()
        .iter()
        .zip(p.weights())
        .filter(|(_, w)| w.is_positive())
        .filter(|(d, _)| &d.error_unchecked(h) > tau)
        .map(|(_, w)| w)
        .sum())
}

/// `tau*`: the smallest worst-case error over `support(p)` achieved by a
/// member of `hc`, with the lowest-index hypothesis achieving it.
pub fn optimal_tau(p: &MetaDistribution, hc: &HypothesisClass) -> Result<(Rational, usize)> {
    Error::check_space(p.family().space().size(), hc.space().size())?;
    let support: Vec<&LabeledDistribution> =
        p.support().map(|i| &p.family().domains()[i]).collect();
    if support.is_empty() {
        return Err(Error::precondition(
            "meta-distribution has no positive weight",
        ));
    }
    if hc.is_empty() {
        return Err(Error::precondition("empty hypothesis class"));
    }
    let mut best: Option<(Rational, usize)> = None;
    for (i, h) in hc.members().iter().enumerate() {
        let worst = support
            .iter()
            .map(|d| d.error_unchecked(h))
            .max()
            .expect("non-empty support");
        if best.as_ref().is_none_or(|(b, _)| &worst < b) {
            best = Some((worst, i));
        }
    }
    Ok(best.expect("non-empty class"))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::q;

    fn space(n: usize) -> InstanceSpace {
        InstanceSpace::new(n).unwrap()
    }

    fn atom(x: usize, y: u8, mass: Rational) -> Atom {
        Atom { x, y: y == 1, mass }
    }

    fn two_atom() -> LabeledDistribution {
        LabeledDistribution::new(space(3), vec![atom(0, 0, q(3, 10)), atom(2, 1, q(7, 10))])
            .unwrap()
    }

    #[test]
    fn rejects_bad_distributions() {
        let s = space(2);
        assert!(LabeledDistribution::new(s, vec![]).is_err());
        assert!(LabeledDistribution::new(s, vec![atom(0, 0, q(1, 2))]).is_err());
        assert!(LabeledDistribution::new(s, vec![atom(2, 0, q(1, 1))]).is_err());
        assert!(
            LabeledDistribution::new(s, vec![atom(0, 0, q(1, 2)), atom(0, 0, q(1, 2))]).is_err()
        );
        assert!(
            LabeledDistribution::new(s, vec![atom(0, 0, q(3, 2)), atom(1, 0, q(-1, 2))]).is_err()
        );
    }

    #[test]
    fn rejects_bad_classes() {
        let s = space(2);
        let h = Hypothesis::new(vec![true, false]);
        assert!(HypothesisClass::new(s, vec![h.clone(), h.clone()]).is_err());
        assert!(HypothesisClass::new(s, vec![Hypothesis::new(vec![true])]).is_err());
        assert!(InstanceSpace::new(0).is_err());
    }

    #[test]
    fn error_of_all_zero_on_zero_labels() {
        let d = LabeledDistribution::new(space(2), vec![atom(0, 0, q(1, 4)), atom(1, 0, q(3, 4))])
            .unwrap();
        let h = Hypothesis::new(vec![false, false]);
        assert_eq!(domain_error(&h, &d).unwrap(), Rational::zero());
    }

    #[test]
    fn error_space_mismatch() {
        let h = Hypothesis::new(vec![false; 2]);
        assert!(matches!(
            domain_error(&h, &two_atom()),
            Err(Error::SpaceMismatch { .. })
        ));
    }

    #[test]
    fn empirical_error_cases() {
        let h = Hypothesis::new(vec![false, true, false]);
        let all_right = LabeledSample::new((0..7).map(|i| (i % 3, i % 3 == 1)));
        assert_eq!(empirical_error(&h, &all_right).unwrap(), Rational::zero());
        let two_wrong = LabeledSample::new(vec![
            (0, true),
            (1, false),
            (2, false),
            (0, false),
            (1, true),
        ]);
        assert_eq!(empirical_error(&h, &two_wrong).unwrap(), q(2, 5));
        assert!(empirical_error(&h, &LabeledSample::new(vec![])).is_err());
    }

    #[test]
    fn flip_is_involution_and_complements() {
        let d = two_atom();
        assert_eq!(flip_labels(&flip_labels(&d)), d);
        let h = Hypothesis::new(vec![true, true, true]);
        assert_eq!(domain_error(&h, &d).unwrap(), q(3, 10));
        assert_eq!(domain_error(&h, &flip_labels(&d)).unwrap(), q(7, 10));
    }

    #[test]
    fn mix_endpoints_and_range() {
        let d0 = two_atom();
        let d1 = flip_labels(&d0);
        assert_eq!(mix(&d0, &d1, &Rational::zero()).unwrap(), d0);
        assert_eq!(mix(&d0, &d1, &Rational::one()).unwrap(), d1);
        assert!(mix(&d0, &d1, &q(3, 2)).is_err());
        assert!(mix(&d0, &d1, &q(-1, 2)).is_err());
    }

    #[test]
    fn mix_with_clean_domain_is_scaled_flip() {
        // every h with h(0) = 0 is clean on the point mass at (0, 0)
        let s = space(3);
        let d0 = LabeledDistribution::point(s, 0, false).unwrap();
        let d = LabeledDistribution::new(s, vec![atom(1, 1, q(23, 60)), atom(2, 0, q(37, 60))])
            .unwrap();
        let h = Hypothesis::new(vec![false, false, false]);
        assert_eq!(domain_error(&h, &d).unwrap(), q(23, 60));
        let lambda = q(2, 7);
        let mixed = mix(&d0, &flip_labels(&d), &lambda).unwrap();
        assert_eq!(domain_error(&h, &mixed).unwrap(), q(2, 7) * q(37, 60));
        assert_eq!(domain_error(&h, &mixed).unwrap(), q(37, 210));
    }

    fn family_with_errors(errs: &[Rational]) -> (DomainFamily, Hypothesis) {
        // h ≡ 0 on two instances; domain i puts mass errs[i] on (1, 1)
        let s = space(2);
        let domains = errs
            .iter()
            .map(|e| {
                LabeledDistribution::from_merged(
                    s,
                    [(1, true, e.clone()), (0, false, e.complement())],
                )
                .unwrap()
            })
            .collect();
        (
            DomainFamily::new(s, domains).unwrap(),
            Hypothesis::new(vec![false, false]),
        )
    }

    #[test]
    fn domain_risk_cases() {
        let (g, h) = family_with_errors(&[q(1, 5), q(2, 5)]);
        let p = MetaDistribution::uniform(g).unwrap();
        assert_eq!(domain_risk(&p, &q(3, 10), &h).unwrap(), q(1, 2));
        assert_eq!(
            domain_risk(&p, &Rational::one(), &h).unwrap(),
            Rational::zero()
        );
        // strict: error equal to tau does not count
        assert_eq!(domain_risk(&p, &q(2, 5), &h).unwrap(), Rational::zero());
    }

    #[test]
    fn optimal_tau_single_hypothesis() {
        let (g, h) = family_with_errors(&[q(1, 5), q(2, 5), q(1, 10)]);
        let p = MetaDistribution::new(g, vec![q(1, 2), q(1, 2), Rational::zero()]).unwrap();
        let hc = HypothesisClass::new(space(2), vec![h]).unwrap();
        assert_eq!(optimal_tau(&p, &hc).unwrap(), (q(2, 5), 0));
    }

    #[test]
    fn meta_validation() {
        let (g, _) = family_with_errors(&[q(1, 5), q(2, 5)]);
        assert!(MetaDistribution::new(g.clone(), vec![q(1, 2)]).is_err());
        assert!(MetaDistribution::new(g.clone(), vec![q(3, 2), q(-1, 2)]).is_err());
        assert!(MetaDistribution::new(g, vec![q(1, 2), q(1, 3)]).is_err());
    }
}
