//! Shattering-based dimensions: partial-concept VC dimension, the domain
//! shattering dimension, certificates, and restriction counts.
//!
//! A set `S` is shattered when every `E ⊆ S` has a witness that is `0` on `E`
//! and `1` on `S \ E`. For domains, `0` means error `< tau - alpha` and `1`
//! means error `> tau`; a hypothesis in between is unknown on that domain.

use std::collections::{BTreeMap, HashSet};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{DomainFamily, HypothesisClass};
use crate::rational::Rational;

/// Largest shattered-set size the search certifies unless told otherwise.
pub const DEFAULT_SIZE_CAP: usize = 20;

/// Largest certificate a `u64` subset mask can index.
const MAX_CERT_SIZE: usize = 63;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum PartialLabel {
    Zero,
    One,
    Unknown,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PartialConceptClass {
    universe: usize,
    concepts: Vec<Vec<PartialLabel>>,
}

impl PartialConceptClass {
    pub fn new(universe: usize, concepts: Vec<Vec<PartialLabel>>) -> Result<Self> {
        if let Some((i, c)) = concepts
            .iter()
            .enumerate()
            .find(|(_, c)| c.len() != universe)
        {
            return Err(Error::InvalidClass(format!(
                "concept {i} has {} values, universe has {universe}",
                c.len()
            )));
        }
        Ok(PartialConceptClass { universe, concepts })
    }

    /// Total concepts of a hypothesis class, read as partial concepts.
    pub fn from_total(hc: &HypothesisClass) -> Self {
        let concepts = hc
            .members()
            .iter()
            .map(|h| {
                h.labels()
                    .iter()
                    .map(|&b| {
                        if b {
                            PartialLabel::One
                        } else {
                            PartialLabel::Zero
                        }
                    })
                    .collect()
            })
            .collect();
        PartialConceptClass {
            universe: hc.space().size(),
            concepts,
        }
    }

    pub fn universe(&self) -> usize {
        self.universe
    }

    pub fn concepts(&self) -> &[Vec<PartialLabel>] {
        &self.concepts
    }

    pub fn value(&self, concept: usize, point: usize) -> PartialLabel {
        self.concepts[concept][point]
    }

    /// First witness for each `E` mask over `set`; `None` where no concept
    /// realizes the pattern. Bit `j` of a mask means `set[j] ∈ E`.
    fn witness_table(&self, set: &[usize]) -> Vec<Option<usize>> {
        let mut table = vec![None; 1usize << set.len()];
        'concepts: for (c, row) in self.concepts.iter().enumerate() {
            let mut mask = 0usize;
            for (j, &p) in set.iter().enumerate() {
                match row[p] {
                    PartialLabel::Zero => mask |= 1 << j,
                    PartialLabel::One => {}
                    PartialLabel::Unknown => continue 'concepts,
                }
            }
            table[mask].get_or_insert(c);
        }
        table
    }

    fn shattering_witnesses(&self, set: &[usize]) -> Option<BTreeMap<u64, usize>> {
        let table = self.witness_table(set);
        table
            .into_iter()
            .enumerate()
            .map(|(mask, w)| w.map(|c| (mask as u64, c)))
            .collect()
    }

    pub fn shatters(&self, set: &[usize]) -> bool {
        set.len() <= MAX_CERT_SIZE
            && set.iter().all(|&p| p < self.universe)
            && self.witness_table(set).iter().all(Option::is_some)
    }
}

/// `tau`, `alpha` and the search cap for a dimension computation.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct DimensionQuery {
    pub tau: Rational,
    pub alpha: Rational,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub cap: Option<usize>,
}

impl DimensionQuery {
    /// Requires `0 <= alpha < tau <= 1`.
    pub fn new(tau: Rational, alpha: Rational) -> Result<Self> {
        if alpha.is_negative() || alpha >= tau || tau > 1 {
            return Err(Error::precondition(format!(
                "need 0 <= alpha < tau <= 1, got tau = {tau}, alpha = {alpha}"
            )));
        }
        Ok(DimensionQuery {
            tau,
            alpha,
            cap: None,
        })
    }

    pub fn with_cap(mut self, cap: usize) -> Self {
        self.cap = Some(cap);
        self
    }

    pub fn low_threshold(&self) -> Rational {
        &self.tau - &self.alpha
    }

    fn size_cap(&self) -> usize {
        self.cap.unwrap_or(DEFAULT_SIZE_CAP)
    }
}

/// A shattered set plus one witness per subset mask.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ShatteringCertificate {
    #[serde(rename = "S")]
    pub set: Vec<usize>,
    pub witnesses: BTreeMap<u64, usize>,
}

/// Outcome of a dimension search. `exact == false` means the search stopped at
/// its size cap and `dimension` is only a lower bound.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct DimensionResult {
    pub dimension: usize,
    pub certificate: ShatteringCertificate,
    pub exact: bool,
}

/// `f_h(D)`: `1` if `err_D(h) > tau`, `0` if `err_D(h) < tau - alpha`, unknown otherwise.
pub fn induce_partial_class(
    hc: &HypothesisClass,
    g: &DomainFamily,
    q: &DimensionQuery,
) -> Result<PartialConceptClass> {
    Error::check_space(g.space().size(), hc.space().size())?;
    let low = q.low_threshold();
    let concepts = hc
        .members()
        .iter()
        .map(|h| {
            g.domains()
                .iter()
                .map(|d| {
                    let e = d.error_unchecked(h);
                    if e > q.tau {
                        PartialLabel::One
                    } else if e < low {
                        PartialLabel::Zero
                    } else {
                        PartialLabel::Unknown
                    }
                })
                .collect()
        })
        .collect();
    PartialConceptClass::new(g.len(), concepts)
}

/// VC dimension with the default size cap.
pub fn partial_vc_dim(f: &PartialConceptClass) -> DimensionResult {
    partial_vc_dim_capped(f, DEFAULT_SIZE_CAP)
}

/// Level-wise search: size-`s+1` candidates are built only from shattered
/// size-`s` sets whose every size-`s` subset is also shattered. The first
/// shattered set of the largest size in lexicographic order is returned.
pub fn partial_vc_dim_capped(f: &PartialConceptClass, cap: usize) -> DimensionResult {
    let cap = cap.min(MAX_CERT_SIZE);
    let n_concepts = f.concepts.len();
    let empty_cert = ShatteringCertificate {
        set: vec![],
        witnesses: if n_concepts > 0 {
            BTreeMap::from([(0, 0)])
        } else {
            BTreeMap::new()
        },
    };
    if n_concepts == 0 {
        return DimensionResult {
            dimension: 0,
            certificate: empty_cert,
            exact: true,
        };
    }
    // 2^|S| distinct witnesses are needed
    let log_bound = usize::BITS as usize - 1 - n_concepts.leading_zeros() as usize;
    let ceiling = log_bound.min(f.universe);

    let points: Vec<usize> = (0..f.universe).filter(|&p| f.shatters(&[p])).collect();
    let mut level: Vec<Vec<usize>> = if cap == 0 {
        vec![]
    } else {
        points.iter().map(|&p| vec![p]).collect()
    };
    if level.is_empty() {
        return DimensionResult {
            dimension: 0,
            certificate: empty_cert,
            exact: cap > 0 || points.is_empty(),
        };
    }
    let mut size = 1;
    while size < ceiling && size < cap {
        let members: HashSet<&[usize]> = level.iter().map(Vec::as_slice).collect();
        let mut next = Vec::new();
        let mut scratch = Vec::with_capacity(size);
        for set in &level {
            let last = *set.last().expect("non-empty");
            for &p in points.iter().filter(|&&p| p > last) {
                let mut candidate = set.clone();
                candidate.push(p);
                let closed = (0..size).all(|skip| {
                    scratch.clear();
                    scratch.extend(
                        candidate
                            .iter()
                            .enumerate()
                            .filter(|&(j, _)| j != skip)
                            .map(|(_, &x)| x),
                    );
                    members.contains(scratch.as_slice())
                });
                if closed && f.shatters(&candidate) {
                    next.push(candidate);
                }
            }
        }
        if next.is_empty() {
            break;
        }
        level = next;
        size += 1;
    }
    let exact = !(size == cap && cap < ceiling);
    let set = level.swap_remove(0);
    let witnesses = f
        .shattering_witnesses(&set)
        .expect("level sets are shattered");
    DimensionResult {
        dimension: size,
        certificate: ShatteringCertificate { set, witnesses },
        exact,
    }
}

/// `Gdim(H, G, tau, alpha)` with a maximum certificate over domain indices.
pub fn gdim(hc: &HypothesisClass, g: &DomainFamily, q: &DimensionQuery) -> Result<DimensionResult> {
    let f = induce_partial_class(hc, g, q)?;
    Ok(partial_vc_dim_capped(&f, q.size_cap()))
}

/// VC dimension of a total class.
pub fn vc_dim(hc: &HypothesisClass) -> DimensionResult {
    partial_vc_dim(&PartialConceptClass::from_total(hc))
}

/// Checks every `(E, h_E)` pair against both strict inequalities.
///
/// Out-of-range indices are a structural error; duplicate domains or a
/// missing witness make the certificate invalid.
pub fn verify_certificate(
    cert: &ShatteringCertificate,
    hc: &HypothesisClass,
    g: &DomainFamily,
    q: &DimensionQuery,
) -> Result<bool> {
    Error::check_space(g.space().size(), hc.space().size())?;
    for &i in &cert.set {
        g.get(i)?;
    }
    for &h in cert.witnesses.values() {
        hc.get(h)?;
    }
    let s = cert.set.len();
    if s > MAX_CERT_SIZE {
        return Ok(false);
    }
    let distinct: HashSet<usize> = cert.set.iter().copied().collect();
    if distinct.len() != s {
        return Ok(false);
    }
    let low = q.low_threshold();
    for mask in 0..(1u64 << s) {
        let Some(&w) = cert.witnesses.get(&mask) else {
            return Ok(false);
        };
        let h = &hc.members()[w];
        for (j, &di) in cert.set.iter().enumerate() {
            let e = g.domains()[di].error_unchecked(h);
            let ok = if mask >> j & 1 == 1 {
                e < low
            } else {
                e > q.tau
            };
            if !ok {
                return Ok(false);
            }
        }
    }
    Ok(true)
}

/// Number of distinct restrictions of `hc` to `subset`.
pub fn restriction_count(hc: &HypothesisClass, subset: &[usize]) -> Result<usize> {
    if subset.is_empty() {
        return Err(Error::precondition("restriction to an empty subset"));
    }
    let n = hc.space().size();
    if let Some(&bad) = subset.iter().find(|&&x| x >= n) {
        return Err(Error::IndexOutOfRange {
            what: "instance",
            index: bad,
            len: n,
        });
    }
    let patterns: HashSet<Vec<bool>> = hc
        .members()
        .iter()
        .map(|h| subset.iter().map(|&x| h.label(x)).collect())
        .collect();
    Ok(patterns.len())
}

/// `(e n / d)^d`, taken as `1` when `d = 0`.
pub fn sauer_bound(n: usize, d: usize) -> f64 {
    if d == 0 {
        1.0
    } else {
        (std::f64::consts::E * n as f64 / d as f64).powi(d as i32)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{Hypothesis, InstanceSpace, LabeledDistribution};
    use crate::rational::q;
    use PartialLabel::*;

    fn threshold_class(m: usize) -> HypothesisClass {
        // h_i = 1[x >= i] on {0..m}, i = 1..m
        let s = InstanceSpace::new(m + 1).unwrap();
        HypothesisClass::new(
            s,
            (1..=m)
                .map(|i| Hypothesis::from_fn(s, |x| x >= i))
                .collect(),
        )
        .unwrap()
    }

    /// Two hypotheses with errors 1/10 and 9/10 on one domain.
    fn one_domain_pair() -> (HypothesisClass, DomainFamily) {
        let s = InstanceSpace::new(2).unwrap();
        let d = LabeledDistribution::from_merged(s, [(0, true, q(1, 10)), (1, false, q(9, 10))])
            .unwrap();
        let ha = Hypothesis::new(vec![false, false]);
        let hb = Hypothesis::new(vec![true, true]);
        let hc = HypothesisClass::new(s, vec![ha, hb]).unwrap();
        (hc, DomainFamily::new(s, vec![d]).unwrap())
    }

    #[test]
    fn query_validation() {
        assert!(DimensionQuery::new(q(3, 10), q(1, 10)).is_ok());
        assert!(DimensionQuery::new(q(3, 10), Rational::zero()).is_ok());
        assert!(DimensionQuery::new(q(3, 10), q(3, 10)).is_err());
        assert!(DimensionQuery::new(q(3, 10), q(-1, 10)).is_err());
        assert!(DimensionQuery::new(q(11, 10), q(1, 10)).is_err());
    }

    #[test]
    fn boundary_error_is_unknown() {
        let s = InstanceSpace::new(2).unwrap();
        let d = LabeledDistribution::from_merged(s, [(0, true, q(3, 10)), (1, false, q(7, 10))])
            .unwrap();
        let hc = HypothesisClass::new(s, vec![Hypothesis::new(vec![false, false])]).unwrap();
        let g = DomainFamily::new(s, vec![d]).unwrap();
        let f = induce_partial_class(&hc, &g, &DimensionQuery::new(q(3, 10), q(0, 1)).unwrap())
            .unwrap();
        assert_eq!(f.value(0, 0), Unknown);
    }

    #[test]
    fn two_hypothesis_pattern_and_gdim() {
        let (hc, g) = one_domain_pair();
        let qy = DimensionQuery::new(q(3, 10), q(1, 10)).unwrap();
        let f = induce_partial_class(&hc, &g, &qy).unwrap();
        assert_eq!(f.concepts(), &[vec![Zero], vec![One]]);
        let r = gdim(&hc, &g, &qy).unwrap();
        assert_eq!(r.dimension, 1);
        assert!(r.exact);
        assert_eq!(r.certificate.set, vec![0]);
        assert_eq!(r.certificate.witnesses, BTreeMap::from([(0, 1), (1, 0)]));
        assert!(verify_certificate(&r.certificate, &hc, &g, &qy).unwrap());
    }

    #[test]
    fn swapped_witness_fails_verification() {
        let (hc, g) = one_domain_pair();
        let qy = DimensionQuery::new(q(3, 10), q(1, 10)).unwrap();
        let mut cert = gdim(&hc, &g, &qy).unwrap().certificate;
        cert.witnesses.insert(0, 0);
        assert!(!verify_certificate(&cert, &hc, &g, &qy).unwrap());
        cert.witnesses.remove(&0);
        assert!(!verify_certificate(&cert, &hc, &g, &qy).unwrap());
        let dup = ShatteringCertificate {
            set: vec![0, 0],
            witnesses: BTreeMap::new(),
        };
        assert!(!verify_certificate(&dup, &hc, &g, &qy).unwrap());
        let oob = ShatteringCertificate {
            set: vec![3],
            witnesses: BTreeMap::new(),
        };
        assert!(verify_certificate(&oob, &hc, &g, &qy).is_err());
    }

    #[test]
    fn single_hypothesis_has_gdim_zero() {
        let (hc, g) = one_domain_pair();
        let single = HypothesisClass::new(hc.space(), vec![hc.members()[0].clone()]).unwrap();
        let qy = DimensionQuery::new(q(3, 10), q(1, 10)).unwrap();
        assert_eq!(gdim(&single, &g, &qy).unwrap().dimension, 0);
    }

    #[test]
    fn single_concept_vc_zero() {
        let f = PartialConceptClass::new(3, vec![vec![Zero, One, Unknown]]).unwrap();
        let r = partial_vc_dim(&f);
        assert_eq!(r.dimension, 0);
        assert!(r.certificate.set.is_empty());
    }

    #[test]
    fn empty_class_vc_zero() {
        let f = PartialConceptClass::new(3, vec![]).unwrap();
        let r = partial_vc_dim(&f);
        assert_eq!(r.dimension, 0);
        assert!(r.certificate.witnesses.is_empty());
    }

    #[test]
    fn thresholds_have_vc_one() {
        assert_eq!(vc_dim(&threshold_class(1)).dimension, 0);
        for m in [2, 5, 9] {
            assert_eq!(vc_dim(&threshold_class(m)).dimension, 1, "m = {m}");
        }
    }

    #[test]
    fn all_labelings_shatter_everything() {
        let s = InstanceSpace::new(4).unwrap();
        let members = (0..16u32)
            .map(|b| Hypothesis::from_fn(s, |x| b >> x & 1 == 1))
            .collect();
        let hc = HypothesisClass::new(s, members).unwrap();
        let r = vc_dim(&hc);
        assert_eq!(r.dimension, 4);
        assert_eq!(r.certificate.witnesses.len(), 16);
    }

    #[test]
    fn cap_yields_lower_bound() {
        let s = InstanceSpace::new(4).unwrap();
        let members = (0..16u32)
            .map(|b| Hypothesis::from_fn(s, |x| b >> x & 1 == 1))
            .collect();
        let hc = HypothesisClass::new(s, members).unwrap();
        let r = partial_vc_dim_capped(&PartialConceptClass::from_total(&hc), 2);
        assert_eq!(r.dimension, 2);
        assert!(!r.exact);
        let r = partial_vc_dim_capped(&PartialConceptClass::from_total(&hc), 4);
        assert!(r.exact);
    }

    #[test]
    fn restriction_counts() {
        let hc = threshold_class(3);
        assert_eq!(restriction_count(&hc, &[0, 1, 2, 3]).unwrap(), 3);
        assert_eq!(restriction_count(&hc, &[0]).unwrap(), 1);
        assert!(restriction_count(&hc, &[]).is_err());
        assert!(restriction_count(&hc, &[4]).is_err());
        let one = HypothesisClass::new(hc.space(), vec![hc.members()[0].clone()]).unwrap();
        assert_eq!(restriction_count(&one, &[0, 1, 2]).unwrap(), 1);
    }

    #[test]
    fn sauer_bound_values() {
        assert_eq!(sauer_bound(5, 0), 1.0);
        assert!((sauer_bound(4, 1) - 4.0 * std::f64::consts::E).abs() < 1e-12);
    }
}
