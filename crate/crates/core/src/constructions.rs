//! Explicit generators: the odd/even threshold distribution, the large
//! shattered family over thresholds, its product lift, the flipped
//! lower-bound family and the adversarial meta-distributions over it.

use crate::dimensions::{verify_certificate, DimensionQuery, ShatteringCertificate};
use crate::error::{Error, Result};
use crate::model::{
    domain_error, flip_labels, mix, DomainFamily, Hypothesis, HypothesisClass, InstanceSpace,
    LabeledDistribution, MetaDistribution,
};
use crate::rational::{q, Rational};

/// Largest `k` the large-k generator will emit (`2^k` hypotheses).
pub const MAX_K: u32 = 12;

/// Default limit on `K^d` for the product lift.
pub const DEFAULT_PRODUCT_CAP: usize = 1 << 16;

/// Thresholds `h_i(x) = 1[x >= i]` for `i = 1..=cutoff`; member `i - 1` is `h_i`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct ThresholdSlice {
    pub cutoff: usize,
    pub space: InstanceSpace,
}

impl ThresholdSlice {
    pub fn new(cutoff: usize, space: InstanceSpace) -> Result<Self> {
        if cutoff == 0 || cutoff >= space.size() {
            return Err(Error::precondition(format!(
                "threshold cutoff {cutoff} needs a space larger than itself, got {}",
                space.size()
            )));
        }
        Ok(ThresholdSlice { cutoff, space })
    }

    pub fn hypothesis(&self, i: usize) -> Hypothesis {
        Hypothesis::from_fn(self.space, |x| x >= i)
    }

    pub fn class(&self) -> HypothesisClass {
        let members = (1..=self.cutoff).map(|i| self.hypothesis(i)).collect();
        HypothesisClass::new(self.space, members).expect("thresholds are distinct")
    }
}

/// The odd/even distribution placed on an increasing list of instances.
///
/// `points[0]` gets mass 1/2 with `P[y = 1] = 1/10`; `points[t]` for
/// `t = 1..=m` gets mass `1/(2m)` and label `t mod 2`. `m` must be odd.
fn odd_even_on(space: InstanceSpace, points: &[usize]) -> Result<LabeledDistribution> {
    let m = points.len() - 1;
    debug_assert!(m % 2 == 1);
    let each = Rational::new(1, 2 * m as i64);
    let entries = [(points[0], false, q(9, 20)), (points[0], true, q(1, 20))]
        .into_iter()
        .chain(
            points[1..]
                .iter()
                .enumerate()
                .map(|(t, &x)| (x, t % 2 == 0, each.clone())),
        );
    LabeledDistribution::from_merged(space, entries)
}

/// Domain over `{0..m}` on which odd thresholds have error `3/10 - 1/(4m)`
/// and even thresholds `3/10 + 1/(4m)`.
pub fn odd_even_domain(m: usize) -> Result<(LabeledDistribution, ThresholdSlice)> {
    if m.is_multiple_of(2) {
        return Err(Error::precondition(format!(
            "odd/even domain needs odd positive m, got {m}"
        )));
    }
    let space = InstanceSpace::new(m + 1)?;
    let points: Vec<usize> = (0..=m).collect();
    Ok((odd_even_on(space, &points)?, ThresholdSlice::new(m, space)?))
}

/// `k` domains over `{0..K+1}`, `K = 2^k`, shattered at `(3/10, alpha)` by
/// `h_1..h_K`: `h_i` has error `< 3/10 - alpha` on `D_j` iff `j ∈ E_i`.
#[derive(Clone, Debug)]
pub struct LargeKFamily {
    pub alpha: Rational,
    pub k: usize,
    pub cutoff: usize,
    pub slice: ThresholdSlice,
    pub family: DomainFamily,
    /// `E_i` as a k-bit mask (bit `j` set iff domain `j ∈ E_i`), index `i - 1`.
    pub subsets: Vec<u64>,
    /// Block ends `x_0 = 0 < x_1 < ... < x_m = K` for each domain.
    pub boundaries: Vec<Vec<usize>>,
}

impl LargeKFamily {
    pub fn class(&self) -> HypothesisClass {
        self.slice.class()
    }

    /// Witness `h_i` for `E_i` over `S = {0..k}`.
    pub fn certificate(&self) -> ShatteringCertificate {
        ShatteringCertificate {
            set: (0..self.k).collect(),
            witnesses: self
                .subsets
                .iter()
                .enumerate()
                .map(|(i, &mask)| (mask, i))
                .collect(),
        }
    }

    pub fn query(&self) -> DimensionQuery {
        DimensionQuery::new(q(3, 10), self.alpha.clone()).expect("alpha < 1/12")
    }

    /// `1/(4m')` for each domain, the margin of its odd/even embedding.
    pub fn margins(&self) -> Vec<Rational> {
        self.boundaries
            .iter()
            .map(|b| {
                let m = b.len() - 1;
                let padded = if m % 2 == 1 { m } else { m + 1 };
                Rational::new(1, 4 * padded as i64)
            })
            .collect()
    }
}

/// Largest `k` with `2^(k+2) + 4 < 1/alpha`.
pub fn large_k_size(alpha: &Rational) -> Result<usize> {
    if !alpha.is_positive() || alpha >= &q(1, 12) {
        return Err(Error::precondition(format!(
            "large-k family needs 0 < alpha < 1/12, got {alpha}"
        )));
    }
    let fits = |k: u32| Rational::from_integer((1i64 << (k + 2)) + 4) * alpha < Rational::one();
    let mut k = 1;
    while fits(k + 1) {
        k += 1;
        if k > MAX_K {
            return Err(Error::CapExceeded(format!(
                "alpha = {alpha} gives k > {MAX_K}"
            )));
        }
    }
    Ok(k as usize)
}

pub fn large_k_family(alpha: &Rational) -> Result<LargeKFamily> {
    let k = large_k_size(alpha)?;
    let cutoff = 1usize << k;
    let space = InstanceSpace::new(cutoff + 2)?;
    let slice = ThresholdSlice::new(cutoff, space)?;
    let full = (cutoff - 1) as u64;
    let subsets: Vec<u64> = std::iter::once(full).chain(0..full).collect();

    let mut domains = Vec::with_capacity(k);
    let mut boundaries = Vec::with_capacity(k);
    for j in 0..k {
        let member = |i: usize| subsets[i - 1] >> j & 1 == 1;
        // x_l is the last index of each maximal run of equal membership
        let mut ends = vec![0];
        for i in 1..=cutoff {
            if i == cutoff || member(i) != member(i + 1) {
                ends.push(i);
            }
        }
        let mut points = ends.clone();
        if (points.len() - 1) % 2 == 0 {
            points.push(cutoff + 1);
        }
        domains.push(odd_even_on(space, &points)?);
        boundaries.push(ends);
    }
    Ok(LargeKFamily {
        alpha: alpha.clone(),
        k,
        cutoff,
        slice,
        family: DomainFamily::new(space, domains)?,
        subsets,
        boundaries,
    })
}

/// `d` disjoint copies of a large-k family over `[d] × {0..K+1}`.
#[derive(Clone, Debug)]
pub struct ProductFamily {
    pub copies: usize,
    pub base_k: usize,
    pub class: HypothesisClass,
    /// Domain `c * k + j` is `D_j` placed on copy `c`.
    pub family: DomainFamily,
    pub certificate: ShatteringCertificate,
}

pub fn product_family(base: &LargeKFamily, d: usize, cap: usize) -> Result<ProductFamily> {
    if d == 0 {
        return Err(Error::precondition("product needs d >= 1"));
    }
    let kk = base.cutoff;
    let size = (0..d).try_fold(1usize, |acc, _| acc.checked_mul(kk));
    let size = match size {
        Some(s) if s <= cap => s,
        _ => {
            return Err(Error::CapExceeded(format!(
                "product class has {kk}^{d} members, cap is {cap}"
            )))
        }
    };
    let width = base.slice.space.size();
    let space = InstanceSpace::new(d * width)?;

    let digits = |mut t: usize| {
        let mut out = vec![0; d];
        for c in (0..d).rev() {
            out[c] = t % kk;
            t /= kk;
        }
        out
    };
    let members = (0..size)
        .map(|t| {
            let th = digits(t);
            Hypothesis::from_fn(space, |z| z % width > th[z / width])
        })
        .collect();
    let class = HypothesisClass::new(space, members)?;

    let mut domains = Vec::with_capacity(d * base.k);
    for c in 0..d {
        for dj in base.family.domains() {
            domains.push(LabeledDistribution::from_merged(
                space,
                dj.atoms()
                    .iter()
                    .map(|a| (c * width + a.x, a.y, a.mass.clone())),
            )?);
        }
    }
    let family = DomainFamily::new(space, domains)?;

    let base_cert = base.certificate();
    let k = base.k;
    let sub = (1u64 << k) - 1;
    let witnesses = (0..1u64 << (k * d))
        .map(|mask| {
            let t = (0..d).fold(0usize, |acc, c| {
                acc * kk + base_cert.witnesses[&(mask >> (c * k) & sub)]
            });
            (mask, t)
        })
        .collect();
    Ok(ProductFamily {
        copies: d,
        base_k: k,
        class,
        family,
        certificate: ShatteringCertificate {
            set: (0..k * d).collect(),
            witnesses,
        },
    })
}

/// Point mass on the lowest instance where every member of `hc` agrees,
/// labeled with that shared value.
pub fn clean_domain(hc: &HypothesisClass) -> Result<LabeledDistribution> {
    let first = hc
        .members()
        .first()
        .ok_or_else(|| Error::precondition("clean domain of an empty class"))?;
    let x = (0..hc.space().size())
        .find(|&x| hc.members().iter().all(|h| h.label(x) == first.label(x)))
        .ok_or_else(|| Error::Construction("no instance where the whole class agrees".into()))?;
    LabeledDistribution::point(hc.space(), x, first.label(x))
}

/// `G' = G ∪ {D_0, D'_1, ..., D'_d}` with `D'_i = (1 - λ) D_0 + λ ¬D_i`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct LowerBoundFamily {
    pub base: DomainFamily,
    pub clean: LabeledDistribution,
    pub shattered: Vec<usize>,
    pub tau: Rational,
    pub alpha: Rational,
    pub lambda: Rational,
    pub flipped: Vec<LabeledDistribution>,
    /// Base domains, then `D_0`, then `D'_1..D'_d`.
    pub extended: DomainFamily,
}

impl LowerBoundFamily {
    pub fn d(&self) -> usize {
        self.shattered.len()
    }

    /// `λ/(1+λ)`, below which no hypothesis can sit on both `D_i` and `D'_i`.
    pub fn pair_floor(&self) -> Rational {
        &self.lambda / (Rational::one() + &self.lambda)
    }

    /// Default test threshold `λ/(1+λ) - 1/1000`.
    pub fn default_tau_prime(&self) -> Rational {
        self.pair_floor() - q(1, 1000)
    }

    pub fn clean_index(&self) -> usize {
        self.base.len()
    }

    pub fn flipped_index(&self, i: usize) -> usize {
        self.base.len() + 1 + i
    }
}

/// `(tau - alpha) / (1 - tau)`.
pub fn flip_weight(tau: &Rational, alpha: &Rational) -> Result<Rational> {
    if alpha.is_negative() || alpha >= tau || tau > &q(1, 2) {
        return Err(Error::precondition(format!(
            "need 0 <= alpha < tau <= 1/2, got tau = {tau}, alpha = {alpha}"
        )));
    }
    Ok((tau - alpha) / tau.complement())
}

/// Flipped extension over arbitrary `indices`, without requiring them to be
/// shattered. The flip relations hold for any base domains.
pub fn flip_extension(
    hc: &HypothesisClass,
    g: &DomainFamily,
    d0: &LabeledDistribution,
    indices: &[usize],
    tau: &Rational,
    alpha: &Rational,
) -> Result<LowerBoundFamily> {
    Error::check_space(g.space().size(), hc.space().size())?;
    Error::check_space(g.space().size(), d0.space().size())?;
    let lambda = flip_weight(tau, alpha)?;
    for (i, h) in hc.members().iter().enumerate() {
        if !domain_error(h, d0)?.is_zero() {
            return Err(Error::precondition(format!(
                "clean domain has positive error for hypothesis {i}"
            )));
        }
    }
    let flipped = indices
        .iter()
        .map(|&i| mix(d0, &flip_labels(g.get(i)?), &lambda))
        .collect::<Result<Vec<_>>>()?;
    let extended = DomainFamily::new(
        g.space(),
        g.domains()
            .iter()
            .cloned()
            .chain(std::iter::once(d0.clone()))
            .chain(flipped.iter().cloned())
            .collect(),
    )?;
    Ok(LowerBoundFamily {
        base: g.clone(),
        clean: d0.clone(),
        shattered: indices.to_vec(),
        tau: tau.clone(),
        alpha: alpha.clone(),
        lambda,
        flipped,
        extended,
    })
}

/// The lower-bound extension over a verified shattering certificate.
pub fn lower_bound_family(
    hc: &HypothesisClass,
    g: &DomainFamily,
    d0: &LabeledDistribution,
    cert: &ShatteringCertificate,
    tau: &Rational,
    alpha: &Rational,
) -> Result<LowerBoundFamily> {
    flip_weight(tau, alpha)?;
    let query = DimensionQuery::new(tau.clone(), alpha.clone())?;
    if !verify_certificate(cert, hc, g, &query)? {
        return Err(Error::precondition(format!(
            "certificate does not shatter {:?} at tau = {tau}, alpha = {alpha}",
            cert.set
        )));
    }
    flip_extension(hc, g, d0, &cert.set, tau, alpha)
}

/// `P_b`: `1 - 4γ` on `D_0`, `4γ/d` on each `D_i` (`b_i = 0`) or `D'_i` (`b_i = 1`).
///
/// The result's family is `[D_0, D̄_1, ..., D̄_d]`.
pub fn adversarial_meta(
    lbf: &LowerBoundFamily,
    b: &[bool],
    gamma: &Rational,
) -> Result<MetaDistribution> {
    if !gamma.is_positive() || gamma >= &q(1, 8) {
        return Err(Error::precondition(format!(
            "adversarial meta-distribution needs 0 < gamma < 1/8, got {gamma}"
        )));
    }
    let d = lbf.d();
    if d == 0 {
        return Err(Error::precondition(
            "lower-bound family has no shattered domains",
        ));
    }
    if b.len() != d {
        return Err(Error::precondition(format!(
            "bit vector has length {}, family has d = {d}",
            b.len()
        )));
    }
    let four_gamma = Rational::from_integer(4) * gamma;
    let each = &four_gamma / Rational::from_integer(d as i64);
    let mut domains = vec![lbf.clean.clone()];
    let mut weights = vec![four_gamma.complement()];
    for (i, &bit) in b.iter().enumerate() {
        domains.push(if bit {
            lbf.flipped[i].clone()
        } else {
            lbf.base.domains()[lbf.shattered[i]].clone()
        });
        weights.push(each.clone());
    }
    MetaDistribution::new(DomainFamily::new(lbf.base.space(), domains)?, weights)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dimensions::{gdim, vc_dim};

    #[test]
    fn odd_even_rejects_even() {
        assert!(odd_even_domain(0).is_err());
        assert!(odd_even_domain(4).is_err());
    }

    #[test]
    fn odd_even_m1_and_m3() {
        let (d, slice) = odd_even_domain(1).unwrap();
        assert_eq!(domain_error(&slice.hypothesis(1), &d).unwrap(), q(1, 20));
        let (d, slice) = odd_even_domain(3).unwrap();
        let errs: Vec<Rational> = slice
            .class()
            .members()
            .iter()
            .map(|h| domain_error(h, &d).unwrap())
            .collect();
        assert_eq!(errs, vec![q(13, 60), q(23, 60), q(13, 60)]);
        let total: Rational = d.atoms().iter().map(|a| &a.mass).sum();
        assert_eq!(total, Rational::one());
    }

    #[test]
    fn large_k_sizes() {
        assert_eq!(large_k_size(&q(1, 50)).unwrap(), 3);
        assert_eq!(large_k_size(&q(1, 100)).unwrap(), 4);
        assert_eq!(large_k_size(&q(1, 200)).unwrap(), 5);
        assert_eq!(large_k_size(&q(1, 13)).unwrap(), 1);
        assert!(large_k_size(&q(1, 12)).is_err());
        assert!(large_k_size(&Rational::zero()).is_err());
        assert!(large_k_size(&q(1, 1 << 20)).is_err());
    }

    #[test]
    fn large_k_first_subset_is_full() {
        let fam = large_k_family(&q(1, 50)).unwrap();
        assert_eq!(fam.subsets[0], 0b111);
        assert_eq!(&fam.subsets[1..], &[0, 1, 2, 3, 4, 5, 6]);
        assert_eq!(fam.cutoff, 8);
        assert_eq!(fam.family.space().size(), 10);
    }

    #[test]
    fn large_k_certificate_verifies() {
        for den in [50, 100] {
            let fam = large_k_family(&q(1, den)).unwrap();
            let cert = fam.certificate();
            assert!(verify_certificate(&cert, &fam.class(), &fam.family, &fam.query()).unwrap());
        }
    }

    #[test]
    fn product_of_one_matches_base() {
        let base = large_k_family(&q(1, 50)).unwrap();
        let p = product_family(&base, 1, DEFAULT_PRODUCT_CAP).unwrap();
        assert_eq!(p.class, base.class());
        assert_eq!(p.family, base.family);
        assert_eq!(p.certificate, base.certificate());
    }

    #[test]
    fn product_cap_enforced() {
        let base = large_k_family(&q(1, 50)).unwrap();
        assert!(matches!(
            product_family(&base, 3, 100),
            Err(Error::CapExceeded(_))
        ));
        assert!(product_family(&base, 0, 100).is_err());
    }

    #[test]
    fn product_of_two() {
        let base = large_k_family(&q(1, 50)).unwrap();
        let p = product_family(&base, 2, DEFAULT_PRODUCT_CAP).unwrap();
        assert_eq!(p.family.len(), 6);
        assert_eq!(p.class.space().size(), 20);
        assert!(verify_certificate(&p.certificate, &p.class, &p.family, &base.query()).unwrap());
        assert_eq!(
            gdim(&p.class, &p.family, &base.query()).unwrap().dimension,
            6
        );
        assert_eq!(vc_dim(&p.class).dimension, 2);
    }

    #[test]
    fn clean_domain_finds_unanimous_point() {
        let fam = large_k_family(&q(1, 50)).unwrap();
        let d0 = clean_domain(&fam.class()).unwrap();
        assert_eq!(d0.support(), vec![0]);
        assert!(!d0.atoms()[0].y);
        let s = InstanceSpace::new(1).unwrap();
        let split = HypothesisClass::new(
            s,
            vec![Hypothesis::new(vec![true]), Hypothesis::new(vec![false])],
        )
        .unwrap();
        assert!(clean_domain(&split).is_err());
    }

    #[test]
    fn flip_weight_values() {
        assert_eq!(flip_weight(&q(3, 10), &q(1, 10)).unwrap(), q(2, 7));
        assert!(flip_weight(&q(3, 5), &q(1, 10)).is_err());
        assert!(flip_weight(&q(3, 10), &q(3, 10)).is_err());
    }

    #[test]
    fn lower_bound_rejects_dirty_clean_domain() {
        let fam = large_k_family(&q(1, 50)).unwrap();
        let dirty = LabeledDistribution::point(fam.family.space(), 5, false).unwrap();
        let err = lower_bound_family(
            &fam.class(),
            &fam.family,
            &dirty,
            &fam.certificate(),
            &q(3, 10),
            &q(1, 50),
        )
        .unwrap_err();
        assert!(err.to_string().contains("hypothesis"), "{err}");
    }

    #[test]
    fn lower_bound_rejects_invalid_certificate() {
        let fam = large_k_family(&q(1, 50)).unwrap();
        let d0 = clean_domain(&fam.class()).unwrap();
        // the certificate only holds at alpha = 1/50
        assert!(lower_bound_family(
            &fam.class(),
            &fam.family,
            &d0,
            &fam.certificate(),
            &q(3, 10),
            &q(1, 10)
        )
        .is_err());
    }

    #[test]
    fn adversarial_weights() {
        let fam = large_k_family(&q(1, 100)).unwrap();
        let d0 = clean_domain(&fam.class()).unwrap();
        let lbf = lower_bound_family(
            &fam.class(),
            &fam.family,
            &d0,
            &fam.certificate(),
            &q(3, 10),
            &q(1, 100),
        )
        .unwrap();
        let p = adversarial_meta(&lbf, &[false, true, false, true], &q(1, 20)).unwrap();
        assert_eq!(
            p.weights(),
            &[q(4, 5), q(1, 20), q(1, 20), q(1, 20), q(1, 20)]
        );
        assert_eq!(&p.family().domains()[2], &lbf.flipped[1]);
        assert_eq!(&p.family().domains()[1], &fam.family.domains()[0]);
        assert!(adversarial_meta(&lbf, &[false; 4], &q(1, 8)).is_err());
        assert!(adversarial_meta(&lbf, &[false; 3], &q(1, 20)).is_err());
    }

    #[test]
    fn adversarial_all_zero_bits_stays_in_base() {
        let fam = large_k_family(&q(1, 100)).unwrap();
        let d0 = clean_domain(&fam.class()).unwrap();
        let lbf = lower_bound_family(
            &fam.class(),
            &fam.family,
            &d0,
            &fam.certificate(),
            &q(3, 10),
            &q(1, 100),
        )
        .unwrap();
        let p = adversarial_meta(&lbf, &[false; 4], &q(1, 20)).unwrap();
        for d in p.family().domains() {
            assert!(d == &d0 || fam.family.domains().contains(d));
        }
    }
}
