//! Seed derivation and exact inverse-CDF sampling over rational weights.

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::ToPrimitive;
use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::model::{LabeledDistribution, LabeledSample};
use crate::rational::Rational;

/// Default master seed when neither `--seed` nor `GENLAB_SEED` is given.
pub const DEFAULT_SEED: u64 = 20_240_601;

fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Stable hash of `(master, path...)`; independent of thread scheduling.
pub fn derive_seed(master: u64, path: &[u64]) -> u64 {
    path.iter().fold(splitmix64(master), |acc, &p| {
        splitmix64(acc ^ splitmix64(p.wrapping_add(0xD1B5_4A32_D192_ED03)))
    })
}

pub fn rng_from_seed(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

enum Cdf {
    /// Cumulative integer numerators over a common denominator.
    Exact { cumulative: Vec<u64>, total: u64 },
    /// Fallback when the common denominator overflows `u64`.
    Float { cumulative: Vec<f64> },
}

/// Inverse-CDF sampler over non-negative rational weights summing to 1.
///
/// When the weights share a denominator that fits in `u64` the draw is a
/// uniform integer below that denominator, so sampling is exact.
pub struct DiscreteSampler {
    cdf: Cdf,
}

impl DiscreteSampler {
    pub fn new<'a>(weights: impl IntoIterator<Item = &'a Rational>) -> Self {
        let weights: Vec<&Rational> = weights.into_iter().collect();
        assert!(!weights.is_empty(), "sampler needs at least one weight");
        let lcm = weights
            .iter()
            .fold(BigInt::from(1), |acc, w| acc.lcm(w.denom()));
        let numerators: Option<Vec<u64>> = weights
            .iter()
            .map(|w| (w.numer() * (&lcm / w.denom())).to_u64())
            .collect();
        let cdf = match (lcm.to_u64(), numerators) {
            (Some(total), Some(nums)) if total > 0 => {
                let cumulative = nums
                    .iter()
                    .scan(0u64, |acc, n| {
                        *acc += n;
                        Some(*acc)
                    })
                    .collect();
                Cdf::Exact { cumulative, total }
            }
            _ => {
                let cumulative = weights
                    .iter()
                    .scan(0f64, |acc, w| {
                        *acc += w.to_f64();
                        Some(*acc)
                    })
                    .collect();
                Cdf::Float { cumulative }
            }
        };
        DiscreteSampler { cdf }
    }

    pub fn is_exact(&self) -> bool {
        matches!(self.cdf, Cdf::Exact { .. })
    }

    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> usize {
        match &self.cdf {
            Cdf::Exact { cumulative, total } => {
                let u = rng.random_range(0..*total);
                cumulative.partition_point(|&c| c <= u)
            }
            Cdf::Float { cumulative } => {
                let last = *cumulative.last().expect("non-empty");
                let u = rng.random::<f64>() * last;
                cumulative
                    .partition_point(|&c| c <= u)
                    .min(cumulative.len() - 1)
            }
        }
    }
}

/// Sampler over the atoms of one domain.
pub struct DomainSampler<'a> {
    domain: &'a LabeledDistribution,
    inner: DiscreteSampler,
}

impl<'a> DomainSampler<'a> {
    pub fn new(domain: &'a LabeledDistribution) -> Self {
        let inner = DiscreteSampler::new(domain.atoms().iter().map(|a| &a.mass));
        DomainSampler { domain, inner }
    }

    pub fn draw<R: Rng + ?Sized>(&self, rng: &mut R) -> (usize, bool) {
        let a = &self.domain.atoms()[self.inner.sample(rng)];
        (a.x, a.y)
    }

    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R, m: usize) -> LabeledSample {
        LabeledSample::new((0..m).map(|_| self.draw(rng)))
    }
}
