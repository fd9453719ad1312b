use std::fmt;
use std::sync::Arc;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Zero};
use rand::{Rng, RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Exp1, StandardNormal};

use crate::combin::{integer, rational};
use crate::config::DistributionName;
use crate::error::{invalid, Error, Result};
use crate::scalar::Scalar;

/// Moments shipped with each built-in distribution.
pub const DEFAULT_MOMENT_ORDER: usize = 12;

/// Central moments `μ_1, …, μ_K` of the entry law, exact.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MomentProfile {
    moments: Vec<BigRational>,
}

impl MomentProfile {
    /// `moments[k-1] = μ_k`. Requires `μ1 = 0`, `μ2 = 1`, nonnegative even
    /// moments and `μ4 >= 1` when present.
    pub fn new(moments: Vec<BigRational>) -> Result<Self> {
        if moments.len() < 2 {
            return invalid("a moment profile needs at least μ1 and μ2");
        }
        if !moments[0].is_zero() || !moments[1].is_one() {
            return invalid(format!("need μ1 = 0 and μ2 = 1, got {} and {}", moments[0], moments[1]));
        }
        for (i, m) in moments.iter().enumerate() {
            if (i + 1) % 2 == 0 && *m < BigRational::zero() {
                return invalid(format!("even moment μ{} = {m} is negative", i + 1));
            }
        }
        if moments.len() >= 4 && moments[3] < BigRational::one() {
            return invalid(format!("μ4 = {} below 1", moments[3]));
        }
        Ok(Self { moments })
    }

    /// Standard normal: `μ_{2k} = (2k−1)!!`.
    pub fn gaussian(order: usize) -> Self {
        let moments = (1..=order)
            .map(|k| {
                if k % 2 == 1 {
                    BigRational::zero()
                } else {
                    integer((1..k).step_by(2).fold(BigInt::one(), |a, j| a * j))
                }
            })
            .collect();
        Self { moments }
    }

    /// ±1 with equal probability.
    pub fn rademacher(order: usize) -> Self {
        let moments = (1..=order)
            .map(|k| if k % 2 == 1 { BigRational::zero() } else { BigRational::one() })
            .collect();
        Self { moments }
    }

    /// Uniform on `[−√3, √3]`: `μ_{2k} = 3^k / (2k+1)`.
    pub fn uniform(order: usize) -> Self {
        let moments = (1..=order)
            .map(|k| {
                if k % 2 == 1 {
                    BigRational::zero()
                } else {
                    let h = (k / 2) as u32;
                    rational(num_traits::pow(BigInt::from(3), h as usize), 2 * h + 1)
                }
            })
            .collect();
        Self { moments }
    }

    /// `Exp(1) − 1`: central moments are the derangement numbers.
    pub fn shifted_exponential(order: usize) -> Self {
        let mut d = vec![BigInt::one(), BigInt::zero()];
        while d.len() <= order {
            let k = d.len();
            let next = (k - 1) * (&d[k - 1] + &d[k - 2]);
            d.push(next);
        }
        Self { moments: d[1..=order].iter().cloned().map(integer).collect() }
    }

    pub fn order(&self) -> usize {
        self.moments.len()
    }

    /// `μ_k`; `μ_0 = 1`.
    pub fn mu(&self, k: usize) -> Option<BigRational> {
        match k {
            0 => Some(BigRational::one()),
            k => self.moments.get(k - 1).cloned(),
        }
    }

    pub fn mu_ref(&self, k: usize) -> Option<&BigRational> {
        self.moments.get(k.checked_sub(1)?)
    }

    pub fn mu4(&self) -> Result<BigRational> {
        self.mu(4)
            .ok_or_else(|| Error::InvalidArgument("moment profile stops before μ4".into()))
    }

    pub fn as_f64(&self) -> Vec<f64> {
        self.moments.iter().map(Scalar::to_f64).collect()
    }
}

type SampleFn = dyn Fn(&mut dyn RngCore) -> f64 + Send + Sync;

/// User-supplied entry sampler.
#[derive(Clone)]
pub struct CustomSampler(pub Arc<SampleFn>);

impl fmt::Debug for CustomSampler {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("CustomSampler(..)")
    }
}

#[derive(Debug, Clone)]
pub enum DistributionKind {
    Builtin(DistributionName),
    Custom { name: String, sampler: CustomSampler },
}

/// A sampler together with the moments it promises.
#[derive(Debug, Clone)]
pub struct EntryDistribution {
    kind: DistributionKind,
    moments: MomentProfile,
}

impl EntryDistribution {
    pub fn builtin(name: DistributionName) -> Self {
        let k = DEFAULT_MOMENT_ORDER;
        let moments = match name {
            DistributionName::Gaussian => MomentProfile::gaussian(k),
            DistributionName::Rademacher => MomentProfile::rademacher(k),
            DistributionName::Uniform => MomentProfile::uniform(k),
            DistributionName::ShiftedExponential => MomentProfile::shifted_exponential(k),
        };
        Self { kind: DistributionKind::Builtin(name), moments }
    }

    /// A custom law; its declared moments are checked against `10⁶` draws
    /// before it is accepted.
    pub fn custom(
        name: impl Into<String>,
        sampler: impl Fn(&mut dyn RngCore) -> f64 + Send + Sync + 'static,
        moments: MomentProfile,
    ) -> Result<Self> {
        let dist = Self {
            kind: DistributionKind::Custom { name: name.into(), sampler: CustomSampler(Arc::new(sampler)) },
            moments,
        };
        check_declared_moments(&dist, 1_000_000, 0x5eed)?;
        Ok(dist)
    }

    pub fn kind(&self) -> &DistributionKind {
        &self.kind
    }

    pub fn name(&self) -> &str {
        match &self.kind {
            DistributionKind::Builtin(n) => n.as_str(),
            DistributionKind::Custom { name, .. } => name,
        }
    }

    pub fn moments(&self) -> &MomentProfile {
        &self.moments
    }

    pub fn draw<R: Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        match &self.kind {
            DistributionKind::Builtin(DistributionName::Gaussian) => rng.sample(StandardNormal),
            DistributionKind::Builtin(DistributionName::Rademacher) => {
                if rng.random_bool(0.5) {
                    1.0
                } else {
                    -1.0
                }
            }
            DistributionKind::Builtin(DistributionName::Uniform) => {
                let h = 3f64.sqrt();
                rng.random_range(-h..h)
            }
            DistributionKind::Builtin(DistributionName::ShiftedExponential) => {
                let e: f64 = rng.sample(Exp1);
                e - 1.0
            }
            DistributionKind::Custom { sampler, .. } => {
                let mut adapter = RngAdapter(rng);
                (sampler.0)(&mut adapter)
            }
        }
    }
}

struct RngAdapter<'a, R: ?Sized>(&'a mut R);

impl<R: RngCore + ?Sized> RngCore for RngAdapter<'_, R> {
    fn next_u32(&mut self) -> u32 {
        self.0.next_u32()
    }

    fn next_u64(&mut self) -> u64 {
        self.0.next_u64()
    }

    fn fill_bytes(&mut self, dst: &mut [u8]) {
        self.0.fill_bytes(dst)
    }
}

/// Independent generator for replicate `index` under `seed`.
pub fn replicate_rng(seed: u64, index: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(index);
    rng
}

/// `n` independent draws `x_1, …, x_n`.
pub fn sample_entries<R: Rng + ?Sized>(dist: &EntryDistribution, n: usize, rng: &mut R) -> Vec<f64> {
    (0..n).map(|_| dist.draw(rng)).collect()
}

/// Compare sample moments `m̂_k` of `draws` samples with the declared `μ_k`
/// for every `k` whose variance `μ_{2k} − μ_k²` is known; each must lie
/// within five standard errors.
pub fn check_declared_moments(dist: &EntryDistribution, draws: usize, seed: u64) -> Result<()> {
    let declared = dist.moments().as_f64();
    let kmax = declared.len() / 2;
    let mut rng = replicate_rng(seed, u64::MAX);
    let mut sums = vec![0.0f64; kmax];
    for _ in 0..draws {
        let x = dist.draw(&mut rng);
        let mut pw = 1.0;
        for s in sums.iter_mut() {
            pw *= x;
            *s += pw;
        }
    }
    let count = draws as f64;
    for k in 1..=kmax {
        let mean = sums[k - 1] / count;
        let mu_k = declared[k - 1];
        let var = (declared[2 * k - 1] - mu_k * mu_k).max(0.0);
        let se = (var / count).sqrt();
        let slack = 5.0 * se + 1e-9 * (1.0 + mu_k.abs());
        if (mean - mu_k).abs() > slack {
            return Err(Error::InvalidArgument(format!(
                "distribution {}: sample μ{k} = {mean:.6} vs declared {mu_k:.6} (tolerance {slack:.3e})",
                dist.name()
            )));
        }
    }
    Ok(())
}
