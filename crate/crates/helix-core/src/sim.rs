//! Seeded Monte Carlo for the branching walk and the restarted critical
//! branching chain.
//!
//! Particles at one level are exchangeable, so the walk state is kept as a
//! histogram: position -> particle count. Splitting a level draws, for each
//! occupied position, how many of its 2c children step up — one binomial
//! draw — turning 2^n particles into O(n) state while staying exact in
//! distribution for every statistic reported here.

use std::collections::BTreeMap;

use serde::Serialize;
use statrs::distribution::{Binomial, ContinuousCDF, Discrete, DiscreteCDF, Normal};

use crate::error::{Error, Result};
use crate::numeric::{replica_seed, SplitMix64};

/// Exact binomial sampling is used up to this number of trials; beyond it a
/// normal approximation with continuity correction takes over (recorded in
/// the run metadata).
pub const EXACT_BINOMIAL_MAX: u128 = 1_000_000;

/// Particle counts of one level, keyed by position.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LevelHistogram {
    level: u32,
    counts: BTreeMap<i64, u128>,
}

impl LevelHistogram {
    /// Level 0: one particle at the origin.
    pub fn root() -> Self {
        let mut counts = BTreeMap::new();
        counts.insert(0, 1);
        LevelHistogram { level: 0, counts }
    }

    pub fn level(&self) -> u32 {
        self.level
    }

    pub fn counts(&self) -> &BTreeMap<i64, u128> {
        &self.counts
    }

    pub fn total(&self) -> u128 {
        self.counts.values().sum()
    }

    /// Maximum occupied position.
    pub fn max_position(&self) -> i64 {
        *self.counts.keys().next_back().unwrap()
    }

    /// Count at the maximum occupied position (the argmax count).
    pub fn argmax_count(&self) -> u128 {
        *self.counts.values().next_back().unwrap()
    }
}

/// Counters describing how the binomial sampler ran.
#[derive(Debug, Clone, Copy, Default, Serialize)]
pub struct SamplerEvents {
    pub exact_draws: u64,
    /// Draws that fell back to the normal approximation.
    pub normal_approx_draws: u64,
}

/// Split every particle of `h` into two children displaced +-1, the up-steps
/// drawn Binomial(2c, p) per position.
pub fn split_level(
    h: &LevelHistogram,
    p: f64,
    rng: &mut SplitMix64,
    events: &mut SamplerEvents,
) -> Result<LevelHistogram> {
    if !(0.0..=1.0).contains(&p) || p.is_nan() {
        return Err(Error::ProbabilityRange(p));
    }
    if h.level >= 127 {
        return Err(Error::LevelOverflow(h.level));
    }
    let mut counts: BTreeMap<i64, u128> = BTreeMap::new();
    for (&x, &c) in &h.counts {
        let children = 2 * c;
        let up = sample_binomial(children, p, rng, events);
        let down = children - up;
        if up > 0 {
            *counts.entry(x + 1).or_insert(0) += up;
        }
        if down > 0 {
            *counts.entry(x - 1).or_insert(0) += down;
        }
    }
    Ok(LevelHistogram {
        level: h.level + 1,
        counts,
    })
}

/// Binomial(n, p) draw via a single uniform.
///
/// Inverse-cdf semantics: the smallest k with F(k) >= u. Small n walks the
/// cdf from zero; larger n starts the walk at the mode with the cdf value
/// there taken from the regularized incomplete beta; n beyond
/// [`EXACT_BINOMIAL_MAX`] uses round(np + z sigma) with z the normal
/// quantile of u.
fn sample_binomial(n: u128, p: f64, rng: &mut SplitMix64, events: &mut SamplerEvents) -> u128 {
    if n == 0 || p <= 0.0 {
        if p >= 1.0 && n > 0 {
            return n;
        }
        return if p <= 0.0 { 0 } else { n };
    }
    if p >= 1.0 {
        return n;
    }
    let u = rng.next_f64();
    if n > EXACT_BINOMIAL_MAX {
        events.normal_approx_draws += 1;
        let nf = n as f64;
        let z = Normal::standard().inverse_cdf(u);
        let k = (nf * p + z * (nf * p * (1.0 - p)).sqrt() + 0.5).floor();
        return (k.max(0.0) as u128).min(n);
    }
    events.exact_draws += 1;
    let n64 = n as u64;
    let q = 1.0 - p;
    if n64 <= 64 {
        // walk the cdf from k = 0
        let mut pmf = q.powi(n64 as i32);
        let mut cdf = pmf;
        let mut k = 0u64;
        while cdf < u && k < n64 {
            pmf *= ((n64 - k) as f64 / (k + 1) as f64) * (p / q);
            cdf += pmf;
            k += 1;
        }
        return k as u128;
    }
    // mode-centered walk
    let dist = Binomial::new(p, n64).expect("validated parameters");
    let mode = (((n64 + 1) as f64) * p).floor().min(n64 as f64) as u64;
    let mut k = mode;
    let mut cdf = dist.cdf(mode);
    let mut pmf = dist.pmf(mode);
    if u <= cdf {
        // descend: stop at the smallest k with F(k) >= u
        while k > 0 {
            let below = cdf - pmf;
            if below < u {
                break;
            }
            cdf = below;
            pmf *= (k as f64 * q) / ((n64 - k + 1) as f64 * p);
            k -= 1;
        }
    } else {
        while cdf < u && k < n64 {
            pmf *= ((n64 - k) as f64 / (k + 1) as f64) * (p / q);
            cdf += pmf;
            k += 1;
        }
    }
    k as u128
}

/// Per-level aggregates over replicas.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct LevelStats {
    pub level: u32,
    pub mean_max: f64,
    pub mean_argmax_count: f64,
    pub p_argmax_le_4: f64,
    /// Mean of M_{level+1} - M_level; None on the last simulated level.
    pub mean_increment: Option<f64>,
}

/// Outcome of [`simulate_brw`].
#[derive(Debug, Clone, Serialize)]
pub struct BrwSimulation {
    pub n: u32,
    pub p: f64,
    pub replicas: u64,
    pub seed: u64,
    pub per_level: Vec<LevelStats>,
    /// Replica counts of the final normalized maximum (n - M_n)/2.
    pub final_normalized_counts: BTreeMap<i64, u64>,
    pub sampler: SamplerEvents,
}

impl BrwSimulation {
    /// Empirical tail P(M'_n >= x) of the final level.
    pub fn empirical_tail(&self, x: i64) -> f64 {
        let hits: u64 = self
            .final_normalized_counts
            .iter()
            .filter(|(&v, _)| v >= x)
            .map(|(_, &c)| c)
            .sum();
        hits as f64 / self.replicas as f64
    }
}

/// Simulate `replicas` independent walks to level n, aggregating per-level
/// maxima, argmax counts and increments.
///
/// Replica r draws from the stream seeded by `replica_seed(seed, r)` and the
/// merge runs in replica order, so the output is a pure function of
/// (n, p, seed, replicas) regardless of host parallelism.
pub fn simulate_brw(n: u32, p: f64, seed: u64, replicas: u64) -> Result<BrwSimulation> {
    if n > 127 {
        return Err(Error::LevelOverflow(n));
    }
    if replicas == 0 {
        return Err(Error::InvalidArgument {
            name: "replicas",
            reason: "need at least one replica".into(),
        });
    }
    crate::tail::check_bias(p)?;
    let levels = n as usize + 1;
    let mut sum_max = vec![0f64; levels];
    let mut sum_k = vec![0f64; levels];
    let mut count_k_le_4 = vec![0u64; levels];
    let mut sum_inc = vec![0f64; levels];
    let mut final_counts: BTreeMap<i64, u64> = BTreeMap::new();
    let mut events = SamplerEvents::default();

    for r in 0..replicas {
        let mut rng = SplitMix64::seed_from_u64(replica_seed(seed, r));
        let mut h = LevelHistogram::root();
        let mut prev_max = h.max_position();
        for k in 0..=n {
            if k > 0 {
                h = split_level(&h, p, &mut rng, &mut events)?;
            }
            debug_assert_eq!(h.total(), 1u128 << h.level());
            let m = h.max_position();
            let kc = h.argmax_count();
            let i = k as usize;
            sum_max[i] += m as f64;
            sum_k[i] += kc as f64;
            if kc <= 4 {
                count_k_le_4[i] += 1;
            }
            if k > 0 {
                sum_inc[i - 1] += (m - prev_max) as f64;
            }
            prev_max = m;
        }
        let normalized = (n as i64 - prev_max) / 2;
        *final_counts.entry(normalized).or_insert(0) += 1;
    }

    let rf = replicas as f64;
    let per_level = (0..=n)
        .map(|k| {
            let i = k as usize;
            LevelStats {
                level: k,
                mean_max: sum_max[i] / rf,
                mean_argmax_count: sum_k[i] / rf,
                p_argmax_le_4: count_k_le_4[i] as f64 / rf,
                mean_increment: (k < n).then(|| sum_inc[i] / rf),
            }
        })
        .collect();
    Ok(BrwSimulation {
        n,
        p,
        replicas,
        seed,
        per_level,
        final_normalized_counts: final_counts,
        sampler: events,
    })
}

/// Outcome of [`simulate_gw_restart`].
#[derive(Debug, Clone, Serialize)]
pub struct GwSimulation {
    pub n: u32,
    pub replicas: u64,
    pub seed: u64,
    /// Empirical pmf of the restarted population at time n.
    pub pmf: BTreeMap<u64, f64>,
    pub counts: BTreeMap<u64, u64>,
}

impl GwSimulation {
    pub fn empirical_tail(&self, m: u64) -> f64 {
        let hits: u64 = self
            .counts
            .iter()
            .filter(|(&z, _)| z >= m)
            .map(|(_, &c)| c)
            .sum();
        hits as f64 / self.replicas as f64
    }
}

/// Critical branching chain with offspring law (1/4, 1/2, 1/4), restarted to
/// one particle whenever it dies out; empirical law of the population at
/// time n.
///
/// One step from population z is Binomial(2z, 1/2): each particle's pair of
/// potential successors survives independently.
pub fn simulate_gw_restart(n: u32, replicas: u64, seed: u64) -> Result<GwSimulation> {
    if replicas == 0 {
        return Err(Error::InvalidArgument {
            name: "replicas",
            reason: "need at least one replica".into(),
        });
    }
    let mut counts: BTreeMap<u64, u64> = BTreeMap::new();
    let mut events = SamplerEvents::default();
    for r in 0..replicas {
        let mut rng = SplitMix64::seed_from_u64(replica_seed(seed, r));
        let mut z: u128 = 1;
        for _ in 0..n {
            let children = sample_binomial(2 * z, 0.5, &mut rng, &mut events);
            z = if children == 0 { 1 } else { children };
        }
        *counts.entry(z as u64).or_insert(0) += 1;
    }
    let pmf = counts
        .iter()
        .map(|(&z, &c)| (z, c as f64 / replicas as f64))
        .collect();
    Ok(GwSimulation {
        n,
        replicas,
        seed,
        pmf,
        counts,
    })
}
