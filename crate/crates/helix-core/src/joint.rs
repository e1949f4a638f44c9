//! Exact joint law of the normalized maximum together with the number of
//! level-n vertices attaining it (the argmax count K_n, clipped at k_max).
//!
//! The combination rule over the two subtrees below the root: the new
//! normalized maximum is the min of the shifted subtree maxima and the new
//! count is the sum of the counts of the subtrees achieving that min.

use std::collections::BTreeMap;

use serde::Serialize;

use crate::error::{Error, OpBudget, Result};
use crate::tail::check_bias;

/// Truncated joint pmf of (M'_n, min(K_n, k_max)).
#[derive(Debug, Clone)]
pub struct JointPmf {
    n: u32,
    p: f64,
    k_max: u32,
    /// mass keyed by (x, k); k = k_max pools every count >= k_max.
    mass: BTreeMap<(i64, u32), f64>,
}

impl JointPmf {
    pub fn level(&self) -> u32 {
        self.n
    }

    pub fn bias(&self) -> f64 {
        self.p
    }

    pub fn k_max(&self) -> u32 {
        self.k_max
    }

    pub fn mass(&self) -> &BTreeMap<(i64, u32), f64> {
        &self.mass
    }

    pub fn total_mass(&self) -> f64 {
        self.mass.values().sum()
    }

    /// Marginal tail P(M' >= x) implied by the joint law.
    pub fn marginal_tail(&self, x: i64) -> f64 {
        self.mass
            .iter()
            .filter(|((xx, _), _)| *xx >= x)
            .map(|(_, m)| m)
            .sum()
    }

    /// E r^{K} with the pooled cell evaluated at k_max.
    fn mean_pow(&self, r: f64) -> f64 {
        self.mass
            .iter()
            .map(|(&(_, k), &m)| m * r.powi(k as i32))
            .sum()
    }
}

/// Result of [`joint_evolve`] with the derived argmax-count statistics.
///
/// `e_4_pow_minus_k` evaluates the pooled top cell at k = k_max, so it is an
/// upper bound on the untruncated expectation (off by less than
/// 4^{-k_max}); `increment_mean` is correspondingly a lower bound. For the
/// default k_max = 64 the truncation is far below f64 resolution.
#[derive(Debug, Clone, Serialize)]
pub struct JointReport {
    pub n: u32,
    pub p: f64,
    pub k_max: u32,
    /// E[4^{-K_n}]: the conditional probability that the maximum steps down.
    pub e_4_pow_minus_k: f64,
    /// E[2^{-K_n}]; kept alongside for comparison with the 4^{-K} law.
    pub e_2_pow_minus_k: f64,
    /// Exact E(M_{n+1} - M_n) = 1 - 2 E[q^{2 K_n}].
    pub increment_mean: f64,
    #[serde(skip)]
    pub joint: JointPmf,
}

/// Default truncation bound for the argmax count.
pub const DEFAULT_K_MAX: u32 = 64;

/// Exact joint law of (M'_n, min(K_n, k_max)) by dynamic programming over
/// subtree pairs. Cost grows like n (n k_max)^2, which is checked against
/// the budget before starting.
pub fn joint_evolve(n: u32, p: f64, k_max: u32, budget: &mut OpBudget) -> Result<JointReport> {
    check_bias(p)?;
    if k_max < 2 {
        return Err(Error::InvalidArgument {
            name: "k_max",
            reason: format!("need k_max >= 2, got {k_max}"),
        });
    }
    let est = (n as u64)
        .saturating_mul((n as u64).saturating_mul(k_max as u64).saturating_pow(2));
    budget.charge(est)?;

    let q = 1.0 - p;
    // B~ = 1 (a down-step of the raw maximum) with probability q
    let b_prob = [p, q];
    let mut cur: BTreeMap<(i64, u32), f64> = BTreeMap::new();
    cur.insert((0, 1), 1.0);
    for _ in 0..n {
        let entries: Vec<((i64, u32), f64)> = cur.iter().map(|(k, v)| (*k, *v)).collect();
        let mut next: BTreeMap<(i64, u32), f64> = BTreeMap::new();
        for &((x1, k1), m1) in &entries {
            for &((x2, k2), m2) in &entries {
                let w = m1 * m2;
                for b1 in 0..2i64 {
                    for b2 in 0..2i64 {
                        let y1 = x1 + b1;
                        let y2 = x2 + b2;
                        let y = y1.min(y2);
                        let mut k = 0u32;
                        if y1 == y {
                            k += k1;
                        }
                        if y2 == y {
                            k += k2;
                        }
                        let k = k.min(k_max);
                        *next.entry((y, k)).or_insert(0.0) +=
                            w * b_prob[b1 as usize] * b_prob[b2 as usize];
                    }
                }
            }
        }
        cur = next;
    }
    let joint = JointPmf {
        n,
        p,
        k_max,
        mass: cur,
    };
    let e4 = joint.mean_pow(0.25);
    let e2 = joint.mean_pow(0.5);
    // all 2K argmax children must step down for the maximum to drop
    let increment = 1.0 - 2.0 * joint.mean_pow(q * q);
    Ok(JointReport {
        n,
        p,
        k_max,
        e_4_pow_minus_k: e4,
        e_2_pow_minus_k: e2,
        increment_mean: increment,
        joint,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::engine::{evolve, expected_max, step_tail};

    fn joint(n: u32, p: f64, k_max: u32) -> JointReport {
        joint_evolve(n, p, k_max, &mut OpBudget::default()).unwrap()
    }

    #[test]
    fn level_one_by_enumeration() {
        // four equally likely child-pair outcomes collapse to three cells
        let r = joint(1, 0.5, 64);
        let m = r.joint.mass();
        assert_eq!(m.len(), 3);
        assert_eq!(m[&(0, 1)], 0.5);
        assert_eq!(m[&(0, 2)], 0.25);
        assert_eq!(m[&(1, 2)], 0.25);
        assert_eq!(r.joint.total_mass(), 1.0);
    }

    #[test]
    fn increment_mean_matches_exact_evolution() {
        // E(M_{n+1} - M_n) from the joint law against the tail-function route
        for &(n, p) in &[(1u32, 0.5f64), (2, 0.5), (4, 0.5), (3, 0.6)] {
            let r = joint(n, p, 64);
            let en = expected_max(&evolve(n, p).unwrap());
            let f = evolve(n, p).unwrap();
            let en1 = expected_max(&step_tail(&f, p).unwrap());
            assert!(
                (r.increment_mean - (en1 - en)).abs() < 1e-12,
                "n={n} p={p}: {} vs {}",
                r.increment_mean,
                en1 - en
            );
        }
    }

    #[test]
    fn level_one_increment_is_11_16() {
        let r = joint(1, 0.5, 64);
        assert_eq!(r.e_4_pow_minus_k, 0.15625); // 1/2 * 1/4 + 1/2 * 1/16
        assert_eq!(r.increment_mean, 0.6875);
        // the 2^{-K} variant does not reproduce the exact increment
        assert_eq!(1.0 - 2.0 * r.e_2_pow_minus_k, 0.25);
    }

    #[test]
    fn marginal_consistency_with_tail_evolution() {
        for &(n, p) in &[(6u32, 0.5f64), (5, 0.6), (5, 0.3)] {
            let r = joint(n, p, 32);
            let f = evolve(n, p).unwrap();
            assert!((r.joint.total_mass() - 1.0).abs() < 1e-12);
            for x in 0..=(n as i64 + 1) {
                assert!(
                    (r.joint.marginal_tail(x) - f.value(x)).abs() < 1e-12,
                    "n={n} p={p} x={x}"
                );
            }
        }
    }

    #[test]
    fn pooling_clips_at_k_max() {
        let r = joint(5, 0.5, 2);
        assert!(r.joint.mass().keys().all(|&(_, k)| (1..=2).contains(&k)));
        assert!((r.joint.total_mass() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn rejects_bad_arguments() {
        assert!(joint_evolve(1, 0.5, 1, &mut OpBudget::default()).is_err());
        assert!(joint_evolve(1, 0.0, 8, &mut OpBudget::default()).is_err());
        let mut tiny = OpBudget::new(100);
        assert!(matches!(
            joint_evolve(50, 0.5, 64, &mut tiny),
            Err(Error::BudgetExceeded { .. })
        ));
    }
}
