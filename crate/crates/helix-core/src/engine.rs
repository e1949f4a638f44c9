//! Exact evolution of the tail function and derived statistics.
//!
//! One level of the scheme maps F to F'(x) = (p F(x) + q F(x-1))^2 with
//! q = 1 - p; the symmetric case uses the averaged form so that F'(1) runs
//! through exactly the same float operations as the scalar extinction
//! iteration q_{k+1} = ((1 + q_k)/2)^2.

use std::collections::VecDeque;

use crate::error::{Error, OpBudget, Result};
use crate::tail::{check_bias, TailFunction, PRUNE_FLOOR, SAT_EPS};

/// One level of the recursion. The output level is n+1 and the support grows
/// by one cell before pruning.
///
/// For p >= 1/2 everything is computed in the direct zone (complements are
/// resolved well before f64 runs out of precision there). For p < 1/2 the
/// left flank is carried in complement space; see the module notes in
/// [`crate::tail`].
pub fn step_tail(f: &TailFunction, p: f64) -> Result<TailFunction> {
    check_bias(p)?;
    if p < 0.5 {
        step_dual(f, p)
    } else {
        step_direct(f, p)
    }
}

fn step_direct(f: &TailFunction, p: f64) -> Result<TailFunction> {
    let q = 1.0 - p;
    let mut sat = f.sat();
    let mut vals: VecDeque<f64> = VecDeque::with_capacity(f.window_len() + 2);
    for x in (f.sat() + 1)..=(f.hi() + 1) {
        let a = if p == 0.5 {
            (f.value(x) + f.value(x - 1)) / 2.0
        } else {
            p * f.value(x) + q * f.value(x - 1)
        };
        vals.push_back(a * a);
    }
    while matches!(vals.front(), Some(&v) if v >= 1.0 - SAT_EPS) {
        vals.pop_front();
        sat += 1;
    }
    while matches!(vals.back(), Some(&v) if v < PRUNE_FLOOR) {
        vals.pop_back();
    }
    Ok(TailFunction::from_zones(
        f.level() + 1,
        p,
        sat,
        VecDeque::new(),
        vals,
    ))
}

fn step_dual(f: &TailFunction, p: f64) -> Result<TailFunction> {
    let q = 1.0 - p;
    let mut sat = f.sat();
    let split = f.sat() + f.comp_len() as i64 + 1;
    let mut comp: VecDeque<f64> = VecDeque::with_capacity(f.comp_len() + 2);
    let mut vals: VecDeque<f64> = VecDeque::with_capacity(f.window_len() + 2);
    for x in (f.sat() + 1)..split {
        // 1 - (1 - s)^2 expanded to s(2 - s): no cancellation for tiny s
        let s = p * f.complement(x) + q * f.complement(x - 1);
        comp.push_back(s * (2.0 - s));
    }
    for x in split..=(f.hi() + 1) {
        let a = p * f.value(x) + q * f.value(x - 1);
        vals.push_back(a * a);
    }
    // fold resolved complements into the saturated prefix
    while matches!(comp.front(), Some(&c) if c < PRUNE_FLOOR) {
        comp.pop_front();
        sat += 1;
    }
    while matches!(vals.back(), Some(&v) if v < PRUNE_FLOOR) {
        vals.pop_back();
    }
    // keep the zone boundary near the median: complements hold F > 1/2
    while matches!(vals.front(), Some(&v) if v > 0.5) {
        comp.push_back(1.0 - vals.pop_front().unwrap());
    }
    while matches!(comp.back(), Some(&c) if c > 0.5) {
        vals.push_front(1.0 - comp.pop_back().unwrap());
    }
    Ok(TailFunction::from_zones(f.level() + 1, p, sat, comp, vals))
}

/// Tail of level n from the step initial condition.
pub fn evolve(n: u32, p: f64) -> Result<TailFunction> {
    let mut budget = OpBudget::new(u64::MAX);
    evolve_with_budget(n, p, &mut budget)
}

/// [`evolve`] charging one operation per stored cell per level.
pub fn evolve_with_budget(n: u32, p: f64, budget: &mut OpBudget) -> Result<TailFunction> {
    let mut f = TailFunction::initial(p)?;
    for _ in 0..n {
        budget.charge(f.window_len() as u64 + 2)?;
        f = step_tail(&f, p)?;
    }
    Ok(f)
}

/// Smallest x with F(x) <= 1/2. Always >= 1; equality with 1/2 counts.
pub fn median(f: &TailFunction) -> i64 {
    for x in (f.sat() + 1)..=f.hi() {
        if f.value(x) <= 0.5 {
            return x;
        }
    }
    f.hi() + 1
}

/// Sum over x of F_next(x) - F(x), the expected one-level increment of the
/// normalized maximum. Requires `next` to be the successor level of `f`.
pub fn delta_n(f: &TailFunction, next: &TailFunction) -> Result<f64> {
    if next.level() != f.level() + 1 {
        return Err(Error::LevelMismatch {
            a: f.level(),
            b: next.level(),
        });
    }
    let hi = f.hi().max(next.hi());
    let mut d = 0.0;
    for x in 1..=hi {
        // complements cancel exactly where both sides are near 1
        d += f.complement(x) - next.complement(x);
    }
    Ok(d)
}

/// Mean of the raw maximum at the tail's level: E M_n = n - 2 sum_x F(x).
pub fn expected_max(f: &TailFunction) -> f64 {
    f.level() as f64 - 2.0 * f.mass()
}

/// The unique non-degenerate invariant profile for p > 1/2, built by the
/// closed-form recursion
/// F(x) = (1 - 2 F(x-1) p q - sqrt(1 - 4 F(x-1) p q)) / (2 p^2), F(0) = 1.
pub fn fixed_point_supercritical(p: f64, x_max: u32) -> Result<TailFunction> {
    check_bias(p)?;
    if p <= 0.5 {
        return Err(Error::NoFixedPoint(p));
    }
    let q = 1.0 - p;
    let mut values = Vec::with_capacity(x_max as usize);
    let mut prev = 1.0f64;
    for _ in 0..x_max {
        let b = prev * p * q;
        let v = ((1.0 - 2.0 * b - (1.0 - 4.0 * b).sqrt()) / (2.0 * p * p)).clamp(0.0, 1.0);
        values.push(v);
        prev = v;
    }
    TailFunction::from_values(x_max, p, values)
}

/// Extinction probabilities q_1..q_n of the critical branching process with
/// offspring law (1/4, 1/2, 1/4), by scalar iteration q_{k+1} = ((1+q_k)/2)^2.
///
/// This is the same recursion the symmetric tail obeys at x = 1, operation
/// for operation, so q_k equals evolve(k, 1/2).value(1) bit-exactly.
pub fn gw_extinction_curve(n: u32) -> Vec<f64> {
    let mut out = Vec::with_capacity(n as usize);
    let mut q = 0.0f64;
    for _ in 0..n {
        let a = (q + 1.0) / 2.0;
        q = a * a;
        out.push(q);
    }
    out
}
