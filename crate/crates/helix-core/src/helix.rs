//! The one-parameter family of invariant tails of the symmetric scheme, the
//! sup-distance between an evolved tail and its approximating element, and
//! the two cyclic limit experiments built on them.
//!
//! An element is pinned by an anchor (k0, v0) with v0 = F(k0) on the median
//! side: values to the right follow by `shift_down`, values to the left are
//! carried as complements via the duality 1 - F(x-1) = shift_down(1 - F(x)).
//! Anchoring at the median instead of at x = 0 matters: transporting the
//! parameter back to x = 0 squares its distance to 1 once per site and
//! destroys every digit long before the anchor is reached.

use serde::Serialize;

use crate::engine::{median, step_tail};
use crate::error::{Error, OpBudget, Result};
use crate::maps::{shift_down_raw, shift_up_raw};
use crate::tail::TailFunction;

/// Half-width of the evaluation window; outside it both tails differ from
/// {0, 1} by less than this, and it is added to every reported sup as slack.
pub const WINDOW_EPS: f64 = 1e-14;

/// One invariant tail, stored by a median-side anchor.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HelixElement {
    k0: i64,
    v0: f64,
}

impl HelixElement {
    /// Anchor value must sit in (0, 1/2]: the anchor is a median-side point.
    pub fn new(k0: i64, v0: f64) -> Result<Self> {
        if !(v0 > 0.0 && v0 <= 0.5) {
            return Err(Error::DegenerateAnchor(v0));
        }
        Ok(HelixElement { k0, v0 })
    }

    pub fn anchor(&self) -> (i64, f64) {
        (self.k0, self.v0)
    }

    /// The same invariant tail translated by `d` sites.
    pub fn translated(&self, d: i64) -> Self {
        HelixElement {
            k0: self.k0 + d,
            v0: self.v0,
        }
    }

    /// F(x) of this element.
    ///
    /// Right of the anchor the value itself is iterated; left of it the
    /// complement is iterated and the result returned as 1 - c, so both
    /// tails stay accurate down to the floor of f64.
    pub fn tail(&self, x: i64) -> f64 {
        if x >= self.k0 {
            let mut v = self.v0;
            for _ in 0..(x - self.k0) {
                v = shift_down_raw(v);
            }
            v
        } else {
            1.0 - self.complement(x)
        }
    }

    /// 1 - F(x), exact on the left flank.
    pub fn complement(&self, x: i64) -> f64 {
        if x < self.k0 {
            let mut c = 1.0 - self.v0;
            for _ in 0..(self.k0 - x) {
                c = shift_down_raw(c);
            }
            c
        } else {
            1.0 - self.tail(x)
        }
    }

    /// 4 F(x) - (F(x) + F(x-1))^2; zero for an exactly invariant tail.
    pub fn invariance_residual(&self, x: i64) -> f64 {
        let s = self.tail(x) + self.tail(x - 1);
        4.0 * self.tail(x) - s * s
    }

    /// Window [lo, hi] outside of which this element is within
    /// [`WINDOW_EPS`] of 1 (left) or 0 (right).
    fn active_window(&self) -> (i64, i64) {
        let mut lo = self.k0;
        while self.complement(lo - 1) > WINDOW_EPS {
            lo -= 1;
        }
        let mut hi = self.k0;
        while self.tail(hi + 1) > WINDOW_EPS {
            hi += 1;
        }
        (lo, hi)
    }
}

/// Element pinned at the median of an evolved tail: anchor (k_n, F(k_n)).
pub fn from_median_anchor(f: &TailFunction) -> Result<HelixElement> {
    let k = median(f);
    HelixElement::new(k, f.value(k))
}

/// sup over x of |F(x) - element(x - shift)| plus the window slack.
///
/// `shift` translates the element to the right. The sup is taken over the
/// convex hull of the windows where either side is in
/// (WINDOW_EPS, 1 - WINDOW_EPS); outside the hull both sides agree with the
/// same constant to within the slack that is added back to the result.
pub fn sup_distance(f: &TailFunction, e: &HelixElement, shift: i64) -> f64 {
    let (elo, ehi) = e.active_window();
    let lo = (elo + shift).min(1) - 1;
    let hi = (ehi + shift).max(f.hi()) + 1;
    let mut best = 0.0f64;
    for x in lo..=hi {
        let d = (f.value(x) - e.tail(x - shift)).abs();
        best = best.max(d);
    }
    best + WINDOW_EPS
}

/// One row of the cyclic-approximation curve.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct CyclicPoint {
    pub n: u32,
    pub k_n: i64,
    pub d_n: f64,
}

/// Distance d_n = sup |F_n - element anchored at the median of F_n| for each
/// requested level, computed along one streaming evolution.
pub fn cyclic_distance_curve(
    levels: &[u32],
    p: f64,
    budget: &mut OpBudget,
) -> Result<Vec<CyclicPoint>> {
    if levels.windows(2).any(|w| w[0] >= w[1]) {
        return Err(Error::InvalidArgument {
            name: "levels",
            reason: "levels must be strictly ascending".into(),
        });
    }
    let mut out = Vec::with_capacity(levels.len());
    let mut f = TailFunction::initial(p)?;
    for &target in levels {
        while f.level() < target {
            budget.charge(f.window_len() as u64 + 2)?;
            f = step_tail(&f, p)?;
        }
        let e = from_median_anchor(&f)?;
        out.push(CyclicPoint {
            n: target,
            k_n: e.anchor().0,
            d_n: sup_distance(&f, &e, 0),
        });
    }
    Ok(out)
}

/// One accumulation-point witness: at level `n_k` the evolved tail shifted
/// by k - z is within `distance` of the target element in sup norm.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct LimitPointEntry {
    pub k: i64,
    pub n_k: u32,
    pub distance: f64,
    /// Both neighboring levels matched the target equally well.
    pub tie: bool,
}

#[derive(Debug, Clone, Serialize)]
pub struct LimitPointReport {
    pub a: f64,
    /// Parameter actually used; differs from `a` only when a value of the
    /// element hit 1/2 exactly and a 1e-9 perturbation was applied.
    pub a_used: f64,
    pub perturbed: bool,
    /// Site with element(z-1) > 1/2 > element(z).
    pub z: i64,
    pub entries: Vec<LimitPointEntry>,
}

/// Witnesses that the invariant element with value `a` at x = 0 is an
/// accumulation point of the evolved tails after shifts.
///
/// For `count` sites k = 1, 2, ... the level n_k minimizing
/// |F_n(k) - element(z)| is located by riding the monotone growth of
/// F_n(k) in n, and the shifted sup-distance with shift k - z is reported.
/// Each successive site multiplies the required depth roughly by itself,
/// so `count` beyond 4 is rarely affordable.
pub fn find_limit_point(a: f64, count: u32, budget: &mut OpBudget) -> Result<LimitPointReport> {
    if !(a > 0.0 && a < 1.0) {
        return Err(Error::ProbabilityRange(a));
    }
    let (a_used, perturbed) = match scan_median_site(a) {
        Some(z) => ((a, false), z),
        None => {
            let nudged = a + 1e-9;
            match scan_median_site(nudged) {
                Some(z) => ((nudged, true), z),
                None => {
                    return Err(Error::InvalidArgument {
                        name: "a",
                        reason: "no median site found after perturbation".into(),
                    })
                }
            }
        }
    };
    let ((a_used, perturbed), z) = (a_used, perturbed);

    // target element re-anchored at its own median site
    let t = element_value_at(a_used, z);
    let e = HelixElement::new(z, t)?;

    let mut entries = Vec::with_capacity(count as usize);
    let mut prev = TailFunction::initial(0.5)?;
    let mut cur = prev.clone();
    let mut n = 0u32;
    for k in 1..=(count as i64) {
        while cur.value(k) < t {
            budget.charge(cur.window_len() as u64 + 2)?;
            let next = step_tail(&cur, 0.5)?;
            prev = std::mem::replace(&mut cur, next);
            n += 1;
        }
        let d_cur = (cur.value(k) - t).abs();
        let d_prev = (prev.value(k) - t).abs();
        let tie = n >= 1 && d_prev == d_cur;
        let (n_k, chosen) = if n >= 1 && d_prev <= d_cur {
            (n - 1, &prev)
        } else {
            (n, &cur)
        };
        entries.push(LimitPointEntry {
            k,
            n_k,
            distance: sup_distance(chosen, &e, k - z),
            tie,
        });
    }
    Ok(LimitPointReport {
        a,
        a_used,
        perturbed,
        z,
        entries,
    })
}

/// Value of the element with parameter `a` at x = 0, evaluated at site x.
fn element_value_at(a: f64, x: i64) -> f64 {
    let mut v = a;
    if x >= 0 {
        for _ in 0..x {
            v = shift_down_raw(v);
        }
    } else {
        for _ in 0..(-x) {
            v = shift_up_raw(v);
        }
    }
    v
}

/// Site z with element(z-1) > 1/2 > element(z); None if any scanned value
/// hits 1/2 exactly.
fn scan_median_site(a: f64) -> Option<i64> {
    if a == 0.5 {
        return None;
    }
    let mut z = 0i64;
    if a < 0.5 {
        // walk left until the value passes 1/2
        loop {
            let left = element_value_at(a, z - 1);
            if left == 0.5 {
                return None;
            }
            if left > 0.5 {
                return Some(z);
            }
            z -= 1;
        }
    } else {
        // walk right until the value drops below 1/2
        loop {
            let v = element_value_at(a, z);
            if v == 0.5 {
                return None;
            }
            if v < 0.5 {
                return Some(z);
            }
            z += 1;
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::engine::evolve;
    use crate::maps::{shift_down, shift_up};

    #[test]
    fn anchored_values() {
        let e = HelixElement::new(0, 0.25).unwrap();
        assert_eq!(e.tail(0), 0.25);
        assert!((e.tail(1) - shift_down(0.25).unwrap()).abs() < 1e-15);
        assert!((e.tail(-1) - 0.75).abs() < 1e-15); // shift_up(0.25)
        assert!(e.tail(30) >= 0.0 && e.tail(-30) <= 1.0);
        assert!(HelixElement::new(0, 0.75).is_err());
        assert!(HelixElement::new(0, 0.0).is_err());
    }

    #[test]
    fn shift_identity_is_exact() {
        let e = HelixElement::new(2, 0.37).unwrap();
        let t = e.translated(1);
        for x in -20..=20 {
            assert_eq!(e.tail(x), t.tail(x + 1));
        }
    }

    #[test]
    fn left_flank_complement_duality() {
        // 1 - F(x-1) = shift_down(1 - F(x)) on the left flank, where the
        // complement is the stored representation
        let e = HelixElement::new(0, 0.4).unwrap();
        for x in -25..=0 {
            let lhs = e.complement(x - 1);
            let rhs = shift_down(e.complement(x)).unwrap();
            assert!((lhs - rhs).abs() < 1e-14, "x={x}");
        }
    }

    #[test]
    fn invariance_residual_vanishes() {
        for &v0 in &[0.1, 0.25, 0.5] {
            let e = HelixElement::new(3, v0).unwrap();
            for x in -30..=30 {
                assert!(e.invariance_residual(x).abs() < 1e-12, "v0={v0} x={x}");
            }
        }
    }

    #[test]
    fn median_anchor_examples() {
        let f2 = evolve(2, 0.5).unwrap();
        let e = from_median_anchor(&f2).unwrap();
        assert_eq!(e.anchor(), (1, 0.390625));
        let f1 = evolve(1, 0.5).unwrap();
        assert_eq!(from_median_anchor(&f1).unwrap().anchor(), (1, 0.25));
        let f0 = TailFunction::initial(0.5).unwrap();
        assert!(from_median_anchor(&f0).is_err());
    }

    #[test]
    fn sup_distance_brute_force_values() {
        // level 2: the sup is attained at x = 0 where the element keeps
        // 1 - shift_up(25/64) of mass that the true tail does not have
        let f2 = evolve(2, 0.5).unwrap();
        let e = from_median_anchor(&f2).unwrap();
        let d = sup_distance(&f2, &e, 0);
        let expect = 1.0 - shift_up(0.390625).unwrap(); // 0.140625
        assert!((d - expect).abs() < 1e-12);
        assert!((d - 0.140625).abs() < 1e-12);

        let f1 = evolve(1, 0.5).unwrap();
        let e1 = from_median_anchor(&f1).unwrap();
        assert!((sup_distance(&f1, &e1, 0) - 0.25).abs() < 1e-12);
    }

    #[test]
    fn self_distance_is_negligible() {
        let e = HelixElement::new(6, 0.31).unwrap();
        let mut vals = Vec::new();
        for x in 1..=40 {
            vals.push(e.tail(x));
        }
        let f = TailFunction::from_values(40, 0.5, vals).unwrap();
        assert!(sup_distance(&f, &e, 0) < 1e-12);
    }

    #[test]
    fn stepping_a_sampled_element_reproduces_it() {
        // invariance under the level recursion, checked through step_tail
        let e = HelixElement::new(45, 0.3).unwrap();
        let mut vals = Vec::new();
        for x in 1..=85 {
            vals.push(e.tail(x));
        }
        let f = TailFunction::from_values(85, 0.5, vals).unwrap();
        let stepped = step_tail(&f, 0.5).unwrap();
        let unit_shift = e.translated(1);
        for x in 1..=stepped.hi() {
            assert!(
                (stepped.value(x) - e.tail(x)).abs() < 1e-12,
                "fixed-point residual at x={x}"
            );
            assert_eq!(unit_shift.tail(x + 1), e.tail(x));
        }
    }

    #[test]
    fn cyclic_curve_small_levels() {
        let pts = cyclic_distance_curve(&[2, 10], 0.5, &mut OpBudget::default()).unwrap();
        assert_eq!(pts.len(), 2);
        assert_eq!(pts[0].n, 2);
        assert_eq!(pts[0].k_n, 1);
        assert!((pts[0].d_n - 0.140625).abs() < 1e-12);
        assert_eq!(pts[1].k_n, 2);
        assert!(pts[1].d_n < pts[0].d_n);
        assert!(cyclic_distance_curve(&[5, 5], 0.5, &mut OpBudget::default()).is_err());
        let mut tiny = OpBudget::new(20);
        assert!(matches!(
            cyclic_distance_curve(&[100], 0.5, &mut tiny),
            Err(Error::BudgetExceeded { .. })
        ));
    }

    #[test]
    fn limit_point_medians() {
        // scalar checks of the median site z for the three workhorse anchors
        assert_eq!(scan_median_site(0.2), Some(0));
        assert_eq!(scan_median_site(0.4), Some(0));
        assert_eq!(scan_median_site(0.7), Some(1));
        assert_eq!(scan_median_site(0.5), None);
    }

    #[test]
    fn limit_point_entries_for_a_04() {
        let r = find_limit_point(0.4, 3, &mut OpBudget::default()).unwrap();
        assert_eq!(r.z, 0);
        assert!(!r.perturbed);
        assert_eq!(r.entries.len(), 3);
        let n_ks: Vec<u32> = r.entries.iter().map(|e| e.n_k).collect();
        assert_eq!(n_ks, vec![2, 26, 824]);
        for w in r.entries.windows(2) {
            assert!(w[1].distance < w[0].distance);
        }
    }

    #[test]
    fn limit_point_budget_and_domain_errors() {
        assert!(find_limit_point(0.0, 1, &mut OpBudget::default()).is_err());
        let mut tiny = OpBudget::new(50);
        assert!(matches!(
            find_limit_point(0.1, 3, &mut tiny),
            Err(Error::BudgetExceeded { .. })
        ));
    }
}
