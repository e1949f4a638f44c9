//! Cumulant functionals of a one-generation progeny law, the exponential
//! tilt that removes the linear drift of the maximum, hypothesis checks for
//! the classical fixed-tilt limit theorem, and the drift equation of the
//! subcritical-bias scheme.
//!
//! Progeny laws here are deterministic m-fold births with i.i.d. child
//! displacements on a finite support; that covers every scheme this crate
//! evolves exactly, while keeping all functionals finite sums.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::numeric::{bisect, log_mgf_moments};

/// One-generation branching law: m children, each displaced independently
/// by a draw from a finite pmf.
#[derive(Debug, Clone)]
pub struct ProgenySpec {
    m: u32,
    support: Vec<f64>,
    probs: Vec<f64>,
    tilt: Option<TiltRecord>,
}

/// Record of the tilt applied to obtain this law.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct TiltRecord {
    pub gamma: f64,
    /// Per-level shift subtracted from every particle (the log of the mean
    /// reproduction functional at `gamma`).
    pub shift_per_level: f64,
}

/// All cumulant-level quantities at one tilt argument.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct Cumulants {
    /// Mean reproduction functional m E e^{g X}; may overflow to infinity,
    /// `log_phi` never does.
    pub phi: f64,
    pub log_phi: f64,
    /// d/dg log_phi: mean displacement under the tilted law.
    pub d1: f64,
    /// Second derivative: tilted displacement variance.
    pub d2: f64,
    /// g * d1 - log_phi, the functional whose root is the critical tilt.
    pub rate: f64,
}

impl ProgenySpec {
    pub fn new(m: u32, displacement: &[(f64, f64)]) -> Result<Self> {
        if m < 2 {
            return Err(Error::InvalidArgument {
                name: "m",
                reason: format!("need at least binary branching, got m={m}"),
            });
        }
        if displacement.is_empty() {
            return Err(Error::InvalidPmf("empty displacement support".into()));
        }
        let mut pairs: Vec<(f64, f64)> = displacement.to_vec();
        pairs.sort_by(|a, b| a.0.partial_cmp(&b.0).unwrap());
        let mut support = Vec::with_capacity(pairs.len());
        let mut probs = Vec::with_capacity(pairs.len());
        let mut total = 0.0;
        for (v, p) in pairs {
            if !v.is_finite() {
                return Err(Error::InvalidPmf(format!("non-finite displacement {v}")));
            }
            if !(p > 0.0 && p.is_finite()) {
                return Err(Error::InvalidPmf(format!("weight {p} at {v} not positive")));
            }
            if support.last().is_some_and(|&last: &f64| last == v) {
                return Err(Error::InvalidPmf(format!("duplicate support point {v}")));
            }
            support.push(v);
            probs.push(p);
            total += p;
        }
        if (total - 1.0).abs() > 1e-12 {
            return Err(Error::InvalidPmf(format!("weights sum to {total}")));
        }
        Ok(ProgenySpec {
            m,
            support,
            probs,
            tilt: None,
        })
    }

    /// Binary branching with displacements +1 (probability p) and -1.
    pub fn bernoulli_pm1(p: f64) -> Result<Self> {
        crate::tail::check_bias(p)?;
        ProgenySpec::new(2, &[(-1.0, 1.0 - p), (1.0, p)])
    }

    /// Binary branching with displacements 1 (probability p) and 0.
    pub fn bernoulli01(p: f64) -> Result<Self> {
        crate::tail::check_bias(p)?;
        ProgenySpec::new(2, &[(0.0, 1.0 - p), (1.0, p)])
    }

    pub fn children(&self) -> u32 {
        self.m
    }

    pub fn support(&self) -> &[f64] {
        &self.support
    }

    pub fn probs(&self) -> &[f64] {
        &self.probs
    }

    pub fn tilt(&self) -> Option<TiltRecord> {
        self.tilt
    }
}

/// Cumulants of `spec` at tilt `gamma >= 0`, evaluated in log space.
pub fn cumulants(spec: &ProgenySpec, gamma: f64) -> Result<Cumulants> {
    if gamma.is_nan() || gamma < 0.0 {
        return Err(Error::GammaRange(gamma));
    }
    let (l, mean, var) = log_mgf_moments(&spec.support, &spec.probs, gamma);
    let log_phi = (spec.m as f64).ln() + l;
    Ok(Cumulants {
        phi: log_phi.exp(),
        log_phi,
        d1: mean,
        d2: var,
        rate: gamma * mean - log_phi,
    })
}

/// Limit of the rate functional as the tilt grows:
/// -ln(m P(X = top displacement)). A critical tilt exists iff this is > 0.
pub fn r_infinity(spec: &ProgenySpec) -> f64 {
    let p_top = *spec.probs.last().unwrap();
    -(spec.m as f64 * p_top).ln()
}

/// The unique positive root of the rate functional, by bracketed bisection.
pub fn solve_critical_gamma(spec: &ProgenySpec) -> Result<f64> {
    let r_inf = r_infinity(spec);
    if r_inf <= 0.0 {
        return Err(Error::NoCriticalTilt(r_inf));
    }
    let rate = |g: f64| cumulants(spec, g).map(|c| c.rate).unwrap_or(f64::NAN);
    let mut hi = 1.0f64;
    let mut tries = 0;
    while rate(hi) <= 0.0 {
        hi *= 2.0;
        tries += 1;
        if tries > 60 {
            return Err(Error::NoCriticalTilt(r_inf));
        }
    }
    bisect(rate, 0.0, hi, 1e-13)
}

/// The tilted law gX - log_phi(g) at the critical tilt: unit mean
/// reproduction and zero mean displacement-weighted reproduction.
pub fn reduce_to_critical(spec: &ProgenySpec) -> Result<ProgenySpec> {
    let gamma = solve_critical_gamma(spec)?;
    let shift = cumulants(spec, gamma)?.log_phi;
    let support = spec
        .support
        .iter()
        .map(|&v| gamma * v - shift)
        .collect::<Vec<_>>();
    Ok(ProgenySpec {
        m: spec.m,
        support,
        probs: spec.probs.clone(),
        tilt: Some(TiltRecord {
            gamma,
            shift_per_level: shift,
        }),
    })
}

/// Hypothesis report for the fixed-tilt limit theorem.
#[derive(Debug, Clone, Serialize)]
pub struct AidekonReport {
    /// Mean number of children exceeds one.
    pub supercritical: bool,
    /// E sum V e^V; must vanish for a critically normalized walk.
    pub critical_mean_shift: f64,
    /// E sum e^V; must be one for a critically normalized walk.
    pub mean_reproduction: f64,
    pub moments_finite: bool,
    pub lattice: bool,
    pub thm1_applicable: bool,
    /// E sum V^2 e^V.
    pub second_moment: f64,
    /// E X (ln+ X)^2 with X = sum e^V.
    pub x_log2_moment: f64,
    /// E X~ ln+ X~ with X~ = sum V_- e^V.
    pub xtilde_log_moment: f64,
}

/// Evaluate every hypothesis of the fixed-tilt limit theorem on `spec`.
pub fn check_aidekon(spec: &ProgenySpec) -> AidekonReport {
    let m = spec.m as f64;
    let mut mean_repro = 0.0;
    let mut mean_shift = 0.0;
    let mut second = 0.0;
    for (&v, &p) in spec.support.iter().zip(&spec.probs) {
        let w = p * v.exp();
        mean_repro += w;
        mean_shift += w * v;
        second += w * v * v;
    }
    mean_repro *= m;
    mean_shift *= m;
    second *= m;

    let (x_log2, xt_log) = composite_moments(spec);
    let normalized = (mean_repro - 1.0).abs() <= 1e-10 && mean_shift.abs() <= 1e-10;
    let lattice = displacement_lattice(&spec.support).is_some();
    AidekonReport {
        supercritical: spec.m > 1,
        critical_mean_shift: mean_shift,
        mean_reproduction: mean_repro,
        moments_finite: true, // finite support: every moment above is a finite sum
        lattice,
        thm1_applicable: spec.m > 1 && normalized && !lattice,
        second_moment: second,
        x_log2_moment: x_log2,
        xtilde_log_moment: xt_log,
    }
}

/// E X (ln+ X)^2 and E X~ ln+ X~ by enumerating the m-fold product law.
fn composite_moments(spec: &ProgenySpec) -> (f64, f64) {
    let s = spec.support.len();
    let m = spec.m as usize;
    if (s as f64).powi(m as i32) > 1e6 {
        // bounded variables: moments finite; skip the exact enumeration
        return (f64::NAN, f64::NAN);
    }
    let mut x_log2 = 0.0;
    let mut xt_log = 0.0;
    let mut idx = vec![0usize; m];
    loop {
        let mut prob = 1.0;
        let mut x = 0.0;
        let mut xt = 0.0;
        for &i in &idx {
            let v = spec.support[i];
            prob *= spec.probs[i];
            x += v.exp();
            xt += (-v).max(0.0) * v.exp();
        }
        let lx = x.ln().max(0.0);
        x_log2 += prob * x * lx * lx;
        if xt > 0.0 {
            xt_log += prob * xt * xt.ln().max(0.0);
        }
        // odometer over the m child indices
        let mut d = 0;
        loop {
            if d == m {
                return (x_log2, xt_log);
            }
            idx[d] += 1;
            if idx[d] < s {
                break;
            }
            idx[d] = 0;
            d += 1;
        }
    }
}

/// Common span of the displacement support: Some(d) when all pairwise
/// differences are integer multiples of a single d > 0 (the law then lives
/// on an affine lattice), None when the differences are incommensurable.
///
/// Real-valued gcd by the Euclidean algorithm; incommensurable inputs drive
/// the remainder chain toward zero, so a span collapsing below the
/// detection threshold is reported as non-lattice.
fn displacement_lattice(support: &[f64]) -> Option<f64> {
    if support.len() < 2 {
        return Some(0.0);
    }
    let base = support[0];
    let scale = support
        .iter()
        .map(|v| (v - base).abs())
        .fold(0.0f64, f64::max);
    let tol = 1e-9 * scale;
    let mut g = 0.0f64;
    for &v in &support[1..] {
        let mut a = g;
        let mut b = (v - base).abs();
        while b > tol {
            let r = a % b;
            a = b;
            b = r;
        }
        g = a;
    }
    if g > 1e-6 * scale {
        Some(g)
    } else {
        None
    }
}

/// Solution of the drift equation for a scheme biased below 1/2.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct DriftSolution {
    /// Root of 2 p^r q^{1-r} = r^r (1-r)^{1-r} in (p, 1): the linear speed
    /// in the {0,1} parametrization of the walk.
    pub rho01: f64,
    /// 2 rho01 - 1: the speed of E M_n for the +-1 scheme itself.
    pub speed_pm1: f64,
    /// Residual of the drift equation (log form) at the root.
    pub residual: f64,
}

/// Solve the drift equation for p < 1/2 by bisection on its log form
/// ln 2 = r ln(r/p) + (1-r) ln((1-r)/q), which decreases strictly in r
/// across (p, 1) and straddles zero there.
pub fn solve_drift_equation(p: f64) -> Result<DriftSolution> {
    if !(p > 0.0 && p < 0.5) {
        return Err(Error::RequiresDrift(p));
    }
    let q = 1.0 - p;
    let h = |r: f64| {
        let left = if r == 0.0 { 0.0 } else { r * (r / p).ln() };
        let right = if r == 1.0 {
            0.0
        } else {
            (1.0 - r) * ((1.0 - r) / q).ln()
        };
        std::f64::consts::LN_2 - left - right
    };
    let rho = bisect(h, p, 1.0, 1e-13)?;
    Ok(DriftSolution {
        rho01: rho,
        speed_pm1: 2.0 * rho - 1.0,
        residual: h(rho).abs(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn cumulants_of_symmetric_walk() {
        let spec = ProgenySpec::bernoulli_pm1(0.5).unwrap();
        let c0 = cumulants(&spec, 0.0).unwrap();
        assert!((c0.phi - 2.0).abs() < 1e-14);
        assert!((c0.rate + std::f64::consts::LN_2).abs() < 1e-14);
        for &g in &[0.3, 1.0, 2.5] {
            let c = cumulants(&spec, g).unwrap();
            assert!((c.phi - 2.0 * g.cosh()).abs() < 1e-12 * c.phi);
        }
        assert!(cumulants(&spec, -0.1).is_err());
    }

    #[test]
    fn rate_is_nondecreasing() {
        for &p in &[0.1, 0.3, 0.5] {
            let spec = ProgenySpec::bernoulli_pm1(p).unwrap();
            let mut prev = f64::NEG_INFINITY;
            for i in 0..=200 {
                let g = i as f64 * 0.1;
                let r = cumulants(&spec, g).unwrap().rate;
                assert!(r >= prev - 1e-12, "p={p} g={g}");
                prev = r;
            }
        }
    }

    #[test]
    fn rate_limit_closed_form() {
        // -ln(2p) for the +-1 walk
        for &p in &[0.1, 0.3, 0.5, 0.7] {
            let spec = ProgenySpec::bernoulli_pm1(p).unwrap();
            assert!((r_infinity(&spec) + (2.0 * p).ln()).abs() < 1e-14);
        }
        let spec = ProgenySpec::bernoulli_pm1(0.3).unwrap();
        assert!((r_infinity(&spec) - 0.6f64.ln().abs()).abs() < 1e-12);
    }

    #[test]
    fn critical_tilt_solves_rate_equation() {
        let spec = ProgenySpec::bernoulli_pm1(0.3).unwrap();
        let g = solve_critical_gamma(&spec).unwrap();
        assert!(cumulants(&spec, g).unwrap().rate.abs() < 1e-10);
        // frozen from the bisection oracle
        assert!((g - 1.351334643920248).abs() < 1e-9);
        // the {0,1} reparametrization doubles the tilt
        let spec01 = ProgenySpec::bernoulli01(0.3).unwrap();
        let g01 = solve_critical_gamma(&spec01).unwrap();
        assert!((g01 - 2.0 * g).abs() < 1e-9);
    }

    #[test]
    fn no_tilt_at_and_above_half() {
        for &p in &[0.5, 0.6] {
            let spec = ProgenySpec::bernoulli_pm1(p).unwrap();
            assert!(matches!(
                solve_critical_gamma(&spec),
                Err(Error::NoCriticalTilt(_))
            ));
        }
    }

    #[test]
    fn tilt_normalizes_the_walk() {
        let spec = ProgenySpec::bernoulli_pm1(0.3).unwrap();
        let tilted = reduce_to_critical(&spec).unwrap();
        let rep = check_aidekon(&tilted);
        assert!((rep.mean_reproduction - 1.0).abs() < 1e-10);
        assert!(rep.critical_mean_shift.abs() < 1e-10);
        assert!(tilted.tilt().is_some());
        // tilting a critical law again solves at gamma = 1
        let g2 = solve_critical_gamma(&tilted).unwrap();
        assert!((g2 - 1.0).abs() < 1e-9);
        assert!(reduce_to_critical(&ProgenySpec::bernoulli_pm1(0.5).unwrap()).is_err());
    }

    #[test]
    fn aidekon_lattice_detection() {
        let sym = check_aidekon(&ProgenySpec::bernoulli_pm1(0.5).unwrap());
        assert!(sym.lattice && !sym.thm1_applicable);

        let tilted = reduce_to_critical(&ProgenySpec::bernoulli_pm1(0.3).unwrap()).unwrap();
        let rep = check_aidekon(&tilted);
        assert!(rep.supercritical && rep.lattice && rep.moments_finite);
        assert!(!rep.thm1_applicable);

        // incommensurable three-point support: no common span
        let irr = ProgenySpec::new(
            2,
            &[(-1.0, 0.25), (0.0, 0.5), (std::f64::consts::SQRT_2, 0.25)],
        )
        .unwrap();
        let rep = check_aidekon(&irr);
        assert!(!rep.lattice);

        // commensurable but fractional span
        let frac = ProgenySpec::new(2, &[(0.0, 0.5), (0.5, 0.25), (2.0, 0.25)]).unwrap();
        assert!(check_aidekon(&frac).lattice);
    }

    #[test]
    fn aidekon_moments_for_small_specs_are_exact() {
        // X = e^{V_1} + e^{V_2} enumerated over the four child pairs
        let spec = ProgenySpec::bernoulli_pm1(0.5).unwrap();
        let rep = check_aidekon(&spec);
        let e = 1.0f64.exp();
        let ei = (-1.0f64).exp();
        let mut expect = 0.0;
        for (a, pa) in [(e, 0.5), (ei, 0.5)] {
            for (b, pb) in [(e, 0.5), (ei, 0.5)] {
                let x: f64 = a + b;
                expect += pa * pb * x * x.ln().max(0.0).powi(2);
            }
        }
        assert!((rep.x_log2_moment - expect).abs() < 1e-12);
        assert!(rep.xtilde_log_moment >= 0.0);
    }

    #[test]
    fn drift_equation_solution() {
        let d = solve_drift_equation(0.3).unwrap();
        assert!(d.residual < 1e-10);
        // frozen from the bisection oracle
        assert!((d.rho01 - 0.86475653747900182).abs() < 1e-9);
        assert!((d.speed_pm1 - 0.72951307495800364).abs() < 1e-9);
        assert!(solve_drift_equation(0.5).is_err());
        assert!(solve_drift_equation(0.0).is_err());
    }

    #[test]
    fn drift_approaches_unit_speed_at_half() {
        let d = solve_drift_equation(0.4999).unwrap();
        assert!(d.rho01 > 0.999 && d.speed_pm1 > 0.998);
    }

    #[test]
    fn tilt_consistency_with_drift_root() {
        // e^{gamma*} of the {0,1} walk equals rho q / (p (1 - rho))
        for &p in &[0.1, 0.2, 0.3, 0.4] {
            let g01 = solve_critical_gamma(&ProgenySpec::bernoulli01(p).unwrap()).unwrap();
            let rho = solve_drift_equation(p).unwrap().rho01;
            let expect = (rho * (1.0 - p) / (p * (1.0 - rho))).ln();
            assert!((g01 - expect).abs() < 1e-9, "p={p}");
        }
    }

    #[test]
    fn progeny_validation() {
        assert!(ProgenySpec::new(1, &[(0.0, 1.0)]).is_err());
        assert!(ProgenySpec::new(2, &[]).is_err());
        assert!(ProgenySpec::new(2, &[(0.0, 0.6), (1.0, 0.3)]).is_err());
        assert!(ProgenySpec::new(2, &[(0.0, 0.5), (0.0, 0.5)]).is_err());
        assert!(ProgenySpec::new(2, &[(0.0, -0.5), (1.0, 1.5)]).is_err());
    }
}
