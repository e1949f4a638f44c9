//! Small numerical helpers: stable log-sum-exp, bracketed bisection,
//! tilted moments of a finite pmf, and the SplitMix64 generator used for
//! reproducible Monte Carlo streams.

use crate::error::{Error, Result};

/// log(exp(a) + exp(b)) without overflow.
#[inline]
pub fn logsumexp2(a: f64, b: f64) -> f64 {
    if a == f64::NEG_INFINITY && b == f64::NEG_INFINITY {
        return f64::NEG_INFINITY;
    }
    if a > b {
        a + (b - a).exp().ln_1p()
    } else {
        b + (a - b).exp().ln_1p()
    }
}

/// log of the sum of exponentials of `xs`.
///
/// The exponentials are accumulated in ascending order after factoring the
/// maximum out, so tails built from hundreds of terms spanning e^-700..e^0
/// keep close to full relative precision.
pub fn logsumexp_sorted(xs: &[f64]) -> f64 {
    let mut finite: Vec<f64> = xs.iter().copied().filter(|x| *x > f64::NEG_INFINITY).collect();
    if finite.is_empty() {
        return f64::NEG_INFINITY;
    }
    finite.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let m = *finite.last().unwrap();
    let mut s = 0.0;
    for x in &finite {
        s += (x - m).exp();
    }
    m + s.ln()
}

/// Root of a continuous function on a sign-changing bracket, by bisection.
///
/// Runs until the bracket width drops under `tol` or the midpoint can no
/// longer be distinguished from the endpoints in f64.
pub fn bisect<F: Fn(f64) -> f64>(f: F, mut lo: f64, mut hi: f64, tol: f64) -> Result<f64> {
    let mut flo = f(lo);
    let fhi = f(hi);
    if flo == 0.0 {
        return Ok(lo);
    }
    if fhi == 0.0 {
        return Ok(hi);
    }
    if flo.signum() == fhi.signum() {
        return Err(Error::NoBracket { lo, hi });
    }
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi || (hi - lo) < tol {
            break;
        }
        let fm = f(mid);
        if fm == 0.0 {
            return Ok(mid);
        }
        if fm.signum() == flo.signum() {
            lo = mid;
            flo = fm;
        } else {
            hi = mid;
        }
    }
    Ok(0.5 * (lo + hi))
}

/// Log moment generating function of a finite pmf together with the mean and
/// variance of the exponentially tilted law.
///
/// Returns (ln E e^{g X}, E_tilt X, Var_tilt X). The largest exponent is
/// factored out, so arbitrarily large `gamma` stays finite.
pub fn log_mgf_moments(support: &[f64], probs: &[f64], gamma: f64) -> (f64, f64, f64) {
    debug_assert_eq!(support.len(), probs.len());
    let top = support
        .iter()
        .copied()
        .fold(f64::NEG_INFINITY, f64::max);
    let mut w_sum = 0.0;
    let mut m1 = 0.0;
    let mut m2 = 0.0;
    for (&v, &p) in support.iter().zip(probs) {
        let w = p * (gamma * (v - top)).exp();
        w_sum += w;
        m1 += w * v;
        m2 += w * v * v;
    }
    let mean = m1 / w_sum;
    let var = (m2 / w_sum - mean * mean).max(0.0);
    (gamma * top + w_sum.ln(), mean, var)
}

/// Half-width of the Dvoretzky-Kiefer-Wolfowitz uniform confidence band.
pub fn dkw_epsilon(samples: u64, delta: f64) -> f64 {
    ((2.0 / delta).ln() / (2.0 * samples as f64)).sqrt()
}

/// SplitMix64: tiny, fast, well-mixed 64-bit generator. Not cryptographic.
#[derive(Clone, Debug)]
pub struct SplitMix64 {
    state: u64,
}

#[inline]
fn splitmix64_mix(mut z: u64) -> u64 {
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

impl SplitMix64 {
    pub fn seed_from_u64(seed: u64) -> Self {
        SplitMix64 { state: seed }
    }

    #[inline]
    pub fn next_u64(&mut self) -> u64 {
        self.state = self.state.wrapping_add(0x9E37_79B9_7F4A_7C15);
        splitmix64_mix(self.state)
    }

    /// Uniform draw in [0, 1) with the full 53 bits of f64 precision.
    #[inline]
    pub fn next_f64(&mut self) -> f64 {
        const DEN: f64 = (1u64 << 53) as f64;
        ((self.next_u64() >> 11) as f64) / DEN
    }
}

/// Seed of the replica-`index` stream derived from a master seed.
///
/// Fixed published mixing: splitmix64_mix(master + (index + 1) * 2^64/phi).
/// Every replica gets a decorrelated stream and the mapping never changes,
/// which keeps runs bit-reproducible independent of scheduling.
pub fn replica_seed(master: u64, index: u64) -> u64 {
    splitmix64_mix(master.wrapping_add((index.wrapping_add(1)).wrapping_mul(0x9E37_79B9_7F4A_7C15)))
}
