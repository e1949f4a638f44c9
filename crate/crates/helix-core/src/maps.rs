//! The mutually inverse scalar maps that generate invariant tail profiles of
//! the symmetric scheme.
//!
//! An invariant tail satisfies 4 F(x) = (F(x) + F(x-1))^2, so consecutive
//! values are linked by F(x) = shift_down(F(x-1)) and
//! F(x-1) = shift_up(F(x)). Algebraically
//! shift_down(y) = 2 - y - 2 sqrt(1-y) and shift_up(y) = 2 sqrt(y) - y;
//! `shift_down` is evaluated as (1 - sqrt(1-y))^2 in conjugate form, which
//! does not cancel at either end of [0, 1].

use crate::error::{Error, Result};

/// Slack accepted on the [0,1] domain before reporting a range error.
const DOMAIN_SLACK: f64 = 1e-12;

#[inline]
fn check_unit(y: f64) -> Result<f64> {
    if y.is_nan() || y < -DOMAIN_SLACK || y > 1.0 + DOMAIN_SLACK {
        return Err(Error::ProbabilityRange(y));
    }
    Ok(y.clamp(0.0, 1.0))
}

/// Value of an invariant tail one site to the right: y -> (1 - sqrt(1-y))^2.
///
/// Nondecreasing, with shift_down(y) <= y; fixed points 0 and 1.
pub fn shift_down(y: f64) -> Result<f64> {
    Ok(shift_down_raw(check_unit(y)?))
}

/// Value of an invariant tail one site to the left: y -> 2 sqrt(y) - y.
///
/// Nondecreasing inverse of [`shift_down`], with shift_up(y) >= y.
pub fn shift_up(y: f64) -> Result<f64> {
    Ok(shift_up_raw(check_unit(y)?))
}

/// `steps`-fold composition of [`shift_down`].
pub fn iterate_down(y: f64, steps: u32) -> Result<f64> {
    let mut v = check_unit(y)?;
    for _ in 0..steps {
        v = shift_down_raw(v);
    }
    Ok(v)
}

/// `steps`-fold composition of [`shift_up`].
pub fn iterate_up(y: f64, steps: u32) -> Result<f64> {
    let mut v = check_unit(y)?;
    for _ in 0..steps {
        v = shift_up_raw(v);
    }
    Ok(v)
}

#[inline]
pub(crate) fn shift_down_raw(y: f64) -> f64 {
    // conjugate form of (1 - sqrt(1-y))^2: full precision at both ends,
    // where either 2 - y - 2 sqrt(1-y) (y -> 1) or 1 - sqrt(1-y) (y -> 0)
    // would cancel
    let t = y / (1.0 + (1.0 - y).sqrt());
    (t * t).clamp(0.0, 1.0)
}

#[inline]
pub(crate) fn shift_up_raw(y: f64) -> f64 {
    (2.0 * y.sqrt() - y).clamp(0.0, 1.0)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn point_values() {
        assert_eq!(shift_down(0.0).unwrap(), 0.0);
        assert_eq!(shift_down(0.75).unwrap(), 0.25);
        assert!((shift_down(0.5).unwrap() - (1.5 - std::f64::consts::SQRT_2)).abs() < 1e-15);
        assert_eq!(shift_up(1.0).unwrap(), 1.0);
        assert_eq!(shift_up(0.25).unwrap(), 0.75);
        assert!((shift_up(shift_down(0.5).unwrap()).unwrap() - 0.5).abs() < 1e-12);
    }

    #[test]
    fn stable_form_matches_textbook_form() {
        // conjugate == (1 - sqrt(1-y))^2 == 2 - y - 2 sqrt(1-y) up to roundoff
        for i in 0..=1000 {
            let y = i as f64 / 1000.0;
            let naive = 2.0 - y - 2.0 * (1.0 - y).sqrt();
            let squared = (1.0 - (1.0 - y).sqrt()).powi(2);
            assert!((shift_down(y).unwrap() - naive).abs() < 1e-12, "y={y}");
            assert!((shift_down(y).unwrap() - squared).abs() < 1e-12, "y={y}");
        }
        // deep right flank: the conjugate form keeps relative precision
        let tiny = 1.65e-17;
        let d = shift_down(tiny).unwrap();
        assert!((d - tiny * tiny / 4.0).abs() < 1e-16 * tiny * tiny);
    }

    #[test]
    fn iteration_and_inverse_composition() {
        assert_eq!(iterate_down(0.3, 0).unwrap(), 0.3);
        let two = iterate_down(0.75, 2).unwrap();
        assert!((two - (1.75 - 2.0 * 0.75f64.sqrt())).abs() < 1e-15);
        let roundtrip = iterate_up(iterate_down(0.3, 5).unwrap(), 5).unwrap();
        assert!((roundtrip - 0.3).abs() < 1e-9);
    }

    #[test]
    fn contraction_direction() {
        for i in 0..=100 {
            let y = i as f64 / 100.0;
            assert!(shift_down(y).unwrap() <= y + 1e-15);
            assert!(shift_up(y).unwrap() >= y - 1e-15);
        }
    }

    #[test]
    fn domain_errors() {
        assert!(shift_down(-0.01).is_err());
        assert!(shift_up(1.01).is_err());
        assert!(shift_down(f64::NAN).is_err());
        // inside the slack band the input is clamped
        assert_eq!(shift_down(1.0 + 5e-13).unwrap(), 1.0);
    }
}
