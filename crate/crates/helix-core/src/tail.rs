//! Exact tail function F(x) = P(M' >= x) of the normalized maximum, the
//! state evolved by the dynamic programs.
//!
//! Storage is split into three zones along x:
//!
//! * x <= sat: F(x) = 1 to double precision, kept implicit;
//! * a complement zone holding c(x) = 1 - F(x) (only populated for drifting
//!   schemes, p < 1/2);
//! * a direct zone holding F(x) itself, down to the prune floor.
//!
//! The complement zone matters: for p < 1/2 the advancing front is pulled by
//! the growth of 1 - F on its left flank, where F itself rounds to 1.0 long
//! before the relevant mass is resolved. Keeping that flank as complements
//! down to 1e-300 lets the front travel at its true speed instead of
//! stalling at the resolution of f64 near 1.

use std::collections::VecDeque;
use std::io::{self, BufRead, Write};

use crate::error::{Error, Result};

/// Values below this are treated as exactly 0 and dropped from the right
/// edge (or, for complements, folded into the saturated prefix).
pub const PRUNE_FLOOR: f64 = 1e-300;

/// Direct-zone values at least 1 - SAT_EPS are frozen into the implicit
/// prefix; f64 cannot usefully distinguish them from 1.
pub const SAT_EPS: f64 = 1e-16;

/// Tail function of the level-n normalized maximum under bias p.
#[derive(Debug, Clone, PartialEq)]
pub struct TailFunction {
    n: u32,
    p: f64,
    /// F(x) = 1 for every x <= sat (always covers x <= 0).
    sat: i64,
    /// c(x) = 1 - F(x) for x in [sat+1, sat+comp.len()].
    comp: VecDeque<f64>,
    /// F(x) for x in [sat+comp.len()+1, hi].
    vals: VecDeque<f64>,
}

impl TailFunction {
    /// Level-0 tail: F(x) = 1 for x <= 0, F(x) = 0 for x > 0.
    pub fn initial(p: f64) -> Result<Self> {
        check_bias(p)?;
        Ok(TailFunction {
            n: 0,
            p,
            sat: 0,
            comp: VecDeque::new(),
            vals: VecDeque::new(),
        })
    }

    /// Build from explicit direct-zone values F(1), F(2), ... .
    ///
    /// Rejects values outside [0,1], any increase along x, and supports
    /// extending past the level index. Trailing sub-floor values are dropped.
    pub fn from_values(n: u32, p: f64, values: Vec<f64>) -> Result<Self> {
        check_bias(p)?;
        let mut prev = 1.0f64;
        for (i, &v) in values.iter().enumerate() {
            let x = i as i64 + 1;
            if !(0.0..=1.0).contains(&v) || v.is_nan() {
                return Err(Error::TailValueRange { x, value: v });
            }
            if v > prev {
                return Err(Error::NonMonotoneTail { x });
            }
            prev = v;
        }
        let mut vals: VecDeque<f64> = values.into();
        while matches!(vals.back(), Some(&v) if v < PRUNE_FLOOR) {
            vals.pop_back();
        }
        let hi = vals.len() as i64;
        if hi > n as i64 {
            return Err(Error::SupportPastLevel { hi, n });
        }
        Ok(TailFunction {
            n,
            p,
            sat: 0,
            comp: VecDeque::new(),
            vals,
        })
    }

    pub fn level(&self) -> u32 {
        self.n
    }

    pub fn bias(&self) -> f64 {
        self.p
    }

    /// Largest x with a stored (or saturated) value; F(x) = 0 beyond.
    pub fn hi(&self) -> i64 {
        self.sat + self.comp.len() as i64 + self.vals.len() as i64
    }

    /// F(x), using whichever zone covers x.
    pub fn value(&self, x: i64) -> f64 {
        if x <= self.sat {
            return 1.0;
        }
        let i = (x - self.sat - 1) as usize;
        if i < self.comp.len() {
            return 1.0 - self.comp[i];
        }
        let j = i - self.comp.len();
        if j < self.vals.len() {
            return self.vals[j];
        }
        0.0
    }

    /// 1 - F(x) without cancellation where a complement is stored.
    pub fn complement(&self, x: i64) -> f64 {
        if x <= self.sat {
            return 0.0;
        }
        let i = (x - self.sat - 1) as usize;
        if i < self.comp.len() {
            return self.comp[i];
        }
        let j = i - self.comp.len();
        if j < self.vals.len() {
            return 1.0 - self.vals[j];
        }
        1.0
    }

    /// Sum of F(x) over x >= 1, i.e. the mean of the normalized maximum.
    pub fn mass(&self) -> f64 {
        let mut s = self.sat as f64;
        for &c in &self.comp {
            s += 1.0 - c;
        }
        for &v in &self.vals {
            s += v;
        }
        s
    }

    /// Number of stored cells (cost proxy for one evolution step).
    pub fn window_len(&self) -> usize {
        self.comp.len() + self.vals.len()
    }

    pub(crate) fn sat(&self) -> i64 {
        self.sat
    }

    pub(crate) fn comp_len(&self) -> usize {
        self.comp.len()
    }

    pub(crate) fn from_zones(
        n: u32,
        p: f64,
        sat: i64,
        comp: VecDeque<f64>,
        vals: VecDeque<f64>,
    ) -> Self {
        TailFunction { n, p, sat, comp, vals }
    }

    /// CSV serialization: header `x,F`, one row per x in [1, hi], ascending.
    /// Values print in shortest round-trip form.
    pub fn write_csv<W: Write>(&self, mut w: W) -> io::Result<()> {
        writeln!(w, "x,F")?;
        for x in 1..=self.hi() {
            writeln!(w, "{},{}", x, self.value(x))?;
        }
        Ok(())
    }

    /// Parse the [`write_csv`](Self::write_csv) format.
    pub fn read_csv<R: BufRead>(n: u32, p: f64, r: R) -> Result<Self> {
        let mut values = Vec::new();
        for (lineno, line) in r.lines().enumerate() {
            let line = line.map_err(|e| Error::InvalidPmf(format!("io error: {e}")))?;
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') || line == "x,F" {
                continue;
            }
            let (xs, fs) = line.split_once(',').ok_or_else(|| {
                Error::InvalidPmf(format!("line {}: expected `x,F`", lineno + 1))
            })?;
            let x: i64 = xs
                .trim()
                .parse()
                .map_err(|_| Error::InvalidPmf(format!("line {}: bad x", lineno + 1)))?;
            let f: f64 = fs
                .trim()
                .parse()
                .map_err(|_| Error::InvalidPmf(format!("line {}: bad F", lineno + 1)))?;
            if x as usize != values.len() + 1 {
                return Err(Error::InvalidPmf(format!(
                    "line {}: x must run 1,2,... without gaps",
                    lineno + 1
                )));
            }
            values.push(f);
        }
        TailFunction::from_values(n, p, values)
    }
}

pub(crate) fn check_bias(p: f64) -> Result<f64> {
    if !(p > 0.0 && p < 1.0) {
        return Err(Error::BiasRange(p));
    }
    Ok(p)
}
