//! Polynomial bases evaluated by three-term recurrence.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::{Error, Result};

/// Polynomial family backing a basis.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PolyFamily {
    /// Chebyshev of the first kind. The default: values stay in [-1, 1] over
    /// the working interval, which keeps Gram matrices of high degree usable.
    Chebyshev,
    /// Legendre. Also stable under the recurrence, slightly wider spread of
    /// scales than Chebyshev.
    Legendre,
    /// Plain powers of the mapped coordinate. Only reasonable as a low-degree
    /// cross-check; Gram matrices built from monomials are too ill-conditioned
    /// to invert reliably once the degree count passes ~10.
    Monomial,
}

impl fmt::Display for PolyFamily {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            PolyFamily::Chebyshev => "chebyshev",
            PolyFamily::Legendre => "legendre",
            PolyFamily::Monomial => "monomial",
        })
    }
}

impl FromStr for PolyFamily {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "chebyshev" => Ok(PolyFamily::Chebyshev),
            "legendre" => Ok(PolyFamily::Legendre),
            "monomial" => Ok(PolyFamily::Monomial),
            other => Err(Error::InvalidInput(format!(
                "unknown polynomial family {other:?} (expected chebyshev, legendre, or monomial)"
            ))),
        }
    }
}

/// A basis of `degree_count` polynomials over a working interval `[a, b]`.
///
/// Evaluation maps x to t = (2x - a - b)/(b - a), which sends [a, b] onto
/// [-1, 1], and runs the family's recurrence in t. Element 0 is always the
/// constant 1. Points outside the interval are allowed (|t| then exceeds 1);
/// the recurrence keeps working, the values just grow.
#[derive(Clone, Debug, PartialEq)]
pub struct BasisSpec {
    family: PolyFamily,
    degree_count: usize,
    domain: (f64, f64),
}

impl BasisSpec {
    pub fn new(family: PolyFamily, degree_count: usize, a: f64, b: f64) -> Result<Self> {
        if degree_count == 0 {
            return Err(Error::InvalidInput(
                "degree_count must be at least 1".into(),
            ));
        }
        if !a.is_finite() || !b.is_finite() || a >= b {
            return Err(Error::InvalidInput(format!(
                "domain [{a}, {b}] is not a finite interval with a < b"
            )));
        }
        Ok(Self {
            family,
            degree_count,
            domain: (a, b),
        })
    }

    pub fn chebyshev(degree_count: usize, a: f64, b: f64) -> Result<Self> {
        Self::new(PolyFamily::Chebyshev, degree_count, a, b)
    }

    /// Basis whose domain covers an observed data range. A degenerate range
    /// (every observation identical) is widened by one unit each side so the
    /// affine map stays defined.
    pub fn covering(family: PolyFamily, degree_count: usize, lo: f64, hi: f64) -> Result<Self> {
        if !lo.is_finite() || !hi.is_finite() || lo > hi {
            return Err(Error::InvalidInput(format!(
                "observed range [{lo}, {hi}] is not usable as a domain"
            )));
        }
        if lo == hi {
            Self::new(family, degree_count, lo - 1.0, hi + 1.0)
        } else {
            Self::new(family, degree_count, lo, hi)
        }
    }

    pub fn family(&self) -> PolyFamily {
        self.family
    }

    pub fn degree_count(&self) -> usize {
        self.degree_count
    }

    pub fn domain(&self) -> (f64, f64) {
        self.domain
    }

    /// The recurrence coordinate for x. Written center-and-halfwidth so the
    /// map is exactly odd around the center of a symmetric domain: points
    /// x and -x then produce coordinates t and -t bit for bit.
    fn unit_coord(&self, x: f64) -> f64 {
        let (a, b) = self.domain;
        let center = 0.5 * (a + b);
        let half_width = 0.5 * (b - a);
        (x - center) / half_width
    }

    /// Evaluates [Q_0(x), ..., Q_{d-1}(x)].
    pub fn evaluate(&self, x: f64) -> Result<Vec<f64>> {
        if !x.is_finite() {
            return Err(Error::InvalidInput(format!(
                "cannot evaluate basis at non-finite x = {x}"
            )));
        }
        let mut out = vec![0.0; self.degree_count];
        self.eval_into(x, &mut out);
        Ok(out)
    }

    /// Recurrence core; `x` must be finite and `out.len() == degree_count`.
    pub(crate) fn eval_into(&self, x: f64, out: &mut [f64]) {
        debug_assert_eq!(out.len(), self.degree_count);
        let t = self.unit_coord(x);
        out[0] = 1.0;
        if out.len() == 1 {
            return;
        }
        match self.family {
            PolyFamily::Chebyshev => {
                out[1] = t;
                for k in 2..out.len() {
                    out[k] = 2.0 * t * out[k - 1] - out[k - 2];
                }
            }
            PolyFamily::Legendre => {
                out[1] = t;
                for k in 2..out.len() {
                    let kf = k as f64;
                    out[k] = ((2.0 * kf - 1.0) * t * out[k - 1] - (kf - 1.0) * out[k - 2]) / kf;
                }
            }
            PolyFamily::Monomial => {
                for k in 1..out.len() {
                    out[k] = t * out[k - 1];
                }
            }
        }
    }
}
