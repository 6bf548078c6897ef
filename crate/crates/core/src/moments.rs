//! Bags of observations and their moment vectors.
//!
//! The reduction that makes everything downstream linear algebra: a bag of
//! scalar observations becomes the vector of basis-polynomial sums over its
//! members, and a single point x becomes the moment vector of a bag whose
//! observations all sit at x.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::accum::CompensatedSum;
use crate::basis::BasisSpec;
use crate::{Error, Result};

/// How moment sums are scaled.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum NormalizationMode {
    /// Plain sums over observations. Matches the equal-bag-size setting where
    /// the common size N carries through every formula.
    RawSum,
    /// Sums divided by bag size, so each bag contributes an average and bags
    /// of different sizes stay comparable. The default.
    SizeNormalized,
}

impl fmt::Display for NormalizationMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            NormalizationMode::RawSum => "raw_sum",
            NormalizationMode::SizeNormalized => "size_normalized",
        })
    }
}

impl FromStr for NormalizationMode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "raw_sum" => Ok(NormalizationMode::RawSum),
            "size_normalized" => Ok(NormalizationMode::SizeNormalized),
            other => Err(Error::InvalidInput(format!(
                "unknown normalization mode {other:?} (expected raw_sum or size_normalized)"
            ))),
        }
    }
}

/// One group of observations sharing a single label.
#[derive(Clone, Debug, PartialEq)]
pub struct Bag {
    observations: Vec<f64>,
    label: f64,
}

impl Bag {
    /// At least one observation; observations and label finite.
    pub fn new(observations: Vec<f64>, label: f64) -> Result<Self> {
        if observations.is_empty() {
            return Err(Error::InvalidInput("bag has no observations".into()));
        }
        if let Some(bad) = observations.iter().find(|v| !v.is_finite()) {
            return Err(Error::InvalidInput(format!(
                "bag contains non-finite observation {bad}"
            )));
        }
        if !label.is_finite() {
            return Err(Error::InvalidInput(format!(
                "bag label {label} is not finite"
            )));
        }
        Ok(Self {
            observations,
            label,
        })
    }

    pub fn observations(&self) -> &[f64] {
        &self.observations
    }

    pub fn label(&self) -> f64 {
        self.label
    }

    pub fn size(&self) -> usize {
        self.observations.len()
    }
}

/// A list of bags; the unit of fitting. Never empty.
#[derive(Clone, Debug, PartialEq)]
pub struct BagDataset {
    bags: Vec<Bag>,
}

impl BagDataset {
    pub fn new(bags: Vec<Bag>) -> Result<Self> {
        if bags.is_empty() {
            return Err(Error::InvalidInput("dataset has no bags".into()));
        }
        Ok(Self { bags })
    }

    pub fn bags(&self) -> &[Bag] {
        &self.bags
    }

    /// Number of bags; at least 1 by construction.
    #[allow(clippy::len_without_is_empty)]
    pub fn len(&self) -> usize {
        self.bags.len()
    }

    pub fn mean_bag_size(&self) -> f64 {
        let total: usize = self.bags.iter().map(Bag::size).sum();
        total as f64 / self.bags.len() as f64
    }

    /// Smallest and largest observation across every bag.
    pub fn observation_range(&self) -> (f64, f64) {
        let mut lo = f64::INFINITY;
        let mut hi = f64::NEG_INFINITY;
        for bag in &self.bags {
            for &x in bag.observations() {
                lo = lo.min(x);
                hi = hi.max(x);
            }
        }
        (lo, hi)
    }

    /// Smallest and largest label.
    pub fn label_range(&self) -> (f64, f64) {
        let mut lo = f64::INFINITY;
        let mut hi = f64::NEG_INFINITY;
        for bag in &self.bags {
            lo = lo.min(bag.label());
            hi = hi.max(bag.label());
        }
        (lo, hi)
    }
}

/// Moment vector of a bag, a sample, or a point state, tagged with the basis
/// and scaling it was produced under so consumers can refuse mismatches.
#[derive(Clone, Debug, PartialEq)]
pub struct MomentVector {
    values: Vec<f64>,
    basis: BasisSpec,
    mode: NormalizationMode,
}

impl MomentVector {
    pub fn new(values: Vec<f64>, basis: BasisSpec, mode: NormalizationMode) -> Result<Self> {
        if values.len() != basis.degree_count() {
            return Err(Error::InvalidInput(format!(
                "moment vector has {} entries for a basis of {}",
                values.len(),
                basis.degree_count()
            )));
        }
        if values.iter().any(|v| !v.is_finite()) {
            return Err(Error::InvalidInput(
                "moment vector contains a non-finite entry".into(),
            ));
        }
        Ok(Self {
            values,
            basis,
            mode,
        })
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn basis(&self) -> &BasisSpec {
        &self.basis
    }

    pub fn mode(&self) -> NormalizationMode {
        self.mode
    }
}

/// Moment vector of an unlabelled sample of observations.
///
/// The sample is accumulated in sorted order with compensated sums, so the
/// result does not depend on how the observations were arranged — bit for
/// bit — and long bags do not drift.
pub fn sample_moments(
    observations: &[f64],
    spec: &BasisSpec,
    mode: NormalizationMode,
) -> Result<MomentVector> {
    if observations.is_empty() {
        return Err(Error::InvalidInput("sample has no observations".into()));
    }
    if let Some(bad) = observations.iter().find(|v| !v.is_finite()) {
        return Err(Error::InvalidInput(format!(
            "sample contains non-finite observation {bad}"
        )));
    }
    let mut sorted = observations.to_vec();
    sorted.sort_by(f64::total_cmp);

    let d = spec.degree_count();
    let mut acc = vec![CompensatedSum::new(); d];
    let mut row = vec![0.0; d];
    for &x in &sorted {
        spec.eval_into(x, &mut row);
        for (a, &q) in acc.iter_mut().zip(row.iter()) {
            a.add(q);
        }
    }
    let values: Vec<f64> = match mode {
        NormalizationMode::RawSum => acc.iter().map(CompensatedSum::value).collect(),
        NormalizationMode::SizeNormalized => {
            let n = observations.len() as f64;
            acc.iter().map(|a| a.value() / n).collect()
        }
    };
    MomentVector::new(values, spec.clone(), mode)
}

/// Moment vector of a bag. Infallible: bags are validated at construction.
pub fn bag_moments(bag: &Bag, spec: &BasisSpec, mode: NormalizationMode) -> MomentVector {
    sample_moments(bag.observations(), spec, mode)
        .expect("bag observations are validated nonempty and finite")
}

/// Moment vector of the pure point x, weighted like a bag of
/// `reference_size` coincident observations (raw_sum mode only; the size
/// cancels under size normalization).
pub fn point_state_moments(
    x: f64,
    reference_size: f64,
    spec: &BasisSpec,
    mode: NormalizationMode,
) -> Result<MomentVector> {
    if !reference_size.is_finite() || reference_size <= 0.0 {
        return Err(Error::InvalidInput(format!(
            "reference size {reference_size} is not a positive real"
        )));
    }
    let mut values = spec.evaluate(x)?;
    if mode == NormalizationMode::RawSum {
        for v in &mut values {
            *v *= reference_size;
        }
    }
    MomentVector::new(values, spec.clone(), mode)
}
