//! One-pass fitting of bag statistics and the two closed-form estimators.
//!
//! Fitting accumulates three sums over bags, with ⟨Q⟩ the bag moment vector:
//!
//! * Y_q  = Σ_l y⁽ˡ⁾ ⟨Q_q⟩⁽ˡ⁾
//! * G_qr = Σ_l ⟨Q_q⟩⁽ˡ⁾ ⟨Q_r⟩⁽ˡ⁾
//! * yG_qr = Σ_l y⁽ˡ⁾ ⟨Q_q⟩⁽ˡ⁾ ⟨Q_r⟩⁽ˡ⁾
//!
//! Predictions are then closed-form in any state m: the least-squares
//! surface mᵀG⁻¹Y, and the ratio (mᵀG⁻¹·yG·G⁻¹·m)/(mᵀG⁻¹m), which is a
//! label-weighted average of squared projections and therefore can never
//! leave the observed label range.

use crate::accum::CompensatedSum;
use crate::basis::BasisSpec;
use crate::linalg::{SpdFactor, SymMatrix, RELATIVE_TRUNCATION};
use crate::moments::{bag_moments, point_state_moments, Bag, BagDataset, MomentVector, NormalizationMode};
use crate::{Error, Result};

/// Which closed-form estimator to evaluate.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Estimator {
    LeastSquares,
    RadonNikodym,
}

impl std::fmt::Display for Estimator {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Estimator::LeastSquares => "ls",
            Estimator::RadonNikodym => "rn",
        })
    }
}

impl std::str::FromStr for Estimator {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "ls" => Ok(Estimator::LeastSquares),
            "rn" => Ok(Estimator::RadonNikodym),
            other => Err(Error::InvalidInput(format!(
                "unknown estimator {other:?} (expected ls or rn)"
            ))),
        }
    }
}

/// Streaming accumulator for the sufficient statistics. Bags can arrive in
/// any number of accumulators; disjoint partials merge element-wise.
#[derive(Clone, Debug)]
pub struct FitAccumulator {
    basis: BasisSpec,
    mode: NormalizationMode,
    gram: Vec<CompensatedSum>,
    label_gram: Vec<CompensatedSum>,
    label_proj: Vec<CompensatedSum>,
    bag_count: usize,
    observation_count: usize,
    label_min: f64,
    label_max: f64,
}

impl FitAccumulator {
    pub fn new(spec: &BasisSpec, mode: NormalizationMode) -> Self {
        let d = spec.degree_count();
        let packed = d * (d + 1) / 2;
        Self {
            basis: spec.clone(),
            mode,
            gram: vec![CompensatedSum::new(); packed],
            label_gram: vec![CompensatedSum::new(); packed],
            label_proj: vec![CompensatedSum::new(); d],
            bag_count: 0,
            observation_count: 0,
            label_min: f64::INFINITY,
            label_max: f64::NEG_INFINITY,
        }
    }

    pub fn add_bag(&mut self, bag: &Bag) {
        let m = bag_moments(bag, &self.basis, self.mode);
        let values = m.values();
        let y = bag.label();
        let mut k = 0;
        for i in 0..values.len() {
            for j in 0..=i {
                let p = values[i] * values[j];
                self.gram[k].add(p);
                self.label_gram[k].add(y * p);
                k += 1;
            }
            self.label_proj[i].add(y * values[i]);
        }
        self.bag_count += 1;
        self.observation_count += bag.size();
        self.label_min = self.label_min.min(y);
        self.label_max = self.label_max.max(y);
    }

    /// Folds a partial fit over disjoint bags into this one.
    pub fn merge(&mut self, other: &FitAccumulator) -> Result<()> {
        if other.basis != self.basis || other.mode != self.mode {
            return Err(Error::BasisMismatch(
                "cannot merge fits accumulated under different bases or modes".into(),
            ));
        }
        for (a, b) in self.gram.iter_mut().zip(&other.gram) {
            a.merge(*b);
        }
        for (a, b) in self.label_gram.iter_mut().zip(&other.label_gram) {
            a.merge(*b);
        }
        for (a, b) in self.label_proj.iter_mut().zip(&other.label_proj) {
            a.merge(*b);
        }
        self.bag_count += other.bag_count;
        self.observation_count += other.observation_count;
        self.label_min = self.label_min.min(other.label_min);
        self.label_max = self.label_max.max(other.label_max);
        Ok(())
    }

    pub fn finish(&self) -> Result<TrainedModel> {
        if self.bag_count == 0 {
            return Err(Error::InvalidInput("no bags were accumulated".into()));
        }
        let d = self.basis.degree_count();
        let gram = SymMatrix::from_packed(d, self.gram.iter().map(CompensatedSum::value).collect());
        let label_gram = SymMatrix::from_packed(
            d,
            self.label_gram.iter().map(CompensatedSum::value).collect(),
        );
        let label_proj: Vec<f64> = self.label_proj.iter().map(CompensatedSum::value).collect();
        TrainedModel::from_statistics(
            self.basis.clone(),
            self.mode,
            gram,
            label_gram,
            label_proj,
            self.observation_count as f64 / self.bag_count as f64,
            (self.label_min, self.label_max),
        )
    }
}

/// A fitted model: basis, accumulated statistics, and the cached
/// factorization that turns them into predictions.
#[derive(Clone, Debug)]
pub struct TrainedModel {
    basis: BasisSpec,
    mode: NormalizationMode,
    gram: SymMatrix,
    label_gram: SymMatrix,
    label_proj: Vec<f64>,
    mean_bag_size: f64,
    label_range: (f64, f64),
    factor: SpdFactor,
    ls_coefficients: Vec<f64>,
}

impl TrainedModel {
    /// One-pass fit over a dataset.
    pub fn fit(dataset: &BagDataset, spec: &BasisSpec, mode: NormalizationMode) -> Result<Self> {
        let mut acc = FitAccumulator::new(spec, mode);
        for bag in dataset.bags() {
            acc.add_bag(bag);
        }
        acc.finish()
    }

    /// Rebuilds a model from its statistics (the deserialization path). The
    /// factorization is recomputed here, so predictions from a reloaded
    /// model are bit-identical to the original's.
    pub fn from_statistics(
        basis: BasisSpec,
        mode: NormalizationMode,
        gram: SymMatrix,
        label_gram: SymMatrix,
        label_proj: Vec<f64>,
        mean_bag_size: f64,
        label_range: (f64, f64),
    ) -> Result<Self> {
        let d = basis.degree_count();
        if gram.order() != d || label_gram.order() != d || label_proj.len() != d {
            return Err(Error::InvalidInput(format!(
                "statistics of order {}/{}/{} do not match a basis of {d}",
                gram.order(),
                label_gram.order(),
                label_proj.len()
            )));
        }
        if !mean_bag_size.is_finite() || mean_bag_size <= 0.0 {
            return Err(Error::InvalidInput(format!(
                "mean bag size {mean_bag_size} is not positive"
            )));
        }
        if !label_range.0.is_finite() || !label_range.1.is_finite() || label_range.0 > label_range.1
        {
            return Err(Error::InvalidInput(format!(
                "label range [{}, {}] is empty or non-finite",
                label_range.0, label_range.1
            )));
        }
        let factor = SpdFactor::factor(&gram)?;
        let ls_coefficients = factor.solve(&label_proj);
        Ok(Self {
            basis,
            mode,
            gram,
            label_gram,
            label_proj,
            mean_bag_size,
            label_range,
            factor,
            ls_coefficients,
        })
    }

    pub fn basis(&self) -> &BasisSpec {
        &self.basis
    }

    pub fn mode(&self) -> NormalizationMode {
        self.mode
    }

    pub fn gram(&self) -> &SymMatrix {
        &self.gram
    }

    pub fn label_weighted_gram(&self) -> &SymMatrix {
        &self.label_gram
    }

    pub fn label_projection(&self) -> &[f64] {
        &self.label_proj
    }

    pub fn mean_bag_size(&self) -> f64 {
        self.mean_bag_size
    }

    pub fn label_range(&self) -> (f64, f64) {
        self.label_range
    }

    /// True when the Gram matrix needed spectral truncation; predictions
    /// then run through the pseudo-inverse.
    pub fn is_degenerate(&self) -> bool {
        self.factor.is_degenerate()
    }

    pub(crate) fn factor(&self) -> &SpdFactor {
        &self.factor
    }

    /// Moment vector of the pure point x under this model's basis and mode,
    /// weighted by the mean bag size where the mode needs a size.
    pub fn point_state(&self, x: f64) -> Result<MomentVector> {
        point_state_moments(x, self.mean_bag_size, &self.basis, self.mode)
    }

    fn check_state(&self, m: &MomentVector) -> Result<()> {
        if m.basis() != &self.basis {
            return Err(Error::BasisMismatch(
                "moment vector was produced under a different basis".into(),
            ));
        }
        if m.mode() != self.mode {
            return Err(Error::BasisMismatch(format!(
                "moment vector uses {} but the model was fitted {}",
                m.mode(),
                self.mode
            )));
        }
        Ok(())
    }

    /// Least-squares estimator mᵀG⁻¹Y.
    pub fn predict_ls(&self, m: &MomentVector) -> Result<f64> {
        self.check_state(m)?;
        Ok(dot(m.values(), &self.ls_coefficients))
    }

    /// Ratio estimator (mᵀG⁻¹·yG·G⁻¹·m)/(mᵀG⁻¹m), clamped into the observed
    /// label range (the ratio is a weighted average of labels, so anything
    /// past the range is rounding noise).
    pub fn predict_rn(&self, m: &MomentVector) -> Result<f64> {
        self.check_state(m)?;
        let z = self.factor.solve(m.values());
        let denominator = dot(m.values(), &z);
        let scale = dot(m.values(), m.values());
        // Negated form so a NaN denominator is rejected, not divided by.
        #[allow(clippy::neg_cmp_op_on_partial_ord)]
        if !(denominator > RELATIVE_TRUNCATION * scale / self.factor.norm()) {
            return Err(Error::OutsideModelSpan);
        }
        let numerator = dot(&z, &self.label_gram.mul_vec(&z));
        let (lo, hi) = self.label_range;
        Ok((numerator / denominator).clamp(lo, hi))
    }

    /// Evaluates the chosen estimator on the moments of an arbitrary bag or
    /// distribution; same code path as the point-state predictions.
    pub fn predict_from_distribution(&self, m: &MomentVector, estimator: Estimator) -> Result<f64> {
        match estimator {
            Estimator::LeastSquares => self.predict_ls(m),
            Estimator::RadonNikodym => self.predict_rn(m),
        }
    }
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}
