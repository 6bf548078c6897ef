//! The discrete outcome spectrum of a trained model.
//!
//! The generalized eigenproblem yG·ψ = y·G·ψ turns the accumulated
//! statistics into a set of outcome levels (the eigenvalues, all inside the
//! observed label range) and states (the eigenvectors, orthonormal in the G
//! metric). Any input state then decomposes into squared projections onto
//! those states: a probability for each outcome. The ratio estimator is
//! exactly the mean of that distribution, which is why it can never leave
//! the label range.

use crate::basis::BasisSpec;
use crate::linalg::gen_eig_sym;
use crate::moments::{MomentVector, NormalizationMode};
use crate::regression::TrainedModel;
use crate::{Error, Result};

/// Outcome levels and their G-orthonormal states.
#[derive(Clone, Debug)]
pub struct SpectralModel {
    outcomes: Vec<f64>,
    vectors: Vec<Vec<f64>>,
    truncated: bool,
    basis: BasisSpec,
    mode: NormalizationMode,
    /// Σ_i ‖ψ_i‖²; scale reference for the outside-span test.
    vector_scale: f64,
}

impl SpectralModel {
    /// Ascending outcome levels; one per retained mode.
    pub fn outcomes(&self) -> &[f64] {
        &self.outcomes
    }

    /// G-orthonormal eigenvectors, aligned with `outcomes`.
    pub fn vectors(&self) -> &[Vec<f64>] {
        &self.vectors
    }

    /// Number of retained modes; less than the basis degree count when the
    /// Gram matrix lost rank.
    pub fn effective_order(&self) -> usize {
        self.outcomes.len()
    }

    pub fn truncated(&self) -> bool {
        self.truncated
    }
}

/// Discrete outcome distribution of one state.
#[derive(Clone, Debug)]
pub struct OutcomeDistribution {
    /// Outcome levels, ascending; copied from the spectral model.
    pub outcomes: Vec<f64>,
    /// Probability of each outcome; nonnegative, sums to 1.
    pub probabilities: Vec<f64>,
    /// Σ of unnormalized weights; equals the state's self-projection
    /// m·G⁻¹·m up to rounding.
    pub total_weight: f64,
    /// Signed projections Σ_r m_r ψ_r before squaring. Diagnostic: the sign
    /// pattern shows eigenvector orientation, which the probabilities erase.
    pub projections: Vec<f64>,
}

impl OutcomeDistribution {
    /// Mean of the distribution; coincides with the ratio estimator.
    pub fn mean(&self) -> f64 {
        self.outcomes
            .iter()
            .zip(&self.probabilities)
            .map(|(y, p)| y * p)
            .sum()
    }
}

/// Solves the outcome eigenproblem of a fitted model.
///
/// Outcomes are clamped into the observed label range: each one is a
/// label-weighted average of squared projections, so an excursion past the
/// range can only be rounding noise.
pub fn spectral_decompose(model: &TrainedModel) -> Result<SpectralModel> {
    let eig = gen_eig_sym(model.label_weighted_gram(), model.gram())?;
    let (lo, hi) = model.label_range();
    let mut outcomes = Vec::with_capacity(eig.pairs.len());
    let mut vectors = Vec::with_capacity(eig.pairs.len());
    let mut vector_scale = 0.0;
    for pair in eig.pairs {
        outcomes.push(pair.value.clamp(lo, hi));
        vector_scale += pair.vector.iter().map(|v| v * v).sum::<f64>();
        vectors.push(pair.vector);
    }
    Ok(SpectralModel {
        outcomes,
        vectors,
        truncated: eig.truncated,
        basis: model.basis().clone(),
        mode: model.mode(),
        vector_scale,
    })
}

/// Scalar product of two states through the model metric: m1ᵀ·G⁻¹·m2.
pub fn project(model: &TrainedModel, m1: &MomentVector, m2: &MomentVector) -> Result<f64> {
    for m in [m1, m2] {
        if m.basis() != model.basis() {
            return Err(Error::BasisMismatch(
                "moment vector was produced under a different basis".into(),
            ));
        }
        if m.mode() != model.mode() {
            return Err(Error::BasisMismatch(format!(
                "moment vector uses {} but the model was fitted {}",
                m.mode(),
                model.mode()
            )));
        }
    }
    let z = model.factor().solve(m2.values());
    Ok(m1.values().iter().zip(&z).map(|(a, b)| a * b).sum())
}

/// Projects a state onto every outcome mode and squares: the probability of
/// each outcome for this state.
pub fn outcome_distribution(
    spectral: &SpectralModel,
    m: &MomentVector,
) -> Result<OutcomeDistribution> {
    if m.basis() != &spectral.basis {
        return Err(Error::BasisMismatch(
            "moment vector was produced under a different basis".into(),
        ));
    }
    if m.mode() != spectral.mode {
        return Err(Error::BasisMismatch(format!(
            "moment vector uses {} but the spectrum was built {}",
            m.mode(),
            spectral.mode
        )));
    }
    let projections: Vec<f64> = spectral
        .vectors
        .iter()
        .map(|psi| m.values().iter().zip(psi).map(|(a, b)| a * b).sum())
        .collect();
    let weights: Vec<f64> = projections.iter().map(|p| p * p).collect();
    let total_weight: f64 = weights.iter().sum();
    // A state orthogonal to every retained mode has no distribution. The
    // floor is the squared truncation level relative to the Cauchy-Schwarz
    // bound on the weights.
    let m_scale: f64 = m.values().iter().map(|v| v * v).sum();
    let floor = 1e-24 * m_scale * spectral.vector_scale;
    // Negated form so a NaN weight is rejected, not normalized by.
    #[allow(clippy::neg_cmp_op_on_partial_ord)]
    if !(total_weight > floor) {
        return Err(Error::OutsideModelSpan);
    }
    let probabilities = weights.iter().map(|w| w / total_weight).collect();
    Ok(OutcomeDistribution {
        outcomes: spectral.outcomes.clone(),
        probabilities,
        total_weight,
        projections,
    })
}
