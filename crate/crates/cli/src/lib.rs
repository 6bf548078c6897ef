//! Subcommand implementations behind the `bagreg` binary.
//!
//! Each command is a plain function from parsed flags to files written, so
//! tests can drive them without spawning processes. Data goes to files,
//! diagnostics to standard error, and every command is deterministic:
//! running one twice with the same flags produces byte-identical output.

use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use bagreg::basis::{BasisSpec, PolyFamily};
use bagreg::io::{
    load_dataset_with_meta, load_model, save_dataset_with_meta, save_model, DatasetMeta,
};
use bagreg::linalg::condition_estimate;
use bagreg::moments::{bag_moments, NormalizationMode};
use bagreg::regression::{Estimator, TrainedModel};
use bagreg::spectrum::{outcome_distribution, spectral_decompose};
use bagreg::synthetic::{generate, ExperimentConfig, TargetFunction};
use bagreg::{Error, Result};

/// Uniform evaluation grid, endpoints included.
#[derive(Clone, Copy, Debug)]
pub struct GridSpec {
    lo: f64,
    hi: f64,
    count: usize,
}

impl GridSpec {
    pub fn new(lo: f64, hi: f64, count: usize) -> Result<Self> {
        if !lo.is_finite() || !hi.is_finite() || lo >= hi {
            return Err(Error::InvalidInput(format!(
                "grid range [{lo}, {hi}] is not a proper interval"
            )));
        }
        if count < 2 {
            return Err(Error::InvalidInput(format!(
                "grid needs at least 2 points, got {count}"
            )));
        }
        Ok(GridSpec { lo, hi, count })
    }

    /// The grid points; both endpoints are produced exactly, interior
    /// points by the usual affine formula.
    pub fn points(&self) -> Vec<f64> {
        let last = self.count - 1;
        (0..=last)
            .map(|i| {
                if i == 0 {
                    self.lo
                } else if i == last {
                    self.hi
                } else {
                    self.lo + (self.hi - self.lo) * i as f64 / last as f64
                }
            })
            .collect()
    }
}

/// Generates a synthetic dataset and writes it with its config echoed into
/// the header line.
pub fn cmd_gen(
    target: TargetFunction,
    bag_size: usize,
    bag_count: usize,
    noise_half_width: f64,
    seed: u64,
    out: &Path,
) -> Result<()> {
    let config = ExperimentConfig::new(target, bag_size, bag_count, noise_half_width, seed);
    let dataset = generate(&config)?;
    let meta = DatasetMeta {
        generator: Some(config),
        ..DatasetMeta::new()
    };
    save_dataset_with_meta(&dataset, Some(&meta), out)?;
    eprintln!("wrote {} bags to {}", dataset.len(), out.display());
    Ok(())
}

/// Fits a model over a dataset. The basis domain covers the observed data
/// range, which can reach past the generating support when bags are noisy.
pub fn cmd_fit(
    input: &Path,
    degree_count: usize,
    family: PolyFamily,
    mode: NormalizationMode,
    out_model: &Path,
) -> Result<()> {
    let (dataset, _) = load_dataset_with_meta(input)?;
    let (lo, hi) = dataset.observation_range();
    let spec = BasisSpec::covering(family, degree_count, lo, hi)?;
    let model = TrainedModel::fit(&dataset, &spec, mode)?;
    save_model(&model, out_model)?;
    let (a, b) = spec.domain();
    eprintln!(
        "fitted {} bags: {} basis of {} functions on [{a}, {b}], {} mode",
        dataset.len(),
        family,
        degree_count,
        mode
    );
    eprintln!(
        "gram condition estimate {:.3e}, degenerate: {}",
        condition_estimate(model.gram())?,
        model.is_degenerate()
    );
    Ok(())
}

/// Evaluates both estimators over a grid of point states and writes
/// `x,a_ls,a_rn` rows. A grid point outside the model span keeps its row
/// with the ratio field left empty.
pub fn cmd_predict(model_path: &Path, grid: &GridSpec, out: &Path) -> Result<()> {
    let model = load_model(model_path)?;
    let mut text = String::from("x,a_ls,a_rn\n");
    for x in grid.points() {
        let m = model.point_state(x)?;
        let ls = model.predict_ls(&m)?;
        match model.predict_rn(&m) {
            Ok(rn) => writeln!(text, "{x},{ls},{rn}").expect("string write"),
            Err(Error::OutsideModelSpan) => {
                eprintln!("warning: x = {x} is outside the model span, a_rn left empty");
                writeln!(text, "{x},{ls},").expect("string write");
            }
            Err(e) => return Err(e),
        }
    }
    fs::write(out, text)?;
    Ok(())
}

/// Writes the outcome spectrum (`i,y_i`) and the per-grid-point outcome
/// probabilities (`x,P_0,...`). Span failures degrade per row, as in
/// prediction.
pub fn cmd_spectrum(
    model_path: &Path,
    grid: &GridSpec,
    out_outcomes: &Path,
    out_probabilities: &Path,
) -> Result<()> {
    let model = load_model(model_path)?;
    let spectral = spectral_decompose(&model)?;

    let mut outcomes = String::from("i,y_i\n");
    for (i, y) in spectral.outcomes().iter().enumerate() {
        writeln!(outcomes, "{i},{y}").expect("string write");
    }
    fs::write(out_outcomes, outcomes)?;

    let order = spectral.effective_order();
    let mut header = String::from("x");
    for i in 0..order {
        write!(header, ",P_{i}").expect("string write");
    }
    let mut rows = header;
    rows.push('\n');
    for x in grid.points() {
        let m = model.point_state(x)?;
        match outcome_distribution(&spectral, &m) {
            Ok(dist) => {
                write!(rows, "{x}").expect("string write");
                for p in &dist.probabilities {
                    write!(rows, ",{p}").expect("string write");
                }
                rows.push('\n');
            }
            Err(Error::OutsideModelSpan) => {
                eprintln!("warning: x = {x} is outside the model span, probabilities left empty");
                write!(rows, "{x}").expect("string write");
                for _ in 0..order {
                    rows.push(',');
                }
                rows.push('\n');
            }
            Err(e) => return Err(e),
        }
    }
    fs::write(out_probabilities, rows)?;
    if spectral.truncated() {
        eprintln!(
            "note: spectrum truncated to {} of {} modes",
            order,
            model.basis().degree_count()
        );
    }
    Ok(())
}

/// Predicts every bag from its own moments and reports the error against
/// its label.
pub fn cmd_eval(
    model_path: &Path,
    data_path: &Path,
    estimator: Estimator,
    out: &Path,
) -> Result<()> {
    let model = load_model(model_path)?;
    let (dataset, meta) = load_dataset_with_meta(data_path)?;
    if let Some(declared) = meta.as_ref().and_then(|m| m.basis) {
        let spec = declared.to_spec()?;
        if &spec != model.basis() {
            return Err(Error::BasisMismatch(format!(
                "dataset declares a {} basis of {} functions on [{}, {}], \
                 the model uses {} with {} on [{}, {}]",
                spec.family(),
                spec.degree_count(),
                spec.domain().0,
                spec.domain().1,
                model.basis().family(),
                model.basis().degree_count(),
                model.basis().domain().0,
                model.basis().domain().1,
            )));
        }
    }
    let mut squared = 0.0;
    let mut max_abs = 0.0f64;
    for bag in dataset.bags() {
        let m = bag_moments(bag, model.basis(), model.mode());
        let predicted = model.predict_from_distribution(&m, estimator)?;
        let err = predicted - bag.label();
        squared += err * err;
        max_abs = max_abs.max(err.abs());
    }
    let rmse = (squared / dataset.len() as f64).sqrt();
    let mut report = String::new();
    writeln!(report, "estimator {estimator}").expect("string write");
    writeln!(report, "bags {}", dataset.len()).expect("string write");
    writeln!(report, "rmse {rmse}").expect("string write");
    writeln!(report, "max_abs_error {max_abs}").expect("string write");
    fs::write(out, report)?;
    eprintln!(
        "{estimator}: rmse {rmse:.6}, max abs error {max_abs:.6} over {} bags",
        dataset.len()
    );
    Ok(())
}
