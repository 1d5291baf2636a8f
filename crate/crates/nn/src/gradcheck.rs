//! Central finite-difference gradient checking in 64-bit precision.

use std::fmt;

use crate::{Parameter, Rng};

/// A scalar objective over a set of 64-bit parameters.
///
/// `loss` must be a pure function of the current parameter values: stochastic
/// layers should reseed their generator on every call.
pub trait Objective {
    fn loss(&mut self) -> f64;

    /// Computes the loss and leaves analytic gradients in every parameter.
    fn loss_and_gradients(&mut self) -> f64;

    fn parameters(&mut self) -> Vec<&mut Parameter<f64>>;
}

#[derive(Clone, Debug)]
pub struct GradCheckConfig {
    pub step: f64,
    /// Above this many coordinates a random subsample of this size is checked.
    pub max_coordinates: usize,
    /// Denominator floor for the relative error. Gradients smaller than this
    /// are effectively compared in absolute terms, since central differences
    /// cannot resolve a true zero much below `eps * |loss| / step`.
    pub floor: f64,
    pub seed: u64,
    /// How many of the worst coordinates to keep in the report.
    pub keep_worst: usize,
}

impl Default for GradCheckConfig {
    fn default() -> Self {
        GradCheckConfig {
            step: 1e-5,
            max_coordinates: 1000,
            floor: 1e-4,
            seed: 0,
            keep_worst: 5,
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct CoordinateError {
    pub parameter: String,
    pub index: usize,
    pub analytic: f64,
    pub numeric: f64,
    pub relative_error: f64,
}

#[derive(Clone, Debug)]
pub struct GradCheckReport {
    pub max_relative_error: f64,
    pub checked: usize,
    pub total: usize,
    pub worst: Vec<CoordinateError>,
}

#[derive(Debug, thiserror::Error)]
#[error("gradient check failed: max relative error {max:.3e} exceeds {tolerance:.1e}; worst: {worst}")]
pub struct GradCheckError {
    pub max: f64,
    pub tolerance: f64,
    pub worst: WorstList,
    pub report: GradCheckReport,
}

#[derive(Debug)]
pub struct WorstList(pub Vec<CoordinateError>);

impl fmt::Display for WorstList {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (i, c) in self.0.iter().enumerate() {
            if i > 0 {
                write!(f, ", ")?;
            }
            write!(
                f,
                "{}[{}] analytic={:.6e} numeric={:.6e} rel={:.2e}",
                c.parameter, c.index, c.analytic, c.numeric, c.relative_error
            )?;
        }
        Ok(())
    }
}

impl GradCheckReport {
    pub fn check(self, tolerance: f64) -> Result<GradCheckReport, GradCheckError> {
        if self.max_relative_error < tolerance {
            Ok(self)
        } else {
            Err(GradCheckError {
                max: self.max_relative_error,
                tolerance,
                worst: WorstList(self.worst.clone()),
                report: self,
            })
        }
    }
}

pub fn relative_error(analytic: f64, numeric: f64, floor: f64) -> f64 {
    (analytic - numeric).abs() / analytic.abs().max(numeric.abs()).max(floor)
}

pub fn grad_check<O: Objective>(objective: &mut O, config: &GradCheckConfig) -> GradCheckReport {
    for p in objective.parameters() {
        p.zero_grad();
    }
    objective.loss_and_gradients();
    let analytic: Vec<Vec<f64>> = objective
        .parameters()
        .iter()
        .map(|p| p.grad.data().to_vec())
        .collect();
    let names: Vec<String> = objective.parameters().iter().map(|p| p.name.clone()).collect();

    let mut coords: Vec<(usize, usize)> = analytic
        .iter()
        .enumerate()
        .flat_map(|(pi, g)| (0..g.len()).map(move |i| (pi, i)))
        .collect();
    let total = coords.len();
    if total > config.max_coordinates {
        let mut rng = Rng::new(config.seed);
        rng.shuffle(&mut coords);
        coords.truncate(config.max_coordinates);
        coords.sort_unstable();
    }

    let h = config.step;
    let mut errors = Vec::with_capacity(coords.len());
    for &(pi, i) in &coords {
        let original = objective.parameters()[pi].value.data()[i];
        objective.parameters()[pi].value.data_mut()[i] = original + h;
        let plus = objective.loss();
        objective.parameters()[pi].value.data_mut()[i] = original - h;
        let minus = objective.loss();
        objective.parameters()[pi].value.data_mut()[i] = original;
        let numeric = (plus - minus) / (2.0 * h);
        let a = analytic[pi][i];
        errors.push(CoordinateError {
            parameter: names[pi].clone(),
            index: i,
            analytic: a,
            numeric,
            relative_error: relative_error(a, numeric, config.floor),
        });
    }
    errors.sort_by(|a, b| b.relative_error.total_cmp(&a.relative_error));
    let max = errors.first().map_or(0.0, |e| e.relative_error);
    errors.truncate(config.keep_worst);
    GradCheckReport {
        max_relative_error: max,
        checked: coords.len(),
        total,
        worst: errors,
    }
}
