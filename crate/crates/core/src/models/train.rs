use std::path::Path;
use std::time::Instant;

use serde::{Deserialize, Serialize};
use tabenc_nn::{bce_loss, mix_seed, Adam, AdamConfig, Module, Rng, Scalar, Tensor};

use super::{f1_score, micro_f1, Model, ModelConfig, ModelKind, Network};
use crate::encoders::EncodedTable;
use crate::error::{Error, IoContext, Result};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TrainReport {
    pub model: ModelKind,
    pub seed: u64,
    pub config: ModelConfig,
    pub n_parameters: usize,
    /// Mean training-batch BCE per epoch (dropout active).
    pub train_loss: Vec<f64>,
    /// Eval-mode BCE on the validation split after each epoch.
    pub validation_loss: Vec<f64>,
    pub test_bce: f64,
    /// `None` when undefined (binary task without a true positive).
    pub test_f1: Option<f64>,
    pub test_micro_f1: Option<f64>,
    /// Wall-clock seconds spent in the mini-batch loop.
    pub train_seconds: f64,
}

impl TrainReport {
    pub fn write_json(&self, path: &Path) -> Result<()> {
        std::fs::write(path, serde_json::to_string_pretty(self)?).at(path)
    }

    pub fn write_curves_csv(&self, path: &Path) -> Result<()> {
        let mut w = csv::Writer::from_path(path)?;
        w.write_record(["epoch", "train_loss", "validation_loss"])?;
        for (e, (t, v)) in self.train_loss.iter().zip(&self.validation_loss).enumerate() {
            w.write_record([(e + 1).to_string(), t.to_string(), v.to_string()])?;
        }
        w.flush().at(path)
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Evaluation {
    pub bce: f64,
    pub probabilities: Vec<Vec<f64>>,
}

/// Eval-mode predictions and mean BCE over every output entry.
pub fn evaluate<F: Scalar>(model: &mut Model<F>, table: &EncodedTable, batch: usize) -> Result<Evaluation> {
    if table.n_rows() == 0 {
        return Err(Error::Config("cannot evaluate on an empty table".into()));
    }
    let probabilities = model.predict(&table.index_rows(), batch);
    let k = table.target_width();
    let p = Tensor::<f64>::from_vec(&[table.n_rows(), k], probabilities.concat());
    let y = Tensor::<f64>::from_vec(&[table.n_rows(), k], table.target_rows().concat());
    Ok(Evaluation {
        bce: bce_loss(&p, &y).0,
        probabilities,
    })
}

fn check_compatible(train: &EncodedTable, other: &EncodedTable, name: &str) -> Result<()> {
    if other.vocabularies != train.vocabularies || other.target_width() != train.target_width() {
        return Err(Error::Config(format!("{name} split was not encoded with the training encoder")));
    }
    Ok(())
}

/// Trains a fresh network on `train` with Adam on mean BCE; no early
/// stopping. Initialization, batch order and dropout draw from independent
/// streams derived from `seed`.
pub fn train<F: Scalar>(
    config: &ModelConfig,
    train: &EncodedTable,
    validation: &EncodedTable,
    test: &EncodedTable,
    seed: u64,
) -> Result<(Model<F>, TrainReport)> {
    config.validate()?;
    check_compatible(train, validation, "validation")?;
    check_compatible(train, test, "test")?;
    if train.n_rows() == 0 {
        return Err(Error::Config("empty training split".into()));
    }
    let mut init = Rng::new(mix_seed(seed, 1));
    let mut order_rng = Rng::new(mix_seed(seed, 2));
    let mut dropout_rng = Rng::new(mix_seed(seed, 3));
    let mut model = Model::<F>::build(config, &train.vocab_sizes(), train.target_width(), &mut init)?;
    let mut adam = Adam::new(AdamConfig {
        lr: config.learning_rate,
        ..AdamConfig::default()
    });
    let x = train.index_rows();
    let y = train.target_rows();
    let k = train.target_width();
    let mut order: Vec<usize> = (0..train.n_rows()).collect();
    let mut report = TrainReport {
        model: config.kind,
        seed,
        config: config.clone(),
        n_parameters: model.num_parameters(),
        train_loss: Vec::with_capacity(config.epochs),
        validation_loss: Vec::with_capacity(config.epochs),
        test_bce: f64::NAN,
        test_f1: None,
        test_micro_f1: None,
        train_seconds: 0.0,
    };
    for epoch in 0..config.epochs {
        let start = Instant::now();
        order_rng.shuffle(&mut order);
        let mut total = 0.0;
        for (batch, idx) in order.chunks(config.batch_size).enumerate() {
            let rows: Vec<Vec<usize>> = idx.iter().map(|&i| x[i].clone()).collect();
            let target: Vec<F> = idx.iter().flat_map(|&i| y[i].iter().map(|&v| F::lit(v))).collect();
            let target = Tensor::from_vec(&[idx.len(), k], target);
            model.zero_grad();
            let p = model.forward(&rows, true, &mut dropout_rng);
            let (loss, grad) = bce_loss(&p, &target);
            let loss = loss.to_f64().unwrap_or(f64::NAN);
            if !loss.is_finite() {
                return Err(Error::Diverged { seed, epoch, batch, loss });
            }
            model.backward(&grad);
            adam.step(&mut model.params_mut());
            total += loss * idx.len() as f64;
        }
        report.train_seconds += start.elapsed().as_secs_f64();
        report.train_loss.push(total / train.n_rows() as f64);
        report
            .validation_loss
            .push(evaluate(&mut model, validation, config.batch_size)?.bce);
    }
    let eval = evaluate(&mut model, test, config.batch_size)?;
    let targets = test.target_rows();
    report.test_bce = eval.bce;
    report.test_f1 = f1_score(&eval.probabilities, &targets, test.task);
    report.test_micro_f1 = micro_f1(&eval.probabilities, &targets);
    Ok((model, report))
}
