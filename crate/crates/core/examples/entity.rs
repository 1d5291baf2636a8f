//! Entity-embedding classifier on a synthetic table, one-hot encoded.

use tabenc::bench::PreparedDataset;
use tabenc::dataset::{DataTable, SplitSpec};
use tabenc::discretizer::DiscretizerConfig;
use tabenc::encoders::{EncoderKind, EncoderSpec};
use tabenc::models::{train, ModelConfig};

fn synthetic(n: usize) -> tabenc::Result<DataTable> {
    let a: Vec<String> = (0..n).map(|i| format!("a{}", i * 7 % 5)).collect();
    let b: Vec<String> = (0..n).map(|i| format!("b{}", i * 3 % 4)).collect();
    let y: Vec<String> = (0..n)
        .map(|i| if (i * 7 % 5) < 2 || i * 3 % 4 == 0 { "pos" } else { "neg" }.to_string())
        .collect();
    DataTable::new(vec!["a".into(), "b".into(), "y".into()], vec![a, b, y], "y")
}

fn main() -> tabenc::Result<()> {
    let data = PreparedDataset::new("toy", &synthetic(2000)?, &SplitSpec::default(), &DiscretizerConfig::default())?;
    let (_, [tr, va, te]) = data.encode(&EncoderSpec::new(EncoderKind::Onehot))?;
    let config = ModelConfig {
        batch_size: 32,
        ..ModelConfig::entity()
    };
    let (_, report) = train::<f32>(&config, &tr, &va, &te, 7)?;
    for (e, (t, v)) in report.train_loss.iter().zip(&report.validation_loss).enumerate() {
        println!("epoch {:>2}  train {t:.4}  validation {v:.4}", e + 1);
    }
    println!("{} parameters, test F1 {:?}, BCE {:.4}", report.n_parameters, report.test_f1, report.test_bce);
    Ok(())
}
