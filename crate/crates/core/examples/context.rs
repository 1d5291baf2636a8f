//! Transformer ("context") classifier on a three-class synthetic table.

use tabenc::bench::PreparedDataset;
use tabenc::dataset::{DataTable, SplitSpec};
use tabenc::discretizer::DiscretizerConfig;
use tabenc::encoders::{EncoderKind, EncoderSpec};
use tabenc::models::{train, ModelConfig};

fn main() -> tabenc::Result<()> {
    let n = 1500;
    let cols: Vec<Vec<String>> = (0..4)
        .map(|j| (0..n).map(|i| format!("l{}", (i / (j + 1)) % 3)).collect())
        .collect();
    let y: Vec<String> = (0..n).map(|i| ["x", "y", "z"][(i % 3 + (i / 2) % 3) % 3].to_string()).collect();
    let mut columns = cols;
    columns.push(y);
    let names = vec!["c0".into(), "c1".into(), "c2".into(), "c3".into(), "y".into()];
    let table = DataTable::new(names, columns, "y")?;
    let data = PreparedDataset::new("toy", &table, &SplitSpec::default(), &DiscretizerConfig::default())?;
    let (_, [tr, va, te]) = data.encode(&EncoderSpec::new(EncoderKind::StringSimilarity))?;
    let (_, report) = train::<f32>(&ModelConfig::context(), &tr, &va, &te, 1)?;
    println!("sequence length {}, {} parameters", tr.width(), report.n_parameters);
    println!("final train loss {:.4}", report.train_loss.last().copied().unwrap_or(f64::NAN));
    println!("test macro F1 {:?}, micro F1 {:?}", report.test_f1, report.test_micro_f1);
    Ok(())
}
