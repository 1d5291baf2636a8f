//! A small benchmark grid over two synthetic datasets, resumed once, then
//! summarized into the report files.

use tabenc::bench::{read_records, report_dir, run_with, RunConfig};
use tabenc::dataset::DataTable;
use tabenc::encoders::EncoderKind;
use tabenc::models::ModelKind;
use tabenc::Error;

fn load(name: &str) -> tabenc::Result<DataTable> {
    let n = 600;
    let shift = match name {
        "left" => 0,
        "right" => 3,
        other => return Err(Error::Config(format!("unknown dataset {other}"))),
    };
    let a: Vec<String> = (0..n).map(|i| format!("k{}", (i * 7 + shift) % 9)).collect();
    let w: Vec<String> = (0..n).map(|i| format!("{:.1}", (i * 13 % n) as f64 / 10.0)).collect();
    let y: Vec<String> = (0..n).map(|i| (((i * 7 + shift) % 9 < 4) as u8).to_string()).collect();
    DataTable::new(vec!["a".into(), "w".into(), "y".into()], vec![a, w, y], "y")
}

fn main() -> tabenc::Result<()> {
    let dir = std::env::temp_dir().join("tabenc-bench-example");
    let _ = std::fs::remove_dir_all(&dir);
    let config = RunConfig {
        datasets: vec!["left".into(), "right".into()],
        encoders: vec![EncoderKind::Ordinal, EncoderKind::Onehot, EncoderKind::Target],
        models: vec![ModelKind::Entity],
        repetitions: 2,
        epochs: Some(3),
        output_dir: dir.clone(),
        ..RunConfig::default()
    };
    let first = run_with(&config, load)?;
    let again = run_with(&config, load)?;
    println!("{} records, {} after resume", first.len(), again.len());
    println!("{} lines in records.jsonl", read_records(&dir.join("records.jsonl"))?.len());
    report_dir(&dir)?;
    print!("{}", std::fs::read_to_string(dir.join("tables.txt")).map_err(|e| Error::Io { path: dir.clone(), source: e })?);
    Ok(())
}
