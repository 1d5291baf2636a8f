//! Target imbalance of a small table and of raw level counts.

use tabenc::dataset::{imbalance_from_counts, shannon_imbalance, DataTable};

fn main() -> tabenc::Result<()> {
    let color = ["red", "red", "blue", "green", "red", "blue", "red", "red"];
    let label = ["a", "a", "a", "a", "a", "a", "b", "c"];
    let table = DataTable::new(
        vec!["color".into(), "label".into()],
        vec![
            color.iter().map(|s| s.to_string()).collect(),
            label.iter().map(|s| s.to_string()).collect(),
        ],
        "label",
    )?;
    let report = shannon_imbalance(&table)?;
    println!("levels {:?}", report.level_counts);
    println!("evenness {:.4}  imbalance {:.4}", report.evenness, report.imbalance);
    println!("balanced 50/50 -> {:.4}", imbalance_from_counts(&[50, 50])?);
    println!("skewed 99/1    -> {:.4}", imbalance_from_counts(&[99, 1])?);
    Ok(())
}
