//! Stratified 70/15/15 split with per-level counts.

use tabenc::dataset::{split, DataTable, SplitSpec};

fn main() -> tabenc::Result<()> {
    let n = 200;
    let x: Vec<String> = (0..n).map(|i| format!("v{}", i % 7)).collect();
    let y: Vec<String> = (0..n).map(|i| if i % 10 < 2 { "rare" } else { "common" }.to_string()).collect();
    let table = DataTable::new(vec!["x".into(), "y".into()], vec![x, y], "y")?;
    let s = split(&table, &SplitSpec::default())?;
    for (name, part) in s.parts() {
        let rare = part.target().iter().filter(|v| *v == "rare").count();
        println!("{name:<10} {:>4} rows, {rare:>3} rare", part.n_rows());
    }
    Ok(())
}
