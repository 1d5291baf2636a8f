//! Tree-based binning of a continuous column, then the diagnostics table.

use tabenc::discretizer::{DiscretizerConfig, FittedDiscretizer};
use tabenc::dataset::DataTable;

fn main() -> tabenc::Result<()> {
    let n = 600;
    let age: Vec<f64> = (0..n).map(|i| 18.0 + (i * 53 % n) as f64 * 60.0 / n as f64).collect();
    let y: Vec<String> = age
        .iter()
        .map(|&a| if (30.0..50.0).contains(&a) { "yes" } else { "no" }.to_string())
        .collect();
    let table = DataTable::new(
        vec!["age".into(), "y".into()],
        vec![age.iter().map(|a| format!("{a:.2}")).collect(), y],
        "y",
    )?;
    let fitted = FittedDiscretizer::fit(&table, &DiscretizerConfig::default())?;
    for b in &fitted.bins {
        println!("{}: edges {:?} labels {:?}", b.column, b.edges, b.labels());
    }
    for d in &fitted.diagnostics {
        println!("chosen depth {:?}, alpha {:?}", d.depth, d.choice.as_ref().map(|c| c.alpha));
    }
    let binned = fitted.apply(&table)?;
    println!("first rows: {:?}", &binned.columns()[0][..5]);
    Ok(())
}
