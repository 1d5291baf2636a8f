//! Downloads (or reuses the cached copy of) a registry dataset and prints
//! its shape. Usage: `cargo run --example fetch -- adult`
//! Honors TABENC_CACHE_DIR, TABENC_MIRROR and TABENC_OFFLINE.

use tabenc::dataset::{dataset_names, load_dataset, shannon_imbalance, FetchOptions};

fn main() -> tabenc::Result<()> {
    let Some(name) = std::env::args().nth(1) else {
        println!("datasets: {}", dataset_names().join(", "));
        return Ok(());
    };
    let table = load_dataset(&name, &FetchOptions::from_env())?;
    println!("{name}: {} rows, {} columns, task {:?}", table.n_rows(), table.n_cols(), table.task());
    for s in table.schema() {
        println!("  {:<24} {:?} ({} levels)", s.name, s.role, s.levels.len());
    }
    println!("imbalance {:.3}", shannon_imbalance(&table)?.imbalance);
    Ok(())
}
