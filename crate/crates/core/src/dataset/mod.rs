//! Raw tables: CSV ingestion with schema inference, target imbalance,
//! stratified splits and the dataset registry/cache.

mod fetch;
mod imbalance;
mod registry;
mod split;
mod table;

pub use fetch::{
    default_cache_dir, fetch_dataset, load_dataset, sha256_hex, CacheLock, FetchOptions, CACHE_DIR_ENV, MIRROR_ENV,
    OFFLINE_ENV,
};
pub use imbalance::{imbalance_from_counts, shannon_imbalance, ImbalanceReport};
pub use registry::{dataset_names, lookup, parse_registry, registry, DatasetEntry};
pub use split::{controlled_rounding, split, stratified_indices, Split, SplitIndices, SplitSpec, MIN_STRATUM};
pub use table::{load_csv, read_csv, ColumnSchema, CsvOptions, DataTable, Role, Task, DISCRETE_THRESHOLD, MISSING_TOKEN};
pub(crate) use table::parse_number;
