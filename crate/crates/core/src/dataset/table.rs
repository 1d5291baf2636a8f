use std::collections::BTreeSet;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, IoContext, Result};

pub const MISSING_TOKEN: &str = "__missing__";

/// Columns with fewer distinct numeric values than this are categorical.
pub const DISCRETE_THRESHOLD: usize = 10;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Role {
    Continuous,
    Categorical,
    Target,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ColumnSchema {
    pub name: String,
    pub role: Role,
    /// Sorted distinct levels; empty for continuous columns.
    pub levels: Vec<String>,
    pub missing_token: String,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Task {
    Binary,
    Multi,
}

/// Column-major table of string cells with an inferred schema.
#[derive(Clone, Debug, PartialEq)]
pub struct DataTable {
    schema: Vec<ColumnSchema>,
    columns: Vec<Vec<String>>,
    target_name: String,
    task: Task,
    /// Position of each row in the originally loaded file.
    row_ids: Vec<usize>,
}

#[derive(Clone, Debug)]
pub struct CsvOptions {
    pub delimiter: u8,
    pub has_header: bool,
    /// Column names for headerless files; defaults to `c0, c1, ...`.
    pub names: Option<Vec<String>>,
    pub drop: Vec<String>,
    /// Cells equal to one of these (after trimming) become [`MISSING_TOKEN`].
    pub missing_values: Vec<String>,
}

impl Default for CsvOptions {
    fn default() -> Self {
        CsvOptions {
            delimiter: b',',
            has_header: false,
            names: None,
            drop: Vec::new(),
            missing_values: vec![String::new(), "?".to_string()],
        }
    }
}

pub(crate) fn parse_number(cell: &str) -> Option<f64> {
    cell.parse::<f64>().ok().filter(|v| v.is_finite())
}

fn infer_role(cells: &[String]) -> (Role, Vec<String>) {
    let mut distinct = BTreeSet::new();
    let mut numeric = true;
    for c in cells {
        if c == MISSING_TOKEN {
            continue;
        }
        numeric &= parse_number(c).is_some();
        distinct.insert(c.as_str());
    }
    let distinct_numbers = if numeric {
        let mut v: Vec<f64> = distinct.iter().filter_map(|c| parse_number(c)).collect();
        v.sort_by(f64::total_cmp);
        v.dedup();
        v.len()
    } else {
        0
    };
    if numeric && distinct_numbers >= DISCRETE_THRESHOLD {
        (Role::Continuous, Vec::new())
    } else {
        (Role::Categorical, sorted_levels(cells))
    }
}

pub(crate) fn sorted_levels(cells: &[String]) -> Vec<String> {
    let set: BTreeSet<&str> = cells.iter().map(String::as_str).collect();
    set.into_iter().map(str::to_string).collect()
}

impl DataTable {
    /// Builds a table and infers every column's role from its cells.
    pub fn new(names: Vec<String>, columns: Vec<Vec<String>>, target_name: &str) -> Result<Self> {
        if names.len() != columns.len() {
            return Err(Error::Config(format!(
                "{} names for {} columns",
                names.len(),
                columns.len()
            )));
        }
        if !names.iter().any(|n| n == target_name) {
            return Err(Error::Config(format!("target column {target_name:?} not present")));
        }
        let schema = names
            .into_iter()
            .zip(&columns)
            .map(|(name, cells)| {
                let (role, levels) = if name == target_name {
                    (Role::Target, sorted_levels(cells))
                } else {
                    infer_role(cells)
                };
                ColumnSchema {
                    name,
                    role,
                    levels,
                    missing_token: MISSING_TOKEN.to_string(),
                }
            })
            .collect();
        let n = columns.first().map_or(0, Vec::len);
        Self::from_parts(schema, columns, target_name, (0..n).collect())
    }

    /// Assembles a table from an explicit schema.
    pub fn from_parts(
        schema: Vec<ColumnSchema>,
        columns: Vec<Vec<String>>,
        target_name: &str,
        row_ids: Vec<usize>,
    ) -> Result<Self> {
        let n = row_ids.len();
        if schema.len() != columns.len() {
            return Err(Error::Config("schema and column count differ".into()));
        }
        if let Some((s, c)) = schema.iter().zip(&columns).find(|(_, c)| c.len() != n) {
            return Err(Error::Config(format!(
                "column {} has {} cells, expected {n}",
                s.name,
                c.len()
            )));
        }
        let target = schema
            .iter()
            .find(|s| s.name == target_name)
            .ok_or_else(|| Error::Config(format!("target column {target_name:?} not present")))?;
        let task = match target.levels.len() {
            0 | 1 => {
                return Err(Error::Degenerate(format!(
                    "target {target_name:?} has {} level(s)",
                    target.levels.len()
                )))
            }
            2 => Task::Binary,
            _ => Task::Multi,
        };
        Ok(DataTable {
            schema,
            columns,
            target_name: target_name.to_string(),
            task,
            row_ids,
        })
    }

    pub fn schema(&self) -> &[ColumnSchema] {
        &self.schema
    }

    pub fn task(&self) -> Task {
        self.task
    }

    pub fn target_name(&self) -> &str {
        &self.target_name
    }

    pub fn n_rows(&self) -> usize {
        self.row_ids.len()
    }

    pub fn n_cols(&self) -> usize {
        self.schema.len()
    }

    pub fn row_ids(&self) -> &[usize] {
        &self.row_ids
    }

    pub fn columns(&self) -> &[Vec<String>] {
        &self.columns
    }

    pub fn column_index(&self, name: &str) -> Option<usize> {
        self.schema.iter().position(|s| s.name == name)
    }

    pub fn column(&self, name: &str) -> Option<&[String]> {
        self.column_index(name).map(|i| self.columns[i].as_slice())
    }

    pub fn target_index(&self) -> usize {
        self.column_index(&self.target_name).expect("target present by construction")
    }

    pub fn target(&self) -> &[String] {
        &self.columns[self.target_index()]
    }

    pub fn target_levels(&self) -> &[String] {
        &self.schema[self.target_index()].levels
    }

    /// Target cells as indices into [`Self::target_levels`].
    pub fn target_codes(&self) -> Vec<usize> {
        let levels = self.target_levels();
        self.target()
            .iter()
            .map(|v| levels.binary_search(v).expect("target level in schema"))
            .collect()
    }

    /// Indices of all non-target columns, in schema order.
    pub fn feature_indices(&self) -> Vec<usize> {
        (0..self.n_cols())
            .filter(|&i| self.schema[i].role != Role::Target)
            .collect()
    }

    pub fn row(&self, i: usize) -> Vec<&str> {
        self.columns.iter().map(|c| c[i].as_str()).collect()
    }

    /// Rows at the given positions, same schema.
    pub fn select_rows(&self, positions: &[usize]) -> DataTable {
        DataTable {
            schema: self.schema.clone(),
            columns: self
                .columns
                .iter()
                .map(|c| positions.iter().map(|&p| c[p].clone()).collect())
                .collect(),
            target_name: self.target_name.clone(),
            task: self.task,
            row_ids: positions.iter().map(|&p| self.row_ids[p]).collect(),
        }
    }

    /// Swaps one column for new cells and schema entry.
    pub fn replace_column(&mut self, index: usize, schema: ColumnSchema, cells: Vec<String>) {
        assert_eq!(cells.len(), self.n_rows(), "replacement column length");
        self.schema[index] = schema;
        self.columns[index] = cells;
    }

    pub fn write_csv(&self, path: &Path) -> Result<()> {
        let mut w = csv::Writer::from_path(path)?;
        w.write_record(self.schema.iter().map(|s| s.name.as_str()))?;
        for i in 0..self.n_rows() {
            w.write_record(self.columns.iter().map(|c| c[i].as_str()))?;
        }
        w.flush().at(path)?;
        Ok(())
    }
}

/// Reads a delimited file and infers its schema.
pub fn load_csv(path: &Path, target_name: &str, options: &CsvOptions) -> Result<DataTable> {
    let file = std::fs::File::open(path).at(path)?;
    read_csv(file, target_name, options)
}

pub fn read_csv<R: std::io::Read>(reader: R, target_name: &str, options: &CsvOptions) -> Result<DataTable> {
    let mut rdr = csv::ReaderBuilder::new()
        .delimiter(options.delimiter)
        .has_headers(options.has_header)
        .flexible(true)
        .trim(csv::Trim::All)
        .from_reader(reader);
    let mut names: Option<Vec<String>> = if options.has_header {
        Some(rdr.headers()?.iter().map(str::to_string).collect())
    } else {
        options.names.clone()
    };
    let mut columns: Vec<Vec<String>> = Vec::new();
    for (row, record) in rdr.records().enumerate() {
        let record = record.map_err(|e| Error::Parse {
            row,
            message: e.to_string(),
        })?;
        if record.iter().all(str::is_empty) {
            continue;
        }
        let width = names
            .get_or_insert_with(|| (0..record.len()).map(|i| format!("c{i}")).collect())
            .len();
        if record.len() != width {
            return Err(Error::Parse {
                row,
                message: format!("expected {width} fields, found {}", record.len()),
            });
        }
        if columns.is_empty() {
            columns = vec![Vec::new(); width];
        }
        for (col, cell) in columns.iter_mut().zip(record.iter()) {
            let missing = options.missing_values.iter().any(|m| m == cell);
            col.push(if missing { MISSING_TOKEN.to_string() } else { cell.to_string() });
        }
    }
    let names = names.ok_or_else(|| Error::Parse {
        row: 0,
        message: "no data rows".into(),
    })?;
    if columns.is_empty() {
        columns = vec![Vec::new(); names.len()];
    }
    let keep: Vec<usize> = (0..names.len())
        .filter(|&i| !options.drop.contains(&names[i]))
        .collect();
    let names: Vec<String> = keep.iter().map(|&i| names[i].clone()).collect();
    let mut columns: Vec<Option<Vec<String>>> = columns.into_iter().map(Some).collect();
    let columns = keep.iter().map(|&i| columns[i].take().unwrap()).collect();
    DataTable::new(names, columns, target_name)
}
