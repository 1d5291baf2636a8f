use std::io::{BufRead, BufReader, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::{EncoderKind, EncoderSpec, FittedEncoder};
use crate::dataset::{DataTable, Role, Task};
use crate::error::{Error, IoContext, Result};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EncodedBlock {
    pub source: String,
    pub kind: EncoderKind,
    pub outputs: Vec<String>,
}

/// Encoded features plus the target, column-major. `vocabularies[j]` lists
/// the distinct train values of output column `j`, ascending; embedding
/// index of a value is its position + 1, with 0 for values not in the list.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EncodedTable {
    pub blocks: Vec<EncodedBlock>,
    pub features: Vec<Vec<f64>>,
    pub vocabularies: Vec<Vec<f64>>,
    /// One 0/1 column for binary tasks, one-hot over `target_levels` otherwise.
    pub target: Vec<Vec<f64>>,
    pub target_levels: Vec<String>,
    pub task: Task,
    pub row_ids: Vec<usize>,
}

#[derive(Serialize, Deserialize)]
struct CsvHeader {
    blocks: Vec<EncodedBlock>,
    vocabularies: Vec<Vec<f64>>,
    target_levels: Vec<String>,
    task: Task,
}

fn normalize(v: f64) -> f64 {
    v + 0.0
}

fn vocabulary(values: &[f64]) -> Vec<f64> {
    let mut v: Vec<f64> = values.iter().map(|&x| normalize(x)).collect();
    v.sort_by(f64::total_cmp);
    v.dedup();
    v
}

fn vocab_index(vocab: &[f64], v: f64) -> usize {
    vocab
        .binary_search_by(|probe| probe.total_cmp(&normalize(v)))
        .map_or(0, |p| p + 1)
}

impl EncodedTable {
    pub fn n_rows(&self) -> usize {
        self.row_ids.len()
    }

    pub fn width(&self) -> usize {
        self.features.len()
    }

    pub fn target_width(&self) -> usize {
        self.target.len()
    }

    /// Distinct train values per output column.
    pub fn vocab_sizes(&self) -> Vec<usize> {
        self.vocabularies.iter().map(Vec::len).collect()
    }

    /// Row-major embedding indices.
    pub fn index_rows(&self) -> Vec<Vec<usize>> {
        (0..self.n_rows())
            .map(|r| {
                self.features
                    .iter()
                    .zip(&self.vocabularies)
                    .map(|(col, vocab)| vocab_index(vocab, col[r]))
                    .collect()
            })
            .collect()
    }

    pub fn target_rows(&self) -> Vec<Vec<f64>> {
        (0..self.n_rows()).map(|r| self.target.iter().map(|c| c[r]).collect()).collect()
    }

    /// Writes a `#`-prefixed JSON line describing the blocks, then a CSV of
    /// row ids, features and target columns.
    pub fn write_csv(&self, path: &Path) -> Result<()> {
        let header = CsvHeader {
            blocks: self.blocks.clone(),
            vocabularies: self.vocabularies.clone(),
            target_levels: self.target_levels.clone(),
            task: self.task,
        };
        let mut file = std::fs::File::create(path).at(path)?;
        writeln!(file, "# {}", serde_json::to_string(&header)?).at(path)?;
        let mut w = csv::Writer::from_writer(file);
        let mut names = vec!["row_id".to_string()];
        names.extend(self.blocks.iter().flat_map(|b| b.outputs.iter().cloned()));
        names.extend(self.target_names());
        w.write_record(&names)?;
        for r in 0..self.n_rows() {
            let mut rec = vec![self.row_ids[r].to_string()];
            rec.extend(self.features.iter().chain(&self.target).map(|c| c[r].to_string()));
            w.write_record(&rec)?;
        }
        w.flush().at(path)
    }

    fn target_names(&self) -> Vec<String> {
        match self.task {
            Task::Binary => vec!["target".into()],
            Task::Multi => self.target_levels.iter().map(|l| format!("target={l}")).collect(),
        }
    }

    pub fn read_csv(path: &Path) -> Result<Self> {
        let mut reader = BufReader::new(std::fs::File::open(path).at(path)?);
        let mut first = String::new();
        reader.read_line(&mut first).at(path)?;
        let json = first
            .strip_prefix("# ")
            .ok_or_else(|| Error::Parse { row: 0, message: "missing '# ' header line".into() })?;
        let header: CsvHeader = serde_json::from_str(json.trim_end())?;
        let width: usize = header.blocks.iter().map(|b| b.outputs.len()).sum();
        let target_width = match header.task {
            Task::Binary => 1,
            Task::Multi => header.target_levels.len(),
        };
        let mut features = vec![Vec::new(); width];
        let mut target = vec![Vec::new(); target_width];
        let mut row_ids = Vec::new();
        for (row, rec) in csv::Reader::from_reader(reader).records().enumerate() {
            let rec = rec?;
            if rec.len() != 1 + width + target_width {
                return Err(Error::Parse { row, message: format!("{} fields", rec.len()) });
            }
            let num = |s: &str| {
                s.parse::<f64>().map_err(|e| Error::Parse { row, message: format!("{s:?}: {e}") })
            };
            row_ids.push(rec[0].parse().map_err(|e| Error::Parse { row, message: format!("row id: {e}") })?);
            for (j, col) in features.iter_mut().chain(target.iter_mut()).enumerate() {
                col.push(num(&rec[j + 1])?);
            }
        }
        Ok(EncodedTable {
            blocks: header.blocks,
            features,
            vocabularies: header.vocabularies,
            target,
            target_levels: header.target_levels,
            task: header.task,
            row_ids,
        })
    }
}

/// Per-column encoders plus output vocabularies, all fitted on one
/// training table and reused for every split.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TableEncoder {
    pub spec: EncoderSpec,
    pub encoders: Vec<FittedEncoder>,
    pub vocabularies: Vec<Vec<f64>>,
    pub target_levels: Vec<String>,
    pub task: Task,
}

impl TableEncoder {
    /// Fits one encoder per feature column of `train`. Continuous columns
    /// are rejected: discretize first.
    pub fn fit(train: &DataTable, spec: &EncoderSpec) -> Result<Self> {
        spec.validate()?;
        let features = train.feature_indices();
        if features.is_empty() {
            return Err(Error::Config("table has no feature columns".into()));
        }
        let y: Vec<f64> = train.target_codes().into_iter().map(|c| c as f64).collect();
        let mut encoders = Vec::with_capacity(features.len());
        for i in features {
            let schema = &train.schema()[i];
            if schema.role == Role::Continuous {
                return Err(Error::Config(format!(
                    "column {} is continuous; discretize before encoding",
                    schema.name
                )));
            }
            encoders.push(FittedEncoder::fit(spec, &schema.name, &train.columns()[i], Some(&y))?);
        }
        let mut enc = TableEncoder {
            spec: spec.clone(),
            encoders,
            vocabularies: Vec::new(),
            target_levels: train.target_levels().to_vec(),
            task: train.task(),
        };
        enc.vocabularies = enc.encode_features(train)?.iter().map(|c| vocabulary(c)).collect();
        Ok(enc)
    }

    fn encode_features(&self, table: &DataTable) -> Result<Vec<Vec<f64>>> {
        let mut out = Vec::new();
        for enc in &self.encoders {
            let cells = table
                .column(&enc.column)
                .ok_or_else(|| Error::Config(format!("column {} missing", enc.column)))?;
            out.extend(enc.transform(cells));
        }
        Ok(out)
    }

    pub fn transform(&self, table: &DataTable) -> Result<EncodedTable> {
        let features = self.encode_features(table)?;
        let mut codes = Vec::with_capacity(table.n_rows());
        for v in table.target() {
            let c = self
                .target_levels
                .binary_search(v)
                .map_err(|_| Error::Config(format!("target level {v:?} absent from the training split")))?;
            codes.push(c);
        }
        let target = match self.task {
            Task::Binary => vec![codes.iter().map(|&c| c as f64).collect()],
            Task::Multi => (0..self.target_levels.len())
                .map(|k| codes.iter().map(|&c| f64::from(u8::from(c == k))).collect())
                .collect(),
        };
        Ok(EncodedTable {
            blocks: self
                .encoders
                .iter()
                .map(|e| EncodedBlock {
                    source: e.column.clone(),
                    kind: e.spec.kind,
                    outputs: e.output_names(),
                })
                .collect(),
            features,
            vocabularies: self.vocabularies.clone(),
            target,
            target_levels: self.target_levels.clone(),
            task: self.task,
            row_ids: table.row_ids().to_vec(),
        })
    }

    pub fn write_json(&self, path: &Path) -> Result<()> {
        std::fs::write(path, serde_json::to_string_pretty(self)?).at(path)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn table(rows: &[(&str, &str, &str)]) -> DataTable {
        let cols = vec![
            rows.iter().map(|r| r.0.to_string()).collect(),
            rows.iter().map(|r| r.1.to_string()).collect(),
            rows.iter().map(|r| r.2.to_string()).collect(),
        ];
        DataTable::new(vec!["a".into(), "b".into(), "y".into()], cols, "y").unwrap()
    }

    #[test]
    fn binary_target_is_one_column() {
        let t = table(&[("x", "p", "no"), ("y", "q", "yes"), ("x", "q", "no")]);
        let e = TableEncoder::fit(&t, &EncoderSpec::new(EncoderKind::Onehot)).unwrap();
        let out = e.transform(&t).unwrap();
        assert_eq!(out.target, vec![vec![0.0, 1.0, 0.0]]);
        assert_eq!(out.width(), 4);
        assert_eq!(out.vocab_sizes(), [2, 2, 2, 2]);
    }

    #[test]
    fn multi_target_is_one_hot() {
        let t = table(&[("x", "p", "a"), ("y", "q", "b"), ("x", "q", "c"), ("z", "q", "d")]);
        let out = TableEncoder::fit(&t, &EncoderSpec::default()).unwrap().transform(&t).unwrap();
        assert_eq!(out.target_width(), 4);
        for row in out.target_rows() {
            assert_eq!(row.iter().sum::<f64>(), 1.0);
        }
    }

    #[test]
    fn unseen_values_index_zero() {
        let train = table(&[("x", "p", "no"), ("y", "q", "yes")]);
        let test = table(&[("new", "p", "no"), ("y", "r", "yes")]);
        let e = TableEncoder::fit(&train, &EncoderSpec::default()).unwrap();
        let out = e.transform(&test).unwrap();
        assert_eq!(out.features[0], [-1.0, 1.0]);
        assert_eq!(out.index_rows(), vec![vec![0, 1], vec![2, 0]]);
    }

    #[test]
    fn negative_zero_shares_the_zero_slot() {
        assert_eq!(vocabulary(&[0.0, -0.0, 1.0]), [0.0, 1.0]);
        assert_eq!(vocab_index(&[0.0, 1.0], -0.0), 1);
    }

    #[test]
    fn continuous_columns_are_rejected() {
        let x: Vec<String> = (0..20).map(|i| i.to_string()).collect();
        let y: Vec<String> = (0..20).map(|i| (i % 2).to_string()).collect();
        let t = DataTable::new(vec!["x".into(), "y".into()], vec![x, y], "y").unwrap();
        assert!(matches!(TableEncoder::fit(&t, &EncoderSpec::default()), Err(Error::Config(_))));
    }

    #[test]
    fn csv_round_trip() {
        let t = table(&[("x", "p", "a"), ("y", "q", "b"), ("x", "q", "c")]);
        let spec = EncoderSpec::new(EncoderKind::StringSimilarity);
        let out = TableEncoder::fit(&t, &spec).unwrap().transform(&t).unwrap();
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("enc.csv");
        out.write_csv(&path).unwrap();
        assert_eq!(EncodedTable::read_csv(&path).unwrap(), out);
    }
}
