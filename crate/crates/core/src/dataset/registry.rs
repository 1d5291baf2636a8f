use super::CsvOptions;
use crate::error::{Error, Result};

const MANIFEST: &str = include_str!("registry.txt");

#[derive(Clone, Debug, PartialEq)]
pub struct DatasetEntry {
    pub name: String,
    /// File name inside the cache directory (and inside a mirror).
    pub file: String,
    pub url: String,
    pub sha256: Option<String>,
    pub target: String,
    pub delimiter: u8,
    pub has_header: bool,
    pub drop: Vec<String>,
    /// Path inside the downloaded zip archive, if `url` is one.
    pub member: Option<String>,
}

impl DatasetEntry {
    pub fn csv_options(&self) -> CsvOptions {
        CsvOptions {
            delimiter: self.delimiter,
            has_header: self.has_header,
            drop: self.drop.clone(),
            ..CsvOptions::default()
        }
    }
}

fn optional(field: &str) -> Option<String> {
    (field != "-").then(|| field.to_string())
}

/// Parses a registry manifest: one `|`-separated entry per line, `#` comments.
pub fn parse_registry(text: &str) -> Result<Vec<DatasetEntry>> {
    let mut out = Vec::new();
    for (lineno, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let f: Vec<&str> = line.split('|').map(str::trim).collect();
        if f.len() != 9 {
            return Err(Error::Config(format!(
                "registry line {}: expected 9 fields, found {}",
                lineno + 1,
                f.len()
            )));
        }
        let delimiter = match f[5] {
            "space" => b' ',
            "tab" => b'\t',
            d if d.len() == 1 => d.as_bytes()[0],
            d => return Err(Error::Config(format!("registry line {}: bad delimiter {d:?}", lineno + 1))),
        };
        out.push(DatasetEntry {
            name: f[0].to_string(),
            file: f[1].to_string(),
            url: f[2].to_string(),
            sha256: optional(f[3]),
            target: f[4].to_string(),
            delimiter,
            has_header: f[6] == "yes",
            drop: optional(f[7]).map_or_else(Vec::new, |d| d.split(',').map(|s| s.trim().to_string()).collect()),
            member: optional(f[8]),
        });
    }
    Ok(out)
}

/// The built-in registry.
pub fn registry() -> Vec<DatasetEntry> {
    parse_registry(MANIFEST).expect("built-in registry parses")
}

pub fn dataset_names() -> Vec<String> {
    registry().into_iter().map(|e| e.name).collect()
}

pub fn lookup(name: &str) -> Result<DatasetEntry> {
    registry()
        .into_iter()
        .find(|e| e.name == name)
        .ok_or_else(|| Error::Registry(name.to_string()))
}
