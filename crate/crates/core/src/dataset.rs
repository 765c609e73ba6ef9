//! Tabular datasets: CSV loading with type inference, schema sidecars and
//! the bundled Iris data.

use std::collections::HashMap;
use std::fs::File;
use std::io::{Read, Write};
use std::path::Path;

use ndarray::Array2;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

const IRIS_CSV: &str = include_str!("../data/iris.csv");

/// Names accepted by [`builtin`].
pub const BUILTIN_DATASETS: &[&str] = &["iris"];

/// Cell values read as missing.
const NA_TOKENS: &[&str] = &[
    "", "NA", "N/A", "na", "n/a", "?", "NaN", "nan", "null", "NULL",
];

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ColumnKind {
    Numeric,
    Categorical,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Role {
    Feature,
    Class,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ColumnDesc {
    pub name: String,
    pub kind: ColumnKind,
    pub role: Role,
    /// Declared label domain of a categorical column, which may include
    /// labels that never occur.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub levels: Option<Vec<String>>,
}

#[derive(Debug, Clone, PartialEq)]
pub enum ColumnValues {
    Numeric(Vec<f64>),
    Categorical(Vec<String>),
}

impl ColumnValues {
    pub fn len(&self) -> usize {
        match self {
            ColumnValues::Numeric(v) => v.len(),
            ColumnValues::Categorical(v) => v.len(),
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Column {
    pub desc: ColumnDesc,
    pub values: ColumnValues,
}

/// A rectangular table with at most one class column.
#[derive(Debug, Clone, PartialEq)]
pub struct DataTable {
    pub name: String,
    pub columns: Vec<Column>,
}

impl DataTable {
    pub fn new(name: impl Into<String>, columns: Vec<Column>) -> Result<Self> {
        let m = columns.first().map_or(0, |c| c.values.len());
        if let Some(c) = columns.iter().find(|c| c.values.len() != m) {
            return Err(Error::Data(format!(
                "column `{}` has {} rows, expected {m}",
                c.desc.name,
                c.values.len()
            )));
        }
        if columns
            .iter()
            .filter(|c| c.desc.role == Role::Class)
            .count()
            > 1
        {
            return Err(Error::Data(
                "a table may have at most one class column".into(),
            ));
        }
        for c in &columns {
            if let ColumnValues::Numeric(v) = &c.values {
                if let Some(r) = v.iter().position(|x| !x.is_finite()) {
                    return Err(Error::Data(format!(
                        "non-finite value in column `{}` at row {r}",
                        c.desc.name
                    )));
                }
            }
        }
        Ok(DataTable {
            name: name.into(),
            columns,
        })
    }

    /// Number of rows.
    pub fn m(&self) -> usize {
        self.columns.first().map_or(0, |c| c.values.len())
    }

    /// Number of feature (non-class) columns.
    pub fn n_features(&self) -> usize {
        self.features().count()
    }

    pub fn column(&self, name: &str) -> Option<&Column> {
        self.columns.iter().find(|c| c.desc.name == name)
    }

    pub fn column_names(&self) -> Vec<&str> {
        self.columns.iter().map(|c| c.desc.name.as_str()).collect()
    }

    pub fn features(&self) -> impl Iterator<Item = &Column> + '_ {
        self.columns.iter().filter(|c| c.desc.role == Role::Feature)
    }

    pub fn class_column(&self) -> Option<&Column> {
        self.columns.iter().find(|c| c.desc.role == Role::Class)
    }

    /// Size of the class domain: the declared levels if any, otherwise the
    /// number of distinct labels.
    pub fn class_cardinality(&self) -> Option<usize> {
        self.class_column().map(|c| match &c.values {
            _ if c.desc.levels.is_some() => c.desc.levels.as_ref().map_or(0, Vec::len),
            ColumnValues::Categorical(v) => {
                v.iter().collect::<std::collections::BTreeSet<_>>().len()
            }
            ColumnValues::Numeric(v) => {
                let mut s: Vec<u64> = v.iter().map(|x| x.to_bits()).collect();
                s.sort_unstable();
                s.dedup();
                s.len()
            }
        })
    }

    /// `m x k` matrix of the named numeric columns.
    pub fn numeric_matrix(&self, names: &[&str]) -> Result<Array2<f64>> {
        let m = self.m();
        let mut out = Array2::zeros((m, names.len()));
        for (j, name) in names.iter().enumerate() {
            let col = self.column(name).ok_or_else(|| self.unknown_column(name))?;
            match &col.values {
                ColumnValues::Numeric(v) => {
                    for (i, x) in v.iter().enumerate() {
                        out[[i, j]] = *x;
                    }
                }
                ColumnValues::Categorical(_) => {
                    return Err(Error::Config(format!("column `{name}` is not numeric")));
                }
            }
        }
        Ok(out)
    }

    pub(crate) fn unknown_column(&self, name: &str) -> Error {
        Error::Config(format!(
            "unknown column `{name}`; available columns: {}",
            self.column_names().join(", ")
        ))
    }

    /// Writes the table as CSV with a header row.
    pub fn write_csv<W: Write>(&self, writer: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(writer);
        w.write_record(self.columns.iter().map(|c| c.desc.name.as_str()))?;
        for r in 0..self.m() {
            let record: Vec<String> = self
                .columns
                .iter()
                .map(|c| match &c.values {
                    ColumnValues::Numeric(v) => v[r].to_string(),
                    ColumnValues::Categorical(v) => v[r].clone(),
                })
                .collect();
            w.write_record(&record)?;
        }
        w.flush().map_err(|e| Error::io("<csv output>", e))?;
        Ok(())
    }
}

/// What to do with rows holding missing or unparseable cells.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum NaPolicy {
    #[default]
    Fail,
    DropRow,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SchemaColumn {
    pub name: String,
    #[serde(default)]
    pub kind: Option<ColumnKind>,
    /// Full label domain of a categorical column.
    #[serde(default)]
    pub levels: Option<Vec<String>>,
}

/// Sidecar describing a CSV file: column names for headerless files,
/// kind overrides, the class column and columns to skip.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct Schema {
    pub name: Option<String>,
    #[serde(default)]
    pub class_column: Option<String>,
    #[serde(default)]
    pub has_header: Option<bool>,
    #[serde(default)]
    pub delimiter: Option<char>,
    #[serde(default)]
    pub columns: Vec<SchemaColumn>,
    #[serde(default)]
    pub ignore: Vec<String>,
}

impl Schema {
    pub fn from_path(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        serde_json::from_str(&text)
            .map_err(|e| Error::Config(format!("invalid schema {}: {e}", path.display())))
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct CsvOptions {
    pub has_header: bool,
    pub delimiter: u8,
    pub class_column: Option<String>,
    pub na_policy: NaPolicy,
    pub schema: Option<Schema>,
}

impl Default for CsvOptions {
    fn default() -> Self {
        CsvOptions {
            has_header: true,
            delimiter: b',',
            class_column: None,
            na_policy: NaPolicy::Fail,
            schema: None,
        }
    }
}

fn is_na(cell: &str) -> bool {
    NA_TOKENS.contains(&cell.trim())
}

fn parse_number(cell: &str) -> Option<f64> {
    cell.trim().parse::<f64>().ok().filter(|x| x.is_finite())
}

/// Loads a CSV file.
pub fn load_csv(path: &Path, options: &CsvOptions) -> Result<DataTable> {
    let mut text = String::new();
    File::open(path)
        .and_then(|mut f| f.read_to_string(&mut text))
        .map_err(|e| Error::io(path, e))?;
    let default_name = path
        .file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_else(|| "dataset".into());
    parse_csv(&text, &default_name, options)
}

/// Parses CSV text; `default_name` is used unless the schema names the dataset.
pub fn parse_csv(text: &str, default_name: &str, options: &CsvOptions) -> Result<DataTable> {
    let schema = options.schema.clone().unwrap_or_default();
    let has_header = schema.has_header.unwrap_or(options.has_header);
    let delimiter = match schema.delimiter {
        Some(c) => u8::try_from(c)
            .map_err(|_| Error::Config(format!("delimiter `{c}` is not a single byte")))?,
        None => options.delimiter,
    };
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(false)
        .flexible(true)
        .delimiter(delimiter)
        .from_reader(text.as_bytes());

    let mut header: Option<Vec<String>> = None;
    let mut rows: Vec<(u64, Vec<String>)> = Vec::new();
    for record in reader.records() {
        let record = record?;
        let line = record.position().map_or(0, |p| p.line());
        let cells: Vec<String> = record.iter().map(|s| s.trim().to_string()).collect();
        if cells.len() == 1 && cells[0].is_empty() {
            continue;
        }
        if has_header && header.is_none() {
            header = Some(cells);
            continue;
        }
        let expected = header
            .as_ref()
            .map_or_else(|| rows.first().map_or(cells.len(), |r| r.1.len()), Vec::len);
        if cells.len() != expected {
            return Err(Error::Parse {
                line,
                message: format!("expected {expected} fields, found {}", cells.len()),
            });
        }
        rows.push((line, cells));
    }

    let width = header
        .as_ref()
        .map(Vec::len)
        .or_else(|| rows.first().map(|r| r.1.len()))
        .ok_or_else(|| Error::EmptyInput("CSV input has no rows".into()))?;

    let names: Vec<String> = match header {
        Some(h) => h,
        None if !schema.columns.is_empty() => {
            if schema.columns.len() != width {
                return Err(Error::Config(format!(
                    "schema lists {} columns, file has {width}",
                    schema.columns.len()
                )));
            }
            schema.columns.iter().map(|c| c.name.clone()).collect()
        }
        None => (1..=width).map(|i| format!("V{i}")).collect(),
    };
    let overrides: HashMap<&str, ColumnKind> = schema
        .columns
        .iter()
        .filter_map(|c| c.kind.map(|k| (c.name.as_str(), k)))
        .collect();
    let levels: HashMap<&str, &Vec<String>> = schema
        .columns
        .iter()
        .filter_map(|c| c.levels.as_ref().map(|l| (c.name.as_str(), l)))
        .collect();
    let referenced = overrides
        .keys()
        .copied()
        .chain(levels.keys().copied())
        .chain(schema.ignore.iter().map(String::as_str));
    for name in referenced {
        if !names.iter().any(|n| n == name) {
            return Err(Error::Config(format!(
                "schema refers to unknown column `{name}`; available columns: {}",
                names.join(", ")
            )));
        }
    }

    let class_column = options.class_column.clone().or(schema.class_column.clone());
    if let Some(cc) = &class_column {
        if !names.iter().any(|n| n == cc) {
            return Err(Error::Config(format!(
                "class column `{cc}` not found; available columns: {}",
                names.join(", ")
            )));
        }
    }

    let keep: Vec<usize> = (0..width)
        .filter(|&j| !schema.ignore.contains(&names[j]))
        .collect();

    let kinds: Vec<ColumnKind> = (0..width)
        .map(|j| {
            let declared = overrides.get(names[j].as_str()).copied().or(levels
                .contains_key(names[j].as_str())
                .then_some(ColumnKind::Categorical));
            declared.unwrap_or_else(|| {
                let all_numeric = rows
                    .iter()
                    .map(|(_, r)| r[j].as_str())
                    .filter(|c| !is_na(c))
                    .all(|c| parse_number(c).is_some());
                let any_value = rows.iter().any(|(_, r)| !is_na(&r[j]));
                if all_numeric && any_value {
                    ColumnKind::Numeric
                } else {
                    ColumnKind::Categorical
                }
            })
        })
        .collect();

    for (name, lv) in &levels {
        let j = names.iter().position(|n| n == name).unwrap_or(0);
        if kinds[j] != ColumnKind::Categorical {
            return Err(Error::Config(format!(
                "column `{name}` declares levels but is not categorical"
            )));
        }
        if let Some((line, cells)) = rows
            .iter()
            .find(|(_, r)| !is_na(&r[j]) && !lv.contains(&r[j]))
        {
            return Err(Error::Data(format!(
                "value `{}` at line {line} is not a declared level of column `{name}`",
                cells[j]
            )));
        }
    }

    let mut kept_rows = Vec::with_capacity(rows.len());
    let mut dropped = 0usize;
    'rows: for (line, cells) in rows {
        for &j in &keep {
            let missing = match kinds[j] {
                ColumnKind::Numeric => parse_number(&cells[j]).is_none(),
                ColumnKind::Categorical => is_na(&cells[j]),
            };
            if missing {
                match options.na_policy {
                    NaPolicy::Fail => {
                        return Err(Error::Data(format!(
                            "missing or unparseable value `{}` at line {line}, column `{}`",
                            cells[j], names[j]
                        )));
                    }
                    NaPolicy::DropRow => {
                        dropped += 1;
                        continue 'rows;
                    }
                }
            }
        }
        kept_rows.push(cells);
    }
    if dropped > 0 {
        log::warn!("dropped {dropped} row(s) with missing or unparseable values");
    }
    if kept_rows.is_empty() {
        return Err(Error::EmptyInput(
            "no data rows left after reading the CSV".into(),
        ));
    }

    let columns = keep
        .iter()
        .map(|&j| {
            let values = match kinds[j] {
                ColumnKind::Numeric => ColumnValues::Numeric(
                    kept_rows
                        .iter()
                        .map(|r| parse_number(&r[j]).unwrap_or(f64::NAN))
                        .collect(),
                ),
                ColumnKind::Categorical => {
                    ColumnValues::Categorical(kept_rows.iter().map(|r| r[j].clone()).collect())
                }
            };
            let role = if class_column.as_deref() == Some(names[j].as_str()) {
                Role::Class
            } else {
                Role::Feature
            };
            Column {
                desc: ColumnDesc {
                    name: names[j].clone(),
                    kind: kinds[j],
                    role,
                    levels: levels.get(names[j].as_str()).map(|l| (*l).clone()),
                },
                values,
            }
        })
        .collect();
    let name = schema
        .name
        .clone()
        .unwrap_or_else(|| default_name.to_string());
    DataTable::new(name, columns)
}

/// One of the datasets shipped with the crate.
pub fn builtin(name: &str) -> Result<DataTable> {
    match name {
        "iris" => parse_csv(
            IRIS_CSV,
            "iris",
            &CsvOptions {
                class_column: Some("species".into()),
                ..CsvOptions::default()
            },
        ),
        other => Err(Error::Config(format!(
            "unknown builtin dataset `{other}`; available: {}",
            BUILTIN_DATASETS.join(", ")
        ))),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn small_numeric_csv() {
        let t = parse_csv("a,b\n1,2\n3,4.5\n", "t", &CsvOptions::default()).unwrap();
        assert_eq!(t.m(), 2);
        assert_eq!(t.n_features(), 2);
        assert!(t.columns.iter().all(|c| c.desc.kind == ColumnKind::Numeric));
        assert_eq!(
            t.column("b").unwrap().values,
            ColumnValues::Numeric(vec![2.0, 4.5])
        );
    }

    #[test]
    fn na_handling() {
        let text = "a,b\n1,2\n3,?\n5,6\n";
        let err = parse_csv(text, "t", &CsvOptions::default()).unwrap_err();
        assert!(matches!(err, Error::Data(_)));
        assert!(err.to_string().contains("line 3"), "{err}");
        let opts = CsvOptions {
            na_policy: NaPolicy::DropRow,
            ..CsvOptions::default()
        };
        let t = parse_csv(text, "t", &opts).unwrap();
        assert_eq!(t.m(), 2);
        assert_eq!(t.column("b").unwrap().desc.kind, ColumnKind::Numeric);
    }

    #[test]
    fn schema_forces_numeric() {
        let text = "a,b\n1,2\n3,abc\n5,6\n";
        let t = parse_csv(text, "t", &CsvOptions::default()).unwrap();
        assert_eq!(t.column("b").unwrap().desc.kind, ColumnKind::Categorical);
        let opts = CsvOptions {
            na_policy: NaPolicy::DropRow,
            schema: Some(Schema {
                columns: vec![SchemaColumn {
                    name: "b".into(),
                    kind: Some(ColumnKind::Numeric),
                    levels: None,
                }],
                ..Schema::default()
            }),
            ..CsvOptions::default()
        };
        let t = parse_csv(text, "t", &opts).unwrap();
        assert_eq!(t.m(), 2);
    }

    #[test]
    fn declared_class_levels() {
        let schema: Schema = serde_json::from_str(
            r#"{"class_column": "k", "columns": [{"name": "k", "levels": ["1", "2", "3", "4"]}]}"#,
        )
        .unwrap();
        let opts = CsvOptions {
            schema: Some(schema.clone()),
            ..CsvOptions::default()
        };
        let t = parse_csv(
            "x,k
0.5,1
0.7,3
",
            "t",
            &opts,
        )
        .unwrap();
        assert_eq!(t.class_cardinality(), Some(4));
        assert_eq!(t.column("k").unwrap().desc.kind, ColumnKind::Categorical);
        let err = parse_csv(
            "x,k
0.5,9
",
            "t",
            &opts,
        )
        .unwrap_err();
        assert_eq!(err.exit_code(), 3);
    }

    #[test]
    fn ragged_rows_report_line() {
        let err = parse_csv("a,b\n1,2\n3\n", "t", &CsvOptions::default()).unwrap_err();
        assert!(matches!(err, Error::Parse { line: 3, .. }), "{err}");
    }

    #[test]
    fn quoted_fields_and_class_column() {
        let text = "x,label\n1.5,\"a, b\"\n2.5,c\n";
        let opts = CsvOptions {
            class_column: Some("label".into()),
            ..CsvOptions::default()
        };
        let t = parse_csv(text, "t", &opts).unwrap();
        assert_eq!(
            t.class_column().unwrap().values,
            ColumnValues::Categorical(vec!["a, b".into(), "c".into()])
        );
        assert_eq!(t.n_features(), 1);
        let bad = CsvOptions {
            class_column: Some("nope".into()),
            ..CsvOptions::default()
        };
        assert!(matches!(parse_csv(text, "t", &bad), Err(Error::Config(_))));
    }

    #[test]
    fn headerless_with_schema_names() {
        let schema: Schema = serde_json::from_str(
            r#"{"name": "demo", "has_header": false, "class_column": "k", "ignore": ["id"],
                "columns": [{"name": "id"}, {"name": "v"}, {"name": "k", "kind": "categorical"}]}"#,
        )
        .unwrap();
        let opts = CsvOptions {
            schema: Some(schema),
            ..CsvOptions::default()
        };
        let t = parse_csv("1,0.5,1\n2,0.7,2\n", "file", &opts).unwrap();
        assert_eq!(t.name, "demo");
        assert_eq!(t.column_names(), vec!["v", "k"]);
        assert_eq!(t.class_column().unwrap().desc.kind, ColumnKind::Categorical);
    }

    #[test]
    fn iris_builtin() {
        let t = builtin("iris").unwrap();
        assert_eq!(t.m(), 150);
        assert_eq!(t.n_features(), 4);
        assert_eq!(t.class_cardinality(), Some(3));
        let err = builtin("glass").unwrap_err();
        assert!(err.to_string().contains("iris"));
        assert_eq!(err.exit_code(), 2);
    }

    #[test]
    fn write_then_parse_round_trip() {
        let t = builtin("iris").unwrap();
        let mut buf = Vec::new();
        t.write_csv(&mut buf).unwrap();
        let opts = CsvOptions {
            class_column: Some("species".into()),
            ..CsvOptions::default()
        };
        let back = parse_csv(std::str::from_utf8(&buf).unwrap(), "iris", &opts).unwrap();
        assert_eq!(back, t);
    }
}
