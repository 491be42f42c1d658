//! Deterministic writers: every float is printed with 17 significant digits
//! and JSON objects have sorted keys, so identical inputs give identical bytes.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use serde::Serialize;
use serde_json::Value;
use sha2::{Digest, Sha256};

use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq, clap::ValueEnum, Serialize, serde::Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    Csv,
    Json,
    Plotdata,
}

impl Format {
    pub fn from_extension(path: &Path) -> Option<Format> {
        match path.extension()?.to_str()? {
            "csv" => Some(Format::Csv),
            "json" => Some(Format::Json),
            "dat" | "txt" => Some(Format::Plotdata),
            _ => None,
        }
    }
}

/// `d.dddddddddddddddde±x`; non-finite values print as `nan`, `inf`, `-inf`.
pub fn fmt_f64(v: f64) -> String {
    if v.is_nan() {
        "nan".into()
    } else if v.is_infinite() {
        if v > 0.0 {
            "inf".into()
        } else {
            "-inf".into()
        }
    } else {
        format!("{v:.16e}")
    }
}

/// Pretty JSON with sorted keys; floats in 17-digit exponent form, non-finite
/// floats as `null`.
pub fn json_string(v: &Value) -> String {
    let mut out = String::new();
    write_json(v, 0, &mut out);
    out.push('\n');
    out
}

fn write_json(v: &Value, indent: usize, out: &mut String) {
    let pad = |n: usize, out: &mut String| out.extend(std::iter::repeat_n(' ', 2 * n));
    match v {
        Value::Null => out.push_str("null"),
        Value::Bool(b) => out.push_str(if *b { "true" } else { "false" }),
        Value::Number(n) => {
            if let Some(i) = n.as_i64() {
                let _ = write!(out, "{i}");
            } else if let Some(u) = n.as_u64() {
                let _ = write!(out, "{u}");
            } else {
                let f = n.as_f64().unwrap_or(f64::NAN);
                out.push_str(&if f.is_finite() {
                    fmt_f64(f)
                } else {
                    "null".into()
                });
            }
        }
        Value::String(s) => out.push_str(&serde_json::to_string(s).expect("string escapes")),
        Value::Array(items) => {
            if items.is_empty() {
                out.push_str("[]");
                return;
            }
            // short numeric rows stay on one line
            if items.len() <= 4 && items.iter().all(|x| x.is_number()) {
                out.push('[');
                for (k, x) in items.iter().enumerate() {
                    if k > 0 {
                        out.push_str(", ");
                    }
                    write_json(x, indent, out);
                }
                out.push(']');
                return;
            }
            out.push_str("[\n");
            for (k, x) in items.iter().enumerate() {
                pad(indent + 1, out);
                write_json(x, indent + 1, out);
                out.push_str(if k + 1 < items.len() { ",\n" } else { "\n" });
            }
            pad(indent, out);
            out.push(']');
        }
        Value::Object(map) => {
            if map.is_empty() {
                out.push_str("{}");
                return;
            }
            let mut keys: Vec<&String> = map.keys().collect();
            keys.sort();
            out.push_str("{\n");
            for (k, key) in keys.iter().enumerate() {
                pad(indent + 1, out);
                out.push_str(&serde_json::to_string(key).expect("string escapes"));
                out.push_str(": ");
                write_json(&map[key.as_str()], indent + 1, out);
                out.push_str(if k + 1 < keys.len() { ",\n" } else { "\n" });
            }
            pad(indent, out);
            out.push('}');
        }
    }
}

/// First 64 bits of SHA-256, hex encoded.
pub fn digest(bytes: &[u8]) -> String {
    let h = Sha256::digest(bytes);
    h[..8].iter().map(|b| format!("{b:02x}")).collect()
}

/// A named block of equal-length columns.
#[derive(Clone, Debug)]
pub struct Table {
    pub name: String,
    pub columns: Vec<String>,
    pub rows: Vec<Vec<f64>>,
    /// Whether plotdata output includes this table.
    pub plottable: bool,
}

impl Table {
    pub fn new(name: &str, columns: &[&str]) -> Self {
        Table {
            name: name.into(),
            columns: columns.iter().map(|c| c.to_string()).collect(),
            rows: Vec::new(),
            plottable: true,
        }
    }

    pub fn push(&mut self, row: Vec<f64>) {
        debug_assert_eq!(row.len(), self.columns.len());
        self.rows.push(row);
    }

    pub fn to_csv(&self) -> String {
        let mut s = self.columns.join(",");
        s.push('\n');
        for r in &self.rows {
            s.push_str(&r.iter().map(|v| fmt_f64(*v)).collect::<Vec<_>>().join(","));
            s.push('\n');
        }
        s
    }

    /// Column `j` against column 0, whitespace separated.
    pub fn to_plotdata(&self, j: usize) -> String {
        let mut s = format!("# {} {}\n", self.columns[0], self.columns[j]);
        for r in &self.rows {
            let _ = writeln!(s, "{} {}", fmt_f64(r[0]), fmt_f64(r[j]));
        }
        s
    }

    fn to_json(&self) -> Value {
        let cols: serde_json::Map<String, Value> = self
            .columns
            .iter()
            .enumerate()
            .map(|(j, c)| {
                (
                    c.clone(),
                    Value::from(self.rows.iter().map(|r| r[j]).collect::<Vec<f64>>()),
                )
            })
            .collect();
        Value::Object(cols)
    }
}

/// Everything a pipeline hands to the writer.
#[derive(Clone, Debug, Default)]
pub struct Results {
    pub report: Option<Value>,
    pub tables: Vec<Table>,
}

/// Where outputs go: `dir/stem.*`.
#[derive(Clone, Debug)]
pub struct Target {
    pub dir: PathBuf,
    pub stem: String,
    pub format: Format,
}

impl Target {
    fn table_stem(&self, t: &Table, n_tables: usize) -> String {
        if n_tables == 1 {
            self.stem.clone()
        } else {
            format!("{}_{}", self.stem, t.name)
        }
    }
}

fn write_file(dir: &Path, name: &str, contents: &str, written: &mut Vec<String>) -> Result<()> {
    let path = dir.join(name);
    std::fs::write(&path, contents).map_err(|e| Error::Io {
        path: path.display().to_string(),
        source: e,
    })?;
    written.push(name.to_string());
    Ok(())
}

/// Writes the results; returns file names relative to `target.dir`.
pub fn emit(results: &Results, target: &Target) -> Result<Vec<String>> {
    let mut written = Vec::new();
    let n = results.tables.len();
    match target.format {
        Format::Json => {
            let mut doc = results
                .report
                .clone()
                .unwrap_or_else(|| Value::Object(Default::default()));
            if n > 0 {
                let tables: serde_json::Map<String, Value> = results
                    .tables
                    .iter()
                    .map(|t| (t.name.clone(), t.to_json()))
                    .collect();
                match &mut doc {
                    Value::Object(m) => {
                        m.insert("tables".into(), Value::Object(tables));
                    }
                    other => {
                        *other = serde_json::json!({ "report": other.clone(), "tables": tables });
                    }
                }
            }
            write_file(
                &target.dir,
                &format!("{}.json", target.stem),
                &json_string(&doc),
                &mut written,
            )?;
        }
        Format::Csv | Format::Plotdata => {
            for t in &results.tables {
                let stem = target.table_stem(t, n);
                if target.format == Format::Csv {
                    write_file(
                        &target.dir,
                        &format!("{stem}.csv"),
                        &t.to_csv(),
                        &mut written,
                    )?;
                } else if t.plottable {
                    for j in 1..t.columns.len() {
                        write_file(
                            &target.dir,
                            &format!("{stem}_{}.dat", t.columns[j]),
                            &t.to_plotdata(j),
                            &mut written,
                        )?;
                    }
                }
            }
            if let Some(r) = &results.report {
                let name = if n == 0 {
                    format!("{}.json", target.stem)
                } else {
                    format!("{}_report.json", target.stem)
                };
                write_file(&target.dir, &name, &json_string(r), &mut written)?;
            }
        }
    }
    Ok(written)
}

/// One named invariant with its measured value and the bound it was held to.
#[derive(Clone, Debug, Serialize)]
pub struct InvariantCheck {
    pub name: String,
    pub pass: bool,
    pub value: f64,
    pub limit: f64,
}

impl InvariantCheck {
    /// Passes when `value <= limit`.
    pub fn at_most(name: &str, value: f64, limit: f64) -> Self {
        InvariantCheck {
            name: name.into(),
            pass: value <= limit,
            value,
            limit,
        }
    }

    /// Passes when `value >= limit`.
    pub fn at_least(name: &str, value: f64, limit: f64) -> Self {
        InvariantCheck {
            name: name.into(),
            pass: value >= limit,
            value,
            limit,
        }
    }

    pub fn flag(name: &str, pass: bool) -> Self {
        InvariantCheck {
            name: name.into(),
            pass,
            value: if pass { 1.0 } else { 0.0 },
            limit: 1.0,
        }
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct RunManifest {
    pub subcommand: String,
    pub config_digest: String,
    pub config: Value,
    pub outputs: Vec<String>,
    pub invariant_checks: Vec<InvariantCheck>,
    pub notes: Vec<String>,
}

impl RunManifest {
    pub fn new(subcommand: &str, config: Value) -> Self {
        let canonical =
            json_string(&serde_json::json!({ "subcommand": subcommand, "config": config }));
        RunManifest {
            subcommand: subcommand.into(),
            config_digest: digest(canonical.as_bytes()),
            config,
            outputs: Vec::new(),
            invariant_checks: Vec::new(),
            notes: Vec::new(),
        }
    }

    pub fn all_pass(&self) -> bool {
        self.invariant_checks.iter().all(|c| c.pass)
    }

    pub fn failures(&self) -> Vec<String> {
        self.invariant_checks
            .iter()
            .filter(|c| !c.pass)
            .map(|c| c.name.clone())
            .collect()
    }

    /// Writes `dir/stem.manifest.json` and lists it among the outputs.
    pub fn write(&mut self, dir: &Path, stem: &str) -> Result<PathBuf> {
        let name = format!("{stem}.manifest.json");
        self.outputs.push(name.clone());
        let path = dir.join(&name);
        let v = serde_json::to_value(&*self)?;
        std::fs::write(&path, json_string(&v)).map_err(|e| Error::Io {
            path: path.display().to_string(),
            source: e,
        })?;
        Ok(path)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn seventeen_digits_round_trip() {
        for v in [0.1, 1.0 / 3.0, -2.5e-300, 6.02214076e23, 0.0] {
            let s = fmt_f64(v);
            assert_eq!(s.parse::<f64>().unwrap(), v);
            let mantissa = s
                .split('e')
                .next()
                .unwrap()
                .trim_start_matches('-')
                .replace('.', "");
            assert_eq!(mantissa.len(), 17, "{s}");
        }
    }

    #[test]
    fn json_is_sorted_and_valid() {
        let v = serde_json::json!({ "b": [1.5, 2], "a": { "z": null, "y": "q\"x" }, "c": f64::NAN.to_string() });
        let s = json_string(&v);
        assert!(s.find("\"a\"").unwrap() < s.find("\"b\"").unwrap());
        let back: Value = serde_json::from_str(&s).unwrap();
        assert_eq!(back["b"][0].as_f64(), Some(1.5));
        assert_eq!(back["a"]["y"], "q\"x");
    }

    #[test]
    fn digest_is_stable() {
        // leading bytes of the SHA-256 test vectors
        assert_eq!(digest(b""), "e3b0c44298fc1c14");
        assert_eq!(digest(b"abc"), "ba7816bf8f01cfea");
    }

    #[test]
    fn plotdata_is_two_columns() {
        let mut t = Table::new("k", &["y", "F"]);
        t.push(vec![0.0, 1.0]);
        t.push(vec![0.5, 0.25]);
        let s = t.to_plotdata(1);
        for line in s.lines().skip(1) {
            assert_eq!(line.split_whitespace().count(), 2);
        }
    }
}
