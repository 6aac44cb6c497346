//! Run reports, tabular artifacts and plot data.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::CliError;

pub const SCHEMA_VERSION: u32 = 1;

/// Named numeric table; every row has one entry per column.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct Table {
    pub name: String,
    pub columns: Vec<String>,
    pub rows: Vec<Vec<f64>>,
}

impl Table {
    pub fn new(name: &str, columns: &[&str]) -> Self {
        Self {
            name: name.to_string(),
            columns: columns.iter().map(|c| c.to_string()).collect(),
            rows: Vec::new(),
        }
    }

    pub fn push(&mut self, row: Vec<f64>) {
        debug_assert_eq!(row.len(), self.columns.len());
        self.rows.push(row);
    }

    pub fn to_csv(&self) -> String {
        let mut out = self.columns.join(",");
        out.push('\n');
        for row in &self.rows {
            let cells: Vec<String> = row.iter().map(|v| v.to_string()).collect();
            out.push_str(&cells.join(","));
            out.push('\n');
        }
        out
    }

    fn to_columnar(&self) -> String {
        let mut out = format!("# {}\n", self.columns.join(" "));
        for row in &self.rows {
            let cells: Vec<String> = row.iter().map(|v| v.to_string()).collect();
            out.push_str(&cells.join(" "));
            out.push('\n');
        }
        out
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RunReport {
    pub schema_version: u32,
    pub kind: String,
    pub seed: u64,
    /// Resolved parameters the run actually used.
    pub config: serde_json::Value,
    pub wall_time_s: f64,
    pub artifacts: Vec<String>,
    pub metrics: BTreeMap<String, f64>,
    pub tolerances: BTreeMap<String, f64>,
    pub passed: bool,
    pub tables: Vec<Table>,
    /// Non-numeric results (witnesses, outcomes).
    #[serde(default, skip_serializing_if = "BTreeMap::is_empty")]
    pub details: BTreeMap<String, serde_json::Value>,
}

/// Output directory that forgets every file it wrote unless committed.
pub struct OutputDir {
    root: PathBuf,
    created_root: bool,
    written: Vec<PathBuf>,
    dirs: Vec<PathBuf>,
    committed: bool,
}

impl OutputDir {
    pub fn create(root: &Path) -> Result<Self, CliError> {
        let created_root = !root.exists();
        fs::create_dir_all(root)?;
        Ok(Self {
            root: root.to_path_buf(),
            created_root,
            written: Vec::new(),
            dirs: Vec::new(),
            committed: false,
        })
    }

    pub fn root(&self) -> &Path {
        &self.root
    }

    /// Writes `rel` under the root and returns its relative path.
    pub fn write(&mut self, rel: &str, bytes: &[u8]) -> Result<String, CliError> {
        let path = self.root.join(rel);
        if let Some(parent) = path.parent() {
            if !parent.exists() {
                fs::create_dir_all(parent)?;
                self.dirs.push(parent.to_path_buf());
            }
        }
        fs::write(&path, bytes)?;
        self.written.push(path);
        Ok(rel.to_string())
    }

    pub fn commit(mut self) {
        self.committed = true;
    }
}

impl Drop for OutputDir {
    fn drop(&mut self) {
        if self.committed {
            return;
        }
        for f in &self.written {
            let _ = fs::remove_file(f);
        }
        for d in self.dirs.iter().rev() {
            let _ = fs::remove_dir(d);
        }
        if self.created_root {
            let _ = fs::remove_dir(&self.root);
        }
    }
}

fn plot_script(table: &Table) -> String {
    let mut s = String::new();
    let _ = writeln!(s, "# gnuplot script for {}.dat", table.name);
    let _ = writeln!(s, "set key autotitle columnhead");
    let _ = writeln!(s, "set xlabel \"{}\"", table.columns.first().map_or("", String::as_str));
    if table.columns.len() < 2 {
        let _ = writeln!(s, "plot \"{}.dat\" using 0:1 with points", table.name);
        return s;
    }
    let series: Vec<String> = (2..=table.columns.len())
        .map(|c| {
            format!(
                "\"{}.dat\" using 1:{c} with linespoints title \"{}\"",
                table.name,
                table.columns[c - 1]
            )
        })
        .collect();
    let _ = writeln!(s, "plot {}", series.join(", \\\n     "));
    s
}

/// Writes `plot/<table>.dat` (whitespace-separated, `#` header) and a
/// non-interactive gnuplot stub `plot/<table>.gp` for each table.
pub fn emit_plotdata(report: &RunReport, out: &mut OutputDir) -> Result<Vec<String>, CliError> {
    let mut files = Vec::new();
    for table in &report.tables {
        files.push(out.write(&format!("plot/{}.dat", table.name), table.to_columnar().as_bytes())?);
        files.push(out.write(&format!("plot/{}.gp", table.name), plot_script(table).as_bytes())?);
    }
    Ok(files)
}
