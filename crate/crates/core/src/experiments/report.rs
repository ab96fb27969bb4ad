use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::error::Result;
use crate::invariants::format_float;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Verdict {
    Pass,
    Fail,
    Inconclusive,
}

impl Verdict {
    pub fn from_bool(ok: bool) -> Self {
        if ok {
            Verdict::Pass
        } else {
            Verdict::Fail
        }
    }

    /// Fail dominates inconclusive, which dominates pass.
    pub fn combine(self, other: Verdict) -> Verdict {
        use Verdict::*;
        match (self, other) {
            (Fail, _) | (_, Fail) => Fail,
            (Inconclusive, _) | (_, Inconclusive) => Inconclusive,
            _ => Pass,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize, Default)]
pub struct Table {
    pub columns: Vec<String>,
    pub rows: Vec<Vec<f64>>,
}

impl Table {
    pub fn new(columns: &[&str]) -> Self {
        Self {
            columns: columns.iter().map(|c| c.to_string()).collect(),
            rows: Vec::new(),
        }
    }

    pub fn push(&mut self, row: Vec<f64>) {
        debug_assert_eq!(row.len(), self.columns.len());
        self.rows.push(row);
    }

    pub fn column(&self, name: &str) -> Option<Vec<f64>> {
        let i = self.columns.iter().position(|c| c == name)?;
        Some(self.rows.iter().map(|r| r[i]).collect())
    }

    pub fn to_csv(&self) -> String {
        let mut s = self.columns.join(",");
        s.push('\n');
        for row in &self.rows {
            let cells: Vec<String> = row.iter().map(|&v| format_float(v)).collect();
            s.push_str(&cells.join(","));
            s.push('\n');
        }
        s
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentReport {
    pub name: String,
    pub verdict: Verdict,
    pub tables: BTreeMap<String, Table>,
    pub fitted_constants: BTreeMap<String, f64>,
    pub seed: u64,
    pub tolerances: BTreeMap<String, f64>,
    /// Description of the first violating sample when the verdict is `fail`.
    pub violation: Option<String>,
    pub notes: Vec<String>,
}

impl ExperimentReport {
    pub fn new(name: &str, seed: u64) -> Self {
        Self {
            name: name.to_string(),
            verdict: Verdict::Pass,
            tables: BTreeMap::new(),
            fitted_constants: BTreeMap::new(),
            seed,
            tolerances: BTreeMap::new(),
            violation: None,
            notes: Vec::new(),
        }
    }

    pub fn table(&mut self, name: &str, table: Table) {
        self.tables.insert(name.to_string(), table);
    }

    pub fn constant(&mut self, name: &str, value: f64) {
        self.fitted_constants.insert(name.to_string(), value);
    }

    pub fn tolerance(&mut self, name: &str, value: f64) {
        self.tolerances.insert(name.to_string(), value);
    }

    pub fn note(&mut self, note: impl Into<String>) {
        self.notes.push(note.into());
    }

    /// Records a check; the first failing one supplies the violation text.
    pub fn check(&mut self, ok: bool, violation: impl FnOnce() -> String) {
        if !ok {
            if self.violation.is_none() {
                self.violation = Some(violation());
            }
            self.verdict = self.verdict.combine(Verdict::Fail);
        }
    }

    pub fn mark_inconclusive(&mut self, why: impl Into<String>) {
        self.verdict = self.verdict.combine(Verdict::Inconclusive);
        self.notes.push(why.into());
    }

    pub fn passed(&self) -> bool {
        self.verdict == Verdict::Pass
    }

    /// One-line summary: `PASS name (detail)`.
    pub fn summary(&self) -> String {
        let tag = match self.verdict {
            Verdict::Pass => "PASS",
            Verdict::Fail => "FAIL",
            Verdict::Inconclusive => "INCONCLUSIVE",
        };
        match &self.violation {
            Some(v) => format!("{tag} {}: {v}", self.name),
            None => format!("{tag} {}", self.name),
        }
    }

    /// Writes `report.json` and one CSV per table into `dir`.
    pub fn write_to(&self, dir: &Path) -> Result<()> {
        std::fs::create_dir_all(dir)?;
        std::fs::write(dir.join("report.json"), serde_json::to_string_pretty(self)? + "\n")?;
        for (name, table) in &self.tables {
            std::fs::write(dir.join(format!("{name}.csv")), table.to_csv())?;
        }
        Ok(())
    }

    /// `<root>/<name>-<unix seconds>-seed<seed>`, with a `-<n>` suffix when
    /// that directory already exists.
    pub fn run_dir(&self, root: &Path) -> PathBuf {
        let stamp = std::time::SystemTime::now()
            .duration_since(std::time::UNIX_EPOCH)
            .map(|d| d.as_secs())
            .unwrap_or(0);
        let base = format!("{}-{stamp}-seed{}", self.name, self.seed);
        let mut dir = root.join(&base);
        let mut n = 1;
        while dir.exists() {
            dir = root.join(format!("{base}-{n}"));
            n += 1;
        }
        dir
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn verdict_combination() {
        use Verdict::*;
        assert_eq!(Pass.combine(Inconclusive), Inconclusive);
        assert_eq!(Inconclusive.combine(Fail), Fail);
        assert_eq!(Pass.combine(Pass), Pass);
    }

    #[test]
    fn first_violation_is_kept() {
        let mut r = ExperimentReport::new("x", 3);
        r.check(true, || "never".into());
        r.check(false, || "first".into());
        r.check(false, || "second".into());
        assert_eq!(r.verdict, Verdict::Fail);
        assert_eq!(r.violation.as_deref(), Some("first"));
        assert!(r.summary().starts_with("FAIL x: first"));
    }

    #[test]
    fn writes_json_and_tables() {
        let dir = tempfile::tempdir().unwrap();
        let mut r = ExperimentReport::new("demo", 1);
        let mut t = Table::new(&["a", "b"]);
        t.push(vec![1.0, 0.1]);
        r.table("data", t);
        r.write_to(dir.path()).unwrap();
        let csv = std::fs::read_to_string(dir.path().join("data.csv")).unwrap();
        assert_eq!(csv.lines().next(), Some("a,b"));
        let back: ExperimentReport =
            serde_json::from_str(&std::fs::read_to_string(dir.path().join("report.json")).unwrap()).unwrap();
        assert_eq!(back, r);
    }
}
