//! Byte-stable CSV tables and sectioned metadata sidecars.

use std::fmt::Write as _;
use std::io;
use std::path::Path;

/// Twelve significant digits in scientific notation; `nan` for undefined
/// entries.
pub fn number(x: f64) -> String {
    if x.is_nan() {
        "nan".into()
    } else if x == 0.0 {
        // keeps -0 and 0 identical
        "0".into()
    } else {
        format!("{x:.11e}")
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Table {
    pub columns: Vec<String>,
    pub rows: Vec<Vec<f64>>,
}

impl Table {
    pub fn new<S: Into<String>>(columns: impl IntoIterator<Item = S>) -> Self {
        Self {
            columns: columns.into_iter().map(Into::into).collect(),
            rows: Vec::new(),
        }
    }

    pub fn push(&mut self, row: Vec<f64>) {
        debug_assert_eq!(row.len(), self.columns.len());
        self.rows.push(row);
    }

    pub fn column(&self, name: &str) -> Option<Vec<f64>> {
        let j = self.columns.iter().position(|c| c == name)?;
        Some(self.rows.iter().map(|r| r[j]).collect())
    }

    pub fn to_csv(&self) -> String {
        let mut s = self.columns.join(",");
        s.push('\n');
        for r in &self.rows {
            let cells: Vec<String> = r.iter().map(|&x| number(x)).collect();
            s.push_str(&cells.join(","));
            s.push('\n');
        }
        s
    }
}

/// Ordered `[section]` / `key = value` document.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Meta {
    sections: Vec<(String, Vec<(String, String)>)>,
}

impl Meta {
    pub fn section(&mut self, name: &str) -> &mut Vec<(String, String)> {
        if let Some(i) = self.sections.iter().position(|(n, _)| n == name) {
            return &mut self.sections[i].1;
        }
        self.sections.push((name.to_string(), Vec::new()));
        &mut self.sections.last_mut().unwrap().1
    }

    pub fn set(&mut self, section: &str, key: &str, value: impl ToString) {
        self.section(section).push((key.to_string(), value.to_string()));
    }

    pub fn set_number(&mut self, section: &str, key: &str, value: f64) {
        self.set(section, key, number(value));
    }

    pub fn entries(&self, section: &str) -> Option<&[(String, String)]> {
        self.sections.iter().find(|(n, _)| n == section).map(|(_, v)| v.as_slice())
    }

    pub fn get(&self, section: &str, key: &str) -> Option<&str> {
        self.sections
            .iter()
            .find(|(n, _)| n == section)?
            .1
            .iter()
            .find(|(k, _)| k == key)
            .map(|(_, v)| v.as_str())
    }

    pub fn render(&self) -> String {
        let mut s = String::new();
        for (i, (name, entries)) in self.sections.iter().enumerate() {
            if i > 0 {
                s.push('\n');
            }
            let _ = writeln!(s, "[{name}]");
            for (k, v) in entries {
                let _ = writeln!(s, "{k} = {v}");
            }
        }
        s
    }
}

pub fn write(path: &Path, contents: &str) -> io::Result<()> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        std::fs::create_dir_all(dir)?;
    }
    std::fs::write(path, contents)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn formatting() {
        assert_eq!(number(1.0), "1.00000000000e0");
        assert_eq!(number(-0.000123456789012345), "-1.23456789012e-4");
        assert_eq!(number(-0.0), "0");
        assert_eq!(number(f64::NAN), "nan");
    }

    #[test]
    fn csv_layout() {
        let mut t = Table::new(["t", "p"]);
        t.push(vec![0.0, 1.0]);
        t.push(vec![0.5, 0.25]);
        assert_eq!(t.to_csv(), "t,p\n0,1.00000000000e0\n5.00000000000e-1,2.50000000000e-1\n");
    }

    #[test]
    fn meta_layout() {
        let mut m = Meta::default();
        m.set("run", "task", "survive");
        m.set_number("results", "norm", 1.0);
        assert_eq!(m.render(), "[run]\ntask = survive\n\n[results]\nnorm = 1.00000000000e0\n");
        assert_eq!(m.get("run", "task"), Some("survive"));
    }
}
