//! CSV helpers: fixed float formatting for byte-reproducible outputs, and
//! schema-checked reading for the plotting side.

use anyhow::{anyhow, Context, Result};
use std::collections::HashMap;
use std::path::Path;

/// 17 significant digits: enough to round-trip every f64 exactly.
pub fn fmt_f64(x: f64) -> String {
    if x.is_nan() {
        "NaN".into()
    } else {
        format!("{x:.16e}")
    }
}

pub fn fmt_u64(x: u64) -> String {
    x.to_string()
}

pub fn fmt_usize(x: usize) -> String {
    x.to_string()
}

pub fn fmt_bool(x: bool) -> String {
    x.to_string()
}

/// Write rows of pre-formatted fields under a header.
pub fn write_csv(path: &Path, header: &[&str], rows: &[Vec<String>]) -> Result<()> {
    let mut w = csv::Writer::from_path(path)
        .with_context(|| format!("cannot create {}", path.display()))?;
    w.write_record(header)?;
    for row in rows {
        debug_assert_eq!(row.len(), header.len());
        w.write_record(row)?;
    }
    w.flush()?;
    Ok(())
}

/// A CSV file loaded into memory with column lookup by name.
pub struct Table {
    pub header: Vec<String>,
    pub rows: Vec<Vec<String>>,
    index: HashMap<String, usize>,
}

impl Table {
    pub fn read(path: &Path) -> Result<Table> {
        let mut r = csv::Reader::from_path(path)
            .with_context(|| format!("cannot read {}", path.display()))?;
        let header: Vec<String> = r
            .headers()?
            .iter()
            .map(|s| s.to_string())
            .collect();
        let index = header
            .iter()
            .enumerate()
            .map(|(i, name)| (name.clone(), i))
            .collect();
        let mut rows = Vec::new();
        for record in r.records() {
            let record = record?;
            rows.push(record.iter().map(|s| s.to_string()).collect());
        }
        Ok(Table {
            header,
            rows,
            index,
        })
    }

    /// Column index by name; a missing column is a schema error naming it.
    pub fn column(&self, name: &str) -> Result<usize> {
        self.index
            .get(name)
            .copied()
            .ok_or_else(|| anyhow!("schema error: missing column `{name}`"))
    }

    pub fn f64(&self, row: &[String], name: &str) -> Result<f64> {
        let idx = self.column(name)?;
        row[idx]
            .parse::<f64>()
            .with_context(|| format!("column `{name}`: cannot parse `{}`", row[idx]))
    }

    pub fn str<'a>(&self, row: &'a [String], name: &str) -> Result<&'a str> {
        Ok(&row[self.column(name)?])
    }

    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn float_format_round_trips_exactly() {
        for &x in &[
            0.1,
            -3.0 / 7.0,
            1e-300,
            9.3,
            std::f64::consts::PI,
            6.02214076e23,
        ] {
            let s = fmt_f64(x);
            assert_eq!(s.parse::<f64>().unwrap(), x, "string {s}");
        }
        assert_eq!(fmt_f64(f64::NAN), "NaN");
        assert!(fmt_f64(f64::NAN).parse::<f64>().unwrap().is_nan());
    }

    #[test]
    fn csv_write_read_round_trip() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("t.csv");
        let rows = vec![
            vec![fmt_f64(1.5), "a".to_string()],
            vec![fmt_f64(-2.0), "b".to_string()],
        ];
        write_csv(&path, &["x", "tag"], &rows).unwrap();
        let t = Table::read(&path).unwrap();
        assert_eq!(t.rows.len(), 2);
        assert_eq!(t.f64(&t.rows[0], "x").unwrap(), 1.5);
        assert_eq!(t.str(&t.rows[1], "tag").unwrap(), "b");
        assert!(t.column("missing").is_err());
        let msg = format!("{}", t.column("missing").unwrap_err());
        assert!(msg.contains("missing"), "error should name the column: {msg}");
    }
}
