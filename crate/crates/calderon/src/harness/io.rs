//! File formats: raw field dumps, CSV tables with embedded provenance, and
//! JSON reports.
//!
//! Field dump: one text header line `N L kind`, then `N^2` little-endian
//! 64-bit float pairs `(re, im)` in row-major order.
//!
//! CSV files open with `#`-prefixed comment lines: a timestamp (the one line
//! exempt from byte-determinism), the schema version, and the full resolved
//! configuration. A sidecar `<name>.schema.txt` documents the columns.

use crate::error::{Error, Result};
use crate::field::Field;
use crate::grid::GridSpec;
use num_complex::Complex64;
use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Read, Write};
use std::path::Path;

pub const CSV_SCHEMA_VERSION: &str = "1";

pub fn write_field_dump(path: &Path, field: &Field, kind: &str) -> Result<()> {
    let mut w = BufWriter::new(File::create(path)?);
    let grid = field.grid();
    writeln!(w, "{} {} {}", grid.n(), grid.half_width(), kind)?;
    for c in field.samples() {
        w.write_all(&c.re.to_le_bytes())?;
        w.write_all(&c.im.to_le_bytes())?;
    }
    Ok(())
}

pub fn read_field_dump(path: &Path) -> Result<(Field, String)> {
    let mut r = BufReader::new(File::open(path)?);
    let mut header = String::new();
    r.read_line(&mut header)?;
    let parts: Vec<&str> = header.split_whitespace().collect();
    if parts.len() != 3 {
        return Err(Error::Parse(format!("bad field dump header: {header}")));
    }
    let n: usize = parts[0].parse().map_err(|_| Error::Parse("bad point count".into()))?;
    let l: f64 = parts[1].parse().map_err(|_| Error::Parse("bad half width".into()))?;
    let kind = parts[2].to_string();
    let grid = GridSpec::new(n, l)?;
    let mut samples = Vec::with_capacity(grid.len());
    let mut buf = [0u8; 16];
    for _ in 0..grid.len() {
        r.read_exact(&mut buf)?;
        samples.push(Complex64::new(
            f64::from_le_bytes(buf[0..8].try_into().unwrap()),
            f64::from_le_bytes(buf[8..16].try_into().unwrap()),
        ));
    }
    Ok((Field::from_samples(grid, samples)?, kind))
}

/// CSV writer with provenance headers and a sidecar schema file.
pub struct CsvTable {
    writer: BufWriter<File>,
}

impl CsvTable {
    pub fn create(
        dir: &Path,
        name: &str,
        columns: &[(&str, &str)],
        config_echo: &str,
    ) -> Result<Self> {
        std::fs::create_dir_all(dir)?;
        let mut writer = BufWriter::new(File::create(dir.join(format!("{name}.csv")))?);
        let stamp = std::time::SystemTime::now()
            .duration_since(std::time::UNIX_EPOCH)
            .map(|d| d.as_secs())
            .unwrap_or(0);
        writeln!(writer, "# generated_at_unix {stamp}")?;
        writeln!(writer, "# schema_version {CSV_SCHEMA_VERSION}")?;
        for line in config_echo.lines() {
            writeln!(writer, "# config {line}")?;
        }
        let header: Vec<&str> = columns.iter().map(|c| c.0).collect();
        writeln!(writer, "{}", header.join(","))?;

        let mut schema = BufWriter::new(File::create(dir.join(format!("{name}.schema.txt")))?);
        writeln!(schema, "{name}.csv schema version {CSV_SCHEMA_VERSION}")?;
        for (col, desc) in columns {
            writeln!(schema, "{col}: {desc}")?;
        }
        Ok(CsvTable { writer })
    }

    pub fn row(&mut self, cells: &[String]) -> Result<()> {
        writeln!(self.writer, "{}", cells.join(","))?;
        Ok(())
    }

    pub fn finish(mut self) -> Result<()> {
        self.writer.flush()?;
        Ok(())
    }
}

/// Shortest-roundtrip float formatting (deterministic across runs).
pub fn fmt(v: f64) -> String {
    if v.is_nan() {
        "nan".to_string()
    } else {
        format!("{v}")
    }
}

pub fn fmt_opt(v: Option<f64>) -> String {
    match v {
        Some(x) => fmt(x),
        None => String::new(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn field_dump_roundtrip() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("f.dump");
        let g = GridSpec::new(32, 2.0).unwrap();
        let f = Field::from_fn(g, |z| Complex64::new(z.re, -z.im));
        write_field_dump(&p, &f, "gamma").unwrap();
        let (back, kind) = read_field_dump(&p).unwrap();
        assert_eq!(kind, "gamma");
        assert_eq!(back.grid(), g);
        assert_eq!(back.sub(&f).sup_norm(), 0.0);
    }

    #[test]
    fn csv_deterministic_modulo_timestamp() {
        let dir = tempfile::tempdir().unwrap();
        let write = |name: &str| {
            let mut t = CsvTable::create(
                dir.path(),
                name,
                &[("a", "first"), ("b", "second")],
                "key = 1\n[sect]\nv = 2",
            )
            .unwrap();
            t.row(&[fmt(1.5), fmt(-0.25)]).unwrap();
            t.finish().unwrap();
        };
        write("one");
        write("two");
        let strip = |name: &str| -> String {
            std::fs::read_to_string(dir.path().join(format!("{name}.csv")))
                .unwrap()
                .lines()
                .filter(|l| !l.starts_with("# generated_at_unix"))
                .collect::<Vec<_>>()
                .join("\n")
        };
        assert_eq!(strip("one"), strip("two"));
        assert!(dir.path().join("one.schema.txt").exists());
    }
}
