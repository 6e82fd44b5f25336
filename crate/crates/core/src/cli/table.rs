//! CSV files with a `# key=value` metadata header, and the dataset format.

use std::fmt::Write as _;
use std::path::Path;

use crate::error::{Error, Result};
use crate::experiment::DataPoint;

/// Column header of measured datasets.
pub const DATASET_COLUMNS: [&str; 4] = ["slit_width_m", "fwhm_m", "vdw_flag", "weight"];

/// A numeric table with provenance metadata.
///
/// Values are written with Rust's shortest round-trip float formatting, so
/// `parse(render(f)) == f` bit for bit.
#[derive(Debug, Clone, PartialEq)]
pub struct CurveFile {
    pub metadata: Vec<(String, String)>,
    pub columns: Vec<String>,
    pub rows: Vec<Vec<f64>>,
}

impl CurveFile {
    pub fn new(metadata: Vec<(String, String)>, columns: &[&str]) -> Self {
        Self {
            metadata,
            columns: columns.iter().map(|c| c.to_string()).collect(),
            rows: Vec::new(),
        }
    }

    pub fn push(&mut self, row: Vec<f64>) -> Result<()> {
        if row.len() != self.columns.len() {
            return Err(Error::invalid(
                "row",
                format!(
                    "has {} values for {} columns",
                    row.len(),
                    self.columns.len()
                ),
            ));
        }
        self.rows.push(row);
        Ok(())
    }

    pub fn column(&self, name: &str) -> Option<Vec<f64>> {
        let j = self.columns.iter().position(|c| c == name)?;
        Some(self.rows.iter().map(|r| r[j]).collect())
    }

    pub fn meta(&self, key: &str) -> Option<&str> {
        self.metadata
            .iter()
            .find(|(k, _)| k == key)
            .map(|(_, v)| v.as_str())
    }

    pub fn render(&self) -> String {
        let mut out = String::new();
        for (k, v) in &self.metadata {
            let _ = writeln!(out, "# {k}={v}");
        }
        let _ = writeln!(out, "{}", self.columns.join(","));
        for row in &self.rows {
            let cells: Vec<String> = row.iter().map(|v| format!("{v:e}")).collect();
            let _ = writeln!(out, "{}", cells.join(","));
        }
        out
    }

    pub fn parse(text: &str, origin: &str) -> Result<Self> {
        let err = |line: usize, message: String| Error::Parse {
            path: origin.to_string(),
            line,
            message,
        };
        let mut metadata = Vec::new();
        let mut columns: Option<Vec<String>> = None;
        let mut rows = Vec::new();
        for (idx, line) in text.lines().enumerate() {
            let n = idx + 1;
            if let Some(rest) = line.strip_prefix('#') {
                if columns.is_none() {
                    if let Some((k, v)) = rest.trim_start().split_once('=') {
                        metadata.push((k.to_string(), v.to_string()));
                    }
                }
                continue;
            }
            if line.trim().is_empty() {
                continue;
            }
            match &columns {
                None => columns = Some(line.split(',').map(|c| c.trim().to_string()).collect()),
                Some(cols) => {
                    let row = line
                        .split(',')
                        .map(|c| c.trim().parse::<f64>())
                        .collect::<std::result::Result<Vec<_>, _>>()
                        .map_err(|e| err(n, format!("bad number: {e}")))?;
                    if row.len() != cols.len() {
                        return Err(err(
                            n,
                            format!("expected {} columns, got {}", cols.len(), row.len()),
                        ));
                    }
                    rows.push(row);
                }
            }
        }
        let columns = columns.ok_or_else(|| err(0, "missing column header".into()))?;
        Ok(Self {
            metadata,
            columns,
            rows,
        })
    }

    pub fn write(&self, path: &Path) -> Result<()> {
        std::fs::write(path, self.render())?;
        Ok(())
    }

    pub fn read(path: &Path) -> Result<Self> {
        Self::parse(&std::fs::read_to_string(path)?, &path.display().to_string())
    }
}

/// Parses a measured dataset. A header row naming the columns is optional;
/// the weight column may be omitted (weight 1).
pub fn parse_dataset(text: &str, origin: &str) -> Result<Vec<DataPoint>> {
    let err = |line: usize, message: String| Error::Parse {
        path: origin.to_string(),
        line,
        message,
    };
    let mut out = Vec::new();
    for (idx, raw) in text.lines().enumerate() {
        let n = idx + 1;
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let cells: Vec<&str> = line.split(',').map(str::trim).collect();
        if out.is_empty() && cells.first() == Some(&DATASET_COLUMNS[0]) {
            if cells.len() < 3 || cells[..] != DATASET_COLUMNS[..cells.len()] {
                return Err(err(
                    n,
                    format!("unexpected header, want {}", DATASET_COLUMNS.join(",")),
                ));
            }
            continue;
        }
        if !(3..=4).contains(&cells.len()) {
            return Err(err(
                n,
                format!("expected 3 or 4 columns, got {}", cells.len()),
            ));
        }
        let num = |i: usize, what: &str| -> Result<f64> {
            let v: f64 = cells[i]
                .parse()
                .map_err(|_| err(n, format!("{what} `{}` is not a number", cells[i])))?;
            if !v.is_finite() {
                return Err(err(n, format!("{what} must be finite")));
            }
            Ok(v)
        };
        let slit_width = num(0, "slit width")?;
        let measured_fwhm = num(1, "fwhm")?;
        if slit_width <= 0.0 || measured_fwhm <= 0.0 {
            return Err(err(n, "slit width and fwhm must be positive".into()));
        }
        let vdw_flag = match cells[2] {
            "0" => false,
            "1" => true,
            other => return Err(err(n, format!("vdw_flag must be 0 or 1, got `{other}`"))),
        };
        let weight = if cells.len() == 4 {
            num(3, "weight")?
        } else {
            1.0
        };
        if weight < 0.0 {
            return Err(err(n, "weight must be >= 0".into()));
        }
        out.push(DataPoint {
            slit_width,
            measured_fwhm,
            vdw_flag,
            weight,
        });
    }
    if out.is_empty() {
        return Err(err(0, "dataset has no rows".into()));
    }
    Ok(out)
}

pub fn read_dataset(path: &Path) -> Result<Vec<DataPoint>> {
    parse_dataset(&std::fs::read_to_string(path)?, &path.display().to_string())
}

pub fn render_dataset(metadata: &[(String, String)], data: &[DataPoint]) -> String {
    let mut out = String::new();
    for (k, v) in metadata {
        let _ = writeln!(out, "# {k}={v}");
    }
    let _ = writeln!(out, "{}", DATASET_COLUMNS.join(","));
    for d in data {
        let _ = writeln!(
            out,
            "{:e},{:e},{},{:e}",
            d.slit_width,
            d.measured_fwhm,
            u8::from(d.vdw_flag),
            d.weight
        );
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn curve_file_round_trip_is_exact() {
        let mut f = CurveFile::new(
            vec![("tool".into(), "x 1".into()), ("a".into(), "b=c".into())],
            &["x", "y"],
        );
        f.push(vec![0.1 + 0.2, -1.0 / 3.0]).unwrap();
        f.push(vec![f64::MIN_POSITIVE, 6.02214076e23]).unwrap();
        assert!(f.push(vec![1.0]).is_err());
        let back = CurveFile::parse(&f.render(), "mem").unwrap();
        assert_eq!(back, f);
        assert_eq!(back.meta("a"), Some("b=c"));
        assert_eq!(back.column("y").unwrap()[1], 6.02214076e23);
    }

    #[test]
    fn dataset_parsing() {
        let text =
            "# measured\nslit_width_m,fwhm_m,vdw_flag,weight\n7e-8,2.4e-5,1,1\n1e-6, 1.4e-5 ,0\n\n";
        let d = parse_dataset(text, "d").unwrap();
        assert_eq!(d.len(), 2);
        assert!(d[0].vdw_flag);
        assert_eq!(d[1].weight, 1.0);
        assert_eq!(parse_dataset(&render_dataset(&[], &d), "d").unwrap(), d);

        for (bad, line) in [
            ("", 0),
            ("# only comments\n", 0),
            ("1e-6,2e-5,0\n1e-6,abc,0\n", 2),
            ("1e-6,2e-5,2\n", 1),
            ("1e-6,2e-5\n", 1),
            ("1e-6,-2e-5,0\n", 1),
            ("slit_width_m,fwhm,vdw_flag\n", 1),
        ] {
            match parse_dataset(bad, "d") {
                Err(Error::Parse { line: l, .. }) => assert_eq!(l, line, "{bad:?}"),
                other => panic!("{bad:?}: {other:?}"),
            }
        }
    }
}
