//! Deterministic CSV output: UTF-8, LF, header row, 17-significant-digit
//! scientific notation. Values are checked for finiteness before anything
//! touches the filesystem, and the file appears atomically via a rename so
//! no partial output survives a failure.

use std::io::Write;
use std::path::Path;

#[derive(Debug)]
pub enum WriteError {
    /// Data contained NaN or infinity; refuse to serialize.
    NonFinite { row: usize, col: usize },
    Io(std::io::Error),
}

impl std::fmt::Display for WriteError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            WriteError::NonFinite { row, col } => {
                write!(f, "refusing to write non-finite value at row {row}, column {col}")
            }
            WriteError::Io(e) => write!(f, "output write failed: {e}"),
        }
    }
}

pub fn render_csv(header: &[&str], rows: &[Vec<f64>]) -> Result<String, WriteError> {
    for (i, row) in rows.iter().enumerate() {
        for (j, v) in row.iter().enumerate() {
            if !v.is_finite() {
                return Err(WriteError::NonFinite { row: i, col: j });
            }
        }
    }
    let mut out = String::new();
    out.push_str(&header.join(","));
    out.push('\n');
    for row in rows {
        let line: Vec<String> = row.iter().map(|v| format!("{v:.16e}")).collect();
        out.push_str(&line.join(","));
        out.push('\n');
    }
    Ok(out)
}

pub fn write_csv(path: &Path, header: &[&str], rows: &[Vec<f64>]) -> Result<(), WriteError> {
    let body = render_csv(header, rows)?;
    let tmp = path.with_extension("csv.tmp");
    let result = (|| -> std::io::Result<()> {
        let mut f = std::fs::File::create(&tmp)?;
        f.write_all(body.as_bytes())?;
        f.sync_all()?;
        std::fs::rename(&tmp, path)?;
        Ok(())
    })();
    if let Err(e) = result {
        let _ = std::fs::remove_file(&tmp);
        return Err(WriteError::Io(e));
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn refuses_nan() {
        let r = render_csv(&["a", "b"], &[vec![1.0, f64::NAN]]);
        assert!(matches!(r, Err(WriteError::NonFinite { row: 0, col: 1 })));
    }

    #[test]
    fn layout_and_determinism() {
        let rows = vec![vec![1e-3, 2.0], vec![0.25, -3.5e9]];
        let a = render_csv(&["t_s", "V_volts"], &rows).unwrap();
        let b = render_csv(&["t_s", "V_volts"], &rows).unwrap();
        assert_eq!(a, b);
        assert_eq!(a.lines().count(), 3);
        assert!(a.starts_with("t_s,V_volts\n"));
        assert!(!a.contains('\r'));
        // 17 significant digits
        assert!(a.contains("1.0000000000000000e-3"), "{a}");
    }
}
