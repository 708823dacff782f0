//! Bit-stable CSV: header row, 17 significant digits per value, `,`
//! separator, `\n` line endings. Identical inputs produce byte-identical
//! files, so runs can be compared with plain diff.

use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::Path;

use crate::error::{Error, Result};
use crate::profile::{GridSpec, Profile};

fn fmt(x: f64) -> String {
    format!("{x:.16e}")
}

/// Write equally long columns under the given header names.
pub fn write_columns(path: &Path, header: &[&str], columns: &[&[f64]]) -> Result<()> {
    assert_eq!(header.len(), columns.len(), "one name per column");
    let rows = columns.first().map_or(0, |c| c.len());
    for c in columns {
        assert_eq!(c.len(), rows, "ragged columns");
    }
    let mut w = BufWriter::new(File::create(path)?);
    w.write_all(header.join(",").as_bytes())?;
    w.write_all(b"\n")?;
    for i in 0..rows {
        let line: Vec<String> = columns.iter().map(|c| fmt(c[i])).collect();
        w.write_all(line.join(",").as_bytes())?;
        w.write_all(b"\n")?;
    }
    w.flush()?;
    Ok(())
}

pub fn write_profile(path: &Path, p: &Profile<f64>) -> Result<()> {
    let ts: Vec<f64> = (0..p.len()).map(|i| p.spec().node(i)).collect();
    write_columns(path, &["t", "x"], &[&ts, p.values()])
}

/// Read a table written by `write_columns`: header names plus column data.
pub fn read_table(path: &Path) -> Result<(Vec<String>, Vec<Vec<f64>>)> {
    let text = std::fs::read_to_string(path)?;
    let mut lines = text.lines();
    let header: Vec<String> = lines
        .next()
        .ok_or_else(|| Error::Parse(format!("{}: empty file", path.display())))?
        .split(',')
        .map(|s| s.trim().to_string())
        .collect();
    let mut columns: Vec<Vec<f64>> = vec![Vec::new(); header.len()];
    for (idx, line) in lines.enumerate() {
        if line.is_empty() {
            continue;
        }
        let fields: Vec<&str> = line.split(',').collect();
        if fields.len() != header.len() {
            return Err(Error::Parse(format!(
                "{}: line {} has {} fields, expected {}",
                path.display(),
                idx + 2,
                fields.len(),
                header.len()
            )));
        }
        for (c, f) in columns.iter_mut().zip(&fields) {
            c.push(f.trim().parse().map_err(|_| {
                Error::Parse(format!("{}: line {}: bad number '{f}'", path.display(), idx + 2))
            })?);
        }
    }
    Ok((header, columns))
}

/// Reconstruct a profile from a two-column (t, x) file. The time column
/// must be a uniform grid; `left_rate` resupplies the tail model, which is
/// not stored in the CSV.
pub fn read_profile(path: &Path, left_rate: f64) -> Result<Profile<f64>> {
    let (header, columns) = read_table(path)?;
    if header.len() != 2 {
        return Err(Error::Parse(format!(
            "{}: expected two columns (t, x), found {}",
            path.display(),
            header.len()
        )));
    }
    let (ts, xs) = (&columns[0], &columns[1]);
    if ts.len() < 2 {
        return Err(Error::Parse(format!("{}: need at least two rows", path.display())));
    }
    let h = ts[1] - ts[0];
    let spec = GridSpec::new(ts[0], ts[ts.len() - 1], h)?;
    if spec.num_nodes() != ts.len() {
        return Err(Error::Parse(format!("{}: time column is not a uniform grid", path.display())));
    }
    for (i, &t) in ts.iter().enumerate() {
        if (t - spec.node(i)).abs() > 1e-9 * t.abs().max(1.0) {
            return Err(Error::Parse(format!(
                "{}: non-uniform time column near row {}",
                path.display(),
                i + 2
            )));
        }
    }
    let last = xs[xs.len() - 1];
    Profile::new(spec, xs.clone(), left_rate, last)
}
