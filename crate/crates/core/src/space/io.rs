//! Plain-text serialization of spaces.
//!
//! Matrix format: first line `N M`, then N lines of M space-separated
//! `-1`/`+1` entries (`1` is accepted for `+1`). Witness sidecar: one line
//! per cell holding the witness coordinates, or `-` for cells without one.

use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use super::{HypothesisSpace, SpaceError};
use crate::fmt_f64;

pub fn parse_matrix(text: &str) -> Result<Vec<Vec<i8>>, SpaceError> {
    let mut lines = text
        .lines()
        .enumerate()
        .map(|(i, l)| (i + 1, l.trim()))
        .filter(|(_, l)| !l.is_empty() && !l.starts_with('#'));
    let (hline, header) = lines.next().ok_or(SpaceError::Parse { line: 1, message: "missing header".into() })?;
    let dims: Vec<usize> = header
        .split_whitespace()
        .map(str::parse)
        .collect::<Result<_, _>>()
        .map_err(|e| SpaceError::Parse { line: hline, message: format!("bad header: {e}") })?;
    let [n, m] = dims[..] else {
        return Err(SpaceError::Parse { line: hline, message: "header must be `N M`".into() });
    };
    let mut rows = Vec::with_capacity(n);
    for (line, l) in lines {
        let row = l
            .split_whitespace()
            .map(|tok| match tok {
                "+1" | "1" => Ok(1i8),
                "-1" => Ok(-1i8),
                other => Err(SpaceError::Parse { line, message: format!("entry `{other}` is not -1 or +1") }),
            })
            .collect::<Result<Vec<i8>, _>>()?;
        if row.len() != m {
            return Err(SpaceError::Parse { line, message: format!("expected {m} entries, found {}", row.len()) });
        }
        rows.push(row);
    }
    if rows.len() != n {
        return Err(SpaceError::Parse { line: hline, message: format!("header declares {n} rows, found {}", rows.len()) });
    }
    Ok(rows)
}

pub fn read_matrix_file(path: &Path) -> Result<HypothesisSpace, SpaceError> {
    HypothesisSpace::from_matrix(&parse_matrix(&fs::read_to_string(path)?)?)
}

pub fn format_matrix(space: &HypothesisSpace) -> String {
    let mut out = format!("{} {}\n", space.n_hypotheses(), space.n_cells());
    for h in 0..space.n_hypotheses() {
        let row: Vec<String> = (0..space.n_cells()).map(|a| space.label(h, a).to_string()).collect();
        out.push_str(&row.join(" "));
        out.push('\n');
    }
    out
}

pub fn format_witnesses(space: &HypothesisSpace) -> String {
    let mut out = String::new();
    for c in space.cells() {
        match &c.witness {
            Some(x) => {
                let coords: Vec<String> = x.iter().map(|&v| fmt_f64(v)).collect();
                let _ = writeln!(out, "{}", coords.join(" "));
            }
            None => out.push_str("-\n"),
        }
    }
    out
}

pub fn parse_witnesses(text: &str) -> Result<Vec<Option<Vec<f64>>>, SpaceError> {
    text.lines()
        .enumerate()
        .filter(|(_, l)| !l.trim().is_empty())
        .map(|(i, l)| {
            let l = l.trim();
            if l == "-" {
                return Ok(None);
            }
            l.split_whitespace()
                .map(str::parse::<f64>)
                .collect::<Result<Vec<_>, _>>()
                .map(Some)
                .map_err(|e| SpaceError::Parse { line: i + 1, message: e.to_string() })
        })
        .collect()
}

/// Writes `<stem>.txt` (matrix) and `<stem>.witness.txt` (sidecar).
pub fn write_space(space: &HypothesisSpace, dir: &Path, stem: &str) -> Result<(), SpaceError> {
    fs::create_dir_all(dir)?;
    fs::write(dir.join(format!("{stem}.txt")), format_matrix(space))?;
    fs::write(dir.join(format!("{stem}.witness.txt")), format_witnesses(space))?;
    Ok(())
}
