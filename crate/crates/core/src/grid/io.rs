//! Grid function files: JSON `{"dimension", "level", "values", "nonneg"}`
//! and flat CSV with a `# dimension=n` / `# level=L` header.

use std::fmt::Write as _;
use std::path::Path;

use crate::error::{Error, Result};
use crate::grid::GridFunction;

pub fn to_json(f: &GridFunction) -> Result<String> {
    crate::canonical_json(f)
}

pub fn from_json(s: &str) -> Result<GridFunction> {
    Ok(serde_json::from_str(s)?)
}

pub fn to_csv(f: &GridFunction) -> String {
    let mut out = format!("# dimension={}\n# level={}\n", f.dimension(), f.level());
    for v in f.values() {
        let _ = writeln!(out, "{v:?}");
    }
    out
}

pub fn from_csv(s: &str) -> Result<GridFunction> {
    let mut lines = s.lines().map(str::trim).filter(|l| !l.is_empty());
    let dimension = header(lines.next(), "dimension")?;
    let level = header(lines.next(), "level")?;
    let values = lines
        .map(|l| {
            l.parse::<f64>()
                .map_err(|e| Error::Config(format!("bad CSV value {l:?}: {e}")))
        })
        .collect::<Result<Vec<_>>>()?;
    GridFunction::new(dimension, level as u32, values)
}

fn header(line: Option<&str>, key: &str) -> Result<usize> {
    let line = line.ok_or_else(|| Error::Config(format!("missing '# {key}=' header")))?;
    line.strip_prefix('#')
        .map(str::trim)
        .and_then(|rest| rest.strip_prefix(key))
        .and_then(|rest| rest.trim_start().strip_prefix('='))
        .and_then(|v| v.trim().parse().ok())
        .ok_or_else(|| Error::Config(format!("expected '# {key}=<int>', got {line:?}")))
}

/// Reads JSON or CSV, chosen by extension (`.csv` means CSV).
pub fn read(path: &Path) -> Result<GridFunction> {
    let text = std::fs::read_to_string(path)?;
    if path.extension().is_some_and(|e| e.eq_ignore_ascii_case("csv")) {
        from_csv(&text)
    } else {
        from_json(&text)
    }
}

pub fn write(path: &Path, f: &GridFunction) -> Result<()> {
    let text = if path.extension().is_some_and(|e| e.eq_ignore_ascii_case("csv")) {
        to_csv(f)
    } else {
        to_json(f)?
    };
    std::fs::write(path, text)?;
    Ok(())
}
