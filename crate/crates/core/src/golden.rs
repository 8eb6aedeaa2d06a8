//! Golden-file regression over the CSV artifacts of a run, compared after rounding
//! every floating-point field to 10 significant digits.

use std::fs;
use std::path::{Path, PathBuf};

use crate::error::{Error, Result};

/// Integers and text are kept; other numbers become `{:.9e}`.
pub fn round_field(s: &str) -> String {
    if s.parse::<i64>().is_ok() {
        return s.to_string();
    }
    match s.parse::<f64>() {
        Ok(x) if x.is_finite() => format!("{x:.9e}"),
        _ => s.to_string(),
    }
}

pub fn round_csv(contents: &str) -> String {
    let mut out = String::with_capacity(contents.len());
    for line in contents.lines() {
        let fields: Vec<String> = line.split(',').map(round_field).collect();
        out.push_str(&fields.join(","));
        out.push('\n');
    }
    out
}

fn csv_files(dir: &Path) -> Result<Vec<PathBuf>> {
    let mut v: Vec<PathBuf> = fs::read_dir(dir)?
        .filter_map(|e| e.ok().map(|e| e.path()))
        .filter(|p| p.extension().is_some_and(|x| x == "csv"))
        .collect();
    v.sort();
    Ok(v)
}

fn file_name(p: &Path) -> String {
    p.file_name().map(|n| n.to_string_lossy().into_owned()).unwrap_or_default()
}

/// Replace the goldens in `dir` by the rounded CSVs of `from`; returns the file count.
pub fn update(dir: &Path, from: &Path) -> Result<usize> {
    let files = csv_files(from)?;
    if files.is_empty() {
        return Err(Error::Golden(format!("no CSV artifacts in {}", from.display())));
    }
    fs::create_dir_all(dir)?;
    for old in csv_files(dir)? {
        fs::remove_file(old)?;
    }
    for f in &files {
        fs::write(dir.join(file_name(f)), round_csv(&fs::read_to_string(f)?))?;
    }
    Ok(files.len())
}

#[derive(Clone, Debug, Default, PartialEq)]
pub struct GoldenReport {
    pub files_checked: usize,
    pub mismatches: Vec<String>,
}

impl GoldenReport {
    pub fn pass(&self) -> bool {
        self.mismatches.is_empty()
    }
}

/// Mismatches listed per file are capped at this many lines.
const MAX_DIFFS_PER_FILE: usize = 20;

/// Compare the rounded CSVs of `from` with the goldens in `dir`.
pub fn check(dir: &Path, from: &Path) -> Result<GoldenReport> {
    if !dir.is_dir() {
        return Err(Error::Golden(format!(
            "golden directory {} does not exist; create it with `toda-kdv golden update --dir {}`",
            dir.display(),
            dir.display()
        )));
    }
    let mut report = GoldenReport::default();
    let produced = csv_files(from)?;
    for f in &produced {
        let name = file_name(f);
        let golden = dir.join(&name);
        report.files_checked += 1;
        if !golden.is_file() {
            report.mismatches.push(format!(
                "{name}: missing golden file; run `toda-kdv golden update --dir {}` to record it",
                dir.display()
            ));
            continue;
        }
        let want = fs::read_to_string(&golden)?;
        let got = round_csv(&fs::read_to_string(f)?);
        report.mismatches.extend(diff_lines(&name, &want, &got));
    }
    for g in csv_files(dir)? {
        let name = file_name(&g);
        if !produced.iter().any(|p| file_name(p) == name) {
            report.mismatches.push(format!("{name}: golden file has no counterpart in {}", from.display()));
        }
    }
    Ok(report)
}

fn diff_lines(name: &str, want: &str, got: &str) -> Vec<String> {
    let (w, g): (Vec<&str>, Vec<&str>) = (want.lines().collect(), got.lines().collect());
    let mut out = Vec::new();
    for i in 0..w.len().max(g.len()) {
        let (a, b) = (w.get(i).copied(), g.get(i).copied());
        if a == b {
            continue;
        }
        let msg = match (a, b) {
            (Some(a), Some(b)) => {
                let (fa, fb): (Vec<&str>, Vec<&str>) = (a.split(',').collect(), b.split(',').collect());
                let col = (0..fa.len().max(fb.len())).find(|&k| fa.get(k) != fb.get(k)).unwrap_or(0);
                format!(
                    "{name}:{}:{}: expected {}, found {}",
                    i + 1,
                    col + 1,
                    fa.get(col).unwrap_or(&"<none>"),
                    fb.get(col).unwrap_or(&"<none>")
                )
            }
            (Some(_), None) => format!("{name}:{}: line missing from output", i + 1),
            (None, Some(_)) => format!("{name}:{}: extra line in output", i + 1),
            (None, None) => unreachable!(),
        };
        out.push(msg);
        if out.len() == MAX_DIFFS_PER_FILE {
            out.push(format!("{name}: further differences omitted"));
            break;
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rounding_keeps_integers_and_text() {
        assert_eq!(round_field("1024"), "1024");
        assert_eq!(round_field("edge_left_0"), "edge_left_0");
        assert_eq!(round_field("true"), "true");
        assert_eq!(round_field("1.23456789012345e-3"), "1.234567890e-3");
        assert_eq!(round_field("0e0"), "0.000000000e0");
    }

    #[test]
    fn located_diff() {
        let d = diff_lines("a.csv", "N,x\n1,2.0\n", "N,x\n1,2.5\n");
        assert_eq!(d, vec!["a.csv:2:2: expected 2.0, found 2.5".to_string()]);
    }
}
