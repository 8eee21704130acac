//! Artifact writing and the `report` table. All files are written from the
//! calling thread after the experiment has finished.

use std::fs;
use std::io;
use std::path::Path;

use crate::experiments::{Check, Outcome};

pub const CHECKS_FILE: &str = "checks.csv";

fn csv_err(e: csv::Error) -> io::Error {
    io::Error::other(e)
}

pub fn write_outcome(dir: &Path, out: &Outcome) -> io::Result<()> {
    fs::create_dir_all(dir)?;
    if let Some(rows) = &out.decay {
        let mut w = csv::Writer::from_path(dir.join("decay.csv"))?;
        w.write_record(["t", "mean_dist", "stderr", "mode_fraction"]).map_err(csv_err)?;
        for r in rows {
            w.write_record(r.iter().map(|v| v.to_string())).map_err(csv_err)?;
        }
        w.flush()?;
    }
    if let Some(rows) = &out.stein {
        let mut w = csv::Writer::from_path(dir.join("stein.csv"))?;
        w.write_record(["x", "f_h", "stderr", "residual"]).map_err(csv_err)?;
        for (x, f, se, res) in rows {
            w.write_record([x.clone(), f.to_string(), se.to_string(), res.to_string()])
                .map_err(csv_err)?;
        }
        w.flush()?;
    }
    if let Some(reports) = &out.bounds {
        let mut s = serde_json::to_string_pretty(reports).map_err(io::Error::other)?;
        s.push('\n');
        fs::write(dir.join("bounds.json"), s)?;
    }
    let mut w = csv::Writer::from_path(dir.join(CHECKS_FILE))?;
    w.write_record(["name", "anchor", "value", "bound", "pass"]).map_err(csv_err)?;
    for c in &out.checks {
        w.write_record([
            c.name.clone(),
            c.anchor.clone(),
            c.value.to_string(),
            c.bound.to_string(),
            c.pass.to_string(),
        ])
        .map_err(csv_err)?;
    }
    w.flush()?;
    for (rel, text) in &out.files {
        let path = dir.join(rel);
        if let Some(parent) = path.parent() {
            fs::create_dir_all(parent)?;
        }
        fs::write(path, text)?;
    }
    Ok(())
}

/// Reads `checks.csv` back.
pub fn read_checks(dir: &Path) -> Result<Vec<Check>, String> {
    let path = dir.join(CHECKS_FILE);
    if !path.is_file() {
        return Err(format!("{} not found", path.display()));
    }
    let mut r = csv::Reader::from_path(&path).map_err(|e| format!("{}: {e}", path.display()))?;
    let mut out = Vec::new();
    for rec in r.records() {
        let rec = rec.map_err(|e| format!("{}: {e}", path.display()))?;
        if rec.len() != 5 {
            return Err(format!("{}: expected 5 fields, got {}", path.display(), rec.len()));
        }
        let num = |i: usize| rec[i].parse::<f64>().map_err(|_| format!("{}: bad number `{}`", path.display(), &rec[i]));
        out.push(Check {
            name: rec[0].to_string(),
            anchor: rec[1].to_string(),
            value: num(2)?,
            bound: num(3)?,
            pass: rec[4].parse().map_err(|_| format!("{}: bad pass flag `{}`", path.display(), &rec[4]))?,
        });
    }
    Ok(out)
}

pub fn format_table(checks: &[Check]) -> String {
    let head = ["name", "anchor", "value", "bound", "pass"];
    let rows: Vec<[String; 5]> = checks
        .iter()
        .map(|c| {
            [
                c.name.clone(),
                c.anchor.clone(),
                format!("{:.6e}", c.value),
                format!("{:.6e}", c.bound),
                if c.pass { "PASS" } else { "FAIL" }.to_string(),
            ]
        })
        .collect();
    let mut width = head.map(str::len);
    for r in &rows {
        for (w, cell) in width.iter_mut().zip(r) {
            *w = (*w).max(cell.chars().count());
        }
    }
    let line = |cells: [&str; 5]| {
        let mut s = String::new();
        for (i, (cell, w)) in cells.iter().zip(width).enumerate() {
            if i > 0 {
                s.push_str("  ");
            }
            s.push_str(cell);
            if i < 4 {
                s.push_str(&" ".repeat(w - cell.chars().count()));
            }
        }
        s.push('\n');
        s
    };
    let mut out = line(head);
    for r in &rows {
        out.push_str(&line([&r[0], &r[1], &r[2], &r[3], &r[4]]));
    }
    out
}
