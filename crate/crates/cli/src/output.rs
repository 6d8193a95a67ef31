//! Tidy data files. Floats use Rust's shortest round-trip formatting, so a
//! rerun with the same inputs reproduces every byte.

use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use anyhow::{Context, Result};
use hdt_core::theory::DerivationRow;
use serde::Serialize;

use crate::experiment::SweepRow;

pub const ROWS_SCHEMA: &str = "# hdt-rows schema 1";
pub const ROWS_HEADER: &str = "n,K,delta_t,F_value,F_err,truncated_mass,theory_hdt,theory_hdt_plus,theory_zeno,alpha,c_H,haar_baseline,method,M,seed";

fn opt<T: std::fmt::Display>(v: Option<T>) -> String {
    v.map(|x| x.to_string()).unwrap_or_default()
}

pub fn rows_csv(rows: &[SweepRow]) -> String {
    let mut s = format!("{ROWS_SCHEMA}\n{ROWS_HEADER}\n");
    for r in rows {
        writeln!(
            s,
            "{},{},{},{},{},{},{},{},{},{},{},{},{},{},{}",
            r.n,
            r.k,
            r.delta_t,
            opt(r.f_value),
            opt(r.f_err),
            opt(r.truncated_mass),
            opt(r.theory_hdt),
            opt(r.theory_hdt_plus),
            r.theory_zeno,
            r.alpha,
            r.c_h,
            r.haar_baseline,
            opt(r.method),
            opt(r.samples),
            opt(r.seed),
        )
        .expect("writing to a String");
    }
    s
}

pub fn revival_csv(points: &[(f64, f64)]) -> String {
    let mut s = String::from("t,xi\n");
    for (t, xi) in points {
        writeln!(s, "{t},{xi}").expect("writing to a String");
    }
    s
}

pub fn derivation_csv(rows: &[DerivationRow]) -> String {
    let mut s = String::from("dt,trotter_err,pm_exact,pm_perturbative\n");
    for r in rows {
        writeln!(s, "{},{},{},{}", r.dt, r.trotter_err, r.pm_exact, r.pm_perturbative).expect("writing to a String");
    }
    s
}

pub fn write_text(dir: &Path, name: &str, text: &str) -> Result<()> {
    fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))?;
    let path = dir.join(name);
    fs::write(&path, text).with_context(|| format!("writing {}", path.display()))
}

pub fn write_json<T: Serialize>(dir: &Path, name: &str, value: &T) -> Result<()> {
    let mut text = serde_json::to_string_pretty(value)?;
    text.push('\n');
    write_text(dir, name, &text)
}
