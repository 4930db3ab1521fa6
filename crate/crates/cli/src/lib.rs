//! Batch front end: configuration, orchestration, caching and the
//! acceptance suite.

pub mod acceptance;
pub mod cache;
pub mod commands;
pub mod config;

use std::fs;
use std::path::Path;

use commands::Outcome;

/// Write `record.json`, `timings.json` and any extra files into `out`.
pub fn write_outcome(out: &Path, o: &Outcome) -> std::io::Result<()> {
    fs::create_dir_all(out)?;
    let mut rec = serde_json::to_string_pretty(&o.record)?;
    rec.push('\n');
    fs::write(out.join("record.json"), rec)?;
    let mut t = serde_json::to_string_pretty(&o.timings)?;
    t.push('\n');
    fs::write(out.join("timings.json"), t)?;
    for (name, body) in &o.files {
        fs::write(out.join(name), body)?;
    }
    Ok(())
}
