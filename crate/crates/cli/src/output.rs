//! Report emission: every report is a JSON object stamped with a
//! timestamp field that comparisons are expected to strip.

use serde_json::Value;
use std::path::Path;
use weylkit::Result;

pub fn emit(mut report: Value, out: Option<&Path>) -> Result<()> {
    if let Value::Object(map) = &mut report {
        map.insert("generated_at_unix".into(), now().into());
    }
    let text = serde_json::to_string_pretty(&report)? + "\n";
    match out {
        Some(p) => std::fs::write(p, text)?,
        None => print!("{text}"),
    }
    Ok(())
}

fn now() -> u64 {
    std::time::SystemTime::now()
        .duration_since(std::time::UNIX_EPOCH)
        .map(|d| d.as_secs())
        .unwrap_or(0)
}
