use std::io::Write;

use super::engine::RoundTrace;
use crate::error::Result;

/// Writes one JSON object per round.
pub fn write_jsonl<W: Write>(mut w: W, traces: &[RoundTrace]) -> Result<()> {
    for t in traces {
        serde_json::to_writer(&mut w, t)?;
        w.write_all(b"\n")?;
    }
    Ok(())
}
