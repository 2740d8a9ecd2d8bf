use std::fmt;

use crate::isa::{Mnemonic, Reg};
use crate::issue::Events;

/// One retirement, as written to the trace file.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct TraceEntry {
    pub cycle: u64,
    pub pc: u32,
    pub raw: u32,
    pub mnemonic: Mnemonic,
    pub rd: Option<Reg>,
    pub wb_value: Option<u32>,
    pub events: Events,
    pub tag: u64,
    pub fetch_cycle: u64,
    pub issue_cycle: u64,
}

pub const TRACE_HEADER: &str = "cycle,pc,raw,mnemonic,rd,wb_value,events";

impl fmt::Display for TraceEntry {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{},{:#010x},{:#010x},{},", self.cycle, self.pc, self.raw, self.mnemonic)?;
        match self.rd {
            Some(r) => write!(f, "{r},")?,
            None => f.write_str("-,")?,
        }
        match self.wb_value {
            Some(v) => write!(f, "{v:#010x},")?,
            None => f.write_str("-,")?,
        }
        let events = self.events.to_string();
        f.write_str(if events.is_empty() { "-" } else { &events })
    }
}

/// Renders a trace with its header line.
pub fn render(entries: &[TraceEntry]) -> String {
    let mut out = String::with_capacity(entries.len() * 48 + 64);
    out.push_str(TRACE_HEADER);
    out.push('\n');
    for e in entries {
        out.push_str(&e.to_string());
        out.push('\n');
    }
    out
}
