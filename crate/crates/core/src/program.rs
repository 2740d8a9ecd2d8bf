use serde::Serialize;
use thiserror::Error;

use crate::isa::{ArchState, IsaConfig, Memory};

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Segment {
    pub addr: u32,
    #[serde(skip)]
    pub bytes: Vec<u8>,
}

/// A loadable program: memory segments, entry point and optional `tohost`
/// exit address.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ProgramImage {
    pub segments: Vec<Segment>,
    pub entry_pc: u32,
    pub tohost_addr: Option<u32>,
}

#[derive(Debug, Error, PartialEq, Eq)]
pub enum ImageError {
    #[error("segments at {0:#010x} and {1:#010x} overlap")]
    Overlap(u32, u32),
    #[error("entry point {0:#010x} is outside every segment")]
    EntryOutside(u32),
}

impl ProgramImage {
    pub fn validate(&self) -> Result<(), ImageError> {
        let mut spans: Vec<(u64, u64)> =
            self.segments.iter().map(|s| (s.addr as u64, s.addr as u64 + s.bytes.len() as u64)).collect();
        spans.sort_unstable();
        for w in spans.windows(2) {
            if w[1].0 < w[0].1 {
                return Err(ImageError::Overlap(w[0].0 as u32, w[1].0 as u32));
            }
        }
        let pc = self.entry_pc as u64;
        if !spans.iter().any(|&(lo, hi)| (lo..hi).contains(&pc)) {
            return Err(ImageError::EntryOutside(self.entry_pc));
        }
        Ok(())
    }

    pub fn memory(&self) -> Memory {
        let mut m = Memory::new();
        for s in &self.segments {
            m.write_bytes(s.addr, &s.bytes);
        }
        m
    }

    /// Initial architectural state for the reference interpreter.
    pub fn arch_state(&self, isa: IsaConfig) -> ArchState {
        let mut s = ArchState::new(self.entry_pc, self.memory(), isa);
        s.tohost = self.tohost_addr;
        s
    }
}
