use super::config::CacheConfig;
use super::dram::{MainMemory, MemResponse};
use super::tags::TagArray;

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, serde::Serialize)]
pub struct ICacheStats {
    pub hits: u64,
    pub misses: u64,
}

#[derive(Clone, Copy, Debug)]
struct PendingFill {
    line: u32,
    mem_id: u64,
}

/// Blocking instruction cache (tags only; instruction bytes are read through
/// the data view). One-cycle hit.
#[derive(Clone, Debug)]
pub struct ICache {
    tags: TagArray,
    pending: Option<PendingFill>,
    pub stats: ICacheStats,
}

impl ICache {
    pub fn new(cfg: &CacheConfig) -> Self {
        ICache { tags: TagArray::new(cfg, false), pending: None, stats: ICacheStats::default() }
    }

    pub fn line_addr(&self, addr: u32) -> u32 {
        self.tags.line_addr(addr)
    }

    /// True when the line holding `addr` is resident. On a miss with no fill
    /// outstanding, requests the line.
    pub fn probe(&mut self, addr: u32, now: u64, dram: &mut MainMemory) -> bool {
        let line = self.tags.line_addr(addr);
        if self.tags.touch(line) {
            self.stats.hits += 1;
            return true;
        }
        if self.pending.is_none() {
            self.stats.misses += 1;
            let r = dram.submit(line, self.tags.line_bytes(), false, now + 1);
            self.pending = Some(PendingFill { line, mem_id: r.id });
        }
        false
    }

    pub fn fill_pending(&self) -> bool {
        self.pending.is_some()
    }

    pub fn on_responses(&mut self, responses: &[MemResponse]) {
        if let Some(p) = self.pending {
            if responses.iter().any(|r| r.id == p.mem_id) {
                self.tags.install(p.line, None, false, true);
                self.pending = None;
            }
        }
    }

    pub fn contains(&self, addr: u32) -> bool {
        self.tags.contains(addr)
    }
}
