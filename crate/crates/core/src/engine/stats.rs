use serde::Serialize;

use crate::issue::StallCause;

/// Zero-issue cycles by the cause blocking the oldest instruction.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize)]
pub struct StallCycles {
    pub fetch: u64,
    pub raw: u64,
    pub waw: u64,
    pub structural: u64,
    pub wb_contention: u64,
    pub dcache: u64,
}

impl StallCycles {
    pub fn add(&mut self, cause: StallCause) {
        *match cause {
            StallCause::Fetch => &mut self.fetch,
            StallCause::Raw => &mut self.raw,
            StallCause::Waw => &mut self.waw,
            StallCause::Structural => &mut self.structural,
            StallCause::WbContention => &mut self.wb_contention,
            StallCause::Dcache => &mut self.dcache,
        } += 1;
    }

    pub fn total(&self) -> u64 {
        self.fetch + self.raw + self.waw + self.structural + self.wb_contention + self.dcache
    }
}

/// Measurements over the region of interest.
#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize)]
pub struct RoiStats {
    pub marked: bool,
    pub cycles: u64,
    pub retired: u64,
    pub mem_bytes_read: u64,
    pub mem_bytes_written: u64,
    pub ipc: f64,
    pub bandwidth_bytes_per_cycle: f64,
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize)]
pub struct Stats {
    pub cycles: u64,
    pub retired: u64,
    pub ipc: f64,
    pub branches: u64,
    pub mispredicts: u64,
    pub icache_hits: u64,
    pub icache_misses: u64,
    pub dcache_hits: u64,
    pub dcache_misses: u64,
    pub mshr_merges: u64,
    pub mshr_full: u64,
    pub prefetches: u64,
    pub mem_bytes_read: u64,
    pub mem_bytes_written: u64,
    pub bandwidth_bytes_per_cycle: f64,
    pub full_issue_cycles: u64,
    pub partial_issue_cycles: u64,
    pub stall_cycles: StallCycles,
    pub wb_stall_events: u64,
    pub roi: RoiStats,
}

pub(crate) fn ratio(n: u64, d: u64) -> f64 {
    if d == 0 {
        0.0
    } else {
        n as f64 / d as f64
    }
}
