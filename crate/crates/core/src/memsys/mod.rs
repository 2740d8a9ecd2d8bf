//! Data and instruction caches over a bandwidth-limited main memory.

pub mod config;
pub mod dcache;
pub mod dram;
mod hpd;
pub mod icache;
mod legacy;
pub mod mshr;
pub mod prefetch;
pub mod tags;

pub use config::{CacheConfig, CacheKind, ConfigError, MemConfig, MemSysConfig, WritePolicy};
pub use dcache::{CacheStats, DataCache, Reject, Request, Response};
pub use dram::MainMemory;
pub use icache::{ICache, ICacheStats};

pub const HIT_LATENCY: u64 = hpd::HIT_LATENCY;
const _: () = assert!(hpd::HIT_LATENCY == legacy::HIT_LATENCY);

use crate::isa::Memory;

/// The whole memory side of the core: both caches, main memory, and the
/// backing store for lines not resident in the data cache.
#[derive(Clone, Debug)]
pub struct MemSys {
    backing: Memory,
    pub dcache: DataCache,
    pub icache: ICache,
    pub dram: MainMemory,
}

impl MemSys {
    pub fn new(cfg: &MemSysConfig, image: Memory) -> Self {
        MemSys {
            backing: image,
            dcache: DataCache::new(cfg.dcache),
            icache: ICache::new(&cfg.icache),
            dram: MainMemory::new(cfg.mem.latency, cfg.mem.bytes_per_cycle),
        }
    }

    /// Start of cycle: completes memory transfers and installs fills.
    pub fn tick(&mut self, now: u64) {
        let done = self.dram.tick(now);
        if !done.is_empty() {
            self.icache.on_responses(&done);
            self.dcache.on_responses(&done, now, &mut self.dram, &mut self.backing);
        }
    }

    pub fn is_mapped(&self, addr: u32) -> bool {
        self.backing.is_mapped(addr)
    }

    /// Current architectural value (cache contents over backing).
    pub fn read(&self, addr: u32, size: u32) -> u32 {
        self.dcache.view_read(addr, size, &self.backing)
    }

    pub fn read_bytes(&self, addr: u32, out: &mut [u8]) {
        for (i, b) in out.iter_mut().enumerate() {
            *b = self.dcache.view_u8(addr.wrapping_add(i as u32), &self.backing);
        }
    }

    /// Data-cache access from the load/store unit.
    pub fn access(&mut self, req: Request, now: u64) -> Result<Response, Reject> {
        self.dcache.access(req, now, &mut self.dram, &mut self.backing)
    }

    /// Store that bypasses the data cache (memory-mapped markers).
    pub fn write_uncached(&mut self, addr: u32, size: u32, value: u32) {
        self.dcache.write_uncached(addr, size, value, &mut self.backing);
    }

    pub fn icache_probe(&mut self, addr: u32, now: u64) -> bool {
        self.icache.probe(addr, now, &mut self.dram)
    }

    pub fn icache_line(&self, addr: u32) -> u32 {
        self.icache.line_addr(addr)
    }

    /// Writes back every dirty line and returns the resulting memory image.
    pub fn drain_and_snapshot(&mut self) -> Memory {
        self.dcache.drain(&mut self.backing);
        self.backing.clone()
    }

    pub fn backing(&self) -> &Memory {
        &self.backing
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn drain_reflects_dirty_line() {
        let mut m = MemSys::new(&MemSysConfig::default(), Memory::new());
        m.access(Request::write(0x2000, 4, 0xabcd_0123), 0).unwrap();
        let mut t = 1;
        while !m.dcache.mshr().is_empty() {
            m.tick(t);
            t += 1;
        }
        assert_eq!(m.backing().read(0x2000, 4), 0xabcd_0123);
        m.access(Request::write(0x2000, 4, 7), t).unwrap();
        assert_eq!(m.backing().read(0x2000, 4), 0xabcd_0123);
        assert_eq!(m.read(0x2000, 4), 7);
        assert_eq!(m.drain_and_snapshot().read(0x2000, 4), 7);
    }

    #[test]
    fn no_dirty_lines_snapshot_equals_backing() {
        let mut image = Memory::new();
        image.write(0x100, 4, 5);
        let mut m = MemSys::new(&MemSysConfig::default(), image.clone());
        m.access(Request::read(0x100, 4), 0).unwrap();
        assert!(m.drain_and_snapshot().same_contents(&image));
    }
}
