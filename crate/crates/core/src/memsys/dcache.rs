use super::config::{CacheConfig, CacheKind, WritePolicy};
use super::dram::{MainMemory, MemResponse};
use super::mshr::MshrTable;
use super::prefetch::Prefetcher;
use super::tags::TagArray;
use crate::isa::Memory;

/// A data-side request from the load/store unit.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Request {
    pub addr: u32,
    pub size: u32,
    /// Store data; `None` for reads.
    pub write: Option<u32>,
}

impl Request {
    pub fn read(addr: u32, size: u32) -> Self {
        Request { addr, size, write: None }
    }

    pub fn write(addr: u32, size: u32, data: u32) -> Self {
        Request { addr, size, write: Some(data) }
    }

    pub fn is_write(&self) -> bool {
        self.write.is_some()
    }
}

/// Outcome of an accepted request.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Response {
    pub id: u64,
    /// Value read (reads only).
    pub data: u32,
    /// Cycle at which the data is available to the core.
    pub ready_cycle: u64,
    pub hit: bool,
    /// Secondary miss merged into an outstanding MSHR entry.
    pub merged: bool,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Reject {
    /// Legacy cache waiting on a miss.
    Blocked,
    /// The request port already accepted a request this cycle.
    PortBusy,
    /// No MSHR entry free for a primary miss.
    MshrFull,
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, serde::Serialize)]
pub struct CacheStats {
    pub hits: u64,
    pub misses: u64,
    pub mshr_merges: u64,
    pub mshr_full: u64,
    pub prefetches: u64,
    pub prefetch_hits: u64,
    pub writebacks: u64,
}

/// Data cache holding line contents. While a line is resident its data is
/// authoritative; otherwise `backing` is. Fills copy from `backing` at fill
/// time, evictions of dirty lines copy back.
#[derive(Clone, Debug)]
pub struct DataCache {
    pub(super) cfg: CacheConfig,
    pub(super) tags: TagArray,
    pub(super) mshr: MshrTable,
    pub(super) prefetcher: Option<Prefetcher>,
    pub(super) blocked_until: u64,
    port_cycle: Option<u64>,
    next_id: u64,
    pub stats: CacheStats,
}

impl DataCache {
    pub fn new(cfg: CacheConfig) -> Self {
        DataCache {
            cfg,
            tags: TagArray::new(&cfg, true),
            mshr: MshrTable::new(cfg.mshr_depth),
            prefetcher: (cfg.kind == CacheKind::Hpd && cfg.prefetch).then(|| Prefetcher::new(cfg.prefetch_degree)),
            blocked_until: 0,
            port_cycle: None,
            next_id: 0,
            stats: CacheStats::default(),
        }
    }

    pub fn config(&self) -> &CacheConfig {
        &self.cfg
    }

    pub fn tags(&self) -> &TagArray {
        &self.tags
    }

    pub fn mshr(&self) -> &MshrTable {
        &self.mshr
    }

    pub(super) fn write_back_policy(&self) -> bool {
        self.cfg.policy == WritePolicy::WriteBack
    }

    /// Submits a request at cycle `now`. Accepted writes take effect on the
    /// data view immediately.
    pub fn access(
        &mut self,
        req: Request,
        now: u64,
        dram: &mut MainMemory,
        backing: &mut Memory,
    ) -> Result<Response, Reject> {
        if self.port_cycle == Some(now) {
            return Err(Reject::PortBusy);
        }
        let id = self.next_id;
        let resp = match self.cfg.kind {
            CacheKind::Legacy => self.access_legacy(id, req, now, dram, backing),
            CacheKind::Hpd => self.access_hpd(id, req, now, dram, backing),
        }?;
        self.port_cycle = Some(now);
        self.next_id += 1;
        Ok(resp)
    }

    /// Delivers completed memory responses (fills).
    pub fn on_responses(&mut self, responses: &[MemResponse], now: u64, dram: &mut MainMemory, backing: &mut Memory) {
        if self.cfg.kind == CacheKind::Hpd {
            for r in responses {
                self.fill_hpd(r.id, now, dram, backing);
            }
        }
    }

    pub(super) fn line_from(&self, backing: &Memory, line: u32) -> Vec<u8> {
        let mut buf = vec![0; self.tags.line_bytes() as usize];
        backing.read_bytes(line, &mut buf);
        buf
    }

    /// Installs `line` from backing, writing back a dirty victim.
    pub(super) fn install(
        &mut self,
        line: u32,
        dirty: bool,
        promote: bool,
        start: u64,
        dram: &mut MainMemory,
        backing: &mut Memory,
    ) -> Option<MemResponse> {
        let fill = self.line_from(backing, line);
        let ev = self.tags.install(line, Some(&fill), dirty, promote)?;
        if !ev.dirty {
            return None;
        }
        backing.write_bytes(ev.line_addr, &ev.data);
        self.stats.writebacks += 1;
        Some(dram.submit(ev.line_addr, self.tags.line_bytes(), true, start))
    }

    pub fn view_u8(&self, addr: u32, backing: &Memory) -> u8 {
        match self.tags.line_data(addr) {
            Some(d) => d[(addr & (self.tags.line_bytes() - 1)) as usize],
            None => backing.read_u8(addr),
        }
    }

    pub fn view_read(&self, addr: u32, size: u32, backing: &Memory) -> u32 {
        (0..size).rev().fold(0, |v, i| v << 8 | self.view_u8(addr.wrapping_add(i), backing) as u32)
    }

    /// Writes through the data view. Resident bytes are updated in the line
    /// (marking it dirty when `dirty`), and also in backing when
    /// `through`; non-resident bytes go to backing.
    pub(super) fn view_write(
        &mut self,
        addr: u32,
        size: u32,
        value: u32,
        backing: &mut Memory,
        dirty: bool,
        through: bool,
    ) {
        let mask = self.tags.line_bytes() - 1;
        for i in 0..size {
            let a = addr.wrapping_add(i);
            let byte = (value >> (8 * i)) as u8;
            backing.map_page(a);
            match self.tags.line_data_mut(a) {
                Some(d) => {
                    d[(a & mask) as usize] = byte;
                    if dirty {
                        self.tags.state_mut(a).unwrap().dirty = true;
                    }
                    if through {
                        backing.write_u8(a, byte);
                    }
                }
                None => backing.write_u8(a, byte),
            }
        }
    }

    /// Store from the core after acceptance: dirty in the line under
    /// write-back, through to backing under write-through.
    pub(super) fn apply_store(&mut self, addr: u32, size: u32, value: u32, backing: &mut Memory) {
        let wb = self.write_back_policy();
        self.view_write(addr, size, value, backing, wb, !wb);
    }

    /// Write that bypasses the cache timing but keeps any resident copy
    /// coherent (uncached device stores).
    pub fn write_uncached(&mut self, addr: u32, size: u32, value: u32, backing: &mut Memory) {
        self.view_write(addr, size, value, backing, false, true);
    }

    /// Copies every dirty line to backing and cleans it.
    pub fn drain(&mut self, backing: &mut Memory) {
        for (addr, data) in self.tags.take_dirty() {
            backing.write_bytes(addr, &data);
        }
    }
}
