//! Non-blocking pipelined cache: misses allocate MSHR entries and the cache
//! keeps serving hits and further misses while fills are outstanding.

use super::dcache::{DataCache, Reject, Request, Response};
use super::dram::MainMemory;
use super::mshr::{MshrEntry, Waiter};
use crate::isa::Memory;

pub const HIT_LATENCY: u64 = 2;

impl DataCache {
    pub(super) fn access_hpd(
        &mut self,
        id: u64,
        req: Request,
        now: u64,
        dram: &mut MainMemory,
        backing: &mut Memory,
    ) -> Result<Response, Reject> {
        let line = self.tags.line_addr(req.addr);
        let start = now + HIT_LATENCY;
        let wb = self.write_back_policy();
        let mut resp = Response { id, data: 0, ready_cycle: start, hit: false, merged: false };
        let waiter =
            Waiter { id, offset: req.addr - line, is_write: req.is_write(), store_data: req.write.unwrap_or(0) };

        if self.tags.touch(line) {
            self.stats.hits += 1;
            resp.hit = true;
            let state = self.tags.state_mut(line).unwrap();
            if state.prefetched {
                state.prefetched = false;
                self.stats.prefetch_hits += 1;
                self.train_prefetcher(line, start, dram);
            }
            if let Some(data) = req.write {
                if !wb {
                    dram.submit(req.addr, req.size, true, start);
                }
                self.apply_store(req.addr, req.size, data, backing);
            }
        } else if req.is_write() && !wb {
            // Write-through never allocates: the store goes straight out.
            self.stats.misses += 1;
            dram.submit(req.addr, req.size, true, start);
            self.apply_store(req.addr, req.size, req.write.unwrap(), backing);
        } else if let Some(entry) = self.mshr.get_mut(line) {
            entry.waiters.push(waiter);
            if entry.prefetch {
                entry.prefetch = false;
                self.stats.prefetch_hits += 1;
            }
            self.stats.mshr_merges += 1;
            resp.merged = true;
            resp.ready_cycle = entry.fill_cycle.max(start);
            if let Some(data) = req.write {
                self.apply_store(req.addr, req.size, data, backing);
            }
        } else if self.mshr.is_full() {
            self.stats.mshr_full += 1;
            return Err(Reject::MshrFull);
        } else {
            self.stats.misses += 1;
            let fill = dram.submit(line, self.tags.line_bytes(), false, start);
            self.mshr.allocate(MshrEntry {
                line_addr: line,
                issued_to_memory: true,
                fill_cycle: fill.ready_cycle,
                mem_id: fill.id,
                prefetch: false,
                waiters: vec![waiter],
            });
            resp.ready_cycle = fill.ready_cycle;
            if let Some(data) = req.write {
                self.apply_store(req.addr, req.size, data, backing);
            }
            self.train_prefetcher(line, start, dram);
        }
        if !req.is_write() {
            resp.data = self.view_read(req.addr, req.size, backing);
        }
        Ok(resp)
    }

    fn train_prefetcher(&mut self, line: u32, start: u64, dram: &mut MainMemory) {
        let Some(pf) = &mut self.prefetcher else { return };
        let line_bytes = self.tags.line_bytes() as i64;
        for target in pf.train(line as i64 / line_bytes) {
            let addr = target * line_bytes;
            if !(0..=u32::MAX as i64).contains(&addr) {
                continue;
            }
            let addr = addr as u32;
            if self.tags.contains(addr) || self.mshr.get(addr).is_some() || self.mshr.is_full() {
                continue;
            }
            let fill = dram.submit(addr, line_bytes as u32, false, start);
            self.mshr.allocate(MshrEntry {
                line_addr: addr,
                issued_to_memory: true,
                fill_cycle: fill.ready_cycle,
                mem_id: fill.id,
                prefetch: true,
                waiters: Vec::new(),
            });
            self.stats.prefetches += 1;
        }
    }

    pub(super) fn fill_hpd(&mut self, mem_id: u64, now: u64, dram: &mut MainMemory, backing: &mut Memory) {
        let Some(entry) = self.mshr.complete(mem_id) else { return };
        let dirty = entry.has_write() && self.write_back_policy();
        self.install(entry.line_addr, dirty, !entry.prefetch, now, dram, backing);
    }
}
