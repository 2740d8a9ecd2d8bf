//! Blocking write-back cache: a miss stops the cache from accepting requests
//! until its fill, and the write-back of a dirty victim, have completed.

use super::dcache::{DataCache, Reject, Request, Response};
use super::dram::MainMemory;
use crate::isa::Memory;

pub const HIT_LATENCY: u64 = 2;

impl DataCache {
    pub(super) fn access_legacy(
        &mut self,
        id: u64,
        req: Request,
        now: u64,
        dram: &mut MainMemory,
        backing: &mut Memory,
    ) -> Result<Response, Reject> {
        if now < self.blocked_until {
            return Err(Reject::Blocked);
        }
        let line = self.tags.line_addr(req.addr);
        let start = now + HIT_LATENCY;
        let mut resp = Response { id, data: 0, ready_cycle: start, hit: true, merged: false };

        if self.tags.touch(line) {
            self.stats.hits += 1;
        } else {
            self.stats.misses += 1;
            resp.hit = false;
            if req.is_write() && !self.write_back_policy() {
                // Write-through does not allocate on a write miss.
                let data = req.write.unwrap();
                self.apply_store(req.addr, req.size, data, backing);
                dram.submit(req.addr, req.size, true, start);
                return Ok(resp);
            }
            let fill = dram.submit(line, self.tags.line_bytes(), false, start);
            let wb = self.install(line, false, true, start, dram, backing);
            resp.ready_cycle = fill.ready_cycle;
            self.blocked_until = wb.map_or(fill.ready_cycle, |w| w.ready_cycle.max(fill.ready_cycle));
        }

        match req.write {
            Some(data) => {
                self.apply_store(req.addr, req.size, data, backing);
                if !self.write_back_policy() {
                    dram.submit(req.addr, req.size, true, start);
                }
            }
            None => resp.data = self.view_read(req.addr, req.size, backing),
        }
        Ok(resp)
    }
}
