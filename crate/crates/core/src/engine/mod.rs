//! The cycle loop: ties fetch, issue, execution, write-back, retirement and
//! the memory system together, with optional lock-step co-simulation.

pub mod config;
pub mod cosim;
pub mod stats;
pub mod trace;

pub use config::{Preset, SimConfig, SimConfigError, ROI_MARKER_ADDR};
pub use cosim::{Cosim, Divergence};
pub use stats::{RoiStats, StallCycles, Stats};
pub use trace::{TraceEntry, TRACE_HEADER};

use serde::Serialize;
use thiserror::Error;

use crate::frontend::{BranchPredictor, FetchedInst, Frontend};
use crate::isa::{ExitReason, Memory, Mnemonic, Trap};
use crate::issue::{ArchRegs, Backend, Retired, StallCause};
use crate::memsys::MemSys;
use crate::program::{ImageError, ProgramImage};
use stats::ratio;

/// Cycles between fetching an instruction and its earliest issue (decode in
/// between).
pub const FETCH_TO_ISSUE: u64 = 2;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum RunExit {
    Ebreak,
    Ecall,
    Tohost(u32),
    Trap(Trap),
}

impl RunExit {
    pub fn is_clean(&self) -> bool {
        !matches!(self, RunExit::Trap(_))
    }
}

impl From<ExitReason> for RunExit {
    fn from(e: ExitReason) -> Self {
        match e {
            ExitReason::Ebreak => RunExit::Ebreak,
            ExitReason::Ecall => RunExit::Ecall,
            ExitReason::Tohost(v) => RunExit::Tohost(v),
        }
    }
}

#[derive(Debug, Error)]
pub enum SimError {
    #[error("cycle limit of {0} exceeded")]
    StepLimitExceeded(u64),
    #[error("deadlock: nothing retired for {window} cycles (at cycle {cycle})")]
    Deadlock { cycle: u64, window: u64 },
    #[error(transparent)]
    Divergence(#[from] Divergence),
    #[error(transparent)]
    Config(#[from] SimConfigError),
    #[error(transparent)]
    Image(#[from] ImageError),
}

/// Everything a finished run produces.
#[derive(Clone, Debug)]
pub struct RunResult {
    pub stats: Stats,
    pub exit: RunExit,
    pub memory: Memory,
    pub arch: ArchRegs,
    pub trace: Vec<TraceEntry>,
}

#[derive(Clone, Copy, Debug, Default)]
struct Snapshot {
    cycle: u64,
    retired: u64,
    bytes_read: u64,
    bytes_written: u64,
}

pub struct Simulator {
    cfg: SimConfig,
    now: u64,
    frontend: Frontend,
    bp: BranchPredictor,
    backend: Backend,
    mem: MemSys,
    stats: Stats,
    tohost: Option<u32>,
    roi_begin: Option<Snapshot>,
    roi_end: Option<Snapshot>,
    last_retire: u64,
    trace: Vec<TraceEntry>,
    cosim: Option<Cosim>,
    exit: Option<RunExit>,
}

impl Simulator {
    pub fn new(cfg: SimConfig, image: &ProgramImage) -> Result<Self, SimError> {
        cfg.validate()?;
        image.validate()?;
        let mut uncached = vec![ROI_MARKER_ADDR];
        uncached.extend(image.tohost_addr);
        Ok(Simulator {
            cfg,
            now: 0,
            frontend: Frontend::new(image.entry_pc, cfg.fetch_queue, cfg.isa()),
            bp: BranchPredictor::new(&cfg.bp),
            backend: Backend::new(cfg.issue, uncached),
            mem: MemSys::new(&cfg.mem, image.memory()),
            stats: Stats::default(),
            tohost: image.tohost_addr,
            roi_begin: None,
            roi_end: None,
            last_retire: 0,
            trace: Vec::new(),
            cosim: cfg.cosim.then(|| Cosim::new(image.arch_state(cfg.isa()))),
            exit: None,
        })
    }

    pub fn config(&self) -> &SimConfig {
        &self.cfg
    }

    pub fn cycle(&self) -> u64 {
        self.now
    }

    pub fn backend(&self) -> &Backend {
        &self.backend
    }

    pub fn memsys(&self) -> &MemSys {
        &self.mem
    }

    /// Mutable memory-system access, for instrumentation such as request
    /// logging.
    pub fn memsys_mut(&mut self) -> &mut MemSys {
        &mut self.mem
    }

    pub fn predictor(&self) -> &BranchPredictor {
        &self.bp
    }

    pub fn trace(&self) -> &[TraceEntry] {
        &self.trace
    }

    /// Drops the architectural register write of the `k`-th retirement
    /// (1-based). Test hook for the co-simulation checker.
    pub fn inject_dropped_writeback(&mut self, k: u64) {
        self.backend.fault_drop_wb = Some(k);
    }

    fn snapshot(&self) -> Snapshot {
        Snapshot {
            cycle: self.now,
            retired: self.backend.retired(),
            bytes_read: self.mem.dram.bytes_read,
            bytes_written: self.mem.dram.bytes_written,
        }
    }

    /// Advances one cycle. Returns the exit status once the program ends.
    pub fn tick(&mut self) -> Result<Option<RunExit>, SimError> {
        if let Some(e) = self.exit {
            return Ok(Some(e));
        }
        let now = self.now;
        self.mem.tick(now);

        let (retired, _) = self.backend.retire(now, &mut self.mem);
        if !retired.is_empty() {
            self.last_retire = now;
        }
        for r in &retired {
            self.commit(r)?;
            if self.exit.is_some() {
                break;
            }
        }
        self.backend.writeback(now);
        if let Some(pc) = self.backend.execute(now) {
            self.frontend.redirect(pc);
        }

        let window: Vec<FetchedInst> = self
            .frontend
            .queue()
            .iter()
            .take(self.cfg.issue.width)
            .take_while(|f| f.fetch_cycle + FETCH_TO_ISSUE <= now)
            .copied()
            .collect();
        let outcome = self.backend.try_issue(&window, now, &mut self.mem);
        for _ in 0..outcome.issued {
            self.frontend.pop();
        }
        match outcome.issued {
            n if n == self.cfg.issue.width => self.stats.full_issue_cycles += 1,
            0 => self.stats.stall_cycles.add(outcome.stall.unwrap_or(StallCause::Fetch)),
            _ => self.stats.partial_issue_cycles += 1,
        }

        self.frontend.tick(now, &mut self.mem, &self.bp);

        self.now += 1;
        if self.exit.is_some() {
            return Ok(self.exit);
        }
        if now - self.last_retire > self.cfg.deadlock_cycles {
            return Err(SimError::Deadlock { cycle: now, window: self.cfg.deadlock_cycles });
        }
        Ok(None)
    }

    fn commit(&mut self, r: &Retired) -> Result<(), SimError> {
        if let Some(c) = &mut self.cosim {
            c.check(r, self.now)?;
        }
        if let Some(trap) = r.trap {
            self.exit = Some(RunExit::Trap(trap));
            return Ok(());
        }
        let inst = r.inst.expect("non-trap retirement has an instruction");
        let record = r.record.expect("non-trap retirement has a record");
        if inst.opclass().is_control() {
            self.stats.branches += 1;
            self.stats.mispredicts += r.events.mispredict as u64;
            self.bp.update(&inst, r.taken.unwrap_or(false), r.next_pc);
        }
        self.stats.wb_stall_events += r.events.wb_stall as u64;
        if self.cfg.trace {
            self.trace.push(TraceEntry {
                cycle: self.now,
                pc: record.pc,
                raw: record.raw,
                mnemonic: record.mnemonic,
                rd: record.rd,
                wb_value: record.wb_value,
                events: r.events,
                tag: r.tag,
                fetch_cycle: r.fetch_cycle,
                issue_cycle: r.issue_cycle,
            });
        }
        if r.uncached_store {
            let (addr, data) = (record.mem_addr.unwrap(), record.mem_data.unwrap());
            if Some(addr) == self.tohost {
                self.exit = Some(RunExit::Tohost(data));
            } else if addr == ROI_MARKER_ADDR {
                match data {
                    1 if self.roi_begin.is_none() => self.roi_begin = Some(self.snapshot()),
                    2 if self.roi_begin.is_some() && self.roi_end.is_none() => self.roi_end = Some(self.snapshot()),
                    _ => {}
                }
            }
        }
        match inst.mnemonic {
            Mnemonic::Ebreak => self.exit = Some(RunExit::Ebreak),
            Mnemonic::Ecall => self.exit = Some(RunExit::Ecall),
            _ => {}
        }
        Ok(())
    }

    fn final_stats(&self) -> Stats {
        let mut s = self.stats;
        s.cycles = self.now;
        s.retired = self.backend.retired();
        s.ipc = ratio(s.retired, s.cycles);
        s.icache_hits = self.mem.icache.stats.hits;
        s.icache_misses = self.mem.icache.stats.misses;
        let d = self.mem.dcache.stats;
        s.dcache_hits = d.hits;
        s.dcache_misses = d.misses;
        s.mshr_merges = d.mshr_merges;
        s.mshr_full = d.mshr_full;
        s.prefetches = d.prefetches;
        s.mem_bytes_read = self.mem.dram.bytes_read;
        s.mem_bytes_written = self.mem.dram.bytes_written;
        let end = self.roi_end.unwrap_or_else(|| self.snapshot());
        let begin = match (self.roi_begin, self.roi_end) {
            (Some(b), Some(_)) => b,
            _ => Snapshot::default(),
        };
        let cycles = end.cycle - begin.cycle;
        let bytes = end.bytes_read - begin.bytes_read + end.bytes_written - begin.bytes_written;
        s.roi = RoiStats {
            marked: self.roi_end.is_some(),
            cycles,
            retired: end.retired - begin.retired,
            mem_bytes_read: end.bytes_read - begin.bytes_read,
            mem_bytes_written: end.bytes_written - begin.bytes_written,
            ipc: ratio(end.retired - begin.retired, cycles),
            bandwidth_bytes_per_cycle: ratio(bytes, cycles),
        };
        s.bandwidth_bytes_per_cycle = s.roi.bandwidth_bytes_per_cycle;
        s
    }

    /// Current statistics (derived fields computed as of this cycle).
    pub fn stats(&self) -> Stats {
        self.final_stats()
    }

    /// Ticks until the program exits, then drains the data cache and, with
    /// co-simulation on, compares final registers and memory.
    pub fn run(mut self) -> Result<RunResult, SimError> {
        let exit = loop {
            if let Some(e) = self.tick()? {
                break e;
            }
            if self.now >= self.cfg.max_cycles {
                return Err(SimError::StepLimitExceeded(self.cfg.max_cycles));
            }
        };
        let stats = self.final_stats();
        let memory = self.mem.drain_and_snapshot();
        if let Some(c) = &self.cosim {
            c.finish(&self.backend.arch, &memory, self.now)?;
        }
        Ok(RunResult { stats, exit, memory, arch: self.backend.arch.clone(), trace: std::mem::take(&mut self.trace) })
    }
}
