use super::{
    arbitrate_wb, forward_operand, fu_for, latency, resolve_branch, ArchRegs, EntryState, Events, Fu, IssueConfig,
    Operand, RenameTable, Resolution, Scoreboard, ScoreboardEntry,
};
use crate::frontend::FetchedInst;
use crate::isa::exec::{self, Counters, MemOp};
use crate::isa::{DecodedInst, Mnemonic, OpClass, RetireRecord, Trap};
use crate::memsys::{MemSys, Request, Response};

/// Reason the oldest unissued instruction could not issue.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, serde::Serialize)]
#[serde(rename_all = "snake_case")]
pub enum StallCause {
    Fetch,
    Raw,
    Waw,
    Structural,
    WbContention,
    Dcache,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct IssueOutcome {
    pub issued: usize,
    /// Why the first non-issuing slot stalled (`None` when every slot issued
    /// or the window ran out).
    pub stall: Option<StallCause>,
}

/// One instruction (or fault) leaving the pipeline.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Retired {
    pub tag: u64,
    pub record: Option<RetireRecord>,
    pub trap: Option<Trap>,
    pub inst: Option<DecodedInst>,
    pub next_pc: u32,
    pub taken: Option<bool>,
    pub events: Events,
    pub fetch_cycle: u64,
    pub issue_cycle: u64,
    pub reads_counters: bool,
    pub uncached_store: bool,
}

/// Why retirement stopped before using its full width.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum RetireStop {
    NotReady,
    StoreRejected,
    Boundary,
}

/// Issue window, execution, write-back and in-order commit.
#[derive(Clone, Debug)]
pub struct Backend {
    pub cfg: IssueConfig,
    pub sb: Scoreboard,
    pub rt: RenameTable,
    pub arch: ArchRegs,
    pub reservation: Option<u32>,
    div_busy_until: u64,
    fdiv_busy_until: u64,
    uncached: Vec<u32>,
    retired: u64,
    /// Test hook: the k-th retirement (1-based) skips its register write.
    pub fault_drop_wb: Option<u64>,
}

impl Backend {
    pub fn new(cfg: IssueConfig, uncached: Vec<u32>) -> Self {
        assert!(cfg.width == 1 || cfg.width == 2, "issue width must be 1 or 2");
        Backend {
            cfg,
            sb: Scoreboard::new(cfg.scoreboard),
            rt: RenameTable::new(),
            arch: ArchRegs::default(),
            reservation: None,
            div_busy_until: 0,
            fdiv_busy_until: 0,
            uncached,
            retired: 0,
            fault_drop_wb: None,
        }
    }

    pub fn retired(&self) -> u64 {
        self.retired
    }

    fn unresolved_branches(&self) -> usize {
        self.sb.iter().filter(|e| e.is_control() && e.state == EntryState::Executing).count()
    }

    fn full_cause(&self) -> StallCause {
        match self.sb.head() {
            Some(h) if h.state == EntryState::Done && h.events.wb_stall => StallCause::WbContention,
            _ => StallCause::Structural,
        }
    }

    /// Issues up to `cfg.width` instructions from the front of `window`.
    pub fn try_issue(&mut self, window: &[FetchedInst], now: u64, mem: &mut MemSys) -> IssueOutcome {
        let mut issued = 0;
        let mut slot0: Option<u64> = None;
        for (slot, f) in window.iter().take(self.cfg.width).enumerate() {
            match self.prepare(f, slot, slot0, now, mem) {
                Ok(entry) => {
                    let tag = self.commit(entry, now);
                    slot0.get_or_insert(tag);
                    issued += 1;
                }
                Err(cause) => return IssueOutcome { issued, stall: Some(cause) },
            }
        }
        IssueOutcome { issued, stall: None }
    }

    fn commit(&mut self, entry: ScoreboardEntry, now: u64) -> u64 {
        let inst = entry.inst;
        let tag = self.sb.push(entry);
        if let Some(inst) = inst {
            if let Some(d) = inst.dest() {
                self.rt.set(d, tag);
            }
            let (lat, unpipelined) = latency(&inst, &self.cfg.lat);
            if unpipelined {
                match inst.opclass() {
                    OpClass::Div => self.div_busy_until = now + lat,
                    _ => self.fdiv_busy_until = now + lat,
                }
            }
        }
        tag
    }

    fn prepare(
        &self,
        f: &FetchedInst,
        slot: usize,
        slot0: Option<u64>,
        now: u64,
        mem: &mut MemSys,
    ) -> Result<ScoreboardEntry, StallCause> {
        if self.sb.is_full() {
            return Err(self.full_cause());
        }
        if self.sb.iter().any(ScoreboardEntry::is_serializing) {
            return Err(StallCause::Structural);
        }
        let mut entry = ScoreboardEntry {
            tag: 0,
            pc: f.pc,
            inst: None,
            trap: None,
            prediction: f.prediction,
            fu: Fu::Alu0,
            state: EntryState::Executing,
            result: None,
            fetch_cycle: f.fetch_cycle,
            issue_cycle: now,
            complete_cycle: now + self.cfg.lat.alu,
            done_cycle: None,
            wb_cycle: None,
            next_pc: f.pc,
            taken: None,
            mem: None,
            amo_store: None,
            reads_counters: false,
            events: Events::default(),
        };
        let inst = match f.inst {
            Err(trap) if slot == 0 => {
                entry.trap = Some(trap);
                return Ok(entry);
            }
            Err(_) => return Err(StallCause::Structural),
            Ok(i) => i,
        };
        let class = inst.opclass();
        if slot == 1 && !matches!(class, OpClass::Alu | OpClass::Branch) {
            return Err(StallCause::Structural);
        }
        if class == OpClass::Amo && !self.sb.is_empty() {
            return Err(StallCause::Structural);
        }
        if class.is_control() && self.unresolved_branches() >= self.cfg.max_unresolved_branches {
            return Err(StallCause::Structural);
        }

        let mut ops = [0u32; 3];
        for (op, src) in ops.iter_mut().zip(inst.sources()) {
            let Some(src) = src else { continue };
            *op = match forward_operand(src, &self.sb, &self.rt, &self.arch) {
                Operand::Value(v) => v,
                Operand::WaitOn(tag) if slot == 1 && Some(tag) == slot0 && self.cfg.alu_forwarding => {
                    let producer = self.sb.get(tag).unwrap();
                    match (producer.opclass(), producer.result) {
                        (Some(OpClass::Alu), Some(v)) => v,
                        _ => return Err(StallCause::Raw),
                    }
                }
                Operand::WaitOn(_) => return Err(StallCause::Raw),
            };
        }
        if let Some(d) = inst.dest() {
            if !self.cfg.renaming && self.rt.get(d).is_some() {
                return Err(StallCause::Waw);
            }
        }
        let (lat, _) = latency(&inst, &self.cfg.lat);
        match class {
            OpClass::Div if now < self.div_busy_until => return Err(StallCause::Structural),
            OpClass::Fpu if now < self.fdiv_busy_until => return Err(StallCause::Structural),
            _ => {}
        }

        let counters = Counters { cycle: now, instret: self.retired };
        let out = exec::execute(&inst, ops, counters);
        entry.inst = Some(inst);
        entry.fu = fu_for(&inst, slot);
        entry.result = out.value;
        entry.next_pc = out.next_pc;
        entry.taken = out.taken;
        entry.mem = out.mem;
        entry.reads_counters = class == OpClass::Csr;
        entry.complete_cycle = now + lat;

        match out.mem {
            Some(MemOp::Load { addr, size }) => {
                if self.sb.iter().any(ScoreboardEntry::writes_memory) {
                    return Err(StallCause::Dcache);
                }
                let resp = mem.access(Request::read(addr, size), now).map_err(|_| StallCause::Dcache)?;
                entry.result = Some(exec::load_value(inst.mnemonic, resp.data));
                self.mark_access(&mut entry, &resp);
            }
            Some(op @ (MemOp::Lr { addr } | MemOp::Sc { addr, .. } | MemOp::Amo { addr, .. })) => {
                let resp = mem.access(Request::read(addr, 4), now).map_err(|_| StallCause::Dcache)?;
                let old = resp.data;
                match op {
                    MemOp::Lr { .. } => entry.result = Some(old),
                    MemOp::Sc { data, .. } => {
                        let ok = self.reservation == Some(addr);
                        entry.result = Some(!ok as u32);
                        entry.amo_store = ok.then_some(data);
                    }
                    MemOp::Amo { src, .. } => {
                        entry.result = Some(old);
                        entry.amo_store = Some(exec::amo_value(inst.mnemonic, old, src));
                    }
                    _ => unreachable!(),
                }
                self.mark_access(&mut entry, &resp);
            }
            _ => {}
        }
        if inst.dest().is_none() {
            entry.result = None;
        }
        Ok(entry)
    }

    fn mark_access(&self, entry: &mut ScoreboardEntry, resp: &Response) {
        entry.complete_cycle = resp.ready_cycle + self.cfg.output_register as u64;
        entry.events.dhit = resp.hit;
        entry.events.dmiss = !resp.hit;
        entry.events.mshr_merge = resp.merged;
    }

    /// Execute stage: finishes entries whose latency has elapsed and resolves
    /// control transfers oldest first. On a mispredict, squashes everything
    /// younger and returns the redirect pc.
    pub fn execute(&mut self, now: u64) -> Option<u32> {
        let mut redirect = None;
        for e in self.sb.iter_mut() {
            if e.state != EntryState::Executing || e.complete_cycle > now {
                continue;
            }
            e.state = EntryState::Done;
            e.done_cycle = Some(now);
            if redirect.is_none() && e.is_control() {
                let fall = e.inst.unwrap().next_pc();
                if let Resolution::Mispredict { redirect: pc } =
                    resolve_branch(e.prediction.taken, e.prediction.target, fall, e.next_pc)
                {
                    e.events.mispredict = true;
                    redirect = Some((e.tag, pc));
                }
            }
        }
        let (tag, pc) = redirect?;
        self.sb.squash_after(tag);
        self.rt.clear();
        for e in self.sb.iter() {
            if let Some(d) = e.dest() {
                self.rt.set(d, e.tag);
            }
        }
        Some(pc)
    }

    /// Write-back stage: entries done in an earlier cycle compete for their
    /// port; entries without a register result skip the ports.
    pub fn writeback(&mut self, now: u64) {
        let ready = |e: &ScoreboardEntry| e.state == EntryState::Done && e.done_cycle.is_some_and(|c| c < now);
        let candidates: Vec<(u64, Fu)> =
            self.sb.iter().filter(|e| ready(e) && e.dest().is_some()).map(|e| (e.tag, e.fu)).collect();
        let winners = arbitrate_wb(&candidates);
        for e in self.sb.iter_mut() {
            if !ready(e) {
                continue;
            }
            if e.dest().is_none() || winners.contains(&e.tag) {
                e.state = EntryState::WrittenBack;
                e.wb_cycle = Some(now);
            } else {
                e.events.wb_stall = true;
            }
        }
    }

    /// Commits up to `cfg.width` written-back entries in order. Stops after a
    /// fault, an environment call/breakpoint, or an uncached store so the
    /// caller can act on it before anything younger commits.
    pub fn retire(&mut self, now: u64, mem: &mut MemSys) -> (Vec<Retired>, Option<RetireStop>) {
        let mut out = Vec::new();
        for _ in 0..self.cfg.width {
            let Some(head) = self.sb.head() else { return (out, Some(RetireStop::NotReady)) };
            if head.state != EntryState::WrittenBack || head.wb_cycle.is_none_or(|c| c >= now) {
                return (out, Some(RetireStop::NotReady));
            }
            let mut uncached_store = false;
            let mut mem_data = None;
            match head.mem {
                Some(MemOp::Store { addr, size, data }) => {
                    if self.uncached.contains(&addr) {
                        mem.write_uncached(addr, size, data);
                        uncached_store = true;
                    } else if mem.access(Request::write(addr, size, data), now).is_err() {
                        return (out, Some(RetireStop::StoreRejected));
                    }
                    self.clear_reservation(addr, size);
                    mem_data = Some(data);
                }
                Some(MemOp::Lr { addr }) => self.reservation = Some(addr),
                Some(MemOp::Sc { addr, .. } | MemOp::Amo { addr, .. }) => {
                    if let Some(v) = head.amo_store {
                        if mem.access(Request::write(addr, 4, v), now).is_err() {
                            return (out, Some(RetireStop::StoreRejected));
                        }
                        mem_data = Some(v);
                    }
                    if matches!(head.mem, Some(MemOp::Sc { .. })) {
                        self.reservation = None;
                    } else {
                        self.clear_reservation(addr, 4);
                    }
                }
                _ => {}
            }
            let e = self.sb.pop_head().unwrap();
            let record = e.inst.map(|inst| {
                let rd = inst.dest();
                if let Some(r) = rd {
                    let value = e.result.unwrap();
                    if self.fault_drop_wb != Some(self.retired + 1) {
                        self.arch.set(r, value);
                    }
                    self.rt.release(r, e.tag);
                }
                RetireRecord {
                    pc: inst.pc,
                    raw: inst.raw,
                    mnemonic: inst.mnemonic,
                    rd,
                    wb_value: rd.and(e.result),
                    mem_addr: e.mem.map(|m| m.addr()),
                    mem_data,
                    is_branch_taken: e.taken,
                }
            });
            if e.trap.is_none() {
                self.retired += 1;
            }
            let boundary = e.trap.is_some()
                || uncached_store
                || e.inst.is_some_and(|i| matches!(i.mnemonic, Mnemonic::Ebreak | Mnemonic::Ecall));
            out.push(Retired {
                tag: e.tag,
                record,
                trap: e.trap,
                inst: e.inst,
                next_pc: e.next_pc,
                taken: e.taken,
                events: e.events,
                fetch_cycle: e.fetch_cycle,
                issue_cycle: e.issue_cycle,
                reads_counters: e.reads_counters,
                uncached_store,
            });
            if boundary {
                return (out, Some(RetireStop::Boundary));
            }
        }
        (out, None)
    }

    fn clear_reservation(&mut self, addr: u32, size: u32) {
        if let Some(r) = self.reservation {
            if addr < r.wrapping_add(4) && r < addr.wrapping_add(size) {
                self.reservation = None;
            }
        }
    }
}
