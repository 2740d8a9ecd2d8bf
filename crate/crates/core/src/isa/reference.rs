//! Cycle-agnostic reference interpreter. One call to [`ArchState::step`]
//! applies exactly one instruction; the timing model's retirement stream is
//! checked against it in lock step.

use serde::Serialize;
use thiserror::Error;

use super::exec::{self, Counters, MemOp};
use super::{decode, DecodeError, DecodedInst, IsaConfig, Memory, Mnemonic, OpClass, RawFetchWord, Reg};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Error, Serialize)]
pub enum Trap {
    #[error("illegal instruction {raw:#010x} at {pc:#010x}")]
    IllegalInstruction { pc: u32, raw: u32 },
    #[error("misaligned fetch at {pc:#010x}")]
    MisalignedFetch { pc: u32 },
    #[error("fetch from unmapped address {pc:#010x}")]
    FetchFault { pc: u32 },
}

impl Trap {
    pub fn pc(&self) -> u32 {
        match *self {
            Trap::IllegalInstruction { pc, .. } | Trap::MisalignedFetch { pc } | Trap::FetchFault { pc } => pc,
        }
    }
}

/// Why a program stopped cleanly.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum ExitReason {
    Ebreak,
    Ecall,
    /// Value stored to the `tohost` address.
    Tohost(u32),
}

/// Architectural effects of one retired instruction.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct RetireRecord {
    pub pc: u32,
    pub raw: u32,
    pub mnemonic: Mnemonic,
    pub rd: Option<Reg>,
    pub wb_value: Option<u32>,
    pub mem_addr: Option<u32>,
    pub mem_data: Option<u32>,
    pub is_branch_taken: Option<bool>,
}

impl RetireRecord {
    pub(crate) fn for_inst(inst: &DecodedInst) -> Self {
        RetireRecord {
            pc: inst.pc,
            raw: inst.raw,
            mnemonic: inst.mnemonic,
            rd: None,
            wb_value: None,
            mem_addr: None,
            mem_data: None,
            is_branch_taken: None,
        }
    }
}

/// Result of a single reference step.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Step {
    pub record: RetireRecord,
    pub exit: Option<ExitReason>,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ArchState {
    pub pc: u32,
    pub x: [u32; 32],
    pub f: [u32; 32],
    pub mem: Memory,
    pub reservation: Option<u32>,
    pub retired: u64,
    pub tohost: Option<u32>,
    pub isa: IsaConfig,
}

impl ArchState {
    pub fn new(pc: u32, mem: Memory, isa: IsaConfig) -> Self {
        ArchState { pc, x: [0; 32], f: [0; 32], mem, reservation: None, retired: 0, tohost: None, isa }
    }

    pub fn reg(&self, r: Reg) -> u32 {
        match r {
            Reg::X(0) => 0,
            Reg::X(i) => self.x[i as usize],
            Reg::F(i) => self.f[i as usize],
        }
    }

    pub fn set_reg(&mut self, r: Reg, v: u32) {
        match r {
            Reg::X(0) => {}
            Reg::X(i) => self.x[i as usize] = v,
            Reg::F(i) => self.f[i as usize] = v,
        }
    }

    /// Fetches and decodes the instruction at `pc`.
    pub fn fetch_decode(&self) -> Result<DecodedInst, Trap> {
        let pc = self.pc;
        if pc & 1 != 0 {
            return Err(Trap::MisalignedFetch { pc });
        }
        if !self.mem.is_mapped(pc) {
            return Err(Trap::FetchFault { pc });
        }
        let mut bytes = [0u8; 8];
        self.mem.read_bytes(pc, &mut bytes);
        let inst = decode(&RawFetchWord::new(bytes, pc), 0).map_err(|e| match e {
            DecodeError::IllegalInstruction { raw } => Trap::IllegalInstruction { pc, raw },
            DecodeError::TruncatedFetch => unreachable!("offset 0 never truncates"),
        })?;
        if inst.needs_fpu() && !self.isa.fpu {
            return Err(Trap::IllegalInstruction { pc, raw: inst.raw });
        }
        Ok(inst)
    }

    /// Applies one instruction in place.
    pub fn step(&mut self) -> Result<Step, Trap> {
        let inst = self.fetch_decode()?;
        let ops = inst.sources().map(|s| s.map_or(0, |r| self.reg(r)));
        let counters = Counters { cycle: self.retired, instret: self.retired };
        let out = exec::execute(&inst, ops, counters);
        let mut rec = RetireRecord::for_inst(&inst);
        rec.is_branch_taken = out.taken;
        let mut value = out.value;
        let mut exit = None;

        if let Some(op) = out.mem {
            rec.mem_addr = Some(op.addr());
            match op {
                MemOp::Load { addr, size } => {
                    value = Some(exec::load_value(inst.mnemonic, self.mem.read(addr, size)));
                }
                MemOp::Store { addr, size, data } => {
                    self.store(addr, size, data);
                    rec.mem_data = Some(data);
                    if self.tohost == Some(addr) {
                        exit = Some(ExitReason::Tohost(data));
                    }
                }
                MemOp::Lr { addr } => {
                    value = Some(self.mem.read(addr, 4));
                    self.reservation = Some(addr);
                }
                MemOp::Sc { addr, data } => {
                    let ok = self.reservation == Some(addr);
                    self.reservation = None;
                    if ok {
                        self.store(addr, 4, data);
                        rec.mem_data = Some(data);
                    }
                    value = Some(!ok as u32);
                }
                MemOp::Amo { addr, src } => {
                    let old = self.mem.read(addr, 4);
                    let new = exec::amo_value(inst.mnemonic, old, src);
                    self.store(addr, 4, new);
                    rec.mem_data = Some(new);
                    value = Some(old);
                }
            }
        }
        match inst.mnemonic {
            Mnemonic::Ebreak => exit = Some(ExitReason::Ebreak),
            Mnemonic::Ecall => exit = Some(ExitReason::Ecall),
            _ => {}
        }
        if let Some(rd) = inst.dest() {
            let v = value.expect("instructions with a destination produce a value");
            self.set_reg(rd, v);
            rec.rd = Some(rd);
            rec.wb_value = Some(v);
        }
        debug_assert!(inst.opclass() != OpClass::Store || rec.rd.is_none());
        self.pc = out.next_pc;
        self.retired += 1;
        Ok(Step { record: rec, exit })
    }

    fn store(&mut self, addr: u32, size: u32, data: u32) {
        if let Some(r) = self.reservation {
            if addr < r.wrapping_add(4) && r < addr.wrapping_add(size) {
                self.reservation = None;
            }
        }
        self.mem.write(addr, size, data);
    }
}

/// Pure single-step: returns the successor state and what retired.
pub fn step_reference(state: &ArchState) -> Result<(ArchState, Step), Trap> {
    let mut next = state.clone();
    let step = next.step()?;
    Ok((next, step))
}

#[derive(Clone, Debug)]
pub struct RefRun {
    pub state: ArchState,
    pub records: Vec<RetireRecord>,
    pub exit: Option<ExitReason>,
}

#[derive(Debug, Error)]
pub enum RefError {
    #[error("reference trapped: {trap}")]
    Trap { trap: Trap, run: Box<RefRun> },
    #[error("step limit exceeded")]
    StepLimitExceeded { run: Box<RefRun> },
}

/// Runs until an exit condition or `max_steps` retirements.
pub fn run_reference(state: ArchState, max_steps: u64) -> Result<RefRun, RefError> {
    assert!(max_steps > 0, "max_steps must be positive");
    let mut run = RefRun { state, records: Vec::new(), exit: None };
    for _ in 0..max_steps {
        match run.state.step() {
            Ok(step) => {
                run.records.push(step.record);
                if let Some(exit) = step.exit {
                    run.exit = Some(exit);
                    return Ok(run);
                }
            }
            Err(trap) => return Err(RefError::Trap { trap, run: Box::new(run) }),
        }
    }
    Err(RefError::StepLimitExceeded { run: Box::new(run) })
}
