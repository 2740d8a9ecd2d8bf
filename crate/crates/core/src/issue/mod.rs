//! Dual-issue window: scoreboard, renaming, forwarding, functional units and
//! write-back ports.

pub mod backend;
pub mod rename;
pub mod scoreboard;

pub use backend::{Backend, IssueOutcome, RetireStop, Retired, StallCause};
pub use rename::RenameTable;
pub use scoreboard::{EntryState, Events, Fu, Scoreboard, ScoreboardEntry};

use serde::{Deserialize, Serialize};

use crate::isa::{DecodedInst, Mnemonic, OpClass, Reg};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Latencies {
    pub alu: u64,
    pub mul: u64,
    pub div: u64,
    pub fpu_add: u64,
    pub fpu_div: u64,
}

impl Default for Latencies {
    fn default() -> Self {
        Latencies { alu: 1, mul: 2, div: 21, fpu_add: 3, fpu_div: 11 }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct IssueConfig {
    pub width: usize,
    pub renaming: bool,
    pub alu_forwarding: bool,
    pub fpu: bool,
    pub output_register: bool,
    pub scoreboard: usize,
    pub max_unresolved_branches: usize,
    pub lat: Latencies,
}

impl Default for IssueConfig {
    fn default() -> Self {
        IssueConfig {
            width: 2,
            renaming: true,
            alu_forwarding: true,
            fpu: true,
            output_register: true,
            scoreboard: 8,
            max_unresolved_branches: 2,
            lat: Latencies::default(),
        }
    }
}

/// Functional unit an instruction executes on, given its issue slot.
pub fn fu_for(inst: &DecodedInst, slot: usize) -> Fu {
    match inst.opclass() {
        OpClass::Alu | OpClass::Branch if slot == 1 => Fu::Alu1,
        OpClass::Branch | OpClass::Jump => Fu::BranchUnit,
        OpClass::Load | OpClass::Store | OpClass::FLoad | OpClass::FStore | OpClass::Amo => Fu::Lsu,
        OpClass::Mul => Fu::Mul,
        OpClass::Div => Fu::Div,
        OpClass::Fpu => Fu::Fpu,
        OpClass::Alu | OpClass::Csr | OpClass::System => Fu::Alu0,
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum WbPort {
    /// ALU0, MUL, DIV, LSU and the branch unit.
    A,
    /// Shared by ALU1 and the FPU.
    B,
}

pub fn wb_port(fu: Fu) -> WbPort {
    match fu {
        Fu::Alu1 | Fu::Fpu => WbPort::B,
        _ => WbPort::A,
    }
}

/// Execution latency of a non-memory instruction, and whether its unit is
/// busy (unpipelined) for that long.
pub fn latency(inst: &DecodedInst, lat: &Latencies) -> (u64, bool) {
    match inst.opclass() {
        OpClass::Mul => (lat.mul, false),
        OpClass::Div => (lat.div, true),
        OpClass::Fpu if inst.mnemonic == Mnemonic::FdivS => (lat.fpu_div, true),
        OpClass::Fpu => (lat.fpu_add, false),
        _ => (lat.alu, false),
    }
}

/// Where an operand comes from at issue.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Operand {
    Value(u32),
    WaitOn(u64),
}

/// Reads `src` through the rename table: the latest in-flight writer's result
/// once it is done, otherwise a wait on that writer; the architectural value
/// when no writer is in flight.
pub fn forward_operand(src: Reg, sb: &Scoreboard, rt: &RenameTable, arch: &ArchRegs) -> Operand {
    if src.is_zero() {
        return Operand::Value(0);
    }
    match rt.get(src) {
        None => Operand::Value(arch.get(src)),
        Some(tag) => match sb.get(tag) {
            Some(e) if e.state >= EntryState::Done => Operand::Value(e.result.expect("done writer has a result")),
            _ => Operand::WaitOn(tag),
        },
    }
}

/// Grants each write-back port to its oldest candidate. Candidates are
/// `(tag, fu)`; returns the winning tags.
pub fn arbitrate_wb(candidates: &[(u64, Fu)]) -> Vec<u64> {
    let mut best: [Option<u64>; 2] = [None, None];
    for &(tag, fu) in candidates {
        let slot = &mut best[wb_port(fu) as usize];
        if slot.is_none_or(|t| tag < t) {
            *slot = Some(tag);
        }
    }
    let mut winners: Vec<u64> = best.into_iter().flatten().collect();
    winners.sort_unstable();
    winners
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Resolution {
    Correct,
    Mispredict { redirect: u32 },
}

/// Compares the fetch-time prediction of a control transfer with its
/// computed next pc.
pub fn resolve_branch(predicted_taken: bool, predicted_target: u32, fall_through: u32, actual_next: u32) -> Resolution {
    let predicted_next = if predicted_taken { predicted_target } else { fall_through };
    if predicted_next == actual_next {
        Resolution::Correct
    } else {
        Resolution::Mispredict { redirect: actual_next }
    }
}

/// Architectural register files.
#[derive(Clone, Debug, PartialEq, Eq, Default)]
pub struct ArchRegs {
    pub x: [u32; 32],
    pub f: [u32; 32],
}

impl ArchRegs {
    pub fn get(&self, r: Reg) -> u32 {
        match r {
            Reg::X(i) => self.x[i as usize],
            Reg::F(i) => self.f[i as usize],
        }
    }

    pub fn set(&mut self, r: Reg, v: u32) {
        match r {
            Reg::X(0) => {}
            Reg::X(i) => self.x[i as usize] = v,
            Reg::F(i) => self.f[i as usize] = v,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn shared_port_goes_to_oldest() {
        assert_eq!(arbitrate_wb(&[(7, Fu::Alu1), (4, Fu::Fpu)]), vec![4]);
        assert_eq!(arbitrate_wb(&[(3, Fu::Alu1)]), vec![3]);
        assert!(arbitrate_wb(&[]).is_empty());
        assert_eq!(arbitrate_wb(&[(5, Fu::Lsu), (6, Fu::Alu1), (2, Fu::Div)]), vec![2, 6]);
    }

    #[test]
    fn wrong_target_is_a_mispredict() {
        assert_eq!(resolve_branch(true, 0x200, 0x104, 0x200), Resolution::Correct);
        assert_eq!(resolve_branch(false, 0, 0x104, 0x200), Resolution::Mispredict { redirect: 0x200 });
        assert_eq!(resolve_branch(true, 0x300, 0x104, 0x200), Resolution::Mispredict { redirect: 0x200 });
    }

    #[test]
    fn x0_forwards_zero_and_unmapped_reads_arch() {
        let sb = Scoreboard::new(8);
        let rt = RenameTable::new();
        let mut arch = ArchRegs::default();
        arch.x[3] = 42;
        assert_eq!(forward_operand(Reg::X(0), &sb, &rt, &arch), Operand::Value(0));
        assert_eq!(forward_operand(Reg::X(3), &sb, &rt, &arch), Operand::Value(42));
    }
}
