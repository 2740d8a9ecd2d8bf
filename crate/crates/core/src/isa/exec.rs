//! Pure instruction semantics shared by the reference interpreter and the
//! timing model's execute stage. Nothing here touches memory; memory
//! instructions return a [`MemOp`] that the caller performs.

use super::{fpu, DecodedInst, Mnemonic, OpClass};

pub const CSR_CYCLE: u32 = 0xc00;
pub const CSR_TIME: u32 = 0xc01;
pub const CSR_INSTRET: u32 = 0xc02;
pub const CSR_CYCLEH: u32 = 0xc80;
pub const CSR_TIMEH: u32 = 0xc81;
pub const CSR_INSTRETH: u32 = 0xc82;

/// Counter values visible through the read-only CSRs.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct Counters {
    pub cycle: u64,
    pub instret: u64,
}

impl Counters {
    pub fn read(&self, csr: u32) -> u32 {
        match csr {
            CSR_CYCLE | CSR_TIME => self.cycle as u32,
            CSR_INSTRET => self.instret as u32,
            CSR_CYCLEH | CSR_TIMEH => (self.cycle >> 32) as u32,
            CSR_INSTRETH => (self.instret >> 32) as u32,
            _ => 0,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum MemOp {
    Load { addr: u32, size: u32 },
    Store { addr: u32, size: u32, data: u32 },
    Lr { addr: u32 },
    Sc { addr: u32, data: u32 },
    Amo { addr: u32, src: u32 },
}

impl MemOp {
    pub fn addr(&self) -> u32 {
        match *self {
            MemOp::Load { addr, .. }
            | MemOp::Store { addr, .. }
            | MemOp::Lr { addr }
            | MemOp::Sc { addr, .. }
            | MemOp::Amo { addr, .. } => addr,
        }
    }

    pub fn size(&self) -> u32 {
        match *self {
            MemOp::Load { size, .. } | MemOp::Store { size, .. } => size,
            _ => 4,
        }
    }

    pub fn is_misaligned(&self) -> bool {
        !self.addr().is_multiple_of(self.size())
    }
}

/// Everything an instruction computes from its register operands.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Outcome {
    /// Register result; `None` for loads/atomics (filled from memory) and for
    /// instructions without a destination.
    pub value: Option<u32>,
    pub next_pc: u32,
    pub taken: Option<bool>,
    pub mem: Option<MemOp>,
}

/// Evaluates `inst` with source operand bit patterns `ops` (rs1, rs2, rs3).
pub fn execute(inst: &DecodedInst, ops: [u32; 3], counters: Counters) -> Outcome {
    use Mnemonic::*;
    let [a, b, c] = ops;
    let imm = inst.imm as u32;
    let fall = inst.next_pc();
    let mut out = Outcome { value: None, next_pc: fall, taken: None, mem: None };
    let addr = a.wrapping_add(imm);

    match inst.opclass() {
        OpClass::Branch => {
            let taken = match inst.mnemonic {
                Beq => a == b,
                Bne => a != b,
                Blt => (a as i32) < (b as i32),
                Bge => (a as i32) >= (b as i32),
                Bltu => a < b,
                _ => a >= b,
            };
            out.taken = Some(taken);
            if taken {
                out.next_pc = inst.pc.wrapping_add(imm);
            }
        }
        OpClass::Jump => {
            out.taken = Some(true);
            out.value = Some(fall);
            out.next_pc = match inst.mnemonic {
                Jal => inst.pc.wrapping_add(imm),
                _ => addr & !1,
            };
        }
        OpClass::Load | OpClass::FLoad => {
            out.mem = Some(MemOp::Load { addr, size: mem_size(inst.mnemonic) });
        }
        OpClass::Store | OpClass::FStore => {
            let size = mem_size(inst.mnemonic);
            let data = if size == 4 { b } else { b & ((1 << (8 * size)) - 1) };
            out.mem = Some(MemOp::Store { addr, size, data });
        }
        OpClass::Amo => {
            out.mem = Some(match inst.mnemonic {
                LrW => MemOp::Lr { addr: a },
                ScW => MemOp::Sc { addr: a, data: b },
                _ => MemOp::Amo { addr: a, src: b },
            });
        }
        OpClass::Csr => {
            out.value = Some(counters.read(imm & 0xfff));
        }
        OpClass::System => {}
        OpClass::Fpu => {
            out.value = Some(fpu::execute(inst.mnemonic, a, b, c, inst.rm));
        }
        OpClass::Alu | OpClass::Mul | OpClass::Div => {
            out.value = Some(alu(inst.mnemonic, a, b, imm, inst.pc));
        }
    }
    if inst.dest().is_none() {
        out.value = None;
    }
    out
}

fn alu(m: Mnemonic, a: u32, b: u32, imm: u32, pc: u32) -> u32 {
    use Mnemonic::*;
    let sh = |v: u32| v & 0x1f;
    match m {
        Lui => imm,
        Auipc => pc.wrapping_add(imm),
        Addi => a.wrapping_add(imm),
        Slti => ((a as i32) < (imm as i32)) as u32,
        Sltiu => (a < imm) as u32,
        Xori => a ^ imm,
        Ori => a | imm,
        Andi => a & imm,
        Slli => a << sh(imm),
        Srli => a >> sh(imm),
        Srai => ((a as i32) >> sh(imm)) as u32,
        Add => a.wrapping_add(b),
        Sub => a.wrapping_sub(b),
        Sll => a << sh(b),
        Slt => ((a as i32) < (b as i32)) as u32,
        Sltu => (a < b) as u32,
        Xor => a ^ b,
        Srl => a >> sh(b),
        Sra => ((a as i32) >> sh(b)) as u32,
        Or => a | b,
        And => a & b,
        Mul => a.wrapping_mul(b),
        Mulh => ((a as i32 as i64 * b as i32 as i64) >> 32) as u32,
        Mulhsu => ((a as i32 as i64 * b as i64) >> 32) as u32,
        Mulhu => ((a as u64 * b as u64) >> 32) as u32,
        Div => match (a as i32, b as i32) {
            (_, 0) => u32::MAX,
            (i32::MIN, -1) => a,
            (x, y) => (x / y) as u32,
        },
        Divu => a.checked_div(b).unwrap_or(u32::MAX),
        Rem => match (a as i32, b as i32) {
            (_, 0) => a,
            (i32::MIN, -1) => 0,
            (x, y) => (x % y) as u32,
        },
        Remu => a.checked_rem(b).unwrap_or(a),
        _ => unreachable!("{m:?} is not an integer ALU operation"),
    }
}

pub fn mem_size(m: Mnemonic) -> u32 {
    use Mnemonic::*;
    match m {
        Lb | Lbu | Sb => 1,
        Lh | Lhu | Sh => 2,
        _ => 4,
    }
}

/// Sign- or zero-extends raw loaded bytes for the destination register.
pub fn load_value(m: Mnemonic, raw: u32) -> u32 {
    use Mnemonic::*;
    match m {
        Lb => raw as u8 as i8 as i32 as u32,
        Lh => raw as u16 as i16 as i32 as u32,
        Lbu => raw & 0xff,
        Lhu => raw & 0xffff,
        _ => raw,
    }
}

/// New memory value written by a read-modify-write atomic.
pub fn amo_value(m: Mnemonic, old: u32, src: u32) -> u32 {
    use Mnemonic::*;
    match m {
        AmoswapW => src,
        AmoaddW => old.wrapping_add(src),
        AmoxorW => old ^ src,
        AmoandW => old & src,
        AmoorW => old | src,
        AmominW => (old as i32).min(src as i32) as u32,
        AmomaxW => (old as i32).max(src as i32) as u32,
        AmominuW => old.min(src),
        AmomaxuW => old.max(src),
        _ => unreachable!("{m:?} is not a read-modify-write atomic"),
    }
}
