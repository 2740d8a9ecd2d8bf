//! RV32IMC with an A/F subset: instruction model, decoder, encoder and the
//! functional reference interpreter used as the golden model.

mod compressed;
pub mod decode;
pub mod encode;
pub mod exec;
mod fpu;
pub mod memory;
pub mod reference;

use std::fmt;

use serde::{Deserialize, Serialize};

pub use decode::{decode, decode_word, DecodeError, RawFetchWord};
pub use memory::Memory;
pub use reference::{run_reference, step_reference, ArchState, ExitReason, RefError, RefRun, RetireRecord, Trap};

/// Architectural register, integer or floating point.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Reg {
    X(u8),
    F(u8),
}

impl Reg {
    pub fn index(self) -> usize {
        match self {
            Reg::X(i) | Reg::F(i) => i as usize,
        }
    }

    pub fn is_zero(self) -> bool {
        self == Reg::X(0)
    }
}

impl fmt::Display for Reg {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Reg::X(i) => write!(f, "x{i}"),
            Reg::F(i) => write!(f, "f{i}"),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
enum File {
    Int,
    Fp,
}

/// Coarse instruction class used by issue and functional-unit routing.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum OpClass {
    Alu,
    Branch,
    Jump,
    Load,
    Store,
    Mul,
    Div,
    Csr,
    System,
    Fpu,
    FLoad,
    FStore,
    Amo,
}

impl OpClass {
    pub fn is_memory(self) -> bool {
        matches!(self, OpClass::Load | OpClass::Store | OpClass::FLoad | OpClass::FStore | OpClass::Amo)
    }

    pub fn is_control(self) -> bool {
        matches!(self, OpClass::Branch | OpClass::Jump)
    }
}

macro_rules! mnemonics {
    ($($variant:ident => $name:literal, $class:ident, $dst:expr, [$s1:expr, $s2:expr, $s3:expr];)*) => {
        /// Every instruction the decoder accepts. Compressed encodings decode to
        /// the mnemonic of their 32-bit expansion.
        #[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
        pub enum Mnemonic {
            $($variant,)*
        }

        impl Mnemonic {
            pub const ALL: &'static [Mnemonic] = &[$(Mnemonic::$variant,)*];

            pub fn name(self) -> &'static str {
                match self {
                    $(Mnemonic::$variant => $name,)*
                }
            }

            pub fn opclass(self) -> OpClass {
                match self {
                    $(Mnemonic::$variant => OpClass::$class,)*
                }
            }

            fn operand_files(self) -> (Option<File>, [Option<File>; 3]) {
                #[allow(unused_imports)]
                use File::*;
                match self {
                    $(Mnemonic::$variant => ($dst, [$s1, $s2, $s3]),)*
                }
            }
        }
    };
}

const N: Option<File> = None;
const I: Option<File> = Some(File::Int);
const FP: Option<File> = Some(File::Fp);

mnemonics! {
    Lui => "lui", Alu, I, [N, N, N];
    Auipc => "auipc", Alu, I, [N, N, N];
    Jal => "jal", Jump, I, [N, N, N];
    Jalr => "jalr", Jump, I, [I, N, N];
    Beq => "beq", Branch, N, [I, I, N];
    Bne => "bne", Branch, N, [I, I, N];
    Blt => "blt", Branch, N, [I, I, N];
    Bge => "bge", Branch, N, [I, I, N];
    Bltu => "bltu", Branch, N, [I, I, N];
    Bgeu => "bgeu", Branch, N, [I, I, N];
    Lb => "lb", Load, I, [I, N, N];
    Lh => "lh", Load, I, [I, N, N];
    Lw => "lw", Load, I, [I, N, N];
    Lbu => "lbu", Load, I, [I, N, N];
    Lhu => "lhu", Load, I, [I, N, N];
    Sb => "sb", Store, N, [I, I, N];
    Sh => "sh", Store, N, [I, I, N];
    Sw => "sw", Store, N, [I, I, N];
    Addi => "addi", Alu, I, [I, N, N];
    Slti => "slti", Alu, I, [I, N, N];
    Sltiu => "sltiu", Alu, I, [I, N, N];
    Xori => "xori", Alu, I, [I, N, N];
    Ori => "ori", Alu, I, [I, N, N];
    Andi => "andi", Alu, I, [I, N, N];
    Slli => "slli", Alu, I, [I, N, N];
    Srli => "srli", Alu, I, [I, N, N];
    Srai => "srai", Alu, I, [I, N, N];
    Add => "add", Alu, I, [I, I, N];
    Sub => "sub", Alu, I, [I, I, N];
    Sll => "sll", Alu, I, [I, I, N];
    Slt => "slt", Alu, I, [I, I, N];
    Sltu => "sltu", Alu, I, [I, I, N];
    Xor => "xor", Alu, I, [I, I, N];
    Srl => "srl", Alu, I, [I, I, N];
    Sra => "sra", Alu, I, [I, I, N];
    Or => "or", Alu, I, [I, I, N];
    And => "and", Alu, I, [I, I, N];
    Fence => "fence", System, N, [N, N, N];
    FenceI => "fence.i", System, N, [N, N, N];
    Ecall => "ecall", System, N, [N, N, N];
    Ebreak => "ebreak", System, N, [N, N, N];
    Csrrw => "csrrw", Csr, I, [I, N, N];
    Csrrs => "csrrs", Csr, I, [I, N, N];
    Csrrc => "csrrc", Csr, I, [I, N, N];
    Csrrwi => "csrrwi", Csr, I, [N, N, N];
    Csrrsi => "csrrsi", Csr, I, [N, N, N];
    Csrrci => "csrrci", Csr, I, [N, N, N];
    Mul => "mul", Mul, I, [I, I, N];
    Mulh => "mulh", Mul, I, [I, I, N];
    Mulhsu => "mulhsu", Mul, I, [I, I, N];
    Mulhu => "mulhu", Mul, I, [I, I, N];
    Div => "div", Div, I, [I, I, N];
    Divu => "divu", Div, I, [I, I, N];
    Rem => "rem", Div, I, [I, I, N];
    Remu => "remu", Div, I, [I, I, N];
    LrW => "lr.w", Amo, I, [I, N, N];
    ScW => "sc.w", Amo, I, [I, I, N];
    AmoswapW => "amoswap.w", Amo, I, [I, I, N];
    AmoaddW => "amoadd.w", Amo, I, [I, I, N];
    AmoxorW => "amoxor.w", Amo, I, [I, I, N];
    AmoandW => "amoand.w", Amo, I, [I, I, N];
    AmoorW => "amoor.w", Amo, I, [I, I, N];
    AmominW => "amomin.w", Amo, I, [I, I, N];
    AmomaxW => "amomax.w", Amo, I, [I, I, N];
    AmominuW => "amominu.w", Amo, I, [I, I, N];
    AmomaxuW => "amomaxu.w", Amo, I, [I, I, N];
    Flw => "flw", FLoad, FP, [I, N, N];
    Fsw => "fsw", FStore, N, [I, FP, N];
    FaddS => "fadd.s", Fpu, FP, [FP, FP, N];
    FsubS => "fsub.s", Fpu, FP, [FP, FP, N];
    FmulS => "fmul.s", Fpu, FP, [FP, FP, N];
    FdivS => "fdiv.s", Fpu, FP, [FP, FP, N];
    FmaddS => "fmadd.s", Fpu, FP, [FP, FP, FP];
    FmsubS => "fmsub.s", Fpu, FP, [FP, FP, FP];
    FnmsubS => "fnmsub.s", Fpu, FP, [FP, FP, FP];
    FnmaddS => "fnmadd.s", Fpu, FP, [FP, FP, FP];
    FsgnjS => "fsgnj.s", Fpu, FP, [FP, FP, N];
    FsgnjnS => "fsgnjn.s", Fpu, FP, [FP, FP, N];
    FsgnjxS => "fsgnjx.s", Fpu, FP, [FP, FP, N];
    FmvXW => "fmv.x.w", Fpu, I, [FP, N, N];
    FmvWX => "fmv.w.x", Fpu, FP, [I, N, N];
    FcvtWS => "fcvt.w.s", Fpu, I, [FP, N, N];
    FcvtWuS => "fcvt.wu.s", Fpu, I, [FP, N, N];
    FcvtSW => "fcvt.s.w", Fpu, FP, [I, N, N];
    FcvtSWu => "fcvt.s.wu", Fpu, FP, [I, N, N];
    FeqS => "feq.s", Fpu, I, [FP, FP, N];
    FltS => "flt.s", Fpu, I, [FP, FP, N];
    FleS => "fle.s", Fpu, I, [FP, FP, N];
}

impl fmt::Display for Mnemonic {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// Which optional extensions the decoder and interpreter accept.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct IsaConfig {
    pub fpu: bool,
}

impl Default for IsaConfig {
    fn default() -> Self {
        IsaConfig { fpu: true }
    }
}

/// One architecturally decoded instruction.
///
/// `rs1` also carries the 5-bit immediate of the `csrr*i` forms, and `imm`
/// carries the CSR number for CSR instructions, the fence bits for `fence`,
/// and the aq/rl bits for atomics.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct DecodedInst {
    pub pc: u32,
    /// Raw encoding; only the low 16 bits are meaningful when `size == 2`.
    pub raw: u32,
    pub size: u8,
    pub mnemonic: Mnemonic,
    pub rd: u8,
    pub rs1: u8,
    pub rs2: u8,
    pub rs3: Option<u8>,
    pub imm: i32,
    /// Floating-point rounding-mode field.
    pub rm: u8,
}

impl DecodedInst {
    pub fn new(mnemonic: Mnemonic, rd: u8, rs1: u8, rs2: u8, imm: i32) -> Self {
        DecodedInst { pc: 0, raw: 0, size: 4, mnemonic, rd, rs1, rs2, rs3: None, imm, rm: 0 }
    }

    pub fn opclass(&self) -> OpClass {
        self.mnemonic.opclass()
    }

    pub fn is_compressed(&self) -> bool {
        self.size == 2
    }

    /// Destination register, or `None` when nothing architectural is written
    /// (including writes to `x0`).
    pub fn dest(&self) -> Option<Reg> {
        match self.mnemonic.operand_files().0? {
            File::Int if self.rd == 0 => None,
            File::Int => Some(Reg::X(self.rd)),
            File::Fp => Some(Reg::F(self.rd)),
        }
    }

    /// Source registers in rs1, rs2, rs3 order.
    pub fn sources(&self) -> [Option<Reg>; 3] {
        let files = self.mnemonic.operand_files().1;
        let idx = [self.rs1, self.rs2, self.rs3.unwrap_or(0)];
        let mut out = [None; 3];
        for (slot, (file, i)) in out.iter_mut().zip(files.iter().zip(idx)) {
            *slot = file.map(|f| match f {
                File::Int => Reg::X(i),
                File::Fp => Reg::F(i),
            });
        }
        out
    }

    /// Per-operand floating-point flags: destination, then rs1..rs3.
    pub fn uses_fp_regs(&self) -> [bool; 4] {
        let (d, s) = self.mnemonic.operand_files();
        [d == FP, s[0] == FP, s[1] == FP, s[2] == FP]
    }

    pub fn needs_fpu(&self) -> bool {
        matches!(self.opclass(), OpClass::Fpu | OpClass::FLoad | OpClass::FStore)
    }

    pub fn next_pc(&self) -> u32 {
        self.pc.wrapping_add(self.size as u32)
    }

    /// Statically known jump/branch target (`jal` and conditional branches).
    pub fn direct_target(&self) -> Option<u32> {
        match self.opclass() {
            OpClass::Branch => Some(self.pc.wrapping_add(self.imm as u32)),
            OpClass::Jump if self.mnemonic == Mnemonic::Jal => Some(self.pc.wrapping_add(self.imm as u32)),
            _ => None,
        }
    }
}

impl fmt::Display for DecodedInst {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{:#010x}: {}", self.pc, self.mnemonic)?;
        let mut sep = " ";
        if let Some(d) = self.dest() {
            write!(f, "{sep}{d}")?;
            sep = ", ";
        }
        for s in self.sources().into_iter().flatten() {
            write!(f, "{sep}{s}")?;
            sep = ", ";
        }
        write!(f, "{sep}imm={}", self.imm)
    }
}
