//! 32-bit encoder and a small assembler used by the kernel generator.
//!
//! `encode` is the inverse of `decode_word`: for every decoded instruction
//! (including compressed ones) it produces the canonical 32-bit encoding of
//! the same operation.

use super::{DecodedInst, Mnemonic};

fn r_type(f7: u32, rs2: u8, rs1: u8, f3: u32, rd: u8, op: u32) -> u32 {
    f7 << 25 | (rs2 as u32) << 20 | (rs1 as u32) << 15 | f3 << 12 | (rd as u32) << 7 | op
}

fn i_type(imm: i32, rs1: u8, f3: u32, rd: u8, op: u32) -> u32 {
    ((imm as u32) & 0xfff) << 20 | (rs1 as u32) << 15 | f3 << 12 | (rd as u32) << 7 | op
}

fn s_type(imm: i32, rs2: u8, rs1: u8, f3: u32, op: u32) -> u32 {
    let imm = imm as u32;
    ((imm >> 5) & 0x7f) << 25 | (rs2 as u32) << 20 | (rs1 as u32) << 15 | f3 << 12 | (imm & 0x1f) << 7 | op
}

fn b_type(imm: i32, rs2: u8, rs1: u8, f3: u32) -> u32 {
    let imm = imm as u32;
    ((imm >> 12) & 1) << 31
        | ((imm >> 5) & 0x3f) << 25
        | (rs2 as u32) << 20
        | (rs1 as u32) << 15
        | f3 << 12
        | ((imm >> 1) & 0xf) << 8
        | ((imm >> 11) & 1) << 7
        | 0x63
}

fn u_type(imm: i32, rd: u8, op: u32) -> u32 {
    (imm as u32 & 0xffff_f000) | (rd as u32) << 7 | op
}

fn j_type(imm: i32, rd: u8) -> u32 {
    let imm = imm as u32;
    ((imm >> 20) & 1) << 31
        | ((imm >> 1) & 0x3ff) << 21
        | ((imm >> 11) & 1) << 20
        | ((imm >> 12) & 0xff) << 12
        | (rd as u32) << 7
        | 0x6f
}

/// Canonical 32-bit encoding of `inst`.
pub fn encode(inst: &DecodedInst) -> u32 {
    use Mnemonic::*;
    let DecodedInst { rd, rs1, rs2, imm, rm, .. } = *inst;
    let rm = rm as u32;
    match inst.mnemonic {
        Lui => u_type(imm, rd, 0x37),
        Auipc => u_type(imm, rd, 0x17),
        Jal => j_type(imm, rd),
        Jalr => i_type(imm, rs1, 0, rd, 0x67),
        Beq => b_type(imm, rs2, rs1, 0),
        Bne => b_type(imm, rs2, rs1, 1),
        Blt => b_type(imm, rs2, rs1, 4),
        Bge => b_type(imm, rs2, rs1, 5),
        Bltu => b_type(imm, rs2, rs1, 6),
        Bgeu => b_type(imm, rs2, rs1, 7),
        Lb => i_type(imm, rs1, 0, rd, 0x03),
        Lh => i_type(imm, rs1, 1, rd, 0x03),
        Lw => i_type(imm, rs1, 2, rd, 0x03),
        Lbu => i_type(imm, rs1, 4, rd, 0x03),
        Lhu => i_type(imm, rs1, 5, rd, 0x03),
        Sb => s_type(imm, rs2, rs1, 0, 0x23),
        Sh => s_type(imm, rs2, rs1, 1, 0x23),
        Sw => s_type(imm, rs2, rs1, 2, 0x23),
        Addi => i_type(imm, rs1, 0, rd, 0x13),
        Slti => i_type(imm, rs1, 2, rd, 0x13),
        Sltiu => i_type(imm, rs1, 3, rd, 0x13),
        Xori => i_type(imm, rs1, 4, rd, 0x13),
        Ori => i_type(imm, rs1, 6, rd, 0x13),
        Andi => i_type(imm, rs1, 7, rd, 0x13),
        Slli => i_type(imm & 0x1f, rs1, 1, rd, 0x13),
        Srli => i_type(imm & 0x1f, rs1, 5, rd, 0x13),
        Srai => i_type((imm & 0x1f) | 0x400, rs1, 5, rd, 0x13),
        Add => r_type(0, rs2, rs1, 0, rd, 0x33),
        Sub => r_type(0x20, rs2, rs1, 0, rd, 0x33),
        Sll => r_type(0, rs2, rs1, 1, rd, 0x33),
        Slt => r_type(0, rs2, rs1, 2, rd, 0x33),
        Sltu => r_type(0, rs2, rs1, 3, rd, 0x33),
        Xor => r_type(0, rs2, rs1, 4, rd, 0x33),
        Srl => r_type(0, rs2, rs1, 5, rd, 0x33),
        Sra => r_type(0x20, rs2, rs1, 5, rd, 0x33),
        Or => r_type(0, rs2, rs1, 6, rd, 0x33),
        And => r_type(0, rs2, rs1, 7, rd, 0x33),
        Fence => i_type(imm, rs1, 0, rd, 0x0f),
        FenceI => i_type(imm, rs1, 1, rd, 0x0f),
        Ecall => 0x0000_0073,
        Ebreak => 0x0010_0073,
        Csrrw => i_type(imm, rs1, 1, rd, 0x73),
        Csrrs => i_type(imm, rs1, 2, rd, 0x73),
        Csrrc => i_type(imm, rs1, 3, rd, 0x73),
        Csrrwi => i_type(imm, rs1, 5, rd, 0x73),
        Csrrsi => i_type(imm, rs1, 6, rd, 0x73),
        Csrrci => i_type(imm, rs1, 7, rd, 0x73),
        Mul => r_type(1, rs2, rs1, 0, rd, 0x33),
        Mulh => r_type(1, rs2, rs1, 1, rd, 0x33),
        Mulhsu => r_type(1, rs2, rs1, 2, rd, 0x33),
        Mulhu => r_type(1, rs2, rs1, 3, rd, 0x33),
        Div => r_type(1, rs2, rs1, 4, rd, 0x33),
        Divu => r_type(1, rs2, rs1, 5, rd, 0x33),
        Rem => r_type(1, rs2, rs1, 6, rd, 0x33),
        Remu => r_type(1, rs2, rs1, 7, rd, 0x33),
        LrW | ScW | AmoswapW | AmoaddW | AmoxorW | AmoandW | AmoorW | AmominW | AmomaxW | AmominuW | AmomaxuW => {
            let f5 = match inst.mnemonic {
                LrW => 0x02,
                ScW => 0x03,
                AmoswapW => 0x01,
                AmoaddW => 0x00,
                AmoxorW => 0x04,
                AmoandW => 0x0c,
                AmoorW => 0x08,
                AmominW => 0x10,
                AmomaxW => 0x14,
                AmominuW => 0x18,
                _ => 0x1c,
            };
            r_type(f5 << 2 | (imm as u32 & 3), rs2, rs1, 2, rd, 0x2f)
        }
        Flw => i_type(imm, rs1, 2, rd, 0x07),
        Fsw => s_type(imm, rs2, rs1, 2, 0x27),
        FmaddS | FmsubS | FnmsubS | FnmaddS => {
            let op = match inst.mnemonic {
                FmaddS => 0x43,
                FmsubS => 0x47,
                FnmsubS => 0x4b,
                _ => 0x4f,
            };
            (inst.rs3.unwrap_or(0) as u32) << 27 | r_type(0, rs2, rs1, rm, rd, op)
        }
        FaddS => r_type(0x00, rs2, rs1, rm, rd, 0x53),
        FsubS => r_type(0x04, rs2, rs1, rm, rd, 0x53),
        FmulS => r_type(0x08, rs2, rs1, rm, rd, 0x53),
        FdivS => r_type(0x0c, rs2, rs1, rm, rd, 0x53),
        FsgnjS => r_type(0x10, rs2, rs1, 0, rd, 0x53),
        FsgnjnS => r_type(0x10, rs2, rs1, 1, rd, 0x53),
        FsgnjxS => r_type(0x10, rs2, rs1, 2, rd, 0x53),
        FcvtWS => r_type(0x60, 0, rs1, rm, rd, 0x53),
        FcvtWuS => r_type(0x60, 1, rs1, rm, rd, 0x53),
        FcvtSW => r_type(0x68, 0, rs1, rm, rd, 0x53),
        FcvtSWu => r_type(0x68, 1, rs1, rm, rd, 0x53),
        FmvXW => r_type(0x70, 0, rs1, 0, rd, 0x53),
        FmvWX => r_type(0x78, 0, rs1, 0, rd, 0x53),
        FeqS => r_type(0x50, rs2, rs1, 2, rd, 0x53),
        FltS => r_type(0x50, rs2, rs1, 1, rd, 0x53),
        FleS => r_type(0x50, rs2, rs1, 0, rd, 0x53),
    }
}

/// Register names used by the assembler helpers.
pub mod reg {
    pub const ZERO: u8 = 0;
    pub const RA: u8 = 1;
    pub const SP: u8 = 2;
    pub const T0: u8 = 5;
    pub const T1: u8 = 6;
    pub const T2: u8 = 7;
    pub const S0: u8 = 8;
    pub const S1: u8 = 9;
    pub const A0: u8 = 10;
    pub const A1: u8 = 11;
    pub const A2: u8 = 12;
    pub const A3: u8 = 13;
    pub const A4: u8 = 14;
    pub const A5: u8 = 15;
    pub const A6: u8 = 16;
    pub const A7: u8 = 17;
    pub const S2: u8 = 18;
    pub const S3: u8 = 19;
    pub const S4: u8 = 20;
    pub const S5: u8 = 21;
    pub const S6: u8 = 22;
    pub const S7: u8 = 23;
    pub const T3: u8 = 28;
    pub const T4: u8 = 29;
    pub const T5: u8 = 30;
    pub const T6: u8 = 31;
}

/// A growable machine-code buffer with forward-label patching.
#[derive(Clone, Debug, Default)]
pub struct Assembler {
    base: u32,
    code: Vec<u8>,
    fixups: Vec<(usize, Mnemonic, u8, u8, u8, Label)>,
    labels: Vec<Option<u32>>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Label(usize);

impl Assembler {
    pub fn new(base: u32) -> Self {
        Assembler { base, ..Default::default() }
    }

    pub fn pc(&self) -> u32 {
        self.base + self.code.len() as u32
    }

    pub fn emit(&mut self, inst: DecodedInst) {
        self.emit_raw(encode(&inst));
    }

    pub fn emit_raw(&mut self, word: u32) {
        self.code.extend_from_slice(&word.to_le_bytes());
    }

    pub fn emit_compressed(&mut self, half: u16) {
        self.code.extend_from_slice(&half.to_le_bytes());
    }

    pub fn op(&mut self, m: Mnemonic, rd: u8, rs1: u8, rs2: u8) {
        self.emit(DecodedInst::new(m, rd, rs1, rs2, 0));
    }

    pub fn opi(&mut self, m: Mnemonic, rd: u8, rs1: u8, imm: i32) {
        self.emit(DecodedInst::new(m, rd, rs1, 0, imm));
    }

    pub fn load(&mut self, m: Mnemonic, rd: u8, base: u8, offset: i32) {
        self.emit(DecodedInst::new(m, rd, base, 0, offset));
    }

    pub fn store(&mut self, m: Mnemonic, src: u8, base: u8, offset: i32) {
        self.emit(DecodedInst::new(m, 0, base, src, offset));
    }

    /// Loads an arbitrary 32-bit constant with `lui`/`addi`.
    pub fn li(&mut self, rd: u8, value: u32) {
        let lo = ((value as i32) << 20) >> 20;
        let hi = value.wrapping_sub(lo as u32);
        if hi != 0 {
            self.opi(Mnemonic::Lui, rd, 0, hi as i32);
            if lo != 0 {
                self.opi(Mnemonic::Addi, rd, rd, lo);
            }
        } else {
            self.opi(Mnemonic::Addi, rd, 0, lo);
        }
    }

    pub fn ebreak(&mut self) {
        self.op(Mnemonic::Ebreak, 0, 0, 0);
    }

    pub fn new_label(&mut self) -> Label {
        self.labels.push(None);
        Label(self.labels.len() - 1)
    }

    pub fn bind(&mut self, label: Label) {
        self.labels[label.0] = Some(self.pc());
    }

    pub fn here(&mut self) -> Label {
        let l = self.new_label();
        self.bind(l);
        l
    }

    /// Conditional branch (or `jal` with `rd` in `rs1`) to a label.
    pub fn branch(&mut self, m: Mnemonic, rs1: u8, rs2: u8, target: Label) {
        self.fixups.push((self.code.len(), m, 0, rs1, rs2, target));
        self.emit_raw(0);
    }

    pub fn jal(&mut self, rd: u8, target: Label) {
        self.fixups.push((self.code.len(), Mnemonic::Jal, rd, 0, 0, target));
        self.emit_raw(0);
    }

    /// Resolves labels and returns the code bytes.
    pub fn finish(mut self) -> Vec<u8> {
        for &(at, m, rd, rs1, rs2, label) in &self.fixups {
            let target = self.labels[label.0].expect("unbound label");
            let pc = self.base + at as u32;
            let offset = target.wrapping_sub(pc) as i32;
            let word = encode(&DecodedInst::new(m, rd, rs1, rs2, offset));
            self.code[at..at + 4].copy_from_slice(&word.to_le_bytes());
        }
        self.code
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::isa::decode_word;

    #[test]
    fn known_encodings() {
        assert_eq!(encode(&DecodedInst::new(Mnemonic::Add, 10, 10, 11, 0)), 0x00b5_0533);
        assert_eq!(encode(&DecodedInst::new(Mnemonic::Addi, 0, 0, 0, 0)), 0x0000_0013);
        assert_eq!(encode(&DecodedInst::new(Mnemonic::Beq, 0, 0, 0, 8)), 0x0000_0463);
        assert_eq!(encode(&DecodedInst::new(Mnemonic::Sw, 0, 2, 11, -12)), 0xfeb1_2a23);
        assert_eq!(encode(&DecodedInst::new(Mnemonic::Jal, 0, 0, 0, -4)), 0xffdf_f06f);
    }

    #[test]
    fn li_materializes_constants() {
        for v in [0u32, 1, 0x7ff, 0x800, 0xfff, 0x8000_0000, 0x8010_0800, 0xffff_ffff, 0x1234_5678] {
            let mut a = Assembler::new(0);
            a.li(5, v);
            let code = a.finish();
            let mut x5 = 0u32;
            for w in code.chunks(4) {
                let i = decode_word(u32::from_le_bytes(w.try_into().unwrap()), 0).unwrap();
                x5 = match i.mnemonic {
                    Mnemonic::Lui => i.imm as u32,
                    Mnemonic::Addi if i.rs1 == 0 => i.imm as u32,
                    Mnemonic::Addi => x5.wrapping_add(i.imm as u32),
                    _ => unreachable!(),
                };
            }
            assert_eq!(x5, v);
        }
    }
}
