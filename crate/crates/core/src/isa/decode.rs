use thiserror::Error;

use super::compressed::decode_compressed;
use super::{DecodedInst, Mnemonic};

/// A 64-bit little-endian fetch window starting at `base_pc`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct RawFetchWord {
    pub bytes: u64,
    pub base_pc: u32,
}

impl RawFetchWord {
    pub fn new(bytes: [u8; 8], base_pc: u32) -> Self {
        RawFetchWord { bytes: u64::from_le_bytes(bytes), base_pc }
    }

    fn half(&self, offset: u32) -> u16 {
        (self.bytes >> (offset * 8)) as u16
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Error)]
pub enum DecodeError {
    #[error("illegal instruction {raw:#010x}")]
    IllegalInstruction { raw: u32 },
    #[error("32-bit instruction straddles the end of the fetch window")]
    TruncatedFetch,
}

/// Decodes the instruction at byte `offset` of `window`.
pub fn decode(window: &RawFetchWord, offset: u32) -> Result<DecodedInst, DecodeError> {
    debug_assert!(offset.is_multiple_of(2) && offset < 8);
    let pc = window.base_pc.wrapping_add(offset);
    let lo = window.half(offset);
    if lo & 0b11 != 0b11 {
        return decode_compressed(lo, pc);
    }
    if offset + 4 > 8 {
        return Err(DecodeError::TruncatedFetch);
    }
    let raw = lo as u32 | (window.half(offset + 2) as u32) << 16;
    decode_word(raw, pc)
}

fn imm_i(raw: u32) -> i32 {
    (raw as i32) >> 20
}

fn imm_s(raw: u32) -> i32 {
    ((raw as i32) >> 25 << 5) | ((raw >> 7) & 0x1f) as i32
}

fn imm_b(raw: u32) -> i32 {
    let sign = (raw as i32) >> 31 << 12;
    sign | (((raw >> 7) & 1) << 11) as i32 | (((raw >> 25) & 0x3f) << 5) as i32 | (((raw >> 8) & 0xf) << 1) as i32
}

fn imm_u(raw: u32) -> i32 {
    (raw & 0xffff_f000) as i32
}

fn imm_j(raw: u32) -> i32 {
    let sign = (raw as i32) >> 31 << 20;
    sign | (raw & 0x000f_f000) as i32 | (((raw >> 20) & 1) << 11) as i32 | (((raw >> 21) & 0x3ff) << 1) as i32
}

fn valid_rm(rm: u8) -> bool {
    rm <= 4 || rm == 7
}

/// Rounding modes accepted on arithmetic: round-to-nearest-even, or dynamic
/// (the dynamic mode is always round-to-nearest-even here).
fn rne_rm(rm: u8) -> bool {
    rm == 0 || rm == 7
}

/// Decodes a full 32-bit encoding.
pub fn decode_word(raw: u32, pc: u32) -> Result<DecodedInst, DecodeError> {
    use Mnemonic::*;
    let illegal = Err(DecodeError::IllegalInstruction { raw });
    let rd = ((raw >> 7) & 0x1f) as u8;
    let rs1 = ((raw >> 15) & 0x1f) as u8;
    let rs2 = ((raw >> 20) & 0x1f) as u8;
    let f3 = (raw >> 12) & 7;
    let f7 = raw >> 25;
    let mk = |m: Mnemonic, rd: u8, rs1: u8, rs2: u8, imm: i32| -> Result<DecodedInst, DecodeError> {
        Ok(DecodedInst { pc, raw, size: 4, mnemonic: m, rd, rs1, rs2, rs3: None, imm, rm: 0 })
    };

    match raw & 0x7f {
        0x37 => mk(Lui, rd, 0, 0, imm_u(raw)),
        0x17 => mk(Auipc, rd, 0, 0, imm_u(raw)),
        0x6f => mk(Jal, rd, 0, 0, imm_j(raw)),
        0x67 if f3 == 0 => mk(Jalr, rd, rs1, 0, imm_i(raw)),
        0x63 => {
            let m = match f3 {
                0 => Beq,
                1 => Bne,
                4 => Blt,
                5 => Bge,
                6 => Bltu,
                7 => Bgeu,
                _ => return illegal,
            };
            mk(m, 0, rs1, rs2, imm_b(raw))
        }
        0x03 => {
            let m = match f3 {
                0 => Lb,
                1 => Lh,
                2 => Lw,
                4 => Lbu,
                5 => Lhu,
                _ => return illegal,
            };
            mk(m, rd, rs1, 0, imm_i(raw))
        }
        0x23 => {
            let m = match f3 {
                0 => Sb,
                1 => Sh,
                2 => Sw,
                _ => return illegal,
            };
            mk(m, 0, rs1, rs2, imm_s(raw))
        }
        0x13 => {
            let shamt = ((raw >> 20) & 0x1f) as i32;
            match f3 {
                0 => mk(Addi, rd, rs1, 0, imm_i(raw)),
                2 => mk(Slti, rd, rs1, 0, imm_i(raw)),
                3 => mk(Sltiu, rd, rs1, 0, imm_i(raw)),
                4 => mk(Xori, rd, rs1, 0, imm_i(raw)),
                6 => mk(Ori, rd, rs1, 0, imm_i(raw)),
                7 => mk(Andi, rd, rs1, 0, imm_i(raw)),
                1 if f7 == 0 => mk(Slli, rd, rs1, 0, shamt),
                5 if f7 == 0 => mk(Srli, rd, rs1, 0, shamt),
                5 if f7 == 0x20 => mk(Srai, rd, rs1, 0, shamt),
                _ => illegal,
            }
        }
        0x33 => {
            let m = match (f7, f3) {
                (0, 0) => Add,
                (0x20, 0) => Sub,
                (0, 1) => Sll,
                (0, 2) => Slt,
                (0, 3) => Sltu,
                (0, 4) => Xor,
                (0, 5) => Srl,
                (0x20, 5) => Sra,
                (0, 6) => Or,
                (0, 7) => And,
                (1, 0) => Mul,
                (1, 1) => Mulh,
                (1, 2) => Mulhsu,
                (1, 3) => Mulhu,
                (1, 4) => Div,
                (1, 5) => Divu,
                (1, 6) => Rem,
                (1, 7) => Remu,
                _ => return illegal,
            };
            mk(m, rd, rs1, rs2, 0)
        }
        0x0f => match f3 {
            0 => mk(Fence, rd, rs1, 0, imm_i(raw)),
            1 => mk(FenceI, rd, rs1, 0, imm_i(raw)),
            _ => illegal,
        },
        0x73 => match f3 {
            0 if raw == 0x0000_0073 => mk(Ecall, 0, 0, 0, 0),
            0 if raw == 0x0010_0073 => mk(Ebreak, 0, 0, 0, 0),
            0 | 4 => illegal,
            _ => {
                let m = match f3 {
                    1 => Csrrw,
                    2 => Csrrs,
                    3 => Csrrc,
                    5 => Csrrwi,
                    6 => Csrrsi,
                    _ => Csrrci,
                };
                mk(m, rd, rs1, 0, (raw >> 20) as i32)
            }
        },
        0x2f if f3 == 2 => {
            let aqrl = ((raw >> 25) & 3) as i32;
            let m = match raw >> 27 {
                0x02 if rs2 == 0 => LrW,
                0x03 => ScW,
                0x01 => AmoswapW,
                0x00 => AmoaddW,
                0x04 => AmoxorW,
                0x0c => AmoandW,
                0x08 => AmoorW,
                0x10 => AmominW,
                0x14 => AmomaxW,
                0x18 => AmominuW,
                0x1c => AmomaxuW,
                _ => return illegal,
            };
            mk(m, rd, rs1, rs2, aqrl)
        }
        0x07 if f3 == 2 => mk(Flw, rd, rs1, 0, imm_i(raw)),
        0x27 if f3 == 2 => mk(Fsw, 0, rs1, rs2, imm_s(raw)),
        op @ (0x43 | 0x47 | 0x4b | 0x4f) => {
            let rm = f3 as u8;
            if (raw >> 25) & 3 != 0 || !rne_rm(rm) {
                return illegal;
            }
            let m = match op {
                0x43 => FmaddS,
                0x47 => FmsubS,
                0x4b => FnmsubS,
                _ => FnmaddS,
            };
            let mut inst = mk(m, rd, rs1, rs2, 0)?;
            inst.rs3 = Some((raw >> 27) as u8);
            inst.rm = rm;
            Ok(inst)
        }
        0x53 => {
            let rm = f3 as u8;
            let (m, keep_rm) = match f7 {
                0x00 | 0x04 | 0x08 | 0x0c if rne_rm(rm) => {
                    let m = match f7 {
                        0x00 => FaddS,
                        0x04 => FsubS,
                        0x08 => FmulS,
                        _ => FdivS,
                    };
                    (m, true)
                }
                0x10 => match f3 {
                    0 => (FsgnjS, false),
                    1 => (FsgnjnS, false),
                    2 => (FsgnjxS, false),
                    _ => return illegal,
                },
                0x60 if rs2 == 0 && valid_rm(rm) => (FcvtWS, true),
                0x60 if rs2 == 1 && valid_rm(rm) => (FcvtWuS, true),
                0x68 if rs2 == 0 && rne_rm(rm) => (FcvtSW, true),
                0x68 if rs2 == 1 && rne_rm(rm) => (FcvtSWu, true),
                0x70 if rs2 == 0 && f3 == 0 => (FmvXW, false),
                0x78 if rs2 == 0 && f3 == 0 => (FmvWX, false),
                0x50 => match f3 {
                    0 => (FleS, false),
                    1 => (FltS, false),
                    2 => (FeqS, false),
                    _ => return illegal,
                },
                _ => return illegal,
            };
            let unary = matches!(m, FcvtWS | FcvtWuS | FcvtSW | FcvtSWu | FmvXW | FmvWX);
            let mut inst = mk(m, rd, rs1, if unary { 0 } else { rs2 }, 0)?;
            if keep_rm {
                inst.rm = rm;
            }
            if unary {
                // the rs2 field selects the variant and is part of the encoding
                inst.rs2 = rs2;
            }
            Ok(inst)
        }
        _ => illegal,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::isa::{OpClass, Reg};

    fn word(raw: u32) -> RawFetchWord {
        RawFetchWord { bytes: raw as u64, base_pc: 0x8000_0000 }
    }

    #[test]
    fn add_a0_a0_a1() {
        let i = decode(&word(0x00B5_0533), 0).unwrap();
        assert_eq!(i.mnemonic, Mnemonic::Add);
        assert_eq!((i.rd, i.rs1, i.rs2, i.size), (10, 10, 11, 4));
        assert_eq!(i.dest(), Some(Reg::X(10)));
    }

    #[test]
    fn canonical_nop() {
        let i = decode(&word(0x0000_0013), 0).unwrap();
        assert_eq!(i.mnemonic, Mnemonic::Addi);
        assert_eq!((i.rd, i.rs1, i.imm, i.size), (0, 0, 0, 4));
        assert_eq!(i.dest(), None);
    }

    #[test]
    fn c_li_expands_to_addi() {
        let i = decode(&word(0x4585), 0).unwrap();
        assert_eq!(i.mnemonic, Mnemonic::Addi);
        assert_eq!((i.rd, i.rs1, i.imm, i.size), (11, 0, 1, 2));
        assert_eq!(i.raw, 0x4585);
    }

    #[test]
    fn all_zero_is_illegal() {
        assert_eq!(decode(&word(0), 0), Err(DecodeError::IllegalInstruction { raw: 0 }));
    }

    #[test]
    fn straddling_word_is_truncated() {
        let w = RawFetchWord { bytes: 0x0013u64 << 48, base_pc: 0 };
        assert_eq!(decode(&w, 6), Err(DecodeError::TruncatedFetch));
        // a compressed instruction in the last slot is fine
        let w = RawFetchWord { bytes: 0x4585u64 << 48, base_pc: 0 };
        assert_eq!(decode(&w, 6).unwrap().pc, 6);
    }

    #[test]
    fn immediates() {
        // beq x0, x0, +8
        let i = decode_word(0x0000_0463, 0x100).unwrap();
        assert_eq!((i.mnemonic, i.imm), (Mnemonic::Beq, 8));
        assert_eq!(i.direct_target(), Some(0x108));
        // jal x0, -4
        let i = decode_word(0xffdf_f06f, 0).unwrap();
        assert_eq!((i.mnemonic, i.imm), (Mnemonic::Jal, -4));
        // sw x11, -12(x2)
        let i = decode_word(0xfeb1_2a23, 0).unwrap();
        assert_eq!((i.mnemonic, i.rs1, i.rs2, i.imm), (Mnemonic::Sw, 2, 11, -12));
        // lui x5, 0xfffff
        let i = decode_word(0xffff_f2b7, 0).unwrap();
        assert_eq!(i.imm as u32, 0xffff_f000);
    }

    #[test]
    fn bitmanip_and_privileged_are_illegal() {
        for raw in [
            0x40b5_7533u32,            // andn
            0x6005_1513,               // clz
            0x0ab5_1533,               // clmul
            0x3020_0073,               // mret
            0x1050_0073,               // wfi
            0x2805_0553,               // fmin.s
            0x5805_0553,               // fsqrt.s
            0x02b5_3553 | 0x0200_0000, // fadd.d
        ] {
            assert!(
                matches!(decode_word(raw, 0), Err(DecodeError::IllegalInstruction { .. })),
                "{raw:#x} should be illegal"
            );
        }
    }

    #[test]
    fn opclass_matches_mnemonic() {
        let i = decode_word(0x02b5_0533, 0).unwrap(); // mul a0,a0,a1
        assert_eq!(i.opclass(), OpClass::Mul);
        let i = decode_word(0x100525af, 0).unwrap(); // lr.w a1,(a0)
        assert_eq!(i.mnemonic, Mnemonic::LrW);
        assert_eq!(i.opclass(), OpClass::Amo);
    }
}
