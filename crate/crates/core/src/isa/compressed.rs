//! RV32C expansion. Every accepted 16-bit encoding becomes the `DecodedInst`
//! of its 32-bit equivalent with `size == 2`.

use super::decode::DecodeError;
use super::{DecodedInst, Mnemonic};

fn bit(raw: u16, i: u32) -> u32 {
    ((raw >> i) & 1) as u32
}

fn bits(raw: u16, hi: u32, lo: u32) -> u32 {
    ((raw as u32) >> lo) & ((1 << (hi - lo + 1)) - 1)
}

fn sext(v: u32, width: u32) -> i32 {
    let shift = 32 - width;
    ((v << shift) as i32) >> shift
}

/// Registers x8..x15 addressed by the 3-bit fields.
fn creg(v: u32) -> u8 {
    (v + 8) as u8
}

pub(super) fn decode_compressed(raw: u16, pc: u32) -> Result<DecodedInst, DecodeError> {
    use Mnemonic::*;
    let illegal = Err(DecodeError::IllegalInstruction { raw: raw as u32 });
    let mk = |m: Mnemonic, rd: u8, rs1: u8, rs2: u8, imm: i32| {
        Ok(DecodedInst { pc, raw: raw as u32, size: 2, mnemonic: m, rd, rs1, rs2, rs3: None, imm, rm: 0 })
    };
    let f3 = bits(raw, 15, 13);
    let rd_full = bits(raw, 11, 7) as u8;
    let rs2_full = bits(raw, 6, 2) as u8;
    let rdp = creg(bits(raw, 4, 2));
    let rs1p = creg(bits(raw, 9, 7));
    let imm6 = sext(bit(raw, 12) << 5 | bits(raw, 6, 2), 6);

    match (raw & 3, f3) {
        (0, 0) => {
            let nzuimm = bits(raw, 12, 11) << 4 | bits(raw, 10, 7) << 6 | bit(raw, 6) << 2 | bit(raw, 5) << 3;
            if nzuimm == 0 {
                return illegal;
            }
            mk(Addi, rdp, 2, 0, nzuimm as i32)
        }
        (0, 2) | (0, 3) | (0, 6) | (0, 7) => {
            let uimm = (bits(raw, 12, 10) << 3 | bit(raw, 6) << 2 | bit(raw, 5) << 6) as i32;
            match f3 {
                2 => mk(Lw, rdp, rs1p, 0, uimm),
                3 => mk(Flw, rdp, rs1p, 0, uimm),
                6 => mk(Sw, 0, rs1p, rdp, uimm),
                _ => mk(Fsw, 0, rs1p, rdp, uimm),
            }
        }
        (0, _) => illegal,

        (1, 0) => mk(Addi, rd_full, rd_full, 0, imm6),
        (1, 1) | (1, 5) => {
            let off = bit(raw, 12) << 11
                | bit(raw, 11) << 4
                | bits(raw, 10, 9) << 8
                | bit(raw, 8) << 10
                | bit(raw, 7) << 6
                | bit(raw, 6) << 7
                | bits(raw, 5, 3) << 1
                | bit(raw, 2) << 5;
            let link = if f3 == 1 { 1 } else { 0 };
            mk(Jal, link, 0, 0, sext(off, 12))
        }
        (1, 2) => mk(Addi, rd_full, 0, 0, imm6),
        (1, 3) if rd_full == 2 => {
            let nz = bit(raw, 12) << 9 | bit(raw, 6) << 4 | bit(raw, 5) << 6 | bits(raw, 4, 3) << 7 | bit(raw, 2) << 5;
            if nz == 0 {
                return illegal;
            }
            mk(Addi, 2, 2, 0, sext(nz, 10))
        }
        (1, 3) => {
            let nz = bit(raw, 12) << 17 | bits(raw, 6, 2) << 12;
            if nz == 0 {
                return illegal;
            }
            mk(Lui, rd_full, 0, 0, sext(nz, 18))
        }
        (1, 4) => match bits(raw, 11, 10) {
            0 | 1 if bit(raw, 12) == 1 => illegal,
            0 => mk(Srli, rs1p, rs1p, 0, bits(raw, 6, 2) as i32),
            1 => mk(Srai, rs1p, rs1p, 0, bits(raw, 6, 2) as i32),
            2 => mk(Andi, rs1p, rs1p, 0, imm6),
            _ if bit(raw, 12) == 1 => illegal,
            _ => {
                let m = match bits(raw, 6, 5) {
                    0 => Sub,
                    1 => Xor,
                    2 => Or,
                    _ => And,
                };
                mk(m, rs1p, rs1p, rdp, 0)
            }
        },
        (1, 6) | (1, 7) => {
            let off = bit(raw, 12) << 8
                | bits(raw, 11, 10) << 3
                | bits(raw, 6, 5) << 6
                | bits(raw, 4, 3) << 1
                | bit(raw, 2) << 5;
            let m = if f3 == 6 { Beq } else { Bne };
            mk(m, 0, rs1p, 0, sext(off, 9))
        }

        (2, 0) => {
            if bit(raw, 12) == 1 {
                return illegal;
            }
            mk(Slli, rd_full, rd_full, 0, rs2_full as i32)
        }
        (2, 2) | (2, 3) => {
            let uimm = (bit(raw, 12) << 5 | bits(raw, 6, 4) << 2 | bits(raw, 3, 2) << 6) as i32;
            if f3 == 2 {
                if rd_full == 0 {
                    return illegal;
                }
                mk(Lw, rd_full, 2, 0, uimm)
            } else {
                mk(Flw, rd_full, 2, 0, uimm)
            }
        }
        (2, 4) => match (bit(raw, 12), rd_full, rs2_full) {
            (0, 0, 0) => illegal,
            (0, rs1, 0) => mk(Jalr, 0, rs1, 0, 0),
            (0, rd, rs2) => mk(Add, rd, 0, rs2, 0),
            (_, 0, 0) => mk(Ebreak, 0, 0, 0, 0),
            (_, rs1, 0) => mk(Jalr, 1, rs1, 0, 0),
            (_, rd, rs2) => mk(Add, rd, rd, rs2, 0),
        },
        (2, 6) | (2, 7) => {
            let uimm = (bits(raw, 12, 9) << 2 | bits(raw, 8, 7) << 6) as i32;
            let m = if f3 == 6 { Sw } else { Fsw };
            mk(m, 0, 2, rs2_full, uimm)
        }
        (2, _) => illegal,
        _ => unreachable!("32-bit encodings are not routed here"),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn quadrant_samples() {
        // c.addi4spn a0, sp, 16
        let i = decode_compressed(0x0808, 0).unwrap();
        assert_eq!((i.mnemonic, i.rd, i.rs1, i.imm), (Mnemonic::Addi, 10, 2, 16));
        // c.lw a1, 4(a0)
        let i = decode_compressed(0x414c, 0).unwrap();
        assert_eq!((i.mnemonic, i.rd, i.rs1, i.imm), (Mnemonic::Lw, 11, 10, 4));
        // c.j -2
        let i = decode_compressed(0xbffd, 0).unwrap();
        assert_eq!((i.mnemonic, i.rd, i.imm), (Mnemonic::Jal, 0, -2));
        // c.addi sp, -32
        let i = decode_compressed(0x1101, 0).unwrap();
        assert_eq!((i.mnemonic, i.rd, i.rs1, i.imm), (Mnemonic::Addi, 2, 2, -32));
        // c.addi16sp sp, -32
        let i = decode_compressed(0x713d, 0).unwrap();
        assert_eq!((i.mnemonic, i.rd, i.rs1, i.imm), (Mnemonic::Addi, 2, 2, -32));
        // c.ebreak
        assert_eq!(decode_compressed(0x9002, 0).unwrap().mnemonic, Mnemonic::Ebreak);
        // c.jr ra
        let i = decode_compressed(0x8082, 0).unwrap();
        assert_eq!((i.mnemonic, i.rd, i.rs1), (Mnemonic::Jalr, 0, 1));
    }

    #[test]
    fn reserved_encodings() {
        for raw in [
            0x0000u16, 0x4002, /* c.lwsp x0 */
            0x8002, /* c.jr x0 */
            0x6101, /* c.addi16sp 0 */
            0x1002, /* c.slli shamt[5] */
            0x2000, /* c.fld */
        ] {
            assert!(decode_compressed(raw, 0).is_err(), "{raw:#06x}");
        }
    }
}
