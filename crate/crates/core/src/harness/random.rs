//! Seeded random programs for differential testing against the reference
//! interpreter.
//!
//! Registers `x2` and `x8` hold the bases of two 4 KiB data windows and are
//! never overwritten, so every memory access stays aligned and in bounds.
//! Control flow only jumps forward, so every program terminates.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::isa::encode::{Assembler, Label};
use crate::isa::{decode, DecodedInst, Mnemonic, RawFetchWord};
use crate::program::{ProgramImage, Segment};

use super::kernels::{CODE_BASE, DATA_BASE};

const DATA_BYTES: u32 = 8192;
const BASES: [u8; 2] = [2, 8];

fn writable(rng: &mut ChaCha8Rng) -> u8 {
    loop {
        let r = rng.gen_range(0..32u8);
        if !BASES.contains(&r) && (r != 0 || rng.gen_bool(0.2)) {
            return r;
        }
    }
}

fn any_reg(rng: &mut ChaCha8Rng) -> u8 {
    rng.gen_range(0..32)
}

fn mem_operand(rng: &mut ChaCha8Rng, size: i32) -> (u8, i32) {
    let base = BASES[rng.gen_range(0..2)];
    let off = rng.gen_range(-2048 / size..2048 / size) * size;
    (base, off)
}

/// A random legal compressed instruction that neither transfers control
/// nor disturbs the base registers.
fn compressed(rng: &mut ChaCha8Rng, fpu: bool) -> u16 {
    loop {
        let half: u16 = rng.gen();
        if half & 3 == 3 {
            continue;
        }
        let mut bytes = [0u8; 8];
        bytes[..2].copy_from_slice(&half.to_le_bytes());
        let Ok(inst) = decode(&RawFetchWord::new(bytes, 0), 0) else { continue };
        let class = inst.opclass();
        if class.is_control() || inst.mnemonic == Mnemonic::Ebreak || (inst.needs_fpu() && !fpu) {
            continue;
        }
        if inst.dest().is_some_and(|d| matches!(d, crate::isa::Reg::X(r) if BASES.contains(&r))) {
            continue;
        }
        if class.is_memory() && !BASES.contains(&inst.rs1) {
            continue;
        }
        return half;
    }
}

fn fp_op(rng: &mut ChaCha8Rng, a: &mut Assembler) {
    use Mnemonic::*;
    let f = |rng: &mut ChaCha8Rng| rng.gen_range(0..32u8);
    match rng.gen_range(0..9) {
        0 => {
            let (b, off) = mem_operand(rng, 4);
            a.load(Flw, f(rng), b, off);
        }
        1 => {
            let (b, off) = mem_operand(rng, 4);
            a.store(Fsw, f(rng), b, off);
        }
        2 | 3 => {
            let m = [FaddS, FsubS, FmulS, FdivS, FsgnjS, FsgnjnS, FsgnjxS][rng.gen_range(0..7)];
            a.op(m, f(rng), f(rng), f(rng));
        }
        4 => {
            let m = [FmaddS, FmsubS, FnmsubS, FnmaddS][rng.gen_range(0..4)];
            let mut i = DecodedInst::new(m, f(rng), f(rng), f(rng), 0);
            i.rs3 = Some(f(rng));
            a.emit(i);
        }
        5 => {
            let m = [FeqS, FltS, FleS][rng.gen_range(0..3)];
            a.op(m, writable(rng), f(rng), f(rng));
        }
        6 => {
            let m = [FcvtWS, FcvtWuS, FmvXW][rng.gen_range(0..3)];
            a.op(m, writable(rng), f(rng), 0);
        }
        _ => {
            let m = [FcvtSW, FcvtSWu, FmvWX][rng.gen_range(0..3)];
            a.op(m, f(rng), any_reg(rng), 0);
        }
    }
}

fn amo(rng: &mut ChaCha8Rng, a: &mut Assembler) {
    use Mnemonic::*;
    let (base, off) = mem_operand(rng, 4);
    let addr = writable(rng).max(1);
    a.opi(Addi, addr, base, off);
    let m = [LrW, ScW, AmoswapW, AmoaddW, AmoxorW, AmoandW, AmoorW, AmominW, AmomaxW, AmominuW, AmomaxuW]
        [rng.gen_range(0..11)];
    if m == LrW {
        a.op(LrW, writable(rng), addr, 0);
        if rng.gen_bool(0.7) {
            let other = if rng.gen_bool(0.8) { addr } else { writable(rng).max(1) };
            a.op(ScW, writable(rng), other, any_reg(rng));
        }
    } else {
        a.op(m, writable(rng), addr, any_reg(rng));
    }
}

/// Knobs for [`random_program_with`].
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct RandomOptions {
    /// Emit FP operations.
    pub fpu: bool,
    /// Emit `cycle`/`time`/`instret` reads. Their values depend on timing, so
    /// programs that read them may take different paths on different cores.
    pub counters: bool,
}

/// Generates a program of `len` random operations (a few expand to two or
/// three instructions) followed by `ebreak`. FP operations appear only when
/// `fpu` is set.
pub fn random_program(seed: u64, len: usize, fpu: bool) -> ProgramImage {
    random_program_with(seed, len, RandomOptions { fpu, counters: true })
}

pub fn random_program_with(seed: u64, len: usize, opts: RandomOptions) -> ProgramImage {
    use Mnemonic::*;
    let fpu = opts.fpu;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut a = Assembler::new(CODE_BASE);
    a.li(2, DATA_BASE + 2048);
    a.li(8, DATA_BASE + 6144);
    for r in [1u8, 5, 6, 7, 10, 11, 12, 13, 14, 15] {
        a.li(r, rng.gen());
    }
    if fpu {
        for f in 0..8u8 {
            let bits: u32 = if rng.gen_bool(0.7) { rng.gen_range(0x3c00_0000..0x4400_0000) } else { rng.gen() };
            a.li(5, bits);
            a.op(FmvWX, f, 5, 0);
        }
    }

    // Forward labels, each bound just before the op with the given index.
    let mut pending: Vec<(usize, Label)> = Vec::new();
    let target = |rng: &mut ChaCha8Rng, i: usize, a: &mut Assembler, pending: &mut Vec<(usize, Label)>| {
        let l = a.new_label();
        pending.push(((i + rng.gen_range(1..8)).min(len), l));
        l
    };

    for i in 0..len {
        pending.retain(|&(at, l)| {
            if at == i {
                a.bind(l);
            }
            at != i
        });
        match rng.gen_range(0..100) {
            0..=21 => {
                let m = [Add, Sub, Sll, Slt, Sltu, Xor, Srl, Sra, Or, And][rng.gen_range(0..10)];
                a.op(m, writable(&mut rng), any_reg(&mut rng), any_reg(&mut rng));
            }
            22..=37 => {
                let rd = writable(&mut rng);
                let rs = any_reg(&mut rng);
                match rng.gen_range(0..9) {
                    0 => a.opi(Lui, rd, 0, rng.gen::<i32>() & !0xfff),
                    1 => a.opi(Auipc, rd, 0, rng.gen::<i32>() & !0xfff),
                    k @ 2..=4 => a.opi([Slli, Srli, Srai][k - 2], rd, rs, rng.gen_range(0..32)),
                    k => a.opi([Addi, Slti, Sltiu, Xori, Ori, Andi][k - 3], rd, rs, rng.gen_range(-2048..2048)),
                }
            }
            38..=45 => {
                let m = [Mul, Mulh, Mulhsu, Mulhu, Div, Divu, Rem, Remu][rng.gen_range(0..8)];
                a.op(m, writable(&mut rng), any_reg(&mut rng), any_reg(&mut rng));
            }
            46..=55 => {
                let (m, size) = [(Lb, 1), (Lh, 2), (Lw, 4), (Lbu, 1), (Lhu, 2)][rng.gen_range(0..5)];
                let (b, off) = mem_operand(&mut rng, size);
                a.load(m, writable(&mut rng), b, off);
            }
            56..=63 => {
                let (m, size) = [(Sb, 1), (Sh, 2), (Sw, 4)][rng.gen_range(0..3)];
                let (b, off) = mem_operand(&mut rng, size);
                a.store(m, any_reg(&mut rng), b, off);
            }
            64..=72 => a.emit_compressed(compressed(&mut rng, fpu)),
            73..=78 => {
                let m = [Beq, Bne, Blt, Bge, Bltu, Bgeu][rng.gen_range(0..6)];
                let l = target(&mut rng, i, &mut a, &mut pending);
                a.branch(m, any_reg(&mut rng), any_reg(&mut rng), l);
            }
            79..=80 => {
                let l = target(&mut rng, i, &mut a, &mut pending);
                let rd = if rng.gen_bool(0.5) { 0 } else { writable(&mut rng) };
                a.jal(rd, l);
            }
            81 => {
                // auipc + jalr over 0-3 filler words.
                let skip = rng.gen_range(0..4);
                let t = writable(&mut rng).max(1);
                a.opi(Auipc, t, 0, 0);
                a.opi(Jalr, writable(&mut rng), t, 8 + 4 * skip);
                for _ in 0..skip {
                    a.opi(Addi, writable(&mut rng), any_reg(&mut rng), 1);
                }
            }
            82..=83 if opts.counters => {
                let csr = [0xc00, 0xc01, 0xc02][rng.gen_range(0..3)];
                a.opi(Csrrs, writable(&mut rng), 0, csr);
            }
            82..=83 => a.op(Xor, writable(&mut rng), any_reg(&mut rng), any_reg(&mut rng)),
            84..=88 => amo(&mut rng, &mut a),
            89 => a.opi(Fence, 0, 0, 0x0ff),
            _ if fpu => fp_op(&mut rng, &mut a),
            _ => a.op(Add, writable(&mut rng), any_reg(&mut rng), any_reg(&mut rng)),
        }
    }
    for (_, l) in pending {
        a.bind(l);
    }
    a.ebreak();

    let mut data = vec![0u8; DATA_BYTES as usize];
    rng.fill(&mut data[..]);
    ProgramImage {
        segments: vec![Segment { addr: CODE_BASE, bytes: a.finish() }, Segment { addr: DATA_BASE, bytes: data }],
        entry_pc: CODE_BASE,
        tohost_addr: None,
    }
}
