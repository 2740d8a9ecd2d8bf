//! Bundled benchmark kernels, generated directly as machine code.
//!
//! Every kernel brackets its timed section with ROI marker stores (1 to
//! begin, 2 to end) and exits with `ebreak`. Code lives at [`CODE_BASE`],
//! data at [`DATA_BASE`].

use std::fmt;
use std::str::FromStr;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;
use thiserror::Error;

use crate::engine::ROI_MARKER_ADDR;
use crate::isa::encode::{reg::*, Assembler};
use crate::isa::{DecodedInst, Mnemonic};
use crate::program::{ProgramImage, Segment};

pub const CODE_BASE: u32 = 0x8000_0000;
pub const DATA_BASE: u32 = 0x8010_0000;

/// Largest straight-line body (in instructions) for `ilp` and `dep_pairs`;
/// keeps the code below the ROI marker page.
pub const MAX_STRAIGHT_OPS: u32 = 12_288;

/// Filler instructions between consecutive executions of the branch under
/// test in `branch_periodic`, so that each instance retires (and trains the
/// predictor) before the next one is fetched.
pub const BRANCH_PADDING: usize = 20;

const MARKER: u8 = S1;

#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum KernelKind {
    Ilp,
    WawChain,
    /// Periodic outcome pattern of the branch under test (`true` = taken).
    BranchPeriodic(Vec<bool>),
    PointerChase,
    StreamCopy,
    StreamScale,
    StreamAdd,
    StreamTriad,
    Gather,
    Scatter,
    /// One chain of dependent ALU ops, written as pairs: each op reads the
    /// previous op's result, so with same-cycle forwarding every issue pair
    /// is a producer and its consumer.
    DepPairs,
    /// FPU adds interleaved with ALU ops that land in issue slot 1.
    FpuMix,
    /// `FpuMix` with the FPU ops removed.
    FpuMixNoFp,
}

#[derive(Debug, Error, PartialEq, Eq)]
pub enum KernelError {
    #[error("unknown kernel `{0}`")]
    UnknownKernel(String),
    #[error("invalid parameters for {kernel}: {reason}")]
    InvalidParams { kernel: String, reason: String },
}

impl KernelKind {
    /// The pattern used by `branch_periodic(p)`: taken `p - 1` times, then
    /// not taken once (`T` for `p = 1`).
    pub fn branch_period(p: usize) -> KernelKind {
        let mut pat = vec![true; p];
        if p > 1 {
            pat[p - 1] = false;
        }
        KernelKind::BranchPeriodic(pat)
    }

    /// The kernels with fixed names, in canonical order.
    pub fn standard() -> Vec<KernelKind> {
        use KernelKind::*;
        vec![
            Ilp,
            WawChain,
            KernelKind::branch_period(3),
            PointerChase,
            StreamCopy,
            StreamScale,
            StreamAdd,
            StreamTriad,
            Gather,
            Scatter,
            DepPairs,
            FpuMix,
            FpuMixNoFp,
        ]
    }

    /// The sequential- and random-access memory kernels.
    pub fn bandwidth_suite() -> Vec<KernelKind> {
        use KernelKind::*;
        vec![StreamCopy, StreamScale, StreamAdd, StreamTriad, Gather, Scatter]
    }

    pub fn is_sequential(&self) -> bool {
        use KernelKind::*;
        matches!(self, StreamCopy | StreamScale | StreamAdd | StreamTriad)
    }

    pub fn uses_fpu(&self) -> bool {
        matches!(self, KernelKind::FpuMix)
    }

    pub fn default_params(&self) -> KernelParams {
        use KernelKind::*;
        let iterations = match self {
            Ilp | DepPairs => 1000,
            WawChain | FpuMix | FpuMixNoFp => 500,
            BranchPeriodic(_) => 3000,
            PointerChase => 2000,
            _ => 1,
        };
        KernelParams { working_set_bytes: 65_536, iterations, seed: 1 }
    }
}

impl fmt::Display for KernelKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        use KernelKind::*;
        let name = match self {
            Ilp => "ilp",
            WawChain => "waw_chain",
            BranchPeriodic(pat) => {
                let s: String = pat.iter().map(|&t| if t { 'T' } else { 'N' }).collect();
                return write!(f, "branch_periodic({s})");
            }
            PointerChase => "pointer_chase",
            StreamCopy => "stream_copy",
            StreamScale => "stream_scale",
            StreamAdd => "stream_add",
            StreamTriad => "stream_triad",
            Gather => "gather",
            Scatter => "scatter",
            DepPairs => "dep_pairs",
            FpuMix => "fpu_mix",
            FpuMixNoFp => "fpu_mix_nofp",
        };
        f.write_str(name)
    }
}

impl FromStr for KernelKind {
    type Err = KernelError;

    /// Accepts the display names; `branch_periodic(p)` takes either a period
    /// (`3` means `TTN`) or an explicit `T`/`N` pattern.
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        use KernelKind::*;
        let unknown = || KernelError::UnknownKernel(s.to_string());
        Ok(match s {
            "ilp" => Ilp,
            "waw_chain" => WawChain,
            "pointer_chase" => PointerChase,
            "stream_copy" => StreamCopy,
            "stream_scale" => StreamScale,
            "stream_add" => StreamAdd,
            "stream_triad" => StreamTriad,
            "gather" => Gather,
            "scatter" => Scatter,
            "dep_pairs" => DepPairs,
            "fpu_mix" => FpuMix,
            "fpu_mix_nofp" => FpuMixNoFp,
            "branch_periodic" => KernelKind::branch_period(3),
            _ => {
                let arg = s.strip_prefix("branch_periodic(").and_then(|r| r.strip_suffix(')')).ok_or_else(unknown)?;
                if let Ok(p) = arg.parse::<usize>() {
                    if !(1..=32).contains(&p) {
                        return Err(unknown());
                    }
                    KernelKind::branch_period(p)
                } else {
                    let pat = arg
                        .chars()
                        .map(|c| match c.to_ascii_uppercase() {
                            'T' => Ok(true),
                            'N' => Ok(false),
                            _ => Err(unknown()),
                        })
                        .collect::<Result<Vec<_>, _>>()?;
                    if pat.is_empty() || pat.len() > 32 {
                        return Err(unknown());
                    }
                    BranchPeriodic(pat)
                }
            }
        })
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize)]
pub struct KernelParams {
    pub working_set_bytes: u32,
    pub iterations: u32,
    pub seed: u64,
}

/// Array lengths (in 32-bit words) of a stream kernel and how many arrays
/// it touches.
pub fn stream_geometry(kind: &KernelKind, working_set_bytes: u32) -> Option<(u32, u32)> {
    let arrays = match kind {
        KernelKind::StreamCopy | KernelKind::StreamScale => 2,
        KernelKind::StreamAdd | KernelKind::StreamTriad => 3,
        _ => return None,
    };
    let n = working_set_bytes / (4 * arrays) / 16 * 16;
    Some((n, arrays))
}

/// Sizes in bytes of the index, value and table regions of gather/scatter.
pub fn indexed_geometry(working_set_bytes: u32) -> (u32, u32, u32) {
    (working_set_bytes / 4, working_set_bytes / 4, working_set_bytes / 2)
}

/// The index stream of gather/scatter: `n` word indices into a table of
/// `table_words` entries, fixed by the seed.
pub fn index_stream(seed: u64, n: u32, table_words: u32) -> Vec<u32> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..n).map(|_| rng.gen_range(0..table_words)).collect()
}

struct Builder {
    a: Assembler,
    data: Vec<u8>,
}

impl Builder {
    fn new() -> Self {
        let mut a = Assembler::new(CODE_BASE);
        a.li(MARKER, ROI_MARKER_ADDR);
        Builder { a, data: Vec::new() }
    }

    fn marker(&mut self, value: i32) {
        self.a.opi(Mnemonic::Addi, T2, ZERO, value);
        self.a.store(Mnemonic::Sw, T2, MARKER, 0);
    }

    fn roi_begin(&mut self) {
        self.marker(1);
    }

    fn finish(mut self) -> ProgramImage {
        self.marker(2);
        self.a.ebreak();
        let mut segments = vec![Segment { addr: CODE_BASE, bytes: self.a.finish() }];
        if !self.data.is_empty() {
            segments.push(Segment { addr: DATA_BASE, bytes: self.data });
        }
        ProgramImage { segments, entry_pc: CODE_BASE, tohost_addr: None }
    }

    /// `body` runs once to warm the instruction cache and once inside the ROI.
    fn twice(&mut self, body: impl FnOnce(&mut Assembler)) {
        let a = &mut self.a;
        let sub = a.new_label();
        let after = a.new_label();
        a.jal(RA, sub);
        self.marker(1);
        let a = &mut self.a;
        a.jal(RA, sub);
        a.jal(ZERO, after);
        a.bind(sub);
        body(a);
        a.opi(Mnemonic::Jalr, ZERO, RA, 0);
        a.bind(after);
    }

    /// A counted loop: `count` iterations of `body`, counter in `T0`.
    fn counted(&mut self, count: u32, body: impl FnOnce(&mut Assembler)) {
        let a = &mut self.a;
        a.li(T0, count);
        let top = a.here();
        body(a);
        a.opi(Mnemonic::Addi, T0, T0, -1);
        a.branch(Mnemonic::Bne, T0, ZERO, top);
    }
}

fn invalid(kind: &KernelKind, reason: impl Into<String>) -> KernelError {
    KernelError::InvalidParams { kernel: kind.to_string(), reason: reason.into() }
}

/// Emits the machine-code image of `kind`.
pub fn generate_kernel(kind: &KernelKind, params: &KernelParams) -> Result<ProgramImage, KernelError> {
    use KernelKind::*;
    let it = params.iterations;
    if it == 0 {
        return Err(invalid(kind, "iterations must be positive"));
    }
    let ws = params.working_set_bytes;
    let needs_ws = matches!(kind, PointerChase | StreamCopy | StreamScale | StreamAdd | StreamTriad | Gather | Scatter);
    if needs_ws && (ws < 1024 || !ws.is_multiple_of(64) || ws > 64 << 20) {
        return Err(invalid(kind, "working set must be a multiple of 64 bytes between 1 KiB and 64 MiB"));
    }
    if matches!(kind, Ilp | DepPairs) && it > MAX_STRAIGHT_OPS {
        return Err(invalid(kind, format!("at most {MAX_STRAIGHT_OPS} operations")));
    }

    let mut b = Builder::new();
    match kind {
        Ilp => {
            b.twice(|a| {
                for i in 0..it {
                    let r = 10 + (i % 16) as u8;
                    a.opi(Mnemonic::Addi, r, r, 1);
                }
            });
        }
        DepPairs => {
            b.twice(|a| {
                for _ in 0..it {
                    a.opi(Mnemonic::Addi, A1, A0, 1);
                    a.opi(Mnemonic::Addi, A0, A1, 1);
                }
            });
        }
        WawChain => {
            b.a.li(S2, 3);
            b.a.li(S3, 5);
            b.roi_begin();
            b.counted(it, |a| {
                for g in 0..8u8 {
                    let (x, acc) = (10 + 2 * (g % 4), 11 + 2 * (g % 4));
                    a.op(Mnemonic::Mul, x, S2, S3);
                    a.opi(Mnemonic::Addi, x, S4, 1);
                    a.op(Mnemonic::Add, acc, x, acc);
                }
            });
        }
        BranchPeriodic(pat) => {
            let p = pat.len();
            let len = (32 / p * p) as i32;
            let mut mask = 0u32;
            for j in 0..len as usize {
                if pat[j % p] {
                    mask |= 1 << j;
                }
            }
            b.a.li(A0, mask);
            b.roi_begin();
            b.counted(it, |a| {
                let skip = a.new_label();
                a.opi(Mnemonic::Andi, T1, A0, 1);
                a.opi(Mnemonic::Srli, A0, A0, 1);
                a.opi(Mnemonic::Slli, T3, T1, len - 1);
                a.op(Mnemonic::Or, A0, A0, T3);
                a.branch(Mnemonic::Bne, T1, ZERO, skip);
                a.opi(Mnemonic::Addi, A1, A1, 1);
                a.bind(skip);
                for i in 0..BRANCH_PADDING {
                    let r = 12 + (i % 6) as u8;
                    a.opi(Mnemonic::Addi, r, r, 1);
                }
            });
        }
        PointerChase => {
            let nodes = (ws / 64) as usize;
            let mut order: Vec<u32> = (0..nodes as u32).collect();
            order.shuffle(&mut ChaCha8Rng::seed_from_u64(params.seed));
            b.data = vec![0; ws as usize];
            for i in 0..nodes {
                let (from, to) = (order[i], order[(i + 1) % nodes]);
                let at = from as usize * 64;
                b.data[at..at + 4].copy_from_slice(&(DATA_BASE + to * 64).to_le_bytes());
            }
            b.a.li(A0, DATA_BASE + order[0] * 64);
            b.roi_begin();
            b.counted(it, |a| a.load(Mnemonic::Lw, A0, A0, 0));
        }
        StreamCopy | StreamScale | StreamAdd | StreamTriad => {
            let (n, arrays) = stream_geometry(kind, ws).expect("stream kernel");
            if n == 0 {
                return Err(invalid(kind, "working set too small"));
            }
            let mut rng = ChaCha8Rng::seed_from_u64(params.seed);
            b.data = (0..n * arrays * 4).map(|_| rng.gen()).collect();
            let bytes = n * 4;
            // Array bases: a, b, c; two-array kernels use the first two slots
            // for their (source, destination) pair.
            let (src0, src1, dst) = match kind {
                StreamCopy => (0, None, 1),
                StreamScale => (1, None, 0),
                StreamAdd => (0, Some(1), 2),
                _ => (1, Some(2), 0),
            };
            b.a.li(S4, 3);
            b.roi_begin();
            b.counted(it, |a| {
                a.li(S2, DATA_BASE + src0 * bytes);
                a.li(S3, DATA_BASE + src1.unwrap_or(0) * bytes);
                a.li(S5, DATA_BASE + dst * bytes);
                a.li(S6, DATA_BASE + (dst + 1) * bytes);
                let top = a.here();
                for k in 0..4 {
                    let off = 4 * k;
                    let (x, y) = (10 + k as u8, 14 + k as u8);
                    a.load(Mnemonic::Lw, x, S2, off);
                    match kind {
                        StreamCopy => {}
                        StreamScale => a.op(Mnemonic::Mul, x, x, S4),
                        StreamAdd => {
                            a.load(Mnemonic::Lw, y, S3, off);
                            a.op(Mnemonic::Add, x, x, y);
                        }
                        _ => {
                            a.load(Mnemonic::Lw, y, S3, off);
                            a.op(Mnemonic::Mul, y, y, S4);
                            a.op(Mnemonic::Add, x, x, y);
                        }
                    }
                }
                for k in 0..4 {
                    a.store(Mnemonic::Sw, 10 + k as u8, S5, 4 * k);
                }
                a.opi(Mnemonic::Addi, S2, S2, 16);
                if src1.is_some() {
                    a.opi(Mnemonic::Addi, S3, S3, 16);
                }
                a.opi(Mnemonic::Addi, S5, S5, 16);
                a.branch(Mnemonic::Bne, S5, S6, top);
            });
        }
        Gather | Scatter => {
            let (idx_bytes, x_bytes, table_bytes) = indexed_geometry(ws);
            let n = idx_bytes / 4;
            let (idx_base, x_base, table_base) = (DATA_BASE, DATA_BASE + idx_bytes, DATA_BASE + idx_bytes + x_bytes);
            let idx = index_stream(params.seed, n, table_bytes / 4);
            let mut rng = ChaCha8Rng::seed_from_u64(params.seed ^ 0x5eed);
            b.data = (0..ws).map(|_| rng.gen()).collect();
            for (i, &j) in idx.iter().enumerate() {
                b.data[4 * i..4 * i + 4].copy_from_slice(&j.to_le_bytes());
            }
            b.a.li(S4, table_base);
            b.roi_begin();
            b.counted(it, |a| {
                a.li(S2, idx_base);
                a.li(S3, x_base);
                a.li(S6, x_base);
                let top = a.here();
                for k in 0..4 {
                    a.load(Mnemonic::Lw, 10 + k, S2, 4 * k as i32);
                }
                for k in 0..4 {
                    a.opi(Mnemonic::Slli, 10 + k, 10 + k, 2);
                    a.op(Mnemonic::Add, 10 + k, 10 + k, S4);
                }
                if *kind == Gather {
                    for k in 0..4 {
                        a.load(Mnemonic::Lw, 14 + k, 10 + k, 0);
                    }
                    for k in 0..4 {
                        a.store(Mnemonic::Sw, 14 + k, S3, 4 * k as i32);
                    }
                } else {
                    for k in 0..4 {
                        a.load(Mnemonic::Lw, 14 + k, S3, 4 * k as i32);
                    }
                    for k in 0..4 {
                        a.store(Mnemonic::Sw, 14 + k, 10 + k, 0);
                    }
                }
                a.opi(Mnemonic::Addi, S2, S2, 16);
                a.opi(Mnemonic::Addi, S3, S3, 16);
                a.branch(Mnemonic::Bne, S2, S6, top);
            });
        }
        FpuMix | FpuMixNoFp => {
            let fp = *kind == FpuMix;
            if fp {
                b.a.li(T1, 0x3f80_0000);
                for f in 1..8 {
                    b.a.op(Mnemonic::FmvWX, f, T1, 0);
                }
            }
            b.roi_begin();
            b.counted(it, |a| {
                for g in 0..4u8 {
                    if fp {
                        a.emit(DecodedInst::new(Mnemonic::FaddS, 1 + g, 1 + g, 5, 0));
                    }
                    for k in 0..5u8 {
                        let r = 10 + k;
                        a.opi(Mnemonic::Addi, r, r, 1);
                    }
                }
            });
        }
    }
    Ok(b.finish())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn names_round_trip() {
        for k in KernelKind::standard() {
            assert_eq!(k.to_string().parse::<KernelKind>().unwrap(), k);
        }
        assert_eq!("branch_periodic(3)".parse::<KernelKind>().unwrap().to_string(), "branch_periodic(TTN)");
        assert_eq!("branch_periodic(tnn)".parse::<KernelKind>().unwrap().to_string(), "branch_periodic(TNN)");
        assert!("branch_periodic(0)".parse::<KernelKind>().is_err());
        assert!("nope".parse::<KernelKind>().is_err());
    }

    #[test]
    fn stream_copy_at_twice_the_cache_touches_the_working_set() {
        let (n, arrays) = stream_geometry(&KernelKind::StreamCopy, 65_536).unwrap();
        assert_eq!(n * 4 * arrays, 65_536);
        let img = generate_kernel(&KernelKind::StreamCopy, &KernelKind::StreamCopy.default_params()).unwrap();
        assert_eq!(img.segments[1].bytes.len(), 65_536);
    }

    #[test]
    fn indexed_regions_sum_to_the_working_set() {
        let (i, x, t) = indexed_geometry(65_536);
        assert_eq!(i + x + t, 65_536);
        let img = generate_kernel(&KernelKind::Gather, &KernelKind::Gather.default_params()).unwrap();
        assert_eq!(img.segments[1].bytes.len(), 65_536);
    }

    #[test]
    fn index_stream_is_seeded() {
        assert_eq!(index_stream(7, 64, 100), index_stream(7, 64, 100));
        assert_ne!(index_stream(7, 64, 100), index_stream(8, 64, 100));
        assert!(index_stream(3, 1000, 10).iter().all(|&i| i < 10));
    }

    #[test]
    fn rejects_bad_params() {
        let mut p = KernelKind::Gather.default_params();
        p.working_set_bytes = 1000;
        assert!(matches!(generate_kernel(&KernelKind::Gather, &p), Err(KernelError::InvalidParams { .. })));
        p = KernelKind::Ilp.default_params();
        p.iterations = 0;
        assert!(generate_kernel(&KernelKind::Ilp, &p).is_err());
        p.iterations = MAX_STRAIGHT_OPS + 1;
        assert!(generate_kernel(&KernelKind::Ilp, &p).is_err());
    }
}
