//! Single-precision subset. Arithmetic rounds to nearest-even (the host's
//! native mode); NaN results are canonicalized; no exception flags.

use super::Mnemonic;

const CANONICAL_NAN: u32 = 0x7fc0_0000;

fn f(bits: u32) -> f32 {
    f32::from_bits(bits)
}

fn canon(v: f32) -> u32 {
    if v.is_nan() {
        CANONICAL_NAN
    } else {
        v.to_bits()
    }
}

fn round(v: f32, rm: u8) -> f32 {
    match rm {
        1 => v.trunc(),
        2 => v.floor(),
        3 => v.ceil(),
        4 => v.round(),
        _ => v.round_ties_even(),
    }
}

fn to_i32(v: f32, rm: u8) -> u32 {
    if v.is_nan() {
        return i32::MAX as u32;
    }
    let r = round(v, rm);
    if r >= 2147483648.0 {
        i32::MAX as u32
    } else if r < -2147483648.0 {
        i32::MIN as u32
    } else {
        r as i32 as u32
    }
}

fn to_u32(v: f32, rm: u8) -> u32 {
    if v.is_nan() {
        return u32::MAX;
    }
    let r = round(v, rm);
    if r >= 4294967296.0 {
        u32::MAX
    } else if r < 0.0 {
        0
    } else {
        r as u32
    }
}

/// Result bits of an FPU instruction (destination may be an FP or integer
/// register depending on the mnemonic).
pub(super) fn execute(m: Mnemonic, a: u32, b: u32, c: u32, rm: u8) -> u32 {
    use Mnemonic::*;
    match m {
        FaddS => canon(f(a) + f(b)),
        FsubS => canon(f(a) - f(b)),
        FmulS => canon(f(a) * f(b)),
        FdivS => canon(f(a) / f(b)),
        FmaddS => canon(f(a).mul_add(f(b), f(c))),
        FmsubS => canon(f(a).mul_add(f(b), -f(c))),
        FnmsubS => canon((-f(a)).mul_add(f(b), f(c))),
        FnmaddS => canon((-f(a)).mul_add(f(b), -f(c))),
        FsgnjS => (a & 0x7fff_ffff) | (b & 0x8000_0000),
        FsgnjnS => (a & 0x7fff_ffff) | (!b & 0x8000_0000),
        FsgnjxS => a ^ (b & 0x8000_0000),
        FmvXW | FmvWX => a,
        FcvtWS => to_i32(f(a), rm),
        FcvtWuS => to_u32(f(a), rm),
        FcvtSW => (a as i32 as f32).to_bits(),
        FcvtSWu => (a as f32).to_bits(),
        FeqS => (f(a) == f(b)) as u32,
        FltS => (f(a) < f(b)) as u32,
        FleS => (f(a) <= f(b)) as u32,
        _ => unreachable!("{m:?} is not an FPU operation"),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use Mnemonic::*;

    fn b(v: f32) -> u32 {
        v.to_bits()
    }

    #[test]
    fn arithmetic() {
        assert_eq!(execute(FaddS, b(1.5), b(2.25), 0, 0), b(3.75));
        assert_eq!(execute(FdivS, b(1.0), b(0.0), 0, 0), b(f32::INFINITY));
        assert_eq!(execute(FsubS, b(f32::INFINITY), b(f32::INFINITY), 0, 0), CANONICAL_NAN);
        assert_eq!(execute(FmaddS, b(2.0), b(3.0), b(1.0), 0), b(7.0));
        assert_eq!(execute(FnmaddS, b(2.0), b(3.0), b(1.0), 0), b(-7.0));
    }

    #[test]
    fn conversions_saturate() {
        assert_eq!(execute(FcvtWS, CANONICAL_NAN, 0, 0, 0), i32::MAX as u32);
        assert_eq!(execute(FcvtWS, b(-3e10), 0, 0, 0), i32::MIN as u32);
        assert_eq!(execute(FcvtWuS, b(-1.0), 0, 0, 0), 0);
        assert_eq!(execute(FcvtWS, b(2.5), 0, 0, 0), 2);
        assert_eq!(execute(FcvtWS, b(-2.5), 0, 0, 1), (-2i32) as u32);
        assert_eq!(execute(FcvtWuS, b(-0.5), 0, 0, 0), 0);
    }

    #[test]
    fn compares_with_nan_are_false() {
        assert_eq!(execute(FeqS, CANONICAL_NAN, CANONICAL_NAN, 0, 0), 0);
        assert_eq!(execute(FleS, b(1.0), b(1.0), 0, 0), 1);
        assert_eq!(execute(FltS, b(1.0), b(1.0), 0, 0), 0);
    }
}
