use thiserror::Error;

use crate::isa::{ArchState, Memory, RetireRecord};
use crate::issue::{ArchRegs, Retired};

#[derive(Clone, Debug, PartialEq, Eq, Error)]
#[error("divergence at cycle {cycle}, pc {pc:#010x}: {field} expected {expected}, got {actual}")]
pub struct Divergence {
    pub cycle: u64,
    pub pc: u32,
    pub field: String,
    pub expected: String,
    pub actual: String,
}

/// Reference interpreter stepped once per retirement.
#[derive(Clone, Debug)]
pub struct Cosim {
    reference: ArchState,
    pub compared: u64,
}

fn first_difference(want: &RetireRecord, got: &RetireRecord) -> Option<(&'static str, String, String)> {
    macro_rules! cmp {
        ($($f:ident),*) => {$(
            if want.$f != got.$f {
                return Some((stringify!($f), format!("{:?}", want.$f), format!("{:?}", got.$f)));
            }
        )*};
    }
    cmp!(pc, raw, mnemonic, rd, wb_value, mem_addr, mem_data, is_branch_taken);
    None
}

impl Cosim {
    pub fn new(reference: ArchState) -> Self {
        Cosim { reference, compared: 0 }
    }

    pub fn reference(&self) -> &ArchState {
        &self.reference
    }

    /// Steps the reference and compares it with one retirement. Counter CSR
    /// reads take the timing model's value instead of being compared.
    pub fn check(&mut self, r: &Retired, cycle: u64) -> Result<(), Divergence> {
        let diverge = |pc, field: &str, expected: String, actual: String| Divergence {
            cycle,
            pc,
            field: field.to_string(),
            expected,
            actual,
        };
        self.compared += 1;
        match (self.reference.step(), r.trap, &r.record) {
            (Ok(step), None, Some(got)) => {
                let mut want = step.record;
                if r.reads_counters {
                    if let (Some(rd), Some(v)) = (want.rd, got.wb_value) {
                        self.reference.set_reg(rd, v);
                        want.wb_value = Some(v);
                    }
                }
                match first_difference(&want, got) {
                    Some((field, e, a)) => Err(diverge(want.pc, field, e, a)),
                    None => Ok(()),
                }
            }
            (Ok(step), trap, _) => Err(diverge(step.record.pc, "trap", "none".into(), format!("{trap:?}"))),
            (Err(want), Some(got), _) if want == got => Ok(()),
            (Err(want), got, _) => Err(diverge(want.pc(), "trap", want.to_string(), format!("{got:?}"))),
        }
    }

    /// End-of-run comparison of registers and the drained memory image.
    pub fn finish(&self, arch: &ArchRegs, mem: &Memory, cycle: u64) -> Result<(), Divergence> {
        let r = &self.reference;
        let diverge = |field: String, e: u32, a: u32| Divergence {
            cycle,
            pc: r.pc,
            field,
            expected: format!("{e:#010x}"),
            actual: format!("{a:#010x}"),
        };
        for i in 0..32 {
            if r.x[i] != arch.x[i] {
                return Err(diverge(format!("x{i}"), r.x[i], arch.x[i]));
            }
            if r.f[i] != arch.f[i] {
                return Err(diverge(format!("f{i}"), r.f[i], arch.f[i]));
            }
        }
        if let Some(addr) = r.mem.first_difference(mem) {
            return Err(diverge(format!("mem[{addr:#010x}]"), r.mem.read_u8(addr) as u32, mem.read_u8(addr) as u32));
        }
        Ok(())
    }
}
