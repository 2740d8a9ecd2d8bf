use crate::isa::Reg;

/// Latest in-flight writer of each architectural register.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct RenameTable {
    int_latest: [Option<u64>; 32],
    fp_latest: [Option<u64>; 32],
}

impl RenameTable {
    pub fn new() -> Self {
        Self::default()
    }

    fn slot(&mut self, r: Reg) -> &mut Option<u64> {
        match r {
            Reg::X(i) => &mut self.int_latest[i as usize],
            Reg::F(i) => &mut self.fp_latest[i as usize],
        }
    }

    /// Tag of the youngest unretired writer of `r`; `x0` is never mapped.
    pub fn get(&self, r: Reg) -> Option<u64> {
        match r {
            Reg::X(0) => None,
            Reg::X(i) => self.int_latest[i as usize],
            Reg::F(i) => self.fp_latest[i as usize],
        }
    }

    pub fn set(&mut self, r: Reg, tag: u64) {
        if !r.is_zero() {
            *self.slot(r) = Some(tag);
        }
    }

    /// Returns `r` to its architectural value if `tag` is still its latest
    /// writer.
    pub fn release(&mut self, r: Reg, tag: u64) {
        let s = self.slot(r);
        if *s == Some(tag) {
            *s = None;
        }
    }

    pub fn clear(&mut self) {
        *self = Self::default();
    }

    pub fn is_empty(&self) -> bool {
        self.int_latest.iter().chain(&self.fp_latest).all(Option::is_none)
    }
}
