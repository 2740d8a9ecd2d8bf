//! Branch direction predictors and the branch target buffer.
//!
//! All state changes happen through `update`, which the engine calls once per
//! retired control transfer in program order.

use serde::{Deserialize, Serialize};

use crate::isa::{DecodedInst, Mnemonic, OpClass};

const WEAKLY_NOT_TAKEN: u8 = 1;

fn saturate(counter: u8, taken: bool) -> u8 {
    if taken {
        (counter + 1).min(3)
    } else {
        counter.saturating_sub(1)
    }
}

fn index(pc: u32, mask: usize) -> usize {
    (pc >> 2) as usize & mask
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum PredictorKind {
    Bimodal,
    TwoLevel,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct PredictorConfig {
    pub kind: PredictorKind,
    pub entries: usize,
    pub history_bits: u32,
    pub btb_entries: usize,
}

impl Default for PredictorConfig {
    fn default() -> Self {
        PredictorConfig { kind: PredictorKind::TwoLevel, entries: 128, history_bits: 3, btb_entries: 64 }
    }
}

/// One two-bit saturating counter per entry, indexed by `pc[k+1:2]`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct BimodalTable {
    counters: Vec<u8>,
}

impl BimodalTable {
    pub fn new(entries: usize) -> Self {
        assert!(entries.is_power_of_two(), "predictor entries must be a power of two");
        BimodalTable { counters: vec![WEAKLY_NOT_TAKEN; entries] }
    }

    pub fn counter(&self, pc: u32) -> u8 {
        self.counters[index(pc, self.counters.len() - 1)]
    }

    pub fn predict(&self, pc: u32) -> bool {
        self.counter(pc) >= 2
    }

    pub fn update(&mut self, pc: u32, taken: bool) {
        let i = index(pc, self.counters.len() - 1);
        self.counters[i] = saturate(self.counters[i], taken);
    }

    pub fn counters(&self) -> &[u8] {
        &self.counters
    }
}

/// Per-entry private history registers, each selecting one of the entry's own
/// `2^history_bits` counters.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TwoLevelPredictor {
    history_bits: u32,
    histories: Vec<u8>,
    patterns: Vec<u8>,
}

impl TwoLevelPredictor {
    pub fn new(entries: usize, history_bits: u32) -> Self {
        assert!(entries.is_power_of_two(), "predictor entries must be a power of two");
        assert!((1..=8).contains(&history_bits), "history_bits must be 1..=8");
        TwoLevelPredictor {
            history_bits,
            histories: vec![0; entries],
            patterns: vec![WEAKLY_NOT_TAKEN; entries << history_bits],
        }
    }

    fn entry(&self, pc: u32) -> usize {
        index(pc, self.histories.len() - 1)
    }

    pub fn history(&self, pc: u32) -> u8 {
        self.histories[self.entry(pc)]
    }

    /// Counter of `pc`'s entry selected by history value `history`.
    pub fn counter(&self, pc: u32, history: u8) -> u8 {
        self.patterns[(self.entry(pc) << self.history_bits) | history as usize]
    }

    pub fn predict(&self, pc: u32) -> bool {
        self.counter(pc, self.history(pc)) >= 2
    }

    pub fn update(&mut self, pc: u32, taken: bool) {
        let e = self.entry(pc);
        let h = self.histories[e];
        let slot = (e << self.history_bits) | h as usize;
        self.patterns[slot] = saturate(self.patterns[slot], taken);
        let mask = (1u16 << self.history_bits) - 1;
        self.histories[e] = (((h as u16) << 1 | taken as u16) & mask) as u8;
    }

    pub fn histories(&self) -> &[u8] {
        &self.histories
    }

    pub fn counters(&self) -> &[u8] {
        &self.patterns
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum BtbKind {
    Branch,
    Jump,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct BtbEntry {
    pub pc: u32,
    pub target: u32,
    pub kind: BtbKind,
}

/// Direct-mapped target buffer; an entry stores the full pc, so a hit is an
/// exact match.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Btb {
    entries: Vec<Option<BtbEntry>>,
}

impl Btb {
    pub fn new(entries: usize) -> Self {
        assert!(entries.is_power_of_two(), "BTB entries must be a power of two");
        Btb { entries: vec![None; entries] }
    }

    fn slot(&self, pc: u32) -> usize {
        (pc >> 1) as usize & (self.entries.len() - 1)
    }

    pub fn lookup(&self, pc: u32) -> Option<BtbEntry> {
        self.entries[self.slot(pc)].filter(|e| e.pc == pc)
    }

    pub fn insert(&mut self, pc: u32, target: u32, kind: BtbKind) {
        let s = self.slot(pc);
        self.entries[s] = Some(BtbEntry { pc, target, kind });
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct Prediction {
    pub taken: bool,
    pub target: u32,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Direction {
    Bimodal(BimodalTable),
    TwoLevel(TwoLevelPredictor),
}

/// Direction predictor plus BTB, as seen by fetch.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct BranchPredictor {
    pub direction: Direction,
    pub btb: Btb,
}

impl BranchPredictor {
    pub fn new(cfg: &PredictorConfig) -> Self {
        let direction = match cfg.kind {
            PredictorKind::Bimodal => Direction::Bimodal(BimodalTable::new(cfg.entries)),
            PredictorKind::TwoLevel => Direction::TwoLevel(TwoLevelPredictor::new(cfg.entries, cfg.history_bits)),
        };
        BranchPredictor { direction, btb: Btb::new(cfg.btb_entries) }
    }

    fn predict_direction(&self, pc: u32) -> bool {
        match &self.direction {
            Direction::Bimodal(t) => t.predict(pc),
            Direction::TwoLevel(t) => t.predict(pc),
        }
    }

    /// Prediction for a decoded instruction. Conditional branches use the
    /// direction predictor with their decoded target; `jal` is always taken;
    /// `jalr` redirects only on a BTB hit; everything else falls through.
    pub fn predict(&self, inst: &DecodedInst) -> Prediction {
        let fall = Prediction { taken: false, target: inst.next_pc() };
        match inst.opclass() {
            OpClass::Branch if self.predict_direction(inst.pc) => {
                Prediction { taken: true, target: inst.direct_target().unwrap() }
            }
            OpClass::Jump if inst.mnemonic == Mnemonic::Jal => {
                Prediction { taken: true, target: inst.direct_target().unwrap() }
            }
            OpClass::Jump => match self.btb.lookup(inst.pc) {
                Some(e) => Prediction { taken: true, target: e.target },
                None => fall,
            },
            _ => fall,
        }
    }

    /// Trains on one retired control transfer.
    pub fn update(&mut self, inst: &DecodedInst, taken: bool, target: u32) {
        match inst.opclass() {
            OpClass::Branch => {
                match &mut self.direction {
                    Direction::Bimodal(t) => t.update(inst.pc, taken),
                    Direction::TwoLevel(t) => t.update(inst.pc, taken),
                }
                if taken {
                    self.btb.insert(inst.pc, target, BtbKind::Branch);
                }
            }
            OpClass::Jump => self.btb.insert(inst.pc, target, BtbKind::Jump),
            _ => {}
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn fresh_predictors_say_not_taken() {
        let b = BimodalTable::new(128);
        let t = TwoLevelPredictor::new(128, 3);
        for pc in (0x8000_0000u32..0x8000_1000).step_by(2) {
            assert!(!b.predict(pc));
            assert!(!t.predict(pc));
        }
    }

    #[test]
    fn counter_saturates_at_three() {
        let mut b = BimodalTable::new(128);
        for expected in [2, 3, 3, 3] {
            b.update(0x100, true);
            assert_eq!(b.counter(0x100), expected);
        }
    }

    #[test]
    fn history_shifts_newest_into_lsb() {
        let mut t = TwoLevelPredictor::new(128, 3);
        t.update(0x40, false);
        t.update(0x40, true);
        t.update(0x40, true);
        assert_eq!(t.history(0x40), 0b011);
        t.update(0x40, false);
        assert_eq!(t.history(0x40), 0b110);
    }

    #[test]
    fn two_level_counter_is_selected_by_old_history() {
        let mut t = TwoLevelPredictor::new(128, 3);
        t.update(0x40, true);
        assert_eq!(t.counter(0x40, 0), 2);
        assert_eq!(t.counter(0x40, 1), 1);
    }

    #[test]
    fn btb_requires_exact_pc() {
        let mut btb = Btb::new(64);
        btb.insert(0x8000_0010, 0x8000_0100, BtbKind::Jump);
        assert_eq!(btb.lookup(0x8000_0010).map(|e| e.target), Some(0x8000_0100));
        assert_eq!(btb.lookup(0x8000_0010 + 128), None);
    }

    #[test]
    fn jalr_needs_btb_hit() {
        let mut p = BranchPredictor::new(&PredictorConfig::default());
        let mut jalr = DecodedInst::new(Mnemonic::Jalr, 0, 1, 0, 0);
        jalr.pc = 0x8000_0000;
        assert!(!p.predict(&jalr).taken);
        p.update(&jalr, true, 0x8000_0040);
        assert_eq!(p.predict(&jalr), Prediction { taken: true, target: 0x8000_0040 });
    }
}
