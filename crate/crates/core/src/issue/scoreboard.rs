use std::collections::VecDeque;
use std::fmt;

use crate::frontend::Prediction;
use crate::isa::exec::MemOp;
use crate::isa::{DecodedInst, OpClass, Trap};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Fu {
    Alu0,
    Alu1,
    Mul,
    Div,
    Lsu,
    Fpu,
    BranchUnit,
}

/// Issued entries go straight to `Executing`; the state only moves forward.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord)]
pub enum EntryState {
    Executing,
    Done,
    WrittenBack,
}

/// Per-instruction events reported in the retirement trace.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct Events {
    pub mispredict: bool,
    pub dmiss: bool,
    pub dhit: bool,
    pub mshr_merge: bool,
    pub wb_stall: bool,
}

impl fmt::Display for Events {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let names = [
            (self.mispredict, "mispredict"),
            (self.dmiss, "dmiss"),
            (self.dhit, "dhit"),
            (self.mshr_merge, "mshr_merge"),
            (self.wb_stall, "wb_stall"),
        ];
        let set: Vec<&str> = names.iter().filter(|(on, _)| *on).map(|(_, n)| *n).collect();
        f.write_str(&set.join(";"))
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ScoreboardEntry {
    pub tag: u64,
    pub pc: u32,
    /// `None` for a fetch/decode fault travelling to retirement.
    pub inst: Option<DecodedInst>,
    pub trap: Option<Trap>,
    pub prediction: Prediction,
    pub fu: Fu,
    pub state: EntryState,
    pub result: Option<u32>,
    pub fetch_cycle: u64,
    pub issue_cycle: u64,
    pub complete_cycle: u64,
    pub done_cycle: Option<u64>,
    pub wb_cycle: Option<u64>,
    pub next_pc: u32,
    pub taken: Option<bool>,
    pub mem: Option<MemOp>,
    /// New memory word written at retirement by an atomic (or SC data).
    pub amo_store: Option<u32>,
    pub reads_counters: bool,
    pub events: Events,
}

impl ScoreboardEntry {
    pub fn opclass(&self) -> Option<OpClass> {
        self.inst.map(|i| i.opclass())
    }

    pub fn is_control(&self) -> bool {
        self.opclass().is_some_and(OpClass::is_control)
    }

    pub fn writes_memory(&self) -> bool {
        matches!(self.opclass(), Some(OpClass::Store | OpClass::FStore | OpClass::Amo))
    }

    pub fn is_serializing(&self) -> bool {
        self.opclass() == Some(OpClass::Amo)
    }

    pub fn dest(&self) -> Option<crate::isa::Reg> {
        self.inst.and_then(|i| i.dest())
    }
}

/// In-flight instructions in program (tag) order.
#[derive(Clone, Debug)]
pub struct Scoreboard {
    depth: usize,
    next_tag: u64,
    entries: VecDeque<ScoreboardEntry>,
}

impl Scoreboard {
    pub fn new(depth: usize) -> Self {
        assert!(depth >= 2, "scoreboard needs room for an issue pair");
        Scoreboard { depth, next_tag: 0, entries: VecDeque::with_capacity(depth) }
    }

    pub fn depth(&self) -> usize {
        self.depth
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn is_full(&self) -> bool {
        self.entries.len() >= self.depth
    }

    pub fn next_tag(&self) -> u64 {
        self.next_tag
    }

    pub fn push(&mut self, mut e: ScoreboardEntry) -> u64 {
        assert!(!self.is_full());
        e.tag = self.next_tag;
        self.next_tag += 1;
        self.entries.push_back(e);
        self.next_tag - 1
    }

    pub fn get(&self, tag: u64) -> Option<&ScoreboardEntry> {
        // Tags increase monotonically but have gaps after a squash.
        let i = self.entries.binary_search_by_key(&tag, |e| e.tag).ok()?;
        self.entries.get(i)
    }

    pub fn head(&self) -> Option<&ScoreboardEntry> {
        self.entries.front()
    }

    pub fn pop_head(&mut self) -> Option<ScoreboardEntry> {
        self.entries.pop_front()
    }

    pub fn iter(&self) -> impl Iterator<Item = &ScoreboardEntry> {
        self.entries.iter()
    }

    pub fn iter_mut(&mut self) -> impl Iterator<Item = &mut ScoreboardEntry> {
        self.entries.iter_mut()
    }

    /// Removes every entry younger than `tag`.
    pub fn squash_after(&mut self, tag: u64) -> usize {
        let before = self.entries.len();
        self.entries.retain(|e| e.tag <= tag);
        before - self.entries.len()
    }
}
