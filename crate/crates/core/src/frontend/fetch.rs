use std::collections::VecDeque;

use super::predictor::{BranchPredictor, Prediction};
use crate::isa::{decode, DecodeError, DecodedInst, IsaConfig, RawFetchWord, Trap};
use crate::memsys::MemSys;

pub const FETCH_BYTES: u32 = 8;
pub const MAX_PACKET_INSTS: usize = 4;

/// What one fetch cycle produced.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct FetchPacket {
    pub insts: Vec<DecodedInst>,
    pub predictions: Vec<Prediction>,
    pub fetch_cycle: u64,
    /// Fetch or decode fault at the pc following the last instruction; fetch
    /// halts until redirected.
    pub trap: Option<Trap>,
}

impl FetchPacket {
    pub fn bytes(&self) -> u32 {
        self.insts.iter().map(|i| i.size as u32).sum()
    }
}

/// A queued fetch-buffer slot: a decoded instruction or a fault to be raised
/// when it reaches retirement.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct FetchedInst {
    pub pc: u32,
    pub inst: Result<DecodedInst, Trap>,
    pub prediction: Prediction,
    pub fetch_cycle: u64,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum FetchStatus {
    Fetched,
    IcacheMiss,
    QueueFull,
    Halted,
}

#[derive(Clone, Debug)]
pub struct Frontend {
    pc: u32,
    halted: bool,
    capacity: usize,
    queue: VecDeque<FetchedInst>,
    isa: IsaConfig,
}

impl Frontend {
    pub fn new(entry_pc: u32, capacity: usize, isa: IsaConfig) -> Self {
        assert!(capacity >= MAX_PACKET_INSTS);
        Frontend { pc: entry_pc, halted: false, capacity, queue: VecDeque::new(), isa }
    }

    pub fn pc(&self) -> u32 {
        self.pc
    }

    pub fn queue(&self) -> &VecDeque<FetchedInst> {
        &self.queue
    }

    pub fn pop(&mut self) -> Option<FetchedInst> {
        self.queue.pop_front()
    }

    pub fn peek(&self, i: usize) -> Option<&FetchedInst> {
        self.queue.get(i)
    }

    /// Discards everything buffered and restarts fetch at `new_pc`.
    pub fn redirect(&mut self, new_pc: u32) {
        self.queue.clear();
        self.pc = new_pc;
        self.halted = false;
    }

    /// One fetch cycle: if the buffer has room and the window's lines are
    /// resident, decodes up to 8 bytes at the current pc into the buffer.
    pub fn tick(&mut self, now: u64, mem: &mut MemSys, bp: &BranchPredictor) -> (FetchStatus, Option<FetchPacket>) {
        if self.halted {
            return (FetchStatus::Halted, None);
        }
        if self.queue.len() + MAX_PACKET_INSTS > self.capacity {
            return (FetchStatus::QueueFull, None);
        }
        match fetch(self.pc, now, mem, bp, self.isa) {
            None => (FetchStatus::IcacheMiss, None),
            Some(packet) => {
                for (inst, prediction) in packet.insts.iter().zip(&packet.predictions) {
                    self.queue.push_back(FetchedInst {
                        pc: inst.pc,
                        inst: Ok(*inst),
                        prediction: *prediction,
                        fetch_cycle: now,
                    });
                    self.pc = if prediction.taken { prediction.target } else { inst.next_pc() };
                }
                if let Some(trap) = packet.trap {
                    let pc = trap.pc();
                    let prediction = Prediction { taken: false, target: pc };
                    self.queue.push_back(FetchedInst { pc, inst: Err(trap), prediction, fetch_cycle: now });
                    self.halted = true;
                }
                (FetchStatus::Fetched, Some(packet))
            }
        }
    }
}

/// Fetches the 8-byte window at `pc`. Returns `None` while an ICache line the
/// window needs is not resident.
pub fn fetch(pc: u32, now: u64, mem: &mut MemSys, bp: &BranchPredictor, isa: IsaConfig) -> Option<FetchPacket> {
    let mut packet = FetchPacket { fetch_cycle: now, ..FetchPacket::default() };
    if !pc.is_multiple_of(2) {
        packet.trap = Some(Trap::MisalignedFetch { pc });
        return Some(packet);
    }
    if !mem.is_mapped(pc) {
        packet.trap = Some(Trap::FetchFault { pc });
        return Some(packet);
    }
    let last = pc.wrapping_add(FETCH_BYTES - 1);
    let mut ready = mem.icache_probe(pc, now);
    if ready && mem.icache_line(last) != mem.icache_line(pc) && mem.is_mapped(last) {
        ready = mem.icache_probe(last, now);
    }
    if !ready {
        return None;
    }
    let mut bytes = [0u8; 8];
    mem.read_bytes(pc, &mut bytes);
    let window = RawFetchWord::new(bytes, pc);

    let mut offset = 0;
    while offset < FETCH_BYTES && packet.insts.len() < MAX_PACKET_INSTS {
        let at = pc.wrapping_add(offset);
        if !mem.is_mapped(at) {
            packet.trap = Some(Trap::FetchFault { pc: at });
            break;
        }
        let inst = match decode(&window, offset) {
            Ok(i) if i.needs_fpu() && !isa.fpu => {
                packet.trap = Some(Trap::IllegalInstruction { pc: at, raw: i.raw });
                break;
            }
            Ok(i) => i,
            Err(DecodeError::TruncatedFetch) => break,
            Err(DecodeError::IllegalInstruction { raw }) => {
                packet.trap = Some(Trap::IllegalInstruction { pc: at, raw });
                break;
            }
        };
        let prediction = bp.predict(&inst);
        packet.insts.push(inst);
        packet.predictions.push(prediction);
        if prediction.taken {
            break;
        }
        offset += inst.size as u32;
    }
    Some(packet)
}
