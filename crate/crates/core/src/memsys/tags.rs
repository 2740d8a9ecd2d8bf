use super::config::CacheConfig;

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct LineState {
    pub tag: u32,
    pub valid: bool,
    pub dirty: bool,
    /// 0 is most recently used; ranks within a set are a permutation.
    pub lru_rank: u8,
    /// Installed by the prefetcher and not yet touched by a demand access.
    pub prefetched: bool,
}

/// A line pushed out by an install.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Evicted {
    pub line_addr: u32,
    pub dirty: bool,
    pub data: Vec<u8>,
}

/// Set-associative tag store with true LRU and optional line data.
#[derive(Clone, Debug)]
pub struct TagArray {
    sets: u32,
    ways: u32,
    line_bytes: u32,
    lines: Vec<LineState>,
    data: Option<Vec<u8>>,
}

impl TagArray {
    pub fn new(cfg: &CacheConfig, with_data: bool) -> Self {
        let (sets, ways) = (cfg.sets(), cfg.ways);
        let lines =
            (0..sets * ways).map(|i| LineState { lru_rank: (i % ways) as u8, ..LineState::default() }).collect();
        let data = with_data.then(|| vec![0; (sets * ways * cfg.line_bytes) as usize]);
        TagArray { sets, ways, line_bytes: cfg.line_bytes, lines, data }
    }

    pub fn line_bytes(&self) -> u32 {
        self.line_bytes
    }

    pub fn line_addr(&self, addr: u32) -> u32 {
        addr & !(self.line_bytes - 1)
    }

    fn set_of(&self, addr: u32) -> u32 {
        (addr / self.line_bytes) & (self.sets - 1)
    }

    fn tag_of(&self, addr: u32) -> u32 {
        addr / self.line_bytes / self.sets
    }

    fn slot(&self, set: u32, way: u32) -> usize {
        (set * self.ways + way) as usize
    }

    fn set_lines(&self, set: u32) -> &[LineState] {
        let base = self.slot(set, 0);
        &self.lines[base..base + self.ways as usize]
    }

    /// Slot index of the resident line holding `addr`.
    fn find(&self, addr: u32) -> Option<usize> {
        let (set, tag) = (self.set_of(addr), self.tag_of(addr));
        (0..self.ways).map(|w| self.slot(set, w)).find(|&s| self.lines[s].valid && self.lines[s].tag == tag)
    }

    pub fn contains(&self, addr: u32) -> bool {
        self.find(addr).is_some()
    }

    pub fn state(&self, addr: u32) -> Option<LineState> {
        self.find(addr).map(|s| self.lines[s])
    }

    pub fn state_mut(&mut self, addr: u32) -> Option<&mut LineState> {
        self.find(addr).map(|s| &mut self.lines[s])
    }

    fn set_rank(&mut self, slot: usize, new_rank: u8) {
        let base = slot - slot % self.ways as usize;
        let old = self.lines[slot].lru_rank;
        for line in &mut self.lines[base..base + self.ways as usize] {
            if new_rank < old && (new_rank..old).contains(&line.lru_rank) {
                line.lru_rank += 1;
            } else if new_rank > old && (old + 1..=new_rank).contains(&line.lru_rank) {
                line.lru_rank -= 1;
            }
        }
        self.lines[slot].lru_rank = new_rank;
    }

    /// Marks the line holding `addr` most recently used.
    pub fn touch(&mut self, addr: u32) -> bool {
        match self.find(addr) {
            Some(s) => {
                self.set_rank(s, 0);
                true
            }
            None => false,
        }
    }

    /// The line `install(addr, ..)` would replace: an invalid way if any,
    /// otherwise the least recently used one.
    pub fn victim(&self, addr: u32) -> Option<(u32, bool)> {
        let set = self.set_of(addr);
        let lines = self.set_lines(set);
        if lines.iter().any(|l| !l.valid) {
            return None;
        }
        let lru = lines.iter().find(|l| l.lru_rank as u32 == self.ways - 1).unwrap();
        Some(((lru.tag * self.sets + set) * self.line_bytes, lru.dirty))
    }

    /// Allocates a line for `addr` (which must not be resident), filling it
    /// with `fill` when the array keeps data. A promoted install becomes
    /// most recently used; otherwise it takes the least recently used rank.
    pub fn install(&mut self, addr: u32, fill: Option<&[u8]>, dirty: bool, promote: bool) -> Option<Evicted> {
        debug_assert!(!self.contains(addr));
        let set = self.set_of(addr);
        let base = self.slot(set, 0);
        let lines = self.set_lines(set);
        let way = lines
            .iter()
            .position(|l| !l.valid)
            .unwrap_or_else(|| lines.iter().position(|l| l.lru_rank as u32 == self.ways - 1).unwrap());
        let slot = base + way;
        let old = self.lines[slot];
        let evicted = old.valid.then(|| Evicted {
            line_addr: (old.tag * self.sets + set) * self.line_bytes,
            dirty: old.dirty,
            data: self.slot_data(slot).map(<[u8]>::to_vec).unwrap_or_default(),
        });
        self.lines[slot] =
            LineState { tag: self.tag_of(addr), valid: true, dirty, prefetched: !promote, lru_rank: old.lru_rank };
        self.set_rank(slot, if promote { 0 } else { (self.ways - 1) as u8 });
        if let (Some(fill), Some(range)) = (fill, self.data_range(slot)) {
            self.data.as_mut().unwrap()[range].copy_from_slice(fill);
        }
        evicted
    }

    fn data_range(&self, slot: usize) -> Option<std::ops::Range<usize>> {
        self.data.as_ref()?;
        let start = slot * self.line_bytes as usize;
        Some(start..start + self.line_bytes as usize)
    }

    fn slot_data(&self, slot: usize) -> Option<&[u8]> {
        let range = self.data_range(slot)?;
        Some(&self.data.as_ref().unwrap()[range])
    }

    /// Data of the resident line holding `addr`.
    pub fn line_data(&self, addr: u32) -> Option<&[u8]> {
        self.find(addr).and_then(|s| self.slot_data(s))
    }

    pub fn line_data_mut(&mut self, addr: u32) -> Option<&mut [u8]> {
        let range = self.find(addr).and_then(|s| self.data_range(s))?;
        Some(&mut self.data.as_mut().unwrap()[range])
    }

    /// LRU ranks of the set holding `addr`, by way.
    pub fn lru_ranks(&self, addr: u32) -> Vec<u8> {
        self.set_lines(self.set_of(addr)).iter().map(|l| l.lru_rank).collect()
    }

    /// Address and data of every dirty line; clears their dirty bits.
    pub fn take_dirty(&mut self) -> Vec<(u32, Vec<u8>)> {
        let mut out = Vec::new();
        for slot in 0..self.lines.len() {
            let line = self.lines[slot];
            if line.valid && line.dirty {
                let set = (slot / self.ways as usize) as u32;
                let addr = (line.tag * self.sets + set) * self.line_bytes;
                out.push((addr, self.slot_data(slot).map(<[u8]>::to_vec).unwrap_or_default()));
                self.lines[slot].dirty = false;
            }
        }
        out
    }

    pub fn all_lines(&self) -> &[LineState] {
        &self.lines
    }

    pub fn ways(&self) -> u32 {
        self.ways
    }
}
