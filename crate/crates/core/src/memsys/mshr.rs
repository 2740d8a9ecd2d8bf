/// A core request waiting on an outstanding line fill.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Waiter {
    pub id: u64,
    pub offset: u32,
    pub is_write: bool,
    pub store_data: u32,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct MshrEntry {
    pub line_addr: u32,
    pub issued_to_memory: bool,
    pub fill_cycle: u64,
    pub mem_id: u64,
    pub prefetch: bool,
    pub waiters: Vec<Waiter>,
}

impl MshrEntry {
    pub fn has_write(&self) -> bool {
        self.waiters.iter().any(|w| w.is_write)
    }
}

/// Outstanding misses, at most one entry per line.
#[derive(Clone, Debug)]
pub struct MshrTable {
    depth: usize,
    entries: Vec<MshrEntry>,
}

impl MshrTable {
    pub fn new(depth: usize) -> Self {
        MshrTable { depth, entries: Vec::with_capacity(depth) }
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

    pub fn get(&self, line_addr: u32) -> Option<&MshrEntry> {
        self.entries.iter().find(|e| e.line_addr == line_addr)
    }

    pub fn get_mut(&mut self, line_addr: u32) -> Option<&mut MshrEntry> {
        self.entries.iter_mut().find(|e| e.line_addr == line_addr)
    }

    /// Allocates an entry; the caller checks `is_full` and `get` first.
    pub fn allocate(&mut self, entry: MshrEntry) {
        assert!(!self.is_full(), "MSHR overflow");
        assert!(self.get(entry.line_addr).is_none(), "duplicate MSHR entry");
        self.entries.push(entry);
    }

    /// Removes the entry whose memory request `mem_id` completed.
    pub fn complete(&mut self, mem_id: u64) -> Option<MshrEntry> {
        let i = self.entries.iter().position(|e| e.mem_id == mem_id)?;
        Some(self.entries.remove(i))
    }

    pub fn entries(&self) -> &[MshrEntry] {
        &self.entries
    }
}
