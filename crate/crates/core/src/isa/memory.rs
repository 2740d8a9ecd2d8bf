use std::collections::BTreeMap;

pub const PAGE_BYTES: u32 = 4096;

/// Sparse, zero-initialized 32-bit byte-addressable memory. Pages are
/// allocated on first write; reads of untouched bytes return zero.
#[derive(Clone, Default, PartialEq, Eq)]
pub struct Memory {
    pages: BTreeMap<u32, Box<[u8]>>,
}

impl std::fmt::Debug for Memory {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("Memory").field("pages", &self.pages.len()).finish()
    }
}

impl Memory {
    pub fn new() -> Self {
        Self::default()
    }

    fn page_of(addr: u32) -> (u32, usize) {
        (addr / PAGE_BYTES, (addr % PAGE_BYTES) as usize)
    }

    /// True when the page holding `addr` has been allocated.
    pub fn is_mapped(&self, addr: u32) -> bool {
        self.pages.contains_key(&(addr / PAGE_BYTES))
    }

    pub fn read_u8(&self, addr: u32) -> u8 {
        let (page, off) = Self::page_of(addr);
        self.pages.get(&page).map_or(0, |p| p[off])
    }

    pub fn write_u8(&mut self, addr: u32, value: u8) {
        let (page, off) = Self::page_of(addr);
        self.map_page(addr);
        self.pages.get_mut(&page).unwrap()[off] = value;
    }

    /// Allocates (zero-filled) the page holding `addr` if it is not mapped.
    pub fn map_page(&mut self, addr: u32) {
        self.pages.entry(addr / PAGE_BYTES).or_insert_with(|| vec![0; PAGE_BYTES as usize].into_boxed_slice());
    }

    /// Little-endian read of `size` (1, 2 or 4) bytes; misaligned and
    /// page-crossing accesses are allowed.
    pub fn read(&self, addr: u32, size: u32) -> u32 {
        let (page, off) = Self::page_of(addr);
        if off + size as usize <= PAGE_BYTES as usize {
            let Some(p) = self.pages.get(&page) else { return 0 };
            let mut v = 0u32;
            for i in (0..size as usize).rev() {
                v = v << 8 | p[off + i] as u32;
            }
            return v;
        }
        (0..size).rev().fold(0, |v, i| v << 8 | self.read_u8(addr.wrapping_add(i)) as u32)
    }

    pub fn write(&mut self, addr: u32, size: u32, value: u32) {
        for i in 0..size {
            self.write_u8(addr.wrapping_add(i), (value >> (8 * i)) as u8);
        }
    }

    pub fn read_bytes(&self, addr: u32, out: &mut [u8]) {
        for (i, b) in out.iter_mut().enumerate() {
            *b = self.read_u8(addr.wrapping_add(i as u32));
        }
    }

    pub fn write_bytes(&mut self, addr: u32, bytes: &[u8]) {
        for (i, b) in bytes.iter().enumerate() {
            self.write_u8(addr.wrapping_add(i as u32), *b);
        }
    }

    /// Byte-level comparison that treats unallocated pages as zero.
    pub fn same_contents(&self, other: &Memory) -> bool {
        self.first_difference(other).is_none()
    }

    /// Lowest address whose byte differs between the two memories.
    pub fn first_difference(&self, other: &Memory) -> Option<u32> {
        let zero = [0u8; PAGE_BYTES as usize];
        let keys: std::collections::BTreeSet<u32> = self.pages.keys().chain(other.pages.keys()).copied().collect();
        for k in keys {
            let a = self.pages.get(&k).map_or(&zero[..], |p| &p[..]);
            let b = other.pages.get(&k).map_or(&zero[..], |p| &p[..]);
            if let Some(i) = a.iter().zip(b).position(|(x, y)| x != y) {
                return Some(k * PAGE_BYTES + i as u32);
            }
        }
        None
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn unwritten_reads_zero_without_allocating() {
        let m = Memory::new();
        assert_eq!(m.read(0x8000_0000, 4), 0);
        assert!(!m.is_mapped(0x8000_0000));
    }

    #[test]
    fn misaligned_page_crossing() {
        let mut m = Memory::new();
        m.write(0x0fff, 4, 0xdead_beef);
        assert_eq!(m.read(0x0fff, 4), 0xdead_beef);
        assert_eq!(m.read_u8(0x1000), 0xbe);
        assert!(m.is_mapped(0x1002));
    }

    #[test]
    fn zero_pages_compare_equal() {
        let mut a = Memory::new();
        let b = Memory::new();
        a.write(0x40, 4, 0);
        assert!(a.same_contents(&b));
        a.write(0x41, 1, 7);
        assert_eq!(a.first_difference(&b), Some(0x41));
    }
}
