//! Loading of bare-metal RV32 executables and flat binaries.

use std::path::Path;

use goblin::elf::header::{ELFCLASS32, ELFDATA2LSB, EM_RISCV, ET_DYN, ET_EXEC, ET_REL};
use goblin::elf::program_header::PT_LOAD;
use goblin::elf::Elf;
use thiserror::Error;

use crate::program::{ProgramImage, Segment};

#[derive(Debug, Error)]
pub enum ElfError {
    #[error("cannot read {path}: {source}")]
    Io { path: String, source: std::io::Error },
    #[error("not a loadable RV32 executable: {0}")]
    BadElf(String),
    #[error("file needs relocation processing ({0})")]
    UnsupportedReloc(String),
}

pub fn load_elf(path: impl AsRef<Path>) -> Result<ProgramImage, ElfError> {
    let path = path.as_ref();
    let bytes = std::fs::read(path).map_err(|source| ElfError::Io { path: path.display().to_string(), source })?;
    load_elf_bytes(&bytes)
}

/// Maps every `PT_LOAD` segment (zero-filling `.bss`), takes the entry
/// point from the header and resolves the `tohost` symbol when present.
pub fn load_elf_bytes(bytes: &[u8]) -> Result<ProgramImage, ElfError> {
    let bad = |m: &str| ElfError::BadElf(m.to_string());
    if bytes.len() < 16 || &bytes[..4] != b"\x7fELF" {
        return Err(bad("missing ELF magic"));
    }
    if bytes[4] != ELFCLASS32 {
        return Err(bad("not a 32-bit ELF"));
    }
    if bytes[5] != ELFDATA2LSB {
        return Err(bad("not little-endian"));
    }
    let elf = Elf::parse(bytes).map_err(|e| ElfError::BadElf(e.to_string()))?;
    if elf.header.e_machine != EM_RISCV {
        return Err(bad("machine is not RISC-V"));
    }
    match elf.header.e_type {
        ET_EXEC => {}
        ET_REL => return Err(ElfError::UnsupportedReloc("relocatable object".into())),
        ET_DYN if !elf.dynrelas.is_empty() || !elf.dynrels.is_empty() || !elf.pltrelocs.is_empty() => {
            return Err(ElfError::UnsupportedReloc("dynamic relocations".into()))
        }
        ET_DYN => {}
        t => return Err(ElfError::BadElf(format!("unsupported ELF type {t}"))),
    }

    let mut segments = Vec::new();
    for ph in elf.program_headers.iter().filter(|p| p.p_type == PT_LOAD && p.p_memsz > 0) {
        let start = ph.p_offset as usize;
        let end = start
            .checked_add(ph.p_filesz as usize)
            .filter(|&e| e <= bytes.len())
            .ok_or_else(|| bad("segment extends past end of file"))?;
        if ph.p_filesz > ph.p_memsz || ph.p_paddr.checked_add(ph.p_memsz).is_none_or(|e| e > 1 << 32) {
            return Err(bad("malformed segment size"));
        }
        let mut data = bytes[start..end].to_vec();
        data.resize(ph.p_memsz as usize, 0);
        segments.push(Segment { addr: ph.p_paddr as u32, bytes: data });
    }
    if segments.is_empty() {
        return Err(bad("no loadable segments"));
    }
    let tohost_addr =
        elf.syms.iter().find(|s| elf.strtab.get_at(s.st_name) == Some("tohost")).map(|s| s.st_value as u32);
    let image = ProgramImage { segments, entry_pc: elf.entry as u32, tohost_addr };
    image.validate().map_err(|e| ElfError::BadElf(e.to_string()))?;
    Ok(image)
}

/// A raw binary loaded at `base` and entered at its first byte.
pub fn load_flat(bytes: Vec<u8>, base: u32) -> Result<ProgramImage, ElfError> {
    if bytes.is_empty() {
        return Err(ElfError::BadElf("empty binary".into()));
    }
    Ok(ProgramImage { segments: vec![Segment { addr: base, bytes }], entry_pc: base, tohost_addr: None })
}
