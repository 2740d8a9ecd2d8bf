//! Program loading, bundled kernels, random programs and comparison sweeps.

pub mod elf;
pub mod kernels;
pub mod random;
pub mod report;

pub use elf::{load_elf, load_elf_bytes, load_flat, ElfError};
pub use kernels::{
    generate_kernel, index_stream, indexed_geometry, stream_geometry, KernelError, KernelKind, KernelParams, CODE_BASE,
    DATA_BASE,
};
pub use random::{random_program, random_program_with, RandomOptions};
pub use report::{parse_config_spec, run_compare, CellReport, Comparison, RunReport, REPORT_VERSION};
