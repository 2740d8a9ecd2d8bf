pub mod engine;
pub mod frontend;
pub mod harness;
pub mod isa;
pub mod issue;
pub mod memsys;
pub mod program;
