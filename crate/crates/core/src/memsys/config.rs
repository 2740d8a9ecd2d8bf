use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum CacheKind {
    Legacy,
    Hpd,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum WritePolicy {
    WriteBack,
    WriteThrough,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct CacheConfig {
    pub size_bytes: u32,
    pub ways: u32,
    pub line_bytes: u32,
    pub policy: WritePolicy,
    pub kind: CacheKind,
    pub mshr_depth: usize,
    pub prefetch: bool,
    pub prefetch_degree: u32,
}

impl CacheConfig {
    pub fn dcache() -> Self {
        CacheConfig {
            size_bytes: 32 * 1024,
            ways: 8,
            line_bytes: 64,
            policy: WritePolicy::WriteBack,
            kind: CacheKind::Hpd,
            mshr_depth: 8,
            prefetch: false,
            prefetch_degree: 2,
        }
    }

    pub fn icache() -> Self {
        CacheConfig { size_bytes: 16 * 1024, ways: 4, kind: CacheKind::Legacy, ..Self::dcache() }
    }

    pub fn sets(&self) -> u32 {
        self.size_bytes / (self.ways * self.line_bytes)
    }

    pub fn validate(&self, name: &str) -> Result<(), ConfigError> {
        let bad = |why: &str| Err(ConfigError::Geometry(format!("{name}: {why}")));
        if !self.line_bytes.is_power_of_two() || self.line_bytes < 8 {
            return bad("line size must be a power of two of at least 8 bytes");
        }
        if self.ways == 0 || self.ways > 64 {
            return bad("ways must be in 1..=64");
        }
        if self.size_bytes == 0 || !self.size_bytes.is_multiple_of(self.ways * self.line_bytes) {
            return bad("size must be a multiple of ways * line size");
        }
        if !self.sets().is_power_of_two() {
            return bad("set count must be a power of two");
        }
        if self.kind == CacheKind::Hpd && self.mshr_depth == 0 {
            return bad("MSHR depth must be positive");
        }
        Ok(())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct MemConfig {
    pub latency: u64,
    pub bytes_per_cycle: u64,
}

impl Default for MemConfig {
    fn default() -> Self {
        MemConfig { latency: 20, bytes_per_cycle: 8 }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct MemSysConfig {
    pub dcache: CacheConfig,
    pub icache: CacheConfig,
    pub mem: MemConfig,
}

impl Default for MemSysConfig {
    fn default() -> Self {
        MemSysConfig { dcache: CacheConfig::dcache(), icache: CacheConfig::icache(), mem: MemConfig::default() }
    }
}

impl MemSysConfig {
    pub fn validate(&self) -> Result<(), ConfigError> {
        self.dcache.validate("dcache")?;
        self.icache.validate("icache")?;
        if self.mem.bytes_per_cycle == 0 {
            return Err(ConfigError::Geometry("mem: bytes_per_cycle must be positive".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Error, PartialEq, Eq)]
pub enum ConfigError {
    #[error("invalid cache geometry: {0}")]
    Geometry(String),
}
