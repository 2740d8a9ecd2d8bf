use serde::Serialize;
use thiserror::Error;

use crate::frontend::{PredictorConfig, PredictorKind};
use crate::isa::IsaConfig;
use crate::issue::IssueConfig;
use crate::memsys::{CacheKind, ConfigError, MemSysConfig, WritePolicy};

/// Address whose stores of 1 and 2 open and close the region of interest.
pub const ROI_MARKER_ADDR: u32 = 0x8000_F000;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub struct SimConfig {
    pub issue: IssueConfig,
    pub bp: PredictorConfig,
    pub mem: MemSysConfig,
    pub fetch_queue: usize,
    pub max_cycles: u64,
    pub deadlock_cycles: u64,
    pub cosim: bool,
    pub trace: bool,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Preset {
    Cva6,
    Cva6s,
    #[serde(rename = "cva6s+")]
    Cva6sPlus,
}

impl Preset {
    pub const ALL: [Preset; 3] = [Preset::Cva6, Preset::Cva6s, Preset::Cva6sPlus];

    pub fn name(self) -> &'static str {
        match self {
            Preset::Cva6 => "cva6",
            Preset::Cva6s => "cva6s",
            Preset::Cva6sPlus => "cva6s+",
        }
    }
}

impl std::str::FromStr for Preset {
    type Err = SimConfigError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Preset::ALL.into_iter().find(|p| p.name() == s).ok_or_else(|| SimConfigError::UnknownPreset(s.to_string()))
    }
}

#[derive(Debug, Error, PartialEq, Eq)]
pub enum SimConfigError {
    #[error("unknown preset `{0}` (expected cva6, cva6s or cva6s+)")]
    UnknownPreset(String),
    #[error("unknown config key `{0}`")]
    UnknownKey(String),
    #[error("invalid value `{value}` for `{key}`")]
    BadValue { key: String, value: String },
    #[error("line {line}: expected `key = value`")]
    Syntax { line: usize },
    #[error("{0}")]
    Invalid(String),
    #[error(transparent)]
    Cache(#[from] ConfigError),
}

impl Default for SimConfig {
    fn default() -> Self {
        SimConfig::preset(Preset::Cva6sPlus)
    }
}

impl SimConfig {
    pub fn preset(p: Preset) -> Self {
        let mut c = SimConfig {
            issue: IssueConfig::default(),
            bp: PredictorConfig::default(),
            mem: MemSysConfig::default(),
            fetch_queue: 8,
            max_cycles: 50_000_000,
            deadlock_cycles: 10_000,
            cosim: false,
            trace: false,
        };
        match p {
            Preset::Cva6 => {
                c.issue.width = 1;
                c.issue.renaming = false;
                c.issue.alu_forwarding = false;
                c.bp.kind = PredictorKind::Bimodal;
                c.mem.dcache.kind = CacheKind::Legacy;
            }
            Preset::Cva6s => {
                c.issue.renaming = false;
                c.issue.alu_forwarding = false;
                c.issue.fpu = false;
                c.bp.kind = PredictorKind::Bimodal;
                c.mem.dcache.kind = CacheKind::Legacy;
            }
            Preset::Cva6sPlus => {}
        }
        c
    }

    pub fn isa(&self) -> IsaConfig {
        IsaConfig { fpu: self.issue.fpu }
    }

    pub fn validate(&self) -> Result<(), SimConfigError> {
        let bad = |m: &str| Err(SimConfigError::Invalid(m.to_string()));
        if !(1..=2).contains(&self.issue.width) {
            return bad("issue.width must be 1 or 2");
        }
        if self.issue.scoreboard < 2 {
            return bad("issue.scoreboard must be at least 2");
        }
        if self.issue.max_unresolved_branches == 0 {
            return bad("issue.max_unresolved_branches must be positive");
        }
        let l = &self.issue.lat;
        if [l.mul, l.div, l.fpu_add, l.fpu_div].contains(&0) {
            return bad("latencies must be positive");
        }
        if !self.bp.entries.is_power_of_two() || !self.bp.btb_entries.is_power_of_two() {
            return bad("bp.entries and btb.entries must be powers of two");
        }
        if !(1..=8).contains(&self.bp.history_bits) {
            return bad("bp.history_bits must be in 1..=8");
        }
        if self.fetch_queue < 4 {
            return bad("fetch queue must hold at least 4 instructions");
        }
        self.mem.validate()?;
        Ok(())
    }

    /// Applies one `key = value` setting.
    pub fn set(&mut self, key: &str, value: &str) -> Result<(), SimConfigError> {
        let bad = || SimConfigError::BadValue { key: key.to_string(), value: value.to_string() };
        let num = || value.parse::<u64>().map_err(|_| bad());
        let flag = || match value {
            "true" | "1" | "on" => Ok(true),
            "false" | "0" | "off" => Ok(false),
            _ => Err(bad()),
        };
        match key {
            "issue.width" => self.issue.width = num()? as usize,
            "issue.renaming" => self.issue.renaming = flag()?,
            "issue.alu_forwarding" => self.issue.alu_forwarding = flag()?,
            "issue.fpu" => self.issue.fpu = flag()?,
            "issue.scoreboard" => self.issue.scoreboard = num()? as usize,
            "issue.max_unresolved_branches" => self.issue.max_unresolved_branches = num()? as usize,
            "lsu.output_register" => self.issue.output_register = flag()?,
            "lat.mul" => self.issue.lat.mul = num()?,
            "lat.div" => self.issue.lat.div = num()?,
            "lat.fpu_add" => self.issue.lat.fpu_add = num()?,
            "lat.fpu_div" => self.issue.lat.fpu_div = num()?,
            "bp.kind" => {
                self.bp.kind = match value {
                    "bimodal" => PredictorKind::Bimodal,
                    "two-level" => PredictorKind::TwoLevel,
                    _ => return Err(bad()),
                }
            }
            "bp.entries" => self.bp.entries = num()? as usize,
            "bp.history_bits" => self.bp.history_bits = num()? as u32,
            "btb.entries" => self.bp.btb_entries = num()? as usize,
            "dcache.kind" => {
                self.mem.dcache.kind = match value {
                    "legacy" => CacheKind::Legacy,
                    "hpd" => CacheKind::Hpd,
                    _ => return Err(bad()),
                }
            }
            "dcache.size" => self.mem.dcache.size_bytes = num()? as u32,
            "dcache.ways" => self.mem.dcache.ways = num()? as u32,
            "dcache.policy" => {
                self.mem.dcache.policy = match value {
                    "write-back" | "wb" => WritePolicy::WriteBack,
                    "write-through" | "wt" => WritePolicy::WriteThrough,
                    _ => return Err(bad()),
                }
            }
            "dcache.mshr" => self.mem.dcache.mshr_depth = num()? as usize,
            "dcache.prefetch" => self.mem.dcache.prefetch = flag()?,
            "icache.size" => self.mem.icache.size_bytes = num()? as u32,
            "icache.ways" => self.mem.icache.ways = num()? as u32,
            "mem.latency" => self.mem.mem.latency = num()?,
            "mem.bytes_per_cycle" => self.mem.mem.bytes_per_cycle = num()?,
            _ => return Err(SimConfigError::UnknownKey(key.to_string())),
        }
        Ok(())
    }

    /// Applies a flat config file: one `key = value` per line, `#` comments.
    pub fn apply_text(&mut self, text: &str) -> Result<(), SimConfigError> {
        for (i, line) in text.lines().enumerate() {
            let line = line.split('#').next().unwrap().trim();
            if line.is_empty() {
                continue;
            }
            let (k, v) = line.split_once('=').ok_or(SimConfigError::Syntax { line: i + 1 })?;
            self.set(k.trim(), v.trim())?;
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn presets_match_feature_matrix() {
        let a = SimConfig::preset(Preset::Cva6);
        assert_eq!(
            (a.issue.width, a.issue.fpu, a.bp.kind, a.mem.dcache.kind),
            (1, true, PredictorKind::Bimodal, CacheKind::Legacy)
        );
        let b = SimConfig::preset(Preset::Cva6s);
        assert_eq!((b.issue.width, b.issue.fpu, b.issue.renaming), (2, false, false));
        let c = SimConfig::preset(Preset::Cva6sPlus);
        assert!(c.issue.renaming && c.issue.alu_forwarding && c.issue.fpu);
        assert_eq!((c.bp.kind, c.mem.dcache.kind), (PredictorKind::TwoLevel, CacheKind::Hpd));
        for p in Preset::ALL {
            SimConfig::preset(p).validate().unwrap();
        }
    }

    #[test]
    fn config_text_overrides_and_rejects_unknown_keys() {
        let mut c = SimConfig::default();
        c.apply_text("# comment\nissue.width = 1\ndcache.kind = legacy\n\nbp.kind=bimodal\n").unwrap();
        assert_eq!(c.issue.width, 1);
        assert_eq!(c.mem.dcache.kind, CacheKind::Legacy);
        assert_eq!(c.set("issue.bogus", "1"), Err(SimConfigError::UnknownKey("issue.bogus".into())));
        assert!(matches!(c.set("issue.width", "two"), Err(SimConfigError::BadValue { .. })));
        assert_eq!(c.apply_text("nonsense"), Err(SimConfigError::Syntax { line: 1 }));
    }
}
