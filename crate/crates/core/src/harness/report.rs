//! Configuration sweeps and their reports.
//!
//! A [`RunReport`] serializes to a single JSON document:
//!
//! ```text
//! {
//!   "report_version": 1,
//!   "failed": false,
//!   "cells": [ { "image", "config", "config_echo", "exit", "error", "stats" }, ... ],
//!   "comparisons": [ { "image", "base", "new", "ipc_gain_pct", "bandwidth_gain_pct" }, ... ],
//!   "geomean": [ { "base", "new", "images", "ipc_gain_pct", "bandwidth_gain_pct" }, ... ]
//! }
//! ```
//!
//! The first config is the baseline. Gains use ROI IPC and ROI bandwidth:
//! `(new - base) / base * 100`; the geometric mean is taken over the
//! per-image ratios `new / base`. A gain is `null` when its baseline is zero.

use std::fmt::Write as _;

use rayon::prelude::*;
use serde::Serialize;

use crate::engine::{Preset, RunExit, SimConfig, SimConfigError, Simulator, Stats};
use crate::memsys::CacheKind;
use crate::program::ProgramImage;

pub const REPORT_VERSION: u32 = 1;

/// Parses `<preset>[/legacy|/hpd|/hpd-pf]`.
pub fn parse_config_spec(spec: &str) -> Result<SimConfig, SimConfigError> {
    let (preset, cache) = match spec.split_once('/') {
        Some((p, c)) => (p, Some(c)),
        None => (spec, None),
    };
    let mut cfg = SimConfig::preset(preset.parse::<Preset>()?);
    match cache {
        None => {}
        Some("legacy") => cfg.mem.dcache.kind = CacheKind::Legacy,
        Some("hpd") => {
            cfg.mem.dcache.kind = CacheKind::Hpd;
            cfg.mem.dcache.prefetch = false;
        }
        Some("hpd-pf") => {
            cfg.mem.dcache.kind = CacheKind::Hpd;
            cfg.mem.dcache.prefetch = true;
        }
        Some(other) => {
            return Err(SimConfigError::BadValue { key: "dcache".into(), value: other.into() });
        }
    }
    Ok(cfg)
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct CellReport {
    pub image: String,
    pub config: String,
    pub config_echo: SimConfig,
    pub exit: Option<RunExit>,
    pub error: Option<String>,
    pub stats: Option<Stats>,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Comparison {
    pub image: String,
    pub base: String,
    pub new: String,
    pub ipc_gain_pct: Option<f64>,
    pub bandwidth_gain_pct: Option<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct GeoMean {
    pub base: String,
    pub new: String,
    pub images: usize,
    pub ipc_gain_pct: Option<f64>,
    pub bandwidth_gain_pct: Option<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct RunReport {
    pub report_version: u32,
    /// Set when any cell ended in an error (divergence, deadlock, limit).
    pub failed: bool,
    pub cells: Vec<CellReport>,
    pub comparisons: Vec<Comparison>,
    pub geomean: Vec<GeoMean>,
}

pub fn gain_pct(base: f64, new: f64) -> Option<f64> {
    (base > 0.0).then(|| (new - base) / base * 100.0)
}

fn geomean_gain(pairs: &[(f64, f64)]) -> Option<f64> {
    let ratios: Vec<f64> = pairs.iter().filter(|(b, n)| *b > 0.0 && *n > 0.0).map(|(b, n)| n / b).collect();
    if ratios.is_empty() {
        return None;
    }
    let mean_log = ratios.iter().map(|r| r.ln()).sum::<f64>() / ratios.len() as f64;
    Some((mean_log.exp() - 1.0) * 100.0)
}

/// Runs every image under every config (cells in parallel) and assembles
/// the report in image-major, config-minor input order.
pub fn run_compare(images: &[(String, ProgramImage)], configs: &[(String, SimConfig)]) -> RunReport {
    let jobs: Vec<(usize, usize)> = (0..images.len()).flat_map(|i| (0..configs.len()).map(move |c| (i, c))).collect();
    let mut cells: Vec<((usize, usize), CellReport)> = jobs
        .par_iter()
        .map(|&(i, c)| {
            let (image_name, image) = &images[i];
            let (config_name, cfg) = &configs[c];
            let result = Simulator::new(*cfg, image).and_then(|s| s.run());
            let (exit, error, stats) = match result {
                Ok(r) => (Some(r.exit), None, Some(r.stats)),
                Err(e) => (None, Some(e.to_string()), None),
            };
            let cell = CellReport {
                image: image_name.clone(),
                config: config_name.clone(),
                config_echo: *cfg,
                exit,
                error,
                stats,
            };
            ((i, c), cell)
        })
        .collect();
    cells.sort_by_key(|(k, _)| *k);
    let cells: Vec<CellReport> = cells.into_iter().map(|(_, c)| c).collect();
    let failed = cells.iter().any(|c| c.error.is_some());

    let n = configs.len();
    let mut comparisons = Vec::new();
    let mut geomean = Vec::new();
    for c in 1..n {
        let mut ipc = Vec::new();
        let mut bw = Vec::new();
        for (i, (image_name, _)) in images.iter().enumerate() {
            let (Some(b), Some(s)) = (cells[i * n].stats, cells[i * n + c].stats) else { continue };
            comparisons.push(Comparison {
                image: image_name.clone(),
                base: configs[0].0.clone(),
                new: configs[c].0.clone(),
                ipc_gain_pct: gain_pct(b.roi.ipc, s.roi.ipc),
                bandwidth_gain_pct: gain_pct(b.roi.bandwidth_bytes_per_cycle, s.roi.bandwidth_bytes_per_cycle),
            });
            ipc.push((b.roi.ipc, s.roi.ipc));
            bw.push((b.roi.bandwidth_bytes_per_cycle, s.roi.bandwidth_bytes_per_cycle));
        }
        geomean.push(GeoMean {
            base: configs[0].0.clone(),
            new: configs[c].0.clone(),
            images: ipc.len(),
            ipc_gain_pct: geomean_gain(&ipc),
            bandwidth_gain_pct: geomean_gain(&bw),
        });
    }
    RunReport { report_version: REPORT_VERSION, failed, cells, comparisons, geomean }
}

impl RunReport {
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes")
    }

    /// Human-readable table.
    pub fn render_table(&self) -> String {
        let pct = |v: Option<f64>| v.map_or("-".to_string(), |v| format!("{v:+.1}%"));
        let mut out = String::new();
        let _ = writeln!(
            out,
            "{:<24} {:<16} {:<12} {:>10} {:>10} {:>7} {:>9} {:>9}",
            "image", "config", "exit", "cycles", "retired", "ipc", "roi_ipc", "roi_bw"
        );
        for c in &self.cells {
            let exit = match (&c.exit, &c.error) {
                (Some(RunExit::Trap(_)), _) => "trap".to_string(),
                (Some(e), _) => serde_json::to_value(e)
                    .ok()
                    .and_then(|v| v.as_str().map(String::from))
                    .unwrap_or_else(|| "tohost".into()),
                (None, _) => "ERROR".to_string(),
            };
            match c.stats {
                Some(s) => {
                    let _ = writeln!(
                        out,
                        "{:<24} {:<16} {:<12} {:>10} {:>10} {:>7.3} {:>9.3} {:>9.3}",
                        c.image, c.config, exit, s.cycles, s.retired, s.ipc, s.roi.ipc, s.roi.bandwidth_bytes_per_cycle
                    );
                }
                None => {
                    let _ = writeln!(out, "{:<24} {:<16} {}", c.image, c.config, c.error.as_deref().unwrap_or(""));
                }
            }
        }
        if !self.comparisons.is_empty() {
            let _ =
                writeln!(out, "\n{:<24} {:<16} {:<16} {:>10} {:>10}", "image", "base", "new", "ipc_gain", "bw_gain");
            for c in &self.comparisons {
                let _ = writeln!(
                    out,
                    "{:<24} {:<16} {:<16} {:>10} {:>10}",
                    c.image,
                    c.base,
                    c.new,
                    pct(c.ipc_gain_pct),
                    pct(c.bandwidth_gain_pct)
                );
            }
            for g in &self.geomean {
                let _ = writeln!(
                    out,
                    "{:<24} {:<16} {:<16} {:>10} {:>10}",
                    "geomean",
                    g.base,
                    g.new,
                    pct(g.ipc_gain_pct),
                    pct(g.bandwidth_gain_pct)
                );
            }
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn config_specs() {
        let c = parse_config_spec("cva6s+/legacy").unwrap();
        assert_eq!(c.mem.dcache.kind, CacheKind::Legacy);
        let c = parse_config_spec("cva6/hpd-pf").unwrap();
        assert_eq!(c.mem.dcache.kind, CacheKind::Hpd);
        assert!(c.mem.dcache.prefetch);
        assert_eq!(c.issue.width, 1);
        assert!(parse_config_spec("cva6/fast").is_err());
        assert!(parse_config_spec("bogus").is_err());
    }

    #[test]
    fn geomean_of_equal_ratios() {
        let g = geomean_gain(&[(1.0, 2.0), (3.0, 6.0)]).unwrap();
        assert!((g - 100.0).abs() < 1e-9);
        assert_eq!(geomean_gain(&[(0.0, 1.0)]), None);
        assert_eq!(gain_pct(2.0, 3.0), Some(50.0));
    }
}
