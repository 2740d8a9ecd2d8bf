//! `sim`: run one program on one configuration, or sweep kernels across
//! configurations.

use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};

use dualsim_core::engine::{trace, SimConfig, Simulator};
use dualsim_core::frontend::PredictorKind;
use dualsim_core::harness::{
    generate_kernel, load_elf, load_flat, parse_config_spec, run_compare, CellReport, KernelKind, RunReport, CODE_BASE,
    REPORT_VERSION,
};
use dualsim_core::memsys::CacheKind;
use dualsim_core::program::ProgramImage;

#[derive(Parser)]
#[command(name = "sim", version, about = "Cycle-level model of a dual-issue in-order RV32IMC core")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Simulate one program on one configuration.
    Run(RunArgs),
    /// Sweep bundled kernels across configurations and report gains.
    Compare(CompareArgs),
}

#[derive(Clone, Copy, ValueEnum)]
enum DcacheArg {
    Legacy,
    Hpd,
}

#[derive(Clone, Copy, ValueEnum)]
enum BpArg {
    Bimodal,
    TwoLevel,
}

#[derive(Args)]
struct RunArgs {
    /// Flat `key = value` config file.
    #[arg(long, conflicts_with = "preset")]
    config: Option<PathBuf>,
    /// Preset, optionally with a cache suffix: `cva6s+/legacy`, `cva6/hpd-pf`.
    #[arg(long)]
    preset: Option<String>,
    #[arg(long, value_enum)]
    dcache: Option<DcacheArg>,
    /// Enable the stream prefetcher (non-blocking cache only).
    #[arg(long)]
    prefetch: bool,
    #[arg(long, value_enum)]
    bp: Option<BpArg>,
    /// Extra `key=value` config overrides, applied last.
    #[arg(long = "set", value_name = "KEY=VALUE")]
    overrides: Vec<String>,

    #[arg(long, group = "program")]
    elf: Option<PathBuf>,
    /// Flat binary loaded and entered at 0x80000000.
    #[arg(long, group = "program")]
    bin: Option<PathBuf>,
    #[arg(long, group = "program")]
    kernel: Option<String>,
    /// Kernel working set in bytes.
    #[arg(long)]
    ws: Option<u32>,
    /// Kernel iterations.
    #[arg(long)]
    iters: Option<u32>,
    #[arg(long)]
    seed: Option<u64>,

    #[arg(long)]
    max_cycles: Option<u64>,
    /// Write the retirement trace (CSV) here.
    #[arg(long)]
    trace: Option<PathBuf>,
    /// Write the JSON report here.
    #[arg(long)]
    stats: Option<PathBuf>,
    /// Check every retirement against the reference interpreter.
    #[arg(long)]
    cosim: bool,
}

#[derive(Args)]
struct CompareArgs {
    /// Comma-separated config specs; the first is the baseline.
    #[arg(long, value_delimiter = ',', required = true)]
    presets: Vec<String>,
    /// Comma-separated kernel names.
    #[arg(long, value_delimiter = ',', required = true)]
    kernels: Vec<String>,
    #[arg(long)]
    ws: Option<u32>,
    #[arg(long)]
    iters: Option<u32>,
    #[arg(long)]
    seed: Option<u64>,
    /// Write the JSON report here.
    #[arg(long)]
    stats: Option<PathBuf>,
    /// Skip lock-step checking against the reference interpreter.
    #[arg(long)]
    no_cosim: bool,
}

fn kernel_image(name: &str, ws: Option<u32>, iters: Option<u32>, seed: Option<u64>) -> Result<ProgramImage> {
    let kind: KernelKind = name.parse()?;
    let mut params = kind.default_params();
    if let Some(ws) = ws {
        params.working_set_bytes = ws;
    }
    if let Some(it) = iters {
        params.iterations = it;
    }
    if let Some(s) = seed {
        params.seed = s;
    }
    Ok(generate_kernel(&kind, &params)?)
}

fn build_config(args: &RunArgs) -> Result<(String, SimConfig)> {
    let (name, mut cfg) = match (&args.config, &args.preset) {
        (Some(path), _) => {
            let text = std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
            let mut cfg = SimConfig::default();
            cfg.apply_text(&text).with_context(|| format!("in {}", path.display()))?;
            (path.display().to_string(), cfg)
        }
        (None, Some(spec)) => (spec.clone(), parse_config_spec(spec)?),
        (None, None) => ("cva6s+".to_string(), SimConfig::default()),
    };
    if let Some(d) = args.dcache {
        cfg.mem.dcache.kind = match d {
            DcacheArg::Legacy => CacheKind::Legacy,
            DcacheArg::Hpd => CacheKind::Hpd,
        };
    }
    if args.prefetch {
        cfg.mem.dcache.prefetch = true;
    }
    if let Some(bp) = args.bp {
        cfg.bp.kind = match bp {
            BpArg::Bimodal => PredictorKind::Bimodal,
            BpArg::TwoLevel => PredictorKind::TwoLevel,
        };
    }
    for o in &args.overrides {
        let (k, v) = o.split_once('=').with_context(|| format!("expected KEY=VALUE, got `{o}`"))?;
        cfg.set(k.trim(), v.trim())?;
    }
    if let Some(m) = args.max_cycles {
        cfg.max_cycles = m;
    }
    cfg.cosim |= args.cosim;
    cfg.trace = args.trace.is_some();
    cfg.validate()?;
    Ok((name, cfg))
}

fn run(args: RunArgs) -> Result<ExitCode> {
    let (config_name, cfg) = build_config(&args)?;
    let (image_name, image) = if let Some(p) = &args.elf {
        (p.display().to_string(), load_elf(p)?)
    } else if let Some(p) = &args.bin {
        let bytes = std::fs::read(p).with_context(|| format!("reading {}", p.display()))?;
        (p.display().to_string(), load_flat(bytes, CODE_BASE)?)
    } else if let Some(k) = &args.kernel {
        (k.clone(), kernel_image(k, args.ws, args.iters, args.seed)?)
    } else {
        bail!("one of --elf, --bin or --kernel is required");
    };

    let outcome = Simulator::new(cfg, &image)?.run();
    let (cell, code) = match outcome {
        Ok(r) => {
            if let Some(path) = &args.trace {
                std::fs::write(path, trace::render(&r.trace)).with_context(|| format!("writing {}", path.display()))?;
            }
            let s = &r.stats;
            println!("exit:       {:?}", r.exit);
            println!("cycles:     {}", s.cycles);
            println!("retired:    {}", s.retired);
            println!("ipc:        {:.3}", s.ipc);
            if s.roi.marked {
                println!("roi:        {} cycles, {} retired, ipc {:.3}", s.roi.cycles, s.roi.retired, s.roi.ipc);
            }
            println!("bandwidth:  {:.3} B/cycle", s.bandwidth_bytes_per_cycle);
            println!("branches:   {} ({} mispredicted)", s.branches, s.mispredicts);
            println!("dcache:     {} hits, {} misses, {} merges", s.dcache_hits, s.dcache_misses, s.mshr_merges);
            let code = if r.exit.is_clean() { ExitCode::SUCCESS } else { ExitCode::from(2) };
            let cell = CellReport {
                image: image_name,
                config: config_name,
                config_echo: cfg,
                exit: Some(r.exit),
                error: None,
                stats: Some(r.stats),
            };
            (cell, code)
        }
        Err(e) => {
            eprintln!("error: {e}");
            let cell = CellReport {
                image: image_name,
                config: config_name,
                config_echo: cfg,
                exit: None,
                error: Some(e.to_string()),
                stats: None,
            };
            (cell, ExitCode::FAILURE)
        }
    };
    if let Some(path) = &args.stats {
        let report = RunReport {
            report_version: REPORT_VERSION,
            failed: cell.error.is_some(),
            cells: vec![cell],
            comparisons: Vec::new(),
            geomean: Vec::new(),
        };
        std::fs::write(path, report.to_json()).with_context(|| format!("writing {}", path.display()))?;
    }
    Ok(code)
}

fn compare(args: CompareArgs) -> Result<ExitCode> {
    let configs = args
        .presets
        .iter()
        .map(|spec| {
            let mut cfg = parse_config_spec(spec)?;
            cfg.cosim = !args.no_cosim;
            Ok((spec.clone(), cfg))
        })
        .collect::<Result<Vec<_>>>()?;
    let images = args
        .kernels
        .iter()
        .map(|k| Ok((k.clone(), kernel_image(k, args.ws, args.iters, args.seed)?)))
        .collect::<Result<Vec<_>>>()?;
    let report = run_compare(&images, &configs);
    print!("{}", report.render_table());
    if let Some(path) = &args.stats {
        std::fs::write(path, report.to_json()).with_context(|| format!("writing {}", path.display()))?;
    }
    Ok(if report.failed { ExitCode::FAILURE } else { ExitCode::SUCCESS })
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Run(a) => run(a),
        Command::Compare(a) => compare(a),
    };
    match result {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}
