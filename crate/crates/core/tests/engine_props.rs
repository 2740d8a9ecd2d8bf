use proptest::prelude::*;

use dualsim_core::engine::{Preset, RunExit, RunResult, SimConfig, SimError, Simulator};
use dualsim_core::frontend::PredictorKind;
use dualsim_core::harness::{generate_kernel, random_program, random_program_with, KernelKind, RandomOptions};
use dualsim_core::isa::encode::{reg::*, Assembler};
use dualsim_core::isa::{run_reference, IsaConfig, Mnemonic};
use dualsim_core::program::{ProgramImage, Segment};

const BASE: u32 = 0x8000_0000;
const DATA: u32 = 0x8010_0000;

fn image(f: impl FnOnce(&mut Assembler)) -> ProgramImage {
    let mut a = Assembler::new(BASE);
    f(&mut a);
    ProgramImage {
        segments: vec![Segment { addr: BASE, bytes: a.finish() }, Segment { addr: DATA, bytes: vec![0; 4096] }],
        entry_pc: BASE,
        tohost_addr: None,
    }
}

fn traced(mut cfg: SimConfig) -> SimConfig {
    cfg.cosim = true;
    cfg.trace = true;
    cfg
}

fn run(cfg: SimConfig, img: &ProgramImage) -> RunResult {
    Simulator::new(cfg, img).unwrap().run().unwrap()
}

fn config_from_bits(bits: u8) -> SimConfig {
    let mut cfg = SimConfig::preset(Preset::Cva6sPlus);
    cfg.issue.width = if bits & 1 != 0 { 2 } else { 1 };
    cfg.issue.renaming = bits & 2 != 0;
    cfg.issue.alu_forwarding = bits & 4 != 0;
    cfg.bp.kind = if bits & 8 != 0 { PredictorKind::TwoLevel } else { PredictorKind::Bimodal };
    cfg
}

#[test]
fn identical_runs_are_bit_identical() {
    let img = generate_kernel(&KernelKind::Gather, &KernelKind::Gather.default_params()).unwrap();
    for p in Preset::ALL {
        let a = run(traced(SimConfig::preset(p)), &img);
        let b = run(traced(SimConfig::preset(p)), &img);
        assert_eq!(a.stats, b.stats);
        assert_eq!(a.trace, b.trace);
    }
}

#[test]
fn back_to_back_divides_wait_for_the_unit() {
    let img = image(|a| {
        a.li(T0, 1000);
        a.li(T1, 7);
        a.op(Mnemonic::Div, A0, T0, T1);
        a.op(Mnemonic::Div, A1, T1, T0);
        a.ebreak();
    });
    let cfg = traced(SimConfig::preset(Preset::Cva6sPlus));
    let r = run(cfg, &img);
    let divs: Vec<_> = r.trace.iter().filter(|e| e.mnemonic == Mnemonic::Div).collect();
    assert_eq!(divs.len(), 2);
    // Busy-unit schedule: the unit accepts a new divide once the previous one
    // has held it for its full latency.
    let expected_second = divs[0].issue_cycle + cfg.issue.lat.div;
    assert_eq!(divs[1].issue_cycle, expected_second);
}

#[test]
fn load_hit_feeds_a_consumer_three_cycles_after_issue() {
    let img = image(|a| {
        a.li(S0, DATA);
        a.load(Mnemonic::Lw, T0, S0, 0);
        // Enough independent work for the line to arrive.
        for _ in 0..60 {
            a.opi(Mnemonic::Addi, T2, T2, 1);
        }
        a.load(Mnemonic::Lw, T1, S0, 4);
        a.op(Mnemonic::Add, A0, T1, T1);
        a.ebreak();
    });
    for p in Preset::ALL {
        let r = run(traced(SimConfig::preset(p)), &img);
        let loads: Vec<_> = r.trace.iter().filter(|e| e.mnemonic == Mnemonic::Lw).collect();
        assert!(loads[1].events.dhit, "{p:?}");
        let consumer = r.trace.iter().find(|e| e.mnemonic == Mnemonic::Add).unwrap();
        assert_eq!(consumer.issue_cycle, loads[1].issue_cycle + 3, "{p:?}");
    }
}

#[test]
fn dropped_writeback_diverges_at_the_first_consumer() {
    let mut consumer_pc = 0;
    let img = image(|a| {
        a.opi(Mnemonic::Addi, A0, ZERO, 5);
        for i in 0..10 {
            a.opi(Mnemonic::Addi, T0 + (i % 3) as u8, ZERO, i);
        }
        consumer_pc = a.pc();
        a.op(Mnemonic::Add, A1, A0, A0);
        a.ebreak();
    });
    for p in Preset::ALL {
        let mut sim = Simulator::new(traced(SimConfig::preset(p)), &img).unwrap();
        sim.inject_dropped_writeback(1);
        match sim.run() {
            Err(SimError::Divergence(d)) => assert_eq!(d.pc, consumer_pc, "{p:?}: {d:?}"),
            other => panic!("{p:?}: expected divergence, got {other:?}"),
        }
    }
}

#[test]
fn dual_issue_retires_pairs_in_one_cycle() {
    let img = image(|a| {
        for r in [T0, T1, T2, A0, A1, A2, A3, A4] {
            a.opi(Mnemonic::Addi, r, ZERO, 1);
        }
        a.ebreak();
    });
    let r = run(traced(SimConfig::preset(Preset::Cva6sPlus)), &img);
    let mut per_cycle = std::collections::BTreeMap::<u64, usize>::new();
    for e in &r.trace {
        *per_cycle.entry(e.cycle).or_default() += 1;
    }
    assert!(per_cycle.values().all(|&n| n <= 2));
    assert!(per_cycle.values().filter(|&&n| n == 2).count() >= 3, "{per_cycle:?}");
}

#[test]
fn feature_ladder_orders_cycles_on_ilp_and_branches() {
    let mut cycles = Vec::new();
    for kind in [KernelKind::Ilp, KernelKind::branch_period(3)] {
        let img = generate_kernel(&kind, &kind.default_params()).unwrap();
        let base = SimConfig::preset(Preset::Cva6);
        let mut wide = base;
        wide.issue.width = 2;
        let plus = SimConfig::preset(Preset::Cva6sPlus);
        let c: Vec<u64> = [base, wide, plus].into_iter().map(|cfg| run(cfg, &img).stats.cycles).collect();
        cycles.push(c);
    }
    let total = |i: usize| cycles.iter().map(|c| c[i]).sum::<u64>();
    assert!(total(0) > total(1), "{cycles:?}");
    assert!(total(1) > total(2), "{cycles:?}");
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn stall_causes_partition_the_cycles(seed in any::<u64>(), bits in 0u8..16) {
        let cfg = config_from_bits(bits);
        let img = random_program(seed, 120, true);
        let mut sim = Simulator::new(cfg, &img).unwrap();
        while sim.tick().unwrap().is_none() {
            let s = sim.stats();
            prop_assert_eq!(s.full_issue_cycles + s.partial_issue_cycles + s.stall_cycles.total(), s.cycles);
        }
        let s = sim.stats();
        prop_assert_eq!(s.full_issue_cycles + s.partial_issue_cycles + s.stall_cycles.total(), s.cycles);
    }

    #[test]
    fn ipc_never_exceeds_width(seed in any::<u64>(), bits in 0u8..16) {
        let cfg = config_from_bits(bits);
        let r = run(cfg, &random_program(seed, 150, true));
        prop_assert!(r.stats.retired <= r.stats.cycles * cfg.issue.width as u64);
        prop_assert!(r.stats.ipc <= cfg.issue.width as f64);
    }

    #[test]
    fn only_correct_path_instructions_retire(seed in any::<u64>(), bits in 0u8..16) {
        let cfg = traced(config_from_bits(bits));
        let img = random_program_with(seed, 150, RandomOptions { fpu: true, counters: false });
        let reference = run_reference(img.arch_state(IsaConfig { fpu: true }), 100_000).unwrap();
        let r = run(cfg, &img);
        prop_assert_eq!(r.exit, RunExit::Ebreak);
        let pcs: Vec<u32> = r.trace.iter().map(|e| e.pc).collect();
        let ref_pcs: Vec<u32> = reference.records.iter().map(|e| e.pc).collect();
        prop_assert_eq!(pcs, ref_pcs);
        prop_assert!(r.trace.windows(2).all(|w| w[0].tag < w[1].tag));
        prop_assert!(r.trace.iter().all(|e| e.fetch_cycle + 2 <= e.issue_cycle && e.issue_cycle < e.cycle));
    }
}
