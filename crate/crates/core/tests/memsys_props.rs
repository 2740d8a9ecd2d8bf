use std::collections::HashMap;

use proptest::prelude::*;

use dualsim_core::engine::{Preset, RunExit, SimConfig, Simulator};
use dualsim_core::harness::random_program;
use dualsim_core::isa::encode::{reg::*, Assembler};
use dualsim_core::isa::{Memory, Mnemonic};
use dualsim_core::memsys::dram::MainMemory;
use dualsim_core::memsys::prefetch::Prefetcher;
use dualsim_core::memsys::{CacheConfig, CacheKind, DataCache, Reject, Request, WritePolicy};
use dualsim_core::program::{ProgramImage, Segment};

const REGION: u32 = 0x1_0000;

#[derive(Clone, Copy, Debug)]
enum Access {
    Read(u32),
    Write(u32, u32),
}

fn access() -> impl Strategy<Value = Access> {
    // Word-aligned addresses over 64 lines that all map to a handful of sets,
    // so evictions, merges and MSHR pressure all happen.
    let addr = (0u32..64, 0u32..16).prop_map(|(line, word)| REGION + line * 0x400 + word * 4);
    prop_oneof![addr.clone().prop_map(Access::Read), (addr, any::<u32>()).prop_map(|(a, d)| Access::Write(a, d))]
}

fn cache_config(kind: CacheKind, policy: WritePolicy, prefetch: bool) -> CacheConfig {
    CacheConfig { kind, policy, prefetch, ..CacheConfig::dcache() }
}

/// Feeds `accesses` to a cache one per cycle (retrying rejected ones),
/// checking every load against a byte-level shadow of the latest stores and
/// the MSHR bound every cycle. Returns the cache, memory and final cycle.
fn drive(cfg: CacheConfig, accesses: &[Access]) -> (DataCache, MainMemory, u64) {
    let mut cache = DataCache::new(cfg);
    let mut dram = MainMemory::new(20, 8);
    dram.record_requests();
    let mut backing = Memory::new();
    backing.map_page(REGION);
    for page in (REGION..REGION + 64 * 0x400).step_by(4096) {
        backing.map_page(page);
    }
    let mut shadow: HashMap<u32, u32> = HashMap::new();
    let mut now = 0u64;
    let mut pending = accesses.iter().copied().peekable();
    while let Some(&next) = pending.peek() {
        let done = dram.tick(now);
        cache.on_responses(&done, now, &mut dram, &mut backing);
        let req = match next {
            Access::Read(a) => Request::read(a, 4),
            Access::Write(a, d) => Request::write(a, 4, d),
        };
        match cache.access(req, now, &mut dram, &mut backing) {
            Ok(resp) => {
                match next {
                    Access::Read(a) => {
                        assert_eq!(resp.data, shadow.get(&a).copied().unwrap_or(0), "load {a:#x} at {now}")
                    }
                    Access::Write(a, d) => {
                        shadow.insert(a, d);
                    }
                }
                pending.next();
            }
            Err(Reject::Blocked | Reject::MshrFull | Reject::PortBusy) => {}
        }
        assert!(cache.mshr().len() <= cache.mshr().depth());
        now += 1;
    }
    while dram.in_flight() > 0 {
        let done = dram.tick(now);
        cache.on_responses(&done, now, &mut dram, &mut backing);
        assert!(cache.mshr().len() <= cache.mshr().depth());
        now += 1;
    }
    (cache, dram, now)
}

/// Two independent loads (or more) to distinct lines, back to back.
fn independent_loads(offsets: &[u32]) -> ProgramImage {
    let mut a = Assembler::new(0x8000_0000);
    a.li(S0, 0x8010_0000);
    let dests = [T0, T1, T2, A0, A1, A2, A3, A4];
    for (i, &off) in offsets.iter().enumerate() {
        a.load(Mnemonic::Lw, dests[i], S0, off as i32);
    }
    a.ebreak();
    ProgramImage {
        segments: vec![
            Segment { addr: 0x8000_0000, bytes: a.finish() },
            Segment { addr: 0x8010_0000, bytes: vec![0; 2048] },
        ],
        entry_pc: 0x8000_0000,
        tohost_addr: None,
    }
}

/// Whether `lines` contains four entries (in order) with one repeated
/// nonzero stride of at most `window` lines.
fn has_confirmed_stride(lines: &[i64], window: i64) -> bool {
    let n = lines.len();
    for i in 0..n {
        for j in i + 1..n {
            let s = lines[j] - lines[i];
            if s == 0 || s.abs() > window {
                continue;
            }
            for k in j + 1..n {
                if lines[k] - lines[j] != s {
                    continue;
                }
                if lines[k + 1..].iter().any(|&l| l - lines[k] == s) {
                    return true;
                }
            }
        }
    }
    false
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn loads_see_the_latest_store(
        accesses in prop::collection::vec(access(), 1..300),
        kind in prop_oneof![Just(CacheKind::Legacy), Just(CacheKind::Hpd)],
        policy in prop_oneof![Just(WritePolicy::WriteBack), Just(WritePolicy::WriteThrough)],
        prefetch in any::<bool>(),
    ) {
        drive(cache_config(kind, policy, prefetch), &accesses);
    }

    #[test]
    fn one_outstanding_fill_per_line(
        accesses in prop::collection::vec(access(), 1..300),
        kind in prop_oneof![Just(CacheKind::Legacy), Just(CacheKind::Hpd)],
        prefetch in any::<bool>(),
    ) {
        let (cache, dram, _) = drive(cache_config(kind, WritePolicy::WriteBack, prefetch), &accesses);
        let line = cache.config().line_bytes;
        let fills: Vec<_> = dram.request_log().iter().filter(|r| !r.is_write && r.bytes == line).collect();
        for (i, a) in fills.iter().enumerate() {
            for b in &fills[i + 1..] {
                let overlap = a.issue_cycle < b.ready_cycle && b.issue_cycle < a.ready_cycle;
                prop_assert!(!(a.addr == b.addr && overlap), "{a:?} {b:?}");
            }
        }
    }

    #[test]
    fn random_programs_keep_memory_coherent(
        seed in any::<u64>(),
        kind in prop_oneof![Just(CacheKind::Legacy), Just(CacheKind::Hpd)],
        policy in prop_oneof![Just(WritePolicy::WriteBack), Just(WritePolicy::WriteThrough)],
    ) {
        let mut cfg = SimConfig::preset(Preset::Cva6sPlus);
        cfg.cosim = true;
        cfg.mem.dcache.kind = kind;
        cfg.mem.dcache.policy = policy;
        // Cosim compares every load and the drained memory image.
        let r = Simulator::new(cfg, &random_program(seed, 200, true)).unwrap().run().unwrap();
        prop_assert_eq!(r.exit, RunExit::Ebreak);
    }

    #[test]
    fn hot_line_survives_fewer_than_ways_intervening_lines(
        others in prop::collection::vec(1u32..40, 1..200),
        k in 1usize..8,
    ) {
        let cfg = cache_config(CacheKind::Hpd, WritePolicy::WriteBack, false);
        let stride = cfg.size_bytes / cfg.ways;
        let hot = REGION;
        let mut stream = vec![Access::Read(hot)];
        let mut distinct = Vec::new();
        for &o in &others {
            let addr = REGION + o * stride;
            if !distinct.contains(&addr) {
                distinct.push(addr);
            }
            if distinct.len() == k + 1 {
                stream.push(Access::Read(hot));
                distinct = vec![addr];
            }
            stream.push(Access::Read(addr));
        }
        stream.push(Access::Read(hot));
        // One access at a time, each finished before the next.
        let mut cache = DataCache::new(cfg);
        let mut dram = MainMemory::new(20, 8);
        let mut backing = Memory::new();
        let mut now = 0;
        for (i, acc) in stream.iter().enumerate() {
            let Access::Read(a) = *acc else { unreachable!() };
            let resp = cache.access(Request::read(a, 4), now, &mut dram, &mut backing).unwrap();
            while now < resp.ready_cycle || dram.in_flight() > 0 {
                now += 1;
                let done = dram.tick(now);
                cache.on_responses(&done, now, &mut dram, &mut backing);
            }
            now += 1;
            if i > 0 && a == hot {
                prop_assert!(resp.hit, "hot line evicted before access {i}");
            }
            let mut ranks = cache.tags().lru_ranks(hot);
            ranks.sort_unstable();
            prop_assert_eq!(ranks, (0..cfg.ways as u8).collect::<Vec<_>>());
        }
    }

    #[test]
    fn nonblocking_beats_blocking_on_independent_misses(
        lines in prop::collection::btree_set(0u32..32, 2..6),
    ) {
        let offsets: Vec<u32> = lines.iter().map(|l| l * 64).collect();
        let img = independent_loads(&offsets);
        let cycles = |kind| {
            let mut cfg = SimConfig::preset(Preset::Cva6sPlus);
            cfg.cosim = true;
            cfg.mem.dcache.kind = kind;
            Simulator::new(cfg, &img).unwrap().run().unwrap().stats.cycles
        };
        let (legacy, hpd) = (cycles(CacheKind::Legacy), cycles(CacheKind::Hpd));
        prop_assert!(hpd < legacy, "hpd {hpd} legacy {legacy}");
    }

    #[test]
    fn unpatterned_miss_streams_never_prefetch(lines in prop::collection::vec(0i64..4000, 1..60)) {
        prop_assume!(!has_confirmed_stride(&lines, 16));
        let mut p = Prefetcher::new(2);
        for &l in &lines {
            prop_assert!(p.train(l).is_empty());
            prop_assert!(p.streams().iter().all(|s| s.confidence < 2));
        }
    }
}

#[test]
fn confirmed_stride_oracle_finds_sequential_runs() {
    assert!(has_confirmed_stride(&[5, 100, 6, 7, 300, 8], 16));
    assert!(!has_confirmed_stride(&[5, 6, 7, 100], 16));
}
