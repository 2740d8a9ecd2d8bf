use dualsim_core::isa::encode::encode;
use dualsim_core::isa::exec::{execute, Counters};
use dualsim_core::isa::{
    decode, decode_word, step_reference, ArchState, DecodedInst, IsaConfig, Memory, OpClass, RawFetchWord,
};
use proptest::prelude::*;

fn decode_half(half: u16) -> Option<DecodedInst> {
    let mut bytes = [0u8; 8];
    bytes[..2].copy_from_slice(&half.to_le_bytes());
    decode(&RawFetchWord::new(bytes, 0x8000_0000), 0).ok()
}

/// Fields that define the operation, ignoring where and how it was encoded.
fn operation(i: &DecodedInst) -> (String, u8, u8, u8, Option<u8>, i32, u8) {
    (i.mnemonic.name().to_string(), i.rd, i.rs1, i.rs2, i.rs3, i.imm, i.rm)
}

#[test]
fn every_compressed_encoding_expands_to_an_equivalent_32_bit_instruction() {
    let mut legal = 0;
    for half in 0..=u16::MAX {
        if half & 3 == 3 {
            continue;
        }
        let Some(c) = decode_half(half) else { continue };
        legal += 1;
        assert_eq!(c.size, 2);
        let word = encode(&c);
        let full = decode_word(word, c.pc).unwrap_or_else(|e| panic!("{half:#06x} -> {word:#010x}: {e}"));
        assert_eq!(operation(&c), operation(&full), "{half:#06x}");

        let ops = [0x1234_5678u32.rotate_left(half as u32 % 31), 0x8000_0007, 0x3f80_0000];
        let a = execute(&c, ops, Counters::default());
        let b = execute(&full, ops, Counters::default());
        assert_eq!(a.mem, b.mem, "{half:#06x}");
        assert_eq!(a.taken, b.taken, "{half:#06x}");
        if c.opclass() == OpClass::Jump {
            assert_eq!(a.next_pc, b.next_pc);
            assert_eq!(a.value.map(|v| v + 2), b.value);
        } else {
            assert_eq!(a.value, b.value, "{half:#06x}");
            let step = if a.taken == Some(true) { 0 } else { 2 };
            assert_eq!(a.next_pc + step, b.next_pc, "{half:#06x}");
        }
    }
    assert!(legal > 30_000, "only {legal} legal compressed encodings");
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(20_000))]

    #[test]
    fn decode_is_total(bytes in any::<[u8; 8]>(), slot in 0u32..4) {
        let window = RawFetchWord::new(bytes, 0x1000);
        if let Ok(inst) = decode(&window, slot * 2) {
            let low = bytes[(slot * 2) as usize] & 3;
            prop_assert_eq!(inst.size, if low == 3 { 4 } else { 2 });
            prop_assert!(slot * 2 + inst.size as u32 <= 8);
            prop_assert_eq!(inst.pc, 0x1000 + slot * 2);
        }
    }

    #[test]
    fn encode_inverts_decode(word in any::<u32>()) {
        if let Ok(inst) = decode_word(word | 3, 0) {
            let again = decode_word(encode(&inst), 0).unwrap();
            prop_assert_eq!(operation(&inst), operation(&again));
        }
    }

    #[test]
    fn x0_stays_zero(word in any::<u32>(), regs in any::<[u32; 32]>()) {
        let Ok(inst) = decode_word(word | 3, 0x8000_0000) else { return Ok(()) };
        let mut mem = Memory::new();
        mem.write(0x8000_0000, 4, word | 3);
        let mut s = ArchState::new(0x8000_0000, mem, IsaConfig::default());
        s.x = regs;
        s.x[0] = 0;
        let (next, step) = step_reference(&s).unwrap();
        prop_assert_eq!(next.x[0], 0, "{}", inst);
        if inst.rd == 0 && inst.dest().is_none() {
            prop_assert_eq!(step.record.rd, None);
        }
    }

    #[test]
    fn reference_step_is_deterministic(word in any::<u32>(), regs in any::<[u32; 32]>()) {
        let mut mem = Memory::new();
        mem.write(0x8000_0000, 4, word);
        let mut s = ArchState::new(0x8000_0000, mem, IsaConfig::default());
        s.x = regs;
        s.x[0] = 0;
        let a = step_reference(&s);
        let b = step_reference(&s);
        prop_assert_eq!(format!("{a:?}"), format!("{b:?}"));
    }
}
