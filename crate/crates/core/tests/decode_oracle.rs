//! Decoder cross-check against a frozen disassembler fixture
//! (`tests/data/decode_oracle.txt`, regenerated by the script beside it).

use dualsim_core::isa::{decode, Mnemonic, RawFetchWord, Reg};

fn parse_reg(s: &str) -> Reg {
    let (file, idx) = s.split_at(1);
    let idx: u8 = idx.parse().unwrap();
    match file {
        "x" => Reg::X(idx),
        _ => Reg::F(idx),
    }
}

#[test]
fn decoder_agrees_with_disassembler_fixture() {
    let fixture = include_str!("data/decode_oracle.txt");
    let mut checked = 0;
    let mut failures = Vec::new();
    for line in fixture.lines() {
        let fields: Vec<&str> = line.split_whitespace().collect();
        let raw = u32::from_str_radix(fields[0], 16).unwrap();
        let mut bytes = [0u8; 8];
        bytes[..4].copy_from_slice(&raw.to_le_bytes());
        let got = decode(&RawFetchWord::new(bytes, 0), 0);
        let verdict = match (fields[1], &got) {
            ("ILLEGAL" | "EXCLUDED", Err(_)) => Ok(()),
            ("ILLEGAL" | "EXCLUDED", Ok(i)) => Err(format!("accepted as {i}")),
            ("HINT", Ok(inst)) if inst.mnemonic.name() == fields[2] => Ok(()),
            (_, Err(e)) => Err(format!("rejected ({e}), expected {}", fields[2])),
            (_, Ok(inst)) => {
                let mut regs: Vec<Reg> = inst.sources().into_iter().flatten().collect();
                regs.extend(inst.dest());
                regs.push(Reg::X(0));
                if inst.mnemonic.name() != fields[2] {
                    Err(format!("mnemonic {} != {}", inst.mnemonic, fields[2]))
                } else if let Some(r) =
                    fields[3].split(',').filter(|r| *r != "-").map(parse_reg).find(|r| !regs.contains(r))
                {
                    Err(format!("register {r} not an operand of {inst}"))
                } else if fields[4] != "-" {
                    let want: i64 = fields[4].parse().unwrap();
                    let have = match inst.mnemonic {
                        Mnemonic::Lui | Mnemonic::Auipc => (inst.imm as u32 >> 12) as i64,
                        _ => inst.imm as i64,
                    };
                    if have == want {
                        Ok(())
                    } else {
                        Err(format!("imm {have} != {want}"))
                    }
                } else {
                    Ok(())
                }
            }
        };
        checked += 1;
        if let Err(msg) = verdict {
            failures.push(format!("{}: {msg}", fields[0]));
        }
    }
    assert!(checked >= 10_000);
    assert!(failures.is_empty(), "{} mismatches:\n{}", failures.len(), failures[..failures.len().min(40)].join("\n"));
}
