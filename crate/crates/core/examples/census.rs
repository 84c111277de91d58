//! Prints a summary of one enumeration: `cargo run --release --example census -- 21 256 [cond]`.

use std::time::Instant;

use aitlab::{enumerate, BitString, EnumParams};

fn main() {
    let args: Vec<String> = std::env::args().skip(1).collect();
    let max_len = args.first().map_or(21, |s| s.parse().expect("L"));
    let budget = args.get(1).map_or(256, |s| s.parse().expect("T"));
    let cond = args.get(2).map_or(BitString::new(), |s| {
        BitString::parse(s).expect("condition bits")
    });
    let params = EnumParams::new(max_len, budget, cond).expect("parameters");

    let start = Instant::now();
    let table = enumerate(&params).expect("enumeration");
    let elapsed = start.elapsed();

    let programs: u64 = table.records().filter_map(|r| r.program_count).sum();
    println!(
        "L={} T={} cond={}: {} outputs, {} halting programs, total mass {} ({:.6}), {:.2?}",
        params.max_len,
        params.step_budget,
        params.condition.to_dash_string(),
        table.len(),
        programs,
        table.total_mass(),
        table.total_mass().value(),
        elapsed
    );
    for r in table.records().take(24) {
        println!(
            "  {:>12} K={:>2} m={} witness={}",
            r.output.to_dash_string(),
            r.min_len,
            r.mass,
            r.witness
        );
    }
}
