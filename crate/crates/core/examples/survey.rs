//! Runs every catalog entry with all checks and prints per-check aggregates.

use std::time::Instant;

use immerse_core::catalog::list_entries;
use immerse_core::checks::Verdict;
use immerse_core::runner::{run, RunSpec};

fn main() {
    let only: Vec<String> = std::env::args().skip(1).collect();
    for entry in list_entries() {
        if !only.is_empty() && !only.iter().any(|o| o == entry.name()) {
            continue;
        }
        let name = entry.name().to_string();
        let spec = RunSpec::from_entry(entry);
        let t = Instant::now();
        let out = match run(&spec) {
            Ok(o) => o,
            Err(e) => {
                println!("{name}: error {e}");
                continue;
            }
        };
        println!(
            "== {name} ({:.2}s) slice={} errors={}",
            t.elapsed().as_secs_f64(),
            out.slice.label(),
            out.errors.len()
        );
        for e in out.errors.iter().take(3) {
            println!("   sample {} {:?}: {}", e.index, e.point, e.message);
        }
        for a in &out.aggregates {
            let flag = if a.verdict == Verdict::Fail {
                "FAIL"
            } else {
                "    "
            };
            let note = out
                .results_for(&a.name)
                .find(|r| r.verdict == Verdict::Fail || r.verdict == Verdict::NotApplicable)
                .map(|r| r.notes.clone())
                .unwrap_or_default();
            println!(
                "{flag} {:28} {:>14} max|v|={:.3e} min={:.3e} p/f/na={}/{}/{} {:?} {}",
                a.name,
                a.verdict.to_string(),
                a.max_abs,
                a.min_value,
                a.pass,
                a.fail,
                a.not_applicable,
                a.labels,
                note
            );
        }
    }
}
