//! Workloads shared by the benchmarks in `benches/`.

use std::fmt::Write as _;

use commitlab::demo;
use commitlab::{Protocol, Scenario, Trace};

/// A protocol of `n` chained offers: each message creates a commitment
/// detached by the next one.
pub fn synthetic_protocol(n: usize) -> String {
    let mut src = String::from("protocol Chain\n  roles A, B\n  param x: value\n");
    for i in 0..n {
        let (from, to) = if i % 2 == 0 { ("A", "B") } else { ("B", "A") };
        let _ = writeln!(src, "  message m{i}: {from} -> {to} (x)");
        let _ = writeln!(
            src,
            "    create C({from}, {to}, m{}({to}, {from}, x), done({from}, x))",
            i + 1
        );
    }
    let _ = writeln!(src, "  message m{n}: B -> A (x)");
    src.push_str("end\n");
    src
}

pub fn appointment() -> Protocol {
    demo::appointment_protocol()
}

pub fn showup_scenario() -> Scenario {
    Scenario::parse(demo::APPOINTMENT_SHOWUP_SCENARIO).expect("bundled scenario parses")
}

pub fn showup_trace() -> Trace {
    commitlab::run(&appointment(), &showup_scenario())
        .expect("bundled scenario runs")
        .trace
}
