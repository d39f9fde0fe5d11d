//! Fixtures shared by the benchmarks.

use rand::rngs::StdRng;
use rand::SeedableRng;
use tspower_core::ensemble::random_case;
use tspower_core::{Branch, LineSpectrum, Netlist, NetworkSolution, Port, Unit};

fn port() -> Port {
    Port {
        plus: "p".into(),
        ground: "0".into(),
    }
}

/// 10 ohm in parallel with 0.3 F.
pub fn flicker_netlist() -> Netlist {
    Netlist::new(
        vec![
            Branch::resistor("R1", 10.0, "p", "0"),
            Branch::capacitor("C1", 0.3, "p", "0"),
        ],
        port(),
    )
    .expect("valid netlist")
}

/// `10 sqrt(2) (1 + 0.1 cos 0.2t) cos t`
pub fn flicker_source() -> LineSpectrum {
    let peak = 10.0 * 2f64.sqrt();
    LineSpectrum::from_tones(
        Unit::Volt,
        &[
            (peak, 1.0, 0.0),
            (0.05 * peak, 0.8, 0.0),
            (0.05 * peak, 1.2, 0.0),
        ],
    )
    .expect("commensurate")
}

/// Ladder of `sections` series R-L / shunt C sections.
pub fn ladder(sections: usize) -> Netlist {
    let mut branches = Vec::with_capacity(3 * sections);
    let mut prev = "p".to_string();
    for k in 0..sections {
        let mid = format!("m{k}");
        let next = format!("n{k}");
        branches.push(Branch::resistor(format!("R{k}"), 0.5, &prev, &mid));
        branches.push(Branch::inductor(format!("L{k}"), 0.2, &mid, &next));
        branches.push(Branch::capacitor(format!("C{k}"), 0.8, &next, "0"));
        prev = next;
    }
    Netlist::new(branches, port()).expect("valid ladder")
}

/// `lines` harmonics of 1 rad/s with decreasing amplitude.
pub fn harmonic_source(lines: usize) -> LineSpectrum {
    let tones: Vec<(f64, f64, f64)> = (1..=lines)
        .map(|n| (10.0 / n as f64, n as f64, 0.3 * n as f64))
        .collect();
    LineSpectrum::from_tones(Unit::Volt, &tones).expect("harmonic")
}

/// Solved cases drawn from the balance ensemble.
pub fn random_solutions(seed: u64, count: usize) -> Vec<NetworkSolution> {
    let mut rng = StdRng::seed_from_u64(seed);
    (0..count).map(|_| random_case(&mut rng, 10, 8).2).collect()
}
