//! Random netlists and sources for property checks and benchmarks.
//!
//! Element values are log-uniform. Sources are commensurate: every line is an
//! integer harmonic of a random base frequency.

use rand::seq::SliceRandom;
use rand::Rng;

use crate::network::{solve, Branch, BranchKind, Netlist, NetworkSolution, Port};
use crate::spectrum::{LineSpectrum, SpectralLine, Unit};
use crate::Complex64;

pub fn log_uniform<R: Rng + ?Sized>(rng: &mut R, lo: f64, hi: f64) -> f64 {
    (rng.gen_range(lo.ln()..hi.ln())).exp()
}

fn port() -> Port {
    Port {
        plus: "p".into(),
        ground: "0".into(),
    }
}

/// Connected netlist with `1..=max_branches` branches of random kind on a
/// random graph. Values are log-uniform in `[lo, hi]`.
pub fn random_netlist<R: Rng + ?Sized>(
    rng: &mut R,
    max_branches: usize,
    lo: f64,
    hi: f64,
) -> Netlist {
    let n_branches = rng.gen_range(1..=max_branches.max(1));
    let n_internal = rng.gen_range(0..n_branches);
    // spanning tree through the port terminals and every internal node, so
    // the port is never left open by construction
    let mut pending: Vec<String> = (0..n_internal).map(|k| format!("n{k}")).collect();
    pending.push("0".to_string());
    pending.shuffle(rng);
    let mut nodes = vec!["p".to_string()];
    let mut ends: Vec<(String, String)> = Vec::with_capacity(n_branches);
    for name in pending {
        let other = nodes.choose(rng).expect("nonempty").clone();
        ends.push((other, name.clone()));
        nodes.push(name);
    }
    while ends.len() < n_branches {
        let a = nodes.choose(rng).expect("nonempty").clone();
        let b = nodes.choose(rng).expect("nonempty").clone();
        if a != b {
            ends.push((a, b));
        }
    }
    let kinds = [
        BranchKind::Resistor,
        BranchKind::Inductor,
        BranchKind::Capacitor,
    ];
    let branches = ends
        .into_iter()
        .enumerate()
        .map(|(k, (a, b))| {
            let kind = *kinds.choose(rng).expect("nonempty");
            Branch::new(format!("B{k}"), kind, log_uniform(rng, lo, hi), &a, &b)
        })
        .collect();
    Netlist::new(branches, port()).expect("generated netlist is connected")
}

/// Netlist in which every inductor has a series resistor and every capacitor
/// a parallel resistor, so all natural modes are damped.
pub fn random_dissipative_netlist<R: Rng + ?Sized>(rng: &mut R, max_branches: usize) -> Netlist {
    loop {
        let mut branches = Vec::new();
        let mut next_node = 0usize;
        grow(rng, "p", "0", 0, &mut branches, &mut next_node);
        if branches.len() <= max_branches {
            return Netlist::new(branches, port()).expect("series-parallel netlist is connected");
        }
    }
}

fn grow<R: Rng + ?Sized>(
    rng: &mut R,
    a: &str,
    b: &str,
    depth: usize,
    out: &mut Vec<Branch>,
    next_node: &mut usize,
) {
    let fresh = |next: &mut usize| {
        *next += 1;
        format!("m{}", *next - 1)
    };
    let id = |out: &Vec<Branch>| format!("B{}", out.len());
    let choice = if depth >= 2 {
        rng.gen_range(0..3)
    } else {
        rng.gen_range(0..5)
    };
    match choice {
        0 => out.push(Branch::resistor(id(out), log_uniform(rng, 0.5, 5.0), a, b)),
        1 => {
            let m = fresh(next_node);
            out.push(Branch::resistor(id(out), log_uniform(rng, 0.5, 5.0), a, &m));
            out.push(Branch::inductor(id(out), log_uniform(rng, 0.1, 1.0), &m, b));
        }
        2 => {
            out.push(Branch::resistor(id(out), log_uniform(rng, 0.5, 5.0), a, b));
            out.push(Branch::capacitor(id(out), log_uniform(rng, 0.1, 1.0), a, b));
        }
        3 => {
            let m = fresh(next_node);
            grow(rng, a, &m, depth + 1, out, next_node);
            grow(rng, &m, b, depth + 1, out, next_node);
        }
        _ => {
            grow(rng, a, b, depth + 1, out, next_node);
            grow(rng, a, b, depth + 1, out, next_node);
        }
    }
}

/// Port voltage with `1..=max_lines` lines on harmonics `1..=max_harmonic` of
/// a base frequency in `[0.3, 3]` rad/s, plus an optional DC line.
pub fn random_source<R: Rng + ?Sized>(
    rng: &mut R,
    max_lines: usize,
    max_harmonic: u32,
    with_dc: bool,
) -> LineSpectrum {
    let base = log_uniform(rng, 0.3, 3.0);
    let mut harmonics: Vec<u32> = (1..=max_harmonic).collect();
    harmonics.shuffle(rng);
    let ac_lines = rng.gen_range(1..=max_lines.max(1)).min(harmonics.len());
    let mut lines: Vec<SpectralLine> = harmonics[..ac_lines]
        .iter()
        .map(|&n| {
            let amp = Complex64::from_polar(log_uniform(rng, 0.1, 10.0), rng.gen_range(-3.1..3.1));
            SpectralLine::new(n as f64 * base, amp)
        })
        .collect();
    if with_dc {
        let dc = log_uniform(rng, 0.1, 10.0) * if rng.gen_bool(0.5) { 1.0 } else { -1.0 };
        lines.push(SpectralLine::new(0.0, Complex64::new(dc, 0.0)));
    }
    LineSpectrum::new(Unit::Volt, lines).expect("harmonic lines are commensurate")
}

/// One solved random case of the balance ensemble: at most `max_branches`
/// branches with values log-uniform in `[1e-2, 1e2]` and at most `max_lines`
/// source lines (DC included in roughly a third of the cases). Draws again if
/// the network happens to be singular at one of the source frequencies.
pub fn random_case<R: Rng + ?Sized>(
    rng: &mut R,
    max_branches: usize,
    max_lines: usize,
) -> (Netlist, LineSpectrum, NetworkSolution) {
    loop {
        let net = random_netlist(rng, max_branches, 1e-2, 1e2);
        let with_dc = max_lines > 1 && rng.gen_bool(1.0 / 3.0);
        let ac = if with_dc { max_lines - 1 } else { max_lines };
        let source = random_source(rng, ac, 12, with_dc);
        if let Ok(sol) = solve(&net, &source) {
            return (net, source, sol);
        }
    }
}
