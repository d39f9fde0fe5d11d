//! Single-port RLC load networks and their frequency-domain solution.
//!
//! The port is an ideal voltage source between `port.plus` and `port.ground`;
//! the ground node is the MNA reference. Unknowns are the non-ground node
//! voltages, one current per inductor and the source current, so the DC line
//! needs no special treatment (inductors become shorts, capacitors opens).

use std::collections::HashMap;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{Lu, Matrix};
use crate::spectrum::{LineSpectrum, Unit};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum BranchKind {
    Resistor,
    Inductor,
    Capacitor,
}

impl BranchKind {
    /// Branch impedance `Z(jw)`.
    pub fn impedance(self, value: f64, omega: f64) -> Complex64 {
        match self {
            BranchKind::Resistor => Complex64::new(value, 0.0),
            BranchKind::Inductor => Complex64::new(0.0, omega * value),
            BranchKind::Capacitor => Complex64::new(0.0, -1.0 / (omega * value)),
        }
    }
}

/// A two-terminal element. Positive current flows from `nodes.0` to
/// `nodes.1` through the element and the branch voltage is `v(a) - v(b)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Branch {
    pub id: String,
    pub kind: BranchKind,
    pub value: f64,
    pub nodes: (String, String),
}

impl Branch {
    pub fn new(id: impl Into<String>, kind: BranchKind, value: f64, a: &str, b: &str) -> Self {
        Self {
            id: id.into(),
            kind,
            value,
            nodes: (a.to_string(), b.to_string()),
        }
    }

    pub fn resistor(id: impl Into<String>, ohms: f64, a: &str, b: &str) -> Self {
        Self::new(id, BranchKind::Resistor, ohms, a, b)
    }

    pub fn inductor(id: impl Into<String>, henry: f64, a: &str, b: &str) -> Self {
        Self::new(id, BranchKind::Inductor, henry, a, b)
    }

    pub fn capacitor(id: impl Into<String>, farad: f64, a: &str, b: &str) -> Self {
        Self::new(id, BranchKind::Capacitor, farad, a, b)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Port {
    pub plus: String,
    pub ground: String,
}

/// Netlist JSON document:
/// `{"branches": [{"id", "kind", "value", "nodes": [a, b]}], "port": {"plus", "ground"}}`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct NetlistSpec {
    pub branches: Vec<Branch>,
    pub port: Port,
}

/// A validated netlist.
#[derive(Debug, Clone, PartialEq)]
pub struct Netlist {
    branches: Vec<Branch>,
    port: Port,
    /// Non-ground node labels in order of first appearance.
    nodes: Vec<String>,
    node_index: HashMap<String, usize>,
}

impl TryFrom<NetlistSpec> for Netlist {
    type Error = Error;

    fn try_from(spec: NetlistSpec) -> Result<Self> {
        Netlist::new(spec.branches, spec.port)
    }
}

impl Netlist {
    pub fn new(branches: Vec<Branch>, port: Port) -> Result<Self> {
        if port.plus == port.ground {
            return Err(Error::InvalidNetlist(format!(
                "port terminals must differ, both are '{}'",
                port.plus
            )));
        }
        let mut ids = HashMap::new();
        for (k, b) in branches.iter().enumerate() {
            if !(b.value > 0.0) || !b.value.is_finite() {
                return Err(Error::InvalidNetlist(format!(
                    "branch '{}' has non-positive or non-finite value {}",
                    b.id, b.value
                )));
            }
            if b.nodes.0 == b.nodes.1 {
                return Err(Error::InvalidNetlist(format!(
                    "branch '{}' connects node '{}' to itself",
                    b.id, b.nodes.0
                )));
            }
            if let Some(prev) = ids.insert(b.id.as_str(), k) {
                return Err(Error::InvalidNetlist(format!(
                    "duplicate branch id '{}' (branches {prev} and {k})",
                    b.id
                )));
            }
        }

        let mut nodes = vec![port.plus.clone()];
        for b in &branches {
            for n in [&b.nodes.0, &b.nodes.1] {
                if *n != port.ground && !nodes.contains(n) {
                    nodes.push(n.clone());
                }
            }
        }
        let node_index: HashMap<String, usize> = nodes
            .iter()
            .enumerate()
            .map(|(k, n)| (n.clone(), k))
            .collect();

        // union-find over nodes + ground (index nodes.len())
        let ground = nodes.len();
        let mut parent: Vec<usize> = (0..=ground).collect();
        fn find(parent: &mut [usize], mut x: usize) -> usize {
            while parent[x] != x {
                parent[x] = parent[parent[x]];
                x = parent[x];
            }
            x
        }
        let idx = |n: &str| node_index.get(n).copied().unwrap_or(ground);
        let mut edges: Vec<(usize, usize)> = branches
            .iter()
            .map(|b| (idx(&b.nodes.0), idx(&b.nodes.1)))
            .collect();
        edges.push((idx(&port.plus), ground));
        for (a, b) in edges {
            let (ra, rb) = (find(&mut parent, a), find(&mut parent, b));
            parent[ra] = rb;
        }
        let root = find(&mut parent, ground);
        for (k, n) in nodes.iter().enumerate() {
            if find(&mut parent, k) != root {
                return Err(Error::InvalidNetlist(format!(
                    "node '{n}' is not connected to the port"
                )));
            }
        }

        Ok(Self {
            branches,
            port,
            nodes,
            node_index,
        })
    }

    pub fn branches(&self) -> &[Branch] {
        &self.branches
    }

    pub fn port(&self) -> &Port {
        &self.port
    }

    /// Non-ground node labels; index `k` is MNA unknown `k`.
    pub fn nodes(&self) -> &[String] {
        &self.nodes
    }

    pub(crate) fn node(&self, label: &str) -> Option<usize> {
        self.node_index.get(label).copied()
    }

    pub fn branch_index(&self, id: &str) -> Option<usize> {
        self.branches.iter().position(|b| b.id == id)
    }

    pub fn count(&self, kind: BranchKind) -> usize {
        self.branches.iter().filter(|b| b.kind == kind).count()
    }

    /// Index of every inductor's current unknown in the MNA vector.
    fn inductor_slots(&self) -> Vec<Option<usize>> {
        let mut next = self.nodes.len();
        self.branches
            .iter()
            .map(|b| {
                (b.kind == BranchKind::Inductor).then(|| {
                    next += 1;
                    next - 1
                })
            })
            .collect()
    }
}

/// Phasor solution at one frequency.
#[derive(Debug, Clone, PartialEq)]
pub struct BranchPhasors {
    pub omega: f64,
    pub port_voltage: Complex64,
    /// Current delivered into the load at `port.plus`.
    pub port_current: Complex64,
    pub node_voltages: Vec<Complex64>,
    pub branch_voltages: Vec<Complex64>,
    pub branch_currents: Vec<Complex64>,
}

/// Modified nodal analysis at a single angular frequency.
pub fn solve_frequency(net: &Netlist, omega: f64, v_port: Complex64) -> Result<BranchPhasors> {
    if !(omega >= 0.0) || !omega.is_finite() {
        return Err(Error::InvalidArgument(format!(
            "omega must be finite and >= 0, got {omega}"
        )));
    }
    let n_nodes = net.nodes.len();
    let slots = net.inductor_slots();
    let n_l = net.count(BranchKind::Inductor);
    let src = n_nodes + n_l;
    let dim = src + 1;

    let mut a = Matrix::zeros(dim);
    let one = Complex64::new(1.0, 0.0);
    let stamp_admittance = |a: &mut Matrix, na: Option<usize>, nb: Option<usize>, y: Complex64| {
        if let Some(i) = na {
            a.add(i, i, y);
        }
        if let Some(j) = nb {
            a.add(j, j, y);
        }
        if let (Some(i), Some(j)) = (na, nb) {
            a.add(i, j, -y);
            a.add(j, i, -y);
        }
    };
    for (b, slot) in net.branches.iter().zip(&slots) {
        let na = net.node(&b.nodes.0);
        let nb = net.node(&b.nodes.1);
        match b.kind {
            BranchKind::Resistor => {
                stamp_admittance(&mut a, na, nb, Complex64::new(1.0 / b.value, 0.0))
            }
            BranchKind::Capacitor => {
                stamp_admittance(&mut a, na, nb, Complex64::new(0.0, omega * b.value))
            }
            BranchKind::Inductor => {
                let k = slot.expect("inductor has a current slot");
                if let Some(i) = na {
                    a.add(i, k, one);
                    a.add(k, i, one);
                }
                if let Some(j) = nb {
                    a.add(j, k, -one);
                    a.add(k, j, -one);
                }
                a.add(k, k, Complex64::new(0.0, -omega * b.value));
            }
        }
    }
    let plus = net.node(&net.port.plus).expect("port node is indexed");
    a.add(plus, src, one);
    a.add(src, plus, one);

    let mut rhs = vec![Complex64::new(0.0, 0.0); dim];
    rhs[src] = v_port;
    let x = Lu::factor(&a)
        .map_err(|_| Error::SingularNetwork { omega })?
        .solve(&rhs);

    let volt = |n: Option<usize>| n.map(|i| x[i]).unwrap_or_default();
    let mut branch_voltages = Vec::with_capacity(net.branches.len());
    let mut branch_currents = Vec::with_capacity(net.branches.len());
    for (b, slot) in net.branches.iter().zip(&slots) {
        let v = volt(net.node(&b.nodes.0)) - volt(net.node(&b.nodes.1));
        let i = match b.kind {
            BranchKind::Resistor => v / b.value,
            BranchKind::Capacitor => Complex64::new(0.0, omega * b.value) * v,
            BranchKind::Inductor => x[slot.expect("inductor slot")],
        };
        branch_voltages.push(v);
        branch_currents.push(i);
    }
    Ok(BranchPhasors {
        omega,
        port_voltage: v_port,
        port_current: -x[src],
        node_voltages: x[..n_nodes].to_vec(),
        branch_voltages,
        branch_currents,
    })
}

/// `Y(jw)`: port current for a unit port voltage.
pub fn driving_point_admittance(net: &Netlist, omega: f64) -> Result<Complex64> {
    Ok(solve_frequency(net, omega, Complex64::new(1.0, 0.0))?.port_current)
}

/// Steady-state response of a netlist to a multi-tone port voltage.
#[derive(Debug, Clone)]
pub struct NetworkSolution {
    netlist: Netlist,
    source: LineSpectrum,
    phasors: Vec<BranchPhasors>,
    port_current: LineSpectrum,
    branch_voltages: Vec<LineSpectrum>,
    branch_currents: Vec<LineSpectrum>,
}

/// Solves the network line by line.
pub fn solve(net: &Netlist, source: &LineSpectrum) -> Result<NetworkSolution> {
    if source.unit() != Unit::Volt {
        return Err(Error::InvalidArgument(format!(
            "port source must be a voltage, got unit {}",
            source.unit().symbol()
        )));
    }
    let phasors = source
        .lines()
        .map(|l| solve_frequency(net, l.omega, l.amplitude))
        .collect::<Result<Vec<_>>>()?;

    let per_line = |f: &dyn Fn(&BranchPhasors) -> Complex64, unit: Unit| {
        let amps: Vec<Complex64> = phasors.iter().map(f).collect();
        source.with_amplitudes(unit, &amps)
    };
    let port_current = per_line(&|p| p.port_current, Unit::Ampere);
    let nb = net.branches.len();
    let branch_voltages = (0..nb)
        .map(|b| per_line(&|p| p.branch_voltages[b], Unit::Volt))
        .collect();
    let branch_currents = (0..nb)
        .map(|b| per_line(&|p| p.branch_currents[b], Unit::Ampere))
        .collect();

    Ok(NetworkSolution {
        netlist: net.clone(),
        source: source.clone(),
        phasors,
        port_current,
        branch_voltages,
        branch_currents,
    })
}

impl NetworkSolution {
    pub fn netlist(&self) -> &Netlist {
        &self.netlist
    }

    /// Port voltage `u(t)`.
    pub fn source(&self) -> &LineSpectrum {
        &self.source
    }

    /// Port current `i(t)` flowing into the load.
    pub fn port_current(&self) -> &LineSpectrum {
        &self.port_current
    }

    /// One entry per source line, in ascending frequency.
    pub fn phasors(&self) -> &[BranchPhasors] {
        &self.phasors
    }

    pub fn branch_voltage(&self, branch: usize) -> &LineSpectrum {
        &self.branch_voltages[branch]
    }

    pub fn branch_current(&self, branch: usize) -> &LineSpectrum {
        &self.branch_currents[branch]
    }

    pub fn branch_voltages(&self) -> &[LineSpectrum] {
        &self.branch_voltages
    }

    pub fn branch_currents(&self) -> &[LineSpectrum] {
        &self.branch_currents
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn port() -> Port {
        Port {
            plus: "p".into(),
            ground: "0".into(),
        }
    }

    fn series_rl() -> Netlist {
        Netlist::new(
            vec![
                Branch::resistor("R1", 1.0, "p", "m"),
                Branch::inductor("L1", 1.0, "m", "0"),
            ],
            port(),
        )
        .unwrap()
    }

    fn close(a: Complex64, b: Complex64, tol: f64) {
        assert!((a - b).norm() <= tol * b.norm().max(1.0), "{a} vs {b}");
    }

    #[test]
    fn series_rl_ac_and_dc() {
        let net = series_rl();
        let ac = solve_frequency(&net, 1.0, c(1.0, 0.0)).unwrap();
        close(ac.branch_currents[0], c(0.5, -0.5), 1e-14);
        close(ac.port_current, c(0.5, -0.5), 1e-14);
        let dc = solve_frequency(&net, 0.0, c(1.0, 0.0)).unwrap();
        close(dc.port_current, c(1.0, 0.0), 1e-14);
        assert_eq!(dc.branch_voltages[1], c(0.0, 0.0));
    }

    #[test]
    fn parallel_rc_admittance() {
        let net = Netlist::new(
            vec![
                Branch::resistor("R", 10.0, "p", "0"),
                Branch::capacitor("C", 0.3, "p", "0"),
            ],
            port(),
        )
        .unwrap();
        let v = 10.0 * 2f64.sqrt();
        let sol = solve_frequency(&net, 1.0, c(v, 0.0)).unwrap();
        close(sol.port_current, c(v * 0.1, v * 0.3), 1e-14);
    }

    #[test]
    fn admittance_examples() {
        let r = Netlist::new(vec![Branch::resistor("R", 10.0, "p", "0")], port()).unwrap();
        for w in [0.0, 1.0, 17.0] {
            close(driving_point_admittance(&r, w).unwrap(), c(0.1, 0.0), 1e-15);
        }
        let cap = Netlist::new(vec![Branch::capacitor("C", 0.3, "p", "0")], port()).unwrap();
        close(
            driving_point_admittance(&cap, 1.0).unwrap(),
            c(0.0, 0.3),
            1e-15,
        );
        close(
            driving_point_admittance(&series_rl(), 1.0).unwrap(),
            c(0.5, -0.5),
            1e-15,
        );
    }

    #[test]
    fn floating_capacitor_island_is_singular_at_dc() {
        let net = Netlist::new(
            vec![
                Branch::resistor("R", 1.0, "p", "0"),
                Branch::capacitor("C1", 1.0, "p", "x"),
                Branch::capacitor("C2", 1.0, "x", "0"),
            ],
            port(),
        )
        .unwrap();
        assert_eq!(
            solve_frequency(&net, 0.0, c(1.0, 0.0)).unwrap_err(),
            Error::SingularNetwork { omega: 0.0 }
        );
        assert!(solve_frequency(&net, 1.0, c(1.0, 0.0)).is_ok());
    }

    #[test]
    fn inductor_across_port_is_singular_at_dc() {
        let net = Netlist::new(vec![Branch::inductor("L", 1.0, "p", "0")], port()).unwrap();
        assert!(matches!(
            solve_frequency(&net, 0.0, c(1.0, 0.0)),
            Err(Error::SingularNetwork { .. })
        ));
    }

    #[test]
    fn validation_errors() {
        let bad_value = Netlist::new(vec![Branch::resistor("R", 0.0, "p", "0")], port());
        assert!(matches!(bad_value, Err(Error::InvalidNetlist(_))));
        let self_loop = Netlist::new(vec![Branch::resistor("R", 1.0, "p", "p")], port());
        assert!(self_loop.is_err());
        let disconnected = Netlist::new(
            vec![
                Branch::resistor("R", 1.0, "p", "0"),
                Branch::resistor("R2", 1.0, "a", "b"),
            ],
            port(),
        );
        assert!(disconnected
            .unwrap_err()
            .to_string()
            .contains("not connected"));
        let dup = Netlist::new(
            vec![
                Branch::resistor("R", 1.0, "p", "0"),
                Branch::resistor("R", 1.0, "p", "0"),
            ],
            port(),
        );
        assert!(dup.is_err());
        let same_port = Netlist::new(
            vec![Branch::resistor("R", 1.0, "p", "0")],
            Port {
                plus: "0".into(),
                ground: "0".into(),
            },
        );
        assert!(same_port.is_err());
    }

    #[test]
    fn netlist_json_schema() {
        let json = r#"{
            "branches": [
                {"id": "R1", "kind": "resistor", "value": 10.0, "nodes": ["p", "0"]},
                {"id": "C1", "kind": "capacitor", "value": 0.3, "nodes": ["p", "0"]}
            ],
            "port": {"plus": "p", "ground": "0"}
        }"#;
        let spec: NetlistSpec = serde_json::from_str(json).unwrap();
        let net = Netlist::try_from(spec).unwrap();
        assert_eq!(net.branches().len(), 2);
        assert_eq!(net.count(BranchKind::Capacitor), 1);
    }

    #[test]
    fn resistive_solve_and_zero_source() {
        let net = Netlist::new(vec![Branch::resistor("R", 10.0, "p", "0")], port()).unwrap();
        let u = LineSpectrum::tone(Unit::Volt, 1.0, c(10.0 * 2f64.sqrt(), 0.0)).unwrap();
        let sol = solve(&net, &u).unwrap();
        assert_abs_diff_eq!(
            sol.port_current().amplitude_at(1.0).re,
            2f64.sqrt(),
            epsilon = 1e-14
        );

        let zero = solve(&net, &LineSpectrum::zero(Unit::Volt)).unwrap();
        assert!(zero.port_current().is_empty());
        assert!(zero.phasors().is_empty());

        let wrong_unit = LineSpectrum::zero(Unit::Ampere);
        assert!(solve(&net, &wrong_unit).is_err());
    }
}
