//! Logical circuit representation and the benchmark generators.
//!
//! Benchmarks are structural stand-ins for the usual small NISQ workloads:
//! gate sequences follow the cited algorithm shapes decomposed to
//! {1q, CX}, with rotation angles irrelevant to scheduling. Generators are
//! fully deterministic.

use std::collections::{BTreeMap, BTreeSet};
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum GateKind {
    SingleQubit,
    Cx,
    Swap,
    Measure,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Gate {
    pub kind: GateKind,
    pub label: String,
    pub operands: Vec<usize>,
}

impl Gate {
    pub fn sq(label: &str, q: usize) -> Self {
        Gate {
            kind: GateKind::SingleQubit,
            label: label.into(),
            operands: vec![q],
        }
    }

    pub fn cx(control: usize, target: usize) -> Self {
        Gate {
            kind: GateKind::Cx,
            label: "cx".into(),
            operands: vec![control, target],
        }
    }

    pub fn swap(a: usize, b: usize) -> Self {
        Gate {
            kind: GateKind::Swap,
            label: "swap".into(),
            operands: vec![a, b],
        }
    }

    pub fn measure(q: usize) -> Self {
        Gate {
            kind: GateKind::Measure,
            label: "measure".into(),
            operands: vec![q],
        }
    }

    pub fn is_two_qubit(&self) -> bool {
        matches!(self.kind, GateKind::Cx | GateKind::Swap)
    }

    pub fn validate(&self) -> Result<()> {
        let arity_ok = match self.kind {
            GateKind::Cx | GateKind::Swap => {
                self.operands.len() == 2 && self.operands[0] != self.operands[1]
            }
            GateKind::SingleQubit | GateKind::Measure => self.operands.len() == 1,
        };
        if !arity_ok {
            return Err(Error::invalid(
                "gate",
                format!("{} has operands {:?}", self.label, self.operands),
            ));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Circuit {
    pub name: String,
    pub width: usize,
    pub gates: Vec<Gate>,
    #[serde(rename = "measured")]
    pub measured_qubits: BTreeSet<usize>,
}

impl Circuit {
    pub fn validate(&self) -> Result<()> {
        if self.width == 0 {
            return Err(Error::invalid("circuit", format!("{}: zero width", self.name)));
        }
        if self.measured_qubits.is_empty() {
            return Err(Error::invalid(
                "circuit",
                format!("{}: no measured qubits", self.name),
            ));
        }
        let mut seen_measure = false;
        for g in &self.gates {
            g.validate()?;
            if g.operands.iter().any(|&q| q >= self.width) {
                return Err(Error::invalid(
                    "circuit",
                    format!("{}: gate {} uses qubit >= width {}", self.name, g.label, self.width),
                ));
            }
            match g.kind {
                GateKind::Measure => seen_measure = true,
                _ if seen_measure => {
                    return Err(Error::invalid(
                        "circuit",
                        format!("{}: gate {} after a measure", self.name, g.label),
                    ));
                }
                _ => {}
            }
        }
        if self
            .measured_qubits
            .iter()
            .any(|&q| q >= self.width)
        {
            return Err(Error::invalid(
                "circuit",
                format!("{}: measured qubit >= width", self.name),
            ));
        }
        Ok(())
    }

    pub fn cx_count(&self) -> usize {
        self.gates.iter().filter(|g| g.kind == GateKind::Cx).count()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct CircuitStats {
    pub width: usize,
    pub total_gates: usize,
    pub cx_count: usize,
    pub depth: usize,
}

/// Width, gate counts and ASAP depth: a gate's layer is one past the
/// deepest layer among gates sharing an operand.
pub fn circuit_stats(c: &Circuit) -> CircuitStats {
    CircuitStats {
        width: c.width,
        total_gates: c.gates.len(),
        cx_count: c.cx_count(),
        depth: asap_depth(&c.gates),
    }
}

pub fn asap_depth(gates: &[Gate]) -> usize {
    let mut frontier: BTreeMap<usize, usize> = BTreeMap::new();
    let mut depth = 0;
    for g in gates {
        let layer = 1 + g
            .operands
            .iter()
            .map(|q| frontier.get(q).copied().unwrap_or(0))
            .max()
            .unwrap_or(0);
        for &q in &g.operands {
            frontier.insert(q, layer);
        }
        depth = depth.max(layer);
    }
    depth
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Benchmark {
    Toffoli,
    Hsp,
    Bv,
    LinearSolver,
    Qaoa,
    VqeSu2,
    RepetitionEncoder,
    RippleAdder,
}

impl Benchmark {
    pub fn name(&self) -> &'static str {
        match self {
            Benchmark::Toffoli => "toffoli",
            Benchmark::Hsp => "hsp",
            Benchmark::Bv => "bv",
            Benchmark::LinearSolver => "linear_solver",
            Benchmark::Qaoa => "qaoa",
            Benchmark::VqeSu2 => "vqe_su2",
            Benchmark::RepetitionEncoder => "repetition_encoder",
            Benchmark::RippleAdder => "ripple_adder",
        }
    }
}

impl FromStr for Benchmark {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Ok(match s {
            "toffoli" => Benchmark::Toffoli,
            "hsp" => Benchmark::Hsp,
            "bv" => Benchmark::Bv,
            "linear_solver" => Benchmark::LinearSolver,
            "qaoa" => Benchmark::Qaoa,
            "vqe_su2" => Benchmark::VqeSu2,
            "repetition_encoder" => Benchmark::RepetitionEncoder,
            "ripple_adder" => Benchmark::RippleAdder,
            other => return Err(Error::UnknownBenchmark(other.into())),
        })
    }
}

pub type Params = BTreeMap<String, u64>;

/// The nine-instance benchmark set used throughout the experiments
/// (VQE appears at both 4 and 6 qubits).
pub fn standard_set() -> Vec<(Benchmark, Params)> {
    let mut set = vec![
        (Benchmark::Toffoli, Params::new()),
        (Benchmark::Hsp, Params::new()),
        (Benchmark::Bv, Params::new()),
        (Benchmark::LinearSolver, Params::new()),
        (Benchmark::Qaoa, Params::new()),
    ];
    let mut vqe4 = Params::new();
    vqe4.insert("qubits".into(), 4);
    set.push((Benchmark::VqeSu2, vqe4));
    let mut vqe6 = Params::new();
    vqe6.insert("qubits".into(), 6);
    set.push((Benchmark::VqeSu2, vqe6));
    set.push((Benchmark::RepetitionEncoder, Params::new()));
    set.push((Benchmark::RippleAdder, Params::new()));
    set
}

pub fn build_benchmark(which: Benchmark, params: &Params) -> Result<Circuit> {
    let circuit = match which {
        Benchmark::Toffoli => toffoli(),
        Benchmark::Hsp => hsp(),
        Benchmark::Bv => bv(params)?,
        Benchmark::LinearSolver => linear_solver(),
        Benchmark::Qaoa => qaoa(),
        Benchmark::VqeSu2 => vqe_su2(params)?,
        Benchmark::RepetitionEncoder => repetition_encoder(),
        Benchmark::RippleAdder => ripple_adder(),
    };
    circuit.validate()?;
    Ok(circuit)
}

/// Standard 6-CX decomposition of CCX with controls `a`, `b`, target `t`.
fn ccx(gates: &mut Vec<Gate>, a: usize, b: usize, t: usize) {
    gates.push(Gate::sq("h", t));
    gates.push(Gate::cx(b, t));
    gates.push(Gate::sq("tdg", t));
    gates.push(Gate::cx(a, t));
    gates.push(Gate::sq("t", t));
    gates.push(Gate::cx(b, t));
    gates.push(Gate::sq("tdg", t));
    gates.push(Gate::cx(a, t));
    gates.push(Gate::sq("t", b));
    gates.push(Gate::sq("t", t));
    gates.push(Gate::sq("h", t));
    gates.push(Gate::cx(a, b));
    gates.push(Gate::sq("t", a));
    gates.push(Gate::sq("tdg", b));
    gates.push(Gate::cx(a, b));
}

fn with_measures(
    name: &str,
    width: usize,
    mut gates: Vec<Gate>,
    measured: impl IntoIterator<Item = usize>,
) -> Circuit {
    let measured_qubits: BTreeSet<usize> = measured.into_iter().collect();
    for &q in &measured_qubits {
        gates.push(Gate::measure(q));
    }
    Circuit {
        name: name.into(),
        width,
        gates,
        measured_qubits,
    }
}

fn toffoli() -> Circuit {
    let mut gates = Vec::new();
    ccx(&mut gates, 0, 1, 2);
    with_measures("toffoli", 3, gates, 0..3)
}

fn hsp() -> Circuit {
    let gates = vec![
        Gate::sq("h", 0),
        Gate::sq("h", 1),
        Gate::cx(0, 2),
        Gate::cx(1, 3),
        Gate::cx(0, 3),
        Gate::sq("h", 0),
        Gate::sq("h", 1),
    ];
    with_measures("hsp", 4, gates, 0..2)
}

fn bv(params: &Params) -> Result<Circuit> {
    const DATA: usize = 4;
    let hidden = params.get("hidden").copied().unwrap_or(0b1011);
    if hidden >= 1 << DATA {
        return Err(Error::invalid(
            "benchmark params",
            format!("bv hidden string {hidden:#b} needs more than {DATA} data qubits"),
        ));
    }
    let ancilla = DATA;
    let mut gates = Vec::new();
    for q in 0..DATA {
        gates.push(Gate::sq("h", q));
    }
    gates.push(Gate::sq("x", ancilla));
    gates.push(Gate::sq("h", ancilla));
    for q in 0..DATA {
        if hidden >> q & 1 == 1 {
            gates.push(Gate::cx(q, ancilla));
        }
    }
    for q in 0..DATA {
        gates.push(Gate::sq("h", q));
    }
    Ok(with_measures("bv", DATA + 1, gates, 0..DATA))
}

fn linear_solver() -> Circuit {
    let gates = vec![
        Gate::sq("h", 0),
        Gate::sq("h", 1),
        Gate::sq("ry", 2),
        Gate::cx(1, 2),
        Gate::sq("ry", 2),
        Gate::cx(0, 2),
        Gate::sq("ry", 2),
        Gate::cx(1, 2),
        Gate::sq("h", 0),
        Gate::sq("h", 1),
    ];
    with_measures("linear_solver", 3, gates, [2])
}

fn qaoa() -> Circuit {
    const N: usize = 4;
    let mut gates = Vec::new();
    for q in 0..N {
        gates.push(Gate::sq("h", q));
    }
    for q in 0..N {
        let next = (q + 1) % N;
        gates.push(Gate::cx(q, next));
        gates.push(Gate::sq("rz", next));
        gates.push(Gate::cx(q, next));
    }
    for q in 0..N {
        gates.push(Gate::sq("rx", q));
    }
    with_measures("qaoa", N, gates, 0..N)
}

/// Hardware-efficient SU2 ansatz. 4 qubits: 4 reps, full entanglement.
/// 6 qubits: 3 reps, shifted-circular-alternating entanglement.
fn vqe_su2(params: &Params) -> Result<Circuit> {
    let n = params.get("qubits").copied().unwrap_or(4) as usize;
    let (default_reps, full) = match n {
        4 => (4u64, true),
        6 => (3u64, false),
        other => {
            return Err(Error::invalid(
                "benchmark params",
                format!("vqe_su2 supports 4 or 6 qubits, got {other}"),
            ))
        }
    };
    let reps = params.get("reps").copied().unwrap_or(default_reps) as usize;
    if reps == 0 {
        return Err(Error::invalid("benchmark params", "vqe_su2 reps must be positive"));
    }
    let mut gates = Vec::new();
    let rotations = |gates: &mut Vec<Gate>| {
        for q in 0..n {
            gates.push(Gate::sq("ry", q));
            gates.push(Gate::sq("rz", q));
        }
    };
    for rep in 0..reps {
        rotations(&mut gates);
        if full {
            for a in 0..n {
                for b in a + 1..n {
                    gates.push(Gate::cx(a, b));
                }
            }
        } else {
            // shifted-circular: the ring rotates with the rep, control and
            // target alternate by rep parity
            for k in 0..n {
                let a = (k + rep) % n;
                let b = (k + rep + 1) % n;
                if rep % 2 == 0 {
                    gates.push(Gate::cx(a, b));
                } else {
                    gates.push(Gate::cx(b, a));
                }
            }
        }
    }
    rotations(&mut gates);
    Ok(with_measures(&format!("vqe_su2_{n}"), n, gates, 0..n))
}

/// Three-qubit repetition code encoder plus two syndrome ancillas.
fn repetition_encoder() -> Circuit {
    let gates = vec![
        Gate::sq("h", 0),
        Gate::cx(0, 1),
        Gate::cx(0, 2),
        Gate::cx(0, 3),
        Gate::cx(1, 3),
        Gate::cx(1, 4),
        Gate::cx(2, 4),
    ];
    with_measures("repetition_encoder", 5, gates, 0..5)
}

/// Cuccaro-style 2-bit ripple-carry adder: cin q0, (b0,a0) q1/q2,
/// (b1,a1) q3/q4, carry-out q5. MAJ/UMA blocks with CCX decomposed.
fn ripple_adder() -> Circuit {
    let (cin, b0, a0, b1, a1, cout) = (0, 1, 2, 3, 4, 5);
    let mut gates = Vec::new();
    let maj = |gates: &mut Vec<Gate>, c: usize, b: usize, a: usize| {
        gates.push(Gate::cx(a, b));
        gates.push(Gate::cx(a, c));
        ccx(gates, c, b, a);
    };
    let uma = |gates: &mut Vec<Gate>, c: usize, b: usize, a: usize| {
        ccx(gates, c, b, a);
        gates.push(Gate::cx(a, c));
        gates.push(Gate::cx(c, b));
    };
    maj(&mut gates, cin, b0, a0);
    maj(&mut gates, a0, b1, a1);
    gates.push(Gate::cx(a1, cout));
    uma(&mut gates, a0, b1, a1);
    uma(&mut gates, cin, b0, a0);
    with_measures("ripple_adder", 6, gates, [b0, b1, cout])
}
