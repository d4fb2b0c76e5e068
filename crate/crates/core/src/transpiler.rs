//! Noise-aware compilation of a logical circuit onto a machine snapshot.
//!
//! Layout greedily places the most-interacting logical pairs on the
//! machine's least-noisy edges, growing a connected region; routing then
//! walks each remote CX operand along a shortest coupling path with SWAPs
//! (each emitted as 3 CX). All tie-breaks are deterministic so compilation
//! is a pure function of (circuit, machine, snapshot).

use std::collections::BTreeMap;
use std::collections::BTreeSet;
use std::collections::VecDeque;

use serde::{Deserialize, Serialize};

use crate::circuits::{asap_depth, Circuit, Gate, GateKind};
use crate::error::{Error, Result};
use crate::fleet::{CalibrationSnapshot, Edge, Machine, Timestamp};

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Mapping {
    pub logical_to_physical: Vec<usize>,
}

impl Mapping {
    pub fn validate(&self, n_qubits: usize) -> Result<()> {
        let mut seen = vec![false; n_qubits];
        for &p in &self.logical_to_physical {
            if p >= n_qubits {
                return Err(Error::invalid("mapping", format!("physical qubit {p} out of range")));
            }
            if seen[p] {
                return Err(Error::invalid("mapping", format!("physical qubit {p} used twice")));
            }
            seen[p] = true;
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CompiledCircuit {
    pub name: String,
    pub machine_id: String,
    pub cycle_index: usize,
    pub mapping: Mapping,
    pub physical_gates: Vec<Gate>,
    pub depth: usize,
    pub measured_physical: BTreeSet<usize>,
}

impl CompiledCircuit {
    pub fn cx_count(&self) -> usize {
        self.physical_gates
            .iter()
            .filter(|g| g.kind == GateKind::Cx)
            .count()
    }
}

/// The four post-compilation features fed to the fidelity correlator.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FeatureVector {
    pub depth: usize,
    pub avg_cx_error: f64,
    pub avg_cx_critical_path_error: f64,
    pub avg_readout_error: f64,
}

impl FeatureVector {
    pub const NAMES: [&'static str; 4] = [
        "depth",
        "avg_cx_error",
        "avg_cx_critical_path_error",
        "avg_readout_error",
    ];

    pub fn as_array(&self) -> [f64; 4] {
        [
            self.depth as f64,
            self.avg_cx_error,
            self.avg_cx_critical_path_error,
            self.avg_readout_error,
        ]
    }
}

/// Interaction counts between logical qubit pairs, two-qubit gates only.
fn interaction_counts(c: &Circuit) -> BTreeMap<Edge, usize> {
    let mut counts = BTreeMap::new();
    for g in &c.gates {
        if g.is_two_qubit() {
            *counts.entry(Edge::new(g.operands[0], g.operands[1])).or_insert(0) += 1;
        }
    }
    counts
}

/// Greedy noise-aware placement: logical pairs in descending interaction
/// order get the cheapest available coupling edges, preferring edges that
/// extend the already-placed region; leftover qubits take the free
/// physical qubits with the lowest readout error.
pub fn layout(c: &Circuit, m: &Machine, s: &CalibrationSnapshot) -> Result<Mapping> {
    if c.width > m.n_qubits {
        return Err(Error::Capacity {
            circuit: c.name.clone(),
            machine: m.id.clone(),
            needed: c.width,
            available: m.n_qubits,
        });
    }

    let mut pairs: Vec<(Edge, usize)> = interaction_counts(c).into_iter().collect();
    pairs.sort_by(|a, b| b.1.cmp(&a.1).then(a.0.cmp(&b.0)));

    let mut edges: Vec<Edge> = m.coupling.clone();
    edges.sort_by(|a, b| {
        let ea = s.cx_error[a];
        let eb = s.cx_error[b];
        ea.partial_cmp(&eb).unwrap().then(a.cmp(b))
    });

    let mut phys_of: Vec<Option<usize>> = vec![None; c.width];
    let mut used = vec![false; m.n_qubits];

    let place = |logical: usize, physical: usize, phys_of: &mut Vec<Option<usize>>, used: &mut Vec<bool>| {
        phys_of[logical] = Some(physical);
        used[physical] = true;
    };

    for (pair, _) in &pairs {
        let (la, lb) = (pair.0, pair.1);
        match (phys_of[la], phys_of[lb]) {
            (Some(_), Some(_)) => {}
            (Some(pa), None) => {
                // cheapest free neighbor of the anchored operand
                let next = edges
                    .iter()
                    .find(|e| e.contains(pa) && !used[e.other(pa)])
                    .map(|e| e.other(pa))
                    .or_else(|| cheapest_free_qubit(s, &used));
                if let Some(p) = next {
                    place(lb, p, &mut phys_of, &mut used);
                }
            }
            (None, Some(pb)) => {
                let next = edges
                    .iter()
                    .find(|e| e.contains(pb) && !used[e.other(pb)])
                    .map(|e| e.other(pb))
                    .or_else(|| cheapest_free_qubit(s, &used));
                if let Some(p) = next {
                    place(la, p, &mut phys_of, &mut used);
                }
            }
            (None, None) => {
                let region_started = used.iter().any(|&u| u);
                // prefer a free-free edge touching the placed region, then
                // any free-free edge, keeping the cheap-first edge order
                let candidate = edges
                    .iter()
                    .find(|e| {
                        !used[e.0]
                            && !used[e.1]
                            && (!region_started
                                || m.neighbors(e.0).iter().any(|&q| used[q])
                                || m.neighbors(e.1).iter().any(|&q| used[q]))
                    })
                    .or_else(|| edges.iter().find(|e| !used[e.0] && !used[e.1]));
                if let Some(e) = candidate {
                    place(la, e.0, &mut phys_of, &mut used);
                    place(lb, e.1, &mut phys_of, &mut used);
                } else if let Some(p) = cheapest_free_qubit(s, &used) {
                    place(la, p, &mut phys_of, &mut used);
                    if let Some(p2) = cheapest_free_qubit(s, &used) {
                        place(lb, p2, &mut phys_of, &mut used);
                    }
                }
            }
        }
    }

    for l in 0..c.width {
        if phys_of[l].is_none() {
            let p = cheapest_free_qubit(s, &used)
                .expect("capacity checked: a free physical qubit exists");
            place(l, p, &mut phys_of, &mut used);
        }
    }

    let mapping = Mapping {
        logical_to_physical: phys_of.into_iter().map(|p| p.unwrap()).collect(),
    };
    mapping.validate(m.n_qubits)?;
    Ok(mapping)
}

fn cheapest_free_qubit(s: &CalibrationSnapshot, used: &[bool]) -> Option<usize> {
    (0..used.len())
        .filter(|&q| !used[q])
        .min_by(|&a, &b| {
            s.readout_error[a]
                .partial_cmp(&s.readout_error[b])
                .unwrap()
                .then(a.cmp(&b))
        })
}

/// Lexicographically smallest shortest path from `from` to `to` over the
/// coupling graph: BFS distances from the target, then a greedy walk that
/// always steps to the lowest-numbered neighbor closer to the target.
fn shortest_path(adj: &[Vec<usize>], from: usize, to: usize) -> Vec<usize> {
    let mut dist = vec![usize::MAX; adj.len()];
    dist[to] = 0;
    let mut queue = VecDeque::from([to]);
    while let Some(q) = queue.pop_front() {
        for &n in &adj[q] {
            if dist[n] == usize::MAX {
                dist[n] = dist[q] + 1;
                queue.push_back(n);
            }
        }
    }
    let mut path = vec![from];
    let mut cur = from;
    while cur != to {
        let next = adj[cur]
            .iter()
            .copied()
            .filter(|&n| dist[n] + 1 == dist[cur])
            .min()
            .expect("coupling graph is connected");
        path.push(next);
        cur = next;
    }
    path
}

/// Routes a laid-out circuit: remote two-qubit gates move their first
/// operand toward the second with SWAPs (3 CX each) along the shortest
/// path; the mapping is updated after every SWAP.
pub fn route(c: &Circuit, map: &Mapping, m: &Machine, s: &CalibrationSnapshot) -> Result<CompiledCircuit> {
    map.validate(m.n_qubits)?;
    let mut adj: Vec<Vec<usize>> = vec![Vec::new(); m.n_qubits];
    for e in &m.coupling {
        adj[e.0].push(e.1);
        adj[e.1].push(e.0);
    }
    for list in &mut adj {
        list.sort_unstable();
    }
    let coupled: BTreeSet<Edge> = m.coupling.iter().copied().collect();

    let mut phys_of = map.logical_to_physical.clone();
    let mut gates: Vec<Gate> = Vec::with_capacity(c.gates.len());
    let mut measured_physical = BTreeSet::new();

    let emit_swap = |gates: &mut Vec<Gate>, a: usize, b: usize| {
        gates.push(Gate::cx(a, b));
        gates.push(Gate::cx(b, a));
        gates.push(Gate::cx(a, b));
    };

    for g in &c.gates {
        match g.kind {
            GateKind::SingleQubit => {
                gates.push(Gate {
                    kind: GateKind::SingleQubit,
                    label: g.label.clone(),
                    operands: vec![phys_of[g.operands[0]]],
                });
            }
            GateKind::Measure => {
                let p = phys_of[g.operands[0]];
                measured_physical.insert(p);
                gates.push(Gate {
                    kind: GateKind::Measure,
                    label: g.label.clone(),
                    operands: vec![p],
                });
            }
            GateKind::Cx | GateKind::Swap => {
                let (la, lb) = (g.operands[0], g.operands[1]);
                let mut pa = phys_of[la];
                let pb = phys_of[lb];
                if pa != pb && !coupled.contains(&Edge::new(pa, pb)) {
                    let path = shortest_path(&adj, pa, pb);
                    for &step in &path[1..path.len() - 1] {
                        emit_swap(&mut gates, pa, step);
                        // the swap exchanges whatever logical qubits sit on
                        // those two physical qubits
                        for q in phys_of.iter_mut() {
                            if *q == pa {
                                *q = step;
                            } else if *q == step {
                                *q = pa;
                            }
                        }
                        pa = step;
                    }
                }
                match g.kind {
                    GateKind::Cx => gates.push(Gate::cx(pa, pb)),
                    _ => emit_swap(&mut gates, pa, pb),
                }
            }
        }
    }

    let compiled = CompiledCircuit {
        name: c.name.clone(),
        machine_id: m.id.clone(),
        cycle_index: s.cycle_index,
        mapping: map.clone(),
        depth: asap_depth(&gates),
        physical_gates: gates,
        measured_physical,
    };
    debug_assert!(compiled
        .physical_gates
        .iter()
        .filter(|g| g.kind == GateKind::Cx)
        .all(|g| coupled.contains(&Edge::new(g.operands[0], g.operands[1]))));
    Ok(compiled)
}

/// One deterministic maximum-length ASAP path through the physical gate
/// DAG, chosen by smallest gate index at every layer.
fn critical_path_gates(gates: &[Gate]) -> Vec<usize> {
    let n = gates.len();
    if n == 0 {
        return Vec::new();
    }
    let mut preds: Vec<Vec<usize>> = vec![Vec::new(); n];
    let mut succs: Vec<Vec<usize>> = vec![Vec::new(); n];
    let mut last_on_qubit: BTreeMap<usize, usize> = BTreeMap::new();
    for (i, g) in gates.iter().enumerate() {
        for &q in &g.operands {
            if let Some(&p) = last_on_qubit.get(&q) {
                preds[i].push(p);
                succs[p].push(i);
            }
            last_on_qubit.insert(q, i);
        }
    }
    let mut head = vec![0usize; n];
    for i in 0..n {
        head[i] = 1 + preds[i].iter().map(|&p| head[p]).max().unwrap_or(0);
    }
    let mut tail = vec![0usize; n];
    for i in (0..n).rev() {
        tail[i] = 1 + succs[i].iter().map(|&s| tail[s]).max().unwrap_or(0);
    }
    let depth = head.iter().copied().max().unwrap_or(0);
    let critical = |i: usize| head[i] + tail[i] - 1 == depth;

    let mut path = Vec::with_capacity(depth);
    let mut cur = (0..n)
        .filter(|&i| head[i] == 1 && critical(i))
        .min()
        .expect("a critical path starts at layer 1");
    path.push(cur);
    while head[cur] < depth {
        cur = succs[cur]
            .iter()
            .copied()
            .filter(|&nxt| head[nxt] == head[cur] + 1 && critical(nxt))
            .min()
            .expect("critical gates chain to full depth");
        path.push(cur);
    }
    path
}

/// Extracts the fidelity-correlator features from a compiled circuit.
pub fn extract_features(cc: &CompiledCircuit, s: &CalibrationSnapshot) -> FeatureVector {
    let cx_errors: Vec<f64> = cc
        .physical_gates
        .iter()
        .filter(|g| g.kind == GateKind::Cx)
        .map(|g| s.cx_error[&Edge::new(g.operands[0], g.operands[1])])
        .collect();
    let avg_cx_error = mean(&cx_errors);

    let path = critical_path_gates(&cc.physical_gates);
    let cp_errors: Vec<f64> = path
        .into_iter()
        .filter(|&i| cc.physical_gates[i].kind == GateKind::Cx)
        .map(|i| {
            let g = &cc.physical_gates[i];
            s.cx_error[&Edge::new(g.operands[0], g.operands[1])]
        })
        .collect();
    let avg_cx_critical_path_error = mean(&cp_errors);

    let ro: Vec<f64> = cc
        .measured_physical
        .iter()
        .map(|&q| s.readout_error[q])
        .collect();
    let avg_readout_error = mean(&ro);

    FeatureVector {
        depth: cc.depth,
        avg_cx_error,
        avg_cx_critical_path_error,
        avg_readout_error,
    }
}

fn mean(xs: &[f64]) -> f64 {
    if xs.is_empty() {
        0.0
    } else {
        xs.iter().sum::<f64>() / xs.len() as f64
    }
}

/// Full pipeline against the snapshot active at `t`:
/// layout, route, feature extraction.
pub fn compile_for(
    c: &Circuit,
    m: &Machine,
    t: Timestamp,
) -> Result<(CompiledCircuit, FeatureVector)> {
    let snapshot = m.snapshot_at(t)?;
    compile_with_snapshot(c, m, snapshot)
}

pub fn compile_with_snapshot(
    c: &Circuit,
    m: &Machine,
    snapshot: &CalibrationSnapshot,
) -> Result<(CompiledCircuit, FeatureVector)> {
    let mapping = layout(c, m, snapshot)?;
    let compiled = route(c, &mapping, m, snapshot)?;
    let features = extract_features(&compiled, snapshot);
    Ok((compiled, features))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::circuits::{build_benchmark, standard_set};
    use crate::fleet::{generate_synthetic_fleet, topology, CalibrationSnapshot, FleetSpec};
    use proptest::prelude::*;

    fn line_machine(n: usize, cx: &[f64], ro: &[f64]) -> (Machine, CalibrationSnapshot) {
        let coupling = topology(n.min(5));
        let snapshot = CalibrationSnapshot {
            cycle_index: 0,
            valid_from: 0,
            cx_error: coupling.iter().enumerate().map(|(i, &e)| (e, cx[i])).collect(),
            readout_error: ro.to_vec(),
            single_qubit_error: vec![0.001; n],
        };
        let m = Machine {
            id: format!("line{n}"),
            n_qubits: n,
            coupling,
            calibration_period: 86_400,
            calibration_offset: 0,
            is_public: false,
            snapshots: vec![snapshot.clone()],
        };
        (m, snapshot)
    }

    fn two_qubit_circuit() -> Circuit {
        Circuit {
            name: "pair".into(),
            width: 2,
            gates: vec![Gate::cx(0, 1), Gate::measure(0), Gate::measure(1)],
            measured_qubits: [0, 1].into(),
        }
    }

    /// Exhaustive oracle over all injective mappings, minimizing the same
    /// objective the greedy chases: interaction-weighted cx error (huge
    /// penalty for non-adjacent pairs) plus readout error on measures.
    fn exhaustive_best_mapping(c: &Circuit, m: &Machine, s: &CalibrationSnapshot) -> Vec<usize> {
        fn go(
            c: &Circuit,
            m: &Machine,
            s: &CalibrationSnapshot,
            partial: &mut Vec<usize>,
            used: &mut Vec<bool>,
            best: &mut (f64, Vec<usize>),
        ) {
            if partial.len() == c.width {
                let mut cost = 0.0;
                for g in &c.gates {
                    if g.is_two_qubit() {
                        let e = Edge::new(partial[g.operands[0]], partial[g.operands[1]]);
                        cost += s.cx_error.get(&e).copied().unwrap_or(1e9);
                    }
                }
                for &q in &c.measured_qubits {
                    cost += s.readout_error[partial[q]];
                }
                if cost < best.0 {
                    *best = (cost, partial.clone());
                }
                return;
            }
            for p in 0..m.n_qubits {
                if !used[p] {
                    used[p] = true;
                    partial.push(p);
                    go(c, m, s, partial, used, best);
                    partial.pop();
                    used[p] = false;
                }
            }
        }
        let mut best = (f64::INFINITY, Vec::new());
        go(c, m, s, &mut Vec::new(), &mut vec![false; m.n_qubits], &mut best);
        best.1
    }

    #[test]
    fn layout_prefers_low_error_edge() {
        let (m, s) = line_machine(3, &[0.05, 0.01], &[0.02, 0.02, 0.02]);
        let c = two_qubit_circuit();
        let map = layout(&c, &m, &s).unwrap();
        let placed = Edge::new(map.logical_to_physical[0], map.logical_to_physical[1]);
        assert_eq!(placed, Edge::new(1, 2));
        assert_eq!(map.logical_to_physical, exhaustive_best_mapping(&c, &m, &s));
    }

    #[test]
    fn width_one_takes_best_readout_qubit() {
        let (m, s) = line_machine(3, &[0.01, 0.01], &[0.08, 0.03, 0.07]);
        let c = Circuit {
            name: "solo".into(),
            width: 1,
            gates: vec![Gate::sq("h", 0), Gate::measure(0)],
            measured_qubits: [0].into(),
        };
        let map = layout(&c, &m, &s).unwrap();
        assert_eq!(map.logical_to_physical, vec![1]);
    }

    #[test]
    fn symmetric_machine_full_width_ties_to_identity() {
        let (m, s) = line_machine(3, &[0.01, 0.01], &[0.02, 0.02, 0.02]);
        let c = Circuit {
            name: "chain".into(),
            width: 3,
            gates: vec![Gate::cx(0, 1), Gate::cx(1, 2), Gate::measure(0), Gate::measure(1), Gate::measure(2)],
            measured_qubits: [0, 1, 2].into(),
        };
        let map = layout(&c, &m, &s).unwrap();
        assert_eq!(map.logical_to_physical, vec![0, 1, 2]);
    }

    #[test]
    fn layout_rejects_oversized_circuit() {
        let (m, s) = line_machine(2, &[0.01], &[0.02, 0.02]);
        let c = Circuit {
            name: "wide".into(),
            width: 3,
            gates: vec![Gate::measure(0)],
            measured_qubits: [0].into(),
        };
        assert!(matches!(layout(&c, &m, &s), Err(Error::Capacity { .. })));
    }

    #[test]
    fn adjacent_cx_routes_without_swaps() {
        let (m, s) = line_machine(3, &[0.01, 0.02], &[0.02, 0.02, 0.02]);
        let c = two_qubit_circuit();
        let map = layout(&c, &m, &s).unwrap();
        let cc = route(&c, &map, &m, &s).unwrap();
        assert_eq!(cc.cx_count(), 1);
        assert_eq!(cc.physical_gates.len(), c.gates.len());
    }

    #[test]
    fn distance_two_cx_inserts_one_swap() {
        let (m, s) = line_machine(3, &[0.01, 0.02], &[0.02, 0.02, 0.02]);
        let c = two_qubit_circuit();
        // force the distant placement 0 -> 0, 1 -> 2
        let map = Mapping {
            logical_to_physical: vec![0, 2],
        };
        let cc = route(&c, &map, &m, &s).unwrap();
        // 1 swap = 3 extra CX on top of the logical one
        assert_eq!(cc.cx_count(), 4);
    }

    #[test]
    fn features_no_cx_circuit() {
        let (m, s) = line_machine(2, &[0.01], &[0.07, 0.02]);
        let c = Circuit {
            name: "idle".into(),
            width: 1,
            gates: vec![Gate::sq("h", 0), Gate::measure(0)],
            measured_qubits: [0].into(),
        };
        let map = Mapping {
            logical_to_physical: vec![0],
        };
        let cc = route(&c, &map, &m, &s).unwrap();
        let fv = extract_features(&cc, &s);
        assert_eq!(fv.avg_cx_error, 0.0);
        assert_eq!(fv.avg_cx_critical_path_error, 0.0);
        assert!((fv.avg_readout_error - 0.07).abs() < 1e-12);
    }

    #[test]
    fn features_average_cx_errors() {
        let (m, s) = line_machine(3, &[0.01, 0.03], &[0.0, 0.0, 0.0]);
        let c = Circuit {
            name: "two_cx".into(),
            width: 3,
            gates: vec![Gate::cx(0, 1), Gate::cx(1, 2), Gate::measure(2)],
            measured_qubits: [2].into(),
        };
        let map = Mapping {
            logical_to_physical: vec![0, 1, 2],
        };
        let cc = route(&c, &map, &m, &s).unwrap();
        let fv = extract_features(&cc, &s);
        assert!((fv.avg_cx_error - 0.02).abs() < 1e-12);
        // both CX sit on the single maximal path
        assert!((fv.avg_cx_critical_path_error - 0.02).abs() < 1e-12);
    }

    #[test]
    fn critical_path_matches_independent_extraction() {
        // independent check: path length equals depth and is chained
        for (b, p) in standard_set() {
            let c = build_benchmark(b, &p).unwrap();
            let spec = FleetSpec {
                machine_count: 2,
                qubit_count_choices: vec![7, 16],
                cycles: 1,
                ..FleetSpec::default()
            };
            for m in generate_synthetic_fleet(&spec).unwrap() {
                let s = &m.snapshots[0];
                let (cc, _) = compile_with_snapshot(&c, &m, s).unwrap();
                let path = critical_path_gates(&cc.physical_gates);
                assert_eq!(path.len(), cc.depth, "{} on {}", c.name, m.id);
                for w in path.windows(2) {
                    let (a, b) = (&cc.physical_gates[w[0]], &cc.physical_gates[w[1]]);
                    assert!(
                        a.operands.iter().any(|q| b.operands.contains(q)),
                        "path gates must share an operand"
                    );
                    assert!(w[0] < w[1]);
                }
            }
        }
    }

    #[test]
    fn compile_is_pure() {
        let spec = FleetSpec {
            machine_count: 3,
            qubit_count_choices: vec![7],
            cycles: 2,
            ..FleetSpec::default()
        };
        let fleet = generate_synthetic_fleet(&spec).unwrap();
        let c = build_benchmark(crate::circuits::Benchmark::Qaoa, &Default::default()).unwrap();
        let a = compile_for(&c, &fleet[0], 10).unwrap();
        let b = compile_for(&c, &fleet[0], 10).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn recompilation_across_cycles_changes_cycle_index() {
        let spec = FleetSpec {
            machine_count: 1,
            qubit_count_choices: vec![7],
            cycles: 2,
            cycle_jitter: 0.5,
            ..FleetSpec::default()
        };
        let fleet = generate_synthetic_fleet(&spec).unwrap();
        let c = build_benchmark(crate::circuits::Benchmark::Bv, &Default::default()).unwrap();
        let (cc0, _) = compile_for(&c, &fleet[0], 0).unwrap();
        let (cc1, _) = compile_for(&c, &fleet[0], fleet[0].calibration_period).unwrap();
        assert_ne!(cc0.cycle_index, cc1.cycle_index);
    }

    #[test]
    fn capacity_error_propagates_through_compile_for() {
        let spec = FleetSpec {
            machine_count: 1,
            qubit_count_choices: vec![5],
            cycles: 1,
            ..FleetSpec::default()
        };
        let fleet = generate_synthetic_fleet(&spec).unwrap();
        let c = build_benchmark(crate::circuits::Benchmark::RippleAdder, &Default::default()).unwrap();
        assert!(matches!(
            compile_for(&c, &fleet[0], 0),
            Err(Error::Capacity { .. })
        ));
    }

    #[test]
    fn routing_preserves_logical_cx_multiset() {
        let spec = FleetSpec {
            machine_count: 4,
            qubit_count_choices: vec![7, 16, 27],
            cycles: 1,
            ..FleetSpec::default()
        };
        let fleet = generate_synthetic_fleet(&spec).unwrap();
        for (b, p) in standard_set() {
            let c = build_benchmark(b, &p).unwrap();
            for m in &fleet {
                let (cc, _) = compile_with_snapshot(&c, m, &m.snapshots[0]).unwrap();
                assert!(cc.cx_count() >= c.cx_count(), "{} on {}", c.name, m.id);
                // swap-derived CX arrive in multiples of 3
                assert_eq!((cc.cx_count() - c.cx_count()) % 3, 0);
                assert_eq!(cc.measured_physical.len(), c.measured_qubits.len());
            }
        }
    }

    proptest! {
        // every routed CX must land on a coupling edge, over random
        // circuits and machines
        #[test]
        fn routed_cx_always_on_coupling(
            seed in 0u64..500,
            ops in proptest::collection::vec((0usize..5, 0usize..5), 1..30),
        ) {
            let spec = FleetSpec {
                machine_count: 1,
                qubit_count_choices: vec![7, 16, 27],
                cycles: 1,
                rng_seed: seed,
                ..FleetSpec::default()
            };
            let fleet = generate_synthetic_fleet(&spec).unwrap();
            let m = &fleet[0];
            let mut gates: Vec<Gate> = ops
                .iter()
                .map(|&(a, b)| if a == b { Gate::sq("h", a) } else { Gate::cx(a, b) })
                .collect();
            gates.push(Gate::measure(0));
            let c = Circuit { name: "rand".into(), width: 5, gates, measured_qubits: [0].into() };
            let (cc, _) = compile_with_snapshot(&c, m, &m.snapshots[0]).unwrap();
            let coupled: std::collections::BTreeSet<Edge> = m.coupling.iter().copied().collect();
            for g in &cc.physical_gates {
                if g.kind == GateKind::Cx {
                    prop_assert!(coupled.contains(&Edge::new(g.operands[0], g.operands[1])));
                }
            }
            prop_assert_eq!(asap_depth(&cc.physical_gates), cc.depth);
        }
    }
}
