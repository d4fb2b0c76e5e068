//! Machine models, calibration cycles and synthetic fleet generation.
//!
//! A [`Machine`] carries a coupling graph plus one [`CalibrationSnapshot`]
//! per calibration cycle. Time is integer seconds from simulation epoch 0
//! and a calibration boundary belongs to the new cycle (half-open windows).

use std::collections::BTreeMap;
use std::fmt;
use std::path::Path;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{Error, Result};

/// Seconds since simulation epoch 0.
pub type Timestamp = u64;

/// An undirected coupling edge, stored with the smaller qubit first.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Edge(pub usize, pub usize);

impl Edge {
    pub fn new(a: usize, b: usize) -> Self {
        if a <= b {
            Edge(a, b)
        } else {
            Edge(b, a)
        }
    }

    pub fn contains(&self, q: usize) -> bool {
        self.0 == q || self.1 == q
    }

    pub fn other(&self, q: usize) -> usize {
        if self.0 == q {
            self.1
        } else {
            self.0
        }
    }
}

impl fmt::Display for Edge {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}-{}", self.0, self.1)
    }
}

impl Serialize for Edge {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        [self.0, self.1].serialize(s)
    }
}

impl<'de> Deserialize<'de> for Edge {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let [a, b] = <[usize; 2]>::deserialize(d)?;
        Ok(Edge::new(a, b))
    }
}

/// Serializes `BTreeMap<Edge, f64>` as a JSON object with "min-max" keys.
mod edge_map {
    use super::Edge;
    use serde::de::{MapAccess, Visitor};
    use serde::ser::SerializeMap;
    use serde::{Deserializer, Serializer};
    use std::collections::BTreeMap;
    use std::fmt;

    pub fn serialize<S: Serializer>(
        map: &BTreeMap<Edge, f64>,
        s: S,
    ) -> std::result::Result<S::Ok, S::Error> {
        let mut m = s.serialize_map(Some(map.len()))?;
        for (edge, p) in map {
            m.serialize_entry(&edge.to_string(), p)?;
        }
        m.end()
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(
        d: D,
    ) -> std::result::Result<BTreeMap<Edge, f64>, D::Error> {
        struct V;
        impl<'de> Visitor<'de> for V {
            type Value = BTreeMap<Edge, f64>;

            fn expecting(&self, f: &mut fmt::Formatter) -> fmt::Result {
                f.write_str("a map from \"q-q\" edge keys to probabilities")
            }

            fn visit_map<A: MapAccess<'de>>(
                self,
                mut access: A,
            ) -> std::result::Result<Self::Value, A::Error> {
                let mut out = BTreeMap::new();
                while let Some((key, value)) = access.next_entry::<String, f64>()? {
                    let (a, b) = key
                        .split_once('-')
                        .ok_or_else(|| serde::de::Error::custom("edge key must be \"q-q\""))?;
                    let a = a.parse().map_err(serde::de::Error::custom)?;
                    let b = b.parse().map_err(serde::de::Error::custom)?;
                    out.insert(Edge::new(a, b), value);
                }
                Ok(out)
            }
        }
        d.deserialize_map(V)
    }
}

/// Error rates published by one calibration cycle.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CalibrationSnapshot {
    #[serde(rename = "cycle")]
    pub cycle_index: usize,
    #[serde(rename = "valid_from_s")]
    pub valid_from: Timestamp,
    #[serde(with = "edge_map")]
    pub cx_error: BTreeMap<Edge, f64>,
    pub readout_error: Vec<f64>,
    pub single_qubit_error: Vec<f64>,
}

/// A quantum machine: topology plus its rolling calibration history.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Machine {
    pub id: String,
    pub n_qubits: usize,
    pub coupling: Vec<Edge>,
    #[serde(rename = "calibration_period_s")]
    pub calibration_period: Timestamp,
    #[serde(rename = "calibration_offset_s")]
    pub calibration_offset: Timestamp,
    #[serde(default)]
    pub is_public: bool,
    pub snapshots: Vec<CalibrationSnapshot>,
}

impl Machine {
    /// Start of calibration cycle `k`. Cycle 0 always starts at epoch 0;
    /// the first recalibration happens at the offset (or one full period
    /// in, when the offset is zero).
    pub fn cycle_start(&self, k: usize) -> Timestamp {
        if k == 0 {
            return 0;
        }
        let first = if self.calibration_offset == 0 {
            self.calibration_period
        } else {
            self.calibration_offset
        };
        first + (k as Timestamp - 1) * self.calibration_period
    }

    /// End (exclusive) of the calibrated horizon.
    pub fn horizon_end(&self) -> Timestamp {
        self.cycle_start(self.snapshots.len())
    }

    /// The snapshot whose half-open window contains `t`.
    pub fn snapshot_at(&self, t: Timestamp) -> Result<&CalibrationSnapshot> {
        if t >= self.horizon_end() {
            return Err(Error::OutOfRange {
                machine: self.id.clone(),
                t,
            });
        }
        let idx = self
            .snapshots
            .partition_point(|s| s.valid_from <= t)
            .checked_sub(1)
            .ok_or(Error::OutOfRange {
                machine: self.id.clone(),
                t,
            })?;
        Ok(&self.snapshots[idx])
    }

    /// Like [`snapshot_at`](Self::snapshot_at) but clamps to the last
    /// snapshot past the horizon, for long-running simulations.
    pub fn snapshot_at_or_last(&self, t: Timestamp) -> &CalibrationSnapshot {
        self.snapshot_at(t)
            .unwrap_or_else(|_| self.snapshots.last().expect("validated machine"))
    }

    /// Smallest calibration boundary strictly after `t`,
    /// i.e. the smallest `k * period + offset > t`.
    pub fn next_calibration_time(&self, t: Timestamp) -> Timestamp {
        let period = self.calibration_period;
        let offset = self.calibration_offset;
        if t < offset {
            return offset;
        }
        let k = (t - offset) / period + 1;
        offset + k * period
    }

    pub fn neighbors(&self, q: usize) -> Vec<usize> {
        let mut out: Vec<usize> = self
            .coupling
            .iter()
            .filter(|e| e.contains(q))
            .map(|e| e.other(q))
            .collect();
        out.sort_unstable();
        out
    }

    /// Checks every structural invariant, naming the offending field.
    pub fn validate(&self) -> Result<()> {
        let err = |field: &str, msg: String| Err(Error::validation(&self.id, field, msg));
        if self.n_qubits == 0 {
            return err("n_qubits", "must be positive".into());
        }
        if self.calibration_period == 0 {
            return err("calibration_period_s", "must be positive".into());
        }
        if self.calibration_offset >= self.calibration_period {
            return err(
                "calibration_offset_s",
                format!(
                    "offset {} must be < period {}",
                    self.calibration_offset, self.calibration_period
                ),
            );
        }
        for e in &self.coupling {
            if e.0 >= self.n_qubits || e.1 >= self.n_qubits {
                return err("coupling", format!("edge {e} references qubit >= {}", self.n_qubits));
            }
            if e.0 == e.1 {
                return err("coupling", format!("self-loop on qubit {}", e.0));
            }
        }
        if !self.is_connected() {
            return err("coupling", "coupling graph is not connected".into());
        }
        if self.snapshots.is_empty() {
            return err("snapshots", "at least one snapshot required".into());
        }
        for (k, s) in self.snapshots.iter().enumerate() {
            if s.cycle_index != k {
                return err(
                    "snapshots",
                    format!("cycle index {} at position {k} (gap or disorder)", s.cycle_index),
                );
            }
            if s.valid_from != self.cycle_start(k) {
                return err(
                    "snapshots",
                    format!(
                        "cycle {k} valid_from {} does not match expected {}",
                        s.valid_from,
                        self.cycle_start(k)
                    ),
                );
            }
            if s.readout_error.len() != self.n_qubits {
                return err(
                    "readout_error",
                    format!("cycle {k}: {} entries, expected {}", s.readout_error.len(), self.n_qubits),
                );
            }
            if s.single_qubit_error.len() != self.n_qubits {
                return err(
                    "single_qubit_error",
                    format!(
                        "cycle {k}: {} entries, expected {}",
                        s.single_qubit_error.len(),
                        self.n_qubits
                    ),
                );
            }
            for (q, p) in s.readout_error.iter().enumerate() {
                if !(0.0..1.0).contains(p) {
                    return err("readout_error", format!("cycle {k}, qubit {q}: {p} not in [0,1)"));
                }
            }
            for (q, p) in s.single_qubit_error.iter().enumerate() {
                if !(0.0..1.0).contains(p) {
                    return err(
                        "single_qubit_error",
                        format!("cycle {k}, qubit {q}: {p} not in [0,1)"),
                    );
                }
            }
            if s.cx_error.len() != self.coupling.len()
                || !self.coupling.iter().all(|e| s.cx_error.contains_key(e))
            {
                return err(
                    "cx_error",
                    format!("cycle {k}: edge set does not match the coupling map"),
                );
            }
            for (e, p) in &s.cx_error {
                if !(0.0..1.0).contains(p) {
                    return err("cx_error", format!("cycle {k}, edge {e}: {p} not in [0,1)"));
                }
            }
        }
        Ok(())
    }

    fn is_connected(&self) -> bool {
        if self.n_qubits == 1 {
            return true;
        }
        let mut seen = vec![false; self.n_qubits];
        let mut stack = vec![0usize];
        seen[0] = true;
        while let Some(q) = stack.pop() {
            for e in &self.coupling {
                if e.contains(q) {
                    let o = e.other(q);
                    if !seen[o] {
                        seen[o] = true;
                        stack.push(o);
                    }
                }
            }
        }
        seen.into_iter().all(|v| v)
    }
}

/// Parameter envelope for synthetic fleet generation.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct FleetSpec {
    pub machine_count: usize,
    pub qubit_count_choices: Vec<usize>,
    pub readout_range: (f64, f64),
    pub cx_range: (f64, f64),
    pub single_qubit_range: (f64, f64),
    pub cycles: usize,
    pub calibration_period_s: Timestamp,
    /// Relative spread of each per-cycle redraw around the machine's base
    /// rate, clamped back into the spec range.
    pub cycle_jitter: f64,
    pub stagger: bool,
    pub rng_seed: u64,
}

impl Default for FleetSpec {
    fn default() -> Self {
        FleetSpec {
            machine_count: 26,
            qubit_count_choices: vec![1, 5, 7, 16, 27, 65],
            readout_range: (0.005, 0.12),
            cx_range: (0.004, 0.1),
            single_qubit_range: (0.0002, 0.002),
            cycles: 74,
            calibration_period_s: 86_400,
            cycle_jitter: 0.25,
            stagger: false,
            rng_seed: 7,
        }
    }
}

impl FleetSpec {
    pub fn validate(&self) -> Result<()> {
        if self.machine_count == 0 {
            return Err(Error::invalid("fleet spec", "machine_count must be positive"));
        }
        if self.qubit_count_choices.is_empty() || self.qubit_count_choices.contains(&0) {
            return Err(Error::invalid(
                "fleet spec",
                "qubit_count_choices must be non-empty positive integers",
            ));
        }
        if self.cycles == 0 {
            return Err(Error::invalid("fleet spec", "cycles must be positive"));
        }
        if self.calibration_period_s == 0 {
            return Err(Error::invalid("fleet spec", "calibration_period_s must be positive"));
        }
        if !(0.0..1.0).contains(&self.cycle_jitter) {
            return Err(Error::invalid("fleet spec", "cycle_jitter must be in [0,1)"));
        }
        for (name, (lo, hi)) in [
            ("readout_range", self.readout_range),
            ("cx_range", self.cx_range),
            ("single_qubit_range", self.single_qubit_range),
        ] {
            if !(0.0..1.0).contains(&lo) || !(0.0..1.0).contains(&hi) || lo > hi {
                return Err(Error::invalid(
                    "fleet spec",
                    format!("{name} ({lo}, {hi}) must satisfy 0 <= min <= max < 1"),
                ));
            }
        }
        Ok(())
    }
}

/// Linear chain up to 5 qubits, near-square 2D lattice above.
pub fn topology(n_qubits: usize) -> Vec<Edge> {
    let mut edges = Vec::new();
    if n_qubits <= 5 {
        for q in 1..n_qubits {
            edges.push(Edge::new(q - 1, q));
        }
        return edges;
    }
    let cols = (n_qubits as f64).sqrt().ceil() as usize;
    for idx in 0..n_qubits {
        let col = idx % cols;
        if col + 1 < cols && idx + 1 < n_qubits {
            edges.push(Edge::new(idx, idx + 1));
        }
        if idx + cols < n_qubits {
            edges.push(Edge::new(idx, idx + cols));
        }
    }
    edges
}

fn jittered(rng: &mut ChaCha8Rng, base: f64, jitter: f64, lo: f64, hi: f64) -> f64 {
    let u = 2.0 * rng.random::<f64>() - 1.0;
    (base * (1.0 + jitter * u)).clamp(lo, hi)
}

/// Base rate within [lo, hi]: the machine's quality level sets where in
/// the range this machine sits, a per-item factor spreads its qubits and
/// edges around that level.
fn quality_base(rng: &mut ChaCha8Rng, quality: f64, lo: f64, hi: f64) -> f64 {
    let item = 0.7 + 0.6 * rng.random::<f64>();
    lo + (hi - lo) * (quality * item).clamp(0.0, 1.0)
}

/// Generates `spec.machine_count` machines. Each machine draws a quality
/// level placing its base error rates within the spec ranges (machines
/// are persistently good or bad, like real calibrated devices); every
/// cycle redraws jittered rates around those bases. Pure function of the
/// spec (seed included).
pub fn generate_synthetic_fleet(spec: &FleetSpec) -> Result<Vec<Machine>> {
    spec.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(spec.rng_seed);
    let (ro_lo, ro_hi) = spec.readout_range;
    let (cx_lo, cx_hi) = spec.cx_range;
    let (sq_lo, sq_hi) = spec.single_qubit_range;

    let mut fleet = Vec::with_capacity(spec.machine_count);
    for i in 0..spec.machine_count {
        let n = spec.qubit_count_choices[rng.random_range(0..spec.qubit_count_choices.len())];
        let coupling = topology(n);
        let is_public = rng.random_bool(0.25);
        let quality = rng.random::<f64>().powi(3);

        let ro_base: Vec<f64> = (0..n)
            .map(|_| quality_base(&mut rng, quality, ro_lo, ro_hi))
            .collect();
        let sq_base: Vec<f64> = (0..n)
            .map(|_| quality_base(&mut rng, quality, sq_lo, sq_hi))
            .collect();
        let cx_base: Vec<f64> = (0..coupling.len())
            .map(|_| quality_base(&mut rng, quality, cx_lo, cx_hi))
            .collect();

        let mut machine = Machine {
            id: format!("m{i:02}"),
            n_qubits: n,
            coupling: coupling.clone(),
            calibration_period: spec.calibration_period_s,
            calibration_offset: 0,
            is_public,
            snapshots: Vec::with_capacity(spec.cycles),
        };
        for k in 0..spec.cycles {
            let readout_error = ro_base
                .iter()
                .map(|&b| jittered(&mut rng, b, spec.cycle_jitter, ro_lo, ro_hi))
                .collect();
            let single_qubit_error = sq_base
                .iter()
                .map(|&b| jittered(&mut rng, b, spec.cycle_jitter, sq_lo, sq_hi))
                .collect();
            let cx_error = coupling
                .iter()
                .zip(&cx_base)
                .map(|(&e, &b)| (e, jittered(&mut rng, b, spec.cycle_jitter, cx_lo, cx_hi)))
                .collect();
            machine.snapshots.push(CalibrationSnapshot {
                cycle_index: k,
                valid_from: machine.cycle_start(k),
                cx_error,
                readout_error,
                single_qubit_error,
            });
        }
        machine.validate()?;
        fleet.push(machine);
    }
    if spec.stagger {
        fleet = apply_stagger(&fleet)?;
    }
    Ok(fleet)
}

/// Spreads calibration boundaries evenly: machine `i` of `M` gets offset
/// `i * period / M` and its snapshot windows are recomputed to match.
pub fn apply_stagger(fleet: &[Machine]) -> Result<Vec<Machine>> {
    let Some(first) = fleet.first() else {
        return Ok(Vec::new());
    };
    let period = first.calibration_period;
    if fleet.iter().any(|m| m.calibration_period != period) {
        return Err(Error::MixedPeriods);
    }
    let count = fleet.len() as Timestamp;
    Ok(fleet
        .iter()
        .enumerate()
        .map(|(i, m)| {
            let mut m = m.clone();
            m.calibration_offset = (i as Timestamp * period) / count;
            for k in 0..m.snapshots.len() {
                m.snapshots[k].valid_from = m.cycle_start(k);
            }
            m
        })
        .collect())
}

pub fn load_fleet(path: impl AsRef<Path>) -> Result<Vec<Machine>> {
    let path = path.as_ref();
    let text = std::fs::read_to_string(path).map_err(|e| {
        if e.kind() == std::io::ErrorKind::NotFound {
            Error::MissingArtifact(path.display().to_string())
        } else {
            Error::io(path.display().to_string(), e)
        }
    })?;
    let fleet: Vec<Machine> =
        serde_json::from_str(&text).map_err(|e| Error::Parse(format!("{}: {e}", path.display())))?;
    for m in &fleet {
        m.validate()?;
    }
    Ok(fleet)
}

pub fn save_fleet(path: impl AsRef<Path>, fleet: &[Machine]) -> Result<()> {
    let path = path.as_ref();
    let text = serde_json::to_string_pretty(fleet)
        .map_err(|e| Error::Parse(format!("serialize fleet: {e}")))?;
    std::fs::write(path, text).map_err(|e| Error::io(path.display().to_string(), e))
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn small_machine() -> Machine {
        let coupling = vec![Edge::new(0, 1)];
        let mut m = Machine {
            id: "t0".into(),
            n_qubits: 2,
            coupling: coupling.clone(),
            calibration_period: 100,
            calibration_offset: 0,
            is_public: false,
            snapshots: Vec::new(),
        };
        for k in 0..3 {
            m.snapshots.push(CalibrationSnapshot {
                cycle_index: k,
                valid_from: m.cycle_start(k),
                cx_error: coupling.iter().map(|&e| (e, 0.01 * (k + 1) as f64)).collect(),
                readout_error: vec![0.02; 2],
                single_qubit_error: vec![0.001; 2],
            });
        }
        m
    }

    #[test]
    fn snapshot_boundary_belongs_to_new_cycle() {
        let m = small_machine();
        assert_eq!(m.snapshot_at(0).unwrap().cycle_index, 0);
        assert_eq!(m.snapshot_at(99).unwrap().cycle_index, 0);
        assert_eq!(m.snapshot_at(100).unwrap().cycle_index, 1);
        assert_eq!(m.snapshot_at(150).unwrap().cycle_index, 1);
        assert!(m.snapshot_at(300).is_err());
    }

    #[test]
    fn next_calibration_strictly_greater() {
        let m = small_machine();
        assert_eq!(m.next_calibration_time(0), 100);
        assert_eq!(m.next_calibration_time(99), 100);
        assert_eq!(m.next_calibration_time(100), 200);
    }

    #[test]
    fn next_calibration_daily_example() {
        let mut m = small_machine();
        m.calibration_period = 86_400;
        assert_eq!(m.next_calibration_time(100), 86_400);
    }

    #[test]
    fn validate_rejects_bad_probability() {
        let mut m = small_machine();
        m.snapshots[1].cx_error.insert(Edge::new(0, 1), 1.2);
        let err = m.validate().unwrap_err();
        let msg = err.to_string();
        assert!(msg.contains("cx_error"), "{msg}");
        assert!(msg.contains("0-1"), "{msg}");
    }

    #[test]
    fn validate_rejects_disconnected() {
        let mut m = small_machine();
        m.n_qubits = 3;
        for s in &mut m.snapshots {
            s.readout_error.push(0.02);
            s.single_qubit_error.push(0.001);
        }
        assert!(m.validate().is_err());
    }

    #[test]
    fn generation_is_deterministic() {
        let spec = FleetSpec {
            machine_count: 6,
            cycles: 4,
            ..FleetSpec::default()
        };
        let a = generate_synthetic_fleet(&spec).unwrap();
        let b = generate_synthetic_fleet(&spec).unwrap();
        assert_eq!(a, b);
        assert_eq!(
            serde_json::to_string(&a).unwrap(),
            serde_json::to_string(&b).unwrap()
        );
    }

    #[test]
    fn generation_matches_spec_counts() {
        let spec = FleetSpec {
            machine_count: 26,
            cycles: 74,
            ..FleetSpec::default()
        };
        let fleet = generate_synthetic_fleet(&spec).unwrap();
        assert_eq!(fleet.len(), 26);
        for m in &fleet {
            assert_eq!(m.snapshots.len(), 74);
            assert!(spec.qubit_count_choices.contains(&m.n_qubits));
        }
    }

    #[test]
    fn roundtrip_through_file() {
        let spec = FleetSpec {
            machine_count: 5,
            cycles: 3,
            ..FleetSpec::default()
        };
        let fleet = generate_synthetic_fleet(&spec).unwrap();
        let dir = std::env::temp_dir().join(format!("qsched-fleet-{}", std::process::id()));
        std::fs::create_dir_all(&dir).unwrap();
        let path = dir.join("fleet.json");
        save_fleet(&path, &fleet).unwrap();
        let loaded = load_fleet(&path).unwrap();
        assert_eq!(fleet, loaded);
        std::fs::remove_dir_all(&dir).ok();
    }

    #[test]
    fn load_rejects_out_of_range_error_rate() {
        let dir = std::env::temp_dir().join(format!("qsched-badfleet-{}", std::process::id()));
        std::fs::create_dir_all(&dir).unwrap();
        let path = dir.join("bad.json");
        let text = r#"[{
            "id": "bad", "n_qubits": 2, "coupling": [[0,1]],
            "calibration_period_s": 100, "calibration_offset_s": 0,
            "snapshots": [{"cycle": 0, "valid_from_s": 0,
                "cx_error": {"0-1": 1.2},
                "readout_error": [0.1, 0.1],
                "single_qubit_error": [0.001, 0.001]}]
        }]"#;
        std::fs::write(&path, text).unwrap();
        let err = load_fleet(&path).unwrap_err();
        assert!(err.to_string().contains("0-1"), "{err}");
        std::fs::remove_dir_all(&dir).ok();
    }

    #[test]
    fn minimal_fleet_file_loads() {
        let dir = std::env::temp_dir().join(format!("qsched-minfleet-{}", std::process::id()));
        std::fs::create_dir_all(&dir).unwrap();
        let path = dir.join("min.json");
        let text = r#"[{
            "id": "solo", "n_qubits": 2, "coupling": [[0,1]],
            "calibration_period_s": 86400, "calibration_offset_s": 0,
            "snapshots": [{"cycle": 0, "valid_from_s": 0,
                "cx_error": {"0-1": 0.01},
                "readout_error": [0.1, 0.1],
                "single_qubit_error": [0.001, 0.001]}]
        }]"#;
        std::fs::write(&path, text).unwrap();
        let fleet = load_fleet(&path).unwrap();
        assert_eq!(fleet.len(), 1);
        assert_eq!(fleet[0].coupling, vec![Edge::new(0, 1)]);
        std::fs::remove_dir_all(&dir).ok();
    }

    #[test]
    fn stagger_spreads_offsets_evenly() {
        let mut fleet = Vec::new();
        for i in 0..4 {
            let mut m = small_machine();
            m.id = format!("m{i}");
            m.calibration_period = 86_400;
            for k in 0..m.snapshots.len() {
                m.snapshots[k].valid_from = m.cycle_start(k);
            }
            fleet.push(m);
        }
        let staggered = apply_stagger(&fleet).unwrap();
        let offsets: Vec<_> = staggered.iter().map(|m| m.calibration_offset).collect();
        assert_eq!(offsets, vec![0, 21_600, 43_200, 64_800]);
        for m in &staggered {
            m.validate().unwrap();
        }
    }

    #[test]
    fn stagger_single_machine_is_identity() {
        let fleet = vec![small_machine()];
        let staggered = apply_stagger(&fleet).unwrap();
        assert_eq!(staggered, fleet);
    }

    #[test]
    fn stagger_rejects_mixed_periods() {
        let mut a = small_machine();
        let mut b = small_machine();
        b.id = "t1".into();
        b.calibration_period = 200;
        for k in 0..b.snapshots.len() {
            b.snapshots[k].valid_from = b.cycle_start(k);
        }
        a.calibration_period = 100;
        assert!(matches!(apply_stagger(&[a, b]), Err(Error::MixedPeriods)));
    }

    #[test]
    fn staggered_boundaries_match_closed_form() {
        let spec = FleetSpec {
            machine_count: 7,
            cycles: 3,
            stagger: true,
            ..FleetSpec::default()
        };
        let fleet = generate_synthetic_fleet(&spec).unwrap();
        let period = spec.calibration_period_s;
        let m_count = fleet.len() as Timestamp;
        for (i, m) in fleet.iter().enumerate() {
            let expect = (i as Timestamp * period) / m_count;
            assert_eq!(m.calibration_offset, expect);
            assert_eq!(m.next_calibration_time(m.calibration_offset) % period, expect % period);
        }
        // pairwise circular distance between offsets is at least period / M
        let min_gap = period / m_count;
        for a in &fleet {
            for b in &fleet {
                if a.id == b.id {
                    continue;
                }
                let d = a.calibration_offset.abs_diff(b.calibration_offset);
                let circ = d.min(period - d);
                assert!(circ >= min_gap, "{} vs {}: {circ} < {min_gap}", a.id, b.id);
            }
        }
    }

    #[test]
    fn topology_is_connected_for_paper_sizes() {
        for n in [1, 5, 7, 16, 27, 65] {
            let m = Machine {
                id: format!("n{n}"),
                n_qubits: n,
                coupling: topology(n),
                calibration_period: 10,
                calibration_offset: 0,
                is_public: false,
                snapshots: vec![CalibrationSnapshot {
                    cycle_index: 0,
                    valid_from: 0,
                    cx_error: topology(n).into_iter().map(|e| (e, 0.01)).collect(),
                    readout_error: vec![0.01; n],
                    single_qubit_error: vec![0.001; n],
                }],
            };
            m.validate().unwrap();
        }
    }

    proptest! {
        // snapshot_at agrees with a brute-force linear scan
        #[test]
        fn snapshot_matches_linear_scan(t in 0u64..300) {
            let m = small_machine();
            let scan = m
                .snapshots
                .iter()
                .filter(|s| s.valid_from <= t)
                .last();
            match (m.snapshot_at(t), scan) {
                (Ok(got), Some(want)) if t < m.horizon_end() => {
                    prop_assert_eq!(got.cycle_index, want.cycle_index);
                }
                (Err(_), _) => prop_assert!(t >= m.horizon_end()),
                (Ok(_), _) => prop_assert!(false, "snapshot_at succeeded past horizon"),
            }
        }

        // the gap to the next boundary is always in (0, period]
        #[test]
        fn next_boundary_gap_in_period(t in 0u64..250, offset in 0u64..100) {
            let mut m = small_machine();
            m.calibration_offset = offset % m.calibration_period;
            let next = m.next_calibration_time(t);
            prop_assert!(next > t);
            prop_assert!(next - t <= m.calibration_period);
        }

        // same window in, same snapshot out
        #[test]
        fn stable_within_window(k in 0usize..3, delta in 0u64..100) {
            let m = small_machine();
            let t = m.cycle_start(k) + delta.min(99);
            let s = m.snapshot_at(t).unwrap();
            prop_assert_eq!(s.cycle_index, k);
        }
    }
}
