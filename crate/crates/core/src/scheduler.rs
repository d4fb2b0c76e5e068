//! Machine selection: the utility-based proposed policy plus the
//! Only-Fidelity and Only-WaitTime baselines.
//!
//! QOS is handled as a soft penalty with hard dominance: violating
//! machines stay in the candidate set but any machine inside the bound
//! outranks every machine outside it, and among violators the penalty
//! grows with the overshoot so the least-bad (lowest-wait) machine wins.

use std::collections::HashMap;
use std::rc::Rc;

use serde::{Deserialize, Serialize};

use crate::circuits::Circuit;
use crate::error::{Error, Result};
use crate::fleet::{Machine, Timestamp};
use crate::predict::{predict_exec_time, JobRuntimeFeatures, ProductLinearModel};
use crate::transpiler::{compile_with_snapshot, CompiledCircuit, FeatureVector};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Job {
    pub id: String,
    pub circuits: Vec<Circuit>,
    pub representative_index: usize,
    pub shots: u64,
    pub qos_max_wait: Option<f64>,
    pub submit_time: f64,
}

impl Job {
    pub fn validate(&self) -> Result<()> {
        if self.circuits.is_empty() {
            return Err(Error::invalid("job", format!("{}: no circuits", self.id)));
        }
        if self.representative_index >= self.circuits.len() {
            return Err(Error::invalid(
                "job",
                format!("{}: representative index out of range", self.id),
            ));
        }
        if self.shots == 0 {
            return Err(Error::invalid("job", format!("{}: zero shots", self.id)));
        }
        Ok(())
    }

    pub fn representative(&self) -> &Circuit {
        &self.circuits[self.representative_index]
    }
}

/// One machine's scheduling snapshot: the machine plus its current
/// predicted queue time.
#[derive(Debug, Clone, Copy)]
pub struct MachineView<'a> {
    pub machine: &'a Machine,
    pub predicted_wait: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Candidate {
    pub machine_id: String,
    pub predicted_fidelity: f64,
    pub predicted_wait: f64,
    pub predicted_exec: f64,
    pub crossover_predicted: bool,
    pub qos_violated: bool,
    /// Fraction by which the predicted wait overshoots the QOS bound
    /// (0 when inside the bound).
    pub qos_overshoot: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct UtilityConfig {
    pub w_fid: i8,
    pub w_wait: i8,
    pub w_qos: i8,
    pub w_cc: i8,
    pub qos_penalty: f64,
    pub cc_penalty: f64,
    /// Q_max, the wait normalizer.
    pub wait_normalizer: f64,
    /// Planning margin on the QOS bound: a machine is flagged once its
    /// predicted wait exceeds `(1 - margin) * qos`, absorbing execution
    /// time prediction noise.
    pub qos_margin: f64,
}

impl Default for UtilityConfig {
    fn default() -> Self {
        UtilityConfig {
            w_fid: 1,
            w_wait: -1,
            w_qos: -1,
            w_cc: -1,
            qos_penalty: 10.0,
            cc_penalty: 10.0,
            wait_normalizer: 86_400.0,
            qos_margin: 0.05,
        }
    }
}

impl UtilityConfig {
    pub fn validate(&self) -> Result<()> {
        for (name, w) in [
            ("w_fid", self.w_fid),
            ("w_wait", self.w_wait),
            ("w_qos", self.w_qos),
            ("w_cc", self.w_cc),
        ] {
            if !(-1..=1).contains(&w) {
                return Err(Error::invalid("utility config", format!("{name} must be -1, 0 or 1")));
            }
        }
        if self.qos_penalty < 1.0 || self.cc_penalty < 1.0 {
            return Err(Error::invalid("utility config", "penalties must be >= 1"));
        }
        if self.wait_normalizer <= 0.0 {
            return Err(Error::invalid("utility config", "wait_normalizer must be positive"));
        }
        if !(0.0..1.0).contains(&self.qos_margin) {
            return Err(Error::invalid("utility config", "qos_margin must be in [0,1)"));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PolicyKind {
    Proposed,
    OnlyFid,
    OnlyWt,
}

impl PolicyKind {
    pub fn name(&self) -> &'static str {
        match self {
            PolicyKind::Proposed => "proposed",
            PolicyKind::OnlyFid => "only_fid",
            PolicyKind::OnlyWt => "only_wt",
        }
    }
}

impl std::str::FromStr for PolicyKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Ok(match s {
            "proposed" => PolicyKind::Proposed,
            "only_fid" => PolicyKind::OnlyFid,
            "only_wt" => PolicyKind::OnlyWt,
            other => return Err(Error::invalid("policy", format!("unknown policy `{other}`"))),
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Policy {
    pub kind: PolicyKind,
    pub config: UtilityConfig,
}

impl Policy {
    pub fn proposed(config: UtilityConfig) -> Self {
        Policy {
            kind: PolicyKind::Proposed,
            config,
        }
    }

    pub fn only_fid() -> Self {
        Policy {
            kind: PolicyKind::OnlyFid,
            config: UtilityConfig::default(),
        }
    }

    pub fn only_wt() -> Self {
        Policy {
            kind: PolicyKind::OnlyWt,
            config: UtilityConfig::default(),
        }
    }
}

/// The fitted predictors a scheduling decision consumes.
#[derive(Debug, Clone, Copy)]
pub struct Models<'a> {
    pub fidelity: &'a ProductLinearModel,
    pub runtime: &'a ProductLinearModel,
    pub runtime_floor: f64,
}

/// Capacity filter plus QOS flagging. Machines that blow the QOS bound
/// stay listed (flagged false) so an all-violating fleet still yields a
/// least-bad pick; machines too small for the representative circuit are
/// dropped, and an empty result is an error.
pub fn feasible_machines(
    job: &Job,
    views: &[MachineView<'_>],
    cfg: &UtilityConfig,
) -> Result<Vec<(usize, bool)>> {
    let width = job.representative().width;
    let out: Vec<(usize, bool)> = views
        .iter()
        .enumerate()
        .filter(|(_, v)| v.machine.n_qubits >= width)
        .map(|(i, v)| {
            let qos_ok = match job.qos_max_wait {
                Some(q) => v.predicted_wait <= q * (1.0 - cfg.qos_margin),
                None => true,
            };
            (i, qos_ok)
        })
        .collect();
    if out.is_empty() {
        return Err(Error::NoFeasibleMachine);
    }
    Ok(out)
}

/// True iff the job's predicted completion lands strictly past the
/// machine's next calibration boundary.
pub fn predicts_crossover(
    machine: &Machine,
    now: f64,
    predicted_wait: f64,
    predicted_exec: f64,
) -> bool {
    let boundary = machine.next_calibration_time(now.max(0.0) as Timestamp) as f64;
    now + predicted_wait + predicted_exec > boundary
}

/// Scalar utility of a candidate.
pub fn utility(c: &Candidate, cfg: &UtilityConfig) -> f64 {
    let mut u = cfg.w_fid as f64 * c.predicted_fidelity
        + cfg.w_wait as f64 * (c.predicted_wait / cfg.wait_normalizer);
    if c.qos_violated {
        u += cfg.w_qos as f64 * cfg.qos_penalty * (1.0 + c.qos_overshoot);
    }
    if c.crossover_predicted {
        u += cfg.w_cc as f64 * cfg.cc_penalty;
    }
    u
}

/// Caches compilation results per (circuit name, machine, cycle); valid
/// as long as equal circuit names denote equal circuits, which holds for
/// the deterministic benchmark set.
#[derive(Default)]
pub struct CompileCache {
    map: HashMap<(String, String, usize), Rc<(CompiledCircuit, FeatureVector)>>,
}

impl CompileCache {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn compile(
        &mut self,
        c: &Circuit,
        m: &Machine,
        t: Timestamp,
    ) -> Result<Rc<(CompiledCircuit, FeatureVector)>> {
        let snapshot = m.snapshot_at_or_last(t);
        let key = (c.name.clone(), m.id.clone(), snapshot.cycle_index);
        if let Some(hit) = self.map.get(&key) {
            return Ok(Rc::clone(hit));
        }
        let compiled = Rc::new(compile_with_snapshot(c, m, snapshot)?);
        self.map.insert(key, Rc::clone(&compiled));
        Ok(compiled)
    }
}

#[derive(Debug, Clone)]
pub struct Selection {
    pub machine_index: usize,
    pub machine_id: String,
    pub candidate: Candidate,
    pub compiled: Rc<(CompiledCircuit, FeatureVector)>,
    /// Whether any candidate satisfied the QOS bound at decision time.
    pub qos_feasible_existed: Option<bool>,
}

fn clamp01(x: f64) -> f64 {
    x.clamp(0.0, 1.0)
}

pub fn build_candidate(
    job: &Job,
    view: &MachineView<'_>,
    models: &Models<'_>,
    cfg: &UtilityConfig,
    now: f64,
    compiled: &(CompiledCircuit, FeatureVector),
) -> Result<Candidate> {
    let (cc, fv) = compiled;
    let predicted_fidelity = clamp01(models.fidelity.predict(&fv.as_array())?);
    let jf = JobRuntimeFeatures::new(
        job.circuits.len(),
        job.shots,
        crate::circuits::CircuitStats {
            width: job.representative().width,
            total_gates: cc.physical_gates.len(),
            cx_count: cc.cx_count(),
            depth: cc.depth,
        },
        view.machine.n_qubits,
    );
    let predicted_exec = predict_exec_time(models.runtime, &jf, models.runtime_floor)?;
    let (qos_violated, qos_overshoot) = match job.qos_max_wait {
        Some(q) => {
            let bound = q * (1.0 - cfg.qos_margin);
            if view.predicted_wait > bound {
                (true, (view.predicted_wait - bound) / q.max(f64::MIN_POSITIVE))
            } else {
                (false, 0.0)
            }
        }
        None => (false, 0.0),
    };
    Ok(Candidate {
        machine_id: view.machine.id.clone(),
        predicted_fidelity,
        predicted_wait: view.predicted_wait,
        predicted_exec,
        crossover_predicted: predicts_crossover(
            view.machine,
            now,
            view.predicted_wait,
            predicted_exec,
        ),
        qos_violated,
        qos_overshoot,
    })
}

/// Index of the winning candidate under a policy. Ties break toward
/// higher fidelity, then lower wait, then lexicographic machine id.
pub fn select_from_candidates(policy: &Policy, candidates: &[Candidate]) -> Option<usize> {
    use std::cmp::Ordering;
    let primary = |c: &Candidate| -> f64 {
        match policy.kind {
            PolicyKind::Proposed => utility(c, &policy.config),
            PolicyKind::OnlyFid => c.predicted_fidelity,
            PolicyKind::OnlyWt => -c.predicted_wait,
        }
    };
    (0..candidates.len()).reduce(|best, i| {
        let (a, b) = (&candidates[i], &candidates[best]);
        let ord = primary(a)
            .total_cmp(&primary(b))
            .then(a.predicted_fidelity.total_cmp(&b.predicted_fidelity))
            .then(b.predicted_wait.total_cmp(&a.predicted_wait))
            .then(b.machine_id.cmp(&a.machine_id));
        if ord == Ordering::Greater {
            i
        } else {
            best
        }
    })
}

/// Full decision for one job: compile the representative circuit for
/// every feasible machine, predict fidelity, execution and crossover,
/// then pick per policy.
pub fn select_machine(
    job: &Job,
    views: &[MachineView<'_>],
    models: &Models<'_>,
    policy: &Policy,
    now: f64,
    cache: &mut CompileCache,
) -> Result<Selection> {
    job.validate()?;
    policy.config.validate()?;
    let feasible = feasible_machines(job, views, &policy.config)?;
    let rep = job.representative();

    let mut entries = Vec::with_capacity(feasible.len());
    for (idx, _) in &feasible {
        let view = &views[*idx];
        let compiled = cache.compile(rep, view.machine, now.max(0.0) as Timestamp)?;
        let candidate = build_candidate(job, view, models, &policy.config, now, &compiled)?;
        entries.push((*idx, candidate, compiled));
    }
    let qos_feasible_existed = job
        .qos_max_wait
        .map(|_| entries.iter().any(|(_, c, _)| !c.qos_violated));

    let candidates: Vec<Candidate> = entries.iter().map(|(_, c, _)| c.clone()).collect();
    let winner = select_from_candidates(policy, &candidates).ok_or(Error::NoFeasibleMachine)?;
    let (machine_index, candidate, compiled) = entries.swap_remove(winner);
    Ok(Selection {
        machine_index,
        machine_id: candidate.machine_id.clone(),
        candidate,
        compiled,
        qos_feasible_existed,
    })
}
