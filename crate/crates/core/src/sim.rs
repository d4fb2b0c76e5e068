//! Discrete-event simulation of the fleet: seeded load, job arrivals,
//! FIFO queues, executions and calibration boundaries.
//!
//! Every policy in a scenario replays the same cloned initial state and
//! the same arrival stream, so policy comparisons isolate the scheduling
//! decision itself. All randomness flows from explicit seeds; two runs of
//! the same scenario produce identical traces.

use std::cmp::Ordering;
use std::collections::{BTreeMap, BinaryHeap, VecDeque};
use std::rc::Rc;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::circuits::{build_benchmark, circuit_stats, standard_set, Circuit, CircuitStats};
use crate::error::{Error, Result};
use crate::fleet::{apply_stagger, Machine, Timestamp};
use crate::noise::analytic_pos;
use crate::predict::{JobRuntimeFeatures, ProductLinearModel};
use crate::scheduler::{
    select_machine, Candidate, CompileCache, Job, MachineView, Models, Policy, PolicyKind,
    UtilityConfig,
};
use crate::transpiler::{CompiledCircuit, FeatureVector};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum LoadKind {
    Low,
    High,
    Random,
}

impl std::str::FromStr for LoadKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Ok(match s {
            "low" => LoadKind::Low,
            "high" => LoadKind::High,
            "random" => LoadKind::Random,
            other => return Err(Error::invalid("load", format!("unknown load kind `{other}`"))),
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LoadProfile {
    pub kind: LoadKind,
    /// Q_max in seconds; queue targets are drawn relative to it.
    pub max_queue: f64,
    pub filler_seed: u64,
}

impl LoadProfile {
    /// Target band for the initial per-machine queue estimate.
    fn band(&self) -> (f64, f64) {
        match self.kind {
            LoadKind::Low => (0.0, 0.1 * self.max_queue),
            LoadKind::High => (0.5 * self.max_queue, self.max_queue),
            LoadKind::Random => (0.01 * self.max_queue, self.max_queue),
        }
    }
}

/// One enqueued execution: either a synthetic filler or a scheduled job.
#[derive(Debug, Clone)]
pub struct QueueEntry {
    pub arrival_index: Option<usize>,
    pub features: JobRuntimeFeatures,
    pub predicted_exec: f64,
    pub actual_exec: f64,
    pub submit_time: f64,
    pub compiled: Vec<Rc<(CompiledCircuit, FeatureVector)>>,
    pub candidate: Option<Candidate>,
    pub qos_feasible_existed: Option<bool>,
}

/// Live queue state of one machine.
#[derive(Debug, Clone)]
pub struct MachineState {
    pub machine_index: usize,
    pub running: Option<(QueueEntry, f64)>,
    pub queue: VecDeque<QueueEntry>,
    pub completed: usize,
    pub current_cycle: usize,
    /// The queue-time level this machine's background load is held at.
    pub load_target: f64,
    filler_rng: ChaCha8Rng,
}

impl MachineState {
    fn new(machine_index: usize, load_target: f64, filler_rng: ChaCha8Rng) -> Self {
        MachineState {
            machine_index,
            running: None,
            queue: VecDeque::new(),
            completed: 0,
            current_cycle: 0,
            load_target,
            filler_rng,
        }
    }

    /// Remaining time on the running entry plus the predicted execution
    /// time of everything queued; matches the Q_M estimator given exact
    /// knowledge of the running job's finish time.
    pub fn predicted_wait(&self, now: f64) -> f64 {
        let remaining = self
            .running
            .as_ref()
            .map(|(_, finish)| (finish - now).max(0.0))
            .unwrap_or(0.0);
        remaining + self.queue.iter().map(|e| e.predicted_exec).sum::<f64>()
    }

    fn is_idle(&self) -> bool {
        self.running.is_none() && self.queue.is_empty()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Scenario {
    pub job_count: usize,
    /// Circuits per job; the batch repeats the sampled benchmark.
    pub batch_size: usize,
    pub benchmark_seed: u64,
    pub arrival_seed: u64,
    pub shots: u64,
    pub policies: Vec<PolicyKind>,
    pub load: LoadProfile,
    pub qos: Option<f64>,
    pub cc_aware: bool,
    pub stagger: bool,
    /// Relative half-width of the multiplicative noise between predicted
    /// and actual execution times.
    pub exec_noise: f64,
    pub noise_seed: u64,
    pub utility: UtilityConfig,
    pub runtime_floor: f64,
}

impl Default for Scenario {
    fn default() -> Self {
        Scenario {
            job_count: 100,
            batch_size: 25,
            benchmark_seed: 21,
            arrival_seed: 22,
            shots: 8192,
            policies: vec![PolicyKind::Proposed, PolicyKind::OnlyFid, PolicyKind::OnlyWt],
            load: LoadProfile {
                kind: LoadKind::Low,
                max_queue: 86_400.0,
                filler_seed: 23,
            },
            qos: None,
            cc_aware: false,
            stagger: false,
            exec_noise: 0.05,
            noise_seed: 24,
            utility: UtilityConfig::default(),
            runtime_floor: 1.0,
        }
    }
}

impl Scenario {
    pub fn validate(&self) -> Result<()> {
        if self.policies.is_empty() {
            return Err(Error::invalid("scenario", "at least one policy required"));
        }
        if self.load.max_queue <= 0.0 {
            return Err(Error::invalid("scenario", "max_queue must be positive"));
        }
        if !(0.0..1.0).contains(&self.exec_noise) {
            return Err(Error::invalid("scenario", "exec_noise must be in [0,1)"));
        }
        if self.shots == 0 {
            return Err(Error::invalid("scenario", "shots must be positive"));
        }
        if self.batch_size == 0 {
            return Err(Error::invalid("scenario", "batch_size must be positive"));
        }
        self.utility.validate()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct JobRecord {
    pub job_index: usize,
    pub job_id: String,
    pub policy: String,
    pub benchmark: String,
    pub machine_id: String,
    pub submit_time: f64,
    pub start_time: f64,
    pub wait: f64,
    pub exec: f64,
    pub pos: f64,
    pub crossover: bool,
    pub qos_met: Option<bool>,
    pub qos_feasible: Option<bool>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Aggregates {
    pub jobs: usize,
    pub mean_pos: f64,
    pub mean_wait: f64,
    pub crossover_count: usize,
    pub qos_violations: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TraceMetrics {
    pub policy: String,
    pub records: Vec<JobRecord>,
    pub aggregates: Aggregates,
}

fn aggregate(policy: &str, records: &[JobRecord]) -> Aggregates {
    let n = records.len();
    let mean = |f: fn(&JobRecord) -> f64| {
        if n == 0 {
            0.0
        } else {
            records.iter().map(f).sum::<f64>() / n as f64
        }
    };
    let _ = policy;
    Aggregates {
        jobs: n,
        mean_pos: mean(|r| r.pos),
        mean_wait: mean(|r| r.wait),
        crossover_count: records.iter().filter(|r| r.crossover).count(),
        qos_violations: records.iter().filter(|r| r.qos_met == Some(false)).count(),
    }
}

fn benchmark_stats() -> Vec<CircuitStats> {
    standard_set()
        .into_iter()
        .map(|(b, p)| circuit_stats(&build_benchmark(b, &p).expect("standard set builds")))
        .collect()
}

/// Draws filler jobs into the queue until the estimated queue time
/// reaches the machine's load target, never exceeding the band ceiling.
fn top_up(
    state: &mut MachineState,
    machine: &Machine,
    profile: &LoadProfile,
    bench_stats: &[CircuitStats],
    runtime: &ProductLinearModel,
    runtime_floor: f64,
    exec_noise: f64,
    now: f64,
) -> Result<()> {
    let (_, hi) = profile.band();
    loop {
        let estimate = state.predicted_wait(now);
        if estimate >= state.load_target {
            break;
        }
        let batch = state.filler_rng.random_range(1..=75usize);
        let shots = state.filler_rng.random_range(1024..=8192u64);
        let stats = bench_stats[state.filler_rng.random_range(0..bench_stats.len())];
        let eps = 2.0 * state.filler_rng.random::<f64>() - 1.0;
        let features = JobRuntimeFeatures::new(batch, shots, stats, machine.n_qubits);
        let predicted_exec = crate::predict::predict_exec_time(runtime, &features, runtime_floor)?;
        if estimate + predicted_exec >= hi {
            break;
        }
        state.queue.push_back(QueueEntry {
            arrival_index: None,
            features,
            predicted_exec,
            actual_exec: predicted_exec * (1.0 + exec_noise * eps),
            submit_time: now,
            compiled: Vec::new(),
            candidate: None,
            qos_feasible_existed: None,
        });
    }
    Ok(())
}

/// Pre-fills every machine's queue with synthetic filler jobs until its
/// estimated queue time lands inside the load band; the per-machine
/// target persists and the simulation holds the background load there.
/// Fillers are scheduling ballast only and never produce POS records.
pub fn seed_load(
    fleet: &[Machine],
    profile: &LoadProfile,
    runtime: &ProductLinearModel,
    runtime_floor: f64,
    exec_noise: f64,
) -> Result<Vec<MachineState>> {
    let bench_stats = benchmark_stats();
    let (lo, hi) = profile.band();
    let mut states = Vec::with_capacity(fleet.len());
    for (idx, machine) in fleet.iter().enumerate() {
        let mut rng = ChaCha8Rng::seed_from_u64(profile.filler_seed);
        rng.set_stream(idx as u64 + 1);
        let target = lo + rng.random::<f64>() * (hi - lo);
        let mut state = MachineState::new(idx, target, rng);
        top_up(
            &mut state,
            machine,
            profile,
            &bench_stats,
            runtime,
            runtime_floor,
            exec_noise,
            0.0,
        )?;
        states.push(state);
    }
    Ok(states)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum EventKind {
    Calibration(usize),
    Finish(usize),
    Arrival(usize),
}

impl EventKind {
    fn class(&self) -> u8 {
        match self {
            EventKind::Calibration(_) => 0,
            EventKind::Finish(_) => 1,
            EventKind::Arrival(_) => 2,
        }
    }
}

#[derive(Debug)]
struct QueuedEvent {
    time: f64,
    seq: u64,
    kind: EventKind,
}

impl PartialEq for QueuedEvent {
    fn eq(&self, other: &Self) -> bool {
        self.cmp(other) == Ordering::Equal
    }
}
impl Eq for QueuedEvent {}
impl PartialOrd for QueuedEvent {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}
impl Ord for QueuedEvent {
    // reversed: BinaryHeap is a max-heap, we pop the earliest event
    fn cmp(&self, other: &Self) -> Ordering {
        other
            .time
            .total_cmp(&self.time)
            .then(other.kind.class().cmp(&self.kind.class()))
            .then(other.seq.cmp(&self.seq))
    }
}

struct ArrivalPlan {
    job: Job,
    exec_eps: f64,
}

fn build_arrivals(scenario: &Scenario, period: Timestamp) -> Vec<ArrivalPlan> {
    let set = standard_set();
    let circuits: Vec<Circuit> = set
        .iter()
        .map(|(b, p)| build_benchmark(*b, p).expect("standard set builds"))
        .collect();

    let mut bench_rng = ChaCha8Rng::seed_from_u64(scenario.benchmark_seed);
    let mut arrival_rng = ChaCha8Rng::seed_from_u64(scenario.arrival_seed);
    let mut noise_rng = ChaCha8Rng::seed_from_u64(scenario.noise_seed);

    let mut times: Vec<f64> = (0..scenario.job_count)
        .map(|_| arrival_rng.random::<f64>() * period as f64)
        .collect();
    times.sort_by(f64::total_cmp);

    times
        .into_iter()
        .enumerate()
        .map(|(i, submit_time)| {
            let which = bench_rng.random_range(0..circuits.len());
            let exec_eps = 2.0 * noise_rng.random::<f64>() - 1.0;
            ArrivalPlan {
                job: Job {
                    id: format!("j{i:04}"),
                    circuits: vec![circuits[which].clone(); scenario.batch_size],
                    representative_index: 0,
                    shots: scenario.shots,
                    qos_max_wait: scenario.qos,
                    submit_time,
                },
                exec_eps,
            }
        })
        .collect()
}

fn policy_for(kind: PolicyKind, scenario: &Scenario) -> Policy {
    match kind {
        PolicyKind::Proposed => {
            let mut cfg = scenario.utility;
            cfg.w_cc = if scenario.cc_aware { -1 } else { 0 };
            Policy::proposed(cfg)
        }
        PolicyKind::OnlyFid => Policy::only_fid(),
        PolicyKind::OnlyWt => Policy::only_wt(),
    }
}

/// Runs the scenario once per policy over identical initial state and
/// arrival stream.
pub fn run(
    fleet: &[Machine],
    fidelity: &ProductLinearModel,
    runtime: &ProductLinearModel,
    scenario: &Scenario,
) -> Result<Vec<TraceMetrics>> {
    scenario.validate()?;
    if fleet.is_empty() {
        return Err(Error::invalid("scenario", "fleet is empty"));
    }
    let staggered;
    let fleet: &[Machine] = if scenario.stagger {
        staggered = apply_stagger(fleet)?;
        &staggered
    } else {
        fleet
    };
    let period = fleet[0].calibration_period;
    let arrivals = build_arrivals(scenario, period);
    let initial =
        seed_load(fleet, &scenario.load, runtime, scenario.runtime_floor, scenario.exec_noise)?;
    let models = Models {
        fidelity,
        runtime,
        runtime_floor: scenario.runtime_floor,
    };
    let mut cache = CompileCache::new();
    let bench_stats = benchmark_stats();

    let mut out = Vec::with_capacity(scenario.policies.len());
    for &kind in &scenario.policies {
        let policy = policy_for(kind, scenario);
        let metrics = run_one_policy(
            fleet,
            &models,
            &policy,
            scenario,
            &arrivals,
            &bench_stats,
            initial.clone(),
            &mut cache,
        )?;
        out.push(metrics);
    }
    Ok(out)
}

fn run_one_policy(
    fleet: &[Machine],
    models: &Models<'_>,
    policy: &Policy,
    scenario: &Scenario,
    arrivals: &[ArrivalPlan],
    bench_stats: &[CircuitStats],
    mut states: Vec<MachineState>,
    cache: &mut CompileCache,
) -> Result<TraceMetrics> {
    let mut heap: BinaryHeap<QueuedEvent> = BinaryHeap::new();
    let mut seq = 0u64;
    let push = |heap: &mut BinaryHeap<QueuedEvent>, seq: &mut u64, time: f64, kind: EventKind| {
        heap.push(QueuedEvent { time, seq: *seq, kind });
        *seq += 1;
    };

    for (i, plan) in arrivals.iter().enumerate() {
        push(&mut heap, &mut seq, plan.job.submit_time, EventKind::Arrival(i));
    }
    for (idx, m) in fleet.iter().enumerate() {
        push(
            &mut heap,
            &mut seq,
            m.next_calibration_time(0) as f64,
            EventKind::Calibration(idx),
        );
    }

    // kick off machines whose seeded queue is non-empty
    let mut records: Vec<JobRecord> = Vec::with_capacity(arrivals.len());
    for state in &mut states {
        if state.running.is_none() {
            if let Some(entry) = state.queue.pop_front() {
                start_entry(fleet, state, entry, 0.0, policy, scenario, &mut records)?;
                if let Some((_, finish)) = state.running {
                    push(&mut heap, &mut seq, finish, EventKind::Finish(state.machine_index));
                }
            }
        }
    }

    let mut unfinished = arrivals.len();
    while unfinished > 0 {
        let Some(ev) = heap.pop() else {
            return Err(Error::invalid(
                "simulation",
                "event queue drained with arrivals outstanding",
            ));
        };
        let now = ev.time;
        match ev.kind {
            EventKind::Calibration(idx) => {
                states[idx].current_cycle += 1;
                let next = fleet[idx].next_calibration_time(now as Timestamp) as f64;
                push(&mut heap, &mut seq, next, EventKind::Calibration(idx));
            }
            EventKind::Finish(idx) => {
                let state = &mut states[idx];
                if let Some((entry, _)) = state.running.take() {
                    state.completed += 1;
                    if entry.arrival_index.is_some() {
                        unfinished -= 1;
                    }
                }
                // hold the background load at this machine's target level,
                // then hand the queue head to the freed machine
                top_up(
                    state,
                    &fleet[idx],
                    &scenario.load,
                    bench_stats,
                    models.runtime,
                    models.runtime_floor,
                    scenario.exec_noise,
                    now,
                )?;
                if let Some(next) = state.queue.pop_front() {
                    start_entry(fleet, state, next, now, policy, scenario, &mut records)?;
                    if let Some((_, finish)) = &state.running {
                        push(&mut heap, &mut seq, *finish, EventKind::Finish(idx));
                    }
                }
                debug_assert!(state.running.is_some() || state.queue.is_empty());
            }
            EventKind::Arrival(i) => {
                let plan = &arrivals[i];
                let views: Vec<MachineView> = states
                    .iter()
                    .map(|s| MachineView {
                        machine: &fleet[s.machine_index],
                        predicted_wait: s.predicted_wait(now),
                    })
                    .collect();
                let sel = select_machine(&plan.job, &views, models, policy, now, cache)?;

                let mut compiled = Vec::with_capacity(plan.job.circuits.len());
                for (ci, circuit) in plan.job.circuits.iter().enumerate() {
                    if ci == plan.job.representative_index {
                        compiled.push(Rc::clone(&sel.compiled));
                    } else {
                        compiled.push(cache.compile(
                            circuit,
                            &fleet[sel.machine_index],
                            now.max(0.0) as Timestamp,
                        )?);
                    }
                }
                let rep_cc = &sel.compiled.0;
                let features = JobRuntimeFeatures::new(
                    plan.job.circuits.len(),
                    plan.job.shots,
                    CircuitStats {
                        width: plan.job.representative().width,
                        total_gates: rep_cc.physical_gates.len(),
                        cx_count: rep_cc.cx_count(),
                        depth: rep_cc.depth,
                    },
                    fleet[sel.machine_index].n_qubits,
                );
                let entry = QueueEntry {
                    arrival_index: Some(i),
                    features,
                    predicted_exec: sel.candidate.predicted_exec,
                    actual_exec: sel.candidate.predicted_exec
                        * (1.0 + scenario.exec_noise * plan.exec_eps),
                    submit_time: now,
                    compiled,
                    candidate: Some(sel.candidate.clone()),
                    qos_feasible_existed: sel.qos_feasible_existed,
                };
                let state = &mut states[sel.machine_index];
                if state.is_idle() {
                    start_entry(fleet, state, entry, now, policy, scenario, &mut records)?;
                    if let Some((_, finish)) = state.running {
                        push(&mut heap, &mut seq, finish, EventKind::Finish(sel.machine_index));
                    }
                } else {
                    state.queue.push_back(entry);
                }
            }
        }
    }

    records.sort_by_key(|r| r.job_index);
    let aggregates = aggregate(policy.kind.name(), &records);
    Ok(TraceMetrics {
        policy: policy.kind.name().into(),
        records,
        aggregates,
    })
}

/// Begins executing an entry. POS is scored against the snapshot active
/// now; a compiled cycle older than the active one marks a calibration
/// crossover, and the stale mapping is priced on the new error rates.
fn start_entry(
    fleet: &[Machine],
    state: &mut MachineState,
    entry: QueueEntry,
    now: f64,
    policy: &Policy,
    scenario: &Scenario,
    records: &mut Vec<JobRecord>,
) -> Result<()> {
    if let Some(job_index) = entry.arrival_index {
        let machine = &fleet[state.machine_index];
        let snapshot = machine.snapshot_at_or_last(now.max(0.0) as Timestamp);
        let mut pos_sum = 0.0;
        let mut crossover = false;
        for cc in &entry.compiled {
            pos_sum += analytic_pos(&cc.0, snapshot).pos;
            crossover |= cc.0.cycle_index != snapshot.cycle_index;
        }
        let pos = pos_sum / entry.compiled.len() as f64;
        let wait = now - entry.submit_time;
        records.push(JobRecord {
            job_index,
            job_id: format!("j{job_index:04}"),
            policy: policy.kind.name().into(),
            benchmark: entry.compiled[0].0.name.clone(),
            machine_id: machine.id.clone(),
            submit_time: entry.submit_time,
            start_time: now,
            wait,
            exec: entry.actual_exec,
            pos,
            crossover,
            qos_met: scenario.qos.map(|q| wait <= q),
            qos_feasible: entry.qos_feasible_existed,
        });
    }
    let finish = now + entry.actual_exec;
    state.running = Some((entry, finish));
    Ok(())
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SeriesPoint {
    pub job_index: usize,
    pub pos: f64,
    pub wait: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ComparisonReport {
    pub per_policy: BTreeMap<String, Aggregates>,
    pub ratios: BTreeMap<String, f64>,
    pub series: BTreeMap<String, Vec<SeriesPoint>>,
    #[serde(skip)]
    pub runs: Vec<TraceMetrics>,
}

/// Runs every listed policy and derives the cross-policy ratios the
/// experiment plots are built from.
pub fn compare_policies(
    fleet: &[Machine],
    fidelity: &ProductLinearModel,
    runtime: &ProductLinearModel,
    scenario: &Scenario,
) -> Result<ComparisonReport> {
    if scenario.policies.len() < 2 {
        return Err(Error::invalid("scenario", "compare_policies needs at least two policies"));
    }
    let runs = run(fleet, fidelity, runtime, scenario)?;
    Ok(build_report(runs))
}

pub fn build_report(runs: Vec<TraceMetrics>) -> ComparisonReport {
    let mut per_policy = BTreeMap::new();
    let mut series = BTreeMap::new();
    for r in &runs {
        per_policy.insert(r.policy.clone(), r.aggregates);
        series.insert(
            r.policy.clone(),
            r.records
                .iter()
                .map(|rec| SeriesPoint {
                    job_index: rec.job_index,
                    pos: rec.pos,
                    wait: rec.wait,
                })
                .collect(),
        );
    }
    let mut ratios = BTreeMap::new();
    let get = |name: &str| per_policy.get(name).copied();
    let safe = |x: f64| x.max(1e-9);
    if let (Some(p), Some(f)) = (get("proposed"), get("only_fid")) {
        ratios.insert("fid_proposed_over_only_fid".into(), p.mean_pos / safe(f.mean_pos));
        ratios.insert("wait_only_fid_over_proposed".into(), f.mean_wait / safe(p.mean_wait));
    }
    if let (Some(p), Some(w)) = (get("proposed"), get("only_wt")) {
        ratios.insert("fid_proposed_over_only_wt".into(), p.mean_pos / safe(w.mean_pos));
        ratios.insert("wait_proposed_over_only_wt".into(), p.mean_wait / safe(w.mean_wait));
    }
    ComparisonReport {
        per_policy,
        ratios,
        series,
        runs,
    }
}
