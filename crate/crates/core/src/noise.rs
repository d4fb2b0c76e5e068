//! Ground-truth probability of success for compiled circuits.
//!
//! Every gate and readout is an independent all-or-nothing error source:
//! a trial succeeds iff no source fires. The analytic form is the product
//! of per-source survival probabilities; the sampler draws the same events
//! shot by shot.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::circuits::GateKind;
use crate::fleet::{CalibrationSnapshot, Edge};
use crate::transpiler::CompiledCircuit;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum PosSource {
    Analytic,
    Sampled { shots: u64, seed: u64 },
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PosEstimate {
    pub pos: f64,
    pub source: PosSource,
}

fn error_probs<'a>(
    cc: &'a CompiledCircuit,
    s: &'a CalibrationSnapshot,
) -> impl Iterator<Item = f64> + 'a {
    let gate_errors = cc.physical_gates.iter().filter_map(move |g| match g.kind {
        GateKind::Cx => Some(s.cx_error[&Edge::new(g.operands[0], g.operands[1])]),
        GateKind::SingleQubit => Some(s.single_qubit_error[g.operands[0]]),
        GateKind::Swap | GateKind::Measure => None,
    });
    let readout_errors = cc.measured_physical.iter().map(move |&q| s.readout_error[q]);
    gate_errors.chain(readout_errors)
}

/// Exact POS under the independent-error model.
pub fn analytic_pos(cc: &CompiledCircuit, s: &CalibrationSnapshot) -> PosEstimate {
    let pos = error_probs(cc, s).map(|e| 1.0 - e).product();
    PosEstimate {
        pos,
        source: PosSource::Analytic,
    }
}

/// Monte Carlo POS: each shot draws every error event independently and
/// succeeds iff none fires. Shot `i` uses its own RNG stream derived from
/// `(seed, i)`, so results are reproducible and order-independent.
pub fn sample_pos(
    cc: &CompiledCircuit,
    s: &CalibrationSnapshot,
    shots: u64,
    seed: u64,
) -> PosEstimate {
    assert!(shots >= 1, "shots must be positive");
    let errors: Vec<f64> = error_probs(cc, s).collect();
    let mut clean = 0u64;
    for shot in 0..shots {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        rng.set_stream(shot);
        if errors.iter().all(|&e| rng.random::<f64>() >= e) {
            clean += 1;
        }
    }
    PosEstimate {
        pos: clean as f64 / shots as f64,
        source: PosSource::Sampled { shots, seed },
    }
}
