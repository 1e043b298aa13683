// Copyright 2026 The mfqec Developers
//
// Licensed under the Apache License, Version 2.0 (the "License"); you may not use this file except
// in compliance with the License.You may obtain a copy of the License at
//
//     https://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software distributed under the License
// is distributed on an "AS IS" BASIS, WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express
// or implied. See the License for the specific language governing permissions and limitations under
// the License.

//! Trapped-ion style error model and its compilation onto circuits.
//!
//! Channels (all strengths multiplied by the global knob `lambda`):
//! - after every noisy one-qubit gate: uniform depolarizing, X/Y/Z each
//!   with probability `p1/3`;
//! - after every two-qubit gate: uniform two-qubit depolarizing, each of
//!   the 15 non-identity Pauli pairs with probability `p2/15`;
//! - after `init`: an X flip with probability `p_init`;
//! - immediately before the raw Z readout (i.e. after the terminal
//!   basis-change pulses): an X flip per measured qubit with `p_meas`;
//! - optionally after `reset`: uniform depolarizing with `reset_error`;
//! - while a gate (or explicit `idle`/`reset`) occupies the trap for a
//!   duration `t`, every live spectator qubit dephases: a Z flip with
//!   probability `p_idle(t) = (1 - exp(-t/t2_idle))/2`.
//!
//! Execution is serial — one operation at a time occupies the trap — except
//! the terminal readout rotations, which run as a single parallel slot.
//! Virtual `rz` gates are free: zero duration, zero noise.
//!
//! Idle dephasing supports two samplings with identical single-qubit
//! marginals: `Local` draws independent Z flips per spectator, `Global`
//! draws one shared Gaussian rotation angle per time slot and applies
//! `exp(-i phi/2 Z)` collectively to all spectators, modeling a common-mode
//! field fluctuation. The Gaussian variance `sigma^2 = -2 ln(1 - 2 p_idle)`
//! reproduces the local coherence decay exactly, at every `lambda`.

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::circuit::{Circuit, MeasBasis, Op};
use crate::error::{Error, Result};
use crate::pauli::Pauli;
use crate::statevec::StateVec;

/// How spectator dephasing is sampled.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DephasingMode {
    /// Independent Bernoulli Z flips per spectator qubit.
    Local,
    /// One shared Gaussian Z rotation per time slot (collective).
    Global,
}

/// Full parameter set of the error model.
#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(default)]
pub struct NoiseParams {
    /// Depolarizing probability after a one-qubit gate.
    pub p1: f64,
    /// Depolarizing probability after a two-qubit gate.
    pub p2: f64,
    /// X-flip probability after state preparation.
    pub p_init: f64,
    /// X-flip probability before raw readout.
    pub p_meas: f64,
    /// Depolarizing probability after a mid-circuit reset (0 = ideal reset).
    pub reset_error: f64,
    /// Duration of a one-qubit gate, seconds.
    pub t_1q: f64,
    /// Duration of a two-qubit gate, seconds.
    pub t_2q: f64,
    /// Duration of a mid-circuit reset, seconds.
    pub t_reset: f64,
    /// Idle coherence time T2, seconds.
    pub t2_idle: f64,
    /// Global strength multiplier applied to every probability above.
    pub lambda: f64,
    /// Spectator dephasing sampling mode.
    pub dephasing: DephasingMode,
}

impl Default for NoiseParams {
    fn default() -> Self {
        NoiseParams {
            p1: 0.0036,
            p2: 0.025,
            p_init: 0.003,
            p_meas: 0.003,
            reset_error: 0.0,
            t_1q: 70e-6,
            t_2q: 350e-6,
            t_reset: 1.7e-3,
            t2_idle: 50e-3,
            lambda: 1.0,
            dephasing: DephasingMode::Local,
        }
    }
}

impl NoiseParams {
    /// The noiseless limit (lambda = 0).
    pub fn ideal() -> Self {
        NoiseParams { lambda: 0.0, ..Default::default() }
    }

    pub fn with_lambda(mut self, lambda: f64) -> Self {
        self.lambda = lambda;
        self
    }

    pub fn with_dephasing(mut self, mode: DephasingMode) -> Self {
        self.dephasing = mode;
        self
    }

    /// Z-flip probability accumulated by an idle qubit over `duration`
    /// seconds (before lambda scaling).
    pub fn p_idle(&self, duration: f64) -> f64 {
        0.5 * (1.0 - (-duration / self.t2_idle).exp())
    }

    /// Variance of the collective Gaussian angle for one slot of `duration`
    /// seconds, chosen so that the per-qubit coherence decay matches the
    /// local model at the current lambda:
    /// `E[cos phi] = 1 - 2 lambda p_idle(duration)`.
    pub fn global_sigma_sqr(&self, duration: f64) -> Result<f64> {
        let arg = 1.0 - 2.0 * self.lambda * self.p_idle(duration);
        if arg <= 0.0 {
            return Err(Error::validation(format!(
                "collective dephasing undefined: lambda {} times idle flip probability reaches 1/2 for slot duration {duration}",
                self.lambda
            )));
        }
        Ok(-2.0 * arg.ln())
    }

    /// Durations and basic sanity. Per-site probability checks happen during
    /// compilation, where slot durations are known.
    pub fn validate(&self) -> Result<()> {
        let nonneg = [
            ("p1", self.p1),
            ("p2", self.p2),
            ("p_init", self.p_init),
            ("p_meas", self.p_meas),
            ("reset_error", self.reset_error),
            ("t_1q", self.t_1q),
            ("t_2q", self.t_2q),
            ("t_reset", self.t_reset),
            ("lambda", self.lambda),
        ];
        for (name, v) in nonneg {
            if !v.is_finite() || v < 0.0 {
                return Err(Error::validation(format!(
                    "{name} must be finite and >= 0, got {v}"
                )));
            }
        }
        if !(self.t2_idle > 0.0) {
            return Err(Error::validation(format!(
                "t2_idle must be > 0, got {}",
                self.t2_idle
            )));
        }
        for (name, p) in [
            ("p1", self.p1),
            ("p2", self.p2),
            ("p_init", self.p_init),
            ("p_meas", self.p_meas),
            ("reset_error", self.reset_error),
        ] {
            let scaled = self.lambda * p;
            if scaled > 1.0 {
                return Err(Error::validation(format!(
                    "lambda * {name} = {scaled} exceeds 1"
                )));
            }
        }
        Ok(())
    }
}

/// Where and what kind of fault can strike.
#[derive(Clone, Debug, PartialEq)]
pub enum FaultKind {
    /// Uniform X/Y/Z after a one-qubit gate (3 members).
    Depol1 { q: usize },
    /// Uniform non-identity Pauli pair after a two-qubit gate (15 members).
    Depol2 { a: usize, b: usize },
    /// X flip right after `init` (1 member).
    InitFlip { q: usize },
    /// X flip right before raw readout (1 member).
    MeasFlip { q: usize },
    /// Z flip on one spectator during a timed slot (1 member).
    IdleZ { q: usize, duration: f64 },
    /// Uniform X/Y/Z after a reset (3 members).
    ResetDepol { q: usize },
}

impl FaultKind {
    /// Number of equiprobable Pauli members of this channel.
    pub fn member_count(&self) -> usize {
        match self {
            FaultKind::Depol1 { .. } | FaultKind::ResetDepol { .. } => 3,
            FaultKind::Depol2 { .. } => 15,
            FaultKind::InitFlip { .. } | FaultKind::MeasFlip { .. } | FaultKind::IdleZ { .. } => 1,
        }
    }

    /// The Pauli letters applied by member `choice`, as (qubit, letter) pairs.
    pub fn member_ops(&self, choice: usize) -> Vec<(usize, Pauli)> {
        let single = [Pauli::X, Pauli::Y, Pauli::Z];
        match self {
            FaultKind::Depol1 { q } | FaultKind::ResetDepol { q } => {
                vec![(*q, single[choice])]
            }
            FaultKind::Depol2 { a, b } => {
                // choice indexes the 15 pairs (pa, pb) != (I, I) in row-major
                // order over {I,X,Y,Z} x {I,X,Y,Z} skipping the first.
                let idx = choice + 1;
                let table = [None, Some(Pauli::X), Some(Pauli::Y), Some(Pauli::Z)];
                let pa = table[idx / 4];
                let pb = table[idx % 4];
                let mut ops = Vec::with_capacity(2);
                if let Some(p) = pa {
                    ops.push((*a, p));
                }
                if let Some(p) = pb {
                    ops.push((*b, p));
                }
                ops
            }
            FaultKind::InitFlip { q } | FaultKind::MeasFlip { q } => vec![(*q, Pauli::X)],
            FaultKind::IdleZ { q, .. } => vec![(*q, Pauli::Z)],
        }
    }

    /// Apply member `choice` directly to a state.
    pub fn apply_member(&self, sv: &mut StateVec, choice: usize) -> Result<()> {
        for (q, p) in self.member_ops(choice) {
            match p {
                Pauli::X => sv.x(q)?,
                Pauli::Y => sv.y(q)?,
                Pauli::Z => sv.z(q)?,
                Pauli::I => {}
            }
        }
        Ok(())
    }
}

/// One potential fault location: strikes right after `op_index` executes
/// (for `MeasFlip`: after the readout rotations, before the raw readout).
#[derive(Clone, Debug, PartialEq)]
pub struct FaultSite {
    pub op_index: usize,
    pub kind: FaultKind,
    /// Probability that this site fires (lambda already folded in).
    pub prob: f64,
}

/// One timed occupancy of the trap: used for collective dephasing and for
/// total-duration accounting.
#[derive(Clone, Debug, PartialEq)]
pub struct Slot {
    pub op_index: usize,
    pub duration: f64,
    /// Live qubits not driven during this slot.
    pub spectator_mask: u64,
}

/// A circuit fused with noise parameters: every stochastic event the model
/// can produce is listed exactly once.
#[derive(Clone, Debug)]
pub struct CompiledCircuit {
    pub circuit: Circuit,
    pub params: NoiseParams,
    pub sites: Vec<FaultSite>,
    /// site indices grouped by op: `sites_by_op[k]` are applied after op k.
    pub sites_by_op: Vec<Vec<usize>>,
    pub slots: Vec<Slot>,
    /// Qubits rotated during the terminal readout slot (X or Y basis).
    pub readout_rotated_mask: u64,
    pub total_duration: f64,
}

/// Fuse a validated circuit with noise parameters.
///
/// Fails if the circuit contains a raw `ccz` (the model has no three-qubit
/// channel; decompose it first) unless the noise is exactly ideal
/// (lambda = 0), or if any scaled probability leaves [0, 1].
pub fn compile(circuit: &Circuit, params: &NoiseParams) -> Result<CompiledCircuit> {
    circuit.validate()?;
    params.validate()?;
    let noisy = params.lambda > 0.0;
    let live = circuit.live_masks();
    let mut sites: Vec<FaultSite> = Vec::new();
    let mut sites_by_op: Vec<Vec<usize>> = vec![Vec::new(); circuit.ops.len()];
    let mut slots: Vec<Slot> = Vec::new();
    let mut total_duration = 0.0;

    let push_site = |sites: &mut Vec<FaultSite>,
                         sites_by_op: &mut Vec<Vec<usize>>,
                         op_index: usize,
                         kind: FaultKind,
                         prob: f64|
     -> Result<()> {
        if !(0.0..=1.0).contains(&prob) {
            return Err(Error::validation(format!(
                "site probability {prob} outside [0, 1] at op {op_index}"
            )));
        }
        if prob > 0.0 {
            sites_by_op[op_index].push(sites.len());
            sites.push(FaultSite { op_index, kind, prob });
        }
        Ok(())
    };

    for (k, op) in circuit.ops.iter().enumerate() {
        let actors = op.actors();
        let mut actor_mask = 0u64;
        for &q in &actors {
            actor_mask |= 1 << q;
        }
        // Idle spectators of this op, if it has a duration.
        let mut slot_duration = 0.0;
        match op {
            Op::Init(q) => {
                push_site(
                    &mut sites,
                    &mut sites_by_op,
                    k,
                    FaultKind::InitFlip { q: *q },
                    params.lambda * params.p_init,
                )?;
            }
            Op::Reset(q) => {
                slot_duration = params.t_reset;
                if params.reset_error > 0.0 {
                    push_site(
                        &mut sites,
                        &mut sites_by_op,
                        k,
                        FaultKind::ResetDepol { q: *q },
                        params.lambda * params.reset_error,
                    )?;
                }
            }
            Op::Idle(d) => {
                slot_duration = *d;
            }
            Op::Rz { .. } | Op::FaultMarker(_) => {}
            Op::Ccz(..) => {
                if noisy {
                    return Err(Error::validation(
                        "ccz has no hardware noise channel; decompose it into \
                         two-qubit gates plus virtual rotations before noisy execution"
                            .to_string(),
                    ));
                }
            }
            Op::Measure(bases) => {
                // One parallel slot of basis-change pulses, then readout flips.
                let mut rotated = 0u64;
                for (q, b) in bases.iter().enumerate() {
                    if matches!(b, Some(MeasBasis::X) | Some(MeasBasis::Y)) {
                        rotated |= 1 << q;
                    }
                }
                if rotated != 0 {
                    slot_duration = params.t_1q;
                    for q in 0..circuit.num_qubits {
                        if rotated >> q & 1 == 1 {
                            push_site(
                                &mut sites,
                                &mut sites_by_op,
                                k,
                                FaultKind::Depol1 { q },
                                params.lambda * params.p1,
                            )?;
                        }
                    }
                }
                // Spectator dephasing during the rotation slot is added below
                // (actor_mask = rotated for this op).
                actor_mask = rotated;
                // Readout flips come after the idle sites; they are appended
                // further down so that site order matches application order.
            }
            _ if op.is_noisy_1q_gate() => {
                slot_duration = params.t_1q;
                push_site(
                    &mut sites,
                    &mut sites_by_op,
                    k,
                    FaultKind::Depol1 { q: actors[0] },
                    params.lambda * params.p1,
                )?;
            }
            _ if op.is_noisy_2q_gate() => {
                slot_duration = params.t_2q;
                push_site(
                    &mut sites,
                    &mut sites_by_op,
                    k,
                    FaultKind::Depol2 { a: actors[0], b: actors[1] },
                    params.lambda * params.p2,
                )?;
            }
            _ => {}
        }

        if slot_duration > 0.0 {
            let spectator_mask = live[k] & !actor_mask;
            total_duration += slot_duration;
            match params.dephasing {
                DephasingMode::Local => {
                    let p = params.lambda * params.p_idle(slot_duration);
                    for q in 0..circuit.num_qubits {
                        if spectator_mask >> q & 1 == 1 {
                            push_site(
                                &mut sites,
                                &mut sites_by_op,
                                k,
                                FaultKind::IdleZ { q, duration: slot_duration },
                                p,
                            )?;
                        }
                    }
                }
                DephasingMode::Global => {
                    // Validate the variance exists for this slot.
                    if noisy {
                        params.global_sigma_sqr(slot_duration)?;
                    }
                }
            }
            slots.push(Slot { op_index: k, duration: slot_duration, spectator_mask });
        }

        // Readout bit flips, placed after the rotation-slot sites.
        if let Op::Measure(bases) = op {
            for (q, b) in bases.iter().enumerate() {
                if b.is_some() {
                    push_site(
                        &mut sites,
                        &mut sites_by_op,
                        k,
                        FaultKind::MeasFlip { q },
                        params.lambda * params.p_meas,
                    )?;
                }
            }
        }
    }

    let readout_rotated_mask = match circuit.terminal_measure() {
        Some(bases) => {
            let mut rotated = 0u64;
            for (q, b) in bases.iter().enumerate() {
                if matches!(b, Some(MeasBasis::X) | Some(MeasBasis::Y)) {
                    rotated |= 1 << q;
                }
            }
            rotated
        }
        None => 0,
    };

    Ok(CompiledCircuit {
        circuit: circuit.clone(),
        params: params.clone(),
        sites,
        sites_by_op,
        slots,
        readout_rotated_mask,
        total_duration,
    })
}

/// A concrete sampled fault: site index plus which Pauli member fired.
pub type SampledEvent = (u32, u8);

/// Draw the fault plan for one trajectory. Iterates sites in enumeration
/// order so the event support is exactly the site list.
pub fn sample_events<R: Rng + ?Sized>(
    compiled: &CompiledCircuit,
    rng: &mut R,
) -> Vec<SampledEvent> {
    let mut events = Vec::new();
    for (i, site) in compiled.sites.iter().enumerate() {
        if rng.gen::<f64>() < site.prob {
            let members = site.kind.member_count();
            let choice = if members == 1 {
                0
            } else {
                rng.gen_range(0..members)
            };
            events.push((i as u32, choice as u8));
        }
    }
    events
}
