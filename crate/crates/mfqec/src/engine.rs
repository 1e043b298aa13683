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

//! Reproducible many-shot trajectory execution.
//!
//! Every shot owns an RNG seeded as `base_seed + shot_index`, so results are
//! a pure function of `(circuit, params, base_seed, shot_index)` — identical
//! for any worker count and any execution order. Shots are merged by index.
//!
//! Fast path: under local dephasing the noise only ever inserts Paulis into
//! a fixed circuit, so a trajectory's terminal state is `F |psi>` with
//! `|psi>` the noiseless state (cached once, together with its readout
//! distribution) and `F` the inserted Paulis conjugated forward — a branched
//! Pauli frame that stays tiny for almost every shot. The readout is then
//! drawn by rejection against the cached noiseless distribution instead of
//! walking `2^n` amplitudes through every gate. Trajectories the frame
//! cannot express (a divergent reset, a branch explosion) fall back to the
//! exact state-vector walk, as does everything when dephasing is collective
//! or a reset outcome is random.

use std::collections::HashMap;

use num_complex::Complex64;
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use rayon::prelude::*;

use crate::circuit::{Circuit, MeasBasis, Op};
use crate::error::{Error, Result};
use crate::frame::{Bail, PauliFrame};
use crate::noise::{compile, sample_events, CompiledCircuit, DephasingMode, NoiseParams, SampledEvent};
use crate::pauli::Pauli;
use crate::statevec::StateVec;

/// Apply the terminal basis-change pulses for a measure op.
fn apply_readout_rotations(sv: &mut StateVec, bases: &[Option<MeasBasis>]) -> Result<()> {
    for (q, b) in bases.iter().enumerate() {
        match b {
            Some(MeasBasis::X) => sv.h(q)?,
            Some(MeasBasis::Y) => {
                // Rotate the Y eigenbasis onto Z: H * rz(-pi/2) sends
                // |+i> -> |0>, |-i> -> |1>.
                sv.rz(q, -std::f64::consts::FRAC_PI_2)?;
                sv.h(q)?;
            }
            Some(MeasBasis::Z) | None => {}
        }
    }
    Ok(())
}

/// One coherent branch of an exact circuit walk. Resets of undetermined
/// qubits split the walk into weighted branches instead of sampling, so the
/// walk returns the full outcome mixture rather than one trajectory.
#[derive(Clone)]
struct Branch {
    sv: StateVec,
    weight: f64,
}

/// Branches (and reset splits) below this weight are dropped.
const BRANCH_FLOOR: f64 = 1e-12;

/// Advance every branch through one operation, splitting on resets.
fn advance_branches(branches: &mut Vec<Branch>, op: &Op) -> Result<()> {
    if let Op::Reset(q) = op {
        let mut split: Vec<Branch> = Vec::with_capacity(branches.len());
        for b in branches.drain(..) {
            let p1 = b.sv.prob_one(*q)?;
            if p1 < BRANCH_FLOOR {
                let mut sv = b.sv;
                sv.project_qubit(*q, false)?;
                split.push(Branch { sv, weight: b.weight });
            } else if p1 > 1.0 - BRANCH_FLOOR {
                let mut sv = b.sv;
                sv.project_qubit(*q, true)?;
                sv.x(*q)?;
                split.push(Branch { sv, weight: b.weight });
            } else {
                let mut zero = b.sv.clone();
                zero.project_qubit(*q, false)?;
                if b.weight * (1.0 - p1) > BRANCH_FLOOR {
                    split.push(Branch { sv: zero, weight: b.weight * (1.0 - p1) });
                }
                let mut one = b.sv;
                one.project_qubit(*q, true)?;
                one.x(*q)?;
                if b.weight * p1 > BRANCH_FLOOR {
                    split.push(Branch { sv: one, weight: b.weight * p1 });
                }
            }
        }
        *branches = split;
        return Ok(());
    }
    for b in branches.iter_mut() {
        if !op.apply_to_state(&mut b.sv)? {
            match op {
                Op::Init(_) | Op::Idle(_) | Op::FaultMarker(_) => {}
                Op::Measure(bases) => apply_readout_rotations(&mut b.sv, bases)?,
                _ => unreachable!("apply_to_state covers all gates, reset handled above"),
            }
        }
    }
    Ok(())
}

/// Mix the branch Born distributions and marginalize onto `mask`, returning
/// sorted (bits, probability) pairs for the outcomes with nonzero weight.
fn branch_readout(branches: &[Branch], num_qubits: usize, mask: u64) -> Vec<(u64, f64)> {
    let mut acc = vec![0.0f64; 1usize << num_qubits];
    for b in branches {
        for (idx, a) in b.sv.amplitudes().iter().enumerate() {
            let p = a.norm_sqr();
            if p > 0.0 {
                acc[idx & mask as usize] += b.weight * p;
            }
        }
    }
    acc.into_iter()
        .enumerate()
        .filter(|(_, p)| *p > 0.0)
        .map(|(bits, p)| (bits as u64, p))
        .collect()
}

/// Index of the first operation after `k` that can interact with any qubit
/// carrying a letter of `member` (`ops.len()` when none does). A Pauli
/// injected after op `k` commutes exactly with every operation on disjoint
/// qubits, so two members with the same letters whose interaction points
/// coincide produce identical walks. `measure` counts as interacting with
/// everything (readout probes every qubit).
fn next_interaction(ops: &[Op], k: usize, member: &[(usize, Pauli)]) -> usize {
    for (j, op) in ops.iter().enumerate().skip(k + 1) {
        if matches!(op, Op::Measure(_)) {
            return j;
        }
        let actors = op.actors();
        if member.iter().any(|(q, _)| actors.contains(q)) {
            return j;
        }
    }
    ops.len()
}

/// What [`Runner::for_each_single_fault`] reports for one channel member.
#[derive(Debug)]
pub enum SingleFaultOutcome<'a> {
    /// The member's exact terminal readout distribution, freshly evaluated.
    Evaluated(&'a [(u64, f64)]),
    /// Exactly the distribution of an earlier member: both Paulis commute
    /// forward to the same interaction point with the same letters, so the
    /// two walks coincide.
    SameAs { site: usize, choice: usize },
}

/// Noiseless terminal data backing the Pauli-frame fast path: the exact
/// post-rotation state, its cumulative readout distribution, and the
/// deterministic pre-reset bit of every mid-circuit reset.
struct NoiselessTerminal {
    amps: Vec<Complex64>,
    cdf: Vec<f64>,
    /// Indexed by op: `Some(bit)` for each `reset` op.
    reset_bits: Vec<Option<bool>>,
}

/// Above this register size the cached amplitude table outgrows its value.
const TERMINAL_CACHE_MAX_QUBITS: usize = 20;

/// Rejection draws before a frame shot falls back to the state-vector walk.
/// The expected number of draws is bounded by the branch count (at most
/// 512), so overrunning eight times that is vanishingly rare; giving up
/// earlier keeps the pathological tail cheaper than the fallback it buys.
/// Abandoned attempts carry no conditioning: the fallback redraws the
/// readout from the full exact distribution, so exactness is preserved.
const MAX_SAMPLE_DRAWS: usize = 4096;

/// A compiled circuit ready for repeated execution.
pub struct Runner {
    compiled: CompiledCircuit,
    measured_mask: u64,
    /// Present when the noiseless run is deterministic (no coin-flip
    /// resets), dephasing is local, and the register is small enough.
    terminal: Option<NoiselessTerminal>,
    use_fast_path: bool,
}

impl Runner {
    pub fn new(circuit: &Circuit, params: &NoiseParams) -> Result<Self> {
        let compiled = compile(circuit, params)?;
        if compiled.circuit.terminal_measure().is_none() {
            return Err(Error::validation(
                "runner requires a circuit with a terminal measure",
            ));
        }
        let mut measured_mask = 0u64;
        for (q, _) in compiled.circuit.measured_qubits() {
            measured_mask |= 1 << q;
        }
        let mut runner = Runner {
            compiled,
            measured_mask,
            terminal: None,
            use_fast_path: true,
        };
        if runner.compiled.params.dephasing == DephasingMode::Local
            && runner.compiled.circuit.num_qubits <= TERMINAL_CACHE_MAX_QUBITS
        {
            runner.terminal = runner.noiseless_terminal()?;
        }
        Ok(runner)
    }

    /// Disable the zero-event shortcut (used by tests to cross-check it).
    pub fn without_fast_path(mut self) -> Self {
        self.use_fast_path = false;
        self
    }

    pub fn compiled(&self) -> &CompiledCircuit {
        &self.compiled
    }

    pub fn measured_mask(&self) -> u64 {
        self.measured_mask
    }

    /// Exact terminal state of the noiseless circuit plus the classical bit
    /// each reset consumed, provided every reset outcome is deterministic;
    /// `None` otherwise.
    fn noiseless_terminal(&self) -> Result<Option<NoiselessTerminal>> {
        let circuit = &self.compiled.circuit;
        let mut sv = StateVec::new(circuit.num_qubits)?;
        let mut reset_bits = vec![None; circuit.ops.len()];
        for (k, op) in circuit.ops.iter().enumerate() {
            if op.apply_to_state(&mut sv)? {
                continue;
            }
            match op {
                Op::Init(_) | Op::Idle(_) | Op::FaultMarker(_) => {}
                Op::Reset(q) => {
                    let p1 = sv.prob_one(*q)?;
                    if p1 < 1e-9 {
                        sv.project_qubit(*q, false)?;
                        reset_bits[k] = Some(false);
                    } else if p1 > 1.0 - 1e-9 {
                        sv.project_qubit(*q, true)?;
                        sv.x(*q)?;
                        reset_bits[k] = Some(true);
                    } else {
                        return Ok(None);
                    }
                }
                Op::Measure(bases) => {
                    apply_readout_rotations(&mut sv, bases)?;
                }
                _ => unreachable!("apply_to_state covers all gates"),
            }
        }
        let mut acc = 0.0;
        let cdf = sv
            .amplitudes()
            .iter()
            .map(|a| {
                acc += a.norm_sqr();
                acc
            })
            .collect();
        Ok(Some(NoiselessTerminal {
            amps: sv.amplitudes().to_vec(),
            cdf,
            reset_bits,
        }))
    }

    /// The exact noiseless readout distribution marginalized onto measured
    /// qubits, as sorted (bits, probability) pairs — the oracle for shot
    /// statistics. Undetermined resets split the walk into weighted branches,
    /// so circuits with mid-circuit coin-flip resets are covered too.
    pub fn ideal_readout_distribution(&self) -> Result<Vec<(u64, f64)>> {
        let circuit = &self.compiled.circuit;
        let mut branches =
            vec![Branch { sv: StateVec::new(circuit.num_qubits)?, weight: 1.0 }];
        for op in &circuit.ops {
            advance_branches(&mut branches, op)?;
        }
        Ok(branch_readout(&branches, circuit.num_qubits, self.measured_mask))
    }

    /// Exact readout distribution when exactly one fault fires: Pauli member
    /// `choice` of `sites[site]` strikes right after its operation (for
    /// readout channels: after the terminal basis-change pulses), and the
    /// rest of the circuit runs noiselessly.
    pub fn faulted_readout_distribution(
        &self,
        site: usize,
        choice: usize,
    ) -> Result<Vec<(u64, f64)>> {
        let sites = &self.compiled.sites;
        let s = sites.get(site).ok_or_else(|| {
            Error::validation(format!(
                "fault site {site} out of range ({} sites)",
                sites.len()
            ))
        })?;
        if choice >= s.kind.member_count() {
            return Err(Error::validation(format!(
                "member {choice} out of range for {:?}",
                s.kind
            )));
        }
        let circuit = &self.compiled.circuit;
        let mut branches =
            vec![Branch { sv: StateVec::new(circuit.num_qubits)?, weight: 1.0 }];
        for (k, op) in circuit.ops.iter().enumerate() {
            advance_branches(&mut branches, op)?;
            if k == s.op_index {
                for b in branches.iter_mut() {
                    s.kind.apply_member(&mut b.sv, choice)?;
                }
            }
        }
        Ok(branch_readout(&branches, circuit.num_qubits, self.measured_mask))
    }

    /// Visit every Pauli member of every compiled fault site, in site order,
    /// with its exact terminal readout distribution. The fault-free prefix of
    /// the walk is shared across sites, and members that provably repeat an
    /// earlier trajectory are reported as [`SingleFaultOutcome::SameAs`]
    /// instead of being re-simulated (idle dephasing in particular duplicates
    /// the Z members of nearby gate channels).
    pub fn for_each_single_fault<F>(&self, mut visit: F) -> Result<()>
    where
        F: FnMut(usize, usize, SingleFaultOutcome<'_>) -> Result<()>,
    {
        let compiled = &self.compiled;
        let ops = &compiled.circuit.ops;
        let n = compiled.circuit.num_qubits;
        let mut seen: HashMap<(usize, Vec<(usize, Pauli)>), (usize, usize)> = HashMap::new();
        let mut branches = vec![Branch { sv: StateVec::new(n)?, weight: 1.0 }];
        for (k, op) in ops.iter().enumerate() {
            advance_branches(&mut branches, op)?;
            for &site_idx in &compiled.sites_by_op[k] {
                let kind = &compiled.sites[site_idx].kind;
                for choice in 0..kind.member_count() {
                    let mut member = kind.member_ops(choice);
                    member.sort_unstable_by_key(|(q, _)| *q);
                    let key = (next_interaction(ops, k, &member), member);
                    if let Some(&(s0, c0)) = seen.get(&key) {
                        visit(
                            site_idx,
                            choice,
                            SingleFaultOutcome::SameAs { site: s0, choice: c0 },
                        )?;
                        continue;
                    }
                    seen.insert(key, (site_idx, choice));
                    let mut forked = branches.clone();
                    for b in forked.iter_mut() {
                        kind.apply_member(&mut b.sv, choice)?;
                    }
                    for later in &ops[k + 1..] {
                        advance_branches(&mut forked, later)?;
                    }
                    let dist = branch_readout(&forked, n, self.measured_mask);
                    visit(site_idx, choice, SingleFaultOutcome::Evaluated(&dist))?;
                }
            }
        }
        Ok(())
    }

    /// Run one trajectory with the given per-shot RNG, reusing `scratch`.
    /// Returns the raw readout bits of the measured qubits (bit q = qubit q).
    pub fn run_shot_with_rng<R: Rng + ?Sized>(
        &self,
        rng: &mut R,
        scratch: &mut StateVec,
    ) -> Result<u64> {
        let compiled = &self.compiled;
        let events = sample_events(compiled, rng);

        if self.use_fast_path {
            if let Some(term) = &self.terminal {
                match self.frame_shot(term, &events, rng) {
                    Ok(bits) => return Ok(bits),
                    // Fall back to the exact walk; bailing costs time only.
                    Err(_) => {}
                }
            }
        }

        let circuit = &compiled.circuit;
        scratch.reset_all_zero();
        let mut next_event = 0usize;
        let mut slot_cursor = 0usize;
        let global = compiled.params.dephasing == DephasingMode::Global
            && compiled.params.lambda > 0.0;

        for (k, op) in circuit.ops.iter().enumerate() {
            if !op.apply_to_state(scratch)? {
                match op {
                    Op::Init(_) | Op::Idle(_) | Op::FaultMarker(_) => {}
                    Op::Reset(q) => {
                        scratch.reset_qubit(*q, rng)?;
                    }
                    Op::Measure(bases) => {
                        apply_readout_rotations(scratch, bases)?;
                    }
                    _ => unreachable!(),
                }
            }
            // Faults attached to this op, in enumeration order.
            while next_event < events.len() {
                let (site_idx, choice) = events[next_event];
                let site = &compiled.sites[site_idx as usize];
                if site.op_index != k {
                    break;
                }
                site.kind.apply_member(scratch, choice as usize)?;
                next_event += 1;
            }
            // Collective dephasing for the slot occupied by this op.
            if global {
                while slot_cursor < compiled.slots.len()
                    && compiled.slots[slot_cursor].op_index == k
                {
                    let slot = &compiled.slots[slot_cursor];
                    if slot.spectator_mask != 0 {
                        let sigma = compiled.params.global_sigma_sqr(slot.duration)?.sqrt();
                        let normal = Normal::new(0.0, sigma)
                            .map_err(|e| Error::validation(format!("bad gaussian: {e}")))?;
                        let phi = normal.sample(rng);
                        scratch.collective_z_phase(slot.spectator_mask, phi)?;
                    }
                    slot_cursor += 1;
                }
            }
        }
        let idx = scratch.sample_index(rng);
        Ok(idx as u64 & self.measured_mask)
    }

    /// Push the trajectory's Pauli insertions through the circuit as a
    /// branched frame, ending in terminal (post-rotation) form.
    fn frame_walk(
        &self,
        term: &NoiselessTerminal,
        events: &[SampledEvent],
    ) -> std::result::Result<PauliFrame, Bail> {
        let compiled = &self.compiled;
        let mut frame = PauliFrame::identity();
        let mut next = 0usize;
        // Divergent resets claim virtual wires above the register, lazily.
        let mut next_env = compiled.circuit.num_qubits;
        for (k, op) in compiled.circuit.ops.iter().enumerate() {
            match op {
                Op::Reset(q) => {
                    let bit = term.reset_bits[k].expect("cache implies deterministic resets");
                    if frame.apply_reset(*q, bit, next_env)? {
                        next_env += 1;
                    }
                }
                Op::Measure(bases) => frame.apply_readout_rotations(bases)?,
                other => {
                    frame.apply_op(other)?;
                }
            }
            while next < events.len() {
                let (site_idx, choice) = events[next];
                let site = &compiled.sites[site_idx as usize];
                if site.op_index != k {
                    break;
                }
                frame.insert(&site.kind.member_ops(choice as usize));
                next += 1;
            }
        }
        Ok(frame)
    }

    /// Execute one trajectory entirely in the Pauli frame: walk the events
    /// forward, then draw the readout by rejection against the cached
    /// noiseless distribution. The terminal probability of outcome `x`,
    /// marginalized over the environment outcomes `E` of divergent resets
    /// (branches grouped into classes by their environment X mask), is
    ///
    /// ```text
    ///     p(x) = sum_E | sum_{b in E} c_b s_env(b)
    ///                    (-1)^{z_b . (x xor m_b)} psi(x xor m_b) |^2
    /// ```
    ///
    /// with `s_env(b) = (-1)^{z_env(b) . E}`, proposed from
    /// `q(y) = |psi(y)|^2` shifted by a branch mask picked with probability
    /// |c_b| / T, and accepted with ratio p / (T^2 g) — exact because
    /// `p(x) <= T^2 g(x)` by Cauchy-Schwarz within each class, with `g` the
    /// proposal mixture and `T = sum_b |c_b|`.
    fn frame_shot<R: Rng + ?Sized>(
        &self,
        term: &NoiselessTerminal,
        events: &[SampledEvent],
        rng: &mut R,
    ) -> std::result::Result<u64, Bail> {
        let frame = self.frame_walk(term, events)?;
        let cdf_total = term.cdf.last().copied().unwrap_or(1.0);
        let draw_noiseless = |rng: &mut R| -> u64 {
            let u: f64 = rng.gen::<f64>() * cdf_total;
            term.cdf.partition_point(|&c| c <= u) as u64
        };

        if frame.is_identity() {
            return Ok(draw_noiseless(rng) & self.measured_mask);
        }
        let sys_mask = (1u64 << self.compiled.circuit.num_qubits) - 1;
        let branches = frame.branches();
        if branches.len() == 1 {
            // A single Pauli term relabels outcomes and leaves probabilities
            // intact: shift the noiseless draw by the X mask.
            return Ok((draw_noiseless(rng) ^ (branches[0].xs & sys_mask)) & self.measured_mask);
        }

        let t_sum = frame.magnitude_sum();
        let mut cum = Vec::with_capacity(branches.len());
        let mut acc = 0.0;
        for b in branches {
            acc += b.coeff.norm();
            cum.push(acc);
        }
        // Coherent sums per environment class, reused across draws.
        let mut sums: Vec<(u64, Complex64)> = Vec::new();
        for _ in 0..MAX_SAMPLE_DRAWS {
            let r = rng.gen::<f64>() * t_sum;
            let bi = cum.partition_point(|&c| c <= r).min(branches.len() - 1);
            let x = draw_noiseless(rng) ^ (branches[bi].xs & sys_mask);
            // Class amplitude sums for p(x) and proposal mixture T * g(x).
            sums.clear();
            let mut tg = 0.0;
            for b in branches {
                let y = x ^ (b.xs & sys_mask);
                let amp = term.amps[y as usize];
                let q = amp.norm_sqr();
                if q == 0.0 {
                    continue;
                }
                let epat = b.xs & !sys_mask;
                let env_out = epat ^ frame.env_bits();
                let flip = ((b.zs & y).count_ones() + (b.zs & !sys_mask & env_out).count_ones())
                    & 1
                    == 1;
                let signed = if flip { -b.coeff } else { b.coeff };
                match sums.iter_mut().find(|(k, _)| *k == epat) {
                    Some((_, s)) => *s += signed * amp,
                    None => sums.push((epat, signed * amp)),
                }
                tg += b.coeff.norm() * q;
            }
            if tg <= 0.0 {
                continue;
            }
            let p: f64 = sums.iter().map(|(_, s)| s.norm_sqr()).sum();
            if rng.gen::<f64>() * t_sum * tg <= p {
                return Ok(x & self.measured_mask);
            }
        }
        Err(Bail::BranchOverflow)
    }

    /// The exact terminal distribution of a forced event plan, evaluated via
    /// the Pauli frame (`None` when the frame bails). Test oracle glue.
    #[cfg(test)]
    fn frame_distribution(&self, events: &[SampledEvent]) -> Option<Vec<(u64, f64)>> {
        let term = self.terminal.as_ref()?;
        let frame = self.frame_walk(term, events).ok()?;
        let n = self.compiled.circuit.num_qubits;
        let sys_mask = (1u64 << n) - 1;
        let mut acc = vec![0.0f64; 1usize << n];
        for x in 0..(1u64 << n) {
            let mut sums: Vec<(u64, Complex64)> = Vec::new();
            for b in frame.branches() {
                let y = x ^ (b.xs & sys_mask);
                let amp = term.amps[y as usize];
                if amp.norm_sqr() == 0.0 {
                    continue;
                }
                let epat = b.xs & !sys_mask;
                let env_out = epat ^ frame.env_bits();
                let flip = ((b.zs & y).count_ones() + (b.zs & !sys_mask & env_out).count_ones())
                    & 1
                    == 1;
                let signed = if flip { -b.coeff } else { b.coeff };
                match sums.iter_mut().find(|(k, _)| *k == epat) {
                    Some((_, s)) => *s += signed * amp,
                    None => sums.push((epat, signed * amp)),
                }
            }
            let p: f64 = sums.iter().map(|(_, s)| s.norm_sqr()).sum();
            acc[(x & self.measured_mask) as usize] += p;
        }
        Some(
            acc.into_iter()
                .enumerate()
                .filter(|(_, p)| *p > 1e-15)
                .map(|(bits, p)| (bits as u64, p))
                .collect(),
        )
    }

    /// Run one shot with the canonical seeding scheme.
    pub fn run_shot(&self, base_seed: u64, shot_index: u64, scratch: &mut StateVec) -> Result<u64> {
        let mut rng = ChaCha8Rng::seed_from_u64(base_seed.wrapping_add(shot_index));
        self.run_shot_with_rng(&mut rng, scratch)
    }

    /// Run `shots` trajectories in parallel; results are indexed by shot and
    /// therefore identical for any worker count.
    pub fn run_many(&self, base_seed: u64, shots: u64) -> Result<Vec<u64>> {
        let n = self.compiled.circuit.num_qubits;
        (0..shots)
            .into_par_iter()
            .map_init(
                || StateVec::new(n).expect("register size already validated"),
                |scratch, shot| self.run_shot(base_seed, shot, scratch),
            )
            .collect()
    }
}

/// One-call convenience: compile and run.
pub fn run_circuit(
    circuit: &Circuit,
    params: &NoiseParams,
    base_seed: u64,
    shots: u64,
) -> Result<Vec<u64>> {
    Runner::new(circuit, params)?.run_many(base_seed, shots)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::circuit::Circuit;

    fn bell_circuit() -> Circuit {
        let mut c = Circuit::new(2);
        c.init_range(0..2);
        c.h(0);
        c.cnot(0, 1);
        c.measure_all_z();
        c
    }

    #[test]
    fn ideal_run_reproduces_born_statistics() {
        let runner = Runner::new(&bell_circuit(), &NoiseParams::ideal()).unwrap();
        let bits = runner.run_many(11, 40_000).unwrap();
        let ones = bits.iter().filter(|&&b| b == 0b11).count();
        let zeros = bits.iter().filter(|&&b| b == 0b00).count();
        assert_eq!(ones + zeros, bits.len(), "ideal Bell pair is perfectly correlated");
        let f = ones as f64 / bits.len() as f64;
        assert!((f - 0.5).abs() < 0.01, "frequency {f}");
    }

    #[test]
    fn results_are_identical_for_any_worker_count() {
        let mut params = NoiseParams::default();
        params.lambda = 0.7;
        let runner = Runner::new(&bell_circuit(), &params).unwrap();
        let pool1 = rayon::ThreadPoolBuilder::new().num_threads(1).build().unwrap();
        let pool4 = rayon::ThreadPoolBuilder::new().num_threads(4).build().unwrap();
        let a = pool1.install(|| runner.run_many(99, 5_000)).unwrap();
        let b = pool4.install(|| runner.run_many(99, 5_000)).unwrap();
        assert_eq!(a, b);
        // And a different seed changes the stream.
        let c = pool4.install(|| runner.run_many(100, 5_000)).unwrap();
        assert_ne!(a, c);
    }

    #[test]
    fn preparation_and_readout_flips_shift_marginals() {
        // init with strong p_init, measure z: P(1) = p_init(1-p_meas) + (1-p_init)p_meas.
        let mut c = Circuit::new(1);
        c.init(0);
        c.measure_all_z();
        let params = NoiseParams {
            p_init: 0.3,
            p_meas: 0.1,
            p1: 0.0,
            p2: 0.0,
            ..Default::default()
        };
        let runner = Runner::new(&c, &params).unwrap();
        let bits = runner.run_many(5, 60_000).unwrap();
        let f1 = bits.iter().filter(|&&b| b == 1).count() as f64 / bits.len() as f64;
        let want = 0.3 * 0.9 + 0.7 * 0.1;
        assert!((f1 - want).abs() < 0.008, "got {f1}, want {want}");
    }

    #[test]
    fn one_qubit_depolarizing_after_x_gate() {
        // X prepares |1>; a depolarizing X or Y member returns the readout to
        // 0, a Z member leaves it at 1: P(0) = (2/3) p1.
        let mut c = Circuit::new(1);
        c.init(0);
        c.x(0);
        c.measure_all_z();
        let params = NoiseParams {
            p1: 0.3,
            p_init: 0.0,
            p_meas: 0.0,
            ..Default::default()
        };
        let runner = Runner::new(&c, &params).unwrap();
        let bits = runner.run_many(17, 60_000).unwrap();
        let f0 = bits.iter().filter(|&&b| b == 0).count() as f64 / bits.len() as f64;
        let want = 0.2;
        assert!((f0 - want).abs() < 0.008, "got {f0}, want {want}");
    }

    #[test]
    fn fast_path_agrees_with_full_execution() {
        let mut params = NoiseParams::default();
        params.lambda = 0.05;
        let circuit = bell_circuit();
        let fast = Runner::new(&circuit, &params).unwrap();
        let slow = Runner::new(&circuit, &params).unwrap().without_fast_path();
        let shots = 30_000u64;
        let a = fast.run_many(1234, shots).unwrap();
        let b = slow.run_many(5678, shots).unwrap();
        for outcome in [0b00u64, 0b01, 0b10, 0b11] {
            let fa = a.iter().filter(|&&x| x == outcome).count() as f64 / shots as f64;
            let fb = b.iter().filter(|&&x| x == outcome).count() as f64 / shots as f64;
            assert!(
                (fa - fb).abs() < 0.012,
                "outcome {outcome:02b}: fast {fa} vs slow {fb}"
            );
        }
    }

    #[test]
    fn local_and_global_dephasing_share_single_qubit_marginals() {
        // |+> idles for t = ln(4) * T2, then X-basis readout.
        // p_idle = (1 - 1/4)/2 = 0.375, so P(readout 1) = 0.375 in the local
        // model, and the collective model must match it exactly in law.
        let mut c = Circuit::new(1);
        c.init(0);
        c.h(0);
        c.idle(50e-3 * 4f64.ln());
        c.measure(vec![Some(MeasBasis::X)]);
        let base = NoiseParams {
            p1: 0.0,
            p_init: 0.0,
            p_meas: 0.0,
            ..Default::default()
        };
        let shots = 40_000u64;
        for mode in [DephasingMode::Local, DephasingMode::Global] {
            let params = NoiseParams { dephasing: mode, ..base.clone() };
            let runner = Runner::new(&c, &params).unwrap();
            let bits = runner.run_many(321, shots).unwrap();
            let f1 = bits.iter().filter(|&&b| b == 1).count() as f64 / shots as f64;
            assert!(
                (f1 - 0.375).abs() < 0.01,
                "{mode:?}: got {f1}, want 0.375"
            );
        }
    }

    #[test]
    fn reset_is_deterministic_when_ancilla_is_classical() {
        // x 0; reset 0; measure — the reset sees a definite |1>, repairs it,
        // and the noiseless cache stays available (fast path allowed).
        let mut c = Circuit::new(2);
        c.init_range(0..2);
        c.x(0);
        c.reset(0);
        c.cnot(1, 0); // q1 is |0>, nothing happens
        c.measure_all_z();
        let runner = Runner::new(&c, &NoiseParams::ideal()).unwrap();
        assert!(runner.terminal.is_some());
        let bits = runner.run_many(9, 100).unwrap();
        assert!(bits.iter().all(|&b| b == 0));
        // Whereas resetting half of a Bell pair is a coin flip: no cache.
        let mut c2 = Circuit::new(2);
        c2.init_range(0..2);
        c2.h(0);
        c2.cnot(0, 1);
        c2.reset(0);
        c2.measure_all_z();
        let runner2 = Runner::new(&c2, &NoiseParams::ideal()).unwrap();
        assert!(runner2.terminal.is_none());
        let bits2 = runner2.run_many(13, 4_000).unwrap();
        // Qubit 0 always reads 0 after its reset; qubit 1 is a fair coin.
        assert!(bits2.iter().all(|&b| b & 1 == 0));
        let ones = bits2.iter().filter(|&&b| b == 0b10).count() as f64 / 4_000.0;
        assert!((ones - 0.5).abs() < 0.03);
    }

    #[test]
    fn single_fault_distributions_match_hand_flips() {
        // init 0; init 1; x 0; cnot 0 1; measure zz — noiseless outcome 11.
        let mut c = Circuit::new(2);
        c.init_range(0..2);
        c.x(0);
        c.cnot(0, 1);
        c.measure_all_z();
        let runner = Runner::new(&c, &NoiseParams::default()).unwrap();
        let kinds: Vec<String> = runner
            .compiled()
            .sites
            .iter()
            .map(|s| format!("{:?}", s.kind))
            .collect();
        // Expected site order: init flips, the x-gate channel plus its idle
        // spectator, the cnot channel, readout flips.
        assert_eq!(kinds.len(), 7, "{kinds:?}");
        let dist = |site: usize, choice: usize| {
            let d = runner.faulted_readout_distribution(site, choice).unwrap();
            assert!((d.iter().map(|(_, p)| p).sum::<f64>() - 1.0).abs() < 1e-12);
            d
        };
        // Preparation flip on qubit 0: X then x-gate restores |0>, cnot idles.
        assert_eq!(dist(0, 0), vec![(0b00, 1.0)]);
        // Preparation flip on qubit 1: |11> then cnot clears qubit 1.
        assert_eq!(dist(1, 0), vec![(0b01, 1.0)]);
        // Depolarizing after the x gate: X and Y members flip the readout of
        // both qubits (the cnot copies the flip), Z is invisible.
        assert_eq!(dist(2, 0), vec![(0b00, 1.0)]);
        assert_eq!(dist(2, 1), vec![(0b00, 1.0)]);
        assert_eq!(dist(2, 2), vec![(0b11, 1.0)]);
        // Idle dephasing on qubit 1 during the x gate: Z on |0> is nothing.
        assert_eq!(dist(3, 0), vec![(0b11, 1.0)]);
        // Two-qubit depolarizing after the cnot: member X on qubit 0 alone.
        let x0_choice = 4 - 1; // row-major (pa, pb) pairs skipping (I, I)
        assert_eq!(dist(4, x0_choice), vec![(0b10, 1.0)]);
        // Readout flips.
        assert_eq!(dist(5, 0), vec![(0b10, 1.0)]);
        assert_eq!(dist(6, 0), vec![(0b01, 1.0)]);
    }

    #[test]
    fn fault_survey_covers_every_member_and_matches_single_runs() {
        use super::SingleFaultOutcome;
        // A circuit with a coin-flip reset exercises branch splitting.
        let mut c = Circuit::new(2);
        c.init_range(0..2);
        c.h(0);
        c.cnot(0, 1);
        c.reset(0);
        c.measure_all_z();
        let params = NoiseParams { reset_error: 0.045, ..NoiseParams::default() };
        let runner = Runner::new(&c, &params).unwrap();
        // The ideal distribution mixes both reset branches: qubit 0 always
        // reads 0, qubit 1 is a fair coin.
        let ideal = runner.ideal_readout_distribution().unwrap();
        assert_eq!(ideal.len(), 2);
        for (bits, p) in &ideal {
            assert!(*bits == 0b00 || *bits == 0b10);
            assert!((p - 0.5).abs() < 1e-12);
        }
        let total: usize = runner
            .compiled()
            .sites
            .iter()
            .map(|s| s.kind.member_count())
            .sum();
        let mut visited = vec![];
        let mut evaluated = std::collections::HashSet::new();
        runner
            .for_each_single_fault(|site, choice, outcome| {
                visited.push((site, choice));
                match outcome {
                    SingleFaultOutcome::Evaluated(dist) => {
                        evaluated.insert((site, choice));
                        let direct = runner.faulted_readout_distribution(site, choice)?;
                        assert_eq!(dist, direct.as_slice(), "site {site} member {choice}");
                    }
                    SingleFaultOutcome::SameAs { site: s0, choice: c0 } => {
                        assert!(evaluated.contains(&(s0, c0)), "reference must precede");
                        let a = runner.faulted_readout_distribution(site, choice)?;
                        let b = runner.faulted_readout_distribution(s0, c0)?;
                        assert_eq!(a, b, "equivalent members must share a distribution");
                    }
                }
                Ok(())
            })
            .unwrap();
        assert_eq!(visited.len(), total, "every member visited exactly once");
        visited.sort_unstable();
        visited.dedup();
        assert_eq!(visited.len(), total);
    }

    /// Exact multi-event oracle: the branch walk with every listed member
    /// applied at its site's op index (events must be in site order).
    fn exact_distribution_with_events(runner: &Runner, events: &[(u32, u8)]) -> Vec<(u64, f64)> {
        let compiled = runner.compiled();
        let circuit = &compiled.circuit;
        let mut branches =
            vec![Branch { sv: StateVec::new(circuit.num_qubits).unwrap(), weight: 1.0 }];
        let mut next = 0usize;
        for (k, op) in circuit.ops.iter().enumerate() {
            advance_branches(&mut branches, op).unwrap();
            while next < events.len() {
                let (site_idx, choice) = events[next];
                let site = &compiled.sites[site_idx as usize];
                if site.op_index != k {
                    break;
                }
                for b in branches.iter_mut() {
                    site.kind.apply_member(&mut b.sv, choice as usize).unwrap();
                }
                next += 1;
            }
        }
        branch_readout(&branches, circuit.num_qubits, runner.measured_mask())
    }

    fn assert_distributions_match(a: &[(u64, f64)], b: &[(u64, f64)], what: &str) {
        let to_map = |d: &[(u64, f64)]| -> HashMap<u64, f64> { d.iter().copied().collect() };
        let (ma, mb) = (to_map(a), to_map(b));
        for (bits, pa) in &ma {
            let pb = mb.get(bits).copied().unwrap_or(0.0);
            assert!(
                (pa - pb).abs() < 1e-9,
                "{what}: outcome {bits:b} has {pa} vs {pb}"
            );
        }
        for (bits, pb) in &mb {
            assert!(
                ma.contains_key(bits) || *pb < 1e-9,
                "{what}: outcome {bits:b} only in second ({pb})"
            );
        }
    }

    /// The Pauli-frame path must reproduce the exact faulted distribution of
    /// every kind of single event on a protocol circuit that exercises
    /// resets, quarter-turn splits, probes, and feedback.
    #[test]
    fn frame_distributions_match_exact_walks_across_fault_sites() {
        use crate::protocols::{cube_ccz, teleport_h, TeleportInput};
        let cases: Vec<(&str, crate::circuit::Circuit)> = vec![
            ("ccz-x", cube_ccz().unwrap().context("x").unwrap().circuit.clone()),
            (
                "teleport-h-y",
                teleport_h(TeleportInput::Plus, true).unwrap().context("y").unwrap().circuit.clone(),
            ),
        ];
        for (what, circuit) in cases {
            let runner = Runner::new(&circuit, &NoiseParams::default()).unwrap();
            assert!(runner.terminal.is_some(), "{what}: cache must be available");
            let sites = runner.compiled().sites.len();
            let mut checked = 0usize;
            let mut bailed = 0usize;
            for site in (0..sites).step_by(23) {
                let members = runner.compiled().sites[site].kind.member_count();
                for choice in 0..members {
                    let events = [(site as u32, choice as u8)];
                    match runner.frame_distribution(&events) {
                        Some(frame_dist) => {
                            let exact = runner.faulted_readout_distribution(site, choice).unwrap();
                            assert_distributions_match(
                                &frame_dist,
                                &exact,
                                &format!("{what} site {site} member {choice}"),
                            );
                            checked += 1;
                        }
                        None => bailed += 1,
                    }
                }
            }
            assert!(checked > 20, "{what}: too few frame cases ({checked})");
            // Bailing is allowed (raw fallback covers it) but must be rare.
            assert!(
                bailed * 5 < checked,
                "{what}: {bailed} bails vs {checked} checked"
            );
        }
    }

    /// Multi-event trajectories: insertions compose inside the walk.
    #[test]
    fn frame_distributions_match_exact_walks_for_event_pairs() {
        use crate::protocols::{cube_hadamard, CubeInput};
        let proto = cube_hadamard(CubeInput::Zeros).unwrap();
        let circuit = &proto.context("x").unwrap().circuit;
        let runner = Runner::new(circuit, &NoiseParams::default()).unwrap();
        let sites = runner.compiled().sites.len();
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let mut checked = 0usize;
        while checked < 10 {
            let mut pair = [
                (rng.gen_range(0..sites) as u32, 0u8),
                (rng.gen_range(0..sites) as u32, 0u8),
            ];
            pair.sort_unstable_by_key(|e| e.0);
            for e in pair.iter_mut() {
                let members = runner.compiled().sites[e.0 as usize].kind.member_count();
                e.1 = rng.gen_range(0..members) as u8;
            }
            if let Some(frame_dist) = runner.frame_distribution(&pair) {
                let exact = exact_distribution_with_events(&runner, &pair);
                assert_distributions_match(&frame_dist, &exact, &format!("pair {pair:?}"));
                checked += 1;
            }
        }
    }

    /// The rejection sampler draws from the same law as the state-vector
    /// walk, including shots whose frame splits at quarter turns.
    #[test]
    fn frame_sampler_matches_state_vector_statistics() {
        use std::f64::consts::FRAC_PI_4;
        let mut c = Circuit::new(3);
        c.init_range(0..3);
        c.h(0);
        c.h(1);
        c.h(2);
        // Phase-polynomial ccz: noisy cnots feed X letters into rz splits.
        c.cnot(1, 2);
        c.rz(2, -FRAC_PI_4);
        c.cnot(0, 2);
        c.rz(2, FRAC_PI_4);
        c.cnot(1, 2);
        c.rz(2, -FRAC_PI_4);
        c.cnot(0, 2);
        c.rz(2, FRAC_PI_4);
        c.cnot(0, 1);
        c.rz(1, -FRAC_PI_4);
        c.cnot(0, 1);
        c.rz(0, FRAC_PI_4);
        c.rz(1, FRAC_PI_4);
        c.h(2);
        c.measure_all_z();
        // Heavy noise so multi-event, multi-branch shots are common.
        let params = NoiseParams { p2: 0.12, p1: 0.05, ..Default::default() };
        let shots = 60_000u64;
        let fast = Runner::new(&c, &params).unwrap();
        assert!(fast.terminal.is_some());
        let slow = Runner::new(&c, &params).unwrap().without_fast_path();
        let a = fast.run_many(42, shots).unwrap();
        let b = slow.run_many(43, shots).unwrap();
        for outcome in 0..8u64 {
            let fa = a.iter().filter(|&&x| x == outcome).count() as f64 / shots as f64;
            let fb = b.iter().filter(|&&x| x == outcome).count() as f64 / shots as f64;
            // Five sigma on a binomial frequency near 1/8.
            let sigma = (0.125 * 0.875 / shots as f64).sqrt();
            assert!(
                (fa - fb).abs() < 5.0 * sigma * 1.5,
                "outcome {outcome:03b}: fast {fa} vs slow {fb}"
            );
        }
    }

    /// End-to-end distribution agreement on a protected teleportation
    /// context under full noise, where most shots carry events.
    #[test]
    fn frame_path_reproduces_protocol_statistics() {
        use crate::protocols::{teleport, TeleportInput};
        let proto = teleport(TeleportInput::Zero, false).unwrap();
        let ctx = proto.context("z").unwrap();
        let shots = 20_000u64;
        let fast = Runner::new(&ctx.circuit, &NoiseParams::default()).unwrap();
        assert!(fast.terminal.is_some());
        let slow = Runner::new(&ctx.circuit, &NoiseParams::default())
            .unwrap()
            .without_fast_path();
        let a = fast.run_many(2024, shots).unwrap();
        let b = slow.run_many(2025, shots).unwrap();
        let stats = |bits: &[u64]| -> (f64, f64) {
            let mut acc = 0u64;
            let mut wrong = 0u64;
            for &x in bits {
                if ctx.accepts(x) {
                    acc += 1;
                    if ctx.logical_bits(x) & 1 == 1 {
                        wrong += 1;
                    }
                }
            }
            (acc as f64 / bits.len() as f64, wrong as f64 / acc.max(1) as f64)
        };
        let (acc_a, err_a) = stats(&a);
        let (acc_b, err_b) = stats(&b);
        let sigma_acc = (acc_b * (1.0 - acc_b) / shots as f64).sqrt();
        assert!(
            (acc_a - acc_b).abs() < 5.0 * sigma_acc,
            "acceptance: fast {acc_a} vs slow {acc_b}"
        );
        let sigma_err = (err_b * (1.0 - err_b) / (acc_b * shots as f64)).sqrt();
        assert!(
            (err_a - err_b).abs() < 5.0 * sigma_err,
            "conditional error: fast {err_a} vs slow {err_b}"
        );
    }

    /// Manual profiling aid: shot-class histogram for the fast path on a
    /// heavy protocol context. Run with `--ignored --nocapture`.
    #[test]
    #[ignore]
    fn fast_path_shot_diagnostics() {
        use crate::protocols::cube_ccz;
        let proto = cube_ccz().unwrap();
        let circuit = &proto.context("x").unwrap().circuit;
        let runner = Runner::new(circuit, &NoiseParams::default()).unwrap();
        let term = runner.terminal.as_ref().unwrap();
        let (mut empty, mut single, mut multi, mut bail) = (0u64, 0u64, 0u64, 0u64);
        let mut branch_hist: HashMap<usize, u64> = HashMap::new();
        let mut events_total = 0usize;
        let shots = 4000u64;
        for shot in 0..shots {
            let mut rng = ChaCha8Rng::seed_from_u64(9000 + shot);
            let events = sample_events(&runner.compiled, &mut rng);
            events_total += events.len();
            match runner.frame_walk(term, &events) {
                Ok(frame) => {
                    let b = frame.branches().len();
                    *branch_hist.entry(b).or_default() += 1;
                    if frame.is_identity() {
                        empty += 1;
                    } else if b == 1 {
                        single += 1;
                    } else {
                        multi += 1;
                    }
                }
                Err(_) => bail += 1,
            }
        }
        let mut hist: Vec<_> = branch_hist.into_iter().collect();
        hist.sort_unstable();
        println!("mean events/shot: {}", events_total as f64 / shots as f64);
        println!("identity {empty}  single {single}  multi {multi}  bail {bail}");
        println!("branch counts: {hist:?}");
    }

    #[test]
    fn ideal_readout_distribution_marginalizes_measured_qubits() {
        let mut c = Circuit::new(2);
        c.init_range(0..2);
        c.h(0);
        c.cnot(0, 1);
        c.measure(vec![None, Some(MeasBasis::Z)]); // only qubit 1 read out
        let runner = Runner::new(&c, &NoiseParams::ideal()).unwrap();
        let dist = runner.ideal_readout_distribution().unwrap();
        assert_eq!(dist.len(), 2);
        for (bits, p) in dist {
            assert!(bits == 0 || bits == 0b10);
            assert!((p - 0.5).abs() < 1e-12);
        }
    }
}
