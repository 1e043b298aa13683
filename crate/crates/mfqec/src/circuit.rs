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

//! Gate-level circuit representation with a plain-text serialization.
//!
//! The native hardware operations are `r` (resonant single-qubit rotation),
//! `rz` (virtual frame rotation: zero duration, zero noise) and `xx` (the
//! two-qubit Moelmer-Soerensen coupling at angle pi/2). The remaining named
//! gates are calibrated composite pulses: they are applied as exact unitaries
//! and charged exactly one noise event each.
//!
//! Text format, one operation per line (`#` starts a comment):
//!
//! ```text
//! qubits 4
//! init 0
//! init 1
//! h 0
//! cnot 0 1
//! rz 1 -1.5707963267948966
//! fault_marker bell-ready
//! measure zx--
//! ```
//!
//! `measure` takes one letter per qubit (`x`, `y`, `z`, or `-` for "not
//! measured") and must be the final operation. Readout is destructive: the
//! basis-change pulses implied by the letters are applied by the execution
//! layer as ordinary noisy gates in a single parallel time slot, followed by
//! the raw Z readout.

use std::fmt;

use crate::error::{Error, Result};
use crate::statevec::StateVec;

/// Readout basis for one qubit in the terminal measurement.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum MeasBasis {
    X,
    Y,
    Z,
}

/// One circuit operation.
#[derive(Clone, Debug, PartialEq)]
pub enum Op {
    /// Declare and prepare qubit `q` in |0>. Subject to preparation error.
    Init(usize),
    /// Mid-circuit dissipative reset of `q` back to |0> (measure-and-flip
    /// implemented by the execution layers; no classical record is kept).
    Reset(usize),
    /// Explicit wait: every live qubit idles for the given duration (seconds).
    Idle(f64),
    /// R(theta, phi) = exp(-i theta/2 (cos(phi) X + sin(phi) Y)).
    R { q: usize, theta: f64, phi: f64 },
    /// Virtual Z rotation: exact, zero duration, zero noise.
    Rz { q: usize, theta: f64 },
    /// exp(-i pi/4 X⊗X) entangling pulse.
    Xx(usize, usize),
    H(usize),
    X(usize),
    Y(usize),
    Z(usize),
    S(usize),
    T(usize),
    Tdag(usize),
    Cnot(usize, usize),
    Cz(usize, usize),
    Swap(usize, usize),
    Ccz(usize, usize, usize),
    /// Named no-op used to address fault-injection sites from tests.
    FaultMarker(String),
    /// Terminal destructive readout; one entry per qubit.
    Measure(Vec<Option<MeasBasis>>),
}

impl Op {
    /// Qubits this operation drives (empty for markers, idle, and measure —
    /// measure actors depend on the noise layer's rotation handling).
    pub fn actors(&self) -> Vec<usize> {
        match self {
            Op::Init(q) | Op::Reset(q) => vec![*q],
            Op::R { q, .. } | Op::Rz { q, .. } => vec![*q],
            Op::H(q) | Op::X(q) | Op::Y(q) | Op::Z(q) | Op::S(q) | Op::T(q) | Op::Tdag(q) => {
                vec![*q]
            }
            Op::Xx(a, b) | Op::Cnot(a, b) | Op::Cz(a, b) | Op::Swap(a, b) => vec![*a, *b],
            Op::Ccz(a, b, c) => vec![*a, *b, *c],
            Op::Idle(_) | Op::FaultMarker(_) | Op::Measure(_) => vec![],
        }
    }

    /// True for unitary gates (including the virtual `rz`).
    pub fn is_gate(&self) -> bool {
        !matches!(
            self,
            Op::Init(_) | Op::Reset(_) | Op::Idle(_) | Op::FaultMarker(_) | Op::Measure(_)
        )
    }

    /// True for gates that are charged one single-qubit noise event.
    pub fn is_noisy_1q_gate(&self) -> bool {
        matches!(
            self,
            Op::R { .. }
                | Op::H(_)
                | Op::X(_)
                | Op::Y(_)
                | Op::Z(_)
                | Op::S(_)
                | Op::T(_)
                | Op::Tdag(_)
        )
    }

    /// True for gates that are charged one two-qubit noise event.
    pub fn is_noisy_2q_gate(&self) -> bool {
        matches!(self, Op::Xx(..) | Op::Cnot(..) | Op::Cz(..) | Op::Swap(..))
    }

    /// Apply this operation to a state if it is a unitary gate.
    /// Returns `Ok(false)` for non-gate operations (caller handles those).
    pub fn apply_to_state(&self, sv: &mut StateVec) -> Result<bool> {
        match self {
            Op::R { q, theta, phi } => sv.r(*q, *theta, *phi)?,
            Op::Rz { q, theta } => sv.rz(*q, *theta)?,
            Op::Xx(a, b) => sv.xx(*a, *b, std::f64::consts::FRAC_PI_2)?,
            Op::H(q) => sv.h(*q)?,
            Op::X(q) => sv.x(*q)?,
            Op::Y(q) => sv.y(*q)?,
            Op::Z(q) => sv.z(*q)?,
            Op::S(q) => sv.s(*q)?,
            Op::T(q) => sv.t(*q)?,
            Op::Tdag(q) => sv.tdag(*q)?,
            Op::Cnot(c, t) => sv.cx(*c, *t)?,
            Op::Cz(a, b) => sv.cz(*a, *b)?,
            Op::Swap(a, b) => sv.swap(*a, *b)?,
            Op::Ccz(a, b, c) => sv.ccz(*a, *b, *c)?,
            _ => return Ok(false),
        }
        Ok(true)
    }

    /// One statement of the plain-text format (no trailing newline).
    pub fn text(&self) -> String {
        match self {
            Op::Init(q) => format!("init {q}"),
            Op::Reset(q) => format!("reset {q}"),
            Op::Idle(d) => format!("idle {d}"),
            Op::R { q, theta, phi } => format!("r {q} {theta} {phi}"),
            Op::Rz { q, theta } => format!("rz {q} {theta}"),
            Op::Xx(a, b) => format!("xx {a} {b}"),
            Op::H(q) => format!("h {q}"),
            Op::X(q) => format!("x {q}"),
            Op::Y(q) => format!("y {q}"),
            Op::Z(q) => format!("z {q}"),
            Op::S(q) => format!("s {q}"),
            Op::T(q) => format!("t {q}"),
            Op::Tdag(q) => format!("tdag {q}"),
            Op::Cnot(c, t) => format!("cnot {c} {t}"),
            Op::Cz(a, b) => format!("cz {a} {b}"),
            Op::Swap(a, b) => format!("swap {a} {b}"),
            Op::Ccz(a, b, c) => format!("ccz {a} {b} {c}"),
            Op::FaultMarker(id) => format!("fault_marker {id}"),
            Op::Measure(bases) => {
                let letters: String = bases
                    .iter()
                    .map(|b| match b {
                        Some(MeasBasis::X) => 'x',
                        Some(MeasBasis::Y) => 'y',
                        Some(MeasBasis::Z) => 'z',
                        None => '-',
                    })
                    .collect();
                format!("measure {letters}")
            }
        }
    }
}

/// A circuit over a fixed-size qubit register.
#[derive(Clone, Debug, PartialEq)]
pub struct Circuit {
    pub num_qubits: usize,
    pub ops: Vec<Op>,
}

impl Circuit {
    pub fn new(num_qubits: usize) -> Self {
        Circuit { num_qubits, ops: Vec::new() }
    }

    // Builder helpers. These only push; call `validate` to check the result.
    pub fn init(&mut self, q: usize) {
        self.ops.push(Op::Init(q));
    }
    pub fn init_range(&mut self, qubits: impl IntoIterator<Item = usize>) {
        for q in qubits {
            self.init(q);
        }
    }
    pub fn reset(&mut self, q: usize) {
        self.ops.push(Op::Reset(q));
    }
    pub fn idle(&mut self, seconds: f64) {
        self.ops.push(Op::Idle(seconds));
    }
    pub fn r(&mut self, q: usize, theta: f64, phi: f64) {
        self.ops.push(Op::R { q, theta, phi });
    }
    pub fn rz(&mut self, q: usize, theta: f64) {
        self.ops.push(Op::Rz { q, theta });
    }
    pub fn xx(&mut self, a: usize, b: usize) {
        self.ops.push(Op::Xx(a, b));
    }
    pub fn h(&mut self, q: usize) {
        self.ops.push(Op::H(q));
    }
    pub fn x(&mut self, q: usize) {
        self.ops.push(Op::X(q));
    }
    pub fn y(&mut self, q: usize) {
        self.ops.push(Op::Y(q));
    }
    pub fn z(&mut self, q: usize) {
        self.ops.push(Op::Z(q));
    }
    pub fn s(&mut self, q: usize) {
        self.ops.push(Op::S(q));
    }
    pub fn t(&mut self, q: usize) {
        self.ops.push(Op::T(q));
    }
    pub fn tdag(&mut self, q: usize) {
        self.ops.push(Op::Tdag(q));
    }
    pub fn cnot(&mut self, c: usize, t: usize) {
        self.ops.push(Op::Cnot(c, t));
    }
    pub fn cz(&mut self, a: usize, b: usize) {
        self.ops.push(Op::Cz(a, b));
    }
    pub fn swap(&mut self, a: usize, b: usize) {
        self.ops.push(Op::Swap(a, b));
    }
    pub fn ccz(&mut self, a: usize, b: usize, c: usize) {
        self.ops.push(Op::Ccz(a, b, c));
    }
    /// Controlled-Y compiled from the available gate set:
    /// `rz(+pi/2) target; cnot; rz(-pi/2) target` — the virtual-Z phases
    /// cancel exactly, so this equals CY at zero extra noise cost.
    pub fn cy(&mut self, c: usize, t: usize) {
        self.rz(t, -std::f64::consts::FRAC_PI_2);
        self.cnot(c, t);
        self.rz(t, std::f64::consts::FRAC_PI_2);
    }
    pub fn fault_marker(&mut self, id: &str) {
        self.ops.push(Op::FaultMarker(id.to_string()));
    }
    pub fn measure(&mut self, bases: Vec<Option<MeasBasis>>) {
        self.ops.push(Op::Measure(bases));
    }
    /// Measure every initialized qubit in Z; uninitialized qubits get `-`.
    pub fn measure_all_z(&mut self) {
        let live = self.final_live_mask();
        let bases = (0..self.num_qubits)
            .map(|q| if live >> q & 1 == 1 { Some(MeasBasis::Z) } else { None })
            .collect();
        self.measure(bases);
    }

    /// Mask of qubits that have been initialized by the end of the circuit.
    pub fn final_live_mask(&self) -> u64 {
        let mut mask = 0u64;
        for op in &self.ops {
            if let Op::Init(q) = op {
                mask |= 1 << q;
            }
        }
        mask
    }

    /// For each op index, the mask of qubits initialized strictly before it
    /// (i.e. the ions that exist while the op executes).
    pub fn live_masks(&self) -> Vec<u64> {
        let mut out = Vec::with_capacity(self.ops.len());
        let mut mask = 0u64;
        for op in &self.ops {
            out.push(mask);
            if let Op::Init(q) = op {
                mask |= 1 << q;
            }
        }
        out
    }

    /// Number of noisy single-qubit gates (virtual `rz` excluded).
    pub fn count_1q_gates(&self) -> usize {
        self.ops.iter().filter(|o| o.is_noisy_1q_gate()).count()
    }

    /// Number of noisy two-qubit gates.
    pub fn count_2q_gates(&self) -> usize {
        self.ops.iter().filter(|o| o.is_noisy_2q_gate()).count()
    }

    pub fn count_resets(&self) -> usize {
        self.ops.iter().filter(|o| matches!(o, Op::Reset(_))).count()
    }

    /// The terminal measurement, if present.
    pub fn terminal_measure(&self) -> Option<&[Option<MeasBasis>]> {
        match self.ops.last() {
            Some(Op::Measure(b)) => Some(b),
            _ => None,
        }
    }

    /// Indices and bases of measured qubits, in qubit order.
    pub fn measured_qubits(&self) -> Vec<(usize, MeasBasis)> {
        match self.terminal_measure() {
            Some(bases) => bases
                .iter()
                .enumerate()
                .filter_map(|(q, b)| b.map(|b| (q, b)))
                .collect(),
            None => vec![],
        }
    }

    /// Structural validation; returns the circuit for chaining.
    pub fn validate(&self) -> Result<&Self> {
        let n = self.num_qubits;
        let mut initialized = vec![false; n];
        let mut measured = false;
        for (idx, op) in self.ops.iter().enumerate() {
            if measured {
                return Err(Error::validation(format!(
                    "op {idx}: operations after the terminal measure"
                )));
            }
            let actors = op.actors();
            for &q in &actors {
                if q >= n {
                    return Err(Error::validation(format!(
                        "op {idx}: qubit {q} out of range (register size {n})"
                    )));
                }
            }
            for (i, &a) in actors.iter().enumerate() {
                for &b in &actors[i + 1..] {
                    if a == b {
                        return Err(Error::validation(format!(
                            "op {idx}: repeated qubit {a} in one gate"
                        )));
                    }
                }
            }
            match op {
                Op::Init(q) => {
                    if initialized[*q] {
                        return Err(Error::validation(format!(
                            "op {idx}: qubit {q} initialized twice (use reset)"
                        )));
                    }
                    initialized[*q] = true;
                }
                Op::Measure(bases) => {
                    if bases.len() != n {
                        return Err(Error::validation(format!(
                            "op {idx}: measure lists {} qubits, register has {n}",
                            bases.len()
                        )));
                    }
                    for (q, b) in bases.iter().enumerate() {
                        if b.is_some() && !initialized[q] {
                            return Err(Error::validation(format!(
                                "op {idx}: measuring uninitialized qubit {q}"
                            )));
                        }
                    }
                    measured = true;
                }
                Op::Idle(d) => {
                    if !d.is_finite() || *d < 0.0 {
                        return Err(Error::validation(format!(
                            "op {idx}: idle duration must be finite and >= 0"
                        )));
                    }
                }
                Op::R { theta, phi, .. } => {
                    if !theta.is_finite() || !phi.is_finite() {
                        return Err(Error::validation(format!(
                            "op {idx}: non-finite rotation angle"
                        )));
                    }
                    for &q in &actors {
                        if !initialized[q] {
                            return Err(Error::validation(format!(
                                "op {idx}: gate on uninitialized qubit {q}"
                            )));
                        }
                    }
                }
                Op::Rz { theta, .. } => {
                    if !theta.is_finite() {
                        return Err(Error::validation(format!(
                            "op {idx}: non-finite rotation angle"
                        )));
                    }
                    for &q in &actors {
                        if !initialized[q] {
                            return Err(Error::validation(format!(
                                "op {idx}: gate on uninitialized qubit {q}"
                            )));
                        }
                    }
                }
                Op::FaultMarker(_) => {}
                _ => {
                    for &q in &actors {
                        if !initialized[q] {
                            return Err(Error::validation(format!(
                                "op {idx}: gate on uninitialized qubit {q}"
                            )));
                        }
                    }
                }
            }
        }
        Ok(self)
    }

    /// Relabel qubits: qubit `q` becomes `perm[q]`. `perm` must be a
    /// permutation of `0..num_qubits`.
    pub fn relabel(&self, perm: &[usize]) -> Result<Circuit> {
        if perm.len() != self.num_qubits {
            return Err(Error::validation("relabel permutation has wrong length"));
        }
        let mut seen = vec![false; self.num_qubits];
        for &p in perm {
            if p >= self.num_qubits || seen[p] {
                return Err(Error::validation("relabel map is not a permutation"));
            }
            seen[p] = true;
        }
        let map = |q: usize| perm[q];
        let ops = self
            .ops
            .iter()
            .map(|op| match op {
                Op::Init(q) => Op::Init(map(*q)),
                Op::Reset(q) => Op::Reset(map(*q)),
                Op::Idle(d) => Op::Idle(*d),
                Op::R { q, theta, phi } => Op::R { q: map(*q), theta: *theta, phi: *phi },
                Op::Rz { q, theta } => Op::Rz { q: map(*q), theta: *theta },
                Op::Xx(a, b) => Op::Xx(map(*a), map(*b)),
                Op::H(q) => Op::H(map(*q)),
                Op::X(q) => Op::X(map(*q)),
                Op::Y(q) => Op::Y(map(*q)),
                Op::Z(q) => Op::Z(map(*q)),
                Op::S(q) => Op::S(map(*q)),
                Op::T(q) => Op::T(map(*q)),
                Op::Tdag(q) => Op::Tdag(map(*q)),
                Op::Cnot(c, t) => Op::Cnot(map(*c), map(*t)),
                Op::Cz(a, b) => Op::Cz(map(*a), map(*b)),
                Op::Swap(a, b) => Op::Swap(map(*a), map(*b)),
                Op::Ccz(a, b, c) => Op::Ccz(map(*a), map(*b), map(*c)),
                Op::FaultMarker(s) => Op::FaultMarker(s.clone()),
                Op::Measure(bases) => {
                    let mut new_bases = vec![None; bases.len()];
                    for (q, b) in bases.iter().enumerate() {
                        new_bases[map(q)] = *b;
                    }
                    Op::Measure(new_bases)
                }
            })
            .collect();
        Ok(Circuit { num_qubits: self.num_qubits, ops })
    }

    /// Canonical text form (parsed back by [`Circuit::parse`]).
    pub fn emit(&self) -> String {
        format!("{self}")
    }

    /// Parse the plain-text format.
    pub fn parse(text: &str) -> Result<Circuit> {
        let mut num_qubits: Option<usize> = None;
        let mut ops = Vec::new();
        for (lineno, raw) in text.lines().enumerate() {
            let line = lineno + 1;
            let content = match raw.find('#') {
                Some(pos) => &raw[..pos],
                None => raw,
            };
            let mut tok = content.split_whitespace();
            let Some(head) = tok.next() else { continue };
            let rest: Vec<&str> = tok.collect();
            let perr = |msg: String| Error::Parse { line, msg };
            let parse_usize = |s: &str| -> Result<usize> {
                s.parse::<usize>()
                    .map_err(|_| perr(format!("expected qubit index, found {s:?}")))
            };
            let parse_f64 = |s: &str| -> Result<f64> {
                s.parse::<f64>()
                    .map_err(|_| perr(format!("expected number, found {s:?}")))
            };
            let want_args = |k: usize| -> Result<()> {
                if rest.len() != k {
                    Err(perr(format!(
                        "{head} expects {k} argument(s), found {}",
                        rest.len()
                    )))
                } else {
                    Ok(())
                }
            };
            if head == "qubits" {
                if num_qubits.is_some() {
                    return Err(perr("duplicate qubits declaration".into()));
                }
                want_args(1)?;
                num_qubits = Some(parse_usize(rest[0])?);
                continue;
            }
            if num_qubits.is_none() {
                return Err(perr("first statement must be: qubits N".into()));
            }
            let op = match head {
                "init" => {
                    want_args(1)?;
                    Op::Init(parse_usize(rest[0])?)
                }
                "reset" => {
                    want_args(1)?;
                    Op::Reset(parse_usize(rest[0])?)
                }
                "idle" => {
                    want_args(1)?;
                    Op::Idle(parse_f64(rest[0])?)
                }
                "r" => {
                    want_args(3)?;
                    Op::R {
                        q: parse_usize(rest[0])?,
                        theta: parse_f64(rest[1])?,
                        phi: parse_f64(rest[2])?,
                    }
                }
                "rz" => {
                    want_args(2)?;
                    Op::Rz { q: parse_usize(rest[0])?, theta: parse_f64(rest[1])? }
                }
                "xx" => {
                    want_args(2)?;
                    Op::Xx(parse_usize(rest[0])?, parse_usize(rest[1])?)
                }
                "h" | "x" | "y" | "z" | "s" | "t" | "tdag" => {
                    want_args(1)?;
                    let q = parse_usize(rest[0])?;
                    match head {
                        "h" => Op::H(q),
                        "x" => Op::X(q),
                        "y" => Op::Y(q),
                        "z" => Op::Z(q),
                        "s" => Op::S(q),
                        "t" => Op::T(q),
                        _ => Op::Tdag(q),
                    }
                }
                "cnot" => {
                    want_args(2)?;
                    Op::Cnot(parse_usize(rest[0])?, parse_usize(rest[1])?)
                }
                "cz" => {
                    want_args(2)?;
                    Op::Cz(parse_usize(rest[0])?, parse_usize(rest[1])?)
                }
                "swap" => {
                    want_args(2)?;
                    Op::Swap(parse_usize(rest[0])?, parse_usize(rest[1])?)
                }
                "ccz" => {
                    want_args(3)?;
                    Op::Ccz(
                        parse_usize(rest[0])?,
                        parse_usize(rest[1])?,
                        parse_usize(rest[2])?,
                    )
                }
                "fault_marker" => {
                    want_args(1)?;
                    let id = rest[0];
                    if !id
                        .chars()
                        .all(|c| c.is_ascii_alphanumeric() || c == '_' || c == '-')
                    {
                        return Err(perr(format!("invalid marker id {id:?}")));
                    }
                    Op::FaultMarker(id.to_string())
                }
                "measure" => {
                    want_args(1)?;
                    let mut bases = Vec::with_capacity(rest[0].len());
                    for ch in rest[0].chars() {
                        bases.push(match ch {
                            'x' => Some(MeasBasis::X),
                            'y' => Some(MeasBasis::Y),
                            'z' => Some(MeasBasis::Z),
                            '-' => None,
                            _ => {
                                return Err(perr(format!(
                                    "invalid measure basis letter {ch:?}"
                                )))
                            }
                        });
                    }
                    Op::Measure(bases)
                }
                other => return Err(perr(format!("unknown operation {other:?}"))),
            };
            ops.push(op);
        }
        let num_qubits = num_qubits
            .ok_or_else(|| Error::Parse { line: 1, msg: "missing qubits declaration".into() })?;
        let circuit = Circuit { num_qubits, ops };
        circuit.validate()?;
        Ok(circuit)
    }
}

impl fmt::Display for Circuit {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "qubits {}", self.num_qubits)?;
        for op in &self.ops {
            writeln!(f, "{}", op.text())?;
        }
        Ok(())
    }
}
