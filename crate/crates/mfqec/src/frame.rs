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

//! Branched Pauli-frame propagation.
//!
//! A noisy trajectory differs from the noiseless circuit only by Pauli
//! insertions, so the noisy state is `F |psi>` where `|psi>` is the noiseless
//! state and `F` is the product of the inserted Paulis conjugated forward
//! through the remaining operations. This module tracks `F` directly as a
//! small sum of weighted Pauli terms
//!
//! ```text
//!     F = sum_b  c_b * X^{m_b} Z^{z_b}        (c_b complex, masks u64)
//! ```
//!
//! kept in the canonical order "X letters left of Z letters" (so the wire
//! operator for set bits in both masks is `XZ = -iY`). Clifford operations
//! permute the terms exactly; a non-Clifford phase rotation on a wire that
//! carries an X letter splits a term in two. The frame therefore stays tiny
//! (usually one term) while a state-vector walk would touch `2^n` amplitudes
//! per gate, and the result is exact, not approximate.
//!
//! The supported circuit fragment is everything the compiler emits. A reset
//! whose outcome differs between branches is expressed exactly by moving the
//! wire's letters onto a fresh virtual environment wire (a reset is a swap
//! with a fresh `|0>`), which readout sampling then marginalizes over. Only
//! resource exhaustion reports [`Bail`], making the caller fall back to a
//! full state-vector walk for the shot.

use num_complex::Complex64;

use crate::circuit::{MeasBasis, Op};
use crate::pauli::Pauli;

/// Why frame propagation gave up on a trajectory (the caller falls back to
/// the exact state-vector walk, so bailing is a cost, never an error).
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub(crate) enum Bail {
    /// A divergent reset needed a virtual environment wire beyond the mask
    /// width (only conceivable on a near-64-wire register).
    EnvExhausted,
    /// Non-Clifford splitting outgrew the branch budget.
    BranchOverflow,
}

/// One weighted Pauli term `coeff * X^{xs} Z^{zs}`.
#[derive(Clone, Copy, Debug)]
pub(crate) struct Branch {
    pub coeff: Complex64,
    pub xs: u64,
    pub zs: u64,
}

/// Hard cap on the number of branches; beyond this the state-vector walk is
/// cheaper anyway.
const MAX_BRANCHES: usize = 512;

/// Branches with squared magnitude below this are exact-cancellation residue
/// (floating zeros of quarter-turn trigonometry) and are dropped.
const COEFF_FLOOR_SQR: f64 = 1e-24;

fn parity(mask: u64) -> bool {
    mask.count_ones() & 1 == 1
}

/// The conjugated-insertion operator `F` for one trajectory.
#[derive(Clone, Debug)]
pub(crate) struct PauliFrame {
    branches: Vec<Branch>,
    /// Noiseless pre-reset bits of the claimed environment wires: the
    /// noiseless terminal state carries `|bit>` on each of them.
    env_bits: u64,
}

impl PauliFrame {
    pub fn identity() -> Self {
        PauliFrame {
            branches: vec![Branch { coeff: Complex64::new(1.0, 0.0), xs: 0, zs: 0 }],
            env_bits: 0,
        }
    }

    pub fn branches(&self) -> &[Branch] {
        &self.branches
    }

    /// Noiseless bits of the claimed environment wires, as a mask.
    pub fn env_bits(&self) -> u64 {
        self.env_bits
    }

    /// True while `F` is exactly the identity (the zero-insertion case).
    pub fn is_identity(&self) -> bool {
        self.branches.len() == 1
            && self.branches[0].xs == 0
            && self.branches[0].zs == 0
    }

    /// Sum of branch magnitudes; the expected number of draws the terminal
    /// rejection sampler needs is the square of this.
    pub fn magnitude_sum(&self) -> f64 {
        self.branches.iter().map(|b| b.coeff.norm()).sum()
    }

    /// Left-multiply a fresh Pauli insertion onto the frame:
    /// `F <- P F` with `P` the tensor of `letters` over distinct wires.
    pub fn insert(&mut self, letters: &[(usize, Pauli)]) {
        let mut xe = 0u64;
        let mut ze = 0u64;
        let mut phase = Complex64::new(1.0, 0.0);
        for &(q, p) in letters {
            match p {
                Pauli::I => {}
                Pauli::X => xe |= 1 << q,
                Pauli::Z => ze |= 1 << q,
                // Canonical decomposition Y = i X Z.
                Pauli::Y => {
                    xe |= 1 << q;
                    ze |= 1 << q;
                    phase *= Complex64::new(0.0, 1.0);
                }
            }
        }
        for b in &mut self.branches {
            // Z^{ze} crosses X^{m_b} while re-canonicalizing.
            let sign = if parity(ze & b.xs) { -1.0 } else { 1.0 };
            b.coeff *= phase * sign;
            b.xs ^= xe;
            b.zs ^= ze;
        }
    }

    /// Conjugate the frame through a unitary gate: `F <- U F U^dag`.
    /// Returns `Ok(false)` for non-gate operations (caller handles those).
    pub fn apply_op(&mut self, op: &Op) -> Result<bool, Bail> {
        match *op {
            Op::H(q) => self.apply_h(q),
            Op::X(q) => {
                for b in &mut self.branches {
                    if b.zs >> q & 1 == 1 {
                        b.coeff = -b.coeff;
                    }
                }
            }
            Op::Y(q) => {
                for b in &mut self.branches {
                    if (b.xs ^ b.zs) >> q & 1 == 1 {
                        b.coeff = -b.coeff;
                    }
                }
            }
            Op::Z(q) => {
                for b in &mut self.branches {
                    if b.xs >> q & 1 == 1 {
                        b.coeff = -b.coeff;
                    }
                }
            }
            // S = rz(pi/2) up to phase: X -> Y exactly.
            Op::S(q) => {
                for b in &mut self.branches {
                    if b.xs >> q & 1 == 1 {
                        b.coeff *= Complex64::new(0.0, 1.0);
                        b.zs ^= 1 << q;
                    }
                }
            }
            Op::T(q) => self.apply_rz(q, std::f64::consts::FRAC_PI_4)?,
            Op::Tdag(q) => self.apply_rz(q, -std::f64::consts::FRAC_PI_4)?,
            Op::Rz { q, theta } => self.apply_rz(q, theta)?,
            Op::R { q, theta, phi } => self.apply_r(q, theta, phi)?,
            Op::Cnot(c, t) => {
                for b in &mut self.branches {
                    b.xs ^= (b.xs >> c & 1) << t;
                    b.zs ^= (b.zs >> t & 1) << c;
                }
            }
            Op::Cz(a, q) => {
                for b in &mut self.branches {
                    let xa = b.xs >> a & 1;
                    let xq = b.xs >> q & 1;
                    if xa & xq == 1 {
                        b.coeff = -b.coeff;
                    }
                    b.zs ^= (xa << q) | (xq << a);
                }
            }
            Op::Swap(a, q) => {
                for b in &mut self.branches {
                    b.xs = swap_bits(b.xs, a, q);
                    b.zs = swap_bits(b.zs, a, q);
                }
            }
            // exp(-i pi/4 XX): P commuting with X_a X_b is fixed; an
            // anticommuting P picks up the factor i X_a X_b on the right.
            Op::Xx(a, q) => {
                let pair = (1 << a) | (1 << q);
                for b in &mut self.branches {
                    if parity(b.zs & pair) {
                        // P * (i Xa Xb): the X pair crosses one Z letter.
                        b.coeff *= Complex64::new(0.0, -1.0);
                        b.xs ^= pair;
                    }
                }
            }
            // Diagonal gate: commutes with Z-only frames; an X letter on the
            // trio conjugates into a four-term controlled-phase sum.
            Op::Ccz(a, b, c) => {
                let wires = [a, b, c];
                let trio = (1 << a) | (1 << b) | (1 << c);
                if self.branches.iter().any(|br| br.xs & trio != 0) {
                    self.apply_ccz_crossing(&wires)?;
                }
            }
            Op::Init(_) | Op::Idle(_) | Op::FaultMarker(_) | Op::Reset(_) | Op::Measure(_) => {
                return Ok(false)
            }
        }
        Ok(true)
    }

    fn apply_h(&mut self, q: usize) {
        for b in &mut self.branches {
            let x = b.xs >> q & 1;
            let z = b.zs >> q & 1;
            if x & z == 1 {
                // H (XZ) H = ZX = -XZ.
                b.coeff = -b.coeff;
            }
            let diff = x ^ z;
            b.xs ^= diff << q;
            b.zs ^= diff << q;
        }
    }

    /// `ccz X^s ccz = X^s D` with `D = diag (-1)^(h(v) xor h(v xor s))` on
    /// the trio, `h` the AND of the three bits. The crossing phase is a
    /// quadratic form of rank two, so its Walsh expansion over Z monomials
    /// has exactly four terms of weight 1/2: each crossing branch splits
    /// four ways, the same cost as crossing a decomposed ccz.
    fn apply_ccz_crossing(&mut self, wires: &[usize; 3]) -> Result<(), Bail> {
        let h = |v: usize| v & (v >> 1) & (v >> 2) & 1;
        let mut out: Vec<Branch> = Vec::with_capacity(self.branches.len() * 4);
        for br in &self.branches {
            let sigma =
                (0..3).fold(0usize, |s, j| s | (((br.xs >> wires[j]) as usize & 1) << j));
            if sigma == 0 {
                out.push(*br);
                continue;
            }
            for t in 0..8usize {
                // Walsh coefficient of the crossing phase at monomial Z^t.
                let mut acc = 0i32;
                for v in 0..8usize {
                    let sign = h(v) ^ h(v ^ sigma) ^ ((v & t).count_ones() as usize & 1);
                    acc += 1 - 2 * sign as i32;
                }
                if acc == 0 {
                    continue;
                }
                let zt =
                    (0..3).fold(0u64, |m, j| m | ((((t >> j) & 1) as u64) << wires[j]));
                out.push(Branch {
                    coeff: br.coeff * (acc as f64 / 8.0),
                    xs: br.xs,
                    zs: br.zs ^ zt,
                });
            }
        }
        self.branches = out;
        self.coalesce()
    }

    /// rz(theta) = exp(-i theta Z / 2): a frame X letter on the wire turns
    /// into `cos(theta) X + i sin(theta) XZ`, splitting the branch.
    fn apply_rz(&mut self, q: usize, theta: f64) -> Result<(), Bail> {
        if self.branches.iter().all(|b| b.xs >> q & 1 == 0) {
            return Ok(()); // diagonal against diagonal
        }
        let (sin, cos) = theta.sin_cos();
        let isin = Complex64::new(0.0, sin);
        let mut out: Vec<Branch> = Vec::with_capacity(self.branches.len() * 2);
        for b in &self.branches {
            if b.xs >> q & 1 == 0 {
                out.push(*b);
            } else {
                out.push(Branch { coeff: b.coeff * cos, ..*b });
                out.push(Branch { coeff: b.coeff * isin, xs: b.xs, zs: b.zs ^ (1 << q) });
            }
        }
        self.branches = out;
        self.coalesce()
    }

    /// R(theta, phi) = exp(-i theta/2 (cos phi X + sin phi Y)): rotate the
    /// wire letter's Pauli vector about the equatorial axis (cos phi,
    /// sin phi, 0) by theta (Rodrigues formula), splitting in up to three.
    fn apply_r(&mut self, q: usize, theta: f64, phi: f64) -> Result<(), Bail> {
        if self.branches.iter().all(|b| (b.xs | b.zs) >> q & 1 == 0) {
            return Ok(());
        }
        let axis = [phi.cos(), phi.sin(), 0.0];
        let (st, ct) = theta.sin_cos();
        let mut out: Vec<Branch> = Vec::with_capacity(self.branches.len() * 3);
        for b in &self.branches {
            let x = b.xs >> q & 1;
            let z = b.zs >> q & 1;
            if x | z == 0 {
                out.push(*b);
                continue;
            }
            // Canonical wire letter as (phase factor) * (unit Pauli vector).
            let (v, letter_phase) = match (x, z) {
                (1, 0) => ([1.0, 0.0, 0.0], Complex64::new(1.0, 0.0)),
                (0, 1) => ([0.0, 0.0, 1.0], Complex64::new(1.0, 0.0)),
                _ => ([0.0, 1.0, 0.0], Complex64::new(0.0, -1.0)), // XZ = -iY
            };
            let cross = [
                axis[1] * v[2] - axis[2] * v[1],
                axis[2] * v[0] - axis[0] * v[2],
                axis[0] * v[1] - axis[1] * v[0],
            ];
            let dot = axis[0] * v[0] + axis[1] * v[1] + axis[2] * v[2];
            let rot = [
                v[0] * ct + cross[0] * st + axis[0] * dot * (1.0 - ct),
                v[1] * ct + cross[1] * st + axis[1] * dot * (1.0 - ct),
                v[2] * ct + cross[2] * st + axis[2] * dot * (1.0 - ct),
            ];
            let base = b.coeff * letter_phase;
            let clear_xs = b.xs & !(1 << q);
            let clear_zs = b.zs & !(1 << q);
            // X component.
            if rot[0] != 0.0 {
                out.push(Branch { coeff: base * rot[0], xs: clear_xs | (1 << q), zs: clear_zs });
            }
            // Y component: Y = i XZ in canonical order.
            if rot[1] != 0.0 {
                out.push(Branch {
                    coeff: base * Complex64::new(0.0, rot[1]),
                    xs: clear_xs | (1 << q),
                    zs: clear_zs | (1 << q),
                });
            }
            // Z component.
            if rot[2] != 0.0 {
                out.push(Branch { coeff: base * rot[2], xs: clear_xs, zs: clear_zs | (1 << q) });
            }
        }
        self.branches = out;
        self.coalesce()
    }

    /// Consume a reset on wire `q` whose noiseless pre-reset bit is `bit`.
    ///
    /// When every branch agrees on `x_q` the reset outcome is the same
    /// classical state `bit XOR x_q` in all of them, the projection scalar
    /// is `(-1)^{z_q * bit}`, and the wire letters are absorbed. Branches
    /// that disagree on `x_q` entangle the (unrecorded) reset outcome with
    /// the branch index; a reset is a swap with a fresh `|0>`, so this is
    /// expressed exactly by relabeling the wire's letters onto the virtual
    /// environment wire `env`, which readout sampling marginalizes over.
    /// Returns whether `env` was claimed.
    pub fn apply_reset(&mut self, q: usize, bit: bool, env: usize) -> Result<bool, Bail> {
        let wire = 1u64 << q;
        let x0 = self.branches[0].xs & wire;
        if self.branches.iter().any(|b| b.xs & wire != x0) {
            if env >= u64::BITS as usize {
                return Err(Bail::EnvExhausted);
            }
            for b in &mut self.branches {
                let x = b.xs >> q & 1;
                let z = b.zs >> q & 1;
                b.xs = (b.xs & !wire) | (x << env);
                b.zs = (b.zs & !wire) | (z << env);
            }
            if bit {
                self.env_bits |= 1 << env;
            }
            // The move is a bijection on masks, so no merging can occur.
            return Ok(true);
        }
        for b in &mut self.branches {
            if bit && b.zs & wire != 0 {
                b.coeff = -b.coeff;
            }
            b.xs &= !wire;
            b.zs &= !wire;
        }
        self.coalesce()?;
        Ok(false)
    }

    /// Conjugate through the terminal basis-change pulses (X basis: `h`;
    /// Y basis: `rz(-pi/2)` then `h`). After this the frame sits directly
    /// against the rotated noiseless state sampled by the readout.
    pub fn apply_readout_rotations(&mut self, bases: &[Option<MeasBasis>]) -> Result<(), Bail> {
        for (q, b) in bases.iter().enumerate() {
            match b {
                Some(MeasBasis::X) => self.apply_h(q),
                Some(MeasBasis::Y) => {
                    // Quarter turn: X -> -i XZ exactly, no split.
                    for br in &mut self.branches {
                        if br.xs >> q & 1 == 1 {
                            br.coeff *= Complex64::new(0.0, -1.0);
                            br.zs ^= 1 << q;
                        }
                    }
                    self.apply_h(q);
                }
                Some(MeasBasis::Z) | None => {}
            }
        }
        Ok(())
    }

    /// Merge equal-mask branches, drop cancellation residue, enforce the cap.
    fn coalesce(&mut self) -> Result<(), Bail> {
        if self.branches.len() > 1 {
            self.branches.sort_unstable_by_key(|b| (b.xs, b.zs));
            let mut merged: Vec<Branch> = Vec::with_capacity(self.branches.len());
            for b in &self.branches {
                match merged.last_mut() {
                    Some(m) if m.xs == b.xs && m.zs == b.zs => m.coeff += b.coeff,
                    _ => merged.push(*b),
                }
            }
            merged.retain(|b| b.coeff.norm_sqr() > COEFF_FLOOR_SQR);
            self.branches = merged;
        }
        if self.branches.is_empty() {
            // Cannot happen for a unitary frame; guard against collapse.
            return Err(Bail::BranchOverflow);
        }
        if self.branches.len() > MAX_BRANCHES {
            return Err(Bail::BranchOverflow);
        }
        Ok(())
    }
}

fn swap_bits(mask: u64, a: usize, b: usize) -> u64 {
    let ab = (mask >> a ^ mask >> b) & 1;
    mask ^ (ab << a) ^ (ab << b)
}
