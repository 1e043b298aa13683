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

//! Dense state-vector backend for exact pure-state simulation.
//!
//! Conventions used across the whole crate:
//! - Qubit `q` lives on bit `q` of the basis-state index, so qubit 0 is the
//!   least-significant bit.
//! - Human-readable bitstrings put qubit 0 at the **leftmost** character:
//!   `"011"` means qubit 0 = 0, qubit 1 = 1, qubit 2 = 1 (basis index 6).
//!
//! The register is capped at [`MAX_QUBITS`] qubits; constructors return a
//! validation error above that.

use num_complex::Complex64;
use rand::Rng;

use crate::error::{Error, Result};

/// Largest register the dense backend accepts (16 MiB of amplitudes).
pub const MAX_QUBITS: usize = 24;

const ZERO: Complex64 = Complex64::new(0.0, 0.0);
const ONE: Complex64 = Complex64::new(1.0, 0.0);

/// Pure state of `n` qubits stored as `2^n` complex amplitudes.
#[derive(Clone, Debug)]
pub struct StateVec {
    n: usize,
    amps: Vec<Complex64>,
}

impl StateVec {
    /// All-zeros computational basis state |0...0>.
    pub fn new(num_qubits: usize) -> Result<Self> {
        if num_qubits == 0 || num_qubits > MAX_QUBITS {
            return Err(Error::validation(format!(
                "register size {num_qubits} outside supported range 1..={MAX_QUBITS}"
            )));
        }
        let mut amps = vec![ZERO; 1 << num_qubits];
        amps[0] = ONE;
        Ok(StateVec { n: num_qubits, amps })
    }

    /// Rewind this register to |0...0> without reallocating.
    pub fn reset_all_zero(&mut self) {
        self.amps.fill(ZERO);
        self.amps[0] = ONE;
    }

    pub fn num_qubits(&self) -> usize {
        self.n
    }

    pub fn dim(&self) -> usize {
        self.amps.len()
    }

    pub fn amplitudes(&self) -> &[Complex64] {
        &self.amps
    }

    /// Overwrite the amplitudes directly. The slice length must be `2^n` for
    /// the current `n`; the caller is responsible for normalization.
    pub fn set_amplitudes(&mut self, amps: &[Complex64]) -> Result<()> {
        if amps.len() != self.amps.len() {
            return Err(Error::validation(format!(
                "amplitude vector length {} does not match register dimension {}",
                amps.len(),
                self.amps.len()
            )));
        }
        self.amps.copy_from_slice(amps);
        Ok(())
    }

    pub fn norm_sqr(&self) -> f64 {
        self.amps.iter().map(|a| a.norm_sqr()).sum()
    }

    pub fn probability(&self, basis_index: usize) -> f64 {
        self.amps[basis_index].norm_sqr()
    }

    fn check_qubit(&self, q: usize) -> Result<()> {
        if q >= self.n {
            return Err(Error::validation(format!(
                "qubit {q} out of range for {}-qubit register",
                self.n
            )));
        }
        Ok(())
    }

    // ------------------------------------------------------------------
    // One-qubit kernels. All walk the vector in stride-blocks so the two
    // amplitudes of each (q=0, q=1) pair sit `1 << q` apart.
    // ------------------------------------------------------------------

    /// Apply an arbitrary one-qubit unitary `m` (row-major `[[m00, m01], [m10, m11]]`).
    pub fn apply_one_qubit(&mut self, q: usize, m: &[[Complex64; 2]; 2]) -> Result<()> {
        self.check_qubit(q)?;
        let step = 1usize << q;
        let dim = self.amps.len();
        let mut base = 0;
        while base < dim {
            for i in base..base + step {
                let j = i + step;
                let a0 = self.amps[i];
                let a1 = self.amps[j];
                self.amps[i] = m[0][0] * a0 + m[0][1] * a1;
                self.amps[j] = m[1][0] * a0 + m[1][1] * a1;
            }
            base += step << 1;
        }
        Ok(())
    }

    /// Hadamard.
    pub fn h(&mut self, q: usize) -> Result<()> {
        self.check_qubit(q)?;
        let inv_sqrt2 = std::f64::consts::FRAC_1_SQRT_2;
        let step = 1usize << q;
        let dim = self.amps.len();
        let mut base = 0;
        while base < dim {
            for i in base..base + step {
                let j = i + step;
                let a0 = self.amps[i];
                let a1 = self.amps[j];
                self.amps[i] = (a0 + a1) * inv_sqrt2;
                self.amps[j] = (a0 - a1) * inv_sqrt2;
            }
            base += step << 1;
        }
        Ok(())
    }

    /// Pauli X.
    pub fn x(&mut self, q: usize) -> Result<()> {
        self.check_qubit(q)?;
        let step = 1usize << q;
        let dim = self.amps.len();
        let mut base = 0;
        while base < dim {
            for i in base..base + step {
                self.amps.swap(i, i + step);
            }
            base += step << 1;
        }
        Ok(())
    }

    /// Pauli Y.
    pub fn y(&mut self, q: usize) -> Result<()> {
        self.check_qubit(q)?;
        let plus_i = Complex64::new(0.0, 1.0);
        let minus_i = Complex64::new(0.0, -1.0);
        let step = 1usize << q;
        let dim = self.amps.len();
        let mut base = 0;
        while base < dim {
            for i in base..base + step {
                let j = i + step;
                let a0 = self.amps[i];
                let a1 = self.amps[j];
                self.amps[i] = minus_i * a1;
                self.amps[j] = plus_i * a0;
            }
            base += step << 1;
        }
        Ok(())
    }

    /// Pauli Z.
    pub fn z(&mut self, q: usize) -> Result<()> {
        self.phase(q, std::f64::consts::PI)
    }

    /// S = diag(1, i).
    pub fn s(&mut self, q: usize) -> Result<()> {
        self.phase(q, std::f64::consts::FRAC_PI_2)
    }

    /// T = diag(1, e^{i pi/4}).
    pub fn t(&mut self, q: usize) -> Result<()> {
        self.phase(q, std::f64::consts::FRAC_PI_4)
    }

    /// T^dagger = diag(1, e^{-i pi/4}).
    pub fn tdag(&mut self, q: usize) -> Result<()> {
        self.phase(q, -std::f64::consts::FRAC_PI_4)
    }

    /// diag(1, e^{i theta}) — phase on the |1> component.
    pub fn phase(&mut self, q: usize, theta: f64) -> Result<()> {
        self.check_qubit(q)?;
        let ph = Complex64::from_polar(1.0, theta);
        if theta == std::f64::consts::PI {
            // Exact sign flip for the Z special case.
            let mask = 1usize << q;
            for (idx, a) in self.amps.iter_mut().enumerate() {
                if idx & mask != 0 {
                    *a = -*a;
                }
            }
            return Ok(());
        }
        let mask = 1usize << q;
        for (idx, a) in self.amps.iter_mut().enumerate() {
            if idx & mask != 0 {
                *a *= ph;
            }
        }
        Ok(())
    }

    /// RZ(theta) = diag(e^{-i theta/2}, e^{+i theta/2}).
    pub fn rz(&mut self, q: usize, theta: f64) -> Result<()> {
        self.check_qubit(q)?;
        let ph0 = Complex64::from_polar(1.0, -theta / 2.0);
        let ph1 = Complex64::from_polar(1.0, theta / 2.0);
        let mask = 1usize << q;
        for (idx, a) in self.amps.iter_mut().enumerate() {
            *a *= if idx & mask == 0 { ph0 } else { ph1 };
        }
        Ok(())
    }

    /// R(theta, phi) = exp(-i theta/2 (cos(phi) X + sin(phi) Y)):
    /// [[cos(theta/2), -i e^{-i phi} sin(theta/2)],
    ///  [-i e^{+i phi} sin(theta/2), cos(theta/2)]].
    pub fn r(&mut self, q: usize, theta: f64, phi: f64) -> Result<()> {
        let c = Complex64::new((theta / 2.0).cos(), 0.0);
        let s = (theta / 2.0).sin();
        let m01 = Complex64::new(0.0, -1.0) * Complex64::from_polar(1.0, -phi) * s;
        let m10 = Complex64::new(0.0, -1.0) * Complex64::from_polar(1.0, phi) * s;
        self.apply_one_qubit(q, &[[c, m01], [m10, c]])
    }

    // ------------------------------------------------------------------
    // Two- and three-qubit kernels.
    // ------------------------------------------------------------------

    /// Controlled-X with control `c`, target `t`.
    pub fn cx(&mut self, c: usize, t: usize) -> Result<()> {
        self.check_qubit(c)?;
        self.check_qubit(t)?;
        if c == t {
            return Err(Error::validation("cx control equals target".to_string()));
        }
        let cm = 1usize << c;
        let tm = 1usize << t;
        for i in 0..self.amps.len() {
            if i & cm != 0 && i & tm == 0 {
                self.amps.swap(i, i | tm);
            }
        }
        Ok(())
    }

    /// Controlled-Z (symmetric in its arguments).
    pub fn cz(&mut self, a: usize, b: usize) -> Result<()> {
        self.check_qubit(a)?;
        self.check_qubit(b)?;
        if a == b {
            return Err(Error::validation("cz qubits must differ".to_string()));
        }
        let m = (1usize << a) | (1usize << b);
        for (idx, amp) in self.amps.iter_mut().enumerate() {
            if idx & m == m {
                *amp = -*amp;
            }
        }
        Ok(())
    }

    /// SWAP.
    pub fn swap(&mut self, a: usize, b: usize) -> Result<()> {
        self.check_qubit(a)?;
        self.check_qubit(b)?;
        if a == b {
            return Err(Error::validation("swap qubits must differ".to_string()));
        }
        let am = 1usize << a;
        let bm = 1usize << b;
        for i in 0..self.amps.len() {
            if i & am != 0 && i & bm == 0 {
                self.amps.swap(i, i ^ am ^ bm);
            }
        }
        Ok(())
    }

    /// Doubly-controlled Z (symmetric in all three arguments).
    pub fn ccz(&mut self, a: usize, b: usize, c: usize) -> Result<()> {
        self.check_qubit(a)?;
        self.check_qubit(b)?;
        self.check_qubit(c)?;
        if a == b || a == c || b == c {
            return Err(Error::validation("ccz qubits must be distinct".to_string()));
        }
        let m = (1usize << a) | (1usize << b) | (1usize << c);
        for (idx, amp) in self.amps.iter_mut().enumerate() {
            if idx & m == m {
                *amp = -*amp;
            }
        }
        Ok(())
    }

    /// Moelmer-Soerensen style coupling exp(-i theta/2 X⊗X).
    pub fn xx(&mut self, a: usize, b: usize, theta: f64) -> Result<()> {
        self.check_qubit(a)?;
        self.check_qubit(b)?;
        if a == b {
            return Err(Error::validation("xx qubits must differ".to_string()));
        }
        let c = (theta / 2.0).cos();
        let s = (theta / 2.0).sin();
        let minus_is = Complex64::new(0.0, -s);
        let am = 1usize << a;
        let bm = 1usize << b;
        let flip = am | bm;
        // Each orbit pairs i with i ^ flip; enumerate each once via bit a clear.
        for i in 0..self.amps.len() {
            if i & am == 0 {
                let j = i ^ flip;
                let a0 = self.amps[i];
                let a1 = self.amps[j];
                self.amps[i] = c * a0 + minus_is * a1;
                self.amps[j] = c * a1 + minus_is * a0;
            }
        }
        Ok(())
    }

    /// Apply `exp(-i phi/2 Z)` simultaneously to every qubit in `mask` —
    /// a collective rotation with one shared angle, as produced by a
    /// common-mode field fluctuation. Equal to applying `rz(phi)` to each
    /// masked qubit, but in a single pass.
    pub fn collective_z_phase(&mut self, mask: u64, phi: f64) -> Result<()> {
        if mask >> self.n != 0 {
            return Err(Error::validation(
                "collective phase mask addresses qubits outside the register".to_string(),
            ));
        }
        let m = mask.count_ones() as i32;
        if m == 0 {
            return Ok(());
        }
        // Eigenvalue of sum(Z) on a basis state with k ones inside the mask
        // is m - 2k; phase factor exp(-i phi (m - 2k)/2).
        let table: Vec<Complex64> = (0..=m)
            .map(|k| Complex64::from_polar(1.0, -phi * (m - 2 * k) as f64 / 2.0))
            .collect();
        let mask = mask as usize;
        for (idx, a) in self.amps.iter_mut().enumerate() {
            let k = (idx & mask).count_ones() as usize;
            *a *= table[k];
        }
        Ok(())
    }

    // ------------------------------------------------------------------
    // Measurement and projection.
    // ------------------------------------------------------------------

    /// Probability that qubit `q` reads 1 in the computational basis.
    pub fn prob_one(&self, q: usize) -> Result<f64> {
        self.check_qubit(q)?;
        let mask = 1usize << q;
        let mut p = 0.0;
        for (idx, a) in self.amps.iter().enumerate() {
            if idx & mask != 0 {
                p += a.norm_sqr();
            }
        }
        Ok(p)
    }

    /// Project qubit `q` onto `outcome` and renormalize.
    ///
    /// Returns the pre-projection probability of that outcome. If it is zero
    /// the state is left as the (unnormalizable) zero vector and the caller
    /// must discard this branch.
    pub fn project_qubit(&mut self, q: usize, outcome: bool) -> Result<f64> {
        self.check_qubit(q)?;
        let mask = 1usize << q;
        let keep_set = if outcome { mask } else { 0 };
        let mut p = 0.0;
        for (idx, a) in self.amps.iter_mut().enumerate() {
            if idx & mask == keep_set {
                p += a.norm_sqr();
            } else {
                *a = ZERO;
            }
        }
        if p > 0.0 {
            let scale = 1.0 / p.sqrt();
            for a in self.amps.iter_mut() {
                *a *= Complex64::new(scale, 0.0);
            }
        }
        Ok(p)
    }

    /// Projective computational-basis measurement of one qubit.
    pub fn measure_qubit<R: Rng + ?Sized>(&mut self, q: usize, rng: &mut R) -> Result<bool> {
        let p1 = self.prob_one(q)?;
        let outcome = rng.gen::<f64>() < p1;
        self.project_qubit(q, outcome)?;
        Ok(outcome)
    }

    /// Measure qubit `q` and flip it back to |0> if it read 1.
    pub fn reset_qubit<R: Rng + ?Sized>(&mut self, q: usize, rng: &mut R) -> Result<bool> {
        let outcome = self.measure_qubit(q, rng)?;
        if outcome {
            self.x(q)?;
        }
        Ok(outcome)
    }

    /// Sample a full computational-basis index from the Born distribution.
    pub fn sample_index<R: Rng + ?Sized>(&self, rng: &mut R) -> usize {
        let u: f64 = rng.gen::<f64>() * self.norm_sqr();
        let mut acc = 0.0;
        for (idx, a) in self.amps.iter().enumerate() {
            acc += a.norm_sqr();
            if u < acc {
                return idx;
            }
        }
        self.amps.len() - 1
    }

    /// Born probabilities of every basis index.
    pub fn probabilities(&self) -> Vec<f64> {
        self.amps.iter().map(|a| a.norm_sqr()).collect()
    }

    /// Inner product <self|other>.
    pub fn inner(&self, other: &StateVec) -> Complex64 {
        self.amps
            .iter()
            .zip(other.amps.iter())
            .map(|(a, b)| a.conj() * b)
            .sum()
    }

    /// |<self|other>|^2 — phase-insensitive overlap of normalized states.
    pub fn fidelity(&self, other: &StateVec) -> f64 {
        self.inner(other).norm_sqr()
    }
}

/// Render a basis index as a bitstring with qubit 0 leftmost.
pub fn index_to_bitstring(index: usize, num_qubits: usize) -> String {
    (0..num_qubits)
        .map(|q| if index >> q & 1 == 1 { '1' } else { '0' })
        .collect()
}

/// Parse a bitstring with qubit 0 leftmost back into a basis index.
pub fn bitstring_to_index(bits: &str) -> Result<usize> {
    let mut index = 0usize;
    for (q, ch) in bits.chars().enumerate() {
        match ch {
            '0' => {}
            '1' => index |= 1 << q,
            _ => {
                return Err(Error::validation(format!(
                    "bitstring may only contain 0/1, found {ch:?}"
                )))
            }
        }
    }
    Ok(index)
}
