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

//! Phase-tracked Pauli strings on up to 64 qubits.
//!
//! A string is stored as `i^k * X^xs * Z^zs` with `xs`/`zs` bitmasks (bit q =
//! qubit q) and `k` the phase exponent mod 4. All products and commutation
//! checks are exact, including the phase, which is what lets the code-algebra
//! tests assert identities like `Y⊗Y⊗Y⊗Y = (X⊗X⊗X⊗X)·(Z Z I I)·(I I Z Z)`
//! with sign and all.

use std::fmt;

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::statevec::StateVec;

/// Single-qubit Pauli letter.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Pauli {
    I,
    X,
    Y,
    Z,
}

/// `i^phase_pow * X^xs * Z^zs` on `n` qubits.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PauliString {
    n: usize,
    xs: u64,
    zs: u64,
    phase_pow: u8,
}

impl PauliString {
    pub fn identity(n: usize) -> Self {
        assert!(n <= 64, "pauli strings support at most 64 qubits");
        PauliString { n, xs: 0, zs: 0, phase_pow: 0 }
    }

    /// One letter on one qubit (identity elsewhere).
    pub fn single(n: usize, q: usize, p: Pauli) -> Result<Self> {
        if q >= n {
            return Err(Error::validation(format!(
                "qubit {q} out of range for {n}-qubit pauli string"
            )));
        }
        let mut ps = PauliString::identity(n);
        match p {
            Pauli::I => {}
            Pauli::X => ps.xs = 1 << q,
            Pauli::Z => ps.zs = 1 << q,
            Pauli::Y => {
                // Y = i * X * Z
                ps.xs = 1 << q;
                ps.zs = 1 << q;
                ps.phase_pow = 1;
            }
        }
        Ok(ps)
    }

    /// Ordered product of letters, e.g. `from_ops(4, &[(0, X), (1, X)])`.
    /// A qubit may appear more than once; letters multiply left to right.
    pub fn from_ops(n: usize, ops: &[(usize, Pauli)]) -> Result<Self> {
        let mut acc = PauliString::identity(n);
        for &(q, p) in ops {
            acc = acc.mul(&PauliString::single(n, q, p)?)?;
        }
        Ok(acc)
    }

    pub fn num_qubits(&self) -> usize {
        self.n
    }

    /// Group product `self * other` with exact phase tracking.
    pub fn mul(&self, other: &PauliString) -> Result<PauliString> {
        if self.n != other.n {
            return Err(Error::validation(
                "pauli product requires equal register sizes".to_string(),
            ));
        }
        // (X^xa Z^za)(X^xb Z^zb) = (-1)^{|za & xb|} X^{xa^xb} Z^{za^zb}
        let crossings = (self.zs & other.xs).count_ones() as u8;
        let phase_pow = (self.phase_pow + other.phase_pow + 2 * (crossings & 1)) & 3;
        Ok(PauliString {
            n: self.n,
            xs: self.xs ^ other.xs,
            zs: self.zs ^ other.zs,
            phase_pow,
        })
    }

    /// Multiply the scalar prefactor by `i`.
    pub fn times_i(&self) -> PauliString {
        PauliString {
            phase_pow: (self.phase_pow + 1) & 3,
            ..self.clone()
        }
    }

    pub fn commutes_with(&self, other: &PauliString) -> bool {
        let a = (self.xs & other.zs).count_ones();
        let b = (self.zs & other.xs).count_ones();
        (a + b) % 2 == 0
    }

    /// Number of qubits acted on non-trivially.
    pub fn weight(&self) -> usize {
        (self.xs | self.zs).count_ones() as usize
    }

    pub fn support(&self) -> Vec<usize> {
        (0..self.n).filter(|q| (self.xs | self.zs) >> q & 1 == 1).collect()
    }

    pub fn op_at(&self, q: usize) -> Pauli {
        match (self.xs >> q & 1, self.zs >> q & 1) {
            (0, 0) => Pauli::I,
            (1, 0) => Pauli::X,
            (0, 1) => Pauli::Z,
            (1, 1) => Pauli::Y,
            _ => unreachable!(),
        }
    }

    /// The overall scalar in front of the tensor of letters shown by
    /// `Display`: one of +1, +i, -1, -i.
    pub fn letter_phase(&self) -> Complex64 {
        // X^x Z^z on one qubit is -i Y, so each Y letter absorbs one factor i.
        let ys = (self.xs & self.zs).count_ones() as u8;
        let m = (self.phase_pow + 4 - (ys & 3)) & 3;
        match m {
            0 => Complex64::new(1.0, 0.0),
            1 => Complex64::new(0.0, 1.0),
            2 => Complex64::new(-1.0, 0.0),
            _ => Complex64::new(0.0, -1.0),
        }
    }

    pub fn is_identity(&self) -> bool {
        self.xs == 0 && self.zs == 0 && self.phase_pow == 0
    }

    pub fn is_identity_up_to_phase(&self) -> bool {
        self.xs == 0 && self.zs == 0
    }

    pub fn equals_up_to_phase(&self, other: &PauliString) -> bool {
        self.n == other.n && self.xs == other.xs && self.zs == other.zs
    }

    /// Hermitian iff the Display phase is ±1.
    pub fn is_hermitian(&self) -> bool {
        let ys = (self.xs & self.zs).count_ones() as u8;
        (self.phase_pow + 4 - (ys & 3)) & 1 == 0
    }

    /// Apply the operator to a state: `|b> -> i^k (-1)^{|b & zs|} |b ^ xs>`.
    pub fn apply(&self, sv: &mut StateVec) -> Result<()> {
        if sv.num_qubits() != self.n {
            return Err(Error::validation(
                "pauli string and state have different sizes".to_string(),
            ));
        }
        let phase = match self.phase_pow {
            0 => Complex64::new(1.0, 0.0),
            1 => Complex64::new(0.0, 1.0),
            2 => Complex64::new(-1.0, 0.0),
            _ => Complex64::new(0.0, -1.0),
        };
        let dim = sv.dim();
        let old = sv.amplitudes().to_vec();
        let mut new = vec![Complex64::new(0.0, 0.0); dim];
        let xs = self.xs as usize;
        let zs = self.zs as usize;
        for (b, amp) in old.iter().enumerate() {
            let sign = if ((b & zs).count_ones()) % 2 == 1 { -1.0 } else { 1.0 };
            new[b ^ xs] = phase * Complex64::new(sign, 0.0) * amp;
        }
        sv.set_amplitudes(&new)
    }

    /// `<psi| P |psi>` (complex in general; real when `P` is Hermitian).
    pub fn expectation(&self, sv: &StateVec) -> Result<Complex64> {
        if sv.num_qubits() != self.n {
            return Err(Error::validation(
                "pauli string and state have different sizes".to_string(),
            ));
        }
        let phase = match self.phase_pow {
            0 => Complex64::new(1.0, 0.0),
            1 => Complex64::new(0.0, 1.0),
            2 => Complex64::new(-1.0, 0.0),
            _ => Complex64::new(0.0, -1.0),
        };
        let xs = self.xs as usize;
        let zs = self.zs as usize;
        let amps = sv.amplitudes();
        let mut acc = Complex64::new(0.0, 0.0);
        for (b, amp) in amps.iter().enumerate() {
            let sign = if ((b & zs).count_ones()) % 2 == 1 { -1.0 } else { 1.0 };
            acc += amps[b ^ xs].conj() * phase * Complex64::new(sign, 0.0) * amp;
        }
        Ok(acc)
    }

    /// X-part and Z-part bitmasks (bit q = qubit q).
    pub fn masks(&self) -> (u64, u64) {
        (self.xs, self.zs)
    }
}

impl fmt::Display for PauliString {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let ys = (self.xs & self.zs).count_ones() as u8;
        let m = (self.phase_pow + 4 - (ys & 3)) & 3;
        let prefix = match m {
            0 => "+",
            1 => "+i",
            2 => "-",
            _ => "-i",
        };
        write!(f, "{prefix}")?;
        if self.xs == 0 && self.zs == 0 {
            return write!(f, "I");
        }
        for q in 0..self.n {
            match self.op_at(q) {
                Pauli::I => {}
                Pauli::X => write!(f, "X{q}")?,
                Pauli::Y => write!(f, "Y{q}")?,
                Pauli::Z => write!(f, "Z{q}")?,
            }
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use num_complex::Complex64;
    use Pauli::*;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn single_letters_act_like_gates() {
        // Compare PauliString::apply against the state-vector gate kernels.
        for (letter, _name) in [(X, "x"), (Y, "y"), (Z, "z")] {
            for q in 0..3 {
                let mut a = StateVec::new(3).unwrap();
                a.h(0).unwrap();
                a.cx(0, 1).unwrap();
                a.t(2).unwrap();
                let mut b = a.clone();
                PauliString::single(3, q, letter).unwrap().apply(&mut a).unwrap();
                match letter {
                    X => b.x(q).unwrap(),
                    Y => b.y(q).unwrap(),
                    Z => b.z(q).unwrap(),
                    I => {}
                }
                for (x, y) in a.amplitudes().iter().zip(b.amplitudes()) {
                    assert!((x - y).norm() < 1e-12);
                }
            }
        }
    }

    #[test]
    fn product_phases_are_exact() {
        let n = 1;
        let x = PauliString::single(n, 0, X).unwrap();
        let y = PauliString::single(n, 0, Y).unwrap();
        let z = PauliString::single(n, 0, Z).unwrap();

        // X Z = -i Y
        let xz = x.mul(&z).unwrap();
        assert!(xz.equals_up_to_phase(&y));
        assert_eq!(xz.letter_phase(), c(0.0, -1.0));
        assert_eq!(format!("{xz}"), "-iY0");

        // Z X = +i Y
        let zx = z.mul(&x).unwrap();
        assert_eq!(zx.letter_phase(), c(0.0, 1.0));

        // X Y = i Z, Y X = -i Z, Y Y = I
        assert_eq!(x.mul(&y).unwrap().letter_phase(), c(0.0, 1.0));
        assert!(x.mul(&y).unwrap().equals_up_to_phase(&z));
        assert_eq!(y.mul(&x).unwrap().letter_phase(), c(0.0, -1.0));
        assert!(y.mul(&y).unwrap().is_identity());
    }

    #[test]
    fn anticommutation_table() {
        let pairs = [(X, Z), (X, Y), (Y, Z)];
        for (a, b) in pairs {
            let pa = PauliString::single(1, 0, a).unwrap();
            let pb = PauliString::single(1, 0, b).unwrap();
            assert!(!pa.commutes_with(&pb), "{a:?} vs {b:?} on same qubit");
        }
        let pa = PauliString::single(2, 0, X).unwrap();
        let pb = PauliString::single(2, 1, Z).unwrap();
        assert!(pa.commutes_with(&pb));
        // Two-qubit overlap: XX vs ZZ commute (two crossings).
        let xx = PauliString::from_ops(2, &[(0, X), (1, X)]).unwrap();
        let zz = PauliString::from_ops(2, &[(0, Z), (1, Z)]).unwrap();
        assert!(xx.commutes_with(&zz));
    }

    #[test]
    fn four_y_equals_product_of_stabilizer_generators() {
        // Y Y Y Y = (X X X X) (Z Z I I) (I I Z Z) exactly, phase +1.
        let n = 4;
        let yyyy = PauliString::from_ops(n, &[(0, Y), (1, Y), (2, Y), (3, Y)]).unwrap();
        let xxxx = PauliString::from_ops(n, &[(0, X), (1, X), (2, X), (3, X)]).unwrap();
        let zz01 = PauliString::from_ops(n, &[(0, Z), (1, Z)]).unwrap();
        let zz23 = PauliString::from_ops(n, &[(2, Z), (3, Z)]).unwrap();
        let product = xxxx.mul(&zz01).unwrap().mul(&zz23).unwrap();
        assert_eq!(yyyy, product);
        assert_eq!(product.letter_phase(), c(1.0, 0.0));
    }

    #[test]
    fn expectation_values_on_ghz() {
        let mut ghz = StateVec::new(3).unwrap();
        ghz.h(0).unwrap();
        ghz.cx(0, 1).unwrap();
        ghz.cx(0, 2).unwrap();
        let xxx = PauliString::from_ops(3, &[(0, X), (1, X), (2, X)]).unwrap();
        let zz = PauliString::from_ops(3, &[(0, Z), (1, Z)]).unwrap();
        let z0 = PauliString::single(3, 0, Z).unwrap();
        let yyx = PauliString::from_ops(3, &[(0, Y), (1, Y), (2, X)]).unwrap();
        assert!((xxx.expectation(&ghz).unwrap() - c(1.0, 0.0)).norm() < 1e-12);
        assert!((zz.expectation(&ghz).unwrap() - c(1.0, 0.0)).norm() < 1e-12);
        assert!(z0.expectation(&ghz).unwrap().norm() < 1e-12);
        // Y Y X stabilizes GHZ with sign -1.
        assert!((yyx.expectation(&ghz).unwrap() - c(-1.0, 0.0)).norm() < 1e-12);
    }

    #[test]
    fn hermiticity_and_weight() {
        let y = PauliString::single(1, 0, Y).unwrap();
        assert!(y.is_hermitian());
        let x = PauliString::single(1, 0, X).unwrap();
        let z = PauliString::single(1, 0, Z).unwrap();
        let xz = x.mul(&z).unwrap();
        assert!(!xz.is_hermitian()); // -iY
        let s = PauliString::from_ops(5, &[(0, X), (3, Y), (4, Z)]).unwrap();
        assert_eq!(s.weight(), 3);
        assert_eq!(s.support(), vec![0, 3, 4]);
        assert_eq!(s.op_at(3), Y);
        assert_eq!(s.op_at(1), I);
    }

    #[test]
    fn apply_matches_expectation() {
        let mut sv = StateVec::new(2).unwrap();
        sv.h(0).unwrap();
        sv.cx(0, 1).unwrap();
        let p = PauliString::from_ops(2, &[(0, Y), (1, Y)]).unwrap();
        let direct = p.expectation(&sv).unwrap();
        let mut applied = sv.clone();
        p.apply(&mut applied).unwrap();
        let via_inner = sv.inner(&applied);
        assert!((direct - via_inner).norm() < 1e-12);
        // Bell pair: <YY> = -1.
        assert!((direct - c(-1.0, 0.0)).norm() < 1e-12);
    }
}
