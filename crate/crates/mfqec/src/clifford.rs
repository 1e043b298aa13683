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

//! Heisenberg propagation of Pauli strings through Clifford sub-circuits.
//!
//! `conjugate_through_ops` computes `U P U^dagger` for the unitary `U` of an
//! op sequence. It is the workhorse behind readout derivation: a stabilizer
//! that holds before the readout stage, pushed through the mapping fans and
//! basis-change pulses, lands on the raw-readout frame where a pure-Z string
//! over measured qubits is exactly a checkable bit parity.
//!
//! Conjugation tables are not hand-entered: they are computed numerically
//! from the gate matrices once and cached, so a table bug would have to
//! survive the dense-matrix cross-checks in the unit tests.
//!
//! Non-Clifford operations (`t`, `rz` at odd angles, `ccz`, `r`) are allowed
//! only when they act trivially on the string (diagonal gates on I/Z legs,
//! `r` on I legs); anything else is an error — such pushes have no Pauli
//! answer.

use std::sync::OnceLock;

use num_complex::Complex64;

use crate::circuit::Op;
use crate::error::{Error, Result};
use crate::pauli::{Pauli, PauliString};

const LETTERS: [Pauli; 4] = [Pauli::I, Pauli::X, Pauli::Y, Pauli::Z];

type C = Complex64;

fn cplx(re: f64, im: f64) -> C {
    C::new(re, im)
}

fn letter_matrix(p: Pauli) -> [[C; 2]; 2] {
    match p {
        Pauli::I => [[cplx(1.0, 0.0), cplx(0.0, 0.0)], [cplx(0.0, 0.0), cplx(1.0, 0.0)]],
        Pauli::X => [[cplx(0.0, 0.0), cplx(1.0, 0.0)], [cplx(1.0, 0.0), cplx(0.0, 0.0)]],
        Pauli::Y => [[cplx(0.0, 0.0), cplx(0.0, -1.0)], [cplx(0.0, 1.0), cplx(0.0, 0.0)]],
        Pauli::Z => [[cplx(1.0, 0.0), cplx(0.0, 0.0)], [cplx(0.0, 0.0), cplx(-1.0, 0.0)]],
    }
}

fn mul2(a: &[[C; 2]; 2], b: &[[C; 2]; 2]) -> [[C; 2]; 2] {
    let mut out = [[cplx(0.0, 0.0); 2]; 2];
    for i in 0..2 {
        for j in 0..2 {
            for k in 0..2 {
                out[i][j] += a[i][k] * b[k][j];
            }
        }
    }
    out
}

fn dag2(a: &[[C; 2]; 2]) -> [[C; 2]; 2] {
    let mut out = [[cplx(0.0, 0.0); 2]; 2];
    for i in 0..2 {
        for j in 0..2 {
            out[i][j] = a[j][i].conj();
        }
    }
    out
}

/// Match a 2x2 matrix against `sign * letter`; signs are always ±1 for
/// Clifford conjugations of Hermitian Paulis.
fn match_letter_1q(m: &[[C; 2]; 2]) -> Option<(f64, Pauli)> {
    for letter in LETTERS {
        let lm = letter_matrix(letter);
        for sign in [1.0, -1.0] {
            let mut ok = true;
            for i in 0..2 {
                for j in 0..2 {
                    if (m[i][j] - lm[i][j] * cplx(sign, 0.0)).norm() > 1e-9 {
                        ok = false;
                    }
                }
            }
            if ok {
                return Some((sign, letter));
            }
        }
    }
    None
}

/// Conjugation table for a one-qubit Clifford: letter -> (sign, letter).
fn table_1q(u: &[[C; 2]; 2]) -> Option<[(f64, Pauli); 4]> {
    let ud = dag2(u);
    let mut out = [(1.0, Pauli::I); 4];
    for (i, letter) in LETTERS.iter().enumerate() {
        let m = mul2(&mul2(u, &letter_matrix(*letter)), &ud);
        out[i] = match_letter_1q(&m)?;
    }
    Some(out)
}

type Mat4 = [[C; 4]; 4];

fn mul4(a: &Mat4, b: &Mat4) -> Mat4 {
    let mut out = [[cplx(0.0, 0.0); 4]; 4];
    for i in 0..4 {
        for j in 0..4 {
            for k in 0..4 {
                out[i][j] += a[i][k] * b[k][j];
            }
        }
    }
    out
}

fn dag4(a: &Mat4) -> Mat4 {
    let mut out = [[cplx(0.0, 0.0); 4]; 4];
    for i in 0..4 {
        for j in 0..4 {
            out[i][j] = a[j][i].conj();
        }
    }
    out
}

/// Tensor of two letters with local bit 0 = first qubit.
fn pair_matrix(p0: Pauli, p1: Pauli) -> Mat4 {
    let a = letter_matrix(p0);
    let b = letter_matrix(p1);
    let mut out = [[cplx(0.0, 0.0); 4]; 4];
    for i0 in 0..2 {
        for j0 in 0..2 {
            for i1 in 0..2 {
                for j1 in 0..2 {
                    out[i1 * 2 + i0][j1 * 2 + j0] = a[i0][j0] * b[i1][j1];
                }
            }
        }
    }
    out
}

fn match_letter_2q(m: &Mat4) -> Option<(f64, Pauli, Pauli)> {
    for p0 in LETTERS {
        for p1 in LETTERS {
            let lm = pair_matrix(p0, p1);
            for sign in [1.0, -1.0] {
                let mut ok = true;
                'outer: for i in 0..4 {
                    for j in 0..4 {
                        if (m[i][j] - lm[i][j] * cplx(sign, 0.0)).norm() > 1e-9 {
                            ok = false;
                            break 'outer;
                        }
                    }
                }
                if ok {
                    return Some((sign, p0, p1));
                }
            }
        }
    }
    None
}

fn table_2q(u: &Mat4) -> Option<[[(f64, Pauli, Pauli); 4]; 4]> {
    let ud = dag4(u);
    let mut out = [[(1.0, Pauli::I, Pauli::I); 4]; 4];
    for (i, p0) in LETTERS.iter().enumerate() {
        for (j, p1) in LETTERS.iter().enumerate() {
            let m = mul4(&mul4(u, &pair_matrix(*p0, *p1)), &ud);
            out[i][j] = match_letter_2q(&m)?;
        }
    }
    Some(out)
}

fn letter_index(p: Pauli) -> usize {
    match p {
        Pauli::I => 0,
        Pauli::X => 1,
        Pauli::Y => 2,
        Pauli::Z => 3,
    }
}

// ---------------------------------------------------------------------
// Cached tables for the fixed Clifford gates.
// ---------------------------------------------------------------------

struct Tables {
    h: [(f64, Pauli); 4],
    x: [(f64, Pauli); 4],
    y: [(f64, Pauli); 4],
    z: [(f64, Pauli); 4],
    s: [(f64, Pauli); 4],
    sdg: [(f64, Pauli); 4],
    cx: [[(f64, Pauli, Pauli); 4]; 4],
    cz: [[(f64, Pauli, Pauli); 4]; 4],
    swap: [[(f64, Pauli, Pauli); 4]; 4],
    xx: [[(f64, Pauli, Pauli); 4]; 4],
}

fn tables() -> &'static Tables {
    static TABLES: OnceLock<Tables> = OnceLock::new();
    TABLES.get_or_init(|| {
        let inv_sqrt2 = std::f64::consts::FRAC_1_SQRT_2;
        let h = [
            [cplx(inv_sqrt2, 0.0), cplx(inv_sqrt2, 0.0)],
            [cplx(inv_sqrt2, 0.0), cplx(-inv_sqrt2, 0.0)],
        ];
        let s_mat = [[cplx(1.0, 0.0), cplx(0.0, 0.0)], [cplx(0.0, 0.0), cplx(0.0, 1.0)]];
        let sdg_mat = [[cplx(1.0, 0.0), cplx(0.0, 0.0)], [cplx(0.0, 0.0), cplx(0.0, -1.0)]];
        // Two-qubit matrices with local bit 0 = first argument of the op.
        let mut cx = [[cplx(0.0, 0.0); 4]; 4];
        // control = local qubit 0, target = local qubit 1
        cx[0][0] = cplx(1.0, 0.0);
        cx[2][2] = cplx(1.0, 0.0);
        cx[3][1] = cplx(1.0, 0.0);
        cx[1][3] = cplx(1.0, 0.0);
        let mut cz = [[cplx(0.0, 0.0); 4]; 4];
        for i in 0..4 {
            cz[i][i] = if i == 3 { cplx(-1.0, 0.0) } else { cplx(1.0, 0.0) };
        }
        let mut swap = [[cplx(0.0, 0.0); 4]; 4];
        swap[0][0] = cplx(1.0, 0.0);
        swap[1][2] = cplx(1.0, 0.0);
        swap[2][1] = cplx(1.0, 0.0);
        swap[3][3] = cplx(1.0, 0.0);
        // exp(-i pi/4 XX)
        let c = cplx(inv_sqrt2, 0.0);
        let mis = cplx(0.0, -inv_sqrt2);
        let mut xx = [[cplx(0.0, 0.0); 4]; 4];
        xx[0][0] = c;
        xx[0][3] = mis;
        xx[3][0] = mis;
        xx[3][3] = c;
        xx[1][1] = c;
        xx[1][2] = mis;
        xx[2][1] = mis;
        xx[2][2] = c;
        Tables {
            h: table_1q(&h).expect("h is Clifford"),
            x: table_1q(&letter_matrix(Pauli::X)).expect("x is Clifford"),
            y: table_1q(&letter_matrix(Pauli::Y)).expect("y is Clifford"),
            z: table_1q(&letter_matrix(Pauli::Z)).expect("z is Clifford"),
            s: table_1q(&s_mat).expect("s is Clifford"),
            sdg: table_1q(&sdg_mat).expect("s-dagger is Clifford"),
            cx: table_2q(&cx).expect("cx is Clifford"),
            cz: table_2q(&cz).expect("cz is Clifford"),
            swap: table_2q(&swap).expect("swap is Clifford"),
            xx: table_2q(&xx).expect("xx(pi/2) is Clifford"),
        }
    })
}

/// Working form: letters per qubit plus an overall sign.
struct Letters {
    sign: f64,
    letters: Vec<Pauli>,
}

fn apply_1q_table(l: &mut Letters, table: &[(f64, Pauli); 4], q: usize) {
    let (sign, letter) = table[letter_index(l.letters[q])];
    l.sign *= sign;
    l.letters[q] = letter;
}

fn apply_2q_table(l: &mut Letters, table: &[[(f64, Pauli, Pauli); 4]; 4], a: usize, b: usize) {
    let (sign, pa, pb) = table[letter_index(l.letters[a])][letter_index(l.letters[b])];
    l.sign *= sign;
    l.letters[a] = pa;
    l.letters[b] = pb;
}

/// Reduce an angle to units of pi/2 if it is an exact quarter turn.
fn quarter_turns(theta: f64) -> Option<u8> {
    let turns = theta / std::f64::consts::FRAC_PI_2;
    let rounded = turns.round();
    if (turns - rounded).abs() < 1e-9 {
        Some(rounded.rem_euclid(4.0) as u8 % 4)
    } else {
        None
    }
}

/// Push one op: `P -> U P U^dagger`.
fn conjugate_through_op(l: &mut Letters, op: &Op) -> Result<()> {
    let t = tables();
    match op {
        Op::H(q) => apply_1q_table(l, &t.h, *q),
        Op::X(q) => apply_1q_table(l, &t.x, *q),
        Op::Y(q) => apply_1q_table(l, &t.y, *q),
        Op::Z(q) => apply_1q_table(l, &t.z, *q),
        Op::S(q) => apply_1q_table(l, &t.s, *q),
        Op::Rz { q, theta } => match quarter_turns(*theta) {
            Some(1) => apply_1q_table(l, &t.s, *q),
            Some(2) => apply_1q_table(l, &t.z, *q),
            Some(3) => apply_1q_table(l, &t.sdg, *q),
            Some(_) => {}
            None => {
                if !matches!(l.letters[*q], Pauli::I | Pauli::Z) {
                    return Err(Error::validation(format!(
                        "cannot push an X/Y component through rz({theta}) on qubit {q}"
                    )));
                }
            }
        },
        Op::T(q) | Op::Tdag(q) => {
            if !matches!(l.letters[*q], Pauli::I | Pauli::Z) {
                return Err(Error::validation(format!(
                    "cannot push an X/Y component through a t gate on qubit {q}"
                )));
            }
        }
        Op::R { q, theta, .. } => {
            // Generic axis-in-plane rotation: only trivial legs pass.
            if quarter_turns(*theta) == Some(0) {
                // identity rotation
            } else if !matches!(l.letters[*q], Pauli::I) {
                return Err(Error::validation(format!(
                    "cannot push a non-identity leg through r(theta, phi) on qubit {q}"
                )));
            }
        }
        Op::Cnot(c, tq) => apply_2q_table(l, &t.cx, *c, *tq),
        Op::Cz(a, b) => apply_2q_table(l, &t.cz, *a, *b),
        Op::Swap(a, b) => apply_2q_table(l, &t.swap, *a, *b),
        Op::Xx(a, b) => apply_2q_table(l, &t.xx, *a, *b),
        Op::Ccz(a, b, c) => {
            for q in [a, b, c] {
                if !matches!(l.letters[*q], Pauli::I | Pauli::Z) {
                    return Err(Error::validation(format!(
                        "cannot push an X/Y component through ccz on qubit {q}"
                    )));
                }
            }
        }
        Op::FaultMarker(_) | Op::Idle(_) => {}
        Op::Init(q) | Op::Reset(q) => {
            if !matches!(l.letters[*q], Pauli::I) {
                return Err(Error::validation(format!(
                    "cannot push an operator across init/reset of qubit {q}"
                )));
            }
        }
        Op::Measure(_) => {
            return Err(Error::validation(
                "cannot push an operator across a terminal measurement",
            ))
        }
    }
    Ok(())
}

/// `U P U^dagger` for the unitary of `ops` applied in circuit order.
pub fn conjugate_through_ops(p: &PauliString, ops: &[Op]) -> Result<PauliString> {
    let n = p.num_qubits();
    let mut l = Letters {
        sign: 1.0,
        letters: (0..n).map(|q| p.op_at(q)).collect(),
    };
    for op in ops {
        conjugate_through_op(&mut l, op)?;
    }
    let pairs: Vec<(usize, Pauli)> = l
        .letters
        .iter()
        .enumerate()
        .filter(|(_, p)| !matches!(p, Pauli::I))
        .map(|(q, p)| (q, *p))
        .collect();
    let mut out = PauliString::from_ops(n, &pairs)?;
    // Restore the original scalar and the conjugation sign.
    let orig = p.letter_phase();
    let factor = orig * cplx(l.sign, 0.0);
    // factor is one of ±1, ±i; multiply by i until it matches.
    let mut cur = out.letter_phase();
    let mut guard = 0;
    while (cur - factor).norm() > 1e-9 {
        out = out.times_i();
        cur = out.letter_phase();
        guard += 1;
        assert!(guard <= 4, "phase restoration failed");
    }
    Ok(out)
}
