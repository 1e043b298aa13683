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

//! Measurement-free quantum error correction, simulated and verified.
//!
//! This crate models small stabilizer codes ([[4,1,2]], [[4,2,2]] and the
//! [[8,3,2]] color/cube code) whose error correction is performed **without
//! mid-circuit measurement or feed-forward**: syndrome information is moved
//! onto ancilla qubits by coherent gates and either consumed by coherent
//! feedback or postselected on at the terminal readout.
//!
//! What lives where:
//! - [`statevec`] — dense state-vector backend (exact pure states, <= 24 qubits).
//! - [`pauli`] — phase-tracked Pauli strings and their algebra.
//! - [`code`] — the three code definitions: stabilizers, logical operators,
//!   ideal codewords.
//! - [`circuit`] — gate-level circuit IR with a plain-text format, scheduling
//!   (gate durations, spectator idling) and qubit relabeling.
//! - [`noise`] — the trapped-ion style error model: depolarizing gate noise,
//!   preparation/readout bit flips, and idle dephasing that can be sampled
//!   locally per qubit or as a collective fluctuation; a global strength
//!   knob lambda scales every channel.
//! - [`protocols`] — circuit builders for logical state preparation, logical
//!   state teleportation, teleported/injected logical Hadamard, transversal
//!   CCZ, and a complete logical Grover search, each with readout contexts
//!   and postselection rules.
//! - [`verify`] — exhaustive single-fault certification: inject every one of
//!   the error model's fault sites exactly once and classify the outcome as
//!   benign, detected, or an undetected logical error.
//! - [`analysis`] — decoding of raw shots, logical tomography (Bloch vectors,
//!   physicality projection, fidelities), subsampled error bars, scaling fits
//!   and correlation budgets.
//! - [`engine`] — seeded, reproducible many-shot experiment runner with
//!   TOML configuration and CSV/JSON reports.

pub mod analysis;
pub mod circuit;
pub mod clifford;
pub mod code;
pub mod engine;
pub mod error;
mod frame;
pub mod noise;
pub mod pauli;
pub mod protocols;
pub mod statevec;
pub mod verify;

pub use error::{Error, Result};
