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

//! Measures the sampling throughput of the Pauli-frame fast path against
//! the exact state-vector walk on real protocol circuits.
//!
//! Under local dephasing every trajectory is the noiseless circuit with
//! Paulis inserted, so a shot reduces to conjugating those insertions into a
//! terminal Pauli frame and rejection-sampling the readout from the cached
//! noiseless distribution. Both paths draw from exactly the same law (the
//! test suite checks this distribution-by-distribution); this example shows
//! what that equivalence buys in wall-clock terms.
//!
//! Run with: `cargo run --release --example fast_path_throughput`

use std::time::Instant;

use mfqec::engine::Runner;
use mfqec::error::Result;
use mfqec::noise::NoiseParams;
use mfqec::protocols::{cube_ccz, teleport, TeleportInput};

/// Time `run_many` and return shots per second.
fn rate(runner: &Runner, seed: u64, shots: u64) -> Result<f64> {
    let t0 = Instant::now();
    let bits = runner.run_many(seed, shots)?;
    let dt = t0.elapsed().as_secs_f64();
    assert_eq!(bits.len() as u64, shots);
    Ok(shots as f64 / dt)
}

fn main() -> Result<()> {
    let params = NoiseParams::default();
    println!("{:<34} {:>12} {:>12} {:>9}", "circuit", "frame/s", "exact/s", "speedup");

    let cases: Vec<(&str, mfqec::circuit::Circuit, u64, u64)> = vec![
        {
            let p = teleport(TeleportInput::Zero, true)?;
            ("teleport protected, z readout", p.context("z")?.circuit.clone(), 40_000, 2_000)
        },
        {
            let p = cube_ccz()?;
            ("logical ccz on the cube, x readout", p.context("x")?.circuit.clone(), 20_000, 200)
        },
    ];

    for (name, circuit, fast_shots, slow_shots) in cases {
        let fast = Runner::new(&circuit, &params)?;
        let slow = Runner::new(&circuit, &params)?.without_fast_path();
        // Warm the noiseless cache before timing the sampling loop.
        fast.run_many(1, 16)?;
        let rf = rate(&fast, 7, fast_shots)?;
        let rs = rate(&slow, 7, slow_shots)?;
        println!("{:<34} {:>12.0} {:>12.0} {:>8.1}x", name, rf, rs, rf / rs);
    }
    Ok(())
}
