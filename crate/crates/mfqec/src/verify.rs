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

//! Exhaustive single-fault certification of postselected protocols.
//!
//! For every Pauli member of every channel at every position the error model
//! can produce, the exact terminal readout distribution with that one fault
//! injected (and the rest of the circuit noiseless) is folded through the
//! context's acceptance checks and logical decoders. Each member lands in
//! one of three classes:
//!
//! * [`FaultVerdict::Detected`] — no accepted outcome survives; the checks
//!   remove the fault entirely.
//! * [`FaultVerdict::Benign`] — accepted outcomes exist and their
//!   conditional logical-pattern distribution equals the fault-free one
//!   (rejection may lower the acceptance rate without corrupting what is
//!   kept).
//! * [`FaultVerdict::UndetectedLogical`] — accepted outcomes exist whose
//!   conditional logical statistics deviate: the fault reaches the logical
//!   level unseen.
//!
//! A context certifies when no member lands in the third class; a protocol
//! certifies when all its contexts do. A logical error invisible to one
//! context's statistics (a logical Z on an X-basis eigenstate leaves every
//! X-readout probability unchanged) is caught by the context or input state
//! that makes the conjugate observable deterministic, which is why the
//! protocol builders expose several readout contexts and input states.
//!
//! The sweep enumerates the channels as compiled for local dephasing (the
//! collective mode draws one shared rotation instead of discrete flips; its
//! single-qubit marginals match the local model, so the site list here is
//! the full discrete-fault support of the error model). Scaled probabilities
//! play no role — certification is exhaustive over locations, not sampled.

use std::collections::{BTreeMap, HashMap};

use crate::engine::{Runner, SingleFaultOutcome};
use crate::error::{Error, Result};
use crate::noise::{CompiledCircuit, FaultKind, NoiseParams};
use crate::protocols::{Protocol, ReadoutContext};

/// Accepted probability below this counts as "nothing survives the checks".
pub const ACCEPT_FLOOR: f64 = 1e-12;

/// Tolerance for comparing accepted-conditional logical distributions.
/// Exact-arithmetic deviations are zero; fault-induced ones are orders of
/// magnitude above this.
pub const STAT_TOL: f64 = 1e-9;

/// How one injected fault interacts with a context's postselection.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum FaultVerdict {
    /// Accepted statistics are exactly the fault-free ones.
    Benign,
    /// Every outcome it produces is rejected.
    Detected,
    /// It corrupts the accepted logical statistics.
    UndetectedLogical,
}

/// One certified fault member, with enough context to locate it.
#[derive(Clone, Debug)]
pub struct FaultCase {
    /// Index into the compiled circuit's site list.
    pub site: usize,
    /// Pauli member of the site's channel.
    pub choice: usize,
    /// Human-readable location: letters, channel, and host operation.
    pub location: String,
    pub verdict: FaultVerdict,
    /// Probability mass the checks accept under this fault.
    pub accepted: f64,
    /// Largest deviation of the conditional logical distribution.
    pub deviation: f64,
}

/// Certification result for one readout context.
#[derive(Clone, Debug)]
pub struct ContextCertification {
    pub protocol: String,
    pub context: String,
    /// Total channel members examined.
    pub members: usize,
    /// Members that needed a fresh exact walk (the rest provably repeat one).
    pub evaluated: usize,
    pub benign: usize,
    pub detected: usize,
    /// Every member that corrupts accepted logical statistics.
    pub undetected: Vec<FaultCase>,
}

impl ContextCertification {
    /// True when postselection turns every single fault benign or detected.
    pub fn is_fault_tolerant(&self) -> bool {
        self.undetected.is_empty()
    }

    /// One-line human summary.
    pub fn summary(&self) -> String {
        format!(
            "{} [{}]: {} fault members ({} evaluated) — {} benign, {} detected, {} undetected",
            self.protocol,
            self.context,
            self.members,
            self.evaluated,
            self.benign,
            self.detected,
            self.undetected.len()
        )
    }
}

/// Certification result for a whole protocol (all its readout contexts).
#[derive(Clone, Debug)]
pub struct Certification {
    pub protocol: String,
    pub contexts: Vec<ContextCertification>,
}

impl Certification {
    pub fn is_fault_tolerant(&self) -> bool {
        self.contexts.iter().all(ContextCertification::is_fault_tolerant)
    }

    /// All undetected cases across contexts, tagged with their context label.
    pub fn undetected_cases(&self) -> Vec<(&str, &FaultCase)> {
        self.contexts
            .iter()
            .flat_map(|c| c.undetected.iter().map(move |f| (c.context.as_str(), f)))
            .collect()
    }

    pub fn members(&self) -> usize {
        self.contexts.iter().map(|c| c.members).sum()
    }
}

/// Error-model settings used for certification: every channel enabled (reset
/// depolarizing included at its hardware strength) so the compiled site list
/// covers every discrete fault location. The probabilities themselves only
/// decide which sites exist; the sweep is exhaustive, not sampled.
pub fn certification_params() -> NoiseParams {
    NoiseParams { reset_error: 0.045, ..NoiseParams::default() }
}

/// Letters of one channel member, e.g. "X3 Z7".
fn member_letters(kind: &FaultKind, choice: usize) -> String {
    kind.member_ops(choice)
        .iter()
        .map(|(q, p)| format!("{p:?}{q}"))
        .collect::<Vec<_>>()
        .join(" ")
}

/// Human-readable location of one fault member.
fn describe_member(compiled: &CompiledCircuit, site: usize, choice: usize) -> String {
    let s = &compiled.sites[site];
    let channel = match s.kind {
        FaultKind::Depol1 { .. } => "gate depolarizing",
        FaultKind::Depol2 { .. } => "gate depolarizing",
        FaultKind::InitFlip { .. } => "preparation flip",
        FaultKind::MeasFlip { .. } => "readout flip",
        FaultKind::IdleZ { .. } => "idle dephasing",
        FaultKind::ResetDepol { .. } => "reset depolarizing",
    };
    format!(
        "{} after op {} `{}` ({})",
        member_letters(&s.kind, choice),
        s.op_index,
        compiled.circuit.ops[s.op_index].text(),
        channel
    )
}

/// Fold a readout distribution through a context's checks and decoders:
/// total accepted mass plus the accepted-conditional distribution over
/// logical patterns. `None` when the accepted mass is below [`ACCEPT_FLOOR`].
fn conditional_logical(
    ctx: &ReadoutContext,
    dist: &[(u64, f64)],
) -> Option<(f64, BTreeMap<u64, f64>)> {
    let mut mass = 0.0;
    let mut acc: BTreeMap<u64, f64> = BTreeMap::new();
    for &(bits, p) in dist {
        if p <= 0.0 {
            continue;
        }
        if let Some(pattern) = ctx.decode(bits) {
            *acc.entry(pattern).or_insert(0.0) += p;
            mass += p;
        }
    }
    if mass < ACCEPT_FLOOR {
        return None;
    }
    for v in acc.values_mut() {
        *v /= mass;
    }
    Some((mass, acc))
}

/// Largest absolute difference between two pattern distributions.
fn pattern_distance(a: &BTreeMap<u64, f64>, b: &BTreeMap<u64, f64>) -> f64 {
    let mut d = 0.0f64;
    for (k, v) in a {
        d = d.max((v - b.get(k).copied().unwrap_or(0.0)).abs());
    }
    for (k, v) in b {
        if !a.contains_key(k) {
            d = d.max(*v);
        }
    }
    d
}

/// Certify one readout context against every single fault of the model.
pub fn certify_context(
    protocol: &str,
    ctx: &ReadoutContext,
    params: &NoiseParams,
) -> Result<ContextCertification> {
    let runner = Runner::new(&ctx.circuit, params)?;
    let ideal = runner.ideal_readout_distribution()?;
    let (_, ideal_cond) = conditional_logical(ctx, &ideal).ok_or_else(|| {
        Error::validation(format!(
            "context {}: the fault-free run is rejected by its own checks",
            ctx.label
        ))
    })?;

    let mut cert = ContextCertification {
        protocol: protocol.to_string(),
        context: ctx.label.clone(),
        members: 0,
        evaluated: 0,
        benign: 0,
        detected: 0,
        undetected: Vec::new(),
    };
    let mut records: HashMap<(usize, usize), (FaultVerdict, f64, f64)> = HashMap::new();
    runner.for_each_single_fault(|site, choice, outcome| {
        let record = match outcome {
            SingleFaultOutcome::Evaluated(dist) => {
                cert.evaluated += 1;
                let rec = match conditional_logical(ctx, dist) {
                    None => (FaultVerdict::Detected, 0.0, 0.0),
                    Some((mass, cond)) => {
                        let dev = pattern_distance(&cond, &ideal_cond);
                        if dev <= STAT_TOL {
                            (FaultVerdict::Benign, mass, dev)
                        } else {
                            (FaultVerdict::UndetectedLogical, mass, dev)
                        }
                    }
                };
                records.insert((site, choice), rec);
                rec
            }
            SingleFaultOutcome::SameAs { site: s0, choice: c0 } => {
                let rec = records[&(s0, c0)];
                records.insert((site, choice), rec);
                rec
            }
        };
        cert.members += 1;
        match record.0 {
            FaultVerdict::Benign => cert.benign += 1,
            FaultVerdict::Detected => cert.detected += 1,
            FaultVerdict::UndetectedLogical => cert.undetected.push(FaultCase {
                site,
                choice,
                location: describe_member(runner.compiled(), site, choice),
                verdict: FaultVerdict::UndetectedLogical,
                accepted: record.1,
                deviation: record.2,
            }),
        }
        Ok(())
    })?;
    Ok(cert)
}

/// Certify every readout context of a protocol.
pub fn certify(protocol: &Protocol, params: &NoiseParams) -> Result<Certification> {
    let mut contexts = Vec::with_capacity(protocol.contexts.len());
    for ctx in &protocol.contexts {
        contexts.push(certify_context(&protocol.name, ctx, params)?);
    }
    Ok(Certification { protocol: protocol.name.clone(), contexts })
}
