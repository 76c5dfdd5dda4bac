//! The simulation harness: concrete scheme configurations, end-to-end
//! chains, exhaustive and sampled verification, and a deterministic
//! parallel Monte Carlo engine.
//!
//! # Schemes
//!
//! Three ways to run the same relay network are supported:
//!
//! * [`Scheme::Sdf`] — symbol-wise decode-and-forward: the streaming
//!   chain code built by [`ChainParams`], in which relays re-encode
//!   symbol by symbol. This is the capacity-achieving scheme.
//! * [`Scheme::Mdf`] — message-wise decode-and-forward: each hop runs
//!   its own point-to-point streaming code; a relay decodes whole frames
//!   and re-encodes them on the next hop, so per-hop delays add up.
//! * [`Scheme::If`] — intermediate-free: one end-to-end point-to-point
//!   code with relays repeating packets verbatim, so every link's
//!   erasures pile onto a single decoder.
//!
//! Baselines come in two calibrations: [`SchemeConfig::verify_grade`]
//! picks the strongest code that still tolerates the full per-link
//! budgets (so exhaustive verification must pass), while
//! [`SchemeConfig::rate_matched`] picks the weakest code whose rate
//! reaches the symbol-wise scheme's — the right calibration for
//! comparing loss probabilities at equal throughput.
//!
//! # Verification and measurement
//!
//! [`verify_exhaustive`] replays a chain under *every* erasure pattern
//! within the per-link budgets and checks each frame is recovered
//! correctly by its deadline. [`verify_sliding`] does the same over
//! random patterns admissible under sliding-window budgets.
//! [`run_monte_carlo`] measures frame-loss ratios under independent
//! random erasures, sharded so results are byte-for-byte reproducible
//! for a given seed regardless of thread count.

use std::collections::BTreeSet;
use std::fmt;
use std::str::FromStr;

use rand::Rng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::analysis::{
    capacity_p2p, capacity_upper, loss_upper_bound, mdf_rate, NetworkConfig, Rate,
};
use crate::channel::{
    derive_rng, enumerate_budgeted, sample_iid, sample_sliding_admissible, ErasurePattern,
};
use crate::field::{FieldElement, FieldParams};
use crate::mds::GeneratorMatrix;
use crate::relay::{ChainParams, DiagonalDecoder, SdfRelay, VerbatimRelay};
use crate::stream::{Packet, StreamEncoder};
use crate::Error;

// ============================================================
// Schemes and their configurations
// ============================================================

/// The transmission scheme to run over a relay network.
#[derive(Clone, Copy, PartialEq, Eq, Debug)]
pub enum Scheme {
    /// Symbol-wise decode-and-forward (the streaming chain code).
    Sdf,
    /// Message-wise decode-and-forward (per-hop codes, added delays).
    Mdf,
    /// Intermediate-free (one end-to-end code, verbatim relays).
    If,
}

impl Scheme {
    #[must_use]
    pub fn name(self) -> &'static str {
        match self {
            Scheme::Sdf => "sdf",
            Scheme::Mdf => "mdf",
            Scheme::If => "if",
        }
    }
}

impl fmt::Display for Scheme {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Scheme {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self, Error> {
        match s {
            "sdf" => Ok(Scheme::Sdf),
            "mdf" => Ok(Scheme::Mdf),
            "if" => Ok(Scheme::If),
            other => Err(Error::BadConfig(format!(
                "unknown scheme {other:?}, expected sdf, mdf, or if"
            ))),
        }
    }
}

/// Concrete parameters of a message-wise decode-and-forward chain.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct MdfParams {
    /// Erasures hop `j`'s code is built to tolerate (possibly scaled
    /// down from the network budgets when rate-matching).
    pub hop_budgets: Vec<usize>,
    /// Decoding delay each hop adds.
    pub hop_delays: Vec<usize>,
    /// Symbols per packet on each hop.
    pub block_lengths: Vec<usize>,
    /// Frame symbols carried end to end.
    pub k: usize,
}

/// Concrete parameters of an intermediate-free chain.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct IfParams {
    /// Frame symbols carried end to end.
    pub k: usize,
    /// Symbols per packet (the code emits every column each slot).
    pub n: usize,
    /// End-to-end erasures per window the code tolerates.
    pub tolerance: usize,
}

#[derive(Clone, Debug)]
enum ConfigKind {
    Sdf(ChainParams),
    Mdf(MdfParams),
    If(IfParams),
}

/// A scheme pinned to a network, a field, and concrete code parameters —
/// everything needed to build and run chains.
#[derive(Clone, Debug)]
pub struct SchemeConfig {
    scheme: Scheme,
    net: NetworkConfig,
    field: FieldParams,
    kind: ConfigKind,
}

impl SchemeConfig {
    /// The strongest calibration: codes tolerate the full per-link
    /// budgets, so exhaustive verification is expected to pass.
    ///
    /// # Errors
    ///
    /// Fails when the delay cannot cover the budgets ([`Error::RateZero`])
    /// or the field is too small for the blocks involved.
    pub fn verify_grade(
        scheme: Scheme,
        net: NetworkConfig,
        field: FieldParams,
    ) -> Result<Self, Error> {
        let kind = match scheme {
            Scheme::Sdf => ConfigKind::Sdf(ChainParams::new(net.clone(), field.clone())?),
            Scheme::Mdf => {
                let (rate, split) = mdf_rate(net.delay(), net.budgets())?;
                if rate == Rate::from_integer(0) {
                    return Err(Error::RateZero {
                        delay: net.delay() as u64,
                        budget: net.sum_budgets() as u64,
                    });
                }
                ConfigKind::Mdf(mdf_from_split(net.budgets().to_vec(), &split))
            }
            Scheme::If => {
                let b = net.sum_budgets();
                if net.delay() < b {
                    return Err(Error::RateZero {
                        delay: net.delay() as u64,
                        budget: b as u64,
                    });
                }
                ConfigKind::If(IfParams {
                    k: net.delay() - b + 1,
                    n: net.delay() + 1,
                    tolerance: b,
                })
            }
        };
        Self::finish(scheme, net, field, kind)
    }

    /// The comparison calibration: the weakest code of each family whose
    /// rate still reaches the symbol-wise scheme's rate, so loss ratios
    /// are compared at equal throughput. For the symbol-wise scheme
    /// itself this is identical to [`SchemeConfig::verify_grade`].
    ///
    /// # Errors
    ///
    /// Fails when the network's rate is zero or the field is too small.
    pub fn rate_matched(
        scheme: Scheme,
        net: NetworkConfig,
        field: FieldParams,
    ) -> Result<Self, Error> {
        let target = capacity_upper(net.delay(), net.budgets());
        if target == Rate::from_integer(0) {
            return Err(Error::RateZero {
                delay: net.delay() as u64,
                budget: net.sum_budgets() as u64,
            });
        }
        let kind = match scheme {
            Scheme::Sdf => ConfigKind::Sdf(ChainParams::new(net.clone(), field.clone())?),
            Scheme::Mdf => {
                // Scale every budget down to at most `m`, then give each
                // hop the smallest delay whose point-to-point rate still
                // reaches the target; take the largest `m` whose summed
                // delays fit the end-to-end deadline.
                let mut found = None;
                for m in (0..=net.max_budget()).rev() {
                    let scaled: Vec<usize> = net.budgets().iter().map(|&n| n.min(m)).collect();
                    let split: Vec<usize> = scaled
                        .iter()
                        .map(|&n| {
                            let mut t = n;
                            while capacity_p2p(t, n) < target {
                                t += 1;
                            }
                            t
                        })
                        .collect();
                    if split.iter().sum::<usize>() <= net.delay() {
                        found = Some(mdf_from_split(scaled, &split));
                        break;
                    }
                }
                match found {
                    Some(params) => ConfigKind::Mdf(params),
                    None => {
                        return Err(Error::BadConfig(format!(
                            "no per-hop split of delay {} reaches rate {target}",
                            net.delay()
                        )))
                    }
                }
            }
            Scheme::If => {
                // The weakest end-to-end tolerance whose rate reaches the
                // target: (T+1) - B >= (T+1) * target.
                let slots = Rate::from_integer(net.delay() as i64 + 1);
                let b = (slots * (Rate::from_integer(1) - target))
                    .floor()
                    .to_integer() as usize;
                ConfigKind::If(IfParams {
                    k: net.delay() + 1 - b,
                    n: net.delay() + 1,
                    tolerance: b,
                })
            }
        };
        Self::finish(scheme, net, field, kind)
    }

    fn finish(
        scheme: Scheme,
        net: NetworkConfig,
        field: FieldParams,
        kind: ConfigKind,
    ) -> Result<Self, Error> {
        // Every block length must index into the field's column space.
        let widest = match &kind {
            ConfigKind::Sdf(p) => p.dims().n_max,
            ConfigKind::Mdf(p) => p.block_lengths.iter().copied().max().unwrap_or(0),
            ConfigKind::If(p) => p.n,
        };
        if field.order() < widest as u32 {
            return Err(Error::FieldTooSmall {
                order: field.order(),
                block_len: widest,
            });
        }
        Ok(SchemeConfig {
            scheme,
            net,
            field,
            kind,
        })
    }

    #[must_use]
    pub fn scheme(&self) -> Scheme {
        self.scheme
    }

    #[must_use]
    pub fn net(&self) -> &NetworkConfig {
        &self.net
    }

    #[must_use]
    pub fn field(&self) -> &FieldParams {
        &self.field
    }

    /// Symbols per frame this scheme transports.
    #[must_use]
    pub fn message_len(&self) -> usize {
        match &self.kind {
            ConfigKind::Sdf(p) => p.dims().k,
            ConfigKind::Mdf(p) => p.k,
            ConfigKind::If(p) => p.k,
        }
    }

    /// The scheme's rate: frame symbols per symbol slot on the busiest
    /// link.
    #[must_use]
    pub fn rate(&self) -> Rate {
        let (k, widest) = match &self.kind {
            ConfigKind::Sdf(p) => (p.dims().k, p.dims().n_max),
            ConfigKind::Mdf(p) => (p.k, p.block_lengths.iter().copied().max().unwrap_or(1)),
            ConfigKind::If(p) => (p.k, p.n),
        };
        Rate::new(k as i64, widest as i64)
    }

    /// The chain-code parameters, when this is the symbol-wise scheme.
    #[must_use]
    pub fn sdf_params(&self) -> Option<&ChainParams> {
        match &self.kind {
            ConfigKind::Sdf(p) => Some(p),
            _ => None,
        }
    }

    #[must_use]
    pub fn mdf_params(&self) -> Option<&MdfParams> {
        match &self.kind {
            ConfigKind::Mdf(p) => Some(p),
            _ => None,
        }
    }

    #[must_use]
    pub fn if_params(&self) -> Option<&IfParams> {
        match &self.kind {
            ConfigKind::If(p) => Some(p),
            _ => None,
        }
    }

    /// A one-line human summary of the concrete code.
    #[must_use]
    pub fn describe(&self) -> String {
        match &self.kind {
            ConfigKind::Sdf(p) => format!(
                "sdf: k={}, blocks={:?}, widest={}, rate={}",
                p.dims().k,
                p.dims().block_lengths,
                p.dims().n_max,
                self.rate()
            ),
            ConfigKind::Mdf(p) => format!(
                "mdf: k={}, blocks={:?}, hop delays={:?}, hop tolerances={:?}, rate={}",
                p.k,
                p.block_lengths,
                p.hop_delays,
                p.hop_budgets,
                self.rate()
            ),
            ConfigKind::If(p) => format!(
                "if: code ({}, {}), delay {}, end-to-end tolerance {}, rate={}",
                p.n,
                p.k,
                p.n - 1,
                p.tolerance,
                self.rate()
            ),
        }
    }

    /// Builds a fresh chain (source, relays, destination) ready at slot 0.
    ///
    /// # Errors
    ///
    /// Propagates code-construction failures; cannot fail for a config
    /// built by the constructors above.
    pub fn chain(&self) -> Result<Chain, Error> {
        let links = self.net.links();
        let kind = match &self.kind {
            ConfigKind::Sdf(params) => ChainKind::Sdf {
                source: params.source_encoder()?,
                relays: (1..=self.net.relays())
                    .map(|j| params.relay(j))
                    .collect::<Result<_, _>>()?,
                sink: params.destination(),
            },
            ConfigKind::Mdf(params) => {
                let matrices: Vec<GeneratorMatrix> = params
                    .block_lengths
                    .iter()
                    .map(|&n| GeneratorMatrix::systematic(params.k, n, self.field.clone()))
                    .collect::<Result<_, _>>()?;
                let relays = (1..links)
                    .map(|j| {
                        Ok(MdfHop {
                            decoder: DiagonalDecoder::new(
                                matrices[j - 1].clone(),
                                params.block_lengths[j - 1],
                                0,
                            ),
                            encoder: StreamEncoder::new(
                                matrices[j].clone(),
                                params.block_lengths[j],
                            )?,
                            delay: params.hop_delays[j - 1] as i64,
                        })
                    })
                    .collect::<Result<Vec<_>, Error>>()?;
                let sink_offset = params.hop_delays[..links - 1].iter().sum::<usize>() as i64;
                ChainKind::Mdf {
                    source: StreamEncoder::new(matrices[0].clone(), params.block_lengths[0])?,
                    relays,
                    sink: DiagonalDecoder::new(
                        matrices[links - 1].clone(),
                        params.block_lengths[links - 1],
                        0,
                    ),
                    sink_offset,
                }
            }
            ConfigKind::If(params) => {
                let matrix = GeneratorMatrix::systematic(params.k, params.n, self.field.clone())?;
                ChainKind::If {
                    source: StreamEncoder::new(matrix.clone(), params.n)?,
                    relays: vec![VerbatimRelay::new(params.n); self.net.relays()],
                    sink: DiagonalDecoder::new(matrix, params.n, 0),
                }
            }
        };
        Ok(Chain {
            kind,
            links,
            message_len: self.message_len(),
            recording: false,
            recorded: Vec::new(),
        })
    }
}

/// Builds message-wise parameters from per-hop tolerances and a delay
/// split: the common frame size is the smallest per-hop dimension, and
/// each hop then shrinks to the shortest block that still tolerates its
/// share.
fn mdf_from_split(hop_budgets: Vec<usize>, split: &[usize]) -> MdfParams {
    let k = hop_budgets
        .iter()
        .zip(split)
        .map(|(&n, &t)| t - n + 1)
        .min()
        .expect("at least one hop");
    let block_lengths: Vec<usize> = hop_budgets.iter().map(|&n| k + n).collect();
    let hop_delays: Vec<usize> = hop_budgets.iter().map(|&n| k + n - 1).collect();
    MdfParams {
        hop_budgets,
        hop_delays,
        block_lengths,
        k,
    }
}

// ============================================================
// Chains
// ============================================================

/// One relay in a message-wise chain: decode this hop's stream, re-emit
/// the frame (delayed by the hop's decoding delay) on the next hop's
/// code. A frame its decoder misses is gone for good — the encoder emits
/// voids in every position that frame touches.
struct MdfHop {
    decoder: DiagonalDecoder,
    encoder: StreamEncoder,
    delay: i64,
}

impl MdfHop {
    fn step(&mut self, t: i64, input: Option<&Packet>) -> Result<Packet, Error> {
        self.decoder.absorb(t, input)?;
        let due = t - self.delay;
        let frame = if due < 0 {
            // Pre-history frames are all zero and need no decoding.
            Some(vec![FieldElement::ZERO; self.encoder.k()])
        } else {
            self.decoder.frame_values(due)
        };
        let packet = self.encoder.encode_slot_masked(t, frame.as_deref())?;
        if due >= 0 {
            self.decoder.prune_frames_below(due + 1);
        }
        Ok(packet)
    }
}

enum ChainKind {
    Sdf {
        source: StreamEncoder,
        relays: Vec<SdfRelay>,
        sink: DiagonalDecoder,
    },
    Mdf {
        source: StreamEncoder,
        relays: Vec<MdfHop>,
        sink: DiagonalDecoder,
        /// The destination's stream runs this many slots behind the
        /// original frames (the relays' summed decoding delays).
        sink_offset: i64,
    },
    If {
        source: StreamEncoder,
        relays: Vec<VerbatimRelay>,
        sink: DiagonalDecoder,
    },
}

/// A complete source → relays → destination pipeline for one scheme,
/// stepped one slot at a time.
pub struct Chain {
    kind: ChainKind,
    links: usize,
    message_len: usize,
    recording: bool,
    recorded: Vec<Vec<Packet>>,
}

impl Chain {
    /// Symbols per frame this chain transports.
    #[must_use]
    pub fn message_len(&self) -> usize {
        self.message_len
    }

    #[must_use]
    pub fn links(&self) -> usize {
        self.links
    }

    /// When enabled, every node's emitted packets are kept for
    /// [`Chain::take_recorded`]: index 0 is the source, index `j` relay
    /// `r_j`.
    pub fn set_recording(&mut self, on: bool) {
        self.recording = on;
        if on && self.recorded.is_empty() {
            self.recorded = vec![Vec::new(); self.links];
        }
    }

    /// The recorded per-node outputs, resetting the recorder.
    pub fn take_recorded(&mut self) -> Vec<Vec<Packet>> {
        std::mem::take(&mut self.recorded)
    }

    /// For symbol-wise chains: collect materialized column-id sequences
    /// at every relay (see [`SdfRelay::set_collect_codes`]).
    pub fn set_collect_codes(&mut self, on: bool) {
        if let ChainKind::Sdf { relays, .. } = &mut self.kind {
            for relay in relays {
                relay.set_collect_codes(on);
            }
        }
    }

    /// Column-id sequences retired at any relay since the last drain
    /// (empty for baselines).
    pub fn drain_retired_codes(&mut self) -> Vec<Vec<u16>> {
        match &mut self.kind {
            ChainKind::Sdf { relays, .. } => relays
                .iter_mut()
                .flat_map(SdfRelay::drain_retired_codes)
                .collect(),
            _ => Vec::new(),
        }
    }

    /// Runs slot `t`: the source encodes `frame`, packets ride each link
    /// (dropped where `erased[link]` is set), and the destination
    /// absorbs what survives.
    ///
    /// # Errors
    ///
    /// Fails on a wrong-length frame or erasure slice, clock misuse, or
    /// internal decode failures.
    pub fn step(&mut self, t: i64, frame: &[FieldElement], erased: &[bool]) -> Result<(), Error> {
        if erased.len() != self.links {
            return Err(Error::BadConfig(format!(
                "expected {} erasure flags, got {}",
                self.links,
                erased.len()
            )));
        }
        let recording = self.recording;
        let recorded = &mut self.recorded;
        match &mut self.kind {
            ChainKind::Sdf {
                source,
                relays,
                sink,
            } => {
                let mut packet = source.encode_slot(t, frame)?;
                if recording {
                    recorded[0].push(packet.clone());
                }
                for (j, relay) in relays.iter_mut().enumerate() {
                    let next = relay.step(t, (!erased[j]).then_some(&packet))?;
                    packet = next;
                    if recording {
                        recorded[j + 1].push(packet.clone());
                    }
                }
                sink.absorb(t, (!erased[self.links - 1]).then_some(&packet))?;
            }
            ChainKind::Mdf {
                source,
                relays,
                sink,
                ..
            } => {
                let mut packet = source.encode_slot(t, frame)?;
                if recording {
                    recorded[0].push(packet.clone());
                }
                for (j, relay) in relays.iter_mut().enumerate() {
                    let next = relay.step(t, (!erased[j]).then_some(&packet))?;
                    packet = next;
                    if recording {
                        recorded[j + 1].push(packet.clone());
                    }
                }
                sink.absorb(t, (!erased[self.links - 1]).then_some(&packet))?;
            }
            ChainKind::If {
                source,
                relays,
                sink,
            } => {
                let mut packet = source.encode_slot(t, frame)?;
                if recording {
                    recorded[0].push(packet.clone());
                }
                for (j, relay) in relays.iter().enumerate() {
                    let next = relay.step((!erased[j]).then_some(&packet));
                    packet = next;
                    if recording {
                        recorded[j + 1].push(packet.clone());
                    }
                }
                sink.absorb(t, (!erased[self.links - 1]).then_some(&packet))?;
            }
        }
        Ok(())
    }

    /// When the destination fully recovered frame `i`, if it has.
    #[must_use]
    pub fn frame_completed_at(&self, i: i64) -> Option<i64> {
        match &self.kind {
            ChainKind::Sdf { sink, .. } | ChainKind::If { sink, .. } => sink.frame_completed_at(i),
            ChainKind::Mdf {
                sink, sink_offset, ..
            } => sink.frame_completed_at(i + sink_offset),
        }
    }

    /// The destination's recovered frame `i`, once complete.
    #[must_use]
    pub fn frame_values(&self, i: i64) -> Option<Vec<FieldElement>> {
        match &self.kind {
            ChainKind::Sdf { sink, .. } | ChainKind::If { sink, .. } => sink.frame_values(i),
            ChainKind::Mdf {
                sink, sink_offset, ..
            } => sink.frame_values(i + sink_offset),
        }
    }

    /// Drops destination bookkeeping for frames below `i`.
    pub fn prune_frames_below(&mut self, i: i64) {
        match &mut self.kind {
            ChainKind::Sdf { sink, .. } | ChainKind::If { sink, .. } => {
                sink.prune_frames_below(i);
            }
            ChainKind::Mdf {
                sink, sink_offset, ..
            } => sink.prune_frames_below(i + *sink_offset),
        }
    }
}

impl fmt::Debug for Chain {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let kind = match self.kind {
            ChainKind::Sdf { .. } => "sdf",
            ChainKind::Mdf { .. } => "mdf",
            ChainKind::If { .. } => "if",
        };
        f.debug_struct("Chain")
            .field("kind", &kind)
            .field("links", &self.links)
            .field("message_len", &self.message_len)
            .finish()
    }
}

// ============================================================
// Scored runs
// ============================================================

struct ScoreOutcome {
    losses: u64,
    mismatches: u64,
    first_failure: Option<(i64, bool)>,
}

/// Drives a chain over `pattern` for `horizon` slots with random frames,
/// scoring frames `score_lo..=score_hi` against the deadline `i + delay`:
/// a frame not fully recovered by then is a loss, and a recovered frame
/// that differs from the truth is a mismatch (counted as a loss too).
#[allow(clippy::too_many_arguments)]
fn run_scored(
    chain: &mut Chain,
    pattern: &ErasurePattern,
    horizon: i64,
    delay: i64,
    score_lo: i64,
    score_hi: i64,
    frames_rng: &mut ChaCha8Rng,
    value_mask: u16,
) -> Result<ScoreOutcome, Error> {
    let k = chain.message_len();
    let links = chain.links();
    let mut truth: std::collections::VecDeque<Vec<FieldElement>> =
        std::collections::VecDeque::with_capacity(delay as usize + 1);
    let mut erased = vec![false; links];
    let mut outcome = ScoreOutcome {
        losses: 0,
        mismatches: 0,
        first_failure: None,
    };
    for t in 0..horizon {
        let frame: Vec<FieldElement> = (0..k)
            .map(|_| FieldElement::new(frames_rng.gen::<u16>() & value_mask))
            .collect();
        for (j, flag) in erased.iter_mut().enumerate() {
            *flag = pattern.erased(j, t);
        }
        chain.step(t, &frame, &erased)?;
        truth.push_back(frame);
        let i = t - delay;
        if i >= 0 {
            let sent = truth.pop_front().expect("frame fed `delay` slots ago");
            if i >= score_lo && i <= score_hi {
                match chain.frame_completed_at(i) {
                    Some(_) => {
                        let got = chain.frame_values(i).expect("completed frame has values");
                        if got != sent {
                            outcome.losses += 1;
                            outcome.mismatches += 1;
                            outcome.first_failure.get_or_insert((i, true));
                        }
                    }
                    None => {
                        outcome.losses += 1;
                        outcome.first_failure.get_or_insert((i, false));
                    }
                }
            }
            chain.prune_frames_below(i + 1);
        }
    }
    Ok(outcome)
}

fn value_mask(field: &FieldParams) -> u16 {
    ((1u32 << field.bits()) - 1) as u16
}

// ============================================================
// Verification
// ============================================================

/// The outcome of an exhaustive or sampled verification sweep.
#[derive(Clone, Debug)]
pub struct VerifyReport {
    pub scheme: Scheme,
    /// Erasure patterns replayed.
    pub combinations: u128,
    /// Frames scored per pattern.
    pub scored_per_run: u64,
    /// Scored frames missed or corrupted, across all patterns.
    pub failures: u64,
    /// Human-readable descriptions of the first few failures.
    pub examples: Vec<String>,
    /// The erasure patterns behind [`VerifyReport::examples`], for
    /// replaying a counterexample.
    pub counterexamples: Vec<ErasurePattern>,
    /// For the symbol-wise scheme: every distinct set of column ids a
    /// relay materialized for some diagonal (sorted), plus the source's
    /// canonical set.
    pub codes: BTreeSet<Vec<u16>>,
    /// Patterns redrawn by the sampler (sampled sweeps only).
    pub rejections: u64,
}

impl VerifyReport {
    #[must_use]
    pub fn passed(&self) -> bool {
        self.failures == 0
    }
}

fn verify_horizon(cfg: &SchemeConfig) -> usize {
    // Wide enough that every pattern interaction in a window fits, with
    // slack on both sides: the delay, a frame's diagonal span, the total
    // budget, and margin.
    cfg.net().delay() + cfg.message_len() + cfg.net().sum_budgets() + 2
}

/// Replays the chain under every erasure pattern within the per-link
/// budgets, checking every scored frame is recovered, bit-exactly, by
/// its deadline.
///
/// # Errors
///
/// Fails if the pattern space exceeds the enumeration guard or a run
/// hits an internal error; frame losses are reported, not errors.
pub fn verify_exhaustive(cfg: &SchemeConfig, seed: u64) -> Result<VerifyReport, Error> {
    let horizon = verify_horizon(cfg);
    let delay = cfg.net().delay() as i64;
    let patterns = enumerate_budgeted(horizon, cfg.net().budgets())?;
    let combinations = patterns.count_total();
    let mask = value_mask(cfg.field());
    let collect = cfg.scheme() == Scheme::Sdf;
    let mut report = VerifyReport {
        scheme: cfg.scheme(),
        combinations,
        scored_per_run: (horizon as i64 - delay) as u64,
        failures: 0,
        examples: Vec::new(),
        counterexamples: Vec::new(),
        codes: BTreeSet::new(),
        rejections: 0,
    };
    if let Some(params) = cfg.sdf_params() {
        // The source's emission is always the canonical prefix.
        report
            .codes
            .insert((1..=params.block_length(1) as u16).collect());
    }
    for (index, pattern) in patterns.enumerate() {
        let mut chain = cfg.chain()?;
        if collect {
            chain.set_collect_codes(true);
        }
        let mut rng = derive_rng(seed, index as u64, 0);
        let outcome = run_scored(
            &mut chain,
            &pattern,
            horizon as i64,
            delay,
            0,
            horizon as i64 - delay - 1,
            &mut rng,
            mask,
        )?;
        record_failures(&mut report, &outcome, &pattern);
        if collect {
            for mut seq in chain.drain_retired_codes() {
                seq.sort_unstable();
                report.codes.insert(seq);
            }
        }
    }
    Ok(report)
}

/// Replays the chain under `samples` random patterns admissible within
/// sliding-window budgets (at most `N_j` erasures in any `window`
/// consecutive slots of link `j`), with the same scoring as
/// [`verify_exhaustive`].
///
/// # Errors
///
/// Fails on sampler misconfiguration or internal run errors.
pub fn verify_sliding(
    cfg: &SchemeConfig,
    window: usize,
    samples: u64,
    seed: u64,
) -> Result<VerifyReport, Error> {
    let horizon = verify_horizon(cfg);
    let delay = cfg.net().delay() as i64;
    let links = cfg.net().links();
    let mask = value_mask(cfg.field());
    let mut report = VerifyReport {
        scheme: cfg.scheme(),
        combinations: u128::from(samples),
        scored_per_run: (horizon as i64 - delay) as u64,
        failures: 0,
        examples: Vec::new(),
        counterexamples: Vec::new(),
        codes: BTreeSet::new(),
        rejections: 0,
    };
    for sample in 0..samples {
        let mut rngs: Vec<ChaCha8Rng> = (1..=links)
            .map(|j| derive_rng(seed, sample, j as u64))
            .collect();
        let (pattern, rejected) =
            sample_sliding_admissible(horizon, cfg.net().budgets(), window, &mut rngs)?;
        report.rejections += rejected;
        let mut chain = cfg.chain()?;
        let mut rng = derive_rng(seed, sample, 0);
        let outcome = run_scored(
            &mut chain,
            &pattern,
            horizon as i64,
            delay,
            0,
            horizon as i64 - delay - 1,
            &mut rng,
            mask,
        )?;
        record_failures(&mut report, &outcome, &pattern);
    }
    Ok(report)
}

fn record_failures(report: &mut VerifyReport, outcome: &ScoreOutcome, pattern: &ErasurePattern) {
    if outcome.losses == 0 {
        return;
    }
    report.failures += outcome.losses;
    if report.examples.len() < 4 {
        let (frame, corrupted) = outcome.first_failure.expect("losses imply a failure");
        let what = if corrupted { "corrupted" } else { "missed" };
        report.examples.push(format!(
            "frame {frame} {what} under pattern {}",
            pattern.to_ascii().join("/")
        ));
        report.counterexamples.push(pattern.clone());
    }
}

// ============================================================
// Monte Carlo
// ============================================================

/// Scored frames per Monte Carlo shard. Fixed so that a run's random
/// streams — and therefore its results — never depend on thread count.
pub const SHARD_SIZE: u64 = 1 << 16;

/// Header of the CSV emitted for Monte Carlo results.
pub const CSV_HEADER: &str = "scheme,L,T,budgets,alpha,frames,losses,loss_ratio,ci95,bound,seed";

/// One Monte Carlo measurement: a scheme, a network, an erasure rate,
/// and the observed loss count.
#[derive(Clone, Debug, PartialEq)]
pub struct McReport {
    pub scheme: Scheme,
    pub relays: usize,
    pub delay: usize,
    pub budgets: Vec<usize>,
    pub alpha: f64,
    pub frames: u64,
    pub losses: u64,
    /// Frames recovered with wrong contents — always zero for a correct
    /// code.
    pub mismatches: u64,
    /// Analytical upper bound on the loss ratio, where one exists for
    /// the scheme.
    pub bound: Option<f64>,
    pub seed: u64,
}

impl McReport {
    #[must_use]
    pub fn loss_ratio(&self) -> f64 {
        self.losses as f64 / self.frames as f64
    }

    /// Half-width of the 95% normal-approximation confidence interval.
    #[must_use]
    pub fn ci95(&self) -> f64 {
        let p = self.loss_ratio();
        1.96 * (p * (1.0 - p) / self.frames as f64).sqrt()
    }

    /// The measurement as one [`CSV_HEADER`] row.
    #[must_use]
    pub fn csv_row(&self) -> String {
        let budgets = self
            .budgets
            .iter()
            .map(ToString::to_string)
            .collect::<Vec<_>>()
            .join("|");
        let bound = self.bound.map(|b| b.to_string()).unwrap_or_default();
        format!(
            "{},{},{},{},{},{},{},{},{},{},{}",
            self.scheme,
            self.relays,
            self.delay,
            budgets,
            self.alpha,
            self.frames,
            self.losses,
            self.loss_ratio(),
            self.ci95(),
            bound,
            self.seed
        )
    }
}

/// Measures the frame-loss ratio under independent erasures at rate
/// `alpha` on every link, over `frames` scored frames.
///
/// Work is split into [`SHARD_SIZE`]-frame shards, each with its own
/// seeded random streams, run in parallel and merged in shard order:
/// the same `(seed, frames)` always yields the same report, byte for
/// byte, whatever the thread count. Each shard scores only frames with
/// a full erasure neighborhood on both sides, so warmup slots never
/// bias the estimate.
///
/// # Errors
///
/// Fails on a zero frame count, an invalid probability, or internal
/// run errors.
pub fn run_monte_carlo(
    cfg: &SchemeConfig,
    alpha: f64,
    frames: u64,
    seed: u64,
) -> Result<McReport, Error> {
    if frames == 0 {
        return Err(Error::BadConfig("no frames to simulate".into()));
    }
    if !(0.0..=1.0).contains(&alpha) {
        return Err(Error::BadProbability { value: alpha });
    }
    let shard_count = frames.div_ceil(SHARD_SIZE);
    let outcomes: Vec<(u64, u64)> = (0..shard_count)
        .into_par_iter()
        .map(|shard| {
            let scored = SHARD_SIZE.min(frames - shard * SHARD_SIZE);
            run_shard(cfg, alpha, shard, scored, seed)
        })
        .collect::<Result<_, _>>()?;
    let (losses, mismatches) = outcomes
        .into_iter()
        .fold((0, 0), |(l, m), (dl, dm)| (l + dl, m + dm));
    let bound = match cfg.sdf_params() {
        Some(params) => Some(loss_upper_bound(
            params.dims().k,
            cfg.net().budgets(),
            &vec![alpha; cfg.net().links()],
        )?),
        None => None,
    };
    Ok(McReport {
        scheme: cfg.scheme(),
        relays: cfg.net().relays(),
        delay: cfg.net().delay(),
        budgets: cfg.net().budgets().to_vec(),
        alpha,
        frames,
        losses,
        mismatches,
        bound,
        seed,
    })
}

fn run_shard(
    cfg: &SchemeConfig,
    alpha: f64,
    shard: u64,
    scored: u64,
    seed: u64,
) -> Result<(u64, u64), Error> {
    let delay = cfg.net().delay() as i64;
    let links = cfg.net().links();
    let horizon = scored as i64 + 2 * delay;
    let mut rngs: Vec<ChaCha8Rng> = (1..=links)
        .map(|j| derive_rng(seed, shard, j as u64))
        .collect();
    let pattern = sample_iid(horizon as usize, &vec![alpha; links], &mut rngs)?;
    let mut frames_rng = derive_rng(seed, shard, 0);
    let mut chain = cfg.chain()?;
    let outcome = run_scored(
        &mut chain,
        &pattern,
        horizon,
        delay,
        delay,
        delay + scored as i64 - 1,
        &mut frames_rng,
        value_mask(cfg.field()),
    )?;
    Ok((outcome.losses, outcome.mismatches))
}

// ============================================================
// Traces
// ============================================================

/// A full recording of one run: every node's emissions and the
/// destination's recovery times.
#[derive(Clone, Debug)]
pub struct TraceOutput {
    /// Per node (0 = source, `j` = relay `r_j`), the packet emitted each
    /// slot.
    pub node_outputs: Vec<Vec<Packet>>,
    /// For each frame with a deadline inside the horizon: the slot the
    /// destination completed it, or `None` if it never did.
    pub completions: Vec<(i64, Option<i64>)>,
    pub horizon: i64,
}

/// Runs one chain over an explicit erasure pattern, recording every
/// node's output and the destination's recovery times. Frame contents
/// are seeded random values.
///
/// # Errors
///
/// Fails on internal run errors.
pub fn run_trace(
    cfg: &SchemeConfig,
    pattern: &ErasurePattern,
    horizon: usize,
    seed: u64,
) -> Result<TraceOutput, Error> {
    let delay = cfg.net().delay() as i64;
    let links = cfg.net().links();
    let mask = value_mask(cfg.field());
    let k = cfg.message_len();
    let mut chain = cfg.chain()?;
    chain.set_recording(true);
    let mut rng = derive_rng(seed, 0, 0);
    let mut erased = vec![false; links];
    let mut completions = Vec::new();
    for t in 0..horizon as i64 {
        let frame: Vec<FieldElement> = (0..k)
            .map(|_| FieldElement::new(rng.gen::<u16>() & mask))
            .collect();
        for (j, flag) in erased.iter_mut().enumerate() {
            *flag = pattern.erased(j, t);
        }
        chain.step(t, &frame, &erased)?;
        let i = t - delay;
        if i >= 0 {
            completions.push((i, chain.frame_completed_at(i)));
            chain.prune_frames_below(i + 1);
        }
    }
    Ok(TraceOutput {
        node_outputs: chain.take_recorded(),
        completions,
        horizon: horizon as i64,
    })
}

// ============================================================
// Tests
// ============================================================

#[cfg(test)]
mod tests {
    use super::*;

    fn net(delay: usize, budgets: &[usize]) -> NetworkConfig {
        NetworkConfig::new(delay, budgets.to_vec()).unwrap()
    }

    fn gf256() -> FieldParams {
        FieldParams::gf256()
    }

    #[test]
    fn scheme_names_round_trip() {
        for scheme in [Scheme::Sdf, Scheme::Mdf, Scheme::If] {
            assert_eq!(scheme.name().parse::<Scheme>().unwrap(), scheme);
        }
        assert!("dense".parse::<Scheme>().is_err());
    }

    #[test]
    fn rate_matched_derivations_for_the_three_relay_network() {
        let network = net(9, &[2, 2, 2]);

        let sdf = SchemeConfig::rate_matched(Scheme::Sdf, network.clone(), gf256()).unwrap();
        let dims = sdf.sdf_params().unwrap().dims();
        assert_eq!(dims.k, 4);
        assert_eq!(dims.block_lengths, vec![6, 6, 6]);
        assert_eq!(dims.n_max, 6);
        assert_eq!(sdf.rate(), Rate::new(2, 3));

        let mdf = SchemeConfig::rate_matched(Scheme::Mdf, network.clone(), gf256()).unwrap();
        let params = mdf.mdf_params().unwrap();
        assert_eq!(
            params,
            &MdfParams {
                hop_budgets: vec![1, 1, 1],
                hop_delays: vec![2, 2, 2],
                block_lengths: vec![3, 3, 3],
                k: 2,
            }
        );
        assert_eq!(mdf.rate(), Rate::new(2, 3));

        let ifc = SchemeConfig::rate_matched(Scheme::If, network, gf256()).unwrap();
        assert_eq!(
            ifc.if_params().unwrap(),
            &IfParams {
                k: 7,
                n: 10,
                tolerance: 3,
            }
        );
        assert_eq!(ifc.rate(), Rate::new(7, 10));
    }

    #[test]
    fn verify_grade_derivations() {
        let network = net(3, &[1, 1]);
        let mdf = SchemeConfig::verify_grade(Scheme::Mdf, network.clone(), gf256()).unwrap();
        assert_eq!(
            mdf.mdf_params().unwrap(),
            &MdfParams {
                hop_budgets: vec![1, 1],
                hop_delays: vec![1, 1],
                block_lengths: vec![2, 2],
                k: 1,
            }
        );
        let ifc = SchemeConfig::verify_grade(Scheme::If, network, gf256()).unwrap();
        assert_eq!(
            ifc.if_params().unwrap(),
            &IfParams {
                k: 2,
                n: 4,
                tolerance: 2,
            }
        );

        // Full budgets, deeper chain: the best split grants each hop
        // delay 3, so hops carry 2 frame symbols in blocks of 4.
        let deep = SchemeConfig::verify_grade(Scheme::Mdf, net(9, &[2, 2, 2]), gf256()).unwrap();
        assert_eq!(
            deep.mdf_params().unwrap(),
            &MdfParams {
                hop_budgets: vec![2, 2, 2],
                hop_delays: vec![3, 3, 3],
                block_lengths: vec![4, 4, 4],
                k: 2,
            }
        );
    }

    #[test]
    fn zero_rate_networks_are_rejected() {
        let starved = net(3, &[2, 2]);
        for scheme in [Scheme::Sdf, Scheme::Mdf, Scheme::If] {
            assert!(matches!(
                SchemeConfig::verify_grade(scheme, starved.clone(), gf256()).unwrap_err(),
                Error::RateZero { .. }
            ));
            assert!(matches!(
                SchemeConfig::rate_matched(scheme, starved.clone(), gf256()).unwrap_err(),
                Error::RateZero { .. }
            ));
        }
    }

    #[test]
    fn exhaustive_verification_point_to_point() {
        let cfg = SchemeConfig::verify_grade(Scheme::Sdf, net(3, &[2]), gf256()).unwrap();
        let report = verify_exhaustive(&cfg, 11).unwrap();
        assert_eq!(report.combinations, 46);
        assert_eq!(report.scored_per_run, 6);
        assert!(report.passed(), "failures: {:?}", report.examples);
    }

    #[test]
    fn exhaustive_verification_single_relay() {
        let cfg = SchemeConfig::verify_grade(Scheme::Sdf, net(3, &[1, 1]), gf256()).unwrap();
        let report = verify_exhaustive(&cfg, 11).unwrap();
        assert_eq!(report.combinations, 100);
        assert!(report.passed(), "failures: {:?}", report.examples);
        // Blocks and widest width coincide here, so every fully-emitted
        // diagonal materializes all three columns.
        assert!(report.codes.contains(&vec![1, 2, 3]));
        assert!(report.codes.iter().all(|c| c.len() == 3));
    }

    #[test]
    fn exhaustive_verification_narrow_output_materializes_subsets() {
        // Blocks (4, 3) against a widest width of 4: relays emit 3-column
        // subsets of the 4-column space, so punctured generators really
        // occur.
        let cfg = SchemeConfig::verify_grade(Scheme::Sdf, net(4, &[2, 1]), gf256()).unwrap();
        let report = verify_exhaustive(&cfg, 11).unwrap();
        assert_eq!(report.combinations, 804);
        assert!(report.passed(), "failures: {:?}", report.examples);
        assert!(report.codes.iter().any(|c| c.len() == 3));
        assert!(report.codes.len() > 2, "got {:?}", report.codes);
    }

    #[test]
    fn exhaustive_verification_of_baselines() {
        let network = net(3, &[1, 1]);
        for scheme in [Scheme::Mdf, Scheme::If] {
            let cfg = SchemeConfig::verify_grade(scheme, network.clone(), gf256()).unwrap();
            let report = verify_exhaustive(&cfg, 11).unwrap();
            assert!(report.passed(), "{scheme} failures: {:?}", report.examples);
        }
    }

    #[test]
    fn sliding_window_verification_single_relay() {
        let cfg = SchemeConfig::verify_grade(Scheme::Sdf, net(3, &[1, 1]), gf256()).unwrap();
        let report = verify_sliding(&cfg, 4, 200, 11).unwrap();
        assert_eq!(report.combinations, 200);
        assert!(report.passed(), "failures: {:?}", report.examples);
    }

    #[test]
    fn monte_carlo_is_deterministic_and_within_bound() {
        let cfg = SchemeConfig::verify_grade(Scheme::Sdf, net(3, &[1, 1]), gf256()).unwrap();
        // Two shards: one full, one partial.
        let frames = SHARD_SIZE + 20_000;
        let a = run_monte_carlo(&cfg, 0.1, frames, 7).unwrap();
        let b = run_monte_carlo(&cfg, 0.1, frames, 7).unwrap();
        assert_eq!(a, b);
        assert_eq!(a.csv_row(), b.csv_row());
        assert!(a.losses > 0, "0.1 erasure rate must cost something");
        assert_eq!(a.mismatches, 0, "recovered frames must be exact");
        let bound = a.bound.expect("symbol-wise scheme carries a bound");
        assert!(
            a.loss_ratio() <= bound + 3.0 * a.ci95(),
            "loss {} above bound {}",
            a.loss_ratio(),
            bound
        );
        let c = run_monte_carlo(&cfg, 0.1, frames, 8).unwrap();
        assert_ne!(a.losses, c.losses, "different seeds, different draws");
    }

    #[test]
    fn monte_carlo_csv_row_shape() {
        let report = McReport {
            scheme: Scheme::If,
            relays: 2,
            delay: 9,
            budgets: vec![2, 2, 2],
            alpha: 0.01,
            frames: 1_000_000,
            losses: 42,
            mismatches: 0,
            bound: None,
            seed: 1,
        };
        let row = report.csv_row();
        let fields: Vec<&str> = row.split(',').collect();
        assert_eq!(fields.len(), CSV_HEADER.split(',').count());
        assert_eq!(
            &fields[..8],
            &["if", "2", "9", "2|2|2", "0.01", "1000000", "42", "0.000042"]
        );
        let ci: f64 = fields[8].parse().unwrap();
        assert!((ci - report.ci95()).abs() < 1e-12);
        assert_eq!(fields[9], "", "no bound, empty cell");
        assert_eq!(fields[10], "1");

        let bounded = McReport {
            scheme: Scheme::Sdf,
            bound: Some(0.000795),
            ..report
        };
        assert!(bounded.csv_row().contains(",0.000795,"));
    }

    #[test]
    fn trace_records_every_node_and_completion() {
        let cfg = SchemeConfig::verify_grade(Scheme::Sdf, net(3, &[1, 1]), gf256()).unwrap();
        let pattern = ErasurePattern::from_slots(2, 16, &[(0, 5)]).unwrap();
        let trace = run_trace(&cfg, &pattern, 16, 3).unwrap();
        assert_eq!(trace.node_outputs.len(), 2);
        assert!(trace.node_outputs.iter().all(|n| n.len() == 16));
        assert_eq!(trace.completions.len(), 13);
        for &(frame, done) in &trace.completions {
            let done = done.unwrap_or_else(|| panic!("frame {frame} unrecovered"));
            assert!(done <= frame + 3);
        }
    }

    #[test]
    fn chain_rejects_wrong_erasure_width() {
        let cfg = SchemeConfig::verify_grade(Scheme::Sdf, net(3, &[1, 1]), gf256()).unwrap();
        let mut chain = cfg.chain().unwrap();
        let frame = vec![FieldElement::ZERO; chain.message_len()];
        assert!(chain.step(0, &frame, &[false]).is_err());
    }

    #[test]
    fn baseline_chains_deliver_under_iid_noise() {
        // Not a verification — a smoke check that baseline chains run,
        // lose little at a mild erasure rate, and never corrupt.
        let network = net(4, &[1, 1]);
        for scheme in [Scheme::Mdf, Scheme::If] {
            let cfg = SchemeConfig::verify_grade(scheme, network.clone(), gf256()).unwrap();
            let report = run_monte_carlo(&cfg, 0.02, 20_000, 5).unwrap();
            assert_eq!(report.mismatches, 0);
            assert!(
                report.loss_ratio() < 0.05,
                "{scheme} lost {}",
                report.loss_ratio()
            );
        }
    }
}
