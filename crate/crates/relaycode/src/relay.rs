//! Relay-chain nodes: the symbol-wise relay, the diagonal decoder used by
//! destinations, the verbatim forwarder, and the packet wire format.
//!
//! # The chain and its clocks
//!
//! A chain is source `r_0` → relays `r_1..r_L` → destination, with link
//! `j` (1-based) connecting `r_{j-1}` to `r_j`. Propagation is instant:
//! in one slot a node absorbs the packet arriving on its input link and
//! emits its own packet. What shifts along the chain is the *diagonal
//! clock*: node `r_j` emits, at output position `d` of slot `t`, a symbol
//! of diagonal `t - S_j - d`, where `S_j = N_1 + ... + N_j` is the total
//! erasure budget upstream of its output link. Each relay therefore runs
//! `N_j` slots behind its predecessor per diagonal — exactly the slack it
//! needs to ride out that link's worst-case erasures.
//!
//! # The symbol-wise relay
//!
//! [`SdfRelay`] never waits for whole blocks. Per output diagonal its
//! `n_out` emission slots split in two phases:
//!
//! * slots `0..k-1` — *forward*: pass on the earliest received symbol of
//!   this diagonal not yet sent, unchanged; emit a void if nothing new
//!   has arrived.
//! * slots `k-1..` — *choose*: once `k` distinct symbols have arrived
//!   the diagonal is decoded and the relay emits whichever column helps
//!   the chain most — first the columns it knows were erased on its
//!   input link (smallest id first), then fresh columns in id order,
//!   never repeating a column it already sent. Until the decode succeeds
//!   it falls back to forwarding.
//!
//! What the relay "knows" is deliberately conservative: an erasure on the
//! input link only counts as known from the *next* slot on, and a relay
//! whose input carries fewer columns than the code family's widest block
//! cannot name missing columns at all (it cannot distinguish which ids an
//! erased packet held), so it infers them only when the ids are implied
//! by what did arrive.
//!
//! # Before time zero
//!
//! All streams notionally run since forever on all-zero frames over
//! erasure-free links, so every state object is seeded as if that history
//! really happened: pre-zero arrivals are canonical columns with value
//! zero. This keeps the first real slots indistinguishable from steady
//! state instead of being a special case.

use std::collections::VecDeque;
use std::fmt;

use crate::analysis::{code_dimensions, CodeDimensions, NetworkConfig};
use crate::field::{FieldElement, FieldParams};
use crate::mds::{CodedSymbol, GeneratorMatrix, VOID_HEADER};
use crate::stream::{Packet, StreamEncoder};
use crate::Error;

// ============================================================
// Chain parameters
// ============================================================

/// Everything the nodes of one symbol-wise relay chain share: the network
/// shape, the code dimensions meeting its capacity, and the generator
/// matrix at the widest block length.
#[derive(Clone, Debug)]
pub struct ChainParams {
    net: NetworkConfig,
    dims: CodeDimensions,
    matrix: GeneratorMatrix,
    /// `prefix[j]` = sum of the budgets of links `1..=j`; `prefix[0]` = 0.
    prefix: Vec<usize>,
}

impl ChainParams {
    /// Derives the chain code for a network over the given field.
    ///
    /// # Errors
    ///
    /// Fails if the delay cannot cover the total budget
    /// ([`Error::RateZero`]) or the field is too small for the widest
    /// block.
    pub fn new(net: NetworkConfig, field: FieldParams) -> Result<Self, Error> {
        let dims = code_dimensions(net.delay(), net.budgets())?;
        let matrix = GeneratorMatrix::systematic(dims.k, dims.n_max, field)?;
        let mut prefix = Vec::with_capacity(net.links() + 1);
        let mut acc = 0usize;
        prefix.push(0);
        for &n in net.budgets() {
            acc += n;
            prefix.push(acc);
        }
        Ok(ChainParams {
            net,
            dims,
            matrix,
            prefix,
        })
    }

    #[must_use]
    pub fn net(&self) -> &NetworkConfig {
        &self.net
    }

    #[must_use]
    pub fn dims(&self) -> &CodeDimensions {
        &self.dims
    }

    #[must_use]
    pub fn matrix(&self) -> &GeneratorMatrix {
        &self.matrix
    }

    /// Symbols per slot on link `j` (1-based).
    #[must_use]
    pub fn block_length(&self, j: usize) -> usize {
        self.dims.block_lengths[j - 1]
    }

    /// Total budget upstream of node `r_j`'s output, `N_1 + ... + N_j`.
    #[must_use]
    pub fn budget_prefix(&self, j: usize) -> usize {
        self.prefix[j]
    }

    /// The source encoder: full-width matrix, emitting link 1's columns.
    ///
    /// # Errors
    ///
    /// Propagates encoder construction failures; cannot fail for
    /// dimensions produced by [`ChainParams::new`].
    pub fn source_encoder(&self) -> Result<StreamEncoder, Error> {
        StreamEncoder::new(self.matrix.clone(), self.block_length(1))
    }

    /// Relay `r_j`, `j` in `1..=L`.
    ///
    /// # Errors
    ///
    /// Fails if `j` is not a relay index of this chain.
    pub fn relay(&self, j: usize) -> Result<SdfRelay, Error> {
        if j == 0 || j > self.net.relays() {
            return Err(Error::BadConfig(format!(
                "relay index {j} outside 1..={}",
                self.net.relays()
            )));
        }
        Ok(SdfRelay::new(self, j))
    }

    /// The destination's decoder, listening on the last link.
    #[must_use]
    pub fn destination(&self) -> DiagonalDecoder {
        let links = self.net.links();
        DiagonalDecoder::new(
            self.matrix.clone(),
            self.block_length(links),
            self.prefix[links - 1] as i64,
        )
    }
}

// ============================================================
// Sliding index window
// ============================================================

/// A contiguous run of per-index states over `i64` indices, growable at
/// both ends, prunable from below. Both relays and decoders track live
/// diagonals and frames this way.
struct IndexWindow<S> {
    base: i64,
    slots: VecDeque<S>,
}

impl<S> IndexWindow<S> {
    fn new() -> Self {
        IndexWindow {
            base: 0,
            slots: VecDeque::new(),
        }
    }

    fn get(&self, idx: i64) -> Option<&S> {
        if self.slots.is_empty() || idx < self.base {
            return None;
        }
        usize::try_from(idx - self.base)
            .ok()
            .and_then(|off| self.slots.get(off))
    }

    /// The state at `idx`, creating it (and any gap) with `make`.
    fn get_or_create(&mut self, idx: i64, mut make: impl FnMut(i64) -> S) -> &mut S {
        if self.slots.is_empty() {
            self.base = idx;
            self.slots.push_back(make(idx));
        } else if idx < self.base {
            for i in (idx..self.base).rev() {
                self.slots.push_front(make(i));
            }
            self.base = idx;
        } else {
            let mut next = self.base + self.slots.len() as i64;
            while next <= idx {
                self.slots.push_back(make(next));
                next += 1;
            }
        }
        let off = (idx - self.base) as usize;
        &mut self.slots[off]
    }

    /// Removes every state below `idx`, handing each to `sink`.
    fn drain_below(&mut self, idx: i64, mut sink: impl FnMut(i64, S)) {
        while self.base < idx {
            match self.slots.pop_front() {
                Some(state) => {
                    sink(self.base, state);
                    self.base += 1;
                }
                None => {
                    self.base = idx;
                    break;
                }
            }
        }
    }
}

// ============================================================
// Symbol-wise relay
// ============================================================

/// Per-diagonal bookkeeping inside a relay.
#[derive(Debug)]
struct DiagState {
    /// Live symbols in arrival order, distinct ids, pre-history seeds
    /// first.
    received: Vec<CodedSymbol>,
    /// Ids this node has emitted for the diagonal, in emission order.
    forwarded: Vec<u16>,
    /// Times at which the input packet carrying this diagonal was erased.
    erased_at: Vec<i64>,
    /// A void arrived: the upstream did not emit a full set of columns,
    /// so missing ids can no longer be inferred by elimination.
    saw_void: bool,
    /// The final packet of the input window arrived (never got erased).
    last_input_arrived: bool,
    decoded: Option<Vec<FieldElement>>,
}

impl DiagState {
    /// State for diagonal `b` as if the chain had run on zero frames over
    /// clean links since forever: every pre-zero input slot delivered its
    /// canonical column with value zero, and every pre-zero output slot
    /// forwarded canonically.
    fn seeded(b: i64, shift_in: i64, shift_out: i64, n_in: usize, n_out: usize, k: usize) -> Self {
        let p_in = (-(b + shift_in)).clamp(0, n_in as i64) as usize;
        let p_out = (-(b + shift_out)).clamp(0, n_out as i64) as usize;
        let received = (1..=p_in as u16)
            .map(|id| CodedSymbol::new(id, FieldElement::ZERO))
            .collect();
        let forwarded = (1..=p_out as u16).collect();
        let decoded = if p_in >= k {
            // Every contributing frame of such a diagonal lies before
            // slot zero, so the message is known to be zero outright.
            Some(vec![FieldElement::ZERO; k])
        } else {
            None
        };
        DiagState {
            received,
            forwarded,
            erased_at: Vec::new(),
            saw_void: false,
            last_input_arrived: p_in == n_in,
            decoded,
        }
    }

    fn has_received(&self, id: u16) -> bool {
        self.received.iter().any(|s| s.header() == id)
    }

    fn earliest_unforwarded(&self) -> Option<CodedSymbol> {
        self.received
            .iter()
            .copied()
            .find(|s| !self.forwarded.contains(&s.header()))
    }
}

/// A relay that re-encodes symbol by symbol as information arrives. See
/// the module documentation for the emission rule.
pub struct SdfRelay {
    matrix: GeneratorMatrix,
    index: usize,
    k: usize,
    n_max: usize,
    n_in: usize,
    n_out: usize,
    shift_in: i64,
    shift_out: i64,
    /// Relay 1 hears the source, whose emissions are canonical, so each
    /// input erasure names exactly one missing column id. Deeper relays
    /// only ever infer missing ids by elimination.
    first_hop: bool,
    diags: IndexWindow<DiagState>,
    clock: i64,
    collect_codes: bool,
    retired_codes: Vec<Vec<u16>>,
}

impl SdfRelay {
    fn new(params: &ChainParams, j: usize) -> Self {
        SdfRelay {
            matrix: params.matrix().clone(),
            index: j,
            k: params.dims().k,
            n_max: params.dims().n_max,
            n_in: params.block_length(j),
            n_out: params.block_length(j + 1),
            shift_in: params.budget_prefix(j - 1) as i64,
            shift_out: params.budget_prefix(j) as i64,
            first_hop: j == 1,
            diags: IndexWindow::new(),
            clock: 0,
            collect_codes: false,
            retired_codes: Vec::new(),
        }
    }

    /// 1-based position of this relay in the chain.
    #[must_use]
    pub fn index(&self) -> usize {
        self.index
    }

    /// Symbols per packet this relay emits.
    #[must_use]
    pub fn output_len(&self) -> usize {
        self.n_out
    }

    /// When enabled, the column-id sequence of every fully emitted
    /// diagonal is kept for [`SdfRelay::drain_retired_codes`].
    pub fn set_collect_codes(&mut self, on: bool) {
        self.collect_codes = on;
    }

    /// The recorded id sequences of diagonals whose emission window has
    /// completed since the last drain. Each sequence lists the nonvoid
    /// column ids the relay actually put on the wire, in emission order —
    /// the generator matrix the downstream decoder effectively faced.
    pub fn drain_retired_codes(&mut self) -> Vec<Vec<u16>> {
        std::mem::take(&mut self.retired_codes)
    }

    /// Runs one slot: absorbs the input-link packet (`None` if the link
    /// erased it) and emits this relay's packet for the same slot.
    ///
    /// # Errors
    ///
    /// Fails on clock misuse, malformed input packets, or an internal
    /// decode failure (impossible with an MDS generator).
    pub fn step(&mut self, t: i64, input: Option<&Packet>) -> Result<Packet, Error> {
        if t != self.clock {
            return Err(Error::ClockMismatch {
                expected: self.clock,
                got: t,
            });
        }
        self.clock += 1;
        self.absorb(t, input)?;
        let packet = self.emit(t)?;
        self.prune(t);
        Ok(packet)
    }

    fn state(&mut self, b: i64) -> &mut DiagState {
        let (shift_in, shift_out) = (self.shift_in, self.shift_out);
        let (n_in, n_out, k) = (self.n_in, self.n_out, self.k);
        self.diags.get_or_create(b, |b| {
            DiagState::seeded(b, shift_in, shift_out, n_in, n_out, k)
        })
    }

    fn absorb(&mut self, t: i64, input: Option<&Packet>) -> Result<(), Error> {
        match input {
            Some(packet) => {
                if packet.len() != self.n_in {
                    return Err(Error::BadMessageLength {
                        expected: self.n_in,
                        got: packet.len(),
                    });
                }
                for d in 0..self.n_in {
                    let b = t - self.shift_in - d as i64;
                    let last = d == self.n_in - 1;
                    let symbol = packet.symbol(d);
                    let state = self.state(b);
                    if symbol.is_void() {
                        state.saw_void = true;
                    } else if !state.has_received(symbol.header()) {
                        state.received.push(symbol);
                    }
                    if last {
                        state.last_input_arrived = true;
                    }
                }
            }
            None => {
                for d in 0..self.n_in {
                    let b = t - self.shift_in - d as i64;
                    self.state(b).erased_at.push(t);
                }
            }
        }
        Ok(())
    }

    fn emit(&mut self, t: i64) -> Result<Packet, Error> {
        let (k, n_max, n_in, n_out) = (self.k, self.n_max, self.n_in, self.n_out);
        let (shift_in, shift_out) = (self.shift_in, self.shift_out);
        let first_hop = self.first_hop;
        let matrix = &self.matrix;
        let diags = &mut self.diags;
        let mut symbols = Vec::with_capacity(n_out);
        for d in 0..n_out {
            let b = t - shift_out - d as i64;
            let state = diags.get_or_create(b, |b| {
                DiagState::seeded(b, shift_in, shift_out, n_in, n_out, k)
            });
            let symbol = if d + 1 < k {
                // Forward phase: relay the earliest symbol not yet sent.
                Self::forward_from(state)
            } else {
                // Chosen phase: decode if possible and emit the most
                // useful column; keep forwarding until the decode lands.
                if state.decoded.is_none() && state.received.len() >= k {
                    state.decoded = Some(matrix.decode(&state.received)?);
                }
                if state.decoded.is_some() {
                    let known =
                        Self::known_erased_ids(state, t, b, shift_in, n_in, n_max, first_hop);
                    let id = Self::choose_id(&state.forwarded, &known, n_max);
                    state.forwarded.push(id);
                    matrix.encode(state.decoded.as_ref().expect("just checked"), id)?
                } else {
                    Self::forward_from(state)
                }
            };
            symbols.push(symbol);
        }
        Ok(Packet::new(symbols))
    }

    fn forward_from(state: &mut DiagState) -> CodedSymbol {
        match state.earliest_unforwarded() {
            Some(symbol) => {
                state.forwarded.push(symbol.header());
                symbol
            }
            None => CodedSymbol::void(),
        }
    }

    /// Column ids the relay can prove were erased on its input link for
    /// diagonal `b`, using only erasure events strictly before `t`: an
    /// erasure observed in the current slot is not yet actionable,
    /// mirroring a pipeline in which loss detection lags by one slot.
    fn known_erased_ids(
        state: &DiagState,
        t: i64,
        b: i64,
        shift_in: i64,
        n_in: usize,
        n_max: usize,
        first_hop: bool,
    ) -> Vec<u16> {
        if first_hop {
            // Canonical upstream: the erased packet at time u held column
            // u - b + 1 of this diagonal, no inference needed.
            return state
                .erased_at
                .iter()
                .filter(|&&u| u < t)
                .map(|&u| (u - b - shift_in) as u16 + 1)
                .collect();
        }
        // Deeper relays identify missing ids by elimination, which is
        // sound only once every input slot of the window has been seen
        // (the last one possibly just now, but then it arrived, so all
        // erasures happened before `t`), the upstream sent full-width
        // packets, and no void muddied the picture.
        if state.saw_void || n_in != n_max {
            return Vec::new();
        }
        let t_last = b + shift_in + n_in as i64 - 1;
        let window_known = t > t_last || (t == t_last && state.last_input_arrived);
        if !window_known {
            return Vec::new();
        }
        (1..=n_max as u16)
            .filter(|&id| !state.has_received(id))
            .collect()
    }

    /// First erased-and-unsent column, then first fresh column; ids
    /// ascending within each class.
    fn choose_id(forwarded: &[u16], known_erased: &[u16], n_max: usize) -> u16 {
        for &id in known_erased {
            if !forwarded.contains(&id) {
                return id;
            }
        }
        for id in 1..=n_max as u16 {
            if !forwarded.contains(&id) && !known_erased.contains(&id) {
                return id;
            }
        }
        // Fewer ids are ever forwarded than the emission window holds,
        // and the window is never wider than the column space.
        unreachable!("column space exhausted")
    }

    fn prune(&mut self, t: i64) {
        // A diagonal is finished once its last output slot has passed;
        // the output window reaches further back than the input window,
        // so this bound covers both.
        let low = (t + 1) - self.shift_out - (self.n_out as i64 - 1);
        let collect = self.collect_codes;
        let retired = &mut self.retired_codes;
        self.diags.drain_below(low, |_, state| {
            if collect {
                retired.push(state.forwarded);
            }
        });
    }
}

impl fmt::Debug for SdfRelay {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("SdfRelay")
            .field("index", &self.index)
            .field("n_in", &self.n_in)
            .field("n_out", &self.n_out)
            .field("clock", &self.clock)
            .finish()
    }
}

// ============================================================
// Verbatim forwarder
// ============================================================

/// The relay of the end-to-end baseline: repeats whatever arrives, and
/// fills the slot with voids when the input link erased the packet, so
/// the downstream still sees a packet per slot.
#[derive(Clone, Debug)]
pub struct VerbatimRelay {
    n: usize,
}

impl VerbatimRelay {
    #[must_use]
    pub fn new(n: usize) -> Self {
        VerbatimRelay { n }
    }

    #[must_use]
    pub fn step(&self, input: Option<&Packet>) -> Packet {
        match input {
            Some(packet) => packet.clone(),
            None => Packet::all_void(self.n),
        }
    }
}

// ============================================================
// Diagonal decoder
// ============================================================

#[derive(Debug)]
struct RxDiag {
    received: Vec<CodedSymbol>,
    decoded: bool,
}

impl RxDiag {
    fn seeded(b: i64, shift: i64, n_in: usize, k: usize) -> Self {
        let p = (-(b + shift)).clamp(0, n_in as i64) as usize;
        RxDiag {
            received: (1..=p as u16)
                .map(|id| CodedSymbol::new(id, FieldElement::ZERO))
                .collect(),
            decoded: p >= k,
        }
    }
}

#[derive(Debug)]
struct FrameState {
    values: Vec<Option<FieldElement>>,
    completed_at: Option<i64>,
}

/// A streaming decoder: absorbs one packet per slot and tracks, frame by
/// frame, which components are known and when each frame became fully
/// known.
///
/// Knowledge accrues two ways. A systematic symbol (column id `1..=k`)
/// pins one frame component the moment it arrives. And once any diagonal
/// has `k` distinct symbols it is decoded outright, pinning a component
/// of `k` consecutive frames at once.
pub struct DiagonalDecoder {
    matrix: GeneratorMatrix,
    n_in: usize,
    shift: i64,
    k: usize,
    diags: IndexWindow<RxDiag>,
    frames: IndexWindow<FrameState>,
    clock: i64,
}

impl DiagonalDecoder {
    /// A decoder for a stream whose position `d` at time `t` carries
    /// diagonal `t - shift - d`, `n_in` symbols per packet.
    #[must_use]
    pub fn new(matrix: GeneratorMatrix, n_in: usize, shift: i64) -> Self {
        let k = matrix.k();
        DiagonalDecoder {
            matrix,
            n_in,
            shift,
            k,
            diags: IndexWindow::new(),
            frames: IndexWindow::new(),
            clock: 0,
        }
    }

    /// Absorbs the packet for slot `t`, or records its absence.
    ///
    /// # Errors
    ///
    /// Fails on clock misuse, a packet of the wrong width, or an internal
    /// decode failure (impossible with an MDS generator).
    pub fn absorb(&mut self, t: i64, input: Option<&Packet>) -> Result<(), Error> {
        if t != self.clock {
            return Err(Error::ClockMismatch {
                expected: self.clock,
                got: t,
            });
        }
        self.clock += 1;
        let Some(packet) = input else {
            self.prune_diags(t);
            return Ok(());
        };
        if packet.len() != self.n_in {
            return Err(Error::BadMessageLength {
                expected: self.n_in,
                got: packet.len(),
            });
        }
        for d in 0..self.n_in {
            let b = t - self.shift - d as i64;
            let symbol = packet.symbol(d);
            if symbol.is_void() {
                continue;
            }
            let (shift, n_in, k) = (self.shift, self.n_in, self.k);
            let state = self
                .diags
                .get_or_create(b, |b| RxDiag::seeded(b, shift, n_in, k));
            if state.received.iter().any(|s| s.header() == symbol.header()) {
                continue;
            }
            state.received.push(symbol);
            // Systematic symbols name a frame component directly.
            let h = symbol.header();
            if h as usize <= self.k {
                self.learn(b + i64::from(h) - 1, usize::from(h) - 1, symbol.value(), t);
            }
            let state = self.diags.get(b).expect("state just touched");
            if !state.decoded && state.received.len() >= self.k {
                let message = self.matrix.decode(&state.received)?;
                let state = self
                    .diags
                    .get_or_create(b, |_| unreachable!("state exists"));
                state.decoded = true;
                for (v, &value) in message.iter().enumerate() {
                    self.learn(b + v as i64, v, value, t);
                }
            }
        }
        self.prune_diags(t);
        Ok(())
    }

    fn learn(&mut self, frame: i64, component: usize, value: FieldElement, t: i64) {
        if frame < 0 {
            return; // pre-history frames are zero by definition
        }
        let k = self.k;
        let state = self.frames.get_or_create(frame, |_| FrameState {
            values: vec![None; k],
            completed_at: None,
        });
        if state.values[component].is_none() {
            state.values[component] = Some(value);
            if state.completed_at.is_none() && state.values.iter().all(Option::is_some) {
                state.completed_at = Some(t);
            }
        }
    }

    fn prune_diags(&mut self, t: i64) {
        let low = (t + 1) - self.shift - (self.n_in as i64 - 1);
        self.diags.drain_below(low, |_, _| {});
    }

    /// The slot at which frame `i` became fully known, if it has.
    #[must_use]
    pub fn frame_completed_at(&self, i: i64) -> Option<i64> {
        self.frames.get(i).and_then(|f| f.completed_at)
    }

    /// The recovered frame, once complete.
    #[must_use]
    pub fn frame_values(&self, i: i64) -> Option<Vec<FieldElement>> {
        let state = self.frames.get(i)?;
        state.completed_at?;
        Some(state.values.iter().map(|v| v.expect("complete")).collect())
    }

    /// Drops bookkeeping for all frames below `i`; call after their
    /// verdicts are taken.
    pub fn prune_frames_below(&mut self, i: i64) {
        self.frames.drain_below(i, |_, _| {});
    }
}

impl fmt::Debug for DiagonalDecoder {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("DiagonalDecoder")
            .field("n_in", &self.n_in)
            .field("shift", &self.shift)
            .field("clock", &self.clock)
            .finish()
    }
}

// ============================================================
// Wire format
// ============================================================

/// Serializes a packet: per symbol, the header as two little-endian
/// bytes, then the value in as few little-endian bytes as the field
/// needs.
#[must_use]
pub fn packet_to_wire(packet: &Packet, field: &FieldParams) -> Vec<u8> {
    let value_bytes = field.bits().div_ceil(8) as usize;
    let mut out = Vec::with_capacity(packet.len() * (2 + value_bytes));
    for symbol in packet.symbols() {
        out.extend_from_slice(&symbol.header().to_le_bytes());
        out.extend_from_slice(&symbol.value().value().to_le_bytes()[..value_bytes]);
    }
    out
}

/// Parses a packet serialized by [`packet_to_wire`].
///
/// # Errors
///
/// Fails if the byte length is not a whole number of symbols, a value
/// does not fit the field, or a void symbol carries a nonzero value.
pub fn packet_from_wire(bytes: &[u8], field: &FieldParams) -> Result<Packet, Error> {
    let value_bytes = field.bits().div_ceil(8) as usize;
    let stride = 2 + value_bytes;
    if bytes.len() % stride != 0 {
        return Err(Error::BadConfig(format!(
            "{} bytes is not a whole number of {stride}-byte symbols",
            bytes.len()
        )));
    }
    let mut symbols = Vec::with_capacity(bytes.len() / stride);
    for chunk in bytes.chunks_exact(stride) {
        let header = u16::from_le_bytes([chunk[0], chunk[1]]);
        let mut raw = [0u8; 2];
        raw[..value_bytes].copy_from_slice(&chunk[2..]);
        let value = u16::from_le_bytes(raw);
        if u32::from(value) >= field.order() {
            return Err(Error::ValueOutOfField {
                value: u32::from(value),
                order: field.order(),
            });
        }
        if header == VOID_HEADER && value != 0 {
            return Err(Error::BadConfig(
                "void symbol carries a nonzero value".into(),
            ));
        }
        symbols.push(CodedSymbol::new(header, FieldElement::new(value)));
    }
    Ok(Packet::new(symbols))
}

// ============================================================
// Tests
// ============================================================
