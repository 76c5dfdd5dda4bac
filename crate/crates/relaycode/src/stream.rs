//! Diagonal interleaving: turning a stream of frames into a stream of
//! packets, one packet per time slot.
//!
//! A source produces one frame of `k` field elements per slot. Instead of
//! coding each frame as its own block, the encoder codes *diagonals*: the
//! message for diagonal `b` is
//!
//! ```text
//! (frame[b][0], frame[b+1][1], ..., frame[b+k-1][k-1])
//! ```
//!
//! one component from each of `k` consecutive frames. The packet sent at
//! slot `t` carries, at position `d`, a symbol of diagonal `t - d`:
//! positions `0..k` are the systematic columns and together spell out the
//! current frame verbatim, while positions `k..` carry parity of older,
//! already-complete diagonals. Spreading each frame over `k` diagonals is
//! what lets a decoder recover from packet losses with bounded delay and
//! no retransmission: a lost packet removes one symbol from each of
//! several diagonals rather than an entire block from one of them.
//!
//! Frames before slot 0 are defined to be all-zero, so the first packets
//! carry valid parity (of zero diagonals) rather than placeholder voids.

use std::collections::VecDeque;
use std::fmt;

use crate::field::FieldElement;
use crate::mds::{CodedSymbol, GeneratorMatrix};
use crate::Error;

// ============================================================
// Packets
// ============================================================

/// What one node puts on one link in one time slot: a fixed-length burst
/// of coded symbols. Erasures act on whole packets, so the unit a channel
/// deletes is the unit defined here.
#[derive(Clone, PartialEq, Eq)]
pub struct Packet {
    symbols: Vec<CodedSymbol>,
}

impl Packet {
    #[must_use]
    pub fn new(symbols: Vec<CodedSymbol>) -> Self {
        Packet { symbols }
    }

    /// A packet of `len` void symbols — the shape a node emits when it has
    /// nothing usable to say but the slot must still be filled.
    #[must_use]
    pub fn all_void(len: usize) -> Self {
        Packet {
            symbols: vec![CodedSymbol::void(); len],
        }
    }

    #[must_use]
    pub fn symbols(&self) -> &[CodedSymbol] {
        &self.symbols
    }

    /// Symbol at position `d` within the packet.
    #[must_use]
    pub fn symbol(&self, d: usize) -> CodedSymbol {
        self.symbols[d]
    }

    #[must_use]
    pub fn len(&self) -> usize {
        self.symbols.len()
    }

    #[must_use]
    pub fn is_empty(&self) -> bool {
        self.symbols.is_empty()
    }
}

impl fmt::Debug for Packet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_list().entries(self.symbols.iter()).finish()
    }
}

// ============================================================
// Stream encoder
// ============================================================

/// Stateful diagonal encoder: feed it one frame per slot, get one packet
/// per slot.
///
/// The generator matrix fixes `k` and the available columns; `emit` says
/// how many of those columns (always the first `emit`, ids `1..=emit`)
/// go out each slot. A network source typically holds the full-width
/// matrix of the whole code family but emits only as many columns as its
/// own link is provisioned for.
pub struct StreamEncoder {
    matrix: GeneratorMatrix,
    emit: usize,
    /// The last `emit` frames, oldest first; `None` marks a frame the
    /// upstream could not supply. Seeded with zero frames so diagonals
    /// reaching before slot 0 are well defined.
    history: VecDeque<Option<Vec<FieldElement>>>,
    next_slot: i64,
}

impl StreamEncoder {
    /// Creates an encoder emitting columns `1..=emit` of `matrix` each
    /// slot.
    ///
    /// # Errors
    ///
    /// Fails if `emit` exceeds the matrix width or is smaller than `k`
    /// (emitting fewer than `k` columns per slot would leave diagonals
    /// short of symbols even on a perfect channel).
    pub fn new(matrix: GeneratorMatrix, emit: usize) -> Result<Self, Error> {
        if emit > matrix.n() || emit < matrix.k() {
            return Err(Error::BadConfig(format!(
                "encoder asked to emit {emit} of {} columns of a k = {} code; \
                 emit must lie in {}..={}",
                matrix.n(),
                matrix.k(),
                matrix.k(),
                matrix.n()
            )));
        }
        let k = matrix.k();
        let mut history = VecDeque::with_capacity(emit);
        for _ in 0..emit {
            history.push_back(Some(vec![FieldElement::ZERO; k]));
        }
        Ok(StreamEncoder {
            matrix,
            emit,
            history,
            next_slot: 0,
        })
    }

    /// Frame length `k`.
    #[must_use]
    pub fn k(&self) -> usize {
        self.matrix.k()
    }

    /// Symbols per packet.
    #[must_use]
    pub fn emitted_per_slot(&self) -> usize {
        self.emit
    }

    /// The slot the next call must carry.
    #[must_use]
    pub fn next_slot(&self) -> i64 {
        self.next_slot
    }

    #[must_use]
    pub fn matrix(&self) -> &GeneratorMatrix {
        &self.matrix
    }

    /// Encodes the packet for slot `t` from the frame for slot `t`.
    ///
    /// # Errors
    ///
    /// Fails if `t` is not the expected next slot or the frame is not `k`
    /// elements long.
    pub fn encode_slot(&mut self, t: i64, frame: &[FieldElement]) -> Result<Packet, Error> {
        if frame.len() != self.matrix.k() {
            return Err(Error::BadMessageLength {
                expected: self.matrix.k(),
                got: frame.len(),
            });
        }
        self.encode_slot_masked(t, Some(frame))
    }

    /// Like [`StreamEncoder::encode_slot`], but the frame may be missing.
    ///
    /// A `None` frame (the upstream failed to deliver it) voids the
    /// systematic positions of this slot and poisons every diagonal the
    /// frame participates in: parity over a diagonal with any missing
    /// contributor is emitted void.
    ///
    /// # Errors
    ///
    /// Fails if `t` is not the expected next slot or a present frame has
    /// the wrong length.
    pub fn encode_slot_masked(
        &mut self,
        t: i64,
        frame: Option<&[FieldElement]>,
    ) -> Result<Packet, Error> {
        if t != self.next_slot {
            return Err(Error::ClockMismatch {
                expected: self.next_slot,
                got: t,
            });
        }
        if let Some(f) = frame {
            if f.len() != self.matrix.k() {
                return Err(Error::BadMessageLength {
                    expected: self.matrix.k(),
                    got: f.len(),
                });
            }
        }
        self.next_slot += 1;
        self.history.pop_front();
        self.history.push_back(frame.map(<[FieldElement]>::to_vec));

        let k = self.matrix.k();
        let mut symbols = Vec::with_capacity(self.emit);
        for d in 0..self.emit {
            if d < k {
                // Systematic column d+1 of diagonal t-d is frame[t][d].
                match frame {
                    Some(f) => symbols.push(CodedSymbol::new(d as u16 + 1, f[d])),
                    None => symbols.push(CodedSymbol::void()),
                }
                continue;
            }
            // Parity of diagonal t - d, assembled from history. The
            // history holds frames t-emit+1..=t, and the diagonal spans
            // frames t-d..=t-d+k-1, all within that range because d < emit.
            match self.diagonal_message(d) {
                Some(message) => symbols.push(self.matrix.encode(&message, d as u16 + 1)?),
                None => symbols.push(CodedSymbol::void()),
            }
        }
        Ok(Packet::new(symbols))
    }

    /// The message of the diagonal at offset `d` behind the current slot,
    /// or `None` if any contributing frame is missing.
    fn diagonal_message(&self, d: usize) -> Option<Vec<FieldElement>> {
        let k = self.matrix.k();
        let newest = self.history.len() - 1;
        let mut message = Vec::with_capacity(k);
        for v in 0..k {
            // Component v lives in the frame d - v slots back.
            let frame = self.history[newest - (d - v)].as_ref()?;
            message.push(frame[v]);
        }
        Some(message)
    }
}

impl fmt::Debug for StreamEncoder {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("StreamEncoder")
            .field("k", &self.matrix.k())
            .field("emit", &self.emit)
            .field("next_slot", &self.next_slot)
            .finish()
    }
}

// ============================================================
// Tests
// ============================================================

#[cfg(test)]
mod tests {
    use super::*;
    use crate::field::FieldParams;
    use crate::mds::VOID_HEADER;

    fn fe(v: u16) -> FieldElement {
        FieldElement::new(v)
    }

    /// Deterministic, obviously-distinct frame content.
    fn frame(k: usize, t: i64) -> Vec<FieldElement> {
        (0..k)
            .map(|v| fe(((t as usize * 16 + v + 1) % 255 + 1) as u16))
            .collect()
    }

    fn encoder(k: usize, n: usize, emit: usize) -> StreamEncoder {
        let g = GeneratorMatrix::systematic(k, n, FieldParams::gf256()).unwrap();
        StreamEncoder::new(g, emit).unwrap()
    }

    #[test]
    fn rejects_bad_emit_widths() {
        let g = GeneratorMatrix::systematic(2, 4, FieldParams::gf256()).unwrap();
        assert!(StreamEncoder::new(g.clone(), 5).is_err());
        assert!(StreamEncoder::new(g.clone(), 1).is_err());
        assert!(StreamEncoder::new(g, 2).is_ok());
    }

    #[test]
    fn enforces_slot_clock() {
        let mut enc = encoder(2, 3, 3);
        let f0 = frame(2, 0);
        enc.encode_slot(0, &f0).unwrap();
        assert_eq!(
            enc.encode_slot(2, &f0).unwrap_err(),
            Error::ClockMismatch {
                expected: 1,
                got: 2
            }
        );
    }

    #[test]
    fn systematic_positions_spell_out_current_frame() {
        let mut enc = encoder(2, 3, 3);
        for t in 0..10 {
            let f = frame(2, t);
            let p = enc.encode_slot(t, &f).unwrap();
            assert_eq!(p.len(), 3);
            assert_eq!(p.symbol(0), CodedSymbol::new(1, f[0]));
            assert_eq!(p.symbol(1), CodedSymbol::new(2, f[1]));
            assert_eq!(p.symbol(2).header(), 3);
        }
    }

    #[test]
    fn early_parity_covers_zero_frames() {
        // At slot 0 the k = 2 parity position covers diagonal -2, which
        // lies entirely before slot 0: live header, zero value. At slot 1
        // diagonal -1 already picks up one component of frame 0.
        let g = GeneratorMatrix::systematic(2, 3, FieldParams::gf256()).unwrap();
        let mut enc = StreamEncoder::new(g.clone(), 3).unwrap();
        let f0 = frame(2, 0);
        let p0 = enc.encode_slot(0, &f0).unwrap();
        assert_eq!(p0.symbol(2), CodedSymbol::new(3, fe(0)));
        let p1 = enc.encode_slot(1, &frame(2, 1)).unwrap();
        let want = g.encode(&[fe(0), f0[1]], 3).unwrap();
        assert_eq!(p1.symbol(2), want);
        assert_ne!(p1.symbol(2).value(), fe(0));
    }

    #[test]
    fn parity_matches_independent_diagonal_assembly() {
        // Rebuild every diagonal from the raw frames and encode it with
        // the matrix directly; the streamed parity must agree.
        let (k, n) = (3, 6);
        let g = GeneratorMatrix::systematic(k, n, FieldParams::gf256()).unwrap();
        let mut enc = StreamEncoder::new(g.clone(), n).unwrap();
        let horizon = 24i64;
        let frames: Vec<Vec<FieldElement>> = (0..horizon).map(|t| frame(k, t)).collect();
        let fetch = |i: i64, v: usize| {
            if i < 0 {
                fe(0)
            } else {
                frames[i as usize][v]
            }
        };
        for t in 0..horizon {
            let p = enc.encode_slot(t, &frames[t as usize]).unwrap();
            for d in k..n {
                let b = t - d as i64;
                let message: Vec<FieldElement> = (0..k).map(|v| fetch(b + v as i64, v)).collect();
                let want = g.encode(&message, d as u16 + 1).unwrap();
                assert_eq!(p.symbol(d), want, "slot {t} position {d}");
            }
        }
    }

    #[test]
    fn missing_frame_voids_systematic_and_poisons_diagonals() {
        let (k, n) = (2, 4);
        let mut enc = encoder(k, n, n);
        for t in 0..3 {
            enc.encode_slot(t, &frame(k, t)).unwrap();
        }
        let p3 = enc.encode_slot_masked(3, None).unwrap();
        assert!(p3.symbol(0).is_void());
        assert!(p3.symbol(1).is_void());
        // Diagonals 3-2 = 1 and 3-3 = 0 do not contain frame 3
        // (they span frames 1..=2 and 0..=1), so their parity is live.
        assert_eq!(p3.symbol(2).header(), 3);
        assert_eq!(p3.symbol(3).header(), 4);

        // Frame 3 sits on diagonals 2 and 3, whose parity goes out over
        // slots 4..=6; parity of other diagonals stays live.
        let p4 = enc.encode_slot(4, &frame(k, 4)).unwrap();
        assert!(!p4.symbol(0).is_void());
        assert!(p4.symbol(2).is_void()); // diagonal 2 spans frames 2, 3
        assert!(!p4.symbol(3).is_void()); // diagonal 1 spans frames 1, 2
        let p5 = enc.encode_slot(5, &frame(k, 5)).unwrap();
        assert!(p5.symbol(2).is_void()); // diagonal 3 spans frames 3, 4
        assert!(p5.symbol(3).is_void()); // diagonal 2 spans frames 2, 3
        let p6 = enc.encode_slot(6, &frame(k, 6)).unwrap();
        assert!(!p6.symbol(2).is_void()); // diagonal 4 spans frames 4, 5
        assert!(p6.symbol(3).is_void()); // diagonal 3 spans frames 3, 4
    }

    #[test]
    fn all_void_packet_has_only_void_headers() {
        let p = Packet::all_void(4);
        assert_eq!(p.len(), 4);
        assert!(p.symbols().iter().all(|s| s.header() == VOID_HEADER));
    }
}
