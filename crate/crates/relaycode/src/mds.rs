//! Systematic maximum-distance-separable (MDS) generator matrices and the
//! coded symbols they produce.
//!
//! A `(n, k)` code here is described by a `k x n` generator matrix of the
//! form `[I | P]` where `P` is a Cauchy block: `P[r][c] = 1 / (x_r + y_c)`
//! with the `x_r` and `y_c` drawn from disjoint sets of field elements.
//! Every square submatrix of a Cauchy matrix is nonsingular, so any `k`
//! distinct columns of the generator are linearly independent and any `k`
//! received symbols determine the message. That property is what lets a
//! relay swap which columns it sends without coordinating with the
//! decoder: the symbol header says which column a value came from, and
//! the decoder inverts whatever set it happens to receive.
//!
//! Column identifiers are 1-based on purpose: header value `0` is reserved
//! for a void symbol (an erased or never-filled slot), so a header can be
//! carried as a plain integer with no separate presence flag.

use std::fmt;

use crate::field::{FieldElement, FieldParams};
use crate::Error;

/// Header value reserved for "no symbol here".
pub const VOID_HEADER: u16 = 0;

// ============================================================
// Coded symbols
// ============================================================

/// One field element tagged with the generator column that produced it.
///
/// `header == 0` marks a void symbol: nothing was received in that slot.
/// Void symbols carry value zero and are skipped by the decoder.
#[derive(Clone, Copy, PartialEq, Eq, Hash)]
pub struct CodedSymbol {
    header: u16,
    value: FieldElement,
}

impl CodedSymbol {
    /// A symbol produced by generator column `header` (1-based).
    #[must_use]
    pub const fn new(header: u16, value: FieldElement) -> Self {
        CodedSymbol { header, value }
    }

    /// The void symbol: header 0, value 0.
    #[must_use]
    pub const fn void() -> Self {
        CodedSymbol {
            header: VOID_HEADER,
            value: FieldElement::ZERO,
        }
    }

    /// The 1-based generator column id, or 0 for void.
    #[must_use]
    pub const fn header(self) -> u16 {
        self.header
    }

    /// The coded value.
    #[must_use]
    pub const fn value(self) -> FieldElement {
        self.value
    }

    #[must_use]
    pub const fn is_void(self) -> bool {
        self.header == VOID_HEADER
    }
}

impl fmt::Debug for CodedSymbol {
    /// Compact form: `#h=v` for a live symbol, `#-` for void.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_void() {
            write!(f, "#-")
        } else {
            write!(f, "#{}={:#04x}", self.header, self.value.value())
        }
    }
}

// ============================================================
// Generator matrices
// ============================================================

/// A `k x n` generator matrix over GF(2^m), stored row-major, with a
/// 1-based global id per column.
///
/// The canonical constructor is [`GeneratorMatrix::systematic`];
/// [`GeneratorMatrix::puncture`] selects and reorders columns to model
/// what a downstream decoder actually saw.
#[derive(Clone)]
pub struct GeneratorMatrix {
    k: usize,
    n: usize,
    /// Row-major entries, `entries[r * n + c]`.
    entries: Vec<FieldElement>,
    /// 1-based id of each column in the code family it was drawn from.
    column_ids: Vec<u16>,
    /// Number of leading columns that form an identity prefix, used for
    /// fast-path encoding and decoding.
    systematic_prefix: usize,
    field: FieldParams,
}

impl GeneratorMatrix {
    /// Builds the systematic `[I | Cauchy]` generator for a `(n, k)` code.
    ///
    /// The Cauchy block uses `x_r = r` for rows and `y_c = k + c` for
    /// parity columns, so the field must have at least `n` elements.
    ///
    /// # Errors
    ///
    /// Fails if `k == 0` or `n < k`, or if the field has fewer than `n`
    /// elements.
    pub fn systematic(k: usize, n: usize, field: FieldParams) -> Result<Self, Error> {
        if k == 0 || n < k {
            return Err(Error::BadCodeShape { k, n });
        }
        if (field.order() as usize) < n {
            return Err(Error::FieldTooSmall {
                order: field.order(),
                block_len: n,
            });
        }
        let mut entries = vec![FieldElement::ZERO; k * n];
        for r in 0..k {
            entries[r * n + r] = FieldElement::ONE;
            let x = field.element(r as u32)?;
            for c in k..n {
                let y = field.element(c as u32)?;
                // x and y are distinct elements, so x + y is invertible.
                let denom = field.add(x, y);
                entries[r * n + c] = field.inv(denom)?;
            }
        }
        let column_ids = (1..=n as u16).collect();
        Ok(GeneratorMatrix {
            k,
            n,
            entries,
            column_ids,
            systematic_prefix: k,
            field,
        })
    }

    /// Builds a generator from raw row-major entries with columns labeled
    /// `1..=n`. Mainly useful for testing decoders against hand-built
    /// matrices; nothing about the entries is verified beyond the shape.
    ///
    /// # Errors
    ///
    /// Fails if the shape is degenerate or `entries.len() != k * n`.
    pub fn from_entries(
        k: usize,
        n: usize,
        entries: Vec<FieldElement>,
        field: FieldParams,
    ) -> Result<Self, Error> {
        if k == 0 || n < k {
            return Err(Error::BadCodeShape { k, n });
        }
        if entries.len() != k * n {
            return Err(Error::BadMessageLength {
                expected: k * n,
                got: entries.len(),
            });
        }
        let column_ids = (1..=n as u16).collect();
        let mut matrix = GeneratorMatrix {
            k,
            n,
            entries,
            column_ids,
            systematic_prefix: 0,
            field,
        };
        matrix.systematic_prefix = matrix.compute_systematic_prefix();
        Ok(matrix)
    }

    /// Selects columns by id, in the order given, producing the generator
    /// a decoder faces when exactly those columns arrive.
    ///
    /// # Errors
    ///
    /// Fails on ids not present in this matrix or listed twice.
    pub fn puncture(&self, ids: &[u16]) -> Result<Self, Error> {
        let mut entries = Vec::with_capacity(self.k * ids.len());
        let mut positions = Vec::with_capacity(ids.len());
        for (i, &id) in ids.iter().enumerate() {
            if ids[..i].contains(&id) {
                return Err(Error::DuplicateColumn { id });
            }
            positions.push(self.column_position(id)?);
        }
        for r in 0..self.k {
            for &p in &positions {
                entries.push(self.entries[r * self.n + p]);
            }
        }
        let mut matrix = GeneratorMatrix {
            k: self.k,
            n: ids.len(),
            entries,
            column_ids: ids.to_vec(),
            systematic_prefix: 0,
            field: self.field.clone(),
        };
        matrix.systematic_prefix = matrix.compute_systematic_prefix();
        Ok(matrix)
    }

    /// Message length `k`.
    #[must_use]
    pub fn k(&self) -> usize {
        self.k
    }

    /// Block length `n`.
    #[must_use]
    pub fn n(&self) -> usize {
        self.n
    }

    /// The 1-based ids of the columns, in storage order.
    #[must_use]
    pub fn column_ids(&self) -> &[u16] {
        &self.column_ids
    }

    /// The field this matrix lives in.
    #[must_use]
    pub fn field(&self) -> &FieldParams {
        &self.field
    }

    /// Entry at `(row, col)` by storage position.
    #[must_use]
    pub fn entry(&self, row: usize, col: usize) -> FieldElement {
        self.entries[row * self.n + col]
    }

    fn column_position(&self, id: u16) -> Result<usize, Error> {
        self.column_ids
            .iter()
            .position(|&c| c == id)
            .ok_or(Error::UnknownColumn { id })
    }

    fn compute_systematic_prefix(&self) -> usize {
        let limit = self.k.min(self.n);
        for c in 0..limit {
            for r in 0..self.k {
                let want = if r == c {
                    FieldElement::ONE
                } else {
                    FieldElement::ZERO
                };
                if self.entry(r, c) != want {
                    return c;
                }
            }
        }
        limit
    }

    // ------------------------------------------------------------
    // Encoding
    // ------------------------------------------------------------

    /// Encodes one symbol: the value of column `id` applied to `message`.
    ///
    /// # Errors
    ///
    /// Fails if `message` is not `k` elements long or `id` is not a column
    /// of this matrix.
    pub fn encode(&self, message: &[FieldElement], id: u16) -> Result<CodedSymbol, Error> {
        if message.len() != self.k {
            return Err(Error::BadMessageLength {
                expected: self.k,
                got: message.len(),
            });
        }
        let p = self.column_position(id)?;
        if p < self.systematic_prefix {
            return Ok(CodedSymbol::new(id, message[p]));
        }
        let mut acc = FieldElement::ZERO;
        for (r, &m) in message.iter().enumerate() {
            acc = self
                .field
                .add(acc, self.field.mul(m, self.entries[r * self.n + p]));
        }
        Ok(CodedSymbol::new(id, acc))
    }

    // ------------------------------------------------------------
    // Decoding
    // ------------------------------------------------------------

    /// Recovers the message from received symbols.
    ///
    /// Void symbols are ignored; duplicate headers beyond the first are
    /// ignored; of the distinct live headers, the `k` smallest are used.
    /// The common all-systematic case short-circuits without elimination.
    ///
    /// # Errors
    ///
    /// Fails with [`Error::InsufficientSymbols`] when fewer than `k`
    /// distinct live headers are present, [`Error::UnknownColumn`] when a
    /// header does not belong to this matrix, and
    /// [`Error::SingularSystem`] if the selected columns are dependent
    /// (impossible for an MDS generator, kept as a guard for hand-built
    /// matrices).
    pub fn decode(&self, symbols: &[CodedSymbol]) -> Result<Vec<FieldElement>, Error> {
        let mut chosen: Vec<CodedSymbol> = Vec::with_capacity(self.k);
        let mut live = 0usize;
        for &s in symbols {
            if s.is_void() {
                continue;
            }
            if chosen.iter().any(|c| c.header() == s.header()) {
                continue;
            }
            live += 1;
            let at = chosen
                .iter()
                .position(|c| c.header() > s.header())
                .unwrap_or(chosen.len());
            chosen.insert(at, s);
            if chosen.len() > self.k {
                chosen.pop();
            }
        }
        if live < self.k {
            return Err(Error::InsufficientSymbols {
                have: live,
                need: self.k,
            });
        }

        // Fast path: the k smallest headers are exactly the identity
        // prefix, so the values are the message verbatim.
        if self.systematic_prefix == self.k
            && chosen
                .iter()
                .enumerate()
                .all(|(i, s)| usize::from(s.header()) == i + 1)
        {
            return Ok(chosen.iter().map(|s| s.value()).collect());
        }

        // General path: solve A * message = values where row i of A is
        // the generator column for header i, transposed into an equation.
        let k = self.k;
        let mut a = vec![FieldElement::ZERO; k * k];
        let mut b = vec![FieldElement::ZERO; k];
        for (i, s) in chosen.iter().enumerate() {
            let p = self.column_position(s.header())?;
            for r in 0..k {
                a[i * k + r] = self.entries[r * self.n + p];
            }
            b[i] = s.value();
        }
        solve_in_place(&self.field, &mut a, &mut b, k)?;
        Ok(b)
    }

    // ------------------------------------------------------------
    // MDS verification
    // ------------------------------------------------------------

    /// Checks the MDS property exhaustively: every set of `k` columns must
    /// be nonsingular. Cost grows as `C(n, k)`, fine for the short blocks
    /// this crate works with.
    ///
    /// # Errors
    ///
    /// Returns [`Error::NotMds`] naming the first dependent column set,
    /// or [`Error::TooFewColumns`] when the matrix is narrower than its
    /// dimension and no `k`-subset exists at all.
    pub fn check_mds_exhaustive(&self) -> Result<(), Error> {
        if self.n < self.k {
            return Err(Error::TooFewColumns {
                have: self.n,
                need: self.k,
            });
        }
        let mut subset: Vec<usize> = (0..self.k).collect();
        loop {
            if !self.columns_nonsingular(&subset) {
                return Err(Error::NotMds {
                    columns: subset.iter().map(|&p| self.column_ids[p]).collect(),
                });
            }
            // Advance to the next k-subset of 0..n in lexicographic order.
            let mut i = self.k;
            loop {
                if i == 0 {
                    return Ok(());
                }
                i -= 1;
                if subset[i] < self.n - (self.k - i) {
                    subset[i] += 1;
                    for j in i + 1..self.k {
                        subset[j] = subset[j - 1] + 1;
                    }
                    break;
                }
            }
        }
    }

    fn columns_nonsingular(&self, cols: &[usize]) -> bool {
        let k = self.k;
        let mut a = vec![FieldElement::ZERO; k * k];
        for r in 0..k {
            for (i, &c) in cols.iter().enumerate() {
                a[r * k + i] = self.entries[r * self.n + c];
            }
        }
        let mut b = vec![FieldElement::ZERO; k];
        solve_in_place(&self.field, &mut a, &mut b, k).is_ok()
    }
}

impl fmt::Debug for GeneratorMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("GeneratorMatrix")
            .field("k", &self.k)
            .field("n", &self.n)
            .field("column_ids", &self.column_ids)
            .finish()
    }
}

/// Gauss-Jordan elimination over the field: solves `A x = b` in place,
/// leaving the solution in `b`. `a` is `k x k` row-major.
fn solve_in_place(
    field: &FieldParams,
    a: &mut [FieldElement],
    b: &mut [FieldElement],
    k: usize,
) -> Result<(), Error> {
    for col in 0..k {
        let pivot = (col..k)
            .find(|&r| !a[r * k + col].is_zero())
            .ok_or(Error::SingularSystem)?;
        if pivot != col {
            for c in 0..k {
                a.swap(pivot * k + c, col * k + c);
            }
            b.swap(pivot, col);
        }
        let inv = field.inv(a[col * k + col])?;
        for c in 0..k {
            a[col * k + c] = field.mul(a[col * k + c], inv);
        }
        b[col] = field.mul(b[col], inv);
        for r in 0..k {
            if r == col || a[r * k + col].is_zero() {
                continue;
            }
            let factor = a[r * k + col];
            for c in 0..k {
                let delta = field.mul(factor, a[col * k + c]);
                a[r * k + c] = field.add(a[r * k + c], delta);
            }
            let delta = field.mul(factor, b[col]);
            b[r] = field.add(b[r], delta);
        }
    }
    Ok(())
}

// ============================================================
// Tests
// ============================================================
