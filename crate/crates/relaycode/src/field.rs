//! Arithmetic in binary extension fields GF(2^m), m in 1..=16.
//!
//! Every code in this crate works over one of these fields. The default is
//! GF(2^8) with the reduction polynomial `x^8 + x^4 + x^3 + x^2 + 1`
//! (0x11D), so one symbol is one byte on the wire. Smaller and larger
//! exponents are supported so that the per-symbol header overhead can be
//! swept against the field size.
//!
//! Construction verifies that the reduction polynomial is irreducible of
//! degree exactly `m` by trial division. For m <= 8 multiplication is
//! table-driven: log/antilog tables are built from a verified generator
//! element (an element whose powers enumerate every nonzero value). For
//! m > 8 multiplication falls back to carry-less multiply plus reduction,
//! which is also the reference path the tables are checked against.

use std::fmt;

use crate::Error;

/// Largest supported field exponent.
pub const MAX_EXPONENT: u32 = 16;

/// Default reduction polynomials, indexed by exponent (index 0 unused).
/// Each entry is verified irreducible at construction time, so a bad entry
/// here cannot produce a broken field, only a constructor error.
const DEFAULT_POLYS: [u32; 17] = [
    0,       //
    0x3,     // x + 1
    0x7,     // x^2 + x + 1
    0xB,     // x^3 + x + 1
    0x13,    // x^4 + x + 1
    0x25,    // x^5 + x^2 + 1
    0x43,    // x^6 + x + 1
    0x83,    // x^7 + x + 1
    0x11D,   // x^8 + x^4 + x^3 + x^2 + 1
    0x211,   // x^9 + x^4 + 1
    0x409,   // x^10 + x^3 + 1
    0x805,   // x^11 + x^2 + 1
    0x1053,  // x^12 + x^6 + x^4 + x + 1
    0x201B,  // x^13 + x^4 + x^3 + x + 1
    0x4443,  // x^14 + x^10 + x^6 + x + 1
    0x8003,  // x^15 + x + 1
    0x1100B, // x^16 + x^12 + x^3 + x + 1
];

// ============================================================
// Field element
// ============================================================

/// One element of GF(2^m), stored as its m-bit value.
///
/// Elements do not carry a reference to their field; all arithmetic goes
/// through [`FieldParams`], which owns the tables.
#[derive(Clone, Copy, PartialEq, Eq, Hash, Default, PartialOrd, Ord)]
pub struct FieldElement(u16);

impl FieldElement {
    /// The additive identity.
    pub const ZERO: FieldElement = FieldElement(0);
    /// The multiplicative identity.
    pub const ONE: FieldElement = FieldElement(1);

    /// Wraps a raw value. The caller is responsible for the value fitting
    /// in the field it will be used with; [`FieldParams::element`] is the
    /// checked constructor.
    #[must_use]
    pub const fn new(value: u16) -> Self {
        FieldElement(value)
    }

    /// The raw m-bit value.
    #[must_use]
    pub const fn value(self) -> u16 {
        self.0
    }

    #[must_use]
    pub const fn is_zero(self) -> bool {
        self.0 == 0
    }
}

impl fmt::Debug for FieldElement {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{:#04x}", self.0)
    }
}

// ============================================================
// Field parameters
// ============================================================

/// A binary extension field GF(2^m) with its reduction polynomial and,
/// for m <= 8, precomputed log/antilog tables.
///
/// Tables are immutable after construction; all operations are pure, so a
/// `FieldParams` can be shared freely across threads.
#[derive(Clone)]
pub struct FieldParams {
    m: u32,
    poly: u32,
    /// log[a] for a in 1..order; log[0] is unused. Empty for m > 8.
    log: Vec<u16>,
    /// exp[i] = g^i for i in 0..2*(order-1), doubled so that products of
    /// two logs index without a modulo. Empty for m > 8.
    exp: Vec<u16>,
}

impl FieldParams {
    /// Builds GF(2^m) with the given reduction polynomial.
    ///
    /// # Errors
    ///
    /// Fails if `m` is outside 1..=16, if `poly` does not have degree
    /// exactly `m`, or if `poly` is reducible.
    pub fn new(m: u32, poly: u32) -> Result<Self, Error> {
        if m == 0 || m > MAX_EXPONENT {
            return Err(Error::InvalidExponent { m });
        }
        if poly >> m != 1 {
            return Err(Error::WrongPolynomialDegree { poly, m });
        }
        if !is_irreducible(poly, m) {
            return Err(Error::ReduciblePolynomial { poly });
        }
        let (log, exp) = if m <= 8 {
            build_tables(m, poly)
        } else {
            (Vec::new(), Vec::new())
        };
        Ok(FieldParams { m, poly, log, exp })
    }

    /// GF(2^8) with the standard 0x11D polynomial.
    #[must_use]
    pub fn gf256() -> Self {
        FieldParams::new(8, DEFAULT_POLYS[8]).expect("default GF(2^8) is valid")
    }

    /// GF(2^m) with a stock irreducible polynomial for that exponent.
    ///
    /// # Errors
    ///
    /// Fails if `m` is outside 1..=16.
    pub fn with_exponent(m: u32) -> Result<Self, Error> {
        if m == 0 || m > MAX_EXPONENT {
            return Err(Error::InvalidExponent { m });
        }
        FieldParams::new(m, DEFAULT_POLYS[m as usize])
    }

    /// The exponent m (bits per symbol).
    #[must_use]
    pub fn bits(&self) -> u32 {
        self.m
    }

    /// Number of field elements, 2^m.
    #[must_use]
    pub fn order(&self) -> u32 {
        1 << self.m
    }

    /// The reduction polynomial bit mask.
    #[must_use]
    pub fn polynomial(&self) -> u32 {
        self.poly
    }

    /// Checked element constructor.
    ///
    /// # Errors
    ///
    /// Fails if `value >= 2^m`.
    pub fn element(&self, value: u32) -> Result<FieldElement, Error> {
        if value >= self.order() {
            return Err(Error::ValueOutOfField {
                value,
                order: self.order(),
            });
        }
        Ok(FieldElement(value as u16))
    }

    /// True if the element's value fits in this field.
    #[must_use]
    pub fn contains(&self, a: FieldElement) -> bool {
        u32::from(a.value()) < self.order()
    }

    /// Addition; in characteristic 2 this is bitwise XOR and is its own
    /// inverse.
    #[inline]
    #[must_use]
    pub fn add(&self, a: FieldElement, b: FieldElement) -> FieldElement {
        FieldElement(a.0 ^ b.0)
    }

    /// Multiplication, table-driven for m <= 8.
    #[inline]
    #[must_use]
    pub fn mul(&self, a: FieldElement, b: FieldElement) -> FieldElement {
        if a.0 == 0 || b.0 == 0 {
            return FieldElement::ZERO;
        }
        if self.log.is_empty() {
            FieldElement(clmul_reduce(u32::from(a.0), u32::from(b.0), self.poly, self.m) as u16)
        } else {
            let idx =
                usize::from(self.log[usize::from(a.0)]) + usize::from(self.log[usize::from(b.0)]);
            FieldElement(self.exp[idx])
        }
    }

    /// Reference multiplication: carry-less multiply then reduce, with no
    /// table involved. Slower than [`FieldParams::mul`] for m <= 8, kept
    /// as the independent path the tables are validated against.
    #[must_use]
    pub fn mul_schoolbook(&self, a: FieldElement, b: FieldElement) -> FieldElement {
        FieldElement(clmul_reduce(u32::from(a.0), u32::from(b.0), self.poly, self.m) as u16)
    }

    /// Exponentiation by square-and-multiply.
    #[must_use]
    pub fn pow(&self, a: FieldElement, mut e: u32) -> FieldElement {
        let mut base = a;
        let mut acc = FieldElement::ONE;
        while e > 0 {
            if e & 1 == 1 {
                acc = self.mul(acc, base);
            }
            base = self.mul(base, base);
            e >>= 1;
        }
        acc
    }

    /// Multiplicative inverse.
    ///
    /// # Errors
    ///
    /// Fails on zero input.
    #[inline]
    pub fn inv(&self, a: FieldElement) -> Result<FieldElement, Error> {
        if a.0 == 0 {
            return Err(Error::ZeroInverse);
        }
        if self.log.is_empty() {
            // a^(2^m - 2) = a^-1 in a field of order 2^m.
            return Ok(self.pow(a, self.order() - 2));
        }
        let span = (self.order() - 1) as usize;
        let idx = span - usize::from(self.log[usize::from(a.0)]);
        Ok(FieldElement(self.exp[idx]))
    }
}

impl fmt::Debug for FieldParams {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("FieldParams")
            .field("m", &self.m)
            .field("poly", &format_args!("{:#x}", self.poly))
            .finish()
    }
}

impl PartialEq for FieldParams {
    fn eq(&self, other: &Self) -> bool {
        self.m == other.m && self.poly == other.poly
    }
}

impl Eq for FieldParams {}

// ============================================================
// Polynomial helpers
// ============================================================

/// Degree of a nonzero GF(2) polynomial bit mask.
fn degree(p: u32) -> u32 {
    31 - p.leading_zeros()
}

/// Remainder of polynomial division over GF(2).
fn poly_rem(mut a: u32, b: u32) -> u32 {
    let db = degree(b);
    while a != 0 && degree(a) >= db {
        a ^= b << (degree(a) - db);
    }
    a
}

/// Trial division by every polynomial of degree 1..=m/2. A degree-m
/// polynomial with no factor of degree at most m/2 is irreducible.
fn is_irreducible(poly: u32, m: u32) -> bool {
    for q in 2u32..(2 << (m / 2)) {
        if q >> 1 == 0 {
            continue;
        }
        if poly_rem(poly, q) == 0 {
            return false;
        }
    }
    true
}

/// Carry-less multiply of two field values followed by reduction.
fn clmul_reduce(a: u32, b: u32, poly: u32, m: u32) -> u32 {
    let mut acc: u64 = 0;
    let wide_a = u64::from(a);
    for i in 0..m {
        if (b >> i) & 1 == 1 {
            acc ^= wide_a << i;
        }
    }
    let wide_poly = u64::from(poly);
    for d in (m..2 * m).rev() {
        if (acc >> d) & 1 == 1 {
            acc ^= wide_poly << (d - m);
        }
    }
    acc as u32
}

/// Finds a generator of the multiplicative group and tabulates its powers.
/// Returns (log, exp) with exp doubled for modulo-free products.
fn build_tables(m: u32, poly: u32) -> (Vec<u16>, Vec<u16>) {
    let order = 1u32 << m;
    let span = (order - 1) as usize;
    if span == 1 {
        // GF(2): the multiplicative group is trivial.
        return (vec![0, 0], vec![1, 1]);
    }
    'candidates: for g in 2..order {
        let mut exp = Vec::with_capacity(2 * span);
        let mut seen = vec![false; order as usize];
        let mut x = 1u32;
        for _ in 0..span {
            if seen[x as usize] {
                continue 'candidates;
            }
            seen[x as usize] = true;
            exp.push(x as u16);
            x = clmul_reduce(x, g, poly, m);
        }
        if x != 1 {
            continue;
        }
        let mut log = vec![0u16; order as usize];
        for (i, &e) in exp.iter().enumerate() {
            log[usize::from(e)] = i as u16;
        }
        exp.extend_from_within(..);
        return (log, exp);
    }
    // The multiplicative group of a finite field is cyclic, so a generator
    // always exists; reaching this line means the polynomial was reducible,
    // which the constructor already rejected.
    unreachable!("no generator found for an irreducible polynomial")
}

// ============================================================
// Tests
// ============================================================
