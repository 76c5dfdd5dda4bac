//! Closed-form rate and loss analysis for relay chains.
//!
//! Everything here is exact arithmetic on network parameters — no
//! simulation. A network is a chain: a source, `L` relays, a destination,
//! connected by `L + 1` links. Link `j` (1-based) may erase up to `N_j`
//! packets, and every frame must be delivered within `T` slots of being
//! produced.
//!
//! The quantities computed:
//!
//! * [`capacity_p2p`] — the best possible rate over a single link,
//!   `(T - N + 1) / (T + 1)`.
//! * [`capacity_upper`] — the best possible rate across the whole chain.
//!   Only the most heavily provisioned link needs its full block length;
//!   the other links get away with fewer symbols per slot, which is why
//!   the denominator is set by the *largest* budget rather than the sum.
//! * [`code_dimensions`] — the frame and block lengths that meet that
//!   bound: `k = T - sum(N) + 1` message symbols and `n_j = k + N_j`
//!   symbols per slot on link `j`.
//! * [`achievable_rate_with_header`] — the rate after paying for the
//!   per-symbol column header that symbol-wise relaying needs.
//! * [`mdf_rate`] / [`if_rate`] — what the two classical baselines
//!   achieve: decoding whole blocks at every relay with the delay split
//!   between hops, or coding once end to end over the combined budget.
//! * [`loss_upper_bound`] — a union-style bound on the frame-loss ratio
//!   under random (rather than budgeted) erasures.
//!
//! Rates are exact rationals ([`Rate`]); only the probabilistic loss
//! bound uses floating point.

use num_rational::Ratio;

use crate::Error;

/// An information rate as an exact rational number of message symbols per
/// transmitted symbol.
pub type Rate = Ratio<i64>;

// ============================================================
// Network description
// ============================================================

/// A relay chain: the end-to-end delay bound and one erasure budget per
/// link, source side first.
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct NetworkConfig {
    delay: usize,
    budgets: Vec<usize>,
}

impl NetworkConfig {
    /// # Errors
    ///
    /// Fails if `budgets` is empty — a chain has at least one link.
    pub fn new(delay: usize, budgets: Vec<usize>) -> Result<Self, Error> {
        if budgets.is_empty() {
            return Err(Error::BadConfig(
                "a network needs at least one link (one erasure budget)".into(),
            ));
        }
        Ok(NetworkConfig { delay, budgets })
    }

    /// End-to-end decoding delay `T` in slots.
    #[must_use]
    pub fn delay(&self) -> usize {
        self.delay
    }

    /// Per-link erasure budgets, `budgets()[j - 1]` for link `j`.
    #[must_use]
    pub fn budgets(&self) -> &[usize] {
        &self.budgets
    }

    /// Number of links, `L + 1`.
    #[must_use]
    pub fn links(&self) -> usize {
        self.budgets.len()
    }

    /// Number of relays, `L`.
    #[must_use]
    pub fn relays(&self) -> usize {
        self.budgets.len() - 1
    }

    #[must_use]
    pub fn sum_budgets(&self) -> usize {
        self.budgets.iter().sum()
    }

    #[must_use]
    pub fn max_budget(&self) -> usize {
        self.budgets.iter().copied().max().unwrap_or(0)
    }
}

// ============================================================
// Capacities
// ============================================================

/// Rate capacity of a single link with delay `T` and budget `N`:
/// `(T - N + 1) / (T + 1)`, or zero when the budget eats the whole delay
/// (`T < N`).
#[must_use]
pub fn capacity_p2p(delay: usize, budget: usize) -> Rate {
    if delay < budget {
        return Rate::from_integer(0);
    }
    Rate::new((delay - budget + 1) as i64, (delay + 1) as i64)
}

/// Rate capacity of a relay chain with delay `T` and per-link budgets
/// `N_1..N_{L+1}`:
///
/// ```text
/// (T - sum(N) + 1) / (T - (sum(N) - max(N)) + 1)
/// ```
///
/// or zero when `T < sum(N)`. With a single link this reduces to
/// [`capacity_p2p`]. It is never larger than any single link's capacity:
/// the chain cannot beat its weakest hop.
#[must_use]
pub fn capacity_upper(delay: usize, budgets: &[usize]) -> Rate {
    let sum: usize = budgets.iter().sum();
    let max = budgets.iter().copied().max().unwrap_or(0);
    if delay < sum {
        return Rate::from_integer(0);
    }
    Rate::new((delay - sum + 1) as i64, (delay - (sum - max) + 1) as i64)
}

/// The code dimensions achieving [`capacity_upper`].
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct CodeDimensions {
    /// Message symbols per frame, `T - sum(N) + 1`.
    pub k: usize,
    /// Symbols per slot on each link, `n_j = k + N_j`.
    pub block_lengths: Vec<usize>,
    /// The widest block, `k + max(N)`; the generator matrix is built at
    /// this width and each link transmits a prefix of its columns.
    pub n_max: usize,
}

/// Computes the frame length and per-link block lengths for a chain.
///
/// # Errors
///
/// Fails with [`Error::RateZero`] when `T < sum(N)` — no code can meet
/// the delay.
pub fn code_dimensions(delay: usize, budgets: &[usize]) -> Result<CodeDimensions, Error> {
    let sum: usize = budgets.iter().sum();
    if delay < sum {
        return Err(Error::RateZero {
            delay: delay as u64,
            budget: sum as u64,
        });
    }
    let k = delay - sum + 1;
    let block_lengths: Vec<usize> = budgets.iter().map(|&n| k + n).collect();
    let n_max = k + budgets.iter().copied().max().unwrap_or(0);
    Ok(CodeDimensions {
        k,
        block_lengths,
        n_max,
    })
}

/// Smallest number of bits that can address `n` distinct values,
/// `ceil(log2(n))`; zero for `n = 1`.
#[must_use]
pub fn ceil_log2(n: usize) -> u32 {
    assert!(n >= 1, "ceil_log2 of zero");
    usize::BITS - (n - 1).leading_zeros()
}

/// The net rate of symbol-wise relaying once each symbol carries a
/// `ceil(log2(n_max))`-bit column header next to its `field_bits`-bit
/// value:
///
/// ```text
/// k / (n_max + n_max * ceil(log2(n_max)) / field_bits)
/// ```
///
/// Exact rational; approaches [`capacity_upper`] from below as the field
/// grows.
///
/// # Errors
///
/// Fails if `T < sum(N)` ([`Error::RateZero`]), `field_bits` is zero
/// ([`Error::InvalidExponent`]), or the field cannot address `n_max`
/// distinct columns ([`Error::FieldTooSmall`]).
pub fn achievable_rate_with_header(
    delay: usize,
    budgets: &[usize],
    field_bits: u32,
) -> Result<Rate, Error> {
    if field_bits == 0 {
        return Err(Error::InvalidExponent { m: 0 });
    }
    let dims = code_dimensions(delay, budgets)?;
    if field_bits < 32 && (1usize << field_bits) < dims.n_max {
        return Err(Error::FieldTooSmall {
            order: 1 << field_bits,
            block_len: dims.n_max,
        });
    }
    let header_bits = ceil_log2(dims.n_max);
    Ok(Rate::new(
        dims.k as i64 * i64::from(field_bits),
        dims.n_max as i64 * i64::from(field_bits + header_bits),
    ))
}

// ============================================================
// Baseline rates
// ============================================================

/// Best rate of per-hop block decoding: the delay is split into per-hop
/// delays `T_1 + ... + T_{L+1} <= T` and every hop runs its own
/// single-link code, so the chain moves at the slowest hop:
///
/// ```text
/// max over splits of min_j capacity_p2p(T_j, N_j)
/// ```
///
/// Returns the rate and the lexicographically smallest split achieving
/// it.
///
/// # Errors
///
/// Fails if the number of delay splits to scan exceeds an internal guard
/// (10^7); reachable only for delays far beyond anything this crate
/// simulates.
pub fn mdf_rate(delay: usize, budgets: &[usize]) -> Result<(Rate, Vec<usize>), Error> {
    let links = budgets.len();
    let splits = binomial((delay + links) as u64, links as u64);
    const GUARD: u128 = 10_000_000;
    if splits > GUARD {
        return Err(Error::GuardExceeded {
            combinations: splits,
            limit: GUARD,
        });
    }
    let mut best_rate = Rate::from_integer(0);
    let mut best_split = vec![0usize; links];
    let mut split = vec![0usize; links];
    search_splits(
        delay,
        budgets,
        0,
        &mut split,
        &mut best_rate,
        &mut best_split,
    );
    Ok((best_rate, best_split))
}

fn search_splits(
    remaining: usize,
    budgets: &[usize],
    hop: usize,
    split: &mut Vec<usize>,
    best_rate: &mut Rate,
    best_split: &mut Vec<usize>,
) {
    if hop == budgets.len() {
        let rate = split
            .iter()
            .zip(budgets)
            .map(|(&t, &n)| capacity_p2p(t, n))
            .min()
            .unwrap_or_else(|| Rate::from_integer(0));
        if rate > *best_rate {
            *best_rate = rate;
            best_split.clone_from(split);
        }
        return;
    }
    for t in 0..=remaining {
        split[hop] = t;
        search_splits(
            remaining - t,
            budgets,
            hop + 1,
            split,
            best_rate,
            best_split,
        );
    }
    split[hop] = 0;
}

/// Rate of a single end-to-end code with verbatim forwarding: the chain
/// behaves like one link whose budget is the sum of all link budgets,
/// so the rate is `capacity_p2p(T, sum(N))`.
#[must_use]
pub fn if_rate(delay: usize, budgets: &[usize]) -> Rate {
    capacity_p2p(delay, budgets.iter().sum())
}

// ============================================================
// Probabilistic loss bound
// ============================================================

/// Exact binomial coefficient `C(n, k)`.
#[must_use]
pub fn binomial(n: u64, k: u64) -> u128 {
    if k > n {
        return 0;
    }
    let k = k.min(n - k);
    let mut acc: u128 = 1;
    for i in 0..k {
        acc = acc * u128::from(n - i) / u128::from(i + 1);
    }
    acc
}

/// Upper bound on the frame-loss ratio of symbol-wise relaying when link
/// `j` erases packets independently with probability `alphas[j]` instead
/// of respecting its budget.
///
/// A frame survives unless some link suffers more than its budget `N_j`
/// of erasures close enough to matter; the window that can affect one
/// frame spans `2k + 2 N_j + 1` slots. Union-bounding over links:
///
/// ```text
/// sum_j  sum_{u = N_j + 1}^{2k + 2 N_j + 1}
///     C(2k + 2 N_j + 1, u) * a_j^u * (1 - a_j)^(2k + 2 N_j + 1 - u)
/// ```
///
/// clamped to [0, 1]. Terms are accumulated smallest-first to keep the
/// floating-point sum tight.
///
/// # Errors
///
/// Fails if `alphas` and `budgets` disagree in length or any probability
/// is outside [0, 1].
pub fn loss_upper_bound(k: usize, budgets: &[usize], alphas: &[f64]) -> Result<f64, Error> {
    if alphas.len() != budgets.len() {
        return Err(Error::BadConfig(format!(
            "{} erasure rates supplied for {} links",
            alphas.len(),
            budgets.len()
        )));
    }
    let mut total = 0.0f64;
    for (&n_j, &alpha) in budgets.iter().zip(alphas) {
        if !(0.0..=1.0).contains(&alpha) {
            return Err(Error::BadProbability { value: alpha });
        }
        let window = (2 * k + 2 * n_j + 1) as u64;
        // For the small rates of interest the summands shrink as u grows,
        // so summing from u = window downward accumulates ascending
        // magnitudes.
        let mut link_sum = 0.0f64;
        for u in (n_j as u64 + 1..=window).rev() {
            let term = binomial(window, u) as f64
                * alpha.powi(u as i32)
                * (1.0 - alpha).powi((window - u) as i32);
            link_sum += term;
        }
        total += link_sum;
    }
    Ok(total.clamp(0.0, 1.0))
}

// ============================================================
// Tests
// ============================================================
