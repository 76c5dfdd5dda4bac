//! Erasure patterns: which packets each link drops, and where patterns
//! come from.
//!
//! A pattern is a boolean grid, one row per link and one column per time
//! slot; `true` means the packet sent on that link in that slot never
//! arrives. Three sources of patterns are provided:
//!
//! * hand-built and text-built constructors for tests and traces,
//! * exhaustive enumeration of every pattern within per-link budgets,
//!   with a combination-count guard,
//! * random samplers — independent erasures for loss measurements, and a
//!   rejection sampler for patterns admissible under a sliding-window
//!   budget.
//!
//! Patterns are finite; any slot outside the recorded horizon is treated
//! as erasure-free, which is what a simulator needs while it drains
//! in-flight diagonals past the last interesting slot.

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::analysis::binomial;
use crate::Error;

/// Largest number of patterns an exhaustive enumeration may visit.
pub const ENUMERATION_GUARD: u128 = 10_000_000;

// ============================================================
// Erasure patterns
// ============================================================

/// A fixed assignment of packet erasures to (link, slot) pairs.
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct ErasurePattern {
    /// `erased[link][slot]`; links are 0-based here (link j of a chain is
    /// row j - 1).
    erased: Vec<Vec<bool>>,
    horizon: usize,
}

impl ErasurePattern {
    /// The empty pattern: nothing erased anywhere.
    #[must_use]
    pub fn all_clear(links: usize, horizon: usize) -> Self {
        ErasurePattern {
            erased: vec![vec![false; horizon]; links],
            horizon,
        }
    }

    /// Builds a pattern from explicit (link, slot) erasures, links
    /// 0-based.
    ///
    /// # Errors
    ///
    /// Fails if any coordinate is outside the grid.
    pub fn from_slots(
        links: usize,
        horizon: usize,
        slots: &[(usize, usize)],
    ) -> Result<Self, Error> {
        let mut pattern = ErasurePattern::all_clear(links, horizon);
        for &(link, slot) in slots {
            if link >= links || slot >= horizon {
                return Err(Error::BadConfig(format!(
                    "erasure at link {link}, slot {slot} outside a {links} x {horizon} grid"
                )));
            }
            pattern.erased[link][slot] = true;
        }
        Ok(pattern)
    }

    /// Parses one `'0'`/`'1'` string per link, slot 0 leftmost.
    ///
    /// # Errors
    ///
    /// Fails on characters other than `'0'`/`'1'`, ragged rows, or an
    /// empty row list.
    pub fn from_ascii(rows: &[&str]) -> Result<Self, Error> {
        if rows.is_empty() {
            return Err(Error::BadConfig("no links in erasure pattern".into()));
        }
        let horizon = rows[0].len();
        let mut erased = Vec::with_capacity(rows.len());
        for (i, row) in rows.iter().enumerate() {
            if row.len() != horizon {
                return Err(Error::BadConfig(format!(
                    "link {i} has {} slots, link 0 has {horizon}",
                    row.len()
                )));
            }
            let mut flags = Vec::with_capacity(horizon);
            for ch in row.chars() {
                match ch {
                    '0' => flags.push(false),
                    '1' => flags.push(true),
                    other => {
                        return Err(Error::BadConfig(format!(
                            "erasure pattern may contain only '0' and '1', found {other:?}"
                        )))
                    }
                }
            }
            erased.push(flags);
        }
        Ok(ErasurePattern { erased, horizon })
    }

    /// Periodic worst-case bursts: on every link, the first `burst[link]`
    /// slots of each `period`-slot cycle are erased.
    ///
    /// # Errors
    ///
    /// Fails if any burst is longer than the period.
    pub fn periodic(
        links: usize,
        horizon: usize,
        bursts: &[usize],
        period: usize,
    ) -> Result<Self, Error> {
        if bursts.len() != links {
            return Err(Error::BadConfig(format!(
                "{} burst lengths supplied for {links} links",
                bursts.len()
            )));
        }
        let mut pattern = ErasurePattern::all_clear(links, horizon);
        for (link, &burst) in bursts.iter().enumerate() {
            if burst > period {
                return Err(Error::BurstExceedsPeriod { burst, period });
            }
            for slot in 0..horizon {
                if slot % period < burst {
                    pattern.erased[link][slot] = true;
                }
            }
        }
        Ok(pattern)
    }

    /// True if the packet on `link` (0-based) at `slot` is erased. Slots
    /// beyond the horizon are never erased.
    #[must_use]
    pub fn erased(&self, link: usize, slot: i64) -> bool {
        if slot < 0 || slot as usize >= self.horizon {
            return false;
        }
        self.erased[link][slot as usize]
    }

    #[must_use]
    pub fn links(&self) -> usize {
        self.erased.len()
    }

    #[must_use]
    pub fn horizon(&self) -> usize {
        self.horizon
    }

    /// Erasures on one link, in slot order.
    #[must_use]
    pub fn link_slots(&self, link: usize) -> Vec<usize> {
        (0..self.horizon)
            .filter(|&s| self.erased[link][s])
            .collect()
    }

    /// Renders the pattern back to one `'0'`/`'1'` string per link.
    #[must_use]
    pub fn to_ascii(&self) -> Vec<String> {
        self.erased
            .iter()
            .map(|row| row.iter().map(|&e| if e { '1' } else { '0' }).collect())
            .collect()
    }

    /// True if every link stays within its total budget over the whole
    /// horizon.
    #[must_use]
    pub fn within_budgets(&self, budgets: &[usize]) -> bool {
        self.erased
            .iter()
            .zip(budgets)
            .all(|(row, &n)| row.iter().filter(|&&e| e).count() <= n)
    }

    /// True if every window of `window` consecutive slots contains at
    /// most `budgets[link]` erasures on each link. With a horizon shorter
    /// than the window this degenerates to the total-budget check.
    #[must_use]
    pub fn is_sliding_admissible(&self, budgets: &[usize], window: usize) -> bool {
        for (row, &budget) in self.erased.iter().zip(budgets) {
            let mut in_window = 0usize;
            for slot in 0..self.horizon {
                if row[slot] {
                    in_window += 1;
                }
                if slot >= window && row[slot - window] {
                    in_window -= 1;
                }
                if in_window > budget {
                    return false;
                }
            }
        }
        true
    }
}

// ============================================================
// Exhaustive enumeration
// ============================================================

/// Number of patterns with at most `budgets[j]` erasures on link `j` over
/// `horizon` slots: the product over links of `sum_{i <= N_j} C(horizon, i)`.
#[must_use]
pub fn count_budgeted(horizon: usize, budgets: &[usize]) -> u128 {
    budgets
        .iter()
        .map(|&n| {
            (0..=n.min(horizon))
                .map(|i| binomial(horizon as u64, i as u64))
                .sum::<u128>()
        })
        .product()
}

/// Iterator over every erasure pattern that keeps each link within its
/// total budget. Patterns are produced in a fixed documented order:
/// link 0's erasure sets vary slowest, and per link the sets appear in
/// order of increasing size, then lexicographically.
#[derive(Debug)]
pub struct BudgetedPatterns {
    /// Per link, every admissible erasure set as a slot bitmask.
    per_link: Vec<Vec<u64>>,
    /// Odometer over `per_link`, next pattern to emit.
    index: Vec<usize>,
    horizon: usize,
    exhausted: bool,
}

/// Enumerates all patterns within per-link total budgets.
///
/// # Errors
///
/// Fails if the pattern count exceeds [`ENUMERATION_GUARD`] or the
/// horizon exceeds 64 slots (sets are tracked as `u64` bitmasks).
pub fn enumerate_budgeted(horizon: usize, budgets: &[usize]) -> Result<BudgetedPatterns, Error> {
    if horizon > 64 {
        return Err(Error::BadConfig(format!(
            "exhaustive enumeration supports at most 64 slots, got {horizon}"
        )));
    }
    let combinations = count_budgeted(horizon, budgets);
    if combinations > ENUMERATION_GUARD {
        return Err(Error::GuardExceeded {
            combinations,
            limit: ENUMERATION_GUARD,
        });
    }
    let per_link: Vec<Vec<u64>> = budgets.iter().map(|&n| subsets_up_to(horizon, n)).collect();
    let links = budgets.len();
    Ok(BudgetedPatterns {
        per_link,
        index: vec![0; links],
        horizon,
        exhausted: false,
    })
}

/// All subsets of `0..horizon` with at most `budget` members, as bitmasks,
/// in order of increasing size then lexicographic slot order.
fn subsets_up_to(horizon: usize, budget: usize) -> Vec<u64> {
    let mut out = vec![0u64]; // the empty set
    let mut current: Vec<usize> = Vec::new();
    for size in 1..=budget.min(horizon) {
        current.clear();
        current.extend(0..size);
        loop {
            let mask = current.iter().fold(0u64, |m, &s| m | (1 << s));
            out.push(mask);
            // Advance to the next size-`size` subset.
            let mut i = size;
            loop {
                if i == 0 {
                    break;
                }
                i -= 1;
                if current[i] < horizon - (size - i) {
                    current[i] += 1;
                    for j in i + 1..size {
                        current[j] = current[j - 1] + 1;
                    }
                    i = usize::MAX;
                    break;
                }
            }
            if i != usize::MAX {
                break;
            }
        }
    }
    out
}

impl BudgetedPatterns {
    /// Total number of patterns this iterator will produce.
    #[must_use]
    pub fn count_total(&self) -> u128 {
        self.per_link.iter().map(|v| v.len() as u128).product()
    }
}

impl Iterator for BudgetedPatterns {
    type Item = ErasurePattern;

    fn next(&mut self) -> Option<ErasurePattern> {
        if self.exhausted {
            return None;
        }
        let links = self.per_link.len();
        let mut erased = Vec::with_capacity(links);
        for (link, &i) in self.index.iter().enumerate() {
            let mask = self.per_link[link][i];
            erased.push((0..self.horizon).map(|s| mask >> s & 1 == 1).collect());
        }
        // Tick the odometer, last link fastest.
        let mut link = links;
        loop {
            if link == 0 {
                self.exhausted = true;
                break;
            }
            link -= 1;
            self.index[link] += 1;
            if self.index[link] < self.per_link[link].len() {
                break;
            }
            self.index[link] = 0;
        }
        Some(ErasurePattern {
            erased,
            horizon: self.horizon,
        })
    }
}

// ============================================================
// Random pattern sources
// ============================================================

/// The deterministic generator behind every random choice in this crate.
///
/// One logical experiment (a `seed`) fans out into independent streams:
/// stream 0 of a shard drives frame contents, stream `j >= 1` drives
/// erasures on link `j`. Separate streams keep the erasures on one link
/// identical across schemes and across thread counts, because no stream
/// ever consumes another stream's draws.
#[must_use]
pub fn derive_rng(seed: u64, shard: u64, stream: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream((shard << 8) | stream);
    rng
}

/// Samples a pattern with independent erasures: link `j` loses each slot
/// with probability `alphas[j]`.
///
/// # Errors
///
/// Fails on probabilities outside [0, 1].
pub fn sample_iid(
    horizon: usize,
    alphas: &[f64],
    rngs: &mut [ChaCha8Rng],
) -> Result<ErasurePattern, Error> {
    assert_eq!(alphas.len(), rngs.len(), "one rng per link");
    let mut erased = Vec::with_capacity(alphas.len());
    for (&alpha, rng) in alphas.iter().zip(rngs.iter_mut()) {
        if !(0.0..=1.0).contains(&alpha) {
            return Err(Error::BadProbability { value: alpha });
        }
        erased.push((0..horizon).map(|_| rng.gen_bool(alpha)).collect());
    }
    Ok(ErasurePattern { erased, horizon })
}

/// Samples a pattern admissible under sliding-window budgets, by
/// rejection: each link proposes independent erasures at rate
/// `N_j / window` and redraws until no window holds more than `N_j`.
/// Links are conditioned independently, which gives the same distribution
/// as rejecting whole patterns but wastes fewer draws.
///
/// Returns the pattern and the number of rejected proposals.
///
/// # Errors
///
/// Fails if `budgets` is empty or `window` is zero.
pub fn sample_sliding_admissible(
    horizon: usize,
    budgets: &[usize],
    window: usize,
    rngs: &mut [ChaCha8Rng],
) -> Result<(ErasurePattern, u64), Error> {
    assert_eq!(budgets.len(), rngs.len(), "one rng per link");
    if budgets.is_empty() {
        return Err(Error::BadConfig("no links to sample erasures for".into()));
    }
    if window == 0 {
        return Err(Error::BadConfig("sliding window must be nonempty".into()));
    }
    let mut erased: Vec<Vec<bool>> = Vec::with_capacity(budgets.len());
    let mut rejections = 0u64;
    for (&budget, rng) in budgets.iter().zip(rngs.iter_mut()) {
        let alpha = (budget as f64 / window as f64).min(1.0);
        loop {
            let row: Vec<bool> = (0..horizon).map(|_| rng.gen_bool(alpha)).collect();
            if row_sliding_admissible(&row, budget, window) {
                erased.push(row);
                break;
            }
            rejections += 1;
        }
    }
    Ok((ErasurePattern { erased, horizon }, rejections))
}

fn row_sliding_admissible(row: &[bool], budget: usize, window: usize) -> bool {
    let mut in_window = 0usize;
    for slot in 0..row.len() {
        if row[slot] {
            in_window += 1;
        }
        if slot >= window && row[slot - window] {
            in_window -= 1;
        }
        if in_window > budget {
            return false;
        }
    }
    true
}

// ============================================================
// Tests
// ============================================================
