//! Worst-case analysis of the vote-level adversary.
//!
//! At a fixed patch anchor the masks that fully cover the patch see exactly
//! the clean masked view, so their votes are fixed. Every other mask sees
//! the patch and its vote is treated as adversary-controlled: it may be any
//! label the classifier can emit. [`find_attack`] decides exactly whether some
//! assignment of those free votes makes [`aggregate`] return a label other
//! than the true one, and if so builds one.
//!
//! The decision splits on how the winning label is produced:
//!
//! * **exact-k**: some class `A != y` ends with exactly `k` votes and is the
//!   only class that does. `A` receives `k - fixed[A]` free votes and the rest
//!   must be spread so that no other class lands on `k`.
//! * **majority**: a class `B != y` wins the plurality (ties to the smallest
//!   id) while the set of classes at exactly `k` is not `{y}`. For each
//!   candidate `B` and final count `T` every other class is capped at `T`
//!   (or `T - 1` below `B`), which turns feasibility into interval
//!   arithmetic on the free votes.
//!
//! Unanimity needs no separate case: a unanimous non-`y` outcome is
//! reachable iff one of the two searches above finds it. Fresh classes (no
//! fixed votes) are interchangeable except for their ids, and for the
//! majority search the smallest fresh id dominates the others.
//!
//! [`brute_force_attack`] enumerates every label assignment of the free
//! votes and calls [`aggregate`] on each; it shares no logic with the exact
//! search and is the oracle the exact search is tested against.
//!
//! [`aggregate`]: crate::certify::aggregate

use crate::certify::aggregate;
use crate::classifier::Label;
use crate::error::{Error, Result};

/// Largest free-vote count the brute-force search accepts.
pub const BRUTE_FORCE_MAX_FREE: u32 = 12;

/// Exact search. `fixed[c]` is the number of fixed votes for class `c`, so
/// `fixed.len()` is the class count. Returns the extra votes per class of a
/// successful attack (summing to `free`), or `None` if `truth` always wins.
pub fn find_attack(fixed: &[u32], free: u32, k: u32, truth: Label) -> Option<Vec<u32>> {
    let classes = fixed.len();
    if classes == 0 {
        return None;
    }
    let y = truth.0 as usize;
    if y >= classes {
        // the true label is never emitted, so any allocation is an attack
        let mut extra = vec![0; classes];
        extra[0] = free;
        return Some(extra);
    }
    let fixed: Vec<i64> = fixed.iter().map(|&c| i64::from(c)).collect();
    let (free, k) = (i64::from(free), i64::from(k));
    exact_k_attack(&fixed, free, k, y)
        .or_else(|| majority_attack(&fixed, free, k, y))
        .map(|extra| extra.into_iter().map(|e| e as u32).collect())
}

fn exact_k_attack(fixed: &[i64], free: i64, k: i64, y: usize) -> Option<Vec<i64>> {
    (0..fixed.len())
        .filter(|&a| a != y && fixed[a] <= k && k - fixed[a] <= free)
        .find_map(|a| {
            let need = k - fixed[a];
            let mut extra = vec![0; fixed.len()];
            extra[a] = need;
            spread_avoiding_k(fixed, k, a, free - need, &mut extra).then_some(extra)
        })
}

/// Distributes `rest` votes over every class but `skip` so that none of them
/// ends with exactly `k` votes.
fn spread_avoiding_k(fixed: &[i64], k: i64, skip: usize, rest: i64, extra: &mut [i64]) -> bool {
    let others: Vec<usize> = (0..fixed.len()).filter(|&c| c != skip).collect();
    let at_k: Vec<usize> = others.iter().copied().filter(|&c| fixed[c] == k).collect();
    if let Some(&first) = at_k.first() {
        // each class already at k has to be pushed past it
        if rest < at_k.len() as i64 {
            return false;
        }
        for &c in &at_k {
            extra[c] += 1;
        }
        extra[first] += rest - at_k.len() as i64;
        return true;
    }
    if rest == 0 {
        return true;
    }
    if let Some(&c) = others.iter().find(|&&c| fixed[c] + rest != k) {
        extra[c] += rest;
        return true;
    }
    // every other class sits exactly `rest` below k
    if rest >= 2 && others.len() >= 2 {
        extra[others[0]] += rest - 1;
        extra[others[1]] += 1;
        return true;
    }
    false
}

fn majority_attack(fixed: &[i64], free: i64, k: i64, y: usize) -> Option<Vec<i64>> {
    let first_fresh = (0..fixed.len()).find(|&c| c != y && fixed[c] == 0);
    (0..fixed.len())
        .filter(|&b| b != y && (fixed[b] > 0 || Some(b) == first_fresh))
        .find_map(|b| (fixed[b]..=fixed[b] + free).find_map(|t| majority_with(fixed, free, k, y, b, t)))
}

/// Tries to make `b` the plurality winner with exactly `t` votes while the
/// classes at exactly `k` are not `{y}`.
fn majority_with(fixed: &[i64], free: i64, k: i64, y: usize, b: usize, t: i64) -> Option<Vec<i64>> {
    let n = fixed.len();
    let spare = free - (t - fixed[b]);
    let mut room = vec![0i64; n];
    for c in (0..n).filter(|&c| c != b) {
        let cap = if c < b { t - 1 } else { t };
        if fixed[c] > cap {
            return None;
        }
        room[c] = cap - fixed[c];
    }
    let total_room: i64 = room.iter().sum();
    if spare > total_room {
        return None;
    }
    let rest_room = total_room - room[y];

    let fill = |pinned: &[(usize, i64)], mut remaining: i64| {
        let mut extra = vec![0i64; n];
        extra[b] = t - fixed[b];
        for &(c, e) in pinned {
            extra[c] = e;
        }
        for c in (0..n).filter(|&c| c != b && !pinned.iter().any(|&(p, _)| p == c)) {
            let take = remaining.min(room[c]);
            extra[c] += take;
            remaining -= take;
        }
        debug_assert_eq!(remaining, 0);
        extra
    };

    // y kept off k
    let lo = (spare - rest_room).max(0);
    let hi = room[y].min(spare);
    if let Some(ey) = (lo..=hi.min(lo + 1)).find(|&e| fixed[y] + e != k) {
        return Some(fill(&[(y, ey)], spare - ey));
    }

    // y on k, together with a second class on k
    let ey = k - fixed[y];
    if ey < 0 || ey > room[y] || ey > spare {
        return None;
    }
    let remaining = spare - ey;
    if t == k && remaining <= rest_room {
        return Some(fill(&[(y, ey)], remaining));
    }
    (0..n)
        .filter(|&c| c != b && c != y && fixed[c] <= k && k - fixed[c] <= room[c])
        .find_map(|c| {
            let ec = k - fixed[c];
            let left = remaining - ec;
            (left >= 0 && left <= rest_room - room[c]).then(|| fill(&[(y, ey), (c, ec)], left))
        })
}

/// Exhaustive search over all `classes^free` label assignments of the free
/// votes. Returns the first assignment (lexicographic) for which the
/// aggregate is not `truth`.
pub fn brute_force_attack(
    fixed_labels: &[Label],
    free: u32,
    k: u32,
    truth: Label,
    classes: u32,
) -> Result<Option<Vec<Label>>> {
    if free > BRUTE_FORCE_MAX_FREE {
        return Err(Error::BruteForceLimit { free, limit: BRUTE_FORCE_MAX_FREE });
    }
    if classes == 0 {
        return Ok(None);
    }
    let free = free as usize;
    let mut digits = vec![0u32; free];
    let mut votes: Vec<Label> = fixed_labels.to_vec();
    votes.resize(fixed_labels.len() + free, Label(0));
    if votes.is_empty() {
        return Ok(None);
    }
    loop {
        for (slot, d) in votes[fixed_labels.len()..].iter_mut().zip(&digits) {
            *slot = Label(*d);
        }
        if aggregate(&votes, k).label != truth {
            return Ok(Some(digits.iter().map(|&d| Label(d)).collect()));
        }
        // odometer increment, last digit fastest
        let mut i = free;
        loop {
            if i == 0 {
                return Ok(None);
            }
            i -= 1;
            digits[i] += 1;
            if digits[i] < classes {
                break;
            }
            digits[i] = 0;
        }
    }
}
