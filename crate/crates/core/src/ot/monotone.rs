//! Numeric checks of monotonicity and cyclical monotonicity for finite maps.
//!
//! A map `T` is monotone when `⟨u − v, T(u) − T(v)⟩ ≥ 0` for all pairs and
//! cyclically monotone when every cycle `u_1 … u_m, u_{m+1} = u_1` satisfies
//! `Σ ‖u_i − T(u_i)‖² ≤ Σ ‖u_i − T(u_{i+1})‖²`. The cycle slack reported
//! here is half the difference of the two sides,
//! `Σ_k ⟨u_k − u_1, T(u_k) − T(u_{k+1})⟩`, which for `m = 2` is exactly the
//! monotonicity inner product.

use rand::seq::index::sample;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::{Error, Result};

/// Inner products below `-MONOTONE_TOL` count as violations.
pub const MONOTONE_TOL: f64 = 1e-10;
/// Largest point count enumerated exhaustively for cycles longer than 2.
pub const EXHAUSTIVE_MAX_POINTS: usize = 12;
/// Maximum number of cycles enumerated before switching to sampling.
pub const CYCLE_BUDGET: u64 = 2_000_000;
/// Number of random cycles drawn in sampled mode.
pub const SAMPLED_CYCLES: usize = 10_000;
const SAMPLING_SEED: u64 = 0x5eed_c1c1e;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MonotoneReport {
    /// `(i, j, ⟨u_i − u_j, T(u_i) − T(u_j)⟩)` for each violating pair, `i < j`.
    pub violations: Vec<(usize, usize, f64)>,
    /// Smallest inner product over all pairs; `None` with fewer than two pairs.
    pub min_inner_product: Option<f64>,
    pub pairs_checked: usize,
}

impl MonotoneReport {
    pub fn is_monotone(&self) -> bool {
        self.violations.is_empty()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CyclicReport {
    /// Point indices of the cycle with the smallest slack.
    pub worst_cycle: Option<Vec<usize>>,
    pub worst_slack: Option<f64>,
    pub violations: usize,
    pub cycles_checked: u64,
    /// Set when the cycle budget forced random sampling.
    pub sampled: bool,
}

impl CyclicReport {
    pub fn is_cyclically_monotone(&self) -> bool {
        self.violations == 0
    }
}

fn validate(pairs: &[(Vec<f64>, Vec<f64>)]) -> Result<()> {
    let Some((u0, _)) = pairs.first() else {
        return Ok(());
    };
    let d = u0.len();
    for (u, t) in pairs {
        for v in [u, t] {
            if v.len() != d {
                return Err(Error::DimensionMismatch {
                    expected: d,
                    found: v.len(),
                });
            }
        }
    }
    Ok(())
}

fn inner_diff(a: &[f64], b: &[f64], c: &[f64], e: &[f64]) -> f64 {
    a.iter()
        .zip(b)
        .zip(c.iter().zip(e))
        .map(|((a, b), (c, e))| (a - b) * (c - e))
        .sum()
}

/// Pairwise monotonicity check of `(u, T(u))` pairs.
pub fn check_monotone(pairs: &[(Vec<f64>, Vec<f64>)]) -> Result<MonotoneReport> {
    validate(pairs)?;
    let mut report = MonotoneReport {
        violations: Vec::new(),
        min_inner_product: None,
        pairs_checked: 0,
    };
    if pairs.len() < 2 {
        return Ok(report);
    }
    let mut min = f64::INFINITY;
    for i in 0..pairs.len() {
        for j in i + 1..pairs.len() {
            let ip = inner_diff(&pairs[i].0, &pairs[j].0, &pairs[i].1, &pairs[j].1);
            min = min.min(ip);
            if ip < -MONOTONE_TOL {
                report.violations.push((i, j, ip));
            }
            report.pairs_checked += 1;
        }
    }
    report.min_inner_product = Some(min);
    Ok(report)
}

fn cycle_slack(pairs: &[(Vec<f64>, Vec<f64>)], cycle: &[usize]) -> f64 {
    let base = &pairs[cycle[0]].0;
    let m = cycle.len();
    (1..m)
        .map(|k| {
            let u = &pairs[cycle[k]].0;
            let t = &pairs[cycle[k]].1;
            let t_next = &pairs[cycle[(k + 1) % m]].1;
            inner_diff(u, base, t, t_next)
        })
        .sum()
}

/// Cycles of length `2..=max_len` over `n` points, counted up to rotation.
fn cycle_count(n: usize, max_len: usize) -> u64 {
    let mut total: u64 = 0;
    for len in 2..=max_len.min(n) {
        // n! / ((n - len)! * len)
        let mut perms: u64 = 1;
        for k in 0..len {
            perms = perms.saturating_mul((n - k) as u64);
        }
        total = total.saturating_add(perms / len as u64);
    }
    total
}

struct Tracker {
    worst: Option<(f64, Vec<usize>)>,
    violations: usize,
    checked: u64,
}

impl Tracker {
    fn record(&mut self, slack: f64, cycle: &[usize]) {
        self.checked += 1;
        if slack < -MONOTONE_TOL {
            self.violations += 1;
        }
        if self.worst.as_ref().is_none_or(|(w, _)| slack < *w) {
            self.worst = Some((slack, cycle.to_vec()));
        }
    }
}

fn enumerate(
    pairs: &[(Vec<f64>, Vec<f64>)],
    max_len: usize,
    cycle: &mut Vec<usize>,
    used: &mut [bool],
    tracker: &mut Tracker,
) {
    if cycle.len() >= 2 {
        tracker.record(cycle_slack(pairs, cycle), cycle);
    }
    if cycle.len() == max_len {
        return;
    }
    // Cycles are rooted at their smallest index to skip rotations.
    for j in cycle[0] + 1..pairs.len() {
        if used[j] {
            continue;
        }
        used[j] = true;
        cycle.push(j);
        enumerate(pairs, max_len, cycle, used, tracker);
        cycle.pop();
        used[j] = false;
    }
}

/// Cycle-inequality check of `(u, T(u))` pairs for cycles up to `max_cycle_len`.
///
/// Cycles are enumerated exhaustively when there are at most
/// [`EXHAUSTIVE_MAX_POINTS`] points (or only 2-cycles are requested) and the
/// count fits in [`CYCLE_BUDGET`]; otherwise [`SAMPLED_CYCLES`] random cycles
/// are drawn from a fixed seed and the report is flagged as sampled.
pub fn check_cyclical_monotone(
    pairs: &[(Vec<f64>, Vec<f64>)],
    max_cycle_len: usize,
) -> Result<CyclicReport> {
    if max_cycle_len < 2 {
        return Err(Error::InvalidArgument(format!(
            "max_cycle_len must be at least 2, got {max_cycle_len}"
        )));
    }
    validate(pairs)?;
    let n = pairs.len();
    let mut tracker = Tracker {
        worst: None,
        violations: 0,
        checked: 0,
    };
    let max_len = max_cycle_len.min(n);
    let exhaustive =
        (n <= EXHAUSTIVE_MAX_POINTS || max_len == 2) && cycle_count(n, max_len) <= CYCLE_BUDGET;

    if n >= 2 {
        if exhaustive {
            let mut used = vec![false; n];
            let mut cycle = Vec::with_capacity(max_len);
            for start in 0..n {
                used[start] = true;
                cycle.push(start);
                enumerate(pairs, max_len, &mut cycle, &mut used, &mut tracker);
                cycle.pop();
                used[start] = false;
            }
        } else {
            let mut rng = ChaCha8Rng::seed_from_u64(SAMPLING_SEED);
            for _ in 0..SAMPLED_CYCLES {
                let len = rng.random_range(2..=max_len);
                let cycle = sample(&mut rng, n, len).into_vec();
                tracker.record(cycle_slack(pairs, &cycle), &cycle);
            }
        }
    }

    let (worst_slack, worst_cycle) = match tracker.worst {
        Some((s, c)) => (Some(s), Some(c)),
        None => (None, None),
    };
    Ok(CyclicReport {
        worst_cycle,
        worst_slack,
        violations: tracker.violations,
        cycles_checked: tracker.checked,
        sampled: !exhaustive,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn pairs_1d(v: &[(f64, f64)]) -> Vec<(Vec<f64>, Vec<f64>)> {
        v.iter().map(|&(u, t)| (vec![u], vec![t])).collect()
    }

    #[test]
    fn identity_has_no_violations() {
        let pts: Vec<(Vec<f64>, Vec<f64>)> = [[0.0, 1.0], [2.0, -1.0], [0.5, 0.5], [3.0, 3.0]]
            .iter()
            .map(|p| (p.to_vec(), p.to_vec()))
            .collect();
        let r = check_monotone(&pts).unwrap();
        assert!(r.is_monotone());
        assert!(r.min_inner_product.unwrap() >= 0.0);
        assert_eq!(r.pairs_checked, 6);
    }

    #[test]
    fn decreasing_map_flagged() {
        let pts = pairs_1d(&[(0.0, 1.0), (1.0, 0.0)]);
        let r = check_monotone(&pts).unwrap();
        assert_eq!(r.violations, vec![(0, 1, -1.0)]);
        assert_eq!(r.min_inner_product, Some(-1.0));

        let c = check_cyclical_monotone(&pts, 2).unwrap();
        assert_eq!(c.violations, 1);
        assert_eq!(c.worst_slack, Some(-1.0));
        assert!(!c.sampled);
    }

    #[test]
    fn fewer_than_two_pairs_is_empty() {
        let r = check_monotone(&pairs_1d(&[(0.0, 5.0)])).unwrap();
        assert!(r.is_monotone());
        assert_eq!(r.min_inner_product, None);
        assert_eq!(check_monotone(&[]).unwrap().pairs_checked, 0);
    }

    #[test]
    fn gradient_of_convex_is_cyclically_monotone() {
        let pts: Vec<(Vec<f64>, Vec<f64>)> = (0..7)
            .map(|k| {
                let u = vec![(k as f64 * 1.3).sin(), (k as f64 * 0.7).cos()];
                let t = u.iter().map(|x| 2.0 * x).collect();
                (u, t)
            })
            .collect();
        for len in 2..=7 {
            let r = check_cyclical_monotone(&pts, len).unwrap();
            assert!(r.is_cyclically_monotone(), "len {len}: {r:?}");
            assert!(!r.sampled);
        }
    }

    #[test]
    fn cycle_counts() {
        // 3 points: 3 two-cycles plus 2 oriented three-cycles
        assert_eq!(cycle_count(3, 3), 5);
        assert_eq!(cycle_count(5, 2), 10);
        let pts = pairs_1d(&[(0.0, 0.0), (1.0, 1.0), (2.0, 2.0)]);
        assert_eq!(check_cyclical_monotone(&pts, 3).unwrap().cycles_checked, 5);
    }

    #[test]
    fn large_inputs_fall_back_to_sampling() {
        let pts: Vec<(Vec<f64>, Vec<f64>)> =
            (0..40).map(|k| (vec![k as f64], vec![k as f64])).collect();
        let r = check_cyclical_monotone(&pts, 5).unwrap();
        assert!(r.sampled);
        assert_eq!(r.cycles_checked, SAMPLED_CYCLES as u64);
        assert!(r.is_cyclically_monotone());
    }

    #[test]
    fn rejects_bad_arguments() {
        let pts = pairs_1d(&[(0.0, 0.0)]);
        assert!(check_cyclical_monotone(&pts, 1).is_err());
        let ragged = vec![(vec![0.0], vec![0.0, 1.0])];
        assert!(check_monotone(&ragged).is_err());
    }
}
