use serde::{Deserialize, Serialize};

use super::MetricsError;

/// Harrell's concordance with its pair counts.
///
/// A pair `(i, j)` is comparable when `tᵢ < tⱼ` and subject `i` had an
/// event; it is concordant when `riskᵢ > riskⱼ` and tied when the risks are
/// exactly equal. Pairs with equal times are never comparable.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ConcordanceResult {
    pub c_index: f64,
    pub concordant: u64,
    pub discordant: u64,
    pub tied_risk: u64,
    pub comparable_pairs: u64,
}

impl ConcordanceResult {
    fn from_counts(concordant: u64, discordant: u64, tied_risk: u64) -> Result<Self, MetricsError> {
        let comparable_pairs = concordant + discordant + tied_risk;
        if comparable_pairs == 0 {
            return Err(MetricsError::NoComparablePairs);
        }
        Ok(Self {
            c_index: (concordant as f64 + 0.5 * tied_risk as f64) / comparable_pairs as f64,
            concordant,
            discordant,
            tied_risk,
            comparable_pairs,
        })
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("concordance serializes")
    }
}

fn check_inputs(times: &[f64], events: &[bool], risks: &[f64]) -> Result<(), MetricsError> {
    if events.len() != times.len() || risks.len() != times.len() {
        return Err(MetricsError::LengthMismatch {
            times: times.len(),
            events: events.len(),
            risks: risks.len(),
        });
    }
    if let Some(i) = risks.iter().position(|r| !r.is_finite()) {
        return Err(MetricsError::NonFiniteRisk(i));
    }
    Ok(())
}

/// Concordance index in `O(n log n)`: subjects are swept from the latest
/// time backwards while a Fenwick tree counts the risk ranks of everyone
/// followed strictly longer.
pub fn concordance_index(
    times: &[f64],
    events: &[bool],
    risks: &[f64],
) -> Result<ConcordanceResult, MetricsError> {
    check_inputs(times, events, risks)?;
    let n = times.len();

    let mut levels: Vec<f64> = risks.to_vec();
    levels.sort_by(f64::total_cmp);
    levels.dedup_by(|a, b| a == b);
    let rank = |r: f64| levels.partition_point(|&v| v < r);

    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| times[b].total_cmp(&times[a]));

    let mut tree = Fenwick::new(levels.len());
    let (mut concordant, mut discordant, mut tied) = (0u64, 0u64, 0u64);
    let mut inserted = 0u64;
    for group in order.chunk_by(|&a, &b| times[a] == times[b]) {
        for &i in group.iter().filter(|&&i| events[i]) {
            let r = rank(risks[i]);
            let below = tree.prefix(r);
            let equal = tree.prefix(r + 1) - below;
            concordant += below;
            tied += equal;
            discordant += inserted - below - equal;
        }
        for &j in group {
            tree.add(rank(risks[j]));
            inserted += 1;
        }
    }
    ConcordanceResult::from_counts(concordant, discordant, tied)
}

/// Exhaustive `O(n²)` pair enumeration; the reference for
/// [`concordance_index`].
pub fn concordance_index_exhaustive(
    times: &[f64],
    events: &[bool],
    risks: &[f64],
) -> Result<ConcordanceResult, MetricsError> {
    check_inputs(times, events, risks)?;
    let (mut concordant, mut discordant, mut tied) = (0u64, 0u64, 0u64);
    for i in 0..times.len() {
        if !events[i] {
            continue;
        }
        for j in 0..times.len() {
            if times[i] < times[j] {
                if risks[i] > risks[j] {
                    concordant += 1;
                } else if risks[i] == risks[j] {
                    tied += 1;
                } else {
                    discordant += 1;
                }
            }
        }
    }
    ConcordanceResult::from_counts(concordant, discordant, tied)
}

struct Fenwick {
    tree: Vec<u64>,
}

impl Fenwick {
    fn new(n: usize) -> Self {
        Self { tree: vec![0; n + 1] }
    }

    fn add(&mut self, index: usize) {
        let mut i = index + 1;
        while i < self.tree.len() {
            self.tree[i] += 1;
            i += i & i.wrapping_neg();
        }
    }

    /// Count of inserted ranks `< end`.
    fn prefix(&self, end: usize) -> u64 {
        let mut i = end;
        let mut s = 0;
        while i > 0 {
            s += self.tree[i];
            i -= i & i.wrapping_neg();
        }
        s
    }
}
