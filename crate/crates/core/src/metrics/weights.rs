use serde::{Deserialize, Serialize};

/// How ranks are weighted when counting language shares.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Weighting {
    /// Every rank counts once (plain proportions).
    Uniform,
    /// `w(i) = 1 / log2(i + 1)`.
    Discounted,
}

/// Per-rank weights for ranks `1..=k`.
#[derive(Debug, Clone, PartialEq)]
pub struct RankWeights {
    w: Vec<f64>,
}

impl RankWeights {
    pub fn new(k: usize, weighting: Weighting) -> Self {
        let w = (1..=k)
            .map(|i| match weighting {
                Weighting::Uniform => 1.0,
                Weighting::Discounted => discount(i),
            })
            .collect();
        Self { w }
    }

    pub fn k(&self) -> usize {
        self.w.len()
    }

    /// Weight of 1-based rank `i`.
    pub fn weight(&self, rank: usize) -> f64 {
        self.w[rank - 1]
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.w
    }

    pub fn sum(&self) -> f64 {
        self.w.iter().sum()
    }
}

#[inline]
pub(crate) fn discount(rank: usize) -> f64 {
    1.0 / ((rank + 1) as f64).log2()
}

/// Logarithmic rank-discount weights `[1/log2(2), ..., 1/log2(k+1)]`.
pub fn rank_weights(k: usize) -> RankWeights {
    RankWeights::new(k, Weighting::Discounted)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn first_rank_is_one() {
        assert_eq!(rank_weights(1).as_slice(), &[1.0]);
    }

    #[test]
    fn three_ranks() {
        let w = rank_weights(3);
        assert_eq!(w.weight(1), 1.0);
        assert!((w.weight(2) - 0.63093).abs() < 1e-5);
        assert_eq!(w.weight(3), 0.5);
    }

    #[test]
    fn ten_rank_sum_matches_scalar_loop() {
        let mut oracle = 0.0f64;
        let mut i = 1.0f64;
        while i <= 10.0 {
            oracle += 1.0 / (i + 1.0).log2();
            i += 1.0;
        }
        let s = rank_weights(10).sum();
        assert!((s - oracle).abs() < 1e-12);
        assert!((s - 4.543559).abs() < 1e-6, "{s}");
    }

    #[test]
    fn strictly_decreasing_and_positive() {
        let w = rank_weights(200);
        assert!(w.as_slice().windows(2).all(|p| p[0] > p[1]));
        assert!(w.as_slice().iter().all(|&x| x > 0.0));
        assert!(RankWeights::new(5, Weighting::Uniform).as_slice().iter().all(|&x| x == 1.0));
    }
}
