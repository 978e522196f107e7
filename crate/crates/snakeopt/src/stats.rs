//! Descriptive statistics, competition rankings, the Wilcoxon rank-sum
//! test (exact and normal-approximation), and regression error metrics.

use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum StatsError {
    #[error("need at least {min} values, got {got}")]
    TooFewValues { got: usize, min: usize },
    #[error("length mismatch: {a} vs {b}")]
    LengthMismatch { a: usize, b: usize },
    #[error("MAPE undefined: zero true value at index {0}")]
    ZeroTrueValue(usize),
    #[error("R^2 undefined: constant true values")]
    ConstantTrueValues,
}

/// Final best-fitness values of one algorithm on one function over trials.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrialSample {
    pub algorithm: String,
    pub function: String,
    pub values: Vec<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Describe {
    pub best: f64,
    pub worst: f64,
    pub mean: f64,
    pub std: f64,
}

/// Best, worst, mean, and sample (n-1) standard deviation.
pub fn describe(values: &[f64]) -> Result<Describe, StatsError> {
    if values.len() < 2 {
        return Err(StatsError::TooFewValues {
            got: values.len(),
            min: 2,
        });
    }
    let n = values.len() as f64;
    let mean = values.iter().sum::<f64>() / n;
    let var = values.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / (n - 1.0);
    Ok(Describe {
        best: values.iter().copied().fold(f64::INFINITY, f64::min),
        worst: values.iter().copied().fold(f64::NEG_INFINITY, f64::max),
        mean,
        std: var.sqrt(),
    })
}

/// Competition ranking by ascending mean: near-equal means (relative
/// tolerance 1e-9) share the smaller rank and the next rank is skipped.
pub fn rank_algorithms(means: &[f64]) -> Vec<usize> {
    let mut order: Vec<usize> = (0..means.len()).collect();
    order.sort_by(|&a, &b| means[a].total_cmp(&means[b]));
    let mut ranks = vec![0usize; means.len()];
    let mut i = 0;
    while i < order.len() {
        let lead = means[order[i]];
        let tol = 1e-9 * lead.abs().max(1.0);
        let mut j = i;
        while j < order.len() && (means[order[j]] - lead).abs() < tol {
            j += 1;
        }
        for &idx in &order[i..j] {
            ranks[idx] = i + 1;
        }
        i = j;
    }
    ranks
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum WilcoxonMethod {
    Exact,
    NormalApprox,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Verdict {
    /// Reference significantly better (lower mean, p < 0.05).
    Plus,
    /// No significant difference.
    Equal,
    /// Reference significantly worse.
    Minus,
}

impl Verdict {
    pub fn symbol(self) -> &'static str {
        match self {
            Verdict::Plus => "+",
            Verdict::Equal => "=",
            Verdict::Minus => "-",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct WilcoxonResult {
    pub u_statistic: f64,
    pub p_value: f64,
    pub method: WilcoxonMethod,
    /// Sign of the comparison treating `x` as the reference sample.
    pub verdict: Verdict,
}

/// Midranks of the combined sample, ties averaged. Returns (ranks of x,
/// ranks of y, tie group sizes).
fn midranks(x: &[f64], y: &[f64]) -> (Vec<f64>, Vec<f64>, Vec<usize>) {
    let n = x.len();
    let mut all: Vec<(f64, usize)> = x
        .iter()
        .chain(y.iter())
        .copied()
        .enumerate()
        .map(|(i, v)| (v, i))
        .collect();
    all.sort_by(|a, b| a.0.total_cmp(&b.0));
    let mut ranks = vec![0.0; all.len()];
    let mut ties = Vec::new();
    let mut i = 0;
    while i < all.len() {
        let mut j = i;
        while j < all.len() && all[j].0 == all[i].0 {
            j += 1;
        }
        let avg = (i + 1 + j) as f64 / 2.0;
        for k in i..j {
            ranks[all[k].1] = avg;
        }
        if j - i > 1 {
            ties.push(j - i);
        }
        i = j;
    }
    (ranks[..n].to_vec(), ranks[n..].to_vec(), ties)
}

/// Exact two-sided p via the distribution of the rank sum of a size-n
/// subset of ranks 1..=N, counted by dynamic programming (equivalent to
/// enumerating all C(N, n) assignments).
fn exact_rank_sum_p(n: usize, m: usize, w_obs: f64) -> f64 {
    let total_ranks = n + m;
    let max_sum = total_ranks * (total_ranks + 1) / 2;
    // count[k][s]: subsets of size k summing to s
    let mut count = vec![vec![0.0f64; max_sum + 1]; n + 1];
    count[0][0] = 1.0;
    for r in 1..=total_ranks {
        for k in (1..=n.min(r)).rev() {
            for s in (r..=max_sum).rev() {
                let add = count[k - 1][s - r];
                if add > 0.0 {
                    count[k][s] += add;
                }
            }
        }
    }
    let total: f64 = count[n].iter().sum();
    let w = w_obs.round() as usize;
    let lower: f64 = count[n][..=w.min(max_sum)].iter().sum();
    let upper: f64 = count[n][w.min(max_sum)..].iter().sum();
    (2.0 * (lower.min(upper)) / total).min(1.0)
}

/// Two-sided Wilcoxon rank-sum test treating `x` as the reference sample.
/// Exact when n + m <= 20 with no ties, otherwise a normal approximation
/// with tie and continuity corrections. Degenerate zero-variance samples
/// yield p = 1.
pub fn wilcoxon_rank_sum(x: &[f64], y: &[f64]) -> WilcoxonResult {
    assert!(!x.is_empty() && !y.is_empty(), "samples must be non-empty");
    let (rx, _, ties) = midranks(x, y);
    let n = x.len() as f64;
    let m = y.len() as f64;
    let w: f64 = rx.iter().sum();
    let u = w - n * (n + 1.0) / 2.0;

    let (p, method) = if x.len() + y.len() <= 20 && ties.is_empty() {
        (
            exact_rank_sum_p(x.len(), y.len(), w),
            WilcoxonMethod::Exact,
        )
    } else {
        let nn = n + m;
        let tie_term: f64 = ties.iter().map(|&t| (t * t * t - t) as f64).sum();
        let var = n * m / 12.0 * ((nn + 1.0) - tie_term / (nn * (nn - 1.0)));
        if var <= 0.0 {
            (1.0, WilcoxonMethod::NormalApprox)
        } else {
            let mean_u = n * m / 2.0;
            let diff = u - mean_u;
            let z = (diff.abs() - 0.5).max(0.0) / var.sqrt();
            use statrs::distribution::{ContinuousCDF, Normal};
            let std_normal = Normal::new(0.0, 1.0).unwrap();
            ((2.0 * (1.0 - std_normal.cdf(z))).min(1.0), WilcoxonMethod::NormalApprox)
        }
    };

    let mean_x = x.iter().sum::<f64>() / n;
    let mean_y = y.iter().sum::<f64>() / m;
    let verdict = if p < 0.05 {
        if mean_x < mean_y {
            Verdict::Plus
        } else {
            Verdict::Minus
        }
    } else {
        Verdict::Equal
    };
    WilcoxonResult {
        u_statistic: u,
        p_value: p,
        method,
        verdict,
    }
}

/// Per-rival (+, =, -) counts across functions, from the reference
/// algorithm's point of view.
pub fn sign_summary(verdicts: &[Verdict]) -> (usize, usize, usize) {
    let plus = verdicts.iter().filter(|v| **v == Verdict::Plus).count();
    let equal = verdicts.iter().filter(|v| **v == Verdict::Equal).count();
    let minus = verdicts.iter().filter(|v| **v == Verdict::Minus).count();
    (plus, equal, minus)
}

/// Regression error metrics. MAPE is in percent. MAPE and R^2 are
/// undefined for zero true values / constant true values respectively;
/// the other metrics are still returned.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RegressionMetrics {
    pub rmse: f64,
    pub mae: f64,
    pub maxae: f64,
    pub mape: Option<f64>,
    pub r2: Option<f64>,
}

pub fn regression_metrics(y_true: &[f64], y_pred: &[f64]) -> Result<RegressionMetrics, StatsError> {
    if y_true.len() != y_pred.len() {
        return Err(StatsError::LengthMismatch {
            a: y_true.len(),
            b: y_pred.len(),
        });
    }
    if y_true.len() < 2 {
        return Err(StatsError::TooFewValues {
            got: y_true.len(),
            min: 2,
        });
    }
    let n = y_true.len() as f64;
    let mut sse = 0.0;
    let mut sae = 0.0;
    let mut maxae: f64 = 0.0;
    let mut mape_acc = 0.0;
    let mut mape_ok = true;
    for (&t, &p) in y_true.iter().zip(y_pred) {
        let e = p - t;
        sse += e * e;
        sae += e.abs();
        maxae = maxae.max(e.abs());
        if t == 0.0 {
            mape_ok = false;
        } else {
            mape_acc += (e / t).abs();
        }
    }
    let mean_t = y_true.iter().sum::<f64>() / n;
    let ss_tot: f64 = y_true.iter().map(|&t| (t - mean_t) * (t - mean_t)).sum();
    Ok(RegressionMetrics {
        rmse: (sse / n).sqrt(),
        mae: sae / n,
        maxae,
        mape: mape_ok.then(|| 100.0 * mape_acc / n),
        r2: (ss_tot > 0.0).then(|| 1.0 - sse / ss_tot),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::core::RngStream;

    /// Brute-force oracle: enumerate all C(n+m, n) rank assignments.
    fn exact_p_by_enumeration(x: &[f64], y: &[f64]) -> f64 {
        let n = x.len();
        let total_n = n + y.len();
        let (rx, _, ties) = midranks(x, y);
        assert!(ties.is_empty());
        let w_obs: f64 = rx.iter().sum();
        let mut sums = Vec::new();
        let mut pick = vec![0usize; n];
        fn rec(start: usize, left: usize, total_n: usize, pick: &mut Vec<usize>, depth: usize, sums: &mut Vec<usize>) {
            if left == 0 {
                sums.push(pick[..depth].iter().sum());
                return;
            }
            for r in start..=total_n - left + 1 {
                pick[depth] = r;
                rec(r + 1, left - 1, total_n, pick, depth + 1, sums);
            }
        }
        rec(1, n, total_n, &mut pick, 0, &mut sums);
        let total = sums.len() as f64;
        let w = w_obs.round() as usize;
        let lower = sums.iter().filter(|&&s| s <= w).count() as f64;
        let upper = sums.iter().filter(|&&s| s >= w).count() as f64;
        (2.0 * lower.min(upper) / total).min(1.0)
    }

    #[test]
    fn describe_cases() {
        let d = describe(&[3.0, 3.0, 3.0]).unwrap();
        assert_eq!((d.best, d.worst, d.mean, d.std), (3.0, 3.0, 3.0, 0.0));
        let d = describe(&[1.0, 2.0, 3.0, 4.0]).unwrap();
        assert_eq!((d.best, d.worst, d.mean), (1.0, 4.0, 2.5));
        assert!((d.std - 1.29099).abs() < 1e-5);
        let d = describe(&[300.0, 302.0]).unwrap();
        assert_eq!((d.best, d.worst, d.mean), (300.0, 302.0, 301.0));
        assert!((d.std - 1.41421).abs() < 1e-5);
        assert!(describe(&[1.0]).is_err());
    }

    #[test]
    fn describe_permutation_invariant() {
        let a = describe(&[5.0, 1.0, 9.0, 2.0]).unwrap();
        let b = describe(&[9.0, 2.0, 5.0, 1.0]).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn ranking_with_ties() {
        assert_eq!(rank_algorithms(&[300.0, 300.0, 346.0]), vec![1, 1, 3]);
        assert_eq!(rank_algorithms(&[1.0, 2.0, 3.0]), vec![1, 2, 3]);
        assert_eq!(rank_algorithms(&[7.0, 7.0, 7.0]), vec![1, 1, 1]);
        assert_eq!(rank_algorithms(&[2.0, 1.0, 2.0, 5.0]), vec![2, 1, 2, 4]);
    }

    #[test]
    fn wilcoxon_hand_enumerable_cases() {
        let r = wilcoxon_rank_sum(&[1.0, 2.0, 3.0], &[4.0, 5.0, 6.0]);
        assert_eq!(r.method, WilcoxonMethod::Exact);
        assert!((r.p_value - 0.1).abs() < 1e-12, "p {}", r.p_value);
        let r = wilcoxon_rank_sum(&[1.0, 3.0], &[2.0, 4.0]);
        assert!((r.p_value - 2.0 / 3.0).abs() < 1e-12, "p {}", r.p_value);
    }

    #[test]
    fn wilcoxon_all_ties_is_one() {
        let r = wilcoxon_rank_sum(&[2.0, 2.0, 2.0], &[2.0, 2.0, 2.0]);
        assert_eq!(r.p_value, 1.0);
        assert_eq!(r.verdict, Verdict::Equal);
    }

    #[test]
    fn wilcoxon_symmetry() {
        let x = [1.0, 4.0, 2.5, 9.0];
        let y = [3.0, 5.0, 0.5];
        let a = wilcoxon_rank_sum(&x, &y);
        let b = wilcoxon_rank_sum(&y, &x);
        assert_eq!(a.p_value, b.p_value);
    }

    #[test]
    fn wilcoxon_disjoint_minimum() {
        // max(x) < min(y): p = 2 / C(n+m, n)
        let x = [1.0, 2.0, 3.0, 4.0];
        let y = [10.0, 11.0, 12.0];
        let r = wilcoxon_rank_sum(&x, &y);
        let c = 35.0; // C(7, 4)
        assert!((r.p_value - 2.0 / c).abs() < 1e-12);
    }

    #[test]
    fn wilcoxon_dp_matches_enumeration_oracle() {
        let mut rng = RngStream::new(77);
        for _ in 0..25 {
            let x: Vec<f64> = (0..4).map(|_| rng.uniform()).collect();
            let y: Vec<f64> = (0..5).map(|_| rng.uniform()).collect();
            let dp = wilcoxon_rank_sum(&x, &y).p_value;
            let oracle = exact_p_by_enumeration(&x, &y);
            assert!((dp - oracle).abs() < 1e-12, "dp {dp} oracle {oracle}");
        }
    }

    #[test]
    fn wilcoxon_exact_approx_agreement() {
        let mut rng = RngStream::new(123);
        for case in 0..100 {
            let x: Vec<f64> = (0..10).map(|_| rng.uniform()).collect();
            let y: Vec<f64> = (0..10).map(|_| rng.uniform() + 0.1).collect();
            let exact = wilcoxon_rank_sum(&x, &y);
            assert_eq!(exact.method, WilcoxonMethod::Exact);
            let approx_p = normal_approx_p(&x, &y);
            assert!(
                (exact.p_value - approx_p).abs() < 0.02,
                "case {case}: exact {} approx {}",
                exact.p_value,
                approx_p
            );
        }
    }

    /// Normal-approximation p for tie-free samples, used to cross-check
    /// the exact path.
    fn normal_approx_p(x: &[f64], y: &[f64]) -> f64 {
        let (rx, _, _) = midranks(x, y);
        let n = x.len() as f64;
        let m = y.len() as f64;
        let w: f64 = rx.iter().sum();
        let u = w - n * (n + 1.0) / 2.0;
        let var = n * m * (n + m + 1.0) / 12.0;
        let z = ((u - n * m / 2.0).abs() - 0.5).max(0.0) / var.sqrt();
        use statrs::distribution::{ContinuousCDF, Normal};
        (2.0 * (1.0 - Normal::new(0.0, 1.0).unwrap().cdf(z))).min(1.0)
    }

    #[test]
    fn sign_summary_counts() {
        use Verdict::*;
        assert_eq!(sign_summary(&[Plus; 10]), (10, 0, 0));
        assert_eq!(sign_summary(&[Equal; 4]), (0, 4, 0));
        let mixed = [Plus, Plus, Plus, Plus, Plus, Plus, Plus, Equal, Equal, Equal];
        assert_eq!(sign_summary(&mixed), (7, 3, 0));
    }

    #[test]
    fn regression_metrics_cases() {
        let m = regression_metrics(&[1.0, 2.0, 3.0], &[1.0, 2.0, 3.0]).unwrap();
        assert_eq!((m.rmse, m.mae, m.maxae), (0.0, 0.0, 0.0));
        assert_eq!(m.mape, Some(0.0));
        assert_eq!(m.r2, Some(1.0));

        let m = regression_metrics(&[1.0, 2.0], &[2.0, 2.0]).unwrap();
        assert!((m.rmse - 0.5f64.sqrt()).abs() < 1e-12);
        assert_eq!(m.mae, 0.5);
        assert_eq!(m.maxae, 1.0);
        // mean of |1/1| and |0/2| is 0.5, i.e. 50 percent
        assert!((m.mape.unwrap() - 50.0).abs() < 1e-12);

        let m = regression_metrics(&[2.0, 2.0], &[1.0, 3.0]).unwrap();
        assert_eq!(m.r2, None);
        let m = regression_metrics(&[0.0, 2.0], &[1.0, 3.0]).unwrap();
        assert_eq!(m.mape, None);
        assert!(regression_metrics(&[1.0], &[1.0]).is_err());
        assert!(regression_metrics(&[1.0, 2.0], &[1.0]).is_err());
    }
}
