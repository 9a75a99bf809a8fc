use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use super::{MarkovError, MarkovModel};
use crate::scalar::Real;

const CHUNK: u64 = 4096;

/// Monte Carlo MTBF estimate.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct McEstimate<T> {
    pub mean: T,
    /// Standard error of the mean. Zero when `trials == 1`; infinite when the
    /// model's MTBF is infinite.
    pub stderr: T,
    pub trials: u64,
}

/// Running mean/M2 accumulator; chunks merge in index order.
#[derive(Clone, Copy)]
struct Moments {
    n: f64,
    mean: f64,
    m2: f64,
}

impl Moments {
    const EMPTY: Self = Self { n: 0.0, mean: 0.0, m2: 0.0 };

    fn push(&mut self, x: f64) {
        self.n += 1.0;
        let delta = x - self.mean;
        self.mean += delta / self.n;
        self.m2 += delta * (x - self.mean);
    }

    fn merge(self, other: Self) -> Self {
        if self.n == 0.0 {
            return other;
        }
        let n = self.n + other.n;
        let delta = other.mean - self.mean;
        Self { n, mean: self.mean + delta * other.n / n, m2: self.m2 + other.m2 + delta * delta * self.n * other.n / n }
    }
}

/// Mean absorption time over `trials` independent walks from the initial
/// state with exponential holding times.
///
/// Trial `i` draws from a ChaCha8 generator seeded with `seed` on stream `i`,
/// so the result does not depend on how trials are spread across threads.
pub fn simulate_mtbf<T: Real>(model: &MarkovModel<T>, trials: u64, seed: u64) -> Result<McEstimate<T>, MarkovError> {
    if trials == 0 {
        return Err(MarkovError::NoTrials);
    }
    let reachable = model.reachable_healthy();
    if !model.absorption_certain(&reachable) {
        return Ok(McEstimate { mean: T::infinity(), stderr: T::infinity(), trials });
    }

    let n = model.num_states();
    let mut edges: Vec<Vec<(usize, f64)>> = vec![Vec::new(); n];
    for t in model.transitions() {
        edges[t.from].push((t.to, t.rate.to_f64().unwrap_or(f64::NAN)));
    }
    let exits: Vec<f64> = edges.iter().map(|e| e.iter().map(|(_, r)| r).sum()).collect();
    let healthy: Vec<bool> = (0..n).map(|i| model.is_healthy(i)).collect();
    let start = model.initial().index;

    let walk = |trial: u64| -> f64 {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        rng.set_stream(trial);
        let mut at = start;
        let mut elapsed = 0.0;
        while healthy[at] {
            let exit = exits[at];
            let u: f64 = rng.random();
            elapsed += -(1.0 - u).ln() / exit;
            let mut pick = rng.random::<f64>() * exit;
            let mut next = edges[at].last().expect("absorbing healthy state excluded").0;
            for &(to, rate) in &edges[at] {
                if pick < rate {
                    next = to;
                    break;
                }
                pick -= rate;
            }
            at = next;
        }
        elapsed
    };

    let chunks = trials.div_ceil(CHUNK);
    let moments = (0..chunks)
        .into_par_iter()
        .map(|c| {
            let mut m = Moments::EMPTY;
            for trial in c * CHUNK..((c + 1) * CHUNK).min(trials) {
                m.push(walk(trial));
            }
            m
        })
        .collect::<Vec<_>>()
        .into_iter()
        .fold(Moments::EMPTY, Moments::merge);

    let stderr = if trials > 1 { (moments.m2 / (moments.n - 1.0) / moments.n).sqrt() } else { 0.0 };
    Ok(McEstimate { mean: T::lit(moments.mean), stderr: T::lit(stderr), trials })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::markov::{models, solve_mtbf};

    #[test]
    fn original_system_estimate_within_three_sigma() {
        let est = simulate_mtbf(&models::original_system(0.5f64), 200_000, 7).unwrap();
        assert!((est.mean - 2.0).abs() < 3.0 * est.stderr, "{est:?}");
    }

    #[test]
    fn same_seed_is_bit_identical() {
        let m = models::tmr_system(2.0f64);
        let a = simulate_mtbf(&m, 10_000, 42).unwrap();
        let b = simulate_mtbf(&m, 10_000, 42).unwrap();
        assert_eq!(a.mean.to_bits(), b.mean.to_bits());
        assert_eq!(a.stderr.to_bits(), b.stderr.to_bits());
        let c = simulate_mtbf(&m, 10_000, 43).unwrap();
        assert_ne!(a.mean, c.mean);
    }

    #[test]
    fn single_trial_is_one_sample_with_zero_stderr() {
        let m = models::original_system(1.0f64);
        let one = simulate_mtbf(&m, 1, 9).unwrap();
        assert_eq!(one.stderr, 0.0);
        assert!(one.mean > 0.0);
        // the first trial of a longer run sees the same stream
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        rng.set_stream(0);
        let u: f64 = rng.random();
        assert_eq!(one.mean, -(1.0 - u).ln());
    }

    #[test]
    fn zero_trials_rejected() {
        assert_eq!(simulate_mtbf(&models::original_system(1.0f64), 0, 1).unwrap_err(), MarkovError::NoTrials);
    }

    #[test]
    fn infinite_model_does_not_walk_forever() {
        let m = MarkovModel::new(["A", "B", "F"], ["A", "B"], [("A", "B", 1.0f64), ("B", "A", 1.0)], "A").unwrap();
        let est = simulate_mtbf(&m, 10, 1).unwrap();
        assert!(est.mean.is_infinite());
        assert!(solve_mtbf(&m).unwrap().is_infinite());
    }
}
