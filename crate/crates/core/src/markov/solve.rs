use super::{MarkovError, MarkovModel, StateId};
use crate::scalar::Real;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SolverOptions<T> {
    /// A pivot smaller than `pivot_tolerance` times the largest magnitude in
    /// its original row marks the system as numerically singular.
    pub pivot_tolerance: T,
}

impl<T: Real> Default for SolverOptions<T> {
    fn default() -> Self {
        Self { pivot_tolerance: T::lit(1e-14) }
    }
}

/// Expected time to first failure, decomposed by healthy state.
#[derive(Debug, Clone, PartialEq)]
pub struct MtbfResult<T> {
    /// Infinite when absorption into the faulty set is not certain.
    pub mtbf: T,
    /// Expected time spent in each healthy state before absorption, in model
    /// order. Sums to `mtbf`.
    pub per_state_sojourn: Vec<(StateId, T)>,
}

impl<T: Real> MtbfResult<T> {
    pub fn is_infinite(&self) -> bool {
        self.mtbf.is_infinite()
    }

    pub fn sojourn(&self, label: &str) -> Option<T> {
        self.per_state_sojourn.iter().find(|(s, _)| s.label == label).map(|(_, t)| *t)
    }
}

pub fn solve_mtbf<T: Real>(model: &MarkovModel<T>) -> Result<MtbfResult<T>, MarkovError> {
    solve_mtbf_with(model, SolverOptions::default())
}

/// Absorbing-chain MTBF.
///
/// Faulty states are made absorbing. With `Q` the generator restricted to the
/// healthy states reachable from the initial state, the expected sojourn
/// vector `y` solves `(-Q)^T y = e_initial`; MTBF is `sum(y)`, which equals
/// the `initial` entry of the solution of `Q t = -1`.
pub fn solve_mtbf_with<T: Real>(
    model: &MarkovModel<T>,
    options: SolverOptions<T>,
) -> Result<MtbfResult<T>, MarkovError> {
    let reachable = model.reachable_healthy();
    let healthy: Vec<&StateId> = model.healthy_states().collect();

    if !model.absorption_certain(&reachable) {
        let per_state_sojourn = healthy
            .into_iter()
            .map(|s| {
                let t = if reachable.contains(&s.index) { T::infinity() } else { T::zero() };
                (s.clone(), t)
            })
            .collect();
        return Ok(MtbfResult { mtbf: T::infinity(), per_state_sojourn });
    }

    let n = reachable.len();
    let mut position = vec![usize::MAX; model.num_states()];
    for (k, &i) in reachable.iter().enumerate() {
        position[i] = k;
    }

    let mut a = vec![vec![T::zero(); n]; n];
    for (k, &i) in reachable.iter().enumerate() {
        a[k][k] = model.exit_rate(i);
    }
    for t in model.transitions() {
        let (pf, pt) = (position[t.from], position[t.to]);
        if pf != usize::MAX && pt != usize::MAX {
            a[pt][pf] = a[pt][pf] - t.rate;
        }
    }
    let mut rhs = vec![T::zero(); n];
    rhs[0] = T::one();

    let y = solve_dense(a, rhs, options.pivot_tolerance)?;

    let per_state_sojourn: Vec<(StateId, T)> = healthy
        .into_iter()
        .map(|s| {
            let p = position[s.index];
            let t = if p == usize::MAX { T::zero() } else { y[p].max(T::zero()) };
            (s.clone(), t)
        })
        .collect();
    let mtbf = per_state_sojourn.iter().map(|(_, t)| *t).sum();
    Ok(MtbfResult { mtbf, per_state_sojourn })
}

/// Gaussian elimination with partial pivoting on a dense square system.
pub(crate) fn solve_dense<T: Real>(mut a: Vec<Vec<T>>, mut b: Vec<T>, tolerance: T) -> Result<Vec<T>, MarkovError> {
    let n = b.len();
    let mut scale: Vec<T> = a.iter().map(|row| row.iter().fold(T::zero(), |m, v| m.max(v.abs()))).collect();

    for col in 0..n {
        let pivot_row = (col..n)
            .max_by(|&i, &j| a[i][col].abs().partial_cmp(&a[j][col].abs()).unwrap())
            .expect("non-empty pivot range");
        let magnitude = a[pivot_row][col].abs();
        if !(magnitude > tolerance * scale[pivot_row]) {
            return Err(MarkovError::Singular { pivot: col, magnitude: magnitude.to_f64().unwrap_or(f64::NAN) });
        }
        a.swap(col, pivot_row);
        b.swap(col, pivot_row);
        scale.swap(col, pivot_row);

        let (upper, lower) = a.split_at_mut(col + 1);
        let pivot = &upper[col];
        for (offset, row) in lower.iter_mut().enumerate() {
            let factor = row[col] / pivot[col];
            if factor == T::zero() {
                continue;
            }
            for k in col..n {
                row[k] = row[k] - factor * pivot[k];
            }
            let r = col + 1 + offset;
            b[r] = b[r] - factor * b[col];
        }
    }

    let mut x = vec![T::zero(); n];
    for i in (0..n).rev() {
        let tail: T = (i + 1..n).map(|k| a[i][k] * x[k]).sum();
        x[i] = (b[i] - tail) / a[i][i];
    }
    Ok(x)
}
