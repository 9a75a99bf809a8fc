use std::collections::{HashMap, HashSet};
use std::fmt;

use super::MarkovError;
use crate::scalar::Real;

/// Dense state index plus its unique label.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct StateId {
    pub index: usize,
    pub label: String,
}

impl fmt::Display for StateId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.label)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Transition<T> {
    pub from: usize,
    pub to: usize,
    pub rate: T,
}

/// A validated continuous-time Markov chain with a healthy/faulty partition.
///
/// The initial state holds probability 1 at t = 0. Faulty states may carry
/// outgoing (repair) edges; they are kept in the model but the MTBF
/// computations treat every faulty state as absorbing.
#[derive(Debug, Clone, PartialEq)]
pub struct MarkovModel<T> {
    states: Vec<StateId>,
    healthy: Vec<bool>,
    transitions: Vec<Transition<T>>,
    initial: usize,
}

impl<T: Real> MarkovModel<T> {
    pub fn builder() -> ModelBuilder<T> {
        ModelBuilder::default()
    }

    /// Builds a model whose faulty set is the complement of `healthy`.
    pub fn new<'a>(
        states: impl IntoIterator<Item = &'a str>,
        healthy: impl IntoIterator<Item = &'a str>,
        transitions: impl IntoIterator<Item = (&'a str, &'a str, T)>,
        initial: &str,
    ) -> Result<Self, MarkovError> {
        let mut builder = Self::builder().states(states).healthy(healthy).initial(initial);
        for (from, to, rate) in transitions {
            builder = builder.transition(from, to, rate);
        }
        builder.build()
    }

    pub fn num_states(&self) -> usize {
        self.states.len()
    }

    pub fn states(&self) -> &[StateId] {
        &self.states
    }

    pub fn state(&self, index: usize) -> &StateId {
        &self.states[index]
    }

    pub fn index_of(&self, label: &str) -> Option<usize> {
        self.states.iter().position(|s| s.label == label)
    }

    pub fn is_healthy(&self, index: usize) -> bool {
        self.healthy[index]
    }

    pub fn healthy_states(&self) -> impl Iterator<Item = &StateId> + '_ {
        self.states.iter().filter(|s| self.healthy[s.index])
    }

    pub fn faulty_states(&self) -> impl Iterator<Item = &StateId> + '_ {
        self.states.iter().filter(|s| !self.healthy[s.index])
    }

    pub fn transitions(&self) -> &[Transition<T>] {
        &self.transitions
    }

    pub fn initial(&self) -> &StateId {
        &self.states[self.initial]
    }

    pub fn outgoing(&self, index: usize) -> impl Iterator<Item = &Transition<T>> + '_ {
        self.transitions.iter().filter(move |t| t.from == index)
    }

    /// Total exit rate of a state.
    pub fn exit_rate(&self, index: usize) -> T {
        self.outgoing(index).map(|t| t.rate).sum()
    }

    /// Same chain with every rate multiplied by `factor`.
    pub fn scaled(&self, factor: T) -> Result<Self, MarkovError> {
        let mut scaled = self.clone();
        for t in &mut scaled.transitions {
            t.rate = t.rate * factor;
            if !(t.rate > T::zero()) || !t.rate.is_finite() {
                return Err(MarkovError::NonPositiveRate {
                    from: self.states[t.from].label.clone(),
                    to: self.states[t.to].label.clone(),
                    rate: t.rate.to_string(),
                });
            }
        }
        Ok(scaled)
    }

    /// Healthy states reachable from the initial state without passing
    /// through a faulty state, in discovery order.
    pub(crate) fn reachable_healthy(&self) -> Vec<usize> {
        let mut seen = vec![false; self.num_states()];
        let mut order = vec![self.initial];
        seen[self.initial] = true;
        let mut head = 0;
        while head < order.len() {
            let at = order[head];
            head += 1;
            for t in self.outgoing(at) {
                if self.healthy[t.to] && !seen[t.to] {
                    seen[t.to] = true;
                    order.push(t.to);
                }
            }
        }
        order
    }

    /// True when absorption into the faulty set is certain from the initial
    /// state, i.e. every reachable healthy state can still reach a faulty one.
    pub(crate) fn absorption_certain(&self, reachable: &[usize]) -> bool {
        let n = self.num_states();
        // backward closure from faulty states over healthy predecessors
        let mut reaches_fault: Vec<bool> = (0..n).map(|i| !self.healthy[i]).collect();
        let mut changed = true;
        while changed {
            changed = false;
            for t in &self.transitions {
                if self.healthy[t.from] && !reaches_fault[t.from] && reaches_fault[t.to] {
                    reaches_fault[t.from] = true;
                    changed = true;
                }
            }
        }
        reachable.iter().all(|&i| reaches_fault[i])
    }
}

/// Incremental constructor for [`MarkovModel`].
///
/// States are declared by `states`, `healthy` or `faulty` in first-mention
/// order. When `faulty` is never called, the faulty set is the complement of
/// the healthy set.
#[derive(Debug, Clone)]
pub struct ModelBuilder<T> {
    states: Vec<String>,
    healthy: Vec<String>,
    faulty: Option<Vec<String>>,
    transitions: Vec<(String, String, T)>,
    initial: Option<String>,
}

impl<T> Default for ModelBuilder<T> {
    fn default() -> Self {
        Self { states: Vec::new(), healthy: Vec::new(), faulty: None, transitions: Vec::new(), initial: None }
    }
}

impl<T: Real> ModelBuilder<T> {
    fn declare(&mut self, label: &str) {
        if !self.states.iter().any(|s| s == label) {
            self.states.push(label.to_owned());
        }
    }

    /// Declares states in order. A label repeated here is an error at build.
    pub fn states<'a>(mut self, labels: impl IntoIterator<Item = &'a str>) -> Self {
        for label in labels {
            self.states.push(label.to_owned());
        }
        self
    }

    pub fn healthy<'a>(mut self, labels: impl IntoIterator<Item = &'a str>) -> Self {
        for label in labels {
            self.declare(label);
            self.healthy.push(label.to_owned());
        }
        self
    }

    pub fn faulty<'a>(mut self, labels: impl IntoIterator<Item = &'a str>) -> Self {
        let mut faulty = self.faulty.take().unwrap_or_default();
        for label in labels {
            self.declare(label);
            faulty.push(label.to_owned());
        }
        self.faulty = Some(faulty);
        self
    }

    pub fn transition(mut self, from: &str, to: &str, rate: T) -> Self {
        self.transitions.push((from.to_owned(), to.to_owned(), rate));
        self
    }

    pub fn initial(mut self, label: &str) -> Self {
        self.initial = Some(label.to_owned());
        self
    }

    pub fn build(self) -> Result<MarkovModel<T>, MarkovError> {
        if self.states.is_empty() {
            return Err(MarkovError::Empty);
        }
        let mut index = HashMap::with_capacity(self.states.len());
        for (i, label) in self.states.iter().enumerate() {
            if index.insert(label.as_str(), i).is_some() {
                return Err(MarkovError::DuplicateState(label.clone()));
            }
        }
        let lookup = |label: &str| index.get(label).copied().ok_or_else(|| MarkovError::UnknownState(label.to_owned()));

        let mut healthy = vec![false; self.states.len()];
        for label in &self.healthy {
            healthy[lookup(label)?] = true;
        }
        if let Some(faulty) = &self.faulty {
            let mut is_faulty = vec![false; self.states.len()];
            for label in faulty {
                let i = lookup(label)?;
                if healthy[i] {
                    return Err(MarkovError::PartitionOverlap(label.clone()));
                }
                is_faulty[i] = true;
            }
            if let Some(i) = (0..self.states.len()).find(|&i| !healthy[i] && !is_faulty[i]) {
                return Err(MarkovError::IncompletePartition(self.states[i].clone()));
            }
        }

        let mut seen = HashSet::new();
        let mut transitions = Vec::with_capacity(self.transitions.len());
        for (from, to, rate) in &self.transitions {
            let (f, t) = (lookup(from)?, lookup(to)?);
            if f == t {
                return Err(MarkovError::SelfTransition(from.clone()));
            }
            if !(*rate > T::zero()) || !rate.is_finite() {
                return Err(MarkovError::NonPositiveRate {
                    from: from.clone(),
                    to: to.clone(),
                    rate: rate.to_string(),
                });
            }
            if !seen.insert((f, t)) {
                return Err(MarkovError::DuplicateTransition { from: from.clone(), to: to.clone() });
            }
            transitions.push(Transition { from: f, to: t, rate: *rate });
        }

        let initial_label = self.initial.ok_or(MarkovError::MissingInitial)?;
        let initial = lookup(&initial_label)?;
        if !healthy[initial] {
            return Err(MarkovError::InitialNotHealthy(initial_label));
        }

        let states = self.states.into_iter().enumerate().map(|(index, label)| StateId { index, label }).collect();
        Ok(MarkovModel { states, healthy, transitions, initial })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn two_state() -> ModelBuilder<f64> {
        MarkovModel::builder().healthy(["S0"]).faulty(["S1"]).transition("S0", "S1", 0.5).initial("S0")
    }

    #[test]
    fn original_system_is_valid() {
        let m = two_state().build().unwrap();
        assert_eq!(m.num_states(), 2);
        assert!(m.is_healthy(0));
        assert!(!m.is_healthy(1));
        assert_eq!(m.initial().label, "S0");
        assert_eq!(m.exit_rate(0), 0.5);
    }

    #[test]
    fn faulty_defaults_to_complement() {
        let m = MarkovModel::new(["A", "B", "C"], ["A"], [("A", "B", 1.0), ("B", "C", 2.0)], "A").unwrap();
        let faulty: Vec<_> = m.faulty_states().map(|s| s.label.as_str()).collect();
        assert_eq!(faulty, ["B", "C"]);
    }

    #[test]
    fn overlap_rejected() {
        let err = MarkovModel::<f64>::builder().healthy(["S0"]).faulty(["S0"]).initial("S0").build().unwrap_err();
        assert_eq!(err, MarkovError::PartitionOverlap("S0".into()));
    }

    #[test]
    fn incomplete_partition_rejected() {
        let err = MarkovModel::<f64>::builder()
            .states(["S0", "S1", "S2"])
            .healthy(["S0"])
            .faulty(["S1"])
            .initial("S0")
            .build()
            .unwrap_err();
        assert_eq!(err, MarkovError::IncompletePartition("S2".into()));
    }

    #[test]
    fn zero_rate_rejected() {
        let err = MarkovModel::builder()
            .healthy(["S0"])
            .faulty(["S1"])
            .transition("S0", "S1", 0.0)
            .initial("S0")
            .build()
            .unwrap_err();
        assert!(matches!(err, MarkovError::NonPositiveRate { .. }));
        let err = MarkovModel::builder()
            .healthy(["S0"])
            .faulty(["S1"])
            .transition("S0", "S1", f64::NAN)
            .initial("S0")
            .build()
            .unwrap_err();
        assert!(matches!(err, MarkovError::NonPositiveRate { .. }));
    }

    #[test]
    fn structural_errors() {
        assert_eq!(
            two_state().transition("S0", "S1", 1.0).build().unwrap_err(),
            MarkovError::DuplicateTransition { from: "S0".into(), to: "S1".into() }
        );
        assert_eq!(
            two_state().transition("S0", "S0", 1.0).build().unwrap_err(),
            MarkovError::SelfTransition("S0".into())
        );
        assert_eq!(two_state().initial("S1").build().unwrap_err(), MarkovError::InitialNotHealthy("S1".into()));
        assert_eq!(
            two_state().transition("S0", "S9", 1.0).build().unwrap_err(),
            MarkovError::UnknownState("S9".into())
        );
        assert_eq!(
            MarkovModel::<f64>::builder().states(["A", "A"]).initial("A").build().unwrap_err(),
            MarkovError::DuplicateState("A".into())
        );
        assert_eq!(MarkovModel::<f64>::builder().build().unwrap_err(), MarkovError::Empty);
    }

    #[test]
    fn repair_edges_out_of_faulty_states_are_kept() {
        let m = two_state().transition("S1", "S0", 3.0).build().unwrap();
        assert_eq!(m.transitions().len(), 2);
        assert_eq!(m.exit_rate(1), 3.0);
    }
}
