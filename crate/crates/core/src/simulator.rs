//! Step-by-step execution of a tag system with epoch tracking.
//!
//! An epoch ends once every symbol present at its start has been consumed.
//! When the epoch-start length is not a multiple of n, the step that eats
//! the last old symbols also eats some new ones and still belongs to the old
//! epoch, so an epoch of start length L always lasts `ceil(L / n)` steps.

use std::collections::VecDeque;
use std::num::NonZeroU64;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::distribution::TupleDistribution;
use crate::rules::RuleSet;
use crate::symbol::{tuple_count, tuple_index, Symbol, Word};

/// The machine cannot step: fewer than n symbols remain.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Error, Serialize, Deserialize)]
#[error("halted at step {step}: queue holds {length} symbols, fewer than n = {n}")]
pub struct Halted {
    pub step: u64,
    pub epoch: u64,
    pub length: usize,
    pub n: usize,
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("queue of length {length} is shorter than the window size {n}")]
pub struct QueueTooShort {
    pub length: usize,
    pub n: usize,
}

/// Live queue plus step and epoch counters.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SimulationState {
    queue: VecDeque<Symbol>,
    step: u64,
    epoch: u64,
    remaining_in_epoch: usize,
}

impl SimulationState {
    pub fn new(initial: &Word) -> Self {
        SimulationState {
            queue: initial.iter().copied().collect(),
            step: 0,
            epoch: 0,
            remaining_in_epoch: initial.len(),
        }
    }

    pub fn queue(&self) -> &VecDeque<Symbol> {
        &self.queue
    }

    pub fn len(&self) -> usize {
        self.queue.len()
    }

    pub fn is_empty(&self) -> bool {
        self.queue.is_empty()
    }

    pub fn step_count(&self) -> u64 {
        self.step
    }

    pub fn epoch(&self) -> u64 {
        self.epoch
    }

    pub fn remaining_in_epoch(&self) -> usize {
        self.remaining_in_epoch
    }

    pub fn to_word(&self) -> Word {
        self.queue.iter().copied().collect()
    }

    /// Per-symbol fraction of the current queue; all zero when empty.
    pub fn densities(&self, alphabet_size: usize) -> Vec<f64> {
        let mut counts = vec![0usize; alphabet_size];
        for s in &self.queue {
            counts[s.index()] += 1;
        }
        let len = self.queue.len();
        counts
            .into_iter()
            .map(|c| if len == 0 { 0.0 } else { c as f64 / len as f64 })
            .collect()
    }

    /// Performs one step. Returns `true` if this step completed the current
    /// epoch.
    pub fn step(&mut self, rules: &RuleSet) -> Result<bool, Halted> {
        let n = rules.n();
        if self.queue.len() < n {
            return Err(Halted {
                step: self.step,
                epoch: self.epoch,
                length: self.queue.len(),
                n,
            });
        }
        let k = rules.alphabet_size();
        let mut index = 0usize;
        for _ in 0..n {
            let s = self.queue.pop_front().expect("length checked above");
            index = index * k + s.index();
        }
        self.queue.extend(rules.production_at(index).iter().copied());
        self.step += 1;
        self.remaining_in_epoch = self.remaining_in_epoch.saturating_sub(n);
        if self.remaining_in_epoch == 0 {
            self.epoch += 1;
            self.remaining_in_epoch = self.queue.len();
            Ok(true)
        } else {
            Ok(false)
        }
    }
}

/// Observables of one completed epoch, measured at its first step.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EpochReport {
    pub epoch: u64,
    pub start_length: usize,
    pub steps: u64,
    /// `(next start length − start length) / steps`.
    pub growth_per_step: f64,
    pub densities: Vec<f64>,
}

/// Queue observables at an epoch start (or at the initial state).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EpochStart {
    pub epoch: u64,
    pub length: usize,
    pub densities: Vec<f64>,
}

/// Result of [`run_epochs`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EpochRun {
    /// One report per completed epoch, in order.
    pub reports: Vec<EpochReport>,
    /// Start of the epoch the run stopped in: epoch `max_epochs` on a full
    /// run, or the epoch during which the machine halted.
    pub last_start: EpochStart,
    pub halted: Option<Halted>,
    pub total_steps: u64,
}

/// Hook called with every state the run passes through: the initial state
/// and the state after each step. `boundary` is set for epoch starts.
pub trait Observer {
    fn observe(&mut self, state: &SimulationState, boundary: bool);
}

impl<F: FnMut(&SimulationState, bool)> Observer for F {
    fn observe(&mut self, state: &SimulationState, boundary: bool) {
        self(state, boundary)
    }
}

struct NoObserver;

impl Observer for NoObserver {
    fn observe(&mut self, _: &SimulationState, _: bool) {}
}

/// Runs until `max_epochs` epochs have completed or the machine halts.
pub fn run_epochs(initial: &Word, rules: &RuleSet, max_epochs: u64) -> EpochRun {
    run_epochs_observed(initial, rules, max_epochs, &mut NoObserver)
}

pub fn run_epochs_observed(initial: &Word, rules: &RuleSet, max_epochs: u64, observer: &mut impl Observer) -> EpochRun {
    let k = rules.alphabet_size();
    let mut state = SimulationState::new(initial);
    let mut reports = Vec::new();
    let mut start = EpochStart {
        epoch: 0,
        length: state.len(),
        densities: state.densities(k),
    };
    let mut start_step = 0u64;
    let mut halted = None;
    observer.observe(&state, true);

    while (reports.len() as u64) < max_epochs {
        match state.step(rules) {
            Ok(boundary) => {
                observer.observe(&state, boundary);
                if boundary {
                    let steps = state.step_count() - start_step;
                    let next = EpochStart {
                        epoch: state.epoch(),
                        length: state.len(),
                        densities: state.densities(k),
                    };
                    reports.push(EpochReport {
                        epoch: start.epoch,
                        start_length: start.length,
                        steps,
                        growth_per_step: (next.length as f64 - start.length as f64) / steps as f64,
                        densities: std::mem::take(&mut start.densities),
                    });
                    start = next;
                    start_step = state.step_count();
                }
            }
            Err(h) => {
                halted = Some(h);
                break;
            }
        }
    }
    EpochRun {
        reports,
        last_start: start,
        halted,
        total_steps: state.step_count(),
    }
}

/// `(step, length)` samples taken every `stride` steps, plus the final state.
#[derive(Debug, Clone, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct LengthTrace {
    pub samples: Vec<(u64, usize)>,
}

struct LengthSampler {
    stride: u64,
    trace: LengthTrace,
    last: Option<(u64, usize)>,
}

impl Observer for LengthSampler {
    fn observe(&mut self, state: &SimulationState, _boundary: bool) {
        let sample = (state.step_count(), state.len());
        if sample.0.is_multiple_of(self.stride) {
            self.trace.samples.push(sample);
            self.last = None;
        } else {
            self.last = Some(sample);
        }
    }
}

/// [`run_epochs`] with a per-step length trace sampled every `stride` steps.
pub fn run_epochs_traced(
    initial: &Word,
    rules: &RuleSet,
    max_epochs: u64,
    stride: NonZeroU64,
) -> (EpochRun, LengthTrace) {
    let mut sampler = LengthSampler {
        stride: stride.get(),
        trace: LengthTrace::default(),
        last: None,
    };
    let run = run_epochs_observed(initial, rules, max_epochs, &mut sampler);
    if let Some(last) = sampler.last {
        sampler.trace.samples.push(last);
    }
    (run, sampler.trace)
}

/// One row of a queue evolution picture.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum TraceRow {
    Queue(Vec<Symbol>),
    EpochBoundary,
}

/// Records the full queue every `stride` steps, with a marker row before
/// each epoch start after the first when `mark_epochs` is set.
pub fn run_snapshots(
    initial: &Word,
    rules: &RuleSet,
    max_epochs: u64,
    stride: NonZeroU64,
    mark_epochs: bool,
) -> (EpochRun, Vec<TraceRow>) {
    let stride = stride.get();
    let mut rows = Vec::new();
    let mut pending: Option<Vec<Symbol>> = None;
    let mut observer = |state: &SimulationState, boundary: bool| {
        if mark_epochs && boundary && state.step_count() > 0 {
            rows.push(TraceRow::EpochBoundary);
        }
        let snapshot: Vec<Symbol> = state.queue().iter().copied().collect();
        if state.step_count().is_multiple_of(stride) {
            rows.push(TraceRow::Queue(snapshot));
            pending = None;
        } else {
            pending = Some(snapshot);
        }
    };
    let run = run_epochs_observed(initial, rules, max_epochs, &mut observer);
    if let Some(last) = pending {
        rows.push(TraceRow::Queue(last));
    }
    (run, rows)
}

/// I.i.d. uniform symbols from a ChaCha8 stream seeded with `seed`.
pub fn random_queue(length: usize, alphabet_size: usize, seed: u64) -> Word {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    random_queue_from(&mut rng, length, alphabet_size)
}

pub fn random_queue_from<R: Rng + ?Sized>(rng: &mut R, length: usize, alphabet_size: usize) -> Word {
    assert!(alphabet_size >= 1 && alphabet_size <= u8::MAX as usize + 1);
    (0..length)
        .map(|_| Symbol::new(rng.random_range(0..alphabet_size) as u8))
        .collect()
}

/// Empirical distribution of the length-n windows starting at every position
/// `0..=len-n`.
pub fn measure_tuple_distribution(
    queue: &[Symbol],
    n: usize,
    alphabet_size: usize,
) -> Result<TupleDistribution, QueueTooShort> {
    if queue.len() < n || n == 0 {
        return Err(QueueTooShort { length: queue.len(), n });
    }
    let mut counts = vec![0u64; tuple_count(n, alphabet_size)];
    // rolling index: drop the leading digit, append the next one
    let top = tuple_count(n - 1, alphabet_size);
    let mut index = tuple_index(&queue[..n], alphabet_size);
    counts[index] += 1;
    for &s in &queue[n..] {
        index = (index % top) * alphabet_size + s.index();
        counts[index] += 1;
    }
    let windows = (queue.len() - n + 1) as f64;
    let mass = counts.into_iter().map(|c| c as f64 / windows).collect();
    Ok(TupleDistribution::from_masses(n, alphabet_size, mass).expect("counts are valid masses"))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rules::{parse_rules, RuleSet};
    use crate::symbol::Alphabet;

    fn rules(text: &str) -> RuleSet {
        parse_rules(text).unwrap()
    }

    fn word(s: &str) -> Word {
        Alphabet::binary().parse_word(s).unwrap()
    }

    #[test]
    fn step_appends_production() {
        let r = rules("aa -> aab\nab -> ab\nba -> b\nbb -> ba");
        let mut st = SimulationState::new(&word("aa"));
        st.step(&r).unwrap();
        assert_eq!(st.to_word(), word("aab"));
        assert_eq!(st.len(), 3);
        assert_eq!(st.step_count(), 1);
    }

    #[test]
    fn fixed_point_rule_rotates() {
        let r = rules("aa -> aa\nab -> ab\nba -> ba\nbb -> bb");
        let mut st = SimulationState::new(&word("ababab"));
        for _ in 0..7 {
            st.step(&r).unwrap();
            assert_eq!(st.len(), 6);
        }
        assert_eq!(st.to_word(), word("ababab"));
    }

    #[test]
    fn empty_production_then_halt() {
        let r = rules("aa -> aa\nab -> ba\nba ->\nbb -> ab");
        let mut st = SimulationState::new(&word("ba"));
        st.step(&r).unwrap();
        assert!(st.is_empty());
        let h = st.step(&r).unwrap_err();
        assert_eq!(h.length, 0);
        assert_eq!(h.step, 1);
    }

    #[test]
    fn epoch_boundary_with_odd_length() {
        let r = rules("aa -> aa\nab -> ab\nba -> ba\nbb -> bb");
        let mut st = SimulationState::new(&word("aaaaa"));
        assert!(!st.step(&r).unwrap());
        assert!(!st.step(&r).unwrap());
        // third step eats the last old symbol plus one new one
        assert!(st.step(&r).unwrap());
        assert_eq!(st.epoch(), 1);
        assert_eq!(st.remaining_in_epoch(), 5);
    }

    #[test]
    fn identity_rules_repeat_epochs() {
        let r = rules("aa -> aa\nab -> ab\nba -> ba\nbb -> bb");
        let run = run_epochs(&random_queue(100, 2, 9), &r, 5);
        assert_eq!(run.reports.len(), 5);
        for rep in &run.reports {
            assert_eq!(rep.start_length, 100);
            assert_eq!(rep.steps, 50);
            assert_eq!(rep.growth_per_step, 0.0);
            assert_eq!(rep.densities, run.reports[0].densities);
        }
    }

    #[test]
    fn all_empty_rules_halt_after_half_length() {
        let r = RuleSet::from_glyphs(&[("aa", ""), ("ab", ""), ("ba", ""), ("bb", "")]).unwrap();
        let run = run_epochs(&random_queue(100, 2, 1), &r, 10);
        assert_eq!(run.reports.len(), 1);
        assert_eq!(run.reports[0].steps, 50);
        assert_eq!(run.reports[0].growth_per_step, -2.0);
        assert_eq!(run.total_steps, 50);
        let h = run.halted.unwrap();
        assert_eq!((h.step, h.epoch, h.length), (50, 1, 0));
    }

    #[test]
    fn zero_epochs_reports_initial_state_only() {
        let r = rules("aa -> aa\nab -> ab\nba -> ba\nbb -> bb");
        let run = run_epochs(&word("abab"), &r, 0);
        assert!(run.reports.is_empty());
        assert_eq!(run.last_start.length, 4);
        assert_eq!(run.last_start.densities, vec![0.5, 0.5]);
    }

    #[test]
    fn epoch_steps_are_ceil_of_length_over_n() {
        let r = rules("aa -> aaa\nab -> b\nba -> a\nbb -> b");
        let run = run_epochs(&random_queue(101, 2, 3), &r, 6);
        for rep in &run.reports {
            assert_eq!(rep.steps, (rep.start_length as u64).div_ceil(2));
        }
    }

    #[test]
    fn random_queue_is_reproducible() {
        assert_eq!(random_queue(50, 2, 7), random_queue(50, 2, 7));
        assert_ne!(random_queue(50, 2, 7), random_queue(50, 2, 8));
        let single = random_queue(1, 2, 11);
        assert_eq!(single.len(), 1);
        assert_eq!(single, random_queue(1, 2, 11));
    }

    #[test]
    fn random_queue_is_balanced() {
        // binomial(10000, 1/2) has sd 50; [4600, 5400] is a ±8σ window
        for seed in 0..20 {
            let q = random_queue(10_000, 2, seed);
            let a = q.count(Symbol::new(0));
            assert!((4600..=5400).contains(&a), "seed {seed}: {a}");
        }
    }

    #[test]
    fn window_counts() {
        let d = measure_tuple_distribution(word("aaaa").symbols(), 2, 2).unwrap();
        assert_eq!(d.masses(), &[1.0, 0.0, 0.0, 0.0]);
        let d = measure_tuple_distribution(word("abab").symbols(), 2, 2).unwrap();
        assert!((d.get(&word("ab")) - 2.0 / 3.0).abs() < 1e-15);
        assert!((d.get(&word("ba")) - 1.0 / 3.0).abs() < 1e-15);
        assert!(measure_tuple_distribution(word("a").symbols(), 2, 2).is_err());
    }

    #[test]
    fn windows_of_long_random_queue() {
        // sd of each pair frequency is about sqrt(3/16 / 1e6) ≈ 4.3e-4
        let q = random_queue(1_000_000, 2, 5);
        let d = measure_tuple_distribution(q.symbols(), 2, 2).unwrap();
        for &m in d.masses() {
            assert!((m - 0.25).abs() < 0.002, "{m}");
        }
    }

    #[test]
    fn trace_samples_by_stride() {
        let r = rules("aa -> aa\nab -> ab\nba -> ba\nbb -> bb");
        let (run, trace) = run_epochs_traced(&word("abababab"), &r, 2, NonZeroU64::new(3).unwrap());
        assert_eq!(run.total_steps, 8);
        let steps: Vec<u64> = trace.samples.iter().map(|s| s.0).collect();
        assert_eq!(steps, vec![0, 3, 6, 8]);
    }

    #[test]
    fn snapshots_mark_epochs() {
        let r = rules("aa -> aa\nab -> ab\nba -> ba\nbb -> bb");
        let (_, rows) = run_snapshots(&word("abab"), &r, 2, NonZeroU64::new(1).unwrap(), true);
        let markers = rows.iter().filter(|r| **r == TraceRow::EpochBoundary).count();
        assert_eq!(markers, 2);
        assert_eq!(rows.len(), 5 + 2);
    }
}
