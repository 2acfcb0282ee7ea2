//! Epoch-to-epoch evolution of the tuple and production distributions.
//!
//! Each epoch the queue is modelled as a stationary concatenation of
//! independent production instances. From the tuple distribution at the start
//! of an epoch we get the distribution of productions generated during it
//! ([`production_distribution`]); from that we get the tuple distribution at
//! the start of the next epoch ([`next_tuple_distribution`]), which requires
//! the probability that a run of concatenated productions begins with a given
//! string ([`prefix_probability`]).
//!
//! Tuple probabilities describe a window at a uniformly random queue position,
//! not only at the positions the machine actually reads.

use std::collections::{BTreeMap, HashMap};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::distribution::{Normalize, ProductionDistribution, TupleDistribution};
use crate::rules::RuleSet;
use crate::symbol::{tuple_count, tuple_from_index, Symbol, Word};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum PredictError {
    #[error("expected production length is zero: every production with positive mass is empty")]
    AllEmpty,
    #[error("step {step} is beyond the predicted horizon of {horizon} steps")]
    BeyondHorizon { step: f64, horizon: f64 },
    #[error("tuple distribution is over length-{found} windows, rules have n = {expected}")]
    TupleLengthMismatch { expected: usize, found: usize },
    #[error("tuple distribution has alphabet size {found}, rules have {expected}")]
    AlphabetMismatch { expected: usize, found: usize },
    #[error("no epochs predicted")]
    NoEpochs,
}

/// Pushes the tuple distribution through the production function, merging
/// tuples that produce the same string.
pub fn production_distribution(tuples: &TupleDistribution, rules: &RuleSet) -> ProductionDistribution {
    let pairs = tuples
        .masses()
        .iter()
        .enumerate()
        .filter(|(_, &m)| m > 0.0)
        .map(|(i, &m)| (rules.production_at(i).clone(), m));
    ProductionDistribution::from_pairs(pairs).expect("tuple masses are valid")
}

/// `E[|r|] = Σ P(r = s)·|s|`.
pub fn expected_production_length(prod: &ProductionDistribution) -> f64 {
    prod.iter().map(|(s, m)| m * s.len() as f64).sum()
}

/// Expected queue growth per step: `E[|r|] − n`.
pub fn expected_growth(prod: &ProductionDistribution, n: usize) -> f64 {
    expected_production_length(prod) - n as f64
}

/// Per-symbol density of a queue built from productions drawn from `prod`.
pub fn symbol_densities(prod: &ProductionDistribution, alphabet_size: usize) -> Result<Vec<f64>, PredictError> {
    let expected_len = expected_production_length(prod);
    if !(expected_len > 0.0) {
        return Err(PredictError::AllEmpty);
    }
    let mut out = vec![0.0; alphabet_size];
    for (s, m) in prod.iter() {
        for sym in s {
            out[sym.index()] += m;
        }
    }
    for d in &mut out {
        *d /= expected_len;
    }
    Ok(out)
}

/// Probability that a uniformly random queue position falls inside an
/// instance of each production; proportional to `P(r = s)·|s|`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SelectionDistribution {
    mass: BTreeMap<Word, f64>,
}

impl SelectionDistribution {
    pub fn get(&self, production: &Word) -> f64 {
        self.mass.get(production).copied().unwrap_or(0.0)
    }

    pub fn iter(&self) -> impl Iterator<Item = (&Word, f64)> + '_ {
        self.mass.iter().map(|(w, &m)| (w, m))
    }

    pub fn total(&self) -> f64 {
        self.mass.values().sum()
    }
}

pub fn selection_distribution(prod: &ProductionDistribution) -> Result<SelectionDistribution, PredictError> {
    let expected_len = expected_production_length(prod);
    if !(expected_len > 0.0) {
        return Err(PredictError::AllEmpty);
    }
    let mass = prod
        .iter()
        .map(|(s, m)| (s.clone(), m * s.len() as f64 / expected_len))
        .collect();
    Ok(SelectionDistribution { mass })
}

/// How empty productions enter the text a window is read from.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub enum EmptyProductions {
    /// An empty production adds nothing and the text simply continues with
    /// the next production, which is what happens in the queue. Gives the
    /// `1 / (1 − P(ε))` factor in prefix probabilities.
    #[default]
    Skip,
    /// A window that runs into an empty production is dropped and the
    /// surviving window masses renormalized. Not what the queue does, but
    /// reproduces tables built that way.
    Break,
}

/// Memoized prefix probabilities for one production distribution.
///
/// `P(t)` is the probability that `r₁·r₂·r₃·…`, with the `rⱼ` drawn i.i.d.
/// from the distribution, begins with `t`. Empty productions contribute
/// nothing to the text, so they are conditioned away by dividing by
/// `1 − P(ε)`.
pub struct PrefixProbabilities<'a> {
    nonempty: Vec<(&'a [Symbol], f64)>,
    norm: f64,
    cache: HashMap<Vec<Symbol>, f64>,
}

impl<'a> PrefixProbabilities<'a> {
    pub fn new(prod: &'a ProductionDistribution) -> Result<Self, PredictError> {
        Self::with_empty(prod, EmptyProductions::Skip)
    }

    /// Under [`EmptyProductions::Break`] the result is the probability that
    /// the text begins with `t` *and* no empty production interrupts it.
    pub fn with_empty(prod: &'a ProductionDistribution, empty: EmptyProductions) -> Result<Self, PredictError> {
        let nonempty: Vec<_> = prod
            .support()
            .filter(|(s, _)| !s.is_empty())
            .map(|(s, m)| (s.symbols(), m))
            .collect();
        let nonempty_mass: f64 = nonempty.iter().map(|&(_, m)| m).sum();
        if !(nonempty_mass > 0.0) {
            return Err(PredictError::AllEmpty);
        }
        let norm = match empty {
            EmptyProductions::Skip => nonempty_mass,
            EmptyProductions::Break => prod.total(),
        };
        Ok(PrefixProbabilities {
            nonempty,
            norm,
            cache: HashMap::new(),
        })
    }

    pub fn get(&mut self, t: &[Symbol]) -> f64 {
        if t.is_empty() {
            return 1.0;
        }
        if let Some(&p) = self.cache.get(t) {
            return p;
        }
        let mut total = 0.0;
        for i in 0..self.nonempty.len() {
            let (s, m) = self.nonempty[i];
            total += m * if t.len() <= s.len() {
                if s.starts_with(t) {
                    1.0
                } else {
                    0.0
                }
            } else if t.starts_with(s) {
                self.get(&t[s.len()..])
            } else {
                0.0
            };
        }
        let p = total / self.norm;
        self.cache.insert(t.to_vec(), p);
        p
    }
}

/// Probability that a concatenation of productions drawn from `prod` begins
/// with `t`.
pub fn prefix_probability(t: &[Symbol], prod: &ProductionDistribution) -> Result<f64, PredictError> {
    if t.is_empty() {
        return Ok(1.0);
    }
    Ok(PrefixProbabilities::new(prod)?.get(t))
}

/// Probability that the window `w` starts at offset `k` of an instance of
/// `s`, given the rest of the queue continues with fresh productions.
fn window_match(s: &[Symbol], k: usize, w: &[Symbol], prefix: &mut PrefixProbabilities<'_>) -> f64 {
    let inside = (s.len() - k).min(w.len());
    if s[k..k + inside] != w[..inside] {
        return 0.0;
    }
    if inside == w.len() {
        1.0
    } else {
        prefix.get(&w[inside..])
    }
}

/// Conditional probability of window `w` at a uniform position inside an
/// instance of `s`, averaged over the `|s|` offsets.
pub fn window_given_production(s: &Word, w: &[Symbol], prod: &ProductionDistribution) -> Result<f64, PredictError> {
    if s.is_empty() {
        return Ok(0.0);
    }
    let mut prefix = PrefixProbabilities::new(prod)?;
    let hits: f64 = (0..s.len()).map(|k| window_match(s.symbols(), k, w, &mut prefix)).sum();
    Ok(hits / s.len() as f64)
}

/// Tuple distribution at the start of the next epoch, whose queue is the
/// concatenation of productions drawn from `prod`.
pub fn next_tuple_distribution(
    prod: &ProductionDistribution,
    n: usize,
    alphabet_size: usize,
) -> Result<TupleDistribution, PredictError> {
    next_tuple_distribution_with(prod, n, alphabet_size, EmptyProductions::Skip)
}

pub fn next_tuple_distribution_with(
    prod: &ProductionDistribution,
    n: usize,
    alphabet_size: usize,
    empty: EmptyProductions,
) -> Result<TupleDistribution, PredictError> {
    let expected_len = expected_production_length(prod);
    let mut prefix = PrefixProbabilities::with_empty(prod, empty)?;
    let count = tuple_count(n, alphabet_size);
    let mut mass = vec![0.0; count];
    let support: Vec<_> = prod.support().filter(|(s, _)| !s.is_empty()).collect();
    for (index, slot) in mass.iter_mut().enumerate() {
        let w = tuple_from_index(index, n, alphabet_size);
        let mut total = 0.0;
        for &(s, m) in &support {
            // selection(s) / |s| = P(r = s) / E|r|
            let hits: f64 = (0..s.len())
                .map(|k| window_match(s.symbols(), k, w.symbols(), &mut prefix))
                .sum();
            total += m * hits;
        }
        *slot = total / expected_len;
    }
    let raw = TupleDistribution::from_masses(n, alphabet_size, mass).expect("masses are non-negative");
    raw.normalize().map_err(|_| PredictError::AllEmpty)
}

/// Length at the start of the next epoch: an epoch of length L lasts L/n
/// steps, each changing the length by `growth` on average. Clamped at 0.
pub fn project_length(current_length: f64, growth_per_step: f64, n: usize) -> f64 {
    (current_length * (1.0 + growth_per_step / n as f64)).max(0.0)
}

/// How predicted lengths are chained from one epoch to the next.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub enum LengthProjection {
    /// Full double precision throughout.
    #[default]
    Exact,
    /// Growth is rounded to `growth_decimals` before each projection, the way
    /// tables that print the growth to a fixed number of places are chained.
    Rounded { growth_decimals: u32 },
}

fn round_to(x: f64, decimals: u32) -> f64 {
    let scale = 10f64.powi(decimals as i32);
    (x * scale).round() / scale
}

impl LengthProjection {
    /// Growth rounded to three decimals.
    pub const TABULATED: LengthProjection = LengthProjection::Rounded { growth_decimals: 3 };

    pub fn project(self, length: f64, growth: f64, n: usize) -> f64 {
        match self {
            LengthProjection::Exact => project_length(length, growth, n),
            LengthProjection::Rounded { growth_decimals } => {
                project_length(length, round_to(growth, growth_decimals), n)
            }
        }
    }
}

/// Predicted observables for one epoch.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EpochPrediction {
    pub epoch: u64,
    /// Tuple distribution at the epoch start.
    pub tuple_dist: TupleDistribution,
    /// Productions generated during the epoch.
    pub prod_dist: ProductionDistribution,
    pub expected_growth: f64,
    /// Symbol densities at the epoch start.
    pub densities: Vec<f64>,
    pub expected_length: f64,
}

/// The chain stopped because the projected length fell below n.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Termination {
    pub epoch: u64,
    pub projected_length: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Prediction {
    pub n: usize,
    pub epochs: Vec<EpochPrediction>,
    pub termination: Option<Termination>,
}

impl Prediction {
    pub fn lengths(&self) -> Vec<f64> {
        self.epochs.iter().map(|e| e.expected_length).collect()
    }

    pub fn growths(&self) -> Vec<f64> {
        self.epochs.iter().map(|e| e.expected_growth).collect()
    }

    /// Queue length at `step` by linear interpolation within epochs.
    pub fn length_at_step(&self, step: f64) -> Result<f64, PredictError> {
        predict_length_at_step(&self.epochs, step, self.n)
    }
}

pub fn predict_epochs(
    initial: &TupleDistribution,
    rules: &RuleSet,
    initial_length: f64,
    epochs: u64,
) -> Result<Prediction, PredictError> {
    predict_epochs_with(initial, rules, initial_length, epochs, PredictOptions::default())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct PredictOptions {
    pub projection: LengthProjection,
    pub empty: EmptyProductions,
}

impl PredictOptions {
    pub fn tabulated() -> Self {
        PredictOptions {
            projection: LengthProjection::TABULATED,
            ..Default::default()
        }
    }
}

/// Chains the per-epoch update for up to `epochs` epochs, stopping early if
/// the projected length drops below n.
pub fn predict_epochs_with(
    initial: &TupleDistribution,
    rules: &RuleSet,
    initial_length: f64,
    epochs: u64,
    options: PredictOptions,
) -> Result<Prediction, PredictError> {
    let (n, k) = (rules.n(), rules.alphabet_size());
    if initial.n() != n {
        return Err(PredictError::TupleLengthMismatch {
            expected: n,
            found: initial.n(),
        });
    }
    if initial.alphabet_size() != k {
        return Err(PredictError::AlphabetMismatch {
            expected: k,
            found: initial.alphabet_size(),
        });
    }
    let mut out = Vec::new();
    let mut tuples = initial.clone();
    let mut densities = initial.symbol_marginal();
    let mut length = initial_length.max(0.0);
    let mut termination = None;

    for epoch in 0..epochs {
        let prod = production_distribution(&tuples, rules);
        let growth = expected_growth(&prod, n);
        out.push(EpochPrediction {
            epoch,
            tuple_dist: tuples.clone(),
            prod_dist: prod.clone(),
            expected_growth: growth,
            densities: densities.clone(),
            expected_length: length,
        });
        if epoch + 1 == epochs {
            break;
        }
        let next_length = options.projection.project(length, growth, n);
        if next_length < n as f64 {
            termination = Some(Termination {
                epoch: epoch + 1,
                projected_length: next_length,
            });
            break;
        }
        tuples = next_tuple_distribution_with(&prod, n, k, options.empty)?;
        densities = symbol_densities(&prod, k)?;
        length = next_length;
    }
    Ok(Prediction {
        n,
        epochs: out,
        termination,
    })
}

/// Length at `step` (counted from the start of epoch 0). Epoch k lasts
/// `L_k / n` steps; within it the length moves linearly from `L_k` to
/// `L_{k+1}` (the projected next length for the final epoch).
pub fn predict_length_at_step(predictions: &[EpochPrediction], step: f64, n: usize) -> Result<f64, PredictError> {
    if predictions.is_empty() {
        return Err(PredictError::NoEpochs);
    }
    if !(step >= 0.0) {
        return Err(PredictError::BeyondHorizon { step, horizon: 0.0 });
    }
    let mut start = 0.0;
    for (i, e) in predictions.iter().enumerate() {
        let duration = e.expected_length / n as f64;
        let end = start + duration;
        if step <= end {
            let next = predictions
                .get(i + 1)
                .map(|p| p.expected_length)
                .unwrap_or_else(|| project_length(e.expected_length, e.expected_growth, n));
            if duration <= 0.0 {
                return Ok(e.expected_length);
            }
            let frac = ((step - start) / duration).clamp(0.0, 1.0);
            return Ok(e.expected_length + (next - e.expected_length) * frac);
        }
        start = end;
    }
    Err(PredictError::BeyondHorizon { step, horizon: start })
}
