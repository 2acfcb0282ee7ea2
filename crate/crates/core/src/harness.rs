//! Seeded Monte-Carlo trials and predicted-vs-measured comparison tables.
//!
//! Trial k draws its initial queue from ChaCha8 stream k of the master seed,
//! so results do not depend on how trials are scheduled across threads.
//! `TAGMETRICS_THREADS` caps the worker count.

use rand::distr::weighted::WeightedIndex;
use rand::distr::Distribution;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::distribution::{ProductionDistribution, TupleDistribution};
use crate::predictor::{predict_epochs, PredictError};
use crate::rules::{validate_rules, RuleError, RuleSet};
use crate::simulator::{measure_tuple_distribution, random_queue_from, run_epochs, EpochRun};
use crate::symbol::Symbol;

pub const THREADS_ENV: &str = "TAGMETRICS_THREADS";

/// Smallest sample accepted by [`oracle_tuple_distribution`].
pub const MIN_ORACLE_SYMBOLS: usize = 100_000;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum HarnessError {
    #[error(transparent)]
    Rules(#[from] RuleError),
    #[error(transparent)]
    Predict(#[from] PredictError),
    #[error("every production with positive mass is empty")]
    AllEmpty,
    #[error("oracle needs at least {MIN_ORACLE_SYMBOLS} symbols, got {0}")]
    SampleTooSmall(usize),
    #[error("invalid trial configuration: {0}")]
    Config(String),
}

#[derive(Debug, Clone, PartialEq)]
pub struct TrialConfig {
    pub rules: RuleSet,
    pub initial_length: usize,
    pub trials: usize,
    /// Epoch transitions observed; observables are reported for epochs
    /// `0..=epochs`.
    pub epochs: u64,
    pub master_seed: u64,
    /// Length that measured lengths are rescaled to, and that predictions
    /// start from.
    pub reference_length: f64,
}

impl TrialConfig {
    pub const DEFAULT_REFERENCE_LENGTH: f64 = 100.0;

    pub fn new(rules: RuleSet, initial_length: usize, trials: usize, epochs: u64, master_seed: u64) -> Self {
        TrialConfig {
            rules,
            initial_length,
            trials,
            epochs,
            master_seed,
            reference_length: Self::DEFAULT_REFERENCE_LENGTH,
        }
    }

    fn check(&self) -> Result<(), HarnessError> {
        validate_rules(&self.rules)?;
        if self.trials == 0 {
            return Err(HarnessError::Config("trials must be at least 1".into()));
        }
        if self.epochs == 0 {
            return Err(HarnessError::Config("epochs must be at least 1".into()));
        }
        if self.initial_length < self.rules.n() {
            return Err(HarnessError::Config(format!(
                "initial length {} is shorter than n = {}",
                self.initial_length,
                self.rules.n()
            )));
        }
        if !(self.reference_length > 0.0) {
            return Err(HarnessError::Config("reference length must be positive".into()));
        }
        Ok(())
    }
}

/// RNG for trial `trial` of a run seeded with `master_seed`.
pub fn trial_rng(master_seed: u64, trial: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(master_seed);
    rng.set_stream(trial);
    rng
}

/// Mean and standard error of the mean.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct Estimate {
    pub mean: f64,
    pub stderr: f64,
}

impl Estimate {
    pub fn from_samples(xs: &[f64]) -> Self {
        let count = xs.len();
        if count == 0 {
            return Estimate {
                mean: f64::NAN,
                stderr: f64::NAN,
            };
        }
        let mean = xs.iter().sum::<f64>() / count as f64;
        let stderr = if count > 1 {
            let var = xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (count - 1) as f64;
            (var / count as f64).sqrt()
        } else {
            0.0
        };
        Estimate { mean, stderr }
    }
}

/// Averages over the trials that completed a given epoch.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EpochStats {
    pub epoch: u64,
    pub survivors: usize,
    pub start_length: Estimate,
    pub growth_per_step: Estimate,
    pub densities: Vec<Estimate>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrialSummary {
    pub trials: usize,
    pub initial_length: usize,
    /// Trials that halted before completing every epoch.
    pub halted: usize,
    pub epochs: Vec<EpochStats>,
}

fn worker_count() -> Option<usize> {
    std::env::var(THREADS_ENV)
        .ok()
        .and_then(|v| v.trim().parse::<usize>().ok())
        .filter(|&t| t > 0)
}

fn run_one(cfg: &TrialConfig, trial: usize) -> EpochRun {
    let mut rng = trial_rng(cfg.master_seed, trial as u64);
    let initial = random_queue_from(&mut rng, cfg.initial_length, cfg.rules.alphabet_size());
    run_epochs(&initial, &cfg.rules, cfg.epochs + 1)
}

/// Runs `cfg.trials` independent simulations and averages the observables of
/// epochs `0..=cfg.epochs`. Each run is taken through `cfg.epochs + 1`
/// complete epochs so the last epoch also has a measured growth.
pub fn run_trials(cfg: &TrialConfig) -> Result<TrialSummary, HarnessError> {
    cfg.check()?;
    let simulate = || -> Vec<EpochRun> { (0..cfg.trials).into_par_iter().map(|t| run_one(cfg, t)).collect() };
    let runs = match worker_count() {
        Some(threads) => rayon::ThreadPoolBuilder::new()
            .num_threads(threads)
            .build()
            .map_err(|e| HarnessError::Config(e.to_string()))?
            .install(simulate),
        None => simulate(),
    };

    let k = cfg.rules.alphabet_size();
    let mut epochs = Vec::new();
    for epoch in 0..=cfg.epochs as usize {
        let reports: Vec<_> = runs.iter().filter_map(|r| r.reports.get(epoch)).collect();
        if reports.is_empty() {
            break;
        }
        let lengths: Vec<f64> = reports.iter().map(|r| r.start_length as f64).collect();
        let growths: Vec<f64> = reports.iter().map(|r| r.growth_per_step).collect();
        let densities = (0..k)
            .map(|s| Estimate::from_samples(&reports.iter().map(|r| r.densities[s]).collect::<Vec<_>>()))
            .collect();
        epochs.push(EpochStats {
            epoch: epoch as u64,
            survivors: reports.len(),
            start_length: Estimate::from_samples(&lengths),
            growth_per_step: Estimate::from_samples(&growths),
            densities,
        });
    }
    Ok(TrialSummary {
        trials: cfg.trials,
        initial_length: cfg.initial_length,
        halted: runs.iter().filter(|r| r.halted.is_some()).count(),
        epochs,
    })
}

/// A predicted value next to its measured mean.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Comparison {
    pub predicted: f64,
    pub measured: f64,
    pub measured_stderr: f64,
    pub error: f64,
}

impl Comparison {
    pub fn new(predicted: f64, measured: Estimate) -> Self {
        Comparison {
            predicted,
            measured: measured.mean,
            measured_stderr: measured.stderr,
            error: (predicted - measured.mean).abs(),
        }
    }

    /// Error relative to the predicted value.
    pub fn relative_error(&self) -> f64 {
        self.error / self.predicted.abs()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ComparisonRow {
    pub epoch: u64,
    pub survivors: usize,
    pub densities: Vec<Comparison>,
    pub growth: Comparison,
    /// In reference units.
    pub length: Comparison,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ComparisonTable {
    pub rules: String,
    pub glyphs: Vec<char>,
    pub reference_length: f64,
    pub measured_initial_length: usize,
    pub trials: usize,
    pub master_seed: u64,
    pub rows: Vec<ComparisonRow>,
}

/// Joins the prediction for `cfg.epochs + 1` epochs (starting from
/// `initial` at the reference length) with the trial averages. Measured
/// lengths are rescaled by `reference_length / initial_length`. Rows stop at
/// the first epoch missing from either side.
pub fn compare(cfg: &TrialConfig, initial: &TupleDistribution) -> Result<ComparisonTable, HarnessError> {
    cfg.check()?;
    let prediction = predict_epochs(initial, &cfg.rules, cfg.reference_length, cfg.epochs + 1)?;
    let summary = run_trials(cfg)?;
    let scale = cfg.reference_length / cfg.initial_length as f64;
    let rows = prediction
        .epochs
        .iter()
        .zip(&summary.epochs)
        .map(|(p, m)| ComparisonRow {
            epoch: p.epoch,
            survivors: m.survivors,
            densities: p
                .densities
                .iter()
                .zip(&m.densities)
                .map(|(&pd, &md)| Comparison::new(pd, md))
                .collect(),
            growth: Comparison::new(p.expected_growth, m.growth_per_step),
            length: Comparison::new(
                p.expected_length,
                Estimate {
                    mean: m.start_length.mean * scale,
                    stderr: m.start_length.stderr * scale,
                },
            ),
        })
        .collect();
    Ok(ComparisonTable {
        rules: cfg.rules.summary(),
        glyphs: cfg.rules.alphabet().glyphs().collect(),
        reference_length: cfg.reference_length,
        measured_initial_length: cfg.initial_length,
        trials: cfg.trials,
        master_seed: cfg.master_seed,
        rows,
    })
}

/// Empirical window distribution of i.i.d. productions concatenated to at
/// least `symbols` symbols. Independent of the analytical recurrence, it
/// serves as a brute-force check on
/// [`next_tuple_distribution`](crate::predictor::next_tuple_distribution).
pub fn oracle_tuple_distribution(
    prod: &ProductionDistribution,
    n: usize,
    alphabet_size: usize,
    symbols: usize,
    seed: u64,
) -> Result<TupleDistribution, HarnessError> {
    if symbols < MIN_ORACLE_SYMBOLS {
        return Err(HarnessError::SampleTooSmall(symbols));
    }
    let entries: Vec<_> = prod.support().collect();
    if entries.iter().all(|(s, _)| s.is_empty()) {
        return Err(HarnessError::AllEmpty);
    }
    let picker = WeightedIndex::new(entries.iter().map(|&(_, m)| m)).map_err(|_| HarnessError::AllEmpty)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut text: Vec<Symbol> = Vec::with_capacity(symbols + 16);
    while text.len() < symbols {
        text.extend_from_slice(entries[picker.sample(&mut rng)].0.symbols());
    }
    Ok(measure_tuple_distribution(&text, n, alphabet_size).expect("sample is long enough"))
}
