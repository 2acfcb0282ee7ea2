//! Probability mass over n-tuples and over production strings.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::symbol::{tuple_count, tuple_from_index, tuple_index, Alphabet, Word};

/// Tolerance for "sums to one" checks.
pub const UNIT_SUM_TOLERANCE: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum DistributionError {
    #[error("distribution has zero total mass")]
    ZeroMass,
    #[error("mass {0} is negative or not finite")]
    InvalidMass(f64),
    #[error("expected {expected} tuple masses, found {found}")]
    WrongSize { expected: usize, found: usize },
    #[error("key has length {found}, expected {expected}")]
    WrongTupleLength { expected: usize, found: usize },
    #[error("alphabet size must be at least 1")]
    EmptyAlphabet,
}

/// Rescaling to unit total mass.
pub trait Normalize: Sized {
    /// Returns a copy scaled so the masses sum to one. Fails with
    /// [`DistributionError::ZeroMass`] when every mass is zero.
    fn normalize(&self) -> Result<Self, DistributionError>;
}

fn check_mass(m: f64) -> Result<f64, DistributionError> {
    if m.is_finite() && m >= 0.0 {
        Ok(m)
    } else {
        Err(DistributionError::InvalidMass(m))
    }
}

fn scale_to_unit<'a>(total: f64, masses: impl Iterator<Item = &'a mut f64>) -> Result<(), DistributionError> {
    if !(total > 0.0) {
        return Err(DistributionError::ZeroMass);
    }
    for m in masses {
        *m /= total;
    }
    Ok(())
}

/// Probability of each length-n window at a uniformly random queue position.
///
/// Stored densely over all `|Σ|ⁿ` tuples in [`tuple_index`] order.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TupleDistribution {
    n: usize,
    alphabet_size: usize,
    mass: Vec<f64>,
}

impl TupleDistribution {
    /// Wraps raw masses (not necessarily normalized).
    pub fn from_masses(n: usize, alphabet_size: usize, mass: Vec<f64>) -> Result<Self, DistributionError> {
        if alphabet_size == 0 {
            return Err(DistributionError::EmptyAlphabet);
        }
        let expected = tuple_count(n, alphabet_size);
        if mass.len() != expected {
            return Err(DistributionError::WrongSize {
                expected,
                found: mass.len(),
            });
        }
        for &m in &mass {
            check_mass(m)?;
        }
        Ok(TupleDistribution { n, alphabet_size, mass })
    }

    /// Builds from `(tuple, mass)` pairs; absent tuples get zero mass.
    pub fn from_pairs<I>(n: usize, alphabet_size: usize, pairs: I) -> Result<Self, DistributionError>
    where
        I: IntoIterator<Item = (Word, f64)>,
    {
        let mut mass = vec![0.0; tuple_count(n, alphabet_size)];
        for (w, m) in pairs {
            if w.len() != n {
                return Err(DistributionError::WrongTupleLength {
                    expected: n,
                    found: w.len(),
                });
            }
            if w.iter().any(|s| s.index() >= alphabet_size) {
                return Err(DistributionError::WrongSize {
                    expected: alphabet_size,
                    found: w.iter().map(|s| s.index() + 1).max().unwrap_or(0),
                });
            }
            mass[tuple_index(w.symbols(), alphabet_size)] += check_mass(m)?;
        }
        Self::from_masses(n, alphabet_size, mass)
    }

    /// The i.i.d. uniform product distribution, every tuple `|Σ|⁻ⁿ`.
    pub fn uniform(n: usize, alphabet_size: usize) -> Self {
        let count = tuple_count(n, alphabet_size);
        TupleDistribution {
            n,
            alphabet_size,
            mass: vec![1.0 / count as f64; count],
        }
    }

    pub fn point(tuple: &Word, alphabet_size: usize) -> Self {
        let mut mass = vec![0.0; tuple_count(tuple.len(), alphabet_size)];
        mass[tuple_index(tuple.symbols(), alphabet_size)] = 1.0;
        TupleDistribution {
            n: tuple.len(),
            alphabet_size,
            mass,
        }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn alphabet_size(&self) -> usize {
        self.alphabet_size
    }

    pub fn masses(&self) -> &[f64] {
        &self.mass
    }

    pub fn get(&self, tuple: &Word) -> f64 {
        if tuple.len() != self.n || tuple.iter().any(|s| s.index() >= self.alphabet_size) {
            return 0.0;
        }
        self.mass[tuple_index(tuple.symbols(), self.alphabet_size)]
    }

    pub fn iter(&self) -> impl Iterator<Item = (Word, f64)> + '_ {
        self.mass
            .iter()
            .enumerate()
            .map(|(i, &m)| (tuple_from_index(i, self.n, self.alphabet_size), m))
    }

    pub fn total(&self) -> f64 {
        self.mass.iter().sum()
    }

    pub fn is_normalized(&self) -> bool {
        (self.total() - 1.0).abs() <= UNIT_SUM_TOLERANCE
    }

    /// Marginal probability of each symbol at the first window position.
    pub fn symbol_marginal(&self) -> Vec<f64> {
        let k = self.alphabet_size;
        let stride = tuple_count(self.n.saturating_sub(1), k);
        let mut out = vec![0.0; k];
        for (i, &m) in self.mass.iter().enumerate() {
            out[i / stride] += m;
        }
        out
    }

    /// Largest absolute mass difference to `other` over all tuples.
    pub fn linf_distance(&self, other: &TupleDistribution) -> f64 {
        assert_eq!(
            self.mass.len(),
            other.mass.len(),
            "distributions over different tuple spaces"
        );
        self.mass
            .iter()
            .zip(&other.mass)
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max)
    }

    /// Glyph-keyed view, e.g. `{"aa": 0.0625, …}`.
    pub fn to_glyph_map(&self, alphabet: &Alphabet) -> BTreeMap<String, f64> {
        self.iter().map(|(w, m)| (alphabet.render(&w), m)).collect()
    }
}

impl Normalize for TupleDistribution {
    fn normalize(&self) -> Result<Self, DistributionError> {
        let mut out = self.clone();
        scale_to_unit(self.total(), out.mass.iter_mut())?;
        Ok(out)
    }
}

/// Probability that a production instance generated during an epoch equals a
/// given string. Tuples with the same image are aggregated under one key.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct ProductionDistribution {
    mass: BTreeMap<Word, f64>,
}

impl ProductionDistribution {
    /// Builds from `(production, mass)` pairs, summing repeated keys.
    pub fn from_pairs<I>(pairs: I) -> Result<Self, DistributionError>
    where
        I: IntoIterator<Item = (Word, f64)>,
    {
        let mut mass = BTreeMap::new();
        for (w, m) in pairs {
            *mass.entry(w).or_insert(0.0) += check_mass(m)?;
        }
        Ok(ProductionDistribution { mass })
    }

    pub fn point(production: Word) -> Self {
        ProductionDistribution {
            mass: BTreeMap::from([(production, 1.0)]),
        }
    }

    pub fn get(&self, production: &Word) -> f64 {
        self.mass.get(production).copied().unwrap_or(0.0)
    }

    /// Mass of the empty production.
    pub fn empty_mass(&self) -> f64 {
        self.get(&Word::empty())
    }

    pub fn iter(&self) -> impl Iterator<Item = (&Word, f64)> + '_ {
        self.mass.iter().map(|(w, &m)| (w, m))
    }

    /// Entries with positive mass.
    pub fn support(&self) -> impl Iterator<Item = (&Word, f64)> + '_ {
        self.iter().filter(|&(_, m)| m > 0.0)
    }

    pub fn len(&self) -> usize {
        self.mass.len()
    }

    pub fn is_empty(&self) -> bool {
        self.mass.is_empty()
    }

    pub fn total(&self) -> f64 {
        self.mass.values().sum()
    }

    pub fn is_normalized(&self) -> bool {
        (self.total() - 1.0).abs() <= UNIT_SUM_TOLERANCE
    }

    pub fn to_glyph_map(&self, alphabet: &Alphabet) -> BTreeMap<String, f64> {
        self.iter().map(|(w, m)| (alphabet.render(w), m)).collect()
    }
}

impl Normalize for ProductionDistribution {
    fn normalize(&self) -> Result<Self, DistributionError> {
        let mut out = self.clone();
        scale_to_unit(self.total(), out.mass.values_mut())?;
        Ok(out)
    }
}

/// Free-function form of [`Normalize::normalize`].
pub fn normalize<D: Normalize>(d: &D) -> Result<D, DistributionError> {
    d.normalize()
}
