//! Python bindings: rule sets, prediction, simulation, trial comparison and
//! the distribution helpers.
//!
//! Distributions cross the boundary as `dict[str, float]` keyed by glyph
//! strings; `""` (or `"ε"`) is the empty production.

use std::collections::BTreeMap;
use std::fmt::Display;
use std::num::NonZeroU64;

use pyo3::exceptions::PyValueError;
use pyo3::prelude::*;

use tagmetrics::harness::{self, TrialConfig};
use tagmetrics::{
    normalize, Alphabet, EmptyProductions, LengthProjection, PredictOptions, ProductionDistribution, TupleDistribution,
    Word,
};

fn value_error(e: impl Display) -> PyErr {
    PyValueError::new_err(e.to_string())
}

fn alphabet(glyphs: &str) -> PyResult<Alphabet> {
    Alphabet::new(glyphs).map_err(value_error)
}

fn parse_word(alphabet: &Alphabet, text: &str) -> PyResult<Word> {
    if text == "ε" {
        return Ok(Word::empty());
    }
    alphabet.parse_word(text).map_err(value_error)
}

fn production_dist(alphabet: &Alphabet, masses: BTreeMap<String, f64>) -> PyResult<ProductionDistribution> {
    let pairs = masses
        .iter()
        .map(|(k, &m)| Ok((parse_word(alphabet, k)?, m)))
        .collect::<PyResult<Vec<_>>>()?;
    normalize(&ProductionDistribution::from_pairs(pairs).map_err(value_error)?).map_err(value_error)
}

fn tuple_dist(alphabet: &Alphabet, n: usize, masses: BTreeMap<String, f64>) -> PyResult<TupleDistribution> {
    let pairs = masses
        .iter()
        .map(|(k, &m)| Ok((parse_word(alphabet, k)?, m)))
        .collect::<PyResult<Vec<_>>>()?;
    normalize(&TupleDistribution::from_pairs(n, alphabet.len(), pairs).map_err(value_error)?).map_err(value_error)
}

fn empty_mode(break_on_empty: bool) -> EmptyProductions {
    if break_on_empty {
        EmptyProductions::Break
    } else {
        EmptyProductions::Skip
    }
}

/// A tag system's production rules, parsed from the `aa -> aab` notation.
#[pyclass(frozen, module = "pytagmetrics")]
struct RuleSet {
    inner: tagmetrics::RuleSet,
}

#[pymethods]
impl RuleSet {
    #[new]
    fn new(text: &str) -> PyResult<Self> {
        let inner = tagmetrics::parse_rules(text).map_err(value_error)?;
        Ok(RuleSet { inner })
    }

    #[staticmethod]
    fn from_file(path: std::path::PathBuf) -> PyResult<Self> {
        let text = std::fs::read_to_string(&path).map_err(value_error)?;
        Self::new(&text)
    }

    /// Deletion number.
    #[getter]
    fn n(&self) -> usize {
        self.inner.n()
    }

    #[getter]
    fn glyphs(&self) -> String {
        self.inner.alphabet().to_string()
    }

    /// Per-step growth bounds `(min |f| − n, max |f| − n)`.
    fn growth_bounds(&self) -> (f64, f64) {
        self.inner.growth_bounds()
    }

    /// `{lhs: rhs}` with `""` for an empty production.
    fn productions(&self) -> BTreeMap<String, String> {
        let a = self.inner.alphabet();
        self.inner
            .iter()
            .map(|(lhs, rhs)| (a.render(&lhs), a.render(rhs)))
            .collect()
    }

    fn to_text(&self) -> String {
        tagmetrics::format_rules(&self.inner)
    }

    fn __str__(&self) -> String {
        self.inner.summary()
    }

    fn __repr__(&self) -> String {
        format!("RuleSet({:?})", self.inner.summary())
    }

    fn __eq__(&self, other: &RuleSet) -> bool {
        self.inner == other.inner
    }
}

#[pyclass(frozen, get_all, skip_from_py_object, module = "pytagmetrics")]
#[derive(Clone)]
struct EpochPrediction {
    epoch: u64,
    expected_length: f64,
    growth_per_step: f64,
    densities: Vec<f64>,
    tuple_distribution: BTreeMap<String, f64>,
    production_distribution: BTreeMap<String, f64>,
}

#[pymethods]
impl EpochPrediction {
    fn __repr__(&self) -> String {
        format!(
            "EpochPrediction(epoch={}, expected_length={}, growth_per_step={}, densities={:?})",
            self.epoch, self.expected_length, self.growth_per_step, self.densities
        )
    }
}

#[pyclass(frozen, module = "pytagmetrics")]
struct Prediction {
    inner: tagmetrics::Prediction,
    glyphs: Alphabet,
}

#[pymethods]
impl Prediction {
    #[getter]
    fn epochs(&self) -> Vec<EpochPrediction> {
        let a = &self.glyphs;
        self.inner
            .epochs
            .iter()
            .map(|e| EpochPrediction {
                epoch: e.epoch,
                expected_length: e.expected_length,
                growth_per_step: e.expected_growth,
                densities: e.densities.clone(),
                tuple_distribution: e.tuple_dist.to_glyph_map(a),
                production_distribution: e.prod_dist.to_glyph_map(a),
            })
            .collect()
    }

    fn lengths(&self) -> Vec<f64> {
        self.inner.lengths()
    }

    fn growths(&self) -> Vec<f64> {
        self.inner.growths()
    }

    /// `(epoch, projected_length)` if the projection fell below n.
    #[getter]
    fn termination(&self) -> Option<(u64, f64)> {
        self.inner.termination.as_ref().map(|t| (t.epoch, t.projected_length))
    }

    fn length_at_step(&self, step: f64) -> PyResult<f64> {
        self.inner.length_at_step(step).map_err(value_error)
    }

    fn __len__(&self) -> usize {
        self.inner.epochs.len()
    }
}

#[pyclass(frozen, get_all, skip_from_py_object, module = "pytagmetrics")]
#[derive(Clone)]
struct EpochReport {
    epoch: u64,
    start_length: usize,
    steps: u64,
    growth_per_step: f64,
    densities: Vec<f64>,
}

#[pymethods]
impl EpochReport {
    fn __repr__(&self) -> String {
        format!(
            "EpochReport(epoch={}, start_length={}, steps={}, growth_per_step={}, densities={:?})",
            self.epoch, self.start_length, self.steps, self.growth_per_step, self.densities
        )
    }
}

#[pyclass(frozen, get_all, module = "pytagmetrics")]
struct SimulationRun {
    epochs: Vec<EpochReport>,
    total_steps: u64,
    /// Step at which fewer than n symbols were left, if the machine halted.
    halted_at_step: Option<u64>,
    final_length: usize,
}

/// Predicts `epochs` epochs from `length` symbols. `initial` is a tuple
/// distribution (uniform when omitted).
#[pyfunction]
#[pyo3(signature = (rules, length=100.0, epochs=7, initial=None, tabulated=false, break_on_empty=false))]
fn predict(
    rules: &RuleSet,
    length: f64,
    epochs: u64,
    initial: Option<BTreeMap<String, f64>>,
    tabulated: bool,
    break_on_empty: bool,
) -> PyResult<Prediction> {
    let r = &rules.inner;
    let start = match initial {
        Some(m) => tuple_dist(r.alphabet(), r.n(), m)?,
        None => TupleDistribution::uniform(r.n(), r.alphabet_size()),
    };
    let options = PredictOptions {
        projection: if tabulated {
            LengthProjection::TABULATED
        } else {
            LengthProjection::Exact
        },
        empty: empty_mode(break_on_empty),
    };
    let inner = tagmetrics::predict_epochs_with(&start, r, length, epochs, options).map_err(value_error)?;
    Ok(Prediction {
        inner,
        glyphs: r.alphabet().clone(),
    })
}

/// Runs the machine for up to `epochs` complete epochs, from `queue` if
/// given, otherwise from a uniformly random queue of `length` symbols.
#[pyfunction]
#[pyo3(signature = (rules, queue=None, length=1000, epochs=10, seed=0))]
fn simulate(rules: &RuleSet, queue: Option<&str>, length: usize, epochs: u64, seed: u64) -> PyResult<SimulationRun> {
    let r = &rules.inner;
    let initial = match queue {
        Some(q) => parse_word(r.alphabet(), q)?,
        None => tagmetrics::random_queue(length, r.alphabet_size(), seed),
    };
    let run = tagmetrics::run_epochs(&initial, r, epochs);
    Ok(SimulationRun {
        epochs: run
            .reports
            .iter()
            .map(|e| EpochReport {
                epoch: e.epoch,
                start_length: e.start_length,
                steps: e.steps,
                growth_per_step: e.growth_per_step,
                densities: e.densities.clone(),
            })
            .collect(),
        total_steps: run.total_steps,
        halted_at_step: run.halted.as_ref().map(|h| h.step),
        final_length: run.halted.as_ref().map_or(run.last_start.length, |h| h.length),
    })
}

/// Queue contents after every `stride` steps, as glyph strings.
#[pyfunction]
#[pyo3(signature = (rules, queue, epochs=1, stride=1))]
fn snapshots(rules: &RuleSet, queue: &str, epochs: u64, stride: u64) -> PyResult<Vec<String>> {
    let r = &rules.inner;
    let stride = NonZeroU64::new(stride).ok_or_else(|| PyValueError::new_err("stride must be at least 1"))?;
    let initial = parse_word(r.alphabet(), queue)?;
    let (_, rows) = tagmetrics::simulator::run_snapshots(&initial, r, epochs, stride, false);
    Ok(rows
        .into_iter()
        .filter_map(|row| match row {
            tagmetrics::simulator::TraceRow::Queue(q) => Some(q.iter().map(|&s| r.alphabet().glyph(s)).collect()),
            tagmetrics::simulator::TraceRow::EpochBoundary => None,
        })
        .collect())
}

/// Predicted vs. trial-averaged observables, one dict per epoch and quantity
/// (`density_<glyph>`, `growth_per_step`, `length`).
#[pyfunction]
#[pyo3(signature = (rules, length=1000, trials=100, epochs=6, seed=0, reference_length=100.0))]
fn compare(
    py: Python<'_>,
    rules: &RuleSet,
    length: usize,
    trials: usize,
    epochs: u64,
    seed: u64,
    reference_length: f64,
) -> PyResult<Vec<BTreeMap<&'static str, Py<PyAny>>>> {
    let r = &rules.inner;
    let mut cfg = TrialConfig::new(r.clone(), length, trials, epochs, seed);
    cfg.reference_length = reference_length;
    let initial = TupleDistribution::uniform(r.n(), r.alphabet_size());
    let table = py.detach(|| harness::compare(&cfg, &initial)).map_err(value_error)?;
    let mut out = Vec::new();
    for row in &table.rows {
        let mut cells: Vec<(String, harness::Comparison)> = table
            .glyphs
            .iter()
            .zip(&row.densities)
            .map(|(g, c)| (format!("density_{g}"), *c))
            .collect();
        cells.push(("growth_per_step".into(), row.growth));
        cells.push(("length".into(), row.length));
        for (quantity, c) in cells {
            let mut d: BTreeMap<&'static str, Py<PyAny>> = BTreeMap::new();
            d.insert("epoch", row.epoch.into_pyobject(py)?.into_any().unbind());
            d.insert("survivors", row.survivors.into_pyobject(py)?.into_any().unbind());
            d.insert("quantity", quantity.into_pyobject(py)?.into_any().unbind());
            d.insert("predicted", c.predicted.into_pyobject(py)?.into_any().unbind());
            d.insert("measured", c.measured.into_pyobject(py)?.into_any().unbind());
            d.insert(
                "measured_stderr",
                c.measured_stderr.into_pyobject(py)?.into_any().unbind(),
            );
            d.insert("error", c.error.into_pyobject(py)?.into_any().unbind());
            out.push(d);
        }
    }
    Ok(out)
}

/// Distribution of productions generated from a tuple distribution.
#[pyfunction]
fn production_distribution(rules: &RuleSet, tuples: BTreeMap<String, f64>) -> PyResult<BTreeMap<String, f64>> {
    let r = &rules.inner;
    let t = tuple_dist(r.alphabet(), r.n(), tuples)?;
    Ok(tagmetrics::production_distribution(&t, r).to_glyph_map(r.alphabet()))
}

/// Window distribution of the queue built from productions drawn i.i.d.
#[pyfunction]
#[pyo3(signature = (productions, n=2, glyphs="ab", break_on_empty=false))]
fn next_tuple_distribution(
    productions: BTreeMap<String, f64>,
    n: usize,
    glyphs: &str,
    break_on_empty: bool,
) -> PyResult<BTreeMap<String, f64>> {
    let a = alphabet(glyphs)?;
    let prod = production_dist(&a, productions)?;
    let next =
        tagmetrics::next_tuple_distribution_with(&prod, n, a.len(), empty_mode(break_on_empty)).map_err(value_error)?;
    Ok(next.to_glyph_map(&a))
}

/// Probability that the concatenated productions begin with `prefix`.
#[pyfunction]
#[pyo3(signature = (prefix, productions, glyphs="ab"))]
fn prefix_probability(prefix: &str, productions: BTreeMap<String, f64>, glyphs: &str) -> PyResult<f64> {
    let a = alphabet(glyphs)?;
    let prod = production_dist(&a, productions)?;
    let t = parse_word(&a, prefix)?;
    tagmetrics::prefix_probability(t.symbols(), &prod).map_err(value_error)
}

/// Length-weighted chance that a random queue position lies in each production.
#[pyfunction]
#[pyo3(signature = (productions, glyphs="ab"))]
fn selection_distribution(productions: BTreeMap<String, f64>, glyphs: &str) -> PyResult<BTreeMap<String, f64>> {
    let a = alphabet(glyphs)?;
    let prod = production_dist(&a, productions)?;
    let sel = tagmetrics::selection_distribution(&prod).map_err(value_error)?;
    Ok(sel.iter().map(|(w, m)| (a.render(w), m)).collect())
}

/// Sampled counterpart of `next_tuple_distribution`.
#[pyfunction]
#[pyo3(signature = (productions, n=2, glyphs="ab", symbols=1_000_000, seed=0))]
fn oracle_tuple_distribution(
    py: Python<'_>,
    productions: BTreeMap<String, f64>,
    n: usize,
    glyphs: &str,
    symbols: usize,
    seed: u64,
) -> PyResult<BTreeMap<String, f64>> {
    let a = alphabet(glyphs)?;
    let prod = production_dist(&a, productions)?;
    let k = a.len();
    let sampled = py
        .detach(|| harness::oracle_tuple_distribution(&prod, n, k, symbols, seed))
        .map_err(value_error)?;
    Ok(sampled.to_glyph_map(&a))
}

/// Uniformly random queue of `length` glyphs.
#[pyfunction]
#[pyo3(signature = (length, glyphs="ab", seed=0))]
fn random_queue(length: usize, glyphs: &str, seed: u64) -> PyResult<String> {
    let a = alphabet(glyphs)?;
    Ok(a.render(&tagmetrics::random_queue(length, a.len(), seed)))
}

#[pymodule]
fn pytagmetrics(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<RuleSet>()?;
    m.add_class::<Prediction>()?;
    m.add_class::<EpochPrediction>()?;
    m.add_class::<EpochReport>()?;
    m.add_class::<SimulationRun>()?;
    m.add_function(wrap_pyfunction!(predict, m)?)?;
    m.add_function(wrap_pyfunction!(simulate, m)?)?;
    m.add_function(wrap_pyfunction!(snapshots, m)?)?;
    m.add_function(wrap_pyfunction!(compare, m)?)?;
    m.add_function(wrap_pyfunction!(production_distribution, m)?)?;
    m.add_function(wrap_pyfunction!(next_tuple_distribution, m)?)?;
    m.add_function(wrap_pyfunction!(prefix_probability, m)?)?;
    m.add_function(wrap_pyfunction!(selection_distribution, m)?)?;
    m.add_function(wrap_pyfunction!(oracle_tuple_distribution, m)?)?;
    m.add_function(wrap_pyfunction!(random_queue, m)?)?;
    Ok(())
}
