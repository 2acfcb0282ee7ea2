//! Text, CSV and JSON emitters for simulation runs, predictions and
//! comparison tables.
//!
//! Text output uses fixed six-decimal floats; CSV and JSON use the shortest
//! representation that round-trips.

use std::io::{self, Write};

use serde::Serialize;
use serde_json::json;

use crate::harness::{Comparison, ComparisonTable};
use crate::predictor::Prediction;
use crate::rules::RuleSet;
use crate::simulator::{EpochRun, EpochStart, LengthTrace};
use crate::symbol::Alphabet;

fn csv_err(e: csv::Error) -> io::Error {
    match e.into_kind() {
        csv::ErrorKind::Io(e) => e,
        other => io::Error::other(format!("{other:?}")),
    }
}

fn density_headers(alphabet: &Alphabet) -> impl Iterator<Item = String> + '_ {
    alphabet.glyphs().map(|g| format!("density_{g}"))
}

fn write_density_lines(out: &mut impl Write, alphabet: &Alphabet, densities: &[f64]) -> io::Result<()> {
    for (g, d) in alphabet.glyphs().zip(densities) {
        writeln!(out, "Density of {g} symbols: {d:.6}")?;
    }
    Ok(())
}

fn write_start_block(out: &mut impl Write, alphabet: &Alphabet, start: &EpochStart) -> io::Result<()> {
    writeln!(out, "Epoch {}", start.epoch)?;
    writeln!(out, "Length: {}", start.length)?;
    write_density_lines(out, alphabet, &start.densities)?;
    writeln!(out)
}

/// Per-epoch listing: `Epoch k`, `Length: …`, `Density of a symbols: …`.
/// The state the run stopped in is listed too when no epoch completed or
/// the machine halted.
pub fn write_run_text(out: &mut impl Write, alphabet: &Alphabet, run: &EpochRun) -> io::Result<()> {
    for r in &run.reports {
        write_start_block(
            out,
            alphabet,
            &EpochStart {
                epoch: r.epoch,
                length: r.start_length,
                densities: r.densities.clone(),
            },
        )?;
    }
    if run.reports.is_empty() || run.halted.is_some() {
        write_start_block(out, alphabet, &run.last_start)?;
    }
    if let Some(h) = &run.halted {
        writeln!(out, "Halted at step {} with {} symbols in the queue", h.step, h.length)?;
    }
    Ok(())
}

pub fn write_run_csv(out: impl Write, alphabet: &Alphabet, run: &EpochRun) -> io::Result<()> {
    let mut w = csv::Writer::from_writer(out);
    let mut header: Vec<String> = ["epoch", "start_length", "steps", "growth_per_step"]
        .into_iter()
        .map(String::from)
        .collect();
    header.extend(density_headers(alphabet));
    w.write_record(&header).map_err(csv_err)?;
    for r in &run.reports {
        let mut rec = vec![
            r.epoch.to_string(),
            r.start_length.to_string(),
            r.steps.to_string(),
            r.growth_per_step.to_string(),
        ];
        rec.extend(r.densities.iter().map(f64::to_string));
        w.write_record(&rec).map_err(csv_err)?;
    }
    w.flush()
}

pub fn write_trace_csv(out: impl Write, trace: &LengthTrace) -> io::Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["step", "length"]).map_err(csv_err)?;
    for (step, len) in &trace.samples {
        w.write_record([step.to_string(), len.to_string()]).map_err(csv_err)?;
    }
    w.flush()
}

fn write_json(mut out: impl Write, value: &impl Serialize) -> io::Result<()> {
    serde_json::to_writer_pretty(&mut out, value)?;
    writeln!(out)
}

pub fn write_run_json(out: impl Write, rules: &RuleSet, run: &EpochRun) -> io::Result<()> {
    let doc = json!({
        "rules": rules.summary(),
        "glyphs": rules.alphabet().glyphs().map(String::from).collect::<Vec<_>>(),
        "run": run,
    });
    write_json(out, &doc)
}

/// Same shape as [`write_run_text`] with real-valued lengths.
pub fn write_prediction_text(out: &mut impl Write, alphabet: &Alphabet, prediction: &Prediction) -> io::Result<()> {
    for e in &prediction.epochs {
        writeln!(out, "Epoch {}", e.epoch)?;
        writeln!(out, "Length: {:.6}", e.expected_length)?;
        write_density_lines(out, alphabet, &e.densities)?;
        writeln!(out)?;
    }
    if let Some(t) = &prediction.termination {
        writeln!(
            out,
            "Terminated before epoch {}: projected length {:.6}",
            t.epoch, t.projected_length
        )?;
    }
    Ok(())
}

pub fn write_prediction_csv(out: impl Write, alphabet: &Alphabet, prediction: &Prediction) -> io::Result<()> {
    let mut w = csv::Writer::from_writer(out);
    let mut header: Vec<String> = ["epoch", "expected_length", "growth_per_step"]
        .into_iter()
        .map(String::from)
        .collect();
    header.extend(density_headers(alphabet));
    w.write_record(&header).map_err(csv_err)?;
    for e in &prediction.epochs {
        let mut rec = vec![
            e.epoch.to_string(),
            e.expected_length.to_string(),
            e.expected_growth.to_string(),
        ];
        rec.extend(e.densities.iter().map(f64::to_string));
        w.write_record(&rec).map_err(csv_err)?;
    }
    w.flush()
}

/// JSON document with the full tuple and production distributions of every
/// epoch, keyed by glyph strings (`""` is the empty production).
pub fn write_prediction_json(out: impl Write, rules: &RuleSet, prediction: &Prediction) -> io::Result<()> {
    let alphabet = rules.alphabet();
    let epochs: Vec<_> = prediction
        .epochs
        .iter()
        .map(|e| {
            json!({
                "epoch": e.epoch,
                "expected_length": e.expected_length,
                "growth_per_step": e.expected_growth,
                "densities": alphabet.glyphs().map(String::from).zip(e.densities.iter().copied()).collect::<std::collections::BTreeMap<_, _>>(),
                "tuple_distribution": e.tuple_dist.to_glyph_map(alphabet),
                "production_distribution": e.prod_dist.to_glyph_map(alphabet),
            })
        })
        .collect();
    let doc = json!({
        "rules": rules.summary(),
        "n": prediction.n,
        "glyphs": alphabet.glyphs().map(String::from).collect::<Vec<_>>(),
        "epochs": epochs,
        "termination": prediction.termination,
    });
    write_json(out, &doc)
}

fn comparison_block(
    out: &mut impl Write,
    title: &str,
    cells: &[Comparison],
    epochs: usize,
    width: usize,
) -> io::Result<()> {
    writeln!(out, "{title}")?;
    type Getter = fn(&Comparison) -> f64;
    let rows: [(&str, Getter); 3] = [
        ("Predicted", |c| c.predicted),
        ("Measured", |c| c.measured),
        ("Error", |c| c.error),
    ];
    for (label, get) in rows {
        write!(out, "{label:<10}")?;
        for c in cells.iter().take(epochs) {
            write!(out, " {:>width$.6}", get(c))?;
        }
        writeln!(out)?;
    }
    writeln!(out)
}

/// Aligned table: one column per epoch, predicted / measured / error rows for
/// each symbol density, the growth per step and the length.
pub fn write_comparison_text(out: &mut impl Write, table: &ComparisonTable) -> io::Result<()> {
    let width = 12;
    writeln!(out, "{}", table.rules)?;
    writeln!(
        out,
        "{} trials from {} symbols, seed {}; lengths rescaled to a reference length of {}",
        table.trials, table.measured_initial_length, table.master_seed, table.reference_length
    )?;
    writeln!(out)?;
    write!(out, "{:<10}", "Epoch")?;
    for row in &table.rows {
        write!(out, " {:>width$}", row.epoch)?;
    }
    writeln!(out)?;
    write!(out, "{:<10}", "Survivors")?;
    for row in &table.rows {
        write!(out, " {:>width$}", row.survivors)?;
    }
    writeln!(out)?;
    writeln!(out)?;
    let epochs = table.rows.len();
    for (i, g) in table.glyphs.iter().enumerate() {
        let cells: Vec<_> = table.rows.iter().map(|r| r.densities[i]).collect();
        comparison_block(out, &format!("Density of {g} in queue"), &cells, epochs, width)?;
    }
    let growth: Vec<_> = table.rows.iter().map(|r| r.growth).collect();
    comparison_block(out, "Growth per step", &growth, epochs, width)?;
    let length: Vec<_> = table.rows.iter().map(|r| r.length).collect();
    comparison_block(out, "Length of queue", &length, epochs, width)
}

/// Long format: `epoch,survivors,quantity,predicted,measured,measured_stderr,error`.
pub fn write_comparison_csv(out: impl Write, table: &ComparisonTable) -> io::Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record([
        "epoch",
        "survivors",
        "quantity",
        "predicted",
        "measured",
        "measured_stderr",
        "error",
    ])
    .map_err(csv_err)?;
    for row in &table.rows {
        let mut cells: Vec<(String, Comparison)> = table
            .glyphs
            .iter()
            .zip(&row.densities)
            .map(|(g, c)| (format!("density_{g}"), *c))
            .collect();
        cells.push(("growth_per_step".into(), row.growth));
        cells.push(("length".into(), row.length));
        for (name, c) in cells {
            w.write_record([
                row.epoch.to_string(),
                row.survivors.to_string(),
                name,
                c.predicted.to_string(),
                c.measured.to_string(),
                c.measured_stderr.to_string(),
                c.error.to_string(),
            ])
            .map_err(csv_err)?;
        }
    }
    w.flush()
}

pub fn write_comparison_json(out: impl Write, table: &ComparisonTable) -> io::Result<()> {
    write_json(out, table)
}
