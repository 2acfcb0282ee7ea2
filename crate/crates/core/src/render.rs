//! Binary PGM pictures of a queue's evolution, one row per sampled step.

use thiserror::Error;

use crate::simulator::TraceRow;

pub const BACKGROUND: u8 = 255;
pub const EPOCH_MARKER: u8 = 64;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum RenderError {
    #[error("trace has no queue rows")]
    EmptyTrace,
    #[error("symbol id {0} has no gray level in the palette")]
    UnknownSymbol(u8),
}

/// Gray level per symbol id.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Palette {
    levels: Vec<u8>,
}

impl Palette {
    pub fn new(levels: Vec<u8>) -> Self {
        Palette { levels }
    }

    /// Symbol 0 is light gray (160) and the last symbol black, evenly spaced
    /// in between: `a` gray, `b` black for a binary alphabet.
    pub fn for_alphabet(size: usize) -> Self {
        let levels = match size {
            0 => Vec::new(),
            1 => vec![0],
            _ => (0..size).map(|k| (160 * (size - 1 - k) / (size - 1)) as u8).collect(),
        };
        Palette { levels }
    }

    pub fn level(&self, id: u8) -> Option<u8> {
        self.levels.get(id as usize).copied()
    }
}

/// Encodes the trace as a binary (`P5`) graymap. The width is the longest
/// queue in the trace; shorter rows are padded with the background.
pub fn render_evolution(rows: &[TraceRow], palette: &Palette) -> Result<Vec<u8>, RenderError> {
    let width = rows
        .iter()
        .filter_map(|r| match r {
            TraceRow::Queue(q) => Some(q.len()),
            TraceRow::EpochBoundary => None,
        })
        .max()
        .ok_or(RenderError::EmptyTrace)?
        .max(1);
    let height = rows.len();
    let header = format!("P5\n{width} {height}\n255\n");
    let mut out = Vec::with_capacity(header.len() + width * height);
    out.extend_from_slice(header.as_bytes());
    for row in rows {
        match row {
            TraceRow::Queue(q) => {
                for s in q {
                    out.push(palette.level(s.id()).ok_or(RenderError::UnknownSymbol(s.id()))?);
                }
                out.resize(out.len() + width - q.len(), BACKGROUND);
            }
            TraceRow::EpochBoundary => out.resize(out.len() + width, EPOCH_MARKER),
        }
    }
    Ok(out)
}
