//! Symbols, alphabets and words.
//!
//! A [`Symbol`] is an index into an [`Alphabet`]; the alphabet owns the
//! printable glyph for every index. Glyphs are single ASCII letters and are
//! kept sorted, so `a` is always id 0 when present.

use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct Symbol(u8);

impl Symbol {
    pub const fn new(id: u8) -> Self {
        Symbol(id)
    }

    pub const fn id(self) -> u8 {
        self.0
    }

    pub const fn index(self) -> usize {
        self.0 as usize
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum AlphabetError {
    #[error("alphabet is empty")]
    Empty,
    #[error("glyph {0:?} is not an ASCII letter")]
    InvalidGlyph(char),
    #[error("glyph {0:?} appears more than once")]
    DuplicateGlyph(char),
    #[error("glyph {0:?} is not in the alphabet")]
    UnknownGlyph(char),
}

/// The ordered set of glyphs a rule set is written over.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Alphabet {
    glyphs: Vec<u8>,
}

impl Alphabet {
    /// Builds an alphabet from distinct ASCII letters. The glyphs are sorted,
    /// so `Alphabet::new("ba")` and `Alphabet::new("ab")` are equal.
    pub fn new(glyphs: &str) -> Result<Self, AlphabetError> {
        let mut out = Vec::with_capacity(glyphs.len());
        for c in glyphs.chars() {
            if !c.is_ascii_alphabetic() {
                return Err(AlphabetError::InvalidGlyph(c));
            }
            if out.contains(&(c as u8)) {
                return Err(AlphabetError::DuplicateGlyph(c));
            }
            out.push(c as u8);
        }
        if out.is_empty() {
            return Err(AlphabetError::Empty);
        }
        out.sort_unstable();
        Ok(Alphabet { glyphs: out })
    }

    /// The first `size` lowercase letters.
    pub fn first_letters(size: usize) -> Result<Self, AlphabetError> {
        if size == 0 {
            return Err(AlphabetError::Empty);
        }
        if size > 26 {
            return Err(AlphabetError::InvalidGlyph(char::REPLACEMENT_CHARACTER));
        }
        Ok(Alphabet {
            glyphs: (b'a'..b'a' + size as u8).collect(),
        })
    }

    pub fn binary() -> Self {
        Alphabet {
            glyphs: vec![b'a', b'b'],
        }
    }

    pub fn len(&self) -> usize {
        self.glyphs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.glyphs.is_empty()
    }

    pub fn contains_glyph(&self, glyph: char) -> bool {
        glyph.is_ascii() && self.glyphs.contains(&(glyph as u8))
    }

    pub fn symbol(&self, glyph: char) -> Option<Symbol> {
        if !glyph.is_ascii() {
            return None;
        }
        self.glyphs
            .iter()
            .position(|&g| g == glyph as u8)
            .map(|i| Symbol(i as u8))
    }

    /// Glyph for `symbol`, or `?` if the id is out of range.
    pub fn glyph(&self, symbol: Symbol) -> char {
        self.glyphs.get(symbol.index()).map_or('?', |&g| g as char)
    }

    pub fn glyphs(&self) -> impl Iterator<Item = char> + '_ {
        self.glyphs.iter().map(|&g| g as char)
    }

    pub fn symbols(&self) -> impl Iterator<Item = Symbol> {
        (0..self.glyphs.len() as u8).map(Symbol)
    }

    pub fn contains(&self, symbol: Symbol) -> bool {
        symbol.index() < self.glyphs.len()
    }

    pub fn parse_word(&self, text: &str) -> Result<Word, AlphabetError> {
        text.chars()
            .map(|c| self.symbol(c).ok_or(AlphabetError::UnknownGlyph(c)))
            .collect::<Result<Vec<_>, _>>()
            .map(Word)
    }

    /// Renders a word with this alphabet's glyphs; the empty word renders as
    /// the empty string.
    pub fn render(&self, word: &Word) -> String {
        word.iter().map(|&s| self.glyph(s)).collect()
    }

    /// Like [`render`](Self::render) but shows the empty word as `ε`.
    pub fn render_or_epsilon(&self, word: &Word) -> String {
        if word.is_empty() {
            "ε".to_string()
        } else {
            self.render(word)
        }
    }
}

impl fmt::Display for Alphabet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for g in self.glyphs() {
            write!(f, "{g}")?;
        }
        Ok(())
    }
}

/// A finite, possibly empty, sequence of symbols.
#[derive(Debug, Clone, Default, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct Word(Vec<Symbol>);

impl Word {
    pub fn new(symbols: Vec<Symbol>) -> Self {
        Word(symbols)
    }

    pub fn empty() -> Self {
        Word(Vec::new())
    }

    pub fn from_ids(ids: &[u8]) -> Self {
        Word(ids.iter().copied().map(Symbol).collect())
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn symbols(&self) -> &[Symbol] {
        &self.0
    }

    pub fn iter(&self) -> std::slice::Iter<'_, Symbol> {
        self.0.iter()
    }

    pub fn count(&self, symbol: Symbol) -> usize {
        self.0.iter().filter(|&&s| s == symbol).count()
    }

    pub fn into_symbols(self) -> Vec<Symbol> {
        self.0
    }
}

impl From<Vec<Symbol>> for Word {
    fn from(v: Vec<Symbol>) -> Self {
        Word(v)
    }
}

impl FromIterator<Symbol> for Word {
    fn from_iter<I: IntoIterator<Item = Symbol>>(iter: I) -> Self {
        Word(iter.into_iter().collect())
    }
}

impl<'a> IntoIterator for &'a Word {
    type Item = &'a Symbol;
    type IntoIter = std::slice::Iter<'a, Symbol>;

    fn into_iter(self) -> Self::IntoIter {
        self.0.iter()
    }
}

/// Dense index of a length-n tuple over an alphabet of `base` symbols; the
/// first symbol is the most significant digit.
pub fn tuple_index(symbols: &[Symbol], base: usize) -> usize {
    symbols.iter().fold(0usize, |acc, s| acc * base + s.index())
}

/// Inverse of [`tuple_index`].
pub fn tuple_from_index(mut index: usize, n: usize, base: usize) -> Word {
    let mut out = vec![Symbol(0); n];
    for slot in out.iter_mut().rev() {
        *slot = Symbol((index % base) as u8);
        index /= base;
    }
    Word(out)
}

/// Number of distinct length-n tuples, `base^n`.
pub fn tuple_count(n: usize, base: usize) -> usize {
    base.pow(n as u32)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn alphabet_is_sorted_and_bijective() {
        let alpha = Alphabet::new("ba").unwrap();
        assert_eq!(alpha, Alphabet::binary());
        for s in alpha.symbols() {
            assert_eq!(alpha.symbol(alpha.glyph(s)), Some(s));
        }
        assert_eq!(alpha.symbol('a'), Some(Symbol::new(0)));
    }

    #[test]
    fn alphabet_rejects_bad_glyphs() {
        assert_eq!(Alphabet::new(""), Err(AlphabetError::Empty));
        assert_eq!(Alphabet::new("a1"), Err(AlphabetError::InvalidGlyph('1')));
        assert_eq!(Alphabet::new("aba"), Err(AlphabetError::DuplicateGlyph('a')));
    }

    #[test]
    fn word_parse_and_render() {
        let alpha = Alphabet::binary();
        let w = alpha.parse_word("abba").unwrap();
        assert_eq!(w, Word::from_ids(&[0, 1, 1, 0]));
        assert_eq!(alpha.render(&w), "abba");
        assert_eq!(alpha.render_or_epsilon(&Word::empty()), "ε");
        assert_eq!(alpha.parse_word("abc"), Err(AlphabetError::UnknownGlyph('c')));
    }

    #[test]
    fn tuple_index_round_trips() {
        for base in 1..4 {
            for n in 1..4 {
                for i in 0..tuple_count(n, base) {
                    let w = tuple_from_index(i, n, base);
                    assert_eq!(tuple_index(w.symbols(), base), i);
                }
            }
        }
    }
}
