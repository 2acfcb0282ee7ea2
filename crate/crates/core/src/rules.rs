//! Production rules and the plain-text rule file format.
//!
//! A rule file has one rule per line, `<lhs> -> <rhs>`. Every left-hand side
//! has the same length n (inferred from the first rule) and the alphabet is
//! the set of glyphs appearing on the left-hand sides. An empty right-hand
//! side is the empty word; so is a lone `e` or `ε` when `e` is not a glyph of
//! the alphabet. `#` starts a comment.

use std::fmt;

use thiserror::Error;

use crate::symbol::{tuple_count, tuple_from_index, tuple_index, Alphabet, Symbol, Word};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum RuleError {
    #[error("line {line}: {message}")]
    Syntax { line: usize, message: String },
    #[error("no rule for {0}")]
    MissingRule(String),
    #[error("production of {lhs} uses undeclared symbol {symbol}")]
    ForeignSymbol { lhs: String, symbol: String },
    #[error("every production is empty")]
    AllEmpty,
    #[error("line {line}: left-hand side has length {found}, expected {expected}")]
    InconsistentLhsLength { line: usize, expected: usize, found: usize },
    #[error("duplicate rule for {0}")]
    DuplicateRule(String),
    #[error("deletion number must be at least 1")]
    ZeroDeletion,
    #[error("rule file contains no rules")]
    NoRules,
}

/// A deterministic production function `f: Σⁿ → Σ*` together with its
/// alphabet and deletion number n.
///
/// Productions are stored densely, indexed by [`tuple_index`], so a
/// constructed rule set is always total.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RuleSet {
    alphabet: Alphabet,
    n: usize,
    productions: Vec<Word>,
}

impl RuleSet {
    /// Builds a rule set from `(lhs, rhs)` pairs, checking totality, lhs
    /// length and that every symbol belongs to the alphabet.
    pub fn new<I>(alphabet: Alphabet, n: usize, rules: I) -> Result<Self, RuleError>
    where
        I: IntoIterator<Item = (Word, Word)>,
    {
        if n == 0 {
            return Err(RuleError::ZeroDeletion);
        }
        let k = alphabet.len();
        let mut table: Vec<Option<Word>> = vec![None; tuple_count(n, k)];
        for (lhs, rhs) in rules {
            if lhs.len() != n {
                return Err(RuleError::InconsistentLhsLength {
                    line: 0,
                    expected: n,
                    found: lhs.len(),
                });
            }
            let lhs_text = alphabet.render(&lhs);
            if let Some(bad) = lhs.iter().find(|s| !alphabet.contains(**s)) {
                return Err(RuleError::ForeignSymbol {
                    lhs: lhs_text,
                    symbol: format!("#{}", bad.id()),
                });
            }
            if let Some(bad) = rhs.iter().find(|s| !alphabet.contains(**s)) {
                return Err(RuleError::ForeignSymbol {
                    lhs: lhs_text,
                    symbol: format!("#{}", bad.id()),
                });
            }
            let slot = &mut table[tuple_index(lhs.symbols(), k)];
            if slot.is_some() {
                return Err(RuleError::DuplicateRule(lhs_text));
            }
            *slot = Some(rhs);
        }
        let mut productions = Vec::with_capacity(table.len());
        for (i, p) in table.into_iter().enumerate() {
            match p {
                Some(w) => productions.push(w),
                None => return Err(RuleError::MissingRule(alphabet.render(&tuple_from_index(i, n, k)))),
            }
        }
        Ok(RuleSet {
            alphabet,
            n,
            productions,
        })
    }

    /// Convenience constructor from glyph strings, e.g. `[("aa", "aab"), …]`.
    /// The alphabet is taken from the left-hand sides.
    pub fn from_glyphs(rules: &[(&str, &str)]) -> Result<Self, RuleError> {
        let text: String = rules.iter().map(|(l, r)| format!("{l} -> {r}\n")).collect();
        parse_rules_unchecked(&text)
    }

    pub fn alphabet(&self) -> &Alphabet {
        &self.alphabet
    }

    pub fn alphabet_size(&self) -> usize {
        self.alphabet.len()
    }

    /// Deletion number n.
    pub fn n(&self) -> usize {
        self.n
    }

    /// Production for the tuple `t`; `t` must have length n.
    pub fn production(&self, t: &[Symbol]) -> &Word {
        debug_assert_eq!(t.len(), self.n);
        &self.productions[tuple_index(t, self.alphabet.len())]
    }

    /// Production for the tuple with dense index `index`.
    pub fn production_at(&self, index: usize) -> &Word {
        &self.productions[index]
    }

    /// All `(lhs, rhs)` pairs in tuple-index order.
    pub fn iter(&self) -> impl Iterator<Item = (Word, &Word)> + '_ {
        let (n, k) = (self.n, self.alphabet.len());
        self.productions
            .iter()
            .enumerate()
            .map(move |(i, w)| (tuple_from_index(i, n, k), w))
    }

    pub fn productions(&self) -> &[Word] {
        &self.productions
    }

    pub fn min_production_len(&self) -> usize {
        self.productions.iter().map(Word::len).min().unwrap_or(0)
    }

    pub fn max_production_len(&self) -> usize {
        self.productions.iter().map(Word::len).max().unwrap_or(0)
    }

    /// Bounds of the per-step growth, `[min |f| − n, max |f| − n]`.
    pub fn growth_bounds(&self) -> (f64, f64) {
        (
            self.min_production_len() as f64 - self.n as f64,
            self.max_production_len() as f64 - self.n as f64,
        )
    }

    /// One-line summary such as `aa -> aab, ab -> ab, ba -> b, bb -> ba`.
    pub fn summary(&self) -> String {
        self.iter()
            .map(|(l, r)| format!("{} -> {}", self.alphabet.render(&l), self.alphabet.render_or_epsilon(r)))
            .collect::<Vec<_>>()
            .join(", ")
    }
}

impl fmt::Display for RuleSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.summary())
    }
}

/// Checks a rule set for use by the simulator and predictor.
///
/// Totality and alphabet closure are enforced by [`RuleSet::new`] and are
/// re-checked here; on top of that a rule set whose every production is
/// empty is rejected, since it cannot sustain a queue.
pub fn validate_rules(rules: &RuleSet) -> Result<(), RuleError> {
    if rules.n == 0 {
        return Err(RuleError::ZeroDeletion);
    }
    let k = rules.alphabet.len();
    if rules.productions.len() != tuple_count(rules.n, k) {
        let missing = tuple_from_index(rules.productions.len(), rules.n, k);
        return Err(RuleError::MissingRule(rules.alphabet.render(&missing)));
    }
    for (lhs, rhs) in rules.iter() {
        if let Some(bad) = rhs.iter().find(|s| !rules.alphabet.contains(**s)) {
            return Err(RuleError::ForeignSymbol {
                lhs: rules.alphabet.render(&lhs),
                symbol: format!("#{}", bad.id()),
            });
        }
    }
    if rules.productions.iter().all(Word::is_empty) {
        return Err(RuleError::AllEmpty);
    }
    Ok(())
}

struct RawRule<'a> {
    line: usize,
    lhs: &'a str,
    rhs: &'a str,
}

fn split_rule(line_no: usize, line: &str) -> Result<Option<RawRule<'_>>, RuleError> {
    let body = line.split('#').next().unwrap_or("").trim();
    if body.is_empty() {
        return Ok(None);
    }
    let (lhs, rhs) = body
        .split_once("->")
        .or_else(|| body.split_once('→'))
        .ok_or_else(|| RuleError::Syntax {
            line: line_no,
            message: format!("expected `<lhs> -> <rhs>`, found {body:?}"),
        })?;
    let (lhs, rhs) = (lhs.trim(), rhs.trim());
    if lhs.is_empty() {
        return Err(RuleError::Syntax {
            line: line_no,
            message: "empty left-hand side".into(),
        });
    }
    for (side, text) in [("left", lhs), ("right", rhs)] {
        if let Some(c) = text
            .chars()
            .find(|&c| !(c.is_ascii_alphabetic() || (side == "right" && c == 'ε')))
        {
            return Err(RuleError::Syntax {
                line: line_no,
                message: format!("{side}-hand side contains {c:?}; glyphs must be ASCII letters"),
            });
        }
    }
    Ok(Some(RawRule {
        line: line_no,
        lhs,
        rhs,
    }))
}

fn parse_rules_unchecked(text: &str) -> Result<RuleSet, RuleError> {
    let mut raw = Vec::new();
    for (i, line) in text.lines().enumerate() {
        if let Some(rule) = split_rule(i + 1, line)? {
            raw.push(rule);
        }
    }
    let first = raw.first().ok_or(RuleError::NoRules)?;
    let n = first.lhs.len();
    for r in &raw {
        if r.lhs.len() != n {
            return Err(RuleError::InconsistentLhsLength {
                line: r.line,
                expected: n,
                found: r.lhs.len(),
            });
        }
    }
    let glyphs: String = {
        let mut g: Vec<char> = raw.iter().flat_map(|r| r.lhs.chars()).collect();
        g.sort_unstable();
        g.dedup();
        g.into_iter().collect()
    };
    let alphabet = Alphabet::new(&glyphs).map_err(|e| RuleError::Syntax {
        line: first.line,
        message: e.to_string(),
    })?;
    let epsilon_literal = |rhs: &str| rhs == "ε" || (rhs == "e" && !alphabet.contains_glyph('e'));

    let mut pairs = Vec::with_capacity(raw.len());
    for r in &raw {
        let lhs = alphabet.parse_word(r.lhs).expect("lhs glyphs define the alphabet");
        let rhs = if epsilon_literal(r.rhs) {
            Word::empty()
        } else {
            let mut symbols = Vec::with_capacity(r.rhs.len());
            for c in r.rhs.chars() {
                match alphabet.symbol(c) {
                    Some(s) => symbols.push(s),
                    None => {
                        return Err(RuleError::ForeignSymbol {
                            lhs: r.lhs.to_string(),
                            symbol: c.to_string(),
                        })
                    }
                }
            }
            Word::new(symbols)
        };
        pairs.push((lhs, rhs));
    }
    RuleSet::new(alphabet, n, pairs).map_err(|e| match e {
        RuleError::DuplicateRule(lhs) => {
            let line = raw.iter().rev().find(|r| r.lhs == lhs).map_or(0, |r| r.line);
            RuleError::Syntax {
                line,
                message: format!("duplicate rule for {lhs}"),
            }
        }
        other => other,
    })
}

/// Parses a rule file and validates the result.
pub fn parse_rules(text: &str) -> Result<RuleSet, RuleError> {
    let rules = parse_rules_unchecked(text)?;
    validate_rules(&rules)?;
    Ok(rules)
}

/// Pretty-prints a rule set in the rule file format; the inverse of
/// [`parse_rules`].
pub fn format_rules(rules: &RuleSet) -> String {
    let mut out = String::new();
    for (lhs, rhs) in rules.iter() {
        let lhs = rules.alphabet.render(&lhs);
        if rhs.is_empty() {
            out.push_str(&format!("{lhs} ->\n"));
        } else {
            out.push_str(&format!("{lhs} -> {}\n", rules.alphabet.render(rhs)));
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn accepts_total_rule_set() {
        let rules = parse_rules("aa -> aab\nab -> ab\nba -> b\nbb -> ba").unwrap();
        assert_eq!(rules.n(), 2);
        assert_eq!(rules.alphabet_size(), 2);
        assert_eq!(rules.productions().len(), 4);
        let aa = rules.alphabet().parse_word("aa").unwrap();
        assert_eq!(rules.alphabet().render(rules.production(aa.symbols())), "aab");
        assert!(validate_rules(&rules).is_ok());
    }

    #[test]
    fn missing_rule_is_reported() {
        let err = parse_rules("aa -> aa\nab -> ba\nbb -> ab").unwrap_err();
        assert_eq!(err, RuleError::MissingRule("ba".into()));
        let err = parse_rules("aa -> ab\nab -> ba\nba -> aa").unwrap_err();
        assert_eq!(err, RuleError::MissingRule("bb".into()));
    }

    #[test]
    fn all_empty_is_rejected() {
        let err = parse_rules("aa ->\nab ->\nba ->\nbb ->").unwrap_err();
        assert_eq!(err, RuleError::AllEmpty);
        let unchecked = RuleSet::from_glyphs(&[("aa", ""), ("ab", ""), ("ba", ""), ("bb", "")]).unwrap();
        assert_eq!(validate_rules(&unchecked), Err(RuleError::AllEmpty));
    }

    #[test]
    fn empty_production_spellings() {
        let rules = parse_rules("aa -> aa\nab -> ba\nba ->\nbb -> ab").unwrap();
        let ba = rules.alphabet().parse_word("ba").unwrap();
        assert!(rules.production(ba.symbols()).is_empty());

        let rules = parse_rules("aa -> aa\nab -> ba\nba -> e  # literal\nbb -> ab").unwrap();
        assert!(rules.production(ba.symbols()).is_empty());

        let rules = parse_rules("aa -> aa\nab -> ba\nba -> ε\nbb -> ab").unwrap();
        assert!(rules.production(ba.symbols()).is_empty());
    }

    #[test]
    fn e_is_a_glyph_when_declared() {
        let rules = parse_rules("ee -> e\nex -> x\nxe -> ee\nxx -> ").unwrap();
        let ee = rules.alphabet().parse_word("ee").unwrap();
        assert_eq!(rules.production(ee.symbols()).len(), 1);
    }

    #[test]
    fn foreign_symbol_is_reported() {
        let err = parse_rules("aa -> abc\nab -> ab\nba -> b\nbb -> ba").unwrap_err();
        assert!(matches!(err, RuleError::ForeignSymbol { ref symbol, .. } if symbol == "c"));

        let alpha = Alphabet::binary();
        let rules = alpha
            .symbols()
            .flat_map(|x| alpha.symbols().map(move |y| Word::new(vec![x, y])))
            .map(|l| (l, Word::from_ids(&[2])));
        let err = RuleSet::new(Alphabet::binary(), 2, rules).unwrap_err();
        assert!(matches!(err, RuleError::ForeignSymbol { .. }));
    }

    #[test]
    fn syntax_and_length_errors_carry_lines() {
        let err = parse_rules("# header\naa -> a\nab : b").unwrap_err();
        assert!(matches!(err, RuleError::Syntax { line: 3, .. }));
        let err = parse_rules("aa -> a\nabb -> b").unwrap_err();
        assert_eq!(
            err,
            RuleError::InconsistentLhsLength {
                line: 2,
                expected: 2,
                found: 3
            }
        );
        let err = parse_rules("aa -> a\naa -> b\nab -> a\nba -> a\nbb -> a").unwrap_err();
        assert!(matches!(err, RuleError::Syntax { line: 2, .. }));
        assert_eq!(parse_rules("# nothing\n\n"), Err(RuleError::NoRules));
        assert!(matches!(parse_rules("a1 -> a"), Err(RuleError::Syntax { line: 1, .. })));
    }

    #[test]
    fn format_round_trips() {
        let text = "aa -> aa\nab -> ba\nba ->\nbb -> ab\n";
        let rules = parse_rules(text).unwrap();
        assert_eq!(format_rules(&rules), text);
        assert_eq!(parse_rules(&format_rules(&rules)).unwrap(), rules);
        assert_eq!(rules.summary(), "aa -> aa, ab -> ba, ba -> ε, bb -> ab");
    }

    #[test]
    fn growth_bounds() {
        let rules = parse_rules("aa -> aaa\nab -> b\nba -> a\nbb -> b").unwrap();
        assert_eq!(rules.growth_bounds(), (-1.0, 1.0));
    }
}
