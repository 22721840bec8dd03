//! Instance and solution files.

mod benchmark;
mod canonical;
mod generator;
mod solution_file;

pub use benchmark::{default_mloops, expected_dimensions, load_benchmark, parse_benchmark, Family};
pub use canonical::{load_canonical, parse_canonical, save_canonical, write_canonical};
pub use generator::{compute_sdr_ccr, generate_geographic, sweep, GeneratorParams, Ratio, SweepMember};
pub use solution_file::{read_solution_file, write_solution_file, SolutionFile};

use std::path::Path;

use crate::amount::Decimal;
use crate::error::{Error, Result};

/// A whitespace-separated token and the 1-based line it came from.
#[derive(Debug, Clone, Copy)]
struct Token<'a> {
    text: &'a str,
    line: usize,
}

/// Splits `text` into tokens, dropping `#` comments.
fn tokenize(text: &str) -> Vec<Token<'_>> {
    text.lines()
        .enumerate()
        .flat_map(|(idx, raw)| {
            let body = raw.split('#').next().unwrap_or("");
            body.split_whitespace().map(move |t| Token { text: t, line: idx + 1 })
        })
        .collect()
}

/// Sequential reader over tokens with parse errors that carry line numbers.
struct Cursor<'a> {
    path: &'a Path,
    tokens: Vec<Token<'a>>,
    pos: usize,
}

impl<'a> Cursor<'a> {
    fn new(path: &'a Path, text: &'a str) -> Self {
        Cursor {
            path,
            tokens: tokenize(text),
            pos: 0,
        }
    }

    fn last_line(&self) -> usize {
        self.tokens.last().map_or(1, |t| t.line)
    }

    fn next(&mut self, what: &str) -> Result<Token<'a>> {
        let tok = self
            .tokens
            .get(self.pos)
            .copied()
            .ok_or_else(|| Error::parse(self.path, self.last_line(), format!("unexpected end of file, expected {what}")))?;
        self.pos += 1;
        Ok(tok)
    }

    fn usize(&mut self, what: &str) -> Result<usize> {
        let tok = self.next(what)?;
        tok.text
            .parse()
            .map_err(|_| Error::parse(self.path, tok.line, format!("expected {what}, found `{}`", tok.text)))
    }

    fn decimal(&mut self, what: &str) -> Result<Decimal> {
        let tok = self.next(what)?;
        Decimal::parse(tok.text)
            .ok_or_else(|| Error::parse(self.path, tok.line, format!("expected {what}, found `{}`", tok.text)))
    }

    fn finish(&self) -> Result<()> {
        match self.tokens.get(self.pos) {
            None => Ok(()),
            Some(tok) => Err(Error::Structure(format!(
                "{}: line {}: unexpected trailing data `{}`",
                self.path.display(),
                tok.line,
                tok.text
            ))),
        }
    }
}

/// Decimals collected from a file, rescaled once the file's scale is known.
#[derive(Default)]
struct DecimalPool {
    scale: u32,
}

impl DecimalPool {
    fn see(&mut self, d: Decimal) -> Decimal {
        self.scale = self.scale.max(d.decimals);
        d
    }

    fn scaled(&self, d: Decimal, what: &str) -> Result<i64> {
        d.to_scaled(self.scale)
            .ok_or_else(|| Error::Structure(format!("{what} does not fit at {} decimals", self.scale)))
    }

    fn scaled_all(&self, ds: &[Decimal], what: &str) -> Result<Vec<i64>> {
        ds.iter().map(|&d| self.scaled(d, what)).collect()
    }
}
