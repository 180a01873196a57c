//! Parsers for the textual parameters accepted by configs and the CLI.

use crate::error::{Error, Result};
use crate::symbolic::TailPoint;
use crate::zeta::dyadic_grid;

/// Longest text any parser accepts.
pub const MAX_INPUT_LEN: usize = 4096;
/// Largest dyadic exponent in an s-grid (`1 + 2^{-j}` must differ from 1).
pub const MAX_DYADIC_EXPONENT: u32 = 40;
const MAX_LIST_LEN: usize = 256;
const MAX_WORD_LEN: usize = 64;

fn perr(msg: impl Into<String>) -> Error {
    Error::Parse(msg.into())
}

fn check_len(s: &str) -> Result<()> {
    if s.len() > MAX_INPUT_LEN {
        return Err(perr(format!("input of {} bytes exceeds {MAX_INPUT_LEN}", s.len())));
    }
    Ok(())
}

/// An observable as written: a linear combination of cylinder indicators,
/// or the coordinate series `Σ r^k z_k`.
#[derive(Clone, Debug, PartialEq)]
pub enum ObservableSpec {
    /// `Σ c_i 1_{[w_i]}`; letters are model labels, not yet symbols. The empty
    /// word is the whole space, so a bare number is a constant.
    Cylinders(Vec<(f64, Vec<i64>)>),
    Series(f64),
}

struct Cursor<'a> {
    s: &'a [u8],
    pos: usize,
}

impl<'a> Cursor<'a> {
    fn skip_ws(&mut self) {
        while self.pos < self.s.len() && self.s[self.pos].is_ascii_whitespace() {
            self.pos += 1;
        }
    }

    fn peek(&mut self) -> Option<u8> {
        self.skip_ws();
        self.s.get(self.pos).copied()
    }

    fn eat(&mut self, c: u8) -> bool {
        if self.peek() == Some(c) {
            self.pos += 1;
            true
        } else {
            false
        }
    }

    fn number(&mut self) -> Result<f64> {
        self.skip_ws();
        let start = self.pos;
        if matches!(self.s.get(self.pos), Some(b'+') | Some(b'-')) {
            self.pos += 1;
        }
        while self.pos < self.s.len() {
            let c = self.s[self.pos];
            let exp_sign = (c == b'+' || c == b'-') && self.pos > start && matches!(self.s[self.pos - 1], b'e' | b'E');
            if c.is_ascii_digit() || c == b'.' || c == b'e' || c == b'E' || exp_sign {
                self.pos += 1;
            } else {
                break;
            }
        }
        let text = std::str::from_utf8(&self.s[start..self.pos]).map_err(|_| perr("invalid utf-8"))?;
        let v: f64 = text.parse().map_err(|_| perr(format!("bad number `{text}` at byte {start}")))?;
        if !v.is_finite() {
            return Err(perr(format!("non-finite number `{text}`")));
        }
        Ok(v)
    }

    fn letter(&mut self) -> Result<i64> {
        self.skip_ws();
        let start = self.pos;
        if matches!(self.s.get(self.pos), Some(b'+') | Some(b'-')) {
            self.pos += 1;
        }
        let digits = self.pos;
        while self.pos < self.s.len() && self.s[self.pos].is_ascii_digit() {
            self.pos += 1;
        }
        if self.pos == digits || self.pos - digits > 9 {
            return Err(perr(format!("bad symbol at byte {start}")));
        }
        let text = std::str::from_utf8(&self.s[start..self.pos]).expect("ascii");
        Ok(text.parse().expect("at most 9 digits"))
    }

    fn word(&mut self) -> Result<Vec<i64>> {
        if !self.eat(b'[') {
            return Err(perr(format!("expected `[` at byte {}", self.pos)));
        }
        let mut w = Vec::new();
        if self.eat(b']') {
            return Ok(w);
        }
        loop {
            w.push(self.letter()?);
            if w.len() > MAX_WORD_LEN {
                return Err(perr(format!("cylinder word longer than {MAX_WORD_LEN}")));
            }
            if self.eat(b']') {
                return Ok(w);
            }
            if !self.eat(b',') {
                return Err(perr(format!("expected `,` or `]` at byte {}", self.pos)));
            }
        }
    }
}

/// Parses `[1]`, `[+1,+1]`, `0.5*[0,1] - [1]`, `2`, `0` or `series(0.5)`.
pub fn parse_observable(s: &str) -> Result<ObservableSpec> {
    check_len(s)?;
    let t = s.trim();
    if let Some(rest) = t.strip_prefix("series(") {
        let inner = rest.strip_suffix(')').ok_or_else(|| perr("unterminated `series(`"))?;
        let r: f64 = inner.trim().parse().map_err(|_| perr(format!("bad ratio `{inner}`")))?;
        if !(r > 0.0 && r < 1.0) {
            return Err(perr(format!("series ratio must lie in (0,1), got {r}")));
        }
        return Ok(ObservableSpec::Series(r));
    }
    let mut cur = Cursor { s: t.as_bytes(), pos: 0 };
    let mut terms = Vec::new();
    if cur.peek().is_none() {
        return Err(perr("empty observable (write `0` for the zero function)"));
    }
    let mut first = true;
    loop {
        let mut sign = 1.0;
        if cur.eat(b'-') {
            sign = -1.0;
        } else if !cur.eat(b'+') && !first {
            return Err(perr(format!("expected `+` or `-` at byte {}", cur.pos)));
        }
        first = false;
        let (coef, word) = match cur.peek() {
            Some(b'[') => (1.0, cur.word()?),
            Some(_) => {
                let c = cur.number()?;
                if cur.eat(b'*') {
                    (c, cur.word()?)
                } else {
                    (c, Vec::new())
                }
            }
            None => return Err(perr("dangling sign")),
        };
        if terms.len() >= MAX_LIST_LEN {
            return Err(perr(format!("more than {MAX_LIST_LEN} terms")));
        }
        if coef != 0.0 {
            terms.push((sign * coef, word));
        }
        if cur.peek().is_none() {
            break;
        }
    }
    Ok(ObservableSpec::Cylinders(terms))
}

/// `dyadic:LO..HI` (points `1 + 2^{-j}`) or a comma list of points above 1.
pub fn parse_s_grid(s: &str) -> Result<Vec<f64>> {
    check_len(s)?;
    let t = s.trim();
    let grid = if let Some(range) = t.strip_prefix("dyadic:") {
        let (lo, hi) = parse_range(range)?;
        if lo > hi || hi > MAX_DYADIC_EXPONENT as usize {
            return Err(perr(format!("dyadic exponents must satisfy lo <= hi <= {MAX_DYADIC_EXPONENT}")));
        }
        dyadic_grid(lo as u32, hi as u32)
    } else {
        let list = t.strip_prefix("list:").unwrap_or(t);
        parse_float_list(list)?
    };
    if grid.is_empty() {
        return Err(perr("empty s-grid"));
    }
    if let Some(bad) = grid.iter().find(|&&v| !(v > 1.0)) {
        return Err(perr(format!("s-grid points must exceed 1, got {bad}")));
    }
    Ok(grid)
}

fn parse_range(s: &str) -> Result<(usize, usize)> {
    let (a, b) = s.split_once("..").ok_or_else(|| perr(format!("expected LO..HI, got `{s}`")))?;
    let b = b.strip_prefix('=').unwrap_or(b);
    let lo = a.trim().parse().map_err(|_| perr(format!("bad range start `{a}`")))?;
    let hi = b.trim().parse().map_err(|_| perr(format!("bad range end `{b}`")))?;
    Ok((lo, hi))
}

/// Comma-separated finite floats.
pub fn parse_float_list(s: &str) -> Result<Vec<f64>> {
    check_len(s)?;
    let out: Vec<f64> = s
        .split(',')
        .map(|p| {
            let v: f64 = p.trim().parse().map_err(|_| perr(format!("bad number `{}`", p.trim())))?;
            if v.is_finite() {
                Ok(v)
            } else {
                Err(perr(format!("non-finite number `{}`", p.trim())))
            }
        })
        .collect::<Result<_>>()?;
    if out.len() > MAX_LIST_LEN {
        return Err(perr(format!("more than {MAX_LIST_LEN} entries")));
    }
    Ok(out)
}

/// A probability vector: at least two positive entries summing to 1 within `1e-12`.
pub fn parse_probabilities(s: &str) -> Result<Vec<f64>> {
    let p = parse_float_list(s)?;
    if p.len() < 2 {
        return Err(perr("need at least two probabilities"));
    }
    if let Some(bad) = p.iter().find(|&&v| !(v > 0.0)) {
        return Err(perr(format!("probabilities must be positive, got {bad}")));
    }
    let total: f64 = p.iter().sum();
    if (total - 1.0).abs() > 1e-12 {
        return Err(perr(format!("probabilities sum to {total}, not 1")));
    }
    Ok(p)
}

/// `4,6,8,10` or `4..10` (inclusive); entries in `1..=max`.
pub fn parse_index_list(s: &str, max: usize) -> Result<Vec<usize>> {
    check_len(s)?;
    let t = s.trim();
    let out: Vec<usize> = if t.contains("..") {
        let (lo, hi) = parse_range(t)?;
        if lo > hi || hi - lo >= MAX_LIST_LEN {
            return Err(perr(format!("bad range {lo}..{hi}")));
        }
        (lo..=hi).collect()
    } else {
        t.split(',')
            .map(|p| p.trim().parse().map_err(|_| perr(format!("bad integer `{}`", p.trim()))))
            .collect::<Result<_>>()?
    };
    if out.is_empty() || out.len() > MAX_LIST_LEN {
        return Err(perr("list must have between 1 and 256 entries"));
    }
    if let Some(bad) = out.iter().find(|&&v| v == 0 || v > max) {
        return Err(perr(format!("entry {bad} outside 1..={max}")));
    }
    Ok(out)
}

/// A preperiodic point `pre;period` (see [`TailPoint`]'s `FromStr`).
pub fn parse_tail_point(s: &str) -> Result<TailPoint> {
    check_len(s)?;
    s.trim().parse()
}
