//! Alphabets, words, preperiodic points and the ultrametric on one-sided shift spaces.
//!
//! Points of the shift space are represented by their eventually periodic
//! expansions `preperiod · period · period · …`. Every point where the
//! library evaluates a potential is of the form `w·x` for a finite word `w`
//! and a fixed anchor `x`, so this finite description is enough and makes
//! equality of points decidable.

use std::fmt;

use crate::error::{Error, Result};

pub type Symbol = u32;

/// A finite alphabet `{0, …, size-1}` with an optional 0/1 transition matrix.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Alphabet {
    size: usize,
    transition: Option<Vec<Vec<bool>>>,
}

impl Alphabet {
    /// The full shift on `size` symbols.
    pub fn full(size: usize) -> Result<Self> {
        if size < 2 {
            return Err(Error::Domain(format!("alphabet size must be >= 2, got {size}")));
        }
        Ok(Self { size, transition: None })
    }

    /// A subshift of finite type given by a 0/1 matrix. Every row needs at least one 1.
    pub fn with_transition(matrix: Vec<Vec<u8>>) -> Result<Self> {
        let size = matrix.len();
        if size < 2 {
            return Err(Error::Domain(format!("alphabet size must be >= 2, got {size}")));
        }
        let mut rows = Vec::with_capacity(size);
        for (i, row) in matrix.iter().enumerate() {
            if row.len() != size {
                return Err(Error::Domain(format!("transition row {i} has length {}, expected {size}", row.len())));
            }
            if row.iter().any(|&v| v > 1) {
                return Err(Error::Domain(format!("transition row {i} is not 0/1")));
            }
            if row.iter().all(|&v| v == 0) {
                return Err(Error::Domain(format!("symbol {i} has no successor")));
            }
            rows.push(row.iter().map(|&v| v == 1).collect());
        }
        Ok(Self { size, transition: Some(rows) })
    }

    pub fn size(&self) -> usize {
        self.size
    }

    pub fn is_full(&self) -> bool {
        self.transition.is_none()
    }

    /// Whether `b` may follow `a`.
    pub fn allows(&self, a: Symbol, b: Symbol) -> bool {
        match &self.transition {
            None => true,
            Some(t) => t[a as usize][b as usize],
        }
    }

    pub fn symbols(&self) -> impl Iterator<Item = Symbol> {
        0..self.size as Symbol
    }

    pub fn check_symbol(&self, s: Symbol) -> Result<()> {
        if (s as usize) < self.size {
            Ok(())
        } else {
            Err(Error::Admissibility(format!("symbol {s} outside alphabet of size {}", self.size)))
        }
    }

    /// Checks symbols are in range and consecutive pairs are allowed.
    pub fn check_word(&self, symbols: &[Symbol]) -> Result<()> {
        for &s in symbols {
            self.check_symbol(s)?;
        }
        for pair in symbols.windows(2) {
            if !self.allows(pair[0], pair[1]) {
                return Err(Error::Admissibility(format!("transition {} -> {} not allowed", pair[0], pair[1])));
            }
        }
        Ok(())
    }

    pub fn is_admissible(&self, symbols: &[Symbol]) -> bool {
        self.check_word(symbols).is_ok()
    }

    /// Checks a point: preperiod, the junction into the period, and the wrap of the period.
    pub fn check_point(&self, x: &TailPoint) -> Result<()> {
        self.check_word(&x.preperiod)?;
        self.check_word(&x.period)?;
        if let Some(&last) = x.preperiod.last() {
            if !self.allows(last, x.period[0]) {
                return Err(Error::Admissibility(format!(
                    "preperiod ends in {last}, period starts with {}",
                    x.period[0]
                )));
            }
        }
        let (first, last) = (x.period[0], *x.period.last().unwrap());
        if !self.allows(last, first) {
            return Err(Error::Admissibility(format!("period does not wrap: {last} -> {first}")));
        }
        Ok(())
    }

    /// Smallest admissible periodic continuation that may follow `after`
    /// (or any continuation when `after` is `None`).
    pub fn default_tail(&self, after: Option<Symbol>) -> TailPoint {
        let start = match after {
            None => 0,
            Some(a) => self.symbols().find(|&b| self.allows(a, b)).unwrap_or(0),
        };
        // Follow the smallest successor until a symbol repeats; the cycle is the period.
        let mut path = vec![start];
        loop {
            let cur = *path.last().unwrap();
            let next = self.symbols().find(|&b| self.allows(cur, b)).unwrap_or(0);
            if let Some(pos) = path.iter().position(|&s| s == next) {
                let period = path[pos..].to_vec();
                let pre = path[..pos].to_vec();
                return TailPoint { preperiod: pre, period };
            }
            path.push(next);
        }
    }

    /// Admissible words of exactly length `n`, in lexicographic order.
    pub fn words_of_length(&self, n: usize) -> Vec<Word> {
        let mut level: Vec<Vec<Symbol>> = vec![Vec::new()];
        for _ in 0..n {
            let mut next = Vec::with_capacity(level.len() * self.size);
            for w in &level {
                for s in self.symbols() {
                    if w.last().is_none_or(|&l| self.allows(l, s)) {
                        let mut v = w.clone();
                        v.push(s);
                        next.push(v);
                    }
                }
            }
            level = next;
        }
        level.into_iter().map(Word).collect()
    }
}

/// A finite admissible word.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Default)]
pub struct Word(pub Vec<Symbol>);

impl Word {
    pub fn new(alphabet: &Alphabet, symbols: Vec<Symbol>) -> Result<Self> {
        alphabet.check_word(&symbols)?;
        Ok(Word(symbols))
    }

    pub fn empty() -> Self {
        Word(Vec::new())
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
}

impl fmt::Display for Word {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[")?;
        for (i, s) in self.0.iter().enumerate() {
            if i > 0 {
                write!(f, ",")?;
            }
            write!(f, "{s}")?;
        }
        write!(f, "]")
    }
}

/// The eventually periodic point `preperiod · period^∞`.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct TailPoint {
    preperiod: Vec<Symbol>,
    period: Vec<Symbol>,
}

impl TailPoint {
    pub fn new(preperiod: Vec<Symbol>, period: Vec<Symbol>) -> Result<Self> {
        if period.is_empty() {
            return Err(Error::Domain("period of a tail point must be non-empty".into()));
        }
        Ok(Self { preperiod, period })
    }

    /// `(s, s, s, …)`.
    pub fn constant(s: Symbol) -> Self {
        Self { preperiod: Vec::new(), period: vec![s] }
    }

    pub fn periodic(period: Vec<Symbol>) -> Result<Self> {
        Self::new(Vec::new(), period)
    }

    pub fn preperiod(&self) -> &[Symbol] {
        &self.preperiod
    }

    pub fn period(&self) -> &[Symbol] {
        &self.period
    }

    /// Coordinate `i` (0-based, so `x_{i+1}` in one-based notation).
    pub fn symbol(&self, i: usize) -> Symbol {
        if i < self.preperiod.len() {
            self.preperiod[i]
        } else {
            self.period[(i - self.preperiod.len()) % self.period.len()]
        }
    }

    /// The first `n` coordinates.
    pub fn prefix(&self, n: usize) -> Vec<Symbol> {
        (0..n).map(|i| self.symbol(i)).collect()
    }

    /// The left shift `σx`.
    pub fn shift(&self) -> TailPoint {
        if self.preperiod.is_empty() {
            let mut period = self.period.clone();
            period.rotate_left(1);
            TailPoint { preperiod: Vec::new(), period }
        } else {
            TailPoint { preperiod: self.preperiod[1..].to_vec(), period: self.period.clone() }
        }
    }

    /// `σ^n x`.
    pub fn shift_by(&self, n: usize) -> TailPoint {
        if n <= self.preperiod.len() {
            TailPoint { preperiod: self.preperiod[n..].to_vec(), period: self.period.clone() }
        } else {
            let r = (n - self.preperiod.len()) % self.period.len();
            let mut period = self.period.clone();
            period.rotate_left(r);
            TailPoint { preperiod: Vec::new(), period }
        }
    }

    /// Prepends symbols without checking admissibility.
    pub fn prepend(&self, w: &[Symbol]) -> TailPoint {
        let mut pre = Vec::with_capacity(w.len() + self.preperiod.len());
        pre.extend_from_slice(w);
        pre.extend_from_slice(&self.preperiod);
        TailPoint { preperiod: pre, period: self.period.clone() }
    }

    /// Number of leading coordinates after which both points are periodic with a common period.
    fn comparison_horizon(&self, other: &TailPoint) -> usize {
        let lcm = lcm(self.period.len(), other.period.len());
        self.preperiod.len().max(other.preperiod.len()) + lcm
    }

    /// 1-based index of the first disagreement, `None` when the points coincide.
    pub fn first_disagreement(&self, other: &TailPoint) -> Option<usize> {
        (0..self.comparison_horizon(other)).find(|&i| self.symbol(i) != other.symbol(i)).map(|i| i + 1)
    }

    /// Whether this point is the constant sequence `(s, s, …)`.
    pub fn is_constant(&self, s: Symbol) -> bool {
        self.preperiod.iter().all(|&v| v == s) && self.period.iter().all(|&v| v == s)
    }
}

impl fmt::Display for TailPoint {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let join = |v: &[Symbol]| v.iter().map(|s| s.to_string()).collect::<Vec<_>>().join(",");
        write!(f, "{};{}", join(&self.preperiod), join(&self.period))
    }
}

impl std::str::FromStr for TailPoint {
    type Err = Error;

    /// Parses `pre;period`, e.g. `1,0;0,1` or `;0`. A bare list without `;` is a period.
    fn from_str(s: &str) -> Result<Self> {
        let parse_list = |part: &str| -> Result<Vec<Symbol>> {
            let part = part.trim();
            if part.is_empty() {
                return Ok(Vec::new());
            }
            part.split(',')
                .map(|t| {
                    t.trim()
                        .parse::<Symbol>()
                        .map_err(|_| Error::Parse(format!("bad symbol `{}` in tail point", t.trim())))
                })
                .collect()
        };
        let (pre, period) = match s.split_once(';') {
            Some((a, b)) => (parse_list(a)?, parse_list(b)?),
            None => (Vec::new(), parse_list(s)?),
        };
        if period.is_empty() {
            return Err(Error::Parse(format!("tail point `{s}` has an empty period")));
        }
        TailPoint::new(pre, period)
    }
}

fn gcd(a: usize, b: usize) -> usize {
    if b == 0 {
        a
    } else {
        gcd(b, a % b)
    }
}

fn lcm(a: usize, b: usize) -> usize {
    a / gcd(a, b) * b
}

/// The point `w x`. Fails if `w` or the junction into `x` is inadmissible.
pub fn concat_point(alphabet: &Alphabet, w: &Word, x: &TailPoint) -> Result<TailPoint> {
    alphabet.check_word(w.symbols())?;
    if let Some(&last) = w.symbols().last() {
        let first = x.symbol(0);
        if !alphabet.allows(last, first) {
            return Err(Error::Admissibility(format!("word ends in {last} but the point starts with {first}")));
        }
    }
    Ok(x.prepend(w.symbols()))
}

/// `d(x, y) = alpha^{N(x,y)}` with `N` the first index of disagreement, and `d(x, x) = 0`.
pub fn metric_distance(x: &TailPoint, y: &TailPoint, alpha: f64) -> f64 {
    match x.first_disagreement(y) {
        None => 0.0,
        Some(n) => alpha.powi(n as i32),
    }
}

/// Admissible words of length `1..=max_len`, ordered by length then lexicographically.
pub fn enumerate_words(alphabet: &Alphabet, max_len: usize) -> Vec<Word> {
    let mut out = Vec::new();
    let mut level: Vec<Vec<Symbol>> = vec![Vec::new()];
    for _ in 0..max_len {
        let mut next = Vec::with_capacity(level.len() * alphabet.size());
        for w in &level {
            for s in alphabet.symbols() {
                if w.last().is_none_or(|&l| alphabet.allows(l, s)) {
                    let mut v = w.clone();
                    v.push(s);
                    next.push(v);
                }
            }
        }
        out.extend(next.iter().cloned().map(Word));
        level = next;
    }
    out
}

/// Number of admissible words of length `1..=max_len`, counted without enumerating them.
pub fn count_words(alphabet: &Alphabet, max_len: usize) -> u128 {
    let m = alphabet.size();
    // ends[s] = number of admissible words of the current length ending in s
    let mut ends = vec![1u128; m];
    let mut total = 0u128;
    for len in 1..=max_len {
        if len > 1 {
            let mut next = vec![0u128; m];
            for a in 0..m {
                for b in 0..m {
                    if alphabet.allows(a as Symbol, b as Symbol) {
                        next[b] += ends[a];
                    }
                }
            }
            ends = next;
        }
        total += ends.iter().sum::<u128>();
    }
    total
}
