//! Cayley permutations, raw words, and their exhaustive generation.
//!
//! A Cayley permutation of length `n` is a word over `1..=n` in which every
//! value from 1 up to its maximum occurs at least once. They are counted by
//! the Fubini numbers `1, 1, 3, 13, 75, 541, ...`.

use std::cmp::Ordering;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Hard ceiling on the length accepted by [`generate_all`].
pub const GENERATION_BOUND: usize = 12;

/// Default ceiling for exhaustive sweeps (census, fertility, basis search).
pub const DEFAULT_CENSUS_BOUND: usize = 8;

/// Environment variable overriding [`DEFAULT_CENSUS_BOUND`].
pub const BOUND_ENV: &str = "CAYLEY_MAX_N";

/// The census bound in effect: `CAYLEY_MAX_N` if set and parseable, else 8.
pub fn census_bound() -> usize {
    std::env::var(BOUND_ENV)
        .ok()
        .and_then(|v| v.trim().parse().ok())
        .unwrap_or(DEFAULT_CENSUS_BOUND)
}

pub(crate) fn check_bound(requested: usize, bound: usize) -> Result<()> {
    if requested > bound {
        Err(Error::ResourceBound { requested, bound })
    } else {
        Ok(())
    }
}

/// A word over the positive integers, not necessarily normalized.
#[derive(Debug, Clone, Default, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Word(Vec<u32>);

impl Word {
    pub fn new(letters: Vec<u32>) -> Result<Self> {
        if let Some(position) = letters.iter().position(|&v| v == 0) {
            return Err(Error::ZeroLetter { position });
        }
        Ok(Word(letters))
    }

    pub(crate) fn from_raw(letters: Vec<u32>) -> Self {
        debug_assert!(letters.iter().all(|&v| v >= 1));
        Word(letters)
    }

    pub fn letters(&self) -> &[u32] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn normalize(&self) -> CayleyPerm {
        normalize(&self.0)
    }

    pub fn into_letters(self) -> Vec<u32> {
        self.0
    }
}

impl fmt::Display for Word {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write_letters(f, &self.0)
    }
}

impl FromStr for Word {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Word::new(parse_letters(s)?)
    }
}

/// A normalized word: for its maximum `m`, each of `1..=m` occurs.
///
/// Ordering is shortlex (length first, then lexicographic), which is the
/// order used when listing bases and patterns.
#[derive(Debug, Clone, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(try_from = "Vec<u32>", into = "Vec<u32>")]
pub struct CayleyPerm(Vec<u32>);

impl CayleyPerm {
    pub fn new(letters: Vec<u32>) -> Result<Self> {
        if let Some(position) = letters.iter().position(|&v| v == 0) {
            return Err(Error::ZeroLetter { position });
        }
        let max = letters.iter().copied().max().unwrap_or(0);
        let mut seen = vec![false; max as usize + 1];
        for &v in &letters {
            seen[v as usize] = true;
        }
        if let Some(missing) = (1..=max).find(|&v| !seen[v as usize]) {
            return Err(Error::MissingValue { missing, max });
        }
        Ok(CayleyPerm(letters))
    }

    /// Callers guarantee the Cayley invariant.
    pub(crate) fn from_raw(letters: Vec<u32>) -> Self {
        debug_assert!(CayleyPerm::new(letters.clone()).is_ok(), "{letters:?}");
        CayleyPerm(letters)
    }

    pub fn empty() -> Self {
        CayleyPerm(Vec::new())
    }

    pub fn letters(&self) -> &[u32] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    /// Largest letter, 0 for the empty permutation.
    pub fn max_value(&self) -> u32 {
        self.0.iter().copied().max().unwrap_or(0)
    }

    pub fn to_word(&self) -> Word {
        Word(self.0.clone())
    }

    pub fn reverse(&self) -> CayleyPerm {
        reverse(self)
    }

    pub fn hat(&self) -> Result<CayleyPerm> {
        hat(self)
    }

    pub fn is_weakly_increasing(&self) -> bool {
        is_weakly_increasing(&self.0)
    }
}

impl Ord for CayleyPerm {
    fn cmp(&self, other: &Self) -> Ordering {
        self.0.len().cmp(&other.0.len()).then_with(|| self.0.cmp(&other.0))
    }
}

impl PartialOrd for CayleyPerm {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl TryFrom<Vec<u32>> for CayleyPerm {
    type Error = Error;

    fn try_from(letters: Vec<u32>) -> Result<Self> {
        CayleyPerm::new(letters)
    }
}

impl From<CayleyPerm> for Vec<u32> {
    fn from(p: CayleyPerm) -> Self {
        p.0
    }
}

impl From<CayleyPerm> for Word {
    fn from(p: CayleyPerm) -> Self {
        Word(p.0)
    }
}

impl fmt::Display for CayleyPerm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write_letters(f, &self.0)
    }
}

impl FromStr for CayleyPerm {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        CayleyPerm::new(parse_letters(s)?)
    }
}

fn write_letters(f: &mut fmt::Formatter<'_>, letters: &[u32]) -> fmt::Result {
    for (i, v) in letters.iter().enumerate() {
        if i > 0 {
            f.write_str(" ")?;
        }
        write!(f, "{v}")?;
    }
    Ok(())
}

/// Parses `"4 2 1 3 2"` or the compact digit form `"42132"`.
fn parse_letters(s: &str) -> Result<Vec<u32>> {
    let err = |reason: &str| Error::Parse {
        input: s.to_string(),
        reason: reason.to_string(),
    };
    let trimmed = s.trim();
    let tokens: Vec<&str> = trimmed.split_whitespace().collect();
    if tokens.len() == 1 && tokens[0].len() > 1 {
        // compact form, one digit per letter
        return tokens[0]
            .chars()
            .map(|c| c.to_digit(10).ok_or_else(|| err("expected decimal digits")))
            .collect();
    }
    tokens
        .iter()
        .map(|t| t.parse::<u32>().map_err(|_| err("expected positive integers")))
        .collect()
}

/// Rescales `w` onto `1..=d`, where `d` is the number of distinct letters.
pub fn normalize(w: &[u32]) -> CayleyPerm {
    let mut values: Vec<u32> = w.to_vec();
    values.sort_unstable();
    values.dedup();
    let letters = w
        .iter()
        .map(|v| values.binary_search(v).expect("value present") as u32 + 1)
        .collect();
    CayleyPerm(letters)
}

pub fn reverse(p: &CayleyPerm) -> CayleyPerm {
    CayleyPerm(p.0.iter().rev().copied().collect())
}

/// Interchanges the first two letters.
pub fn hat(p: &CayleyPerm) -> Result<CayleyPerm> {
    if p.len() < 2 {
        return Err(Error::PatternTooShort {
            pattern: p.to_string(),
            len: p.len(),
            min: 2,
        });
    }
    let mut letters = p.0.clone();
    letters.swap(0, 1);
    Ok(CayleyPerm(letters))
}

/// True iff there is no strong descent `w[i] > w[i + 1]`.
pub fn is_weakly_increasing(w: &[u32]) -> bool {
    w.windows(2).all(|pair| pair[0] <= pair[1])
}

/// Number of Cayley permutations of length `n` (ordered set partitions).
pub fn fubini(n: usize) -> u64 {
    let mut table = vec![1u64; n + 1];
    for m in 1..=n {
        let mut binom = 1u64;
        let mut total = 0u64;
        for k in 1..=m {
            binom = binom * (m - k + 1) as u64 / k as u64;
            total += binom * table[m - k];
        }
        table[m] = total;
    }
    table[n]
}

/// Streams every Cayley permutation of length `n` in lexicographic order.
pub fn generate_all(n: usize) -> Result<CayleyPerms> {
    check_bound(n, GENERATION_BOUND)?;
    Ok(CayleyPerms::with_prefix(n, &[]))
}

/// Lexicographic enumerator of Cayley permutations of a fixed length,
/// optionally restricted to those starting with a given prefix.
///
/// Letters are chosen depth-first from `1..=n`; a partial word is kept only
/// if the positions left can still fill every gap below its maximum, so the
/// walk never dead-ends.
#[derive(Debug, Clone)]
pub struct CayleyPerms {
    n: usize,
    frozen: usize,
    word: Vec<u32>,
    counts: Vec<u32>,
    distinct: usize,
    started: bool,
    done: bool,
}

impl CayleyPerms {
    /// Enumerates length-`n` permutations beginning with `prefix`. Yields
    /// nothing if no such permutation exists. No resource bound is applied.
    pub fn with_prefix(n: usize, prefix: &[u32]) -> Self {
        let mut it = CayleyPerms {
            n,
            frozen: prefix.len(),
            word: Vec::with_capacity(n),
            counts: vec![0; n + 1],
            distinct: 0,
            started: false,
            done: false,
        };
        if prefix.len() > n || !prefix_feasible(prefix, n) {
            it.done = true;
            return it;
        }
        for &v in prefix {
            it.place(v);
        }
        it.fill();
        it
    }

    fn max_value(&self) -> usize {
        (1..=self.n).rev().find(|&v| self.counts[v] > 0).unwrap_or(0)
    }

    fn place(&mut self, v: u32) {
        if self.counts[v as usize] == 0 {
            self.distinct += 1;
        }
        self.counts[v as usize] += 1;
        self.word.push(v);
    }

    fn unplace(&mut self) -> u32 {
        let v = self.word.pop().expect("nonempty");
        self.counts[v as usize] -= 1;
        if self.counts[v as usize] == 0 {
            self.distinct -= 1;
        }
        v
    }

    /// Would appending `v` leave a completable prefix?
    fn can_place(&self, v: u32) -> bool {
        let max = self.max_value().max(v as usize);
        let distinct = self.distinct + usize::from(self.counts[v as usize] == 0);
        let remaining = self.n - self.word.len() - 1;
        max - distinct <= remaining
    }

    fn fill(&mut self) {
        while self.word.len() < self.n {
            let v = (1..=self.n as u32)
                .find(|&v| self.can_place(v))
                .expect("feasible prefix always extends");
            self.place(v);
        }
    }

    fn advance(&mut self) -> bool {
        while self.word.len() > self.frozen {
            let old = self.unplace();
            if let Some(v) = (old + 1..=self.n as u32).find(|&v| self.can_place(v)) {
                self.place(v);
                self.fill();
                return true;
            }
        }
        false
    }
}

impl Iterator for CayleyPerms {
    type Item = CayleyPerm;

    fn next(&mut self) -> Option<CayleyPerm> {
        if self.done {
            return None;
        }
        if self.started && !self.advance() {
            self.done = true;
            return None;
        }
        self.started = true;
        Some(CayleyPerm(self.word.clone()))
    }
}

/// Whether some Cayley permutation of length `n` starts with `prefix`.
pub fn prefix_feasible(prefix: &[u32], n: usize) -> bool {
    if prefix.len() > n || prefix.iter().any(|&v| v == 0 || v as usize > n) {
        return false;
    }
    let max = prefix.iter().copied().max().unwrap_or(0) as usize;
    let mut seen = vec![false; max + 1];
    for &v in prefix {
        seen[v as usize] = true;
    }
    let distinct = seen.iter().filter(|&&s| s).count();
    max - distinct <= n - prefix.len()
}

/// All feasible prefixes of length `depth` for permutations of length `n`,
/// in lexicographic order. Used to shard exhaustive sweeps.
pub fn shard_prefixes(n: usize, depth: usize) -> Vec<Vec<u32>> {
    let depth = depth.min(n);
    let mut out = vec![Vec::new()];
    for _ in 0..depth {
        out = out
            .into_iter()
            .flat_map(|p| {
                (1..=n as u32).map(move |v| {
                    let mut q = p.clone();
                    q.push(v);
                    q
                })
            })
            .filter(|q| prefix_feasible(q, n))
            .collect();
    }
    out
}
