//! Pattern-restricted stacks, the two-stack sigma-machine, and pop-stacks.
//!
//! Every machine here is right-greedy: it pushes the next input letter
//! whenever the stack, read from top to bottom, would still avoid all of its
//! forbidden patterns, and pops only when forced. Equal letters may sit on
//! each other unless a forbidden pattern says otherwise.

use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use crate::cayley::{census_bound, check_bound, generate_all, CayleyPerm, Word};
use crate::error::{Error, Result};
use crate::pattern::{contains, contains_anchored, contains_word};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PopMode {
    /// Pop one element, then re-test the push.
    Single,
    /// Every pop empties the stack.
    FlushAll,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct StackConfig {
    forbidden: Vec<CayleyPerm>,
    pop_mode: PopMode,
}

impl StackConfig {
    pub fn new(forbidden: Vec<CayleyPerm>, pop_mode: PopMode) -> Result<Self> {
        if forbidden.is_empty() {
            return Err(Error::NoForbiddenPatterns);
        }
        for p in &forbidden {
            require_pattern_len(p)?;
        }
        Ok(StackConfig { forbidden, pop_mode })
    }

    /// A sigma-stack: `{sigma}` forbidden, single pops.
    pub fn sigma(sigma: &CayleyPerm) -> Result<Self> {
        StackConfig::new(vec![sigma.clone()], PopMode::Single)
    }

    pub fn forbidden(&self) -> &[CayleyPerm] {
        &self.forbidden
    }

    pub fn pop_mode(&self) -> PopMode {
        self.pop_mode
    }
}

fn require_pattern_len(p: &CayleyPerm) -> Result<()> {
    if p.len() < 2 {
        return Err(Error::PatternTooShort {
            pattern: p.to_string(),
            len: p.len(),
            min: 2,
        });
    }
    Ok(())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(tag = "op", content = "value", rename_all = "snake_case")]
pub enum Event {
    Push(u32),
    Pop(u32),
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SortTrace {
    pub events: Vec<Event>,
    pub output: Word,
}

impl SortTrace {
    /// `PUSH v` / `POP v` lines followed by `OUTPUT: <letters>`.
    pub fn to_text(&self) -> String {
        let mut s = String::new();
        for e in &self.events {
            match e {
                Event::Push(v) => writeln!(s, "PUSH {v}"),
                Event::Pop(v) => writeln!(s, "POP {v}"),
            }
            .expect("write to string");
        }
        writeln!(s, "OUTPUT: {}", self.output).expect("write to string");
        s
    }
}

/// How push legality is decided. `Anchored` only looks for occurrences that
/// use the incoming letter, which suffices because the stack avoids every
/// forbidden pattern between events; `Naive` re-checks the whole content.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Legality {
    #[default]
    Anchored,
    Naive,
}

/// One machine event together with the stack it leaves behind.
#[derive(Debug, Clone, Copy)]
pub struct Step<'a> {
    pub event: Event,
    /// Stack content after the event, bottom first.
    pub stack: &'a [u32],
    /// For pops: whether a forbidden pattern forced it (as opposed to the
    /// final flush once the input is exhausted).
    pub forced: bool,
}

struct Restricted<'c> {
    cfg: &'c StackConfig,
    legality: Legality,
    stack: Vec<u32>,
    scratch: Vec<u32>,
}

impl Restricted<'_> {
    fn accepts(&mut self, v: u32) -> bool {
        self.scratch.clear();
        self.scratch.push(v);
        self.scratch.extend(self.stack.iter().rev());
        let top_down = &self.scratch;
        match self.legality {
            Legality::Anchored => !self
                .cfg
                .forbidden
                .iter()
                .any(|p| contains_anchored(top_down, p.letters())),
            Legality::Naive => !self.cfg.forbidden.iter().any(|p| contains_word(top_down, p.letters())),
        }
    }
}

pub fn run_stack(input: &CayleyPerm, cfg: &StackConfig) -> SortTrace {
    run_stack_word(input.letters(), cfg)
}

/// [`run_stack`] on a raw word; the machine only sees relative order.
pub fn run_stack_word(input: &[u32], cfg: &StackConfig) -> SortTrace {
    run_stack_observed(input, cfg, Legality::Anchored, |_| {})
}

/// Runs the machine, reporting every event to `observe`.
pub fn run_stack_observed<F>(input: &[u32], cfg: &StackConfig, legality: Legality, mut observe: F) -> SortTrace
where
    F: FnMut(Step<'_>),
{
    let mut m = Restricted {
        cfg,
        legality,
        stack: Vec::with_capacity(input.len()),
        scratch: Vec::with_capacity(input.len() + 1),
    };
    let mut events = Vec::with_capacity(2 * input.len());
    let mut output = Vec::with_capacity(input.len());
    let mut pop = |m: &mut Restricted<'_>, events: &mut Vec<Event>, observe: &mut F, forced: bool| {
        let v = m.stack.pop().expect("pop from nonempty stack");
        events.push(Event::Pop(v));
        output.push(v);
        observe(Step {
            event: Event::Pop(v),
            stack: &m.stack,
            forced,
        });
    };
    for &v in input {
        while !m.accepts(v) {
            pop(&mut m, &mut events, &mut observe, true);
            if cfg.pop_mode == PopMode::FlushAll {
                while !m.stack.is_empty() {
                    pop(&mut m, &mut events, &mut observe, true);
                }
            }
        }
        m.stack.push(v);
        events.push(Event::Push(v));
        observe(Step {
            event: Event::Push(v),
            stack: &m.stack,
            forced: false,
        });
    }
    while !m.stack.is_empty() {
        pop(&mut m, &mut events, &mut observe, false);
    }
    SortTrace {
        events,
        output: Word::from_raw(output),
    }
}

/// The output of the sigma-stack, `s_sigma(input)`.
pub fn s_sigma(input: &CayleyPerm, sigma: &CayleyPerm) -> Result<CayleyPerm> {
    let cfg = StackConfig::sigma(sigma)?;
    Ok(CayleyPerm::from_raw(run_stack(input, &cfg).output.into_letters()))
}

fn two_three_one() -> CayleyPerm {
    CayleyPerm::from_raw(vec![2, 3, 1])
}

/// Sortable by the sigma-machine: `s_sigma(input)` avoids `231`, so the
/// following `21`-stack can finish the job.
pub fn is_sigma_sortable(input: &CayleyPerm, sigma: &CayleyPerm) -> Result<bool> {
    Ok(!contains(&s_sigma(input, sigma)?, &two_three_one()))
}

/// Runs the sigma-stack and the `21`-stack in series, step by step.
///
/// Priority is right-greedy: feed the sigma-stack if legal, otherwise move
/// its top into the `21`-stack if legal, otherwise emit from the `21`-stack.
pub fn run_sigma_machine(input: &CayleyPerm, sigma: &CayleyPerm) -> Result<Word> {
    let first_cfg = StackConfig::sigma(sigma)?;
    let second_cfg = StackConfig::sigma(&CayleyPerm::from_raw(vec![2, 1]))?;
    let mut first = Restricted {
        cfg: &first_cfg,
        legality: Legality::Naive,
        stack: Vec::new(),
        scratch: Vec::new(),
    };
    let mut second = Restricted {
        cfg: &second_cfg,
        legality: Legality::Naive,
        stack: Vec::new(),
        scratch: Vec::new(),
    };
    let letters = input.letters();
    let mut next = 0;
    let mut output = Vec::with_capacity(letters.len());
    loop {
        if next < letters.len() && first.accepts(letters[next]) {
            first.stack.push(letters[next]);
            next += 1;
        } else if let Some(&top) = first.stack.last().filter(|&&t| second.accepts(t)) {
            first.stack.pop();
            second.stack.push(top);
        } else if let Some(v) = second.stack.pop() {
            output.push(v);
        } else {
            break;
        }
    }
    debug_assert!(next == letters.len() && first.stack.is_empty());
    Ok(Word::from_raw(output))
}

/// Sortability decided by [`run_sigma_machine`] instead of the `231` test.
pub fn is_sigma_sortable_by_machine(input: &CayleyPerm, sigma: &CayleyPerm) -> Result<bool> {
    Ok(crate::cayley::is_weakly_increasing(
        run_sigma_machine(input, sigma)?.letters(),
    ))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Popstack {
    /// `21`-restricted: letters may sit on copies of themselves.
    Hare,
    /// `{21, 11}`-restricted.
    Tortoise,
}

impl Popstack {
    pub fn config(self) -> StackConfig {
        let mut forbidden = vec![CayleyPerm::from_raw(vec![2, 1])];
        if self == Popstack::Tortoise {
            forbidden.push(CayleyPerm::from_raw(vec![1, 1]));
        }
        StackConfig::new(forbidden, PopMode::FlushAll).expect("valid pop-stack config")
    }

    pub fn name(self) -> &'static str {
        match self {
            Popstack::Hare => "hare",
            Popstack::Tortoise => "tortoise",
        }
    }
}

pub fn run_popstack(input: &CayleyPerm, kind: Popstack) -> SortTrace {
    run_stack(input, &kind.config())
}

pub fn is_popstack_sortable(input: &CayleyPerm, kind: Popstack) -> bool {
    crate::cayley::is_weakly_increasing(run_popstack(input, kind).output.letters())
}

fn split_blocks(w: &[u32], stays_in_block: impl Fn(u32, u32) -> bool) -> Vec<Word> {
    let mut blocks: Vec<Vec<u32>> = Vec::new();
    for &v in w {
        match blocks.last_mut() {
            Some(b) if stays_in_block(*b.last().expect("blocks are nonempty"), v) => b.push(v),
            _ => blocks.push(vec![v]),
        }
    }
    blocks.into_iter().map(Word::from_raw).collect()
}

/// Maximal weakly decreasing blocks.
pub fn hare_blocks(input: &CayleyPerm) -> Vec<Word> {
    split_blocks(input.letters(), |prev, v| prev >= v)
}

/// Maximal strictly decreasing blocks.
pub fn tortoise_blocks(input: &CayleyPerm) -> Vec<Word> {
    split_blocks(input.letters(), |prev, v| prev > v)
}

/// Number of preimages of `target` under `s_sigma`, by brute force over all
/// Cayley permutations of the same length.
pub fn fertility(sigma: &CayleyPerm, target: &CayleyPerm) -> Result<u64> {
    let cfg = StackConfig::sigma(sigma)?;
    check_bound(target.len(), census_bound())?;
    let mut count = 0;
    for p in generate_all(target.len())? {
        if run_stack(&p, &cfg).output.letters() == target.letters() {
            count += 1;
        }
    }
    Ok(count)
}

/// The input split at every copy of its first value.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FirstValueSplit {
    pub first: u32,
    /// One block after each copy of `first`; blocks may be empty.
    pub blocks: Vec<Word>,
}

impl FirstValueSplit {
    /// Reassembles `S(B_1) first S(B_2) first ... S(B_k) first`, with each
    /// block sorted recursively by the same rule. This recomputes the
    /// `11`-stack output without simulating the stack.
    pub fn recompose_11(&self) -> Word {
        let mut out = Vec::new();
        for b in &self.blocks {
            out.extend(s11_by_splitting(b.letters()));
            out.push(self.first);
        }
        Word::from_raw(out)
    }
}

/// Splits a nonempty input at every occurrence of its first letter.
pub fn decompose_11(input: &CayleyPerm) -> Result<FirstValueSplit> {
    split_first_value(input.letters()).ok_or(Error::EmptyInput)
}

fn split_first_value(w: &[u32]) -> Option<FirstValueSplit> {
    let (&first, rest) = w.split_first()?;
    let mut blocks = vec![Vec::new()];
    for &v in rest {
        if v == first {
            blocks.push(Vec::new());
        } else {
            blocks.last_mut().expect("at least one block").push(v);
        }
    }
    Some(FirstValueSplit {
        first,
        blocks: blocks.into_iter().map(Word::from_raw).collect(),
    })
}

fn s11_by_splitting(w: &[u32]) -> Vec<u32> {
    match split_first_value(w) {
        None => Vec::new(),
        Some(split) => split.recompose_11().into_letters(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn perm(s: &str) -> CayleyPerm {
        s.parse().unwrap()
    }

    fn out(input: &str, forbidden: &[&str], mode: PopMode) -> CayleyPerm {
        let cfg = StackConfig::new(forbidden.iter().map(|s| perm(s)).collect(), mode).unwrap();
        run_stack(&perm(input), &cfg).output.normalize()
    }

    #[test]
    fn run_stack_examples() {
        assert_eq!(out("42132", &["11"], PopMode::Single), perm("31224"));
        assert_eq!(out("123", &["21"], PopMode::Single), perm("123"));
        assert_eq!(out("1212", &["12"], PopMode::Single), perm("2211"));
        assert_eq!(out("231", &["21"], PopMode::Single), perm("213"));
    }

    #[test]
    fn config_validation() {
        assert_eq!(
            StackConfig::new(vec![], PopMode::Single),
            Err(Error::NoForbiddenPatterns)
        );
        assert!(matches!(
            StackConfig::new(vec![perm("1")], PopMode::Single),
            Err(Error::PatternTooShort { len: 1, .. })
        ));
        assert!(s_sigma(&perm("12"), &perm("1")).is_err());
        assert!(is_sigma_sortable(&perm("12"), &CayleyPerm::empty()).is_err());
    }

    #[test]
    fn trace_shape() {
        let t = run_stack(&perm("231"), &StackConfig::sigma(&perm("21")).unwrap());
        use Event::*;
        assert_eq!(t.events, vec![Push(2), Pop(2), Push(3), Push(1), Pop(1), Pop(3)]);
        assert_eq!(
            t.to_text(),
            "PUSH 2\nPOP 2\nPUSH 3\nPUSH 1\nPOP 1\nPOP 3\nOUTPUT: 2 1 3\n"
        );
    }

    #[test]
    fn s_sigma_examples() {
        assert_eq!(s_sigma(&perm("132"), &perm("11")).unwrap(), perm("231"));
        assert_eq!(s_sigma(&perm("21"), &perm("12")).unwrap(), perm("21"));
        assert_eq!(s_sigma(&perm("12"), &perm("12")).unwrap(), perm("21"));
        assert_eq!(s_sigma(&perm("3241"), &perm("21")).unwrap(), perm("2314"));
    }

    #[test]
    fn sortability_examples() {
        let cases = [
            ("132", "11", false),
            ("3132", "11", true),
            ("361425", "231", true),
            ("1324", "231", false),
            ("34241", "21", true),
            ("3241", "21", false),
        ];
        for (input, sigma, expected) in cases {
            let (p, s) = (perm(input), perm(sigma));
            assert_eq!(is_sigma_sortable(&p, &s).unwrap(), expected, "{input} / {sigma}");
            assert_eq!(
                is_sigma_sortable_by_machine(&p, &s).unwrap(),
                expected,
                "{input} / {sigma}"
            );
        }
    }

    #[test]
    fn popstack_examples() {
        let o = |s: &str, k| run_popstack(&perm(s), k).output.normalize();
        assert_eq!(o("321", Popstack::Hare), perm("123"));
        assert_eq!(o("2121", Popstack::Hare), perm("1212"));
        assert_eq!(o("211", Popstack::Tortoise), perm("121"));
        assert!(!is_popstack_sortable(&perm("2121"), Popstack::Hare));
        assert!(is_popstack_sortable(&perm("121"), Popstack::Tortoise));
        assert!(!is_popstack_sortable(&perm("211"), Popstack::Tortoise));
        assert!(run_popstack(&CayleyPerm::empty(), Popstack::Hare).events.is_empty());
    }

    #[test]
    fn block_examples() {
        let b = |blocks: Vec<Word>| blocks.iter().map(|w| w.letters().to_vec()).collect::<Vec<_>>();
        assert_eq!(b(hare_blocks(&perm("42132"))), vec![vec![4, 2, 1], vec![3, 2]]);
        assert_eq!(b(hare_blocks(&perm("123"))), vec![vec![1], vec![2], vec![3]]);
        assert_eq!(b(hare_blocks(&perm("221"))), vec![vec![2, 2, 1]]);
        assert_eq!(b(tortoise_blocks(&perm("212"))), vec![vec![2, 1], vec![2]]);
        assert_eq!(b(tortoise_blocks(&perm("11"))), vec![vec![1], vec![1]]);
        assert_eq!(b(tortoise_blocks(&perm("321"))), vec![vec![3, 2, 1]]);
        assert!(hare_blocks(&CayleyPerm::empty()).is_empty());
    }

    #[test]
    fn fertility_examples() {
        assert_eq!(fertility(&perm("12"), &perm("21")).unwrap(), 2);
        assert_eq!(fertility(&perm("12"), &perm("12")).unwrap(), 0);
        assert_eq!(fertility(&perm("11"), &perm("2113")).unwrap(), 1);
        assert!(matches!(
            fertility(&perm("11"), &"1 2 3 4 5 6 7 8 9 10 11".parse().unwrap()),
            Err(Error::ResourceBound { requested: 11, .. })
        ));
    }

    #[test]
    fn decomposition_examples() {
        let d = decompose_11(&perm("42132")).unwrap();
        assert_eq!(d.first, 4);
        assert_eq!(d.blocks, vec![Word::new(vec![2, 1, 3, 2]).unwrap()]);
        assert_eq!(d.recompose_11().letters(), &[3, 1, 2, 2, 4]);

        let d = decompose_11(&perm("11")).unwrap();
        assert_eq!(d.blocks, vec![Word::default(), Word::default()]);
        assert_eq!(d.recompose_11().letters(), &[1, 1]);

        let d = decompose_11(&perm("212")).unwrap();
        assert_eq!(d.blocks, vec![Word::new(vec![1]).unwrap(), Word::default()]);
        assert_eq!(d.recompose_11().letters(), &[1, 2, 2]);

        assert_eq!(decompose_11(&CayleyPerm::empty()), Err(Error::EmptyInput));
    }
}
