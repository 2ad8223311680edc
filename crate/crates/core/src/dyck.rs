//! Labeled Dyck paths recording a sigma-stack run: each push is an up step
//! and each pop a down step, labeled with the element moved.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::cayley::{CayleyPerm, Word};
use crate::error::{Error, Result};
use crate::stack::{run_stack, Event, StackConfig};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Dir {
    U,
    D,
}

/// An unlabeled step sequence. Not necessarily a valid Dyck path; see
/// [`DyckPath::is_dyck`].
#[derive(Debug, Clone, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct DyckPath(Vec<Dir>);

impl DyckPath {
    pub fn new(steps: Vec<Dir>) -> Self {
        DyckPath(steps)
    }

    pub fn steps(&self) -> &[Dir] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    /// Height after each step.
    pub fn heights(&self) -> Vec<i64> {
        heights(&self.0)
    }

    /// Balanced and never below the axis.
    pub fn is_dyck(&self) -> bool {
        let h = self.heights();
        h.iter().all(|&x| x >= 0) && h.last().is_none_or(|&x| x == 0)
    }

    /// Mirror image in the vertical line through the midpoint: steps are
    /// read backwards with directions flipped.
    pub fn reverse(&self) -> DyckPath {
        DyckPath(
            self.0
                .iter()
                .rev()
                .map(|d| match d {
                    Dir::U => Dir::D,
                    Dir::D => Dir::U,
                })
                .collect(),
        )
    }

    /// Indices `i` with `steps[i] = D` and `steps[i + 1] = U`.
    pub fn valley_indices(&self) -> Vec<usize> {
        self.0
            .windows(2)
            .enumerate()
            .filter(|(_, w)| w[0] == Dir::D && w[1] == Dir::U)
            .map(|(i, _)| i)
            .collect()
    }

    /// Split after every return to the axis.
    pub fn returns_decomposition(&self) -> Vec<DyckPath> {
        split_at_returns(&self.0)
            .into_iter()
            .map(|r| DyckPath(self.0[r].to_vec()))
            .collect()
    }
}

pub fn reverse_path(path: &DyckPath) -> DyckPath {
    path.reverse()
}

impl fmt::Display for DyckPath {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for d in &self.0 {
            f.write_str(match d {
                Dir::U => "U",
                Dir::D => "D",
            })?;
        }
        Ok(())
    }
}

impl FromStr for DyckPath {
    type Err = Error;

    /// Accepts `U`/`D` in either case; whitespace is ignored.
    fn from_str(s: &str) -> Result<Self> {
        s.chars()
            .filter(|c| !c.is_whitespace())
            .map(|c| match c {
                'U' | 'u' => Ok(Dir::U),
                'D' | 'd' => Ok(Dir::D),
                other => Err(Error::InvalidPath(format!("unexpected step {other:?}"))),
            })
            .collect::<Result<Vec<_>>>()
            .map(DyckPath)
    }
}

fn heights(steps: &[Dir]) -> Vec<i64> {
    steps
        .iter()
        .scan(0i64, |h, d| {
            *h += if *d == Dir::U { 1 } else { -1 };
            Some(*h)
        })
        .collect()
}

fn split_at_returns(steps: &[Dir]) -> Vec<std::ops::Range<usize>> {
    let mut out = Vec::new();
    let mut start = 0;
    for (i, h) in heights(steps).into_iter().enumerate() {
        if h == 0 {
            out.push(start..i + 1);
            start = i + 1;
        }
    }
    out
}

/// For each up step, the index of its matching down step: the first later
/// down step ending one level lower. Computed with a stack of pending ups;
/// `None` if the path is unbalanced.
fn matching(steps: &[Dir]) -> Option<Vec<(usize, usize)>> {
    let mut pending = Vec::new();
    let mut pairs = Vec::with_capacity(steps.len() / 2);
    for (i, d) in steps.iter().enumerate() {
        match d {
            Dir::U => pending.push(i),
            Dir::D => pairs.push((pending.pop()?, i)),
        }
    }
    if !pending.is_empty() {
        return None;
    }
    pairs.sort_unstable();
    Some(pairs)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct LabeledStep {
    pub dir: Dir,
    pub label: u32,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Valley {
    /// Index of the down step; the up step follows at `index + 1`.
    pub index: usize,
    pub down_label: u32,
    pub up_label: u32,
}

/// A Dyck path whose matching up/down steps carry the same label.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct LabeledDyckPath {
    steps: Vec<LabeledStep>,
}

impl LabeledDyckPath {
    /// Validates balance, nonnegativity, and matching-label equality.
    pub fn new(steps: Vec<LabeledStep>) -> Result<Self> {
        let path = LabeledDyckPath { steps };
        path.validate()?;
        Ok(path)
    }

    pub fn validate(&self) -> Result<()> {
        let shape = self.shape();
        if self.steps.iter().any(|s| s.label == 0) {
            return Err(Error::InvalidPath("labels must be positive".into()));
        }
        if shape.heights().iter().any(|&h| h < 0) {
            return Err(Error::InvalidPath("path goes below the axis".into()));
        }
        let pairs = matching(shape.steps()).ok_or_else(|| Error::InvalidPath("unbalanced path".into()))?;
        if let Some(&(u, d)) = pairs.iter().find(|&&(u, d)| self.steps[u].label != self.steps[d].label) {
            return Err(Error::InvalidPath(format!(
                "up step {u} labeled {} but its matching down step {d} labeled {}",
                self.steps[u].label, self.steps[d].label
            )));
        }
        Ok(())
    }

    pub fn steps(&self) -> &[LabeledStep] {
        &self.steps
    }

    pub fn shape(&self) -> DyckPath {
        DyckPath(self.steps.iter().map(|s| s.dir).collect())
    }

    /// `(up index, down index)` for every matched pair, sorted by up index.
    pub fn matching_pairs(&self) -> Vec<(usize, usize)> {
        matching(self.shape().steps()).expect("validated path is balanced")
    }

    fn labels(&self, dir: Dir) -> Word {
        Word::from_raw(self.steps.iter().filter(|s| s.dir == dir).map(|s| s.label).collect())
    }

    pub fn up_labels(&self) -> Word {
        self.labels(Dir::U)
    }

    pub fn down_labels(&self) -> Word {
        self.labels(Dir::D)
    }

    pub fn valleys(&self) -> Vec<Valley> {
        self.shape()
            .valley_indices()
            .into_iter()
            .map(|index| Valley {
                index,
                down_label: self.steps[index].label,
                up_label: self.steps[index + 1].label,
            })
            .collect()
    }

    pub fn returns_decomposition(&self) -> Vec<LabeledDyckPath> {
        split_at_returns(&self.shape().0)
            .into_iter()
            .map(|r| LabeledDyckPath {
                steps: self.steps[r].to_vec(),
            })
            .collect()
    }

    /// Step string on the first line, then up labels, then down labels.
    pub fn to_text(&self) -> String {
        format!("{}\n{}\n{}\n", self.shape(), self.up_labels(), self.down_labels())
    }
}

/// Records the sigma-stack run on `input` as a labeled path.
pub fn encode(input: &CayleyPerm, sigma: &CayleyPerm) -> Result<LabeledDyckPath> {
    let trace = run_stack(input, &StackConfig::sigma(sigma)?);
    let steps = trace
        .events
        .iter()
        .map(|e| match *e {
            Event::Push(label) => LabeledStep { dir: Dir::U, label },
            Event::Pop(label) => LabeledStep { dir: Dir::D, label },
        })
        .collect();
    Ok(LabeledDyckPath { steps })
}
