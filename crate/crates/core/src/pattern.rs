//! Classical and Cayley-mesh pattern containment, plus class/basis tools.
//!
//! Containment is order isomorphism on subsequences: equal letters must map
//! to equal letters and strict inequalities to strict inequalities. All
//! searches are plain depth-first backtracking over index assignments.

use std::collections::{BTreeSet, HashMap};
use std::fmt;
use std::str::FromStr;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::cayley::{check_bound, generate_all, normalize, CayleyPerm};
use crate::error::{Error, Result};

/// Backtracking matcher. Calls `visit` with each occurrence (0-based,
/// strictly increasing indices) until it returns `true`. Returns whether
/// the search was stopped by `visit`.
fn search<F>(text: &[u32], pat: &[u32], anchored: bool, visit: &mut F) -> bool
where
    F: FnMut(&[usize]) -> bool,
{
    let k = pat.len();
    if k > text.len() {
        return false;
    }
    let mut idx = Vec::with_capacity(k);
    extend(text, pat, anchored, &mut idx, visit)
}

fn extend<F>(text: &[u32], pat: &[u32], anchored: bool, idx: &mut Vec<usize>, visit: &mut F) -> bool
where
    F: FnMut(&[usize]) -> bool,
{
    let u = idx.len();
    let k = pat.len();
    if u == k {
        return visit(idx);
    }
    let start = idx.last().map_or(0, |&i| i + 1);
    // leave room for the k - u - 1 letters still to place
    let end = if anchored && u == 0 { 1 } else { text.len() + u + 1 - k };
    for j in start..end {
        let fits = idx
            .iter()
            .zip(pat)
            .all(|(&i, &pv)| text[i].cmp(&text[j]) == pv.cmp(&pat[u]));
        if fits {
            idx.push(j);
            if extend(text, pat, anchored, idx, visit) {
                return true;
            }
            idx.pop();
        }
    }
    false
}

/// Containment on raw words (any positive letters).
pub fn contains_word(text: &[u32], pat: &[u32]) -> bool {
    search(text, pat, false, &mut |_| true)
}

/// Is there an occurrence of `pat` whose first letter is `text[0]`?
///
/// A stack that avoids `pat` before a push can only acquire an occurrence
/// that uses the new top, which is exactly this test.
pub fn contains_anchored(text: &[u32], pat: &[u32]) -> bool {
    !pat.is_empty() && !text.is_empty() && search(text, pat, true, &mut |_| true)
}

pub fn contains(text: &CayleyPerm, pat: &CayleyPerm) -> bool {
    if pat.max_value() > text.max_value() {
        return false;
    }
    contains_word(text.letters(), pat.letters())
}

/// Every occurrence of `pat` in `text` as 0-based index tuples, in
/// lexicographic order.
pub fn occurrences(text: &CayleyPerm, pat: &CayleyPerm) -> Vec<Vec<usize>> {
    let mut out = Vec::new();
    search(text.letters(), pat.letters(), false, &mut |idx| {
        out.push(idx.to_vec());
        false
    });
    out
}

pub fn avoids_all(text: &CayleyPerm, pats: &[CayleyPerm]) -> bool {
    pats.iter().all(|p| !contains(text, p))
}

/// A Cayley permutation `tau` with shaded regions.
///
/// * `gap_cells` hold `(i, j)`: text letters strictly between occurrence
///   positions `i` and `i + 1` (0 = before the first, `k` = after the last)
///   whose value lies strictly between the images of `j` and `j + 1`
///   (`j = 0` is unbounded below, `j = m` unbounded above).
/// * `eq_cells` hold `(i, v)`: letters in the same positional strip whose
///   value equals the image of `v`.
///
/// An occurrence counts only if every shaded region is empty.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct CayleyMeshPattern {
    tau: CayleyPerm,
    gap_cells: BTreeSet<(usize, u32)>,
    eq_cells: BTreeSet<(usize, u32)>,
}

impl CayleyMeshPattern {
    pub fn new(
        tau: CayleyPerm,
        gap_cells: impl IntoIterator<Item = (usize, u32)>,
        eq_cells: impl IntoIterator<Item = (usize, u32)>,
    ) -> Result<Self> {
        let k = tau.len();
        let m = tau.max_value();
        let gap_cells: BTreeSet<_> = gap_cells.into_iter().collect();
        let eq_cells: BTreeSet<_> = eq_cells.into_iter().collect();
        let bad = |cell: (usize, u32)| Error::MeshCell {
            cell: format!("({},{})", cell.0, cell.1),
            len: k,
            max: m,
        };
        if let Some(&c) = gap_cells.iter().find(|&&(i, j)| i > k || j > m) {
            return Err(bad(c));
        }
        if let Some(&c) = eq_cells.iter().find(|&&(i, v)| i > k || v < 1 || v > m) {
            return Err(bad(c));
        }
        Ok(CayleyMeshPattern {
            tau,
            gap_cells,
            eq_cells,
        })
    }

    /// A pattern with no shading; behaves as classical containment.
    pub fn classical(tau: CayleyPerm) -> Self {
        CayleyMeshPattern {
            tau,
            gap_cells: BTreeSet::new(),
            eq_cells: BTreeSet::new(),
        }
    }

    /// `3241` with the box above `4` between `3` and `2` shaded: the mesh
    /// form of the barred pattern `3-5bar-241`.
    pub fn west_w() -> Self {
        CayleyMeshPattern::new(CayleyPerm::from_raw(vec![3, 2, 4, 1]), [(1, 4)], []).expect("valid cells")
    }

    /// [`west_w`](Self::west_w) with the line at value `4` between `3` and
    /// `2` shaded as well, which also excludes an interposed repeat of `4`.
    pub fn cayley_z() -> Self {
        CayleyMeshPattern::new(CayleyPerm::from_raw(vec![3, 2, 4, 1]), [(1, 4)], [(1, 4)]).expect("valid cells")
    }

    pub fn tau(&self) -> &CayleyPerm {
        &self.tau
    }

    pub fn gap_cells(&self) -> &BTreeSet<(usize, u32)> {
        &self.gap_cells
    }

    pub fn eq_cells(&self) -> &BTreeSet<(usize, u32)> {
        &self.eq_cells
    }

    fn occurrence_is_clear(&self, text: &[u32], idx: &[usize]) -> bool {
        let k = idx.len();
        let m = self.tau.max_value() as usize;
        let mut image = vec![0u32; m + 1];
        for (u, &v) in self.tau.letters().iter().enumerate() {
            image[v as usize] = text[idx[u]];
        }
        let strip = |i: usize| {
            let lo = if i == 0 { 0 } else { idx[i - 1] + 1 };
            let hi = if i == k { text.len() } else { idx[i] };
            &text[lo..hi]
        };
        let gaps_clear = self.gap_cells.iter().all(|&(i, j)| {
            let j = j as usize;
            strip(i).iter().all(|&x| {
                let above = j == 0 || x > image[j];
                let below = j == m || x < image[j + 1];
                !(above && below)
            })
        });
        gaps_clear
            && self
                .eq_cells
                .iter()
                .all(|&(i, v)| strip(i).iter().all(|&x| x != image[v as usize]))
    }
}

impl fmt::Display for CayleyMeshPattern {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "tau={}", self.tau)?;
        for (i, j) in &self.gap_cells {
            write!(f, ";gap=({i},{j})")?;
        }
        for (i, v) in &self.eq_cells {
            write!(f, ";eq=({i},{v})")?;
        }
        Ok(())
    }
}

/// Parses `"tau=3 2 4 1;gap=(1,4);eq=(1,4)"`. The `tau=` segment may be
/// written without its prefix when it comes first.
impl FromStr for CayleyMeshPattern {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let err = |reason: &str| Error::Parse {
            input: s.to_string(),
            reason: reason.to_string(),
        };
        let mut tau = None;
        let mut gaps = Vec::new();
        let mut eqs = Vec::new();
        for (n, seg) in s.split(';').map(str::trim).filter(|x| !x.is_empty()).enumerate() {
            if let Some(rest) = seg.strip_prefix("gap=") {
                gaps.push(parse_cell(rest).ok_or_else(|| err("malformed gap cell"))?);
            } else if let Some(rest) = seg.strip_prefix("eq=") {
                eqs.push(parse_cell(rest).ok_or_else(|| err("malformed eq cell"))?);
            } else if let Some(rest) = seg.strip_prefix("tau=") {
                tau = Some(rest.parse::<CayleyPerm>()?);
            } else if n == 0 {
                tau = Some(seg.parse::<CayleyPerm>()?);
            } else {
                return Err(err("expected tau=, gap= or eq= segment"));
            }
        }
        let tau = tau.ok_or_else(|| err("missing tau"))?;
        CayleyMeshPattern::new(tau, gaps, eqs)
    }
}

fn parse_cell(s: &str) -> Option<(usize, u32)> {
    let inner = s.trim().strip_prefix('(')?.strip_suffix(')')?;
    let (a, b) = inner.split_once(',')?;
    Some((a.trim().parse().ok()?, b.trim().parse().ok()?))
}

pub fn contains_mesh(text: &CayleyPerm, mp: &CayleyMeshPattern) -> bool {
    let letters = text.letters();
    search(letters, mp.tau.letters(), false, &mut |idx| {
        mp.occurrence_is_clear(letters, idx)
    })
}

/// Normalized forms of all subsequences of `p`, including `p` and the empty
/// permutation.
pub fn patterns_of(p: &CayleyPerm) -> BTreeSet<CayleyPerm> {
    let letters = p.letters();
    let n = letters.len();
    assert!(n < usize::BITS as usize, "permutation too long for subset enumeration");
    (0..1usize << n)
        .map(|mask| {
            let sub: Vec<u32> = (0..n).filter(|i| mask >> i & 1 == 1).map(|i| letters[i]).collect();
            normalize(&sub)
        })
        .collect()
}

pub fn proper_patterns(p: &CayleyPerm) -> BTreeSet<CayleyPerm> {
    let mut all = patterns_of(p);
    all.remove(p);
    all
}

/// Evaluates `member` once on every permutation of length `0..=max_len`.
fn membership_table<F>(member: &F, max_len: usize) -> Result<HashMap<CayleyPerm, bool>>
where
    F: Fn(&CayleyPerm) -> bool + Sync,
{
    let mut universe = Vec::new();
    for n in 0..=max_len {
        universe.extend(generate_all(n)?);
    }
    Ok(universe
        .into_par_iter()
        .map(|p| {
            let m = member(&p);
            (p, m)
        })
        .collect())
}

/// All `(beta, alpha)` with `|beta| <= max_len`, `beta` a member, and
/// `alpha` a non-member pattern of `beta`. Empty iff the member set is
/// downward closed up to `max_len`. Sorted by `beta`, then `alpha`.
pub fn downward_closure_violations<F>(member: F, max_len: usize) -> Result<Vec<(CayleyPerm, CayleyPerm)>>
where
    F: Fn(&CayleyPerm) -> bool + Sync,
{
    check_bound(max_len, crate::cayley::census_bound())?;
    let table = membership_table(&member, max_len)?;
    let mut members: Vec<&CayleyPerm> = table.iter().filter(|(_, &m)| m).map(|(p, _)| p).collect();
    members.sort();
    let mut out = Vec::new();
    for beta in members {
        for alpha in proper_patterns(beta) {
            if !table[&alpha] {
                out.push((beta.clone(), alpha));
            }
        }
    }
    Ok(out)
}

/// Non-members all of whose proper patterns are members, in shortlex order.
/// For a class this is its basis.
pub fn minimal_non_members<F>(member: F, max_len: usize) -> Result<Vec<CayleyPerm>>
where
    F: Fn(&CayleyPerm) -> bool + Sync,
{
    check_bound(max_len, crate::cayley::census_bound())?;
    let table = membership_table(&member, max_len)?;
    let mut out: Vec<CayleyPerm> = table
        .iter()
        .filter(|(p, &m)| !m && proper_patterns(p).iter().all(|q| table[q]))
        .map(|(p, _)| p.clone())
        .collect();
    out.sort();
    Ok(out)
}
