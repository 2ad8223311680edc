//! Exhaustive sweeps: sortable counts, class/non-class verdicts with
//! witnesses, and checks of the structural laws of the machines.
//!
//! Sweeps shard each length by its two-letter prefixes and aggregate per
//! shard in prefix order, so results do not depend on the thread count.

use std::collections::{BTreeMap, HashSet};
use std::fmt::{self, Write as _};
use std::str::FromStr;
use std::time::{Duration, Instant};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::cayley::{
    census_bound, check_bound, fubini, generate_all, is_weakly_increasing, reverse, shard_prefixes, CayleyPerm,
    CayleyPerms,
};
use crate::dyck::{encode, Dir};
use crate::error::{Error, Result};
use crate::pattern::{avoids_all, contains, contains_mesh, proper_patterns, CayleyMeshPattern};
use crate::stack::{
    hare_blocks, is_popstack_sortable, is_sigma_sortable, run_popstack, run_stack_observed, s_sigma, tortoise_blocks,
    Event, Legality, Popstack, StackConfig,
};

fn perm(letters: &[u32]) -> CayleyPerm {
    CayleyPerm::from_raw(letters.to_vec())
}

/// A sorting device whose sortable inputs can be counted.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Machine {
    /// A sigma-stack followed by a `21`-stack.
    Sigma(CayleyPerm),
    Popstack(Popstack),
}

impl Machine {
    pub fn sigma(sigma: CayleyPerm) -> Result<Self> {
        StackConfig::sigma(&sigma)?;
        Ok(Machine::Sigma(sigma))
    }

    pub fn sorts(&self, p: &CayleyPerm) -> bool {
        match self {
            Machine::Sigma(sigma) => is_sigma_sortable(p, sigma).expect("sigma validated on construction"),
            Machine::Popstack(kind) => is_popstack_sortable(p, *kind),
        }
    }

    /// Short machine name used in report headers.
    pub fn descriptor(&self) -> String {
        self.to_string()
    }
}

impl fmt::Display for Machine {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Machine::Sigma(s) => {
                let compact = s.max_value() <= 9 && s.len() > 1;
                if compact {
                    let digits: String = s.letters().iter().map(|v| v.to_string()).collect();
                    write!(f, "sigma-machine {digits}")
                } else {
                    write!(f, "sigma-machine {s}")
                }
            }
            Machine::Popstack(k) => write!(f, "popstack {}", k.name()),
        }
    }
}

/// Accepts `sigma-machine <perm>`, `sigma <perm>`, `popstack hare`,
/// `popstack tortoise`, and the hyphenated `popstack-hare` forms.
impl FromStr for Machine {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let unknown = || Error::UnknownMachine(s.to_string());
        let trimmed = s.trim();
        let (kind, rest) = trimmed.split_once(char::is_whitespace).unwrap_or((trimmed, ""));
        let rest = rest.trim();
        match (kind, rest) {
            ("sigma-machine" | "sigma", r) if !r.is_empty() => Machine::sigma(r.parse()?),
            ("popstack" | "pop-stack", "hare") | ("popstack-hare" | "hare", "") => {
                Ok(Machine::Popstack(Popstack::Hare))
            }
            ("popstack" | "pop-stack", "tortoise") | ("popstack-tortoise" | "tortoise", "") => {
                Ok(Machine::Popstack(Popstack::Tortoise))
            }
            _ => Err(unknown()),
        }
    }
}

/// Per-length counts of sortable permutations.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SequenceReport {
    pub machine_descriptor: String,
    pub counts: BTreeMap<usize, u64>,
    /// `n -> k -> count` by number of blocks; present for the tortoise
    /// pop-stack, where `k` counts maximal strictly decreasing blocks.
    pub refined: Option<BTreeMap<usize, BTreeMap<usize, u64>>>,
    pub elapsed: Duration,
    pub universe_sizes: BTreeMap<usize, u64>,
}

impl SequenceReport {
    pub fn invariants_hold(&self) -> bool {
        let bounded = self
            .counts
            .iter()
            .all(|(n, c)| self.universe_sizes.get(n).is_some_and(|u| c <= u));
        let refined_sums = self.refined.as_ref().is_none_or(|r| {
            self.counts
                .iter()
                .all(|(n, &c)| r.get(n).map_or(0, |by_k| by_k.values().sum::<u64>()) == c)
        });
        bounded && refined_sums
    }

    pub fn sequence(&self) -> Vec<u64> {
        self.counts.values().copied().collect()
    }

    pub fn to_text(&self) -> String {
        let mut s = String::new();
        writeln!(s, "machine: {}", self.machine_descriptor).unwrap();
        writeln!(s, "{:>3} {:>12} {:>12}", "n", "count", "universe").unwrap();
        for (n, c) in &self.counts {
            writeln!(s, "{n:>3} {c:>12} {:>12}", self.universe_sizes[n]).unwrap();
        }
        if let Some(refined) = &self.refined {
            writeln!(s, "{:>3} {:>3} {:>12}", "n", "k", "refined").unwrap();
            for (n, by_k) in refined {
                for (k, c) in by_k {
                    writeln!(s, "{n:>3} {k:>3} {c:>12}").unwrap();
                }
            }
        }
        writeln!(s, "elapsed: {:.3}s", self.elapsed.as_secs_f64()).unwrap();
        s
    }

    /// `n,count` rows, or `n,count,k,refined_count` rows when refined
    /// counts are present.
    pub fn to_csv(&self) -> String {
        let mut s = String::new();
        match &self.refined {
            None => {
                s.push_str("n,count\n");
                for (n, c) in &self.counts {
                    writeln!(s, "{n},{c}").unwrap();
                }
            }
            Some(refined) => {
                s.push_str("n,count,k,refined_count\n");
                for (n, by_k) in refined {
                    for (k, r) in by_k {
                        writeln!(s, "{n},{},{k},{r}", self.counts[n]).unwrap();
                    }
                }
            }
        }
        s
    }

    /// OEIS b-file lines `n a(n)`.
    pub fn to_bfile(&self) -> String {
        self.counts.iter().map(|(n, c)| format!("{n} {c}\n")).collect()
    }
}

/// Runs `f` on a dedicated pool of `threads` workers, or on the ambient
/// pool when `threads` is 0.
fn with_threads<T: Send>(threads: usize, f: impl FnOnce() -> T + Send) -> T {
    if threads == 0 {
        f()
    } else {
        rayon::ThreadPoolBuilder::new()
            .num_threads(threads)
            .build()
            .expect("thread pool")
            .install(f)
    }
}

/// Counts the permutations of each length `1..=n_max` that `machine`
/// sorts. `threads = 0` uses the global rayon pool.
pub fn count_sortable(machine: &Machine, n_max: usize, threads: usize) -> Result<SequenceReport> {
    check_bound(n_max, census_bound())?;
    let start = Instant::now();
    let refine = matches!(machine, Machine::Popstack(Popstack::Tortoise));
    let mut counts = BTreeMap::new();
    let mut refined = BTreeMap::new();
    let mut universe_sizes = BTreeMap::new();
    with_threads(threads, || {
        for n in 1..=n_max {
            let shards: Vec<BTreeMap<usize, u64>> = shard_prefixes(n, 2)
                .par_iter()
                .map(|prefix| {
                    let mut by_blocks = BTreeMap::new();
                    for p in CayleyPerms::with_prefix(n, prefix).filter(|p| machine.sorts(p)) {
                        let k = if refine { tortoise_blocks(&p).len() } else { 0 };
                        *by_blocks.entry(k).or_insert(0u64) += 1;
                    }
                    by_blocks
                })
                .collect();
            let mut total = 0;
            let mut by_k = BTreeMap::new();
            for shard in shards {
                for (k, c) in shard {
                    total += c;
                    *by_k.entry(k).or_insert(0) += c;
                }
            }
            if refine {
                refined.insert(n, by_k);
            }
            counts.insert(n, total);
            universe_sizes.insert(n, fubini(n));
        }
    });
    Ok(SequenceReport {
        machine_descriptor: machine.descriptor(),
        counts,
        refined: refine.then_some(refined),
        elapsed: start.elapsed(),
        universe_sizes,
    })
}

/// The closed form `C(n-1, k-1) * 2^(k-1)` for tortoise-sortable
/// permutations of length `n` with `k` blocks.
pub fn tortoise_formula(n: usize, k: usize) -> u64 {
    if k == 0 || k > n {
        return 0;
    }
    let (top, choose) = (n as u64 - 1, k as u64 - 1);
    let mut binom = 1u64;
    for i in 0..choose {
        binom = binom * (top - i) / (i + 1);
    }
    binom << choose
}

/// Tortoise-sortable permutations of length `n`, grouped by their number of
/// maximal strictly decreasing blocks.
pub fn tortoise_refined(n: usize) -> Result<BTreeMap<usize, u64>> {
    check_bound(n, census_bound())?;
    let mut out = BTreeMap::new();
    for p in generate_all(n)?.filter(|p| is_popstack_sortable(p, Popstack::Tortoise)) {
        *out.entry(tortoise_blocks(&p).len()).or_insert(0) += 1;
    }
    Ok(out)
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum WitnessSource {
    /// One of the three hand-picked pairs for `11`, `21`, and `231`.
    Table,
    /// `sigma` starts with its strict minimum.
    StrictMinimum,
    /// Any other `sigma`.
    ShiftByTwo,
    /// The construction did not validate; found by exhaustive search.
    Search { construction_failure: String },
}

/// `alpha` is a pattern of `beta`, `beta` is sortable, `alpha` is not.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Witness {
    pub alpha: CayleyPerm,
    pub beta: CayleyPerm,
    pub source: WitnessSource,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ClassVerdict {
    pub sigma: CayleyPerm,
    pub predicted_is_class: bool,
    pub predicted_basis: Option<Vec<CayleyPerm>>,
    /// Longest input length compared against the prediction; 0 for a bare
    /// prediction, which then holds vacuously.
    pub checked_to_length: usize,
    pub equality_holds: bool,
    pub counterexample: Option<CayleyPerm>,
    pub witness: Option<Witness>,
}

fn require_sigma(sigma: &CayleyPerm) -> Result<()> {
    StackConfig::sigma(sigma).map(|_| ())
}

/// Predicts whether the sortable set is a class and, if so, its basis.
/// Non-classes come with a validated witness.
pub fn classify_sigma(sigma: &CayleyPerm) -> Result<ClassVerdict> {
    require_sigma(sigma)?;
    let is_12 = sigma.letters() == [1, 2];
    let predicted_is_class = is_12 || contains(&sigma.hat()?, &perm(&[2, 3, 1]));
    let predicted_basis = predicted_is_class.then(|| {
        if is_12 {
            vec![perm(&[2, 1, 3])]
        } else if contains(&sigma.reverse(), &perm(&[1, 3, 2])) {
            vec![perm(&[1, 3, 2])]
        } else {
            let mut b = vec![perm(&[1, 3, 2]), sigma.reverse()];
            b.sort();
            b.dedup();
            b
        }
    });
    let witness = if predicted_is_class {
        None
    } else {
        Some(witness_non_class(sigma)?)
    };
    Ok(ClassVerdict {
        sigma: sigma.clone(),
        predicted_is_class,
        predicted_basis,
        checked_to_length: 0,
        equality_holds: true,
        counterexample: None,
        witness,
    })
}

/// The avoidance set predicted to equal the sortable set, when one exists.
fn predicted_avoidance_set(sigma: &CayleyPerm) -> Vec<CayleyPerm> {
    if sigma.letters() == [1, 2] {
        vec![perm(&[2, 1, 3])]
    } else {
        vec![perm(&[1, 3, 2]), sigma.reverse()]
    }
}

/// [`classify_sigma`], then for predicted classes an exhaustive comparison
/// of the sortable set with the avoidance set on all lengths `<= max_len`.
pub fn verify_class(sigma: &CayleyPerm, max_len: usize) -> Result<ClassVerdict> {
    check_bound(max_len, census_bound())?;
    let mut verdict = classify_sigma(sigma)?;
    if verdict.predicted_is_class {
        let avoid = predicted_avoidance_set(sigma);
        let bad = first_failure(max_len, |p| {
            let sortable = is_sigma_sortable(p, sigma).expect("sigma validated");
            (sortable != avoids_all(p, &avoid)).then(String::new)
        })?;
        verdict.equality_holds = bad.is_none();
        verdict.counterexample = bad.map(|(p, _)| p);
    }
    verdict.checked_to_length = max_len;
    Ok(verdict)
}

fn validate_witness(sigma: &CayleyPerm, alpha: &CayleyPerm, beta: &CayleyPerm) -> std::result::Result<(), String> {
    let sortable = |p: &CayleyPerm| is_sigma_sortable(p, sigma).expect("sigma validated");
    if !contains(beta, alpha) {
        return Err(format!("{beta} does not contain {alpha}"));
    }
    if !sortable(beta) {
        return Err(format!("beta {beta} is not sortable"));
    }
    if sortable(alpha) {
        return Err(format!("alpha {alpha} is sortable"));
    }
    Ok(())
}

/// A pair `(alpha, beta)` showing the sortable set is not closed under
/// patterns. Requires `sigma != 12` and `hat(sigma)` avoiding `231`.
pub fn witness_non_class(sigma: &CayleyPerm) -> Result<Witness> {
    require_sigma(sigma)?;
    let refuse = |reason: &str| Error::WitnessPrecondition {
        sigma: sigma.to_string(),
        reason: reason.to_string(),
    };
    if sigma.letters() == [1, 2] {
        return Err(refuse("12 is sorted by a class"));
    }
    if contains(&sigma.hat()?, &perm(&[2, 3, 1])) {
        return Err(refuse("hat(sigma) contains 231"));
    }
    let s = sigma.letters();
    let table: Option<(&[u32], &[u32])> = match s {
        [1, 1] => Some((&[1, 3, 2], &[3, 1, 3, 2])),
        [2, 1] => Some((&[1, 3, 2], &[3, 5, 2, 4, 1])),
        [2, 3, 1] => Some((&[1, 3, 2, 4], &[3, 6, 1, 4, 2, 5])),
        _ => None,
    };
    let (alpha, beta, source) = match table {
        Some((a, b)) => (perm(a), perm(b), WitnessSource::Table),
        None => {
            let strict_min = s[0] == 1 && s[1..].iter().all(|&v| v >= 2);
            let mut beta = Vec::with_capacity(s.len() + 2);
            if strict_min {
                // s'_k ... s'_3 1 s'_2 s'_1 with s' = s + 1
                beta.extend(s[2..].iter().rev().map(|v| v + 1));
                beta.extend([1, s[1] + 1, s[0] + 1]);
            } else {
                // s''_k ... s''_2 1 s''_1 2 with s'' = s + 2
                beta.extend(s[1..].iter().rev().map(|v| v + 2));
                beta.extend([1, s[0] + 2, 2]);
            }
            let source = if strict_min {
                WitnessSource::StrictMinimum
            } else {
                WitnessSource::ShiftByTwo
            };
            (
                perm(&[1, 3, 2]),
                CayleyPerm::new(beta).expect("construction yields a Cayley permutation"),
                source,
            )
        }
    };
    match validate_witness(sigma, &alpha, &beta) {
        Ok(()) => Ok(Witness { alpha, beta, source }),
        Err(why) => search_witness(sigma, &beta, why),
    }
}

/// Keeps `beta` if it is sortable and some pattern of it is not; otherwise
/// searches all lengths up to `|sigma| + 3` for the shortlex-first pair.
fn search_witness(sigma: &CayleyPerm, beta: &CayleyPerm, construction_failure: String) -> Result<Witness> {
    let sortable = |p: &CayleyPerm| is_sigma_sortable(p, sigma).expect("sigma validated");
    if sortable(beta) {
        if let Some(alpha) = proper_patterns(beta).into_iter().find(|a| !sortable(a)) {
            return Ok(Witness {
                alpha,
                beta: beta.clone(),
                source: WitnessSource::Search { construction_failure },
            });
        }
    }
    let max_len = (sigma.len() + 3).min(census_bound());
    for n in 1..=max_len {
        for beta in generate_all(n)?.filter(sortable) {
            if let Some(alpha) = proper_patterns(&beta).into_iter().find(|a| !sortable(a)) {
                return Ok(Witness {
                    alpha,
                    beta,
                    source: WitnessSource::Search { construction_failure },
                });
            }
        }
    }
    Err(Error::WitnessNotFound {
        sigma: sigma.to_string(),
    })
}

/// Outcome of an exhaustive law check.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CheckReport {
    pub name: String,
    pub passed: bool,
    pub cases: u64,
    pub counterexample: Option<String>,
    /// Extra lines for display (counts, notes).
    pub details: Vec<String>,
}

impl CheckReport {
    fn new(name: impl Into<String>, cases: u64, failure: Option<String>) -> Self {
        CheckReport {
            name: name.into(),
            passed: failure.is_none(),
            cases,
            counterexample: failure,
            details: Vec::new(),
        }
    }

    fn merge(name: impl Into<String>, parts: Vec<CheckReport>) -> Self {
        let cases = parts.iter().map(|r| r.cases).sum();
        let failure = parts
            .iter()
            .find(|r| !r.passed)
            .map(|r| format!("{}: {}", r.name, r.counterexample.as_deref().unwrap_or("")));
        let mut report = CheckReport::new(name, cases, failure);
        report.details = parts.into_iter().flat_map(|r| r.details).collect();
        report
    }
}

impl fmt::Display for CheckReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.passed {
            write!(f, "PASS {} ({} cases)", self.name, self.cases)?;
        } else {
            write!(
                f,
                "FAIL {}: counterexample {}",
                self.name,
                self.counterexample.as_deref().unwrap_or("?")
            )?;
        }
        for d in &self.details {
            write!(f, "\n  {d}")?;
        }
        Ok(())
    }
}

/// The first permutation (by length, then lexicographically) of length
/// `0..=max_len` for which `fails` returns a message.
fn first_failure<F>(max_len: usize, fails: F) -> Result<Option<(CayleyPerm, String)>>
where
    F: Fn(&CayleyPerm) -> Option<String> + Sync,
{
    for n in 0..=max_len {
        let universe: Vec<CayleyPerm> = generate_all(n)?.collect();
        let hit = universe.par_iter().find_map_first(|p| fails(p).map(|m| (p.clone(), m)));
        if hit.is_some() {
            return Ok(hit);
        }
    }
    Ok(None)
}

fn universe_size(max_len: usize) -> u64 {
    (0..=max_len).map(fubini).sum()
}

fn sweep<F>(name: impl Into<String>, max_len: usize, fails: F) -> Result<CheckReport>
where
    F: Fn(&CayleyPerm) -> Option<String> + Sync,
{
    check_bound(max_len, census_bound())?;
    let failure = first_failure(max_len, fails)?.map(|(p, m)| {
        if m.is_empty() {
            p.to_string()
        } else {
            format!("{p} ({m})")
        }
    });
    Ok(CheckReport::new(name, universe_size(max_len), failure))
}

/// Every Cayley permutation of length 2 through 4 (91 patterns).
pub fn sigma_panel() -> Vec<CayleyPerm> {
    (2..=4).flat_map(|n| generate_all(n).expect("within bound")).collect()
}

/// Not sortable by the `21`-machine iff the input contains `2341` or the
/// Cayley-mesh pattern Z, checked on all lengths `<= max_len`.
pub fn verify_21_machine_mesh(max_len: usize) -> Result<CheckReport> {
    let sigma = perm(&[2, 1]);
    let z = CayleyMeshPattern::cayley_z();
    let p2341 = perm(&[2, 3, 4, 1]);
    sweep("mesh21", max_len, |p| {
        let sortable = is_sigma_sortable(p, &sigma).expect("valid sigma");
        let predicted = !(contains(p, &p2341) || contains_mesh(p, &z));
        (sortable != predicted).then(|| format!("sortable={sortable}, mesh prediction={predicted}"))
    })
}

fn first_two_equal(sigma: &CayleyPerm) -> bool {
    sigma.letters()[0] == sigma.letters()[1]
}

/// For `sigma_1 = sigma_2`: `s_sigma` is injective on each length, keeps the
/// letter multiset, and `R . s_sigma` is an involution. Otherwise: the
/// collision `s(R(sigma)) = s(R(hat sigma)) = hat sigma`.
pub fn verify_bijectivity(sigma: &CayleyPerm, max_len: usize) -> Result<CheckReport> {
    require_sigma(sigma)?;
    check_bound(max_len, census_bound())?;
    let name = format!("bijectivity sigma={sigma}");
    let s = |p: &CayleyPerm| s_sigma(p, sigma).expect("sigma validated");
    if !first_two_equal(sigma) {
        let hat = sigma.hat()?;
        let (left, right) = (s(&sigma.reverse()), s(&hat.reverse()));
        let failure = if sigma.reverse() == hat.reverse() {
            Some("inputs coincide".to_string())
        } else if left != hat || right != hat {
            Some(format!("s(R(sigma))={left}, s(R(hat))={right}, hat={hat}"))
        } else {
            None
        };
        let mut r = CheckReport::new(name, 1, failure);
        r.details.push(format!(
            "collision: s({}) = s({}) = {hat}",
            sigma.reverse(),
            hat.reverse()
        ));
        return Ok(r);
    }
    let laws = sweep(format!("{name} multiset+involution"), max_len, |p| {
        let out = s(p);
        let mut a = p.letters().to_vec();
        let mut b = out.letters().to_vec();
        a.sort_unstable();
        b.sort_unstable();
        if a != b {
            return Some(format!("multiset changed to {out}"));
        }
        let back = reverse(&s(&reverse(&out)));
        (back != *p).then(|| format!("(R.S)^2 gives {back}"))
    })?;
    let mut injective = CheckReport::new(format!("{name} injective"), 0, None);
    for n in 0..=max_len {
        let images: Vec<CayleyPerm> = generate_all(n)?.collect::<Vec<_>>().par_iter().map(s).collect();
        let distinct: HashSet<&CayleyPerm> = images.iter().collect();
        injective.cases += images.len() as u64;
        if distinct.len() != images.len() {
            injective = CheckReport::new(
                injective.name,
                injective.cases,
                Some(format!("collision at length {n}")),
            );
            break;
        }
    }
    Ok(CheckReport::merge(name, vec![laws, injective]))
}

/// `(R . s_sigma)^2` is the identity on every input of length `<= max_len`.
/// Holds exactly when `sigma_1 = sigma_2`.
pub fn verify_involution(sigma: &CayleyPerm, max_len: usize) -> Result<CheckReport> {
    require_sigma(sigma)?;
    let rs = |p: &CayleyPerm| reverse(&s_sigma(p, sigma).expect("sigma validated"));
    sweep(format!("involution sigma={sigma}"), max_len, |p| {
        let back = rs(&rs(p));
        (back != *p).then(|| format!("maps back to {back}"))
    })
}

/// The labeled-path laws for the sigma-stack run on every input of length
/// `<= max_len`: balance, nonnegativity, matching labels, heights equal
/// stack occupancy, label readouts, valleys equal triggering inputs, and,
/// when `sigma_1 = sigma_2`, equal valley labels plus the reverse-path
/// identity and the involution it implies.
pub fn verify_dyck_laws(sigma: &CayleyPerm, max_len: usize) -> Result<CheckReport> {
    let cfg = StackConfig::sigma(sigma)?;
    let twin = first_two_equal(sigma);
    sweep(format!("dyck sigma={sigma}"), max_len, |p| {
        let path = encode(p, sigma).expect("sigma validated");
        let shape = path.shape();
        let ups = shape.steps().iter().filter(|&&d| d == Dir::U).count();
        if ups != p.len() || shape.len() != 2 * p.len() {
            return Some("unbalanced".into());
        }
        if !shape.is_dyck() {
            return Some("below the axis".into());
        }
        if path.validate().is_err() {
            return Some("matching steps carry different labels".into());
        }
        let mut occupancy = Vec::new();
        let mut triggers = 0usize;
        let mut last_forced = false;
        let trace = run_stack_observed(p.letters(), &cfg, Legality::Naive, |step| {
            occupancy.push(step.stack.len() as i64);
            match step.event {
                Event::Push(_) => {
                    triggers += usize::from(last_forced);
                    last_forced = false;
                }
                Event::Pop(_) => last_forced = step.forced,
            }
        });
        if shape.heights() != occupancy {
            return Some("heights differ from stack occupancy".into());
        }
        if path.up_labels().letters() != p.letters() {
            return Some("up labels differ from input".into());
        }
        if path.down_labels() != trace.output {
            return Some("down labels differ from output".into());
        }
        let valleys = path.valleys();
        if valleys.len() != triggers {
            return Some(format!("{} valleys but {triggers} triggering inputs", valleys.len()));
        }
        if twin {
            if valleys.iter().any(|v| v.down_label != v.up_label) {
                return Some("valley labels differ".into());
            }
            let gamma = reverse(&s_sigma(p, sigma).expect("sigma validated"));
            let other = encode(&gamma, sigma).expect("sigma validated").shape();
            if shape != other.reverse() {
                return Some(format!("path {shape} is not the reverse of {other}"));
            }
            if reverse(&s_sigma(&gamma, sigma).expect("sigma validated")) != *p {
                return Some("(R.S)^2 is not the identity".into());
            }
        }
        None
    })
}

/// Machine sortability agrees with the avoidance characterization, and the
/// output is the concatenation of the reversed blocks.
pub fn verify_popstack(kind: Popstack, max_len: usize) -> Result<CheckReport> {
    let basis: Vec<CayleyPerm> = match kind {
        Popstack::Hare => vec![perm(&[2, 3, 1]), perm(&[3, 1, 2]), perm(&[2, 1, 2, 1])],
        Popstack::Tortoise => vec![perm(&[2, 3, 1]), perm(&[3, 1, 2]), perm(&[2, 2, 1]), perm(&[2, 1, 1])],
    };
    sweep(format!("popstack-{}", kind.name()), max_len, |p| {
        let output = run_popstack(p, kind).output;
        let blocks = match kind {
            Popstack::Hare => hare_blocks(p),
            Popstack::Tortoise => tortoise_blocks(p),
        };
        let by_blocks: Vec<u32> = blocks.iter().flat_map(|b| b.letters().iter().rev().copied()).collect();
        if output.letters() != by_blocks.as_slice() {
            return Some(format!("output {output} is not the reversed blocks"));
        }
        let sortable = is_weakly_increasing(output.letters());
        (sortable != avoids_all(p, &basis)).then(|| format!("sortable={sortable}"))
    })
}

pub fn verify_tortoise_count(max_len: usize, threads: usize) -> Result<CheckReport> {
    let report = count_sortable(&Machine::Popstack(Popstack::Tortoise), max_len, threads)?;
    let failure = report
        .counts
        .iter()
        .find(|(&n, &c)| c != 3u64.pow(n as u32 - 1))
        .map(|(n, c)| format!("n={n}: {c} != 3^{}", n - 1));
    let mut r = CheckReport::new("tortoise-count", report.counts.len() as u64, failure);
    r.details.push(format!("counts {}", join(&report.sequence())));
    Ok(r)
}

pub fn verify_tortoise_refined(max_len: usize) -> Result<CheckReport> {
    check_bound(max_len, census_bound())?;
    let mut cases = 0;
    let mut failure = None;
    let mut details = Vec::new();
    for n in 1..=max_len {
        let found = tortoise_refined(n)?;
        let expected: BTreeMap<usize, u64> = (1..=n).map(|k| (k, tortoise_formula(n, k))).collect();
        cases += n as u64;
        details.push(format!(
            "n={n}: {}",
            found
                .iter()
                .map(|(k, c)| format!("k{k}={c}"))
                .collect::<Vec<_>>()
                .join(" ")
        ));
        if found != expected && failure.is_none() {
            failure = Some(format!("n={n}: {found:?} != {expected:?}"));
        }
    }
    let mut r = CheckReport::new("tortoise-refined", cases, failure);
    r.details = details;
    Ok(r)
}

/// Equal counts of `11`-sortable and `231`-avoiding permutations for each
/// length, and `R . S^11 . R` maps the latter onto the former.
pub fn sort11_equinumerosity(max_len: usize) -> Result<CheckReport> {
    check_bound(max_len, census_bound())?;
    let eleven = perm(&[1, 1]);
    let p231 = perm(&[2, 3, 1]);
    let mut failure = None;
    let mut details = Vec::new();
    let mut cases = 0;
    for n in 0..=max_len {
        let universe: Vec<CayleyPerm> = generate_all(n)?.collect();
        cases += universe.len() as u64;
        let sortable: HashSet<CayleyPerm> = universe
            .par_iter()
            .filter(|p| is_sigma_sortable(p, &eleven).expect("valid sigma"))
            .cloned()
            .collect();
        let mapped: HashSet<CayleyPerm> = universe
            .par_iter()
            .filter(|p| !contains(p, &p231))
            .map(|p| reverse(&s_sigma(&reverse(p), &eleven).expect("valid sigma")))
            .collect();
        let avoiders = universe.iter().filter(|p| !contains(p, &p231)).count();
        details.push(format!("n={n}: {} sortable, {avoiders} avoid 231", sortable.len()));
        if failure.is_none() {
            if sortable.len() != avoiders {
                failure = Some(format!("n={n}: {} != {avoiders}", sortable.len()));
            } else if mapped != sortable {
                failure = Some(format!(
                    "n={n}: image of the 231-avoiders differs from the sortable set"
                ));
            }
        }
    }
    let mut r = CheckReport::new("sort11-equinum", cases, failure);
    r.details = details;
    Ok(r)
}

/// Generated counts against the Fubini recurrence.
pub fn verify_fubini(max_len: usize) -> Result<CheckReport> {
    check_bound(max_len, crate::cayley::GENERATION_BOUND)?;
    let mut counts = Vec::new();
    let mut failure = None;
    for n in 1..=max_len {
        let c = generate_all(n)?.count() as u64;
        counts.push(c);
        if c != fubini(n) && failure.is_none() {
            failure = Some(format!("n={n}: generated {c}, expected {}", fubini(n)));
        }
    }
    let mut r = CheckReport::new("fubini", max_len as u64, failure);
    r.details.push(format!("counts {}", join(&counts)));
    Ok(r)
}

/// Predicted classes checked exhaustively, predicted non-classes checked by
/// their witness, for every sigma of the panel.
pub fn classness_sweep(max_len: usize) -> Result<Vec<ClassVerdict>> {
    sigma_panel().iter().map(|s| verify_class(s, max_len)).collect()
}

fn join(values: &[u64]) -> String {
    values.iter().map(u64::to_string).collect::<Vec<_>>().join(",")
}

#[cfg(test)]
mod tests {
    use super::*;

    fn p(s: &str) -> CayleyPerm {
        s.parse().unwrap()
    }

    #[test]
    fn machine_descriptors_parse() {
        assert_eq!("sigma-machine 21".parse::<Machine>().unwrap(), Machine::Sigma(p("21")));
        assert_eq!("sigma 2 3 1".parse::<Machine>().unwrap(), Machine::Sigma(p("231")));
        assert_eq!(
            "popstack hare".parse::<Machine>().unwrap(),
            Machine::Popstack(Popstack::Hare)
        );
        assert_eq!(
            "popstack-tortoise".parse::<Machine>().unwrap(),
            Machine::Popstack(Popstack::Tortoise)
        );
        assert!("sigma-machine 1".parse::<Machine>().is_err());
        assert!("popstack rabbit".parse::<Machine>().is_err());
        for m in ["sigma-machine 21", "popstack hare", "popstack tortoise"] {
            assert_eq!(m.parse::<Machine>().unwrap().to_string(), m);
        }
    }

    #[test]
    fn small_counts() {
        let r = count_sortable(&"sigma-machine 21".parse().unwrap(), 4, 1).unwrap();
        assert_eq!(r.sequence(), vec![1, 3, 13, 73]);
        assert!(r.invariants_hold());
        assert!(r.refined.is_none());
    }

    #[test]
    fn report_emitters() {
        let r = count_sortable(&Machine::Popstack(Popstack::Tortoise), 2, 1).unwrap();
        assert_eq!(r.to_bfile(), "1 1\n2 3\n");
        assert_eq!(r.to_csv(), "n,count,k,refined_count\n1,1,1,1\n2,3,1,1\n2,3,2,2\n");
        let text = r.to_text();
        assert!(text.starts_with("machine: popstack tortoise\n"));
        let hare = count_sortable(&Machine::Popstack(Popstack::Hare), 2, 1).unwrap();
        assert_eq!(hare.to_csv(), "n,count\n1,1\n2,3\n");
    }

    #[test]
    fn census_bound_is_enforced() {
        assert!(matches!(
            count_sortable(&Machine::Popstack(Popstack::Hare), 30, 1),
            Err(Error::ResourceBound { requested: 30, .. })
        ));
    }

    #[test]
    fn tortoise_refined_examples() {
        let m = |pairs: &[(usize, u64)]| pairs.iter().copied().collect::<BTreeMap<_, _>>();
        assert_eq!(tortoise_refined(1).unwrap(), m(&[(1, 1)]));
        assert_eq!(tortoise_refined(3).unwrap(), m(&[(1, 1), (2, 4), (3, 4)]));
        assert_eq!(tortoise_refined(4).unwrap(), m(&[(1, 1), (2, 6), (3, 12), (4, 8)]));
        assert_eq!(tortoise_formula(4, 3), 12);
        assert_eq!(tortoise_formula(4, 0), 0);
        assert_eq!(tortoise_formula(4, 5), 0);
    }

    #[test]
    fn classify_examples() {
        let v = classify_sigma(&p("321")).unwrap();
        assert!(v.predicted_is_class);
        assert_eq!(v.predicted_basis, Some(vec![p("123"), p("132")]));
        let v = classify_sigma(&p("4231")).unwrap();
        assert_eq!(v.predicted_basis, Some(vec![p("132")]));
        let v = classify_sigma(&p("231")).unwrap();
        assert!(!v.predicted_is_class);
        assert!(v.witness.is_some());
        let v = classify_sigma(&p("12")).unwrap();
        assert_eq!(v.predicted_basis, Some(vec![p("213")]));
        assert!(classify_sigma(&p("1")).is_err());
    }

    #[test]
    fn witness_examples() {
        let w = witness_non_class(&p("11")).unwrap();
        assert_eq!((w.alpha, w.beta, w.source), (p("132"), p("3132"), WitnessSource::Table));
        let w = witness_non_class(&p("231")).unwrap();
        assert_eq!(
            (w.alpha, w.beta, w.source),
            (p("1324"), p("361425"), WitnessSource::Table)
        );
        // 132 is 21-sortable, so the printed row keeps its beta with a repaired alpha
        let w = witness_non_class(&p("21")).unwrap();
        assert_eq!((w.alpha, w.beta), (p("3241"), p("35241")));
        assert!(matches!(w.source, WitnessSource::Search { .. }));
        let w = witness_non_class(&p("123")).unwrap();
        assert_eq!(
            (w.alpha, w.beta, w.source),
            (p("132"), p("4132"), WitnessSource::StrictMinimum)
        );
        let w = witness_non_class(&p("122")).unwrap();
        assert_eq!(
            (w.alpha, w.beta, w.source),
            (p("132"), p("3132"), WitnessSource::StrictMinimum)
        );
        let w = witness_non_class(&p("111")).unwrap();
        assert_eq!(w.source, WitnessSource::ShiftByTwo);
        assert_eq!(w.beta, p("33132"));
        assert!(matches!(
            witness_non_class(&p("12")),
            Err(Error::WitnessPrecondition { .. })
        ));
        assert!(matches!(
            witness_non_class(&p("321")),
            Err(Error::WitnessPrecondition { .. })
        ));
    }

    #[test]
    fn verify_class_examples() {
        let v = verify_class(&p("321"), 6).unwrap();
        assert!(v.equality_holds && v.checked_to_length == 6);
        assert!(verify_class(&p("12"), 6).unwrap().equality_holds);
        let v = verify_class(&p("11"), 5).unwrap();
        let w = v.witness.unwrap();
        assert_eq!((w.alpha, w.beta), (p("132"), p("3132")));
    }

    #[test]
    fn small_law_checks_pass() {
        assert!(verify_21_machine_mesh(5).unwrap().passed);
        assert!(verify_bijectivity(&p("11"), 5).unwrap().passed);
        assert!(verify_bijectivity(&p("12"), 5).unwrap().passed);
        assert!(verify_bijectivity(&p("112"), 5).unwrap().passed);
        assert!(verify_dyck_laws(&p("11"), 5).unwrap().passed);
        assert!(verify_dyck_laws(&p("231"), 5).unwrap().passed);
        assert!(verify_involution(&p("221"), 5).unwrap().passed);
        assert!(!verify_involution(&p("21"), 3).unwrap().passed);
        assert!(verify_popstack(Popstack::Hare, 5).unwrap().passed);
        assert!(verify_popstack(Popstack::Tortoise, 5).unwrap().passed);
        assert!(sort11_equinumerosity(3).unwrap().passed);
        assert!(verify_fubini(6).unwrap().passed);
    }

    #[test]
    fn check_report_display() {
        let ok = CheckReport::new("demo", 3, None);
        assert_eq!(ok.to_string(), "PASS demo (3 cases)");
        let bad = CheckReport::new("demo", 3, Some("2 1".into()));
        assert_eq!(bad.to_string(), "FAIL demo: counterexample 2 1");
    }
}
