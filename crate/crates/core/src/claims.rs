//! Registry of executable claims about Collatz processes and a deterministic
//! parallel range runner.
//!
//! Universal statements over infinite processes are checked on finite
//! windows; existential statements report the minimal witness or come back
//! `Inconclusive`. Nothing here is hard-coded to pass or fail.

use std::collections::hash_map::DefaultHasher;
use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::hash::{Hash, Hasher};
use std::sync::Arc;
use std::time::Instant;

use rayon::prelude::*;
use serde::Serialize;

use crate::backward::{
    backward_chain, classify_generator, process_overlap, translated_chain, BackwardPolicy,
    GeneratorVerdict,
};
use crate::cache::{order_index_memo, MemoTable};
use crate::error::{Error, Result};
use crate::nat::Nat;
use crate::primes::{
    factorize, is_prime, is_sophie_germain, primality, Primality, DEFAULT_MR_ROUNDS,
};
use crate::process::{
    log_sum_partial, order_index_with, trajectory, Limits, OrderIndex, Trajectory,
};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum PredicateKind {
    PerInteger,
    PerPrime,
    PerGenerator,
    PerPair,
    Structural,
}

impl fmt::Display for PredicateKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            PredicateKind::PerInteger => "per_integer",
            PredicateKind::PerPrime => "per_prime",
            PredicateKind::PerGenerator => "per_generator",
            PredicateKind::PerPair => "per_pair",
            PredicateKind::Structural => "structural",
        })
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct ClaimSpec {
    pub id: &'static str,
    pub statement: &'static str,
    pub policy: Option<BackwardPolicy>,
    pub kind: PredicateKind,
    pub bounded_semantics: &'static str,
}

const GREEDY: Option<BackwardPolicy> = Some(BackwardPolicy::GreedyMin);
const DOUBLING: Option<BackwardPolicy> = Some(BackwardPolicy::EvenDoubling);

static REGISTRY: [ClaimSpec; 20] = [
    ClaimSpec {
        id: "C-P3",
        statement: "every backward element of a generator is even",
        policy: GREEDY,
        kind: PredicateKind::PerGenerator,
        bounded_semantics: "backward chain of each classified generator scanned to `depth`",
    },
    ClaimSpec {
        id: "C-P4",
        statement: "a generator b != 1 never reappears in its own forward process",
        policy: GREEDY,
        kind: PredicateKind::PerGenerator,
        bounded_semantics: "first `window` forward elements searched for b",
    },
    ClaimSpec {
        id: "C-P5",
        statement: "distinct generators have distinct forward processes",
        policy: GREEDY,
        kind: PredicateKind::PerPair,
        bounded_semantics: "element sets of forward windows of length `window` compared over all generator pairs in range",
    },
    ClaimSpec {
        id: "C-P6",
        statement: "a generator b != 1 is odd",
        policy: GREEDY,
        kind: PredicateKind::PerGenerator,
        bounded_semantics: "exact parity check on each classified generator",
    },
    ClaimSpec {
        id: "C-P7",
        statement: "f(r) - 1 = 3 f(a) for even a = 2r with r odd and Omega(a) = 2",
        policy: None,
        kind: PredicateKind::PerInteger,
        bounded_semantics: "exact identity on every eligible a in range",
    },
    ClaimSpec {
        id: "C-T8",
        statement: "for primes p > 3 with p = 3 (mod 4): Ind(p) > 1 implies tau(p) > 1",
        policy: None,
        kind: PredicateKind::PerPrime,
        bounded_semantics: "order/index within `max_steps`; cap exceeded counts as inconclusive",
    },
    ClaimSpec {
        id: "C-P9",
        statement: "for convergent b: tau(b) >= 2 implies Ind(b) > 1",
        policy: None,
        kind: PredicateKind::PerInteger,
        bounded_semantics: "order/index within `max_steps`; cap exceeded counts as inconclusive",
    },
    ClaimSpec {
        id: "C-P10",
        statement: "overlapping full processes are equal and have the same generator",
        policy: GREEDY,
        kind: PredicateKind::PerPair,
        bounded_semantics: "forward windows of length `window` intersected over all generator pairs in range",
    },
    ClaimSpec {
        id: "C-P11",
        statement: "translated doubling chain of the trivial generator is 2^n - 1",
        policy: DOUBLING,
        kind: PredicateKind::Structural,
        bounded_semantics: "base 1 checked for the exact form 2^s - 1, and every base in range for c_s + 1 = 2^(s-1) (c_1 + 1), to `depth`",
    },
    ClaimSpec {
        id: "C-INDTAU",
        statement: "a convergent full process has prime generator b iff Ind(b) = tau(b) + 1",
        policy: GREEDY,
        kind: PredicateKind::PerGenerator,
        bounded_semantics: "order/index within `max_steps`; exact primality",
    },
    ClaimSpec {
        id: "C-T12",
        statement: "consecutive primes in a translated full chain form a Sophie Germain pair",
        policy: DOUBLING,
        kind: PredicateKind::Structural,
        bounded_semantics: "translated doubling chain of every base in range to `depth`; recurrence c_(s+1) = 2 c_s + 1 checked exactly",
    },
    ClaimSpec {
        id: "C-T13",
        statement: "the translated chain of a full process contains a prime",
        policy: DOUBLING,
        kind: PredicateKind::PerGenerator,
        bounded_semantics: "minimal prime index searched to `depth`; no prime within depth is inconclusive",
    },
    ClaimSpec {
        id: "C-DENSITY",
        statement: "translated full chains contain infinitely many consecutive primes with prime density tending to 1",
        policy: DOUBLING,
        kind: PredicateKind::PerGenerator,
        bounded_semantics: "finite-depth prime ratio only; never decided",
    },
    ClaimSpec {
        id: "C-MU",
        statement: "the process of a prime p = 3 (mod 4) contains n with mu(n) != 0",
        policy: None,
        kind: PredicateKind::PerPrime,
        bounded_semantics: "minimal witness searched in the first `window` forward elements",
    },
    ClaimSpec {
        id: "C-ODDPRIME",
        statement: "every full process contains an odd prime",
        policy: GREEDY,
        kind: PredicateKind::PerGenerator,
        bounded_semantics: "first `window` forward elements searched; a process that reaches 1 inside the window is complete",
    },
    ClaimSpec {
        id: "C-OMEGA",
        statement: "the generator a of a full process has Omega(a) <= 2",
        policy: GREEDY,
        kind: PredicateKind::PerGenerator,
        bounded_semantics: "exact factorization within the factoring budget",
    },
    ClaimSpec {
        id: "C-SPEED1",
        statement: "some 1 <= j < k has nu(f^j(b), f^k(b)) = 2^r",
        policy: None,
        kind: PredicateKind::PerInteger,
        bounded_semantics: "minimal (k, j) witness searched over the first `window` forward elements",
    },
    ClaimSpec {
        id: "C-SPEED2",
        statement: "some k has 2^r <= nu(f^(k+1)(b), f^k(b)) <= 2^m",
        policy: None,
        kind: PredicateKind::PerInteger,
        bounded_semantics: "minimal k with nu(f^(k+1), f^k) >= 1 searched over the first `window` forward elements",
    },
    ClaimSpec {
        id: "C-TAUFIN",
        statement: "every b has finite order",
        policy: None,
        kind: PredicateKind::PerInteger,
        bounded_semantics: "convergence within `max_steps`; cap exceeded counts as inconclusive, never divergent",
    },
    ClaimSpec {
        id: "C-SUMLOG",
        statement: "partial sums of log f^s(b) stabilize exactly when the process converges",
        policy: None,
        kind: PredicateKind::PerInteger,
        bounded_semantics: "increments checked positive before the first 1 and exactly zero for 16 terms after it",
    },
];

pub fn list_claims() -> &'static [ClaimSpec] {
    &REGISTRY
}

pub fn find_claim(id: &str) -> Option<&'static ClaimSpec> {
    REGISTRY.iter().find(|c| c.id == id)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct Budget {
    pub max_steps: u64,
    pub depth: usize,
    pub window: u64,
}

impl Default for Budget {
    fn default() -> Self {
        Budget {
            max_steps: crate::process::DEFAULT_MAX_STEPS,
            depth: 64,
            window: 10_000,
        }
    }
}

impl Budget {
    fn limits(&self) -> Limits {
        Limits::steps(self.max_steps)
    }

    fn validate(&self) -> Result<()> {
        if self.max_steps == 0 || self.depth == 0 || self.window == 0 {
            return Err(Error::InvalidArgument(
                "max_steps, depth and window must all be at least 1".into(),
            ));
        }
        Ok(())
    }
}

/// Inclusive range of inputs, `lo >= 1`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ScanRange {
    pub lo: u64,
    pub hi: u64,
}

impl ScanRange {
    pub fn new(lo: u64, hi: u64) -> Result<Self> {
        if lo > hi {
            return Err(Error::EmptyRange { lo, hi });
        }
        if lo == 0 {
            return Err(Error::Domain("ranges start at 1 or above".into()));
        }
        Ok(ScanRange { lo, hi })
    }

    pub fn len(&self) -> u64 {
        self.hi - self.lo + 1
    }

    pub fn is_empty(&self) -> bool {
        false
    }
}

impl fmt::Display for ScanRange {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}..{}", self.lo, self.hi)
    }
}

impl Serialize for ScanRange {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        use serde::ser::SerializeStruct;
        let mut st = s.serialize_struct("ScanRange", 2)?;
        st.serialize_field("lo", &Nat::from(self.lo))?;
        st.serialize_field("hi", &Nat::from(self.hi))?;
        st.end()
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
#[serde(untagged)]
pub enum CaseInput {
    Single(Nat),
    Pair(Nat, Nat),
}

impl fmt::Display for CaseInput {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CaseInput::Single(a) => write!(f, "{a}"),
            CaseInput::Pair(a, b) => write!(f, "({a}, {b})"),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Counterexample {
    pub input: CaseInput,
    pub detail: String,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(untagged)]
pub enum Stat {
    Count(u64),
    Ratio(f64),
}

impl fmt::Display for Stat {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Stat::Count(c) => write!(f, "{c}"),
            Stat::Ratio(r) => write!(f, "{r:.6}"),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Verdict {
    AllVerified,
    CounterexamplesFound,
    Inconclusive,
}

impl fmt::Display for Verdict {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Verdict::AllVerified => "all_verified",
            Verdict::CounterexamplesFound => "counterexamples_found",
            Verdict::Inconclusive => "inconclusive",
        })
    }
}

/// Outcome of one claim over one range. `elapsed` (seconds) is the only
/// field that varies between identical runs and is serialized last.
#[derive(Debug, Clone, Serialize)]
pub struct ClaimReport {
    pub id: String,
    pub range: ScanRange,
    pub budget: Budget,
    pub policy: Option<BackwardPolicy>,
    pub checked: u64,
    pub counterexamples: Vec<Counterexample>,
    pub statistics: BTreeMap<String, Stat>,
    pub verdict: Verdict,
    pub notes: Vec<String>,
    pub elapsed: f64,
}

pub const DEFAULT_MAX_LISTED: usize = 1000;
const CHUNK: u64 = 512;
const SUMLOG_TAIL: u64 = 16;

/// Per-chunk accumulator, merged in range order.
#[derive(Debug, Default)]
struct Tally {
    checked: u64,
    inconclusive: u64,
    ce_total: u64,
    listed: Vec<Counterexample>,
    counts: BTreeMap<&'static str, u64>,
    maxima: BTreeMap<&'static str, u64>,
    notes: Vec<String>,
}

impl Tally {
    fn counterexample(&mut self, cap: usize, input: CaseInput, detail: String) {
        self.ce_total += 1;
        if self.listed.len() < cap {
            self.listed.push(Counterexample { input, detail });
        }
    }

    fn bump(&mut self, key: &'static str, by: u64) {
        *self.counts.entry(key).or_default() += by;
    }

    fn max(&mut self, key: &'static str, v: u64) {
        let e = self.maxima.entry(key).or_default();
        *e = (*e).max(v);
    }

    fn merge(&mut self, other: Tally, cap: usize) {
        self.checked += other.checked;
        self.inconclusive += other.inconclusive;
        self.ce_total += other.ce_total;
        let room = cap.saturating_sub(self.listed.len());
        self.listed.extend(other.listed.into_iter().take(room));
        for (k, v) in other.counts {
            self.bump(k, v);
        }
        for (k, v) in other.maxima {
            self.max(k, v);
        }
        self.notes.extend(other.notes);
    }
}

enum Eligibility {
    Generator,
    NotGenerator,
    Undecided,
}

/// Runs claims with a fixed budget on the current rayon pool.
#[derive(Debug, Clone)]
pub struct Runner {
    pub budget: Budget,
    pub memo: Option<Arc<MemoTable>>,
    /// Counterexamples listed per report; totals are always counted in full.
    pub max_listed: usize,
}

impl Default for Runner {
    fn default() -> Self {
        Runner::new(Budget::default())
    }
}

pub fn run_claim(id: &str, range: ScanRange, budget: Budget) -> Result<ClaimReport> {
    Runner::new(budget).run_claim(id, range)
}

pub fn run_all(range: ScanRange, budget: Budget) -> Result<Vec<ClaimReport>> {
    Runner::new(budget).run_all(range)
}

impl Runner {
    pub fn new(budget: Budget) -> Self {
        Runner {
            budget,
            memo: None,
            max_listed: DEFAULT_MAX_LISTED,
        }
    }

    pub fn with_memo(mut self, memo: Arc<MemoTable>) -> Self {
        self.memo = Some(memo);
        self
    }

    fn cap(&self) -> usize {
        self.max_listed.max(1)
    }

    pub fn run_all(&self, range: ScanRange) -> Result<Vec<ClaimReport>> {
        let mut ids: Vec<&str> = REGISTRY.iter().map(|c| c.id).collect();
        ids.sort_unstable();
        ids.into_iter()
            .map(|id| self.run_claim(id, range))
            .collect()
    }

    pub fn run_claim(&self, id: &str, range: ScanRange) -> Result<ClaimReport> {
        let spec = find_claim(id).ok_or_else(|| Error::UnknownClaim(id.to_owned()))?;
        self.budget.validate()?;
        let started = Instant::now();
        let mut extra: BTreeMap<String, Stat> = BTreeMap::new();
        let mut notes: Vec<String> = Vec::new();
        let mut force_inconclusive = false;
        let tally = match spec.id {
            "C-P3" => self.claim_p3(range),
            "C-P4" => self.claim_p4(range),
            "C-P5" => self.claim_p5(range),
            "C-P6" => self.claim_p6(range),
            "C-P7" => self.claim_p7(range),
            "C-T8" => self.claim_t8(range),
            "C-P9" => self.claim_p9(range),
            "C-P10" => self.claim_p10(range),
            "C-P11" => self.claim_p11(range),
            "C-INDTAU" => {
                notes.push(
                    "every classified generator is a multiple of 3, so b = 3 is the only prime \
                     generator and the prime side of the equivalence rests on it alone"
                        .into(),
                );
                self.claim_indtau(range)
            }
            "C-T12" => self.claim_t12(range),
            "C-T13" => self.claim_t13(range),
            "C-DENSITY" => {
                force_inconclusive = true;
                notes.push(
                    "finite-depth approximant of the density; the limiting value is never decided"
                        .into(),
                );
                self.claim_density(range, &mut extra)
            }
            "C-MU" => self.claim_mu(range),
            "C-ODDPRIME" => self.claim_oddprime(range),
            "C-OMEGA" => self.claim_omega(range),
            "C-SPEED1" => self.claim_speed1(range),
            "C-SPEED2" => {
                notes.push(
                    "with r and m free, any nu >= 1 lies between two powers of two; reported \
                     witness is the least k with nu(f^(k+1), f^k) >= 1, bracketed by \
                     r = floor(log2 nu) and m = ceil(log2 nu)"
                        .into(),
                );
                self.claim_speed2(range)
            }
            "C-TAUFIN" => self.claim_taufin(range),
            "C-SUMLOG" => self.claim_sumlog(range),
            other => unreachable!("registered claim {other} has no evaluator"),
        };

        let mut statistics: BTreeMap<String, Stat> = tally
            .counts
            .iter()
            .chain(tally.maxima.iter())
            .map(|(k, v)| ((*k).to_owned(), Stat::Count(*v)))
            .collect();
        statistics.extend(extra);
        statistics.insert("counterexamples_total".into(), Stat::Count(tally.ce_total));
        statistics.insert("inconclusive".into(), Stat::Count(tally.inconclusive));
        if tally.ce_total as usize > tally.listed.len() {
            notes.push(format!(
                "{} counterexamples found; the first {} are listed",
                tally.ce_total,
                tally.listed.len()
            ));
        }
        if tally.counts.get("probable_primes").copied().unwrap_or(0) > 0 {
            notes.push(format!(
                "values above 2^64 were tested with {DEFAULT_MR_ROUNDS} Miller-Rabin rounds; \
                 their primality is probable, not proved"
            ));
        }
        notes.extend(tally.notes);

        let verdict = if tally.ce_total > 0 {
            Verdict::CounterexamplesFound
        } else if force_inconclusive || tally.inconclusive > 0 {
            Verdict::Inconclusive
        } else {
            Verdict::AllVerified
        };
        Ok(ClaimReport {
            id: spec.id.to_owned(),
            range,
            budget: self.budget,
            policy: spec.policy,
            checked: tally.checked,
            counterexamples: tally.listed,
            statistics,
            verdict,
            notes,
            elapsed: started.elapsed().as_secs_f64(),
        })
    }

    fn chunks(range: ScanRange) -> Vec<(u64, u64)> {
        (0..=(range.hi - range.lo) / CHUNK)
            .map(|i| {
                let s = range.lo + i * CHUNK;
                (s, s.saturating_add(CHUNK - 1).min(range.hi))
            })
            .collect()
    }

    /// Evaluates `f` on every input, chunked over the rayon pool and merged in order.
    fn per_input<F>(&self, range: ScanRange, f: F) -> Tally
    where
        F: Fn(u64, &mut Tally) + Sync,
    {
        let cap = self.cap();
        let parts: Vec<Tally> = Self::chunks(range)
            .into_par_iter()
            .map(|(s, e)| {
                let mut t = Tally::default();
                for b in s..=e {
                    f(b, &mut t);
                }
                t
            })
            .collect();
        parts.into_iter().fold(Tally::default(), |mut acc, t| {
            acc.merge(t, cap);
            acc
        })
    }

    fn collect_inputs<T, F>(&self, range: ScanRange, f: F) -> Vec<T>
    where
        T: Send,
        F: Fn(u64) -> Option<T> + Sync,
    {
        let parts: Vec<Vec<T>> = Self::chunks(range)
            .into_par_iter()
            .map(|(s, e)| (s..=e).filter_map(&f).collect())
            .collect();
        parts.into_iter().flatten().collect()
    }

    fn eligibility(&self, b: u64) -> Eligibility {
        match classify_generator(&Nat::from(b), self.budget.depth, BackwardPolicy::GreedyMin) {
            Ok(GeneratorVerdict::Proved) => Eligibility::Generator,
            Ok(GeneratorVerdict::Refuted { .. }) => Eligibility::NotGenerator,
            Ok(GeneratorVerdict::UndecidedUpToDepth { .. }) | Err(_) => Eligibility::Undecided,
        }
    }

    /// Applies `f` to classified generators only, counting the rest.
    fn per_generator<F>(&self, range: ScanRange, f: F) -> Tally
    where
        F: Fn(u64, &mut Tally) + Sync,
    {
        self.per_input(range, |b, t| match self.eligibility(b) {
            Eligibility::Generator => {
                t.bump("generators", 1);
                f(b, t);
            }
            Eligibility::NotGenerator => t.bump("non_generators", 1),
            Eligibility::Undecided => {
                t.bump("undecided_generators", 1);
                t.inconclusive += 1;
            }
        })
    }

    fn order_index(&self, b: u64) -> OrderIndex {
        let limits = self.budget.limits();
        let n = Nat::from(b);
        let r = match &self.memo {
            Some(memo) => order_index_memo(&n, &limits, memo),
            None => order_index_with(&n, &limits),
        };
        r.expect("inputs are positive and the budget is validated")
    }

    fn window(&self, b: u64) -> Trajectory {
        trajectory(&Nat::from(b), self.budget.window).expect("positive input, nonzero window")
    }

    fn claim_p3(&self, range: ScanRange) -> Tally {
        let cap = self.cap();
        self.per_generator(range, |b, t| {
            t.checked += 1;
            let chain = backward_chain(&Nat::from(b), self.budget.depth, BackwardPolicy::GreedyMin)
                .expect("valid chain arguments");
            if let Some((i, w)) = chain.elements.iter().enumerate().find(|(_, e)| e.is_odd()) {
                t.counterexample(
                    cap,
                    CaseInput::Single(Nat::from(b)),
                    format!("backward element {w} at depth {} is odd", i + 1),
                );
            }
            if chain.elements.iter().all(|e| e.is_odd()) {
                t.bump("all_odd_chains", 1);
            }
        })
    }

    fn claim_p4(&self, range: ScanRange) -> Tally {
        let cap = self.cap();
        self.per_generator(range, |b, t| {
            if b == 1 {
                return;
            }
            t.checked += 1;
            let traj = self.window(b);
            if !traj.converged() {
                t.bump("window_truncated", 1);
            }
            let target = Nat::from(b);
            if let Some(s) = traj.elements.iter().position(|e| *e == target) {
                t.counterexample(
                    cap,
                    CaseInput::Single(target),
                    format!("f^{}(b) = b", s + 1),
                );
            }
        })
    }

    fn generators(&self, range: ScanRange) -> (Vec<u64>, u64) {
        let undecided = std::sync::atomic::AtomicU64::new(0);
        let gens = self.collect_inputs(range, |b| match self.eligibility(b) {
            Eligibility::Generator => Some(b),
            Eligibility::NotGenerator => None,
            Eligibility::Undecided => {
                undecided.fetch_add(1, std::sync::atomic::Ordering::Relaxed);
                None
            }
        });
        (gens, undecided.into_inner())
    }

    fn element_set(&self, b: u64) -> BTreeSet<Nat> {
        self.window(b).elements.into_iter().collect()
    }

    fn claim_p5(&self, range: ScanRange) -> Tally {
        let (gens, undecided) = self.generators(range);
        let mut t = Tally {
            inconclusive: undecided,
            ..Tally::default()
        };
        let fingerprints: Vec<(u64, u64)> = gens
            .par_iter()
            .map(|&b| {
                let mut h = DefaultHasher::new();
                self.element_set(b).hash(&mut h);
                (h.finish(), b)
            })
            .collect();
        let mut groups: BTreeMap<u64, Vec<u64>> = BTreeMap::new();
        for (h, b) in fingerprints {
            groups.entry(h).or_default().push(b);
        }
        let g = gens.len() as u64;
        t.checked = g * g.saturating_sub(1) / 2;
        t.bump("generators", g);
        t.bump("undecided_generators", undecided);
        let mut found: Vec<(u64, u64, usize)> = Vec::new();
        for members in groups.values().filter(|m| m.len() > 1) {
            t.bump("fingerprint_collisions", members.len() as u64 - 1);
            let sets: Vec<BTreeSet<Nat>> = members.iter().map(|&b| self.element_set(b)).collect();
            for i in 0..members.len() {
                for j in i + 1..members.len() {
                    if sets[i] == sets[j] {
                        found.push((members[i], members[j], sets[i].len()));
                    }
                }
            }
        }
        found.sort_unstable();
        let cap = self.cap();
        for (a, b, len) in found {
            t.counterexample(
                cap,
                CaseInput::Pair(Nat::from(a), Nat::from(b)),
                format!("forward windows have identical element sets ({len} elements)"),
            );
        }
        t
    }

    fn claim_p6(&self, range: ScanRange) -> Tally {
        let cap = self.cap();
        let depth = self.budget.depth;
        self.per_generator(range, |b, t| {
            if b == 1 {
                return;
            }
            t.checked += 1;
            if b % 2 == 0 {
                let chain = backward_chain(&Nat::from(b), 3.min(depth), BackwardPolicy::GreedyMin)
                    .expect("valid chain arguments");
                let head: Vec<String> = chain.elements.iter().map(|e| e.to_string()).collect();
                t.counterexample(
                    cap,
                    CaseInput::Single(Nat::from(b)),
                    format!(
                        "b = {b} is even yet a classified generator (3 | {b}): greedy backward \
                         chain {}, ... stays even to depth {depth}",
                        head.join(", ")
                    ),
                );
            }
        })
    }

    fn claim_p7(&self, range: ScanRange) -> Tally {
        let cap = self.cap();
        self.per_input(range, |a, t| {
            if a % 4 != 2 || a == 2 {
                return;
            }
            let r = a / 2;
            let Ok(f) = factorize(&Nat::from(a)) else {
                t.inconclusive += 1;
                return;
            };
            if f.omega() != 2 {
                return;
            }
            t.checked += 1;
            let (na, nr) = (Nat::from(a), Nat::from(r));
            let f_r = crate::process::collatz_f(&nr).expect("r >= 1");
            let f_a = crate::process::collatz_f(&na).expect("a >= 1");
            let lhs = f_r.pred().expect("f(r) >= 1");
            let rhs = &Nat::from(3u8) * &f_a;
            if lhs != rhs {
                t.counterexample(
                    cap,
                    CaseInput::Single(na),
                    format!("r = {r}: f(r) - 1 = {lhs} but 3 f(a) = {rhs}"),
                );
            }
        })
    }

    fn claim_t8(&self, range: ScanRange) -> Tally {
        let cap = self.cap();
        self.per_input(range, |p, t| {
            if p <= 3 || p % 4 != 3 || !is_prime(&Nat::from(p)) {
                return;
            }
            t.checked += 1;
            match self.order_index(p) {
                OrderIndex::Converged { tau, ind } => {
                    t.max("max_tau", tau);
                    if ind > 1 && tau <= 1 {
                        t.counterexample(
                            cap,
                            CaseInput::Single(Nat::from(p)),
                            format!("tau = {tau}, Ind = {ind}: f^{tau}(p) = 2^{ind}"),
                        );
                    }
                }
                OrderIndex::CapExceeded => t.inconclusive += 1,
            }
        })
    }

    fn claim_p9(&self, range: ScanRange) -> Tally {
        let cap = self.cap();
        self.per_input(range, |b, t| {
            let OrderIndex::Converged { tau, ind } = self.order_index(b) else {
                t.inconclusive += 1;
                return;
            };
            t.checked += 1;
            if ind == 1 {
                t.bump("ind_eq_1", 1);
                if b != 2 {
                    t.notes.push(format!("Ind = 1 at b = {b} (tau = {tau})"));
                }
            }
            // Reading that excludes m = 0: powers of two 2^k move to (1, k - 1).
            let alt = match Nat::from(b).power_of_two_exponent() {
                Some(k) => (1, k.saturating_sub(1)),
                None => (tau, ind),
            };
            if alt.0 >= 2 && alt.1 <= 1 {
                t.bump("positive_m_reading_counterexamples", 1);
            }
            if tau >= 2 && ind <= 1 {
                t.counterexample(
                    cap,
                    CaseInput::Single(Nat::from(b)),
                    format!("tau = {tau} >= 2 but Ind = {ind}"),
                );
            }
        })
    }

    fn claim_p10(&self, range: ScanRange) -> Tally {
        let (gens, undecided) = self.generators(range);
        let converged: Vec<bool> = gens
            .par_iter()
            .map(|&b| self.window(b).converged())
            .collect();
        let mut t = Tally {
            inconclusive: undecided,
            ..Tally::default()
        };
        let g = gens.len() as u64;
        t.checked = g * g.saturating_sub(1) / 2;
        t.bump("generators", g);
        t.bump("undecided_generators", undecided);
        let cap = self.cap();
        let window = self.budget.window;

        // Two windows that both reach 1 always meet; only truncated ones need a search.
        let n_conv = converged.iter().filter(|&&c| c).count() as u64;
        let mut overlapping = n_conv * n_conv.saturating_sub(1) / 2;
        for i in 0..gens.len() {
            for j in i + 1..gens.len() {
                if (!converged[i] || !converged[j])
                    && process_overlap(&Nat::from(gens[i]), &Nat::from(gens[j]), window)
                        .expect("positive inputs")
                        .is_some()
                {
                    overlapping += 1;
                }
            }
        }
        t.bump("overlapping_pairs", overlapping);

        'outer: for i in 0..gens.len() {
            for j in i + 1..gens.len() {
                if t.listed.len() >= cap {
                    break 'outer;
                }
                let (a, b) = (Nat::from(gens[i]), Nat::from(gens[j]));
                if let Some(o) = process_overlap(&a, &b, window).expect("positive inputs") {
                    t.listed.push(Counterexample {
                        input: CaseInput::Pair(a.clone(), b.clone()),
                        detail: format!(
                            "common value {} at s = {} (from {a}) and t = {} (from {b}), \
                             yet {a} != {b}",
                            o.value, o.s, o.t
                        ),
                    });
                }
            }
        }
        t.ce_total = overlapping;
        t
    }

    fn claim_p11(&self, range: ScanRange) -> Tally {
        let cap = self.cap();
        let depth = self.budget.depth;
        let check = move |b: u64, t: &mut Tally| {
            t.checked += 1;
            let c = translated_chain(&Nat::from(b), depth, BackwardPolicy::EvenDoubling)
                .expect("valid chain arguments");
            let first = c[0].succ();
            for (i, e) in c.iter().enumerate() {
                let s = i as u64 + 1;
                if e.succ() != first.shl(s - 1) {
                    t.counterexample(
                        cap,
                        CaseInput::Single(Nat::from(b)),
                        format!(
                            "c_{s} + 1 = {} differs from 2^{} (c_1 + 1)",
                            e.succ(),
                            s - 1
                        ),
                    );
                    return;
                }
                if b == 1 && *e != Nat::pow2(s).pred().expect("2^s >= 1") {
                    t.counterexample(
                        cap,
                        CaseInput::Single(Nat::ONE),
                        format!("c_{s} = {e} is not 2^{s} - 1"),
                    );
                    return;
                }
            }
        };
        let mut t = Tally::default();
        if range.lo > 1 {
            check(1, &mut t);
        }
        t.merge(self.per_input(range, check), cap);
        t
    }

    fn claim_indtau(&self, range: ScanRange) -> Tally {
        let cap = self.cap();
        self.per_generator(range, |b, t| {
            let OrderIndex::Converged { tau, ind } = self.order_index(b) else {
                t.inconclusive += 1;
                return;
            };
            t.checked += 1;
            let prime = is_prime(&Nat::from(b));
            let matches = ind == tau + 1;
            t.bump(
                if prime {
                    "prime_generators"
                } else {
                    "composite_generators"
                },
                1,
            );
            if prime && matches {
                t.notes.push(format!(
                    "verified: b = {b} is prime with tau = {tau}, Ind = {ind} = tau + 1"
                ));
            }
            if prime != matches {
                let detail = if prime {
                    format!("b = {b} is prime but Ind = {ind} != tau + 1 = {}", tau + 1)
                } else {
                    format!("b = {b} is composite but Ind = {ind} = tau + 1 (tau = {tau})")
                };
                t.counterexample(cap, CaseInput::Single(Nat::from(b)), detail);
            }
        })
    }

    fn claim_t12(&self, range: ScanRange) -> Tally {
        let cap = self.cap();
        let depth = self.budget.depth;
        self.per_input(range, |b, t| {
            t.checked += 1;
            let pairs = match sophie_germain_pairs(&Nat::from(b), depth) {
                Ok(p) => p,
                Err(_) => {
                    t.inconclusive += 1;
                    return;
                }
            };
            let c = translated_chain(&Nat::from(b), depth, BackwardPolicy::EvenDoubling)
                .expect("valid chain arguments");
            for (i, w) in c.windows(2).enumerate() {
                if w[1] != w[0].double().succ() {
                    t.counterexample(
                        cap,
                        CaseInput::Single(Nat::from(b)),
                        format!(
                            "c_{} = {} but 2 c_{} + 1 = {}",
                            i + 2,
                            w[1],
                            i + 1,
                            w[0].double().succ()
                        ),
                    );
                }
            }
            for p in pairs {
                t.bump("consecutive_prime_pairs", 1);
                if p.probable {
                    t.bump("probable_primes", 1);
                }
                if !p.sophie_germain {
                    t.counterexample(
                        cap,
                        CaseInput::Single(Nat::from(b)),
                        format!(
                            "c_{} = {} and c_{} = {} are prime but {} is not Sophie Germain",
                            p.index,
                            p.lower,
                            p.index + 1,
                            p.upper,
                            p.lower
                        ),
                    );
                }
            }
        })
    }

    fn claim_t13(&self, range: ScanRange) -> Tally {
        let depth = self.budget.depth;
        let misses = std::sync::Mutex::new(Vec::new());
        let mut t = self.per_generator(range, |b, t| {
            t.checked += 1;
            let c = translated_chain(&Nat::from(b), depth, BackwardPolicy::EvenDoubling)
                .expect("valid chain arguments");
            let first = c
                .iter()
                .map(|e| primality(e, DEFAULT_MR_ROUNDS))
                .enumerate()
                .find(|(_, p)| p.is_prime_like());
            match first {
                Some((i, p)) => {
                    t.max("max_first_prime_index", i as u64 + 1);
                    if p == Primality::ProbablePrime {
                        t.bump("probable_primes", 1);
                    }
                }
                None => {
                    t.inconclusive += 1;
                    misses.lock().expect("miss list").push(b);
                }
            }
        });
        let mut misses = misses.into_inner().expect("miss list");
        misses.sort_unstable();
        if !misses.is_empty() {
            let shown: Vec<String> = misses.iter().take(20).map(u64::to_string).collect();
            t.notes.push(format!(
                "no prime within depth {depth} for {} generator(s): {}{}",
                misses.len(),
                shown.join(", "),
                if misses.len() > 20 { ", ..." } else { "" }
            ));
        }
        t
    }

    fn claim_density(&self, range: ScanRange, extra: &mut BTreeMap<String, Stat>) -> Tally {
        let depth = self.budget.depth;
        let checkpoints: Vec<usize> = [8usize, 16, 32, 64, 128, 256]
            .into_iter()
            .filter(|&d| d < depth)
            .chain([depth])
            .collect();
        let t = self.per_generator(range, |b, t| {
            t.checked += 1;
            let c = translated_chain(&Nat::from(b), depth, BackwardPolicy::EvenDoubling)
                .expect("valid chain arguments");
            let flags: Vec<Primality> = c.iter().map(|e| primality(e, DEFAULT_MR_ROUNDS)).collect();
            let mut primes = 0u64;
            let mut run = 0u64;
            let mut best_run = 0u64;
            for (i, p) in flags.iter().enumerate() {
                if p.is_prime_like() {
                    primes += 1;
                    run += 1;
                    best_run = best_run.max(run);
                } else {
                    run = 0;
                }
                if *p == Primality::ProbablePrime {
                    t.bump("probable_primes", 1);
                }
                if let Some(key) = checkpoint_key(&checkpoints, i + 1) {
                    t.bump(key, primes);
                }
            }
            t.bump("translate_elements", c.len() as u64);
            t.bump("translate_primes", primes);
            t.max("max_consecutive_prime_run", best_run);
            if best_run >= 2 {
                t.bump("generators_with_consecutive_primes", 1);
            }
        });
        let gens = t.counts.get("generators").copied().unwrap_or(0);
        for &d in &checkpoints {
            let primes = checkpoint_key(&checkpoints, d)
                .and_then(|k| t.counts.get(k).copied())
                .unwrap_or(0);
            if gens > 0 {
                extra.insert(
                    format!("prime_ratio_depth_{d:03}"),
                    Stat::Ratio(primes as f64 / (gens * d as u64) as f64),
                );
            }
        }
        t
    }

    fn claim_mu(&self, range: ScanRange) -> Tally {
        self.per_input(range, |p, t| {
            if p <= 2 || p % 4 != 3 || !is_prime(&Nat::from(p)) {
                return;
            }
            t.checked += 1;
            let traj = self.window(p);
            let mut skipped = 0;
            let witness = traj.elements.iter().position(|e| match factorize(e) {
                Ok(f) => f.mobius() != 0,
                Err(_) => {
                    skipped += 1;
                    false
                }
            });
            t.bump("factor_budget_skips", skipped);
            match witness {
                Some(s) => t.max("max_witness_step", s as u64 + 1),
                None => t.inconclusive += 1,
            }
        })
    }

    fn claim_oddprime(&self, range: ScanRange) -> Tally {
        let cap = self.cap();
        self.per_generator(range, |b, t| {
            t.checked += 1;
            let traj = self.window(b);
            let found = traj.elements.iter().position(|e| e.is_odd() && is_prime(e));
            match found {
                Some(s) => t.max("max_witness_step", s as u64 + 1),
                None if traj.converged() => {
                    let shown: Vec<String> = traj
                        .elements
                        .iter()
                        .take(20)
                        .map(|e| e.to_string())
                        .collect();
                    let ellipsis = if traj.elements.len() > 20 {
                        ", ..."
                    } else {
                        ""
                    };
                    t.counterexample(
                        cap,
                        CaseInput::Single(Nat::from(b)),
                        format!(
                            "forward process {}{ellipsis} reaches 1 without an odd prime",
                            shown.join(", ")
                        ),
                    );
                }
                None => t.inconclusive += 1,
            }
        })
    }

    fn claim_omega(&self, range: ScanRange) -> Tally {
        let cap = self.cap();
        self.per_generator(range, |b, t| {
            let Ok(f) = factorize(&Nat::from(b)) else {
                t.inconclusive += 1;
                return;
            };
            t.checked += 1;
            let omega = f.omega();
            t.max("max_omega", u64::from(omega));
            if omega > 2 {
                let parts: Vec<String> = f
                    .factors
                    .iter()
                    .map(|(p, e)| {
                        if *e == 1 {
                            p.to_string()
                        } else {
                            format!("{p}^{e}")
                        }
                    })
                    .collect();
                t.counterexample(
                    cap,
                    CaseInput::Single(Nat::from(b)),
                    format!("{b} = {}, Omega = {omega}", parts.join(" * ")),
                );
            }
        })
    }

    fn claim_speed1(&self, range: ScanRange) -> Tally {
        let cap = self.cap();
        self.per_input(range, |b, t| {
            t.checked += 1;
            let traj = self.window(b);
            let v = &traj.elements;
            let witness = (1..v.len()).find_map(|k| {
                (0..k).find_map(|j| {
                    let gap = (k - j) as u64;
                    let (q, r) = v[k].abs_diff(&v[j]).div_rem_u64(gap);
                    (r == 0 && q.power_of_two_exponent().is_some()).then_some((j + 1, k + 1))
                })
            });
            match witness {
                Some((_, k)) => t.max("max_witness_k", k as u64),
                None if traj.converged() && v.iter().all(Nat::is_one) => t.counterexample(
                    cap,
                    CaseInput::Single(Nat::from(b)),
                    "the process is constantly 1, so every nu(f^j, f^k) = 0".into(),
                ),
                None => t.inconclusive += 1,
            }
        })
    }

    fn claim_speed2(&self, range: ScanRange) -> Tally {
        let cap = self.cap();
        self.per_input(range, |b, t| {
            t.checked += 1;
            let traj = self.window(b);
            let v = &traj.elements;
            let witness = v.windows(2).position(|w| w[1] != w[0]);
            match witness {
                Some(i) => {
                    let nu = v[i + 1].abs_diff(&v[i]);
                    t.max("max_witness_k", i as u64 + 1);
                    t.max("max_nu_bits", nu.bits());
                    if nu.power_of_two_exponent().is_some() {
                        t.bump("witness_nu_power_of_two", 1);
                    }
                }
                None if traj.converged() => t.counterexample(
                    cap,
                    CaseInput::Single(Nat::from(b)),
                    format!(
                        "forward process {} then constant 1: nu(f^(k+1), f^k) = 0 for every k",
                        v.iter()
                            .map(|e| e.to_string())
                            .collect::<Vec<_>>()
                            .join(", ")
                    ),
                ),
                None => t.inconclusive += 1,
            }
        })
    }

    fn claim_taufin(&self, range: ScanRange) -> Tally {
        self.per_input(range, |b, t| {
            t.checked += 1;
            match self.order_index(b) {
                OrderIndex::Converged { tau, ind } => {
                    t.max("max_tau", tau);
                    t.max("max_ind", ind);
                }
                OrderIndex::CapExceeded => {
                    t.bump("cap_exceeded", 1);
                    t.inconclusive += 1;
                }
            }
        })
    }

    fn claim_sumlog(&self, range: ScanRange) -> Tally {
        let cap = self.cap();
        let max_steps = self.budget.max_steps;
        self.per_input(range, |b, t| {
            t.checked += 1;
            let n = Nat::from(b);
            let traj = trajectory(&n, max_steps).expect("positive input");
            let steps = traj.steps_taken();
            let terms = if traj.converged() { steps + SUMLOG_TAIL } else { steps };
            let sums = log_sum_partial(&n, terms).expect("positive input");
            let mut prev = 0.0f64;
            for (i, &s) in sums.iter().enumerate() {
                let step = i as u64 + 1;
                let before_one = !traj.converged() || step < steps;
                let ok = if before_one { s > prev } else { s == prev };
                if !ok {
                    t.counterexample(
                        cap,
                        CaseInput::Single(n.clone()),
                        format!(
                            "partial sum S_{step} = {s} vs S_{} = {prev}; process reaches 1 at step {}",
                            step - 1,
                            if traj.converged() { steps.to_string() } else { "?".into() }
                        ),
                    );
                    return;
                }
                prev = s;
            }
            if traj.converged() {
                t.max("max_stabilization_step", steps);
            } else {
                t.inconclusive += 1;
            }
        })
    }
}

fn checkpoint_key(checkpoints: &[usize], depth: usize) -> Option<&'static str> {
    const KEYS: [&str; 7] = [
        "translate_primes_depth_008",
        "translate_primes_depth_016",
        "translate_primes_depth_032",
        "translate_primes_depth_064",
        "translate_primes_depth_128",
        "translate_primes_depth_256",
        "translate_primes_full_depth",
    ];
    let i = checkpoints.iter().position(|&d| d == depth)?;
    // The final checkpoint is always the full budget depth.
    if i + 1 == checkpoints.len() {
        Some(KEYS[6])
    } else {
        Some(KEYS[i])
    }
}

/// A pair of consecutive primes `c_index, c_(index+1)` in a translated chain.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct PrimePair {
    pub index: usize,
    pub lower: Nat,
    pub upper: Nat,
    pub sophie_germain: bool,
    /// Either member was only shown probably prime.
    pub probable: bool,
}

/// Consecutive prime pairs in the translated doubling chain of `base`.
pub fn sophie_germain_pairs(base: &Nat, depth: usize) -> Result<Vec<PrimePair>> {
    let c = translated_chain(base, depth, BackwardPolicy::EvenDoubling)?;
    let flags: Vec<Primality> = c.iter().map(|e| primality(e, DEFAULT_MR_ROUNDS)).collect();
    Ok((0..c.len().saturating_sub(1))
        .filter(|&i| flags[i].is_prime_like() && flags[i + 1].is_prime_like())
        .map(|i| PrimePair {
            index: i + 1,
            lower: c[i].clone(),
            upper: c[i + 1].clone(),
            sophie_germain: is_sophie_germain(&c[i]),
            probable: flags[i] == Primality::ProbablePrime
                || flags[i + 1] == Primality::ProbablePrime,
        })
        .collect())
}
