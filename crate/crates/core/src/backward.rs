//! Backward processes: preimage sets, chain selection policies, generator
//! classification, and unit-left-translated chains.

use std::collections::HashMap;
use std::fmt;
use std::str::FromStr;

use serde::Serialize;

use crate::error::{require_positive, Error, Result};
use crate::nat::Nat;
use crate::process::trajectory;

pub const DEFAULT_NODE_BUDGET: usize = 1_000_000;

/// Every `m` with `f(m) = n`, excluding the fixed-point self-loop at 1.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PreimageSet {
    pub even_pre: Nat,
    pub odd_pre: Option<Nat>,
}

impl PreimageSet {
    pub fn min(&self) -> &Nat {
        // (n-1)/3 < 2n whenever it exists.
        self.odd_pre.as_ref().unwrap_or(&self.even_pre)
    }

    pub fn iter(&self) -> impl Iterator<Item = &Nat> {
        std::iter::once(&self.even_pre).chain(self.odd_pre.as_ref())
    }
}

fn preimages_unchecked(n: &Nat) -> PreimageSet {
    let even_pre = n.double();
    let odd_pre = if n.rem_u64(3) == 1 {
        // n ≡ 1 (mod 3) and n >= 1, so n - 1 >= 0 is divisible by 3.
        let q = n.pred().expect("n >= 1").div_rem_u64(3).0;
        (q.is_odd() && !q.is_one()).then_some(q)
    } else {
        None
    };
    PreimageSet { even_pre, odd_pre }
}

pub fn preimages(n: &Nat) -> Result<PreimageSet> {
    require_positive(n, "preimage target")?;
    Ok(preimages_unchecked(n))
}

/// How one element per backward level is selected.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum BackwardPolicy {
    /// Always the even preimage: `base · 2^s`.
    EvenDoubling,
    /// The smaller preimage of the previous chain element.
    GreedyMin,
    /// The true minimum of the whole level-`s` preimage set.
    LevelMin,
}

impl BackwardPolicy {
    pub fn short_name(self) -> &'static str {
        match self {
            BackwardPolicy::EvenDoubling => "even",
            BackwardPolicy::GreedyMin => "greedy",
            BackwardPolicy::LevelMin => "level",
        }
    }
}

impl fmt::Display for BackwardPolicy {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.short_name())
    }
}

impl FromStr for BackwardPolicy {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "even" | "even-doubling" => Ok(BackwardPolicy::EvenDoubling),
            "greedy" | "greedy-min" => Ok(BackwardPolicy::GreedyMin),
            "level" | "level-min" => Ok(BackwardPolicy::LevelMin),
            other => Err(Error::InvalidArgument(format!(
                "unknown policy {other:?} (expected even, greedy or level)"
            ))),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BackwardChain {
    pub base: Nat,
    pub policy: BackwardPolicy,
    /// `elements[s - 1]` is the level-`s` selection.
    pub elements: Vec<Nat>,
}

impl BackwardChain {
    pub fn depth(&self) -> usize {
        self.elements.len()
    }
}

pub fn backward_chain(base: &Nat, depth: usize, policy: BackwardPolicy) -> Result<BackwardChain> {
    backward_chain_with_budget(base, depth, policy, DEFAULT_NODE_BUDGET)
}

pub fn backward_chain_with_budget(
    base: &Nat,
    depth: usize,
    policy: BackwardPolicy,
    node_budget: usize,
) -> Result<BackwardChain> {
    require_positive(base, "backward chain base")?;
    if depth == 0 {
        return Err(Error::InvalidArgument("depth must be at least 1".into()));
    }
    let elements = match policy {
        BackwardPolicy::EvenDoubling => (1..=depth as u64).map(|s| base.shl(s)).collect(),
        BackwardPolicy::GreedyMin => greedy_chain(base, depth),
        BackwardPolicy::LevelMin => level_minima(base, depth, node_budget)?,
    };
    Ok(BackwardChain {
        base: base.clone(),
        policy,
        elements,
    })
}

fn greedy_chain(base: &Nat, depth: usize) -> Vec<Nat> {
    let mut out = Vec::with_capacity(depth);
    let mut cur = base.clone();
    for _ in 0..depth {
        cur = preimages_unchecked(&cur).min().clone();
        out.push(cur.clone());
    }
    out
}

/// Exact per-level minima of the iterated preimage tree, by breadth-first
/// expansion with bound pruning.
///
/// A backward step either doubles `x` or takes `(x - 1)/3 > x/3 - 1/2`, so any
/// descendant `k` levels below `v` exceeds `v/3^k - 1/2`. A node is dropped once
/// `v > (bound + 1)·3^k` for every remaining level, where `bound` is a value
/// already known to lie in that level.
fn level_minima(base: &Nat, depth: usize, node_budget: usize) -> Result<Vec<Nat>> {
    let mut bounds = greedy_chain(base, depth);
    let mut pow3 = vec![Nat::ONE];
    for k in 1..=depth {
        let prev = &pow3[k - 1];
        pow3.push(&(prev + prev) + prev);
    }
    let mut minima = Vec::with_capacity(depth);
    let mut frontier = vec![base.clone()];
    for level in 1..=depth {
        let mut next = Vec::with_capacity(frontier.len() * 2);
        for v in &frontier {
            let pre = preimages_unchecked(v);
            next.push(pre.even_pre);
            next.extend(pre.odd_pre);
        }
        let level_min = next.iter().min().expect("2v is always a preimage").clone();
        minima.push(level_min.clone());

        // Tighten the bounds for deeper levels with a greedy run from the new minimum.
        let idx = level - 1;
        bounds[idx] = level_min.clone();
        let mut g = level_min;
        for bound in bounds.iter_mut().skip(level) {
            g = preimages_unchecked(&g).min().clone();
            if g < *bound {
                *bound = g.clone();
            }
        }

        if level == depth {
            break;
        }
        let thresholds: Vec<Nat> = (level + 1..=depth)
            .map(|s| &bounds[s - 1].succ() * &pow3[s - level])
            .collect();
        next.retain(|v| thresholds.iter().any(|t| v <= t));
        if next.len() > node_budget {
            return Err(Error::NodeBudgetExceeded {
                frontier: next.len(),
                budget: node_budget,
            });
        }
        frontier = next;
    }
    Ok(minima)
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case", tag = "verdict")]
pub enum GeneratorVerdict {
    Proved,
    /// First odd element of the chain and its (1-based) depth.
    Refuted {
        depth: usize,
        witness: Nat,
    },
    UndecidedUpToDepth {
        depth: usize,
    },
}

impl GeneratorVerdict {
    pub fn is_generator(&self) -> bool {
        matches!(self, GeneratorVerdict::Proved)
    }
}

/// Whether every backward element of `base` shares one parity.
///
/// A multiple of 3 never has an odd preimage (its preimage tree is the doubling
/// chain), which decides it; the bounded chain scan still runs and overrides the
/// shortcut if it ever finds an odd element.
pub fn classify_generator(
    base: &Nat,
    depth: usize,
    policy: BackwardPolicy,
) -> Result<GeneratorVerdict> {
    if policy == BackwardPolicy::EvenDoubling {
        return Err(Error::InvalidArgument(
            "generator classification under even doubling is vacuous".into(),
        ));
    }
    let chain = backward_chain(base, depth, policy)?;
    if let Some((i, w)) = chain.elements.iter().enumerate().find(|(_, e)| e.is_odd()) {
        return Ok(GeneratorVerdict::Refuted {
            depth: i + 1,
            witness: w.clone(),
        });
    }
    if base.rem_u64(3) == 0 {
        Ok(GeneratorVerdict::Proved)
    } else {
        Ok(GeneratorVerdict::UndecidedUpToDepth { depth })
    }
}

/// The backward chain shifted down by one.
pub fn translated_chain(base: &Nat, depth: usize, policy: BackwardPolicy) -> Result<Vec<Nat>> {
    let chain = backward_chain(base, depth, policy)?;
    Ok(chain
        .elements
        .iter()
        .map(|e| e.pred().expect("backward elements are at least 2"))
        .collect())
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Overlap {
    pub s: u64,
    pub t: u64,
    pub value: Nat,
}

/// First value shared by the two forward windows, minimal in `s` then `t`.
pub fn process_overlap(a: &Nat, b: &Nat, window: u64) -> Result<Option<Overlap>> {
    let ta = trajectory(a, window)?;
    let tb = trajectory(b, window)?;
    let mut first_t: HashMap<&Nat, u64> = HashMap::with_capacity(tb.elements.len());
    for (i, v) in tb.elements.iter().enumerate() {
        first_t.entry(v).or_insert(i as u64 + 1);
    }
    Ok(ta.elements.iter().enumerate().find_map(|(i, v)| {
        first_t.get(v).map(|&t| Overlap {
            s: i as u64 + 1,
            t,
            value: v.clone(),
        })
    }))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::process::collatz_f;
    use std::collections::BTreeSet;

    fn n(v: u64) -> Nat {
        Nat::from(v)
    }

    fn nats(vs: &[u64]) -> Vec<Nat> {
        vs.iter().copied().map(Nat::from).collect()
    }

    // Unpruned level sets by direct search: every m in a generous window with
    // f^s(m) = base and no earlier 1 on the way (the self-loop is excluded).
    fn brute_level_sets(base: u64, depth: usize) -> Vec<BTreeSet<u64>> {
        let mut levels = vec![BTreeSet::new(); depth];
        let mut frontier = vec![base];
        for level in levels.iter_mut() {
            let mut next = Vec::new();
            for &v in &frontier {
                for m in [2 * v, (v.wrapping_sub(1)) / 3] {
                    if m > 1 && m != v && brute_f(m) == v {
                        next.push(m);
                    }
                }
            }
            level.extend(next.iter().copied());
            frontier = next;
        }
        levels
    }

    fn brute_f(a: u64) -> u64 {
        match a {
            1 => 1,
            _ if a.is_multiple_of(2) => a / 2,
            _ => 3 * a + 1,
        }
    }

    #[test]
    fn preimage_examples() {
        let p = preimages(&n(16)).unwrap();
        assert_eq!((p.even_pre.clone(), p.odd_pre.clone()), (n(32), Some(n(5))));
        assert_eq!(p.min(), &n(5));
        assert_eq!(preimages(&n(5)).unwrap().odd_pre, None);
        assert_eq!(
            preimages(&n(1)).unwrap(),
            PreimageSet {
                even_pre: n(2),
                odd_pre: None
            }
        );
        assert_eq!(
            preimages(&n(4)).unwrap(),
            PreimageSet {
                even_pre: n(8),
                odd_pre: None
            }
        );
        assert!(preimages(&n(0)).is_err());
    }

    #[test]
    fn preimage_round_trip() {
        for v in 1..=100_000u64 {
            let p = preimages(&n(v)).unwrap();
            let members: Vec<&Nat> = p.iter().collect();
            for m in &members {
                assert_eq!(collatz_f(m).unwrap(), n(v));
            }
            if let Some(o) = &p.odd_pre {
                assert!(o < &p.even_pre);
            }
            assert!(members.len() == 1 || members[0] != members[1]);
        }
    }

    #[test]
    fn chain_examples() {
        let c = backward_chain(&n(3), 4, BackwardPolicy::GreedyMin).unwrap();
        assert_eq!(c.elements, nats(&[6, 12, 24, 48]));
        let c = backward_chain(&n(1), 5, BackwardPolicy::EvenDoubling).unwrap();
        assert_eq!(c.elements, nats(&[2, 4, 8, 16, 32]));
        let c = backward_chain(&n(1), 5, BackwardPolicy::GreedyMin).unwrap();
        assert_eq!(c.elements, nats(&[2, 4, 8, 16, 5]));
        assert!(backward_chain(&n(1), 0, BackwardPolicy::GreedyMin).is_err());
    }

    #[test]
    fn level_min_matches_unpruned_search() {
        for base in 1..=200u64 {
            let levels = brute_level_sets(base, 16);
            let chain = backward_chain(&n(base), 16, BackwardPolicy::LevelMin).unwrap();
            for (s, set) in levels.iter().enumerate() {
                assert_eq!(
                    chain.elements[s],
                    n(*set.first().unwrap()),
                    "base {base} level {}",
                    s + 1
                );
            }
            let greedy = backward_chain(&n(base), 16, BackwardPolicy::GreedyMin).unwrap();
            for (s, g) in greedy.elements.iter().enumerate() {
                assert!(levels[s].contains(&g.to_u64().unwrap()));
            }
        }
    }

    #[test]
    fn level_min_node_budget() {
        let err = backward_chain_with_budget(&n(1), 40, BackwardPolicy::LevelMin, 2).unwrap_err();
        assert!(matches!(err, Error::NodeBudgetExceeded { budget: 2, .. }));
        assert!(err.is_resource());
    }

    #[test]
    fn policy_ordering() {
        for base in 1..=1000u64 {
            let even = backward_chain(&n(base), 20, BackwardPolicy::EvenDoubling).unwrap();
            let greedy = backward_chain(&n(base), 20, BackwardPolicy::GreedyMin).unwrap();
            let level = backward_chain(&n(base), 20, BackwardPolicy::LevelMin).unwrap();
            for s in 0..20 {
                assert_eq!(even.elements[s], n(base).shl(s as u64 + 1));
                assert!(level.elements[s] <= greedy.elements[s]);
                assert!(greedy.elements[s] <= even.elements[s]);
            }
        }
    }

    #[test]
    fn classify_examples() {
        let greedy = BackwardPolicy::GreedyMin;
        assert_eq!(
            classify_generator(&n(3), 64, greedy).unwrap(),
            GeneratorVerdict::Proved
        );
        assert_eq!(
            classify_generator(&n(5), 64, greedy).unwrap(),
            GeneratorVerdict::Refuted {
                depth: 2,
                witness: n(3)
            }
        );
        assert_eq!(
            classify_generator(&n(1), 64, greedy).unwrap(),
            GeneratorVerdict::Refuted {
                depth: 5,
                witness: n(5)
            }
        );
        assert_eq!(
            classify_generator(&n(1), 4, greedy).unwrap(),
            GeneratorVerdict::UndecidedUpToDepth { depth: 4 }
        );
        assert_eq!(
            classify_generator(&n(6), 20, BackwardPolicy::LevelMin).unwrap(),
            GeneratorVerdict::Proved
        );
        assert!(classify_generator(&n(3), 8, BackwardPolicy::EvenDoubling).is_err());
    }

    #[test]
    fn shortcut_agrees_with_bounded_scan() {
        for base in 2..=10_000u64 {
            let chain = backward_chain(&n(base), 64, BackwardPolicy::GreedyMin).unwrap();
            let first_odd = chain.elements.iter().position(|e| e.is_odd());
            // Chains are never all odd: the first element is always chosen from {2n, ...}.
            assert!(chain.elements.iter().any(|e| e.is_even()));
            let verdict = classify_generator(&n(base), 64, BackwardPolicy::GreedyMin).unwrap();
            if base % 3 == 0 {
                assert_eq!(first_odd, None, "base {base}");
                assert_eq!(verdict, GeneratorVerdict::Proved);
            } else {
                let i = first_odd.unwrap_or_else(|| panic!("base {base} not refuted"));
                assert_eq!(
                    verdict,
                    GeneratorVerdict::Refuted {
                        depth: i + 1,
                        witness: chain.elements[i].clone()
                    }
                );
            }
        }
    }

    #[test]
    fn translate_examples() {
        let even = BackwardPolicy::EvenDoubling;
        assert_eq!(
            translated_chain(&n(3), 5, even).unwrap(),
            nats(&[5, 11, 23, 47, 95])
        );
        assert_eq!(
            translated_chain(&n(1), 4, even).unwrap(),
            nats(&[1, 3, 7, 15])
        );
        assert_eq!(
            translated_chain(&n(9), 3, even).unwrap(),
            nats(&[17, 35, 71])
        );
    }

    #[test]
    fn translate_recurrence() {
        for base in 1..=1000u64 {
            let c = translated_chain(&n(base), 30, BackwardPolicy::EvenDoubling).unwrap();
            for w in c.windows(2) {
                assert_eq!(w[1], w[0].double().succ());
            }
        }
    }

    #[test]
    fn overlap_examples() {
        assert_eq!(
            process_overlap(&n(3), &n(9), 30).unwrap(),
            Some(Overlap {
                s: 1,
                t: 13,
                value: n(10)
            })
        );
        assert_eq!(
            process_overlap(&n(7), &n(7), 30).unwrap(),
            Some(Overlap {
                s: 1,
                t: 1,
                value: n(22)
            })
        );
        let o = process_overlap(&n(21), &n(3), 30).unwrap().unwrap();
        assert_eq!((o.s, o.t, o.value), (3, 3, n(16)));
        // Windows too short to meet.
        assert_eq!(process_overlap(&n(27), &n(3), 2).unwrap(), None);
    }
}
