//! The modified Collatz map and its forward process.
//!
//! `f(a) = a/2` for even `a > 1`, `3a + 1` for odd `a > 1`, and `f(1) = 1`.
//! Everything here is exact; the only floating-point quantity is the
//! log-sum diagnostic.

use std::fmt;

use num_integer::Integer;

use crate::error::{require_positive, Error, Result};
use crate::nat::Nat;

pub const DEFAULT_MAX_STEPS: u64 = 100_000;
pub const DEFAULT_MAX_BITS: u64 = 10_000;

/// Iteration budget. A walk that runs out of steps or grows past `max_bits`
/// is reported as [`OrderIndex::CapExceeded`], never as divergent.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Limits {
    pub max_steps: u64,
    pub max_bits: u64,
}

impl Default for Limits {
    fn default() -> Self {
        Limits {
            max_steps: DEFAULT_MAX_STEPS,
            max_bits: DEFAULT_MAX_BITS,
        }
    }
}

impl Limits {
    pub fn steps(max_steps: u64) -> Self {
        Limits {
            max_steps,
            ..Limits::default()
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.max_steps == 0 {
            return Err(Error::InvalidArgument(
                "max_steps must be at least 1".into(),
            ));
        }
        Ok(())
    }
}

/// One application of the map. Caller guarantees `a >= 1`.
pub(crate) fn step(a: &Nat) -> Nat {
    if a.is_one() {
        Nat::ONE
    } else if a.is_even() {
        a.half()
    } else {
        a.triple_plus_one()
    }
}

pub fn collatz_f(a: &Nat) -> Result<Nat> {
    require_positive(a, "collatz_f input")?;
    Ok(step(a))
}

/// `f^s(a)`; `f^0(a) = a`.
pub fn iterate(a: &Nat, s: u64) -> Result<Nat> {
    require_positive(a, "iterate input")?;
    let mut cur = a.clone();
    for _ in 0..s {
        if cur.is_one() {
            break;
        }
        cur = step(&cur);
    }
    Ok(cur)
}

/// The infinite forward process `f(a), f^2(a), ...`.
#[derive(Debug, Clone)]
pub struct Orbit {
    cur: Nat,
}

impl Iterator for Orbit {
    type Item = Nat;

    fn next(&mut self) -> Option<Nat> {
        self.cur = step(&self.cur);
        Some(self.cur.clone())
    }
}

pub fn orbit(a: &Nat) -> Result<Orbit> {
    require_positive(a, "orbit start")?;
    Ok(Orbit { cur: a.clone() })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Halt {
    ReachedFixedPoint,
    CapExceeded,
}

/// A forward process truncated at the first 1 or at the step cap.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Trajectory {
    pub start: Nat,
    /// `elements[i] = f^(i+1)(start)`.
    pub elements: Vec<Nat>,
    pub halted: Halt,
    pub peak: Nat,
}

impl Trajectory {
    pub fn steps_taken(&self) -> u64 {
        self.elements.len() as u64
    }

    pub fn converged(&self) -> bool {
        self.halted == Halt::ReachedFixedPoint
    }
}

pub fn trajectory(a: &Nat, max_steps: u64) -> Result<Trajectory> {
    require_positive(a, "trajectory start")?;
    Limits::steps(max_steps).validate()?;
    let mut elements = Vec::new();
    let mut peak = a.clone();
    let mut halted = Halt::CapExceeded;
    for value in orbit(a)?.take(max_steps as usize) {
        if value > peak {
            peak = value.clone();
        }
        let done = value.is_one();
        elements.push(value);
        if done {
            halted = Halt::ReachedFixedPoint;
            break;
        }
    }
    Ok(Trajectory {
        start: a.clone(),
        elements,
        halted,
        peak,
    })
}

/// Order `tau` and index `ind`: the least `m >= 0` with `f^m(a) = 2^ind`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum OrderIndex {
    Converged { tau: u64, ind: u64 },
    CapExceeded,
}

impl OrderIndex {
    pub fn tau(&self) -> Option<u64> {
        match self {
            OrderIndex::Converged { tau, .. } => Some(*tau),
            OrderIndex::CapExceeded => None,
        }
    }

    pub fn ind(&self) -> Option<u64> {
        match self {
            OrderIndex::Converged { ind, .. } => Some(*ind),
            OrderIndex::CapExceeded => None,
        }
    }

    pub fn is_converged(&self) -> bool {
        matches!(self, OrderIndex::Converged { .. })
    }
}

pub fn is_power_of_two(n: &Nat) -> Option<u64> {
    n.power_of_two_exponent()
}

pub fn order_index(a: &Nat, max_steps: u64) -> Result<OrderIndex> {
    order_index_with(a, &Limits::steps(max_steps))
}

// Largest odd value whose 3v+1 still fits in a u128.
const FAST_ODD_LIMIT: u128 = (u128::MAX - 1) / 3;

pub fn order_index_with(a: &Nat, limits: &Limits) -> Result<OrderIndex> {
    require_positive(a, "order_index input")?;
    limits.validate()?;
    let mut m = 0u64;
    let mut cur = match a.to_u128() {
        Some(mut v) => loop {
            if v.is_power_of_two() {
                return Ok(OrderIndex::Converged {
                    tau: m,
                    ind: u64::from(v.trailing_zeros()),
                });
            }
            if m == limits.max_steps || 128 - u64::from(v.leading_zeros()) > limits.max_bits {
                return Ok(OrderIndex::CapExceeded);
            }
            if v & 1 == 0 {
                v >>= 1;
            } else if v <= FAST_ODD_LIMIT {
                v = 3 * v + 1;
            } else {
                break Nat::from(v);
            }
            m += 1;
        },
        None => a.clone(),
    };
    loop {
        if let Some(ind) = cur.power_of_two_exponent() {
            return Ok(OrderIndex::Converged { tau: m, ind });
        }
        if m == limits.max_steps || cur.bits() > limits.max_bits {
            return Ok(OrderIndex::CapExceeded);
        }
        cur = step(&cur);
        m += 1;
    }
}

/// An exact non-negative rational in lowest terms.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct SpeedValue {
    numerator: Nat,
    denominator: u64,
}

impl SpeedValue {
    pub fn new(numerator: Nat, denominator: u64) -> Result<Self> {
        if denominator == 0 {
            return Err(Error::InvalidArgument("zero denominator".into()));
        }
        let g = if numerator.is_zero() {
            denominator
        } else {
            numerator.rem_u64(denominator).gcd(&denominator)
        };
        Ok(SpeedValue {
            numerator: numerator.div_rem_u64(g).0,
            denominator: denominator / g,
        })
    }

    pub fn numerator(&self) -> &Nat {
        &self.numerator
    }

    pub fn denominator(&self) -> u64 {
        self.denominator
    }

    pub fn as_integer(&self) -> Option<&Nat> {
        (self.denominator == 1).then_some(&self.numerator)
    }

    /// `r` when the value is exactly `2^r` with `r >= 0`.
    pub fn power_of_two_exponent(&self) -> Option<u64> {
        self.as_integer()?.power_of_two_exponent()
    }
}

impl fmt::Display for SpeedValue {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.denominator == 1 {
            write!(f, "{}", self.numerator)
        } else {
            write!(f, "{}/{}", self.numerator, self.denominator)
        }
    }
}

/// `|f^k(a) - f^j(a)| / |k - j|`.
pub fn relative_speed(a: &Nat, j: u64, k: u64) -> Result<SpeedValue> {
    require_positive(a, "relative_speed input")?;
    if j == 0 || k == 0 {
        return Err(Error::InvalidArgument("process indices start at 1".into()));
    }
    if j == k {
        return Err(Error::InvalidArgument(format!(
            "relative speed is undefined for j = k = {j}"
        )));
    }
    let (lo, hi) = (j.min(k), j.max(k));
    let at_lo = iterate(a, lo)?;
    let at_hi = iterate(&at_lo, hi - lo)?;
    SpeedValue::new(at_hi.abs_diff(&at_lo), hi - lo)
}

/// Partial sums `S_t = sum_{s=1..t} ln f^s(a)` for `t = 1..=terms`.
pub fn log_sum_partial(a: &Nat, terms: u64) -> Result<Vec<f64>> {
    require_positive(a, "log_sum_partial input")?;
    if terms == 0 {
        return Err(Error::InvalidArgument("terms must be at least 1".into()));
    }
    let mut sums = Vec::with_capacity(terms as usize);
    let mut total = 0.0f64;
    let mut cur = a.clone();
    for _ in 0..terms {
        if !cur.is_one() {
            cur = step(&cur);
            total += cur.ln();
        }
        sums.push(total);
    }
    Ok(sums)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn n(v: u64) -> Nat {
        Nat::from(v)
    }

    fn nats(vs: &[u64]) -> Vec<Nat> {
        vs.iter().copied().map(Nat::from).collect()
    }

    // Plain u64 iteration, kept independent of `step` and `orbit`.
    fn brute_f(a: u64) -> u64 {
        match a {
            1 => 1,
            _ if a.is_multiple_of(2) => a / 2,
            _ => 3 * a + 1,
        }
    }

    fn brute_order_index(a: u64) -> (u64, u64) {
        let mut x = a;
        let mut m = 0;
        while x & (x - 1) != 0 {
            x = brute_f(x);
            m += 1;
        }
        (m, u64::from(x.trailing_zeros()))
    }

    #[test]
    fn map_cases() {
        assert_eq!(collatz_f(&n(6)).unwrap(), n(3));
        assert_eq!(collatz_f(&n(7)).unwrap(), n(22));
        assert_eq!(collatz_f(&n(1)).unwrap(), n(1));
        assert!(matches!(collatz_f(&n(0)), Err(Error::Domain(_))));
    }

    #[test]
    fn trajectory_examples() {
        let t = trajectory(&n(3), 10).unwrap();
        assert_eq!(t.elements, nats(&[10, 5, 16, 8, 4, 2, 1]));
        assert_eq!(t.halted, Halt::ReachedFixedPoint);
        assert_eq!(t.peak, n(16));

        let t = trajectory(&n(1), 5).unwrap();
        assert_eq!(t.elements, nats(&[1]));
        assert_eq!(t.halted, Halt::ReachedFixedPoint);

        let t = trajectory(&n(27), 200).unwrap();
        assert_eq!(t.halted, Halt::ReachedFixedPoint);
        assert_eq!(t.peak, n(9232));
        assert_eq!(t.steps_taken(), 111);
    }

    #[test]
    fn trajectory_cap() {
        let t = trajectory(&n(27), 50).unwrap();
        assert_eq!(t.halted, Halt::CapExceeded);
        assert_eq!(t.elements.len(), 50);
        // Cap landing exactly on the fixed point still counts as reaching it.
        let t = trajectory(&n(3), 7).unwrap();
        assert_eq!(t.halted, Halt::ReachedFixedPoint);
        assert!(trajectory(&n(3), 0).is_err());
        assert!(trajectory(&n(0), 3).is_err());
    }

    #[test]
    fn order_index_examples() {
        let conv = |tau, ind| OrderIndex::Converged { tau, ind };
        assert_eq!(order_index(&n(3), 100).unwrap(), conv(3, 4));
        assert_eq!(order_index(&n(16), 100).unwrap(), conv(0, 4));
        assert_eq!(order_index(&n(9), 100).unwrap(), conv(15, 4));
        assert_eq!(order_index(&n(1), 100).unwrap(), conv(0, 0));
        assert_eq!(order_index(&n(2), 100).unwrap(), conv(0, 1));
        assert_eq!(order_index(&n(9), 14).unwrap(), OrderIndex::CapExceeded);
        assert_eq!(order_index(&n(9), 15).unwrap(), conv(15, 4));
        assert!(order_index(&n(0), 10).is_err());
    }

    #[test]
    fn order_index_bit_guard() {
        let limits = Limits {
            max_steps: 1000,
            max_bits: 8,
        };
        // 27 peaks at 9232, a 14-bit value.
        assert_eq!(
            order_index_with(&n(27), &limits).unwrap(),
            OrderIndex::CapExceeded
        );
        assert!(order_index_with(&n(3), &limits).unwrap().is_converged());
    }

    #[test]
    fn order_index_beyond_u128() {
        // 2^200 + 1 is odd; one step gives 3·2^200 + 4 = 4(3·2^198 + 1).
        let big = Nat::pow2(200).succ();
        let direct = order_index(&big, 10_000).unwrap();
        let after = iterate(&big, 1).unwrap();
        match (direct, order_index(&after, 10_000).unwrap()) {
            (
                OrderIndex::Converged { tau, ind },
                OrderIndex::Converged {
                    tau: tau2,
                    ind: ind2,
                },
            ) => {
                assert_eq!(tau, tau2 + 1);
                assert_eq!(ind, ind2);
                assert_eq!(iterate(&big, tau).unwrap(), Nat::pow2(ind));
            }
            other => panic!("expected convergence, got {other:?}"),
        }
    }

    #[test]
    fn relative_speed_examples() {
        assert_eq!(relative_speed(&n(3), 1, 3).unwrap().to_string(), "3");
        let v = relative_speed(&n(3), 6, 7).unwrap();
        assert_eq!(v.as_integer(), Some(&n(1)));
        assert_eq!(v.power_of_two_exponent(), Some(0));
        assert!(relative_speed(&n(3), 4, 4).is_err());
        assert!(relative_speed(&n(3), 0, 4).is_err());
        // |f^1(3) - f^2(3)| = 5 over 1; |f^1(7) - f^3(7)| = |22 - 34| / 2 = 6.
        assert_eq!(relative_speed(&n(7), 1, 3).unwrap().to_string(), "6");
        // f^1(9)=28, f^4(9)=22: 6/3 = 2; f^1(9), f^5(9)=11: 17/4.
        assert_eq!(relative_speed(&n(9), 1, 5).unwrap().to_string(), "17/4");
        assert_eq!(relative_speed(&n(1), 1, 2).unwrap().to_string(), "0");
    }

    #[test]
    fn log_sum_examples() {
        assert_eq!(log_sum_partial(&n(1), 3).unwrap(), vec![0.0, 0.0, 0.0]);
        let sums = log_sum_partial(&n(3), 8).unwrap();
        let expected = (10.0f64 * 5.0 * 16.0 * 8.0 * 4.0 * 2.0).ln();
        assert!((sums[7] - expected).abs() < 1e-12);
        let sums = log_sum_partial(&n(27), 300).unwrap();
        // f^111(27) = 1 adds ln 1 = 0, so the sums settle at step 110.
        let settled = sums[109];
        assert!(sums[110..].iter().all(|&s| s == settled));
        assert!(sums[108] < settled);
    }

    #[test]
    fn chaining_and_soundness_to_ten_thousand() {
        for a in 1..=10_000u64 {
            let t = trajectory(&n(a), 100_000).unwrap();
            assert!(t.converged());
            let mut prev = n(a);
            for e in &t.elements {
                assert_eq!(*e, n(brute_f(prev.to_u64().unwrap())));
                if prev.is_odd() && !prev.is_one() {
                    assert!(e.is_even());
                }
                prev = e.clone();
            }
            let peak = t.elements.iter().chain([&t.start]).max().unwrap();
            assert_eq!(&t.peak, peak);

            let (tau, ind) = brute_order_index(a);
            assert_eq!(
                order_index(&n(a), 100_000).unwrap(),
                OrderIndex::Converged { tau, ind }
            );
            for m in 0..tau {
                assert_eq!(is_power_of_two(&iterate(&n(a), m).unwrap()), None);
            }
        }
    }

    #[test]
    fn speed_identity() {
        for a in 1..=1000u64 {
            let values: Vec<Nat> = std::iter::once(n(a))
                .chain(orbit(&n(a)).unwrap().take(50))
                .collect();
            for j in 1..=50u64 {
                for k in (j + 1)..=50 {
                    let v = relative_speed(&n(a), j, k).unwrap();
                    let lhs = v.numerator() * &n(k - j);
                    let rhs =
                        &values[k as usize].abs_diff(&values[j as usize]) * &n(v.denominator());
                    assert_eq!(lhs, rhs, "a={a} j={j} k={k}");
                }
            }
        }
    }

    proptest! {
        #[test]
        fn raising_the_cap_keeps_converged_answers(a in 1u64..1_000_000, cap in 1u64..400, extra in 1u64..1000) {
            let small = order_index(&n(a), cap).unwrap();
            if small.is_converged() {
                prop_assert_eq!(order_index(&n(a), cap + extra).unwrap(), small);
            }
        }

        #[test]
        fn speed_is_symmetric(a in 1u64..100_000, j in 1u64..60, k in 1u64..60) {
            prop_assume!(j != k);
            prop_assert_eq!(relative_speed(&n(a), j, k).unwrap(), relative_speed(&n(a), k, j).unwrap());
        }

        #[test]
        fn deterministic(a in 1u64..1_000_000) {
            prop_assert_eq!(trajectory(&n(a), 1000).unwrap(), trajectory(&n(a), 1000).unwrap());
            prop_assert_eq!(log_sum_partial(&n(a), 200).unwrap(), log_sum_partial(&n(a), 200).unwrap());
        }
    }
}
