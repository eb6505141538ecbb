//! Primality, Sophie Germain and Cunningham chains, and factorization
//! (for the prime-omega and Möbius functions).

use std::sync::OnceLock;

use num_bigint::BigUint;
use num_integer::Integer;
use num_traits::{One, ToPrimitive, Zero};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::error::{require_positive, Error, Result};
use crate::nat::Nat;

pub const DEFAULT_MR_ROUNDS: u32 = 40;
pub const DEFAULT_FACTOR_BUDGET_BITS: u64 = 96;

const SMALL_PRIME_LIMIT: u64 = 1 << 16;
// Bases that make Miller-Rabin exact for every n below EXACT_LIMIT (about 2^81.4).
const WITNESSES: [u64; 13] = [2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37, 41];
const EXACT_LIMIT: u128 = 3_317_044_064_679_887_385_961_981;
const MR_SEED: u64 = 0x5eed_c011_a72b_0001;

fn small_primes() -> &'static [u64] {
    static PRIMES: OnceLock<Vec<u64>> = OnceLock::new();
    PRIMES.get_or_init(|| {
        let limit = SMALL_PRIME_LIMIT as usize;
        let mut composite = vec![false; limit];
        let mut out = Vec::new();
        for i in 2..limit {
            if !composite[i] {
                out.push(i as u64);
                for j in (i * i..limit).step_by(i) {
                    composite[j] = true;
                }
            }
        }
        out
    })
}

/// The first 256 primes packed into groups whose product fits a `u64`, so a
/// big value needs one multi-precision reduction per group.
fn small_prime_groups() -> &'static [(u64, Vec<u64>)] {
    static GROUPS: OnceLock<Vec<(u64, Vec<u64>)>> = OnceLock::new();
    GROUPS.get_or_init(|| {
        let mut groups: Vec<(u64, Vec<u64>)> = Vec::new();
        for &p in small_primes().iter().take(256) {
            match groups.last_mut() {
                Some((product, members)) if product.checked_mul(p).is_some() => {
                    *product *= p;
                    members.push(p);
                }
                _ => groups.push((p, vec![p])),
            }
        }
        groups
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Primality {
    Composite,
    /// Exact verdict (input below about 3.3·10^24).
    Prime,
    /// Passed every probabilistic round.
    ProbablePrime,
}

impl Primality {
    pub fn is_prime_like(self) -> bool {
        !matches!(self, Primality::Composite)
    }
}

fn mul_mod(a: u64, b: u64, m: u64) -> u64 {
    (u128::from(a) * u128::from(b) % u128::from(m)) as u64
}

fn pow_mod(mut base: u64, mut exp: u64, m: u64) -> u64 {
    let mut acc = 1 % m;
    base %= m;
    while exp > 0 {
        if exp & 1 == 1 {
            acc = mul_mod(acc, base, m);
        }
        base = mul_mod(base, base, m);
        exp >>= 1;
    }
    acc
}

fn is_prime_u64(n: u64) -> bool {
    if n < 2 {
        return false;
    }
    for &p in &WITNESSES {
        if n.is_multiple_of(p) {
            return n == p;
        }
    }
    let s = (n - 1).trailing_zeros();
    let d = (n - 1) >> s;
    'witness: for &a in &WITNESSES {
        let mut x = pow_mod(a, d, n);
        if x == 1 || x == n - 1 {
            continue;
        }
        for _ in 1..s {
            x = mul_mod(x, x, n);
            if x == n - 1 {
                continue 'witness;
            }
        }
        return false;
    }
    true
}

fn strong_probable_prime(n: &BigUint, d: &BigUint, s: u64, base: &BigUint) -> bool {
    let n_minus_1 = n - 1u8;
    let mut x = base.modpow(d, n);
    if x.is_one() || x == n_minus_1 {
        return true;
    }
    for _ in 1..s {
        x = (&x * &x) % n;
        if x == n_minus_1 {
            return true;
        }
    }
    false
}

fn passes_trial_division(n: &BigUint) -> bool {
    !small_prime_groups().iter().any(|(product, primes)| {
        let r = (n % product).to_u64().expect("residue below a u64 modulus");
        primes.iter().any(|&p| r.is_multiple_of(p))
    })
}

fn is_prime_exact_big(n: &BigUint) -> bool {
    if !passes_trial_division(n) {
        return false;
    }
    let n_minus_1 = n - 1u8;
    let s = n_minus_1.trailing_zeros().expect("n - 1 is nonzero");
    let d = &n_minus_1 >> s;
    WITNESSES
        .iter()
        .all(|&a| strong_probable_prime(n, &d, s, &BigUint::from(a)))
}

fn is_probable_prime_big(n: &BigUint, rounds: u32) -> bool {
    if !passes_trial_division(n) {
        return false;
    }
    let n_minus_1 = n - 1u8;
    let s = n_minus_1.trailing_zeros().expect("n - 1 is nonzero");
    let d = &n_minus_1 >> s;
    if !strong_probable_prime(n, &d, s, &BigUint::from(2u8)) {
        return false;
    }
    // Fixed seed: verdicts must be reproducible across runs.
    let mut rng = ChaCha8Rng::seed_from_u64(MR_SEED);
    (1..rounds).all(|_| {
        let a = BigUint::from(rng.gen_range(3..u64::MAX));
        strong_probable_prime(n, &d, s, &a)
    })
}

pub fn primality(n: &Nat, rounds: u32) -> Primality {
    match n.to_u64() {
        Some(v) if is_prime_u64(v) => Primality::Prime,
        Some(_) => Primality::Composite,
        None if n.to_u128().is_some_and(|v| v < EXACT_LIMIT) => {
            if is_prime_exact_big(&n.to_biguint()) {
                Primality::Prime
            } else {
                Primality::Composite
            }
        }
        None if is_probable_prime_big(&n.to_biguint(), rounds.max(1)) => Primality::ProbablePrime,
        None => Primality::Composite,
    }
}

pub fn is_prime(n: &Nat) -> bool {
    primality(n, DEFAULT_MR_ROUNDS).is_prime_like()
}

/// `p` and `2p + 1` both prime.
pub fn is_sophie_germain(p: &Nat) -> bool {
    is_prime(p) && is_prime(&p.double().succ())
}

/// Length of the run `p, 2p+1, 2(2p+1)+1, ...` of primes.
pub fn cunningham_length(p: &Nat) -> Result<u32> {
    if !is_prime(p) {
        return Err(Error::NotPrime(p.clone()));
    }
    let mut len = 1;
    let mut x = p.double().succ();
    while is_prime(&x) {
        len += 1;
        x = x.double().succ();
    }
    Ok(len)
}

/// Prime factorization with multiplicities, primes strictly increasing.
#[derive(Debug, Clone, PartialEq, Eq, Default, Serialize)]
pub struct FactorMultiset {
    pub factors: Vec<(Nat, u32)>,
}

impl FactorMultiset {
    fn from_primes(mut primes: Vec<Nat>) -> Self {
        primes.sort();
        let mut factors: Vec<(Nat, u32)> = Vec::new();
        for p in primes {
            match factors.last_mut() {
                Some((q, e)) if *q == p => *e += 1,
                _ => factors.push((p, 1)),
            }
        }
        FactorMultiset { factors }
    }

    /// Ω: prime factors counted with multiplicity.
    pub fn omega(&self) -> u32 {
        self.factors.iter().map(|(_, e)| e).sum()
    }

    pub fn is_squarefree(&self) -> bool {
        self.factors.iter().all(|&(_, e)| e == 1)
    }

    pub fn mobius(&self) -> i8 {
        if !self.is_squarefree() {
            0
        } else if self.factors.len().is_multiple_of(2) {
            1
        } else {
            -1
        }
    }

    pub fn product(&self) -> Nat {
        self.factors
            .iter()
            .fold(Nat::ONE, |acc, (p, e)| (0..*e).fold(acc, |acc, _| &acc * p))
    }
}

pub fn factorize(n: &Nat) -> Result<FactorMultiset> {
    factorize_with_budget(n, DEFAULT_FACTOR_BUDGET_BITS)
}

pub fn factorize_with_budget(n: &Nat, budget_bits: u64) -> Result<FactorMultiset> {
    require_positive(n, "factorization input")?;
    if n.bits() > budget_bits {
        return Err(Error::FactorBudgetExceeded {
            value: n.clone(),
            bits: n.bits(),
            budget_bits,
        });
    }
    let mut primes = Vec::new();
    match n.to_u64() {
        Some(v) => factor_u64(v, &mut primes),
        None => factor_big(n.to_biguint(), &mut primes),
    }
    Ok(FactorMultiset::from_primes(primes))
}

pub fn omega(n: &Nat) -> Result<u32> {
    Ok(factorize(n)?.omega())
}

pub fn mobius(n: &Nat) -> Result<i8> {
    Ok(factorize(n)?.mobius())
}

fn factor_u64(mut n: u64, out: &mut Vec<Nat>) {
    for &p in small_primes() {
        if p * p > n {
            break;
        }
        while n.is_multiple_of(p) {
            out.push(Nat::from(p));
            n /= p;
        }
    }
    split_u64(n, out);
}

fn split_u64(n: u64, out: &mut Vec<Nat>) {
    if n == 1 {
        return;
    }
    if is_prime_u64(n) {
        out.push(Nat::from(n));
        return;
    }
    let d = rho_u64(n);
    split_u64(d, out);
    split_u64(n / d, out);
}

/// Brent's variant of Pollard rho; `n` must be composite.
fn rho_u64(n: u64) -> u64 {
    if n.is_multiple_of(2) {
        return 2;
    }
    const BATCH: u64 = 128;
    for c in 1..n {
        let f = |x: u64| ((u128::from(x) * u128::from(x) + u128::from(c)) % u128::from(n)) as u64;
        let (mut y, mut r, mut q, mut g) = (2u64, 1u64, 1u64, 1u64);
        let (mut x, mut ys) = (y, y);
        while g == 1 {
            x = y;
            for _ in 0..r {
                y = f(y);
            }
            let mut k = 0;
            while k < r && g == 1 {
                ys = y;
                for _ in 0..BATCH.min(r - k) {
                    y = f(y);
                    q = mul_mod(q, x.abs_diff(y), n);
                }
                g = q.gcd(&n);
                k += BATCH;
            }
            r *= 2;
        }
        if g == n {
            loop {
                ys = f(ys);
                g = x.abs_diff(ys).gcd(&n);
                if g > 1 {
                    break;
                }
            }
        }
        if g != n {
            return g;
        }
    }
    unreachable!("rho found no factor of composite {n}")
}

fn factor_big(mut n: BigUint, out: &mut Vec<Nat>) {
    for &p in small_primes() {
        if (&n % p).is_zero() {
            while (&n % p).is_zero() {
                out.push(Nat::from(p));
                n /= p;
            }
        }
        if let Some(v) = n.to_u64() {
            return factor_u64(v, out);
        }
    }
    split_big(n, out);
}

fn split_big(n: BigUint, out: &mut Vec<Nat>) {
    if let Some(v) = n.to_u64() {
        return split_u64(v, out);
    }
    if primality(&Nat::from(n.clone()), DEFAULT_MR_ROUNDS).is_prime_like() {
        out.push(Nat::from(n));
        return;
    }
    let d = rho_big(&n);
    let rest = &n / &d;
    split_big(d, out);
    split_big(rest, out);
}

fn rho_big(n: &BigUint) -> BigUint {
    const BATCH: u64 = 128;
    let diff = |a: &BigUint, b: &BigUint| if a >= b { a - b } else { b - a };
    let mut c = BigUint::one();
    loop {
        let f = |x: &BigUint| (x * x + &c) % n;
        let (mut y, mut r, mut q, mut g) =
            (BigUint::from(2u8), 1u64, BigUint::one(), BigUint::one());
        let (mut x, mut ys) = (y.clone(), y.clone());
        while g.is_one() {
            x = y.clone();
            for _ in 0..r {
                y = f(&y);
            }
            let mut k = 0;
            while k < r && g.is_one() {
                ys = y.clone();
                for _ in 0..BATCH.min(r - k) {
                    y = f(&y);
                    q = (&q * diff(&x, &y)) % n;
                }
                g = q.gcd(n);
                k += BATCH;
            }
            r *= 2;
        }
        if &g == n {
            loop {
                ys = f(&ys);
                g = diff(&x, &ys).gcd(n);
                if !g.is_one() {
                    break;
                }
            }
        }
        if &g != n {
            return g;
        }
        c += 1u8;
    }
}
