//! Exact arithmetic in prime fields GF(q).
//!
//! The modulus is limited to 64-bit primes; products are widened to 128 bits
//! so no operation can overflow. Elements always hold a value in `[0, q)`.

use crate::error::{Error, Result};

/// An element of GF(q). The owning [`FieldCtx`] defines the modulus.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default, PartialOrd, Ord)]
pub struct Elem(u64);

impl Elem {
    pub const ZERO: Elem = Elem(0);
    pub const ONE: Elem = Elem(1);

    pub fn value(self) -> u64 {
        self.0
    }

    pub fn is_zero(self) -> bool {
        self.0 == 0
    }
}

impl std::fmt::Display for Elem {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{}", self.0)
    }
}

/// A prime field GF(q) together with a fixed multiplicative generator and the
/// prime factorization of q-1.
///
/// Immutable once constructed; all operations are pure, so a context can be
/// shared freely across threads.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FieldCtx {
    q: u64,
    g: Elem,
    factors: Vec<u64>,
}

impl FieldCtx {
    /// Builds the field context: primality check, factorization of q-1, and
    /// the smallest multiplicative generator.
    pub fn new(q: u64) -> Result<FieldCtx> {
        if q < 3 || !is_prime(q) {
            return Err(Error::NotPrime(q));
        }
        let factors = distinct_prime_factors(q - 1);
        let g = smallest_generator(q, &factors)?;
        Ok(FieldCtx { q, g, factors })
    }

    pub fn modulus(&self) -> u64 {
        self.q
    }

    pub fn generator(&self) -> Elem {
        self.g
    }

    /// Distinct prime factors of q-1.
    pub fn factors(&self) -> &[u64] {
        &self.factors
    }

    /// Reduces an arbitrary integer into the field.
    pub fn elem(&self, v: u64) -> Elem {
        Elem(v % self.q)
    }

    pub fn zero(&self) -> Elem {
        Elem(0)
    }

    pub fn one(&self) -> Elem {
        Elem(1)
    }

    pub fn add(&self, a: Elem, b: Elem) -> Elem {
        let s = a.0 + b.0;
        Elem(if s >= self.q { s - self.q } else { s })
    }

    pub fn sub(&self, a: Elem, b: Elem) -> Elem {
        Elem(if a.0 >= b.0 {
            a.0 - b.0
        } else {
            self.q - (b.0 - a.0)
        })
    }

    pub fn neg(&self, a: Elem) -> Elem {
        if a.0 == 0 {
            a
        } else {
            Elem(self.q - a.0)
        }
    }

    pub fn mul(&self, a: Elem, b: Elem) -> Elem {
        Elem((a.0 as u128 * b.0 as u128 % self.q as u128) as u64)
    }

    /// `a^e` by square-and-multiply; `e` is a plain non-negative exponent.
    pub fn pow(&self, a: Elem, mut e: u64) -> Elem {
        let mut base = a;
        let mut acc = Elem(1);
        while e > 0 {
            if e & 1 == 1 {
                acc = self.mul(acc, base);
            }
            base = self.mul(base, base);
            e >>= 1;
        }
        acc
    }

    /// Multiplicative inverse via Fermat's little theorem.
    pub fn inv(&self, a: Elem) -> Result<Elem> {
        if a.0 == 0 {
            return Err(Error::DivisionByZero);
        }
        Ok(self.pow(a, self.q - 2))
    }

    pub fn div(&self, a: Elem, b: Elem) -> Result<Elem> {
        Ok(self.mul(a, self.inv(b)?))
    }

    /// A primitive K-th root of unity `g^((q-1)/K)`; requires `K | q-1`.
    pub fn root_of_unity(&self, k: u64) -> Result<Elem> {
        if k == 0 || !(self.q - 1).is_multiple_of(k) {
            return Err(Error::OrderNotDividing {
                order: k,
                qm1: self.q - 1,
            });
        }
        Ok(self.pow(self.g, (self.q - 1) / k))
    }

    /// Entrywise sum of two equal-length vectors.
    pub fn vec_add(&self, a: &[Elem], b: &[Elem]) -> Vec<Elem> {
        debug_assert_eq!(a.len(), b.len());
        a.iter().zip(b).map(|(&x, &y)| self.add(x, y)).collect()
    }

    /// Adds `b` into `a` entrywise.
    pub fn vec_add_into(&self, a: &mut [Elem], b: &[Elem]) {
        debug_assert_eq!(a.len(), b.len());
        for (x, &y) in a.iter_mut().zip(b) {
            *x = self.add(*x, y);
        }
    }

    /// Scales a vector by a field coefficient.
    pub fn vec_scale(&self, c: Elem, v: &[Elem]) -> Vec<Elem> {
        v.iter().map(|&x| self.mul(c, x)).collect()
    }

    /// Adds `c * v` into the accumulator.
    pub fn vec_add_scaled(&self, acc: &mut [Elem], c: Elem, v: &[Elem]) {
        debug_assert_eq!(acc.len(), v.len());
        for (a, &x) in acc.iter_mut().zip(v) {
            *a = self.add(*a, self.mul(c, x));
        }
    }
}

/// The smallest generator of GF(q)*, verified against the factorization of q-1.
pub fn find_generator(q: u64) -> Result<Elem> {
    if q < 3 || !is_prime(q) {
        return Err(Error::NotPrime(q));
    }
    let factors = distinct_prime_factors(q - 1);
    smallest_generator(q, &factors)
}

fn smallest_generator(q: u64, factors: &[u64]) -> Result<Elem> {
    let ctx = FieldCtx {
        q,
        g: Elem(0),
        factors: Vec::new(),
    };
    for cand in 2..q {
        let c = Elem(cand);
        if factors.iter().all(|&r| ctx.pow(c, (q - 1) / r) != Elem(1)) {
            return Ok(c);
        }
    }
    Err(Error::NotPrime(q))
}

/// Writes `k` in base `radix` with `digits` digits and reverses the digit order.
///
/// An involution on `[0, radix^digits)`. The bound must be representable:
/// a reversal can move low digits into positions past the top of u64.
pub fn digit_reverse(k: u64, radix: u64, digits: u32) -> Result<u64> {
    let bound = radix
        .checked_pow(digits)
        .ok_or_else(|| Error::BadShape(format!("{radix}^{digits} overflows u64")))?;
    if k >= bound {
        return Err(Error::OutOfRange { value: k, bound });
    }
    let mut rest = k;
    let mut out = 0;
    for _ in 0..digits {
        out = out * radix + rest % radix;
        rest /= radix;
    }
    Ok(out)
}

/// Deterministic Miller-Rabin for u64 (fixed witness set).
pub fn is_prime(n: u64) -> bool {
    if n < 2 {
        return false;
    }
    for p in [2u64, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37] {
        if n == p {
            return true;
        }
        if n.is_multiple_of(p) {
            return false;
        }
    }
    let mut d = n - 1;
    let mut s = 0;
    while d.is_multiple_of(2) {
        d /= 2;
        s += 1;
    }
    let mul = |a: u64, b: u64| (a as u128 * b as u128 % n as u128) as u64;
    let powmod = |mut a: u64, mut e: u64| {
        let mut acc = 1u64;
        while e > 0 {
            if e & 1 == 1 {
                acc = mul(acc, a);
            }
            a = mul(a, a);
            e >>= 1;
        }
        acc
    };
    'witness: for a in [2u64, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37] {
        let mut x = powmod(a, d);
        if x == 1 || x == n - 1 {
            continue;
        }
        for _ in 0..s - 1 {
            x = mul(x, x);
            if x == n - 1 {
                continue 'witness;
            }
        }
        return false;
    }
    true
}

/// Distinct prime factors by trial division (desk-scale moduli).
fn distinct_prime_factors(mut n: u64) -> Vec<u64> {
    let mut out = Vec::new();
    let mut d = 2;
    while d as u128 * d as u128 <= n as u128 {
        if n.is_multiple_of(d) {
            out.push(d);
            while n.is_multiple_of(d) {
                n /= d;
            }
        }
        d += 1;
    }
    if n > 1 {
        out.push(n);
    }
    out
}
