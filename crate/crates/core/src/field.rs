//! Arithmetic in GF(2^n), 2 <= n <= 24, in the polynomial basis.
//!
//! Elements are plain integers: bit `i` is the coefficient of `x^i`. A
//! [`FieldSpec`] carries the degree and the reduction polynomial; every
//! operation is a method on it so the same integer can be interpreted in
//! several fields side by side (used by the basis-invariance checks).

use std::fmt;

use thiserror::Error;

/// A field element in polynomial-basis encoding.
pub type Elem = u32;

pub const MIN_DEGREE: u32 = 2;
pub const MAX_DEGREE: u32 = 24;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum FieldError {
    #[error("field degree {0} outside the supported range {MIN_DEGREE}..={MAX_DEGREE}")]
    DegreeOutOfRange(u32),
    #[error("polynomial {poly:x} is not of degree {n} with a constant term")]
    MalformedPolynomial { poly: u32, n: u32 },
    #[error("polynomial {poly:x} is reducible: it has an irreducible factor of degree {factor_degree}")]
    Reducible { poly: u32, factor_degree: u32 },
    #[error("zero has no multiplicative inverse")]
    ZeroInverse,
    #[error("GF(2^{k}) is not a subfield of GF(2^{n})")]
    NotASubfield { k: u32, n: u32 },
}

/// Carry-less product of two polynomials over GF(2).
fn clmul(a: u64, b: u64) -> u64 {
    let mut acc = 0;
    let mut b = b;
    let mut shift = 0;
    while b != 0 {
        if b & 1 == 1 {
            acc ^= a << shift;
        }
        b >>= 1;
        shift += 1;
    }
    acc
}

fn degree(p: u64) -> i32 {
    63 - p.leading_zeros() as i32
}

fn poly_rem(mut a: u64, m: u64) -> u64 {
    let dm = degree(m);
    while a != 0 && degree(a) >= dm {
        a ^= m << (degree(a) - dm);
    }
    a
}

fn poly_gcd(mut a: u64, mut b: u64) -> u64 {
    while b != 0 {
        let r = poly_rem(a, b);
        a = b;
        b = r;
    }
    a
}

/// Returns the degree of the smallest irreducible factor of `poly` if it has
/// one of degree at most `n / 2`, i.e. `None` exactly when `poly` is
/// irreducible.
fn smallest_factor_degree(poly: u32, n: u32) -> Option<u32> {
    let m = poly as u64;
    // h = x^(2^i) mod poly
    let mut h = 0b10u64;
    for i in 1..=n / 2 {
        h = poly_rem(clmul(h, h), m);
        if poly_gcd(m, h ^ 0b10) != 1 {
            return Some(i);
        }
    }
    None
}

/// Lexicographically least irreducible polynomial of degree `n`.
pub fn default_poly(n: u32) -> Result<u32, FieldError> {
    check_degree(n)?;
    let lo = (1u32 << n) | 1;
    let hi = 1u32 << (n + 1);
    (lo..hi).step_by(2).find(|&p| smallest_factor_degree(p, n).is_none()).ok_or(FieldError::DegreeOutOfRange(n))
}

fn check_degree(n: u32) -> Result<(), FieldError> {
    if (MIN_DEGREE..=MAX_DEGREE).contains(&n) {
        Ok(())
    } else {
        Err(FieldError::DegreeOutOfRange(n))
    }
}

/// The binary field GF(2^n) with a fixed reduction polynomial.
#[derive(Clone, Copy, PartialEq, Eq, Hash)]
pub struct FieldSpec {
    n: u32,
    poly: u32,
    /// Bit i holds Tr(x^i); the absolute trace is then a masked parity.
    trace_mask: u32,
}

impl fmt::Debug for FieldSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "GF(2^{})/{:x}", self.n, self.poly)
    }
}

impl FieldSpec {
    /// Validates `poly` (or picks the default one) and builds the field.
    pub fn new(n: u32, poly: Option<u32>) -> Result<Self, FieldError> {
        check_degree(n)?;
        let poly = match poly {
            None => default_poly(n)?,
            Some(p) => {
                if p >> n != 1 || p & 1 == 0 {
                    return Err(FieldError::MalformedPolynomial { poly: p, n });
                }
                if let Some(factor_degree) = smallest_factor_degree(p, n) {
                    return Err(FieldError::Reducible { poly: p, factor_degree });
                }
                p
            }
        };
        let mut spec = FieldSpec { n, poly, trace_mask: 0 };
        spec.trace_mask = (0..n).filter(|&i| spec.trace_by_frobenius(1 << i) == 1).fold(0, |m, i| m | (1 << i));
        Ok(spec)
    }

    pub fn with_default_poly(n: u32) -> Result<Self, FieldError> {
        Self::new(n, None)
    }

    pub fn degree(&self) -> u32 {
        self.n
    }

    pub fn poly(&self) -> u32 {
        self.poly
    }

    /// Number of field elements, 2^n.
    pub fn order(&self) -> usize {
        1usize << self.n
    }

    pub fn mask(&self) -> Elem {
        ((1u64 << self.n) - 1) as Elem
    }

    pub fn contains(&self, a: Elem) -> bool {
        a <= self.mask()
    }

    /// All elements in increasing encoding order.
    pub fn elements(&self) -> std::ops::Range<Elem> {
        0..(1u32 << self.n)
    }

    #[inline]
    pub fn add(&self, a: Elem, b: Elem) -> Elem {
        a ^ b
    }

    #[inline]
    pub fn mul(&self, a: Elem, b: Elem) -> Elem {
        let top = 1u32 << self.n;
        let mut a = a;
        let mut b = b;
        let mut acc = 0;
        while b != 0 {
            if b & 1 == 1 {
                acc ^= a;
            }
            b >>= 1;
            a <<= 1;
            if a & top != 0 {
                a ^= self.poly;
            }
        }
        acc
    }

    #[inline]
    pub fn square(&self, a: Elem) -> Elem {
        self.mul(a, a)
    }

    /// `a^d` by square-and-multiply, with `0^0 = 1`.
    pub fn pow(&self, a: Elem, d: u64) -> Elem {
        let mut base = a;
        let mut d = d;
        let mut acc = 1;
        while d != 0 {
            if d & 1 == 1 {
                acc = self.mul(acc, base);
            }
            base = self.square(base);
            d >>= 1;
        }
        acc
    }

    pub fn inv(&self, a: Elem) -> Result<Elem, FieldError> {
        if a == 0 {
            return Err(FieldError::ZeroInverse);
        }
        Ok(self.pow(a, (1u64 << self.n) - 2))
    }

    /// `a^(2^j)`.
    pub fn frobenius(&self, a: Elem, j: u32) -> Elem {
        (0..j % self.n).fold(a, |x, _| self.square(x))
    }

    /// The unique square root, `a^(2^(n-1))`.
    pub fn sqrt(&self, a: Elem) -> Elem {
        self.frobenius(a, self.n - 1)
    }

    /// Absolute trace onto GF(2), returned as 0 or 1.
    #[inline]
    pub fn trace(&self, a: Elem) -> u32 {
        (a & self.trace_mask).count_ones() & 1
    }

    /// Bit i of the mask is Tr(x^i).
    pub fn trace_mask(&self) -> u32 {
        self.trace_mask
    }

    fn trace_by_frobenius(&self, a: Elem) -> u32 {
        self.subfield_trace(a, self.n)
    }

    /// `sum_{i < m} a^(2^i)`: the absolute trace of GF(2^m) when `a` lies
    /// in that subfield. `m` need not divide `n`; callers that care check
    /// membership themselves.
    pub fn subfield_trace(&self, a: Elem, m: u32) -> Elem {
        let mut acc = 0;
        let mut x = a;
        for _ in 0..m {
            acc ^= x;
            x = self.square(x);
        }
        acc
    }

    /// `sum_{i < r} a^(2^(k i))` for the tower GF(2^(rk)) / GF(2^k).
    pub fn relative_trace(&self, tower: SubfieldTower, a: Elem) -> Elem {
        let mut acc = 0;
        let mut x = a;
        for _ in 0..tower.r {
            acc ^= x;
            x = self.frobenius(x, tower.k);
        }
        acc
    }

    /// Whether `a` lies in the subfield GF(2^m), i.e. `a^(2^m) = a`.
    pub fn in_subfield(&self, a: Elem, m: u32) -> bool {
        self.frobenius(a, m) == a
    }

    /// Least generator of the multiplicative group.
    pub fn primitive_element(&self) -> Elem {
        let order = (1u64 << self.n) - 1;
        let primes = prime_factors(order);
        (2..=self.mask()).find(|&g| primes.iter().all(|&p| self.pow(g, order / p) != 1)).unwrap_or(1)
    }
}

fn prime_factors(mut m: u64) -> Vec<u64> {
    let mut out = Vec::new();
    let mut p = 2;
    while p * p <= m {
        if m.is_multiple_of(p) {
            out.push(p);
            while m.is_multiple_of(p) {
                m /= p;
            }
        }
        p += 1;
    }
    if m > 1 {
        out.push(m);
    }
    out
}

/// The tower GF(2^(r k)) over GF(2^k), with r k equal to the ambient degree.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct SubfieldTower {
    pub k: u32,
    pub r: u32,
}

impl SubfieldTower {
    pub fn new(spec: &FieldSpec, k: u32) -> Result<Self, FieldError> {
        let n = spec.degree();
        if k == 0 || !n.is_multiple_of(k) {
            return Err(FieldError::NotASubfield { k, n });
        }
        Ok(SubfieldTower { k, r: n / k })
    }
}

pub fn gcd(mut a: u64, mut b: u64) -> u64 {
    while b != 0 {
        let r = a % b;
        a = b;
        b = r;
    }
    a
}
