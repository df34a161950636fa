//! Slow reference arithmetic written without the library, used as an oracle.
#![allow(dead_code)]

use std::collections::BTreeMap;

pub struct Naive {
    pub n: u32,
    pub poly: u32,
}

impl Naive {
    pub fn new(n: u32, poly: u32) -> Self {
        Naive { n, poly }
    }

    pub fn size(&self) -> u32 {
        1 << self.n
    }

    /// Schoolbook product then long division.
    pub fn mul(&self, a: u32, b: u32) -> u32 {
        let mut prod: u64 = 0;
        for i in 0..self.n {
            if (b >> i) & 1 == 1 {
                prod ^= (a as u64) << i;
            }
        }
        for bit in (self.n..2 * self.n).rev() {
            if (prod >> bit) & 1 == 1 {
                prod ^= (self.poly as u64) << (bit - self.n);
            }
        }
        prod as u32
    }

    pub fn pow(&self, a: u32, d: u64) -> u32 {
        let mut r = 1;
        for i in (0..64).rev() {
            r = self.mul(r, r);
            if (d >> i) & 1 == 1 {
                r = self.mul(r, a);
            }
        }
        r
    }

    pub fn trace(&self, a: u32) -> u32 {
        let mut t = 0;
        let mut x = a;
        for _ in 0..self.n {
            t ^= x;
            x = self.mul(x, x);
        }
        assert!(t <= 1, "trace left GF(2)");
        t
    }

    pub fn power_lut(&self, d: u64) -> Vec<u32> {
        (0..self.size()).map(|x| self.pow(x, d)).collect()
    }

    /// Max DDT entry over a != 0.
    pub fn delta(&self, f: &[u32]) -> u32 {
        let size = self.size() as usize;
        let mut best = 0;
        let mut count = vec![0u32; size];
        for a in 1..size {
            count.iter_mut().for_each(|c| *c = 0);
            for x in 0..size {
                count[(f[x] ^ f[x ^ a]) as usize] += 1;
            }
            best = best.max(*count.iter().max().unwrap());
        }
        best
    }

    /// Term-by-term Walsh coefficient.
    pub fn walsh(&self, f: &[u32], a: u32, b: u32) -> i64 {
        (0..self.size())
            .map(|x| {
                let e = self.trace(self.mul(a, x)) ^ self.trace(self.mul(b, f[x as usize]));
                1 - 2 * e as i64
            })
            .sum()
    }

    /// Full spectrum over all a and b != 0. Each `x -> Tr(a x)` is a linear
    /// form, so rows come from a textbook Hadamard transform indexed by
    /// the form's bit mask.
    pub fn spectrum(&self, f: &[u32]) -> BTreeMap<i64, u64> {
        let size = self.size() as usize;
        let tr: Vec<u32> = (0..self.size()).map(|x| self.trace(x)).collect();
        let mask = |a: u32| -> usize { (0..self.n).map(|i| (tr[self.mul(a, 1 << i) as usize] as usize) << i).sum() };
        let mut hit = vec![false; size];
        for a in 0..self.size() {
            assert!(!std::mem::replace(&mut hit[mask(a)], true), "trace forms must be distinct");
        }
        let mut out = BTreeMap::new();
        let mut row = vec![0i64; size];
        for b in 1..self.size() {
            let bm = mask(b);
            for x in 0..size {
                row[x] = if (f[x] as usize & bm).count_ones().is_multiple_of(2) { 1 } else { -1 };
            }
            let mut h = 1;
            while h < size {
                for i in (0..size).step_by(2 * h) {
                    for j in i..i + h {
                        let (u, v) = (row[j], row[j + h]);
                        row[j] = u + v;
                        row[j + h] = u - v;
                    }
                }
                h *= 2;
            }
            for &w in &row {
                *out.entry(w).or_insert(0) += 1;
            }
        }
        out
    }

    pub fn walsh_max(&self, f: &[u32]) -> u64 {
        self.spectrum(f).keys().map(|v| v.unsigned_abs()).max().unwrap()
    }
}

pub fn gcd(a: u64, b: u64) -> u64 {
    if b == 0 {
        a
    } else {
        gcd(b, a % b)
    }
}

/// First polynomial of degree n with no factor of degree <= n/2, by trial
/// division.
pub fn least_irreducible(n: u32) -> u32 {
    let divides = |p: u32, q: u32| {
        let mut r = p;
        let dq = 31 - q.leading_zeros();
        while r != 0 && 31 - r.leading_zeros() >= dq {
            r ^= q << (31 - r.leading_zeros() - dq);
        }
        r == 0
    };
    ((1u32 << n)..(1 << (n + 1))).find(|&p| (2u32..(1 << (n / 2 + 1))).all(|q| !divides(p, q))).unwrap()
}
