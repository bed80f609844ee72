//! Finite fields `GF(q)` for prime powers `q <= 256`.
//!
//! An element of `GF(p^m)` is a polynomial `c_0 + c_1 x + ... + c_{m-1} x^{m-1}`
//! over `GF(p)` reduced modulo a fixed monic irreducible of degree `m`. It is
//! stored as the integer `c_0 + c_1 p + ... + c_{m-1} p^{m-1}`, which is also
//! the element order used by every enumeration in the crate. For prime
//! fields this is simply the residue.
//!
//! Arithmetic goes through full addition and multiplication tables, built
//! once per field and shared behind an `Arc`.

use std::fmt;
use std::sync::Arc;

use crate::error::{Error, Result};

pub const MAX_ORDER: u32 = 256;

/// An element of some [`Field`], by its integer encoding.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Elem(u8);

impl Elem {
    pub const ZERO: Elem = Elem(0);
    pub const ONE: Elem = Elem(1);

    #[inline]
    pub fn index(self) -> usize {
        self.0 as usize
    }

    #[inline]
    pub fn is_zero(self) -> bool {
        self.0 == 0
    }

    /// Element with encoding `i`; callers guarantee `i < q`.
    #[inline]
    pub(crate) fn from_index_unchecked(i: usize) -> Elem {
        debug_assert!(i < MAX_ORDER as usize);
        Elem(i as u8)
    }
}

impl fmt::Display for Elem {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

struct Tables {
    q: u32,
    p: u32,
    m: u32,
    modulus: Vec<u32>,
    add: Vec<u8>,
    mul: Vec<u8>,
    neg: Vec<u8>,
    inv: Vec<u8>,
}

/// Arithmetic context for `GF(q)`. Cheap to clone.
#[derive(Clone)]
pub struct Field {
    t: Arc<Tables>,
}

impl PartialEq for Field {
    fn eq(&self, other: &Self) -> bool {
        self.t.q == other.t.q
    }
}

impl Eq for Field {}

impl fmt::Debug for Field {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Field")
            .field("q", &self.t.q)
            .field("p", &self.t.p)
            .field("m", &self.t.m)
            .field("modulus", &self.t.modulus)
            .finish()
    }
}

impl Field {
    /// Builds `GF(q)`.
    ///
    /// Extension fields use the least monic irreducible polynomial of degree
    /// `m` under the element encoding above; irreducibility is re-checked by
    /// exhaustive factor search every time.
    pub fn new(q: u32) -> Result<Field> {
        if q < 2 {
            return Err(Error::invalid(format!(
                "field order must be at least 2, got {q}"
            )));
        }
        let (p, m) = prime_power(q).ok_or(Error::NotPrimePower(q))?;
        if q > MAX_ORDER {
            return Err(Error::UnsupportedSize(q));
        }
        let modulus = if m == 1 {
            Vec::new()
        } else {
            least_irreducible(p, m as usize)
        };
        Ok(Field {
            t: Arc::new(Tables::build(q, p, m, modulus)),
        })
    }

    pub fn order(&self) -> u32 {
        self.t.q
    }

    pub fn characteristic(&self) -> u32 {
        self.t.p
    }

    pub fn degree(&self) -> u32 {
        self.t.m
    }

    /// Coefficients of the reduction polynomial, least degree first, including
    /// the leading 1. Empty for prime fields.
    pub fn modulus(&self) -> &[u32] {
        &self.t.modulus
    }

    pub fn zero(&self) -> Elem {
        Elem::ZERO
    }

    pub fn one(&self) -> Elem {
        Elem::ONE
    }

    pub fn elem(&self, index: u32) -> Result<Elem> {
        if index < self.t.q {
            Ok(Elem(index as u8))
        } else {
            Err(Error::invalid(format!(
                "{index} is not an element of GF({})",
                self.t.q
            )))
        }
    }

    /// All elements in canonical order.
    pub fn elements(&self) -> impl Iterator<Item = Elem> + '_ {
        (0..self.t.q).map(|i| Elem(i as u8))
    }

    /// Polynomial coefficients of `a`, least degree first; always `m` entries.
    pub fn coeffs(&self, a: Elem) -> Vec<u32> {
        let p = self.t.p;
        let mut v = a.0 as u32;
        (0..self.t.m)
            .map(|_| {
                let c = v % p;
                v /= p;
                c
            })
            .collect()
    }

    pub fn from_coeffs(&self, coeffs: &[u32]) -> Result<Elem> {
        let p = self.t.p;
        if coeffs.len() != self.t.m as usize || coeffs.iter().any(|&c| c >= p) {
            return Err(Error::invalid(format!(
                "coefficients {coeffs:?} do not describe an element of GF({})",
                self.t.q
            )));
        }
        let idx = coeffs.iter().rev().fold(0u32, |acc, &c| acc * p + c);
        Ok(Elem(idx as u8))
    }

    #[inline]
    pub fn add(&self, a: Elem, b: Elem) -> Elem {
        Elem(self.t.add[a.index() * self.t.q as usize + b.index()])
    }

    #[inline]
    pub fn neg(&self, a: Elem) -> Elem {
        Elem(self.t.neg[a.index()])
    }

    #[inline]
    pub fn sub(&self, a: Elem, b: Elem) -> Elem {
        self.add(a, self.neg(b))
    }

    #[inline]
    pub fn mul(&self, a: Elem, b: Elem) -> Elem {
        Elem(self.t.mul[a.index() * self.t.q as usize + b.index()])
    }

    pub fn inv(&self, a: Elem) -> Result<Elem> {
        if a.is_zero() {
            Err(Error::DivisionByZero)
        } else {
            Ok(Elem(self.t.inv[a.index()]))
        }
    }

    pub fn div(&self, a: Elem, b: Elem) -> Result<Elem> {
        Ok(self.mul(a, self.inv(b)?))
    }

    pub fn pow(&self, a: Elem, mut e: u64) -> Elem {
        let (mut base, mut acc) = (a, Elem::ONE);
        while e > 0 {
            if e & 1 == 1 {
                acc = self.mul(acc, base);
            }
            base = self.mul(base, base);
            e >>= 1;
        }
        acc
    }

    /// Inverse of a known-nonzero element; used in elimination loops.
    #[inline]
    pub(crate) fn inv_nonzero(&self, a: Elem) -> Elem {
        debug_assert!(!a.is_zero());
        Elem(self.t.inv[a.index()])
    }
}

impl Tables {
    fn build(q: u32, p: u32, m: u32, modulus: Vec<u32>) -> Tables {
        let qs = q as usize;
        let to_coeffs = |mut v: u32| -> Vec<u32> {
            (0..m)
                .map(|_| {
                    let c = v % p;
                    v /= p;
                    c
                })
                .collect()
        };
        let from_coeffs =
            |c: &[u32]| -> u8 { c.iter().rev().fold(0u32, |acc, &x| acc * p + x) as u8 };
        let coeffs: Vec<Vec<u32>> = (0..q).map(to_coeffs).collect();

        let mut add = vec![0u8; qs * qs];
        let mut mul = vec![0u8; qs * qs];
        for a in 0..qs {
            for b in 0..qs {
                let s: Vec<u32> = coeffs[a]
                    .iter()
                    .zip(&coeffs[b])
                    .map(|(x, y)| (x + y) % p)
                    .collect();
                add[a * qs + b] = from_coeffs(&s);
                let prod = if m == 1 {
                    vec![(coeffs[a][0] * coeffs[b][0]) % p]
                } else {
                    poly_mulmod(&coeffs[a], &coeffs[b], &modulus, p)
                };
                mul[a * qs + b] = from_coeffs(&prod);
            }
        }
        let neg = (0..qs)
            .map(|a| {
                (0..qs)
                    .find(|&b| add[a * qs + b] == 0)
                    .expect("additive inverse") as u8
            })
            .collect();
        let inv = (0..qs)
            .map(|a| {
                if a == 0 {
                    0
                } else {
                    (1..qs)
                        .find(|&b| mul[a * qs + b] == 1)
                        .expect("field has no zero divisors") as u8
                }
            })
            .collect();
        Tables {
            q,
            p,
            m,
            modulus,
            add,
            mul,
            neg,
            inv,
        }
    }
}

/// Returns `(p, m)` with `q = p^m` when `q` is a prime power.
fn prime_power(q: u32) -> Option<(u32, u32)> {
    let p = (2..=q).find(|d| q.is_multiple_of(*d))?;
    let (mut rest, mut m) = (q, 0);
    while rest % p == 0 {
        rest /= p;
        m += 1;
    }
    (rest == 1).then_some((p, m))
}

/// Product of two reduced polynomials modulo a monic `modulus` (all least degree first).
fn poly_mulmod(a: &[u32], b: &[u32], modulus: &[u32], p: u32) -> Vec<u32> {
    let m = modulus.len() - 1;
    let mut prod = vec![0u32; a.len() + b.len()];
    for (i, &x) in a.iter().enumerate() {
        for (j, &y) in b.iter().enumerate() {
            prod[i + j] = (prod[i + j] + x * y) % p;
        }
    }
    for deg in (m..prod.len()).rev() {
        let lead = prod[deg];
        if lead != 0 {
            for (i, &c) in modulus.iter().enumerate() {
                let idx = deg - m + i;
                prod[idx] = (prod[idx] + (p - lead) * c) % p;
            }
        }
    }
    prod.truncate(m);
    prod
}

/// Remainder of `num` divided by monic `den` over GF(p), least degree first.
fn poly_rem(num: &[u32], den: &[u32], p: u32) -> Vec<u32> {
    let mut r = num.to_vec();
    let dd = den.len() - 1;
    while r.len() > dd {
        let lead = *r.last().unwrap();
        let shift = r.len() - 1 - dd;
        if lead != 0 {
            for (i, &c) in den.iter().enumerate() {
                r[shift + i] = (r[shift + i] + (p - lead) * c % p) % p;
            }
        }
        r.pop();
    }
    r
}

/// Monic polynomials of exact degree `deg`, in encoding order of their lower coefficients.
fn monic_polys(p: u32, deg: usize) -> impl Iterator<Item = Vec<u32>> {
    let count = (p as u64).pow(deg as u32);
    (0..count).map(move |mut v| {
        let mut c: Vec<u32> = (0..deg)
            .map(|_| {
                let x = (v % p as u64) as u32;
                v /= p as u64;
                x
            })
            .collect();
        c.push(1);
        c
    })
}

/// True when the monic polynomial `f` has no monic factor of degree `1..=deg/2`.
pub(crate) fn is_irreducible(f: &[u32], p: u32) -> bool {
    let deg = f.len() - 1;
    (1..=deg / 2).all(|d| monic_polys(p, d).all(|g| poly_rem(f, &g, p).iter().any(|&c| c != 0)))
}

fn least_irreducible(p: u32, m: usize) -> Vec<u32> {
    monic_polys(p, m)
        .find(|f| is_irreducible(f, p))
        .expect("an irreducible polynomial exists in every degree")
}
