//! Finite fields `F_q = F_p[x]/(modulus)` as descriptors.
//!
//! A [`FiniteField`] only records `p`, the degree `m` and a monic irreducible
//! modulus. Arithmetic lives in [`crate::witt::WittRing`]: the field itself is
//! the length-one Witt ring `W_1(F_q)`, obtained with
//! [`FiniteField::residue_ring`].

use std::fmt;

use crate::witt::{RingError, WittRing};

/// Conway polynomials for the small fields used as deterministic fixtures.
/// Coefficients are listed from the constant term upwards.
const BUILTIN_MODULI: &[(u64, usize, &[u64])] = &[
    (2, 2, &[1, 1, 1]),
    (2, 3, &[1, 1, 0, 1]),
    (2, 4, &[1, 1, 0, 0, 1]),
    (3, 2, &[2, 2, 1]),
    (3, 3, &[1, 2, 0, 1]),
    (3, 4, &[2, 0, 0, 2, 1]),
    (5, 2, &[2, 4, 1]),
    (5, 4, &[2, 4, 4, 0, 1]),
    (7, 2, &[3, 6, 1]),
];

#[derive(Clone, PartialEq, Eq, Hash)]
pub struct FiniteField {
    p: u64,
    modulus: Vec<u64>,
}

impl FiniteField {
    /// The prime field `F_p`, presented with modulus `x`.
    pub fn prime(p: u64) -> Result<Self, RingError> {
        if !is_prime(p) {
            return Err(RingError::NotPrime(p));
        }
        Ok(FiniteField { p, modulus: vec![0, 1] })
    }

    /// `F_p[x]/(modulus)` for a user supplied monic irreducible polynomial.
    pub fn new(p: u64, modulus: Vec<u64>) -> Result<Self, RingError> {
        if !is_prime(p) {
            return Err(RingError::NotPrime(p));
        }
        let modulus: Vec<u64> = modulus.into_iter().map(|c| c % p).collect();
        let modulus = trim(modulus);
        if modulus.len() < 2 {
            return Err(RingError::BadModulus("modulus must have degree at least 1".into()));
        }
        if *modulus.last().unwrap() != 1 {
            return Err(RingError::BadModulus("modulus must be monic".into()));
        }
        if !is_irreducible(p, &modulus) {
            return Err(RingError::BadModulus(format!(
                "{} is reducible over F_{}",
                format_poly(&modulus),
                p
            )));
        }
        Ok(FiniteField { p, modulus })
    }

    /// The field of order `q`, using the built-in table when `q` is a proper
    /// prime power and the first irreducible polynomial otherwise.
    pub fn with_order(q: u64) -> Result<Self, RingError> {
        let (p, m) = prime_power(q).ok_or(RingError::NotPrimePower(q))?;
        Self::with_degree(p, m)
    }

    /// `F_{p^m}` with the table modulus if one is known, otherwise the
    /// lexicographically first monic irreducible of degree `m`.
    pub fn with_degree(p: u64, m: usize) -> Result<Self, RingError> {
        if !is_prime(p) {
            return Err(RingError::NotPrime(p));
        }
        if m == 0 {
            return Err(RingError::BadModulus("extension degree must be at least 1".into()));
        }
        if m == 1 {
            return Self::prime(p);
        }
        if let Some((_, _, coeffs)) = BUILTIN_MODULI.iter().find(|(bp, bm, _)| *bp == p && *bm == m) {
            return Ok(FiniteField { p, modulus: coeffs.to_vec() });
        }
        let modulus = first_irreducible(p, m);
        Ok(FiniteField { p, modulus })
    }

    /// The degree-`2m` field containing this one.
    pub fn quadratic_extension(&self) -> Result<Self, RingError> {
        Self::with_degree(self.p, 2 * self.m())
    }

    pub fn p(&self) -> u64 {
        self.p
    }

    pub fn m(&self) -> usize {
        self.modulus.len() - 1
    }

    pub fn q(&self) -> u64 {
        self.p.pow(self.m() as u32)
    }

    /// Monic modulus, constant coefficient first.
    pub fn modulus(&self) -> &[u64] {
        &self.modulus
    }

    /// The field as the length-one Witt ring, which carries the arithmetic.
    pub fn residue_ring(&self) -> WittRing {
        WittRing::new(self.clone(), 1).expect("length-one Witt ring of a valid field")
    }
}

impl fmt::Debug for FiniteField {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "F_{}[x]/({})", self.p, format_poly(&self.modulus))
    }
}

impl fmt::Display for FiniteField {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "F_{}", self.q())
    }
}

pub fn is_prime(p: u64) -> bool {
    if p < 2 {
        return false;
    }
    let mut d = 2;
    while d * d <= p {
        if p.is_multiple_of(d) {
            return false;
        }
        d += 1;
    }
    true
}

/// Splits `q = p^m` with `p` prime.
pub fn prime_power(q: u64) -> Option<(u64, usize)> {
    if q < 2 {
        return None;
    }
    let p = (2..=q).find(|d| q.is_multiple_of(*d))?;
    let mut rest = q;
    let mut m = 0;
    while rest.is_multiple_of(p) {
        rest /= p;
        m += 1;
    }
    (rest == 1).then_some((p, m))
}

fn format_poly(c: &[u64]) -> String {
    let mut parts = Vec::new();
    for (i, &a) in c.iter().enumerate().rev() {
        if a == 0 {
            continue;
        }
        let mono = match i {
            0 => String::new(),
            1 => "x".to_string(),
            _ => format!("x^{i}"),
        };
        parts.push(match (a, i) {
            (_, 0) => a.to_string(),
            (1, _) => mono,
            _ => format!("{a}*{mono}"),
        });
    }
    if parts.is_empty() {
        "0".into()
    } else {
        parts.join(" + ")
    }
}

// Dense polynomials over F_p, constant term first, no trailing zeros.

fn trim(mut a: Vec<u64>) -> Vec<u64> {
    while a.last() == Some(&0) {
        a.pop();
    }
    a
}

fn inv_mod(a: u64, p: u64) -> u64 {
    let mut r = 1;
    let mut b = a % p;
    let mut e = p - 2;
    while e > 0 {
        if e & 1 == 1 {
            r = r * b % p;
        }
        b = b * b % p;
        e >>= 1;
    }
    r
}

fn poly_rem(a: &[u64], b: &[u64], p: u64) -> Vec<u64> {
    let mut r = trim(a.to_vec());
    let db = b.len() - 1;
    let lead_inv = inv_mod(b[db], p);
    while r.len() > db {
        let k = r.len() - 1 - db;
        let c = r[r.len() - 1] * lead_inv % p;
        for (i, &bi) in b.iter().enumerate() {
            r[k + i] = (r[k + i] + p - c * bi % p) % p;
        }
        r = trim(r);
    }
    r
}

fn poly_mulmod(a: &[u64], b: &[u64], f: &[u64], p: u64) -> Vec<u64> {
    if a.is_empty() || b.is_empty() {
        return Vec::new();
    }
    let mut out = vec![0u64; a.len() + b.len() - 1];
    for (i, &x) in a.iter().enumerate() {
        for (j, &y) in b.iter().enumerate() {
            out[i + j] = (out[i + j] + x * y) % p;
        }
    }
    poly_rem(&out, f, p)
}

fn poly_gcd(a: &[u64], b: &[u64], p: u64) -> Vec<u64> {
    let mut a = trim(a.to_vec());
    let mut b = trim(b.to_vec());
    while !b.is_empty() {
        let r = poly_rem(&a, &b, p);
        a = b;
        b = r;
    }
    a
}

/// `x^(p^k) mod f`.
fn frobenius_power_of_x(k: usize, f: &[u64], p: u64) -> Vec<u64> {
    let mut cur = poly_rem(&[0, 1], f, p);
    for _ in 0..k {
        let mut acc = vec![1u64];
        let mut base = cur.clone();
        let mut e = p;
        while e > 0 {
            if e & 1 == 1 {
                acc = poly_mulmod(&acc, &base, f, p);
            }
            base = poly_mulmod(&base, &base, f, p);
            e >>= 1;
        }
        cur = acc;
    }
    cur
}

fn sub_x(a: &[u64], p: u64) -> Vec<u64> {
    let mut v = a.to_vec();
    if v.len() < 2 {
        v.resize(2, 0);
    }
    v[1] = (v[1] + p - 1) % p;
    trim(v)
}

/// Rabin's test: `f` of degree `m` is irreducible iff `x^(p^m) = x mod f`
/// and `gcd(x^(p^(m/r)) - x, f) = 1` for every prime `r | m`.
pub fn is_irreducible(p: u64, f: &[u64]) -> bool {
    let f = trim(f.to_vec());
    if f.len() < 2 {
        return false;
    }
    let m = f.len() - 1;
    if m == 1 {
        return true;
    }
    if !sub_x(&frobenius_power_of_x(m, &f, p), p).is_empty() {
        return false;
    }
    for r in (2..=m).filter(|&r| m.is_multiple_of(r) && is_prime(r as u64)) {
        let h = sub_x(&frobenius_power_of_x(m / r, &f, p), p);
        let g = poly_gcd(&f, &h, p);
        if g.len() != 1 {
            return false;
        }
    }
    true
}

fn first_irreducible(p: u64, m: usize) -> Vec<u64> {
    let total = p.pow(m as u32);
    (0..total)
        .map(|mut idx| {
            let mut c = vec![0u64; m + 1];
            for slot in c.iter_mut().take(m) {
                *slot = idx % p;
                idx /= p;
            }
            c[m] = 1;
            c
        })
        .find(|c| c[0] != 0 && is_irreducible(p, c))
        .expect("an irreducible polynomial of every degree exists")
}
