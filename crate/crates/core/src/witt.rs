//! Truncated Witt rings `W_n(F_q)`.
//!
//! `W_n(F_q)` is realised as `(Z/p^n)[x]/(g)` where `g` is the lift of the
//! field modulus whose roots are Teichmuller representatives. With this lift
//! the class of `x` is itself Teichmuller, so Frobenius is `x -> x^p` followed
//! by a stationary Newton step, and field embeddings are determined by a single
//! Teichmuller root. Witt coordinates only appear through [`WittElement::digits`]
//! and [`WittRing::from_digits`].

use std::cmp::Ordering;
use std::fmt;
use std::hash::{Hash, Hasher};
use std::ops::{Add, Mul, Neg, Sub};
use std::sync::Arc;

use rand::Rng;
use smallvec::{smallvec, SmallVec};
use thiserror::Error;

use crate::field::FiniteField;

pub(crate) type Coeffs = SmallVec<[u64; 4]>;

/// Name of the field generator in textual output.
pub const GENERATOR_NAME: &str = "z";

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum RingError {
    #[error("{0} is not prime")]
    NotPrime(u64),
    #[error("{0} is not a prime power")]
    NotPrimePower(u64),
    #[error("invalid modulus: {0}")]
    BadModulus(String),
    #[error("truncation length must be at least 1")]
    ZeroLength,
    #[error("p^n = {p}^{n} exceeds the supported range (< 2^31)")]
    TooLarge { p: u64, n: usize },
    #[error("elements belong to different rings ({left} vs {right})")]
    Mismatch { left: String, right: String },
    #[error("element is not a unit")]
    NotUnit,
    #[error("expected {expected} coefficients, got {got}")]
    WrongLength { expected: usize, got: usize },
    #[error("expected an element of the residue field {expected}, got one of {got}")]
    NotResidue { expected: String, got: String },
}

/// `(Z/p^n)[x]/(modulus)` arithmetic on raw coefficient vectors.
#[derive(Clone, Debug)]
struct Quotient {
    p: u64,
    pn: u64,
    modulus: Vec<u64>,
}

impl Quotient {
    fn m(&self) -> usize {
        self.modulus.len() - 1
    }

    fn zero(&self) -> Coeffs {
        smallvec![0; self.m()]
    }

    fn one(&self) -> Coeffs {
        let mut c = self.zero();
        c[0] = 1 % self.pn;
        c
    }

    /// Reduces an arbitrary-length polynomial with entries `< pn`.
    fn reduce(&self, mut v: SmallVec<[u64; 8]>) -> Coeffs {
        let m = self.m();
        let pn = self.pn;
        for k in (m..v.len()).rev() {
            let c = v[k];
            if c == 0 {
                continue;
            }
            for i in 0..m {
                let t = c * self.modulus[i] % pn;
                v[k - m + i] = (v[k - m + i] + pn - t) % pn;
            }
            v[k] = 0;
        }
        v.resize(m, 0);
        v.into_iter().collect()
    }

    fn x(&self) -> Coeffs {
        self.reduce(smallvec![0, 1 % self.pn])
    }

    fn add(&self, a: &[u64], b: &[u64]) -> Coeffs {
        a.iter().zip(b).map(|(x, y)| (x + y) % self.pn).collect()
    }

    fn sub(&self, a: &[u64], b: &[u64]) -> Coeffs {
        a.iter().zip(b).map(|(x, y)| (x + self.pn - y) % self.pn).collect()
    }

    fn neg(&self, a: &[u64]) -> Coeffs {
        a.iter().map(|x| (self.pn - x) % self.pn).collect()
    }

    fn scale(&self, a: &[u64], k: u64) -> Coeffs {
        let k = k % self.pn;
        a.iter().map(|x| x * k % self.pn).collect()
    }

    fn mul(&self, a: &[u64], b: &[u64]) -> Coeffs {
        let m = self.m();
        if m == 1 {
            return smallvec![a[0] * b[0] % self.pn];
        }
        let pn = self.pn;
        let mut prod: SmallVec<[u64; 8]> = smallvec![0; 2 * m - 1];
        for (i, &x) in a.iter().enumerate() {
            if x == 0 {
                continue;
            }
            for (j, &y) in b.iter().enumerate() {
                prod[i + j] = (prod[i + j] + x * y % pn) % pn;
            }
        }
        self.reduce(prod)
    }

    fn pow(&self, a: &[u64], mut e: u64) -> Coeffs {
        let mut acc = self.one();
        let mut base: Coeffs = a.into();
        while e > 0 {
            if e & 1 == 1 {
                acc = self.mul(&acc, &base);
            }
            e >>= 1;
            if e > 0 {
                base = self.mul(&base, &base);
            }
        }
        acc
    }

    fn is_zero(a: &[u64]) -> bool {
        a.iter().all(|&c| c == 0)
    }

    fn is_unit(&self, a: &[u64]) -> bool {
        a.iter().any(|&c| c % self.p != 0)
    }

    /// Inverse of a unit: residue inverse by Fermat, then Newton `b(2 - ab)`.
    fn inv(&self, a: &[u64], q: u64) -> Option<Coeffs> {
        if !self.is_unit(a) {
            return None;
        }
        let mut b = self.pow(a, q - 2);
        let two = self.scale(&self.one(), 2);
        for _ in 0..64 {
            let ab = self.mul(a, &b);
            if ab == self.one() {
                return Some(b);
            }
            b = self.mul(&b, &self.sub(&two, &ab));
        }
        unreachable!("Newton inversion converges for units")
    }

    /// Evaluates a polynomial with integer coefficients at `y`.
    fn eval_int_poly(&self, poly: &[u64], y: &[u64]) -> Coeffs {
        let mut acc = self.zero();
        for &c in poly.iter().rev() {
            acc = self.mul(&acc, y);
            acc[0] = (acc[0] + c) % self.pn;
        }
        acc
    }

    fn derivative(poly: &[u64], pn: u64) -> Vec<u64> {
        poly.iter()
            .enumerate()
            .skip(1)
            .map(|(i, &c)| (i as u64 % pn) * c % pn)
            .collect()
    }
}

struct Inner {
    field: FiniteField,
    n: usize,
    arith: Quotient,
    /// `sigma(x^i)` for `i < m`.
    frob: Vec<Coeffs>,
    /// `sigma^{-1}(x^i)` for `i < m`.
    frob_inv: Vec<Coeffs>,
    residue: Option<WittRing>,
}

/// The ring `W_n(F_q)`. Cloning is cheap; clones share one context.
#[derive(Clone)]
pub struct WittRing(Arc<Inner>);

impl WittRing {
    pub fn new(field: FiniteField, n: usize) -> Result<Self, RingError> {
        if n == 0 {
            return Err(RingError::ZeroLength);
        }
        let p = field.p();
        let pn = p
            .checked_pow(n as u32)
            .filter(|&v| v < (1 << 31))
            .ok_or(RingError::TooLarge { p, n })?;
        let q = field.q();
        let m = field.m();

        // Any monic integer lift gives a copy of W_n(F_q); inside it the
        // Teichmuller root of the modulus is x^(q^(n-1)).
        let naive = Quotient { p, pn, modulus: field.modulus().to_vec() };
        let mut omega = naive.x();
        for _ in 1..n {
            omega = naive.pow(&omega, q);
        }
        let mut lift_poly: Vec<Coeffs> = vec![naive.one()];
        let mut root = omega;
        for _ in 0..m {
            let mut next = vec![naive.zero(); lift_poly.len() + 1];
            for (k, c) in lift_poly.iter().enumerate() {
                next[k + 1] = naive.add(&next[k + 1], c);
                next[k] = naive.sub(&next[k], &naive.mul(&root, c));
            }
            lift_poly = next;
            root = naive.pow(&root, p);
        }
        let lifted: Vec<u64> = lift_poly
            .iter()
            .map(|c| {
                debug_assert!(c[1..].iter().all(|&v| v == 0), "minimal polynomial has integer coefficients");
                c[0]
            })
            .collect();
        debug_assert!(lifted.iter().zip(field.modulus()).all(|(a, b)| a % p == *b));

        let arith = Quotient { p, pn, modulus: lifted };
        let frob = frobenius_images(&arith, q);
        let sigma = |a: &Coeffs| -> Coeffs {
            let mut acc = arith.zero();
            for (i, &c) in a.iter().enumerate() {
                acc = arith.add(&acc, &arith.scale(&frob[i], c));
            }
            acc
        };
        let mut inv_x = arith.x();
        for _ in 0..m.saturating_sub(1) {
            inv_x = sigma(&inv_x);
        }
        let frob_inv = (0..m as u64).map(|i| arith.pow(&inv_x, i)).collect();

        let residue = if n > 1 { Some(WittRing::new(field.clone(), 1)?) } else { None };
        Ok(WittRing(Arc::new(Inner { field, n, arith, frob, frob_inv, residue })))
    }

    /// `W_n(F_q)` using the built-in modulus for `q`.
    pub fn with_order(q: u64, n: usize) -> Result<Self, RingError> {
        Self::new(FiniteField::with_order(q)?, n)
    }

    pub fn field(&self) -> &FiniteField {
        &self.0.field
    }

    pub fn p(&self) -> u64 {
        self.0.arith.p
    }

    pub fn m(&self) -> usize {
        self.0.field.m()
    }

    pub fn n(&self) -> usize {
        self.0.n
    }

    pub fn q(&self) -> u64 {
        self.0.field.q()
    }

    /// `p^n`, the characteristic.
    pub fn characteristic(&self) -> u64 {
        self.0.arith.pn
    }

    /// The Teichmuller-rooted lift of the field modulus, constant term first.
    pub fn lifted_modulus(&self) -> &[u64] {
        &self.0.arith.modulus
    }

    /// `W_1(F_q) = F_q`.
    pub fn residue_field(&self) -> WittRing {
        match &self.0.residue {
            Some(r) => r.clone(),
            None => self.clone(),
        }
    }

    pub fn is_field(&self) -> bool {
        self.0.n == 1
    }

    /// The same residue field at another truncation length.
    pub fn with_length(&self, n: usize) -> Result<WittRing, RingError> {
        if n == self.n() {
            return Ok(self.clone());
        }
        WittRing::new(self.0.field.clone(), n)
    }

    pub(crate) fn wrap(&self, coeffs: Coeffs) -> WittElement {
        WittElement { ring: self.clone(), coeffs }
    }

    pub fn zero(&self) -> WittElement {
        self.wrap(self.0.arith.zero())
    }

    pub fn one(&self) -> WittElement {
        self.wrap(self.0.arith.one())
    }

    pub fn from_int(&self, k: i64) -> WittElement {
        let pn = self.characteristic() as i64;
        let mut c = self.0.arith.zero();
        c[0] = k.rem_euclid(pn) as u64;
        self.wrap(c)
    }

    /// The element `p`.
    pub fn uniformizer(&self) -> WittElement {
        self.from_int(self.p() as i64)
    }

    /// The class of `x`, a Teichmuller lift of the field generator.
    pub fn generator(&self) -> WittElement {
        self.wrap(self.0.arith.x())
    }

    /// Element from polynomial coefficients (constant first); entries are
    /// reduced mod `p^n` and may be negative.
    pub fn element(&self, coeffs: &[i64]) -> Result<WittElement, RingError> {
        if coeffs.len() != self.m() {
            return Err(RingError::WrongLength { expected: self.m(), got: coeffs.len() });
        }
        let pn = self.characteristic() as i64;
        Ok(self.wrap(coeffs.iter().map(|c| c.rem_euclid(pn) as u64).collect()))
    }

    pub(crate) fn raw(&self, coeffs: &[u64]) -> WittElement {
        let pn = self.characteristic();
        self.wrap(coeffs.iter().map(|c| c % pn).collect())
    }

    /// Teichmuller lift of a residue-field element: the root of `X^q - X`
    /// congruent to it, by Newton iteration.
    pub fn teichmuller(&self, a: &WittElement) -> Result<WittElement, RingError> {
        self.check_residue(a)?;
        let ar = &self.0.arith;
        let q = self.q();
        let mut x: Coeffs = a.coeffs.clone();
        for _ in 0..64 {
            let xq = ar.pow(&x, q);
            let f = ar.sub(&xq, &x);
            if Quotient::is_zero(&f) {
                return Ok(self.wrap(x));
            }
            // d/dX (X^q - X) = q X^(q-1) - 1, a unit
            let df = ar.sub(&ar.scale(&ar.pow(&x, q - 1), q), &ar.one());
            let dinv = ar.inv(&df, q).expect("derivative of X^q - X is a unit");
            x = ar.sub(&x, &ar.mul(&f, &dinv));
        }
        unreachable!("Teichmuller Newton iteration converges")
    }

    /// `sum_i [d_i] p^i`.
    pub fn from_digits(&self, digits: &[WittElement]) -> Result<WittElement, RingError> {
        if digits.len() != self.n() {
            return Err(RingError::WrongLength { expected: self.n(), got: digits.len() });
        }
        let mut acc = self.zero();
        let mut pk = 1u64;
        for d in digits {
            let t = self.teichmuller(d)?;
            acc = acc + t.scale_int(pk);
            pk = pk.saturating_mul(self.p());
        }
        Ok(acc)
    }

    fn check_residue(&self, a: &WittElement) -> Result<(), RingError> {
        let res = self.residue_field();
        if a.ring != res {
            return Err(RingError::NotResidue { expected: res.to_string(), got: a.ring.to_string() });
        }
        Ok(())
    }

    /// Reduction of an element of any length `>= n` with the same field.
    pub fn project(&self, a: &WittElement) -> Result<WittElement, RingError> {
        if a.ring.field() != self.field() || a.ring.n() < self.n() {
            return Err(RingError::Mismatch { left: self.to_string(), right: a.ring.to_string() });
        }
        Ok(self.raw(&a.coeffs))
    }

    /// Every element, in increasing coefficient order (`q^n` of them).
    pub fn elements(&self) -> impl Iterator<Item = WittElement> + '_ {
        let pn = self.characteristic();
        let m = self.m();
        let total = pn.pow(m as u32);
        (0..total).map(move |mut idx| {
            let mut c = self.0.arith.zero();
            for slot in c.iter_mut().take(m) {
                *slot = idx % pn;
                idx /= pn;
            }
            self.wrap(c)
        })
    }

    pub fn cardinality(&self) -> u64 {
        self.characteristic().pow(self.m() as u32)
    }

    pub fn random<R: Rng + ?Sized>(&self, rng: &mut R) -> WittElement {
        let pn = self.characteristic();
        self.wrap((0..self.m()).map(|_| rng.gen_range(0..pn)).collect())
    }

    pub fn random_unit<R: Rng + ?Sized>(&self, rng: &mut R) -> WittElement {
        loop {
            let x = self.random(rng);
            if x.is_unit() {
                return x;
            }
        }
    }

    /// Random element of `p^r W`.
    pub fn random_in_ideal<R: Rng + ?Sized>(&self, r: usize, rng: &mut R) -> WittElement {
        let pr = self.p().saturating_pow(r as u32);
        self.random(rng).scale_int(pr)
    }

    /// `W_n(F_{q^2})` together with the embedding of this ring into it.
    pub fn quadratic_extension(&self) -> Result<RingEmbedding, RingError> {
        let big_field = self.field().quadratic_extension()?;
        let target = WittRing::new(big_field, self.n())?;
        let residue = target.residue_field();
        let modulus = self.field().modulus();
        let root = residue
            .elements()
            .find(|r| {
                let mut acc = residue.zero();
                for &c in modulus.iter().rev() {
                    acc = &acc * r + residue.from_int(c as i64);
                }
                acc.is_zero()
            })
            .expect("the quadratic extension contains a root of the modulus");
        let image = target.teichmuller(&root)?;
        Ok(RingEmbedding { source: self.clone(), target, generator_image: image })
    }

    // raw helpers used by series and linear algebra

    pub(crate) fn raw_add(&self, a: &[u64], b: &[u64]) -> Coeffs {
        self.0.arith.add(a, b)
    }

    pub(crate) fn raw_mul(&self, a: &[u64], b: &[u64]) -> Coeffs {
        self.0.arith.mul(a, b)
    }

    pub(crate) fn raw_add_assign(&self, acc: &mut Coeffs, b: &[u64]) {
        let pn = self.characteristic();
        for (x, y) in acc.iter_mut().zip(b) {
            *x = (*x + y) % pn;
        }
    }

    fn frobenius_with(&self, table: &[Coeffs], a: &[u64]) -> Coeffs {
        let ar = &self.0.arith;
        let mut acc = ar.zero();
        for (i, &c) in a.iter().enumerate() {
            if c != 0 {
                acc = ar.add(&acc, &ar.scale(&table[i], c));
            }
        }
        acc
    }
}

/// Newton lift of the `p`-power map on `x`: the root of the lifted modulus
/// congruent to `x^p`. With the Teichmuller-rooted lift the first guess is
/// already exact.
fn frobenius_images(arith: &Quotient, q: u64) -> Vec<Coeffs> {
    let g = &arith.modulus;
    let dg = Quotient::derivative(g, arith.pn);
    let mut y = arith.pow(&arith.x(), arith.p);
    for _ in 0..64 {
        let gy = arith.eval_int_poly(g, &y);
        if Quotient::is_zero(&gy) {
            break;
        }
        let d = arith.eval_int_poly(&dg, &y);
        let dinv = arith.inv(&d, q).expect("separable modulus has unit derivative at its roots");
        y = arith.sub(&y, &arith.mul(&gy, &dinv));
    }
    (0..arith.m() as u64).map(|i| arith.pow(&y, i)).collect()
}

impl PartialEq for WittRing {
    fn eq(&self, other: &Self) -> bool {
        Arc::ptr_eq(&self.0, &other.0) || (self.0.n == other.0.n && self.0.field == other.0.field)
    }
}

impl Eq for WittRing {}

impl fmt::Debug for WittRing {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "W_{}({:?})", self.n(), self.field())
    }
}

impl fmt::Display for WittRing {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "W_{}(F_{})", self.n(), self.q())
    }
}

/// A ring map `W_n(F_q) -> W_n(F_{q'})` determined by the image of the
/// generator.
#[derive(Clone, Debug)]
pub struct RingEmbedding {
    pub source: WittRing,
    pub target: WittRing,
    pub generator_image: WittElement,
}

impl RingEmbedding {
    pub fn identity(ring: &WittRing) -> Self {
        RingEmbedding { source: ring.clone(), target: ring.clone(), generator_image: ring.generator() }
    }

    pub fn is_identity(&self) -> bool {
        self.source == self.target
    }

    pub fn apply(&self, a: &WittElement) -> WittElement {
        assert_eq!(a.ring, self.source, "embedding applied to an element of another ring");
        if self.is_identity() {
            return a.clone();
        }
        let mut acc = self.target.zero();
        let mut power = self.target.one();
        for &c in a.coeffs.iter() {
            acc = acc + power.scale_int(c);
            power = &power * &self.generator_image;
        }
        acc
    }
}

/// An element of `W_n(F_q)`, stored as polynomial coefficients mod `p^n`.
#[derive(Clone)]
pub struct WittElement {
    ring: WittRing,
    coeffs: Coeffs,
}

impl WittElement {
    pub fn ring(&self) -> &WittRing {
        &self.ring
    }

    /// Coefficients in `[0, p^n)`, constant term first.
    pub fn coeffs(&self) -> &[u64] {
        &self.coeffs
    }

    fn check(&self, other: &WittElement) -> Result<(), RingError> {
        if self.ring != other.ring {
            return Err(RingError::Mismatch { left: self.ring.to_string(), right: other.ring.to_string() });
        }
        Ok(())
    }

    pub fn try_add(&self, other: &WittElement) -> Result<WittElement, RingError> {
        self.check(other)?;
        Ok(self.ring.wrap(self.ring.0.arith.add(&self.coeffs, &other.coeffs)))
    }

    pub fn try_sub(&self, other: &WittElement) -> Result<WittElement, RingError> {
        self.check(other)?;
        Ok(self.ring.wrap(self.ring.0.arith.sub(&self.coeffs, &other.coeffs)))
    }

    pub fn try_mul(&self, other: &WittElement) -> Result<WittElement, RingError> {
        self.check(other)?;
        Ok(self.ring.wrap(self.ring.0.arith.mul(&self.coeffs, &other.coeffs)))
    }

    /// Multiplication by an integer.
    pub fn scale_int(&self, k: u64) -> WittElement {
        self.ring.wrap(self.ring.0.arith.scale(&self.coeffs, k))
    }

    pub fn pow(&self, e: u64) -> WittElement {
        self.ring.wrap(self.ring.0.arith.pow(&self.coeffs, e))
    }

    pub fn is_zero(&self) -> bool {
        Quotient::is_zero(&self.coeffs)
    }

    pub fn is_one(&self) -> bool {
        self.coeffs == self.ring.0.arith.one()
    }

    pub fn is_unit(&self) -> bool {
        self.ring.0.arith.is_unit(&self.coeffs)
    }

    pub fn inverse(&self) -> Result<WittElement, RingError> {
        self.ring
            .0
            .arith
            .inv(&self.coeffs, self.ring.q())
            .map(|c| self.ring.wrap(c))
            .ok_or(RingError::NotUnit)
    }

    /// `p`-adic valuation: index of the first nonzero Teichmuller digit,
    /// `n` for zero.
    pub fn valuation(&self) -> usize {
        let p = self.ring.p();
        self.coeffs
            .iter()
            .filter(|&&c| c != 0)
            .map(|&c| {
                let mut c = c;
                let mut v = 0;
                while c % p == 0 {
                    c /= p;
                    v += 1;
                }
                v
            })
            .min()
            .unwrap_or(self.ring.n())
    }

    /// Whether `self` lies in `p^r W`.
    pub fn in_ideal(&self, r: usize) -> bool {
        self.valuation() >= r.min(self.ring.n())
    }

    /// Agreement modulo `p^k`.
    pub fn congruent(&self, other: &WittElement, k: usize) -> bool {
        (self - other).in_ideal(k)
    }

    /// Exact division by `p^k` when `self` lies in `p^k W`; the result is
    /// determined mod `p^(n-k)` and returned with zero higher digits.
    pub fn div_p_pow(&self, k: usize) -> Option<WittElement> {
        if !self.in_ideal(k) {
            return None;
        }
        if k >= self.ring.n() {
            return Some(self.ring.zero());
        }
        let pk = self.ring.p().pow(k as u32);
        Some(self.ring.wrap(self.coeffs.iter().map(|c| c / pk).collect()))
    }

    /// Reduction mod `p`, as an element of the residue field.
    pub fn residue(&self) -> WittElement {
        let res = self.ring.residue_field();
        res.raw(&self.coeffs)
    }

    /// Teichmuller digits `(a_0, ..., a_{n-1})` with `self = sum [a_i] p^i`.
    pub fn digits(&self) -> Vec<WittElement> {
        let ring = &self.ring;
        let p = ring.p();
        let res = ring.residue_field();
        let mut cur = self.clone();
        let mut out = Vec::with_capacity(ring.n());
        let mut pi = 1u64;
        for _ in 0..ring.n() {
            let d = res.raw(&cur.coeffs.iter().map(|c| c / pi % p).collect::<Coeffs>());
            let t = ring.teichmuller(&d).expect("digit lives in the residue field");
            cur = &cur - &t.scale_int(pi);
            out.push(d);
            pi = pi.saturating_mul(p);
        }
        debug_assert!(cur.is_zero());
        out
    }

    pub fn frobenius(&self) -> WittElement {
        self.ring.wrap(self.ring.frobenius_with(&self.ring.0.frob, &self.coeffs))
    }

    pub fn frobenius_inverse(&self) -> WittElement {
        self.ring.wrap(self.ring.frobenius_with(&self.ring.0.frob_inv, &self.coeffs))
    }

    /// `sigma^k` for any integer `k`.
    pub fn frobenius_pow(&self, k: i64) -> WittElement {
        let m = self.ring.m() as i64;
        let k = k.rem_euclid(m);
        let mut x = self.clone();
        for _ in 0..k {
            x = x.frobenius();
        }
        x
    }

    /// Square root of a unit, when its residue is a square. Needs odd `p`.
    pub fn sqrt(&self) -> Option<WittElement> {
        let ring = &self.ring;
        if ring.p() == 2 || !self.is_unit() {
            return None;
        }
        let target = self.residue();
        let res = ring.residue_field();
        let root = res.elements().find(|r| (r * r) == target)?;
        let mut y = ring.raw(root.coeffs());
        let two_inv = ring.from_int(2).inverse().ok()?;
        for _ in 0..64 {
            let err = &(&y * &y) - self;
            if err.is_zero() {
                return Some(y);
            }
            let step = &err * &(&two_inv * &y.inverse().ok()?);
            y = &y - &step;
        }
        None
    }

    /// Whether the element lies in the prime subring `Z/p^n`.
    pub fn is_rational(&self) -> bool {
        self.coeffs[1..].iter().all(|&c| c == 0)
    }

    /// Balanced integer representative of a rational element.
    pub fn to_balanced_int(&self) -> Option<i64> {
        if !self.is_rational() {
            return None;
        }
        Some(balanced(self.coeffs[0], self.ring.characteristic()))
    }
}

pub(crate) fn balanced(c: u64, pn: u64) -> i64 {
    if c > pn / 2 {
        c as i64 - pn as i64
    } else {
        c as i64
    }
}

/// Renders `|c|` as `u*p^v` with the power of `p` written symbolically.
pub(crate) fn format_magnitude(mag: u64, p: u64) -> String {
    if mag == 0 {
        return "0".into();
    }
    let mut u = mag;
    let mut v = 0;
    while u.is_multiple_of(p) {
        u /= p;
        v += 1;
    }
    let pv = match v {
        0 => String::new(),
        1 => "p".into(),
        _ => format!("p^{v}"),
    };
    match (u, v) {
        (_, 0) => u.to_string(),
        (1, _) => pv,
        _ => format!("{u}*{pv}"),
    }
}

impl WittElement {
    /// Sign and magnitude text for use inside sums; `None` sign for
    /// parenthesised non-rational elements.
    pub(crate) fn signed_parts(&self) -> (bool, String) {
        let pn = self.ring.characteristic();
        let p = self.ring.p();
        if let Some(k) = self.to_balanced_int() {
            return (k < 0, format_magnitude(k.unsigned_abs(), p));
        }
        let mut parts: Vec<(bool, String)> = Vec::new();
        for (i, &c) in self.coeffs.iter().enumerate() {
            if c == 0 {
                continue;
            }
            let k = balanced(c, pn);
            let mag = format_magnitude(k.unsigned_abs(), p);
            let mono = match i {
                0 => String::new(),
                1 => GENERATOR_NAME.to_string(),
                _ => format!("{GENERATOR_NAME}^{i}"),
            };
            let body = match (i, mag.as_str()) {
                (0, _) => mag,
                (_, "1") => mono,
                _ => format!("{mag}*{mono}"),
            };
            parts.push((k < 0, body));
        }
        let mut s = String::from("(");
        for (idx, (neg, body)) in parts.iter().enumerate() {
            match (idx, neg) {
                (0, true) => s.push('-'),
                (0, false) => {}
                (_, true) => s.push_str(" - "),
                (_, false) => s.push_str(" + "),
            }
            s.push_str(body);
        }
        s.push(')');
        (false, s)
    }
}

impl fmt::Display for WittElement {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let (neg, body) = self.signed_parts();
        if neg {
            write!(f, "-{body}")
        } else {
            write!(f, "{body}")
        }
    }
}

impl fmt::Debug for WittElement {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}{:?}", self.ring, self.coeffs.as_slice())
    }
}

impl PartialEq for WittElement {
    fn eq(&self, other: &Self) -> bool {
        self.coeffs == other.coeffs && self.ring == other.ring
    }
}

impl Eq for WittElement {}

impl Hash for WittElement {
    fn hash<H: Hasher>(&self, state: &mut H) {
        self.coeffs.hash(state);
    }
}

impl PartialOrd for WittElement {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for WittElement {
    /// Orders by coefficient vector, highest coefficient first. Only
    /// meaningful within one ring.
    fn cmp(&self, other: &Self) -> Ordering {
        self.coeffs.iter().rev().cmp(other.coeffs.iter().rev())
    }
}

macro_rules! binop {
    ($trait:ident, $method:ident, $try:ident) => {
        impl $trait<&WittElement> for &WittElement {
            type Output = WittElement;
            fn $method(self, rhs: &WittElement) -> WittElement {
                self.$try(rhs).unwrap_or_else(|e| panic!("{e}"))
            }
        }
        impl $trait<WittElement> for WittElement {
            type Output = WittElement;
            fn $method(self, rhs: WittElement) -> WittElement {
                (&self).$method(&rhs)
            }
        }
        impl $trait<&WittElement> for WittElement {
            type Output = WittElement;
            fn $method(self, rhs: &WittElement) -> WittElement {
                (&self).$method(rhs)
            }
        }
        impl $trait<WittElement> for &WittElement {
            type Output = WittElement;
            fn $method(self, rhs: WittElement) -> WittElement {
                self.$method(&rhs)
            }
        }
    };
}

binop!(Add, add, try_add);
binop!(Sub, sub, try_sub);
binop!(Mul, mul, try_mul);

impl Neg for &WittElement {
    type Output = WittElement;
    fn neg(self) -> WittElement {
        self.ring.wrap(self.ring.0.arith.neg(&self.coeffs))
    }
}

impl Neg for WittElement {
    type Output = WittElement;
    fn neg(self) -> WittElement {
        -&self
    }
}
