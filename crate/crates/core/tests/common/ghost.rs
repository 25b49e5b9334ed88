//! Witt vector arithmetic from the universal sum and product polynomials.
//!
//! The polynomials are computed over `Z` from the ghost components
//! `w_k = sum_{i <= k} p^i X_i^(p^(k-i))` and then evaluated on Witt
//! coordinates in `F_q`. An element `sum [a_i] p^i` has Witt coordinates
//! `x_i = a_i^(p^i)`.

use std::collections::BTreeMap;

use num_bigint::BigInt;
use num_traits::{One, Zero};
use sll_core::WittElement;

use super::fq::{Fe, Fq};

/// Polynomial in `X_0..X_{n-1}, Y_0..Y_{n-1}`.
type Poly = BTreeMap<Vec<u32>, BigInt>;

fn add_into(acc: &mut Poly, other: &Poly, scale: &BigInt) {
    for (e, c) in other {
        let entry = acc.entry(e.clone()).or_insert_with(BigInt::zero);
        *entry += c * scale;
        if entry.is_zero() {
            acc.remove(e);
        }
    }
}

fn mul(a: &Poly, b: &Poly) -> Poly {
    let mut out = Poly::new();
    for (ea, ca) in a {
        for (eb, cb) in b {
            let e: Vec<u32> = ea.iter().zip(eb).map(|(x, y)| x + y).collect();
            let entry = out.entry(e.clone()).or_insert_with(BigInt::zero);
            *entry += ca * cb;
            if entry.is_zero() {
                out.remove(&e);
            }
        }
    }
    out
}

fn pow(a: &Poly, e: u64, nv: usize) -> Poly {
    let mut acc = Poly::from([(vec![0; nv], BigInt::one())]);
    for _ in 0..e {
        acc = mul(&acc, a);
    }
    acc
}

fn ghost(p: u64, k: usize, offset: usize, nv: usize) -> Poly {
    let mut out = Poly::new();
    for i in 0..=k {
        let mut e = vec![0u32; nv];
        e[offset + i] = p.pow((k - i) as u32) as u32;
        out.insert(e, BigInt::from(p).pow(i as u32));
    }
    out
}

/// Solves `w_k(S) = target_k` for the universal polynomials `S_k`.
fn solve(p: u64, n: usize, target: impl Fn(usize) -> Poly) -> Vec<Poly> {
    let nv = 2 * n;
    let mut out: Vec<Poly> = Vec::new();
    for k in 0..n {
        let mut rhs = target(k);
        for (i, s) in out.iter().enumerate() {
            let scale = -BigInt::from(p).pow(i as u32);
            add_into(&mut rhs, &pow(s, p.pow((k - i) as u32), nv), &scale);
        }
        let pk = BigInt::from(p).pow(k as u32);
        let s = rhs
            .into_iter()
            .map(|(e, c)| {
                assert!((&c % &pk).is_zero(), "ghost recursion is integral");
                (e, c / &pk)
            })
            .collect();
        out.push(s);
    }
    out
}

pub struct GhostWitt {
    pub fq: Fq,
    pub n: usize,
    sum: Vec<Vec<(Vec<u32>, u64)>>,
    prod: Vec<Vec<(Vec<u32>, u64)>>,
}

impl GhostWitt {
    pub fn new(fq: Fq, n: usize) -> Self {
        let p = fq.p;
        let nv = 2 * n;
        let sum = solve(p, n, |k| {
            let mut w = ghost(p, k, 0, nv);
            add_into(&mut w, &ghost(p, k, n, nv), &BigInt::one());
            w
        });
        let prod = solve(p, n, |k| mul(&ghost(p, k, 0, nv), &ghost(p, k, n, nv)));
        let reduce = |polys: Vec<Poly>| -> Vec<Vec<(Vec<u32>, u64)>> {
            let pb = BigInt::from(p);
            polys
                .into_iter()
                .map(|poly| {
                    poly.into_iter()
                        .filter_map(|(e, c)| {
                            let r = ((c % &pb) + &pb) % &pb;
                            let r: u64 = r.try_into().unwrap();
                            (r != 0).then_some((e, r))
                        })
                        .collect()
                })
                .collect()
        };
        GhostWitt { sum: reduce(sum), prod: reduce(prod), fq, n }
    }

    fn eval(&self, polys: &[Vec<(Vec<u32>, u64)>], x: &[Fe], y: &[Fe]) -> Vec<Fe> {
        let top = self.fq.p.pow(self.n as u32 - 1) as usize;
        let powers: Vec<Vec<Fe>> = x
            .iter()
            .chain(y)
            .map(|v| {
                let mut table = vec![self.fq.one()];
                for k in 0..top {
                    table.push(self.fq.mul(&table[k], v));
                }
                table
            })
            .collect();
        polys
            .iter()
            .map(|poly| {
                let mut acc = self.fq.zero();
                for (e, c) in poly {
                    let mut t = self.fq.from_int(*c as i64);
                    for (table, &k) in powers.iter().zip(e) {
                        if k > 0 {
                            t = self.fq.mul(&t, &table[k as usize]);
                        }
                    }
                    acc = self.fq.add(&acc, &t);
                }
                acc
            })
            .collect()
    }

    pub fn add(&self, x: &[Fe], y: &[Fe]) -> Vec<Fe> {
        self.eval(&self.sum, x, y)
    }

    pub fn mul(&self, x: &[Fe], y: &[Fe]) -> Vec<Fe> {
        self.eval(&self.prod, x, y)
    }

    /// Witt coordinates of a library element, read off its digits.
    pub fn coordinates(&self, a: &WittElement) -> Vec<Fe> {
        a.digits()
            .iter()
            .enumerate()
            .map(|(i, d)| self.fq.pow(&self.fq.from_residue(d), self.fq.p.pow(i as u32)))
            .collect()
    }
}
