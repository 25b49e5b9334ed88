//! Dense-free series arithmetic by direct expansion, truncated at a degree.

use std::collections::HashMap;

use sll_core::quadform::QuadraticForm;
use sll_core::{TruncatedSeries, WittElement, WittRing};

#[derive(Clone, Debug)]
pub struct Naive {
    pub ring: WittRing,
    pub nvars: usize,
    pub degree: u32,
    pub terms: HashMap<Vec<u32>, WittElement>,
}

impl Naive {
    pub fn zero(ring: &WittRing, nvars: usize, degree: u32) -> Self {
        Naive { ring: ring.clone(), nvars, degree, terms: HashMap::new() }
    }

    pub fn constant(ring: &WittRing, nvars: usize, degree: u32, c: &WittElement) -> Self {
        let mut out = Self::zero(ring, nvars, degree);
        out.add_term(vec![0; nvars], c.clone());
        out
    }

    pub fn of(f: &TruncatedSeries) -> Self {
        let ring = f.ring();
        let mut out = Self::zero(ring.coeff_ring(), ring.nvars(), ring.degree() as u32);
        for (e, c) in f.terms() {
            out.add_term(e, c);
        }
        out
    }

    pub fn of_form(q: &QuadraticForm, degree: u32) -> Self {
        let k = q.nvars();
        let mut out = Self::zero(q.ring(), k, degree);
        for i in 0..k {
            for j in i..k {
                let mut e = vec![0; k];
                e[i] += 1;
                e[j] += 1;
                out.add_term(e, q.coeff(i, j).clone());
            }
        }
        out
    }

    pub fn add_term(&mut self, e: Vec<u32>, c: WittElement) {
        if e.iter().sum::<u32>() >= self.degree {
            return;
        }
        let entry = self.terms.entry(e.clone()).or_insert_with(|| self.ring.zero());
        *entry = &*entry + &c;
        if entry.is_zero() {
            self.terms.remove(&e);
        }
    }

    pub fn add(&self, other: &Naive) -> Naive {
        let mut out = self.clone();
        for (e, c) in &other.terms {
            out.add_term(e.clone(), c.clone());
        }
        out
    }

    pub fn sub(&self, other: &Naive) -> Naive {
        let mut out = self.clone();
        for (e, c) in &other.terms {
            out.add_term(e.clone(), -c);
        }
        out
    }

    pub fn mul(&self, other: &Naive) -> Naive {
        let mut out = Naive::zero(&self.ring, self.nvars, self.degree);
        for (ea, ca) in &self.terms {
            for (eb, cb) in &other.terms {
                let e = ea.iter().zip(eb).map(|(x, y)| x + y).collect();
                out.add_term(e, ca * cb);
            }
        }
        out
    }

    /// `f(phi_1, ..., phi_k)` by expanding every monomial.
    pub fn compose(&self, phi: &[Naive]) -> Naive {
        let target = &phi[0];
        let one = Naive::constant(&self.ring, target.nvars, target.degree, &self.ring.one());
        let mut powers: Vec<Vec<Naive>> = phi.iter().map(|_| vec![one.clone()]).collect();
        let mut out = Naive::zero(&self.ring, target.nvars, target.degree);
        for (e, c) in &self.terms {
            let mut t = Naive::constant(&self.ring, target.nvars, target.degree, c);
            for (i, &k) in e.iter().enumerate() {
                while powers[i].len() <= k as usize {
                    let next = powers[i].last().unwrap().mul(&phi[i]);
                    powers[i].push(next);
                }
                if k > 0 {
                    t = t.mul(&powers[i][k as usize]);
                }
            }
            out = out.add(&t);
        }
        out
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }
}
