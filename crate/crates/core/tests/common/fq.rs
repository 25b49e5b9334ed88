//! Schoolbook arithmetic in `F_p[x]/(g)`.

use sll_core::WittElement;

/// Element as `m` coefficients, constant first.
pub type Fe = Vec<u64>;

#[derive(Clone, Debug)]
pub struct Fq {
    pub p: u64,
    /// Monic modulus, constant first, degree `m`.
    pub modulus: Vec<u64>,
}

impl Fq {
    pub fn new(p: u64, modulus: &[u64]) -> Self {
        let lead = *modulus.last().unwrap();
        let inv = pow_mod(lead, p - 2, p);
        let modulus = modulus.iter().map(|c| c * inv % p).collect();
        Fq { p, modulus }
    }

    /// Same field as the residue field of the given element's ring.
    pub fn of(x: &WittElement) -> Self {
        let f = x.ring().field();
        Fq::new(f.p(), f.modulus())
    }

    pub fn m(&self) -> usize {
        self.modulus.len() - 1
    }

    pub fn q(&self) -> u64 {
        self.p.pow(self.m() as u32)
    }

    pub fn zero(&self) -> Fe {
        vec![0; self.m()]
    }

    pub fn one(&self) -> Fe {
        let mut v = self.zero();
        v[0] = 1;
        v
    }

    pub fn from_int(&self, k: i64) -> Fe {
        let mut v = self.zero();
        v[0] = k.rem_euclid(self.p as i64) as u64;
        v
    }

    pub fn is_zero(&self, a: &Fe) -> bool {
        a.iter().all(|&c| c == 0)
    }

    pub fn add(&self, a: &Fe, b: &Fe) -> Fe {
        a.iter().zip(b).map(|(x, y)| (x + y) % self.p).collect()
    }

    pub fn sub(&self, a: &Fe, b: &Fe) -> Fe {
        a.iter().zip(b).map(|(x, y)| (x + self.p - y) % self.p).collect()
    }

    pub fn mul(&self, a: &Fe, b: &Fe) -> Fe {
        let m = self.m();
        let p = self.p;
        let mut prod = vec![0u64; 2 * m];
        for (i, x) in a.iter().enumerate() {
            for (j, y) in b.iter().enumerate() {
                prod[i + j] = (prod[i + j] + x * y) % p;
            }
        }
        for d in (m..2 * m).rev() {
            let c = prod[d];
            if c != 0 {
                for k in 0..=m {
                    let sub = c * self.modulus[k] % p;
                    prod[d - m + k] = (prod[d - m + k] + p - sub) % p;
                }
            }
        }
        prod.truncate(m);
        prod
    }

    pub fn pow(&self, a: &Fe, mut e: u64) -> Fe {
        let mut base = a.clone();
        let mut acc = self.one();
        while e > 0 {
            if e & 1 == 1 {
                acc = self.mul(&acc, &base);
            }
            base = self.mul(&base, &base);
            e >>= 1;
        }
        acc
    }

    pub fn inverse(&self, a: &Fe) -> Fe {
        assert!(!self.is_zero(a), "zero has no inverse");
        self.pow(a, self.q() - 2)
    }

    /// Rank of a list of vectors by Gaussian elimination.
    pub fn rank(&self, vectors: &[Vec<Fe>]) -> usize {
        let mut rows: Vec<Vec<Fe>> = vectors.to_vec();
        let width = rows.first().map_or(0, |r| r.len());
        let mut rank = 0;
        for c in 0..width {
            let Some(k) = (rank..rows.len()).find(|&k| !self.is_zero(&rows[k][c])) else {
                continue;
            };
            rows.swap(rank, k);
            let inv = self.inverse(&rows[rank][c]);
            for i in 0..rows.len() {
                if i != rank && !self.is_zero(&rows[i][c]) {
                    let f = self.mul(&rows[i][c], &inv);
                    for j in 0..width {
                        let t = self.mul(&f, &rows[rank][j]);
                        rows[i][j] = self.sub(&rows[i][j], &t);
                    }
                }
            }
            rank += 1;
        }
        rank
    }

    pub fn elements(&self) -> Vec<Fe> {
        let m = self.m();
        (0..self.q())
            .map(|mut idx| {
                (0..m)
                    .map(|_| {
                        let c = idx % self.p;
                        idx /= self.p;
                        c
                    })
                    .collect()
            })
            .collect()
    }

    /// Coefficients of an element of a length-one Witt ring.
    pub fn from_residue(&self, x: &WittElement) -> Fe {
        x.coeffs().iter().map(|&c| c % self.p).collect()
    }
}

pub fn pow_mod(mut b: u64, mut e: u64, m: u64) -> u64 {
    let mut acc = 1 % m;
    b %= m;
    while e > 0 {
        if e & 1 == 1 {
            acc = acc * b % m;
        }
        b = b * b % m;
        e >>= 1;
    }
    acc
}
