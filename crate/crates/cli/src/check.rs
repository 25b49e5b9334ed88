//! `sll check --seed N`: a randomized self-check whose samples depend only
//! on the seed, so two runs with the same seed print identical reports.

use std::collections::hash_map::DefaultHasher;
use std::hash::{Hash, Hasher};

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::Serialize;
use serde_json::Value;

use sll_core::dieudonne::{DieudonneModule, Fixture};
use sll_core::random::{random_invertible_matrix, random_reducible_series};
use sll_core::singularity::{normal_form, Reduction};
use sll_core::{SeriesRing, WittElement, WittRing};

use crate::{CliError, Result};

#[derive(Serialize)]
struct Suite {
    name: &'static str,
    ring: String,
    checks: usize,
    failures: usize,
}

#[derive(Serialize)]
struct Report {
    seed: u64,
    samples: usize,
    suites: Vec<Suite>,
    failures: usize,
    /// Hash of every sampled input, for comparing runs.
    digest: String,
}

struct Checker {
    rng: ChaCha8Rng,
    hasher: DefaultHasher,
    suites: Vec<Suite>,
}

impl Checker {
    fn record(&mut self, x: &WittElement) {
        x.coeffs().hash(&mut self.hasher);
    }

    fn sample(&mut self, ring: &WittRing) -> WittElement {
        let x = ring.random(&mut self.rng);
        self.record(&x);
        x
    }

    fn ring_axioms(&mut self, ring: &WittRing, samples: usize) {
        let mut failures = 0;
        for _ in 0..samples {
            let (a, b, c) = (self.sample(ring), self.sample(ring), self.sample(ring));
            let ok = &(&a * &b) * &c == &a * &(&b * &c)
                && &a * &(&b + &c) == &(&a * &b) + &(&a * &c)
                && (&a * &b).frobenius() == &a.frobenius() * &b.frobenius()
                && (&a + &b).frobenius() == &a.frobenius() + &b.frobenius()
                && ring.from_digits(&a.digits()).is_ok_and(|x| x == a);
            failures += usize::from(!ok);
        }
        self.suites.push(Suite { name: "witt", ring: ring.to_string(), checks: samples, failures });
    }

    fn normal_forms(&mut self, ring: &SeriesRing, samples: usize) {
        let mut failures = 0;
        for _ in 0..samples {
            let f = random_reducible_series(ring, 2, &mut self.rng);
            for (_, c) in f.terms() {
                self.record(&c);
            }
            let ok = match normal_form(&f) {
                Ok(Reduction::NormalForm(nf)) => nf.certifies(&f) && nf.q_prime.is_nondegenerate(),
                _ => false,
            };
            failures += usize::from(!ok);
        }
        let name = "normal_form";
        self.suites.push(Suite { name, ring: ring.to_string(), checks: samples, failures });
    }

    fn base_changes(&mut self, ring: &WittRing, samples: usize) {
        let mut failures = 0;
        let fixtures = [Fixture::Iia, Fixture::Iib, Fixture::Ordinary, Fixture::LagrangianGeneric];
        for i in 0..samples {
            let m = DieudonneModule::fixture(fixtures[i % fixtures.len()], ring).expect("fixture");
            let g = random_invertible_matrix(ring, 4, &mut self.rng);
            for x in g.entries() {
                self.record(x);
            }
            let ok = m.base_change(&g).is_ok_and(|m2| {
                m2.is_valid()
                    && m2.a_number() == m.a_number()
                    && m2.p_rank() == m.p_rank()
                    && m2.kernel_type().ok() == m.kernel_type().ok()
            });
            failures += usize::from(!ok);
        }
        self.suites.push(Suite { name: "dieudonne_base_change", ring: ring.to_string(), checks: samples, failures });
    }
}

pub fn run(seed: u64, samples: usize) -> Result<Value> {
    let ring = |q, n| WittRing::with_order(q, n).expect("built-in field");
    let mut c = Checker { rng: ChaCha8Rng::seed_from_u64(seed), hasher: DefaultHasher::new(), suites: Vec::new() };
    for (q, n) in [(5, 3), (9, 2), (4, 3)] {
        c.ring_axioms(&ring(q, n), samples);
    }
    for (q, n, k) in [(9, 2, 3), (2, 3, 4)] {
        c.normal_forms(&SeriesRing::new(&ring(q, n), k, 6).expect("valid ring"), samples);
    }
    c.base_changes(&ring(9, 2), samples);
    let failures = c.suites.iter().map(|s| s.failures).sum();
    let report = Report {
        seed,
        samples,
        failures,
        digest: format!("{:016x}", c.hasher.finish()),
        suites: c.suites,
    };
    if failures > 0 {
        let detail = serde_json::to_string(&report).unwrap_or_default();
        return Err(CliError::Internal(format!("{failures} self-check failures: {detail}")));
    }
    serde_json::to_value(&report).map_err(|e| CliError::Internal(e.to_string()))
}
