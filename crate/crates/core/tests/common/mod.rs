//! Oracles shared by the integration tests. They only borrow plain data
//! (moduli, digits, coefficients) from the library and recompute everything
//! else from scratch.
#![allow(dead_code)]

pub mod fq;
pub mod ghost;
pub mod naive;
