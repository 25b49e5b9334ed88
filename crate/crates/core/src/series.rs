//! Multivariate power series over a Witt ring, truncated at total degree `D`.
//!
//! Monomials of degree `< D` are numbered once per ring in graded order:
//! by total degree, then by exponent vector in decreasing lexicographic order
//! (so `x1` comes before `x2` and `x1^2` before `x1*x2`). A series is a sparse
//! map from monomial rank to a nonzero coefficient, which makes equality
//! structural and iteration order canonical.

use std::collections::{BTreeMap, HashMap};
use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};
use std::sync::{Arc, OnceLock};

use thiserror::Error;

use crate::witt::{Coeffs, RingError, WittElement, WittRing, GENERATOR_NAME};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum SeriesError {
    #[error("truncation degree must be at least 3, got {0}")]
    BadDegree(usize),
    #[error("a series ring needs at least one variable")]
    NoVariables,
    #[error("invalid variable name {0:?}")]
    BadName(String),
    #[error("series belong to different rings ({left} vs {right})")]
    Mismatch { left: String, right: String },
    #[error("expected {expected} substitutions, got {got}")]
    Arity { expected: usize, got: usize },
    #[error("substitution for variable {index} has a constant term outside the maximal ideal")]
    UnitConstant { index: usize },
    #[error("constant term is not a unit")]
    NotUnit,
    #[error("degree {degree} is not below the truncation degree {bound}")]
    DegreeOutOfRange { degree: usize, bound: usize },
    #[error("exponent vector has length {got}, expected {expected}")]
    ExponentLength { expected: usize, got: usize },
    #[error("parse error at byte {pos}: {msg}")]
    Parse { pos: usize, msg: String },
    #[error(transparent)]
    Ring(#[from] RingError),
}

type Exponent = Vec<u32>;

struct Inner {
    coeff: WittRing,
    nvars: usize,
    degree: usize,
    names: Vec<String>,
    monomials: Vec<Exponent>,
    degrees: Vec<usize>,
    index: HashMap<Exponent, u32>,
    products: OnceLock<Option<Vec<u32>>>,
}

/// `A[[x_1..x_k]] / (x)^D` with `A = W_n(F_q)`.
#[derive(Clone)]
pub struct SeriesRing(Arc<Inner>);

/// Largest monomial count for which the full product table is cached.
const PRODUCT_TABLE_LIMIT: usize = 2048;

impl SeriesRing {
    /// Ring with variables `x1..xk`.
    pub fn new(coeff: &WittRing, nvars: usize, degree: usize) -> Result<Self, SeriesError> {
        let names = (1..=nvars).map(|i| format!("x{i}")).collect();
        Self::with_names(coeff, names, degree)
    }

    pub fn with_names(coeff: &WittRing, names: Vec<String>, degree: usize) -> Result<Self, SeriesError> {
        if degree < 3 {
            return Err(SeriesError::BadDegree(degree));
        }
        if names.is_empty() {
            return Err(SeriesError::NoVariables);
        }
        for (i, name) in names.iter().enumerate() {
            let valid = name.chars().next().is_some_and(|c| c.is_ascii_alphabetic() || c == '_')
                && name.chars().all(|c| c.is_ascii_alphanumeric() || c == '_')
                && name != "p"
                && name != GENERATOR_NAME;
            if !valid || names[..i].contains(name) {
                return Err(SeriesError::BadName(name.clone()));
            }
        }
        let nvars = names.len();
        let mut monomials = Vec::new();
        let mut degrees = Vec::new();
        for d in 0..degree {
            let mut block = Vec::new();
            compositions(d as u32, nvars, &mut vec![0; nvars], 0, &mut block);
            degrees.extend(std::iter::repeat_n(d, block.len()));
            monomials.extend(block);
        }
        let index = monomials.iter().enumerate().map(|(i, e)| (e.clone(), i as u32)).collect();
        Ok(SeriesRing(Arc::new(Inner {
            coeff: coeff.clone(),
            nvars,
            degree,
            names,
            monomials,
            degrees,
            index,
            products: OnceLock::new(),
        })))
    }

    pub fn coeff_ring(&self) -> &WittRing {
        &self.0.coeff
    }

    pub fn nvars(&self) -> usize {
        self.0.nvars
    }

    /// The truncation degree `D`: only monomials of degree `< D` survive.
    pub fn degree(&self) -> usize {
        self.0.degree
    }

    pub fn names(&self) -> &[String] {
        &self.0.names
    }

    /// Number of monomials of degree `< D`.
    pub fn monomial_count(&self) -> usize {
        self.0.monomials.len()
    }

    /// Exponent vector of the monomial with the given rank.
    pub fn monomial(&self, rank: usize) -> &[u32] {
        &self.0.monomials[rank]
    }

    pub fn rank_of(&self, exp: &[u32]) -> Option<usize> {
        self.0.index.get(exp).map(|&r| r as usize)
    }

    /// Same variables and coefficients, another truncation degree.
    pub fn with_degree(&self, degree: usize) -> Result<SeriesRing, SeriesError> {
        if degree == self.degree() {
            return Ok(self.clone());
        }
        Self::with_names(&self.0.coeff, self.0.names.clone(), degree)
    }

    /// Same variables and degree over another coefficient ring.
    pub fn with_coeff_ring(&self, coeff: &WittRing) -> Result<SeriesRing, SeriesError> {
        if coeff == self.coeff_ring() {
            return Ok(self.clone());
        }
        Self::with_names(coeff, self.0.names.clone(), self.0.degree)
    }

    pub fn zero(&self) -> TruncatedSeries {
        TruncatedSeries { ring: self.clone(), terms: BTreeMap::new() }
    }

    pub fn one(&self) -> TruncatedSeries {
        self.constant(&self.0.coeff.one())
    }

    pub fn constant(&self, c: &WittElement) -> TruncatedSeries {
        self.monomial_term(0, c)
    }

    /// The variable with index `i` (zero based).
    pub fn var(&self, i: usize) -> TruncatedSeries {
        assert!(i < self.nvars(), "variable index out of range");
        let mut e = vec![0; self.nvars()];
        e[i] = 1;
        let r = self.rank_of(&e).expect("degree one survives truncation");
        self.monomial_term(r, &self.0.coeff.one())
    }

    pub fn vars(&self) -> Vec<TruncatedSeries> {
        (0..self.nvars()).map(|i| self.var(i)).collect()
    }

    pub fn var_by_name(&self, name: &str) -> Option<TruncatedSeries> {
        self.0.names.iter().position(|n| n == name).map(|i| self.var(i))
    }

    /// `c * x^exp`; zero when the monomial is truncated away.
    pub fn term(&self, exp: &[u32], c: &WittElement) -> Result<TruncatedSeries, SeriesError> {
        if exp.len() != self.nvars() {
            return Err(SeriesError::ExponentLength { expected: self.nvars(), got: exp.len() });
        }
        self.check_coeff(c)?;
        Ok(match self.rank_of(exp) {
            Some(r) => self.monomial_term(r, c),
            None => self.zero(),
        })
    }

    fn monomial_term(&self, rank: usize, c: &WittElement) -> TruncatedSeries {
        let mut s = self.zero();
        if !c.is_zero() {
            s.terms.insert(rank as u32, c.coeffs().into());
        }
        s
    }

    /// Sum of `c * x^e` over the given terms; repeated exponents add up.
    pub fn from_terms<'a>(
        &self,
        terms: impl IntoIterator<Item = (&'a [u32], WittElement)>,
    ) -> Result<TruncatedSeries, SeriesError> {
        let mut s = self.zero();
        for (e, c) in terms {
            s = &s + &self.term(e, &c)?;
        }
        Ok(s)
    }

    fn check_coeff(&self, c: &WittElement) -> Result<(), SeriesError> {
        if c.ring() != self.coeff_ring() {
            return Err(RingError::Mismatch { left: self.coeff_ring().to_string(), right: c.ring().to_string() }.into());
        }
        Ok(())
    }

    fn product_rank(&self, a: usize, b: usize) -> usize {
        let table = self.0.products.get_or_init(|| {
            let n = self.monomial_count();
            (n <= PRODUCT_TABLE_LIMIT).then(|| {
                let mut t = vec![u32::MAX; n * n];
                for i in 0..n {
                    for j in 0..n {
                        if self.0.degrees[i] + self.0.degrees[j] < self.degree() {
                            t[i * n + j] = self.sum_rank(i, j) as u32;
                        }
                    }
                }
                t
            })
        });
        match table {
            Some(t) => t[a * self.monomial_count() + b] as usize,
            None => self.sum_rank(a, b),
        }
    }

    fn sum_rank(&self, a: usize, b: usize) -> usize {
        let e: Exponent = self.0.monomials[a].iter().zip(&self.0.monomials[b]).map(|(x, y)| x + y).collect();
        self.0.index[&e] as usize
    }

    /// Parses text such as `p + t11*t22 - t12*t21` or `(1 + z)*x1^2 - 3*x2`.
    pub fn parse(&self, text: &str) -> Result<TruncatedSeries, SeriesError> {
        Parser { ring: self, src: text.as_bytes(), pos: 0 }.parse_all()
    }
}

fn compositions(d: u32, nvars: usize, cur: &mut Vec<u32>, at: usize, out: &mut Vec<Exponent>) {
    if at == nvars - 1 {
        cur[at] = d;
        out.push(cur.clone());
        cur[at] = 0;
        return;
    }
    for k in (0..=d).rev() {
        cur[at] = k;
        compositions(d - k, nvars, cur, at + 1, out);
    }
    cur[at] = 0;
}

impl PartialEq for SeriesRing {
    fn eq(&self, other: &Self) -> bool {
        Arc::ptr_eq(&self.0, &other.0)
            || (self.0.coeff == other.0.coeff && self.0.degree == other.0.degree && self.0.names == other.0.names)
    }
}

impl Eq for SeriesRing {}

impl fmt::Display for SeriesRing {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}[[{}]]/deg {}", self.0.coeff, self.0.names.join(","), self.0.degree)
    }
}

impl fmt::Debug for SeriesRing {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(self, f)
    }
}

#[derive(Clone)]
pub struct TruncatedSeries {
    ring: SeriesRing,
    terms: BTreeMap<u32, Coeffs>,
}

impl TruncatedSeries {
    pub fn ring(&self) -> &SeriesRing {
        &self.ring
    }

    fn coeff_ring(&self) -> &WittRing {
        self.ring.coeff_ring()
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn num_terms(&self) -> usize {
        self.terms.len()
    }

    /// Nonzero terms in graded order.
    pub fn terms(&self) -> Vec<(Vec<u32>, WittElement)> {
        self.terms
            .iter()
            .map(|(&r, c)| (self.ring.monomial(r as usize).to_vec(), self.coeff_ring().raw(c)))
            .collect()
    }

    pub fn coeff(&self, exp: &[u32]) -> WittElement {
        match self.ring.rank_of(exp).and_then(|r| self.terms.get(&(r as u32))) {
            Some(c) => self.coeff_ring().raw(c),
            None => self.coeff_ring().zero(),
        }
    }

    pub fn constant_term(&self) -> WittElement {
        match self.terms.get(&0) {
            Some(c) => self.coeff_ring().raw(c),
            None => self.coeff_ring().zero(),
        }
    }

    /// Coefficients of `x_1, ..., x_k`.
    pub fn linear_coefficients(&self) -> Vec<WittElement> {
        (0..self.ring.nvars())
            .map(|i| {
                let mut e = vec![0; self.ring.nvars()];
                e[i] = 1;
                self.coeff(&e)
            })
            .collect()
    }

    /// The homogeneous part of degree `d`.
    pub fn graded_part(&self, d: usize) -> Result<TruncatedSeries, SeriesError> {
        if d >= self.ring.degree() {
            return Err(SeriesError::DegreeOutOfRange { degree: d, bound: self.ring.degree() });
        }
        Ok(self.filter_degrees(|k| k == d))
    }

    fn filter_degrees(&self, keep: impl Fn(usize) -> bool) -> TruncatedSeries {
        let terms = self
            .terms
            .iter()
            .filter(|(&r, _)| keep(self.ring.0.degrees[r as usize]))
            .map(|(&r, c)| (r, c.clone()))
            .collect();
        TruncatedSeries { ring: self.ring.clone(), terms }
    }

    /// Terms of degree at least `d`.
    pub fn tail_from(&self, d: usize) -> TruncatedSeries {
        self.filter_degrees(|k| k >= d)
    }

    /// Lowest degree carrying a nonzero coefficient.
    pub fn order(&self) -> Option<usize> {
        self.terms.keys().next().map(|&r| self.ring.0.degrees[r as usize])
    }

    pub fn is_homogeneous(&self, d: usize) -> bool {
        self.terms.keys().all(|&r| self.ring.0.degrees[r as usize] == d)
    }

    fn check(&self, other: &TruncatedSeries) -> Result<(), SeriesError> {
        if self.ring != other.ring {
            return Err(SeriesError::Mismatch { left: self.ring.to_string(), right: other.ring.to_string() });
        }
        Ok(())
    }

    fn insert_sum(ring: &WittRing, terms: &mut BTreeMap<u32, Coeffs>, r: u32, c: &[u64]) {
        use std::collections::btree_map::Entry;
        match terms.entry(r) {
            Entry::Vacant(v) => {
                if c.iter().any(|&x| x != 0) {
                    v.insert(c.into());
                }
            }
            Entry::Occupied(mut o) => {
                let s = ring.raw_add(o.get(), c);
                if s.iter().all(|&x| x == 0) {
                    o.remove();
                } else {
                    *o.get_mut() = s;
                }
            }
        }
    }

    pub fn try_add(&self, other: &TruncatedSeries) -> Result<TruncatedSeries, SeriesError> {
        self.check(other)?;
        let mut terms = self.terms.clone();
        for (&r, c) in &other.terms {
            Self::insert_sum(self.coeff_ring(), &mut terms, r, c);
        }
        Ok(TruncatedSeries { ring: self.ring.clone(), terms })
    }

    pub fn try_sub(&self, other: &TruncatedSeries) -> Result<TruncatedSeries, SeriesError> {
        self.check(other)?;
        self.try_add(&-other)
    }

    pub fn try_mul(&self, other: &TruncatedSeries) -> Result<TruncatedSeries, SeriesError> {
        self.check(other)?;
        let ring = &self.ring;
        let cr = self.coeff_ring();
        let bound = ring.degree();
        let degrees = &ring.0.degrees;
        let mut buf: Vec<Option<Coeffs>> = vec![None; ring.monomial_count()];
        for (&ra, ca) in &self.terms {
            let da = degrees[ra as usize];
            for (&rb, cb) in &other.terms {
                if da + degrees[rb as usize] >= bound {
                    break;
                }
                let prod = cr.raw_mul(ca, cb);
                let slot = &mut buf[ring.product_rank(ra as usize, rb as usize)];
                match slot {
                    Some(acc) => cr.raw_add_assign(acc, &prod),
                    None => *slot = Some(prod),
                }
            }
        }
        let terms = buf
            .into_iter()
            .enumerate()
            .filter_map(|(r, c)| c.filter(|c| c.iter().any(|&x| x != 0)).map(|c| (r as u32, c)))
            .collect();
        Ok(TruncatedSeries { ring: ring.clone(), terms })
    }

    pub fn scalar_mul(&self, c: &WittElement) -> TruncatedSeries {
        assert_eq!(c.ring(), self.coeff_ring(), "scalar from another ring");
        let cr = self.coeff_ring();
        let terms = self
            .terms
            .iter()
            .map(|(&r, x)| (r, cr.raw_mul(x, c.coeffs())))
            .filter(|(_, x)| x.iter().any(|&v| v != 0))
            .collect();
        TruncatedSeries { ring: self.ring.clone(), terms }
    }

    pub fn pow(&self, e: u32) -> TruncatedSeries {
        let mut acc = self.ring.one();
        for _ in 0..e {
            acc = &acc * self;
        }
        acc
    }

    /// `f(phi_1, ..., phi_k)`, computed in the ring of the `phi_i`.
    pub fn substitute(&self, phi: &[TruncatedSeries]) -> Result<TruncatedSeries, SeriesError> {
        let nvars = self.ring.nvars();
        if phi.len() != nvars {
            return Err(SeriesError::Arity { expected: nvars, got: phi.len() });
        }
        let target = phi[0].ring().clone();
        for (i, g) in phi.iter().enumerate() {
            g.check(&phi[0])?;
            if g.constant_term().valuation() == 0 {
                return Err(SeriesError::UnitConstant { index: i });
            }
        }
        if target.coeff_ring() != self.coeff_ring() {
            return Err(RingError::Mismatch { left: self.coeff_ring().to_string(), right: target.coeff_ring().to_string() }.into());
        }
        let mut memo: HashMap<u32, TruncatedSeries> = HashMap::new();
        memo.insert(0, target.one());
        let mut out = target.zero();
        for (&r, c) in &self.terms {
            let value = self.monomial_value(r, phi, &mut memo);
            out = &out + &value.scalar_mul(&self.coeff_ring().raw(c));
        }
        Ok(out)
    }

    fn monomial_value(&self, rank: u32, phi: &[TruncatedSeries], memo: &mut HashMap<u32, TruncatedSeries>) -> TruncatedSeries {
        if let Some(v) = memo.get(&rank) {
            return v.clone();
        }
        let e = self.ring.monomial(rank as usize);
        let j = e.iter().position(|&x| x > 0).expect("nonconstant monomial");
        let mut prev = e.to_vec();
        prev[j] -= 1;
        let prev_rank = self.ring.rank_of(&prev).expect("lower monomials survive truncation") as u32;
        let v = &self.monomial_value(prev_rank, phi, memo) * &phi[j];
        memo.insert(rank, v.clone());
        v
    }

    /// Multiplicative inverse when the constant term is a unit.
    pub fn invert_unit(&self) -> Result<TruncatedSeries, SeriesError> {
        let c0 = self.constant_term();
        let c_inv = c0.inverse().map_err(|_| SeriesError::NotUnit)?;
        // f = c0 (1 - h) with h in (x), so f^-1 = c0^-1 (1 + h + h^2 + ...)
        let h = -&self.tail_from(1).scalar_mul(&c_inv);
        let mut acc = self.ring.one();
        let mut power = self.ring.one();
        for _ in 1..self.ring.degree() {
            power = &power * &h;
            if power.is_zero() {
                break;
            }
            acc = &acc + &power;
        }
        Ok(acc.scalar_mul(&c_inv))
    }

    pub fn partial_derivative(&self, i: usize) -> TruncatedSeries {
        assert!(i < self.ring.nvars(), "variable index out of range");
        let mut out = self.ring.zero();
        for (e, c) in self.terms() {
            if e[i] == 0 {
                continue;
            }
            let mut d = e.clone();
            d[i] -= 1;
            let t = self.ring.term(&d, &c.scale_int(e[i] as u64)).expect("same ring");
            out = &out + &t;
        }
        out
    }

    /// Value at a point of the coefficient ring; exact for the stored
    /// polynomial.
    pub fn eval(&self, point: &[WittElement]) -> Result<WittElement, SeriesError> {
        if point.len() != self.ring.nvars() {
            return Err(SeriesError::Arity { expected: self.ring.nvars(), got: point.len() });
        }
        let cr = self.coeff_ring();
        let mut acc = cr.zero();
        for (e, c) in self.terms() {
            let mut t = c;
            for (x, &k) in point.iter().zip(&e) {
                t = t * x.pow(k as u64);
            }
            acc = acc + t;
        }
        Ok(acc)
    }

    /// Drops all monomials of degree `>= degree` and moves to that ring.
    pub fn truncate(&self, degree: usize) -> Result<TruncatedSeries, SeriesError> {
        let target = self.ring.with_degree(degree)?;
        self.move_to(&target)
    }

    /// Re-expresses the series in a ring with the same variables and
    /// coefficient ring; monomials beyond the target degree are dropped.
    pub fn move_to(&self, target: &SeriesRing) -> Result<TruncatedSeries, SeriesError> {
        if target.names() != self.ring.names() || target.coeff_ring() != self.coeff_ring() {
            return Err(SeriesError::Mismatch { left: self.ring.to_string(), right: target.to_string() });
        }
        let mut terms = BTreeMap::new();
        for (&r, c) in &self.terms {
            if let Some(t) = target.rank_of(self.ring.monomial(r as usize)) {
                terms.insert(t as u32, c.clone());
            }
        }
        Ok(TruncatedSeries { ring: target.clone(), terms })
    }

    /// Applies `f` to every coefficient, landing in `target`.
    pub fn map_coefficients(
        &self,
        target: &SeriesRing,
        f: impl Fn(&WittElement) -> WittElement,
    ) -> Result<TruncatedSeries, SeriesError> {
        if target.names() != self.ring.names() {
            return Err(SeriesError::Mismatch { left: self.ring.to_string(), right: target.to_string() });
        }
        let mut out = target.zero();
        for (e, c) in self.terms() {
            out = &out + &target.term(&e, &f(&c))?;
        }
        Ok(out)
    }

    /// Coefficient-wise reduction mod `p`, as a series over `F_q`.
    pub fn reduce_mod_p(&self) -> TruncatedSeries {
        let target = self
            .ring
            .with_coeff_ring(&self.coeff_ring().residue_field())
            .expect("same names and degree are valid");
        self.map_coefficients(&target, |c| c.residue()).expect("same variables")
    }

    /// Smallest valuation of a coefficient (`n` for zero).
    pub fn valuation(&self) -> usize {
        self.terms()
            .iter()
            .map(|(_, c)| c.valuation())
            .min()
            .unwrap_or(self.coeff_ring().n())
    }
}

impl PartialEq for TruncatedSeries {
    fn eq(&self, other: &Self) -> bool {
        self.ring == other.ring && self.terms == other.terms
    }
}

impl Eq for TruncatedSeries {}

impl fmt::Display for TruncatedSeries {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return write!(f, "0");
        }
        for (idx, (e, c)) in self.terms().into_iter().enumerate() {
            let (neg, body) = c.signed_parts();
            let mono = format_monomial(&e, self.ring.names());
            let text = match (body.as_str(), mono.is_empty()) {
                (_, true) => body,
                ("1", false) => mono,
                (_, false) => format!("{body}*{mono}"),
            };
            match (idx, neg) {
                (0, true) => write!(f, "-{text}")?,
                (0, false) => write!(f, "{text}")?,
                (_, true) => write!(f, " - {text}")?,
                (_, false) => write!(f, " + {text}")?,
            }
        }
        Ok(())
    }
}

impl fmt::Debug for TruncatedSeries {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} in {}", self, self.ring)
    }
}

fn format_monomial(e: &[u32], names: &[String]) -> String {
    let parts: Vec<String> = e
        .iter()
        .zip(names)
        .filter(|(&k, _)| k > 0)
        .map(|(&k, name)| if k == 1 { name.clone() } else { format!("{name}^{k}") })
        .collect();
    parts.join("*")
}

macro_rules! series_binop {
    ($trait:ident, $method:ident, $try:ident) => {
        impl $trait<&TruncatedSeries> for &TruncatedSeries {
            type Output = TruncatedSeries;
            fn $method(self, rhs: &TruncatedSeries) -> TruncatedSeries {
                self.$try(rhs).unwrap_or_else(|e| panic!("{e}"))
            }
        }
        impl $trait<TruncatedSeries> for TruncatedSeries {
            type Output = TruncatedSeries;
            fn $method(self, rhs: TruncatedSeries) -> TruncatedSeries {
                (&self).$method(&rhs)
            }
        }
    };
}

series_binop!(Add, add, try_add);
series_binop!(Sub, sub, try_sub);
series_binop!(Mul, mul, try_mul);

impl Neg for &TruncatedSeries {
    type Output = TruncatedSeries;
    fn neg(self) -> TruncatedSeries {
        self.scalar_mul(&-self.coeff_ring().one())
    }
}

impl Neg for TruncatedSeries {
    type Output = TruncatedSeries;
    fn neg(self) -> TruncatedSeries {
        -&self
    }
}

struct Parser<'a> {
    ring: &'a SeriesRing,
    src: &'a [u8],
    pos: usize,
}

impl Parser<'_> {
    fn err<T>(&self, msg: impl Into<String>) -> Result<T, SeriesError> {
        Err(SeriesError::Parse { pos: self.pos, msg: msg.into() })
    }

    fn skip_ws(&mut self) {
        while self.pos < self.src.len() && self.src[self.pos].is_ascii_whitespace() {
            self.pos += 1;
        }
    }

    fn peek(&mut self) -> Option<u8> {
        self.skip_ws();
        self.src.get(self.pos).copied()
    }

    fn parse_all(mut self) -> Result<TruncatedSeries, SeriesError> {
        let s = self.expr()?;
        if self.peek().is_some() {
            return self.err("unexpected trailing input");
        }
        Ok(s)
    }

    fn expr(&mut self) -> Result<TruncatedSeries, SeriesError> {
        let mut acc = match self.peek() {
            Some(b'-') => {
                self.pos += 1;
                -self.term()?
            }
            Some(b'+') => {
                self.pos += 1;
                self.term()?
            }
            _ => self.term()?,
        };
        loop {
            match self.peek() {
                Some(b'+') => {
                    self.pos += 1;
                    acc = &acc + &self.term()?;
                }
                Some(b'-') => {
                    self.pos += 1;
                    acc = &acc - &self.term()?;
                }
                _ => return Ok(acc),
            }
        }
    }

    fn term(&mut self) -> Result<TruncatedSeries, SeriesError> {
        let mut acc = self.factor()?;
        while self.peek() == Some(b'*') {
            self.pos += 1;
            acc = &acc * &self.factor()?;
        }
        Ok(acc)
    }

    fn factor(&mut self) -> Result<TruncatedSeries, SeriesError> {
        let base = self.atom()?;
        if self.peek() == Some(b'^') {
            self.pos += 1;
            self.skip_ws();
            let e = self.integer()?;
            let e = u32::try_from(e).or_else(|_| self.err("exponent too large"))?;
            return Ok(base.pow(e));
        }
        Ok(base)
    }

    fn integer(&mut self) -> Result<u64, SeriesError> {
        let start = self.pos;
        while self.pos < self.src.len() && self.src[self.pos].is_ascii_digit() {
            self.pos += 1;
        }
        if start == self.pos {
            return self.err("expected an integer");
        }
        let text = std::str::from_utf8(&self.src[start..self.pos]).expect("ascii digits");
        text.parse().or_else(|_| self.err("integer too large"))
    }

    fn atom(&mut self) -> Result<TruncatedSeries, SeriesError> {
        let coeff = self.ring.coeff_ring();
        match self.peek() {
            Some(b'(') => {
                self.pos += 1;
                let inner = self.expr()?;
                if self.peek() != Some(b')') {
                    return self.err("expected ')'");
                }
                self.pos += 1;
                Ok(inner)
            }
            Some(c) if c.is_ascii_digit() => {
                let k = self.integer()?;
                let k = (k % coeff.characteristic()) as i64;
                Ok(self.ring.constant(&coeff.from_int(k)))
            }
            Some(c) if c.is_ascii_alphabetic() || c == b'_' => {
                let start = self.pos;
                while self.pos < self.src.len() && (self.src[self.pos].is_ascii_alphanumeric() || self.src[self.pos] == b'_') {
                    self.pos += 1;
                }
                let name = std::str::from_utf8(&self.src[start..self.pos]).expect("ascii identifier");
                if name == "p" {
                    return Ok(self.ring.constant(&coeff.uniformizer()));
                }
                if name == GENERATOR_NAME {
                    return Ok(self.ring.constant(&coeff.generator()));
                }
                match self.ring.var_by_name(name) {
                    Some(v) => Ok(v),
                    None => {
                        self.pos = start;
                        self.err(format!("unknown variable {name:?}"))
                    }
                }
            }
            Some(_) => self.err("unexpected character"),
            None => self.err("unexpected end of input"),
        }
    }
}
