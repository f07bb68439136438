//! Sparse multivariate polynomials with exact rational coefficients.
//!
//! Terms are stored in a `BTreeMap` keyed by exponent vectors under the
//! graded-lexicographic order, so iteration, equality and serialization are
//! canonical. Zero coefficients are never stored.

use std::cmp::Ordering;
use std::collections::BTreeMap;
use std::fmt;
use std::ops::{Add, AddAssign, Mul, Neg, Sub, SubAssign};

use num_bigint::BigInt;
use num_traits::{One, Signed, ToPrimitive, Zero};

use crate::error::PolyError;
use crate::Rat;

/// Exponent vector ordered graded-lexicographically: total degree first,
/// then lexicographic with the first variable most significant.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Monomial(pub Vec<u32>);

impl Monomial {
    pub fn one(nvars: usize) -> Self {
        Monomial(vec![0; nvars])
    }

    pub fn degree(&self) -> u32 {
        self.0.iter().sum()
    }

    pub fn divides(&self, other: &Monomial) -> bool {
        self.0.iter().zip(&other.0).all(|(a, b)| a <= b)
    }

    fn mul(&self, other: &Monomial) -> Monomial {
        Monomial(self.0.iter().zip(&other.0).map(|(a, b)| a + b).collect())
    }

    fn div(&self, other: &Monomial) -> Monomial {
        Monomial(self.0.iter().zip(&other.0).map(|(a, b)| a - b).collect())
    }
}

impl Ord for Monomial {
    fn cmp(&self, other: &Self) -> Ordering {
        self.degree()
            .cmp(&other.degree())
            .then_with(|| self.0.cmp(&other.0))
    }
}

impl PartialOrd for Monomial {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

#[derive(Clone, PartialEq, Eq, Hash)]
pub struct RatPoly {
    nvars: usize,
    terms: BTreeMap<Monomial, Rat>,
}

impl RatPoly {
    pub fn zero(nvars: usize) -> Self {
        RatPoly {
            nvars,
            terms: BTreeMap::new(),
        }
    }

    pub fn one(nvars: usize) -> Self {
        Self::constant(nvars, Rat::one())
    }

    pub fn constant(nvars: usize, c: Rat) -> Self {
        let mut p = Self::zero(nvars);
        if !c.is_zero() {
            p.terms.insert(Monomial::one(nvars), c);
        }
        p
    }

    pub fn from_int(nvars: usize, c: i64) -> Self {
        Self::constant(nvars, Rat::from_integer(BigInt::from(c)))
    }

    /// The coordinate function `x_var`.
    pub fn var(nvars: usize, var: usize) -> Self {
        assert!(var < nvars, "variable index {var} out of range for {nvars} variables");
        let mut e = vec![0; nvars];
        e[var] = 1;
        Self::monomial(nvars, e, Rat::one())
    }

    pub fn monomial(nvars: usize, exp: Vec<u32>, c: Rat) -> Self {
        assert_eq!(exp.len(), nvars, "exponent length must equal nvars");
        let mut p = Self::zero(nvars);
        if !c.is_zero() {
            p.terms.insert(Monomial(exp), c);
        }
        p
    }

    /// Builds a polynomial from `(exponent, coefficient)` pairs, merging
    /// repeated exponents and dropping zeros.
    pub fn from_terms<I>(nvars: usize, terms: I) -> Result<Self, PolyError>
    where
        I: IntoIterator<Item = (Vec<u32>, Rat)>,
    {
        let mut p = Self::zero(nvars);
        for (e, c) in terms {
            if e.len() != nvars {
                return Err(PolyError::DimensionMismatch {
                    expected: nvars,
                    found: e.len(),
                });
            }
            p.add_term(Monomial(e), c);
        }
        Ok(p)
    }

    pub fn nvars(&self) -> usize {
        self.nvars
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn num_terms(&self) -> usize {
        self.terms.len()
    }

    pub fn terms(&self) -> impl DoubleEndedIterator<Item = (&[u32], &Rat)> + '_ {
        self.terms.iter().map(|(m, c)| (m.0.as_slice(), c))
    }

    pub fn coefficient(&self, exp: &[u32]) -> Rat {
        self.terms
            .get(&Monomial(exp.to_vec()))
            .cloned()
            .unwrap_or_else(Rat::zero)
    }

    pub fn leading_term(&self) -> Option<(&Monomial, &Rat)> {
        self.terms.iter().next_back()
    }

    pub fn total_degree(&self) -> u32 {
        self.terms.keys().map(Monomial::degree).max().unwrap_or(0)
    }

    pub fn degree_in(&self, var: usize) -> u32 {
        self.terms.keys().map(|m| m.0[var]).max().unwrap_or(0)
    }

    /// Whether any stored term has a nonzero exponent in `var`.
    pub fn depends_on(&self, var: usize) -> bool {
        self.terms.keys().any(|m| m.0[var] > 0)
    }

    pub fn is_constant(&self) -> bool {
        self.terms.keys().all(|m| m.degree() == 0)
    }

    /// Value of a constant polynomial, `None` otherwise.
    pub fn constant_value(&self) -> Option<Rat> {
        if self.is_constant() {
            Some(self.coefficient(&vec![0; self.nvars]))
        } else {
            None
        }
    }

    fn add_term(&mut self, m: Monomial, c: Rat) {
        if c.is_zero() {
            return;
        }
        match self.terms.entry(m) {
            std::collections::btree_map::Entry::Vacant(v) => {
                v.insert(c);
            }
            std::collections::btree_map::Entry::Occupied(mut o) => {
                *o.get_mut() += c;
                if o.get().is_zero() {
                    o.remove();
                }
            }
        }
    }

    fn check_same(&self, other: &RatPoly) {
        assert_eq!(
            self.nvars, other.nvars,
            "polynomials live in different variable counts"
        );
    }

    pub fn scale(&self, c: &Rat) -> RatPoly {
        if c.is_zero() {
            return RatPoly::zero(self.nvars);
        }
        RatPoly {
            nvars: self.nvars,
            terms: self
                .terms
                .iter()
                .map(|(m, v)| (m.clone(), v * c))
                .collect(),
        }
    }

    fn mul_term(&self, m: &Monomial, c: &Rat) -> RatPoly {
        RatPoly {
            nvars: self.nvars,
            terms: self
                .terms
                .iter()
                .map(|(k, v)| (k.mul(m), v * c))
                .collect(),
        }
    }

    pub fn pow(&self, mut e: u32) -> RatPoly {
        let mut base = self.clone();
        let mut acc = RatPoly::one(self.nvars);
        while e > 0 {
            if e & 1 == 1 {
                acc = &acc * &base;
            }
            e >>= 1;
            if e > 0 {
                base = &base * &base;
            }
        }
        acc
    }

    /// Exact value at a rational point.
    pub fn eval(&self, point: &[Rat]) -> Result<Rat, PolyError> {
        if point.len() != self.nvars {
            return Err(PolyError::DimensionMismatch {
                expected: self.nvars,
                found: point.len(),
            });
        }
        let mut powers: Vec<Vec<Rat>> = vec![vec![Rat::one()]; self.nvars];
        let mut acc = Rat::zero();
        for (m, c) in &self.terms {
            let mut v = c.clone();
            for (i, &e) in m.0.iter().enumerate() {
                if e == 0 {
                    continue;
                }
                let table = &mut powers[i];
                while table.len() <= e as usize {
                    let next = table.last().unwrap() * &point[i];
                    table.push(next);
                }
                v *= &table[e as usize];
            }
            acc += v;
        }
        Ok(acc)
    }

    pub fn eval_f64(&self, point: &[f64]) -> f64 {
        assert_eq!(point.len(), self.nvars);
        self.terms
            .iter()
            .map(|(m, c)| {
                let mut v = rat_to_f64(c);
                for (i, &e) in m.0.iter().enumerate() {
                    if e > 0 {
                        v *= point[i].powi(e as i32);
                    }
                }
                v
            })
            .sum()
    }

    /// Exact partial derivative with respect to `var`.
    pub fn partial(&self, var: usize) -> RatPoly {
        assert!(var < self.nvars, "variable index {var} out of range");
        let mut out = RatPoly::zero(self.nvars);
        for (m, c) in &self.terms {
            let e = m.0[var];
            if e == 0 {
                continue;
            }
            let mut nm = m.clone();
            nm.0[var] -= 1;
            out.terms.insert(nm, c * Rat::from_integer(BigInt::from(e)));
        }
        out
    }

    /// Iterated partial derivative `∂^β`.
    pub fn partial_multi(&self, beta: &[u32]) -> RatPoly {
        let mut p = self.clone();
        for (v, &k) in beta.iter().enumerate() {
            for _ in 0..k {
                p = p.partial(v);
            }
        }
        p
    }

    /// Substitutes `maps[i]` for variable `i`; the result lives in the
    /// variable space shared by the maps.
    pub fn compose(&self, maps: &[RatPoly]) -> Result<RatPoly, PolyError> {
        if maps.len() != self.nvars {
            return Err(PolyError::ArityMismatch {
                expected: self.nvars,
                found: maps.len(),
            });
        }
        let target = match maps.first() {
            Some(m) => m.nvars,
            None => {
                return Ok(RatPoly::constant(
                    0,
                    self.constant_value().unwrap_or_else(Rat::zero),
                ))
            }
        };
        if let Some(bad) = maps.iter().find(|m| m.nvars != target) {
            return Err(PolyError::DimensionMismatch {
                expected: target,
                found: bad.nvars,
            });
        }
        let mut powers: Vec<Vec<RatPoly>> = maps
            .iter()
            .map(|_| vec![RatPoly::one(target)])
            .collect();
        let mut acc = RatPoly::zero(target);
        for (m, c) in &self.terms {
            let mut term = RatPoly::constant(target, c.clone());
            for (i, &e) in m.0.iter().enumerate() {
                if e == 0 {
                    continue;
                }
                let table = &mut powers[i];
                while table.len() <= e as usize {
                    let next = table.last().unwrap() * &maps[i];
                    table.push(next);
                }
                term = &term * &table[e as usize];
            }
            acc += &term;
        }
        Ok(acc)
    }

    /// Re-indexes variables: old variable `i` becomes new variable
    /// `positions[i]` in a space of `nvars` variables.
    pub fn embed(&self, nvars: usize, positions: &[usize]) -> RatPoly {
        assert_eq!(positions.len(), self.nvars);
        let mut out = RatPoly::zero(nvars);
        for (m, c) in &self.terms {
            let mut e = vec![0; nvars];
            for (i, &k) in m.0.iter().enumerate() {
                e[positions[i]] += k;
            }
            out.add_term(Monomial(e), c.clone());
        }
        out
    }

    /// Groups terms by their exponents in the variables `split..nvars`,
    /// returning for each such exponent the coefficient polynomial in the
    /// first `split` variables.
    pub fn coefficients_in_tail(&self, split: usize) -> BTreeMap<Vec<u32>, RatPoly> {
        let mut out: BTreeMap<Vec<u32>, RatPoly> = BTreeMap::new();
        for (m, c) in &self.terms {
            let (head, tail) = m.0.split_at(split);
            out.entry(tail.to_vec())
                .or_insert_with(|| RatPoly::zero(split))
                .add_term(Monomial(head.to_vec()), c.clone());
        }
        out.retain(|_, p| !p.is_zero());
        out
    }

    /// Sets variables `split..nvars` to zero and drops them.
    pub fn restrict_tail_to_zero(&self, split: usize) -> RatPoly {
        let mut out = RatPoly::zero(split);
        for (m, c) in &self.terms {
            if m.0[split..].iter().all(|&e| e == 0) {
                out.add_term(Monomial(m.0[..split].to_vec()), c.clone());
            }
        }
        out
    }

    /// Exact quotient if `divisor` divides `self`, otherwise `None`.
    pub fn div_exact(&self, divisor: &RatPoly) -> Option<RatPoly> {
        self.check_same(divisor);
        let (dm, dc) = divisor.leading_term()?;
        let (dm, dc) = (dm.clone(), dc.clone());
        let mut rem = self.clone();
        let mut quot = RatPoly::zero(self.nvars);
        while let Some((rm, rc)) = rem.leading_term() {
            if !dm.divides(rm) {
                return None;
            }
            let qm = rm.div(&dm);
            let qc = rc / &dc;
            rem -= &divisor.mul_term(&qm, &qc);
            quot.add_term(qm, qc);
        }
        Some(quot)
    }

    /// Content-free view used in tests: coefficients as f64.
    pub fn max_abs_coefficient(&self) -> Rat {
        self.terms
            .values()
            .map(|c| c.abs())
            .max()
            .unwrap_or_else(Rat::zero)
    }

    /// Formats with the given variable names.
    pub fn display_with<'a>(&'a self, names: &'a [String]) -> DisplayPoly<'a> {
        DisplayPoly { poly: self, names }
    }
}

pub fn rat_to_f64(r: &Rat) -> f64 {
    r.to_f64().unwrap_or_else(|| {
        // Extremely large numerators or denominators: scale down by bits.
        let n = r.numer().to_f64().unwrap_or(f64::INFINITY);
        let d = r.denom().to_f64().unwrap_or(f64::INFINITY);
        n / d
    })
}

pub struct DisplayPoly<'a> {
    poly: &'a RatPoly,
    names: &'a [String],
}

impl fmt::Display for DisplayPoly<'_> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.poly.is_zero() {
            return write!(f, "0");
        }
        let mut first = true;
        for (m, c) in self.poly.terms.iter().rev() {
            let neg = c.is_negative();
            let a = c.abs();
            if first {
                if neg {
                    write!(f, "-")?;
                }
            } else {
                write!(f, " {} ", if neg { "-" } else { "+" })?;
            }
            first = false;
            let mut factors: Vec<String> = Vec::new();
            for (i, &e) in m.0.iter().enumerate() {
                let name = self
                    .names
                    .get(i)
                    .cloned()
                    .unwrap_or_else(|| format!("x{}", i + 1));
                match e {
                    0 => {}
                    1 => factors.push(name),
                    _ => factors.push(format!("{name}^{e}")),
                }
            }
            if factors.is_empty() {
                write!(f, "{a}")?;
            } else {
                if !a.is_one() {
                    write!(f, "{a}*")?;
                }
                write!(f, "{}", factors.join("*"))?;
            }
        }
        Ok(())
    }
}

impl fmt::Display for RatPoly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let names: Vec<String> = (1..=self.nvars).map(|i| format!("x{i}")).collect();
        write!(f, "{}", self.display_with(&names))
    }
}

impl fmt::Debug for RatPoly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "RatPoly[{}]({})", self.nvars, self)
    }
}

impl AddAssign<&RatPoly> for RatPoly {
    fn add_assign(&mut self, rhs: &RatPoly) {
        self.check_same(rhs);
        for (m, c) in &rhs.terms {
            self.add_term(m.clone(), c.clone());
        }
    }
}

impl SubAssign<&RatPoly> for RatPoly {
    fn sub_assign(&mut self, rhs: &RatPoly) {
        self.check_same(rhs);
        for (m, c) in &rhs.terms {
            self.add_term(m.clone(), -c.clone());
        }
    }
}

impl Add<&RatPoly> for &RatPoly {
    type Output = RatPoly;
    fn add(self, rhs: &RatPoly) -> RatPoly {
        let mut out = self.clone();
        out += rhs;
        out
    }
}

impl Sub<&RatPoly> for &RatPoly {
    type Output = RatPoly;
    fn sub(self, rhs: &RatPoly) -> RatPoly {
        let mut out = self.clone();
        out -= rhs;
        out
    }
}

impl Add for RatPoly {
    type Output = RatPoly;
    fn add(mut self, rhs: RatPoly) -> RatPoly {
        self += &rhs;
        self
    }
}

impl Sub for RatPoly {
    type Output = RatPoly;
    fn sub(mut self, rhs: RatPoly) -> RatPoly {
        self -= &rhs;
        self
    }
}

impl Neg for &RatPoly {
    type Output = RatPoly;
    fn neg(self) -> RatPoly {
        RatPoly {
            nvars: self.nvars,
            terms: self.terms.iter().map(|(m, c)| (m.clone(), -c)).collect(),
        }
    }
}

impl Neg for RatPoly {
    type Output = RatPoly;
    fn neg(self) -> RatPoly {
        -&self
    }
}

impl Mul<&RatPoly> for &RatPoly {
    type Output = RatPoly;
    fn mul(self, rhs: &RatPoly) -> RatPoly {
        self.check_same(rhs);
        let mut out = RatPoly::zero(self.nvars);
        if self.is_zero() || rhs.is_zero() {
            return out;
        }
        for (m1, c1) in &self.terms {
            for (m2, c2) in &rhs.terms {
                out.add_term(m1.mul(m2), c1 * c2);
            }
        }
        out
    }
}

impl Mul for RatPoly {
    type Output = RatPoly;
    fn mul(self, rhs: RatPoly) -> RatPoly {
        &self * &rhs
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::parse::parse_poly;

    fn p(s: &str, vars: &[&str]) -> RatPoly {
        parse_poly(s, vars).unwrap()
    }

    fn r(n: i64) -> Rat {
        Rat::from_integer(BigInt::from(n))
    }

    #[test]
    fn eval_simple_product_plus_constant() {
        let q = p("x1*x2 + 3", &["x1", "x2"]);
        assert_eq!(q.eval(&[r(2), r(5)]).unwrap(), r(13));
    }

    #[test]
    fn eval_zero_polynomial() {
        let z = RatPoly::zero(3);
        assert_eq!(z.eval(&[r(1), r(-4), r(9)]).unwrap(), r(0));
    }

    #[test]
    fn eval_rejects_wrong_dimension() {
        let q = p("x1*x2", &["x1", "x2"]);
        assert!(matches!(
            q.eval(&[r(1)]),
            Err(PolyError::DimensionMismatch { expected: 2, found: 1 })
        ));
    }

    #[test]
    fn partial_derivatives() {
        let q = p("x1*x2^2", &["x1", "x2"]);
        assert_eq!(q.partial(1), p("2*x1*x2", &["x1", "x2"]));
        assert!(RatPoly::from_int(2, 7).partial(0).is_zero());
        let j = p("-2*t2", &["t1", "t2", "t3"]);
        assert_eq!(j.partial(1), RatPoly::from_int(3, -2));
    }

    #[test]
    fn compose_shift() {
        let q = p("x^2", &["x"]);
        let shifted = q.compose(&[p("x + 1", &["x"])]).unwrap();
        assert_eq!(shifted, p("x^2 + 2*x + 1", &["x"]));
    }

    #[test]
    fn compose_identity_is_noop() {
        let vars = ["a", "b", "c"];
        let q = p("a^2*b - 3/4*c + b*c^3", &vars);
        let ids: Vec<RatPoly> = (0..3).map(|i| RatPoly::var(3, i)).collect();
        assert_eq!(q.compose(&ids).unwrap(), q);
    }

    #[test]
    fn compose_arity_mismatch() {
        let q = p("a*b", &["a", "b"]);
        assert!(matches!(
            q.compose(&[RatPoly::var(1, 0)]),
            Err(PolyError::ArityMismatch { .. })
        ));
    }

    #[test]
    fn exact_division() {
        let vars = ["x", "y"];
        let a = p("x^2 - y^2", &vars);
        let b = p("x + y", &vars);
        assert_eq!(a.div_exact(&b).unwrap(), p("x - y", &vars));
        assert!(p("x^2 + y", &vars).div_exact(&b).is_none());
    }

    #[test]
    fn graded_lex_order_is_canonical() {
        let q = p("x*y + x^2 + y + 1", &["x", "y"]);
        let exps: Vec<Vec<u32>> = q.terms().map(|(e, _)| e.to_vec()).collect();
        assert_eq!(exps, vec![vec![0, 0], vec![0, 1], vec![1, 1], vec![2, 0]]);
    }

    #[test]
    fn coefficient_grouping_by_tail_variables() {
        let q = p("x*t^2 + 3*t^2 - x^2*t + 5", &["x", "t"]);
        let groups = q.coefficients_in_tail(1);
        assert_eq!(groups[&vec![2]], p("x + 3", &["x"]));
        assert_eq!(groups[&vec![1]], p("-x^2", &["x"]));
        assert_eq!(groups[&vec![0]], RatPoly::from_int(1, 5));
    }
}
