//! Fiber vector fields of polynomial submersions, Lie-bracket words and
//! exact polynomial flows.

use std::cmp::Ordering;
use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use num_traits::One;

use crate::error::GeometryError;
use crate::matrix::PolyMatrix;
use crate::{Rat, RatPoly};

/// A polynomial map `R^n -> R^{n-1}`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PolyMap {
    nvars: usize,
    components: Vec<RatPoly>,
}

impl PolyMap {
    pub fn new(components: Vec<RatPoly>) -> Result<Self, GeometryError> {
        let nvars = components.first().map_or(0, RatPoly::nvars);
        if nvars < 2 || components.len() + 1 != nvars {
            return Err(GeometryError::BadPolyMap {
                components: components.len(),
                nvars,
            });
        }
        if let Some(bad) = components.iter().find(|c| c.nvars() != nvars) {
            return Err(GeometryError::Poly(crate::PolyError::DimensionMismatch {
                expected: nvars,
                found: bad.nvars(),
            }));
        }
        Ok(PolyMap { nvars, components })
    }

    pub fn source_dim(&self) -> usize {
        self.nvars
    }

    pub fn target_dim(&self) -> usize {
        self.nvars - 1
    }

    pub fn components(&self) -> &[RatPoly] {
        &self.components
    }

    pub fn jacobian(&self) -> PolyMatrix {
        let vars: Vec<usize> = (0..self.nvars).collect();
        PolyMatrix::jacobian(&self.components, &vars).expect("components share nvars")
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct PolyVectorField {
    components: Vec<RatPoly>,
}

impl PolyVectorField {
    pub fn new(components: Vec<RatPoly>) -> Result<Self, GeometryError> {
        let n = components.len();
        if let Some(bad) = components.iter().find(|c| c.nvars() != n) {
            return Err(GeometryError::DimMismatch(n, bad.nvars()));
        }
        Ok(PolyVectorField { components })
    }

    pub fn zero(dim: usize) -> Self {
        PolyVectorField {
            components: vec![RatPoly::zero(dim); dim],
        }
    }

    /// The coordinate field `∂/∂x_i`.
    pub fn coordinate(dim: usize, i: usize) -> Self {
        let mut f = Self::zero(dim);
        f.components[i] = RatPoly::one(dim);
        f
    }

    pub fn dim(&self) -> usize {
        self.components.len()
    }

    pub fn components(&self) -> &[RatPoly] {
        &self.components
    }

    pub fn is_zero(&self) -> bool {
        self.components.iter().all(RatPoly::is_zero)
    }

    /// Directional derivative `X f = Σ X^i ∂_i f`.
    pub fn apply(&self, f: &RatPoly) -> RatPoly {
        let mut acc = RatPoly::zero(self.dim());
        for (i, c) in self.components.iter().enumerate() {
            if c.is_zero() || !f.depends_on(i) {
                continue;
            }
            acc += &(c * &f.partial(i));
        }
        acc
    }

    pub fn divergence(&self) -> RatPoly {
        let mut acc = RatPoly::zero(self.dim());
        for (i, c) in self.components.iter().enumerate() {
            acc += &c.partial(i);
        }
        acc
    }

    pub fn eval(&self, x: &[Rat]) -> Result<Vec<Rat>, GeometryError> {
        self.components
            .iter()
            .map(|c| c.eval(x).map_err(GeometryError::from))
            .collect()
    }

    pub fn scale(&self, c: &Rat) -> Self {
        PolyVectorField {
            components: self.components.iter().map(|p| p.scale(c)).collect(),
        }
    }

    pub fn add(&self, other: &Self) -> Self {
        PolyVectorField {
            components: self
                .components
                .iter()
                .zip(&other.components)
                .map(|(a, b)| a + b)
                .collect(),
        }
    }

    pub fn neg(&self) -> Self {
        self.scale(&-Rat::one())
    }

    /// Flattened list of all coefficients, indexed by a shared monomial list.
    pub fn coefficient_keys(&self) -> Vec<(usize, Vec<u32>)> {
        let mut keys = Vec::new();
        for (i, c) in self.components.iter().enumerate() {
            for (e, _) in c.terms() {
                keys.push((i, e.to_vec()));
            }
        }
        keys
    }

    pub fn coefficient_at(&self, key: &(usize, Vec<u32>)) -> Rat {
        self.components[key.0].coefficient(&key.1)
    }
}

impl fmt::Display for PolyVectorField {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "(")?;
        for (i, c) in self.components.iter().enumerate() {
            if i > 0 {
                write!(f, ", ")?;
            }
            write!(f, "{c}")?;
        }
        write!(f, ")")
    }
}

/// The Hodge dual of `dπ¹ ∧ ⋯ ∧ dπ^{n-1}`: the `i`-th component is
/// `(-1)^{i+1}` times the minor of `Dπ` with column `i` removed
/// (1-based `i`).
pub fn hodge_star_field(pi: &PolyMap) -> PolyVectorField {
    let n = pi.source_dim();
    let jac = pi.jacobian();
    let mut comps = Vec::with_capacity(n);
    for i in 0..n {
        let mut entries = Vec::with_capacity((n - 1) * (n - 1));
        for r in 0..n - 1 {
            for c in (0..n).filter(|&c| c != i) {
                entries.push(jac.get(r, c).clone());
            }
        }
        let minor = PolyMatrix::new(n - 1, n - 1, entries)
            .and_then(|m| m.det())
            .expect("square minor");
        comps.push(if i % 2 == 0 { minor } else { -minor });
    }
    PolyVectorField { components: comps }
}

pub fn lie_bracket(x: &PolyVectorField, y: &PolyVectorField) -> Result<PolyVectorField, GeometryError> {
    if x.dim() != y.dim() {
        return Err(GeometryError::DimMismatch(x.dim(), y.dim()));
    }
    let comps = (0..x.dim())
        .map(|i| &x.apply(&y.components[i]) - &y.apply(&x.components[i]))
        .collect();
    Ok(PolyVectorField { components: comps })
}

/// A bracket word over the letters 1 and 2. `(i, w)` denotes `[X_i, X_w]`.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Word(Vec<u8>);

impl Word {
    pub fn new(letters: Vec<u8>) -> Result<Self, GeometryError> {
        if letters.is_empty() {
            return Err(GeometryError::BadWord("empty word".into()));
        }
        if let Some(b) = letters.iter().find(|&&l| l != 1 && l != 2) {
            return Err(GeometryError::BadWord(format!("letter {b} is not 1 or 2")));
        }
        Ok(Word(letters))
    }

    pub fn letter(i: u8) -> Self {
        Word::new(vec![i]).expect("letter is 1 or 2")
    }

    pub fn letters(&self) -> &[u8] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    /// `(#1s, #2s)`.
    pub fn bidegree(&self) -> (u32, u32) {
        let ones = self.0.iter().filter(|&&l| l == 1).count() as u32;
        (ones, self.0.len() as u32 - ones)
    }

    pub fn prepend(&self, i: u8) -> Word {
        let mut v = Vec::with_capacity(self.0.len() + 1);
        v.push(i);
        v.extend_from_slice(&self.0);
        Word(v)
    }
}

impl Ord for Word {
    fn cmp(&self, other: &Self) -> Ordering {
        self.0
            .len()
            .cmp(&other.0.len())
            .then_with(|| self.0.cmp(&other.0))
    }
}

impl PartialOrd for Word {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl fmt::Display for Word {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "(")?;
        for (i, l) in self.0.iter().enumerate() {
            if i > 0 {
                write!(f, ",")?;
            }
            write!(f, "{l}")?;
        }
        write!(f, ")")
    }
}

impl FromStr for Word {
    type Err = GeometryError;
    fn from_str(s: &str) -> Result<Self, GeometryError> {
        let body = s.trim().trim_start_matches('(').trim_end_matches(')');
        let letters = body
            .split(|c: char| c == ',' || c.is_whitespace())
            .filter(|p| !p.is_empty())
            .map(|p| {
                p.parse::<u8>()
                    .map_err(|_| GeometryError::BadWord(format!("bad letter '{p}'")))
            })
            .collect::<Result<Vec<_>, _>>()?;
        Word::new(letters)
    }
}

/// All nonzero bracket fields `X_w` with `|w| <= cap`.
#[derive(Clone, Debug)]
pub struct WordTable {
    cap: usize,
    x1: PolyVectorField,
    x2: PolyVectorField,
    entries: BTreeMap<Word, PolyVectorField>,
}

pub fn build_word_table(
    x1: &PolyVectorField,
    x2: &PolyVectorField,
    cap: usize,
) -> Result<WordTable, GeometryError> {
    if cap == 0 {
        return Err(GeometryError::CapTooSmall { cap });
    }
    if x1.dim() != x2.dim() {
        return Err(GeometryError::DimMismatch(x1.dim(), x2.dim()));
    }
    let mut entries = BTreeMap::new();
    let mut frontier: Vec<(Word, PolyVectorField)> = Vec::new();
    for (i, x) in [(1u8, x1), (2u8, x2)] {
        if !x.is_zero() {
            frontier.push((Word::letter(i), x.clone()));
        }
    }
    for len in 1..=cap {
        for (w, f) in &frontier {
            entries.insert(w.clone(), f.clone());
        }
        if len == cap {
            break;
        }
        let mut next = Vec::new();
        for (w, f) in &frontier {
            for (i, x) in [(1u8, x1), (2u8, x2)] {
                let b = lie_bracket(x, f)?;
                if !b.is_zero() {
                    next.push((w.prepend(i), b));
                }
            }
        }
        next.sort_by(|a, b| a.0.cmp(&b.0));
        frontier = next;
    }
    Ok(WordTable {
        cap,
        x1: x1.clone(),
        x2: x2.clone(),
        entries,
    })
}

impl WordTable {
    pub fn cap(&self) -> usize {
        self.cap
    }

    pub fn dim(&self) -> usize {
        self.x1.dim()
    }

    pub fn letter_field(&self, i: u8) -> &PolyVectorField {
        if i == 1 {
            &self.x1
        } else {
            &self.x2
        }
    }

    /// Stored nonzero words in length-then-lex order.
    pub fn words(&self) -> impl Iterator<Item = &Word> + '_ {
        self.entries.keys()
    }

    pub fn entries(&self) -> impl Iterator<Item = (&Word, &PolyVectorField)> + '_ {
        self.entries.iter()
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    /// `X_w` for a stored word; `None` when the field vanishes.
    pub fn get(&self, w: &Word) -> Option<&PolyVectorField> {
        self.entries.get(w)
    }

    /// `X_w`, computing it recursively when `w` is longer than the cap.
    pub fn field(&self, w: &Word) -> PolyVectorField {
        if let Some(f) = self.entries.get(w) {
            return f.clone();
        }
        if w.len() <= self.cap {
            return PolyVectorField::zero(self.dim());
        }
        let rest = Word(w.0[1..].to_vec());
        let inner = self.field(&rest);
        if inner.is_zero() {
            return inner;
        }
        lie_bracket(self.letter_field(w.0[0]), &inner).expect("same dimension")
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Nilpotency {
    Step(usize),
    NotNilpotentWithinCap,
}

/// Step `s` when every word of length `s+1` vanishes and `s+1 <= cap`.
/// Longer words then vanish as well since they are brackets of shorter
/// vanishing ones.
pub fn nilpotency_step(table: &WordTable) -> Result<Nilpotency, GeometryError> {
    if table.cap < 2 && !table.entries.is_empty() {
        return Err(GeometryError::CapTooSmall { cap: table.cap });
    }
    let longest = table.entries.keys().map(Word::len).max().unwrap_or(0);
    if longest >= table.cap {
        Ok(Nilpotency::NotNilpotentWithinCap)
    } else {
        Ok(Nilpotency::Step(longest))
    }
}

/// The exact flow `(x, t) -> e^{tX}(x)`, variables ordered `x_1..x_n, t`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct FlowMap {
    field: PolyVectorField,
    map: Vec<RatPoly>,
    terms: usize,
}

pub fn lie_series_flow(x: &PolyVectorField, max_terms: usize) -> Result<FlowMap, GeometryError> {
    let n = x.dim();
    let positions: Vec<usize> = (0..n).collect();
    let t = RatPoly::var(n + 1, n);
    let mut map: Vec<RatPoly> = Vec::with_capacity(n);
    let mut used = 0;
    for i in 0..n {
        let mut cur = RatPoly::var(n, i);
        let mut acc = RatPoly::zero(n + 1);
        let mut tk = RatPoly::one(n + 1);
        let mut fact = Rat::one();
        let mut k = 0usize;
        while !cur.is_zero() {
            if k >= max_terms {
                return Err(GeometryError::NonTerminatingSeries { max_terms });
            }
            acc += &(&cur.embed(n + 1, &positions) * &tk).scale(&(Rat::one() / &fact));
            k += 1;
            fact *= Rat::from_integer(k.into());
            tk = &tk * &t;
            cur = x.apply(&cur);
        }
        used = used.max(k);
        map.push(acc);
    }
    Ok(FlowMap {
        field: x.clone(),
        map,
        terms: used,
    })
}

impl FlowMap {
    pub fn field(&self) -> &PolyVectorField {
        &self.field
    }

    pub fn dim(&self) -> usize {
        self.field.dim()
    }

    /// Components as polynomials in `(x, t)`.
    pub fn map(&self) -> &[RatPoly] {
        &self.map
    }

    /// Number of nonzero Lie-series terms used.
    pub fn terms(&self) -> usize {
        self.terms
    }

    /// Largest degree of the flow in the state variables.
    pub fn state_degree(&self) -> u32 {
        let n = self.dim();
        self.map
            .iter()
            .flat_map(|p| p.terms().map(|(e, _)| e[..n].iter().sum::<u32>()))
            .max()
            .unwrap_or(0)
    }

    /// `e^{tX}(x)` with `x` and `t` replaced by polynomials in a common space.
    pub fn apply(&self, x: &[RatPoly], t: &RatPoly) -> Result<Vec<RatPoly>, GeometryError> {
        let mut args: Vec<RatPoly> = x.to_vec();
        args.push(t.clone());
        self.map
            .iter()
            .map(|c| c.compose(&args).map_err(GeometryError::from))
            .collect()
    }

    /// Checks `map(x, 0) = x` and `∂_t map = X ∘ map` exactly.
    pub fn verify(&self) -> bool {
        let n = self.dim();
        for (i, c) in self.map.iter().enumerate() {
            if c.restrict_tail_to_zero(n) != RatPoly::var(n, i) {
                return false;
            }
        }
        let lifted: Vec<RatPoly> = self
            .field
            .components()
            .iter()
            .map(|c| c.compose(&self.map).expect("arity n"))
            .collect();
        self.map
            .iter()
            .zip(&lifted)
            .all(|(m, l)| m.partial(n) == *l)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::parse::parse_poly;

    const V3: [&str; 3] = ["x1", "x2", "t"];

    fn p3(s: &str) -> RatPoly {
        parse_poly(s, &V3).unwrap()
    }

    fn field3(cs: [&str; 3]) -> PolyVectorField {
        PolyVectorField::new(cs.iter().map(|s| p3(s)).collect()).unwrap()
    }

    pub(crate) fn moment2() -> (PolyVectorField, PolyVectorField) {
        let pi1 = PolyMap::new(vec![p3("x1"), p3("x2")]).unwrap();
        let pi2 = PolyMap::new(vec![p3("x1 - t"), p3("x2 - t^2")]).unwrap();
        (hodge_star_field(&pi1), hodge_star_field(&pi2))
    }

    #[test]
    fn moment_curve_fiber_fields() {
        let (x1, x2) = moment2();
        assert_eq!(x1, field3(["0", "0", "1"]));
        assert_eq!(x2, field3(["1", "2*t", "1"]));
    }

    #[test]
    fn planar_example_fields() {
        let v = ["x1", "x2"];
        let k = 3;
        let pi1 = PolyMap::new(vec![parse_poly("x1", &v).unwrap()]).unwrap();
        let pi2 = PolyMap::new(vec![parse_poly(&format!("x2^{k}"), &v).unwrap()]).unwrap();
        let x1 = hodge_star_field(&pi1);
        let x2 = hodge_star_field(&pi2);
        // Up to the global sign fixed by the Hodge convention.
        assert_eq!(x1.components()[1], parse_poly("-1", &v).unwrap());
        assert!(x1.components()[0].is_zero());
        assert_eq!(x2.components()[0], parse_poly("3*x2^2", &v).unwrap());
    }

    #[test]
    fn bracket_examples() {
        let (x1, x2) = moment2();
        assert!(lie_bracket(&x1, &x1).unwrap().is_zero());
        assert_eq!(lie_bracket(&x1, &x2).unwrap(), field3(["0", "2", "0"]));
        let d2 = PolyVectorField::coordinate(3, 1);
        assert!(lie_bracket(&d2, &field3(["3", "-1", "1/2"])).unwrap().is_zero());
    }

    #[test]
    fn moment_curve_word_table() {
        let (x1, x2) = moment2();
        let table = build_word_table(&x1, &x2, 4).unwrap();
        let words: Vec<String> = table.words().map(|w| w.to_string()).collect();
        assert_eq!(words, ["(1)", "(2)", "(1,2)", "(2,1)"]);
        assert_eq!(nilpotency_step(&table).unwrap(), Nilpotency::Step(2));
    }

    #[test]
    fn equal_fields_only_keep_letters() {
        let (x1, _) = moment2();
        let table = build_word_table(&x1, &x1, 3).unwrap();
        assert_eq!(table.len(), 2);
    }

    #[test]
    fn non_nilpotent_pair() {
        let v = ["x"];
        let a = PolyVectorField::new(vec![parse_poly("1", &v).unwrap()]).unwrap();
        let b = PolyVectorField::new(vec![parse_poly("x^2", &v).unwrap()]).unwrap();
        for cap in [3, 6, 9] {
            let table = build_word_table(&a, &b, cap).unwrap();
            assert_eq!(nilpotency_step(&table).unwrap(), Nilpotency::NotNilpotentWithinCap);
        }
    }

    #[test]
    fn flows() {
        let dt = field3(["0", "0", "1"]);
        let f = lie_series_flow(&dt, 5).unwrap();
        let v4 = ["x1", "x2", "t", "s"];
        let q = |s: &str| parse_poly(s, &v4).unwrap();
        assert_eq!(f.map(), &[q("x1"), q("x2"), q("t + s")]);
        let (_, x2) = moment2();
        let g = lie_series_flow(&x2, 5).unwrap();
        assert_eq!(g.map(), &[q("x1 + s"), q("x2 + 2*t*s + s^2"), q("t + s")]);
        assert!(g.verify());
        let bad = PolyVectorField::new(vec![parse_poly("x^2", &["x"]).unwrap()]).unwrap();
        assert_eq!(
            lie_series_flow(&bad, 10),
            Err(GeometryError::NonTerminatingSeries { max_terms: 10 })
        );
    }

    #[test]
    fn word_parsing_and_order() {
        let w: Word = "(1,2,2)".parse().unwrap();
        assert_eq!(w.bidegree(), (1, 2));
        assert!(Word::letter(2) < w);
        assert!("(1,3)".parse::<Word>().is_err());
    }
}
