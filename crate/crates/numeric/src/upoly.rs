//! Exact one-variable polynomials: Sturm sequences, real root isolation and
//! certified complex root enclosures.

use std::fmt;

use num_complex::Complex64;
use num_traits::{One, Signed, Zero};
use serde::Serialize;
use torsion_core::poly::rat_to_f64;
use torsion_core::{Rat, RatPoly};

use crate::error::NumericError;

/// Dense coefficients, constant term first, no trailing zeros.
#[derive(Clone, PartialEq, Eq, Hash, Default)]
pub struct UPoly {
    c: Vec<Rat>,
}

impl fmt::Debug for UPoly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "UPoly[")?;
        for (i, c) in self.c.iter().enumerate() {
            if i > 0 {
                write!(f, ", ")?;
            }
            write!(f, "{c}")?;
        }
        write!(f, "]")
    }
}

impl UPoly {
    pub fn new(mut c: Vec<Rat>) -> Self {
        while c.last().is_some_and(Zero::is_zero) {
            c.pop();
        }
        UPoly { c }
    }

    pub fn zero() -> Self {
        UPoly { c: Vec::new() }
    }

    pub fn constant(v: Rat) -> Self {
        UPoly::new(vec![v])
    }

    /// The monomial `c t^k`.
    pub fn monomial(k: usize, c: Rat) -> Self {
        let mut v = vec![Rat::zero(); k + 1];
        v[k] = c;
        UPoly::new(v)
    }

    pub fn from_i64(c: &[i64]) -> Self {
        UPoly::new(c.iter().map(|&v| Rat::from_integer(v.into())).collect())
    }

    /// Converts a polynomial in one variable.
    pub fn from_ratpoly(p: &RatPoly) -> Result<Self, NumericError> {
        if p.nvars() != 1 {
            return Err(NumericError::BadInput(format!(
                "expected a polynomial in one variable, found {} variables",
                p.nvars()
            )));
        }
        let d = p.total_degree() as usize;
        let mut c = vec![Rat::zero(); d + 1];
        for (e, v) in p.terms() {
            c[e[0] as usize] = v.clone();
        }
        Ok(UPoly::new(c))
    }

    pub fn to_ratpoly(&self) -> RatPoly {
        let mut p = RatPoly::zero(1);
        for (k, v) in self.c.iter().enumerate() {
            if !v.is_zero() {
                p += &RatPoly::monomial(1, vec![k as u32], v.clone());
            }
        }
        p
    }

    pub fn coeffs(&self) -> &[Rat] {
        &self.c
    }

    pub fn coeff(&self, k: usize) -> Rat {
        self.c.get(k).cloned().unwrap_or_else(Rat::zero)
    }

    pub fn is_zero(&self) -> bool {
        self.c.is_empty()
    }

    /// Degree, with the zero polynomial reported as `None`.
    pub fn degree(&self) -> Option<usize> {
        self.c.len().checked_sub(1)
    }

    pub fn leading(&self) -> Rat {
        self.c.last().cloned().unwrap_or_else(Rat::zero)
    }

    pub fn eval(&self, x: &Rat) -> Rat {
        let mut acc = Rat::zero();
        for v in self.c.iter().rev() {
            acc = acc * x + v;
        }
        acc
    }

    pub fn coeffs_f64(&self) -> Vec<f64> {
        self.c.iter().map(rat_to_f64).collect()
    }

    pub fn eval_f64(&self, x: f64) -> f64 {
        self.c.iter().rev().fold(0.0, |acc, v| acc * x + rat_to_f64(v))
    }

    pub fn derivative(&self) -> UPoly {
        UPoly::new(
            self.c
                .iter()
                .enumerate()
                .skip(1)
                .map(|(k, v)| v * Rat::from_integer(k.into()))
                .collect(),
        )
    }

    pub fn nth_derivative(&self, n: usize) -> UPoly {
        (0..n).fold(self.clone(), |p, _| p.derivative())
    }

    /// The antiderivative vanishing at 0.
    pub fn antiderivative(&self) -> UPoly {
        let mut c = vec![Rat::zero()];
        c.extend(
            self.c
                .iter()
                .enumerate()
                .map(|(k, v)| v / Rat::from_integer((k + 1).into())),
        );
        UPoly::new(c)
    }

    pub fn add(&self, o: &UPoly) -> UPoly {
        let n = self.c.len().max(o.c.len());
        UPoly::new((0..n).map(|k| self.coeff(k) + o.coeff(k)).collect())
    }

    pub fn sub(&self, o: &UPoly) -> UPoly {
        let n = self.c.len().max(o.c.len());
        UPoly::new((0..n).map(|k| self.coeff(k) - o.coeff(k)).collect())
    }

    pub fn mul(&self, o: &UPoly) -> UPoly {
        if self.is_zero() || o.is_zero() {
            return UPoly::zero();
        }
        let mut c = vec![Rat::zero(); self.c.len() + o.c.len() - 1];
        for (i, a) in self.c.iter().enumerate() {
            if a.is_zero() {
                continue;
            }
            for (j, b) in o.c.iter().enumerate() {
                c[i + j] += a * b;
            }
        }
        UPoly::new(c)
    }

    pub fn scale(&self, s: &Rat) -> UPoly {
        UPoly::new(self.c.iter().map(|v| v * s).collect())
    }

    /// Euclidean division. Panics on a zero divisor.
    pub fn divrem(&self, d: &UPoly) -> (UPoly, UPoly) {
        let dd = d.degree().expect("division by the zero polynomial");
        let lead = d.leading();
        let mut r = self.c.clone();
        let mut q = vec![Rat::zero(); self.c.len().saturating_sub(dd).max(1)];
        while r.len() > dd && !r.is_empty() {
            let k = r.len() - 1 - dd;
            let f = r.last().unwrap() / &lead;
            for (j, v) in d.c.iter().enumerate() {
                r[k + j] -= &f * v;
            }
            q[k] = f;
            r.pop();
            while r.last().is_some_and(Zero::is_zero) {
                r.pop();
            }
        }
        (UPoly::new(q), UPoly::new(r))
    }

    pub fn monic(&self) -> UPoly {
        if self.is_zero() {
            return UPoly::zero();
        }
        self.scale(&(Rat::one() / self.leading()))
    }

    pub fn gcd(&self, o: &UPoly) -> UPoly {
        let (mut a, mut b) = (self.clone(), o.clone());
        while !b.is_zero() {
            let (_, r) = a.divrem(&b);
            a = b;
            b = r.monic();
        }
        a.monic()
    }

    /// `p / gcd(p, p')`: same roots, all simple.
    pub fn squarefree(&self) -> UPoly {
        if self.degree().unwrap_or(0) == 0 {
            return self.clone();
        }
        let g = self.gcd(&self.derivative());
        self.divrem(&g).0.monic()
    }

    /// Coefficients of `s -> p(b + s)`: entry `k` is `p^{(k)}(b)/k!`.
    pub fn taylor_shift(&self, b: &Rat) -> UPoly {
        let mut c = self.c.clone();
        let n = c.len();
        for i in 0..n {
            for j in (i..n.saturating_sub(1)).rev() {
                let t = &c[j + 1] * b;
                c[j] += t;
            }
        }
        UPoly::new(c)
    }

    /// Sturm sequence of the squarefree part.
    pub fn sturm(&self) -> Vec<UPoly> {
        let p = self.squarefree();
        let mut seq = vec![p.clone(), p.derivative()];
        loop {
            let n = seq.len();
            if seq[n - 1].is_zero() {
                seq.pop();
                break;
            }
            let (_, r) = seq[n - 2].divrem(&seq[n - 1]);
            if r.is_zero() {
                break;
            }
            seq.push(r.scale(&-Rat::one()));
        }
        seq
    }

    /// Cauchy bound: all complex roots satisfy `|z| < bound`.
    pub fn root_bound(&self) -> Rat {
        let lead = self.leading().abs();
        let m = self.c[..self.c.len().saturating_sub(1)]
            .iter()
            .map(|v| v.abs() / &lead)
            .fold(Rat::zero(), |a, b| if b > a { b } else { a });
        Rat::one() + m
    }

    /// Number of distinct real roots in `(a, b]`.
    pub fn count_roots(&self, a: &Rat, b: &Rat) -> usize {
        let s = self.sturm();
        sign_changes(&s, a).saturating_sub(sign_changes(&s, b))
    }

    /// Distinct real roots, sorted, each exact or enclosed in an open
    /// interval with rational endpoints where the squarefree part changes
    /// sign.
    pub fn real_roots(&self) -> Vec<RealRoot> {
        if self.degree().unwrap_or(0) == 0 {
            return Vec::new();
        }
        let q = self.squarefree();
        let s = q.sturm();
        let b = q.root_bound();
        let mut out = Vec::new();
        isolate(&q, &s, -b.clone(), b, &mut out);
        out.into_iter()
            .map(|r| match r {
                RealRoot::Interval { lo, hi } => refine_exact(&q, lo, hi),
                e => e,
            })
            .collect()
    }

    /// Real roots in `[lo, hi]`, as `f64` values accurate to roughly the
    /// working precision.
    pub fn real_roots_f64(&self) -> Vec<f64> {
        let q = self.squarefree();
        self.real_roots()
            .into_iter()
            .map(|r| r.refined(&q, 60).approx())
            .collect()
    }

    /// Complex roots (distinct), each with a disk radius certified to
    /// contain exactly one root.
    pub fn complex_roots(&self) -> Result<Vec<ComplexRoot>, NumericError> {
        let q = self.squarefree();
        let n = match q.degree() {
            None | Some(0) => return Ok(Vec::new()),
            Some(n) => n,
        };
        let a: Vec<f64> = q.coeffs_f64();
        let mut z = aberth(&a)?;
        polish(&a, &mut z);
        let mut roots = Vec::with_capacity(n);
        for &zi in &z {
            let (p, dp, err) = horner_complex(&a, zi);
            if dp.norm() == 0.0 {
                return Err(NumericError::RootIsolationFailure(format!(
                    "vanishing derivative at approximate root {zi}"
                )));
            }
            let radius = n as f64 * (p.norm() + err) / dp.norm();
            roots.push(ComplexRoot {
                re: zi.re,
                im: zi.im,
                radius,
            });
        }
        for i in 0..n {
            for j in i + 1..n {
                let d = ((roots[i].re - roots[j].re).powi(2) + (roots[i].im - roots[j].im).powi(2)).sqrt();
                if d <= roots[i].radius + roots[j].radius {
                    return Err(NumericError::RootIsolationFailure(format!(
                        "inclusion disks overlap for {:?}",
                        q
                    )));
                }
            }
        }
        roots.sort_by(|a, b| a.re.total_cmp(&b.re).then(a.im.total_cmp(&b.im)));
        Ok(roots)
    }
}

fn sign(v: &Rat) -> i8 {
    if v.is_positive() {
        1
    } else if v.is_negative() {
        -1
    } else {
        0
    }
}

fn sign_changes(seq: &[UPoly], x: &Rat) -> usize {
    let mut last = 0i8;
    let mut n = 0;
    for p in seq {
        let s = sign(&p.eval(x));
        if s != 0 {
            if last != 0 && s != last {
                n += 1;
            }
            last = s;
        }
    }
    n
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum RealRoot {
    Exact(Rat),
    /// Exactly one root in `(lo, hi)`, with a sign change across it.
    Interval { lo: Rat, hi: Rat },
}

impl RealRoot {
    pub fn approx(&self) -> f64 {
        match self {
            RealRoot::Exact(r) => rat_to_f64(r),
            RealRoot::Interval { lo, hi } => rat_to_f64(&((lo + hi) / Rat::from_integer(2.into()))),
        }
    }

    pub fn exact(&self) -> Option<&Rat> {
        match self {
            RealRoot::Exact(r) => Some(r),
            RealRoot::Interval { .. } => None,
        }
    }

    /// Bisects until the width is below `2^-bits` relative to the magnitude.
    pub fn refined(&self, q: &UPoly, bits: u32) -> RealRoot {
        match self {
            RealRoot::Exact(_) => self.clone(),
            RealRoot::Interval { lo, hi } => {
                let (mut lo, mut hi) = (lo.clone(), hi.clone());
                let two = Rat::from_integer(2.into());
                let sl = sign(&q.eval(&lo));
                let mag = lo.abs().max(hi.abs()).max(Rat::one());
                let tol = mag / Rat::from_integer(num_bigint::BigInt::one() << bits);
                while &hi - &lo > tol {
                    let m = (&lo + &hi) / &two;
                    let sm = sign(&q.eval(&m));
                    if sm == 0 {
                        return RealRoot::Exact(m);
                    }
                    if sm == sl {
                        lo = m;
                    } else {
                        hi = m;
                    }
                }
                RealRoot::Interval { lo, hi }
            }
        }
    }

    pub fn bounds(&self) -> (Rat, Rat) {
        match self {
            RealRoot::Exact(r) => (r.clone(), r.clone()),
            RealRoot::Interval { lo, hi } => (lo.clone(), hi.clone()),
        }
    }
}

fn isolate(q: &UPoly, s: &[UPoly], a: Rat, b: Rat, out: &mut Vec<RealRoot>) {
    let n = sign_changes(s, &a).saturating_sub(sign_changes(s, &b));
    if n == 0 {
        return;
    }
    if n == 1 {
        out.push(RealRoot::Interval { lo: a, hi: b });
        return;
    }
    // Split at a non-root near the midpoint; at most deg points are roots.
    let d = q.degree().unwrap_or(1) + 2;
    let mut m = (&a + &b) / Rat::from_integer(2.into());
    if q.eval(&m).is_zero() {
        let w = (&b - &a) / Rat::from_integer((4 * d).into());
        let mut h = w.clone();
        // Shrink until [m-h, m+h] holds no other root.
        while q.count_roots(&(&m - &h), &(&m + &h)) > 1 || q.eval(&(&m - &h)).is_zero() || q.eval(&(&m + &h)).is_zero() {
            h /= Rat::from_integer(2.into());
        }
        isolate(q, s, a, &m - &h, out);
        out.push(RealRoot::Exact(m.clone()));
        isolate(q, s, &m + &h, b, out);
        return;
    }
    for k in 1..d {
        let cand = &a + (&b - &a) * Rat::new(k.into(), d.into());
        if !q.eval(&cand).is_zero() {
            m = cand;
            break;
        }
    }
    isolate(q, s, a, m.clone(), out);
    isolate(q, s, m, b, out);
}

/// Shrinks an isolating interval and tries small-denominator rationals,
/// so rational roots come out exact.
fn refine_exact(q: &UPoly, lo: Rat, hi: Rat) -> RealRoot {
    let r = RealRoot::Interval { lo, hi }.refined(q, 40);
    if let RealRoot::Interval { lo, hi } = &r {
        let c = simplest_between(lo, hi);
        if q.eval(&c).is_zero() {
            return RealRoot::Exact(c);
        }
    }
    r
}

/// Real roots in `(a, b)` of a polynomial with `f64` coefficients
/// (ascending), found on the monotone pieces between critical points by
/// bisection. Double roots show up only where the sign changes.
pub fn real_roots_in_f64(c: &[f64], a: f64, b: f64) -> Vec<f64> {
    let mut c = c.to_vec();
    while c.len() > 1 && c[c.len() - 1] == 0.0 {
        c.pop();
    }
    if c.len() < 2 {
        return Vec::new();
    }
    let eval = |x: f64| c.iter().rev().fold(0.0, |acc, v| acc * x + v);
    let dc: Vec<f64> = c.iter().enumerate().skip(1).map(|(k, v)| k as f64 * v).collect();
    let mut knots = vec![a];
    knots.extend(real_roots_in_f64(&dc, a, b));
    knots.push(b);
    let mut out = Vec::new();
    for w in knots.windows(2) {
        let (mut lo, mut hi) = (w[0], w[1]);
        let (flo, fhi) = (eval(lo), eval(hi));
        if flo == 0.0 || fhi == 0.0 || (flo > 0.0) == (fhi > 0.0) {
            continue;
        }
        for _ in 0..200 {
            let m = 0.5 * (lo + hi);
            if m <= lo || m >= hi {
                break;
            }
            if (eval(m) > 0.0) == (flo > 0.0) {
                lo = m;
            } else {
                hi = m;
            }
        }
        out.push(0.5 * (lo + hi));
    }
    out
}

/// The rational with smallest denominator in the open interval `(lo, hi)`.
pub fn simplest_between(lo: &Rat, hi: &Rat) -> Rat {
    debug_assert!(lo < hi);
    if lo.is_negative() && hi.is_positive() {
        return Rat::zero();
    }
    if !hi.is_positive() {
        return -simplest_above(&-hi, Some(&-lo));
    }
    simplest_above(lo, Some(hi))
}

// Simplest rational in `(lo, hi)` for `lo >= 0`; `None` means no upper end.
fn simplest_above(lo: &Rat, hi: Option<&Rat>) -> Rat {
    let n = lo.floor() + Rat::one();
    if hi.is_none_or(|h| &n < h) {
        return n;
    }
    let fl = lo.floor();
    let h = hi.expect("bounded here");
    // (lo, hi) sits inside (fl, fl + 1]; invert the fractional parts.
    let new_lo = (h - &fl).recip();
    let new_hi = (lo - &fl).is_positive().then(|| (lo - &fl).recip());
    fl + simplest_above(&new_lo, new_hi.as_ref()).recip()
}

/// Continued-fraction approximation of `x` to relative tolerance `tol`.
pub fn simplest_near(x: f64, tol: f64) -> Option<Rat> {
    if !x.is_finite() {
        return None;
    }
    let target = tol * x.abs().max(1.0);
    let (mut h0, mut h1) = (num_bigint::BigInt::zero(), num_bigint::BigInt::one());
    let (mut k0, mut k1) = (num_bigint::BigInt::one(), num_bigint::BigInt::zero());
    let mut y = x;
    for _ in 0..40 {
        let a = y.floor();
        let ai = num_bigint::BigInt::from(a as i64);
        let h2 = &ai * &h1 + &h0;
        let k2 = &ai * &k1 + &k0;
        h0 = std::mem::replace(&mut h1, h2);
        k0 = std::mem::replace(&mut k1, k2);
        let r = Rat::new(h1.clone(), k1.clone());
        if (rat_to_f64(&r) - x).abs() <= target {
            return Some(r);
        }
        let frac = y - a;
        if frac.abs() < 1e-300 {
            return Some(r);
        }
        y = 1.0 / frac;
        if !y.is_finite() || y.abs() > 1e15 {
            return Some(r);
        }
    }
    None
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct ComplexRoot {
    pub re: f64,
    pub im: f64,
    /// The disk of this radius about `re + i im` holds exactly one root.
    pub radius: f64,
}

fn horner_complex(a: &[f64], z: Complex64) -> (Complex64, Complex64, f64) {
    let mut p = Complex64::new(0.0, 0.0);
    let mut dp = Complex64::new(0.0, 0.0);
    let mut mag = 0.0;
    let r = z.norm();
    for &c in a.iter().rev() {
        dp = dp * z + p;
        p = p * z + c;
        mag = mag * r + c.abs();
    }
    // Running error bound of Horner's scheme.
    let err = 4.0 * a.len() as f64 * f64::EPSILON * mag;
    (p, dp, err)
}

fn aberth(a: &[f64]) -> Result<Vec<Complex64>, NumericError> {
    let n = a.len() - 1;
    let lead = a[n];
    let bound = 1.0 + a[..n].iter().map(|c| (c / lead).abs()).fold(0.0, f64::max);
    let rad = bound.clamp(1e-3, 1e6) * 0.7;
    let mut z: Vec<Complex64> = (0..n)
        .map(|k| Complex64::from_polar(rad, 2.0 * std::f64::consts::PI * (k as f64 + 0.25) / n as f64 + 0.4))
        .collect();
    for _ in 0..1000 {
        let mut moved = 0.0f64;
        for i in 0..n {
            let (p, dp, _) = horner_complex(a, z[i]);
            if p.norm() == 0.0 {
                continue;
            }
            let ratio = p / dp;
            let s: Complex64 = (0..n)
                .filter(|&j| j != i)
                .map(|j| Complex64::new(1.0, 0.0) / (z[i] - z[j]))
                .sum();
            let w = ratio / (Complex64::new(1.0, 0.0) - ratio * s);
            if w.is_finite() {
                z[i] -= w;
                moved = moved.max(w.norm() / z[i].norm().max(1e-300));
            }
        }
        if moved < 1e-15 {
            return Ok(z);
        }
    }
    if z.iter().all(|v| v.is_finite()) {
        Ok(z)
    } else {
        Err(NumericError::RootIsolationFailure("Aberth iteration diverged".into()))
    }
}

fn polish(a: &[f64], z: &mut [Complex64]) {
    for zi in z.iter_mut() {
        for _ in 0..3 {
            let (p, dp, _) = horner_complex(a, *zi);
            if dp.norm() == 0.0 || p.norm() == 0.0 {
                break;
            }
            let step = p / dp;
            if !step.is_finite() {
                break;
            }
            *zi -= step;
        }
    }
}

/// Rational value of an `f64`, exactly.
pub fn rat_of_f64(x: f64) -> Rat {
    Rat::from_float(x).unwrap_or_else(Rat::zero)
}
