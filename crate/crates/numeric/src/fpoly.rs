//! Floating-point images of exact polynomials, with interval enclosures.

use torsion_core::poly::rat_to_f64;
use torsion_core::RatPoly;

/// A closed interval `[lo, hi]`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Interval {
    pub lo: f64,
    pub hi: f64,
}

impl Interval {
    pub fn new(lo: f64, hi: f64) -> Self {
        debug_assert!(lo <= hi);
        Interval { lo, hi }
    }

    pub fn point(x: f64) -> Self {
        Interval { lo: x, hi: x }
    }

    pub fn width(&self) -> f64 {
        self.hi - self.lo
    }

    pub fn contains(&self, x: f64) -> bool {
        self.lo <= x && x <= self.hi
    }

    fn add(self, o: Interval) -> Interval {
        Interval::new(self.lo + o.lo, self.hi + o.hi)
    }

    fn mul(self, o: Interval) -> Interval {
        let c = [self.lo * o.lo, self.lo * o.hi, self.hi * o.lo, self.hi * o.hi];
        Interval::new(
            c.iter().copied().fold(f64::INFINITY, f64::min),
            c.iter().copied().fold(f64::NEG_INFINITY, f64::max),
        )
    }

    fn powi(self, e: u32) -> Interval {
        if e == 0 {
            return Interval::point(1.0);
        }
        let a = self.lo.powi(e as i32);
        let b = self.hi.powi(e as i32);
        if e % 2 == 1 || self.lo >= 0.0 {
            Interval::new(a, b)
        } else if self.hi <= 0.0 {
            Interval::new(b, a)
        } else {
            Interval::new(0.0, a.max(b))
        }
    }

    /// Widens by a relative and absolute margin to absorb rounding.
    pub fn padded(self) -> Interval {
        let m = 1e-12 * (self.lo.abs().max(self.hi.abs())) + 1e-300;
        Interval::new(self.lo - m, self.hi + m)
    }
}

/// A multivariate polynomial with `f64` coefficients.
#[derive(Clone, Debug, PartialEq)]
pub struct FPoly {
    nvars: usize,
    terms: Vec<(Vec<u32>, f64)>,
}

impl FPoly {
    pub fn from_rat(p: &RatPoly) -> Self {
        FPoly {
            nvars: p.nvars(),
            terms: p.terms().map(|(e, c)| (e.to_vec(), rat_to_f64(c))).collect(),
        }
    }

    pub fn nvars(&self) -> usize {
        self.nvars
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn eval(&self, x: &[f64]) -> f64 {
        debug_assert_eq!(x.len(), self.nvars);
        let mut acc = 0.0;
        for (e, c) in &self.terms {
            let mut m = *c;
            for (xi, &k) in x.iter().zip(e) {
                if k > 0 {
                    m *= xi.powi(k as i32);
                }
            }
            acc += m;
        }
        acc
    }

    /// An enclosure of the range over a box. Rounding is absorbed by padding.
    pub fn eval_interval(&self, b: &[Interval]) -> Interval {
        let mut acc = Interval::point(0.0);
        for (e, c) in &self.terms {
            let mut m = Interval::point(*c);
            for (xi, &k) in b.iter().zip(e) {
                if k > 0 {
                    m = m.mul(xi.powi(k));
                }
            }
            acc = acc.add(m);
        }
        acc.padded()
    }
}

/// A polynomial map with its Jacobian, both in floating point.
#[derive(Clone, Debug)]
pub struct FMap {
    comps: Vec<FPoly>,
    jac: Vec<Vec<FPoly>>,
}

impl FMap {
    /// `comps` as functions of the variables `vars` (the Jacobian columns).
    pub fn new(comps: &[RatPoly]) -> Self {
        let nv = comps.first().map_or(0, RatPoly::nvars);
        FMap {
            comps: comps.iter().map(FPoly::from_rat).collect(),
            jac: comps
                .iter()
                .map(|c| (0..nv).map(|v| FPoly::from_rat(&c.partial(v))).collect())
                .collect(),
        }
    }

    pub fn dim_out(&self) -> usize {
        self.comps.len()
    }

    pub fn dim_in(&self) -> usize {
        self.comps.first().map_or(0, FPoly::nvars)
    }

    pub fn eval(&self, x: &[f64], out: &mut [f64]) {
        for (o, c) in out.iter_mut().zip(&self.comps) {
            *o = c.eval(x);
        }
    }

    /// Row-major Jacobian.
    pub fn jacobian(&self, x: &[f64]) -> Vec<f64> {
        self.jac
            .iter()
            .flat_map(|row| row.iter().map(|p| p.eval(x)))
            .collect()
    }

    pub fn components(&self) -> &[FPoly] {
        &self.comps
    }
}

/// Solves `a x = b` for square `a` (row-major) by partial pivoting.
/// Returns `None` when a pivot is negligible.
pub fn solve(a: &mut [f64], b: &mut [f64]) -> Option<()> {
    let n = b.len();
    let scale = a.iter().fold(0.0f64, |m, v| m.max(v.abs())).max(1e-300);
    for col in 0..n {
        let piv = (col..n).max_by(|&i, &j| a[i * n + col].abs().total_cmp(&a[j * n + col].abs()))?;
        if a[piv * n + col].abs() <= 1e-14 * scale {
            return None;
        }
        if piv != col {
            for k in 0..n {
                a.swap(piv * n + k, col * n + k);
            }
            b.swap(piv, col);
        }
        for r in col + 1..n {
            let f = a[r * n + col] / a[col * n + col];
            if f != 0.0 {
                for k in col..n {
                    a[r * n + k] -= f * a[col * n + k];
                }
                b[r] -= f * b[col];
            }
        }
    }
    for col in (0..n).rev() {
        let mut s = b[col];
        for k in col + 1..n {
            s -= a[col * n + k] * b[k];
        }
        b[col] = s / a[col * n + col];
    }
    Some(())
}

/// Determinant of a small row-major matrix by elimination.
pub fn det(a: &[f64], n: usize) -> f64 {
    let mut m = a.to_vec();
    let mut d = 1.0;
    for col in 0..n {
        let piv = (col..n)
            .max_by(|&i, &j| m[i * n + col].abs().total_cmp(&m[j * n + col].abs()))
            .unwrap_or(col);
        if m[piv * n + col] == 0.0 {
            return 0.0;
        }
        if piv != col {
            for k in 0..n {
                m.swap(piv * n + k, col * n + k);
            }
            d = -d;
        }
        d *= m[col * n + col];
        for r in col + 1..n {
            let f = m[r * n + col] / m[col * n + col];
            for k in col..n {
                m[r * n + k] -= f * m[col * n + k];
            }
        }
    }
    d
}

#[cfg(test)]
mod tests {
    use super::*;
    use torsion_core::parse::parse_poly;

    #[test]
    fn evaluation_matches_exact() {
        let p = parse_poly("3*x^2*y - y/2 + 1", &["x", "y"]).unwrap();
        let f = FPoly::from_rat(&p);
        assert!((f.eval(&[2.0, 1.0]) - 12.5).abs() < 1e-12);
    }

    #[test]
    fn enclosure_contains_samples() {
        let p = parse_poly("x^2 - 3*x*y + y^3", &["x", "y"]).unwrap();
        let f = FPoly::from_rat(&p);
        let b = [Interval::new(-1.0, 2.0), Interval::new(-0.5, 1.5)];
        let enc = f.eval_interval(&b);
        for i in 0..=20 {
            for j in 0..=20 {
                let x = -1.0 + 3.0 * i as f64 / 20.0;
                let y = -0.5 + 2.0 * j as f64 / 20.0;
                assert!(enc.contains(f.eval(&[x, y])));
            }
        }
    }

    #[test]
    fn even_power_of_straddling_interval() {
        let i = Interval::new(-2.0, 1.0).powi(2);
        assert_eq!(i, Interval::new(0.0, 4.0));
    }

    #[test]
    fn linear_solve() {
        let mut a = vec![2.0, 1.0, 1.0, 3.0];
        let mut b = vec![3.0, 5.0];
        solve(&mut a, &mut b).unwrap();
        assert!((b[0] - 0.8).abs() < 1e-12 && (b[1] - 1.4).abs() < 1e-12);
        assert!((det(&[2.0, 1.0, 1.0, 3.0], 2) - 5.0).abs() < 1e-12);
    }
}
