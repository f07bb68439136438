//! Exact linear algebra over the rationals: echelon forms, rank, kernels
//! and membership in a span.

use num_traits::{One, Zero};

use crate::Rat;

/// Reduced row echelon form computed in place. Returns the pivot columns.
pub fn rref(m: &mut [Vec<Rat>]) -> Vec<usize> {
    let rows = m.len();
    let cols = m.first().map_or(0, Vec::len);
    let mut pivots = Vec::new();
    let mut r = 0;
    for c in 0..cols {
        if r == rows {
            break;
        }
        let Some(p) = (r..rows).find(|&i| !m[i][c].is_zero()) else {
            continue;
        };
        m.swap(r, p);
        let inv = Rat::one() / &m[r][c];
        for x in m[r].iter_mut() {
            *x *= &inv;
        }
        for i in 0..rows {
            if i != r && !m[i][c].is_zero() {
                let f = m[i][c].clone();
                let (src, dst) = if i < r {
                    let (a, b) = m.split_at_mut(r);
                    (&b[0], &mut a[i])
                } else {
                    let (a, b) = m.split_at_mut(i);
                    (&a[r], &mut b[0])
                };
                for (d, s) in dst.iter_mut().zip(src.iter()) {
                    if !s.is_zero() {
                        *d -= &f * s;
                    }
                }
            }
        }
        pivots.push(c);
        r += 1;
    }
    pivots
}

pub fn rank(m: &[Vec<Rat>]) -> usize {
    let mut w = m.to_vec();
    rref(&mut w).len()
}

/// Basis of the null space `{v : M v = 0}`.
pub fn kernel(m: &[Vec<Rat>], cols: usize) -> Vec<Vec<Rat>> {
    let mut w = m.to_vec();
    let pivots = rref(&mut w);
    let free: Vec<usize> = (0..cols).filter(|c| !pivots.contains(c)).collect();
    free.iter()
        .map(|&f| {
            let mut v = vec![Rat::zero(); cols];
            v[f] = Rat::one();
            for (r, &pc) in pivots.iter().enumerate() {
                v[pc] = -w[r][f].clone();
            }
            v
        })
        .collect()
}

/// Incremental basis for a subspace of `Q^dim`, able to express members in
/// terms of the vectors inserted so far.
#[derive(Clone, Debug)]
pub struct SpanSolver {
    dim: usize,
    /// Echelon rows augmented with the combination producing them.
    rows: Vec<(usize, Vec<Rat>, Vec<Rat>)>,
    count: usize,
}

impl SpanSolver {
    pub fn new(dim: usize) -> Self {
        SpanSolver {
            dim,
            rows: Vec::new(),
            count: 0,
        }
    }

    pub fn len(&self) -> usize {
        self.count
    }

    pub fn is_empty(&self) -> bool {
        self.count == 0
    }

    /// Reduces `v` against the stored rows; returns the residual and the
    /// combination of stored basis vectors that was subtracted.
    fn reduce(&self, v: &[Rat]) -> (Vec<Rat>, Vec<Rat>) {
        let mut res = v.to_vec();
        let mut comb = vec![Rat::zero(); self.count];
        for (pc, row, rc) in &self.rows {
            if res[*pc].is_zero() {
                continue;
            }
            let f = res[*pc].clone();
            for (x, y) in res.iter_mut().zip(row) {
                if !y.is_zero() {
                    *x -= &f * y;
                }
            }
            for (x, y) in comb.iter_mut().zip(rc) {
                if !y.is_zero() {
                    *x += &f * y;
                }
            }
        }
        (res, comb)
    }

    /// Coordinates of `v` in the inserted basis, or `None` if outside.
    pub fn express(&self, v: &[Rat]) -> Option<Vec<Rat>> {
        assert_eq!(v.len(), self.dim);
        let (res, comb) = self.reduce(v);
        res.iter().all(Zero::is_zero).then_some(comb)
    }

    /// Inserts `v` if independent; returns whether it was added.
    pub fn insert(&mut self, v: &[Rat]) -> bool {
        assert_eq!(v.len(), self.dim);
        let (mut res, comb) = self.reduce(v);
        let Some(pc) = res.iter().position(|x| !x.is_zero()) else {
            return false;
        };
        let inv = Rat::one() / &res[pc];
        for x in res.iter_mut() {
            *x *= &inv;
        }
        // res = v - Σ comb_i b_i, scaled: the new row as a combination.
        let mut rc: Vec<Rat> = comb.iter().map(|c| -c * &inv).collect();
        rc.push(inv);
        for (_, _, old) in self.rows.iter_mut() {
            old.push(Rat::zero());
        }
        // Keep earlier rows reduced in the new pivot column.
        for (_, row, orc) in self.rows.iter_mut() {
            if row[pc].is_zero() {
                continue;
            }
            let f = row[pc].clone();
            for (x, y) in row.iter_mut().zip(&res) {
                *x -= &f * y;
            }
            for (x, y) in orc.iter_mut().zip(&rc) {
                *x -= &f * y;
            }
        }
        self.rows.push((pc, res, rc));
        self.count += 1;
        true
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rat;

    fn v(xs: &[i64]) -> Vec<Rat> {
        xs.iter().map(|&x| rat(x)).collect()
    }

    #[test]
    fn rank_and_kernel() {
        let m = vec![v(&[1, 2, 3]), v(&[2, 4, 6]), v(&[0, 1, 1])];
        assert_eq!(rank(&m), 2);
        let k = kernel(&m, 3);
        assert_eq!(k.len(), 1);
        for row in &m {
            let dot: Rat = row.iter().zip(&k[0]).map(|(a, b)| a * b).sum();
            assert!(dot.is_zero());
        }
    }

    #[test]
    fn span_solver_expresses_combinations() {
        let mut s = SpanSolver::new(3);
        assert!(s.insert(&v(&[1, 1, 0])));
        assert!(s.insert(&v(&[0, 1, 1])));
        assert!(!s.insert(&v(&[1, 2, 1])));
        let c = s.express(&v(&[2, 5, 3])).unwrap();
        assert_eq!(c, v(&[2, 3]));
        assert!(s.express(&v(&[0, 0, 1])).is_none());
    }
}
