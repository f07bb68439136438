//! Dense matrices of polynomials and their fraction-free determinant.

use crate::error::PolyError;
use crate::RatPoly;

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PolyMatrix {
    rows: usize,
    cols: usize,
    nvars: usize,
    entries: Vec<RatPoly>,
}

impl PolyMatrix {
    /// Row-major construction. All entries must share `nvars`.
    pub fn new(rows: usize, cols: usize, entries: Vec<RatPoly>) -> Result<Self, PolyError> {
        if entries.len() != rows * cols {
            return Err(PolyError::Shape(format!(
                "{} entries for a {rows}x{cols} matrix",
                entries.len()
            )));
        }
        let nvars = entries.first().map_or(0, RatPoly::nvars);
        if let Some(bad) = entries.iter().find(|e| e.nvars() != nvars) {
            return Err(PolyError::DimensionMismatch {
                expected: nvars,
                found: bad.nvars(),
            });
        }
        Ok(PolyMatrix {
            rows,
            cols,
            nvars,
            entries,
        })
    }

    pub fn from_rows(rows: Vec<Vec<RatPoly>>) -> Result<Self, PolyError> {
        let r = rows.len();
        let c = rows.first().map_or(0, Vec::len);
        if rows.iter().any(|row| row.len() != c) {
            return Err(PolyError::Shape("ragged rows".into()));
        }
        Self::new(r, c, rows.into_iter().flatten().collect())
    }

    /// Matrix whose columns are the given vectors.
    pub fn from_columns(cols: &[Vec<RatPoly>]) -> Result<Self, PolyError> {
        let c = cols.len();
        let r = cols.first().map_or(0, Vec::len);
        if cols.iter().any(|col| col.len() != r) {
            return Err(PolyError::Shape("ragged columns".into()));
        }
        let mut entries = Vec::with_capacity(r * c);
        for i in 0..r {
            for col in cols {
                entries.push(col[i].clone());
            }
        }
        Self::new(r, c, entries)
    }

    pub fn identity(size: usize, nvars: usize) -> Self {
        let mut entries = vec![RatPoly::zero(nvars); size * size];
        for i in 0..size {
            entries[i * size + i] = RatPoly::one(nvars);
        }
        PolyMatrix {
            rows: size,
            cols: size,
            nvars,
            entries,
        }
    }

    /// Jacobian `∂ f_i / ∂ x_{vars[j]}`.
    pub fn jacobian(fs: &[RatPoly], vars: &[usize]) -> Result<Self, PolyError> {
        let mut entries = Vec::with_capacity(fs.len() * vars.len());
        for f in fs {
            for &v in vars {
                entries.push(f.partial(v));
            }
        }
        Self::new(fs.len(), vars.len(), entries)
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn nvars(&self) -> usize {
        self.nvars
    }

    pub fn get(&self, i: usize, j: usize) -> &RatPoly {
        &self.entries[i * self.cols + j]
    }

    pub fn mul(&self, other: &PolyMatrix) -> Result<PolyMatrix, PolyError> {
        if self.cols != other.rows {
            return Err(PolyError::Shape(format!(
                "{}x{} times {}x{}",
                self.rows, self.cols, other.rows, other.cols
            )));
        }
        let mut entries = Vec::with_capacity(self.rows * other.cols);
        for i in 0..self.rows {
            for j in 0..other.cols {
                let mut acc = RatPoly::zero(self.nvars);
                for k in 0..self.cols {
                    acc += &(self.get(i, k) * other.get(k, j));
                }
                entries.push(acc);
            }
        }
        PolyMatrix::new(self.rows, other.cols, entries)
    }

    /// Determinant by Bareiss elimination. Every intermediate division is
    /// exact, so the entries stay polynomial.
    pub fn det(&self) -> Result<RatPoly, PolyError> {
        if self.rows != self.cols {
            return Err(PolyError::NotSquare {
                rows: self.rows,
                cols: self.cols,
            });
        }
        let n = self.rows;
        if n == 0 {
            return Ok(RatPoly::one(self.nvars));
        }
        let mut a: Vec<Vec<RatPoly>> = (0..n)
            .map(|i| self.entries[i * n..(i + 1) * n].to_vec())
            .collect();
        let mut prev = RatPoly::one(self.nvars);
        let mut negate = false;
        for k in 0..n - 1 {
            if a[k][k].is_zero() {
                // Prefer the sparsest available pivot.
                let swap = (k + 1..n)
                    .filter(|&i| !a[i][k].is_zero())
                    .min_by_key(|&i| a[i][k].num_terms());
                match swap {
                    Some(i) => {
                        a.swap(k, i);
                        negate = !negate;
                    }
                    None => return Ok(RatPoly::zero(self.nvars)),
                }
            }
            for i in k + 1..n {
                for j in k + 1..n {
                    let num = &(&a[k][k] * &a[i][j]) - &(&a[i][k] * &a[k][j]);
                    a[i][j] = if prev.is_one_poly() {
                        num
                    } else {
                        num.div_exact(&prev)
                            .expect("Bareiss step divides exactly")
                    };
                }
                a[i][k] = RatPoly::zero(self.nvars);
            }
            prev = a[k][k].clone();
        }
        let d = a[n - 1][n - 1].clone();
        Ok(if negate { -d } else { d })
    }

    /// Cofactor expansion, exponential in the size. Kept as an independent
    /// check for small matrices.
    pub fn det_cofactor(&self) -> Result<RatPoly, PolyError> {
        if self.rows != self.cols {
            return Err(PolyError::NotSquare {
                rows: self.rows,
                cols: self.cols,
            });
        }
        let idx: Vec<usize> = (0..self.cols).collect();
        Ok(self.cofactor_rec(0, &idx))
    }

    fn cofactor_rec(&self, row: usize, cols: &[usize]) -> RatPoly {
        if cols.is_empty() {
            return RatPoly::one(self.nvars);
        }
        let mut acc = RatPoly::zero(self.nvars);
        for (pos, &c) in cols.iter().enumerate() {
            let e = self.get(row, c);
            if e.is_zero() {
                continue;
            }
            let rest: Vec<usize> = cols.iter().copied().filter(|&x| x != c).collect();
            let term = e * &self.cofactor_rec(row + 1, &rest);
            if pos % 2 == 0 {
                acc += &term;
            } else {
                acc -= &term;
            }
        }
        acc
    }
}

impl RatPoly {
    pub(crate) fn is_one_poly(&self) -> bool {
        self.num_terms() == 1
            && self.is_constant()
            && self.constant_value().is_some_and(|c| num_traits::One::is_one(&c))
    }
}
