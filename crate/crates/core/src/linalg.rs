//! Exact linear solving by reduced row echelon form.
//!
//! The only solution-selection rule: columns are scanned left to right,
//! the leftmost available pivot is taken, and free unknowns are zero in the
//! returned particular solution.

use num_traits::Zero;

use crate::coeff::Coeff;

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct LinearSystem {
    pub rows: usize,
    pub cols: usize,
    /// Row-major `rows × cols` grid.
    pub matrix: Vec<Vec<Coeff>>,
    pub rhs: Vec<Coeff>,
    pub labels: Vec<String>,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Solution {
    Solved { solution: Vec<Coeff>, kernel: Vec<Vec<Coeff>> },
    Inconsistent { row: usize },
}

impl LinearSystem {
    pub fn new(cols: usize) -> Self {
        LinearSystem {
            rows: 0,
            cols,
            matrix: Vec::new(),
            rhs: Vec::new(),
            labels: (0..cols).map(|j| format!("x{}", j)).collect(),
        }
    }

    pub fn from_dense(matrix: Vec<Vec<Coeff>>, rhs: Vec<Coeff>) -> Self {
        let cols = matrix.first().map(Vec::len).unwrap_or(0);
        assert!(matrix.iter().all(|r| r.len() == cols), "ragged matrix");
        assert_eq!(matrix.len(), rhs.len(), "rhs length");
        let mut s = LinearSystem::new(cols);
        s.rows = matrix.len();
        s.matrix = matrix;
        s.rhs = rhs;
        s
    }

    pub fn with_labels(mut self, labels: Vec<String>) -> Self {
        assert_eq!(labels.len(), self.cols);
        self.labels = labels;
        self
    }

    pub fn push_row(&mut self, row: Vec<Coeff>, rhs: Coeff) {
        assert_eq!(row.len(), self.cols, "row length");
        self.matrix.push(row);
        self.rhs.push(rhs);
        self.rows += 1;
    }

    /// Adds an equation given sparsely as `(column, coefficient)` pairs.
    pub fn push_sparse(&mut self, entries: &[(usize, Coeff)], rhs: Coeff) {
        let mut row = vec![Coeff::zero(); self.cols];
        for (j, c) in entries {
            row[*j] += c;
        }
        self.push_row(row, rhs);
    }

    pub fn solve(&self) -> Solution {
        solve(self)
    }
}

pub fn solve(sys: &LinearSystem) -> Solution {
    let cols = sys.cols;
    let mut a: Vec<Vec<Coeff>> = sys
        .matrix
        .iter()
        .zip(&sys.rhs)
        .map(|(r, b)| {
            let mut v = r.clone();
            v.push(b.clone());
            v
        })
        .collect();
    let mut pivots: Vec<usize> = Vec::new();
    let mut r = 0;
    for c in 0..cols {
        if r == a.len() {
            break;
        }
        let Some(p) = (r..a.len()).find(|&i| !a[i][c].is_zero()) else {
            continue;
        };
        a.swap(r, p);
        let inv = a[r][c].inv().expect("nonzero pivot");
        for x in a[r].iter_mut().skip(c) {
            *x *= &inv;
        }
        let pivot_row = a[r].clone();
        for (i, row) in a.iter_mut().enumerate() {
            if i == r || row[c].is_zero() {
                continue;
            }
            let f = row[c].clone();
            for (x, p) in row.iter_mut().zip(&pivot_row).skip(c) {
                if !p.is_zero() {
                    *x -= &(&f * p);
                }
            }
        }
        pivots.push(c);
        r += 1;
    }
    if let Some(row) = (r..a.len()).find(|&i| !a[i][cols].is_zero()) {
        return Solution::Inconsistent { row };
    }
    let mut solution = vec![Coeff::zero(); cols];
    for (i, &c) in pivots.iter().enumerate() {
        solution[c] = a[i][cols].clone();
    }
    let mut kernel = Vec::new();
    for f in (0..cols).filter(|c| !pivots.contains(c)) {
        let mut v = vec![Coeff::zero(); cols];
        v[f] = Coeff::from_int(1);
        for (i, &c) in pivots.iter().enumerate() {
            v[c] = -&a[i][f];
        }
        kernel.push(v);
    }
    Solution::Solved { solution, kernel }
}

/// Inverse of a square matrix, `None` when singular.
pub fn invert(m: &[Vec<Coeff>]) -> Option<Vec<Vec<Coeff>>> {
    let n = m.len();
    let mut cols: Vec<Vec<Coeff>> = Vec::with_capacity(n);
    for j in 0..n {
        let rhs: Vec<Coeff> = (0..n).map(|i| Coeff::from_int(if i == j { 1 } else { 0 })).collect();
        match solve(&LinearSystem::from_dense(m.to_vec(), rhs)) {
            Solution::Solved { solution, kernel } if kernel.is_empty() => cols.push(solution),
            _ => return None,
        }
    }
    Some((0..n).map(|i| (0..n).map(|j| cols[j][i].clone()).collect()).collect())
}

pub fn mat_vec(m: &[Vec<Coeff>], v: &[Coeff]) -> Vec<Coeff> {
    m.iter()
        .map(|row| row.iter().zip(v).fold(Coeff::zero(), |acc, (a, b)| &acc + &(a * b)))
        .collect()
}

pub fn mat_mul(a: &[Vec<Coeff>], b: &[Vec<Coeff>]) -> Vec<Vec<Coeff>> {
    let k = b.len();
    let m = b.first().map(Vec::len).unwrap_or(0);
    a.iter()
        .map(|row| {
            (0..m)
                .map(|j| (0..k).fold(Coeff::zero(), |acc, t| &acc + &(&row[t] * &b[t][j])))
                .collect()
        })
        .collect()
}
