//! Dense two-phase tableau simplex for `min c'x  s.t.  Ax = b, x >= 0`.
//!
//! Sized for the calibration LP (a few hundred rows at most). Entering columns
//! follow Dantzig's rule; after a run of degenerate pivots the solver switches
//! to Bland's rule, which cannot cycle.

use nalgebra::DMatrix;

use crate::error::{Error, Result};

const PIVOT_TOL: f64 = 1e-11;
const COST_TOL: f64 = 1e-12;
const DEGENERATE_RUN: usize = 50;

struct Tableau {
    rows: usize,
    cols: usize,
    /// `(rows + 1) x (cols + 1)`, row-major. The last row holds reduced costs,
    /// the last column the right-hand side.
    data: Vec<f64>,
    basis: Vec<usize>,
}

impl Tableau {
    fn at(&self, r: usize, c: usize) -> f64 {
        self.data[r * (self.cols + 1) + c]
    }

    fn rhs(&self, r: usize) -> f64 {
        self.at(r, self.cols)
    }

    fn pivot(&mut self, pr: usize, pc: usize) {
        let width = self.cols + 1;
        let inv = 1.0 / self.at(pr, pc);
        let (before, rest) = self.data.split_at_mut(pr * width);
        let (prow, after) = rest.split_at_mut(width);
        for v in prow.iter_mut() {
            *v *= inv;
        }
        prow[pc] = 1.0;
        let eliminate = |row: &mut [f64]| {
            let f = row[pc];
            if f != 0.0 {
                for (x, &p) in row.iter_mut().zip(prow.iter()) {
                    *x -= f * p;
                }
                row[pc] = 0.0;
            }
        };
        before.chunks_exact_mut(width).for_each(eliminate);
        after.chunks_exact_mut(width).for_each(eliminate);
        self.basis[pr] = pc;
    }

    /// Run simplex pivots on the current objective row over `allowed` columns.
    fn optimize(&mut self, allowed: usize) -> Result<()> {
        let max_iter = 50 * (self.rows + self.cols) + 1000;
        let mut degenerate = 0usize;
        let obj = self.rows;
        for _ in 0..max_iter {
            let bland = degenerate >= DEGENERATE_RUN;
            let mut enter = None;
            let mut best = -COST_TOL;
            for c in 0..allowed {
                let rc = self.at(obj, c);
                if rc < best {
                    enter = Some(c);
                    if bland {
                        break;
                    }
                    best = rc;
                }
            }
            let Some(pc) = enter else {
                return Ok(());
            };

            let mut leave: Option<(usize, f64)> = None;
            for r in 0..self.rows {
                let a = self.at(r, pc);
                if a > PIVOT_TOL {
                    let ratio = self.rhs(r) / a;
                    let better = match leave {
                        None => true,
                        Some((lr, lratio)) => {
                            ratio < lratio - 1e-15
                                || (ratio <= lratio + 1e-15 && self.basis[r] < self.basis[lr])
                        }
                    };
                    if better {
                        leave = Some((r, ratio));
                    }
                }
            }
            let Some((pr, ratio)) = leave else {
                return Err(Error::Numerical("linear program is unbounded".into()));
            };
            degenerate = if ratio.abs() <= 1e-15 { degenerate + 1 } else { 0 };
            self.pivot(pr, pc);
        }
        Err(Error::Numerical("simplex iteration limit reached".into()))
    }
}

/// Solve `min c'x` subject to `a x = b`, `x >= 0`. Returns the optimal `x`.
pub(crate) fn minimize(a: &DMatrix<f64>, b: &[f64], c: &[f64]) -> Result<Vec<f64>> {
    let (rows, n) = a.shape();
    assert_eq!(b.len(), rows);
    assert_eq!(c.len(), n);
    let cols = n + rows; // originals then one artificial per row
    let width = cols + 1;
    let mut data = vec![0.0; (rows + 1) * width];
    for r in 0..rows {
        let sign = if b[r] < 0.0 { -1.0 } else { 1.0 };
        for j in 0..n {
            data[r * width + j] = sign * a[(r, j)];
        }
        data[r * width + n + r] = 1.0;
        data[r * width + cols] = sign * b[r];
    }
    // Phase 1 objective: sum of artificials, expressed in nonbasic columns.
    for r in 0..rows {
        for j in 0..n {
            data[rows * width + j] -= data[r * width + j];
        }
        data[rows * width + cols] -= data[r * width + cols];
    }
    let mut t = Tableau {
        rows,
        cols,
        data,
        basis: (n..n + rows).collect(),
    };
    t.optimize(n)?;

    let infeasibility = -t.at(rows, cols);
    let scale = 1.0 + b.iter().map(|v| v.abs()).fold(0.0, f64::max);
    if infeasibility > 1e-9 * scale {
        return Err(Error::Numerical(format!(
            "linear program is infeasible (phase-1 objective {infeasibility:.3e})"
        )));
    }

    // Drive artificials out of the basis where possible.
    for r in 0..rows {
        if t.basis[r] >= n {
            if let Some(pc) = (0..n).find(|&j| t.at(r, j).abs() > 1e-9) {
                t.pivot(r, pc);
            }
        }
    }

    // Phase 2 objective row: reduced costs c_j - c_B' B^{-1} a_j.
    for j in 0..=cols {
        t.data[rows * width + j] = if j < n { c[j] } else { 0.0 };
    }
    for r in 0..rows {
        let cb = if t.basis[r] < n { c[t.basis[r]] } else { 0.0 };
        if cb != 0.0 {
            for j in 0..=cols {
                let v = t.at(r, j);
                t.data[rows * width + j] -= cb * v;
            }
        }
    }
    t.optimize(n)?;

    let mut x = vec![0.0; n];
    for r in 0..rows {
        if t.basis[r] < n {
            x[t.basis[r]] = t.rhs(r).max(0.0);
        }
    }
    Ok(x)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn small_lp() {
        // min -x - y  s.t. x + 2y + s1 = 4, 3x + y + s2 = 6
        let a = DMatrix::from_row_slice(2, 4, &[1.0, 2.0, 1.0, 0.0, 3.0, 1.0, 0.0, 1.0]);
        let x = minimize(&a, &[4.0, 6.0], &[-1.0, -1.0, 0.0, 0.0]).unwrap();
        assert!((x[0] - 1.6).abs() < 1e-12 && (x[1] - 1.2).abs() < 1e-12);
    }

    #[test]
    fn negative_rhs_and_redundant_rows() {
        // x + y = 1 twice, -x = -0.25; min y
        let a = DMatrix::from_row_slice(3, 2, &[1.0, 1.0, 1.0, 1.0, -1.0, 0.0]);
        let x = minimize(&a, &[1.0, 1.0, -0.25], &[0.0, 1.0]).unwrap();
        assert!((x[0] - 0.25).abs() < 1e-12 && (x[1] - 0.75).abs() < 1e-12);
    }

    #[test]
    fn infeasible_detected() {
        let a = DMatrix::from_row_slice(2, 1, &[1.0, 1.0]);
        assert!(minimize(&a, &[1.0, 2.0], &[0.0]).is_err());
    }

    #[test]
    fn unbounded_detected() {
        let a = DMatrix::from_row_slice(1, 2, &[1.0, -1.0]);
        assert!(minimize(&a, &[0.0], &[-1.0, 0.0]).is_err());
    }
}
