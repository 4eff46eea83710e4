//! Post-processing of a feasible simplex weight vector: minimum-norm selection
//! and reduction to a sparse support.

use nalgebra::{DMatrix, DVector};

const STEP_TOL: f64 = 1e-13;
const MULTIPLIER_TOL: f64 = 1e-12;

fn columns(e: &DMatrix<f64>, idx: &[usize]) -> DMatrix<f64> {
    DMatrix::from_fn(e.nrows(), idx.len(), |r, c| e[(r, idx[c])])
}

/// Minimum-norm least-squares solution of `e_f x = d` and the multiplier
/// `nu` with `x = e_f' nu`.
fn equality_solution(e_f: &DMatrix<f64>, d: &DVector<f64>) -> (DVector<f64>, DVector<f64>) {
    let gram = e_f * e_f.transpose();
    let scale = gram.amax().max(1.0);
    let pinv = gram
        .pseudo_inverse(1e-13 * scale)
        .expect("pseudo-inverse tolerance is nonnegative");
    let nu = pinv * d;
    (e_f.transpose() * &nu, nu)
}

/// Primal active-set method for `min |w|^2  s.t.  e w = d, w >= 0`, started
/// from a (nearly) feasible `start`.
pub(crate) fn min_norm(e: &DMatrix<f64>, d: &DVector<f64>, start: &[f64]) -> Vec<f64> {
    let n = e.ncols();
    let mut w: Vec<f64> = start.iter().map(|&x| x.max(0.0)).collect();
    let mut free: Vec<usize> = (0..n).filter(|&i| w[i] > 0.0).collect();
    let max_iter = 4 * n + 100;

    for _ in 0..max_iter {
        let e_f = columns(e, &free);
        let (target, nu) = equality_solution(&e_f, d);
        let step: Vec<f64> = free
            .iter()
            .zip(target.iter())
            .map(|(&i, &t)| t - w[i])
            .collect();
        let step_norm = step.iter().fold(0.0f64, |m, s| m.max(s.abs()));

        if step_norm <= STEP_TOL {
            for (&i, &t) in free.iter().zip(target.iter()) {
                w[i] = t.max(0.0);
            }
            // Multiplier of the bound w_i >= 0 is -e_i' nu; release the most
            // violated one.
            let entering = (0..n)
                .filter(|i| !free.contains(i))
                .map(|i| (i, e.column(i).dot(&nu)))
                .filter(|&(_, g)| g > MULTIPLIER_TOL)
                .max_by(|a, b| a.1.total_cmp(&b.1));
            match entering {
                Some((i, _)) => {
                    free.push(i);
                    free.sort_unstable();
                }
                None => break,
            }
            continue;
        }

        let mut alpha = 1.0;
        let mut blocking = None;
        for (k, (&i, &s)) in free.iter().zip(&step).enumerate() {
            if s < 0.0 {
                let a = w[i] / -s;
                if a < alpha {
                    alpha = a;
                    blocking = Some(k);
                }
            }
        }
        for (&i, &s) in free.iter().zip(&step) {
            w[i] = (w[i] + alpha * s).max(0.0);
        }
        if let Some(k) = blocking {
            let i = free.remove(k);
            w[i] = 0.0;
        }
    }
    w
}

/// Move `w` along null directions of `e` until at most `e.nrows()` entries
/// are positive. `e w` is unchanged up to rounding.
pub(crate) fn reduce_support(e: &DMatrix<f64>, w: &mut [f64]) {
    let rows = e.nrows();
    loop {
        let active: Vec<usize> = (0..w.len()).filter(|&i| w[i] > 0.0).collect();
        if active.len() <= rows {
            return;
        }
        let pick = &active[..rows + 1];
        // Square (rows + 1) system with a zero last row: its smallest right
        // singular vector spans a null direction of the picked columns.
        let mut square = DMatrix::zeros(rows + 1, rows + 1);
        for (c, &i) in pick.iter().enumerate() {
            for r in 0..rows {
                square[(r, c)] = e[(r, i)];
            }
        }
        let svd = square.svd(false, true);
        let v_t = svd.v_t.expect("right singular vectors requested");
        let smallest = svd
            .singular_values
            .iter()
            .enumerate()
            .min_by(|a, b| a.1.total_cmp(b.1))
            .map(|(k, _)| k)
            .expect("nonempty");
        let mut z: Vec<f64> = v_t.row(smallest).iter().copied().collect();
        if !z.iter().any(|&v| v < 0.0) {
            z.iter_mut().for_each(|v| *v = -*v);
        }

        let (hit, theta) = pick
            .iter()
            .zip(&z)
            .enumerate()
            .filter(|(_, (_, &zk))| zk < 0.0)
            .map(|(k, (&i, &zk))| (k, w[i] / -zk))
            .min_by(|a, b| a.1.total_cmp(&b.1))
            .expect("null direction has a negative entry");
        for (&i, &zk) in pick.iter().zip(&z) {
            w[i] = (w[i] + theta * zk).max(0.0);
        }
        w[pick[hit]] = 0.0;
    }
}
