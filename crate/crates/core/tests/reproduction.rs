//! The three-dimensional reference example, at the parameters that reproduce
//! it: the comonotone rows at mu = (3, 5, 7), eps = 0.01; the remaining rows
//! and the four extreme matrices at mu = (1, 2, 3), eps = 1e-5; the mixture
//! weights at mu = (3, 5, 7), eps = 1e-5.

mod common;

use common::*;
use mvpois::{
    calibrate, compute_extreme_measure, correlation_matrix, truncate, CalibrationProblem,
    CorrelationMatrix, DiscreteMarginal, ExtremeMeasure, MonotonicityVector, TruncatedMarginal,
};

fn poissons(means: &[f64], eps: f64) -> Vec<TruncatedMarginal> {
    means
        .iter()
        .map(|&m| truncate(&DiscreteMarginal::poisson(m, 1.0).unwrap(), eps).unwrap())
        .collect()
}

fn measure(ms: &[TruncatedMarginal], k: usize) -> ExtremeMeasure {
    let e = MonotonicityVector::new(EXAMPLE_STRUCTURES[k].to_vec()).unwrap();
    compute_extreme_measure(ms, &e).unwrap()
}

fn assert_rows(m: &ExtremeMeasure, rows: Rows) {
    for (point, p) in rows {
        let got = m.prob_at(point);
        assert!((got - p).abs() <= 5e-5, "{point:?}: {got} vs {p}");
    }
}

#[test]
fn comonotone_rows_at_3_5_7() {
    let m = measure(&poissons(&[3.0, 5.0, 7.0], 0.01), 0);
    assert_rows(&m, ROWS_1);
    // every listed row is a support point, in staircase order
    let listed: Vec<&[u32]> = ROWS_1.iter().map(|(p, _)| *p).collect();
    let support: Vec<&[u32]> = m.points().collect();
    assert_eq!(&support[..listed.len()], &listed[..]);
}

#[test]
fn mixed_rows_at_1_2_3() {
    let ms = poissons(&[1.0, 2.0, 3.0], 1e-5);
    for k in 1..4 {
        assert_rows(&measure(&ms, k), EXAMPLE_ROWS[k]);
    }
}

#[test]
fn extreme_matrices_at_1_2_3() {
    let ms = poissons(&[1.0, 2.0, 3.0], 1e-5);
    for (k, reference) in EXAMPLE_MATRICES.iter().enumerate() {
        let c = correlation_matrix(&measure(&ms, k)).unwrap();
        for (got, want) in c.upper_triangle().iter().zip(reference) {
            assert!((got - want).abs() <= 1e-5, "e{}: {got} vs {want}", k + 1);
        }
    }
}

#[test]
fn weights_at_3_5_7_fine_truncation() {
    let ms = poissons(&[3.0, 5.0, 7.0], 1e-5);
    let measures: Vec<ExtremeMeasure> = (0..4).map(|k| measure(&ms, k)).collect();
    // the problem wants structures in enumeration order
    let mut ordered = measures.clone();
    ordered.sort_by(|a, b| a.structure().cmp(b.structure()));
    let target = CorrelationMatrix::from_upper_triangle(3, &EXAMPLE_TARGET).unwrap();
    let problem = CalibrationProblem::from_measures(&ordered, &target).unwrap();
    let result = calibrate(&problem).unwrap();
    assert!(result.residual <= 1e-8);
    for (m, want) in measures.iter().zip(EXAMPLE_WEIGHTS) {
        let k = problem
            .structures()
            .iter()
            .position(|s| s == m.structure())
            .unwrap();
        assert!((result.weights[k] - want).abs() <= 1e-5, "{}: {} vs {want}", m.structure(), result.weights[k]);
    }
}
