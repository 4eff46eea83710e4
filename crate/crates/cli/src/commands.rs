use std::fs::{self, File};
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use mvpois::calibration::{admissible_bounds, calibrate_target, CorrelationBounds};
use mvpois::simulation::correlation_curve;
use mvpois::{
    backward_simulate, build_mixture, calibrate_with_threshold, compute_all_extreme_measures,
    correlation_matrix, forward_continue, truncate, CalibrationProblem, CorrelationMatrix,
    DiscreteMarginal, ExtremeMeasure, MixtureMeasure, MonotonicityVector, TruncatedMarginal,
};
use serde::{Deserialize, Serialize};

use crate::config::RunConfig;
use crate::reference;
use crate::CliError;

pub const CORRELATIONS_FILE: &str = "extreme_correlations.json";
pub const CALIBRATION_FILE: &str = "calibration.json";
pub const PATHS_FILE: &str = "paths.csv";
pub const CURVE_FILE: &str = "correlation_curve.csv";

fn marginals(config: &RunConfig) -> Result<Vec<TruncatedMarginal>, CliError> {
    config
        .intensities
        .iter()
        .map(|&l| Ok(truncate(&DiscreteMarginal::poisson(l, config.horizon)?, config.epsilon)?))
        .collect()
}

fn create_out_dir(dir: &Path) -> Result<(), CliError> {
    fs::create_dir_all(dir)
        .map_err(|e| CliError::Runtime(format!("cannot create {}: {e}", dir.display())))
}

fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<(), CliError> {
    let mut out = BufWriter::new(File::create(path)?);
    serde_json::to_writer_pretty(&mut out, value)
        .map_err(|e| CliError::Runtime(format!("cannot write {}: {e}", path.display())))?;
    writeln!(out)?;
    out.flush()?;
    Ok(())
}

pub fn measure_file_name(e: &MonotonicityVector) -> String {
    format!("measure_{}.json", e.label())
}

#[derive(Serialize)]
struct CorrelationSummary<'a> {
    intensities: &'a [f64],
    horizon: f64,
    epsilon: f64,
    structures: Vec<&'a MonotonicityVector>,
    matrices: Vec<CorrelationMatrix>,
    bounds: CorrelationBounds,
}

pub fn ejd(config: &RunConfig) -> Result<(), CliError> {
    let ms = marginals(config)?;
    let measures = compute_all_extreme_measures(&ms)?;
    create_out_dir(&config.out)?;
    let mut matrices = Vec::with_capacity(measures.len());
    for m in &measures {
        write_json(&config.out.join(measure_file_name(m.structure())), m)?;
        let c = correlation_matrix(m)?;
        println!("e = {}  ({} support points)\n{c}", m.structure(), m.len());
        matrices.push(c);
    }
    let summary = CorrelationSummary {
        intensities: &config.intensities,
        horizon: config.horizon,
        epsilon: config.epsilon,
        structures: measures.iter().map(ExtremeMeasure::structure).collect(),
        matrices,
        bounds: admissible_bounds(&ms)?,
    };
    write_json(&config.out.join(CORRELATIONS_FILE), &summary)?;
    Ok(())
}

/// On-disk calibration result, self-describing enough to rebuild the mixture.
#[derive(Debug, Serialize, Deserialize)]
pub struct CalibrationFile {
    pub intensities: Vec<f64>,
    pub horizon: f64,
    pub epsilon: f64,
    pub target: CorrelationMatrix,
    pub structures: Vec<Vec<u8>>,
    pub weights: Vec<f64>,
    pub residual: f64,
    pub active: Vec<usize>,
}

pub fn calibrate(config: &RunConfig) -> Result<(), CliError> {
    let target = config
        .target
        .as_ref()
        .ok_or_else(|| CliError::Usage("calibrate needs --target FILE".into()))?;
    let ms = marginals(config)?;
    let (problem, result) = calibrate_target(&ms, target, config.threshold)?;
    let file = CalibrationFile {
        intensities: config.intensities.clone(),
        horizon: config.horizon,
        epsilon: config.epsilon,
        target: target.clone(),
        structures: problem.structures().iter().map(|e| e.bits().to_vec()).collect(),
        weights: result.weights.clone(),
        residual: result.residual,
        active: result.active_structures.clone(),
    };
    create_out_dir(&config.out)?;
    write_json(&config.out.join(CALIBRATION_FILE), &file)?;
    for (e, w) in problem.structures().iter().zip(&result.weights) {
        println!("{e}  {w:.9}");
    }
    println!("residual {:.3e}", result.residual);
    Ok(())
}

pub enum MixtureSource {
    Calibration(PathBuf),
    Structure(String),
}

fn parse_structure(text: &str, dim: usize) -> Result<MonotonicityVector, CliError> {
    let bits: Vec<u8> = text
        .chars()
        .filter(|c| !matches!(c, ',' | ' ' | '(' | ')'))
        .map(|c| match c {
            '0' => Ok(0),
            '1' => Ok(1),
            _ => Err(CliError::Usage(format!("bad structure {text:?}: use digits 0 and 1"))),
        })
        .collect::<Result<_, _>>()?;
    if bits.len() != dim {
        return Err(CliError::Usage(format!(
            "structure {text:?} has {} entries, expected {dim}",
            bits.len()
        )));
    }
    Ok(MonotonicityVector::canonicalize(bits)?)
}

fn load_mixture(
    config: &RunConfig,
    measures: &[ExtremeMeasure],
    source: &MixtureSource,
) -> Result<MixtureMeasure, CliError> {
    match source {
        MixtureSource::Structure(text) => {
            let e = parse_structure(text, config.intensities.len())?;
            let m = measures
                .iter()
                .find(|m| m.structure() == &e)
                .expect("every canonical structure is enumerated");
            Ok(MixtureMeasure::single(m.clone()))
        }
        MixtureSource::Calibration(path) => {
            let text = fs::read_to_string(path)
                .map_err(|e| CliError::Usage(format!("cannot read {}: {e}", path.display())))?;
            let file: CalibrationFile = serde_json::from_str(&text)
                .map_err(|e| CliError::Usage(format!("invalid calibration {}: {e}", path.display())))?;
            if file.intensities != config.intensities
                || file.horizon != config.horizon
                || file.epsilon != config.epsilon
            {
                return Err(CliError::Usage(format!(
                    "calibration was computed for intensities {:?} over {} (epsilon {}), not {:?} over {} (epsilon {})",
                    file.intensities, file.horizon, file.epsilon, config.intensities, config.horizon, config.epsilon
                )));
            }
            let expected: Vec<&[u8]> = measures.iter().map(|m| m.structure().bits()).collect();
            let got: Vec<&[u8]> = file.structures.iter().map(Vec::as_slice).collect();
            if expected != got {
                return Err(CliError::Usage("calibration structures do not match".into()));
            }
            Ok(build_mixture(&file.weights, measures)?)
        }
    }
}

pub fn simulate(config: &RunConfig, source: &MixtureSource) -> Result<(), CliError> {
    let ms = marginals(config)?;
    let measures = compute_all_extreme_measures(&ms)?;
    let mixture = load_mixture(config, &measures, source)?;
    let rho = correlation_matrix(&mixture)?;

    let paths = backward_simulate(&mixture, config.horizon, config.n_paths, config.seed)?;
    let paths = forward_continue(&paths, &mixture, config.horizon, config.m_intervals, config.seed)?;

    create_out_dir(&config.out)?;
    let mut out = BufWriter::new(File::create(config.out.join(PATHS_FILE))?);
    paths.write_csv(&mut out)?;
    out.flush()?;

    let curve = correlation_curve(&paths, &rho, config.horizon)?;
    let mut out = BufWriter::new(File::create(config.out.join(CURVE_FILE))?);
    curve.write_csv(&mut out)?;
    out.flush()?;
    println!(
        "{} paths, {} events over [0, {}]",
        paths.n_paths(),
        paths.total_events(),
        paths.horizon()
    );
    Ok(())
}

struct Check {
    name: String,
    worst: f64,
    tolerance: f64,
}

/// Recompute the reference example at `config` and compare.
pub fn reproduce(config: &RunConfig) -> Result<(), CliError> {
    if config.intensities.len() != 3 {
        return Err(CliError::Usage("the reference example has three intensities".into()));
    }
    let ms = marginals(config)?;
    let measures = compute_all_extreme_measures(&ms)?;
    let by_bits = |bits: &[u8]| -> usize {
        measures
            .iter()
            .position(|m| m.structure().bits() == bits)
            .expect("enumerated")
    };
    let mut checks = Vec::new();

    for (k, (bits, rows)) in reference::STRUCTURES.iter().zip(reference::ROWS).enumerate() {
        let m = &measures[by_bits(bits)];
        let worst = rows
            .iter()
            .map(|(p, w)| (m.prob_at(p) - w).abs())
            .fold(0.0, f64::max);
        checks.push(Check {
            name: format!("e{} rows", k + 1),
            worst,
            tolerance: 5e-5,
        });
    }

    let mut columns = Vec::new();
    for (k, (bits, expected)) in reference::STRUCTURES.iter().zip(reference::MATRICES).enumerate() {
        let c = correlation_matrix(&measures[by_bits(bits)])?;
        let worst = c
            .upper_triangle()
            .iter()
            .zip(expected)
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max);
        checks.push(Check {
            name: format!("C^e{}", k + 1),
            worst,
            tolerance: 1e-4,
        });
        columns.push(c);
    }

    let target = CorrelationMatrix::from_upper_triangle(3, &reference::TARGET)?;
    let problem = CalibrationProblem::from_measures(&measures, &target)?;
    match calibrate_with_threshold(&problem, config.threshold) {
        Ok(result) => {
            let worst = reference::STRUCTURES
                .iter()
                .zip(reference::WEIGHTS)
                .map(|(bits, w)| (result.weights[by_bits(bits)] - w).abs())
                .fold(0.0, f64::max);
            checks.push(Check {
                name: "weights".into(),
                worst,
                tolerance: 1e-5,
            });
        }
        Err(e) => {
            println!("weights: calibration failed: {e}");
            checks.push(Check {
                name: "weights".into(),
                worst: f64::INFINITY,
                tolerance: 1e-5,
            });
        }
    }

    println!(
        "intensities {:?}, horizon {}, epsilon {}",
        config.intensities, config.horizon, config.epsilon
    );
    let mut failed = Vec::new();
    for c in &checks {
        let ok = c.worst <= c.tolerance;
        println!(
            "{:<10} max deviation {:.3e} (tolerance {:.0e})  {}",
            c.name,
            c.worst,
            c.tolerance,
            if ok { "ok" } else { "MISMATCH" }
        );
        if !ok {
            failed.push(c.name.clone());
        }
    }
    if failed.is_empty() {
        Ok(())
    } else {
        Err(CliError::Mismatch(format!("mismatch in {}", failed.join(", "))))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn structure_parsing() {
        assert_eq!(parse_structure("010", 3).unwrap().bits(), &[0, 1, 0]);
        assert_eq!(parse_structure("(1,0,1)", 3).unwrap().bits(), &[0, 1, 0]);
        assert!(parse_structure("01", 3).is_err());
        assert!(parse_structure("0a0", 3).is_err());
    }
}
