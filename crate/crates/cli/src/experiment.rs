//! Experiment pipelines: solve, tabulate, write.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use cuspwave::analysis::{
    cancellation_metrics, convergence_study, cubic_tail_constant, fourier_tail_residuals,
    interference_prediction, phase_anchor, slope_fit, tail_corrected_point_values,
    ConvergenceStudy, CorrectionConstants,
};
use cuspwave::{
    basis_cardinality, build_basis, phase_normalize, solve_lowest_from, EigenSolution,
    FourierField, HamiltonianOperator, HamiltonianSpec, Shape,
};

use crate::config::{Experiment, ExperimentConfig};
use crate::emit::{
    emit_table, table_paths, CancellationEntry, ConstantsUsed, EfficiencyEntry, FailureNote,
    Metadata, TableFormat, TableRow, TailEntry,
};
use crate::error::{CliError, CliResult};

/// Default ceiling on the number of plane waves in any single solve.
pub const MAX_BASIS: usize = 5_000_000;

#[derive(Debug, Clone)]
pub struct RunOptions {
    pub out_dir: PathBuf,
    pub formats: Vec<TableFormat>,
    pub force: bool,
    pub max_basis: usize,
}

impl RunOptions {
    pub fn new(out_dir: impl Into<PathBuf>) -> Self {
        Self {
            out_dir: out_dir.into(),
            formats: vec![TableFormat::Csv, TableFormat::Json],
            force: false,
            max_basis: MAX_BASIS,
        }
    }
}

/// What a run wrote, and the headline numbers.
#[derive(Debug, Clone, Default)]
pub struct RunSummary {
    pub files: Vec<PathBuf>,
    pub slopes: BTreeMap<String, f64>,
}

/// Refuses runs whose largest basis is over the limit unless forced.
pub fn check_resources(config: &ExperimentConfig, options: &RunOptions) -> CliResult<()> {
    let cutoff = config.largest_cutoff();
    let size = basis_cardinality(cutoff, config.discretization.shape);
    if size > options.max_basis && !options.force {
        return Err(CliError::Resource {
            cutoff,
            size,
            limit: options.max_basis,
        });
    }
    Ok(())
}

fn constants_used(config: &ExperimentConfig) -> ConstantsUsed {
    let cell = config.cell();
    let shape = config.discretization.shape;
    ConstantsUsed {
        a: cubic_tail_constant(),
        spherical_prefactor: CorrectionConstants::new(Shape::Spherical, cell).prefactor,
        cubic_prefactor: CorrectionConstants::new(Shape::Cubic, cell).prefactor,
        shape,
        prefactor_used: CorrectionConstants::new(shape, cell).prefactor,
    }
}

fn failure_notes(studies: &[&ConvergenceStudy]) -> Vec<FailureNote> {
    studies
        .iter()
        .flat_map(|s| s.failures.iter())
        .map(|(m, e)| FailureNote {
            m: *m,
            error: e.to_string(),
        })
        .collect()
}

struct Writer<'a> {
    config: &'a ExperimentConfig,
    options: &'a RunOptions,
    summary: RunSummary,
}

impl Writer<'_> {
    fn write<T: TableRow>(
        &mut self,
        name: &str,
        rows: &[T],
        slopes: BTreeMap<String, f64>,
        studies: &[&ConvergenceStudy],
        failures: Vec<FailureNote>,
    ) -> CliResult<()> {
        let metadata = Metadata {
            tool: "cuspwave".into(),
            version: env!("CARGO_PKG_VERSION").into(),
            timestamp: chrono::Utc::now().to_rfc3339(),
            experiment: self.config.experiment.name().into(),
            table: name.into(),
            config: self.config.clone(),
            constants: constants_used(self.config),
            slopes: slopes.clone(),
            reference: studies.iter().map(|s| s.reference.clone()).collect(),
            partial: !failures.is_empty(),
            failures,
        };
        for (format, path) in table_paths(&self.options.out_dir, name, &self.options.formats) {
            emit_table(rows, format, &path, &metadata)?;
            log::info!("wrote {}", path.display());
            self.summary.files.push(path);
        }
        for (k, v) in slopes {
            self.summary.slopes.insert(format!("{name}.{k}"), v);
        }
        Ok(())
    }
}

fn slope_of(rows: impl Iterator<Item = (u32, f64)>, min_cutoff: u32) -> Option<f64> {
    let pairs: Vec<(u32, f64)> = rows.filter(|(m, _)| *m >= min_cutoff).collect();
    slope_fit(&pairs).ok()
}

fn insert(slopes: &mut BTreeMap<String, f64>, key: &str, v: Option<f64>) {
    if let Some(v) = v {
        slopes.insert(key.into(), v);
    }
}

fn study_slopes(study: &ConvergenceStudy) -> BTreeMap<String, f64> {
    let mut s = BTreeMap::new();
    insert(&mut s, "raw_error", study.raw_slope);
    insert(&mut s, "corrected_error", study.corrected_slope);
    s
}

/// Runs the configured experiment and writes its tables into
/// `options.out_dir`.
///
/// Nothing is written when the resource guard trips. Failed solves leave
/// their rows out; the rest is written with `partial` set and the run ends
/// with [`CliError::Convergence`].
pub fn run_experiment(config: &ExperimentConfig, options: &RunOptions) -> CliResult<RunSummary> {
    check_resources(config, options)?;
    std::fs::create_dir_all(&options.out_dir).map_err(|source| CliError::Io {
        path: options.out_dir.clone(),
        source,
    })?;
    let mut w = Writer {
        config,
        options,
        summary: RunSummary::default(),
    };
    let min_fit = config.discretization.min_fit_cutoff;
    let failed = match &config.experiment {
        Experiment::Convergence => {
            let study = convergence_study(&config.spec(), &config.study_options())?;
            let notes = failure_notes(&[&study]);
            let n = notes.len();
            w.write(
                "convergence",
                &study.records,
                study_slopes(&study),
                &[&study],
                notes,
            )?;
            n
        }
        Experiment::CorrectionEfficiency => {
            let study = convergence_study(&config.spec(), &config.study_options())?;
            let rows: Vec<EfficiencyEntry> = study
                .records
                .iter()
                .map(|r| EfficiencyEntry {
                    m: r.m,
                    raw_error: r.raw_error,
                    predicted_error: r.predicted_error,
                    corrected_error: r.corrected_error,
                    gain: r.raw_error / r.corrected_error.abs(),
                })
                .collect();
            let notes = failure_notes(&[&study]);
            let n = notes.len();
            w.write(
                "correction_efficiency",
                &rows,
                study_slopes(&study),
                &[&study],
                notes,
            )?;
            n
        }
        Experiment::Cancellation { .. } => {
            let second_spec = config.second_spec().expect("cancellation config");
            let study_options = config.study_options();
            let first = convergence_study(&config.spec(), &study_options)?;
            let second = convergence_study(&second_spec, &study_options)?;
            let notes = failure_notes(&[&first, &second]);
            let n = notes.len();
            // rows only where both geometries converged
            let keep = |s: &ConvergenceStudy, other: &ConvergenceStudy| {
                s.records
                    .iter()
                    .filter(|r| other.records.iter().any(|o| o.m == r.m))
                    .cloned()
                    .collect::<Vec<_>>()
            };
            let (a, b) = (keep(&first, &second), keep(&second, &first));
            let metrics = cancellation_metrics(&a, &b)?;
            let mut rows = Vec::with_capacity(metrics.len());
            for ((row, ra), rb) in metrics.iter().zip(&a).zip(&b) {
                let pa = interference_prediction(
                    &first.constants,
                    ra.m,
                    &config.spec().charges,
                    &ra.psi_at_nuclei,
                )?;
                let pb = interference_prediction(
                    &second.constants,
                    rb.m,
                    &second_spec.charges,
                    &rb.psi_at_nuclei,
                )?;
                rows.push(CancellationEntry {
                    m: row.m,
                    d: row.d,
                    s: row.s,
                    d_pred: (pa - pb).abs(),
                });
            }
            let mut slopes = BTreeMap::new();
            insert(
                &mut slopes,
                "D_M",
                slope_of(rows.iter().map(|r| (r.m, r.d)), min_fit),
            );
            insert(
                &mut slopes,
                "S_M",
                slope_of(rows.iter().map(|r| (r.m, r.s)), min_fit),
            );
            insert(
                &mut slopes,
                "D_pred",
                slope_of(rows.iter().map(|r| (r.m, r.d_pred)), min_fit),
            );
            if !rows.is_empty() {
                w.write(
                    "cancellation",
                    &rows,
                    slopes,
                    &[&first, &second],
                    notes.clone(),
                )?;
            }
            w.write(
                "convergence_1",
                &first.records,
                study_slopes(&first),
                &[&first],
                notes.clone(),
            )?;
            w.write(
                "convergence_2",
                &second.records,
                study_slopes(&second),
                &[&second],
                notes,
            )?;
            n
        }
        Experiment::TailLaw { shells } => {
            let (rows, notes) = tail_law(config, shells)?;
            let n = notes.len();
            let mut slopes = BTreeMap::new();
            for s in shells {
                let series = rows
                    .iter()
                    .filter(|r| r.shell_lo == s[0] && r.shell_hi == s[1]);
                insert(
                    &mut slopes,
                    &format!("residual[{}, {})", s[0], s[1]),
                    slope_of(series.map(|r| (r.m, r.residual)), 1),
                );
            }
            if rows.is_empty() {
                if n > 0 {
                    return Err(CliError::Convergence {
                        failed: n,
                        out: options.out_dir.clone(),
                    });
                }
                return Err(CliError::Output("no shell fits inside any cutoff".into()));
            }
            w.write("tail_law", &rows, slopes, &[], notes)?;
            n
        }
    };
    if failed > 0 {
        return Err(CliError::Convergence {
            failed,
            out: options.out_dir.clone(),
        });
    }
    Ok(w.summary)
}

fn solve_ground(
    spec: &HamiltonianSpec,
    cutoff: u32,
    config: &ExperimentConfig,
    guess: Option<&FourierField>,
) -> cuspwave::Result<EigenSolution> {
    let basis = build_basis(spec.cell(), cutoff as i64, config.discretization.shape)?;
    let op = HamiltonianOperator::new(basis, spec)?;
    let guesses: Vec<FourierField> = guess.into_iter().cloned().collect();
    let sol = solve_lowest_from(&op, &config.solver, &guesses)?;
    phase_normalize(&sol, phase_anchor(spec))
}

fn tail_law(
    config: &ExperimentConfig,
    shells: &[[f64; 2]],
) -> CliResult<(Vec<TailEntry>, Vec<FailureNote>)> {
    let spec = config.spec();
    let cfg = &spec.charges;
    let mut rows = Vec::new();
    let mut notes = Vec::new();
    let mut previous: Option<EigenSolution> = None;
    for &m in &config.discretization.cutoffs {
        let sol = match solve_ground(
            &spec,
            m,
            config,
            previous.as_ref().map(|s| s.ground_state()),
        ) {
            Ok(s) => s,
            Err(e @ cuspwave::Error::NotConverged { .. }) => {
                notes.push(FailureNote {
                    m,
                    error: e.to_string(),
                });
                continue;
            }
            Err(e) => return Err(e.into()),
        };
        let psi = sol.ground_state();
        let inside: Vec<(f64, f64)> = shells
            .iter()
            .filter(|s| s[1] <= m as f64)
            .map(|s| (s[0], s[1]))
            .collect();
        if !inside.is_empty() {
            let residuals = fourier_tail_residuals(psi, cfg, &inside)?;
            let truncated: Vec<f64> = psi
                .evaluate_at_points(&cfg.positions())
                .iter()
                .map(|v| v.re)
                .collect();
            let corrected: Vec<f64> = tail_corrected_point_values(psi, cfg)?
                .iter()
                .map(|v| v.re)
                .collect();
            for (&(lo, hi), r) in inside.iter().zip(residuals) {
                rows.push(TailEntry {
                    m,
                    shell_lo: lo,
                    shell_hi: hi,
                    residual: r,
                    psi_truncated: truncated.clone(),
                    psi_corrected: corrected.clone(),
                });
            }
        }
        previous = Some(sol);
    }
    Ok((rows, notes))
}

/// Output directory from the flag, or `results/<experiment>`.
pub fn default_out_dir(config: &ExperimentConfig) -> PathBuf {
    Path::new("results").join(config.experiment.name())
}
