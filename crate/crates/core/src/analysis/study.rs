//! Convergence-study driver: solves a Hamiltonian over a list of cutoffs,
//! fixes a reference eigenvalue and tabulates errors against the
//! first-order prediction.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::analysis::constants::CorrectionConstants;
use crate::analysis::correction::{first_order_correction, psi_at_nuclei};
use crate::analysis::fits::{richardson_reference, slope_fit};
use crate::analysis::fourier_tail::fourier_tail_residuals;
use crate::analysis::identity::error_identity_check;
use crate::eigensolver::{phase_normalize, solve_lowest_from, EigenSolution, SolverOptions};
use crate::error::{Error, Result};
use crate::lattice::{build_basis, FourierField, Shape};
use crate::operator::{HamiltonianOperator, HamiltonianSpec};

/// Smallest reference cutoff used when none is configured.
pub const MIN_REFERENCE_CUTOFF: u32 = 48;

/// `max(⌈3·M_max/2⌉, 48)`.
pub fn default_reference_cutoff(max_cutoff: u32) -> u32 {
    (3 * max_cutoff).div_ceil(2).max(MIN_REFERENCE_CUTOFF)
}

/// How the reference eigenvalue `E_ref` is obtained.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "policy", rename_all = "snake_case")]
pub enum ReferencePolicy {
    /// One solve at `m_ref`, minus its own first-order correction.
    HighCutoff { m_ref: Option<u32> },
    /// Extrapolation of the corrected energies of the study itself.
    Richardson,
}

impl Default for ReferencePolicy {
    fn default() -> Self {
        Self::HighCutoff { m_ref: None }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StudyOptions {
    pub cutoffs: Vec<u32>,
    pub shape: Shape,
    pub solver: SolverOptions,
    pub reference: ReferencePolicy,
    /// Fits ignore cutoffs below this value.
    pub min_cutoff: u32,
    /// Solve the cutoffs independently on the rayon pool instead of as a
    /// warm-started chain.
    pub parallel: bool,
}

impl StudyOptions {
    pub fn new(cutoffs: Vec<u32>, shape: Shape) -> Self {
        Self {
            cutoffs,
            shape,
            solver: SolverOptions::lowest(1),
            reference: ReferencePolicy::default(),
            min_cutoff: 6,
            parallel: false,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.cutoffs.is_empty() {
            return Err(Error::InvalidOptions("empty cutoff list".into()));
        }
        if self.cutoffs.windows(2).any(|w| w[0] >= w[1]) {
            return Err(Error::InvalidOptions(
                "cutoffs must be strictly ascending".into(),
            ));
        }
        if self.cutoffs[0] < 1 {
            return Err(Error::InvalidCutoff(0));
        }
        if let Some(m_ref) = self.reference_cutoff() {
            if m_ref <= *self.cutoffs.last().unwrap() {
                return Err(Error::InvalidOptions(format!(
                    "reference cutoff {m_ref} must exceed every study cutoff"
                )));
            }
        }
        Ok(())
    }

    pub fn reference_cutoff(&self) -> Option<u32> {
        match self.reference {
            ReferencePolicy::HighCutoff { m_ref } => {
                Some(m_ref.unwrap_or_else(|| {
                    default_reference_cutoff(*self.cutoffs.last().unwrap_or(&1))
                }))
            }
            ReferencePolicy::Richardson => None,
        }
    }
}

/// One row of a convergence table.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConvergenceRecord {
    #[serde(rename = "M")]
    pub m: u32,
    #[serde(rename = "E_M")]
    pub e_m: f64,
    #[serde(rename = "E_ref")]
    pub e_ref: f64,
    pub raw_error: f64,
    /// First-order prediction of `raw_error`.
    pub predicted_error: f64,
    /// `raw_error - predicted_error`.
    pub corrected_error: f64,
    pub psi_at_nuclei: Vec<f64>,
    /// `-⟨ψ^M, V Π_M^⊥ ψ_ref⟩`; only with a high-cutoff reference.
    pub residual_coupling: Option<f64>,
    /// Fourier-tail residual of `ψ^M` on the shell `[M/4, M/2)`.
    pub tail_fit: Option<f64>,
}

/// How `E_ref` was fixed, with the cross-checks.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReferenceSummary {
    pub policy: ReferencePolicy,
    pub m_ref: Option<u32>,
    /// Raw eigenvalue of the high-cutoff solve.
    pub e_high: Option<f64>,
    /// First-order correction at the reference cutoff.
    pub correction_at_ref: Option<f64>,
    /// Rate-3 fit of the raw energies: `(E, c)`.
    pub richardson_raw: Option<(f64, f64)>,
    /// Rate-4 fit of the corrected energies: `(E, c)`.
    pub richardson_corrected: Option<(f64, f64)>,
    pub e_ref: f64,
    /// `|E_ref - E_richardson_corrected|` when both are available.
    pub cross_check_gap: Option<f64>,
}

#[derive(Debug, Clone)]
pub struct ConvergenceStudy {
    pub records: Vec<ConvergenceRecord>,
    pub reference: ReferenceSummary,
    pub constants: CorrectionConstants,
    /// Slope of `log raw_error` vs `log M` over cutoffs ≥ `min_cutoff`.
    pub raw_slope: Option<f64>,
    /// Same for `|corrected_error|`.
    pub corrected_slope: Option<f64>,
    /// Phase-normalized solutions in record order.
    pub solutions: Vec<EigenSolution>,
    pub reference_solution: Option<EigenSolution>,
    /// Cutoffs whose solve failed, with the error.
    pub failures: Vec<(u32, Error)>,
}

impl ConvergenceStudy {
    pub fn converged(&self) -> bool {
        self.failures.is_empty()
    }
}

/// Point at which eigenvectors are made real and positive: the nucleus with
/// the largest charge, or the origin without nuclei.
pub fn phase_anchor(spec: &HamiltonianSpec) -> [f64; 3] {
    spec.charges
        .charges()
        .iter()
        .fold(None::<(f64, [f64; 3])>, |best, c| match best {
            Some((z, _)) if z >= c.z => best,
            _ => Some((c.z, c.position)),
        })
        .map_or([0.0; 3], |(_, p)| p)
}

fn solve_at(
    spec: &HamiltonianSpec,
    cutoff: u32,
    shape: Shape,
    solver: &SolverOptions,
    guess: Option<&FourierField>,
) -> Result<(EigenSolution, HamiltonianOperator)> {
    let basis = build_basis(spec.cell(), cutoff as i64, shape)?;
    let op = HamiltonianOperator::new(basis, spec)?;
    let guesses: Vec<FourierField> = guess.into_iter().cloned().collect();
    let sol = solve_lowest_from(&op, solver, &guesses)?;
    let sol = phase_normalize(&sol, phase_anchor(spec))?;
    log::debug!(
        "M = {cutoff}: E = {:.15}, {} iterations",
        sol.eigenvalues[0],
        sol.iterations
    );
    Ok((sol, op))
}

fn tail_fit(sol: &EigenSolution, spec: &HamiltonianSpec) -> Option<f64> {
    let m = sol.cutoff() as f64;
    let shell = ((0.25 * m).max(1.0), (0.5 * m).max(1.5));
    fourier_tail_residuals(sol.ground_state(), &spec.charges, &[shell])
        .ok()
        .map(|r| r[0])
}

/// Runs the study for the ground state of `spec`.
pub fn convergence_study(
    spec: &HamiltonianSpec,
    options: &StudyOptions,
) -> Result<ConvergenceStudy> {
    options.validate()?;
    let constants = CorrectionConstants::new(options.shape, spec.cell());
    let cfg = &spec.charges;

    let mut solutions: Vec<EigenSolution> = Vec::new();
    let mut failures: Vec<(u32, Error)> = Vec::new();
    if options.parallel {
        let results: Vec<(u32, Result<EigenSolution>)> = options
            .cutoffs
            .par_iter()
            .map(|&m| {
                (
                    m,
                    solve_at(spec, m, options.shape, &options.solver, None).map(|s| s.0),
                )
            })
            .collect();
        for (m, r) in results {
            match r {
                Ok(s) => solutions.push(s),
                Err(e) => failures.push((m, e)),
            }
        }
    } else {
        for &m in &options.cutoffs {
            let guess = solutions.last().map(|s: &EigenSolution| s.ground_state());
            match solve_at(spec, m, options.shape, &options.solver, guess) {
                Ok((s, _)) => solutions.push(s),
                Err(e) => failures.push((m, e)),
            }
        }
    }

    let mut corrections = Vec::with_capacity(solutions.len());
    let mut psi_values = Vec::with_capacity(solutions.len());
    for s in &solutions {
        corrections.push(first_order_correction(s, 0, cfg, &constants)?);
        psi_values.push(psi_at_nuclei(s.ground_state(), cfg)?);
    }
    let raw_pairs: Vec<(u32, f64)> = solutions
        .iter()
        .map(|s| (s.cutoff(), s.eigenvalues[0]))
        .collect();
    let corrected_pairs: Vec<(u32, f64)> = raw_pairs
        .iter()
        .zip(&corrections)
        .map(|(&(m, e), c)| (m, e - c))
        .collect();

    // reference
    let mut reference_solution = None;
    let mut residual_coupling = vec![None; solutions.len()];
    let summary = match options.reference_cutoff() {
        Some(m_ref) => {
            let guess = solutions.last().map(|s| s.ground_state());
            let (sol_ref, op_ref) = solve_at(spec, m_ref, options.shape, &options.solver, guess)?;
            let correction = first_order_correction(&sol_ref, 0, cfg, &constants)?;
            let e_high = sol_ref.eigenvalues[0];
            let e_ref = e_high - correction;
            for (slot, s) in residual_coupling.iter_mut().zip(&solutions) {
                *slot = Some(error_identity_check(s, &sol_ref, &op_ref, 0)?.1);
            }
            let mut with_ref = corrected_pairs.clone();
            with_ref.push((m_ref, e_ref));
            let richardson_corrected = richardson_reference(&with_ref, 4.0).ok();
            let richardson_raw = richardson_reference(&raw_pairs, 3.0).ok();
            reference_solution = Some(sol_ref);
            ReferenceSummary {
                policy: options.reference,
                m_ref: Some(m_ref),
                e_high: Some(e_high),
                correction_at_ref: Some(correction),
                richardson_raw,
                richardson_corrected,
                e_ref,
                cross_check_gap: richardson_corrected.map(|(e, _)| (e - e_ref).abs()),
            }
        }
        None => {
            let (e_ref, c) = richardson_reference(&corrected_pairs, 4.0)?;
            ReferenceSummary {
                policy: options.reference,
                m_ref: None,
                e_high: None,
                correction_at_ref: None,
                richardson_raw: richardson_reference(&raw_pairs, 3.0).ok(),
                richardson_corrected: Some((e_ref, c)),
                e_ref,
                cross_check_gap: None,
            }
        }
    };

    let e_ref = summary.e_ref;
    let records: Vec<ConvergenceRecord> = solutions
        .iter()
        .enumerate()
        .map(|(i, s)| {
            let raw = s.eigenvalues[0] - e_ref;
            ConvergenceRecord {
                m: s.cutoff(),
                e_m: s.eigenvalues[0],
                e_ref,
                raw_error: raw,
                predicted_error: corrections[i],
                corrected_error: raw - corrections[i],
                psi_at_nuclei: psi_values[i].clone(),
                residual_coupling: residual_coupling[i],
                tail_fit: tail_fit(s, spec),
            }
        })
        .collect();

    let fit_rows = |f: &dyn Fn(&ConvergenceRecord) -> f64| -> Vec<(u32, f64)> {
        records
            .iter()
            .filter(|r| r.m >= options.min_cutoff)
            .map(|r| (r.m, f(r)))
            .collect()
    };
    let raw_slope = slope_fit(&fit_rows(&|r| r.raw_error)).ok();
    let corrected_slope = slope_fit(&fit_rows(&|r| r.corrected_error.abs())).ok();

    Ok(ConvergenceStudy {
        records,
        reference: summary,
        constants,
        raw_slope,
        corrected_slope,
        solutions,
        reference_solution,
        failures,
    })
}

/// One row of the error-cancellation table.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CancellationRow {
    #[serde(rename = "M")]
    pub m: u32,
    /// Error of the computed energy difference.
    #[serde(rename = "D_M")]
    pub d: f64,
    /// Sum of the individual eigenvalue errors.
    #[serde(rename = "S_M")]
    pub s: f64,
}

/// `D_M` and `S_M` for two studies over the same cutoffs.
pub fn cancellation_metrics(
    runs_config1: &[ConvergenceRecord],
    runs_config2: &[ConvergenceRecord],
) -> Result<Vec<CancellationRow>> {
    if runs_config1.len() != runs_config2.len() {
        return Err(Error::Alignment(format!(
            "{} rows against {}",
            runs_config1.len(),
            runs_config2.len()
        )));
    }
    runs_config1
        .iter()
        .zip(runs_config2)
        .map(|(a, b)| {
            if a.m != b.m {
                return Err(Error::Alignment(format!("M = {} against M = {}", a.m, b.m)));
            }
            let d = ((a.e_m - b.e_m) - (a.e_ref - b.e_ref)).abs();
            let s = (a.e_m - a.e_ref).abs() + (b.e_m - b.e_ref).abs();
            Ok(CancellationRow { m: a.m, d, s })
        })
        .collect()
}
