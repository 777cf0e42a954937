//! TOML experiment configuration.
//!
//! ```toml
//! [cell]
//! edge = 2.0
//!
//! [[charges]]
//! z = 2.0
//! position = [0.35, 0.0, 0.0]
//!
//! [discretization]
//! cutoffs = [8, 12, 16]
//! shape = "cubic"
//!
//! [reference]
//! policy = "high_cutoff"
//! m_ref = 24
//!
//! [experiment]
//! kind = "convergence"
//! ```

use std::path::Path;

use cuspwave::analysis::{ReferencePolicy, StudyOptions};
use cuspwave::{
    Cell, Charge, ChargeConfig, HamiltonianSpec, Shape, SmoothPotential, SolverOptions,
};
use serde::{Deserialize, Serialize};

use crate::error::{CliError, CliResult};
use crate::presets;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CellSection {
    pub edge: f64,
}

/// One term `a cos(K·x)` of the smooth potential.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CosineTerm {
    pub k: [i32; 3],
    pub amplitude: f64,
}

fn default_shape() -> Shape {
    Shape::Cubic
}

fn default_min_fit_cutoff() -> u32 {
    6
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Discretization {
    pub cutoffs: Vec<u32>,
    #[serde(default = "default_shape")]
    pub shape: Shape,
    /// Slopes are fitted over cutoffs at or above this value.
    #[serde(default = "default_min_fit_cutoff")]
    pub min_fit_cutoff: u32,
    /// Independent cold-start solves on the thread pool instead of a
    /// warm-started chain.
    #[serde(default)]
    pub parallel: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum Experiment {
    Convergence,
    /// Second geometry compared against `[[charges]]`.
    Cancellation {
        second_charges: Vec<Charge>,
    },
    CorrectionEfficiency,
    /// Shell-RMS residuals of the Fourier-tail law; `shells` are `[lo, hi)`
    /// radii in lattice units.
    TailLaw {
        shells: Vec<[f64; 2]>,
    },
}

impl Experiment {
    pub fn name(&self) -> &'static str {
        match self {
            Experiment::Convergence => "convergence",
            Experiment::Cancellation { .. } => "cancellation",
            Experiment::CorrectionEfficiency => "correction_efficiency",
            Experiment::TailLaw { .. } => "tail_law",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub cell: CellSection,
    #[serde(default)]
    pub charges: Vec<Charge>,
    #[serde(default)]
    pub smooth_potential: Vec<CosineTerm>,
    pub discretization: Discretization,
    #[serde(default)]
    pub solver: SolverOptions,
    #[serde(default)]
    pub reference: ReferencePolicy,
    pub experiment: Experiment,
}

impl ExperimentConfig {
    /// Parses and validates; `source_name` labels diagnostics.
    pub fn from_toml_str(text: &str, source_name: &str) -> CliResult<Self> {
        let cfg: ExperimentConfig =
            toml::from_str(text).map_err(|e| CliError::config(source_name, e.to_string()))?;
        cfg.validate().map_err(|(field, msg)| {
            CliError::config(source_name, format!("field `{field}`: {msg}"))
        })?;
        Ok(cfg)
    }

    /// Reads a config file, or a bundled preset when `arg` names one and no
    /// such file exists.
    pub fn load(arg: &str) -> CliResult<Self> {
        let path = Path::new(arg);
        if !path.exists() {
            if let Some(text) = presets::get(arg) {
                return Self::from_toml_str(text, &format!("preset {arg}"));
            }
        }
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::config(arg, format!("cannot read: {e}")))?;
        Self::from_toml_str(&text, arg)
    }

    fn validate(&self) -> Result<(), (&'static str, String)> {
        let cell = Cell::new(self.cell.edge).map_err(|e| ("cell.edge", e.to_string()))?;
        ChargeConfig::new(cell, self.charges.iter().copied())
            .map_err(|e| ("charges", e.to_string()))?;
        self.smooth(cell)
            .map_err(|e| ("smooth_potential", e.to_string()))?;
        let cutoffs = &self.discretization.cutoffs;
        if cutoffs.is_empty() {
            return Err(("discretization.cutoffs", "empty cutoff list".into()));
        }
        if cutoffs[0] < 1 {
            return Err((
                "discretization.cutoffs",
                "every cutoff must be at least 1".into(),
            ));
        }
        if cutoffs.windows(2).any(|w| w[0] >= w[1]) {
            return Err((
                "discretization.cutoffs",
                "must be strictly ascending".into(),
            ));
        }
        self.solver
            .validate(usize::MAX)
            .map_err(|e| ("solver", e.to_string()))?;
        if let ReferencePolicy::HighCutoff { m_ref: Some(m) } = self.reference {
            if m <= *cutoffs.last().unwrap() {
                return Err((
                    "reference.m_ref",
                    format!("{m} must exceed the largest cutoff"),
                ));
            }
        }
        if let ReferencePolicy::Richardson = self.reference {
            if cutoffs.len() < 3 {
                return Err((
                    "reference.policy",
                    "richardson needs at least 3 cutoffs".into(),
                ));
            }
        }
        match &self.experiment {
            Experiment::Cancellation { second_charges } => {
                ChargeConfig::new(cell, second_charges.iter().copied())
                    .map_err(|e| ("experiment.second_charges", e.to_string()))?;
            }
            Experiment::TailLaw { shells } => {
                if shells.is_empty() {
                    return Err(("experiment.shells", "no shells given".into()));
                }
                if let Some(s) = shells.iter().find(|s| !(s[0] >= 0.0 && s[0] < s[1])) {
                    return Err((
                        "experiment.shells",
                        format!("shell {s:?} needs 0 ≤ lo < hi"),
                    ));
                }
            }
            _ => {}
        }
        Ok(())
    }

    pub fn cell(&self) -> Cell {
        Cell::new(self.cell.edge).expect("validated")
    }

    fn smooth(&self, cell: Cell) -> cuspwave::Result<SmoothPotential> {
        if self.smooth_potential.is_empty() {
            return Ok(SmoothPotential::zero());
        }
        let terms: Vec<([i32; 3], f64)> = self
            .smooth_potential
            .iter()
            .map(|t| (t.k, t.amplitude))
            .collect();
        SmoothPotential::from_cosines(cell, &terms)
    }

    fn spec_with(&self, charges: &[Charge]) -> HamiltonianSpec {
        let cell = self.cell();
        HamiltonianSpec::new(
            ChargeConfig::new(cell, charges.iter().copied()).expect("validated"),
            self.smooth(cell).expect("validated"),
        )
    }

    pub fn spec(&self) -> HamiltonianSpec {
        self.spec_with(&self.charges)
    }

    /// Second geometry of a cancellation experiment.
    pub fn second_spec(&self) -> Option<HamiltonianSpec> {
        match &self.experiment {
            Experiment::Cancellation { second_charges } => Some(self.spec_with(second_charges)),
            _ => None,
        }
    }

    pub fn study_options(&self) -> StudyOptions {
        let mut o = StudyOptions::new(
            self.discretization.cutoffs.clone(),
            self.discretization.shape,
        );
        o.solver = self.solver.clone();
        o.reference = self.reference;
        o.min_cutoff = self.discretization.min_fit_cutoff;
        o.parallel = self.discretization.parallel;
        o
    }

    /// Every cutoff the run will solve at, reference included.
    pub fn largest_cutoff(&self) -> u32 {
        let top = *self.discretization.cutoffs.last().unwrap_or(&1);
        match self.experiment {
            Experiment::TailLaw { .. } => top,
            _ => self
                .study_options()
                .reference_cutoff()
                .unwrap_or(top)
                .max(top),
        }
    }
}
