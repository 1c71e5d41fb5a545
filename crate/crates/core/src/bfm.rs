//! Multi-group beta factor solver.
//!
//! Each component's total failure probability splits into an independent
//! part and one dependent contribution per group it belongs to:
//!
//! ```text
//! Q_t = Q_I + sum_w beta_w * Q_t        Q_I = (1 - beta_t) * Q_t
//! ```
//!
//! where `beta_w` is the group beta of CCCG `w` and `beta_t` their sum.
//! With a single group this reduces to the classic beta factor split
//! `Q_D = beta * Q_t`, `Q_I = (1 - beta) * Q_t`. There are no
//! sub-combination events: a group fails all of its members together, so a
//! pairwise failure exists only when a pair group is modeled, and nothing
//! is double counted.
//!
//! Betas are aggregated in exact rational arithmetic (grade-sheet betas
//! are integer ratios; override floats convert to rationals exactly) and
//! rounded to `f64` once at the end, so the independent residual
//! `1 - beta_t` stays meaningful even when `beta_t` is within a fraction
//! of a percent of one, as is typical for low-diversity software.

use num_rational::BigRational;
use num_traits::{FromPrimitive, One, ToPrimitive};

use crate::model::{
    Cccg, Component, Domain, FailureData, InputMode, NormalizationPolicy, SystemModel,
};
use crate::scoring::{self, MissingCell};

/// Relative tolerance used for conservation checks (`Q_I + sum Q_D = Q_t`).
pub const CONSERVATION_TOL: f64 = 1e-12;

/// `beta_t` above this leaves `Q_I` a tiny residual; reports carry a
/// sensitivity note for such rows.
pub const SENSITIVE_BETA_TOTAL: f64 = 0.99;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum BfmError {
    #[error("CCCG {cccg} has neither a grade sheet nor a beta override in any domain with member data")]
    MissingBetaSource { cccg: String },
    #[error(transparent)]
    MissingCell(#[from] MissingCell),
    #[error("no weight supplied for CCCG {cccg} under user-weight normalization")]
    MissingWeight { cccg: String },
    #[error("weight {weight} for CCCG {cccg} is not a finite non-negative number")]
    BadWeight { cccg: String, weight: f64 },
    #[error("group betas for {component} ({domain}) sum to {beta_total} > 1 after {policy} normalization")]
    NormalizedSumExceedsUnity { component: String, domain: Domain, beta_total: f64, policy: &'static str },
    #[error("component {component} ({domain}): beta_t = {beta_total} leaves no independent share, cannot recover Q_t from Q_I")]
    DegenerateTotal { component: String, domain: Domain, beta_total: f64 },
    #[error("component {component} carries no {domain} failure data")]
    NoFailureData { component: String, domain: Domain },
    #[error("{0}")]
    Validation(String),
}

/// Which rescaling was actually applied while resolving one component's
/// betas.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum NormalizationApplied {
    None,
    ProportionalToUnity,
    UserWeights,
}

/// One group's share of a component's failure, after any normalization.
#[derive(Debug, Clone, PartialEq)]
pub struct GroupBeta {
    pub cccg_id: String,
    pub beta: f64,
    exact: BigRational,
}

/// All group betas applying to one component in one domain.
#[derive(Debug, Clone, PartialEq)]
pub struct BetaAssignment {
    pub component_id: String,
    pub domain: Domain,
    pub entries: Vec<GroupBeta>,
    pub beta_total: f64,
    pub normalization: NormalizationApplied,
    /// `1 - beta_t`, computed in exact rational arithmetic.
    independent_fraction: f64,
}

impl BetaAssignment {
    pub fn independent_fraction(&self) -> f64 {
        self.independent_fraction
    }

    /// Whether the independent residual is a small difference of
    /// near-equal quantities (`beta_t > 0.99`).
    pub fn is_sensitive(&self) -> bool {
        self.beta_total > SENSITIVE_BETA_TOTAL
    }
}

/// A solved component: total, independent, and per-group dependent failure
/// probabilities.
#[derive(Debug, Clone, PartialEq)]
pub struct FailureBreakdown {
    pub component_id: String,
    pub domain: Domain,
    pub q_total: f64,
    pub q_independent: f64,
    /// `(cccg id, beta_w * Q_t)` in the order of the beta assignment.
    pub contributions: Vec<(String, f64)>,
    pub input_mode: InputMode,
    pub beta_total: f64,
    pub normalization: NormalizationApplied,
}

impl FailureBreakdown {
    pub fn contribution(&self, cccg_id: &str) -> Option<f64> {
        self.contributions
            .iter()
            .find(|(id, _)| id == cccg_id)
            .map(|(_, p)| *p)
    }

    pub fn dependent_total(&self) -> f64 {
        self.contributions.iter().map(|(_, p)| p).sum()
    }

    pub fn is_sensitive(&self) -> bool {
        self.beta_total > SENSITIVE_BETA_TOTAL
    }
}

/// The exact beta for one group in one domain: override beats grades when
/// both are present (validation warns about the shadowing).
fn group_beta(cccg: &Cccg, domain: Domain) -> Result<Option<BigRational>, BfmError> {
    if let Some(value) = cccg.beta_override(domain) {
        return Ok(Some(
            BigRational::from_f64(value).expect("validated beta override is finite"),
        ));
    }
    if let Some(sheet) = cccg.grades(domain) {
        let score = scoring::beta_pbf2(sheet)?;
        return Ok(Some(BigRational::new(score.sum.into(), score.denominator.into())));
    }
    Ok(None)
}

/// Collect the group betas applying to `component` in `domain`, rescaling
/// per the model's normalization policy if they sum past unity.
///
/// A group that has no beta source in this domain but does in the other is
/// simply skipped: it does not participate in this domain. A group with no
/// beta source anywhere is a modeling error.
pub fn resolve_betas(
    model: &SystemModel,
    component: &Component,
    domain: Domain,
) -> Result<BetaAssignment, BfmError> {
    let mut entries: Vec<(String, BigRational)> = Vec::new();
    for cccg in model.cccgs_of(&component.id) {
        match group_beta(cccg, domain)? {
            Some(beta) => entries.push((cccg.id.clone(), beta)),
            None => {
                let other = match domain {
                    Domain::Hardware => Domain::Software,
                    Domain::Software => Domain::Hardware,
                };
                if !cccg.has_beta_source(other) {
                    return Err(BfmError::MissingBetaSource { cccg: cccg.id.clone() });
                }
            }
        }
    }

    let total: BigRational = entries.iter().map(|(_, b)| b).sum();
    let mut normalization = NormalizationApplied::None;
    let (entries, total) = if total > BigRational::one() {
        match &model.options.normalization {
            NormalizationPolicy::ProportionalToUnity => {
                normalization = NormalizationApplied::ProportionalToUnity;
                let scaled: Vec<(String, BigRational)> = entries
                    .into_iter()
                    .map(|(id, b)| (id, b / &total))
                    .collect();
                (scaled, BigRational::one())
            }
            NormalizationPolicy::UserWeights(weights) => {
                normalization = NormalizationApplied::UserWeights;
                let mut weighted = Vec::with_capacity(entries.len());
                for (id, b) in entries {
                    let w = *weights
                        .get(&id)
                        .ok_or_else(|| BfmError::MissingWeight { cccg: id.clone() })?;
                    if !w.is_finite() || w < 0.0 {
                        return Err(BfmError::BadWeight { cccg: id, weight: w });
                    }
                    let w = BigRational::from_f64(w).expect("finite weight");
                    weighted.push((id, b * w));
                }
                let new_total: BigRational = weighted.iter().map(|(_, b)| b).sum();
                if new_total > BigRational::one() {
                    return Err(BfmError::NormalizedSumExceedsUnity {
                        component: component.id.clone(),
                        domain,
                        beta_total: new_total.to_f64().unwrap_or(f64::NAN),
                        policy: "user-weight",
                    });
                }
                (weighted, new_total)
            }
        }
    } else {
        (entries, total)
    };

    let independent_fraction = (BigRational::one() - &total).to_f64().unwrap_or(0.0);
    Ok(BetaAssignment {
        component_id: component.id.clone(),
        domain,
        entries: entries
            .into_iter()
            .map(|(cccg_id, exact)| GroupBeta {
                cccg_id,
                beta: exact.to_f64().unwrap_or(f64::NAN),
                exact,
            })
            .collect(),
        beta_total: total.to_f64().unwrap_or(f64::NAN),
        normalization,
        independent_fraction,
    })
}

/// Split one failure probability by the resolved betas.
///
/// `TotalGiven` reads `q` as `Q_t`; `IndependentGiven` reads it as `Q_I`
/// and recovers `Q_t = Q_I / (1 - beta_t)`, which degenerates as `beta_t`
/// approaches one.
pub fn solve_component(
    betas: &BetaAssignment,
    failure: &FailureData,
) -> Result<FailureBreakdown, BfmError> {
    let independent_fraction = betas.independent_fraction;
    let q_total = match failure.mode {
        InputMode::TotalGiven => failure.q,
        InputMode::IndependentGiven => {
            if independent_fraction <= 1e-9 {
                return Err(BfmError::DegenerateTotal {
                    component: betas.component_id.clone(),
                    domain: betas.domain,
                    beta_total: betas.beta_total,
                });
            }
            failure.q / independent_fraction
        }
    };
    let q_independent = match failure.mode {
        InputMode::TotalGiven => independent_fraction * q_total,
        InputMode::IndependentGiven => failure.q,
    };
    let contributions = betas
        .entries
        .iter()
        .map(|e| (e.cccg_id.clone(), e.beta * q_total))
        .collect();
    Ok(FailureBreakdown {
        component_id: betas.component_id.clone(),
        domain: betas.domain,
        q_total,
        q_independent,
        contributions,
        input_mode: failure.mode,
        beta_total: betas.beta_total,
        normalization: betas.normalization,
    })
}

/// Resolve and solve one component in one domain.
pub fn solve_one(
    model: &SystemModel,
    component: &Component,
    domain: Domain,
) -> Result<FailureBreakdown, BfmError> {
    let failure = component
        .failure_data(domain)
        .ok_or_else(|| BfmError::NoFailureData { component: component.id.clone(), domain })?;
    let betas = resolve_betas(model, component, domain)?;
    solve_component(&betas, failure)
}

/// Solve every component in every domain it carries data for.
///
/// The model must validate cleanly first. Output is sorted by
/// `(component id, domain)` regardless of evaluation order, so the
/// parallel and sequential paths produce identical results.
pub fn solve_all(model: &SystemModel) -> Result<Vec<FailureBreakdown>, BfmError> {
    let diagnostics = crate::model::validate_model(model);
    if crate::model::has_errors(&diagnostics) {
        let first = diagnostics
            .iter()
            .find(|d| d.severity == crate::model::Severity::Error)
            .expect("has_errors");
        return Err(BfmError::Validation(format!(
            "model fails validation ({} finding(s)); first: {first}",
            diagnostics.len()
        )));
    }

    let jobs: Vec<(&Component, Domain)> = model
        .components
        .iter()
        .flat_map(|c| {
            Domain::BOTH
                .into_iter()
                .filter(|d| c.failure_data(*d).is_some())
                .map(move |d| (c, d))
        })
        .collect();

    let mut breakdowns = run_jobs(model, &jobs)?;
    breakdowns.sort_by(|a, b| {
        a.component_id
            .cmp(&b.component_id)
            .then(a.domain.cmp(&b.domain))
    });
    Ok(breakdowns)
}

#[cfg(feature = "parallel")]
fn run_jobs(
    model: &SystemModel,
    jobs: &[(&Component, Domain)],
) -> Result<Vec<FailureBreakdown>, BfmError> {
    use rayon::prelude::*;
    jobs.par_iter()
        .map(|(c, d)| solve_one(model, c, *d))
        .collect()
}

#[cfg(not(feature = "parallel"))]
fn run_jobs(
    model: &SystemModel,
    jobs: &[(&Component, Domain)],
) -> Result<Vec<FailureBreakdown>, BfmError> {
    jobs.iter().map(|(c, d)| solve_one(model, c, *d)).collect()
}
