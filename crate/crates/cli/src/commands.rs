//! Subcommand implementations. Each command returns its stdout payload so
//! the binary and the integration tests share one code path; warnings and
//! diagnostics go to stderr in `main`.

use std::collections::BTreeSet;
use std::fmt::Write as _;
use std::path::Path;

use ccfq_core::bfm::{self, NormalizationApplied};
use ccfq_core::faulttree::{self, TreeError};
use ccfq_core::model::{self, Domain, NormalizationPolicy, SystemModel};
use ccfq_core::report::{self, fmt_sci};
use ccfq_core::simulate::{self, McConfig};

use crate::document::{self, ParseWarning, Strictness};

/// Error carrying the process exit code: 2 parse, 3 validation, 4
/// numeric/solver.
#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("{0}")]
    Parse(String),
    #[error("{0}")]
    Validation(String),
    #[error("{0}")]
    Numeric(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Parse(_) => 2,
            CliError::Validation(_) => 3,
            CliError::Numeric(_) => 4,
        }
    }
}

impl From<TreeError> for CliError {
    fn from(e: TreeError) -> Self {
        match &e {
            TreeError::TooLarge { .. } => CliError::Numeric(format!("{e}; rerun with --mode mc")),
            _ => CliError::Numeric(e.to_string()),
        }
    }
}

impl From<bfm::BfmError> for CliError {
    fn from(e: bfm::BfmError) -> Self {
        match &e {
            bfm::BfmError::Validation(_) => CliError::Validation(e.to_string()),
            _ => CliError::Numeric(e.to_string()),
        }
    }
}

pub struct LoadedModel {
    pub model: SystemModel,
    pub warnings: Vec<ParseWarning>,
}

/// Read and parse a model file (exit 2 on failure), without validating.
pub fn load_model(path: &Path, strictness: Strictness) -> Result<LoadedModel, CliError> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| CliError::Parse(format!("cannot read {}: {e}", path.display())))?;
    let outcome = document::parse_document(&text, strictness)
        .map_err(|e| CliError::Parse(format!("{}: {e}", path.display())))?;
    Ok(LoadedModel { model: outcome.model, warnings: outcome.warnings })
}

/// Validate; error diagnostics exit 3, warnings are returned for stderr.
pub fn validate(model: &SystemModel) -> Result<Vec<String>, CliError> {
    let diagnostics = model::validate_model(model);
    if model::has_errors(&diagnostics) {
        let mut message = String::from("model fails validation:");
        for d in &diagnostics {
            let _ = write!(message, "\n  {d}");
        }
        return Err(CliError::Validation(message));
    }
    Ok(diagnostics.iter().map(|d| d.to_string()).collect())
}

/// `derive`: list the model's groups. Explicit groups print unchanged
/// with a user-specified marker; otherwise groups are derived from the
/// coupling attributes.
pub fn cmd_derive(model: &SystemModel, user_specified: bool) -> Result<String, CliError> {
    let diagnostics = model::validate_components(&model.components);
    if model::has_errors(&diagnostics) {
        let joined: Vec<String> = diagnostics.iter().map(|d| d.to_string()).collect();
        return Err(CliError::Validation(joined.join("\n")));
    }

    let mut out = String::new();
    let marker = if user_specified { " (user-specified)" } else { "" };
    let _ = writeln!(
        out,
        "{} CCCG(s){}{}",
        model.cccgs.len(),
        if user_specified { "" } else { " derived from coupling attributes" },
        marker
    );
    for cccg in &model.cccgs {
        let members: Vec<&str> = cccg.members.iter().map(String::as_str).collect();
        let attrs: Vec<String> =
            cccg.shared_attributes.iter().map(|a| a.to_string()).collect();
        let _ = writeln!(
            out,
            "{}: members={} shared={}{marker}",
            cccg.id,
            members.join(","),
            attrs.join(",")
        );
    }
    Ok(out)
}

/// `beta`: per-group per-domain beta table with grades and exact
/// rationals, plus a note for every component whose betas needed
/// normalization.
pub fn cmd_beta(model: &SystemModel) -> Result<String, CliError> {
    let rows = report::beta_report(model)
        .map_err(|e| CliError::Numeric(e.to_string()))?;
    let mut out = report::beta_table_text(&rows);

    let mut normalized: Vec<String> = Vec::new();
    for component in &model.components {
        for domain in Domain::BOTH {
            if component.failure_data(domain).is_none() {
                continue;
            }
            if let Ok(assignment) = bfm::resolve_betas(model, component, domain) {
                if assignment.normalization != NormalizationApplied::None {
                    normalized.push(format!(
                        "{} ({domain}): beta sum normalized to {}",
                        component.id, assignment.beta_total
                    ));
                }
            }
        }
    }
    if normalized.is_empty() {
        out.push_str("normalization: not triggered\n");
    } else {
        out.push_str("normalization applied:\n");
        for line in normalized {
            let _ = writeln!(out, "  {line}");
        }
    }
    Ok(out)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SolveFormat {
    Text,
    Csv,
}

/// `solve`: the failure breakdown table.
pub fn cmd_solve(model: &SystemModel, format: SolveFormat) -> Result<String, CliError> {
    let breakdowns = bfm::solve_all(model)?;
    let table = report::failure_report(model, &breakdowns);
    Ok(match format {
        SolveFormat::Text => table.to_text(),
        SolveFormat::Csv => table.to_csv(),
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TreeMode {
    Exact,
    Rare,
    Mc,
}

pub struct TreeArgs {
    pub mode: TreeMode,
    pub seed: Option<u64>,
    pub replications: Option<u64>,
    pub cutsets: Option<std::path::PathBuf>,
}

/// `tree`: evaluate the model's fault tree.
pub fn cmd_tree(model: &SystemModel, args: &TreeArgs) -> Result<String, CliError> {
    let Some(tree) = &model.tree else {
        return Err(CliError::Validation("model declares no fault tree".into()));
    };
    let breakdowns = bfm::solve_all(model)?;
    let events = faulttree::expand_events(model, &breakdowns)?;

    let mut out = String::new();
    match args.mode {
        TreeMode::Exact => {
            let p = faulttree::eval_exact(tree, &events)?;
            let _ = writeln!(out, "system exact {}", fmt_sci(p));
        }
        TreeMode::Rare => {
            let result = faulttree::eval_rare_event(tree, &events, model.options.cutset_bound)?;
            let display = result.probability.min(1.0);
            let _ = writeln!(
                out,
                "system rare-event {} ({} minimal cut sets)",
                fmt_sci(display),
                result.cut_sets.len()
            );
            if result.exceeds_unity() {
                let _ = writeln!(
                    out,
                    "warning: cut-set sum {} exceeds 1; rare-event approximation invalid, value clamped",
                    fmt_sci(result.probability)
                );
            }
            if let Some(path) = &args.cutsets {
                std::fs::write(path, result.export()).map_err(|e| {
                    CliError::Numeric(format!("cannot write {}: {e}", path.display()))
                })?;
                let _ = writeln!(out, "cut sets written to {}", path.display());
            }
        }
        TreeMode::Mc => {
            let config = McConfig {
                seed: args.seed.unwrap_or(model.options.mc_seed),
                replications: args.replications.unwrap_or(model.options.mc_replications),
                confidence_level: model.options.mc_confidence,
            };
            let estimate = simulate::simulate_system(tree, &events, &config);
            let _ = writeln!(out, "{}", estimate.record_line("system"));
        }
    }
    Ok(out)
}

pub struct DiffArgs {
    /// Relative change of a row's total (or a beta) that flags the row.
    pub threshold: f64,
    pub loose: bool,
}

fn rel_change(a: f64, b: f64) -> f64 {
    if a == 0.0 {
        if b == 0.0 {
            0.0
        } else {
            f64::INFINITY
        }
    } else {
        (b - a) / a
    }
}

/// `diff`: what-if comparison of two models sharing component ids.
pub fn cmd_diff(
    model_a: &SystemModel,
    model_b: &SystemModel,
    args: &DiffArgs,
) -> Result<String, CliError> {
    let ids_a: BTreeSet<&str> = model_a.components.iter().map(|c| c.id.as_str()).collect();
    let ids_b: BTreeSet<&str> = model_b.components.iter().map(|c| c.id.as_str()).collect();
    let mut out = String::new();
    if ids_a != ids_b {
        if !args.loose {
            let only_a: Vec<&&str> = ids_a.difference(&ids_b).collect();
            let only_b: Vec<&&str> = ids_b.difference(&ids_a).collect();
            return Err(CliError::Validation(format!(
                "component id sets differ (only in A: {only_a:?}; only in B: {only_b:?}); use --loose to compare the intersection"
            )));
        }
        let _ = writeln!(
            out,
            "warning: component id sets differ; comparing the {} shared component(s)",
            ids_a.intersection(&ids_b).count()
        );
    }
    let shared: BTreeSet<&str> = ids_a.intersection(&ids_b).copied().collect();

    // Beta deltas, matched by (cccg id, domain).
    let betas_a = report::beta_report(model_a).map_err(|e| CliError::Numeric(e.to_string()))?;
    let betas_b = report::beta_report(model_b).map_err(|e| CliError::Numeric(e.to_string()))?;
    let _ = writeln!(out, "beta deltas (flag at {:.1}% relative change of beta):", args.threshold * 100.0);
    let _ = writeln!(out, "{:<24} {:<9} {:>10} {:>10} {:>11} {:>9}", "cccg", "domain", "A", "B", "abs", "rel");
    for row_a in &betas_a {
        let Some(row_b) = betas_b
            .iter()
            .find(|r| r.cccg_id == row_a.cccg_id && r.domain == row_a.domain)
        else {
            let _ = writeln!(out, "{:<24} {:<9} only in A", row_a.cccg_id, row_a.domain.to_string());
            continue;
        };
        let rel = rel_change(row_a.beta, row_b.beta);
        let flag = if rel.abs() > args.threshold { " *" } else { "" };
        let _ = writeln!(
            out,
            "{:<24} {:<9} {:>10.6} {:>10.6} {:>11.3e} {:>8.2}%{flag}",
            row_a.cccg_id,
            row_a.domain.to_string(),
            row_a.beta,
            row_b.beta,
            row_b.beta - row_a.beta,
            rel * 100.0
        );
    }
    for row_b in &betas_b {
        if !betas_a
            .iter()
            .any(|r| r.cccg_id == row_b.cccg_id && r.domain == row_b.domain)
        {
            let _ = writeln!(out, "{:<24} {:<9} only in B", row_b.cccg_id, row_b.domain.to_string());
        }
    }

    // Breakdown deltas over the shared components.
    let solved_a = bfm::solve_all(model_a)?;
    let solved_b = bfm::solve_all(model_b)?;
    let _ = writeln!(out, "\nbreakdown deltas (flag at {:.1}% relative change of Total):", args.threshold * 100.0);
    let _ = writeln!(
        out,
        "{:<16} {:<9} {:>11} {:>11} {:>11} {:>11} {:>9}",
        "component", "domain", "Q_I(A)", "Q_I(B)", "Total(A)", "Total(B)", "rel"
    );
    for a in &solved_a {
        if !shared.contains(a.component_id.as_str()) {
            continue;
        }
        let Some(b) = solved_b
            .iter()
            .find(|b| b.component_id == a.component_id && b.domain == a.domain)
        else {
            continue;
        };
        let rel = rel_change(a.q_total, b.q_total);
        let flag = if rel.abs() > args.threshold { " *" } else { "" };
        let _ = writeln!(
            out,
            "{:<16} {:<9} {:>11} {:>11} {:>11} {:>11} {:>8.2}%{flag}",
            a.component_id,
            a.domain.to_string(),
            fmt_sci(a.q_independent),
            fmt_sci(b.q_independent),
            fmt_sci(a.q_total),
            fmt_sci(b.q_total),
            rel * 100.0
        );
    }
    Ok(out)
}

/// `tables`: dump the embedded scoring tables for audit.
pub fn cmd_tables() -> String {
    use ccfq_core::scoring::{table_for, Grade, SubFactor};
    let mut out = String::new();
    for domain in Domain::BOTH {
        let table = table_for(domain);
        let _ = writeln!(
            out,
            "{} beta factor estimation table (d = {})",
            match domain {
                Domain::Hardware => "Hardware",
                Domain::Software => "Software",
            },
            table.denominator
        );
        let _ = write!(out, "{:<26}", "sub-factor");
        for grade in Grade::ALL {
            let _ = write!(out, "{:>7}", grade.as_str());
        }
        out.push('\n');
        for sf in SubFactor::ALL {
            let _ = write!(out, "{:<26}", sf.label(domain));
            for cell in table.row(sf) {
                match cell {
                    Some(count) => {
                        let _ = write!(out, "{count:>7}");
                    }
                    None => {
                        let _ = write!(out, "{:>7}", "-");
                    }
                }
            }
            out.push('\n');
        }
        out.push('\n');
    }

    out.push_str("Input similarity guide (software Separation row):\n");
    out.push_str("  R = (s-1)/m when s = 1, R = s/m otherwise\n");
    out.push_str("  R = 0                          -> A\n");
    out.push_str(
        "  0 < R <= 0.5                   -> A+  (upper bound deviates from the printed guide header, per the worked example)\n",
    );
    out.push_str("  0.5 < R < 1, zero diversity    -> B\n");
    out.push_str("  0.5 < R < 1, partial/complete  -> C\n");
    out.push_str("  R >= 1, zero/partial diversity -> D\n");
    out.push_str("  R >= 1, complete diversity     -> E\n");
    out
}

/// Apply a `--normalize` override to a loaded model.
pub fn apply_normalize_flag(
    model: &mut SystemModel,
    flag: Option<&str>,
) -> Result<(), CliError> {
    let Some(flag) = flag else { return Ok(()) };
    if flag == "proportional" {
        model.options.normalization = NormalizationPolicy::ProportionalToUnity;
        return Ok(());
    }
    if let Some(path) = flag.strip_prefix("weights:") {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::Parse(format!("cannot read weights file {path}: {e}")))?;
        let weights = document::parse_weights_file(&text)
            .map_err(|e| CliError::Parse(format!("{path}: {e}")))?;
        model.options.normalization = NormalizationPolicy::UserWeights(weights);
        return Ok(());
    }
    Err(CliError::Parse(format!(
        "--normalize expects `proportional` or `weights:<file>`, got `{flag}`"
    )))
}
