//! Audit-grade report tables: the per-component failure breakdown table
//! (columns INDIVIDUAL, one per group category, Total) and the per-group
//! beta table carrying grades and exact rationals.

use std::collections::BTreeMap;

use crate::bfm::FailureBreakdown;
use crate::model::{category_label, Domain, SystemModel};
use crate::scoring::{self, BetaScore, Grade, SubFactor};

/// Scientific notation with four significant digits and a signed
/// two-digit exponent, e.g. `5.943E-06`.
pub fn fmt_sci(x: f64) -> String {
    if x == 0.0 {
        return "0.000E+00".to_string();
    }
    let s = format!("{x:.3E}");
    let (mantissa, exponent) = s.split_once('E').expect("UpperExp always has E");
    let (sign, digits) = match exponent.strip_prefix('-') {
        Some(d) => ('-', d),
        None => ('+', exponent),
    };
    format!("{mantissa}E{sign}{digits:0>2}")
}

/// One failure-table row: a component in one domain.
#[derive(Debug, Clone, PartialEq)]
pub struct FailureRow {
    pub component_id: String,
    pub domain: Domain,
    pub individual: f64,
    /// Per category column, `None` where the component has no group of
    /// that category in this domain.
    pub cells: Vec<Option<f64>>,
    pub total: f64,
    pub normalized: bool,
    pub sensitive: bool,
}

impl FailureRow {
    pub fn flags(&self) -> String {
        let mut flags = Vec::new();
        if self.normalized {
            flags.push("NORMALIZED");
        }
        if self.sensitive {
            flags.push("SENSITIVE");
        }
        flags.join(";")
    }
}

/// The failure breakdown table.
#[derive(Debug, Clone, PartialEq)]
pub struct FailureReport {
    /// Category column labels, ordered by ascending maximum group size so
    /// narrower couplings (racks) print before wider ones, with the
    /// whole-class column last.
    pub categories: Vec<String>,
    pub rows: Vec<FailureRow>,
}

/// Build the failure table from solved breakdowns.
pub fn failure_report(model: &SystemModel, breakdowns: &[FailureBreakdown]) -> FailureReport {
    let labels: BTreeMap<&str, String> = model
        .cccgs
        .iter()
        .map(|g| (g.id.as_str(), category_label(g, model)))
        .collect();

    let mut max_size: BTreeMap<&str, usize> = BTreeMap::new();
    for cccg in &model.cccgs {
        let label = labels[cccg.id.as_str()].as_str();
        let entry = max_size.entry(label).or_insert(0);
        *entry = (*entry).max(cccg.members.len());
    }
    let mut categories: Vec<&str> = max_size.keys().copied().collect();
    categories.sort_by(|a, b| max_size[a].cmp(&max_size[b]).then(a.cmp(b)));
    let categories: Vec<String> = categories.into_iter().map(str::to_string).collect();

    let rows = breakdowns
        .iter()
        .map(|breakdown| {
            let cells = categories
                .iter()
                .map(|category| {
                    let mut sum = None;
                    for (cccg_id, p) in &breakdown.contributions {
                        if labels.get(cccg_id.as_str()).map(String::as_str) == Some(category) {
                            *sum.get_or_insert(0.0) += p;
                        }
                    }
                    sum
                })
                .collect();
            FailureRow {
                component_id: breakdown.component_id.clone(),
                domain: breakdown.domain,
                individual: breakdown.q_independent,
                cells,
                total: breakdown.q_total,
                normalized: breakdown.normalization != crate::bfm::NormalizationApplied::None,
                sensitive: breakdown.is_sensitive(),
            }
        })
        .collect();

    FailureReport { categories, rows }
}

impl FailureReport {
    pub fn header(&self) -> Vec<String> {
        let mut header = vec!["component".to_string(), "domain".to_string(), "INDIVIDUAL".to_string()];
        header.extend(self.categories.iter().cloned());
        header.push("Total".to_string());
        header.push("flags".to_string());
        header
    }

    fn row_values(&self, row: &FailureRow) -> Vec<String> {
        let mut values = vec![
            row.component_id.clone(),
            row.domain.to_string(),
            fmt_sci(row.individual),
        ];
        values.extend(
            row.cells
                .iter()
                .map(|cell| cell.map(fmt_sci).unwrap_or_else(|| "N/A".to_string())),
        );
        values.push(fmt_sci(row.total));
        values.push(row.flags());
        values
    }

    /// Aligned plain-text rendering.
    pub fn to_text(&self) -> String {
        let header = self.header();
        let mut table: Vec<Vec<String>> = vec![header];
        for row in &self.rows {
            table.push(self.row_values(row));
        }
        render_aligned(&table)
    }

    /// Comma-separated rendering: header row, LF line endings.
    pub fn to_csv(&self) -> String {
        let mut out = self.header().join(",");
        out.push('\n');
        for row in &self.rows {
            out.push_str(&self.row_values(row).join(","));
            out.push('\n');
        }
        out
    }
}

fn render_aligned(table: &[Vec<String>]) -> String {
    let columns = table.iter().map(Vec::len).max().unwrap_or(0);
    let mut widths = vec![0usize; columns];
    for row in table {
        for (i, cell) in row.iter().enumerate() {
            widths[i] = widths[i].max(cell.len());
        }
    }
    let mut out = String::new();
    for row in table {
        let mut line = String::new();
        for (i, cell) in row.iter().enumerate() {
            if i > 0 {
                line.push_str("  ");
            }
            line.push_str(&format!("{:width$}", cell, width = widths[i]));
        }
        out.push_str(line.trim_end());
        out.push('\n');
    }
    out
}

/// Where a group's beta came from.
#[derive(Debug, Clone, PartialEq)]
pub enum BetaSource {
    Grades { grades: [Grade; 8], score: BetaScore },
    Override,
}

/// One beta-table row: a group in one domain it has a beta for.
#[derive(Debug, Clone, PartialEq)]
pub struct BetaRow {
    pub cccg_id: String,
    pub domain: Domain,
    pub source: BetaSource,
    pub beta: f64,
}

/// Per-group beta table; groups in model order, hardware before software.
pub fn beta_report(model: &SystemModel) -> Result<Vec<BetaRow>, scoring::MissingCell> {
    let mut rows = Vec::new();
    for cccg in &model.cccgs {
        for domain in Domain::BOTH {
            if let Some(beta) = cccg.beta_override(domain) {
                rows.push(BetaRow {
                    cccg_id: cccg.id.clone(),
                    domain,
                    source: BetaSource::Override,
                    beta,
                });
            } else if let Some(sheet) = cccg.grades(domain) {
                let score = scoring::beta_pbf2(sheet)?;
                rows.push(BetaRow {
                    cccg_id: cccg.id.clone(),
                    domain,
                    source: BetaSource::Grades { grades: sheet.grades(), score },
                    beta: score.value(),
                });
            }
        }
    }
    Ok(rows)
}

/// Aligned text rendering of the beta table. Betas print at three
/// decimals in the style of the source tables; the exact rational carries
/// full precision.
pub fn beta_table_text(rows: &[BetaRow]) -> String {
    let mut header = vec!["cccg".to_string(), "domain".to_string()];
    header.extend(SubFactor::ALL.iter().map(|sf| sf.key().to_string()));
    header.push("sum/d".to_string());
    header.push("beta".to_string());

    let mut table = vec![header];
    for row in rows {
        let mut cells = vec![row.cccg_id.clone(), row.domain.to_string()];
        match &row.source {
            BetaSource::Grades { grades, score } => {
                cells.extend(grades.iter().map(|g| g.to_string()));
                cells.push(score.to_string());
            }
            BetaSource::Override => {
                cells.extend(std::iter::repeat("-".to_string()).take(8));
                cells.push("override".to_string());
            }
        }
        cells.push(format!("{:.3}", row.beta));
        table.push(cells);
    }
    render_aligned(&table)
}
