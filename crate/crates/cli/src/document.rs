//! The model-file format: a strict sectioned key-value text document.
//!
//! ```text
//! # comment
//! [options]
//! normalize = proportional
//! mc.seed = 42
//!
//! [component BP-A1]
//! class = BP
//! attr.division = A
//! hardware.q = 4.00e-5
//! hardware.mode = independent
//! software.q = 1.871e-4
//! software.mode = total
//!
//! [betas BP ALL]                    # binds to derived groups by label
//! hardware.grades = B+, E, A, D, C, E, D, C
//! software.beta = 0.568
//!
//! [cccg G1]                         # or: explicit groups
//! members = BP-A1, BP-A2
//! shared.division = A
//! hardware.beta = 0.123
//!
//! [tree]
//! top = 2of3(BP-A1, BP-A2, BP-B1)
//! ```
//!
//! A document declares either explicit `[cccg]` sections or `[betas]`
//! bindings over derived groups, never both. Grade lists follow the
//! canonical sub-factor order (redundancy, separation/input-similarity,
//! understanding, analysis, mmi, safety-culture, control, tests). Unknown
//! keys and sections are errors; the lenient flag downgrades them to
//! warnings. Parsing a document and serializing the resolved model back
//! out yields a structurally identical model on re-parse.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt::Write as _;

use ccfq_core::faulttree::{Gate, GateKind, TreeNode};
use ccfq_core::model::{
    category_label, derive_cccgs, Cccg, Component, CouplingAttribute, Domain, FailureData,
    InputMode, NormalizationPolicy, SolverOptions, SystemModel,
};
use ccfq_core::scoring::{Grade, GradeSheet, SubFactor};

#[derive(Debug, thiserror::Error)]
#[error("line {line}: {message}")]
pub struct ParseError {
    pub line: usize,
    pub message: String,
}

fn err<T>(line: usize, message: impl Into<String>) -> Result<T, ParseError> {
    Err(ParseError { line, message: message.into() })
}

/// Non-fatal findings (unknown keys under the lenient flag, unmatched
/// beta bindings).
#[derive(Debug, Clone)]
pub struct ParseWarning {
    pub line: usize,
    pub message: String,
}

#[derive(Debug)]
pub struct ParseOutcome {
    pub model: SystemModel,
    pub warnings: Vec<ParseWarning>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Strictness {
    Strict,
    Lenient,
}

struct Section {
    line: usize,
    header: Vec<String>,
    entries: Vec<(usize, String, String)>,
}

fn split_sections(text: &str) -> Result<Vec<Section>, ParseError> {
    let mut sections: Vec<Section> = Vec::new();
    for (idx, raw) in text.lines().enumerate() {
        let line_no = idx + 1;
        let line = match raw.find('#') {
            Some(pos) => &raw[..pos],
            None => raw,
        }
        .trim();
        if line.is_empty() {
            continue;
        }
        if let Some(rest) = line.strip_prefix('[') {
            let Some(inner) = rest.strip_suffix(']') else {
                return err(line_no, "unterminated section header");
            };
            let header: Vec<String> =
                inner.split_whitespace().map(str::to_string).collect();
            if header.is_empty() {
                return err(line_no, "empty section header");
            }
            sections.push(Section { line: line_no, header, entries: Vec::new() });
            continue;
        }
        let Some((key, value)) = line.split_once('=') else {
            return err(line_no, format!("expected `key = value`, got `{line}`"));
        };
        let Some(section) = sections.last_mut() else {
            return err(line_no, "key-value entry before any section header");
        };
        section.entries.push((line_no, key.trim().to_string(), value.trim().to_string()));
    }
    Ok(sections)
}

fn parse_f64(line: usize, key: &str, value: &str) -> Result<f64, ParseError> {
    value
        .parse::<f64>()
        .map_err(|_| ParseError { line, message: format!("{key}: expected a number, got `{value}`") })
}

fn parse_u64(line: usize, key: &str, value: &str) -> Result<u64, ParseError> {
    value
        .parse::<u64>()
        .map_err(|_| ParseError { line, message: format!("{key}: expected an integer, got `{value}`") })
}

fn parse_mode(line: usize, value: &str) -> Result<InputMode, ParseError> {
    match value {
        "total" => Ok(InputMode::TotalGiven),
        "independent" => Ok(InputMode::IndependentGiven),
        other => err(line, format!("mode must be `total` or `independent`, got `{other}`")),
    }
}

fn parse_grades(line: usize, domain: Domain, value: &str) -> Result<GradeSheet, ParseError> {
    let parts: Vec<&str> = value.split(',').map(str::trim).collect();
    if parts.len() != 8 {
        return err(
            line,
            format!("expected 8 comma-separated grades in canonical sub-factor order, got {}", parts.len()),
        );
    }
    let mut grades = [Grade::A; 8];
    for (slot, part) in grades.iter_mut().zip(&parts) {
        *slot = Grade::parse(part)
            .ok_or_else(|| ParseError { line, message: format!("unknown grade `{part}`") })?;
    }
    Ok(GradeSheet::new(domain, grades))
}

/// Per-domain beta sources collected from a cccg or betas section.
#[derive(Default, Clone)]
struct BetaSources {
    hardware_grades: Option<GradeSheet>,
    software_grades: Option<GradeSheet>,
    hardware_beta: Option<f64>,
    software_beta: Option<f64>,
}

impl BetaSources {
    fn apply_key(
        &mut self,
        line: usize,
        key: &str,
        value: &str,
    ) -> Result<bool, ParseError> {
        match key {
            "hardware.grades" => {
                self.hardware_grades = Some(parse_grades(line, Domain::Hardware, value)?)
            }
            "software.grades" => {
                self.software_grades = Some(parse_grades(line, Domain::Software, value)?)
            }
            "hardware.beta" => self.hardware_beta = Some(parse_f64(line, key, value)?),
            "software.beta" => self.software_beta = Some(parse_f64(line, key, value)?),
            _ => return Ok(false),
        }
        Ok(true)
    }

    fn install(&self, cccg: &mut Cccg) {
        cccg.hardware_grades = self.hardware_grades.clone();
        cccg.software_grades = self.software_grades.clone();
        cccg.hardware_beta = self.hardware_beta;
        cccg.software_beta = self.software_beta;
    }
}

struct Binding {
    line: usize,
    class_id: String,
    label: String,
    sources: BetaSources,
    used: bool,
}

/// Parse a document into a resolved [`SystemModel`].
pub fn parse_document(text: &str, strictness: Strictness) -> Result<ParseOutcome, ParseError> {
    let sections = split_sections(text)?;
    let mut warnings: Vec<ParseWarning> = Vec::new();
    let mut unknown = |line: usize, message: String| -> Result<(), ParseError> {
        match strictness {
            Strictness::Strict => err(line, message),
            Strictness::Lenient => {
                warnings.push(ParseWarning { line, message });
                Ok(())
            }
        }
    };

    let mut components: Vec<Component> = Vec::new();
    let mut explicit_cccgs: Vec<Cccg> = Vec::new();
    let mut bindings: Vec<Binding> = Vec::new();
    let mut tree: Option<TreeNode> = None;
    let mut options = SolverOptions::default();
    let mut normalize_weights = false;
    let mut weights: BTreeMap<String, f64> = BTreeMap::new();

    for section in sections {
        match section.header[0].as_str() {
            "options" => {
                if section.header.len() != 1 {
                    return err(section.line, "[options] takes no arguments");
                }
                for (line, key, value) in &section.entries {
                    match key.as_str() {
                        "normalize" => match value.as_str() {
                            "proportional" => normalize_weights = false,
                            "weights" => normalize_weights = true,
                            other => {
                                return err(
                                    *line,
                                    format!("normalize must be `proportional` or `weights`, got `{other}`"),
                                )
                            }
                        },
                        "mc.seed" => options.mc_seed = parse_u64(*line, key, value)?,
                        "mc.replications" => {
                            options.mc_replications = parse_u64(*line, key, value)?;
                            if options.mc_replications == 0 {
                                return err(*line, "mc.replications must be at least 1");
                            }
                        }
                        "mc.confidence" => {
                            options.mc_confidence = parse_f64(*line, key, value)?;
                            if !(0.0 < options.mc_confidence && options.mc_confidence < 1.0) {
                                return err(*line, "mc.confidence must lie in (0, 1)");
                            }
                        }
                        "cutset.bound" => {
                            options.cutset_bound = parse_u64(*line, key, value)? as usize
                        }
                        other => unknown(*line, format!("unknown options key `{other}`"))?,
                    }
                }
            }
            "component" => {
                if section.header.len() != 2 {
                    return err(section.line, "[component] header needs exactly one id");
                }
                let id = section.header[1].clone();
                let mut class_id: Option<String> = None;
                let mut attributes: BTreeSet<CouplingAttribute> = BTreeSet::new();
                let mut hw_q: Option<f64> = None;
                let mut hw_mode = InputMode::TotalGiven;
                let mut sw_q: Option<f64> = None;
                let mut sw_mode = InputMode::TotalGiven;
                for (line, key, value) in &section.entries {
                    match key.as_str() {
                        "class" => class_id = Some(value.clone()),
                        "hardware.q" => hw_q = Some(parse_f64(*line, key, value)?),
                        "hardware.mode" => hw_mode = parse_mode(*line, value)?,
                        "software.q" => sw_q = Some(parse_f64(*line, key, value)?),
                        "software.mode" => sw_mode = parse_mode(*line, value)?,
                        other => match other.strip_prefix("attr.") {
                            Some(category) if !category.is_empty() => {
                                if !attributes.insert(CouplingAttribute::new(category, value.clone())) {
                                    return err(*line, format!("duplicate attribute `{other}`"));
                                }
                            }
                            _ => unknown(*line, format!("unknown component key `{other}`"))?,
                        },
                    }
                }
                let Some(class_id) = class_id else {
                    return err(section.line, format!("component {id} is missing `class`"));
                };
                let Some(hw_q) = hw_q else {
                    return err(section.line, format!("component {id} is missing `hardware.q`"));
                };
                components.push(Component {
                    id,
                    class_id,
                    attributes,
                    hardware: FailureData { q: hw_q, mode: hw_mode },
                    software: sw_q.map(|q| FailureData { q, mode: sw_mode }),
                });
            }
            "cccg" => {
                if section.header.len() != 2 {
                    return err(section.line, "[cccg] header needs exactly one id");
                }
                let mut cccg = Cccg::new(section.header[1].clone());
                let mut sources = BetaSources::default();
                for (line, key, value) in &section.entries {
                    if sources.apply_key(*line, key, value)? {
                        continue;
                    }
                    match key.as_str() {
                        "members" => {
                            cccg.members = value
                                .split(',')
                                .map(|s| s.trim().to_string())
                                .filter(|s| !s.is_empty())
                                .collect()
                        }
                        other => match other.strip_prefix("shared.") {
                            Some(category) if !category.is_empty() => {
                                cccg.shared_attributes
                                    .insert(CouplingAttribute::new(category, value.clone()));
                            }
                            _ => unknown(*line, format!("unknown cccg key `{other}`"))?,
                        },
                    }
                }
                sources.install(&mut cccg);
                explicit_cccgs.push(cccg);
            }
            "betas" => {
                if section.header.len() != 3 {
                    return err(section.line, "[betas] header needs a class and a category label");
                }
                let mut sources = BetaSources::default();
                for (line, key, value) in &section.entries {
                    if !sources.apply_key(*line, key, value)? {
                        unknown(*line, format!("unknown betas key `{key}`"))?;
                    }
                }
                bindings.push(Binding {
                    line: section.line,
                    class_id: section.header[1].clone(),
                    label: section.header[2].clone(),
                    sources,
                    used: false,
                });
            }
            "tree" => {
                if section.header.len() != 1 {
                    return err(section.line, "[tree] takes no arguments");
                }
                for (line, key, value) in &section.entries {
                    match key.as_str() {
                        "top" => tree = Some(parse_tree_expr(*line, value)?),
                        other => unknown(*line, format!("unknown tree key `{other}`"))?,
                    }
                }
            }
            "weights" => {
                if section.header.len() != 1 {
                    return err(section.line, "[weights] takes no arguments");
                }
                for (line, key, value) in &section.entries {
                    weights.insert(key.clone(), parse_f64(*line, key, value)?);
                }
            }
            other => unknown(section.line, format!("unknown section `[{other}]`"))?,
        }
    }

    if normalize_weights {
        options.normalization = NormalizationPolicy::UserWeights(weights);
    } else if !weights.is_empty() {
        return Err(ParseError {
            line: 0,
            message: "[weights] section present but options.normalize is not `weights`".into(),
        });
    }

    let cccgs = if explicit_cccgs.is_empty() {
        resolve_bindings(&components, &mut bindings, &mut warnings)?
    } else {
        if let Some(binding) = bindings.first() {
            return err(
                binding.line,
                "[betas] bindings and explicit [cccg] sections cannot be mixed; \
                 attach betas to the explicit groups instead",
            );
        }
        explicit_cccgs
    };

    let model = SystemModel { components, cccgs, tree, options };
    Ok(ParseOutcome { model, warnings })
}

/// Derive groups from attributes and attach bound beta sources by
/// `(class, category label)`.
fn resolve_bindings(
    components: &[Component],
    bindings: &mut [Binding],
    warnings: &mut Vec<ParseWarning>,
) -> Result<Vec<Cccg>, ParseError> {
    let mut cccgs = derive_cccgs(components)
        .map_err(|e| ParseError { line: 0, message: e.to_string() })?;
    // Labels need a model view; groups carry no betas yet, which is fine
    // for labeling.
    let lookup = SystemModel {
        components: components.to_vec(),
        cccgs: cccgs.clone(),
        tree: None,
        options: SolverOptions::default(),
    };
    for cccg in &mut cccgs {
        let label = category_label(lookup.cccg(&cccg.id).expect("same ids"), &lookup);
        let class_id = cccg
            .members
            .iter()
            .next()
            .and_then(|id| lookup.component(id))
            .map(|c| c.class_id.clone())
            .unwrap_or_default();
        for binding in bindings.iter_mut() {
            if binding.class_id == class_id && binding.label == label {
                binding.sources.install(cccg);
                binding.used = true;
            }
        }
    }
    for binding in bindings.iter().filter(|b| !b.used) {
        warnings.push(ParseWarning {
            line: binding.line,
            message: format!(
                "[betas {} {}] matches no derived group",
                binding.class_id, binding.label
            ),
        });
    }
    Ok(cccgs)
}

/// Parse a tree expression: `ident`, `and(...)`, `or(...)`, or `2of3(...)`.
pub fn parse_tree_expr(line: usize, text: &str) -> Result<TreeNode, ParseError> {
    let mut parser = ExprParser { line, chars: text.char_indices().peekable(), text };
    let node = parser.expr()?;
    parser.skip_ws();
    if let Some((pos, c)) = parser.chars.peek() {
        return err(line, format!("unexpected `{c}` at column {}", pos + 1));
    }
    Ok(node)
}

struct ExprParser<'a> {
    line: usize,
    chars: std::iter::Peekable<std::str::CharIndices<'a>>,
    text: &'a str,
}

impl<'a> ExprParser<'a> {
    fn skip_ws(&mut self) {
        while matches!(self.chars.peek(), Some((_, c)) if c.is_whitespace()) {
            self.chars.next();
        }
    }

    fn ident(&mut self) -> Result<&'a str, ParseError> {
        self.skip_ws();
        let start = match self.chars.peek() {
            Some((pos, c)) if is_ident_char(*c) => *pos,
            Some((pos, c)) => return err(self.line, format!("unexpected `{c}` at column {}", pos + 1)),
            None => return err(self.line, "unexpected end of tree expression"),
        };
        let mut end = start;
        while let Some((pos, c)) = self.chars.peek() {
            if is_ident_char(*c) {
                end = pos + c.len_utf8();
                self.chars.next();
            } else {
                break;
            }
        }
        Ok(&self.text[start..end])
    }

    fn expr(&mut self) -> Result<TreeNode, ParseError> {
        let name = self.ident()?;
        self.skip_ws();
        if !matches!(self.chars.peek(), Some((_, '('))) {
            return Ok(TreeNode::Component(name.to_string()));
        }
        self.chars.next(); // consume '('
        let mut children = Vec::new();
        loop {
            children.push(self.expr()?);
            self.skip_ws();
            match self.chars.next() {
                Some((_, ',')) => continue,
                Some((_, ')')) => break,
                Some((pos, c)) => {
                    return err(self.line, format!("expected `,` or `)` at column {}, got `{c}`", pos + 1))
                }
                None => return err(self.line, "unterminated gate expression"),
            }
        }
        let kind = match name {
            "and" => GateKind::And,
            "or" => GateKind::Or,
            other => match parse_kofn_name(other) {
                Some((k, n)) => {
                    if n as usize != children.len() {
                        return err(
                            self.line,
                            format!("{other} gate declares {n} children but has {}", children.len()),
                        );
                    }
                    if k == 0 || k > n {
                        return err(self.line, format!("{other} gate requires 1 <= k <= n"));
                    }
                    GateKind::KofN(k)
                }
                None => {
                    return err(self.line, format!("unknown gate `{other}` (use and, or, <k>of<n>)"))
                }
            },
        };
        Ok(TreeNode::Gate(Gate { kind, children }))
    }
}

fn is_ident_char(c: char) -> bool {
    c.is_alphanumeric() || matches!(c, '_' | '-' | '.' | ':' | '+')
}

fn parse_kofn_name(name: &str) -> Option<(u32, u32)> {
    let (k, n) = name.split_once("of")?;
    Some((k.parse().ok()?, n.parse().ok()?))
}

fn tree_expr_string(node: &TreeNode) -> String {
    match node {
        TreeNode::Component(id) => id.clone(),
        TreeNode::Gate(gate) => {
            let children: Vec<String> = gate.children.iter().map(tree_expr_string).collect();
            let name = match gate.kind {
                GateKind::And => "and".to_string(),
                GateKind::Or => "or".to_string(),
                GateKind::KofN(k) => format!("{k}of{}", gate.children.len()),
            };
            format!("{name}({})", children.join(", "))
        }
    }
}

fn grades_value(sheet: &GradeSheet) -> String {
    SubFactor::ALL
        .iter()
        .map(|sf| sheet.grade(*sf).as_str())
        .collect::<Vec<_>>()
        .join(", ")
}

/// Serialize a resolved model back to document text. Groups are always
/// written as explicit `[cccg]` sections; floats use the shortest
/// round-trip representation.
pub fn serialize_model(model: &SystemModel) -> String {
    let mut out = String::new();

    out.push_str("[options]\n");
    match &model.options.normalization {
        NormalizationPolicy::ProportionalToUnity => out.push_str("normalize = proportional\n"),
        NormalizationPolicy::UserWeights(_) => out.push_str("normalize = weights\n"),
    }
    let _ = writeln!(out, "mc.seed = {}", model.options.mc_seed);
    let _ = writeln!(out, "mc.replications = {}", model.options.mc_replications);
    let _ = writeln!(out, "mc.confidence = {}", model.options.mc_confidence);
    let _ = writeln!(out, "cutset.bound = {}", model.options.cutset_bound);
    if let NormalizationPolicy::UserWeights(weights) = &model.options.normalization {
        out.push_str("\n[weights]\n");
        for (id, w) in weights {
            let _ = writeln!(out, "{id} = {w:?}");
        }
    }

    for component in &model.components {
        let _ = write!(out, "\n[component {}]\nclass = {}\n", component.id, component.class_id);
        for attr in &component.attributes {
            let _ = writeln!(out, "attr.{} = {}", attr.category, attr.value);
        }
        let _ = writeln!(out, "hardware.q = {:?}", component.hardware.q);
        let _ = writeln!(out, "hardware.mode = {}", component.hardware.mode.as_str());
        if let Some(software) = &component.software {
            let _ = writeln!(out, "software.q = {:?}", software.q);
            let _ = writeln!(out, "software.mode = {}", software.mode.as_str());
        }
    }

    for cccg in &model.cccgs {
        let _ = write!(out, "\n[cccg {}]\n", cccg.id);
        let members: Vec<&str> = cccg.members.iter().map(String::as_str).collect();
        let _ = writeln!(out, "members = {}", members.join(", "));
        for attr in &cccg.shared_attributes {
            let _ = writeln!(out, "shared.{} = {}", attr.category, attr.value);
        }
        if let Some(sheet) = &cccg.hardware_grades {
            let _ = writeln!(out, "hardware.grades = {}", grades_value(sheet));
        }
        if let Some(sheet) = &cccg.software_grades {
            let _ = writeln!(out, "software.grades = {}", grades_value(sheet));
        }
        if let Some(beta) = cccg.hardware_beta {
            let _ = writeln!(out, "hardware.beta = {beta:?}");
        }
        if let Some(beta) = cccg.software_beta {
            let _ = writeln!(out, "software.beta = {beta:?}");
        }
    }

    if let Some(tree) = &model.tree {
        let _ = write!(out, "\n[tree]\ntop = {}\n", tree_expr_string(tree));
    }

    out
}

/// Parse a normalization weights file: `cccg-id = weight` lines with `#`
/// comments.
pub fn parse_weights_file(text: &str) -> Result<BTreeMap<String, f64>, ParseError> {
    let mut out = BTreeMap::new();
    for (idx, raw) in text.lines().enumerate() {
        let line_no = idx + 1;
        let line = match raw.find('#') {
            Some(pos) => &raw[..pos],
            None => raw,
        }
        .trim();
        if line.is_empty() {
            continue;
        }
        let Some((key, value)) = line.split_once('=') else {
            return err(line_no, format!("expected `cccg-id = weight`, got `{line}`"));
        };
        let weight = parse_f64(line_no, key.trim(), value.trim())?;
        out.insert(key.trim().to_string(), weight);
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    const SMALL: &str = r#"
# two redundant processors
[options]
normalize = proportional
mc.seed = 7

[component A]
class = PROC
attr.software = app
attr.division = one
hardware.q = 1.0e-4
hardware.mode = independent
software.q = 2.0e-4
software.mode = total

[component B]
class = PROC
attr.software = app
attr.division = one
hardware.q = 1.0e-4
hardware.mode = independent
software.q = 2.0e-4
software.mode = total

[betas PROC ALL]
hardware.beta = 0.1
software.beta = 0.4

[tree]
top = and(A, B)
"#;

    #[test]
    fn parses_and_resolves_bindings() {
        let outcome = parse_document(SMALL, Strictness::Strict).unwrap();
        assert!(outcome.warnings.is_empty());
        let model = outcome.model;
        assert_eq!(model.components.len(), 2);
        assert_eq!(model.cccgs.len(), 1);
        let group = &model.cccgs[0];
        assert_eq!(group.id, "PROC-ALL");
        assert_eq!(group.hardware_beta, Some(0.1));
        assert_eq!(group.software_beta, Some(0.4));
        assert_eq!(model.options.mc_seed, 7);
        assert!(matches!(model.tree, Some(TreeNode::Gate(_))));
    }

    #[test]
    fn round_trip_is_structurally_identical() {
        let model = parse_document(SMALL, Strictness::Strict).unwrap().model;
        let text = serialize_model(&model);
        let reparsed = parse_document(&text, Strictness::Strict).unwrap().model;
        assert_eq!(model, reparsed);
    }

    #[test]
    fn unknown_key_is_strict_error_lenient_warning() {
        let text = SMALL.replace("mc.seed = 7", "mc.sede = 7");
        assert!(parse_document(&text, Strictness::Strict).is_err());
        let outcome = parse_document(&text, Strictness::Lenient).unwrap();
        assert_eq!(outcome.warnings.len(), 1);
        assert!(outcome.warnings[0].message.contains("mc.sede"));
    }

    #[test]
    fn unmatched_binding_warns() {
        let text = SMALL.replace("[betas PROC ALL]", "[betas PROC ALL]\n");
        let with_extra = format!("{text}\n[betas PROC RACK]\nhardware.beta = 0.5\n");
        let outcome = parse_document(&with_extra, Strictness::Strict).unwrap();
        assert_eq!(outcome.warnings.len(), 1);
        assert!(outcome.warnings[0].message.contains("PROC RACK"));
    }

    #[test]
    fn explicit_cccgs_exclude_bindings() {
        let text = format!("{SMALL}\n[cccg X]\nmembers = A, B\nhardware.beta = 0.2\n");
        let err = parse_document(&text, Strictness::Strict).unwrap_err();
        assert!(err.message.contains("cannot be mixed"));
    }

    #[test]
    fn explicit_cccg_sections_parse() {
        let text = SMALL.replace(
            "[betas PROC ALL]\nhardware.beta = 0.1\nsoftware.beta = 0.4",
            "[cccg G]\nmembers = A, B\nshared.software = app\nhardware.beta = 0.1\nsoftware.beta = 0.4",
        );
        let model = parse_document(&text, Strictness::Strict).unwrap().model;
        assert_eq!(model.cccgs.len(), 1);
        assert_eq!(model.cccgs[0].id, "G");
        assert_eq!(model.cccgs[0].members.len(), 2);
    }

    #[test]
    fn grade_lists_parse_in_canonical_order() {
        let text = SMALL.replace(
            "hardware.beta = 0.1",
            "hardware.grades = B+, E, A, D, C, E, D, C",
        );
        let model = parse_document(&text, Strictness::Strict).unwrap().model;
        let sheet = model.cccgs[0].hardware_grades.as_ref().unwrap();
        assert_eq!(sheet.grade(SubFactor::Redundancy), Grade::BPlus);
        assert_eq!(sheet.grade(SubFactor::Separation), Grade::E);
        assert_eq!(sheet.grade(SubFactor::Tests), Grade::C);
    }

    #[test]
    fn tree_expressions_parse_and_validate() {
        let node = parse_tree_expr(1, "2of3(A, and(B, C), or(D, E))").unwrap();
        match &node {
            TreeNode::Gate(gate) => {
                assert_eq!(gate.kind, GateKind::KofN(2));
                assert_eq!(gate.children.len(), 3);
            }
            _ => panic!("expected gate"),
        }
        assert!(parse_tree_expr(1, "2of3(A, B)").is_err());
        assert!(parse_tree_expr(1, "0of2(A, B)").is_err());
        assert!(parse_tree_expr(1, "nand(A, B)").is_err());
        assert!(parse_tree_expr(1, "and(A, B) C").is_err());
        assert_eq!(parse_tree_expr(1, "BP-A1").unwrap(), TreeNode::Component("BP-A1".into()));
    }

    #[test]
    fn weights_file_parses() {
        let weights = parse_weights_file("# w\nG1 = 0.5\nG2 = 1.0\n").unwrap();
        assert_eq!(weights.len(), 2);
        assert_eq!(weights["G1"], 0.5);
    }
}
