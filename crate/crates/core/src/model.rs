//! System model: components with coupling-factor attributes and failure
//! data, common cause component groups (CCCGs), solver options, and the
//! attribute-driven CCCG derivation.
//!
//! A CCCG is derived per identical-component class: every coupling
//! attribute value shared by two or more class members defines a candidate
//! group holding exactly the members that carry it. Candidates with
//! identical membership merge (their shared attributes union), so the
//! whole-class group typically ends up justified by several attributes
//! while location-style subgroups keep only their distinguishing
//! attribute. A component may therefore sit in several groups at once;
//! that overlap is the point of the solver in [`crate::bfm`].

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use crate::faulttree::TreeNode;
use crate::scoring::GradeSheet;

/// Failure domain of a component's data and of a CCCG's parameters.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Domain {
    Hardware,
    Software,
}

impl Domain {
    pub const BOTH: [Domain; 2] = [Domain::Hardware, Domain::Software];

    pub fn as_str(&self) -> &'static str {
        match self {
            Domain::Hardware => "hardware",
            Domain::Software => "software",
        }
    }
}

impl fmt::Display for Domain {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// One coupling factor: a `(category, value)` pair such as
/// `("division", "A")` or `("manufacturer", "vendor-x")`. Pairs are
/// compared by exact equality.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct CouplingAttribute {
    pub category: String,
    pub value: String,
}

impl CouplingAttribute {
    pub fn new(category: impl Into<String>, value: impl Into<String>) -> Self {
        CouplingAttribute { category: category.into(), value: value.into() }
    }
}

impl fmt::Display for CouplingAttribute {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}={}", self.category, self.value)
    }
}

/// Whether a component's stated failure probability is the total (`Q_t`)
/// or only the independent part (`Q_I`).
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum InputMode {
    TotalGiven,
    IndependentGiven,
}

impl InputMode {
    pub fn as_str(&self) -> &'static str {
        match self {
            InputMode::TotalGiven => "total",
            InputMode::IndependentGiven => "independent",
        }
    }
}

/// Per-demand failure probability for one domain of one component.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FailureData {
    pub q: f64,
    pub mode: InputMode,
}

/// A redundant unit. `class_id` declares which components count as
/// identical; the declaration is deliberately explicit rather than being
/// inferred from attribute equality, so that "identical" stays an
/// auditable modeling statement.
#[derive(Debug, Clone, PartialEq)]
pub struct Component {
    pub id: String,
    pub class_id: String,
    pub attributes: BTreeSet<CouplingAttribute>,
    pub hardware: FailureData,
    pub software: Option<FailureData>,
}

impl Component {
    pub fn failure_data(&self, domain: Domain) -> Option<&FailureData> {
        match domain {
            Domain::Hardware => Some(&self.hardware),
            Domain::Software => self.software.as_ref(),
        }
    }
}

/// A common cause component group: components sharing coupling factors,
/// carrying per-domain beta sources (a grade sheet or a direct override).
///
/// A CCCG participates in a domain only if it has a beta source for it; a
/// group may, for example, model hardware coupling at rack level while
/// software coupling only exists group-wide.
#[derive(Debug, Clone, PartialEq)]
pub struct Cccg {
    pub id: String,
    pub members: BTreeSet<String>,
    pub shared_attributes: BTreeSet<CouplingAttribute>,
    pub hardware_grades: Option<GradeSheet>,
    pub software_grades: Option<GradeSheet>,
    pub hardware_beta: Option<f64>,
    pub software_beta: Option<f64>,
}

impl Cccg {
    pub fn new(id: impl Into<String>) -> Self {
        Cccg {
            id: id.into(),
            members: BTreeSet::new(),
            shared_attributes: BTreeSet::new(),
            hardware_grades: None,
            software_grades: None,
            hardware_beta: None,
            software_beta: None,
        }
    }

    pub fn grades(&self, domain: Domain) -> Option<&GradeSheet> {
        match domain {
            Domain::Hardware => self.hardware_grades.as_ref(),
            Domain::Software => self.software_grades.as_ref(),
        }
    }

    pub fn beta_override(&self, domain: Domain) -> Option<f64> {
        match domain {
            Domain::Hardware => self.hardware_beta,
            Domain::Software => self.software_beta,
        }
    }

    /// Whether the group carries any beta source (grades or override) for
    /// the domain.
    pub fn has_beta_source(&self, domain: Domain) -> bool {
        self.grades(domain).is_some() || self.beta_override(domain).is_some()
    }

    pub fn contains(&self, component_id: &str) -> bool {
        self.members.contains(component_id)
    }
}

/// How per-component group betas are rescaled when their sum exceeds one.
#[derive(Debug, Clone, PartialEq)]
pub enum NormalizationPolicy {
    /// Scale every group beta by `1/sum` so they sum to one while keeping
    /// their relative magnitudes. Suits low-diversity software, where
    /// dependent failure is expected to dominate.
    ProportionalToUnity,
    /// Multiply each group beta by a caller-supplied weight keyed by CCCG
    /// id, then require the weighted sum not to exceed one.
    UserWeights(BTreeMap<String, f64>),
}

impl Default for NormalizationPolicy {
    fn default() -> Self {
        NormalizationPolicy::ProportionalToUnity
    }
}

/// Solver-wide settings carried by the model file.
#[derive(Debug, Clone, PartialEq)]
pub struct SolverOptions {
    pub normalization: NormalizationPolicy,
    pub mc_seed: u64,
    pub mc_replications: u64,
    pub mc_confidence: f64,
    /// Cap on enumerated cut sets before the rare-event evaluator bails.
    pub cutset_bound: usize,
}

impl Default for SolverOptions {
    fn default() -> Self {
        SolverOptions {
            normalization: NormalizationPolicy::default(),
            mc_seed: 0,
            mc_replications: 100_000,
            mc_confidence: 0.95,
            cutset_bound: 1_000_000,
        }
    }
}

/// The whole analysis input: components, groups, optional fault tree, and
/// solver options. Immutable once built; every operation on it is a pure
/// function, so models can be shared freely across threads.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct SystemModel {
    pub components: Vec<Component>,
    pub cccgs: Vec<Cccg>,
    pub tree: Option<TreeNode>,
    pub options: SolverOptions,
}

impl SystemModel {
    pub fn component(&self, id: &str) -> Option<&Component> {
        self.components.iter().find(|c| c.id == id)
    }

    pub fn cccg(&self, id: &str) -> Option<&Cccg> {
        self.cccgs.iter().find(|g| g.id == id)
    }

    /// Groups containing the component, in model order.
    pub fn cccgs_of<'a>(&'a self, component_id: &'a str) -> impl Iterator<Item = &'a Cccg> + 'a {
        self.cccgs.iter().filter(move |g| g.contains(component_id))
    }

    /// Component ids of one class, sorted.
    pub fn class_members(&self, class_id: &str) -> BTreeSet<&str> {
        self.components
            .iter()
            .filter(|c| c.class_id == class_id)
            .map(|c| c.id.as_str())
            .collect()
    }
}

/// Report/category label of a group: `ALL` when it spans its entire
/// class, otherwise the uppercased shared-attribute category (joined with
/// `+` in the rare case of several categories). Labels are derived from
/// the data so arbitrary coupling taxonomies produce their own columns.
pub fn category_label(cccg: &Cccg, model: &SystemModel) -> String {
    let class = cccg
        .members
        .iter()
        .next()
        .and_then(|id| model.component(id))
        .map(|c| c.class_id.as_str());
    if let Some(class_id) = class {
        let class_members = model.class_members(class_id);
        if class_members.len() == cccg.members.len()
            && class_members.iter().all(|id| cccg.members.contains(*id))
        {
            return "ALL".to_string();
        }
    }
    let categories: BTreeSet<&str> =
        cccg.shared_attributes.iter().map(|a| a.category.as_str()).collect();
    if categories.is_empty() {
        return "GROUP".to_string();
    }
    categories
        .into_iter()
        .map(str::to_uppercase)
        .collect::<Vec<_>>()
        .join("+")
}

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum DeriveError {
    #[error("components {a} and {b} share class {class_id} but carry different attribute categories")]
    InconsistentClassAttributes { class_id: String, a: String, b: String },
}

/// Derive coupling-factor-based CCCGs from component attributes.
///
/// Output is deterministic: groups are sorted by member count descending,
/// then by lexicographic member ids, and ids are assigned from the class
/// and category label. Permuting the input leaves the result unchanged,
/// singleton candidates are never emitted, and a group whose members and
/// attributes are both contained in a strictly larger group is dropped as
/// redundant (membership overlap with *distinct* attributes is kept: the
/// whole-class group and its location subgroups coexist deliberately).
pub fn derive_cccgs(components: &[Component]) -> Result<Vec<Cccg>, DeriveError> {
    // Classes must agree on attribute categories before grouping.
    check_class_categories(components)?;

    // Candidate groups: per class, per attribute value held by >= 2 members.
    let mut candidates: BTreeMap<(String, BTreeSet<String>), BTreeSet<CouplingAttribute>> =
        BTreeMap::new();
    let mut classes: BTreeMap<&str, Vec<&Component>> = BTreeMap::new();
    for component in components {
        classes.entry(&component.class_id).or_default().push(component);
    }
    for (class_id, members) in &classes {
        let mut holders: BTreeMap<&CouplingAttribute, BTreeSet<String>> = BTreeMap::new();
        for component in members {
            for attr in &component.attributes {
                holders.entry(attr).or_default().insert(component.id.clone());
            }
        }
        for (attr, ids) in holders {
            if ids.len() >= 2 {
                candidates
                    .entry((class_id.to_string(), ids))
                    .or_default()
                    .insert(attr.clone());
            }
        }
    }

    // Drop a group subsumed by a strictly larger one (same class, member
    // subset, attribute subset).
    let merged: Vec<(String, BTreeSet<String>, BTreeSet<CouplingAttribute>)> = candidates
        .into_iter()
        .map(|((class, members), attrs)| (class, members, attrs))
        .collect();
    let mut kept: Vec<(String, BTreeSet<String>, BTreeSet<CouplingAttribute>)> = Vec::new();
    'outer: for (class, members, attrs) in &merged {
        for (other_class, other_members, other_attrs) in &merged {
            if class == other_class
                && members.len() < other_members.len()
                && members.is_subset(other_members)
                && attrs.is_subset(other_attrs)
            {
                continue 'outer;
            }
        }
        kept.push((class.clone(), members.clone(), attrs.clone()));
    }

    kept.sort_by(|a, b| {
        b.1.len()
            .cmp(&a.1.len())
            .then_with(|| a.1.cmp(&b.1))
            .then_with(|| a.0.cmp(&b.0))
    });

    let class_sizes: BTreeMap<&str, usize> =
        classes.iter().map(|(id, v)| (*id, v.len())).collect();
    let mut groups = Vec::with_capacity(kept.len());
    let mut used_ids: BTreeSet<String> = BTreeSet::new();
    for (class, members, attrs) in kept {
        let whole_class = class_sizes.get(class.as_str()).copied() == Some(members.len());
        let id = derived_id(&class, &members, &attrs, whole_class, &mut used_ids);
        let mut cccg = Cccg::new(id);
        cccg.members = members;
        cccg.shared_attributes = attrs;
        groups.push(cccg);
    }
    Ok(groups)
}

fn derived_id(
    class: &str,
    members: &BTreeSet<String>,
    attrs: &BTreeSet<CouplingAttribute>,
    whole_class: bool,
    used: &mut BTreeSet<String>,
) -> String {
    let base = if whole_class {
        format!("{class}-ALL")
    } else {
        let categories: BTreeSet<&str> = attrs.iter().map(|a| a.category.as_str()).collect();
        let label = categories
            .iter()
            .map(|c| c.to_uppercase())
            .collect::<Vec<_>>()
            .join("+");
        if categories.len() == 1 {
            let values: Vec<&str> = attrs.iter().map(|a| a.value.as_str()).collect();
            format!("{class}-{label}-{}", values.join("+"))
        } else {
            format!("{class}-{label}-{}", members.iter().next().map(String::as_str).unwrap_or(""))
        }
    };
    let mut id = base.clone();
    let mut n = 1;
    while !used.insert(id.clone()) {
        n += 1;
        id = format!("{base}-{n}");
    }
    id
}

/// Severity of a validation finding.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Severity {
    Error,
    Warning,
}

/// One validation finding with a stable machine-readable code.
#[derive(Debug, Clone, PartialEq)]
pub struct Diagnostic {
    pub severity: Severity,
    pub code: &'static str,
    pub message: String,
}

impl Diagnostic {
    fn error(code: &'static str, message: String) -> Self {
        Diagnostic { severity: Severity::Error, code, message }
    }

    fn warning(code: &'static str, message: String) -> Self {
        Diagnostic { severity: Severity::Warning, code, message }
    }
}

impl fmt::Display for Diagnostic {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let sev = match self.severity {
            Severity::Error => "error",
            Severity::Warning => "warning",
        };
        write!(f, "{sev}[{}]: {}", self.code, self.message)
    }
}

/// Whether any diagnostic in the list is an error.
pub fn has_errors(diagnostics: &[Diagnostic]) -> bool {
    diagnostics.iter().any(|d| d.severity == Severity::Error)
}

/// Check every model invariant and quantification precondition.
///
/// Returns an empty list exactly when the model is solvable: components
/// well-formed, groups structurally sound, each group carrying a beta
/// source for at least one domain its members have data for, members of a
/// group identical in their per-domain failure data, and the fault tree
/// (when present) referencing known components.
pub fn validate_model(model: &SystemModel) -> Vec<Diagnostic> {
    let mut out = validate_components(&model.components);

    for cccg in &model.cccgs {
        validate_cccg_structure(model, cccg, &mut out);
        validate_cccg_quantification(model, cccg, &mut out);
    }

    // Two groups with identical membership and identical justification are
    // one group declared twice.
    for (i, a) in model.cccgs.iter().enumerate() {
        for b in model.cccgs.iter().skip(i + 1) {
            if a.members == b.members && a.shared_attributes == b.shared_attributes {
                out.push(Diagnostic::error(
                    "DUPLICATE_CCCG",
                    format!("CCCGs {} and {} have identical members and shared attributes", a.id, b.id),
                ));
            }
        }
    }

    if let Some(tree) = &model.tree {
        validate_tree(model, tree, &mut out);
    }

    out
}

/// Component-level validation: the subset of [`validate_model`] that makes
/// sense before any CCCGs or betas exist (used by CCCG derivation).
pub fn validate_components(components: &[Component]) -> Vec<Diagnostic> {
    let mut out = Vec::new();

    if components.is_empty() {
        out.push(Diagnostic::error("NO_COMPONENTS", "model declares no components".into()));
    }

    let mut seen: BTreeSet<&str> = BTreeSet::new();
    for component in components {
        if !seen.insert(&component.id) {
            out.push(Diagnostic::error(
                "DUPLICATE_COMPONENT",
                format!("component id {} declared more than once", component.id),
            ));
        }
        for attr in &component.attributes {
            if attr.category.trim().is_empty() || attr.value.trim().is_empty() {
                out.push(Diagnostic::error(
                    "EMPTY_ATTRIBUTE",
                    format!("component {} has an empty attribute category or value", component.id),
                ));
            }
        }
        for domain in Domain::BOTH {
            if let Some(data) = component.failure_data(domain) {
                if !(0.0..=1.0).contains(&data.q) || data.q.is_nan() {
                    out.push(Diagnostic::error(
                        "Q_OUT_OF_RANGE",
                        format!("component {} {domain} q={} outside [0,1]", component.id, data.q),
                    ));
                }
            }
        }
    }

    if let Err(DeriveError::InconsistentClassAttributes { class_id, a, b }) =
        check_class_categories(components)
    {
        out.push(Diagnostic::error(
            "CLASS_ATTR_MISMATCH",
            format!("components {a} and {b} of class {class_id} carry different attribute categories"),
        ));
    }

    out
}

fn check_class_categories(components: &[Component]) -> Result<(), DeriveError> {
    let mut class_categories: BTreeMap<&str, (&str, BTreeSet<&str>)> = BTreeMap::new();
    for component in components {
        let categories: BTreeSet<&str> =
            component.attributes.iter().map(|a| a.category.as_str()).collect();
        match class_categories.get(component.class_id.as_str()) {
            None => {
                class_categories.insert(&component.class_id, (&component.id, categories));
            }
            Some((first, cats)) if *cats != categories => {
                return Err(DeriveError::InconsistentClassAttributes {
                    class_id: component.class_id.clone(),
                    a: (*first).to_string(),
                    b: component.id.clone(),
                });
            }
            _ => {}
        }
    }
    Ok(())
}

fn validate_cccg_structure(model: &SystemModel, cccg: &Cccg, out: &mut Vec<Diagnostic>) {
    if cccg.members.len() < 2 {
        out.push(Diagnostic::error(
            "CCCG_TOO_SMALL",
            format!("CCCG {} has {} member(s); a group needs at least 2", cccg.id, cccg.members.len()),
        ));
    }

    let mut classes: BTreeSet<&str> = BTreeSet::new();
    for member in &cccg.members {
        match model.component(member) {
            None => out.push(Diagnostic::error(
                "UNKNOWN_MEMBER",
                format!("CCCG {} references unknown component {member}", cccg.id),
            )),
            Some(component) => {
                classes.insert(&component.class_id);
                for attr in &cccg.shared_attributes {
                    if !component.attributes.contains(attr) {
                        out.push(Diagnostic::error(
                            "ATTR_NOT_SHARED",
                            format!("CCCG {} lists shared attribute {attr} but member {member} does not carry it", cccg.id),
                        ));
                    }
                }
            }
        }
    }
    if classes.len() > 1 {
        out.push(Diagnostic::error(
            "MIXED_CLASS",
            format!("CCCG {} mixes component classes {:?}; groups hold identical components only", cccg.id, classes),
        ));
    }

    for domain in Domain::BOTH {
        if let Some(beta) = cccg.beta_override(domain) {
            if !(0.0..=1.0).contains(&beta) || beta.is_nan() {
                out.push(Diagnostic::error(
                    "BETA_OUT_OF_RANGE",
                    format!("CCCG {} {domain} beta override {beta} outside [0,1]", cccg.id),
                ));
            }
        }
        if let Some(sheet) = cccg.grades(domain) {
            if sheet.domain != domain {
                out.push(Diagnostic::error(
                    "GRADE_DOMAIN_MISMATCH",
                    format!("CCCG {} attaches a {} grade sheet under {domain}", cccg.id, sheet.domain),
                ));
            } else if let Some(missing) = sheet.invalid_cell() {
                out.push(Diagnostic::error(
                    "MISSING_CELL",
                    format!("CCCG {}: {missing}", cccg.id),
                ));
            }
            if cccg.beta_override(domain).is_some() {
                out.push(Diagnostic::warning(
                    "OVERRIDE_SHADOWS_GRADES",
                    format!("CCCG {} has both {domain} grades and a beta override; the override wins", cccg.id),
                ));
            }
        }
    }
}

fn validate_cccg_quantification(model: &SystemModel, cccg: &Cccg, out: &mut Vec<Diagnostic>) {
    let members: Vec<&Component> =
        cccg.members.iter().filter_map(|id| model.component(id)).collect();
    if members.is_empty() {
        return;
    }

    let domains_with_data: Vec<Domain> = Domain::BOTH
        .into_iter()
        .filter(|d| members.iter().any(|m| m.failure_data(*d).is_some()))
        .collect();

    if !domains_with_data.iter().any(|d| cccg.has_beta_source(*d)) {
        out.push(Diagnostic::error(
            "MISSING_BETA_SOURCE",
            format!("CCCG {} has no grade sheet or beta override for any domain its members carry data for", cccg.id),
        ));
    }

    for domain in Domain::BOTH {
        if cccg.has_beta_source(domain)
            && members.iter().any(|m| m.failure_data(domain).is_none())
        {
            out.push(Diagnostic::error(
                "BETA_WITHOUT_DATA",
                format!("CCCG {} has a {domain} beta but some members carry no {domain} failure data", cccg.id),
            ));
        }

        // Identical components: members must agree on per-domain data.
        let data: Vec<(&str, &FailureData)> = members
            .iter()
            .filter_map(|m| m.failure_data(domain).map(|d| (m.id.as_str(), d)))
            .collect();
        if let Some(((first_id, first), rest)) = data.split_first() {
            if domain == Domain::Software && data.len() != members.len() && !data.is_empty() {
                out.push(Diagnostic::error(
                    "MIXED_SOFTWARE",
                    format!("CCCG {}: some members carry software failure data and some do not", cccg.id),
                ));
            }
            for (id, d) in rest {
                if d.q != first.q || d.mode != first.mode {
                    out.push(Diagnostic::error(
                        "NONIDENTICAL_QT",
                        format!(
                            "CCCG {} members {first_id} and {id} differ in {domain} failure data ({} {} vs {} {})",
                            cccg.id, first.q, first.mode.as_str(), d.q, d.mode.as_str()
                        ),
                    ));
                    break;
                }
            }
        }
    }
}

fn validate_tree(model: &SystemModel, tree: &TreeNode, out: &mut Vec<Diagnostic>) {
    match tree {
        TreeNode::Component(id) => {
            if model.component(id).is_none() {
                out.push(Diagnostic::error(
                    "UNKNOWN_TREE_COMPONENT",
                    format!("fault tree references unknown component {id}"),
                ));
            }
        }
        TreeNode::Gate(gate) => {
            if let crate::faulttree::GateKind::KofN(k) = gate.kind {
                let n = gate.children.len();
                if k == 0 || k as usize > n {
                    out.push(Diagnostic::error(
                        "BAD_KOFN",
                        format!("{k}-of-{n} gate requires 1 <= k <= n"),
                    ));
                }
            } else if gate.children.is_empty() {
                out.push(Diagnostic::error("EMPTY_GATE", "gate has no children".into()));
            }
            for child in &gate.children {
                validate_tree(model, child, out);
            }
        }
    }
}
