//! Fault-tree expansion and evaluation over independent and common cause
//! basic events.
//!
//! A solved model expands into one independent basic event per
//! `(component, domain)` and one common cause event per `(CCCG, domain)`;
//! a component fails when any event covering it fires. Two evaluators are
//! provided because the additive cut-set form omits cross terms and its
//! intent (approximation vs. exact algebra) differs by use:
//!
//! * [`eval_exact`] enumerates every basic-event outcome vector and sums
//!   the probability of the failing ones. Exact up to floating point, but
//!   exponential, so it is capped at 25 events and serves as the
//!   reference oracle.
//! * [`eval_rare_event`] enumerates minimal cut sets and sums their
//!   product probabilities. This is the conventional rare-event
//!   approximation and an upper bound on the exact result; for a
//!   symmetric 2-of-3 group it reproduces the textbook
//!   `3*Q1^2 + 3*Q2 + Q3` term for term (see [`eval_symmetric_2of3`]).
//!
//! Exact enumeration partitions the outcome space into fixed chunks that
//! are summed with compensated arithmetic and combined in chunk order, so
//! parallel and sequential runs return bit-identical results.

use std::collections::{BTreeMap, BTreeSet};

use itertools::Itertools;

use crate::bfm::FailureBreakdown;
use crate::model::{Domain, SystemModel};
use crate::Parallelism;

/// Gate semantics: children are failure conditions.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum GateKind {
    And,
    Or,
    /// Fails when at least `k` children fail.
    KofN(u32),
}

#[derive(Debug, Clone, PartialEq)]
pub struct Gate {
    pub kind: GateKind,
    pub children: Vec<TreeNode>,
}

/// A fault-tree node: a component failure leaf or a logic gate.
#[derive(Debug, Clone, PartialEq)]
pub enum TreeNode {
    Component(String),
    Gate(Gate),
}

impl TreeNode {
    pub fn and(children: Vec<TreeNode>) -> TreeNode {
        TreeNode::Gate(Gate { kind: GateKind::And, children })
    }

    pub fn or(children: Vec<TreeNode>) -> TreeNode {
        TreeNode::Gate(Gate { kind: GateKind::Or, children })
    }

    pub fn k_of_n(k: u32, children: Vec<TreeNode>) -> TreeNode {
        TreeNode::Gate(Gate { kind: GateKind::KofN(k), children })
    }

    pub fn component(id: &str) -> TreeNode {
        TreeNode::Component(id.to_string())
    }

    /// Component ids referenced anywhere in the tree, sorted.
    pub fn referenced_components(&self) -> BTreeSet<&str> {
        let mut out = BTreeSet::new();
        self.collect_components(&mut out);
        out
    }

    fn collect_components<'a>(&'a self, out: &mut BTreeSet<&'a str>) {
        match self {
            TreeNode::Component(id) => {
                out.insert(id);
            }
            TreeNode::Gate(gate) => {
                for child in &gate.children {
                    child.collect_components(out);
                }
            }
        }
    }
}

/// What a basic event represents.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum EventKind {
    Independent { component_id: String, domain: Domain },
    CommonCause { cccg_id: String, domain: Domain },
}

/// One statistically independent Bernoulli event. Independent events cover
/// exactly their component; common cause events cover every member of
/// their group.
#[derive(Debug, Clone, PartialEq)]
pub struct BasicEvent {
    pub id: String,
    pub kind: EventKind,
    pub probability: f64,
    pub covered_components: BTreeSet<String>,
}

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum TreeError {
    #[error("members of CCCG {cccg} disagree on the {domain} CCF probability ({a} vs {b})")]
    InconsistentCcfProbability { cccg: String, domain: Domain, a: f64, b: f64 },
    #[error("member {member} of CCCG {cccg} has no solved {domain} breakdown")]
    MissingMemberBreakdown { cccg: String, member: String, domain: Domain },
    #[error("{events} relevant basic events exceed the exact-enumeration bound of {bound}; use the Monte Carlo evaluator")]
    TooLarge { events: usize, bound: usize },
    #[error("cut-set enumeration exceeded the configured bound of {bound}")]
    CutSetOverflow { bound: usize },
    #[error("symmetric 2-of-3 evaluation requires group size 3, got {m}")]
    NotTwoOfThree { m: u32 },
    #[error("symmetric group is missing the multiplicity-{k} probability")]
    MissingMultiplicity { k: u32 },
}

/// Relative disagreement allowed between members' views of one CCF event.
pub const CCF_AGREEMENT_TOL: f64 = 1e-12;

/// Maximum relevant events for exact enumeration.
pub const EXACT_EVENT_BOUND: usize = 25;

/// Expand solved breakdowns into basic events.
///
/// Emits one independent event per `(component, domain)` breakdown with
/// `p = Q_I`, then one common cause event per `(CCCG, domain)` with
/// `p = beta_w * Q_t`, asserting that every member reports the same value.
/// Event ids are `I:<component>:<hw|sw>` and `CCF:<cccg>:<hw|sw>`; order
/// is deterministic (independents sorted, then CCF events sorted).
pub fn expand_events(
    model: &SystemModel,
    breakdowns: &[FailureBreakdown],
) -> Result<Vec<BasicEvent>, TreeError> {
    let mut events = Vec::new();
    let mut sorted: Vec<&FailureBreakdown> = breakdowns.iter().collect();
    sorted.sort_by(|a, b| a.component_id.cmp(&b.component_id).then(a.domain.cmp(&b.domain)));

    for breakdown in &sorted {
        events.push(BasicEvent {
            id: format!("I:{}:{}", breakdown.component_id, domain_tag(breakdown.domain)),
            kind: EventKind::Independent {
                component_id: breakdown.component_id.clone(),
                domain: breakdown.domain,
            },
            probability: breakdown.q_independent,
            covered_components: [breakdown.component_id.clone()].into_iter().collect(),
        });
    }

    // Group contributions by (cccg, domain) and check member agreement.
    let mut ccf: BTreeMap<(String, Domain), (f64, BTreeSet<String>)> = BTreeMap::new();
    for breakdown in &sorted {
        for (cccg_id, p) in &breakdown.contributions {
            match ccf.entry((cccg_id.clone(), breakdown.domain)) {
                std::collections::btree_map::Entry::Vacant(e) => {
                    e.insert((*p, [breakdown.component_id.clone()].into_iter().collect()));
                }
                std::collections::btree_map::Entry::Occupied(mut e) => {
                    let (first, members) = e.get_mut();
                    let scale = first.abs().max(p.abs()).max(f64::MIN_POSITIVE);
                    if (*first - *p).abs() / scale > CCF_AGREEMENT_TOL {
                        return Err(TreeError::InconsistentCcfProbability {
                            cccg: cccg_id.clone(),
                            domain: breakdown.domain,
                            a: *first,
                            b: *p,
                        });
                    }
                    members.insert(breakdown.component_id.clone());
                }
            }
        }
    }

    for ((cccg_id, domain), (p, contributors)) in ccf {
        // The event covers the whole group; every member with a breakdown
        // in this domain must have contributed the same value.
        if let Some(group) = model.cccg(&cccg_id) {
            for member in &group.members {
                let solved = sorted
                    .iter()
                    .any(|b| b.component_id == *member && b.domain == domain);
                if solved && !contributors.contains(member) {
                    return Err(TreeError::MissingMemberBreakdown {
                        cccg: cccg_id.clone(),
                        member: member.clone(),
                        domain,
                    });
                }
            }
        }
        let covered = model
            .cccg(&cccg_id)
            .map(|g| g.members.iter().cloned().collect())
            .unwrap_or(contributors);
        events.push(BasicEvent {
            id: format!("CCF:{cccg_id}:{}", domain_tag(domain)),
            kind: EventKind::CommonCause { cccg_id, domain },
            probability: p,
            covered_components: covered,
        });
    }

    Ok(events)
}

fn domain_tag(domain: Domain) -> &'static str {
    match domain {
        Domain::Hardware => "hw",
        Domain::Software => "sw",
    }
}

/// Analytic marginal failure probability of one component: the complement
/// of all its covering events staying quiet.
pub fn component_marginal(events: &[BasicEvent], component_id: &str) -> f64 {
    1.0 - events
        .iter()
        .filter(|e| e.covered_components.contains(component_id))
        .map(|e| 1.0 - e.probability)
        .product::<f64>()
}

/// Events that can influence the tree (those covering a referenced
/// component), with their index into the original slice.
fn relevant_events<'a>(tree: &TreeNode, events: &'a [BasicEvent]) -> Vec<(usize, &'a BasicEvent)> {
    let referenced = tree.referenced_components();
    events
        .iter()
        .enumerate()
        .filter(|(_, e)| e.covered_components.iter().any(|c| referenced.contains(c.as_str())))
        .collect()
}

/// Precompiled tree: component leaves replaced by masks over the relevant
/// event indices.
enum CompiledNode {
    Leaf(u32),
    Gate(GateKind, Vec<CompiledNode>),
}

fn compile(tree: &TreeNode, masks: &BTreeMap<&str, u32>) -> CompiledNode {
    match tree {
        TreeNode::Component(id) => CompiledNode::Leaf(masks.get(id.as_str()).copied().unwrap_or(0)),
        TreeNode::Gate(gate) => CompiledNode::Gate(
            gate.kind,
            gate.children.iter().map(|c| compile(c, masks)).collect(),
        ),
    }
}

fn eval_compiled(node: &CompiledNode, fired: u32) -> bool {
    match node {
        CompiledNode::Leaf(mask) => fired & mask != 0,
        CompiledNode::Gate(kind, children) => {
            let failed = children.iter().filter(|c| eval_compiled(c, fired)).count();
            match kind {
                GateKind::And => failed == children.len(),
                GateKind::Or => failed > 0,
                GateKind::KofN(k) => failed as u32 >= *k,
            }
        }
    }
}

/// Neumaier compensated summation; input order defines the result bits.
fn compensated_sum(values: impl IntoIterator<Item = f64>) -> f64 {
    let mut sum = 0.0f64;
    let mut compensation = 0.0f64;
    for v in values {
        let t = sum + v;
        if sum.abs() >= v.abs() {
            compensation += (sum - t) + v;
        } else {
            compensation += (v - t) + sum;
        }
        sum = t;
    }
    sum + compensation
}

const EXACT_CHUNK: u64 = 1 << 16;

/// Exact system failure probability by full enumeration of basic-event
/// outcome vectors. Fails with [`TreeError::TooLarge`] above
/// [`EXACT_EVENT_BOUND`] relevant events.
pub fn eval_exact(tree: &TreeNode, events: &[BasicEvent]) -> Result<f64, TreeError> {
    eval_exact_with(tree, events, Parallelism::default())
}

/// [`eval_exact`] with an explicit execution mode; both modes return
/// bit-identical sums.
pub fn eval_exact_with(
    tree: &TreeNode,
    events: &[BasicEvent],
    parallelism: Parallelism,
) -> Result<f64, TreeError> {
    let relevant = relevant_events(tree, events);
    let n = relevant.len();
    if n > EXACT_EVENT_BOUND {
        return Err(TreeError::TooLarge { events: n, bound: EXACT_EVENT_BOUND });
    }

    let p_fire: Vec<f64> = relevant.iter().map(|(_, e)| e.probability).collect();
    let p_quiet: Vec<f64> = p_fire.iter().map(|p| 1.0 - p).collect();

    let mut masks: BTreeMap<&str, u32> = BTreeMap::new();
    for (bit, (_, event)) in relevant.iter().enumerate() {
        for component in &event.covered_components {
            *masks.entry(component.as_str()).or_insert(0) |= 1 << bit;
        }
    }
    let compiled = compile(tree, &masks);

    let total: u64 = 1u64 << n;
    let chunk_sum = |start: u64, end: u64| -> f64 {
        compensated_sum((start..end).filter_map(|outcome| {
            let fired = outcome as u32;
            if !eval_compiled(&compiled, fired) {
                return None;
            }
            let mut p = 1.0f64;
            for (bit, (pf, pq)) in p_fire.iter().zip(&p_quiet).enumerate() {
                p *= if fired >> bit & 1 == 1 { *pf } else { *pq };
            }
            Some(p)
        }))
    };

    let chunks: Vec<(u64, u64)> = (0..total)
        .step_by(EXACT_CHUNK as usize)
        .map(|start| (start, (start + EXACT_CHUNK).min(total)))
        .collect();

    let partials: Vec<f64> = match parallelism {
        Parallelism::Sequential => chunks.iter().map(|(s, e)| chunk_sum(*s, *e)).collect(),
        #[cfg(feature = "parallel")]
        Parallelism::Rayon => {
            use rayon::prelude::*;
            chunks.par_iter().map(|(s, e)| chunk_sum(*s, *e)).collect()
        }
    };
    Ok(compensated_sum(partials))
}

/// Result of the rare-event evaluation: the raw cut-set sum (not clamped,
/// so values above one are visible to the caller) and the minimal cut
/// sets as sorted lists of event ids.
#[derive(Debug, Clone, PartialEq)]
pub struct RareEventResult {
    pub probability: f64,
    pub cut_sets: Vec<Vec<String>>,
}

impl RareEventResult {
    /// The additive form can exceed one when events are not rare; reports
    /// should clamp and warn while keeping the raw value for audit.
    pub fn exceeds_unity(&self) -> bool {
        self.probability > 1.0
    }

    /// Export form: one cut set per line, event ids comma-separated,
    /// lines sorted by size then lexicographically.
    pub fn export(&self) -> String {
        let mut out = String::new();
        for cut in &self.cut_sets {
            out.push_str(&cut.join(","));
            out.push('\n');
        }
        out
    }
}

/// System failure probability as the sum over minimal cut sets of the
/// product of their event probabilities, an upper bound on [`eval_exact`].
pub fn eval_rare_event(
    tree: &TreeNode,
    events: &[BasicEvent],
    bound: usize,
) -> Result<RareEventResult, TreeError> {
    let relevant = relevant_events(tree, events);

    let mut covering: BTreeMap<&str, Vec<u16>> = BTreeMap::new();
    for (local, (_, event)) in relevant.iter().enumerate() {
        for component in &event.covered_components {
            covering.entry(component.as_str()).or_default().push(local as u16);
        }
    }

    let cuts = cut_sets(tree, &covering, bound)?;

    // Sort by event-id order for a deterministic sum and export.
    let mut named: Vec<(Vec<String>, f64)> = cuts
        .into_iter()
        .map(|cut| {
            let p = cut.iter().map(|i| relevant[*i as usize].1.probability).product();
            let mut ids: Vec<String> =
                cut.iter().map(|i| relevant[*i as usize].1.id.clone()).collect();
            ids.sort();
            (ids, p)
        })
        .collect();
    named.sort_by(|a, b| a.0.len().cmp(&b.0.len()).then_with(|| a.0.cmp(&b.0)));

    let probability = compensated_sum(named.iter().map(|(_, p)| *p));
    Ok(RareEventResult {
        probability,
        cut_sets: named.into_iter().map(|(ids, _)| ids).collect(),
    })
}

/// Sorted event-index set; subset tests run on the sorted representation.
type Cut = Vec<u16>;

fn is_subset(a: &Cut, b: &Cut) -> bool {
    if a.len() > b.len() {
        return false;
    }
    let mut it = b.iter();
    'outer: for x in a {
        for y in it.by_ref() {
            if y == x {
                continue 'outer;
            }
            if y > x {
                return false;
            }
        }
        return false;
    }
    true
}

fn minimize(mut cuts: Vec<Cut>) -> Vec<Cut> {
    cuts.sort_by(|a, b| a.len().cmp(&b.len()).then_with(|| a.cmp(b)));
    cuts.dedup();
    let mut kept: Vec<Cut> = Vec::new();
    for cut in cuts {
        if !kept.iter().any(|k| is_subset(k, &cut)) {
            kept.push(cut);
        }
    }
    kept
}

fn union(a: &Cut, b: &Cut) -> Cut {
    let mut out = Vec::with_capacity(a.len() + b.len());
    let (mut i, mut j) = (0, 0);
    while i < a.len() && j < b.len() {
        match a[i].cmp(&b[j]) {
            std::cmp::Ordering::Less => {
                out.push(a[i]);
                i += 1;
            }
            std::cmp::Ordering::Greater => {
                out.push(b[j]);
                j += 1;
            }
            std::cmp::Ordering::Equal => {
                out.push(a[i]);
                i += 1;
                j += 1;
            }
        }
    }
    out.extend_from_slice(&a[i..]);
    out.extend_from_slice(&b[j..]);
    out
}

/// Top-down cut-set generation. A component with no covering events never
/// fails, which surfaces as an empty cut list; the set algebra then prunes
/// it correctly through AND/OR gates.
fn cut_sets(
    tree: &TreeNode,
    covering: &BTreeMap<&str, Vec<u16>>,
    bound: usize,
) -> Result<Vec<Cut>, TreeError> {
    match tree {
        TreeNode::Component(id) => Ok(covering
            .get(id.as_str())
            .map(|events| events.iter().map(|e| vec![*e]).collect())
            .unwrap_or_default()),
        TreeNode::Gate(gate) => {
            let children: Vec<Vec<Cut>> = gate
                .children
                .iter()
                .map(|c| cut_sets(c, covering, bound))
                .collect::<Result<_, _>>()?;
            let combined = match gate.kind {
                GateKind::Or => children.into_iter().concat(),
                GateKind::And => and_product(children, bound)?,
                GateKind::KofN(k) => {
                    let mut all = Vec::new();
                    for combo in children.iter().combinations(k as usize) {
                        let product =
                            and_product(combo.into_iter().cloned().collect(), bound)?;
                        all.extend(product);
                        if all.len() > bound {
                            return Err(TreeError::CutSetOverflow { bound });
                        }
                    }
                    all
                }
            };
            if combined.len() > bound {
                return Err(TreeError::CutSetOverflow { bound });
            }
            Ok(minimize(combined))
        }
    }
}

fn and_product(children: Vec<Vec<Cut>>, bound: usize) -> Result<Vec<Cut>, TreeError> {
    let mut acc: Vec<Cut> = vec![Vec::new()];
    for child in children {
        if child.is_empty() {
            // One conjunct can never fail: the whole AND can never fail.
            return Ok(Vec::new());
        }
        let mut next = Vec::with_capacity(acc.len() * child.len());
        for a in &acc {
            for b in &child {
                next.push(union(a, b));
                if next.len() > bound {
                    return Err(TreeError::CutSetOverflow { bound });
                }
            }
        }
        acc = minimize(next);
    }
    Ok(acc)
}

/// Symmetric group probabilities: `q[k]` is the probability of the event
/// failing exactly that multiplicity-`k` combination.
#[derive(Debug, Clone, PartialEq)]
pub struct SymmetricGroup {
    pub m: u32,
    pub q: BTreeMap<u32, f64>,
}

impl SymmetricGroup {
    pub fn new(m: u32, q: impl IntoIterator<Item = (u32, f64)>) -> Self {
        SymmetricGroup { m, q: q.into_iter().collect() }
    }
}

/// Closed-form 2-of-3 failure probability under the symmetry assumption:
/// three independent pairs, three pairwise CCFs, one triple CCF, i.e.
/// `3*Q1^2 + 3*Q2 + Q3`. Additive, so results above one are returned raw
/// for the caller to flag.
pub fn eval_symmetric_2of3(group: &SymmetricGroup) -> Result<f64, TreeError> {
    if group.m != 3 {
        return Err(TreeError::NotTwoOfThree { m: group.m });
    }
    let q = |k: u32| {
        group
            .q
            .get(&k)
            .copied()
            .ok_or(TreeError::MissingMultiplicity { k })
    };
    let (q1, q2, q3) = (q(1)?, q(2)?, q(3)?);
    Ok(3.0 * q1 * q1 + 3.0 * q2 + q3)
}
