//! Seeded Monte Carlo oracle for the analytic evaluators.
//!
//! Per replication, every basic event is drawn independently from its
//! Bernoulli probability; a component fails when any covering event fired,
//! and the tree is evaluated on the component states. Because each
//! replication draws from its own counter-based stream (see
//! [`crate::rng`]) and the reduction is integer counting, the estimate is
//! bit-identical for any thread count and any replication partitioning.

use std::collections::BTreeMap;

use statrs::distribution::{Beta, ContinuousCDF, Normal};

use crate::faulttree::{BasicEvent, TreeNode};
use crate::rng::Stream;
use crate::Parallelism;

/// Monte Carlo settings.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct McConfig {
    pub seed: u64,
    pub replications: u64,
    pub confidence_level: f64,
}

impl Default for McConfig {
    fn default() -> Self {
        McConfig { seed: 0, replications: 100_000, confidence_level: 0.95 }
    }
}

/// A finished estimate with its sampling uncertainty.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct McEstimate {
    pub point: f64,
    pub std_error: f64,
    pub ci_low: f64,
    pub ci_high: f64,
    pub replications: u64,
    pub seed: u64,
}

impl McEstimate {
    fn from_count(failures: u64, config: &McConfig) -> Self {
        let n = config.replications as f64;
        let p = failures as f64 / n;
        let std_error = (p * (1.0 - p) / n).sqrt();
        let (ci_low, ci_high) = confidence_interval(failures, config);
        McEstimate {
            point: p,
            std_error,
            ci_low,
            ci_high,
            replications: config.replications,
            seed: config.seed,
        }
    }

    /// One-line record: name, point, stderr, ci_low, ci_high, n, seed.
    pub fn record_line(&self, name: &str) -> String {
        format!(
            "{name} {:e} {:e} {:e} {:e} {} {}",
            self.point, self.std_error, self.ci_low, self.ci_high, self.replications, self.seed
        )
    }
}

/// Two-sided interval for a binomial proportion.
///
/// Normal approximation in the bulk; exact binomial (Clopper-Pearson via
/// beta quantiles) once fewer than 10 successes or failures are observed,
/// where the normal approximation is unreliable. All-zero and all-one
/// counts return the degenerate point interval: with the observed data the
/// sample carries no variance, and the oracle's fixtures pin that case.
fn confidence_interval(failures: u64, config: &McConfig) -> (f64, f64) {
    let n = config.replications;
    let level = config.confidence_level;
    let alpha = 1.0 - level;
    let k = failures;
    let p = k as f64 / n as f64;

    if k == 0 || k == n {
        return (p, p);
    }
    if k.min(n - k) < 10 {
        // Clopper-Pearson bounds.
        let low = Beta::new(k as f64, (n - k + 1) as f64)
            .map(|d| d.inverse_cdf(alpha / 2.0))
            .unwrap_or(0.0);
        let high = Beta::new((k + 1) as f64, (n - k) as f64)
            .map(|d| d.inverse_cdf(1.0 - alpha / 2.0))
            .unwrap_or(1.0);
        return (low, high);
    }
    let z = Normal::standard().inverse_cdf(1.0 - alpha / 2.0);
    let se = (p * (1.0 - p) / n as f64).sqrt();
    ((p - z * se).max(0.0), (p + z * se).min(1.0))
}

/// One replication's event outcomes, drawn from the stream keyed by
/// `(seed, replication)`. Events are drawn in slice order.
pub fn sample_events(events: &[BasicEvent], seed: u64, replication: u64) -> Vec<bool> {
    let mut stream = Stream::keyed(seed, replication);
    events.iter().map(|e| stream.bernoulli(e.probability)).collect()
}

fn tree_fails_under(tree: &TreeNode, events: &[BasicEvent], fired: &[bool]) -> bool {
    match tree {
        TreeNode::Component(id) => events
            .iter()
            .zip(fired)
            .any(|(e, f)| *f && e.covered_components.contains(id)),
        TreeNode::Gate(gate) => {
            let count = gate
                .children
                .iter()
                .filter(|c| tree_fails_under(c, events, fired))
                .count();
            match gate.kind {
                crate::faulttree::GateKind::And => count == gate.children.len(),
                crate::faulttree::GateKind::Or => count > 0,
                crate::faulttree::GateKind::KofN(k) => count as u32 >= k,
            }
        }
    }
}

fn count_failures(
    tree: &TreeNode,
    events: &[BasicEvent],
    config: &McConfig,
    parallelism: Parallelism,
) -> u64 {
    let one = |replication: u64| -> u64 {
        let fired = sample_events(events, config.seed, replication);
        u64::from(tree_fails_under(tree, events, &fired))
    };
    match parallelism {
        Parallelism::Sequential => (0..config.replications).map(one).sum(),
        #[cfg(feature = "parallel")]
        Parallelism::Rayon => {
            use rayon::prelude::*;
            (0..config.replications).into_par_iter().map(one).sum()
        }
    }
}

/// Estimate the system failure probability of `tree` under `events`.
pub fn simulate_system(tree: &TreeNode, events: &[BasicEvent], config: &McConfig) -> McEstimate {
    simulate_system_with(tree, events, config, Parallelism::default())
}

/// [`simulate_system`] with an explicit execution mode; the two modes
/// count the same replications and return identical estimates.
pub fn simulate_system_with(
    tree: &TreeNode,
    events: &[BasicEvent],
    config: &McConfig,
    parallelism: Parallelism,
) -> McEstimate {
    let failures = count_failures(tree, events, config, parallelism);
    McEstimate::from_count(failures, config)
}

/// Per-component marginal failure frequency, for checking sampled
/// marginals against the analytic event composition
/// `1 - (1 - Q_I) * prod(1 - beta_w * Q_t)`.
pub fn simulate_component_marginals(
    events: &[BasicEvent],
    config: &McConfig,
) -> BTreeMap<String, McEstimate> {
    simulate_component_marginals_with(events, config, Parallelism::default())
}

pub fn simulate_component_marginals_with(
    events: &[BasicEvent],
    config: &McConfig,
    parallelism: Parallelism,
) -> BTreeMap<String, McEstimate> {
    let components: Vec<&str> = {
        let mut set: Vec<&str> = events
            .iter()
            .flat_map(|e| e.covered_components.iter().map(String::as_str))
            .collect();
        set.sort_unstable();
        set.dedup();
        set
    };

    let one = |replication: u64| -> Vec<u64> {
        let fired = sample_events(events, config.seed, replication);
        components
            .iter()
            .map(|c| {
                u64::from(events.iter().zip(&fired).any(|(e, f)| {
                    *f && e.covered_components.contains(*c)
                }))
            })
            .collect()
    };
    let add = |mut a: Vec<u64>, b: Vec<u64>| -> Vec<u64> {
        for (x, y) in a.iter_mut().zip(b) {
            *x += y;
        }
        a
    };

    let zero = vec![0u64; components.len()];
    let counts: Vec<u64> = match parallelism {
        Parallelism::Sequential => (0..config.replications).map(one).fold(zero, add),
        #[cfg(feature = "parallel")]
        Parallelism::Rayon => {
            use rayon::prelude::*;
            (0..config.replications)
                .into_par_iter()
                .map(one)
                .reduce(|| vec![0u64; components.len()], add)
        }
    };

    components
        .into_iter()
        .zip(counts)
        .map(|(c, k)| (c.to_string(), McEstimate::from_count(k, config)))
        .collect()
}
