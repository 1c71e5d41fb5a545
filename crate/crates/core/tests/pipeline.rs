//! End-to-end library pipeline: derive groups from attributes, solve the
//! multi-group split, expand basic events, and confirm the three
//! evaluators (exact, rare-event, Monte Carlo) agree on a nontrivial
//! voting system — including bit-identical parallel/sequential execution.

use ccfq_core::faulttree::{self, TreeNode};
use ccfq_core::model::{
    derive_cccgs, validate_model, Component, CouplingAttribute, Domain, FailureData, InputMode,
    SolverOptions, SystemModel,
};
use ccfq_core::simulate::{self, McConfig};
use ccfq_core::{bfm, Parallelism};

/// Two divisions of two processors each, division-level coupling plus a
/// group-wide software group, voting 2-of-4.
fn build_model() -> SystemModel {
    let mut components = Vec::new();
    for division in ["north", "south"] {
        for unit in [1, 2] {
            components.push(Component {
                id: format!("P-{division}-{unit}"),
                class_id: "P".to_string(),
                attributes: [
                    CouplingAttribute::new("software", "app"),
                    CouplingAttribute::new("division", division),
                ]
                .into_iter()
                .collect(),
                hardware: FailureData { q: 0.02, mode: InputMode::TotalGiven },
                software: None,
            });
        }
    }
    let mut cccgs = derive_cccgs(&components).unwrap();
    assert_eq!(cccgs.len(), 3, "one group-wide group plus two division pairs");
    for cccg in &mut cccgs {
        cccg.hardware_beta = Some(if cccg.members.len() == 4 { 0.15 } else { 0.25 });
    }
    let tree = TreeNode::k_of_n(
        2,
        components.iter().map(|c| TreeNode::component(&c.id)).collect(),
    );
    SystemModel { components, cccgs, tree: Some(tree), options: SolverOptions::default() }
}

#[test]
fn pipeline_evaluators_agree() {
    let model = build_model();
    assert!(validate_model(&model).is_empty());

    let breakdowns = bfm::solve_all(&model).unwrap();
    assert_eq!(breakdowns.len(), 4);
    for b in &breakdowns {
        let sum = b.q_independent + b.dependent_total();
        assert!((sum - b.q_total).abs() <= 1e-12 * b.q_total);
    }

    let events = faulttree::expand_events(&model, &breakdowns).unwrap();
    // 4 independents + group-wide CCF + 2 division CCFs.
    assert_eq!(events.len(), 7);

    let tree = model.tree.as_ref().unwrap();
    let exact_seq = faulttree::eval_exact_with(tree, &events, Parallelism::Sequential).unwrap();
    #[cfg(feature = "parallel")]
    {
        let exact_par = faulttree::eval_exact_with(tree, &events, Parallelism::Rayon).unwrap();
        assert_eq!(exact_seq.to_bits(), exact_par.to_bits());
    }

    let rare = faulttree::eval_rare_event(tree, &events, 100_000).unwrap();
    assert!(rare.probability >= exact_seq);
    assert!((rare.probability - exact_seq) / exact_seq < 0.05, "rare regime approximation");

    let config = McConfig { seed: 2024, replications: 400_000, confidence_level: 0.95 };
    let mc_seq = simulate::simulate_system_with(tree, &events, &config, Parallelism::Sequential);
    #[cfg(feature = "parallel")]
    {
        let mc_par = simulate::simulate_system_with(tree, &events, &config, Parallelism::Rayon);
        assert_eq!(mc_seq, mc_par, "replication partitioning must not matter");
    }
    let sigma = (exact_seq * (1.0 - exact_seq) / config.replications as f64).sqrt();
    assert!(
        (mc_seq.point - exact_seq).abs() <= 4.0 * sigma,
        "mc {} vs exact {exact_seq}",
        mc_seq.point
    );

    // Marginals: sampled per-component frequency matches the analytic
    // event composition.
    let marginals = simulate::simulate_component_marginals(&events, &config);
    for component in &model.components {
        let analytic = faulttree::component_marginal(&events, &component.id);
        let estimate = marginals[&component.id];
        assert!(
            estimate.ci_low <= analytic && analytic <= estimate.ci_high,
            "{}: analytic {analytic} outside [{}, {}]",
            component.id,
            estimate.ci_low,
            estimate.ci_high
        );
    }
}
