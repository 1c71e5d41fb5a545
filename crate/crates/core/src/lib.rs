//! Common cause failure quantification for redundant digital I&C
//! components.
//!
//! The pipeline: derive common cause component groups (CCCGs) from
//! coupling-factor attributes ([`model`]), estimate per-group beta factors
//! from qualitative sub-factor grades ([`scoring`]), split each
//! component's failure probability across its groups ([`bfm`]), expand the
//! result into independent and common cause basic events and evaluate
//! system fault-tree logic exactly or by rare-event cut sets
//! ([`faulttree`]), and cross-check everything against a seeded Monte
//! Carlo oracle ([`simulate`]). [`report`] renders the audit tables.
//!
//! Data-parallel paths (exact enumeration, Monte Carlo replications,
//! whole-model solving) run on rayon under the default `parallel` feature
//! and are constructed to produce bit-identical results to the sequential
//! fallback.

pub mod bfm;
pub mod faulttree;
pub mod model;
pub mod report;
pub mod rng;
pub mod scoring;
pub mod simulate;

/// Execution mode for the data-parallel evaluators. Results are
/// bit-identical across modes; this is purely a performance knob.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Parallelism {
    Sequential,
    #[cfg(feature = "parallel")]
    Rayon,
}

impl Default for Parallelism {
    fn default() -> Self {
        #[cfg(feature = "parallel")]
        {
            Parallelism::Rayon
        }
        #[cfg(not(feature = "parallel"))]
        {
            Parallelism::Sequential
        }
    }
}
