//! Deciding finiteness of a term's tree language.
//!
//! Every judgment class that a derivation of the root goal could use is
//! generated bottom-up together with the weighted rule instances deriving
//! it. The language is infinite exactly when derivations of the goal have
//! unbounded counters, which on this hypergraph means a reachable cycle
//! that raises the counter. Such a cycle is unrolled into a concrete
//! derivation whose pump is then confirmed by [`detect_pump`].

mod analysis;
mod derivation;
mod saturate;
mod search;

use std::collections::BTreeMap;

use thiserror::Error;

pub use derivation::{
    counter_vanishes_without_top_marker, detect_pump, env_markers_accounted, extract_tree_order0, splice, Derivation,
    Pump, Rule,
};
pub use search::DerivationStream;

use crate::term::{NodeId, TermStore};
use crate::types::{FullType, JudgmentClass, TypeEnv, TypeError};
use analysis::Analysis;

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SearchConfig {
    /// How often one class may occur on a root-to-leaf branch of a
    /// searched derivation. At least 2 is needed to see a pump.
    pub branch_occurrence_cap: usize,
    /// Largest number of operand premisses in one application.
    pub max_operand_premisses: usize,
    /// Largest number of marker-free argument types added when an
    /// abstraction is applied to more than its body uses.
    pub max_weakening_extras: usize,
    /// Largest full-type space enumerated for a variable in exhaustive mode.
    pub fulltype_enumeration_limit: usize,
    pub max_derivation_nodes: usize,
    pub max_classes: usize,
    /// Largest number of premiss combinations tried for one rule instance.
    pub max_combinations: usize,
    pub max_search_frontier: usize,
    /// Enumerate every full type for variables instead of those that
    /// operands actually provide, and fail instead of truncating.
    pub exhaustive: bool,
}

impl Default for SearchConfig {
    fn default() -> Self {
        SearchConfig {
            branch_occurrence_cap: 3,
            max_operand_premisses: 6,
            max_weakening_extras: 3,
            fulltype_enumeration_limit: 4096,
            max_derivation_nodes: 10_000,
            max_classes: 200_000,
            max_combinations: 100_000,
            max_search_frontier: 2_000_000,
            exhaustive: false,
        }
    }
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum FinitenessError {
    #[error("invalid search configuration: {0}")]
    Config(String),
    #[error("search limit reached: {0}")]
    ResourceLimit(String),
    #[error(transparent)]
    Type(#[from] TypeError),
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Decision {
    Finite {
        /// Whether the goal has any derivation at all; if not, the
        /// language is empty.
        root_derivable: bool,
        /// Largest counter of a goal derivation.
        max_counter: u64,
    },
    Infinite {
        pump: Pump,
        derivation: Derivation,
    },
    Inconclusive {
        reason: String,
    },
}

/// The judgment whose derivations correspond to trees of the language:
/// `ε ⊢ root : (m, ∅, ∅, o)` for the complexity `m` of the root.
pub fn root_goal(store: &TermStore, root: NodeId) -> JudgmentClass {
    JudgmentClass {
        env: TypeEnv::empty(),
        subject: root,
        fulltype: FullType::goal(store.complexity(root)),
    }
}

fn validate(store: &TermStore, goal: &JudgmentClass, config: &SearchConfig) -> Result<(), FinitenessError> {
    if config.branch_occurrence_cap < 2 {
        return Err(FinitenessError::Config(
            "the branch occurrence cap must be at least 2 to expose a pump".into(),
        ));
    }
    if !store.is_closed(goal.subject) {
        return Err(FinitenessError::Config("the goal subject must be closed".into()));
    }
    if store.order(goal.subject) > goal.fulltype.order {
        return Err(FinitenessError::Config("the goal order is below the subject's order".into()));
    }
    Ok(())
}

struct Prepared {
    graph: saturate::Hypergraph,
    analysis: Analysis,
    goal: Option<usize>,
}

fn prepare(store: &TermStore, goal: &JudgmentClass, config: &SearchConfig) -> Result<Prepared, FinitenessError> {
    validate(store, goal, config)?;
    let graph = saturate::saturate(store, goal.subject, goal.fulltype.order, config)?;
    if config.exhaustive {
        if let Some(limit) = &graph.truncated {
            return Err(FinitenessError::ResourceLimit(limit.clone()));
        }
    }
    let id = graph.class_id(goal);
    let analysis = Analysis::new(&graph, id);
    Ok(Prepared {
        graph,
        analysis,
        goal: id,
    })
}

/// Least counter of every derivable judgment class about subterms of the
/// goal's subject, at the goal's order.
pub fn min_counter_table(
    store: &TermStore,
    goal: &JudgmentClass,
    config: &SearchConfig,
) -> Result<BTreeMap<JudgmentClass, u64>, FinitenessError> {
    let prepared = prepare(store, goal, config)?;
    Ok(prepared
        .graph
        .classes
        .iter()
        .zip(&prepared.analysis.min)
        .filter_map(|(c, m)| m.map(|m| (c.clone(), m)))
        .collect())
}

/// Derivations of `goal`, lazily, in nondecreasing order of counter.
pub fn search_derivations<'s>(
    store: &'s TermStore,
    goal: &JudgmentClass,
    config: &SearchConfig,
) -> Result<DerivationStream<'s>, FinitenessError> {
    let prepared = prepare(store, goal, config)?;
    Ok(DerivationStream::new(
        store,
        prepared.graph,
        prepared.analysis,
        prepared.goal,
        config,
    ))
}

/// Decides whether the tree language of the closed ground term `root` is
/// finite.
pub fn decide_finiteness(store: &TermStore, root: NodeId, config: &SearchConfig) -> Result<Decision, FinitenessError> {
    let goal = root_goal(store, root);
    let prepared = prepare(store, &goal, config)?;
    let Prepared { graph, analysis, goal: goal_id } = prepared;

    let Some(g) = goal_id.filter(|&g| analysis.min[g].is_some()) else {
        return Ok(match &graph.truncated {
            Some(limit) => Decision::Inconclusive {
                reason: format!("no derivation found before a limit was hit: {limit}"),
            },
            None => Decision::Finite {
                root_derivable: false,
                max_counter: 0,
            },
        });
    };

    if let Some(edge) = analysis.gainful_edge(&graph) {
        for rounds in 1..=2 {
            let Some(plan) = analysis.pump_plan(&graph, g, edge, rounds) else {
                break;
            };
            let derivation = analysis::materialize(store, &graph, &plan)?;
            if let Some(pump) = detect_pump(&derivation) {
                return Ok(Decision::Infinite { pump, derivation });
            }
        }
        // fall back to enumeration
        let stream = DerivationStream::new(store, graph, analysis, Some(g), config);
        for derivation in stream.take(10_000) {
            if let Some(pump) = detect_pump(&derivation) {
                return Ok(Decision::Infinite { pump, derivation });
            }
        }
        return Ok(Decision::Inconclusive {
            reason: "a counter-raising cycle exists but no pumped derivation was built".into(),
        });
    }

    if let Some(limit) = &graph.truncated {
        return Ok(Decision::Inconclusive {
            reason: format!("no pump found, but a limit was hit: {limit}"),
        });
    }
    Ok(Decision::Finite {
        root_derivable: true,
        max_counter: analysis.max_counter(&graph, g),
    })
}
