//! Forward best-first search: A* and greedy best-first.
//!
//! Open-list order is f (A*) or h (GBFS), then lower g, then insertion
//! order, which makes results reproducible. States are deduplicated with a
//! hashed closed set; A* reopens a state when it is reached more cheaply.

use std::cmp::Reverse;
use std::collections::hash_map::Entry;
use std::collections::{BinaryHeap, HashMap};
use std::fmt;
use std::time::{Duration, Instant};

use tracing::debug;

use crate::ground::GroundedTask;
use crate::heuristic::Heuristic;
use crate::plan::{Plan, PlanStep};
use crate::state::{applicable, apply, State};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Algorithm {
    AStar,
    Gbfs,
}

impl fmt::Display for Algorithm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Algorithm::AStar => "astar",
            Algorithm::Gbfs => "gbfs",
        })
    }
}

impl std::str::FromStr for Algorithm {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        match s {
            "astar" => Ok(Algorithm::AStar),
            "gbfs" => Ok(Algorithm::Gbfs),
            other => Err(format!("unknown algorithm `{other}` (expected astar or gbfs)")),
        }
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct Limits {
    pub max_expansions: Option<u64>,
    pub max_seconds: Option<f64>,
}

#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct SearchStats {
    pub expansions: u64,
    pub generated: u64,
    pub evaluated: u64,
    pub seconds: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub enum SearchOutcome {
    Plan(Plan),
    /// The open list emptied: no plan exists.
    NoPlan,
    LimitHit,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SearchResult {
    pub outcome: SearchOutcome,
    pub stats: SearchStats,
}

impl SearchResult {
    pub fn plan(&self) -> Option<&Plan> {
        match &self.outcome {
            SearchOutcome::Plan(p) => Some(p),
            _ => None,
        }
    }
}

struct Node {
    state: State,
    parent: Option<(usize, usize)>,
}

/// Reconstructs the plan ending at `node`.
pub(crate) fn extract_plan(
    task: &GroundedTask,
    mut node: usize,
    parent_of: impl Fn(usize) -> Option<(usize, usize)>,
) -> Plan {
    let mut actions = Vec::new();
    while let Some((parent, action)) = parent_of(node) {
        actions.push(action);
        node = parent;
    }
    actions.reverse();
    let steps: Vec<PlanStep> = actions
        .iter()
        .map(|&i| {
            let a = &task.actions[i];
            PlanStep::new(&a.name, &a.args)
        })
        .collect();
    let total_cost = actions.iter().map(|&i| task.actions[i].cost).sum();
    Plan { steps, total_cost }
}

pub fn search(task: &GroundedTask, algorithm: Algorithm, heuristic: Heuristic, limits: Limits) -> SearchResult {
    let start = Instant::now();
    let deadline = limits.max_seconds.map(|s| start + Duration::from_secs_f64(s.max(0.0)));
    let mut stats = SearchStats::default();
    let finish = |outcome, mut stats: SearchStats| {
        stats.seconds = start.elapsed().as_secs_f64();
        debug!(?stats, "search finished");
        SearchResult { outcome, stats }
    };

    let mut nodes: Vec<Node> = Vec::new();
    let mut best_g: HashMap<State, u64> = HashMap::new();
    // (primary key, g, insertion sequence, node index), smallest first.
    let mut open: BinaryHeap<Reverse<(u64, u64, u64, usize)>> = BinaryHeap::new();
    let mut seq = 0u64;

    stats.evaluated += 1;
    let Some(h0) = heuristic.evaluate(&task.init, task) else {
        return finish(SearchOutcome::NoPlan, stats);
    };
    nodes.push(Node {
        state: task.init.clone(),
        parent: None,
    });
    best_g.insert(task.init.clone(), 0);
    open.push(Reverse((h0, 0, seq, 0)));

    while let Some(Reverse((_, g, _, idx))) = open.pop() {
        if best_g.get(&nodes[idx].state).is_some_and(|&b| b < g) {
            continue;
        }
        if task.is_goal(&nodes[idx].state) {
            let plan = extract_plan(task, idx, |i| nodes[i].parent);
            return finish(SearchOutcome::Plan(plan), stats);
        }
        if limits.max_expansions.is_some_and(|m| stats.expansions >= m)
            || deadline.is_some_and(|d| Instant::now() >= d)
        {
            return finish(SearchOutcome::LimitHit, stats);
        }
        stats.expansions += 1;

        for (ai, action) in task.actions.iter().enumerate() {
            if !applicable(&nodes[idx].state, action) {
                continue;
            }
            let next = apply(&nodes[idx].state, action);
            let ng = g + action.cost;
            stats.generated += 1;
            match best_g.entry(next.clone()) {
                Entry::Occupied(mut e) => {
                    // GBFS never reopens; A* reopens on a strictly better g.
                    if algorithm == Algorithm::Gbfs || *e.get() <= ng {
                        continue;
                    }
                    e.insert(ng);
                }
                Entry::Vacant(e) => {
                    e.insert(ng);
                }
            }
            stats.evaluated += 1;
            let Some(h) = heuristic.evaluate(&next, task) else {
                continue;
            };
            let key = match algorithm {
                Algorithm::AStar => ng + h,
                Algorithm::Gbfs => h,
            };
            seq += 1;
            nodes.push(Node {
                state: next,
                parent: Some((idx, ai)),
            });
            open.push(Reverse((key, ng, seq, nodes.len() - 1)));
        }
    }
    finish(SearchOutcome::NoPlan, stats)
}
