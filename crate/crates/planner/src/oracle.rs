//! Exhaustive uniform-cost search, used as a reference for optimal costs.
//!
//! Shares nothing with [`crate::search`] beyond the transition function, so
//! the two can check each other.

use std::cmp::Reverse;
use std::collections::{BinaryHeap, HashMap};

use crate::ground::GroundedTask;
use crate::plan::Plan;
use crate::search::extract_plan;
use crate::state::{applicable, apply, State};

pub const DEFAULT_MAX_STATES: usize = 1_000_000;

#[derive(Debug, Clone, PartialEq)]
pub enum OracleOutcome {
    Optimal(Plan),
    NoPlan,
    /// More than `max_states` distinct states were reached.
    LimitHit { states: usize },
}

/// Dijkstra over the reachable state graph; plain breadth-first order when
/// all costs are 1.
pub fn bfs_oracle(task: &GroundedTask, max_states: usize) -> OracleOutcome {
    let mut states: Vec<State> = vec![task.init.clone()];
    let mut parent: Vec<Option<(usize, usize)>> = vec![None];
    let mut dist: HashMap<State, (u64, usize)> = HashMap::new();
    dist.insert(task.init.clone(), (0, 0));
    let mut frontier = BinaryHeap::new();
    frontier.push(Reverse((0u64, 0usize)));
    let mut settled = vec![false];

    while let Some(Reverse((d, idx))) = frontier.pop() {
        if settled[idx] {
            continue;
        }
        settled[idx] = true;
        if task.is_goal(&states[idx]) {
            return OracleOutcome::Optimal(extract_plan(task, idx, |i| parent[i]));
        }
        for (ai, a) in task.actions.iter().enumerate() {
            if !applicable(&states[idx], a) {
                continue;
            }
            let next = apply(&states[idx], a);
            let nd = d + a.cost;
            match dist.get_mut(&next) {
                Some((best, j)) => {
                    if nd < *best && !settled[*j] {
                        *best = nd;
                        parent[*j] = Some((idx, ai));
                        frontier.push(Reverse((nd, *j)));
                    }
                }
                None => {
                    if states.len() >= max_states {
                        return OracleOutcome::LimitHit { states: states.len() };
                    }
                    let j = states.len();
                    states.push(next.clone());
                    parent.push(Some((idx, ai)));
                    settled.push(false);
                    dist.insert(next, (nd, j));
                    frontier.push(Reverse((nd, j)));
                }
            }
        }
    }
    OracleOutcome::NoPlan
}
