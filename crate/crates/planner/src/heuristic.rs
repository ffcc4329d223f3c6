//! Delete-relaxation heuristics.
//!
//! Both estimates come from one generalized Dijkstra pass over atoms: an
//! atom's cost is 0 when it holds, otherwise the cheapest achiever's cost;
//! an action's cost is its own cost plus the max (h_max) or sum (h_add) of
//! its positive preconditions. Negative literals are ignored, which keeps
//! h_max admissible.

use std::cmp::Reverse;
use std::collections::BinaryHeap;
use std::fmt;

use crate::ground::GroundedTask;
use crate::state::State;

/// A heuristic value; `None` means relaxed-unreachable.
pub type HValue = Option<u64>;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Heuristic {
    HMax,
    HAdd,
}

impl Heuristic {
    pub fn evaluate(self, s: &State, task: &GroundedTask) -> HValue {
        match self {
            Heuristic::HMax => h_max(s, task),
            Heuristic::HAdd => h_add(s, task),
        }
    }
}

impl fmt::Display for Heuristic {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Heuristic::HMax => "hmax",
            Heuristic::HAdd => "hadd",
        })
    }
}

impl std::str::FromStr for Heuristic {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        match s {
            "hmax" => Ok(Heuristic::HMax),
            "hadd" => Ok(Heuristic::HAdd),
            other => Err(format!("unknown heuristic `{other}` (expected hmax or hadd)")),
        }
    }
}

pub fn h_max(s: &State, task: &GroundedTask) -> HValue {
    relaxed_cost(s, task, u64::max)
}

pub fn h_add(s: &State, task: &GroundedTask) -> HValue {
    relaxed_cost(s, task, u64::saturating_add)
}

fn relaxed_cost(s: &State, task: &GroundedTask, combine: fn(u64, u64) -> u64) -> HValue {
    if task.goal_pos.iter().all(|&g| s.contains(g)) {
        return Some(0);
    }
    let n = task.atoms.len();
    let mut cost: Vec<Option<u64>> = vec![None; n];
    let mut done = vec![false; n];
    let mut heap = BinaryHeap::new();
    // Per action: unsatisfied precondition count and accumulated cost.
    let mut waiting: Vec<usize> = task.actions.iter().map(|a| a.pre_pos.len()).collect();
    let mut acc: Vec<u64> = vec![0; task.actions.len()];

    for id in s.iter() {
        if (id as usize) < n {
            cost[id as usize] = Some(0);
            heap.push(Reverse((0u64, id)));
        }
    }
    let relax = |action: usize, acc: &[u64], cost: &mut [Option<u64>], heap: &mut BinaryHeap<_>| {
        let a = &task.actions[action];
        let c = acc[action].saturating_add(a.cost);
        for &e in &a.add {
            let slot = &mut cost[e as usize];
            if slot.is_none_or(|old| c < old) {
                *slot = Some(c);
                heap.push(Reverse((c, e)));
            }
        }
    };
    for &i in &task.unconditional {
        relax(i, &acc, &mut cost, &mut heap);
    }

    let mut goals_left = task.goal_pos.iter().filter(|&&g| !s.contains(g)).count();
    while let Some(Reverse((c, atom))) = heap.pop() {
        let a = atom as usize;
        if done[a] || cost[a] != Some(c) {
            continue;
        }
        done[a] = true;
        if task.goal_pos.binary_search(&atom).is_ok() && !s.contains(atom) {
            goals_left -= 1;
            if goals_left == 0 {
                break;
            }
        }
        for &action in &task.consumers[a] {
            acc[action] = combine(acc[action], c);
            waiting[action] -= 1;
            if waiting[action] == 0 {
                relax(action, &acc, &mut cost, &mut heap);
            }
        }
    }

    let mut total = 0u64;
    for &g in &task.goal_pos {
        if s.contains(g) {
            continue;
        }
        let c = cost[g as usize]?;
        if !done[g as usize] {
            return None;
        }
        total = combine(total, c);
    }
    Some(total)
}
