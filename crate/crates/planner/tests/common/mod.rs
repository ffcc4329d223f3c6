#![allow(dead_code)]

use rand::seq::SliceRandom;
use rand::Rng;

/// Random towers over `n` blocks: `below[i]` is the block under `i`, or
/// `None` for the table.
pub fn random_towers(rng: &mut impl Rng, n: usize) -> Vec<Option<usize>> {
    let mut order: Vec<usize> = (0..n).collect();
    order.shuffle(rng);
    let mut below = vec![None; n];
    let mut prev: Option<usize> = None;
    for &b in &order {
        // Start a new tower with probability 1/3.
        if prev.is_some() && rng.random_range(0..3) != 0 {
            below[b] = prev;
        }
        prev = Some(b);
    }
    below
}

pub fn block(i: usize) -> String {
    format!("b{}", i + 1)
}

pub fn tower_atoms(below: &[Option<usize>]) -> Vec<String> {
    let mut atoms = Vec::new();
    for (b, under) in below.iter().enumerate() {
        match under {
            Some(u) => atoms.push(format!("(on {} {})", block(b), block(*u))),
            None => atoms.push(format!("(on-table {})", block(b))),
        }
        if !below.contains(&Some(b)) {
            atoms.push(format!("(clear {})", block(b)));
        }
    }
    atoms
}

/// A blocksworld problem from random initial and goal towers; the goal keeps
/// the `on` atoms of the goal towers.
pub fn random_blocksworld(rng: &mut impl Rng, n: usize) -> String {
    let init = random_towers(rng, n);
    let goal_towers = random_towers(rng, n);
    let mut goal: Vec<String> = goal_towers
        .iter()
        .enumerate()
        .filter_map(|(b, u)| u.map(|u| format!("(on {} {})", block(b), block(u))))
        .collect();
    if goal.is_empty() {
        goal.push(format!("(clear {})", block(0)));
    }
    let objects: Vec<String> = (0..n).map(block).collect();
    format!(
        "(define (problem rand) (:domain blocksworld) (:objects {})\n (:init (arm-empty) {})\n (:goal (and {})))",
        objects.join(" "),
        tower_atoms(&init).join(" "),
        goal.join(" ")
    )
}
pub mod towers;
