//! BW-rand-12 as explicit towers, independent of the grounded semantics.

use pddl_planner::PlanStep;
use rand::seq::IndexedRandom;
use rand::Rng;

/// Blocks world as towers: what each block rests on and what the hand holds.
#[derive(Clone)]
pub struct Towers {
    below: Vec<Option<Option<usize>>>,
    hand: Option<usize>,
}

fn idx(name: &str) -> usize {
    name.strip_prefix('b').unwrap().parse::<usize>().unwrap() - 1
}

impl Towers {
    fn bw_rand_12() -> Self {
        let mut below = vec![Some(None); 12];
        for (top, under) in [(2, 5), (3, 8), (4, 12), (5, 7), (6, 1), (7, 10), (10, 11), (12, 9)] {
            below[top - 1] = Some(Some(under - 1));
        }
        Towers { below, hand: None }
    }

    fn clear(&self, b: usize) -> bool {
        self.hand != Some(b) && !self.below.contains(&Some(Some(b)))
    }

    fn step(&mut self, s: &PlanStep) -> bool {
        let a: Vec<usize> = s.args.iter().map(|x| idx(x)).collect();
        match (s.name.as_str(), a.as_slice()) {
            ("pickup", &[b]) if self.hand.is_none() && self.below[b] == Some(None) && self.clear(b) => {
                self.below[b] = None;
                self.hand = Some(b);
            }
            ("putdown", &[b]) if self.hand == Some(b) => {
                self.below[b] = Some(None);
                self.hand = None;
            }
            ("stack", &[b, u]) if self.hand == Some(b) && self.clear(u) && b != u => {
                self.below[b] = Some(Some(u));
                self.hand = None;
            }
            ("unstack", &[b, u]) if self.hand.is_none() && self.below[b] == Some(Some(u)) && self.clear(b) => {
                self.below[b] = None;
                self.hand = Some(b);
            }
            _ => return false,
        }
        true
    }

    fn goal(&self) -> bool {
        [(5, 10), (6, 12), (7, 4), (8, 3), (9, 2), (10, 8), (11, 7), (12, 11)]
            .iter()
            .all(|&(t, u)| self.below[t - 1] == Some(Some(u - 1)))
    }
}

/// Index of the first failing step, the plan length for a goal failure, or
/// `None` for a valid plan.
pub fn simulate(steps: &[PlanStep]) -> Option<usize> {
    let mut w = Towers::bw_rand_12();
    for (i, s) in steps.iter().enumerate() {
        if !w.step(s) {
            return Some(i);
        }
    }
    (!w.goal()).then_some(steps.len())
}

#[derive(Debug)]
pub enum Mutation {
    Drop(usize),
    Swap(usize),
    Arg(usize, usize, String),
}

pub fn mutate(plan: &[PlanStep], m: &Mutation) -> Vec<PlanStep> {
    let mut out = plan.to_vec();
    match m {
        Mutation::Drop(i) => {
            out.remove(*i);
        }
        Mutation::Swap(i) => out.swap(*i, *i + 1),
        Mutation::Arg(i, j, obj) => out[*i].args[*j] = obj.clone(),
    }
    out
}

/// 50 drop, swap and argument-change mutants of `plan`, in rotation.
pub fn single_step_mutants(plan: &[PlanStep], rng: &mut impl Rng) -> Vec<Mutation> {
    let blocks: Vec<String> = (1..=12).map(|i| format!("b{i}")).collect();
    let mut mutants = Vec::new();
    while mutants.len() < 50 {
        let i = rng.random_range(0..plan.len());
        let m = match mutants.len() % 3 {
            0 => Mutation::Drop(i),
            1 if i + 1 < plan.len() && plan[i] != plan[i + 1] => Mutation::Swap(i),
            2 => {
                let j = rng.random_range(0..plan[i].args.len());
                let obj = blocks.choose(rng).unwrap().clone();
                if obj == plan[i].args[j] {
                    continue;
                }
                Mutation::Arg(i, j, obj)
            }
            _ => continue,
        };
        mutants.push(m);
    }
    mutants
}

