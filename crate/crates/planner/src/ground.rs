//! Instantiation of a lifted domain and problem into a STRIPS task.
//!
//! Predicates that no action adds or deletes are static: their truth is
//! fixed by the initial state, so they are evaluated while parameters are
//! bound and never enter the state vector. Equality is handled the same way.
//! Ground actions whose positive preconditions are not reachable under the
//! delete relaxation are pruned.

use std::collections::{HashMap, HashSet};
use std::fmt;

use pddl_core::{build_type_hierarchy, Domain, Formula, Problem, Term, TypeHierarchy};
use thiserror::Error;
use tracing::debug;

use crate::state::{AtomId, GroundAction, State};

pub const DEFAULT_MAX_ACTIONS: usize = 10_000_000;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum GroundingError {
    #[error("TOO_MANY_ACTIONS: more than {limit} ground actions")]
    TooManyActions { limit: usize },
    /// The task refers to something the grounder cannot resolve; validation
    /// would have reported it.
    #[error("INVALID_TASK: {0}")]
    InvalidTask(String),
}

impl GroundingError {
    pub fn code(&self) -> &'static str {
        match self {
            GroundingError::TooManyActions { .. } => "TOO_MANY_ACTIONS",
            GroundingError::InvalidTask(_) => "INVALID_TASK",
        }
    }
}

#[derive(Debug, Clone, Copy)]
pub struct GroundOptions {
    pub max_actions: usize,
}

impl Default for GroundOptions {
    fn default() -> Self {
        GroundOptions {
            max_actions: DEFAULT_MAX_ACTIONS,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct GroundAtom {
    pub predicate: String,
    pub args: Vec<String>,
}

impl fmt::Display for GroundAtom {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({}", self.predicate)?;
        for a in &self.args {
            write!(f, " {a}")?;
        }
        f.write_str(")")
    }
}

/// Dense interning of ground atoms.
#[derive(Debug, Clone, Default)]
pub struct AtomTable {
    atoms: Vec<GroundAtom>,
    ids: HashMap<GroundAtom, AtomId>,
}

impl AtomTable {
    pub fn intern(&mut self, atom: GroundAtom) -> AtomId {
        if let Some(&id) = self.ids.get(&atom) {
            return id;
        }
        let id = self.atoms.len() as AtomId;
        self.atoms.push(atom.clone());
        self.ids.insert(atom, id);
        id
    }

    pub fn get(&self, atom: &GroundAtom) -> Option<AtomId> {
        self.ids.get(atom).copied()
    }

    pub fn atom(&self, id: AtomId) -> &GroundAtom {
        &self.atoms[id as usize]
    }

    pub fn len(&self) -> usize {
        self.atoms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.atoms.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = (AtomId, &GroundAtom)> {
        self.atoms.iter().enumerate().map(|(i, a)| (i as AtomId, a))
    }
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct GroundStats {
    pub objects: usize,
    pub static_predicates: Vec<String>,
    /// Instantiations passing the static and equality filters.
    pub instantiated: usize,
    /// Dropped for contradictory or relaxed-unreachable preconditions.
    pub pruned: usize,
    pub actions: usize,
    pub atoms: usize,
}

/// The tuple ⟨atoms, actions, s₀, goal⟩ of a grounded planning task.
#[derive(Debug, Clone)]
pub struct GroundedTask {
    pub atoms: AtomTable,
    pub actions: Vec<GroundAction>,
    pub init: State,
    pub goal_pos: Vec<AtomId>,
    pub goal_neg: Vec<AtomId>,
    /// The problem declares `(:metric minimize (total-cost))`.
    pub has_metric: bool,
    pub stats: GroundStats,
    /// For every atom, the actions with it as a positive precondition.
    pub consumers: Vec<Vec<usize>>,
    /// Actions without positive preconditions.
    pub unconditional: Vec<usize>,
    by_label: HashMap<String, usize>,
}

impl GroundedTask {
    /// Builds a task directly from ground components.
    pub fn from_parts(
        atoms: AtomTable,
        mut actions: Vec<GroundAction>,
        init: State,
        mut goal_pos: Vec<AtomId>,
        mut goal_neg: Vec<AtomId>,
    ) -> GroundedTask {
        goal_pos.sort_unstable();
        goal_pos.dedup();
        goal_neg.sort_unstable();
        goal_neg.dedup();
        for a in &mut actions {
            a.normalize();
        }
        let mut consumers = vec![Vec::new(); atoms.len()];
        let mut unconditional = Vec::new();
        let mut by_label = HashMap::new();
        for (i, a) in actions.iter().enumerate() {
            if a.pre_pos.is_empty() {
                unconditional.push(i);
            }
            for &p in &a.pre_pos {
                consumers[p as usize].push(i);
            }
            by_label.entry(a.label()).or_insert(i);
        }
        let stats = GroundStats {
            actions: actions.len(),
            atoms: atoms.len(),
            ..GroundStats::default()
        };
        GroundedTask {
            atoms,
            actions,
            init,
            goal_pos,
            goal_neg,
            has_metric: false,
            stats,
            consumers,
            unconditional,
            by_label,
        }
    }

    pub fn is_goal(&self, s: &State) -> bool {
        self.goal_pos.iter().all(|&g| s.contains(g)) && self.goal_neg.iter().all(|&g| !s.contains(g))
    }

    /// Looks up a ground action by name and arguments (case-insensitive).
    pub fn find_action(&self, name: &str, args: &[String]) -> Option<&GroundAction> {
        let mut label = format!("({}", name.to_lowercase());
        for a in args {
            label.push(' ');
            label.push_str(&a.to_lowercase());
        }
        label.push(')');
        self.by_label.get(&label).map(|&i| &self.actions[i])
    }

    /// Whether every action costs 1.
    pub fn is_unit_cost(&self) -> bool {
        self.actions.iter().all(|a| a.cost == 1)
    }

    pub fn state_atoms(&self, s: &State) -> Vec<String> {
        s.iter().map(|id| self.atoms.atom(id).to_string()).collect()
    }
}

/// Object name → declared type, for problem objects and domain constants.
pub(crate) struct Universe<'a> {
    pub types: TypeHierarchy,
    pub objects: Vec<(&'a str, &'a str)>,
    pub type_of: HashMap<&'a str, &'a str>,
}

impl<'a> Universe<'a> {
    pub fn new(d: &'a Domain, p: &'a Problem) -> Self {
        let (types, _) = build_type_hierarchy(d);
        let mut objects = Vec::new();
        let mut type_of = HashMap::new();
        for o in d.constants.iter().chain(&p.objects) {
            if !type_of.contains_key(o.name.as_str()) {
                type_of.insert(o.name.as_str(), o.ty.as_str());
                objects.push((o.name.as_str(), o.ty.as_str()));
            }
        }
        Universe {
            types,
            objects,
            type_of,
        }
    }

    pub fn objects_of(&self, ty: &str) -> Vec<&'a str> {
        self.objects
            .iter()
            .filter(|(_, t)| self.types.is_subtype(t, ty))
            .map(|(n, _)| *n)
            .collect()
    }
}

/// Which predicates some action adds or deletes.
pub(crate) fn fluent_predicates(d: &Domain) -> HashSet<&str> {
    let mut fluents = HashSet::new();
    for a in &d.actions {
        a.effect.for_each_atom(&mut |atom, _| {
            fluents.insert(atom.predicate.as_str());
        });
    }
    fluents
}

/// A precondition literal of one schema, with terms resolved to parameter
/// slots or objects.
#[derive(Debug, Clone)]
pub(crate) enum Arg {
    Param(usize),
    Object(String),
}

#[derive(Debug, Clone)]
pub(crate) enum Literal {
    Atom { predicate: String, args: Vec<Arg>, negated: bool },
    Equal { left: Arg, right: Arg, negated: bool },
}

impl Literal {
    fn args(&self) -> Vec<&Arg> {
        match self {
            Literal::Atom { args, .. } => args.iter().collect(),
            Literal::Equal { left, right, .. } => vec![left, right],
        }
    }

    /// Highest parameter slot the literal depends on, if any.
    fn last_param(&self) -> Option<usize> {
        self.args()
            .into_iter()
            .filter_map(|a| match a {
                Arg::Param(i) => Some(*i),
                Arg::Object(_) => None,
            })
            .max()
    }
}

fn resolve_arg(t: &Term, params: &HashMap<&str, usize>, universe: &Universe) -> Result<Arg, GroundingError> {
    if let Some(&i) = params.get(t.name.as_str()) {
        return Ok(Arg::Param(i));
    }
    if t.is_variable() {
        return Err(GroundingError::InvalidTask(format!("unbound variable {}", t.name)));
    }
    if !universe.type_of.contains_key(t.name.as_str()) {
        return Err(GroundingError::InvalidTask(format!("undeclared object {}", t.name)));
    }
    Ok(Arg::Object(t.name.clone()))
}

fn literals(
    f: &Formula,
    params: &HashMap<&str, usize>,
    universe: &Universe,
    out: &mut Vec<Literal>,
) -> Result<(), GroundingError> {
    match f {
        Formula::Atom(a) => out.push(Literal::Atom {
            predicate: a.predicate.clone(),
            args: a.args.iter().map(|t| resolve_arg(t, params, universe)).collect::<Result<_, _>>()?,
            negated: false,
        }),
        Formula::Not { inner, .. } => {
            let mut inner_lits = Vec::new();
            literals(inner, params, universe, &mut inner_lits)?;
            match inner_lits.as_mut_slice() {
                [Literal::Atom { negated, .. } | Literal::Equal { negated, .. }] => *negated = !*negated,
                _ => return Err(GroundingError::InvalidTask("negation of a non-literal".into())),
            }
            out.extend(inner_lits);
        }
        Formula::And { children, .. } => {
            for c in children {
                literals(c, params, universe, out)?;
            }
        }
        Formula::Equality { left, right, .. } => out.push(Literal::Equal {
            left: resolve_arg(left, params, universe)?,
            right: resolve_arg(right, params, universe)?,
            negated: false,
        }),
    }
    Ok(())
}

/// Flattens a conjunction of literals, resolving terms against `params`.
pub(crate) fn compile_literals(
    f: &Formula,
    params: &HashMap<&str, usize>,
    universe: &Universe,
) -> Result<Vec<Literal>, GroundingError> {
    let mut out = Vec::new();
    literals(f, params, universe, &mut out)?;
    Ok(out)
}

/// A literal under a full binding.
pub(crate) enum BoundLiteral {
    /// The atom and whether it is negated.
    Atom(GroundAtom, bool),
    /// Whether the (in)equality holds, and its text.
    Equal(bool, String),
}

pub(crate) fn bind_literal(lit: &Literal, binding: &[&str]) -> BoundLiteral {
    match lit {
        Literal::Atom { predicate, args, negated } => BoundLiteral::Atom(ground_atom(predicate, args, binding), *negated),
        Literal::Equal { left, right, negated } => {
            let (l, r) = (bind(left, binding), bind(right, binding));
            let text = if *negated { format!("(not (= {l} {r}))") } else { format!("(= {l} {r})") };
            BoundLiteral::Equal((l == r) != *negated, text)
        }
    }
}

fn bind<'b>(arg: &'b Arg, binding: &[&'b str]) -> &'b str {
    match arg {
        Arg::Param(i) => binding[*i],
        Arg::Object(o) => o,
    }
}

fn ground_atom(predicate: &str, args: &[Arg], binding: &[&str]) -> GroundAtom {
    GroundAtom {
        predicate: predicate.to_string(),
        args: args.iter().map(|a| bind(a, binding).to_string()).collect(),
    }
}

struct Schema<'a> {
    name: &'a str,
    domains: Vec<Vec<&'a str>>,
    /// Static and equality literals, bucketed by the slot after which they
    /// can be evaluated.
    filters: Vec<Vec<Literal>>,
    /// Literals without parameters, evaluated once.
    constant_filters: Vec<Literal>,
    fluent_pre: Vec<Literal>,
    effects: Vec<Literal>,
    cost: u64,
}

struct Grounder<'a> {
    universe: Universe<'a>,
    fluents: HashSet<&'a str>,
    static_facts: HashSet<GroundAtom>,
    atoms: AtomTable,
    actions: Vec<GroundAction>,
    max_actions: usize,
    instantiated: usize,
}

impl<'a> Grounder<'a> {
    fn holds_static(&self, lit: &Literal, binding: &[&str]) -> bool {
        match lit {
            Literal::Atom { predicate, args, negated } => {
                self.static_facts.contains(&ground_atom(predicate, args, binding)) != *negated
            }
            Literal::Equal { left, right, negated } => (bind(left, binding) == bind(right, binding)) != *negated,
        }
    }

    fn enumerate(&mut self, schema: &Schema<'a>, binding: &mut Vec<&'a str>) -> Result<(), GroundingError> {
        let slot = binding.len();
        if slot == schema.domains.len() {
            return self.emit(schema, binding);
        }
        for &obj in &schema.domains[slot] {
            binding.push(obj);
            if schema.filters[slot].iter().all(|l| self.holds_static(l, binding)) {
                self.enumerate(schema, binding)?;
            }
            binding.pop();
        }
        Ok(())
    }

    fn emit(&mut self, schema: &Schema<'a>, binding: &[&str]) -> Result<(), GroundingError> {
        self.instantiated += 1;
        if self.actions.len() >= self.max_actions {
            return Err(GroundingError::TooManyActions {
                limit: self.max_actions,
            });
        }
        let mut action = GroundAction {
            name: schema.name.to_string(),
            args: binding.iter().map(|s| s.to_string()).collect(),
            pre_pos: Vec::new(),
            pre_neg: Vec::new(),
            add: Vec::new(),
            del: Vec::new(),
            cost: schema.cost,
        };
        for lit in &schema.fluent_pre {
            if let Literal::Atom { predicate, args, negated } = lit {
                let id = self.atoms.intern(ground_atom(predicate, args, binding));
                if *negated {
                    action.pre_neg.push(id);
                } else {
                    action.pre_pos.push(id);
                }
            }
        }
        for lit in &schema.effects {
            if let Literal::Atom { predicate, args, negated } = lit {
                let id = self.atoms.intern(ground_atom(predicate, args, binding));
                if *negated {
                    action.del.push(id);
                } else {
                    action.add.push(id);
                }
            }
        }
        action.normalize();
        self.actions.push(action);
        Ok(())
    }
}

pub fn ground(d: &Domain, p: &Problem) -> Result<GroundedTask, GroundingError> {
    ground_with(d, p, GroundOptions::default())
}

pub fn ground_with(d: &Domain, p: &Problem, options: GroundOptions) -> Result<GroundedTask, GroundingError> {
    let universe = Universe::new(d, p);
    let fluents = fluent_predicates(d);
    let mut static_predicates: Vec<String> = d
        .predicates
        .iter()
        .map(|pr| pr.name.clone())
        .filter(|n| !fluents.contains(n.as_str()))
        .collect();
    static_predicates.sort();
    static_predicates.dedup();

    let mut g = Grounder {
        static_facts: HashSet::new(),
        fluents,
        universe,
        atoms: AtomTable::default(),
        actions: Vec::new(),
        max_actions: options.max_actions,
        instantiated: 0,
    };

    // Initial state: fluent atoms are interned, static ones become filters.
    let mut init_ids = Vec::new();
    for a in &p.init {
        let atom = GroundAtom {
            predicate: a.predicate.clone(),
            args: a.args.iter().map(|t| t.name.clone()).collect(),
        };
        if g.fluents.contains(a.predicate.as_str()) {
            init_ids.push(g.atoms.intern(atom));
        } else {
            g.static_facts.insert(atom);
        }
    }

    for schema in &d.actions {
        let params: HashMap<&str, usize> =
            schema.params.iter().enumerate().map(|(i, p)| (p.name.as_str(), i)).collect();
        let mut pre = Vec::new();
        literals(&schema.precondition, &params, &g.universe, &mut pre)?;
        let mut effects = Vec::new();
        literals(&schema.effect, &params, &g.universe, &mut effects)?;
        if effects.iter().any(|l| matches!(l, Literal::Equal { .. })) {
            return Err(GroundingError::InvalidTask(format!("{}: equality in effect", schema.name)));
        }

        let n = schema.params.len();
        let mut filters = vec![Vec::new(); n];
        let mut constant_filters = Vec::new();
        let mut fluent_pre = Vec::new();
        for lit in pre {
            let is_static = match &lit {
                Literal::Atom { predicate, .. } => !g.fluents.contains(predicate.as_str()),
                Literal::Equal { .. } => true,
            };
            if !is_static {
                fluent_pre.push(lit);
            } else if let Some(slot) = lit.last_param() {
                filters[slot].push(lit);
            } else {
                constant_filters.push(lit);
            }
        }
        let compiled = Schema {
            name: &schema.name,
            domains: schema.params.iter().map(|p| g.universe.objects_of(&p.ty)).collect(),
            filters,
            constant_filters,
            fluent_pre,
            effects,
            cost: schema.cost.as_ref().map_or(1, |c| c.amount),
        };
        if compiled.constant_filters.iter().all(|l| g.holds_static(l, &[])) {
            let before = g.actions.len();
            g.enumerate(&compiled, &mut Vec::with_capacity(n))?;
            debug!(schema = %schema.name, ground = g.actions.len() - before, "grounded schema");
        }
    }

    // Goal: static literals are decided now; a false one becomes an atom that
    // nothing achieves, keeping the task well-formed but unsolvable.
    let mut goal_lits = Vec::new();
    literals(&p.goal, &HashMap::new(), &g.universe, &mut goal_lits)?;
    let mut goal_pos = Vec::new();
    let mut goal_neg = Vec::new();
    for lit in &goal_lits {
        match lit {
            Literal::Atom { predicate, args, negated } if g.fluents.contains(predicate.as_str()) => {
                let id = g.atoms.intern(ground_atom(predicate, args, &[]));
                if *negated {
                    goal_neg.push(id);
                } else {
                    goal_pos.push(id);
                }
            }
            _ if g.holds_static(lit, &[]) => {}
            _ => {
                let id = g.atoms.intern(GroundAtom {
                    predicate: "unsatisfiable-static-goal".into(),
                    args: Vec::new(),
                });
                goal_pos.push(id);
            }
        }
    }
    let init = State::from_atoms(init_ids.iter().copied(), g.atoms.len());

    // Relaxed reachability: keep actions whose positive preconditions can all
    // become true when deletes are ignored.
    let instantiated = g.actions.len();
    let mut reachable = init.clone();
    let mut live: Vec<bool> = g.actions.iter().map(|a| !a.is_contradictory()).collect();
    let mut fired = vec![false; g.actions.len()];
    loop {
        let mut changed = false;
        for (i, a) in g.actions.iter().enumerate() {
            if live[i] && !fired[i] && a.pre_pos.iter().all(|&p| reachable.contains(p)) {
                fired[i] = true;
                for &ad in &a.add {
                    if !reachable.contains(ad) {
                        reachable.insert(ad);
                        changed = true;
                    }
                }
            }
        }
        if !changed {
            break;
        }
    }
    for (l, f) in live.iter_mut().zip(&fired) {
        *l &= *f;
    }
    let actions: Vec<GroundAction> = g
        .actions
        .into_iter()
        .zip(live)
        .filter_map(|(a, keep)| keep.then_some(a))
        .collect();

    let objects = g.universe.objects.len();
    let mut task = GroundedTask::from_parts(g.atoms, actions, init, goal_pos, goal_neg);
    task.has_metric = p.metric.is_some();
    task.stats = GroundStats {
        objects,
        static_predicates,
        instantiated: g.instantiated,
        pruned: instantiated - task.actions.len(),
        actions: task.actions.len(),
        atoms: task.atoms.len(),
    };
    debug!(?task.stats, "grounding finished");
    Ok(task)
}
