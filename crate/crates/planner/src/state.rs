use std::fmt;
use std::hash::{Hash, Hasher};

pub type AtomId = u32;

/// A set of atom ids under the closed-world assumption.
///
/// Stored as a bitset that grows on insertion; trailing empty words are
/// ignored by equality and hashing, so sets built with different capacities
/// still compare by content.
#[derive(Clone, Default)]
pub struct State {
    words: Vec<u64>,
}

impl State {
    pub fn with_capacity(atoms: usize) -> Self {
        State {
            words: vec![0; atoms.div_ceil(64)],
        }
    }

    pub fn from_atoms(atoms: impl IntoIterator<Item = AtomId>, capacity: usize) -> Self {
        let mut s = State::with_capacity(capacity);
        for a in atoms {
            s.insert(a);
        }
        s
    }

    pub fn contains(&self, atom: AtomId) -> bool {
        let (w, b) = (atom as usize / 64, atom % 64);
        self.words.get(w).is_some_and(|word| word & (1 << b) != 0)
    }

    pub fn insert(&mut self, atom: AtomId) {
        let (w, b) = (atom as usize / 64, atom % 64);
        if w >= self.words.len() {
            self.words.resize(w + 1, 0);
        }
        self.words[w] |= 1 << b;
    }

    pub fn remove(&mut self, atom: AtomId) {
        let (w, b) = (atom as usize / 64, atom % 64);
        if let Some(word) = self.words.get_mut(w) {
            *word &= !(1 << b);
        }
    }

    pub fn len(&self) -> usize {
        self.words.iter().map(|w| w.count_ones() as usize).sum()
    }

    pub fn is_empty(&self) -> bool {
        self.words.iter().all(|w| *w == 0)
    }

    /// Atom ids in increasing order.
    pub fn iter(&self) -> impl Iterator<Item = AtomId> + '_ {
        self.words.iter().enumerate().flat_map(|(i, &word)| {
            (0..64).filter(move |b| word & (1 << b) != 0).map(move |b| (i * 64 + b) as AtomId)
        })
    }

    fn trimmed(&self) -> &[u64] {
        let end = self.words.iter().rposition(|w| *w != 0).map_or(0, |i| i + 1);
        &self.words[..end]
    }
}

impl PartialEq for State {
    fn eq(&self, other: &Self) -> bool {
        self.trimmed() == other.trimmed()
    }
}

impl Eq for State {}

impl Hash for State {
    fn hash<H: Hasher>(&self, state: &mut H) {
        self.trimmed().hash(state)
    }
}

impl fmt::Debug for State {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_set().entries(self.iter()).finish()
    }
}

impl FromIterator<AtomId> for State {
    fn from_iter<I: IntoIterator<Item = AtomId>>(iter: I) -> Self {
        State::from_atoms(iter, 0)
    }
}

/// A fully instantiated action over atom ids.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GroundAction {
    pub name: String,
    pub args: Vec<String>,
    pub pre_pos: Vec<AtomId>,
    pub pre_neg: Vec<AtomId>,
    pub add: Vec<AtomId>,
    pub del: Vec<AtomId>,
    pub cost: u64,
}

impl GroundAction {
    /// `(name arg1 arg2 ...)`.
    pub fn label(&self) -> String {
        let mut s = format!("({}", self.name);
        for a in &self.args {
            s.push(' ');
            s.push_str(a);
        }
        s.push(')');
        s
    }

    /// Drops deletes that are also added: deletes apply first, so the add wins.
    pub fn normalize(&mut self) {
        self.pre_pos.sort_unstable();
        self.pre_pos.dedup();
        self.pre_neg.sort_unstable();
        self.pre_neg.dedup();
        self.add.sort_unstable();
        self.add.dedup();
        self.del.sort_unstable();
        self.del.dedup();
        let add = &self.add;
        self.del.retain(|d| add.binary_search(d).is_err());
    }

    /// Whether some atom is required both true and false.
    pub fn is_contradictory(&self) -> bool {
        self.pre_pos.iter().any(|p| self.pre_neg.contains(p))
    }
}

pub fn applicable(s: &State, a: &GroundAction) -> bool {
    a.pre_pos.iter().all(|&p| s.contains(p)) && a.pre_neg.iter().all(|&p| !s.contains(p))
}

/// `(s \ del) ∪ add`. The caller is responsible for applicability.
pub fn apply(s: &State, a: &GroundAction) -> State {
    let mut next = s.clone();
    for &d in &a.del {
        next.remove(d);
    }
    for &ad in &a.add {
        next.insert(ad);
    }
    next
}
