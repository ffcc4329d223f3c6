//! Shared PDDL test corpus.
//!
//! Blocksworld, the BW-rand-12 problem and its 24-step plan, the Tyreworld
//! problem and plan, the 3x3 Termes problem and the Termes task description are
//! transcribed verbatim.
//! Domains whose bodies were elided in print (Termes, Floor-tile, Tyreworld)
//! are completed with the standard operators; Floor-tile p03 and Termes 00038
//! are regenerated from their printed headers.

macro_rules! fixture {
    ($(#[$m:meta])* $name:ident, $file:literal) => {
        $(#[$m])*
        pub const $name: &str = include_str!(concat!("../data/", $file));
    };
}

fixture!(BLOCKSWORLD_DOMAIN, "blocksworld.domain.pddl");
fixture!(
    /// Blocksworld exactly as printed: `unstack` adds `(clear ?ob)` instead of
    /// `(clear ?underob)`, so the block underneath never becomes clear.
    BLOCKSWORLD_AS_PRINTED_DOMAIN,
    "blocksworld-as-printed.domain.pddl"
);
fixture!(BW_RAND_12_PROBLEM, "bw-rand-12.problem.pddl");
fixture!(BW_RAND_12_PLAN, "bw-rand-12.plan");

fixture!(TERMES_DOMAIN, "termes.domain.pddl");
fixture!(TERMES_BON_REMOVE_BLOCK_DOMAIN, "termes-bon-remove-block.domain.pddl");
fixture!(
    /// Natural-language Termes task description with action-name hints.
    TERMES_NL_DESCRIPTION,
    "termes.nl.txt"
);
fixture!(TERMES_3X3_PROBLEM, "termes-3x3.problem.pddl");
fixture!(TERMES_00038_PROBLEM, "termes-00038.problem.pddl");

fixture!(FLOORTILE_DOMAIN, "floortile.domain.pddl");
fixture!(FLOORTILE_P03_PROBLEM, "floortile-p03.problem.pddl");

fixture!(TYREWORLD_DOMAIN, "tyreworld.domain.pddl");
fixture!(TYREWORLD_1_PROBLEM, "tyreworld-1.problem.pddl");
fixture!(TYREWORLD_1_PLAN, "tyreworld-1.plan");

/// Every domain in the corpus, by short name.
pub const DOMAINS: &[(&str, &str)] = &[
    ("blocksworld", BLOCKSWORLD_DOMAIN),
    ("blocksworld-as-printed", BLOCKSWORLD_AS_PRINTED_DOMAIN),
    ("termes", TERMES_DOMAIN),
    ("termes-bon-remove-block", TERMES_BON_REMOVE_BLOCK_DOMAIN),
    ("floor-tile", FLOORTILE_DOMAIN),
    ("tyreworld", TYREWORLD_DOMAIN),
];

/// Every problem in the corpus with the name of the domain it belongs to.
pub const PROBLEMS: &[(&str, &str, &str)] = &[
    ("bw-rand-12", "blocksworld", BW_RAND_12_PROBLEM),
    ("termes-3x3", "termes", TERMES_3X3_PROBLEM),
    ("termes-00038", "termes", TERMES_00038_PROBLEM),
    ("floortile-p03", "floor-tile", FLOORTILE_P03_PROBLEM),
    ("tyreworld-1", "tyreworld", TYREWORLD_1_PROBLEM),
];

pub fn domain(name: &str) -> Option<&'static str> {
    DOMAINS.iter().find(|(n, _)| *n == name).map(|(_, text)| *text)
}
