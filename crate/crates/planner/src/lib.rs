//! Grounding, heuristic search and plan validation for STRIPS tasks parsed
//! by `pddl-core`.

pub mod ground;
pub mod heuristic;
pub mod oracle;
pub mod plan;
pub mod search;
pub mod state;

pub use ground::{ground, ground_with, AtomTable, GroundAtom, GroundOptions, GroundStats, GroundedTask, GroundingError};
pub use heuristic::{h_add, h_max, HValue, Heuristic};
pub use oracle::{bfs_oracle, OracleOutcome, DEFAULT_MAX_STATES};
pub use plan::{
    parse_plan, plans_equal, render_plan, validate_plan, InvalidReason, Plan, PlanFile, PlanParseError, PlanStep,
    PlanVerdict,
};
pub use search::{search, Algorithm, Limits, SearchOutcome, SearchResult, SearchStats};
pub use state::{applicable, apply, AtomId, GroundAction, State};
