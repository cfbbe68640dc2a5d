//! Reduction rules: redex discovery, contraction, and the measures they are ranked by.

mod measure;
mod redex;
mod stack;
mod step;
mod subst;

pub use measure::{height, is_parallel_form, is_value, pair_leaves, value_complexity, NotParallelForm};
pub use redex::{
    communication_complexity, find_redexes, is_normal, redex_complexity, redexes_at, Group, PermShape, Redex,
    RedexKind, RedexRecord,
};
pub(crate) use redex::session_occurrences;
pub use stack::{apply_stack, decompose_stack, is_case_free, Frame, Stack};
pub use step::{contract, step, StepError};
pub use subst::{multiple_subst, projection, rename_chan, rename_var, subst_chan, subst_var, substitute, SubstError, Target};
