//! Conic linear programs: data model, dualization, solver and builders.

mod builders;
mod cone;
mod ipm;
mod json;
mod program;
mod solve;

pub use builders::{
    build_dmax_channel, build_dmax_state, build_monotone, build_monotone_homogeneous,
    check_chain_rule, conversion_distance, convertible, dmax_channel, dmax_state, lift_cone,
    monotone, ChainRule, Conversion, Quantity,
};
pub use cone::{BlockCone, Cone, ProductCone};
pub use json::{element_to_json, solution_to_json};
pub use program::{dualize, ConicProgram, Sense};
pub use solve::{solve, SolveStatus, Solution, SolverOptions};
