//! Trajectory planning for nonholonomic robots on occupancy grids.

pub mod corridor;
pub mod error;
pub mod export;
pub mod grid;
pub mod lbfgsb;
pub mod optimizer;
pub mod path;
pub mod pipeline;
pub mod scenario;
pub mod search;

#[cfg(doctest)]
mod book {
    #[doc = include_str!("../../../book/src/introduction.md")]
    mod introduction {}
    #[doc = include_str!("../../../book/src/grids.md")]
    mod grids {}
    #[doc = include_str!("../../../book/src/search.md")]
    mod search {}
    #[doc = include_str!("../../../book/src/corridors.md")]
    mod corridors {}
    #[doc = include_str!("../../../book/src/trajectory.md")]
    mod trajectory {}
    #[doc = include_str!("../../../book/src/objective.md")]
    mod objective {}
    #[doc = include_str!("../../../book/src/solver.md")]
    mod solver {}
    #[doc = include_str!("../../../book/src/continuation.md")]
    mod continuation {}
    #[doc = include_str!("../../../book/src/replanning.md")]
    mod replanning {}
    #[doc = include_str!("../../../book/src/cli.md")]
    mod cli {}
}
