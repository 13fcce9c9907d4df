//! Parity game solving by priority promotion.
//!
//! [`searcher::solve_with`] is the main entry point. Games are built with
//! [`arena::Game::build`], parsed from PGSolver text or generated by
//! [`generators`].

pub mod arena;
pub mod baseline;
pub mod generators;
pub mod pp_family;
pub mod regions;
pub mod searcher;
pub mod setops;

pub use arena::{Game, GameError, Player, PositionSpec, Priority, SubgameView};
pub use searcher::{solve, solve_with, Policy, Solution, SolveError, SolveOptions, Solver};
