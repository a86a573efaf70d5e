//! Engine and analysis toolkit for iterated N-player social dilemmas.
//!
//! The crate is organised around four pipelines that share one game engine:
//!
//! - [`game`]: the Public Goods, Collective Risk and Common Pool Resource
//!   games, the iterated game loop and welfare bounds.
//! - [`strategy`]: reference strategies, parametric families, declarative
//!   policy files and the admission gate.
//! - [`fingerprint`]: behavioural feature vectors over canonical opponent
//!   histories, PCA and set-variation metrics.
//! - [`selfplay`]: welfare of mixed groups drawn from two pools.
//! - [`evolution`]: cultural evolution with elitism, imitation and mutation.
//!
//! Every stochastic routine takes an explicit master seed; sub-streams are
//! derived per task (see [`seed`]) so results do not depend on whether the
//! [`exec::Exec`] policy runs tasks sequentially or on the rayon pool.

pub mod error;
pub mod evolution;
pub mod exec;
pub mod fingerprint;
pub mod game;
pub mod seed;
pub mod selfplay;
pub mod strategy;

pub use error::{Error, Result};
pub use exec::Exec;
pub use game::{Action, GameKind, GameParams, GameResult, ParamsTemplate, RoundRecord};
pub use strategy::{Attitude, Strategy, StrategyPool};
