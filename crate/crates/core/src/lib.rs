//! Rate functions at the origin for nearest-neighbour random walks in
//! i.i.d., periodic and strip-periodic environments on `Z^d`.
//!
//! The crate is organised bottom-up:
//!
//! * [`env`]: probability vectors on the `2d` unit steps, i.i.d. laws,
//!   periodic and sampled environments, nestling classification.
//! * [`rate`]: log-moment generating functions, the closed and numerical
//!   rate at the origin, the convex-concave saddle solver and the
//!   variational formula for `I(0)`.
//! * [`periodic`]: the tilted transfer operator on the period torus, its
//!   Perron root, and exact return probabilities by dynamic programming.
//! * [`strip`]: strip-periodic environments and the construction that
//!   realises `I(0)` with a periodic environment built from the support.
//! * [`simulate`]: Monte Carlo engines (quenched walks, occupation
//!   statistics, tilted importance sampling, the environment scanner and
//!   the dominant-event lower bound).
//!
//! Steps are always ordered `+e_1, -e_1, +e_2, -e_2, ...`; every
//! serialised vector uses that order.

pub mod config;
pub mod env;
pub mod error;
pub mod hull;
pub mod optimize;
pub mod periodic;
pub mod rate;
pub mod simulate;
pub mod strip;

pub use error::{Error, Result};
