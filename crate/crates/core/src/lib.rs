//! Multilevel committee intersection systems built from projective spaces
//! over finite fields.
//!
//! Committees of processes are identified with the points of `PG(k, q)`.
//! Level `j` uses the `d_j`-dimensional projective subspaces as committee
//! quorums, and a set of processes is a level-`j` quorum when it holds at
//! least an `r_j` fraction of every committee in one of those subspaces.
//!
//! The crate is organised bottom-up:
//!
//! - [`gf`]: arithmetic in `GF(q)` for prime powers `q <= 256`.
//! - [`projective`]: points and subspaces of `PG(k, q)` in canonical RREF form.
//! - [`quorum`]: generic intersection systems and their metrics.
//! - [`multilevel`]: the committee construction and its closed-form metrics.
//! - [`availability`]: committee-failure tails, analytic bounds, Monte Carlo.
//! - [`sim`]: equivocation scenarios over vote tables.
//! - [`cli`]: the `pgquorum` command-line front end.
//!
//! Heavy loops (pairwise slashability scans, Monte Carlo trials, sampled
//! construction) run on rayon when the `parallel` feature is enabled and
//! fall back to plain iterators otherwise. See [`Exec`].

pub mod availability;
pub mod cli;
pub mod error;
pub mod gf;
pub mod multilevel;
pub mod projective;
pub mod quorum;
pub mod rational;
pub mod sim;

mod par;

pub use error::{Error, Result};
pub use gf::{Elem, Field};
pub use par::Exec;
pub use rational::Rational;
