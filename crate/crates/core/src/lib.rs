//! Number-theoretic kernels around traces of Hecke operators.
//!
//! The crate is organised bottom-up:
//!
//! * [`arith`]: factorisation and the classical multiplicative functions.
//! * [`characters`]: Dirichlet character groups, conductors, restriction.
//! * [`expsums`]: twisted Kloosterman sums and the character-averaged sums `T_W`.
//! * [`analytic`]: Bessel `J`, Chebyshev `U`, certified Petersson tail bounds.
//! * [`petersson`]: the geometric side of the Petersson formula and its newform inversion.
//! * [`modforms`]: exact q-expansions, Hecke operators, adjoint-square partial sums.
//! * [`traces`]: trace main terms, error envelopes, exact traces of small spaces.
//! * [`census`]: elliptic curves over prime fields and their Chebyshev moments.
//! * [`verify`]: the deterministic identity suites behind `hecke verify`.

pub mod analytic;
pub mod arith;
pub mod census;
pub mod characters;
pub mod config;
pub mod error;
pub mod expsums;
pub mod modforms;
pub mod petersson;
pub mod traces;
pub mod verify;

pub use error::{Error, Result};
