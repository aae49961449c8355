//! Numerical simulator of an adiabatic quantum search for non-negative
//! integer zeros of Diophantine polynomials.
//!
//! The library turns a multivariate integer polynomial `D(x1,...,xk)` into a
//! diagonal problem Hamiltonian on a truncated multi-mode Fock basis whose
//! entries are `D(n1,...,nk)^2`, integrates the time-dependent Schrödinger
//! equation along the interpolation `(1-s)·H_I + s·H_P`, and identifies the
//! final ground space by matching computed Born distributions against seeded
//! projective-measurement statistics. A bounded classical brute-force search
//! acts as the independent oracle for every decision.

pub mod cli;
pub mod diophantine;
pub mod evolution;
pub mod fock;
pub mod measurement;
pub mod verification;
