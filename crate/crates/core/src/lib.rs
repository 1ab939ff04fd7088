//! Phase retrieval for holomorphic and meromorphic frequency responses from
//! magnitude-only samples.
//!
//! The central model writes the unknown unimodular phase as a ratio of finite
//! Blaschke products, `b(jω) ≈ A·P(jω)/P*(jω)`, and trains a small network to
//! map a magnitude spectrum onto the roots of `P` and the angle of `A`
//! ([`bpnn`]). Classical and learned comparison methods live in
//! [`baselines`], data generation and file I/O in [`datasets`], and
//! experiment orchestration in [`harness`].

pub mod baselines;
pub mod blaschke;
pub mod bpnn;
pub mod datasets;
pub mod harness;
pub mod numerics;
