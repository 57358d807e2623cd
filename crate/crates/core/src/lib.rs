//! Alignment-based conformance checking of stochastically known event logs
//! against labeled Petri nets.
//!
//! The pipeline is: a [`StochasticTrace`](log::StochasticTrace) becomes a
//! weighted trace net ([`trace_net`]), which is combined with the process
//! model into a synchronous product ([`product`]). An optimal alignment is a
//! cheapest firing sequence from the product's initial to its final marking
//! ([`search`]), with synchronous moves priced by their firing probability
//! ([`cost`]).

pub mod batch;
pub mod cost;
mod error;
mod json;
pub mod log;
pub mod net;
pub mod oracle;
pub mod perturb;
pub mod pnml;
pub mod product;
pub mod search;
pub mod synth;
pub mod trace_net;
pub mod xes;
mod xml;

pub use error::{Error, Result};
