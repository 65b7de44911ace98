//! Transportability of causal effects between a source population, where
//! experiments are available, and a target population, where only passive
//! observations are.
//!
//! The entry point is [`sid::transport`], which either synthesizes a
//! transport formula or returns an s-hedge witnessing that none exists.
//! The [`oracle`] module certifies both kinds of answers by exact enumeration
//! over discrete structural causal models.

pub mod components;
pub mod diagram;
pub mod error;
pub mod examples;
pub mod formula;
pub mod oracle;
pub mod separation;
pub mod sid;

pub use components::{SHedge, validate_s_hedge};
pub use diagram::{node_set, NodeSet, Query, SelectionDiagram};
pub use formula::{Expr, Population, Term};
pub use sid::{transport, TransportResult};
