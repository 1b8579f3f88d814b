//! The online side of generate-then-verify dependency retrieval.
//!
//! A generator (an external model endpoint, or a file-backed stub for tests
//! and offline runs) proposes dependency names for an informal statement;
//! every proposal is verified against a [`ddr_core::DependencyIndex`] before
//! it is returned. [`server`] exposes verification, extraction and
//! retrieval over HTTP against an atomically replaceable index snapshot.

pub mod generator;
pub mod pipeline;
pub mod server;

pub use generator::{
    parse_identifiers, CandidateGenerator, GenerationRequest, Generator, GeneratorConfig,
    GeneratorError, GeneratorKind, HttpGenerator, StubGenerator,
};
pub use pipeline::{retrieve_dependencies, VerifiedDependencies};
pub use server::{router, serve, serve_on, AppState, ServeError, ServiceConfig};
