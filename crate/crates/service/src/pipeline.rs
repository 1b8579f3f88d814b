use std::time::Instant;

use ddr_core::filter::{filter_candidates, Rejected};
use ddr_core::{DependencyIndex, Execution};
use serde::{Deserialize, Serialize};

use crate::generator::{CandidateGenerator, GenerationRequest, GeneratorError};

/// A resolved dependency as handed to a downstream formalizer. Only the name
/// is filled in; the remaining metadata fields are always null.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct DependencyPayload {
    pub name: String,
    pub kind: Option<String>,
    pub signature: Option<String>,
    pub doc: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VerifiedDependencies {
    pub informal: String,
    pub dependencies: Vec<String>,
    pub dropped: Vec<Rejected>,
    pub items: Vec<DependencyPayload>,
    pub generator_latency_ms: f64,
    pub verify_latency_ms: f64,
}

/// Generates candidates, verifies them once against `index`, and keeps only
/// names the library resolves.
pub async fn retrieve_dependencies<G: CandidateGenerator>(
    index: &DependencyIndex,
    generator: &G,
    request: &GenerationRequest,
) -> Result<VerifiedDependencies, GeneratorError> {
    let start = Instant::now();
    let candidates = generator.generate(request).await?;
    let generator_latency_ms = start.elapsed().as_secs_f64() * 1e3;

    let start = Instant::now();
    let filtered = filter_candidates(index, &candidates, Execution::Sequential);
    let verify_latency_ms = start.elapsed().as_secs_f64() * 1e3;

    let items = filtered
        .dependencies
        .iter()
        .map(|name| DependencyPayload {
            name: name.clone(),
            kind: None,
            signature: None,
            doc: None,
        })
        .collect();
    Ok(VerifiedDependencies {
        informal: request.informal.clone(),
        dependencies: filtered.dependencies,
        dropped: filtered.dropped,
        items,
        generator_latency_ms,
        verify_latency_ms,
    })
}
