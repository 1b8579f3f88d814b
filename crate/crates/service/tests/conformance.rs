use std::collections::HashSet;
use std::sync::atomic::{AtomicU64, Ordering};
use std::sync::{Arc, OnceLock};

use axum::body::{to_bytes, Body};
use axum::http::Request;
use ddr_core::rng::SplitMix64;
use ddr_core::synth::synthetic_library;
use ddr_core::{DependencyIndex, MatchResult};
use ddr_service::{retrieve_dependencies, router, AppState, CandidateGenerator, GenerationRequest, GeneratorError};
use proptest::prelude::*;
use tower::ServiceExt;

fn state() -> &'static Arc<AppState> {
    static S: OnceLock<Arc<AppState>> = OnceLock::new();
    S.get_or_init(|| Arc::new(AppState::new(DependencyIndex::build(synthetic_library(300, 8)).unwrap())))
}

fn candidate() -> impl Strategy<Value = String> {
    let names: Vec<String> = state().current().items().iter().map(|i| i.fqn.clone()).collect();
    prop_oneof![
        prop::sample::select(names.clone()),
        prop::sample::select(names).prop_map(|n| n.rsplit('.').next().unwrap().to_string()),
        "[A-Za-z.]{1,10}",
    ]
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn verify_endpoint_equals_library_call(batch in prop::collection::vec(candidate(), 0..30)) {
        let rt = tokio::runtime::Builder::new_current_thread().build().unwrap();
        let body = serde_json::json!({ "candidates": batch }).to_string();
        let got: Vec<MatchResult> = rt.block_on(async {
            let resp = router(state().clone())
                .oneshot(Request::post("/v1/verify").body(Body::from(body)).unwrap())
                .await
                .unwrap();
            assert!(resp.status().is_success());
            serde_json::from_slice(&to_bytes(resp.into_body(), usize::MAX).await.unwrap()).unwrap()
        });
        let want: Vec<MatchResult> = state().current().verify_batch(&batch).into_iter().map(Result::unwrap).collect();
        prop_assert_eq!(got, want);
    }
}

/// Emits mostly invented names with a few real ones mixed in.
struct Adversary {
    names: Vec<String>,
    calls: AtomicU64,
}

impl CandidateGenerator for Adversary {
    async fn generate(&self, _: &GenerationRequest) -> Result<Vec<String>, GeneratorError> {
        let mut rng = SplitMix64::new(self.calls.fetch_add(1, Ordering::Relaxed));
        Ok((0..10)
            .map(|_| {
                if rng.below(10) == 0 {
                    rng.choose(&self.names).clone()
                } else {
                    let real = rng.choose(&self.names);
                    format!("{real}{}", ["_aux", "'", ".mk", "X"][rng.below(4)])
                }
            })
            .collect())
    }
}

#[tokio::test]
async fn invented_names_never_survive() {
    let index = state().current();
    let names: Vec<String> = index.items().iter().map(|i| i.fqn.clone()).collect();
    let library: HashSet<&str> = names.iter().map(String::as_str).collect();
    let gen = Adversary { names: names.clone(), calls: AtomicU64::new(0) };
    for _ in 0..500 {
        let out = retrieve_dependencies(&index, &gen, &GenerationRequest::new("x")).await.unwrap();
        assert!(out.dependencies.iter().all(|d| library.contains(d.as_str())));
        assert!(out.dropped.iter().all(|d| !out.dependencies.contains(&d.candidate)));
    }
}
