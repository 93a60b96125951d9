use std::sync::Arc;

use serde_json::json;

use epitrace::epidemic::{generate, simulate_si, Family, GeneratorSpec, SiConfig};
use epitrace::gnn::{self, GnnConfig, GnnModel};
use epitrace::io::{self, fixture_19, fixture_23, from_json_bytes, read_graph_binary, to_json_bytes, write_graph_binary, ClusterRecord};
use epitrace::likelihood::{score_support, EstimatorKind, LikelihoodConfig, SourceScores};
use epitrace::trace::{run_trace, TraceConfig, TraceRun, TraceStrategy};
use epitrace::{Graph, GnnModel32, NodeId, Support};

fn big_graph() -> Graph {
    generate(&GeneratorSpec::new(Family::BarabasiAlbert { m: 3 }, 1000, 42)).unwrap()
}

#[test]
fn thousand_node_graph_json_and_binary() {
    let g = big_graph();
    let bytes = to_json_bytes(&g, &json!({"seed": 42})).unwrap();
    let (back, cfg): (Graph, _) = from_json_bytes(&bytes).unwrap();
    assert_eq!(back, g);
    assert_eq!(cfg["seed"], 42);
    assert_eq!(to_json_bytes(&back, &cfg).unwrap(), bytes);
    assert_eq!(read_graph_binary(&write_graph_binary(&g)).unwrap(), g);
}

#[test]
fn model_save_load_forward_is_bitwise() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("model.json");
    let mut m = GnnModel::<f64>::new(GnnConfig::default(), 3).unwrap();
    m.fit_target(&[-12.5, -3.25, -7.0]);
    io::save(&path, &m, &json!({})).unwrap();
    let back: GnnModel<f64> = io::load(&path).unwrap();
    assert_eq!(back, m);
    let g = generate(&GeneratorSpec::new(Family::WattsStrogatz { k: 4, beta: 0.3 }, 40, 1)).unwrap();
    let s = Support::bare(g);
    let a = gnn::predict(&m, &s).unwrap();
    let b = gnn::predict(&back, &s).unwrap();
    assert!(a.iter().zip(&b).all(|(x, y)| x.to_bits() == y.to_bits()));

    let small = GnnModel32::new(GnnConfig::default(), 3).unwrap();
    let bytes = to_json_bytes(&small, &json!(null)).unwrap();
    let (back32, _): (GnnModel32, _) = from_json_bytes(&bytes).unwrap();
    assert_eq!(back32, small);
}

#[test]
fn outbreak_trace_and_scores_round_trip() {
    let g = Arc::new(generate(&GeneratorSpec::new(Family::ErdosRenyi { p: 0.08 }, 80, 5)).unwrap());
    let e = simulate_si(g, NodeId(3), &SiConfig { stop_fraction: 0.3, seed: 5, ..Default::default() }).unwrap();
    let bytes = to_json_bytes(&e, &json!({})).unwrap();
    assert_eq!(from_json_bytes::<epitrace::epidemic::EpidemicNetwork>(&bytes).unwrap().0, e);

    let mut est = epitrace::likelihood::LikelihoodEstimator::new(EstimatorKind::RumorCentrality, LikelihoodConfig::default(), 0);
    let run = run_trace(&e, e.source(), &TraceConfig::new(TraceStrategy::Dfs), &mut est).unwrap();
    let bytes = to_json_bytes(&run, &json!({})).unwrap();
    assert_eq!(from_json_bytes::<TraceRun>(&bytes).unwrap().0, run);

    let scores: SourceScores<f64> = score_support(
        &Support::full(&e),
        &EstimatorKind::Rsavr { samples: 10, rule: Default::default() },
        &LikelihoodConfig::default(),
        9,
        1000,
    )
    .unwrap();
    let bytes = to_json_bytes(&scores, &json!({})).unwrap();
    assert_eq!(from_json_bytes::<SourceScores<f64>>(&bytes).unwrap().0, scores);
}

#[test]
fn cluster_fixtures_render_and_parse() {
    for rec in [fixture_19(), fixture_23()] {
        let again = ClusterRecord::parse(&rec.render()).unwrap();
        assert_eq!(again, rec);
        let e = rec.epidemic().unwrap();
        assert_eq!(e.len(), rec.cases.len());
        assert_eq!(Some(e.source()), rec.source_node());
    }
    assert_eq!(fixture_19().graph().unwrap().node_count(), 19);
    assert!(fixture_19().graph().unwrap().is_tree());
    assert_eq!(fixture_23().graph().unwrap().node_count(), 23);
}
