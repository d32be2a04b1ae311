//! Enumeration results frozen from an independent exhaustive scan.

use onetwo_core::lattice::{build_torus, EdgeKind};
use onetwo_core::model::{
    cluster_decompose, enumerate_partition, exact_correlation, exact_measure, valid_configs,
    CorrelationEntry, GoldenFixture,
};
use onetwo_core::pfaffian::partition_via_pfaffian;
use onetwo_core::OneTwoConfig;
use serde::Deserialize;

#[derive(Deserialize)]
struct EnumerationFile {
    valid_configs: usize,
    fixtures: Vec<GoldenFixture>,
}

#[derive(Deserialize)]
struct SizeBin {
    size: usize,
    count: usize,
    probability: f64,
}

#[derive(Deserialize)]
struct ClusterFile {
    n: usize,
    max_type_a_cluster: Vec<SizeBin>,
}

fn enumeration() -> EnumerationFile {
    serde_json::from_str(include_str!("fixtures/enumeration_n2.json")).unwrap()
}

#[test]
fn valid_configuration_count_at_n2() {
    let l = build_torus(2).unwrap();
    assert_eq!(valid_configs(&l).len(), enumeration().valid_configs);
}

#[test]
fn partition_functions_match_fixture() {
    for fx in enumeration().fixtures {
        let z = enumerate_partition(fx.n, &fx.params).unwrap();
        assert!(
            (z / fx.z - 1.0).abs() < 1e-13,
            "{:?}: {z} vs {}",
            fx.params,
            fx.z
        );
        let z_pf = partition_via_pfaffian(fx.n, &fx.params).unwrap();
        assert!(
            (z_pf / fx.z - 1.0).abs() < 1e-9,
            "{:?}: {z_pf} vs {}",
            fx.params,
            fx.z
        );
    }
}

#[test]
fn diagonal_correlations_match_fixture() {
    for fx in enumeration().fixtures {
        for CorrelationEntry { e, f, value } in &fx.correlations {
            let got = exact_correlation(fx.n, &fx.params, *e, *f).unwrap();
            assert!(
                (got - value).abs() < 1e-13,
                "{:?} ({e}, {f}): {got} vs {value}",
                fx.params
            );
        }
    }
}

#[test]
fn fixed_diagonal_pair_at_two_one_one() {
    let l = build_torus(2).unwrap();
    let (e, f) = (l.edge_at(0, 0, EdgeKind::B), l.edge_at(1, 0, EdgeKind::B));
    let fx = enumeration()
        .fixtures
        .into_iter()
        .find(|fx| fx.params.as_array() == [2.0, 1.0, 1.0])
        .unwrap();
    let want = fx
        .correlations
        .iter()
        .find(|c| (c.e, c.f) == (e, f))
        .unwrap()
        .value;
    let got = exact_correlation(2, &fx.params, e, f).unwrap();
    assert!((got - want).abs() < 1e-13);
}

#[test]
fn max_type_a_cluster_distribution_under_uniform_measure() {
    let fx: ClusterFile =
        serde_json::from_str(include_str!("fixtures/max_type_a_n2.json")).unwrap();
    let l = build_torus(fx.n).unwrap();
    let table =
        exact_measure(fx.n, &onetwo_core::ModelParams::new(1.0, 1.0, 1.0).unwrap()).unwrap();
    let mut prob = vec![0.0; 2 * fx.n * fx.n + 1];
    let mut count = vec![0usize; prob.len()];
    for (&code, &q) in table.codes.iter().zip(&table.probabilities) {
        let sigma = OneTwoConfig::from_code(code, l.num_edges());
        let s = cluster_decompose(&l, &sigma)
            .unwrap()
            .largest_of_type(EdgeKind::A);
        prob[s] += q;
        count[s] += 1;
    }
    let total: usize = fx.max_type_a_cluster.iter().map(|b| b.count).sum();
    assert_eq!(total, table.len());
    for bin in &fx.max_type_a_cluster {
        assert_eq!(count[bin.size], bin.count, "size {}", bin.size);
        assert!((prob[bin.size] - bin.probability).abs() < 1e-13);
    }
}
