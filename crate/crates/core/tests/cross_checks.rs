//! Agreement between the Monte Carlo, finite-torus Pfaffian and
//! infinite-volume computations.

use onetwo_core::lattice::{build_decorated, build_torus, EdgeKind};
use onetwo_core::mcmc::{estimate_correlation, init_chain};
use onetwo_core::pfaffian::{
    correlation_exact_torus, correlation_pf, kasteleyn_orient, Grid, Volume,
};
use onetwo_core::{KasteleynSystem, ModelParams};

fn system(n: usize, a: f64, b: f64, c: f64) -> KasteleynSystem {
    let p = ModelParams::new(a, b, c).unwrap();
    kasteleyn_orient(&build_decorated(&build_torus(n).unwrap(), &p).unwrap()).unwrap()
}

fn diagonal_pair(sys: &KasteleynSystem, k: i64) -> (usize, usize) {
    let l = sys.graph().lattice();
    (l.edge_at(0, 0, EdgeKind::B), l.edge_at(k, 0, EdgeKind::B))
}

#[test]
fn sampler_agrees_with_finite_torus_pfaffian_at_n32() {
    let sys = system(32, 2.0, 1.0, 1.0);
    let (e, f) = diagonal_pair(&sys, 6);
    let pf = correlation_pf(&sys, e, f, Volume::Finite(sys.dominant_twist())).unwrap();
    let mut chain = init_chain(32, sys.params(), 21).unwrap();
    let est = estimate_correlation(&mut chain, e, f, 6000, 1000).unwrap();
    assert!((est.mean - pf).abs() < 3.0 * est.stderr, "{est:?} vs {pf}");
}

#[test]
fn sampler_agrees_with_exact_torus_value_in_the_ordered_phase() {
    let sys = system(6, 6.0, 1.0, 1.0);
    let (e, f) = diagonal_pair(&sys, 3);
    let exact = correlation_exact_torus(&sys, e, f).unwrap();
    let mut chain = init_chain(6, sys.params(), 22).unwrap();
    let est = estimate_correlation(&mut chain, e, f, 40_000, 2000).unwrap();
    assert!(exact > 0.5);
    assert!(
        (est.mean - exact).abs() < 3.0 * est.stderr,
        "{est:?} vs {exact}"
    );
}

#[test]
fn finite_volume_inverse_converges_to_the_limit() {
    for (a, k) in [(2.0, 3), (6.0, 3), (1.0, 2)] {
        let limit = {
            let sys = system(16, a, 1.0, 1.0);
            let (e, f) = diagonal_pair(&sys, k);
            correlation_pf(&sys, e, f, Volume::Infinite(Grid::HalfOffset)).unwrap()
        };
        let finite = |n: usize| {
            let sys = system(n, a, 1.0, 1.0);
            let (e, f) = diagonal_pair(&sys, k);
            correlation_pf(&sys, e, f, Volume::Finite(sys.dominant_twist())).unwrap()
        };
        let (d16, d32) = ((finite(16) - limit).abs(), (finite(32) - limit).abs());
        assert!(d32 <= d16 + 1e-12, "a = {a}: {d16:e} then {d32:e}");
        assert!(d32 < 1e-6, "a = {a}: {d32:e}");
    }
}

#[test]
fn trajectory_hashes_are_pinned() {
    let p = ModelParams::new(1.3, 0.7, 1.1).unwrap();
    let hash = |seed: u64| {
        let mut chain = init_chain(4, &p, seed).unwrap();
        chain.run(100);
        chain.state_hash()
    };
    assert_eq!(hash(1), 0xfc52_157a_3f9a_996c);
    assert_eq!(hash(2), 0xa3e2_9bee_d06e_b651);
}
