//! Shared helpers for the integration and acceptance suites.
#![allow(dead_code)]

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use rangemove::energy::{EnergyModel, GraphTopology, LabelSpace, Labeling, UnaryTable};
use rangemove::maxflow::FlowNetwork;
use rangemove::priors::{Prior, PriorKind};

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Random grid model sized to keep oracle enumeration cheap.
pub fn small_grid_model(seed: u64, kind: PriorKind) -> EnergyModel {
    let mut rng = rng(seed);
    loop {
        let w = rng.random_range(1..=3usize);
        let h = rng.random_range(1..=3usize);
        let labels = rng.random_range(2..=6usize);
        let states = (labels as u128).pow((w * h) as u32);
        if states > 300_000 {
            continue;
        }
        let trunc = rng.random_range(1..labels.max(2)).max(1);
        return random_model_on(GraphTopology::grid4(w, h).unwrap(), labels, kind, trunc, &mut rng);
    }
}

pub fn random_model_on(
    topo: GraphTopology,
    labels: usize,
    kind: PriorKind,
    trunc: usize,
    rng: &mut ChaCha8Rng,
) -> EnergyModel {
    let n = topo.node_count();
    let unary: Vec<f64> = (0..n * labels).map(|_| rng.random_range(0.0..10.0)).collect();
    let weights: Vec<f64> = (0..topo.edge_count()).map(|_| rng.random_range(0.0..2.0)).collect();
    EnergyModel::new(
        topo,
        LabelSpace::new(labels).unwrap(),
        UnaryTable::new(unary, n, labels).unwrap(),
        Prior::make(kind, trunc, labels).unwrap(),
        weights,
    )
    .unwrap()
}

/// Random labeling valid for the model.
pub fn random_labeling(model: &EnergyModel, rng: &mut ChaCha8Rng) -> Labeling {
    Labeling::new(
        (0..model.node_count()).map(|_| rng.random_range(0..model.label_count())).collect(),
    )
}

/// Random s-t network with up to `max_free` internal nodes.
pub fn random_network(seed: u64, max_free: usize) -> FlowNetwork {
    let mut rng = rng(seed);
    let free = rng.random_range(2..=max_free);
    let n = free + 2;
    let (s, t) = (0, n - 1);
    let mut net = FlowNetwork::new(n, s, t).unwrap();
    let arcs = rng.random_range(n..4 * n);
    for _ in 0..arcs {
        let u = rng.random_range(0..n - 1);
        let v = rng.random_range(1..n);
        if u == v {
            continue;
        }
        net.add_arc(u, v, rng.random_range(0.0..10.0)).unwrap();
    }
    net
}
