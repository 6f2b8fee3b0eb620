//! Seeded synthetic instances for tests and the CLI.
//!
//! Everything here is deterministic in the seed (ChaCha8), so runs are
//! reproducible across platforms.

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::energy::{EnergyModel, GraphTopology, LabelSpace, UnaryTable};
use crate::error::Result;
use crate::priors::{Prior, PriorKind};
use crate::stereo::{GrayImage, ImagePair};

fn random_model(
    topo: GraphTopology,
    labels: usize,
    kind: PriorKind,
    trunc: usize,
    weight_scale: f64,
    rng: &mut ChaCha8Rng,
) -> Result<EnergyModel> {
    let n = topo.node_count();
    let unary: Vec<f64> = (0..n * labels).map(|_| rng.random_range(0.0..10.0)).collect();
    let weights: Vec<f64> =
        (0..topo.edge_count()).map(|_| weight_scale * rng.random_range(0.25..1.25)).collect();
    EnergyModel::new(
        topo,
        LabelSpace::new(labels)?,
        UnaryTable::new(unary, n, labels)?,
        Prior::make(kind, trunc, labels)?,
        weights,
    )
}

/// Random chain with uniform unaries and jittered edge weights.
pub fn chain_model(
    nodes: usize,
    labels: usize,
    kind: PriorKind,
    trunc: usize,
    weight_scale: f64,
    seed: u64,
) -> Result<EnergyModel> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    random_model(GraphTopology::chain(nodes)?, labels, kind, trunc, weight_scale, &mut rng)
}

/// Random 4-connected grid with uniform unaries.
pub fn grid_model(
    width: usize,
    height: usize,
    labels: usize,
    kind: PriorKind,
    trunc: usize,
    weight_scale: f64,
    seed: u64,
) -> Result<EnergyModel> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    random_model(GraphTopology::grid4(width, height)?, labels, kind, trunc, weight_scale, &mut rng)
}

/// Grid with bimodal unaries: every node has two wells in opposite thirds
/// of the label range with randomized depths. Window-limited solvers have
/// to climb the barrier between the wells; full-range solvers can hop it.
pub fn bimodal_grid_model(
    width: usize,
    height: usize,
    labels: usize,
    kind: PriorKind,
    trunc: usize,
    weight_scale: f64,
    seed: u64,
) -> Result<EnergyModel> {
    assert!(labels >= 6, "bimodal unaries need some label room");
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let topo = GraphTopology::grid4(width, height)?;
    let n = topo.node_count();
    let mut unary = Vec::with_capacity(n * labels);
    for _ in 0..n {
        let m1 = rng.random_range(0..labels / 3);
        let m2 = rng.random_range(2 * labels / 3..labels);
        let d1 = rng.random_range(0.0..4.0);
        let d2 = rng.random_range(0.0..4.0);
        for l in 0..labels {
            let w1 = (l as f64 - m1 as f64).powi(2) + d1;
            let w2 = (l as f64 - m2 as f64).powi(2) + d2;
            unary.push(w1.min(w2) + rng.random_range(0.0..0.5));
        }
    }
    let weights: Vec<f64> =
        (0..topo.edge_count()).map(|_| weight_scale * rng.random_range(0.25..1.25)).collect();
    EnergyModel::new(
        topo,
        LabelSpace::new(labels)?,
        UnaryTable::new(unary, n, labels)?,
        Prior::make(kind, trunc, labels)?,
        weights,
    )
}

/// A textured stereo pair whose true disparity is `shift` everywhere: the
/// right image is the left shifted by `shift` columns. The texture is a
/// steep horizontal triangle wave plus a little jitter — the slope gives
/// every wrong disparity a real per-pixel cost that survives the
/// half-sample slack of the matching cost, unlike i.i.d. noise.
pub fn shifted_ramp_pair(width: usize, height: usize, shift: usize, seed: u64) -> ImagePair {
    assert!(shift < width);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut left = vec![0u8; width * height];
    for r in 0..height {
        for c in 0..width {
            let m = c % 16;
            let tri = if m < 8 { m * 30 } else { (16 - m) * 30 };
            let noise: i32 = rng.random_range(-7..=7);
            left[r * width + c] = (tri as i32 + 7 + noise).clamp(0, 255) as u8;
        }
    }
    let mut right = vec![0u8; width * height];
    for r in 0..height {
        for c in 0..width {
            let src = (c + shift).min(width - 1);
            right[r * width + c] = left[r * width + src];
        }
    }
    let left = GrayImage::new(width, height, left).unwrap();
    let right = GrayImage::new(width, height, right).unwrap();
    ImagePair::new(left, right).unwrap()
}
