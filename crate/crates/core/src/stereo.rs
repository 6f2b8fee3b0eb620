//! Stereo-correspondence models from rectified image pairs.
//!
//! Unary costs use the sampling-insensitive pixel dissimilarity of
//! Birchfield and Tomasi: a pixel is compared against the half-sample
//! interpolated neighborhood of its match in the other image, symmetrically,
//! so sub-pixel sampling shifts do not get billed as mismatch. Edge weights
//! come either from a constant or from a gradient-thresholded rule on the
//! left image.

use std::io::BufRead;

use crate::energy::{EnergyModel, GraphTopology, LabelSpace, Labeling, UnaryTable};
use crate::error::{Error, Result};
use crate::pgm;
use crate::priors::{Prior, PriorKind};

/// 8-bit grayscale raster.
#[derive(Debug, Clone)]
pub struct GrayImage {
    width: usize,
    height: usize,
    data: Vec<u8>,
}

impl GrayImage {
    pub fn new(width: usize, height: usize, data: Vec<u8>) -> Result<GrayImage> {
        if data.len() != width * height {
            return Err(Error::DimensionMismatch(format!(
                "{} bytes for a {width}x{height} image",
                data.len()
            )));
        }
        Ok(GrayImage { width, height, data })
    }

    pub fn from_pgm<R: BufRead>(r: R) -> Result<GrayImage> {
        let img = pgm::read_pgm(r)?;
        GrayImage::new(img.width, img.height, img.data)
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn data(&self) -> &[u8] {
        &self.data
    }

    #[inline]
    fn at(&self, row: usize, col: usize) -> f64 {
        self.data[row * self.width + col] as f64
    }
}

/// A rectified stereo pair (same dimensions).
#[derive(Debug, Clone)]
pub struct ImagePair {
    pub left: GrayImage,
    pub right: GrayImage,
}

impl ImagePair {
    pub fn new(left: GrayImage, right: GrayImage) -> Result<ImagePair> {
        if left.width != right.width || left.height != right.height {
            return Err(Error::DimensionMismatch("stereo pair dimensions differ".into()));
        }
        Ok(ImagePair { left, right })
    }
}

/// Edge weight rule: constant, or thresholded on the absolute left-image
/// intensity difference across the edge.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum WeightRule {
    Constant(f64),
    /// `high` when the gradient is at most `grad_threshold`, else `low`.
    Thresholded { high: f64, low: f64, grad_threshold: f64 },
}

impl WeightRule {
    fn weight(&self, grad: f64) -> f64 {
        match *self {
            WeightRule::Constant(w) => w,
            WeightRule::Thresholded { high, low, grad_threshold } => {
                if grad <= grad_threshold {
                    high
                } else {
                    low
                }
            }
        }
    }
}

/// One row of the benchmark parameter table.
#[derive(Debug, Clone, Copy)]
pub struct StereoParams {
    pub disparities: usize,
    pub prior_kind: PriorKind,
    pub trunc: usize,
    pub weights: WeightRule,
}

/// Benchmark presets: name -> (disparity count, prior, T, weight rule).
pub fn preset(name: &str) -> Option<StereoParams> {
    let p = match name {
        "map" => StereoParams {
            disparities: 30,
            prior_kind: PriorKind::TruncatedLinear,
            trunc: 6,
            weights: WeightRule::Constant(4.0),
        },
        "venus" => StereoParams {
            disparities: 20,
            prior_kind: PriorKind::TruncatedQuadratic,
            trunc: 3,
            weights: WeightRule::Constant(50.0),
        },
        "sawtooth" => StereoParams {
            disparities: 20,
            prior_kind: PriorKind::TruncatedQuadratic,
            trunc: 3,
            weights: WeightRule::Constant(20.0),
        },
        "teddy" => StereoParams {
            disparities: 60,
            prior_kind: PriorKind::TruncatedLinear,
            trunc: 8,
            weights: WeightRule::Thresholded { high: 30.0, low: 10.0, grad_threshold: 10.0 },
        },
        "cones" => StereoParams {
            disparities: 60,
            prior_kind: PriorKind::Cauchy,
            trunc: 8,
            weights: WeightRule::Constant(10.0),
        },
        _ => return None,
    };
    Some(p)
}

/// Symmetric sampling-insensitive dissimilarity between pixel `ca` of `a`
/// and pixel `cb` of `b` on row `r`.
fn bt_between(a: &GrayImage, b: &GrayImage, r: usize, ca: usize, cb: usize) -> f64 {
    let half_range = |img: &GrayImage, c: usize| {
        let center = img.at(r, c);
        let left = if c > 0 { (center + img.at(r, c - 1)) / 2.0 } else { center };
        let right = if c + 1 < img.width { (center + img.at(r, c + 1)) / 2.0 } else { center };
        (center.min(left).min(right), center.max(left).max(right))
    };
    let (bmin, bmax) = half_range(b, cb);
    let va = a.at(r, ca);
    let da = (va - bmax).max(bmin - va).max(0.0);
    let (amin, amax) = half_range(a, ca);
    let vb = b.at(r, cb);
    let db = (vb - amax).max(amin - vb).max(0.0);
    da.min(db)
}

/// Unary matching cost of assigning disparity `d` to left pixel
/// (`row`, `col`). Disparities that push the right-image sample out of
/// frame get the maximum in-frame cost of that pixel, so the border does
/// not attract out-of-frame labels.
pub fn bt_unary(pair: &ImagePair, row: usize, col: usize, d: usize, disparities: usize) -> f64 {
    assert!(d < disparities, "disparity {d} out of range");
    if d <= col {
        return bt_between(&pair.left, &pair.right, row, col, col - d);
    }
    (0..disparities.min(col + 1))
        .map(|q| bt_between(&pair.left, &pair.right, row, col, col - q))
        .fold(0.0, f64::max)
}

/// Builds the 4-connected grid model for a stereo pair.
pub fn build_stereo_model(pair: &ImagePair, params: &StereoParams) -> Result<EnergyModel> {
    let (w, h) = (pair.left.width, pair.left.height);
    if w <= params.disparities {
        return Err(Error::InvalidModel(format!(
            "image width {w} must exceed the disparity count {}",
            params.disparities
        )));
    }
    let l = params.disparities;
    let topo = GraphTopology::grid4(w, h)?;
    let mut unary = UnaryTable::zeros(w * h, l);
    for r in 0..h {
        for c in 0..w {
            let node = r * w + c;
            let in_frame = l.min(c + 1);
            let mut max_cost = 0.0f64;
            for d in 0..in_frame {
                let cost = bt_between(&pair.left, &pair.right, r, c, c - d);
                max_cost = max_cost.max(cost);
                unary.set(node, d, cost);
            }
            for d in in_frame..l {
                unary.set(node, d, max_cost);
            }
        }
    }
    let weights: Vec<f64> = topo
        .edges()
        .iter()
        .map(|&(i, j)| {
            let (ri, ci) = (i / w, i % w);
            let (rj, cj) = (j / w, j % w);
            let grad = (pair.left.at(ri, ci) - pair.left.at(rj, cj)).abs();
            params.weights.weight(grad)
        })
        .collect();
    let prior = Prior::make(params.prior_kind, params.trunc, l)?;
    EnergyModel::new(topo, LabelSpace::new(l)?, unary, prior, weights)
}

/// Renders a disparity labeling as an 8-bit image scaled by
/// floor(255 / (l - 1)).
pub fn disparity_image(x: &Labeling, width: usize, height: usize, disparities: usize) -> Vec<u8> {
    assert_eq!(x.len(), width * height);
    let scale = 255 / (disparities - 1).max(1);
    x.as_slice().iter().map(|&d| (d * scale).min(255) as u8).collect()
}
