use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::{CostSpec, GridMetric, Metric, OtInstance};
use crate::error::{OtError, Result};

/// Image families used to build synthetic grid instances.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum SyntheticKind {
    UniformRandom,
    GaussianBlob,
    ShiftedGaussian,
    TwoBlobs,
    Checkerboard,
}

impl SyntheticKind {
    pub const ALL: [SyntheticKind; 5] = [
        SyntheticKind::UniformRandom,
        SyntheticKind::GaussianBlob,
        SyntheticKind::ShiftedGaussian,
        SyntheticKind::TwoBlobs,
        SyntheticKind::Checkerboard,
    ];

    pub fn name(self) -> &'static str {
        match self {
            SyntheticKind::UniformRandom => "uniform-random",
            SyntheticKind::GaussianBlob => "gaussian-blob",
            SyntheticKind::ShiftedGaussian => "shifted-gaussian",
            SyntheticKind::TwoBlobs => "two-blobs",
            SyntheticKind::Checkerboard => "checkerboard",
        }
    }

    pub fn parse(s: &str) -> Option<SyntheticKind> {
        Self::ALL.into_iter().find(|k| k.name() == s)
    }
}

impl std::fmt::Display for SyntheticKind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.name())
    }
}

// Blobs keep a small floor so that no pixel is exactly empty.
const BLOB_FLOOR: f64 = 1e-3;

/// Pair of `res × res` images from one family, normalized to unit mass.
pub fn synthetic_instance(
    res: usize,
    kind: SyntheticKind,
    metric: Metric,
    seed: u64,
) -> Result<OtInstance> {
    if res < 2 {
        return Err(OtError::Parameter(format!("grid resolution must be at least 2, got {res}")));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let (a, b) = match kind {
        SyntheticKind::UniformRandom => (uniform(res, &mut rng), uniform(res, &mut rng)),
        SyntheticKind::GaussianBlob => {
            let a = blob_image(res, &[random_blob(res, &mut rng)]);
            let b = blob_image(res, &[random_blob(res, &mut rng)]);
            (a, b)
        }
        SyntheticKind::ShiftedGaussian => {
            let blob = random_blob(res, &mut rng);
            let angle = rng.gen_range(0.0..std::f64::consts::TAU);
            let shift = 0.25 * res as f64;
            let moved = Blob {
                row: blob.row + shift * angle.cos(),
                col: blob.col + shift * angle.sin(),
                ..blob
            };
            (blob_image(res, &[blob]), blob_image(res, &[moved]))
        }
        SyntheticKind::TwoBlobs => {
            let a = blob_image(res, &[random_blob(res, &mut rng), random_blob(res, &mut rng)]);
            let b = blob_image(res, &[random_blob(res, &mut rng), random_blob(res, &mut rng)]);
            (a, b)
        }
        SyntheticKind::Checkerboard => (checkerboard(res, &mut rng), checkerboard(res, &mut rng)),
    };
    OtInstance::new(normalized(a), normalized(b), CostSpec::Grid(GridMetric::square(res, metric)))
}

/// Random dense costs in `[0, 1)` and random positive marginals.
pub fn random_explicit_instance(m: usize, n: usize, seed: u64) -> Result<OtInstance> {
    if m == 0 || n == 0 {
        return Err(OtError::Parameter("m and n must be positive".into()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let a = normalized((0..m).map(|_| rng.gen_range(0.05..1.0)).collect());
    let b = normalized((0..n).map(|_| rng.gen_range(0.05..1.0)).collect());
    let costs = (0..m * n).map(|_| rng.gen::<f64>()).collect();
    OtInstance::new(a, b, CostSpec::Explicit(costs))
}

/// Sources and sinks at random points of an 8×8 integer lattice, with costs
/// given by `metric`. Shapes need not be square.
pub fn point_cloud_instance(m: usize, n: usize, metric: Metric, seed: u64) -> Result<OtInstance> {
    if m == 0 || n == 0 {
        return Err(OtError::Parameter("m and n must be positive".into()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut point = || (rng.gen_range(0..8) as f64, rng.gen_range(0..8) as f64);
    let src: Vec<_> = (0..m).map(|_| point()).collect();
    let dst: Vec<_> = (0..n).map(|_| point()).collect();
    let mut costs = Vec::with_capacity(m * n);
    for &(r2, c2) in &dst {
        for &(r1, c1) in &src {
            costs.push(metric.distance(r1 - r2, c1 - c2));
        }
    }
    let a = normalized((0..m).map(|_| rng.gen_range(0.05..1.0)).collect());
    let b = normalized((0..n).map(|_| rng.gen_range(0.05..1.0)).collect());
    OtInstance::new(a, b, CostSpec::Explicit(costs))
}

fn normalized(mut v: Vec<f64>) -> Vec<f64> {
    let total: f64 = v.iter().sum();
    v.iter_mut().for_each(|x| *x /= total);
    v
}

fn uniform(res: usize, rng: &mut ChaCha8Rng) -> Vec<f64> {
    // Keep pixels away from zero; a few exactly empty pixels are allowed by the
    // model but make the uniform class needlessly degenerate.
    (0..res * res).map(|_| rng.gen_range(0.01..1.0)).collect()
}

#[derive(Debug, Clone, Copy)]
struct Blob {
    row: f64,
    col: f64,
    sigma: f64,
    weight: f64,
}

fn random_blob(res: usize, rng: &mut ChaCha8Rng) -> Blob {
    let r = res as f64;
    Blob {
        row: rng.gen_range(0.2..0.8) * (r - 1.0),
        col: rng.gen_range(0.2..0.8) * (r - 1.0),
        sigma: rng.gen_range(0.12..0.25) * r,
        weight: rng.gen_range(0.5..1.0),
    }
}

fn blob_image(res: usize, blobs: &[Blob]) -> Vec<f64> {
    let mut img = vec![0.0; res * res];
    for (p, px) in img.iter_mut().enumerate() {
        let (row, col) = ((p % res) as f64, (p / res) as f64);
        *px = blobs
            .iter()
            .map(|b| {
                let d2 = (row - b.row).powi(2) + (col - b.col).powi(2);
                b.weight * (-d2 / (2.0 * b.sigma * b.sigma)).exp()
            })
            .sum();
    }
    let peak = img.iter().cloned().fold(0.0, f64::max);
    img.iter_mut().for_each(|x| *x += BLOB_FLOOR * peak);
    img
}

fn checkerboard(res: usize, rng: &mut ChaCha8Rng) -> Vec<f64> {
    let cell = rng.gen_range(1..=(res / 4).max(1));
    let phase = rng.gen_range(0..2usize);
    (0..res * res)
        .map(|p| {
            let (row, col) = (p % res, p / res);
            if (row / cell + col / cell + phase) % 2 == 0 {
                1.0
            } else {
                0.2
            }
        })
        .collect()
}
