//! Deterministic sampling used by the probes. All randomness flows from an
//! explicit 64-bit seed through a portable stream cipher generator, and every
//! probe derives its own stream from the run seed and its name, so runs are
//! reproducible byte for byte and reordering probes does not change any
//! individual result.

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::lattice::LatticeElement;
use crate::pwl::PwlFunc;
use crate::rational::{int, rat, Rational};

/// Default run seed.
pub const DEFAULT_SEED: u64 = 0xA11CE;

/// Default number of randomized trials per probe.
pub const DEFAULT_TRIALS: u32 = 200;

/// Denominator of the rational sampling grid.
pub const GRID_DENOMINATOR: i64 = 8;

/// Extent of the sampling grid: coordinates are k/8 with |k| ≤ 16.
pub const GRID_EXTENT: i64 = 16;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SampleSpec {
    pub trials: u32,
    pub seed: u64,
}

impl Default for SampleSpec {
    fn default() -> Self {
        Self { trials: DEFAULT_TRIALS, seed: DEFAULT_SEED }
    }
}

impl SampleSpec {
    pub fn with_seed(seed: u64) -> Self {
        Self { seed, ..Self::default() }
    }

    /// The generator for a named probe under this spec.
    pub fn rng_for(&self, label: &str) -> ChaCha8Rng {
        rng(derive_seed(self.seed, label))
    }
}

/// Stable seed derivation: hash the run seed together with a label and take
/// the first eight bytes. Distinct labels give independent streams.
pub fn derive_seed(base: u64, label: &str) -> u64 {
    let mut hasher = Sha256::new();
    hasher.update(base.to_le_bytes());
    hasher.update(label.as_bytes());
    let digest = hasher.finalize();
    u64::from_le_bytes(digest[..8].try_into().expect("digest has 32 bytes"))
}

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// One rational from the grid {k/8 : |k| ≤ 16}.
pub fn sample_rational(rng: &mut ChaCha8Rng) -> Rational {
    rat(rng.random_range(-GRID_EXTENT..=GRID_EXTENT), GRID_DENOMINATOR)
}

/// One nonnegative rational from the grid {k/8 : 0 ≤ k ≤ 16}.
pub fn sample_nonneg_rational(rng: &mut ChaCha8Rng) -> Rational {
    rat(rng.random_range(0..=GRID_EXTENT), GRID_DENOMINATOR)
}

pub fn sample_element(rng: &mut ChaCha8Rng, dim: usize) -> LatticeElement {
    LatticeElement::new((0..dim).map(|_| sample_rational(rng)).collect())
        .expect("dim is positive")
}

pub fn sample_positive_element(rng: &mut ChaCha8Rng, dim: usize) -> LatticeElement {
    LatticeElement::new((0..dim).map(|_| sample_nonneg_rational(rng)).collect())
        .expect("dim is positive")
}

/// A pair (x, y) with |x| ≤ |y| coordinatewise: each coordinate of x is the
/// matching coordinate of y damped by a random factor in [−1, 1].
pub fn sample_dominated_pair(
    rng: &mut ChaCha8Rng,
    dim: usize,
) -> (LatticeElement, LatticeElement) {
    let y = sample_element(rng, dim);
    let x = LatticeElement::new(
        y.coords()
            .iter()
            .map(|c| c * rat(rng.random_range(-GRID_DENOMINATOR..=GRID_DENOMINATOR), GRID_DENOMINATOR))
            .collect(),
    )
    .expect("dim is positive");
    (x, y)
}

/// Random canonical piecewise-linear function: up to four interior
/// breakpoints on the sixteenths grid, values from the standard grid.
pub fn sample_pwl(rng: &mut ChaCha8Rng) -> PwlFunc {
    let mut cuts: Vec<i64> = (1..16).filter(|_| rng.random_bool(0.25)).collect();
    cuts.truncate(4);
    let mut ts = vec![int(0)];
    ts.extend(cuts.into_iter().map(|c| rat(c, 16)));
    ts.push(int(1));
    let points = ts.into_iter().map(|t| (t, sample_rational(rng))).collect();
    PwlFunc::new(points).expect("grid abscissae are valid")
}

/// Random positive piecewise-linear function.
pub fn sample_positive_pwl(rng: &mut ChaCha8Rng) -> PwlFunc {
    sample_pwl(rng).abs()
}
