//! Random-iteration rendering of the attractor.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::system::FractalSystem;

pub const DEFAULT_BURN_IN: usize = 64;

#[derive(Debug, Clone, PartialEq)]
pub struct ChaosPoints {
    pub points: Vec<(f64, f64)>,
    pub seed: u64,
    pub burn_in: usize,
}

/// Iterate `(x, y) <- W_i(x, y)` with `i` drawn uniformly from a seeded
/// ChaCha stream, starting from `(x_0, f(x_0))`. The first `burn_in`
/// iterates are discarded.
pub fn chaos_game(sys: &FractalSystem, n_points: usize, burn_in: usize, seed: u64) -> ChaosPoints {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let p = sys.partition();
    let n = sys.n();
    let mut x = p.lo();
    let mut y = sys.knot_values()[0];
    let mut points = Vec::with_capacity(n_points);
    for step in 0..burn_in + n_points {
        let i = rng.gen_range(0..n);
        y = sys.alpha()[i] * y + sys.q_eval(i, x);
        x = p.map(i, x);
        if step >= burn_in {
            points.push((x, y));
        }
    }
    ChaosPoints {
        points,
        seed,
        burn_in,
    }
}
