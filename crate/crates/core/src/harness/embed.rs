use crate::error::Result;
use crate::sketch::{verify_embedding, SketchKind, SketchOperator};

use super::generators::random_orthonormal;
use super::methods::sketch_seed;

/// Outcome of repeated embedding checks.
#[derive(Clone, Debug, PartialEq)]
pub struct EmbedCheck {
    pub kind: SketchKind,
    pub k: usize,
    pub d: usize,
    pub m: usize,
    pub epsilon: f64,
    /// `epsilon_observed` of every trial, in trial order.
    pub observed: Vec<f64>,
}

impl EmbedCheck {
    pub fn passes(&self) -> usize {
        self.observed.iter().filter(|&&e| e <= self.epsilon).count()
    }

    pub fn trials(&self) -> usize {
        self.observed.len()
    }
}

/// Draws `trials` independent pairs (random `m × d` orthonormal `W`, sketch `Θ`) and
/// records the observed distortion of each. Leverage sketches are built from `W`.
pub fn embed_check(
    kind: SketchKind,
    k: usize,
    d: usize,
    m: usize,
    trials: usize,
    epsilon: f64,
    seed: u64,
) -> Result<EmbedCheck> {
    let mut observed = Vec::with_capacity(trials);
    for t in 0..trials as u64 {
        let trial_seed = seed.wrapping_mul(1_000_003).wrapping_add(t);
        let w = random_orthonormal(m, d, trial_seed);
        let theta = SketchOperator::build(kind, k, m, sketch_seed(trial_seed), Some(&w))?;
        observed.push(verify_embedding(&theta, &w, epsilon).epsilon_observed);
    }
    Ok(EmbedCheck {
        kind,
        k,
        d,
        m,
        epsilon,
        observed,
    })
}
