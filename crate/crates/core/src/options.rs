use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// Knobs shared by the sampling-based certifiers.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Options {
    /// Candidate point sets tried by the sample-point search.
    pub trials: usize,
    /// Grid size for brute-force checks.
    pub budget: usize,
    pub seed: u64,
}

impl Default for Options {
    fn default() -> Self {
        Self {
            trials: 64,
            budget: 4096,
            seed: 0x5eed_cafe,
        }
    }
}

impl Options {
    pub fn with_seed(seed: u64) -> Self {
        Self {
            seed,
            ..Self::default()
        }
    }

    /// Independent stream for a named sub-computation.
    pub fn rng(&self, stream: u64) -> ChaCha8Rng {
        let mut r = ChaCha8Rng::seed_from_u64(self.seed);
        r.set_stream(stream);
        r
    }
}
