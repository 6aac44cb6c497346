//! Seeded random fields. Every draw is a pure function of `(seed, stream)`, so
//! sweeps can run in parallel and still be reproducible.

use num_complex::Complex64;
use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use crate::field::{Spectrum, TorusField};
use crate::grid::{japanese_bracket, sup_norm, GridSpec};

/// Generator for the `stream`-th independent sample under `seed`.
pub fn rng_for(seed: u64, stream: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}

fn gaussian(rng: &mut impl Rng) -> Complex64 {
    Complex64::new(rng.sample(StandardNormal), rng.sample(StandardNormal))
}

/// Field with independent complex Gaussian coefficients on the shell
/// `lower < |ξ|_∞ ≤ upper`, each scaled by `weight(ξ)`.
pub fn random_shell(
    grid: GridSpec,
    lower: f64,
    upper: f64,
    weight: impl Fn(&[i64]) -> f64,
    rng: &mut impl Rng,
) -> TorusField {
    let d = grid.dim();
    let mut spec = Spectrum::zeros(grid);
    for (flat, c) in spec.coeffs_mut().iter_mut().enumerate() {
        let xi = grid.frequency(flat);
        let r = sup_norm(&xi) as f64;
        let z = gaussian(rng);
        if r > lower && r <= upper {
            *c = z * weight(&xi[..d]);
        }
    }
    spec.to_field()
}

/// Gaussian coefficients on `|ξ|_∞ ≤ band`, rescaled to unit `L²` norm.
pub fn random_band_limited(grid: GridSpec, band: f64, rng: &mut impl Rng) -> TorusField {
    let f = random_shell(grid, -1.0, band, |_| 1.0, rng);
    f.normalized().unwrap_or(f)
}

/// Gaussian coefficients weighted by `⟨ξ⟩^{−decay}` on `|ξ|_∞ ≤ band`, with
/// unit `L²` norm.
pub fn random_power_law(grid: GridSpec, band: f64, decay: f64, rng: &mut impl Rng) -> TorusField {
    let f = random_shell(grid, -1.0, band, |xi| japanese_bracket(xi).powf(-decay), rng);
    f.normalized().unwrap_or(f)
}
