//! Shared fixtures for the kernel benchmarks.

use quintlab_core::manybody::{BosonicState, ManyBodyConfig, ManyBodySystem, PotentialProfile};
use quintlab_core::random::{random_band_limited, rng_for};
use quintlab_core::{GridSpec, TorusField};

/// Unit-norm random field with the full spectrum populated.
pub fn field(dim: usize, n: usize) -> TorusField {
    let g = GridSpec::new(dim, n).expect("benchmark grids are valid");
    random_band_limited(g, g.nyquist() as f64, &mut rng_for(0, 0))
}

/// Interacting system on `T^1` and a random symmetric state for it.
pub fn many_body(n: usize, particles: usize) -> (ManyBodySystem, BosonicState) {
    let g = GridSpec::new(1, n).expect("benchmark grids are valid");
    let cfg = ManyBodyConfig::new(g, particles, 0.1, PotentialProfile::default()).expect("valid system");
    let system = ManyBodySystem::new(cfg).expect("valid system");
    let psi = BosonicState::random_symmetric(g, particles, (n / 2) as f64, &mut rng_for(0, 1))
        .expect("valid state");
    (system, psi)
}
