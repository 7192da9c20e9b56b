//! Shared inputs for the benchmark suite.

use frontlab::{ProfileGrid, ReactionSpec, RieszFellerParams};

pub fn params(a: f64, theta: f64) -> RieszFellerParams {
    RieszFellerParams::new(a, theta).expect("valid benchmark parameters")
}

pub fn gaussian(h: f64, n: usize) -> ProfileGrid {
    let x0 = -0.5 * h * (n - 1) as f64;
    ProfileGrid::from_fn(x0, h, n, 0.0, 0.0, |x| (-x * x).exp()).expect("valid grid")
}

pub fn bistable() -> ReactionSpec {
    ReactionSpec::bistable_cubic(0.3)
}
