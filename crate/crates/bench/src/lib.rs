//! Fixtures shared by the benchmarks in `benches/`.

use transport_core::nav::astar::BoolGrid;
use transport_core::rng::mix64;
use transport_core::suite::{Split, Suite, SuiteParams};

/// Square grid with roughly `density` of its cells blocked; the corners stay open.
pub fn random_grid(n: usize, density: f64, seed: u64) -> BoolGrid {
    let mut g = BoolGrid::new(n, n);
    let cut = (density * u64::MAX as f64) as u64;
    for y in 0..n {
        for x in 0..n {
            let h = mix64(seed ^ ((y * n + x) as u64).wrapping_mul(0x9E37_79B9_7F4A_7C15));
            g.set(x, y, h < cut);
        }
    }
    g.set(0, 0, false);
    g.set(n - 1, n - 1, false);
    g
}

/// A small test-split suite, built in memory.
pub fn small_suite(houses: usize, tasks_per_house: usize, seed: u64) -> Suite {
    let mut p = SuiteParams::new(Split::Test, seed);
    p.houses = houses;
    p.tasks_per_house = tasks_per_house;
    Suite::build(&p).expect("suite generation succeeds")
}
