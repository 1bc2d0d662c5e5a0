//! Fixed-seed fixtures shared by the benchmarks.

use nbpack_core::generate::{random_family, random_full};
use nbpack_core::SetFunction;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub const SEED: u64 = 0x5eed;

pub fn full_instance(n: usize) -> SetFunction {
    random_full(&mut ChaCha8Rng::seed_from_u64(SEED ^ n as u64), n, 10.0)
}

pub fn family_instance(n: usize, sets: usize) -> SetFunction {
    random_family(
        &mut ChaCha8Rng::seed_from_u64(SEED ^ (n * 131 + sets) as u64),
        n,
        sets,
        10.0,
    )
}
