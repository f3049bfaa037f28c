use rand_chacha::rand_core::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::numeric::quantile_unchecked;
use crate::selection::unit_open;

/// Largest repetition index representable in a stream id.
pub const MAX_REPS: usize = 1 << 48;

/// Independent ChaCha8 stream for one (repetition, study, truth block).
///
/// The key comes from the master seed; the 64-bit stream id packs the rest,
/// so streams never overlap and each can be generated on any thread.
pub fn stream_rng(master_seed: u64, rep: usize, study: u8, block: u8) -> ChaCha8Rng {
    debug_assert!(rep < MAX_REPS && study < 2 && block < 4);
    let mut rng = ChaCha8Rng::seed_from_u64(master_seed);
    rng.set_stream(((rep as u64) << 8) | (u64::from(study) << 4) | u64::from(block));
    rng
}

/// Standard normal draw by inversion of an open-interval uniform.
pub fn normal_draw(rng: &mut ChaCha8Rng) -> f64 {
    quantile_unchecked(unit_open(rng.next_u64()))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn streams_are_reproducible_and_distinct() {
        let a: Vec<u64> = (0..4).map({
            let mut r = stream_rng(9, 3, 1, 2);
            move |_| r.next_u64()
        }).collect();
        let b: Vec<u64> = (0..4).map({
            let mut r = stream_rng(9, 3, 1, 2);
            move |_| r.next_u64()
        }).collect();
        assert_eq!(a, b);
        for (rep, study, block) in [(4, 1, 2), (3, 0, 2), (3, 1, 3)] {
            let mut r = stream_rng(9, rep, study, block);
            assert_ne!(r.next_u64(), a[0]);
        }
        let mut other_seed = stream_rng(10, 3, 1, 2);
        assert_ne!(other_seed.next_u64(), a[0]);
    }

    #[test]
    fn normal_draws_have_unit_moments() {
        let mut rng = stream_rng(1, 0, 0, 0);
        let n = 200_000;
        let xs: Vec<f64> = (0..n).map(|_| normal_draw(&mut rng)).collect();
        let mean = xs.iter().sum::<f64>() / n as f64;
        let var = xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1) as f64;
        assert!(mean.abs() < 4.0 / (n as f64).sqrt());
        assert!((var - 1.0).abs() < 0.02);
    }
}
