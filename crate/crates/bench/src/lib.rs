//! Synthetic inputs for the benchmarks.

use capcast_core::{numeric_to_date, Ceilings, Dataset, FrontierPoint, ModelRecord};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub fn random_points(n: usize, seed: u64) -> Vec<FrontierPoint> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..n)
        .map(|i| {
            FrontierPoint::new(
                format!("p{i}"),
                rng.random_range(0.0..10.0),
                rng.random_range(0.0..1.0),
            )
        })
        .collect()
}

/// Noisy sigmoid samples with slope `a` and offset `b`.
pub fn sigmoid_points(n: usize, a: f64, b: f64, seed: u64) -> Vec<(f64, f64)> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..n)
        .map(|i| {
            let x = -b / a - 4.0 / a + 8.0 / a * i as f64 / (n - 1) as f64;
            let y = 1.0 / (1.0 + (-(a * x + b)).exp()) + rng.random_range(-0.02..0.02);
            (x, y.clamp(0.0, 1.0))
        })
        .collect()
}

/// Models with a latent capability driving Elo and `benchmarks` scores.
pub fn synthetic_dataset(n: usize, benchmarks: usize, seed: u64) -> Dataset {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let names: Vec<String> = (0..benchmarks).map(|j| format!("b{j}")).collect();
    let records = (0..n)
        .map(|i| {
            let year = 2022.0 + 3.0 * i as f64 / n as f64;
            let skill = (year - 2022.0) + rng.random_range(-0.7..0.7);
            let mut r =
                ModelRecord::new(format!("m{i:04}"), numeric_to_date(year).expect("in range"))
                    .with_elo(1000.0 + 100.0 * skill)
                    .with_training(rng.random_range(1e9..1e11), rng.random_range(1e12..1.5e13));
            for (j, b) in names.iter().enumerate() {
                let t = 1.5 * (skill - 1.0 - 0.3 * j as f64) + rng.random_range(-0.3..0.3);
                r = r.with_score(b.clone(), 1.0 / (1.0 + (-t).exp()));
            }
            r
        })
        .collect();
    Dataset::new(records, names, Ceilings::default()).expect("valid synthetic data")
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn generators_are_deterministic_and_valid() {
        assert_eq!(random_points(20, 5), random_points(20, 5));
        let ds = synthetic_dataset(40, 4, 1);
        assert_eq!(ds.len(), 40);
        assert_eq!(ds.benchmarks().count(), 4);
        assert!(sigmoid_points(10, 1.0, 0.0, 0)
            .iter()
            .all(|p| (0.0..=1.0).contains(&p.1)));
    }
}
