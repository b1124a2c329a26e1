//! Reproducible Gaussian increment streams with bridge refinement.
//!
//! Every scalar increment is drawn from a counter-based generator keyed by
//! `(seed, mode, level, step)`, so streams are independent of evaluation
//! order and safe to generate in parallel. Halving the grid splits each
//! increment with a Brownian bridge; the two halves are adjusted at the ulp
//! level so they sum to the parent increment exactly, which makes coupled
//! multi-level runs share one Brownian path bit for bit.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::{Error, Result};

fn splitmix64(mut x: u64) -> u64 {
    x = x.wrapping_add(0x9E37_79B9_7F4A_7C15);
    let mut z = x;
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

fn key(seed: u64, mode: u64, level: u64, step: u64) -> u64 {
    let mut s = splitmix64(seed ^ 0xA5A5_5A5A_DEAD_BEEF);
    for w in [mode, level, step] {
        s = splitmix64(s ^ w.wrapping_mul(0x2545_F491_4F6C_DD1D));
    }
    s
}

/// Standard normal draw for one counter key.
fn gaussian(k: u64) -> f64 {
    let mut rng = ChaCha8Rng::seed_from_u64(k);
    StandardNormal.sample(&mut rng)
}

fn offset_ulps(mut x: f64, k: i32) -> f64 {
    for _ in 0..k.unsigned_abs() {
        x = if k > 0 {
            f64::next_up(x)
        } else {
            f64::next_down(x)
        };
    }
    x
}

/// Splits `dw` into `(a, b)` with `a` close to `mid` and `a + b == dw`
/// exactly in floating point. One compensation step lands within an ulp or
/// two; a small lattice search over both components then pins the rounded
/// sum (walking only one component can step the sum by more than one of its
/// ulps when the other lives in a higher binade). The symmetric-split
/// fallback is exact by construction and unreachable for any realistic
/// increment magnitudes.
fn split_exact(dw: f64, mid: f64) -> (f64, f64) {
    const OFFSETS: [i32; 9] = [0, 1, -1, 2, -2, 3, -3, 4, -4];
    for da in OFFSETS {
        let a = offset_ulps(mid, da);
        let mut b = dw - a;
        let r = dw - (a + b);
        if r != 0.0 {
            b += r;
        }
        for db in OFFSETS {
            let bb = offset_ulps(b, db);
            if a + bb == dw {
                return (a, bb);
            }
        }
    }
    (dw / 2.0, dw - dw / 2.0)
}

/// Deterministic per-mode Gaussian increments on a time grid.
#[derive(Debug, Clone)]
pub struct NoiseIncrementStream {
    seed: u64,
    level: u32,
    times: Vec<f64>,
    /// `increments[step][mode]`
    increments: Vec<Vec<f64>>,
}

/// Draws `sqrt(dt) N(0,1)` increments for `n_modes` independent Brownian
/// motions on a strictly increasing grid.
pub fn sample_increments(n_modes: usize, seed: u64, times: &[f64]) -> Result<NoiseIncrementStream> {
    if times.len() < 2 || times.windows(2).any(|w| w[1] <= w[0]) {
        return Err(Error::GridMismatch(
            "time grid must be strictly increasing".into(),
        ));
    }
    let increments = (0..times.len() - 1)
        .map(|i| {
            let dt = times[i + 1] - times[i];
            (0..n_modes)
                .map(|j| dt.sqrt() * gaussian(key(seed, j as u64, 0, i as u64)))
                .collect()
        })
        .collect();
    Ok(NoiseIncrementStream {
        seed,
        level: 0,
        times: times.to_vec(),
        increments,
    })
}

impl NoiseIncrementStream {
    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn times(&self) -> &[f64] {
        &self.times
    }

    pub fn n_steps(&self) -> usize {
        self.increments.len()
    }

    pub fn n_modes(&self) -> usize {
        self.increments.first().map_or(0, Vec::len)
    }

    pub fn step(&self, i: usize) -> &[f64] {
        &self.increments[i]
    }

    /// Brownian-bridge refinement onto the half grid. Pair sums reproduce
    /// the parent increments exactly.
    pub fn refine_half(&self) -> NoiseIncrementStream {
        let n = self.n_steps();
        let mut times = Vec::with_capacity(2 * n + 1);
        let mut increments = Vec::with_capacity(2 * n);
        for i in 0..n {
            let t0 = self.times[i];
            let t1 = self.times[i + 1];
            let dt = t1 - t0;
            times.push(t0);
            times.push(0.5 * (t0 + t1));
            let row: Vec<(f64, f64)> = self.increments[i]
                .iter()
                .enumerate()
                .map(|(j, &dw)| {
                    let xi = gaussian(key(self.seed, j as u64, self.level as u64 + 1, i as u64));
                    let mid = 0.5 * dw + 0.5 * dt.sqrt() * xi;
                    split_exact(dw, mid)
                })
                .collect();
            increments.push(row.iter().map(|&(a, _)| a).collect());
            increments.push(row.iter().map(|&(_, b)| b).collect());
        }
        times.push(*self.times.last().unwrap());
        NoiseIncrementStream {
            seed: self.seed,
            level: self.level + 1,
            times,
            increments,
        }
    }

    /// Refines `levels` times (grid `2^levels` finer).
    pub fn refine(&self, levels: u32) -> NoiseIncrementStream {
        let mut s = self.clone();
        for _ in 0..levels {
            s = s.refine_half();
        }
        s
    }

    /// Sums consecutive groups of `group = 2^k` steps by summing adjacent
    /// pairs `k` times; this inverts `k` bridge refinements exactly, bit for
    /// bit, because each pair was constructed to sum to its parent.
    pub fn coarsened(&self, group: usize) -> NoiseIncrementStream {
        assert!(group.is_power_of_two() && self.n_steps().is_multiple_of(group));
        let mut s = self.clone();
        for _ in 0..group.trailing_zeros() {
            let times = s.times.iter().copied().step_by(2).collect();
            let increments = s
                .increments
                .chunks(2)
                .map(|pair| pair[0].iter().zip(&pair[1]).map(|(a, b)| a + b).collect())
                .collect();
            s = NoiseIncrementStream {
                seed: s.seed,
                level: s.level.saturating_sub(1),
                times,
                increments,
            };
        }
        s
    }

    /// Brownian path values at the grid times (cumulative sums per mode).
    pub fn path(&self) -> Vec<Vec<f64>> {
        let m = self.n_modes();
        let mut w = vec![0.0; m];
        let mut out = vec![w.clone()];
        for row in &self.increments {
            for (wi, dw) in w.iter_mut().zip(row) {
                *wi += dw;
            }
            out.push(w.clone());
        }
        out
    }
}

/// Uniform grid `0, dt, 2 dt, ..., n dt`.
pub fn uniform_grid(dt: f64, n_steps: usize) -> Vec<f64> {
    (0..=n_steps).map(|i| i as f64 * dt).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn same_seed_gives_identical_streams() {
        let grid = uniform_grid(0.1, 20);
        let a = sample_increments(3, 42, &grid).unwrap();
        let b = sample_increments(3, 42, &grid).unwrap();
        for i in 0..a.n_steps() {
            assert_eq!(a.step(i), b.step(i));
        }
        let c = sample_increments(3, 43, &grid).unwrap();
        assert_ne!(a.step(0), c.step(0));
    }

    #[test]
    fn bridge_pairs_sum_exactly() {
        let grid = uniform_grid(0.25, 16);
        let coarse = sample_increments(4, 7, &grid).unwrap();
        let fine = coarse.refine_half();
        assert_eq!(fine.n_steps(), 32);
        for i in 0..coarse.n_steps() {
            for j in 0..4 {
                let sum = fine.step(2 * i)[j] + fine.step(2 * i + 1)[j];
                assert_eq!(sum, coarse.step(i)[j], "pair ({i}, {j})");
            }
        }
        // cumulative sums agree exactly at shared times via coarsening
        let rec = fine.coarsened(2);
        let (pa, pb) = (coarse.path(), rec.path());
        assert_eq!(pa, pb);
    }

    #[test]
    fn double_refinement_couples_to_level_zero() {
        let grid = uniform_grid(0.5, 8);
        let coarse = sample_increments(2, 99, &grid).unwrap();
        let fine = coarse.refine(2);
        assert_eq!(fine.n_steps(), 32);
        let back = fine.coarsened(4);
        for i in 0..coarse.n_steps() {
            for j in 0..2 {
                // two exact levels compose exactly
                assert_eq!(back.step(i)[j], coarse.step(i)[j]);
            }
        }
    }

    /// Statistical sanity: increment variance is dt within 3 standard errors.
    #[test]
    fn increment_variance_matches_dt() {
        let n = 100_000;
        let dt = 0.37;
        let grid = uniform_grid(dt, 1);
        let mut sum = 0.0;
        let mut sumsq = 0.0;
        for seed in 0..n {
            let s = sample_increments(1, seed, &grid).unwrap();
            let x = s.step(0)[0];
            sum += x;
            sumsq += x * x;
        }
        let mean = sum / n as f64;
        let var = sumsq / n as f64 - mean * mean;
        // var(sample variance) ~ 2 var^2 / n for Gaussians
        let se = dt * (2.0 / n as f64).sqrt();
        assert!(
            (var - dt).abs() < 3.0 * se,
            "var = {var}, dt = {dt}, se = {se}"
        );
    }
}

#[cfg(test)]
mod proptests {
    use super::*;
    use proptest::prelude::*;

    proptest! {
        /// Bridge exactness holds for arbitrary seeds and grids, not just
        /// the fixed cases above.
        #[test]
        fn bridge_is_exact_for_random_streams(
            seed in proptest::num::u64::ANY,
            n_steps in 1usize..24,
            dt in 1e-6f64..10.0,
            modes in 1usize..4,
        ) {
            let grid = uniform_grid(dt, n_steps);
            let coarse = sample_increments(modes, seed, &grid).unwrap();
            let fine = coarse.refine_half();
            for i in 0..n_steps {
                for j in 0..modes {
                    let sum = fine.step(2 * i)[j] + fine.step(2 * i + 1)[j];
                    prop_assert_eq!(sum, coarse.step(i)[j]);
                }
            }
        }
    }
}
