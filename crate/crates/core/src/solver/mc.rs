//! Monte Carlo ensembles over seeds, parallel and order-deterministic.

use rayon::prelude::*;

/// Per-seed observables with the usual sample statistics. Failed seeds are
/// reported and excluded; the ensemble keeps going.
#[derive(Debug, Clone)]
pub struct McStats {
    pub per_seed: Vec<(u64, Result<f64, String>)>,
    pub n_ok: usize,
    pub mean: f64,
    /// Root mean square of the observable.
    pub rms: f64,
    /// Standard error of the mean.
    pub stderr: f64,
}

impl McStats {
    pub fn n_failed(&self) -> usize {
        self.per_seed.len() - self.n_ok
    }

    /// Half-width of the 95% confidence interval of the mean.
    pub fn ci95(&self) -> f64 {
        1.96 * self.stderr
    }
}

/// Evaluates `observable` for every seed in parallel. Aggregation order is
/// the seed-list order, so results do not depend on the thread count.
pub fn mc_ensemble<F>(seeds: &[u64], observable: F) -> McStats
where
    F: Fn(u64) -> crate::Result<f64> + Sync,
{
    let per_seed: Vec<(u64, Result<f64, String>)> = seeds
        .par_iter()
        .map(|&s| (s, observable(s).map_err(|e| e.to_string())))
        .collect();

    let values: Vec<f64> = per_seed
        .iter()
        .filter_map(|(_, r)| r.as_ref().ok().copied())
        .collect();
    let n = values.len();
    let mean = if n > 0 {
        values.iter().sum::<f64>() / n as f64
    } else {
        f64::NAN
    };
    let meansq = if n > 0 {
        values.iter().map(|v| v * v).sum::<f64>() / n as f64
    } else {
        f64::NAN
    };
    let var = if n > 1 {
        values.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / (n as f64 - 1.0)
    } else {
        0.0
    };
    McStats {
        per_seed,
        n_ok: n,
        mean,
        rms: meansq.sqrt(),
        stderr: if n > 0 {
            (var / n as f64).sqrt()
        } else {
            f64::NAN
        },
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn constant_observable_has_zero_stderr() {
        let seeds: Vec<u64> = (0..16).collect();
        let stats = mc_ensemble(&seeds, |_| Ok(2.5));
        assert_eq!(stats.mean, 2.5);
        assert_eq!(stats.rms, 2.5);
        assert_eq!(stats.stderr, 0.0);
        assert_eq!(stats.n_failed(), 0);
    }

    #[test]
    fn failures_are_reported_but_do_not_abort() {
        let seeds: Vec<u64> = (0..10).collect();
        let stats = mc_ensemble(&seeds, |s| {
            if s % 3 == 0 {
                Err(crate::Error::Invalid("boom".into()))
            } else {
                Ok(s as f64)
            }
        });
        assert_eq!(stats.n_failed(), 4);
        assert_eq!(stats.n_ok, 6);
        // deterministic order
        assert_eq!(stats.per_seed[0].0, 0);
        assert!(stats.per_seed[0].1.is_err());
    }
}
