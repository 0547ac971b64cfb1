//! Parallel trajectory ensembles with results independent of the thread count.
//!
//! Trajectory indices are split into fixed chunks; chunks run on the worker
//! pool and their accumulators are merged in chunk order.

use mqubit_core::noise::{noise_chunk, NoiseAccumulator, NoiseMc, NoiseSettings};
use mqubit_core::trajectory::{checkpoint_steps, check_ensemble_size, state_chunk, EnsemblePath, StateAccumulator, TrajectoryRunner};
use mqubit_core::Result;
use rayon::prelude::*;

/// Trajectories per chunk; a multiple of the kernel lane count.
pub const CHUNK: u64 = 256;
/// Environment variable holding the default worker count.
pub const THREADS_ENV: &str = "MQUBIT_THREADS";

/// Worker pool for ensemble and sweep execution.
pub struct Workers {
    pool: rayon::ThreadPool,
}

impl Workers {
    /// `threads` wins over `MQUBIT_THREADS`, which wins over the core count.
    pub fn new(threads: Option<usize>) -> std::result::Result<Self, rayon::ThreadPoolBuildError> {
        let from_env = std::env::var(THREADS_ENV).ok().and_then(|v| v.trim().parse::<usize>().ok());
        let n = threads.or(from_env).unwrap_or(0);
        let pool = rayon::ThreadPoolBuilder::new().num_threads(n).build()?;
        Ok(Workers { pool })
    }

    pub fn threads(&self) -> usize {
        self.pool.current_num_threads()
    }

    /// Ordered parallel map.
    pub fn map<T, R, F>(&self, items: &[T], f: F) -> Vec<R>
    where
        T: Sync,
        R: Send,
        F: Fn(&T) -> R + Sync + Send,
    {
        self.pool.install(|| items.par_iter().map(f).collect())
    }

    fn chunks(n_traj: usize) -> Vec<std::ops::Range<u64>> {
        let n = n_traj as u64;
        (0..n.div_ceil(CHUNK))
            .map(|c| c * CHUNK..((c + 1) * CHUNK).min(n))
            .collect()
    }

    /// Noise estimates over trajectories `0..n_traj`.
    pub fn noise(&self, runner: &TrajectoryRunner, settings: &NoiseSettings, reference_flow: f64, n_traj: usize) -> Result<NoiseMc> {
        let parts: Vec<Result<NoiseAccumulator>> = self.map(&Self::chunks(n_traj), |r| noise_chunk(runner, settings, reference_flow, r.clone()));
        let mut acc = NoiseAccumulator::new();
        for p in parts {
            acc.merge(&p?);
        }
        Ok(acc.finish(settings, runner.config().dt))
    }

    /// Ensemble mean of the conditional state at `times`.
    pub fn mean_state(&self, runner: &TrajectoryRunner, times: &[f64], n_traj: usize) -> Result<EnsemblePath> {
        check_ensemble_size(n_traj)?;
        let steps = checkpoint_steps(runner.config(), times);
        let parts: Vec<Result<StateAccumulator>> = self.map(&Self::chunks(n_traj), |r| state_chunk(runner, &steps, r.clone()));
        let mut acc = StateAccumulator::new(times.len());
        for p in parts {
            acc.merge(&p?);
        }
        Ok(acc.finish(times.to_vec()))
    }
}
