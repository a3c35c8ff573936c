//! Parallel execution over path indices.
//!
//! Every path draws from its own stream keyed by `(seed, purpose, path index)`, and
//! results are collected in index order, so an ensemble is bit-identical whatever the
//! number of workers.

use mbm_core::conformal::{simulate_chart_path, ChartOptions, ConformalChart};
use mbm_core::graph_sim::{simulate_path, PathOptions, TrajectoryRecord};
use mbm_core::rng::{path_rng, Purpose};
use mbm_core::surface::MinimalGraph;
use mbm_core::{Point2, Surface};
use rayon::prelude::*;

use crate::error::HarnessError;

pub struct Runner {
    pool: rayon::ThreadPool,
}

impl Runner {
    /// `None` uses one worker per available core.
    pub fn new(workers: Option<usize>) -> Result<Self, HarnessError> {
        if workers == Some(0) {
            return Err(HarnessError::config("worker count must be at least 1"));
        }
        let pool = rayon::ThreadPoolBuilder::new()
            .num_threads(workers.unwrap_or(0))
            .build()
            .map_err(|e| HarnessError::config(format!("cannot start worker pool: {e}")))?;
        Ok(Self { pool })
    }

    pub fn workers(&self) -> usize {
        self.pool.current_num_threads()
    }

    /// `f(0), …, f(n−1)` in index order.
    pub fn map<T, F>(&self, n: u64, f: F) -> Vec<T>
    where
        T: Send,
        F: Fn(u64) -> T + Sync + Send,
    {
        self.pool.install(|| (0..n).into_par_iter().map(f).collect())
    }
}

pub fn graph_ensemble(
    runner: &Runner,
    surface: &Surface,
    start: Point2,
    opts: &PathOptions,
    paths: u64,
    seed: u64,
) -> Result<Vec<TrajectoryRecord>, HarnessError> {
    surface.jet(start)?;
    Ok(runner.map(paths, |i| {
        let mut rng = path_rng(seed, Purpose::GraphPath, i);
        simulate_path(surface, start, opts, &mut rng).expect("start point checked above")
    }))
}

pub fn chart_ensemble(
    runner: &Runner,
    surface: &Surface,
    start: Point2,
    opts: &ChartOptions,
    paths: u64,
    seed: u64,
) -> Result<Vec<TrajectoryRecord>, HarnessError> {
    let chart = ConformalChart::for_surface(surface)?;
    let c = chart.from_graph(start).ok_or_else(|| {
        HarnessError::config(format!(
            "start ({}, {}) is not covered by the {} chart",
            start.x,
            start.y,
            surface.name()
        ))
    })?;
    Ok(runner.map(paths, |i| {
        let mut rng = path_rng(seed, Purpose::ChartPath, i);
        simulate_chart_path(chart, c, opts, &mut rng)
    }))
}
