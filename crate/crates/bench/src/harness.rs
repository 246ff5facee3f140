//! Timed experiment sweeps.
//!
//! Only the decomposition call is timed; tensor generation, reconstruction
//! and error evaluation happen outside the timed region. Cells run one after
//! another unless `parallel` is set, in which case whole cells are spread
//! over the rayon pool (timings then include contention and are only
//! indicative).

use std::collections::HashMap;
use std::time::Instant;

use hytucker::analysis::{randomized_error_bound, BoundParams, ModeSpectra};
use hytucker::{DenseTensor, SketchConfig, TuckerModel};
use rayon::prelude::*;

use crate::generators::{generate_function_tensor, FunctionKind};
use crate::record::{BenchRecord, Method, TensorKind};
use crate::Result;

pub const DEFAULT_SEED: u64 = 42;

/// Seeds `base, base + 1, …` of a multi-seed sweep.
pub fn seed_range(base: u64, count: usize) -> Vec<u64> {
    (0..count as u64).map(|i| base + i).collect()
}

/// Constants of the probabilistic bound attached to randomized records.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BoundSettings {
    pub beta: f64,
    pub gamma: f64,
}

impl Default for BoundSettings {
    fn default() -> Self {
        Self {
            beta: 0.75,
            gamma: 5f64.sqrt(),
        }
    }
}

/// Runs one method with the given settings. `t`, `p` and `seed` are
/// ignored where the method has no use for them.
pub fn decompose(
    tensor: &DenseTensor,
    method: Method,
    config: &SketchConfig,
) -> hytucker::Result<TuckerModel> {
    match method {
        Method::Hosvd => hytucker::hosvd(tensor, &config.ranks),
        Method::Hoid => hytucker::hoid(tensor, &config.ranks),
        Method::Hybrid => hytucker::hybrid(tensor, &config.ranks, config.fiber_modes),
        Method::RHybrid => hytucker::randomized_hybrid(tensor, config),
    }
}

/// Effective fiber-mode count recorded for a method.
fn recorded_t(method: Method, config: &SketchConfig, order: usize) -> usize {
    match method {
        Method::Hosvd => 0,
        Method::Hoid => order,
        Method::Hybrid | Method::RHybrid => config.fiber_modes,
    }
}

/// Decomposes, times and scores one tensor.
pub fn run_cell(
    tensor: &DenseTensor,
    kind: TensorKind,
    method: Method,
    config: &SketchConfig,
    bound: Option<(&ModeSpectra, BoundSettings)>,
) -> Result<BenchRecord> {
    let start = Instant::now();
    let model = decompose(tensor, method, config)?;
    let wall_seconds = start.elapsed().as_secs_f64();
    let rel_err = hytucker::relative_error(tensor, &hytucker::reconstruct(&model))?;
    let t = recorded_t(method, config, tensor.order());
    let bound = match bound {
        Some((spectra, settings)) if method == Method::RHybrid => Some(randomized_error_bound(
            spectra,
            &BoundParams {
                beta: settings.beta,
                gamma: settings.gamma,
                oversampling: config.oversampling,
                shape: tensor.shape().to_vec(),
                ranks: config.ranks.clone(),
                fiber_modes: t,
            },
        )?),
        _ => None,
    };
    let randomized = method == Method::RHybrid;
    Ok(BenchRecord {
        kind,
        shape: tensor.shape().to_vec(),
        method,
        ranks: config.ranks.clone(),
        t,
        p: if randomized { config.oversampling } else { 0 },
        seed: config.seed,
        rel_err,
        wall_seconds,
        bound,
    })
}

struct Cell {
    tensor: usize,
    kind: FunctionKind,
    method: Method,
    config: SketchConfig,
}

struct Workload {
    tensors: Vec<DenseTensor>,
    spectra: Vec<Option<ModeSpectra>>,
    cells: Vec<Cell>,
}

impl Workload {
    fn run(&self, bound: Option<BoundSettings>, parallel: bool) -> Result<Vec<BenchRecord>> {
        let one = |c: &Cell| {
            let spectra = self.spectra[c.tensor].as_ref();
            run_cell(
                &self.tensors[c.tensor],
                TensorKind::Function(c.kind),
                c.method,
                &c.config,
                spectra.zip(bound),
            )
        };
        if parallel {
            self.cells.par_iter().map(one).collect()
        } else {
            self.cells.iter().map(one).collect()
        }
    }
}

/// Builds (once) the tensor for `(kind, shape)` and returns its slot.
fn tensor_slot(
    cache: &mut HashMap<(FunctionKind, Vec<usize>), usize>,
    work: &mut Workload,
    kind: FunctionKind,
    shape: &[usize],
    with_spectra: bool,
) -> Result<usize> {
    if let Some(&slot) = cache.get(&(kind, shape.to_vec())) {
        return Ok(slot);
    }
    let t = generate_function_tensor(kind, shape)?;
    let spectra = if with_spectra {
        Some(ModeSpectra::of(&t)?)
    } else {
        None
    };
    work.tensors.push(t);
    work.spectra.push(spectra);
    let slot = work.tensors.len() - 1;
    cache.insert((kind, shape.to_vec()), slot);
    Ok(slot)
}

/// Size-scaling comparison of the deterministic and randomized hybrid
/// decompositions on cubical tensors.
#[derive(Debug, Clone)]
pub struct Table1Config {
    pub sizes: Vec<usize>,
    pub ranks: Vec<usize>,
    pub p: usize,
    pub t: usize,
    pub seeds: Vec<u64>,
    pub bound: Option<BoundSettings>,
    pub parallel: bool,
}

impl Default for Table1Config {
    fn default() -> Self {
        Self {
            sizes: vec![50, 100, 150],
            ranks: vec![5, 5, 5],
            p: 5,
            t: 1,
            seeds: vec![DEFAULT_SEED],
            bound: None,
            parallel: false,
        }
    }
}

/// For each size and tensor kind (B first, then A): one deterministic
/// hybrid record, then one randomized record per seed.
pub fn run_table1(cfg: &Table1Config) -> Result<Vec<BenchRecord>> {
    let mut work = Workload {
        tensors: Vec::new(),
        spectra: Vec::new(),
        cells: Vec::new(),
    };
    let mut cache = HashMap::new();
    let first_seed = cfg.seeds.first().copied().unwrap_or(DEFAULT_SEED);
    for &n in &cfg.sizes {
        let shape = vec![n; cfg.ranks.len()];
        for kind in FunctionKind::ALL {
            let slot = tensor_slot(&mut cache, &mut work, kind, &shape, cfg.bound.is_some())?;
            work.cells.push(Cell {
                tensor: slot,
                kind,
                method: Method::Hybrid,
                config: SketchConfig::new(cfg.ranks.clone(), cfg.t, cfg.p, first_seed),
            });
            for &seed in &cfg.seeds {
                work.cells.push(Cell {
                    tensor: slot,
                    kind,
                    method: Method::RHybrid,
                    config: SketchConfig::new(cfg.ranks.clone(), cfg.t, cfg.p, seed),
                });
            }
        }
    }
    work.run(cfg.bound, cfg.parallel)
}

/// Rank sweep `r = 1..=r_max` with ranks `(r, …, r)` on a fixed shape.
#[derive(Debug, Clone)]
pub struct Figure1Config {
    pub r_max: usize,
    pub p: usize,
    pub t: usize,
    pub shape: Vec<usize>,
    pub seeds: Vec<u64>,
    pub parallel: bool,
}

impl Default for Figure1Config {
    fn default() -> Self {
        Self {
            r_max: 10,
            p: 5,
            t: 2,
            shape: vec![50, 50, 50],
            seeds: vec![DEFAULT_SEED],
            parallel: false,
        }
    }
}

pub fn run_figure1(cfg: &Figure1Config) -> Result<Vec<BenchRecord>> {
    let mut work = Workload {
        tensors: Vec::new(),
        spectra: Vec::new(),
        cells: Vec::new(),
    };
    let mut cache = HashMap::new();
    let first_seed = cfg.seeds.first().copied().unwrap_or(DEFAULT_SEED);
    for r in 1..=cfg.r_max {
        let ranks = vec![r; cfg.shape.len()];
        for kind in FunctionKind::ALL {
            let slot = tensor_slot(&mut cache, &mut work, kind, &cfg.shape, false)?;
            work.cells.push(Cell {
                tensor: slot,
                kind,
                method: Method::Hybrid,
                config: SketchConfig::new(ranks.clone(), cfg.t, cfg.p, first_seed),
            });
            for &seed in &cfg.seeds {
                work.cells.push(Cell {
                    tensor: slot,
                    kind,
                    method: Method::RHybrid,
                    config: SketchConfig::new(ranks.clone(), cfg.t, cfg.p, seed),
                });
            }
        }
    }
    work.run(None, cfg.parallel)
}

/// One point of the rank sweep, aggregated over seeds.
#[derive(Debug, Clone, PartialEq)]
pub struct SweepPoint {
    pub rank: usize,
    pub kind: TensorKind,
    pub hybrid: f64,
    /// Randomized error for the first seed in the record list.
    pub rhybrid_first: f64,
    /// Mean randomized error over all seeds.
    pub rhybrid_mean: f64,
    pub seeds: usize,
}

/// Groups rank-sweep records by `(rank, kind)` in first-appearance order.
pub fn summarize_sweep(records: &[BenchRecord]) -> Vec<SweepPoint> {
    let mut order: Vec<(usize, TensorKind)> = Vec::new();
    let mut hybrid: HashMap<(usize, TensorKind), f64> = HashMap::new();
    let mut random: HashMap<(usize, TensorKind), Vec<f64>> = HashMap::new();
    for rec in records {
        let key = (rec.ranks.first().copied().unwrap_or(0), rec.kind);
        if !order.contains(&key) {
            order.push(key);
        }
        match rec.method {
            Method::Hybrid => {
                hybrid.entry(key).or_insert(rec.rel_err);
            }
            Method::RHybrid => random.entry(key).or_default().push(rec.rel_err),
            _ => {}
        }
    }
    order
        .into_iter()
        .filter_map(|key| {
            let h = *hybrid.get(&key)?;
            let r = random.get(&key)?;
            Some(SweepPoint {
                rank: key.0,
                kind: key.1,
                hybrid: h,
                rhybrid_first: r[0],
                rhybrid_mean: r.iter().sum::<f64>() / r.len() as f64,
                seeds: r.len(),
            })
        })
        .collect()
}
