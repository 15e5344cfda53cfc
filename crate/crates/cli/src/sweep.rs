//! Evaluates (scheme, method, n̄) grid points into records.

use phasevar_core::asymptotics::{vmin_general, vmin_truncated_asym, z_param};
use phasevar_core::{
    optimize_squeezed, optimize_truncated, solve_continuum_at_nbar, Error, OptimizerConfig,
    SchemeModel,
};
use rayon::prelude::*;

use crate::config::{log_grid, Method, Settings};

/// Continuum results are only trusted from here up.
pub const CONTINUUM_MIN_NBAR: f64 = 1e3;

#[derive(Debug, Clone, PartialEq)]
pub struct SweepRecord {
    pub scheme: String,
    pub method: String,
    /// Mean photon number, or the cap N for truncated runs.
    pub nbar: f64,
    /// `None` for skipped or failed points.
    pub variance: Option<f64>,
    pub z: Option<f64>,
    pub mu: Option<f64>,
    pub n0: Option<f64>,
    pub cutoff: Option<usize>,
    pub tail_mass: Option<f64>,
    /// Reason codes (`skip:*`, `error:*`) and method-specific extras.
    pub notes: String,
}

impl SweepRecord {
    fn new(scheme: &SchemeModel, method: &Method, nbar: f64) -> Self {
        Self {
            scheme: scheme.name(),
            method: method.name(),
            nbar,
            variance: None,
            z: None,
            mu: None,
            n0: None,
            cutoff: None,
            tail_mass: None,
            notes: String::new(),
        }
    }

    pub fn failed(&self) -> bool {
        self.notes.starts_with("error:")
    }

    pub fn skipped(&self) -> bool {
        self.notes.starts_with("skip:")
    }
}

fn z_of(scheme: &SchemeModel, v: f64, nbar: f64) -> Option<f64> {
    if scheme.is_canonical() {
        None
    } else {
        z_param(v, nbar, scheme).ok()
    }
}

fn mark_error(rec: &mut SweepRecord, e: &Error) {
    rec.notes = match e {
        Error::CutoffExceeded { .. } => "skip:cutoff_ceiling".into(),
        Error::NoPowerLaw | Error::MissingTail => format!("skip:{}", e.code()),
        _ => format!("error:{}", e.code()),
    };
}

/// One grid point. Never panics on solver failure; the outcome is in the
/// record's notes.
pub fn evaluate(scheme: &SchemeModel, method: &Method, nbar: f64, tol: f64) -> SweepRecord {
    let mut rec = SweepRecord::new(scheme, method, nbar);
    let outcome: Result<(), Error> = (|| {
        match method {
            Method::Exact => {
                let cfg = OptimizerConfig::default();
                // the optimal state reaches well past n̄; don't start what
                // cannot finish
                if nbar * 2.0 > cfg.max_cutoff as f64 {
                    rec.notes = "skip:cutoff_ceiling".into();
                    return Ok(());
                }
                let r = cfg.optimize_at_nbar(scheme, nbar, tol)?;
                rec.nbar = r.nbar;
                rec.variance = Some(r.variance);
                rec.z = z_of(scheme, r.variance, r.nbar);
                rec.mu = Some(r.mu);
                rec.cutoff = Some(r.state.cutoff);
                rec.tail_mass = Some(r.state.tail_mass);
            }
            Method::Continuum => {
                if nbar < CONTINUUM_MIN_NBAR {
                    rec.notes = "skip:below_continuum_range".into();
                    return Ok(());
                }
                let r = solve_continuum_at_nbar(scheme, nbar, tol)?;
                rec.nbar = r.nbar();
                rec.variance = Some(r.variance());
                rec.z = z_of(scheme, r.variance(), r.nbar());
                rec.mu = Some(r.mu);
                rec.notes = format!("step={:e}", r.step_sizes[2]);
            }
            Method::Squeezed => {
                let p = optimize_squeezed(scheme, nbar)?;
                rec.variance = Some(p.variance);
                rec.z = z_of(scheme, p.variance, nbar);
                rec.n0 = Some(p.n0);
            }
            Method::Asymptotic => {
                let v = vmin_general(scheme, nbar)?;
                rec.variance = Some(v);
                rec.z = z_of(scheme, v, nbar);
            }
            Method::Reference(curve) => {
                let v = curve.evaluate(nbar)?;
                rec.variance = Some(v);
                rec.z = z_of(scheme, v, nbar);
            }
            Method::Truncated => {
                let n_max = nbar.round().max(1.0) as usize;
                rec.nbar = n_max as f64;
                let (v, state) = optimize_truncated(scheme, n_max)?;
                rec.variance = Some(v);
                rec.cutoff = Some(state.cutoff);
                if let Ok(law) = vmin_truncated_asym(scheme, n_max as f64) {
                    rec.notes = format!("law={law:e}");
                }
            }
        }
        Ok(())
    })();
    if let Err(e) = outcome {
        mark_error(&mut rec, &e);
    }
    rec
}

/// All (scheme, method, n̄) combinations, ordered by scheme, then method,
/// then n̄, evaluated on a pool of `settings.threads` workers.
pub fn run_sweep(settings: &Settings) -> anyhow::Result<Vec<SweepRecord>> {
    let grid = log_grid(settings.nbar_min, settings.nbar_max, settings.points_per_decade);
    let mut jobs: Vec<(&SchemeModel, &Method, f64)> = Vec::new();
    for s in &settings.schemes {
        for m in &settings.methods {
            jobs.extend(grid.iter().map(|&n| (s, m, n)));
        }
    }
    let pool = rayon::ThreadPoolBuilder::new().num_threads(settings.threads).build()?;
    let records = pool.install(|| {
        jobs.par_iter()
            .map(|&(s, m, n)| evaluate(s, m, n, settings.tol))
            .collect::<Vec<_>>()
    });
    for r in records.iter().filter(|r| r.failed() || r.skipped()) {
        eprintln!("{} {} nbar={}: {}", r.scheme, r.method, r.nbar, r.notes);
    }
    Ok(records)
}
