//! Time integration of the Hermitian curvature flow dg/dt = −S − Q and the
//! Chern-Ricci comparison flow dg/dt = −Ric⁽¹⁾, on periodic spectral grids
//! and on symmetry-reduced ansatz families, with positivity/identity
//! monitors, the curvature evolution consistency check, and the barrier
//! probe.

use std::collections::HashMap;
use std::io::Write;
use std::sync::Arc;

use nalgebra::{DMatrix, DVector};
use ndarray::{ArrayD, Dimension, IxDyn};
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::curvature::{evolution_rhs, CurvatureTensor};
use crate::error::{HcfError, Result};
use crate::geometry::{compute_frame, frame_from_jets, FlowVariant, PointGeometry};
use crate::linalg::{g_norm, hermitian_eigenvalues, CMatrix, CVector};
use crate::metrics::{self, MetricField};
use crate::positivity::{min_griffiths, GriffithsOptions};
use crate::spectral::GridMetric;

/// Hard lower bound on the metric eigenvalues during a run.
pub const FLOW_EIG_FLOOR: f64 = 1e-8;
/// Relative tolerance for the ansatz-span projection of the flow RHS.
pub const ANSATZ_PROJECTION_REL_TOL: f64 = 1e-8;

/// Symmetry-reduced metric families whose flow reduces to an ODE on the
/// coefficients. The reduction is not assumed: every RHS evaluation checks
/// the projection residual and errors if the flow leaves the family.
#[derive(Clone, Debug, PartialEq)]
pub enum AnsatzFamily {
    /// g = a δ_ij/|z|² + b z̄_i z_j/|z|⁴, the U(n)-invariant family through
    /// the round Hopf metric (a, b) = (1, 0)
    Hopf { n: usize, a: f64, b: f64 },
    /// g = scale · Fubini–Study
    FubiniStudy { n: usize, scale: f64 },
    /// flat ⊕ scale · Fubini–Study on ℂ/Λ × ℂ
    ProductFlatFs { scale: f64 },
    /// one-parameter torus perturbation; not flow-invariant — exists to
    /// exercise the ansatz-escape detection
    PerturbedTorus { n: usize, eps: f64, mode: usize },
}

impl AnsatzFamily {
    pub fn metric(&self) -> Result<MetricField> {
        match *self {
            AnsatzFamily::Hopf { n, a, b } => metrics::hopf_family(n, a, b),
            AnsatzFamily::FubiniStudy { n, scale } => metrics::fubini_study_local(n, scale),
            AnsatzFamily::ProductFlatFs { scale } => metrics::product_flat_fs(scale),
            AnsatzFamily::PerturbedTorus { n, eps, mode } => metrics::perturbed_torus(n, eps, mode),
        }
    }

    pub fn dimension(&self) -> usize {
        match *self {
            AnsatzFamily::Hopf { n, .. } | AnsatzFamily::FubiniStudy { n, .. } => n,
            AnsatzFamily::ProductFlatFs { .. } => 2,
            AnsatzFamily::PerturbedTorus { n, .. } => n,
        }
    }

    pub fn coeffs(&self) -> Vec<f64> {
        match *self {
            AnsatzFamily::Hopf { a, b, .. } => vec![a, b],
            AnsatzFamily::FubiniStudy { scale, .. } => vec![scale],
            AnsatzFamily::ProductFlatFs { scale } => vec![scale],
            AnsatzFamily::PerturbedTorus { eps, .. } => vec![eps],
        }
    }

    pub fn with_coeffs(&self, c: &[f64]) -> Self {
        match *self {
            AnsatzFamily::Hopf { n, .. } => AnsatzFamily::Hopf { n, a: c[0], b: c[1] },
            AnsatzFamily::FubiniStudy { n, .. } => AnsatzFamily::FubiniStudy { n, scale: c[0] },
            AnsatzFamily::ProductFlatFs { .. } => AnsatzFamily::ProductFlatFs { scale: c[0] },
            AnsatzFamily::PerturbedTorus { n, mode, .. } => {
                AnsatzFamily::PerturbedTorus { n, eps: c[0], mode }
            }
        }
    }

    /// Fixed probe points for the RHS projection. Several points are used so
    /// that one accidental pointwise fit cannot mask the flow leaving the
    /// family.
    pub fn projection_points(&self) -> Vec<Vec<Complex64>> {
        let base = self.representative_point();
        let shift = |s: f64| -> Vec<Complex64> {
            base.iter()
                .enumerate()
                .map(|(k, w)| w + Complex64::new(s * 0.11, -s * 0.07 * (k as f64 + 1.0)))
                .collect()
        };
        vec![base.clone(), shift(1.0), shift(-1.3)]
    }

    /// Fixed representative point used for the RHS projection.
    pub fn representative_point(&self) -> Vec<Complex64> {
        match self {
            AnsatzFamily::Hopf { n, .. } => {
                let mut z = vec![Complex64::new(0.9, 0.2); 1];
                z.extend((1..*n).map(|k| Complex64::new(0.3, -0.25 + 0.1 * k as f64)));
                z
            }
            AnsatzFamily::FubiniStudy { n, .. } => {
                (0..*n).map(|k| Complex64::new(0.2 + 0.1 * k as f64, -0.3)).collect()
            }
            AnsatzFamily::ProductFlatFs { .. } => {
                vec![Complex64::new(0.35, 0.15), Complex64::new(0.4, -0.2)]
            }
            AnsatzFamily::PerturbedTorus { n, .. } => {
                (0..*n).map(|k| Complex64::new(0.15 + 0.2 * k as f64, 0.45)).collect()
            }
        }
    }

    /// ∂g(z)/∂coeff_k as matrices at z (the families are affine in their
    /// coefficients, so these spans are exact).
    fn basis_at(&self, z: &[Complex64]) -> Vec<CMatrix> {
        match *self {
            AnsatzFamily::Hopf { n, .. } => {
                let r2: f64 = z.iter().map(|w| w.norm_sqr()).sum();
                let b1 = CMatrix::from_fn(n, n, |i, j| {
                    if i == j { Complex64::new(1.0 / r2, 0.0) } else { Complex64::ZERO }
                });
                let b2 = CMatrix::from_fn(n, n, |i, j| z[i].conj() * z[j] / (r2 * r2));
                vec![b1, b2]
            }
            AnsatzFamily::FubiniStudy { n, .. } => {
                let m = metrics::fubini_study_local(n, 1.0).expect("unit FS family");
                vec![m.matrix_at(z).expect("FS basis in chart")]
            }
            AnsatzFamily::ProductFlatFs { .. } => {
                let m = metrics::product_flat_fs(1.0).expect("unit product family");
                let full = m.matrix_at(z).expect("product basis in chart");
                let mut b = CMatrix::zeros(2, 2);
                b[(1, 1)] = full[(1, 1)];
                vec![b]
            }
            AnsatzFamily::PerturbedTorus { n, mode, .. } => {
                // g(eps) = flat + eps·P(z); P extracted by differencing two
                // members of the affine family
                let h = 0.5;
                let m1 = metrics::perturbed_torus(n, h, mode).expect("torus family");
                let m0 = metrics::flat_torus(n).expect("flat torus");
                let p = (m1.matrix_at(z).expect("in chart") - m0.matrix_at(z).expect("in chart"))
                    / Complex64::new(h, 0.0);
                vec![p]
            }
        }
    }
}

#[derive(Clone)]
pub enum FlowBackend {
    /// periodic metric samples on a power-of-two lattice, differentiated
    /// spectrally
    Grid(Arc<GridMetric>),
    Ansatz(AnsatzFamily),
}

#[derive(Clone)]
pub struct FlowState {
    pub t: f64,
    pub backend: FlowBackend,
}

impl FlowState {
    pub fn ansatz(family: AnsatzFamily) -> Self {
        FlowState { t: 0.0, backend: FlowBackend::Ansatz(family) }
    }

    /// Sample a metric field onto a periodic grid (dims per real coordinate,
    /// powers of two).
    pub fn grid_from_metric(m: &MetricField, dims: Vec<usize>) -> Result<Self> {
        let n = m.n;
        if dims.len() != 2 * n {
            return Err(HcfError::BadParams(format!(
                "grid for n = {n} needs {} dims, got {}",
                2 * n,
                dims.len()
            )));
        }
        let mut samples: Vec<ArrayD<Complex64>> =
            (0..n * n).map(|_| ArrayD::zeros(IxDyn(&dims))).collect();
        let proto: ArrayD<Complex64> = ArrayD::zeros(IxDyn(&dims));
        for (idx, _) in proto.indexed_iter() {
            let coords: Vec<usize> = idx.slice().to_vec();
            let z: Vec<Complex64> = (0..n)
                .map(|j| {
                    Complex64::new(
                        coords[2 * j] as f64 / dims[2 * j] as f64,
                        coords[2 * j + 1] as f64 / dims[2 * j + 1] as f64,
                    )
                })
                .collect();
            let g = m.matrix_at(&z)?;
            for i in 0..n {
                for j in 0..n {
                    samples[i * n + j][idx.clone()] = g[(i, j)];
                }
            }
        }
        let grid = GridMetric::from_samples(n, dims, samples)?;
        Ok(FlowState { t: 0.0, backend: FlowBackend::Grid(Arc::new(grid)) })
    }

    pub fn n(&self) -> usize {
        match &self.backend {
            FlowBackend::Grid(g) => g.n,
            FlowBackend::Ansatz(f) => f.dimension(),
        }
    }

    /// Point frame of the current metric (depth = extra derivative orders).
    pub fn frame_at(&self, z: &[Complex64], depth: usize) -> Result<PointGeometry> {
        match &self.backend {
            FlowBackend::Grid(grid) => {
                let order = 2 + depth;
                let jets = grid.eval_jets(z, order)?;
                frame_from_jets(grid.n, z, order, &jets)
            }
            FlowBackend::Ansatz(fam) => compute_frame(&fam.metric()?, z, depth),
        }
    }

    /// Smallest metric eigenvalue over the stored samples (grid) or over the
    /// monitor points (ansatz).
    pub fn min_metric_eigenvalue(&self, probes: &[Vec<Complex64>]) -> Result<f64> {
        match &self.backend {
            FlowBackend::Grid(grid) => {
                let n = grid.n;
                let comps: Vec<ArrayD<Complex64>> = (0..n * n)
                    .map(|k| grid.component_samples(k / n, k % n))
                    .collect();
                let mut lo = f64::INFINITY;
                for (idx, _) in comps[0].indexed_iter() {
                    let g = CMatrix::from_fn(n, n, |i, j| comps[i * n + j][idx.clone()]);
                    lo = lo.min(hermitian_eigenvalues(&g)[0]);
                }
                Ok(lo)
            }
            FlowBackend::Ansatz(fam) => {
                let m = fam.metric()?;
                let mut lo = f64::INFINITY;
                for z in probes {
                    lo = lo.min(hermitian_eigenvalues(&m.matrix_at(z)?)[0]);
                }
                Ok(lo)
            }
        }
    }
}

fn grid_rhs(grid: &GridMetric, variant: FlowVariant, t: f64) -> Result<Vec<ArrayD<Complex64>>> {
    let n = grid.n;
    let jets = grid.grid_jets(2);
    let mut out: Vec<ArrayD<Complex64>> =
        (0..n * n).map(|_| ArrayD::zeros(IxDyn(&grid.dims))).collect();
    for (idx, _) in jets[0].indexed_iter() {
        let z = grid.node_point(idx.slice());
        let point_jets: Vec<_> = (0..n * n).map(|k| jets[k][idx.clone()].clone()).collect();
        let f = frame_from_jets(n, &z, 2, &point_jets).map_err(|e| match e {
            HcfError::DegenerateMetric { min_eig, .. } => HcfError::Blowup {
                t,
                reason: format!("metric eigenvalue {min_eig:.3e} under floor at a grid node"),
            },
            other => other,
        })?;
        let rhs = f.flow_rhs_value(variant);
        // the analytic RHS is Hermitian; symmetrize the samples so that
        // Nyquist aliasing of the (non-bandlimited) RHS cannot accumulate an
        // anti-Hermitian component over many steps
        for i in 0..n {
            for j in 0..n {
                out[i * n + j][idx.clone()] = 0.5 * (rhs[(i, j)] + rhs[(j, i)].conj());
            }
        }
    }
    Ok(out)
}

/// Coefficient derivative of an ansatz state: project the pointwise flow
/// RHS onto the family's span and fail if the residual shows the flow
/// leaving the family.
fn ansatz_rhs(fam: &AnsatzFamily, variant: FlowVariant, t: f64) -> Result<Vec<f64>> {
    let points = fam.projection_points();
    let m = fam.metric().map_err(|e| match e {
        HcfError::DegenerateMetric { min_eig, .. } => HcfError::Blowup {
            t,
            reason: format!("ansatz metric eigenvalue {min_eig:.3e} under floor"),
        },
        other => other,
    })?;
    let n = fam.dimension();
    let cols = fam.coeffs().len();
    // real least squares on the 2n² real components per probe point
    let rows = 2 * n * n * points.len();
    let mut a = DMatrix::<f64>::zeros(rows, cols);
    let mut r = DVector::<f64>::zeros(rows);
    for (p, z) in points.iter().enumerate() {
        let f = compute_frame(&m, z, 0)?;
        let rhs = f.flow_rhs_value(variant);
        let basis = fam.basis_at(z);
        for i in 0..n {
            for j in 0..n {
                let row = 2 * (p * n * n + i * n + j);
                r[row] = rhs[(i, j)].re;
                r[row + 1] = rhs[(i, j)].im;
                for (k, b) in basis.iter().enumerate() {
                    a[(row, k)] = b[(i, j)].re;
                    a[(row + 1, k)] = b[(i, j)].im;
                }
            }
        }
    }
    let svd = a.clone().svd(true, true);
    let c = svd.solve(&r, 1e-14).map_err(|e| HcfError::Structural(e.to_string()))?;
    let fit = &a * &c;
    let residual = (&fit - &r).amax();
    let scale = r.amax().max(1e-300);
    if residual > ANSATZ_PROJECTION_REL_TOL * scale {
        return Err(HcfError::AnsatzEscape { residual: residual / scale });
    }
    Ok(c.iter().copied().collect())
}

/// One classical RK4 step; internal, sign of dt unrestricted.
fn rk4_step(state: &FlowState, dt: f64, variant: FlowVariant) -> Result<FlowState> {
    let t = state.t;
    match &state.backend {
        FlowBackend::Ansatz(fam) => {
            let x0 = fam.coeffs();
            let deriv = |coeffs: &[f64]| -> Result<Vec<f64>> {
                ansatz_rhs(&fam.with_coeffs(coeffs), variant, t)
            };
            let k1 = deriv(&x0)?;
            let x1: Vec<f64> = x0.iter().zip(&k1).map(|(x, k)| x + 0.5 * dt * k).collect();
            let k2 = deriv(&x1)?;
            let x2: Vec<f64> = x0.iter().zip(&k2).map(|(x, k)| x + 0.5 * dt * k).collect();
            let k3 = deriv(&x2)?;
            let x3: Vec<f64> = x0.iter().zip(&k3).map(|(x, k)| x + dt * k).collect();
            let k4 = deriv(&x3)?;
            let xf: Vec<f64> = (0..x0.len())
                .map(|i| x0[i] + dt / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]))
                .collect();
            Ok(FlowState { t: t + dt, backend: FlowBackend::Ansatz(fam.with_coeffs(&xf)) })
        }
        FlowBackend::Grid(grid) => {
            let n = grid.n;
            let dims = grid.dims.clone();
            let base: Vec<ArrayD<Complex64>> =
                (0..n * n).map(|k| grid.component_samples(k / n, k % n)).collect();
            let advance = |k: &Vec<ArrayD<Complex64>>, h: f64| -> Result<GridMetric> {
                let samples: Vec<ArrayD<Complex64>> = base
                    .iter()
                    .zip(k)
                    .map(|(s, d)| s + &d.mapv(|v| v * h))
                    .collect();
                GridMetric::from_samples(n, dims.clone(), samples)
            };
            let k1 = grid_rhs(grid, variant, t)?;
            let k2 = grid_rhs(&advance(&k1, 0.5 * dt)?, variant, t)?;
            let k3 = grid_rhs(&advance(&k2, 0.5 * dt)?, variant, t)?;
            let k4 = grid_rhs(&advance(&k3, dt)?, variant, t)?;
            let samples: Vec<ArrayD<Complex64>> = (0..n * n)
                .map(|c| {
                    let mut s = base[c].clone();
                    ndarray::Zip::from(&mut s)
                        .and(&k1[c])
                        .and(&k2[c])
                        .and(&k3[c])
                        .and(&k4[c])
                        .for_each(|s, &a, &b, &cc, &d| {
                            *s += (a + 2.0 * b + 2.0 * cc + d) * (dt / 6.0)
                        });
                    s
                })
                .collect();
            let next = GridMetric::from_samples(n, dims, samples)?;
            Ok(FlowState { t: t + dt, backend: FlowBackend::Grid(Arc::new(next)) })
        }
    }
}

/// One public flow step (Δt > 0).
pub fn flow_step(state: &FlowState, dt: f64, variant: FlowVariant) -> Result<FlowState> {
    if dt <= 0.0 {
        return Err(HcfError::BadParams(format!("flow step needs dt > 0, got {dt}")));
    }
    rk4_step(state, dt, variant)
}

#[derive(Clone, Debug, Serialize)]
pub struct FlowMonitorRecord {
    pub t: f64,
    pub min_griffiths: f64,
    pub bianchi_max: f64,
    pub min_metric_eig: f64,
    pub torsion_norm: f64,
    pub step_accepted: bool,
}

/// Flow run configuration; mirrors the CLI config file.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct FlowConfig {
    pub metric: String,
    #[serde(default)]
    pub params: HashMap<String, f64>,
    /// "hcf" or "chern_ricci"
    #[serde(default = "default_variant")]
    pub variant: String,
    pub dt: f64,
    pub t_end: f64,
    #[serde(default = "default_cadence")]
    pub monitor_every: usize,
    /// "ansatz" or "grid"
    #[serde(default = "default_backend")]
    pub backend: String,
    #[serde(default)]
    pub grid_dims: Vec<usize>,
    #[serde(default = "default_seed")]
    pub seed: u64,
}

fn default_variant() -> String {
    "hcf".into()
}
fn default_cadence() -> usize {
    10
}
fn default_backend() -> String {
    "ansatz".into()
}
fn default_seed() -> u64 {
    20260826
}

pub fn parse_variant(s: &str) -> Result<FlowVariant> {
    match s {
        "hcf" => Ok(FlowVariant::Hcf),
        "chern_ricci" => Ok(FlowVariant::ChernRicci),
        other => Err(HcfError::Config(format!("unknown flow variant '{other}'"))),
    }
}

/// Initial state for a config: ansatz backends for the closed-form
/// families, grid sampling otherwise.
pub fn initial_state(cfg: &FlowConfig) -> Result<FlowState> {
    let n = cfg.params.get("n").map(|v| *v as usize);
    match cfg.backend.as_str() {
        "ansatz" => {
            let fam = match cfg.metric.as_str() {
                "hopf_round" | "hopf_family" => AnsatzFamily::Hopf {
                    n: n.unwrap_or(2),
                    a: *cfg.params.get("a").unwrap_or(&1.0),
                    b: *cfg.params.get("b").unwrap_or(&0.0),
                },
                "fubini_study" => AnsatzFamily::FubiniStudy {
                    n: n.unwrap_or(1),
                    scale: *cfg.params.get("scale").unwrap_or(&1.0),
                },
                "product_flat_fs" => AnsatzFamily::ProductFlatFs {
                    scale: *cfg.params.get("scale").unwrap_or(&1.0),
                },
                "perturbed_torus" => AnsatzFamily::PerturbedTorus {
                    n: n.unwrap_or(1),
                    eps: *cfg.params.get("eps").unwrap_or(&0.1),
                    mode: cfg.params.get("mode").map(|v| *v as usize).unwrap_or(1),
                },
                other => {
                    return Err(HcfError::Config(format!(
                        "metric '{other}' has no ansatz family; use the grid backend"
                    )))
                }
            };
            // validate the family parameters up front
            fam.metric()?;
            Ok(FlowState::ansatz(fam))
        }
        "grid" => {
            let m = metrics::metric_catalog(&cfg.metric, &cfg.params)?;
            let dims = if cfg.grid_dims.is_empty() {
                vec![32; 2 * m.n]
            } else {
                cfg.grid_dims.clone()
            };
            FlowState::grid_from_metric(&m, dims)
        }
        other => Err(HcfError::Config(format!("unknown backend '{other}'"))),
    }
}

/// Chart probe points used by the monitors, deterministic in the seed.
pub fn monitor_points(state: &FlowState, seed: u64, count: usize) -> Result<Vec<Vec<Complex64>>> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let chart = match &state.backend {
        FlowBackend::Grid(g) => crate::chart::Chart::TorusLattice { n: g.n },
        FlowBackend::Ansatz(f) => f.metric()?.chart,
    };
    Ok((0..count).map(|_| chart.random_point(&mut rng)).collect())
}

fn monitor_record(
    state: &FlowState,
    probes: &[Vec<Complex64>],
    seed: u64,
    accepted: bool,
) -> Result<FlowMonitorRecord> {
    let mut min_g = f64::INFINITY;
    let mut bianchi: f64 = 0.0;
    let mut torsion: f64 = 0.0;
    for z in probes {
        let f = state.frame_at(z, 1)?;
        let u = CurvatureTensor::from_frame(&f);
        let rep = min_griffiths(
            &u,
            &f.metric_value(),
            &GriffithsOptions { seed, restarts: 16, ..GriffithsOptions::default() },
        )?;
        min_g = min_g.min(rep.min_value);
        bianchi = bianchi.max(f.bianchi_residuals().max());
        torsion = torsion.max(f.torsion_norm());
    }
    Ok(FlowMonitorRecord {
        t: state.t,
        min_griffiths: min_g,
        bianchi_max: bianchi,
        min_metric_eig: state.min_metric_eigenvalue(probes)?,
        torsion_norm: torsion,
        step_accepted: accepted,
    })
}

pub struct FlowRun {
    pub records: Vec<FlowMonitorRecord>,
    pub final_state: FlowState,
    /// set when the run halted early on a blowup; records up to that point
    /// are preserved
    pub blowup: Option<String>,
}

/// Integrate to t_end, recording monitors at the configured cadence. Steps
/// that drop the smallest metric eigenvalue by more than half are retried
/// with a halved dt (recorded as not accepted); the eigenvalue floor is a
/// hard stop.
pub fn run_flow(cfg: &FlowConfig) -> Result<FlowRun> {
    if cfg.dt <= 0.0 || cfg.t_end <= 0.0 {
        return Err(HcfError::Config("dt and t_end must be positive".into()));
    }
    let variant = parse_variant(&cfg.variant)?;
    let mut state = initial_state(cfg)?;
    let probes = monitor_points(&state, cfg.seed, 6)?;
    let mut records = vec![monitor_record(&state, &probes, cfg.seed, true)?];
    let mut dt = cfg.dt;
    let mut steps = 0usize;
    let mut blowup = None;
    while state.t < cfg.t_end - 1e-12 {
        let h = dt.min(cfg.t_end - state.t);
        let prev_eig = state.min_metric_eigenvalue(&probes)?;
        let candidate = match rk4_step(&state, h, variant) {
            Ok(s) => s,
            Err(HcfError::Blowup { t, reason }) => {
                blowup = Some(format!("t = {t:.6}: {reason}"));
                break;
            }
            Err(HcfError::DegenerateMetric { min_eig, .. }) => {
                blowup = Some(format!(
                    "t = {:.6}: metric eigenvalue {min_eig:.3e} under floor",
                    state.t
                ));
                break;
            }
            Err(e) => return Err(e),
        };
        let new_eig = candidate.min_metric_eigenvalue(&probes)?;
        if new_eig < FLOW_EIG_FLOOR {
            blowup = Some(format!(
                "t = {:.6}: metric eigenvalue {new_eig:.3e} under floor {FLOW_EIG_FLOOR:.1e}",
                candidate.t
            ));
            break;
        }
        if new_eig < 0.5 * prev_eig {
            dt *= 0.5;
            if dt < 1e-12 {
                blowup = Some(format!("t = {:.6}: step size collapsed", state.t));
                break;
            }
            records.push(monitor_record(&state, &probes, cfg.seed, false)?);
            continue;
        }
        state = candidate;
        steps += 1;
        if steps % cfg.monitor_every.max(1) == 0 {
            records.push(monitor_record(&state, &probes, cfg.seed, true)?);
        }
    }
    if records.last().map(|r| r.t) != Some(state.t) {
        records.push(monitor_record(&state, &probes, cfg.seed, true)?);
    }
    Ok(FlowRun { records, final_state: state, blowup })
}

/// CSV of monitor records, fixed column order.
pub fn write_monitor_csv<W: Write>(records: &[FlowMonitorRecord], w: &mut W) -> std::io::Result<()> {
    writeln!(w, "t,min_griffiths,bianchi_max,min_metric_eig,torsion_norm,step_accepted")?;
    for r in records {
        writeln!(
            w,
            "{:.12e},{:.12e},{:.12e},{:.12e},{:.12e},{}",
            r.t, r.min_griffiths, r.bianchi_max, r.min_metric_eig, r.torsion_norm, r.step_accepted
        )?;
    }
    Ok(())
}

/// Binary snapshot: magic "HCF1", little-endian u32 n, u32 dim count, u32
/// dims, then the samples (grid) or coefficients (ansatz) as little-endian
/// f64 pairs (re, im), components row-major.
pub fn write_snapshot<W: Write>(state: &FlowState, w: &mut W) -> Result<()> {
    w.write_all(b"HCF1")?;
    let n = state.n() as u32;
    w.write_all(&n.to_le_bytes())?;
    match &state.backend {
        FlowBackend::Grid(grid) => {
            w.write_all(&(grid.dims.len() as u32).to_le_bytes())?;
            for &d in &grid.dims {
                w.write_all(&(d as u32).to_le_bytes())?;
            }
            let nn = grid.n;
            for i in 0..nn {
                for j in 0..nn {
                    let s = grid.component_samples(i, j);
                    for v in s.iter() {
                        w.write_all(&v.re.to_le_bytes())?;
                        w.write_all(&v.im.to_le_bytes())?;
                    }
                }
            }
        }
        FlowBackend::Ansatz(fam) => {
            w.write_all(&0u32.to_le_bytes())?;
            let c = fam.coeffs();
            w.write_all(&(c.len() as u32).to_le_bytes())?;
            for v in &c {
                w.write_all(&v.to_le_bytes())?;
                w.write_all(&0f64.to_le_bytes())?;
            }
        }
    }
    Ok(())
}

pub struct ConsistencyReport {
    /// max over the sampled pairs of |central difference − evolution RHS|
    pub residual: f64,
    /// max |RHS(ξ,ξ̄,η,η̄)| over the same pairs, for relative comparison
    pub rhs_scale: f64,
}

/// Central-difference check of the curvature evolution equation: flows the
/// state by ±dt, differences Ω at a fixed chart point and fixed coordinate
/// vectors, and compares against the analytic right-hand side.
pub fn evolution_consistency_check(
    state: &FlowState,
    z: &[Complex64],
    dt: f64,
    variant: FlowVariant,
    pairs: usize,
    seed: u64,
) -> Result<ConsistencyReport> {
    let n = state.n();
    let forward = rk4_step(state, dt, variant)?;
    let backward = rk4_step(state, -dt, variant)?;
    let om_f = CurvatureTensor::from_frame(&forward.frame_at(z, 0)?);
    let om_b = CurvatureTensor::from_frame(&backward.frame_at(z, 0)?);
    let fd = om_f.sub(&om_b).scale(1.0 / (2.0 * dt));
    let rhs = evolution_rhs(&state.frame_at(z, 2)?);
    let g = state.frame_at(z, 0)?.metric_value();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut residual: f64 = 0.0;
    let mut scale: f64 = 0.0;
    for _ in 0..pairs {
        let draw = |rng: &mut ChaCha8Rng| {
            let v = CVector::from_fn(n, |_, _| {
                Complex64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0))
            });
            let norm = g_norm(&g, &v);
            v / Complex64::new(norm, 0.0)
        };
        let xi = draw(&mut rng);
        let eta = draw(&mut rng);
        residual = residual.max((fd.eval(&xi, &eta) - rhs.eval(&xi, &eta)).norm());
        scale = scale.max(rhs.eval(&xi, &eta).norm());
    }
    Ok(ConsistencyReport { residual, rhs_scale: scale })
}

/// Minimum over monitor points of the barrier-shifted Griffiths value of
/// u = Ω + ε Ω′ with ε = ε₀ e^{K t} (§5 proof mechanism; visualization, not
/// proof).
pub fn barrier_probe(state: &FlowState, eps0: f64, k: f64, seed: u64) -> Result<f64> {
    let probes = monitor_points(state, seed, 6)?;
    let eps = eps0 * (k * state.t).exp();
    let mut lo = f64::INFINITY;
    for z in &probes {
        let f = state.frame_at(z, 0)?;
        let g = f.metric_value();
        let u = CurvatureTensor::from_frame(&f)
            .add(&CurvatureTensor::metric_square(&g).scale(eps));
        let rep = min_griffiths(
            &u,
            &g,
            &GriffithsOptions { seed, restarts: 16, ..GriffithsOptions::default() },
        )?;
        lo = lo.min(rep.min_value);
    }
    Ok(lo)
}
