//! Catalog of Hermitian metrics and the field abstraction the rest of the
//! library evaluates against.
//!
//! A metric is a map from chart points to Hermitian positive-definite
//! matrices g_{i \bar j}. Two backends: closed-form expressions (evaluated
//! as jets by truncated Taylor arithmetic) and periodic spectral grids.

use std::collections::HashMap;
use std::sync::Arc;

use num_complex::Complex64;
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::chart::Chart;
use crate::error::{HcfError, Result};
use crate::expr::Expr;
use crate::jets::ComplexJet;
use crate::linalg::{hermitian_residual, min_eigenvalue, CMatrix};
use crate::spectral::GridMetric;

#[derive(Clone)]
pub enum MetricBackend {
    /// Row-major n x n matrix of component expressions.
    Expression(Vec<Arc<Expr>>),
    Grid(Arc<GridMetric>),
}

/// A Hermitian metric on a coordinate chart.
#[derive(Clone)]
pub struct MetricField {
    pub name: String,
    pub n: usize,
    pub chart: Chart,
    pub backend: MetricBackend,
    /// True when the closed form is a Kahler metric (vanishing torsion).
    pub kahler: bool,
}

impl MetricField {
    pub fn from_expressions(
        name: &str,
        chart: Chart,
        components: Vec<Arc<Expr>>,
        kahler: bool,
    ) -> Result<Self> {
        let n = chart.dimension();
        if components.len() != n * n {
            return Err(HcfError::Structural(format!(
                "metric '{name}': expected {} components, got {}",
                n * n,
                components.len()
            )));
        }
        let field = MetricField {
            name: name.to_string(),
            n,
            chart,
            backend: MetricBackend::Expression(components),
            kahler,
        };
        field.spot_check(64)?;
        Ok(field)
    }

    pub fn from_grid(name: &str, grid: Arc<GridMetric>, kahler: bool) -> Result<Self> {
        let n = grid.n;
        let field = MetricField {
            name: name.to_string(),
            n,
            chart: Chart::TorusLattice { n },
            backend: MetricBackend::Grid(grid),
            kahler,
        };
        field.spot_check(16)?;
        Ok(field)
    }

    /// Sample random chart points and verify Hermitian symmetry and positive
    /// definiteness of the closed form.
    pub fn spot_check(&self, samples: usize) -> Result<()> {
        let mut rng = ChaCha8Rng::seed_from_u64(0x9e37_79b9);
        for _ in 0..samples {
            let z = self.chart.random_point(&mut rng);
            let g = self.matrix_at(&z)?;
            if hermitian_residual(&g) > 1e-10 {
                return Err(HcfError::Structural(format!(
                    "metric '{}' is not Hermitian at a sampled point",
                    self.name
                )));
            }
            let lo = min_eigenvalue(&g);
            if lo <= 1e-10 {
                return Err(HcfError::DegenerateMetric { min_eig: lo, floor: 1e-10 });
            }
        }
        Ok(())
    }

    pub fn matrix_at(&self, z: &[Complex64]) -> Result<CMatrix> {
        let n = self.n;
        match &self.backend {
            MetricBackend::Expression(comps) => Ok(CMatrix::from_fn(n, n, |i, j| {
                comps[i * n + j].eval(z)
            })),
            MetricBackend::Grid(grid) => {
                let jets = grid.eval_jets(z, 0)?;
                Ok(CMatrix::from_fn(n, n, |i, j| jets[i * n + j].value()))
            }
        }
    }

    /// Jets of all components at a point, row-major over (i, j).
    pub fn eval_jets(&self, z: &[Complex64], order: usize) -> Result<Vec<ComplexJet>> {
        if !self.chart.contains(z) {
            return Err(HcfError::OutsideDomain);
        }
        match &self.backend {
            MetricBackend::Expression(comps) => comps
                .iter()
                .map(|c| c.eval_jet(z, order).map_err(HcfError::from))
                .collect(),
            MetricBackend::Grid(grid) => grid.eval_jets(z, order),
        }
    }

    /// The metric g + eps * k for a Hermitian expression matrix k, used by
    /// finite-difference variation checks. Expression backend only.
    pub fn perturbed(&self, k: &[Arc<Expr>], eps: f64) -> Result<Self> {
        let comps = match &self.backend {
            MetricBackend::Expression(c) => c,
            MetricBackend::Grid(_) => {
                return Err(HcfError::Structural(
                    "variation of a grid-backed metric is not supported".into(),
                ))
            }
        };
        if k.len() != self.n * self.n {
            return Err(HcfError::Structural("perturbation shape mismatch".into()));
        }
        let perturbed: Vec<Arc<Expr>> = comps
            .iter()
            .zip(k)
            .map(|(g, kk)| Expr::add(g.clone(), Expr::scale(eps, kk.clone())))
            .collect();
        Ok(MetricField {
            name: format!("{}+eps*k", self.name),
            n: self.n,
            chart: self.chart.clone(),
            backend: MetricBackend::Expression(perturbed),
            kahler: false,
        })
    }

    /// Random Hermitian perturbation directions with smooth coefficients,
    /// suitable for `perturbed`. Deterministic in the seed.
    pub fn random_variation(&self, seed: u64) -> Vec<Arc<Expr>> {
        let n = self.n;
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let draw = |rng: &mut ChaCha8Rng| rng.gen_range(-1.0..1.0);
        let smooth = |c0: f64, c1: Complex64, i: usize, periodic: bool| -> Arc<Expr> {
            if periodic {
                // real trig mode keeps the perturbed metric periodic
                Expr::add(
                    Expr::constant(c0),
                    Expr::mul(Expr::cconst(c1), Expr::cos_of(Expr::two_pi_re(i))),
                )
            } else {
                Expr::add(
                    Expr::constant(c0),
                    Expr::mul(Expr::cconst(c1), Expr::mul(Expr::z(i), Expr::zbar(i))),
                )
            }
        };
        let periodic = matches!(
            self.chart,
            Chart::TorusLattice { .. } | Chart::TorusCrossAffine { .. }
        );
        let mut comps = vec![Expr::constant(0.0); n * n];
        for i in 0..n {
            comps[i * n + i] = smooth(
                draw(&mut rng),
                Complex64::new(draw(&mut rng), 0.0),
                i % n,
                periodic,
            );
            for j in (i + 1)..n {
                let h = smooth(
                    draw(&mut rng),
                    Complex64::new(draw(&mut rng), draw(&mut rng)),
                    j % n,
                    periodic,
                );
                comps[i * n + j] = h.clone();
                comps[j * n + i] = Expr::conj(h);
            }
        }
        comps
    }
}

/// Catalog entry metadata, surfaced by the CLI's `list-metrics`.
pub struct CatalogEntry {
    pub name: &'static str,
    pub description: &'static str,
    pub parameters: &'static [&'static str],
}

pub fn catalog_entries() -> Vec<CatalogEntry> {
    vec![
        CatalogEntry {
            name: "flat_torus",
            description: "flat Kahler metric on a torus chart",
            parameters: &["n"],
        },
        CatalogEntry {
            name: "perturbed_torus",
            description: "non-Kahler trigonometric perturbation of the flat torus",
            parameters: &["n", "eps", "mode"],
        },
        CatalogEntry {
            name: "fubini_study_local",
            description: "Fubini-Study metric in an affine chart, optional scale",
            parameters: &["n", "scale"],
        },
        CatalogEntry {
            name: "hopf_round",
            description: "round Hopf metric delta_ij / |z|^2 on an annulus chart",
            parameters: &["n"],
        },
        CatalogEntry {
            name: "hopf_family",
            description: "two-parameter Hopf ansatz a*delta/|z|^2 + b*conj(z)z/|z|^4",
            parameters: &["n", "a", "b"],
        },
        CatalogEntry {
            name: "product_flat_fs",
            description: "product of a flat torus factor and a scaled Fubini-Study factor",
            parameters: &["scale"],
        },
    ]
}

fn param(params: &HashMap<String, f64>, key: &str, default: f64) -> f64 {
    params.get(key).copied().unwrap_or(default)
}

fn param_n(params: &HashMap<String, f64>, default: usize) -> Result<usize> {
    let v = param(params, "n", default as f64);
    if v.fract() != 0.0 || v < 1.0 || v > 4.0 {
        return Err(HcfError::BadParams(format!("bad dimension n = {v}")));
    }
    Ok(v as usize)
}

/// Build a named metric from the catalog.
pub fn metric_catalog(name: &str, params: &HashMap<String, f64>) -> Result<MetricField> {
    match name {
        "flat_torus" => {
            let n = param_n(params, 1)?;
            flat_torus(n)
        }
        "perturbed_torus" => {
            let n = param_n(params, 2)?;
            let eps = param(params, "eps", 0.1);
            let mode = param(params, "mode", 1.0);
            if mode.fract() != 0.0 || mode < 1.0 {
                return Err(HcfError::BadParams(format!("bad mode {mode}")));
            }
            perturbed_torus(n, eps, mode as usize)
        }
        "fubini_study_local" => {
            let n = param_n(params, 1)?;
            let scale = param(params, "scale", 1.0);
            fubini_study_local(n, scale)
        }
        "hopf_round" => {
            let n = param_n(params, 2)?;
            hopf_family(n, 1.0, 0.0)
        }
        "hopf_family" => {
            let n = param_n(params, 2)?;
            let a = param(params, "a", 1.0);
            let b = param(params, "b", 0.0);
            hopf_family(n, a, b)
        }
        "product_flat_fs" => {
            let scale = param(params, "scale", 1.0);
            product_flat_fs(scale)
        }
        _ => Err(HcfError::UnknownMetric(name.to_string())),
    }
}

pub fn flat_torus(n: usize) -> Result<MetricField> {
    let comps = (0..n * n)
        .map(|s| Expr::constant(if s / n == s % n { 1.0 } else { 0.0 }))
        .collect();
    MetricField::from_expressions("flat_torus", Chart::TorusLattice { n }, comps, true)
}

/// Flat torus plus a small Hermitian trigonometric mode. Non-Kahler for
/// n >= 2 because d(g_{1 \bar 1}) has a dz_2 component.
pub fn perturbed_torus(n: usize, eps: f64, mode: usize) -> Result<MetricField> {
    if !(0.0..0.9).contains(&eps.abs()) {
        return Err(HcfError::BadParams(format!("perturbation eps = {eps} too large")));
    }
    let m = mode as f64;
    let mut comps: Vec<Arc<Expr>> = (0..n * n)
        .map(|s| Expr::constant(if s / n == s % n { 1.0 } else { 0.0 }))
        .collect();
    // g_{1 \bar 1} = 1 + eps cos(2 pi m x_last): depends on the *last*
    // coordinate so that torsion is nonzero when n >= 2.
    let wiggle = Expr::scale(eps, Expr::cos_of(Expr::scale(m, Expr::two_pi_re(n - 1))));
    comps[0] = Expr::add(Expr::constant(1.0), wiggle);
    if n >= 2 {
        // small Hermitian off-diagonal coupling for a richer torsion profile
        let h = Expr::scale(0.25 * eps, Expr::cos_of(Expr::scale(m, Expr::two_pi_im(0))));
        comps[1] = h.clone();
        comps[n] = Expr::conj(h);
    }
    MetricField::from_expressions(
        "perturbed_torus",
        Chart::TorusLattice { n },
        comps,
        false,
    )
}

/// Fubini-Study metric in the affine chart, scaled by `scale`:
/// g_{i \bar j} = scale * (delta_ij / (1+|z|^2) - conj(z_i) z_j / (1+|z|^2)^2).
/// For n = 1 this is scale / (1+|z|^2)^2.
pub fn fubini_study_local(n: usize, scale: f64) -> Result<MetricField> {
    if scale <= 0.0 {
        return Err(HcfError::BadParams(format!("fs scale = {scale}")));
    }
    let w = Expr::add(Expr::constant(1.0), Expr::norm_sq(n));
    let mut comps = Vec::with_capacity(n * n);
    for i in 0..n {
        for j in 0..n {
            let first = if i == j {
                Expr::div(Expr::constant(1.0), w.clone())
            } else {
                Expr::constant(0.0)
            };
            let second = Expr::div(
                Expr::mul(Expr::zbar(i), Expr::z(j)),
                Expr::powi(w.clone(), 2),
            );
            comps.push(Expr::scale(scale, Expr::sub(first, second)));
        }
    }
    MetricField::from_expressions(
        "fubini_study_local",
        Chart::Affine { n, radius: 2.0 },
        comps,
        true,
    )
}

/// Two-parameter family of Hopf-type metrics on the annulus chart:
/// g_{i \bar j} = a delta_ij / |z|^2 + b conj(z_i) z_j / |z|^4.
/// Positive definite iff a > 0 and a + b > 0. (a, b) = (1, 0) is the round
/// Hopf metric.
pub fn hopf_family(n: usize, a: f64, b: f64) -> Result<MetricField> {
    if a <= 0.0 || a + b <= 0.0 {
        return Err(HcfError::BadParams(format!(
            "hopf family (a, b) = ({a}, {b}) is not positive definite"
        )));
    }
    let r2 = Expr::norm_sq(n);
    let mut comps = Vec::with_capacity(n * n);
    for i in 0..n {
        for j in 0..n {
            let mut term = Expr::scale(
                b,
                Expr::div(
                    Expr::mul(Expr::zbar(i), Expr::z(j)),
                    Expr::powi(r2.clone(), 2),
                ),
            );
            if i == j {
                term = Expr::add(term, Expr::scale(a, Expr::div(Expr::constant(1.0), r2.clone())));
            }
            comps.push(term);
        }
    }
    let name = if b == 0.0 && a == 1.0 { "hopf_round" } else { "hopf_family" };
    MetricField::from_expressions(
        name,
        Chart::Annulus { n, r_min: 0.5, r_max: 2.0 },
        comps,
        false,
    )
}

/// Kahler product: flat torus factor in z_1, scaled Fubini-Study factor in
/// z_2 (n = 2, block diagonal).
pub fn product_flat_fs(scale: f64) -> Result<MetricField> {
    if scale <= 0.0 {
        return Err(HcfError::BadParams(format!("fs scale = {scale}")));
    }
    let w = Expr::add(
        Expr::constant(1.0),
        Expr::mul(Expr::z(1), Expr::zbar(1)),
    );
    let comps = vec![
        Expr::constant(1.0),
        Expr::constant(0.0),
        Expr::constant(0.0),
        Expr::div(Expr::constant(scale), Expr::powi(w, 2)),
    ];
    MetricField::from_expressions(
        "product_flat_fs",
        Chart::TorusCrossAffine { radius: 2.0 },
        comps,
        true,
    )
}

#[cfg(test)]
mod tests {
    use super::*;

    fn params(kv: &[(&str, f64)]) -> HashMap<String, f64> {
        kv.iter().map(|(k, v)| (k.to_string(), *v)).collect()
    }

    #[test]
    fn catalog_builds_every_entry() {
        for entry in catalog_entries() {
            let m = metric_catalog(entry.name, &HashMap::new()).unwrap();
            assert!(m.n >= 1);
        }
    }

    #[test]
    fn catalog_honors_explicit_parameters() {
        let m = metric_catalog("hopf_family", &params(&[("n", 3.0), ("a", 2.0), ("b", -0.5)]))
            .unwrap();
        assert_eq!(m.n, 3);
        let z = [
            Complex64::new(1.0, 0.0),
            Complex64::new(0.0, 0.0),
            Complex64::new(0.0, 0.0),
        ];
        // g_{11} = a/r² + b z̄₁z₁/r⁴ = 2 - 0.5 at this point
        let g = m.matrix_at(&z).unwrap();
        assert!((g[(0, 0)].re - 1.5).abs() < 1e-13);
        assert!(metric_catalog("hopf_family", &params(&[("a", -1.0)])).is_err());
        assert!(metric_catalog("no_such_metric", &HashMap::new()).is_err());
    }

    #[test]
    fn fs_value_at_origin_and_unit_circle() {
        let m = fubini_study_local(1, 1.0).unwrap();
        let at = |x: f64| {
            m.matrix_at(&[Complex64::new(x, 0.0)]).unwrap()[(0, 0)].re
        };
        assert!((at(0.0) - 1.0).abs() < 1e-14);
        assert!((at(1.0) - 0.25).abs() < 1e-14);
    }

    #[test]
    fn hopf_round_matches_inverse_radius_squared() {
        let m = hopf_family(2, 1.0, 0.0).unwrap();
        let z = [Complex64::new(1.0, 0.0), Complex64::new(0.0, 1.0)];
        let g = m.matrix_at(&z).unwrap();
        assert!((g[(0, 0)].re - 0.5).abs() < 1e-14);
        assert!(g[(0, 1)].norm() < 1e-14);
    }

    #[test]
    fn hopf_family_rejects_indefinite_parameters() {
        assert!(hopf_family(2, 1.0, -1.5).is_err());
        assert!(hopf_family(2, -1.0, 3.0).is_err());
    }

    #[test]
    fn unknown_metric_errors() {
        assert!(matches!(
            metric_catalog("no_such", &HashMap::new()),
            Err(HcfError::UnknownMetric(_))
        ));
    }

    #[test]
    fn perturbation_shifts_components_linearly() {
        let m = flat_torus(2).unwrap();
        let k = m.random_variation(7);
        let z = [Complex64::new(0.3, 0.1), Complex64::new(0.2, 0.4)];
        let g0 = m.matrix_at(&z).unwrap();
        let gp = m.perturbed(&k, 1e-3).unwrap().matrix_at(&z).unwrap();
        let kv = k[0].eval(&z);
        assert!(((gp[(0, 0)] - g0[(0, 0)]) / 1e-3 - kv).norm() < 1e-10);
        // Hermitian perturbation
        assert!(hermitian_residual(&gp) < 1e-12);
    }

    #[test]
    fn eval_jets_respects_chart_domain() {
        let m = hopf_family(2, 1.0, 0.0).unwrap();
        let z = [Complex64::new(0.01, 0.0), Complex64::ZERO];
        assert!(matches!(m.eval_jets(&z, 2), Err(HcfError::OutsideDomain)));
    }
}
