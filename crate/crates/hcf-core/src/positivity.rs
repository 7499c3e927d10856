//! Griffiths positivity of curvature-type tensors: heuristic minimization
//! of the biquadratic u(ξ,ξ̄,η,η̄) over product spheres, zero-pair
//! variational identities (§4), the trace inequality, the second-variation
//! bound, and diagnostics for zero pairs along the flow.
//!
//! All sphere constraints use the g-norm; orthonormal frames come from the
//! Cholesky factor of g.

use nalgebra::DMatrix;
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::curvature::{CovariantDerivatives, CurvatureTensor};
use crate::error::{HcfError, Result};
use crate::geometry::PointGeometry;
use crate::linalg::{
    block_form_real_embedding, g_norm, min_generalized_eigenpair, orthonormal_frame,
    real_symmetric_min_eigenvalue, CMatrix, CVector,
};

use ndarray::IxDyn;

/// A pair (ξ, η) counts as a zero of u when |u(ξ,ξ̄,η,η̄)| is below this
/// multiple of ‖u‖∞ (for g-unit arguments).
pub const ZERO_PAIR_REL_TOL: f64 = 1e-9;

/// Curvature-type inputs must satisfy the reality symmetry to this relative
/// tolerance.
pub const CURVATURE_TYPE_REL_TOL: f64 = 1e-8;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum MinMethod {
    Alternating,
    Grid,
    Hybrid,
}

#[derive(Clone)]
pub struct GriffithsReport {
    pub min_value: f64,
    pub argmin_xi: CVector,
    pub argmin_eta: CVector,
    pub method: MinMethod,
    pub restarts: usize,
    pub certified_grid_resolution: Option<usize>,
}

#[derive(Clone, Copy)]
pub struct GriffithsOptions {
    pub restarts: usize,
    pub seed: u64,
    /// dense product-sphere sweep for n <= 2 as a cross-check
    pub grid_fallback: bool,
    pub grid_resolution: usize,
}

impl Default for GriffithsOptions {
    fn default() -> Self {
        GriffithsOptions { restarts: 32, seed: 0x5f3759df, grid_fallback: true, grid_resolution: 64 }
    }
}

/// General mixed-slot evaluation u(ξ, ζ̄, ν, χ̄).
pub fn eval_slots(
    u: &CurvatureTensor,
    s1: &CVector,
    s2: &CVector,
    s3: &CVector,
    s4: &CVector,
) -> Complex64 {
    let n = u.n;
    let mut acc = Complex64::ZERO;
    for i in 0..n {
        for a in 0..n {
            for j in 0..n {
                for b in 0..n {
                    acc += u.data[IxDyn(&[i, a, j, b])]
                        * s1[i]
                        * s2[a].conj()
                        * s3[j]
                        * s4[b].conj();
                }
            }
        }
    }
    acc
}

fn check_curvature_type(u: &CurvatureTensor) -> Result<()> {
    let scale = u.max_norm().max(1e-300);
    let res = u.symmetry_residual();
    if res > CURVATURE_TYPE_REL_TOL * scale {
        return Err(HcfError::Structural(format!(
            "tensor is not of curvature type: symmetry residual {res:.3e} vs scale {scale:.3e}"
        )));
    }
    Ok(())
}

fn g_normalize(g: &CMatrix, v: &CVector) -> CVector {
    let norm = g_norm(g, v);
    v / Complex64::new(norm, 0.0)
}

/// Hermitian form H_η in the ξ slots: H[(i,a)] = Σ u[(i,a,j,b)] η_j η̄_b.
fn xi_form(u: &CurvatureTensor, eta: &CVector) -> CMatrix {
    let n = u.n;
    CMatrix::from_fn(n, n, |i, a| {
        let mut acc = Complex64::ZERO;
        for j in 0..n {
            for b in 0..n {
                acc += u.data[IxDyn(&[i, a, j, b])] * eta[j] * eta[b].conj();
            }
        }
        acc
    })
}

/// Hermitian form H_ξ in the η slots: H[(j,b)] = Σ u[(i,a,j,b)] ξ_i ξ̄_a.
fn eta_form(u: &CurvatureTensor, xi: &CVector) -> CMatrix {
    let n = u.n;
    CMatrix::from_fn(n, n, |j, b| {
        let mut acc = Complex64::ZERO;
        for i in 0..n {
            for a in 0..n {
                acc += u.data[IxDyn(&[i, a, j, b])] * xi[i] * xi[a].conj();
            }
        }
        acc
    })
}

fn random_g_unit(n: usize, g: &CMatrix, rng: &mut ChaCha8Rng) -> CVector {
    let v = CVector::from_fn(n, |_, _| {
        Complex64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0))
    });
    g_normalize(g, &v)
}

/// Heuristic global minimum of (ξ, η) ↦ u(ξ,ξ̄,η,η̄) over the product of
/// g-unit spheres: alternating smallest-generalized-eigenvector iteration
/// with multi-start, cross-checked against a dense grid sweep for n <= 2.
pub fn min_griffiths(
    u: &CurvatureTensor,
    g: &CMatrix,
    opts: &GriffithsOptions,
) -> Result<GriffithsReport> {
    check_curvature_type(u)?;
    let n = u.n;
    let mut rng = ChaCha8Rng::seed_from_u64(opts.seed);
    let mut best_val = f64::INFINITY;
    let mut best_xi = CVector::zeros(n);
    let mut best_eta = CVector::zeros(n);

    for _ in 0..opts.restarts.max(1) {
        let mut xi = random_g_unit(n, g, &mut rng);
        let mut eta = random_g_unit(n, g, &mut rng);
        let mut val = eval_slots(u, &xi, &xi, &eta, &eta).re;
        for _ in 0..100 {
            let (_, new_xi) = min_generalized_eigenpair(&xi_form(u, &eta), g);
            xi = g_normalize(g, &new_xi);
            let (_, new_eta) = min_generalized_eigenpair(&eta_form(u, &xi), g);
            eta = g_normalize(g, &new_eta);
            let new_val = eval_slots(u, &xi, &xi, &eta, &eta).re;
            if (val - new_val).abs() < 1e-14 * (1.0 + val.abs()) {
                val = new_val;
                break;
            }
            val = new_val;
        }
        if val < best_val {
            best_val = val;
            best_xi = xi;
            best_eta = eta;
        }
    }

    let mut method = MinMethod::Alternating;
    let mut certified = None;
    if opts.grid_fallback && n <= 2 {
        let (gv, gxi, geta) = grid_minimum(u, g, opts.grid_resolution);
        certified = Some(opts.grid_resolution);
        if gv < best_val {
            best_val = gv;
            best_xi = gxi;
            best_eta = geta;
            method = MinMethod::Grid;
        } else {
            method = MinMethod::Hybrid;
        }
    }

    Ok(GriffithsReport {
        min_value: best_val,
        argmin_xi: best_xi,
        argmin_eta: best_eta,
        method,
        restarts: opts.restarts,
        certified_grid_resolution: certified,
    })
}

/// Dense sweep over the product of unit spheres for n <= 2, in
/// g-orthonormal frame coordinates. The biquadratic is invariant under a
/// phase in each argument, so the ℂ²-sphere reduces to
/// (cos θ, sin θ e^{iφ}) with θ ∈ [0, π/2], φ ∈ [0, 2π).
fn grid_minimum(u: &CurvatureTensor, g: &CMatrix, res: usize) -> (f64, CVector, CVector) {
    let n = u.n;
    let frame = orthonormal_frame(g);
    if n == 1 {
        let e = frame.column(0).into_owned();
        let v = eval_slots(u, &e, &e, &e, &e).re;
        return (v, e.clone(), e);
    }
    // transform u into frame coordinates; the spheres become Euclidean and
    // each ℂ²-sphere point reduces to (cos θ, sin θ e^{iφ}) up to a phase
    let mut ut = [[Complex64::ZERO; 4]; 4]; // flattened (i,a) x (j,b)
    for i in 0..2 {
        for a in 0..2 {
            for j in 0..2 {
                for b in 0..2 {
                    let mut acc = Complex64::ZERO;
                    for p in 0..2 {
                        for q in 0..2 {
                            for r in 0..2 {
                                for s in 0..2 {
                                    acc += u.data[IxDyn(&[p, q, r, s])]
                                        * frame[(p, i)]
                                        * frame[(q, a)].conj()
                                        * frame[(r, j)]
                                        * frame[(s, b)].conj();
                                }
                            }
                        }
                    }
                    ut[2 * i + a][2 * j + b] = acc;
                }
            }
        }
    }
    let sphere: Vec<[Complex64; 2]> = {
        let mut pts = Vec::with_capacity(res * res);
        for it in 0..res {
            let theta = std::f64::consts::FRAC_PI_2 * (it as f64) / ((res - 1) as f64);
            for ip in 0..res {
                let phi = std::f64::consts::TAU * (ip as f64) / (res as f64);
                pts.push([
                    Complex64::new(theta.cos(), 0.0),
                    Complex64::from_polar(theta.sin(), phi),
                ]);
            }
        }
        pts
    };
    let mut best = (f64::INFINITY, sphere[0], sphere[0]);
    for xi in &sphere {
        // h[(j,b)] = Σ ut[(i,a),(j,b)] ξ_i ξ̄_a
        let mut h = [Complex64::ZERO; 4];
        for i in 0..2 {
            for a in 0..2 {
                let w = xi[i] * xi[a].conj();
                for jb in 0..4 {
                    h[jb] += ut[2 * i + a][jb] * w;
                }
            }
        }
        let (h00, h01, h11) = (h[0].re, h[1], h[3].re);
        for eta in &sphere {
            let v = h00 * eta[0].norm_sqr()
                + h11 * eta[1].norm_sqr()
                + 2.0 * (h01 * eta[0] * eta[1].conj()).re;
            if v < best.0 {
                best = (v, *xi, *eta);
            }
        }
    }
    let lift = |p: [Complex64; 2]| &frame * CVector::from_vec(vec![p[0], p[1]]);
    (best.0, lift(best.1), lift(best.2))
}

/// First-order identities at a zero pair of a Griffiths
/// non-negative tensor: mixed-slot vanishing over basis directions and the
/// vanishing of the spatial gradient.
pub struct ZeroPairVariation {
    pub mixed_slot_residual: f64,
    pub grad_residual: f64,
}

pub fn zero_pair_first_variation(
    u: &CurvatureTensor,
    du: &CovariantDerivatives,
    g: &CMatrix,
    xi: &CVector,
    eta: &CVector,
) -> Result<ZeroPairVariation> {
    check_curvature_type(u)?;
    let n = u.n;
    let xi = g_normalize(g, xi);
    let eta = g_normalize(g, eta);
    let scale = u.max_norm().max(1e-300);
    let value = eval_slots(u, &xi, &xi, &eta, &eta).re;
    if value.abs() > ZERO_PAIR_REL_TOL * scale {
        return Err(HcfError::Precondition(format!(
            "(ξ, η) is not a zero pair: u(ξ,ξ̄,η,η̄) = {value:.3e} vs tolerance {:.3e}",
            ZERO_PAIR_REL_TOL * scale
        )));
    }
    let frame = orthonormal_frame(g);
    let mut mixed: f64 = 0.0;
    for k in 0..n {
        let zeta = frame.column(k).into_owned();
        mixed = mixed.max(eval_slots(u, &xi, &zeta, &eta, &eta).norm());
        mixed = mixed.max(eval_slots(u, &zeta, &xi, &eta, &eta).norm());
        mixed = mixed.max(eval_slots(u, &xi, &xi, &eta, &zeta).norm());
        mixed = mixed.max(eval_slots(u, &xi, &xi, &zeta, &eta).norm());
    }
    let mut grad: f64 = 0.0;
    for p in 0..n {
        let mut h = Complex64::ZERO;
        let mut a = Complex64::ZERO;
        for i in 0..n {
            for ai in 0..n {
                for j in 0..n {
                    for b in 0..n {
                        let w = xi[i] * xi[ai].conj() * eta[j] * eta[b].conj();
                        h += du.holo[IxDyn(&[p, i, ai, j, b])] * w;
                        a += du.anti[IxDyn(&[p, i, ai, j, b])] * w;
                    }
                }
            }
        }
        grad = grad.max(h.norm()).max(a.norm());
    }
    Ok(ZeroPairVariation { mixed_slot_residual: mixed, grad_residual: grad })
}

/// Exact second variation δ²u(ν,ζ) = d²/ds² u(ξ+sν, ·̄, η+sζ, ·̄)|₀,
/// by multilinear expansion (no numeric differentiation).
pub fn second_variation(
    u: &CurvatureTensor,
    xi: &CVector,
    eta: &CVector,
    nu: &CVector,
    zeta: &CVector,
) -> f64 {
    let t12 = eval_slots(u, nu, nu, eta, eta);
    let t34 = eval_slots(u, xi, xi, zeta, zeta);
    let t13 = eval_slots(u, nu, xi, zeta, eta);
    let t14 = eval_slots(u, nu, xi, eta, zeta);
    2.0 * (t12.re + t34.re) + 4.0 * (t13.re + t14.re)
}

pub struct TraceInequality {
    pub lhs: f64,
    pub rhs: f64,
    pub holds: bool,
}

/// Trace inequality for Hermitian block forms: if Q(v⊕w) = A(v,v̄) + 2Re B(v,w) + C(w,w̄) is
/// positive semidefinite then Σ a_{ij} c̄_{ij} ≥ Σ b_{ij} b̄_{ji}.
pub fn trace_inequality_check(a: &CMatrix, b: &CMatrix, c: &CMatrix) -> Result<TraceInequality> {
    let scale = a.norm().max(b.norm()).max(c.norm()).max(1.0);
    let emb = block_form_real_embedding(a, b, c);
    let min_eig = real_symmetric_min_eigenvalue(&emb);
    if min_eig < -1e-10 * scale {
        return Err(HcfError::Precondition(format!(
            "block form is not positive semidefinite: min eigenvalue {min_eig:.3e}"
        )));
    }
    let n = a.nrows();
    let mut lhs = Complex64::ZERO;
    let mut rhs = Complex64::ZERO;
    for i in 0..n {
        for j in 0..n {
            lhs += a[(i, j)] * c[(i, j)].conj();
            rhs += b[(i, j)] * b[(j, i)].conj();
        }
    }
    Ok(TraceInequality { lhs: lhs.re, rhs: rhs.re, holds: lhs.re >= rhs.re - 1e-12 * scale * scale })
}

/// At a zero pair of a non-negative curvature-type tensor,
/// Σ_{ij} (u(ξ,ξ̄,e_i,ē_j) u(e_j,ē_i,η,η̄) − u(ξ,ē_i,η,ē_j) u(e_j,ξ̄,e_i,η̄)) ≥ 0.
pub fn zero_pair_frame_sum(u: &CurvatureTensor, g: &CMatrix, xi: &CVector, eta: &CVector) -> Result<f64> {
    check_curvature_type(u)?;
    let xi = g_normalize(g, xi);
    let eta = g_normalize(g, eta);
    let scale = u.max_norm().max(1e-300);
    let value = eval_slots(u, &xi, &xi, &eta, &eta).re;
    if value.abs() > ZERO_PAIR_REL_TOL * scale {
        return Err(HcfError::Precondition(format!(
            "(ξ, η) is not a zero pair: u(ξ,ξ̄,η,η̄) = {value:.3e}"
        )));
    }
    Ok(quadratic_zero_sum(u, g, &xi, &eta))
}

/// The quadratic frame sum appearing in the second-variation bound,
/// evaluated without the zero-pair precondition.
fn quadratic_zero_sum(u: &CurvatureTensor, g: &CMatrix, xi: &CVector, eta: &CVector) -> f64 {
    let n = u.n;
    let frame = orthonormal_frame(g);
    let basis: Vec<CVector> = (0..n).map(|k| frame.column(k).into_owned()).collect();
    let mut acc = Complex64::ZERO;
    for i in 0..n {
        for j in 0..n {
            acc += eval_slots(u, xi, xi, &basis[i], &basis[j])
                * eval_slots(u, &basis[j], &basis[i], eta, eta);
            acc -= eval_slots(u, xi, &basis[i], eta, &basis[j])
                * eval_slots(u, &basis[j], xi, &basis[i], eta);
        }
    }
    acc.re
}

pub struct SecondVariationBound {
    pub lhs: f64,
    /// K·inf δ²u with K = tr A₀ + tr C₀ + n K₀ and K₀ = max(0, −inf)
    pub bound: f64,
    pub k0: f64,
    pub k: f64,
    pub holds: bool,
}

/// Second-variation lower bound with an explicit constant. The infimum of the
/// second variation over the g-unit ball is computed exactly as the smallest
/// eigenvalue (clamped at 0) of the real quadratic form δ²u on ℝ^{4n} in
/// g-orthonormal coordinates.
pub fn second_variation_bound(
    u: &CurvatureTensor,
    g: &CMatrix,
    xi: &CVector,
    eta: &CVector,
) -> Result<SecondVariationBound> {
    check_curvature_type(u)?;
    let n = u.n;
    let xi = g_normalize(g, xi);
    let eta = g_normalize(g, eta);
    let frame = orthonormal_frame(g);

    // embed x ∈ ℝ^{4n} -> (ν, ζ) in frame coordinates
    let to_pair = |x: &DMatrix<f64>| {
        let mut nu = CVector::zeros(n);
        let mut zeta = CVector::zeros(n);
        for k in 0..n {
            nu[k] = Complex64::new(x[(k, 0)], x[(n + k, 0)]);
            zeta[k] = Complex64::new(x[(2 * n + k, 0)], x[(3 * n + k, 0)]);
        }
        (&frame * nu, &frame * zeta)
    };
    let q = |x: &DMatrix<f64>| {
        let (nu, zeta) = to_pair(x);
        second_variation(u, &xi, &eta, &nu, &zeta)
    };
    let dim = 4 * n;
    let mut m = DMatrix::<f64>::zeros(dim, dim);
    let basis: Vec<DMatrix<f64>> = (0..dim)
        .map(|k| {
            let mut e = DMatrix::<f64>::zeros(dim, 1);
            e[(k, 0)] = 1.0;
            e
        })
        .collect();
    let diag: Vec<f64> = basis.iter().map(&q).collect();
    for k in 0..dim {
        m[(k, k)] = diag[k];
        for l in (k + 1)..dim {
            let v = 0.5 * (q(&(&basis[k] + &basis[l])) - diag[k] - diag[l]);
            m[(k, l)] = v;
            m[(l, k)] = v;
        }
    }
    let inf = real_symmetric_min_eigenvalue(&m).min(0.0);
    let k0 = -inf;

    // traces of A₀ = u(ξ,ξ̄,·,·̄) and C₀ = u(·,·̄,η,η̄) in the frame
    let mut tr_a0 = 0.0;
    let mut tr_c0 = 0.0;
    for i in 0..n {
        let e = frame.column(i).into_owned();
        tr_a0 += eval_slots(u, &xi, &xi, &e, &e).re;
        tr_c0 += eval_slots(u, &e, &e, &eta, &eta).re;
    }
    let k = tr_a0 + tr_c0 + (n as f64) * k0;
    let lhs = quadratic_zero_sum(u, g, &xi, &eta);
    let bound = k * inf;
    let scale = u.max_norm().max(1e-300);
    Ok(SecondVariationBound { lhs, bound, k0, k, holds: lhs >= bound - 1e-10 * scale * scale })
}

pub struct ZeroPairFlowDiagnostics {
    pub id1: f64,
    pub id2: f64,
    pub id3: f64,
}

/// Residuals of the three identities that hold at a zero pair along the flow, at a point
/// geometry: mixed-slot vanishing of Ω over basis directions, equality of
/// the two quadratic frame sums, and g(∇_ξ T(ζ,ν), η̄) = 0.
pub fn zero_pair_flow_diagnostics(f: &PointGeometry, xi: &CVector, eta: &CVector) -> ZeroPairFlowDiagnostics {
    let n = f.n;
    let g = f.metric_value();
    let xi = g_normalize(&g, xi);
    let eta = g_normalize(&g, eta);
    let u = CurvatureTensor::from_frame(f);
    let frame = orthonormal_frame(&g);
    let basis: Vec<CVector> = (0..n).map(|k| frame.column(k).into_owned()).collect();

    let mut id1: f64 = 0.0;
    for zeta in &basis {
        for nu in &basis {
            id1 = id1.max(eval_slots(&u, &xi, zeta, nu, &eta).norm());
        }
    }

    let mut lhs = Complex64::ZERO;
    let mut rhs = Complex64::ZERO;
    for i in 0..n {
        for j in 0..n {
            lhs += eval_slots(&u, &xi, &xi, &basis[i], &basis[j])
                * eval_slots(&u, &basis[j], &basis[i], &eta, &eta);
            rhs += eval_slots(&u, &basis[i], &xi, &basis[j], &eta)
                * eval_slots(&u, &xi, &basis[j], &eta, &basis[i]);
        }
    }
    let id2 = (lhs - rhs).norm();

    let conn = f.connection();
    let dt = f.torsion_tensor().covariant_derivative(true, &conn).values();
    let mut id3: f64 = 0.0;
    for zeta in &basis {
        for nu in &basis {
            let mut acc = Complex64::ZERO;
            for dir in 0..n {
                for p in 0..n {
                    for q in 0..n {
                        for b in 0..n {
                            acc += xi[dir]
                                * zeta[p]
                                * nu[q]
                                * dt[IxDyn(&[dir, p, q, b])]
                                * eta[b].conj();
                        }
                    }
                }
            }
            id3 = id3.max(acc.norm());
        }
    }

    ZeroPairFlowDiagnostics { id1, id2, id3 }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::curvature::curvature_derivatives;
    use crate::geometry::compute_frame;
    use crate::metrics;

    fn random_curvature_type(n: usize, rng: &mut ChaCha8Rng) -> CurvatureTensor {
        let mut u = CurvatureTensor::zeros(n);
        for i in 0..n {
            for a in 0..n {
                for j in 0..n {
                    for b in 0..n {
                        u.data[IxDyn(&[i, a, j, b])] =
                            Complex64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0));
                    }
                }
            }
        }
        let mut sym = CurvatureTensor::zeros(n);
        for i in 0..n {
            for a in 0..n {
                for j in 0..n {
                    for b in 0..n {
                        sym.data[IxDyn(&[i, a, j, b])] = 0.5
                            * (u.data[IxDyn(&[i, a, j, b])] + u.data[IxDyn(&[a, i, b, j])].conj());
                    }
                }
            }
        }
        sym
    }

    #[test]
    fn metric_square_minimum_is_one() {
        let g = CMatrix::identity(2, 2);
        let u = CurvatureTensor::metric_square(&g);
        let rep = min_griffiths(&u, &g, &GriffithsOptions::default()).unwrap();
        assert!((rep.min_value - 1.0).abs() < 1e-9, "{}", rep.min_value);
        assert!((g_norm(&g, &rep.argmin_xi) - 1.0).abs() < 1e-10);
        assert!((g_norm(&g, &rep.argmin_eta) - 1.0).abs() < 1e-10);
        let at_argmin = eval_slots(&u, &rep.argmin_xi, &rep.argmin_xi, &rep.argmin_eta, &rep.argmin_eta).re;
        assert!((at_argmin - rep.min_value).abs() < 1e-10);
    }

    #[test]
    fn fubini_study_n1_minimum_is_two() {
        let m = metrics::fubini_study_local(1, 1.0).unwrap();
        let z = [Complex64::ZERO];
        let f = compute_frame(&m, &z, 0).unwrap();
        let u = CurvatureTensor::from_frame(&f);
        let rep = min_griffiths(&u, &f.metric_value(), &GriffithsOptions::default()).unwrap();
        assert!((rep.min_value - 2.0).abs() < 1e-10, "{}", rep.min_value);
    }

    #[test]
    fn scaling_invariance_of_argmin() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let u = random_curvature_type(2, &mut rng);
        let g = CMatrix::identity(2, 2);
        let opts = GriffithsOptions::default();
        let r1 = min_griffiths(&u, &g, &opts).unwrap();
        let r2 = min_griffiths(&u.scale(2.5), &g, &opts).unwrap();
        assert!((r2.min_value - 2.5 * r1.min_value).abs() < 1e-8 * (1.0 + r1.min_value.abs()));
    }

    #[test]
    fn alternating_matches_grid_for_n2() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for _ in 0..3 {
            let u = random_curvature_type(2, &mut rng);
            let g = CMatrix::identity(2, 2);
            let no_grid =
                GriffithsOptions { grid_fallback: false, ..GriffithsOptions::default() };
            let alt = min_griffiths(&u, &g, &no_grid).unwrap();
            let hybrid = min_griffiths(&u, &g, &GriffithsOptions::default()).unwrap();
            assert!((alt.min_value - hybrid.min_value).abs() < 1e-3, "alternating {} vs hybrid {}", alt.min_value, hybrid.min_value);
            assert!(alt.min_value <= hybrid.min_value + 1e-12);
        }
    }

    #[test]
    fn non_curvature_type_is_rejected() {
        let g = CMatrix::identity(2, 2);
        let mut u = CurvatureTensor::metric_square(&g);
        u.data[IxDyn(&[0, 1, 0, 0])] += Complex64::new(0.0, 0.4);
        assert!(min_griffiths(&u, &g, &GriffithsOptions::default()).is_err());
    }

    #[test]
    fn hopf_round_minimum_is_zero_with_degenerate_pairs() {
        // Ω(ξ,ξ̄,η,η̄) = |η|⁴(|ξ|² − |⟨ξ, z̄⟩|²-type term): degenerate along ξ ∝ z̄
        let m = metrics::hopf_family(2, 1.0, 0.0).unwrap();
        let z = [Complex64::new(1.0, 0.0), Complex64::new(0.5, 0.5)];
        let f = compute_frame(&m, &z, 0).unwrap();
        let u = CurvatureTensor::from_frame(&f);
        let rep = min_griffiths(&u, &f.metric_value(), &GriffithsOptions::default()).unwrap();
        assert!(rep.min_value.abs() < 1e-9, "{}", rep.min_value);
    }

    #[test]
    fn second_variation_examples() {
        let g = CMatrix::identity(2, 2);
        let u = CurvatureTensor::metric_square(&g);
        let e1 = CVector::from_vec(vec![Complex64::ONE, Complex64::ZERO]);
        let e2 = CVector::from_vec(vec![Complex64::ZERO, Complex64::ONE]);
        let zero = CVector::zeros(2);
        assert_eq!(second_variation(&u, &e1, &e1, &zero, &zero), 0.0);
        assert!((second_variation(&u, &e1, &e1, &e2, &zero) - 2.0).abs() < 1e-14);
        // FD oracle on a random tensor
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let w = random_curvature_type(2, &mut rng);
        let nu = CVector::from_vec(vec![Complex64::new(0.3, -0.4), Complex64::new(0.1, 0.2)]);
        let zeta = CVector::from_vec(vec![Complex64::new(-0.2, 0.5), Complex64::new(0.7, 0.1)]);
        let phi = |s: f64| {
            let x = &e1 + &nu * Complex64::new(s, 0.0);
            let y = &e2 + &zeta * Complex64::new(s, 0.0);
            eval_slots(&w, &x, &x, &y, &y).re
        };
        let h = 1e-4;
        let fd = (phi(h) - 2.0 * phi(0.0) + phi(-h)) / (h * h);
        let exact = second_variation(&w, &e1, &e2, &nu, &zeta);
        assert!((fd - exact).abs() < 1e-6, "{fd} vs {exact}");
    }

    #[test]
    fn nonneg_zero_pair_second_variation_nonnegative() {
        // product barrier: u = g⊗g on the η factor only, zero when ξ ⊥ span
        // use flat x FS product curvature instead: exact zero pair
        let m = metrics::product_flat_fs(1.0).unwrap();
        let z = [Complex64::new(0.3, 0.4), Complex64::new(0.1, -0.2)];
        let f = compute_frame(&m, &z, 0).unwrap();
        let u = CurvatureTensor::from_frame(&f);
        let g = f.metric_value();
        let xi = CVector::from_vec(vec![Complex64::ONE, Complex64::ZERO]);
        let eta = CVector::from_vec(vec![Complex64::ZERO, Complex64::ONE]);
        let xi = g_normalize(&g, &xi);
        let eta = g_normalize(&g, &eta);
        assert!(eval_slots(&u, &xi, &xi, &eta, &eta).norm() < 1e-12);
        let mut rng = ChaCha8Rng::seed_from_u64(13);
        for _ in 0..200 {
            let nu = CVector::from_fn(2, |_, _| {
                Complex64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0))
            });
            let zeta = CVector::from_fn(2, |_, _| {
                Complex64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0))
            });
            assert!(second_variation(&u, &xi, &eta, &nu, &zeta) > -1e-11);
        }
    }

    #[test]
    fn zero_pair_first_variation_on_product() {
        let m = metrics::product_flat_fs(1.0).unwrap();
        let z = [Complex64::new(0.3, 0.4), Complex64::new(0.1, -0.2)];
        let f = compute_frame(&m, &z, 1).unwrap();
        let (u, du) = curvature_derivatives(&f);
        let g = f.metric_value();
        let xi = CVector::from_vec(vec![Complex64::ONE, Complex64::ZERO]);
        let eta = CVector::from_vec(vec![Complex64::ZERO, Complex64::ONE]);
        let rep = zero_pair_first_variation(&u, &du, &g, &xi, &eta).unwrap();
        assert!(rep.mixed_slot_residual < 1e-9, "{}", rep.mixed_slot_residual);
        assert!(rep.grad_residual < 1e-9, "{}", rep.grad_residual);
        // strictly positive tensor: no zero pairs
        let barrier = CurvatureTensor::metric_square(&g);
        assert!(zero_pair_first_variation(&barrier, &du, &g, &xi, &eta).is_err());
    }

    #[test]
    fn trace_inequality_examples_and_random_blocks() {
        let id = CMatrix::identity(2, 2);
        let zero = CMatrix::zeros(2, 2);
        let r = trace_inequality_check(&id, &zero, &id).unwrap();
        assert!((r.lhs - 2.0).abs() < 1e-14 && r.rhs.abs() < 1e-14 && r.holds);
        let r = trace_inequality_check(&id, &id, &id).unwrap();
        assert!((r.lhs - r.rhs).abs() < 1e-14 && r.holds);
        // indefinite block is rejected
        let neg = &id * Complex64::new(-1.0, 0.0);
        assert!(trace_inequality_check(&neg, &zero, &neg).is_err());
        let mut rng = ChaCha8Rng::seed_from_u64(29);
        for _ in 0..200 {
            let m = CMatrix::from_fn(4, 4, |_, _| {
                Complex64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0))
            });
            let psd = &m * m.adjoint();
            // Q(v⊕w) with bilinear B is the Hermitian form in (v, w̄), so a
            // PSD instance takes C conjugated from a PSD block matrix
            let a = psd.view((0, 0), (2, 2)).into_owned();
            let b = psd.view((0, 2), (2, 2)).into_owned();
            let c = psd.view((2, 2), (2, 2)).into_owned().conjugate();
            let r = trace_inequality_check(&a, &b, &c).unwrap();
            assert!(r.holds, "lhs {} rhs {}", r.lhs, r.rhs);
        }
    }

    #[test]
    fn frame_sum_on_product_zero_pair() {
        let m = metrics::product_flat_fs(1.0).unwrap();
        let z = [Complex64::new(0.3, 0.4), Complex64::new(0.1, -0.2)];
        let f = compute_frame(&m, &z, 0).unwrap();
        let u = CurvatureTensor::from_frame(&f);
        let g = f.metric_value();
        let xi = CVector::from_vec(vec![Complex64::ONE, Complex64::ZERO]);
        let eta = CVector::from_vec(vec![Complex64::ZERO, Complex64::ONE]);
        let s = zero_pair_frame_sum(&u, &g, &xi, &eta).unwrap();
        assert!(s >= -1e-10, "{s}");
        let barrier = CurvatureTensor::metric_square(&g);
        assert!(zero_pair_frame_sum(&barrier, &g, &xi, &eta).is_err());
    }

    #[test]
    fn frame_sum_rotation_invariance() {
        let m = metrics::product_flat_fs(1.0).unwrap();
        let z = [Complex64::new(0.3, 0.4), Complex64::new(0.1, -0.2)];
        let f = compute_frame(&m, &z, 0).unwrap();
        let u = CurvatureTensor::from_frame(&f);
        let g = f.metric_value();
        let xi = CVector::from_vec(vec![Complex64::ONE, Complex64::ZERO]);
        let eta = CVector::from_vec(vec![Complex64::ZERO, Complex64::ONE]);
        let base = zero_pair_frame_sum(&u, &g, &xi, &eta).unwrap();
        // the sum is frame independent: recompute with g conjugated by a
        // unitary change of coordinates is equivalent to rotating the frame;
        // here we verify directly against the definition with a rotated frame
        let theta: f64 = 0.7;
        let q = CMatrix::from_vec(
            2,
            2,
            vec![
                Complex64::new(theta.cos(), 0.0),
                Complex64::new(0.0, theta.sin()),
                Complex64::new(0.0, theta.sin()),
                Complex64::new(theta.cos(), 0.0),
            ],
        );
        let frame = orthonormal_frame(&g) * q;
        let basis: Vec<CVector> = (0..2).map(|k| frame.column(k).into_owned()).collect();
        let xi = g_normalize(&g, &xi);
        let eta = g_normalize(&g, &eta);
        let mut acc = Complex64::ZERO;
        for i in 0..2 {
            for j in 0..2 {
                acc += eval_slots(&u, &xi, &xi, &basis[i], &basis[j])
                    * eval_slots(&u, &basis[j], &basis[i], &eta, &eta);
                acc -= eval_slots(&u, &xi, &basis[i], &eta, &basis[j])
                    * eval_slots(&u, &basis[j], &xi, &basis[i], &eta);
            }
        }
        assert!((acc.re - base).abs() < 1e-10, "{} vs {base}", acc.re);
    }

    #[test]
    fn second_variation_bound_on_random_tensors() {
        let mut rng = ChaCha8Rng::seed_from_u64(41);
        for trial in 0..100 {
            let u = random_curvature_type(2, &mut rng);
            let g = CMatrix::identity(2, 2);
            let xi = CVector::from_fn(2, |_, _| {
                Complex64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0))
            });
            let eta = CVector::from_fn(2, |_, _| {
                Complex64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0))
            });
            let rep = second_variation_bound(&u, &g, &xi, &eta).unwrap();
            assert!(rep.holds, "trial {trial}: lhs {} < bound {}", rep.lhs, rep.bound);
        }
    }

    #[test]
    fn zero_pair_diagnostics_flat_and_product() {
        let m = metrics::flat_torus(2).unwrap();
        let z = [Complex64::new(0.2, 0.3), Complex64::new(0.4, 0.1)];
        let f = compute_frame(&m, &z, 1).unwrap();
        let xi = CVector::from_vec(vec![Complex64::ONE, Complex64::ZERO]);
        let eta = CVector::from_vec(vec![Complex64::ZERO, Complex64::ONE]);
        let d = zero_pair_flow_diagnostics(&f, &xi, &eta);
        assert!(d.id1 < 1e-13 && d.id2 < 1e-13 && d.id3 < 1e-13);

        let m = metrics::product_flat_fs(1.0).unwrap();
        let z = [Complex64::new(0.3, 0.4), Complex64::new(0.1, -0.2)];
        let f = compute_frame(&m, &z, 1).unwrap();
        let d = zero_pair_flow_diagnostics(&f, &xi, &eta);
        assert!(d.id1 < 1e-10 && d.id2 < 1e-10 && d.id3 < 1e-10, "{} {} {}", d.id1, d.id2, d.id3);
    }
}
