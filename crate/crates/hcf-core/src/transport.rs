//! Parallel transport of vector pairs along curves with the torsion-twisted
//! Chern connection: the (1,0) leg rides ∇ − T, the dual leg solves the
//! adjoint equation, and the metric pairing g(ξ, η̄) is an exact invariant of
//! the continuous system. Zero pairs of the curvature form stay zero pairs
//! under the twisted transport; the untwisted connection serves as the
//! negative control.

use num_complex::Complex64;

use crate::error::{HcfError, Result};
use crate::geometry::{compute_frame, PointGeometry};
use crate::linalg::{CMatrix, CVector};
use crate::metrics::MetricField;
use crate::positivity::eval_slots;
use ndarray::IxDyn;

/// Closed-form curves with exact holomorphic velocity dγ/ds.
#[derive(Clone, Debug)]
pub enum Curve {
    /// straight chart segment γ(s) = from + s (to − from), s ∈ [0, 1]
    Segment { from: Vec<Complex64>, to: Vec<Complex64> },
    /// one coordinate circles a center: γ_axis(s) = center_axis + r e^{2πis}
    CoordinateLoop { center: Vec<Complex64>, radius: f64, axis: usize },
    /// one coordinate of a base point is rotated by a full phase:
    /// γ_axis(s) = e^{2πis} · base_axis (a closed loop on the Hopf manifold)
    PhaseLoop { base: Vec<Complex64>, axis: usize },
}

impl Curve {
    pub fn point(&self, s: f64) -> Vec<Complex64> {
        match self {
            Curve::Segment { from, to } => from
                .iter()
                .zip(to)
                .map(|(a, b)| a + (b - a) * Complex64::new(s, 0.0))
                .collect(),
            Curve::CoordinateLoop { center, radius, axis } => {
                let mut z = center.clone();
                z[*axis] += Complex64::new(0.0, std::f64::consts::TAU * s).exp() * *radius;
                z
            }
            Curve::PhaseLoop { base, axis } => {
                let mut z = base.clone();
                z[*axis] *= Complex64::new(0.0, std::f64::consts::TAU * s).exp();
                z
            }
        }
    }

    /// dγ/ds, holomorphic components.
    pub fn velocity(&self, s: f64) -> Vec<Complex64> {
        match self {
            Curve::Segment { from, to } => from.iter().zip(to).map(|(a, b)| b - a).collect(),
            Curve::CoordinateLoop { center, radius, axis } => {
                let mut v = vec![Complex64::ZERO; center.len()];
                v[*axis] = Complex64::new(0.0, std::f64::consts::TAU)
                    * Complex64::new(0.0, std::f64::consts::TAU * s).exp()
                    * *radius;
                v
            }
            Curve::PhaseLoop { base, axis } => {
                let mut v = vec![Complex64::ZERO; base.len()];
                v[*axis] = Complex64::new(0.0, std::f64::consts::TAU)
                    * Complex64::new(0.0, std::f64::consts::TAU * s).exp()
                    * base[*axis];
                v
            }
        }
    }
}

#[derive(Clone, Copy, Debug)]
pub struct TransportOptions {
    pub steps: usize,
    /// include the torsion twist (the default); `false` transports both legs
    /// with the plain Chern connection, which does not preserve zero pairs
    pub twisted: bool,
}

impl Default for TransportOptions {
    fn default() -> Self {
        TransportOptions { steps: 512, twisted: true }
    }
}

/// Trajectory of a transported pair, one sample per step boundary.
#[derive(Clone, Debug)]
pub struct TransportState {
    pub s: Vec<f64>,
    pub xi: Vec<CVector>,
    pub eta: Vec<CVector>,
    /// g(ξ(s), η̄(s)) at each sample
    pub pairing: Vec<Complex64>,
}

impl TransportState {
    /// Max deviation of the pairing from its initial value.
    pub fn pairing_drift(&self) -> f64 {
        let p0 = self.pairing[0];
        self.pairing.iter().map(|p| (p - p0).norm()).fold(0.0, f64::max)
    }

    pub fn final_xi(&self) -> &CVector {
        self.xi.last().expect("nonempty trajectory")
    }

    pub fn final_eta(&self) -> &CVector {
        self.eta.last().expect("nonempty trajectory")
    }
}

fn pairing_value(g: &CMatrix, xi: &CVector, eta: &CVector) -> Complex64 {
    let n = g.nrows();
    let mut acc = Complex64::ZERO;
    for p in 0..n {
        for q in 0..n {
            acc += g[(p, q)] * xi[p] * eta[q].conj();
        }
    }
    acc
}

/// ds/ds of the pair at frame `f` with velocity `v`:
///   dξ^p = (−Γ^p_{mq} + T^p_{mq}) v^m ξ^q
///   dη^q = −Γ^q_{mj} v^m η^j − g^{q j̄} η^p g_{p s̄} conj(T^s_{mj}) v̄^m
fn pair_derivative(
    f: &PointGeometry,
    v: &[Complex64],
    xi: &CVector,
    eta: &CVector,
    twisted: bool,
) -> (CVector, CVector) {
    let n = f.n;
    let g = f.metric_value();
    let ginv = f.ginv_value();
    let mut dxi = CVector::zeros(n);
    let mut deta = CVector::zeros(n);
    for p in 0..n {
        let mut acc = Complex64::ZERO;
        for m in 0..n {
            for q in 0..n {
                let mut coef = -f.gamma[IxDyn(&[p, m, q])].value();
                if twisted {
                    coef += f.t_up[IxDyn(&[p, m, q])].value();
                }
                acc += coef * v[m] * xi[q];
            }
        }
        dxi[p] = acc;
    }
    for q in 0..n {
        let mut acc = Complex64::ZERO;
        for m in 0..n {
            for j in 0..n {
                acc -= f.gamma[IxDyn(&[q, m, j])].value() * v[m] * eta[j];
            }
        }
        if twisted {
            for j in 0..n {
                let mut beta = Complex64::ZERO;
                for p in 0..n {
                    for m in 0..n {
                        for s in 0..n {
                            beta += eta[p]
                                * g[(p, s)]
                                * f.t_up[IxDyn(&[s, m, j])].value().conj()
                                * v[m].conj();
                        }
                    }
                }
                acc -= ginv[(q, j)] * beta;
            }
        }
        deta[q] = acc;
    }
    (dxi, deta)
}

/// RK4 transport of (ξ, η) along the curve over s ∈ [0, 1]. Frame failures
/// (leaving the chart, metric degeneration) are reported with the arclength
/// parameter reached.
pub fn transport_pair(
    m: &MetricField,
    curve: &Curve,
    xi0: &CVector,
    eta0: &CVector,
    opts: &TransportOptions,
) -> Result<TransportState> {
    if opts.steps == 0 {
        return Err(HcfError::BadParams("transport needs at least one step".into()));
    }
    let h = 1.0 / opts.steps as f64;
    let frame = |s: f64| -> Result<PointGeometry> {
        compute_frame(m, &curve.point(s), 0).map_err(|e| HcfError::Transport {
            s,
            reason: e.to_string(),
        })
    };
    let mut xi = xi0.clone();
    let mut eta = eta0.clone();
    let f0 = frame(0.0)?;
    let mut state = TransportState {
        s: vec![0.0],
        xi: vec![xi.clone()],
        eta: vec![eta.clone()],
        pairing: vec![pairing_value(&f0.metric_value(), &xi, &eta)],
    };
    for k in 0..opts.steps {
        let s = k as f64 * h;
        let stage = |s: f64, xi: &CVector, eta: &CVector| -> Result<(CVector, CVector)> {
            let f = frame(s)?;
            Ok(pair_derivative(&f, &curve.velocity(s), xi, eta, opts.twisted))
        };
        let (k1x, k1e) = stage(s, &xi, &eta)?;
        let (k2x, k2e) = stage(
            s + 0.5 * h,
            &(&xi + &k1x * Complex64::new(0.5 * h, 0.0)),
            &(&eta + &k1e * Complex64::new(0.5 * h, 0.0)),
        )?;
        let (k3x, k3e) = stage(
            s + 0.5 * h,
            &(&xi + &k2x * Complex64::new(0.5 * h, 0.0)),
            &(&eta + &k2e * Complex64::new(0.5 * h, 0.0)),
        )?;
        let (k4x, k4e) = stage(
            s + h,
            &(&xi + &k3x * Complex64::new(h, 0.0)),
            &(&eta + &k3e * Complex64::new(h, 0.0)),
        )?;
        let w = Complex64::new(h / 6.0, 0.0);
        xi += (k1x + k2x * Complex64::new(2.0, 0.0) + k3x * Complex64::new(2.0, 0.0) + k4x) * w;
        eta += (k1e + k2e * Complex64::new(2.0, 0.0) + k3e * Complex64::new(2.0, 0.0) + k4e) * w;
        let s_next = (k + 1) as f64 * h;
        let f = frame(s_next)?;
        state.s.push(s_next);
        state.xi.push(xi.clone());
        state.eta.push(eta.clone());
        state.pairing.push(pairing_value(&f.metric_value(), &xi, &eta));
    }
    Ok(state)
}

/// Normalized curvature value Ω(ξ, ξ̄, η, η̄) / (‖ξ‖²_g ‖η‖²_g) sampled along
/// the trajectory; a transported zero pair should keep this at zero.
pub fn griffiths_value_along(
    m: &MetricField,
    curve: &Curve,
    state: &TransportState,
) -> Result<Vec<f64>> {
    let mut out = Vec::with_capacity(state.s.len());
    for (k, &s) in state.s.iter().enumerate() {
        let f = compute_frame(m, &curve.point(s), 0)?;
        let om = crate::curvature::CurvatureTensor::from_frame(&f);
        let g = f.metric_value();
        let xi = &state.xi[k];
        let eta = &state.eta[k];
        let v = eval_slots(&om, xi, xi, eta, eta);
        let nx = crate::linalg::g_norm(&g, xi);
        let ne = crate::linalg::g_norm(&g, eta);
        out.push(v.re / (nx * nx * ne * ne).max(1e-300));
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::metrics;
    use approx::assert_abs_diff_eq;

    fn cvec(entries: &[(f64, f64)]) -> CVector {
        CVector::from_iterator(entries.len(), entries.iter().map(|&(r, i)| Complex64::new(r, i)))
    }

    #[test]
    fn flat_transport_is_constant() {
        let m = metrics::flat_torus(2).unwrap();
        let curve = Curve::Segment {
            from: vec![Complex64::new(0.1, 0.1), Complex64::new(0.2, 0.3)],
            to: vec![Complex64::new(0.7, 0.4), Complex64::new(0.5, 0.8)],
        };
        let xi0 = cvec(&[(1.0, 0.5), (-0.3, 0.2)]);
        let eta0 = cvec(&[(0.2, -0.7), (0.9, 0.1)]);
        let st =
            transport_pair(&m, &curve, &xi0, &eta0, &TransportOptions { steps: 16, twisted: true })
                .unwrap();
        assert!((st.final_xi() - &xi0).norm() < 1e-15);
        assert!((st.final_eta() - &eta0).norm() < 1e-15);
        assert!(st.pairing_drift() < 1e-15);
    }

    #[test]
    fn pairing_invariant_on_torsionful_metrics() {
        // perturbed torus: the β term in the η equation is exercised
        let m = metrics::perturbed_torus(2, 0.3, 1).unwrap();
        let curve = Curve::Segment {
            from: vec![Complex64::new(0.05, 0.1), Complex64::new(0.3, 0.2)],
            to: vec![Complex64::new(0.85, 0.6), Complex64::new(0.1, 0.9)],
        };
        let xi0 = cvec(&[(1.0, 0.0), (0.4, -0.6)]);
        let eta0 = cvec(&[(0.3, 0.8), (-0.5, 0.2)]);
        let st = transport_pair(&m, &curve, &xi0, &eta0, &TransportOptions::default()).unwrap();
        assert!(st.pairing_drift() < 1e-8, "{}", st.pairing_drift());

        // hopf loop: closed curve, nonconstant frame
        let m = metrics::hopf_family(2, 1.0, 0.4).unwrap();
        let curve = Curve::PhaseLoop {
            base: vec![Complex64::new(0.9, 0.2), Complex64::new(-0.4, 0.7)],
            axis: 0,
        };
        let st = transport_pair(&m, &curve, &xi0, &eta0, &TransportOptions::default()).unwrap();
        assert!(st.pairing_drift() < 1e-8, "{}", st.pairing_drift());
    }

    #[test]
    fn transport_converges_at_fourth_order() {
        let m = metrics::hopf_family(2, 1.0, 0.3).unwrap();
        let curve = Curve::PhaseLoop {
            base: vec![Complex64::new(0.8, 0.1), Complex64::new(0.3, -0.5)],
            axis: 1,
        };
        let xi0 = cvec(&[(0.7, 0.2), (-0.1, 0.9)]);
        let eta0 = cvec(&[(0.4, -0.3), (0.6, 0.5)]);
        let run = |steps: usize| {
            transport_pair(&m, &curve, &xi0, &eta0, &TransportOptions { steps, twisted: true })
                .unwrap()
                .final_xi()
                .clone()
        };
        let c = run(32);
        let f = run(64);
        let ff = run(128);
        let ratio = (&c - &f).norm() / (&f - &ff).norm().max(1e-300);
        assert!(ratio > 12.0 && ratio < 20.0, "RK4 ratio {ratio}");
    }

    #[test]
    fn twisted_transport_preserves_zero_pairs_untwisted_does_not() {
        // the round-family curvature vanishes exactly on ξ ∝ z; transport
        // that null direction around a closed loop
        let m = metrics::hopf_family(2, 1.0, 0.0).unwrap();
        let base = vec![Complex64::new(0.9, 0.2), Complex64::new(-0.4, 0.7)];
        let curve = Curve::PhaseLoop { base: base.clone(), axis: 0 };
        let xi0 = CVector::from_iterator(2, base.iter().copied());
        let eta0 = cvec(&[(0.3, -0.2), (0.8, 0.4)]);

        let st = transport_pair(&m, &curve, &xi0, &eta0, &TransportOptions::default()).unwrap();
        let vals = griffiths_value_along(&m, &curve, &st).unwrap();
        assert_abs_diff_eq!(vals[0], 0.0, epsilon = 1e-12);
        let worst = vals.iter().map(|v| v.abs()).fold(0.0, f64::max);
        assert!(worst < 1e-7, "twisted zero-pair drift {worst}");

        let st = transport_pair(
            &m,
            &curve,
            &xi0,
            &eta0,
            &TransportOptions { steps: 512, twisted: false },
        )
        .unwrap();
        let vals = griffiths_value_along(&m, &curve, &st).unwrap();
        let worst = vals.iter().map(|v| v.abs()).fold(0.0, f64::max);
        assert!(worst > 1e-3, "untwisted control drift {worst}");
    }

    #[test]
    fn leaving_the_chart_reports_the_parameter() {
        let m = metrics::hopf_family(1, 1.0, 0.0).unwrap();
        // head straight for the puncture at the origin
        let curve = Curve::Segment {
            from: vec![Complex64::new(1.0, 0.0)],
            to: vec![Complex64::new(0.0, 0.0)],
        };
        let xi0 = cvec(&[(1.0, 0.0)]);
        let eta0 = cvec(&[(0.0, 1.0)]);
        match transport_pair(&m, &curve, &xi0, &eta0, &TransportOptions::default()) {
            // the chart is the annulus 0.5 < |z| < 2, so the failure lands
            // right at the halfway mark
            Err(HcfError::Transport { s, .. }) => {
                assert!((0.4..=0.6).contains(&s), "failed at s = {s}")
            }
            other => panic!("expected a transport failure, got {other:?}"),
        }
    }
}
