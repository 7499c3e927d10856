//! Dense tensors of jets with index-kind bookkeeping, and the Chern /
//! torsion-twisted covariant derivatives acting on them.
//!
//! All axes have length n. Index kinds drive the Christoffel corrections:
//! a holomorphic derivative only touches holomorphic indices and an
//! anti-holomorphic derivative only touches anti-holomorphic ones (the
//! Chern connection's (0,1)-part is del-bar on coordinate frames).

use ndarray::{ArrayD, Dimension, IxDyn};
use num_complex::Complex64;

use crate::jets::ComplexJet;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum IndexKind {
    LowerHolo,
    LowerAnti,
    UpperHolo,
    UpperAnti,
}

#[derive(Clone)]
pub struct JetTensor {
    pub n: usize,
    pub kinds: Vec<IndexKind>,
    pub data: ArrayD<ComplexJet>,
}

/// Connection data as jets at one point: gamma[(k, i, j)] = Γ^k_{ij},
/// t_up[(k, i, j)] = T^k_{ij}, t_low[(i, j, l)] = T_{i j \bar l},
/// ginv[(p, s)] = g^{p \bar s}.
pub struct ConnectionJets {
    pub n: usize,
    pub gamma: ArrayD<ComplexJet>,
    pub t_up: ArrayD<ComplexJet>,
    pub t_low: ArrayD<ComplexJet>,
    pub ginv: ArrayD<ComplexJet>,
}

fn zero_like(proto: &ComplexJet) -> ComplexJet {
    ComplexJet::zero(&proto.center, proto.order())
}

impl JetTensor {
    pub fn new(n: usize, kinds: Vec<IndexKind>, data: ArrayD<ComplexJet>) -> Self {
        debug_assert_eq!(kinds.len(), data.ndim());
        debug_assert!(data.shape().iter().all(|&s| s == n));
        JetTensor { n, kinds, data }
    }

    pub fn rank(&self) -> usize {
        self.kinds.len()
    }

    /// Pointwise values (constant terms) of all entries.
    pub fn values(&self) -> ArrayD<Complex64> {
        self.data.map(|j| j.value())
    }

    /// Plain Chern covariant derivative; the new direction index is
    /// prepended (LowerHolo for ∇_m, LowerAnti for ∇_{\bar n}).
    pub fn covariant_derivative(&self, holo: bool, conn: &ConnectionJets) -> JetTensor {
        let n = self.n;
        let mut kinds = vec![if holo { IndexKind::LowerHolo } else { IndexKind::LowerAnti }];
        kinds.extend_from_slice(&self.kinds);
        let mut shape = vec![n];
        shape.extend_from_slice(self.data.shape());
        let proto = self.data.iter().next().expect("non-empty tensor");
        let mut out = ArrayD::from_elem(IxDyn(&shape), zero_like(proto));

        for m in 0..n {
            for (idx, entry) in self.data.indexed_iter() {
                let mut full = vec![m];
                full.extend_from_slice(idx.slice());
                let mut acc = entry.derivative(m, holo);
                for (axis, kind) in self.kinds.iter().enumerate() {
                    let i = idx[axis];
                    match (kind, holo) {
                        (IndexKind::LowerHolo, true) => {
                            // -Γ^q_{m i} X_{.. q ..}
                            for q in 0..n {
                                let mut src = idx.slice().to_vec();
                                src[axis] = q;
                                let gamma = &conn.gamma[IxDyn(&[q, m, i])];
                                acc = acc
                                    .sub(&gamma.mul(&self.data[IxDyn(&src)]).unwrap())
                                    .unwrap();
                            }
                        }
                        (IndexKind::UpperHolo, true) => {
                            // +Γ^i_{m q} X^{.. q ..}
                            for q in 0..n {
                                let mut src = idx.slice().to_vec();
                                src[axis] = q;
                                let gamma = &conn.gamma[IxDyn(&[i, m, q])];
                                acc = acc
                                    .add(&gamma.mul(&self.data[IxDyn(&src)]).unwrap())
                                    .unwrap();
                            }
                        }
                        (IndexKind::LowerAnti, false) => {
                            // -conj(Γ^s_{m i}) X_{.. \bar s ..}
                            for s in 0..n {
                                let mut src = idx.slice().to_vec();
                                src[axis] = s;
                                let gamma = conn.gamma[IxDyn(&[s, m, i])].conj();
                                acc = acc
                                    .sub(&gamma.mul(&self.data[IxDyn(&src)]).unwrap())
                                    .unwrap();
                            }
                        }
                        (IndexKind::UpperAnti, false) => {
                            for s in 0..n {
                                let mut src = idx.slice().to_vec();
                                src[axis] = s;
                                let gamma = conn.gamma[IxDyn(&[i, m, s])].conj();
                                acc = acc
                                    .add(&gamma.mul(&self.data[IxDyn(&src)]).unwrap())
                                    .unwrap();
                            }
                        }
                        _ => {}
                    }
                }
                out[IxDyn(&full)] = acc;
            }
        }
        JetTensor::new(n, kinds, out)
    }

    /// Torsion-twisted covariant derivative for curvature-type tensors. The
    /// twist acts on the LAST four axes (the curvature slots, in the order
    /// lower-holo, lower-anti, lower-holo, lower-anti); any leading axes are
    /// earlier derivative directions and receive the plain Chern treatment.
    pub fn twisted_derivative(&self, holo: bool, conn: &ConnectionJets) -> JetTensor {
        assert!(self.rank() >= 4, "twisted derivative needs the four curvature slots");
        let plain = self.covariant_derivative(holo, conn);
        let n = self.n;
        let base = self.rank() - 4; // leading derivative axes in `self`
        let mut out = plain.data;
        // axis positions of the curvature slots in the OUTPUT tensor
        let s1 = base + 1;
        let s2 = base + 2;
        let s3 = base + 3;
        let s4 = base + 4;

        let indices: Vec<Vec<usize>> = out.indexed_iter().map(|(i, _)| i.slice().to_vec()).collect();
        for full in indices {
            let m = full[0];
            let mut acc = out[IxDyn(&full)].clone();
            if holo {
                // + T^q_{m i} u_{q ...}
                let i = full[s1];
                for q in 0..n {
                    let mut src = full[1..].to_vec();
                    src[base] = q;
                    acc = acc
                        .add(&conn.t_up[IxDyn(&[q, m, i])].mul(&self.data[IxDyn(&src)]).unwrap())
                        .unwrap();
                }
                // - g^{q \bar r} T_{m q \bar l} u_{... \bar r}
                let l = full[s4];
                for q in 0..n {
                    for r in 0..n {
                        let mut src = full[1..].to_vec();
                        src[base + 3] = r;
                        let coef = conn.ginv[IxDyn(&[q, r])]
                            .mul(&conn.t_low[IxDyn(&[m, q, l])])
                            .unwrap();
                        acc = acc.sub(&coef.mul(&self.data[IxDyn(&src)]).unwrap()).unwrap();
                    }
                }
            } else {
                // + conj(T^r_{m i2}) u_{. \bar r . .}
                let i2 = full[s2];
                for r in 0..n {
                    let mut src = full[1..].to_vec();
                    src[base + 1] = r;
                    acc = acc
                        .add(
                            &conn.t_up[IxDyn(&[r, m, i2])]
                                .conj()
                                .mul(&self.data[IxDyn(&src)])
                                .unwrap(),
                        )
                        .unwrap();
                }
                // - g^{q \bar r} conj(T_{m r \bar k}) u_{. . q .}
                let k = full[s3];
                for q in 0..n {
                    for r in 0..n {
                        let mut src = full[1..].to_vec();
                        src[base + 2] = q;
                        let coef = conn.ginv[IxDyn(&[q, r])]
                            .mul(&conn.t_low[IxDyn(&[m, r, k])].conj())
                            .unwrap();
                        acc = acc.sub(&coef.mul(&self.data[IxDyn(&src)]).unwrap()).unwrap();
                    }
                }
            }
            out[IxDyn(&full)] = acc;
        }
        JetTensor::new(n, plain.kinds, out)
    }
}
