//! Truncated multivariate Taylor arithmetic ("jets") in the 2n formally
//! independent Wirtinger variables (z_1..z_n, zbar_1..zbar_n).
//!
//! A jet of order d at a center point stores every coefficient c_{αβ} of
//! (z - z0)^α (zbar - zbar0)^β with |α| + |β| <= d, densely. Arithmetic is
//! exact on the retained coefficients, so mixed partials of metric
//! components up to total order 4 come out with no differencing noise.

use std::collections::HashMap;
use std::sync::{Arc, Mutex, OnceLock};

use num_complex::Complex64;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum JetError {
    #[error("jet center/order/dimension mismatch")]
    Mismatch,
    #[error("constant term too small to invert (|c00| = {0:.3e})")]
    Singular(f64),
    #[error("derivative order {requested} exceeds jet order {order}")]
    OrderExceeded { requested: usize, order: usize },
}

/// Monomial exponents: `holo[i]` is the power of (z_i - c_i), `anti[i]` the
/// power of (zbar_i - cbar_i).
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct MultiIndex {
    pub holo: Vec<u8>,
    pub anti: Vec<u8>,
}

impl MultiIndex {
    pub fn degree(&self) -> usize {
        self.holo.iter().chain(&self.anti).map(|&e| e as usize).sum()
    }
}

/// Shared index bookkeeping for all jets with a given dimension and order:
/// ordered monomial list, exponent lookup, and the truncated product table.
pub struct JetSpace {
    pub n: usize,
    pub order: usize,
    /// Exponent tuple of each flat slot, length 2n, holo then anti.
    monos: Vec<Vec<u8>>,
    index: HashMap<Vec<u8>, usize>,
    /// (a_slot, b_slot, product_slot) for all pairs with deg a + deg b <= order.
    mul_table: Vec<(u32, u32, u32)>,
    /// Slot of the first-derivative image: deriv[var][slot] = Some((target, factor)).
    deriv: Vec<Vec<Option<(u32, f64)>>>,
}

fn enumerate_monos(nvars: usize, order: usize) -> Vec<Vec<u8>> {
    let mut out: Vec<Vec<u8>> = vec![vec![0u8; nvars]];
    for _ in 0..order {
        let mut next = Vec::new();
        for m in &out {
            for v in 0..nvars {
                let mut e = m.clone();
                e[v] += 1;
                next.push(e);
            }
        }
        out.extend(next);
    }
    out.sort();
    out.dedup();
    // graded order keeps the constant term at slot 0
    out.sort_by_key(|e| (e.iter().map(|&x| x as usize).sum::<usize>(), e.clone()));
    out
}

impl JetSpace {
    fn build(n: usize, order: usize) -> Self {
        let nvars = 2 * n;
        let monos = enumerate_monos(nvars, order);
        let index: HashMap<Vec<u8>, usize> =
            monos.iter().enumerate().map(|(i, m)| (m.clone(), i)).collect();
        let deg: Vec<usize> = monos
            .iter()
            .map(|m| m.iter().map(|&x| x as usize).sum())
            .collect();
        let mut mul_table = Vec::new();
        for (a, ma) in monos.iter().enumerate() {
            for (b, mb) in monos.iter().enumerate() {
                if deg[a] + deg[b] > order {
                    continue;
                }
                let prod: Vec<u8> = ma.iter().zip(mb).map(|(x, y)| x + y).collect();
                let p = index[&prod];
                mul_table.push((a as u32, b as u32, p as u32));
            }
        }
        let mut deriv = Vec::with_capacity(nvars);
        for v in 0..nvars {
            let mut col = Vec::with_capacity(monos.len());
            for m in &monos {
                if m[v] == 0 {
                    col.push(None);
                } else {
                    let mut e = m.clone();
                    e[v] -= 1;
                    col.push(Some((index[&e] as u32, m[v] as f64)));
                }
            }
            deriv.push(col);
        }
        JetSpace { n, order, monos, index, mul_table, deriv }
    }

    pub fn get(n: usize, order: usize) -> Arc<JetSpace> {
        static CACHE: OnceLock<Mutex<HashMap<(usize, usize), Arc<JetSpace>>>> = OnceLock::new();
        let cache = CACHE.get_or_init(|| Mutex::new(HashMap::new()));
        let mut map = cache.lock().unwrap();
        map.entry((n, order))
            .or_insert_with(|| Arc::new(JetSpace::build(n, order)))
            .clone()
    }

    pub fn len(&self) -> usize {
        self.monos.len()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn slot(&self, holo: &[u8], anti: &[u8]) -> Option<usize> {
        let mut e = holo.to_vec();
        e.extend_from_slice(anti);
        self.index.get(&e).copied()
    }

    pub fn mono(&self, slot: usize) -> MultiIndex {
        let e = &self.monos[slot];
        MultiIndex { holo: e[..self.n].to_vec(), anti: e[self.n..].to_vec() }
    }
}

/// Truncated Taylor expansion of a smooth function of (z, zbar) at a point.
#[derive(Clone)]
pub struct ComplexJet {
    pub center: Vec<Complex64>,
    space: Arc<JetSpace>,
    coeffs: Vec<Complex64>,
}

impl std::fmt::Debug for ComplexJet {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(
            f,
            "ComplexJet(n={}, order={}, value={})",
            self.space.n,
            self.space.order,
            self.coeffs[0]
        )
    }
}

impl ComplexJet {
    pub fn zero(center: &[Complex64], order: usize) -> Self {
        let space = JetSpace::get(center.len(), order);
        let coeffs = vec![Complex64::ZERO; space.len()];
        ComplexJet { center: center.to_vec(), space, coeffs }
    }

    pub fn constant(center: &[Complex64], order: usize, c: Complex64) -> Self {
        let mut j = Self::zero(center, order);
        j.coeffs[0] = c;
        j
    }

    /// Jet of the coordinate function z_i (holo = true) or zbar_i.
    pub fn coordinate(center: &[Complex64], order: usize, i: usize, holo: bool) -> Self {
        let mut j = Self::zero(center, order);
        let n = center.len();
        j.coeffs[0] = if holo { center[i] } else { center[i].conj() };
        if order >= 1 {
            let mut e = vec![0u8; 2 * n];
            e[if holo { i } else { n + i }] = 1;
            let slot = j.space.index[&e];
            j.coeffs[slot] = Complex64::ONE;
        }
        j
    }

    pub fn n(&self) -> usize {
        self.space.n
    }

    pub fn order(&self) -> usize {
        self.space.order
    }

    pub fn value(&self) -> Complex64 {
        self.coeffs[0]
    }

    /// Overwrite one Taylor coefficient c_{alpha beta}. Out-of-range
    /// multi-indices (degree above the truncation order) are ignored.
    pub fn set_coeff(&mut self, holo: &[u8], anti: &[u8], c: Complex64) {
        if let Some(s) = self.space.slot(holo, anti) {
            self.coeffs[s] = c;
        }
    }

    pub fn coeff(&self, holo: &[u8], anti: &[u8]) -> Complex64 {
        match self.space.slot(holo, anti) {
            Some(s) => self.coeffs[s],
            None => Complex64::ZERO,
        }
    }

    fn compatible(&self, other: &Self) -> bool {
        self.space.n == other.space.n
            && self.space.order == other.space.order
            && self.center == other.center
    }

    pub fn add(&self, other: &Self) -> Result<Self, JetError> {
        if !self.compatible(other) {
            return Err(JetError::Mismatch);
        }
        let mut out = self.clone();
        for (a, b) in out.coeffs.iter_mut().zip(&other.coeffs) {
            *a += b;
        }
        Ok(out)
    }

    pub fn sub(&self, other: &Self) -> Result<Self, JetError> {
        if !self.compatible(other) {
            return Err(JetError::Mismatch);
        }
        let mut out = self.clone();
        for (a, b) in out.coeffs.iter_mut().zip(&other.coeffs) {
            *a -= b;
        }
        Ok(out)
    }

    pub fn mul(&self, other: &Self) -> Result<Self, JetError> {
        if !self.compatible(other) {
            return Err(JetError::Mismatch);
        }
        let mut out = Self::zero(&self.center, self.space.order);
        for &(a, b, p) in &self.space.mul_table {
            out.coeffs[p as usize] += self.coeffs[a as usize] * other.coeffs[b as usize];
        }
        Ok(out)
    }

    pub fn neg(&self) -> Self {
        let mut out = self.clone();
        for c in &mut out.coeffs {
            *c = -*c;
        }
        out
    }

    pub fn scale(&self, s: Complex64) -> Self {
        let mut out = self.clone();
        for c in &mut out.coeffs {
            *c *= s;
        }
        out
    }

    /// Truncated reciprocal via the geometric series in the zero-constant part.
    pub fn invert(&self) -> Result<Self, JetError> {
        self.invert_with_floor(1e-300)
    }

    pub fn invert_with_floor(&self, floor: f64) -> Result<Self, JetError> {
        let c0 = self.coeffs[0];
        if c0.norm() <= floor {
            return Err(JetError::Singular(c0.norm()));
        }
        // a = c0 (1 + e); 1/a = (1/c0) sum (-e)^k, e nilpotent of index order+1
        let mut e = self.scale(Complex64::ONE / c0);
        e.coeffs[0] = Complex64::ZERO;
        let mut out = Self::constant(&self.center, self.space.order, Complex64::ONE);
        let mut pow = Self::constant(&self.center, self.space.order, Complex64::ONE);
        for k in 1..=self.space.order {
            pow = pow.mul(&e)?;
            let sign = if k % 2 == 0 { 1.0 } else { -1.0 };
            out = out.add(&pow.scale(Complex64::new(sign, 0.0)))?;
        }
        Ok(out.scale(Complex64::ONE / c0))
    }

    /// Truncated exp, for trigonometric metric perturbations.
    pub fn exp(&self) -> Self {
        let c0 = self.coeffs[0];
        let mut e = self.clone();
        e.coeffs[0] = Complex64::ZERO;
        let mut out = Self::constant(&self.center, self.space.order, Complex64::ONE);
        let mut pow = Self::constant(&self.center, self.space.order, Complex64::ONE);
        let mut fact = 1.0;
        for k in 1..=self.space.order {
            pow = pow.mul(&e).expect("same space");
            fact *= k as f64;
            out = out.add(&pow.scale(Complex64::new(1.0 / fact, 0.0))).expect("same space");
        }
        out.scale(c0.exp())
    }

    /// Complex conjugate of the underlying function: swaps holo/anti exponents
    /// and conjugates coefficients.
    pub fn conj(&self) -> Self {
        let mut out = Self::zero(&self.center, self.space.order);
        for (s, &c) in self.coeffs.iter().enumerate() {
            let m = self.space.mono(s);
            let t = self.space.slot(&m.anti, &m.holo).expect("swapped mono in space");
            out.coeffs[t] = c.conj();
        }
        out
    }

    /// Partial derivative with respect to z_i (holo) or zbar_i, truncated to
    /// the same order (top coefficients of the result are lost information).
    pub fn derivative(&self, i: usize, holo: bool) -> Self {
        let v = if holo { i } else { self.space.n + i };
        let mut out = Self::zero(&self.center, self.space.order);
        for (s, &c) in self.coeffs.iter().enumerate() {
            if let Some((t, f)) = self.space.deriv[v][s] {
                out.coeffs[t as usize] += c * f;
            }
        }
        out
    }

    /// Mixed partial ∂^α ∂̄^β f(center) = α! β! c_{αβ}.
    pub fn extract(&self, holo: &[u8], anti: &[u8]) -> Result<Complex64, JetError> {
        let deg: usize = holo.iter().chain(anti).map(|&e| e as usize).sum();
        if deg > self.space.order {
            return Err(JetError::OrderExceeded { requested: deg, order: self.space.order });
        }
        let slot = self.space.slot(holo, anti).ok_or(JetError::Mismatch)?;
        let fact = |exps: &[u8]| -> f64 {
            exps.iter()
                .map(|&e| (1..=e as u64).product::<u64>() as f64)
                .product()
        };
        Ok(self.coeffs[slot] * fact(holo) * fact(anti))
    }

    /// Max |c'_{αβ} - conj(c_{βα})|; zero for jets of real-valued functions.
    pub fn reality_residual(&self) -> f64 {
        let mut worst = 0.0f64;
        for (s, &c) in self.coeffs.iter().enumerate() {
            let m = self.space.mono(s);
            let t = self.space.slot(&m.anti, &m.holo).unwrap();
            worst = worst.max((c - self.coeffs[t].conj()).norm());
        }
        worst
    }

    pub fn max_coeff_norm(&self) -> f64 {
        self.coeffs.iter().map(|c| c.norm()).fold(0.0, f64::max)
    }
}

/// Binary jet operation selector, mirroring the public algebra surface.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum JetOp {
    Add,
    Sub,
    Mul,
}

pub fn jet_algebra(a: &ComplexJet, b: &ComplexJet, op: JetOp) -> Result<ComplexJet, JetError> {
    match op {
        JetOp::Add => a.add(b),
        JetOp::Sub => a.sub(b),
        JetOp::Mul => a.mul(b),
    }
}
