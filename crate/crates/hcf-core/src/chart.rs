//! Chart domains for the metric catalog. Only single-chart models are
//! supported: a periodic torus lattice, an annulus in punctured C^n, full
//! C^n, and the torus x affine product used by the flat x Fubini-Study
//! example.

use num_complex::Complex64;
use rand::Rng;

#[derive(Debug, Clone, PartialEq)]
pub enum Chart {
    /// C^n / Λ with Λ the unit Gaussian lattice per coordinate (z ~ z+1 ~ z+i).
    TorusLattice { n: usize },
    /// r_min < |z| < r_max in C^n \ {0}.
    Annulus { n: usize, r_min: f64, r_max: f64 },
    /// All of C^n; random sampling draws from the disc |z_i| < radius.
    Affine { n: usize, radius: f64 },
    /// Torus in the first coordinate, affine disc in the second (n = 2).
    TorusCrossAffine { radius: f64 },
}

impl Chart {
    pub fn dimension(&self) -> usize {
        match self {
            Chart::TorusLattice { n } | Chart::Annulus { n, .. } | Chart::Affine { n, .. } => *n,
            Chart::TorusCrossAffine { .. } => 2,
        }
    }

    pub fn contains(&self, z: &[Complex64]) -> bool {
        if z.len() != self.dimension() {
            return false;
        }
        match self {
            Chart::TorusLattice { .. } => true,
            Chart::Annulus { r_min, r_max, .. } => {
                let r = z.iter().map(|w| w.norm_sqr()).sum::<f64>().sqrt();
                r > *r_min && r < *r_max
            }
            Chart::Affine { .. } => true,
            Chart::TorusCrossAffine { .. } => true,
        }
    }

    pub fn random_point<R: Rng>(&self, rng: &mut R) -> Vec<Complex64> {
        match self {
            Chart::TorusLattice { n } => (0..*n)
                .map(|_| Complex64::new(rng.gen::<f64>(), rng.gen::<f64>()))
                .collect(),
            Chart::Annulus { n, r_min, r_max } => loop {
                let z: Vec<Complex64> = (0..*n)
                    .map(|_| Complex64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)))
                    .collect();
                let r = z.iter().map(|w| w.norm_sqr()).sum::<f64>().sqrt();
                if r > 1e-12 {
                    // rescale onto a radius drawn uniformly from the annulus interior
                    let target = rng.gen_range(r_min * 1.05..r_max * 0.95);
                    return z.iter().map(|w| w * (target / r)).collect();
                }
            },
            Chart::Affine { n, radius } => (0..*n)
                .map(|_| {
                    Complex64::new(
                        rng.gen_range(-radius..*radius) * 0.7,
                        rng.gen_range(-radius..*radius) * 0.7,
                    )
                })
                .collect(),
            Chart::TorusCrossAffine { radius } => {
                vec![
                    Complex64::new(rng.gen::<f64>(), rng.gen::<f64>()),
                    Complex64::new(
                        rng.gen_range(-radius..*radius) * 0.7,
                        rng.gen_range(-radius..*radius) * 0.7,
                    ),
                ]
            }
        }
    }
}
