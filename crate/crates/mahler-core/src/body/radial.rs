//! Bodies given by a table of radial values on a sphere grid.

use std::f64::consts::PI;

use crate::body::{Direction, Vec3};
use crate::error::{Error, Result};
use crate::quadrature::{make_grid, SphereGrid};

/// Radial function sampled on the nodes of a [`SphereGrid`], interpolated
/// bilinearly in `(alpha, beta)` with periodic `beta` and collapsed poles.
///
/// The interpolant is first-order accurate, so derived quantities (support,
/// boundary map, polar) carry errors of the order of the node spacing squared.
#[derive(Debug, Clone, PartialEq)]
pub struct RadialField {
    alpha: Vec<f64>,
    beta: Vec<f64>,
    rho: Vec<f64>,
    poles: [f64; 2],
}

impl RadialField {
    /// Wraps a table `rho[ja * n_beta + jb]` given on the nodes of `make_grid(n_alpha, n_beta)`.
    pub fn from_table(n_alpha: usize, n_beta: usize, rho: Vec<f64>) -> Result<Self> {
        let grid = make_grid(n_alpha, n_beta)?;
        if rho.len() != n_alpha * n_beta {
            return Err(Error::BadParameter(format!(
                "radial table has {} entries, expected {}",
                rho.len(),
                n_alpha * n_beta
            )));
        }
        if rho.iter().any(|r| !r.is_finite()) {
            return Err(Error::DegenerateBody("non-finite radial value".into()));
        }
        if rho.iter().any(|&r| r <= 0.0) {
            return Err(Error::OriginNotInterior);
        }
        for ja in 0..n_alpha {
            for jb in 0..n_beta {
                let r = rho[ja * n_beta + jb];
                let opposite = rho[(n_alpha - 1 - ja) * n_beta + (jb + n_beta / 2) % n_beta];
                if (r - opposite).abs() > 1e-12 * r {
                    return Err(Error::NotSymmetric(format!(
                        "radial table differs at antipodal nodes ({ja}, {jb})"
                    )));
                }
            }
        }
        let ring_mean = |ja: usize| rho[ja * n_beta..(ja + 1) * n_beta].iter().sum::<f64>() / n_beta as f64;
        let poles = [ring_mean(0), ring_mean(n_alpha - 1)];
        Ok(Self { alpha: grid.alpha_nodes().to_vec(), beta: grid.beta_nodes().to_vec(), rho, poles })
    }

    /// Samples `rho` at the nodes of `grid`.
    pub fn sample(grid: &SphereGrid, rho: impl Fn(&Vec3) -> f64) -> Result<Self> {
        let mut table = Vec::with_capacity(grid.n_alpha() * grid.n_beta());
        for &a in grid.alpha_nodes() {
            for &b in grid.beta_nodes() {
                table.push(rho(&Direction::new(a, b).to_vec()));
            }
        }
        let (na, nb) = (grid.n_alpha(), grid.n_beta());
        for ja in 0..na / 2 {
            for jb in 0..nb {
                let i = ja * nb + jb;
                let k = (na - 1 - ja) * nb + (jb + nb / 2) % nb;
                let mean = 0.5 * (table[i] + table[k]);
                table[i] = mean;
                table[k] = mean;
            }
        }
        Self::from_table(na, nb, table)
    }

    /// Number of `alpha` rings.
    pub fn n_alpha(&self) -> usize {
        self.alpha.len()
    }

    /// Number of `beta` nodes per ring.
    pub fn n_beta(&self) -> usize {
        self.beta.len()
    }

    /// Raw table, ring by ring.
    pub fn table(&self) -> &[f64] {
        &self.rho
    }

    fn ring_value(&self, ja: usize, beta: f64) -> f64 {
        let nb = self.beta.len();
        let row = &self.rho[ja * nb..(ja + 1) * nb];
        let k = self.beta.partition_point(|&b| b <= beta);
        if k == 0 || k == nb {
            let b_last = self.beta[nb - 1];
            let b_first = self.beta[0] + 2.0 * PI;
            let b = if k == 0 { beta + 2.0 * PI } else { beta };
            return row[nb - 1] + (row[0] - row[nb - 1]) * (b - b_last) / (b_first - b_last);
        }
        let (b0, b1) = (self.beta[k - 1], self.beta[k]);
        row[k - 1] + (row[k] - row[k - 1]) * (beta - b0) / (b1 - b0)
    }

    /// Interpolated radial value in direction `u` (any nonzero vector).
    pub fn radial_unit(&self, u: &Vec3) -> f64 {
        let d = Direction::from_vec(u);
        let na = self.alpha.len();
        let j = self.alpha.partition_point(|&a| a <= d.alpha);
        if j == 0 {
            let t = d.alpha / self.alpha[0];
            return self.poles[0] + (self.ring_value(0, d.beta) - self.poles[0]) * t;
        }
        if j == na {
            let t = (PI - d.alpha) / (PI - self.alpha[na - 1]);
            return self.poles[1] + (self.ring_value(na - 1, d.beta) - self.poles[1]) * t;
        }
        let (a0, a1) = (self.alpha[j - 1], self.alpha[j]);
        let t = (d.alpha - a0) / (a1 - a0);
        let r0 = self.ring_value(j - 1, d.beta);
        let r1 = self.ring_value(j, d.beta);
        r0 + (r1 - r0) * t
    }

    /// Support function: best table node refined by a shrinking pattern search.
    pub fn support(&self, u: &Vec3) -> f64 {
        self.support_point(u).0
    }

    /// Support value together with the boundary point attaining it.
    pub fn support_point(&self, u: &Vec3) -> (f64, Vec3) {
        let nb = self.beta.len();
        let mut best = (f64::NEG_INFINITY, 0.0, 0.0);
        for (ja, &a) in self.alpha.iter().enumerate() {
            let (sa, ca) = a.sin_cos();
            for (jb, &b) in self.beta.iter().enumerate() {
                let (sb, cb) = b.sin_cos();
                let val = self.rho[ja * nb + jb] * (ca * u.x + sa * cb * u.y + sa * sb * u.z);
                if val > best.0 {
                    best = (val, a, b);
                }
            }
        }
        let eval = |a: f64, b: f64| {
            let p = Direction::new(a.clamp(0.0, PI), b).to_vec();
            self.radial_unit(&p) * p.dot(u)
        };
        let (_, mut a, mut b) = best;
        let mut val = eval(a, b);
        let mut step = PI / self.alpha.len() as f64;
        for _ in 0..40 {
            let mut moved = false;
            for (da, db) in [(step, 0.0), (-step, 0.0), (0.0, step), (0.0, -step)] {
                let cand = eval(a + da, b + db);
                if cand > val {
                    val = cand;
                    a = (a + da).clamp(0.0, PI);
                    b += db;
                    moved = true;
                }
            }
            if !moved {
                step *= 0.5;
            }
        }
        let p = Direction::new(a, b).to_vec();
        (val, p * self.radial_unit(&p))
    }
}
