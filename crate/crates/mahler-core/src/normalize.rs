//! Balance angles, the shear `A(K)`, rotated bodies `K(theta, phi, psi)`, the
//! field `(F, G, H)` on the box `D`, its symmetry identities, the winding
//! number of `(G, H)` along the boundary face `s = 0`, and the zero finder
//! that produces a body with eight equal octant volumes and equal opposite
//! quarter areas in the `yz` plane.

use std::f64::consts::PI;

use rayon::prelude::*;
use serde::Serialize;

use crate::body::{ConvexBody3, Direction, LinearMap3, Mat3, Vec3};
use crate::error::{Error, Result};
use crate::quadrature::{
    bisect, octant_volumes, polygon_sector_area, quarter_areas, rho2_profile, volume, PeriodicProfile, SphereGrid,
    ARC_SAMPLES,
};

/// The angles `Theta`, `Phi`, `Psi` of a body.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct BalanceAngles {
    /// Angle splitting `int rho^3` over the half space `z >= 0` into equal halves.
    pub theta_cap: f64,
    /// Angle splitting `int rho^2` over the upper half of the `xy` great circle.
    pub phi_cap: f64,
    /// Angle splitting `int rho^2` over the half circle through `e1` and `P(pi/2, Theta)`.
    pub psi_cap: f64,
}

/// A point `(s, phi, psi)` of the box `D = [0,1] x [0,pi] x [0,pi]`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct BoxPoint {
    /// Rescaled first rotation angle.
    pub s: f64,
    /// Second rotation angle.
    pub phi: f64,
    /// Third rotation angle.
    pub psi: f64,
}

impl BoxPoint {
    /// Validated box point.
    pub fn new(s: f64, phi: f64, psi: f64) -> Result<Self> {
        let ok = (0.0..=1.0).contains(&s) && (0.0..=PI).contains(&phi) && (0.0..=PI).contains(&psi);
        if !ok {
            return Err(Error::BadParameter(format!("({s}, {phi}, {psi}) is outside [0,1] x [0,pi] x [0,pi]")));
        }
        Ok(Self { s, phi, psi })
    }

    fn clamped(v: [f64; 3]) -> Self {
        Self { s: v[0].clamp(0.0, 1.0), phi: v[1].clamp(0.0, PI), psi: v[2].clamp(0.0, PI) }
    }

    fn coords(&self) -> [f64; 3] {
        [self.s, self.phi, self.psi]
    }
}

/// Signed residuals of the two normalization conditions.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ConditionResiduals {
    /// `(|O*f| - |O*g|, |O*h| - |O*i|, |D1| + |D2| - |D3| - |D4|)`.
    pub r22: [f64; 3],
    /// `(|D1| - |D2|, |D1| - |D3|, |D1| - |D4|, |O*d| - |O*e|)`.
    pub r23: [f64; 4],
}

/// Whether a symmetry residual compares angles or volumes.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum ResidualKind {
    /// Dimensionless angle or box coordinate.
    Angle,
    /// Quantity scaling like a volume or area of the body.
    Volume,
}

/// Both sides of one symmetry identity.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SymmetryResidual {
    /// Short description of the identity.
    pub name: String,
    /// Left-hand side.
    pub lhs: f64,
    /// Right-hand side.
    pub rhs: f64,
    /// Scale class of the compared quantity.
    pub kind: ResidualKind,
}

impl SymmetryResidual {
    /// Absolute difference of the two sides.
    pub fn residual(&self) -> f64 {
        (self.lhs - self.rhs).abs()
    }
}

/// One sample of the winding contour.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct WindingSample {
    /// Contour parameter in `[0, 4 pi]`.
    pub t: f64,
    /// Value of `G`.
    #[serde(rename = "G")]
    pub g: f64,
    /// Value of `H`.
    #[serde(rename = "H")]
    pub h: f64,
    /// Continuous angle of `(G, H)` accumulated from the first sample.
    pub angle: f64,
}

/// The field `(G, H)` traced around the face `s = 0`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct WindingTrace {
    /// Samples in increasing `t`.
    pub samples: Vec<WindingSample>,
    /// Number of turns of `(G, H)` around the origin.
    pub winding: i64,
}

/// A zero of `(F, G, H)` and the body it normalizes.
#[derive(Debug, Clone, PartialEq)]
pub struct NormalizationResult {
    /// Location of the zero in `D`.
    pub point: BoxPoint,
    /// Rotation angles `(theta, phi, psi)`.
    pub angles: [f64; 3],
    /// The rotation `X(theta) Y(phi) Z(psi)`.
    pub rotation: LinearMap3,
    /// The shear `A` of the rotated body.
    pub shear: LinearMap3,
    /// The composite map `A X Y Z`.
    pub map: LinearMap3,
    /// The normalized body `A K(theta, phi, psi)`.
    pub normalized_body: ConvexBody3,
    /// Octant and quarter-area residuals of the normalized body.
    pub residual23: [f64; 4],
    /// Euclidean norm of `(F, G, H)` at the zero.
    pub fgh_norm: f64,
    /// Volume of the body.
    pub volume: f64,
}

/// One row of a sweep over `D`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SweepRow {
    /// Box coordinate `s`.
    pub s: f64,
    /// Box coordinate `phi`.
    pub phi: f64,
    /// Box coordinate `psi`.
    pub psi: f64,
    /// Field component `F`.
    #[serde(rename = "F")]
    pub f: f64,
    /// Field component `G`.
    #[serde(rename = "G")]
    pub g: f64,
    /// Field component `H`.
    #[serde(rename = "H")]
    pub h: f64,
}

/// Rotation about the `x` axis.
pub fn rotation_x(t: f64) -> Mat3 {
    let (s, c) = t.sin_cos();
    Mat3::new(1.0, 0.0, 0.0, 0.0, c, -s, 0.0, s, c)
}

/// Rotation about the `y` axis.
pub fn rotation_y(t: f64) -> Mat3 {
    let (s, c) = t.sin_cos();
    Mat3::new(c, 0.0, s, 0.0, 1.0, 0.0, -s, 0.0, c)
}

/// Rotation about the `z` axis.
pub fn rotation_z(t: f64) -> Mat3 {
    let (s, c) = t.sin_cos();
    Mat3::new(c, -s, 0.0, s, c, 0.0, 0.0, 0.0, 1.0)
}

/// The rotation `X(theta) Y(phi) Z(psi)`.
pub fn rotation(theta: f64, phi: f64, psi: f64) -> LinearMap3 {
    LinearMap3::new(rotation_x(theta) * rotation_y(phi) * rotation_z(psi)).expect("rotations are invertible")
}

/// The rotated body `K(theta, phi, psi) = X(theta) Y(phi) Z(psi) K`.
pub fn rotate(k: &ConvexBody3, theta: f64, phi: f64, psi: f64) -> ConvexBody3 {
    k.apply_linear(&rotation(theta, phi, psi))
}

/// `beta -> int_0^pi rho^3(P(alpha, beta)) sin(alpha) d alpha` as a `pi`-periodic profile.
fn theta_profile(k: &ConvexBody3, grid: &SphereGrid) -> PeriodicProfile {
    let alpha = grid.alpha_nodes();
    let weights = grid.alpha_weights();
    PeriodicProfile::sample(grid.n_beta() / 2, |b| {
        alpha.iter().zip(weights).map(|(&a, &w)| w * k.radial(&Direction::new(a, b).to_vec()).powi(3)).sum()
    })
}

fn polytope_theta(k: &ConvexBody3) -> Option<f64> {
    let p = k.as_polytope()?;
    let quarter = 0.25 * p.volume();
    Some(bisect(
        |t| {
            let (s, c) = t.sin_cos();
            p.cone_volume(&[Vec3::z(), Vec3::new(0.0, s, -c)]) - quarter
        },
        0.0,
        PI,
        1e-13,
    ))
}

/// `Theta(K)`.
pub fn theta_cap(k: &ConvexBody3, grid: &SphereGrid) -> f64 {
    polytope_theta(k).unwrap_or_else(|| theta_profile(k, grid).balance())
}

/// Balance angle of `rho^2` along the half circle `cos t b1 + sin t b2`, `t in [0, pi]`.
fn half_circle_balance(k: &ConvexBody3, b1: &Vec3, b2: &Vec3) -> f64 {
    match k.as_polytope() {
        Some(p) => {
            let section = p.section(b1, b2);
            let quarter = 0.25 * section.area();
            bisect(|x| polygon_sector_area(&section, x) - quarter, 0.0, PI, 1e-13)
        }
        None => rho2_profile(k, b1, b2, ARC_SAMPLES).balance(),
    }
}

fn angles_with_theta(k: &ConvexBody3, theta: f64) -> BalanceAngles {
    let phi = half_circle_balance(k, &Vec3::x(), &Vec3::y());
    let w = Direction::new(PI / 2.0, theta).to_vec();
    let psi = half_circle_balance(k, &Vec3::x(), &w);
    BalanceAngles { theta_cap: theta, phi_cap: phi, psi_cap: psi }
}

/// The balance angles `(Theta, Phi, Psi)`.
pub fn balance_angles(k: &ConvexBody3, grid: &SphereGrid) -> BalanceAngles {
    angles_with_theta(k, theta_cap(k, grid))
}

/// The shear determined by given balance angles.
pub fn shear_from_angles(angles: &BalanceAngles) -> LinearMap3 {
    let a = 1.0 / angles.phi_cap.tan();
    let b = 1.0 / angles.theta_cap.tan();
    let c = 1.0 / (angles.theta_cap.sin() * angles.psi_cap.tan());
    LinearMap3::new(Mat3::new(1.0, -a, a * b - c, 0.0, 1.0, -b, 0.0, 0.0, 1.0)).expect("unit triangular")
}

/// The shear `A(K)`.
pub fn shear(k: &ConvexBody3, grid: &SphereGrid) -> LinearMap3 {
    shear_from_angles(&balance_angles(k, grid))
}

fn field_from_measures(q: &[f64; 6], d: &[f64; 8]) -> [f64; 3] {
    [q[0] - q[1], d[0] + d[2] - d[1] - d[3], d[0] + d[3] - d[1] - d[2]]
}

/// `(F, G, H)` of a body whose balance angles are known.
fn field_of(l: &ConvexBody3, angles: &BalanceAngles, grid: &SphereGrid) -> [f64; 3] {
    let m = l.apply_linear(&shear_from_angles(angles));
    field_from_measures(&quarter_areas(&m), &octant_volumes(&m, grid))
}

/// `(F, G, H)` of a body, with its balance angles.
pub fn body_field(l: &ConvexBody3, grid: &SphereGrid) -> (BalanceAngles, [f64; 3]) {
    let angles = balance_angles(l, grid);
    (angles, field_of(l, &angles, grid))
}

/// `Theta` of `X(theta) L0` as a function of `theta`, for a fixed body `L0`.
struct ThetaOracle {
    base: ConvexBody3,
    profile: Option<PeriodicProfile>,
}

impl ThetaOracle {
    fn new(base: ConvexBody3, grid: &SphereGrid) -> Self {
        let profile = if base.as_polytope().is_some() { None } else { Some(theta_profile(&base, grid)) };
        Self { base, profile }
    }

    fn at(&self, theta: f64) -> f64 {
        match &self.profile {
            Some(p) => p.shifted(theta).balance(),
            None => polytope_theta(&rotate(&self.base, theta, 0.0, 0.0)).expect("polytope"),
        }
    }
}

/// Rotation angle `theta` and field value at a box point.
fn field_at(k: &ConvexBody3, p: &BoxPoint, grid: &SphereGrid) -> (f64, [f64; 3]) {
    let oracle = ThetaOracle::new(rotate(k, 0.0, p.phi, p.psi), grid);
    let theta = (PI - oracle.at(0.0)) * p.s;
    let l = rotate(&oracle.base, theta, 0.0, 0.0);
    let angles = angles_with_theta(&l, oracle.at(theta));
    (theta, field_of(&l, &angles, grid))
}

/// `(F, G, H)` at a point of `D`: the field of `A K(theta, phi, psi)` with
/// `theta = (pi - Theta(K(0, phi, psi))) s`.
pub fn fgh(k: &ConvexBody3, point: &BoxPoint, grid: &SphereGrid) -> [f64; 3] {
    field_at(k, point, grid).1
}

/// The rotation angle `theta` belonging to a box point.
pub fn theta_of_point(k: &ConvexBody3, point: &BoxPoint, grid: &SphereGrid) -> f64 {
    (PI - theta_cap(&rotate(k, 0.0, point.phi, point.psi), grid)) * point.s
}

/// Signed residuals of both normalization conditions, without reshearing.
pub fn condition_residuals(k: &ConvexBody3, grid: &SphereGrid) -> ConditionResiduals {
    let q = quarter_areas(k);
    let d = octant_volumes(k, grid);
    ConditionResiduals {
        r22: [q[2] - q[3], q[4] - q[5], d[0] + d[1] - d[2] - d[3]],
        r23: [d[0] - d[1], d[0] - d[2], d[0] - d[3], q[0] - q[1]],
    }
}

/// `Gamma_psi(theta) = pi - Theta(theta, 0, psi) + theta`.
pub fn gamma_psi(k: &ConvexBody3, psi: f64, theta: f64, grid: &SphereGrid) -> f64 {
    let oracle = ThetaOracle::new(rotate(k, 0.0, 0.0, psi), grid);
    PI - oracle.at(theta) + theta
}

fn t_psi_with(oracle: &ThetaOracle, s: f64) -> f64 {
    let theta0 = oracle.at(0.0);
    let end = PI - theta0;
    let target = PI - theta0 * s;
    bisect(|t| PI - oracle.at(t) + t - target, 0.0, end, 1e-13) / end
}

/// `T_psi(s) = Gamma_psi^{-1}(pi - Theta(0,0,psi) s) / (pi - Theta(0,0,psi))`.
pub fn t_psi(k: &ConvexBody3, psi: f64, s: f64, grid: &SphereGrid) -> f64 {
    t_psi_with(&ThetaOracle::new(rotate(k, 0.0, 0.0, psi), grid), s)
}

/// Both sides of every reflection and boundary identity of the angles and of
/// `(F, G, H)` at a box point.
pub fn symmetry_residuals(k: &ConvexBody3, point: &BoxPoint, grid: &SphereGrid) -> Vec<SymmetryResidual> {
    let mut out = Vec::new();
    let mut push = |name: &str, lhs: f64, rhs: f64, kind: ResidualKind| {
        out.push(SymmetryResidual { name: name.to_string(), lhs, rhs, kind });
    };
    use ResidualKind::{Angle, Volume};

    let theta = theta_of_point(k, point, grid);
    let l = rotate(k, theta, point.phi, point.psi);
    let (a, f) = body_field(&l, grid);

    let lt = rotate(&l, PI - a.theta_cap, 0.0, 0.0);
    let (at, ft) = body_field(&lt, grid);
    push("theta + theta of X(pi - theta) = pi", a.theta_cap + at.theta_cap, PI, Angle);
    push("X(pi - theta): phi = pi - psi", at.phi_cap, PI - a.psi_cap, Angle);
    push("X(pi - theta): psi = phi", at.psi_cap, a.phi_cap, Angle);
    push("X(pi - theta): F = -F", ft[0], -f[0], Volume);
    push("X(pi - theta): G = -H", ft[1], -f[2], Volume);
    push("X(pi - theta): H = G", ft[2], f[1], Volume);

    let (ax, fx) = body_field(&rotate(&l, PI, 0.0, 0.0), grid);
    push("X(pi): theta = theta", ax.theta_cap, a.theta_cap, Angle);
    push("X(pi): phi = pi - phi", ax.phi_cap, PI - a.phi_cap, Angle);
    push("X(pi): psi = pi - psi", ax.psi_cap, PI - a.psi_cap, Angle);
    push("X(pi): F = F", fx[0], f[0], Volume);
    push("X(pi): G = -G", fx[1], -f[1], Volume);
    push("X(pi): H = -H", fx[2], -f[2], Volume);

    let (ay, fy) = body_field(&rotate(&l, 0.0, PI, 0.0), grid);
    push("Y(pi): theta = pi - theta", ay.theta_cap, PI - a.theta_cap, Angle);
    push("Y(pi): phi = pi - phi", ay.phi_cap, PI - a.phi_cap, Angle);
    push("Y(pi): psi = psi", ay.psi_cap, a.psi_cap, Angle);
    push("Y(pi): F = -F", fy[0], -f[0], Volume);
    push("Y(pi): G = -G", fy[1], -f[1], Volume);
    push("Y(pi): H = H", fy[2], f[2], Volume);

    let (az, fz) = body_field(&rotate(&l, 0.0, 0.0, PI), grid);
    push("Z(pi): theta = pi - theta", az.theta_cap, PI - a.theta_cap, Angle);
    push("Z(pi): phi = phi", az.phi_cap, a.phi_cap, Angle);
    push("Z(pi): psi = pi - psi", az.psi_cap, PI - a.psi_cap, Angle);
    push("Z(pi): F = -F", fz[0], -f[0], Volume);
    push("Z(pi): G = G", fz[1], f[1], Volume);
    push("Z(pi): H = -H", fz[2], -f[2], Volume);

    let oracle = ThetaOracle::new(rotate(k, 0.0, 0.0, point.psi), grid);
    let theta0 = oracle.at(0.0);
    let end = PI - theta0;
    let gammas: Vec<f64> = (0..=64).map(|j| end * j as f64 / 64.0).map(|t| PI - oracle.at(t) + t).collect();
    let worst_step = gammas.windows(2).map(|w| w[1] - w[0]).fold(f64::INFINITY, f64::min);
    push("Gamma_psi increasing", worst_step.min(0.0), 0.0, Angle);
    push("Gamma_psi(0) = pi - Theta(0,0,psi)", gammas[0], end, Angle);
    push("Gamma_psi(pi - Theta(0,0,psi)) = pi", gammas[64], PI, Angle);
    push("T_psi(0) = 1", t_psi_with(&oracle, 0.0), 1.0, Angle);
    push("T_psi(1) = 0", t_psi_with(&oracle, 1.0), 0.0, Angle);

    let at = |s: f64, phi: f64, psi: f64| fgh(k, &BoxPoint { s, phi, psi }, grid);
    let one = at(1.0, point.phi, point.psi);
    let zero = at(0.0, point.phi, point.psi);
    push("F(1,phi,psi) = -F(0,phi,psi)", one[0], -zero[0], Volume);
    push("G(1,phi,psi) = -H(0,phi,psi)", one[1], -zero[2], Volume);
    push("H(1,phi,psi) = G(0,phi,psi)", one[2], zero[1], Volume);

    let flipped = at(point.s, PI, point.psi);
    let image = at(t_psi_with(&oracle, point.s), 0.0, point.psi);
    push("F(s,pi,psi) = F(T_psi(s),0,psi)", flipped[0], image[0], Volume);
    push("G(s,pi,psi) = -H(T_psi(s),0,psi)", flipped[1], -image[2], Volume);
    push("H(s,pi,psi) = -G(T_psi(s),0,psi)", flipped[2], -image[1], Volume);

    let top = at(point.s, point.phi, PI);
    let bottom = at(point.s, PI - point.phi, 0.0);
    push("F(s,phi,pi) = F(s,pi-phi,0)", top[0], bottom[0], Volume);
    push("G(s,phi,pi) = -G(s,pi-phi,0)", top[1], -bottom[1], Volume);
    push("H(s,phi,pi) = -H(s,pi-phi,0)", top[2], -bottom[2], Volume);
    out
}

/// The boundary of the face `s = 0` traversed for `t in [0, 4 pi]`.
fn contour(t: f64) -> (f64, f64) {
    if t <= PI {
        (t, 0.0)
    } else if t <= 2.0 * PI {
        (PI, t - PI)
    } else if t <= 3.0 * PI {
        (3.0 * PI - t, PI)
    } else {
        (0.0, 4.0 * PI - t)
    }
}

fn wrapped(d: f64) -> f64 {
    let mut d = d % (2.0 * PI);
    if d > PI {
        d -= 2.0 * PI;
    } else if d <= -PI {
        d += 2.0 * PI;
    }
    d
}

const MAX_CONTOUR_SAMPLES: usize = 1 << 20;

/// Winding number of `(G, H)` along the boundary of the face `s = 0`.
pub fn winding(k: &ConvexBody3, n_samples: usize, grid: &SphereGrid) -> Result<WindingTrace> {
    if n_samples < 4 {
        return Err(Error::BadParameter(format!("n_samples = {n_samples} must be at least 4")));
    }
    let floor = 1e-9 * volume(k, grid);
    let eval = |t: f64| -> Result<(f64, f64)> {
        let (phi, psi) = contour(t);
        let f = fgh(k, &BoxPoint { s: 0.0, phi, psi }, grid);
        let norm = f[1].hypot(f[2]);
        if norm < floor {
            return Err(Error::NotGeneric(norm));
        }
        Ok((f[1], f[2]))
    };
    let mut ts: Vec<f64> = (0..=n_samples).map(|j| 4.0 * PI * j as f64 / n_samples as f64).collect();
    let mut vals: Vec<(f64, f64)> = ts.par_iter().map(|&t| eval(t)).collect::<Result<_>>()?;
    loop {
        let bad: Vec<usize> = (0..ts.len() - 1)
            .filter(|&i| wrapped(vals[i + 1].1.atan2(vals[i + 1].0) - vals[i].1.atan2(vals[i].0)).abs() >= PI / 2.0)
            .collect();
        if bad.is_empty() {
            break;
        }
        if ts.len() + bad.len() > MAX_CONTOUR_SAMPLES {
            return Err(Error::NoConvergence(format!("contour refinement exceeded {MAX_CONTOUR_SAMPLES} samples")));
        }
        if bad.iter().any(|&i| ts[i + 1] - ts[i] < 1e-12) {
            let norm = bad.iter().map(|&i| vals[i].0.hypot(vals[i].1)).fold(f64::INFINITY, f64::min);
            return Err(Error::NotGeneric(norm));
        }
        let mids: Vec<f64> = bad.iter().map(|&i| 0.5 * (ts[i] + ts[i + 1])).collect();
        let new_vals: Vec<(f64, f64)> = mids.par_iter().map(|&t| eval(t)).collect::<Result<_>>()?;
        let mut nt = Vec::with_capacity(ts.len() + mids.len());
        let mut nv = Vec::with_capacity(ts.len() + mids.len());
        let mut next = 0;
        for i in 0..ts.len() {
            nt.push(ts[i]);
            nv.push(vals[i]);
            if next < bad.len() && bad[next] == i {
                nt.push(mids[next]);
                nv.push(new_vals[next]);
                next += 1;
            }
        }
        ts = nt;
        vals = nv;
    }
    let mut samples = Vec::with_capacity(ts.len());
    let mut angle = 0.0;
    for i in 0..ts.len() {
        if i > 0 {
            angle += wrapped(vals[i].1.atan2(vals[i].0) - vals[i - 1].1.atan2(vals[i - 1].0));
        }
        samples.push(WindingSample { t: ts[i], g: vals[i].0, h: vals[i].1, angle });
    }
    let winding = (angle / (2.0 * PI)).round() as i64;
    Ok(WindingTrace { samples, winding })
}

fn norm3(v: &[f64; 3]) -> f64 {
    (v[0] * v[0] + v[1] * v[1] + v[2] * v[2]).sqrt()
}

const FD_STEP: f64 = 1e-4;
const SCAN_SIDE: usize = 9;
const NEWTON_STARTS: usize = 3;
const MAX_DEPTH: usize = 12;
const BOXES_PER_LEVEL: usize = 32;

#[derive(Clone, Copy)]
struct Candidate {
    point: BoxPoint,
    value: [f64; 3],
    norm: f64,
}

fn better(a: &Candidate, b: &Candidate) -> bool {
    a.norm.total_cmp(&b.norm).then_with(|| a.point.coords().partial_cmp(&b.point.coords()).expect("finite")).is_lt()
}

fn newton(k: &ConvexBody3, start: &Candidate, target: f64, grid: &SphereGrid) -> Candidate {
    let lo = [0.0, 0.0, 0.0];
    let hi = [1.0, PI, PI];
    let mut x = start.point;
    let mut f = start.value;
    let mut nf = start.norm;
    for _ in 0..40 {
        if nf < target {
            break;
        }
        let c = x.coords();
        let cols: Vec<[f64; 3]> = (0..3)
            .into_par_iter()
            .map(|j| {
                let mut xp = c;
                let mut xm = c;
                xp[j] = (c[j] + FD_STEP).min(hi[j]);
                xm[j] = (c[j] - FD_STEP).max(lo[j]);
                let fp = fgh(k, &BoxPoint::clamped(xp), grid);
                let fm = fgh(k, &BoxPoint::clamped(xm), grid);
                let h = xp[j] - xm[j];
                [(fp[0] - fm[0]) / h, (fp[1] - fm[1]) / h, (fp[2] - fm[2]) / h]
            })
            .collect();
        let jac = Mat3::from_fn(|r, j| cols[j][r]);
        let Some(inv) = jac.try_inverse() else { break };
        let step = -(inv * Vec3::new(f[0], f[1], f[2]));
        let mut lambda = 1.0;
        let mut moved = false;
        while lambda > 1e-6 {
            let trial = BoxPoint::clamped([c[0] + lambda * step[0], c[1] + lambda * step[1], c[2] + lambda * step[2]]);
            let ft = fgh(k, &trial, grid);
            let nt = norm3(&ft);
            if nt < nf {
                x = trial;
                f = ft;
                nf = nt;
                moved = true;
                break;
            }
            lambda *= 0.5;
        }
        if !moved {
            break;
        }
    }
    Candidate { point: x, value: f, norm: nf }
}

fn evaluate_all(k: &ConvexBody3, points: Vec<BoxPoint>, grid: &SphereGrid) -> Vec<Candidate> {
    points
        .into_par_iter()
        .map(|p| {
            let value = fgh(k, &p, grid);
            Candidate { point: p, value, norm: norm3(&value) }
        })
        .collect()
}

fn polish(k: &ConvexBody3, mut cands: Vec<Candidate>, target: f64, grid: &SphereGrid) -> Option<Candidate> {
    cands.sort_by(|a, b| if better(a, b) { std::cmp::Ordering::Less } else { std::cmp::Ordering::Greater });
    let mut best: Option<Candidate> = None;
    for c in cands.iter().take(NEWTON_STARTS) {
        let r = newton(k, c, target, grid);
        if best.as_ref().is_none_or(|b| better(&r, b)) {
            best = Some(r);
        }
    }
    best
}

#[derive(Clone, Copy)]
struct Cell {
    lo: [f64; 3],
    hi: [f64; 3],
}

impl Cell {
    fn samples(&self) -> Vec<BoxPoint> {
        let mut out = Vec::with_capacity(27);
        for i in 0..3 {
            for j in 0..3 {
                for l in 0..3 {
                    let f = |d: usize, n: usize| self.lo[d] + (self.hi[d] - self.lo[d]) * n as f64 / 2.0;
                    out.push(BoxPoint::clamped([f(0, i), f(1, j), f(2, l)]));
                }
            }
        }
        out
    }

    fn children(&self) -> Vec<Cell> {
        let mid = [0.5 * (self.lo[0] + self.hi[0]), 0.5 * (self.lo[1] + self.hi[1]), 0.5 * (self.lo[2] + self.hi[2])];
        (0..8)
            .map(|m| {
                let mut lo = self.lo;
                let mut hi = self.hi;
                for d in 0..3 {
                    if m & (1 << d) == 0 {
                        hi[d] = mid[d];
                    } else {
                        lo[d] = mid[d];
                    }
                }
                Cell { lo, hi }
            })
            .collect()
    }
}

fn subdivide(k: &ConvexBody3, target: f64, accept: f64, grid: &SphereGrid) -> Option<Candidate> {
    let n = SCAN_SIDE - 1;
    let step = [1.0 / n as f64, PI / n as f64, PI / n as f64];
    let mut cells = Vec::new();
    for i in 0..n {
        for j in 0..n {
            for l in 0..n {
                let lo = [i as f64 * step[0], j as f64 * step[1], l as f64 * step[2]];
                cells.push(Cell { lo, hi: [lo[0] + step[0], lo[1] + step[1], lo[2] + step[2]] });
            }
        }
    }
    for _ in 0..MAX_DEPTH {
        let scored: Vec<(Cell, Option<f64>, Candidate)> = cells
            .par_iter()
            .map(|cell| {
                let evals = evaluate_all(k, cell.samples(), grid);
                let excluded = (0..3).any(|c| evals.iter().all(|e| e.value[c] > 0.0) || evals.iter().all(|e| e.value[c] < 0.0));
                let best = evals.into_iter().reduce(|a, b| if better(&b, &a) { b } else { a }).expect("27 samples");
                (*cell, if excluded { None } else { Some(best.norm) }, best)
            })
            .collect();
        let mut kept: Vec<(Cell, f64, Candidate)> =
            scored.into_iter().filter_map(|(c, s, b)| s.map(|s| (c, s, b))).collect();
        if kept.is_empty() {
            return None;
        }
        kept.sort_by(|a, b| a.1.total_cmp(&b.1));
        kept.truncate(BOXES_PER_LEVEL);
        let seeds: Vec<Candidate> = kept.iter().take(NEWTON_STARTS).map(|(_, _, b)| *b).collect();
        if let Some(found) = polish(k, seeds, target, grid) {
            if found.norm < accept {
                return Some(found);
            }
        }
        cells = kept.iter().flat_map(|(c, _, _)| c.children()).collect();
    }
    None
}

/// A zero of `(F, G, H)` in `D` and the normalized body it yields.
pub fn find_normalization(k: &ConvexBody3, grid: &SphereGrid) -> Result<NormalizationResult> {
    let vol = volume(k, grid);
    let accept = 1e-8 * vol;
    let target = 1e-12 * vol;
    let origin = BoxPoint { s: 0.0, phi: 0.0, psi: 0.0 };
    let f0 = fgh(k, &origin, grid);
    let found = if norm3(&f0) < accept {
        Candidate { point: origin, value: f0, norm: norm3(&f0) }
    } else {
        let n = (SCAN_SIDE - 1) as f64;
        let mut pts = Vec::with_capacity(SCAN_SIDE.pow(3));
        for i in 0..SCAN_SIDE {
            for j in 0..SCAN_SIDE {
                for l in 0..SCAN_SIDE {
                    pts.push(BoxPoint { s: i as f64 / n, phi: PI * j as f64 / n, psi: PI * l as f64 / n });
                }
            }
        }
        let scan = evaluate_all(k, pts, grid);
        match polish(k, scan, target, grid) {
            Some(c) if c.norm < accept => c,
            _ => subdivide(k, target, accept, grid)
                .ok_or_else(|| Error::NoZeroFound(format!("subdivision depth {MAX_DEPTH} exhausted")))?,
        }
    };
    let point = found.point;
    let oracle = ThetaOracle::new(rotate(k, 0.0, point.phi, point.psi), grid);
    let theta = (PI - oracle.at(0.0)) * point.s;
    let rot = rotation(theta, point.phi, point.psi);
    let l = k.apply_linear(&rot);
    let shear = shear_from_angles(&angles_with_theta(&l, oracle.at(theta)));
    let normalized_body = l.apply_linear(&shear);
    let residual23 = condition_residuals(&normalized_body, grid).r23;
    Ok(NormalizationResult {
        point,
        angles: [theta, point.phi, point.psi],
        map: shear.compose(&rot),
        rotation: rot,
        shear,
        normalized_body,
        residual23,
        fgh_norm: found.norm,
        volume: vol,
    })
}

/// `(F, G, H)` on the uniform `n x n x n` lattice of `D`, in `s`-major order.
pub fn sweep(k: &ConvexBody3, n: usize, grid: &SphereGrid) -> Result<Vec<SweepRow>> {
    if n < 2 {
        return Err(Error::BadParameter(format!("sweep size {n} must be at least 2")));
    }
    let m = (n - 1) as f64;
    let mut pts = Vec::with_capacity(n * n * n);
    for i in 0..n {
        for j in 0..n {
            for l in 0..n {
                pts.push(BoxPoint { s: i as f64 / m, phi: PI * j as f64 / m, psi: PI * l as f64 / m });
            }
        }
    }
    Ok(evaluate_all(k, pts, grid)
        .into_iter()
        .map(|c| SweepRow { s: c.point.s, phi: c.point.phi, psi: c.point.psi, f: c.value[0], g: c.value[1], h: c.value[2] })
        .collect())
}
