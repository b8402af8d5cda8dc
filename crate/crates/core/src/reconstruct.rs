//! Recovering the loop product from infinitesimal data.
//!
//! `φ(a, b)` is integrated along a path `t ↦ b(t)` from `e` to `b` by
//!
//! ```text
//! dφ/dt = R(φ) · l_{(a,b(t))*,e} · R(b(t))⁻¹ · b'(t),   φ(0) = a,
//! ```
//!
//! with `R` the left fundamental frame and `l_*` the differential at `e` of
//! the left associator.

use crate::error::{Error, Result};
use crate::linalg::Mat;
use crate::loop_core::{
    associator_differential, relative_distance, AssociatorKind, LoopPoint, SmoothLoop,
};
use crate::report::{Case, VerificationReport};
use crate::scalar::{jacobian, lift_slice, Dual, Scalar};
use crate::tangent::{frame_s, structure_functions_s, FrameKind};

/// Smallest step count accepted by [`reconstruct_product`].
pub const MIN_STEPS: usize = 16;
/// Step-halving estimate allowed by [`reconstruct_product`].
pub const RECONSTRUCT_TOL: f64 = 1e-6;

#[derive(Clone, Debug, PartialEq)]
pub enum PathShape {
    /// `b(t) = t·b`.
    Ray,
    /// Quadratic Bézier from `e` through `control` to `b`.
    Bezier { control: Vec<f64> },
}

#[derive(Clone, Debug, PartialEq)]
pub struct LiePath {
    pub start: LoopPoint,
    pub target: Vec<f64>,
    pub steps: usize,
    pub shape: PathShape,
}

impl LiePath {
    pub fn ray(start: &[f64], target: &[f64], steps: usize) -> Self {
        LiePath { start: LoopPoint(start.to_vec()), target: target.to_vec(), steps, shape: PathShape::Ray }
    }

    /// Parameter point and velocity at time `t`.
    fn at(&self, t: f64) -> (Vec<f64>, Vec<f64>) {
        match &self.shape {
            PathShape::Ray => (self.target.iter().map(|b| t * b).collect(), self.target.clone()),
            PathShape::Bezier { control } => {
                let pos = control
                    .iter()
                    .zip(&self.target)
                    .map(|(c, b)| 2.0 * (1.0 - t) * t * c + t * t * b)
                    .collect();
                let vel = control
                    .iter()
                    .zip(&self.target)
                    .map(|(c, b)| 2.0 * (1.0 - 2.0 * t) * c + 2.0 * t * b)
                    .collect();
                (pos, vel)
            }
        }
    }
}

/// Right-hand side `R(φ) · l_{(a,b)*,e} · R(b)⁻¹ · db`.
///
/// `l_{(a,b)*,e} = R(a·b)⁻¹ · (L_a)_{*,b} · R(b)`, so `R(b)` cancels and
/// no division is differentiated.
pub fn sabinin_rhs<L: SmoothLoop + ?Sized>(l: &L, a: &[f64], b: &[f64], db: &[f64], phi: &[f64]) -> Result<Vec<f64>> {
    let ad = lift_slice(a);
    let la = jacobian(b, |w| l.product_s(&ad, w))?;
    let ab = l.product_s(a, b)?;
    let w = frame_s(l, FrameKind::Left, &ab)?.solve(&la.mul_vec(db))?;
    Ok(frame_s(l, FrameKind::Left, phi)?.mul_vec(&w))
}

/// The same right-hand side assembled from the associator differential.
pub fn sabinin_rhs_by_associator<L: SmoothLoop + ?Sized>(
    l: &L,
    a: &[f64],
    b: &[f64],
    db: &[f64],
    phi: &[f64],
) -> Result<Vec<f64>> {
    let omega_db = frame_s(l, FrameKind::Left, b)?.solve(db)?;
    let assoc = associator_differential(l, AssociatorKind::Left, a, b)?;
    Ok(frame_s(l, FrameKind::Left, phi)?.mul_vec(&assoc.mul_vec(&omega_db)))
}

fn axpy(x: &[f64], h: f64, k: &[f64]) -> Vec<f64> {
    x.iter().zip(k).map(|(u, v)| u + h * v).collect()
}

/// Classical fixed-step RK4 along `path`.
pub fn integrate_lie_equation<L: SmoothLoop + ?Sized>(l: &L, path: &LiePath) -> Result<LoopPoint> {
    let a = &path.start;
    let n = path.steps.max(1);
    let h = 1.0 / n as f64;
    let f = |t: f64, phi: &[f64]| {
        let (b, db) = path.at(t);
        sabinin_rhs(l, a, &b, &db, phi)
    };
    let mut phi = a.to_vec();
    for s in 0..n {
        let t = s as f64 * h;
        let k1 = f(t, &phi)?;
        let k2 = f(t + 0.5 * h, &axpy(&phi, 0.5 * h, &k1))?;
        let k3 = f(t + 0.5 * h, &axpy(&phi, 0.5 * h, &k2))?;
        let k4 = f(t + h, &axpy(&phi, h, &k3))?;
        for i in 0..phi.len() {
            phi[i] += h / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]);
        }
    }
    Ok(LoopPoint(phi))
}

/// `a·b` by integrating along the ray with `steps` RK4 steps; the result is
/// compared with a run at `2·steps` and rejected if they differ by more
/// than `tol`.
pub fn reconstruct_product_tol<L: SmoothLoop + ?Sized>(
    l: &L,
    a: &[f64],
    b: &[f64],
    steps: usize,
    tol: f64,
) -> Result<LoopPoint> {
    if steps < MIN_STEPS {
        return Err(Error::StepUnderflow { steps, tol, estimate: f64::INFINITY });
    }
    let coarse = integrate_lie_equation(l, &LiePath::ray(a, b, steps))?;
    let fine = integrate_lie_equation(l, &LiePath::ray(a, b, 2 * steps))?;
    let estimate = l.coord_distance(&coarse, &fine);
    if !(estimate <= tol) {
        return Err(Error::StepUnderflow { steps, tol, estimate });
    }
    Ok(coarse)
}

pub fn reconstruct_product<L: SmoothLoop + ?Sized>(l: &L, a: &[f64], b: &[f64], steps: usize) -> Result<LoopPoint> {
    reconstruct_product_tol(l, a, b, steps, RECONSTRUCT_TOL)
}

/// `λ(b; a) = l_{(a,b)*,e} · R(b)⁻¹`.
pub fn mc_lambda_s<L, S>(l: &L, a: &[f64], b: &[S]) -> Result<Mat<S>>
where
    L: SmoothLoop + ?Sized,
    S: Scalar,
{
    let a_s: Vec<S> = a.iter().map(|&v| S::cst(v)).collect();
    let assoc = associator_differential(l, AssociatorKind::Left, &a_s, b)?;
    let omega = frame_s(l, FrameKind::Left, b)?.inverse()?;
    Ok(assoc.mul(&omega))
}

/// Max entry of `∂_p λ^i_j − ∂_j λ^i_p + C^i_{mn}(a·b) λ^m_p λ^n_j`.
pub fn maurer_cartan_residual<L: SmoothLoop + ?Sized>(l: &L, b: &[f64], a: &[f64]) -> Result<f64> {
    let d = l.dim();
    let lam = mc_lambda_s::<L, f64>(l, a, b)?;
    // dl[(i*d + j), p] = ∂_p λ^i_j
    let dl = jacobian(b, |x| Ok(mc_lambda_s::<L, Dual<f64>>(l, a, x)?.as_slice().to_vec()))?;
    let ab = l.product_s(a, b)?;
    let c = structure_functions_s(l, FrameKind::Left, &ab)?;
    let cc = |i: usize, m: usize, n: usize| c[(i * d + m) * d + n];
    let mut worst = 0.0f64;
    for i in 0..d {
        for j in 0..d {
            for p in 0..d {
                let mut v = dl[(i * d + j, p)] - dl[(i * d + p, j)];
                for m in 0..d {
                    for n in 0..d {
                        v += cc(i, m, n) * lam[(m, p)] * lam[(n, j)];
                    }
                }
                worst = worst.max(v.abs());
            }
        }
    }
    Ok(worst)
}

/// `φ̃(b, c; a) = L_b ∘ l⁻¹_{(a,b)} c`, with `l⁻¹_{(a,b)} c = b\(a\((a·b)·c))`.
pub fn batalin_phi_tilde<L: SmoothLoop + ?Sized>(l: &L, b: &[f64], c: &[f64], a: &[f64]) -> Result<Vec<f64>> {
    let ab = l.product_s(a, b)?;
    let abc = l.product_s(&ab, c)?;
    let inv = l.left_div_s(b, &l.left_div_s(a, &abc)?)?;
    l.product_s(b, &inv)
}

/// Batalin's axioms for the loop acting on itself by left translations:
/// modified associativity, the unit conditions and solvability in each
/// argument of `φ̃`.
pub fn batalin_axiom_check<L: SmoothLoop + ?Sized>(l: &L, a: &[f64], b: &[f64], c: &[f64]) -> VerificationReport {
    const TOL: f64 = 1e-10;
    let mut report = VerificationReport::new("batalin");
    let e = l.identity();
    let rel = |x: Result<Vec<f64>>, y: Result<Vec<f64>>| match (x, y) {
        (Ok(x), Ok(y)) => relative_distance(l, &x, &y),
        _ => f64::INFINITY,
    };

    let lhs = l.product_s(a, b).and_then(|ab| l.product_s(&ab, c));
    let rhs = batalin_phi_tilde(l, b, c, a).and_then(|t| l.product_s(a, &t));
    report.push(Case::new("modified_associativity", rel(lhs, rhs), TOL, 1));

    let unit = rel(l.product_s(a, &e), Ok(a.to_vec()))
        .max(rel(l.product_s(&e, a), Ok(a.to_vec())))
        .max(rel(batalin_phi_tilde(l, b, &e, a), Ok(b.to_vec())))
        .max(rel(batalin_phi_tilde(l, &e, c, a), Ok(c.to_vec())));
    report.push(Case::new("unit", unit, TOL, 1));

    // solve φ̃(b, x; a) = c and φ̃(x, c; a) = b
    let d = c;
    let right = l
        .product_s(a, d)
        .and_then(|ad| l.left_div_s(&l.product_s(a, b)?, &ad))
        .and_then(|x| batalin_phi_tilde(l, b, &x, a));
    let left = l
        .product_s(a, b)
        .and_then(|ab| l.right_div_s(&ab, c))
        .and_then(|y| l.left_div_s(a, &y))
        .and_then(|x| batalin_phi_tilde(l, &x, c, a));
    let inv = rel(right, Ok(d.to_vec())).max(rel(left, Ok(b.to_vec())));
    report.push(Case::new("invertibility", inv, TOL, 1));

    report
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::zoo::{QcLoop, QhrLoop};

    #[test]
    fn identity_start_reproduces_target() {
        let b = [0.3, -0.2];
        let p = integrate_lie_equation(&QcLoop, &LiePath::ray(&[0.0, 0.0], &b, 64)).unwrap();
        assert!((p[0] - b[0]).abs() < 1e-9 && (p[1] - b[1]).abs() < 1e-9);
    }

    #[test]
    fn rhs_forms_agree() {
        let l = QhrLoop { k: 4.0 };
        let (a, b, db, phi) = ([0.1, 0.2, -0.1, 0.05], [0.2, -0.1, 0.1, 0.0], [1.0, 0.5, -0.3, 0.2], [0.05, 0.1, 0.0, -0.1]);
        let x = sabinin_rhs(&l, &a, &b, &db, &phi).unwrap();
        let y = sabinin_rhs_by_associator(&l, &a, &b, &db, &phi).unwrap();
        assert!(x.iter().zip(&y).all(|(u, v)| (u - v).abs() < 1e-13));
    }

    #[test]
    fn too_few_steps() {
        let r = reconstruct_product(&QcLoop, &[0.1, 0.0], &[0.2, 0.0], 8);
        assert!(matches!(r, Err(Error::StepUnderflow { .. })));
    }

    #[test]
    fn abelian_maurer_cartan_is_zero() {
        let l = QhrLoop { k: 0.0 };
        let r = maurer_cartan_residual(&l, &[0.1, 0.2, 0.0, -0.1], &[0.2, -0.1, 0.1, 0.0]).unwrap();
        assert!(r < 1e-15);
    }

    #[test]
    fn batalin_at_identity_collapses() {
        let rep = batalin_axiom_check(&QcLoop, &[0.0, 0.0], &[0.3, 0.1], &[-0.2, 0.4]);
        assert!(rep.passed(), "{rep:?}");
    }
}
