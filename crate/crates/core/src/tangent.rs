//! Tangent structure of a smooth loop: differentials of translations, the
//! left and right quasi-invariant frames, structure functions, the modified
//! Jacobi identity and the canonical Ad-form.
//!
//! Frames are stored with columns as fields: `R[(j, i)]` is the `j`-th
//! coordinate component of `Γ_i`.

use serde::Serialize;

use crate::error::Result;
use crate::linalg::{Mat, CONDITION_WARN};
use crate::loop_core::{
    ad_inverse_differential, associator_differential, associator_s, AssociatorKind, LoopPoint,
    SmoothLoop,
};
use crate::scalar::{cst_slice, jacobian, lift_slice, Dual, Scalar};

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct TangentVector {
    pub base: LoopPoint,
    pub vec: Vec<f64>,
}

impl TangentVector {
    pub fn new(base: impl Into<LoopPoint>, vec: Vec<f64>) -> Self {
        TangentVector { base: base.into(), vec }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct FrameMatrix {
    pub at: LoopPoint,
    pub r: Mat<f64>,
}

/// `C[p][i][j] = C^p_{ij}(at)`, flattened.
#[derive(Clone, Debug, PartialEq)]
pub struct StructureTensor {
    pub at: LoopPoint,
    pub dim: usize,
    pub c: Vec<f64>,
}

impl StructureTensor {
    pub fn get(&self, p: usize, i: usize, j: usize) -> f64 {
        self.c[(p * self.dim + i) * self.dim + j]
    }

    /// `max |C^p_{ij} + C^p_{ji}|`.
    pub fn antisymmetry_defect(&self) -> f64 {
        let d = self.dim;
        let mut worst = 0.0f64;
        for p in 0..d {
            for i in 0..d {
                for j in 0..d {
                    worst = worst.max((self.get(p, i, j) + self.get(p, j, i)).abs());
                }
            }
        }
        worst
    }
}

/// Which translations generate the frame.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum FrameKind {
    /// `Γ_i = L_{a*} e_i`: derivative of `a·b` in `b` at `b = e`.
    Left,
    /// `L̄_i = R_{y*} e_i`: derivative of `a·y` in `a` at `a = e`.
    Right,
}

pub fn frame_s<L, S>(l: &L, kind: FrameKind, a: &[S]) -> Result<Mat<S>>
where
    L: SmoothLoop + ?Sized,
    S: Scalar,
{
    let e: Vec<S> = cst_slice(&l.identity());
    let ad = lift_slice(a);
    match kind {
        FrameKind::Left => jacobian(&e, |b| l.product_s(&ad, b)),
        FrameKind::Right => jacobian(&e, |b| l.product_s(b, &ad)),
    }
}

/// Structure functions of a frame, flattened as `[p][i][j]`.
///
/// `[Γ_i, Γ_j]^k = R^m_i ∂_m R^k_j − R^m_j ∂_m R^k_i`, then `C = R⁻¹[Γ_i, Γ_j]`.
pub fn structure_functions_s<L, S>(l: &L, kind: FrameKind, a: &[S]) -> Result<Vec<S>>
where
    L: SmoothLoop + ?Sized,
    S: Scalar,
{
    let d = l.dim();
    let r = frame_s(l, kind, a)?;
    // dr[(k*d + j, m)] = ∂_m R^k_j
    let dr = jacobian(a, |x| Ok(frame_s(l, kind, x)?.as_slice().to_vec()))?;
    let lu = r.lu()?;
    let mut c = vec![S::zero(); d * d * d];
    for i in 0..d {
        for j in 0..d {
            let bracket: Vec<S> = (0..d)
                .map(|k| {
                    let mut acc = S::zero();
                    for m in 0..d {
                        acc += r[(m, i)] * dr[(k * d + j, m)] - r[(m, j)] * dr[(k * d + i, m)];
                    }
                    acc
                })
                .collect();
            let cij = lu.solve(&bracket);
            for p in 0..d {
                c[(p * d + i) * d + j] = cij[p];
            }
        }
    }
    Ok(c)
}

fn warn_if_ill_conditioned(r: &Mat<f64>, at: &[f64]) {
    let cond = r.condition();
    if cond > CONDITION_WARN {
        log::warn!("frame at {at:?} is ill conditioned (condition {cond:.3e})");
    }
}

/// Jacobian of `b ↦ a·b` at `v.base`, applied to `v.vec`; based at `a·v.base`.
pub fn pushforward_left<L: SmoothLoop + ?Sized>(l: &L, a: &[f64], v: &TangentVector) -> Result<TangentVector> {
    let ad = lift_slice(a);
    let j = jacobian(&v.base, |b| l.product_s(&ad, b))?;
    let base = l.product_s(a, &v.base)?;
    Ok(TangentVector::new(base, j.mul_vec(&v.vec)))
}

/// Jacobian of `a ↦ a·b` at `v.base`, applied to `v.vec`; based at `v.base·b`.
pub fn pushforward_right<L: SmoothLoop + ?Sized>(l: &L, b: &[f64], v: &TangentVector) -> Result<TangentVector> {
    let bd = lift_slice(b);
    let j = jacobian(&v.base, |a| l.product_s(a, &bd))?;
    let base = l.product_s(&v.base, b)?;
    Ok(TangentVector::new(base, j.mul_vec(&v.vec)))
}

pub fn left_fundamental_basis<L: SmoothLoop + ?Sized>(l: &L, a: &[f64]) -> Result<FrameMatrix> {
    let r = frame_s(l, FrameKind::Left, a)?;
    warn_if_ill_conditioned(&r, a);
    Ok(FrameMatrix { at: LoopPoint(a.to_vec()), r })
}

pub fn right_quasi_invariant_basis<L: SmoothLoop + ?Sized>(l: &L, y: &[f64]) -> Result<FrameMatrix> {
    let r = frame_s(l, FrameKind::Right, y)?;
    warn_if_ill_conditioned(&r, y);
    Ok(FrameMatrix { at: LoopPoint(y.to_vec()), r })
}

/// Structure functions of the left fundamental frame at `a`.
pub fn structure_functions<L: SmoothLoop + ?Sized>(l: &L, a: &[f64]) -> Result<StructureTensor> {
    Ok(StructureTensor {
        at: LoopPoint(a.to_vec()),
        dim: l.dim(),
        c: structure_functions_s(l, FrameKind::Left, a)?,
    })
}

/// Structure functions of the right quasi-invariant frame at `y`.
pub fn right_structure_functions<L: SmoothLoop + ?Sized>(l: &L, y: &[f64]) -> Result<StructureTensor> {
    Ok(StructureTensor {
        at: LoopPoint(y.to_vec()),
        dim: l.dim(),
        c: structure_functions_s(l, FrameKind::Right, y)?,
    })
}

/// Max entry of `Σ_cyc(ijk) [C^p_{ij,n} R^n_k + C^l_{ij} C^p_{kl}]`.
pub fn jacobi_residual_kind<L: SmoothLoop + ?Sized>(l: &L, kind: FrameKind, a: &[f64]) -> Result<f64> {
    let d = l.dim();
    let r = frame_s(l, kind, a)?;
    let c = structure_functions_s(l, kind, a)?;
    // dc[(p,i,j), n] = ∂_n C^p_{ij}
    let dc = jacobian(a, |x| structure_functions_s::<L, Dual<f64>>(l, kind, x))?;
    let at = |p: usize, i: usize, j: usize| (p * d + i) * d + j;
    let term = |p: usize, i: usize, j: usize, k: usize| {
        let mut acc = 0.0;
        for n in 0..d {
            acc += dc[(at(p, i, j), n)] * r[(n, k)];
        }
        for m in 0..d {
            acc += c[at(m, i, j)] * c[at(p, k, m)];
        }
        acc
    };
    let mut worst = 0.0f64;
    for p in 0..d {
        for i in 0..d {
            for j in 0..d {
                for k in 0..d {
                    let s = term(p, i, j, k) + term(p, j, k, i) + term(p, k, i, j);
                    worst = worst.max(s.abs());
                }
            }
        }
    }
    Ok(worst)
}

pub fn jacobi_residual<L: SmoothLoop + ?Sized>(l: &L, a: &[f64]) -> Result<f64> {
    jacobi_residual_kind(l, FrameKind::Left, a)
}

/// `ω(V_a) = L⁻¹_{a*} V_a`, a vector at the identity.
pub fn canonical_form<L: SmoothLoop + ?Sized>(l: &L, v: &TangentVector) -> Result<TangentVector> {
    let r = frame_s(l, FrameKind::Left, &v.base)?;
    Ok(TangentVector::new(l.identity(), r.solve(&v.vec)?))
}

fn dist(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).fold(0.0, |m, (x, y)| m.max((x - y).abs()))
}

/// Residuals of `ω(L_{b*}v) = l_{(b,a)*} ω(v)` and `ω(R_{b*}v) = (Ad_b(a)⁻¹)_* ω(v)`
/// for `v` at `a`.
pub fn verify_ad_form_laws<L: SmoothLoop + ?Sized>(l: &L, b: &[f64], v: &TangentVector) -> Result<(f64, f64)> {
    let a = &v.base;
    let w = canonical_form(l, v)?.vec;

    let lhs_left = canonical_form(l, &pushforward_left(l, b, v)?)?.vec;
    let rhs_left = associator_differential(l, AssociatorKind::Left, b, a)?.mul_vec(&w);

    let lhs_right = canonical_form(l, &pushforward_right(l, b, v)?)?.vec;
    let rhs_right = ad_inverse_differential(l, b, a)?.mul_vec(&w);

    Ok((dist(&lhs_left, &rhs_left), dist(&lhs_right, &rhs_right)))
}

/// Residual of `L_{a*} X_b = l̂_{(a,b)*} X_{a·b}` for the left fundamental
/// field generated by `x_e`.
pub fn adjoint_associator_law_residual<L: SmoothLoop + ?Sized>(
    l: &L,
    a: &[f64],
    b: &[f64],
    x_e: &[f64],
) -> Result<f64> {
    let e = l.identity();
    let xb = pushforward_left(l, b, &TangentVector::new(e.clone(), x_e.to_vec()))?;
    let lhs = pushforward_left(l, a, &xb)?.vec;

    let ab = l.product_s(a, b)?;
    let xab = pushforward_left(l, &ab, &TangentVector::new(e, x_e.to_vec()))?.vec;
    let (ad, bd) = (lift_slice(a), lift_slice(b));
    let j = jacobian(&ab, |c| associator_s(l, AssociatorKind::Adjoint, &ad, &bd, c))?;
    Ok(dist(&lhs, &j.mul_vec(&xab)))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::zoo::{QcLoop, Qh2Loop, QhrLoop};

    #[test]
    fn frame_at_identity_is_identity() {
        let f = left_fundamental_basis(&QcLoop, &[0.0, 0.0]).unwrap();
        assert!(f.r.sub(&Mat::identity(2)).max_abs() < 1e-15);
    }

    #[test]
    fn qc_pushforward_at_origin() {
        let v = TangentVector::new(vec![0.0, 0.0], vec![1.0, 0.0]);
        let w = pushforward_left(&QcLoop, &[0.5, 0.0], &v).unwrap();
        assert!((w.vec[0] - 1.25).abs() < 1e-15 && w.vec[1].abs() < 1e-15);
    }

    #[test]
    fn qh2_frame_scale() {
        // Γ₁ = (1 − |η|²)∂_η  ⇒  real frame (1 − |η|²)·I
        let eta = [0.3, -0.4];
        let f = left_fundamental_basis(&Qh2Loop, &eta).unwrap();
        let s = 1.0 - 0.25;
        assert!(f.r.sub(&Mat::identity(2).scale(s)).max_abs() < 1e-14);
    }

    #[test]
    fn abelian_structure_vanishes() {
        let l = QhrLoop { k: 0.0 };
        let c = structure_functions(&l, &[0.1, 0.2, 0.3, -0.1]).unwrap();
        assert!(c.c.iter().all(|v| v.abs() < 1e-15));
        assert!(jacobi_residual(&l, &[0.1, 0.2, 0.3, -0.1]).unwrap() < 1e-15);
    }

    #[test]
    fn laws_hold_trivially_at_identity() {
        let v = TangentVector::new(vec![0.2, 0.1], vec![0.3, -1.0]);
        let (l, r) = verify_ad_form_laws(&QcLoop, &[0.0, 0.0], &v).unwrap();
        assert!(l < 1e-15 && r < 1e-15);
    }
}
