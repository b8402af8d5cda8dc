//! Connections on principal loop bundles in a local trivialization.
//!
//! Total-space coordinates are `z = (x, y)` with `x` in a base chart of
//! dimension `m` and `y` a fiber point of dimension `d`. The connection form is
//!
//! ```text
//! ω^i = (Ad⁻¹_y(e))^i_j A^j_μ(x) dx^μ + (R(y)⁻¹)^i_j dy^j
//! ```
//!
//! with `R` the left frame of the fiber. Horizontal fields are spanned by
//! `D_μ = ∂_μ − A^i_μ L̄_i`, `L̄_i` the right quasi-invariant generators.
//! Two-forms use the convention `dω(X, Y) = ½(∂_k ω_l − ∂_l ω_k) X^k Y^l`.

use std::f64::consts::PI;

use rand::{Rng, RngCore};

use crate::bundle::BundleAtlas;
use crate::error::{Error, Result};
use crate::linalg::Mat;
use crate::loop_core::{ad_inverse_differential, associator_differential, AssociatorKind, SmoothLoop};
use crate::scalar::{cst_slice, directional, jacobian, Scalar};
use crate::tangent::{frame_s, structure_functions_s, FrameKind};
use crate::zoo::LoopDescriptor;

/// `A^i_μ(x)` as a `d × m` matrix, evaluable on dual numbers.
pub trait GaugePotential: Send + Sync {
    fn fiber_dim(&self) -> usize;
    fn base_dim(&self) -> usize;
    fn eval<S: Scalar>(&self, x: &[S]) -> Result<Mat<S>>;
}

/// A loop-valued function of the base point, such as a transition function.
pub trait BaseMap: Send + Sync {
    fn eval<S: Scalar>(&self, x: &[S]) -> Result<Vec<S>>;
}

/// A real function on the total space.
pub trait TotalFunction: Send + Sync {
    fn eval<S: Scalar>(&self, z: &[S]) -> Result<S>;
}

fn check_dims(expected: usize, got: usize) -> Result<()> {
    if expected == got {
        Ok(())
    } else {
        Err(Error::DimensionMismatch { expected, got })
    }
}

/// Polynomial potential of degree at most two:
/// `A^i_μ = c0 + c1_k x^k + c2_{kl} x^k x^l`.
#[derive(Clone, Debug, PartialEq)]
pub struct PolynomialPotential {
    pub fiber_dim: usize,
    pub base_dim: usize,
    /// `[i][μ]`
    pub c0: Vec<f64>,
    /// `[i][μ][k]`
    pub c1: Vec<f64>,
    /// `[i][μ][k][l]`
    pub c2: Vec<f64>,
}

impl PolynomialPotential {
    pub fn constant(a: &Mat<f64>) -> Self {
        let (d, m) = (a.rows(), a.cols());
        PolynomialPotential {
            fiber_dim: d,
            base_dim: m,
            c0: a.as_slice().to_vec(),
            c1: vec![0.0; d * m * m],
            c2: vec![0.0; d * m * m * m],
        }
    }

    /// Coefficients uniform in `[-scale, scale]`; `degree` caps the terms kept.
    pub fn random(fiber_dim: usize, base_dim: usize, degree: u32, scale: f64, rng: &mut dyn RngCore) -> Self {
        let (d, m) = (fiber_dim, base_dim);
        let mut draw = |n: usize, keep: bool| -> Vec<f64> {
            (0..n).map(|_| if keep { rng.gen_range(-scale..scale) } else { 0.0 }).collect()
        };
        PolynomialPotential {
            fiber_dim: d,
            base_dim: m,
            c0: draw(d * m, true),
            c1: draw(d * m * m, degree >= 1),
            c2: draw(d * m * m * m, degree >= 2),
        }
    }

    /// `∂_μ A^i_ν` from the coefficients.
    pub fn derivative(&self, i: usize, nu: usize, mu: usize, x: &[f64]) -> f64 {
        let m = self.base_dim;
        let base = (i * m + nu) * m;
        let mut v = self.c1[base + mu];
        for l in 0..m {
            v += (self.c2[(base + mu) * m + l] + self.c2[(base + l) * m + mu]) * x[l];
        }
        v
    }

    /// `∂_μ A^i_ν − ∂_ν A^i_μ`, the abelian field strength.
    pub fn curl(&self, x: &[f64]) -> Vec<Mat<f64>> {
        let m = self.base_dim;
        (0..self.fiber_dim)
            .map(|i| Mat::from_fn(m, m, |mu, nu| self.derivative(i, nu, mu, x) - self.derivative(i, mu, nu, x)))
            .collect()
    }
}

impl GaugePotential for PolynomialPotential {
    fn fiber_dim(&self) -> usize {
        self.fiber_dim
    }
    fn base_dim(&self) -> usize {
        self.base_dim
    }
    fn eval<S: Scalar>(&self, x: &[S]) -> Result<Mat<S>> {
        let m = self.base_dim;
        check_dims(m, x.len())?;
        Ok(Mat::from_fn(self.fiber_dim, m, |i, mu| {
            let base = (i * m + mu) * m;
            let mut v = S::cst(self.c0[i * m + mu]);
            for k in 0..m {
                let mut inner = S::cst(self.c1[base + k]);
                for l in 0..m {
                    inner += x[l] * self.c2[(base + k) * m + l];
                }
                v += x[k] * inner;
            }
            v
        }))
    }
}

/// Trigonometric potential for angle charts:
/// `A^i_μ = a_{iμ} + b_{iμk} cos x^k + c_{iμk} sin x^k`.
#[derive(Clone, Debug, PartialEq)]
pub struct TrigPotential {
    pub fiber_dim: usize,
    pub base_dim: usize,
    pub a: Vec<f64>,
    pub b: Vec<f64>,
    pub c: Vec<f64>,
}

impl TrigPotential {
    pub fn random(fiber_dim: usize, base_dim: usize, scale: f64, rng: &mut dyn RngCore) -> Self {
        let (d, m) = (fiber_dim, base_dim);
        let mut draw = |n: usize| -> Vec<f64> { (0..n).map(|_| rng.gen_range(-scale..scale)).collect() };
        TrigPotential { fiber_dim: d, base_dim: m, a: draw(d * m), b: draw(d * m * m), c: draw(d * m * m) }
    }
}

impl GaugePotential for TrigPotential {
    fn fiber_dim(&self) -> usize {
        self.fiber_dim
    }
    fn base_dim(&self) -> usize {
        self.base_dim
    }
    fn eval<S: Scalar>(&self, x: &[S]) -> Result<Mat<S>> {
        let m = self.base_dim;
        check_dims(m, x.len())?;
        Ok(Mat::from_fn(self.fiber_dim, m, |i, mu| {
            let k0 = (i * m + mu) * m;
            let mut v = S::cst(self.a[i * m + mu]);
            for k in 0..m {
                v += x[k].cos() * self.b[k0 + k] + x[k].sin() * self.c[k0 + k];
            }
            v
        }))
    }
}

/// A connection in one chart: a potential tied to its fiber loop.
#[derive(Clone, Debug)]
pub struct LocalConnectionForm<P> {
    pub chart: String,
    pub potential: P,
    pub fiber: LoopDescriptor,
}

impl<P: GaugePotential> LocalConnectionForm<P> {
    pub fn new(chart: impl Into<String>, potential: P, fiber: LoopDescriptor) -> Result<Self> {
        check_dims(fiber.dim(), potential.fiber_dim())?;
        Ok(LocalConnectionForm { chart: chart.into(), potential, fiber })
    }

    pub fn base_dim(&self) -> usize {
        self.potential.base_dim()
    }

    pub fn fiber_dim(&self) -> usize {
        self.fiber.dim()
    }

    pub fn total_dim(&self) -> usize {
        self.base_dim() + self.fiber_dim()
    }

    fn split<'a, S>(&self, z: &'a [S]) -> (&'a [S], &'a [S]) {
        z.split_at(self.base_dim())
    }

    /// `(Ad⁻¹_y(e))_*`, the differential at `e` of `c ↦ y\(c·y)`.
    pub fn ad_inverse_at<S: Scalar>(&self, y: &[S]) -> Result<Mat<S>> {
        let e: Vec<S> = cst_slice(&self.fiber.identity());
        ad_inverse_differential(&self.fiber, y, &e)
    }

    /// `ω` at `z` as a `d × (m + d)` matrix.
    pub fn omega_s<S: Scalar>(&self, z: &[S]) -> Result<Mat<S>> {
        check_dims(self.total_dim(), z.len())?;
        let (m, d) = (self.base_dim(), self.fiber_dim());
        let (x, y) = self.split(z);
        let ma = self.ad_inverse_at(y)?.mul(&self.potential.eval(x)?);
        let rinv = frame_s(&self.fiber, FrameKind::Left, y)?.inverse()?;
        Ok(Mat::from_fn(d, m + d, |i, k| if k < m { ma[(i, k)] } else { rinv[(i, k - m)] }))
    }

    /// Fundamental vertical vector `(0, R(y)u)` generated by `u ∈ T_e`.
    pub fn vertical_lift<S: Scalar>(&self, y: &[S], u: &[S]) -> Result<Vec<S>> {
        let r = frame_s(&self.fiber, FrameKind::Left, y)?;
        let mut v = vec![S::zero(); self.base_dim()];
        v.extend(r.mul_vec(u));
        Ok(v)
    }

    /// `h = I − V ω`, with `V` the vertical lift; `h·Z` is the horizontal part of `Z`.
    pub fn horizontal_projector_s<S: Scalar>(&self, z: &[S]) -> Result<Mat<S>> {
        let (m, n) = (self.base_dim(), self.total_dim());
        let (_, y) = self.split(z);
        let om = self.omega_s(z)?;
        let r = frame_s(&self.fiber, FrameKind::Left, y)?;
        let v = Mat::from_fn(n, self.fiber_dim(), |k, j| if k < m { S::zero() } else { r[(k - m, j)] });
        Ok(Mat::identity(n).sub(&v.mul(&om)))
    }

    /// `D_μ` at `z` as a total-space vector `(e_μ, −L̄(y) A(x) e_μ)`.
    pub fn covariant_field_s<S: Scalar>(&self, z: &[S], coeffs: &[S]) -> Result<Vec<S>> {
        let (x, y) = self.split(z);
        let a = self.potential.eval(x)?;
        let rbar = frame_s(&self.fiber, FrameKind::Right, y)?;
        let fib = rbar.mul_vec(&a.mul_vec(coeffs));
        let mut v = coeffs.to_vec();
        v.extend(fib.into_iter().map(|t| -t));
        Ok(v)
    }

    /// `W_i[k][l] = ½(∂_k ω^i_l − ∂_l ω^i_k)`, one antisymmetric matrix per fiber index.
    pub fn d_omega_s<S: Scalar>(&self, z: &[S]) -> Result<Vec<Mat<S>>> {
        let (n, d) = (self.total_dim(), self.fiber_dim());
        // jac[(i*n + l, k)] = ∂_k ω^i_l
        let jac = jacobian(z, |w| Ok(self.omega_s(w)?.as_slice().to_vec()))?;
        Ok((0..d)
            .map(|i| Mat::from_fn(n, n, |k, l| (jac[(i * n + l, k)] - jac[(i * n + k, l)]) * 0.5))
            .collect())
    }

    /// The curvature two-form `Ω(U, V) = dω(hU, hV)` as matrices `hᵀ W_i h`.
    pub fn omega_curvature_s<S: Scalar>(&self, z: &[S]) -> Result<Vec<Mat<S>>> {
        let h = self.horizontal_projector_s(z)?;
        let ht = h.transpose();
        Ok(self.d_omega_s(z)?.iter().map(|w| ht.mul(w).mul(&h)).collect())
    }
}

fn concat(x: &[f64], y: &[f64]) -> Vec<f64> {
    let mut z = x.to_vec();
    z.extend_from_slice(y);
    z
}

fn bilinear<S: Scalar>(m: &Mat<S>, u: &[S], v: &[S]) -> S {
    let mv = m.mul_vec(v);
    u.iter().zip(&mv).fold(S::zero(), |acc, (&a, &b)| acc + a * b)
}

fn max_abs(v: &[f64]) -> f64 {
    v.iter().fold(0.0, |m, x| m.max(x.abs()))
}

fn check_fiber<P: GaugePotential>(form: &LocalConnectionForm<P>, x: &[f64], y: &[f64]) -> Result<()> {
    check_dims(form.base_dim(), x.len())?;
    check_dims(form.fiber_dim(), y.len())?;
    if !form.fiber.in_domain(y) {
        return Err(Error::OutOfDomain { loop_name: form.fiber.name() });
    }
    Ok(())
}

/// `L̄_i f = (R̄)^j_i ∂f/∂y^j`.
pub struct RightGenerator<'a, F> {
    pub fiber: &'a LoopDescriptor,
    pub base_dim: usize,
    pub index: usize,
    pub f: &'a F,
}

impl<F: TotalFunction> TotalFunction for RightGenerator<'_, F> {
    fn eval<S: Scalar>(&self, z: &[S]) -> Result<S> {
        let m = self.base_dim;
        let g = jacobian(z, |w| Ok(vec![self.f.eval(w)?]))?;
        let rbar = frame_s(self.fiber, FrameKind::Right, &z[m..])?;
        let mut v = S::zero();
        for j in 0..self.fiber.dim() {
            v += rbar[(j, self.index)] * g[(0, m + j)];
        }
        Ok(v)
    }
}

/// `D_μ f = ∂_μ f − A^i_μ(x) L̄_i f`, itself a total-space function so that
/// it can be nested.
pub struct Covariant<'a, P, F> {
    pub form: &'a LocalConnectionForm<P>,
    pub mu: usize,
    pub f: &'a F,
}

impl<P: GaugePotential, F: TotalFunction> TotalFunction for Covariant<'_, P, F> {
    fn eval<S: Scalar>(&self, z: &[S]) -> Result<S> {
        let (x, y) = self.form.split(z);
        let m = self.form.base_dim();
        let g = jacobian(z, |w| Ok(vec![self.f.eval(w)?]))?;
        let a = self.form.potential.eval(x)?;
        let rbar = frame_s(&self.form.fiber, FrameKind::Right, y)?;
        let mut v = g[(0, self.mu)];
        for i in 0..self.form.fiber_dim() {
            let mut li = S::zero();
            for j in 0..self.form.fiber_dim() {
                li += rbar[(j, i)] * g[(0, m + j)];
            }
            v -= a[(i, self.mu)] * li;
        }
        Ok(v)
    }
}

pub fn covariant_derivative_apply<P: GaugePotential, F: TotalFunction>(
    form: &LocalConnectionForm<P>,
    mu: usize,
    f: &F,
    x: &[f64],
    y: &[f64],
) -> Result<f64> {
    check_fiber(form, x, y)?;
    Covariant { form, mu, f }.eval(&concat(x, y))
}

/// `F^i_{μν}` at one point; `f[i]` is an `m × m` matrix.
#[derive(Clone, Debug, PartialEq)]
pub struct CurvatureField {
    pub base: Vec<f64>,
    pub fiber: Vec<f64>,
    pub f: Vec<Mat<f64>>,
}

impl CurvatureField {
    pub fn get(&self, i: usize, mu: usize, nu: usize) -> f64 {
        self.f[i][(mu, nu)]
    }

    pub fn antisymmetry_defect(&self) -> f64 {
        self.f.iter().fold(0.0, |w, m| w.max(m.add(&m.transpose()).max_abs()))
    }
}

/// `F^i_{μν} = ∂_μ A^i_ν − ∂_ν A^i_μ − A^j_μ A^p_ν C̄^i_{jp}(y)` with `C̄` the
/// structure functions of the right generators; the quadratic term uses the
/// antisymmetric part of `C̄` so that `F` is antisymmetric by construction.
pub fn curvature_s<P: GaugePotential, S: Scalar>(form: &LocalConnectionForm<P>, x: &[S], y: &[S]) -> Result<Vec<Mat<S>>> {
    let (m, d) = (form.base_dim(), form.fiber_dim());
    // da[(i*m + ν, μ)] = ∂_μ A^i_ν
    let da = jacobian(x, |w| Ok(form.potential.eval(w)?.as_slice().to_vec()))?;
    let a = form.potential.eval(x)?;
    let c = structure_functions_s(&form.fiber, FrameKind::Right, y)?;
    let cc = |i: usize, j: usize, p: usize| (c[(i * d + j) * d + p] - c[(i * d + p) * d + j]) * 0.5;
    let upper = |i: usize, mu: usize, nu: usize| {
        let mut v = da[(i * m + nu, mu)] - da[(i * m + mu, nu)];
        for j in 0..d {
            for p in 0..d {
                v -= a[(j, mu)] * a[(p, nu)] * cc(i, j, p);
            }
        }
        v
    };
    // fill μ < ν and mirror, so the antisymmetry holds bit for bit
    Ok((0..d)
        .map(|i| {
            Mat::from_fn(m, m, |mu, nu| match mu.cmp(&nu) {
                std::cmp::Ordering::Less => upper(i, mu, nu),
                std::cmp::Ordering::Greater => -upper(i, nu, mu),
                std::cmp::Ordering::Equal => S::zero(),
            })
        })
        .collect())
}

pub fn curvature<P: GaugePotential>(form: &LocalConnectionForm<P>, x: &[f64], y: &[f64]) -> Result<CurvatureField> {
    check_fiber(form, x, y)?;
    Ok(CurvatureField { base: x.to_vec(), fiber: y.to_vec(), f: curvature_s(form, x, y)? })
}

/// `|[D_μ, D_ν] f + F^i_{μν} L̄_i f|` at `(x, y)`.
pub fn commutator_residual<P: GaugePotential, F: TotalFunction>(
    form: &LocalConnectionForm<P>,
    mu: usize,
    nu: usize,
    f: &F,
    x: &[f64],
    y: &[f64],
) -> Result<f64> {
    check_fiber(form, x, y)?;
    let z = concat(x, y);
    let dnu = Covariant { form, mu: nu, f };
    let dmu = Covariant { form, mu, f };
    let mn = Covariant { form, mu, f: &dnu }.eval(&z)?;
    let nm = Covariant { form, mu: nu, f: &dmu }.eval(&z)?;
    let curv = curvature_s(form, x, y)?;
    let mut v = mn - nm;
    for (i, fi) in curv.iter().enumerate() {
        let li = RightGenerator { fiber: &form.fiber, base_dim: form.base_dim(), index: i, f }.eval(&z)?;
        v += fi[(mu, nu)] * li;
    }
    Ok(v.abs())
}

/// `|ω(D_μ)|` at `(x, y)`: the `dx` part uses `(Ad⁻¹_y(e))_*` and the `dy`
/// part the inverse left frame, applied to `D_μ` built from the right frame.
pub fn omega_annihilates_d_residual<P: GaugePotential>(
    form: &LocalConnectionForm<P>,
    x: &[f64],
    y: &[f64],
    mu: usize,
) -> Result<f64> {
    check_fiber(form, x, y)?;
    let z = concat(x, y);
    let mut e_mu = vec![0.0; form.base_dim()];
    e_mu[mu] = 1.0;
    let d = form.covariant_field_s(&z, &e_mu)?;
    Ok(max_abs(&form.omega_s(&z)?.mul_vec(&d)))
}

/// `ω(X)` for a total-space vector at `(x, y)`.
pub fn omega_apply<P: GaugePotential>(form: &LocalConnectionForm<P>, x: &[f64], y: &[f64], v: &[f64]) -> Result<Vec<f64>> {
    check_fiber(form, x, y)?;
    check_dims(form.total_dim(), v.len())?;
    Ok(form.omega_s(&concat(x, y))?.mul_vec(v))
}

pub fn horizontal_part<P: GaugePotential>(form: &LocalConnectionForm<P>, x: &[f64], y: &[f64], v: &[f64]) -> Result<Vec<f64>> {
    check_fiber(form, x, y)?;
    check_dims(form.total_dim(), v.len())?;
    Ok(form.horizontal_projector_s(&concat(x, y))?.mul_vec(v))
}

/// `[u, v]^p = C^p_{ij}(y) u^i v^j` with the left structure functions at `y`.
fn quasialgebra_bracket<P: GaugePotential>(form: &LocalConnectionForm<P>, y: &[f64], u: &[f64], v: &[f64]) -> Result<Vec<f64>> {
    let d = form.fiber_dim();
    let c = structure_functions_s(&form.fiber, FrameKind::Left, y)?;
    Ok((0..d)
        .map(|p| {
            let mut s = 0.0;
            for i in 0..d {
                for j in 0..d {
                    s += c[(p * d + i) * d + j] * u[i] * v[j];
                }
            }
            s
        })
        .collect())
}

/// Componentwise max of `dω(X, Y) + ½[ω(X), ω(Y)] − Ω(X, Y)`.
pub fn structure_equation_residual<P: GaugePotential>(
    form: &LocalConnectionForm<P>,
    x: &[f64],
    y: &[f64],
    xv: &[f64],
    yv: &[f64],
) -> Result<f64> {
    check_fiber(form, x, y)?;
    check_dims(form.total_dim(), xv.len())?;
    check_dims(form.total_dim(), yv.len())?;
    let z = concat(x, y);
    let om = form.omega_s(&z)?;
    let w = form.d_omega_s(&z)?;
    let curv = form.omega_curvature_s(&z)?;
    let br = quasialgebra_bracket(form, y, &om.mul_vec(xv), &om.mul_vec(yv))?;
    let res: Vec<f64> = (0..form.fiber_dim())
        .map(|i| bilinear(&w[i], xv, yv) + 0.5 * br[i] - bilinear(&curv[i], xv, yv))
        .collect();
    Ok(max_abs(&res))
}

/// `|ω([X, Y]) + 2 dω(X, Y)|` for the horizontal fields `X = X^μ D_μ`,
/// `Y = Y^μ D_μ` with constant coefficients; the bracket is the vector-field
/// commutator of the two fields.
pub fn horizontal_lemma_residual<P: GaugePotential>(
    form: &LocalConnectionForm<P>,
    x: &[f64],
    y: &[f64],
    xc: &[f64],
    yc: &[f64],
) -> Result<f64> {
    check_fiber(form, x, y)?;
    check_dims(form.base_dim(), xc.len())?;
    check_dims(form.base_dim(), yc.len())?;
    let z = concat(x, y);
    let xf = form.covariant_field_s(&z, xc)?;
    let yf = form.covariant_field_s(&z, yc)?;
    let lift = |c: &[f64]| -> Vec<crate::scalar::Dual<f64>> { cst_slice(c) };
    let (xcd, ycd) = (lift(xc), lift(yc));
    // [X, Y] = ∂_X Y − ∂_Y X
    let dy_x = directional(&z, &xf, |w| form.covariant_field_s(w, &ycd))?;
    let dx_y = directional(&z, &yf, |w| form.covariant_field_s(w, &xcd))?;
    let bracket: Vec<f64> = dy_x.iter().zip(&dx_y).map(|(a, b)| a - b).collect();
    let om = form.omega_s(&z)?.mul_vec(&bracket);
    let w = form.d_omega_s(&z)?;
    let res: Vec<f64> = (0..form.fiber_dim()).map(|i| om[i] + 2.0 * bilinear(&w[i], &xf, &yf)).collect();
    Ok(max_abs(&res))
}

/// `max |2Ω(D_μ, D_ν) − (Ad⁻¹_y(e))_* F_{μν}|`.
pub fn curvature_consistency_residual<P: GaugePotential>(form: &LocalConnectionForm<P>, x: &[f64], y: &[f64]) -> Result<f64> {
    check_fiber(form, x, y)?;
    let (m, d) = (form.base_dim(), form.fiber_dim());
    let z = concat(x, y);
    let curv = form.omega_curvature_s(&z)?;
    let f = curvature_s(form, x, y)?;
    let ad = form.ad_inverse_at(y)?;
    let fields: Vec<Vec<f64>> = (0..m)
        .map(|mu| {
            let mut e = vec![0.0; m];
            e[mu] = 1.0;
            form.covariant_field_s(&z, &e)
        })
        .collect::<Result<_>>()?;
    let mut worst = 0.0f64;
    for mu in 0..m {
        for nu in 0..m {
            let fmn: Vec<f64> = (0..d).map(|j| f[j][(mu, nu)]).collect();
            let rhs = ad.mul_vec(&fmn);
            for i in 0..d {
                let lhs = 2.0 * bilinear(&curv[i], &fields[mu], &fields[nu]);
                worst = worst.max((lhs - rhs[i]).abs());
            }
        }
    }
    Ok(worst)
}

/// Residuals of the structure equation split by case.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct StructureCases {
    /// Horizontal pair: the lemma `ω([X, Y]) = −2Ω(X, Y)` together with the
    /// structure equation itself.
    pub horizontal: f64,
    /// Two fundamental vertical vectors.
    pub vertical: f64,
    /// Horizontal against fundamental vertical.
    pub mixed: f64,
}

/// Evaluates the three cases from base directions `bx`, `by` (length `m`)
/// and Lie-algebra vectors `u`, `v` (length `d`).
pub fn structure_equation_cases<P: GaugePotential>(
    form: &LocalConnectionForm<P>,
    x: &[f64],
    y: &[f64],
    bx: &[f64],
    by: &[f64],
    u: &[f64],
    v: &[f64],
) -> Result<StructureCases> {
    check_fiber(form, x, y)?;
    let z = concat(x, y);
    let hx = form.covariant_field_s(&z, bx)?;
    let hy = form.covariant_field_s(&z, by)?;
    let vu = form.vertical_lift(y, u)?;
    let vv = form.vertical_lift(y, v)?;
    let horizontal = horizontal_lemma_residual(form, x, y, bx, by)?.max(structure_equation_residual(form, x, y, &hx, &hy)?);
    Ok(StructureCases {
        horizontal,
        vertical: structure_equation_residual(form, x, y, &vu, &vv)?,
        mixed: structure_equation_residual(form, x, y, &hx, &vv)?,
    })
}

/// `|dΩ(hX, hY, hZ)|` with `dΩ(U, V, W) = ⅓(∂_U Ω(V, W) − ∂_V Ω(U, W) + ∂_W Ω(U, V))`
/// for constant-coefficient `U, V, W`.
pub fn bianchi_residual<P: GaugePotential>(
    form: &LocalConnectionForm<P>,
    x: &[f64],
    y: &[f64],
    xv: &[f64],
    yv: &[f64],
    zv: &[f64],
) -> Result<f64> {
    check_fiber(form, x, y)?;
    let n = form.total_dim();
    for v in [xv, yv, zv] {
        check_dims(n, v.len())?;
    }
    let z = concat(x, y);
    let h = form.horizontal_projector_s(&z)?;
    let (u, v, w) = (h.mul_vec(xv), h.mul_vec(yv), h.mul_vec(zv));
    let flat = |p: &[crate::scalar::Dual<f64>]| -> Result<Vec<crate::scalar::Dual<f64>>> {
        Ok(form.omega_curvature_s(p)?.iter().flat_map(|m| m.as_slice().to_vec()).collect())
    };
    let du = directional(&z, &u, flat)?;
    let dv = directional(&z, &v, flat)?;
    let dw = directional(&z, &w, flat)?;
    let eval = |flat: &[f64], i: usize, a: &[f64], b: &[f64]| {
        let m = Mat::from_rows(n, n, flat[i * n * n..(i + 1) * n * n].to_vec());
        bilinear(&m, a, b)
    };
    let res: Vec<f64> = (0..form.fiber_dim())
        .map(|i| (eval(&du, i, &v, &w) - eval(&dv, i, &u, &w) + eval(&dw, i, &u, &v)) / 3.0)
        .collect();
    Ok(max_abs(&res))
}

/// The potential of `ω_β = Ad⁻¹_{q_{αβ}}(q_{βα})_* ω_α + l_{(q_{βα}, q_{αβ})*} θ_{αβ}`,
/// `θ_{αβ} = R(q_{αβ})⁻¹ dq_{αβ}`.
#[derive(Clone, Debug)]
pub struct TransformedPotential<P, Q1, Q2> {
    pub inner: P,
    pub q_map: Q1,
    pub q_back: Q2,
    pub fiber: LoopDescriptor,
}

impl<P: GaugePotential, Q1: BaseMap, Q2: BaseMap> GaugePotential for TransformedPotential<P, Q1, Q2> {
    fn fiber_dim(&self) -> usize {
        self.inner.fiber_dim()
    }
    fn base_dim(&self) -> usize {
        self.inner.base_dim()
    }
    fn eval<S: Scalar>(&self, x: &[S]) -> Result<Mat<S>> {
        let a = self.inner.eval(x)?;
        let q_ab = self.q_map.eval(x)?;
        let q_ba = self.q_back.eval(x)?;
        let rot = ad_inverse_differential(&self.fiber, &q_ab, &q_ba)?;
        let assoc = associator_differential(&self.fiber, AssociatorKind::Left, &q_ba, &q_ab)?;
        let dq = jacobian(x, |w| self.q_map.eval(w))?;
        let theta = frame_s(&self.fiber, FrameKind::Left, &q_ab)?.inverse()?.mul(&dq);
        Ok(rot.mul(&a).add(&assoc.mul(&theta)))
    }
}

pub fn gauge_transform<P, Q1, Q2>(
    form: &LocalConnectionForm<P>,
    beta: &str,
    q_map: Q1,
    q_back: Q2,
) -> LocalConnectionForm<TransformedPotential<P, Q1, Q2>>
where
    P: GaugePotential + Clone,
    Q1: BaseMap,
    Q2: BaseMap,
{
    LocalConnectionForm {
        chart: beta.to_string(),
        potential: TransformedPotential {
            inner: form.potential.clone(),
            q_map,
            q_back,
            fiber: form.fiber,
        },
        fiber: form.fiber,
    }
}

/// `max |F_β − Ad⁻¹_{q_{αβ}}(q_{βα})_* F_α|` at `(x, y)`, with `F_β` the
/// curvature of the gauge-transformed form.
pub fn curvature_gauge_residual<P, Q1, Q2>(
    atlas: &BundleAtlas,
    form: &LocalConnectionForm<P>,
    beta: &str,
    q_map: Q1,
    q_back: Q2,
    x: &[f64],
    y: &[f64],
) -> Result<f64>
where
    P: GaugePotential + Clone,
    Q1: BaseMap,
    Q2: BaseMap,
{
    if !(atlas.chart(&form.chart)?.contains(x) && atlas.chart(beta)?.contains(x)) {
        return Err(Error::NotInOverlap { from: form.chart.clone(), to: beta.to_string() });
    }
    let q_ab = q_map.eval(x)?;
    let q_ba = q_back.eval(x)?;
    let rot = ad_inverse_differential(&form.fiber, &q_ab, &q_ba)?;
    let f_alpha = curvature(form, x, y)?;
    let f_beta = curvature(&gauge_transform(form, beta, q_map, q_back), x, y)?;
    let (m, d) = (form.base_dim(), form.fiber_dim());
    let mut worst = 0.0f64;
    for mu in 0..m {
        for nu in 0..m {
            let fa: Vec<f64> = (0..d).map(|j| f_alpha.get(j, mu, nu)).collect();
            let moved = rot.mul_vec(&fa);
            for i in 0..d {
                worst = worst.max((f_beta.get(i, mu, nu) - moved[i]).abs());
            }
        }
    }
    Ok(worst)
}

/// A fixed loop element.
#[derive(Clone, Debug, PartialEq)]
pub struct ConstantMap(pub Vec<f64>);

impl BaseMap for ConstantMap {
    fn eval<S: Scalar>(&self, _x: &[S]) -> Result<Vec<S>> {
        Ok(cst_slice(&self.0))
    }
}

/// `±e^{iφ} tan(n s/2)` on `(θ, φ)`: the winding transition and its inverse.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct WindingMap {
    pub n: i32,
    pub spread: f64,
    pub inverse: bool,
}

impl BaseMap for WindingMap {
    fn eval<S: Scalar>(&self, x: &[S]) -> Result<Vec<S>> {
        check_dims(2, x.len())?;
        let r = (self.n as f64 * self.spread / 2.0).tan();
        let r = if self.inverse { -r } else { r };
        Ok(vec![x[1].cos() * r, x[1].sin() * r])
    }
}

/// A section of the three-sphere bundle over the circle, `ζ₋(ψ) = ρ e^{ikψ}`,
/// with the transition `e^{i arg ζ₋} = e^{ikψ}` along it; `inverse` gives `−e^{ikψ}`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct CircleSectionMap {
    pub k: f64,
    pub inverse: bool,
}

impl BaseMap for CircleSectionMap {
    fn eval<S: Scalar>(&self, x: &[S]) -> Result<Vec<S>> {
        check_dims(1, x.len())?;
        let s = if self.inverse { -1.0 } else { 1.0 };
        let t = x[0] * self.k;
        Ok(vec![t.cos() * s, t.sin() * s])
    }
}

/// Partition-of-unity weights on a circle chart pair covering `(−π, π)` and `(0, 2π)`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum PartitionWeight {
    One,
    /// `cos²(ψ/2)`, vanishing at `ψ = π`.
    CosSquaredHalf,
    /// `sin²(ψ/2)`, vanishing at `ψ = 0`.
    SinSquaredHalf,
}

impl PartitionWeight {
    pub fn eval<S: Scalar>(&self, x: &[S]) -> S {
        match self {
            PartitionWeight::One => S::one(),
            PartitionWeight::CosSquaredHalf => (x[0] * 0.5).cos().powi(2),
            PartitionWeight::SinSquaredHalf => (x[0] * 0.5).sin().powi(2),
        }
    }
}

/// `Σ_α λ_α(x) A_α(x)`.
#[derive(Clone, Debug)]
pub struct GluedPotential<P> {
    pub parts: Vec<(PartitionWeight, P)>,
}

impl<P: GaugePotential> GaugePotential for GluedPotential<P> {
    fn fiber_dim(&self) -> usize {
        self.parts[0].1.fiber_dim()
    }
    fn base_dim(&self) -> usize {
        self.parts[0].1.base_dim()
    }
    fn eval<S: Scalar>(&self, x: &[S]) -> Result<Mat<S>> {
        let mut acc = Mat::zeros(self.fiber_dim(), self.base_dim());
        for (w, p) in &self.parts {
            acc = acc.add(&p.eval(x)?.scale(w.eval(x)));
        }
        Ok(acc)
    }
}

pub const PARTITION_TOL: f64 = 1e-10;

/// Glues local forms with a partition of unity checked on `samples`.
///
/// All local potentials must already be written in one common trivialization
/// (bring them over with [`gauge_transform`] first). Returns the glued form
/// restricted to each chart of the partition.
pub fn glue_connections<P: GaugePotential + Clone>(
    atlas: &BundleAtlas,
    partition: &[(String, PartitionWeight)],
    local_forms: &[LocalConnectionForm<P>],
    samples: &[Vec<f64>],
) -> Result<Vec<LocalConnectionForm<GluedPotential<P>>>> {
    if partition.is_empty() || partition.len() != local_forms.len() {
        return Err(Error::PartitionInvalid(format!(
            "{} weights for {} local forms",
            partition.len(),
            local_forms.len()
        )));
    }
    for ((chart, _), form) in partition.iter().zip(local_forms) {
        atlas.chart(chart)?;
        if &form.chart != chart {
            return Err(Error::PartitionInvalid(format!("form for chart {} paired with weight for {chart}", form.chart)));
        }
    }
    for x in samples {
        let total: f64 = partition.iter().map(|(_, w)| w.eval(x)).sum();
        if (total - 1.0).abs() > PARTITION_TOL {
            return Err(Error::PartitionInvalid(format!("weights sum to {total} at {x:?}")));
        }
        for (chart, w) in partition {
            if !atlas.chart(chart)?.contains(x) && w.eval(x).abs() > PARTITION_TOL {
                return Err(Error::PartitionInvalid(format!("weight for {chart} is nonzero outside its chart at {x:?}")));
            }
        }
    }
    let glued = GluedPotential { parts: partition.iter().map(|(_, w)| *w).zip(local_forms.iter().map(|f| f.potential.clone())).collect() };
    let mut charts: Vec<&String> = partition.iter().map(|(c, _)| c).collect();
    charts.dedup();
    Ok(charts
        .into_iter()
        .map(|c| LocalConnectionForm { chart: c.clone(), potential: glued.clone(), fiber: local_forms[0].fiber })
        .collect())
}

/// `|ω(ver u) − u|`: condition (i) of a connection.
pub fn vertical_reproduction_residual<P: GaugePotential>(form: &LocalConnectionForm<P>, x: &[f64], y: &[f64], u: &[f64]) -> Result<f64> {
    let v = form.vertical_lift(y, u)?;
    let w = omega_apply(form, x, y, &v)?;
    Ok(w.iter().zip(u).fold(0.0, |m, (a, b)| m.max((a - b).abs())))
}

/// `|ω_{(x, y·a)}(R_{a*}Z) − Ad⁻¹_a(y)_* ω_{(x, y)}(Z)|`: condition (ii),
/// reported rather than asserted.
pub fn right_invariance_defect<P: GaugePotential>(
    form: &LocalConnectionForm<P>,
    x: &[f64],
    y: &[f64],
    a: &[f64],
    zv: &[f64],
) -> Result<f64> {
    check_fiber(form, x, y)?;
    let l = &form.fiber;
    let m = form.base_dim();
    let ya = l.product_s(y, a)?;
    let ad = crate::scalar::lift_slice(a);
    let jr = jacobian(y, |w| l.product_s(w, &ad))?;
    let mut pushed = zv[..m].to_vec();
    pushed.extend(jr.mul_vec(&zv[m..]));
    let lhs = omega_apply(form, x, &ya, &pushed)?;
    let rhs = ad_inverse_differential(l, a, y)?.mul_vec(&omega_apply(form, x, y, zv)?);
    Ok(lhs.iter().zip(&rhs).fold(0.0, |w, (p, q)| w.max((p - q).abs())))
}

/// Cubic polynomial test function on the total space.
#[derive(Clone, Debug, PartialEq)]
pub struct PolynomialFunction {
    pub n: usize,
    pub c0: f64,
    pub c1: Vec<f64>,
    pub c2: Vec<f64>,
    pub c3: Vec<f64>,
}

impl PolynomialFunction {
    pub fn random(n: usize, scale: f64, rng: &mut dyn RngCore) -> Self {
        let mut draw = |k: usize| -> Vec<f64> { (0..k).map(|_| rng.gen_range(-scale..scale)).collect() };
        PolynomialFunction { n, c0: draw(1)[0], c1: draw(n), c2: draw(n * n), c3: draw(n * n * n) }
    }

    /// `c·z`, a linear function.
    pub fn linear(c: Vec<f64>) -> Self {
        let n = c.len();
        PolynomialFunction { n, c0: 0.0, c1: c, c2: vec![0.0; n * n], c3: vec![0.0; n * n * n] }
    }
}

impl TotalFunction for PolynomialFunction {
    fn eval<S: Scalar>(&self, z: &[S]) -> Result<S> {
        let n = self.n;
        check_dims(n, z.len())?;
        let mut v = S::cst(self.c0);
        for i in 0..n {
            let mut a = S::cst(self.c1[i]);
            for j in 0..n {
                let mut b = S::cst(self.c2[i * n + j]);
                for k in 0..n {
                    b += z[k] * self.c3[(i * n + j) * n + k];
                }
                a += z[j] * b;
            }
            v += z[i] * a;
        }
        Ok(v)
    }
}

/// A point of the open circle chart `(−π, π)` away from its ends.
pub fn sample_angle(rng: &mut dyn RngCore) -> f64 {
    rng.gen_range(-PI + 0.1..PI - 0.1)
}
