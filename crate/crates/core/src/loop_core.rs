//! The smooth-loop interface and the maps built from it: translations,
//! divisions, the three associators and the Ad-map.
//!
//! Every map is generic over [`Scalar`] so the same composition can be
//! differentiated with nested duals.

use std::ops::Deref;

use rand::RngCore;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::linalg::Mat;
use crate::report::{Case, VerificationReport};
use crate::scalar::{cst_slice, jacobian, lift_slice, re_slice, Dual, Scalar};

/// Denominators smaller than this are treated as singular.
pub const SINGULAR_GUARD: f64 = 1e-9;
/// Newton stopping tolerance for divisions without a closed form.
pub const NEWTON_TOL: f64 = 1e-13;
pub const NEWTON_MAX_ITER: usize = 50;
/// Relative tolerance for exact identities (round trips, identity axiom).
pub const TOL_EXACT: f64 = 1e-11;

/// Coordinates of a loop element in its chart.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct LoopPoint(pub Vec<f64>);

impl LoopPoint {
    pub fn new(coords: Vec<f64>) -> Self {
        LoopPoint(coords)
    }
    pub fn coords(&self) -> &[f64] {
        &self.0
    }
}

impl Deref for LoopPoint {
    type Target = [f64];
    fn deref(&self) -> &[f64] {
        &self.0
    }
}

impl From<Vec<f64>> for LoopPoint {
    fn from(v: Vec<f64>) -> Self {
        LoopPoint(v)
    }
}

/// Which part of the chart a sampler draws from.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Region {
    /// The whole chart domain used for algebraic sweeps.
    Full,
    /// A neighbourhood of the identity where frames are well conditioned.
    Local,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum AssociatorKind {
    Left,
    Adjoint,
    Right,
}

pub trait SmoothLoop: Send + Sync {
    fn name(&self) -> String;
    fn dim(&self) -> usize;

    fn identity(&self) -> LoopPoint {
        LoopPoint(vec![0.0; self.dim()])
    }

    fn in_domain(&self, a: &[f64]) -> bool;

    fn product_s<S: Scalar>(&self, a: &[S], b: &[S]) -> Result<Vec<S>>;

    /// `x` with `a·x = b`.
    fn left_div_s<S: Scalar>(&self, a: &[S], b: &[S]) -> Result<Vec<S>> {
        newton_div(self, Side::Left, a, b)
    }

    /// `y` with `y·a = b`.
    fn right_div_s<S: Scalar>(&self, b: &[S], a: &[S]) -> Result<Vec<S>> {
        newton_div(self, Side::Right, a, b)
    }

    /// Reduces a coordinate difference to its canonical representative.
    fn wrap_diff<S: Scalar>(&self, _d: &mut [S]) {}

    fn sample_point(&self, rng: &mut dyn RngCore, region: Region) -> LoopPoint;

    /// Rejects pairs too close to a singular set of the closed forms.
    fn pair_ok(&self, _a: &[f64], _b: &[f64]) -> bool {
        true
    }

    fn coord_distance(&self, a: &[f64], b: &[f64]) -> f64 {
        let mut d: Vec<f64> = a.iter().zip(b).map(|(x, y)| x - y).collect();
        self.wrap_diff(&mut d);
        d.iter().fold(0.0, |m, v| m.max(v.abs()))
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Side {
    Left,
    Right,
}

fn max_norm(v: &[f64]) -> f64 {
    v.iter().fold(0.0, |m, x| m.max(x.abs()))
}

/// Residual of the division equation at `x`: `a·x − b` or `x·a − b`.
fn div_residual<L, T>(l: &L, side: Side, a: &[T], b: &[T], x: &[T]) -> Result<Vec<T>>
where
    L: SmoothLoop + ?Sized,
    T: Scalar,
{
    let p = match side {
        Side::Left => l.product_s(a, x)?,
        Side::Right => l.product_s(x, a)?,
    };
    let mut r: Vec<T> = p.iter().zip(b).map(|(&u, &v)| u - v).collect();
    l.wrap_diff(&mut r);
    Ok(r)
}

/// Number of Newton sweeps needed in `S` to make all dual parts exact,
/// given that the real part is already converged.
fn polish_sweeps<S: Scalar>() -> usize {
    match S::DEPTH {
        0 => 0,
        // each sweep doubles the order of correct infinitesimal terms
        d => (u32::BITS - d.leading_zeros()) as usize + 1,
    }
}

/// Solves the division equation by damped Newton in `f64`, then refines
/// in `S` so that derivatives carried by `a` and `b` are exact.
pub fn newton_div<L, S>(l: &L, side: Side, a: &[S], b: &[S]) -> Result<Vec<S>>
where
    L: SmoothLoop + ?Sized,
    S: Scalar,
{
    let a0 = re_slice(a);
    let b0 = re_slice(b);
    let x0 = newton_f64(l, side, &a0, &b0, l.identity().0)?;
    newton_polish(l, side, a, b, &x0)
}

/// Real-valued damped Newton with backtracking, started from `start`.
pub fn newton_f64<L>(l: &L, side: Side, a: &[f64], b: &[f64], start: Vec<f64>) -> Result<Vec<f64>>
where
    L: SmoothLoop + ?Sized,
{
    let scale = 1.0 + max_norm(b);
    let mut x = start;
    let mut r = div_residual(l, side, a, b, &x)?;
    let mut nr = max_norm(&r);
    for _ in 0..NEWTON_MAX_ITER {
        if nr <= NEWTON_TOL * scale {
            // one more step squeezes out the last rounding
            if let Ok(x1) = newton_step(l, side, a, b, &x, &r) {
                if let Ok(r1) = div_residual(l, side, a, b, &x1) {
                    if max_norm(&r1) <= nr {
                        return Ok(x1);
                    }
                }
            }
            return Ok(x);
        }
        let dx = match newton_direction(l, side, a, b, &x, &r) {
            Ok(d) => d,
            Err(_) => return Err(Error::NoConvergence { residual: nr }),
        };
        let mut t = 1.0;
        loop {
            let trial: Vec<f64> = x.iter().zip(&dx).map(|(u, d)| u - t * d).collect();
            if let Ok(rt) = div_residual(l, side, a, b, &trial) {
                let nt = max_norm(&rt);
                if nt.is_finite() && nt < nr {
                    x = trial;
                    r = rt;
                    nr = nt;
                    break;
                }
            }
            t *= 0.5;
            if t < 1e-8 {
                return Err(Error::NoConvergence { residual: nr });
            }
        }
    }
    if nr <= NEWTON_TOL * scale {
        Ok(x)
    } else {
        Err(Error::NoConvergence { residual: nr })
    }
}

fn newton_direction<L, S>(l: &L, side: Side, a: &[S], b: &[S], x: &[S], r: &[S]) -> Result<Vec<S>>
where
    L: SmoothLoop + ?Sized,
    S: Scalar,
{
    let ad = lift_slice(a);
    let bd = lift_slice(b);
    let j = jacobian(x, |xd| div_residual(l, side, &ad, &bd, xd))?;
    j.solve(r)
}

fn newton_step<L, S>(l: &L, side: Side, a: &[S], b: &[S], x: &[S], r: &[S]) -> Result<Vec<S>>
where
    L: SmoothLoop + ?Sized,
    S: Scalar,
{
    let dx = newton_direction(l, side, a, b, x, r)?;
    Ok(x.iter().zip(&dx).map(|(&u, &d)| u - d).collect())
}

/// Newton sweeps in `S` starting from a converged real solution `x0`.
pub fn newton_polish<L, S>(l: &L, side: Side, a: &[S], b: &[S], x0: &[f64]) -> Result<Vec<S>>
where
    L: SmoothLoop + ?Sized,
    S: Scalar,
{
    let mut x: Vec<S> = cst_slice(x0);
    for _ in 0..polish_sweeps::<S>() {
        let r = div_residual(l, side, a, b, &x)?;
        x = newton_step(l, side, a, b, &x, &r)?;
    }
    Ok(x)
}

fn check_in<L: SmoothLoop + ?Sized>(l: &L, a: &[f64]) -> Result<()> {
    if a.len() != l.dim() {
        return Err(Error::DimensionMismatch { expected: l.dim(), got: a.len() });
    }
    if !l.in_domain(a) {
        return Err(Error::OutOfDomain { loop_name: l.name() });
    }
    Ok(())
}

pub fn product<L: SmoothLoop + ?Sized>(l: &L, a: &[f64], b: &[f64]) -> Result<LoopPoint> {
    check_in(l, a)?;
    check_in(l, b)?;
    let p = l.product_s(a, b)?;
    if !l.in_domain(&p) {
        return Err(Error::OutOfDomain { loop_name: l.name() });
    }
    Ok(LoopPoint(p))
}

/// `a\b`.
pub fn left_divide<L: SmoothLoop + ?Sized>(l: &L, a: &[f64], b: &[f64]) -> Result<LoopPoint> {
    check_in(l, a)?;
    check_in(l, b)?;
    let x = l.left_div_s(a, b)?;
    if !l.in_domain(&x) {
        return Err(Error::NoSolutionInChart { loop_name: l.name() });
    }
    Ok(LoopPoint(x))
}

/// `b/a`.
pub fn right_divide<L: SmoothLoop + ?Sized>(l: &L, b: &[f64], a: &[f64]) -> Result<LoopPoint> {
    check_in(l, a)?;
    check_in(l, b)?;
    let y = l.right_div_s(b, a)?;
    if !l.in_domain(&y) {
        return Err(Error::NoSolutionInChart { loop_name: l.name() });
    }
    Ok(LoopPoint(y))
}

/// Associator with parameters `(a, b)` applied to `c`:
/// left `(a·b)\(a·(b·c))`, adjoint `a·(b·((a·b)\c))`, right `((c·a)·b)/(a·b)`.
pub fn associator_s<L, S>(l: &L, kind: AssociatorKind, a: &[S], b: &[S], c: &[S]) -> Result<Vec<S>>
where
    L: SmoothLoop + ?Sized,
    S: Scalar,
{
    let ab = l.product_s(a, b)?;
    match kind {
        AssociatorKind::Left => {
            let bc = l.product_s(b, c)?;
            let abc = l.product_s(a, &bc)?;
            l.left_div_s(&ab, &abc)
        }
        AssociatorKind::Adjoint => {
            let x = l.left_div_s(&ab, c)?;
            let bx = l.product_s(b, &x)?;
            l.product_s(a, &bx)
        }
        AssociatorKind::Right => {
            let ca = l.product_s(c, a)?;
            let cab = l.product_s(&ca, b)?;
            l.right_div_s(&cab, &ab)
        }
    }
}

pub fn associator<L: SmoothLoop + ?Sized>(
    l: &L,
    kind: AssociatorKind,
    a: &[f64],
    b: &[f64],
    c: &[f64],
) -> Result<LoopPoint> {
    for p in [a, b, c] {
        check_in(l, p)?;
    }
    associator_s(l, kind, a, b, c).map(LoopPoint)
}

/// `Ad_b(a)(c) = a\(((a·b)·c)/b)`.
pub fn ad_map_s<L, S>(l: &L, b: &[S], a: &[S], c: &[S]) -> Result<Vec<S>>
where
    L: SmoothLoop + ?Sized,
    S: Scalar,
{
    let ab = l.product_s(a, b)?;
    let abc = l.product_s(&ab, c)?;
    let y = l.right_div_s(&abc, b)?;
    l.left_div_s(a, &y)
}

/// `Ad_b(a)⁻¹(c) = (a·b)\((a·c)·b)`.
pub fn ad_inverse_s<L, S>(l: &L, b: &[S], a: &[S], c: &[S]) -> Result<Vec<S>>
where
    L: SmoothLoop + ?Sized,
    S: Scalar,
{
    let ab = l.product_s(a, b)?;
    let ac = l.product_s(a, c)?;
    let acb = l.product_s(&ac, b)?;
    l.left_div_s(&ab, &acb)
}

pub fn ad_map<L: SmoothLoop + ?Sized>(l: &L, b: &[f64], a: &[f64], c: &[f64]) -> Result<LoopPoint> {
    for p in [a, b, c] {
        check_in(l, p)?;
    }
    ad_map_s(l, b, a, c).map(LoopPoint)
}

/// Jacobian at the identity of a self-map of the loop.
pub fn differential_at_identity<L, S, F>(l: &L, f: F) -> Result<Mat<S>>
where
    L: SmoothLoop + ?Sized,
    S: Scalar,
    F: Fn(&[Dual<S>]) -> Result<Vec<Dual<S>>>,
{
    let e: Vec<S> = cst_slice(&l.identity());
    jacobian(&e, f)
}

/// `(Ad_b(a)⁻¹)_*` at `e`.
pub fn ad_inverse_differential<L, S>(l: &L, b: &[S], a: &[S]) -> Result<Mat<S>>
where
    L: SmoothLoop + ?Sized,
    S: Scalar,
{
    let bd = lift_slice(b);
    let ad = lift_slice(a);
    differential_at_identity(l, |c| ad_inverse_s(l, &bd, &ad, c))
}

/// Differential at `e` of the associator with parameters `(a, b)`.
pub fn associator_differential<L, S>(l: &L, kind: AssociatorKind, a: &[S], b: &[S]) -> Result<Mat<S>>
where
    L: SmoothLoop + ?Sized,
    S: Scalar,
{
    let ad = lift_slice(a);
    let bd = lift_slice(b);
    differential_at_identity(l, |c| associator_s(l, kind, &ad, &bd, c))
}

/// Relative distance `d(x, y) / max(1, |y|)`.
pub fn relative_distance<L: SmoothLoop + ?Sized>(l: &L, x: &[f64], y: &[f64]) -> f64 {
    l.coord_distance(x, y) / max_norm(y).max(1.0)
}

/// Deterministic per-index generator: sample `i` always sees the same stream.
pub fn indexed_rng(seed: u64, index: u64) -> ChaCha8Rng {
    use rand::SeedableRng;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(index);
    rng
}

/// Draws a pair accepted by [`SmoothLoop::pair_ok`].
pub fn sample_pair<L: SmoothLoop + ?Sized>(
    l: &L,
    rng: &mut dyn RngCore,
    region: Region,
) -> (LoopPoint, LoopPoint) {
    loop {
        let a = l.sample_point(rng, region);
        let b = l.sample_point(rng, region);
        if l.pair_ok(&a, &b) {
            return (a, b);
        }
    }
}

struct AxiomSample {
    identity: f64,
    left_div: f64,
    right_div: f64,
    closure_failure: bool,
}

fn axiom_sample<L: SmoothLoop + ?Sized>(l: &L, seed: u64, i: u64) -> AxiomSample {
    let mut rng = indexed_rng(seed, i);
    let (a, b) = sample_pair(l, &mut rng, Region::Full);
    let e = l.identity();
    let dist = |r: Result<LoopPoint>, want: &[f64]| match r {
        Ok(p) => relative_distance(l, &p, want),
        Err(_) => f64::INFINITY,
    };
    let identity = dist(product(l, &e, &a), &a).max(dist(product(l, &a, &e), &a));
    let left_div = dist(left_divide(l, &a, &b).and_then(|x| product(l, &a, &x)), &b);
    let right_div = dist(right_divide(l, &b, &a).and_then(|y| product(l, &y, &a)), &b);
    let closure_failure = product(l, &a, &b).is_err();
    AxiomSample { identity, left_div, right_div, closure_failure }
}

/// Samples the chart and checks the identity axiom, both division round
/// trips and closure of the product.
pub fn check_loop_axioms<L: SmoothLoop + ?Sized>(l: &L, n_samples: usize, seed: u64) -> VerificationReport {
    let start = std::time::Instant::now();
    let samples: Vec<AxiomSample> = (0..n_samples as u64)
        .into_par_iter()
        .map(|i| axiom_sample(l, seed, i))
        .collect();
    let fold = |f: fn(&AxiomSample) -> f64| samples.iter().map(f).fold(0.0, f64::max);
    let closure = samples.iter().filter(|s| s.closure_failure).count();
    let mut report = VerificationReport::new("axioms");
    report.push(Case::new("identity", fold(|s| s.identity), TOL_EXACT, n_samples));
    report.push(Case::new("left_division_round_trip", fold(|s| s.left_div), TOL_EXACT, n_samples));
    report.push(Case::new("right_division_round_trip", fold(|s| s.right_div), TOL_EXACT, n_samples));
    report.push(Case::new("chart_closure_failures", closure as f64, 0.0, n_samples));
    report.wall_time = start.elapsed().as_secs_f64();
    report
}
