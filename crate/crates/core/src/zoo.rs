//! The catalog of concrete loops, stereographic chart maps and the unitary
//! matrix representation of the sphere loop.
//!
//! Complex loops store `ζ = x + iy` as `[x, y]`; the quaternionic loop stores
//! `ζ⁰ + i(ζ¹ i + ζ² j + ζ³ k)` as `[ζ⁰, ζ¹, ζ², ζ³]`.

use std::f64::consts::PI;
use std::fmt;
use std::str::FromStr;

use rand::{Rng, RngCore};

use crate::complex::{CQuat, Cplx};
use crate::error::{Error, Result};
use crate::loop_core::{newton_polish, LoopPoint, Region, Side, SmoothLoop, SINGULAR_GUARD};
use crate::scalar::Scalar;

/// Pairs whose Möbius denominators fall below this are not sampled.
pub const PAIR_GUARD: f64 = 0.05;

fn guard<S: Scalar>(d: Cplx<S>) -> Result<()> {
    let m = d.abs_re();
    if m < SINGULAR_GUARD || !m.is_finite() {
        Err(Error::DomainSingularity { denominator: m })
    } else {
        Ok(())
    }
}

fn uniform_disk(rng: &mut dyn RngCore, radius: f64) -> LoopPoint {
    loop {
        let x: f64 = rng.gen_range(-radius..radius);
        let y: f64 = rng.gen_range(-radius..radius);
        if x * x + y * y < radius * radius {
            return LoopPoint(vec![x, y]);
        }
    }
}

fn c2(v: &[f64]) -> Cplx<f64> {
    Cplx::from_slice(v)
}

/// Solves `y − c·ȳ = d` for `y`.
fn conj_linear_solve<S: Scalar>(c: Cplx<S>, d: Cplx<S>) -> Result<Cplx<S>> {
    let den = Cplx::real(S::one() - c.norm_sqr());
    guard(den)?;
    Ok((d + c * d.conj()) / den)
}

/// `ℝ/ℤ` with `x∗y = x + y + f(x) + f(y) − f(x+y)`, `f(x) = (1 − cos 2πx)/4`.
#[derive(Clone, Copy, Debug, Default)]
pub struct RzLoop;

impl RzLoop {
    fn f<S: Scalar>(x: S) -> S {
        (S::one() - (x * (2.0 * PI)).cos()) / 4.0
    }

    /// Unreduced product, continuous in both arguments.
    fn lift<S: Scalar>(x: S, y: S) -> S {
        x + y + Self::f(x) + Self::f(y) - Self::f(x + y)
    }

    /// Real solution of `a∗y = b` on the periodic lift by bisection.
    ///
    /// `y ↦ lift(a, y)` runs from `a` to `a + 1` on `[0, 1]`, so a root of
    /// `lift(a, y) = a + ((b − a) mod 1)` is always bracketed.
    fn solve_real(a: f64, b: f64) -> f64 {
        let target = a + (b - a).rem_euclid(1.0);
        let (mut lo, mut hi) = (0.0f64, 1.0f64);
        for _ in 0..200 {
            let mid = 0.5 * (lo + hi);
            if mid <= lo || mid >= hi {
                break;
            }
            if Self::lift(a, mid) < target {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        let y = 0.5 * (lo + hi);
        if y >= 1.0 {
            0.0
        } else {
            y
        }
    }
}

impl SmoothLoop for RzLoop {
    fn name(&self) -> String {
        "rz".into()
    }
    fn dim(&self) -> usize {
        1
    }
    fn in_domain(&self, a: &[f64]) -> bool {
        a.len() == 1 && a[0].is_finite()
    }
    fn product_s<S: Scalar>(&self, a: &[S], b: &[S]) -> Result<Vec<S>> {
        let p = Self::lift(a[0], b[0]);
        Ok(vec![p - p.re().floor()])
    }
    fn left_div_s<S: Scalar>(&self, a: &[S], b: &[S]) -> Result<Vec<S>> {
        let y0 = Self::solve_real(a[0].re(), b[0].re());
        newton_polish(self, Side::Left, a, b, &[y0])
    }
    fn right_div_s<S: Scalar>(&self, b: &[S], a: &[S]) -> Result<Vec<S>> {
        // commutative
        self.left_div_s(a, b)
    }
    fn wrap_diff<S: Scalar>(&self, d: &mut [S]) {
        for v in d.iter_mut() {
            *v -= S::cst(v.re().round());
        }
    }
    fn sample_point(&self, rng: &mut dyn RngCore, region: Region) -> LoopPoint {
        match region {
            Region::Full => LoopPoint(vec![rng.gen_range(0.0..1.0)]),
            Region::Local => LoopPoint(vec![rng.gen_range(-0.05..0.05)]),
        }
    }
}

/// The sphere loop `(ζ + η)/(1 − ζ̄η)` on `ℂ`.
#[derive(Clone, Copy, Debug, Default)]
pub struct QcLoop;

/// Chart bound for the sphere loop.
pub const QC_CHART_RADIUS: f64 = 1e3;

fn sphere_pair_ok(a: &[f64], b: &[f64]) -> bool {
    let (a, b) = (c2(a), c2(b));
    let ab = a.conj() * b;
    (1.0 - ab).abs() >= PAIR_GUARD
        && (ab + 1.0).abs() >= PAIR_GUARD
        && (1.0 - a.norm_sqr() * b.norm_sqr()).abs() >= PAIR_GUARD
}

fn sphere_sample(rng: &mut dyn RngCore, region: Region) -> LoopPoint {
    match region {
        Region::Full => uniform_disk(rng, 2.0),
        Region::Local => uniform_disk(rng, 0.5),
    }
}

impl SmoothLoop for QcLoop {
    fn name(&self) -> String {
        "qc".into()
    }
    fn dim(&self) -> usize {
        2
    }
    fn in_domain(&self, a: &[f64]) -> bool {
        a.len() == 2 && a.iter().all(|v| v.is_finite()) && c2(a).abs() < QC_CHART_RADIUS
    }
    fn product_s<S: Scalar>(&self, a: &[S], b: &[S]) -> Result<Vec<S>> {
        let (z, e) = (Cplx::from_slice(a), Cplx::from_slice(b));
        let den = 1.0 - z.conj() * e;
        guard(den)?;
        Ok(((z + e) / den).to_vec())
    }
    fn left_div_s<S: Scalar>(&self, a: &[S], b: &[S]) -> Result<Vec<S>> {
        let (z, e) = (Cplx::from_slice(a), Cplx::from_slice(b));
        let den = z.conj() * e + 1.0;
        guard(den)?;
        Ok(((e - z) / den).to_vec())
    }
    fn right_div_s<S: Scalar>(&self, b: &[S], a: &[S]) -> Result<Vec<S>> {
        // y·ζ = η  ⇔  y + ηζ·ȳ = η − ζ
        let (e, z) = (Cplx::from_slice(b), Cplx::from_slice(a));
        Ok(conj_linear_solve(-(e * z), e - z)?.to_vec())
    }
    fn sample_point(&self, rng: &mut dyn RngCore, region: Region) -> LoopPoint {
        sphere_sample(rng, region)
    }
    fn pair_ok(&self, a: &[f64], b: &[f64]) -> bool {
        sphere_pair_ok(a, b)
    }
}

/// The hyperbolic loop `(ζ + η)/(1 + ζ̄η)` on the open unit disk.
#[derive(Clone, Copy, Debug, Default)]
pub struct Qh2Loop;

impl SmoothLoop for Qh2Loop {
    fn name(&self) -> String {
        "qh2".into()
    }
    fn dim(&self) -> usize {
        2
    }
    fn in_domain(&self, a: &[f64]) -> bool {
        a.len() == 2 && a.iter().all(|v| v.is_finite()) && c2(a).norm_sqr() < 1.0
    }
    fn product_s<S: Scalar>(&self, a: &[S], b: &[S]) -> Result<Vec<S>> {
        let (z, e) = (Cplx::from_slice(a), Cplx::from_slice(b));
        let den = z.conj() * e + 1.0;
        guard(den)?;
        Ok(((z + e) / den).to_vec())
    }
    fn left_div_s<S: Scalar>(&self, a: &[S], b: &[S]) -> Result<Vec<S>> {
        let (z, e) = (Cplx::from_slice(a), Cplx::from_slice(b));
        let den = 1.0 - z.conj() * e;
        guard(den)?;
        Ok(((e - z) / den).to_vec())
    }
    fn right_div_s<S: Scalar>(&self, b: &[S], a: &[S]) -> Result<Vec<S>> {
        // y·ζ = η  ⇔  y − ηζ·ȳ = η − ζ
        let (e, z) = (Cplx::from_slice(b), Cplx::from_slice(a));
        Ok(conj_linear_solve(e * z, e - z)?.to_vec())
    }
    fn sample_point(&self, rng: &mut dyn RngCore, region: Region) -> LoopPoint {
        match region {
            Region::Full => uniform_disk(rng, 0.95),
            Region::Local => uniform_disk(rng, 0.5),
        }
    }
}

/// The quaternionic loop `(ζ + η)·(1 + (K/4)ζ⁺η)⁻¹` on real quaternionic points.
#[derive(Clone, Copy, Debug)]
pub struct QhrLoop {
    pub k: f64,
}

impl QhrLoop {
    fn denominator<S: Scalar>(&self, z: &CQuat<S>, e: &CQuat<S>) -> CQuat<S> {
        let one = CQuat::scalar(Cplx::one());
        one + (z.conj() * *e).scale(Cplx::real(S::cst(self.k / 4.0)))
    }

    /// Real coordinates of `(ζ + η)·(1 + (K/4)ζ⁺η)⁻¹` together with the size
    /// of the parts that leave the real quaternionic subspace.
    pub fn product_with_defect(&self, a: &[f64], b: &[f64]) -> Result<(Vec<f64>, f64)> {
        let (z, e) = (CQuat::from_real_coords(a), CQuat::from_real_coords(b));
        let den = self.denominator(&z, &e);
        guard(den.norm())?;
        let p = (z + e) * den.inverse();
        Ok((p.real_coords(), p.real_coords_defect()))
    }
}

/// `(ζ⁰)² − (ζ¹)² − (ζ²)² − (ζ³)²`.
pub fn quaternion_norm(z: &[f64]) -> f64 {
    z[0] * z[0] - z[1] * z[1] - z[2] * z[2] - z[3] * z[3]
}

impl SmoothLoop for QhrLoop {
    fn name(&self) -> String {
        format!("qhr:K={}", self.k)
    }
    fn dim(&self) -> usize {
        4
    }
    fn in_domain(&self, a: &[f64]) -> bool {
        a.len() == 4 && a.iter().all(|v| v.is_finite() && v.abs() < 1e3)
    }
    fn product_s<S: Scalar>(&self, a: &[S], b: &[S]) -> Result<Vec<S>> {
        let (z, e) = (CQuat::from_real_coords(a), CQuat::from_real_coords(b));
        let den = self.denominator(&z, &e);
        guard(den.norm())?;
        Ok(((z + e) * den.inverse()).real_coords())
    }
    fn sample_point(&self, rng: &mut dyn RngCore, region: Region) -> LoopPoint {
        let h = match region {
            Region::Full => 0.4,
            Region::Local => 0.3,
        };
        LoopPoint((0..4).map(|_| rng.gen_range(-h..h)).collect())
    }
    fn pair_ok(&self, a: &[f64], b: &[f64]) -> bool {
        let (z, e) = (CQuat::from_real_coords(a), CQuat::from_real_coords(b));
        self.denominator(&z, &e).norm().abs() >= PAIR_GUARD
            && self.denominator(&e, &z).norm().abs() >= PAIR_GUARD
    }
}

/// 2×2 complex matrix.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct UnitaryRep {
    pub matrix: [[Cplx<f64>; 2]; 2],
}

type M2<S> = [[Cplx<S>; 2]; 2];

fn m2_mul<S: Scalar>(a: &M2<S>, b: &M2<S>) -> M2<S> {
    let mut out = [[Cplx::zero(); 2]; 2];
    for (r, row) in out.iter_mut().enumerate() {
        for (c, v) in row.iter_mut().enumerate() {
            *v = a[r][0] * b[0][c] + a[r][1] * b[1][c];
        }
    }
    out
}

fn qsu2_matrix_s<S: Scalar>(eta: Cplx<S>) -> M2<S> {
    let alpha = (eta.norm_sqr() + 1.0).sqrt().recip();
    let a = Cplx::real(alpha);
    [[a, eta.scale(alpha)], [-eta.conj().scale(alpha), a]]
}

/// Product matrix `U_η U_ζ Λ(η, ζ)` and the coordinate read off it.
///
/// The phase is `Λ = diag(e^{iψ}, e^{−iψ})` with `ψ = arg(1 − η̄ζ)`; that is
/// the choice for which the product is again of the form `U_ξ`.
fn qsu2_product_s<S: Scalar>(eta: Cplx<S>, zeta: Cplx<S>) -> Result<(M2<S>, Cplx<S>)> {
    let d = 1.0 - eta.conj() * zeta;
    guard(d)?;
    let phase = d.scale(d.abs().recip());
    let lambda = [[phase, Cplx::zero()], [Cplx::zero(), phase.conj()]];
    let m = m2_mul(&m2_mul(&qsu2_matrix_s(eta), &qsu2_matrix_s(zeta)), &lambda);
    guard(m[0][0])?;
    let coord = m[0][1] / m[0][0];
    Ok((m, coord))
}

pub fn qsu2_matrix(eta: Cplx<f64>) -> UnitaryRep {
    UnitaryRep { matrix: qsu2_matrix_s(eta) }
}

pub fn qsu2_product(eta: Cplx<f64>, zeta: Cplx<f64>) -> Result<(UnitaryRep, Cplx<f64>)> {
    let (m, c) = qsu2_product_s(eta, zeta)?;
    Ok((UnitaryRep { matrix: m }, c))
}

impl UnitaryRep {
    /// `max |U U† − I|`.
    pub fn unitarity_defect(&self) -> f64 {
        let m = self.matrix;
        let mut worst = 0.0f64;
        for r in 0..2 {
            for c in 0..2 {
                let v = m[r][0] * m[c][0].conj() + m[r][1] * m[c][1].conj();
                let want = if r == c { 1.0 } else { 0.0 };
                worst = worst.max((v - Cplx::real(want)).abs());
            }
        }
        worst
    }

    /// Largest deviation of the diagonal from a common real value.
    pub fn diagonal_defect(&self) -> f64 {
        let (a, d) = (self.matrix[0][0], self.matrix[1][1]);
        a.im.abs().max(d.im.abs()).max((a - d).abs())
    }

    pub fn det(&self) -> Cplx<f64> {
        let m = self.matrix;
        m[0][0] * m[1][1] - m[0][1] * m[1][0]
    }
}

/// The loop of unitary matrices `U_η` under `U_η ∗ U_ζ = U_η U_ζ Λ`.
///
/// The product goes through the matrices; divisions use Newton on it.
#[derive(Clone, Copy, Debug, Default)]
pub struct Qsu2Loop;

impl SmoothLoop for Qsu2Loop {
    fn name(&self) -> String {
        "qsu2".into()
    }
    fn dim(&self) -> usize {
        2
    }
    fn in_domain(&self, a: &[f64]) -> bool {
        QcLoop.in_domain(a)
    }
    fn product_s<S: Scalar>(&self, a: &[S], b: &[S]) -> Result<Vec<S>> {
        let (_, c) = qsu2_product_s(Cplx::from_slice(a), Cplx::from_slice(b))?;
        Ok(c.to_vec())
    }
    /// Newton from the identity cannot cross the fold where `y ↦ y·a`
    /// degenerates outside the unit disk, so the full region stays inside it.
    fn sample_point(&self, rng: &mut dyn RngCore, region: Region) -> LoopPoint {
        match region {
            Region::Full => uniform_disk(rng, 0.95),
            Region::Local => uniform_disk(rng, 0.5),
        }
    }
    fn pair_ok(&self, a: &[f64], b: &[f64]) -> bool {
        sphere_pair_ok(a, b)
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum LoopKind {
    Rz,
    Qc,
    Qh2,
    Qhr,
    Qsu2,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct LoopSpec {
    pub kind: LoopKind,
    /// Curvature constant; only read for `qhr`.
    pub k: f64,
}

impl LoopSpec {
    pub fn new(kind: LoopKind) -> Self {
        LoopSpec { kind, k: 0.0 }
    }
    pub fn qhr(k: f64) -> Self {
        LoopSpec { kind: LoopKind::Qhr, k }
    }
}

impl fmt::Display for LoopSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.kind {
            LoopKind::Rz => write!(f, "rz"),
            LoopKind::Qc => write!(f, "qc"),
            LoopKind::Qh2 => write!(f, "qh2"),
            LoopKind::Qhr => write!(f, "qhr:K={}", self.k),
            LoopKind::Qsu2 => write!(f, "qsu2"),
        }
    }
}

impl FromStr for LoopSpec {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        match s {
            "rz" => return Ok(LoopSpec::new(LoopKind::Rz)),
            "qc" => return Ok(LoopSpec::new(LoopKind::Qc)),
            "qh2" => return Ok(LoopSpec::new(LoopKind::Qh2)),
            "qsu2" => return Ok(LoopSpec::new(LoopKind::Qsu2)),
            _ => {}
        }
        let k = s
            .strip_prefix("qhr:K=")
            .and_then(|v| v.parse::<f64>().ok())
            .filter(|k| k.is_finite())
            .ok_or_else(|| Error::UnknownKind(s.to_string()))?;
        Ok(LoopSpec::qhr(k))
    }
}

#[derive(Clone, Copy, Debug)]
enum LoopImpl {
    Rz(RzLoop),
    Qc(QcLoop),
    Qh2(Qh2Loop),
    Qhr(QhrLoop),
    Qsu2(Qsu2Loop),
}

/// Any catalog loop, dispatched at run time.
#[derive(Clone, Copy, Debug)]
pub struct LoopDescriptor {
    spec: LoopSpec,
    inner: LoopImpl,
}

pub fn make_loop(spec: LoopSpec) -> Result<LoopDescriptor> {
    let inner = match spec.kind {
        LoopKind::Rz => LoopImpl::Rz(RzLoop),
        LoopKind::Qc => LoopImpl::Qc(QcLoop),
        LoopKind::Qh2 => LoopImpl::Qh2(Qh2Loop),
        LoopKind::Qhr => {
            if !spec.k.is_finite() {
                return Err(Error::UnknownKind(spec.to_string()));
            }
            LoopImpl::Qhr(QhrLoop { k: spec.k })
        }
        LoopKind::Qsu2 => LoopImpl::Qsu2(Qsu2Loop),
    };
    Ok(LoopDescriptor { spec, inner })
}

/// Looks a loop up by its catalog name.
pub fn loop_by_name(name: &str) -> Result<LoopDescriptor> {
    let spec: LoopSpec = name.parse().map_err(|_| Error::UnknownLoop(name.to_string()))?;
    make_loop(spec)
}

/// Loops exercised by the default sweeps.
pub fn catalog() -> Vec<LoopDescriptor> {
    ["rz", "qc", "qh2", "qhr:K=4", "qsu2"]
        .iter()
        .map(|n| loop_by_name(n).expect("catalog names parse"))
        .collect()
}

impl LoopDescriptor {
    pub fn spec(&self) -> LoopSpec {
        self.spec
    }
}

macro_rules! dispatch {
    ($self:ident, $l:ident => $e:expr) => {
        match &$self.inner {
            LoopImpl::Rz($l) => $e,
            LoopImpl::Qc($l) => $e,
            LoopImpl::Qh2($l) => $e,
            LoopImpl::Qhr($l) => $e,
            LoopImpl::Qsu2($l) => $e,
        }
    };
}

impl SmoothLoop for LoopDescriptor {
    fn name(&self) -> String {
        self.spec.to_string()
    }
    fn dim(&self) -> usize {
        dispatch!(self, l => l.dim())
    }
    fn in_domain(&self, a: &[f64]) -> bool {
        dispatch!(self, l => l.in_domain(a))
    }
    fn product_s<S: Scalar>(&self, a: &[S], b: &[S]) -> Result<Vec<S>> {
        dispatch!(self, l => l.product_s(a, b))
    }
    fn left_div_s<S: Scalar>(&self, a: &[S], b: &[S]) -> Result<Vec<S>> {
        dispatch!(self, l => l.left_div_s(a, b))
    }
    fn right_div_s<S: Scalar>(&self, b: &[S], a: &[S]) -> Result<Vec<S>> {
        dispatch!(self, l => l.right_div_s(b, a))
    }
    fn wrap_diff<S: Scalar>(&self, d: &mut [S]) {
        dispatch!(self, l => l.wrap_diff(d))
    }
    fn sample_point(&self, rng: &mut dyn RngCore, region: Region) -> LoopPoint {
        dispatch!(self, l => l.sample_point(rng, region))
    }
    fn pair_ok(&self, a: &[f64], b: &[f64]) -> bool {
        dispatch!(self, l => l.pair_ok(a, b))
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ChartKind {
    Sphere,
    Hyperboloid,
}

/// `ζ = e^{iφ} tan(θ/2)` on the sphere, `e^{iφ} tanh(θ/2)` on the hyperboloid.
pub fn chart_map(kind: ChartKind, theta: f64, phi: f64) -> Result<LoopPoint> {
    let r = match kind {
        ChartKind::Sphere => {
            if !(0.0..PI).contains(&theta) || (PI - theta).abs() < 1e-12 {
                return Err(Error::PoleSingularity);
            }
            (theta / 2.0).tan()
        }
        ChartKind::Hyperboloid => {
            if !(theta >= 0.0) {
                return Err(Error::OutOfDomain { loop_name: "qh2".into() });
            }
            (theta / 2.0).tanh()
        }
    };
    Ok(LoopPoint(vec![r * phi.cos(), r * phi.sin()]))
}

/// Inverse of [`chart_map`]; `φ` is returned in `(−π, π]`.
pub fn inverse_chart_map(kind: ChartKind, z: &[f64]) -> Result<(f64, f64)> {
    let c = c2(z);
    let r = c.abs();
    let theta = match kind {
        ChartKind::Sphere => 2.0 * r.atan(),
        ChartKind::Hyperboloid => {
            if r >= 1.0 {
                return Err(Error::OutOfDomain { loop_name: "qh2".into() });
            }
            2.0 * r.atanh()
        }
    };
    Ok((theta, c.arg()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::loop_core::{left_divide, product, right_divide};

    fn close(a: &[f64], b: &[f64], tol: f64) -> bool {
        a.iter().zip(b).all(|(x, y)| (x - y).abs() < tol)
    }

    #[test]
    fn rz_quarter_plus_quarter() {
        let p = product(&RzLoop, &[0.25], &[0.25]).unwrap();
        assert!((p[0] - 0.5).abs() < 1e-15);
    }

    #[test]
    fn rz_division_handles_wraparound() {
        let (a, b) = ([0.9], [0.05]);
        let x = left_divide(&RzLoop, &a, &b).unwrap();
        let back = product(&RzLoop, &a, &x).unwrap();
        assert!(RzLoop.coord_distance(&back, &b) < 1e-14);
    }

    #[test]
    fn qc_half_times_half() {
        let p = product(&QcLoop, &[0.5, 0.0], &[0.5, 0.0]).unwrap();
        assert!(close(&p, &[4.0 / 3.0, 0.0], 1e-15));
    }

    #[test]
    fn qc_singular_pair() {
        let r = product(&QcLoop, &[0.0, 1.0], &[0.0, 1.0]);
        assert!(matches!(r, Err(Error::DomainSingularity { .. })));
    }

    #[test]
    fn qc_right_division_by_hand() {
        let (b, a) = ([0.3, -0.7], [1.1, 0.4]);
        let y = right_divide(&QcLoop, &b, &a).unwrap();
        assert!(close(&product(&QcLoop, &y, &a).unwrap(), &b, 1e-14));
    }

    #[test]
    fn qh2_half_times_half() {
        let p = product(&Qh2Loop, &[0.5, 0.0], &[0.5, 0.0]).unwrap();
        assert!(close(&p, &[0.8, 0.0], 1e-15));
    }

    #[test]
    fn qh2_division_leaving_the_disk() {
        let r = left_divide(&Qh2Loop, &[0.9, 0.0], &[-0.9, 0.0]);
        assert!(r.is_ok());
        let r = product(&Qh2Loop, &[0.99, 0.0], &[1.5, 0.0]);
        assert!(matches!(r, Err(Error::OutOfDomain { .. })));
    }

    #[test]
    fn qhr_flat_is_addition() {
        let l = QhrLoop { k: 0.0 };
        let (a, b) = ([0.1, 0.2, -0.3, 0.4], [-0.5, 0.6, 0.7, 0.05]);
        let p = product(&l, &a, &b).unwrap();
        let sum: Vec<f64> = a.iter().zip(&b).map(|(x, y)| x + y).collect();
        assert!(close(&p, &sum, 1e-15));
    }

    #[test]
    fn qhr_product_stays_real() {
        let l = QhrLoop { k: 4.0 };
        let (_, defect) = l.product_with_defect(&[0.3, -0.2, 0.1, 0.25], &[-0.1, 0.3, 0.2, -0.15]).unwrap();
        assert!(defect < 1e-15);
    }

    #[test]
    fn qsu2_identity_and_pair() {
        let (u, c) = qsu2_product(Cplx::zero(), Cplx::new(0.3, 0.2)).unwrap();
        assert!((c - Cplx::new(0.3, 0.2)).abs() < 1e-15);
        assert!(u.unitarity_defect() < 1e-15);
        let (_, c) = qsu2_product(Cplx::new(0.5, 0.0), Cplx::new(0.5, 0.0)).unwrap();
        assert!((c - Cplx::new(4.0 / 3.0, 0.0)).abs() < 1e-14);
        assert_eq!(qsu2_matrix(Cplx::zero()).matrix[0][0], Cplx::one());
    }

    #[test]
    fn chart_maps() {
        let z = chart_map(ChartKind::Sphere, PI / 2.0, 0.0).unwrap();
        assert!(close(&z, &[1.0, 0.0], 1e-15));
        assert!(matches!(chart_map(ChartKind::Sphere, PI, 0.0), Err(Error::PoleSingularity)));
        let z = chart_map(ChartKind::Hyperboloid, 0.0, 1.0).unwrap();
        assert!(close(&z, &[0.0, 0.0], 1e-300));
        let z = chart_map(ChartKind::Hyperboloid, 40.0, 0.3).unwrap();
        assert!((c2(&z).abs() - 1.0).abs() < 1e-15);
    }

    #[test]
    fn names_round_trip() {
        for n in ["rz", "qc", "qh2", "qhr:K=4", "qhr:K=0.5", "qsu2"] {
            assert_eq!(loop_by_name(n).unwrap().name(), n);
        }
        assert!(matches!("qhr".parse::<LoopSpec>(), Err(Error::UnknownKind(_))));
        assert!(matches!(loop_by_name("octonion"), Err(Error::UnknownLoop(_))));
    }
}
