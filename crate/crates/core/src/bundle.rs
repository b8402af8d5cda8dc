//! Principal loop bundles described by atlases: local trivializations,
//! transition functions, cocycle checks and two worked examples, the
//! three-sphere over the circle and the winding bundle over the two-sphere.
//!
//! A [`TotalPoint`] is a point of the total space written in one chart as
//! `(x, φ_α(p))`. Transitions act on fiber coordinates by left translation,
//! `φ_β(p) = q_{βα}(p)·φ_α(p)`, and may depend on the fiber point.

use std::f64::consts::{PI, TAU};
use std::fmt;
use std::sync::Arc;

use rand::{Rng, RngCore};

use crate::complex::Cplx;
use crate::error::{Error, Result};
use crate::loop_core::{
    associator, product, relative_distance, right_divide, AssociatorKind, LoopPoint, SmoothLoop,
    SINGULAR_GUARD,
};
use crate::zoo::{loop_by_name, LoopDescriptor};

pub type BasePoint = Vec<f64>;

type Membership = Arc<dyn Fn(&[f64]) -> bool + Send + Sync>;
type Normalizer = Arc<dyn Fn(&[f64]) -> BasePoint + Send + Sync>;
/// `(from, to, p) ↦ q_{to,from}(p)` for `p` written in chart `from`.
pub type TransitionFn = Arc<dyn Fn(&str, &str, &TotalPoint) -> Result<LoopPoint> + Send + Sync>;
/// Draws a base point of the overlap, written in the coordinates of `from`.
pub type OverlapSampler = Arc<dyn Fn(&str, &str, &mut dyn RngCore) -> BasePoint + Send + Sync>;

#[derive(Clone)]
pub struct BaseChart {
    pub id: String,
    pub base_dim: usize,
    contains: Membership,
    normalize: Normalizer,
}

impl BaseChart {
    pub fn new(
        id: impl Into<String>,
        base_dim: usize,
        contains: impl Fn(&[f64]) -> bool + Send + Sync + 'static,
        normalize: impl Fn(&[f64]) -> BasePoint + Send + Sync + 'static,
    ) -> Self {
        BaseChart { id: id.into(), base_dim, contains: Arc::new(contains), normalize: Arc::new(normalize) }
    }

    /// Membership of a base point given in any representative.
    pub fn contains(&self, x: &[f64]) -> bool {
        (self.contains)(&self.normalize(x))
    }

    /// The representative of `x` used by this chart.
    pub fn normalize(&self, x: &[f64]) -> BasePoint {
        (self.normalize)(x)
    }
}

impl fmt::Debug for BaseChart {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("BaseChart").field("id", &self.id).field("base_dim", &self.base_dim).finish()
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct TotalPoint {
    pub chart: String,
    pub base: BasePoint,
    pub fiber: LoopPoint,
}

impl TotalPoint {
    pub fn new(chart: impl Into<String>, base: BasePoint, fiber: impl Into<LoopPoint>) -> Self {
        TotalPoint { chart: chart.into(), base, fiber: fiber.into() }
    }
}

#[derive(Clone)]
pub struct BundleAtlas {
    pub name: String,
    pub fiber: LoopDescriptor,
    pub charts: Vec<BaseChart>,
    transition: TransitionFn,
    overlap_sampler: OverlapSampler,
}

impl fmt::Debug for BundleAtlas {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("BundleAtlas")
            .field("name", &self.name)
            .field("fiber", &self.fiber.name())
            .field("charts", &self.charts)
            .finish()
    }
}

impl BundleAtlas {
    pub fn new(
        name: impl Into<String>,
        fiber: LoopDescriptor,
        charts: Vec<BaseChart>,
        transition: TransitionFn,
        overlap_sampler: OverlapSampler,
    ) -> Self {
        BundleAtlas { name: name.into(), fiber, charts, transition, overlap_sampler }
    }

    pub fn chart(&self, id: &str) -> Result<&BaseChart> {
        self.charts.iter().find(|c| c.id == id).ok_or_else(|| Error::UnknownChart(id.to_string()))
    }

    pub fn chart_ids(&self) -> Vec<String> {
        self.charts.iter().map(|c| c.id.clone()).collect()
    }

    fn check_overlap(&self, from: &str, to: &str, x: &[f64]) -> Result<()> {
        if self.chart(from)?.contains(x) && self.chart(to)?.contains(x) {
            Ok(())
        } else {
            Err(Error::NotInOverlap { from: from.to_string(), to: to.to_string() })
        }
    }

    /// `q_{to,from}(p)`; the identity when the charts coincide.
    pub fn transition(&self, from: &str, to: &str, p: &TotalPoint) -> Result<LoopPoint> {
        self.check_overlap(from, to, &p.base)?;
        if from == to {
            return Ok(self.fiber.identity());
        }
        (self.transition)(from, to, p)
    }

    pub fn sample_overlap(&self, from: &str, to: &str, rng: &mut dyn RngCore) -> BasePoint {
        (self.overlap_sampler)(from, to, rng)
    }
}

/// `p·a`: same base, fiber coordinate multiplied on the right.
pub fn right_action(atlas: &BundleAtlas, p: &TotalPoint, a: &[f64]) -> Result<TotalPoint> {
    let fiber = product(&atlas.fiber, &p.fiber, a)?;
    Ok(TotalPoint { chart: p.chart.clone(), base: p.base.clone(), fiber })
}

/// Rewrites `p` in chart `to`: `φ_to = q_{to,from}·φ_from`.
pub fn change_chart(atlas: &BundleAtlas, p: &TotalPoint, to: &str) -> Result<TotalPoint> {
    let q = atlas.transition(&p.chart, to, p)?;
    let fiber = product(&atlas.fiber, &q, &p.fiber)?;
    Ok(TotalPoint { chart: to.to_string(), base: atlas.chart(to)?.normalize(&p.base), fiber })
}

/// Residual of `q_{βα}·q_α = q_{βγ}·(q_{γα}·q_α)` and of the rebracketed form
/// `(q_{βγ}·q_{γα})·(l_{(q_{βγ},q_{γα})} q_α)`, with `q_α = q_test`.
pub fn cocycle_residual(
    atlas: &BundleAtlas,
    alpha: &str,
    beta: &str,
    gamma: &str,
    x: &[f64],
    q_test: &[f64],
) -> Result<f64> {
    let l = &atlas.fiber;
    let base = atlas.chart(alpha)?.normalize(x);
    for c in [beta, gamma] {
        atlas.check_overlap(alpha, c, &base)?;
    }
    let p_alpha = TotalPoint::new(alpha, base, q_test.to_vec());
    let q_ba = atlas.transition(alpha, beta, &p_alpha)?;
    let q_ga = atlas.transition(alpha, gamma, &p_alpha)?;
    let p_gamma = change_chart(atlas, &p_alpha, gamma)?;
    let q_bg = atlas.transition(gamma, beta, &p_gamma)?;

    let lhs = product(l, &q_ba, q_test)?;
    let rhs = product(l, &q_bg, &product(l, &q_ga, q_test)?)?;
    let assoc = associator(l, AssociatorKind::Left, &q_bg, &q_ga, q_test)?;
    let rhs2 = product(l, &product(l, &q_bg, &q_ga)?, &assoc)?;
    Ok(relative_distance(l, &lhs, &rhs).max(relative_distance(l, &lhs, &rhs2)))
}

/// Residual of `R⁻¹_{q_α·a}(q_β·a) = r_{(q_α,a)} q_{βα}(p)` where
/// `q_β = q_{βα}(p)·q_α` and `p` sits over `x` with fiber coordinate `q_α`.
pub fn transition_right_law_residual(
    atlas: &BundleAtlas,
    alpha: &str,
    beta: &str,
    x: &[f64],
    q_alpha: &[f64],
    a: &[f64],
) -> Result<f64> {
    let l = &atlas.fiber;
    let p = TotalPoint::new(alpha, atlas.chart(alpha)?.normalize(x), q_alpha.to_vec());
    let q_ba = atlas.transition(alpha, beta, &p)?;
    let q_beta = product(l, &q_ba, q_alpha)?;
    let lhs = right_divide(l, &product(l, &q_beta, a)?, &product(l, q_alpha, a)?)?;
    let rhs = associator(l, AssociatorKind::Right, q_alpha, a, &q_ba)?;
    Ok(relative_distance(l, &lhs, &rhs))
}

/// How far the atlas's own transition at `p·a` is from `r_{(q_α,a)} q_{βα}(p)`;
/// zero exactly when both trivializations commute with the right action.
pub fn right_action_compatibility_defect(
    atlas: &BundleAtlas,
    alpha: &str,
    beta: &str,
    x: &[f64],
    q_alpha: &[f64],
    a: &[f64],
) -> Result<f64> {
    let l = &atlas.fiber;
    let p = TotalPoint::new(alpha, atlas.chart(alpha)?.normalize(x), q_alpha.to_vec());
    let q_ba = atlas.transition(alpha, beta, &p)?;
    let moved = right_action(atlas, &p, a)?;
    let lhs = atlas.transition(alpha, beta, &moved)?;
    let rhs = associator(l, AssociatorKind::Right, q_alpha, a, &q_ba)?;
    Ok(relative_distance(l, &lhs, &rhs))
}

fn wrap_into(x: f64, lo: f64) -> f64 {
    lo + (x - lo).rem_euclid(TAU)
}

fn c(v: &[f64]) -> Cplx<f64> {
    Cplx::from_slice(v)
}

/// Point of `S³ ⊂ ℂ²`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct S3Point {
    pub z1: Cplx<f64>,
    pub z2: Cplx<f64>,
}

impl S3Point {
    /// `z₁ = cos(θ/2) e^{iψ₁}`, `z₂ = sin(θ/2) e^{iψ₂}`.
    pub fn from_angles(theta: f64, psi1: f64, psi2: f64) -> Self {
        S3Point {
            z1: Cplx::cis(psi1).scale((theta / 2.0).cos()),
            z2: Cplx::cis(psi2).scale((theta / 2.0).sin()),
        }
    }

    pub fn norm_sqr(&self) -> f64 {
        self.z1.norm_sqr() + self.z2.norm_sqr()
    }

    pub fn distance(&self, o: &S3Point) -> f64 {
        (self.z1 - o.z1).abs().max((self.z2 - o.z2).abs())
    }
}

/// `π(z₁, z₂) = (Re z₁, Im z₁, 0)/√(1 − |z₂|²)`.
pub fn s3_project(z1: Cplx<f64>, z2: Cplx<f64>) -> Result<[f64; 3]> {
    let s2 = 1.0 - z2.norm_sqr();
    if s2 <= 1e-24 {
        return Err(Error::ProjectionSingular);
    }
    let s = s2.sqrt();
    Ok([z1.re / s, z1.im / s, 0.0])
}

/// The loop action on `S³`; on `ζ₋ = z₂/z₁` it is `ζ₋ ↦ (η + ζ₋)/(1 − η̄ζ₋)`
/// and it keeps the phase of `z₁`.
pub fn s3_right_action(p: &S3Point, eta: &[f64]) -> Result<S3Point> {
    let eta = c(eta);
    let z1_abs = p.z1.abs();
    // z₁(1 − η̄ z₂/z₁) = z₁ − η̄ z₂
    let w = p.z1 - eta.conj() * p.z2;
    let w_abs = w.abs();
    if z1_abs < SINGULAR_GUARD || w_abs < SINGULAR_GUARD {
        return Err(Error::DomainSingularity { denominator: z1_abs.min(w_abs) });
    }
    let norm = (1.0 + eta.norm_sqr()).sqrt();
    let modulus = w_abs / z1_abs;
    let z1 = p.z1.scale(modulus / norm);
    // z₂(1 + η z₁/z₂) = z₂ + η z₁, divided by (1 − η̄ z₂/z₁) = w/z₁
    let z2 = ((p.z2 + eta * p.z1) * p.z1 / w).scale(modulus / norm);
    Ok(S3Point { z1, z2 })
}

pub const S3_MINUS: &str = "-";
pub const S3_PLUS: &str = "+";

fn s3_chart_interval(chart: &str) -> Result<f64> {
    match chart {
        S3_MINUS => Ok(-PI),
        S3_PLUS => Ok(0.0),
        other => Err(Error::UnknownChart(other.to_string())),
    }
}

/// `Φ₋ = (ψ₁, tan(θ/2) e^{i(ψ₂−ψ₁)})`, `Φ₊ = (ψ₁, tan((θ + π/2)/2) e^{i(ψ₂−ψ₁)})`.
pub fn s3_trivialize(chart: &str, p: &S3Point) -> Result<TotalPoint> {
    let lo = s3_chart_interval(chart)?;
    if p.z1.abs() < SINGULAR_GUARD {
        return Err(Error::ProjectionSingular);
    }
    let psi1 = wrap_into(p.z1.arg(), lo);
    if psi1 <= lo {
        return Err(Error::NotInOverlap { from: chart.to_string(), to: chart.to_string() });
    }
    let theta = 2.0 * p.z2.abs().atan2(p.z1.abs());
    let chi = (p.z2 * p.z1.conj()).arg();
    let r = match chart {
        S3_MINUS => (theta / 2.0).tan(),
        _ => {
            let half = (theta + PI / 2.0) / 2.0;
            if (PI / 2.0 - half) < 1e-9 {
                return Err(Error::DomainSingularity { denominator: (PI / 2.0 - half).cos() });
            }
            half.tan()
        }
    };
    Ok(TotalPoint::new(chart, vec![psi1], Cplx::cis(chi).scale(r).to_vec()))
}

pub fn s3_untrivialize(p: &TotalPoint) -> Result<S3Point> {
    s3_chart_interval(&p.chart)?;
    let zeta = c(&p.fiber);
    let r = zeta.abs();
    let chi = zeta.arg();
    let theta = match p.chart.as_str() {
        S3_MINUS => 2.0 * r.atan(),
        _ => 2.0 * r.atan() - PI / 2.0,
    };
    if !(0.0..=PI).contains(&theta) {
        return Err(Error::OutOfDomain { loop_name: "qc".into() });
    }
    let psi1 = p.base[0];
    Ok(S3Point::from_angles(theta, psi1, psi1 + chi))
}

/// Checks that acting on `p` and reading the result through either
/// trivialization gives one and the same point of `S³`.
pub fn s3_action_chart_independence(p: &S3Point, eta: &[f64]) -> Result<f64> {
    let moved = s3_right_action(p, eta)?;
    let mut worst = s3_untrivialize(&s3_trivialize(S3_MINUS, &moved)?)?.distance(&moved);
    // Φ₊ only covers θ < π/2 and ψ₁ ∈ (0, 2π)
    match s3_trivialize(S3_PLUS, &moved) {
        Ok(t) => worst = worst.max(s3_untrivialize(&t)?.distance(&moved)),
        Err(Error::DomainSingularity { .. } | Error::NotInOverlap { .. }) => {}
        Err(e) => return Err(e),
    }
    // the fiber map induced in chart − is the left translation by η
    let before = s3_trivialize(S3_MINUS, p)?;
    let after = s3_trivialize(S3_MINUS, &moved)?;
    let l = loop_by_name("qc")?;
    let predicted = l.product_s(eta, &before.fiber)?;
    Ok(worst.max(l.coord_distance(&predicted, &after.fiber)))
}

/// The three-sphere as a bundle over the circle with fiber the sphere loop.
pub fn make_s3_bundle() -> BundleAtlas {
    let fiber = loop_by_name("qc").expect("catalog loop");
    let minus = BaseChart::new(S3_MINUS, 1, |x| x[0] > -PI && x[0] < PI, |x| vec![wrap_into(x[0], -PI)]);
    let plus = BaseChart::new(S3_PLUS, 1, |x| x[0] > 0.0 && x[0] < TAU, |x| vec![wrap_into(x[0], 0.0)]);
    let transition: TransitionFn = Arc::new(|from: &str, _to: &str, p: &TotalPoint| {
        let zeta = c(&p.fiber);
        if zeta.abs() < SINGULAR_GUARD {
            return Err(Error::DomainSingularity { denominator: zeta.abs() });
        }
        let u = Cplx::cis(zeta.arg());
        // q₊₋ = e^{iχ}; its inverse translation is by −e^{iχ}
        let q = if from == S3_MINUS { u } else { -u };
        Ok(LoopPoint(q.to_vec()))
    });
    let sampler: OverlapSampler = Arc::new(|from: &str, _to: &str, rng: &mut dyn RngCore| {
        let mut psi: f64 = rng.gen_range(0.05..PI - 0.05);
        if rng.gen_bool(0.5) {
            psi += PI;
        }
        let lo = if from == S3_MINUS { -PI } else { 0.0 };
        vec![wrap_into(psi, lo)]
    });
    BundleAtlas::new("s3-over-s1", fiber, vec![minus, plus], transition, sampler)
}

/// Half-width of the equatorial strip where the hemispheres overlap.
pub const STRIP_HALF_WIDTH: f64 = 0.1;
/// Angle `s` in the winding transition `e^{iφ} tan(n s/2)`.
pub const WINDING_SPREAD: f64 = 0.5;

/// `e^{iγ} tan(nθ/2)`.
pub fn winding_transition(n: i32, theta: f64, gamma: f64) -> Result<LoopPoint> {
    let half = n as f64 * theta / 2.0;
    let cos = half.cos();
    if cos.abs() < SINGULAR_GUARD {
        return Err(Error::DomainSingularity { denominator: cos.abs() });
    }
    Ok(LoopPoint(Cplx::cis(gamma).scale(half.tan()).to_vec()))
}

/// `(L_q)ⁿ ζ`.
pub fn iterate_left<L: SmoothLoop + ?Sized>(l: &L, q: &[f64], n: u32, zeta: &[f64]) -> Result<LoopPoint> {
    let mut z = zeta.to_vec();
    for _ in 0..n {
        z = l.product_s(q, &z)?;
    }
    Ok(LoopPoint(z))
}

/// `qⁿ` recovered from the two fiber coordinates,
/// `(ζ₊(1 − ζ₋ζ̄₊) − ζ₋(1 − ζ̄₋ζ₊)) / (1 − |ζ₋|²|ζ₊|²)`.
pub fn winding_from_coordinates(zeta_plus: &[f64], zeta_minus: &[f64]) -> Result<LoopPoint> {
    let (zp, zm) = (c(zeta_plus), c(zeta_minus));
    let den = 1.0 - zm.norm_sqr() * zp.norm_sqr();
    if den.abs() < SINGULAR_GUARD {
        return Err(Error::DomainSingularity { denominator: den.abs() });
    }
    let num = zp * (1.0 - zm * zp.conj()) - zm * (1.0 - zm.conj() * zp);
    Ok(LoopPoint(num.scale(1.0 / den).to_vec()))
}

pub const H_MINUS: &str = "H-";
pub const H_PLUS: &str = "H+";

/// The sphere-loop bundle over `S²` glued along the equator by the n-fold
/// left translation; base coordinates are `(θ, φ)`.
pub fn make_qs2_over_s2(n: i32) -> BundleAtlas {
    let fiber = loop_by_name("qc").expect("catalog loop");
    let norm = |x: &[f64]| vec![x[0], x[1].rem_euclid(TAU)];
    let minus = BaseChart::new(H_MINUS, 2, |x| (0.0..PI / 2.0 + STRIP_HALF_WIDTH).contains(&x[0]), norm);
    let plus = BaseChart::new(H_PLUS, 2, |x| x[0] > PI / 2.0 - STRIP_HALF_WIDTH && x[0] <= PI, norm);
    let transition: TransitionFn = Arc::new(move |from: &str, _to: &str, p: &TotalPoint| {
        let q = winding_transition(n, WINDING_SPREAD, p.base[1])?;
        if from == H_MINUS {
            Ok(q)
        } else {
            // left inverse: L_{−q} undoes L_q
            Ok(LoopPoint(vec![-q[0], -q[1]]))
        }
    });
    let sampler: OverlapSampler = Arc::new(|_from: &str, _to: &str, rng: &mut dyn RngCore| {
        let w = 0.99 * STRIP_HALF_WIDTH;
        vec![rng.gen_range(PI / 2.0 - w..PI / 2.0 + w), rng.gen_range(0.0..TAU)]
    });
    BundleAtlas::new(format!("qs2-over-s2:n={n}"), fiber, vec![minus, plus], transition, sampler)
}

/// Looks an atlas up by name: `s3-over-s1` or `qs2-over-s2:n=<int>`.
pub fn atlas_by_name(name: &str) -> Result<BundleAtlas> {
    let name = name.trim();
    if name == "s3-over-s1" {
        return Ok(make_s3_bundle());
    }
    name.strip_prefix("qs2-over-s2:n=")
        .and_then(|v| v.parse::<i32>().ok())
        .map(make_qs2_over_s2)
        .ok_or_else(|| Error::UnknownAtlas(name.to_string()))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn projection_of_equator_point() {
        let x = s3_project(Cplx::cis(0.7), Cplx::zero()).unwrap();
        assert!((x[0] - 0.7f64.cos()).abs() < 1e-15 && (x[1] - 0.7f64.sin()).abs() < 1e-15);
        assert!(matches!(s3_project(Cplx::zero(), Cplx::one()), Err(Error::ProjectionSingular)));
    }

    #[test]
    fn minus_chart_at_quarter_turn() {
        let p = S3Point::from_angles(PI / 2.0, 0.4, 0.4);
        let t = s3_trivialize(S3_MINUS, &p).unwrap();
        assert!((t.fiber[0] - 1.0).abs() < 1e-15 && t.fiber[1].abs() < 1e-15);
    }

    #[test]
    fn chart_change_reproduces_plus_trivialization() {
        let atlas = make_s3_bundle();
        let p = S3Point::from_angles(0.8, 0.5, 1.7);
        let m = s3_trivialize(S3_MINUS, &p).unwrap();
        let moved = change_chart(&atlas, &m, S3_PLUS).unwrap();
        let direct = s3_trivialize(S3_PLUS, &p).unwrap();
        assert!(atlas.fiber.coord_distance(&moved.fiber, &direct.fiber) < 1e-14);
        let back = change_chart(&atlas, &moved, S3_MINUS).unwrap();
        assert!(atlas.fiber.coord_distance(&back.fiber, &m.fiber) < 1e-14);
    }

    #[test]
    fn double_angle_winding() {
        let (theta, gamma) = (0.6, 1.1);
        let q = winding_transition(1, theta, gamma).unwrap();
        let q2 = iterate_left(&loop_by_name("qc").unwrap(), &q, 1, &q).unwrap();
        let want = winding_transition(2, theta, gamma).unwrap();
        assert!((q2[0] - want[0]).abs() < 1e-14 && (q2[1] - want[1]).abs() < 1e-14);
        assert!(winding_transition(1, PI, 0.0).is_err());
    }

    #[test]
    fn names() {
        assert_eq!(atlas_by_name("qs2-over-s2:n=3").unwrap().name, "qs2-over-s2:n=3");
        assert!(matches!(atlas_by_name("torus"), Err(Error::UnknownAtlas(_))));
    }

    #[test]
    fn outside_overlap() {
        let atlas = make_s3_bundle();
        let p = TotalPoint::new(S3_MINUS, vec![0.0], vec![0.3, 0.0]);
        assert!(matches!(change_chart(&atlas, &p, S3_PLUS), Err(Error::NotInOverlap { .. })));
    }
}
