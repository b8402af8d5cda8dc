//! Verification suites driven by a [`RunConfig`]; sample `i` of a sweep
//! always draws from the same generator stream, so reports do not depend
//! on thread scheduling.

use std::collections::BTreeMap;
use std::fmt;
use std::path::PathBuf;
use std::str::FromStr;
use std::time::Instant;

use rand::Rng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::bundle::{
    atlas_by_name, cocycle_residual, iterate_left, right_action_compatibility_defect, make_qs2_over_s2, make_s3_bundle, right_action, s3_action_chart_independence,
    s3_project, s3_right_action, s3_trivialize, transition_right_law_residual, winding_from_coordinates,
    winding_transition, change_chart, S3Point, H_MINUS, H_PLUS, S3_MINUS, S3_PLUS, WINDING_SPREAD,
};
use crate::complex::Cplx;
use crate::error::{Error, Result};
use crate::gauge::{
    bianchi_residual, commutator_residual, curvature, curvature_consistency_residual, curvature_gauge_residual,
    glue_connections, omega_annihilates_d_residual, right_invariance_defect, structure_equation_cases,
    vertical_reproduction_residual, CircleSectionMap, LocalConnectionForm, PartitionWeight, PolynomialFunction,
    PolynomialPotential, TrigPotential, WindingMap,
};
use crate::loop_core::{check_loop_axioms, indexed_rng, product, relative_distance, sample_pair, Region, SmoothLoop};
use crate::reconstruct::{
    batalin_axiom_check, integrate_lie_equation, maurer_cartan_residual, reconstruct_product, LiePath,
};
use crate::report::{Case, VerificationReport};
use crate::tangent::{
    adjoint_associator_law_residual, left_fundamental_basis, structure_functions, verify_ad_form_laws, TangentVector,
};
use crate::zoo::{loop_by_name, qsu2_product, LoopDescriptor, LoopKind};

pub const DEFAULT_SEED: u64 = 20240917;
pub const DEFAULT_SAMPLES: usize = 1000;
pub const DEFAULT_STEPS: usize = 256;

/// Default tolerance for each named check.
pub fn default_tolerances() -> BTreeMap<String, f64> {
    [
        ("axioms", 1e-11),
        ("structure", 1e-8),
        ("jacobi", 1e-6),
        ("ad_form", 1e-8),
        ("reconstruct", 1e-6),
        ("convergence_order", 0.3),
        ("maurer_cartan", 1e-8),
        ("batalin", 1e-10),
        ("qsu2", 1e-10),
        ("s3", 1e-10),
        ("winding", 1e-9),
        ("cocycle", 1e-10),
        ("commutator", 1e-6),
        ("omega_d", 1e-8),
        ("gauge_two_route", 1e-5),
        ("structure_eq", 1e-5),
        ("bianchi", 1e-4),
        ("abelian", 1e-12),
        ("vertical_reproduction", 1e-8),
    ]
    .into_iter()
    .map(|(k, v)| (k.to_string(), v))
    .collect()
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Suite {
    Axioms,
    Tangent,
    Jacobi,
    Reconstruct,
    Bundle,
    Gauge,
    All,
}

impl Suite {
    pub const EACH: [Suite; 6] = [Suite::Axioms, Suite::Tangent, Suite::Jacobi, Suite::Reconstruct, Suite::Bundle, Suite::Gauge];

    pub fn name(&self) -> &'static str {
        match self {
            Suite::Axioms => "axioms",
            Suite::Tangent => "tangent",
            Suite::Jacobi => "jacobi",
            Suite::Reconstruct => "reconstruct",
            Suite::Bundle => "bundle",
            Suite::Gauge => "gauge",
            Suite::All => "all",
        }
    }

    fn tag(&self) -> u64 {
        *self as u64 + 1
    }
}

impl fmt::Display for Suite {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Suite {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        Suite::EACH
            .into_iter()
            .chain([Suite::All])
            .find(|k| k.name() == s)
            .ok_or_else(|| Error::UnknownSuite(s.to_string()))
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct RunConfig {
    pub loop_name: String,
    pub samples: usize,
    pub seed: u64,
    pub tolerances: BTreeMap<String, f64>,
    pub steps: usize,
    pub report_path: Option<PathBuf>,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            loop_name: "qc".into(),
            samples: DEFAULT_SAMPLES,
            seed: DEFAULT_SEED,
            tolerances: default_tolerances(),
            steps: DEFAULT_STEPS,
            report_path: None,
        }
    }
}

impl RunConfig {
    pub fn tol(&self, name: &str) -> f64 {
        self.tolerances.get(name).copied().unwrap_or_else(|| default_tolerances()[name])
    }

    /// Rejects empty sweeps, zero step counts and non-positive tolerances.
    pub fn validate(&self) -> Result<()> {
        if self.samples == 0 {
            return Err(Error::InvalidConfig("samples must be positive".into()));
        }
        if self.steps == 0 {
            return Err(Error::InvalidConfig("steps must be positive".into()));
        }
        if let Some((k, v)) = self.tolerances.iter().find(|(_, v)| !(**v > 0.0)) {
            return Err(Error::InvalidConfig(format!("tolerance {k} = {v} is not positive")));
        }
        Ok(())
    }
}

/// Max over `n` seeded samples; a failed evaluation counts as an infinite residual.
fn sweep<F>(seed: u64, n: usize, f: F) -> f64
where
    F: Fn(&mut ChaCha8Rng) -> Result<f64> + Sync,
{
    (0..n as u64)
        .into_par_iter()
        .map(|i| {
            let mut rng = indexed_rng(seed, i);
            f(&mut rng).unwrap_or_else(|e| {
                log::debug!("sample {i} failed: {e}");
                f64::INFINITY
            })
        })
        .collect::<Vec<_>>()
        .into_iter()
        .fold(0.0, f64::max)
}

fn uniform(rng: &mut ChaCha8Rng, n: usize, h: f64) -> Vec<f64> {
    (0..n).map(|_| rng.gen_range(-h..h)).collect()
}

/// Runs one suite (or all of them) and writes the report if a path is set.
pub fn run_suite(config: &RunConfig, suite: Suite) -> Result<VerificationReport> {
    config.validate()?;
    let l = loop_by_name(&config.loop_name)?;
    let start = Instant::now();
    let mut report = match suite {
        Suite::All => {
            let mut all = VerificationReport::new("all");
            for s in Suite::EACH {
                all.absorb(run_one(config, &l, s));
            }
            all
        }
        s => run_one(config, &l, s),
    };
    report.wall_time = start.elapsed().as_secs_f64();
    if let Some(path) = &config.report_path {
        report.write(path)?;
    }
    Ok(report)
}

/// Cocycle and right-law sweep on one named atlas, over every ordered
/// chart triple and pair.
pub fn run_atlas_check(config: &RunConfig, atlas_name: &str) -> Result<VerificationReport> {
    config.validate()?;
    let atlas = atlas_by_name(atlas_name)?;
    let start = Instant::now();
    let ids = atlas.chart_ids();
    let fiber = atlas.fiber;
    let n = config.samples;
    let seed = config.seed.wrapping_mul(31).wrapping_add(0x41);
    let coc = sweep(seed, n, |rng| {
        let mut worst = 0.0f64;
        for a in &ids {
            for b in ids.iter().filter(|b| *b != a) {
                let x = atlas.sample_overlap(a, b, rng);
                let q = fiber.sample_point(rng, Region::Local);
                for g in &ids {
                    worst = worst.max(cocycle_residual(&atlas, a, b, g, &x, &q)?);
                }
                let r = fiber.sample_point(rng, Region::Local);
                worst = worst.max(transition_right_law_residual(&atlas, a, b, &x, &q, &r)?);
            }
        }
        Ok(worst)
    });
    let mut report = VerificationReport::new(format!("atlas:{}", atlas.name));
    report.push(Case::new("cocycle_and_right_law", coc, config.tol("cocycle"), n));
    report.wall_time = start.elapsed().as_secs_f64();
    if let Some(path) = &config.report_path {
        report.write(path)?;
    }
    Ok(report)
}

fn run_one(config: &RunConfig, l: &LoopDescriptor, suite: Suite) -> VerificationReport {
    let start = Instant::now();
    let seed = config.seed.wrapping_mul(31).wrapping_add(suite.tag());
    let mut report = match suite {
        Suite::Axioms => axioms_suite(config, l, seed),
        Suite::Tangent => tangent_suite(config, l, seed),
        Suite::Jacobi => jacobi_suite(config, l, seed),
        Suite::Reconstruct => reconstruct_suite(config, l, seed),
        Suite::Bundle => bundle_suite(config, seed),
        Suite::Gauge => gauge_suite(config, l, seed),
        Suite::All => unreachable!("expanded by run_suite"),
    };
    report.suite = suite.name().to_string();
    report.wall_time = start.elapsed().as_secs_f64();
    report
}

fn axioms_suite(config: &RunConfig, l: &LoopDescriptor, seed: u64) -> VerificationReport {
    let n = config.samples;
    let mut report = check_loop_axioms(l, n, seed);
    let tol = config.tol("axioms");
    for c in report.cases.iter_mut().filter(|c| c.tolerance > 0.0) {
        *c = Case::new(c.name.clone(), c.max_residual, tol, c.samples);
    }
    if matches!(l.spec().kind, LoopKind::Qc | LoopKind::Qsu2) {
        let qc = loop_by_name("qc").expect("catalog loop");
        let r = sweep(seed ^ 0x5, n, |rng| qsu2_representation_residual(&qc, rng));
        report.push(Case::new("qsu2_representation", r, config.tol("qsu2"), n));
    }
    report
}

/// Coordinate of the unitary product against the sphere-loop product, plus
/// unitarity and the real equal diagonal of the product matrix.
pub fn qsu2_representation_residual(qc: &LoopDescriptor, rng: &mut ChaCha8Rng) -> Result<f64> {
    let (a, b) = sample_pair(qc, rng, Region::Full);
    let (u, coord) = qsu2_product(Cplx::from_slice(&a), Cplx::from_slice(&b))?;
    let want = product(qc, &a, &b)?;
    Ok(relative_distance(qc, &coord.to_vec(), &want).max(u.unitarity_defect()).max(u.diagonal_defect()))
}

/// The printed structure functions in the real basis: for the sphere loop
/// `C^x_{xy} = −2 Im η`, `C^y_{xy} = 2 Re η`; the hyperbolic loop has the
/// opposite sign.
fn closed_form_structure(kind: LoopKind, eta: &[f64]) -> Option<[f64; 2]> {
    let s = match kind {
        LoopKind::Qc => 1.0,
        LoopKind::Qh2 => -1.0,
        _ => return None,
    };
    Some([-2.0 * s * eta[1], 2.0 * s * eta[0]])
}

fn tangent_suite(config: &RunConfig, l: &LoopDescriptor, seed: u64) -> VerificationReport {
    let n = config.samples;
    let d = l.dim();
    let mut report = VerificationReport::new("tangent");
    let e = l.identity();
    let at_e = left_fundamental_basis(l, &e)
        .map(|f| f.r.sub(&crate::linalg::Mat::identity(d)).max_abs())
        .unwrap_or(f64::INFINITY);
    report.push(Case::new("frame_at_identity", at_e, config.tol("structure"), 1));

    let anti = sweep(seed, n, |rng| Ok(structure_functions(l, &l.sample_point(rng, Region::Local))?.antisymmetry_defect()));
    report.push(Case::new("structure_antisymmetry", anti, config.tol("structure"), n));

    if closed_form_structure(l.spec().kind, &e).is_some() {
        let r = sweep(seed ^ 0x1, n, |rng| {
            let a = l.sample_point(rng, Region::Local);
            let c = structure_functions(l, &a)?;
            let want = closed_form_structure(l.spec().kind, &a).expect("checked above");
            Ok((c.get(0, 0, 1) - want[0]).abs().max((c.get(1, 0, 1) - want[1]).abs()))
        });
        report.push(Case::new("structure_closed_form", r, config.tol("structure"), n));
    }

    let (mut left, mut right, mut adj) = (0.0f64, 0.0f64, 0.0f64);
    let laws: Vec<Result<(f64, f64, f64)>> = (0..n as u64)
        .into_par_iter()
        .map(|i| {
            let mut rng = indexed_rng(seed ^ 0x2, i);
            let (a, b) = sample_pair(l, &mut rng, Region::Local);
            let v = TangentVector::new(a.clone(), uniform(&mut rng, d, 1.0));
            let (rl, rr) = verify_ad_form_laws(l, &b, &v)?;
            let ra = adjoint_associator_law_residual(l, &b, &a, &uniform(&mut rng, d, 1.0))?;
            Ok((rl, rr, ra))
        })
        .collect();
    for r in laws {
        let (a, b, c) = r.unwrap_or((f64::INFINITY, f64::INFINITY, f64::INFINITY));
        left = left.max(a);
        right = right.max(b);
        adj = adj.max(c);
    }
    let tol = config.tol("ad_form");
    report.push(Case::new("ad_form_left_translation", left, tol, n));
    report.push(Case::new("ad_form_right_translation", right, tol, n));
    report.push(Case::new("adjoint_associator_law", adj, tol, n));
    report
}

fn jacobi_suite(config: &RunConfig, l: &LoopDescriptor, seed: u64) -> VerificationReport {
    let n = config.samples;
    let mut report = VerificationReport::new("jacobi");
    let r = sweep(seed, n, |rng| crate::tangent::jacobi_residual(l, &l.sample_point(rng, Region::Local)));
    report.push(Case::new("modified_jacobi", r, config.tol("jacobi"), n));
    report
}

/// Step-halving errors against the closed-form product and the observed order
/// `log₂(err(n)/err(2n))` for `n = 4, 8, …, 256`.
pub fn convergence_table<L: SmoothLoop + ?Sized>(l: &L, a: &[f64], b: &[f64]) -> Result<Vec<(usize, f64)>> {
    let exact = l.product_s(a, b)?;
    let mut out = Vec::new();
    let mut steps = 4;
    while steps <= 256 {
        let p = integrate_lie_equation(l, &LiePath::ray(a, b, steps))?;
        out.push((steps, l.coord_distance(&p, &exact)));
        steps *= 2;
    }
    Ok(out)
}

/// Steps at which the observed order is read off; below this the leading
/// error term is still partly cancelled.
pub const ORDER_STEPS: usize = 64;
/// Error below which the integrator is taken to be exact on the benchmark pair.
pub const EXACT_INTEGRATION: f64 = 1e-14;

fn reconstruct_suite(config: &RunConfig, l: &LoopDescriptor, seed: u64) -> VerificationReport {
    let n = config.samples;
    let mut report = VerificationReport::new("reconstruct");
    let steps = config.steps;
    let r = sweep(seed, n, |rng| {
        let (a, b) = sample_pair(l, rng, Region::Local);
        let p = reconstruct_product(l, &a, &b, steps)?;
        Ok(relative_distance(l, &p, &product(l, &a, &b)?))
    });
    report.push(Case::new("reconstruct_product", r, config.tol("reconstruct"), n));

    let (a, b) = benchmark_pair(l);
    let order_case = match convergence_table(l, &a, &b) {
        Ok(table) => {
            for w in table.windows(2) {
                report.diagnostic(format!("error_ratio_{}_{}", w[0].0, w[1].0), w[0].1 / w[1].1);
            }
            let at = table.iter().position(|(s, _)| *s == ORDER_STEPS).expect("table covers ORDER_STEPS");
            let (coarse, fine) = (table[at].1, table[at + 1].1);
            if coarse <= EXACT_INTEGRATION {
                // straight-line flows (abelian loops) are integrated exactly;
                // there is no truncation error to take a ratio of
                report.diagnostic("integration_error_at_order_steps", coarse);
                0.0
            } else {
                let order = (coarse / fine).log2();
                report.diagnostic("observed_order", order);
                ((order - 4.0) / 4.0).abs()
            }
        }
        Err(_) => f64::INFINITY,
    };
    report.push(Case::new("convergence_order", order_case, config.tol("convergence_order"), 1));

    let mc = sweep(seed ^ 0x1, n, |rng| {
        let (a, b) = sample_pair(l, rng, Region::Local);
        maurer_cartan_residual(l, &b, &a)
    });
    report.push(Case::new("maurer_cartan", mc, config.tol("maurer_cartan"), n));

    let tol = config.tol("batalin");
    let bat = sweep(seed ^ 0x2, n, |rng| {
        let (a, b) = sample_pair(l, rng, Region::Local);
        let c = l.sample_point(rng, Region::Local);
        let rep = batalin_axiom_check(l, &a, &b, &c);
        Ok(rep.cases.iter().map(|c| c.max_residual).fold(0.0, f64::max))
    });
    report.push(Case::new("batalin_axioms", bat, tol, n));
    report
}

/// A fixed pair well inside the chart, away from the identity.
fn benchmark_pair(l: &LoopDescriptor) -> (Vec<f64>, Vec<f64>) {
    match l.spec().kind {
        LoopKind::Rz => (vec![0.03], vec![0.04]),
        LoopKind::Qhr => (vec![0.2, 0.1, -0.1, 0.15], vec![0.15, -0.2, 0.1, 0.05]),
        _ => (vec![0.5, 0.0], vec![0.5, 0.0]),
    }
}

fn s3_sample(rng: &mut ChaCha8Rng) -> S3Point {
    let theta = rng.gen_range(0.05..std::f64::consts::FRAC_PI_2 - 0.05);
    let psi1 = rng.gen_range(-3.0..3.0);
    S3Point::from_angles(theta, psi1, rng.gen_range(-3.0..3.0))
}

fn bundle_suite(config: &RunConfig, seed: u64) -> VerificationReport {
    let n = config.samples;
    let mut report = VerificationReport::new("bundle");
    let qc = loop_by_name("qc").expect("catalog loop");
    let s3_tol = config.tol("s3");
    let s3 = make_s3_bundle();

    let norm = sweep(seed, n, |rng| {
        let p = s3_sample(rng);
        let eta = qc.sample_point(rng, Region::Full);
        Ok((s3_right_action(&p, &eta)?.norm_sqr() - 1.0).abs())
    });
    report.push(Case::new("s3_norm_preservation", norm, s3_tol, n));

    let equi = sweep(seed ^ 0x1, n, |rng| {
        let p = s3_sample(rng);
        let eta = qc.sample_point(rng, Region::Full);
        let q = s3_right_action(&p, &eta)?;
        let (x0, x1) = (s3_project(p.z1, p.z2)?, s3_project(q.z1, q.z2)?);
        Ok(x0.iter().zip(&x1).fold(0.0, |m, (a, b)| m.max((a - b).abs())))
    });
    report.push(Case::new("s3_projection_equivariance", equi, s3_tol, n));

    let indep = sweep(seed ^ 0x2, n, |rng| {
        let p = s3_sample(rng);
        let eta = qc.sample_point(rng, Region::Local);
        s3_action_chart_independence(&p, &eta)
    });
    report.push(Case::new("s3_action_chart_independence", indep, s3_tol, n));

    let triv = sweep(seed ^ 0x3, n, |rng| {
        let mut p = s3_sample(rng);
        // keep ψ₁ inside both charts
        let psi = rng.gen_range(0.05..std::f64::consts::PI - 0.05);
        p.z1 = Cplx::cis(psi).scale(p.z1.abs());
        let m = s3_trivialize(S3_MINUS, &p)?;
        let moved = change_chart(&s3, &m, S3_PLUS)?;
        Ok(qc.coord_distance(&moved.fiber, &s3_trivialize(S3_PLUS, &p)?.fiber))
    });
    report.push(Case::new("s3_transition_reproduces_plus_chart", triv, s3_tol, n));

    let free = sweep(seed ^ 0x4, n, |rng| {
        let x = s3.sample_overlap(S3_MINUS, S3_PLUS, rng);
        let p = crate::bundle::TotalPoint::new(S3_MINUS, x, qc.sample_point(rng, Region::Local));
        let a = qc.sample_point(rng, Region::Local);
        let moved = right_action(&s3, &p, &a)?;
        let fixed = qc.coord_distance(&moved.fiber, &p.fiber) < 1e-12 && qc.coord_distance(&a, &qc.identity()) > 1e-6;
        Ok(if fixed { 1.0 } else { 0.0 })
    });
    report.push(Case::new("free_action_fixed_points", free, 0.0, n));

    let cocycle_tol = config.tol("cocycle");
    let winding_atlas = make_qs2_over_s2(2);
    let coc = sweep(seed ^ 0x5, n, |rng| {
        let mut worst = 0.0f64;
        for (atlas, a, b) in [(&s3, S3_MINUS, S3_PLUS), (&winding_atlas, H_MINUS, H_PLUS)] {
            let x = atlas.sample_overlap(a, b, rng);
            let q = qc.sample_point(rng, Region::Local);
            for (al, be, ga) in [(a, b, a), (a, b, b), (b, a, a), (b, a, b)] {
                let xa = if al == a { x.clone() } else { atlas.chart(al)?.normalize(&x) };
                worst = worst.max(cocycle_residual(atlas, al, be, ga, &xa, &q)?);
            }
            let ra = qc.sample_point(rng, Region::Local);
            worst = worst.max(transition_right_law_residual(atlas, a, b, &x, &q, &ra)?);
        }
        Ok(worst)
    });
    report.push(Case::new("cocycle_and_right_law", coc, cocycle_tol, n));
    let compat = sweep(seed ^ 0x8, n, |rng| {
        let x = s3.sample_overlap(S3_MINUS, S3_PLUS, rng);
        let q = qc.sample_point(rng, Region::Local);
        let a = qc.sample_point(rng, Region::Local);
        right_action_compatibility_defect(&s3, S3_MINUS, S3_PLUS, &x, &q, &a)
    });
    report.diagnostic("s3_transition_right_action_compatibility", compat);

    let winding_tol = config.tol("winding");
    let wind = sweep(seed ^ 0x6, n, |rng| {
        let theta = rng.gen_range(0.05..0.5);
        let gamma = rng.gen_range(0.0..std::f64::consts::TAU);
        let q = winding_transition(1, theta, gamma)?;
        let mut worst = 0.0f64;
        for k in 1..=5u32 {
            let iter = iterate_left(&qc, &q, k - 1, &q)?;
            let closed = winding_transition(k as i32, theta, gamma)?;
            worst = worst.max(relative_distance(&qc, &iter, &closed));
        }
        Ok(worst)
    });
    report.push(Case::new("winding_closed_form", wind, winding_tol, n));

    // the printed expression for qⁿ in terms of (ζ₊, ζ₋) is the right quotient ζ₊/ζ₋
    let coords = sweep(seed ^ 0x7, n, |rng| {
        let zm = qc.sample_point(rng, Region::Local);
        let x = winding_atlas.sample_overlap(H_MINUS, H_PLUS, rng);
        let p = crate::bundle::TotalPoint::new(H_MINUS, x, zm.clone());
        let zp = change_chart(&winding_atlas, &p, H_PLUS)?;
        let rec = winding_from_coordinates(&zp.fiber, &zm)?;
        let by_division = crate::loop_core::right_divide(&qc, &zp.fiber, &zm)?;
        Ok(relative_distance(&qc, &rec, &by_division))
    });
    report.push(Case::new("winding_coordinate_formula", coords, winding_tol, n));
    report
}

fn gauge_samples(config: &RunConfig) -> usize {
    config.samples.min(100)
}

fn gauge_suite(config: &RunConfig, l: &LoopDescriptor, seed: u64) -> VerificationReport {
    let n = gauge_samples(config);
    let d = l.dim();
    let m = 2;
    let mut report = VerificationReport::new("gauge");

    let form_at = |rng: &mut ChaCha8Rng, base: usize| -> Result<LocalConnectionForm<PolynomialPotential>> {
        LocalConnectionForm::new("U", PolynomialPotential::random(d, base, 2, 0.5, rng), *l)
    };
    let point = |rng: &mut ChaCha8Rng, base: usize| (uniform(rng, base, 0.5), l.sample_point(rng, Region::Local).0);

    let comm = sweep(seed, n, |rng| {
        let form = form_at(rng, m)?;
        let (x, y) = point(rng, m);
        let f = PolynomialFunction::random(m + d, 0.5, rng);
        commutator_residual(&form, 0, 1, &f, &x, &y)
    });
    report.push(Case::new("commutator", comm, config.tol("commutator"), n));

    let omd = sweep(seed ^ 0x1, n, |rng| {
        let form = form_at(rng, m)?;
        let (x, y) = point(rng, m);
        Ok(omega_annihilates_d_residual(&form, &x, &y, 0)?.max(omega_annihilates_d_residual(&form, &x, &y, 1)?))
    });
    report.push(Case::new("omega_annihilates_d", omd, config.tol("omega_d"), n));

    let cases: Vec<Result<[f64; 5]>> = (0..n as u64)
        .into_par_iter()
        .map(|i| {
            let mut rng = indexed_rng(seed ^ 0x2, i);
            let form = form_at(&mut rng, m)?;
            let (x, y) = point(&mut rng, m);
            let (bx, by) = (uniform(&mut rng, m, 1.0), uniform(&mut rng, m, 1.0));
            let (u, v) = (uniform(&mut rng, d, 1.0), uniform(&mut rng, d, 1.0));
            let c = structure_equation_cases(&form, &x, &y, &bx, &by, &u, &v)?;
            let at_e = structure_equation_cases(&form, &x, &l.identity(), &bx, &by, &u, &v)?;
            let cons = curvature_consistency_residual(&form, &x, &y)?;
            Ok([c.horizontal, c.vertical, c.mixed, cons, at_e.mixed])
        })
        .collect();
    let mut worst = [0.0f64; 5];
    for r in cases {
        let r = r.unwrap_or([f64::INFINITY; 5]);
        for k in 0..5 {
            worst[k] = worst[k].max(r[k]);
        }
    }
    let tol = config.tol("structure_eq");
    report.push(Case::new("structure_equation_horizontal", worst[0], tol, n));
    report.push(Case::new("structure_equation_vertical", worst[1], tol, n));
    report.push(Case::new("structure_equation_mixed", worst[2], tol, n));
    report.push(Case::new("curvature_consistency", worst[3], tol, n));
    report.diagnostic("structure_equation_mixed_at_identity", worst[4]);

    let bianchi = |y_at_e: bool, salt: u64| {
        sweep(seed ^ salt, n, move |rng| {
            let form = form_at(rng, 3)?;
            let (x, y) = point(rng, 3);
            let y = if y_at_e { l.identity().0 } else { y };
            let t: Vec<Vec<f64>> = (0..3).map(|_| uniform(rng, 3 + d, 1.0)).collect();
            bianchi_residual(&form, &x, &y, &t[0], &t[1], &t[2])
        })
    };
    report.push(Case::new("bianchi", bianchi(false, 0x3), config.tol("bianchi"), n));
    report.diagnostic("bianchi_at_identity", bianchi(true, 0x3));

    let qc = loop_by_name("qc").expect("catalog loop");
    let s3 = make_s3_bundle();
    let winding = make_qs2_over_s2(2);
    let winding_map = |inverse| WindingMap { n: 2, spread: WINDING_SPREAD, inverse };
    let winding_route = |rng: &mut ChaCha8Rng, y: &[f64]| -> Result<f64> {
        let form = LocalConnectionForm::new(H_MINUS, TrigPotential::random(2, 2, 0.5, rng), qc)?;
        let x = winding.sample_overlap(H_MINUS, H_PLUS, rng);
        curvature_gauge_residual(&winding, &form, H_PLUS, winding_map(true), winding_map(false), &x, y)
    };
    let s3_route = sweep(seed ^ 0x4, n, |rng| {
        let y = qc.sample_point(rng, Region::Local).0;
        let form = LocalConnectionForm::new(S3_MINUS, TrigPotential::random(2, 1, 0.5, rng), qc)?;
        let x = s3.sample_overlap(S3_MINUS, S3_PLUS, rng);
        let section = |inverse| CircleSectionMap { k: 1.0, inverse };
        curvature_gauge_residual(&s3, &form, S3_PLUS, section(true), section(false), &x, &y)
    });
    let winding_at_e = sweep(seed ^ 0x5, n, |rng| winding_route(rng, &qc.identity()));
    report.push(Case::new("gauge_two_route", s3_route.max(winding_at_e), config.tol("gauge_two_route"), n));
    let winding_random_y = sweep(seed ^ 0x6, n, |rng| {
        let y = qc.sample_point(rng, Region::Local).0;
        winding_route(rng, &y)
    });
    report.diagnostic("gauge_two_route_winding_random_fiber", winding_random_y);

    let abelian_fiber = loop_by_name("qhr:K=0").expect("catalog loop");
    let abelian = sweep(seed ^ 0x7, n, |rng| {
        let p = PolynomialPotential::random(4, 3, 2, 0.5, rng);
        let x = uniform(rng, 3, 0.5);
        let y = abelian_fiber.sample_point(rng, Region::Local).0;
        let curl = p.curl(&x);
        let form = LocalConnectionForm::new("U", p, abelian_fiber)?;
        let f = curvature(&form, &x, &y)?;
        let mut worst = 0.0f64;
        for (i, c) in curl.iter().enumerate() {
            worst = worst.max(f.f[i].sub(c).max_abs());
        }
        Ok(worst)
    });
    report.push(Case::new("abelian_curl", abelian, config.tol("abelian"), n));

    let partition = vec![
        (S3_MINUS.to_string(), PartitionWeight::CosSquaredHalf),
        (S3_PLUS.to_string(), PartitionWeight::SinSquaredHalf),
    ];
    let (mut vert, mut rinv) = (0.0f64, 0.0f64);
    let glue: Vec<Result<(f64, f64)>> = (0..n as u64)
        .into_par_iter()
        .map(|i| {
            let mut rng = indexed_rng(seed ^ 0x8, i);
            let forms = vec![
                LocalConnectionForm::new(S3_MINUS, TrigPotential::random(2, 1, 0.5, &mut rng), qc)?,
                LocalConnectionForm::new(S3_PLUS, TrigPotential::random(2, 1, 0.5, &mut rng), qc)?,
            ];
            let x = s3.sample_overlap(S3_MINUS, S3_PLUS, &mut rng);
            let glued = glue_connections(&s3, &partition, &forms, std::slice::from_ref(&x))?;
            let y = qc.sample_point(&mut rng, Region::Local).0;
            let u = uniform(&mut rng, 2, 1.0);
            let mut v = 0.0f64;
            for g in &glued {
                v = v.max(vertical_reproduction_residual(g, &x, &y, &u)?);
            }
            let a = qc.sample_point(&mut rng, Region::Local).0;
            let zv = uniform(&mut rng, 3, 1.0);
            Ok((v, right_invariance_defect(&glued[0], &x, &y, &a, &zv)?))
        })
        .collect();
    for r in glue {
        let (a, b) = r.unwrap_or((f64::INFINITY, f64::INFINITY));
        vert = vert.max(a);
        rinv = rinv.max(b);
    }
    report.push(Case::new("glued_vertical_reproduction", vert, config.tol("vertical_reproduction"), n));
    report.diagnostic("glued_right_invariance_defect", rinv);
    report
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn suite_names_round_trip() {
        for s in Suite::EACH {
            assert_eq!(s.name().parse::<Suite>().unwrap(), s);
        }
        assert!(matches!("nope".parse::<Suite>(), Err(Error::UnknownSuite(_))));
    }

    #[test]
    fn unknown_loop_is_reported() {
        let cfg = RunConfig { loop_name: "octonion".into(), ..Default::default() };
        assert!(matches!(run_suite(&cfg, Suite::Axioms), Err(Error::UnknownLoop(_))));
    }

    #[test]
    fn zero_samples_rejected() {
        let cfg = RunConfig { samples: 0, ..Default::default() };
        assert!(run_suite(&cfg, Suite::Axioms).is_err());
    }
}
