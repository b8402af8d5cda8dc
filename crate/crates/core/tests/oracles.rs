//! Library results against independent closed forms and finite differences.

use loopbundle_core::bundle::*;
use loopbundle_core::complex::{CQuat, Cplx};
use loopbundle_core::gauge::*;
use loopbundle_core::linalg::Mat;
use loopbundle_core::loop_core::{indexed_rng, left_divide, newton_div, product, right_divide, sample_pair, Side};
use loopbundle_core::reconstruct::reconstruct_product;
use loopbundle_core::tangent::{right_quasi_invariant_basis, right_structure_functions, structure_functions, left_fundamental_basis};
use loopbundle_core::zoo::{QcLoop, QhrLoop};
use loopbundle_core::{loop_by_name, Region, SmoothLoop};
use num_complex::Complex64 as C;
use rand::Rng;

fn c(v: &[f64]) -> C {
    C::new(v[0], v[1])
}

/// `[E_x, E_y] = −i(c_a + c_b) E_x + (c_b − c_a) E_y` for `[Γ_a, Γ_b] = c_a Γ_a + c_b Γ_b`,
/// where `Γ_a, Γ_b` act on `η, η̄` and `E_x = Γ_a + Γ_b`, `E_y = i(Γ_a − Γ_b)`.
fn complex_to_real(ca: C, cb: C) -> [f64; 2] {
    let cx = -C::i() * (ca + cb);
    let cy = cb - ca;
    assert!(cx.im.abs() < 1e-12 && cy.im.abs() < 1e-12);
    [cx.re, cy.re]
}

#[test]
fn qc_structure_functions_match_complex_closed_form() {
    let l = loop_by_name("qc").unwrap();
    for i in 0..200 {
        let mut rng = indexed_rng(1, i);
        let a = l.sample_point(&mut rng, Region::Local);
        let eta = c(&a);
        let want = complex_to_real(-eta, eta.conj());
        let got = structure_functions(&l, &a).unwrap();
        assert!((got.get(0, 0, 1) - want[0]).abs() < 1e-10, "{a:?}");
        assert!((got.get(1, 0, 1) - want[1]).abs() < 1e-10, "{a:?}");
        assert!(got.get(0, 0, 0).abs() < 1e-12 && got.get(1, 1, 1).abs() < 1e-12);
    }
}

#[test]
fn qh2_bracket_matches_complex_closed_form() {
    let l = loop_by_name("qh2").unwrap();
    for i in 0..200 {
        let mut rng = indexed_rng(2, i);
        let a = l.sample_point(&mut rng, Region::Local);
        let eta = c(&a);
        let want = complex_to_real(eta, -eta.conj());
        let got = structure_functions(&l, &a).unwrap();
        assert!((got.get(0, 0, 1) - want[0]).abs() < 1e-10);
        assert!((got.get(1, 0, 1) - want[1]).abs() < 1e-10);
    }
}

#[test]
fn qc_left_frame_is_conformal_scaling() {
    // ∂_b (a + b)/(1 − ā b) at b = 0 is (1 + |a|²)
    let a = [0.4, -0.7];
    let r = left_fundamental_basis(&QcLoop, &a).unwrap().r;
    let s = 1.0 + 0.4 * 0.4 + 0.7 * 0.7;
    assert!(r.sub(&Mat::identity(2).scale(s)).max_abs() < 1e-14);
}

/// `δ = δa + y² δā`, the derivative of `(a + y)/(1 − ā y)` in `a` at `a = 0`.
fn qc_right_frame(y: &[f64]) -> [[f64; 2]; 2] {
    let y2 = c(y) * c(y);
    let cols = [C::new(1.0, 0.0) + y2, C::i() + y2 * C::new(0.0, -1.0)];
    [[cols[0].re, cols[1].re], [cols[0].im, cols[1].im]]
}

#[test]
fn qc_right_frame_matches_hand_differentiation() {
    for y in [[0.0, 0.0], [0.3, -0.2], [-0.45, 0.1]] {
        let want = qc_right_frame(&y);
        let got = right_quasi_invariant_basis(&QcLoop, &y).unwrap().r;
        for r in 0..2 {
            for k in 0..2 {
                assert!((got[(r, k)] - want[r][k]).abs() < 1e-14);
            }
        }
    }
}

/// Right frame fields `Γ̄_a = ∂_η + η̄²∂_η̄`, `Γ̄_b = ∂_η̄ + η²∂_η` with
/// `[Γ̄_a, Γ̄_b] = 2η∂_η − 2η̄∂_η̄ = (2η Γ̄_a − 2η̄ Γ̄_b)/(1 − |η|²)`.
fn qc_right_bracket(eta: C) -> (C, C) {
    let s = 1.0 - eta.norm_sqr();
    (2.0 * eta / s, -2.0 * eta.conj() / s)
}

#[test]
fn qc_right_structure_functions_match_hand_bracket() {
    for y in [[0.3, -0.2], [-0.1, 0.4], [0.25, 0.25]] {
        let (ca, cb) = qc_right_bracket(c(&y));
        let want = complex_to_real(ca, cb);
        let got = right_structure_functions(&QcLoop, &y).unwrap();
        assert!((got.get(0, 0, 1) - want[0]).abs() < 1e-12, "{y:?}");
        assert!((got.get(1, 0, 1) - want[1]).abs() < 1e-12, "{y:?}");
    }
}

#[test]
fn frames_match_central_differences() {
    let h = 1e-5;
    for name in ["qc", "qh2", "qhr:K=4", "qsu2", "rz"] {
        let l = loop_by_name(name).unwrap();
        let mut rng = indexed_rng(3, 0);
        let a = l.sample_point(&mut rng, Region::Local);
        let d = l.dim();
        let r = left_fundamental_basis(&l, &a).unwrap().r;
        let e = l.identity();
        for k in 0..d {
            let (mut p, mut m) = (e.to_vec(), e.to_vec());
            p[k] += h;
            m[k] -= h;
            let fp = l.product_s(&a, &p).unwrap();
            let fm = l.product_s(&a, &m).unwrap();
            for row in 0..d {
                let mut diff = vec![fp[row] - fm[row]];
                l.wrap_diff(&mut diff);
                assert!((diff[0] / (2.0 * h) - r[(row, k)]).abs() < 1e-8, "{name}");
            }
        }
    }
}

#[test]
fn qhr_left_division_closed_form() {
    // a·x = b  ⇔  x = (1 − (K/4) b a⁺)⁻¹ (b − a)
    let l = QhrLoop { k: 4.0 };
    for i in 0..100 {
        let mut rng = indexed_rng(4, i);
        let (a, b) = sample_pair(&l, &mut rng, Region::Full);
        let (qa, qb) = (CQuat::from_real_coords(&a[..]), CQuat::from_real_coords(&b[..]));
        let one = CQuat::scalar(Cplx::one());
        let x = (one - (qb * qa.conj()).scale(Cplx::real(1.0))).inverse() * (qb - qa);
        let got = left_divide(&l, &a, &b).unwrap();
        let want = x.real_coords();
        assert!(got.iter().zip(&want).all(|(p, q)| (p - q).abs() < 1e-11), "{a:?} {b:?}");
    }
}

#[test]
fn qc_divisions_agree_with_newton() {
    let l = QcLoop;
    for i in 0..100 {
        let mut rng = indexed_rng(5, i);
        let (a, b) = sample_pair(&l, &mut rng, Region::Local);
        let ld = left_divide(&l, &a, &b).unwrap();
        let nl = newton_div(&l, Side::Left, &a[..], &b[..]).unwrap();
        let rd = right_divide(&l, &b, &a).unwrap();
        let nr = newton_div(&l, Side::Right, &a[..], &b[..]).unwrap();
        assert!(ld.iter().zip(&nl).all(|(p, q)| (p - q).abs() < 1e-12));
        assert!(rd.iter().zip(&nr).all(|(p, q)| (p - q).abs() < 1e-12));
    }
}

#[test]
fn qc_product_closed_form() {
    let (a, b) = ([0.5, 0.0], [0.5, 0.0]);
    let p = product(&QcLoop, &a, &b).unwrap();
    assert!((p[0] - 4.0 / 3.0).abs() < 1e-15 && p[1] == 0.0);
}

#[test]
fn reconstruction_reproduces_mobius_products() {
    for name in ["qc", "qh2"] {
        let l = loop_by_name(name).unwrap();
        for i in 0..20 {
            let mut rng = indexed_rng(6, i);
            let (a, b) = sample_pair(&l, &mut rng, Region::Local);
            let (za, zb) = (c(&a), c(&b));
            let s = if name == "qc" { 1.0 } else { -1.0 };
            let want = (za + zb) / (1.0 - s * za.conj() * zb);
            let got = reconstruct_product(&l, &a, &b, 256).unwrap();
            assert!((c(&got) - want).norm() < 1e-6, "{name} {a:?} {b:?}");
        }
    }
}

#[test]
fn s3_action_preserves_norm_and_fiber() {
    let qc = loop_by_name("qc").unwrap();
    for i in 0..100 {
        let mut rng = indexed_rng(7, i);
        let theta = rng.gen_range(0.1..1.4);
        let p = S3Point::from_angles(theta, rng.gen_range(-3.0..3.0), rng.gen_range(-3.0..3.0));
        let eta = qc.sample_point(&mut rng, Region::Full);
        let q = s3_right_action(&p, &eta).unwrap();
        assert!((q.norm_sqr() - 1.0).abs() < 1e-12);
        let (x0, x1) = (s3_project(p.z1, p.z2).unwrap(), s3_project(q.z1, q.z2).unwrap());
        assert!((x0[0] - x1[0]).abs() < 1e-12 && (x0[1] - x1[1]).abs() < 1e-12);
        // on ζ₋ = z₂/z₁ the action is the Möbius map (η + ζ)/(1 − η̄ζ)
        let zm = C::new(p.z2.re, p.z2.im) / C::new(p.z1.re, p.z1.im);
        let e = c(&eta);
        let want = (e + zm) / (1.0 - e.conj() * zm);
        let got = C::new(q.z2.re, q.z2.im) / C::new(q.z1.re, q.z1.im);
        assert!((want - got).norm() < 1e-11 * want.norm().max(1.0));
    }
}

#[test]
fn winding_transition_is_iterated_translation() {
    let qc = loop_by_name("qc").unwrap();
    let (theta, gamma) = (0.3, 2.1);
    let q = C::from_polar((theta / 2.0f64).tan(), gamma);
    // q^n by repeated Möbius composition in test arithmetic
    let mut acc = C::new(0.0, 0.0);
    for n in 1..=5 {
        acc = (q + acc) / (1.0 - q.conj() * acc);
        let lib = iterate_left(&qc, &[q.re, q.im], n, &[0.0, 0.0]).unwrap();
        assert!((c(&lib) - acc).norm() < 1e-13);
        let closed = winding_transition(n as i32, theta, gamma).unwrap();
        assert!((c(&closed) - acc).norm() < 1e-12 * acc.norm().max(1.0), "n = {n}");
    }
}

#[test]
fn s3_transition_matches_plus_chart() {
    let atlas = make_s3_bundle();
    let p = S3Point::from_angles(0.9, 1.2, 2.5);
    let m = s3_trivialize(S3_MINUS, &p).unwrap();
    // q₊₋ = e^{i(ψ₂ − ψ₁)}
    let q = atlas.transition(S3_MINUS, S3_PLUS, &m).unwrap();
    assert!((c(&q) - C::from_polar(1.0, 1.3)).norm() < 1e-14);
    let plus = change_chart(&atlas, &m, S3_PLUS).unwrap();
    let want = C::from_polar(((0.9 + std::f64::consts::FRAC_PI_2) / 2.0f64).tan(), 1.3);
    assert!((c(&plus.fiber) - want).norm() < 1e-13);
}

#[test]
fn covariant_derivative_of_linear_function() {
    // f = c·z, A constant: D_μ f = c_μ − A^i_μ (R̄ᵀ c_y)_i with R̄ by hand
    let qc = loop_by_name("qc").unwrap();
    let a = Mat::from_rows(2, 2, vec![0.3, -0.1, 0.2, 0.5]);
    let form = LocalConnectionForm::new("U", PolynomialPotential::constant(&a), qc).unwrap();
    let cvec = vec![0.7, -0.4, 1.1, 0.6];
    let f = PolynomialFunction::linear(cvec.clone());
    let (x, y) = ([0.1, 0.2], [0.3, -0.2]);
    let rbar = qc_right_frame(&y);
    for mu in 0..2 {
        let mut want = cvec[mu];
        for i in 0..2 {
            let li = rbar[0][i] * cvec[2] + rbar[1][i] * cvec[3];
            want -= a[(i, mu)] * li;
        }
        let got = covariant_derivative_apply(&form, mu, &f, &x, &y).unwrap();
        assert!((got - want).abs() < 1e-14);
    }
}

#[test]
fn constant_potential_curvature_uses_right_structure() {
    let qc = loop_by_name("qc").unwrap();
    let a = Mat::from_rows(2, 2, vec![0.3, -0.1, 0.2, 0.5]);
    let form = LocalConnectionForm::new("U", PolynomialPotential::constant(&a), qc).unwrap();
    let y = [0.3, -0.2];
    let (ca, cb) = qc_right_bracket(c(&y));
    let cr = complex_to_real(ca, cb);
    // only C^i_{01} = −C^i_{10} are nonzero in two dimensions
    let f = curvature(&form, &[0.1, 0.2], &y).unwrap();
    let cross = a[(0, 0)] * a[(1, 1)] - a[(1, 0)] * a[(0, 1)];
    for i in 0..2 {
        assert!((f.get(i, 0, 1) + cross * cr[i]).abs() < 1e-13);
    }
}

#[test]
fn linear_potential_curl_by_hand() {
    // A^0_0 = 0, A^0_1 = 2 x⁰ on an abelian fiber: F^0_{01} = ∂_0 A^0_1 − ∂_1 A^0_0 = 2
    let l = loop_by_name("qhr:K=0").unwrap();
    let mut p = PolynomialPotential::constant(&Mat::zeros(4, 2));
    p.c1[2] = 2.0; // [i = 0][μ = 1][k = 0]
    let form = LocalConnectionForm::new("U", p, l).unwrap();
    let f = curvature(&form, &[0.3, 0.4], &[0.1, 0.0, 0.0, 0.0]).unwrap();
    assert!((f.get(0, 0, 1) - 2.0).abs() < 1e-15 && (f.get(0, 1, 0) + 2.0).abs() < 1e-15);
}

#[test]
fn gauge_transform_identity_and_constant() {
    let qc = loop_by_name("qc").unwrap();
    let mut rng = indexed_rng(8, 0);
    let p = PolynomialPotential::random(2, 2, 2, 0.5, &mut rng);
    let form = LocalConnectionForm::new("U", p, qc).unwrap();
    let x = [0.2, -0.1];
    let same = gauge_transform(&form, "V", ConstantMap(vec![0.0, 0.0]), ConstantMap(vec![0.0, 0.0]));
    let (a0, a1) = (form.potential.eval(&x).unwrap(), same.potential.eval(&x).unwrap());
    assert!(a0.sub(&a1).max_abs() < 1e-15);
    // constant q: no θ term, the potential is rotated by Ad⁻¹_{q}(q⁻)_*
    let q = vec![0.3, 0.1];
    let qinv = left_divide(&qc, &q, &[0.0, 0.0]).unwrap().0;
    let rot = gauge_transform(&form, "V", ConstantMap(q.clone()), ConstantMap(qinv.clone()));
    let m = loopbundle_core::loop_core::ad_inverse_differential(&qc, &q, &qinv).unwrap();
    assert!(rot.potential.eval(&x).unwrap().sub(&m.mul(&a0)).max_abs() < 1e-14);
}

#[test]
fn single_chart_partition_returns_input() {
    let atlas = make_s3_bundle();
    let qc = loop_by_name("qc").unwrap();
    let mut rng = indexed_rng(9, 0);
    let p = TrigPotential::random(2, 1, 0.5, &mut rng);
    let form = LocalConnectionForm::new(S3_MINUS, p, qc).unwrap();
    let glued = glue_connections(&atlas, &[(S3_MINUS.to_string(), PartitionWeight::One)], std::slice::from_ref(&form), &[vec![0.5]]).unwrap();
    let x = [0.5];
    assert!(glued[0].potential.eval(&x).unwrap().sub(&form.potential.eval(&x).unwrap()).max_abs() == 0.0);
}
