//! Complex numbers and complex quaternions over a generic [`Scalar`].

use std::ops::{Add, Div, Mul, Neg, Sub};

use crate::scalar::Scalar;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Cplx<S> {
    pub re: S,
    pub im: S,
}

impl<S: Scalar> Cplx<S> {
    #[inline]
    pub fn new(re: S, im: S) -> Self {
        Cplx { re, im }
    }
    pub fn real(re: S) -> Self {
        Cplx { re, im: S::zero() }
    }
    pub fn zero() -> Self {
        Self::real(S::zero())
    }
    pub fn one() -> Self {
        Self::real(S::one())
    }
    pub fn i() -> Self {
        Cplx { re: S::zero(), im: S::one() }
    }
    /// Reads `(re, im)` from a two-component slice.
    pub fn from_slice(v: &[S]) -> Self {
        Cplx { re: v[0], im: v[1] }
    }
    pub fn to_vec(self) -> Vec<S> {
        vec![self.re, self.im]
    }
    pub fn conj(self) -> Self {
        Cplx { re: self.re, im: -self.im }
    }
    pub fn norm_sqr(self) -> S {
        self.re * self.re + self.im * self.im
    }
    pub fn abs(self) -> S {
        self.norm_sqr().sqrt()
    }
    pub fn arg(self) -> S {
        self.im.atan2(self.re)
    }
    pub fn scale(self, s: S) -> Self {
        Cplx { re: self.re * s, im: self.im * s }
    }
    pub fn recip(self) -> Self {
        let d = self.norm_sqr();
        Cplx { re: self.re / d, im: -self.im / d }
    }
    /// `e^{iθ}`.
    pub fn cis(theta: S) -> Self {
        Cplx { re: theta.cos(), im: theta.sin() }
    }
    /// Magnitude of the real parts, used by singularity guards.
    pub fn abs_re(self) -> f64 {
        self.re.re().hypot(self.im.re())
    }
}

impl<S: Scalar> Add for Cplx<S> {
    type Output = Self;
    #[inline]
    fn add(self, o: Self) -> Self {
        Cplx { re: self.re + o.re, im: self.im + o.im }
    }
}
impl<S: Scalar> Sub for Cplx<S> {
    type Output = Self;
    #[inline]
    fn sub(self, o: Self) -> Self {
        Cplx { re: self.re - o.re, im: self.im - o.im }
    }
}
impl<S: Scalar> Mul for Cplx<S> {
    type Output = Self;
    #[inline]
    fn mul(self, o: Self) -> Self {
        Cplx { re: self.re * o.re - self.im * o.im, im: self.re * o.im + self.im * o.re }
    }
}
impl<S: Scalar> Div for Cplx<S> {
    type Output = Self;
    #[inline]
    fn div(self, o: Self) -> Self {
        let d = o.norm_sqr();
        Cplx {
            re: (self.re * o.re + self.im * o.im) / d,
            im: (self.im * o.re - self.re * o.im) / d,
        }
    }
}
impl<S: Scalar> Neg for Cplx<S> {
    type Output = Self;
    #[inline]
    fn neg(self) -> Self {
        Cplx { re: -self.re, im: -self.im }
    }
}
impl<S: Scalar> Add<f64> for Cplx<S> {
    type Output = Self;
    #[inline]
    fn add(self, o: f64) -> Self {
        Cplx { re: self.re + o, im: self.im }
    }
}
impl<S: Scalar> Sub<Cplx<S>> for f64 {
    type Output = Cplx<S>;
    #[inline]
    fn sub(self, o: Cplx<S>) -> Cplx<S> {
        Cplx { re: -o.re + self, im: -o.im }
    }
}

/// Quaternion `a + b i + c j + d k` with complex coefficients.
///
/// Real quaternionic points `ζ⁰ + i(ζ¹ i + ζ² j + ζ³ k)` sit inside as
/// `a = ζ⁰`, `b = iζ¹`, `c = iζ²`, `d = iζ³`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct CQuat<S> {
    pub a: Cplx<S>,
    pub b: Cplx<S>,
    pub c: Cplx<S>,
    pub d: Cplx<S>,
}

impl<S: Scalar> CQuat<S> {
    pub fn scalar(a: Cplx<S>) -> Self {
        let z = Cplx::zero();
        CQuat { a, b: z, c: z, d: z }
    }

    /// Embeds the real coordinates `(ζ⁰, ζ¹, ζ², ζ³)`.
    pub fn from_real_coords(z: &[S]) -> Self {
        let zero = S::zero();
        CQuat {
            a: Cplx::new(z[0], zero),
            b: Cplx::new(zero, z[1]),
            c: Cplx::new(zero, z[2]),
            d: Cplx::new(zero, z[3]),
        }
    }

    /// Inverse of [`from_real_coords`](Self::from_real_coords); the
    /// discarded parts are measured by [`real_coords_defect`](Self::real_coords_defect).
    pub fn real_coords(&self) -> Vec<S> {
        vec![self.a.re, self.b.im, self.c.im, self.d.im]
    }

    pub fn real_coords_defect(&self) -> f64 {
        [self.a.im, self.b.re, self.c.re, self.d.re]
            .iter()
            .fold(0.0, |m, v| m.max(v.re().abs()))
    }

    /// Quaternionic conjugate `q⁺`.
    pub fn conj(&self) -> Self {
        CQuat { a: self.a, b: -self.b, c: -self.c, d: -self.d }
    }

    /// `q q⁺ = a² + b² + c² + d²`, a complex scalar.
    pub fn norm(&self) -> Cplx<S> {
        self.a * self.a + self.b * self.b + self.c * self.c + self.d * self.d
    }

    pub fn scale(&self, s: Cplx<S>) -> Self {
        CQuat { a: self.a * s, b: self.b * s, c: self.c * s, d: self.d * s }
    }

    pub fn inverse(&self) -> Self {
        self.conj().scale(self.norm().recip())
    }
}

impl<S: Scalar> Add for CQuat<S> {
    type Output = Self;
    fn add(self, o: Self) -> Self {
        CQuat { a: self.a + o.a, b: self.b + o.b, c: self.c + o.c, d: self.d + o.d }
    }
}
impl<S: Scalar> Sub for CQuat<S> {
    type Output = Self;
    fn sub(self, o: Self) -> Self {
        CQuat { a: self.a - o.a, b: self.b - o.b, c: self.c - o.c, d: self.d - o.d }
    }
}
impl<S: Scalar> Mul for CQuat<S> {
    type Output = Self;
    /// Hamilton product with `ij = k`, `jk = i`, `ki = j`.
    fn mul(self, o: Self) -> Self {
        let (a1, b1, c1, d1) = (self.a, self.b, self.c, self.d);
        let (a2, b2, c2, d2) = (o.a, o.b, o.c, o.d);
        CQuat {
            a: a1 * a2 - b1 * b2 - c1 * c2 - d1 * d2,
            b: a1 * b2 + b1 * a2 + c1 * d2 - d1 * c2,
            c: a1 * c2 - b1 * d2 + c1 * a2 + d1 * b2,
            d: a1 * d2 + b1 * c2 - c1 * b2 + d1 * a2,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    type C = Cplx<f64>;

    #[test]
    fn division_inverts_multiplication() {
        let a = C::new(0.3, -1.2);
        let b = C::new(-0.7, 0.4);
        let q = (a * b) / b;
        assert!((q - a).abs() < 1e-15);
    }

    #[test]
    fn quaternion_units() {
        let z = C::zero();
        let o = C::one();
        let i = CQuat { a: z, b: o, c: z, d: z };
        let j = CQuat { a: z, b: z, c: o, d: z };
        let k = CQuat { a: z, b: z, c: z, d: o };
        assert_eq!(i * j, k);
        assert_eq!(j * k, i);
        assert_eq!(k * i, j);
        assert_eq!((i * i).a, -o);
    }

    #[test]
    fn real_embedding_norm_is_lorentzian() {
        let q = CQuat::from_real_coords(&[1.0, 0.2, -0.3, 0.4]);
        let n = q.norm();
        assert!((n.re - (1.0 - 0.04 - 0.09 - 0.16)).abs() < 1e-15);
        assert!(n.im.abs() < 1e-15);
        let p = q * q.inverse();
        assert!((p.a - C::one()).abs() < 1e-15 && p.b.abs() < 1e-15);
    }
}
