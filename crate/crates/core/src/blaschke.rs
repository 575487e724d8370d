//! Finite Blaschke products `c * prod phi_a(z)^m` with `phi_a(z) = (a - z) / (1 - conj(a) z)`.

use std::fmt;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::{poly, polyroots, Cplx};

/// Zeros closer than this are treated as one repeated zero.
pub const MERGE_TOL: f64 = 1e-10;
const DISK_MARGIN: f64 = 1e-12;
const UNIMODULAR_TOL: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Zero {
    pub point: Cplx,
    pub multiplicity: usize,
}

/// A finite Blaschke product in canonical form: zeros sorted by `(re, im)`,
/// coincident zeros merged into a multiplicity.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BlaschkeProduct {
    zeros: Vec<Zero>,
    unimodular: Cplx,
}

/// `phi = P / Q` with `Q(0) = 1`.
#[derive(Debug, Clone, PartialEq)]
pub struct RationalRep {
    pub p_coeffs: Vec<Cplx>,
    pub q_coeffs: Vec<Cplx>,
}

impl RationalRep {
    pub fn eval(&self, z: Cplx) -> Cplx {
        poly::eval(&self.p_coeffs, z) / poly::eval(&self.q_coeffs, z)
    }
}

pub(crate) fn lex_cmp(a: &Cplx, b: &Cplx) -> std::cmp::Ordering {
    a.re.total_cmp(&b.re).then(a.im.total_cmp(&b.im))
}

fn one() -> Cplx {
    Cplx::new(1.0, 0.0)
}

impl BlaschkeProduct {
    pub fn new(zeros: &[(Cplx, usize)], unimodular: Cplx) -> Result<Self> {
        if zeros.is_empty() {
            return Err(Error::EmptyProduct);
        }
        if !(unimodular.re.is_finite() && unimodular.im.is_finite()) {
            return Err(Error::NonFinite);
        }
        if (unimodular.norm() - 1.0).abs() >= UNIMODULAR_TOL {
            return Err(Error::NonUnimodularConstant(unimodular));
        }
        let mut merged: Vec<Zero> = Vec::with_capacity(zeros.len());
        for &(point, multiplicity) in zeros {
            if !(point.re.is_finite() && point.im.is_finite()) {
                return Err(Error::NonFinite);
            }
            if multiplicity == 0 {
                return Err(Error::ZeroMultiplicity(point));
            }
            if point.norm() >= 1.0 - DISK_MARGIN {
                return Err(Error::ZeroOutsideDisk(point));
            }
            match merged.iter_mut().find(|z| (z.point - point).norm() < MERGE_TOL) {
                Some(existing) => existing.multiplicity += multiplicity,
                None => merged.push(Zero { point, multiplicity }),
            }
        }
        merged.sort_by(|a, b| lex_cmp(&a.point, &b.point));
        Ok(Self { zeros: merged, unimodular })
    }

    /// `z^n`, with the constant `(-1)^n` so that evaluation is literally `z^n`.
    pub fn power(n: usize) -> Result<Self> {
        if n == 0 {
            return Err(Error::EmptyProduct);
        }
        let sign = if n.is_multiple_of(2) { 1.0 } else { -1.0 };
        Self::new(&[(Cplx::new(0.0, 0.0), n)], Cplx::new(sign, 0.0))
    }

    /// The single Möbius factor `phi_a`.
    pub fn mobius(a: Cplx) -> Result<Self> {
        Self::new(&[(a, 1)], one())
    }

    pub fn zeros(&self) -> &[Zero] {
        &self.zeros
    }

    pub fn unimodular(&self) -> Cplx {
        self.unimodular
    }

    pub fn order(&self) -> usize {
        self.zeros.iter().map(|z| z.multiplicity).sum()
    }

    /// Zero list with multiplicities, as accepted by [`BlaschkeProduct::new`].
    pub fn zero_list(&self) -> Vec<(Cplx, usize)> {
        self.zeros.iter().map(|z| (z.point, z.multiplicity)).collect()
    }

    pub fn eval(&self, z: Cplx) -> Cplx {
        self.zeros.iter().fold(self.unimodular, |acc, zero| {
            let a = zero.point;
            acc * ((a - z) / (one() - a.conj() * z)).powu(zero.multiplicity as u32)
        })
    }

    /// Derivative by the product rule over the distinct factors, so repeated
    /// zeros never produce a `0 * inf` term.
    pub fn eval_derivative(&self, z: Cplx) -> Cplx {
        let values: Vec<Cplx> =
            self.zeros.iter().map(|zero| (zero.point - z) / (one() - zero.point.conj() * z)).collect();
        let mut total = Cplx::new(0.0, 0.0);
        for (k, zero) in self.zeros.iter().enumerate() {
            let a = zero.point;
            let m = zero.multiplicity;
            let denom = one() - a.conj() * z;
            let factor_derivative = Cplx::new(a.norm_sqr() - 1.0, 0.0) / (denom * denom);
            let mut term = factor_derivative * m as f64 * values[k].powu((m - 1) as u32);
            for (l, other) in self.zeros.iter().enumerate() {
                if l != k {
                    term *= values[l].powu(other.multiplicity as u32);
                }
            }
            total += term;
        }
        total * self.unimodular
    }

    pub fn rational_rep(&self) -> RationalRep {
        let p = poly::from_linear_factors(self.zeros.iter().map(|z| ([z.point, -one()], z.multiplicity)));
        let q = poly::from_linear_factors(self.zeros.iter().map(|z| ([one(), -z.point.conj()], z.multiplicity)));
        RationalRep { p_coeffs: poly::trim_exact(poly::scale(&p, self.unimodular)), q_coeffs: poly::trim_exact(q) }
    }

    /// `P(w) Q(z) - P(z) Q(w)`.
    pub fn f_bivariate(&self, w: Cplx, z: Cplx) -> Cplx {
        let rep = self.rational_rep();
        f_bivariate_with(&rep, w, z)
    }

    /// Pointwise product of two Blaschke products.
    pub fn mul(&self, other: &Self) -> Self {
        let mut zeros = self.zero_list();
        zeros.extend(other.zero_list());
        Self::new(&zeros, self.unimodular * other.unimodular).expect("product of valid Blaschke products is valid")
    }

    /// `self^k` as a pointwise power.
    pub fn pow(&self, k: usize) -> Result<Self> {
        if k == 0 {
            return Err(Error::EmptyProduct);
        }
        let zeros: Vec<_> = self.zero_list().into_iter().map(|(a, m)| (a, m * k)).collect();
        Self::new(&zeros, self.unimodular.powu(k as u32))
    }

    /// Same product with a different unimodular constant.
    pub fn with_unimodular(&self, unimodular: Cplx) -> Result<Self> {
        Self::new(&self.zero_list(), unimodular)
    }

    /// `outer ∘ inner`. Zeros are the inner-preimages of the outer zeros.
    pub fn compose(outer: &Self, inner: &Self) -> Result<Self> {
        let mut zeros = Vec::with_capacity(outer.order() * inner.order());
        for zero in &outer.zeros {
            for w in polyroots::preimages(inner, zero.point)? {
                zeros.push((w, zero.multiplicity));
            }
        }
        let mut product = Self::new(&zeros, one())?;
        // Near the circle both sides have modulus close to one, so the ratio is well conditioned.
        let probe = Cplx::from_polar(0.99, 0.7);
        let ratio = outer.eval(inner.eval(probe)) / product.eval(probe);
        product.unimodular = ratio / ratio.norm();
        Ok(product)
    }

    /// `phi_{b(0)} ∘ b`, an equivalent product vanishing at the origin.
    pub fn normalize(&self) -> Result<Self> {
        let v = self.eval(Cplx::new(0.0, 0.0));
        Self::compose(&Self::mobius(v)?, self)
    }

    /// Whether `a phi_w ∘ self = z^n` for some `|a| = 1`, `w` in the disk.
    ///
    /// Equivalently the numerator `v Q - P` of `phi_v ∘ self` (with `v = self(0)`)
    /// has all coefficients below degree `n` negligible.
    pub fn equivalent_to_power(&self) -> bool {
        let n = self.order();
        let rep = self.rational_rep();
        let v = self.eval(Cplx::new(0.0, 0.0));
        let numerator = poly::add(&poly::scale(&rep.q_coeffs, v), &poly::scale(&rep.p_coeffs, -one()));
        let scale = poly::max_abs(&numerator);
        numerator.iter().take(n).all(|c| c.norm() <= 1e-8 * scale)
    }
}

pub(crate) fn f_bivariate_with(rep: &RationalRep, w: Cplx, z: Cplx) -> Cplx {
    poly::eval(&rep.p_coeffs, w) * poly::eval(&rep.q_coeffs, z)
        - poly::eval(&rep.p_coeffs, z) * poly::eval(&rep.q_coeffs, w)
}

impl fmt::Display for BlaschkeProduct {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({}{:+}i)", self.unimodular.re, self.unimodular.im)?;
        for zero in &self.zeros {
            write!(f, " φ[{}{:+}i]", zero.point.re, zero.point.im)?;
            if zero.multiplicity > 1 {
                write!(f, "^{}", zero.multiplicity)?;
            }
        }
        Ok(())
    }
}
