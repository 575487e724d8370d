//! Closed-form factorisation data for order-5 products `z^2 phi_a phi_b phi_c`.
//!
//! Used as an independent check on the generic numerical machinery.

use crate::blaschke::BlaschkeProduct;
use crate::error::{Error, Result};
use crate::{poly, Cplx};

/// Bivariate table: `table[i][j]` multiplies `w^i z^j`.
pub type Bivariate = Vec<Vec<Cplx>>;

#[derive(Debug, Clone, PartialEq)]
pub struct Order5Oracle {
    /// `d_0 .. d_4`, ascending coefficients in `z`.
    pub d_coeffs: [Vec<Cplx>; 5],
    /// Present only when the exceptional criterion holds.
    pub p1_coeffs: Option<Bivariate>,
    pub p2_coeffs: Option<Bivariate>,
    pub c1: Option<Cplx>,
}

fn one() -> Cplx {
    Cplx::new(1.0, 0.0)
}

fn lin(c0: Cplx, c1: Cplx) -> Vec<Cplx> {
    vec![c0, c1]
}

fn prod(factors: &[Vec<Cplx>]) -> Vec<Cplx> {
    factors.iter().fold(vec![one()], |acc, f| poly::mul(&acc, f))
}

/// `z^2 phi_a phi_b phi_c` with unit constant.
pub fn product(a: Cplx, b: Cplx, c: Cplx) -> Result<BlaschkeProduct> {
    BlaschkeProduct::new(&[(Cplx::new(0.0, 0.0), 2), (a, 1), (b, 1), (c, 1)], one())
}

/// Coefficients `d_k` with `f(w, z) = (w - z) sum_k d_k(z) w^(4-k)`.
pub fn d_coeffs(a: Cplx, b: Cplx, c: Cplx) -> [Vec<Cplx>; 5] {
    let z = lin(Cplx::new(0.0, 0.0), one());
    let roots = prod(&[lin(a, -one()), lin(b, -one()), lin(c, -one())]);
    let reflected = prod(&[lin(one(), -a.conj()), lin(one(), -b.conj()), lin(one(), -c.conj())]);
    let e1 = a + b + c;
    let e2 = a * b + b * c + a * c;
    let d4 = poly::mul(&z, &roots);
    let d3 = poly::mul(&roots, &lin(one(), -(a.conj() + b.conj() + c.conj())));
    let d2 = poly::add(
        &poly::mul(&reflected, &[-e2, e1, -one()]),
        &poly::scale(&poly::mul(&[Cplx::new(0.0, 0.0), Cplx::new(0.0, 0.0), one()], &roots), (a * b * c).conj()),
    );
    let d1 = poly::mul(&reflected, &lin(e1, -one()));
    let d0 = poly::scale(&reflected, -one());
    [d0, d1, d2, d3, d4]
}

/// `(w - z) sum_k d_k(z) w^(4-k)`.
pub fn eval_d_form(d: &[Vec<Cplx>; 5], w: Cplx, z: Cplx) -> Cplx {
    let inner = d.iter().enumerate().map(|(k, dk)| poly::eval(dk, z) * w.powu(4 - k as u32)).sum::<Cplx>();
    (w - z) * inner
}

pub fn eval_bivariate(table: &Bivariate, w: Cplx, z: Cplx) -> Cplx {
    table.iter().rev().fold(Cplx::new(0.0, 0.0), |acc, row| acc * w + poly::eval(row, z))
}

/// Checks `a / b` real and `phi_b(a) = a^2 / b`; when it holds the product
/// `z^2 phi_a^2 phi_b` factors as `f = (w - z) p1 p2` with quadratic `p1`, `p2`.
pub fn exceptional(a: Cplx, b: Cplx) -> Result<(bool, Order5Oracle)> {
    if a == b || a * b == Cplx::new(0.0, 0.0) {
        return Err(Error::DegenerateParameters("requires a != b and ab != 0"));
    }
    let ratio = a / b;
    let phi_b_a = (b - a) / (one() - b.conj() * a);
    let holds = ratio.im.abs() < 1e-10 && (phi_b_a - a * a / b).norm() < 1e-8;
    let mut oracle = Order5Oracle { d_coeffs: d_coeffs(a, a, b), p1_coeffs: None, p2_coeffs: None, c1: None };
    if holds {
        let c1 = -one() - ratio;
        let za = lin(one(), -a.conj());
        let zb = lin(-one(), b.conj());
        let beta_minus_z = lin(b, -one());
        let alpha_minus_z = lin(a, -one());
        let z = lin(Cplx::new(0.0, 0.0), one());
        let p1_w1 = poly::add(&poly::mul(&lin(-(2.0 * a + b), one()), &za), &poly::scale(&beta_minus_z, -c1));
        let p1 = vec![poly::scale(&poly::mul(&z, &alpha_minus_z), -one()), p1_w1, za.clone()];
        let p2 = vec![
            poly::scale(&poly::mul(&alpha_minus_z, &beta_minus_z), -one()),
            poly::scale(&poly::mul(&zb, &beta_minus_z), c1),
            poly::mul(&za, &zb),
        ];
        oracle.p1_coeffs = Some(p1);
        oracle.p2_coeffs = Some(p2);
        oracle.c1 = Some(c1);
    }
    Ok((holds, oracle))
}

/// The real exceptional pair `a = t b`, `b = sqrt((t^2 + t - 1) / t^3)`,
/// valid for `t` in roughly `(0.62, 1)`.
pub fn exceptional_pair(t: f64) -> Result<(Cplx, Cplx)> {
    let radicand = (t * t + t - 1.0) / (t * t * t);
    if !(t > 0.0 && radicand > 0.0 && radicand < 1.0) {
        return Err(Error::DegenerateParameters("t outside the admissible range"));
    }
    let b = radicand.sqrt();
    Ok((Cplx::new(t * b, 0.0), Cplx::new(b, 0.0)))
}
