//! Dense univariate polynomials over `Cplx`, coefficients in ascending degree.

use crate::Cplx;

pub fn eval(coeffs: &[Cplx], z: Cplx) -> Cplx {
    coeffs.iter().rev().fold(Cplx::new(0.0, 0.0), |acc, &c| acc * z + c)
}

/// Value and first derivative in one Horner pass.
pub fn eval_with_derivative(coeffs: &[Cplx], z: Cplx) -> (Cplx, Cplx) {
    let zero = Cplx::new(0.0, 0.0);
    let mut p = zero;
    let mut dp = zero;
    for &c in coeffs.iter().rev() {
        dp = dp * z + p;
        p = p * z + c;
    }
    (p, dp)
}

/// `sum |c_j| |z|^j`, the natural scale for the rounding error of `eval`.
pub fn abs_eval(coeffs: &[Cplx], z: Cplx) -> f64 {
    let r = z.norm();
    coeffs.iter().rev().fold(0.0, |acc, c| acc * r + c.norm())
}

pub fn mul(a: &[Cplx], b: &[Cplx]) -> Vec<Cplx> {
    if a.is_empty() || b.is_empty() {
        return Vec::new();
    }
    let mut out = vec![Cplx::new(0.0, 0.0); a.len() + b.len() - 1];
    for (i, &x) in a.iter().enumerate() {
        for (j, &y) in b.iter().enumerate() {
            out[i + j] += x * y;
        }
    }
    out
}

pub fn add(a: &[Cplx], b: &[Cplx]) -> Vec<Cplx> {
    let mut out = vec![Cplx::new(0.0, 0.0); a.len().max(b.len())];
    for (i, &x) in a.iter().enumerate() {
        out[i] += x;
    }
    for (i, &y) in b.iter().enumerate() {
        out[i] += y;
    }
    out
}

pub fn scale(a: &[Cplx], s: Cplx) -> Vec<Cplx> {
    a.iter().map(|&c| c * s).collect()
}

pub fn derivative(a: &[Cplx]) -> Vec<Cplx> {
    a.iter().enumerate().skip(1).map(|(k, &c)| c * k as f64).collect()
}

/// Product of `(root - z)` style linear factors: `prod (c0 + c1 z)^m`.
pub fn from_linear_factors<I>(factors: I) -> Vec<Cplx>
where
    I: IntoIterator<Item = ([Cplx; 2], usize)>,
{
    let mut out = vec![Cplx::new(1.0, 0.0)];
    for (factor, multiplicity) in factors {
        for _ in 0..multiplicity {
            out = mul(&out, &factor);
        }
    }
    out
}

/// Drops exactly-zero leading coefficients, keeping at least one entry.
pub fn trim_exact(mut a: Vec<Cplx>) -> Vec<Cplx> {
    while a.len() > 1 && a[a.len() - 1] == Cplx::new(0.0, 0.0) {
        a.pop();
    }
    a
}

pub fn max_abs(a: &[Cplx]) -> f64 {
    a.iter().map(|c| c.norm()).fold(0.0, f64::max)
}
