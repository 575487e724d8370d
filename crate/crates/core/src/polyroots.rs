//! Polynomial roots and the analytic sets derived from them: critical points,
//! critical values, fibers and the branch set.

use serde::Serialize;

use crate::blaschke::{lex_cmp, BlaschkeProduct};
use crate::config::ToolConfig;
use crate::error::{Error, Result};
use crate::{poly, Cplx};

const TRIM_REL: f64 = 1e-12;
const ZERO_SNAP_REL: f64 = 1e-13;
const RESIDUAL_REL: f64 = 1e-9;
const MAX_ITERATIONS: usize = 1000;
/// Critical values closer than this to the requested value are treated as hit exactly.
const CRITICAL_HIT: f64 = 1e-9;
const CRITICAL_CAPTURE: f64 = 1e-2;
const DISK_SLACK: f64 = 1e-8;

/// Distinct points of the branch set `phi^-1(phi(critical points))`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BranchSet {
    pub points: Vec<Cplx>,
    pub cluster_eps: f64,
    /// Smallest pairwise distance, infinite for fewer than two points.
    pub min_gap: f64,
    /// Set when `min_gap < 10 * cluster_eps`.
    pub near_coincident: bool,
}

impl BranchSet {
    pub fn new(mut points: Vec<Cplx>, cluster_eps: f64) -> Self {
        points = dedup(points, cluster_eps);
        points.sort_by(lex_cmp);
        let mut min_gap = f64::INFINITY;
        for (i, a) in points.iter().enumerate() {
            for b in &points[i + 1..] {
                min_gap = min_gap.min((a - b).norm());
            }
        }
        Self { points, cluster_eps, min_gap, near_coincident: min_gap < 10.0 * cluster_eps }
    }

    pub fn distance_to(&self, z: Cplx) -> f64 {
        self.points.iter().map(|e| (e - z).norm()).fold(f64::INFINITY, f64::min)
    }
}

/// Everything derived from the critical points of one product.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BranchAnalysis {
    /// Distinct critical points with multiplicity.
    pub critical: Vec<(Cplx, usize)>,
    /// Distinct critical values.
    pub critical_values: Vec<Cplx>,
    pub branch_set: BranchSet,
}

impl BranchAnalysis {
    pub fn max_critical_value_modulus(&self) -> f64 {
        self.critical_values.iter().map(|v| v.norm()).fold(0.0, f64::max)
    }
}

fn dedup(points: Vec<Cplx>, eps: f64) -> Vec<Cplx> {
    let mut out: Vec<Cplx> = Vec::with_capacity(points.len());
    for p in points {
        if out.iter().all(|q| (q - p).norm() > eps) {
            out.push(p);
        }
    }
    out
}

/// All roots of the polynomial with ascending coefficients `coeffs`, with multiplicity.
///
/// Aberth–Ehrlich simultaneous iteration followed by guarded Newton polishing.
pub fn poly_roots(coeffs: &[Cplx]) -> Result<Vec<Cplx>> {
    if coeffs.iter().any(|c| !(c.re.is_finite() && c.im.is_finite())) {
        return Err(Error::NonFinite);
    }
    let scale = poly::max_abs(coeffs);
    if scale == 0.0 {
        return Err(Error::ZeroPolynomial);
    }
    let mut top = coeffs.len();
    while top > 0 && coeffs[top - 1].norm() <= TRIM_REL * scale {
        top -= 1;
    }
    let trimmed = &coeffs[..top];
    let low = trimmed.iter().take_while(|c| c.norm() <= ZERO_SNAP_REL * scale).count();
    let mut roots = vec![Cplx::new(0.0, 0.0); low];
    let reduced = &trimmed[low..];
    roots.extend(aberth(reduced, scale)?);
    Ok(roots)
}

fn aberth(p: &[Cplx], scale: f64) -> Result<Vec<Cplx>> {
    let degree = p.len().saturating_sub(1);
    if degree == 0 {
        return Ok(Vec::new());
    }
    let lead = p[degree];
    if degree == 1 {
        return Ok(vec![-p[0] / lead]);
    }
    let radius = (p[0].norm() / lead.norm()).powf(1.0 / degree as f64).max(1e-3);
    let mut z: Vec<Cplx> =
        (0..degree).map(|k| Cplx::from_polar(radius, std::f64::consts::TAU * k as f64 / degree as f64 + 0.4)).collect();
    let mut frozen = vec![false; degree];
    let eps = f64::EPSILON * (degree as f64 + 1.0) * 4.0;
    for _ in 0..MAX_ITERATIONS {
        let mut all_frozen = true;
        for k in 0..degree {
            if frozen[k] {
                continue;
            }
            let (value, slope) = poly::eval_with_derivative(p, z[k]);
            if value.norm() <= eps * poly::abs_eval(p, z[k]) {
                frozen[k] = true;
                continue;
            }
            all_frozen = false;
            let ratio = value / slope;
            let repulsion: Cplx = (0..degree).filter(|&j| j != k).map(|j| Cplx::new(1.0, 0.0) / (z[k] - z[j])).sum();
            let step = ratio / (Cplx::new(1.0, 0.0) - ratio * repulsion);
            if step.re.is_finite() && step.im.is_finite() {
                z[k] -= step;
                if step.norm() <= f64::EPSILON * z[k].norm() {
                    frozen[k] = true;
                }
            } else {
                let nudge = Cplx::new(1e-8, 1e-8) * (1.0 + z[k].norm());
                z[k] += nudge;
            }
        }
        if all_frozen {
            break;
        }
    }
    for root in z.iter_mut() {
        *root = newton_polish(p, *root, 3);
        let residual = poly::eval(p, *root).norm();
        let bound = RESIDUAL_REL * scale.max(poly::abs_eval(p, *root));
        if residual.is_nan() || residual > bound {
            return Err(Error::NoConvergence { degree, iterations: MAX_ITERATIONS });
        }
    }
    Ok(z)
}

/// Newton steps that are kept only while they reduce the residual.
fn newton_polish(p: &[Cplx], mut z: Cplx, steps: usize) -> Cplx {
    let mut residual = poly::eval(p, z).norm();
    for _ in 0..steps {
        let (value, slope) = poly::eval_with_derivative(p, z);
        if slope.norm() == 0.0 || value.norm() == 0.0 {
            break;
        }
        let candidate = z - value / slope;
        let r = poly::eval(p, candidate).norm();
        if r < residual {
            z = candidate;
            residual = r;
        } else {
            break;
        }
    }
    z
}

/// Single-linkage clusters of `roots` at distance `tol`, each reported as
/// `(centroid, size)`, sorted lexicographically.
pub fn cluster_roots(roots: &[Cplx], tol: f64) -> Vec<(Cplx, usize)> {
    let n = roots.len();
    let mut label: Vec<usize> = (0..n).collect();
    fn find(label: &mut [usize], mut i: usize) -> usize {
        while label[i] != i {
            label[i] = label[label[i]];
            i = label[i];
        }
        i
    }
    for i in 0..n {
        for j in i + 1..n {
            if (roots[i] - roots[j]).norm() <= tol {
                let (a, b) = (find(&mut label, i), find(&mut label, j));
                if a != b {
                    label[a.max(b)] = a.min(b);
                }
            }
        }
    }
    let mut groups: Vec<(usize, Cplx, usize)> = Vec::new();
    for (i, &r) in roots.iter().enumerate() {
        let root = find(&mut label, i);
        match groups.iter_mut().find(|g| g.0 == root) {
            Some(g) => {
                g.1 += r;
                g.2 += 1;
            }
            None => groups.push((root, r, 1)),
        }
    }
    let mut out: Vec<(Cplx, usize)> = groups.into_iter().map(|(_, s, k)| (s / k as f64, k)).collect();
    out.sort_by(|a, b| lex_cmp(&a.0, &b.0));
    out
}

/// Refine a `k`-fold cluster centroid by Newton on the `(k-1)`th derivative,
/// which has a simple root there.
fn refine_multiple(p: &[Cplx], centroid: Cplx, k: usize) -> Cplx {
    let mut q = p.to_vec();
    for _ in 1..k {
        q = poly::derivative(&q);
    }
    let mut z = centroid;
    for _ in 0..4 {
        let (value, slope) = poly::eval_with_derivative(&q, z);
        if slope.norm() == 0.0 {
            break;
        }
        let step = value / slope;
        if step.norm().is_nan() || step.norm() >= 1e-3 {
            break;
        }
        z -= step;
    }
    z
}

/// Numerator of the logarithmic derivative over the distinct zeros:
/// `sum_k m_k (|a_k|^2 - 1) prod_{l != k} (1 - conj(a_l) z)(a_l - z)`.
fn log_derivative_numerator(b: &BlaschkeProduct) -> Vec<Cplx> {
    let zeros = b.zeros();
    let one = Cplx::new(1.0, 0.0);
    let mut total: Vec<Cplx> = vec![Cplx::new(0.0, 0.0)];
    for (k, zero) in zeros.iter().enumerate() {
        let factors = zeros
            .iter()
            .enumerate()
            .filter(|(l, _)| *l != k)
            .flat_map(|(_, other)| [([one, -other.point.conj()], 1usize), ([other.point, -one], 1usize)]);
        let term = poly::from_linear_factors(factors);
        let weight = Cplx::new(zero.multiplicity as f64 * (zero.point.norm_sqr() - 1.0), 0.0);
        total = poly::add(&total, &poly::scale(&term, weight));
    }
    total
}

/// Distinct critical points in the disk with their multiplicities.
///
/// Fails with [`Error::BochnerCountViolation`] unless the total is `n - 1`.
pub fn critical_points_grouped(b: &BlaschkeProduct, multiplicity_tol: f64) -> Result<Vec<(Cplx, usize)>> {
    let n = b.order();
    let mut critical: Vec<(Cplx, usize)> =
        b.zeros().iter().filter(|z| z.multiplicity > 1).map(|z| (z.point, z.multiplicity - 1)).collect();
    if b.zeros().len() > 1 {
        let numerator = log_derivative_numerator(b);
        let roots = poly_roots(&numerator)?;
        for (centroid, k) in cluster_roots(&roots, multiplicity_tol) {
            if centroid.norm() >= 1.0 {
                continue;
            }
            let point =
                if k > 1 { refine_multiple(&numerator, centroid, k) } else { newton_polish(&numerator, centroid, 3) };
            critical.push((point, k));
        }
    }
    let found: usize = critical.iter().map(|c| c.1).sum();
    if found != n - 1 {
        return Err(Error::BochnerCountViolation { found, expected: n - 1 });
    }
    critical.sort_by(|a, c| lex_cmp(&a.0, &c.0));
    Ok(critical)
}

/// Critical points in the disk, each repeated according to multiplicity.
pub fn critical_points(b: &BlaschkeProduct, multiplicity_tol: f64) -> Result<Vec<Cplx>> {
    Ok(critical_points_grouped(b, multiplicity_tol)?.into_iter().flat_map(|(c, m)| std::iter::repeat_n(c, m)).collect())
}

/// The `n` solutions of `b(w) = v`, with multiplicity.
pub fn preimages(b: &BlaschkeProduct, v: Cplx) -> Result<Vec<Cplx>> {
    let critical =
        if b.order() > 1 { critical_points_grouped(b, ToolConfig::default().multiplicity_tol)? } else { Vec::new() };
    preimages_with(b, v, &critical)
}

/// As [`preimages`], reusing precomputed critical points. A critical point
/// of multiplicity `m` lying over `v` replaces the `m + 1` nearest raw roots,
/// which are only accurate to about the `(m+1)`th root of machine precision.
pub fn preimages_with(b: &BlaschkeProduct, v: Cplx, critical: &[(Cplx, usize)]) -> Result<Vec<Cplx>> {
    let rep = b.rational_rep();
    let equation = poly::add(&rep.p_coeffs, &poly::scale(&rep.q_coeffs, -v));
    let mut raw = poly_roots(&equation)?;
    let mut fixed: Vec<Cplx> = Vec::new();
    for &(c, m) in critical {
        if (b.eval(c) - v).norm() > CRITICAL_HIT {
            continue;
        }
        let mut order: Vec<usize> = (0..raw.len()).collect();
        order.sort_by(|&i, &j| (raw[i] - c).norm().total_cmp(&(raw[j] - c).norm()));
        if order.len() < m + 1 || (raw[order[0]] - c).norm() > CRITICAL_CAPTURE {
            continue;
        }
        let mut remove: Vec<usize> = order[..m + 1].to_vec();
        remove.sort_unstable_by(|a, b| b.cmp(a));
        for i in remove {
            raw.swap_remove(i);
        }
        fixed.extend(std::iter::repeat_n(c, m + 1));
    }
    for w in raw.iter_mut() {
        *w = polish_on_product(b, *w, v);
    }
    fixed.extend(raw);
    if let Some(bad) = fixed.iter().find(|w| w.norm() >= 1.0 + DISK_SLACK) {
        return Err(Error::PreimageOutsideDisk(*bad));
    }
    fixed.sort_by(lex_cmp);
    Ok(fixed)
}

fn polish_on_product(b: &BlaschkeProduct, mut w: Cplx, v: Cplx) -> Cplx {
    if w.norm() >= 1.0 {
        return w;
    }
    let mut residual = (b.eval(w) - v).norm();
    for _ in 0..3 {
        let slope = b.eval_derivative(w);
        if slope.norm() == 0.0 || residual == 0.0 {
            break;
        }
        let candidate = w - (b.eval(w) - v) / slope;
        if candidate.norm() >= 1.0 {
            break;
        }
        let r = (b.eval(candidate) - v).norm();
        if r < residual {
            w = candidate;
            residual = r;
        } else {
            break;
        }
    }
    w
}

/// Critical points, critical values and the branch set in one pass.
pub fn analyze(b: &BlaschkeProduct, cfg: &ToolConfig) -> Result<BranchAnalysis> {
    let critical = critical_points_grouped(b, cfg.multiplicity_tol)?;
    let mut critical_values: Vec<Cplx> = Vec::new();
    for &(c, _) in &critical {
        let v = b.eval(c);
        if critical_values.iter().all(|u| (u - v).norm() > cfg.cluster_eps) {
            critical_values.push(v);
        }
    }
    critical_values.sort_by(lex_cmp);
    let mut points: Vec<Cplx> = critical.iter().map(|c| c.0).collect();
    for &v in &critical_values {
        points.extend(preimages_with(b, v, &critical)?);
    }
    let branch_set = BranchSet::new(points, cfg.cluster_eps);
    Ok(BranchAnalysis { critical, critical_values, branch_set })
}

pub fn branch_points(b: &BlaschkeProduct, cfg: &ToolConfig) -> Result<BranchSet> {
    Ok(analyze(b, cfg)?.branch_set)
}
