//! Dimension of the commutant of `M_phi` on the Dirichlet space, from the
//! values of the local inverses at the origin.

use nalgebra::DMatrix;
use serde::Serialize;

use crate::blaschke::{lex_cmp, BlaschkeProduct};
use crate::config::ToolConfig;
use crate::continuation::{LocalValues, MonodromyReport, Surface};
use crate::error::{Error, Result};
use crate::partition::Partition;
use crate::polyroots::{self, cluster_roots};
use crate::Cplx;

/// Recovered multiplicities must be this close to integers.
const MULTIPLICITY_SLACK: f64 = 1e-4;
const SNAP_DISTANCE: f64 = 1e-6;
const GAP_CAP: f64 = 1e18;

/// Per block, the multiset `{rho_j(0) : j in G_i}` and the index of the inverse block.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BlockPointData {
    pub multisets: Vec<Vec<Cplx>>,
    pub inverse_block: Vec<usize>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DirichletReport {
    pub partition: Partition,
    pub block_data: BlockPointData,
    pub distinct_points: Vec<Cplx>,
    pub matrix_m: Vec<Vec<Cplx>>,
    pub matrix_n: Vec<Vec<Cplx>>,
    /// Singular values of `[M; N]` relative to the largest, descending.
    pub relative_singular_values: Vec<f64>,
    pub rank: usize,
    pub dim: usize,
    pub reducible: bool,
    pub coefficient_basis: Vec<Vec<Cplx>>,
    /// How far the rank decision sits from `rank_tol`, as a factor (capped).
    pub spectral_gap: f64,
    /// Set when a singular value lies within a factor 10 of the threshold.
    pub low_confidence: bool,
}

fn inverse_blocks(partition: &Partition) -> Result<Vec<usize>> {
    partition.inverse_blocks().ok_or_else(|| {
        let n = partition.n();
        let missing = partition
            .blocks()
            .iter()
            .find(|block| {
                let mut inverse: Vec<usize> = block.iter().map(|&x| (n - x) % n).collect();
                inverse.sort_unstable();
                !partition.blocks().contains(&inverse)
            })
            .cloned()
            .unwrap_or_default();
        Error::InverseBlockMissing(missing)
    })
}

/// Distinct points of the fiber over `phi(0)`.
fn fiber_over_origin(surface: &Surface) -> Result<Vec<Cplx>> {
    let b = surface.product();
    let v = b.eval(Cplx::new(0.0, 0.0));
    let points = polyroots::preimages_with(b, v, &surface.analysis().critical)?;
    Ok(cluster_roots(&points, surface.config().cluster_eps).into_iter().map(|(p, _)| p).collect())
}

fn snap(value: Cplx, points: &[Cplx]) -> Result<Cplx> {
    let (p, d) = points
        .iter()
        .map(|p| (*p, (p - value).norm()))
        .min_by(|a, b| a.1.total_cmp(&b.1))
        .ok_or_else(|| Error::MultisetRecovery("empty fiber".into()))?;
    if d > SNAP_DISTANCE {
        return Err(Error::MultisetRecovery(format!("value {value} is {d:.3e} from the fiber over phi(0)")));
    }
    Ok(p)
}

/// Multiplicities `m` with `sum_l m_l p_l^k = sums[k]`, rounded to integers.
fn recover_multiplicities(points: &[Cplx], sums: &[Cplx], size: usize) -> Result<Vec<usize>> {
    let d = points.len();
    let v = DMatrix::from_fn(d, d, |k, l| points[l].powu(k as u32));
    let rhs = nalgebra::DVector::from_column_slice(sums);
    let m = v.lu().solve(&rhs).ok_or_else(|| Error::MultisetRecovery("singular Vandermonde system".into()))?;
    let mut out = Vec::with_capacity(d);
    for x in m.iter() {
        let rounded = x.re.round();
        if (x - Cplx::new(rounded, 0.0)).norm() > MULTIPLICITY_SLACK || rounded < 0.0 {
            return Err(Error::MultisetRecovery(format!("non-integral multiplicity {x}")));
        }
        out.push(rounded as usize);
    }
    if out.iter().sum::<usize>() != size {
        return Err(Error::MultisetRecovery(format!("multiplicities {out:?} do not sum to {size}")));
    }
    Ok(out)
}

/// Per-block multisets of `rho_j(0)`. At a branch point the multisets come
/// from block power sums, which are analytic and evaluated by circular means.
pub fn block_point_data(surface: &Surface, partition: &Partition) -> Result<BlockPointData> {
    let inverse_block = inverse_blocks(partition)?;
    let points = fiber_over_origin(surface)?;
    let origin = Cplx::new(0.0, 0.0);
    let multisets = match surface.local_inverse_values(origin)? {
        LocalValues::Values(values) => partition
            .blocks()
            .iter()
            .map(|block| block.iter().map(|&j| snap(values[j], &points)).collect::<Result<Vec<_>>>())
            .collect::<Result<Vec<_>>>()?,
        LocalValues::OnBranch => {
            let samples = surface.circle_samples(origin)?;
            let d = points.len();
            let mut out = Vec::with_capacity(partition.q());
            for block in partition.blocks() {
                let mut sums = vec![Cplx::new(0.0, 0.0); d];
                for (_, values) in &samples {
                    for &j in block {
                        let mut power = Cplx::new(1.0, 0.0);
                        for s in sums.iter_mut() {
                            *s += power;
                            power *= values[j];
                        }
                    }
                }
                for s in sums.iter_mut() {
                    *s /= samples.len() as f64;
                }
                let mult = recover_multiplicities(&points, &sums, block.len())?;
                let mut multiset: Vec<Cplx> = Vec::with_capacity(block.len());
                for (p, m) in points.iter().zip(mult) {
                    multiset.extend(std::iter::repeat_n(*p, m));
                }
                out.push(multiset);
            }
            out
        }
    };
    let mut multisets = multisets;
    for m in multisets.iter_mut() {
        m.sort_by(lex_cmp);
    }
    Ok(BlockPointData { multisets, inverse_block })
}

/// Constraint rows, one per distinct point `p`:
/// `M[p][i] = p mult_i(p)` and `N[p][i] = conj(p) mult_sigma(i)(p)`.
pub fn constraint_matrices(data: &BlockPointData, cluster_eps: f64) -> (Vec<Vec<Cplx>>, Vec<Vec<Cplx>>, Vec<Cplx>) {
    let all: Vec<Cplx> = data.multisets.iter().flatten().copied().collect();
    let distinct: Vec<Cplx> = cluster_roots(&all, cluster_eps).into_iter().map(|(p, _)| p).collect();
    let q = data.multisets.len();
    let mult = |i: usize, p: Cplx| data.multisets[i].iter().filter(|x| (*x - p).norm() <= cluster_eps).count() as f64;
    let m = distinct.iter().map(|&p| (0..q).map(|i| p * mult(i, p)).collect()).collect();
    let n = distinct.iter().map(|&p| (0..q).map(|i| p.conj() * mult(data.inverse_block[i], p)).collect()).collect();
    (m, n, distinct)
}

pub struct RankInfo {
    pub relative_singular_values: Vec<f64>,
    pub rank: usize,
    pub null_basis: Vec<Vec<Cplx>>,
    pub spectral_gap: f64,
    pub low_confidence: bool,
}

/// Numerical rank of the rows stacked on `q` columns, with a null-space basis.
pub fn rank_and_null_space(rows: &[Vec<Cplx>], q: usize, rank_tol: f64) -> RankInfo {
    let height = rows.len().max(q);
    let a = DMatrix::from_fn(height, q, |r, c| rows.get(r).map_or(Cplx::new(0.0, 0.0), |row| row[c]));
    let svd = a.svd(false, true);
    let v_t = svd.v_t.expect("requested right singular vectors");
    let mut order: Vec<usize> = (0..svd.singular_values.len()).collect();
    order.sort_by(|&x, &y| svd.singular_values[y].total_cmp(&svd.singular_values[x]));
    let sigma_max = svd.singular_values.iter().copied().fold(0.0, f64::max);
    let relative: Vec<f64> =
        order.iter().map(|&k| if sigma_max > 0.0 { svd.singular_values[k] / sigma_max } else { 0.0 }).collect();
    let rank = if sigma_max > 0.0 { relative.iter().filter(|&&s| s > rank_tol).count() } else { 0 };
    let null_basis = order[rank..].iter().map(|&k| (0..q).map(|c| v_t[(k, c)].conj()).collect()).collect();
    let above = if rank > 0 { relative[rank - 1] / rank_tol } else { GAP_CAP };
    let below = match relative.get(rank) {
        Some(&s) if s > 0.0 => rank_tol / s,
        _ => GAP_CAP,
    };
    let spectral_gap = above.min(below).min(GAP_CAP);
    let low_confidence = relative.iter().any(|&s| s > 0.0 && s / rank_tol < 10.0 && rank_tol / s < 10.0);
    RankInfo { relative_singular_values: relative, rank, null_basis, spectral_gap, low_confidence }
}

/// Builds the report from block data already computed for `partition`.
pub fn dirichlet_report(partition: &Partition, data: BlockPointData, cfg: &ToolConfig) -> DirichletReport {
    let (matrix_m, matrix_n, distinct_points) = constraint_matrices(&data, cfg.cluster_eps);
    let q = partition.q();
    let mut rows = matrix_m.clone();
    rows.extend(matrix_n.iter().cloned());
    let info = rank_and_null_space(&rows, q, cfg.rank_tol);
    let dim = q - info.rank;
    DirichletReport {
        partition: partition.clone(),
        block_data: data,
        distinct_points,
        matrix_m,
        matrix_n,
        relative_singular_values: info.relative_singular_values,
        rank: info.rank,
        dim,
        reducible: dim > 1,
        coefficient_basis: info.null_basis,
        spectral_gap: info.spectral_gap,
        low_confidence: info.low_confidence,
    }
}

pub fn dirichlet_from_monodromy(surface: &Surface, monodromy: &MonodromyReport) -> Result<DirichletReport> {
    let data = block_point_data(surface, &monodromy.partition)?;
    Ok(dirichlet_report(&monodromy.partition, data, surface.config()))
}

pub fn dirichlet_dim(b: &BlaschkeProduct, cfg: &ToolConfig) -> Result<DirichletReport> {
    let surface = Surface::new(b, cfg)?;
    let monodromy = surface.monodromy()?;
    dirichlet_from_monodromy(&surface, &monodromy)
}

fn pointwise_values(surface: &Surface, z: Cplx) -> Result<Vec<Cplx>> {
    match surface.local_inverse_values(z)? {
        LocalValues::Values(values) => Ok(values),
        LocalValues::OnBranch => Err(Error::NearBranchPoint(z)),
    }
}

/// `xi f (z) = sum_{j in block} f(rho_j(z)) rho_j'(z)` with `rho' = phi'(z) / phi'(rho(z))`.
pub fn xi_apply(surface: &Surface, block: &[usize], f: &dyn Fn(Cplx) -> Cplx, z: Cplx) -> Result<Cplx> {
    let values = pointwise_values(surface, z)?;
    let b = surface.product();
    let slope = b.eval_derivative(z);
    Ok(block.iter().map(|&j| f(values[j]) * slope / b.eval_derivative(values[j])).sum())
}

/// `T f (z) = sum_i a_i (F_i(z) - F_i(0)) / z`; at the origin the limit is
/// taken as a circular mean.
pub fn t_apply(
    surface: &Surface,
    partition: &Partition,
    a: &[Cplx],
    f: &dyn Fn(Cplx) -> Cplx,
    z: Cplx,
) -> Result<Cplx> {
    let origin = Cplx::new(0.0, 0.0);
    let at_origin = surface.block_sum_at(partition, origin, f)?;
    let combine = |values: &[Cplx], point: Cplx| -> Cplx {
        partition
            .blocks()
            .iter()
            .zip(a)
            .zip(&at_origin)
            .map(|((block, &ai), &f0)| {
                let fz: Cplx = block.iter().map(|&j| f(values[j]) * values[j]).sum();
                ai * (fz - f0) / point
            })
            .sum()
    };
    if z.norm() <= f64::EPSILON {
        let samples = surface.circle_samples(origin)?;
        let total: Cplx = samples.iter().map(|(s, values)| combine(values, *s)).sum();
        return Ok(total / samples.len() as f64);
    }
    let values = pointwise_values(surface, z)?;
    Ok(combine(&values, z))
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::TAU;

    fn c(re: f64, im: f64) -> Cplx {
        Cplx::new(re, im)
    }

    fn cfg() -> ToolConfig {
        ToolConfig::default()
    }

    #[test]
    fn power_has_full_dimension() {
        for n in 2..=8 {
            let report = dirichlet_dim(&BlaschkeProduct::power(n).unwrap(), &cfg()).unwrap();
            assert_eq!(report.dim, n, "z^{n}");
            assert!(report.distinct_points.iter().all(|p| p.norm() < 1e-12));
        }
    }

    #[test]
    fn mobius_powers_are_irreducible() {
        for a in [0.3, 0.5] {
            for n in 2..=6 {
                let b = BlaschkeProduct::mobius(c(a, 0.0)).unwrap().pow(n).unwrap();
                let report = dirichlet_dim(&b, &cfg()).unwrap();
                assert_eq!(report.dim, 1, "a={a} n={n}");
            }
        }
    }

    #[test]
    fn mobius_power_multisets() {
        let b = BlaschkeProduct::mobius(c(0.5, 0.0)).unwrap().pow(5).unwrap();
        let surface = Surface::new(&b, &cfg()).unwrap();
        let report = surface.monodromy().unwrap();
        assert_eq!(report.partition, Partition::singletons(5));
        let data = block_point_data(&surface, &report.partition).unwrap();
        assert!(data.multisets[0][0].norm() < 1e-12);
        let phi = BlaschkeProduct::mobius(c(0.5, 0.0)).unwrap();
        let mut expected: Vec<Cplx> = (0..5).map(|j| phi.eval(Cplx::from_polar(0.5, TAU * j as f64 / 5.0))).collect();
        let mut got: Vec<Cplx> = data.multisets.iter().flatten().copied().collect();
        expected.sort_by(lex_cmp);
        got.sort_by(lex_cmp);
        for (x, y) in got.iter().zip(&expected) {
            assert!((x - y).norm() < 1e-9);
        }
    }

    #[test]
    fn z4_phi_multisets_on_branch() {
        let b = BlaschkeProduct::new(&[(c(0.0, 0.0), 4), (c(0.5, 0.0), 1)], c(1.0, 0.0)).unwrap();
        let surface = Surface::new(&b, &cfg()).unwrap();
        let report = surface.monodromy().unwrap();
        let data = block_point_data(&surface, &report.partition).unwrap();
        assert_eq!(data.multisets[0], vec![c(0.0, 0.0)]);
        assert_eq!(data.multisets[1].iter().filter(|p| p.norm() < 1e-12).count(), 3);
        assert!(data.multisets[1].iter().any(|p| (p - 0.5).norm() < 1e-12));
        let report = dirichlet_report(&report.partition, data, &cfg());
        assert_eq!(report.dim, 1);
    }

    #[test]
    fn rank_of_zero_matrix() {
        let info = rank_and_null_space(&[vec![c(0.0, 0.0); 3]], 3, 1e-7);
        assert_eq!(info.rank, 0);
        assert_eq!(info.null_basis.len(), 3);
    }

    #[test]
    fn rank_null_space_annihilates() {
        let rows = vec![vec![c(1.0, 0.0), c(1.0, 0.0), c(0.0, 0.0)], vec![c(0.0, 1.0), c(0.0, 1.0), c(0.0, 0.0)]];
        let info = rank_and_null_space(&rows, 3, 1e-7);
        assert_eq!(info.rank, 1);
        assert!(info.spectral_gap > 1e3);
        for v in &info.null_basis {
            for row in &rows {
                let dot: Cplx = row.iter().zip(v).map(|(r, x)| r * x).sum();
                assert!(dot.norm() < 1e-12);
            }
        }
    }

    #[test]
    fn missing_inverse_block_is_reported() {
        let surface = Surface::new(&BlaschkeProduct::power(5).unwrap(), &cfg()).unwrap();
        let p = Partition::new(5, vec![vec![0], vec![1], vec![2, 3, 4]]).unwrap();
        assert!(matches!(block_point_data(&surface, &p), Err(Error::InverseBlockMissing(_))));
    }

    #[test]
    fn xi_examples() {
        let b = BlaschkeProduct::power(2).unwrap();
        let surface = Surface::new(&b, &cfg()).unwrap();
        let f = |z: Cplx| z * z * z + c(0.5, 0.1) * z + 2.0;
        let z = c(0.2, -0.3);
        assert!((xi_apply(&surface, &[0], &f, z).unwrap() - f(z)).norm() < 1e-12);
        assert!((xi_apply(&surface, &[1], &f, z).unwrap() + f(-z)).norm() < 1e-12);
    }

    #[test]
    fn t_identity_block_is_identity() {
        let b = BlaschkeProduct::power(3).unwrap();
        let surface = Surface::new(&b, &cfg()).unwrap();
        let p = Partition::singletons(3);
        let f = |z: Cplx| z * z - 0.3;
        let a = [c(1.0, 0.0), c(0.0, 0.0), c(0.0, 0.0)];
        let z = c(0.3, 0.4);
        assert!((t_apply(&surface, &p, &a, &f, z).unwrap() - f(z)).norm() < 1e-10);
    }

    #[test]
    fn t_limit_at_origin_is_continuous() {
        let b = BlaschkeProduct::power(6).unwrap();
        let surface = Surface::new(&b, &cfg()).unwrap();
        let report = dirichlet_dim(&b, &cfg()).unwrap();
        let f = |z: Cplx| c(0.3, 0.2) * z * z * z - z + 0.7;
        let a = &report.coefficient_basis[2];
        let at_zero = t_apply(&surface, &report.partition, a, &f, c(0.0, 0.0)).unwrap();
        let nearby = t_apply(&surface, &report.partition, a, &f, c(0.011, 0.0)).unwrap();
        assert!(at_zero.re.is_finite() && at_zero.im.is_finite());
        assert!((at_zero - nearby).norm() < 0.1);
    }
}
