//! Analytic continuation of the fiber `phi^-1(phi(z))` along paths, the
//! intrinsic labeling of local inverses, and the monodromy partition.

use std::f64::consts::TAU;

use rayon::prelude::*;
use serde::Serialize;

use crate::blaschke::BlaschkeProduct;
use crate::config::ToolConfig;
use crate::error::{Error, Result};
use crate::partition::Partition;
use crate::polyroots::{self, BranchAnalysis, BranchSet};
use crate::Cplx;

const MAX_STEP: f64 = 0.05;
const MAX_HALVINGS: i32 = 40;
const NEWTON_ITERATIONS: usize = 5;
const ROUNDING_RESIDUAL: f64 = 16.0;
const FIBER_RESIDUAL: f64 = 1e-9;
const MIN_BASE_SEPARATION: f64 = 1e-4;
const BASE_ANGLE_CANDIDATES: usize = 72;
const BASE_ANGLE_OFFSET: f64 = 0.1234;
const BOUNDARY_SCAN: usize = 256;

/// A bijection of `{0, .., n-1}` given by its image list.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Permutation {
    pub images: Vec<usize>,
}

impl Permutation {
    pub fn identity(n: usize) -> Self {
        Self { images: (0..n).collect() }
    }

    pub fn is_identity(&self) -> bool {
        self.images.iter().enumerate().all(|(i, &j)| i == j)
    }

    /// Length of the cycle through `start`.
    pub fn cycle_length(&self, start: usize) -> usize {
        let mut len = 1;
        let mut i = self.images[start];
        while i != start {
            i = self.images[i];
            len += 1;
        }
        len
    }

    pub fn then(&self, other: &Self) -> Self {
        Self { images: self.images.iter().map(|&i| other.images[i]).collect() }
    }
}

/// A path for the tracker. `ImageCircleLift` moves the image value along
/// `value * exp(2 pi i turns t)` instead of moving `z`.
#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum PathSpec {
    Segment {
        from: Cplx,
        to: Cplx,
    },
    /// Positive sweep is counterclockwise.
    Arc {
        center: Cplx,
        radius: f64,
        start_angle: f64,
        sweep: f64,
    },
    Polyline {
        points: Vec<Cplx>,
    },
    ImageCircleLift {
        value: Cplx,
        turns: f64,
    },
}

impl PathSpec {
    pub fn circle(center: Cplx, radius: f64, start_angle: f64) -> Self {
        PathSpec::Arc { center, radius, start_angle, sweep: TAU }
    }

    fn point(&self, s: f64) -> Cplx {
        match self {
            PathSpec::Segment { from, to } => from + (to - from) * s,
            PathSpec::Arc { center, radius, start_angle, sweep } => {
                center + Cplx::from_polar(*radius, start_angle + sweep * s)
            }
            PathSpec::Polyline { .. } => unreachable!("polylines are tracked piecewise"),
            PathSpec::ImageCircleLift { value, turns } => value * Cplx::from_polar(1.0, TAU * turns * s),
        }
    }

    fn length(&self) -> f64 {
        match self {
            PathSpec::Segment { from, to } => (to - from).norm(),
            PathSpec::Arc { radius, sweep, .. } => radius * sweep.abs(),
            PathSpec::Polyline { points } => points.windows(2).map(|w| (w[1] - w[0]).norm()).sum(),
            PathSpec::ImageCircleLift { value, turns } => value.norm() * TAU * turns.abs(),
        }
    }

    pub fn reversed(&self) -> Self {
        match self {
            PathSpec::Segment { from, to } => PathSpec::Segment { from: *to, to: *from },
            PathSpec::Arc { center, radius, start_angle, sweep } => {
                PathSpec::Arc { center: *center, radius: *radius, start_angle: start_angle + sweep, sweep: -sweep }
            }
            PathSpec::Polyline { points } => PathSpec::Polyline { points: points.iter().rev().copied().collect() },
            PathSpec::ImageCircleLift { value, turns } => {
                PathSpec::ImageCircleLift { value: value * Cplx::from_polar(1.0, TAU * turns), turns: -turns }
            }
        }
    }

    /// Distance from `e` to the traced curve in the `z` plane.
    fn distance_to(&self, e: Cplx) -> f64 {
        match self {
            PathSpec::Segment { from, to } => segment_distance(e, *from, *to),
            PathSpec::Arc { center, radius, start_angle, sweep } => {
                let rel = e - center;
                let angle = rel.im.atan2(rel.re);
                let along = ((angle - start_angle) * sweep.signum()).rem_euclid(TAU);
                if sweep.abs() >= TAU || along <= sweep.abs() {
                    (rel.norm() - radius).abs()
                } else {
                    (e - self.point(0.0)).norm().min((e - self.point(1.0)).norm())
                }
            }
            PathSpec::Polyline { points } => {
                points.windows(2).map(|w| segment_distance(e, w[0], w[1])).fold(f64::INFINITY, f64::min)
            }
            PathSpec::ImageCircleLift { .. } => f64::INFINITY,
        }
    }

    fn pieces(&self) -> Vec<PathSpec> {
        match self {
            PathSpec::Polyline { points } => {
                points.windows(2).filter(|w| w[0] != w[1]).map(|w| PathSpec::Segment { from: w[0], to: w[1] }).collect()
            }
            other => vec![other.clone()],
        }
    }
}

fn segment_distance(e: Cplx, a: Cplx, b: Cplx) -> f64 {
    let d = b - a;
    let len2 = d.norm_sqr();
    if len2 == 0.0 {
        return (e - a).norm();
    }
    let t = (((e - a) * d.conj()).re / len2).clamp(0.0, 1.0);
    (e - (a + d * t)).norm()
}

fn min_separation(values: &[Cplx]) -> f64 {
    let mut sep = f64::INFINITY;
    for (i, a) in values.iter().enumerate() {
        for b in &values[i + 1..] {
            sep = sep.min((a - b).norm());
        }
    }
    sep
}

/// For each `end[i]`, the index of the nearest `reference` value; fails
/// unless the matching is a bijection within half the reference separation.
fn match_fiber(end: &[Cplx], reference: &[Cplx]) -> Result<Permutation> {
    let limit = 0.5 * min_separation(reference);
    let mut used = vec![false; reference.len()];
    let mut images = Vec::with_capacity(end.len());
    for &w in end {
        let (j, d) = reference
            .iter()
            .enumerate()
            .map(|(j, r)| (j, (w - r).norm()))
            .min_by(|a, b| a.1.total_cmp(&b.1))
            .expect("nonempty fiber");
        if d > limit || std::mem::replace(&mut used[j], true) {
            return Err(Error::TrackingCollision(w));
        }
        images.push(j);
    }
    Ok(Permutation { images })
}

/// Predictor–corrector continuation of fiber points of one product.
pub struct Tracker<'a> {
    b: &'a BlaschkeProduct,
    cfg: &'a ToolConfig,
    branch_set: &'a BranchSet,
}

impl<'a> Tracker<'a> {
    pub fn new(b: &'a BlaschkeProduct, cfg: &'a ToolConfig, branch_set: &'a BranchSet) -> Self {
        Self { b, cfg, branch_set }
    }

    /// Continues every value in `values` along `path`.
    pub fn track(&self, path: &PathSpec, values: &[Cplx]) -> Result<Vec<Cplx>> {
        let mut current = values.to_vec();
        for piece in path.pieces() {
            current = self.track_piece(&piece, &current)?;
        }
        Ok(current)
    }

    pub fn track_all(&self, pieces: &[PathSpec], values: &[Cplx]) -> Result<Vec<Cplx>> {
        let mut current = values.to_vec();
        for piece in pieces {
            current = self.track(piece, &current)?;
        }
        Ok(current)
    }

    fn check_clearance(&self, path: &PathSpec) -> Result<()> {
        for &e in &self.branch_set.points {
            let d = path.distance_to(e);
            if d < self.cfg.safety_eps * (1.0 - 1e-9) {
                return Err(Error::PathTooCloseToBranchPoint { point: e, distance: d });
            }
        }
        Ok(())
    }

    fn track_piece(&self, path: &PathSpec, values: &[Cplx]) -> Result<Vec<Cplx>> {
        let length = path.length();
        if length == 0.0 || values.is_empty() {
            return Ok(values.to_vec());
        }
        self.check_clearance(path)?;
        let image = matches!(path, PathSpec::ImageCircleLift { .. });
        let target = |s: f64| if image { path.point(s) } else { self.b.eval(path.point(s)) };

        let h_max = (MAX_STEP / length).min(1.0);
        let h0 = (self.cfg.initial_step / length).min(h_max);
        let h_min = h0 * 2f64.powi(-MAX_HALVINGS);
        let mut h = h0;
        let mut s = 0.0;
        let mut w = values.to_vec();
        let mut v_old = target(0.0);
        while s < 1.0 {
            let s_new = if s + h >= 1.0 { 1.0 } else { s + h };
            let v_new = target(s_new);
            match self.corrector_step(&w, v_old, v_new)? {
                Some((next, easy)) => {
                    w = next;
                    s = s_new;
                    v_old = v_new;
                    if easy {
                        h = (h * 2.0).min(h_max);
                    }
                }
                None => {
                    h *= 0.5;
                    if h < h_min {
                        return Err(Error::MinStepReached(path.point(s)));
                    }
                }
            }
        }
        for &x in &w {
            if (self.b.eval(x) - v_old).norm() > FIBER_RESIDUAL {
                return Err(Error::TrackingCollision(x));
            }
        }
        Ok(w)
    }

    /// One Euler predictor plus Newton corrector step for every sheet.
    /// `Ok(None)` asks for a smaller step.
    fn corrector_step(&self, w: &[Cplx], v_old: Cplx, v_new: Cplx) -> Result<Option<(Vec<Cplx>, bool)>> {
        let sep = if w.len() > 1 { min_separation(w) } else { f64::INFINITY };
        let dv = v_new - v_old;
        let mut out = Vec::with_capacity(w.len());
        let mut easy = true;
        for &w0 in w {
            let slope = self.b.eval_derivative(w0);
            if slope.norm() == 0.0 {
                return Ok(None);
            }
            let predicted = w0 + dv / slope;
            let mut x = predicted;
            let mut converged = false;
            for iteration in 0..NEWTON_ITERATIONS {
                let residual = self.b.eval(x) - v_new;
                // Near a multiple critical point the step tolerance is below attainable accuracy.
                if iteration > 0 && residual.norm() <= ROUNDING_RESIDUAL * f64::EPSILON * (1.0 + v_new.norm()) {
                    converged = true;
                    easy &= iteration <= 2;
                    break;
                }
                let dx = residual / self.b.eval_derivative(x);
                if !(dx.re.is_finite() && dx.im.is_finite()) {
                    return Ok(None);
                }
                x -= dx;
                if x.norm() >= 1.0 {
                    return Ok(None);
                }
                if dx.norm() <= self.cfg.newton_tol * (1.0 + x.norm()) {
                    converged = true;
                    easy &= iteration <= 1;
                    break;
                }
            }
            if !converged || (x - predicted).norm() > 0.1 * sep || (x - w0).norm() > 0.3 * sep {
                return Ok(None);
            }
            out.push(x);
        }
        if out.len() > 1 && min_separation(&out) < 10.0 * self.cfg.newton_tol {
            return Err(Error::TrackingCollision(out[0]));
        }
        Ok(Some((out, easy)))
    }
}

/// The values `rho_0(z0), .., rho_{n-1}(z0)` at the base point, in intrinsic order.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LabeledFiber {
    pub base: Cplx,
    pub values: Vec<Cplx>,
    pub phi_value: Cplx,
}

/// A cluster of branch points encircled by one loop.
#[derive(Debug, Clone, PartialEq)]
struct BranchGroup {
    points: Vec<Cplx>,
    center: Cplx,
    radius: f64,
}

fn group_branch_points(points: &[Cplx], link: f64) -> Vec<BranchGroup> {
    let mut uf = crate::partition::UnionFind::new(points.len());
    for i in 0..points.len() {
        for j in i + 1..points.len() {
            if (points[i] - points[j]).norm() < link {
                uf.union(i, j);
            }
        }
    }
    let mut groups: Vec<(usize, Vec<Cplx>)> = Vec::new();
    for (i, &p) in points.iter().enumerate() {
        let root = uf.find(i);
        match groups.iter_mut().find(|g| g.0 == root) {
            Some(g) => g.1.push(p),
            None => groups.push((root, vec![p])),
        }
    }
    groups
        .into_iter()
        .map(|(_, pts)| {
            let center = pts.iter().sum::<Cplx>() / pts.len() as f64;
            let radius = pts.iter().map(|p| (p - center).norm()).fold(0.0, f64::max);
            BranchGroup { points: pts, center, radius }
        })
        .collect()
}

/// One generator loop of the bouquet: out along `outgoing`, once around
/// the circle, then back.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LoopPlan {
    pub encircles: Vec<Cplx>,
    /// Set when several branch points closer than `4 * safety_eps` share a loop.
    pub merged: bool,
    pub center: Cplx,
    pub radius: f64,
    pub outgoing: Vec<PathSpec>,
}

impl LoopPlan {
    pub fn pieces(&self) -> Vec<PathSpec> {
        let start = self.outgoing.last().map_or(self.center, |p| match p {
            PathSpec::Segment { to, .. } => *to,
            other => other.point(1.0),
        });
        let angle = (start - self.center).im.atan2((start - self.center).re);
        let mut pieces = self.outgoing.clone();
        pieces.push(PathSpec::circle(self.center, self.radius, angle));
        pieces.extend(self.outgoing.iter().rev().map(PathSpec::reversed));
        pieces
    }
}

/// A corridor from `from` to `to` that keeps every branch group outside
/// radius `group.radius + 2 safety_eps`, passing obstacles on the left.
fn safe_path(from: Cplx, to: Cplx, groups: &[&BranchGroup], safety_eps: f64) -> Vec<PathSpec> {
    let d = to - from;
    let len = d.norm();
    if len == 0.0 {
        return Vec::new();
    }
    let dir = d / len;
    let mut hits: Vec<(f64, f64, Cplx, f64, bool)> = Vec::new();
    for g in groups {
        let rho = g.radius + 2.0 * safety_eps;
        let rel = (g.center - from) * dir.conj();
        if rel.im.abs() >= rho {
            continue;
        }
        let half = (rho * rho - rel.im * rel.im).sqrt();
        let (enter, exit) = (rel.re - half, rel.re + half);
        if exit <= 0.0 || enter >= len {
            continue;
        }
        let ends_inside = (to - g.center).norm() < rho;
        hits.push((enter.max(0.0), exit, g.center, rho, ends_inside));
    }
    hits.sort_by(|a, b| a.0.total_cmp(&b.0));
    let mut pieces = Vec::new();
    let mut cursor = from;
    for (enter, exit, center, rho, ends_inside) in hits {
        let entry = from + dir * enter;
        if (entry - cursor).norm() > 0.0 && ((entry - from) * dir.conj()).re > ((cursor - from) * dir.conj()).re {
            pieces.push(PathSpec::Segment { from: cursor, to: entry });
            cursor = entry;
        }
        let a1 = (cursor - center).im.atan2((cursor - center).re);
        if ends_inside {
            let a2 = (to - center).im.atan2((to - center).re);
            let sweep = -((a1 - a2).rem_euclid(TAU));
            pieces.push(PathSpec::Arc { center, radius: rho, start_angle: a1, sweep });
            cursor = center + Cplx::from_polar(rho, a2);
            pieces.push(PathSpec::Segment { from: cursor, to });
            return pieces;
        }
        let exit_point = from + dir * exit;
        let a2 = (exit_point - center).im.atan2((exit_point - center).re);
        let sweep = -((a1 - a2).rem_euclid(TAU));
        pieces.push(PathSpec::Arc { center, radius: rho, start_angle: a1, sweep });
        cursor = exit_point;
    }
    if (to - cursor).norm() > 0.0 {
        pieces.push(PathSpec::Segment { from: cursor, to });
    }
    pieces
}

/// Plans the loop bouquet based at `base` around the branch set.
pub fn plan_loops(branch_set: &BranchSet, base: Cplx, cfg: &ToolConfig) -> Vec<LoopPlan> {
    let groups = group_branch_points(&branch_set.points, 4.0 * cfg.safety_eps);
    plan_group_loops(&groups, base, cfg.safety_eps)
}

fn plan_group_loops(groups: &[BranchGroup], base: Cplx, safety_eps: f64) -> Vec<LoopPlan> {
    let mut plans = Vec::with_capacity(groups.len());
    for (k, g) in groups.iter().enumerate() {
        let others: Vec<&BranchGroup> = groups.iter().enumerate().filter(|(j, _)| *j != k).map(|(_, o)| o).collect();
        let d_other =
            others.iter().flat_map(|o| o.points.iter()).map(|p| (p - g.center).norm()).fold(f64::INFINITY, f64::min);
        // Loops stay inside the disk, where phi has no poles.
        let to_boundary = 1.0 - g.center.norm();
        let radius = (0.4 * d_other)
            .min(0.4 * (base - g.center).norm())
            .min(0.5 * to_boundary)
            .min(0.1)
            .max(g.radius + 2.0 * safety_eps);
        let toward_base = (base - g.center) / (base - g.center).norm();
        let entry = g.center + toward_base * radius;
        plans.push(LoopPlan {
            encircles: g.points.clone(),
            merged: g.points.len() > 1,
            center: g.center,
            radius,
            outgoing: safe_path(base, entry, &others, safety_eps),
        });
    }
    plans
}

/// A loop generator with its permutation of labels.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Generator {
    #[serde(rename = "loop")]
    pub plan: LoopPlan,
    pub perm: Permutation,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MonodromyReport {
    pub branch_set: BranchSet,
    pub base: Cplx,
    pub fiber: LabeledFiber,
    pub generators: Vec<Generator>,
    pub partition: Partition,
    pub q: usize,
    pub boundary_label_perm: Permutation,
    pub merged_loops: bool,
}

/// Values of all local inverses at a point, or a marker that the point is
/// too close to the branch set for pointwise values.
#[derive(Debug, Clone, PartialEq)]
pub enum LocalValues {
    Values(Vec<Cplx>),
    OnBranch,
}

/// A product together with its branch data and labeled base fiber.
#[derive(Debug, Clone)]
pub struct Surface {
    b: BlaschkeProduct,
    cfg: ToolConfig,
    analysis: BranchAnalysis,
    groups: Vec<BranchGroup>,
    fiber: LabeledFiber,
    base_radius: f64,
}

impl Surface {
    pub fn new(b: &BlaschkeProduct, cfg: &ToolConfig) -> Result<Self> {
        cfg.validate()?;
        let analysis = polyroots::analyze(b, cfg)?;
        let groups = group_branch_points(&analysis.branch_set.points, 4.0 * cfg.safety_eps);
        let mut surface = Self {
            b: b.clone(),
            cfg: cfg.clone(),
            analysis,
            groups,
            fiber: LabeledFiber { base: Cplx::new(0.0, 0.0), values: Vec::new(), phi_value: Cplx::new(0.0, 0.0) },
            base_radius: 0.0,
        };
        surface.label_fiber()?;
        Ok(surface)
    }

    pub fn product(&self) -> &BlaschkeProduct {
        &self.b
    }

    pub fn config(&self) -> &ToolConfig {
        &self.cfg
    }

    pub fn analysis(&self) -> &BranchAnalysis {
        &self.analysis
    }

    pub fn branch_set(&self) -> &BranchSet {
        &self.analysis.branch_set
    }

    pub fn fiber(&self) -> &LabeledFiber {
        &self.fiber
    }

    pub fn base_radius(&self) -> f64 {
        self.base_radius
    }

    pub fn tracker(&self) -> Tracker<'_> {
        Tracker::new(&self.b, &self.cfg, &self.analysis.branch_set)
    }

    fn base_radius_for(&self) -> Result<f64> {
        let max_e = self.branch_set().points.iter().map(|e| e.norm()).fold(0.0, f64::max);
        let c_max = self.analysis.max_critical_value_modulus();
        let threshold = c_max + 0.05 * (1.0 - c_max);
        let mut r = 0.9f64.max(0.5 * (1.0 + max_e));
        loop {
            let min_modulus = (0..BOUNDARY_SCAN)
                .map(|k| self.b.eval(Cplx::from_polar(r, TAU * k as f64 / BOUNDARY_SCAN as f64)).norm())
                .fold(f64::INFINITY, f64::min);
            if min_modulus > threshold {
                return Ok(r);
            }
            r = 0.5 * (1.0 + r);
            if r > 1.0 - 1e-9 {
                return Err(Error::NoValidBasePoint);
            }
        }
    }

    /// Smallest distance from another branch group to a straight corridor
    /// from `z0` to each group.
    fn ray_clearance(&self, z0: Cplx) -> f64 {
        let mut clearance = f64::INFINITY;
        for (k, g) in self.groups.iter().enumerate() {
            for (j, o) in self.groups.iter().enumerate() {
                if j != k {
                    let d = segment_distance(o.center, z0, g.center) - o.radius;
                    clearance = clearance.min(d);
                }
            }
        }
        clearance
    }

    fn label_fiber(&mut self) -> Result<()> {
        let n = self.b.order();
        let r = self.base_radius_for()?;
        self.base_radius = r;
        let angles: Vec<f64> = match self.cfg.base_angle {
            Some(theta) => vec![theta],
            None => (0..BASE_ANGLE_CANDIDATES)
                .map(|k| TAU * k as f64 / BASE_ANGLE_CANDIDATES as f64 + BASE_ANGLE_OFFSET)
                .collect(),
        };
        let mut best: Option<(f64, Cplx, Vec<Cplx>)> = None;
        for theta in angles {
            let z0 = Cplx::from_polar(r, theta);
            let Ok(mut fiber) = polyroots::preimages_with(&self.b, self.b.eval(z0), &self.analysis.critical) else {
                continue;
            };
            let Some(own) =
                fiber.iter().enumerate().min_by(|a, b| (a.1 - z0).norm().total_cmp(&(b.1 - z0).norm())).map(|(i, _)| i)
            else {
                continue;
            };
            if (fiber[own] - z0).norm() > 1e-8 {
                continue;
            }
            fiber.remove(own);
            fiber.insert(0, z0);
            if n > 1 && min_separation(&fiber) < MIN_BASE_SEPARATION {
                continue;
            }
            let score = self.ray_clearance(z0);
            if best.as_ref().is_none_or(|b| score > b.0) {
                best = Some((score, z0, fiber));
            }
        }
        let (_, z0, fiber) = best.ok_or(Error::NoValidBasePoint)?;
        let phi_value = self.b.eval(z0);
        let values = if n == 1 {
            fiber
        } else {
            let lift = PathSpec::ImageCircleLift { value: phi_value, turns: 1.0 };
            let end = self.tracker().track(&lift, &fiber)?;
            let pi = match_fiber(&end, &fiber)?;
            if pi.cycle_length(0) != n {
                return Err(Error::LabelingFailed(pi.cycle_length(0)));
            }
            let mut values = Vec::with_capacity(n);
            let mut i = 0;
            for _ in 0..n {
                values.push(fiber[i]);
                i = pi.images[i];
            }
            values
        };
        self.fiber = LabeledFiber { base: z0, values, phi_value };
        Ok(())
    }

    /// Continues the labeled base fiber along `pieces` and returns values in label order.
    pub fn track_labeled(&self, pieces: &[PathSpec]) -> Result<Vec<Cplx>> {
        self.tracker().track_all(pieces, &self.fiber.values)
    }

    fn loop_permutation(&self, pieces: &[PathSpec]) -> Result<Permutation> {
        let end = self.track_labeled(pieces)?;
        match_fiber(&end, &self.fiber.values)
    }

    pub fn loop_plans(&self) -> Vec<LoopPlan> {
        plan_group_loops(&self.groups, self.fiber.base, self.cfg.safety_eps)
    }

    pub fn boundary_permutation(&self) -> Result<Permutation> {
        let z0 = self.fiber.base;
        let circle = PathSpec::circle(Cplx::new(0.0, 0.0), z0.norm(), z0.im.atan2(z0.re));
        self.loop_permutation(&[circle])
    }

    pub fn monodromy(&self) -> Result<MonodromyReport> {
        let n = self.b.order();
        let plans = self.loop_plans();
        let generators: Vec<Generator> = plans
            .into_par_iter()
            .map(|plan| {
                let perm = self.loop_permutation(&plan.pieces())?;
                Ok(Generator { plan, perm })
            })
            .collect::<Result<_>>()?;
        let boundary = self.boundary_permutation()?;
        if !boundary.is_identity() {
            return Err(Error::BoundaryLoopNotIdentity(boundary.images));
        }
        let images: Vec<Vec<usize>> = generators.iter().map(|g| g.perm.images.clone()).collect();
        let partition = Partition::orbits(n, &images);
        Ok(MonodromyReport {
            branch_set: self.analysis.branch_set.clone(),
            base: self.fiber.base,
            fiber: self.fiber.clone(),
            merged_loops: generators.iter().any(|g| g.plan.merged),
            generators,
            q: partition.q(),
            partition,
            boundary_label_perm: boundary,
        })
    }

    /// A corridor from the base point to `target`.
    pub fn path_to(&self, target: Cplx) -> Vec<PathSpec> {
        self.path_between(self.fiber.base, target)
    }

    pub fn path_between(&self, from: Cplx, to: Cplx) -> Vec<PathSpec> {
        let groups: Vec<&BranchGroup> = self.groups.iter().collect();
        safe_path(from, to, &groups, self.cfg.safety_eps)
    }

    pub fn local_inverse_values(&self, target: Cplx) -> Result<LocalValues> {
        if self.branch_set().distance_to(target) < self.cfg.safety_eps {
            return Ok(LocalValues::OnBranch);
        }
        Ok(LocalValues::Values(self.track_labeled(&self.path_to(target))?))
    }

    /// Radius near `mean_circle_radius` whose circle about `center` keeps
    /// `safety_eps` away from the branch set.
    fn mean_radius(&self, center: Cplx) -> Result<f64> {
        let base = self.cfg.mean_circle_radius;
        for factor in [1.0, 0.8, 1.25, 0.6, 1.5, 0.45, 1.8, 0.35, 2.2] {
            let r = base * factor;
            let clear =
                self.branch_set().points.iter().all(|e| ((e - center).norm() - r).abs() >= 1.5 * self.cfg.safety_eps);
            if clear && center.norm() + r < self.base_radius {
                return Ok(r);
            }
        }
        Err(Error::PathTooCloseToBranchPoint { point: center, distance: base })
    }

    /// Labeled values at `mean_samples` equispaced points of a small circle
    /// about `center`, continued consecutively around the circle.
    pub fn circle_samples(&self, center: Cplx) -> Result<Vec<(Cplx, Vec<Cplx>)>> {
        let radius = self.mean_radius(center)?;
        let m = self.cfg.mean_samples;
        let toward = self.fiber.base - center;
        let angle0 = toward.im.atan2(toward.re);
        let start = center + Cplx::from_polar(radius, angle0);
        let mut values = self.track_labeled(&self.path_to(start))?;
        let mut samples = Vec::with_capacity(m);
        samples.push((start, values.clone()));
        let tracker = self.tracker();
        for k in 1..m {
            let arc = PathSpec::Arc {
                center,
                radius,
                start_angle: angle0 + TAU * (k - 1) as f64 / m as f64,
                sweep: TAU / m as f64,
            };
            values = tracker.track(&arc, &values)?;
            samples.push((center + Cplx::from_polar(radius, angle0 + TAU * k as f64 / m as f64), values.clone()));
        }
        Ok(samples)
    }

    /// `F_i(target) = sum_{j in G_i} f(rho_j) rho_j` per block; on the branch
    /// set by the circular mean of the analytic block sums.
    pub fn block_sum_at(&self, partition: &Partition, target: Cplx, f: &dyn Fn(Cplx) -> Cplx) -> Result<Vec<Cplx>> {
        let sums = |values: &[Cplx]| -> Vec<Cplx> {
            partition.blocks().iter().map(|block| block.iter().map(|&j| f(values[j]) * values[j]).sum()).collect()
        };
        match self.local_inverse_values(target)? {
            LocalValues::Values(values) => Ok(sums(&values)),
            LocalValues::OnBranch => {
                let samples = self.circle_samples(target)?;
                let mut mean = vec![Cplx::new(0.0, 0.0); partition.q()];
                for (_, values) in &samples {
                    for (acc, s) in mean.iter_mut().zip(sums(values)) {
                        *acc += s;
                    }
                }
                Ok(mean.into_iter().map(|s| s / samples.len() as f64).collect())
            }
        }
    }

    /// `max_{i,j} |rho_i(rho_j(z0)) - rho_{i+j}(z0)|`, with `rho_i` continued
    /// from `z0` to `rho_j(z0)` along `j` lifts of the image circle.
    pub fn group_law_deviation(&self) -> Result<f64> {
        let n = self.b.order();
        let values = &self.fiber.values;
        let deviations: Vec<f64> = (1..n)
            .into_par_iter()
            .map(|j| {
                let lift = PathSpec::ImageCircleLift { value: self.fiber.phi_value, turns: j as f64 };
                let end = self.tracker().track(&lift, values)?;
                Ok((0..n).map(|i| (end[i] - values[(i + j) % n]).norm()).fold(0.0, f64::max))
            })
            .collect::<Result<_>>()?;
        Ok(deviations.into_iter().fold(0.0, f64::max))
    }
}

pub fn label_fiber(b: &BlaschkeProduct, cfg: &ToolConfig) -> Result<LabeledFiber> {
    Ok(Surface::new(b, cfg)?.fiber)
}

pub fn monodromy(b: &BlaschkeProduct, cfg: &ToolConfig) -> Result<MonodromyReport> {
    Surface::new(b, cfg)?.monodromy()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> Cplx {
        Cplx::new(re, im)
    }

    fn cfg() -> ToolConfig {
        ToolConfig::default()
    }

    fn part(n: usize, blocks: &[&[usize]]) -> Partition {
        Partition::new(n, blocks.iter().map(|b| b.to_vec()).collect()).unwrap()
    }

    fn z4_phi() -> BlaschkeProduct {
        BlaschkeProduct::new(&[(c(0.0, 0.0), 4), (c(0.5, 0.0), 1)], c(1.0, 0.0)).unwrap()
    }

    #[test]
    fn loops_near_the_boundary_stay_in_the_disk() {
        let zeros = [
            (c(-0.4524020184148023, 0.679503226769822), 1),
            (c(-0.3521789313721196, 0.22968877141232394), 1),
            (c(0.17763281374798134, -0.6744732865656531), 1),
        ];
        let b = BlaschkeProduct::new(&zeros, c(1.0, 0.0)).unwrap();
        let surface = Surface::new(&b, &cfg()).unwrap();
        for plan in surface.loop_plans() {
            assert!(plan.center.norm() + plan.radius < 1.0);
        }
        assert_eq!(surface.monodromy().unwrap().partition, part(3, &[&[0], &[1, 2]]));
    }

    #[test]
    fn constant_path_keeps_fiber() {
        let b = BlaschkeProduct::power(5).unwrap();
        let e = BranchSet::new(vec![c(0.0, 0.0)], 1e-8);
        let config = cfg();
        let tracker = Tracker::new(&b, &config, &e);
        let fiber = vec![c(0.3, 0.0), c(0.0, 0.3)];
        let path = PathSpec::Segment { from: c(0.3, 0.0), to: c(0.3, 0.0) };
        assert_eq!(tracker.track(&path, &fiber).unwrap(), fiber);
    }

    #[test]
    fn global_inverses_return_home() {
        let b = BlaschkeProduct::power(5).unwrap();
        let e = BranchSet::new(vec![c(0.0, 0.0)], 1e-8);
        let config = cfg();
        let tracker = Tracker::new(&b, &config, &e);
        let fiber: Vec<Cplx> = (0..5).map(|j| Cplx::from_polar(0.9, TAU * j as f64 / 5.0)).collect();
        let end = tracker.track(&PathSpec::circle(c(0.0, 0.0), 0.9, 0.0), &fiber).unwrap();
        assert!(match_fiber(&end, &fiber).unwrap().is_identity());
    }

    #[test]
    fn path_near_branch_point_is_rejected() {
        let b = BlaschkeProduct::power(3).unwrap();
        let e = BranchSet::new(vec![c(0.0, 0.0)], 1e-8);
        let config = cfg();
        let tracker = Tracker::new(&b, &config, &e);
        let path = PathSpec::Segment { from: c(-0.5, 1e-4), to: c(0.5, 1e-4) };
        assert!(matches!(tracker.track(&path, &[c(-0.5, 1e-4)]), Err(Error::PathTooCloseToBranchPoint { .. })));
    }

    #[test]
    fn power_labels_are_rotations() {
        for n in 2..=6 {
            let fiber = label_fiber(&BlaschkeProduct::power(n).unwrap(), &cfg()).unwrap();
            let omega = Cplx::from_polar(1.0, TAU / n as f64);
            for (j, v) in fiber.values.iter().enumerate() {
                assert!((v - fiber.base * omega.powu(j as u32)).norm() < 1e-10);
            }
        }
    }

    #[test]
    fn n_lifts_return_to_base() {
        let surface = Surface::new(&z4_phi(), &cfg()).unwrap();
        let fiber = surface.fiber();
        let lift = PathSpec::ImageCircleLift { value: fiber.phi_value, turns: 5.0 };
        let end = surface.tracker().track(&lift, &[fiber.base]).unwrap();
        assert!((end[0] - fiber.base).norm() < 1e-7);
    }

    #[test]
    fn single_loop_plan_for_origin() {
        let e = BranchSet::new(vec![c(0.0, 0.0)], 1e-8);
        let plans = plan_loops(&e, c(0.9, 0.0), &cfg());
        assert_eq!(plans.len(), 1);
        assert!((plans[0].radius - 0.1).abs() < 1e-15);
        assert_eq!(plans[0].outgoing, vec![PathSpec::Segment { from: c(0.9, 0.0), to: c(0.1, 0.0) }]);
    }

    #[test]
    fn close_branch_points_share_a_flagged_loop() {
        let e = BranchSet::new(vec![c(0.2, 0.0), c(0.2 + 1e-5, 0.0)], 1e-8);
        let plans = plan_loops(&e, c(0.9, 0.0), &cfg());
        assert_eq!(plans.len(), 1);
        assert!(plans[0].merged);
    }

    #[test]
    fn corridors_detour_around_obstacles() {
        let e = BranchSet::new(vec![c(0.0, 0.0), c(0.0, 0.5)], 1e-8);
        let config = cfg();
        let plans = plan_loops(&e, c(0.0, 0.9), &config);
        assert_eq!(plans.len(), 2);
        for plan in &plans {
            for piece in plan.pieces() {
                for &p in &e.points {
                    assert!(piece.distance_to(p) >= config.safety_eps);
                }
            }
        }
    }

    #[test]
    fn monodromy_of_power_is_trivial() {
        let report = monodromy(&BlaschkeProduct::power(5).unwrap(), &cfg()).unwrap();
        assert_eq!(report.partition, Partition::singletons(5));
        assert_eq!(report.q, 5);
        assert!(report.boundary_label_perm.is_identity());
    }

    #[test]
    fn monodromy_of_z4_phi() {
        let report = monodromy(&z4_phi(), &cfg()).unwrap();
        assert_eq!(report.partition, part(5, &[&[0], &[1, 2, 3, 4]]));
        assert!(report.generators.iter().any(|g| !g.perm.is_identity()));
        assert!(report.generators.iter().all(|g| g.perm.images[0] == 0));
    }

    #[test]
    fn local_values_examples() {
        let surface = Surface::new(&BlaschkeProduct::power(5).unwrap(), &cfg()).unwrap();
        let LocalValues::Values(values) = surface.local_inverse_values(c(0.2, 0.0)).unwrap() else {
            panic!("expected values")
        };
        for j in 0..5 {
            let e = Cplx::from_polar(0.2, TAU * j as f64 / 5.0);
            assert!(values.iter().any(|v| (v - e).norm() < 1e-10));
        }
        assert!((values[0] - 0.2).norm() < 1e-12);

        let surface = Surface::new(&z4_phi(), &cfg()).unwrap();
        assert_eq!(surface.local_inverse_values(c(0.0, 0.0)).unwrap(), LocalValues::OnBranch);
    }

    #[test]
    fn block_sums_on_branch() {
        let surface = Surface::new(&z4_phi(), &cfg()).unwrap();
        let p = part(5, &[&[0], &[1, 2, 3, 4]]);
        let sums = surface.block_sum_at(&p, c(0.0, 0.0), &|_| c(1.0, 0.0)).unwrap();
        assert!(sums[0].norm() < 1e-10);
        assert!((sums[1] - 0.5).norm() < 1e-6);

        let target = c(0.1, 0.2);
        let f = |z: Cplx| z * z + 1.0;
        let sums = surface.block_sum_at(&p, target, &f).unwrap();
        assert!((sums[0] - f(target) * target).norm() < 1e-12);
    }

    #[test]
    fn group_law_holds() {
        let b = BlaschkeProduct::new(&[(c(0.1, 0.2), 1), (c(-0.4, 0.3), 2), (c(0.5, -0.5), 1)], c(0.0, 1.0)).unwrap();
        let surface = Surface::new(&b, &cfg()).unwrap();
        assert!(surface.group_law_deviation().unwrap() < 1e-6);
    }
}
