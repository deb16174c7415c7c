//! Open invariant domains as saturated unions of open boxes, and the more
//! general [`Region`]s that map bodies live on (box domains, saturated balls
//! and unions of those).

use std::sync::Arc;

use rand::Rng;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::group::FiniteGroup;
use crate::linalg;

/// Open axis-aligned box `∏ (lo_i, hi_i)`.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct AxisBox {
    pub lo: Vec<f64>,
    pub hi: Vec<f64>,
}

impl AxisBox {
    pub fn new(lo: Vec<f64>, hi: Vec<f64>) -> Result<Self> {
        if lo.len() != hi.len() {
            return Err(Error::DimensionMismatch {
                expected: lo.len(),
                found: hi.len(),
            });
        }
        if lo.iter().zip(&hi).any(|(a, b)| !(a < b)) {
            return Err(Error::Config(format!("box with empty side: lo {lo:?}, hi {hi:?}")));
        }
        Ok(AxisBox { lo, hi })
    }

    pub fn dim(&self) -> usize {
        self.lo.len()
    }

    pub fn contains(&self, x: &[f64]) -> bool {
        x.iter().zip(self.lo.iter().zip(&self.hi)).all(|(v, (a, b))| a < v && v < b)
    }

    /// Distance from `x` to the box boundary, negative outside.
    pub fn inner_distance(&self, x: &[f64]) -> f64 {
        x.iter()
            .zip(self.lo.iter().zip(&self.hi))
            .map(|(v, (a, b))| (v - a).min(b - v))
            .fold(f64::INFINITY, f64::min)
    }

    /// Euclidean distance from `x` to the closed box.
    pub fn outer_distance(&self, x: &[f64]) -> f64 {
        x.iter()
            .zip(self.lo.iter().zip(&self.hi))
            .map(|(v, (a, b))| {
                let d = if v < a {
                    a - v
                } else if v > b {
                    v - b
                } else {
                    0.0
                };
                d * d
            })
            .sum::<f64>()
            .sqrt()
    }

    pub fn min_edge(&self) -> f64 {
        self.lo.iter().zip(&self.hi).map(|(a, b)| b - a).fold(f64::INFINITY, f64::min)
    }

    pub fn max_corner_norm(&self) -> f64 {
        self.lo
            .iter()
            .zip(&self.hi)
            .map(|(a, b)| a.abs().max(b.abs()).powi(2))
            .sum::<f64>()
            .sqrt()
    }

    pub fn center(&self) -> Vec<f64> {
        self.lo.iter().zip(&self.hi).map(|(a, b)| 0.5 * (a + b)).collect()
    }

    fn corners(&self) -> Vec<Vec<f64>> {
        let n = self.dim();
        (0..1usize << n)
            .map(|mask| (0..n).map(|i| if mask >> i & 1 == 1 { self.hi[i] } else { self.lo[i] }).collect())
            .collect()
    }
}

/// `Ω = ∪_{g∈G} g·(∪ boxes)`, stored as `(g, box)` pieces with
/// `x ∈ g·B ⇔ g⁻¹x ∈ B`.
#[derive(Clone, Debug)]
pub struct InvariantDomain {
    dim: usize,
    group: Arc<FiniteGroup>,
    boxes: Vec<AxisBox>,
    pieces: Vec<(usize, usize)>,
    saturated: bool,
}

pub fn saturate(boxes: Vec<AxisBox>, group: Arc<FiniteGroup>) -> Result<InvariantDomain> {
    if boxes.is_empty() {
        return Err(Error::EmptyDomain);
    }
    let dim = group.dim();
    for b in &boxes {
        if b.dim() != dim {
            return Err(Error::DimensionMismatch {
                expected: dim,
                found: b.dim(),
            });
        }
    }
    let mut pieces: Vec<(usize, usize)> = Vec::new();
    for (bi, b) in boxes.iter().enumerate() {
        let corners = (dim <= 8).then(|| b.corners());
        let mut images: Vec<usize> = Vec::new();
        for g in 0..group.order() {
            // Skip g when g·B coincides with an image already stored.
            let duplicate = corners.as_ref().is_some_and(|cs| {
                images.iter().any(|&h| {
                    let rel = group.mul(group.inv(h), g);
                    cs.iter().all(|c| {
                        let img = group.act(rel, c);
                        cs.iter().any(|d| linalg::dist(&img, d) <= 1e-12 * (1.0 + linalg::norm(d)))
                    })
                })
            });
            if !duplicate {
                images.push(g);
                pieces.push((g, bi));
            }
        }
    }
    Ok(InvariantDomain {
        dim,
        group,
        boxes,
        pieces,
        saturated: true,
    })
}

impl InvariantDomain {
    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn group(&self) -> &Arc<FiniteGroup> {
        &self.group
    }

    pub fn boxes(&self) -> &[AxisBox] {
        &self.boxes
    }

    pub fn pieces(&self) -> &[(usize, usize)] {
        &self.pieces
    }

    pub fn is_saturated(&self) -> bool {
        self.saturated
    }

    pub fn contains(&self, x: &[f64]) -> bool {
        self.pieces
            .iter()
            .any(|&(g, b)| self.boxes[b].contains(&self.group.act(self.group.inv(g), x)))
    }

    /// Lower bound on the distance from `x` to the complement of Ω (the best
    /// single piece); non-positive outside Ω.
    pub fn clearance(&self, x: &[f64]) -> f64 {
        self.pieces
            .iter()
            .map(|&(g, b)| self.boxes[b].inner_distance(&self.group.act(self.group.inv(g), x)))
            .fold(f64::NEG_INFINITY, f64::max)
    }

    /// Every point of Ω has norm below this.
    pub fn bounding_radius(&self) -> f64 {
        self.boxes.iter().map(AxisBox::max_corner_norm).fold(0.0, f64::max)
    }

    pub fn min_edge(&self) -> f64 {
        self.boxes.iter().map(AxisBox::min_edge).fold(f64::INFINITY, f64::min)
    }

    /// Sample points of the closed shell `{x ∈ cl Ω : dist(x, ∂Ω) ≤ margin}`,
    /// taken from the boundary layer of every piece at depths `0, step, …, margin`.
    pub fn shell_samples(&self, margin: f64, step: f64) -> Vec<Vec<f64>> {
        let mut out = Vec::new();
        for &(g, bi) in &self.pieces {
            let b = &self.boxes[bi];
            let n = self.dim;
            // Keep the per-face lattice bounded in higher dimensions.
            let face_cells: f64 = (0..n).map(|i| (b.hi[i] - b.lo[i]) / step + 1.0).product();
            let scale = if face_cells > 2.0e5 {
                (face_cells / 2.0e5).powf(1.0 / (n.max(2) - 1) as f64)
            } else {
                1.0
            };
            let face_step = step * scale;
            let depths: Vec<f64> = {
                let k = (margin / step).ceil() as usize;
                (0..=k).map(|i| (i as f64 * step).min(margin)).collect()
            };
            for axis in 0..n {
                let other: Vec<usize> = (0..n).filter(|&j| j != axis).collect();
                let counts: Vec<usize> = other
                    .iter()
                    .map(|&j| ((b.hi[j] - b.lo[j]) / face_step).ceil() as usize + 1)
                    .collect();
                let total: usize = counts.iter().product();
                for side in [0, 1] {
                    for &depth in &depths {
                        for flat in 0..total {
                            let mut p = vec![0.0; n];
                            p[axis] = if side == 0 { b.lo[axis] + depth } else { b.hi[axis] - depth };
                            let mut rem = flat;
                            for (k, &j) in other.iter().enumerate() {
                                let c = rem % counts[k];
                                rem /= counts[k];
                                let span = b.hi[j] - b.lo[j];
                                p[j] = if counts[k] == 1 {
                                    b.lo[j] + 0.5 * span
                                } else {
                                    b.lo[j] + span * c as f64 / (counts[k] - 1) as f64
                                };
                            }
                            let x = self.group.act(g, &p);
                            let clear = self.clearance(&x);
                            if clear <= margin + 1e-12 {
                                out.push(x);
                            }
                        }
                    }
                }
            }
        }
        out
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct HypothesisStatus {
    pub holds: bool,
    pub origin_in_domain: bool,
    pub fixed_dim: usize,
}

/// `holds` iff `0 ∉ Ω` or `dim V^G > 0`.
pub fn hypothesis_check(domain: &InvariantDomain) -> HypothesisStatus {
    let group = domain.group();
    let origin_in_domain = domain.contains(&vec![0.0; domain.dim()]);
    let fixed_dim = group.fixed_subspace(&group.whole()).dim();
    HypothesisStatus {
        holds: !origin_in_domain || fixed_dim > 0,
        origin_in_domain,
        fixed_dim,
    }
}

/// Open ball `B(center; radius)`.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Ball {
    pub center: Vec<f64>,
    pub radius: f64,
}

/// Where a map is defined.
#[derive(Clone, Debug)]
pub enum Region {
    Empty,
    Domain(Arc<InvariantDomain>),
    /// `∪_{g, ball} g·ball`
    OrbitBalls {
        group: Arc<FiniteGroup>,
        balls: Vec<Ball>,
    },
    Union(Vec<Region>),
}

impl Region {
    pub fn contains(&self, x: &[f64]) -> bool {
        match self {
            Region::Empty => false,
            Region::Domain(d) => d.contains(x),
            Region::OrbitBalls { group, balls } => balls
                .iter()
                .any(|b| (0..group.order()).any(|g| linalg::dist(x, &group.act(g, &b.center)) < b.radius)),
            Region::Union(parts) => parts.iter().any(|p| p.contains(x)),
        }
    }

    /// Lower bound on the distance to the complement; non-positive outside.
    pub fn clearance(&self, x: &[f64]) -> f64 {
        match self {
            Region::Empty => f64::NEG_INFINITY,
            Region::Domain(d) => d.clearance(x),
            Region::OrbitBalls { group, balls } => balls
                .iter()
                .flat_map(|b| (0..group.order()).map(move |g| b.radius - linalg::dist(x, &group.act(g, &b.center))))
                .fold(f64::NEG_INFINITY, f64::max),
            Region::Union(parts) => parts.iter().map(|p| p.clearance(x)).fold(f64::NEG_INFINITY, f64::max),
        }
    }

    pub fn is_empty(&self) -> bool {
        match self {
            Region::Empty => true,
            Region::Domain(_) => false,
            Region::OrbitBalls { balls, .. } => balls.is_empty(),
            Region::Union(parts) => parts.iter().all(Region::is_empty),
        }
    }

    pub fn bounding_radius(&self) -> f64 {
        match self {
            Region::Empty => 0.0,
            Region::Domain(d) => d.bounding_radius(),
            Region::OrbitBalls { balls, .. } => balls
                .iter()
                .map(|b| linalg::norm(&b.center) + b.radius)
                .fold(0.0, f64::max),
            Region::Union(parts) => parts.iter().map(Region::bounding_radius).fold(0.0, f64::max),
        }
    }

    /// Closed boundary shell samples, see [`InvariantDomain::shell_samples`].
    pub fn shell_samples(&self, margin: f64, step: f64) -> Vec<Vec<f64>> {
        match self {
            Region::Empty => Vec::new(),
            Region::Domain(d) => d.shell_samples(margin, step),
            Region::OrbitBalls { group, balls } => {
                let mut out = Vec::new();
                for b in balls {
                    let n = b.center.len();
                    let m = margin.min(b.radius);
                    let k = (m / step).ceil().max(1.0) as usize;
                    for i in 0..=k {
                        let rad = b.radius - m * i as f64 / k as f64;
                        for dir in sphere_directions(n, rad, step) {
                            let p: Vec<f64> = b.center.iter().zip(&dir).map(|(c, d)| c + rad * d).collect();
                            for g in 0..group.order() {
                                let x = group.act(g, &p);
                                if self.clearance(&x) <= margin + 1e-12 {
                                    out.push(x);
                                }
                            }
                        }
                    }
                }
                out
            }
            Region::Union(parts) => parts
                .iter()
                .flat_map(|p| p.shell_samples(margin, step))
                .filter(|x| self.clearance(x) <= margin + 1e-12)
                .collect(),
        }
    }

    /// Extra Newton seeds inside small supports that a coarse grid can miss.
    pub fn seed_hints(&self) -> Vec<Vec<f64>> {
        match self {
            Region::Empty | Region::Domain(_) => Vec::new(),
            Region::OrbitBalls { group, balls } => {
                let mut out = Vec::new();
                for b in balls {
                    let n = b.center.len();
                    let mut local = vec![b.center.clone()];
                    for axis in 0..n {
                        for s in [-0.5, 0.5] {
                            let mut p = b.center.clone();
                            p[axis] += s * b.radius;
                            local.push(p);
                        }
                    }
                    for p in &local {
                        for g in 0..group.order() {
                            out.push(group.act(g, p));
                        }
                    }
                }
                out
            }
            Region::Union(parts) => parts.iter().flat_map(Region::seed_hints).collect(),
        }
    }

    /// A random point of the region: a random part, then a point drawn
    /// inside one of its boxes or balls. Not uniform over the region.
    pub fn random_point<R: Rng>(&self, rng: &mut R, dim: usize) -> Option<Vec<f64>> {
        match self {
            Region::Empty => None,
            Region::Domain(d) => {
                let &(g, bi) = &d.pieces()[rng.gen_range(0..d.pieces().len())];
                let b = &d.boxes()[bi];
                let p: Vec<f64> = b.lo.iter().zip(&b.hi).map(|(l, h)| l + (h - l) * rng.gen_range(0.001..0.999)).collect();
                Some(d.group().act(g, &p))
            }
            Region::OrbitBalls { group, balls } => {
                if balls.is_empty() {
                    return None;
                }
                let b = &balls[rng.gen_range(0..balls.len())];
                let offset = loop {
                    let v: Vec<f64> = (0..dim).map(|_| rng.gen_range(-1.0..1.0)).collect();
                    if linalg::norm(&v) < 0.999 {
                        break v;
                    }
                };
                let p: Vec<f64> = b.center.iter().zip(&offset).map(|(c, o)| c + b.radius * o).collect();
                Some(group.act(rng.gen_range(0..group.order()), &p))
            }
            Region::Union(parts) => {
                let live: Vec<&Region> = parts.iter().filter(|p| !p.is_empty()).collect();
                if live.is_empty() {
                    return None;
                }
                live[rng.gen_range(0..live.len())].random_point(rng, dim)
            }
        }
    }

    /// Conservative disjointness test; `Err` carries a description of the
    /// first pair of parts that could not be separated.
    pub fn check_disjoint(&self, other: &Region) -> std::result::Result<(), String> {
        match (self, other) {
            (Region::Empty, _) | (_, Region::Empty) => Ok(()),
            (Region::Union(parts), o) | (o, Region::Union(parts)) => {
                parts.iter().try_for_each(|p| p.check_disjoint(o))
            }
            (Region::Domain(a), Region::Domain(b)) => {
                for &(ga, ba) in a.pieces() {
                    for &(gb, bb) in b.pieces() {
                        if !boxes_separated(a.group(), (ga, &a.boxes()[ba]), (gb, &b.boxes()[bb])) {
                            return Err(format!("box pieces {ba}@g{ga} and {bb}@g{gb} may intersect"));
                        }
                    }
                }
                Ok(())
            }
            (Region::OrbitBalls { group, balls: b1 }, Region::OrbitBalls { balls: b2, .. }) => {
                for x in b1 {
                    for y in b2 {
                        for g in 0..group.order() {
                            let d = linalg::dist(&group.act(g, &x.center), &y.center);
                            if d < x.radius + y.radius {
                                return Err(format!(
                                    "balls at {:?} and {:?} overlap (distance {d} < {})",
                                    x.center,
                                    y.center,
                                    x.radius + y.radius
                                ));
                            }
                        }
                    }
                }
                Ok(())
            }
            (Region::OrbitBalls { group, balls }, Region::Domain(d)) | (Region::Domain(d), Region::OrbitBalls { group, balls }) => {
                for b in balls {
                    for g in 0..group.order() {
                        let p = group.act(g, &b.center);
                        for &(gp, bi) in d.pieces() {
                            let local = d.group().act(d.group().inv(gp), &p);
                            if d.boxes()[bi].outer_distance(&local) < b.radius {
                                return Err(format!("ball at {:?} meets box piece {bi}@g{gp}", b.center));
                            }
                        }
                    }
                }
                Ok(())
            }
        }
    }
}

/// Unit directions covering the sphere of radius `rad` at spacing about `step`.
fn sphere_directions(n: usize, rad: f64, step: f64) -> Vec<Vec<f64>> {
    match n {
        0 => vec![Vec::new()],
        1 => vec![vec![-1.0], vec![1.0]],
        2 => {
            let m = ((2.0 * std::f64::consts::PI * rad / step).ceil() as usize).clamp(8, 4096);
            (0..m)
                .map(|i| {
                    let a = 2.0 * std::f64::consts::PI * i as f64 / m as f64;
                    vec![a.cos(), a.sin()]
                })
                .collect()
        }
        3 => {
            let m = ((4.0 * std::f64::consts::PI * rad * rad / (step * step)).ceil() as usize).clamp(26, 20000);
            let golden = std::f64::consts::PI * (3.0 - 5f64.sqrt());
            (0..m)
                .map(|i| {
                    let z = 1.0 - 2.0 * (i as f64 + 0.5) / m as f64;
                    let r = (1.0 - z * z).sqrt();
                    let a = golden * i as f64;
                    vec![r * a.cos(), r * a.sin(), z]
                })
                .collect()
        }
        _ => {
            let mut dirs = Vec::new();
            for axis in 0..n {
                for s in [-1.0, 1.0] {
                    let mut d = vec![0.0; n];
                    d[axis] = s;
                    dirs.push(d);
                }
            }
            if n <= 8 {
                let inv = 1.0 / (n as f64).sqrt();
                for mask in 0..1usize << n {
                    dirs.push((0..n).map(|i| if mask >> i & 1 == 1 { inv } else { -inv }).collect());
                }
            }
            dirs
        }
    }
}

/// Separating-axis test on face normals of `g_a·A` and `g_b·B`. Exact in
/// dimension ≤ 2; may report a false overlap for skew boxes in higher dimensions.
fn boxes_separated(group: &FiniteGroup, (ga, a): (usize, &AxisBox), (gb, b): (usize, &AxisBox)) -> bool {
    let n = a.dim();
    // Work in the frame of A: B is mapped by rel = ga⁻¹ gb.
    let rel = group.mul(group.inv(ga), gb);
    let m = group.element(rel);
    let b_center = m.apply(&b.center());
    let b_half: Vec<f64> = b.lo.iter().zip(&b.hi).map(|(l, h)| 0.5 * (h - l)).collect();
    let a_center = a.center();
    let a_half: Vec<f64> = a.lo.iter().zip(&a.hi).map(|(l, h)| 0.5 * (h - l)).collect();
    let b_axes: Vec<Vec<f64>> = (0..n)
        .map(|j| {
            let mut e = vec![0.0; n];
            e[j] = 1.0;
            m.apply(&e)
        })
        .collect();
    let mut axes: Vec<Vec<f64>> = (0..n)
        .map(|i| {
            let mut e = vec![0.0; n];
            e[i] = 1.0;
            e
        })
        .collect();
    axes.extend(b_axes.iter().cloned());
    axes.iter().any(|ax| {
        let ra: f64 = (0..n).map(|i| a_half[i] * ax[i].abs()).sum();
        let rb: f64 = (0..n).map(|j| b_half[j] * linalg::dot(ax, &b_axes[j]).abs()).sum();
        let gap = (linalg::dot(ax, &a_center) - linalg::dot(ax, &b_center)).abs();
        gap >= ra + rb - 1e-12
    })
}
