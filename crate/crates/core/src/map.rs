//! Equivariant local maps: polynomial bodies, atom lists and the composite
//! bodies produced by unions and otopy slices, with evaluation, symbolic
//! Jacobians and the equivariance, locality and restriction checks.

use std::sync::Arc;

use num_traits::{One, Zero};
use rand::rngs::StdRng;
use rand::SeedableRng;
use serde::Serialize;

use crate::domain::Region;
use crate::error::{Error, Result};
use crate::group::{FiniteGroup, SubspaceBasis};
use crate::linalg;
use crate::poly::Polynomial;
use crate::realize::AtomList;
use crate::scalar::{q_int, Scalar, Q};

pub const TOL_EQUIV: f64 = 1e-9;
pub const ETA_LOC: f64 = 1e-6;

/// Float copy of a polynomial for the hot evaluation loops.
#[derive(Clone, Debug)]
struct Compiled {
    terms: Vec<(Vec<u32>, f64)>,
}

impl Compiled {
    fn new(p: &Polynomial) -> Self {
        Compiled {
            terms: p.terms().iter().map(|(e, c)| (e.clone(), c.to_float())).collect(),
        }
    }

    fn eval(&self, x: &[f64]) -> f64 {
        self.terms
            .iter()
            .map(|(e, c)| e.iter().zip(x).fold(*c, |acc, (&p, &v)| acc * v.powi(p as i32)))
            .sum()
    }
}

/// `n` polynomial components in `x1..xn` with their symbolic Jacobian.
#[derive(Clone, Debug)]
pub struct MapExpression {
    dim: usize,
    components: Vec<Polynomial>,
    jacobian: Vec<Polynomial>,
    fast: Vec<Compiled>,
    fast_jacobian: Vec<Compiled>,
}

impl MapExpression {
    pub fn new(components: Vec<Polynomial>) -> Result<Self> {
        let dim = components.len();
        if let Some(p) = components.iter().find(|p| p.nvars() != dim) {
            return Err(Error::DimensionMismatch {
                expected: dim,
                found: p.nvars(),
            });
        }
        let jacobian: Vec<Polynomial> = components
            .iter()
            .flat_map(|p| (0..dim).map(move |k| p.derivative(k)))
            .collect();
        Ok(MapExpression {
            dim,
            fast: components.iter().map(Compiled::new).collect(),
            fast_jacobian: jacobian.iter().map(Compiled::new).collect(),
            components,
            jacobian,
        })
    }

    pub fn parse(sources: &[&str]) -> Result<Self> {
        let n = sources.len();
        Self::new(sources.iter().map(|s| Polynomial::parse(s, n, false)).collect::<Result<_>>()?)
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn components(&self) -> &[Polynomial] {
        &self.components
    }

    /// Row-major `∂f_i/∂x_j`.
    pub fn jacobian_polys(&self) -> &[Polynomial] {
        &self.jacobian
    }

    pub fn eval_f64(&self, x: &[f64]) -> Vec<f64> {
        self.fast.iter().map(|p| p.eval(x)).collect()
    }

    pub fn eval<T: Scalar>(&self, x: &[T]) -> Vec<T> {
        self.components.iter().map(|p| p.eval(x)).collect()
    }

    pub fn jacobian_f64(&self, x: &[f64]) -> Vec<f64> {
        self.fast_jacobian.iter().map(|p| p.eval(x)).collect()
    }

    pub fn jacobian_exact(&self, x: &[Q]) -> Vec<Q> {
        self.jacobian.iter().map(|p| p.eval(x)).collect()
    }
}

#[derive(Clone, Debug)]
pub enum MapBody {
    /// The base point: empty domain, no zeros.
    Empty,
    Polynomial { expr: MapExpression, domain: Region },
    Atoms(AtomList),
    /// Maps with pairwise disjoint domains.
    Union(Vec<EquivariantLocalMap>),
    /// `(1 − t)·from + t·to` on the domain of `from`.
    Blend { from: Box<EquivariantLocalMap>, to: Box<EquivariantLocalMap>, t: Q },
    Scaled { inner: Box<EquivariantLocalMap>, factor: Q },
    Restricted { inner: Box<EquivariantLocalMap>, domain: Region },
}

/// `f ∈ ℱ_G(Ω)`: a body together with the acting group.
#[derive(Clone, Debug)]
pub struct EquivariantLocalMap {
    group: Arc<FiniteGroup>,
    body: MapBody,
}

impl EquivariantLocalMap {
    pub fn new(group: Arc<FiniteGroup>, body: MapBody) -> Self {
        EquivariantLocalMap { group, body }
    }

    pub fn empty(group: Arc<FiniteGroup>) -> Self {
        Self::new(group, MapBody::Empty)
    }

    pub fn polynomial(group: Arc<FiniteGroup>, expr: MapExpression, domain: Region) -> Result<Self> {
        if expr.dim() != group.dim() {
            return Err(Error::DimensionMismatch {
                expected: group.dim(),
                found: expr.dim(),
            });
        }
        Ok(Self::new(group, MapBody::Polynomial { expr, domain }))
    }

    pub fn group(&self) -> &Arc<FiniteGroup> {
        &self.group
    }

    pub fn dim(&self) -> usize {
        self.group.dim()
    }

    pub fn body(&self) -> &MapBody {
        &self.body
    }

    pub fn domain(&self) -> Region {
        match &self.body {
            MapBody::Empty => Region::Empty,
            MapBody::Polynomial { domain, .. } | MapBody::Restricted { domain, .. } => domain.clone(),
            MapBody::Atoms(a) => a.region(),
            MapBody::Union(parts) => Region::Union(parts.iter().map(|p| p.domain()).collect()),
            MapBody::Blend { from, .. } => from.domain(),
            MapBody::Scaled { inner, .. } => inner.domain(),
        }
    }

    /// Exact evaluation is meaningful: rational group and rational data.
    pub fn is_exact(&self) -> bool {
        self.group.is_exact()
    }

    pub fn scaled(&self, factor: Q) -> Self {
        Self::new(
            self.group.clone(),
            MapBody::Scaled {
                inner: Box::new(self.clone()),
                factor,
            },
        )
    }

    pub fn restricted(&self, domain: Region) -> Self {
        Self::new(
            self.group.clone(),
            MapBody::Restricted {
                inner: Box::new(self.clone()),
                domain,
            },
        )
    }

    /// Polynomial components when the body is a plain polynomial.
    pub fn expression(&self) -> Option<&MapExpression> {
        match &self.body {
            MapBody::Polynomial { expr, .. } => Some(expr),
            MapBody::Restricted { inner, .. } => inner.expression(),
            _ => None,
        }
    }

    /// Continuous extension of the map to the closure of its domain, used
    /// for boundary scans. `None` away from the closure.
    pub fn eval_closure<T: Scalar>(&self, x: &[T]) -> Option<Vec<T>> {
        match &self.body {
            MapBody::Empty => None,
            MapBody::Polynomial { expr, .. } => Some(expr.eval(x)),
            MapBody::Atoms(a) => a.eval_scalar(x, true),
            MapBody::Union(parts) => {
                let xf: Vec<f64> = x.iter().map(Scalar::to_float).collect();
                parts
                    .iter()
                    .map(|p| (p.domain().clearance(&xf), p))
                    .filter(|(c, _)| *c > -1e-9)
                    .max_by(|a, b| a.0.total_cmp(&b.0))
                    .and_then(|(_, p)| p.eval_closure(x))
            }
            MapBody::Blend { from, to, t } => {
                let a = from.eval_closure(x)?;
                let b = to.eval_closure(x)?;
                let t = T::from_rational(t);
                let s = T::one() - t.clone();
                Some(a.into_iter().zip(b).map(|(u, v)| s.clone() * u + t.clone() * v).collect())
            }
            MapBody::Scaled { inner, factor } => {
                let k = T::from_rational(factor);
                inner.eval_closure(x).map(|v| v.into_iter().map(|u| k.clone() * u).collect())
            }
            MapBody::Restricted { inner, .. } => inner.eval_closure(x),
        }
    }

    fn check_dim(&self, x: &[f64]) -> Result<()> {
        if x.len() != self.dim() {
            return Err(Error::DimensionMismatch {
                expected: self.dim(),
                found: x.len(),
            });
        }
        Ok(())
    }

    pub fn evaluate(&self, x: &[f64]) -> Result<Vec<f64>> {
        self.check_dim(x)?;
        if !self.domain().contains(x) {
            return Err(Error::OutsideDomain { point: x.to_vec() });
        }
        self.eval_fast(x).ok_or_else(|| Error::OutsideDomain { point: x.to_vec() })
    }

    /// Float evaluation without the domain test.
    pub(crate) fn eval_fast(&self, x: &[f64]) -> Option<Vec<f64>> {
        match &self.body {
            MapBody::Polynomial { expr, .. } => Some(expr.eval_f64(x)),
            MapBody::Restricted { inner, .. } => inner.eval_fast(x),
            MapBody::Scaled { inner, factor } => {
                let k = factor.to_float();
                inner.eval_fast(x).map(|v| v.into_iter().map(|u| k * u).collect())
            }
            MapBody::Blend { from, to, t } => {
                let (a, b) = (from.eval_fast(x)?, to.eval_fast(x)?);
                let t = t.to_float();
                Some(a.into_iter().zip(b).map(|(u, v)| (1.0 - t) * u + t * v).collect())
            }
            _ => self.eval_closure(x),
        }
    }

    pub fn jacobian(&self, x: &[f64]) -> Result<Vec<f64>> {
        self.check_dim(x)?;
        if !self.domain().contains(x) {
            return Err(Error::OutsideDomain { point: x.to_vec() });
        }
        self.jacobian_fast(x).ok_or_else(|| Error::OutsideDomain { point: x.to_vec() })
    }

    pub(crate) fn jacobian_fast(&self, x: &[f64]) -> Option<Vec<f64>> {
        match &self.body {
            MapBody::Empty => None,
            MapBody::Polynomial { expr, .. } => Some(expr.jacobian_f64(x)),
            MapBody::Atoms(a) => a.jacobian_at(x),
            MapBody::Union(parts) => parts
                .iter()
                .map(|p| (p.domain().clearance(x), p))
                .filter(|(c, _)| *c > -1e-9)
                .max_by(|a, b| a.0.total_cmp(&b.0))
                .and_then(|(_, p)| p.jacobian_fast(x)),
            MapBody::Blend { from, to, t } => {
                let (a, b) = (from.jacobian_fast(x)?, to.jacobian_fast(x)?);
                let t = t.to_float();
                Some(a.into_iter().zip(b).map(|(u, v)| (1.0 - t) * u + t * v).collect())
            }
            MapBody::Scaled { inner, factor } => {
                let k = factor.to_float();
                inner.jacobian_fast(x).map(|v| v.into_iter().map(|u| k * u).collect())
            }
            MapBody::Restricted { inner, .. } => inner.jacobian_fast(x),
        }
    }

    /// Exact Jacobian at a rational point, when every body part is rational.
    pub fn jacobian_exact(&self, x: &[Q]) -> Option<Vec<Q>> {
        if !self.group.is_exact() {
            return None;
        }
        match &self.body {
            MapBody::Empty => None,
            MapBody::Polynomial { expr, .. } => Some(expr.jacobian_exact(x)),
            MapBody::Atoms(a) => {
                let xf: Vec<f64> = x.iter().map(Scalar::to_float).collect();
                a.jacobian_exact_at(&xf)
            }
            MapBody::Union(parts) => {
                let xf: Vec<f64> = x.iter().map(Scalar::to_float).collect();
                parts.iter().find(|p| p.domain().contains(&xf)).and_then(|p| p.jacobian_exact(x))
            }
            MapBody::Blend { from, to, t } => {
                let (a, b) = (from.jacobian_exact(x)?, to.jacobian_exact(x)?);
                let s = Q::one() - t;
                Some(a.into_iter().zip(b).map(|(u, v)| &s * u + t * v).collect())
            }
            MapBody::Scaled { inner, factor } => {
                inner.jacobian_exact(x).map(|v| v.into_iter().map(|u| factor * u).collect())
            }
            MapBody::Restricted { inner, .. } => inner.jacobian_exact(x),
        }
    }

    /// Seeds inside small supports that a chart grid may step over.
    pub fn seed_hints(&self) -> Vec<Vec<f64>> {
        self.domain().seed_hints()
    }
}

/// Outcome of [`check_equivariance`].
#[derive(Clone, Debug, Serialize)]
pub struct EquivarianceReport {
    pub pass: bool,
    pub exact: bool,
    pub samples: usize,
    pub max_defect: f64,
    /// `(x, generator index, defect)` for failing samples, first few only.
    pub witnesses: Vec<(Vec<f64>, usize, f64)>,
}

/// Random domain points, rounded to a 1/1024 grid when exact checks apply.
pub fn sample_points(f: &EquivariantLocalMap, samples: usize, seed: u64) -> Vec<Vec<f64>> {
    let region = f.domain();
    let mut rng = StdRng::seed_from_u64(seed);
    let exact = f.is_exact();
    let mut out = Vec::with_capacity(samples);
    let mut tries = 0;
    while out.len() < samples && tries < samples * 20 {
        tries += 1;
        let Some(mut x) = region.random_point(&mut rng, f.dim()) else {
            break;
        };
        if exact {
            x.iter_mut().for_each(|v| *v = (*v * 1024.0).round() / 1024.0);
            if !region.contains(&x) {
                continue;
            }
        }
        out.push(x);
    }
    out
}

/// `max ‖f(gx) − g f(x)‖` over generators and random domain points. With a
/// rational group the comparison is exact and any nonzero defect fails.
pub fn check_equivariance(f: &EquivariantLocalMap, samples: usize, seed: u64, tol_equiv: f64) -> EquivarianceReport {
    let group = f.group();
    let exact = f.is_exact();
    let points = sample_points(f, samples, seed);
    let mut max_defect: f64 = 0.0;
    let mut witnesses = Vec::new();
    for x in &points {
        for &g in group.generators() {
            let m = group.element(g);
            let (defect, fail) = if exact {
                let xq: Vec<Q> = x.iter().map(|&v| Q::from_f64(v)).collect();
                let gx = m.apply_scalar(&xq);
                match (f.eval_closure(&gx), f.eval_closure(&xq)) {
                    (Some(a), Some(b)) => {
                        let gb = m.apply_scalar(&b);
                        let diff: Vec<Q> = a.iter().zip(&gb).map(|(u, v)| u - v).collect();
                        let d = linalg::norm(&diff.iter().map(Scalar::to_float).collect::<Vec<_>>());
                        (d, diff.iter().any(|v| !v.is_zero()))
                    }
                    _ => continue,
                }
            } else {
                let gx = m.apply(x);
                match (f.eval_fast(&gx), f.eval_fast(x)) {
                    (Some(a), Some(b)) => {
                        let d = linalg::dist(&a, &m.apply(&b));
                        (d, d > tol_equiv * (1.0 + linalg::norm(&b)))
                    }
                    _ => continue,
                }
            };
            max_defect = max_defect.max(defect);
            if fail && witnesses.len() < 8 {
                witnesses.push((x.clone(), g, defect));
            }
        }
    }
    EquivarianceReport {
        pass: witnesses.is_empty(),
        exact,
        samples: points.len(),
        max_defect,
        witnesses,
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct LocalityReport {
    pub pass: bool,
    pub margin: f64,
    pub samples: usize,
    pub min_norm: f64,
    /// Shell points with `‖f‖ < η_loc`, first few only.
    pub offenders: Vec<(Vec<f64>, f64)>,
}

/// Default boundary margin: a tenth of the smallest box edge or a quarter of
/// the smallest ball radius.
pub fn default_margin(region: &Region) -> f64 {
    match region {
        Region::Empty => 1.0,
        Region::Domain(d) => 0.1 * d.min_edge(),
        Region::OrbitBalls { balls, .. } => 0.25 * balls.iter().map(|b| b.radius).fold(f64::INFINITY, f64::min),
        Region::Union(parts) => parts.iter().map(default_margin).fold(f64::INFINITY, f64::min),
    }
}

/// Scans the closed margin shell at spacing `margin/8`; passes iff
/// `‖f‖ ≥ eta_loc` at every sample. A semi-decision: zeros between samples
/// can be missed.
pub fn check_locality(f: &EquivariantLocalMap, margin: f64, eta_loc: f64) -> LocalityReport {
    let region = f.domain();
    let samples = region.shell_samples(margin, margin / 8.0);
    let mut min_norm = f64::INFINITY;
    let mut offenders = Vec::new();
    for x in &samples {
        let n = f.eval_closure(x).map_or(0.0, |v| linalg::norm(&v));
        min_norm = min_norm.min(n);
        if n < eta_loc && offenders.len() < 8 {
            offenders.push((x.clone(), n));
        }
    }
    LocalityReport {
        pass: offenders.is_empty(),
        margin,
        samples: samples.len(),
        min_norm,
        offenders,
    }
}

/// `u ↦ Bᵀ f(B u)` on the coordinates of a fixed subspace.
pub struct RestrictedMap<'a> {
    map: &'a EquivariantLocalMap,
    basis: &'a SubspaceBasis,
    domain: Region,
}

impl<'a> RestrictedMap<'a> {
    pub fn dim(&self) -> usize {
        self.basis.dim()
    }

    pub fn basis(&self) -> &SubspaceBasis {
        self.basis
    }

    pub fn contains(&self, u: &[f64]) -> bool {
        self.domain.contains(&self.basis.embed(u))
    }

    pub fn eval(&self, u: &[f64]) -> Option<Vec<f64>> {
        let x = self.basis.embed(u);
        if !self.domain.contains(&x) {
            return None;
        }
        self.map.eval_fast(&x).map(|v| self.basis.coords(&v))
    }

    /// `Bᵀ J B`, `dim × dim` row-major.
    pub fn jacobian(&self, u: &[f64]) -> Option<Vec<f64>> {
        let x = self.basis.embed(u);
        if !self.domain.contains(&x) {
            return None;
        }
        let j = self.map.jacobian_fast(&x)?;
        let n = self.map.dim();
        let d = self.dim();
        let jb: Vec<Vec<f64>> = self.basis.vectors().iter().map(|b| linalg::mat_vec(&j, n, b)).collect();
        let mut out = vec![0.0; d * d];
        for i in 0..d {
            for k in 0..d {
                out[i * d + k] = linalg::dot(&self.basis.vectors()[i], &jb[k]);
            }
        }
        Some(out)
    }

    /// `‖(I − BBᵀ) f(Bu)‖`
    pub fn invariance_defect(&self, u: &[f64]) -> Option<f64> {
        let x = self.basis.embed(u);
        self.map.eval_fast(&x).map(|v| self.basis.distance(&v))
    }
}

/// Restricts `f` to `V^H` after checking at `samples` (in `V^H`
/// coordinates) that `f` maps the subspace into itself.
pub fn restrict<'a>(
    f: &'a EquivariantLocalMap,
    type_id: usize,
    basis: &'a SubspaceBasis,
    samples: &[Vec<f64>],
    tol_equiv: f64,
) -> Result<RestrictedMap<'a>> {
    let r = RestrictedMap {
        map: f,
        basis,
        domain: f.domain(),
    };
    for u in samples {
        if !r.contains(u) {
            continue;
        }
        let Some(v) = f.eval_fast(&basis.embed(u)) else {
            continue;
        };
        let defect = basis.distance(&v);
        if defect > tol_equiv * (1.0 + linalg::norm(&v)) {
            return Err(Error::NotInvariantSubspace { type_id, defect });
        }
    }
    Ok(r)
}

/// Symbolic restriction in the rational orthogonal coordinates of `basis`:
/// `c_k(u) = b_k·f(Σ u_j b_j) / (b_k·b_k)`.
pub fn restrict_symbolic(expr: &MapExpression, basis: &SubspaceBasis) -> Option<Vec<Polynomial>> {
    let rational = basis.rational()?;
    let n = expr.dim();
    let d = rational.len();
    let mut m = vec![Q::zero(); n * d];
    for (j, b) in rational.iter().enumerate() {
        for i in 0..n {
            m[i * d + j] = b[i].clone();
        }
    }
    let composed: Vec<Polynomial> = expr.components().iter().map(|p| p.compose_linear(&m, d)).collect();
    Some(
        rational
            .iter()
            .map(|b| {
                let bb = linalg::qdot(b, b);
                let mut acc = Polynomial::zero(d);
                for (bi, p) in b.iter().zip(&composed) {
                    acc = &acc + &p.scale(&(bi / &bb));
                }
                acc
            })
            .collect(),
    )
}

/// Reynolds average `(1/|G|) Σ_g g⁻¹ p(g x)`; needs a rational group.
pub fn symmetrize(group: &FiniteGroup, components: &[Polynomial]) -> Option<Vec<Polynomial>> {
    let n = group.dim();
    let mut acc = vec![Polynomial::zero(n); n];
    for g in 0..group.order() {
        let m = group.element(g).exact_entries()?;
        let inv = group.element(group.inv(g)).exact_entries()?;
        let composed: Vec<Polynomial> = components.iter().map(|p| p.compose_linear(m, n)).collect();
        for (i, slot) in acc.iter_mut().enumerate() {
            for (j, p) in composed.iter().enumerate() {
                *slot = &*slot + &p.scale(&inv[i * n + j]);
            }
        }
    }
    let k = Q::one() / q_int(group.order() as i64);
    Some(acc.iter().map(|p| p.scale(&k)).collect())
}

/// Central finite-difference Jacobian, used as an independent cross-check.
pub fn finite_difference_jacobian(f: &EquivariantLocalMap, x: &[f64], h: f64) -> Option<Vec<f64>> {
    let n = f.dim();
    let mut out = vec![0.0; n * n];
    for j in 0..n {
        let mut xp = x.to_vec();
        let mut xm = x.to_vec();
        xp[j] += h;
        xm[j] -= h;
        let (a, b) = (f.eval_closure(&xp)?, f.eval_closure(&xm)?);
        for i in 0..n {
            out[i * n + j] = (a[i] - b[i]) / (2.0 * h);
        }
    }
    Some(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::domain::{saturate, AxisBox};
    use crate::group::{close_generators, OrthoMatrix, MAX_GROUP_ORDER, TOL_GROUP};
    use crate::scalar::q_int;

    fn group(dim: usize, gens: &[&[i64]]) -> Arc<FiniteGroup> {
        let gens: Vec<OrthoMatrix> = gens
            .iter()
            .map(|g| OrthoMatrix::from_rational(dim, g.iter().map(|&v| q_int(v)).collect(), TOL_GROUP).unwrap())
            .collect();
        Arc::new(close_generators(dim, &gens, MAX_GROUP_ORDER, TOL_GROUP).unwrap())
    }

    fn poly_map(g: Arc<FiniteGroup>, boxes: Vec<AxisBox>, src: &[&str]) -> EquivariantLocalMap {
        let d = Arc::new(saturate(boxes, g.clone()).unwrap());
        EquivariantLocalMap::polynomial(g, MapExpression::parse(src).unwrap(), Region::Domain(d)).unwrap()
    }

    fn odd_line(src: &str) -> EquivariantLocalMap {
        poly_map(group(1, &[&[-1]]), vec![AxisBox::new(vec![1.0], vec![3.0]).unwrap()], &[src])
    }

    fn square(g: Arc<FiniteGroup>, src: &[&str]) -> EquivariantLocalMap {
        poly_map(g, vec![AxisBox::new(vec![-3.0, -3.0], vec![3.0, 3.0]).unwrap()], src)
    }

    const Z5: [&str; 2] = [
        "x1^5 - 10*x1^3*x2^2 + 5*x1*x2^4 - 16*x1",
        "5*x1^4*x2 - 10*x1^2*x2^3 + x2^5 - 16*x2",
    ];

    #[test]
    fn evaluation_examples() {
        let g = group(2, &[&[1, 0, 0, -1]]);
        assert_eq!(square(g.clone(), &["x1 - 1", "x2"]).evaluate(&[1.0, 0.0]).unwrap(), vec![0.0, 0.0]);
        assert_eq!(odd_line("x1^3 - 4*x1").evaluate(&[2.0]).unwrap(), vec![0.0]);
        let rot = group(2, &[&[0, -1, 1, 0]]);
        let f = poly_map(rot, vec![AxisBox::new(vec![1.0, -3.0], vec![3.0, 3.0]).unwrap()], &Z5);
        assert_eq!(f.evaluate(&[2.0, 0.0]).unwrap(), vec![0.0, 0.0]);
        assert!(matches!(f.evaluate(&[0.0, 0.0]), Err(Error::OutsideDomain { .. })));
    }

    #[test]
    fn jacobian_examples_match_finite_differences() {
        let g = group(2, &[&[1, 0, 0, -1]]);
        assert_eq!(square(g, &["x1 - 1", "x2"]).jacobian(&[0.3, 0.7]).unwrap(), vec![1.0, 0.0, 0.0, 1.0]);
        let f = odd_line("x1^3 - 4*x1");
        assert_eq!(f.jacobian(&[2.0]).unwrap(), vec![8.0]);
        let fd = finite_difference_jacobian(&f, &[2.0], 1e-6).unwrap();
        assert!((fd[0] - 8.0).abs() < 1e-6);
        let rot = group(2, &[&[0, -1, 1, 0]]);
        let f = poly_map(rot, vec![AxisBox::new(vec![1.0, -3.0], vec![3.0, 3.0]).unwrap()], &Z5);
        let j = f.jacobian(&[2.0, 0.0]).unwrap();
        assert!((linalg::det(&j, 2) - 4096.0).abs() < 1e-6);
        let fd = finite_difference_jacobian(&f, &[2.0, 0.0], 1e-6).unwrap();
        assert!((linalg::det(&fd, 2) - 4096.0).abs() < 1e-5 * 4096.0);
    }

    #[test]
    fn equivariance_examples() {
        assert!(check_equivariance(&odd_line("x1^3 - 4*x1"), 50, 1, TOL_EQUIV).pass);
        let g = group(2, &[&[1, 0, 0, -1]]);
        assert!(check_equivariance(&square(g, &["x1 - 1", "x2"]), 50, 1, TOL_EQUIV).pass);
        let r = check_equivariance(&odd_line("x1^2"), 50, 1, TOL_EQUIV);
        assert!(!r.pass && r.exact);
        let (x, _, defect) = &r.witnesses[0];
        assert!((defect - 2.0 * x[0] * x[0]).abs() < 1e-12);
    }

    #[test]
    fn locality_examples() {
        let r = check_locality(&odd_line("x1^3 - 4*x1"), 0.2, ETA_LOC);
        assert!(r.pass);
        // Dense 1-d oracle over the shell [1, 1.2] ∪ [2.8, 3] (and its mirror).
        let oracle = (0..=2000)
            .map(|k| k as f64 / 10000.0)
            .flat_map(|s| [1.0 + s, 3.0 - s])
            .map(|x: f64| (x.powi(3) - 4.0 * x).abs())
            .fold(f64::INFINITY, f64::min);
        assert!(r.min_norm >= oracle - 1e-12);
        let g = Arc::new(FiniteGroup::trivial(1));
        let f = poly_map(g.clone(), vec![AxisBox::new(vec![1.0], vec![3.0]).unwrap()], &["x1 - 3"]);
        assert!(!check_locality(&f, 0.2, ETA_LOC).pass);
        assert!(check_locality(&EquivariantLocalMap::empty(g), 0.2, ETA_LOC).pass);
    }

    #[test]
    fn restriction_examples() {
        let g = group(2, &[&[1, 0, 0, -1]]);
        let axis = g.fixed_subspace(&g.whole());
        let f = square(g.clone(), &["x1 - 1", "x2"]);
        let r = restrict(&f, 1, &axis, &[vec![0.5], vec![2.0]], TOL_EQUIV).unwrap();
        assert_eq!(r.eval(&[2.0]).unwrap(), vec![1.0]);
        let sym = restrict_symbolic(f.expression().unwrap(), &axis).unwrap();
        assert_eq!(sym, vec![Polynomial::parse("x1 - 1", 1, false).unwrap()]);

        let f = square(g.clone(), &["x1^2 - 1 - x2^2", "x1*x2"]);
        let sym = restrict_symbolic(f.expression().unwrap(), &axis).unwrap();
        assert_eq!(sym, vec![Polynomial::parse("x1^2 - 1", 1, false).unwrap()]);

        let f = odd_line("x1^3 - 4*x1");
        let full = f.group().fixed_subspace(&crate::group::Subgroup::trivial());
        let sym = restrict_symbolic(f.expression().unwrap(), &full).unwrap();
        assert_eq!(&sym[..], f.expression().unwrap().components());

        // a map that leaves the axis
        let bad = square(Arc::new(FiniteGroup::trivial(2)), &["x1", "x1 + 1"]);
        assert!(matches!(
            restrict(&bad, 1, &axis, &[vec![1.0]], TOL_EQUIV),
            Err(Error::NotInvariantSubspace { .. })
        ));
    }

    #[test]
    fn symmetrized_polynomials_are_equivariant() {
        let g = group(2, &[&[0, -1, 1, 0], &[1, 0, 0, -1]]);
        let comps = vec![
            Polynomial::parse("x1^3 + 2*x1*x2 - x2 + 1", 2, false).unwrap(),
            Polynomial::parse("x2^2*x1 - 3*x1", 2, false).unwrap(),
        ];
        let sym = symmetrize(&g, &comps).unwrap();
        let d = Arc::new(saturate(vec![AxisBox::new(vec![1.0, -3.0], vec![3.0, 3.0]).unwrap()], g.clone()).unwrap());
        let f = EquivariantLocalMap::polynomial(g, MapExpression::new(sym).unwrap(), Region::Domain(d)).unwrap();
        let r = check_equivariance(&f, 100, 7, TOL_EQUIV);
        assert!(r.pass && r.exact && r.max_defect == 0.0);
    }
}
