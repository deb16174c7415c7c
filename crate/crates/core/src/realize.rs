//! Synthesis of maps with a prescribed degree vector.
//!
//! The building block is the standard atom: on the orbit `G·B(x0; r)` of a
//! small ball around a point `x0 ∈ Ω_H` it is `g·y ↦ g·L(y − x0)`, with
//! `L = I` (degree `+1`) or a reflection along a line of `V^H` (degree `−1`).
//! The reflection commutes with `H`, so the formula does not depend on the
//! choice of `g`. A target vector is realized by disjoint atoms, `|m|` of
//! them in the chosen component.

use std::sync::Arc;

use num_traits::{One, Signed, Zero};
use serde::{Deserialize, Serialize};

use crate::analysis::Analysis;
use crate::degree::{DegreeKey, DegreeVector, Zero as StratumZero};
use crate::domain::{Ball, Region};
use crate::error::{Error, Result};
use crate::group::{FiniteGroup, SubspaceBasis};
use crate::linalg;
use crate::map::{EquivariantLocalMap, MapBody};
use crate::otopy::Otopy;
use crate::scalar::{format_matrix, format_rational, parse_matrix, parse_rational, q_to_f64, Scalar, Q};

/// Radius below which an atom is not placed.
pub const MIN_RADIUS: f64 = 1e-4;
/// Fraction of the clearance bound used as atom radius.
const RADIUS_FACTOR: f64 = 0.45;

#[derive(Clone, Debug)]
pub struct StandardAtom {
    pub center: Vec<Q>,
    pub type_id: usize,
    pub component: usize,
    pub sign: i32,
    pub radius: f64,
    /// Linear part, row-major `n × n`.
    pub linear: Vec<Q>,
    center_f64: Vec<f64>,
    linear_f64: Vec<f64>,
}

/// Text form of an atom used in configs and JSON output.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AtomRecord {
    pub center: Vec<String>,
    pub radius: f64,
    pub sign: i32,
    #[serde(default)]
    pub type_id: usize,
    #[serde(default)]
    pub component: usize,
    /// `"a b; c d"`; identity or the default reflection when absent.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub linear: Option<String>,
}

impl StandardAtom {
    pub fn new(center: Vec<Q>, type_id: usize, component: usize, sign: i32, radius: f64, linear: Vec<Q>) -> Result<Self> {
        let n = center.len();
        if linear.len() != n * n {
            return Err(Error::DimensionMismatch {
                expected: n * n,
                found: linear.len(),
            });
        }
        if !(radius > 0.0 && radius.is_finite()) {
            return Err(Error::Config(format!("atom radius must be positive, got {radius}")));
        }
        Ok(StandardAtom {
            center_f64: center.iter().map(q_to_f64).collect(),
            linear_f64: linear.iter().map(q_to_f64).collect(),
            center,
            type_id,
            component,
            sign,
            radius,
            linear,
        })
    }

    pub fn dim(&self) -> usize {
        self.center.len()
    }

    pub fn center_f64(&self) -> &[f64] {
        &self.center_f64
    }

    pub fn linear_f64(&self) -> &[f64] {
        &self.linear_f64
    }

    pub fn ball(&self) -> Ball {
        Ball {
            center: self.center_f64.clone(),
            radius: self.radius,
        }
    }

    pub fn to_record(&self) -> AtomRecord {
        AtomRecord {
            center: self.center.iter().map(format_rational).collect(),
            radius: self.radius,
            sign: self.sign,
            type_id: self.type_id,
            component: self.component,
            linear: Some(format_matrix(&self.linear, self.dim())),
        }
    }

    /// Rebuilds an atom; a missing linear part is the default for `sign`
    /// along the first fixed direction of `type_id` in `analysis`.
    pub fn from_record(rec: &AtomRecord, analysis: &Analysis) -> Result<Self> {
        let n = analysis.group().dim();
        let center = rec
            .center
            .iter()
            .map(|s| parse_rational(s).ok_or_else(|| Error::Parse(format!("bad atom coordinate {s:?}"))))
            .collect::<Result<Vec<Q>>>()?;
        if center.len() != n {
            return Err(Error::DimensionMismatch {
                expected: n,
                found: center.len(),
            });
        }
        if rec.sign != 1 && rec.sign != -1 {
            return Err(Error::Config(format!("atom sign must be 1 or -1, got {}", rec.sign)));
        }
        if rec.type_id >= analysis.charts.len() {
            return Err(Error::InvalidKey {
                type_id: rec.type_id,
                component: rec.component,
            });
        }
        let linear = match &rec.linear {
            Some(s) => parse_matrix(s)
                .filter(|rows| rows.len() == n && rows.iter().all(|r| r.len() == n))
                .ok_or_else(|| Error::Parse(format!("bad atom linear part {s:?}")))?
                .concat(),
            None => default_linear(&analysis.chart(rec.type_id).basis, rec.sign),
        };
        Self::new(center, rec.type_id, rec.component, rec.sign, rec.radius, linear)
    }
}

/// `I` for `+1`; for `−1` the reflection `I − 2bbᵀ/bᵀb` along the first
/// basis vector `b` of the fixed subspace.
pub fn default_linear(basis: &SubspaceBasis, sign: i32) -> Vec<Q> {
    let n = basis.ambient_dim();
    let mut m: Vec<Q> = (0..n * n).map(|k| if k / n == k % n { Q::one() } else { Q::zero() }).collect();
    if sign >= 0 || basis.dim() == 0 {
        return m;
    }
    let b: Vec<Q> = match basis.rational() {
        Some(r) => r[0].clone(),
        None => basis.vectors()[0].iter().map(|&v| Q::from_f64(v)).collect(),
    };
    let bb = linalg::qdot(&b, &b);
    let two = Q::from_integer(2.into());
    for i in 0..n {
        for j in 0..n {
            m[i * n + j] -= &two * &b[i] * &b[j] / &bb;
        }
    }
    m
}

/// Snaps a point of `V^H` (given by coordinates `u`) to an exact point of
/// `V^H` on a dyadic grid of spacing `2^-bits` along the rational basis.
pub fn snap_to_fixed(basis: &SubspaceBasis, u: &[f64], bits: i32) -> Vec<Q> {
    let n = basis.ambient_dim();
    match basis.rational() {
        Some(rat) => {
            let scale = 2f64.powi(bits);
            let mut x = vec![Q::zero(); n];
            for (b, &uk) in rat.iter().zip(u) {
                let len = linalg::norm(&linalg::q_vec_to_f64(b));
                let qk = Q::from_f64(((uk / len) * scale).round()) / Q::from_f64(scale);
                for (xi, bi) in x.iter_mut().zip(b) {
                    *xi += &qk * bi;
                }
            }
            x
        }
        None => basis.embed(u).into_iter().map(Q::from_f64).collect(),
    }
}

/// Disjoint standard atoms sharing one group.
#[derive(Clone, Debug)]
pub struct AtomList {
    pub group: Arc<FiniteGroup>,
    pub atoms: Vec<StandardAtom>,
}

impl AtomList {
    pub fn new(group: Arc<FiniteGroup>, atoms: Vec<StandardAtom>) -> Self {
        AtomList { group, atoms }
    }

    pub fn region(&self) -> Region {
        Region::OrbitBalls {
            group: self.group.clone(),
            balls: self.atoms.iter().map(StandardAtom::ball).collect(),
        }
    }

    /// Atom and group element `g` with `g⁻¹y` closest (relative to the
    /// radius) to the atom center.
    fn locate(&self, y: &[f64], closed: bool) -> Option<(usize, usize)> {
        let limit = if closed { 1.0 + 1e-9 } else { 1.0 };
        let mut best: Option<(f64, usize, usize)> = None;
        for (k, a) in self.atoms.iter().enumerate() {
            for g in 0..self.group.order() {
                let ratio = linalg::dist(&self.group.act(g, a.center_f64()), y) / a.radius;
                let ok = if closed { ratio <= limit } else { ratio < limit };
                if ok && best.is_none_or(|(r, _, _)| ratio < r) {
                    best = Some((ratio, k, g));
                }
            }
        }
        best.map(|(_, k, g)| (k, g))
    }

    pub fn eval_scalar<T: Scalar>(&self, y: &[T], closed: bool) -> Option<Vec<T>> {
        let yf: Vec<f64> = y.iter().map(Scalar::to_float).collect();
        let (k, g) = self.locate(&yf, closed)?;
        let a = &self.atoms[k];
        let ginv = self.group.element(self.group.inv(g));
        let z = ginv.apply_scalar(y);
        let w: Vec<T> = z.into_iter().zip(&a.center).map(|(zi, ci)| zi - T::from_rational(ci)).collect();
        let n = w.len();
        let v: Vec<T> = (0..n)
            .map(|i| {
                (0..n).fold(T::zero(), |acc, j| acc + T::from_rational(&a.linear[i * n + j]) * w[j].clone())
            })
            .collect();
        Some(self.group.element(g).apply_scalar(&v))
    }

    /// `g L g⁻¹` at `y`, or `None` off the closed support.
    pub fn jacobian_at(&self, y: &[f64]) -> Option<Vec<f64>> {
        let (k, g) = self.locate(y, true)?;
        let n = y.len();
        let ge = self.group.element(g).entries();
        let gi = self.group.element(self.group.inv(g)).entries();
        let t = linalg::mat_mul(&self.atoms[k].linear_f64, gi, n);
        Some(linalg::mat_mul(ge, &t, n))
    }

    pub fn jacobian_exact_at(&self, y: &[f64]) -> Option<Vec<Q>> {
        let (k, g) = self.locate(y, true)?;
        let n = y.len();
        let ge = self.group.element(g).exact_entries()?;
        let gi = self.group.element(self.group.inv(g)).exact_entries()?;
        let l = &self.atoms[k].linear;
        let t = q_mat_mul(l, gi, n);
        Some(q_mat_mul(ge, &t, n))
    }
}

fn q_mat_mul(a: &[Q], b: &[Q], n: usize) -> Vec<Q> {
    let mut out = vec![Q::zero(); n * n];
    for i in 0..n {
        for k in 0..n {
            if a[i * n + k].is_zero() {
                continue;
            }
            for j in 0..n {
                out[i * n + j] += &a[i * n + k] * &b[k * n + j];
            }
        }
    }
    out
}

/// The map given by a list of atoms; the empty map when the list is empty.
pub fn atoms_map(group: Arc<FiniteGroup>, atoms: Vec<StandardAtom>) -> EquivariantLocalMap {
    if atoms.is_empty() {
        EquivariantLocalMap::empty(group)
    } else {
        EquivariantLocalMap::new(group.clone(), MapBody::Atoms(AtomList::new(group, atoms)))
    }
}

/// Single atom of the given sign in component `key`, placed where the most
/// room is and away from `occupied`.
pub fn standard_atom(analysis: &Analysis, key: DegreeKey, sign: i32, occupied: &[Ball]) -> Result<StandardAtom> {
    if !analysis.has_key(&key) {
        return Err(Error::InvalidKey {
            type_id: key.type_id,
            component: key.component,
        });
    }
    let chart = analysis.chart(key.type_id);
    if chart.fixed_dim() == 0 && sign < 0 {
        return Err(Error::Unrealizable {
            detail: format!("H{} has a point stratum; only +1 is available there", key.type_id),
        });
    }
    let mut best: Option<(f64, &[f64])> = None;
    for cell in chart.cells_of(key.component) {
        let r = RADIUS_FACTOR * clearance_bound(analysis, &cell.point, occupied);
        if best.is_none_or(|(b, _)| r > b) {
            best = Some((r, &cell.coords));
        }
    }
    let Some((radius, coords)) = best else {
        return Err(Error::NoRoom {
            detail: format!("component {} of H{} has no cells", key.component, key.type_id),
        });
    };
    if radius < MIN_RADIUS {
        return Err(Error::NoRoom {
            detail: format!("best radius {radius:e} in {key} is below {MIN_RADIUS:e}"),
        });
    }
    let center = snap_to_fixed(&chart.basis, coords, 24);
    let linear = default_linear(&chart.basis, sign);
    StandardAtom::new(center, key.type_id, key.component, sign, radius, linear)
}

/// Distance bound at `x ∈ Ω_H`: orbit separation, distance to smaller
/// lattice subspaces, domain clearance and gap to occupied orbit balls.
fn clearance_bound(analysis: &Analysis, x: &[f64], occupied: &[Ball]) -> f64 {
    let group = analysis.group();
    let scale = 1e-9 * (1.0 + linalg::norm(x));
    let mut bound = analysis.domain.clearance(x);
    for g in 0..group.order() {
        let d = linalg::dist(&group.act(g, x), x);
        if d > scale {
            bound = bound.min(d);
        }
    }
    for sub in &analysis.table.lattice {
        let d = sub.basis.distance(x);
        if d > scale {
            bound = bound.min(d);
        }
    }
    for b in occupied {
        for g in 0..group.order() {
            let gap = linalg::dist(&group.act(g, &b.center), x) - b.radius;
            bound = bound.min(gap / RADIUS_FACTOR);
        }
    }
    bound
}

/// A map with degree vector `target`, built from disjoint atoms.
pub fn realize(analysis: &Analysis, target: &DegreeVector) -> Result<EquivariantLocalMap> {
    realize_avoiding(analysis, target, &[])
}

/// As [`realize`], keeping every atom clear of the orbit balls `occupied`.
pub fn realize_avoiding(analysis: &Analysis, target: &DegreeVector, occupied: &[Ball]) -> Result<EquivariantLocalMap> {
    let mut keys = target.support();
    for (key, _) in &keys {
        if !analysis.has_key(key) {
            return Err(Error::InvalidKey {
                type_id: key.type_id,
                component: key.component,
            });
        }
        if analysis.chart(key.type_id).fixed_dim() == 0 {
            let m = target.get(key);
            if m != 1 {
                return Err(Error::Unrealizable {
                    detail: format!("{key} is a point stratum; only degree 0 or 1 is realizable, asked {m}"),
                });
            }
        }
    }
    keys.sort_by_key(|(k, m)| (-m.abs(), *k));
    let mut taken: Vec<Ball> = occupied.to_vec();
    let mut atoms = Vec::new();
    for (key, m) in keys {
        let sign = if m > 0 { 1 } else { -1 };
        for _ in 0..m.abs() {
            let atom = standard_atom(analysis, key, sign, &taken)?;
            taken.push(atom.ball());
            atoms.push(atom);
        }
    }
    Ok(atoms_map(analysis.group().clone(), atoms))
}

/// `f ⊔ g` on the union of two disjoint domains.
pub fn disjoint_union(f: &EquivariantLocalMap, g: &EquivariantLocalMap) -> Result<EquivariantLocalMap> {
    if !Arc::ptr_eq(f.group(), g.group()) && (f.group().order() != g.group().order() || f.dim() != g.dim()) {
        return Err(Error::Config("maps act under different groups".into()));
    }
    f.domain()
        .check_disjoint(&g.domain())
        .map_err(|detail| Error::Overlap { detail })?;
    Ok(match (f.body(), g.body()) {
        (MapBody::Empty, _) => g.clone(),
        (_, MapBody::Empty) => f.clone(),
        (MapBody::Atoms(a), MapBody::Atoms(b)) => {
            let atoms = a.atoms.iter().chain(&b.atoms).cloned().collect();
            atoms_map(f.group().clone(), atoms)
        }
        _ => {
            let mut parts = Vec::new();
            for m in [f, g] {
                match m.body() {
                    MapBody::Union(ps) => parts.extend(ps.iter().cloned()),
                    _ => parts.push(m.clone()),
                }
            }
            EquivariantLocalMap::new(f.group().clone(), MapBody::Union(parts))
        }
    })
}

/// Replaces `f` near a regular zero by a standard atom with the same local
/// degree. Returns the atom and the straight-line otopy from `f`
/// restricted to the atom's orbit ball to the atom itself.
pub fn linearize(f: &EquivariantLocalMap, zero: &StratumZero, analysis: &Analysis) -> Result<(StandardAtom, Otopy)> {
    let chart = analysis.chart(zero.type_id);
    let n = f.dim();
    let u = chart.basis.coords(&zero.point);
    let center = snap_to_fixed(&chart.basis, &u, 40);
    let cf: Vec<f64> = center.iter().map(q_to_f64).collect();
    let linear = match f.jacobian_exact(&center) {
        Some(j) => j,
        None => f
            .jacobian(&cf)?
            .into_iter()
            .map(Q::from_f64)
            .collect(),
    };
    let no_radius = || Error::NoValidRadius { point: zero.point.clone() };
    let r0 = RADIUS_FACTOR * clearance_bound(analysis, &cf, &[]).min(f.domain().clearance(&cf) / RADIUS_FACTOR);
    if !(r0 > 0.0) {
        return Err(no_radius());
    }
    let lf: Vec<f64> = linear.iter().map(q_to_f64).collect();
    let eta = analysis.options.eta_loc;
    let dirs = shell_directions(n, analysis.options.seed);
    let tn = analysis.options.t_samples.max(2);
    let mut radius = r0;
    while radius >= MIN_RADIUS * 1e-2 {
        let ok = [0.5, 0.75, 1.0].iter().all(|&s| {
            dirs.iter().all(|d| {
                let z: Vec<f64> = cf.iter().zip(d).map(|(c, di)| c + s * radius * di).collect();
                let Some(fz) = f.eval_closure(&z) else { return false };
                let w: Vec<f64> = z.iter().zip(&cf).map(|(a, b)| a - b).collect();
                let az = linalg::mat_vec(&lf, n, &w);
                (0..tn).all(|k| {
                    let t = k as f64 / (tn - 1) as f64;
                    let h: Vec<f64> = fz.iter().zip(&az).map(|(a, b)| (1.0 - t) * a + t * b).collect();
                    linalg::norm(&h) >= eta
                })
            })
        });
        if ok {
            let atom = StandardAtom::new(center, zero.type_id, zero.component, zero.sign, radius, linear)?;
            let to = atoms_map(f.group().clone(), vec![atom.clone()]);
            let from = f.restricted(to.domain());
            return Ok((atom, Otopy::StraightLine { from, to }));
        }
        radius *= 0.5;
    }
    Err(no_radius())
}

fn shell_directions(n: usize, seed: u64) -> Vec<Vec<f64>> {
    use rand::{Rng, SeedableRng};
    match n {
        1 => vec![vec![1.0], vec![-1.0]],
        2 => (0..64)
            .map(|k| {
                let a = std::f64::consts::TAU * k as f64 / 64.0;
                vec![a.cos(), a.sin()]
            })
            .collect(),
        _ => {
            let mut rng = rand::rngs::StdRng::seed_from_u64(seed ^ 0x5eed);
            let mut out: Vec<Vec<f64>> = (0..n)
                .flat_map(|i| {
                    [1.0, -1.0].map(|s| {
                        let mut v = vec![0.0; n];
                        v[i] = s;
                        v
                    })
                })
                .collect();
            while out.len() < 256 {
                let v: Vec<f64> = (0..n).map(|_| rng.gen_range(-1.0..1.0)).collect();
                let m = linalg::norm(&v);
                if m > 1e-3 && m <= 1.0 {
                    out.push(v.iter().map(|x| x / m).collect());
                }
            }
            out
        }
    }
}

/// Degrees of a single atom: `sign` at its key, zero elsewhere.
pub fn atom_degree(atom: &StandardAtom) -> DegreeVector {
    let mut v = DegreeVector::new();
    v.set(DegreeKey::new(atom.type_id, atom.component), atom.sign as i64);
    v
}

/// Determinant sign of `L` restricted to `V^H`, for checking atom records.
pub fn restricted_sign(atom: &StandardAtom, basis: &SubspaceBasis) -> i32 {
    let d = basis.dim();
    if d == 0 {
        return 1;
    }
    let n = atom.dim();
    let b = basis.vectors();
    let mut m = vec![0.0; d * d];
    for i in 0..d {
        let lb: Vec<f64> = linalg::mat_vec(atom.linear_f64(), n, &b[i]);
        for j in 0..d {
            m[j * d + i] = linalg::dot(&b[j], &lb);
        }
    }
    if linalg::det(&m, d).is_negative() {
        -1
    } else {
        1
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::analysis::Options;
    use crate::degree::equivariant_degree;
    use crate::domain::{saturate, AxisBox};
    use crate::group::{close_generators, OrthoMatrix, MAX_GROUP_ORDER, TOL_GROUP};
    use crate::map::check_equivariance;
    use crate::scalar::q_int;

    fn analysis(dim: usize, gens: &[&[i64]], boxes: Vec<AxisBox>) -> Analysis {
        let gens: Vec<OrthoMatrix> = gens
            .iter()
            .map(|g| OrthoMatrix::from_rational(dim, g.iter().map(|&v| q_int(v)).collect(), TOL_GROUP).unwrap())
            .collect();
        let g = Arc::new(close_generators(dim, &gens, MAX_GROUP_ORDER, TOL_GROUP).unwrap());
        Analysis::new(Arc::new(saturate(boxes, g).unwrap()), Options::default()).unwrap()
    }

    fn dihedral_annulus() -> Analysis {
        analysis(
            2,
            &[&[0, -1, 1, 0], &[1, 0, 0, -1]],
            vec![AxisBox::new(vec![1.0, -3.0], vec![3.0, 3.0]).unwrap()],
        )
    }

    #[test]
    fn reflection_atom_is_equivariant_and_negative() {
        let a = dihedral_annulus();
        for key in a.keys() {
            for sign in [1, -1] {
                let atom = standard_atom(&a, key, sign, &[]).unwrap();
                let f = atoms_map(a.group().clone(), vec![atom.clone()]);
                let rep = check_equivariance(&f, 64, 1, 1e-9);
                assert!(rep.pass && rep.exact, "{key} {sign}: {rep:?}");
                assert_eq!(restricted_sign(&atom, &a.chart(key.type_id).basis), sign);
                assert_eq!(equivariant_degree(&f, &a).unwrap().vector, atom_degree(&atom));
            }
        }
    }

    #[test]
    fn realize_hits_target_with_many_atoms() {
        let a = dihedral_annulus();
        let keys = a.keys();
        let mut target = DegreeVector::new();
        target.set(keys[0], 3);
        target.set(keys[1], -2);
        target.set(keys[2], 1);
        let f = realize(&a, &target).unwrap();
        f.domain().check_disjoint(&Region::Empty).unwrap();
        assert_eq!(equivariant_degree(&f, &a).unwrap().vector, target);
    }

    #[test]
    fn point_stratum_rules() {
        let a = analysis(2, &[&[0, -1, 1, 0]], vec![AxisBox::new(vec![-3.0, -3.0], vec![3.0, 3.0]).unwrap()]);
        let origin = a.charts.iter().find(|c| c.fixed_dim() == 0).unwrap().type_id;
        let key = DegreeKey::new(origin, 0);
        let mut t = DegreeVector::new();
        t.set(key, -1);
        assert!(matches!(realize(&a, &t), Err(Error::Unrealizable { .. })));
        t.set(key, 2);
        assert!(matches!(realize(&a, &t), Err(Error::Unrealizable { .. })));
        t.set(key, 1);
        assert_eq!(equivariant_degree(&realize(&a, &t).unwrap(), &a).unwrap().vector, t);
    }

    #[test]
    fn overlapping_union_is_rejected() {
        let a = dihedral_annulus();
        let k = a.keys()[0];
        let atom = standard_atom(&a, k, 1, &[]).unwrap();
        let f = atoms_map(a.group().clone(), vec![atom.clone()]);
        assert!(matches!(disjoint_union(&f, &f), Err(Error::Overlap { .. })));
        let g = atoms_map(a.group().clone(), vec![standard_atom(&a, k, -1, &[atom.ball()]).unwrap()]);
        let u = disjoint_union(&f, &g).unwrap();
        assert!(equivariant_degree(&u, &a).unwrap().vector.is_zero());
    }

    #[test]
    fn record_round_trip() {
        let a = dihedral_annulus();
        let atom = standard_atom(&a, a.keys()[1], -1, &[]).unwrap();
        let back = StandardAtom::from_record(&atom.to_record(), &a).unwrap();
        assert_eq!(back.center, atom.center);
        assert_eq!(back.linear, atom.linear);
        let mut rec = atom.to_record();
        rec.linear = None;
        assert_eq!(StandardAtom::from_record(&rec, &a).unwrap().linear, atom.linear);
    }

    #[test]
    fn bad_key_is_rejected() {
        let a = dihedral_annulus();
        let mut t = DegreeVector::new();
        t.set(DegreeKey::new(9, 0), 1);
        assert!(matches!(realize(&a, &t), Err(Error::InvalidKey { .. })));
    }
}
