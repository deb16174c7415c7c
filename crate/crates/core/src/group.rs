//! Finite orthogonal matrix groups: closure from generators, Cayley tables,
//! subgroups, normalizers, Weyl groups, fixed subspaces and isotropy.
//!
//! When every generator is *exactly* orthogonal over ℚ the whole group is
//! carried in rational arithmetic and all identities are decided exactly.
//! Otherwise matrices are compared entrywise within `tol`.

use std::collections::{HashMap, HashSet};

use num_traits::{One, Zero};
use serde::Serialize;

use crate::error::{Error, Result};
use crate::linalg;
use crate::scalar::{q_to_f64, Scalar, Q};

/// Default cap on the number of group elements produced by closure.
pub const MAX_GROUP_ORDER: usize = 4096;
/// Default tolerance for deciding floating group identities.
pub const TOL_GROUP: f64 = 1e-9;

#[derive(Clone, Debug)]
pub struct OrthoMatrix {
    dim: usize,
    approx: Vec<f64>,
    exact: Option<Vec<Q>>,
}

impl OrthoMatrix {
    /// Builds a matrix from rational entries. It is kept exact when `MᵀM = I`
    /// holds exactly, otherwise it falls back to floats checked within `tol`.
    pub fn from_rational(dim: usize, entries: Vec<Q>, tol: f64) -> Result<Self> {
        if entries.len() != dim * dim {
            return Err(Error::DimensionMismatch {
                expected: dim * dim,
                found: entries.len(),
            });
        }
        let approx: Vec<f64> = entries.iter().map(q_to_f64).collect();
        let exact_ok = (0..dim).all(|i| {
            (0..dim).all(|j| {
                let s = (0..dim).fold(Q::zero(), |acc, k| acc + &entries[k * dim + i] * &entries[k * dim + j]);
                if i == j {
                    s.is_one()
                } else {
                    s.is_zero()
                }
            })
        });
        if exact_ok {
            return Ok(OrthoMatrix {
                dim,
                approx,
                exact: Some(entries),
            });
        }
        Self::from_f64(dim, approx, tol)
    }

    pub fn from_f64(dim: usize, entries: Vec<f64>, tol: f64) -> Result<Self> {
        if entries.len() != dim * dim {
            return Err(Error::DimensionMismatch {
                expected: dim * dim,
                found: entries.len(),
            });
        }
        let m = OrthoMatrix {
            dim,
            approx: entries,
            exact: None,
        };
        let defect = m.orthogonality_defect();
        if defect > tol {
            return Err(Error::NotOrthogonal { index: 0, defect });
        }
        Ok(m)
    }

    pub fn identity(dim: usize, exact: bool) -> Self {
        let approx = linalg::identity(dim);
        let exact = exact.then(|| approx.iter().map(|&v| Q::from_f64(v)).collect());
        OrthoMatrix { dim, approx, exact }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn entries(&self) -> &[f64] {
        &self.approx
    }

    pub fn exact_entries(&self) -> Option<&[Q]> {
        self.exact.as_deref()
    }

    pub fn is_exact(&self) -> bool {
        self.exact.is_some()
    }

    /// `self · other`
    pub fn compose(&self, other: &OrthoMatrix) -> OrthoMatrix {
        let n = self.dim;
        let exact = match (&self.exact, &other.exact) {
            (Some(a), Some(b)) => {
                let mut out = vec![Q::zero(); n * n];
                for i in 0..n {
                    for k in 0..n {
                        if a[i * n + k].is_zero() {
                            continue;
                        }
                        for j in 0..n {
                            out[i * n + j] = &out[i * n + j] + &a[i * n + k] * &b[k * n + j];
                        }
                    }
                }
                Some(out)
            }
            _ => None,
        };
        let approx = match &exact {
            Some(e) => e.iter().map(q_to_f64).collect(),
            None => linalg::mat_mul(&self.approx, &other.approx, n),
        };
        OrthoMatrix { dim: n, approx, exact }
    }

    pub fn transpose(&self) -> OrthoMatrix {
        let n = self.dim;
        let exact = self.exact.as_ref().map(|e| {
            let mut t = e.clone();
            for i in 0..n {
                for j in 0..n {
                    t[j * n + i] = e[i * n + j].clone();
                }
            }
            t
        });
        OrthoMatrix {
            dim: n,
            approx: linalg::transpose(&self.approx, n),
            exact,
        }
    }

    pub fn apply(&self, x: &[f64]) -> Vec<f64> {
        linalg::mat_vec(&self.approx, self.dim, x)
    }

    /// Applies the matrix in the scalar type `T`, using exact entries when present.
    pub fn apply_scalar<T: Scalar>(&self, x: &[T]) -> Vec<T> {
        let n = self.dim;
        (0..n)
            .map(|i| {
                (0..n).fold(T::zero(), |acc, j| {
                    let m = match &self.exact {
                        Some(e) => T::from_rational(&e[i * n + j]),
                        None => T::from_f64(self.approx[i * n + j]),
                    };
                    acc + m * x[j].clone()
                })
            })
            .collect()
    }

    pub fn orthogonality_defect(&self) -> f64 {
        let n = self.dim;
        let mut worst: f64 = 0.0;
        for i in 0..n {
            for j in 0..n {
                let s: f64 = (0..n).map(|k| self.approx[k * n + i] * self.approx[k * n + j]).sum();
                let target = if i == j { 1.0 } else { 0.0 };
                worst = worst.max((s - target).abs());
            }
        }
        worst
    }

    pub fn det(&self) -> f64 {
        linalg::det(&self.approx, self.dim)
    }

    fn approx_eq(&self, other: &OrthoMatrix, tol: f64) -> bool {
        match (&self.exact, &other.exact) {
            (Some(a), Some(b)) => a == b,
            _ => self.approx.iter().zip(&other.approx).all(|(a, b)| (a - b).abs() <= tol),
        }
    }

    fn float_key(&self) -> Vec<i64> {
        self.approx.iter().map(|v| (v * 1e6).round() as i64).collect()
    }
}

/// Sorted index set into [`FiniteGroup::elements`].
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
pub struct Subgroup {
    members: Vec<usize>,
}

impl Subgroup {
    pub fn from_members(mut members: Vec<usize>) -> Self {
        members.sort_unstable();
        members.dedup();
        Subgroup { members }
    }

    pub fn trivial() -> Self {
        Subgroup { members: vec![0] }
    }

    pub fn members(&self) -> &[usize] {
        &self.members
    }

    pub fn order(&self) -> usize {
        self.members.len()
    }

    pub fn contains(&self, g: usize) -> bool {
        self.members.binary_search(&g).is_ok()
    }

    pub fn is_subset_of(&self, other: &Subgroup) -> bool {
        self.members.iter().all(|&g| other.contains(g))
    }
}

/// Orthonormal basis of a linear subspace, plus the rational orthogonal basis
/// it was normalized from when the subspace was computed exactly.
#[derive(Clone, Debug)]
pub struct SubspaceBasis {
    ambient_dim: usize,
    vectors: Vec<Vec<f64>>,
    rational: Option<Vec<Vec<Q>>>,
}

impl SubspaceBasis {
    pub fn from_rational(ambient_dim: usize, orthogonal: Vec<Vec<Q>>) -> Self {
        let vectors = orthogonal
            .iter()
            .map(|v| {
                let f = linalg::q_vec_to_f64(v);
                let n = linalg::norm(&f);
                f.iter().map(|x| x / n).collect()
            })
            .collect();
        SubspaceBasis {
            ambient_dim,
            vectors,
            rational: Some(orthogonal),
        }
    }

    pub fn from_orthonormal(ambient_dim: usize, vectors: Vec<Vec<f64>>) -> Self {
        SubspaceBasis {
            ambient_dim,
            vectors,
            rational: None,
        }
    }

    pub fn full(ambient_dim: usize) -> Self {
        let rational = (0..ambient_dim)
            .map(|i| (0..ambient_dim).map(|j| if i == j { Q::one() } else { Q::zero() }).collect())
            .collect();
        Self::from_rational(ambient_dim, rational)
    }

    pub fn ambient_dim(&self) -> usize {
        self.ambient_dim
    }

    pub fn dim(&self) -> usize {
        self.vectors.len()
    }

    pub fn vectors(&self) -> &[Vec<f64>] {
        &self.vectors
    }

    /// Rational orthogonal (not normalized) basis, same directions and order.
    pub fn rational(&self) -> Option<&[Vec<Q>]> {
        self.rational.as_deref()
    }

    pub fn is_exact(&self) -> bool {
        self.rational.is_some()
    }

    /// `Bᵀx`
    pub fn coords(&self, x: &[f64]) -> Vec<f64> {
        self.vectors.iter().map(|b| linalg::dot(b, x)).collect()
    }

    /// `Bu`
    pub fn embed(&self, u: &[f64]) -> Vec<f64> {
        let mut x = vec![0.0; self.ambient_dim];
        for (b, &ui) in self.vectors.iter().zip(u) {
            for (xi, bi) in x.iter_mut().zip(b) {
                *xi += ui * bi;
            }
        }
        x
    }

    pub fn project(&self, x: &[f64]) -> Vec<f64> {
        self.embed(&self.coords(x))
    }

    pub fn distance(&self, x: &[f64]) -> f64 {
        linalg::dist(x, &self.project(x))
    }
}

/// Weyl group `WH = NH/H` with its action on `V^H` in orthonormal coordinates.
#[derive(Clone, Debug)]
pub struct WeylData {
    pub subgroup: Subgroup,
    pub normalizer: Subgroup,
    pub coset_reps: Vec<usize>,
    pub action_on_fixed: Vec<Vec<f64>>,
}

impl WeylData {
    pub fn order(&self) -> usize {
        self.coset_reps.len()
    }

    pub fn act(&self, rep: usize, u: &[f64]) -> Vec<f64> {
        linalg::mat_vec(&self.action_on_fixed[rep], u.len(), u)
    }

    /// True when no non-identity coset representative fixes `u`.
    pub fn acts_freely_at(&self, u: &[f64], tol: f64) -> bool {
        (1..self.order()).all(|r| linalg::dist(&self.act(r, u), u) > tol)
    }
}

#[derive(Clone, Debug)]
pub struct FiniteGroup {
    dim: usize,
    exact: bool,
    tol: f64,
    elements: Vec<OrthoMatrix>,
    generators: Vec<usize>,
    cayley: Vec<usize>,
    inverse: Vec<usize>,
    element_fixed: Vec<SubspaceBasis>,
}

enum ElementIndex {
    Exact(HashMap<Vec<Q>, usize>),
    Float(HashMap<Vec<i64>, Vec<usize>>),
}

impl ElementIndex {
    fn find(&self, m: &OrthoMatrix, elements: &[OrthoMatrix], tol: f64) -> Option<usize> {
        match self {
            ElementIndex::Exact(map) => map.get(m.exact.as_ref()?).copied(),
            ElementIndex::Float(map) => map
                .get(&m.float_key())
                .and_then(|c| c.iter().copied().find(|&i| elements[i].approx_eq(m, tol)))
                // rounding boundaries: fall back to a scan
                .or_else(|| elements.iter().position(|e| e.approx_eq(m, tol))),
        }
    }

    fn insert(&mut self, m: &OrthoMatrix, idx: usize) {
        match self {
            ElementIndex::Exact(map) => {
                map.insert(m.exact.clone().expect("exact element"), idx);
            }
            ElementIndex::Float(map) => map.entry(m.float_key()).or_default().push(idx),
        }
    }
}

/// Smallest group containing `gens`, elements ordered breadth-first from the
/// identity with generators tried in the order given.
pub fn close_generators(dim: usize, gens: &[OrthoMatrix], cap: usize, tol: f64) -> Result<FiniteGroup> {
    for (index, g) in gens.iter().enumerate() {
        if g.dim != dim {
            return Err(Error::DimensionMismatch {
                expected: dim,
                found: g.dim,
            });
        }
        if !g.is_exact() {
            let defect = g.orthogonality_defect();
            if defect > tol {
                return Err(Error::NotOrthogonal { index, defect });
            }
        }
    }
    let exact = gens.iter().all(OrthoMatrix::is_exact);
    let gens: Vec<OrthoMatrix> = gens
        .iter()
        .map(|g| {
            if exact {
                g.clone()
            } else {
                OrthoMatrix {
                    exact: None,
                    ..g.clone()
                }
            }
        })
        .collect();

    let identity = OrthoMatrix::identity(dim, exact);
    let mut index = if exact {
        ElementIndex::Exact(HashMap::new())
    } else {
        ElementIndex::Float(HashMap::new())
    };
    index.insert(&identity, 0);
    let mut elements = vec![identity];
    let mut parent: Vec<Option<(usize, usize)>> = vec![None];
    let mut right: Vec<Vec<usize>> = Vec::new();

    let mut i = 0;
    while i < elements.len() {
        let mut row = Vec::with_capacity(gens.len());
        for (k, gen) in gens.iter().enumerate() {
            let p = elements[i].compose(gen);
            let j = match index.find(&p, &elements, tol) {
                Some(j) => j,
                None => {
                    if elements.len() >= cap {
                        return Err(Error::CapExceeded { cap });
                    }
                    let j = elements.len();
                    index.insert(&p, j);
                    elements.push(p);
                    parent.push(Some((i, k)));
                    j
                }
            };
            row.push(j);
        }
        right.push(row);
        i += 1;
    }

    let order = elements.len();
    // e_i · e_j = (e_i · e_parent(j)) · g_k, filled in BFS order.
    let mut cayley = vec![0usize; order * order];
    for a in 0..order {
        cayley[a * order] = a;
        for b in 1..order {
            let (p, k) = parent[b].expect("non-identity has a parent");
            cayley[a * order + b] = right[cayley[a * order + p]][k];
        }
    }
    let inverse: Vec<usize> = (0..order)
        .map(|a| (0..order).find(|&b| cayley[a * order + b] == 0).expect("group element has an inverse"))
        .collect();
    let generators = (0..gens.len()).map(|k| right[0][k]).collect();
    let element_fixed = elements.iter().map(|m| fixed_basis(&[m], dim, tol)).collect();

    let group = FiniteGroup {
        dim,
        exact,
        tol,
        elements,
        generators,
        cayley,
        inverse,
        element_fixed,
    };
    group.validate_table()?;
    Ok(group)
}

fn fixed_basis(mats: &[&OrthoMatrix], dim: usize, tol: f64) -> SubspaceBasis {
    if mats.iter().all(|m| m.is_exact()) {
        let mut rows: Vec<Vec<Q>> = Vec::new();
        for m in mats {
            let e = m.exact.as_ref().unwrap();
            for i in 0..dim {
                rows.push(
                    (0..dim)
                        .map(|j| if i == j { &e[i * dim + j] - Q::one() } else { e[i * dim + j].clone() })
                        .collect(),
                );
            }
        }
        let kernel = linalg::kernel_rational(&rows, dim);
        SubspaceBasis::from_rational(dim, linalg::gram_schmidt_rational(&kernel))
    } else {
        let mut rows: Vec<Vec<f64>> = Vec::new();
        for m in mats {
            for i in 0..dim {
                rows.push(
                    (0..dim)
                        .map(|j| m.approx[i * dim + j] - if i == j { 1.0 } else { 0.0 })
                        .collect(),
                );
            }
        }
        // Pivot threshold well above entry noise of the group matrices.
        let kernel = linalg::kernel_float(&rows, dim, tol.max(1e-12).sqrt() * 1e-2);
        SubspaceBasis::from_orthonormal(dim, linalg::gram_schmidt_float(&kernel, 1e-8))
    }
}

impl FiniteGroup {
    pub fn trivial(dim: usize) -> Self {
        close_generators(dim, &[], 1, TOL_GROUP).expect("trivial group")
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn order(&self) -> usize {
        self.elements.len()
    }

    pub fn is_exact(&self) -> bool {
        self.exact
    }

    pub fn tol(&self) -> f64 {
        self.tol
    }

    pub fn elements(&self) -> &[OrthoMatrix] {
        &self.elements
    }

    pub fn element(&self, g: usize) -> &OrthoMatrix {
        &self.elements[g]
    }

    /// Indices of the generators as given to [`close_generators`].
    pub fn generators(&self) -> &[usize] {
        &self.generators
    }

    pub fn mul(&self, a: usize, b: usize) -> usize {
        self.cayley[a * self.order() + b]
    }

    pub fn inv(&self, a: usize) -> usize {
        self.inverse[a]
    }

    pub fn act(&self, g: usize, x: &[f64]) -> Vec<f64> {
        self.elements[g].apply(x)
    }

    /// Fixed subspace of the single element `g`.
    pub fn element_fixed(&self, g: usize) -> &SubspaceBasis {
        &self.element_fixed[g]
    }

    pub fn whole(&self) -> Subgroup {
        Subgroup::from_members((0..self.order()).collect())
    }

    fn validate_table(&self) -> Result<()> {
        let n = self.order();
        let mut seen = vec![false; n];
        for a in 0..n {
            seen.iter_mut().for_each(|s| *s = false);
            for b in 0..n {
                let c = self.cayley[a * n + b];
                if seen[c] {
                    return Err(Error::Config(format!("Cayley row {a} is not a permutation")));
                }
                seen[c] = true;
            }
        }
        // Matrix consistency: exhaustive for small groups, strided otherwise.
        let stride = if n * n <= 65536 { 1 } else { (n * n) / 10007 + 1 };
        let mut idx = 0;
        while idx < n * n {
            let (a, b) = (idx / n, idx % n);
            let prod = self.elements[a].compose(&self.elements[b]);
            if !prod.approx_eq(&self.elements[self.cayley[idx]], self.tol.max(1e-9) * 10.0) {
                return Err(Error::Config(format!("Cayley entry ({a},{b}) disagrees with matrix product")));
            }
            idx += stride;
        }
        Ok(())
    }

    /// `g H g⁻¹`
    pub fn conjugate(&self, h: &Subgroup, g: usize) -> Subgroup {
        let gi = self.inv(g);
        Subgroup::from_members(h.members().iter().map(|&x| self.mul(self.mul(g, x), gi)).collect())
    }

    pub fn is_closed(&self, set: &Subgroup) -> bool {
        set.contains(0)
            && set
                .members()
                .iter()
                .all(|&a| set.contains(self.inv(a)) && set.members().iter().all(|&b| set.contains(self.mul(a, b))))
    }

    /// Subgroup generated by the given elements.
    pub fn generated(&self, elems: &[usize]) -> Subgroup {
        let mut set: HashSet<usize> = HashSet::from([0]);
        let mut frontier = vec![0usize];
        while let Some(a) = frontier.pop() {
            for &g in elems {
                let c = self.mul(a, g);
                if set.insert(c) {
                    frontier.push(c);
                }
            }
        }
        Subgroup::from_members(set.into_iter().collect())
    }

    /// `{g ∈ G : gHg⁻¹ = H}`
    pub fn normalizer(&self, h: &Subgroup) -> Subgroup {
        Subgroup::from_members((0..self.order()).filter(|&g| self.conjugate(h, g) == *h).collect())
    }

    /// All distinct conjugates of `h`, sorted.
    pub fn conjugates(&self, h: &Subgroup) -> Vec<Subgroup> {
        let mut out: Vec<Subgroup> = (0..self.order()).map(|g| self.conjugate(h, g)).collect();
        out.sort();
        out.dedup();
        out
    }

    /// Orthonormal basis of `V^H = ∩ ker(h − I)`, exact when the group is.
    pub fn fixed_subspace(&self, h: &Subgroup) -> SubspaceBasis {
        let mats: Vec<&OrthoMatrix> = h.members().iter().filter(|&&g| g != 0).map(|&g| &self.elements[g]).collect();
        if mats.is_empty() {
            return if self.exact {
                SubspaceBasis::full(self.dim)
            } else {
                SubspaceBasis::from_orthonormal(self.dim, linalg::gram_schmidt_float(&identity_rows(self.dim), 0.5))
            };
        }
        fixed_basis(&mats, self.dim, self.tol)
    }

    /// Elements acting as the identity on every vector of `basis`.
    pub fn pointwise_stabilizer(&self, basis: &SubspaceBasis) -> Subgroup {
        let members = (0..self.order())
            .filter(|&g| match (basis.rational(), self.elements[g].exact_entries()) {
                (Some(vs), Some(_)) => vs.iter().all(|v| self.elements[g].apply_scalar(v) == *v),
                _ => basis
                    .vectors()
                    .iter()
                    .all(|v| linalg::dist(&self.act(g, v), v) <= self.tol.max(1e-12) * 10.0),
            })
            .collect();
        Subgroup::from_members(members)
    }

    /// `G_x = {g : ‖gx − x‖ ≤ tol}`. Distances falling in `(tol, 10·tol]`
    /// mean `x` sits too close to a stratum wall to classify.
    pub fn isotropy_group(&self, x: &[f64], tol: f64) -> Result<Subgroup> {
        let mut members = Vec::new();
        for g in 0..self.order() {
            let d = linalg::dist(&self.act(g, x), x);
            if d <= tol {
                members.push(g);
            } else if d <= 10.0 * tol {
                return Err(Error::AmbiguousIsotropy {
                    point: x.to_vec(),
                    detail: format!("element {g} moves the point by {d:e}"),
                });
            }
        }
        let h = Subgroup::from_members(members);
        if !self.is_closed(&h) {
            return Err(Error::AmbiguousIsotropy {
                point: x.to_vec(),
                detail: "near-fixing elements do not form a subgroup".into(),
            });
        }
        Ok(h)
    }

    /// Normalizer, coset representatives of `NH/H` (first = identity) and
    /// their action on `V^H` in the coordinates of `fixed`.
    pub fn weyl_group(&self, h: &Subgroup, fixed: &SubspaceBasis) -> WeylData {
        let normalizer = self.normalizer(h);
        let mut covered: HashSet<usize> = HashSet::new();
        let mut coset_reps = Vec::new();
        for &n in normalizer.members() {
            if covered.contains(&n) {
                continue;
            }
            coset_reps.push(n);
            for &x in h.members() {
                covered.insert(self.mul(n, x));
            }
        }
        let d = fixed.dim();
        let action_on_fixed = coset_reps
            .iter()
            .map(|&w| {
                let images: Vec<Vec<f64>> = fixed.vectors().iter().map(|b| self.act(w, b)).collect();
                let mut m = vec![0.0; d * d];
                for i in 0..d {
                    for j in 0..d {
                        m[i * d + j] = linalg::dot(&fixed.vectors()[i], &images[j]);
                    }
                }
                m
            })
            .collect();
        WeylData {
            subgroup: h.clone(),
            normalizer,
            coset_reps,
            action_on_fixed,
        }
    }
}

fn identity_rows(n: usize) -> Vec<Vec<f64>> {
    (0..n).map(|i| (0..n).map(|j| if i == j { 1.0 } else { 0.0 }).collect()).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalar::q_int;

    fn mat(dim: usize, entries: &[i64]) -> OrthoMatrix {
        OrthoMatrix::from_rational(dim, entries.iter().map(|&v| q_int(v)).collect(), TOL_GROUP).unwrap()
    }

    fn dihedral8() -> FiniteGroup {
        close_generators(2, &[mat(2, &[0, -1, 1, 0]), mat(2, &[1, 0, 0, -1])], MAX_GROUP_ORDER, TOL_GROUP).unwrap()
    }

    /// Independent closure: all words of length ≤ `len` in the generators.
    fn word_closure(gens: &[OrthoMatrix], len: usize) -> Vec<Vec<Q>> {
        let dim = gens[0].dim();
        let mut words = vec![OrthoMatrix::identity(dim, true)];
        let mut all: Vec<Vec<Q>> = vec![words[0].exact_entries().unwrap().to_vec()];
        for _ in 0..len {
            let mut next = Vec::new();
            for w in &words {
                for g in gens {
                    let p = w.compose(g);
                    let e = p.exact_entries().unwrap().to_vec();
                    if !all.contains(&e) {
                        all.push(e);
                    }
                    next.push(p);
                }
            }
            words = next;
        }
        all
    }

    #[test]
    fn involution_closure() {
        let g = close_generators(1, &[mat(1, &[-1])], MAX_GROUP_ORDER, TOL_GROUP).unwrap();
        assert_eq!(g.order(), 2);
        assert!(g.is_exact());
    }

    #[test]
    fn quarter_turn_closure_is_cyclic_of_order_four() {
        let g = close_generators(2, &[mat(2, &[0, -1, 1, 0])], MAX_GROUP_ORDER, TOL_GROUP).unwrap();
        assert_eq!(g.order(), 4);
        let r = g.generators()[0];
        assert_eq!(g.mul(g.mul(r, r), g.mul(r, r)), 0);
    }

    #[test]
    fn dihedral_closure_matches_word_oracle() {
        let gens = [mat(2, &[0, -1, 1, 0]), mat(2, &[1, 0, 0, -1])];
        let g = close_generators(2, &gens, MAX_GROUP_ORDER, TOL_GROUP).unwrap();
        let oracle = word_closure(&gens, 8);
        assert_eq!(g.order(), 8);
        assert_eq!(oracle.len(), 8);
        for e in g.elements() {
            assert!(oracle.contains(&e.exact_entries().unwrap().to_vec()));
        }
    }

    #[test]
    fn irrational_rotation_hits_cap() {
        let (c, s) = (1.0f64.cos(), 1.0f64.sin());
        let r = OrthoMatrix::from_f64(2, vec![c, -s, s, c], TOL_GROUP).unwrap();
        assert_eq!(close_generators(2, &[r], 100, TOL_GROUP).unwrap_err(), Error::CapExceeded { cap: 100 });
    }

    #[test]
    fn float_rotation_of_order_five() {
        let a = 2.0 * std::f64::consts::PI / 5.0;
        let r = OrthoMatrix::from_f64(2, vec![a.cos(), -a.sin(), a.sin(), a.cos()], TOL_GROUP).unwrap();
        let g = close_generators(2, &[r], MAX_GROUP_ORDER, TOL_GROUP).unwrap();
        assert_eq!(g.order(), 5);
        assert!(!g.is_exact());
    }

    #[test]
    fn non_orthogonal_generator_is_rejected() {
        let m = OrthoMatrix::from_rational(1, vec![q_int(2)], TOL_GROUP);
        assert!(matches!(m, Err(Error::NotOrthogonal { .. })));
    }

    #[test]
    fn normalizer_examples() {
        let g = dihedral8();
        assert_eq!(g.normalizer(&g.whole()), g.whole());
        assert_eq!(g.normalizer(&Subgroup::trivial()), g.whole());
        let s = g.generators()[1];
        let h = Subgroup::from_members(vec![0, s]);
        // enumeration oracle
        let count = (0..8)
            .filter(|&x| h.members().iter().all(|&k| h.contains(g.mul(g.mul(x, k), g.inv(x)))))
            .count();
        assert_eq!(count, 4);
        assert_eq!(g.normalizer(&h).order(), 4);
    }

    #[test]
    fn weyl_examples() {
        let g = dihedral8();
        let whole = g.whole();
        assert_eq!(g.weyl_group(&whole, &g.fixed_subspace(&whole)).order(), 1);
        let e = Subgroup::trivial();
        let w = g.weyl_group(&e, &g.fixed_subspace(&e));
        assert_eq!(w.order(), 8);
        for (k, &rep) in w.coset_reps.iter().enumerate() {
            for (a, b) in w.action_on_fixed[k].iter().zip(g.element(rep).entries()) {
                assert!((a - b).abs() < 1e-15);
            }
        }
        let s = g.generators()[1];
        let h = Subgroup::from_members(vec![0, s]);
        let fixed = g.fixed_subspace(&h);
        let w = g.weyl_group(&h, &fixed);
        assert_eq!(w.order(), 2);
        assert_eq!(w.action_on_fixed[1], vec![-1.0]);
    }

    #[test]
    fn fixed_subspace_examples() {
        let g = dihedral8();
        assert_eq!(g.fixed_subspace(&Subgroup::trivial()).dim(), 2);
        let s = g.generators()[1];
        let axis = g.fixed_subspace(&Subgroup::from_members(vec![0, s]));
        assert_eq!(axis.vectors(), &[vec![1.0, 0.0]]);
        let r = g.generators()[0];
        assert_eq!(g.fixed_subspace(&g.generated(&[r])).dim(), 0);
    }

    #[test]
    fn isotropy_examples() {
        let g = close_generators(2, &[mat(2, &[1, 0, 0, -1])], MAX_GROUP_ORDER, TOL_GROUP).unwrap();
        assert_eq!(g.isotropy_group(&[0.0, 0.0], 1e-9).unwrap(), g.whole());
        assert_eq!(g.isotropy_group(&[2.0, 0.0], 1e-9).unwrap(), g.whole());
        assert_eq!(g.isotropy_group(&[1.0, 1.0], 1e-9).unwrap(), Subgroup::trivial());
        assert!(matches!(
            g.isotropy_group(&[1.0, 2e-9], 1e-9),
            Err(Error::AmbiguousIsotropy { .. })
        ));
    }
}
