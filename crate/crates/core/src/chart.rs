//! Grid charts of a stratum `Ω_H` and of its quotient `Ω_H/WH`.
//!
//! Cells live in the orthonormal coordinates of `V^H` on a grid centered at
//! the origin. A cell is kept when its center lies in Ω, has isotropy exactly
//! `H`, and no smaller lattice subspace comes within the cell's half-diagonal
//! of the center. Face-adjacent kept cells are joined into components of
//! `Ω_H`; merging each cell with the cell holding its `WH`-images gives the
//! components of the quotient.

use std::collections::HashMap;
use std::sync::Arc;

use rayon::prelude::*;

use crate::domain::InvariantDomain;
use crate::error::{Error, Result};
use crate::group::{Subgroup, SubspaceBasis, WeylData};
use crate::linalg;
use crate::orbit_types::{LatticeSubspace, OrbitTypeTable};

#[derive(Clone, Debug)]
pub struct Cell {
    pub index: Vec<i64>,
    /// Center in `V^H` coordinates.
    pub coords: Vec<f64>,
    /// Center in ambient coordinates.
    pub point: Vec<f64>,
}

/// A smaller lattice subspace seen from inside `V^H`.
#[derive(Clone, Debug)]
pub struct Wall {
    /// Orthonormal basis in `V^H` coordinates.
    pub basis: Vec<Vec<f64>>,
    /// Unit normal when the wall is a hyperplane of `V^H`.
    pub normal: Option<Vec<f64>>,
}

impl Wall {
    fn from_lattice(fixed: &SubspaceBasis, sub: &LatticeSubspace) -> Wall {
        let basis: Vec<Vec<f64>> = linalg::gram_schmidt_float(
            &sub.basis.vectors().iter().map(|b| fixed.coords(b)).collect::<Vec<_>>(),
            1e-9,
        );
        let d = fixed.dim();
        let normal = (basis.len() + 1 == d)
            .then(|| linalg::kernel_float(&basis, d, 1e-9).into_iter().next())
            .flatten()
            .map(|v| {
                let n = linalg::norm(&v);
                v.iter().map(|x| x / n).collect()
            });
        Wall { basis, normal }
    }

    pub fn distance(&self, u: &[f64]) -> f64 {
        let mut r = u.to_vec();
        for c in &self.basis {
            let k = linalg::dot(c, u);
            for (ri, ci) in r.iter_mut().zip(c) {
                *ri -= k * ci;
            }
        }
        linalg::norm(&r)
    }
}

struct UnionFind {
    parent: Vec<usize>,
    rank: Vec<u8>,
}

impl UnionFind {
    fn new(n: usize) -> Self {
        UnionFind {
            parent: (0..n).collect(),
            rank: vec![0; n],
        }
    }

    fn find(&mut self, x: usize) -> usize {
        let mut root = x;
        while self.parent[root] != root {
            root = self.parent[root];
        }
        let mut cur = x;
        while self.parent[cur] != root {
            let next = self.parent[cur];
            self.parent[cur] = root;
            cur = next;
        }
        root
    }

    fn union(&mut self, a: usize, b: usize) {
        let (ra, rb) = (self.find(a), self.find(b));
        if ra == rb {
            return;
        }
        match self.rank[ra].cmp(&self.rank[rb]) {
            std::cmp::Ordering::Less => self.parent[ra] = rb,
            std::cmp::Ordering::Greater => self.parent[rb] = ra,
            std::cmp::Ordering::Equal => {
                self.parent[rb] = ra;
                self.rank[ra] += 1;
            }
        }
    }

    /// Dense labels numbered by first appearance.
    fn labels(&mut self) -> (Vec<usize>, usize) {
        let mut ids: HashMap<usize, usize> = HashMap::new();
        let labels = (0..self.parent.len())
            .map(|i| {
                let r = self.find(i);
                let next = ids.len();
                *ids.entry(r).or_insert(next)
            })
            .collect();
        (labels, ids.len())
    }
}

fn iso_tol(tol: f64, x: &[f64]) -> f64 {
    tol * (1.0 + linalg::norm(x))
}

/// Kept cells of `Ω_H` at spacing `delta`; the single origin cell when `V^H = 0`.
pub fn stratum_cells(
    domain: &InvariantDomain,
    h: &Subgroup,
    basis: &SubspaceBasis,
    walls: &[&LatticeSubspace],
    delta: f64,
    tol_iso: f64,
) -> Vec<Cell> {
    let walls: Vec<Wall> = walls.iter().map(|w| Wall::from_lattice(basis, w)).collect();
    classify_cells(domain, h, basis, &walls, delta, tol_iso)
}

fn classify_cells(domain: &InvariantDomain, h: &Subgroup, basis: &SubspaceBasis, walls: &[Wall], delta: f64, tol_iso: f64) -> Vec<Cell> {
    let group = domain.group();
    let d = basis.dim();
    let exact_isotropy = |x: &[f64]| group.isotropy_group(x, iso_tol(tol_iso, x)).is_ok_and(|g| g == *h);
    if d == 0 {
        let origin = vec![0.0; domain.dim()];
        return if domain.contains(&origin) && exact_isotropy(&origin) {
            vec![Cell {
                index: Vec::new(),
                coords: Vec::new(),
                point: origin,
            }]
        } else {
            Vec::new()
        };
    }
    let k = (domain.bounding_radius() / delta).ceil() as i64;
    let side = (2 * k) as usize;
    let total = side.pow(d as u32);
    let half_diag = 0.5 * delta * (d as f64).sqrt();
    (0..total)
        .into_par_iter()
        .filter_map(|flat| {
            let mut rem = flat;
            let mut index = vec![0i64; d];
            for slot in index.iter_mut().rev() {
                *slot = (rem % side) as i64 - k;
                rem /= side;
            }
            let coords: Vec<f64> = index.iter().map(|&i| (i as f64 + 0.5) * delta).collect();
            if walls.iter().any(|w| w.distance(&coords) <= half_diag) {
                return None;
            }
            let point = basis.embed(&coords);
            if !domain.contains(&point) || !exact_isotropy(&point) {
                return None;
            }
            Some(Cell { index, coords, point })
        })
        .collect()
}

#[derive(Clone, Debug)]
pub struct ComponentChart {
    pub type_id: usize,
    pub delta: f64,
    pub subgroup: Subgroup,
    pub basis: SubspaceBasis,
    pub weyl: WeylData,
    pub walls: Vec<Wall>,
    pub cells: Vec<Cell>,
    pub pre_labels: Vec<usize>,
    pub quot_labels: Vec<usize>,
    pub n_pre: usize,
    pub n_quot: usize,
    /// One witness point (ambient) per quotient component.
    pub reps: Vec<Vec<f64>>,
    /// `WH`-images of centers that did not land on a center.
    pub inexact_snaps: usize,
    /// Cells where a non-identity Weyl element fixed the center.
    pub free_action_violations: usize,
    lookup: HashMap<Vec<i64>, usize>,
    domain: Arc<InvariantDomain>,
}

/// Charts `Ω_H` and `Ω_H/WH` for table entry `type_id` at spacing `delta`.
pub fn stratum_chart(
    domain: &Arc<InvariantDomain>,
    table: &OrbitTypeTable,
    type_id: usize,
    delta: f64,
    tol_iso: f64,
) -> Result<ComponentChart> {
    let entry = &table.entries[type_id];
    let h = &entry.representative;
    let basis = entry.basis.clone();
    let walls: Vec<Wall> = table.walls_of(h).into_iter().map(|w| Wall::from_lattice(&basis, w)).collect();
    let cells = classify_cells(domain, h, &basis, &walls, delta, tol_iso);
    let lookup: HashMap<Vec<i64>, usize> = cells.iter().enumerate().map(|(i, c)| (c.index.clone(), i)).collect();
    let d = basis.dim();

    let mut uf = UnionFind::new(cells.len());
    for (i, c) in cells.iter().enumerate() {
        for axis in 0..d {
            let mut n = c.index.clone();
            n[axis] += 1;
            if let Some(&j) = lookup.get(&n) {
                uf.union(i, j);
            }
        }
    }
    let (pre_labels, n_pre) = uf.labels();

    let weyl = entry.weyl.clone();
    let mut inexact_snaps = 0;
    let mut free_action_violations = 0;
    for (i, c) in cells.iter().enumerate() {
        if d > 0 && !weyl.acts_freely_at(&c.coords, 1e-9 * delta) {
            free_action_violations += 1;
        }
        for rep in 1..weyl.order() {
            let img = weyl.act(rep, &c.coords);
            let k: Vec<i64> = img.iter().map(|v| (v / delta - 0.5).round() as i64).collect();
            let snapped: Vec<f64> = k.iter().map(|&i| (i as f64 + 0.5) * delta).collect();
            if linalg::dist(&img, &snapped) > 1e-9 * delta {
                inexact_snaps += 1;
            }
            if let Some(&j) = lookup.get(&k) {
                uf.union(i, j);
            }
        }
    }
    let (quot_labels, n_quot) = uf.labels();

    if d > 0 {
        let mut counts = vec![0usize; n_quot];
        for &l in &quot_labels {
            counts[l] += 1;
        }
        if let Some((component, &cells)) = counts.iter().enumerate().find(|(_, &n)| n < 2) {
            return Err(Error::ResolutionTooCoarse {
                type_id,
                component,
                cells,
                delta,
            });
        }
    }
    let mut reps: Vec<Vec<f64>> = vec![Vec::new(); n_quot];
    for (i, &l) in quot_labels.iter().enumerate().rev() {
        reps[l] = cells[i].point.clone();
    }

    Ok(ComponentChart {
        type_id,
        delta,
        subgroup: h.clone(),
        basis,
        weyl,
        walls,
        cells,
        pre_labels,
        quot_labels,
        n_pre,
        n_quot,
        reps,
        inexact_snaps,
        free_action_violations,
        lookup,
        domain: domain.clone(),
    })
}

impl ComponentChart {
    pub fn fixed_dim(&self) -> usize {
        self.basis.dim()
    }

    pub fn cell_of(&self, u: &[f64]) -> Option<usize> {
        let k: Vec<i64> = u.iter().map(|v| (v / self.delta).floor() as i64).collect();
        self.lookup.get(&k).copied()
    }

    /// Cells belonging to quotient component `alpha`.
    pub fn cells_of(&self, alpha: usize) -> impl Iterator<Item = &Cell> {
        self.cells.iter().zip(&self.quot_labels).filter(move |(_, &l)| l == alpha).map(|(c, _)| c)
    }

    /// Quotient component of a point of `Ω_H`. Points in blocked cells near a
    /// wall are attached to the nearest kept cell reachable by a segment that
    /// stays in Ω and crosses no hyperplane wall.
    pub fn component_of(&self, x: &[f64]) -> Result<usize> {
        let outside = || Error::OutsideChart {
            type_id: self.type_id,
            point: x.to_vec(),
        };
        if self.fixed_dim() == 0 {
            return if self.cells.is_empty() || linalg::norm(x) > 1e-9 { Err(outside()) } else { Ok(0) };
        }
        let u = self.basis.coords(x);
        if let Some(i) = self.cell_of(&u) {
            return Ok(self.quot_labels[i]);
        }
        let mut order: Vec<(f64, usize)> = self
            .cells
            .iter()
            .enumerate()
            .map(|(i, c)| (linalg::dist(&c.coords, &u), i))
            .collect();
        order.sort_by(|a, b| a.0.total_cmp(&b.0));
        for &(dist, i) in order.iter().take(64) {
            let c = &self.cells[i];
            let same_side = self.walls.iter().all(|w| match &w.normal {
                Some(n) => {
                    let (a, b) = (linalg::dot(n, &u), linalg::dot(n, &c.coords));
                    a * b > 0.0
                }
                None => true,
            });
            if !same_side {
                continue;
            }
            let steps = ((dist / (0.25 * self.delta)).ceil() as usize).max(1);
            let inside = (0..=steps).all(|s| {
                let t = s as f64 / steps as f64;
                let p: Vec<f64> = u.iter().zip(&c.coords).map(|(a, b)| a + t * (b - a)).collect();
                self.domain.contains(&self.basis.embed(&p))
            });
            if inside {
                return Ok(self.quot_labels[i]);
            }
        }
        Err(outside())
    }
}
