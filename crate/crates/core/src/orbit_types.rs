//! The isotropy-type table `Iso(Ω)`.
//!
//! Every isotropy group is the pointwise stabilizer of its own fixed
//! subspace, so the candidates are exactly the stabilizers of the lattice
//! generated by the element fixed spaces `V^⟨g⟩` under intersection. A
//! candidate `H` is kept when the chart grid finds a point of `V^H ∩ Ω` clear of
//! every smaller lattice subspace; conjugate candidates are merged.

use serde::Serialize;

use crate::chart::stratum_cells;
use crate::domain::InvariantDomain;
use crate::error::{Error, Result};
use crate::group::{FiniteGroup, Subgroup, SubspaceBasis, WeylData};

/// A subspace of the fixed-space lattice with its pointwise stabilizer.
#[derive(Clone, Debug)]
pub struct LatticeSubspace {
    pub stabilizer: Subgroup,
    pub basis: SubspaceBasis,
}

#[derive(Clone, Debug)]
pub struct OrbitType {
    pub id: usize,
    /// Lexicographically least member set among the conjugates.
    pub representative: Subgroup,
    pub basis: SubspaceBasis,
    pub weyl: WeylData,
    pub conjugates: Vec<Subgroup>,
}

impl OrbitType {
    pub fn fixed_dim(&self) -> usize {
        self.basis.dim()
    }
}

#[derive(Clone, Debug)]
pub struct OrbitTypeTable {
    pub entries: Vec<OrbitType>,
    /// `(i, j)` means `(H_i) ≤ (H_j)`.
    pub order_relation: Vec<(usize, usize)>,
    pub lattice: Vec<LatticeSubspace>,
}

#[derive(Clone, Debug, Serialize)]
pub struct OrbitTypeSummary {
    pub id: usize,
    pub members: Vec<usize>,
    pub order: usize,
    pub fixed_dim: usize,
    pub normalizer_order: usize,
    pub weyl_order: usize,
    pub conjugates: usize,
}

impl OrbitTypeTable {
    pub fn leq(&self, i: usize, j: usize) -> bool {
        self.order_relation.contains(&(i, j))
    }

    pub fn summaries(&self) -> Vec<OrbitTypeSummary> {
        self.entries
            .iter()
            .map(|e| OrbitTypeSummary {
                id: e.id,
                members: e.representative.members().to_vec(),
                order: e.representative.order(),
                fixed_dim: e.fixed_dim(),
                normalizer_order: e.weyl.normalizer.order(),
                weyl_order: e.weyl.order(),
                conjugates: e.conjugates.len(),
            })
            .collect()
    }

    /// Lattice subspaces strictly inside `V^H`.
    pub fn walls_of(&self, h: &Subgroup) -> Vec<&LatticeSubspace> {
        self.lattice
            .iter()
            .filter(|l| l.stabilizer != *h && h.is_subset_of(&l.stabilizer))
            .collect()
    }

    /// Table entry whose class contains `h`.
    pub fn type_of(&self, h: &Subgroup) -> Option<usize> {
        self.entries.iter().position(|e| e.conjugates.binary_search(h).is_ok())
    }
}

/// Closure of the element fixed spaces under intersection, each stored with
/// its pointwise stabilizer; sorted by stabilizer order then members.
pub fn fixed_subspace_lattice(group: &FiniteGroup) -> Vec<LatticeSubspace> {
    let mut lattice: Vec<LatticeSubspace> = Vec::new();
    let push = |lattice: &mut Vec<LatticeSubspace>, basis: SubspaceBasis| -> bool {
        let stabilizer = group.pointwise_stabilizer(&basis);
        if lattice.iter().any(|l| l.stabilizer == stabilizer) {
            return false;
        }
        // Re-derive the basis from the stabilizer so it is canonical.
        let basis = group.fixed_subspace(&stabilizer);
        lattice.push(LatticeSubspace { stabilizer, basis });
        true
    };
    for g in 0..group.order() {
        push(&mut lattice, group.element_fixed(g).clone());
    }
    let mut changed = true;
    while changed {
        changed = false;
        let n = lattice.len();
        for i in 0..n {
            for j in i + 1..n {
                let mut members = lattice[i].stabilizer.members().to_vec();
                members.extend_from_slice(lattice[j].stabilizer.members());
                let joined = group.generated(&members);
                if lattice.iter().any(|l| l.stabilizer == joined) {
                    continue;
                }
                let basis = group.fixed_subspace(&joined);
                changed |= push(&mut lattice, basis);
            }
        }
    }
    lattice.sort_by(|a, b| {
        (a.stabilizer.order(), a.stabilizer.members()).cmp(&(b.stabilizer.order(), b.stabilizer.members()))
    });
    lattice
}

/// `Iso(Ω)` with Weyl data and the partial order. `delta` is the witness grid
/// spacing; up to `refinements` halvings are tried before a candidate is
/// declared absent from Ω.
pub fn isotropy_types(domain: &InvariantDomain, delta: f64, tol_iso: f64, refinements: usize) -> Result<OrbitTypeTable> {
    if domain.boxes().is_empty() {
        return Err(Error::EmptyDomain);
    }
    let group = domain.group().clone();
    let lattice = fixed_subspace_lattice(&group);

    let mut reps: Vec<Subgroup> = Vec::new();
    for l in &lattice {
        let conj = group.conjugates(&l.stabilizer);
        let canonical = conj[0].clone();
        if !reps.contains(&canonical) {
            reps.push(canonical);
        }
    }

    let mut entries: Vec<OrbitType> = Vec::new();
    for h in reps {
        let basis = group.fixed_subspace(&h);
        let walls: Vec<&LatticeSubspace> = lattice
            .iter()
            .filter(|l| l.stabilizer != h && h.is_subset_of(&l.stabilizer))
            .collect();
        let mut step = delta;
        let mut found = false;
        for _ in 0..=refinements {
            if !stratum_cells(domain, &h, &basis, &walls, step, tol_iso).is_empty() {
                found = true;
                break;
            }
            step *= 0.5;
        }
        if !found {
            continue;
        }
        let weyl = group.weyl_group(&h, &basis);
        entries.push(OrbitType {
            id: 0,
            conjugates: group.conjugates(&h),
            representative: h,
            basis,
            weyl,
        });
    }
    if entries.is_empty() {
        return Err(Error::EmptyDomain);
    }
    entries.sort_by(|a, b| {
        (a.representative.order(), a.representative.members()).cmp(&(b.representative.order(), b.representative.members()))
    });
    for (i, e) in entries.iter_mut().enumerate() {
        e.id = i;
    }
    let mut order_relation = Vec::new();
    for i in 0..entries.len() {
        for j in 0..entries.len() {
            if entries[i].conjugates.iter().any(|c| c.is_subset_of(&entries[j].representative)) {
                order_relation.push((i, j));
            }
        }
    }
    Ok(OrbitTypeTable {
        entries,
        order_relation,
        lattice,
    })
}
