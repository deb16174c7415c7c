//! Run configuration read from TOML.
//!
//! ```toml
//! [group]
//! dim = 2
//! generators = ["1 0; 0 -1"]
//!
//! [domain]
//! boxes = ["-3 3; -3 3"]     # lo hi per axis, axes separated by ';'
//!
//! [map]
//! expressions = ["x1 - 1", "x2"]
//! ```
//!
//! A map may instead be given as `[[map.atoms]]` tables. `[map2]` holds a
//! second map for `verify`, `[otopy]` an expression family in `t`, and
//! `[[target]]` entries (`H`, `alpha`, `deg`) a degree vector for `realize`.

use std::path::Path;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::analysis::{Analysis, Options};
use crate::degree::{DegreeKey, DegreeVector};
use crate::domain::{saturate, AxisBox, InvariantDomain, Region};
use crate::error::{Error, Result};
use crate::group::{close_generators, FiniteGroup, OrthoMatrix};
use crate::map::{EquivariantLocalMap, MapExpression};
use crate::otopy::{expression_otopy, Otopy};
use crate::realize::{atoms_map, AtomRecord, StandardAtom};
use crate::scalar::{parse_matrix, q_to_f64};

#[derive(Clone, Debug, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    #[serde(default)]
    pub title: Option<String>,
    pub group: GroupSection,
    pub domain: DomainSection,
    #[serde(default)]
    pub map: Option<MapSection>,
    #[serde(default)]
    pub map2: Option<MapSection>,
    #[serde(default)]
    pub otopy: Option<OtopySection>,
    #[serde(default)]
    pub target: Vec<TargetEntry>,
    #[serde(default)]
    pub options: Options,
}

#[derive(Clone, Debug, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GroupSection {
    pub dim: usize,
    /// Row-major matrices, `"a b; c d"`; empty for the trivial group.
    #[serde(default)]
    pub generators: Vec<String>,
}

#[derive(Clone, Debug, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DomainSection {
    pub boxes: Vec<String>,
}

#[derive(Clone, Debug, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MapSection {
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub expressions: Vec<String>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub atoms: Vec<AtomRecord>,
    /// Marks an intentionally empty map.
    #[serde(default, skip_serializing_if = "std::ops::Not::not")]
    pub empty: bool,
}

#[derive(Clone, Debug, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OtopySection {
    pub expressions: Vec<String>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TargetEntry {
    #[serde(rename = "H")]
    pub h: usize,
    pub alpha: usize,
    pub deg: i64,
}

impl RunConfig {
    pub fn from_toml(text: &str) -> Result<Self> {
        toml::from_str(text).map_err(|e| Error::Config(e.to_string()))
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::Config(format!("{}: {e}", path.display())))?;
        Self::from_toml(&text)
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("config serializes")
    }

    pub fn build_group(&self) -> Result<Arc<FiniteGroup>> {
        let n = self.group.dim;
        if n == 0 {
            return Err(Error::Config("group.dim must be positive".into()));
        }
        let gens = self
            .group
            .generators
            .iter()
            .map(|s| {
                let rows = parse_matrix(s).ok_or_else(|| Error::Parse(format!("bad matrix {s:?}")))?;
                if rows.len() != n || rows.iter().any(|r| r.len() != n) {
                    return Err(Error::DimensionMismatch {
                        expected: n,
                        found: rows.len(),
                    });
                }
                OrthoMatrix::from_rational(n, rows.concat(), self.options.tol_group)
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(Arc::new(close_generators(n, &gens, self.options.max_group_order, self.options.tol_group)?))
    }

    pub fn build_domain(&self, group: Arc<FiniteGroup>) -> Result<InvariantDomain> {
        let n = group.dim();
        let boxes = self
            .domain
            .boxes
            .iter()
            .map(|s| {
                let rows = parse_matrix(s).ok_or_else(|| Error::Parse(format!("bad box {s:?}")))?;
                if rows.len() != n || rows.iter().any(|r| r.len() != 2) {
                    return Err(Error::Config(format!("box {s:?} needs {n} rows of 'lo hi'")));
                }
                let lo = rows.iter().map(|r| q_to_f64(&r[0])).collect();
                let hi = rows.iter().map(|r| q_to_f64(&r[1])).collect();
                AxisBox::new(lo, hi)
            })
            .collect::<Result<Vec<_>>>()?;
        saturate(boxes, group)
    }

    /// Group, domain and charts.
    pub fn analysis(&self) -> Result<Analysis> {
        let group = self.build_group()?;
        let domain = self.build_domain(group)?;
        Analysis::new(Arc::new(domain), self.options.clone())
    }

    pub fn build_map(&self, analysis: &Analysis) -> Result<Option<EquivariantLocalMap>> {
        self.map.as_ref().map(|m| m.build(analysis)).transpose()
    }

    pub fn build_map2(&self, analysis: &Analysis) -> Result<Option<EquivariantLocalMap>> {
        self.map2.as_ref().map(|m| m.build(analysis)).transpose()
    }

    pub fn build_otopy(&self, analysis: &Analysis) -> Result<Option<Otopy>> {
        self.otopy
            .as_ref()
            .map(|o| {
                let srcs: Vec<&str> = o.expressions.iter().map(String::as_str).collect();
                expression_otopy(analysis.group().clone(), &srcs, Region::Domain(analysis.domain.clone()), analysis)
            })
            .transpose()
    }

    pub fn target_vector(&self) -> DegreeVector {
        let mut v = DegreeVector::new();
        for t in &self.target {
            let key = DegreeKey::new(t.h, t.alpha);
            v.set(key, v.get(&key) + t.deg);
        }
        v
    }
}

impl MapSection {
    pub fn from_atoms(atoms: &[StandardAtom]) -> Self {
        MapSection {
            expressions: Vec::new(),
            atoms: atoms.iter().map(StandardAtom::to_record).collect(),
            empty: atoms.is_empty(),
        }
    }

    pub fn build(&self, analysis: &Analysis) -> Result<EquivariantLocalMap> {
        let group = analysis.group().clone();
        match (self.expressions.is_empty(), self.atoms.is_empty()) {
            (false, false) => Err(Error::Config("a map takes either expressions or atoms, not both".into())),
            (false, true) => {
                let srcs: Vec<&str> = self.expressions.iter().map(String::as_str).collect();
                EquivariantLocalMap::polynomial(group, MapExpression::parse(&srcs)?, Region::Domain(analysis.domain.clone()))
            }
            (true, false) => {
                let atoms = self
                    .atoms
                    .iter()
                    .map(|r| StandardAtom::from_record(r, analysis))
                    .collect::<Result<Vec<_>>>()?;
                let map = atoms_map(group, atoms);
                if let Region::OrbitBalls { group, balls } = map.domain() {
                    for (i, a) in balls.iter().enumerate() {
                        for b in &balls[i + 1..] {
                            let one = Region::OrbitBalls { group: group.clone(), balls: vec![a.clone()] };
                            let two = Region::OrbitBalls { group: group.clone(), balls: vec![b.clone()] };
                            one.check_disjoint(&two).map_err(|detail| Error::Overlap { detail })?;
                        }
                    }
                }
                Ok(map)
            }
            (true, true) if self.empty => Ok(EquivariantLocalMap::empty(group)),
            (true, true) => Err(Error::Config("map section has neither expressions nor atoms (set empty = true for the empty map)".into())),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const S3: &str = r#"
[group]
dim = 2
generators = ["1 0; 0 -1"]

[domain]
boxes = ["-3 3; -3 3"]

[map]
expressions = ["x1 - 1", "x2"]

[[target]]
H = 1
alpha = 0
deg = -2
"#;

    #[test]
    fn parses_scenario() {
        let c = RunConfig::from_toml(S3).unwrap();
        let a = c.analysis().unwrap();
        assert_eq!(a.group().order(), 2);
        assert!(c.build_map(&a).unwrap().is_some());
        assert_eq!(c.target_vector().support(), vec![(DegreeKey::new(1, 0), -2)]);
        let back = RunConfig::from_toml(&c.to_toml()).unwrap();
        assert_eq!(back.target, c.target);
    }

    #[test]
    fn rejects_bad_configs() {
        assert!(RunConfig::from_toml("[group]\ndim = 1\n").is_err());
        let bad_gen = S3.replace("1 0; 0 -1", "1 1; 0 1");
        assert!(matches!(RunConfig::from_toml(&bad_gen).unwrap().analysis(), Err(Error::NotOrthogonal { .. })));
        let bad_box = S3.replace("-3 3; -3 3", "-3 3");
        assert!(RunConfig::from_toml(&bad_box).unwrap().analysis().is_err());
        let unknown = format!("{S3}\n[options]\nfoo = 1\n");
        assert!(RunConfig::from_toml(&unknown).is_err());
    }
}
