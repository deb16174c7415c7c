//! Everything derived from `(G, Ω)` alone: the orbit-type table, one chart per
//! stratum and the hypothesis status. Degree computation and realization
//! share one [`Analysis`] so their keys agree.

use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::chart::{stratum_chart, ComponentChart};
use crate::degree::DegreeKey;
use crate::domain::{hypothesis_check, HypothesisStatus, InvariantDomain};
use crate::error::{Error, Result};
use crate::group::{FiniteGroup, MAX_GROUP_ORDER, TOL_GROUP};
use crate::map::{check_equivariance, check_locality, default_margin, EquivarianceReport, EquivariantLocalMap, LocalityReport};
use crate::orbit_types::{isotropy_types, OrbitTypeTable};

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Options {
    pub tol_group: f64,
    pub tol_equiv: f64,
    /// Isotropy tolerance, scaled by `1 + ‖x‖`.
    pub tol_iso: f64,
    /// Chart cell size; default a sixteenth of the smallest box edge.
    pub delta: Option<f64>,
    /// Locality shell margin; default from the map domain.
    pub margin: Option<f64>,
    pub eta_reg: f64,
    pub eta_loc: f64,
    pub seed: u64,
    pub max_group_order: usize,
    pub t_samples: usize,
    /// Halvings of the cell size tried before giving up on a chart.
    pub refinements: usize,
    pub equivariance_samples: usize,
}

impl Default for Options {
    fn default() -> Self {
        Options {
            tol_group: TOL_GROUP,
            tol_equiv: crate::map::TOL_EQUIV,
            tol_iso: 1e-9,
            delta: None,
            margin: None,
            eta_reg: 1e-8,
            eta_loc: crate::map::ETA_LOC,
            seed: 0,
            max_group_order: MAX_GROUP_ORDER,
            t_samples: 11,
            refinements: 4,
            equivariance_samples: 64,
        }
    }
}

impl Options {
    pub fn validate(&self) -> Result<()> {
        let positive = [
            ("tol_group", self.tol_group),
            ("tol_equiv", self.tol_equiv),
            ("tol_iso", self.tol_iso),
            ("eta_reg", self.eta_reg),
            ("eta_loc", self.eta_loc),
            ("delta", self.delta.unwrap_or(1.0)),
            ("margin", self.margin.unwrap_or(1.0)),
        ];
        if let Some((name, v)) = positive.iter().find(|(_, v)| !(*v > 0.0 && v.is_finite())) {
            return Err(Error::Config(format!("option {name} must be positive, got {v}")));
        }
        if self.t_samples < 2 {
            return Err(Error::Config("t_samples must be at least 2".into()));
        }
        Ok(())
    }
}

#[derive(Clone, Debug)]
pub struct Analysis {
    pub domain: Arc<InvariantDomain>,
    pub table: OrbitTypeTable,
    pub charts: Vec<ComponentChart>,
    pub hypothesis: HypothesisStatus,
    pub options: Options,
    pub delta: f64,
    pub warnings: Vec<String>,
}

#[derive(Clone, Debug, Serialize)]
pub struct MapValidation {
    pub equivariance: EquivarianceReport,
    pub locality: LocalityReport,
}

impl MapValidation {
    pub fn pass(&self) -> bool {
        self.equivariance.pass && self.locality.pass
    }
}

/// Charts a stratum, halving the cell size while a component is too thin.
fn chart_with_refinement(
    domain: &Arc<InvariantDomain>,
    table: &OrbitTypeTable,
    type_id: usize,
    delta: f64,
    options: &Options,
) -> Result<ComponentChart> {
    let mut step = delta;
    let mut last = None;
    for _ in 0..=options.refinements {
        match stratum_chart(domain, table, type_id, step, options.tol_iso) {
            Err(e @ Error::ResolutionTooCoarse { .. }) => {
                last = Some(e);
                step *= 0.5;
            }
            other => return other,
        }
    }
    Err(last.expect("at least one attempt"))
}

impl Analysis {
    pub fn new(domain: Arc<InvariantDomain>, options: Options) -> Result<Self> {
        options.validate()?;
        let delta = options.delta.unwrap_or(domain.min_edge() / 16.0);
        let table = isotropy_types(&domain, delta, options.tol_iso, options.refinements)?;
        let charts = (0..table.entries.len())
            .map(|i| chart_with_refinement(&domain, &table, i, delta, &options))
            .collect::<Result<Vec<_>>>()?;
        let hypothesis = hypothesis_check(&domain);
        let mut warnings = Vec::new();
        if !hypothesis.holds {
            warnings.push(format!(
                "hypothesis violated: 0 lies in the domain and dim V^G = {}; degrees are computed but classification completeness is not guaranteed",
                hypothesis.fixed_dim
            ));
        }
        for c in &charts {
            if c.delta < delta {
                warnings.push(format!("H{}: chart refined to delta {}", c.type_id, c.delta));
            }
            if c.inexact_snaps > 0 {
                warnings.push(format!(
                    "H{}: {} Weyl images of cell centers snapped to a neighbouring cell",
                    c.type_id, c.inexact_snaps
                ));
            }
            if c.free_action_violations > 0 {
                warnings.push(format!(
                    "H{}: Weyl group fixes {} cell center(s); quotient is approximate",
                    c.type_id, c.free_action_violations
                ));
            }
        }
        Ok(Analysis {
            domain,
            table,
            charts,
            hypothesis,
            options,
            delta,
            warnings,
        })
    }

    pub fn group(&self) -> &Arc<FiniteGroup> {
        self.domain.group()
    }

    pub fn chart(&self, type_id: usize) -> &ComponentChart {
        &self.charts[type_id]
    }

    /// All `(H, α)` keys in table order.
    pub fn keys(&self) -> Vec<DegreeKey> {
        self.charts
            .iter()
            .flat_map(|c| (0..c.n_quot).map(move |a| DegreeKey::new(c.type_id, a)))
            .collect()
    }

    pub fn has_key(&self, key: &DegreeKey) -> bool {
        key.type_id < self.charts.len() && key.component < self.charts[key.type_id].n_quot
    }

    /// Quotient component counts per type at the working cell size and at half of it.
    pub fn refinement_counts(&self) -> Result<Vec<(usize, usize)>> {
        self.charts
            .iter()
            .map(|c| {
                let half = stratum_chart(&self.domain, &self.table, c.type_id, c.delta / 2.0, self.options.tol_iso)?;
                Ok((c.n_quot, half.n_quot))
            })
            .collect()
    }

    pub fn margin_for(&self, f: &EquivariantLocalMap) -> f64 {
        self.options.margin.unwrap_or_else(|| default_margin(&f.domain()))
    }

    /// Equivariance on random samples and locality on the boundary shell.
    pub fn validate(&self, f: &EquivariantLocalMap) -> MapValidation {
        let o = &self.options;
        MapValidation {
            equivariance: check_equivariance(f, o.equivariance_samples, o.seed, o.tol_equiv),
            locality: check_locality(f, self.margin_for(f), o.eta_loc),
        }
    }
}
