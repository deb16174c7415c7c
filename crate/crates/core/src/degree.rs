//! Zero finding on each stratum, signed counts per quotient component and
//! the assembled degree vector.
//!
//! On a stratum `Ω_H` the map restricts to `f_H: Ω_H → V^H`, and `WH` acts
//! freely on its zeros. Each component `α` of `Ω_H/WH` receives
//! `(1/|WH|)·Σ sgn det Df_H(x)` over the regular zeros `x` lying over `α`.

use std::collections::BTreeMap;
use std::fmt;

use rayon::prelude::*;
use serde::Serialize;

use crate::analysis::Analysis;
use crate::error::{Error, Result};
use crate::linalg;
use crate::map::{restrict, EquivariantLocalMap, RestrictedMap};

const NEWTON_ITERATIONS: usize = 50;
const R_DEDUP: f64 = 1e-6;
const POLISH_STEPS: usize = 8;
const LINEAR_PROBE: f64 = 1e-5;

/// One entry index of the degree vector: orbit type and quotient component.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
pub struct DegreeKey {
    pub type_id: usize,
    pub component: usize,
}

impl DegreeKey {
    pub fn new(type_id: usize, component: usize) -> Self {
        DegreeKey { type_id, component }
    }
}

impl fmt::Display for DegreeKey {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "H={} alpha={}", self.type_id, self.component)
    }
}

/// Finitely supported integer vector over `(H, α)` keys. Missing keys read
/// as zero; equality ignores explicit zeros.
#[derive(Clone, Debug, Default)]
pub struct DegreeVector {
    entries: BTreeMap<DegreeKey, i64>,
}

impl DegreeVector {
    pub fn new() -> Self {
        Self::default()
    }

    /// All `keys` present, set to zero.
    pub fn zeros(keys: &[DegreeKey]) -> Self {
        DegreeVector {
            entries: keys.iter().map(|&k| (k, 0)).collect(),
        }
    }

    pub fn get(&self, key: &DegreeKey) -> i64 {
        self.entries.get(key).copied().unwrap_or(0)
    }

    pub fn set(&mut self, key: DegreeKey, value: i64) {
        self.entries.insert(key, value);
    }

    pub fn entries(&self) -> impl Iterator<Item = (&DegreeKey, &i64)> {
        self.entries.iter()
    }

    pub fn support(&self) -> Vec<(DegreeKey, i64)> {
        self.entries.iter().filter(|(_, &v)| v != 0).map(|(&k, &v)| (k, v)).collect()
    }

    pub fn is_zero(&self) -> bool {
        self.entries.values().all(|&v| v == 0)
    }

    /// Machine block: `#vector` then one `H=<id> alpha=<id> deg=<int>` line per key.
    pub fn to_machine_block(&self) -> String {
        let mut out = String::from("#vector\n");
        for (k, v) in &self.entries {
            out.push_str(&format!("{k} deg={v}\n"));
        }
        out
    }

    /// Reads the first machine block found in `text`.
    pub fn parse_machine_block(text: &str) -> Result<Self> {
        let mut lines = text.lines().skip_while(|l| l.trim() != "#vector");
        if lines.next().is_none() {
            return Err(Error::Parse("no #vector block".into()));
        }
        let mut v = DegreeVector::new();
        for line in lines {
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') {
                break;
            }
            let mut fields = [None; 3];
            for part in line.split_whitespace() {
                let (name, value) = part
                    .split_once('=')
                    .ok_or_else(|| Error::Parse(format!("bad field {part:?} in {line:?}")))?;
                let slot = match name {
                    "H" => 0,
                    "alpha" => 1,
                    "deg" => 2,
                    _ => return Err(Error::Parse(format!("unknown field {name:?} in {line:?}"))),
                };
                fields[slot] = Some(value.parse::<i64>().map_err(|e| Error::Parse(format!("{line:?}: {e}")))?);
            }
            match fields {
                [Some(h), Some(a), Some(d)] if h >= 0 && a >= 0 => v.set(DegreeKey::new(h as usize, a as usize), d),
                _ => return Err(Error::Parse(format!("incomplete vector line {line:?}"))),
            }
        }
        Ok(v)
    }
}

impl PartialEq for DegreeVector {
    fn eq(&self, other: &Self) -> bool {
        self.support() == other.support()
    }
}

impl Eq for DegreeVector {}

impl std::ops::Add for &DegreeVector {
    type Output = DegreeVector;
    fn add(self, rhs: &DegreeVector) -> DegreeVector {
        let mut out = self.clone();
        for (&k, &v) in &rhs.entries {
            *out.entries.entry(k).or_insert(0) += v;
        }
        out
    }
}

impl Serialize for DegreeVector {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        #[derive(Serialize)]
        struct Entry {
            #[serde(rename = "H")]
            h: usize,
            alpha: usize,
            deg: i64,
        }
        s.collect_seq(self.entries.iter().map(|(k, &deg)| Entry {
            h: k.type_id,
            alpha: k.component,
            deg,
        }))
    }
}

impl fmt::Display for DegreeVector {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self.entries.iter().map(|(k, v)| format!("(H{}, α{}): {v:+}", k.type_id, k.component)).collect();
        write!(f, "{{{}}}", parts.join(", "))
    }
}

/// A regular zero on its stratum.
#[derive(Clone, Debug, Serialize)]
pub struct Zero {
    pub point: Vec<f64>,
    pub type_id: usize,
    pub component: usize,
    /// Stratum Jacobian in `V^H` coordinates, row-major.
    pub jacobian: Vec<f64>,
    pub det: f64,
    pub sign: i32,
    pub orbit: usize,
}

#[derive(Clone, Debug, Serialize)]
pub struct StratumZeros {
    pub type_id: usize,
    pub zeros: Vec<Zero>,
    pub notes: Vec<String>,
}

#[derive(Clone, Debug, Serialize)]
pub struct StratumReport {
    pub type_id: usize,
    pub weyl_order: usize,
    pub fixed_dim: usize,
    pub zeros: Vec<Zero>,
    pub orbits: usize,
    pub raw_sums: Vec<i64>,
    pub degrees: Vec<i64>,
    pub notes: Vec<String>,
}

#[derive(Clone, Debug, Serialize)]
pub struct DegreeReport {
    pub vector: DegreeVector,
    pub strata: Vec<StratumReport>,
}

impl DegreeReport {
    pub fn zero_count(&self) -> usize {
        self.strata.iter().map(|s| s.zeros.len()).sum()
    }
}

/// `sgn det A` for an `n × n` matrix with `|det A| ≥ eta`.
pub fn degree_of_linear(a: &[f64], n: usize, eta: f64) -> Result<i32> {
    let det = linalg::det(a, n);
    if !(det.abs() >= eta) {
        return Err(Error::Singular { det });
    }
    Ok(if det > 0.0 { 1 } else { -1 })
}

/// Newton from `u0`; `None` on divergence or when an iterate leaves the map
/// domain. Converged points are polished for a few more steps; the flag is
/// false when the steps stop shrinking quadratically, as at a singular zero.
fn newton(r: &RestrictedMap<'_>, u0: &[f64]) -> Option<(Vec<f64>, bool)> {
    let d = r.dim();
    let mut u = u0.to_vec();
    for _ in 0..=NEWTON_ITERATIONS {
        let v = r.eval(&u)?;
        let j = r.jacobian(&u)?;
        let scale = 1.0_f64.max(linalg::max_abs(&j) * (1.0 + linalg::norm(&u)));
        if linalg::norm(&v) <= 1e-12 * scale {
            return Some(polish(r, u));
        }
        let step = linalg::solve(&j, d, &v)?;
        u.iter_mut().zip(&step).for_each(|(a, s)| *a -= s);
    }
    None
}

fn polish(r: &RestrictedMap<'_>, mut u: Vec<f64>) -> (Vec<f64>, bool) {
    for _ in 0..POLISH_STEPS {
        let (Some(v), Some(j)) = (r.eval(&u), r.jacobian(&u)) else {
            return (u, false);
        };
        let Some(step) = linalg::solve(&j, r.dim(), &v) else {
            return (u, false);
        };
        let small = linalg::norm(&step) <= 1e-13 * (1.0 + linalg::norm(&u));
        let next: Vec<f64> = u.iter().zip(&step).map(|(a, s)| a - s).collect();
        if small {
            return (if r.contains(&next) { next } else { u }, true);
        }
        if !r.contains(&next) {
            return (u, false);
        }
        u = next;
    }
    (u, false)
}

/// At a regular zero the Jacobian predicts `f_H` on a small cross around
/// the zero; near a singular zero Newton can still converge (slowly) but the
/// second-order term dominates there.
fn linear_model_holds(r: &RestrictedMap<'_>, u: &[f64], j: &[f64]) -> bool {
    let d = r.dim();
    let s = LINEAR_PROBE * (1.0 + linalg::norm(u));
    for axis in 0..d {
        for sign in [-1.0, 1.0] {
            let mut p = u.to_vec();
            p[axis] += sign * s;
            let Some(v) = r.eval(&p) else { continue };
            let pred: Vec<f64> = (0..d).map(|i| sign * s * j[i * d + axis]).collect();
            if linalg::dist(&v, &pred) > 0.5 * linalg::norm(&pred) {
                return false;
            }
        }
    }
    true
}

fn lex_cmp(a: &[f64], b: &[f64]) -> std::cmp::Ordering {
    a.iter()
        .zip(b)
        .map(|(x, y)| x.total_cmp(y))
        .find(|o| o.is_ne())
        .unwrap_or(std::cmp::Ordering::Equal)
}

fn near(found: &[Vec<f64>], u: &[f64]) -> bool {
    found.iter().any(|v| linalg::dist(v, u) <= R_DEDUP * (1.0 + linalg::norm(u)))
}

fn merge(found: &mut Vec<Vec<f64>>, mut new: Vec<Vec<f64>>) {
    new.sort_by(|a, b| lex_cmp(a, b));
    for u in new {
        if !near(found, &u) {
            found.push(u);
        }
    }
}

/// Regular zeros of `f` on the stratum of table entry `type_id`. Newton is
/// seeded from every chart cell center in the map domain, from the domain's
/// seed hints, and from `WH`-images of zeros already found.
pub fn find_stratum_zeros(f: &EquivariantLocalMap, analysis: &Analysis, type_id: usize) -> Result<StratumZeros> {
    let chart = analysis.chart(type_id);
    let group = analysis.group();
    let opts = &analysis.options;
    let region = f.domain();
    let mut notes = Vec::new();
    let basis = &chart.basis;
    let d = basis.dim();

    if d == 0 {
        let origin = vec![0.0; f.dim()];
        let zeros = if !chart.cells.is_empty() && region.contains(&origin) {
            vec![Zero {
                point: origin,
                type_id,
                component: 0,
                jacobian: Vec::new(),
                det: 1.0,
                sign: 1,
                orbit: 0,
            }]
        } else {
            Vec::new()
        };
        return Ok(StratumZeros { type_id, zeros, notes });
    }

    let seeds: Vec<Vec<f64>> = chart
        .cells
        .iter()
        .filter(|c| region.contains(&c.point))
        .map(|c| c.coords.clone())
        .chain(f.seed_hints().iter().map(|x| basis.coords(x)))
        .collect();
    let probes: Vec<Vec<f64>> = seeds.iter().step_by((seeds.len() / 32).max(1)).cloned().collect();
    let r = restrict(f, type_id, basis, &probes, opts.tol_equiv)?;

    let mut found: Vec<Vec<f64>> = Vec::new();
    let mut stalled: Vec<Vec<f64>> = Vec::new();
    let mut run = |batch: Vec<(Vec<f64>, bool)>, found: &mut Vec<Vec<f64>>| {
        let (good, bad): (Vec<_>, Vec<_>) = batch.into_iter().partition(|(_, ok)| *ok);
        stalled.extend(bad.into_iter().map(|(u, _)| u));
        merge(found, good.into_iter().map(|(u, _)| u).collect());
    };
    run(seeds.par_iter().filter_map(|u| newton(&r, u)).collect(), &mut found);
    // Close under WH so that no orbit member is missed.
    let mut frontier = 0;
    while frontier < found.len() {
        let batch: Vec<(Vec<f64>, bool)> = found[frontier..]
            .iter()
            .flat_map(|u| (1..chart.weyl.order()).map(|w| chart.weyl.act(w, u)))
            .filter(|img| !near(&found, img))
            .filter_map(|img| newton(&r, &img))
            .collect();
        frontier = found.len();
        run(batch, &mut found);
    }
    found.sort_by(|a, b| lex_cmp(a, b));
    // A stalled run that no regular zero explains sits at a singular zero.
    stalled.sort_by(|a, b| lex_cmp(a, b));
    if let Some(u) = stalled.iter().find(|u| !near(&found, u)) {
        let x = basis.embed(u);
        let iso_ok = group
            .isotropy_group(&x, opts.tol_iso * (1.0 + linalg::norm(&x)))
            .is_ok_and(|h| h == chart.subgroup);
        if iso_ok {
            let det = r.jacobian(u).map_or(0.0, |j| linalg::det(&j, d));
            return Err(Error::DegenerateZero { point: x, det });
        }
    }

    let mut kept: Vec<(Vec<f64>, Vec<f64>)> = Vec::new();
    for u in found {
        let x = basis.embed(&u);
        if !analysis.domain.contains(&x) {
            notes.push(format!("zero at {x:?} lies outside the domain; ignored"));
            continue;
        }
        let tol = opts.tol_iso * (1.0 + linalg::norm(&x));
        let iso = group.isotropy_group(&x, tol)?;
        if iso != chart.subgroup {
            notes.push(format!(
                "zero at {x:?} has isotropy of order {} (larger than H{type_id}); counted on its own stratum",
                iso.order()
            ));
            continue;
        }
        kept.push((u, x));
    }

    let mut zeros = Vec::with_capacity(kept.len());
    for (u, x) in &kept {
        let j = r.jacobian(u).ok_or_else(|| Error::OutsideDomain { point: x.clone() })?;
        let det = linalg::det(&j, d);
        if !(det.abs() >= opts.eta_reg) || !linear_model_holds(&r, u, &j) {
            return Err(Error::DegenerateZero { point: x.clone(), det });
        }
        zeros.push(Zero {
            point: x.clone(),
            type_id,
            component: chart.component_of(x)?,
            jacobian: j,
            det,
            sign: if det > 0.0 { 1 } else { -1 },
            orbit: 0,
        });
    }

    // Orbit ids: first appearance order of each WH-orbit.
    let coords: Vec<&Vec<f64>> = kept.iter().map(|(u, _)| u).collect();
    let mut orbit = vec![usize::MAX; zeros.len()];
    let mut next = 0;
    for i in 0..zeros.len() {
        if orbit[i] != usize::MAX {
            continue;
        }
        orbit[i] = next;
        for w in 1..chart.weyl.order() {
            let img = chart.weyl.act(w, coords[i]);
            if let Some(j) = (0..zeros.len()).find(|&j| linalg::dist(coords[j], &img) <= R_DEDUP * (1.0 + linalg::norm(&img))) {
                orbit[j] = next;
            }
        }
        next += 1;
    }
    for (z, o) in zeros.iter_mut().zip(orbit) {
        z.orbit = o;
    }
    Ok(StratumZeros { type_id, zeros, notes })
}

/// Signed zero counts per quotient component, divided by `|WH|`.
pub fn stratum_degree(zeros: &StratumZeros, analysis: &Analysis) -> Result<StratumReport> {
    let chart = analysis.chart(zeros.type_id);
    let weyl_order = chart.weyl.order();
    let mut raw_sums = vec![0i64; chart.n_quot];
    for z in &zeros.zeros {
        raw_sums[z.component] += z.sign as i64;
    }
    let mut degrees = Vec::with_capacity(raw_sums.len());
    for (component, &sum) in raw_sums.iter().enumerate() {
        if sum % weyl_order as i64 != 0 {
            return Err(Error::DivisibilityViolation {
                type_id: zeros.type_id,
                component,
                sum,
                weyl_order,
            });
        }
        degrees.push(sum / weyl_order as i64);
    }
    Ok(StratumReport {
        type_id: zeros.type_id,
        weyl_order,
        fixed_dim: chart.fixed_dim(),
        orbits: zeros.zeros.iter().map(|z| z.orbit + 1).max().unwrap_or(0),
        zeros: zeros.zeros.clone(),
        raw_sums,
        degrees,
        notes: zeros.notes.clone(),
    })
}

/// The full degree vector, one entry per `(H, α)` key of the analysis.
pub fn equivariant_degree(f: &EquivariantLocalMap, analysis: &Analysis) -> Result<DegreeReport> {
    if f.dim() != analysis.domain.dim() {
        return Err(Error::DimensionMismatch {
            expected: analysis.domain.dim(),
            found: f.dim(),
        });
    }
    let strata = (0..analysis.charts.len())
        .into_par_iter()
        .map(|t| stratum_degree(&find_stratum_zeros(f, analysis, t)?, analysis))
        .collect::<Result<Vec<_>>>()?;
    let mut vector = DegreeVector::zeros(&analysis.keys());
    for s in &strata {
        for (a, &deg) in s.degrees.iter().enumerate() {
            vector.set(DegreeKey::new(s.type_id, a), deg);
        }
    }
    Ok(DegreeReport { vector, strata })
}
