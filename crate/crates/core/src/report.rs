//! Human-readable and JSON reports for the command line.

use std::fmt::Write as _;

use serde::Serialize;

use crate::analysis::{Analysis, MapValidation};
use crate::degree::{DegreeReport, DegreeVector};
use crate::domain::HypothesisStatus;
use crate::error::Result;
use crate::orbit_types::OrbitTypeSummary;
use crate::otopy::{AdditivityReport, OtopyReport, SliceStatus};
use crate::realize::AtomRecord;

#[derive(Clone, Debug, Serialize)]
pub struct ComponentCount {
    #[serde(rename = "H")]
    pub h: usize,
    pub components: usize,
    pub components_half_delta: usize,
    pub delta: f64,
}

#[derive(Clone, Debug, Serialize)]
pub struct AnalyzeReport {
    pub dim: usize,
    pub group_order: usize,
    pub exact: bool,
    pub orbit_types: Vec<OrbitTypeSummary>,
    /// `(i, j)`: `(H_i) ≤ (H_j)`, reflexive pairs omitted.
    pub order_relation: Vec<(usize, usize)>,
    pub components: Vec<ComponentCount>,
    pub hypothesis: HypothesisStatus,
    pub warnings: Vec<String>,
}

pub fn analyze_report(a: &Analysis) -> Result<AnalyzeReport> {
    let counts = a.refinement_counts()?;
    Ok(AnalyzeReport {
        dim: a.group().dim(),
        group_order: a.group().order(),
        exact: a.group().is_exact(),
        orbit_types: a.table.summaries(),
        order_relation: a.table.order_relation.iter().copied().filter(|(i, j)| i != j).collect(),
        components: a
            .charts
            .iter()
            .zip(counts)
            .map(|(c, (n, half))| ComponentCount {
                h: c.type_id,
                components: n,
                components_half_delta: half,
                delta: c.delta,
            })
            .collect(),
        hypothesis: a.hypothesis.clone(),
        warnings: a.warnings.clone(),
    })
}

fn warnings_section(out: &mut String, warnings: &[String]) {
    if warnings.is_empty() {
        return;
    }
    out.push_str("\nwarnings:\n");
    for w in warnings {
        let _ = writeln!(out, "  - {w}");
    }
}

pub fn render_analyze(r: &AnalyzeReport) -> String {
    let mut out = String::new();
    let _ = writeln!(
        out,
        "group: order {} acting on R^{} ({})",
        r.group_order,
        r.dim,
        if r.exact { "exact" } else { "floating point" }
    );
    let _ = writeln!(out, "orbit types: {}", r.orbit_types.len());
    for t in &r.orbit_types {
        let _ = writeln!(
            out,
            "  H{}: |H|={} dim V^H={} |NH|={} |WH|={} conjugates={} members={:?}",
            t.id, t.order, t.fixed_dim, t.normalizer_order, t.weyl_order, t.conjugates, t.members
        );
    }
    if !r.order_relation.is_empty() {
        let rel: Vec<String> = r.order_relation.iter().map(|(i, j)| format!("H{i} <= H{j}")).collect();
        let _ = writeln!(out, "partial order: {}", rel.join(", "));
    }
    out.push_str("quotient components:\n");
    for c in &r.components {
        let stable = if c.components == c.components_half_delta { "stable" } else { "UNSTABLE" };
        let _ = writeln!(
            out,
            "  H{}: n={} (delta {}; n={} at delta/2, {stable})",
            c.h, c.components, c.delta, c.components_half_delta
        );
    }
    let _ = writeln!(
        out,
        "hypothesis: {} (origin in domain: {}, dim V^G = {})",
        if r.hypothesis.holds { "holds" } else { "violated" },
        r.hypothesis.origin_in_domain,
        r.hypothesis.fixed_dim
    );
    warnings_section(&mut out, &r.warnings);
    out
}

#[derive(Clone, Debug, Serialize)]
pub struct DegreeOutput<'a> {
    pub validation: &'a MapValidation,
    pub report: &'a DegreeReport,
    pub hypothesis: &'a HypothesisStatus,
    pub warnings: &'a [String],
}

pub fn render_degree(d: &DegreeOutput<'_>) -> String {
    let mut out = String::new();
    let v = d.validation;
    let _ = writeln!(
        out,
        "map: equivariance {} ({} samples, max defect {:e}{}), locality {} (margin {}, min |f| on shell {:e})",
        if v.equivariance.pass { "ok" } else { "FAILED" },
        v.equivariance.samples,
        v.equivariance.max_defect,
        if v.equivariance.exact { ", exact" } else { "" },
        if v.locality.pass { "ok" } else { "FAILED" },
        v.locality.margin,
        v.locality.min_norm
    );
    for s in &d.report.strata {
        let _ = writeln!(
            out,
            "H{}: |WH|={} dim V^H={} zeros={} orbits={}",
            s.type_id,
            s.weyl_order,
            s.fixed_dim,
            s.zeros.len(),
            s.orbits
        );
        for z in &s.zeros {
            let _ = writeln!(
                out,
                "    orbit {} alpha={} x={:?} det={:.6e} sign={:+}",
                z.orbit, z.component, z.point, z.det, z.sign
            );
        }
        for (alpha, (raw, deg)) in s.raw_sums.iter().zip(&s.degrees).enumerate() {
            let _ = writeln!(out, "  alpha={alpha}: raw sum {raw:+} / {} = {deg:+}", s.weyl_order);
        }
        for n in &s.notes {
            let _ = writeln!(out, "  note: {n}");
        }
    }
    let _ = writeln!(out, "degree vector: {}", d.report.vector);
    let mut warnings = d.warnings.to_vec();
    if !d.hypothesis.holds {
        warnings.push("hypothesis violated; the vector may not classify otopy classes".into());
    }
    warnings_section(&mut out, &warnings);
    out
}

#[derive(Clone, Debug, Serialize)]
pub struct RealizeOutput {
    pub target: DegreeVector,
    pub atoms: Vec<AtomRecord>,
    pub round_trip: DegreeVector,
    pub pass: bool,
}

pub fn render_realize(r: &RealizeOutput) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "target: {}", r.target);
    let _ = writeln!(out, "atoms: {}", r.atoms.len());
    let section = crate::config::MapSection {
        expressions: Vec::new(),
        atoms: r.atoms.clone(),
        empty: r.atoms.is_empty(),
    };
    #[derive(Serialize)]
    struct Wrapper<'a> {
        map: &'a crate::config::MapSection,
    }
    out.push_str("\n# realized map, loadable as a [map] section\n");
    out.push_str(&toml::to_string(&Wrapper { map: &section }).expect("atoms serialize"));
    let _ = writeln!(
        out,
        "\nround trip: {} ({})",
        r.round_trip,
        if r.pass { "matches" } else { "MISMATCH" }
    );
    out
}

#[derive(Clone, Debug, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum VerifyItem {
    Additivity(AdditivityReport),
    Otopy { label: String, report: OtopyReport },
    NotAnOtopy { label: String, t: f64, point: Vec<f64>, norm: f64 },
}

impl VerifyItem {
    pub fn pass(&self) -> bool {
        match self {
            VerifyItem::Additivity(r) => r.pass,
            VerifyItem::Otopy { report, .. } => report.pass,
            VerifyItem::NotAnOtopy { .. } => false,
        }
    }
}

pub fn render_verify(items: &[VerifyItem]) -> String {
    let mut out = String::new();
    for item in items {
        match item {
            VerifyItem::Additivity(r) => {
                let _ = writeln!(
                    out,
                    "additivity: {}\n  deg f = {}\n  deg g = {}\n  deg f+g = {}",
                    if r.pass { "pass" } else { "FAIL" },
                    r.left,
                    r.right,
                    r.union
                );
            }
            VerifyItem::Otopy { label, report } => {
                let _ = writeln!(out, "otopy invariance ({label}): {}", if report.pass { "pass" } else { "FAIL" });
                for row in &report.rows {
                    let status = match &row.status {
                        SliceStatus::Ok => "ok".to_string(),
                        SliceStatus::Retried => format!("retried at t={:.4}", row.t_used),
                        SliceStatus::Inconclusive(e) => format!("inconclusive at t={:.4}: {e}", row.t_used),
                        SliceStatus::Failed(e) => format!("failed: {e}"),
                    };
                    let v = row.vector.as_ref().map_or("-".into(), |v| v.to_string());
                    let _ = writeln!(out, "  t={:.3} {v} {status}", row.t);
                }
            }
            VerifyItem::NotAnOtopy { label, t, point, norm } => {
                let _ = writeln!(
                    out,
                    "otopy ({label}): NOT AN OTOPY, zero set reaches the boundary near t={t}, x={point:?} (|h|={norm:e})"
                );
            }
        }
    }
    out
}
