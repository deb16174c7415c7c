//! Otopies: one-parameter families `h_t` with a compact zero set in
//! `Ω × [0, 1]`. Degrees are compared slice by slice.

use num_traits::{One, Zero};
use rayon::prelude::*;
use serde::Serialize;

use crate::analysis::Analysis;
use crate::degree::{equivariant_degree, DegreeVector};
use crate::domain::Region;
use crate::error::{Error, Result};
use crate::map::{check_locality, EquivariantLocalMap, MapBody, MapExpression};
use crate::poly::Polynomial;
use crate::realize::disjoint_union;
use crate::scalar::{q_frac, q_to_f64, Q};
use std::sync::Arc;

use crate::group::FiniteGroup;

#[derive(Clone, Debug)]
pub enum Otopy {
    /// `(1 − t)·from + t·to` on the domain of `from`.
    StraightLine { from: EquivariantLocalMap, to: EquivariantLocalMap },
    /// Polynomials in `x1..xn, t` with `t` stored last.
    Expression {
        group: Arc<FiniteGroup>,
        components: Vec<Polynomial>,
        domain: Region,
    },
    /// `map` on its own domain for `t < 1/2`, restricted to `to` afterwards.
    DomainShrink { map: EquivariantLocalMap, to: Region },
    Reversed(Box<Otopy>),
}

impl Otopy {
    pub fn slice(&self, t: &Q) -> Result<EquivariantLocalMap> {
        if *t < Q::zero() || *t > Q::one() {
            return Err(Error::Config(format!("otopy parameter {t} outside [0, 1]")));
        }
        match self {
            Otopy::StraightLine { from, to } => Ok(if t.is_zero() {
                from.clone()
            } else {
                EquivariantLocalMap::new(
                    from.group().clone(),
                    MapBody::Blend {
                        from: Box::new(from.clone()),
                        to: Box::new(to.clone()),
                        t: t.clone(),
                    },
                )
            }),
            Otopy::Expression { group, components, domain } => {
                let n = group.dim();
                let comps = components
                    .iter()
                    .map(|p| p.substitute_var(n, t).truncate_vars(n).expect("t eliminated"))
                    .collect();
                EquivariantLocalMap::polynomial(group.clone(), MapExpression::new(comps)?, domain.clone())
            }
            Otopy::DomainShrink { map, to } => Ok(if *t < q_frac(1, 2) { map.clone() } else { map.restricted(to.clone()) }),
            Otopy::Reversed(inner) => inner.slice(&(Q::one() - t)),
        }
    }

    pub fn reversed(self) -> Otopy {
        match self {
            Otopy::Reversed(inner) => *inner,
            other => Otopy::Reversed(Box::new(other)),
        }
    }

    pub fn start(&self) -> Result<EquivariantLocalMap> {
        self.slice(&Q::zero())
    }

    pub fn end(&self) -> Result<EquivariantLocalMap> {
        self.slice(&Q::one())
    }
}

fn samples(n: usize) -> Vec<Q> {
    let m = n.max(2) - 1;
    (0..=m).map(|k| q_frac(k as i64, m as i64)).collect()
}

/// Checks every sample slice for small values on the boundary shell and for
/// zeros closer to the boundary than the margin.
fn check_slices(h: &Otopy, analysis: &Analysis) -> Result<()> {
    let ts = samples(analysis.options.t_samples);
    let found: Vec<Result<()>> = ts
        .par_iter()
        .map(|t| {
            let f = h.slice(t)?;
            let margin = analysis.margin_for(&f);
            let rep = check_locality(&f, margin, analysis.options.eta_loc);
            if let Some((point, norm)) = rep.offenders.first() {
                return Err(Error::NotAnOtopy {
                    t: q_to_f64(t),
                    point: point.clone(),
                    norm: *norm,
                });
            }
            if let Ok(report) = equivariant_degree(&f, analysis) {
                let region = f.domain();
                for z in report.strata.iter().flat_map(|s| &s.zeros) {
                    if region.clearance(&z.point) <= margin {
                        return Err(Error::NotAnOtopy {
                            t: q_to_f64(t),
                            point: z.point.clone(),
                            norm: 0.0,
                        });
                    }
                }
            }
            Ok(())
        })
        .collect();
    found.into_iter().collect()
}

/// `(1 − t)f + t·g`, validated on sample slices.
pub fn straight_line_otopy(f: &EquivariantLocalMap, g: &EquivariantLocalMap, analysis: &Analysis) -> Result<Otopy> {
    for x in crate::map::sample_points(f, 32, analysis.options.seed) {
        if g.eval_closure(&x).is_none() {
            return Err(Error::Config(format!("second map undefined at {x:?} in the first map's domain")));
        }
    }
    let h = Otopy::StraightLine {
        from: f.clone(),
        to: g.clone(),
    };
    check_slices(&h, analysis)?;
    Ok(h)
}

/// `(1 + t)·f`
pub fn scaling_otopy(f: &EquivariantLocalMap, analysis: &Analysis) -> Result<Otopy> {
    straight_line_otopy(f, &f.scaled(Q::from_integer(2.into())), analysis)
}

/// Polynomial otopy given as expressions in `x1..xn` and `t`.
pub fn expression_otopy(group: Arc<FiniteGroup>, sources: &[&str], domain: Region, analysis: &Analysis) -> Result<Otopy> {
    let n = group.dim();
    if sources.len() != n {
        return Err(Error::DimensionMismatch {
            expected: n,
            found: sources.len(),
        });
    }
    let components = sources
        .iter()
        .map(|s| Polynomial::parse(s, n, true))
        .collect::<Result<Vec<_>>>()?;
    let h = Otopy::Expression { group, components, domain };
    check_slices(&h, analysis)?;
    Ok(h)
}

/// Restriction of `f` to a smaller region containing all its zeros.
pub fn domain_shrink(f: &EquivariantLocalMap, to: Region, analysis: &Analysis) -> Result<Otopy> {
    let h = Otopy::DomainShrink { map: f.clone(), to };
    check_slices(&h, analysis)?;
    Ok(h)
}

#[derive(Clone, Debug, Serialize, PartialEq)]
pub enum SliceStatus {
    Ok,
    /// Degenerate at the sample; the shifted parameter was used.
    Retried,
    Inconclusive(String),
    Failed(String),
}

#[derive(Clone, Debug, Serialize)]
pub struct SliceRow {
    pub t: f64,
    pub t_used: f64,
    pub vector: Option<DegreeVector>,
    pub status: SliceStatus,
}

#[derive(Clone, Debug, Serialize)]
pub struct OtopyReport {
    pub pass: bool,
    pub rows: Vec<SliceRow>,
}

/// Degrees at equispaced slices; passes iff every slice is conclusive and
/// all vectors agree. A degenerate slice is retried at `t ± 1/97`.
pub fn verify_otopy_invariance(h: &Otopy, analysis: &Analysis, t_samples: usize) -> OtopyReport {
    let shift = q_frac(1, 97);
    let rows: Vec<SliceRow> = samples(t_samples)
        .into_par_iter()
        .map(|t| {
            let degree = |t: &Q| h.slice(t).and_then(|f| equivariant_degree(&f, analysis)).map(|r| r.vector);
            let tf = q_to_f64(&t);
            match degree(&t) {
                Ok(v) => SliceRow {
                    t: tf,
                    t_used: tf,
                    vector: Some(v),
                    status: SliceStatus::Ok,
                },
                Err(Error::DegenerateZero { .. }) => {
                    let alt = if t.clone() + &shift <= Q::one() { t.clone() + &shift } else { t.clone() - &shift };
                    match degree(&alt) {
                        Ok(v) => SliceRow {
                            t: tf,
                            t_used: q_to_f64(&alt),
                            vector: Some(v),
                            status: SliceStatus::Retried,
                        },
                        Err(e) => SliceRow {
                            t: tf,
                            t_used: q_to_f64(&alt),
                            vector: None,
                            status: SliceStatus::Inconclusive(e.to_string()),
                        },
                    }
                }
                Err(e) => SliceRow {
                    t: tf,
                    t_used: tf,
                    vector: None,
                    status: SliceStatus::Failed(e.to_string()),
                },
            }
        })
        .collect();
    let first = rows.iter().find_map(|r| r.vector.clone());
    let pass = rows.iter().all(|r| matches!(r.status, SliceStatus::Ok | SliceStatus::Retried) && r.vector == first);
    OtopyReport { pass, rows }
}

#[derive(Clone, Debug, Serialize)]
pub struct AdditivityReport {
    pub pass: bool,
    pub left: DegreeVector,
    pub right: DegreeVector,
    pub union: DegreeVector,
}

/// `deg(f ⊔ g) = deg f + deg g`; fails with `Overlap` when the domains meet.
pub fn verify_additivity(f: &EquivariantLocalMap, g: &EquivariantLocalMap, analysis: &Analysis) -> Result<AdditivityReport> {
    let u = disjoint_union(f, g)?;
    let left = equivariant_degree(f, analysis)?.vector;
    let right = equivariant_degree(g, analysis)?.vector;
    let union = equivariant_degree(&u, analysis)?.vector;
    Ok(AdditivityReport {
        pass: union == &left + &right,
        left,
        right,
        union,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::analysis::Options;
    use crate::domain::{saturate, AxisBox};
    use crate::group::{close_generators, OrthoMatrix, MAX_GROUP_ORDER, TOL_GROUP};
    use crate::scalar::q_int;

    fn odd_pair() -> Analysis {
        let g = OrthoMatrix::from_rational(1, vec![q_int(-1)], TOL_GROUP).unwrap();
        let g = Arc::new(close_generators(1, &[g], MAX_GROUP_ORDER, TOL_GROUP).unwrap());
        let d = saturate(vec![AxisBox::new(vec![1.0], vec![3.0]).unwrap()], g).unwrap();
        Analysis::new(Arc::new(d), Options::default()).unwrap()
    }

    fn poly(a: &Analysis, src: &str) -> EquivariantLocalMap {
        EquivariantLocalMap::polynomial(
            a.group().clone(),
            MapExpression::parse(&[src]).unwrap(),
            Region::Domain(a.domain.clone()),
        )
        .unwrap()
    }

    #[test]
    fn moving_root_keeps_degree() {
        let a = odd_pair();
        let h = expression_otopy(a.group().clone(), &["x1^3 - (4 + t/2)*x1"], Region::Domain(a.domain.clone()), &a).unwrap();
        let rep = verify_otopy_invariance(&h, &a, 11);
        assert!(rep.pass, "{rep:?}");
        assert_eq!(rep.rows.len(), 11);
    }

    #[test]
    fn root_through_boundary_is_rejected() {
        let a = odd_pair();
        // zeros at ±sqrt(4 + 12t) leave through x = 3 at t = 5/12
        let f = poly(&a, "x1^3 - 4*x1");
        let g = poly(&a, "x1^3 - 16*x1");
        assert!(matches!(straight_line_otopy(&f, &g, &a), Err(Error::NotAnOtopy { .. })));
    }

    #[test]
    fn reversed_slices_mirror() {
        let a = odd_pair();
        let f = poly(&a, "x1^3 - 4*x1");
        let h = scaling_otopy(&f, &a).unwrap();
        let r = h.clone().reversed();
        let t = q_frac(3, 10);
        let x = [2.5];
        let lhs = h.slice(&t).unwrap().evaluate(&x).unwrap();
        let rhs = r.slice(&(Q::one() - &t)).unwrap().evaluate(&x).unwrap();
        assert_eq!(lhs, rhs);
        assert!(matches!(r.reversed(), Otopy::StraightLine { .. }));
    }
}
