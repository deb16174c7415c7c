//! Acceptance suite: one PASS/FAIL line per criterion, nonzero exit on any
//! failure. Expected values come from the oracles in this file, not from
//! the engine.

mod common;

use std::panic::{catch_unwind, AssertUnwindSafe};
use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::Arc;
use std::time::Instant;

use common::{cx_linear, cx_mul, cx_one, scenario, Scenario, S2, S3, S4, S5};
use equideg::analysis::{Analysis, Options};
use equideg::config::RunConfig;
use equideg::degree::{equivariant_degree, DegreeKey, DegreeVector};
use equideg::domain::{saturate, AxisBox, Region};
use equideg::error::Error;
use equideg::group::FiniteGroup;
use equideg::map::{check_locality, sample_points, symmetrize, EquivariantLocalMap, MapBody, MapExpression};
use equideg::oracle::{oracle_degree_1d, oracle_degree_2d, rectangle};
use equideg::otopy::{straight_line_otopy, verify_additivity, verify_otopy_invariance};
use equideg::poly::Polynomial;
use equideg::realize::{atoms_map, linearize, realize, realize_avoiding, standard_atom};
use equideg::report::analyze_report;
use equideg::scalar::{q_frac, Q};
use rand::rngs::StdRng;
use rand::{Rng, SeedableRng};

type Outcome = Result<String, String>;

static STRATA_CHECKED: AtomicUsize = AtomicUsize::new(0);
static DIVISIBILITY_VIOLATIONS: AtomicUsize = AtomicUsize::new(0);

/// Degree vector with an independent divisibility tally for criterion 9.
fn deg(f: &EquivariantLocalMap, a: &Analysis) -> Result<DegreeVector, String> {
    match equivariant_degree(f, a) {
        Ok(r) => {
            for s in &r.strata {
                STRATA_CHECKED.fetch_add(1, Ordering::Relaxed);
                if s.raw_sums.iter().any(|&x| x % s.weyl_order as i64 != 0) {
                    DIVISIBILITY_VIOLATIONS.fetch_add(1, Ordering::Relaxed);
                }
            }
            Ok(r.vector)
        }
        Err(e @ Error::DivisibilityViolation { .. }) => {
            DIVISIBILITY_VIOLATIONS.fetch_add(1, Ordering::Relaxed);
            Err(e.to_string())
        }
        Err(e) => Err(e.to_string()),
    }
}

fn check(cond: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg())
    }
}

fn vector(entries: &[(usize, usize, i64)]) -> DegreeVector {
    let mut v = DegreeVector::new();
    for &(h, a, d) in entries {
        v.set(DegreeKey::new(h, a), d);
    }
    v
}

fn cubic(x: f64) -> f64 {
    x * x * x - 4.0 * x
}

fn z5(p: &[f64; 2]) -> [f64; 2] {
    let (x, y) = (p[0], p[1]);
    [
        x.powi(5) - 10.0 * x.powi(3) * y * y + 5.0 * x * y.powi(4) - 16.0 * x,
        5.0 * x.powi(4) * y - 10.0 * x * x * y.powi(3) + y.powi(5) - 16.0 * y,
    ]
}

/// Type id whose representative is the whole group (the fixed-axis stratum in S3).
fn type_with_order(a: &Analysis, order: usize) -> usize {
    a.table.entries.iter().find(|e| e.representative.order() == order).expect("type exists").id
}

fn c1() -> Outcome {
    let t0 = Instant::now();
    let s = scenario("S2", S2);
    let v = deg(&s.map, &s.analysis)?;
    let elapsed = t0.elapsed().as_secs_f64();
    // Oracle: endpoint signs on the fundamental interval (1,3) give the
    // quotient count; on both intervals they give |WH| times it.
    let quotient = oracle_degree_1d(cubic, &[(1.0, 3.0)]).map_err(|e| e.to_string())?;
    let full = oracle_degree_1d(cubic, &[(-3.0, -1.0), (1.0, 3.0)]).map_err(|e| e.to_string())?;
    check(v == vector(&[(0, 0, quotient)]), || format!("vector {v}, oracle {quotient}"))?;
    check(full == 2 * quotient, || format!("full oracle {full}"))?;
    check(quotient == 1, || format!("oracle {quotient}"))?;
    check(elapsed < 1.0, || format!("runtime {elapsed:.3}s"))?;
    Ok(format!("{v}, oracle {quotient}, {elapsed:.3}s"))
}

fn c2() -> Outcome {
    let t0 = Instant::now();
    let s = scenario("S3", S3);
    let axis = type_with_order(&s.analysis, 2);
    let free = type_with_order(&s.analysis, 1);
    let val = s.analysis.validate(&s.map);
    check(val.pass() && val.equivariance.exact, || format!("validation {val:?}"))?;
    let v1 = deg(&s.map, &s.analysis)?;
    // Oracle: the only zero is (1,0) on the axis; along the axis f restricts
    // to x - 1 on (-3,3).
    let axis_oracle = oracle_degree_1d(|x| x - 1.0, &[(-3.0, 3.0)]).map_err(|e| e.to_string())?;
    let free_oracle =
        oracle_degree_2d(|p| [p[0] - 1.0, p[1]], &rectangle([-2.9, 0.05], [2.9, 2.9]), 800, 1e-9).map_err(|e| e.to_string())?;
    let want1 = vector(&[(axis, 0, axis_oracle), (free, 0, free_oracle)]);
    check(v1 == want1 && axis_oracle == 1 && free_oracle == 0, || format!("f1: {v1} vs {want1}"))?;

    let cfg = RunConfig::from_toml(&S3.replace("\"x1 - 1\", \"x2\"", "\"x1^2 - 1 - x2^2\", \"x1*x2\"")).map_err(|e| e.to_string())?;
    let f2 = cfg.build_map(&s.analysis).map_err(|e| e.to_string())?.unwrap();
    let val2 = s.analysis.validate(&f2);
    check(val2.pass() && val2.equivariance.exact, || format!("validation f2 {val2:?}"))?;
    let v2 = deg(&f2, &s.analysis)?;
    let axis2 = oracle_degree_1d(|x| x * x - 1.0, &[(-3.0, 3.0)]).map_err(|e| e.to_string())?;
    let free2 = oracle_degree_2d(|p| [p[0] * p[0] - 1.0 - p[1] * p[1], p[0] * p[1]], &rectangle([-2.9, 0.05], [2.9, 2.9]), 800, 1e-9)
        .map_err(|e| e.to_string())?;
    check(v2.is_zero() && axis2 == 0 && free2 == 0, || format!("f2: {v2}, oracles {axis2} {free2}"))?;
    let elapsed = t0.elapsed().as_secs_f64();
    check(elapsed < 5.0, || format!("runtime {elapsed:.3}s"))?;
    Ok(format!("f1 {v1}, f2 {v2}, {elapsed:.3}s"))
}

fn c3() -> Outcome {
    let t0 = Instant::now();
    let s = scenario("S4", S4);
    let v = deg(&s.map, &s.analysis)?;
    let elapsed = t0.elapsed().as_secs_f64();
    // Oracle: winding on the outer square minus the inner square is the
    // classical degree on the annulus, |WH| = 4 times the quotient entry.
    let mut counts = Vec::new();
    for steps in [400, 1600] {
        let outer = oracle_degree_2d(z5, &rectangle([-3.0, -3.0], [3.0, 3.0]), steps, 1e-9).map_err(|e| e.to_string())?;
        let inner = oracle_degree_2d(z5, &rectangle([-1.0, -1.0], [1.0, 1.0]), steps, 1e-9).map_err(|e| e.to_string())?;
        counts.push(outer - inner);
    }
    check(counts[0] == counts[1], || format!("oracle step counts disagree: {counts:?}"))?;
    check(counts[0] % 4 == 0, || format!("oracle {} not divisible by 4", counts[0]))?;
    let want = vector(&[(0, 0, counts[0] / 4)]);
    check(v == want && counts[0] / 4 == 1, || format!("{v} vs {want}"))?;
    check(elapsed < 5.0, || format!("runtime {elapsed:.3}s"))?;
    Ok(format!("{v}, oracle {}/4, {elapsed:.3}s", counts[0]))
}

fn c4() -> Outcome {
    let s = scenario("S5", S5);
    let r = analyze_report(&s.analysis).map_err(|e| e.to_string())?;
    check(r.orbit_types.len() == 3, || format!("{} orbit types", r.orbit_types.len()))?;
    let mut weyl: Vec<usize> = r.orbit_types.iter().map(|t| t.weyl_order).collect();
    weyl.sort();
    check(weyl == vec![2, 2, 8], || format!("|WH| = {weyl:?}"))?;
    // Oracle: the reflections of the square split into the axis and the
    // diagonal classes; no element conjugates one into the other.
    let g = s.analysis.group();
    let reflections: Vec<usize> = (0..g.order()).filter(|&i| (g.element(i).det() + 1.0).abs() < 1e-12).collect();
    check(reflections.len() == 4, || format!("{} reflections", reflections.len()))?;
    let class = |r: usize| -> Vec<usize> {
        let mut c: Vec<usize> = (0..g.order()).map(|x| g.mul(g.mul(x, r), g.inv(x))).collect();
        c.sort();
        c.dedup();
        c
    };
    let mut classes: Vec<Vec<usize>> = reflections.iter().map(|&r| class(r)).collect();
    classes.sort();
    classes.dedup();
    check(classes.len() == 2, || format!("{} reflection classes", classes.len()))?;
    let refl_types: Vec<_> = r.orbit_types.iter().filter(|t| t.order == 2).collect();
    check(refl_types.len() == 2, || "two order-2 types expected".into())?;
    let rep_reflection = |t: &equideg::orbit_types::OrbitTypeSummary| *t.members.iter().find(|&&m| m != 0).unwrap();
    check(class(rep_reflection(refl_types[0])) != class(rep_reflection(refl_types[1])), || {
        "reflection types are conjugate".into()
    })?;
    for c in &r.components {
        check(c.components == c.components_half_delta, || format!("H{} unstable: {} vs {}", c.h, c.components, c.components_half_delta))?;
    }
    Ok(format!("3 types, |WH| {weyl:?}, 2 reflection classes, counts stable"))
}

fn random_target(a: &Analysis, rng: &mut StdRng, bound: i64) -> DegreeVector {
    let mut v = DegreeVector::new();
    for k in a.keys() {
        v.set(k, rng.gen_range(-bound..=bound));
    }
    v
}

fn c5() -> Outcome {
    let t0 = Instant::now();
    let mut ok = 0;
    let mut total = 0;
    let mut failures = Vec::new();
    for (name, text) in [("S2", S2), ("S3", S3), ("S4", S4)] {
        let s = scenario(name, text);
        let mut rng = StdRng::seed_from_u64(5);
        for _ in 0..25 {
            total += 1;
            let target = random_target(&s.analysis, &mut rng, 3);
            match realize(&s.analysis, &target).map_err(|e| e.to_string()).and_then(|f| deg(&f, &s.analysis)) {
                Ok(v) if v == target => ok += 1,
                Ok(v) => failures.push(format!("{name}: {target} -> {v}")),
                Err(e) => failures.push(format!("{name}: {target}: {e}")),
            }
        }
    }
    let elapsed = t0.elapsed().as_secs_f64();
    check(ok == total && total == 75, || format!("{ok}/{total}; {}", failures.join("; ")))?;
    check(elapsed < 120.0, || format!("runtime {elapsed:.1}s"))?;
    Ok(format!("{ok}/{total}, {elapsed:.2}s"))
}

fn balls(f: &EquivariantLocalMap) -> Vec<equideg::domain::Ball> {
    match f.body() {
        MapBody::Atoms(list) => list.atoms.iter().map(|a| a.ball()).collect(),
        _ => Vec::new(),
    }
}

fn c6() -> Outcome {
    let mut ok = 0;
    let mut total = 0;
    let mut failures = Vec::new();
    for (name, text) in [("S2", S2), ("S3", S3), ("S4", S4)] {
        let s = scenario(name, text);
        let mut rng = StdRng::seed_from_u64(6);
        for _ in 0..20 {
            total += 1;
            let (ta, tb) = (random_target(&s.analysis, &mut rng, 2), random_target(&s.analysis, &mut rng, 2));
            let run = || -> Result<bool, String> {
                let f = realize(&s.analysis, &ta).map_err(|e| e.to_string())?;
                let g = realize_avoiding(&s.analysis, &tb, &balls(&f)).map_err(|e| e.to_string())?;
                let r = verify_additivity(&f, &g, &s.analysis).map_err(|e| e.to_string())?;
                // Oracle: the targets themselves.
                Ok(r.pass && r.union == &ta + &tb && deg(&f, &s.analysis)? == ta && deg(&g, &s.analysis)? == tb)
            };
            match run() {
                Ok(true) => ok += 1,
                Ok(false) => failures.push(format!("{name}: {ta} + {tb}")),
                Err(e) => failures.push(format!("{name}: {e}")),
            }
        }
    }
    check(ok == total && total == 60, || format!("{ok}/{total}; {}", failures.join("; ")))?;
    Ok(format!("{ok}/{total}"))
}

/// Random `G`-equivariant polynomial perturbation, small against `f` on the shell.
fn perturbation(s: &Scenario, rng: &mut StdRng) -> Option<Vec<Polynomial>> {
    let group: &FiniteGroup = s.analysis.group();
    let n = group.dim();
    let shell = check_locality(&s.map, s.analysis.margin_for(&s.map), 1e-6).min_norm;
    let radius = s.analysis.domain.bounding_radius();
    let mut comps = Vec::new();
    let mut weight = 0.0;
    for _ in 0..n {
        let mut p = Polynomial::zero(n);
        for d in 0..=2u32 {
            let monomials: Vec<Vec<u32>> = match (n, d) {
                (_, 0) => vec![vec![0; n]],
                (1, _) => vec![vec![d]],
                (_, 1) => (0..n).map(|i| (0..n).map(|j| (i == j) as u32).collect()).collect(),
                _ => (0..n).flat_map(|i| (i..n).map(move |j| (i, j))).map(|(i, j)| {
                    let mut e = vec![0; n];
                    e[i] += 1;
                    e[j] += 1;
                    e
                }).collect(),
            };
            for e in monomials {
                let c = rng.gen_range(-8i64..=8);
                weight += (c.abs() as f64 / 8.0) * radius.powi(d as i32);
                let mut m = Polynomial::constant(n, q_frac(c, 8));
                for (k, &p) in e.iter().enumerate() {
                    for _ in 0..p {
                        m = &m * &Polynomial::var(n, k);
                    }
                }
                p = &p + &m;
            }
        }
        comps.push(p);
    }
    // Keep |p| below a quarter of min |f| on the shell.
    let scale = 0.25 * shell / (weight * group.order() as f64 * n as f64).max(1e-12);
    let scale = Q::from_float(scale).unwrap();
    let sym = symmetrize(group, &comps)?;
    Some(sym.iter().map(|p| p.scale(&scale)).collect())
}

fn c7() -> Outcome {
    let mut linearizations = 0;
    let mut lines = 0;
    let mut retried = 0;
    let mut failures = Vec::new();
    for (name, text) in [("S2", S2), ("S3", S3), ("S4", S4)] {
        let s = scenario(name, text);
        let report = equivariant_degree(&s.map, &s.analysis).map_err(|e| e.to_string())?;
        for z in report.strata.iter().flat_map(|st| &st.zeros) {
            let out = linearize(&s.map, z, &s.analysis).map_err(|e| e.to_string());
            match out.map(|(_, h)| verify_otopy_invariance(&h, &s.analysis, 11)) {
                Ok(r) if r.pass => {
                    linearizations += 1;
                    retried += r.rows.iter().filter(|row| row.t != row.t_used).count();
                }
                Ok(r) => failures.push(format!("{name} linearization at {:?}: {:?}", z.point, r.rows)),
                Err(e) => failures.push(format!("{name} linearization at {:?}: {e}", z.point)),
            }
        }
        let mut rng = StdRng::seed_from_u64(7);
        let base = s.map.expression().expect("polynomial scenario map").components().to_vec();
        for _ in 0..10 {
            let Some(p) = perturbation(&s, &mut rng) else {
                failures.push(format!("{name}: symmetrize needs an exact group"));
                continue;
            };
            let comps: Vec<Polynomial> = base.iter().zip(&p).map(|(a, b)| a + b).collect();
            let g = EquivariantLocalMap::polynomial(
                s.analysis.group().clone(),
                MapExpression::new(comps).map_err(|e| e.to_string())?,
                Region::Domain(s.analysis.domain.clone()),
            )
            .map_err(|e| e.to_string())?;
            match straight_line_otopy(&s.map, &g, &s.analysis).map(|h| verify_otopy_invariance(&h, &s.analysis, 11)) {
                Ok(r) if r.pass => {
                    lines += 1;
                    retried += r.rows.iter().filter(|row| row.t != row.t_used).count();
                }
                Ok(r) => failures.push(format!("{name} straight line: {:?}", r.rows)),
                Err(e) => failures.push(format!("{name} straight line: {e}")),
            }
        }
    }
    check(failures.is_empty(), || failures.join("; "))?;
    check(linearizations > 0 && lines == 30, || format!("{linearizations} linearizations, {lines} lines"))?;
    Ok(format!("{linearizations} linearization otopies, {lines} straight lines, {retried} retried slices"))
}

fn c8() -> Outcome {
    let mut pairs = 0;
    for s in common::all() {
        for key in s.analysis.keys() {
            let a = &s.analysis;
            let plus = standard_atom(a, key, 1, &[]).map_err(|e| format!("{} {key}: {e}", s.name))?;
            let minus = standard_atom(a, key, -1, &[plus.ball()]).map_err(|e| format!("{} {key}: {e}", s.name))?;
            let single = deg(&atoms_map(a.group().clone(), vec![plus.clone()]), a)?;
            check(single == vector(&[(key.type_id, key.component, 1)]), || format!("{} {key}: +1 atom has {single}", s.name))?;
            let v = deg(&atoms_map(a.group().clone(), vec![plus, minus]), a)?;
            check(v.is_zero(), || format!("{} {key}: pair has {v}", s.name))?;
            pairs += 1;
        }
    }
    Ok(format!("{pairs} keys annihilated"))
}

fn c9() -> Outcome {
    let checked = STRATA_CHECKED.load(Ordering::Relaxed);
    let bad = DIVISIBILITY_VIOLATIONS.load(Ordering::Relaxed);
    check(bad == 0 && checked > 0, || format!("{bad} violations over {checked} strata"))?;
    Ok(format!("0 violations over {checked} stratum reports"))
}

fn c10() -> Outcome {
    let group = Arc::new(FiniteGroup::trivial(2));
    let domain = Arc::new(saturate(vec![AxisBox::new(vec![-2.0, -2.0], vec![2.0, 2.0]).unwrap()], group.clone()).unwrap());
    let a = Analysis::new(domain.clone(), Options::default()).map_err(|e| e.to_string())?;
    check(a.keys().len() == 1, || format!("{} keys", a.keys().len()))?;
    let mut rng = StdRng::seed_from_u64(10);
    let mut summary = Vec::new();
    for _ in 0..10 {
        let (k, j) = loop {
            let k = rng.gen_range(0..=3usize);
            let j = rng.gen_range(0..=2usize);
            if k + j >= 1 {
                break (k, j);
            }
        };
        let mut roots: Vec<(i64, i64)> = Vec::new();
        while roots.len() < k + j {
            let r = (rng.gen_range(-12i64..=12), rng.gen_range(-12i64..=12));
            if roots.iter().all(|q| (q.0 - r.0).pow(2) + (q.1 - r.1).pow(2) >= 16) {
                roots.push(r);
            }
        }
        // coordinates in eighths, |x| <= 1.5
        let mut f = cx_one();
        for (i, r) in roots.iter().enumerate() {
            f = cx_mul(&f, &cx_linear((q_frac(r.0, 8), q_frac(r.1, 8)), i >= k));
        }
        let map = EquivariantLocalMap::polynomial(group.clone(), MapExpression::new(vec![f.0.clone(), f.1.clone()]).unwrap(), Region::Domain(domain.clone()))
            .map_err(|e| e.to_string())?;
        let v = deg(&map, &a)?;
        let oracle = oracle_degree_2d(
            |p| {
                let x = [p[0], p[1]];
                [f.0.eval(&x), f.1.eval(&x)]
            },
            &rectangle([-2.0, -2.0], [2.0, 2.0]),
            2000,
            1e-9,
        )
        .map_err(|e| e.to_string())?;
        check(v.entries().count() == 1, || format!("{} keys in {v}", v.entries().count()))?;
        check(v == vector(&[(0, 0, oracle)]) && oracle == k as i64 - j as i64, || format!("{v} vs oracle {oracle} (k={k}, j={j})"))?;
        summary.push(oracle);
    }
    Ok(format!("10/10 maps, degrees {summary:?}"))
}

fn c11() -> Outcome {
    let mut worst: f64 = 0.0;
    let mut count = 0;
    for s in common::all() {
        let mut maps = vec![s.map.clone()];
        if let Some(g) = s.config.build_map2(&s.analysis).map_err(|e| e.to_string())? {
            maps.push(g);
        }
        for f in &maps {
            let n = f.dim();
            let points = sample_points(f, 100, 11);
            check(points.len() == 100, || format!("{}: only {} sample points", s.name, points.len()))?;
            for x in points {
                let j = f.jacobian(&x).map_err(|e| e.to_string())?;
                // Oracle: central differences with a step scaled to |x|.
                let h = 1e-5 * (1.0 + x.iter().map(|v| v.abs()).fold(0.0, f64::max));
                let mut fd = vec![0.0; n * n];
                for c in 0..n {
                    let (mut xp, mut xm) = (x.clone(), x.clone());
                    xp[c] += h;
                    xm[c] -= h;
                    let (a, b) = (f.eval_closure(&xp).unwrap(), f.eval_closure(&xm).unwrap());
                    for r in 0..n {
                        fd[r * n + c] = (a[r] - b[r]) / (2.0 * h);
                    }
                }
                let scale = j.iter().map(|v| v.abs()).fold(1.0, f64::max);
                let err = j.iter().zip(&fd).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max) / scale;
                worst = worst.max(err);
                count += 1;
            }
        }
    }
    check(worst <= 1e-5, || format!("max relative error {worst:e}"))?;
    Ok(format!("{count} points, max relative error {worst:.2e}"))
}

fn main() {
    let criteria: [(&str, fn() -> Outcome); 11] = [
        ("1 S2 degree vs 1-d oracle", c1),
        ("2 S3 exact degrees", c2),
        ("3 S4 degree vs winding oracle", c3),
        ("4 S5 orbit types and stability", c4),
        ("5 round trip 75/75", c5),
        ("6 additivity 60/60", c6),
        ("7 otopy invariance", c7),
        ("8 annihilation", c8),
        ("9 divisibility", c9),
        ("10 classical reduction", c10),
        ("11 jacobian check", c11),
    ];
    let mut failed = 0;
    for (name, f) in criteria {
        let t0 = Instant::now();
        let outcome = catch_unwind(AssertUnwindSafe(f)).unwrap_or_else(|p| {
            Err(p
                .downcast_ref::<String>()
                .cloned()
                .or_else(|| p.downcast_ref::<&str>().map(|s| s.to_string()))
                .unwrap_or_else(|| "panic".into()))
        });
        let secs = t0.elapsed().as_secs_f64();
        match outcome {
            Ok(detail) => println!("PASS criterion {name}: {detail} [{secs:.2}s]"),
            Err(why) => {
                failed += 1;
                println!("FAIL criterion {name}: {why} [{secs:.2}s]");
            }
        }
    }
    if failed > 0 {
        println!("{failed} acceptance criteria failed");
        std::process::exit(1);
    }
    println!("all 11 acceptance criteria passed");
}
