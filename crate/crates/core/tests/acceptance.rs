//! One PASS/FAIL line per acceptance criterion; exits nonzero if any fails.

use std::collections::HashSet;
use std::process::ExitCode;
use std::time::{Duration, Instant};

use hyperdyn::certify::{certify, certify_uniform, CertifyOptions, Route, Strategy, Verdict};
use hyperdyn::complexdyn::{hyperbolicity_by_critical_orbits, orbit_fate, OrbitFate, DEFAULT_MAX_PERIOD};
use hyperdyn::realdyn::{
    boundary_derivative, classify, compare_u_vs_bv, cylinders, trapping_system, CylinderTree, EscapeClass, EscapeClassifier,
    IntervalSystem,
};
use hyperdyn::symbolic::{metric_distance, verify_semiconjugacy, SequencePrefix, SymbolWord, TransitionMatrix};
use hyperdyn::{Family, Polynomial};
use num_complex::Complex;

type Check = Result<String, String>;

fn ensure(cond: bool, msg: impl Into<String>) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg.into())
    }
}

fn family(lead: f64, roots: &[(f64, u32)], a: f64) -> Family {
    Family::new(Polynomial::with_roots(lead, roots).unwrap(), a)
}

fn system(fam: &Family) -> Result<IntervalSystem<f64>, String> {
    let cls = classify(&fam.g, fam.a, None).map_err(|e| e.to_string())?;
    trapping_system(fam, &cls, 1.1, 0.5).map(|r| r.0).map_err(|e| e.to_string())
}

fn tree(fam: &Family, s: &IntervalSystem<f64>, n: usize) -> Result<CylinderTree<f64>, String> {
    cylinders(fam, s, n).map_err(|e| e.to_string())
}

fn logistic(a: f64) -> Family {
    family(-1.0, &[(0.0, 1), (1.0, 1)], a)
}

fn three_symbol() -> Family {
    family(-1.0, &[(-1.0, 2), (1.0, 1)], 50.0)
}

fn c1() -> Check {
    let fam = logistic(5.0);
    let s = system(&fam)?;
    let r5 = 5f64.sqrt();
    let want = [0.0, (5.0 - r5) / 10.0, (5.0 + r5) / 10.0, 1.0];
    let got: Vec<f64> = s.intervals.iter().flat_map(|b| [b.lo, b.hi]).collect();
    ensure(got.len() == 4, format!("{} intervals", s.intervals.len()))?;
    let err = got.iter().zip(want).map(|(g, w)| (g - w).abs()).fold(0.0, f64::max);
    ensure(err <= 1e-10, format!("endpoint error {err:e}"))?;
    let t = tree(&fam, &s, 10)?;
    let u = certify_uniform(&fam, &s, Some(&t));
    let min = u.min_derivative.unwrap_or(f64::NAN);
    ensure((min - r5).abs() <= 1e-9, format!("min|f'| = {min}"))?;
    let count = t.level(10).len();
    ensure(count == 1024, format!("{count} depth-10 cylinders"))?;
    let widest = s.intervals.iter().map(|b| b.width()).fold(0.0, f64::max);
    let bound = r5.powi(-9) * widest * (1.0 + 1e-6);
    let longest = t.stats[9].max_length;
    ensure(longest <= bound, format!("max length {longest:e} > {bound:e}"))?;
    Ok(format!("endpoint error {err:.1e}, min|f'| = {min:.12}, 1024 cylinders, max length {longest:.3e} <= {bound:.3e}"))
}

fn c2() -> Check {
    let fam = logistic(4.1);
    let s = system(&fam)?;
    let u = certify_uniform(&fam, &s, None);
    let min = u.min_derivative.unwrap_or(f64::NAN);
    ensure((min - 0.41f64.sqrt()).abs() <= 1e-9 && min < 1.0, format!("min|f'| = {min}"))?;
    ensure(u.verdict == Verdict::Undecided, format!("uniform verdict {:?}", u.verdict))?;
    let v = hyperbolicity_by_critical_orbits(&fam, 100).map_err(|e| e.to_string())?;
    ensure(v.is_hyperbolic(), "critical orbit unresolved")?;
    let fate = v.fates().iter().find(|f| (f.point.z - Complex::new(0.5, 0.0)).norm() < 1e-12).map(|f| f.fate);
    let Some(OrbitFate::AttractedToInfinity { step }) = fate else {
        return Err(format!("fate of 1/2: {fate:?}"));
    };
    ensure(step <= 100, format!("escape at {step}"))?;
    Ok(format!("min|f'| = {min:.12} < 1 (uniform undecided); critical point 1/2 escapes at step {step}"))
}

fn c3() -> Check {
    let fam = family(1.0, &[(0.0, 1), (1.0, 2)], 30.0);
    let s = system(&fam)?;
    let t = tree(&fam, &s, 8)?;
    let c = certify(&fam, &s, &t, Strategy::Auto, CertifyOptions::default());
    ensure(c.verdict == Verdict::NonHyperbolic, format!("verdict {:?}", c.verdict))?;
    let Some(Route::Witness { point, orbit, .. }) = &c.route else {
        return Err(format!("route {:?}", c.route));
    };
    ensure(*point == 1.0 && orbit == &[1.0, 0.0, 0.0], format!("witness {point}, orbit {orbit:?}"))?;
    let d = fam.df(1.0).abs();
    ensure(d <= 1e-12, format!("|f'(1)| = {d:e}"))?;
    ensure(fam.f(1.0) == 0.0 && fam.f(0.0) == 0.0, "orbit is not exact")?;
    Ok(format!("NonHyperbolic, witness x = 1, orbit 1 -> 0 -> 0, |f'(1)| = {d:e}"))
}

fn c4() -> Check {
    let g22 = family(1.0, &[(0.0, 2), (1.0, 2)], 1e6);
    let b = boundary_derivative(&g22).map_err(|e| e.to_string())?;
    let rel = ((b.exact - b.identity_value) / b.exact).abs();
    ensure(rel <= 1e-8, format!("identity mismatch {rel:e}"))?;
    let off = ((b.exact + 2.0) / 2.0).abs();
    ensure(off <= 0.01, format!("f'(w_a) = {} is {off:.3e} from -2", b.exact))?;
    let mut scaled = Vec::new();
    for a in [1e6, 1e7, 1e8] {
        let d = boundary_derivative(&family(-1.0, &[(0.0, 2), (1.0, 3)], a)).map_err(|e| e.to_string())?;
        let rel = ((d.exact - d.identity_value) / d.exact).abs();
        ensure(rel <= 1e-8, format!("identity mismatch {rel:e} at a = {a:e}"))?;
        scaled.push(d.exact.abs() * a.cbrt());
    }
    let (lo, hi) = scaled.iter().fold((f64::INFINITY, 0.0f64), |(l, h), &v| (l.min(v), h.max(v)));
    ensure(hi <= lo * 1.05, format!("|f'(w_a)| a^(1/3) spans {lo} .. {hi}"))?;
    Ok(format!("f'(w_a) = {:.6} (identity rel {rel:.1e}); |f'(w_a)| a^(1/3) in [{lo:.4}, {hi:.4}]", b.exact))
}

fn c5() -> Check {
    let g32 = Polynomial::with_roots(1.0, &[(0.0, 3), (1.0, 2)]).unwrap();
    let g23 = Polynomial::with_roots(-1.0, &[(0.0, 2), (1.0, 3)]).unwrap();
    let o32 = compare_u_vs_bv(&g32, 1e6).map_err(|e| e.to_string())?;
    let o23 = compare_u_vs_bv(&g23, 1e6).map_err(|e| e.to_string())?;
    ensure(o32.u_a > o32.b_minus_v, format!("d1=3,d2=2: u = {:e}, b-v = {:e}", o32.u_a, o32.b_minus_v))?;
    ensure(o23.u_a < o23.b_minus_v, format!("d1=2,d2=3: u = {:e}, b-v = {:e}", o23.u_a, o23.b_minus_v))?;
    Ok(format!(
        "x^3(1-x)^2: u = {:.4e} > b-v = {:.4e}; x^2(1-x)^3: u = {:.4e} < b-v = {:.4e}",
        o32.u_a, o32.b_minus_v, o23.u_a, o23.b_minus_v
    ))
}

fn brute_allowable(a: &TransitionMatrix, len: usize) -> usize {
    let m = a.size();
    (0..m.pow(len as u32))
        .filter(|&code| {
            let mut c = code;
            let w: Vec<u8> = (0..len)
                .map(|_| {
                    let s = (c % m) as u8;
                    c /= m;
                    s
                })
                .collect();
            a.is_allowable(&SymbolWord(w))
        })
        .count()
}

fn c6() -> Check {
    let fam = three_symbol();
    let s = system(&fam)?;
    let want = vec![vec![0, 0, 1], vec![0, 0, 1], vec![1, 1, 1]];
    ensure(s.matrix.rows() == want, format!("matrix {:?}", s.matrix.rows()))?;
    let sq = s.matrix.bool_power(2);
    ensure(sq.iter().all(|&v| v), "A^2 has a zero entry")?;
    let r = verify_semiconjugacy(&fam, &s, 6);
    ensure(r.is_clean(), format!("{} violations, first {:?}", r.violations.len(), r.violations.first()))?;
    let t = tree(&fam, &s, 6)?;
    for k in 1..=6 {
        let brute = brute_allowable(&s.matrix, k);
        ensure(t.level(k).len() == brute, format!("depth {k}: {} cylinders vs {brute} words", t.level(k).len()))?;
    }
    Ok(format!("matrix {want:?}, A^2 > 0, {} words checked with 0 violations, counts match", r.words_checked))
}

fn valid_matrices(m: usize) -> Vec<TransitionMatrix> {
    (0u32..1 << (m * m))
        .filter_map(|bits| {
            let rows: Vec<Vec<u8>> = (0..m).map(|i| (0..m).map(|j| ((bits >> (i * m + j)) & 1) as u8).collect()).collect();
            TransitionMatrix::from_rows(&rows).ok()
        })
        .collect()
}

fn brute_index(a: &TransitionMatrix) -> Option<usize> {
    let m = a.size();
    let base: Vec<Vec<bool>> = (0..m).map(|i| (0..m).map(|j| a.get(i, j)).collect()).collect();
    let mut p = base.clone();
    for k in 1..=(m - 1) * (m - 1) + 1 {
        if p.iter().flatten().all(|&v| v) {
            return Some(k);
        }
        p = (0..m).map(|i| (0..m).map(|j| (0..m).any(|l| p[i][l] && base[l][j])).collect()).collect();
    }
    None
}

fn c7() -> Check {
    let mut matrices = 0;
    let mut pairs = 0usize;
    const L: usize = 6;
    for m in 2..=3 {
        for a in valid_matrices(m) {
            matrices += 1;
            let ep = a.is_eventually_positive();
            ensure(ep.index == brute_index(&a) && ep.eventually_positive == ep.index.is_some(), format!("{:?}", a.rows()))?;
            let words = a.enumerate_allowable(L, 1 << 20).map_err(|e| e.to_string())?;
            let shorter: HashSet<SymbolWord> = a.enumerate_allowable(L - 1, 1 << 20).map_err(|e| e.to_string())?.into_iter().collect();
            ensure(words.iter().all(|w| shorter.contains(&w.shifted())), format!("shift leaves {:?}", a.rows()))?;
            let pre: Vec<SequencePrefix> = words.iter().map(|w| SequencePrefix::new(w.0.clone()).unwrap()).collect();
            let d = |x: &SequencePrefix, y: &SequencePrefix| metric_distance(x, y).unwrap();
            for (i, x) in pre.iter().enumerate() {
                for (j, y) in pre.iter().enumerate() {
                    let (lo, hi) = d(x, y);
                    ensure(lo == d(y, x).0 && (lo == 0.0) == (i == j), "symmetry or identity")?;
                    let (slo, _) = d(&x.shift().unwrap(), &y.shift().unwrap());
                    ensure(slo <= 2.0 * hi, "shift expansion bound")?;
                    let z = &pre[(i * 7 + j * 13) % pre.len()];
                    ensure(d(x, z).0 <= lo + d(y, z).0 + 2f64.powi(2 - L as i32), "triangle inequality")?;
                    pairs += 1;
                }
            }
        }
    }
    Ok(format!("{matrices} matrices, {pairs} prefix pairs"))
}

fn c8() -> Check {
    let fam = family(1.0, &[(0.0, 2), (1.0, 2)], 1000.0);
    let s = system(&fam)?;
    let t = tree(&fam, &s, 15)?;
    let mut spans: Vec<(f64, f64)> = t.deepest().iter().map(|c| (c.lo - 1e-9, c.hi + 1e-9)).collect();
    spans.sort_by(|a, b| a.0.total_cmp(&b.0));
    let inside = |x: f64| {
        let k = spans.partition_point(|s| s.0 <= x);
        k > 0 && x <= spans[k - 1].1
    };
    let cls = EscapeClassifier::new(&fam).map_err(|e| e.to_string())?;
    let n = 10_000;
    let (mut esc, mut zero, mut trapped, mut stray) = (0, 0, 0, 0);
    for k in 0..n {
        let x = (k as f64 + 0.5) / n as f64;
        match cls.classify(x, 200) {
            EscapeClass::EscapesAmbient(_) => esc += 1,
            EscapeClass::ConvergesToZero(_) => zero += 1,
            EscapeClass::StaysTrapped(_) => {
                trapped += 1;
                if !inside(x) {
                    stray += 1;
                }
            }
        }
    }
    ensure(stray == 0, format!("{stray} unclassified samples outside the depth-15 union"))?;
    Ok(format!("{esc} escape, {zero} converge to 0, {trapped} unclassified (all inside the depth-15 union)"))
}

fn c9() -> Check {
    let mut msgs = Vec::new();
    let mut failures = Vec::new();
    for (name, fam) in [("fixture 1", logistic(5.0)), ("fixture 6", three_symbol())] {
        let s = system(&fam)?;
        let t = tree(&fam, &s, 15)?;
        let (mut esc, mut zero, mut total) = (0, 0, 0);
        for c in t.deepest() {
            total += 1;
            match orbit_fate(&fam, Complex::new(c.midpoint(), 0.0), 500, DEFAULT_MAX_PERIOD).map_err(|e| e.to_string())? {
                OrbitFate::AttractedToInfinity { .. } => esc += 1,
                OrbitFate::AttractedToCycle { point, .. } if point.norm() < 1e-8 => zero += 1,
                _ => {}
            }
        }
        let line = format!("{name}: {esc}/{total} midpoints escape, {zero} converge to 0 within 500 steps");
        if esc + zero > 0 {
            failures.push(line.clone());
        }
        msgs.push(line);
    }
    if failures.is_empty() {
        Ok(msgs.join("; "))
    } else {
        Err(msgs.join("; "))
    }
}

fn main() -> ExitCode {
    let criteria: [(u32, &str, fn() -> Check, Duration); 9] = [
        (1, "logistic horseshoe", c1, Duration::from_secs(2)),
        (2, "route switching at a = 4.1", c2, Duration::from_secs(1)),
        (3, "non-hyperbolic witness", c3, Duration::from_secs(5)),
        (4, "boundary derivative asymptotics", c4, Duration::from_secs(5)),
        (5, "fixed point ordering", c5, Duration::from_secs(5)),
        (6, "three-symbol system", c6, Duration::from_secs(3)),
        (7, "symbolic kernel", c7, Duration::from_secs(30)),
        (8, "escape classification", c8, Duration::from_secs(5)),
        (9, "cylinder midpoints under complex iteration", c9, Duration::from_secs(30)),
    ];
    let mut failed = 0;
    for (id, name, check, limit) in criteria {
        let start = Instant::now();
        let result = std::panic::catch_unwind(check).unwrap_or_else(|_| Err("panicked".into()));
        let elapsed = start.elapsed();
        let result = result.and_then(|m| {
            if elapsed <= limit {
                Ok(m)
            } else {
                Err(format!("{m}; runtime {elapsed:?} exceeds {limit:?}"))
            }
        });
        match result {
            Ok(m) => println!("PASS criterion {id} ({name}): {m} [{:.3} s]", elapsed.as_secs_f64()),
            Err(m) => {
                failed += 1;
                println!("FAIL criterion {id} ({name}): {m} [{:.3} s]", elapsed.as_secs_f64());
            }
        }
    }
    println!("acceptance: {} passed, {failed} failed", criteria.len() - failed);
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
