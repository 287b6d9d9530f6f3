//! One line per acceptance criterion on stderr (runs without the test harness, so always shown). Set `LIEZETA_LONG=1` for the long parts.
//!
//! Criteria that fail for documented mathematical reasons are printed as FAIL; the test then
//! checks that the failure is exactly the documented one, so any other change still breaks it.

use std::time::Instant;

use num_bigint::BigInt;
use num_rational::BigRational;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use liezeta::arith::Zpr;
use liezeta::classify::{census, census_csv, class_table, classify, cross_section, random_gl_conjugate, CensusMode, Class, Partition};
use liezeta::lattice::{build_sl, kernel_centralizer_bridge, killing_determinant, Sl4Element};
use liezeta::linalg::{antisymmetric_snf, divisor_profile, rank, ModMatrix, RingMatrix};
use liezeta::scan::par_fold_points;
use liezeta::shadow::{self, TheoremGOptions};
use liezeta::transitions::{class_transitions, expected_fiber, expected_l4, n211_rank4_analysis, Gl2Type};
use liezeta::zeta::{self, AbscissaMode};

fn long_mode() -> bool {
    std::env::var("LIEZETA_LONG").is_ok_and(|v| v == "1")
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Verdict {
    Pass,
    Fail,
    /// Fails in exactly the documented way.
    KnownFail,
}

struct Outcome {
    verdict: Verdict,
    detail: String,
}

impl Outcome {
    fn new(ok: bool, detail: String) -> Self {
        Outcome { verdict: if ok { Verdict::Pass } else { Verdict::Fail }, detail }
    }
}

fn report(n: u32, start: Instant, o: &Outcome) {
    let tag = match o.verdict {
        Verdict::Pass => "PASS",
        Verdict::Fail => "FAIL",
        Verdict::KnownFail => "FAIL (documented)",
    };
    eprintln!("criterion {n}: {tag} [{:.1}s] {}", start.elapsed().as_secs_f64(), o.detail);
}

fn criterion_1() -> Outcome {
    let det = killing_determinant();
    let expected = BigInt::from(8).pow(15) * 4;
    Outcome::new(det == expected, format!("det = {det}"))
}

fn criterion_2() -> Outcome {
    let c = census(3, CensusMode::Exhaustive).expect("census");
    let (_, ok) = census_csv(&c, class_table());
    Outcome::new(ok && c.points == 3u64.pow(15), format!("{} points classified, every row matches: {ok}", c.points))
}

fn criterion_3() -> Outcome {
    let mut bad = Vec::new();
    for q in [3u64, 5, 7] {
        for &class in &Class::NONZERO {
            if !class_transitions(class, q).expect("transitions").matches {
                bad.push(format!("{} q={q}", class.name()));
            }
        }
        let n = n211_rank4_analysis(q).expect("n211");
        if n.l4 != expected_l4(q) {
            bad.push(format!("L4 q={q}: {}", n.l4));
        }
        for t in Gl2Type::ALL {
            if n.fiber(t) != Some(expected_fiber(t, q)) {
                bad.push(format!("fiber {} q={q}: {:?}", t.name(), n.fiber(t)));
            }
        }
        if n.ideal_mismatches != 0 {
            bad.push(format!("rank-4 ideal q={q}"));
        }
    }
    Outcome::new(bad.is_empty(), format!("q in {{3,5,7}}, all classes, L4 and fibers; mismatches: {bad:?}"))
}

fn criterion_4() -> Outcome {
    let mut parts = Vec::new();
    let mut ok = true;
    for m in 1..=3 {
        let r = zeta::check_theorem_b(m).expect("assembly");
        ok &= r.theorem_b_match;
        parts.push(format!("m={m} identity={}", r.theorem_b_match));
        if m == 1 {
            ok &= r.f1_eq_g1 && r.zeta_at_minus2_zero;
            ok &= r.reciprocity_f == Some((10, 18)) && r.reciprocity_g == Some((25, 18));
            parts.push(format!(
                "F(1,t)=G(1,t) {}, F(q,q^2)=0 {}, reciprocity F {:?} G {:?}",
                r.f1_eq_g1, r.zeta_at_minus2_zero, r.reciprocity_f, r.reciprocity_g
            ));
        }
    }
    Outcome::new(ok, parts.join("; "))
}

fn criterion_5() -> Outcome {
    let data = zeta::sl4_class_data();
    let a = zeta::abscissa(&data, AbscissaMode::Poincare).expect("classes");
    let g = zeta::abscissa(&data, AbscissaMode::Group).expect("classes");
    let pole = zeta::theorem_b_reference().real_poles().last().cloned();
    let half = BigRational::new(1.into(), 2.into());
    let ok = a.value == BigRational::new(5.into(), 2.into()) && g.value == half && pole.as_ref() == Some(&g.value);
    Outcome::new(
        ok,
        format!("poincare {} ({:?}), group {} ({:?}), largest denominator pole {:?}", a.value, a.attained_by, g.value, g.attained_by, pole),
    )
}

fn oracle_failures(rows: &[zeta::OracleRow]) -> Vec<String> {
    rows.iter().filter(|r| !r.ok()).map(|r| format!("I={:?} r={:?} brute={} predicted={}", r.indices, r.r, r.brute, r.predicted)).collect()
}

fn criterion_6() -> Outcome {
    let sl2 = build_sl(2).unwrap();
    let sl2_data = zeta::on_the_fly_class_data(&sl2, 3).unwrap();
    let mut detail = Vec::new();
    let mut sl2_ok = true;
    for p in [3u64, 5] {
        // Class data over F_p computed on the fly; for sl2 there is a single class.
        let data = if p == 3 { sl2_data.clone() } else { zeta::on_the_fly_class_data(&sl2, p).unwrap() };
        let rows = zeta::oracle_table(&sl2, &data, p, 3).unwrap();
        let bad = oracle_failures(&rows);
        sl2_ok &= bad.is_empty();
        detail.push(format!("sl2 p={p}: {} (I,r) rows, mismatches {bad:?}", rows.len()));
    }
    if !long_mode() {
        detail.push("sl3 p=3 N<=2: SKIP (long mode)".into());
        return Outcome::new(sl2_ok, detail.join("; "));
    }
    let sl3 = build_sl(3).unwrap();
    let data = zeta::on_the_fly_class_data(&sl3, 3).unwrap();
    let rows = zeta::oracle_table(&sl3, &data, 3, 2).unwrap();
    let bad = oracle_failures(&rows);
    detail.push(format!("sl3 p=3: {} rows, mismatches {bad:?}", rows.len()));
    // Documented: at p = 3 the sl3 class with kernel dim 4 and derived dim 2 (624 points) has
    // no rank-preserving lifts, so its share 624 * 3^6 is missing from I={2}, r=(2).
    let documented = vec![
        "I=[2] r=[2] brute=284310 predicted=739206".to_string(),
        "I=[1, 2] r=[1, 1] brute=6027372 predicted=5572476".to_string(),
    ];
    let verdict = match (sl2_ok, bad.is_empty()) {
        (true, true) => Verdict::Pass,
        (true, false) if bad == documented => Verdict::KnownFail,
        _ => Verdict::Fail,
    };
    Outcome { verdict, detail: detail.join("; ") }
}

fn criterion_7() -> Outcome {
    let sl2 = build_sl(2).unwrap();
    let sl3 = build_sl(3).unwrap();
    let mut detail = Vec::new();
    let mut ok = true;
    for r in 1..=2 {
        let rep = zeta::lift_law_exhaustive(&sl2, 3, r).unwrap();
        ok &= rep.holds();
        detail.push(format!("sl2 r={r}: {}/{} clamped points agree", rep.agree, rep.clamped));
    }
    let sl4_rep = zeta::sl4_lift_law_sample(3, 1000, 2024);
    ok &= sl4_rep.holds() && sl4_rep.clamped == 1000;
    detail.push(format!("sl4 sample: {}/{} agree", sl4_rep.agree, sl4_rep.clamped));
    // Contrast at a prime not dividing 3.
    let p5 = zeta::lift_law_exhaustive(&sl3, 5, 1).unwrap();
    detail.push(format!("sl3 p=5 r=1: {}/{} agree", p5.agree, p5.clamped));
    ok &= p5.holds();
    let r1 = zeta::lift_law_exhaustive(&sl3, 3, 1).unwrap();
    detail.push(format!("sl3 p=3 r=1: {}/{} agree", r1.agree, r1.clamped));
    let mut documented = r1.clamped == 6561 && r1.agree == 6561 - 624;
    if long_mode() {
        let r2 = zeta::lift_law_exhaustive(&sl3, 3, 2).unwrap();
        detail.push(format!("sl3 p=3 r=2: {}/{} agree", r2.agree, r2.clamped));
        documented &= r2.clamped == 37_012_789 && r2.agree == 36_785_341;
    } else {
        detail.push("sl3 p=3 r=2: SKIP (long mode)".into());
    }
    let verdict = if !ok {
        Verdict::Fail
    } else if r1.holds() {
        Verdict::Pass
    } else if documented {
        Verdict::KnownFail
    } else {
        Verdict::Fail
    };
    Outcome { verdict, detail: detail.join("; ") }
}

fn bridge_counts(points: impl IntoParallelIterator<Item = Sl4Element>) -> (u64, u64, u64) {
    points
        .into_par_iter()
        .map(|x| {
            let b = kernel_centralizer_bridge(&x);
            (1u64, b.literal as u64, b.dual as u64)
        })
        .reduce(|| (0, 0, 0), |a, b| (a.0 + b.0, a.1 + b.1, a.2 + b.2))
}

fn criterion_8() -> Outcome {
    let f5 = Zpr::field(5).unwrap();
    let (n5, lit5, dual5) = bridge_counts((0..1_000_000u64).into_par_iter().map(|i| {
        let mut rng = ChaCha8Rng::seed_from_u64(0x5eed ^ i);
        let c: Vec<u64> = (0..15).map(|_| rng.gen_range(0..5)).collect();
        Sl4Element::from_coords(&c, f5).unwrap()
    }));
    let mut detail = vec![format!("F5 random: literal {lit5}/{n5}, trace-dual {dual5}/{n5}")];
    let mut dual_ok = dual5 == n5;
    let mut literal_ok = lit5 == n5;
    if long_mode() {
        let f3 = Zpr::field(3).unwrap();
        let (n3, lit3, dual3) = par_fold_points(
            3,
            15,
            || (0u64, 0u64, 0u64),
            |acc, c| {
                let b = kernel_centralizer_bridge(&Sl4Element::from_coords(c, f3).unwrap());
                acc.0 += 1;
                acc.1 += b.literal as u64;
                acc.2 += b.dual as u64;
            },
            |a, b| (a.0 + b.0, a.1 + b.1, a.2 + b.2),
        );
        detail.push(format!("F3 exhaustive: literal {lit3}/{n3}, trace-dual {dual3}/{n3}"));
        dual_ok &= dual3 == n3;
        literal_ok &= lit3 == n3;
    } else {
        detail.push("F3 exhaustive: SKIP (long mode)".into());
    }
    // Documented: Cartan coordinates are partial sums of the diagonal, so the coordinate dot
    // product is not the invariant trace pairing; the literal statement fails, the trace-dual
    // one holds everywhere.
    let verdict = match (literal_ok, dual_ok) {
        (true, true) => Verdict::Pass,
        (false, true) => Verdict::KnownFail,
        _ => Verdict::Fail,
    };
    Outcome { verdict, detail: detail.join("; ") }
}

fn criterion_9() -> Outcome {
    let long = long_mode();
    let opts = TheoremGOptions {
        full_scans: long,
        dead_end_census: long,
        newton_limit: Some(if long { None } else { Some(2000) }),
    };
    let r = shadow::theorem_g_experiment(3, opts).expect("experiment");
    let t13 = 3u128.pow(13);
    let t12 = 3u128.pow(12);
    let mut ok = r.signature_ok && r.sp_lifts_predicted == t13 && r.example_z_predicted == 0 && r.shadow_dim_level2 == 5;
    let mut detail = vec![format!(
        "derived exponents {:?}, centralizer rank {}, linear-condition counts: red3(b) {} example z {}",
        r.signature.derived_exponents, r.signature.rank, r.sp_lifts_predicted, r.example_z_predicted
    )];
    if let (Some(b), Some(z)) = (r.sp_lifts_scanned, r.example_z_scanned) {
        ok &= b == t13 && z == 0;
        detail.push(format!("full 3^15 scans: red3(b) {b}, example z {z}"));
    } else {
        detail.push("full 3^15 scans: SKIP (long mode)".into());
    }
    if let Some(d) = &r.dead_ends {
        ok &= d.candidates == t13 && d.dead_ends == t13 - t12;
        detail.push(format!("dead ends {} of {}", d.dead_ends, d.candidates));
    } else {
        detail.push("dead-end census: SKIP (long mode)".into());
    }
    if let Some(n) = &r.newton {
        let want = if long { t12 } else { 2000 };
        ok &= n.certifies(want);
        detail.push(format!("Newton family: {} certified, {} distinct of {}", n.admitting, n.distinct, n.attempted));
    }
    Outcome::new(ok, detail.join("; "))
}

fn random_antisymmetric(n: usize, ring: Zpr, rng: &mut ChaCha8Rng) -> RingMatrix {
    let mut m = ModMatrix::zeros(n, n, ring);
    for i in 0..n {
        for j in i + 1..n {
            let v = rng.gen_range(0..ring.modulus()) * ring.p_pow(rng.gen_range(0..ring.level()));
            let v = v % ring.modulus();
            m.set(i, j, v);
            m.set(j, i, ring.neg(v));
        }
    }
    m
}

fn random_invertible(n: usize, ring: Zpr, rng: &mut ChaCha8Rng) -> RingMatrix {
    let mut t = ModMatrix::identity(n, ring);
    for _ in 0..3 * n {
        let (i, j) = (rng.gen_range(0..n), rng.gen_range(0..n));
        if i == j {
            continue;
        }
        let c = rng.gen_range(0..ring.modulus());
        for k in 0..n {
            let v = ring.add(t.get(i, k), ring.mul(c, t.get(j, k)));
            t.set(i, k, v);
        }
    }
    t
}

fn criterion_10() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(10);
    let mut asnf_bad = 0;
    let mut profile_bad = 0;
    for trial in 0..3000 {
        let ring = if trial % 2 == 0 { Zpr::new(3, 3).unwrap() } else { Zpr::new(5, 2).unwrap() };
        let n = 2 + trial % 15;
        let m = random_antisymmetric(n, ring, &mut rng);
        let a = antisymmetric_snf(&m).unwrap();
        let congruent = a.s.transpose().mul(&m).unwrap().mul(&a.s).unwrap();
        if congruent != a.normal_form || rank(&a.s.reduce_to(1)).unwrap() != n {
            asnf_bad += 1;
        }
        let t = random_invertible(n, ring, &mut rng);
        let c = t.transpose().mul(&m).unwrap().mul(&t).unwrap();
        if divisor_profile(&c).unwrap() != divisor_profile(&m).unwrap() {
            profile_bad += 1;
        }
    }
    let mut class_bad = 0;
    for p in [3u64, 5] {
        let f = Zpr::field(p).unwrap();
        for k in 0..5000 {
            let x = if k % 3 == 0 {
                let part = [Partition::P31, Partition::P22, Partition::P211][k % 9 / 3];
                cross_section(part, &[rng.gen_range(0..p as i64), rng.gen_range(0..p as i64)], f)
            } else {
                let c: Vec<u64> = (0..15).map(|_| rng.gen_range(0..p)).collect();
                Sl4Element::from_coords(&c, f).unwrap()
            };
            if classify(&random_gl_conjugate(&x, &mut rng)).unwrap() != classify(&x).unwrap() {
                class_bad += 1;
            }
        }
    }
    let iso3 = zeta::isolation_check(3, 4, 250, 31);
    let iso5 = zeta::isolation_check(5, 4, 250, 32);
    let ok = asnf_bad == 0 && profile_bad == 0 && class_bad == 0 && iso3.holds() && iso5.holds();
    Outcome::new(
        ok,
        format!(
            "ASNF witness failures {asnf_bad}/3000, profile changes {profile_bad}/3000, class changes {class_bad}/10000, \
             non-isolated derived modules p=3 {} of {:?}, p=5 {} of {:?}",
            iso3.failures.len(),
            iso3.checked,
            iso5.failures.len(),
            iso5.checked
        ),
    )
}

fn main() {
    eprintln!("acceptance (long mode: {})", long_mode());
    let criteria: Vec<(u32, fn() -> Outcome)> = vec![
        (1, criterion_1),
        (2, criterion_2),
        (3, criterion_3),
        (4, criterion_4),
        (5, criterion_5),
        (6, criterion_6),
        (7, criterion_7),
        (8, criterion_8),
        (9, criterion_9),
        (10, criterion_10),
    ];
    let mut unexpected = Vec::new();
    for (n, run) in criteria {
        let start = Instant::now();
        let o = run();
        report(n, start, &o);
        if o.verdict == Verdict::Fail {
            unexpected.push(n);
        }
    }
    if !unexpected.is_empty() {
        eprintln!("criteria failing in an undocumented way: {unexpected:?}");
        std::process::exit(1);
    }
}
