//! Acceptance suite: one PASS/FAIL line per criterion.

mod common;

use std::collections::{BTreeMap, BTreeSet};
use std::time::{Duration, Instant};

use laplace_ci::analysis::{
    accuracy_study, comparison_table, paper_cases, Approximation, BoundSide, StudyConfig,
};
use laplace_ci::export::{parse_csv, render_records, write_export, ExportFormat, ExportSpec};
use laplace_ci::report::limit_rows;
use laplace_ci::{
    clopper_pearson, normal_interval_with, one_sided_interval, Alpha, CriticalValue, Interval,
    Method, Observation, PrefixMassGrid, Side, DEFAULT_SUBDIVISIONS,
};

const K: usize = DEFAULT_SUBDIVISIONS;
const H: f64 = 1.0 / K as f64;

struct Outcome {
    pass: bool,
    summary: String,
    details: Vec<String>,
}

impl Outcome {
    fn new(violations: Vec<String>, summary: String) -> Self {
        Outcome {
            pass: violations.is_empty(),
            summary,
            details: violations,
        }
    }
}

fn obs(n: u64, x: u64) -> Observation {
    Observation::new(n, x).unwrap()
}

fn alpha(a: f64) -> Alpha {
    Alpha::new(a).unwrap()
}

/// Published limits: numeric, normal, Clopper-Pearson (lower, upper).
const TABLE_I: [(u64, u64, [f64; 6]); 9] = [
    (5, 0, [0.00421, 0.45925, 0.00000, 0.00000, 0.00000, 0.52181]),
    (
        5,
        1,
        [0.04327, 0.64123, -0.15061, 0.55061, 0.00505, 0.71641],
    ),
    (
        5,
        2,
        [0.11811, 0.77722, -0.02941, 0.82941, 0.05274, 0.85336],
    ),
    (5, 3, [0.22277, 0.88188, 0.17058, 1.02941, 0.14663, 0.94725]),
    (5, 4, [0.35876, 0.95672, 0.44938, 1.15061, 0.28358, 0.99494]),
    (5, 5, [0.54074, 0.99578, 1.00000, 1.00000, 0.47818, 1.00000]),
    (
        1000,
        0,
        [0.00002, 0.00367, 0.00000, 0.00000, 0.00000, 0.00368],
    ),
    (
        1000,
        500,
        [0.46906, 0.53093, 0.46900, 0.53099, 0.46854, 0.53145],
    ),
    (
        1000,
        1000,
        [0.99632, 0.99997, 1.00000, 1.00000, 0.99631, 1.00000],
    ),
];

const TABLE_IV: [(u64, u64, [f64; 6]); 9] = [
    (5, 0, [0.00083, 0.58648, 0.00000, 0.00000, 0.00000, 0.65342]),
    (
        5,
        1,
        [0.01872, 0.74600, -0.26152, 0.66152, 0.00100, 0.81490],
    ),
    (
        5,
        2,
        [0.06627, 0.85640, -0.16524, 0.96524, 0.02288, 0.91717],
    ),
    (5, 3, [0.14359, 0.93372, 0.03475, 1.16524, 0.08282, 0.97711]),
    (5, 4, [0.25399, 0.98127, 0.33847, 1.26152, 0.18509, 0.99899]),
    (5, 5, [0.41351, 0.99916, 1.00000, 1.00000, 0.34657, 1.00000]),
    (
        1000,
        0,
        [0.00000, 0.00527, 0.00000, 0.00000, 0.00000, 0.00528],
    ),
    (
        1000,
        500,
        [0.45937, 0.54062, 0.45920, 0.54079, 0.45885, 0.54114],
    ),
    (
        1000,
        1000,
        [0.99472, 0.99999, 1.00000, 1.00000, 0.99471, 1.00000],
    ),
];

/// `(lower side?, n, x, error %)` for each published error table.
type ErrorTable = &'static [(bool, u64, u64, f64)];

const TABLE_II: ErrorTable = &[
    (true, 5, 3, -23.428),
    (true, 5, 4, 25.258),
    (true, 1000, 500, -0.011),
    (false, 5, 1, -14.131),
    (false, 5, 2, 6.715),
    (false, 1000, 500, 0.010),
];

const TABLE_III: ErrorTable = &[
    (true, 5, 1, -88.327),
    (true, 5, 2, -55.344),
    (true, 5, 3, -34.179),
    (true, 5, 4, -20.955),
    (true, 5, 5, -11.569),
    (true, 1000, 500, -0.109),
    (true, 1000, 1000, -0.000),
    (false, 5, 0, 13.622),
    (false, 5, 1, 11.724),
    (false, 5, 2, 9.797),
    (false, 5, 3, 7.412),
    (false, 5, 4, 3.994),
    (false, 1000, 0, 0.100),
    (false, 1000, 500, 0.096),
];

const TABLE_V: ErrorTable = &[
    (true, 5, 3, -75.799),
    (true, 5, 4, 33.261),
    (true, 1000, 500, -0.035),
    (false, 5, 1, -11.324),
    (false, 5, 2, 12.709),
    (false, 1000, 500, 0.030),
];

const TABLE_VI: ErrorTable = &[
    (true, 5, 1, -94.647),
    (true, 5, 2, -65.477),
    (true, 5, 3, -42.317),
    (true, 5, 4, -27.124),
    (true, 5, 5, -16.188),
    (true, 1000, 500, -0.113),
    (true, 1000, 1000, -0.000),
    (false, 5, 0, 11.414),
    (false, 5, 1, 9.235),
    (false, 5, 2, 7.095),
    (false, 5, 3, 4.647),
    (false, 5, 4, 1.805),
    (false, 1000, 0, 0.107),
    (false, 1000, 500, 0.096),
];

/// Published 8-decimal values: lower at k, 2k; upper at k, 2k.
const TABLE_VII: [(u64, u64, [f64; 4]); 9] = [
    (5, 0, [0.00421047, 0.00421094, 0.45925807, 0.45925807]),
    (5, 1, [0.04327201, 0.04327201, 0.64123439, 0.64123487]),
    (5, 2, [0.11811733, 0.11811733, 0.77722167, 0.77722215]),
    (5, 3, [0.22277832, 0.22277784, 0.88188266, 0.88188266]),
    (5, 4, [0.35876560, 0.35876512, 0.95672798, 0.95672798]),
    (5, 5, [0.54074192, 0.54074192, 0.99578952, 0.99578905]),
    (1000, 0, [0.00002574, 0.00002527, 0.00367832, 0.00367832]),
    (1000, 500, [0.46906375, 0.46906328, 0.53093624, 0.53093671]),
    (1000, 1000, [0.99632167, 0.99632167, 0.99997425, 0.99997472]),
];

const TABLE_VIII: [(u64, u64, [f64; 4]); 9] = [
    (5, 0, [0.00083446, 0.00083494, 0.58648204, 0.58648157]),
    (5, 1, [0.01872062, 0.01872062, 0.74600696, 0.74600744]),
    (5, 2, [0.06627941, 0.06627893, 0.85640430, 0.85640430]),
    (5, 3, [0.14359569, 0.14359569, 0.93372058, 0.93372106]),
    (5, 4, [0.25399303, 0.25399255, 0.98127937, 0.98127937]),
    (5, 5, [0.41351795, 0.41351842, 0.99916553, 0.99916505]),
    (1000, 0, [0.00000476, 0.00000524, 0.00527858, 0.00527906]),
    (1000, 500, [0.45937061, 0.45937013, 0.54062938, 0.54062986]),
    (1000, 1000, [0.99472141, 0.99472093, 0.99999523, 0.99999475]),
];

fn limits_table(published: &[(u64, u64, [f64; 6]); 9], a: f64) -> Outcome {
    let start = Instant::now();
    let rows = limit_rows(&paper_cases(), alpha(a), &StudyConfig::paper()).unwrap();
    let elapsed = start.elapsed();
    let mut violations = Vec::new();
    let mut worst = 0.0f64;
    for (row, (n, x, expected)) in rows.iter().zip(published) {
        assert_eq!((row.obs.n(), row.obs.x()), (*n, *x));
        let got = [
            row.exact.lower(),
            row.exact.upper(),
            row.normal.lower(),
            row.normal.upper(),
            row.clopper_pearson.lower(),
            row.clopper_pearson.upper(),
        ];
        for (col, (g, e)) in got.iter().zip(expected).enumerate() {
            let d = (g - e).abs();
            worst = worst.max(d);
            if d > 2e-5 {
                violations.push(format!(
                    "n={n} x={x} column {col}: got {g:.8}, published {e:.5}"
                ));
            }
        }
    }
    if elapsed > Duration::from_secs(60) {
        violations.push(format!("runtime {elapsed:?} exceeds 60 s"));
    }
    Outcome::new(
        violations,
        format!(
            "54 limits, max |diff| {worst:.2e}, {:.2} s",
            elapsed.as_secs_f64()
        ),
    )
}

fn accuracy_table(published: &[(u64, u64, [f64; 4]); 9], a: f64) -> (Vec<String>, f64) {
    let rows = accuracy_study(&paper_cases(), alpha(a), &StudyConfig::paper()).unwrap();
    let tol = 2.0 * H;
    let mut violations = Vec::new();
    let mut worst = 0.0f64;
    for (pair, (n, x, expected)) in rows.chunks(2).zip(published) {
        let got = [
            pair[0].value_k,
            pair[0].value_2k,
            pair[1].value_k,
            pair[1].value_2k,
        ];
        for (col, (g, e)) in got.iter().zip(expected).enumerate() {
            let d = (g - e).abs();
            worst = worst.max(d);
            if d > tol {
                violations.push(format!(
                    "alpha {a} n={n} x={x} value {col}: got {g:.8}, published {e:.8}"
                ));
            }
        }
        for row in pair {
            if let Some(d) = row.first_differing_decimal {
                if d < 6 {
                    violations.push(format!(
                        "alpha {a} n={n} x={x} {}: first differing decimal {d}",
                        row.side.name()
                    ));
                }
            }
        }
    }
    (violations, worst)
}

fn error_table(
    published: ErrorTable,
    method: Approximation,
    a: f64,
    label: &str,
) -> (Vec<String>, f64) {
    let rows = comparison_table(&paper_cases(), alpha(a), method, &StudyConfig::paper()).unwrap();
    let ours: BTreeMap<(bool, u64, u64), f64> = rows
        .iter()
        .filter_map(|r| {
            let key = (r.side == BoundSide::Lower, r.obs.n(), r.obs.x());
            r.error_percent.map(|e| (key, e))
        })
        .collect();
    let theirs: BTreeMap<(bool, u64, u64), f64> = published
        .iter()
        .map(|&(l, n, x, e)| ((l, n, x), e))
        .collect();
    let mut violations = Vec::new();
    let ours_keys: BTreeSet<_> = ours.keys().collect();
    let theirs_keys: BTreeSet<_> = theirs.keys().collect();
    for k in ours_keys.symmetric_difference(&theirs_keys) {
        violations.push(format!("Table {label}: row set differs at {k:?}"));
    }
    let mut worst = 0.0f64;
    for (k, e) in &theirs {
        if let Some(g) = ours.get(k) {
            let d = (g - e).abs();
            worst = worst.max(d);
            if d > 0.002 + 1e-12 {
                let side = if k.0 { "lower" } else { "upper" };
                violations.push(format!(
                    "Table {label} {side} n={} x={}: computed {g:.4}, published {e:.3}",
                    k.1, k.2
                ));
            }
        }
    }
    (violations, worst)
}

fn appendix_case() -> Outcome {
    let o = obs(1, 0);
    let tol = 2.0 * H;
    let mut violations = Vec::new();
    let one_sided = one_sided_interval(o, alpha(0.05), Side::UpperBound, K).unwrap();
    let two_sided = laplace_ci::exact_interval(o, alpha(0.05), K).unwrap();
    let checks = [
        (
            "one-sided upper",
            one_sided.upper(),
            1.0 - 0.05f64.sqrt(),
            "0.77639",
            5,
        ),
        (
            "equal-tailed lower",
            two_sided.lower(),
            1.0 - 0.975f64.sqrt(),
            "0.0125",
            4,
        ),
        (
            "equal-tailed upper",
            two_sided.upper(),
            1.0 - 0.025f64.sqrt(),
            "0.84188",
            5,
        ),
    ];
    for (name, got, closed_form, printed, places) in checks {
        if (got - closed_form).abs() > tol {
            violations.push(format!("{name}: {got:.8} vs closed form {closed_form:.8}"));
        }
        let shown = laplace_ci::analysis::fixed_truncated(got, places);
        if shown != printed {
            violations.push(format!("{name}: displays as {shown}, published {printed}"));
        }
    }
    if one_sided.lower() != 0.0 {
        violations.push("one-sided interval does not start at 0".into());
    }
    Outcome::new(
        violations,
        format!(
            "one-sided [0, {:.8}], equal-tailed ({:.8}, {:.8})",
            one_sided.upper(),
            two_sided.lower(),
            two_sided.upper()
        ),
    )
}

struct SweepPoint {
    n: u64,
    x: u64,
    total: f64,
    exact: [Interval; 2],
    normal: [Interval; 2],
    cp: [Interval; 2],
}

const SWEEP_N: [u64; 8] = [1, 2, 3, 5, 10, 50, 200, 1000];
const SWEEP_ALPHA: [f64; 2] = [0.05, 0.01];

fn sweep() -> Vec<SweepPoint> {
    use rayon::prelude::*;
    let cases: Vec<(u64, u64)> = SWEEP_N
        .iter()
        .flat_map(|&n| (0..=n).map(move |x| (n, x)))
        .collect();
    cases
        .par_iter()
        .map(|&(n, x)| {
            let o = obs(n, x);
            let grid = PrefixMassGrid::build(o, K).unwrap();
            let exact = SWEEP_ALPHA
                .map(|a| laplace_ci::intervals::exact_interval_from_grid(&grid, alpha(a)).unwrap());
            SweepPoint {
                n,
                x,
                total: grid.total(),
                exact,
                normal: SWEEP_ALPHA
                    .map(|a| normal_interval_with(o, alpha(a), CriticalValue::Exact)),
                cp: SWEEP_ALPHA.map(|a| clopper_pearson(o, alpha(a))),
            }
        })
        .collect()
}

fn oracle_equivalence(points: &[SweepPoint]) -> Outcome {
    let lf = common::ln_factorials(1002);
    let tol = 2.0 * H;
    let mut violations = Vec::new();
    let mut worst = 0.0f64;
    for p in points {
        for (j, &a) in SWEEP_ALPHA.iter().enumerate() {
            let (lo, up) = common::beta_equal_tailed(&lf, p.n as usize, p.x as usize, a);
            for (name, got, want) in [
                ("lower", p.exact[j].lower(), lo),
                ("upper", p.exact[j].upper(), up),
            ] {
                let d = (got - want).abs();
                worst = worst.max(d);
                if d > tol {
                    violations.push(format!(
                        "n={} x={} alpha={a} {name}: {got:.10} vs oracle {want:.10}",
                        p.n, p.x
                    ));
                }
            }
        }
    }
    Outcome::new(
        violations,
        format!(
            "{} bounds, max |diff| {:.2} grid steps",
            points.len() * 4,
            worst / H
        ),
    )
}

fn property_suite(points: &[SweepPoint]) -> Outcome {
    let tol = 2.0 * H;
    let mut v = Vec::new();
    let index: BTreeMap<(u64, u64), &SweepPoint> = points.iter().map(|p| ((p.n, p.x), p)).collect();
    for p in points {
        let id = format!("n={} x={}", p.n, p.x);
        let norm = ((p.n + 1) as f64 * p.total - 1.0).abs();
        if norm > 1e-9 {
            v.push(format!("{id}: normalization off by {norm:.2e}"));
        }
        let laplace = (p.x as f64 + 1.0) / (p.n as f64 + 2.0);
        for (j, &a) in SWEEP_ALPHA.iter().enumerate() {
            let e = &p.exact[j];
            if !(e.lower() > 0.0 && e.upper() < 1.0) {
                v.push(format!("{id} alpha={a}: exact interval touches 0 or 1"));
            }
            if !(p.cp[j].lower() <= e.lower() && e.upper() <= p.cp[j].upper()) {
                v.push(format!("{id} alpha={a}: not inside Clopper-Pearson"));
            }
            if !(e.lower() < laplace && laplace < e.upper()) {
                v.push(format!("{id} alpha={a}: Laplace estimate outside"));
            }
            let mirror = index[&(p.n, p.n - p.x)];
            let pairs = [
                ("exact", e, &mirror.exact[j], tol),
                ("normal", &p.normal[j], &mirror.normal[j], 1e-12),
                ("clopper-pearson", &p.cp[j], &mirror.cp[j], 1e-9),
            ];
            for (name, a_int, b_int, t) in pairs {
                if (a_int.lower() - (1.0 - b_int.upper())).abs() > t
                    || (a_int.upper() - (1.0 - b_int.lower())).abs() > t
                {
                    v.push(format!("{id} alpha={a}: {name} not reflection symmetric"));
                }
            }
        }
        for ints in [&p.exact, &p.normal, &p.cp] {
            if !ints[1].encloses(&ints[0]) {
                v.push(format!(
                    "{id}: {} 99% interval does not contain 95% interval",
                    ints[0].method()
                ));
            }
        }
    }
    Outcome::new(
        v,
        format!("6 properties over {} observations", points.len()),
    )
}

fn determinism() -> Outcome {
    let dir = tempfile::tempdir().unwrap();
    let mut violations = Vec::new();
    let mut spec = ExportSpec::new(vec![5, 20, 50], dir.path().join("a.csv"));
    spec.alphas = SWEEP_ALPHA.map(alpha).to_vec();
    spec.methods = Method::ALL.to_vec();
    let manifest = write_export(&spec).unwrap();
    let mut spec_b = spec.clone();
    spec_b.out = dir.path().join("b.csv");
    write_export(&spec_b).unwrap();
    let a = std::fs::read(dir.path().join("a.csv")).unwrap();
    let b = std::fs::read(dir.path().join("b.csv")).unwrap();
    if a != b {
        violations.push("two export runs differ".into());
    }
    let text = String::from_utf8(a).unwrap();
    let parsed = parse_csv(&text).unwrap();
    if render_records(&parsed, ExportFormat::Csv) != text {
        violations.push("CSV round trip is not byte-identical".into());
    }
    if parsed.len() as u64 != manifest.rows {
        violations.push("manifest row count disagrees with file".into());
    }
    Outcome::new(
        violations,
        format!("{} rows, byte-identical and round-tripped", manifest.rows),
    )
}

fn main() {
    let mut outcomes: Vec<(u32, &str, Outcome)> = Vec::new();
    outcomes.push((1, "Table I limits", limits_table(&TABLE_I, 0.05)));
    outcomes.push((2, "Table IV limits", limits_table(&TABLE_IV, 0.01)));

    let (mut v, w7) = accuracy_table(&TABLE_VII, 0.05);
    let (v8, w8) = accuracy_table(&TABLE_VIII, 0.01);
    v.extend(v8);
    outcomes.push((
        3,
        "Tables VII-VIII at k and 2k",
        Outcome::new(
            v,
            format!("72 values, max |diff| {:.2} grid steps", w7.max(w8) / H),
        ),
    ));

    let mut v = Vec::new();
    let mut worst = 0.0f64;
    for (table, method, a, label) in [
        (TABLE_II, Approximation::Normal, 0.05, "II"),
        (TABLE_III, Approximation::ClopperPearson, 0.05, "III"),
        (TABLE_V, Approximation::Normal, 0.01, "V"),
        (TABLE_VI, Approximation::ClopperPearson, 0.01, "VI"),
    ] {
        let (tv, tw) = error_table(table, method, a, label);
        v.extend(tv);
        worst = worst.max(tw);
    }
    outcomes.push((
        4,
        "Tables II, III, V, VI error percentages",
        Outcome::new(v, format!("40 percentages, max |diff| {worst:.4}")),
    ));

    outcomes.push((5, "worked n=1, x=0 case", appendix_case()));

    let start = Instant::now();
    let points = sweep();
    let sweep_time = start.elapsed().as_secs_f64();
    let mut oracle = oracle_equivalence(&points);
    oracle
        .summary
        .push_str(&format!(", sweep {sweep_time:.1} s"));
    outcomes.push((6, "Beta-quantile oracle equivalence", oracle));
    outcomes.push((7, "property suite", property_suite(&points)));
    outcomes.push((8, "export determinism and CSV round trip", determinism()));

    let mut failed = 0;
    for (id, name, o) in &outcomes {
        let status = if o.pass { "PASS" } else { "FAIL" };
        println!("{status} criterion {id}: {name} ({})", o.summary);
        for d in &o.details {
            println!("     {d}");
        }
        failed += usize::from(!o.pass);
    }
    println!(
        "{} of {} criteria passed",
        outcomes.len() - failed,
        outcomes.len()
    );
    if failed > 0 {
        std::process::exit(1);
    }
}
