use nlgreen::bench::{
    report_csv, run_benchmark, run_benchmark_with_reference, BenchConfig, BenchError, ErrorFlag,
    GridSpec, Strategy, CSV_HEADER, DOMINANCE_TOL, RTOL_FLOOR,
};
use nlgreen::expr::parse_nonlin;
use nlgreen::forcing::Forcing;

fn small(mut cfg: BenchConfig, n: usize) -> BenchConfig {
    cfg.grid = GridSpec {
        n,
        t0: 0.0,
        t1: 1.0,
    };
    cfg
}

#[test]
fn csv_shape_and_format() {
    let cfg = small(BenchConfig::sinh_gordon(), 11);
    let csv = report_csv(&run_benchmark(&cfg).unwrap());
    assert!(!csv.contains('\r'));
    assert!(csv.ends_with('\n'));
    let lines: Vec<&str> = csv.lines().collect();
    assert_eq!(lines[0], CSV_HEADER);
    assert_eq!(lines.len(), 1 + 4 * 11);
    for line in &lines[1..] {
        let f: Vec<&str> = line.split(',').collect();
        assert_eq!(f.len(), 9, "{line}");
        assert_eq!(f[0], "sinh(w)");
        assert_eq!(f[2], "lsq");
        for x in &f[4..7] {
            assert!(x.parse::<f64>().is_ok(), "{x}");
        }
        match f[8] {
            "ok" => assert!(f[7].parse::<f64>().unwrap().is_finite()),
            "exact" => assert_eq!(f[7], ""),
            other => panic!("flag {other}"),
        }
    }
}

#[test]
fn empty_k_range_gives_header_only() {
    let mut cfg = small(BenchConfig::sinh_gordon(), 5);
    cfg.k_min = 3;
    cfg.k_max = 2;
    assert_eq!(
        report_csv(&run_benchmark(&cfg).unwrap()),
        format!("{CSV_HEADER}\n")
    );
}

#[test]
fn repeated_runs_are_identical() {
    let cfg = small(BenchConfig::liouville(), 21);
    let a = report_csv(&run_benchmark(&cfg).unwrap());
    let b = report_csv(&run_benchmark(&cfg).unwrap());
    assert_eq!(a, b);
}

#[test]
fn reference_error_is_negligible() {
    for cfg in [BenchConfig::sinh_gordon(), BenchConfig::liouville()] {
        let cfg = small(cfg, 51);
        let base = run_benchmark(&cfg).unwrap();
        let r = &base.reference;
        assert!(
            r.rtol >= RTOL_FLOOR && r.median_shift.unwrap() < DOMINANCE_TOL,
            "{r:?}"
        );
        let tight = run_benchmark_with_reference(&cfg, r.rtol / 10.0, r.atol / 10.0).unwrap();
        for (a, b) in base.medians.iter().zip(&tight.medians) {
            assert!(((a - b) / b).abs() < DOMINANCE_TOL, "{} vs {}", a, b);
        }
    }
}

#[test]
fn smooth_forcing_run_flags_exact_start() {
    let n = parse_nonlin("sin(w)").unwrap();
    let mut cfg = small(
        BenchConfig::member(
            n,
            Forcing::parse("sin(t)").unwrap(),
            1.0,
            Strategy::LeastSquares,
        ),
        11,
    );
    cfg.k_max = 2;
    let report = run_benchmark(&cfg).unwrap();
    assert_eq!(report.k_values, vec![1, 2]);
    for row in report.rows.iter().filter(|r| r.t == 0.0) {
        assert_eq!(row.flag, ErrorFlag::Exact);
        assert_eq!(row.er, None);
    }
    assert!(report.medians.iter().all(|m| m.is_finite()));
    assert!(report_csv(&report).contains(",,exact\n"));
}

#[test]
fn criteria_on_inputs() {
    let mut cfg = small(BenchConfig::sinh_gordon(), 5);
    cfg.k_max = 9;
    assert!(matches!(run_benchmark(&cfg), Err(BenchError::KTooLarge(9))));
    let mut cfg = small(BenchConfig::sinh_gordon(), 5);
    cfg.grid.t1 = 2.0;
    assert!(matches!(run_benchmark(&cfg), Err(BenchError::BadGrid)));
}

#[test]
fn cubic_with_cosine_forcing_improves_pointwise() {
    let n = parse_nonlin("w^3").unwrap();
    let mut cfg = BenchConfig::member(n, Forcing::parse("cos(t)").unwrap(), 1.0, Strategy::Match);
    cfg.grid = GridSpec {
        n: 30,
        t0: 0.01,
        t1: 0.3,
    };
    let report = run_benchmark(&cfg).unwrap();
    let at = |k: usize| -> Vec<Option<f64>> {
        report
            .rows
            .iter()
            .filter(|r| r.k == k)
            .map(|r| r.er)
            .collect()
    };
    for (i, (e1, e4)) in at(1).into_iter().zip(at(4)).enumerate() {
        let (e1, e4) = (e1.unwrap(), e4.unwrap());
        assert!(
            e4 < e1,
            "t = {}: Er(4) = {e4}, Er(1) = {e1}",
            report.grid[i]
        );
    }
}
