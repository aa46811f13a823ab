mod common;

use common::{random_pairs, sign_flip_p};
use mscvrp::bench::{compare, wilcoxon_one_tailed, BenchReport, Cell, Method, WilcoxonError};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

#[test]
fn exact_matches_sign_flip_enumeration() {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let mut checked = 0;
    for n in 5..=12 {
        for _ in 0..40 {
            let (a, b) = random_pairs(&mut rng, n);
            match wilcoxon_one_tailed(&a, &b, Method::Exact) {
                Ok(r) => {
                    let want = sign_flip_p(&a, &b);
                    assert!((r.p_value - want).abs() <= 1e-9, "n {n}: {} vs {want}", r.p_value);
                    checked += 1;
                }
                Err(WilcoxonError::InsufficientData(k)) => assert!(k < 5),
                Err(e) => panic!("{e}"),
            }
        }
    }
    assert!(checked > 250);
}

#[test]
fn known_table_value() {
    // n = 8 with every difference negative except the smallest: W+ = 1,
    // two of the 256 sign patterns reach W+ ≤ 1.
    let a = [0.9, 1.0, 1.0, 1.0, 1.0, 1.0, 1.0, 1.0];
    let b = [0.8, 1.2, 1.3, 1.4, 1.5, 1.6, 1.7, 1.8];
    let r = wilcoxon_one_tailed(&a, &b, Method::Exact).unwrap();
    assert_eq!(r.statistic, 1.0);
    assert!((r.p_value - 2.0 / 256.0).abs() < 1e-12);
}

#[test]
fn normal_tracks_exact_at_25() {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let mut worst: f64 = 0.0;
    for _ in 0..100 {
        let shift = rng.gen_range(-1.0..1.0);
        let a: Vec<f64> = (0..25).map(|_| rng.gen_range(-2.0..2.0) + shift).collect();
        let b = vec![0.0; 25];
        let e = wilcoxon_one_tailed(&a, &b, Method::Exact).unwrap();
        let z = wilcoxon_one_tailed(&a, &b, Method::Normal).unwrap();
        worst = worst.max((e.p_value - z.p_value).abs());
    }
    assert!(worst <= 0.005, "max |Δp| = {worst}");
}

#[test]
fn auto_switches_above_25() {
    let a: Vec<f64> = (0..30).map(|i| i as f64 * 0.1 - 1.0).collect();
    let b = vec![0.05; 30];
    assert_eq!(wilcoxon_one_tailed(&a[..25], &b[..25], Method::Auto).unwrap().method, Method::Exact);
    assert_eq!(wilcoxon_one_tailed(&a, &b, Method::Auto).unwrap().method, Method::Normal);
}

fn cell(instance: &str, mode: &str, seed: u64, cost: i64, bks: f64) -> Cell {
    Cell {
        instance: instance.into(),
        mode: mode.into(),
        seed,
        cost,
        bks,
        gap: 100.0 * (cost as f64 - bks) / bks,
        iterations: 0,
    }
}

#[test]
fn report_rows_and_aggregates() {
    let cells = vec![
        cell("a", "guided", 0, 110, 100.0),
        cell("a", "guided", 1, 100, 100.0),
        cell("a", "guided", 2, 105, 100.0),
        cell("b", "guided", 0, 200, 200.0),
        cell("b", "guided", 1, 204, 200.0),
        cell("b", "guided", 2, 202, 200.0),
        cell("c", "guided", 0, 54, 50.0),
        cell("c", "guided", 1, 51, 50.0),
        cell("c", "guided", 2, 51, 50.0),
    ];
    let report = BenchReport::from_cells(cells);
    let rows: Vec<_> = report.rows_for("guided").collect();
    assert_eq!(rows.len(), 3);
    // a: mean 105 → 5%; b: mean 202 → 1%; c: mean 52 → 4%.
    let avg: Vec<f64> = rows.iter().map(|r| r.avg_gap).collect();
    let best: Vec<f64> = rows.iter().map(|r| r.best_gap).collect();
    for (got, want) in avg.iter().zip([5.0, 1.0, 4.0]) {
        assert!((got - want).abs() < 1e-9);
    }
    for (got, want) in best.iter().zip([0.0, 0.0, 2.0]) {
        assert!((got - want).abs() < 1e-9);
    }
    let agg = report.aggregate("guided").unwrap();
    assert!((agg.avg_gap.avg - 10.0 / 3.0).abs() < 1e-9);
    assert_eq!(agg.avg_gap.median, 4.0);
    assert_eq!(agg.avg_gap.min, 1.0);
    assert_eq!(agg.avg_gap.max, 5.0);

    let mut csv = Vec::new();
    report.write_csv(&mut csv).unwrap();
    let text = String::from_utf8(csv).unwrap();
    assert_eq!(text.lines().nth(1).unwrap(), "a,guided,105.0,100,5.00,0.00");
    let back = mscvrp::bench::read_rows(text.as_bytes()).unwrap();
    assert_eq!(back.len(), 3);
}

#[test]
fn comparison_pairs_by_instance() {
    let mk = |mode: &str, offsets: &[(&str, i64)]| {
        let cells: Vec<Cell> = offsets.iter().map(|(i, c)| cell(i, mode, 0, *c, 100.0)).collect();
        BenchReport::from_cells(cells).rows
    };
    let names = ["p", "q", "r", "s", "t", "u"];
    let a = mk("a", &names.iter().map(|n| (*n, 101)).collect::<Vec<_>>());
    let b: Vec<(&str, i64)> = names.iter().enumerate().map(|(k, n)| (*n, 102 + k as i64)).collect();
    let mut b = mk("b", &b);
    b.reverse();
    let c = compare(&a, &b, 0.0125).unwrap();
    assert_eq!(c.pairs, 6);
    let t = c.test.as_ref().unwrap();
    assert_eq!(t.statistic, 0.0);
    assert!((t.p_value - 1.0 / 64.0).abs() < 1e-12);
    assert!(!c.rejects_h0());
    assert!(compare(&a, &[], 0.0125).is_err());
}
