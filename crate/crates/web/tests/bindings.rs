use mobgrid_web::{direction_probabilities, run_metrics, walk_trace, METRIC_COUNT};

#[test]
fn probabilities_for_valid_spread() {
    let p = direction_probabilities(30.0).unwrap();
    assert_eq!(p.len(), 6);
    assert!((p.iter().sum::<f64>() - 1.0).abs() < 1e-12);
    assert!((p[3] - 0.408550792005358).abs() < 1e-12);
    assert_eq!(p[2], p[4]);
}

#[test]
fn probabilities_reject_bad_spread() {
    assert!(direction_probabilities(4.9).is_none());
    assert!(direction_probabilities(f64::NAN).is_none());
}

#[test]
fn trace_moves_between_neighbours() {
    let t = walk_trace(40.0, 200, 7);
    assert_eq!(t.len(), 2 * 201);
    assert_eq!(&t[..2], &[0, 0]);
    for w in t.chunks(2).collect::<Vec<_>>().windows(2) {
        let (dq, dr) = (w[1][0] - w[0][0], w[1][1] - w[0][1]);
        let dist = (dq.abs() + dr.abs() + (dq + dr).abs()) / 2;
        assert_eq!(dist, 1);
    }
    assert_eq!(t, walk_trace(40.0, 200, 7));
    assert_ne!(t, walk_trace(40.0, 200, 8));
    assert!(walk_trace(100.0, 10, 1).is_empty());
    assert_eq!(walk_trace(30.0, 0, 1), vec![0, 0]);
}

#[test]
fn metrics_vector() {
    let m = run_metrics(40, 0.2, 3);
    assert_eq!(m.len(), METRIC_COUNT);
    assert!(m[0] > 0.0);
    assert!((0.0..=1.0).contains(&m[1]));
    assert!((0.0..=1.0).contains(&m[3]));
    assert_eq!(m, run_metrics(40, 0.2, 3));
    assert!(run_metrics(0, 0.2, 1).is_empty());
    assert!(run_metrics(40, 2.0, 1).is_empty());
}
