use kms_realize::exprat::Target;
use kms_realize::realizable::{fraction_pair, Side};
use kms_realize::spectra::{solve_free_product_spectrum, solve_spectrum, target_phi_from_set, ClosedSetSpec};
use kms_realize::Error;
use proptest::prelude::*;

fn dist(intervals: &[(f64, f64)], points: &[f64], b: f64) -> f64 {
    let a = intervals.iter().map(|&(lo, hi)| (lo - b).max(b - hi).max(0.0));
    let p = points.iter().map(|&p| (b - p).abs());
    a.chain(p).fold(f64::INFINITY, f64::min)
}

fn mismatches(intervals: &[(f64, f64)], points: &[f64], rep: &kms_realize::spectra::SpectrumReport, r: f64, n: usize) -> usize {
    (0..n)
        .map(|i| -r + 2.0 * r * i as f64 / (n - 1) as f64)
        .filter(|&b| (dist(intervals, points, b) <= rep.tolerance) != rep.covers(b))
        .count()
}

#[test]
fn wreath_sets_recovered() {
    let cases: [(&[(f64, f64)], &[f64]); 4] = [
        (&[], &[0.0]),
        (&[(1.0, 2.0)], &[0.0]),
        (&[(5.0, 6.0)], &[0.0, -3.0]),
        (&[(-8.0, -7.5), (-0.5, 0.5)], &[4.0]),
    ];
    for (iv, pts) in cases {
        let set = ClosedSetSpec::new(iv.to_vec(), pts.to_vec()).unwrap();
        let t = target_phi_from_set(&set, 2.0).unwrap();
        let rep = solve_spectrum(&|b| t.eval(b), 10.0, 1e-6, 10_001).unwrap();
        assert_eq!(mismatches(iv, pts, &rep, 10.0, 10_001), 0, "{iv:?} {pts:?}: {rep:?}");
    }
}

#[test]
fn wreath_frozen_shape() {
    let set = ClosedSetSpec::new(vec![(5.0, 6.0)], vec![0.0, -3.0]).unwrap();
    let t = target_phi_from_set(&set, 2.0).unwrap();
    let rep = solve_spectrum(&|b| t.eval(b), 10.0, 1e-6, 10_001).unwrap();
    assert_eq!(rep.isolated_roots.len(), 2);
    assert!((rep.isolated_roots[0] + 3.0).abs() <= 1e-6 && rep.isolated_roots[1].abs() <= 1e-6);
    assert_eq!(rep.flat_intervals.len(), 1);
    let f = rep.flat_intervals[0];
    assert!((f.lo - 5.0).abs() <= 1e-6 && (f.hi - 6.0).abs() <= 1e-6);
    assert!(!f.clipped_lo && !f.clipped_hi);
}

#[test]
fn wreath_target_needs_zero() {
    let set = ClosedSetSpec::new(vec![(1.0, 2.0)], vec![]).unwrap();
    assert!(matches!(target_phi_from_set(&set, 2.0), Err(Error::Domain(_))));
}

#[test]
fn free_product_frozen_bases() {
    let cases = [
        (vec![(1.0, 2.0)], vec![], (8320.0, 128.0, 129.0)),
        (vec![(3.0, f64::INFINITY)], vec![], (40.0, 8.0, 9.0)),
    ];
    for (iv, pts, bases) in cases {
        let pair = fraction_pair(&ClosedSetSpec::new(iv, pts).unwrap(), 2, 4).unwrap();
        assert_eq!(pair.bases(), bases);
    }
}

#[test]
fn free_product_sets_recovered() {
    let cases: [(&[(f64, f64)], &[f64]); 3] = [(&[(1.0, 2.0)], &[]), (&[], &[-1.0, 2.0]), (&[(3.0, f64::INFINITY)], &[])];
    for (iv, pts) in cases {
        let pair = fraction_pair(&ClosedSetSpec::new(iv.to_vec(), pts.to_vec()).unwrap(), 2, 4).unwrap();
        assert_eq!(pair.phi(Side::Lower, 0.0), 1.0);
        assert_eq!(pair.phi(Side::Upper, 0.0), 1.0);
        let rep = solve_free_product_spectrum(&pair, 10.0, 1e-6, 10_001).unwrap();
        assert_eq!(mismatches(iv, pts, &rep, 10.0, 10_001), 0, "{iv:?} {pts:?}: {rep:?}");
    }
}

#[test]
fn half_line_is_clipped() {
    let pair = fraction_pair(&ClosedSetSpec::new(vec![(3.0, f64::INFINITY)], vec![]).unwrap(), 2, 4).unwrap();
    let rep = solve_free_product_spectrum(&pair, 10.0, 1e-6, 10_001).unwrap();
    assert_eq!(rep.flat_intervals.len(), 1);
    assert!(rep.flat_intervals[0].clipped_hi);
    assert_eq!(rep.flat_intervals[0].hi, 10.0);
}

#[test]
fn free_product_rejects_zero() {
    let set = ClosedSetSpec::new(vec![(-1.0, 1.0)], vec![]).unwrap();
    assert!(fraction_pair(&set, 2, 4).is_err());
    let ok = ClosedSetSpec::new(vec![(1.0, 2.0)], vec![]).unwrap();
    assert!(fraction_pair(&ok, 1, 4).is_err());
    assert!(fraction_pair(&ok, 2, 3).is_err());
}

/// Unions of quarter-grid intervals and points kept at least 0.25 apart.
fn sets() -> impl Strategy<Value = (Vec<(f64, f64)>, Vec<f64>)> {
    proptest::collection::btree_set(-36i32..36, 1..8).prop_map(|cells| {
        let mut iv = Vec::new();
        let mut pts = vec![0.0];
        for c in cells {
            let lo = c as f64 * 0.25;
            if c % 3 == 0 {
                if lo.abs() > 0.3 {
                    pts.push(lo);
                }
            } else if lo > 0.3 || lo + 0.125 < -0.3 {
                iv.push((lo, lo + 0.125));
            }
        }
        (iv, pts)
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]
    #[test]
    fn random_wreath_sets((iv, pts) in sets()) {
        let set = ClosedSetSpec::new(iv.clone(), pts.clone()).unwrap();
        let t = target_phi_from_set(&set, 2.0).unwrap();
        let rep = solve_spectrum(&|b| t.eval(b), 10.0, 1e-6, 4001).unwrap();
        prop_assert_eq!(mismatches(&iv, &pts, &rep, 10.0, 4001), 0);
    }
}
