use kms_realize::exprat::{approximate_unit, OrderSequence, RealizeOptions, Target};
use kms_realize::realizable::{build_realizable, eval_phi, BaseSchedule, Stage};
use kms_realize::spectra::{target_phi_from_set, ClosedSetSpec};

#[test]
fn one_stage_realizes_the_target() {
    let set = ClosedSetSpec::new(vec![(1.0, 2.0)], vec![0.0]).unwrap();
    let t = target_phi_from_set(&set, 2.0).unwrap();
    let opts = RealizeOptions::default();
    let orders = OrderSequence::new(vec![2, 3]).unwrap();
    let cocycle = build_realizable(t.bump(), 2.0, 1, &BaseSchedule::Geometric { a: 2.0, q: 0.9 }, &orders, &opts).unwrap();
    let cert = cocycle.certificate().unwrap();
    assert!(cert.certified <= 1.0, "{cert:?}");
    assert!(cert.grid_max <= cert.certified);
    for s in cocycle.stages() {
        if let Stage::Partitioned(p) = s {
            assert!(p.max_identity_residual(20.0, 2001) <= 1e-10);
        }
    }
    // the product is close to the target on the window
    for b in [-15.0, -1.0, 0.0, 0.5, 1.5, 7.0] {
        assert!((eval_phi(&cocycle, b) - t.eval(b)).abs() <= cert.certified + 1e-12);
    }
}

#[test]
fn base_schedules() {
    let g = BaseSchedule::Geometric { a: 2.0, q: 0.9 };
    assert_eq!(g.base(1).unwrap(), 2.0);
    assert!((g.base(3).unwrap() - 1.81).abs() < 1e-15);
    assert!(BaseSchedule::Geometric { a: 2.0, q: 1.0 }.base(2).is_err());
    let s = BaseSchedule::InverseSquare(2.0);
    assert!((s.base(2).unwrap() - 1.25).abs() < 1e-15);
}

#[test]
fn approximate_unit_normalizer() {
    let d1 = approximate_unit(1).unwrap().normalizer();
    assert!((d1 - std::f64::consts::PI / (2.0 * std::f64::consts::LN_2)).abs() <= 1e-9);
}
