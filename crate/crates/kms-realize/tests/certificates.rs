use kms_realize::conformal::{
    check_conformality, parse_blocks, write_blocks, FiniteConformalBlock, FiniteGroupTable, ProbVector,
    TruncatedProductSystem,
};
use kms_realize::growth::{
    build_measure_net, classify_spectrum, net_defect, omega_mu, spectrum_flags, uniquely_ergodic_class, CocycleModel,
    CocyclePreset, SpectrumClass, WordMetricGroup,
};
use kms_realize::padic::{self, alphabet, freeness_suite_over, subgroup_closure_mod, FreeWord, Gen, Letter};

fn blocks() -> Vec<FiniteConformalBlock> {
    let c5 = FiniteGroupTable::cyclic(5).unwrap();
    let d3 = FiniteGroupTable::dihedral(3).unwrap();
    vec![
        FiniteConformalBlock::new(c5, ProbVector::from_masses(&[1.0, 2.0, 2.0, 1.0, 4.0]).unwrap(), vec![2.0, 0.5, 1.0, 1.0, 1.25], 2.0)
            .unwrap(),
        FiniteConformalBlock::new(d3, ProbVector::from_masses(&[6.0, 5.0, 4.0, 3.0, 2.0, 1.0]).unwrap(), vec![1.0; 6], 1.5).unwrap(),
    ]
}

#[test]
fn stored_blocks_stay_conformal() {
    let text = write_blocks(&blocks());
    let back = parse_blocks(&text).unwrap();
    assert_eq!(back.len(), 2);
    assert_eq!(write_blocks(&back), text);
    let sys = TruncatedProductSystem::new(back, 0.0).unwrap();
    let gens = sys.all_generators();
    assert_eq!(gens.len(), 4 + 5);
    for beta in [-3.0, -1.0, 0.0, 1.0, 3.0] {
        let m = sys.conformal_measure(beta).unwrap();
        assert!(check_conformality(&sys, &m, beta, &gens, 1e-12).unwrap().pass);
    }
}

#[test]
fn wrong_beta_is_not_conformal() {
    let sys = TruncatedProductSystem::new(blocks(), 0.0).unwrap();
    let m = sys.conformal_measure(1.0).unwrap();
    let rep = check_conformality(&sys, &m, 2.0, &sys.all_generators(), 1e-6).unwrap();
    assert!(!rep.pass);
}

#[test]
fn short_words_are_free() {
    let letters = alphabet(-2, 2);
    assert_eq!(letters.len(), 14);
    let cert = freeness_suite_over(&letters, 4).unwrap();
    // 14 * 13^(L-1) reduced words of length L
    assert_eq!(cert.words_checked, 14 + 14 * 13 + 14 * 169 + 14 * 2197);
    assert_eq!(cert.big_words, 0);
}

#[test]
fn reduction_cancels() {
    let g = Letter::new(Gen::G1, false);
    let w = FreeWord::new(&[g, Letter::new(Gen::H(1), false), Letter::new(Gen::H(1), true), g.inv()]);
    assert!(w.is_empty());
    assert!(padic::eval_word(&w).is_identity());
}

#[test]
fn closure_orders() {
    let gens = [padic::generator("g1", None).unwrap(), padic::generator("g2", None).unwrap()];
    let r1 = subgroup_closure_mod(3, 1, &gens).unwrap();
    let r2 = subgroup_closure_mod(3, 2, &gens).unwrap();
    assert_eq!((r1.order, r1.expected_order, r1.is_full), (24, 24, true));
    assert_eq!((r2.order, r2.expected_order, r2.is_full), (648, 648, true));
    let r5 = subgroup_closure_mod(5, 1, &gens).unwrap();
    assert_eq!(r5.expected_order, 120);
    assert!(r5.is_full);
}

#[test]
fn growth_models_classified() {
    let cob = CocycleModel::integers(1000, CocyclePreset::Coboundary { amplitude: 1.0 }).unwrap();
    let hom = CocycleModel::integers(1000, CocyclePreset::Homomorphism { weights: vec![1.0] }).unwrap();
    let pts = [0, 250, 500];
    assert_eq!(spectrum_flags(&cob, &pts, 64, 0.1).unwrap().class, SpectrumClass::All);
    let h = spectrum_flags(&hom, &pts, 64, 0.1).unwrap();
    assert_eq!(h.class, SpectrumClass::Zero);
    assert_eq!(h.upper_estimate, 1.0);
    let u = ProbVector::uniform(1000).unwrap();
    assert_eq!(uniquely_ergodic_class(&omega_mu(&cob, &u).unwrap(), 1e-9), SpectrumClass::All);
    assert_eq!(uniquely_ergodic_class(&omega_mu(&hom, &u).unwrap(), 1e-9), SpectrumClass::Zero);
}

#[test]
fn four_way_output() {
    let mut all: Vec<_> = [(false, false), (true, false), (false, true), (true, true)]
        .into_iter()
        .map(|(a, b)| classify_spectrum(a, b))
        .collect();
    all.sort();
    all.dedup();
    assert_eq!(all.len(), 4);
}

#[test]
fn nets_on_the_plane() {
    let model = CocycleModel::new(
        WordMetricGroup::lattice(2).unwrap(),
        kms_realize::growth::GridRotation { modulus: 997, steps: vec![616, 123] },
        CocyclePreset::Coboundary { amplitude: 0.7 },
    )
    .unwrap();
    let f = |x: u64| if x % 2 == 0 { 1.0 } else { -1.0 };
    for s in [0.5, 0.2] {
        // sphere sizes grow like 4k, so the radius needs more room than on the line
        let net = build_measure_net(&model, 3, 1.0, s, (45.0 / s).ceil() as u64).unwrap();
        for h in model.group().generators() {
            let c = net_defect(&model, &net, &h, &f).unwrap();
            assert!(c.holds, "{c:?}");
        }
    }
}
