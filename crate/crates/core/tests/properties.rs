use std::f64::consts::TAU;

use proptest::prelude::*;

use cohwit::certify::{classify, ClassifyOptions};
use cohwit::channels::{attenuate_kraus, thermalize_fock, BeamsplitterParams, StateFamily};
use cohwit::fock::{coherent_point, expectations};
use cohwit::support::{support_classical, support_quantum, Direction, SupportOptions};
use cohwit::{
    coherent_expectation, expectation, CoherentParams, DensityMatrix, ExpectationVector, ObservableId,
    ObservableSpace,
};

const SPACES: [&str; 5] = ["P0,X01", "P1,X01", "X01,X12", "P0,P2,X02", "X01,Y01,P0"];

fn space(s: &str) -> ObservableSpace {
    s.parse().unwrap()
}

fn observable() -> impl Strategy<Value = ObservableId> {
    prop_oneof![
        (0usize..5).prop_map(ObservableId::projector),
        (0usize..4, 1usize..3).prop_map(|(j, d)| ObservableId::coher_x(j, j + d).unwrap()),
        (0usize..4, 1usize..3).prop_map(|(j, d)| ObservableId::coher_y(j, j + d).unwrap()),
    ]
}

fn direction(d: usize) -> impl Strategy<Value = Vec<f64>> {
    prop::collection::vec(-1.0f64..1.0, d).prop_filter("non-zero", |v| v.iter().map(|x| x * x).sum::<f64>() > 1e-2)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn coherent_formula_matches_trace(obs in observable(), mu in 0.0f64..4.0, phi in 0.0f64..TAU) {
        let p = CoherentParams::new(mu, phi).unwrap();
        let rho = DensityMatrix::coherent(&p, 40);
        let direct = coherent_expectation(&obs, &p);
        prop_assert!((direct - expectation(&rho, &obs).unwrap()).abs() < 1e-9);
    }

    #[test]
    fn observable_names_roundtrip(obs in observable()) {
        let back: ObservableId = obs.to_string().parse().unwrap();
        prop_assert_eq!(back, obs);
    }

    #[test]
    fn support_is_homogeneous(i in 0usize..5, n in direction(3), lam in 0.1f64..20.0) {
        let s = space(SPACES[i]);
        let n = &n[..s.len()];
        prop_assume!(n.iter().map(|x| x * x).sum::<f64>() > 1e-2);
        let opts = SupportOptions::default();
        let h = support_classical(&s, &Direction::new(&s, n.to_vec()).unwrap(), &opts).unwrap().value;
        let scaled: Vec<f64> = n.iter().map(|v| v * lam).collect();
        let hs = support_classical(&s, &Direction::new(&s, scaled).unwrap(), &opts).unwrap().value;
        prop_assert!((hs - lam * h).abs() <= 1e-9 * lam.max(1.0));
    }

    #[test]
    fn classical_support_below_quantum(i in 0usize..5, n in direction(3)) {
        let s = space(SPACES[i]);
        let n = &n[..s.len()];
        prop_assume!(n.iter().map(|x| x * x).sum::<f64>() > 1e-2);
        let d = Direction::new(&s, n.to_vec()).unwrap();
        let hc = support_classical(&s, &d, &SupportOptions::default()).unwrap().value;
        let hq = support_quantum(&s, &d, s.default_dim()).unwrap().value;
        prop_assert!(hc <= hq + 1e-9, "h_C {} > h_Q {}", hc, hq);
    }

    #[test]
    fn support_bounds_every_coherent_point(i in 0usize..5, n in direction(3), mu in 0.0f64..8.0, phi in 0.0f64..TAU) {
        let s = space(SPACES[i]);
        let n = &n[..s.len()];
        prop_assume!(n.iter().map(|x| x * x).sum::<f64>() > 1e-2);
        let h = support_classical(&s, &Direction::new(&s, n.to_vec()).unwrap(), &SupportOptions::default()).unwrap().value;
        let pt = coherent_point(&s, &CoherentParams::new(mu, phi).unwrap());
        let dot: f64 = n.iter().zip(&pt).map(|(a, b)| a * b).sum();
        prop_assert!(dot <= h + 1e-9);
    }

    #[test]
    fn coherent_mixtures_are_never_certified(
        i in 0usize..5,
        parts in prop::collection::vec((0.05f64..1.0, 0.0f64..6.0, 0.0f64..TAU), 1..4),
    ) {
        let s = space(SPACES[i]);
        let wsum: f64 = parts.iter().map(|p| p.0).sum();
        let mut x = vec![0.0; s.len()];
        for &(w, mu, phi) in &parts {
            let pt = coherent_point(&s, &CoherentParams::new(mu, phi).unwrap());
            x.iter_mut().zip(pt).for_each(|(a, b)| *a += w / wsum * b);
        }
        let ev = ExpectationVector::measured(s.clone(), x).unwrap();
        let c = classify(&s, &ev, &ClassifyOptions::default()).unwrap();
        prop_assert!(!c.verdict.is_nonclassical(), "{:?}", c);
    }

    #[test]
    fn attenuation_composes(t1 in 0.0f64..1.0, t2 in 0.0f64..1.0, f in 0usize..3) {
        let family = [StateFamily::ZeroOne, StateFamily::ZeroTwo, StateFamily::OneTwo][f].clone();
        let rho = family.state().unwrap();
        let dim = rho.dim();
        let a = BeamsplitterParams::new(t1, 0.0).unwrap();
        let b = BeamsplitterParams::new(t2, 0.0).unwrap();
        let ab = BeamsplitterParams::new(t1 * t2, 0.0).unwrap();
        let two = attenuate_kraus(&attenuate_kraus(&rho, &a, dim).unwrap(), &b, dim).unwrap();
        let one = attenuate_kraus(&rho, &ab, dim).unwrap();
        let diff = (two.matrix() - one.matrix()).iter().map(|z| z.norm()).fold(0.0, f64::max);
        prop_assert!(diff < 1e-12);
    }

    #[test]
    fn channels_keep_states_physical(t in 0.0f64..=1.0, phi in -3.2f64..3.2, nbar in 0.0f64..1.0, f in 0usize..3) {
        let family = [StateFamily::ZeroOne, StateFamily::ZeroTwo, StateFamily::OneTwo][f].clone();
        let bs = BeamsplitterParams::new(t, phi).unwrap();
        let rho = cohwit::channels::prepare_state(&family, &bs, nbar).unwrap();
        prop_assert!((rho.trace() - 1.0).abs() < 1e-9);
        prop_assert!(rho.min_eigenvalue() > -1e-9);
    }

    #[test]
    fn thermal_noise_shrinks_coherence(t in 0.05f64..=1.0, n1 in 0.0f64..1.0, dn in 0.01f64..1.0) {
        let bs = BeamsplitterParams::new(t, 0.0).unwrap();
        let s = space("X01");
        let x = |nbar: f64| {
            let rho = cohwit::channels::prepare_state(&StateFamily::ZeroOne, &bs, nbar).unwrap();
            expectations(&rho, &s).unwrap().values()[0].abs()
        };
        prop_assert!(x(n1 + dn) < x(n1) + 1e-12);
    }

    #[test]
    fn thermal_noise_adds_nbar_photons(p in prop::collection::vec(0.0f64..1.0, 3), n1 in 0.0f64..0.5) {
        // diagonal in, diagonal out; the mean photon number grows by exactly nbar
        let total: f64 = p.iter().sum();
        prop_assume!(total > 1e-3);
        let parts: Vec<(f64, DensityMatrix)> =
            p.iter().enumerate().map(|(k, w)| (w / total, DensityMatrix::fock(k, 3).unwrap())).collect();
        let refs: Vec<(f64, &DensityMatrix)> = parts.iter().map(|(w, r)| (*w, r)).collect();
        let rho = DensityMatrix::mixture(&refs).unwrap();
        let out = thermalize_fock(&rho, n1, None).unwrap();
        let off = out.matrix().iter().enumerate()
            .filter(|(i, _)| i % out.dim() != i / out.dim())
            .map(|(_, z)| z.norm()).fold(0.0, f64::max);
        prop_assert!(off < 1e-12);
        prop_assert!((out.trace() - 1.0).abs() < 1e-9);
        let mean_in: f64 = (0..3).map(|k| k as f64 * rho.entry(k, k).re).sum();
        let mean_out: f64 = (0..out.dim()).map(|k| k as f64 * out.entry(k, k).re).sum();
        prop_assert!((mean_out - mean_in - n1).abs() < 1e-8, "{} vs {}", mean_out, mean_in + n1);
    }

    #[test]
    fn more_observables_never_lose_a_certificate(t in 0.05f64..1.0) {
        let bs = BeamsplitterParams::new(t, 0.0).unwrap();
        let rho = cohwit::channels::prepare_state(&StateFamily::ZeroTwo, &bs, 0.0).unwrap().resized(4);
        let opts = ClassifyOptions { assume_quantum: true, ..Default::default() };
        let small = space("P0,X02");
        let big = space("P0,P2,X02");
        let vs = classify(&small, &expectations(&rho, &small).unwrap(), &opts).unwrap();
        let vb = classify(&big, &expectations(&rho, &big).unwrap(), &opts).unwrap();
        prop_assert!(!vs.verdict.is_nonclassical() || vb.verdict.is_nonclassical());
    }

    #[test]
    fn analytic_and_generic_routes_agree(p0 in 0.0f64..1.0, x in -1.0f64..1.0) {
        // the closed-form verdict must match a plain certificate search
        let s = space("P0,X01");
        let ev = ExpectationVector::measured(s.clone(), vec![p0, x]).unwrap();
        let opts = ClassifyOptions::default();
        let analytic = match classify(&s, &ev, &opts) { Ok(c) => c, Err(_) => return Ok(()) };
        prop_assume!(analytic.margin.abs() > 1e-3);
        let mut generic = opts;
        generic.certify.method = cohwit::support::SearchMethod::MinNorm;
        let out = cohwit::support::search_certificate(&s, &[p0, x], &generic.certify).unwrap();
        prop_assert_eq!(analytic.verdict.is_nonclassical(), out.certificate.is_some());
    }
}

#[test]
fn coherence_only_spaces_are_blind_to_one_photon() {
    let one = DensityMatrix::fock(1, 4).unwrap();
    for sp in ["X01,X12", "X01,Y01"] {
        let s = space(sp);
        let x = expectations(&one, &s).unwrap();
        let c = classify(&s, &x, &ClassifyOptions::default()).unwrap();
        assert!(!c.verdict.is_nonclassical(), "{sp}: {c:?}");
    }
    let s = space("P1");
    let c = classify(&s, &expectations(&one, &s).unwrap(), &ClassifyOptions::default()).unwrap();
    assert!(c.verdict.is_nonclassical());
}
