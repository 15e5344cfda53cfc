use phasevar_core::squeezed::amplitudes_auto;
use phasevar_core::{
    build_tridiagonal, optimize_at_mu, optimize_at_nbar, optimize_squeezed, variance_of_state, SchemeModel,
    SqueezedPoint, StateVector,
};
use proptest::prelude::*;

fn schemes() -> Vec<SchemeModel> {
    vec![
        SchemeModel::canonical(),
        SchemeModel::heterodyne(),
        SchemeModel::mark_i(),
        SchemeModel::mark_ii(),
        SchemeModel::power_law(0.3, 0.8).unwrap(),
    ]
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn h_stays_in_unit_interval(m in 0u64..2_000_000) {
        for s in schemes() {
            let h = s.h(m);
            prop_assert!((0.0..=1.0).contains(&h), "{} h({m}) = {h}", s.name());
        }
    }

    #[test]
    fn canonical_is_never_worse(seed in proptest::collection::vec(0.0f64..1.0, 2..40)) {
        let norm = seed.iter().map(|x| x * x).sum::<f64>().sqrt();
        prop_assume!(norm > 1e-3);
        let b: Vec<f64> = seed.iter().map(|x| x / norm).collect();
        let state = StateVector::from_amplitudes(b, 0.01, 1.0);
        let v0 = variance_of_state(&state, &SchemeModel::canonical()).unwrap();
        for s in schemes() {
            prop_assert!(variance_of_state(&state, &s).unwrap() >= v0 - 1e-15);
        }
    }

    #[test]
    fn squeezed_moments(alpha in 1.0f64..100.0, r in 0.0f64..5.0) {
        let p = SqueezedPoint::new(alpha, -r).unwrap();
        prop_assert!((p.nbar - (alpha * alpha + r.sinh().powi(2))).abs() <= 1e-10 * p.nbar);
        let b = amplitudes_auto(alpha, -r).unwrap();
        let norm: f64 = b.iter().map(|x| x * x).sum();
        prop_assert!((norm - 1.0).abs() < 1e-8);
        let m1: f64 = b.iter().enumerate().map(|(n, x)| n as f64 * x * x).sum();
        let var: f64 = b.iter().enumerate().map(|(n, x)| (n as f64 - m1).powi(2) * x * x).sum();
        prop_assert!((m1 / p.nbar - 1.0).abs() < 1e-6, "{m1} vs {}", p.nbar);
        prop_assert!((var / p.number_variance() - 1.0).abs() < 1e-6, "{var} vs {}", p.number_variance());
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(12))]

    #[test]
    fn optimum_is_locally_optimal(log_mu in -9.0f64..-2.0, k in 0usize..5, eps in -0.05f64..0.05) {
        let s = &schemes()[k];
        let mu = 10f64.powf(log_mu);
        let r = optimize_at_mu(s, mu).unwrap();
        let cut = r.state.cutoff;
        let (d, o) = build_tridiagonal(s, mu, cut);
        let quad = |b: &[f64]| -> f64 {
            let mut acc = 0.0;
            for i in 0..b.len() {
                acc += d[i] * b[i] * b[i];
                if i + 1 < b.len() {
                    acc += 2.0 * o[i] * b[i] * b[i + 1];
                }
            }
            acc / b.iter().map(|x| x * x).sum::<f64>()
        };
        let base = quad(&r.state.amplitudes);
        prop_assert!((base - r.nu).abs() < 1e-10 * r.nu.abs().max(1e-300) + 1e-15);
        // push weight into one number state near the peak
        let j = (r.nbar.round() as usize).min(cut);
        let mut b = r.state.amplitudes.clone();
        b[j] += eps;
        prop_assert!(quad(&b) >= r.nu - 1e-13 * r.nu.abs().max(1e-300));
    }
}

#[test]
fn nbar_falls_and_variance_falls() {
    for s in schemes() {
        let mut prev_nbar = f64::INFINITY;
        let mut prev_v = 0.0;
        for k in 0..12 {
            let mu = 10f64.powf(-8.0 + 0.5 * k as f64);
            let r = optimize_at_mu(&s, mu).unwrap();
            assert!(r.nbar <= prev_nbar, "{} μ={mu}", s.name());
            // larger μ means smaller n̄ and so no smaller variance
            assert!(r.variance >= prev_v - 1e-15, "{} μ={mu}", s.name());
            assert!(r.variance > 0.0 && r.variance <= 2.0);
            assert!((r.variance - variance_of_state(&r.state, &s).unwrap()).abs() < 1e-10);
            prev_nbar = r.nbar;
            prev_v = r.variance;
        }
    }
}

#[test]
fn squeezed_family_bound() {
    for s in schemes().into_iter().skip(1) {
        for nbar in [20.0, 200.0] {
            let g = optimize_at_nbar(&s, nbar, 1e-8).unwrap();
            let q = optimize_squeezed(&s, nbar).unwrap();
            assert!(q.variance >= g.variance * (1.0 - 1e-6), "{} n̄={nbar}", s.name());
        }
    }
}

#[test]
fn squeezed_scan_is_unimodal() {
    for s in [SchemeModel::heterodyne(), SchemeModel::mark_ii(), SchemeModel::canonical()] {
        let nbar: f64 = 500.0;
        let lo = SqueezedPoint::min_n0(nbar).ln() + 0.2;
        let hi = nbar.ln() - 1e-6;
        let v: Vec<f64> = (0..60)
            .map(|k| {
                let u = lo + (hi - lo) * k as f64 / 59.0;
                let p = SqueezedPoint::from_nbar_n0(nbar, u.exp()).unwrap();
                phasevar_core::squeezed_variance(p.alpha, p.zeta, &s).unwrap()
            })
            .collect();
        let turns = v.windows(3).filter(|w| w[1] < w[0] && w[1] < w[2]).count();
        assert_eq!(turns, 1, "{}", s.name());
    }
}
