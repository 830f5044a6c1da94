use phonon_qram::analytics::{success_prob_hybrid, success_prob_standard_vacuum};
use phonon_qram::error_model::{estimate_success_prob, NoiseModel, TrajectorySampler};
use phonon_qram::qram::QramConfig;
use phonon_qram::units::Time;
use phonon_qram::Encoding;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

#[test]
fn every_single_loss_is_detected() {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    for enc in [Encoding::HybridDualRail, Encoding::StandardDualRailVacuum] {
        for n in 1..=4u32 {
            let s = TrajectorySampler::new(QramConfig::new(n, enc), NoiseModel::noiseless()).unwrap();
            let total = s.query_time().ns();
            for _ in 0..150 {
                let branch: Vec<u8> = (0..=n).map(|_| rng.gen_range(0..2)).collect();
                let k = rng.gen_range(0..=n as usize);
                let time = rng.gen_range(0.0..total);
                let v = s.inject_loss(&branch, k, Time::from_ns(time)).unwrap();
                assert!(v.detected, "{enc} n={n} branch={branch:?} k={k} t={time}");
            }
        }
    }
}

#[test]
fn equal_lifetimes_match_closed_form() {
    let cfg = QramConfig::new(2, Encoding::HybridDualRail);
    let t1 = Time::from_us(100.0);
    let est = estimate_success_prob(&cfg, &NoiseModel::loss_only(t1, t1), 100_000, 17).unwrap();
    let exact = (-3.0f64 * 2100.0 / 100_000.0).exp();
    assert!((exact - 0.939).abs() < 1e-3);
    assert!((est.p - exact).abs() < 3.0 * est.stderr, "{} vs {exact} ± {}", est.p, est.stderr);
}

#[test]
fn unequal_lifetimes_match_closed_form() {
    let t = Time::from_ns(350.0);
    for (enc, n) in [(Encoding::HybridDualRail, 7), (Encoding::StandardDualRailVacuum, 3)] {
        let (tq, tm) = (Time::from_us(100.0), Time::from_us(2.0));
        let est = estimate_success_prob(&QramConfig::new(n, enc), &NoiseModel::loss_only(tq, tm), 50_000, 23).unwrap();
        let exact = match enc {
            Encoding::HybridDualRail => success_prob_hybrid(n, t, tq, tm).unwrap().p,
            _ => success_prob_standard_vacuum(n, t, tq, tm).unwrap().p,
        };
        assert!((est.p - exact).abs() < 3.0 * est.stderr, "{enc}: {} vs {exact}", est.p);
    }
}

#[test]
fn no_false_alarms() {
    let noise = NoiseModel { n_th: 0.02, ..NoiseModel::loss_only(Time::from_us(20.0), Time::from_us(2.0)) };
    for enc in [Encoding::HybridDualRail, Encoding::StandardDualRailVacuum] {
        let s = TrajectorySampler::new(QramConfig::new(3, enc), noise).unwrap();
        for i in 0..2000 {
            let v = s.sample(9, i);
            if v.loss_count() == 0 {
                assert!(!v.detected, "{enc}: {v:?}");
            } else {
                assert!(v.detected, "{enc}: {v:?}");
            }
        }
    }
}
