use otcic::estimators::{
    cic_estimate, couple_counterfactuals, coupled_effects, did_estimate, ot_cic_estimate, qte,
    Group, PanelDataset, Period, Unit,
};
use otcic::ot::{brute_force_ot, check_monotone, RoundingMode};
use otcic::PointCloud;
use proptest::prelude::*;
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};

fn build(cells: [Vec<Vec<f64>>; 4], paired_treated: bool) -> PanelDataset {
    let order = [
        (Group::Control, Period::Pre),
        (Group::Control, Period::Post),
        (Group::Treated, Period::Pre),
        (Group::Treated, Period::Post),
    ];
    let mut units = Vec::new();
    for (c, pts) in cells.into_iter().enumerate() {
        let (g, p) = order[c];
        for (k, x) in pts.into_iter().enumerate() {
            let mut u = Unit::new(format!("{g}-{k}"), g, p, x);
            if paired_treated && g == Group::Treated {
                u = u.with_pair(format!("t{k}"));
            }
            units.push(u);
        }
    }
    PanelDataset::new(units).unwrap()
}

fn sample(rng: &mut ChaCha8Rng, n: usize, d: usize, lo: f64, hi: f64) -> Vec<Vec<f64>> {
    (0..n)
        .map(|_| (0..d).map(|_| rng.random_range(lo..hi)).collect())
        .collect()
}

fn integer_sample(rng: &mut ChaCha8Rng, n: usize, d: usize) -> Vec<Vec<f64>> {
    (0..n)
        .map(|_| (0..d).map(|_| rng.random_range(0..40) as f64).collect())
        .collect()
}

#[test]
fn cic_identity_under_zero_drift_on_shuffled_multisets() {
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    for _ in 0..20 {
        let pre = integer_sample(&mut rng, 50, 3);
        let mut post = pre.clone();
        post.shuffle(&mut rng);
        let treated = sample(&mut rng, 30, 3, -5.0, 45.0);
        let ds = build([pre.clone(), post, treated.clone(), treated.clone()], false);
        let (cf, _) = cic_estimate(&ds).unwrap();
        // With identical control samples the map is the step function onto
        // the largest control value not exceeding x.
        for (u, x) in cf.per_unit.iter().zip(&treated) {
            for k in 0..3 {
                let floor = pre
                    .iter()
                    .map(|p| p[k])
                    .filter(|&v| v <= x[k])
                    .fold(f64::NAN, f64::max);
                if !floor.is_nan() {
                    assert_eq!(u.counterfactual[k], floor);
                }
            }
        }
    }
}

#[test]
fn cic_identity_when_treated_on_control_support() {
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    let pre = integer_sample(&mut rng, 80, 2);
    let mut post = pre.clone();
    post.shuffle(&mut rng);
    let treated: Vec<Vec<f64>> = (0..25)
        .map(|_| pre[rng.random_range(0..80)].clone())
        .collect();
    let ds = build([pre, post, treated.clone(), treated.clone()], false);
    let (cf, _) = cic_estimate(&ds).unwrap();
    for (u, x) in cf.per_unit.iter().zip(&treated) {
        assert_eq!(&u.counterfactual, x);
    }
}

#[test]
fn ot_cic_counterfactuals_lie_in_control_post_support() {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    for k in 0..10 {
        let d = 1 + k % 4;
        let n0 = rng.random_range(5..80);
        let n1 = rng.random_range(5..80);
        let ds = build(
            [
                sample(&mut rng, n0, d, 0.0, 1.0),
                sample(&mut rng, n1, d, 0.5, 2.0),
                sample(&mut rng, 40, d, -0.5, 1.5),
                sample(&mut rng, 33, d, 0.0, 3.0),
            ],
            false,
        );
        let post = ds.cloud(Group::Control, Period::Post).unwrap();
        let (cf, rep) = ot_cic_estimate(&ds, RoundingMode::Mode).unwrap();
        assert_eq!(cf.per_unit.len(), 40);
        for u in &cf.per_unit {
            assert!(post.points().any(|p| p == u.counterfactual.as_slice()));
        }
        let curves = rep.qte.unwrap();
        assert!(curves[0].levels.iter().all(|&q| q > 0.0 && q < 1.0));
    }
}

#[test]
fn unit_effect_mean_equals_ate() {
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    for k in 0..10 {
        let d = 1 + k % 3;
        let n = rng.random_range(10..120);
        let ds = build(
            [
                sample(&mut rng, 70, d, 0.0, 1.0),
                sample(&mut rng, 55, d, 0.0, 2.0),
                sample(&mut rng, n, d, 0.0, 1.0),
                sample(&mut rng, n, d, 1.0, 3.0),
            ],
            true,
        );
        for rep in [
            ot_cic_estimate(&ds, RoundingMode::Mode).unwrap().1,
            ot_cic_estimate(&ds, RoundingMode::Barycentric).unwrap().1,
            cic_estimate(&ds).unwrap().1,
        ] {
            let effects = rep.unit_effects.as_ref().expect("paired data");
            assert_eq!(effects.len(), n);
            for c in 0..d {
                let mean: f64 = effects.iter().map(|e| e.effect[c]).sum::<f64>() / n as f64;
                assert!((mean - rep.ate[c]).abs() < 1e-8);
            }
        }
    }
}

#[test]
fn one_dimensional_ot_and_cic_agree_on_shared_support() {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    for _ in 0..20 {
        let n = rng.random_range(5..150);
        let pre = sample(&mut rng, n, 1, 0.0, 10.0);
        let post = sample(&mut rng, n, 1, 3.0, 20.0);
        let treated: Vec<Vec<f64>> = (0..40)
            .map(|_| pre[rng.random_range(0..n)].clone())
            .collect();
        let ds = build(
            [
                pre,
                post,
                treated.clone(),
                sample(&mut rng, 40, 1, 0.0, 1.0),
            ],
            false,
        );
        let (ot_cf, ot_rep) = ot_cic_estimate(&ds, RoundingMode::Mode).unwrap();
        let (cic_cf, cic_rep) = cic_estimate(&ds).unwrap();
        for (a, b) in ot_cf.per_unit.iter().zip(&cic_cf.per_unit) {
            assert_eq!(a.counterfactual, b.counterfactual);
        }
        assert!((ot_rep.ate[0] - cic_rep.ate[0]).abs() < 1e-12);
    }
}

#[test]
fn coupling_identity_and_brute_force() {
    let mut rng = ChaCha8Rng::seed_from_u64(6);
    let c = PointCloud::uniform(sample(&mut rng, 12, 2, 0.0, 1.0)).unwrap();
    let map = couple_counterfactuals(&c, &c).unwrap();
    assert!(coupled_effects(&map)
        .iter()
        .all(|e| e.iter().all(|x| *x == 0.0)));

    for _ in 0..20 {
        let a = PointCloud::uniform(sample(&mut rng, 5, 2, 0.0, 1.0)).unwrap();
        let b = PointCloud::uniform(sample(&mut rng, 5, 2, 0.0, 1.0)).unwrap();
        let map = couple_counterfactuals(&a, &b).unwrap();
        let brute = brute_force_ot(&a, &b).unwrap();
        for i in 0..5 {
            assert_eq!(map.assignment().unwrap()[i], brute.row(i)[0].1);
        }
    }
}

#[test]
fn one_dimensional_coupling_is_monotone_and_matches_qte() {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    for _ in 0..10 {
        let n = 40;
        let star = PointCloud::uniform(sample(&mut rng, n, 1, 0.0, 5.0)).unwrap();
        let dagger = PointCloud::uniform(sample(&mut rng, n, 1, -1.0, 2.0)).unwrap();
        let map = couple_counterfactuals(&star, &dagger).unwrap();
        assert!(check_monotone(&map.pairs()).unwrap().is_monotone());

        // effect of the unit at star's q-quantile equals the QTE at q
        let effects = coupled_effects(&map);
        let mut order: Vec<usize> = (0..n).collect();
        order.sort_by(|&i, &j| star.point(i)[0].total_cmp(&star.point(j)[0]));
        for (k, &i) in order.iter().enumerate() {
            let q = (k + 1) as f64 / n as f64;
            if q < 1.0 {
                assert!((effects[i][0] - qte(&star, &dagger, q).unwrap()).abs() < 1e-12);
            }
        }
    }
}

#[test]
fn parallel_trends_with_zero_effect() {
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    let n = 2000;
    let noise = Normal::new(0.0, 1.0).unwrap();
    let drift = [1.0, -0.5];
    let mut draw = |shift: f64, add: bool| -> Vec<Vec<f64>> {
        (0..n)
            .map(|_| {
                (0..2)
                    .map(|k| noise.sample(&mut rng) + shift + if add { drift[k] } else { 0.0 })
                    .collect()
            })
            .collect()
    };
    let cells = [
        draw(0.0, false),
        draw(0.0, true),
        draw(0.3, false),
        draw(0.3, true),
    ];

    // standard error of a difference of four independent cell means
    let se: Vec<f64> = (0..2)
        .map(|k| {
            cells
                .iter()
                .map(|c| {
                    let m = c.iter().map(|x| x[k]).sum::<f64>() / n as f64;
                    c.iter().map(|x| (x[k] - m).powi(2)).sum::<f64>() / (n - 1) as f64 / n as f64
                })
                .sum::<f64>()
                .sqrt()
        })
        .collect();

    let ds = build(cells, false);
    let reports = [
        did_estimate(&ds).unwrap(),
        cic_estimate(&ds).unwrap().1,
        ot_cic_estimate(&ds, RoundingMode::Mode).unwrap().1,
    ];
    for rep in &reports {
        for k in 0..2 {
            assert!(
                rep.ate[k].abs() < 3.0 * se[k],
                "{}: ate {:?} se {:?}",
                rep.estimator,
                rep.ate,
                se
            );
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn did_is_shift_invariant_and_scale_equivariant(
        seed in any::<u64>(),
        shift in prop::collection::vec(-100.0f64..100.0, 2),
        s in -5.0f64..5.0,
    ) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let ds = build(
            [
                sample(&mut rng, 9, 2, 0.0, 1.0),
                sample(&mut rng, 7, 2, 0.0, 2.0),
                sample(&mut rng, 5, 2, 1.0, 3.0),
                sample(&mut rng, 11, 2, 0.0, 4.0),
            ],
            false,
        );
        let base = did_estimate(&ds).unwrap().ate;
        let shifted = ds.map_outcomes(|y| y.iter().zip(&shift).map(|(a, b)| a + b).collect()).unwrap();
        let scaled = ds.map_outcomes(|y| y.iter().map(|a| a * s).collect()).unwrap();
        let a = did_estimate(&shifted).unwrap().ate;
        let b = did_estimate(&scaled).unwrap().ate;
        for k in 0..2 {
            prop_assert!((a[k] - base[k]).abs() < 1e-9);
            prop_assert!((b[k] - s * base[k]).abs() < 1e-9);
        }
    }
}
