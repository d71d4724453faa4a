use airgan_core::cgan::{latent_matrix, Architecture, Generator, Scaler};
use airgan_core::data::{
    balance, band_stats, build_daily_series, classify, ClassLabel, DailySeries, HourlyRecord,
    LabeledDataset,
};
use airgan_core::eval::{generate_fake_dataset, rank_datasets, rmse, RmseReport, RmseSummary};
use airgan_core::ndcore::{mlp_backward, mlp_forward, Activation, Matrix, MlpParams};
use chrono::{Days, NaiveDate};
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn series() -> impl Strategy<Value = [f64; 24]> {
    prop::array::uniform24(-200.0..200.0f64)
}

fn date() -> impl Strategy<Value = NaiveDate> {
    (0u64..40_000).prop_map(|d| NaiveDate::from_ymd_opt(1950, 1, 1).unwrap() + Days::new(d))
}

fn dataset(counts: [usize; 8], seed: u64) -> LabeledDataset {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut samples = Vec::new();
    let mut day = NaiveDate::from_ymd_opt(2000, 1, 1).unwrap();
    let mut have = [0usize; 8];
    while have != counts {
        let label = classify(day);
        if have[label.index()] < counts[label.index()] {
            have[label.index()] += 1;
            let values = std::array::from_fn(|_| rand::Rng::random_range(&mut rng, 0.0..100.0));
            samples.push(DailySeries { date: day, values, label });
        }
        day = day + Days::new(1);
    }
    LabeledDataset::new(samples)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn forward_is_deterministic_and_shape_preserving(
        seed in any::<u64>(),
        sizes in prop::collection::vec(1usize..10, 2..5),
        rows in 1usize..6,
        sigmoid in any::<bool>(),
    ) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let out_act = if sigmoid { Activation::Sigmoid } else { Activation::Linear };
        let p = MlpParams::init(&sizes, out_act, 0.2, &mut rng).unwrap();
        let x = latent_matrix(rows, sizes[0], &mut rng);
        let (a, cache) = mlp_forward(&p, &x).unwrap();
        let (b, _) = mlp_forward(&p, &x).unwrap();
        let bits = |m: &Matrix| m.as_slice().iter().map(|v| v.to_bits()).collect::<Vec<_>>();
        prop_assert_eq!(bits(&a), bits(&b));
        prop_assert_eq!(a.shape(), (rows, *sizes.last().unwrap()));
        let (g, dx) = mlp_backward(&p, &cache, &a).unwrap();
        prop_assert_eq!(dx.shape(), x.shape());
        prop_assert!(g.is_congruent(&p));
    }

    #[test]
    fn rmse_is_a_translation_invariant_metric(a in series(), b in series(), c in series(), shift in -100.0..100.0f64) {
        let ab = rmse(&a, &b).unwrap();
        prop_assert_eq!(ab, rmse(&b, &a).unwrap());
        prop_assert!(ab >= 0.0);
        prop_assert_eq!(ab == 0.0, a == b);
        prop_assert!(ab <= rmse(&a, &c).unwrap() + rmse(&c, &b).unwrap() + 1e-9);
        let sa = a.map(|v| v + shift);
        let sb = b.map(|v| v + shift);
        prop_assert!((rmse(&sa, &sb).unwrap() - ab).abs() < 1e-9);
    }

    #[test]
    fn classify_is_total_and_consistent(d in date()) {
        let label = classify(d);
        prop_assert!(label.id() < 8);
        prop_assert_eq!(ClassLabel::from_parts(label.season(), label.day_type()), label);
    }

    #[test]
    fn balance_is_deterministic_and_idempotent(
        counts in prop::array::uniform8(2usize..12),
        seed in any::<u64>(),
    ) {
        let ds = dataset(counts, 1);
        let a = balance(&ds, seed).unwrap();
        let b = balance(&ds, seed).unwrap();
        prop_assert_eq!(&a, &b);
        let m = *counts.iter().min().unwrap();
        prop_assert_eq!(a.per_class_counts(), [m; 8]);
        let again = balance(&a, seed ^ 0xdead).unwrap();
        prop_assert_eq!(again.samples(), a.samples());
    }

    #[test]
    fn band_stats_are_ordered(counts in prop::array::uniform8(2usize..6), seed in any::<u64>(), dup in any::<bool>()) {
        let mut ds = dataset(counts, seed);
        if dup {
            // Make hour 3 identical across each class.
            let samples = ds.samples().iter().map(|s| {
                let mut s = s.clone();
                s.values[3] = 7.5;
                s
            }).collect();
            ds = LabeledDataset::new(samples);
        }
        for label in ClassLabel::all() {
            let s = band_stats(&ds, label).unwrap();
            for h in 0..24 {
                prop_assert!(s.min[h] <= s.mean[h] && s.mean[h] <= s.max[h]);
                let constant = ds.class_samples(label).all(|x| x.values[h] == s.min[h]);
                prop_assert_eq!(s.stdev[h] == 0.0, constant);
            }
        }
    }

    #[test]
    fn interpolation_stays_between_neighbours(
        values in prop::array::uniform24(0.0..300.0f64),
        gaps in prop::collection::btree_set(0usize..24, 0..=2),
    ) {
        let date = NaiveDate::from_ymd_opt(2017, 3, 9).unwrap();
        let records: Vec<HourlyRecord> = (0..24u8).map(|h| HourlyRecord {
            date,
            hour: h,
            value: if gaps.contains(&(h as usize)) { None } else { Some(values[h as usize]) },
            station_id: "s".into(),
        }).collect();
        let built = build_daily_series(&records).unwrap();
        prop_assert_eq!(built.series.len(), 1);
        let out = built.series[0].values;
        prop_assert!(out.iter().all(|v| v.is_finite()));
        for &g in &gaps {
            let prev = (0..g).rev().find(|i| !gaps.contains(i)).map(|i| values[i]);
            let next = (g + 1..24).find(|i| !gaps.contains(i)).map(|i| values[i]);
            let ns: Vec<f64> = prev.into_iter().chain(next).collect();
            let lo = ns.iter().cloned().fold(f64::INFINITY, f64::min);
            let hi = ns.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
            prop_assert!(out[g] >= lo - 1e-12 && out[g] <= hi + 1e-12);
        }
    }

    #[test]
    fn ranking_is_an_order_independent_permutation(
        stats in prop::collection::vec((0.0..30.0f64, 0.0..5.0f64), 1..12),
        rotate in 0usize..12,
    ) {
        let reports: Vec<RmseReport> = stats.iter().enumerate().map(|(i, &(mean, stdev))| RmseReport {
            dataset_name: format!("d{i:02}"),
            source: None,
            sample_count: 1,
            overall: RmseSummary { min: 0.0, mean, stdev, max: 50.0 },
            per_class: vec![],
        }).collect();
        let ranked = rank_datasets(reports.clone());
        let mut names: Vec<_> = ranked.iter().map(|r| r.dataset_name.clone()).collect();
        prop_assert!(ranked.windows(2).all(|w| w[0].overall.mean <= w[1].overall.mean));
        let mut rotated = reports.clone();
        rotated.rotate_left(rotate % reports.len());
        prop_assert_eq!(&rank_datasets(rotated), &ranked);
        names.sort();
        let mut orig: Vec<_> = reports.iter().map(|r| r.dataset_name.clone()).collect();
        orig.sort();
        prop_assert_eq!(names, orig);
    }

    #[test]
    fn scaler_roundtrips(lo in -50.0..50.0f64, width in 1.0..500.0f64, t in 0.0..1.0f64) {
        let s = Scaler { min: lo, max: lo + width };
        let x = lo + t * width;
        let y = s.forward(x);
        prop_assert!((-1.0 - 1e-12..=1.0 + 1e-12).contains(&y));
        prop_assert!((s.inverse(y) - x).abs() < 1e-9);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(8))]

    #[test]
    fn generated_datasets_have_k_samples_per_label(k in 1usize..40, seed in any::<u64>()) {
        let arch = Architecture { hidden: vec![8], ..Architecture::default() };
        let gen = Generator::init(&arch, None, &mut ChaCha8Rng::seed_from_u64(seed)).unwrap();
        let fake = generate_fake_dataset(&gen, k, seed, "p", None).unwrap();
        prop_assert_eq!(fake.class_counts(), [k; 8]);
    }
}

#[test]
fn every_class_is_reachable() {
    let mut seen = [false; 8];
    let start = NaiveDate::from_ymd_opt(2015, 1, 1).unwrap();
    for d in 0..365 {
        seen[classify(start + Days::new(d)).index()] = true;
    }
    assert_eq!(seen, [true; 8]);
}
