use std::f64::consts::PI;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use kdv_ginibre::distribution::{distribution_table, s_grid, QProfile};
use kdv_ginibre::ginibre_mc::{ks_distance, sample_max_real_eig, EmpiricalCdf, McConfig};
use kdv_ginibre::GammaParam;
use kdv_ginibre::Error;

#[test]
fn two_by_two_real_pair_probability() {
    let e = sample_max_real_eig(&McConfig::new(2, 100_000, 11).unwrap());
    assert_eq!(e.failures, 0);
    assert!((e.fraction_with_real() - 0.5f64.sqrt()).abs() < 0.01, "{}", e.fraction_with_real());
}

#[test]
fn mean_real_count_at_n_100() {
    let e = sample_max_real_eig(&McConfig::new(100, 400, 5).unwrap());
    let expect = (200.0 / PI).sqrt();
    assert!((e.mean_real_count() - expect).abs() / expect < 0.1, "{}", e.mean_real_count());
}

#[test]
fn determinism_across_worker_counts() {
    let cfg = McConfig::new(9, 200, 99).unwrap();
    let run = |threads| {
        rayon::ThreadPoolBuilder::new()
            .num_threads(threads)
            .build()
            .unwrap()
            .install(|| sample_max_real_eig(&cfg))
    };
    assert_eq!(run(1), run(3));
}

#[test]
fn inverse_cdf_samples_are_close_to_the_table() {
    let p = GammaParam::new(1.0).unwrap();
    let table = distribution_table(&QProfile::new(&p).unwrap(), &s_grid(-20.0, 12.0, 0.05).unwrap()).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let draws: Vec<f64> = (0..10_000)
        .map(|_| {
            let u: f64 = rng.random_range(table.f_values[0]..1.0);
            let i = table.f_values.partition_point(|&f| f < u).max(1);
            let (f0, f1) = (table.f_values[i - 1], table.f_values[i]);
            let (s0, s1) = (table.s_values[i - 1], table.s_values[i]);
            s0 + (s1 - s0) * (u - f0) / (f1 - f0)
        })
        .collect();
    let emp = EmpiricalCdf::from_samples(draws).unwrap();
    assert!(ks_distance(&emp, &table).unwrap() < 0.02);
    let off = EmpiricalCdf::from_samples(vec![100.0; 10]).unwrap();
    assert!(matches!(ks_distance(&off, &table), Err(Error::SupportMismatch { .. })));
}
