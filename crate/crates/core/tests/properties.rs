use covthresh::datagen::{
    build_covariance, invert_permutation, permute_variables, random_permutation, sample, ModelSpec,
    SampleSpec,
};
use covthresh::estimators::{
    band, ledoit_wolf, pairwise_covariance, pd_margin_check, sample_covariance, threshold,
    ObsMatrix, ThresholdSpec,
};
use covthresh::experiments::{compute_losses, run_replications, CvConfig, SummaryTable};
use covthresh::matcore::{
    cholesky, is_positive_definite, one_norm, operator_norm, sym_eigen, SymMatrix,
};
use covthresh::selection::{cv_risk, default_threshold_grid, full_band_grid, SplitScheme};
use covthresh::sparsity::{
    decay_class_check, decay_class_radius_bound, sparsity_radius, DecayClassParams,
};
use proptest::prelude::*;

fn sym_matrix(max_p: usize) -> impl Strategy<Value = SymMatrix> {
    (2..=max_p).prop_flat_map(|p| {
        prop::collection::vec(-2.0f64..2.0, p * p)
            .prop_map(move |v| SymMatrix::from_fn(p, |i, j| v[i * p + j]).expect("finite entries"))
    })
}

fn with_perm(max_p: usize) -> impl Strategy<Value = (SymMatrix, Vec<usize>)> {
    sym_matrix(max_p).prop_flat_map(|m| {
        let p = m.dim();
        (Just(m), Just((0..p).collect::<Vec<_>>()).prop_shuffle())
    })
}

/// `A A^T / p + delta I` for a random `A`.
fn pd_matrix(max_p: usize) -> impl Strategy<Value = SymMatrix> {
    (2..=max_p, 0.05f64..1.0).prop_flat_map(|(p, delta)| {
        prop::collection::vec(-1.0f64..1.0, p * p).prop_map(move |a| {
            SymMatrix::from_fn(p, |i, j| {
                let dot: f64 = (0..p).map(|k| a[i * p + k] * a[j * p + k]).sum();
                dot / p as f64 + if i == j { delta } else { 0.0 }
            })
            .unwrap()
        })
    })
}

fn spec(s: f64) -> ThresholdSpec {
    ThresholdSpec::all_entries(s).unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(1000))]

    #[test]
    fn thresholding_is_idempotent(m in sym_matrix(10), s in 0.0f64..2.0) {
        let once = threshold(&m, spec(s));
        prop_assert_eq!(threshold(&once, spec(s)), once);
    }

    #[test]
    fn support_shrinks_as_threshold_grows(m in sym_matrix(10), a in 0.0f64..2.0, b in 0.0f64..2.0) {
        let (lo, hi) = if a <= b { (a, b) } else { (b, a) };
        let t_lo = threshold(&m, spec(lo));
        let t_hi = threshold(&m, spec(hi));
        for (x, y) in t_lo.as_slice().iter().zip(t_hi.as_slice()) {
            prop_assert!(*y == 0.0 || x == y);
        }
    }

    #[test]
    fn thresholding_commutes_with_permutation((m, perm) in with_perm(10), s in 0.0f64..2.0) {
        let lhs = threshold(&m.permute(&perm).unwrap(), spec(s));
        let rhs = threshold(&m, spec(s)).permute(&perm).unwrap();
        prop_assert_eq!(lhs, rhs);
    }

    #[test]
    fn operator_norm_is_bounded_by_one_norm(m in sym_matrix(12)) {
        prop_assert!(operator_norm(&m).unwrap() <= one_norm(&m) + 1e-9);
    }

    #[test]
    fn pd_margin_implies_positive_definite(m in pd_matrix(8), s in 0.0f64..0.3) {
        let t = threshold(&m, spec(s));
        if pd_margin_check(&m, &t).unwrap() {
            prop_assert!(is_positive_definite(&t).unwrap());
        }
    }

    #[test]
    fn eigen_reconstruction(m in sym_matrix(12)) {
        let e = sym_eigen(&m).unwrap();
        let err = e.reconstruct().frobenius_dist_sq(&m).unwrap().sqrt();
        let scale = covthresh::matcore::frobenius_norm(&m).max(1e-300);
        prop_assert!(err <= 1e-8 * scale);
    }

    #[test]
    fn cholesky_round_trip(m in pd_matrix(12)) {
        let l = cholesky(&m).unwrap();
        let err = l.reconstruct().frobenius_dist_sq(&m).unwrap().sqrt();
        prop_assert!(err <= 1e-10 * covthresh::matcore::frobenius_norm(&m));
    }

    #[test]
    fn scaling_by_powers_of_two_is_exact(m in sym_matrix(8), s in 0.0f64..2.0, e in -4i32..4) {
        let c = 2f64.powi(e);
        let lhs = threshold(&m.scale(c), spec(c * s));
        prop_assert_eq!(lhs, threshold(&m, spec(s)).scale(c));
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn ties_are_kept(m in sym_matrix(8), i in 0usize..8, j in 0usize..8) {
        let p = m.dim();
        let (i, j) = (i % p, j % p);
        let s = m.get(i, j).abs();
        prop_assert_eq!(threshold(&m, spec(s)).get(i, j), m.get(i, j));
    }

    #[test]
    fn polynomial_decay_members_respect_the_radius_bound(
        p in 5usize..40,
        alpha in 0.2f64..2.0,
        eps in 0.05f64..0.3,
        q in 0.3f64..0.95,
    ) {
        prop_assume!((alpha + 1.0) * q > 1.0);
        let m = build_covariance(&ModelSpec::polynomial_decay(p, alpha, eps)).unwrap();
        let params = DecayClassParams::new(alpha, eps, 0.05).unwrap();
        let check = decay_class_check(&m, params).unwrap();
        if check.holds {
            let bound = decay_class_radius_bound(params, q).unwrap();
            prop_assert!(sparsity_radius(&m, q).unwrap() <= bound + 1e-12);
        }
    }

    #[test]
    fn permutation_round_trip(len in 1usize..50, seed in any::<u64>()) {
        let perm = random_permutation(len, seed);
        let inv = invert_permutation(&perm);
        for (i, &j) in perm.iter().enumerate() {
            prop_assert_eq!(inv[j], i);
        }
    }
}

fn ar_data(p: usize, n: usize, seed: u64) -> (SymMatrix, ObsMatrix) {
    let sigma = build_covariance(&ModelSpec::ar1(p, 0.7)).unwrap();
    let x = sample(&sigma, &SampleSpec::gaussian(n, seed)).unwrap();
    (sigma, x)
}

#[test]
fn pd_margin_property_is_not_vacuous() {
    let (sigma, x) = ar_data(10, 200, 4);
    let s = sample_covariance(&x).unwrap();
    assert!(pd_margin_check(&s, &threshold(&s, spec(0.05))).unwrap());
    assert!(pd_margin_check(&sigma, &sigma).unwrap());
}

#[test]
fn banding_is_not_permutation_equivariant() {
    let m = build_covariance(&ModelSpec::ar1(4, 0.5)).unwrap();
    let perm = [2, 0, 3, 1];
    let lhs = band(&m.permute(&perm).unwrap(), 1);
    let rhs = band(&m, 1).permute(&perm).unwrap();
    assert_ne!(lhs, rhs);
}

#[test]
fn permutation_invariant_losses() {
    let (sigma, x) = ar_data(12, 50, 7);
    let (xp, perm) = permute_variables(&x, 99);
    let sigma_p = sigma.permute(&perm).unwrap();
    let pairs = [
        (
            sample_covariance(&x).unwrap(),
            sample_covariance(&xp).unwrap(),
        ),
        (ledoit_wolf(&x).unwrap(), ledoit_wolf(&xp).unwrap()),
        (
            threshold(&sample_covariance(&x).unwrap(), spec(0.2)),
            threshold(&sample_covariance(&xp).unwrap(), spec(0.2)),
        ),
    ];
    for (a, b) in pairs {
        let la = compute_losses(&a, &sigma, "a", None).unwrap();
        let lb = compute_losses(&b, &sigma_p, "b", None).unwrap();
        assert!((la.frob_loss - lb.frob_loss).abs() < 1e-10);
        assert!((la.op_norm_loss - lb.op_norm_loss).abs() < 1e-10);
        assert!((la.one_norm_loss - lb.one_norm_loss).abs() < 1e-10);
    }
    let ba = band(&sample_covariance(&x).unwrap(), 1);
    let bb = band(&sample_covariance(&xp).unwrap(), 1);
    let la = compute_losses(&ba, &sigma, "a", None).unwrap();
    let lb = compute_losses(&bb, &sigma_p, "b", None).unwrap();
    assert!((la.frob_loss - lb.frob_loss).abs() > 1e-6);
}

#[test]
fn cv_is_bit_identical_across_runs_and_threads() {
    let (_, x) = ar_data(15, 60, 12);
    let scheme = SplitScheme::log_rule(60, 10, 5).unwrap();
    let grid = default_threshold_grid(&x, 5).unwrap();
    let a = cv_risk(&x, &grid, &scheme).unwrap();
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(3)
        .build()
        .unwrap();
    let b = pool.install(|| cv_risk(&x, &grid, &scheme).unwrap());
    let bits = |c: &[(f64, f64)]| c.iter().map(|r| r.1.to_bits()).collect::<Vec<_>>();
    assert_eq!(bits(&a), bits(&b));
    let band_grid = full_band_grid(15).unwrap();
    assert_eq!(
        cv_risk(&x, &band_grid, &scheme).unwrap(),
        cv_risk(&x, &band_grid, &scheme).unwrap()
    );
}

#[test]
fn pairwise_equals_sample_without_missing() {
    let (_, x) = ar_data(9, 40, 3);
    assert_eq!(
        pairwise_covariance(&x).unwrap(),
        sample_covariance(&x).unwrap()
    );
}

#[test]
fn replication_invariants() {
    let reps = run_replications(12, 40, 0.7, 4, 8, &CvConfig::simulation()).unwrap();
    for r in &reps {
        for rec in &r.records {
            assert!(rec.one_norm_loss >= rec.op_norm_loss - 1e-9, "{rec:?}");
            assert!(rec.frob_loss >= rec.op_norm_loss - 1e-9, "{rec:?}");
            assert!((0.0..=1.0).contains(&rec.pc1_abs_cos));
        }
    }
}

#[test]
fn summary_standard_error_matches_two_pass() {
    let reps = run_replications(8, 30, 0.7, 6, 2, &CvConfig::simulation()).unwrap();
    let table = SummaryTable::from_records(
        reps.iter()
            .flat_map(|r| r.records.iter().map(move |x| (r.p, x))),
    );
    for label in ["sample", "thresholding", "banding"] {
        let values: Vec<f64> = reps
            .iter()
            .flat_map(|r| r.records.iter())
            .filter(|x| x.estimator == label)
            .map(|x| x.op_norm_loss)
            .collect();
        let n = values.len() as f64;
        let mean = values.iter().sum::<f64>() / n;
        let sd = (values.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / (n - 1.0)).sqrt();
        let row = table.get(8, label, "operator").unwrap();
        assert!((row.mean - mean).abs() < 1e-14);
        assert!((row.se - sd / n.sqrt()).abs() < 1e-14);
    }
}
