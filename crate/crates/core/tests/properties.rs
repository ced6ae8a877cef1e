//! Randomized invariants across the operator, eigen, kernel, state and
//! serialization layers.

use mml_core::actiondiff::{
    action_difference_in_position_basis, cauchy_hilbert_kernel, identity_minus_allones,
    momentum_in_basis, solve_elementwise,
};
use mml_core::eig::{eigh_tridiagonal, Spectrum};
use mml_core::hermite::{closed_form_defect, eigvec_recursion, hermite_zeros_oracle};
use mml_core::modal::{check_kocher_rotation, kocher_rotation, PositionBasis};
use mml_core::operators::{build_action_difference, build_position, SymTridiag};
use mml_core::report::export::MatrixDoc;
use mml_core::report::{CheckResult, Report, ToleranceRegistry};
use mml_core::spectra::shifted_solve;
use mml_core::states::{random_state, uncertainty_check, StateVector};
use mml_core::{ComplexMatrix, Error, LinearOperator, C64};
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn reg() -> &'static ToleranceRegistry {
    ToleranceRegistry::standard()
}

fn finite() -> impl Strategy<Value = f64> {
    prop_oneof![
        -1e3..1e3f64,
        any::<f64>().prop_filter("finite", |x| x.is_finite()),
        Just(0.0),
        Just(-0.0),
        Just(f64::MIN_POSITIVE),
        Just(5e-324),
    ]
}

fn tridiag() -> impl Strategy<Value = SymTridiag> {
    (1usize..40).prop_flat_map(|dim| {
        (
            prop::collection::vec(-10.0..10.0f64, dim),
            prop::collection::vec(-10.0..10.0f64, dim - 1),
        )
            .prop_map(|(d, e)| SymTridiag::new(d, e).unwrap())
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn eigensolver_residual_and_orthonormality(t in tridiag()) {
        let res = match eigh_tridiagonal(&t) {
            Err(Error::NearTie { .. }) => return Ok(()),
            other => other.unwrap(),
        };
        let vals = res.spectrum.values();
        prop_assert!(vals.windows(2).all(|w| w[0] <= w[1]));
        prop_assert!(res.vectors.orthonormality_defect() < 1e-12);

        let scale = t.max_abs_offdiag().max(t.max_abs_diag()).max(1.0);
        for (l, &lam) in vals.iter().enumerate() {
            let v = res.vectors.real_column(l);
            let tv = t.apply_real(&v);
            let r = tv.iter().zip(&v).map(|(a, b)| (a - lam * b).abs()).fold(0.0, f64::max);
            prop_assert!(r <= 1e-13 * t.dim() as f64 * scale, "residual {r:e}");
        }
        let trace: f64 = t.diag().iter().sum();
        let sum: f64 = vals.iter().sum();
        prop_assert!((trace - sum).abs() <= 1e-12 * scale * t.dim() as f64);
    }

    #[test]
    fn position_spectrum_is_symmetric_and_matches_oracle(n in 0usize..60) {
        let spec = eigh_tridiagonal(&build_position(n).unwrap()).unwrap().spectrum;
        prop_assert!(spec.symmetry_defect() <= 1e-12);
        let oracle = hermite_zeros_oracle(n + 1).unwrap();
        for (a, b) in spec.values().iter().zip(oracle.values()) {
            prop_assert!((a - b).abs() <= 1e-12 * b.abs().max(1.0));
        }
    }

    #[test]
    fn last_row_is_constant(n in 0usize..150) {
        let basis = PositionBasis::new(n).unwrap();
        let target = 1.0 / ((n + 1) as f64).sqrt();
        for l in 0..=n {
            prop_assert!((basis.modal.get(n, l).re - target).abs() <= 1e-10);
        }
    }

    #[test]
    fn recursion_tracks_closed_form(n in 1usize..120, pick in 0usize..1000) {
        let zeros = hermite_zeros_oracle(n + 1).unwrap();
        let lambda = zeros.values()[pick % (n + 1)];
        let v = eigvec_recursion(n, lambda).unnormalized();
        prop_assert!(closed_form_defect(&v, lambda) <= 1e-12);
    }

    #[test]
    fn action_difference_becomes_identity_minus_allones(n in 0usize..80) {
        let basis = PositionBasis::new(n).unwrap();
        let dq = action_difference_in_position_basis(&basis).unwrap();
        let err = dq.max_abs_diff(&identity_minus_allones(n + 1)).unwrap();
        prop_assert!(err <= reg().tol("identity_minus_allones", n));
        let d = build_action_difference(n).unwrap();
        prop_assert_eq!(d.trace(), 0.0);
    }

    #[test]
    fn kernel_is_antisymmetric_and_hermitian(mut xs in prop::collection::vec(-20.0..20.0f64, 1..30)) {
        xs.sort_by(f64::total_cmp);
        xs.dedup_by(|a, b| (*a - *b).abs() < 1e-6);
        let nodes = Spectrum::new(xs).unwrap();
        let k = cauchy_hilbert_kernel(&nodes).unwrap().entries;
        for j in 0..k.dim() {
            prop_assert_eq!(k[(j, j)], C64::new(0.0, 0.0));
            for l in 0..k.dim() {
                prop_assert_eq!(k[(j, l)], -k[(l, j)]);
                prop_assert_eq!(k[(j, l)].re, 0.0);
            }
        }
        prop_assert_eq!(k.hermitian_defect(), 0.0);
    }

    #[test]
    fn elementwise_solve_recovers_kernel(mut xs in prop::collection::vec(-20.0..20.0f64, 1..30)) {
        xs.sort_by(f64::total_cmp);
        xs.dedup_by(|a, b| (*a - *b).abs() < 1e-3);
        let dim = xs.len();
        let nodes = Spectrum::new(xs).unwrap();
        let k = cauchy_hilbert_kernel(&nodes).unwrap().entries;
        let p = solve_elementwise(&identity_minus_allones(dim), &nodes).unwrap();
        prop_assert!(p.max_abs_diff(&k).unwrap() <= 1e-12 * k.max_abs().max(1.0));
    }

    #[test]
    fn kocher_rotation_is_orthogonal(n in 1usize..200) {
        let r = kocher_rotation(n).unwrap();
        prop_assert!(check_kocher_rotation(&r, reg()).pass);
    }

    #[test]
    fn uncertainty_margin_holds(n in 1usize..60, seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let psi = random_state(n, &mut rng).unwrap();
        prop_assert!(psi.norm_deviation() <= 1e-12);
        let u = uncertainty_check(&psi, n).unwrap();
        prop_assert!(u.margin >= -1e-10, "margin {:e}", u.margin);
    }

    #[test]
    fn moments_agree_in_both_bases(n in 1usize..40, seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let psi = random_state(n, &mut rng).unwrap();
        let basis = PositionBasis::new(n).unwrap();
        let pq = momentum_in_basis(&basis).unwrap();
        let err = mml_core::states::moment_basis_invariance(&psi, &basis, &pq).unwrap();
        prop_assert!(err <= 1e-9);
    }

    #[test]
    fn embedding_is_isometric(coeffs in prop::collection::vec((-1.0..1.0f64, -1.0..1.0f64), 1..20), extra in 0usize..20) {
        let coeffs: Vec<C64> = coeffs.into_iter().map(|(a, b)| C64::new(a, b)).collect();
        prop_assume!(coeffs.iter().any(|c| c.norm() > 1e-3));
        let psi = StateVector::new(coeffs).unwrap();
        let padded = psi.embed(psi.dim() + extra).unwrap();
        let norm: f64 = padded.iter().map(|c| c.norm_sqr()).sum::<f64>().sqrt();
        prop_assert!((norm - 1.0).abs() <= 1e-12);
        prop_assert_eq!(&padded[..psi.dim()], psi.coeffs());
    }

    #[test]
    fn shifted_solve_has_small_residual(n in 0usize..80, re in -5.0..5.0f64, im in 0.05..5.0f64, seed in any::<u64>()) {
        let t = build_position(n).unwrap();
        let z = C64::new(re, im);
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let b = random_state(n, &mut rng).unwrap();
        let x = shifted_solve(&t, z, b.coeffs()).unwrap();
        let tx = t.apply(&x);
        let r = tx.iter().zip(&x).zip(b.coeffs())
            .map(|((a, xi), bi)| (a - z * xi - bi).norm())
            .fold(0.0, f64::max);
        let xmax = x.iter().map(|c| c.norm()).fold(0.0, f64::max);
        prop_assert!(r <= 1e-12 * (1.0 + xmax * (n as f64 + 1.0).sqrt()));
    }

    #[test]
    fn matrix_json_round_trip_is_bit_exact(
        dim in 1usize..8,
        vals in prop::collection::vec((finite(), finite()), 64),
    ) {
        let m = ComplexMatrix::from_fn(dim, |j, k| {
            let (a, b) = vals[(j * dim + k) % vals.len()];
            C64::new(a, b)
        });
        let doc = MatrixDoc::from_dense("P", &m);
        let back = MatrixDoc::from_json(&doc.to_json().unwrap()).unwrap();
        let m2 = back.to_dense().unwrap().unwrap();
        for (a, b) in m.as_slice().iter().zip(m2.as_slice()) {
            prop_assert_eq!(a.re.to_bits(), b.re.to_bits());
            prop_assert_eq!(a.im.to_bits(), b.im.to_bits());
        }
    }

    #[test]
    fn report_summary_tallies(errs in prop::collection::vec((0.0..2.0f64, 0usize..5), 0..30)) {
        let checks: Vec<CheckResult> = errs
            .iter()
            .enumerate()
            .map(|(i, &(e, n))| CheckResult::new(format!("c{}", i % 7), n, e, 1.0))
            .collect();
        let report = Report::new(serde_json::json!({}), checks);
        let failed = report.checks.iter().filter(|c| !c.pass).count();
        prop_assert_eq!(report.summary.failed, failed);
        prop_assert_eq!(report.summary.total, errs.len());
        prop_assert_eq!(report.all_passed(), failed == 0);
        prop_assert!(report.checks.windows(2).all(|w| (&w[0].name, w[0].n) <= (&w[1].name, w[1].n)));
        let back: Report = serde_json::from_str(&report.to_json().unwrap()).unwrap();
        prop_assert_eq!(back, report);
    }
}
