//! Property-based invariants across the parameter space.

use std::sync::OnceLock;

use num_complex::Complex64;
use proptest::prelude::*;

use ckem::completeness::fiber_length;
use ckem::geometry::{self, BaseKind, BaseModel, LocalPoint};
use ckem::params::{validate, Bound, CaseId, ModelParams, ModelSpec};
use ckem::profiles::{closed_form_phi, ClosedFormExtra, MomentumProfile};
use ckem::reconstruction::Reconstruction;

fn linear_profile() -> &'static MomentumProfile {
    static CELL: OnceLock<MomentumProfile> = OnceLock::new();
    CELL.get_or_init(|| {
        let spec = ModelSpec {
            case: CaseId::I,
            d: 1,
            r: 1,
            lambda: -1.0,
            nu: 1.0,
            a: -1.0,
            b: 1.0,
            mu: Some(-3.0),
            x0: None,
            x1: None,
        };
        MomentumProfile::quadrature(&ModelParams::from_spec(&spec).unwrap()).unwrap()
    })
}

fn rank_two_setup() -> &'static (ModelParams, MomentumProfile, Reconstruction, BaseModel) {
    static CELL: OnceLock<(ModelParams, MomentumProfile, Reconstruction, BaseModel)> =
        OnceLock::new();
    CELL.get_or_init(|| {
        let spec = ModelSpec {
            case: CaseId::IV1,
            d: 1,
            r: 2,
            lambda: 1.0,
            nu: 0.0,
            a: 1.0,
            b: -1.0,
            mu: None,
            x0: None,
            x1: None,
        };
        let params = ModelParams::from_spec(&spec).unwrap();
        let profile = MomentumProfile::quadrature(&params).unwrap();
        let recon = Reconstruction::build(&profile).unwrap();
        let base = BaseModel::new(BaseKind::FubiniStudyChart, 1.0, 1).unwrap();
        (params, profile, recon, base)
    })
}

proptest! {
    /// Positivity of the conformal factor and of the weight argument on each
    /// admissible tuple, sampled along the compactified interval.
    #[test]
    fn admissible_case_i_tuples_are_positive(
        a in -3.0f64..-0.1,
        lam_off in 0.0f64..2.5,
        mu in -5.0f64..0.0,
        d in 1u32..4,
    ) {
        let lambda = a + lam_off;
        prop_assume!(lambda != 0.0);
        let spec = ModelSpec {
            case: CaseId::I, d, r: 1, lambda, nu: 1.0, a, b: 1.0,
            mu: Some(mu), x0: None, x1: None,
        };
        let params = ModelParams::from_spec(&spec).unwrap();
        prop_assert!(validate(&params).is_empty());
        for x in params.interior_grid(1000) {
            prop_assert!(params.f(x) > 0.0);
            prop_assert!(params.nu_lambda(x) > 0.0);
        }
    }

    /// `validate` is idempotent and reports violations in a fixed order
    /// regardless of how broken the tuple is.
    #[test]
    fn validate_is_stable_on_arbitrary_tuples(
        a in -2.0f64..2.0,
        b in -2.0f64..2.0,
        lambda in -2.0f64..2.0,
        nu in 0.0f64..1.0,
        mu in -2.0f64..2.0,
        r in 1u32..4,
    ) {
        prop_assume!(a != 0.0);
        let spec = ModelSpec {
            case: CaseId::II2, d: 1, r, lambda, nu: nu.round(), a, b,
            mu: Some(mu), x0: Some(Bound::Finite(-b / a)), x1: Some(Bound::Finite(2.0)),
        };
        if let Ok(params) = ModelParams::from_spec_unchecked(&spec) {
            let v1 = validate(&params);
            let v2 = validate(&params);
            prop_assert_eq!(&v1, &v2);
            let mut sorted = v1.clone();
            sorted.sort();
            prop_assert_eq!(v1, sorted);
        }
    }

    /// Fiber length is additive over adjacent interior subintervals.
    #[test]
    fn fiber_length_is_additive(split in 0.05f64..0.95) {
        let prof = linear_profile();
        let p = prof.params();
        let (a, b) = (0.02, 0.98);
        let m = a + split * (b - a);
        let whole = fiber_length(prof, p, a, b).unwrap().finite().unwrap();
        let left = fiber_length(prof, p, a, m).unwrap().finite().unwrap();
        let right = fiber_length(prof, p, m, b).unwrap().finite().unwrap();
        prop_assert!((whole - left - right).abs() < 1e-10);
    }

    /// Round trip x ↦ t ↦ x is the identity on the interior.
    #[test]
    fn reconstruction_round_trip(x in 0.02f64..0.98) {
        static CELL: OnceLock<Reconstruction> = OnceLock::new();
        let recon = CELL.get_or_init(|| Reconstruction::build(linear_profile()).unwrap());
        let t = recon.t_of_x(x).unwrap();
        let back = recon.x_of_t(t).unwrap();
        prop_assert!((back - x).abs() < 1e-9);
    }

    /// The printed polynomial family and the generic quadrature route agree
    /// at arbitrary interior points and weights.
    #[test]
    fn closed_form_matches_quadrature_pointwise(
        mu in -4.0f64..-0.05,
        xfrac in 0.02f64..0.95,
    ) {
        let spec = ModelSpec {
            case: CaseId::I, d: 1, r: 1, lambda: -1.0, nu: 1.0, a: -1.0, b: 1.0,
            mu: Some(mu), x0: None, x1: None,
        };
        let params = ModelParams::from_spec(&spec).unwrap();
        let x = xfrac; // interval is (0, 1)
        let quad = ckem::profiles::phi_quadrature(&params, x).unwrap();
        let closed = closed_form_phi(
            "1.6",
            1,
            x,
            &ClosedFormExtra { mu: Some(mu), ..Default::default() },
        )
        .unwrap();
        prop_assert!((quad - closed).abs() <= 1e-8 * (1.0 + closed.abs()),
            "mu={}, x={}: {} vs {}", mu, x, quad, closed);
    }

    /// Rotating the fiber by a unitary leaves t, the potential, the
    /// determinant and the scalar identities unchanged.
    #[test]
    fn unitary_fiber_invariance(theta in 0.0f64..std::f64::consts::TAU, phase in 0.0f64..std::f64::consts::TAU) {
        let (params, _profile, recon, base) = rank_two_setup();
        let z = vec![Complex64::new(0.2, 0.1)];
        let w = vec![Complex64::new(0.9, 0.2), Complex64::new(-0.3, 0.6)];
        let c = Complex64::new(theta.cos(), 0.0);
        let s = Complex64::from_polar(theta.sin(), phase);
        let w2 = vec![c * w[0] + s * w[1], -s.conj() * w[0] + c * w[1]];
        let p1 = LocalPoint::new(z.clone(), w).unwrap();
        let p2 = LocalPoint::new(z, w2).unwrap();
        prop_assert!((p1.fiber_log(&base, params.lambda) - p2.fiber_log(&base, params.lambda)).abs() < 1e-12);
        let d1 = geometry::metric_det_closed_form(&base, recon, params, &p1).unwrap();
        let d2 = geometry::metric_det_closed_form(&base, recon, params, &p2).unwrap();
        prop_assert!((d1 - d2).abs() <= 1e-10 * d1.abs());
        let f1 = geometry::potential(&base, recon, params, &p1).unwrap();
        let f2 = geometry::potential(&base, recon, params, &p2).unwrap();
        prop_assert!((f1 - f2).abs() <= 1e-10 * (1.0 + f1.abs()));
    }
}

/// Deliberately violating the positivity condition produces a matrix that
/// the factorization rejects.
#[test]
fn violated_positivity_is_detected() {
    let (params, _profile, _recon, base) = rank_two_setup();
    let point = LocalPoint::new(
        vec![Complex64::new(0.2, 0.1)],
        vec![Complex64::new(0.7, 0.0), Complex64::new(0.1, 0.2)],
    )
    .unwrap();
    // F″ > 0 violated: φ < 0 makes the fiber block indefinite
    let bad =
        geometry::metric_from_momentum_data(&base, params.nu, params.lambda, 2.0, -0.4, &point);
    assert!(!bad.is_positive_definite());
    // ν + λF′ > 0 violated: x < 0 with ν = 0, λ > 0 breaks the base block
    let bad2 =
        geometry::metric_from_momentum_data(&base, params.nu, params.lambda, -0.5, 0.4, &point);
    assert!(!bad2.is_positive_definite());
    // admissible data stays positive definite
    let good =
        geometry::metric_from_momentum_data(&base, params.nu, params.lambda, 2.0, 0.4, &point);
    assert!(good.is_positive_definite());
}
