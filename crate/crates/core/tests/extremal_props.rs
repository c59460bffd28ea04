use engel_core::extremal::{
    abnormal_trajectory, cost_action, cost_length, from_h, normal_rhs_h, normal_rhs_natural, poisson_bracket, to_h,
};
use engel_core::geometry::frame_field;
use engel_core::ode::IntegratorConfig;
use engel_core::trajectory::{h_form_diagnostics, integrate_h_form, integrate_natural, max_drift};
use engel_core::{
    AbnormalExtremal, CanonicalCovector, ConfigurationPoint, CurvatureSign, ExtremalState, FirstIntegral, HCoordinates,
    HState,
};
use proptest::prelude::*;
use std::f64::consts::PI;

fn point() -> impl Strategy<Value = ConfigurationPoint> {
    (-5.0..5.0, -5.0..5.0, -PI..PI, -3.0..3.0).prop_map(|(x, y, t, k)| ConfigurationPoint::new(x, y, t, k))
}

fn natural_state() -> impl Strategy<Value = ExtremalState> {
    (point(), -PI..PI, -2.0..2.0, -2.0..2.0).prop_map(|(q, a, h3, h4)| ExtremalState::new(q, a, h3, h4))
}

proptest! {
    #[test]
    fn h_coordinates_round_trip(q in point(), h in prop::array::uniform4(-5.0..5.0f64)) {
        let h = HCoordinates::new(h[0], h[1], h[2], h[3]);
        let back = to_h(&from_h(&h, &q), &q);
        for (a, b) in back.to_array().iter().zip(h.to_array()) {
            prop_assert!((a - b).abs() <= 1e-12 * (1.0 + b.abs()) * (1.0 + q.k.abs()));
        }
    }

    #[test]
    fn h_coordinates_pair_covector_with_frame(q in point(), p in prop::array::uniform4(-5.0..5.0f64)) {
        let p = CanonicalCovector::new(p[0], p[1], p[2], p[3]);
        let h = to_h(&p, &q).to_array();
        for i in 1..=4 {
            let x = frame_field(i, &q).unwrap().to_array();
            let pairing: f64 = p.to_array().iter().zip(x).map(|(a, b)| a * b).sum();
            prop_assert!((pairing - h[i - 1]).abs() <= 1e-12);
        }
    }

    #[test]
    fn natural_and_h_forms_agree(s in natural_state()) {
        let nat = normal_rhs_natural(&s.to_array());
        let full = normal_rhs_h(&s.to_h_state().to_array());
        for i in 0..4 {
            prop_assert!((nat[i] - full[i]).abs() <= 1e-14);
        }
        // (cos α, sin α)' = α' (−sin α, cos α)
        let (sa, ca) = s.alpha.sin_cos();
        prop_assert!((full[4] + nat[4] * sa).abs() <= 1e-14);
        prop_assert!((full[5] - nat[4] * ca).abs() <= 1e-14);
        prop_assert!((nat[5] - full[6]).abs() <= 1e-14);
        prop_assert!((nat[6] - full[7]).abs() <= 1e-14);
    }

    #[test]
    fn first_integrals_are_in_involution(s in natural_state()) {
        for f in FirstIntegral::ALL {
            for g in FirstIntegral::ALL {
                prop_assert!(poisson_bracket(f, g, &s.to_h_state()).abs() <= 1e-7);
            }
        }
    }

    #[test]
    fn abnormal_curve_moves_along_second_field(k0 in -5.0..5.0f64, t in 0.0..10.0f64) {
        for sign in [CurvatureSign::Increasing, CurvatureSign::Decreasing] {
            let q = abnormal_trajectory(&AbnormalExtremal::new(k0, sign), t).unwrap();
            prop_assert_eq!((q.x, q.y, q.theta), (0.0, 0.0, 0.0));
            prop_assert_eq!(q.k, k0 + sign.value() * t);
            prop_assert_eq!(frame_field(2, &q).unwrap().to_array(), [0.0, 0.0, 0.0, 1.0]);
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(12))]

    #[test]
    fn first_integrals_are_conserved(s in natural_state()) {
        let traj = integrate_natural(&s, 20.0, &IntegratorConfig::default()).unwrap();
        let drift = traj.max_drift();
        prop_assert!(drift.max_abs() <= 1e-9, "{:?}", drift);
        for st in &traj.states {
            prop_assert!(st.controls().is_natural(1e-12));
        }
    }

    #[test]
    fn action_is_half_length_on_natural_extremals(s in natural_state(), t in 0.5..4.0f64) {
        let traj = integrate_natural(&s, t, &IntegratorConfig::default()).unwrap();
        let n = 401;
        let controls: Vec<_> = traj.uniform_samples(n).iter().map(|(_, s)| s.controls()).collect();
        let dt = t / (n - 1) as f64;
        let length = cost_length(&controls, dt).unwrap();
        let action = cost_action(&controls, dt).unwrap();
        prop_assert!((length - t).abs() <= 1e-9);
        prop_assert!((action - length / 2.0).abs() <= 1e-9);
    }
}

#[test]
fn h_form_conserves_integrals_off_the_unit_level() {
    let s0 = HState::new(
        ConfigurationPoint::new(0.2, -0.4, 0.9, 0.1),
        HCoordinates::new(0.6, 1.3, -0.2, 0.5),
    );
    let sol = integrate_h_form(&s0, 10.0, &IntegratorConfig::default()).unwrap();
    let drift = max_drift(&h_form_diagnostics(&sol));
    assert!(drift.max_abs() <= 1e-9, "{drift:?}");
}
