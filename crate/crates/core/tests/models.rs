use proptest::prelude::*;

use templab::jets::Jet;
use templab::models::{builtin_system, lambda_grid_max, BoxSet, CompactSpec, SatMap, BUILTIN_NAMES, LAMBDA_BAR_MARGIN};

fn norm(v: &[f64]) -> f64 {
    v.iter().map(|x| x * x).sum::<f64>().sqrt()
}

/// Line `s ↦ x + s d` pushed through `sat`, one component.
fn sat_line(sat: &SatMap, x: &[f64], d: &[f64], s: f64, c: usize) -> f64 {
    let p: Vec<f64> = x.iter().zip(d).map(|(a, b)| a + s * b).collect();
    sat.apply(&p)[c]
}

/// Richardson-extrapolated central difference of order `k` (1..=3).
fn derivative(f: &dyn Fn(f64) -> f64, k: usize, h: f64) -> f64 {
    let d = |h: f64| match k {
        1 => (f(h) - f(-h)) / (2.0 * h),
        2 => (f(h) - 2.0 * f(0.0) + f(-h)) / (h * h),
        3 => (f(2.0 * h) - 2.0 * f(h) + 2.0 * f(-h) - f(-2.0 * h)) / (2.0 * h.powi(3)),
        _ => unreachable!(),
    };
    (4.0 * d(h / 2.0) - d(h)) / 3.0
}

#[test]
fn saturation_jets_match_finite_differences() {
    let outer = BoxSet::symmetric(&[1.0, 1.0]).unwrap();
    let sat = SatMap::for_box(&outer);
    let rho = sat.radius();
    let d = [0.6, 0.8];
    // Inside the band, near its ends and beyond it.
    for r in [0.5 * rho, 1.05 * rho, 1.5 * rho, 1.95 * rho, 2.5 * rho] {
        let x = [r * 0.8, -r * 0.6];
        let line: Vec<Jet<f64>> = x.iter().zip(&d).map(|(a, b)| Jet::new(vec![*a, *b, 0.0, 0.0])).collect();
        let jets = sat.apply(&line);
        for c in 0..2 {
            let f = |s: f64| sat_line(&sat, &x, &d, s, c);
            for k in 1..=3 {
                let fd = derivative(&f, k, 2e-3);
                let jet = jets[c].coeff(k);
                assert!((jet - fd).abs() <= 1e-5 * jet.abs().max(1.0), "r = {r}, c = {c}, k = {k}: {jet} vs {fd}");
            }
        }
    }
}

#[test]
fn lambda_bar_is_stable_under_refinement() {
    for name in BUILTIN_NAMES {
        let inst = builtin_system(name).unwrap();
        let coarse = inst.spec.lambda_bar / (1.0 + LAMBDA_BAR_MARGIN);
        let fine = lambda_grid_max(&inst.system, &inst.spec.outer, 201);
        assert!((fine - coarse).abs() <= 0.02 * fine, "{name}: {coarse} vs {fine}");
        assert!(inst.spec.lambda_bar >= fine, "{name}: margin does not cover the refined maximum");
    }
}

#[test]
fn spec_rejects_inner_touching_outer() {
    let outer = BoxSet::symmetric(&[1.0, 1.0]).unwrap();
    let inner = BoxSet::new(vec![-1.0, -0.5], vec![0.5, 0.5]).unwrap();
    assert!(CompactSpec::with_lambda_bar(inner, outer.clone(), 1.0).is_err());
    let inner = BoxSet::symmetric(&[0.5, 0.5]).unwrap();
    assert!(CompactSpec::with_lambda_bar(inner.clone(), outer.clone(), -1.0).is_err());
    assert!(CompactSpec::with_lambda_bar(inner, outer, 0.0).is_ok());
}

proptest! {
    #[test]
    fn saturation_is_identity_on_the_outer_box(a in -2.0f64..2.0, b in -0.5f64..0.5) {
        let outer = BoxSet::new(vec![-2.0, -0.5], vec![2.0, 0.5]).unwrap();
        let sat = SatMap::for_box(&outer);
        prop_assert_eq!(sat.apply(&[a, b]), vec![a, b]);
    }

    #[test]
    fn saturation_is_bounded(x in prop::collection::vec(-1e6f64..1e6, 3), scale in 0.1f64..5.0) {
        let outer = BoxSet::symmetric(&[scale, 1.0, 0.5]).unwrap();
        let sat = SatMap::for_box(&outer);
        let y = sat.apply(&x);
        prop_assert!(norm(&y) <= sat.bound() * (1.0 + 1e-12));
        prop_assert!((sat.bound() - 2.0 * outer.max_norm()).abs() < 1e-15);
    }
}
