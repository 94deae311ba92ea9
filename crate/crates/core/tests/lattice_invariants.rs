use std::f64::consts::PI;

use latstab::lattice::{lambda0_sq, lambda_sq, pairings, Grid, GridFunction, Lattice};
use latstab::models::plane_wave;
use proptest::prelude::*;

fn field(grid: &Grid, vals: &[f64]) -> GridFunction<f64> {
    let m = 2;
    let mut i = 0;
    GridFunction::from_fn(grid, m, |_, out| {
        for o in out.iter_mut() {
            *o = vals[i % vals.len()];
            i += 1;
        }
    })
}

fn lattices() -> impl Strategy<Value = Lattice> {
    prop_oneof![Just(Lattice::triangular()), Just(Lattice::square())]
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn parseval_all_orders(l in lattices(), vals in prop::collection::vec(-1.0f64..1.0, 37)) {
        let g = Grid::new(l, 4).unwrap();
        let u = field(&g, &vals);
        let s = u.dft();
        for k in 0..=2 {
            let (a, b) = (u.norm_hk(k), s.norm_hk(k));
            prop_assert!((a - b).abs() <= 1e-10 * a.max(1e-300));
        }
    }

    #[test]
    fn dft_round_trip(vals in prop::collection::vec(-1.0f64..1.0, 29)) {
        let g = Grid::new(Lattice::triangular(), 4).unwrap();
        let u = field(&g, &vals);
        let back = u.dft().idft().real_part();
        prop_assert!(back.try_sub(&u).unwrap().norm_linf() < 1e-12);
    }

    #[test]
    fn norm_nesting(vals in prop::collection::vec(-1.0f64..1.0, 31)) {
        let g = Grid::new(Lattice::triangular(), 4).unwrap();
        let u = field(&g, &vals);
        prop_assert!(u.norm_hk(0) <= u.norm_hk(1));
        prop_assert!(u.norm_hk(1) <= u.norm_hk(2));
    }

    #[test]
    fn translations_commute(vals in prop::collection::vec(-1.0f64..1.0, 23), a in -3i64..3, b in -3i64..3) {
        let g = Grid::new(Lattice::triangular(), 4).unwrap();
        let u = field(&g, &vals);
        let x = u.forward_diff(&[1, 0]).forward_diff(&[0, 1]);
        let y = u.forward_diff(&[0, 1]).forward_diff(&[1, 0]);
        prop_assert!(x.try_sub(&y).unwrap().norm_linf() < 1e-9);
        let t = u.translate(&[a, b]).translate(&[-a, -b]);
        prop_assert_eq!(t, u);
    }

    #[test]
    fn projection_kills_mean(vals in prop::collection::vec(-5.0f64..5.0, 17)) {
        let g = Grid::new(Lattice::triangular(), 4).unwrap();
        let p = field(&g, &vals).project_zero_mean();
        prop_assert!(p.mean().iter().all(|m| m.abs() < 1e-13));
    }

    #[test]
    fn lambda_bounds(k0 in -8i64..8, k1 in -8i64..8) {
        let eps = 1.0 / 16.0;
        let l = Lattice::triangular();
        let k = [k0 as f64, k1 as f64];
        let xi = l.wavevector(&k);
        let xi2: f64 = xi.iter().map(|v| v * v).sum();
        let lam = lambda_sq(&pairings(&k), eps);
        // lower bound with the sine inequality, upper bound scaled by the pairing constant
        prop_assert!(lam <= l.pairing_bound() * (1.0 + xi2) + 1e-9);
        prop_assert!(lam >= 1.0 + 4.0 / (PI * PI) * pairings(&k).iter().map(|p| p * p).sum::<f64>() - 1e-9);
        prop_assert!(lambda0_sq(&pairings(&k), eps) <= lam + 1e-12);
    }
}

#[test]
fn h1_norm_of_plane_wave_matches_symbol_weights() {
    let g = Grid::new(Lattice::triangular(), 8).unwrap();
    let eps = g.eps();
    for k in [[1i64, 0], [2, -3], [-4, 5]] {
        let u = plane_wave(&g, 1, 0, &k);
        let w: f64 = k
            .iter()
            .map(|&kj| 4.0 / (eps * eps) * (PI * eps * kj as f64).sin().powi(2))
            .sum();
        let want = (1.0 + w).sqrt();
        assert!((u.norm_hk(1) - want).abs() < 1e-10 * want);
    }
}

#[test]
fn grid_rejects_zero_half_width() {
    assert!(Grid::new(Lattice::triangular(), 0).is_err());
}

#[test]
fn triangular_pairing_constant() {
    assert!((Lattice::triangular().pairing_bound() - 1.5).abs() < 1e-12);
    assert!((Lattice::square().pairing_bound() - 1.0).abs() < 1e-12);
}
