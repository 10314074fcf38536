use nehari_core::fibering::{fibering_table, project_with};
use nehari_core::{
    fibering_map, project_to_nehari, EnergyModel, Error, Field, Grid, Nonlinearity, Potential, Problem,
    ProjectionOptions, Rho,
};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn random_field(grid: &Grid, rng: &mut ChaCha8Rng) -> Field {
    let bumps: Vec<(f64, f64, f64)> = (0..3)
        .map(|_| {
            (
                rng.gen_range(0.2..2.0),
                rng.gen_range(0.0..3.0),
                rng.gen_range(0.6..2.0),
            )
        })
        .collect();
    Field::from_fn(grid, |r| {
        bumps.iter().map(|&(a, c, s)| a * (-((r - c) / s).powi(2)).exp()).sum()
    })
    .with_boundary()
}

fn spec(lambda: f64, m: f64, p: f64, rho: Rho) -> Problem {
    Problem::new(
        3,
        lambda,
        Potential::constant(1.0),
        Nonlinearity::power(m, p).unwrap(),
        rho,
    )
    .unwrap()
}

#[test]
fn lambda_zero_matches_closed_form_scale() {
    let g = Grid::new(3, 12.0, 801).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    for (m, p) in [(1.0, 5.0), (2.0, 6.0)] {
        let s = spec(0.0, m, p, Rho::SqrtShift);
        let model = EnergyModel::new(&g, &s).unwrap();
        for _ in 0..20 {
            let u = random_field(&g, &mut rng);
            let q = model.norm_v_sq(&u).unwrap();
            let lp = g.lp_norm(u.values(), p).unwrap().powf(p);
            let exact = (q / (m * lp)).powf(1.0 / (p - 2.0));
            let (rep, _) = project_to_nehari(&g, &s, &u).unwrap();
            assert!((rep.t_star / exact - 1.0).abs() < 1e-8, "{} vs {exact}", rep.t_star);
            assert_eq!(rep.critical_count, 1);
        }
    }
}

#[test]
fn closed_form_fibering_map() {
    let g = Grid::new(3, 10.0, 401).unwrap();
    let s = spec(0.0, 1.5, 5.0, Rho::SqrtShift);
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    let u = random_field(&g, &mut rng);
    let q = EnergyModel::new(&g, &s).unwrap().norm_v_sq(&u).unwrap();
    let lp = g.lp_norm(u.values(), 5.0).unwrap().powi(5);
    for t in [0.1, 0.7, 1.9] {
        let (gv, dg) = fibering_map(&g, &s, &u, t).unwrap();
        let want_g = 0.5 * t * t * q - 1.5 * t.powi(5) / 5.0 * lp;
        let want_dg = t * q - 1.5 * t.powi(4) * lp;
        assert!((gv - want_g).abs() <= 1e-12 * (1.0 + want_g.abs()));
        assert!((dg - want_dg).abs() <= 1e-12 * (1.0 + want_dg.abs()));
    }
}

#[test]
fn projected_fields_lie_on_the_manifold() {
    let g = Grid::new(3, 12.0, 801).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    for lambda in [0.0, 0.5, 2.0] {
        for rho in [
            Rho::Affine { a: 0.0, b: 1.0 },
            Rho::SqrtShift,
            Rho::PowerShift { alpha: 0.4 },
        ] {
            let s = spec(lambda, 1.0, 5.0, rho);
            let model = EnergyModel::new(&g, &s).unwrap();
            for _ in 0..5 {
                let u = random_field(&g, &mut rng);
                let (rep, v) = project_with(&model, &u, &ProjectionOptions::default()).unwrap();
                let q = model.norm_v_sq(&v).unwrap();
                assert!(model.nehari_value(&v).unwrap().abs() <= 1e-8 * q);
                assert!(model.nehari_slope(&v).unwrap() < 0.0);
                let e = model.energy(&v).unwrap().total;
                assert!(e >= 0.25 * q - 1e-10 && e > 0.0);
                // global-max selection dominates the whole scan
                let table = fibering_table(&model, &u, &ProjectionOptions::default()).unwrap();
                assert!(table
                    .iter()
                    .all(|&(_, gv, _)| gv <= rep.energy + 1e-12 * rep.energy.abs()));
                let (lo, hi) = rep.bracket;
                assert!(lo <= rep.t_star && rep.t_star <= hi);
            }
        }
    }
}

#[test]
fn ray_invariance() {
    let g = Grid::new(3, 12.0, 601).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    let s = spec(1.0, 1.0, 5.0, Rho::SqrtShift);
    for _ in 0..5 {
        let u = random_field(&g, &mut rng);
        let (rep, v) = project_to_nehari(&g, &s, &u).unwrap();
        assert_eq!(rep.critical_count, 1);
        for c in [0.1, 10.0] {
            let (rc, vc) = project_to_nehari(&g, &s, &u.scaled(c)).unwrap();
            assert!((rc.t_star * c / rep.t_star - 1.0).abs() < 1e-8);
            assert!(vc.axpy(-1.0, &v).sup_norm() <= 1e-8);
        }
    }
}

#[test]
fn degenerate_inputs() {
    let g = Grid::new(3, 10.0, 201).unwrap();
    let s = spec(1.0, 1.0, 5.0, Rho::SqrtShift);
    let tiny = Field::from_fn(&g, |r| 1e-13 * (-r * r).exp()).with_boundary();
    assert_eq!(project_to_nehari(&g, &s, &tiny).unwrap_err(), Error::ZeroField);
    let narrow = ProjectionOptions {
        t_min: 1e-3,
        t_max: 1e-2,
        ..Default::default()
    };
    let model = EnergyModel::new(&g, &s).unwrap();
    let u = Field::from_fn(&g, |r| (-r * r).exp()).with_boundary();
    assert!(matches!(
        project_with(&model, &u, &narrow),
        Err(Error::NoProjection { .. })
    ));
    let other = Grid::new(4, 10.0, 201).unwrap();
    assert!(project_to_nehari(&other, &s, &u).is_err());
}
