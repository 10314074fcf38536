use nehari_core::{Field, Grid, RadialGrid};
use proptest::prelude::*;

fn sup_on(grid: &Grid, values: &[f64], exact: impl Fn(f64) -> f64, r_hi: f64) -> f64 {
    grid.nodes()
        .iter()
        .zip(values)
        .filter(|(&r, _)| r <= r_hi)
        .map(|(&r, &v)| (v - exact(r)).abs())
        .fold(0.0, f64::max)
}

// Δ²e^{-r²} from symbolic differentiation of u'' + (N-1)u'/r, twice
fn bilap_gaussian(dim: usize, r: f64) -> f64 {
    let r2 = r * r;
    let poly = match dim {
        3 => 4.0 * (4.0 * r2 * r2 - 20.0 * r2 + 15.0),
        5 => 4.0 * (4.0 * r2 * r2 - 28.0 * r2 + 35.0),
        _ => unreachable!(),
    };
    poly * (-r2).exp()
}

#[test]
fn bilaplacian_gaussian_matches_symbolic() {
    for dim in [3, 5] {
        let err = |n: usize| {
            let g = Grid::new(dim, 10.0, n).unwrap();
            let u = Field::from_fn(&g, |r| (-r * r).exp());
            let b = g.bilaplacian(&u).unwrap();
            sup_on(&g, b.values(), |r| bilap_gaussian(dim, r), 5.0)
        };
        let (e1, e2) = (err(1001), err(2001));
        assert!(e2 < 1e-2, "N = {dim}: {e2}");
        let ratio = e1 / e2;
        assert!((3.0..5.0).contains(&ratio), "N = {dim}: ratio {ratio}");
    }
}

#[test]
fn bilaplacian_of_quadratic_vanishes() {
    // coarse, since the composed stencil amplifies roundoff by h⁻⁴
    let g = Grid::new(3, 4.0, 41).unwrap();
    let u = Field::from_fn(&g, |r| r * r);
    let b = g.bilaplacian(&u).unwrap();
    // the two rows next to r_max see the Navier row Δu(r_max) = 0
    for &v in &b.values()[..g.len() - 2] {
        assert!(v.abs() < 1e-9, "{v}");
    }
}

#[test]
fn derivative_of_sine_is_second_order() {
    let err = |n: usize| {
        let g = Grid::new(3, 6.0, n).unwrap();
        let u = Field::from_fn(&g, f64::sin);
        let d = g.derivative(&u).unwrap();
        // sin is odd, so the even-symmetry value u'(0) = 0 does not apply
        let mut v = d.into_values();
        v[0] = 1.0;
        sup_on(&g, &v, f64::cos, 6.0)
    };
    let (e1, e2) = (err(301), err(601));
    assert!(e2 < 1e-4);
    assert!((3.0..5.0).contains(&(e1 / e2)), "{}", e1 / e2);
}

#[test]
fn derivative_of_quadratic_is_exact() {
    let g = Grid::new(4, 3.0, 61).unwrap();
    let u = Field::from_fn(&g, |r| r * r);
    let d = g.derivative(&u).unwrap();
    for (&r, &v) in g.nodes().iter().zip(d.values()) {
        assert!((v - 2.0 * r).abs() < 1e-12, "r = {r}: {v}");
    }
    assert_eq!(d.values()[0], 0.0);
}

#[test]
fn gaussian_l2_norm() {
    let g = Grid::new(3, 12.0, 4001).unwrap();
    let u: Vec<f64> = g.nodes().iter().map(|r| (-r * r).exp()).collect();
    let exact = (std::f64::consts::PI / 2.0).powf(0.75);
    assert!((g.lp_norm(&u, 2.0).unwrap() / exact - 1.0).abs() < 1e-6);
}

#[test]
fn grid_for_coupling_range() {
    assert!(Grid::for_coupling(7, 10.0, 100, 0.0).is_ok());
    assert!(Grid::for_coupling(7, 10.0, 100, 1.0).is_err());
    assert!(Grid::for_coupling(2, 10.0, 100, 0.0).is_err());
    let g = Grid::new(3, 20.0, 2001).unwrap();
    assert!((g.spacing() - 0.01).abs() < 1e-15);
    assert_eq!(g.nodes()[0], 0.0);
    assert_eq!(*g.nodes().last().unwrap(), 20.0);
}

fn field_strategy(n: usize) -> impl Strategy<Value = Vec<f64>> {
    prop::collection::vec(-2.0..2.0f64, n)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn operators_are_linear(a in field_strategy(64), b in field_strategy(64), c in -3.0..3.0f64, dim in 3usize..=6) {
        let g: RadialGrid<f64> = Grid::new(dim, 5.0, 64).unwrap();
        let (fa, fb) = (Field::new(a).unwrap(), Field::new(b).unwrap());
        let combo = fa.axpy(c, &fb);
        for op in [Grid::laplacian, Grid::bilaplacian, Grid::derivative] {
            let lhs = op(&g, &combo).unwrap();
            let rhs = op(&g, &fa).unwrap().axpy(c, &op(&g, &fb).unwrap());
            let scale = 1.0 + lhs.sup_norm().max(rhs.sup_norm());
            prop_assert!(lhs.axpy(-1.0, &rhs).sup_norm() <= 1e-12 * scale);
        }
    }

    #[test]
    fn laplacian_is_finite_at_origin(a in field_strategy(32), dim in 3usize..=6) {
        let g = Grid::new(dim, 2.0, 32).unwrap();
        let lu = g.laplacian(&Field::new(a).unwrap()).unwrap();
        prop_assert!(lu.values()[0].is_finite());
    }

    #[test]
    fn lp_norm_is_homogeneous(a in field_strategy(48), c in 0.01..50.0f64, p in 1.0..8.0f64) {
        let g = Grid::new(3, 4.0, 48).unwrap();
        let scaled: Vec<f64> = a.iter().map(|x| c * x).collect();
        let lhs = g.lp_norm(&scaled, p).unwrap();
        let rhs = c * g.lp_norm(&a, p).unwrap();
        prop_assert!((lhs - rhs).abs() <= 1e-12 * (1.0 + rhs));
    }
}
