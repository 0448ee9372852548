use super::*;
use crate::grid::generators::Generator;
use crate::oscillation::FamilySpec;

fn family(g: Grid, k_min: i32) -> CubeFamily {
    CubeFamily::dyadic(g, FamilySpec { k_min, k_max: g.box_exponent(), translates: true }).unwrap()
}

#[test]
fn parameter_formulas() {
    assert_eq!(d3_from(5, 0.25, 1), 12);
    assert_eq!(lambda_tilde(0.25), 0.375);
    assert_eq!(v_from(0.25, 1), 4);
    assert_eq!(d3_from(0, 0.25, 2), 6);
}

#[test]
fn constant_function_profile_and_approximant() {
    let g = Grid::new(1, 6, 3).unwrap();
    let fam = family(g, -1);
    let f = RealFunction::constant(g, 1.5);
    let p = limit_profile(&f, &fam, OscMethod::Mean).unwrap();
    for c in [&p.small_scale, &p.large_scale, &p.far_field] {
        assert!(!c.is_empty() && c.iter().all(|pt| pt.value == 0.0));
    }
    assert_eq!(
        cmo_check(&p, [1e-3, 1e-3, 1e-3]),
        CmoVerdict { small_scale: true, large_scale: true, far_field: true, conclusive: false }
    );
    let r = build_approximant(&f, 0.1, 0.25, &fam).unwrap();
    assert!(r.g_eps.values().iter().all(|&v| v == 1.5));
    assert!(r.g_eps_t.values().iter().all(|&v| v.abs() < 1e-12));
    assert_eq!(r.certificate.local_sup, 0.0);
    assert!(r.certificate.bmo < 1e-12);
    assert_eq!(r.params.d1, r.params.k_eps + 1);
    assert_eq!(r.params.d3, d3_from(r.params.d2, 0.25, 1));
}

#[test]
fn bump_profile_is_lipschitz_at_small_scales() {
    let g = Grid::new(1, 3, 6).unwrap();
    let fam = family(g, -4);
    let f = Generator::Bump { center: vec![0.0], radius: 1.0, height: 1.0 }.build(g).unwrap();
    let p = limit_profile(&f, &fam, OscMethod::Mean).unwrap();
    let lip = f.values().windows(2).map(|w| (w[1] - w[0]).abs()).fold(0.0, f64::max) / g.h();
    let last = p.small_scale.last().unwrap();
    assert!(last.value <= lip * last.x);
    for c in [&p.small_scale, &p.far_field] {
        let envelope: Vec<f64> = (0..c.len()).map(|i| c[i..].iter().map(|q| q.value).fold(0.0, f64::max)).collect();
        assert!(envelope.windows(2).all(|w| w[1] <= w[0]));
    }
    assert!(p.far_field.last().unwrap().value == 0.0);
    let t = [last.value * 1.01, p.large_scale.last().unwrap().value * 1.01, 1e-9];
    let v = cmo_check(&p, t);
    assert!(v.small_scale && v.large_scale && v.far_field && !v.conclusive);
}

#[test]
fn log_profile_stays_large_at_the_origin() {
    for s in 6..=8 {
        let g = Grid::new(1, 2, s).unwrap();
        let fam = family(g, 2 - s);
        let f = Generator::LogAbs { center: vec![0.0], scale: 1.0, floor: None }.build(g).unwrap();
        let p = limit_profile(&f, &fam, OscMethod::Mean).unwrap();
        assert!(p.small_scale.last().unwrap().value >= 0.1);
        assert!(!cmo_check(&p, [0.05, 10.0, 10.0]).small_scale);
        let finest = fam.cubes().iter().filter(|q| q.side_cells() == 4);
        let (mut touching, mut away) = (f64::INFINITY, 0.0f64);
        for q in finest {
            let o = mean_oscillation(&f, q).unwrap().oscillation;
            if q.contains_point(&[0.0]) {
                touching = touching.min(o);
            } else if q.lower()[0] >= 1.0 {
                away = away.max(o);
            }
        }
        assert!(touching >= 0.1 && away < 0.1 * touching, "{touching} {away}");
    }
}

#[test]
fn rejects_bad_arguments() {
    let g = Grid::new(1, 4, 3).unwrap();
    let fam = family(g, -1);
    let f = RealFunction::constant(g, 0.0);
    assert!(build_approximant(&f, 0.0, 0.25, &fam).is_err());
    assert!(build_approximant(&f, 0.1, 0.5, &fam).is_err());
}

#[test]
fn small_box_cannot_hold_the_outer_radius() {
    let g = Grid::new(1, 3, 5).unwrap();
    let fam = family(g, -3);
    let f = Generator::Bump { center: vec![0.0], radius: 4.0, height: 1.0 }.build(g).unwrap();
    let e = build_approximant(&f, 0.05, 0.25, &fam).unwrap_err();
    assert!(e.is_numerical(), "{e}");
}
