use super::*;
use crate::grid::generators::Generator;
use crate::oscillation::FamilySpec;

fn line(l: i32, s: i32) -> Grid {
    Grid::new(1, l, s).unwrap()
}

fn indicator(g: Grid, a: f64, b: f64) -> RealFunction {
    Generator::Indicator { lower: vec![a], upper: vec![b], height: 1.0 }.build(g).unwrap()
}

fn riesz_half() -> KernelSpec {
    KernelSpec::homogeneous(1, 0.5, vec![1.0, 1.0]).unwrap()
}

#[test]
fn fractional_integral_closed_form() {
    let g = line(2, 8);
    let v = apply_at(&riesz_half(), &indicator(g, 0.0, 1.0), &[2.0]).unwrap();
    assert!((v - 2.0 * (2f64.sqrt() - 1.0)).abs() < 1e-3, "{v}");
}

#[test]
fn hilbert_type_closed_form() {
    let g = line(2, 8);
    let k = KernelSpec::hilbert_type(0.0).unwrap();
    let v = apply_at(&k, &indicator(g, -1.0, 1.0), &[2.0]).unwrap();
    assert!((v - 3f64.ln()).abs() < 1e-3, "{v}");
}

#[test]
fn odd_kernel_cancels_on_even_input() {
    let g = line(2, 6);
    let k = KernelSpec::hilbert_type(0.0).unwrap();
    let f = RealFunction::from_fn(g, |x| (-x[0] * x[0]).exp()).unwrap();
    assert!(apply_at(&k, &f, &[0.0]).unwrap().abs() < 1e-10);
}

#[test]
fn grid_and_point_evaluation_agree_at_centres() {
    let g = line(1, 4);
    let k = riesz_half();
    let f = RealFunction::from_fn(g, |x| x[0].cos()).unwrap();
    let full = apply(&k, &f).unwrap();
    for i in [0, 7, 20, 63] {
        let x = g.center(i);
        assert_eq!(apply_at(&k, &f, &x[..1]).unwrap(), full.get(i));
    }
}

#[test]
fn constant_symbol_gives_zero() {
    let g = line(1, 5);
    let b = RealFunction::constant(g, 3.0);
    let f = RealFunction::from_fn(g, |x| x[0].sin()).unwrap();
    for m in 1..=3 {
        let c = SymbolPowerCommutator::new(KernelSpec::hilbert_type(0.0).unwrap(), b.clone(), m).unwrap();
        assert!(commutator(&c, &f).unwrap().values().iter().all(|&v| v == 0.0));
    }
}

#[test]
fn first_order_commutator_closed_form() {
    let g = line(2, 8);
    let b = RealFunction::from_fn(g, |x| x[0]).unwrap();
    let c = SymbolPowerCommutator::new(riesz_half(), b, 1).unwrap();
    let v = commutator_at(&c, &indicator(g, 0.0, 1.0), &[2.0]).unwrap();
    let exact = 2.0 / 3.0 * (2.0 * 2f64.sqrt() - 1.0);
    assert!((v - exact).abs() < 1e-3, "{v} vs {exact}");
}

fn bracket(b: &RealFunction, t: impl Fn(&RealFunction) -> RealFunction, f: &RealFunction) -> RealFunction {
    b.mul(&t(f)).unwrap().sub(&t(&b.mul(f).unwrap())).unwrap()
}

#[test]
fn second_order_matches_recursion() {
    let g = line(1, 4);
    let k = KernelSpec::hilbert_type(0.0).unwrap();
    let b = RealFunction::from_fn(g, |x| (1.3 * x[0]).sin() + 0.2 * x[0]).unwrap();
    let f = RealFunction::from_fn(g, |x| (-(x[0] - 0.3).powi(2)).exp()).unwrap();
    let c1 = SymbolPowerCommutator::new(k.clone(), b.clone(), 1).unwrap();
    let c2 = SymbolPowerCommutator::new(k, b.clone(), 2).unwrap();
    let rec = bracket(&b, |u| commutator(&c1, u).unwrap(), &f);
    let direct = commutator(&c2, &f).unwrap();
    for (a, r) in direct.values().iter().zip(rec.values()) {
        assert!((a - r).abs() < 1e-10, "{a} vs {r}");
    }
}

#[test]
fn multilinear_matches_power_and_recursion() {
    let g = line(1, 4);
    let k = riesz_half();
    let b1 = RealFunction::from_fn(g, |x| x[0].cos()).unwrap();
    let b2 = RealFunction::from_fn(g, |x| x[0] * x[0] / 4.0).unwrap();
    let f = RealFunction::from_fn(g, |x| 1.0 / (1.0 + x[0] * x[0])).unwrap();
    let same = multilinear_commutator(&[b1.clone(), b1.clone()], &k, &f).unwrap();
    let pow = commutator(&SymbolPowerCommutator::new(k.clone(), b1.clone(), 2).unwrap(), &f).unwrap();
    for (a, p) in same.values().iter().zip(pow.values()) {
        assert!((a - p).abs() < 1e-12);
    }
    let c1 = SymbolPowerCommutator::new(k.clone(), b1.clone(), 1).unwrap();
    let rec = bracket(&b2, |u| commutator(&c1, u).unwrap(), &f);
    let mixed = multilinear_commutator(&[b1, b2.clone()], &k, &f).unwrap();
    for (a, r) in mixed.values().iter().zip(rec.values()) {
        assert!((a - r).abs() < 1e-10);
    }
    let zero = multilinear_commutator(&[b2, RealFunction::constant(g, 1.0)], &k, &f).unwrap();
    assert!(zero.values().iter().all(|&v| v == 0.0));
    assert!(multilinear_commutator(&[], &k, &f).is_err());
}

#[test]
fn maximal_examples() {
    let g = line(2, 5);
    let fam = CubeFamily::dyadic(g, FamilySpec { k_min: -3, k_max: 2, translates: true }).unwrap();
    let f = indicator(g, 0.0, 1.0);
    assert!((maximal_at(&f, 0.0, &fam, &[0.5]).unwrap() - 1.0).abs() < 1e-12);
    assert!((maximal_at(&f, 0.0, &fam, &[2.0]).unwrap() - 0.5).abs() < 1e-12);
    assert!((maximal_at(&f, 0.5, &fam, &[0.5]).unwrap() - 1.0).abs() < 1e-12);
    assert!(maximal_at(&f, 1.0, &fam, &[0.5]).is_err());
    let m = maximal(&f, 0.0, &fam).unwrap();
    let q = Cube::interval(g, 0.0, 1.0).unwrap();
    assert_eq!(maximal_on(&f, 0.0, &fam, &q).unwrap(), m.gather(&q.cell_set()));
    assert!(m.values().iter().all(|&v| v <= 1.0 + 1e-12));
}

#[test]
fn truncation_scaling_orders() {
    let g = line(2, 7);
    let k = KernelSpec::hilbert_type(0.0).unwrap();
    let f = Generator::Bump { center: vec![0.0], radius: 1.5, height: 1.0 }.build(g).unwrap();
    let deltas = dyadic_radii(2, 5);
    let flat = SymbolPowerCommutator::new(k.clone(), RealFunction::constant(g, 2.0), 1).unwrap();
    assert!(truncation_error_scaling(&flat, &f, &deltas).unwrap().is_degenerate());
    let b = RealFunction::from_fn(g, |x| x[0].sin()).unwrap();
    let one = truncation_error_scaling(&SymbolPowerCommutator::new(k.clone(), b.clone(), 1).unwrap(), &f, &deltas)
        .unwrap();
    assert!(one.exponent.unwrap() >= 0.7, "{one:?}");
    let two = truncation_error_scaling(&SymbolPowerCommutator::new(k, b, 2).unwrap(), &f, &deltas).unwrap();
    assert!(two.exponent.unwrap() >= 1.7, "{two:?}");
    assert!(truncation_error_scaling(&flat, &f, &[0.5, 0.01]).is_err());
    assert!(truncation_error_scaling(&flat, &f, &[0.1, 0.2]).is_err());
}

#[test]
fn maximal_truncation_dominates_each_radius() {
    let g = line(1, 4);
    let k = KernelSpec::hilbert_type(0.0).unwrap();
    let f = indicator(g, -0.5, 1.0);
    let radii = dyadic_radii(0, 2);
    let t = maximal_truncation(&k, &f, &radii).unwrap();
    for &d in &radii {
        let a = apply(&k.with_truncation(d).unwrap(), &f).unwrap();
        assert!(a.values().iter().zip(t.values()).all(|(x, m)| x.abs() <= *m));
    }
}

#[test]
fn smoothness_ratio_is_bounded_for_named_kernels() {
    for name in [NamedKernel::Hilbert, NamedKernel::RieszLike, NamedKernel::LogDini] {
        let k = KernelSpec::named(1, 0.0, name).unwrap().with_truncation(0.25).unwrap();
        let mut worst: f64 = 0.0;
        for i in 1..40 {
            let y = [0.0, 0.0];
            let x = [0.05 * i as f64, 0.0];
            for t in [1e-3, 1e-2, 0.02] {
                if let Some(r) = smoothness_ratio(&k, x, [x[0] + t, 0.0], y) {
                    worst = worst.max(r);
                }
            }
        }
        assert!(worst.is_finite() && worst < 50.0, "{name:?}: {worst}");
    }
}
