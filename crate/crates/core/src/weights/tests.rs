use super::*;
use crate::grid::generators::Generator;
use crate::grid::Grid;
use crate::oscillation::FamilySpec;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn setup(l: i32, s: i32, k_min: i32) -> (Grid, CubeFamily) {
    let g = Grid::new(1, l, s).unwrap();
    let fam = CubeFamily::dyadic(g, FamilySpec { k_min, k_max: l, translates: true }).unwrap();
    (g, fam)
}

fn power(g: Grid, gamma: f64) -> Weight {
    let f = Generator::PowerWeight { exponent: gamma, center: vec![0.0], floor: None }.build(g).unwrap();
    Weight::new(f).unwrap()
}

fn random_weight(g: Grid, seed: u64) -> Weight {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let v = (0..g.len()).map(|_| rng.gen_range(0.1..5.0)).collect();
    Weight::new(RealFunction::new(g, v).unwrap()).unwrap()
}

#[test]
fn unit_weight_constants_are_one() {
    let (g, fam) = setup(2, 4, -2);
    let w = Weight::new(RealFunction::constant(g, 1.0)).unwrap();
    assert_eq!(ap_constant(&w, 2.0, &fam).unwrap(), 1.0);
    assert_eq!(ap_constant(&w, 3.5, &fam).unwrap(), 1.0);
    assert_eq!(apq_constant(&w, 2.0, 4.0, &fam).unwrap(), 1.0);
    assert_eq!(ainf_constant(&w, &fam).unwrap(), 1.0);
    assert!(ap_constant(&w, 1.0, &fam).is_err());
}

#[test]
fn rejects_non_positive() {
    let g = Grid::new(1, 1, 2).unwrap();
    let mut v = vec![1.0; g.len()];
    v[3] = 0.0;
    assert!(Weight::new(RealFunction::new(g, v).unwrap()).is_err());
}

#[test]
fn exponent_relation() {
    let e = Exponents::new(2.0, 0.25, 1).unwrap();
    assert!((e.q - 4.0).abs() < 1e-12);
    assert!(Exponents::with_q(2.0, 4.0, 0.25, 1).is_ok());
    assert!(Exponents::with_q(2.0, 3.0, 0.25, 1).is_err());
    assert!(Exponents::new(2.0, 0.5, 1).is_err());
}

#[test]
fn sqrt_weight_is_stable_under_refinement() {
    let (g7, f7) = setup(2, 7, -3);
    let (g8, f8) = setup(2, 8, -3);
    let a = ap_constant(&power(g7, 0.5), 2.0, &f7).unwrap();
    let b = ap_constant(&power(g8, 0.5), 2.0, &f8).unwrap();
    assert!(((a - b) / a).abs() < 0.02, "{a} {b}");
}

#[test]
fn quadratic_weight_diverges_under_refinement() {
    let vals: Vec<f64> = (6..=8)
        .map(|s| {
            let (g, f) = setup(2, s, -3);
            ap_constant(&power(g, 2.0), 2.0, &f).unwrap()
        })
        .collect();
    assert!(vals[1] >= 1.5 * vals[0] && vals[2] >= 1.5 * vals[1], "{vals:?}");
}

#[test]
fn apq_matches_shifted_ap_of_power() {
    let (g, fam) = setup(2, 4, -2);
    let w = random_weight(g, 7);
    let (p, q) = (2.0, 4.0);
    let pp: f64 = p / (p - 1.0);
    let lhs = apq_per_cube(&w, p, q, &fam).unwrap();
    let rhs = ap_per_cube(&w.powf(q).unwrap(), 1.0 + q / pp, &fam).unwrap();
    for (a, b) in lhs.iter().zip(&rhs) {
        assert!(((a - b) / b).abs() < 1e-12);
    }
}

#[test]
fn power_apq_stability() {
    let stable: Vec<f64> = (6..=7)
        .map(|s| {
            let (g, f) = setup(2, s, -3);
            apq_constant(&power(g, 0.2), 2.0, 4.0, &f).unwrap()
        })
        .collect();
    assert!(((stable[1] - stable[0]) / stable[0]).abs() < 0.05, "{stable:?}");
    // ω^{-p'} = |x|^{-2γ} stops being integrable at γ = 1/2.
    let wild: Vec<f64> = (6..=7)
        .map(|s| {
            let (g, f) = setup(2, s, -3);
            apq_constant(&power(g, 0.8), 2.0, 4.0, &f).unwrap()
        })
        .collect();
    assert!(wild[1] > 1.5 * wild[0], "{wild:?}");
}

#[test]
fn ainf_of_sqrt_weight_is_finite() {
    let (g, fam) = setup(2, 6, -3);
    let w = power(g, 0.5);
    let a = ainf_constant(&w, &fam).unwrap();
    let ap = ap_constant(&w, 2.0, &fam).unwrap();
    assert!(a >= 1.0 && a.is_finite() && a <= 10.0 * ap, "{a} {ap}");
}

#[test]
fn ainf_two_valued_matches_brute_force() {
    let (g, fam) = setup(1, 3, -1);
    let w = Weight::new(RealFunction::from_fn(g, |x| if x[0] < 0.0 { 1.0 } else { 10.0 }).unwrap()).unwrap();
    let fast = ainf_per_cube(&w, &fam).unwrap();
    for (q, got) in fam.cubes().iter().zip(fast) {
        let mut integral = 0.0;
        for i in q.cells() {
            let mut best: f64 = 0.0;
            for r in fam.cubes() {
                if r.contains_cell(i) {
                    let mass: f64 = r.cells().filter(|&j| q.contains_cell(j)).map(|j| w.get(j)).sum();
                    best = best.max(mass / r.cell_count() as f64);
                }
            }
            integral += best;
        }
        let wq: f64 = q.cells().map(|j| w.get(j)).sum();
        assert!((integral / wq - got).abs() < 1e-12 * got);
    }
}

#[test]
fn dual_weight_examples() {
    let (g, fam) = setup(1, 3, -1);
    let one = Weight::new(RealFunction::constant(g, 1.0)).unwrap();
    assert_eq!(dual_weight(&one, 2.5, &fam).unwrap().function().values(), one.function().values());
    let four = Weight::new(RealFunction::constant(g, 4.0)).unwrap();
    let s = dual_weight(&four, 2.0, &fam).unwrap();
    assert!(s.function().values().iter().all(|&v| v == 0.25));
    assert_eq!(ap_constant(&four, 2.0, &fam).unwrap(), 1.0);
    assert_eq!(ap_constant(&s, 2.0, &fam).unwrap(), 1.0);
    let r = random_weight(g, 11);
    let sigma = r.powf(1.0 - 1.5).unwrap();
    assert!(dual_identity_defect(&r, &sigma, 3.0, &fam).unwrap() < 1e-12);
    assert!(dual_weight(&r, 3.0, &fam).is_ok());
}

#[test]
fn reverse_holder_examples() {
    let (g, fam) = setup(1, 4, -2);
    let c = Weight::new(RealFunction::constant(g, 3.0)).unwrap();
    for e in [0.1, 1.0, 10.0] {
        assert!((reverse_holder_check(&c, e, &fam).unwrap() - 1.0).abs() < 1e-12);
    }
    let eps: Vec<f64> = (7..=8)
        .map(|s| {
            let (g, f) = setup(2, s, -3);
            reverse_holder_threshold(&power(g, 0.5), &f).unwrap()
        })
        .collect();
    assert!(eps[0] > 0.0 && ((eps[1] - eps[0]) / eps[0]).abs() < 0.2, "{eps:?}");
    let spiked: Vec<f64> = [10.0, 100.0, 1000.0]
        .iter()
        .map(|&hgt| {
            let w = RealFunction::from_fn(g, |x| if (x[0] - 0.3).abs() < 0.05 { hgt } else { 1.0 }).unwrap();
            reverse_holder_threshold(&Weight::new(w).unwrap(), &fam).unwrap()
        })
        .collect();
    assert!(spiked[0] > spiked[1] && spiked[1] > spiked[2], "{spiked:?}");
}

#[test]
fn conjugation_examples() {
    let (g, fam) = setup(2, 6, -3);
    let w = power(g, 0.5);
    let ap = ap_constant(&w, 2.0, &fam).unwrap();
    let b = RealFunction::from_fn(g, |x| x[0].sin()).unwrap();
    let zero = conjugate_constant(&w, 2.0, std::slice::from_ref(&b), &[Complex64::new(0.0, 0.0)], &fam).unwrap();
    assert_eq!(zero, ap);
    let s = 0.3;
    let bounded = conjugate_constant(&w, 2.0, std::slice::from_ref(&b), &[Complex64::new(s, 0.2)], &fam).unwrap();
    assert!(bounded <= (2.0 * s * 1.0 * 2.0f64).exp() * ap);
    assert!(conjugate_constant(&w, 2.0, std::slice::from_ref(&b), &[], &fam).is_err());

    let b1 = Generator::LogAbs { center: vec![0.0], scale: 1.0, floor: None }.build(g).unwrap();
    let b2 = RealFunction::from_fn(g, |x| x[0].cos()).unwrap();
    let consts = weight_constants(&w, 2.0, None, &fam).unwrap();
    let bmo = |b: &RealFunction| {
        crate::oscillation::bmo_norm(b, &fam, crate::oscillation::OscMethod::Mean).unwrap().value
    };
    let z1 = probe_radius(bmo(&b1), consts.pair_ainf).unwrap();
    let z2 = probe_radius(bmo(&b2), consts.pair_ainf).unwrap();
    let v = conjugate_constant(&w, 2.0, &[b1, b2], &[Complex64::new(z1, 0.0), Complex64::new(-z2, 0.0)], &fam)
        .unwrap();
    assert!(v <= 4f64.powi(2) * ap, "{v} vs {ap}");
}

#[test]
fn openness_search() {
    let (g, fam) = setup(2, 6, -3);
    let w = power(g, 0.5);
    let r = openness_exponent(&w, 2.0, &fam).unwrap();
    assert!(r > 1.0 && r < 2.0);
    assert!(ap_constant(&w, r, &fam).unwrap() <= 10.0 * ap_constant(&w, 2.0, &fam).unwrap());
}
