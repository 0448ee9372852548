use cmo_bench::grid::{CellSet, Cube, Grid, RealFunction};
use cmo_bench::oscillation::{
    inf_mean_oscillation, local_osc, local_osc_inf, mean_oscillation, median, median_regularity, Centers,
    CubeFamily, FamilySpec,
};
use cmo_bench::rearrange::rearranged_value;
use cmo_bench::weights::{ap_per_cube, apq_per_cube, Weight};
use proptest::prelude::*;

const CELLS: usize = 64;

fn line() -> Grid {
    Grid::new(1, 1, 4).unwrap()
}

fn dyadic_values(len: usize) -> impl Strategy<Value = Vec<f64>> {
    prop::collection::vec((-40i32..=40).prop_map(|k| k as f64 / 8.0), len)
}

fn function(v: Vec<f64>) -> RealFunction {
    RealFunction::new(line(), v).unwrap()
}

/// `(lower index, side)` of a cube with at least two cells.
fn cube() -> impl Strategy<Value = (usize, usize)> {
    (2usize..=CELLS).prop_flat_map(|side| (0..=CELLS - side, Just(side)))
}

fn build(c: (usize, usize)) -> Cube {
    Cube::new(line(), [c.0, 0], c.1).unwrap()
}

/// Power-of-two sides keep cube averages of dyadic data exact.
fn dyadic_cube() -> impl Strategy<Value = (usize, usize)> {
    (1u32..=6).prop_flat_map(|k| (0..=CELLS - (1 << k), Just(1usize << k)))
}

fn lambda() -> impl Strategy<Value = f64> {
    prop::sample::select(vec![0.125, 0.25, 0.375, 0.5])
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(128))]

    #[test]
    fn mean_oscillation_sandwich(v in dyadic_values(CELLS), c in cube()) {
        let (f, q) = (function(v), build(c));
        let o = mean_oscillation(&f, &q).unwrap().oscillation;
        let inf = inf_mean_oscillation(&f, &q).unwrap().0;
        prop_assert!(inf <= o + 1e-10 && o <= 2.0 * inf + 1e-10);
    }

    #[test]
    fn local_oscillation_sandwich(v in dyadic_values(CELLS), c in cube(), l in lambda()) {
        let (f, q) = (function(v), build(c));
        let a = local_osc(&f, &q, l).unwrap();
        let t = local_osc_inf(&f, &q, l, Centers::Real).unwrap();
        prop_assert!(t <= a + 1e-10 && a <= 2.0 * t + 1e-10);
    }

    #[test]
    fn chebyshev(v in dyadic_values(CELLS), c in cube(), l in 0.01f64..0.99) {
        let (f, q) = (function(v), build(c));
        let bar = local_osc_inf(&f, &q, l, Centers::Complex).unwrap();
        let inf = inf_mean_oscillation(&f, &q).unwrap().0;
        prop_assert!(bar <= inf / l + 1e-10);
    }

    #[test]
    fn median_is_close_to_any_centre(v in dyadic_values(CELLS), c in cube(), centre in -6.0f64..6.0) {
        let (f, q) = (function(v), build(c));
        let m = median(&f, &q).unwrap().nearest(centre);
        let mut moduli: Vec<f64> = f.gather(&q.cell_set()).iter().map(|x| (x - centre).abs()).collect();
        let star = rearranged_value(&mut moduli, q.measure() / 2.0, line().cell_measure()).unwrap();
        prop_assert!((m - centre).abs() <= star);
    }

    #[test]
    fn nested_medians(v in dyadic_values(CELLS), outer in cube(), a in 0.0f64..1.0, b in 0.0f64..1.0, l in prop::sample::select(vec![0.125, 0.25, 0.375])) {
        let f = function(v);
        let q = build(outer);
        let side = 1 + (b * (outer.1 - 1) as f64) as usize;
        let lo = outer.0 + (a * (outer.1 - side) as f64) as usize;
        let inner = build((lo, side));
        let r = median_regularity(&f, &q, &inner, l).unwrap();
        prop_assume!(r.links_admissible);
        for (gap, osc) in &r.links {
            prop_assert!(*gap <= *osc);
        }
        prop_assert!(r.distance <= r.bound);
    }

    #[test]
    fn oscillations_ignore_constants(v in dyadic_values(CELLS), c in dyadic_cube(), k in -16i32..=16, l in lambda()) {
        let (f, q) = (function(v), build(c));
        let g = f.shift(k as f64 / 4.0).unwrap();
        prop_assert_eq!(mean_oscillation(&f, &q).unwrap().oscillation, mean_oscillation(&g, &q).unwrap().oscillation);
        prop_assert_eq!(inf_mean_oscillation(&f, &q).unwrap().0, inf_mean_oscillation(&g, &q).unwrap().0);
        prop_assert_eq!(local_osc(&f, &q, l).unwrap(), local_osc(&g, &q, l).unwrap());
        prop_assert_eq!(
            local_osc_inf(&f, &q, l, Centers::Real).unwrap(),
            local_osc_inf(&g, &q, l, Centers::Real).unwrap()
        );
    }

    #[test]
    fn oscillations_ignore_translation(v in dyadic_values(CELLS), lo in 0usize..16, side in 2usize..16, off in 0i64..32, l in lambda()) {
        let f = function(v);
        let q = build((lo + off as usize, side));
        let g = f.shifted([off, 0]);
        let p = build((lo, side));
        prop_assert_eq!(mean_oscillation(&f, &q).unwrap().oscillation, mean_oscillation(&g, &p).unwrap().oscillation);
        prop_assert_eq!(inf_mean_oscillation(&f, &q).unwrap().0, inf_mean_oscillation(&g, &p).unwrap().0);
        prop_assert_eq!(local_osc(&f, &q, l).unwrap(), local_osc(&g, &p, l).unwrap());
        prop_assert_eq!(median(&f, &q).unwrap(), median(&g, &p).unwrap());
    }
}

fn weight_grid() -> Grid {
    // 64 cells on [-4, 4]
    Grid::new(1, 2, 3).unwrap()
}

fn family() -> CubeFamily {
    CubeFamily::dyadic(weight_grid(), FamilySpec { k_min: -1, k_max: 1, translates: true }).unwrap()
}

fn weight_values() -> impl Strategy<Value = Vec<f64>> {
    prop::collection::vec((1i32..=64).prop_map(|k| k as f64 / 8.0), CELLS)
}

fn weight(v: Vec<f64>) -> Weight {
    Weight::new(RealFunction::new(weight_grid(), v).unwrap()).unwrap()
}

fn exponent() -> impl Strategy<Value = f64> {
    prop::sample::select(vec![1.5, 2.0, 3.0, 4.0])
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn ap_is_scale_invariant(v in weight_values(), p in exponent(), k in -4i32..=4) {
        let w = weight(v);
        let scaled = w.scale(2f64.powi(k)).unwrap();
        let a = ap_per_cube(&w, p, &family()).unwrap();
        let b = ap_per_cube(&scaled, p, &family()).unwrap();
        for (x, y) in a.iter().zip(&b) {
            prop_assert!((x - y).abs() <= 1e-13 * x);
        }
    }

    #[test]
    fn ap_is_at_least_one(v in weight_values(), p in exponent(), c in 1i32..=64) {
        for a in ap_per_cube(&weight(v), p, &family()).unwrap() {
            prop_assert!(a >= 1.0 - 1e-12);
        }
        let constant = weight(vec![c as f64 / 8.0; CELLS]);
        prop_assert!(ap_per_cube(&constant, p, &family()).unwrap().iter().all(|&a| (a - 1.0).abs() <= 1e-13));
        let unit = weight(vec![1.0; CELLS]);
        prop_assert!(ap_per_cube(&unit, p, &family()).unwrap().iter().all(|&a| a == 1.0));
    }

    #[test]
    fn doubling(v in weight_values(), p in exponent()) {
        let w = weight(v);
        let fam = family();
        for q in fam.cubes() {
            let Ok(big) = q.dilate(2.0) else { continue };
            let single = CubeFamily::from_cubes(weight_grid(), vec![big], "2Q").unwrap();
            let ap = ap_per_cube(&w, p, &single).unwrap()[0];
            let bound = 2f64.powf(p) * ap * w.cube_measure(q);
            prop_assert!(w.cube_measure(&big) <= bound * (1.0 + 1e-12));
        }
    }

    #[test]
    fn large_subsets_carry_mass(v in weight_values(), p in exponent(), c in cube(), picks in prop::collection::vec(any::<bool>(), CELLS)) {
        let w = weight(v);
        let q = Cube::new(weight_grid(), [c.0, 0], c.1).unwrap();
        let cells: Vec<usize> = q.cells().collect();
        let half = cells.len().div_ceil(2);
        let mut chosen: Vec<usize> = cells.iter().zip(&picks).filter(|(_, &k)| k).map(|(&i, _)| i).collect();
        for &i in &cells {
            if chosen.len() >= half {
                break;
            }
            if !chosen.contains(&i) {
                chosen.push(i);
            }
        }
        chosen.sort_unstable();
        let e = CellSet::new(weight_grid(), chosen).unwrap();
        let single = CubeFamily::from_cubes(weight_grid(), vec![q], "Q").unwrap();
        let ap = ap_per_cube(&w, p, &single).unwrap()[0];
        prop_assert!(w.measure(&e) / w.cube_measure(&q) >= 0.5f64.powf(p) / ap * (1.0 - 1e-12));
    }

    #[test]
    fn apq_matches_power_weight(v in weight_values(), p in exponent(), frac in 0.0f64..1.0) {
        // q ranges over (p, 32]; much larger q only amplifies rounding in the q-th power
        let q = 1.0 / (1.0 / p - frac * (1.0 / p - 1.0 / 32.0));
        let w = weight(v);
        let pp = p / (p - 1.0);
        let lhs = apq_per_cube(&w, p, q, &family()).unwrap();
        let rhs = ap_per_cube(&w.powf(q).unwrap(), 1.0 + q / pp, &family()).unwrap();
        for (a, b) in lhs.iter().zip(&rhs) {
            prop_assert!(((a - b) / b).abs() <= 1e-12);
        }
    }
}
