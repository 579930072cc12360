use hyperdyn::classify::almost_dense_periodic_probe;
use hyperdyn::cylinder::{cylinder_points, odometer_add, odometer_truncation, CylinderSystem, Word};
use hyperdyn::hyperspace::{hausdorff_distance, induced_map_k, period_of_set, FiniteSubset};
use hyperdyn::joinings::{enumerate_joinings, is_disjoint, orbit_closure};
use hyperdyn::measures::{
    barycenter, empirical_measure, enumerate_mn_lattice, prohorov_distance, pushforward, pushforward_by, ratio,
    AtomicMeasure, MeasureOnMeasures,
};
use hyperdyn::recurrence::{
    cylinder_return_times, fs_generate, ip_star_window_check, odometer_point_return_times, TimeSet,
};
use hyperdyn::sample::{instance_rng, random_measure, random_subset, random_system};
use hyperdyn::{Exec, FactorMap, FiniteSystem};
use proptest::prelude::*;
use rand::Rng;

fn system(seed: u64, n: usize) -> FiniteSystem {
    random_system(&mut instance_rng(seed, 0), n).unwrap()
}

fn word(bits: Vec<bool>) -> Word {
    Word::new(bits.into_iter().map(u8::from).collect())
}

proptest! {
    #![proptest_config(ProptestConfig { cases: 64, failure_persistence: None, ..ProptestConfig::default() })]

    #[test]
    fn hausdorff_is_a_metric(seed in any::<u64>(), n in 1usize..9) {
        let s = system(seed, n);
        let mut rng = instance_rng(seed, 1);
        let sets: Vec<FiniteSubset> = (0..3).map(|_| random_subset(&mut rng, n, n).unwrap()).collect();
        let d = |i: usize, j: usize| hausdorff_distance(&s, &sets[i], &sets[j]).unwrap();
        for i in 0..3 {
            prop_assert_eq!(d(i, i), 0.0);
            for j in 0..3 {
                prop_assert_eq!(d(i, j), d(j, i));
                prop_assert_eq!(d(i, j) == 0.0, sets[i] == sets[j]);
                for k in 0..3 {
                    prop_assert!(d(i, k) <= d(i, j) + d(j, k) + 1e-9);
                }
            }
        }
    }

    #[test]
    fn singletons_embed_isometrically(seed in any::<u64>(), n in 1usize..9, x in 0usize..8, y in 0usize..8) {
        let s = system(seed, n);
        let (x, y) = (x % n, y % n);
        let sx = FiniteSubset::singleton(x, n).unwrap();
        let sy = FiniteSubset::singleton(y, n).unwrap();
        prop_assert_eq!(hausdorff_distance(&s, &sx, &sy).unwrap(), s.distance(x, y));
        let (dx, dy): (AtomicMeasure, AtomicMeasure) =
            (AtomicMeasure::dirac(x, n).unwrap(), AtomicMeasure::dirac(y, n).unwrap());
        prop_assert!((prohorov_distance(&s, &dx, &dy).unwrap() - s.distance(x, y).min(1.0)).abs() <= 1e-9);
    }

    #[test]
    fn induced_map_commutes_with_union(seed in any::<u64>(), n in 1usize..10) {
        let s = system(seed, n);
        let mut rng = instance_rng(seed, 2);
        let (a, b) = (random_subset(&mut rng, n, n).unwrap(), random_subset(&mut rng, n, n).unwrap());
        let lhs = induced_map_k(&s, &a.union(&b).unwrap()).unwrap();
        let rhs = induced_map_k(&s, &a).unwrap().union(&induced_map_k(&s, &b).unwrap()).unwrap();
        prop_assert_eq!(lhs, rhs);
        let p = period_of_set(&s, &a, 1 << 12).unwrap().unwrap();
        prop_assert_eq!(s.global_period().unwrap() % p as u64, 0);
    }

    #[test]
    fn pushforward_is_affine(seed in any::<u64>(), n in 1usize..9, t in 0i64..=8) {
        let s = system(seed, n);
        let mut rng = instance_rng(seed, 3);
        let (mu, nu) = (random_measure(&mut rng, n, n).unwrap(), random_measure(&mut rng, n, n).unwrap());
        let w = ratio(t, 8);
        let lhs = pushforward(&s, &mu.mix(&nu, w.clone()).unwrap()).unwrap();
        let rhs = pushforward(&s, &mu).unwrap().mix(&pushforward(&s, &nu).unwrap(), w).unwrap();
        prop_assert_eq!(lhs, rhs);
    }

    #[test]
    fn barycenter_commutes_with_pushforward(seed in any::<u64>(), n in 1usize..8, k in 1usize..5) {
        let s = system(seed, n);
        let mut rng = instance_rng(seed, 4);
        let thetas: Vec<AtomicMeasure> = (0..k).map(|_| random_measure(&mut rng, n, n).unwrap()).collect();
        let weights: Vec<i64> = (0..k).map(|_| rng.gen_range(1..=5)).collect();
        let total: i64 = weights.iter().sum();
        let nu = MeasureOnMeasures::new(
            thetas.iter().cloned().zip(weights.iter().map(|&w| ratio(w, total))).collect(),
        ).unwrap();
        let pushed = MeasureOnMeasures::new(
            thetas.iter().map(|t| pushforward(&s, t).unwrap()).zip(weights.iter().map(|&w| ratio(w, total))).collect(),
        ).unwrap();
        prop_assert_eq!(pushforward(&s, &barycenter(&nu).unwrap()).unwrap(), barycenter(&pushed).unwrap());
    }

    #[test]
    fn lattice_is_invariant(seed in any::<u64>(), n in 1usize..6, m in 1usize..4) {
        let s = system(seed, n);
        let lattice = enumerate_mn_lattice(&s, m).unwrap();
        for mu in &lattice {
            prop_assert!(lattice.contains(&pushforward(&s, mu).unwrap()));
        }
    }

    #[test]
    fn odometer_addition_is_a_group_law(len in 1usize..16, a in any::<u64>(), b in any::<u64>(), c in any::<u64>()) {
        let w = |v: u64| Word::from_index(v % (1 << len), len, 2);
        let (a, b, c) = (w(a), w(b), w(c));
        prop_assert_eq!(odometer_add(&a, &b).unwrap(), odometer_add(&b, &a).unwrap());
        prop_assert_eq!(
            odometer_add(&odometer_add(&a, &b).unwrap(), &c).unwrap(),
            odometer_add(&a, &odometer_add(&b, &c).unwrap()).unwrap()
        );
        prop_assert_eq!(odometer_add(&a, &w(0)).unwrap(), a);
    }

    #[test]
    fn return_times_shrink_on_refinement(
        u in proptest::collection::vec(any::<bool>(), 1..6),
        v in proptest::collection::vec(any::<bool>(), 1..6),
        extra in any::<bool>(),
        odometer in any::<bool>(),
    ) {
        let sys = if odometer { CylinderSystem::Odometer } else { CylinderSystem::FullShift { alphabet: 2 } };
        let (u, v) = (word(u), word(v));
        let mut longer = u.symbols().to_vec();
        longer.push(u8::from(extra));
        let base = cylinder_return_times(&sys, &u, &v).unwrap().window(128).unwrap();
        let finer = cylinder_return_times(&sys, &Word::new(longer), &v).unwrap().window(128).unwrap();
        let mut longer_v = v.symbols().to_vec();
        longer_v.push(u8::from(extra));
        let finer_target = cylinder_return_times(&sys, &u, &Word::new(longer_v)).unwrap().window(128).unwrap();
        prop_assert!(finer.is_subset_of(&base));
        prop_assert!(finer_target.is_subset_of(&base));
        prop_assert!(cylinder_return_times(&sys, &u, &u).unwrap().contains(0));
    }

    #[test]
    fn odometer_orbit_visits_cylinder_on_a_residue_class(x in any::<u64>(), w in 0u64..64, len in 1usize..7) {
        let depth = 8;
        let xw = Word::from_index(x % (1 << depth), depth, 2);
        let ww = Word::from_index(w % (1 << len), len, 2);
        let times = odometer_point_return_times(&xw, &ww).unwrap().window(256).unwrap();
        let t = odometer_truncation(depth as u32).unwrap();
        let target = cylinder_points(depth as u32, &ww).unwrap();
        let brute = TimeSet::from_predicate(256, |n| target.contains(&t.iterate(xw.index(2) as usize, n as usize))).unwrap();
        prop_assert_eq!(times, brute);
    }

    #[test]
    fn empirical_measures_on_cylinders_converge(x in 0usize..1024, len in 1usize..6, v in 0u64..32) {
        // along 2^k steps every open cylinder gets its Haar mass exactly
        let t = odometer_truncation(10).unwrap();
        let c = Word::from_index(v % (1 << len), len, 2);
        let pts = cylinder_points(10, &c).unwrap();
        for k in len..=10 {
            let e = empirical_measure(&t, x, 1 << k).unwrap();
            prop_assert_eq!(e.mass_of(&pts), ratio(1, 1 << len));
        }
    }

    #[test]
    fn disjointness_is_symmetric(a in 1usize..7, b in 1usize..7, seed in any::<u64>()) {
        let (x, y) = (system(seed, a), system(seed ^ 1, b));
        prop_assert_eq!(is_disjoint(&x, &y).unwrap().disjoint, is_disjoint(&y, &x).unwrap().disjoint);
        let xy = x.product(&y).unwrap();
        for j in enumerate_joinings(&x, &y).unwrap() {
            prop_assert!(j.verify(&x, &y));
            for &p in j.pairs() {
                let closure = orbit_closure(&xy, p).unwrap();
                prop_assert!(closure.elements().iter().all(|q| j.pairs().contains(q)));
            }
        }
    }

    #[test]
    fn multiples_meet_every_fs_set(p in 1u64..6, gens in proptest::collection::vec(1u64..20, 6..8)) {
        // among p generators some nonempty subset sum is divisible by p
        let fs = fs_generate(&gens).unwrap();
        let s = TimeSet::from_predicate(fs.window(), |n| n % p == 0).unwrap();
        let samples = ip_star_window_check(&s, &[gens]).unwrap();
        prop_assert!(samples[0].intersects);
    }
}

#[test]
fn probe_survives_products_and_factors() {
    for seed in 0..20u64 {
        let mut rng = instance_rng(seed, 5);
        let n = rng.gen_range(2..7);
        let x = system(seed, n);
        let u = random_subset(&mut rng, n, n).unwrap();
        let Some(w) = almost_dense_periodic_probe(&x, u.elements(), 0.5, Exec::default()).unwrap() else {
            continue;
        };
        let k = rng.gen_range(1..4);
        let xy = x.product(&FiniteSystem::cycle(k).unwrap()).unwrap();
        let lifted: Vec<usize> = u.elements().iter().flat_map(|&a| (0..k).map(move |b| a * k + b)).collect();
        let on_product = almost_dense_periodic_probe(&xy, &lifted, 0.5, Exec::default()).unwrap().unwrap();
        if w.complement_mass == "0" {
            assert_eq!(on_product.complement_mass, "0", "seed {seed}");
        }
    }
    for k in 1..=6usize {
        let f = FactorMap::cycle_reduction(2 * k, k).unwrap();
        let big = FiniteSystem::cycle(2 * k).unwrap();
        let w = almost_dense_periodic_probe(&big, &[0], 0.99, Exec::default()).unwrap().unwrap();
        let pushed = pushforward_by(&f, &w.measure).unwrap();
        assert_eq!(pushed.mass_of(&[0]), w.measure.mass_of(&[0, k]));
    }
}
