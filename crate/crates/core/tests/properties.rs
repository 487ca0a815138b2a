use jacobi_curves::curve::{curvature, infinitesimal_cross_ratio, derivative_curve_path, velocity_form, GrassmannCurve};
use jacobi_curves::lderivative::{l_derivative, LDerivData};
use jacobi_curves::linalg::{sym, Mat};
use jacobi_curves::maslov::{conjugate_points, maslov_index, maslov_index_with, pair_index, MaslovOptions};
use jacobi_curves::symplectic::sampling::{random_lagrangian, random_matrix, random_symmetric, random_symplectic};
use jacobi_curves::symplectic::{ind, matrix_inertia, projector, standard_space, Chart, Subspace};
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Symmetric matrix with all eigenvalues at distance ≥ `gap` from zero.
fn nondegenerate(n: usize, gap: f64, r: &mut ChaCha8Rng) -> Mat {
    loop {
        let s = random_symmetric(n, 2.0, r);
        if s.clone().symmetric_eigen().eigenvalues.iter().all(|v| v.abs() >= gap) {
            return s;
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn projector_identities(seed in any::<u64>(), n in 1usize..4) {
        let mut r = rng(seed);
        let space = standard_space(n);
        let v0 = random_lagrangian(&space, &mut r);
        let v1 = random_lagrangian(&space, &mut r);
        let v2 = random_lagrangian(&space, &mut r);
        prop_assume!(v0.is_transversal(&v1) && v0.is_transversal(&v2) && v1.is_transversal(&v2));
        let p01 = projector(&v0, &v1).unwrap();
        let p02 = projector(&v0, &v2).unwrap();
        let p12 = projector(&v1, &v2).unwrap();
        let scale = 1.0 + p01.norm() * p02.norm() + p12.norm() * p02.norm();
        prop_assert!((&p02 * &p12 - &p12).norm() <= 1e-8 * scale);
        prop_assert!((&p01 * &p02 - &p01).norm() <= 1e-8 * scale);
    }

    #[test]
    fn chart_matrices_are_symmetric_only_for_lagrangians(seed in any::<u64>(), n in 2usize..4) {
        let mut r = rng(seed);
        let space = standard_space(n);
        let chart = Chart::standard(&space);
        let l = random_lagrangian(&space, &mut r);
        if let Ok(rep) = chart.chart_coords(&l) {
            prop_assert!((&rep.s - rep.s.transpose()).norm() <= 1e-8 * (1.0 + rep.s.norm()));
        }
        let mut cols = random_matrix(2 * n, n, 1.0, &mut r);
        cols.view_mut((0, 0), (n, n)).fill_with_identity();
        let sub = Subspace::new(cols, 1e-12).unwrap();
        let s = chart.graph_matrix(&sub).unwrap();
        prop_assert!((&s - s.transpose()).norm() > 1e-6);
    }

    #[test]
    fn symplectic_maps_preserve_relations(seed in any::<u64>(), n in 1usize..4) {
        let mut r = rng(seed);
        let space = standard_space(n);
        let t = random_symplectic(n, 0.7, &mut r);
        let a = random_lagrangian(&space, &mut r);
        let b = random_lagrangian(&space, &mut r);
        let (ta, tb) = (a.transform(&t).unwrap(), b.transform(&t).unwrap());
        prop_assert_eq!(a.intersection_dim(&b), ta.intersection_dim(&tb));
        prop_assert_eq!(a.intersection_dim(&a), ta.intersection_dim(&ta));
        // Velocity-form inertia of a chart path and of its symplectic image.
        let s1 = nondegenerate(n, 0.1, &mut r);
        let chart = Chart::standard(&space);
        let c = GrassmannCurve::from_chart_path(&chart, (0.0, 1.0), move |tt| &s1 * tt).unwrap();
        let t2 = t.clone();
        let base = c.clone();
        let image = GrassmannCurve::new(&space, (0.0, 1.0), move |tt| Ok(&t2 * base.raw(tt)?)).unwrap();
        let i0 = velocity_form(&c, 0.5).unwrap().form.inertia(1e-9);
        let i1 = velocity_form(&image, 0.5).unwrap().form.inertia(1e-9);
        prop_assert_eq!(i0, i1);
    }

    #[test]
    fn ordered_pair_inverse_index_identity(seed in any::<u64>(), n in 1usize..5) {
        let mut r = rng(seed);
        let s0 = nondegenerate(n, 0.05, &mut r);
        let mut s1 = &s0 + { let p = random_matrix(n, n, 1.0, &mut r); &p * p.transpose() };
        s1 = sym(&s1);
        prop_assume!(s1.clone().symmetric_eigen().eigenvalues.iter().all(|v| v.abs() >= 0.05));
        let lhs = ind(&s0, 1e-12) as i64 - ind(&s1, 1e-12) as i64;
        let diff = sym(&(s0.clone().try_inverse().unwrap() - s1.clone().try_inverse().unwrap()));
        prop_assert_eq!(lhs, ind(&diff, 1e-9) as i64);
    }

    #[test]
    fn pair_index_triangle_inequality(seed in any::<u64>(), n in 1usize..4) {
        let mut r = rng(seed);
        let space = standard_space(n);
        let pi = random_lagrangian(&space, &mut r);
        let l: Vec<_> = (0..3).map(|_| random_lagrangian(&space, &mut r)).collect();
        let d02 = pair_index(&pi, &l[0], &l[2]).doubled;
        let d01 = pair_index(&pi, &l[0], &l[1]).doubled;
        let d12 = pair_index(&pi, &l[1], &l[2]).doubled;
        prop_assert!(d02 <= d01 + d12);
    }

    #[test]
    fn l_derivative_is_lagrangian_and_index_splits(seed in any::<u64>(), m in 1usize..4, extra in 1usize..4) {
        let mut r = rng(seed);
        let d = m + extra;
        let a = random_matrix(m, d, 1.0, &mut r);
        let q = nondegenerate(d, 0.05, &mut r);
        let data = LDerivData::new(a, q).unwrap();
        let frame = l_derivative(&data).unwrap();
        prop_assert!(frame.isotropy_defect() <= 1e-9);
        let (iq, ik, ia) = data.index_split().unwrap();
        prop_assert_eq!(iq, ik + ia);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(12))]

    #[test]
    fn curvature_routes_agree(seed in any::<u64>(), n in 1usize..3) {
        let mut r = rng(seed);
        let space = standard_space(n);
        let a = { let p = random_matrix(n, n, 1.0, &mut r); &p * p.transpose() + Mat::identity(n, n) };
        let b = random_symmetric(n, 0.5, &mut r);
        let c3 = random_symmetric(n, 0.3, &mut r);
        let c = GrassmannCurve::from_chart_path(&Chart::standard(&space), (0.0, 1.0), move |t| {
            &a * t + &b * (t * t) + &c3 * (t * t * t)
        }).unwrap();
        let t = 0.5;
        let direct = curvature(&c, t).unwrap();
        let dual = derivative_curve_path(&c).unwrap();
        let ratio = infinitesimal_cross_ratio(&dual, t, &c, t).unwrap();
        let m = ratio.matrix_in(&direct.basis).unwrap();
        let scale = 1.0 + direct.matrix.norm();
        prop_assert!((m - &direct.matrix).norm() <= 1e-5 * scale);
    }

    #[test]
    fn maslov_is_additive_and_schedule_free(seed in any::<u64>(), n in 1usize..4) {
        let mut r = rng(seed);
        let space = standard_space(n);
        let s0 = random_symmetric(n, 2.0, &mut r);
        let s1 = random_symmetric(n, 2.0, &mut r);
        let w = random_symmetric(n, 1.0, &mut r);
        let c = GrassmannCurve::from_chart_path(&Chart::standard(&space), (0.0, 1.0), move |t| {
            &s0 * (1.0 - t) + &s1 * t + &w * (3.0 * t).sin()
        }).unwrap();
        let pi = random_lagrangian(&space, &mut r);
        let whole = maslov_index(&c, &pi);
        prop_assume!(whole.is_ok());
        let whole = whole.unwrap().value;
        let split = 0.37;
        let (left, right) = (c.restrict(0.0, split).unwrap(), c.restrict(split, 1.0).unwrap());
        if let (Ok(a), Ok(b)) = (maslov_index(&left, &pi), maslov_index(&right, &pi)) {
            prop_assert_eq!(whole, a.value + b.value);
        }
        let other = maslov_index_with(&c, &pi, &MaslovOptions::with_schedule_offset(3)).unwrap().value;
        prop_assert_eq!(whole, other);
        // Small symplectic conjugation of the whole picture.
        let t = Mat::identity(2 * n, 2 * n) + (random_symplectic(n, 1e-4, &mut r) - Mat::identity(2 * n, 2 * n));
        let base = c.clone();
        let t2 = t.clone();
        let moved = GrassmannCurve::new(&space, (0.0, 1.0), move |tt| Ok(&t2 * base.raw(tt)?)).unwrap();
        if let Ok(rep) = maslov_index(&moved, &pi) {
            prop_assert_eq!(whole, rep.value);
        }
    }

    #[test]
    fn monotone_maslov_counts_conjugate_points(seed in any::<u64>(), n in 1usize..3) {
        let mut r = rng(seed);
        let space = standard_space(n);
        let a = { let p = random_matrix(n, n, 1.0, &mut r); &p * p.transpose() + Mat::identity(n, n) * 0.5 };
        let s0 = random_symmetric(n, 2.0, &mut r);
        let a2 = a.clone();
        let c = GrassmannCurve::from_chart_path(&Chart::standard(&space), (0.0, 2.0), move |t| &s0 + &a2 * t).unwrap();
        let pi = space.vertical();
        let rep = maslov_index(&c, &pi);
        prop_assume!(rep.is_ok());
        let total: usize = conjugate_points(&c, &pi).unwrap().iter().map(|p| p.multiplicity).sum();
        prop_assert_eq!(rep.unwrap().value, total as i64);
        prop_assert!(matrix_inertia(&a, 1e-9).is_positive_definite());
    }
}
