use std::f64::consts::PI;

use nalgebra::DVector;

use super::*;
use crate::curve::{GrassmannCurve, Monotonicity};
use crate::linalg::Mat;
use crate::symplectic::{Chart, SymplecticSpace};
use crate::Error;

fn diagonal_curve(n: usize) -> GrassmannCurve {
    let space = SymplecticSpace::standard(n);
    GrassmannCurve::from_chart_path(&Chart::standard(&space), (0.0, n as f64 + 1.0), move |t| {
        Mat::from_diagonal(&DVector::from_fn(n, |i, _| t - (i as f64 + 1.0)))
    })
    .unwrap()
}

/// Isotropic oscillator Jacobi curve: `S = −tan t` in the standard chart.
fn rotation_curve(n: usize, domain: (f64, f64)) -> GrassmannCurve {
    let space = SymplecticSpace::standard(n);
    GrassmannCurve::new(&space, domain, move |t| {
        let mut z = Mat::zeros(2 * n, n);
        for i in 0..n {
            z[(i, i)] = t.cos();
            z[(n + i, i)] = -t.sin();
        }
        Ok(z)
    })
    .unwrap()
}

#[test]
fn diagonal_sample_curve_has_index_n() {
    for n in 1..=3 {
        let c = diagonal_curve(n);
        let r = maslov_index(&c, &c.space().vertical()).unwrap();
        assert_eq!(r.value, n as i64);
        assert_eq!(r.monotone, Monotonicity::Increasing);
        assert_eq!(r.pair_index_sum, Some(n as i64));
        assert_eq!(r.subdivision.first(), Some(&0.0));
        assert_eq!(r.subdivision.last(), Some(&(n as f64 + 1.0)));
    }
}

#[test]
fn constant_curve_has_index_zero() {
    let space = SymplecticSpace::standard(2);
    let s = Mat::from_row_slice(2, 2, &[1.0, 2.0, 2.0, -1.0]);
    let c = GrassmannCurve::from_chart_path(&Chart::standard(&space), (0.0, 1.0), move |_| s.clone()).unwrap();
    let r = maslov_index(&c, &space.vertical()).unwrap();
    assert_eq!(r.value, 0);
    assert_eq!(r.pair_index_sum, None);
}

#[test]
fn decreasing_rotation_counts_negatively() {
    let eps = 0.1;
    for k in 1..=3 {
        let c = rotation_curve(1, (eps, k as f64 * PI + eps));
        let r = maslov_index(&c, &c.space().vertical()).unwrap();
        assert_eq!(r.value, -(k as i64));
        assert_eq!(r.monotone, Monotonicity::Decreasing);
    }
}

#[test]
fn endpoint_on_train_is_rejected() {
    let c = rotation_curve(1, (0.0, 1.0));
    assert_eq!(maslov_index(&c, &c.space().vertical()), Err(Error::EndpointOnTrain(0.0)));
}

#[test]
fn concatenation_and_schedule_independence() {
    let space = SymplecticSpace::standard(2);
    let c = GrassmannCurve::from_chart_path(&Chart::standard(&space), (-2.0, 3.0), |t| {
        Mat::from_row_slice(2, 2, &[t * t - 1.0, 0.3 * t, 0.3 * t, (2.0 * t).sin()])
    })
    .unwrap();
    let pi = space.vertical();
    let whole = maslov_index(&c, &pi).unwrap().value;
    let left = maslov_index(&c.restrict(-2.0, 0.7).unwrap(), &pi).unwrap().value;
    let right = maslov_index(&c.restrict(0.7, 3.0).unwrap(), &pi).unwrap().value;
    assert_eq!(whole, left + right);
    let other = maslov_index_with(&c, &pi, &MaslovOptions::with_schedule_offset(5)).unwrap().value;
    assert_eq!(whole, other);
    // Direct count in the standard chart.
    let ind = |t: f64| {
        let s = Mat::from_row_slice(2, 2, &[t * t - 1.0, 0.3 * t, 0.3 * t, (2.0 * t).sin()]);
        crate::symplectic::ind(&s, 1e-12) as i64
    };
    assert_eq!(whole, ind(-2.0) - ind(3.0));
}

#[test]
fn oscillator_conjugate_times() {
    let c = rotation_curve(1, (0.0, 3.5 * PI));
    let pi = c.frame(0.0).unwrap();
    let pts = conjugate_points(&c, &pi).unwrap();
    assert_eq!(pts.len(), 3);
    for (k, p) in pts.iter().enumerate() {
        assert!((p.t - (k as f64 + 1.0) * PI).abs() < 1e-8, "{p:?}");
        assert_eq!(p.multiplicity, 1);
    }
}

#[test]
fn free_particle_has_no_conjugate_points() {
    let space = SymplecticSpace::standard(2);
    let c = GrassmannCurve::from_chart_path(&Chart::standard(&space), (0.0, 5.0), |t| Mat::identity(2, 2) * -t)
        .unwrap();
    assert!(conjugate_points(&c, &space.vertical()).unwrap().is_empty());
    assert_eq!(morse_index_regular_extremal(&c).unwrap(), 0);
}

#[test]
fn isotropic_oscillator_morse_index() {
    for n in 1..=3 {
        let c = rotation_curve(n, (0.0, 1.5 * PI));
        assert_eq!(morse_index_regular_extremal(&c).unwrap(), n);
    }
    let c = rotation_curve(1, (0.0, 2.5 * PI));
    assert_eq!(morse_index_regular_extremal(&c).unwrap(), 2);
    let c = rotation_curve(1, (0.0, 0.5 * PI));
    assert_eq!(morse_index_regular_extremal(&c).unwrap(), 0);
}

#[test]
fn degenerate_endpoint_is_reported() {
    let c = rotation_curve(2, (0.0, PI));
    assert_eq!(morse_index_regular_extremal(&c), Err(Error::DegenerateEndpoint(2)));
}

#[test]
fn non_monotone_curve_is_refused_for_conjugate_points() {
    let space = SymplecticSpace::standard(2);
    let c = GrassmannCurve::from_chart_path(&Chart::standard(&space), (0.1, 1.0), |t| {
        Mat::from_diagonal(&DVector::from_vec(vec![t, -t]))
    })
    .unwrap();
    assert_eq!(conjugate_points(&c, &space.vertical()), Err(Error::NotMonotone));
}
