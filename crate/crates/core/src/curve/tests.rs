use nalgebra::DVector;

use super::*;
use crate::linalg::{subspace_distance, Mat};
use crate::symplectic::{inertia, standard_form, Chart, Inertia, LagrangianFrame, SymplecticSpace};

fn chart_curve(n: usize, domain: (f64, f64), s: impl Fn(f64) -> Mat + Send + Sync + 'static) -> GrassmannCurve {
    let space = SymplecticSpace::standard(n);
    GrassmannCurve::from_chart_path(&Chart::standard(&space), domain, s).unwrap()
}

/// Frame `[cos(kt); sin(kt)/k]` per coordinate: constant curvature `diag(k²)`.
fn constant_curvature_curve(ks: Vec<f64>, domain: (f64, f64)) -> GrassmannCurve {
    let n = ks.len();
    let space = SymplecticSpace::standard(n);
    GrassmannCurve::new(&space, domain, move |t| {
        let mut z = Mat::zeros(2 * n, n);
        for (i, &k) in ks.iter().enumerate() {
            z[(i, i)] = (k * t).cos();
            z[(n + i, i)] = (k * t).sin() / k;
        }
        Ok(z)
    })
    .unwrap()
}

#[test]
fn velocity_form_of_linear_motion_is_identity() {
    let c = chart_curve(2, (-1.0, 1.0), |t| Mat::identity(2, 2) * t);
    let v = velocity_form(&c, 0.2).unwrap();
    // Congruent to I: positive definite with the basis recorded.
    assert!(v.form.inertia(1e-9).is_positive_definite());
    let frame = c.frame(0.2).unwrap();
    assert!(subspace_distance(&crate::linalg::orthonormalize(&v.basis, 1e-12).unwrap(), frame.columns()) < 1e-10);
}

#[test]
fn velocity_form_detects_non_monotone_curve() {
    let c = chart_curve(2, (-1.0, 1.0), |t| Mat::from_diagonal(&DVector::from_vec(vec![t, -t])));
    let v = velocity_form(&c, 0.3).unwrap();
    assert_eq!(inertia(&v.form, 1e-9), Inertia { neg: 1, zero: 0, pos: 1 });
}

#[test]
fn velocity_form_value_in_standard_chart_basis() {
    // In the fixed standard chart the form is zᵀ Ṡ z; compare after change of basis.
    let c = chart_curve(1, (-1.0, 1.0), |t| Mat::from_element(1, 1, t + t * t));
    let t = 0.25;
    let v = velocity_form(&c, t).unwrap();
    let chart = Chart::standard(c.space());
    let std_basis = chart.graph_basis(&Mat::from_element(1, 1, t + t * t));
    let coeff = crate::linalg::coefficients(&v.basis, &std_basis);
    let value = v.form.congruent(&coeff).matrix()[(0, 0)];
    assert!((value - (1.0 + 2.0 * t)).abs() < 1e-9, "{value}");
}

#[test]
fn tan_curve_has_unit_curvature() {
    let c = chart_curve(1, (-1.0, 1.0), |t| Mat::from_element(1, 1, t.tan()));
    let r = curvature(&c, 0.3).unwrap();
    assert!((r.matrix[(0, 0)] - 1.0).abs() < 1e-7, "{}", r.matrix);
}

#[test]
fn linear_curve_is_flat_and_derivative_curve_is_horizontal() {
    let c = chart_curve(2, (-1.0, 1.0), |t| Mat::identity(2, 2) * t);
    let r = curvature(&c, 0.1).unwrap();
    assert!(r.matrix.norm() < 1e-6);
    let d = derivative_curve(&c, 0.1).unwrap();
    assert!(d.same_subspace(&c.space().horizontal(), 1e-9));
}

#[test]
fn cross_ratio_of_0123() {
    let space = SymplecticSpace::standard(1);
    let chart = Chart::standard(&space);
    let v: Vec<LagrangianFrame> =
        (0..4).map(|k| chart.frame_from_chart(&Mat::from_element(1, 1, k as f64)).unwrap()).collect();
    let op = cross_ratio(&v[0], &v[1], &v[2], &v[3]).unwrap();
    // Chart formula S10⁻¹ S03 S32⁻¹ S21 with S_ij = S_i − S_j.
    let formula = (1.0_f64 / 1.0) * (-3.0) * (1.0 / 1.0) * 1.0;
    assert!((op.matrix[(0, 0)] - formula).abs() < 1e-12);
    assert!((op.matrix[(0, 0)] + 3.0).abs() < 1e-12);
}

#[test]
fn cross_ratio_with_repeated_subspace_is_identity() {
    let space = SymplecticSpace::standard(2);
    let chart = Chart::standard(&space);
    let a = chart.frame_from_chart(&Mat::from_row_slice(2, 2, &[1.0, 0.2, 0.2, 3.0])).unwrap();
    let b = chart.frame_from_chart(&Mat::from_row_slice(2, 2, &[-1.0, 0.5, 0.5, 0.0])).unwrap();
    let d = chart.frame_from_chart(&Mat::from_row_slice(2, 2, &[4.0, 0.0, 0.0, -2.0])).unwrap();
    let op = cross_ratio(&a, &b, &a, &d).unwrap();
    assert!((op.matrix - Mat::identity(2, 2)).norm() < 1e-12);
}

#[test]
fn infinitesimal_cross_ratio_hand_value() {
    let c0 = chart_curve(1, (-1.0, 1.0), |t| Mat::from_element(1, 1, t));
    let c1 = chart_curve(1, (-1.0, 1.0), |t| Mat::from_element(1, 1, 1.0 + t));
    let op = infinitesimal_cross_ratio(&c0, 0.0, &c1, 0.0).unwrap();
    assert!((op.matrix[(0, 0)] - 1.0).abs() < 1e-9, "{}", op.matrix);
}

#[test]
fn infinitesimal_cross_ratio_of_frozen_curve_vanishes() {
    let c0 = chart_curve(1, (-1.0, 1.0), |_| Mat::from_element(1, 1, 0.0));
    let c1 = chart_curve(1, (-1.0, 1.0), |t| Mat::from_element(1, 1, 1.0 + t));
    let op = infinitesimal_cross_ratio(&c0, 0.0, &c1, 0.0).unwrap();
    assert!(op.matrix.norm() < 1e-10);
}

#[test]
fn curvature_agrees_with_cross_ratio_route() {
    let c = chart_curve(2, (-0.5, 0.5), |t| {
        Mat::from_row_slice(2, 2, &[t.tan() + 0.1 * t * t, 0.2 * t.powi(3), 0.2 * t.powi(3), 2.0 * t + t.sin()])
    });
    let t = 0.1;
    let r = curvature(&c, t).unwrap();
    let dc = derivative_curve_path(&c).unwrap();
    let icr = infinitesimal_cross_ratio(&dc, t, &c, t).unwrap();
    let other = icr.matrix_in(&r.basis).unwrap();
    let err = (&other - &r.matrix).norm() / r.matrix.norm().max(1.0);
    assert!(err < 1e-5, "{} vs {}", other, r.matrix);
}

#[test]
fn constant_curvature_curve_is_symmetric_and_transport_is_hill() {
    let c = constant_curvature_curve(vec![1.0], (0.0, 2.0));
    let cls = classify(&c).unwrap();
    assert!(cls.regular && cls.symmetric && !cls.flat);
    assert_eq!(cls.monotone, Monotonicity::Increasing);
    assert_eq!(cls.symmetric_crosscheck, Some(true));
    let g = transport(&c, 0.0, 1.0).unwrap();
    let expect = Mat::from_row_slice(2, 2, &[1f64.cos(), -1f64.sin(), 1f64.sin(), 1f64.cos()]);
    assert!((&g - expect).norm() < 1e-6, "{g}");
    let j = standard_form(1);
    assert!((g.transpose() * &j * &g - j).norm() < 1e-8);
}

#[test]
fn non_commuting_curvature_is_not_symmetric() {
    let c = chart_curve(2, (-0.5, 0.5), |t| {
        Mat::from_row_slice(2, 2, &[t + t.powi(3), 0.3 * t * t, 0.3 * t * t, 2.0 * t + 0.5 * t.powi(3)])
    });
    let cls = classify(&c).unwrap();
    assert!(cls.regular);
    assert!(!cls.symmetric);
}

#[test]
fn singular_velocity_is_not_regular() {
    let c = chart_curve(2, (-1.0, 1.0), |t| Mat::from_diagonal(&DVector::from_vec(vec![t, t.powi(3)])));
    assert!(matches!(curvature(&c, 0.0), Err(crate::Error::NotRegular(_))));
    assert!(!classify(&c).unwrap().regular);
}

#[test]
fn affine_reparametrization_keeps_flatness() {
    let c = chart_curve(1, (-1.0, 1.0), |t| Mat::from_element(1, 1, t));
    let r = reparametrize(&c, &Reparametrization::affine(2.0, 0.0), (-0.4, 0.4)).unwrap();
    assert!(curvature(&r, 0.1).unwrap().matrix.norm() < 1e-6);
}

#[test]
fn arctan_map_flattens_constant_curvature() {
    let c = constant_curvature_curve(vec![1.0, 1.0], (0.0, 3.0));
    let phi = Reparametrization::arctan(1.0, 0.0);
    let r = reparametrize(&c, &phi, (-2.0, 2.0)).unwrap();
    let k = curvature(&r, 0.7).unwrap();
    assert!(k.real_spectrum().iter().all(|&v| v <= 1e-6));
}

#[test]
fn curvature_form_matches_derivative_curve_velocity_inertia() {
    let c = constant_curvature_curve(vec![1.0, 2.0], (0.0, 1.0));
    let r = curvature_form(&c, 0.4).unwrap();
    assert!(r.form.inertia(1e-9).is_positive_definite());
    let dc = derivative_curve_path(&c).unwrap();
    let v = velocity_form(&dc, 0.4).unwrap();
    assert_eq!(v.form.inertia(1e-9), r.form.inertia(1e-9));
}
