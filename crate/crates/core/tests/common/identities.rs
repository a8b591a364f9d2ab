use super::*;
use linmark::curve::linspace;
use linmark::planar::Correction;
use linmark::simulate::{binomial_planar, uniform_on_network};
use linmark::{network_stats, planar, Error, LinearNetwork, MarkedPattern, TestFunction, Window};
use rand::Rng;

fn planar_pattern(n: usize, seed: u64) -> MarkedPattern {
    let mut rng = rng(seed, 0);
    let p = binomial_planar(&Window::unit_square(), n, &mut rng);
    let marks = (0..n).map(|_| 1.0 + rng.random::<f64>() * 3.0).collect();
    p.with_marks(marks).unwrap()
}

fn network_pattern(n: usize, seed: u64) -> MarkedPattern {
    let mut rng = rng(seed, 0);
    let net = LinearNetwork::new(
        vec![[0.0, 0.0], [1.0, 0.0], [1.0, 1.0], [0.0, 1.0], [0.5, 0.5]],
        vec![(0, 1), (1, 2), (2, 3), (3, 0), (0, 4), (4, 2)],
    )
    .unwrap();
    let p = uniform_on_network(&metric(net), n, &mut rng);
    let marks = (0..n).map(|_| 1.0 + rng.random::<f64>() * 3.0).collect();
    p.with_marks(marks).unwrap()
}

fn relative_eq(a: &[f64], b: &[f64], tol: f64) -> bool {
    a.iter()
        .zip(b)
        .all(|(x, y)| (x.is_nan() && y.is_nan()) || (x - y).abs() <= tol * x.abs().max(y.abs()).max(f64::MIN_POSITIVE))
}

pub fn constant_marks_give_unweighted_k() {
    let r = linspace(0.0, 0.3, 31);
    let p = planar_pattern(60, 1).with_replaced_marks(vec![2.5; 60]).unwrap();
    let w = planar::mark_weighted_k(&p, TestFunction::Stoyan, None, &r, Correction::Translation, None).unwrap();
    assert!(relative_eq(&w.weighted.values, &w.unweighted.values, 1e-12));
    let q = network_pattern(60, 2).with_replaced_marks(vec![2.5; 60]).unwrap();
    let w = network_stats::mark_weighted_k(&q, TestFunction::Stoyan, None, &r, None).unwrap();
    assert!(relative_eq(&w.weighted.values, &w.unweighted.values, 1e-12));
}

pub fn constant_marks_stoyan_is_one_and_variogram_fails() {
    let r = linspace(0.0, 0.3, 31);
    let p = planar_pattern(50, 3).with_replaced_marks(vec![4.0; 50]).unwrap();
    let k = planar::tf_correlation(&p, TestFunction::Stoyan, &r, None).unwrap();
    assert!(k
        .values
        .iter()
        .filter(|v| v.is_finite())
        .all(|v| (v - 1.0).abs() < 1e-12));
    assert!(matches!(
        planar::tf_correlation(&p, TestFunction::Variogram, &r, None),
        Err(Error::ZeroNormalizer(_))
    ));
    let q = network_pattern(50, 4).with_replaced_marks(vec![4.0; 50]).unwrap();
    let k = network_stats::tf_correlation(&q, TestFunction::Stoyan, &r, None).unwrap();
    assert!(k
        .values
        .iter()
        .filter(|v| v.is_finite())
        .all(|v| (v - 1.0).abs() < 1e-12));
    assert!(matches!(
        network_stats::tf_correlation(&q, TestFunction::Variogram, &r, None),
        Err(Error::ZeroNormalizer(_))
    ));
}

pub fn mingling_constant_two_by_two() {
    let p = MarkedPattern::planar(
        Window::unit_square(),
        vec![[0.1, 0.1], [0.2, 0.2], [0.3, 0.3], [0.4, 0.4]],
    )
    .unwrap()
    .with_types(vec![1, 1, 2, 2])
    .unwrap();
    assert_eq!(p.mingling_constant().unwrap(), 2.0 / 3.0);
}

pub fn mark_scale_equivariance() {
    let r = linspace(0.0, 0.3, 16);
    let s = 3.7;
    for p in [planar_pattern(60, 5), network_pattern(60, 6)] {
        let scaled = p
            .with_replaced_marks(p.marks().unwrap().iter().map(|m| m * s).collect())
            .unwrap();
        let eval = |q: &MarkedPattern, tf| {
            if q.is_network() {
                network_stats::tf_correlation(q, tf, &r, Some(0.1)).unwrap()
            } else {
                planar::tf_correlation(q, tf, &r, Some(0.1)).unwrap()
            }
        };
        let mut invariant = vec![
            TestFunction::Stoyan,
            TestFunction::Isham,
            TestFunction::SchlatherI,
            TestFunction::ShimataniI,
            TestFunction::Variogram,
        ];
        if !p.is_network() {
            invariant.push(TestFunction::Differentiation);
        }
        for tf in invariant {
            let (a, b) = (eval(&p, tf), eval(&scaled, tf));
            assert_close(&a.values, &b.values, 1e-9, tf.name());
        }
        let a = eval(&p, TestFunction::Covariance);
        let b = eval(&scaled, TestFunction::Covariance);
        let a2: Vec<f64> = a.values.iter().map(|v| v * s * s).collect();
        assert_close(&a2, &b.values, 1e-9, "covariance");
    }
}

pub fn differentiation_is_planar_only() {
    let q = network_pattern(20, 7);
    assert!(matches!(
        network_stats::tf_correlation(&q, TestFunction::Differentiation, &[0.0, 0.1], None),
        Err(Error::UnsupportedTestFunction(_))
    ));
}

pub fn point_order_does_not_matter() {
    let r = linspace(0.0, 0.3, 16);
    let p = network_pattern(40, 8);
    let mut order: Vec<usize> = (0..40).collect();
    order.reverse();
    let q = p.subset(&order);
    let a = network_stats::tf_correlation(&p, TestFunction::Stoyan, &r, Some(0.1)).unwrap();
    let b = network_stats::tf_correlation(&q, TestFunction::Stoyan, &r, Some(0.1)).unwrap();
    assert_close(&a.values, &b.values, 1e-12, "stoyan");
}
