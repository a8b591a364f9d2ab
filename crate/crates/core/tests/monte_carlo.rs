mod common;

use std::collections::HashMap;

use common::*;
use linmark::curve::linspace;
use linmark::planar::Correction;
use linmark::repro::{StudyConfig, StudySetting};
use linmark::simulate::{binomial_planar, poisson_on_network, poisson_planar, random_label, uniform_on_network};
use linmark::{network_stats, planar, IntensitySurface, LinearNetwork, NetworkIntensityMode, Target, Window};

fn mean_curves(curves: &[Vec<f64>]) -> Vec<f64> {
    let n = curves.len() as f64;
    (0..curves[0].len())
        .map(|k| curves.iter().map(|c| c[k]).sum::<f64>() / n)
        .collect()
}

#[test]
fn planar_poisson_count() {
    let w = Window::unit_square();
    let total: usize = (0..1000).map(|k| poisson_planar(&w, 100.0, &mut rng(1, k)).n()).sum();
    let mean = total as f64 / 1000.0;
    assert!((mean - 100.0).abs() < 3.0 * (100.0f64 / 1000.0).sqrt(), "mean {mean}");
}

#[test]
fn planar_k_under_csr() {
    let w = Window::unit_square();
    let r = linspace(0.0, 0.2, 11);
    let curves: Vec<Vec<f64>> = (0..100)
        .map(|k| {
            let p = binomial_planar(&w, 100, &mut rng(2, k));
            let lam = IntensitySurface::homogeneous(&p, Target::All).unwrap();
            planar::cross_k(&p, Target::All, Target::All, &lam, &r, Correction::Translation)
                .unwrap()
                .values
        })
        .collect();
    let m = mean_curves(&curves);
    for (k, &rk) in r.iter().enumerate().skip(2) {
        let theo = std::f64::consts::PI * rk * rk;
        assert!((m[k] - theo).abs() < 0.05 * theo, "r = {rk}: {} vs {theo}", m[k]);
    }
}

#[test]
fn network_k_and_h_under_poisson() {
    let net = LinearNetwork::new(
        vec![[0.0, 0.0], [10.0, 0.0], [10.0, 10.0], [0.0, 10.0], [5.0, 5.0]],
        vec![(0, 1), (1, 2), (2, 3), (3, 0), (0, 4), (4, 2)],
    )
    .unwrap();
    let m = metric(net);
    let lambda = 2.0;
    let r = linspace(0.0, 4.0, 9);
    let (mut ks, mut hs) = (Vec::new(), Vec::new());
    for k in 0..60 {
        let p = poisson_on_network(&m, lambda, &mut rng(3, k));
        let lam = IntensitySurface::constant(&p, lambda).unwrap();
        ks.push(
            network_stats::cross_k(&p, Target::All, Target::All, &lam, &r)
                .unwrap()
                .values,
        );
        hs.push(
            network_stats::cross_h(&p, Target::All, Target::All, &lam, &r)
                .unwrap()
                .values,
        );
    }
    let (mk, mh) = (mean_curves(&ks), mean_curves(&hs));
    for (k, &rk) in r.iter().enumerate().skip(1) {
        assert!((mk[k] - rk).abs() < 0.05 * rk, "K at {rk}: {}", mk[k]);
        let theo = 1.0 - (-lambda * rk).exp();
        assert!((mh[k] - theo).abs() < 0.03, "H at {rk}: {} vs {theo}", mh[k]);
    }
}

#[test]
fn random_labels_are_uniform_permutations() {
    let m = segment(10.0);
    let p = uniform_on_network(&m, 4, &mut rng(4, 0))
        .with_marks(vec![1.0, 2.0, 3.0, 4.0])
        .unwrap();
    let trials = 10_000;
    let mut freq: HashMap<Vec<u64>, usize> = HashMap::new();
    let mut g = rng(4, 1);
    for _ in 0..trials {
        let q = random_label(&p, &mut g).unwrap();
        *freq
            .entry(q.marks().unwrap().iter().map(|x| x.to_bits()).collect())
            .or_default() += 1;
    }
    assert_eq!(freq.len(), 24);
    let pr = 1.0 / 24.0;
    let se = (pr * (1.0 - pr) / trials as f64).sqrt();
    for (perm, &c) in &freq {
        let f = c as f64 / trials as f64;
        assert!((f - pr).abs() < 3.0 * se + 1e-3, "{perm:?}: {f}");
    }
}

#[test]
fn lixel_kernel_mean_on_dendrite() {
    let config = StudyConfig::default();
    let setting = StudySetting::new(&config).unwrap();
    let p = uniform_on_network(&setting.metric, 100, &mut rng(5, 0));
    let len = setting.network.total_length();
    let s = IntensitySurface::network(
        &p,
        Target::All,
        NetworkIntensityMode::LixelKernel,
        None,
        Some(len / 50.0),
    )
    .unwrap();
    let mean = s.at_points().iter().sum::<f64>() / 100.0;
    let target = 100.0 / len;
    assert!((mean - target).abs() < 0.3 * target, "{mean} vs {target}");
    let integral = s.integral(&p).unwrap();
    assert!((integral - 100.0).abs() < 1.0);
}
