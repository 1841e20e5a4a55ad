//! Values frozen from independent adaptive quadrature (QUADPACK at 1e-15).

use flatlimit::functionals::FunctionalSpec;
use flatlimit::gauss_optimal::gauss_rule_from_moments;
use flatlimit::kernels::KernelSpec;
use flatlimit::precision::PrecisionConfig;
use flatlimit::{BigReal, Scalar};

// (l, z(0.3), LLK) for the Lebesgue measure on [-1, 1].
const BOX: [(f64, f64, f64); 3] = [
    (0.5, 1.1462587417686323, 2.0066372298844084),
    (1.0, 1.6574725108753903, 3.0558226197636587),
    (3.0, 1.9541353111152702, 3.8581836953071895),
];

// Same for the standard Gaussian measure on the real line.
const NORMAL: [(f64, f64, f64); 3] = [
    (0.5, 0.4314002540127221, 0.3333333333333334),
    (1.0, 0.6913745301329448, 0.577350269189626),
    (3.0, 0.9444238142357464, 0.9045340337332909),
];

fn close(a: f64, b: f64, tol: f64) -> bool {
    (a - b).abs() <= tol * b.abs().max(1.0)
}

#[test]
fn lebesgue_embeddings_match_quadrature() {
    let f = FunctionalSpec::interval(-1.0, 1.0).unwrap();
    for (l, z, llk) in BOX {
        let k = KernelSpec::gaussian(l).unwrap();
        let got_z = f.kernel_embedding(&k, &[0.3]).unwrap();
        let got_llk = f.double_embedding(&k).unwrap();
        assert!(close(got_z, z, 1e-13), "l={l}: z {got_z} vs {z}");
        assert!(close(got_llk, llk, 1e-13), "l={l}: LLK {got_llk} vs {llk}");
    }
}

#[test]
fn gaussian_measure_embeddings_match_quadrature() {
    let f = FunctionalSpec::gaussian_measure(1).unwrap();
    for (l, z, llk) in NORMAL {
        let k = KernelSpec::gaussian(l).unwrap();
        let got_z = f.kernel_embedding(&k, &[0.3]).unwrap();
        let got_llk = f.double_embedding(&k).unwrap();
        assert!(close(got_z, z, 1e-13), "l={l}: z {got_z} vs {z}");
        assert!(close(got_llk, llk, 1e-13), "l={l}: LLK {got_llk} vs {llk}");
    }
}

#[test]
fn three_point_gauss_rules_match_tabulated_values() {
    let prec = PrecisionConfig::extended(128).unwrap();
    let cases = [
        (FunctionalSpec::interval(-1.0, 1.0).unwrap(), 0.6f64.sqrt(), [5.0 / 9.0, 8.0 / 9.0, 5.0 / 9.0]),
        (FunctionalSpec::gaussian_measure(1).unwrap(), 3f64.sqrt(), [1.0 / 6.0, 2.0 / 3.0, 1.0 / 6.0]),
    ];
    for (f, outer, weights) in cases {
        let g = gauss_rule_from_moments::<BigReal>(&f, 3, &prec).unwrap();
        let nodes = g.nodes_f64();
        for (got, want) in nodes.iter().zip([-outer, 0.0, outer]) {
            assert!((got - want).abs() < 1e-15, "{nodes:?}");
        }
        for (got, want) in g.weights().iter().zip(weights) {
            assert!((got.to_f64() - want).abs() < 1e-15);
        }
    }
}
