mod common;

use common::random_graph;
use molforest::featurizer::{build_matrix, FeatureConfig, Label};
use molforest::kernels::{gram_matrix, kernel_feature_rows, Kernel, KernelKind};
use nalgebra::DMatrix;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

#[test]
fn gram_matrices_are_symmetric_psd_with_unit_diagonal() {
    let mut rng = ChaCha8Rng::seed_from_u64(300);
    let cfg = FeatureConfig::pair(vec![0, 1], vec![0, 1, 2, 3]);
    for _ in 0..20 {
        let n = rng.random_range(1..=20);
        let graphs: Vec<_> = (0..n)
            .map(|_| {
                let size = rng.random_range(1..9);
                random_graph(&mut rng, size)
            })
            .collect();
        let vectors: Vec<_> = graphs.iter().map(|g| cfg.featurize(g).unwrap()).collect();
        let labels = vec![Label::Positive; n];
        let (data, vocab) = build_matrix::<f64>(&vectors, &labels, None).unwrap();
        for kind in [KernelKind::Cosine, KernelKind::Nspdk] {
            let kernel = Kernel::for_vocabulary(kind, &vocab);
            let gram = gram_matrix(&data, &kernel).unwrap();
            let m = &gram.values;
            for i in 0..n {
                assert_eq!(m.get(i, i), 1.0);
                for j in 0..n {
                    assert!((m.get(i, j) - m.get(j, i)).abs() <= 1e-12);
                    assert!((0.0..=1.0 + 1e-12).contains(&m.get(i, j)));
                }
            }
            let dense = DMatrix::from_fn(n, n, |i, j| m.get(i, j));
            let min = dense.symmetric_eigenvalues().min();
            assert!(min >= -1e-8, "{kind:?} min eigenvalue {min}");
            assert_eq!(&kernel_feature_rows(&data, &data, &kernel).unwrap(), m);
        }
    }
}
