#![allow(dead_code)]

use frechet_cpd::{EuclideanObject, MatrixKind, MetricObject, ObjectSequence, QuantileObject, Space, SymMatrixObject};
use rand::Rng;
use rand_distr::StandardNormal;

pub fn scalar_seq(values: &[f64]) -> ObjectSequence {
    ObjectSequence::new(values.iter().map(|&v| EuclideanObject::new(vec![v]).unwrap().into()).collect())
        .unwrap()
}

pub fn normal<R: Rng>(rng: &mut R) -> f64 {
    rng.sample(StandardNormal)
}

pub fn random_quantile<R: Rng>(rng: &mut R, grid: usize) -> MetricObject {
    let mut level = 2.0 * normal(rng);
    let values = (0..grid)
        .map(|_| {
            level += normal(rng).abs() * 0.3;
            level
        })
        .collect();
    QuantileObject::new(values).unwrap().into()
}

pub fn random_matrix<R: Rng>(rng: &mut R, dim: usize) -> MetricObject {
    let mut entries = vec![0.0; dim * dim];
    for i in 0..dim {
        for j in 0..=i {
            let v = normal(rng);
            entries[i * dim + j] = v;
            entries[j * dim + i] = v;
        }
    }
    SymMatrixObject::new(dim, entries, MatrixKind::General).unwrap().into()
}

pub fn random_vector<R: Rng>(rng: &mut R, dim: usize) -> MetricObject {
    EuclideanObject::new((0..dim).map(|_| normal(rng)).collect()).unwrap().into()
}

pub fn random_object<R: Rng>(rng: &mut R, space: Space, shape: usize) -> MetricObject {
    match space {
        Space::Wasserstein => random_quantile(rng, shape),
        Space::Frobenius => random_matrix(rng, shape),
        Space::Euclidean => random_vector(rng, shape),
    }
}

/// Random sequence; with probability 1/2 the second part is shifted.
pub fn random_sequence<R: Rng>(rng: &mut R, space: Space, n: usize, shape: usize) -> ObjectSequence {
    let cut = rng.random_range(1..n);
    let shift = if rng.random_bool(0.5) { rng.random_range(0.5..3.0) } else { 0.0 };
    let items = (0..n)
        .map(|i| {
            let o = random_object(rng, space, shape);
            if i < cut || shift == 0.0 {
                return o;
            }
            // Shift every coordinate; quantile grids stay monotone.
            let coords: Vec<f64> = o.coords().iter().map(|v| v + shift).collect();
            match space {
                Space::Wasserstein => QuantileObject::new(coords).unwrap().into(),
                Space::Frobenius => SymMatrixObject::new(shape, coords, MatrixKind::General).unwrap().into(),
                Space::Euclidean => EuclideanObject::new(coords).unwrap().into(),
            }
        })
        .collect();
    ObjectSequence::new(items).unwrap()
}

pub const SPACES: [(Space, usize); 3] = [(Space::Wasserstein, 20), (Space::Frobenius, 3), (Space::Euclidean, 4)];
