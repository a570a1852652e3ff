//! Seeded random instances: states, Hermitian operators, observables.

use rand::Rng;
use rand_distr::StandardNormal;

use crate::error::{Error, Result};
use crate::linalg::{eig_hermitian, OperatorMatrix, StateVector, C64};
use crate::quantum::SpectralObservable;

fn gaussian<R: Rng + ?Sized>(rng: &mut R) -> C64 {
    C64::new(rng.sample(StandardNormal), rng.sample(StandardNormal))
}

/// Normalized state with i.i.d. complex Gaussian amplitudes.
pub fn random_state<R: Rng + ?Sized>(rng: &mut R, factor_dims: &[usize]) -> Result<StateVector> {
    let dim = factor_dims.iter().product();
    StateVector::normalized_from(factor_dims.to_vec(), (0..dim).map(|_| gaussian(rng)).collect())
}

/// Hermitian operator `(G + G†)/2` with Gaussian `G`.
pub fn random_hermitian<R: Rng + ?Sized>(rng: &mut R, factor_dims: &[usize]) -> Result<OperatorMatrix> {
    let g = OperatorMatrix::from_fn(factor_dims.to_vec(), |_, _| gaussian(rng))?;
    Ok(g.hermitian_part())
}

/// Unitary whose columns are the eigenvectors of a random Hermitian operator.
pub fn random_unitary<R: Rng + ?Sized>(rng: &mut R, factor_dims: &[usize]) -> Result<OperatorMatrix> {
    Ok(eig_hermitian(&random_hermitian(rng, factor_dims)?)?.vectors)
}

/// Observable with `n_outcomes` random-rank projections in a random basis.
pub fn random_observable<R: Rng + ?Sized>(
    rng: &mut R,
    dim: usize,
    n_outcomes: usize,
) -> Result<SpectralObservable> {
    if n_outcomes == 0 || n_outcomes > dim {
        return Err(Error::arg("need 1 ≤ n_outcomes ≤ dim"));
    }
    let u = random_unitary(rng, &[dim])?;
    // Every outcome gets one basis vector, the rest are spread at random.
    let mut owner: Vec<usize> = (0..dim).map(|k| if k < n_outcomes { k } else { rng.random_range(0..n_outcomes) }).collect();
    owner.rotate_left(rng.random_range(0..dim));
    let mut eigenvalues: Vec<f64> = Vec::with_capacity(n_outcomes);
    while eigenvalues.len() < n_outcomes {
        let l: f64 = rng.sample(StandardNormal);
        if eigenvalues.iter().all(|&m| (m - l).abs() > 1e-3) {
            eigenvalues.push(l);
        }
    }
    let projections = (0..n_outcomes)
        .map(|j| {
            OperatorMatrix::from_fn(vec![dim], |a, b| {
                (0..dim)
                    .filter(|&k| owner[k] == j)
                    .map(|k| u.get(a, k) * u.get(b, k).conj())
                    .sum()
            })
            .map(|p| p.hermitian_part())
        })
        .collect::<Result<Vec<_>>>()?;
    SpectralObservable::new(eigenvalues, projections)
}
