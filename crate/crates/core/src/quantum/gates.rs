//! Standard small operators.

use crate::linalg::{OperatorMatrix, C64};

pub fn identity(d: usize) -> OperatorMatrix {
    OperatorMatrix::identity(vec![d]).expect("small identity")
}

pub fn pauli_x() -> OperatorMatrix {
    OperatorMatrix::from_real(2, &[0.0, 1.0, 1.0, 0.0]).expect("2x2")
}

pub fn pauli_y() -> OperatorMatrix {
    let i = C64::new(0.0, 1.0);
    OperatorMatrix::new(vec![2], vec![C64::new(0.0, 0.0), -i, i, C64::new(0.0, 0.0)]).expect("2x2")
}

pub fn pauli_z() -> OperatorMatrix {
    OperatorMatrix::from_real(2, &[1.0, 0.0, 0.0, -1.0]).expect("2x2")
}

/// Controlled-NOT, control on the first factor.
pub fn cnot() -> OperatorMatrix {
    #[rustfmt::skip]
    let m = OperatorMatrix::from_real(4, &[
        1.0, 0.0, 0.0, 0.0,
        0.0, 1.0, 0.0, 0.0,
        0.0, 0.0, 0.0, 1.0,
        0.0, 0.0, 1.0, 0.0,
    ])
    .expect("4x4");
    m.with_factor_dims(vec![2, 2]).expect("4 = 2·2")
}

/// `σ(θ) = cos θ σz + sin θ σx`: spin along angle `θ` in the x–z plane.
pub fn analyzer(theta: f64) -> OperatorMatrix {
    let (s, c) = theta.sin_cos();
    OperatorMatrix::from_real(2, &[c, s, s, -c]).expect("2x2")
}

/// Projector `|j⟩⟨j|` in dimension `d`.
pub fn basis_projector(d: usize, j: usize) -> OperatorMatrix {
    let mut m = OperatorMatrix::zeros(vec![d]).expect("small projector");
    m.set(j, j, C64::new(1.0, 0.0));
    m
}
