//! Fixtures shared by the benchmarks.

use cuspwave::{
    build_basis, Cell, ChargeConfig, FourierField, HamiltonianOperator, HamiltonianSpec, Shape,
};

/// Two Z = 2 nuclei at ±0.35 e1 in the L = 2 cell.
pub fn pair_spec() -> HamiltonianSpec {
    let cell = Cell::new(2.0).expect("positive edge");
    HamiltonianSpec::coulomb(
        ChargeConfig::symmetric_pair(cell, 2.0, [0.7, 0.0, 0.0]).expect("valid pair"),
    )
}

pub fn pair_operator(cutoff: i64, shape: Shape) -> HamiltonianOperator {
    let spec = pair_spec();
    let basis = build_basis(spec.cell(), cutoff, shape).expect("valid cutoff");
    HamiltonianOperator::new(basis, &spec).expect("operator")
}

/// A smooth, non-trivial input vector for `apply`.
pub fn probe_field(op: &HamiltonianOperator) -> FourierField {
    let mut u = FourierField::constant(op.basis().clone(), 1.0);
    let basis = op.basis().clone();
    for (pos, c) in u.coeffs_mut().iter_mut().enumerate() {
        let k2 = basis.wavevector_norm_sq(pos);
        *c = (1.0 / (1.0 + k2)).into();
    }
    u
}
