mod common;

use proptest::prelude::*;
use sepcheck::linalg::hermitian_eig;
use sepcheck::state::{entanglement_entropy, partial_trace, partial_trace_op, partial_transpose, partial_transpose_op, Subsystem};
use sepcheck::zoo::random_density;
use sepcheck::{BipartiteShape, DensityMatrix, PureState};

fn shapes() -> impl Strategy<Value = BipartiteShape> {
    (2usize..4, 2usize..4).prop_map(|(a, b)| BipartiteShape::new(a, b).unwrap())
}

fn random_state(shape: BipartiteShape, seed: u64) -> DensityMatrix {
    let rank = 1 + (seed as usize) % shape.total();
    random_density(shape, rank, seed).unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(96))]

    #[test]
    fn partial_trace_of_product(da in 2usize..4, db in 2usize..4, seed in any::<u64>()) {
        let ra = random_density(BipartiteShape::new(da, 2).unwrap(), 1 + seed as usize % (2 * da), seed).unwrap();
        let rb = random_density(BipartiteShape::new(db, 2).unwrap(), 1 + seed as usize % (2 * db), seed ^ 7).unwrap();
        // reduce each generator output to a single factor first
        let fa = partial_trace_op(ra.matrix(), ra.shape(), Subsystem::A);
        let fb = partial_trace_op(rb.matrix(), rb.shape(), Subsystem::A);
        let shape = BipartiteShape::new(da, db).unwrap();
        let joint = fa.kron(&fb).unwrap();
        prop_assert!(partial_trace_op(&joint, shape, Subsystem::A).max_abs_diff(&fa) < 1e-12);
        prop_assert!(partial_trace_op(&joint, shape, Subsystem::B).max_abs_diff(&fb) < 1e-12);
    }

    #[test]
    fn reduced_states_have_unit_trace(shape in shapes(), seed in any::<u64>()) {
        let rho = random_state(shape, seed);
        for keep in [Subsystem::A, Subsystem::B] {
            prop_assert!((partial_trace(&rho, keep).trace().re - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn partial_transpose_is_an_exact_involution(shape in shapes(), seed in any::<u64>()) {
        let rho = random_state(shape, seed);
        for on in [Subsystem::A, Subsystem::B] {
            let twice = partial_transpose_op(&partial_transpose(&rho, on), shape, on);
            prop_assert!(&twice == rho.matrix());
        }
    }

    #[test]
    fn partial_transposes_share_spectrum(shape in shapes(), seed in any::<u64>()) {
        let rho = random_state(shape, seed);
        let a = hermitian_eig(&partial_transpose(&rho, Subsystem::A)).unwrap().eigenvalues;
        let b = hermitian_eig(&partial_transpose(&rho, Subsystem::B)).unwrap().eigenvalues;
        for (x, y) in a.iter().zip(&b) {
            prop_assert!((x - y).abs() < 1e-10);
        }
    }

    #[test]
    fn entanglement_bounded_by_smaller_side(shape in shapes(), seed in any::<u64>()) {
        let v = common::random_vector(shape.total(), seed);
        let psi = PureState::normalized(shape, v).unwrap();
        let bound = (shape.dim_a.min(shape.dim_b) as f64).log2();
        prop_assert!(entanglement_entropy(&psi).unwrap() <= bound + 1e-12);
    }
}
