use num_complex::Complex64;
use proptest::prelude::*;
use proptest::sample::subsequence;

use locc_core::analysis::opm::{opm_constraints, opm_triviality, solve_on_support};
use locc_core::analysis::{distinguishability_search, replay};
use locc_core::entanglement::*;
use locc_core::partition::*;
use locc_core::states::*;
use locc_core::tensor::{self, ComplexMatrix, Side};
use locc_core::Tolerances;

fn complex() -> impl Strategy<Value = Complex64> {
    (-1.0f64..1.0, -1.0f64..1.0).prop_map(|(re, im)| Complex64::new(re, im))
}

fn matrix(n: usize) -> impl Strategy<Value = ComplexMatrix> {
    prop::collection::vec(complex(), n * n).prop_map(move |v| ComplexMatrix::from_vec(n, n, v))
}

fn vector(n: usize) -> impl Strategy<Value = Vec<Complex64>> {
    prop::collection::vec(complex(), n).prop_filter("nonzero", |v| tensor::norm(v) > 1e-3)
}

fn density(n: usize) -> impl Strategy<Value = ComplexMatrix> {
    matrix(n).prop_map(|a| {
        let m = &a * a.adjoint();
        let tr = m.trace();
        m / tr
    })
}

fn tripartite_sets() -> Vec<StateSet> {
    vec![
        eq1_set(3).unwrap(),
        eq2_set(),
        bennett_three_qubit_basis(),
        six_state_set(),
    ]
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn eigendecomposition_reconstructs(a in matrix(6)) {
        let h = &a + a.adjoint();
        let e = tensor::hermitian_eigen(&h).unwrap();
        prop_assert!(tensor::max_abs(&(e.reconstruct() - &h)) <= 1e-8);
        prop_assert!(e.values.windows(2).all(|w| w[0] <= w[1]));
    }

    #[test]
    fn kron_is_associative(a in matrix(2), b in matrix(3), c in matrix(2)) {
        let left = tensor::kron(&tensor::kron(&a, &b), &c);
        let right = tensor::kron(&a, &tensor::kron(&b, &c));
        prop_assert!(tensor::max_abs(&(left - right)) < 1e-12);
    }

    #[test]
    fn partial_transpose_is_an_involution(m in matrix(6)) {
        for side in [Side::First, Side::Second] {
            let once = tensor::partial_transpose(&m, [2, 3], side).unwrap();
            let twice = tensor::partial_transpose(&once, [2, 3], side).unwrap();
            prop_assert_eq!(&twice, &m);
        }
        let both = tensor::partial_transpose(&tensor::partial_transpose(&m, [2, 3], Side::First).unwrap(), [2, 3], Side::Second).unwrap();
        prop_assert_eq!(both, m.transpose());
    }

    #[test]
    fn subsystem_permutation_matches_kron_order(a in matrix(2), b in matrix(3), c in matrix(2)) {
        let abc = tensor::kron(&tensor::kron(&a, &b), &c);
        let cab = tensor::kron(&tensor::kron(&c, &a), &b);
        let moved = tensor::permute_subsystems(&abc, &[2, 3, 2], &[2, 0, 1]).unwrap();
        prop_assert!(tensor::max_abs(&(moved - cab)) < 1e-12);
    }

    #[test]
    fn ppt_spectrum_ignores_local_relabeling(rho in density(6), perm in Just(vec![2usize, 0, 1]).prop_shuffle()) {
        let t = Tolerances::default();
        let p = Partition::all_separate(2);
        let dm = DensityMatrix::new(vec![2, 3], rho.clone(), &t).unwrap();
        let mut u = ComplexMatrix::zeros(3, 3);
        for (k, &j) in perm.iter().enumerate() {
            u[(j, k)] = Complex64::new(1.0, 0.0);
        }
        let big = tensor::kron(&tensor::identity(2), &u);
        let moved = DensityMatrix::new(vec![2, 3], &big * rho * big.adjoint(), &t).unwrap();
        let a = ppt_check(&dm, &p).unwrap();
        let b = ppt_check(&moved, &p).unwrap();
        prop_assert!((a - b).abs() <= 1e-10);
    }

    #[test]
    fn choi_map_is_linear_and_trace_preserving(a in matrix(3), b in matrix(3), s in complex()) {
        let lhs = choi_map(&(&a + &b * s)).unwrap();
        let rhs = choi_map(&a).unwrap() + choi_map(&b).unwrap() * s;
        prop_assert!(tensor::max_abs(&(lhs - rhs)) < 1e-12);
        prop_assert!((choi_map(&a).unwrap().trace() - a.trace()).norm() < 1e-12);
    }

    #[test]
    fn choi_witness_accepts_product_mixtures(
        terms in prop::collection::vec((0.05f64..1.0, vector(3), vector(4)), 1..5),
    ) {
        let t = Tolerances::default();
        let total: f64 = terms.iter().map(|x| x.0).sum();
        let mut m = ComplexMatrix::zeros(12, 12);
        for (w, a, b) in &terms {
            m += tensor::projector(&tensor::normalized(&tensor::kron_vec(a, b))).scale(w / total);
        }
        let rho = DensityMatrix::new(vec![3, 2, 2], m, &t).unwrap();
        prop_assert!(choi_witness_min_eig(&rho, &eq8_unitary(), &t).unwrap() >= -1e-9);
        prop_assert!(ppt_check(&rho, &Partition::parse("1|2,3", 3).unwrap()).unwrap() >= -1e-9);
    }

    #[test]
    fn coarse_graining_preserves_gram(
        states in prop::collection::vec((vector(2), vector(3), vector(2)), 1..6),
        k in 0usize..5,
    ) {
        let set = StateSet::new(
            "random",
            vec![2, 3, 2],
            states.into_iter().enumerate().map(|(n, (a, b, c))| ProductState::new(format!("r{n}"), vec![a, b, c])).collect(),
        ).unwrap();
        let p = &all_partitions(3)[k];
        let cg = coarse_grain(&set, p).unwrap();
        prop_assert!(tensor::max_abs(&(set.gram() - cg.gram())) <= 1e-12);
    }

    #[test]
    fn protocols_replay_and_opm_invariants_hold(
        which in 0usize..4,
        pick in subsequence((0..12usize).collect::<Vec<_>>(), 2..=12),
        k in 0usize..5,
    ) {
        let t = Tolerances::default();
        let base = &tripartite_sets()[which];
        let idx: Vec<usize> = pick.into_iter().filter(|&i| i < base.len()).collect();
        prop_assume!(idx.len() >= 2);
        let set = base.subset("sub", &idx).unwrap();
        let p = &all_partitions(3)[k];
        if let Some(tree) = distinguishability_search(&set, p, &t).unwrap() {
            prop_assert!(replay(&tree, &set, p, &t).is_ok());
            // merging blocks keeps a protocol available
            let full = Partition::fully_merged(3);
            prop_assert!(full.coarsens(p));
            for q in all_partitions(3).iter().filter(|q| q.coarsens(p)) {
                prop_assert!(distinguishability_search(&set, q, &t).unwrap().is_some());
            }
        }
        for b in 0..p.len() {
            let sys = opm_constraints(&set, p, b, &t).unwrap();
            let space = solve_on_support(&sys, &t).unwrap();
            prop_assert!(space.rank >= 1);
            prop_assert!(space.contains(&tensor::identity(sys.support_dim()), 1e-9));
            let a = opm_triviality(&set, p, b, &t).unwrap();
            prop_assert_eq!(a.trivial, a.solution_rank == 1);
            if let Some(w) = a.witness {
                for c in &sys.constraints {
                    prop_assert!(c.evaluate(&w).norm() < 1e-8);
                }
                prop_assert!(tensor::hermitian_deviation(&w) < 1e-12);
            }
        }
    }

    #[test]
    fn complement_state_is_a_scaled_projector(pick in subsequence((0..81usize).collect::<Vec<_>>(), 0..80)) {
        let t = Tolerances::default();
        let set = eq5_basis().subset("sub", &pick).unwrap();
        let rho = complement_mixed_state(&set, &t).unwrap();
        let rest = (81 - pick.len()) as f64;
        prop_assert!(tensor::hermitian_deviation(&rho.matrix) < 1e-12);
        prop_assert!((rho.matrix.trace().re - 1.0).abs() < 1e-9);
        prop_assert!(tensor::max_abs(&(&rho.matrix * &rho.matrix - rho.matrix.unscale(rest))) < 1e-9);
    }

    #[test]
    fn completion_contains_the_input(which in 0usize..3, pick in subsequence((0..12usize).collect::<Vec<_>>(), 0..12)) {
        let t = Tolerances::default();
        let (set, p) = match which {
            0 => (six_state_set(), "1,2|3"),
            1 => (six_state_set(), "1,3|2"),
            _ => (bennett_three_qubit_basis(), "1|2,3"),
        };
        let cg = coarse_grain(&set, &Partition::parse(p, 3).unwrap()).unwrap();
        let basis = complete_product_basis(&cg, &t).unwrap();
        let idx: Vec<usize> = pick.into_iter().filter(|&i| i < basis.len()).collect();
        let sub = basis.subset("sub", &idx).unwrap();
        let done = complete_product_basis(&sub, &t).unwrap();
        prop_assert_eq!(done.len(), done.total_dim());
        prop_assert!(verify_set(&done, &t).complete);
        prop_assert_eq!(&done.states[..sub.len()], &sub.states[..]);
    }
}
