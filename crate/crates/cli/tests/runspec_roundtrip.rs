use std::collections::BTreeMap;

use lmpo_cli::{parse_runspec, Field, PairField, RunSpec};
use lmpo_core::evolution::TrotterOrder;
use lmpo_core::pauli::Pauli;
use lmpo_core::states::PauliSpec;
use proptest::prelude::*;

fn field(n: usize) -> impl Strategy<Value = Field> {
    prop_oneof![
        (0.0..10.0f64).prop_map(Field::Uniform),
        proptest::collection::vec(-1e3..1e3f64, n).prop_map(Field::PerQubit),
    ]
}

fn rate(n: usize) -> impl Strategy<Value = Field> {
    prop_oneof![
        (0.0..5.0f64).prop_map(Field::Uniform),
        proptest::collection::vec(0.0..5.0f64, n).prop_map(Field::PerQubit),
    ]
}

fn pauli() -> impl Strategy<Value = Pauli> {
    prop_oneof![Just(Pauli::X), Just(Pauli::Y), Just(Pauli::Z)]
}

fn spec() -> impl Strategy<Value = RunSpec> {
    (3usize..9).prop_flat_map(|n| {
        let pair = (0..n, 0..n).prop_filter("distinct", |(a, b)| a != b);
        let entries = proptest::collection::btree_map((0..n - 1).prop_map(|a| (a, a + 1)), -5.0..5.0f64, 1..n);
        (
            (Just(n), 1usize..50, prop_oneof![Just(0.01), Just(0.02), Just(0.05), Just(1e-3)], 0usize..20),
            (field(n), field(n), field(n), rate(n), rate(n), rate(n)),
            prop_oneof![
                (-3.0..3.0f64, -3.0..3.0f64).prop_map(|(a, b)| (PairField::Uniform(a), PairField::Uniform(b))),
                (entries.clone(), entries).prop_map(|(a, b): (BTreeMap<_, _>, BTreeMap<_, _>)| (PairField::Entries(a), PairField::Entries(b))),
            ],
            (
                proptest::option::of(proptest::collection::vec((pauli(), any::<bool>()), 1..=1)),
                prop_oneof![Just(2u8), Just(3), Just(4)],
                1usize..1000,
                prop_oneof![Just(0.0), Just(1e-16), Just(1e-10), Just(2.5e-7)],
            ),
            (any::<bool>(), any::<bool>(), 0usize..11, any::<bool>(), 0usize..5),
            (
                proptest::collection::vec(0..n, 0..4),
                proptest::collection::vec(pauli(), 0..4),
                proptest::collection::vec(pair, 0..4),
                proptest::collection::vec((pauli(), pauli()), 0..4),
                "[a-z][a-z0-9_/]{0,12}",
            ),
        )
            .prop_map(|((n, steps, tau, start), fields, couplings, init, flags, outputs)| {
                let mut s = RunSpec::new(n, (start + steps) as f64 * tau, tau);
                s.t_init = start as f64 * tau;
                (s.h_x, s.h_y, s.h_z, s.g_0, s.g_1, s.g_2) = fields;
                (s.j, s.j_z) = couplings;
                let (pauli_state, order, max_dim, cutoff) = init;
                s.init_pauli_state =
                    pauli_state.map(|v| v.into_iter().map(|(a, up)| PauliSpec::new(a, if up { 1 } else { -1 }).unwrap()).collect());
                s.trotter_order = TrotterOrder::try_from(order).unwrap();
                s.max_dim_rho = max_dim;
                s.cut_off_rho = cutoff;
                (s.b_force_rho_trace, s.b_unique_id, s.force_rho_hermitian_step, s.b_save_final_state, s.output_step) = flags;
                (s.one_q_indices, s.one_q_components, s.two_q_indices, s.two_q_components, s.output_files_prefix) = outputs;
                s
            })
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn parse_inverts_emit(s in spec()) {
        let text = s.emit();
        let back = parse_runspec(&text).map_err(|e| TestCaseError::fail(format!("{e}\n{text}")))?;
        prop_assert_eq!(back, s);
    }

    #[test]
    fn unique_id_is_stable(s in spec()) {
        let back = parse_runspec(&s.emit()).unwrap();
        prop_assert_eq!(back.unique_id(), s.unique_id());
    }
}
