use proptest::prelude::*;

use ks_core::instance::{check_subset, gen_planted, gen_random};
use ks_core::io::{instance_from_json, instance_to_json};
use ks_core::oracle::{branch_and_bound_w, brute_force_w, eq1_feasible_pruned, DEFAULT_M_LIMIT};
use ks_core::reduction::{
    assignment_to_subset, ks_form_to_instance, nae_brute_solve, subset_to_assignment, CnfFormula, Decoded,
};
use ks_core::solver::{solve, SolveStatus};

fn f_sat3() -> CnfFormula {
    CnfFormula::from_signed(3, &[[1, 2, 3], [-1, -2, 3], [1, -2, -3]]).unwrap()
}

fn f_unsat4() -> CnfFormula {
    CnfFormula::from_signed(3, &[[1, 2, 3], [-1, -2, 3], [1, -2, -3], [-1, 2, -3]]).unwrap()
}

#[test]
fn satisfiable_formula_has_zero_discrepancy() {
    let (inst, layout) = ks_form_to_instance(&f_sat3()).unwrap();
    let r = branch_and_bound_w(&inst).unwrap();
    assert!(r.w_value <= 1e-12);
    // the optimum decodes to an NAE solution
    match subset_to_assignment(&layout, &r.argmin_subset) {
        Decoded::Assignment(a) => assert!(ks_core::reduction::nae_eval(&f_sat3(), &a).unwrap()),
        other => panic!("{other:?}"),
    }
}

#[test]
fn unsatisfiable_formula_is_far_from_half() {
    let (inst, _) = ks_form_to_instance(&f_unsat4()).unwrap();
    let c = 1.0 / (4.0 * 2f64.sqrt());
    let (feasible, witness) = eq1_feasible_pruned(&inst, c).unwrap();
    assert!(!feasible && witness.is_none());
}

#[test]
fn every_nae_solution_maps_to_an_exact_half() {
    let (inst, layout) = ks_form_to_instance(&f_sat3()).unwrap();
    let mut count = 0;
    for bits in 0u8..8 {
        let a: Vec<bool> = (0..3).map(|i| bits >> i & 1 == 1).collect();
        if let Ok(s) = assignment_to_subset(&layout, &a) {
            let r = check_subset(&inst, &s, 1e-9, 0.0).unwrap();
            assert!(r.satisfies_eq1, "{a:?}");
            count += 1;
        }
    }
    let first = nae_brute_solve(&f_sat3(), 24).unwrap();
    assert!(first.is_some() && count >= 2);
}

#[test]
fn solver_agrees_with_oracle_on_planted_instances() {
    for seed in 0..10 {
        let (inst, planted) = gen_planted(3, 5, seed).unwrap();
        let w = brute_force_w(&inst, DEFAULT_M_LIMIT).unwrap();
        assert!(w.w_value <= 1e-12);
        assert!(check_subset(&inst, &planted, 1e-6, 0.0).unwrap().satisfies_eq1);
        let out = solve(&inst, 0.1, 0.3, seed, None).unwrap();
        if let Some(s) = out.subset() {
            assert!(check_subset(&inst, s, 0.1, 0.3).unwrap().satisfies_eq2);
        }
    }
}

#[test]
fn serialized_instance_solves_identically() {
    let inst = gen_random(3, 9, 12).unwrap();
    let (back, _) = instance_from_json(&instance_to_json(&inst, None)).unwrap();
    let back = back.validate(1e-9).unwrap();
    let a = solve(&inst, 0.3, 0.2, 5, None).unwrap();
    let b = solve(&back, 0.3, 0.2, 5, None).unwrap();
    assert_eq!(a.to_json(), b.to_json());
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn found_subsets_always_reverify(seed in any::<u64>(), d in 2usize..4, extra in 0usize..6, c in 0.05f64..0.4, eps in 0.05f64..0.5) {
        let inst = gen_random(d, d + extra, seed).unwrap();
        prop_assume!(c * inst.alpha().sqrt() < 0.5);
        let out = solve(&inst, c, eps, seed, None).unwrap();
        match out.status {
            SolveStatus::Found => {
                let r = check_subset(&inst, out.subset().unwrap(), c, eps).unwrap();
                prop_assert!(r.satisfies_eq2);
            }
            SolveStatus::NotFound => prop_assert!(out.report.is_none()),
        }
        prop_assert!(out.stats.peak_level_size <= 1usize << out.stats.levels_processed);
    }

    #[test]
    fn solving_is_deterministic(seed in any::<u64>(), run_seed in any::<u64>()) {
        let inst = gen_random(3, 8, seed).unwrap();
        let a = solve(&inst, 0.2, 0.2, run_seed, None).unwrap();
        let b = solve(&inst, 0.2, 0.2, run_seed, None).unwrap();
        prop_assert_eq!(a.to_json(), b.to_json());
    }

    #[test]
    fn oracle_matches_pruned_search(seed in any::<u64>(), d in 2usize..4, extra in 0usize..7) {
        let inst = gen_random(d, d + extra, seed).unwrap();
        let a = brute_force_w(&inst, DEFAULT_M_LIMIT).unwrap();
        let b = branch_and_bound_w(&inst).unwrap();
        prop_assert!((a.w_value - b.w_value).abs() <= 1e-12);
    }
}
