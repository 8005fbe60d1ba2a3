//! Property tests: calculus and stability against definition-level
//! re-implementations, solver guarantees against the exhaustive oracle,
//! and round trips of every text format.

use proptest::prelude::*;
use ssmc::degree2::solve_degree2;
use ssmc::generators::{gen_b2sat, gen_instance, GenParams};
use ssmc::model::{self, EdgeId, Vertex};
use ssmc::oracle::{all_stable_matchings, enumerate_matchings, DEFAULT_BUDGET};
use ssmc::preprocess::{check_conditions, critical_hospitals, preprocess};
use ssmc::reductions::{
    assignment_to_matching, matching_to_assignment, meets_hardness_restrictions, parse_b2sat,
    reduce_sat,
};
use ssmc::separated::solve_separated;
use ssmc::stability::parse_matching;
use ssmc::{is_stable, parse_instance, EdgeSet, Instance, Matching};

fn params() -> impl Strategy<Value = GenParams> {
    (any::<u64>(), 1usize..=5, 1usize..=5, 0.2f64..0.9, 0.0f64..0.8, 0.0f64..0.7, any::<bool>(), any::<bool>())
        .prop_map(|(seed, nd, nh, edge_prob, tie_prob, closure_prob, star, degree2)| GenParams {
            seed,
            n_doctors: nd,
            n_hospitals: nh,
            max_degree: None,
            edge_prob,
            tie_prob,
            closure_prob,
            enforce_star: star,
            enforce_degree2: degree2,
        })
}

fn instance() -> impl Strategy<Value = Instance> {
    params().prop_map(|p| gen_instance(&p).unwrap())
}

fn instance_and_subset() -> impl Strategy<Value = (Instance, EdgeSet)> {
    (instance(), any::<u64>()).prop_map(|(inst, mask)| {
        let set = inst.edge_set(inst.edge_ids().filter(|e| mask >> (e.0 % 64) & 1 == 1));
        (inst, set)
    })
}

fn rank(inst: &Instance, v: Vertex, e: EdgeId) -> u32 {
    match v {
        Vertex::Doctor(_) => inst.doctor_rank(e),
        Vertex::Hospital(_) => inst.hospital_rank(e),
    }
}

/// `Ch_v(F)` as "no edge of `F(v)` is strictly better".
fn ch_vertex_by_definition(inst: &Instance, v: Vertex, set: &EdgeSet) -> Vec<EdgeId> {
    let at_v: Vec<EdgeId> = inst.incident_in(v, set).collect();
    at_v.iter()
        .copied()
        .filter(|&e| at_v.iter().all(|&f| rank(inst, v, f) >= rank(inst, v, e)))
        .collect()
}

fn ch_by_definition(inst: &Instance, set: &EdgeSet) -> EdgeSet {
    let doctor_side = inst.edge_set(inst.doctors().flat_map(|d| ch_vertex_by_definition(inst, Vertex::Doctor(d), set)));
    inst.edge_set(inst.hospitals().flat_map(|h| ch_vertex_by_definition(inst, Vertex::Hospital(h), &doctor_side)))
}

/// `block(F)` by pairwise comparison with every edge of `F` at each end.
fn block_by_definition(inst: &Instance, set: &EdgeSet) -> EdgeSet {
    inst.edge_set(inst.edge_ids().filter(|&e| {
        if set.contains(e) {
            return false;
        }
        let edge = inst.edge(e);
        let at_h: Vec<EdgeId> = inst.incident_in(Vertex::Hospital(edge.hospital), set).collect();
        if at_h.is_empty() {
            return false;
        }
        let at_d: Vec<EdgeId> = inst.incident_in(Vertex::Doctor(edge.doctor), set).collect();
        let d_strict = at_d.iter().all(|&f| inst.doctor_rank(e) < inst.doctor_rank(f));
        let d_tied = !at_d.is_empty() && at_d.iter().all(|&f| inst.doctor_rank(e) == inst.doctor_rank(f));
        let h_weak = at_h.iter().all(|&f| inst.hospital_rank(e) <= inst.hospital_rank(f));
        let h_strict = at_h.iter().all(|&f| inst.hospital_rank(e) < inst.hospital_rank(f));
        (d_strict && h_weak) || (d_tied && h_strict)
    }))
}

/// Stability straight from the definition of a blocking edge.
fn stable_by_definition(inst: &Instance, m: &Matching) -> bool {
    inst.edge_ids().filter(|&e| !m.contains(e)).all(|e| {
        let edge = inst.edge(e);
        let partner_d = m.of_doctor(edge.doctor);
        let partner_h = m.of_hospital(edge.hospital);
        let better = |mine: u32, theirs: Option<u32>| theirs.is_none_or(|t| mine < t);
        let at_least = |mine: u32, theirs: Option<u32>| theirs.is_none_or(|t| mine <= t);
        let dr = inst.doctor_rank(e);
        let hr = inst.hospital_rank(e);
        let d_weak = at_least(dr, partner_d.map(|f| inst.doctor_rank(f)));
        let d_strong = better(dr, partner_d.map(|f| inst.doctor_rank(f)));
        let closed_out = inst.is_closed(edge.hospital) && partner_h.is_none();
        let h_weak = !closed_out && at_least(hr, partner_h.map(|f| inst.hospital_rank(f)));
        let h_strong = !closed_out && better(hr, partner_h.map(|f| inst.hospital_rank(f)));
        !(d_weak && h_weak && (d_strong || h_strong))
    })
}

/// Matchings counted by include/exclude recursion.
fn count_matchings(inst: &Instance, from: usize, used_d: &mut Vec<bool>, used_h: &mut Vec<bool>) -> usize {
    if from == inst.edge_count() {
        return 1;
    }
    let mut total = count_matchings(inst, from + 1, used_d, used_h);
    let edge = inst.edge(EdgeId(from));
    if !used_d[edge.doctor.0] && !used_h[edge.hospital.0] {
        used_d[edge.doctor.0] = true;
        used_h[edge.hospital.0] = true;
        total += count_matchings(inst, from + 1, used_d, used_h);
        used_d[edge.doctor.0] = false;
        used_h[edge.hospital.0] = false;
    }
    total
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(300))]

    #[test]
    fn choice_matches_definition((inst, set) in instance_and_subset()) {
        prop_assert_eq!(model::ch(&inst, &set), ch_by_definition(&inst, &set));
        let ch = model::ch(&inst, &set);
        prop_assert!(model::is_flat(&inst, &ch));
        prop_assert!(ch.is_subset(&set));
    }

    #[test]
    fn block_matches_definition((inst, set) in instance_and_subset()) {
        let flat = model::ch(&inst, &set);
        prop_assert_eq!(model::block_set(&inst, &flat).unwrap(), block_by_definition(&inst, &flat));
    }

    #[test]
    fn stability_matches_definition(inst in instance()) {
        prop_assume!(inst.edge_count() <= 14);
        for m in enumerate_matchings(&inst, DEFAULT_BUDGET).unwrap() {
            prop_assert_eq!(is_stable(&inst, &m), stable_by_definition(&inst, &m));
        }
    }

    #[test]
    fn enumeration_count_matches_recursion(inst in instance()) {
        prop_assume!(inst.edge_count() <= 14);
        let streamed = enumerate_matchings(&inst, DEFAULT_BUDGET).unwrap().count();
        let counted = count_matchings(&inst, 0, &mut vec![false; inst.doctor_count()], &mut vec![false; inst.hospital_count()]);
        prop_assert_eq!(streamed, counted);
    }

    #[test]
    fn preprocess_guarantees(inst in instance()) {
        let res = preprocess(&inst);
        prop_assert!(check_conditions(&inst, &res).is_ok(), "{:?}", check_conditions(&inst, &res));
        if inst.edge_count() <= 14 {
            let stable = all_stable_matchings(&inst, DEFAULT_BUDGET).unwrap();
            for m in &stable {
                prop_assert!(m.edges().iter().all(|&e| !res.forbidden.contains(e)));
            }
            if critical_hospitals(&inst, &res).is_empty() {
                prop_assert!(is_stable(&inst, &res.matching));
            }
        }
    }

    #[test]
    fn solvers_agree_with_oracle(inst in instance()) {
        prop_assume!(inst.edge_count() <= 14);
        let exists = !all_stable_matchings(&inst, DEFAULT_BUDGET).unwrap().is_empty();
        if let Ok(out) = solve_separated(&inst) {
            prop_assert_eq!(out.exists(), exists);
            prop_assert!(out.matching().is_none_or(|m| is_stable(&inst, m)));
        }
        if let Ok(out) = solve_degree2(&inst) {
            prop_assert_eq!(out.exists(), exists);
            prop_assert!(out.matching().is_none_or(|m| is_stable(&inst, m)));
        }
    }

    #[test]
    fn instance_text_round_trips(inst in instance()) {
        let text = inst.to_string();
        let again = parse_instance(&text).unwrap();
        prop_assert_eq!(&again, &inst);
        prop_assert_eq!(again.to_string(), text);
    }

    #[test]
    fn matching_text_round_trips(inst in instance()) {
        let m = ssmc::bipartite::max_matching(&inst, &inst.all_edges());
        let parsed = parse_matching(&inst, &m.display(&inst).to_string()).unwrap();
        prop_assert_eq!(parsed, m);
    }

    #[test]
    fn generator_flags_hold(p in params()) {
        let inst = gen_instance(&p).unwrap();
        prop_assert_eq!(inst.to_string(), gen_instance(&p).unwrap().to_string());
        if p.enforce_star {
            prop_assert!(ssmc::separated::satisfies_star(&inst));
        }
        if p.enforce_degree2 {
            prop_assert!(inst.max_doctor_degree() <= 2);
        }
    }

    #[test]
    fn reduction_forward_direction(seed in any::<u64>(), k in 1usize..=2) {
        let f = gen_b2sat(3 * k, seed).unwrap();
        prop_assert_eq!(parse_b2sat(&f.to_string()).unwrap(), f.clone());
        let (inst, map) = reduce_sat(&f);
        prop_assert!(meets_hardness_restrictions(&inst));
        let n = f.variable_count();
        prop_assert_eq!(inst.edge_count(), 4 * n + 13 * f.clauses().len());
        if let Some(phi) = ssmc::oracle::sat_bruteforce(&f).unwrap() {
            let m = assignment_to_matching(&f, &inst, &map, &phi).unwrap();
            prop_assert!(stable_by_definition(&inst, &m));
            prop_assert_eq!(matching_to_assignment(&inst, &map, &m).unwrap(), phi);
        }
    }
}

#[test]
fn distinct_seeds_give_distinct_instances() {
    let texts: std::collections::HashSet<String> = (0..1000)
        .map(|seed| gen_instance(&GenParams { seed, n_doctors: 6, n_hospitals: 6, ..GenParams::default() }).unwrap().to_string())
        .collect();
    assert!(texts.len() >= 990, "{} distinct", texts.len());
}

/// Every (3,B2) formula over three variables: each clause that does not
/// contain complementary literals uses all three variables and so rules out
/// exactly one of the eight assignments, which four clauses cannot exhaust.
#[test]
fn every_three_variable_formula_is_satisfiable() {
    let literals = [1, 2, 3, -1, -2, -3];
    let mut triples = Vec::new();
    for a in 0..6 {
        for b in a + 1..6 {
            for c in b + 1..6 {
                triples.push(vec![literals[a], literals[b], literals[c]]);
            }
        }
    }
    let mut formulas = 0;
    let k = triples.len();
    for i in 0..k {
        for j in i..k {
            for l in j..k {
                for m in l..k {
                    let clauses = vec![triples[i].clone(), triples[j].clone(), triples[l].clone(), triples[m].clone()];
                    let Ok(f) = ssmc::reductions::B2Formula::new(3, clauses) else {
                        continue;
                    };
                    formulas += 1;
                    assert!(ssmc::oracle::sat_bruteforce(&f).unwrap().is_some(), "{f}");
                }
            }
        }
    }
    assert!(formulas > 0);
}
