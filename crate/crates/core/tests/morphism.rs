mod common;

use common::{brute_morphism, random_formula, small_pairs};
use epiobs::generators::{build_iis, build_sa, truncation_morphism};
use epiobs::logic::{Checker, Formulas};
use epiobs::model::{
    build_input_model, build_input_model_on, find_morphism, graph_of_morphism, product_update,
    Morphism, Workspace,
};
use epiobs::{Mode, SimplicialModel, Simulation, ValueId};
use rand::rngs::StdRng;
use rand::SeedableRng;

/// Pairs with at most twenty source vertices, where brute force is cheap.
fn cases() -> Vec<(String, SimplicialModel, SimplicialModel)> {
    let mut out: Vec<_> = small_pairs()
        .into_iter()
        .map(|(n, m, t)| (n.to_string(), m, t))
        .collect();
    let ws2 = Workspace::numbered(2, 2);
    let input2 = build_input_model(&ws2).unwrap();
    let iis = build_iis(1, &input2).unwrap().model;
    for k in [1, 2] {
        out.push((
            format!("IIS1 vs SA{k}, two agents"),
            iis.clone(),
            build_sa(k, &input2).unwrap().model,
        ));
    }
    out.push(("input vs IIS1".into(), input2.clone(), iis.clone()));
    out.push(("IIS1 vs input".into(), iis, input2));
    let ws3 = Workspace::numbered(3, 3);
    let single = build_input_model_on(&ws3, &[(0..3).map(ValueId).collect()]).unwrap();
    let iis3 = build_iis(1, &single).unwrap().model;
    for k in [1, 2] {
        out.push((
            format!("IIS1 vs SA{k}, three agents, one input"),
            iis3.clone(),
            build_sa(k, &single).unwrap().model,
        ));
    }
    for (name, m, _) in &out {
        assert!(m.complex().vertices().len() <= 20, "{name}");
    }
    out
}

#[test]
fn search_agrees_with_enumeration() {
    for (name, m, t) in cases() {
        let found = find_morphism(&m, &t).unwrap();
        let brute = brute_morphism(&m, &t);
        assert_eq!(found.is_some(), brute.is_some(), "{name}");
        if let Some(f) = found {
            f.check(&m, &t).unwrap();
        }
    }
}

#[test]
fn consensus_has_no_morphism_but_two_set_agreement_does() {
    let input = build_input_model(&Workspace::numbered(2, 2)).unwrap();
    let iis = build_iis(1, &input).unwrap().model;
    assert!(find_morphism(&iis, &build_sa(1, &input).unwrap().model)
        .unwrap()
        .is_none());
    assert!(find_morphism(&iis, &build_sa(2, &input).unwrap().model)
        .unwrap()
        .is_some());
}

#[test]
fn graphs_of_found_morphisms_are_total_simulations() {
    for (name, m, t) in cases() {
        let Some(f) = find_morphism(&m, &t).unwrap() else {
            continue;
        };
        let g = graph_of_morphism(&m, &t, &f).unwrap();
        let sim = Simulation::new(&m, &t).unwrap();
        for mode in [Mode::K, Mode::D] {
            assert!(
                sim.verify(&g, mode, 0).unwrap().is_total_simulation(),
                "{name}, {mode}"
            );
        }
    }
}

#[test]
fn positive_knowledge_is_preserved_backwards_along_morphisms() {
    let mut rng = StdRng::seed_from_u64(11);
    for (name, m, t) in cases() {
        let Some(f) = find_morphism(&m, &t).unwrap() else {
            continue;
        };
        let mut store = Formulas::new();
        let phis: Vec<_> = (0..200)
            .map(|_| random_formula(&mut rng, &mut store, m.workspace(), 3, true))
            .collect();
        let (mut on_m, mut on_t) = (Checker::new(&m, &store), Checker::new(&t, &store));
        for phi in phis {
            for x in 0..m.facet_count() {
                let fx = f.image_facet(&m, &t, x).unwrap();
                if on_t.eval(fx, phi).unwrap() {
                    assert!(on_m.eval(x, phi).unwrap(), "{name}: facet {x}");
                }
            }
        }
    }
}

#[test]
fn truncating_three_rounds_to_two() {
    let input = build_input_model(&Workspace::numbered(2, 2)).unwrap();
    let long = build_iis(3, &input).unwrap();
    let short = build_iis(2, &input).unwrap();
    let f = truncation_morphism(&long, &short).unwrap();
    let g = graph_of_morphism(&long.model, &short.model, &f).unwrap();
    let sim = Simulation::new(&long.model, &short.model).unwrap();
    for mode in [Mode::K, Mode::D] {
        assert!(sim.verify(&g, mode, 0).unwrap().is_total_simulation());
    }
}

#[test]
fn deciding_the_own_input_solves_three_set_agreement() {
    let input = build_input_model(&Workspace::numbered(3, 3)).unwrap();
    let iis = build_iis(1, &input).unwrap();
    let sa = build_sa(3, &input).unwrap();
    let (src, dst) = (iis.model.complex(), sa.model.complex());
    let vmap = (0..src.vertices().len())
        .map(|v| {
            let own = iis.view_vertex(v).input;
            (0..dst.vertices().len())
                .find(|&w| {
                    let (agent, decision) = sa.source.vertices[sa.action_vertex(w)];
                    dst.vertex(w).color == src.vertex(v).color
                        && dst.vertex(w).atoms == src.vertex(v).atoms
                        && agent == src.vertex(v).color
                        && decision == own
                })
                .unwrap()
        })
        .collect();
    let f = Morphism { vmap };
    let g = graph_of_morphism(&iis.model, &sa.model, &f).unwrap();
    let sim = Simulation::new(&iis.model, &sa.model).unwrap();
    assert!(sim.verify(&g, Mode::K, 0).unwrap().is_total_simulation());
}

#[test]
fn product_update_keeps_exactly_the_satisfied_pairs() {
    let input = build_input_model(&Workspace::numbered(2, 3)).unwrap();
    for action in
        [build_sa(1, &input).unwrap(), build_sa(2, &input).unwrap()].map(|i| i.source.action)
    {
        let mut checker = Checker::new(&input, action.formulas());
        let mut expected = Vec::new();
        for x in 0..input.facet_count() {
            for t in 0..action.facet_count() {
                if checker.eval(x, action.pre(t)).unwrap() {
                    expected.push((x, t));
                }
            }
        }
        let up = product_update(&input, &action).unwrap();
        let mut got = up.facet_sources.clone();
        got.sort_unstable();
        assert_eq!(got, expected);
        assert!(up.model.complex().validate().is_empty());
    }
}
