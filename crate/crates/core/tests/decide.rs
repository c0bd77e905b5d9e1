use csprove_core::proofgraph::Problem;
use csprove_core::search::{label_phase, saturation_phase};
use csprove_core::{
    axiom_instances, check_local, check_progress, check_proof, decide, decide_formula, forces,
    is_interpretation, parse, refute_semantic, sequent_holds, standard_corpus, validate_model,
    CarlsonModel, Config, Expected, Formula, Interpretation, Label, LabelledFormula, RelAtom,
    RelKind, RuleName, Sequent, Verdict, WorldId,
};

fn verdict(text: &str) -> Verdict {
    decide_formula(&parse(text).unwrap(), &Config::default()).unwrap()
}

fn lf(n: u32, text: &str) -> LabelledFormula {
    LabelledFormula::new(Label(n), parse(text).unwrap())
}

#[test]
fn corpus_verdicts_match_expectations() {
    for entry in standard_corpus() {
        let v = decide_formula(&entry.formula, &Config::default()).unwrap();
        match (v, entry.expected) {
            (Verdict::Proved(g), Expected::Provable) => check_proof(&g).unwrap(),
            (Verdict::Refuted { model, interpretation, .. }, Expected::Refutable) => {
                validate_model(&model).unwrap();
                let root = interpretation.get(Label(0)).unwrap();
                assert!(!forces(&model, root, &entry.formula).unwrap(), "{}", entry.name);
                assert!(refute_semantic(&entry.formula, 4).is_some(), "{}", entry.name);
            }
            (_, expected) => panic!("{}: expected {expected}", entry.name),
        }
    }
}

#[test]
fn axioms_with_compound_arguments() {
    let a = parse("[d]p -> q").unwrap();
    let b = parse("[b]q").unwrap();
    for f in axiom_instances(&a, &b) {
        let Verdict::Proved(g) = decide_formula(&f, &Config::default()).unwrap() else {
            panic!("{f} refuted");
        };
        check_proof(&g).unwrap();
    }
}

#[test]
fn figure_three_graph() {
    let Verdict::Proved(g) = verdict("[b]([b]p -> p) -> [d][b]p") else { panic!() };
    check_local(&g).unwrap();
    check_progress(&g).unwrap();
    let names = g.rule_names();
    assert_eq!(&names[..2], &[RuleName::ImpR, RuleName::TriR]);
    assert!(names.contains(&RuleName::Trans(RelKind::S, RelKind::R)));
    let (_, edge) = g.back_edges.iter().next().unwrap();
    let (a, x) = edge.pivot;
    assert_eq!(edge.renaming[&a], x);
    assert_eq!(g.node(edge.target).rule.as_ref().unwrap().name, RuleName::BoxR);
}

#[test]
fn pivot_tampering_is_caught() {
    let Verdict::Proved(mut g) = verdict("[d]([d]p -> p) -> [d]p") else { panic!() };
    let source = *g.back_edges.keys().next().unwrap();
    let (a, _) = g.back_edges[&source].pivot;
    g.back_edges.get_mut(&source).unwrap().pivot = (a, a);
    assert!(matches!(
        check_progress(&g).unwrap_err().problem,
        Problem::PivotNotRenamed(..)
    ));
}

#[test]
fn refutes_with_two_worlds() {
    let Verdict::Refuted { model, leaf, .. } = verdict("[d]p -> [b]p") else { panic!() };
    assert_eq!(model.worlds, vec!["x0", "x1"]);
    assert_eq!(model.prec, [(WorldId(0), WorldId(1))].into_iter().collect());
    assert_eq!(model.m0, [WorldId(1)].into_iter().collect());
    assert!(model.m1.is_empty());
    assert!(model.valuation["p"].is_empty());
    assert!(!sequent_holds(&model, &leaf));
    let root = Sequent::root(Label(0), parse("[d]p -> [b]p").unwrap());
    assert!(!sequent_holds(&model, &root));
}

#[test]
fn decides_sequents_with_relational_context() {
    // x3 S x5 with [b]p at x3 says nothing about x5
    let s = Sequent {
        rels: [RelAtom::new(Label(3), RelKind::S, Label(5))].into_iter().collect(),
        left: [lf(3, "[b]p")].into_iter().collect(),
        right: [lf(5, "p")].into_iter().collect(),
    };
    let Verdict::Refuted { model, interpretation, .. } = decide(&s, &Config::default()).unwrap() else {
        panic!()
    };
    assert!(is_interpretation(&model, &s, &interpretation));
    assert!(!sequent_holds(&model, &s));

    let s = Sequent {
        rels: [RelAtom::new(Label(3), RelKind::S, Label(5))].into_iter().collect(),
        left: [lf(3, "[d]p")].into_iter().collect(),
        right: [lf(5, "p")].into_iter().collect(),
    };
    let Verdict::Proved(g) = decide(&s, &Config::default()).unwrap() else { panic!() };
    assert_eq!(g.rule_names(), vec![RuleName::TriL, RuleName::Id]);
}

#[test]
fn phases_on_figure_three_middle_segment() {
    let s = Sequent {
        rels: [
            RelAtom::new(Label(0), RelKind::S, Label(1)),
            RelAtom::new(Label(1), RelKind::R, Label(2)),
        ]
        .into_iter()
        .collect(),
        left: [lf(0, "[b]([b]p -> p)")].into_iter().collect(),
        right: [lf(2, "p")].into_iter().collect(),
    };
    let t = saturation_phase(&s);
    let leaves = t.open_leaves();
    assert_eq!(leaves.len(), 1);
    assert!(leaves[0].contains(csprove_core::Side::Right, Label(2), &parse("[b]p").unwrap()));
    let chain = label_phase(leaves[0]);
    assert_eq!(chain.rule_names(), vec![RuleName::BoxR]);
    assert!(chain.open_leaves()[0].pending_labels().is_empty());
}

#[test]
fn trace_does_not_change_the_result() {
    let f = parse("[b]([b]p -> p) -> [b]p").unwrap();
    let quiet = decide_formula(&f, &Config::default()).unwrap();
    let loud = decide_formula(&f, &Config { trace: true, ..Config::default() }).unwrap();
    match (quiet, loud) {
        (Verdict::Proved(a), Verdict::Proved(b)) => assert_eq!(a, b),
        _ => panic!("verdicts differ"),
    }
}

#[test]
fn unimodal_fragment_behaves_like_gl() {
    for text in ["[b]([b]p -> p) -> [b]p", "[b]p -> [b][b]p", "[b](p -> q) -> [b]p -> [b]q"] {
        assert!(verdict(text).is_proved(), "{text}");
    }
    for text in ["p -> [b]p", "[b]p -> p", "[b]bot", "~[b]bot"] {
        assert!(!verdict(text).is_proved(), "{text}");
    }
    // refutations of box-only formulas hold in models with m0 = all worlds
    for text in ["p -> [b]p", "[b]p -> p"] {
        let Verdict::Refuted { model, interpretation, .. } = verdict(text) else { panic!() };
        let everywhere = CarlsonModel {
            m0: (0..model.world_count()).map(WorldId).collect(),
            ..model
        };
        let root = interpretation.get(Label(0)).unwrap();
        assert!(!forces(&everywhere, root, &parse(text).unwrap()).unwrap());
    }
}

#[test]
fn interpretation_of_figure_three_sequent() {
    let s = Sequent {
        rels: [
            RelAtom::new(Label(0), RelKind::S, Label(1)),
            RelAtom::new(Label(1), RelKind::R, Label(2)),
            RelAtom::new(Label(0), RelKind::R, Label(2)),
        ]
        .into_iter()
        .collect(),
        ..Sequent::default()
    };
    let chain = CarlsonModel {
        worlds: vec!["a".into(), "b".into(), "c".into()],
        prec: [(0, 1), (1, 2), (0, 2)].into_iter().map(|(a, b)| (WorldId(a), WorldId(b))).collect(),
        m0: [WorldId(2)].into_iter().collect(),
        m1: [WorldId(1)].into_iter().collect(),
        valuation: Default::default(),
    };
    let i = Interpretation {
        assignment: (0..3).map(|n| (Label(n), WorldId(n as usize))).collect(),
    };
    assert!(is_interpretation(&chain, &s, &i));
    assert!(!Formula::Bot.is_modal());
}
