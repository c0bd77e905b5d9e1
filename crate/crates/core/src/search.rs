//! Proof search: saturation phases alternate with label phases, axioms are
//! closed eagerly, and repeated label signatures become back-edges.
//!
//! Label phases run one label at a time, always the pending label with the
//! greatest id. Under that order everything expanded between a label `a`
//! and a later label `x` below it belongs to `a`'s subtree, which is what
//! makes the back-edge containment check succeed.

use std::collections::{BTreeMap, BTreeSet};

use serde_json::json;
use thiserror::Error;

use crate::calculus::{apply, applicable, close, Principal, RuleInstance, RuleName};
use crate::formula::Formula;
use crate::model::{extract_model, CarlsonModel, Interpretation};
use crate::proofgraph::{check_proof, BackEdge, CheckError, NodeId, ProofGraph, ProofNode};
use crate::sequent::{Label, LabelAllocator, RelKind, Sequent, Side};

/// The formulas at one label when its label phase is about to start, plus
/// the kind of the atoms pointing into it.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct LabelSignature {
    pub incoming: Option<RelKind>,
    pub left_formulas: BTreeSet<Formula>,
    pub right_formulas: BTreeSet<Formula>,
}

impl LabelSignature {
    pub fn of(s: &Sequent, x: Label) -> Self {
        LabelSignature {
            incoming: s.rels.iter().find(|r| r.dst == x).map(|r| r.kind),
            left_formulas: s.formulas_at(Side::Left, x).cloned().collect(),
            right_formulas: s.formulas_at(Side::Right, x).cloned().collect(),
        }
    }
}

#[derive(Debug, Clone, Default)]
pub struct Config {
    /// Label phases allowed on one branch; `None` uses `4^|closure| + 1`.
    pub max_steps: Option<u64>,
    /// Write one JSON object per search event to standard error.
    pub trace: bool,
}

#[derive(Debug, Clone)]
pub enum Verdict {
    Proved(ProofGraph),
    Refuted {
        model: CarlsonModel,
        interpretation: Interpretation,
        leaf: Sequent,
    },
}

impl Verdict {
    pub fn is_proved(&self) -> bool {
        matches!(self, Verdict::Proved(_))
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum SearchError {
    #[error("branch exceeded {0} label phases")]
    BudgetExceeded(u64),
    #[error("checker rejected the constructed proof: {0}")]
    CheckerRejected(CheckError),
}

/// A finite derivation tree; leaves without a rule are open.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Derivation {
    pub sequent: Sequent,
    pub rule: Option<RuleInstance>,
    pub children: Vec<Derivation>,
}

impl Derivation {
    pub fn open_leaves(&self) -> Vec<&Sequent> {
        if self.rule.is_none() {
            return vec![&self.sequent];
        }
        self.children.iter().flat_map(|c| c.open_leaves()).collect()
    }

    pub fn rule_names(&self) -> Vec<RuleName> {
        let mut out: Vec<RuleName> = self.rule.iter().map(|r| r.name).collect();
        for c in &self.children {
            out.extend(c.rule_names());
        }
        out
    }
}

/// The next saturation step: composition first, then `BoxL`/`TriL`, then
/// `ImpR`, then `ImpL`. `None` when `s` is saturated.
pub fn saturation_step(s: &Sequent) -> Option<RuleInstance> {
    let (name, principal) = applicable(s).into_iter().find(|(name, _)| {
        !matches!(name, RuleName::Id | RuleName::Bot) && !name.is_label_rule()
    })?;
    let mut alloc = LabelAllocator::above(s);
    Some(apply(s, name, &principal, &mut alloc).expect("applicable rule applies"))
}

/// Saturates `s`, closing axioms as soon as they appear.
pub fn saturation_phase(s: &Sequent) -> Derivation {
    if let Some(rule) = close(s) {
        return Derivation {
            sequent: s.clone(),
            rule: Some(rule),
            children: vec![],
        };
    }
    match saturation_step(s) {
        None => Derivation {
            sequent: s.clone(),
            rule: None,
            children: vec![],
        },
        Some(rule) => Derivation {
            sequent: s.clone(),
            children: rule.premises.iter().map(saturation_phase).collect(),
            rule: Some(rule),
        },
    }
}

fn label_step(s: &Sequent, only: Option<Label>, alloc: &mut LabelAllocator) -> Option<RuleInstance> {
    let occ = s
        .right
        .iter()
        .find(|lf| lf.formula.is_modal() && only.is_none_or(|x| lf.label == x))?;
    let name = if matches!(occ.formula, Formula::Box(_)) {
        RuleName::BoxR
    } else {
        RuleName::TriR
    };
    Some(
        apply(s, name, &Principal::formula(occ.clone(), Side::Right), alloc)
            .expect("right modal always expands"),
    )
}

/// Expands every right `[b]`/`[d]`, including ones the phase itself
/// produces, with fresh labels. The result is a single chain.
pub fn label_phase(s: &Sequent) -> Derivation {
    let mut alloc = LabelAllocator::above(s);
    let mut chain = Vec::new();
    let mut cur = s.clone();
    while let Some(rule) = label_step(&cur, None, &mut alloc) {
        let next = rule.premises[0].clone();
        chain.push((cur, rule));
        cur = next;
    }
    let mut tree = Derivation {
        sequent: cur,
        rule: None,
        children: vec![],
    };
    while let Some((sequent, rule)) = chain.pop() {
        tree = Derivation {
            sequent,
            rule: Some(rule),
            children: vec![tree],
        };
    }
    tree
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Mode {
    Saturate,
    /// Inside the label phase of this label.
    Expand(Label),
}

#[derive(Debug, Clone)]
struct Visit {
    label: Label,
    signature: LabelSignature,
    node: NodeId,
}

#[derive(Debug, Clone)]
struct Task {
    node: NodeId,
    mode: Mode,
    path: Vec<Visit>,
    phases: u64,
}

struct Search<'a> {
    config: &'a Config,
    nodes: Vec<ProofNode>,
    back_edges: BTreeMap<NodeId, BackEdge>,
    alloc: LabelAllocator,
    cap: u64,
}

impl Search<'_> {
    fn trace(&self, event: serde_json::Value) {
        if self.config.trace {
            eprintln!("{event}");
        }
    }

    fn push(&mut self, sequent: Sequent) -> NodeId {
        self.nodes.push(ProofNode {
            sequent,
            rule: None,
            children: vec![],
        });
        NodeId(self.nodes.len() - 1)
    }

    /// Attaches `rule` at `task.node` and returns the tasks for its premises.
    fn expand(&mut self, task: &Task, rule: RuleInstance, mode: Mode, phases: u64, path: &[Visit]) -> Vec<Task> {
        let children: Vec<NodeId> = rule.premises.iter().map(|p| self.push(p.clone())).collect();
        let node = &mut self.nodes[task.node.0];
        node.children = children.clone();
        node.rule = Some(rule);
        children
            .into_iter()
            .rev()
            .map(|node| Task {
                node,
                mode,
                path: path.to_vec(),
                phases,
            })
            .collect()
    }

    /// The nearest recorded ancestor label `a` with `x`'s signature, below
    /// which `x` sits, and whose expansion node embeds into the current one.
    fn find_loop(&self, s: &Sequent, x: Label, sig: &LabelSignature, path: &[Visit]) -> Option<BackEdge> {
        for visit in path.iter().rev() {
            if visit.signature != *sig || !s.reaches(visit.label, x) {
                continue;
            }
            let target = &self.nodes[visit.node.0].sequent;
            let renaming: BTreeMap<Label, Label> = target
                .labels_of()
                .into_iter()
                .map(|l| (l, if l == visit.label { x } else { l }))
                .collect();
            if target.rename(&renaming).is_subsequent_of(s) {
                return Some(BackEdge {
                    target: visit.node,
                    renaming,
                    pivot: (visit.label, x),
                });
            }
        }
        None
    }
}

/// Decides `root`: a checked cyclic proof, or a countermodel read off a
/// fully saturated leaf.
pub fn decide(root: &Sequent, config: &Config) -> Result<Verdict, SearchError> {
    let closure_size = root
        .formulas()
        .flat_map(|f| f.subformula_closure())
        .collect::<BTreeSet<_>>()
        .len();
    let cap = config
        .max_steps
        .unwrap_or_else(|| 4u64.saturating_pow(closure_size as u32).saturating_add(1));
    let mut search = Search {
        config,
        nodes: Vec::new(),
        back_edges: BTreeMap::new(),
        alloc: LabelAllocator::above(root),
        cap,
    };
    let root_id = search.push(root.clone());
    let mut stack = vec![Task {
        node: root_id,
        mode: Mode::Saturate,
        path: Vec::new(),
        phases: 0,
    }];

    while let Some(task) = stack.pop() {
        let s = search.nodes[task.node.0].sequent.clone();
        if let Some(rule) = close(&s) {
            search.trace(json!({"event": "close", "node": task.node.0, "rule": rule.name.to_string()}));
            search.nodes[task.node.0].rule = Some(rule);
            continue;
        }
        if let Mode::Expand(x) = task.mode {
            if let Some(rule) = label_step(&s, Some(x), &mut search.alloc) {
                let next = search.expand(&task, rule, task.mode, task.phases, &task.path);
                stack.extend(next);
                continue;
            }
        }
        if let Some(rule) = saturation_step(&s) {
            let next = search.expand(&task, rule, Mode::Saturate, task.phases, &task.path);
            stack.extend(next);
            continue;
        }
        let Some(&x) = s.pending_labels().iter().next_back() else {
            search.trace(json!({"event": "refuted", "node": task.node.0, "leaf": s}));
            let (model, interpretation) = extract_model(&s).expect("leaf is fully saturated");
            return Ok(Verdict::Refuted {
                model,
                interpretation,
                leaf: s,
            });
        };
        let signature = LabelSignature::of(&s, x);
        if let Some(edge) = search.find_loop(&s, x, &signature, &task.path) {
            search.trace(json!({
                "event": "back_edge",
                "from": task.node.0,
                "to": edge.target.0,
                "pivot": [edge.pivot.0, edge.pivot.1],
            }));
            search.back_edges.insert(task.node, edge);
            continue;
        }
        if task.phases >= search.cap {
            return Err(SearchError::BudgetExceeded(search.cap));
        }
        search.trace(json!({"event": "label_phase", "node": task.node.0, "label": x}));
        let mut path = task.path.clone();
        if s.successors(x, RelKind::R).next().is_none() && s.successors(x, RelKind::S).next().is_none() {
            path.push(Visit {
                label: x,
                signature,
                node: task.node,
            });
        }
        let rule = label_step(&s, Some(x), &mut search.alloc).expect("pending label has a right modal");
        let next = search.expand(&task, rule, Mode::Expand(x), task.phases + 1, &path);
        stack.extend(next);
    }

    let graph = ProofGraph {
        nodes: search.nodes,
        root: root_id,
        back_edges: search.back_edges,
    };
    check_proof(&graph).map_err(SearchError::CheckerRejected)?;
    Ok(Verdict::Proved(graph))
}

/// Decides `=> x0:f`.
pub fn decide_formula(f: &Formula, config: &Config) -> Result<Verdict, SearchError> {
    decide(&Sequent::root(Label(0), f.clone()), config)
}
