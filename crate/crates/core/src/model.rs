//! Carlson models: a finite strict order with two distinguished subsets.
//!
//! `[b]A` holds at `w` when `A` holds at every successor of `w` in `m0`;
//! `[d]A` does the same over successors in `m1`.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt::Write as _;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::formula::Formula;
use crate::sequent::{is_fully_saturated, Label, RelKind, Sequent};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct WorldId(pub usize);

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "ModelRepr", into = "ModelRepr")]
pub struct CarlsonModel {
    /// World names, indexed by `WorldId`.
    pub worlds: Vec<String>,
    pub prec: BTreeSet<(WorldId, WorldId)>,
    pub m0: BTreeSet<WorldId>,
    pub m1: BTreeSet<WorldId>,
    pub valuation: BTreeMap<String, BTreeSet<WorldId>>,
}

/// Assignment of sequent labels to worlds.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Interpretation {
    pub assignment: BTreeMap<Label, WorldId>,
}

impl Interpretation {
    pub fn get(&self, label: Label) -> Option<WorldId> {
        self.assignment.get(&label).copied()
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ModelError {
    #[error("unknown world {0}")]
    UnknownWorld(String),
    #[error("duplicate world name {0:?}")]
    DuplicateWorld(String),
    #[error("prec is not irreflexive: {0} precedes itself")]
    Reflexive(String),
    #[error("prec is not transitive: {0} < {1} < {2} but not {0} < {2}")]
    NotTransitive(String, String, String),
    #[error("prec has a cycle through {0}")]
    Cyclic(String),
    #[error("sequent is not fully saturated")]
    NotFullySaturated,
}

impl CarlsonModel {
    pub fn world_count(&self) -> usize {
        self.worlds.len()
    }

    pub fn world_named(&self, name: &str) -> Option<WorldId> {
        self.worlds.iter().position(|w| w == name).map(WorldId)
    }

    fn name(&self, w: WorldId) -> String {
        self.worlds.get(w.0).cloned().unwrap_or_else(|| format!("#{}", w.0))
    }

    fn successor_lists(&self) -> Vec<Vec<usize>> {
        let mut succ = vec![Vec::new(); self.worlds.len()];
        for &(a, b) in &self.prec {
            if a.0 < succ.len() && b.0 < succ.len() {
                succ[a.0].push(b.0);
            }
        }
        succ
    }

    /// Truth value of `f` at every world.
    pub fn truth_table(&self, f: &Formula) -> Vec<bool> {
        let succ = self.successor_lists();
        self.table(f, &succ)
    }

    fn table(&self, f: &Formula, succ: &[Vec<usize>]) -> Vec<bool> {
        let n = self.worlds.len();
        match f {
            Formula::Bot => vec![false; n],
            Formula::Atom(name) => {
                let set = self.valuation.get(&**name);
                (0..n)
                    .map(|w| set.is_some_and(|s| s.contains(&WorldId(w))))
                    .collect()
            }
            Formula::Imp(a, b) => {
                let ta = self.table(a, succ);
                let tb = self.table(b, succ);
                ta.iter().zip(&tb).map(|(&x, &y)| !x || y).collect()
            }
            Formula::Box(a) | Formula::Tri(a) => {
                let subset = if matches!(f, Formula::Box(_)) { &self.m0 } else { &self.m1 };
                let ta = self.table(a, succ);
                (0..n)
                    .map(|w| {
                        succ[w]
                            .iter()
                            .all(|&v| !subset.contains(&WorldId(v)) || ta[v])
                    })
                    .collect()
            }
        }
    }

    fn eval(&self, w: WorldId, f: &Formula) -> bool {
        match f {
            Formula::Bot => false,
            Formula::Atom(name) => self.valuation.get(&**name).is_some_and(|s| s.contains(&w)),
            Formula::Imp(a, b) => !self.eval(w, a) || self.eval(w, b),
            Formula::Box(a) => self.modal_holds(w, &self.m0, a),
            Formula::Tri(a) => self.modal_holds(w, &self.m1, a),
        }
    }

    fn modal_holds(&self, w: WorldId, subset: &BTreeSet<WorldId>, body: &Formula) -> bool {
        self.prec
            .range((w, WorldId(0))..=(w, WorldId(usize::MAX)))
            .filter(|(_, v)| subset.contains(v))
            .all(|&(_, v)| self.eval(v, body))
    }

    /// Graphviz rendering: double circle for `m0`, diamond for `m1`, box for
    /// both; node labels list the atoms true there.
    pub fn to_dot(&self) -> String {
        let mut out = String::from("digraph carlson {\n  rankdir=BT;\n");
        for (i, name) in self.worlds.iter().enumerate() {
            let w = WorldId(i);
            let shape = match (self.m0.contains(&w), self.m1.contains(&w)) {
                (true, true) => "box",
                (true, false) => "doublecircle",
                (false, true) => "diamond",
                (false, false) => "circle",
            };
            let atoms: Vec<&str> = self
                .valuation
                .iter()
                .filter(|(_, ws)| ws.contains(&w))
                .map(|(p, _)| p.as_str())
                .collect();
            let label = if atoms.is_empty() {
                name.clone()
            } else {
                format!("{name}\\n{}", atoms.join(", "))
            };
            let _ = writeln!(out, "  \"{name}\" [shape={shape}, label=\"{label}\"];");
        }
        for &(a, b) in &self.prec {
            let _ = writeln!(out, "  \"{}\" -> \"{}\";", self.name(a), self.name(b));
        }
        out.push_str("}\n");
        out
    }
}

pub fn forces(m: &CarlsonModel, w: WorldId, f: &Formula) -> Result<bool, ModelError> {
    if w.0 >= m.worlds.len() {
        return Err(ModelError::UnknownWorld(format!("#{}", w.0)));
    }
    Ok(m.eval(w, f))
}

fn rel_ok(m: &CarlsonModel, kind: RelKind, a: WorldId, b: WorldId) -> bool {
    let subset = match kind {
        RelKind::R => &m.m0,
        RelKind::S => &m.m1,
    };
    m.prec.contains(&(a, b)) && subset.contains(&b)
}

pub fn is_interpretation(m: &CarlsonModel, s: &Sequent, i: &Interpretation) -> bool {
    s.rels.iter().all(|r| match (i.get(r.src), i.get(r.dst)) {
        (Some(a), Some(b)) => rel_ok(m, r.kind, a, b),
        _ => false,
    })
}

/// An interpretation under which every left formula holds and every right
/// formula fails, if one exists.
pub fn falsifying_interpretation(m: &CarlsonModel, s: &Sequent) -> Option<Interpretation> {
    let labels: Vec<Label> = s.labels_of().into_iter().collect();
    if m.worlds.is_empty() {
        return if labels.is_empty() { Some(Interpretation::default()) } else { None };
    }
    let succ = m.succ_cache();
    // per label: (truth tables of left formulas, truth tables of right formulas)
    let mut tables: BTreeMap<&Formula, Vec<bool>> = BTreeMap::new();
    for f in s.formulas() {
        if !tables.contains_key(f) {
            let t = m.table(f, &succ);
            tables.insert(f, t);
        }
    }
    let index: BTreeMap<Label, usize> = labels.iter().enumerate().map(|(i, l)| (*l, i)).collect();
    let mut must_hold = vec![Vec::new(); labels.len()];
    let mut must_fail = vec![Vec::new(); labels.len()];
    for lf in &s.left {
        must_hold[index[&lf.label]].push(&tables[&lf.formula]);
    }
    for lf in &s.right {
        must_fail[index[&lf.label]].push(&tables[&lf.formula]);
    }
    // constraints checked once both ends are assigned, i.e. at the later label
    let mut checks: Vec<Vec<(usize, RelKind, usize)>> = vec![Vec::new(); labels.len()];
    for r in &s.rels {
        let (a, b) = (index[&r.src], index[&r.dst]);
        checks[a.max(b)].push((a, r.kind, b));
    }
    let mut assignment = vec![0usize; labels.len()];
    let found = assign(m, 0, &mut assignment, &must_hold, &must_fail, &checks);
    found.then(|| Interpretation {
        assignment: labels
            .iter()
            .zip(&assignment)
            .map(|(l, w)| (*l, WorldId(*w)))
            .collect(),
    })
}

fn assign(
    m: &CarlsonModel,
    depth: usize,
    assignment: &mut Vec<usize>,
    must_hold: &[Vec<&Vec<bool>>],
    must_fail: &[Vec<&Vec<bool>>],
    checks: &[Vec<(usize, RelKind, usize)>],
) -> bool {
    if depth == assignment.len() {
        return true;
    }
    for w in 0..m.worlds.len() {
        if must_hold[depth].iter().any(|t| !t[w]) || must_fail[depth].iter().any(|t| t[w]) {
            continue;
        }
        assignment[depth] = w;
        let consistent = checks[depth].iter().all(|&(a, kind, b)| {
            rel_ok(m, kind, WorldId(assignment[a]), WorldId(assignment[b]))
        });
        if consistent && assign(m, depth + 1, assignment, must_hold, must_fail, checks) {
            return true;
        }
    }
    false
}

impl CarlsonModel {
    fn succ_cache(&self) -> Vec<Vec<usize>> {
        self.successor_lists()
    }
}

/// `s` is true on `m`: no interpretation makes all of the left true and all
/// of the right false.
pub fn sequent_holds(m: &CarlsonModel, s: &Sequent) -> bool {
    falsifying_interpretation(m, s).is_none()
}

/// Reads the countermodel off a fully saturated sequent. Worlds are the
/// labels; the returned interpretation is the identity.
pub fn extract_model(s: &Sequent) -> Result<(CarlsonModel, Interpretation), ModelError> {
    if !is_fully_saturated(s) {
        return Err(ModelError::NotFullySaturated);
    }
    let labels: Vec<Label> = s.labels_of().into_iter().collect();
    let id: BTreeMap<Label, WorldId> = labels.iter().enumerate().map(|(i, l)| (*l, WorldId(i))).collect();
    let mut model = CarlsonModel {
        worlds: labels.iter().map(|l| l.to_string()).collect(),
        prec: s.rels.iter().map(|r| (id[&r.src], id[&r.dst])).collect(),
        m0: s.rels.iter().filter(|r| r.kind == RelKind::R).map(|r| id[&r.dst]).collect(),
        m1: s.rels.iter().filter(|r| r.kind == RelKind::S).map(|r| id[&r.dst]).collect(),
        valuation: BTreeMap::new(),
    };
    for f in s.formulas() {
        for atom in f.atoms() {
            model.valuation.entry(atom.to_string()).or_default();
        }
    }
    for lf in &s.left {
        if let Formula::Atom(name) = &lf.formula {
            model
                .valuation
                .entry(name.to_string())
                .or_default()
                .insert(id[&lf.label]);
        }
    }
    Ok((model, Interpretation { assignment: id }))
}

pub fn validate_model(m: &CarlsonModel) -> Result<(), ModelError> {
    let n = m.worlds.len();
    let mut names = BTreeSet::new();
    for name in &m.worlds {
        if !names.insert(name) {
            return Err(ModelError::DuplicateWorld(name.clone()));
        }
    }
    let check = |w: WorldId| {
        if w.0 < n {
            Ok(())
        } else {
            Err(ModelError::UnknownWorld(format!("#{}", w.0)))
        }
    };
    for &(a, b) in &m.prec {
        check(a)?;
        check(b)?;
    }
    for &w in m.m0.iter().chain(&m.m1).chain(m.valuation.values().flatten()) {
        check(w)?;
    }
    for &(a, b) in &m.prec {
        if a == b {
            return Err(ModelError::Reflexive(m.name(a)));
        }
    }
    for &(a, b) in &m.prec {
        for &(_, c) in m.prec.range((b, WorldId(0))..=(b, WorldId(usize::MAX))) {
            if !m.prec.contains(&(a, c)) {
                return Err(ModelError::NotTransitive(m.name(a), m.name(b), m.name(c)));
            }
        }
    }
    // With transitivity and irreflexivity a cycle is already impossible;
    // this catches it independently.
    let succ = m.successor_lists();
    let mut state = vec![0u8; n];
    for start in 0..n {
        if let Some(w) = find_cycle(start, &succ, &mut state) {
            return Err(ModelError::Cyclic(m.name(WorldId(w))));
        }
    }
    Ok(())
}

fn find_cycle(w: usize, succ: &[Vec<usize>], state: &mut [u8]) -> Option<usize> {
    match state[w] {
        1 => return Some(w),
        2 => return None,
        _ => {}
    }
    state[w] = 1;
    for &v in &succ[w] {
        if let Some(c) = find_cycle(v, succ, state) {
            return Some(c);
        }
    }
    state[w] = 2;
    None
}

// ---------------------------------------------------------------------------
// Bounded semantic oracle

/// Strict partial orders on `n` labelled worlds as successor bitmasks, in
/// increasing order of their edge-set encoding.
pub fn strict_orders(n: usize) -> Vec<Vec<u32>> {
    let pairs: Vec<(usize, usize)> = (0..n)
        .flat_map(|i| (0..n).filter(move |&j| j != i).map(move |j| (i, j)))
        .collect();
    let mut out = Vec::new();
    for code in 0u64..(1u64 << pairs.len()) {
        let mut succ = vec![0u32; n];
        for (bit, &(i, j)) in pairs.iter().enumerate() {
            if code >> bit & 1 == 1 {
                succ[i] |= 1 << j;
            }
        }
        let transitive = (0..n).all(|i| {
            (0..n)
                .filter(|&j| succ[i] >> j & 1 == 1)
                .all(|j| succ[j] & !succ[i] == 0)
        });
        let irreflexive = (0..n).all(|i| succ[i] >> i & 1 == 0);
        if transitive && irreflexive {
            out.push(succ);
        }
    }
    out
}

struct BitFrame<'a> {
    succ: &'a [u32],
    m0: u32,
    m1: u32,
    atoms: &'a BTreeMap<&'a str, u32>,
}

fn eval_bits(frame: &BitFrame<'_>, f: &Formula, all: u32) -> u32 {
    match f {
        Formula::Bot => 0,
        Formula::Atom(name) => frame.atoms[&**name],
        Formula::Imp(a, b) => (!eval_bits(frame, a, all) | eval_bits(frame, b, all)) & all,
        Formula::Box(a) | Formula::Tri(a) => {
            let subset = if matches!(f, Formula::Box(_)) { frame.m0 } else { frame.m1 };
            let bad = subset & !eval_bits(frame, a, all);
            let mut out = 0;
            for (w, &s) in frame.succ.iter().enumerate() {
                if s & bad == 0 {
                    out |= 1 << w;
                }
            }
            out
        }
    }
}

/// Searches every Carlson model with at most `max_worlds` worlds for one
/// that falsifies `f`, smallest models first. The witness is the first in a
/// fixed enumeration order, so results are deterministic.
pub fn refute_semantic(f: &Formula, max_worlds: usize) -> Option<(CarlsonModel, WorldId)> {
    assert!(max_worlds >= 1, "max_worlds must be positive");
    assert!(max_worlds <= 5, "enumeration beyond 5 worlds is not supported");
    let atoms: Vec<String> = f.atoms().iter().map(|a| a.to_string()).collect();
    for n in 1..=max_worlds {
        let all: u32 = (1 << n) - 1;
        let subsets = 1u32 << n;
        for succ in strict_orders(n) {
            for m0 in 0..subsets {
                for m1 in 0..subsets {
                    let combos = 1u64 << (n * atoms.len());
                    for code in 0..combos {
                        let mut table = BTreeMap::new();
                        for (k, a) in atoms.iter().enumerate() {
                            table.insert(a.as_str(), ((code >> (k * n)) as u32) & all);
                        }
                        let frame = BitFrame {
                            succ: &succ,
                            m0,
                            m1,
                            atoms: &table,
                        };
                        let truth = eval_bits(&frame, f, all);
                        if truth != all {
                            let w = (!truth & all).trailing_zeros() as usize;
                            return Some((bits_to_model(n, &succ, m0, m1, &table), WorldId(w)));
                        }
                    }
                }
            }
        }
    }
    None
}

fn bits_to_model(n: usize, succ: &[u32], m0: u32, m1: u32, atoms: &BTreeMap<&str, u32>) -> CarlsonModel {
    let set = |mask: u32| (0..n).filter(|w| mask >> w & 1 == 1).map(WorldId).collect();
    CarlsonModel {
        worlds: (0..n).map(|w| format!("w{w}")).collect(),
        prec: (0..n)
            .flat_map(|i| (0..n).filter(move |j| succ[i] >> j & 1 == 1).map(move |j| (WorldId(i), WorldId(j))))
            .collect(),
        m0: set(m0),
        m1: set(m1),
        valuation: atoms.iter().map(|(a, &mask)| (a.to_string(), set(mask))).collect(),
    }
}

/// Every Carlson model with at most `max_worlds` worlds whose valuation
/// ranges over `atoms` (and is empty elsewhere).
pub fn all_models(atoms: &[&str], max_worlds: usize) -> Vec<CarlsonModel> {
    let mut out = Vec::new();
    for n in 1..=max_worlds {
        let all: u32 = (1 << n) - 1;
        let subsets = 1u32 << n;
        for succ in strict_orders(n) {
            for m0 in 0..subsets {
                for m1 in 0..subsets {
                    for code in 0..(1u64 << (n * atoms.len())) {
                        let table: BTreeMap<&str, u32> = atoms
                            .iter()
                            .enumerate()
                            .map(|(k, a)| (*a, ((code >> (k * n)) as u32) & all))
                            .collect();
                        out.push(bits_to_model(n, &succ, m0, m1, &table));
                    }
                }
            }
        }
    }
    out
}

// ---------------------------------------------------------------------------
// JSON

#[derive(Serialize, Deserialize)]
struct ModelRepr {
    worlds: Vec<String>,
    prec: Vec<(String, String)>,
    m0: Vec<String>,
    m1: Vec<String>,
    valuation: BTreeMap<String, Vec<String>>,
}

impl From<CarlsonModel> for ModelRepr {
    fn from(m: CarlsonModel) -> Self {
        let names = |set: &BTreeSet<WorldId>| set.iter().map(|w| m.name(*w)).collect();
        ModelRepr {
            prec: m.prec.iter().map(|&(a, b)| (m.name(a), m.name(b))).collect(),
            m0: names(&m.m0),
            m1: names(&m.m1),
            valuation: m.valuation.iter().map(|(p, ws)| (p.clone(), names(ws))).collect(),
            worlds: m.worlds.clone(),
        }
    }
}

impl TryFrom<ModelRepr> for CarlsonModel {
    type Error = ModelError;

    fn try_from(r: ModelRepr) -> Result<Self, Self::Error> {
        let mut index = BTreeMap::new();
        for (i, name) in r.worlds.iter().enumerate() {
            if index.insert(name.clone(), WorldId(i)).is_some() {
                return Err(ModelError::DuplicateWorld(name.clone()));
            }
        }
        let look = |name: &String| {
            index
                .get(name)
                .copied()
                .ok_or_else(|| ModelError::UnknownWorld(name.clone()))
        };
        let set = |names: &Vec<String>| names.iter().map(look).collect::<Result<BTreeSet<_>, _>>();
        Ok(CarlsonModel {
            prec: r
                .prec
                .iter()
                .map(|(a, b)| Ok((look(a)?, look(b)?)))
                .collect::<Result<_, ModelError>>()?,
            m0: set(&r.m0)?,
            m1: set(&r.m1)?,
            valuation: r
                .valuation
                .iter()
                .map(|(p, ws)| Ok((p.clone(), set(ws)?)))
                .collect::<Result<_, ModelError>>()?,
            worlds: r.worlds,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::formula::parse;
    use crate::sequent::{LabelledFormula, RelAtom};

    fn w(i: usize) -> WorldId {
        WorldId(i)
    }

    fn two_world() -> CarlsonModel {
        // w0 < w1, w1 in m0 only, p false everywhere
        CarlsonModel {
            worlds: vec!["w0".into(), "w1".into()],
            prec: [(w(0), w(1))].into_iter().collect(),
            m0: [w(1)].into_iter().collect(),
            m1: BTreeSet::new(),
            valuation: [("p".to_string(), BTreeSet::new())].into_iter().collect(),
        }
    }

    fn chain3() -> CarlsonModel {
        CarlsonModel {
            worlds: vec!["a".into(), "b".into(), "c".into()],
            prec: [(w(0), w(1)), (w(1), w(2)), (w(0), w(2))].into_iter().collect(),
            m0: [w(2)].into_iter().collect(),
            m1: [w(1)].into_iter().collect(),
            valuation: BTreeMap::new(),
        }
    }

    fn lf(n: u32, text: &str) -> LabelledFormula {
        LabelledFormula::new(Label(n), parse(text).unwrap())
    }

    #[test]
    fn forcing_examples() {
        let m = two_world();
        for world in 0..2 {
            assert!(!forces(&m, w(world), &Formula::Bot).unwrap());
        }
        assert!(forces(&m, w(1), &parse("[b]bot").unwrap()).unwrap());
        assert!(forces(&m, w(1), &parse("[d]bot").unwrap()).unwrap());
        assert!(forces(&m, w(0), &parse("[d]p").unwrap()).unwrap());
        assert!(!forces(&m, w(0), &parse("[b]p").unwrap()).unwrap());
        assert!(forces(&m, w(5), &Formula::Bot).is_err());
    }

    #[test]
    fn truth_table_agrees_with_forces() {
        let m = chain3();
        for text in ["[b]p -> [d][b]p", "[d](p -> [b]bot)", "[b][b]bot"] {
            let f = parse(text).unwrap();
            let table = m.truth_table(&f);
            for (i, &t) in table.iter().enumerate() {
                assert_eq!(t, forces(&m, w(i), &f).unwrap(), "{text} at {i}");
            }
        }
    }

    #[test]
    fn interpretation_examples() {
        let m = chain3();
        let empty = Sequent::default();
        assert!(is_interpretation(&m, &empty, &Interpretation::default()));

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
        let chain = Interpretation {
            assignment: [(Label(0), w(0)), (Label(1), w(1)), (Label(2), w(2))].into_iter().collect(),
        };
        assert!(is_interpretation(&m, &s, &chain));

        let flat = CarlsonModel {
            prec: BTreeSet::new(),
            ..chain3()
        };
        let xry = Sequent {
            rels: [RelAtom::new(Label(0), RelKind::R, Label(1))].into_iter().collect(),
            ..Sequent::default()
        };
        for a in 0..3 {
            for b in 0..3 {
                let i = Interpretation {
                    assignment: [(Label(0), w(a)), (Label(1), w(b))].into_iter().collect(),
                };
                assert!(!is_interpretation(&flat, &xry, &i));
            }
        }
    }

    #[test]
    fn sequent_truth_examples() {
        let everywhere = CarlsonModel {
            valuation: [("p".to_string(), [w(0), w(1)].into_iter().collect())].into_iter().collect(),
            ..two_world()
        };
        let s = Sequent::root(Label(0), parse("p").unwrap());
        assert!(sequent_holds(&everywhere, &s));
        let id = Sequent {
            left: [lf(0, "p")].into_iter().collect(),
            right: [lf(0, "p")].into_iter().collect(),
            ..Sequent::default()
        };
        for m in all_models(&["p"], 2) {
            assert!(sequent_holds(&m, &id));
        }
    }

    #[test]
    fn extraction_examples() {
        let s = Sequent {
            rels: [RelAtom::new(Label(0), RelKind::R, Label(1))].into_iter().collect(),
            left: [lf(0, "[b]p"), lf(1, "p")].into_iter().collect(),
            right: [lf(1, "q")].into_iter().collect(),
        };
        let (m, i) = extract_model(&s).unwrap();
        assert_eq!(m.worlds, vec!["x0", "x1"]);
        assert_eq!(m.prec, [(w(0), w(1))].into_iter().collect());
        assert_eq!(m.m0, [w(1)].into_iter().collect());
        assert!(m.m1.is_empty());
        assert_eq!(m.valuation["p"], [w(1)].into_iter().collect());
        assert!(m.valuation["q"].is_empty());
        assert_eq!(i.get(Label(1)), Some(w(1)));
        assert!(!sequent_holds(&m, &s));

        let flat = Sequent {
            left: [lf(0, "p")].into_iter().collect(),
            right: [lf(0, "q")].into_iter().collect(),
            ..Sequent::default()
        };
        let (m, _) = extract_model(&flat).unwrap();
        assert_eq!(m.world_count(), 1);
        assert!(forces(&m, w(0), &parse("p").unwrap()).unwrap());
        assert!(!forces(&m, w(0), &parse("q").unwrap()).unwrap());

        let tri = Sequent {
            rels: [RelAtom::new(Label(0), RelKind::S, Label(1))].into_iter().collect(),
            left: [lf(0, "[d]p"), lf(1, "p")].into_iter().collect(),
            right: [lf(0, "p")].into_iter().collect(),
        };
        let (m, i) = extract_model(&tri).unwrap();
        assert_eq!(m.m1, [w(1)].into_iter().collect());
        assert_eq!(m.valuation["p"], [w(1)].into_iter().collect());
        assert!(!forces(&m, i.get(Label(0)).unwrap(), &parse("p").unwrap()).unwrap());
        assert!(!sequent_holds(&m, &tri));

        let open = Sequent::root(Label(0), parse("[b]p").unwrap());
        assert_eq!(extract_model(&open), Err(ModelError::NotFullySaturated));
    }

    #[test]
    fn oracle_examples() {
        for bound in 1..=3 {
            assert!(refute_semantic(&parse("p -> p").unwrap(), bound).is_none());
        }
        let (m, root) = refute_semantic(&parse("[d]p -> [b]p").unwrap(), 3).unwrap();
        assert_eq!(m.world_count(), 2);
        assert!(!forces(&m, root, &parse("[d]p -> [b]p").unwrap()).unwrap());
        validate_model(&m).unwrap();
        assert!(refute_semantic(&parse("[b]p -> [d][b]p").unwrap(), 3).is_none());
    }

    #[test]
    fn counts_strict_orders() {
        // labelled posets on 1..4 points
        let counts: Vec<usize> = (1..=4).map(|n| strict_orders(n).len()).collect();
        assert_eq!(counts, vec![1, 3, 19, 219]);
    }

    #[test]
    fn validation_examples() {
        validate_model(&chain3()).unwrap();
        let reflexive = CarlsonModel {
            prec: [(w(0), w(0))].into_iter().collect(),
            ..chain3()
        };
        assert!(matches!(validate_model(&reflexive), Err(ModelError::Reflexive(_))));
        let gap = CarlsonModel {
            prec: [(w(0), w(1)), (w(1), w(2))].into_iter().collect(),
            ..chain3()
        };
        assert!(matches!(validate_model(&gap), Err(ModelError::NotTransitive(..))));
        let stray = CarlsonModel {
            m0: [w(7)].into_iter().collect(),
            ..chain3()
        };
        assert!(matches!(validate_model(&stray), Err(ModelError::UnknownWorld(_))));
    }

    #[test]
    fn json_and_dot() {
        let m = two_world();
        let json = serde_json::to_string(&m).unwrap();
        assert_eq!(
            json,
            r#"{"worlds":["w0","w1"],"prec":[["w0","w1"]],"m0":["w1"],"m1":[],"valuation":{"p":[]}}"#
        );
        assert_eq!(serde_json::from_str::<CarlsonModel>(&json).unwrap(), m);
        assert!(serde_json::from_str::<CarlsonModel>(
            r#"{"worlds":["a"],"prec":[["a","b"]],"m0":[],"m1":[],"valuation":{}}"#
        )
        .is_err());
        let dot = m.to_dot();
        assert!(dot.contains("\"w1\" [shape=doublecircle"));
        assert!(dot.contains("\"w0\" -> \"w1\";"));
    }
}
