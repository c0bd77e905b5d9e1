//! Labelled sequents over two sorts of relational atoms, and the saturation
//! predicates that drive proof search.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::calculus::RuleName;
use crate::formula::{Formula, ParseError};

/// A world label. Ids are handed out in creation order and never reused.
#[derive(Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Label(pub u32);

impl fmt::Display for Label {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "x{}", self.0)
    }
}

impl fmt::Debug for Label {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "x{}", self.0)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum SequentError {
    #[error("malformed label {0:?} (expected x<N>)")]
    BadLabel(String),
    #[error("malformed relation kind {0:?} (expected R or S)")]
    BadRelKind(String),
    #[error("formula {formula:?}: {source}")]
    Formula {
        formula: String,
        #[source]
        source: ParseError,
    },
}

impl FromStr for Label {
    type Err = SequentError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        s.strip_prefix('x')
            .filter(|digits| !digits.is_empty() && digits.bytes().all(|b| b.is_ascii_digit()))
            .and_then(|digits| digits.parse().ok())
            .map(Label)
            .ok_or_else(|| SequentError::BadLabel(s.to_string()))
    }
}

impl Serialize for Label {
    fn serialize<S: serde::Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        serializer.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for Label {
    fn deserialize<D: serde::Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        let text = String::deserialize(deserializer)?;
        text.parse().map_err(serde::de::Error::custom)
    }
}

/// Monotone supply of fresh labels.
#[derive(Debug, Clone)]
pub struct LabelAllocator {
    next: u32,
}

impl LabelAllocator {
    pub fn starting_at(next: u32) -> Self {
        LabelAllocator { next }
    }

    /// An allocator whose labels are all above those of `s`.
    pub fn above(s: &Sequent) -> Self {
        let next = s.labels_of().iter().map(|l| l.0 + 1).max().unwrap_or(0);
        LabelAllocator { next }
    }

    pub fn fresh(&mut self) -> Label {
        let l = Label(self.next);
        self.next += 1;
        l
    }

    pub fn peek(&self) -> Label {
        Label(self.next)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum RelKind {
    R,
    S,
}

impl fmt::Display for RelKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            RelKind::R => "R",
            RelKind::S => "S",
        })
    }
}

impl FromStr for RelKind {
    type Err = SequentError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "R" => Ok(RelKind::R),
            "S" => Ok(RelKind::S),
            _ => Err(SequentError::BadRelKind(s.to_string())),
        }
    }
}

/// `src R dst` or `src S dst`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct RelAtom {
    pub src: Label,
    pub kind: RelKind,
    pub dst: Label,
}

impl RelAtom {
    pub fn new(src: Label, kind: RelKind, dst: Label) -> Self {
        RelAtom { src, kind, dst }
    }
}

impl fmt::Display for RelAtom {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}{}{}", self.src, self.kind, self.dst)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct LabelledFormula {
    pub label: Label,
    pub formula: Formula,
}

impl LabelledFormula {
    pub fn new(label: Label, formula: Formula) -> Self {
        LabelledFormula { label, formula }
    }
}

impl fmt::Display for LabelledFormula {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}:{}", self.label, self.formula)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Side {
    Left,
    Right,
}

impl fmt::Display for Side {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Side::Left => "left",
            Side::Right => "right",
        })
    }
}

/// `rels, left => right`, with set semantics on all three components.
#[derive(Debug, Clone, Default, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(try_from = "SequentRepr", into = "SequentRepr")]
pub struct Sequent {
    pub rels: BTreeSet<RelAtom>,
    pub left: BTreeSet<LabelledFormula>,
    pub right: BTreeSet<LabelledFormula>,
}

impl Sequent {
    /// `=> x:f`
    pub fn root(label: Label, formula: Formula) -> Self {
        let mut s = Sequent::default();
        s.right.insert(LabelledFormula::new(label, formula));
        s
    }

    pub fn side(&self, side: Side) -> &BTreeSet<LabelledFormula> {
        match side {
            Side::Left => &self.left,
            Side::Right => &self.right,
        }
    }

    pub fn side_mut(&mut self, side: Side) -> &mut BTreeSet<LabelledFormula> {
        match side {
            Side::Left => &mut self.left,
            Side::Right => &mut self.right,
        }
    }

    pub fn contains(&self, side: Side, label: Label, formula: &Formula) -> bool {
        at_label(self.side(side), label).any(|lf| &lf.formula == formula)
    }

    /// Formulas attached to `label` on one side.
    pub fn formulas_at(&self, side: Side, label: Label) -> impl Iterator<Item = &Formula> + '_ {
        at_label(self.side(side), label).map(|lf| &lf.formula)
    }

    pub fn labels_of(&self) -> BTreeSet<Label> {
        labels_of(self)
    }

    /// All formulas of the sequent, ignoring labels.
    pub fn formulas(&self) -> impl Iterator<Item = &Formula> + '_ {
        self.left.iter().chain(self.right.iter()).map(|lf| &lf.formula)
    }

    /// Direct successors of `label` along atoms of the given kind.
    pub fn successors(&self, label: Label, kind: RelKind) -> impl Iterator<Item = Label> + '_ {
        self.rels
            .iter()
            .filter(move |r| r.src == label && r.kind == kind)
            .map(|r| r.dst)
    }

    /// True when `to` is reachable from `from` in one or more relational steps.
    pub fn reaches(&self, from: Label, to: Label) -> bool {
        let mut seen = BTreeSet::new();
        let mut stack = vec![from];
        while let Some(cur) = stack.pop() {
            for r in self.rels.iter().filter(|r| r.src == cur) {
                if r.dst == to {
                    return true;
                }
                if seen.insert(r.dst) {
                    stack.push(r.dst);
                }
            }
        }
        false
    }

    /// Applies a label renaming; labels outside the map are left alone.
    pub fn rename(&self, map: &BTreeMap<Label, Label>) -> Sequent {
        let r = |l: Label| map.get(&l).copied().unwrap_or(l);
        Sequent {
            rels: self
                .rels
                .iter()
                .map(|a| RelAtom::new(r(a.src), a.kind, r(a.dst)))
                .collect(),
            left: self
                .left
                .iter()
                .map(|lf| LabelledFormula::new(r(lf.label), lf.formula.clone()))
                .collect(),
            right: self
                .right
                .iter()
                .map(|lf| LabelledFormula::new(r(lf.label), lf.formula.clone()))
                .collect(),
        }
    }

    /// Componentwise inclusion.
    pub fn is_subsequent_of(&self, other: &Sequent) -> bool {
        self.rels.is_subset(&other.rels)
            && self.left.is_subset(&other.left)
            && self.right.is_subset(&other.right)
    }

    /// Labels carrying an unexpanded `[b]` or `[d]` on the right.
    pub fn pending_labels(&self) -> BTreeSet<Label> {
        self.right
            .iter()
            .filter(|lf| lf.formula.is_modal())
            .map(|lf| lf.label)
            .collect()
    }
}

/// Entries of `set` attached to `label`. `Formula::Bot` is the least formula,
/// so the range starts exactly at the first entry for `label`.
fn at_label(set: &BTreeSet<LabelledFormula>, label: Label) -> impl Iterator<Item = &LabelledFormula> + '_ {
    set.range(LabelledFormula::new(label, Formula::Bot)..)
        .take_while(move |lf| lf.label == label)
}

impl fmt::Display for Sequent {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut first = true;
        let mut sep = |f: &mut fmt::Formatter<'_>| -> fmt::Result {
            if !first {
                f.write_str(", ")?;
            }
            first = false;
            Ok(())
        };
        for r in &self.rels {
            sep(f)?;
            write!(f, "{r}")?;
        }
        for lf in &self.left {
            sep(f)?;
            write!(f, "{lf}")?;
        }
        f.write_str(if self.rels.is_empty() && self.left.is_empty() { "=>" } else { " =>" })?;
        let mut first = true;
        for lf in &self.right {
            f.write_str(if first { " " } else { ", " })?;
            first = false;
            write!(f, "{lf}")?;
        }
        Ok(())
    }
}

#[derive(Serialize, Deserialize)]
struct SequentRepr {
    rels: Vec<(String, String, String)>,
    left: Vec<(String, String)>,
    right: Vec<(String, String)>,
}

impl From<Sequent> for SequentRepr {
    fn from(s: Sequent) -> Self {
        let side = |set: &BTreeSet<LabelledFormula>| {
            set.iter()
                .map(|lf| (lf.label.to_string(), lf.formula.to_string()))
                .collect()
        };
        SequentRepr {
            rels: s
                .rels
                .iter()
                .map(|r| (r.src.to_string(), r.kind.to_string(), r.dst.to_string()))
                .collect(),
            left: side(&s.left),
            right: side(&s.right),
        }
    }
}

impl TryFrom<SequentRepr> for Sequent {
    type Error = SequentError;

    fn try_from(repr: SequentRepr) -> Result<Self, Self::Error> {
        let side = |items: Vec<(String, String)>| -> Result<BTreeSet<LabelledFormula>, SequentError> {
            items
                .into_iter()
                .map(|(label, text)| {
                    let formula = crate::formula::parse(&text).map_err(|source| {
                        SequentError::Formula {
                            formula: text.clone(),
                            source,
                        }
                    })?;
                    Ok(LabelledFormula::new(label.parse()?, formula))
                })
                .collect()
        };
        let rels = repr
            .rels
            .into_iter()
            .map(|(src, kind, dst)| Ok(RelAtom::new(src.parse()?, kind.parse()?, dst.parse()?)))
            .collect::<Result<_, SequentError>>()?;
        Ok(Sequent {
            rels,
            left: side(repr.left)?,
            right: side(repr.right)?,
        })
    }
}

// ---------------------------------------------------------------------------
// Operations

pub fn labels_of(s: &Sequent) -> BTreeSet<Label> {
    let mut out = BTreeSet::new();
    for r in &s.rels {
        out.insert(r.src);
        out.insert(r.dst);
    }
    out.extend(s.left.iter().map(|lf| lf.label));
    out.extend(s.right.iter().map(|lf| lf.label));
    out
}

/// Which axiom closes `s`, if any. `Bot` is preferred when both apply.
pub fn is_initial(s: &Sequent) -> Option<RuleName> {
    if s.left.iter().any(|lf| lf.formula == Formula::Bot) {
        return Some(RuleName::Bot);
    }
    let id = s
        .left
        .iter()
        .any(|lf| lf.formula.is_atomic() && s.right.contains(lf));
    id.then_some(RuleName::Id)
}

/// `x:f` is already false in the countermodel a saturated branch would
/// yield: it sits on the right, or its decomposition does.
///
/// Unlike plain membership this survives the deletion of principals by
/// `ImpR`, `ImpL`, `BoxR` and `TriR`, so it only ever grows along a branch.
pub fn falsified(s: &Sequent, x: Label, f: &Formula) -> bool {
    if s.contains(Side::Right, x, f) {
        return true;
    }
    match f {
        Formula::Bot => true,
        Formula::Atom(_) => false,
        Formula::Imp(a, b) => verified(s, x, a) && falsified(s, x, b),
        Formula::Box(a) => s.successors(x, RelKind::R).any(|y| falsified(s, y, a)),
        Formula::Tri(a) => s.successors(x, RelKind::S).any(|y| falsified(s, y, a)),
    }
}

/// Dual of [`falsified`]: `x:f` is on the left, or its decomposition is.
pub fn verified(s: &Sequent, x: Label, f: &Formula) -> bool {
    if s.contains(Side::Left, x, f) {
        return true;
    }
    match f {
        Formula::Imp(a, b) => falsified(s, x, a) || verified(s, x, b),
        _ => false,
    }
}

/// Whether the occurrence `occ` on `side` satisfies its saturation clause.
///
/// Implications and left modals are judged by [`falsified`]/[`verified`]
/// rather than by membership of their parts. Right-side modal occurrences
/// are never saturated here; they belong to the label phase.
pub fn formula_saturated(s: &Sequent, occ: &LabelledFormula, side: Side) -> bool {
    let x = occ.label;
    match (&occ.formula, side) {
        (Formula::Bot | Formula::Atom(_), _) => true,
        (Formula::Imp(a, b), Side::Left) => falsified(s, x, a) || verified(s, x, b),
        (Formula::Imp(a, b), Side::Right) => verified(s, x, a) && falsified(s, x, b),
        (Formula::Box(a), Side::Left) => s.successors(x, RelKind::R).all(|y| verified(s, y, a)),
        (Formula::Tri(a), Side::Left) => s.successors(x, RelKind::S).all(|y| verified(s, y, a)),
        (Formula::Box(_) | Formula::Tri(_), Side::Right) => false,
    }
}

/// Closed under composition: `x o y, y * z` implies `x * z`.
pub fn trans_saturated(s: &Sequent) -> bool {
    missing_trans(&s.rels).is_none()
}

/// First composable pair whose composite is absent, as (first, second, composite).
pub(crate) fn missing_trans(rels: &BTreeSet<RelAtom>) -> Option<(RelAtom, RelAtom, RelAtom)> {
    for first in rels {
        for second in rels.iter().filter(|r| r.src == first.dst) {
            let composite = RelAtom::new(first.src, second.kind, second.dst);
            if !rels.contains(&composite) {
                return Some((*first, *second, composite));
            }
        }
    }
    None
}

/// Least superset of `rels` closed under the four composition rules.
pub fn trans_closure(rels: &BTreeSet<RelAtom>) -> BTreeSet<RelAtom> {
    let mut out = rels.clone();
    loop {
        let mut added = Vec::new();
        for first in &out {
            for second in out.iter().filter(|r| r.src == first.dst) {
                let composite = RelAtom::new(first.src, second.kind, second.dst);
                if !out.contains(&composite) {
                    added.push(composite);
                }
            }
        }
        if added.is_empty() {
            return out;
        }
        out.extend(added);
    }
}

/// Every formula saturated and the relational atoms transitively closed.
pub fn is_saturated(s: &Sequent) -> bool {
    trans_saturated(s)
        && s.left.iter().all(|lf| formula_saturated(s, lf, Side::Left))
        && s.right
            .iter()
            .filter(|lf| !lf.formula.is_modal())
            .all(|lf| formula_saturated(s, lf, Side::Right))
}

/// No `[b]` or `[d]` left on the right-hand side.
pub fn is_label_saturated(s: &Sequent) -> bool {
    !s.right.iter().any(|lf| lf.formula.is_modal())
}

pub fn is_fully_saturated(s: &Sequent) -> bool {
    is_saturated(s) && is_label_saturated(s) && is_initial(s).is_none()
}
