//! The rules of the labelled calculus as applicability checks and premise
//! generators.
//!
//! | rule        | principal                 | premises |
//! |-------------|---------------------------|----------|
//! | `Id`, `Bot` | `x:p` / `x:bot` on the left | 0      |
//! | `ImpR`      | `x:A->B` right            | 1        |
//! | `ImpL`      | `x:A->B` left             | 2        |
//! | `BoxR`/`TriR` | `x:[b]A` / `x:[d]A` right | 1, with a fresh label |
//! | `BoxL`/`TriL` | `x:[b]A` left plus `xRy` (`xSy`) | 1  |
//! | `Trans(o, *)` | `x o y`, `y * z`        | 1        |

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Deserializer, Serialize, Serializer};
use thiserror::Error;

use crate::formula::Formula;
use crate::sequent::{
    formula_saturated, is_initial, verified, Label, LabelAllocator, LabelledFormula, RelAtom, RelKind,
    Sequent, Side,
};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum RuleName {
    Id,
    Bot,
    ImpR,
    ImpL,
    BoxR,
    BoxL,
    TriR,
    TriL,
    /// Composition of `x first y` and `y second z` into `x second z`.
    Trans(RelKind, RelKind),
}

impl RuleName {
    pub const ALL: [RuleName; 12] = [
        RuleName::Id,
        RuleName::Bot,
        RuleName::ImpR,
        RuleName::ImpL,
        RuleName::BoxR,
        RuleName::BoxL,
        RuleName::TriR,
        RuleName::TriL,
        RuleName::Trans(RelKind::R, RelKind::R),
        RuleName::Trans(RelKind::R, RelKind::S),
        RuleName::Trans(RelKind::S, RelKind::R),
        RuleName::Trans(RelKind::S, RelKind::S),
    ];

    pub fn premise_count(self) -> usize {
        match self {
            RuleName::Id | RuleName::Bot => 0,
            RuleName::ImpL => 2,
            _ => 1,
        }
    }

    /// `BoxR` and `TriR`, the rules that introduce a label.
    pub fn is_label_rule(self) -> bool {
        matches!(self, RuleName::BoxR | RuleName::TriR)
    }
}

impl fmt::Display for RuleName {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            RuleName::Id => f.write_str("Id"),
            RuleName::Bot => f.write_str("Bot"),
            RuleName::ImpR => f.write_str("ImpR"),
            RuleName::ImpL => f.write_str("ImpL"),
            RuleName::BoxR => f.write_str("BoxR"),
            RuleName::BoxL => f.write_str("BoxL"),
            RuleName::TriR => f.write_str("TriR"),
            RuleName::TriL => f.write_str("TriL"),
            RuleName::Trans(a, b) => write!(f, "Trans{a}{b}"),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("unknown rule name {0:?}")]
pub struct UnknownRule(pub String);

impl FromStr for RuleName {
    type Err = UnknownRule;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        RuleName::ALL
            .into_iter()
            .find(|r| r.to_string() == s)
            .ok_or_else(|| UnknownRule(s.to_string()))
    }
}

impl Serialize for RuleName {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        serializer.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for RuleName {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        let text = String::deserialize(deserializer)?;
        text.parse().map_err(serde::de::Error::custom)
    }
}

/// The principal occurrence(s) of a rule application.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(try_from = "PrincipalRepr", into = "PrincipalRepr")]
pub enum Principal {
    /// A single labelled formula: `Id`, `Bot`, `ImpR`, `ImpL`, `BoxR`, `TriR`.
    Formula { occ: LabelledFormula, side: Side },
    /// A left `[b]`/`[d]` formula paired with the relational atom it is pushed along.
    Modal { occ: LabelledFormula, rel: RelAtom },
    /// The two composable atoms of a `Trans` step.
    Relational { first: RelAtom, second: RelAtom },
}

impl Principal {
    pub fn formula(occ: LabelledFormula, side: Side) -> Self {
        Principal::Formula { occ, side }
    }

    /// Label of the principal formula, or the source of the first atom.
    pub fn label(&self) -> Label {
        match self {
            Principal::Formula { occ, .. } | Principal::Modal { occ, .. } => occ.label,
            Principal::Relational { first, .. } => first.src,
        }
    }
}

impl fmt::Display for Principal {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Principal::Formula { occ, side } => write!(f, "{occ} ({side})"),
            Principal::Modal { occ, rel } => write!(f, "{occ} along {rel}"),
            Principal::Relational { first, second } => write!(f, "{first}, {second}"),
        }
    }
}

type RelRepr = (Label, RelKind, Label);

#[derive(Serialize, Deserialize)]
struct PrincipalRepr {
    #[serde(skip_serializing_if = "Option::is_none", default)]
    label: Option<Label>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    formula: Option<Formula>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    side: Option<Side>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    rel: Option<RelRepr>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    rels: Option<(RelRepr, RelRepr)>,
}

fn rel_repr(r: RelAtom) -> RelRepr {
    (r.src, r.kind, r.dst)
}

fn rel_from(r: RelRepr) -> RelAtom {
    RelAtom::new(r.0, r.1, r.2)
}

impl From<Principal> for PrincipalRepr {
    fn from(p: Principal) -> Self {
        let empty = PrincipalRepr {
            label: None,
            formula: None,
            side: None,
            rel: None,
            rels: None,
        };
        match p {
            Principal::Formula { occ, side } => PrincipalRepr {
                label: Some(occ.label),
                formula: Some(occ.formula),
                side: Some(side),
                ..empty
            },
            Principal::Modal { occ, rel } => PrincipalRepr {
                label: Some(occ.label),
                formula: Some(occ.formula),
                side: Some(Side::Left),
                rel: Some(rel_repr(rel)),
                ..empty
            },
            Principal::Relational { first, second } => PrincipalRepr {
                rels: Some((rel_repr(first), rel_repr(second))),
                ..empty
            },
        }
    }
}

impl TryFrom<PrincipalRepr> for Principal {
    type Error = String;

    fn try_from(r: PrincipalRepr) -> Result<Self, Self::Error> {
        match r {
            PrincipalRepr {
                rels: Some((a, b)),
                label: None,
                formula: None,
                rel: None,
                ..
            } => Ok(Principal::Relational {
                first: rel_from(a),
                second: rel_from(b),
            }),
            PrincipalRepr {
                label: Some(label),
                formula: Some(formula),
                side,
                rel: Some(rel),
                rels: None,
            } if side != Some(Side::Right) => Ok(Principal::Modal {
                occ: LabelledFormula::new(label, formula),
                rel: rel_from(rel),
            }),
            PrincipalRepr {
                label: Some(label),
                formula: Some(formula),
                side: Some(side),
                rel: None,
                rels: None,
            } => Ok(Principal::Formula {
                occ: LabelledFormula::new(label, formula),
                side,
            }),
            _ => Err("principal must be a labelled formula with a side, \
                      a left formula with `rel`, or a pair of `rels`"
                .into()),
        }
    }
}

/// One inference: conclusion, principal, optional fresh label, premises.
///
/// The conclusion is not serialized; inside a proof graph it is the
/// sequent of the node carrying the rule.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct RuleInstance {
    #[serde(rename = "rule")]
    pub name: RuleName,
    #[serde(skip)]
    pub conclusion: Sequent,
    pub principal: Principal,
    pub fresh: Option<Label>,
    pub premises: Vec<Sequent>,
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum RuleError {
    #[error("{rule} is not applicable at {principal}")]
    NotApplicable { rule: RuleName, principal: String },
    #[error("principal {0} does not occur in the sequent")]
    StalePrincipal(String),
    #[error("label {0} is not fresh for the conclusion")]
    NotFresh(Label),
}

fn lf(label: Label, formula: &Formula) -> LabelledFormula {
    LabelledFormula::new(label, formula.clone())
}

/// Every (rule, principal) whose pattern matches `s` and whose premise would
/// add something new. `Id`/`Bot` are listed whenever they match.
pub fn applicable(s: &Sequent) -> Vec<(RuleName, Principal)> {
    let mut out = Vec::new();
    for occ in &s.left {
        match &occ.formula {
            Formula::Bot => out.push((RuleName::Bot, Principal::formula(occ.clone(), Side::Left))),
            Formula::Atom(_) if s.right.contains(occ) => {
                out.push((RuleName::Id, Principal::formula(occ.clone(), Side::Left)))
            }
            _ => {}
        }
    }
    for first in &s.rels {
        for second in s.rels.iter().filter(|r| r.src == first.dst) {
            let composite = RelAtom::new(first.src, second.kind, second.dst);
            if !s.rels.contains(&composite) {
                out.push((
                    RuleName::Trans(first.kind, second.kind),
                    Principal::Relational {
                        first: *first,
                        second: *second,
                    },
                ));
            }
        }
    }
    for occ in &s.left {
        let (name, kind, body) = match &occ.formula {
            Formula::Box(b) => (RuleName::BoxL, RelKind::R, b),
            Formula::Tri(b) => (RuleName::TriL, RelKind::S, b),
            _ => continue,
        };
        for y in s.successors(occ.label, kind) {
            if !verified(s, y, body) {
                let rel = RelAtom::new(occ.label, kind, y);
                out.push((name, Principal::Modal { occ: occ.clone(), rel }));
            }
        }
    }
    for occ in &s.right {
        if matches!(occ.formula, Formula::Imp(..)) && !formula_saturated(s, occ, Side::Right) {
            out.push((RuleName::ImpR, Principal::formula(occ.clone(), Side::Right)));
        }
    }
    for occ in &s.left {
        if matches!(occ.formula, Formula::Imp(..)) && !formula_saturated(s, occ, Side::Left) {
            out.push((RuleName::ImpL, Principal::formula(occ.clone(), Side::Left)));
        }
    }
    for occ in &s.right {
        match occ.formula {
            Formula::Box(_) => out.push((RuleName::BoxR, Principal::formula(occ.clone(), Side::Right))),
            Formula::Tri(_) => out.push((RuleName::TriR, Principal::formula(occ.clone(), Side::Right))),
            _ => {}
        }
    }
    out
}

/// Applies `name` at `principal`, drawing a fresh label from `alloc` for
/// `BoxR`/`TriR`. Premises follow the rule shapes exactly.
pub fn apply(
    s: &Sequent,
    name: RuleName,
    principal: &Principal,
    alloc: &mut LabelAllocator,
) -> Result<RuleInstance, RuleError> {
    let not_applicable = || RuleError::NotApplicable {
        rule: name,
        principal: principal.to_string(),
    };
    let mut fresh = None;
    let premises = match (name, principal) {
        (RuleName::Id | RuleName::Bot, Principal::Formula { occ, side: Side::Left }) => {
            require_left(s, occ)?;
            match (name, &occ.formula) {
                (RuleName::Bot, Formula::Bot) => {}
                (RuleName::Id, Formula::Atom(_)) if s.right.contains(occ) => {}
                _ => return Err(not_applicable()),
            }
            Vec::new()
        }
        (RuleName::ImpR, Principal::Formula { occ, side: Side::Right }) => {
            let Formula::Imp(a, b) = &occ.formula else {
                return Err(not_applicable());
            };
            if !s.right.contains(occ) {
                return Err(RuleError::StalePrincipal(occ.to_string()));
            }
            if formula_saturated(s, occ, Side::Right) {
                return Err(not_applicable());
            }
            let mut p = s.clone();
            p.right.remove(occ);
            p.left.insert(lf(occ.label, a));
            p.right.insert(lf(occ.label, b));
            vec![p]
        }
        (RuleName::ImpL, Principal::Formula { occ, side: Side::Left }) => {
            let Formula::Imp(a, b) = &occ.formula else {
                return Err(not_applicable());
            };
            require_left(s, occ)?;
            if formula_saturated(s, occ, Side::Left) {
                return Err(not_applicable());
            }
            let mut ctx = s.clone();
            ctx.left.remove(occ);
            let mut first = ctx.clone();
            first.right.insert(lf(occ.label, a));
            let mut second = ctx;
            second.left.insert(lf(occ.label, b));
            vec![first, second]
        }
        (RuleName::BoxR | RuleName::TriR, Principal::Formula { occ, side: Side::Right }) => {
            let (kind, body) = match (name, &occ.formula) {
                (RuleName::BoxR, Formula::Box(b)) => (RelKind::R, b),
                (RuleName::TriR, Formula::Tri(b)) => (RelKind::S, b),
                _ => return Err(not_applicable()),
            };
            if !s.right.contains(occ) {
                return Err(RuleError::StalePrincipal(occ.to_string()));
            }
            let y = alloc.fresh();
            if s.labels_of().contains(&y) {
                return Err(RuleError::NotFresh(y));
            }
            fresh = Some(y);
            let mut p = s.clone();
            p.right.remove(occ);
            p.rels.insert(RelAtom::new(occ.label, kind, y));
            p.right.insert(lf(y, body));
            vec![p]
        }
        (RuleName::BoxL | RuleName::TriL, Principal::Modal { occ, rel }) => {
            let (kind, body) = match (name, &occ.formula) {
                (RuleName::BoxL, Formula::Box(b)) => (RelKind::R, b),
                (RuleName::TriL, Formula::Tri(b)) => (RelKind::S, b),
                _ => return Err(not_applicable()),
            };
            require_left(s, occ)?;
            if rel.src != occ.label || rel.kind != kind {
                return Err(not_applicable());
            }
            if !s.rels.contains(rel) {
                return Err(RuleError::StalePrincipal(rel.to_string()));
            }
            if s.contains(Side::Left, rel.dst, body) {
                return Err(not_applicable());
            }
            let mut p = s.clone();
            p.left.insert(lf(rel.dst, body));
            vec![p]
        }
        (RuleName::Trans(k1, k2), Principal::Relational { first, second }) => {
            if first.kind != k1 || second.kind != k2 || first.dst != second.src {
                return Err(not_applicable());
            }
            for r in [first, second] {
                if !s.rels.contains(r) {
                    return Err(RuleError::StalePrincipal(r.to_string()));
                }
            }
            let composite = RelAtom::new(first.src, k2, second.dst);
            if s.rels.contains(&composite) {
                return Err(not_applicable());
            }
            let mut p = s.clone();
            p.rels.insert(composite);
            vec![p]
        }
        _ => return Err(not_applicable()),
    };
    Ok(RuleInstance {
        name,
        conclusion: s.clone(),
        principal: principal.clone(),
        fresh,
        premises,
    })
}

fn require_left(s: &Sequent, occ: &LabelledFormula) -> Result<(), RuleError> {
    if s.left.contains(occ) {
        Ok(())
    } else {
        Err(RuleError::StalePrincipal(occ.to_string()))
    }
}

/// Closes `s` with `Id` or `Bot` when possible.
pub fn close(s: &Sequent) -> Option<RuleInstance> {
    let name = is_initial(s)?;
    let occ = match name {
        RuleName::Bot => s.left.iter().find(|lf| lf.formula == Formula::Bot)?,
        _ => s
            .left
            .iter()
            .find(|lf| lf.formula.is_atomic() && s.right.contains(*lf))?,
    };
    Some(RuleInstance {
        name,
        conclusion: s.clone(),
        principal: Principal::formula(occ.clone(), Side::Left),
        fresh: None,
        premises: Vec::new(),
    })
}

/// One step of a trace from conclusion `s1` (label `x1`) to a premise (label `x2`).
pub fn trace_step(s1: &Sequent, _premise: &Sequent, x1: Label, x2: Label) -> bool {
    x1 == x2
        || s1.rels.contains(&RelAtom::new(x1, RelKind::R, x2))
        || s1.rels.contains(&RelAtom::new(x1, RelKind::S, x2))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::formula::parse;
    use crate::sequent::is_fully_saturated;
    use RelKind::{R, S};

    fn x(n: u32) -> Label {
        Label(n)
    }

    fn lf(n: u32, text: &str) -> LabelledFormula {
        LabelledFormula::new(x(n), parse(text).unwrap())
    }

    fn rel(a: u32, k: RelKind, b: u32) -> RelAtom {
        RelAtom::new(x(a), k, x(b))
    }

    fn seq(rels: &[RelAtom], left: &[LabelledFormula], right: &[LabelledFormula]) -> Sequent {
        Sequent {
            rels: rels.iter().copied().collect(),
            left: left.iter().cloned().collect(),
            right: right.iter().cloned().collect(),
        }
    }

    #[test]
    fn applicable_examples() {
        let s = seq(&[rel(0, R, 1)], &[lf(0, "[b]p")], &[]);
        assert_eq!(
            applicable(&s),
            vec![(
                RuleName::BoxL,
                Principal::Modal {
                    occ: lf(0, "[b]p"),
                    rel: rel(0, R, 1)
                }
            )]
        );
        let s = seq(&[], &[], &[lf(0, "[b]p")]);
        assert_eq!(
            applicable(&s),
            vec![(RuleName::BoxR, Principal::formula(lf(0, "[b]p"), Side::Right))]
        );
        let s = seq(&[rel(0, R, 1)], &[lf(0, "[b]p"), lf(1, "p")], &[lf(1, "q")]);
        assert!(is_fully_saturated(&s));
        assert!(applicable(&s).is_empty());
    }

    #[test]
    fn figure_three_steps() {
        let root = seq(&[], &[], &[lf(0, "[b]([b]p -> p) -> [d][b]p")]);
        let mut alloc = LabelAllocator::above(&root);
        let (name, principal) = applicable(&root).remove(0);
        assert_eq!(name, RuleName::ImpR);
        let step = apply(&root, name, &principal, &mut alloc).unwrap();
        let after_imp = seq(&[], &[lf(0, "[b]([b]p -> p)")], &[lf(0, "[d][b]p")]);
        assert_eq!(step.premises, vec![after_imp.clone()]);

        let principal = Principal::formula(lf(0, "[d][b]p"), Side::Right);
        let step = apply(&after_imp, RuleName::TriR, &principal, &mut alloc).unwrap();
        assert_eq!(step.fresh, Some(x(1)));
        assert_eq!(
            step.premises,
            vec![seq(&[rel(0, S, 1)], &[lf(0, "[b]([b]p -> p)")], &[lf(1, "[b]p")])]
        );

        let s = seq(&[rel(0, S, 1), rel(1, R, 2)], &[lf(0, "[b]([b]p -> p)")], &[lf(2, "p")]);
        let principal = Principal::Relational {
            first: rel(0, S, 1),
            second: rel(1, R, 2),
        };
        let step = apply(&s, RuleName::Trans(S, R), &principal, &mut alloc).unwrap();
        assert!(step.premises[0].rels.contains(&rel(0, R, 2)));
        assert_eq!(step.premises[0].rels.len(), 3);
    }

    #[test]
    fn imp_left_splits() {
        let s = seq(&[], &[lf(0, "p -> q")], &[lf(0, "r")]);
        let mut alloc = LabelAllocator::above(&s);
        let p = Principal::formula(lf(0, "p -> q"), Side::Left);
        let step = apply(&s, RuleName::ImpL, &p, &mut alloc).unwrap();
        assert_eq!(
            step.premises,
            vec![
                seq(&[], &[], &[lf(0, "r"), lf(0, "p")]),
                seq(&[], &[lf(0, "q")], &[lf(0, "r")]),
            ]
        );
    }

    #[test]
    fn rejects_bad_applications() {
        let s = seq(&[], &[], &[lf(0, "[b]p")]);
        // allocator handing out an existing label
        let mut stale = LabelAllocator::starting_at(0);
        let p = Principal::formula(lf(0, "[b]p"), Side::Right);
        assert_eq!(apply(&s, RuleName::BoxR, &p, &mut stale), Err(RuleError::NotFresh(x(0))));
        let mut alloc = LabelAllocator::above(&s);
        assert!(matches!(
            apply(&s, RuleName::TriR, &p, &mut alloc),
            Err(RuleError::NotApplicable { .. })
        ));
        let missing = Principal::formula(lf(0, "[b]q"), Side::Right);
        assert!(matches!(
            apply(&s, RuleName::BoxR, &missing, &mut alloc),
            Err(RuleError::StalePrincipal(_))
        ));
        // BoxL whose target already holds the body adds nothing
        let s = seq(&[rel(0, R, 1)], &[lf(0, "[b]p"), lf(1, "p")], &[]);
        let p = Principal::Modal {
            occ: lf(0, "[b]p"),
            rel: rel(0, R, 1),
        };
        assert!(matches!(
            apply(&s, RuleName::BoxL, &p, &mut alloc),
            Err(RuleError::NotApplicable { .. })
        ));
    }

    #[test]
    fn trace_steps() {
        let s = seq(&[rel(0, R, 1), rel(1, S, 2)], &[], &[]);
        assert!(trace_step(&s, &s, x(3), x(3)));
        assert!(trace_step(&s, &s, x(0), x(1)));
        assert!(trace_step(&s, &s, x(1), x(2)));
        assert!(!trace_step(&s, &s, x(0), x(2)));
        assert!(!trace_step(&s, &s, x(1), x(0)));
    }

    #[test]
    fn rule_names_round_trip() {
        for name in RuleName::ALL {
            assert_eq!(name.to_string().parse::<RuleName>().unwrap(), name);
        }
        assert_eq!(RuleName::Trans(S, R).to_string(), "TransSR");
    }

    #[test]
    fn rule_instance_json() {
        let s = seq(&[], &[], &[lf(1, "[b]p")]);
        let mut alloc = LabelAllocator::above(&s);
        let p = Principal::formula(lf(1, "[b]p"), Side::Right);
        let step = apply(&s, RuleName::BoxR, &p, &mut alloc).unwrap();
        let json = serde_json::to_value(&step).unwrap();
        assert_eq!(json["rule"], "BoxR");
        assert_eq!(
            json["principal"],
            serde_json::json!({"label": "x1", "formula": "[b]p", "side": "right"})
        );
        assert_eq!(json["fresh"], "x2");
        let back: RuleInstance = serde_json::from_value(json).unwrap();
        assert_eq!(back.principal, step.principal);
        assert_eq!(back.premises, step.premises);

        let modal = Principal::Modal {
            occ: lf(0, "[d]p"),
            rel: rel(0, S, 1),
        };
        let v = serde_json::to_value(&modal).unwrap();
        assert_eq!(v["rel"], serde_json::json!(["x0", "S", "x1"]));
        assert_eq!(serde_json::from_value::<Principal>(v).unwrap(), modal);
    }
}
