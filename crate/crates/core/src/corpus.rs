//! Canonical inputs: axiom instances, derived theorems and non-theorems.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::formula::Formula;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Expected {
    Provable,
    Refutable,
}

impl fmt::Display for Expected {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Expected::Provable => "provable",
            Expected::Refutable => "refutable",
        })
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CorpusEntry {
    pub name: String,
    pub formula: Formula,
    pub expected: Expected,
}

/// K, L and 4-style instances, box versions first:
/// `K[b]`, `L[b]`, `[b]a -> [d][b]a`, `K[d]`, `L[d]`, `[d]a -> [b][d]a`.
pub fn axiom_instances(a: &Formula, b: &Formula) -> Vec<Formula> {
    use Formula as F;
    let k = |m: fn(Formula) -> Formula| {
        F::imp(m(F::imp(a.clone(), b.clone())), F::imp(m(a.clone()), m(b.clone())))
    };
    let l = |m: fn(Formula) -> Formula| F::imp(m(F::imp(m(a.clone()), a.clone())), m(a.clone()));
    vec![
        k(F::boxed),
        l(F::boxed),
        F::imp(F::boxed(a.clone()), F::tri(F::boxed(a.clone()))),
        k(F::tri),
        l(F::tri),
        F::imp(F::tri(a.clone()), F::boxed(F::tri(a.clone()))),
    ]
}

pub const AXIOM_NAMES: [&str; 6] = ["k_box", "lob_box", "four_tri_box", "k_tri", "lob_tri", "four_box_tri"];

fn entry(name: &str, text: &str, expected: Expected) -> CorpusEntry {
    CorpusEntry {
        name: name.to_string(),
        formula: text.parse().expect("corpus formula parses"),
        expected,
    }
}

pub fn standard_corpus() -> Vec<CorpusEntry> {
    let p = Formula::atom("p");
    let q = Formula::atom("q");
    let mut out: Vec<CorpusEntry> = AXIOM_NAMES
        .iter()
        .zip(axiom_instances(&p, &q))
        .map(|(name, formula)| CorpusEntry {
            name: name.to_string(),
            formula,
            expected: Expected::Provable,
        })
        .collect();
    out.extend([
        entry("four_box", "[b]p -> [b][b]p", Expected::Provable),
        entry("four_tri", "[d]p -> [d][d]p", Expected::Provable),
        entry("fig3", "[b]([b]p -> p) -> [d][b]p", Expected::Provable),
        entry("mix_down", "[d]p -> [b]p", Expected::Refutable),
        entry("mix_up", "[b]p -> [d]p", Expected::Refutable),
        entry("box_up", "p -> [b]p", Expected::Refutable),
        entry("box_reflexive", "[b]p -> p", Expected::Refutable),
        entry("tri_into_box", "[d]p -> [d][b]p", Expected::Refutable),
    ]);
    out
}

/// Every formula over `atoms` (and `bot`) with at most `max_nodes` AST
/// nodes, smaller formulas first.
pub fn enumerate_formulas(atoms: &[&str], max_nodes: usize) -> Vec<Formula> {
    // by_size[n] holds the formulas with exactly n nodes
    let mut by_size: Vec<Vec<Formula>> = vec![Vec::new(); max_nodes + 1];
    for n in 1..=max_nodes {
        let mut here = Vec::new();
        if n == 1 {
            here.push(Formula::Bot);
            here.extend(atoms.iter().map(|a| Formula::atom(a)));
        } else {
            for f in &by_size[n - 1] {
                here.push(Formula::boxed(f.clone()));
                here.push(Formula::tri(f.clone()));
            }
            for left in 1..n - 1 {
                for a in &by_size[left] {
                    for b in &by_size[n - 1 - left] {
                        here.push(Formula::imp(a.clone(), b.clone()));
                    }
                }
            }
        }
        by_size[n] = here;
    }
    by_size.into_iter().flatten().collect()
}

/// One JSON object per line.
pub fn to_jsonl(entries: &[CorpusEntry]) -> String {
    entries
        .iter()
        .map(|e| serde_json::to_string(e).expect("entries serialize") + "\n")
        .collect()
}

pub fn from_jsonl(text: &str) -> Result<Vec<CorpusEntry>, serde_json::Error> {
    text.lines()
        .filter(|l| !l.trim().is_empty())
        .map(serde_json::from_str)
        .collect()
}
