//! Workloads shared by the benchmarks.

use csprove_core::{parse, standard_corpus, Formula};

/// Named formulas for the decide benchmark.
pub fn workloads() -> Vec<(String, Formula)> {
    let mut out: Vec<(String, Formula)> = standard_corpus()
        .into_iter()
        .map(|e| (e.name, e.formula))
        .collect();
    for (name, text) in [
        ("lob_nested", "[b]([b]([b]p -> p) -> [b]p)"),
        ("k4_chain", "[b]p -> [b][b][b][b]p"),
        ("mixed_four", "[d]p -> [b][d][d]p"),
    ] {
        out.push((name.to_string(), parse(text).expect("workload parses")));
    }
    out
}

#[cfg(test)]
mod tests {
    #[test]
    fn workloads_are_named_uniquely() {
        let w = super::workloads();
        let names: std::collections::BTreeSet<_> = w.iter().map(|(n, _)| n.clone()).collect();
        assert_eq!(names.len(), w.len());
    }
}
