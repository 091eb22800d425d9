use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};

use super::{arity_warnings, KnowledgeBase};
use crate::semantics::Signature;
use crate::syntax::Formula;

/// One predicate spelling rewritten to its group's canonical spelling.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Rewrite {
    pub from: String,
    pub to: String,
    pub arity: usize,
}

/// Lowercase with underscores removed.
pub fn normalized_name(name: &str) -> String {
    name.chars().filter(|&c| c != '_').flat_map(char::to_lowercase).collect()
}

/// Two normalized names denote the same predicate when equal or when one is
/// the other plus a plural `s`/`es`.
fn same_stem(a: &str, b: &str) -> bool {
    let plural_of = |long: &str, short: &str| {
        long.strip_prefix(short)
            .is_some_and(|rest| rest == "s" || rest == "es")
    };
    a == b || plural_of(a, b) || plural_of(b, a)
}

fn find(parent: &mut [usize], mut i: usize) -> usize {
    while parent[i] != i {
        parent[i] = parent[parent[i]];
        i = parent[i];
    }
    i
}

/// Unifies predicate spellings that normalize to the same stem and share an
/// arity, rewriting premises and query to the most frequent spelling (ties
/// broken by the case-folded name, then the raw name). Names that match but
/// differ in arity stay distinct and produce a warning.
pub fn align_predicates(premises: Vec<Formula>, query: Formula) -> (KnowledgeBase, Formula) {
    let mut counts: BTreeMap<(String, usize), usize> = BTreeMap::new();
    for f in premises.iter().chain(std::iter::once(&query)) {
        f.visit_atoms(&mut |a| *counts.entry((a.predicate.clone(), a.arity())).or_default() += 1);
    }
    let symbols: Vec<(String, usize)> = counts.keys().cloned().collect();
    let normal: Vec<String> = symbols.iter().map(|(n, _)| normalized_name(n)).collect();

    let mut parent: Vec<usize> = (0..symbols.len()).collect();
    let mut warnings = Vec::new();
    let mut mismatched = BTreeSet::new();
    for i in 0..symbols.len() {
        for j in i + 1..symbols.len() {
            if !same_stem(&normal[i], &normal[j]) {
                continue;
            }
            if symbols[i].1 == symbols[j].1 {
                let (a, b) = (find(&mut parent, i), find(&mut parent, j));
                parent[a.max(b)] = a.min(b);
            } else if symbols[i].0 != symbols[j].0 {
                mismatched.insert((symbols[i].clone(), symbols[j].clone()));
            }
        }
    }
    for ((a, m), (b, n)) in mismatched {
        warnings.push(format!(
            "predicates '{a}/{m}' and '{b}/{n}' look alike but differ in arity; not unified"
        ));
    }

    let mut groups: BTreeMap<usize, Vec<usize>> = BTreeMap::new();
    for i in 0..symbols.len() {
        let root = find(&mut parent, i);
        groups.entry(root).or_default().push(i);
    }
    let mut rename: BTreeMap<(String, usize), String> = BTreeMap::new();
    let mut log = Vec::new();
    for members in groups.values() {
        if members.len() < 2 {
            continue;
        }
        let canonical = members
            .iter()
            .map(|&i| &symbols[i])
            .min_by(|a, b| {
                counts[*b]
                    .cmp(&counts[*a])
                    .then_with(|| a.0.to_lowercase().cmp(&b.0.to_lowercase()))
                    .then_with(|| a.0.cmp(&b.0))
            })
            .unwrap()
            .0
            .clone();
        for &i in members {
            let (name, arity) = &symbols[i];
            if *name != canonical {
                rename.insert((name.clone(), *arity), canonical.clone());
                log.push(Rewrite {
                    from: name.clone(),
                    to: canonical.clone(),
                    arity: *arity,
                });
            }
        }
    }

    let apply = |mut f: Formula| {
        f.map_predicates(&mut |name, arity| rename.get(&(name.to_string(), arity)).cloned());
        f
    };
    let premises: Vec<Formula> = premises
        .into_iter()
        .map(|f| apply(f).universal_closure())
        .collect();
    let query = apply(query);
    let signature = Signature::from_formulas(&premises);
    let mut all = signature.clone();
    all.extend_with(&query);
    warnings.extend(arity_warnings(&all));
    (
        KnowledgeBase {
            premises,
            signature,
            alignment_log: log,
            warnings,
        },
        query,
    )
}
