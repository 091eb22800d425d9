use super::{AtomTable, Ground, GroundError, Interpretation};

/// Largest atom universe [`enumerate_models`] will brute-force.
pub const ORACLE_ATOM_LIMIT: usize = 25;

/// Evaluates `g` on 64 valuations at once: bit `k` of `words[i]` is atom
/// `i`'s value in lane `k`.
pub fn eval_words(g: &Ground, words: &[u64]) -> u64 {
    match g {
        Ground::Atom(i) => words[*i],
        Ground::Not(x) => !eval_words(x, words),
        Ground::And(xs) => xs.iter().fold(!0, |acc, x| acc & eval_words(x, words)),
        Ground::Or(xs) => xs.iter().fold(0, |acc, x| acc | eval_words(x, words)),
        Ground::Implies(a, b) => !eval_words(a, words) | eval_words(b, words),
        Ground::Iff(a, b) => !(eval_words(a, words) ^ eval_words(b, words)),
    }
}

/// Lane patterns for the six low bits of a row index.
const LANE_BITS: [u64; 6] = [
    0xAAAA_AAAA_AAAA_AAAA,
    0xCCCC_CCCC_CCCC_CCCC,
    0xF0F0_F0F0_F0F0_F0F0,
    0xFF00_FF00_FF00_FF00,
    0xFFFF_0000_FFFF_0000,
    0xFFFF_FFFF_0000_0000,
];

/// Truth-table block: atom words for rows `block*64 .. block*64+63`, where
/// row `r` assigns atom `order[j]` the bit `k-1-j` of `r` (first atom in
/// `order` is the most significant). Returns the words and the mask of
/// valid lanes.
pub(crate) fn table_block(order: &[usize], n_atoms: usize, block: u64) -> (Vec<u64>, u64) {
    let k = order.len();
    let mut words = vec![0u64; n_atoms];
    for (j, &atom) in order.iter().enumerate() {
        let bit = k - 1 - j;
        words[atom] = if bit < 6 {
            LANE_BITS[bit]
        } else if (block >> (bit - 6)) & 1 == 1 {
            !0
        } else {
            0
        };
    }
    let mask = if k >= 6 { !0 } else { (1u64 << (1u64 << k)) - 1 };
    (words, mask)
}

/// Every interpretation of `table`'s atoms satisfying all of `fs`, up to
/// `cap`, in lexicographic order of assignments (atoms in sorted order,
/// false before true).
pub fn enumerate_models(
    fs: &[Ground],
    table: &AtomTable,
    cap: usize,
) -> Result<Vec<Interpretation>, GroundError> {
    let k = table.len();
    if k > ORACLE_ATOM_LIMIT {
        return Err(GroundError::ScaleExceeded {
            atoms: k,
            limit: ORACLE_ATOM_LIMIT,
        });
    }
    let order = table.sorted_ids();
    let blocks = if k >= 6 { 1u64 << (k - 6) } else { 1 };
    let mut out = Vec::new();
    if cap == 0 {
        return Ok(out);
    }
    for block in 0..blocks {
        let (words, mask) = table_block(&order, k, block);
        let mut sat = fs.iter().fold(mask, |acc, f| acc & eval_words(f, &words));
        while sat != 0 {
            let lane = sat.trailing_zeros() as u64;
            sat &= sat - 1;
            let row = block * 64 + lane;
            let mut values = vec![false; k];
            for (j, &atom) in order.iter().enumerate() {
                values[atom] = (row >> (k - 1 - j)) & 1 == 1;
            }
            out.push(Interpretation::from_values(table, &values));
            if out.len() >= cap {
                return Ok(out);
            }
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::semantics::{ground, GroundAtom, Signature};
    use crate::syntax::parse;

    fn setup(fs: &[&str]) -> (Vec<Ground>, AtomTable) {
        let formulas: Vec<_> = fs.iter().map(|s| parse(s).into_result().unwrap()).collect();
        let sig = Signature::from_formulas(&formulas);
        let mut table = AtomTable::new();
        let gs = formulas
            .iter()
            .map(|f| ground(f, &sig, &mut table, 1000).unwrap())
            .collect();
        (gs, table)
    }

    #[test]
    fn single_fact() {
        let (gs, t) = setup(&["p(a)"]);
        let models = enumerate_models(&gs, &t, 10).unwrap();
        assert_eq!(models.len(), 1);
        assert!(models[0].value(&GroundAtom::new("p", &["a"])));
    }

    #[test]
    fn disjunctive_syllogism() {
        let (gs, t) = setup(&["p(a) ∨ q(a)", "¬p(a)"]);
        let models = enumerate_models(&gs, &t, 10).unwrap();
        assert_eq!(models.len(), 1);
        assert!(!models[0].value(&GroundAtom::new("p", &["a"])));
        assert!(models[0].value(&GroundAtom::new("q", &["a"])));
    }

    #[test]
    fn contradiction_has_no_models() {
        let (gs, t) = setup(&["p(a) ∧ ¬p(a)"]);
        assert!(enumerate_models(&gs, &t, 10).unwrap().is_empty());
    }

    #[test]
    fn order_is_lexicographic() {
        // atoms sorted: a, b, c; rows 000 001 ... 111
        let (gs, t) = setup(&["c ∨ b ∨ a"]);
        let models = enumerate_models(&gs, &t, 100).unwrap();
        let rows: Vec<String> = models
            .iter()
            .map(|m| {
                ["a", "b", "c"]
                    .iter()
                    .map(|n| if m.value(&GroundAtom::new(*n, &[])) { '1' } else { '0' })
                    .collect()
            })
            .collect();
        assert_eq!(rows, ["001", "010", "011", "100", "101", "110", "111"]);
        assert_eq!(enumerate_models(&gs, &t, 2).unwrap().len(), 2);
    }

    #[test]
    fn wide_tables_cross_blocks() {
        // 8 atoms: 256 rows, exactly one satisfies the conjunction
        let (gs, t) = setup(&["p1 ∧ p2 ∧ p3 ∧ p4 ∧ p5 ∧ p6 ∧ p7 ∧ ¬p8"]);
        let models = enumerate_models(&gs, &t, 10).unwrap();
        assert_eq!(models.len(), 1);
        let (gs, t) = setup(&["p1 ∨ p2 ∨ p3 ∨ p4 ∨ p5 ∨ p6 ∨ p7 ∨ p8"]);
        assert_eq!(enumerate_models(&gs, &t, 1000).unwrap().len(), 255);
    }

    #[test]
    fn scale_limit() {
        let names: Vec<String> = (0..26).map(|i| format!("p{i}")).collect();
        let (gs, t) = setup(&[&names.join(" ∨ ")]);
        assert!(matches!(
            enumerate_models(&gs, &t, 1),
            Err(GroundError::ScaleExceeded { atoms: 26, .. })
        ));
    }
}
