//! Propositional satisfiability for ground formulas.
//!
//! [`Solver`] is a conflict-driven clause-learning solver with two watched
//! literals, first-UIP learning and activity-ordered branching. Branching
//! tries `false` first, so models tend to make few atoms true. Solving takes
//! assumption literals, which lets one solver answer several related queries
//! while keeping learnt clauses.

use std::cmp::{Ordering, Reverse};
use std::collections::BinaryHeap;

use crate::semantics::Ground;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Lit(u32);

impl Lit {
    pub fn pos(var: usize) -> Lit {
        Lit((var as u32) << 1)
    }

    pub fn neg(var: usize) -> Lit {
        Lit(((var as u32) << 1) | 1)
    }

    pub fn var(self) -> usize {
        (self.0 >> 1) as usize
    }

    pub fn is_neg(self) -> bool {
        self.0 & 1 == 1
    }

    fn idx(self) -> usize {
        self.0 as usize
    }
}

impl std::ops::Not for Lit {
    type Output = Lit;
    fn not(self) -> Lit {
        Lit(self.0 ^ 1)
    }
}

const UNDEF: i8 = 0;
const TRUE: i8 = 1;
const FALSE: i8 = -1;

fn lit_value(assign: &[i8], l: Lit) -> i8 {
    let v = assign[l.var()];
    if l.is_neg() {
        -v
    } else {
        v
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
struct Activity(f64);

impl Eq for Activity {}

impl PartialOrd for Activity {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Activity {
    fn cmp(&self, other: &Self) -> Ordering {
        self.0.total_cmp(&other.0)
    }
}

#[derive(Debug, Clone, Default)]
pub struct Solver {
    clauses: Vec<Vec<Lit>>,
    watches: Vec<Vec<usize>>,
    assign: Vec<i8>,
    level: Vec<usize>,
    reason: Vec<Option<usize>>,
    trail: Vec<Lit>,
    trail_lim: Vec<usize>,
    qhead: usize,
    activity: Vec<f64>,
    inc: f64,
    heap: BinaryHeap<(Activity, Reverse<usize>)>,
    seen: Vec<bool>,
    model: Vec<bool>,
    inconsistent: bool,
    conflicts: u64,
}

impl Solver {
    pub fn new() -> Self {
        Solver {
            inc: 1.0,
            ..Default::default()
        }
    }

    pub fn num_vars(&self) -> usize {
        self.assign.len()
    }

    pub fn num_clauses(&self) -> usize {
        self.clauses.len()
    }

    /// Conflicts seen over the solver's lifetime.
    pub fn conflicts(&self) -> u64 {
        self.conflicts
    }

    pub fn new_var(&mut self) -> usize {
        let v = self.assign.len();
        self.assign.push(UNDEF);
        self.level.push(0);
        self.reason.push(None);
        self.activity.push(0.0);
        self.seen.push(false);
        self.watches.push(Vec::new());
        self.watches.push(Vec::new());
        self.heap.push((Activity(0.0), Reverse(v)));
        v
    }

    pub fn ensure_vars(&mut self, n: usize) {
        while self.num_vars() < n {
            self.new_var();
        }
    }

    /// Raises a variable's initial branching priority by `amount`. Only
    /// meaningful before the first search.
    pub fn prefer(&mut self, v: usize, amount: f64) {
        self.activity[v] += amount;
        self.heap.push((Activity(self.activity[v]), Reverse(v)));
    }

    /// Adds a clause. Must not be called while a search is in progress
    /// (solving always returns at decision level 0).
    pub fn add_clause(&mut self, lits: &[Lit]) {
        if self.inconsistent {
            return;
        }
        if let Some(max) = lits.iter().map(|l| l.var()).max() {
            self.ensure_vars(max + 1);
        }
        let mut c: Vec<Lit> = lits.to_vec();
        c.sort_unstable();
        c.dedup();
        if c.windows(2).any(|w| w[0] == !w[1]) {
            return;
        }
        if c.iter().any(|&l| lit_value(&self.assign, l) == TRUE) {
            return;
        }
        c.retain(|&l| lit_value(&self.assign, l) != FALSE);
        match c.len() {
            0 => self.inconsistent = true,
            1 => {
                self.enqueue(c[0], None);
                if self.propagate().is_some() {
                    self.inconsistent = true;
                }
            }
            _ => {
                self.attach(c);
            }
        }
    }

    fn attach(&mut self, c: Vec<Lit>) -> usize {
        let ci = self.clauses.len();
        self.watches[c[0].idx()].push(ci);
        self.watches[c[1].idx()].push(ci);
        self.clauses.push(c);
        ci
    }

    fn decision_level(&self) -> usize {
        self.trail_lim.len()
    }

    fn enqueue(&mut self, l: Lit, reason: Option<usize>) {
        let v = l.var();
        self.assign[v] = if l.is_neg() { FALSE } else { TRUE };
        self.level[v] = self.decision_level();
        self.reason[v] = reason;
        self.trail.push(l);
    }

    /// Unit propagation; returns a falsified clause on conflict.
    fn propagate(&mut self) -> Option<usize> {
        while self.qhead < self.trail.len() {
            let p = self.trail[self.qhead];
            self.qhead += 1;
            let false_lit = !p;
            let mut ws = std::mem::take(&mut self.watches[false_lit.idx()]);
            let mut i = 0;
            let mut j = 0;
            while i < ws.len() {
                let ci = ws[i];
                i += 1;
                let c = &mut self.clauses[ci];
                if c[0] == false_lit {
                    c.swap(0, 1);
                }
                if lit_value(&self.assign, c[0]) == TRUE {
                    ws[j] = ci;
                    j += 1;
                    continue;
                }
                let mut moved = false;
                for k in 2..c.len() {
                    if lit_value(&self.assign, c[k]) != FALSE {
                        c.swap(1, k);
                        self.watches[c[1].idx()].push(ci);
                        moved = true;
                        break;
                    }
                }
                if moved {
                    continue;
                }
                ws[j] = ci;
                j += 1;
                let first = c[0];
                if lit_value(&self.assign, first) == FALSE {
                    while i < ws.len() {
                        ws[j] = ws[i];
                        i += 1;
                        j += 1;
                    }
                    ws.truncate(j);
                    self.watches[false_lit.idx()] = ws;
                    self.qhead = self.trail.len();
                    return Some(ci);
                }
                self.enqueue(first, Some(ci));
            }
            ws.truncate(j);
            self.watches[false_lit.idx()] = ws;
        }
        None
    }

    fn bump(&mut self, v: usize) {
        self.activity[v] += self.inc;
        if self.activity[v] > 1e100 {
            for a in &mut self.activity {
                *a *= 1e-100;
            }
            self.inc *= 1e-100;
            self.heap = (0..self.num_vars())
                .filter(|&v| self.assign[v] == UNDEF)
                .map(|v| (Activity(self.activity[v]), Reverse(v)))
                .collect();
        }
        if self.assign[v] == UNDEF {
            self.heap.push((Activity(self.activity[v]), Reverse(v)));
        }
    }

    /// First-UIP conflict analysis. Returns the learnt clause (asserting
    /// literal first, highest remaining level second) and the backjump level.
    fn analyze(&mut self, confl: usize) -> (Vec<Lit>, usize) {
        let current = self.decision_level();
        let mut learnt = vec![Lit(0)];
        let mut pending = 0usize;
        let mut idx = self.trail.len();
        let mut ci = confl;
        let mut skip_first = false;
        loop {
            let start = usize::from(skip_first);
            for k in start..self.clauses[ci].len() {
                let q = self.clauses[ci][k];
                let v = q.var();
                if !self.seen[v] && self.level[v] > 0 {
                    self.seen[v] = true;
                    self.bump(v);
                    if self.level[v] >= current {
                        pending += 1;
                    } else {
                        learnt.push(q);
                    }
                }
            }
            loop {
                idx -= 1;
                if self.seen[self.trail[idx].var()] {
                    break;
                }
            }
            let p = self.trail[idx];
            self.seen[p.var()] = false;
            pending -= 1;
            if pending == 0 {
                learnt[0] = !p;
                break;
            }
            ci = self.reason[p.var()].expect("implied literal has a reason");
            skip_first = true;
        }
        for l in &learnt[1..] {
            self.seen[l.var()] = false;
        }
        let mut bt = 0;
        if learnt.len() > 1 {
            let mut best = 1;
            for k in 2..learnt.len() {
                if self.level[learnt[k].var()] > self.level[learnt[best].var()] {
                    best = k;
                }
            }
            learnt.swap(1, best);
            bt = self.level[learnt[1].var()];
        }
        (learnt, bt)
    }

    fn cancel_until(&mut self, lvl: usize) {
        if self.decision_level() <= lvl {
            return;
        }
        let keep = self.trail_lim[lvl];
        for k in (keep..self.trail.len()).rev() {
            let v = self.trail[k].var();
            self.assign[v] = UNDEF;
            self.reason[v] = None;
            self.heap.push((Activity(self.activity[v]), Reverse(v)));
        }
        self.trail.truncate(keep);
        self.trail_lim.truncate(lvl);
        self.qhead = keep;
    }

    fn pick_branch(&mut self) -> Option<usize> {
        while let Some((Activity(a), Reverse(v))) = self.heap.pop() {
            if self.assign[v] == UNDEF && a == self.activity[v] {
                return Some(v);
            }
        }
        // stale entries can hide a variable whose activity was rescaled
        (0..self.num_vars()).find(|&v| self.assign[v] == UNDEF)
    }

    /// Decides satisfiability of the clause set together with the
    /// assumption literals. On success the model is available through
    /// [`Solver::model`].
    pub fn solve(&mut self, assumptions: &[Lit]) -> bool {
        self.model.clear();
        if self.inconsistent {
            return false;
        }
        if let Some(max) = assumptions.iter().map(|l| l.var()).max() {
            self.ensure_vars(max + 1);
        }
        loop {
            if let Some(confl) = self.propagate() {
                self.conflicts += 1;
                if self.decision_level() == 0 {
                    self.inconsistent = true;
                    return false;
                }
                let (learnt, bt) = self.analyze(confl);
                self.cancel_until(bt);
                if learnt.len() == 1 {
                    self.enqueue(learnt[0], None);
                } else {
                    let first = learnt[0];
                    let ci = self.attach(learnt);
                    self.enqueue(first, Some(ci));
                }
                self.inc /= 0.95;
                continue;
            }
            let dl = self.decision_level();
            if dl < assumptions.len() {
                let a = assumptions[dl];
                match lit_value(&self.assign, a) {
                    TRUE => self.trail_lim.push(self.trail.len()),
                    FALSE => {
                        self.cancel_until(0);
                        return false;
                    }
                    _ => {
                        self.trail_lim.push(self.trail.len());
                        self.enqueue(a, None);
                    }
                }
                continue;
            }
            match self.pick_branch() {
                Some(v) => {
                    self.trail_lim.push(self.trail.len());
                    self.enqueue(Lit::neg(v), None);
                }
                None => {
                    self.model = self.assign.iter().map(|&v| v == TRUE).collect();
                    self.cancel_until(0);
                    return true;
                }
            }
        }
    }

    /// Model of the last successful [`Solver::solve`], indexed by variable.
    pub fn model(&self) -> &[bool] {
        &self.model
    }

    /// Tseitin-encodes `g` and returns a literal equivalent to it. Atom `i`
    /// of the ground formula is variable `i`; auxiliary variables are
    /// allocated after every atom variable that exists at call time.
    pub fn encode(&mut self, g: &Ground) -> Lit {
        match g {
            Ground::Atom(i) => {
                self.ensure_vars(i + 1);
                Lit::pos(*i)
            }
            Ground::Not(x) => !self.encode(x),
            Ground::And(xs) => {
                let lits: Vec<Lit> = xs.iter().map(|x| self.encode(x)).collect();
                self.gate(lits, true)
            }
            Ground::Or(xs) => {
                let lits: Vec<Lit> = xs.iter().map(|x| self.encode(x)).collect();
                self.gate(lits, false)
            }
            Ground::Implies(a, b) => {
                let a = self.encode(a);
                let b = self.encode(b);
                self.gate(vec![!a, b], false)
            }
            Ground::Iff(a, b) => {
                let a = self.encode(a);
                let b = self.encode(b);
                let t = Lit::pos(self.new_var());
                self.add_clause(&[!t, !a, b]);
                self.add_clause(&[!t, a, !b]);
                self.add_clause(&[t, a, b]);
                self.add_clause(&[t, !a, !b]);
                t
            }
        }
    }

    /// `t ↔ ∧ lits` when `and`, else `t ↔ ∨ lits`.
    fn gate(&mut self, lits: Vec<Lit>, and: bool) -> Lit {
        if lits.len() == 1 {
            return lits[0];
        }
        let t = Lit::pos(self.new_var());
        // express the Or case through De Morgan: t ↔ ∨ l  is  ¬t ↔ ∧ ¬l
        let (out, ins): (Lit, Vec<Lit>) = if and {
            (t, lits)
        } else {
            (!t, lits.into_iter().map(|l| !l).collect())
        };
        for &l in &ins {
            self.add_clause(&[!out, l]);
        }
        let mut big: Vec<Lit> = ins.iter().map(|&l| !l).collect();
        big.push(out);
        self.add_clause(&big);
        t
    }
}
