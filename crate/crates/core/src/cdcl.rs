//! A small CDCL solver with assumptions and failed-assumption cores.
//!
//! Branching is static: the lowest-numbered unassigned variable, set to its
//! preferred polarity. With no phase saving this makes the first model found
//! the lexicographically first model under the preference order, whatever
//! clauses were learned in earlier calls.

#[derive(Clone, Copy, PartialEq, Eq, Hash, Debug, PartialOrd, Ord)]
pub(crate) struct Lit(u32);

impl Lit {
    pub fn new(var: usize, positive: bool) -> Lit {
        Lit((var as u32) << 1 | (!positive) as u32)
    }
    #[inline]
    pub fn var(self) -> usize {
        (self.0 >> 1) as usize
    }
    #[inline]
    pub fn is_positive(self) -> bool {
        self.0 & 1 == 0
    }
    #[inline]
    fn code(self) -> usize {
        self.0 as usize
    }
}

impl std::ops::Not for Lit {
    type Output = Lit;
    #[inline]
    fn not(self) -> Lit {
        Lit(self.0 ^ 1)
    }
}

#[derive(Clone, Copy, PartialEq, Eq, Debug)]
enum Reason {
    Decision,
    Clause(u32),
}

struct ClauseRec {
    lits: Vec<Lit>,
    learnt: bool,
}

pub(crate) struct Solver {
    clauses: Vec<ClauseRec>,
    watches: Vec<Vec<u32>>,
    values: Vec<i8>,
    levels: Vec<u32>,
    reasons: Vec<Reason>,
    polarity: Vec<bool>,
    trail: Vec<Lit>,
    trail_lim: Vec<usize>,
    qhead: usize,
    /// No variable below this one is unassigned.
    order_head: usize,
    seen: Vec<bool>,
    root_unsat: bool,
    model: Vec<bool>,
    /// Assumptions responsible for the last unsatisfiable answer.
    failed: Vec<Lit>,
    learnt_count: usize,
    max_learnts: usize,
    conflicts: u64,
}

impl Default for Solver {
    fn default() -> Self {
        Solver::new()
    }
}

impl Solver {
    pub fn new() -> Solver {
        Solver {
            clauses: Vec::new(),
            watches: Vec::new(),
            values: Vec::new(),
            levels: Vec::new(),
            reasons: Vec::new(),
            polarity: Vec::new(),
            trail: Vec::new(),
            trail_lim: Vec::new(),
            qhead: 0,
            order_head: 0,
            seen: Vec::new(),
            root_unsat: false,
            model: Vec::new(),
            failed: Vec::new(),
            learnt_count: 0,
            max_learnts: 4000,
            conflicts: 0,
        }
    }

    pub fn num_vars(&self) -> usize {
        self.values.len()
    }

    pub fn new_var(&mut self) -> usize {
        let v = self.values.len();
        self.values.push(0);
        self.levels.push(0);
        self.reasons.push(Reason::Decision);
        self.polarity.push(false);
        self.seen.push(false);
        self.watches.push(Vec::new());
        self.watches.push(Vec::new());
        v
    }

    pub fn ensure_vars(&mut self, n: usize) {
        while self.num_vars() < n {
            self.new_var();
        }
    }

    pub fn set_polarity(&mut self, var: usize, value: bool) {
        self.polarity[var] = value;
    }

    #[cfg(test)]
    pub fn conflicts(&self) -> u64 {
        self.conflicts
    }

    #[inline]
    fn lit_value(&self, l: Lit) -> i8 {
        let v = self.values[l.var()];
        if l.is_positive() {
            v
        } else {
            -v
        }
    }

    fn decision_level(&self) -> usize {
        self.trail_lim.len()
    }

    fn assign(&mut self, l: Lit, reason: Reason) {
        let v = l.var();
        debug_assert_eq!(self.values[v], 0);
        self.values[v] = if l.is_positive() { 1 } else { -1 };
        self.levels[v] = self.decision_level() as u32;
        self.reasons[v] = reason;
        self.trail.push(l);
    }

    fn cancel_until(&mut self, level: usize) {
        if self.decision_level() <= level {
            return;
        }
        let start = self.trail_lim[level];
        for i in (start..self.trail.len()).rev() {
            let v = self.trail[i].var();
            self.values[v] = 0;
            self.order_head = self.order_head.min(v);
        }
        self.trail.truncate(start);
        self.trail_lim.truncate(level);
        self.qhead = self.qhead.min(start);
    }

    /// Adds a clause at the root. Returns false once the formula is known unsatisfiable.
    pub fn add_clause(&mut self, lits: &[Lit]) -> bool {
        self.cancel_until(0);
        if self.root_unsat {
            return false;
        }
        let mut c: Vec<Lit> = Vec::with_capacity(lits.len());
        for &l in lits {
            self.ensure_vars(l.var() + 1);
            match self.lit_value(l) {
                1 => return true,
                -1 => continue,
                _ => {
                    if c.contains(&!l) {
                        return true;
                    }
                    if !c.contains(&l) {
                        c.push(l);
                    }
                }
            }
        }
        match c.len() {
            0 => {
                self.root_unsat = true;
                false
            }
            1 => {
                self.assign(c[0], Reason::Decision);
                if self.propagate().is_some() {
                    self.root_unsat = true;
                    return false;
                }
                true
            }
            _ => {
                self.attach(c, false);
                true
            }
        }
    }

    fn attach(&mut self, lits: Vec<Lit>, learnt: bool) -> u32 {
        let id = self.clauses.len() as u32;
        self.watches[lits[0].code()].push(id);
        self.watches[lits[1].code()].push(id);
        self.clauses.push(ClauseRec { lits, learnt });
        if learnt {
            self.learnt_count += 1;
        }
        id
    }

    /// Unit propagation; returns a falsified clause on conflict.
    fn propagate(&mut self) -> Option<u32> {
        while self.qhead < self.trail.len() {
            let p = self.trail[self.qhead];
            self.qhead += 1;
            let false_lit = !p;
            let mut ws = std::mem::take(&mut self.watches[false_lit.code()]);
            let mut i = 0;
            let mut j = 0;
            let mut conflict = None;
            while i < ws.len() {
                let cid = ws[i];
                i += 1;
                let lits = &mut self.clauses[cid as usize].lits;
                if lits[0] == false_lit {
                    lits.swap(0, 1);
                }
                let first = lits[0];
                let first_val = {
                    let v = self.values[first.var()];
                    if first.is_positive() {
                        v
                    } else {
                        -v
                    }
                };
                if first_val == 1 {
                    ws[j] = cid;
                    j += 1;
                    continue;
                }
                let mut moved = false;
                for k in 2..lits.len() {
                    let l = lits[k];
                    let v = self.values[l.var()];
                    let lv = if l.is_positive() { v } else { -v };
                    if lv != -1 {
                        lits.swap(1, k);
                        self.watches[lits[1].code()].push(cid);
                        moved = true;
                        break;
                    }
                }
                if moved {
                    continue;
                }
                ws[j] = cid;
                j += 1;
                if first_val == -1 {
                    conflict = Some(cid);
                    while i < ws.len() {
                        ws[j] = ws[i];
                        j += 1;
                        i += 1;
                    }
                } else {
                    self.assign(first, Reason::Clause(cid));
                }
            }
            ws.truncate(j);
            self.watches[false_lit.code()] = ws;
            if conflict.is_some() {
                return conflict;
            }
        }
        None
    }

    /// Literals (all currently false) that together with `lit` form its reason clause.
    fn reason_lits(&self, lit: Lit, out: &mut Vec<Lit>) {
        out.clear();
        match self.reasons[lit.var()] {
            Reason::Decision => {}
            Reason::Clause(cid) => {
                out.extend(self.clauses[cid as usize].lits.iter().copied().filter(|&l| l != lit));
            }
        }
    }

    /// First-UIP analysis. Returns the learnt clause (asserting literal first)
    /// and the backjump level.
    fn analyze(&mut self, conflict: u32) -> (Vec<Lit>, usize) {
        let current = self.decision_level() as u32;
        let mut learnt = vec![Lit(0)];
        let mut path = 0usize;
        let mut index = self.trail.len();
        let mut buf = self.clauses[conflict as usize].lits.clone();
        let mut touched: Vec<usize> = Vec::new();
        let uip;
        loop {
            for &q in &buf {
                let v = q.var();
                if !self.seen[v] && self.levels[v] > 0 {
                    self.seen[v] = true;
                    touched.push(v);
                    if self.levels[v] >= current {
                        path += 1;
                    } else {
                        learnt.push(q);
                    }
                }
            }
            loop {
                index -= 1;
                if self.seen[self.trail[index].var()] {
                    break;
                }
            }
            let p = self.trail[index];
            self.seen[p.var()] = false;
            path -= 1;
            if path == 0 {
                uip = p;
                break;
            }
            self.reason_lits(p, &mut buf);
        }
        learnt[0] = !uip;
        for v in touched {
            self.seen[v] = false;
        }
        let mut bt = 0;
        if learnt.len() > 1 {
            let mut max_i = 1;
            for i in 2..learnt.len() {
                if self.levels[learnt[i].var()] > self.levels[learnt[max_i].var()] {
                    max_i = i;
                }
            }
            learnt.swap(1, max_i);
            bt = self.levels[learnt[1].var()] as usize;
        }
        (learnt, bt)
    }

    /// Drops the longer half of the learnt clauses. Only called at level 0,
    /// where no learnt clause can be a reason that analysis will consult.
    fn reduce_learnts(&mut self) {
        debug_assert_eq!(self.decision_level(), 0);
        let mut learnt_lens: Vec<usize> = self.clauses.iter().filter(|c| c.learnt).map(|c| c.lits.len()).collect();
        learnt_lens.sort_unstable();
        let cutoff = learnt_lens[learnt_lens.len() / 2];
        let old = std::mem::take(&mut self.clauses);
        self.learnt_count = 0;
        for w in &mut self.watches {
            w.clear();
        }
        for v in 0..self.num_vars() {
            if self.values[v] != 0 {
                self.reasons[v] = Reason::Decision;
            }
        }
        for c in old {
            if c.learnt && c.lits.len() > cutoff {
                continue;
            }
            // Clauses satisfied at the root are dead weight.
            if c.lits.iter().any(|&l| self.lit_value(l) == 1 && self.levels[l.var()] == 0) {
                continue;
            }
            let mut lits = c.lits;
            // Keep non-false literals in the watch positions.
            lits.sort_by_key(|&l| self.lit_value(l) == -1);
            if lits.len() < 2 || self.lit_value(lits[1]) == -1 {
                // Unit or falsified under the root assignment; the root trail already
                // reflects its consequence, so it can be dropped.
                continue;
            }
            self.attach(lits, c.learnt);
        }
        self.max_learnts = self.max_learnts * 11 / 10;
    }

    /// Solves under `assumptions`. Returns true with a model available via [`Solver::model`].
    pub fn solve(&mut self, assumptions: &[Lit]) -> bool {
        self.cancel_until(0);
        self.failed.clear();
        if self.root_unsat {
            return false;
        }
        for &a in assumptions {
            self.ensure_vars(a.var() + 1);
        }
        if let Some(_c) = self.propagate() {
            self.root_unsat = true;
            return false;
        }
        if self.learnt_count > self.max_learnts {
            self.reduce_learnts();
        }
        loop {
            if let Some(conflict) = self.propagate() {
                self.conflicts += 1;
                if self.decision_level() == 0 {
                    self.root_unsat = true;
                    return false;
                }
                let (learnt, bt) = self.analyze(conflict);
                self.cancel_until(bt);
                if learnt.len() == 1 {
                    self.assign(learnt[0], Reason::Decision);
                } else {
                    let first = learnt[0];
                    let cid = self.attach(learnt, true);
                    self.assign(first, Reason::Clause(cid));
                }
                continue;
            }

            let mut next = None;
            while self.decision_level() < assumptions.len() {
                let a = assumptions[self.decision_level()];
                match self.lit_value(a) {
                    1 => self.trail_lim.push(self.trail.len()),
                    -1 => {
                        self.analyze_final(a);
                        self.cancel_until(0);
                        return false;
                    }
                    _ => {
                        next = Some(a);
                        break;
                    }
                }
            }
            if next.is_none() {
                while self.order_head < self.num_vars() && self.values[self.order_head] != 0 {
                    self.order_head += 1;
                }
                if self.order_head == self.num_vars() {
                    self.model = self.values.iter().map(|&v| v == 1).collect();
                    self.cancel_until(0);
                    return true;
                }
                let v = self.order_head;
                next = Some(Lit::new(v, self.polarity[v]));
            }
            self.trail_lim.push(self.trail.len());
            self.assign(next.unwrap(), Reason::Decision);
        }
    }

    /// Collects the assumptions that imply `!a`, plus `a` itself.
    fn analyze_final(&mut self, a: Lit) {
        self.failed.clear();
        self.failed.push(a);
        if self.levels[a.var()] == 0 {
            return;
        }
        self.seen[a.var()] = true;
        let start = self.trail_lim[0];
        let mut buf = Vec::new();
        for idx in (start..self.trail.len()).rev() {
            let p = self.trail[idx];
            let v = p.var();
            if !self.seen[v] {
                continue;
            }
            self.seen[v] = false;
            if self.reasons[v] == Reason::Decision {
                self.failed.push(p);
            } else {
                self.reason_lits(p, &mut buf);
                for &q in &buf {
                    if self.levels[q.var()] > 0 {
                        self.seen[q.var()] = true;
                    }
                }
            }
        }
    }

    /// After an unsatisfiable answer, a subset of the assumptions that is
    /// already unsatisfiable. Empty if the clauses alone are.
    pub fn failed_assumptions(&self) -> &[Lit] {
        &self.failed
    }

    /// Value of each variable in the last model.
    pub fn model(&self) -> &[bool] {
        &self.model
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn l(v: i32) -> Lit {
        Lit::new(v.unsigned_abs() as usize - 1, v > 0)
    }

    fn clause(s: &mut Solver, c: &[i32]) -> bool {
        let lits: Vec<Lit> = c.iter().map(|&v| l(v)).collect();
        s.add_clause(&lits)
    }

    #[test]
    fn simple_sat_and_unsat() {
        let mut s = Solver::new();
        clause(&mut s, &[1, 2]);
        clause(&mut s, &[-1]);
        assert!(s.solve(&[]));
        assert_eq!(s.model(), &[false, true]);
        assert!(!s.solve(&[l(-2)]));
        // Assumption failure is not permanent.
        assert!(s.solve(&[]));
        clause(&mut s, &[-2]);
        assert!(!s.solve(&[]));
    }

    #[test]
    fn pigeonhole_3_into_2_is_unsat() {
        let mut s = Solver::new();
        // p_{i,h}: pigeon i in hole h; var = 2*i + h + 1
        let var = |i: i32, h: i32| 2 * i + h + 1;
        for i in 0..3 {
            clause(&mut s, &[var(i, 0), var(i, 1)]);
        }
        for h in 0..2 {
            for i in 0..3 {
                for j in i + 1..3 {
                    clause(&mut s, &[-var(i, h), -var(j, h)]);
                }
            }
        }
        assert!(!s.solve(&[]));
        assert!(s.conflicts() > 0);
    }

    #[test]
    fn preferred_polarity_gives_lexicographically_first_model() {
        let mut s = Solver::new();
        clause(&mut s, &[1, 2, 3]);
        clause(&mut s, &[-1, -2]);
        for v in 0..3 {
            s.set_polarity(v, true);
        }
        assert!(s.solve(&[]));
        assert_eq!(s.model(), &[true, false, true]);
    }

    #[test]
    fn failed_assumptions_form_a_core() {
        let mut s = Solver::new();
        clause(&mut s, &[-1, -2]);
        clause(&mut s, &[3, 4]);
        assert!(!s.solve(&[l(3), l(1), l(4), l(2)]));
        let mut core = s.failed_assumptions().to_vec();
        core.sort();
        assert_eq!(core, vec![l(1), l(2)]);
        assert!(s.solve(&[l(1), l(3)]));
        assert!(s.failed_assumptions().is_empty());
    }
}
