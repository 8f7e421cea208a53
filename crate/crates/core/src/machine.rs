//! Minimal transducers of single state words, canonically numbered from the
//! initial state. Two words act equally iff their machines are equal, which
//! gives exact hashing of semigroup elements.

use std::collections::HashMap;

use crate::automaton::SAutomaton;

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub(crate) struct Machine {
    k: usize,
    /// `trans[s * k + a] = (output, next)`; state 0 is initial.
    trans: Vec<(usize, usize)>,
}

impl Machine {
    pub(crate) fn num_states(&self) -> usize {
        self.trans.len() / self.k
    }

    pub(crate) fn of_state(t: &SAutomaton, p: usize) -> Machine {
        let k = t.num_letters();
        let mut ids = vec![usize::MAX; t.num_states()];
        let mut order = vec![p];
        ids[p] = 0;
        let mut i = 0;
        while i < order.len() {
            let s = order[i];
            for a in 0..k {
                let q = t.step(s, a).1;
                if ids[q] == usize::MAX {
                    ids[q] = order.len();
                    order.push(q);
                }
            }
            i += 1;
        }
        let trans = order
            .iter()
            .flat_map(|&s| (0..k).map(move |a| t.step(s, a)))
            .map(|(b, q)| (b, ids[q]))
            .collect();
        Machine { k, trans }.canonical()
    }

    /// Machine of the word `self · g`, i.e. `g` acts first.
    pub(crate) fn then(&self, t: &SAutomaton, g: usize) -> Machine {
        let k = self.k;
        let nq = t.num_states();
        let mut ids: HashMap<usize, usize> = HashMap::new();
        let mut order = vec![g];
        ids.insert(g, 0);
        let mut trans = Vec::new();
        let mut i = 0;
        while i < order.len() {
            let (m, p) = (order[i] / nq, order[i] % nq);
            for a in 0..k {
                let (b, p2) = t.step(p, a);
                let (c, m2) = self.trans[m * k + b];
                let key = m2 * nq + p2;
                let n = order.len();
                let id = *ids.entry(key).or_insert(n);
                if id == n {
                    order.push(key);
                }
                trans.push((c, id));
            }
            i += 1;
        }
        Machine { k, trans }.canonical()
    }

    /// Machine of the word `p · self`, i.e. `p` acts last.
    pub(crate) fn after(&self, t: &SAutomaton, p: usize) -> Machine {
        let k = self.k;
        let nq = t.num_states();
        let mut ids: HashMap<usize, usize> = HashMap::new();
        let mut order = vec![p];
        ids.insert(p, 0);
        let mut trans = Vec::new();
        let mut i = 0;
        while i < order.len() {
            let (m, q) = (order[i] / nq, order[i] % nq);
            for a in 0..k {
                let (b, m2) = self.trans[m * k + a];
                let (c, q2) = t.step(q, b);
                let key = m2 * nq + q2;
                let n = order.len();
                let id = *ids.entry(key).or_insert(n);
                if id == n {
                    order.push(key);
                }
                trans.push((c, id));
            }
            i += 1;
        }
        Machine { k, trans }.canonical()
    }

    pub(crate) fn of_word(t: &SAutomaton, word: &[usize]) -> Option<Machine> {
        let (&first, rest) = word.split_first()?;
        let mut m = Machine::of_state(t, first);
        for &g in rest {
            m = m.then(t, g);
        }
        Some(m)
    }

    /// Moore minimization followed by BFS renumbering from state 0.
    fn canonical(self) -> Machine {
        let k = self.k;
        let n = self.num_states();
        let mut block = vec![0usize; n];
        let mut count = 1;
        loop {
            let mut sig: HashMap<Vec<(usize, usize)>, usize> = HashMap::new();
            let mut next = vec![0; n];
            for s in 0..n {
                let key: Vec<(usize, usize)> = (0..k)
                    .map(|a| {
                        let (b, q) = self.trans[s * k + a];
                        (b, block[q])
                    })
                    .chain(std::iter::once((block[s], 0)))
                    .collect();
                let len = sig.len();
                next[s] = *sig.entry(key).or_insert(len);
            }
            let c = sig.len();
            block = next;
            if c == count {
                break;
            }
            count = c;
        }
        let mut ids = vec![usize::MAX; count];
        let mut order = vec![block[0]];
        let mut rep = vec![0usize; count];
        for s in (0..n).rev() {
            rep[block[s]] = s;
        }
        ids[block[0]] = 0;
        let mut trans = Vec::with_capacity(count * k);
        let mut i = 0;
        while i < order.len() {
            let s = rep[order[i]];
            for a in 0..k {
                let (b, q) = self.trans[s * k + a];
                let bq = block[q];
                if ids[bq] == usize::MAX {
                    ids[bq] = order.len();
                    order.push(bq);
                }
                trans.push((b, ids[bq]));
            }
            i += 1;
        }
        Machine { k, trans }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus;

    #[test]
    fn equal_machines_iff_equal_actions() {
        let t = corpus::adding_machine();
        let w = |s: &str| t.parse_state_word(s).unwrap();
        let m = |s: &str| Machine::of_word(&t, &w(s)).unwrap();
        assert_eq!(m("qe"), m("eq"));
        assert_eq!(m("eee"), m("e"));
        assert_ne!(m("q"), m("e"));
        assert_ne!(m("qq"), m("qqq"));
        assert_eq!(m("e").num_states(), 1);
        assert!(Machine::of_word(&t, &[]).is_none());
        assert_eq!(m("q").after(&t, 0), m("qq"));
        assert_eq!(m("qe").after(&t, 0), m("qqe"));
        assert_eq!(m("q").then(&t, 1), m("qe"));
        for a in ["q", "qe", "qq", "eqq", "qqq", "qeqe"] {
            for b in ["q", "qe", "qq", "eqq", "qqq", "qeqe"] {
                assert_eq!(m(a) == m(b), t.equal_actions(&w(a), &w(b)).unwrap(), "{a} {b}");
            }
        }
    }
}
