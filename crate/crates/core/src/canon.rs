//! Canonical forms of relation acceptors up to isomorphism of edge-labelled
//! graphs with a marked initial state and a binary relation on the nodes.
//!
//! Colour refinement followed by individualization; the lexicographically
//! least encoding over all leaves of the search tree is the canonical form.
//! Automorphisms found along the way prune equivalent branches.

use crate::error::{Error, Result};
use crate::expansion::Nfra;

/// Cap on the number of search-tree leaves.
pub const MAX_LEAVES: usize = 1 << 16;

struct Graph {
    n: usize,
    initial: usize,
    out: Vec<Vec<(usize, usize)>>,
    inc: Vec<Vec<(usize, usize)>>,
    rel: Vec<Vec<usize>>,
    edges: Vec<(usize, usize, usize)>,
    pairs: Vec<(usize, usize)>,
}

impl Graph {
    fn new(a: &Nfra) -> Graph {
        let n = a.num_states();
        let mut out = vec![Vec::new(); n];
        let mut inc = vec![Vec::new(); n];
        let mut edges = Vec::new();
        for (s, es) in a.edges.iter().enumerate() {
            for &(l, t) in es {
                out[s].push((l, t));
                inc[t].push((l, s));
                edges.push((s, l, t));
            }
        }
        let mut rel = vec![Vec::new(); n];
        for &(x, y) in &a.accept {
            rel[x].push(y);
        }
        Graph {
            n,
            initial: a.initial,
            out,
            inc,
            rel,
            edges,
            pairs: a.accept.clone(),
        }
    }

    /// Refines until stable; colours are ranks of sorted signatures.
    fn refine(&self, mut colors: Vec<usize>) -> Vec<usize> {
        let mut count = distinct(&colors);
        loop {
            let sigs: Vec<(usize, Vec<(usize, usize)>, Vec<(usize, usize)>, Vec<usize>)> = (0..self.n)
                .map(|s| {
                    let mut o: Vec<(usize, usize)> = self.out[s].iter().map(|&(l, t)| (l, colors[t])).collect();
                    let mut i: Vec<(usize, usize)> = self.inc[s].iter().map(|&(l, t)| (l, colors[t])).collect();
                    let mut r: Vec<usize> = self.rel[s].iter().map(|&t| colors[t]).collect();
                    o.sort_unstable();
                    i.sort_unstable();
                    r.sort_unstable();
                    (colors[s], o, i, r)
                })
                .collect();
            let mut sorted: Vec<&_> = sigs.iter().collect();
            sorted.sort();
            sorted.dedup();
            colors = sigs.iter().map(|s| sorted.binary_search(&s).unwrap()).collect();
            let c = sorted.len();
            if c == count {
                return colors;
            }
            count = c;
        }
    }

    fn encode(&self, perm: &[usize]) -> Vec<u32> {
        let mut edges: Vec<(usize, usize, usize)> =
            self.edges.iter().map(|&(s, l, t)| (perm[s], l, perm[t])).collect();
        edges.sort_unstable();
        let mut pairs: Vec<(usize, usize)> = self.pairs.iter().map(|&(a, b)| (perm[a], perm[b])).collect();
        pairs.sort_unstable();
        let mut out = vec![self.n as u32, perm[self.initial] as u32, edges.len() as u32];
        for (s, l, t) in edges {
            out.extend([s as u32, l as u32, t as u32]);
        }
        out.push(pairs.len() as u32);
        for (a, b) in pairs {
            out.extend([a as u32, b as u32]);
        }
        out
    }

    fn is_automorphism(&self, sigma: &[usize]) -> bool {
        if sigma[self.initial] != self.initial {
            return false;
        }
        let mut a: Vec<(usize, usize, usize)> = self.edges.iter().map(|&(s, l, t)| (sigma[s], l, sigma[t])).collect();
        let mut b = self.edges.clone();
        a.sort_unstable();
        b.sort_unstable();
        if a != b {
            return false;
        }
        let mut a: Vec<(usize, usize)> = self.pairs.iter().map(|&(x, y)| (sigma[x], sigma[y])).collect();
        let mut b = self.pairs.clone();
        a.sort_unstable();
        b.sort_unstable();
        a == b
    }
}

fn distinct(colors: &[usize]) -> usize {
    let mut c = colors.to_vec();
    c.sort_unstable();
    c.dedup();
    c.len()
}

struct Search<'a> {
    g: &'a Graph,
    best: Option<(Vec<u32>, Vec<usize>)>,
    autos: Vec<Vec<usize>>,
    leaves: usize,
}

impl Search<'_> {
    fn run(&mut self, colors: Vec<usize>, path: &mut Vec<usize>) -> Result<()> {
        let n = self.g.n;
        let mut counts = vec![0usize; n];
        for &c in &colors {
            counts[c] += 1;
        }
        let target = (0..n).find(|&c| counts[c] > 1);
        let Some(cell) = target else {
            self.leaves += 1;
            if self.leaves > MAX_LEAVES {
                return Err(Error::resource("canonical labelling search exceeds the leaf limit"));
            }
            let enc = self.g.encode(&colors);
            match &self.best {
                None => self.best = Some((enc, colors)),
                Some((b, perm)) => {
                    if enc == *b {
                        // perm⁻¹ ∘ colors maps this leaf onto the best one
                        let mut inv = vec![0; n];
                        for (v, &p) in perm.iter().enumerate() {
                            inv[p] = v;
                        }
                        let sigma: Vec<usize> = colors.iter().map(|&c| inv[c]).collect();
                        self.autos.push(sigma);
                    } else if enc < *b {
                        self.best = Some((enc, colors));
                    }
                }
            }
            return Ok(());
        };
        let members: Vec<usize> = (0..n).filter(|&v| colors[v] == cell).collect();
        let mut tried: Vec<usize> = Vec::new();
        for &v in &members {
            if tried.iter().any(|&u| self.equivalent(u, v, path)) {
                continue;
            }
            tried.push(v);
            let split: Vec<usize> = (0..n)
                .map(|x| 2 * colors[x] + usize::from(colors[x] == cell && x != v))
                .collect();
            let refined = self.g.refine(split);
            path.push(v);
            self.run(refined, path)?;
            path.pop();
        }
        Ok(())
    }

    /// Whether some known automorphism fixing `path` pointwise, or the
    /// transposition of `u` and `v`, maps `u` to `v`.
    fn equivalent(&self, u: usize, v: usize, path: &[usize]) -> bool {
        let gens: Vec<&Vec<usize>> = self
            .autos
            .iter()
            .filter(|s| path.iter().all(|&p| s[p] == p))
            .collect();
        if !gens.is_empty() {
            let mut seen = vec![false; self.g.n];
            let mut stack = vec![u];
            seen[u] = true;
            while let Some(x) = stack.pop() {
                if x == v {
                    return true;
                }
                for s in &gens {
                    if !seen[s[x]] {
                        seen[s[x]] = true;
                        stack.push(s[x]);
                    }
                }
            }
        }
        let mut sigma: Vec<usize> = (0..self.g.n).collect();
        sigma.swap(u, v);
        self.g.is_automorphism(&sigma)
    }
}

/// Canonical byte string: equal for two acceptors iff they are isomorphic.
pub fn nfra_canonical(a: &Nfra) -> Result<Vec<u8>> {
    let g = Graph::new(a);
    let seed: Vec<usize> = {
        let sigs: Vec<(bool, usize, Vec<usize>, Vec<usize>)> = (0..g.n)
            .map(|s| {
                let mut o: Vec<usize> = g.out[s].iter().map(|&(l, _)| l).collect();
                let mut i: Vec<usize> = g.inc[s].iter().map(|&(l, _)| l).collect();
                o.sort_unstable();
                i.sort_unstable();
                (s != g.initial, g.rel[s].len(), o, i)
            })
            .collect();
        let mut sorted: Vec<&_> = sigs.iter().collect();
        sorted.sort();
        sorted.dedup();
        sigs.iter().map(|s| sorted.binary_search(&s).unwrap()).collect()
    };
    let colors = g.refine(seed);
    let mut search = Search {
        g: &g,
        best: None,
        autos: Vec::new(),
        leaves: 0,
    };
    if g.n > 0 {
        search.run(colors, &mut Vec::new())?;
    }
    let enc = match search.best {
        Some((enc, _)) => enc,
        None => g.encode(&[]),
    };
    Ok(enc.into_iter().flat_map(u32::to_le_bytes).collect())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn nfra(n: usize, initial: usize, edges: &[(usize, usize, usize)], accept: &[(usize, usize)]) -> Nfra {
        let mut es = vec![Vec::new(); n];
        for &(s, l, t) in edges {
            es[s].push((l, t));
        }
        Nfra {
            num_letters: 3,
            edges: es,
            initial,
            accept: accept.to_vec(),
        }
    }

    fn rename(a: &Nfra, perm: &[usize]) -> Nfra {
        let n = a.num_states();
        let mut es = vec![Vec::new(); n];
        for (s, e) in a.edges.iter().enumerate() {
            for &(l, t) in e {
                es[perm[s]].push((l, perm[t]));
            }
        }
        let mut acc: Vec<(usize, usize)> = a.accept.iter().map(|&(x, y)| (perm[x], perm[y])).collect();
        acc.sort_unstable();
        Nfra {
            num_letters: a.num_letters,
            edges: es,
            initial: perm[a.initial],
            accept: acc,
        }
    }

    #[test]
    fn renaming_invariance() {
        let a = nfra(
            5,
            0,
            &[(0, 0, 1), (0, 1, 2), (1, 2, 3), (2, 2, 3), (3, 0, 0), (4, 1, 4)],
            &[(1, 2), (2, 1), (3, 3)],
        );
        let c = nfra_canonical(&a).unwrap();
        for perm in [[4, 3, 2, 1, 0], [1, 0, 3, 2, 4], [2, 4, 0, 1, 3]] {
            assert_eq!(nfra_canonical(&rename(&a, &perm)).unwrap(), c);
        }
        let mut b = a.clone();
        b.accept = vec![(1, 2), (2, 1)];
        assert_ne!(nfra_canonical(&b).unwrap(), c);
    }

    #[test]
    fn single_state_forms() {
        let empty = nfra(1, 0, &[], &[]);
        let full = nfra(1, 0, &[], &[(0, 0)]);
        assert_ne!(nfra_canonical(&empty).unwrap(), nfra_canonical(&full).unwrap());
    }

    #[test]
    fn highly_symmetric_graphs_terminate() {
        // many interchangeable isolated states and a large cycle
        let n = 60;
        let mut edges = Vec::new();
        for i in 1..30 {
            edges.push((i, 0, (i % 29) + 1));
        }
        let a = nfra(n, 0, &edges, &[]);
        let c = nfra_canonical(&a).unwrap();
        let perm: Vec<usize> = (0..n).map(|i| if i == 0 { 0 } else { n - i }).collect();
        assert_eq!(nfra_canonical(&rename(&a, &perm)).unwrap(), c);
    }

    #[test]
    fn non_isomorphic_with_equal_colour_statistics() {
        // two 3-cycles versus one 6-cycle
        let two: Vec<(usize, usize, usize)> = vec![(1, 0, 2), (2, 0, 3), (3, 0, 1), (4, 0, 5), (5, 0, 6), (6, 0, 4)];
        let one: Vec<(usize, usize, usize)> = vec![(1, 0, 2), (2, 0, 3), (3, 0, 4), (4, 0, 5), (5, 0, 6), (6, 0, 1)];
        assert_ne!(
            nfra_canonical(&nfra(7, 0, &two, &[])).unwrap(),
            nfra_canonical(&nfra(7, 0, &one, &[])).unwrap()
        );
    }
}
