use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::ParityCheckMatrix;
use crate::error::{Error, Result};

const CLEANUP_PASSES: usize = 64;
const SWAP_ATTEMPTS: usize = 64;

struct Graph {
    edges: Vec<(usize, usize)>,
    var_checks: Vec<Vec<usize>>,
    check_vars: Vec<Vec<usize>>,
}

impl Graph {
    fn multiplicity(&self, v: usize, c: usize) -> usize {
        self.var_checks[v].iter().filter(|&&x| x == c).count()
    }

    fn in_four_cycle(&self, v: usize, c: usize) -> bool {
        self.var_checks[v].iter().filter(|&&c2| c2 != c).any(|&c2| {
            self.check_vars[c2]
                .iter()
                .filter(|&&v2| v2 != v)
                .any(|&v2| self.var_checks[v2].contains(&c))
        })
    }

    /// 2 for a parallel edge, 1 for an edge on a 4-cycle, 0 otherwise.
    fn badness(&self, e: usize) -> usize {
        let (v, c) = self.edges[e];
        if self.multiplicity(v, c) > 1 {
            2
        } else {
            usize::from(self.in_four_cycle(v, c))
        }
    }

    fn remove(list: &mut Vec<usize>, x: usize) {
        let i = list.iter().position(|&y| y == x).expect("edge present");
        list.swap_remove(i);
    }

    /// Exchanges the check ends of edges `a` and `b`.
    fn swap_checks(&mut self, a: usize, b: usize) {
        let (va, ca) = self.edges[a];
        let (vb, cb) = self.edges[b];
        Self::remove(&mut self.var_checks[va], ca);
        Self::remove(&mut self.var_checks[vb], cb);
        Self::remove(&mut self.check_vars[ca], va);
        Self::remove(&mut self.check_vars[cb], vb);
        self.var_checks[va].push(cb);
        self.var_checks[vb].push(ca);
        self.check_vars[cb].push(va);
        self.check_vars[ca].push(vb);
        self.edges[a] = (va, cb);
        self.edges[b] = (vb, ca);
    }
}

/// Random `(dv, dc)`-regular parity-check matrix with `n·dv/dc` checks.
///
/// Edges are paired by a random permutation of check sockets, then local
/// check swaps remove parallel edges and break as many 4-cycles as a bounded
/// number of passes allows. The result is a pure function of the arguments.
pub fn random_regular_code(n: usize, dv: usize, dc: usize, seed: u64) -> Result<ParityCheckMatrix> {
    if n == 0 || dv == 0 || dc == 0 {
        return Err(Error::config("code", "n, dv and dc must be positive"));
    }
    if (n * dv) % dc != 0 {
        return Err(Error::config(
            "code",
            format!("n·dv = {} is not divisible by dc = {dc}", n * dv),
        ));
    }
    let m = n * dv / dc;
    if dv > m || dc > n {
        return Err(Error::config(
            "code",
            format!("degrees ({dv}, {dc}) infeasible without parallel edges for n = {n}"),
        ));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut sockets: Vec<usize> = (0..m).flat_map(|c| std::iter::repeat_n(c, dc)).collect();
    sockets.shuffle(&mut rng);
    let edges: Vec<(usize, usize)> = (0..n)
        .flat_map(|v| std::iter::repeat_n(v, dv))
        .zip(sockets)
        .collect();
    let mut g = Graph {
        var_checks: vec![Vec::with_capacity(dv); n],
        check_vars: vec![Vec::with_capacity(dc); m],
        edges,
    };
    for &(v, c) in &g.edges {
        g.var_checks[v].push(c);
        g.check_vars[c].push(v);
    }

    let num_edges = g.edges.len();
    for _ in 0..CLEANUP_PASSES {
        let bad: Vec<usize> = (0..num_edges).filter(|&e| g.badness(e) > 0).collect();
        if bad.is_empty() {
            break;
        }
        for e in bad {
            let before_e = g.badness(e);
            if before_e == 0 {
                continue;
            }
            for _ in 0..SWAP_ATTEMPTS {
                let f = rng.random_range(0..num_edges);
                if f == e || g.edges[f].1 == g.edges[e].1 {
                    continue;
                }
                let before = before_e + g.badness(f);
                g.swap_checks(e, f);
                if g.badness(e) + g.badness(f) < before {
                    break;
                }
                g.swap_checks(e, f);
            }
        }
    }

    let mut rows = g.check_vars;
    for (c, row) in rows.iter_mut().enumerate() {
        row.sort_unstable();
        if row.windows(2).any(|w| w[0] == w[1]) {
            return Err(Error::config(
                "code",
                format!("could not remove parallel edges at check {c}; try another seed"),
            ));
        }
    }
    ParityCheckMatrix::from_rows(n, rows)
}

/// Number of variable pairs that share two or more checks.
pub fn count_four_cycles(h: &ParityCheckMatrix) -> usize {
    let mut count = 0;
    let mut seen = vec![usize::MAX; h.n()];
    for v in 0..h.n() {
        for &c in h.col(v) {
            for &v2 in h.row(c) {
                if v2 <= v {
                    continue;
                }
                if seen[v2] == v {
                    count += 1;
                } else {
                    seen[v2] = v;
                }
            }
        }
    }
    count
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn small_regular_degrees() {
        let h = random_regular_code(12, 3, 6, 1).unwrap();
        assert_eq!(h.m_rows(), 6);
        assert!(h.cols().iter().all(|c| c.len() == 3));
        assert!(h.rows().iter().all(|r| r.len() == 6));
    }

    #[test]
    fn deterministic_given_seed() {
        assert_eq!(
            random_regular_code(96, 3, 6, 5).unwrap(),
            random_regular_code(96, 3, 6, 5).unwrap()
        );
        assert_ne!(
            random_regular_code(96, 3, 6, 5).unwrap(),
            random_regular_code(96, 3, 6, 6).unwrap()
        );
    }

    #[test]
    fn infeasible_degrees() {
        assert!(matches!(random_regular_code(10, 3, 4, 0), Err(Error::Config { .. })));
        assert!(random_regular_code(0, 3, 6, 0).is_err());
    }

    #[test]
    fn medium_code_is_four_cycle_free() {
        let h = random_regular_code(1000, 3, 6, 3).unwrap();
        assert_eq!(count_four_cycles(&h), 0);
    }

    #[test]
    fn four_cycle_counter() {
        let h = ParityCheckMatrix::from_rows(3, vec![vec![0, 1], vec![0, 1, 2]]).unwrap();
        assert_eq!(count_four_cycles(&h), 1);
    }
}
