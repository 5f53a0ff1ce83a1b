//! Exhaustive maximum-weight matching over the energy-state graph.
//!
//! Every `(u, v)` pair is a candidate edge (weight 1 when the slots are equal,
//! `eta` otherwise), and the search walks every assignment of U vertexes to a
//! free V vertex or to nothing. It shares no logic with the offline
//! algorithm and is meant for certification at desk scale only.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::params::Efficiency;
use crate::state_graph::{Edge, Matching, StateGraph};

/// Largest side the search accepts.
pub const ORACLE_MAX_VERTEXES: usize = 10;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct OracleResult {
    pub best_weight: f64,
    pub best_sync_count: usize,
    pub best_async_count: usize,
    pub witness: Matching,
}

/// `(sync, async, edges)` of the best matching so far.
type Best = (usize, usize, Vec<(usize, usize)>);

struct Search<'a> {
    a: &'a [usize],
    b: &'a [usize],
    eta: f64,
    /// Index into `b` of the slot equal to `a[i]`, if any.
    diagonal: Vec<Option<usize>>,
    current: Vec<(usize, usize)>,
    best: Option<Best>,
}

impl Search<'_> {
    fn weight(&self, sync: usize, asyn: usize) -> f64 {
        sync as f64 + self.eta * asyn as f64
    }

    fn beats_best(&self, sync: usize, asyn: usize) -> bool {
        match &self.best {
            None => true,
            Some((bs, ba, _)) => {
                let (w, bw) = (self.weight(sync, asyn), self.weight(*bs, *ba));
                w > bw || (w == bw && sync > *bs)
            }
        }
    }

    /// Branches for `a[i]`: each free V vertex in ascending order, then
    /// "unmatched". This order visits matchings in lexicographic order of
    /// their edge lists, so keeping only strict improvements returns the
    /// lexicographically smallest optimum.
    fn run(&mut self, i: usize, free: u32, sync: usize, asyn: usize) {
        if i == self.a.len() {
            if self.beats_best(sync, asyn) {
                self.best = Some((sync, asyn, self.current.clone()));
            }
            return;
        }
        if let Some((bs, ba, _)) = self.best {
            // Admissible bound: at most min(remaining U, free V) more edges,
            // of which only those whose diagonal partner is free can weigh 1.
            let rem_a = self.a.len() - i;
            let rem_b = free.count_ones() as usize;
            let diag = self.diagonal[i..].iter().filter(|d| d.is_some_and(|j| free & (1 << j) != 0)).count();
            let edges = rem_a.min(rem_b);
            let ones = diag.min(edges);
            let (ub_sync, ub_async) = (sync + ones, asyn + edges - ones);
            let ub = self.weight(ub_sync, ub_async);
            let bw = self.weight(bs, ba);
            if ub < bw || (ub == bw && ub_sync <= bs) {
                return;
            }
        }
        for j in 0..self.b.len() {
            if free & (1 << j) == 0 {
                continue;
            }
            let is_sync = self.a[i] == self.b[j];
            self.current.push((self.a[i], self.b[j]));
            self.run(i + 1, free & !(1 << j), sync + usize::from(is_sync), asyn + usize::from(!is_sync));
            self.current.pop();
        }
        self.run(i + 1, free, sync, asyn);
    }
}

/// Maximum-weight matching by exhaustive search. Ties go to more
/// synchronous edges, then to the lexicographically smallest edge list.
pub fn brute_force_matching(graph: &StateGraph) -> Result<OracleResult> {
    let (a, b) = (&graph.set_a, &graph.set_b);
    if a.len() > ORACLE_MAX_VERTEXES || b.len() > ORACLE_MAX_VERTEXES {
        return Err(Error::OracleBudget { a: a.len(), b: b.len(), limit: ORACLE_MAX_VERTEXES });
    }
    let diagonal = a.iter().map(|x| b.iter().position(|y| y == x)).collect();
    let mut search = Search { a, b, eta: graph.eta.get(), diagonal, current: Vec::new(), best: None };
    let all_free = (1u32 << b.len()) - 1;
    search.run(0, all_free, 0, 0);
    let (sync, asyn, pairs) = search.best.take().expect("the empty matching is always visited");
    let witness = Matching::from_edges(pairs.into_iter().map(|(u, v)| Edge::new(u, v)).collect(), graph.eta)?;
    Ok(OracleResult {
        best_weight: search.weight(sync, asyn),
        best_sync_count: sync,
        best_async_count: asyn,
        witness,
    })
}

/// `n_sync + eta * min(n_a_only, n_b_only)`: the optimum when every leftover
/// pair is usable. An upper-bound cross-check, not ground truth.
pub fn closed_form_optimum(n_sync: usize, n_a_only: usize, n_b_only: usize, eta: Efficiency) -> f64 {
    n_sync as f64 + eta.get() * n_a_only.min(n_b_only) as f64
}

#[cfg(test)]
mod tests {
    use super::*;

    fn graph(a: &[usize], b: &[usize], eta: f64) -> StateGraph {
        let len = a.iter().chain(b).copied().max().unwrap_or(1);
        StateGraph::from_sets(a.to_vec(), b.to_vec(), Efficiency::new(eta).unwrap(), len).unwrap()
    }

    /// Plain enumeration without the bound, for checking the pruned search.
    fn unpruned_best(a: &[usize], b: &[usize], eta: f64) -> (usize, usize) {
        fn go(a: &[usize], b: &[usize], used: &mut Vec<bool>, s: usize, x: usize, eta: f64, best: &mut (usize, usize)) {
            let Some((&head, rest)) = a.split_first() else {
                let w = |(s, x): (usize, usize)| s as f64 + eta * x as f64;
                if w((s, x)) > w(*best) || (w((s, x)) == w(*best) && s > best.0) {
                    *best = (s, x);
                }
                return;
            };
            go(rest, b, used, s, x, eta, best);
            for j in 0..b.len() {
                if !used[j] {
                    used[j] = true;
                    let sync = head == b[j];
                    go(rest, b, used, s + usize::from(sync), x + usize::from(!sync), eta, best);
                    used[j] = false;
                }
            }
        }
        let mut best = (0, 0);
        go(a, b, &mut vec![false; b.len()], 0, 0, eta, &mut best);
        best
    }

    #[test]
    fn walkthrough_optimum() {
        let r = brute_force_matching(&graph(&[1, 4, 6, 8], &[1, 3, 6, 9], 0.75)).unwrap();
        assert_eq!(r.best_weight, 3.5);
        assert_eq!((r.best_sync_count, r.best_async_count), (2, 2));
        assert_eq!(r.witness.total_weight(), 3.5);
    }

    #[test]
    fn trivial_instances() {
        let r = brute_force_matching(&graph(&[1], &[2], 0.6)).unwrap();
        assert_eq!(r.best_weight, 0.6);
        let r = brute_force_matching(&graph(&[], &[], 0.6)).unwrap();
        assert_eq!(r.best_weight, 0.0);
        assert!(r.witness.is_empty());
    }

    #[test]
    fn witness_is_lexicographically_smallest() {
        // Two optimal async pairings: {(1,2),(3,4)} and {(1,4),(3,2)}.
        let r = brute_force_matching(&graph(&[1, 3], &[2, 4], 0.75)).unwrap();
        let mut e: Vec<_> = r.witness.edges().iter().map(|e| (e.u_slot, e.v_slot)).collect();
        e.sort_unstable();
        assert_eq!(e, vec![(1, 2), (3, 4)]);
    }

    #[test]
    fn eta_one_prefers_sync() {
        let r = brute_force_matching(&graph(&[1, 2], &[2, 3], 1.0)).unwrap();
        assert_eq!((r.best_sync_count, r.best_async_count), (1, 1));
    }

    #[test]
    fn refuses_oversized_instances() {
        let big: Vec<usize> = (1..=11).collect();
        let err = brute_force_matching(&graph(&big, &[1], 0.75)).unwrap_err();
        assert!(matches!(err, Error::OracleBudget { a: 11, b: 1, limit: 10 }));
    }

    #[test]
    fn full_budget_instance_completes() {
        let a: Vec<usize> = (1..=10).collect();
        let b: Vec<usize> = (11..=20).collect();
        let r = brute_force_matching(&graph(&a, &b, 0.75)).unwrap();
        assert_eq!((r.best_sync_count, r.best_async_count), (0, 10));
    }

    #[test]
    fn closed_form_values() {
        let eta = |x| Efficiency::new(x).unwrap();
        assert_eq!(closed_form_optimum(2, 2, 2, eta(0.75)), 3.5);
        assert_eq!(closed_form_optimum(4, 0, 0, eta(0.3)), 4.0);
        assert_eq!(closed_form_optimum(0, 3, 1, eta(0.5)), 0.5);
        // Brute force over the 3x1 cross pairs gives the same value.
        let r = brute_force_matching(&graph(&[1, 2, 3], &[4], 0.5)).unwrap();
        assert_eq!(r.best_weight, 0.5);
    }

    #[test]
    fn pruning_preserves_the_optimum() {
        // Every pair of subsets of 1..=6, several efficiencies.
        for eta in [0.25, 0.5, 0.75, 1.0] {
            for ma in 0u32..64 {
                for mb in 0u32..64 {
                    let a: Vec<usize> = (0..6).filter(|k| ma & (1 << k) != 0).map(|k| k + 1).collect();
                    let b: Vec<usize> = (0..6).filter(|k| mb & (1 << k) != 0).map(|k| k + 1).collect();
                    let r = brute_force_matching(&graph(&a, &b, eta)).unwrap();
                    assert_eq!((r.best_sync_count, r.best_async_count), unpruned_best(&a, &b, eta), "{a:?} {b:?}");
                    assert!(r.best_weight <= closed_form_optimum(
                        r.best_sync_count,
                        a.len() - r.best_sync_count,
                        b.len() - r.best_sync_count,
                        Efficiency::new(eta).unwrap(),
                    ) + 1e-12);
                }
            }
        }
    }
}
