//! Offline duty cycling: with both harvest traces known for the whole
//! period, pick every synchronous edge, then let each leftover vertex bank
//! toward the nearest earlier leftover vertex of the other device.

use serde::ser::SerializeStruct;
use serde::{Serialize, Serializer};

use crate::params::{Efficiency, Probability};
use crate::state_graph::{Edge, Matching, StateGraph};

#[derive(Debug, Clone, PartialEq)]
pub struct OfflineResult {
    pub matching: Matching,
    pub sync_count: usize,
    pub async_count: usize,
    pub cat_total: f64,
    pub sat_total: f64,
}

impl OfflineResult {
    pub(crate) fn from_matching(matching: Matching) -> Self {
        OfflineResult {
            sync_count: matching.sync_count(),
            async_count: matching.async_count(),
            cat_total: matching.total_weight(),
            sat_total: matching.sync_weight(),
            matching,
        }
    }
}

impl Serialize for OfflineResult {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        let mut st = s.serialize_struct("OfflineResult", 5)?;
        st.serialize_field("sync", &self.sync_count)?;
        st.serialize_field("async", &self.async_count)?;
        st.serialize_field("cat", &self.cat_total)?;
        st.serialize_field("sat", &self.sat_total)?;
        st.serialize_field("edges", self.matching.edges())?;
        st.end()
    }
}

/// Runs the three steps on a state graph.
///
/// 1. Equal slots on both sides become synchronous edges.
/// 2. Leftover U vertexes, ascending, each take the unmatched V vertex with
///    the largest slot strictly below their own.
/// 3. Leftover V vertexes do the same against the U vertexes still free.
///
/// Sweeping the merged timeline with a stack of free opposite-side vertexes
/// gives exactly the "largest earlier free slot" choice, in linear time.
pub fn offline_duty_cycle(graph: &StateGraph) -> OfflineResult {
    let (a, b) = (&graph.set_a, &graph.set_b);
    let mut edges = Vec::with_capacity(a.len().min(b.len()));
    let mut only_a = Vec::new();
    let mut only_b = Vec::new();

    let (mut i, mut j) = (0, 0);
    while i < a.len() || j < b.len() {
        match (a.get(i), b.get(j)) {
            (Some(&x), Some(&y)) if x == y => {
                edges.push(Edge::new(x, y));
                i += 1;
                j += 1;
            }
            (Some(&x), Some(&y)) if x < y => {
                only_a.push(x);
                i += 1;
            }
            (Some(&x), None) => {
                only_a.push(x);
                i += 1;
            }
            (_, Some(&y)) => {
                only_b.push(y);
                j += 1;
            }
            (None, None) => unreachable!(),
        }
    }

    let (pairs, rest_a, rest_b) = nearest_backward(&only_a, &only_b);
    edges.extend(pairs.into_iter().map(|(u, v)| Edge::new(u, v)));
    let (pairs, _, _) = nearest_backward(&rest_b, &rest_a);
    edges.extend(pairs.into_iter().map(|(v, u)| Edge::new(u, v)));

    let matching = Matching::from_edges(edges, graph.eta).expect("offline edges are exclusive by construction");
    OfflineResult::from_matching(matching)
}

/// Each searcher (ascending) pairs with the largest free target slot below
/// it. Returns `(searcher, target)` pairs plus unmatched searchers and
/// targets, both ascending. Slots are assumed disjoint between the lists.
fn nearest_backward(searchers: &[usize], targets: &[usize]) -> (Vec<(usize, usize)>, Vec<usize>, Vec<usize>) {
    let mut pairs = Vec::new();
    let mut lonely = Vec::new();
    let mut free: Vec<usize> = Vec::new();
    let mut t = 0;
    for &s in searchers {
        while t < targets.len() && targets[t] < s {
            free.push(targets[t]);
            t += 1;
        }
        match free.pop() {
            Some(target) => pairs.push((s, target)),
            None => lonely.push(s),
        }
    }
    free.extend_from_slice(&targets[t..]);
    (pairs, lonely, free)
}

/// Closed-form expected common active time of the offline algorithm under
/// i.i.d. arrivals: `|T| p [p + 2 eta (1 - p)]`.
pub fn expected_cat(period_len: usize, p: Probability, eta: Efficiency) -> f64 {
    let (p, eta) = (p.get(), eta.get());
    period_len as f64 * p * (p + 2.0 * eta * (1.0 - p))
}

#[cfg(test)]
mod tests {
    use super::*;

    const ETA: Efficiency = Efficiency::DEFAULT;

    fn graph(a: &[usize], b: &[usize], len: usize) -> StateGraph {
        StateGraph::from_sets(a.to_vec(), b.to_vec(), ETA, len).unwrap()
    }

    fn sorted_edges(r: &OfflineResult) -> Vec<(usize, usize)> {
        let mut e: Vec<_> = r.matching.edges().iter().map(|e| (e.u_slot, e.v_slot)).collect();
        e.sort_unstable();
        e
    }

    #[test]
    fn walkthrough_instance() {
        let r = offline_duty_cycle(&graph(&[1, 4, 6, 8], &[1, 3, 6, 9], 9));
        assert_eq!(sorted_edges(&r), vec![(1, 1), (4, 3), (6, 6), (8, 9)]);
        assert_eq!((r.sync_count, r.async_count), (2, 2));
        assert_eq!(r.cat_total, 3.5);
        assert_eq!(r.sat_total, 2.0);
    }

    #[test]
    fn full_overlap_is_all_sync() {
        let k: Vec<usize> = (1..=7).collect();
        let r = offline_duty_cycle(&graph(&k, &k, 7));
        assert_eq!((r.sync_count, r.async_count), (7, 0));
        assert_eq!(r.cat_total, 7.0);
    }

    #[test]
    fn empty_graph() {
        let r = offline_duty_cycle(&graph(&[], &[], 4));
        assert!(r.matching.is_empty());
        assert_eq!(r.cat_total, 0.0);
    }

    #[test]
    fn step_three_picks_nearest_earlier_u() {
        // U at 2 and 5; V at 6 and 7. Step 2 finds nothing; step 3 pairs 6->5, 7->2.
        let r = offline_duty_cycle(&graph(&[2, 5], &[6, 7], 8));
        assert_eq!(sorted_edges(&r), vec![(2, 7), (5, 6)]);
    }

    #[test]
    fn vertex_without_earlier_partner_stays_unmatched() {
        let r = offline_duty_cycle(&graph(&[3], &[], 4));
        assert!(r.matching.is_empty());
    }

    #[test]
    fn expected_cat_values() {
        let p = |x| Probability::new(x).unwrap();
        assert_eq!(expected_cat(1000, p(0.5), ETA), 625.0);
        assert_eq!(expected_cat(1000, p(0.0), ETA), 0.0);
        assert_eq!(expected_cat(1000, p(1.0), ETA), 1000.0);
        assert!((expected_cat(1000, p(0.2), ETA) - 280.0).abs() < 1e-9);
        assert!((expected_cat(1000, p(0.8), ETA) - 880.0).abs() < 1e-9);
    }

    #[test]
    fn json_shape() {
        let r = offline_duty_cycle(&graph(&[1, 4, 6, 8], &[1, 3, 6, 9], 9));
        let json = serde_json::to_string(&r).unwrap();
        assert!(json.starts_with(r#"{"sync":2,"async":2,"cat":3.5,"sat":2.0,"edges":[{"u":1,"v":1,"kind":"sync"}"#));
    }
}
