//! Closed-relation dynamics on a finite space.
//!
//! A [`PartialRelation`] is a relation of a space to itself in which some points may
//! have no successors. It is the only place where empty images are admitted: a map
//! `f : A → 2^X` with `A ⊊ X` read as a dynamical system on `X` strands every orbit
//! that leaves `A`. Extending `f` to a total map removes every such dead end.

use std::collections::VecDeque;
use std::sync::Arc;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::metric::FiniteMetricSpace;
use crate::par;
use crate::relation::{same_space, SetValuedMap};
use crate::set::IndexSet;

#[derive(Clone, Debug, PartialEq)]
pub struct PartialRelation {
    space: Arc<FiniteMetricSpace>,
    rows: Vec<IndexSet>,
}

/// An eventually periodic trajectory: `prefix` followed by `cycle` repeated forever.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Lasso {
    pub prefix: Vec<usize>,
    pub cycle: Vec<usize>,
}

impl Lasso {
    /// The first `len` points of the infinite trajectory.
    pub fn unroll(&self, len: usize) -> Vec<usize> {
        self.prefix.iter().chain(self.cycle.iter().cycle()).copied().take(len).collect()
    }
}

impl PartialRelation {
    /// Relaxed constructor: points without pairs simply have no successors.
    pub fn from_pairs(space: Arc<FiniteMetricSpace>, pairs: impl IntoIterator<Item = (usize, usize)>) -> Result<Self> {
        let n = space.len();
        let mut rows = vec![IndexSet::empty(n); n];
        for (x, y) in pairs {
            space.check_index(x)?;
            space.check_index(y)?;
            rows[x].insert(y);
        }
        Ok(PartialRelation { space, rows })
    }

    /// Reads a self-map as dynamics; points outside its support have no successors.
    pub fn from_map(map: &SetValuedMap) -> Result<Self> {
        if !same_space(map.domain(), map.codomain()) {
            return Err(Error::SpaceMismatch("dynamics need a map from a space to itself"));
        }
        let n = map.domain().len();
        let rows = (0..n)
            .map(|x| if map.support().contains(x) { map.row(x).clone() } else { IndexSet::empty(n) })
            .collect();
        Ok(PartialRelation { space: map.domain().clone(), rows })
    }

    pub fn space(&self) -> &Arc<FiniteMetricSpace> {
        &self.space
    }

    pub fn len(&self) -> usize {
        self.rows.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }

    pub fn successors(&self, x: usize) -> &IndexSet {
        &self.rows[x]
    }

    pub fn is_total(&self) -> bool {
        self.rows.iter().all(|r| !r.is_empty())
    }

    /// Points with no successor.
    pub fn dead_ends(&self) -> IndexSet {
        let mut out = IndexSet::empty(self.len());
        for x in (0..self.len()).filter(|&x| self.rows[x].is_empty()) {
            out.insert(x);
        }
        out
    }

    /// Adds pairs; used to test monotonicity in the graph.
    pub fn with_pairs(&self, pairs: impl IntoIterator<Item = (usize, usize)>) -> Result<Self> {
        let mut out = self.clone();
        for (x, y) in pairs {
            self.space.check_index(x)?;
            self.space.check_index(y)?;
            out.rows[x].insert(y);
        }
        Ok(out)
    }

    pub fn to_map(&self) -> Result<SetValuedMap> {
        SetValuedMap::new(
            self.space.clone(),
            self.space.clone(),
            (0..self.len()).flat_map(|x| self.rows[x].iter().map(move |y| (x, y))),
        )
    }

    /// Whether consecutive points of `seq` are all related.
    pub fn is_trajectory(&self, seq: &[usize]) -> Result<bool> {
        if seq.is_empty() {
            return Err(Error::EmptySet("trajectory"));
        }
        for &p in seq {
            self.space.check_index(p)?;
        }
        Ok(seq.windows(2).all(|w| self.rows[w[0]].contains(w[1])))
    }

    /// One-step image of a set; points without successors contribute nothing.
    pub fn forward_image_set(&self, s: &IndexSet) -> Result<IndexSet> {
        s.check_universe(self.len())?;
        let mut out = IndexSet::empty(self.len());
        for x in s.iter() {
            out.union_with(&self.rows[x]);
        }
        Ok(out)
    }

    /// The `k`-fold forward image of `s`; `k = 0` returns `s`.
    pub fn forward_reach(&self, s: &IndexSet, k: usize) -> Result<IndexSet> {
        let mut cur = s.resized(self.len())?;
        for _ in 0..k {
            cur = self.forward_image_set(&cur)?;
        }
        Ok(cur)
    }

    /// Least fixpoint of `S ↦ {x} ∪ F(S)`: every point some trajectory from `x` visits.
    pub fn reachable_set(&self, x: usize) -> Result<IndexSet> {
        self.space.check_index(x)?;
        Ok(self.reach_from(x))
    }

    fn reach_from(&self, x: usize) -> IndexSet {
        let mut seen = IndexSet::singleton(self.len(), x).expect("checked");
        let mut frontier = seen.clone();
        while !frontier.is_empty() {
            let mut next = IndexSet::empty(self.len());
            for p in frontier.iter() {
                next.union_with(&self.rows[p]);
            }
            frontier = next.difference(&seen);
            seen.union_with(&frontier);
        }
        seen
    }

    /// Reachable sets of every point, in index order.
    pub fn all_reachable_sets(&self) -> Vec<IndexSet> {
        par::map_range(self.len(), |x| self.reach_from(x))
    }

    /// Strongly connected components, each listed in ascending order.
    pub fn strongly_connected_components(&self) -> Vec<Vec<usize>> {
        tarjan(&self.rows)
    }

    /// Points lying on a cycle: in a component of size ≥ 2 or carrying a self-loop.
    pub fn recurrent_points(&self) -> IndexSet {
        let mut out = IndexSet::empty(self.len());
        for comp in self.strongly_connected_components() {
            if comp.len() > 1 || self.rows[comp[0]].contains(comp[0]) {
                for p in comp {
                    out.insert(p);
                }
            }
        }
        out
    }

    /// Whether some infinite forward trajectory starts at `x`, i.e. `x` reaches a cycle.
    pub fn exists_infinite_trajectory(&self, x: usize) -> Result<bool> {
        self.space.check_index(x)?;
        Ok(self.reach_from(x).intersects(&self.recurrent_points()))
    }

    /// Points that start an infinite trajectory.
    pub fn infinite_trajectory_points(&self) -> IndexSet {
        let recurrent = self.recurrent_points();
        let hits = par::map_range(self.len(), |x| self.reach_from(x).intersects(&recurrent));
        let mut out = IndexSet::empty(self.len());
        for x in (0..self.len()).filter(|&x| hits[x]) {
            out.insert(x);
        }
        out
    }

    /// A shortest path from `x` to a cycle, then that cycle.
    pub fn infinite_trajectory_witness(&self, x: usize) -> Result<Option<Lasso>> {
        self.space.check_index(x)?;
        let recurrent = self.recurrent_points();
        let Some(path) = self.shortest_path(x, |p| recurrent.contains(p), None) else {
            return Ok(None);
        };
        let entry = *path.last().expect("path is nonempty");
        let prefix = path[..path.len() - 1].to_vec();
        let cycle = if self.rows[entry].contains(entry) {
            vec![entry]
        } else {
            let comp = self
                .strongly_connected_components()
                .into_iter()
                .find(|c| c.contains(&entry))
                .expect("every point has a component");
            let within = IndexSet::from_indices(self.len(), comp).expect("in range");
            let back_to_entry = |p: usize| p != entry && self.rows[p].contains(entry);
            self.shortest_path(entry, back_to_entry, Some(&within)).expect("component of size ≥ 2 has a cycle")
        };
        Ok(Some(Lasso { prefix, cycle }))
    }

    /// BFS from `start` to the first point satisfying `goal`, optionally staying in `within`.
    fn shortest_path(&self, start: usize, goal: impl Fn(usize) -> bool, within: Option<&IndexSet>) -> Option<Vec<usize>> {
        let n = self.len();
        let mut parent = vec![usize::MAX; n];
        parent[start] = start;
        let mut queue = VecDeque::from([start]);
        while let Some(p) = queue.pop_front() {
            if goal(p) {
                let mut path = vec![p];
                let mut cur = p;
                while cur != start {
                    cur = parent[cur];
                    path.push(cur);
                }
                path.reverse();
                return Some(path);
            }
            for q in self.rows[p].iter() {
                if parent[q] == usize::MAX && within.is_none_or(|w| w.contains(q)) {
                    parent[q] = p;
                    queue.push_back(q);
                }
            }
        }
        None
    }
}

/// Iterative Tarjan over adjacency bitsets.
fn tarjan(rows: &[IndexSet]) -> Vec<Vec<usize>> {
    const UNSEEN: usize = usize::MAX;
    let n = rows.len();
    let succ: Vec<Vec<usize>> = rows.iter().map(IndexSet::to_vec).collect();
    let mut index = vec![UNSEEN; n];
    let mut low = vec![0; n];
    let mut on_stack = vec![false; n];
    let mut stack = Vec::new();
    let mut components = Vec::new();
    let mut counter = 0;

    for root in 0..n {
        if index[root] != UNSEEN {
            continue;
        }
        // (node, next successor position)
        let mut call = vec![(root, 0usize)];
        index[root] = counter;
        low[root] = counter;
        counter += 1;
        stack.push(root);
        on_stack[root] = true;

        while let Some(&mut (v, ref mut pos)) = call.last_mut() {
            if let Some(&w) = succ[v].get(*pos) {
                *pos += 1;
                if index[w] == UNSEEN {
                    index[w] = counter;
                    low[w] = counter;
                    counter += 1;
                    stack.push(w);
                    on_stack[w] = true;
                    call.push((w, 0));
                } else if on_stack[w] {
                    low[v] = low[v].min(index[w]);
                }
                continue;
            }
            call.pop();
            if let Some(&(parent, _)) = call.last() {
                low[parent] = low[parent].min(low[v]);
            }
            if low[v] == index[v] {
                let mut comp = Vec::new();
                loop {
                    let w = stack.pop().expect("component root is on the stack");
                    on_stack[w] = false;
                    comp.push(w);
                    if w == v {
                        break;
                    }
                }
                comp.sort_unstable();
                components.push(comp);
            }
        }
    }
    components
}

#[cfg(test)]
mod tests {
    use super::*;

    fn space(n: usize) -> Arc<FiniteMetricSpace> {
        Arc::new(FiniteMetricSpace::from_line(&(0..n).map(|i| i as f64).collect::<Vec<_>>()).unwrap())
    }

    fn rel(n: usize, pairs: &[(usize, usize)]) -> PartialRelation {
        PartialRelation::from_pairs(space(n), pairs.iter().copied()).unwrap()
    }

    #[test]
    fn trajectories() {
        let r = rel(3, &[(0, 1), (1, 2), (2, 2)]);
        assert!(r.is_trajectory(&[1]).unwrap());
        assert!(r.is_trajectory(&[2, 2, 2]).unwrap());
        assert!(r.is_trajectory(&[0, 1, 2]).unwrap());
        assert!(!r.is_trajectory(&[0, 2]).unwrap());
        assert!(r.is_trajectory(&[]).is_err());
        assert!(r.is_trajectory(&[0, 9]).is_err());
    }

    #[test]
    fn reachability() {
        let id = rel(3, &[(0, 0), (1, 1), (2, 2)]);
        assert_eq!(id.reachable_set(1).unwrap().to_vec(), vec![1]);
        let cyc = rel(3, &[(0, 1), (1, 2), (2, 0)]);
        assert_eq!(cyc.reachable_set(0).unwrap().to_vec(), vec![0, 1, 2]);
        let full = rel(3, &(0..3).flat_map(|x| (0..3).map(move |y| (x, y))).collect::<Vec<_>>());
        assert_eq!(full.reachable_set(2).unwrap().len(), 3);
        let s = IndexSet::from_indices(3, [0]).unwrap();
        assert_eq!(cyc.forward_reach(&s, 0).unwrap(), s);
        assert_eq!(cyc.forward_reach(&s, 2).unwrap().to_vec(), vec![2]);
    }

    #[test]
    fn stranded_orbit() {
        // f(a) = {b} on A = {a}; nothing leaves b
        let r = rel(2, &[(0, 1)]);
        assert!(!r.exists_infinite_trajectory(0).unwrap());
        assert!(r.infinite_trajectory_witness(0).unwrap().is_none());
        assert_eq!(r.dead_ends().to_vec(), vec![1]);
    }

    #[test]
    fn witness_is_a_trajectory() {
        let r = rel(6, &[(0, 1), (1, 2), (2, 3), (3, 4), (4, 2), (5, 5)]);
        let lasso = r.infinite_trajectory_witness(0).unwrap().unwrap();
        assert_eq!(lasso.prefix, vec![0, 1]);
        assert_eq!(lasso.cycle, vec![2, 3, 4]);
        assert!(r.is_trajectory(&lasso.unroll(20)).unwrap());
        assert_eq!(r.infinite_trajectory_witness(5).unwrap().unwrap().cycle, vec![5]);
    }

    #[test]
    fn components() {
        let r = rel(5, &[(0, 1), (1, 0), (1, 2), (3, 3)]);
        let mut comps = r.strongly_connected_components();
        comps.sort();
        assert_eq!(comps, vec![vec![0, 1], vec![2], vec![3], vec![4]]);
        assert_eq!(r.recurrent_points().to_vec(), vec![0, 1, 3]);
        assert_eq!(r.infinite_trajectory_points().to_vec(), vec![0, 1, 3]);
    }

    #[test]
    fn total_relations_always_continue() {
        let r = rel(4, &[(0, 1), (1, 2), (2, 3), (3, 1)]);
        assert!(r.is_total());
        assert!((0..4).all(|x| r.exists_infinite_trajectory(x).unwrap()));
    }
}
