//! Set-valued maps stored as total relations.
//!
//! A [`SetValuedMap`] lives between two finite spaces and is defined on a nonempty
//! *support* of its domain: the whole domain for a map `X → 2^Y`, or a closed subset
//! `A` for a map `A → 2^Y`. All indices stay ambient, so a map defined on `A ⊆ X` can
//! be compared to, composed with, or extended to a map on `X` without renumbering.
//! Every point of the support has a nonempty image.

use std::fmt::Write as _;
use std::sync::Arc;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::metric::{dist_to_set_unchecked, ClosedSubset, FiniteMetricSpace};
use crate::par;
use crate::set::IndexSet;

#[derive(Clone, Debug)]
pub struct SetValuedMap {
    domain: Arc<FiniteMetricSpace>,
    codomain: Arc<FiniteMetricSpace>,
    support: IndexSet,
    rows: Vec<IndexSet>,
}

pub(crate) fn same_space(a: &Arc<FiniteMetricSpace>, b: &Arc<FiniteMetricSpace>) -> bool {
    Arc::ptr_eq(a, b) || **a == **b
}

impl SetValuedMap {
    /// A map defined on the whole domain.
    pub fn new(
        domain: Arc<FiniteMetricSpace>,
        codomain: Arc<FiniteMetricSpace>,
        pairs: impl IntoIterator<Item = (usize, usize)>,
    ) -> Result<Self> {
        let support = ClosedSubset::whole(&domain);
        Self::on(domain, &support, codomain, pairs)
    }

    /// A map defined on `support`. Pairs whose source lies outside it are rejected.
    pub fn on(
        domain: Arc<FiniteMetricSpace>,
        support: &ClosedSubset,
        codomain: Arc<FiniteMetricSpace>,
        pairs: impl IntoIterator<Item = (usize, usize)>,
    ) -> Result<Self> {
        support.check_space(&domain)?;
        let mut rows = vec![IndexSet::empty(codomain.len()); domain.len()];
        for (x, y) in pairs {
            domain.check_index(x)?;
            codomain.check_index(y)?;
            if !support.contains(x) {
                return Err(Error::OutsideSupport { x, y });
            }
            rows[x].insert(y);
        }
        Self::from_rows(domain, support.members().clone(), codomain, rows)
    }

    pub(crate) fn from_rows(
        domain: Arc<FiniteMetricSpace>,
        support: IndexSet,
        codomain: Arc<FiniteMetricSpace>,
        rows: Vec<IndexSet>,
    ) -> Result<Self> {
        debug_assert_eq!(rows.len(), domain.len());
        if let Some(x) = support.iter().find(|&x| rows[x].is_empty()) {
            return Err(Error::EmptyImage { x });
        }
        Ok(SetValuedMap { domain, codomain, support, rows })
    }

    /// The identity relation on a space.
    pub fn identity(space: Arc<FiniteMetricSpace>) -> Self {
        let n = space.len();
        let rows = (0..n).map(|x| IndexSet::from_indices(n, [x]).expect("in range")).collect();
        SetValuedMap { domain: space.clone(), codomain: space, support: IndexSet::full(n), rows }
    }

    pub fn domain(&self) -> &Arc<FiniteMetricSpace> {
        &self.domain
    }

    pub fn codomain(&self) -> &Arc<FiniteMetricSpace> {
        &self.codomain
    }

    /// The points on which the map is defined.
    pub fn support(&self) -> &IndexSet {
        &self.support
    }

    pub fn support_subset(&self) -> ClosedSubset {
        ClosedSubset::from_set(&self.domain, self.support.clone()).expect("support is nonempty")
    }

    pub fn is_total(&self) -> bool {
        self.support.len() == self.domain.len()
    }

    /// Graph pairs in lexicographic order.
    pub fn pairs(&self) -> Vec<(usize, usize)> {
        self.support.iter().flat_map(|x| self.rows[x].iter().map(move |y| (x, y))).collect()
    }

    pub(crate) fn rows(&self) -> &[IndexSet] {
        &self.rows
    }

    pub(crate) fn row(&self, x: usize) -> &IndexSet {
        &self.rows[x]
    }

    fn check_defined(&self, x: usize) -> Result<()> {
        self.domain.check_index(x)?;
        if self.support.contains(x) {
            Ok(())
        } else {
            Err(Error::NotSubset { what: "point", within: "map support" })
        }
    }

    /// `F(x)`.
    pub fn image(&self, x: usize) -> Result<&IndexSet> {
        self.check_defined(x)?;
        Ok(&self.rows[x])
    }

    /// `⋃_{x ∈ s} F(x)`.
    pub fn forward_image_set(&self, s: &IndexSet) -> Result<IndexSet> {
        if s.is_empty() {
            return Err(Error::EmptySet("forward image source"));
        }
        s.check_universe(self.domain.len())?;
        if !s.resized(self.domain.len())?.is_subset(&self.support) {
            return Err(Error::NotSubset { what: "image source", within: "map support" });
        }
        let mut out = IndexSet::empty(self.codomain.len());
        for x in s.iter() {
            out.union_with(&self.rows[x]);
        }
        Ok(out)
    }

    /// `{x : F(x) ∩ c ≠ ∅}`.
    pub fn lower_preimage(&self, c: &IndexSet) -> Result<IndexSet> {
        if c.is_empty() {
            return Err(Error::EmptySet("lower preimage target"));
        }
        let c = c.resized(self.codomain.len())?;
        Ok(self.collect_support(|row| row.intersects(&c)))
    }

    /// `{x : F(x) ⊆ u}`. An empty `u` yields the empty set.
    pub fn upper_inverse(&self, u: &IndexSet) -> Result<IndexSet> {
        let u = u.resized(self.codomain.len())?;
        Ok(self.collect_support(|row| row.is_subset(&u)))
    }

    fn collect_support(&self, keep: impl Fn(&IndexSet) -> bool) -> IndexSet {
        let mut out = IndexSet::empty(self.domain.len());
        for x in self.support.iter().filter(|&x| keep(&self.rows[x])) {
            out.insert(x);
        }
        out
    }

    /// The same map with its support cut down to `a`.
    pub fn restrict(&self, a: &ClosedSubset) -> Result<SetValuedMap> {
        a.check_space(&self.domain)?;
        if !a.members().is_subset(&self.support) {
            return Err(Error::NotSubset { what: "restriction set", within: "map support" });
        }
        let rows = (0..self.domain.len())
            .map(|x| if a.contains(x) { self.rows[x].clone() } else { IndexSet::empty(self.codomain.len()) })
            .collect();
        Ok(SetValuedMap {
            domain: self.domain.clone(),
            codomain: self.codomain.clone(),
            support: a.members().clone(),
            rows,
        })
    }

    /// Graph equality, including domain, codomain and support.
    pub fn same_graph(&self, other: &SetValuedMap) -> bool {
        same_space(&self.domain, &other.domain)
            && same_space(&self.codomain, &other.codomain)
            && self.support == other.support
            && self.rows == other.rows
    }

    /// Whether every graph pair of `self` is also a pair of `other`.
    pub fn graph_subset_of(&self, other: &SetValuedMap) -> bool {
        same_space(&self.domain, &other.domain)
            && same_space(&self.codomain, &other.codomain)
            && self.support.is_subset(&other.support)
            && self.support.iter().all(|x| self.rows[x].is_subset(&other.rows[x]))
    }

    /// DOT digraph with one edge per graph pair.
    pub fn to_dot(&self) -> String {
        self.to_dot_highlighted(None)
    }

    /// DOT export; points in `highlight` and edges between them are drawn in red.
    pub fn to_dot_highlighted(&self, highlight: Option<&IndexSet>) -> String {
        let shared = same_space(&self.domain, &self.codomain);
        let src = |x: usize| quote(self.domain.label(x));
        let dst = |y: usize| {
            if shared {
                quote(self.codomain.label(y))
            } else {
                quote(&format!("codomain:{}", self.codomain.label(y)))
            }
        };
        let lit = |x: usize| highlight.is_some_and(|h| h.contains(x));
        let mut out = String::from("digraph relation {\n");
        for x in 0..self.domain.len() {
            let style = if lit(x) { " [color=red, fontcolor=red]" } else { "" };
            let _ = writeln!(out, "  {}{};", src(x), style);
        }
        if !shared {
            for y in 0..self.codomain.len() {
                let _ = writeln!(out, "  {} [shape=box];", dst(y));
            }
        }
        for (x, y) in self.pairs() {
            let style = if shared && lit(x) && lit(y) { " [color=red]" } else { "" };
            let _ = writeln!(out, "  {} -> {}{};", src(x), dst(y), style);
        }
        out.push_str("}\n");
        out
    }
}

fn quote(label: &str) -> String {
    format!("\"{}\"", label.replace('\\', "\\\\").replace('"', "\\\""))
}

/// `(f ∘ g)(x) = ⋃_{a ∈ g(x)} f(a)`.
///
/// The codomain of `g` must be the domain space of `f`, and every image of `g` must
/// land inside the support of `f`.
pub fn compose(g: &SetValuedMap, f: &SetValuedMap) -> Result<SetValuedMap> {
    if !same_space(&g.codomain, &f.domain) {
        return Err(Error::SpaceMismatch("codomain of the inner map differs from the domain of the outer map"));
    }
    if g.support.iter().any(|x| !g.rows[x].is_subset(&f.support)) {
        return Err(Error::NotSubset { what: "inner map image", within: "outer map support" });
    }
    let rows = par::map_range(g.domain.len(), |x| {
        let mut out = IndexSet::empty(f.codomain.len());
        if g.support.contains(x) {
            for a in g.rows[x].iter() {
                out.union_with(&f.rows[a]);
            }
        }
        out
    });
    SetValuedMap::from_rows(g.domain.clone(), g.support.clone(), f.codomain.clone(), rows)
}

/// Whether `F` and `f` have identical images at every point of `a`.
pub fn equal_on(big: &SetValuedMap, small: &SetValuedMap, a: &ClosedSubset) -> Result<bool> {
    if !same_space(&big.domain, &small.domain) || !same_space(&big.codomain, &small.codomain) {
        return Err(Error::SpaceMismatch("maps compared on a subset must share domain and codomain"));
    }
    a.check_space(&big.domain)?;
    if !a.members().is_subset(&big.support) || !a.members().is_subset(&small.support) {
        return Err(Error::NotSubset { what: "comparison set", within: "both map supports" });
    }
    Ok(a.iter().all(|x| big.rows[x] == small.rows[x]))
}

/// A failing instance of the modulus condition: `d(x, x′) ≤ δ` yet `y ∈ F(x′)` is
/// farther than `ε` from `F(x)`.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct UscWitness {
    pub x: usize,
    pub x_prime: usize,
    pub y: usize,
    /// `d(x, x′)`.
    pub distance: f64,
    /// `dist(y, F(x))`.
    pub excess: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct UscCheck {
    pub holds: bool,
    /// The violation with the largest excess; ties go to the lexicographically first `(x, x′, y)`.
    pub witness: Option<UscWitness>,
}

fn check_modulus_args(delta: f64, eps: f64) -> Result<()> {
    if delta >= 0.0 && eps >= 0.0 {
        Ok(())
    } else {
        Err(Error::InvalidArgument(format!("delta and eps must be non-negative, got ({delta}, {eps})")))
    }
}

fn worse(a: &UscWitness, b: &UscWitness) -> bool {
    a.excess > b.excess || (a.excess == b.excess && (a.x, a.x_prime, a.y) < (b.x, b.x_prime, b.y))
}

/// Checks `∀ x, x′ ∈ support, d(x, x′) ≤ δ ⇒ F(x′) ⊆ N_ε(F(x))`, where
/// `N_ε(S) = {y : dist(y, S) ≤ ε}`. Comparisons are exact.
pub fn check_usc_modulus(map: &SetValuedMap, delta: f64, eps: f64) -> Result<UscCheck> {
    check_modulus_args(delta, eps)?;
    let support = map.support.to_vec();
    let per_x = par::map_slice(&support, |&x| {
        let fx = &map.rows[x];
        let dx = map.domain.row(x);
        let mut worst: Option<UscWitness> = None;
        for &xp in &support {
            if dx[xp] > delta {
                continue;
            }
            for y in map.rows[xp].iter() {
                let excess = dist_to_set_unchecked(&map.codomain, y, fx);
                if excess > eps {
                    let w = UscWitness { x, x_prime: xp, y, distance: dx[xp], excess };
                    if worst.as_ref().is_none_or(|cur| worse(&w, cur)) {
                        worst = Some(w);
                    }
                }
            }
        }
        worst
    });
    let witness = per_x.into_iter().flatten().reduce(|a, b| if worse(&b, &a) { b } else { a });
    Ok(UscCheck { holds: witness.is_none(), witness })
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct UscRow {
    pub delta: f64,
    pub eps: f64,
    pub holds: bool,
}

/// Measured `(δ, ε)` pairs for one map. A row with `holds = true` was verified over
/// every ordered pair of support points.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct UscCertificate {
    pub rows: Vec<UscRow>,
}

impl UscCertificate {
    pub fn holds(&self, delta: f64, eps: f64) -> Option<bool> {
        self.rows.iter().find(|r| r.delta == delta && r.eps == eps).map(|r| r.holds)
    }
}

/// Evaluates the modulus condition on the grid `deltas × epsilons`.
///
/// Builds the table `excess[x][x′] = max_{y ∈ F(x′)} dist(y, F(x))` once; each grid
/// cell then reduces to a scan over that table.
pub fn usc_certificate(map: &SetValuedMap, deltas: &[f64], epsilons: &[f64]) -> Result<UscCertificate> {
    for &d in deltas {
        for &e in epsilons {
            check_modulus_args(d, e)?;
        }
    }
    let support = map.support.to_vec();
    // (d(x, x'), excess) for every ordered support pair
    let table: Vec<Vec<(f64, f64)>> = par::map_slice(&support, |&x| {
        let fx = &map.rows[x];
        support
            .iter()
            .map(|&xp| {
                let excess = map.rows[xp]
                    .iter()
                    .map(|y| dist_to_set_unchecked(&map.codomain, y, fx))
                    .fold(0.0, f64::max);
                (map.domain.dist(x, xp), excess)
            })
            .collect()
    });
    let cells: Vec<(f64, f64)> = deltas.iter().flat_map(|&d| epsilons.iter().map(move |&e| (d, e))).collect();
    let rows = par::map_slice(&cells, |&(delta, eps)| {
        let holds = table.iter().flatten().all(|&(d, excess)| d > delta || excess <= eps);
        UscRow { delta, eps, holds }
    });
    Ok(UscCertificate { rows })
}
