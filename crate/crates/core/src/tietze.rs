//! Extension of set-valued maps from a closed subset to the whole space.
//!
//! The main construction takes the nearest-point relation
//! `G = {(x, y) ∈ X × A : d(x, y) = dist(x, A)}` as a map `g : X → 2^A` and
//! extends `f : A → 2^X` by `F = f ∘ g`. Because `g(a) = {a}` on `A`, the extension
//! agrees with `f` there exactly.
//!
//! A single-valued alternative picks one nearest point per `x` (a retraction `r`) and
//! uses `F = f ∘ r`. Its graph is contained in the nearest-point extension.

use std::sync::Arc;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::metric::{components_at_gap, dist_to_set_unchecked, ClosedSubset, FiniteMetricSpace};
use crate::par;
use crate::relation::{compose, equal_on, same_space, SetValuedMap};
use crate::set::IndexSet;

/// Slack used when collecting the nearest points of `A`.
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub enum ArgminTolerance {
    /// Exact for integer-valued spaces, `1e-9 · (1 + dist(x, A))` otherwise.
    #[default]
    Auto,
    /// A fixed non-negative absolute slack.
    Absolute(f64),
}

impl ArgminTolerance {
    fn slack(self, space: &FiniteMetricSpace, nearest: f64) -> f64 {
        match self {
            ArgminTolerance::Auto if space.is_integral() => 0.0,
            ArgminTolerance::Auto => 1e-9 * (1.0 + nearest),
            ArgminTolerance::Absolute(tau) => tau,
        }
    }
}

/// The nearest-point map `g : X → 2^A` under the automatic tolerance.
pub fn nearest_point_graph(space: &Arc<FiniteMetricSpace>, a: &ClosedSubset) -> Result<SetValuedMap> {
    nearest_point_graph_with(space, a, ArgminTolerance::Auto)
}

/// The nearest-point map with an explicit tolerance: `y ∈ g(x)` iff `y ∈ A` and
/// `d(x, y) ≤ dist(x, A) + τ`. Points of `A` always map to themselves alone.
pub fn nearest_point_graph_with(
    space: &Arc<FiniteMetricSpace>,
    a: &ClosedSubset,
    tol: ArgminTolerance,
) -> Result<SetValuedMap> {
    a.check_space(space)?;
    if let ArgminTolerance::Absolute(tau) = tol {
        if !(tau >= 0.0) {
            return Err(Error::InvalidArgument(format!("argmin tolerance must be non-negative, got {tau}")));
        }
    }
    let n = space.len();
    let members = a.members();
    let rows = par::map_range(n, |x| {
        if members.contains(x) {
            return IndexSet::from_indices(n, [x]).expect("in range");
        }
        let nearest = dist_to_set_unchecked(space, x, members);
        let cutoff = nearest + tol.slack(space, nearest);
        let row = space.row(x);
        let mut out = IndexSet::empty(n);
        for y in members.iter().filter(|&y| row[y] <= cutoff) {
            out.insert(y);
        }
        out
    });
    SetValuedMap::from_rows(space.clone(), space.all_points(), space.clone(), rows)
}

fn check_extension_input(space: &Arc<FiniteMetricSpace>, a: &ClosedSubset, f: &SetValuedMap) -> Result<()> {
    a.check_space(space)?;
    if !same_space(space, f.domain()) {
        return Err(Error::SpaceMismatch("map domain is not the ambient space"));
    }
    if f.support() != a.members() {
        return Err(Error::SpaceMismatch("map is not defined exactly on the closed subset"));
    }
    Ok(())
}

/// Extends `f : A → 2^Y` to `F = f ∘ g` on all of `X`.
pub fn extend_usc(space: &Arc<FiniteMetricSpace>, a: &ClosedSubset, f: &SetValuedMap) -> Result<SetValuedMap> {
    extend_usc_with(space, a, f, ArgminTolerance::Auto)
}

pub fn extend_usc_with(
    space: &Arc<FiniteMetricSpace>,
    a: &ClosedSubset,
    f: &SetValuedMap,
    tol: ArgminTolerance,
) -> Result<SetValuedMap> {
    check_extension_input(space, a, f)?;
    let g = nearest_point_graph_with(space, a, tol)?;
    compose(&g, f)
}

/// A single-valued map of `X` onto `A` that fixes `A` pointwise.
#[derive(Clone, Debug, PartialEq)]
pub struct Retraction {
    space: Arc<FiniteMetricSpace>,
    target: ClosedSubset,
    assign: Vec<usize>,
}

impl Retraction {
    pub fn new(space: Arc<FiniteMetricSpace>, target: ClosedSubset, assign: Vec<usize>) -> Result<Self> {
        target.check_space(&space)?;
        if assign.len() != space.len() {
            return Err(Error::InvalidArgument(format!(
                "retraction assigns {} points in a space of {}",
                assign.len(),
                space.len()
            )));
        }
        if let Some(x) = (0..assign.len()).find(|&x| !target.contains(assign[x])) {
            return Err(Error::InvalidArgument(format!("retraction sends {x} to {} outside the target", assign[x])));
        }
        if let Some(a) = target.iter().find(|&a| assign[a] != a) {
            return Err(Error::InvalidArgument(format!("retraction moves target point {a}")));
        }
        Ok(Retraction { space, target, assign })
    }

    pub fn space(&self) -> &Arc<FiniteMetricSpace> {
        &self.space
    }

    pub fn target(&self) -> &ClosedSubset {
        &self.target
    }

    pub fn assign(&self, x: usize) -> usize {
        self.assign[x]
    }

    pub fn assignments(&self) -> &[usize] {
        &self.assign
    }

    /// `{x : r(x) ∈ s}`.
    pub fn pullback(&self, s: &IndexSet) -> IndexSet {
        let mut out = IndexSet::empty(self.space.len());
        for (x, &r) in self.assign.iter().enumerate() {
            if s.contains(r) {
                out.insert(x);
            }
        }
        out
    }

    pub fn as_relation(&self) -> SetValuedMap {
        SetValuedMap::new(self.space.clone(), self.space.clone(), self.assign.iter().copied().enumerate())
            .expect("retractions are total")
    }
}

/// Sends each point to the lowest-index member of its nearest-point set.
///
/// On a sampled continuum this selection can jump across a tie locus; on the finite
/// model any map is continuous.
pub fn nearest_point_retraction(space: &Arc<FiniteMetricSpace>, a: &ClosedSubset) -> Result<Retraction> {
    nearest_point_retraction_with(space, a, ArgminTolerance::Auto)
}

pub fn nearest_point_retraction_with(
    space: &Arc<FiniteMetricSpace>,
    a: &ClosedSubset,
    tol: ArgminTolerance,
) -> Result<Retraction> {
    let g = nearest_point_graph_with(space, a, tol)?;
    let assign = g.rows().iter().map(|row| row.first().expect("g is total")).collect();
    Retraction::new(space.clone(), a.clone(), assign)
}

/// `F(x) = f(r(x))`.
pub fn extend_via_retraction(f: &SetValuedMap, r: &Retraction) -> Result<SetValuedMap> {
    check_extension_input(r.space(), r.target(), f)?;
    compose(&r.as_relation(), f)
}

/// Audit record of a normality separation.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SeparationWitness {
    pub a: usize,
    pub b: usize,
    pub radius: f64,
    #[serde(rename = "U")]
    pub u: IndexSet,
    #[serde(rename = "V")]
    pub v: IndexSet,
    #[serde(rename = "O_A")]
    pub o_a: IndexSet,
    #[serde(rename = "O_B")]
    pub o_b: IndexSet,
}

fn check_disjoint(space: &FiniteMetricSpace, a: &ClosedSubset, b: &ClosedSubset) -> Result<()> {
    a.check_space(space)?;
    b.check_space(space)?;
    match a.members().intersection(b.members()).first() {
        Some(p) => Err(Error::NotDisjoint(p)),
        None => Ok(()),
    }
}

/// The two-valued map `f(A) = {a}`, `f(B) = {b}` on `A ∪ B`.
fn two_point_map(
    space: &Arc<FiniteMetricSpace>,
    a_set: &ClosedSubset,
    b_set: &ClosedSubset,
    a: usize,
    b: usize,
) -> Result<(ClosedSubset, SetValuedMap)> {
    let union = ClosedSubset::from_set(space, a_set.members().union(b_set.members()))?;
    let pairs = a_set.iter().map(|x| (x, a)).chain(b_set.iter().map(|x| (x, b)));
    let f = SetValuedMap::on(space.clone(), &union, space.clone(), pairs)?;
    Ok((union, f))
}

fn open_ball(space: &FiniteMetricSpace, centre: usize, radius: f64) -> IndexSet {
    let mut out = IndexSet::empty(space.len());
    for (y, &d) in space.row(centre).iter().enumerate() {
        if d < radius {
            out.insert(y);
        }
    }
    out
}

/// Separates disjoint closed sets `A`, `B` by disjoint sets `O_A ⊇ A`, `O_B ⊇ B`.
///
/// Takes `a`, `b` as the lowest members of `A` and `B`, extends `f(A) = {a}`,
/// `f(B) = {b}` to `F`, and returns `O_A = {x : F(x) ⊆ U}`, `O_B = {x : F(x) ⊆ V}` for
/// the open balls `U`, `V` of radius `d(a, b) / 3` about `a` and `b`.
pub fn separation_witness(
    space: &Arc<FiniteMetricSpace>,
    a_set: &ClosedSubset,
    b_set: &ClosedSubset,
) -> Result<SeparationWitness> {
    check_disjoint(space, a_set, b_set)?;
    let (a, b) = (a_set.lowest(), b_set.lowest());
    let (union, f) = two_point_map(space, a_set, b_set, a, b)?;
    let big = extend_usc(space, &union, &f)?;
    let radius = space.dist(a, b) / 3.0;
    let u = open_ball(space, a, radius);
    let v = open_ball(space, b, radius);
    let o_a = big.upper_inverse(&u)?;
    let o_b = big.upper_inverse(&v)?;
    if !a_set.members().is_subset(&o_a) || !b_set.members().is_subset(&o_b) {
        return Err(Error::GuaranteeViolated("separating set misses part of its closed set".into()));
    }
    if o_a.intersects(&o_b) {
        return Err(Error::GuaranteeViolated("separating sets intersect".into()));
    }
    Ok(SeparationWitness { a, b, radius, u, v, o_a, o_b })
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ClopenSeparationWitness {
    pub a: usize,
    pub b: usize,
    #[serde(rename = "E")]
    pub clopen: IndexSet,
    /// `{x : F(x) ⊆ E}`.
    pub interior: IndexSet,
    /// `F⁻¹(E) = {x : F(x) ∩ E ≠ ∅}`, a closed neighbourhood of `A` missing `B`.
    pub neighbourhood: IndexSet,
}

/// Builds a closed neighbourhood of `A` disjoint from `B` from a nontrivial clopen `E`.
///
/// `E` must be a union of [`components_at_gap`] classes. The map sends `A` to the
/// lowest point of `E` and `B` to the lowest point outside `E`.
pub fn clopen_separation_witness(
    space: &Arc<FiniteMetricSpace>,
    a_set: &ClosedSubset,
    b_set: &ClosedSubset,
    clopen: &IndexSet,
    gap: f64,
) -> Result<ClopenSeparationWitness> {
    check_disjoint(space, a_set, b_set)?;
    let clopen = clopen.resized(space.len())?;
    if clopen.is_empty() || clopen.len() == space.len() {
        return Err(Error::TrivialClopen);
    }
    if let Some(split) = components_at_gap(space, gap)
        .into_iter()
        .find(|c| c.intersects(&clopen) && !c.is_subset(&clopen))
    {
        return Err(Error::NotClopen { gap, component: split.to_vec() });
    }
    let a = clopen.first().expect("nonempty");
    let b = clopen.complement().first().expect("proper subset");
    let (union, f) = two_point_map(space, a_set, b_set, a, b)?;
    let big = extend_usc(space, &union, &f)?;
    let interior = big.upper_inverse(&clopen)?;
    let neighbourhood = big.lower_preimage(&clopen)?;
    if !a_set.members().is_subset(&interior) || !interior.is_subset(&neighbourhood) {
        return Err(Error::GuaranteeViolated("A ⊆ {F ⊆ E} ⊆ F⁻¹(E) fails".into()));
    }
    if neighbourhood.intersects(b_set.members()) {
        return Err(Error::GuaranteeViolated("F⁻¹(E) meets B".into()));
    }
    Ok(ClopenSeparationWitness { a, b, clopen, interior, neighbourhood })
}

/// Extends and reports whether the result agrees with `f` on `A`.
pub fn extend_and_verify(
    space: &Arc<FiniteMetricSpace>,
    a: &ClosedSubset,
    f: &SetValuedMap,
    tol: ArgminTolerance,
) -> Result<(SetValuedMap, bool)> {
    let big = extend_usc_with(space, a, f, tol)?;
    let agrees = equal_on(&big, f, a)?;
    Ok((big, agrees))
}
