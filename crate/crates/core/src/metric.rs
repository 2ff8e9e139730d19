//! Finite metric spaces and the sampled continua used as their desk-scale models.
//!
//! A [`FiniteMetricSpace`] is a validated dense distance matrix. Point identity is the
//! row index; labels are carried only for display and export.

use std::f64::consts::PI;
use std::fmt;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::par;
use crate::set::IndexSet;

/// Relative slack for axiom checks on matrices with non-integer entries.
pub const RELATIVE_TOLERANCE: f64 = 1e-9;

/// A single metric-axiom failure, naming the offending cells.
#[derive(Clone, Debug, PartialEq, Serialize)]
#[serde(tag = "axiom", rename_all = "snake_case")]
pub enum Violation {
    NonFinite { i: usize, j: usize, value: f64 },
    NonZeroDiagonal { i: usize, value: f64 },
    NonPositive { i: usize, j: usize, value: f64 },
    Asymmetric { i: usize, j: usize },
    /// `dist[i][j] > dist[i][via] + dist[via][j]`.
    Triangle { i: usize, via: usize, j: usize },
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match *self {
            Violation::NonFinite { i, j, value } => write!(f, "non-finite distance {value} at ({i},{j})"),
            Violation::NonZeroDiagonal { i, value } => write!(f, "nonzero self-distance {value} at ({i},{i})"),
            Violation::NonPositive { i, j, value } => write!(f, "non-positive distance {value} at ({i},{j})"),
            Violation::Asymmetric { i, j } => write!(f, "asymmetric at ({i},{j})"),
            Violation::Triangle { i, via, j } => write!(f, "triangle violation at ({i},{via},{j})"),
        }
    }
}

#[derive(Clone, Debug, Default, PartialEq, Serialize)]
pub struct ValidationReport {
    pub violations: Vec<Violation>,
}

impl ValidationReport {
    pub fn is_valid(&self) -> bool {
        self.violations.is_empty()
    }
}

impl fmt::Display for ValidationReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_valid() {
            return f.write_str("valid");
        }
        write!(f, "{} violation(s)", self.violations.len())?;
        for v in self.violations.iter().take(8) {
            write!(f, "; {v}")?;
        }
        if self.violations.len() > 8 {
            f.write_str("; ...")?;
        }
        Ok(())
    }
}

fn is_integral_matrix(dist: &[Vec<f64>]) -> bool {
    dist.iter()
        .flatten()
        .all(|v| v.is_finite() && v.fract() == 0.0 && v.abs() < 9.007_199_254_740_992e15)
}

fn exceeds(lhs: f64, rhs: f64, exact: bool) -> bool {
    if exact {
        lhs > rhs
    } else {
        lhs - rhs > RELATIVE_TOLERANCE * lhs.abs().max(rhs.abs())
    }
}

/// Lists every axiom violation of a square distance matrix.
///
/// Integer-valued matrices are compared exactly; anything else uses a relative
/// tolerance of [`RELATIVE_TOLERANCE`] on the symmetry and triangle checks.
pub fn validate_metric(dist: &[Vec<f64>]) -> Result<ValidationReport> {
    let n = dist.len();
    if let Some((row, r)) = dist.iter().enumerate().find(|(_, r)| r.len() != n) {
        return Err(Error::NotSquare { row, len: r.len(), expected: n });
    }
    let exact = is_integral_matrix(dist);
    let per_row = par::map_range(n, |i| {
        let mut out = Vec::new();
        for j in 0..n {
            let v = dist[i][j];
            if !v.is_finite() {
                out.push(Violation::NonFinite { i, j, value: v });
                continue;
            }
            if i == j {
                if v != 0.0 {
                    out.push(Violation::NonZeroDiagonal { i, value: v });
                }
                continue;
            }
            if v <= 0.0 {
                out.push(Violation::NonPositive { i, j, value: v });
            }
            let w = dist[j][i];
            if i < j && w.is_finite() && (exceeds(v, w, exact) || exceeds(w, v, exact)) {
                out.push(Violation::Asymmetric { i, j });
            }
        }
        for j in 0..n {
            if j == i || !dist[i][j].is_finite() {
                continue;
            }
            for via in 0..n {
                if via == i || via == j {
                    continue;
                }
                let detour = dist[i][via] + dist[via][j];
                if detour.is_finite() && exceeds(dist[i][j], detour, exact) {
                    out.push(Violation::Triangle { i, via, j });
                }
            }
        }
        out
    });
    Ok(ValidationReport { violations: per_row.into_iter().flatten().collect() })
}

/// A finite metric space: labelled points with a validated dense distance matrix.
#[derive(Clone, Debug, PartialEq)]
pub struct FiniteMetricSpace {
    labels: Vec<String>,
    dist: Vec<f64>,
    n: usize,
    integral: bool,
}

impl FiniteMetricSpace {
    pub fn new(labels: Vec<String>, dist: Vec<Vec<f64>>) -> Result<Self> {
        if dist.is_empty() {
            return Err(Error::EmptySet("space"));
        }
        if labels.len() != dist.len() {
            return Err(Error::LabelCount { got: labels.len(), expected: dist.len() });
        }
        let report = validate_metric(&dist)?;
        if !report.is_valid() {
            return Err(Error::InvalidMetric(report));
        }
        let n = dist.len();
        let integral = is_integral_matrix(&dist);
        Ok(FiniteMetricSpace { labels, dist: dist.into_iter().flatten().collect(), n, integral })
    }

    /// Labels points `p0, p1, ...`.
    pub fn from_matrix(dist: Vec<Vec<f64>>) -> Result<Self> {
        let labels = (0..dist.len()).map(|i| format!("p{i}")).collect();
        Self::new(labels, dist)
    }

    /// Points on the real line with `|x - y|` distances.
    pub fn from_line(coords: &[f64]) -> Result<Self> {
        let labels = (0..coords.len()).map(|i| format!("p{i}")).collect();
        Self::from_fn(labels, |i, j| (coords[i] - coords[j]).abs())
    }

    fn from_fn(labels: Vec<String>, d: impl Fn(usize, usize) -> f64) -> Result<Self> {
        let n = labels.len();
        let dist = (0..n).map(|i| (0..n).map(|j| d(i, j)).collect()).collect();
        Self::new(labels, dist)
    }

    pub fn len(&self) -> usize {
        self.n
    }

    pub fn is_empty(&self) -> bool {
        self.n == 0
    }

    /// Whether every distance is an integer, in which case comparisons are exact.
    pub fn is_integral(&self) -> bool {
        self.integral
    }

    pub fn labels(&self) -> &[String] {
        &self.labels
    }

    pub fn label(&self, i: usize) -> &str {
        &self.labels[i]
    }

    #[inline]
    pub fn dist(&self, i: usize, j: usize) -> f64 {
        self.dist[i * self.n + j]
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.dist[i * self.n..(i + 1) * self.n]
    }

    pub fn rows(&self) -> Vec<Vec<f64>> {
        self.dist.chunks(self.n).map(<[f64]>::to_vec).collect()
    }

    pub fn diameter(&self) -> f64 {
        self.dist.iter().copied().fold(0.0, f64::max)
    }

    pub fn all_points(&self) -> IndexSet {
        IndexSet::full(self.n)
    }

    pub(crate) fn check_index(&self, index: usize) -> Result<()> {
        if index < self.n {
            Ok(())
        } else {
            Err(Error::IndexOutOfRange { index, len: self.n })
        }
    }
}

/// A nonempty subset of a finite space. Every subset of a finite metric space is
/// closed, so this is the finite model of a closed `A ⊆ X`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ClosedSubset {
    members: IndexSet,
}

impl ClosedSubset {
    pub fn new<I: IntoIterator<Item = usize>>(space: &FiniteMetricSpace, members: I) -> Result<Self> {
        Self::from_set(space, IndexSet::from_indices(space.len(), members)?)
    }

    pub fn from_set(space: &FiniteMetricSpace, members: IndexSet) -> Result<Self> {
        if members.is_empty() {
            return Err(Error::EmptySet("closed subset"));
        }
        let members = members.resized(space.len())?;
        Ok(ClosedSubset { members })
    }

    pub fn whole(space: &FiniteMetricSpace) -> Self {
        ClosedSubset { members: space.all_points() }
    }

    pub fn members(&self) -> &IndexSet {
        &self.members
    }

    pub fn universe(&self) -> usize {
        self.members.universe()
    }

    pub fn contains(&self, i: usize) -> bool {
        self.members.contains(i)
    }

    pub fn len(&self) -> usize {
        self.members.len()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn lowest(&self) -> usize {
        self.members.first().expect("closed subsets are nonempty")
    }

    pub fn iter(&self) -> impl Iterator<Item = usize> + '_ {
        self.members.iter()
    }

    pub(crate) fn check_space(&self, space: &FiniteMetricSpace) -> Result<()> {
        if self.universe() == space.len() {
            Ok(())
        } else {
            Err(Error::SpaceMismatch("subset was built for a space of a different size"))
        }
    }
}

fn check_set(space: &FiniteMetricSpace, set: &IndexSet, what: &'static str) -> Result<()> {
    if set.is_empty() {
        return Err(Error::EmptySet(what));
    }
    set.check_universe(space.len())
}

/// `min_{a ∈ set} d(x, a)`.
pub fn dist_to_set(space: &FiniteMetricSpace, x: usize, set: &IndexSet) -> Result<f64> {
    space.check_index(x)?;
    check_set(space, set, "distance target")?;
    Ok(dist_to_set_unchecked(space, x, set))
}

pub(crate) fn dist_to_set_unchecked(space: &FiniteMetricSpace, x: usize, set: &IndexSet) -> f64 {
    let row = space.row(x);
    set.iter().map(|a| row[a]).fold(f64::INFINITY, f64::min)
}

/// Hausdorff distance between two nonempty index sets.
pub fn hausdorff_distance(space: &FiniteMetricSpace, s: &IndexSet, t: &IndexSet) -> Result<f64> {
    check_set(space, s, "hausdorff operand")?;
    check_set(space, t, "hausdorff operand")?;
    let excess = |from: &IndexSet, to: &IndexSet| {
        from.iter().map(|p| dist_to_set_unchecked(space, p, to)).fold(0.0, f64::max)
    };
    Ok(excess(s, t).max(excess(t, s)))
}

/// `n` equally spaced points of `[a, b]`; a single point `a` when `n = 1`.
pub fn sample_interval(a: f64, b: f64, n: usize) -> Result<FiniteMetricSpace> {
    FiniteMetricSpace::from_line(&interval_coords(a, b, n)?)
}

fn interval_coords(a: f64, b: f64, n: usize) -> Result<Vec<f64>> {
    if n == 0 {
        return Err(Error::InvalidArgument("interval sample needs at least 1 point".into()));
    }
    if n > 1 && !(a < b) {
        return Err(Error::InvalidArgument(format!("interval endpoints must satisfy a < b, got [{a}, {b}]")));
    }
    if n == 1 {
        return Ok(vec![a]);
    }
    let span = b - a;
    let last = (n - 1) as f64;
    Ok((0..n).map(|i| a + span * (i as f64) / last).collect())
}

/// `n` samples of `[a, b]` followed by the isolated point `p` (index `n`), the finite
/// model of a space such as `[0, 1] ∪ {2}`.
pub fn sample_interval_and_point(a: f64, b: f64, n: usize, p: f64) -> Result<FiniteMetricSpace> {
    let mut coords = interval_coords(a, b, n)?;
    if p >= a && p <= b {
        return Err(Error::InvalidArgument(format!("isolated point {p} lies inside [{a}, {b}]")));
    }
    coords.push(p);
    FiniteMetricSpace::from_line(&coords)
}

fn circle_distance(i: usize, j: usize, n: usize) -> f64 {
    let k = i.abs_diff(j);
    k.min(n - k) as f64 * (2.0 * PI / n as f64)
}

/// `n ≥ 3` equally spaced points on the unit circle with the arc-length metric.
pub fn sample_circle(n: usize) -> Result<FiniteMetricSpace> {
    if n < 3 {
        return Err(Error::InvalidArgument(format!("circle sample needs at least 3 points, got {n}")));
    }
    let labels = (0..n).map(|i| format!("c{i}")).collect();
    FiniteMetricSpace::from_fn(labels, |i, j| circle_distance(i, j, n))
}

/// Product of two sampled circles under the max-metric. Point `(i, j)` has index `i * m + j`.
pub fn sample_torus(n: usize, m: usize) -> Result<FiniteMetricSpace> {
    if n < 3 || m < 3 {
        return Err(Error::InvalidArgument(format!("torus sample needs both factors at least 3, got {n}x{m}")));
    }
    let labels = (0..n * m).map(|k| format!("t{}_{}", k / m, k % m)).collect();
    FiniteMetricSpace::from_fn(labels, |p, q| {
        circle_distance(p / m, q / m, n).max(circle_distance(p % m, q % m, m))
    })
}

/// Index of torus point `(i, j)` in [`sample_torus`]`(_, m)`.
pub fn torus_index(i: usize, j: usize, m: usize) -> usize {
    i * m + j
}

/// Connected components of the graph joining points at distance `≤ gap`, ordered by
/// their lowest member.
pub fn components_at_gap(space: &FiniteMetricSpace, gap: f64) -> Vec<IndexSet> {
    let n = space.len();
    let mut seen = IndexSet::empty(n);
    let mut components = Vec::new();
    for start in 0..n {
        if seen.contains(start) {
            continue;
        }
        let mut component = IndexSet::empty(n);
        let mut stack = vec![start];
        seen.insert(start);
        while let Some(p) = stack.pop() {
            component.insert(p);
            for (q, &d) in space.row(p).iter().enumerate() {
                if !seen.contains(q) && d <= gap {
                    seen.insert(q);
                    stack.push(q);
                }
            }
        }
        components.push(component);
    }
    components
}

#[cfg(test)]
mod tests {
    use super::*;

    fn line(coords: &[f64]) -> FiniteMetricSpace {
        FiniteMetricSpace::from_line(coords).unwrap()
    }

    fn set(n: usize, idx: &[usize]) -> IndexSet {
        IndexSet::from_indices(n, idx.iter().copied()).unwrap()
    }

    #[test]
    fn one_point_space_is_valid() {
        assert!(validate_metric(&[vec![0.0]]).unwrap().is_valid());
    }

    #[test]
    fn line_points_are_valid() {
        let m = line(&[0.0, 1.0, 3.0]);
        assert!(m.is_integral());
        assert!(validate_metric(&m.rows()).unwrap().is_valid());
    }

    #[test]
    fn triangle_violation_is_named() {
        let d = vec![vec![0.0, 5.0, 1.0], vec![5.0, 0.0, 1.0], vec![1.0, 1.0, 0.0]];
        let report = validate_metric(&d).unwrap();
        assert!(report.violations.contains(&Violation::Triangle { i: 0, via: 2, j: 1 }));
        assert!(report.violations.iter().all(|v| matches!(v, Violation::Triangle { .. })));
        assert!(matches!(FiniteMetricSpace::from_matrix(d), Err(Error::InvalidMetric(_))));
    }

    #[test]
    fn structural_errors() {
        assert!(matches!(
            validate_metric(&[vec![0.0, 1.0], vec![1.0]]),
            Err(Error::NotSquare { row: 1, len: 1, expected: 2 })
        ));
        let d = vec![vec![0.0, 1.0], vec![2.0, 0.0]];
        assert_eq!(validate_metric(&d).unwrap().violations, vec![Violation::Asymmetric { i: 0, j: 1 }]);
        let d = vec![vec![0.5, 0.0], vec![0.0, 0.0]];
        let v = validate_metric(&d).unwrap().violations;
        assert!(v.contains(&Violation::NonZeroDiagonal { i: 0, value: 0.5 }));
        assert!(v.contains(&Violation::NonPositive { i: 0, j: 1, value: 0.0 }));
        let d = vec![vec![0.0, f64::NAN], vec![f64::NAN, 0.0]];
        assert_eq!(validate_metric(&d).unwrap().violations.len(), 2);
    }

    #[test]
    fn dist_to_set_cases() {
        let m = line(&[0.0, 1.0, 3.0]);
        assert_eq!(dist_to_set(&m, 0, &set(3, &[0, 2])).unwrap(), 0.0);
        assert_eq!(dist_to_set(&m, 1, &set(3, &[0, 2])).unwrap(), 1.0);
        let m = line(&[0.0, 1.0, 2.0]);
        assert_eq!(dist_to_set(&m, 1, &set(3, &[0, 2])).unwrap(), 1.0);
        assert!(matches!(dist_to_set(&m, 1, &IndexSet::empty(3)), Err(Error::EmptySet(_))));
        assert!(matches!(dist_to_set(&m, 7, &set(3, &[0])), Err(Error::IndexOutOfRange { .. })));
    }

    #[test]
    fn hausdorff_cases() {
        let m = line(&[0.0, 1.0, 3.0]);
        let s = set(3, &[0, 1]);
        assert_eq!(hausdorff_distance(&m, &s, &s).unwrap(), 0.0);
        assert_eq!(hausdorff_distance(&m, &set(3, &[0]), &set(3, &[1])).unwrap(), 1.0);
        assert_eq!(hausdorff_distance(&m, &s, &set(3, &[2])).unwrap(), 3.0);
        assert!(hausdorff_distance(&m, &s, &IndexSet::empty(3)).is_err());
    }

    #[test]
    fn sampled_continua() {
        let c = sample_circle(4).unwrap();
        assert_eq!(c.dist(0, 2), PI);
        let i = sample_interval(0.0, 1.0, 11).unwrap();
        assert_eq!(i.dist(0, 10), 1.0);
        let t = sample_torus(4, 4).unwrap();
        assert_eq!(t.dist(torus_index(0, 0, 4), torus_index(2, 2, 4)), PI);
        assert_eq!(sample_interval(0.5, 0.5, 1).unwrap().len(), 1);
    }

    #[test]
    fn constructor_minimums() {
        assert!(sample_interval(0.0, 1.0, 0).is_err());
        assert!(sample_interval(1.0, 0.0, 3).is_err());
        assert!(sample_circle(2).is_err());
        assert!(sample_torus(3, 2).is_err());
        assert!(sample_interval_and_point(0.0, 1.0, 5, 0.5).is_err());
    }

    #[test]
    fn components() {
        let m = sample_interval_and_point(0.0, 1.0, 11, 2.0).unwrap();
        assert_eq!(components_at_gap(&m, m.diameter()).len(), 1);
        assert_eq!(components_at_gap(&m, 0.0).len(), 12);
        let parts = components_at_gap(&m, 0.15);
        assert_eq!(parts.len(), 2);
        assert_eq!(parts[0].to_vec(), (0..11).collect::<Vec<_>>());
        assert_eq!(parts[1].to_vec(), vec![11]);
    }

    #[test]
    fn closed_subset_rules() {
        let m = line(&[0.0, 1.0]);
        assert!(matches!(ClosedSubset::new(&m, []), Err(Error::EmptySet(_))));
        assert!(ClosedSubset::new(&m, [2]).is_err());
        let a = ClosedSubset::new(&m, [1, 1]).unwrap();
        assert_eq!(a.len(), 1);
        assert_eq!(a.lowest(), 1);
    }
}
