//! Discrete circle-valued maps, winding numbers, and exhaustive extension search.
//!
//! A map into the circle is modelled by residues mod `n`; it is *discretely
//! continuous* when every edge changes the residue by at most `L`, with `2L < n` so
//! each step has a unique shortest lift. A loop's winding number is the sum of those
//! lifts divided by `n`.
//!
//! On a triangulated disk with `3L < n` every triangle has winding zero, so a boundary
//! loop of nonzero winding admits no discretely continuous extension over the
//! interior. When `3L ≥ n` (e.g. `n = 3`, `L = 1`) a single triangle can carry a full
//! turn and the obstruction disappears; [`DiscreteCircleMap::obstruction_sound`]
//! reports which regime a map is in.

use std::sync::Arc;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::metric::{sample_torus, torus_index, ClosedSubset};
use crate::par;
use crate::relation::{equal_on, SetValuedMap};
use crate::tietze::extend_usc;

/// `min(|a − b|, n − |a − b|)`.
pub fn residue_distance(a: usize, b: usize, n: usize) -> usize {
    let d = a.abs_diff(b) % n;
    d.min(n - d)
}

/// The signed step from `a` to `b` with the smallest absolute value, in `(−n/2, n/2]`.
pub fn shortest_lift(a: usize, b: usize, n: usize) -> i64 {
    let n = n as i64;
    let d = (b as i64 - a as i64).rem_euclid(n);
    if 2 * d > n { d - n } else { d }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct DiscreteCircleMap {
    modulus: usize,
    values: Vec<usize>,
    step_bound: usize,
}

impl DiscreteCircleMap {
    pub fn new(modulus: usize, values: Vec<usize>, step_bound: usize) -> Result<Self> {
        if modulus < 3 {
            return Err(Error::InvalidArgument(format!("circle resolution must be at least 3, got {modulus}")));
        }
        if 2 * step_bound >= modulus {
            return Err(Error::InvalidArgument(format!(
                "step bound {step_bound} must satisfy 2L < n = {modulus}"
            )));
        }
        if values.is_empty() {
            return Err(Error::EmptySet("circle map values"));
        }
        if let Some(&v) = values.iter().find(|&&v| v >= modulus) {
            return Err(Error::InvalidArgument(format!("residue {v} is not below {modulus}")));
        }
        Ok(DiscreteCircleMap { modulus, values, step_bound })
    }

    pub fn modulus(&self) -> usize {
        self.modulus
    }

    pub fn values(&self) -> &[usize] {
        &self.values
    }

    pub fn step_bound(&self) -> usize {
        self.step_bound
    }

    /// Whether `3L < n`, the regime in which nonzero winding forbids extension over a disk.
    pub fn obstruction_sound(&self) -> bool {
        3 * self.step_bound < self.modulus
    }

    /// Winding number of the closed loop `values[0], …, values[k−1], values[0]`.
    pub fn winding_number(&self) -> Result<i64> {
        let k = self.values.len();
        let mut total = 0i64;
        for i in 0..k {
            let (a, b) = (self.values[i], self.values[(i + 1) % k]);
            let distance = residue_distance(a, b, self.modulus);
            if distance > self.step_bound {
                return Err(Error::StepTooLong { from: i, to: (i + 1) % k, distance, bound: self.step_bound });
            }
            total += shortest_lift(a, b, self.modulus);
        }
        debug_assert_eq!(total.rem_euclid(self.modulus as i64), 0);
        Ok(total / self.modulus as i64)
    }

    /// The loop started at position `shift`.
    pub fn rotated(&self, shift: usize) -> Self {
        let mut values = self.values.clone();
        let len = values.len();
        values.rotate_left(shift % len);
        DiscreteCircleMap { values, ..self.clone() }
    }

    /// The loop traversed backwards.
    pub fn reversed(&self) -> Self {
        let mut values = self.values.clone();
        values.reverse();
        DiscreteCircleMap { values, ..self.clone() }
    }

    /// Inserts every intermediate residue along each step's shortest lift.
    pub fn refined(&self) -> Self {
        let n = self.modulus as i64;
        let k = self.values.len();
        let mut values = Vec::new();
        for i in 0..k {
            let a = self.values[i];
            let lift = shortest_lift(a, self.values[(i + 1) % k], self.modulus);
            for s in 0..lift.abs() {
                values.push((a as i64 + s * lift.signum()).rem_euclid(n) as usize);
            }
            if lift == 0 {
                values.push(a);
            }
        }
        DiscreteCircleMap { values, ..self.clone() }
    }
}

/// A triangulated disk: vertices `0..vertices`, undirected edges, and the boundary cycle.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct TriangulatedDisk {
    vertices: usize,
    edges: Vec<(usize, usize)>,
    boundary: Vec<usize>,
}

impl TriangulatedDisk {
    pub fn new(vertices: usize, edges: Vec<(usize, usize)>, boundary: Vec<usize>) -> Result<Self> {
        let malformed = |msg: String| Err(Error::MalformedDisk(msg));
        if boundary.len() < 3 {
            return malformed(format!("boundary cycle needs at least 3 vertices, got {}", boundary.len()));
        }
        let mut normalized = Vec::with_capacity(edges.len());
        for &(i, j) in &edges {
            if i >= vertices || j >= vertices {
                return malformed(format!("edge ({i},{j}) leaves the {vertices} vertices"));
            }
            if i == j {
                return malformed(format!("self-loop at {i}"));
            }
            normalized.push((i.min(j), i.max(j)));
        }
        normalized.sort_unstable();
        normalized.dedup();
        let mut on_boundary = vec![false; vertices];
        for &b in &boundary {
            if b >= vertices {
                return malformed(format!("boundary vertex {b} out of range"));
            }
            if on_boundary[b] {
                return malformed(format!("boundary vertex {b} repeats"));
            }
            on_boundary[b] = true;
        }
        let k = boundary.len();
        for i in 0..k {
            let (a, b) = (boundary[i], boundary[(i + 1) % k]);
            if normalized.binary_search(&(a.min(b), a.max(b))).is_err() {
                return malformed(format!("boundary edge ({a},{b}) is missing"));
            }
        }
        let disk = TriangulatedDisk { vertices, edges: normalized, boundary };
        let adj = disk.adjacency();
        let mut seen = vec![false; vertices];
        let mut stack = vec![0];
        seen[0] = true;
        while let Some(v) = stack.pop() {
            for &w in &adj[v] {
                if !seen[w] {
                    seen[w] = true;
                    stack.push(w);
                }
            }
        }
        if let Some(v) = seen.iter().position(|s| !s) {
            return malformed(format!("vertex {v} is disconnected"));
        }
        Ok(disk)
    }

    /// A boundary `k`-cycle `0..k` coned off to the single interior vertex `k`.
    pub fn wheel(k: usize) -> Result<Self> {
        let edges = (0..k).flat_map(|i| [(i, (i + 1) % k), (i, k)]).collect();
        Self::new(k + 1, edges, (0..k).collect())
    }

    /// A `side × side` grid patch, each square split along its down-right diagonal.
    /// Vertex `(r, c)` has index `r * side + c`; the boundary runs clockwise from `(0, 0)`.
    pub fn grid_patch(side: usize) -> Result<Self> {
        if side < 2 {
            return Err(Error::MalformedDisk(format!("grid patch needs side at least 2, got {side}")));
        }
        let at = |r: usize, c: usize| r * side + c;
        let mut edges = Vec::new();
        for r in 0..side {
            for c in 0..side {
                if c + 1 < side {
                    edges.push((at(r, c), at(r, c + 1)));
                }
                if r + 1 < side {
                    edges.push((at(r, c), at(r + 1, c)));
                }
                if r + 1 < side && c + 1 < side {
                    edges.push((at(r, c), at(r + 1, c + 1)));
                }
            }
        }
        let last = side - 1;
        let mut boundary: Vec<usize> = (0..side).map(|c| at(0, c)).collect();
        boundary.extend((1..side).map(|r| at(r, last)));
        boundary.extend((0..last).rev().map(|c| at(last, c)));
        boundary.extend((1..last).rev().map(|r| at(r, 0)));
        Self::new(side * side, edges, boundary)
    }

    pub fn vertices(&self) -> usize {
        self.vertices
    }

    pub fn edges(&self) -> &[(usize, usize)] {
        &self.edges
    }

    pub fn boundary(&self) -> &[usize] {
        &self.boundary
    }

    /// Vertices off the boundary, ascending.
    pub fn interior(&self) -> Vec<usize> {
        (0..self.vertices).filter(|v| !self.boundary.contains(v)).collect()
    }

    fn adjacency(&self) -> Vec<Vec<usize>> {
        let mut adj = vec![Vec::new(); self.vertices];
        for &(i, j) in &self.edges {
            adj[i].push(j);
            adj[j].push(i);
        }
        adj
    }

    /// Edges whose endpoints differ by more than `bound` under `assignment`.
    pub fn edge_violations(&self, assignment: &[usize], modulus: usize, bound: usize) -> Vec<(usize, usize)> {
        self.edges
            .iter()
            .copied()
            .filter(|&(i, j)| residue_distance(assignment[i], assignment[j], modulus) > bound)
            .collect()
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum SearchMode {
    #[default]
    Sequential,
    /// Splits at the first interior vertex and explores its values in parallel.
    BranchParallel,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct SearchCertificate {
    pub interior_vertices: usize,
    /// `n^(interior vertices)`, the unpruned number of leaves.
    pub search_space: u128,
    /// Consistent partial assignments of interior vertices that were expanded.
    pub nodes_visited: u64,
    /// Whether the boundary data alone satisfies every boundary–boundary edge.
    pub boundary_consistent: bool,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct ExtensionSearch {
    pub extends: bool,
    /// A full vertex assignment when an extension exists.
    pub witness: Option<Vec<usize>>,
    pub certificate: SearchCertificate,
}

struct Search<'a> {
    modulus: usize,
    bound: usize,
    order: &'a [usize],
    // earlier[i]: neighbours of order[i] that are fixed before it
    earlier: Vec<Vec<usize>>,
}

impl Search<'_> {
    fn fits(&self, depth: usize, value: usize, assignment: &[usize]) -> bool {
        self.earlier[depth]
            .iter()
            .all(|&w| residue_distance(value, assignment[w], self.modulus) <= self.bound)
    }

    /// All residues, nearest to the first fixed neighbour's value first.
    fn candidates(&self, depth: usize, assignment: &[usize]) -> Vec<usize> {
        let anchor = self.earlier[depth].first().map_or(0, |&w| assignment[w]);
        let mut values: Vec<usize> = (0..self.modulus).collect();
        values.sort_by_key(|&v| (residue_distance(v, anchor, self.modulus), v));
        values
    }

    fn dfs(&self, depth: usize, assignment: &mut [usize], visited: &mut u64) -> bool {
        if depth == self.order.len() {
            return true;
        }
        let v = self.order[depth];
        for value in self.candidates(depth, assignment) {
            if self.fits(depth, value, assignment) {
                *visited += 1;
                assignment[v] = value;
                if self.dfs(depth + 1, assignment, visited) {
                    return true;
                }
            }
        }
        false
    }
}

pub fn leaf_count(modulus: usize, interior: usize) -> u128 {
    (modulus as u128).saturating_pow(interior as u32)
}

/// Complete backtracking search for a discretely continuous extension of `boundary`
/// over the interior of `disk`, assigning interior vertices in ascending order.
pub fn brute_force_extension_exists(disk: &TriangulatedDisk, boundary: &DiscreteCircleMap) -> Result<ExtensionSearch> {
    brute_force_extension_exists_with(disk, boundary, SearchMode::Sequential)
}

pub fn brute_force_extension_exists_with(
    disk: &TriangulatedDisk,
    boundary: &DiscreteCircleMap,
    mode: SearchMode,
) -> Result<ExtensionSearch> {
    if boundary.values().len() != disk.boundary().len() {
        return Err(Error::MalformedDisk(format!(
            "boundary map has {} values for a boundary of {} vertices",
            boundary.values().len(),
            disk.boundary().len()
        )));
    }
    let (modulus, bound) = (boundary.modulus(), boundary.step_bound());
    let order = disk.interior();
    let mut assignment = vec![0; disk.vertices()];
    let mut fixed = vec![false; disk.vertices()];
    for (&v, &value) in disk.boundary().iter().zip(boundary.values()) {
        assignment[v] = value;
        fixed[v] = true;
    }
    let mut certificate = SearchCertificate {
        interior_vertices: order.len(),
        search_space: leaf_count(modulus, order.len()),
        nodes_visited: 0,
        boundary_consistent: disk
            .edges()
            .iter()
            .filter(|&&(i, j)| fixed[i] && fixed[j])
            .all(|&(i, j)| residue_distance(assignment[i], assignment[j], modulus) <= bound),
    };
    if !certificate.boundary_consistent {
        return Ok(ExtensionSearch { extends: false, witness: None, certificate });
    }

    let adj = disk.adjacency();
    let mut position = vec![usize::MAX; disk.vertices()];
    for (i, &v) in order.iter().enumerate() {
        position[v] = i;
    }
    let earlier = order
        .iter()
        .enumerate()
        .map(|(i, &v)| adj[v].iter().copied().filter(|&w| fixed[w] || position[w] < i).collect())
        .collect();
    let search = Search { modulus, bound, order: &order, earlier };

    let found = match mode {
        SearchMode::BranchParallel if !order.is_empty() => {
            let first = order[0];
            let roots = search.candidates(0, &assignment);
            let branches = par::map_slice(&roots, |&value| {
                let mut local = assignment.clone();
                let mut visited = 0;
                if !search.fits(0, value, &local) {
                    return (None, 0);
                }
                visited += 1;
                local[first] = value;
                let ok = search.dfs(1, &mut local, &mut visited);
                (ok.then_some(local), visited)
            });
            certificate.nodes_visited = branches.iter().map(|b| b.1).sum();
            branches.into_iter().find_map(|b| b.0)
        }
        _ => {
            let ok = search.dfs(0, &mut assignment, &mut certificate.nodes_visited);
            ok.then_some(assignment)
        }
    };
    if let Some(w) = &found {
        debug_assert!(disk.edge_violations(w, modulus, bound).is_empty());
    }
    Ok(ExtensionSearch { extends: found.is_some(), witness: found, certificate })
}

/// Parameters of the torus demonstration.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct TorusDemoParams {
    pub torus_rows: usize,
    pub torus_cols: usize,
    /// Side length of the square grid patch used as the disk.
    pub patch: usize,
    /// Resolution `n` of the target circle.
    pub circle: usize,
    pub step_bound: usize,
}

impl Default for TorusDemoParams {
    fn default() -> Self {
        TorusDemoParams { torus_rows: 8, torus_cols: 8, patch: 4, circle: 8, step_bound: 1 }
    }
}

/// The largest number of search leaves the demo will exhaust.
pub const MAX_SEARCH_LEAVES: u128 = 1 << 24;

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SingleValuedLeg {
    /// Torus indices of the patch vertices, by disk vertex.
    pub patch_points: Vec<usize>,
    pub disk: TriangulatedDisk,
    pub boundary_values: Vec<usize>,
    pub boundary_winding: i64,
    pub obstruction_sound: bool,
    pub search: ExtensionSearch,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SetValuedLeg {
    /// The closed subset: torus indices of the boundary cycle.
    pub subset: Vec<usize>,
    /// `f(a)` for each boundary point, as a torus index on the first factor circle.
    pub images: Vec<usize>,
    pub extension_total: bool,
    pub equal_on: bool,
    pub extension_pairs: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct TorusDemoReport {
    pub params: TorusDemoParams,
    pub single_valued: SingleValuedLeg,
    pub set_valued: SetValuedLeg,
}

impl TorusDemoReport {
    pub fn extension_impossible(&self) -> bool {
        !self.single_valued.search.extends
    }

    pub fn set_extension_succeeds(&self) -> bool {
        self.set_valued.equal_on && self.set_valued.extension_total
    }
}

/// Degree-one residues `⌊k·n / B⌋` along a loop of length `B`.
fn degree_one_loop(len: usize, modulus: usize, step_bound: usize) -> Result<DiscreteCircleMap> {
    let values = (0..len).map(|k| k * modulus / len).collect();
    let map = DiscreteCircleMap::new(modulus, values, step_bound)?;
    match map.winding_number() {
        Ok(1) => Ok(map),
        _ => Err(Error::InvalidArgument(format!(
            "a boundary of {len} vertices cannot carry a degree-one loop into {modulus} residues with step bound {step_bound}"
        ))),
    }
}

/// Exhibits, on a sampled torus, a circle-valued map on a closed set that has no
/// discretely continuous extension, next to the set-valued extension of the same data.
///
/// The closed set is the boundary cycle of a grid patch. The single-valued leg
/// exhausts every interior assignment. The set-valued leg sends each boundary point to
/// its circle value, embedded in the first factor of the torus, and extends with
/// [`extend_usc`].
pub fn torus_non_self_tietze_demo(params: &TorusDemoParams) -> Result<TorusDemoReport> {
    let TorusDemoParams { torus_rows: rows, torus_cols: cols, patch, circle, step_bound } = *params;
    if patch > rows || patch > cols {
        return Err(Error::InvalidArgument(format!("patch of side {patch} does not fit a {rows}x{cols} torus")));
    }
    let disk = TriangulatedDisk::grid_patch(patch)?;
    let search_space = leaf_count(circle, disk.interior().len());
    if search_space > MAX_SEARCH_LEAVES {
        return Err(Error::ResolutionTooLarge { search_space, limit: MAX_SEARCH_LEAVES });
    }
    let torus = Arc::new(sample_torus(rows, cols)?);
    let patch_points: Vec<usize> = (0..patch * patch).map(|v| torus_index(v / patch, v % patch, cols)).collect();

    let boundary_map = degree_one_loop(disk.boundary().len(), circle, step_bound)?;
    let boundary_winding = boundary_map.winding_number()?;
    let search = brute_force_extension_exists(&disk, &boundary_map)?;

    let subset_points: Vec<usize> = disk.boundary().iter().map(|&v| patch_points[v]).collect();
    let images: Vec<usize> = boundary_map
        .values()
        .iter()
        .map(|&value| torus_index((value * rows + circle / 2) / circle % rows, 0, cols))
        .collect();
    let subset = ClosedSubset::new(&torus, subset_points.iter().copied())?;
    let f = SetValuedMap::on(torus.clone(), &subset, torus.clone(), subset_points.iter().copied().zip(images.iter().copied()))?;
    let extension = extend_usc(&torus, &subset, &f)?;

    Ok(TorusDemoReport {
        params: params.clone(),
        single_valued: SingleValuedLeg {
            patch_points,
            boundary_values: boundary_map.values().to_vec(),
            boundary_winding,
            obstruction_sound: boundary_map.obstruction_sound(),
            disk,
            search,
        },
        set_valued: SetValuedLeg {
            subset: subset_points,
            images,
            extension_total: extension.is_total(),
            equal_on: equal_on(&extension, &f, &subset)?,
            extension_pairs: extension.pairs().len(),
        },
    })
}
