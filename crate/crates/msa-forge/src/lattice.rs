//! Discrete geometry of N-particle lattice cubes.
//!
//! Points live in `Z^(N*d)`: `N` particles, each with `d` integer
//! coordinates. Cube membership, boundaries and distances use the
//! sup-norm over all `N*d` coordinates; adjacency (for hopping and
//! edge pairs) uses l1-distance 1, so every site has at most `2*N*d`
//! neighbors.

use std::collections::BTreeSet;
use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum GeometryError {
    #[error("box {inner} is not contained in ambient {ambient}")]
    NotContained { inner: String, ambient: String },
    #[error("decomposability is undefined for a single-particle box")]
    SingleParticle,
    #[error("points have mismatched particle count or dimension")]
    ShapeMismatch,
}

/// A point of `Z^(N*d)`: the joint configuration of `N` particles in `Z^d`.
///
/// Coordinates are stored particle-major: the first `d` entries are
/// particle 1, the next `d` are particle 2, and so on.
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct LatticePoint {
    coords: Vec<i64>,
    particles: usize,
    dim: usize,
}

impl fmt::Debug for LatticePoint {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{:?}", self.coords)
    }
}

impl fmt::Display for LatticePoint {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{:?}", self.coords)
    }
}

impl LatticePoint {
    /// A multi-particle point. Panics unless `coords.len() == particles * dim`.
    pub fn new(coords: Vec<i64>, particles: usize, dim: usize) -> Self {
        assert!(particles >= 1 && dim >= 1, "need N >= 1 and d >= 1");
        assert_eq!(
            coords.len(),
            particles * dim,
            "coordinate count must equal N*d"
        );
        Self {
            coords,
            particles,
            dim,
        }
    }

    /// A single-particle point in `Z^d`.
    pub fn single(coords: Vec<i64>) -> Self {
        let d = coords.len();
        Self::new(coords, 1, d)
    }

    pub fn coords(&self) -> &[i64] {
        &self.coords
    }

    pub fn particles(&self) -> usize {
        self.particles
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    /// Coordinates of particle `j` (zero-based), a `d`-slice.
    pub fn projection(&self, j: usize) -> &[i64] {
        assert!(j < self.particles);
        &self.coords[j * self.dim..(j + 1) * self.dim]
    }

    /// Particle `j`'s position as a single-particle point.
    pub fn projection_point(&self, j: usize) -> LatticePoint {
        LatticePoint::single(self.projection(j).to_vec())
    }

    /// Concatenate two configurations into one joint configuration.
    pub fn join(&self, other: &LatticePoint) -> LatticePoint {
        assert_eq!(self.dim, other.dim);
        let mut coords = self.coords.clone();
        coords.extend_from_slice(&other.coords);
        LatticePoint::new(coords, self.particles + other.particles, self.dim)
    }

    /// Sup-norm distance over all `N*d` coordinates.
    pub fn sup_dist(&self, other: &LatticePoint) -> i64 {
        assert_eq!(self.coords.len(), other.coords.len());
        self.coords
            .iter()
            .zip(&other.coords)
            .map(|(a, b)| (a - b).abs())
            .max()
            .unwrap_or(0)
    }

    /// l1 distance over all `N*d` coordinates.
    pub fn l1_dist(&self, other: &LatticePoint) -> i64 {
        assert_eq!(self.coords.len(), other.coords.len());
        self.coords
            .iter()
            .zip(&other.coords)
            .map(|(a, b)| (a - b).abs())
            .sum()
    }

    /// The `2*N*d` l1-neighbors of this point.
    pub fn neighbors(&self) -> Vec<LatticePoint> {
        let mut out = Vec::with_capacity(2 * self.coords.len());
        for k in 0..self.coords.len() {
            for step in [-1i64, 1] {
                let mut c = self.coords.clone();
                c[k] += step;
                out.push(LatticePoint::new(c, self.particles, self.dim));
            }
        }
        out
    }
}

/// An N-particle lattice cube: the sites `x` with `sup_dist(x, center) <= radius - 1`.
///
/// The side length is `2*radius - 1`, so the site count is
/// `(2*radius - 1)^(N*d)`. For `N > 1` the cube is automatically the
/// Cartesian product of `N` equal-radius single-particle cubes.
#[derive(Clone, PartialEq, Eq, Debug, Serialize, Deserialize)]
pub struct Cube {
    center: LatticePoint,
    radius: u32,
}

impl fmt::Display for Cube {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Cube(center={}, radius={})", self.center, self.radius)
    }
}

impl Cube {
    pub fn new(center: LatticePoint, radius: u32) -> Self {
        assert!(radius >= 1, "cube radius must be at least 1");
        Self { center, radius }
    }

    /// Single-particle cube in `Z^d` centered at `center`.
    pub fn single(center: Vec<i64>, radius: u32) -> Self {
        Self::new(LatticePoint::single(center), radius)
    }

    /// The cube of the same radius centered at the origin of `Z^(N*d)`.
    pub fn origin(particles: usize, dim: usize, radius: u32) -> Self {
        Self::new(
            LatticePoint::new(vec![0; particles * dim], particles, dim),
            radius,
        )
    }

    pub fn center(&self) -> &LatticePoint {
        &self.center
    }

    pub fn radius(&self) -> u32 {
        self.radius
    }

    pub fn particles(&self) -> usize {
        self.center.particles()
    }

    pub fn dim(&self) -> usize {
        self.center.dim()
    }

    fn half_side(&self) -> i64 {
        self.radius as i64 - 1
    }

    /// Side length `2*radius - 1` along each of the `N*d` axes.
    pub fn side(&self) -> i64 {
        2 * self.radius as i64 - 1
    }

    /// Sup-norm diameter, `2*(radius - 1)`.
    pub fn diameter(&self) -> i64 {
        2 * self.half_side()
    }

    pub fn site_count(&self) -> u128 {
        let side = self.side() as u128;
        let mut n = 1u128;
        for _ in 0..self.center.coords().len() {
            n = n.checked_mul(side).expect("site count overflow");
        }
        n
    }

    pub fn contains(&self, point: &LatticePoint) -> bool {
        point.coords().len() == self.center.coords().len()
            && self.center.sup_dist(point) <= self.half_side()
    }

    pub fn contains_cube(&self, other: &Cube) -> bool {
        other.center.coords().len() == self.center.coords().len()
            && self.center.sup_dist(&other.center) + other.half_side() <= self.half_side()
    }

    /// Sup-norm distance from a point to this cube (0 if inside).
    pub fn dist_to_point(&self, point: &LatticePoint) -> i64 {
        (self.center.sup_dist(point) - self.half_side()).max(0)
    }

    /// Cubes of radius `ell` are disjoint iff their centers are at
    /// sup-distance at least `2*ell - 1`.
    pub fn is_disjoint_from(&self, other: &Cube) -> bool {
        self.center.sup_dist(&other.center) > self.half_side() + other.half_side()
    }

    /// Projection onto particle `j`: the single-particle cube of the
    /// same radius around that particle's position.
    pub fn projection(&self, j: usize) -> Cube {
        Cube::new(self.center.projection_point(j), self.radius)
    }

    /// All sites in canonical odometer order (last coordinate fastest).
    pub fn sites(&self) -> CubeSites {
        CubeSites {
            cube: self.clone(),
            next: 0,
            total: self.site_count() as usize,
        }
    }

    /// Site at a given canonical index.
    pub fn site_at(&self, index: usize) -> LatticePoint {
        let side = self.side();
        let n = self.center.coords().len();
        let mut rem = index as i64;
        let mut coords = vec![0i64; n];
        for k in (0..n).rev() {
            coords[k] = self.center.coords()[k] - self.half_side() + rem % side;
            rem /= side;
        }
        debug_assert_eq!(rem, 0);
        LatticePoint::new(coords, self.particles(), self.dim())
    }

    /// Canonical index of a member site, or `None` for non-members.
    pub fn site_index(&self, point: &LatticePoint) -> Option<usize> {
        if !self.contains(point) {
            return None;
        }
        let side = self.side();
        let mut idx = 0i64;
        for (k, c) in point.coords().iter().enumerate() {
            let off = c - (self.center.coords()[k] - self.half_side());
            idx = idx * side + off;
        }
        Some(idx as usize)
    }

    /// Centers `c` with `Cube::new(c, sub_radius)` contained in `self`,
    /// in canonical order.
    pub fn sub_cube_centers(&self, sub_radius: u32) -> Vec<LatticePoint> {
        if sub_radius > self.radius {
            return Vec::new();
        }
        let slack = (self.radius - sub_radius) as u32;
        Cube::new(self.center.clone(), slack + 1).sites().collect()
    }
}

/// Iterator over cube sites in canonical order.
pub struct CubeSites {
    cube: Cube,
    next: usize,
    total: usize,
}

impl Iterator for CubeSites {
    type Item = LatticePoint;

    fn next(&mut self) -> Option<LatticePoint> {
        if self.next >= self.total {
            return None;
        }
        let p = self.cube.site_at(self.next);
        self.next += 1;
        Some(p)
    }

    fn size_hint(&self) -> (usize, Option<usize>) {
        let left = self.total - self.next;
        (left, Some(left))
    }
}

/// Internal boundary, external boundary and the oriented edge pairs of
/// a cube relative to an ambient region.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct BoundarySets {
    /// Sites of the cube at sup-distance exactly `radius - 1` from the center.
    pub inner: BTreeSet<LatticePoint>,
    /// Ambient sites outside the cube at sup-distance 1 from it.
    pub outer: BTreeSet<LatticePoint>,
    /// Pairs `(x, x')` with `x` inner, `x'` outer, l1-adjacent. Each pair
    /// is listed once, inner point first.
    pub edge_pairs: BTreeSet<(LatticePoint, LatticePoint)>,
}

/// Boundary sets of `cube`, clipped to `ambient` when one is given.
///
/// Errors if the cube is not contained in the ambient cube.
pub fn boundary_sets(cube: &Cube, ambient: Option<&Cube>) -> Result<BoundarySets, GeometryError> {
    if let Some(amb) = ambient {
        if !amb.contains_cube(cube) {
            return Err(GeometryError::NotContained {
                inner: cube.to_string(),
                ambient: amb.to_string(),
            });
        }
    }

    let r = cube.half_side();
    let mut inner = BTreeSet::new();
    for site in cube.sites() {
        if cube.center().sup_dist(&site) == r {
            inner.insert(site);
        }
    }

    // Outer sites sit at sup-distance exactly 1 from the cube, i.e. at
    // sup-distance radius from the center; enumerate the shell of the
    // enlarged cube and clip to the ambient region.
    let mut outer = BTreeSet::new();
    let shell = Cube::new(cube.center().clone(), cube.radius() + 1);
    for site in shell.sites() {
        if cube.center().sup_dist(&site) == r + 1 {
            let in_ambient = ambient.map_or(true, |amb| amb.contains(&site));
            if in_ambient {
                outer.insert(site);
            }
        }
    }

    let mut edge_pairs = BTreeSet::new();
    for x_out in &outer {
        for nb in x_out.neighbors() {
            if cube.contains(&nb) {
                debug_assert!(inner.contains(&nb));
                edge_pairs.insert((nb, x_out.clone()));
            }
        }
    }

    Ok(BoundarySets {
        inner,
        outer,
        edge_pairs,
    })
}

/// Sup-norm distance from a point to the diagonal set
/// `{(a, ..., a) : a in Z^d}`: the exact minimum over integer `a` of
/// `max_j sup|x_j - a|`.
///
/// The minimum separates over the `d` coordinate axes; along each axis
/// the optimal `a_k` lies in the bounding window of the projected
/// coordinates, which is searched directly.
pub fn diagonal_distance(point: &LatticePoint) -> i64 {
    let d = point.dim();
    let n = point.particles();
    let mut dist = 0i64;
    for k in 0..d {
        let column: Vec<i64> = (0..n).map(|j| point.projection(j)[k]).collect();
        let lo = *column.iter().min().unwrap();
        let hi = *column.iter().max().unwrap();
        let mut best = i64::MAX;
        for a in lo..=hi {
            let reach = column.iter().map(|c| (c - a).abs()).max().unwrap();
            best = best.min(reach);
        }
        dist = dist.max(best);
    }
    dist
}

/// Sup-norm distance from a cube to the diagonal set (0 if they meet).
pub fn cube_diagonal_distance(cube: &Cube) -> i64 {
    (diagonal_distance(cube.center()) - cube.half_side()).max(0)
}

/// The threshold `2*N*(L-1) + N*r0`: centers farther than this from the
/// diagonal always admit a decomposition.
pub fn decomposability_threshold(particles: usize, radius: u32, r0: u32) -> i64 {
    let n = particles as i64;
    2 * n * (radius as i64 - 1) + n * r0 as i64
}

/// A bipartition of the particle index set into two non-interacting
/// subsystems.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Decomposition {
    /// Zero-based particle indices of the first subsystem.
    pub left: Vec<usize>,
    /// Zero-based particle indices of the second subsystem.
    pub right: Vec<usize>,
    /// Whether `left` is a consecutive prefix `{0, .., n'-1}`.
    pub consecutive: bool,
}

/// Outcome of the decomposability search.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub enum Decomposability {
    Decomposable(Decomposition),
    NonDecomposable,
}

/// Search all nontrivial bipartitions of the particles of `cube` for one
/// where every cross pair `(j, i)` has `sup|u_j - u_i| > 2*(L-1) + r0`,
/// so the interaction between the two subsystems vanishes on the cube.
///
/// Consecutive prefix splits are searched first and therefore found
/// whenever one exists. Errors for single-particle cubes.
pub fn decomposability(cube: &Cube, r0: u32) -> Result<Decomposability, GeometryError> {
    let n = cube.particles();
    if n < 2 {
        return Err(GeometryError::SingleParticle);
    }
    let sep = 2 * (cube.radius() as i64 - 1) + r0 as i64;
    let positions: Vec<LatticePoint> = (0..n).map(|j| cube.center().projection_point(j)).collect();

    let split_ok = |left: &[usize], right: &[usize]| {
        left.iter().all(|&j| {
            right
                .iter()
                .all(|&i| positions[j].sup_dist(&positions[i]) > sep)
        })
    };

    // Consecutive prefix splits first.
    for cut in 1..n {
        let left: Vec<usize> = (0..cut).collect();
        let right: Vec<usize> = (cut..n).collect();
        if split_ok(&left, &right) {
            return Ok(Decomposability::Decomposable(Decomposition {
                left,
                right,
                consecutive: true,
            }));
        }
    }

    // General bipartitions; fixing particle 0 in the left part avoids
    // enumerating each split twice.
    for mask in 1u32..(1 << (n - 1)) {
        let mut left = vec![0usize];
        let mut right = Vec::new();
        for j in 1..n {
            if mask & (1 << (j - 1)) != 0 {
                left.push(j);
            } else {
                right.push(j);
            }
        }
        if right.is_empty() {
            continue;
        }
        if split_ok(&left, &right) {
            let consecutive = left.windows(2).all(|w| w[1] == w[0] + 1) && left[0] == 0;
            return Ok(Decomposability::Decomposable(Decomposition {
                left,
                right,
                consecutive,
            }));
        }
    }

    Ok(Decomposability::NonDecomposable)
}

/// Sufficient condition for decomposability: the center is farther than
/// `2*N*(L-1) + N*r0` from the diagonal.
pub fn diagonal_sufficient(cube: &Cube, r0: u32) -> bool {
    diagonal_distance(cube.center())
        > decomposability_threshold(cube.particles(), cube.radius(), r0)
}

/// For each particle index `j`, whether the projections of the two
/// radius-`radius` cubes around `x` and `y` are disjoint in `Z^d`.
pub fn projections_disjoint(
    x: &LatticePoint,
    y: &LatticePoint,
    radius: u32,
) -> Result<Vec<bool>, GeometryError> {
    if x.particles() != y.particles() || x.dim() != y.dim() {
        return Err(GeometryError::ShapeMismatch);
    }
    let reach = 2 * (radius as i64 - 1);
    Ok((0..x.particles())
        .map(|j| {
            let xj = x.projection(j);
            let yj = y.projection(j);
            xj.iter().zip(yj).any(|(a, b)| (a - b).abs() > reach)
        })
        .collect())
}
