//! Quasi-geodesic quality, quasi-convexity, neighborhoods, hulls and
//! intersections of thickened subsets. Subsets are sorted index lists.

use std::collections::BinaryHeap;

use serde::{Deserialize, Serialize};

use crate::error::{invalid, Result};
use crate::metric::FiniteMetricSpace;
use crate::{par, tol};

/// Sorted, deduplicated index list.
pub fn normalize(mut ys: Vec<usize>) -> Vec<usize> {
    ys.sort_unstable();
    ys.dedup();
    ys
}

pub fn subset_from_ids<S: AsRef<str>>(space: &FiniteMetricSpace, ids: &[S]) -> Result<Vec<usize>> {
    if ids.is_empty() {
        return invalid("subset must be non-empty");
    }
    Ok(normalize(space.indices_of(ids)?))
}

pub fn subset_ids(space: &FiniteMetricSpace, ys: &[usize]) -> Vec<String> {
    ys.iter().map(|&i| space.id(i).to_string()).collect()
}

/// Points with parameters, parametrized by arclength along some route.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DiscretePath {
    pub points: Vec<usize>,
    pub params: Vec<f64>,
}

impl DiscretePath {
    /// Parameters are cumulative distances between consecutive points.
    pub fn from_points(space: &FiniteMetricSpace, points: Vec<usize>) -> Result<Self> {
        if points.is_empty() {
            return invalid("path needs at least one point");
        }
        let mut params = vec![0.0];
        for w in points.windows(2) {
            let last = *params.last().unwrap();
            params.push(last + space.d(w[0], w[1]));
        }
        Ok(DiscretePath { points, params })
    }

    pub fn from_ids<S: AsRef<str>>(space: &FiniteMetricSpace, ids: &[S]) -> Result<Self> {
        Self::from_points(space, space.indices_of(ids)?)
    }

    pub fn new(space: &FiniteMetricSpace, points: Vec<usize>, params: Vec<f64>) -> Result<Self> {
        if points.is_empty() || points.len() != params.len() {
            return invalid("points and params must be non-empty and of equal length");
        }
        for i in 1..points.len() {
            let gap = params[i] - params[i - 1];
            if gap < -tol() || gap + tol() < space.d(points[i - 1], points[i]) {
                return invalid(format!("parameter gap {gap} at step {i} is shorter than the distance"));
            }
        }
        Ok(DiscretePath { points, params })
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct QuasiParams {
    pub k: f64,
    pub l: f64,
    /// Smallest k making the path a (k, 0)-quasi-geodesic; `None` when no k works.
    pub k_at_zero_l: Option<f64>,
}

/// Minimal additive constant at k = 1, and minimal k at l = 0.
pub fn path_quality(space: &FiniteMetricSpace, path: &DiscretePath) -> QuasiParams {
    let n = path.len();
    let mut l: f64 = 0.0;
    let mut k: f64 = 1.0;
    let mut k_ok = true;
    for i in 0..n {
        for j in i + 1..n {
            let dt = (path.params[j] - path.params[i]).abs();
            let d = space.d(path.points[i], path.points[j]);
            l = l.max(dt - d).max(d - dt);
            if dt <= tol() && d <= tol() {
                continue;
            }
            if d <= tol() || dt <= tol() {
                k_ok = false;
            } else {
                k = k.max(dt / d).max(d / dt);
            }
        }
    }
    QuasiParams { k: 1.0, l: l.max(0.0), k_at_zero_l: k_ok.then_some(k) }
}

fn pair_ok(space: &FiniteMetricSpace, path: &DiscretePath, i: usize, j: usize, k: f64, l: f64) -> bool {
    let dt = (path.params[j] - path.params[i]).abs();
    let d = space.d(path.points[i], path.points[j]);
    let eps = tol();
    dt / k - l <= d + eps && d <= k * dt + l + eps
}

/// True iff every pair of parameters at most `big_l` apart satisfies the (k, l) inequality.
pub fn is_local_quasi_geodesic(space: &FiniteMetricSpace, path: &DiscretePath, big_l: f64, k: f64, l: f64) -> Result<bool> {
    if !(big_l > 0.0) {
        return invalid("local scale must be positive");
    }
    let n = path.len();
    for i in 0..n {
        for j in i + 1..n {
            if (path.params[j] - path.params[i]).abs() <= big_l + tol() && !pair_ok(space, path, i, j, k, l) {
                return Ok(false);
            }
        }
    }
    Ok(true)
}

pub fn is_quasi_geodesic(space: &FiniteMetricSpace, path: &DiscretePath, k: f64, l: f64) -> bool {
    let n = path.len();
    (0..n).all(|i| (i + 1..n).all(|j| pair_ok(space, path, i, j, k, l)))
}

/// d(x, Y) for every point x.
pub fn distances_to(space: &FiniteMetricSpace, ys: &[usize]) -> Vec<f64> {
    (0..space.len()).map(|x| ys.iter().map(|&y| space.d(x, y)).fold(f64::INFINITY, f64::min)).collect()
}

/// Minimal α with d(x,Y) ≤ (y|y′)_x + α for all x, y, y′.
pub fn quasi_convexity_constant(space: &FiniteMetricSpace, ys: &[usize]) -> f64 {
    let dy = distances_to(space, ys);
    let per_x = par::map_range(space.len(), |x| {
        let mut worst = f64::NEG_INFINITY;
        for (a, &y) in ys.iter().enumerate() {
            for &y2 in &ys[a..] {
                worst = worst.max(dy[x] - space.gp(y, y2, x));
            }
        }
        worst
    });
    per_x.into_iter().fold(0.0, f64::max)
}

/// Closed ball around `x`.
pub fn ball(space: &FiniteMetricSpace, x: usize, r: f64) -> Vec<usize> {
    (0..space.len()).filter(|&y| space.d(x, y) <= r + tol()).collect()
}

/// Shortest-path metric inside Y along essential pairs; rows follow the order of `ys`.
pub fn induced_length_metric(space: &FiniteMetricSpace, ys: &[usize]) -> Vec<f64> {
    let m = ys.len();
    let mut local = vec![usize::MAX; space.len()];
    for (i, &y) in ys.iter().enumerate() {
        local[y] = i;
    }
    let rows = par::map_range(m, |s| {
        let mut dist = vec![f64::INFINITY; m];
        let mut heap = BinaryHeap::new();
        dist[s] = 0.0;
        heap.push(HeapItem(0.0, s));
        while let Some(HeapItem(d, u)) = heap.pop() {
            if d > dist[u] {
                continue;
            }
            for &(v, w) in space.neighbors(ys[u]) {
                let lv = local[v];
                if lv != usize::MAX && d + w < dist[lv] {
                    dist[lv] = d + w;
                    heap.push(HeapItem(d + w, lv));
                }
            }
        }
        dist
    });
    rows.concat()
}

#[derive(PartialEq)]
struct HeapItem(f64, usize);
impl Eq for HeapItem {}
impl Ord for HeapItem {
    fn cmp(&self, o: &Self) -> std::cmp::Ordering {
        o.0.total_cmp(&self.0).then_with(|| o.1.cmp(&self.1))
    }
}
impl PartialOrd for HeapItem {
    fn partial_cmp(&self, o: &Self) -> Option<std::cmp::Ordering> {
        Some(self.cmp(o))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StrongQcReport {
    pub strong: bool,
    pub connected: bool,
    /// max (d_Y − d_X); `None` when Y is disconnected.
    pub gap: Option<f64>,
    pub alpha: f64,
    pub delta: f64,
}

pub fn strong_quasi_convexity_check(space: &FiniteMetricSpace, ys: &[usize], delta: f64) -> StrongQcReport {
    let dy = induced_length_metric(space, ys);
    let m = ys.len();
    let mut gap: f64 = 0.0;
    let mut connected = true;
    for i in 0..m {
        for j in 0..m {
            let v = dy[i * m + j];
            if v.is_infinite() {
                connected = false;
            } else {
                gap = gap.max(v - space.d(ys[i], ys[j]));
            }
        }
    }
    let alpha = quasi_convexity_constant(space, ys);
    let eps = tol();
    let strong = connected && alpha <= 2.0 * delta + eps && gap <= 8.0 * delta + eps;
    StrongQcReport { strong, connected, gap: connected.then_some(gap), alpha, delta }
}

/// {x : d(x,Y) ≤ A}.
pub fn neighborhood(space: &FiniteMetricSpace, ys: &[usize], a: f64) -> Vec<usize> {
    let dy = distances_to(space, ys);
    (0..space.len()).filter(|&x| dy[x] <= a + tol()).collect()
}

/// Points z with d(y,z) + d(z,y′) ≤ d(y,y′) + δ for some y, y′ in Y.
pub fn hull(space: &FiniteMetricSpace, ys: &[usize], delta: f64) -> Vec<usize> {
    let eps = tol();
    let keep = par::map_range(space.len(), |z| {
        ys.iter().enumerate().any(|(a, &y)| {
            ys[a..].iter().any(|&y2| space.d(y, z) + space.d(z, y2) <= space.d(y, y2) + delta + eps)
        })
    });
    (0..space.len()).filter(|&z| keep[z]).collect()
}

pub fn diameter_of(space: &FiniteMetricSpace, ys: &[usize]) -> f64 {
    let mut d: f64 = 0.0;
    for &a in ys {
        for &b in ys {
            d = d.max(space.d(a, b));
        }
    }
    d
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IntersectionDiameter {
    pub diameter: f64,
    pub empty: bool,
    pub members: Vec<usize>,
}

/// Diameter of ∩ Yᵢ^{+A}; an empty intersection has diameter 0 and `empty = true`.
pub fn intersection_diameter(space: &FiniteMetricSpace, subsets: &[Vec<usize>], a: f64) -> Result<IntersectionDiameter> {
    if a < 0.0 {
        return invalid("thickening must be non-negative");
    }
    let mut inside = vec![true; space.len()];
    for ys in subsets {
        let dy = distances_to(space, ys);
        for (x, v) in inside.iter_mut().enumerate() {
            *v = *v && dy[x] <= a + tol();
        }
    }
    let members: Vec<usize> = (0..space.len()).filter(|&x| inside[x]).collect();
    Ok(IntersectionDiameter { diameter: diameter_of(space, &members), empty: members.is_empty(), members })
}

/// One geodesic from `a` to `b`, stepping along essential pairs.
pub fn geodesic(space: &FiniteMetricSpace, a: usize, b: usize) -> Vec<usize> {
    let mut out = vec![a];
    let mut u = a;
    while u != b {
        let next = space
            .neighbors(u)
            .iter()
            .filter(|&&(w, dw)| (dw + space.d(w, b) - space.d(u, b)).abs() <= tol())
            .map(|&(w, _)| w)
            .min();
        match next {
            Some(w) => {
                out.push(w);
                u = w;
            }
            None => {
                out.push(b);
                break;
            }
        }
    }
    out
}
