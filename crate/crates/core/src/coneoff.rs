//! Hyperbolic cones over subsets, the comparison map μ, cone-offs with their
//! chain metric, and the rotation and quotient statements checked on samples.

use std::collections::HashSet;
use std::f64::consts::{LN_2, PI};

use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::geodesy::{induced_length_metric, strong_quasi_convexity_check, subset_from_ids};
use crate::magnitude::sinh;
use crate::metric::{hyperbolicity_delta, FiniteMetricSpace, HyperbolicityReport};
use crate::{par, tol};

fn asinh_exp(l: f64) -> f64 {
    if l > 30.0 {
        l + LN_2
    } else {
        l.exp().asinh()
    }
}

/// ln sin(θ/2) with θ = min(π, t / sinh ρ), given ln sinh ρ.
fn ln_half_angle_sin(t: f64, ln_sinh_rho: f64) -> f64 {
    let l_theta = t.ln() - ln_sinh_rho;
    if l_theta >= PI.ln() {
        0.0
    } else if l_theta < -600.0 {
        l_theta - LN_2
    } else {
        (l_theta.exp() / 2.0).sin().ln()
    }
}

/// cosh μ(t) = cosh²ρ − sinh²ρ cos(min(π, t / sinh ρ)), via sinh(μ/2) = sinh ρ sin(θ/2).
pub fn mu(t: f64, rho: f64) -> f64 {
    if t <= 0.0 {
        return 0.0;
    }
    let ls = sinh(rho).ln();
    if t.ln() >= PI.ln() + ls {
        return 2.0 * rho;
    }
    // for tiny angles sinh ρ · sin(θ/2) = t/2 up to a factor 1 − θ²/24
    let l_theta = t.ln() - ls;
    let l = if l_theta < -40.0 { t.ln() - LN_2 } else { ls + ln_half_angle_sin(t, ls) };
    2.0 * asinh_exp(l)
}

/// Lower comparison bound t − (1 + 1/sinh²ρ) t³ / 24.
pub fn mu_lower_bound(t: f64, rho: f64) -> f64 {
    let s = rho.sinh();
    t - (1.0 + 1.0 / (s * s)) * t * t * t / 24.0
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind")]
pub enum ConePoint {
    Apex,
    /// `base` indexes the subset Y; 0 < r ≤ ρ.
    Radial { base: usize, r: f64 },
}

impl ConePoint {
    pub fn r(&self) -> f64 {
        match self {
            ConePoint::Apex => 0.0,
            ConePoint::Radial { r, .. } => *r,
        }
    }
}

/// Distance between two points of the cone of radius ρ over (Y, d_Y).
pub fn cone_distance(p: ConePoint, q: ConePoint, rho: f64, d_y: impl Fn(usize, usize) -> f64) -> f64 {
    match (p, q) {
        (ConePoint::Apex, x) | (x, ConePoint::Apex) => x.r(),
        (ConePoint::Radial { base: y, r }, ConePoint::Radial { base: y2, r: r2 }) => radial_distance(r, r2, d_y(y, y2), rho),
    }
}

/// sinh²(d/2) = sinh²((r − r′)/2) + sinh r sinh r′ sin²(θ/2), evaluated through logs.
pub fn radial_distance(r: f64, r2: f64, dy: f64, rho: f64) -> f64 {
    if dy <= 0.0 {
        return (r - r2).abs();
    }
    let ls = sinh(rho).ln();
    let la = 2.0 * sinh((r - r2).abs() / 2.0).ln();
    let lb = sinh(r).ln() + sinh(r2).ln() + 2.0 * ln_half_angle_sin(dy, ls);
    let (hi, lo) = if la >= lb { (la, lb) } else { (lb, la) };
    let l = if lo == f64::NEG_INFINITY { hi } else { hi + (lo - hi).exp().ln_1p() };
    2.0 * asinh_exp(l / 2.0)
}

#[derive(Debug, Clone)]
pub struct ConeSpace {
    pub base_ids: Vec<String>,
    /// d_Y, row-major over `base_ids`.
    pub base_metric: Vec<f64>,
    pub rho: f64,
    pub points: Vec<ConePoint>,
    pub space: FiniteMetricSpace,
}

fn radii(rho: f64, m: usize) -> Vec<f64> {
    (1..=m).map(|k| rho * k as f64 / m as f64).collect()
}

fn radial_id(y: &str, r: f64) -> String {
    format!("{y}@{r}")
}

impl ConeSpace {
    /// Sampled cone over an abstract finite metric: the apex plus levels ρk/m.
    pub fn from_metric(base_ids: Vec<String>, base_metric: Vec<f64>, rho: f64, radial: usize) -> Result<Self> {
        if !(rho > 0.0) || radial == 0 {
            return invalid("rho must be positive and radial samples at least 1");
        }
        let m = base_ids.len();
        if base_metric.iter().any(|d| !d.is_finite()) {
            return Err(Error::Precondition("Y is disconnected for its induced length metric".into()));
        }
        let mut points = vec![ConePoint::Apex];
        let mut ids = vec!["v".to_string()];
        for (y, name) in base_ids.iter().enumerate() {
            for r in radii(rho, radial) {
                points.push(ConePoint::Radial { base: y, r });
                ids.push(radial_id(name, r));
            }
        }
        let n = points.len();
        let dy = |a: usize, b: usize| base_metric[a * m + b];
        let rows = par::map_range(n, |i| (0..n).map(|j| if i == j { 0.0 } else { cone_distance(points[i], points[j], rho, dy) }).collect::<Vec<_>>());
        let space = FiniteMetricSpace::from_matrix(ids, rows.concat())?;
        Ok(ConeSpace { base_ids, base_metric, rho, points, space })
    }

    pub fn dy(&self, a: usize, b: usize) -> f64 {
        self.base_metric[a * self.base_ids.len() + b]
    }

    pub fn index_of(&self, p: ConePoint) -> Option<usize> {
        self.points.iter().position(|q| match (p, *q) {
            (ConePoint::Apex, ConePoint::Apex) => true,
            (ConePoint::Radial { base, r }, ConePoint::Radial { base: b2, r: r2 }) => base == b2 && (r - r2).abs() <= tol(),
            _ => false,
        })
    }

    pub fn delta(&self) -> HyperbolicityReport {
        hyperbolicity_delta(&self.space)
    }
}

/// Cone over Y ⊂ space, with Y carrying its induced length metric.
pub fn build_cone(space: &FiniteMetricSpace, ys: &[usize], rho: f64, radial: usize) -> Result<ConeSpace> {
    if ys.is_empty() {
        return invalid("Y is empty");
    }
    let dy = induced_length_metric(space, ys);
    ConeSpace::from_metric(ys.iter().map(|&y| space.id(y).to_string()).collect(), dy, rho, radial)
}

/// Displacement of (y, r) ↦ (hy, r), with h a permutation of Y's indices.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RotationReport {
    pub displacement: f64,
    pub expected: f64,
    /// min d_Y(y, hy) ≥ π sinh ρ over Y.
    pub applicable: bool,
    pub equal: bool,
}

pub fn rotation_displacement(cone: &ConeSpace, h: &[usize], x: ConePoint) -> Result<RotationReport> {
    let m = cone.base_ids.len();
    if h.len() != m || h.iter().collect::<HashSet<_>>().len() != m || h.iter().any(|&y| y >= m) {
        return invalid("h must permute Y");
    }
    for a in 0..m {
        for b in 0..m {
            if (cone.dy(h[a], h[b]) - cone.dy(a, b)).abs() > tol() {
                return invalid("h is not an isometry of Y");
            }
        }
    }
    let min_disp = (0..m).map(|y| cone.dy(y, h[y])).fold(f64::INFINITY, f64::min);
    let applicable = min_disp >= PI * cone.rho.sinh() - tol();
    let hx = match x {
        ConePoint::Apex => ConePoint::Apex,
        ConePoint::Radial { base, r } => ConePoint::Radial { base: h[base], r },
    };
    let displacement = cone_distance(x, hx, cone.rho, |a, b| cone.dy(a, b));
    let expected = 2.0 * x.r();
    Ok(RotationReport { displacement, expected, applicable, equal: (displacement - expected).abs() <= 1e-9 })
}

#[derive(Debug, Clone)]
pub struct QuotientCone {
    pub cone: ConeSpace,
    /// Orbits of the original sample, in the order of `cone.points`.
    pub orbits: Vec<Vec<usize>>,
    pub min_displacement: f64,
    /// Pairs with d_Y(y, y′) ≤ l − π sinh ρ, where equality must hold.
    pub lemma_pairs: usize,
    pub lemma_max_defect: f64,
    /// max over all pairs of d_quotient − d (never positive up to tolerance).
    pub max_increase: f64,
    /// Largest deviation from the cone built directly over Y/H.
    pub deviation_from_cone_of_quotient: f64,
}

/// Z(Y)/H for H = ⟨h⟩ with h a permutation of Y, sampled by orbit minima.
pub fn quotient_cone(cone: &ConeSpace, h: &[usize]) -> Result<QuotientCone> {
    let m = cone.base_ids.len();
    if h.len() != m || h.iter().collect::<HashSet<_>>().len() != m || h.iter().any(|&y| y >= m) {
        return invalid("h must permute Y");
    }
    let mut group: Vec<Vec<usize>> = vec![(0..m).collect()];
    loop {
        let last = group.last().unwrap();
        let next: Vec<usize> = last.iter().map(|&y| h[y]).collect();
        if next.iter().enumerate().all(|(i, &y)| i == y) {
            break;
        }
        group.push(next);
    }
    for g in &group {
        for a in 0..m {
            for b in 0..m {
                if (cone.dy(g[a], g[b]) - cone.dy(a, b)).abs() > tol() {
                    return invalid("h is not an isometry of Y");
                }
            }
        }
    }
    let l = group[1..].iter().flat_map(|g| (0..m).map(move |y| (g, y))).map(|(g, y)| cone.dy(y, g[y])).fold(f64::INFINITY, f64::min);
    let s = cone.rho.sinh();
    if group.len() > 1 && l < 2.0 * PI * s - tol() {
        return Err(Error::Precondition(format!("minimal displacement {l} is below 2π sinh ρ = {}", 2.0 * PI * s)));
    }
    // base orbits, represented by their smallest index
    let mut base_rep = vec![usize::MAX; m];
    let mut reps = vec![];
    for y in 0..m {
        if base_rep[y] == usize::MAX {
            for g in &group {
                base_rep[g[y]] = reps.len();
            }
            reps.push(y);
        }
    }
    let k = reps.len();
    let mut qmetric = vec![f64::INFINITY; k * k];
    for a in 0..m {
        for b in 0..m {
            let e = &mut qmetric[base_rep[a] * k + base_rep[b]];
            *e = e.min(cone.dy(a, b));
        }
    }
    let mut orbit_of = vec![usize::MAX; cone.points.len()];
    let mut orbits: Vec<Vec<usize>> = vec![];
    let mut qpoints = vec![];
    for (i, p) in cone.points.iter().enumerate() {
        if orbit_of[i] != usize::MAX {
            continue;
        }
        let members: Vec<usize> = match *p {
            ConePoint::Apex => vec![i],
            ConePoint::Radial { base, r } => {
                let mut v: Vec<usize> = group.iter().map(|g| cone.index_of(ConePoint::Radial { base: g[base], r }).expect("sample is H-invariant")).collect();
                v.sort_unstable();
                v.dedup();
                v
            }
        };
        for &j in &members {
            orbit_of[j] = orbits.len();
        }
        qpoints.push(match *p {
            ConePoint::Apex => ConePoint::Apex,
            ConePoint::Radial { base, r } => ConePoint::Radial { base: base_rep[base], r },
        });
        orbits.push(members);
    }
    let n = orbits.len();
    let sp = &cone.space;
    let rows = par::map_range(n, |a| {
        (0..n)
            .map(|b| orbits[a].iter().flat_map(|&p| orbits[b].iter().map(move |&q| sp.d(p, q))).fold(f64::INFINITY, f64::min))
            .collect::<Vec<f64>>()
    });
    let dist = rows.concat();
    let ids: Vec<String> = orbits.iter().map(|o| sp.id(o[0]).to_string()).collect();
    let qspace = FiniteMetricSpace::from_matrix(ids.clone(), dist.clone())?;
    let base_of = |p: &ConePoint| match p {
        ConePoint::Apex => None,
        ConePoint::Radial { base, .. } => Some(*base),
    };
    let range = l - PI * s;
    let (mut lemma_pairs, mut lemma_max_defect, mut max_increase) = (0usize, 0f64, f64::NEG_INFINITY);
    for p in 0..cone.points.len() {
        for q in 0..cone.points.len() {
            let dq = dist[orbit_of[p] * n + orbit_of[q]];
            let d = sp.d(p, q);
            max_increase = max_increase.max(dq - d);
            let dy = match (base_of(&cone.points[p]), base_of(&cone.points[q])) {
                (Some(a), Some(b)) => cone.dy(a, b),
                _ => 0.0,
            };
            if group.len() == 1 || dy <= range + tol() {
                lemma_pairs += 1;
                lemma_max_defect = lemma_max_defect.max((dq - d).abs());
            }
        }
    }
    let qcone = ConeSpace { base_ids: reps.iter().map(|&y| cone.base_ids[y].clone()).collect(), base_metric: qmetric, rho: cone.rho, points: qpoints, space: qspace };
    let mut deviation = 0f64;
    for a in 0..n {
        for b in 0..n {
            let direct = cone_distance(qcone.points[a], qcone.points[b], cone.rho, |x, y| qcone.dy(x, y));
            deviation = deviation.max((direct - qcone.space.d(a, b)).abs());
        }
    }
    Ok(QuotientCone {
        cone: qcone,
        orbits,
        min_displacement: l,
        lemma_pairs,
        lemma_max_defect,
        max_increase,
        deviation_from_cone_of_quotient: deviation,
    })
}

/// A family of subsets given by point ids, each with optional rotation words.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct FamilySpec {
    pub members: Vec<FamilyMember>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FamilyMember {
    pub subset: Vec<String>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub rotations: Vec<String>,
}

impl FamilySpec {
    pub fn subsets(&self, space: &FiniteMetricSpace) -> Result<Vec<Vec<usize>>> {
        self.members.iter().map(|m| subset_from_ids(space, &m.subset)).collect()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind")]
pub enum SamplePoint {
    Base { point: usize },
    Apex { member: usize },
    /// Interior point (y, r) of a cone, r < ρ.
    Radial { member: usize, point: usize, r: f64 },
}

#[derive(Debug, Clone)]
pub struct ConeOffSpace {
    pub base: FiniteMetricSpace,
    pub family: Vec<Vec<usize>>,
    pub rho: f64,
    pub radial: usize,
    pub points: Vec<SamplePoint>,
    /// Chain metric on the sample.
    pub space: FiniteMetricSpace,
    pub warnings: Vec<String>,
}

/// Attach a cone of radius ρ over every family member and close the d_SC
/// weights under chains (Floyd-Warshall over the sample).
pub fn build_coneoff(base: &FiniteMetricSpace, family: &[Vec<usize>], rho: f64, radial: usize, delta: f64) -> Result<ConeOffSpace> {
    if !(rho > 0.0) || radial == 0 {
        return invalid("rho must be positive and radial samples at least 1");
    }
    let nb = base.len();
    let mut points: Vec<SamplePoint> = (0..nb).map(|point| SamplePoint::Base { point }).collect();
    let mut ids: Vec<String> = base.ids().to_vec();
    let mut warnings = vec![];
    let mut cones = vec![];
    for (j, ys) in family.iter().enumerate() {
        if ys.is_empty() {
            return invalid(format!("family member {j} is empty"));
        }
        let qc = strong_quasi_convexity_check(base, ys, delta);
        if !qc.strong {
            warnings.push(format!("member {j} is not strongly quasi-convex (alpha {}, gap {:?})", qc.alpha, qc.gap));
        }
        let cone = build_cone(base, ys, rho, radial)?;
        // sample indices of this cone's points, in cone order
        let mut local = Vec::with_capacity(cone.points.len());
        for p in &cone.points {
            match *p {
                ConePoint::Apex => {
                    local.push(points.len());
                    points.push(SamplePoint::Apex { member: j });
                    ids.push(format!("v{j}"));
                }
                ConePoint::Radial { base: y, r } if (r - rho).abs() <= tol() => local.push(ys[y]),
                ConePoint::Radial { base: y, r } => {
                    local.push(points.len());
                    points.push(SamplePoint::Radial { member: j, point: ys[y], r });
                    ids.push(format!("{}#{j}", radial_id(base.id(ys[y]), r)));
                }
            }
        }
        cones.push((cone, local));
    }
    let n = points.len();
    let mut d = vec![f64::INFINITY; n * n];
    for i in 0..nb {
        for k in 0..nb {
            d[i * n + k] = base.d(i, k);
        }
    }
    for (cone, local) in &cones {
        for (a, &i) in local.iter().enumerate() {
            for (b, &k) in local.iter().enumerate() {
                let w = cone.space.d(a, b);
                if w < d[i * n + k] {
                    d[i * n + k] = w;
                }
            }
        }
    }
    for i in 0..n {
        d[i * n + i] = 0.0;
    }
    floyd_warshall(&mut d, n);
    let space = FiniteMetricSpace::from_matrix(ids, d)?;
    Ok(ConeOffSpace { base: base.clone(), family: family.to_vec(), rho, radial, points, space, warnings })
}

fn floyd_warshall(d: &mut [f64], n: usize) {
    for k in 0..n {
        let row_k: Vec<f64> = d[k * n..(k + 1) * n].to_vec();
        par::for_each_row(d, n, |_, row| {
            let dik = row[k];
            if dik.is_infinite() {
                return;
            }
            for (j, v) in row.iter_mut().enumerate() {
                let c = dik + row_k[j];
                if c < *v {
                    *v = c;
                }
            }
        });
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SandwichReport {
    pub pairs: usize,
    /// min of d_Ẋ − μ(d_X).
    pub lower_margin: f64,
    /// min of d_X − d_Ẋ.
    pub upper_margin: f64,
    pub holds: bool,
}

/// μ(d_X) ≤ d_Ẋ ≤ d_X on all base pairs.
pub fn verify_sandwich(c: &ConeOffSpace) -> SandwichReport {
    let nb = c.base.len();
    let (mut lo, mut hi) = (f64::INFINITY, f64::INFINITY);
    for x in 0..nb {
        for y in x + 1..nb {
            let dx = c.base.d(x, y);
            let dc = c.space.d(x, y);
            lo = lo.min(dc - mu(dx, c.rho));
            hi = hi.min(dx - dc);
        }
    }
    let pairs = nb * nb.saturating_sub(1) / 2;
    SandwichReport { pairs, lower_margin: lo, upper_margin: hi, holds: pairs == 0 || (lo >= -tol() && hi >= -tol()) }
}

/// Largest change of a base-pair distance between a cone-off and its refinement.
pub fn refinement_change(coarse: &ConeOffSpace, fine: &ConeOffSpace) -> Result<f64> {
    if coarse.base.len() != fine.base.len() {
        return invalid("cone-offs have different bases");
    }
    let mut worst = f64::NEG_INFINITY;
    for x in 0..coarse.base.len() {
        for y in 0..coarse.base.len() {
            worst = worst.max(fine.space.d(x, y) - coarse.space.d(x, y));
        }
    }
    Ok(worst)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConeBallReport {
    pub checked: usize,
    pub violations: Vec<(String, String)>,
}

/// For x inside Z(Y): d_Ẋ(x, x′) < d(x, Y) = ρ − r forces x′ ∈ Z(Y).
pub fn verify_cone_ball(c: &ConeOffSpace) -> ConeBallReport {
    let mut checked = 0;
    let mut violations = vec![];
    let member_sets: Vec<HashSet<usize>> = c.family.iter().map(|ys| ys.iter().copied().collect()).collect();
    let in_cone = |p: usize, j: usize| match c.points[p] {
        SamplePoint::Base { point } => member_sets[j].contains(&point),
        SamplePoint::Apex { member } | SamplePoint::Radial { member, .. } => member == j,
    };
    for (x, p) in c.points.iter().enumerate() {
        let (j, r) = match *p {
            SamplePoint::Apex { member } => (member, 0.0),
            SamplePoint::Radial { member, r, .. } => (member, r),
            SamplePoint::Base { .. } => continue,
        };
        for y in 0..c.points.len() {
            if c.space.d(x, y) < c.rho - r - tol() {
                checked += 1;
                if !in_cone(y, j) {
                    violations.push((c.space.id(x).to_string(), c.space.id(y).to_string()));
                }
            }
        }
    }
    ConeBallReport { checked, violations }
}

/// Extend a base isometry permuting the family to the sample: (y, r) in Z(Y) goes to (gy, r) in Z(gY).
pub fn extend_action(c: &ConeOffSpace, g: &[Option<usize>]) -> Result<Vec<Option<usize>>> {
    if g.len() != c.base.len() {
        return invalid("map has wrong length");
    }
    let sets: Vec<Vec<usize>> = c.family.iter().map(|ys| crate::geodesy::normalize(ys.clone())).collect();
    let mut sigma = vec![usize::MAX; sets.len()];
    let mut used = vec![false; sets.len()];
    for (j, ys) in sets.iter().enumerate() {
        let image: Option<Vec<usize>> = ys.iter().map(|&y| g[y]).collect();
        let image = image.ok_or_else(|| Error::Precondition(format!("g is undefined on member {j}")))?;
        let image = crate::geodesy::normalize(image);
        let k = (0..sets.len())
            .find(|&k| !used[k] && sets[k] == image)
            .ok_or_else(|| Error::Precondition(format!("g does not map member {j} onto a family member")))?;
        used[k] = true;
        sigma[j] = k;
    }
    let find = |p: SamplePoint| c.points.iter().position(|q| match (p, *q) {
        (SamplePoint::Apex { member: a }, SamplePoint::Apex { member: b }) => a == b,
        (SamplePoint::Radial { member: a, point: x, r }, SamplePoint::Radial { member: b, point: y, r: s }) => a == b && x == y && (r - s).abs() <= tol(),
        _ => false,
    });
    let map: Vec<Option<usize>> = c
        .points
        .iter()
        .map(|p| match *p {
            SamplePoint::Base { point } => g[point],
            SamplePoint::Apex { member } => find(SamplePoint::Apex { member: sigma[member] }),
            SamplePoint::Radial { member, point, r } => g[point].and_then(|gy| find(SamplePoint::Radial { member: sigma[member], point: gy, r })),
        })
        .collect();
    let n = map.len();
    for a in 0..n {
        let Some(ga) = map[a] else { continue };
        for b in 0..n {
            let Some(gb) = map[b] else { continue };
            if (c.space.d(ga, gb) - c.space.d(a, b)).abs() > 1e-9 {
                return Err(Error::BoundViolated(format!(
                    "extended map changes d({}, {})",
                    c.space.id(a),
                    c.space.id(b)
                )));
            }
        }
    }
    Ok(map)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::metric::GraphSpec;
    use proptest::prelude::*;

    fn cycle(n: usize) -> FiniteMetricSpace {
        FiniteMetricSpace::from_graph(&GraphSpec::cycle(n)).unwrap()
    }

    // oracle: the defining cosh formula, evaluated directly
    fn mu_direct(t: f64, rho: f64) -> f64 {
        let th = (t / rho.sinh()).min(PI);
        (rho.cosh().powi(2) - rho.sinh().powi(2) * th.cos()).acosh()
    }

    fn cone_direct(r: f64, r2: f64, dy: f64, rho: f64) -> f64 {
        let th = (dy / rho.sinh()).min(PI);
        (r.cosh() * r2.cosh() - r.sinh() * r2.sinh() * th.cos()).max(1.0).acosh()
    }

    #[test]
    fn mu_anchor_values() {
        for rho in [0.5, 1.0, 2.0, 5.0] {
            assert_eq!(mu(0.0, rho), 0.0);
            assert!((mu(PI * rho.sinh(), rho) - 2.0 * rho).abs() <= 1e-9);
            assert!((mu(1e3, rho) - 2.0 * rho).abs() <= 1e-12);
        }
        // large ρ: μ(t) ≈ 2 asinh(t/2)
        assert!((mu(3.0, 800.0) - 2.0 * 1.5f64.asinh()).abs() < 1e-12);
        assert!((mu(3.0, 1e6) - 2.0 * 1.5f64.asinh()).abs() < 1e-12);
    }

    #[test]
    fn cone_on_single_point_is_segment() {
        let sp = cycle(3);
        let cone = build_cone(&sp, &[0], 2.0, 4).unwrap();
        assert_eq!(cone.points.len(), 5);
        assert_eq!(cone.delta().delta, 0.0);
        assert_eq!(cone.space.d(0, 4), 2.0);
    }

    #[test]
    fn cone_over_c6() {
        let sp = cycle(6);
        let cone = build_cone(&sp, &(0..6).collect::<Vec<_>>(), 1.0, 4).unwrap();
        for (i, p) in cone.points.iter().enumerate() {
            assert_eq!(cone.space.d(0, i), p.r());
        }
        assert!(cone.delta().delta <= 2.0 * crate::metric::PLANE_DELTA_DEFAULT + 1e-6);
    }

    #[test]
    fn cone_far_points_meet_through_apex() {
        let rho: f64 = 0.5;
        let d = PI * rho.sinh();
        let cone = ConeSpace::from_metric(vec!["a".into(), "b".into()], vec![0.0, d, d, 0.0], rho, 2).unwrap();
        let a = cone.index_of(ConePoint::Radial { base: 0, r: rho }).unwrap();
        let b = cone.index_of(ConePoint::Radial { base: 1, r: rho }).unwrap();
        assert!((cone.space.d(a, b) - 2.0 * rho).abs() < 1e-12);
    }

    #[test]
    fn rotation_lemma_on_c24() {
        let sp = cycle(24);
        let cone = build_cone(&sp, &(0..24).collect::<Vec<_>>(), 0.5, 4).unwrap();
        let h: Vec<usize> = (0..24).map(|y| (y + 6) % 24).collect();
        for p in &cone.points {
            let rep = rotation_displacement(&cone, &h, *p).unwrap();
            assert!(rep.applicable && rep.equal, "{rep:?}");
        }
        let small: Vec<usize> = (0..24).map(|y| (y + 1) % 24).collect();
        let rep = rotation_displacement(&cone, &small, ConePoint::Radial { base: 0, r: 0.5 }).unwrap();
        assert!(!rep.applicable);
    }

    #[test]
    fn quotient_matches_cone_over_quotient() {
        let sp = cycle(24);
        let cone = build_cone(&sp, &(0..24).collect::<Vec<_>>(), 0.5, 3).unwrap();
        let h: Vec<usize> = (0..24).map(|y| (y + 6) % 24).collect();
        let q = quotient_cone(&cone, &h).unwrap();
        assert_eq!(q.cone.base_ids.len(), 6);
        assert!(q.lemma_max_defect <= 1e-12);
        assert!(q.max_increase <= 1e-12);
        assert!(q.deviation_from_cone_of_quotient <= 1e-12);
        // the orbit-min oracle against a cone built over C6 directly
        let c6 = build_cone(&cycle(6), &(0..6).collect::<Vec<_>>(), 0.5, 3).unwrap();
        assert_eq!(c6.points.len(), q.cone.points.len());
        for a in 0..c6.points.len() {
            for b in 0..c6.points.len() {
                assert!((c6.space.d(a, b) - q.cone.space.d(a, b)).abs() < 1e-12);
            }
        }
        let trivial: Vec<usize> = (0..24).collect();
        assert_eq!(quotient_cone(&cone, &trivial).unwrap().cone.points.len(), cone.points.len());
        let small: Vec<usize> = (0..24).map(|y| (y + 1) % 24).collect();
        assert!(quotient_cone(&cone, &small).is_err());
    }

    #[test]
    fn empty_family_coneoff_is_base() {
        let sp = cycle(7);
        let c = build_coneoff(&sp, &[], 1.0, 4, 1.0).unwrap();
        assert_eq!(c.space.matrix(), sp.matrix());
        assert!(verify_sandwich(&c).holds);
        assert_eq!(verify_cone_ball(&c).checked, 0);
    }

    // oracle: chain metric by Bellman-Ford relaxation over d_SC weights
    #[test]
    fn coneoff_against_relaxation_oracle() {
        let sp = cycle(12);
        let fam = vec![(0..12).collect::<Vec<_>>()];
        let c = build_coneoff(&sp, &fam, 0.4, 2, 1.0).unwrap();
        let n = c.points.len();
        let cone = build_cone(&sp, &fam[0], 0.4, 2).unwrap();
        let idx = |p: SamplePoint| -> ConePoint {
            match p {
                SamplePoint::Base { point } => ConePoint::Radial { base: point, r: 0.4 },
                SamplePoint::Apex { .. } => ConePoint::Apex,
                SamplePoint::Radial { point, r, .. } => ConePoint::Radial { base: point, r },
            }
        };
        let w = |a: usize, b: usize| -> f64 {
            let cd = cone.space.d(cone.index_of(idx(c.points[a])).unwrap(), cone.index_of(idx(c.points[b])).unwrap());
            match (c.points[a], c.points[b]) {
                (SamplePoint::Base { point: x }, SamplePoint::Base { point: y }) => cd.min(sp.d(x, y)),
                _ => cd,
            }
        };
        for s in 0..n {
            let mut dist = vec![f64::INFINITY; n];
            dist[s] = 0.0;
            for _ in 0..n {
                for a in 0..n {
                    for b in 0..n {
                        let c2 = dist[a] + w(a, b);
                        if c2 < dist[b] {
                            dist[b] = c2;
                        }
                    }
                }
            }
            for t in 0..n {
                assert!((dist[t] - c.space.d(s, t)).abs() < 1e-12);
            }
        }
        let sw = verify_sandwich(&c);
        assert!(sw.holds, "{sw:?}");
        assert!(verify_cone_ball(&c).violations.is_empty());
        // antipodes on C12 are 6 apart but at most 0.8 through the apex
        assert!(c.space.d(0, 6) <= 0.8 + 1e-12);
    }

    #[test]
    fn extension_of_rotation() {
        let sp = cycle(8);
        let fam = vec![vec![0, 1, 2], vec![4, 5, 6]];
        let c = build_coneoff(&sp, &fam, 1.0, 3, 1.0).unwrap();
        let g: Vec<Option<usize>> = (0..8).map(|y| Some((y + 4) % 8)).collect();
        let m = extend_action(&c, &g).unwrap();
        assert!(m.iter().all(|x| x.is_some()));
        let id: Vec<Option<usize>> = (0..8).map(Some).collect();
        assert_eq!(extend_action(&c, &id).unwrap(), (0..c.points.len()).map(Some).collect::<Vec<_>>());
        let bad: Vec<Option<usize>> = (0..8).map(|y| Some((y + 1) % 8)).collect();
        assert!(extend_action(&c, &bad).is_err());
    }

    proptest! {
        #[test]
        fn mu_matches_formula_and_bounds(t in 0.0f64..40.0, rho in 0.2f64..6.0) {
            let m = mu(t, rho);
            prop_assert!((m - mu_direct(t, rho)).abs() <= 1e-7 * (1.0 + m));
            prop_assert!(m <= t + 1e-12);
            prop_assert!(m >= mu_lower_bound(t, rho) - 1e-12);
            prop_assert!(m <= 2.0 * rho + 1e-12);
        }

        #[test]
        fn mu_concave_nondecreasing(t in 0.0f64..20.0, h in 1e-3f64..0.5, rho in 0.3f64..4.0) {
            let (a, b, c) = (mu(t, rho), mu(t + h, rho), mu(t + 2.0 * h, rho));
            prop_assert!(b >= a - 1e-12);
            prop_assert!(c - 2.0 * b + a <= 1e-9);
        }

        #[test]
        fn cone_formula_matches(r in 0.0f64..3.0, r2 in 0.0f64..3.0, dy in 0.0f64..20.0, rho in 0.3f64..3.0) {
            let d = radial_distance(r, r2, dy, rho);
            prop_assert!((d - cone_direct(r, r2, dy, rho)).abs() <= 1e-6);
            prop_assert!((d - radial_distance(r2, r, dy, rho)).abs() <= 1e-12);
        }
    }
}
