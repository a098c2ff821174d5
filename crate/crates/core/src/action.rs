//! Partial isometric actions on finite spaces ("windows") and the quantities
//! attached to elements: translation lengths, axes, nerves, cylinders,
//! characteristic sets, acylindricity counts and the ping-pong style criteria.

use std::collections::{BTreeMap, HashMap, HashSet};
use std::fmt;
use std::sync::{Arc, Mutex};

use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::geodesy::{self, DiscretePath};
use crate::metric::{FiniteMetricSpace, GraphSpec};
use crate::{par, tol};

/// A word is a list of generator indices, applied right to left.
pub type Word = Vec<usize>;

/// Decides equality of group elements given as words.
pub trait WordProblem: Send + Sync + fmt::Debug {
    /// A key equal for two words iff they represent the same element.
    fn canonical(&self, word: &[usize]) -> String;
}

#[derive(Debug, Clone, PartialEq)]
pub struct Generator {
    pub name: String,
    pub map: Vec<Option<usize>>,
    pub inverse: usize,
}

/// JSON form of one generator.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GeneratorSpec {
    pub name: String,
    pub inverse: String,
    pub mapping: BTreeMap<String, String>,
}

/// JSON form of an action: generators by point-id mappings with named inverses.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ActionSpec {
    pub generators: Vec<GeneratorSpec>,
    #[serde(default = "default_word_length")]
    pub max_word_length: usize,
    /// Set when the underlying space is known to be a tree.
    #[serde(default)]
    pub tree: bool,
    /// Lower bound on stable lengths of loxodromics known from the global structure.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub structural_rinj: Option<f64>,
}

fn default_word_length() -> usize {
    4
}

#[derive(Debug)]
pub struct ActionWindow {
    pub space: Arc<FiniteMetricSpace>,
    graph: Option<GraphSpec>,
    gens: Vec<Generator>,
    pub max_word_length: usize,
    pub tree: bool,
    pub structural_rinj: Option<f64>,
    oracle: Option<Arc<dyn WordProblem>>,
    cache: Mutex<HashMap<usize, Arc<Vec<Word>>>>,
}

impl Clone for ActionWindow {
    fn clone(&self) -> Self {
        ActionWindow {
            space: self.space.clone(),
            graph: self.graph.clone(),
            gens: self.gens.clone(),
            max_word_length: self.max_word_length,
            tree: self.tree,
            structural_rinj: self.structural_rinj,
            oracle: self.oracle.clone(),
            cache: Mutex::new(HashMap::new()),
        }
    }
}

impl ActionWindow {
    /// Build from generator maps given as (name, inverse name, map); inverse
    /// generators are created when missing. Every map is checked to be a
    /// distance-preserving partial injection.
    pub fn new(
        space: Arc<FiniteMetricSpace>,
        graph: Option<GraphSpec>,
        generators: Vec<(String, String, Vec<Option<usize>>)>,
        max_word_length: usize,
    ) -> Result<Self> {
        let n = space.len();
        let mut gens: Vec<Generator> = Vec::new();
        let mut by_name: HashMap<String, usize> = HashMap::new();
        for (name, inv, map) in generators {
            if name.is_empty() || name == "1" {
                return invalid(format!("reserved generator name `{name}`"));
            }
            if map.len() != n {
                return invalid(format!("generator `{name}` map has wrong length"));
            }
            check_isometry(&space, &name, &map)?;
            if by_name.contains_key(&name) {
                return invalid(format!("duplicate generator `{name}`"));
            }
            by_name.insert(name.clone(), gens.len());
            gens.push(Generator { name: name.clone(), map, inverse: usize::MAX });
            if inv != name && !by_name.contains_key(&inv) {
                let g = &gens[gens.len() - 1];
                let mut im = vec![None; n];
                for (x, y) in g.map.iter().enumerate() {
                    if let Some(y) = y {
                        im[*y] = Some(x);
                    }
                }
                by_name.insert(inv.clone(), gens.len());
                gens.push(Generator { name: inv.clone(), map: im, inverse: usize::MAX });
            }
            let (gi, ii) = (by_name[&name], by_name[&inv]);
            gens[gi].inverse = ii;
            gens[ii].inverse = gi;
        }
        for g in &gens {
            let inv = &gens[g.inverse];
            for (x, y) in g.map.iter().enumerate() {
                if let Some(y) = y {
                    if inv.map[*y] != Some(x) {
                        return invalid(format!("`{}` is not inverse to `{}`", inv.name, g.name));
                    }
                }
            }
        }
        let names: Vec<&String> = gens.iter().map(|g| &g.name).collect();
        for a in &names {
            for b in &names {
                if a != b && b.starts_with(a.as_str()) {
                    return invalid(format!("generator names `{a}` and `{b}` are not prefix-free"));
                }
            }
        }
        Ok(ActionWindow {
            space,
            graph,
            gens,
            max_word_length,
            tree: false,
            structural_rinj: None,
            oracle: None,
            cache: Mutex::new(HashMap::new()),
        })
    }

    pub fn from_spec(graph: &GraphSpec, spec: &ActionSpec) -> Result<Self> {
        let space = Arc::new(FiniteMetricSpace::from_graph(graph)?);
        let mut gens = Vec::new();
        for g in &spec.generators {
            let mut map = vec![None; space.len()];
            for (a, b) in &g.mapping {
                let (i, j) = (space.index_of(a)?, space.index_of(b)?);
                map[i] = Some(j);
            }
            gens.push((g.name.clone(), g.inverse.clone(), map));
        }
        let mut w = ActionWindow::new(space, Some(graph.clone()), gens, spec.max_word_length)?;
        w.tree = spec.tree;
        w.structural_rinj = spec.structural_rinj;
        Ok(w)
    }

    /// JSON form; inverse generators that were synthesized are folded back in.
    pub fn to_spec(&self) -> ActionSpec {
        let mut out = Vec::new();
        let mut done = HashSet::new();
        for (i, g) in self.gens.iter().enumerate() {
            if done.contains(&i) {
                continue;
            }
            done.insert(i);
            done.insert(g.inverse);
            let mapping = g
                .map
                .iter()
                .enumerate()
                .filter_map(|(x, y)| y.map(|y| (self.space.id(x).to_string(), self.space.id(y).to_string())))
                .collect();
            out.push(GeneratorSpec { name: g.name.clone(), inverse: self.gens[g.inverse].name.clone(), mapping });
        }
        ActionSpec { generators: out, max_word_length: self.max_word_length, tree: self.tree, structural_rinj: self.structural_rinj }
    }

    pub fn graph(&self) -> Option<&GraphSpec> {
        self.graph.as_ref()
    }

    pub fn with_oracle(mut self, oracle: Arc<dyn WordProblem>) -> Self {
        self.oracle = Some(oracle);
        self.cache = Mutex::new(HashMap::new());
        self
    }

    pub fn oracle(&self) -> Option<&Arc<dyn WordProblem>> {
        self.oracle.as_ref()
    }

    pub fn generators(&self) -> &[Generator] {
        &self.gens
    }

    pub fn generator_index(&self, name: &str) -> Option<usize> {
        self.gens.iter().position(|g| g.name == name)
    }

    /// Parse a word by greedy matching of generator names; "" and "1" are the identity.
    pub fn parse(&self, text: &str) -> Result<Word> {
        let t = text.trim();
        if t.is_empty() || t == "1" {
            return Ok(Vec::new());
        }
        let mut rest = t;
        let mut out = Vec::new();
        while !rest.is_empty() {
            let hit = self
                .gens
                .iter()
                .enumerate()
                .filter(|(_, g)| rest.starts_with(g.name.as_str()))
                .max_by_key(|(_, g)| g.name.len());
            match hit {
                Some((i, g)) => {
                    out.push(i);
                    rest = &rest[g.name.len()..];
                }
                None => return Err(Error::UnknownGenerator(text.to_string())),
            }
        }
        Ok(out)
    }

    pub fn format(&self, w: &[usize]) -> String {
        if w.is_empty() {
            return "1".into();
        }
        w.iter().map(|&i| self.gens[i].name.as_str()).collect()
    }

    pub fn inverse(&self, w: &[usize]) -> Word {
        w.iter().rev().map(|&i| self.gens[i].inverse).collect()
    }

    pub fn power(&self, w: &[usize], k: usize) -> Word {
        w.iter().copied().cycle().take(w.len() * k).collect()
    }

    pub fn free_reduce(&self, w: &[usize]) -> Word {
        let mut out: Word = Vec::with_capacity(w.len());
        for &a in w {
            if let Some(&b) = out.last() {
                if self.gens[b].inverse == a {
                    out.pop();
                    continue;
                }
            }
            out.push(a);
        }
        out
    }

    /// Image of `x` under the word, or `None` if the route leaves the window.
    pub fn apply(&self, w: &[usize], x: usize) -> Option<usize> {
        let mut y = x;
        for &g in w.iter().rev() {
            y = self.gens[g].map[y]?;
        }
        Some(y)
    }

    pub fn is_total(&self) -> bool {
        self.gens.iter().all(|g| g.map.iter().all(Option::is_some))
    }

    /// Element key: word-problem oracle if attached, the permutation for total
    /// actions, and the freely reduced word otherwise.
    pub fn canonical(&self, w: &[usize]) -> String {
        if let Some(o) = &self.oracle {
            return o.canonical(w);
        }
        if self.is_total() {
            let img: Vec<String> = (0..self.space.len()).map(|x| self.apply(w, x).unwrap().to_string()).collect();
            return img.join(",");
        }
        self.format(&self.free_reduce(w))
    }

    pub fn is_trivial(&self, w: &[usize]) -> bool {
        self.canonical(w) == self.canonical(&[])
    }

    /// One shortest word per element of word length at most `max_len`, in BFS order.
    pub fn elements(&self, max_len: usize) -> Arc<Vec<Word>> {
        if let Some(v) = self.cache.lock().unwrap().get(&max_len) {
            return v.clone();
        }
        let mut seen = HashSet::new();
        let mut all: Vec<Word> = vec![Vec::new()];
        seen.insert(self.canonical(&[]));
        let mut frontier: Vec<Word> = vec![Vec::new()];
        for _ in 0..max_len {
            let mut next = Vec::new();
            for w in &frontier {
                for g in 0..self.gens.len() {
                    let mut v = Vec::with_capacity(w.len() + 1);
                    v.push(g);
                    v.extend_from_slice(w);
                    if seen.insert(self.canonical(&v)) {
                        next.push(v);
                    }
                }
            }
            all.extend(next.iter().cloned());
            frontier = next;
        }
        let all = Arc::new(all);
        self.cache.lock().unwrap().insert(max_len, all.clone());
        all
    }

    /// Points where the word is defined, with their images.
    pub fn domain(&self, w: &[usize]) -> Vec<(usize, usize)> {
        (0..self.space.len()).filter_map(|x| self.apply(w, x).map(|y| (x, y))).collect()
    }

    /// Same action on the space with every edge split into `k` pieces.
    pub fn subdivided(&self, k: usize) -> Result<ActionWindow> {
        let g = self.graph.as_ref().ok_or_else(|| Error::Invalid("window has no graph to subdivide".into()))?;
        let fine = g.subdivide(k)?;
        let space = Arc::new(FiniteMetricSpace::from_graph(&fine)?);
        let mut edge_at: HashMap<(usize, usize), usize> = HashMap::new();
        for (e, (u, v, _)) in g.edges.iter().enumerate() {
            edge_at.insert((self.space.index_of(u)?, self.space.index_of(v)?), e);
        }
        let mut gens = Vec::new();
        let mut done = HashSet::new();
        for (gi, gen) in self.gens.iter().enumerate() {
            if done.contains(&gi) {
                continue;
            }
            done.insert(gi);
            done.insert(gen.inverse);
            let mut map = vec![None; space.len()];
            for (x, y) in gen.map.iter().enumerate() {
                if let Some(y) = y {
                    map[space.index_of(self.space.id(x))?] = Some(space.index_of(self.space.id(*y))?);
                }
            }
            for (u, v, _) in &g.edges {
                let (a, b) = (self.space.index_of(u)?, self.space.index_of(v)?);
                let (Some(ga), Some(gb)) = (gen.map[a], gen.map[b]) else { continue };
                let (target, flip) = match (edge_at.get(&(ga, gb)), edge_at.get(&(gb, ga))) {
                    (Some(&e), _) => (e, false),
                    (None, Some(&e)) => (e, true),
                    _ => continue,
                };
                let (tu, tv, _) = &g.edges[target];
                for i in 1..k {
                    let j = if flip { k - i } else { i };
                    let from = space.index_of(&format!("{u}~{v}#{i}"))?;
                    let to = space.index_of(&format!("{tu}~{tv}#{j}"))?;
                    map[from] = Some(to);
                }
            }
            gens.push((gen.name.clone(), self.gens[gen.inverse].name.clone(), map));
        }
        let mut w = ActionWindow::new(space, Some(fine), gens, self.max_word_length)?;
        w.tree = self.tree;
        w.structural_rinj = self.structural_rinj;
        w.oracle = self.oracle.clone();
        Ok(w)
    }
}

fn check_isometry(space: &FiniteMetricSpace, name: &str, map: &[Option<usize>]) -> Result<()> {
    let dom: Vec<(usize, usize)> = map.iter().enumerate().filter_map(|(x, y)| y.map(|y| (x, y))).collect();
    let mut hit = HashSet::new();
    for &(_, y) in &dom {
        if !hit.insert(y) {
            return invalid(format!("generator `{name}` is not injective"));
        }
    }
    let bad = par::map_range(dom.len(), |i| {
        let (x, gx) = dom[i];
        dom[i + 1..].iter().find(|&&(y, gy)| (space.d(gx, gy) - space.d(x, y)).abs() > tol()).map(|&(y, _)| (x, y))
    });
    if let Some((x, y)) = bad.into_iter().flatten().next() {
        return invalid(format!("generator `{name}` changes d({}, {})", space.id(x), space.id(y)));
    }
    Ok(())
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TranslationLength {
    pub value: f64,
    /// True when the word is defined on the whole window, so the minimum is exact.
    pub exact: bool,
    pub witness: String,
    pub domain_size: usize,
}

/// min over the composable domain of d(gx, x).
pub fn translation_length(window: &ActionWindow, w: &[usize]) -> Result<TranslationLength> {
    let dom = window.domain(w);
    let sp = &window.space;
    let best = dom
        .iter()
        .map(|&(x, y)| (sp.d(x, y), x))
        .min_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)))
        .ok_or_else(|| Error::WindowExhausted(format!("word {} has empty domain", window.format(w))))?;
    Ok(TranslationLength {
        value: best.0,
        exact: dom.len() == sp.len(),
        witness: sp.id(best.1).to_string(),
        domain_size: dom.len(),
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StableLength {
    pub value: f64,
    pub power: usize,
    pub base_point: String,
    /// d(gᵏx, x)/k for k = 1..power at the base point.
    pub ratios: Vec<f64>,
    pub periodic: bool,
    pub exact: bool,
}

fn orbit(window: &ActionWindow, w: &[usize], x: usize, max_power: usize) -> (Vec<usize>, bool) {
    let mut pts = vec![x];
    let mut cur = x;
    for _ in 0..max_power {
        match window.apply(w, cur) {
            Some(y) => {
                pts.push(y);
                if y == x {
                    return (pts, true);
                }
                cur = y;
            }
            None => break,
        }
    }
    (pts, false)
}

/// d(gᴺx, x)/N at the largest usable N, minimized over base points reaching it.
pub fn stable_translation_length(window: &ActionWindow, w: &[usize], max_power: usize) -> Result<StableLength> {
    let sp = &window.space;
    let n = sp.len();
    let orbits = par::map_range(n, |x| orbit(window, w, x, max_power));
    if let Some(x) = (0..n).find(|&x| orbits[x].1) {
        let len = orbits[x].0.len() - 1;
        return Ok(StableLength {
            value: 0.0,
            power: len,
            base_point: sp.id(x).to_string(),
            ratios: (1..=len).map(|k| sp.d(orbits[x].0[k], x) / k as f64).collect(),
            periodic: true,
            exact: true,
        });
    }
    let top = orbits.iter().map(|o| o.0.len() - 1).max().unwrap_or(0);
    if top < 2 {
        return Err(Error::WindowExhausted(format!("no composable power >= 2 of {}", window.format(w))));
    }
    let (x, value) = (0..n)
        .filter(|&x| orbits[x].0.len() - 1 == top)
        .map(|x| (x, sp.d(orbits[x].0[top], x) / top as f64))
        .min_by(|a, b| a.1.total_cmp(&b.1).then(a.0.cmp(&b.0)))
        .unwrap();
    let ratios = (1..=top).map(|k| sp.d(orbits[x].0[k], x) / k as f64).collect();
    let len = translation_length(window, w)?.value;
    Ok(StableLength {
        value,
        power: top,
        base_point: sp.id(x).to_string(),
        ratios,
        periodic: false,
        exact: window.tree && (value - len).abs() <= tol(),
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Kind {
    Elliptic,
    LoxodromicEstimate,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IsometryClassification {
    pub kind: Kind,
    pub len: f64,
    pub stable_len: f64,
    pub slope: f64,
    pub certificate: String,
}

/// Elliptic when an orbit closes or displacements do not grow; loxodromic
/// estimate when they grow at every step. Anything else is inconclusive.
pub fn classify(window: &ActionWindow, w: &[usize], max_power: usize) -> Result<IsometryClassification> {
    let len = translation_length(window, w)?.value;
    let st = stable_translation_length(window, w, max_power)?;
    let name = window.format(w);
    if st.periodic {
        return Ok(IsometryClassification {
            kind: Kind::Elliptic,
            len,
            stable_len: 0.0,
            slope: 0.0,
            certificate: format!("{name}^{} fixes {}", st.power, st.base_point),
        });
    }
    let disp: Vec<f64> = st.ratios.iter().enumerate().map(|(k, r)| r * (k + 1) as f64).collect();
    let n = disp.len();
    let slope = (disp[n - 1] - disp[0]) / (n - 1) as f64;
    let eps = tol();
    if slope > eps && disp.windows(2).all(|p| p[1] > p[0] + eps) {
        return Ok(IsometryClassification {
            kind: Kind::LoxodromicEstimate,
            len,
            stable_len: st.value,
            slope,
            certificate: format!("displacements {disp:?} at {} grow at every power", st.base_point),
        });
    }
    if disp[n - 1] <= disp[0] + eps {
        return Ok(IsometryClassification {
            kind: Kind::Elliptic,
            len,
            stable_len: st.value,
            slope,
            certificate: format!("displacements {disp:?} at {} do not grow", st.base_point),
        });
    }
    Err(Error::Precondition(format!("inconclusive: displacements {disp:?} of {name} grow irregularly")))
}

/// {x in domain : d(gx, x) < len(g) + 8δ}; the tolerance keeps the minimizer when δ = 0.
pub fn axis(window: &ActionWindow, w: &[usize], delta: f64) -> Result<Vec<usize>> {
    let len = translation_length(window, w)?.value;
    let sp = &window.space;
    Ok(window.domain(w).into_iter().filter(|&(x, y)| sp.d(x, y) < len + 8.0 * delta + tol()).map(|(x, _)| x).collect())
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Nerve {
    pub path: DiscretePath,
    pub fundamental_length: f64,
    pub periods: usize,
}

/// Concatenation of a geodesic x → gx with its translates, through a point of minimal displacement.
pub fn nerve(window: &ActionWindow, w: &[usize], l: f64) -> Result<Nerve> {
    if !(l > 0.0) {
        return invalid("nerve parameter must be positive");
    }
    let tl = translation_length(window, w)?;
    if tl.value <= tol() {
        return Err(Error::Precondition(format!("{} is not loxodromic", window.format(w))));
    }
    let sp = &window.space;
    let x = sp.index_of(&tl.witness)?;
    let gx = window.apply(w, x).unwrap();
    let seg = geodesy::geodesic(sp, x, gx);
    let mut pts = seg.clone();
    let mut cur = seg;
    let mut periods = 1;
    loop {
        let next: Option<Vec<usize>> = cur.iter().map(|&p| window.apply(w, p)).collect();
        match next {
            Some(nx) => {
                pts.extend_from_slice(&nx[1..]);
                cur = nx;
                periods += 1;
            }
            None => break,
        }
        if periods > sp.len() {
            break;
        }
    }
    Ok(Nerve { path: DiscretePath::from_points(sp, pts)?, fundamental_length: sp.d(x, gx), periods })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Cylinder {
    pub members: Vec<usize>,
    pub outer_approximation: bool,
}

/// 38δ-neighborhood of the axis, the computable outer realization of the cylinder.
pub fn cylinder(window: &ActionWindow, w: &[usize], delta: f64) -> Result<Cylinder> {
    let ax = axis(window, w, delta)?;
    Ok(Cylinder { members: geodesy::neighborhood(&window.space, &ax, 38.0 * delta), outer_approximation: true })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LoxodromicPair {
    pub word: String,
    pub displacement_g: f64,
    pub displacement_h: f64,
    pub product: f64,
}

/// Returns g⁻¹h when both displacements at x dominate 2(gx|hx)_x + 6δ.
pub fn find_loxodromic_pair(window: &ActionWindow, g: &[usize], h: &[usize], x: usize, delta: f64) -> Option<LoxodromicPair> {
    let sp = &window.space;
    let (gx, hx) = (window.apply(g, x)?, window.apply(h, x)?);
    let mut w = window.inverse(g);
    w.extend_from_slice(h);
    if window.is_trivial(&w) {
        return None;
    }
    let (dg, dh) = (sp.d(gx, x), sp.d(hx, x));
    let p = sp.gp(gx, hx, x);
    let eps = tol();
    // positive displacement stands in for the standing assumption δ > 0
    if dg <= eps || dh <= eps {
        return None;
    }
    (dg + eps >= 2.0 * p + 6.0 * delta && dh + eps >= 2.0 * p + 6.0 * delta).then(|| LoxodromicPair {
        word: window.format(&window.free_reduce(&w)),
        displacement_g: dg,
        displacement_h: dh,
        product: p,
    })
}

/// Ping-pong test at x. Trivial or repeated generators fail outright.
pub fn free_subgroup_certificate(window: &ActionWindow, gens: &[Word], x: usize, delta: f64) -> bool {
    let sp = &window.space;
    let r = gens.len();
    if r == 0 {
        return false;
    }
    let mut img = Vec::with_capacity(r);
    for g in gens {
        if window.is_trivial(g) {
            return false;
        }
        let (Some(p), Some(m)) = (window.apply(g, x), window.apply(&window.inverse(g), x)) else { return false };
        img.push((p, m));
    }
    for i in 0..r {
        for j in 0..r {
            for eps_sign in [1i8, -1] {
                let mut w = if eps_sign == 1 { window.inverse(&gens[i]) } else { gens[i].clone() };
                w.extend_from_slice(&gens[j]);
                if window.is_trivial(&w) {
                    if i != j {
                        return false;
                    }
                    continue;
                }
                let gi = if eps_sign == 1 { img[i].0 } else { img[i].1 };
                let gj = img[j].0;
                let lhs = 2.0 * sp.gp(gi, gj, x);
                let rhs = sp.d(img[i].0, x).min(sp.d(img[j].0, x)) + delta;
                if !(lhs < rhs - tol()) {
                    return false;
                }
            }
        }
    }
    true
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NonElementaryReport {
    pub holds: bool,
    pub inequalities: [bool; 3],
}

/// The three displacement inequalities for a pair (u, v) at x with parameter A.
pub fn non_elementary_pair_certificate(
    window: &ActionWindow,
    u: &[usize],
    v: &[usize],
    x: usize,
    a: f64,
    delta: f64,
) -> Result<NonElementaryReport> {
    let sp = &window.space;
    let at = |w: &[usize]| window.apply(w, x).ok_or_else(|| Error::WindowExhausted(format!("{} undefined at {}", window.format(w), sp.id(x))));
    let (up, um) = (at(u)?, at(&window.inverse(u))?);
    let (vp, vm) = (at(v)?, at(&window.inverse(v))?);
    let (du, dv) = (sp.d(up, x), sp.d(vp, x));
    let eps = tol();
    let bound = du.min(dv) - a - 6.0 * delta;
    let one = [up, um].iter().all(|&p| [vp, vm].iter().all(|&q| 2.0 * sp.gp(p, q, x) < bound - eps));
    let two = 2.0 * sp.gp(up, um, x) < du + a - eps;
    let three = 2.0 * sp.gp(vp, vm, x) < dv + a - eps;
    Ok(NonElementaryReport { holds: one && two && three, inequalities: [one, two, three] })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AcylRow {
    pub d: f64,
    pub n: usize,
}

/// For each realized distance d, the largest number of elements moving both
/// points of a pair at distance ≥ d by at most l.
pub fn acylindricity_table(window: &ActionWindow, l: f64) -> Result<Vec<AcylRow>> {
    if l < 0.0 {
        return invalid("l must be non-negative");
    }
    let sp = &window.space;
    let n = sp.len();
    let elems = window.elements(window.max_word_length);
    let eps = tol();
    let near: Vec<Vec<usize>> = par::map_range(elems.len(), |e| {
        (0..n).filter(|&x| matches!(window.apply(&elems[e], x), Some(y) if sp.d(x, y) <= l + eps)).collect()
    });
    let mut count = vec![0u32; n * n];
    for s in &near {
        for &x in s {
            for &y in s {
                count[x * n + y] += 1;
            }
        }
    }
    // distinct distances, then suffix maxima
    let mut best: BTreeMap<u64, usize> = BTreeMap::new();
    for x in 0..n {
        for y in x..n {
            let key = sp.d(x, y).to_bits();
            let e = best.entry(key).or_insert(0);
            *e = (*e).max(count[x * n + y] as usize);
        }
    }
    let mut rows: Vec<AcylRow> = best.into_iter().map(|(k, c)| AcylRow { d: f64::from_bits(k), n: c }).collect();
    rows.sort_by(|a, b| a.d.total_cmp(&b.d));
    let mut running = 0;
    for r in rows.iter_mut().rev() {
        running = running.max(r.n);
        r.n = running;
    }
    Ok(rows)
}

/// {x : d(hx, x) ≤ 11δ for every h in H}, over the common domain.
pub fn characteristic_set(window: &ActionWindow, hs: &[Word], delta: f64) -> Vec<usize> {
    let sp = &window.space;
    (0..sp.len())
        .filter(|&x| hs.iter().all(|h| matches!(window.apply(h, x), Some(y) if sp.d(x, y) <= 11.0 * delta + tol())))
        .collect()
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub enum Elementarity {
    /// Common near-fixed point (bounded orbit surrogate).
    Elliptic,
    /// Some loxodromic axis preserved by every member (shared-axis surrogate).
    Loxodromic(String),
    NonElementary,
}

/// Desk-scale replacement for the boundary definition of elementary subgroups.
///
/// Candidate loxodromics are the members and their pairwise quotients gᵢ⁻¹gⱼ.
pub fn elementary_surrogate(window: &ActionWindow, words: &[Word], delta: f64, max_power: usize) -> Elementarity {
    if !characteristic_set(window, words, delta).is_empty() {
        return Elementarity::Elliptic;
    }
    let mut cands: Vec<Word> = words.to_vec();
    for i in 0..words.len() {
        for j in 0..words.len() {
            if i != j {
                let mut w = window.inverse(&words[i]);
                w.extend_from_slice(&words[j]);
                cands.push(window.free_reduce(&w));
            }
        }
    }
    for c in &cands {
        let Ok(cl) = classify(window, c, max_power) else { continue };
        if cl.kind != Kind::LoxodromicEstimate {
            continue;
        }
        let Ok(ax) = axis(window, c, delta) else { continue };
        let on_axis: HashSet<usize> = ax.iter().copied().collect();
        let dom: HashSet<usize> = window.domain(c).into_iter().map(|p| p.0).collect();
        let preserved = words.iter().all(|g| {
            ax.iter().all(|&x| match window.apply(g, x) {
                Some(y) => on_axis.contains(&y) || !dom.contains(&y),
                None => true,
            })
        });
        if preserved {
            return Elementarity::Loxodromic(window.format(c));
        }
    }
    Elementarity::NonElementary
}

/// Free group of the given rank acting on the ball of its Cayley tree by left multiplication.
pub fn free_group_window(rank: usize, radius: usize, max_word_length: usize) -> Result<ActionWindow> {
    if rank == 0 || rank > 13 {
        return invalid("rank must be between 1 and 13");
    }
    let letters: Vec<char> = "abcdefghijklm".chars().take(rank).collect();
    // letter indices: 2i is the generator, 2i+1 its inverse
    let inv = |l: usize| l ^ 1;
    let mut words: Vec<Vec<usize>> = vec![vec![]];
    let mut frontier = vec![vec![]];
    for _ in 0..radius {
        let mut next = Vec::new();
        for w in &frontier {
            for l in 0..2 * rank {
                if w.last().map_or(true, |&b| b != inv(l)) {
                    let mut v: Vec<usize> = w.clone();
                    v.push(l);
                    next.push(v);
                }
            }
        }
        words.extend(next.iter().cloned());
        frontier = next;
    }
    let name = |w: &[usize]| -> String {
        if w.is_empty() {
            return "e".into();
        }
        w.iter().map(|&l| if l % 2 == 0 { letters[l / 2] } else { letters[l / 2].to_ascii_uppercase() }).collect()
    };
    let index: HashMap<Vec<usize>, usize> = words.iter().cloned().enumerate().map(|(i, w)| (w, i)).collect();
    let vertices: Vec<String> = words.iter().map(|w| name(w)).collect();
    let mut edges = Vec::new();
    for w in &words {
        if let Some((_, parent)) = w.split_last() {
            edges.push((name(parent), name(w), 1.0));
        }
    }
    let graph = GraphSpec { vertices, edges };
    let space = Arc::new(FiniteMetricSpace::from_graph(&graph)?);
    let mut gens = Vec::new();
    for (i, c) in letters.iter().enumerate() {
        let l = 2 * i;
        let map = words
            .iter()
            .map(|w| {
                let v: Vec<usize> = if w.first() == Some(&inv(l)) { w[1..].to_vec() } else { std::iter::once(l).chain(w.iter().copied()).collect() };
                index.get(&v).copied()
            })
            .collect();
        gens.push((c.to_string(), c.to_ascii_uppercase().to_string(), map));
    }
    let mut w = ActionWindow::new(space, Some(graph), gens, max_word_length)?;
    w.tree = true;
    w.structural_rinj = Some(1.0);
    Ok(w)
}

/// Cyclic group Z/n rotating the n-cycle, generator `r`, inverse `R`.
pub fn cycle_rotation_window(n: usize, step: usize, max_word_length: usize) -> Result<ActionWindow> {
    let graph = GraphSpec::cycle(n);
    let space = Arc::new(FiniteMetricSpace::from_graph(&graph)?);
    let map = (0..n).map(|i| Some((i + step) % n)).collect();
    ActionWindow::new(space, Some(graph), vec![("r".into(), "R".into(), map)], max_word_length)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parse_and_format() {
        let w = cycle_rotation_window(6, 1, 4).unwrap();
        let word = w.parse("rrR").unwrap();
        assert_eq!(w.format(&word), "rrR");
        assert_eq!(w.format(&w.free_reduce(&word)), "r");
        assert!(w.parse("rx").is_err());
        assert_eq!(w.parse("1").unwrap(), Vec::<usize>::new());
    }

    #[test]
    fn rotation_examples() {
        let w = cycle_rotation_window(6, 1, 6).unwrap();
        let r = w.parse("r").unwrap();
        assert_eq!(translation_length(&w, &[]).unwrap().value, 0.0);
        let t = translation_length(&w, &r).unwrap();
        assert_eq!(t.value, 1.0);
        assert!(t.exact);
        let s = stable_translation_length(&w, &r, 8).unwrap();
        assert_eq!(s.value, 0.0);
        assert!(s.periodic);
        assert_eq!(classify(&w, &r, 8).unwrap().kind, Kind::Elliptic);
        // rotation elements: the 6 powers are all reached within length 3
        assert_eq!(w.elements(3).len(), 6);
    }

    #[test]
    fn rejects_non_isometries() {
        let g = GraphSpec::path(3);
        let space = Arc::new(FiniteMetricSpace::from_graph(&g).unwrap());
        let map = vec![Some(0), Some(2), Some(1)];
        assert!(ActionWindow::new(space, None, vec![("s".into(), "s".into(), map)], 2).is_err());
    }

    #[test]
    fn free_group_cayley_window() {
        let w = free_group_window(2, 4, 3).unwrap();
        assert_eq!(w.space.len(), 1 + 4 + 12 + 36 + 108);
        let a = w.parse("a").unwrap();
        assert_eq!(translation_length(&w, &a).unwrap().value, 1.0);
        let cl = classify(&w, &w.parse("ab").unwrap(), 8).unwrap();
        assert_eq!(cl.kind, Kind::LoxodromicEstimate);
        assert_eq!(cl.stable_len, 2.0);
        let table = acylindricity_table(&w, 0.0).unwrap();
        assert!(table.iter().all(|r| r.n == 1));
        // on a total action, l at twice the diameter counts every element
        let rot = cycle_rotation_window(7, 1, 3).unwrap();
        let big = acylindricity_table(&rot, 2.0 * rot.space.diameter()).unwrap();
        assert!(big.iter().all(|r| r.n == rot.elements(3).len()));
    }

    #[test]
    fn nerve_in_free_group() {
        let w = free_group_window(2, 5, 2).unwrap();
        let ab = w.parse("ab").unwrap();
        let nv = nerve(&w, &ab, 1.0).unwrap();
        assert_eq!(nv.fundamental_length, 2.0);
        let q = geodesy::path_quality(&w.space, &nv.path);
        assert_eq!(q.l, 0.0);
        assert!(nerve(&w, &[], 1.0).is_err());
    }

    #[test]
    fn subdivision_carries_the_action() {
        let w = cycle_rotation_window(4, 1, 2).unwrap();
        let f = w.subdivided(2).unwrap();
        assert_eq!(f.space.len(), 8);
        let r = f.parse("r").unwrap();
        assert!(f.is_total());
        assert_eq!(translation_length(&f, &r).unwrap().value, 1.0);
    }

    #[test]
    fn characteristic_sets() {
        let w = cycle_rotation_window(6, 1, 2).unwrap();
        assert_eq!(characteristic_set(&w, &[vec![]], 0.0).len(), 6);
        assert!(characteristic_set(&w, &[w.parse("r").unwrap()], 0.0).is_empty());
    }

    #[test]
    fn spec_round_trip() {
        let w = cycle_rotation_window(5, 2, 3).unwrap();
        let spec = w.to_spec();
        let back = ActionWindow::from_spec(w.graph().unwrap(), &spec).unwrap();
        assert_eq!(back.generators(), w.generators());
    }
}
