//! Finite groups as multiplication tables, automorphism groups and holomorphs,
//! amalgamated products of finite groups with their normal forms, and the
//! Bass-Serre tree window of an amalgam.

use std::collections::{BTreeMap, HashMap, HashSet, VecDeque};
use std::sync::Arc;

use num_integer::Integer;
use serde::{Deserialize, Serialize};

use crate::action::{ActionWindow, WordProblem};
use crate::error::{invalid, Error, Result};
use crate::metric::{FiniteMetricSpace, GraphSpec};
use crate::par;

/// Default bound on |G| for automorphism searches.
pub const AUT_CAP: usize = 64;
/// Largest holomorph materialized as a full table.
pub const TABLE_CAP: usize = 2048;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GroupTable {
    elements: Vec<String>,
    mult: Vec<usize>,
    inverse: Vec<usize>,
    identity: usize,
}

impl GroupTable {
    /// Validated table; associativity is checked exhaustively.
    pub fn new(elements: Vec<String>, rows: Vec<Vec<usize>>) -> Result<Self> {
        let n = elements.len();
        if n == 0 {
            return invalid("group has no elements");
        }
        if rows.len() != n || rows.iter().any(|r| r.len() != n || r.iter().any(|&x| x >= n)) {
            return invalid("multiplication table must be square with entries in range");
        }
        let mult: Vec<usize> = rows.concat();
        let g = Self::assemble(elements, mult)?;
        let bad = par::map_range(n, |a| {
            for b in 0..n {
                for c in 0..n {
                    if g.mul(g.mul(a, b), c) != g.mul(a, g.mul(b, c)) {
                        return Some((a, b, c));
                    }
                }
            }
            None
        });
        if let Some((a, b, c)) = bad.into_iter().flatten().next() {
            return invalid(format!("not associative at ({}, {}, {})", g.elements[a], g.elements[b], g.elements[c]));
        }
        Ok(g)
    }

    fn assemble(elements: Vec<String>, mult: Vec<usize>) -> Result<Self> {
        let n = elements.len();
        let identity = (0..n)
            .find(|&e| (0..n).all(|x| mult[e * n + x] == x && mult[x * n + e] == x))
            .ok_or_else(|| Error::Invalid("no identity element".into()))?;
        let mut inverse = vec![usize::MAX; n];
        for x in 0..n {
            inverse[x] = (0..n)
                .find(|&y| mult[x * n + y] == identity && mult[y * n + x] == identity)
                .ok_or_else(|| Error::Invalid(format!("`{}` has no inverse", elements[x])))?;
        }
        let distinct: HashSet<&String> = elements.iter().collect();
        if distinct.len() != n {
            return invalid("duplicate element ids");
        }
        Ok(GroupTable { elements, mult, inverse, identity })
    }

    /// Closed set of permutations under composition (p∘q)(i) = p[q[i]]; not re-checked.
    pub fn from_permutations(perms: Vec<Vec<usize>>, names: Vec<String>) -> Result<Self> {
        let n = perms.len();
        if n > TABLE_CAP {
            return Err(Error::CapExceeded(format!("table of order {n} exceeds {TABLE_CAP}")));
        }
        let index: HashMap<&Vec<usize>, usize> = perms.iter().enumerate().map(|(i, p)| (p, i)).collect();
        let mut mult = vec![0; n * n];
        for a in 0..n {
            for b in 0..n {
                let c: Vec<usize> = perms[b].iter().map(|&i| perms[a][i]).collect();
                mult[a * n + b] = *index.get(&c).ok_or_else(|| Error::Invalid("permutations are not closed".into()))?;
            }
        }
        Self::assemble(names, mult)
    }

    pub fn trivial() -> Self {
        Self::cyclic(1)
    }

    pub fn cyclic(n: usize) -> Self {
        let n = n.max(1);
        let elements = (0..n).map(|i| i.to_string()).collect();
        let mult = (0..n * n).map(|k| (k / n + k % n) % n).collect();
        Self::assemble(elements, mult).expect("cyclic table")
    }

    /// Symmetric group on k points, elements in lexicographic order of one-line notation.
    pub fn symmetric(k: usize) -> Result<Self> {
        if k == 0 || k > 5 {
            return invalid("symmetric groups supported for 1..=5 points");
        }
        let mut perms = vec![];
        permutations(&mut (0..k).collect::<Vec<_>>(), 0, &mut perms);
        perms.sort();
        let names = perms.iter().map(|p| p.iter().map(|i| i.to_string()).collect::<String>()).collect();
        Self::from_permutations(perms, names)
    }

    pub fn order(&self) -> usize {
        self.elements.len()
    }

    pub fn elements(&self) -> &[String] {
        &self.elements
    }

    pub fn identity(&self) -> usize {
        self.identity
    }

    #[inline]
    pub fn mul(&self, a: usize, b: usize) -> usize {
        self.mult[a * self.elements.len() + b]
    }

    pub fn inv(&self, a: usize) -> usize {
        self.inverse[a]
    }

    pub fn index_of(&self, id: &str) -> Result<usize> {
        self.elements.iter().position(|e| e == id).ok_or_else(|| Error::Invalid(format!("unknown element `{id}`")))
    }

    pub fn element_order(&self, a: usize) -> usize {
        let mut k = 1;
        let mut x = a;
        while x != self.identity {
            x = self.mul(x, a);
            k += 1;
        }
        k
    }

    pub fn rows(&self) -> Vec<Vec<usize>> {
        self.mult.chunks(self.order()).map(|r| r.to_vec()).collect()
    }

    /// Subgroup generated by `gens`, sorted.
    pub fn generated(&self, gens: &[usize]) -> Vec<usize> {
        let mut seen = vec![false; self.order()];
        seen[self.identity] = true;
        let mut queue = VecDeque::from([self.identity]);
        while let Some(x) = queue.pop_front() {
            for &g in gens {
                let y = self.mul(x, g);
                if !seen[y] {
                    seen[y] = true;
                    queue.push_back(y);
                }
            }
        }
        (0..self.order()).filter(|&i| seen[i]).collect()
    }

    /// Greedy generating set in enumeration order.
    pub fn generating_set(&self) -> Vec<usize> {
        let mut gens = vec![];
        let mut span = self.generated(&[]);
        for x in 0..self.order() {
            if span.binary_search(&x).is_err() {
                gens.push(x);
                span = self.generated(&gens);
            }
        }
        gens
    }

    pub fn is_subgroup(&self, h: &[usize]) -> bool {
        let set: HashSet<usize> = h.iter().copied().collect();
        set.contains(&self.identity) && h.iter().all(|&a| set.contains(&self.inv(a)) && h.iter().all(|&b| set.contains(&self.mul(a, b))))
    }
}

fn permutations(v: &mut Vec<usize>, k: usize, out: &mut Vec<Vec<usize>>) {
    if k == v.len() {
        out.push(v.clone());
        return;
    }
    for i in k..v.len() {
        v.swap(k, i);
        permutations(v, k + 1, out);
        v.swap(k, i);
    }
}

/// JSON form of a group: a named family or an explicit table of element ids.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum GroupSpec {
    Cyclic { cyclic: usize },
    Symmetric { symmetric: usize },
    Table { elements: Vec<String>, table: Vec<Vec<String>> },
}

impl GroupSpec {
    pub fn build(&self) -> Result<GroupTable> {
        match self {
            GroupSpec::Cyclic { cyclic } => Ok(GroupTable::cyclic(*cyclic)),
            GroupSpec::Symmetric { symmetric } => GroupTable::symmetric(*symmetric),
            GroupSpec::Table { elements, table } => {
                let idx: HashMap<&String, usize> = elements.iter().enumerate().map(|(i, e)| (e, i)).collect();
                let rows = table
                    .iter()
                    .map(|r| r.iter().map(|x| idx.get(x).copied().ok_or_else(|| Error::Invalid(format!("unknown element `{x}`")))).collect())
                    .collect::<Result<Vec<Vec<usize>>>>()?;
                GroupTable::new(elements.clone(), rows)
            }
        }
    }

    pub fn from_table(g: &GroupTable) -> GroupSpec {
        let e = g.elements();
        GroupSpec::Table { elements: e.to_vec(), table: g.rows().iter().map(|r| r.iter().map(|&i| e[i].clone()).collect()).collect() }
    }
}

/// lcm of element orders.
pub fn group_exponent(g: &GroupTable) -> u64 {
    (0..g.order()).fold(1u64, |acc, a| acc.lcm(&(g.element_order(a) as u64)))
}

pub fn has_involution(g: &GroupTable) -> bool {
    (0..g.order()).any(|a| g.element_order(a) == 2)
}

/// All automorphisms as permutations of element indices, sorted (identity first).
pub fn automorphisms(g: &GroupTable, cap: usize) -> Result<Vec<Vec<usize>>> {
    let n = g.order();
    if n > cap {
        return Err(Error::CapExceeded(format!("|G| = {n} exceeds automorphism cap {cap}")));
    }
    let gens = g.generating_set();
    let orders: Vec<usize> = (0..n).map(|a| g.element_order(a)).collect();
    let candidates: Vec<Vec<usize>> = gens.iter().map(|&s| (0..n).filter(|&t| orders[t] == orders[s]).collect()).collect();
    let mut out = Vec::new();
    let mut choice = vec![0usize; gens.len()];
    search(g, &gens, &candidates, &mut choice, 0, &mut out);
    out.sort();
    Ok(out)
}

fn search(g: &GroupTable, gens: &[usize], cands: &[Vec<usize>], choice: &mut Vec<usize>, k: usize, out: &mut Vec<Vec<usize>>) {
    if k == gens.len() {
        if let Some(phi) = extend(g, gens, choice) {
            out.push(phi);
        }
        return;
    }
    for &t in &cands[k] {
        choice[k] = t;
        search(g, gens, cands, choice, k + 1, out);
    }
}

/// Extend generator images to a homomorphism by walking the Cayley graph; None unless bijective and consistent.
fn extend(g: &GroupTable, gens: &[usize], images: &[usize]) -> Option<Vec<usize>> {
    let n = g.order();
    let mut phi = vec![usize::MAX; n];
    phi[g.identity()] = g.identity();
    let mut queue = VecDeque::from([g.identity()]);
    let mut order = vec![];
    while let Some(x) = queue.pop_front() {
        order.push(x);
        for (s, &im) in gens.iter().zip(images) {
            let y = g.mul(x, *s);
            let v = g.mul(phi[x], im);
            if phi[y] == usize::MAX {
                phi[y] = v;
                queue.push_back(y);
            } else if phi[y] != v {
                return None;
            }
        }
    }
    let hit: HashSet<usize> = phi.iter().copied().collect();
    (hit.len() == n && !hit.contains(&usize::MAX)).then_some(phi)
}

/// Aut(G) as a table; elements named `aut0`, `aut1`, … with `aut0` the identity.
pub fn automorphism_group(g: &GroupTable, cap: usize) -> Result<GroupTable> {
    let auts = automorphisms(g, cap)?;
    let names = (0..auts.len()).map(|i| format!("aut{i}")).collect();
    GroupTable::from_permutations(auts, names)
}

/// Permutations x ↦ f·φ(x) of F for f in F and φ in Aut F.
pub fn holomorph_permutations(f: &GroupTable, cap: usize) -> Result<Vec<(usize, usize, Vec<usize>)>> {
    let auts = automorphisms(f, cap)?;
    let mut out = Vec::with_capacity(f.order() * auts.len());
    for a in 0..f.order() {
        for (j, phi) in auts.iter().enumerate() {
            out.push((a, j, phi.iter().map(|&y| f.mul(a, y)).collect()));
        }
    }
    Ok(out)
}

/// F ⋊ Aut F as a permutation group on F, elements named `f|autj`.
pub fn holomorph(f: &GroupTable, cap: usize) -> Result<GroupTable> {
    let perms = holomorph_permutations(f, cap)?;
    let names = perms.iter().map(|(a, j, _)| format!("{}|aut{j}", f.elements()[*a])).collect();
    GroupTable::from_permutations(perms.into_iter().map(|p| p.2).collect(), names)
}

/// Exponent of Hol F from cycle types, without building the table.
pub fn holomorph_exponent(f: &GroupTable, cap: usize) -> Result<u64> {
    let perms = holomorph_permutations(f, cap)?;
    Ok(perms.iter().fold(1u64, |acc, (_, _, p)| acc.lcm(&permutation_order(p))))
}

pub fn permutation_order(p: &[usize]) -> u64 {
    let mut seen = vec![false; p.len()];
    let mut ord = 1u64;
    for s in 0..p.len() {
        let mut len = 0u64;
        let mut x = s;
        while !seen[x] {
            seen[x] = true;
            x = p[x];
            len += 1;
        }
        if len > 0 {
            ord = ord.lcm(&len);
        }
    }
    ord
}

/// gHg⁻¹ ∩ H = {1} for every g outside H.
pub fn malnormality_check(g: &GroupTable, h: &[usize]) -> Result<bool> {
    if !g.is_subgroup(h) {
        return invalid("H is not a subgroup");
    }
    let set: HashSet<usize> = h.iter().copied().collect();
    Ok((0..g.order()).filter(|x| !set.contains(x)).all(|x| {
        h.iter().all(|&y| y == g.identity() || !set.contains(&g.mul(g.mul(x, y), g.inv(x))))
    }))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Factor {
    A,
    B,
}

impl Factor {
    pub fn other(self) -> Factor {
        match self {
            Factor::A => Factor::B,
            Factor::B => Factor::A,
        }
    }
}

/// An element of A or B.
pub type Letter = (Factor, usize);

#[derive(Debug, Clone)]
struct FactorData {
    table: GroupTable,
    embed: Vec<usize>,
    to_c: Vec<Option<usize>>,
    rep: Vec<usize>,
    reps: Vec<usize>,
}

impl FactorData {
    fn new(table: GroupTable, c: &GroupTable, embed: Vec<usize>) -> Result<Self> {
        if embed.len() != c.order() || embed.iter().any(|&x| x >= table.order()) {
            return invalid("embedding has wrong length or range");
        }
        for x in 0..c.order() {
            for y in 0..c.order() {
                if embed[c.mul(x, y)] != table.mul(embed[x], embed[y]) {
                    return invalid("embedding is not a homomorphism");
                }
            }
        }
        let mut to_c = vec![None; table.order()];
        for (ci, &a) in embed.iter().enumerate() {
            if to_c[a].is_some() {
                return invalid("embedding is not injective");
            }
            to_c[a] = Some(ci);
        }
        let mut rep = vec![usize::MAX; table.order()];
        let mut reps = vec![];
        // the coset C itself is represented by the identity
        for x in std::iter::once(table.identity()).chain(0..table.order()) {
            if rep[x] != usize::MAX {
                continue;
            }
            reps.push(x);
            for &ce in &embed {
                rep[table.mul(x, ce)] = x;
            }
        }
        Ok(FactorData { table, embed, to_c, rep, reps })
    }

    /// z = t·c with t the coset representative.
    fn split(&self, z: usize) -> (usize, usize) {
        let t = self.rep[z];
        let c = self.to_c[self.table.mul(self.table.inv(t), z)].expect("coset decomposition");
        (t, c)
    }
}

/// A ∗_C B with fixed coset representatives.
#[derive(Debug, Clone)]
pub struct AmalgamData {
    c: GroupTable,
    fa: FactorData,
    fb: FactorData,
}

/// s₁…s_k·c with alternating factors and each sᵢ a non-identity representative.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct AmalgamNormalForm {
    pub syllables: Vec<Letter>,
    pub c_part: usize,
}

impl AmalgamData {
    pub fn new(a: GroupTable, b: GroupTable, c: GroupTable, c_in_a: Vec<usize>, c_in_b: Vec<usize>) -> Result<Self> {
        let fa = FactorData::new(a, &c, c_in_a)?;
        let fb = FactorData::new(b, &c, c_in_b)?;
        Ok(AmalgamData { c, fa, fb })
    }

    /// Free product of two finite groups (C trivial).
    pub fn free_product(a: GroupTable, b: GroupTable) -> Self {
        let (ea, eb) = (vec![a.identity()], vec![b.identity()]);
        AmalgamData::new(a, b, GroupTable::trivial(), ea, eb).expect("free product")
    }

    pub fn factor(&self, f: Factor) -> &GroupTable {
        &self.data(f).table
    }

    pub fn c(&self) -> &GroupTable {
        &self.c
    }

    fn data(&self, f: Factor) -> &FactorData {
        match f {
            Factor::A => &self.fa,
            Factor::B => &self.fb,
        }
    }

    /// Coset representatives of f/C other than the identity.
    pub fn nontrivial_reps(&self, f: Factor) -> Vec<usize> {
        self.data(f).reps[1..].to_vec()
    }

    pub fn identity_form(&self) -> AmalgamNormalForm {
        AmalgamNormalForm { syllables: vec![], c_part: self.c.identity() }
    }

    /// Right-multiply a normal form by one letter.
    pub fn push(&self, nf: &mut AmalgamNormalForm, (f, x): Letter) {
        let d = self.data(f);
        let y = d.table.mul(d.embed[nf.c_part], x);
        let z = match nf.syllables.last() {
            Some(&(g, s)) if g == f => {
                nf.syllables.pop();
                d.table.mul(s, y)
            }
            _ => y,
        };
        let (t, c) = d.split(z);
        if t != d.table.identity() {
            nf.syllables.push((f, t));
        }
        nf.c_part = c;
    }

    pub fn normal_form(&self, word: &[Letter]) -> AmalgamNormalForm {
        let mut nf = self.identity_form();
        for &l in word {
            self.push(&mut nf, l);
        }
        nf
    }

    /// Letters of a normal form (the C-part embedded into A).
    pub fn letters(&self, nf: &AmalgamNormalForm) -> Vec<Letter> {
        let mut out = nf.syllables.clone();
        if nf.c_part != self.c.identity() {
            out.push((Factor::A, self.fa.embed[nf.c_part]));
        }
        out
    }

    pub fn inverse_letters(&self, word: &[Letter]) -> Vec<Letter> {
        word.iter().rev().map(|&(f, x)| (f, self.factor(f).inv(x))).collect()
    }

    pub fn format(&self, nf: &AmalgamNormalForm) -> String {
        let mut s: Vec<String> = nf.syllables.iter().map(|&(f, x)| format!("{f:?}{}", self.factor(f).elements()[x])).collect();
        if nf.c_part != self.c.identity() {
            s.push(format!("C{}", self.c.elements()[nf.c_part]));
        }
        if s.is_empty() {
            "1".into()
        } else {
            s.join(".")
        }
    }

    /// Syllable length after cyclic reduction when at least 2, else 0.
    pub fn cyclic_syllable_length(&self, word: &[Letter]) -> usize {
        let mut nf = self.normal_form(word);
        loop {
            let k = nf.syllables.len();
            if k < 2 {
                return 0;
            }
            if nf.syllables[0].0 != nf.syllables[k - 1].0 {
                return k;
            }
            // conjugate by the first syllable
            let s = nf.syllables[0];
            let mut w = vec![(s.0, self.factor(s.0).inv(s.1))];
            w.extend(self.letters(&nf));
            w.push(s);
            nf = self.normal_form(&w);
        }
    }

    /// Search for w = rᵏ (k ≥ 2) with r of at most `cap` syllables.
    pub fn is_proper_power(&self, word: &[Letter], cap: usize) -> Result<ProperPower> {
        let target = self.normal_form(word);
        let cyc = self.cyclic_syllable_length(word);
        if cyc < 2 {
            return Err(Error::Precondition(format!("{} is not loxodromic", self.format(&target))));
        }
        let mut level: Vec<AmalgamNormalForm> = vec![self.identity_form()];
        for _ in 0..cap {
            let mut next = vec![];
            for nf in &level {
                for f in [Factor::A, Factor::B] {
                    if nf.syllables.last().map(|s| s.0) == Some(f) {
                        continue;
                    }
                    for t in self.nontrivial_reps(f) {
                        let mut s = nf.syllables.clone();
                        s.push((f, t));
                        next.push(AmalgamNormalForm { syllables: s, c_part: self.c.identity() });
                    }
                }
            }
            for base in &next {
                for c in 0..self.c.order() {
                    let r = AmalgamNormalForm { syllables: base.syllables.clone(), c_part: c };
                    let letters = self.letters(&r);
                    let rc = self.cyclic_syllable_length(&letters);
                    if rc < 2 || cyc % rc != 0 || cyc / rc < 2 {
                        continue;
                    }
                    let k = cyc / rc;
                    let pow: Vec<Letter> = letters.iter().copied().cycle().take(letters.len() * k).collect();
                    if self.normal_form(&pow) == target {
                        return Ok(ProperPower { root: Some((self.format(&r), k)), conclusive: true });
                    }
                }
            }
            level = next;
        }
        Ok(ProperPower { root: None, conclusive: cap >= target.syllables.len() })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProperPower {
    /// Root in normal form and exponent.
    pub root: Option<(String, usize)>,
    /// False when the cap is below the word's syllable length, so larger roots were not searched.
    pub conclusive: bool,
}

/// JSON form of an amalgam and, optionally, named generators for its window.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AmalgamSpec {
    #[serde(rename = "A")]
    pub a: GroupSpec,
    #[serde(rename = "B")]
    pub b: GroupSpec,
    #[serde(rename = "C", default, skip_serializing_if = "Option::is_none")]
    pub c: Option<GroupSpec>,
    #[serde(default, skip_serializing_if = "BTreeMap::is_empty")]
    pub c_in_a: BTreeMap<String, String>,
    #[serde(default, skip_serializing_if = "BTreeMap::is_empty")]
    pub c_in_b: BTreeMap<String, String>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub generators: Vec<AmalgamGenerator>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AmalgamGenerator {
    pub name: String,
    pub inverse: String,
    pub factor: Factor,
    pub element: String,
}

impl AmalgamSpec {
    pub fn build(&self) -> Result<(AmalgamData, Vec<AmalgamGenerator>)> {
        let a = self.a.build()?;
        let b = self.b.build()?;
        let c = match &self.c {
            Some(c) => c.build()?,
            None => GroupTable::trivial(),
        };
        let embed = |g: &GroupTable, m: &BTreeMap<String, String>| -> Result<Vec<usize>> {
            if m.is_empty() && c.order() == 1 {
                return Ok(vec![g.identity()]);
            }
            (0..c.order())
                .map(|i| {
                    let key = &c.elements()[i];
                    let v = m.get(key).ok_or_else(|| Error::Invalid(format!("embedding misses `{key}`")))?;
                    g.index_of(v)
                })
                .collect()
        };
        let (ea, eb) = (embed(&a, &self.c_in_a)?, embed(&b, &self.c_in_b)?);
        let data = AmalgamData::new(a, b, c, ea, eb)?;
        let gens = if self.generators.is_empty() { default_generators(&data) } else { self.generators.clone() };
        Ok((data, gens))
    }
}

/// Greedy generating sets of both factors; A gets a, c, d, …; B gets b, h, i, …
pub fn default_generators(data: &AmalgamData) -> Vec<AmalgamGenerator> {
    let mut out = vec![];
    for (f, names) in [(Factor::A, "acdefg"), (Factor::B, "bhijkl")] {
        let t = data.factor(f);
        for (s, ch) in t.generating_set().into_iter().zip(names.chars()) {
            let inv = if t.inv(s) == s { ch.to_string() } else { ch.to_ascii_uppercase().to_string() };
            out.push(AmalgamGenerator { name: ch.to_string(), inverse: inv, factor: f, element: t.elements()[s].clone() });
        }
    }
    out
}

/// Word problem of the amalgam for windows whose generators are letters.
#[derive(Debug)]
pub struct AmalgamOracle {
    pub data: Arc<AmalgamData>,
    pub letters: Vec<Letter>,
}

impl AmalgamOracle {
    pub fn to_letters(&self, word: &[usize]) -> Vec<Letter> {
        word.iter().map(|&g| self.letters[g]).collect()
    }
}

impl WordProblem for AmalgamOracle {
    fn canonical(&self, word: &[usize]) -> String {
        self.data.format(&self.data.normal_form(&self.to_letters(word)))
    }
}

/// Largest window built before refusing.
pub const WINDOW_CAP: usize = 50_000;

#[derive(Clone, PartialEq, Eq, Hash)]
struct Vertex(Factor, Vec<Letter>);

/// Ball of radius `radius` around the vertex A in the Bass-Serre tree, with
/// the generators acting as partial isometries.
pub fn bass_serre_window(
    data: Arc<AmalgamData>,
    gens: &[AmalgamGenerator],
    radius: usize,
    max_word_length: usize,
) -> Result<ActionWindow> {
    if radius == 0 {
        return invalid("radius must be at least 1");
    }
    for f in [Factor::A, Factor::B] {
        if data.nontrivial_reps(f).is_empty() {
            return Err(Error::Precondition(format!("C equals factor {f:?}; the amalgam collapses and has no tree action")));
        }
    }
    let name = |v: &Vertex| -> String {
        let s: Vec<String> = v.1.iter().map(|&(f, x)| format!("{f:?}{}", data.factor(f).elements()[x])).collect();
        format!("{:?}:{}", v.0, s.join("."))
    };
    let mut index: HashMap<Vertex, usize> = HashMap::new();
    let mut verts: Vec<Vertex> = vec![Vertex(Factor::A, vec![])];
    index.insert(verts[0].clone(), 0);
    let mut edges = vec![];
    let mut frontier = vec![0usize];
    for _ in 0..radius {
        let mut next = vec![];
        for &vi in &frontier {
            let Vertex(t, label) = verts[vi].clone();
            let mut nbrs = vec![];
            let mut parent = label.clone();
            if parent.last().map(|s| s.0) == Some(t.other()) {
                parent.pop();
            }
            nbrs.push(Vertex(t.other(), parent));
            for r in data.nontrivial_reps(t) {
                let mut l = label.clone();
                l.push((t, r));
                nbrs.push(Vertex(t.other(), l));
            }
            for nb in nbrs {
                if index.contains_key(&nb) {
                    continue;
                }
                index.insert(nb.clone(), verts.len());
                edges.push((vi, verts.len()));
                next.push(verts.len());
                verts.push(nb);
                if verts.len() > WINDOW_CAP {
                    return Err(Error::CapExceeded(format!("window exceeds {WINDOW_CAP} vertices")));
                }
            }
        }
        frontier = next;
    }
    let graph = GraphSpec {
        vertices: verts.iter().map(&name).collect(),
        edges: edges.iter().map(|&(a, b)| (name(&verts[a]), name(&verts[b]), 1.0)).collect(),
    };
    let space = Arc::new(FiniteMetricSpace::from_graph(&graph)?);
    let mut letters = vec![];
    let mut specs = vec![];
    for g in gens {
        let t = data.factor(g.factor);
        let x = t.index_of(&g.element)?;
        let map: Vec<Option<usize>> = verts
            .iter()
            .map(|Vertex(vt, label)| {
                let mut w = vec![(g.factor, x)];
                w.extend_from_slice(label);
                let mut nf = data.normal_form(&w);
                if nf.syllables.last().map(|s| s.0) == Some(*vt) {
                    nf.syllables.pop();
                }
                index.get(&Vertex(*vt, nf.syllables)).copied()
            })
            .collect();
        specs.push((g.name.clone(), g.inverse.clone(), map));
        letters.push((g.name.clone(), (g.factor, x)));
        if g.inverse != g.name {
            letters.push((g.inverse.clone(), (g.factor, t.inv(x))));
        }
    }
    let mut w = ActionWindow::new(space, Some(graph), specs, max_word_length)?;
    let by_name: HashMap<String, Letter> = letters.into_iter().collect();
    let letters = w.generators().iter().map(|g| by_name[&g.name]).collect();
    w.tree = true;
    // the tree is bipartite and the action has no inversions, so loxodromics translate by at least 2
    w.structural_rinj = Some(2.0);
    Ok(w.with_oracle(Arc::new(AmalgamOracle { data, letters })))
}
