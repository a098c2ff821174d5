//! The action invariants rinj, e, ν and A, axis-overlap functionals and the
//! ledger that carries them with the direction of each bound.

use num_integer::Integer;
use serde::{Deserialize, Serialize};

use crate::action::{self, classify, elementary_surrogate, ActionWindow, AcylRow, Elementarity, Kind, Word};
use crate::error::{invalid, Error, Result};
use crate::geodesy::intersection_diameter;
use crate::grouptheory::{holomorph_exponent, GroupTable};
use crate::magnitude::Magnitude;
use crate::{par, tol};

/// How a recorded number relates to the true invariant.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Bound {
    Exact,
    Lower,
    Upper,
    /// The true value divides the recorded one.
    MultipleOfTrue,
    /// No guaranteed direction.
    Estimate,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Field<T> {
    pub value: T,
    pub bound: Bound,
    #[serde(default, skip_serializing_if = "String::is_empty")]
    pub note: String,
}

impl<T> Field<T> {
    pub fn new(value: T, bound: Bound, note: impl Into<String>) -> Self {
        Field { value, bound, note: note.into() }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct InvariantLedger {
    pub delta: Field<f64>,
    pub rinj: Field<Magnitude>,
    pub e: Field<u64>,
    pub nu: Field<u64>,
    #[serde(rename = "A")]
    pub a: Field<Magnitude>,
    pub no_involution: bool,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub notes: Vec<String>,
}

impl InvariantLedger {
    /// Rejects values or flags that cannot feed a certificate: δ, ν and A must
    /// be upper bounds, rinj a lower bound, e exact or a multiple of the truth.
    pub fn require_sound(&self) -> Result<()> {
        let bad = |field: &str, b: Bound, want: &str| Err(Error::Unsound(format!("{field} is flagged {b:?} but certification needs {want}")));
        if !matches!(self.delta.bound, Bound::Exact | Bound::Upper) {
            return bad("delta", self.delta.bound, "an upper bound");
        }
        if !matches!(self.rinj.bound, Bound::Exact | Bound::Lower) {
            return bad("rinj", self.rinj.bound, "a lower bound");
        }
        if !matches!(self.e.bound, Bound::Exact | Bound::MultipleOfTrue) {
            return bad("e", self.e.bound, "the exact value or a multiple of it");
        }
        if !matches!(self.nu.bound, Bound::Exact | Bound::Upper) {
            return bad("nu", self.nu.bound, "an upper bound");
        }
        if !matches!(self.a.bound, Bound::Exact | Bound::Upper) {
            return bad("A", self.a.bound, "an upper bound");
        }
        self.validate()
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.delta.value >= 0.0) {
            return invalid("delta must be non-negative");
        }
        if self.e.value == 0 || self.nu.value == 0 {
            return invalid("e and nu must be at least 1");
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RinjEstimate {
    pub value: Magnitude,
    pub witness: Option<String>,
    /// Minimum over the capped words: an upper bound on the true infimum.
    pub bound: Bound,
    /// Tree windows give exact stable lengths, so the minimum is exact for the capped set.
    pub exact_for_cap: bool,
    pub inconclusive: Vec<String>,
}

/// Smallest stable length among loxodromic words of length ≤ cap; +∞ when none.
pub fn injectivity_radius(window: &ActionWindow, word_cap: usize, max_power: usize) -> Result<RinjEstimate> {
    if word_cap == 0 {
        return invalid("word cap must be at least 1");
    }
    let elems = window.elements(word_cap);
    let rows = par::map_range(elems.len(), |i| {
        if i == 0 {
            return None;
        }
        Some(match classify(window, &elems[i], max_power) {
            Ok(c) if c.kind == Kind::LoxodromicEstimate => Ok(Some(c.stable_len)),
            Ok(_) => Ok(None),
            Err(_) => Err(window.format(&elems[i])),
        })
    });
    let mut best: Option<(f64, usize)> = None;
    let mut inconclusive = vec![];
    for (i, r) in rows.into_iter().enumerate() {
        match r {
            Some(Ok(Some(v))) if best.map_or(true, |b| v < b.0 - tol()) => best = Some((v, i)),
            Some(Err(name)) => inconclusive.push(name),
            _ => {}
        }
    }
    Ok(match best {
        Some((v, i)) => RinjEstimate {
            value: Magnitude::new(v),
            witness: Some(window.format(&elems[i])),
            bound: Bound::Upper,
            exact_for_cap: window.tree && inconclusive.is_empty(),
            inconclusive,
        },
        None => RinjEstimate { value: Magnitude::INFINITY, witness: None, bound: Bound::Upper, exact_for_cap: false, inconclusive },
    })
}

/// lcm over F of the exponent of Hol F.
pub fn invariant_e(finite_normal: &[GroupTable], cap: usize) -> Result<u64> {
    let mut e = 1u64;
    for f in finite_normal {
        e = e.lcm(&holomorph_exponent(f, cap)?);
    }
    Ok(e)
}

/// Diameter of the intersection of the 13δ-thickened axes.
pub fn overlap_a(window: &ActionWindow, words: &[Word], delta: f64) -> Result<f64> {
    if words.is_empty() {
        return invalid("overlap needs at least one word");
    }
    let axes = words.iter().map(|w| action::axis(window, w, delta)).collect::<Result<Vec<_>>>()?;
    Ok(intersection_diameter(&window.space, &axes, 13.0 * delta)?.diameter)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AEstimate {
    pub value: f64,
    pub bound: Bound,
    pub witness: Option<Vec<String>>,
    pub candidates: usize,
    pub tuples_checked: usize,
    pub non_elementary: usize,
}

/// Most tuples examined by the A search.
pub const TUPLE_CAP: usize = 2_000_000;

/// Search of (ν+1)-tuples of short words failing the elementary surrogates; a lower bound on A.
pub fn invariant_a_estimate(window: &ActionWindow, nu: usize, l_s: f64, delta: f64, word_cap: usize, max_power: usize) -> Result<AEstimate> {
    if nu == 0 {
        return invalid("nu must be at least 1");
    }
    let elems = window.elements(word_cap);
    let threshold = l_s * delta + tol();
    let cands: Vec<Word> = elems[1..]
        .iter()
        .filter(|w| action::translation_length(window, w).map_or(false, |t| t.value <= threshold))
        .cloned()
        .collect();
    let k = nu + 1;
    let total = binomial(cands.len(), k);
    if total > TUPLE_CAP as u128 {
        return Err(Error::CapExceeded(format!("{total} tuples exceed the cap {TUPLE_CAP}")));
    }
    let mut tuples = vec![];
    combinations(cands.len(), k, &mut vec![], &mut tuples);
    let results = par::map_range(tuples.len(), |t| {
        let ws: Vec<Word> = tuples[t].iter().map(|&i| cands[i].clone()).collect();
        if elementary_surrogate(window, &ws, delta, max_power) != Elementarity::NonElementary {
            return None;
        }
        overlap_a(window, &ws, delta).ok()
    });
    let mut best: Option<(f64, usize)> = None;
    let mut non_elementary = 0;
    for (t, r) in results.iter().enumerate() {
        if let Some(v) = r {
            non_elementary += 1;
            if best.map_or(true, |b| *v > b.0 + tol()) {
                best = Some((*v, t));
            }
        }
    }
    Ok(AEstimate {
        value: best.map_or(0.0, |b| b.0),
        bound: Bound::Lower,
        witness: best.map(|(_, t)| tuples[t].iter().map(|&i| window.format(&cands[i])).collect()),
        candidates: cands.len(),
        tuples_checked: tuples.len(),
        non_elementary,
    })
}

fn binomial(n: usize, k: usize) -> u128 {
    if k > n {
        return 0;
    }
    (0..k).fold(1u128, |acc, i| acc * (n - i) as u128 / (i + 1) as u128)
}

fn combinations(n: usize, k: usize, cur: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
    if cur.len() == k {
        out.push(cur.clone());
        return;
    }
    let start = cur.last().map_or(0, |&l| l + 1);
    for i in start..n {
        if n - i < k - cur.len() {
            break;
        }
        cur.push(i);
        combinations(n, k, cur, out);
        cur.pop();
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OverlapRow {
    pub words: Vec<String>,
    /// `pair` for the two-axes bound, `tuple` for the several-axes bound.
    pub kind: String,
    pub filtered: Option<String>,
    pub lhs: f64,
    pub rhs: f64,
    pub margin: f64,
}

/// Checks A(g,h) ≤ ν len h + A + 156δ on pairs with len g ≤ L_S δ and
/// A(g₁..g_m) ≤ (ν+2) sup len gᵢ + A + 684δ on tuples with m ≤ ν.
/// Inputs the surrogates consider elementary are reported as filtered.
pub fn verify_overlap_bounds(
    window: &ActionWindow,
    ledger: &InvariantLedger,
    l_s: f64,
    pairs: &[(Word, Word)],
    tuples: &[Vec<Word>],
    max_power: usize,
) -> Result<Vec<OverlapRow>> {
    for (name, b) in [("nu", ledger.nu.bound), ("A", ledger.a.bound)] {
        if !matches!(b, Bound::Exact | Bound::Upper) {
            return Err(Error::Unsound(format!("{name} is flagged {b:?}; overlap bounds need an upper bound")));
        }
    }
    let delta = ledger.delta.value;
    let nu = ledger.nu.value as f64;
    let a = ledger.a.value.to_f64();
    let len = |w: &Word| action::translation_length(window, w).map(|t| t.value);
    let mut rows = vec![];
    for (g, h) in pairs {
        let words = vec![window.format(g), window.format(h)];
        let filtered = if len(g)? > l_s * delta + tol() {
            Some("len g exceeds L_S·δ".to_string())
        } else if elementary_surrogate(window, &[g.clone(), h.clone()], delta, max_power) != Elementarity::NonElementary {
            Some("elementary".to_string())
        } else {
            None
        };
        rows.push(row(words, "pair", filtered, || Ok((overlap_a(window, &[g.clone(), h.clone()], delta)?, nu * len(h)? + a + 156.0 * delta)))?);
    }
    for t in tuples {
        let words: Vec<String> = t.iter().map(|w| window.format(w)).collect();
        let filtered = if t.is_empty() || t.len() > ledger.nu.value as usize {
            Some("tuple size outside 1..=nu".to_string())
        } else if elementary_surrogate(window, t, delta, max_power) != Elementarity::NonElementary {
            Some("elementary".to_string())
        } else {
            None
        };
        rows.push(row(words, "tuple", filtered, || {
            let sup = t.iter().map(len).collect::<Result<Vec<f64>>>()?.into_iter().fold(0.0, f64::max);
            Ok((overlap_a(window, t, delta)?, (nu + 2.0) * sup + a + 684.0 * delta))
        })?);
    }
    if let Some(r) = rows.iter().find(|r| r.filtered.is_none() && r.margin < -tol()) {
        return Err(Error::BoundViolated(format!("{} bound fails on {:?}: {} > {}", r.kind, r.words, r.lhs, r.rhs)));
    }
    Ok(rows)
}

fn row(words: Vec<String>, kind: &str, filtered: Option<String>, eval: impl FnOnce() -> Result<(f64, f64)>) -> Result<OverlapRow> {
    if filtered.is_some() {
        return Ok(OverlapRow { words, kind: kind.into(), filtered, lhs: 0.0, rhs: 0.0, margin: 0.0 });
    }
    let (lhs, rhs) = eval()?;
    Ok(OverlapRow { words, kind: kind.into(), filtered, lhs, rhs, margin: rhs - lhs })
}

/// N + M with M the least positive integer such that M·rinj ≥ d.
pub fn nu_bound(row: AcylRow, rinj: f64) -> Result<u64> {
    if !(rinj > 0.0) {
        return Err(Error::Invalid(format!("rinj must be positive, got {rinj}")));
    }
    let m = if rinj.is_infinite() { 1.0 } else { (row.d / rinj - tol()).ceil().max(1.0) };
    Ok(row.n as u64 + m as u64)
}

/// Smallest bound over all rows of an acylindricity table.
pub fn best_nu_bound(table: &[AcylRow], rinj: f64) -> Result<(u64, AcylRow)> {
    let mut best: Option<(u64, AcylRow)> = None;
    for &r in table {
        let b = nu_bound(r, rinj)?;
        if best.map_or(true, |x| b < x.0) {
            best = Some((b, r));
        }
    }
    best.ok_or_else(|| Error::Invalid("empty acylindricity table".into()))
}

/// Least odd multiple of e and of every elliptic order.
pub fn kappa_for_hyperbolic(elliptic_orders: &[u64], e: u64) -> Result<u64> {
    if e == 0 || elliptic_orders.contains(&0) {
        return invalid("orders must be positive");
    }
    if let Some(o) = elliptic_orders.iter().chain(std::iter::once(&e)).find(|&&o| o % 2 == 0) {
        return Err(Error::Precondition(format!("even order {o}: the group must have no involution")));
    }
    Ok(elliptic_orders.iter().fold(e, |acc, &o| acc.lcm(&o)))
}

/// Options for assembling a ledger from a window.
#[derive(Debug, Clone)]
pub struct LedgerOptions {
    pub word_cap: usize,
    pub max_power: usize,
    pub l_s: f64,
    /// The l of the acylindricity table, as a multiple of δ.
    pub acyl_l_factor: f64,
    pub finite_normal: Vec<GroupTable>,
    /// Structural upper bound on A; without one, A carries the search's lower bound.
    pub a_upper: Option<f64>,
    pub no_involution: Option<bool>,
}

impl Default for LedgerOptions {
    fn default() -> Self {
        LedgerOptions {
            word_cap: 4,
            max_power: 4,
            l_s: 500.0,
            acyl_l_factor: 166.0,
            finite_normal: vec![GroupTable::trivial()],
            a_upper: None,
            no_involution: None,
        }
    }
}

/// Estimate every invariant of a window and record the direction of each bound.
pub fn build_ledger(window: &ActionWindow, opts: &LedgerOptions) -> Result<InvariantLedger> {
    let delta = crate::metric::hyperbolicity_delta(&window.space).delta;
    let mut notes = vec![];
    let est = injectivity_radius(window, opts.word_cap, opts.max_power)?;
    let rinj = match (window.structural_rinj, est.witness.as_ref()) {
        (Some(s), Some(w)) if (est.value.to_f64() - s).abs() <= tol() => {
            Field::new(est.value, Bound::Exact, format!("search minimum at {w} meets the structural lower bound"))
        }
        (Some(s), _) => Field::new(Magnitude::new(s), Bound::Lower, "structural lower bound of the window"),
        (None, Some(w)) => Field::new(est.value, Bound::Upper, format!("minimum over words up to length {} (attained by {w})", opts.word_cap)),
        (None, None) => Field::new(Magnitude::INFINITY, Bound::Upper, "no loxodromic word within the cap"),
    };
    let e = invariant_e(&opts.finite_normal, crate::grouptheory::AUT_CAP)?;
    let table = action::acylindricity_table(window, opts.acyl_l_factor * delta)?;
    let r = rinj.value.to_f64();
    let nu = if r > 0.0 && rinj.bound != Bound::Upper {
        let (b, row) = best_nu_bound(&table, r)?;
        Field::new(b, Bound::Upper, format!("N + M from the acylindricity row d = {}, N = {}", row.d, row.n))
    } else {
        let (b, _) = best_nu_bound(&table, r.max(f64::MIN_POSITIVE))?;
        notes.push("nu bound used rinj without a lower-bound guarantee".into());
        Field::new(b, Bound::Estimate, "acylindricity bound with an unverified rinj")
    };
    notes.push("nu lower bound is 1; the window never certifies nu exactly".into());
    let a = match opts.a_upper {
        Some(v) => Field::new(Magnitude::new(v), Bound::Upper, "user-supplied structural bound"),
        None => {
            let est = invariant_a_estimate(window, nu.value as usize, opts.l_s, delta, opts.word_cap.min(2), opts.max_power)?;
            Field::new(Magnitude::new(est.value), Bound::Lower, format!("search over {} tuples", est.tuples_checked))
        }
    };
    let no_involution = opts.no_involution.unwrap_or_else(|| {
        let elems = window.elements(opts.word_cap);
        !elems[1..].iter().any(|w| !window.is_trivial(w) && window.is_trivial(&window.power(w, 2)))
    });
    if opts.no_involution.is_none() {
        notes.push(format!("no_involution judged on words up to length {}", opts.word_cap));
    }
    Ok(InvariantLedger {
        delta: Field::new(delta, Bound::Exact, "four-point delta of the window"),
        rinj,
        e: Field::new(e, Bound::Exact, "lcm of Hol F exponents over the supplied F"),
        nu,
        a,
        no_involution,
        notes,
    })
}
