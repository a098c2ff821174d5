//! Small-cancellation parameters of a family, the certifier for the small
//! cancellation hypotheses, the rescaling factor λₙ and critical exponents,
//! and propagation of the invariant ledger across quotient steps.

use std::f64::consts::PI;

use num_integer::Integer;
use serde::{Deserialize, Serialize};

use crate::action::{translation_length, ActionWindow, Word};
use crate::error::{invalid, Error, Result};
use crate::geodesy::intersection_diameter;
use crate::invariants::{Bound, Field, InvariantLedger};
use crate::magnitude::{sinh, Magnitude};
use crate::metric::PLANE_DELTA_DEFAULT;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Mode {
    Canonical,
    Toy,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Constants {
    pub mode: Mode,
    pub bold_delta: f64,
    #[serde(rename = "L_S")]
    pub l_s: f64,
    pub delta0: f64,
    #[serde(rename = "Delta0")]
    pub big_delta0: f64,
    pub rho0: f64,
    pub delta1: f64,
}

/// Constants file: canonical mode derives everything from 𝛅 and L_S, toy mode lists every value.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConstantsSpec {
    pub mode: Mode,
    #[serde(default)]
    pub bold_delta: Option<f64>,
    #[serde(rename = "L_S", default)]
    pub l_s: Option<f64>,
    #[serde(default)]
    pub delta0: Option<f64>,
    #[serde(rename = "Delta0", default)]
    pub big_delta0: Option<f64>,
    #[serde(default)]
    pub rho0: Option<f64>,
    #[serde(default)]
    pub delta1: Option<f64>,
}

pub const DEFAULT_L_S: f64 = 500.0;

impl Constants {
    /// ρ₀ = 10²¹ L_S 𝛅, δ₀ = Δ₀ = 10⁻¹¹ 𝛅, δ₁ = 64·10⁴ 𝛅.
    pub fn canonical(bold_delta: f64, l_s: f64) -> Self {
        Constants {
            mode: Mode::Canonical,
            bold_delta,
            l_s,
            delta0: 1e-11 * bold_delta,
            big_delta0: 1e-11 * bold_delta,
            rho0: 1e21 * l_s * bold_delta,
            delta1: 64e4 * bold_delta,
        }
    }

    /// 𝛅 = 1, L_S = 500, ρ₀ = 1, δ₁ = 0.01, δ₀ = 1, Δ₀ = 10⁶.
    pub fn toy_default() -> Self {
        Constants { mode: Mode::Toy, bold_delta: 1.0, l_s: 500.0, delta0: 1.0, big_delta0: 1e6, rho0: 1.0, delta1: 0.01 }
    }

    pub fn from_spec(spec: &ConstantsSpec) -> Result<Self> {
        let c = match spec.mode {
            Mode::Canonical => {
                let given = [spec.delta0, spec.big_delta0, spec.rho0, spec.delta1];
                if given.iter().any(|x| x.is_some()) {
                    return invalid("canonical mode derives delta0, Delta0, rho0 and delta1; use toy mode to set them");
                }
                Constants::canonical(spec.bold_delta.unwrap_or(PLANE_DELTA_DEFAULT), spec.l_s.unwrap_or(DEFAULT_L_S))
            }
            Mode::Toy => {
                let need = |v: Option<f64>, name: &str| v.ok_or_else(|| Error::Invalid(format!("toy constants need `{name}`")));
                Constants {
                    mode: Mode::Toy,
                    bold_delta: spec.bold_delta.unwrap_or(1.0),
                    l_s: spec.l_s.unwrap_or(DEFAULT_L_S),
                    delta0: need(spec.delta0, "delta0")?,
                    big_delta0: need(spec.big_delta0, "Delta0")?,
                    rho0: need(spec.rho0, "rho0")?,
                    delta1: need(spec.delta1, "delta1")?,
                }
            }
        };
        c.validate()?;
        Ok(c)
    }

    pub fn validate(&self) -> Result<()> {
        let vals = [self.bold_delta, self.l_s, self.delta0, self.big_delta0, self.rho0, self.delta1];
        if vals.iter().any(|v| !(v.is_finite() && *v > 0.0)) {
            return invalid("constants must be positive and finite");
        }
        if self.mode == Mode::Canonical {
            let d = self.bold_delta;
            if !(self.rho0 > 1e20 * self.l_s * d) || !(self.delta0 < 1e-10 * d) || !(self.big_delta0 < 1e-10 * d) || self.delta1 != 64e4 * d {
                return invalid("canonical constants violate rho0 > 1e20 L_S bold_delta, delta0, Delta0 < 1e-10 bold_delta or delta1 = 64e4 bold_delta");
            }
        }
        Ok(())
    }

    /// π sinh(2 L_S δ₁).
    pub fn s_term(&self) -> Magnitude {
        sinh(2.0 * self.l_s * self.delta1).scale(PI)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FamilyStats {
    #[serde(rename = "DeltaQ")]
    pub delta_q: f64,
    #[serde(rename = "TQ")]
    pub t_q: Magnitude,
    #[serde(default)]
    pub delta_witness: Option<(usize, usize)>,
    #[serde(default)]
    pub t_witness: Option<String>,
}

/// Δ(Q) over distinct pairs at thickening 5δ; T(Q) as the least translation length of the rotation words.
pub fn family_stats(window: &ActionWindow, family: &[(Vec<usize>, Vec<Word>)], delta: f64) -> Result<FamilyStats> {
    if family.is_empty() {
        return invalid("family is empty");
    }
    let mut delta_q = 0.0;
    let mut delta_witness = None;
    for i in 0..family.len() {
        for j in i + 1..family.len() {
            let d = intersection_diameter(&window.space, &[family[i].0.clone(), family[j].0.clone()], 5.0 * delta)?.diameter;
            if d > delta_q {
                delta_q = d;
                delta_witness = Some((i, j));
            }
        }
    }
    let mut t_q = Magnitude::INFINITY;
    let mut t_witness = None;
    for (_, words) in family {
        for w in words {
            let t = Magnitude::new(translation_length(window, w)?.value);
            if t < t_q {
                t_q = t;
                t_witness = Some(window.format(w));
            }
        }
    }
    Ok(FamilyStats { delta_q, t_q, delta_witness, t_witness })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Relation {
    #[serde(rename = "<=")]
    Le,
    #[serde(rename = "<")]
    Lt,
    #[serde(rename = ">=")]
    Ge,
    #[serde(rename = "==")]
    Eq,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Check {
    pub name: String,
    pub lhs: Magnitude,
    pub relation: Relation,
    pub rhs: Magnitude,
    pub pass: bool,
    /// rhs − lhs oriented so that a pass is non-negative; a log ratio when `log_margin`.
    pub margin: f64,
    pub log_margin: bool,
}

impl Check {
    pub fn new(name: &str, lhs: Magnitude, relation: Relation, rhs: Magnitude) -> Self {
        let pass = match relation {
            Relation::Le => lhs <= rhs,
            Relation::Lt => lhs < rhs,
            Relation::Ge => lhs >= rhs,
            Relation::Eq => lhs == rhs,
        };
        let log_margin = !(lhs.is_plain() && rhs.is_plain());
        let (lo, hi) = if relation == Relation::Ge { (rhs, lhs) } else { (lhs, rhs) };
        let margin = match relation {
            Relation::Eq => -(lhs.to_f64() - rhs.to_f64()).abs(),
            _ if log_margin => hi.ln() - lo.ln(),
            _ => hi.to_f64() - lo.to_f64(),
        };
        Check { name: name.into(), lhs, relation, rhs, pass, margin, log_margin }
    }

    fn flag(name: &str, ok: bool) -> Self {
        let one = Magnitude::new(1.0);
        Check::new(name, if ok { one } else { Magnitude::ZERO }, Relation::Eq, one)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Certificate {
    pub mode: Mode,
    pub checks: Vec<Check>,
    pub overall: bool,
    /// Conclusions licensed by the theorem when every check passes; never computed.
    pub claims: Vec<String>,
}

/// δ ≤ δ₀, ρ ≥ ρ₀, Δ(Q) ≤ Δ₀, T(Q) ≥ 8π sinh ρ, all non-strict.
pub fn certify_small_cancellation(delta: f64, rho: f64, stats: &FamilyStats, consts: &Constants) -> Certificate {
    let checks = vec![
        Check::new("delta <= delta0", Magnitude::new(delta), Relation::Le, Magnitude::new(consts.delta0)),
        Check::new("rho >= rho0", Magnitude::new(rho), Relation::Ge, Magnitude::new(consts.rho0)),
        Check::new("Delta(Q) <= Delta0", Magnitude::new(stats.delta_q), Relation::Le, Magnitude::new(consts.big_delta0)),
        Check::new("T(Q) >= 8 pi sinh rho", stats.t_q, Relation::Ge, sinh(rho).scale(8.0 * PI)),
    ];
    let overall = checks.iter().all(|c| c.pass);
    let claims = if overall {
        vec![
            format!("the quotient of the cone-off is a {}-hyperbolic length space", 64e4 * consts.bold_delta),
            "each relation subgroup embeds in the quotient of its cone-off stabilizer".into(),
            "the quotient group acts by isometries on the quotient space".into(),
        ]
    } else {
        vec![]
    };
    Certificate { mode: consts.mode, checks, overall, claims }
}

/// λₙ = K / √n with K = (4π/δ₁)·√(2 sinh ρ₀ sinh(38δ₁) / L_S), kept as two logarithms.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Lambda {
    pub ln_k: f64,
    pub ln_n: f64,
    /// The exponent itself when it fits in a u64.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub n: Option<u64>,
    pub value: Magnitude,
}

impl Lambda {
    pub fn ln(&self) -> f64 {
        self.ln_k - 0.5 * self.ln_n
    }

    /// ln(λ_self / λ_other), combining the two parts separately.
    pub fn ln_ratio(&self, other: &Lambda) -> f64 {
        let ln_n_ratio = match (self.n, other.n) {
            // one logarithm of an exactly representable quotient, so 4n over n gives ln 2 exactly
            (Some(a), Some(b)) if b % a == 0 => ((b / a) as f64).ln(),
            (Some(a), Some(b)) if a % b == 0 => -((a / b) as f64).ln(),
            _ => other.ln_n - self.ln_n,
        };
        (self.ln_k - other.ln_k) + 0.5 * ln_n_ratio
    }
}

pub fn lambda_k(consts: &Constants) -> Magnitude {
    let inner = Magnitude::new(2.0).mul(sinh(consts.rho0)).mul(sinh(38.0 * consts.delta1)).div(Magnitude::new(consts.l_s));
    Magnitude::new(4.0 * PI / consts.delta1).mul(inner.sqrt())
}

pub fn lambda_n(n: u64, consts: &Constants) -> Result<Lambda> {
    if n == 0 {
        return invalid("n must be at least 1");
    }
    let k = lambda_k(consts);
    let value = match k {
        Magnitude::Value(kv) => Magnitude::new(kv / (n as f64).sqrt()),
        _ => Magnitude::from_ln(k.ln() - 0.5 * (n as f64).ln()),
    };
    Ok(Lambda { ln_k: k.ln(), ln_n: (n as f64).ln(), n: Some(n), value })
}

/// λ for an exponent known only through its logarithm.
pub fn lambda_ln_n(ln_n: f64, consts: &Constants) -> Lambda {
    let k = lambda_k(consts);
    Lambda { ln_k: k.ln(), ln_n, n: None, value: Magnitude::from_ln(k.ln() - 0.5 * ln_n) }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Exponent {
    Exact { n: u64 },
    /// Beyond u64; only ln n is known.
    Astronomical { ln: f64 },
}

impl Exponent {
    pub fn ln(&self) -> f64 {
        match self {
            Exponent::Exact { n } => (*n as f64).ln(),
            Exponent::Astronomical { ln } => *ln,
        }
    }

    pub fn as_u64(&self) -> Option<u64> {
        match self {
            Exponent::Exact { n } => Some(*n),
            Exponent::Astronomical { .. } => None,
        }
    }
}

/// One of the four conditions on λₙ, written as λ ≤ c (or λ < c).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LambdaConstraint {
    pub name: String,
    pub threshold: Magnitude,
    pub strict: bool,
}

impl LambdaConstraint {
    pub fn holds(&self, lambda: Magnitude) -> bool {
        if self.strict {
            lambda < self.threshold
        } else {
            lambda <= self.threshold
        }
    }
}

pub fn lambda_constraints(consts: &Constants, nu0: u64) -> Vec<LambdaConstraint> {
    let s = consts.s_term();
    let d1 = Magnitude::new(consts.delta1);
    let lhs2 = s.scale((nu0 + 5) as f64).add(Magnitude::new(90.0 * consts.delta1));
    let coeff3 = Magnitude::new(consts.l_s * consts.delta1 * consts.delta1).div(sinh(38.0 * consts.delta1).scale(4.0 * PI));
    vec![
        LambdaConstraint { name: "lambda delta1 <= delta0".into(), threshold: Magnitude::new(consts.delta0).div(d1), strict: false },
        LambdaConstraint {
            name: "lambda ((nu0+5) pi sinh(2 L_S delta1) + 90 delta1) <= min(Delta0, pi sinh(2 L_S delta1))".into(),
            threshold: Magnitude::new(consts.big_delta0).min(s).div(lhs2),
            strict: false,
        },
        LambdaConstraint { name: "lambda L_S delta1^2 / (4 pi sinh(38 delta1)) < delta1".into(), threshold: d1.div(coeff3), strict: true },
        LambdaConstraint { name: "lambda rho0 <= rho0".into(), threshold: Magnitude::new(1.0), strict: false },
    ]
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CriticalExponent {
    pub n0: Exponent,
    pub binding: String,
    pub constraints: Vec<LambdaConstraint>,
}

pub const N0_FLOOR: u64 = 100;

/// Smallest n ≥ `floor` with `pred(n)`, assuming pred is monotone; None past u64.
fn monotone_search(floor: u64, pred: impl Fn(u64) -> bool) -> Option<u64> {
    if pred(floor) {
        return Some(floor);
    }
    let mut lo = floor;
    let mut hi = floor;
    loop {
        match hi.checked_mul(2) {
            Some(h) => hi = h,
            None if hi < u64::MAX => hi = u64::MAX,
            None => return None,
        }
        if pred(hi) {
            break;
        }
        lo = hi;
    }
    while hi - lo > 1 {
        let mid = lo + (hi - lo) / 2;
        if pred(mid) {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    Some(hi)
}

/// Smallest n ≥ 100 at which λₙ meets all four conditions.
pub fn critical_exponent_n0(consts: &Constants, nu0: u64) -> Result<CriticalExponent> {
    let constraints = lambda_constraints(consts, nu0);
    if let Some(c) = constraints.iter().find(|c| c.threshold.is_zero() || c.threshold.ln().is_nan()) {
        return Err(Error::Unsatisfiable(format!("`{}` cannot hold for any n", c.name)));
    }
    let binding = constraints.iter().min_by(|a, b| a.threshold.partial_cmp(&b.threshold).unwrap()).unwrap().name.clone();
    let pred = |n: u64| {
        let l = lambda_n(n, consts).expect("n >= 1").value;
        constraints.iter().all(|c| c.holds(l))
    };
    let n0 = match monotone_search(N0_FLOOR, pred) {
        Some(n) => Exponent::Exact { n },
        None => {
            let ln_k = lambda_k(consts).ln();
            let worst = constraints.iter().map(|c| c.threshold.ln()).fold(f64::INFINITY, f64::min);
            Exponent::Astronomical { ln: 2.0 * (ln_k - worst) }
        }
    };
    Ok(CriticalExponent { n0, binding, constraints })
}

/// δ₁ √(2 L_S sinh ρ₀ / (n₁ sinh(38δ₁))), the rinj threshold for exponent n₁.
pub fn rinj_threshold(ln_n1: f64, consts: &Constants) -> Magnitude {
    let inner = Magnitude::new(2.0 * consts.l_s).mul(sinh(consts.rho0)).div(sinh(38.0 * consts.delta1));
    Magnitude::new(consts.delta1).mul(Magnitude::from_ln(inner.ln() - ln_n1).sqrt())
}

/// Smallest n₁ ≥ n₀ with rinj ≥ the threshold at n₁.
pub fn critical_exponent_n1(rinj: Magnitude, n0: &Exponent, consts: &Constants) -> Exponent {
    if rinj.is_zero() {
        return Exponent::Astronomical { ln: f64::INFINITY };
    }
    match n0 {
        Exponent::Exact { n } => match monotone_search(*n, |m| rinj >= rinj_threshold((m as f64).ln(), consts)) {
            Some(m) => Exponent::Exact { n: m },
            None => Exponent::Astronomical { ln: rinj_threshold(0.0, consts).div(rinj).ln() * 2.0 },
        },
        Exponent::Astronomical { ln } => {
            let need = rinj_threshold(0.0, consts).div(rinj).ln() * 2.0;
            Exponent::Astronomical { ln: ln.max(need) }
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HypothesisReport {
    pub mode: Mode,
    pub n: u64,
    pub n1: Exponent,
    pub checks: Vec<Check>,
    pub overall: bool,
    pub claims: Vec<String>,
}

/// The assumptions of the induction step for exponent n and critical exponent n₁.
pub fn check_induction_hypotheses(ledger: &InvariantLedger, n1: &Exponent, n: u64, nu0: u64, consts: &Constants) -> Result<HypothesisReport> {
    ledger.require_sound()?;
    let cn = critical_exponent_n0(consts, nu0)?;
    let m = |x: f64| Magnitude::new(x);
    let ge_exp = |a: &Exponent, b: &Exponent| match (a, b) {
        (Exponent::Exact { n: x }, Exponent::Exact { n: y }) => x >= y,
        _ => a.ln() >= b.ln(),
    };
    let n_exp = Exponent::Exact { n };
    let e = ledger.e.value;
    let checks = vec![
        Check::new("e divides n", m((n % e) as f64), Relation::Eq, Magnitude::ZERO),
        Check::new("nu <= nu0", m(ledger.nu.value as f64), Relation::Le, m(nu0 as f64)),
        Check::new("A <= (nu0+5) pi sinh(2 L_S delta1)", ledger.a.value, Relation::Le, consts.s_term().scale((nu0 + 5) as f64)),
        Check::new("rinj >= delta1 sqrt(2 L_S sinh rho0 / (n1 sinh(38 delta1)))", ledger.rinj.value, Relation::Ge, rinj_threshold(n1.ln(), consts)),
        Check::flag("n is odd", n % 2 == 1),
        Check::flag("n >= n1", ge_exp(&n_exp, n1)),
        Check::flag("n1 >= n0", ge_exp(n1, &cn.n0)),
        Check::flag("no involution", ledger.no_involution),
        Check::new("delta <= delta1", m(ledger.delta.value), Relation::Le, m(consts.delta1)),
    ];
    let overall = checks.iter().all(|c| c.pass);
    let claims = if overall {
        vec![
            "the quotient action again satisfies the induction hypotheses for exponent n".into(),
            "stable lengths contract by lambda at each step".into(),
        ]
    } else {
        vec![]
    };
    Ok(HypothesisReport { mode: consts.mode, n, n1: n1.clone(), checks, overall, claims })
}

/// The corollary's κ = 2ρ₀ / (π sinh ρ₀).
pub fn kappa_corollary(consts: &Constants) -> Magnitude {
    Magnitude::new(2.0 * consts.rho0).div(sinh(consts.rho0).scale(PI))
}

/// The invariants after one quotient step on the space rescaled by `scale`.
pub fn apply_step(ledger: &InvariantLedger, consts: &Constants, scale: Magnitude) -> Result<InvariantLedger> {
    let nu = ledger.nu.value;
    let d1 = Magnitude::new(consts.delta1);
    let a_prev = ledger.a.value.mul(scale);
    let a = a_prev.add(consts.s_term().scale((nu + 4) as f64));
    let l = scale.mul(Magnitude::new(consts.l_s * consts.delta1 / 2.0));
    let rinj = kappa_corollary(consts).mul(l).scale(1.0 / 8.0).min(d1);
    let out = InvariantLedger {
        delta: Field::new(consts.delta1, Bound::Upper, "the quotient space is delta1-hyperbolic"),
        rinj: Field::new(rinj, Bound::Lower, "min(kappa l / 8, delta1), kappa = 2 rho0 / (pi sinh rho0), l = scale L_S delta1 / 2"),
        e: Field::new(ledger.e.value, Bound::MultipleOfTrue, "the new e divides the previous e"),
        nu: Field::new(nu, Bound::Upper, "nu does not increase"),
        a: Field::new(a, Bound::Upper, "scale A + (nu + 4) pi sinh(2 L_S delta1)"),
        no_involution: ledger.no_involution,
        notes: vec![],
    };
    if out.nu.value > ledger.nu.value || ledger.e.value % out.e.value != 0 || out.a.value < a_prev {
        return Err(Error::BoundViolated("propagation broke monotonicity of nu, e or A".into()));
    }
    Ok(out)
}

/// Check the hypotheses, then propagate without rescaling.
pub fn propagate_ledger(ledger: &InvariantLedger, n1: &Exponent, n: u64, nu0: u64, consts: &Constants) -> Result<InvariantLedger> {
    let report = check_induction_hypotheses(ledger, n1, n, nu0, consts)?;
    if let Some(c) = report.checks.iter().find(|c| !c.pass) {
        return Err(Error::Precondition(format!("hypothesis `{}` fails", c.name)));
    }
    apply_step(ledger, consts, Magnitude::new(1.0))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Trace {
    pub mode: Mode,
    pub lambda: Magnitude,
    pub n: u64,
    pub n1: Exponent,
    pub ledgers: Vec<InvariantLedger>,
    pub reports: Vec<HypothesisReport>,
    /// Failing hypothesis that stopped the trace early.
    pub truncated: Option<String>,
    /// Upper bounds λᵏ ℓ₀ on the stable length of a fixed element, k = 0..=steps.
    pub stable_lengths: Vec<Magnitude>,
    /// Smallest k with λᵏ ℓ₀ below the least rinj of the trace.
    pub trivialization_step: Option<u64>,
}

/// Iterate check + propagate on the space rescaled by λ_{n₁} before each step.
pub fn quotient_iteration_trace(ledger0: &InvariantLedger, n: u64, n1: &Exponent, nu0: u64, steps: usize, ell0: f64, consts: &Constants) -> Result<Trace> {
    let lambda = match n1 {
        Exponent::Exact { n } => lambda_n(*n, consts)?,
        Exponent::Astronomical { ln } => lambda_ln_n(*ln, consts),
    };
    let mut ledgers = vec![ledger0.clone()];
    let mut reports = vec![];
    let mut truncated = None;
    for _ in 0..steps {
        let cur = ledgers.last().unwrap();
        let rep = check_induction_hypotheses(cur, n1, n, nu0, consts)?;
        let failing = rep.checks.iter().find(|c| !c.pass).map(|c| c.name.clone());
        reports.push(rep);
        if let Some(f) = failing {
            truncated = Some(f);
            break;
        }
        let next = apply_step(cur, consts, lambda.value)?;
        ledgers.push(next);
    }
    let ell = Magnitude::new(ell0);
    let stable_lengths: Vec<Magnitude> = (0..ledgers.len()).map(|k| ell.mul(lambda.value.powf(k as f64))).collect();
    let rinj_min = ledgers.iter().map(|l| l.rinj.value).fold(Magnitude::INFINITY, Magnitude::min);
    let trivialization_step = trivialization_step(lambda.value, ell, rinj_min);
    Ok(Trace { mode: consts.mode, lambda: lambda.value, n, n1: n1.clone(), ledgers, reports, truncated, stable_lengths, trivialization_step })
}

/// Smallest k ≥ 0 with λᵏ ℓ₀ < r; None when λ ≥ 1 and ℓ₀ ≥ r.
pub fn trivialization_step(lambda: Magnitude, ell0: Magnitude, r: Magnitude) -> Option<u64> {
    if ell0 < r {
        return Some(0);
    }
    if lambda.ln() >= 0.0 {
        return None;
    }
    let ratio = (ell0.ln() - r.ln()) / -lambda.ln();
    let mut k = ratio.floor().max(0.0) as u64;
    // settle rounding at the boundary by direct evaluation
    while ell0.mul(lambda.powf(k as f64)) >= r {
        k += 1;
    }
    while k > 0 && ell0.mul(lambda.powf((k - 1) as f64)) < r {
        k -= 1;
    }
    Some(k)
}

/// Scale factor bringing δ under δ₁ and A under (ν₀+5) π sinh(2 L_S δ₁), with the rescaled ledger.
pub fn rescale_to_fit(ledger: &InvariantLedger, nu0: u64, consts: &Constants) -> (Magnitude, InvariantLedger) {
    let mut s = Magnitude::new(1.0);
    if ledger.delta.value > consts.delta1 {
        s = s.min(Magnitude::new(consts.delta1 / ledger.delta.value));
    }
    let cap = consts.s_term().scale((nu0 + 5) as f64);
    if ledger.a.value > cap {
        s = s.min(cap.div(ledger.a.value));
    }
    (s, rescale(ledger, s))
}

/// δ, rinj and A scale with the metric; e, ν and the flags do not.
pub fn rescale(ledger: &InvariantLedger, s: Magnitude) -> InvariantLedger {
    let mut out = ledger.clone();
    out.delta.value = Magnitude::new(ledger.delta.value).mul(s).to_f64();
    out.rinj.value = ledger.rinj.value.mul(s);
    out.a.value = ledger.a.value.mul(s);
    if s != Magnitude::new(1.0) {
        out.notes.push(format!("rescaled by {s}"));
    }
    out
}

pub fn kappa_mcg_style(e: u64, index: u64) -> Result<u64> {
    if e == 0 || index == 0 {
        return invalid("e and the index must be positive");
    }
    Ok(e.lcm(&index))
}

/// True when the four λ conditions hold at exponent n (independent of the search).
pub fn lambda_conditions_hold(n: u64, consts: &Constants, nu0: u64) -> Result<bool> {
    let l = lambda_n(n, consts)?.value;
    Ok(lambda_constraints(consts, nu0).iter().all(|c| c.holds(l)) && n >= N0_FLOOR)
}
