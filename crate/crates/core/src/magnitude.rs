//! Non-negative reals that may overflow an f64, stored either as a plain value
//! or by their natural logarithm.

use std::cmp::Ordering;
use std::fmt;

use serde::{Deserialize, Deserializer, Serialize, Serializer};

const LN_LIMIT: f64 = 700.0;

#[derive(Clone, Copy, Debug)]
pub enum Magnitude {
    /// Finite value with |ln| ≤ 700, or zero.
    Value(f64),
    /// Natural log of a value outside plain range; may be ±∞.
    Ln(f64),
}

impl Magnitude {
    pub const ZERO: Magnitude = Magnitude::Value(0.0);
    pub const INFINITY: Magnitude = Magnitude::Ln(f64::INFINITY);

    /// Panics on negative or NaN input.
    pub fn new(x: f64) -> Self {
        assert!(x >= 0.0, "magnitude must be non-negative, got {x}");
        if x == 0.0 {
            Magnitude::ZERO
        } else if x.is_infinite() {
            Magnitude::INFINITY
        } else {
            let l = x.ln();
            if l.abs() <= LN_LIMIT {
                Magnitude::Value(x)
            } else {
                Magnitude::Ln(l)
            }
        }
    }

    pub fn from_ln(l: f64) -> Self {
        if l == f64::NEG_INFINITY {
            Magnitude::ZERO
        } else if l.abs() <= LN_LIMIT {
            Magnitude::Value(l.exp())
        } else {
            Magnitude::Ln(l)
        }
    }

    pub fn ln(self) -> f64 {
        match self {
            Magnitude::Value(x) => x.ln(),
            Magnitude::Ln(l) => l,
        }
    }

    /// Plain value; saturates to 0 or ∞ outside f64 range.
    pub fn to_f64(self) -> f64 {
        match self {
            Magnitude::Value(x) => x,
            Magnitude::Ln(l) => l.exp(),
        }
    }

    pub fn is_plain(self) -> bool {
        matches!(self, Magnitude::Value(_))
    }

    pub fn is_zero(self) -> bool {
        matches!(self, Magnitude::Value(x) if x == 0.0)
    }

    pub fn is_infinite(self) -> bool {
        matches!(self, Magnitude::Ln(l) if l == f64::INFINITY)
    }

    pub fn mul(self, o: Magnitude) -> Magnitude {
        match (self, o) {
            (Magnitude::Value(a), Magnitude::Value(b)) => {
                let p = a * b;
                if p == 0.0 && a != 0.0 && b != 0.0 {
                    Magnitude::from_ln(a.ln() + b.ln())
                } else {
                    Magnitude::new(p)
                }
            }
            _ if self.is_zero() || o.is_zero() => Magnitude::ZERO,
            _ => Magnitude::from_ln(self.ln() + o.ln()),
        }
    }

    pub fn div(self, o: Magnitude) -> Magnitude {
        match (self, o) {
            (Magnitude::Value(a), Magnitude::Value(b)) if b != 0.0 => {
                let q = a / b;
                if q.is_finite() && (q != 0.0 || a == 0.0) {
                    Magnitude::new(q)
                } else {
                    Magnitude::from_ln(a.ln() - b.ln())
                }
            }
            _ => Magnitude::from_ln(self.ln() - o.ln()),
        }
    }

    pub fn scale(self, k: f64) -> Magnitude {
        self.mul(Magnitude::new(k))
    }

    pub fn add(self, o: Magnitude) -> Magnitude {
        match (self, o) {
            (Magnitude::Value(a), Magnitude::Value(b)) if (a + b).is_finite() => Magnitude::new(a + b),
            _ => {
                let (hi, lo) = if self >= o { (self.ln(), o.ln()) } else { (o.ln(), self.ln()) };
                if lo == f64::NEG_INFINITY || hi == f64::INFINITY {
                    return Magnitude::from_ln(hi);
                }
                Magnitude::from_ln(hi + (lo - hi).exp().ln_1p())
            }
        }
    }

    /// self − o, clamped at zero.
    pub fn sub(self, o: Magnitude) -> Magnitude {
        if self <= o {
            return Magnitude::ZERO;
        }
        match (self, o) {
            (Magnitude::Value(a), Magnitude::Value(b)) => Magnitude::new(a - b),
            _ => {
                let (a, b) = (self.ln(), o.ln());
                if b == f64::NEG_INFINITY || a == f64::INFINITY {
                    return self;
                }
                Magnitude::from_ln(a + (-(b - a).exp()).ln_1p())
            }
        }
    }

    pub fn powf(self, p: f64) -> Magnitude {
        match self {
            Magnitude::Value(x) if (x.powf(p)).is_finite() && x.powf(p) > 0.0 => Magnitude::new(x.powf(p)),
            _ if self.is_zero() => Magnitude::ZERO,
            _ => Magnitude::from_ln(self.ln() * p),
        }
    }

    pub fn sqrt(self) -> Magnitude {
        match self {
            Magnitude::Value(x) => Magnitude::new(x.sqrt()),
            Magnitude::Ln(l) => Magnitude::from_ln(l / 2.0),
        }
    }

    pub fn min(self, o: Magnitude) -> Magnitude {
        if self <= o {
            self
        } else {
            o
        }
    }

    pub fn max(self, o: Magnitude) -> Magnitude {
        if self >= o {
            self
        } else {
            o
        }
    }
}

/// sinh x for x ≥ 0.
pub fn sinh(x: f64) -> Magnitude {
    if x <= LN_LIMIT {
        Magnitude::new(x.sinh())
    } else {
        Magnitude::from_ln(x - std::f64::consts::LN_2 + (-(-2.0 * x).exp()).ln_1p())
    }
}

/// sinh of a magnitude; astronomically large arguments give ln = ∞.
pub fn sinh_mag(x: Magnitude) -> Magnitude {
    match x {
        Magnitude::Value(v) => sinh(v),
        Magnitude::Ln(l) if l < 0.0 => Magnitude::from_ln(l),
        Magnitude::Ln(l) => Magnitude::from_ln(l.exp() - std::f64::consts::LN_2),
    }
}

impl From<f64> for Magnitude {
    fn from(x: f64) -> Self {
        Magnitude::new(x)
    }
}

impl PartialEq for Magnitude {
    fn eq(&self, o: &Self) -> bool {
        self.partial_cmp(o) == Some(Ordering::Equal)
    }
}

impl PartialOrd for Magnitude {
    fn partial_cmp(&self, o: &Self) -> Option<Ordering> {
        match (self, o) {
            (Magnitude::Value(a), Magnitude::Value(b)) => a.partial_cmp(b),
            _ => self.ln().partial_cmp(&o.ln()),
        }
    }
}

impl fmt::Display for Magnitude {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Magnitude::Value(x) => write!(f, "{x}"),
            Magnitude::Ln(l) => write!(f, "exp({l})"),
        }
    }
}

impl Serialize for Magnitude {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        use serde::ser::SerializeMap;
        match *self {
            Magnitude::Value(x) => s.serialize_f64(x),
            Magnitude::Ln(l) => {
                let mut m = s.serialize_map(Some(1))?;
                if l.is_finite() {
                    m.serialize_entry("ln", &l)?;
                } else {
                    m.serialize_entry("ln", if l > 0.0 { "inf" } else { "-inf" })?;
                }
                m.end()
            }
        }
    }
}

impl<'de> Deserialize<'de> for Magnitude {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        #[derive(Deserialize)]
        #[serde(untagged)]
        enum LnRepr {
            Num(f64),
            Text(String),
        }
        #[derive(Deserialize)]
        #[serde(untagged)]
        enum Repr {
            Num(f64),
            Ln { ln: LnRepr },
        }
        match Repr::deserialize(d)? {
            Repr::Num(x) if x >= 0.0 => Ok(Magnitude::new(x)),
            Repr::Num(x) => Err(serde::de::Error::custom(format!("negative magnitude {x}"))),
            Repr::Ln { ln: LnRepr::Num(l) } => Ok(Magnitude::from_ln(l)),
            Repr::Ln { ln: LnRepr::Text(t) } => match t.as_str() {
                "inf" => Ok(Magnitude::INFINITY),
                "-inf" => Ok(Magnitude::ZERO),
                _ => Err(serde::de::Error::custom(format!("bad ln `{t}`"))),
            },
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn overflow_paths() {
        let big = sinh(1e6);
        assert!(!big.is_plain());
        assert!((big.ln() - (1e6 - std::f64::consts::LN_2)).abs() < 1e-9);
        assert_eq!(sinh(2.0).to_f64(), 2f64.sinh());
        let x = big.mul(big);
        assert!((x.ln() - 2.0 * big.ln()).abs() < 1e-6);
        assert_eq!(x.div(big), big);
        assert!(sinh_mag(Magnitude::from_ln(60.0)).ln() > 1e20);
        assert!(big.add(Magnitude::new(1.0)) == big);
        assert!(Magnitude::new(3.0).sub(Magnitude::new(5.0)).is_zero());
    }

    #[test]
    fn plain_arithmetic_is_exact() {
        let a = Magnitude::new(0.1);
        let b = Magnitude::new(0.2);
        assert_eq!(a.add(b).to_f64(), 0.1 + 0.2);
        assert_eq!(a.mul(b).to_f64(), 0.1 * 0.2);
    }

    #[test]
    fn json_round_trip() {
        for m in [Magnitude::new(2.5), Magnitude::from_ln(1e5), Magnitude::INFINITY, Magnitude::ZERO] {
            let s = serde_json::to_string(&m).unwrap();
            let back: Magnitude = serde_json::from_str(&s).unwrap();
            assert_eq!(back, m, "{s}");
        }
        assert_eq!(serde_json::to_string(&Magnitude::INFINITY).unwrap(), r#"{"ln":"inf"}"#);
    }

    proptest! {
        #[test]
        fn log_and_plain_agree(a in 1e-3f64..1e3, b in 1e-3f64..1e3) {
            let (ma, mb) = (Magnitude::new(a), Magnitude::new(b));
            let la = Magnitude::Ln(a.ln());
            let lb = Magnitude::Ln(b.ln());
            prop_assert!((la.mul(lb).to_f64() - a * b).abs() <= 1e-9 * a * b);
            prop_assert!((la.add(lb).to_f64() - (a + b)).abs() <= 1e-9 * (a + b));
            prop_assert_eq!(ma < mb, la < lb);
            if a > b {
                prop_assert!((la.sub(lb).to_f64() - (a - b)).abs() <= 1e-9 * a);
            }
        }
    }
}
