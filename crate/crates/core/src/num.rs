//! Exact rational numbers used for fluent values, coefficients and constants.

use num_integer::Integer;
use num_rational::Ratio;
use num_traits::{One, Signed, ToPrimitive, Zero};
use serde::{de, Deserialize, Deserializer, Serialize, Serializer};
use std::fmt;

pub type Num = Ratio<i64>;

pub fn int(v: i64) -> Num {
    Num::from_integer(v)
}

pub fn zero() -> Num {
    Num::zero()
}

pub fn one() -> Num {
    Num::one()
}

pub fn to_f64(v: &Num) -> f64 {
    v.to_f64().unwrap_or(f64::NAN)
}

/// True when the denominator only has factors 2 and 5.
fn terminates(v: &Num) -> bool {
    let mut d = *v.denom();
    while d % 2 == 0 {
        d /= 2;
    }
    while d % 5 == 0 {
        d /= 5;
    }
    d == 1
}

/// Decimal rendering when exact, `p/q` otherwise.
pub fn format_num(v: &Num) -> String {
    if v.is_integer() {
        return v.numer().to_string();
    }
    if terminates(v) {
        let neg = v.is_negative();
        let a = v.abs();
        let whole = a.to_integer();
        let mut frac = a.fract();
        let mut digits = String::new();
        while !frac.is_zero() {
            frac *= int(10);
            let d = frac.to_integer();
            digits.push(char::from(b'0' + d as u8));
            frac = frac.fract();
        }
        return format!("{}{}.{}", if neg { "-" } else { "" }, whole, digits);
    }
    format!("{}/{}", v.numer(), v.denom())
}

/// Parses integers, decimals (`-1.25`) and fractions (`3/4`).
pub fn parse_num(s: &str) -> Option<Num> {
    let s = s.trim();
    if s.is_empty() {
        return None;
    }
    if let Some((p, q)) = s.split_once('/') {
        let p: i64 = p.trim().parse().ok()?;
        let q: i64 = q.trim().parse().ok()?;
        if q == 0 {
            return None;
        }
        return Some(Num::new(p, q));
    }
    if let Some((whole, frac)) = s.split_once('.') {
        let neg = whole.starts_with('-');
        let whole_digits = whole.trim_start_matches(['-', '+']);
        if !frac.chars().all(|c| c.is_ascii_digit())
            || !whole_digits.chars().all(|c| c.is_ascii_digit())
            || frac.len() > 17
        {
            return None;
        }
        let w: i64 = if whole_digits.is_empty() { 0 } else { whole_digits.parse().ok()? };
        let scale = 10i64.checked_pow(frac.len() as u32)?;
        let f: i64 = if frac.is_empty() { 0 } else { frac.parse().ok()? };
        let mag = Num::new(w.checked_mul(scale)?.checked_add(f)?, scale);
        return Some(if neg { -mag } else { mag });
    }
    s.parse::<i64>().ok().map(int)
}

pub fn lcm_of_denoms<'a>(values: impl IntoIterator<Item = &'a Num>) -> i64 {
    values.into_iter().fold(1i64, |acc, v| acc.lcm(v.denom()))
}

/// Serde adapter: integers as JSON numbers, everything else as strings.
pub mod serde_num {
    use super::*;

    pub fn serialize<S: Serializer>(v: &Num, s: S) -> Result<S::Ok, S::Error> {
        if v.is_integer() {
            s.serialize_i64(*v.numer())
        } else {
            s.serialize_str(&format_num(v))
        }
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Num, D::Error> {
        let raw = serde_json::Value::deserialize(d)?;
        match raw {
            serde_json::Value::Number(n) => {
                if let Some(i) = n.as_i64() {
                    Ok(int(i))
                } else {
                    parse_num(&n.to_string())
                        .ok_or_else(|| de::Error::custom(format!("bad number {n}")))
                }
            }
            serde_json::Value::String(s) => {
                parse_num(&s).ok_or_else(|| de::Error::custom(format!("bad number {s:?}")))
            }
            other => Err(de::Error::custom(format!("expected number, got {other}"))),
        }
    }
}

/// Newtype so maps of numbers can derive serde.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct SerNum(pub Num);

impl Serialize for SerNum {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        serde_num::serialize(&self.0, s)
    }
}

impl<'de> Deserialize<'de> for SerNum {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        serde_num::deserialize(d).map(SerNum)
    }
}

impl fmt::Display for SerNum {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&format_num(&self.0))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn formats_and_parses() {
        for (v, s) in [
            (int(4), "4"),
            (Num::new(-5, 4), "-1.25"),
            (Num::new(1, 3), "1/3"),
            (Num::new(1, 2), "0.5"),
        ] {
            assert_eq!(format_num(&v), s);
            assert_eq!(parse_num(s), Some(v));
        }
        assert_eq!(parse_num("-0.5"), Some(Num::new(-1, 2)));
        assert_eq!(parse_num("x"), None);
        assert_eq!(parse_num("1/0"), None);
    }
}
