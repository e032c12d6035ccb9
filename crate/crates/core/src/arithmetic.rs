//! Binary arithmetic on degrees: α, β, the top-layer degree and the two
//! families `k = n - 3` and `n = 2^r + 1, k = n - 4`, exact at any size.

use std::fmt;
use std::ops::{Add, Shl};
use std::str::FromStr;

use num_bigint::BigUint;
use num_traits::{One, ToPrimitive, Zero};
use serde::{Serialize, Serializer};

use crate::error::{Error, Result};

/// Arbitrary-size natural number.
#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Debug, Default)]
pub struct BitNat(BigUint);

impl BitNat {
    pub fn zero() -> Self {
        Self(BigUint::zero())
    }

    pub fn pow2(a: u64) -> Self {
        Self(BigUint::one() << a)
    }

    pub fn is_zero(&self) -> bool {
        self.0.is_zero()
    }

    /// Number of binary digits; zero has none.
    pub fn bits(&self) -> u64 {
        self.0.bits()
    }

    pub fn bit(&self, i: u64) -> bool {
        self.0.bit(i)
    }

    pub fn count_ones(&self) -> u64 {
        self.0.count_ones()
    }

    pub fn checked_sub(&self, other: &BitNat) -> Option<BitNat> {
        (self.0 >= other.0).then(|| Self(&self.0 - &other.0))
    }

    pub fn mul_u64(&self, m: u64) -> BitNat {
        Self(&self.0 * m)
    }

    pub fn to_u64(&self) -> Option<u64> {
        self.0.to_u64()
    }

    /// `(a, b)` with `self = 2^a - b` and `b` of fewer than `a/2` bits, or `(a, 0)` for a power of two.
    pub fn pow2_minus_form(&self) -> Option<(u64, BitNat)> {
        if self.is_zero() {
            return None;
        }
        if self.count_ones() == 1 {
            return Some((self.bits() - 1, BitNat::zero()));
        }
        let a = self.bits();
        let b = BitNat::pow2(a).checked_sub(self)?;
        (a >= 8 && b.bits() < a / 2).then_some((a, b))
    }

    /// `2^a-b` when that form is short, decimal otherwise.
    pub fn shorthand(&self) -> String {
        match self.pow2_minus_form() {
            Some((a, b)) if b.is_zero() && a >= 8 => format!("2^{a}"),
            Some((a, b)) if !b.is_zero() => format!("2^{a}-{b}"),
            _ => self.to_string(),
        }
    }
}

impl From<u64> for BitNat {
    fn from(v: u64) -> Self {
        Self(BigUint::from(v))
    }
}

impl Add for &BitNat {
    type Output = BitNat;
    fn add(self, rhs: &BitNat) -> BitNat {
        BitNat(&self.0 + &rhs.0)
    }
}

impl Add<u64> for &BitNat {
    type Output = BitNat;
    fn add(self, rhs: u64) -> BitNat {
        BitNat(&self.0 + rhs)
    }
}

impl Shl<u64> for &BitNat {
    type Output = BitNat;
    fn shl(self, rhs: u64) -> BitNat {
        BitNat(&self.0 << rhs)
    }
}

impl fmt::Display for BitNat {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

/// Accepts decimal digits or `2^a`, `2^a-b`, `2^a+b` with decimal `a`, `b`.
impl FromStr for BitNat {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        let bad = || Error::Parse(format!("not a natural number: {s:?}"));
        let decimal = |t: &str| -> Result<BitNat> {
            if t.is_empty() || !t.bytes().all(|c| c.is_ascii_digit()) {
                return Err(bad());
            }
            BigUint::parse_bytes(t.as_bytes(), 10)
                .map(BitNat)
                .ok_or_else(bad)
        };
        let Some(rest) = s.strip_prefix("2^") else {
            return decimal(s);
        };
        let (exp, tail) = match rest.find(['-', '+']) {
            Some(i) => (&rest[..i], Some((&rest[i..i + 1], &rest[i + 1..]))),
            None => (rest, None),
        };
        let exp = decimal(exp)?
            .to_u64()
            .filter(|&a| a <= 1 << 32)
            .ok_or_else(bad)?;
        let base = BitNat::pow2(exp);
        match tail {
            None => Ok(base),
            Some(("+", t)) => Ok(&base + &decimal(t)?),
            Some((_, t)) => base.checked_sub(&decimal(t)?).ok_or_else(bad),
        }
    }
}

impl Serialize for BitNat {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.serialize_str(&self.to_string())
    }
}

/// Number of ones in the binary expansion.
pub fn alpha_of(t: &BitNat) -> u64 {
    t.count_ones()
}

/// Least `s >= 1` with `α(d + s) <= s`.
pub fn beta_of(d: &BitNat) -> Result<u64> {
    if d.is_zero() {
        return Err(Error::InvalidArgs("β is defined for d >= 1".into()));
    }
    let mut s = 1u64;
    while alpha_of(&(d + s)) > s {
        s += 1;
    }
    Ok(s)
}

pub fn beta_of_u64(d: u64) -> Result<u64> {
    beta_of(&BitNat::from(d))
}

/// β(d) > n, decided as α(d + n) > n.
pub fn beta_exceeds(d: &BitNat, n: u64) -> bool {
    alpha_of(&(d + n)) > n
}

fn check_nk(n: u64, k: u64) -> Result<()> {
    if k == 0 || k >= n {
        return Err(Error::InvalidArgs(format!(
            "need 1 <= k < n, got n = {n}, k = {k}"
        )));
    }
    Ok(())
}

/// `(n - 1)(2^{k+1} - 2) + k`.
pub fn zk_degree(n: u64, k: u64) -> Result<BitNat> {
    check_nk(n, k)?;
    let two = BitNat::from(2);
    let factor = BitNat::pow2(k + 1).checked_sub(&two).expect("k >= 1");
    Ok(&factor.mul_u64(n - 1) + k)
}

/// `(n - 1)(2^k - 1)`.
pub fn d1_of(n: u64, k: u64) -> Result<BitNat> {
    check_nk(n, k)?;
    let factor = BitNat::pow2(k)
        .checked_sub(&BitNat::from(1))
        .expect("k >= 1");
    Ok(factor.mul_u64(n - 1))
}

/// `zk_degree(n, k) == k + 2 d_1`.
pub fn identity_check(n: u64, k: u64) -> Result<bool> {
    let d = zk_degree(n, k)?;
    let d1 = d1_of(n, k)?;
    Ok(d == &(&d1 << 1) + k)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Family {
    Nm4,
    Nm3,
}

impl fmt::Display for Family {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Family::Nm4 => "nm4",
            Family::Nm3 => "nm3",
        })
    }
}

impl FromStr for Family {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "nm4" => Ok(Family::Nm4),
            "nm3" => Ok(Family::Nm3),
            _ => Err(Error::Parse(format!(
                "unknown family {s:?}, expected nm4 or nm3"
            ))),
        }
    }
}

/// One member of a family. `d` is absent when `k < 1`, where the top-layer
/// degree is undefined.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct FamilyRecord {
    pub family: Family,
    pub r: Option<u64>,
    pub n: u64,
    pub k: i64,
    pub d: Option<BitNat>,
    pub d_shorthand: Option<String>,
    pub d_plus_n: BitNat,
    pub d_plus_n_shorthand: String,
    pub alpha_d_plus_n: u64,
    pub beta_exceeds_n: bool,
    /// The family's hypothesis: `r >= 5` for nm4, `α(n - 2) >= 3` for nm3.
    pub hypothesis_holds: bool,
    /// Closed-form identities recomputed independently agree.
    pub identities_hold: bool,
    pub contradiction: bool,
}

impl FamilyRecord {
    pub const CSV_HEADER: [&'static str; 13] = [
        "family",
        "r",
        "n",
        "k",
        "d",
        "d_shorthand",
        "d_plus_n",
        "d_plus_n_shorthand",
        "alpha_d_plus_n",
        "beta_exceeds_n",
        "hypothesis_holds",
        "identities_hold",
        "contradiction",
    ];

    /// CSV fields in header order.
    pub fn csv_row(&self) -> Vec<String> {
        vec![
            self.family.to_string(),
            self.r.map(|r| r.to_string()).unwrap_or_default(),
            self.n.to_string(),
            self.k.to_string(),
            self.d.as_ref().map(BitNat::to_string).unwrap_or_default(),
            self.d_shorthand.clone().unwrap_or_default(),
            self.d_plus_n.to_string(),
            self.d_plus_n_shorthand.clone(),
            self.alpha_d_plus_n.to_string(),
            self.beta_exceeds_n.to_string(),
            self.hypothesis_holds.to_string(),
            self.identities_hold.to_string(),
            self.contradiction.to_string(),
        ]
    }
}

pub const NM4_MAX_R: u64 = 20;

/// `n = 2^r + 1`, `k = n - 4` for each `r` in `rmin..=rmax`.
pub fn scan_family_nm4(rmin: u64, rmax: u64) -> Result<Vec<FamilyRecord>> {
    if rmin < 1 || rmin > rmax || rmax > NM4_MAX_R {
        return Err(Error::InvalidArgs(format!(
            "need 1 <= rmin <= rmax <= {NM4_MAX_R}, got {rmin}..{rmax}"
        )));
    }
    (rmin..=rmax).map(nm4_record).collect()
}

fn nm4_record(r: u64) -> Result<FamilyRecord> {
    let n = (1u64 << r) + 1;
    let k = n as i64 - 4;
    let closed = BitNat::pow2(r + n - 3)
        .checked_sub(&BitNat::from(2))
        .expect("r + n - 3 >= 1");
    let (d, d_plus_n) = if k >= 1 {
        let d = zk_degree(n, k as u64)?;
        let sum = &d + n;
        (Some(d), sum)
    } else {
        (None, closed.clone())
    };
    let alpha = alpha_of(&d_plus_n);
    let identities_hold = d_plus_n == closed && alpha as i64 == (r + n) as i64 - 4;
    let verdict = alpha > n;
    let hypothesis_holds = r >= 5;
    Ok(FamilyRecord {
        family: Family::Nm4,
        r: Some(r),
        n,
        k,
        d_shorthand: d.as_ref().map(BitNat::shorthand),
        d,
        d_plus_n_shorthand: d_plus_n.shorthand(),
        d_plus_n,
        alpha_d_plus_n: alpha,
        beta_exceeds_n: verdict,
        hypothesis_holds,
        identities_hold,
        contradiction: !identities_hold || (hypothesis_holds && !verdict),
    })
}

/// `k = n - 3` at a single `n >= 4`.
pub fn check_family_nm3(n: u64) -> Result<FamilyRecord> {
    if !(4..=1 << 20).contains(&n) {
        return Err(Error::InvalidArgs(format!("need 4 <= n <= 2^20, got {n}")));
    }
    let k = n - 3;
    let d = zk_degree(n, k)?;
    let d_plus_n = &d + n;
    let alpha = alpha_of(&d_plus_n);
    let verdict = alpha > n;
    let hypothesis_holds = alpha_of(&BitNat::from(n - 2)) >= 3;
    let identities_hold = identity_check(n, k)?;
    Ok(FamilyRecord {
        family: Family::Nm3,
        r: None,
        n,
        k: k as i64,
        d_shorthand: Some(d.shorthand()),
        d: Some(d),
        d_plus_n_shorthand: d_plus_n.shorthand(),
        d_plus_n,
        alpha_d_plus_n: alpha,
        beta_exceeds_n: verdict,
        hypothesis_holds,
        identities_hold,
        contradiction: !identities_hold || (hypothesis_holds && !verdict),
    })
}
