//! Monomials of N_n = Λ(x_1..x_n) ⊗ F2[y_1..y_n] and their degree bases.
//!
//! `x_i` has topological degree 1 and `y_i` degree 2. The weight grading is a
//! function of the monomial and is never stored.

use std::collections::HashMap;
use std::fmt;
use std::ops::Range;

use serde::Serialize;

use crate::error::{Error, Result};

pub const MAX_VARS: usize = 32;

/// `x_S · y^e`, with variable `i` (1-based) stored at bit `i - 1` of `xmask`
/// and at `yexp[i - 1]`.
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Debug)]
pub struct Monomial {
    xmask: u32,
    yexp: Vec<u32>,
}

impl Monomial {
    pub fn new(n: usize, xmask: u32, yexp: Vec<u32>) -> Result<Self> {
        if n > MAX_VARS {
            return Err(Error::InvalidArgs(format!(
                "at most {MAX_VARS} variables supported, got {n}"
            )));
        }
        if yexp.len() != n {
            return Err(Error::ArityMismatch(n, yexp.len()));
        }
        if n < MAX_VARS && xmask >> n != 0 {
            return Err(Error::InvalidArgs(format!(
                "exterior mask {xmask:#b} mentions variables beyond {n}"
            )));
        }
        Ok(Self { xmask, yexp })
    }

    /// Builds `x_{xvars} · y^{yexp}` from 1-based variable indices.
    pub fn from_parts(xvars: &[usize], yexp: &[u32]) -> Result<Self> {
        let n = yexp.len();
        let mut xmask = 0u32;
        for &i in xvars {
            if i == 0 || i > n {
                return Err(Error::InvalidArgs(format!(
                    "variable x_{i} out of range 1..={n}"
                )));
            }
            xmask |= 1 << (i - 1);
        }
        Self::new(n, xmask, yexp.to_vec())
    }

    pub fn unit(n: usize) -> Self {
        Self {
            xmask: 0,
            yexp: vec![0; n],
        }
    }

    pub(crate) fn from_raw(xmask: u32, yexp: Vec<u32>) -> Self {
        Self { xmask, yexp }
    }

    pub fn n(&self) -> usize {
        self.yexp.len()
    }

    pub fn xmask(&self) -> u32 {
        self.xmask
    }

    pub fn yexp(&self) -> &[u32] {
        &self.yexp
    }

    pub fn has_x(&self, i: usize) -> bool {
        (self.xmask >> i) & 1 == 1
    }

    /// Number of exterior factors, `ω_0`.
    pub fn exterior_degree(&self) -> usize {
        self.xmask.count_ones() as usize
    }

    pub fn y_total(&self) -> u64 {
        self.yexp.iter().map(|&e| e as u64).sum()
    }

    pub fn degree(&self) -> usize {
        self.exterior_degree() + 2 * self.y_total() as usize
    }

    /// `ε_i + 2 e_i` for 0-based variable `i`.
    pub fn packed_exponent(&self, i: usize) -> u64 {
        ((self.xmask >> i) & 1) as u64 + 2 * self.yexp[i] as u64
    }

    pub fn weight_profile(&self) -> WeightProfile {
        let n = self.n();
        let packed: Vec<u64> = (0..n).map(|i| self.packed_exponent(i)).collect();
        let alpha = packed.iter().map(|p| p.count_ones()).collect();
        let top = packed
            .iter()
            .map(|&p| 64 - p.leading_zeros() as usize)
            .max()
            .unwrap_or(0);
        let omega = (0..top)
            .map(|j| packed.iter().map(|p| ((p >> j) & 1) as u32).sum())
            .collect();
        WeightProfile { alpha, omega }
    }

    /// Product in N_n; `None` when an exterior factor repeats.
    pub fn multiply(&self, other: &Monomial) -> Result<Option<Monomial>> {
        if self.n() != other.n() {
            return Err(Error::ArityMismatch(self.n(), other.n()));
        }
        if self.xmask & other.xmask != 0 {
            return Ok(None);
        }
        let yexp = self
            .yexp
            .iter()
            .zip(&other.yexp)
            .map(|(a, b)| a + b)
            .collect();
        Ok(Some(Monomial {
            xmask: self.xmask | other.xmask,
            yexp,
        }))
    }

    /// Relabels variables: variable `i` (0-based) becomes `perm[i]`.
    pub fn permuted(&self, perm: &[usize]) -> Monomial {
        assert_eq!(perm.len(), self.n());
        let mut xmask = 0u32;
        let mut yexp = vec![0; self.n()];
        for (i, &j) in perm.iter().enumerate() {
            if self.has_x(i) {
                xmask |= 1 << j;
            }
            yexp[j] = self.yexp[i];
        }
        Monomial { xmask, yexp }
    }

    /// Parses the text form `x{1,2} y[1,2,3]`, `y[0,2]` or `1`.
    pub fn parse(n: usize, s: &str) -> Result<Monomial> {
        let s = s.trim();
        if s == "1" {
            return Ok(Monomial::unit(n));
        }
        let bad = || Error::Parse(format!("malformed monomial {s:?}"));
        let (xvars, rest) = match s.strip_prefix("x{") {
            Some(r) => {
                let close = r.find('}').ok_or_else(bad)?;
                let inner = r[..close].trim();
                let vars = if inner.is_empty() {
                    Vec::new()
                } else {
                    inner
                        .split(',')
                        .map(|t| t.trim().parse::<usize>().map_err(|_| bad()))
                        .collect::<Result<Vec<_>>>()?
                };
                (vars, r[close + 1..].trim_start())
            }
            None => (Vec::new(), s),
        };
        let inner = rest
            .strip_prefix("y[")
            .and_then(|r| r.strip_suffix(']'))
            .ok_or_else(bad)?;
        let yexp = inner
            .split(',')
            .map(|t| t.trim().parse::<u32>().map_err(|_| bad()))
            .collect::<Result<Vec<_>>>()?;
        if yexp.len() != n {
            return Err(Error::ArityMismatch(n, yexp.len()));
        }
        Monomial::from_parts(&xvars, &yexp)
    }
}

impl fmt::Display for Monomial {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.xmask == 0 && self.yexp.iter().all(|&e| e == 0) {
            return f.write_str("1");
        }
        if self.xmask != 0 {
            let vars: Vec<String> = (0..self.n())
                .filter(|&i| self.has_x(i))
                .map(|i| (i + 1).to_string())
                .collect();
            write!(f, "x{{{}}} ", vars.join(","))?;
        }
        let exps: Vec<String> = self.yexp.iter().map(u32::to_string).collect();
        write!(f, "y[{}]", exps.join(","))
    }
}

impl Serialize for Monomial {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.collect_str(self)
    }
}

/// Per-variable bit counts `α_i` and per-bit-position column sums `ω_j` of
/// the numbers `ε_i + 2 e_i`.
#[derive(Clone, PartialEq, Eq, Debug, Serialize)]
pub struct WeightProfile {
    pub alpha: Vec<u32>,
    pub omega: Vec<u32>,
}

impl WeightProfile {
    pub fn omega_at(&self, j: usize) -> u32 {
        self.omega.get(j).copied().unwrap_or(0)
    }
}

fn binomial(n: u64, k: u64) -> u128 {
    if k > n {
        return 0;
    }
    let k = k.min(n - k);
    (0..k).fold(1u128, |acc, i| acc * (n - i) as u128 / (i + 1) as u128)
}

/// `C(n, a) · C(b + n - 1, n - 1)`, the size of Λ^a ⊗ Y^{2b}.
pub fn component_count(n: usize, a: usize, b: u64) -> u128 {
    if n == 0 {
        return u128::from(a == 0 && b == 0);
    }
    binomial(n as u64, a as u64) * binomial(b + n as u64 - 1, n as u64 - 1)
}

/// Size of the degree-`d` part of N_n.
pub fn degree_count(n: usize, d: usize) -> u128 {
    exterior_sizes(n, d)
        .map(|a| component_count(n, a, ((d - a) / 2) as u64))
        .sum()
}

fn exterior_sizes(n: usize, d: usize) -> impl Iterator<Item = usize> {
    (0..=n.min(d)).filter(move |a| (d - a).is_multiple_of(2))
}

/// All exponent vectors of length `n` summing to `total`, lexicographically ascending.
pub fn compositions(n: usize, total: u32) -> Vec<Vec<u32>> {
    fn rec(slot: usize, left: u32, cur: &mut Vec<u32>, out: &mut Vec<Vec<u32>>) {
        if slot + 1 == cur.len() {
            cur[slot] = left;
            out.push(cur.clone());
            return;
        }
        for e in 0..=left {
            cur[slot] = e;
            rec(slot + 1, left - e, cur, out);
        }
    }
    let mut out = Vec::new();
    if n == 0 {
        if total == 0 {
            out.push(Vec::new());
        }
        return out;
    }
    rec(0, total, &mut vec![0; n], &mut out);
    out
}

/// Exterior masks of size `a` in ascending integer order.
pub fn masks_of_size(n: usize, a: usize) -> Vec<u32> {
    if a > n {
        return Vec::new();
    }
    if a == 0 {
        return vec![0];
    }
    // Gosper's hack walks same-popcount masks in increasing order.
    let limit: u64 = 1 << n;
    let mut out = Vec::new();
    let mut m: u64 = (1 << a) - 1;
    while m < limit {
        out.push(m as u32);
        let c = m & m.wrapping_neg();
        let r = m + c;
        m = (((r ^ m) >> 2) / c) | r;
    }
    out
}

/// Λ^a ⊗ Y^{2b} in canonical order: mask ascending, then y-exponents lexicographic.
pub fn enumerate_component(n: usize, a: usize, b: u32) -> Result<Vec<Monomial>> {
    if a > n {
        return Err(Error::InvalidArgs(format!(
            "exterior degree {a} exceeds number of variables {n}"
        )));
    }
    if n > MAX_VARS {
        return Err(Error::InvalidArgs(format!(
            "at most {MAX_VARS} variables supported"
        )));
    }
    let ys = compositions(n, b);
    let mut out = Vec::with_capacity(component_count(n, a, b as u64) as usize);
    for mask in masks_of_size(n, a) {
        for y in &ys {
            out.push(Monomial::from_raw(mask, y.clone()));
        }
    }
    Ok(out)
}

/// The canonical coordinate basis of the degree-`d` part of N_n.
#[derive(Clone, Debug)]
pub struct DegreeBasis {
    n: usize,
    d: usize,
    items: Vec<Monomial>,
    index: HashMap<Monomial, usize>,
    /// `(a, range)` for each exterior size present, ascending in `a`.
    components: Vec<(usize, Range<usize>)>,
}

impl DegreeBasis {
    pub fn n(&self) -> usize {
        self.n
    }

    pub fn degree(&self) -> usize {
        self.d
    }

    pub fn len(&self) -> usize {
        self.items.len()
    }

    pub fn is_empty(&self) -> bool {
        self.items.is_empty()
    }

    pub fn items(&self) -> &[Monomial] {
        &self.items
    }

    pub fn get(&self, i: usize) -> &Monomial {
        &self.items[i]
    }

    pub fn index_of(&self, m: &Monomial) -> Option<usize> {
        self.index.get(m).copied()
    }

    /// Coordinates of the Λ^a block; empty if that block does not occur.
    pub fn component_range(&self, a: usize) -> Range<usize> {
        self.components
            .iter()
            .find(|(x, _)| *x == a)
            .map_or(0..0, |(_, r)| r.clone())
    }

    pub fn components(&self) -> impl Iterator<Item = (usize, Range<usize>)> + '_ {
        self.components.iter().cloned()
    }
}

pub fn enumerate_degree(n: usize, d: usize) -> DegreeBasis {
    let mut items = Vec::new();
    let mut components = Vec::new();
    for a in exterior_sizes(n, d) {
        let start = items.len();
        let b = ((d - a) / 2) as u32;
        items.extend(enumerate_component(n, a, b).expect("a <= n"));
        components.push((a, start..items.len()));
    }
    let index = items
        .iter()
        .cloned()
        .enumerate()
        .map(|(i, m)| (m, i))
        .collect();
    DegreeBasis {
        n,
        d,
        items,
        index,
        components,
    }
}

/// Basis of the pure-y monomials of topological degree `2 * half`.
pub fn enumerate_pure_y(n: usize, half: u32) -> DegreeBasis {
    let items = enumerate_component(n, 0, half).expect("a = 0");
    let index = items
        .iter()
        .cloned()
        .enumerate()
        .map(|(i, m)| (m, i))
        .collect();
    let len = items.len();
    DegreeBasis {
        n,
        d: 2 * half as usize,
        items,
        index,
        components: vec![(0, 0..len)],
    }
}
