//! The generators `Q_0` and `P^a` of A^♯ acting on N_n, and hit subspaces.
//!
//! `Q_0` is the derivation with `Q_0(x_i) = y_i`, `Q_0(y_i) = 0`. `P^a` kills
//! the exterior factor and acts on `y^e` by the Cartan formula with
//! `P(y_i) = y_i + y_i^2`, so `P^a(y^e) = sum_{|c| = a} prod_i C(e_i, c_i) y^{e+c}`.
//!
//! A^♯ is generated by `Q_0` and the `P^a`, so in a fixed degree the hit
//! subspace is spanned by `Q_0(N^{d-1})` together with all `P^a(N^{d-2a})`.

use std::collections::BTreeSet;
use std::sync::Arc;

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::f2linalg::{BitVector, EchelonBuilder, Subspace};
use crate::monomial::{
    component_count, degree_count, enumerate_component, enumerate_degree, enumerate_pure_y,
    DegreeBasis, Monomial,
};

/// Caps on the size of the linear algebra a single call may attempt.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Limits {
    pub max_cols: usize,
    pub max_rows: usize,
}

impl Default for Limits {
    fn default() -> Self {
        Self {
            max_cols: 1 << 22,
            max_rows: 1 << 24,
        }
    }
}

impl Limits {
    pub fn check_cols(&self, cols: u128) -> Result<()> {
        if cols > self.max_cols as u128 {
            return Err(Error::ResourceLimit {
                what: "basis columns",
                requested: cols,
                limit: self.max_cols as u128,
            });
        }
        Ok(())
    }

    pub fn check_rows(&self, rows: u128) -> Result<()> {
        if rows > self.max_rows as u128 {
            return Err(Error::ResourceLimit {
                what: "generated rows",
                requested: rows,
                limit: self.max_rows as u128,
            });
        }
        Ok(())
    }
}

/// Lucas: `C(e, c)` is odd iff the bits of `c` are a subset of those of `e`.
#[inline]
pub fn binom_mod2(e: u64, c: u64) -> bool {
    c <= e && c & (e - c) == 0
}

/// A finite sum of monomials over F2.
#[derive(Clone, PartialEq, Eq, Debug, Default)]
pub struct Element {
    terms: BTreeSet<Monomial>,
}

impl Element {
    pub fn zero() -> Self {
        Self::default()
    }

    pub fn from_terms<I: IntoIterator<Item = Monomial>>(terms: I) -> Self {
        let mut e = Self::zero();
        for t in terms {
            e.add_monomial(t);
        }
        e
    }

    pub fn add_monomial(&mut self, m: Monomial) {
        if !self.terms.remove(&m) {
            self.terms.insert(m);
        }
    }

    pub fn add(&mut self, other: &Element) {
        for t in &other.terms {
            self.add_monomial(t.clone());
        }
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn terms(&self) -> impl Iterator<Item = &Monomial> {
        self.terms.iter()
    }

    pub fn contains(&self, m: &Monomial) -> bool {
        self.terms.contains(m)
    }

    /// Product with a monomial, term by term.
    pub fn mul_monomial(&self, m: &Monomial) -> Result<Element> {
        let mut out = Element::zero();
        for t in &self.terms {
            if let Some(p) = t.multiply(m)? {
                out.add_monomial(p);
            }
        }
        Ok(out)
    }

    pub fn mul(&self, other: &Element) -> Result<Element> {
        let mut out = Element::zero();
        for t in &other.terms {
            out.add(&self.mul_monomial(t)?);
        }
        Ok(out)
    }
}

impl std::fmt::Display for Element {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        if self.terms.is_empty() {
            return f.write_str("0");
        }
        let parts: Vec<String> = self.terms.iter().map(ToString::to_string).collect();
        f.write_str(&parts.join(" + "))
    }
}

/// A homogeneous element written in the coordinates of a [`DegreeBasis`].
#[derive(Clone, Debug)]
pub struct ElementVector {
    basis: Arc<DegreeBasis>,
    coeffs: BitVector,
}

impl ElementVector {
    pub fn new(basis: Arc<DegreeBasis>, coeffs: BitVector) -> Result<Self> {
        if coeffs.len() != basis.len() {
            return Err(Error::LengthMismatch {
                expected: basis.len(),
                found: coeffs.len(),
            });
        }
        Ok(Self { basis, coeffs })
    }

    pub fn zero(basis: Arc<DegreeBasis>) -> Self {
        let coeffs = BitVector::zeros(basis.len());
        Self { basis, coeffs }
    }

    pub fn from_element(basis: Arc<DegreeBasis>, e: &Element) -> Result<Self> {
        let mut coeffs = BitVector::zeros(basis.len());
        for t in e.terms() {
            let i = basis.index_of(t).ok_or(Error::DegreeMismatch {
                expected: basis.degree(),
                found: t.degree(),
            })?;
            coeffs.flip(i);
        }
        Ok(Self { basis, coeffs })
    }

    pub fn basis(&self) -> &Arc<DegreeBasis> {
        &self.basis
    }

    pub fn coeffs(&self) -> &BitVector {
        &self.coeffs
    }

    pub fn to_element(&self) -> Element {
        Element::from_terms(self.coeffs.iter_ones().map(|i| self.basis.get(i).clone()))
    }

    /// The exterior degree shared by every term, if there is exactly one.
    pub fn single_component(&self) -> Option<usize> {
        let mut found = None;
        for (a, range) in self.basis.components() {
            if self.coeffs.iter_ones().any(|i| range.contains(&i)) {
                if found.is_some() {
                    return None;
                }
                found = Some(a);
            }
        }
        found
    }
}

pub(crate) fn for_each_q0_term(m: &Monomial, mut f: impl FnMut(Monomial)) {
    let mask = m.xmask();
    for i in 0..m.n() {
        if m.has_x(i) {
            let mut yexp = m.yexp().to_vec();
            yexp[i] += 1;
            f(Monomial::from_raw(mask & !(1 << i), yexp));
        }
    }
}

/// Calls `f` once per monomial of `P^a(m)`; distinct compositions give
/// distinct monomials, so nothing cancels.
pub(crate) fn for_each_pa_term(a: u64, m: &Monomial, mut f: impl FnMut(Monomial)) {
    fn rec(
        slot: usize,
        left: u64,
        e: &[u32],
        suffix: &[u64],
        cur: &mut Vec<u32>,
        mask: u32,
        f: &mut dyn FnMut(Monomial),
    ) {
        if slot == e.len() {
            if left == 0 {
                f(Monomial::from_raw(mask, cur.clone()));
            }
            return;
        }
        let ei = e[slot] as u64;
        // The remaining variables can absorb at most `suffix[slot + 1]`.
        let lo = left.saturating_sub(suffix[slot + 1]);
        for c in lo..=left.min(ei) {
            if binom_mod2(ei, c) {
                cur[slot] = (ei + c) as u32;
                rec(slot + 1, left - c, e, suffix, cur, mask, f);
            }
        }
        cur[slot] = e[slot];
    }
    if a == 0 {
        f(m.clone());
        return;
    }
    let e = m.yexp();
    if a > m.y_total() {
        return;
    }
    let mut suffix = vec![0u64; e.len() + 1];
    for i in (0..e.len()).rev() {
        suffix[i] = suffix[i + 1] + e[i] as u64;
    }
    let mut cur = e.to_vec();
    rec(0, a, e, &suffix, &mut cur, m.xmask(), &mut f);
}

pub fn q0(m: &Monomial) -> Element {
    let mut out = Element::zero();
    for_each_q0_term(m, |t| out.add_monomial(t));
    out
}

/// `P^a(m)`; `P^0` is the identity.
pub fn pa(a: u64, m: &Monomial) -> Element {
    let mut out = Element::zero();
    for_each_pa_term(a, m, |t| out.add_monomial(t));
    out
}

pub fn q0_element(u: &Element) -> Element {
    let mut out = Element::zero();
    for t in u.terms() {
        for_each_q0_term(t, |s| out.add_monomial(s));
    }
    out
}

pub fn pa_element(a: u64, u: &Element) -> Element {
    let mut out = Element::zero();
    for t in u.terms() {
        for_each_pa_term(a, t, |s| out.add_monomial(s));
    }
    out
}

/// One generator application: `Q_0` or `P^a` on a source monomial.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Op {
    Q0,
    P(u64),
}

impl Op {
    pub fn raise(&self) -> usize {
        match self {
            Op::Q0 => 1,
            Op::P(a) => 2 * *a as usize,
        }
    }

    pub fn for_each_term(&self, m: &Monomial, f: impl FnMut(Monomial)) {
        match self {
            Op::Q0 => for_each_q0_term(m, f),
            Op::P(a) => for_each_pa_term(*a, m, f),
        }
    }

    pub fn apply(&self, m: &Monomial) -> Element {
        let mut out = Element::zero();
        self.for_each_term(m, |t| out.add_monomial(t));
        out
    }
}

impl std::fmt::Display for Op {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Op::Q0 => f.write_str("Q0"),
            Op::P(a) => write!(f, "P^{a}"),
        }
    }
}

/// A batch of generator rows: one operation applied to each source monomial.
pub(crate) struct RowSource {
    pub op: Op,
    pub sources: Vec<Monomial>,
}

const CHUNK: usize = 2048;

/// Rows are generated in parallel per chunk, then pushed in order by a
/// single writer so the result does not depend on scheduling.
pub(crate) fn echelonize_rows_from(
    target: &(dyn Fn(&Monomial) -> Option<usize> + Sync),
    ncols: usize,
    batches: &[RowSource],
    builder: &mut EchelonBuilder,
) -> Result<()> {
    for batch in batches {
        for chunk in batch.sources.chunks(CHUNK) {
            if builder.is_full() {
                return Ok(());
            }
            let rows: Vec<BitVector> = chunk
                .par_iter()
                .map(|m| {
                    let mut row = BitVector::zeros(ncols);
                    batch.op.for_each_term(m, |t| {
                        let i = target(&t).expect("generator image lands in the target basis");
                        row.flip(i);
                    });
                    row
                })
                .collect();
            for row in rows {
                builder.push(row)?;
            }
        }
    }
    Ok(())
}

fn all_sources(n: usize, d: usize) -> Vec<RowSource> {
    let mut batches = Vec::new();
    if d >= 1 {
        batches.push(RowSource {
            op: Op::Q0,
            sources: enumerate_degree(n, d - 1).items().to_vec(),
        });
    }
    for a in 1..=d / 2 {
        batches.push(RowSource {
            op: Op::P(a as u64),
            sources: enumerate_degree(n, d - 2 * a).items().to_vec(),
        });
    }
    batches
}

fn count_all_sources(n: usize, d: usize) -> u128 {
    let q = if d >= 1 { degree_count(n, d - 1) } else { 0 };
    q + (1..=d / 2)
        .map(|a| degree_count(n, d - 2 * a))
        .sum::<u128>()
}

/// Span of all generator images in degree `d`, over `enumerate_degree(n, d)`.
pub fn hit_subspace(n: usize, d: usize, limits: &Limits) -> Result<Subspace> {
    limits.check_cols(degree_count(n, d))?;
    limits.check_rows(count_all_sources(n, d))?;
    let basis = enumerate_degree(n, d);
    let mut b = EchelonBuilder::new(basis.len());
    echelonize_rows_from(
        &|t| basis.index_of(t),
        basis.len(),
        &all_sources(n, d),
        &mut b,
    )?;
    Ok(b.finish())
}

fn component_sources(n: usize, d: usize, a: usize) -> Vec<RowSource> {
    let mut batches = Vec::new();
    if a < n && d > a {
        batches.push(RowSource {
            op: Op::Q0,
            sources: enumerate_component(n, a + 1, ((d - a) / 2 - 1) as u32).expect("a + 1 <= n"),
        });
    }
    let b = (d - a) / 2;
    for p in 1..=b {
        batches.push(RowSource {
            op: Op::P(p as u64),
            sources: enumerate_component(n, a, (b - p) as u32).expect("a <= n"),
        });
    }
    batches
}

fn check_component_args(n: usize, d: usize, a: usize) -> Result<()> {
    if a > n || a > d || !(d - a).is_multiple_of(2) {
        return Err(Error::InvalidArgs(format!(
            "no Λ^{a} component in degree {d} for n = {n}"
        )));
    }
    Ok(())
}

/// The hit subspace restricted to Λ^a ⊗ Y^{d-a}, over
/// `enumerate_component(n, a, (d - a) / 2)`.
///
/// `Q_0` lowers exterior degree by one and `P^b` preserves it, so only `Q_0`
/// on Λ^{a+1} and `P^b` on Λ^a contribute.
pub fn hit_component_subspace(n: usize, d: usize, a: usize, limits: &Limits) -> Result<Subspace> {
    check_component_args(n, d, a)?;
    let b = ((d - a) / 2) as u64;
    limits.check_cols(component_count(n, a, b))?;
    let q_rows = if a < n && b >= 1 {
        component_count(n, a + 1, b - 1)
    } else {
        0
    };
    let p_rows: u128 = (1..=b).map(|p| component_count(n, a, b - p)).sum();
    limits.check_rows(q_rows + p_rows)?;
    let target = enumerate_component(n, a, b as u32)?;
    let index: std::collections::HashMap<&Monomial, usize> =
        target.iter().enumerate().map(|(i, m)| (m, i)).collect();
    let mut builder = EchelonBuilder::new(target.len());
    echelonize_rows_from(
        &|t| index.get(t).copied(),
        target.len(),
        &component_sources(n, d, a),
        &mut builder,
    )?;
    Ok(builder.finish())
}

/// Whether `u` lies in the hit subspace of its degree. Elements supported in a
/// single exterior component are tested against that component alone.
pub fn is_hit(u: &ElementVector, limits: &Limits) -> Result<bool> {
    let basis = u.basis();
    if u.coeffs().is_zero() {
        return Ok(true);
    }
    let (n, d) = (basis.n(), basis.degree());
    match u.single_component() {
        Some(a) => {
            let range = basis.component_range(a);
            let sub = hit_component_subspace(n, d, a, limits)?;
            let mut v = BitVector::zeros(range.len());
            for i in u.coeffs().iter_ones() {
                v.set(i - range.start, true);
            }
            sub.member(&v)
        }
        None => hit_subspace(n, d, limits)?.member(u.coeffs()),
    }
}

fn y_sources(n: usize, half: usize) -> Vec<RowSource> {
    (1..=half)
        .map(|a| RowSource {
            op: Op::P(a as u64),
            sources: enumerate_pure_y(n, (half - a) as u32).items().to_vec(),
        })
        .collect()
}

pub(crate) fn y_hit_builder(
    n: usize,
    degree: usize,
    limits: &Limits,
) -> Result<(DegreeBasis, EchelonBuilder)> {
    if !degree.is_multiple_of(2) {
        return Err(Error::InvalidArgs(format!(
            "pure-y monomials live in even degrees, got {degree}"
        )));
    }
    let half = degree / 2;
    limits.check_cols(component_count(n, 0, half as u64))?;
    limits.check_rows(
        (1..=half)
            .map(|a| component_count(n, 0, (half - a) as u64))
            .sum(),
    )?;
    let basis = enumerate_pure_y(n, half as u32);
    let mut b = EchelonBuilder::new(basis.len());
    echelonize_rows_from(
        &|t| basis.index_of(t),
        basis.len(),
        &y_sources(n, half),
        &mut b,
    )?;
    Ok((basis, b))
}

/// `P^+(Y_n)` in topological degree `degree`, over the pure-y basis.
pub fn y_hit_subspace(n: usize, degree: usize, limits: &Limits) -> Result<Subspace> {
    Ok(y_hit_builder(n, degree, limits)?.1.finish())
}

/// dim of the classical hit quotient QP_n^d, via `y_i ↦ x_i`: pure-y
/// monomials of degree `2d` modulo `P^+`.
pub fn classical_hit_quotient_dim(n: usize, d: usize, limits: &Limits) -> Result<usize> {
    let (basis, b) = y_hit_builder(n, 2 * d, limits)?;
    Ok(basis.len() - b.rank())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn m(x: &[usize], y: &[u32]) -> Monomial {
        Monomial::from_parts(x, y).unwrap()
    }

    fn el(ms: &[Monomial]) -> Element {
        Element::from_terms(ms.iter().cloned())
    }

    #[test]
    fn lucas() {
        assert!(binom_mod2(3, 1));
        assert!(!binom_mod2(5, 2));
        assert!(binom_mod2(4, 4));
        assert!(!binom_mod2(2, 3));
    }

    #[test]
    fn bockstein() {
        assert_eq!(q0(&m(&[1], &[0])), el(&[m(&[], &[1])]));
        assert!(q0(&m(&[], &[5])).is_zero());
        assert_eq!(
            q0(&m(&[1, 2], &[0, 0])),
            el(&[m(&[2], &[1, 0]), m(&[1], &[0, 1])])
        );
    }

    #[test]
    fn reduced_powers() {
        assert_eq!(pa(1, &m(&[], &[1])), el(&[m(&[], &[2])]));
        assert_eq!(
            pa(1, &m(&[], &[1, 1])),
            el(&[m(&[], &[2, 1]), m(&[], &[1, 2])])
        );
        assert_eq!(pa(2, &m(&[], &[3])), el(&[m(&[], &[5])]));
        assert!(pa(1, &m(&[1], &[0])).is_zero());
        assert!(pa(3, &m(&[1], &[1, 1])).is_zero());
    }

    #[test]
    fn hit_examples() {
        let l = Limits::default();
        let h = hit_subspace(2, 3, &l).unwrap();
        assert_eq!(h.rank(), 1);
        let basis = Arc::new(enumerate_degree(2, 3));
        let edge = el(&[m(&[2], &[1, 0]), m(&[1], &[0, 1])]);
        let v = ElementVector::from_element(basis.clone(), &edge).unwrap();
        assert!(h.member(v.coeffs()).unwrap());
        assert_eq!(hit_subspace(1, 1, &l).unwrap().rank(), 0);
        let h12 = hit_subspace(1, 2, &l).unwrap();
        assert_eq!(h12.rank(), 1);
        assert_eq!(h12.rows()[0].to_string(), "1");
    }

    #[test]
    fn is_hit_examples() {
        let l = Limits::default();
        let basis = Arc::new(enumerate_degree(2, 3));
        let edge = el(&[m(&[2], &[1, 0]), m(&[1], &[0, 1])]);
        let u = ElementVector::from_element(basis.clone(), &edge).unwrap();
        assert!(is_hit(&u, &l).unwrap());
        let z1 = ElementVector::from_element(basis.clone(), &el(&[m(&[1], &[0, 1])])).unwrap();
        assert!(!is_hit(&z1, &l).unwrap());
        assert!(is_hit(&ElementVector::zero(basis), &l).unwrap());
    }

    #[test]
    fn component_args() {
        let l = Limits::default();
        assert_eq!(hit_component_subspace(2, 3, 1, &l).unwrap().rank(), 1);
        assert!(hit_component_subspace(2, 5, 3, &l).is_err());
        assert!(hit_component_subspace(3, 5, 2, &l).is_err());
    }

    #[test]
    fn y_hit_examples() {
        let l = Limits::default();
        let s = y_hit_subspace(2, 4, &l).unwrap();
        assert_eq!(s.rank(), 2);
        // basis order y[0,2], y[1,1], y[2,0]
        assert_eq!(s.pivots(), &[0, 2]);
        assert_eq!(y_hit_subspace(1, 2, &l).unwrap().rank(), 0);
        assert_eq!(y_hit_subspace(1, 4, &l).unwrap().rank(), 1);
        assert!(y_hit_subspace(1, 3, &l).is_err());
    }

    #[test]
    fn classical_quotients() {
        let l = Limits::default();
        assert_eq!(classical_hit_quotient_dim(1, 2, &l).unwrap(), 0);
        assert_eq!(classical_hit_quotient_dim(1, 3, &l).unwrap(), 1);
        assert_eq!(classical_hit_quotient_dim(1, 4, &l).unwrap(), 0);
    }

    #[test]
    fn limits_fail_fast() {
        let tight = Limits {
            max_cols: 3,
            max_rows: 1 << 20,
        };
        assert!(matches!(
            hit_subspace(2, 3, &tight),
            Err(Error::ResourceLimit { .. })
        ));
        let few_rows = Limits {
            max_cols: 1 << 20,
            max_rows: 2,
        };
        assert!(matches!(
            hit_subspace(3, 5, &few_rows),
            Err(Error::ResourceLimit { .. })
        ));
    }
}
