//! Dense linear algebra over GF(2).
//!
//! Vectors are bit-packed into `u64` words: column `j` lives in word `j / 64`
//! at bit `j % 64`. A [`Subspace`] is always stored in reduced row-echelon
//! form, so two subspaces over the same columns are equal exactly when their
//! row lists are equal.
//!
//! The "leading" entry of a row is its lowest-indexed set column. Row
//! operations only ever add a row whose leading column is `p` into a row whose
//! bits below `p` are already settled, which lets every reduction sweep the
//! columns once from left to right.

use std::fmt;
use std::io::{BufRead, Write};

use crate::error::{Error, Result};

const WORD: usize = 64;
const NO_PIVOT: u32 = u32::MAX;

#[derive(Clone, PartialEq, Eq, Hash)]
pub struct BitVector {
    words: Vec<u64>,
    len: usize,
}

impl BitVector {
    pub fn zeros(len: usize) -> Self {
        Self {
            words: vec![0; len.div_ceil(WORD)],
            len,
        }
    }

    pub fn unit(len: usize, i: usize) -> Self {
        let mut v = Self::zeros(len);
        v.set(i, true);
        v
    }

    pub fn from_bools(bits: &[bool]) -> Self {
        let mut v = Self::zeros(bits.len());
        for (i, &b) in bits.iter().enumerate() {
            if b {
                v.set(i, true);
            }
        }
        v
    }

    /// Parses a string of `0`/`1` characters, column 0 first.
    pub fn from_bit_str(s: &str) -> Result<Self> {
        let bits = s
            .chars()
            .map(|c| match c {
                '0' => Ok(false),
                '1' => Ok(true),
                other => Err(Error::Parse(format!("invalid bit character {other:?}"))),
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(Self::from_bools(&bits))
    }

    pub fn len(&self) -> usize {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    #[inline]
    pub fn get(&self, i: usize) -> bool {
        assert!(
            i < self.len,
            "bit index {i} out of range (len={})",
            self.len
        );
        (self.words[i / WORD] >> (i % WORD)) & 1 == 1
    }

    #[inline]
    pub fn set(&mut self, i: usize, value: bool) {
        assert!(
            i < self.len,
            "bit index {i} out of range (len={})",
            self.len
        );
        let mask = 1u64 << (i % WORD);
        if value {
            self.words[i / WORD] |= mask;
        } else {
            self.words[i / WORD] &= !mask;
        }
    }

    #[inline]
    pub fn flip(&mut self, i: usize) {
        assert!(
            i < self.len,
            "bit index {i} out of range (len={})",
            self.len
        );
        self.words[i / WORD] ^= 1u64 << (i % WORD);
    }

    pub fn is_zero(&self) -> bool {
        self.words.iter().all(|&w| w == 0)
    }

    pub fn count_ones(&self) -> usize {
        self.words.iter().map(|w| w.count_ones() as usize).sum()
    }

    /// Sum of the coordinates over GF(2).
    pub fn parity(&self) -> bool {
        self.words
            .iter()
            .fold(0u32, |acc, w| acc ^ (w.count_ones() & 1))
            == 1
    }

    pub fn xor_assign(&mut self, other: &Self) -> Result<()> {
        if self.len != other.len {
            return Err(Error::LengthMismatch {
                expected: self.len,
                found: other.len,
            });
        }
        self.xor_from_word(other, 0);
        Ok(())
    }

    #[inline]
    fn xor_from_word(&mut self, other: &Self, start_word: usize) {
        for (a, b) in self.words[start_word..]
            .iter_mut()
            .zip(&other.words[start_word..])
        {
            *a ^= *b;
        }
    }

    /// Index of the first set bit at or after `start`.
    #[inline]
    pub fn first_one_from(&self, start: usize) -> Option<usize> {
        if start >= self.len {
            return None;
        }
        let mut w = start / WORD;
        let mut word = self.words[w] & (!0u64 << (start % WORD));
        loop {
            if word != 0 {
                let i = w * WORD + word.trailing_zeros() as usize;
                return (i < self.len).then_some(i);
            }
            w += 1;
            if w == self.words.len() {
                return None;
            }
            word = self.words[w];
        }
    }

    pub fn iter_ones(&self) -> impl Iterator<Item = usize> + '_ {
        self.words.iter().enumerate().flat_map(|(w, &word)| {
            let mut rest = word;
            std::iter::from_fn(move || {
                if rest == 0 {
                    return None;
                }
                let b = rest.trailing_zeros() as usize;
                rest &= rest - 1;
                Some(w * WORD + b)
            })
        })
    }

    /// Hex form used by the cache file: column 0 is the most significant bit,
    /// left-padded with zero bits to a multiple of four.
    pub fn to_hex(&self) -> String {
        let digits = self.len.div_ceil(4);
        let pad = digits * 4 - self.len;
        let mut out = String::with_capacity(digits);
        for t in 0..digits {
            let mut nibble = 0u32;
            for p in t * 4..t * 4 + 4 {
                nibble <<= 1;
                if p >= pad && self.get(p - pad) {
                    nibble |= 1;
                }
            }
            out.push(char::from_digit(nibble, 16).unwrap());
        }
        out
    }

    pub fn from_hex(len: usize, s: &str) -> Result<Self> {
        let digits = len.div_ceil(4);
        if s.len() != digits {
            return Err(Error::Parse(format!(
                "hex row has {} digits, expected {digits} for {len} columns",
                s.len()
            )));
        }
        let pad = digits * 4 - len;
        let mut v = Self::zeros(len);
        for (t, c) in s.chars().enumerate() {
            let nibble = c
                .to_digit(16)
                .ok_or_else(|| Error::Parse(format!("invalid hex digit {c:?}")))?;
            for b in 0..4 {
                if (nibble >> (3 - b)) & 1 == 1 {
                    let p = t * 4 + b;
                    if p < pad {
                        return Err(Error::Parse("nonzero padding bit in hex row".into()));
                    }
                    v.set(p - pad, true);
                }
            }
        }
        Ok(v)
    }
}

impl fmt::Display for BitVector {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for i in 0..self.len {
            f.write_str(if self.get(i) { "1" } else { "0" })?;
        }
        Ok(())
    }
}

impl fmt::Debug for BitVector {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "BitVector({self})")
    }
}

/// A subspace of GF(2)^ncols in reduced row-echelon form.
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct Subspace {
    ncols: usize,
    rows: Vec<BitVector>,
    pivots: Vec<usize>,
}

impl Subspace {
    pub fn zero(ncols: usize) -> Self {
        Self {
            ncols,
            rows: Vec::new(),
            pivots: Vec::new(),
        }
    }

    pub fn ncols(&self) -> usize {
        self.ncols
    }

    pub fn rank(&self) -> usize {
        self.rows.len()
    }

    pub fn rows(&self) -> &[BitVector] {
        &self.rows
    }

    pub fn pivots(&self) -> &[usize] {
        &self.pivots
    }

    pub fn member(&self, v: &BitVector) -> Result<bool> {
        check_len(self.ncols, v)?;
        let mut r = v.clone();
        // Pivot columns are touched only by their own row.
        for (row, &p) in self.rows.iter().zip(&self.pivots) {
            if r.get(p) {
                r.xor_from_word(row, p / WORD);
            }
        }
        Ok(r.is_zero())
    }

    /// Sum of two subspaces over the same columns.
    pub fn join(&self, other: &Subspace) -> Result<Subspace> {
        if self.ncols != other.ncols {
            return Err(Error::LengthMismatch {
                expected: self.ncols,
                found: other.ncols,
            });
        }
        let mut b = EchelonBuilder::from_subspace(self);
        for row in &other.rows {
            b.push(row.clone())?;
        }
        Ok(b.finish())
    }

    pub fn write_cache<W: Write>(&self, mut out: W) -> Result<()> {
        writeln!(
            out,
            "F2SUBSPACE v1 cols={} rank={}",
            self.ncols,
            self.rank()
        )?;
        for row in &self.rows {
            writeln!(out, "{}", row.to_hex())?;
        }
        Ok(())
    }

    pub fn to_cache_string(&self) -> String {
        let mut buf = Vec::new();
        self.write_cache(&mut buf)
            .expect("writing to a Vec cannot fail");
        String::from_utf8(buf).expect("cache text is ASCII")
    }

    /// Reads a cache file and re-checks the reduced echelon invariants.
    pub fn read_cache<R: BufRead>(input: R) -> Result<Subspace> {
        let mut lines = input.lines();
        let header = lines
            .next()
            .ok_or_else(|| Error::Parse("empty subspace file".into()))??;
        let (ncols, rank) = parse_header(&header)?;
        let mut rows = Vec::with_capacity(rank);
        for _ in 0..rank {
            let line = lines
                .next()
                .ok_or_else(|| Error::Parse("truncated subspace file".into()))??;
            rows.push(BitVector::from_hex(ncols, line.trim_end())?);
        }
        if let Some(extra) = lines.next() {
            if !extra?.trim().is_empty() {
                return Err(Error::Parse("trailing data after subspace rows".into()));
            }
        }
        let pivots = rows
            .iter()
            .map(|r| {
                r.first_one_from(0)
                    .ok_or_else(|| Error::Parse("zero row in subspace file".into()))
            })
            .collect::<Result<Vec<_>>>()?;
        if pivots.windows(2).any(|w| w[0] >= w[1]) {
            return Err(Error::Parse("pivots not strictly increasing".into()));
        }
        for (i, row) in rows.iter().enumerate() {
            for (j, &p) in pivots.iter().enumerate() {
                if i != j && row.get(p) {
                    return Err(Error::Parse("rows are not in reduced echelon form".into()));
                }
            }
        }
        Ok(Subspace {
            ncols,
            rows,
            pivots,
        })
    }

    pub fn from_cache_str(s: &str) -> Result<Subspace> {
        Self::read_cache(s.as_bytes())
    }
}

fn parse_header(header: &str) -> Result<(usize, usize)> {
    let bad = || Error::Parse(format!("bad subspace header {header:?}"));
    let mut parts = header.split(' ');
    if parts.next() != Some("F2SUBSPACE") || parts.next() != Some("v1") {
        return Err(bad());
    }
    let field = |p: Option<&str>, key: &str| -> Result<usize> {
        p.and_then(|s| s.strip_prefix(key))
            .and_then(|s| s.parse().ok())
            .ok_or_else(bad)
    };
    let ncols = field(parts.next(), "cols=")?;
    let rank = field(parts.next(), "rank=")?;
    if parts.next().is_some() || rank > ncols {
        return Err(bad());
    }
    Ok((ncols, rank))
}

fn check_len(expected: usize, v: &BitVector) -> Result<()> {
    if v.len() != expected {
        return Err(Error::LengthMismatch {
            expected,
            found: v.len(),
        });
    }
    Ok(())
}

/// Incremental row-echelon form. Rows are kept in insertion order with their
/// leading column recorded; `finish` back-substitutes into a [`Subspace`].
#[derive(Clone, Debug)]
pub struct EchelonBuilder {
    ncols: usize,
    rows: Vec<BitVector>,
    lead: Vec<usize>,
    pivot_row: Vec<u32>,
}

impl EchelonBuilder {
    pub fn new(ncols: usize) -> Self {
        Self {
            ncols,
            rows: Vec::new(),
            lead: Vec::new(),
            pivot_row: vec![NO_PIVOT; ncols],
        }
    }

    pub fn from_subspace(s: &Subspace) -> Self {
        let mut b = Self::new(s.ncols);
        for (row, &p) in s.rows.iter().zip(&s.pivots) {
            b.pivot_row[p] = b.rows.len() as u32;
            b.rows.push(row.clone());
            b.lead.push(p);
        }
        b
    }

    pub fn ncols(&self) -> usize {
        self.ncols
    }

    pub fn rank(&self) -> usize {
        self.rows.len()
    }

    pub fn is_full(&self) -> bool {
        self.rows.len() == self.ncols
    }

    /// Reduces `v` until its lowest set column has no pivot. Returns that
    /// column, or `None` when `v` reduced to zero. `used` sees every row index
    /// added into `v`.
    fn reduce_with(&self, v: &mut BitVector, mut used: impl FnMut(usize)) -> Option<usize> {
        let mut start = 0;
        while let Some(c) = v.first_one_from(start) {
            let r = self.pivot_row[c];
            if r == NO_PIVOT {
                return Some(c);
            }
            v.xor_from_word(&self.rows[r as usize], c / WORD);
            used(r as usize);
            start = c + 1;
        }
        None
    }

    pub fn contains(&self, v: &BitVector) -> Result<bool> {
        check_len(self.ncols, v)?;
        let mut r = v.clone();
        Ok(self.reduce_with(&mut r, |_| {}).is_none())
    }

    /// Adds a row; returns whether the rank grew.
    pub fn push(&mut self, mut v: BitVector) -> Result<bool> {
        check_len(self.ncols, &v)?;
        if self.is_full() {
            return Ok(false);
        }
        match self.reduce_with(&mut v, |_| {}) {
            None => Ok(false),
            Some(c) => {
                self.pivot_row[c] = self.rows.len() as u32;
                self.rows.push(v);
                self.lead.push(c);
                Ok(true)
            }
        }
    }

    /// Index (in insertion order) of the row whose leading column is `col`.
    pub fn row_with_pivot(&self, col: usize) -> Option<usize> {
        match self.pivot_row.get(col) {
            Some(&r) if r != NO_PIVOT => Some(r as usize),
            _ => None,
        }
    }

    /// Reduces `v`, reporting whether it is in the span and whether row
    /// `row` took part in the reduction.
    pub fn reduce_tracking(&self, v: &BitVector, row: usize) -> Result<(bool, bool)> {
        check_len(self.ncols, v)?;
        let mut r = v.clone();
        let mut hit = false;
        let rest = self.reduce_with(&mut r, |i| hit ^= i == row);
        Ok((rest.is_none(), hit))
    }

    pub fn finish(self) -> Subspace {
        let mut order: Vec<usize> = (0..self.rows.len()).collect();
        order.sort_unstable_by_key(|&i| self.lead[i]);
        let pivots: Vec<usize> = order.iter().map(|&i| self.lead[i]).collect();
        let mut rows: Vec<BitVector> = Vec::with_capacity(order.len());
        let mut source = self.rows;
        for &i in &order {
            rows.push(std::mem::replace(&mut source[i], BitVector::zeros(0)));
        }
        // Back-substitution, highest pivot first; row i is already clear of
        // every higher pivot when it is used.
        for i in (0..rows.len()).rev() {
            let p = pivots[i];
            let (above, rest) = rows.split_at_mut(i);
            let pivot_row = &rest[0];
            for row in above.iter_mut() {
                if row.get(p) {
                    row.xor_from_word(pivot_row, p / WORD);
                }
            }
        }
        Subspace {
            ncols: self.ncols,
            rows,
            pivots,
        }
    }
}

pub fn echelonize<I>(ncols: usize, rows: I) -> Result<Subspace>
where
    I: IntoIterator<Item = BitVector>,
{
    let mut b = EchelonBuilder::new(ncols);
    for row in rows {
        b.push(row)?;
    }
    Ok(b.finish())
}

/// Echelonizes a non-empty list of rows, taking the column count from them.
pub fn echelonize_rows(rows: &[BitVector]) -> Result<Subspace> {
    let ncols = rows.first().map_or(0, BitVector::len);
    echelonize(ncols, rows.iter().cloned())
}

pub fn subspace_equal(a: &Subspace, b: &Subspace) -> Result<bool> {
    if a.ncols != b.ncols {
        return Err(Error::LengthMismatch {
            expected: a.ncols,
            found: b.ncols,
        });
    }
    Ok(a.rows == b.rows)
}

/// Returns indicator coefficients `c` with `sum_{c_i = 1} generators[i] == target`,
/// or `None` if the target is outside the span.
pub fn solve_preimage(generators: &[BitVector], target: &BitVector) -> Result<Option<BitVector>> {
    let ncols = target.len();
    for g in generators {
        check_len(ncols, g)?;
    }
    let ngens = generators.len();
    let mut basis = EchelonBuilder::new(ncols);
    // Coefficients expressing each basis row in terms of the generators.
    let mut combos: Vec<BitVector> = Vec::new();
    for (i, g) in generators.iter().enumerate() {
        if basis.is_full() {
            break;
        }
        let mut v = g.clone();
        let mut combo = BitVector::unit(ngens, i);
        let rest = basis.reduce_with(&mut v, |r| combo.xor_from_word(&combos[r], 0));
        if let Some(c) = rest {
            basis.pivot_row[c] = basis.rows.len() as u32;
            basis.rows.push(v);
            basis.lead.push(c);
            combos.push(combo);
        }
    }
    let mut v = target.clone();
    let mut combo = BitVector::zeros(ngens);
    if basis
        .reduce_with(&mut v, |r| combo.xor_from_word(&combos[r], 0))
        .is_some()
    {
        return Ok(None);
    }
    let mut check = BitVector::zeros(ncols);
    for i in combo.iter_ones() {
        check.xor_from_word(&generators[i], 0);
    }
    assert_eq!(&check, target, "preimage does not re-sum to the target");
    Ok(Some(combo))
}

/// span{e_0 + e_i : 1 <= i < n}, the even-weight hyperplane of GF(2)^n.
pub fn even_parity_subspace(n: usize) -> Subspace {
    echelonize(
        n,
        (1..n).map(|i| {
            let mut v = BitVector::unit(n, 0);
            v.flip(i);
            v
        }),
    )
    .expect("rows share one length")
}
