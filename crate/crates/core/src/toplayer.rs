//! The top layer in degree `d = k + 2 d_1`, `d_1 = (n - 1)(2^k - 1)`.
//!
//! Fixing `(n, k)`, the summand Λ^k ⊗ Y^{2d_1} is cut down by `G_n` (reduced
//! power images plus low-weight monomials) and split as `U_0 ⊕ V`, where `V`
//! is spanned by the translates `σ(z_k)` and `U_0` by monomials with some
//! `α_i < k`. The local projection `θ` reads off the `V`-coordinates; `ε` is
//! coordinate parity on `V`.
//!
//! `G_n ⊗ Λ^k`, the `M_0` monomials and the translates are all compatible
//! with the splitting by exterior mask, so everything is computed one
//! `k`-subset block at a time. Each block holds exactly one translate, hence
//! θ sends every monomial to either zero or a single unit vector.

use std::collections::{BTreeMap, BTreeSet, HashMap, VecDeque};
use std::sync::{Arc, OnceLock};
use std::time::{Duration, Instant};

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::f2linalg::{
    echelonize, even_parity_subspace, solve_preimage, subspace_equal, BitVector, EchelonBuilder,
    Subspace,
};
use crate::monomial::{enumerate_component, enumerate_degree, DegreeBasis, Monomial};
use crate::steenrod::{
    for_each_q0_term, hit_component_subspace, y_hit_builder, Element, ElementVector, Limits, Op,
};

/// A monotone injection `{1..k} -> {1..n}`, stored as its image.
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Debug)]
pub struct MonotoneInjection {
    n: usize,
    image: Vec<usize>,
}

impl MonotoneInjection {
    /// `image` is 1-based and must be strictly increasing.
    pub fn new(n: usize, image: Vec<usize>) -> Result<Self> {
        let k = image.len();
        if k == 0 || k > n {
            return Err(Error::InvalidArgs(format!(
                "need 1 <= k <= n, got k = {k}, n = {n}"
            )));
        }
        if image.windows(2).any(|w| w[0] >= w[1]) || image[0] == 0 || image[k - 1] > n {
            return Err(Error::InvalidArgs(format!(
                "{image:?} is not a strictly increasing subset of 1..={n}"
            )));
        }
        Ok(Self { n, image })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn k(&self) -> usize {
        self.image.len()
    }

    pub fn image(&self) -> &[usize] {
        &self.image
    }

    pub fn mask(&self) -> u32 {
        self.image.iter().fold(0, |m, &i| m | 1 << (i - 1))
    }

    fn from_mask(n: usize, mask: u32) -> Self {
        let image = (0..n)
            .filter(|&i| (mask >> i) & 1 == 1)
            .map(|i| i + 1)
            .collect();
        Self { n, image }
    }
}

impl std::fmt::Display for MonotoneInjection {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let parts: Vec<String> = self.image.iter().map(ToString::to_string).collect();
        write!(f, "{{{}}}", parts.join(","))
    }
}

fn check_nk(n: usize, k: usize) -> Result<()> {
    if k == 0 || k >= n {
        return Err(Error::InvalidArgs(format!(
            "need 1 <= k < n, got n = {n}, k = {k}"
        )));
    }
    if n > 16 {
        return Err(Error::InvalidArgs(format!(
            "(n, k) = ({n}, {k}) is far beyond exhaustive range"
        )));
    }
    Ok(())
}

/// All `k`-subsets of `{1..n}`, lexicographic on sorted tuples.
pub fn mono_injections(n: usize, k: usize) -> Result<Vec<MonotoneInjection>> {
    if k == 0 || k > n {
        return Err(Error::InvalidArgs(format!(
            "need 1 <= k <= n, got n = {n}, k = {k}"
        )));
    }
    fn rec(
        n: usize,
        k: usize,
        start: usize,
        cur: &mut Vec<usize>,
        out: &mut Vec<MonotoneInjection>,
    ) {
        if cur.len() == k {
            out.push(MonotoneInjection {
                n,
                image: cur.clone(),
            });
            return;
        }
        for i in start..=n - (k - cur.len()) + 1 {
            cur.push(i);
            rec(n, k, i + 1, cur, out);
            cur.pop();
        }
    }
    let mut out = Vec::new();
    rec(n, k, 1, &mut Vec::with_capacity(k), &mut out);
    Ok(out)
}

/// `x_{σ(1)}..x_{σ(k)} · prod_j y_{σ(j)}^{2^k - 2^{k-j} - 1} · prod_{i ∉ im σ} y_i^{2^k - 1}`.
pub fn translate_zk(sigma: &MonotoneInjection) -> Result<Monomial> {
    let (n, k) = (sigma.n(), sigma.k());
    check_nk(n, k)?;
    let full = (1u32 << k) - 1;
    let mut yexp = vec![full; n];
    for (j, &i) in sigma.image().iter().enumerate() {
        // j is 0-based here, so 2^{k-j} with 1-based j becomes 2^{k-1-j}.
        yexp[i - 1] = full - (1 << (k - 1 - j));
    }
    Monomial::new(n, sigma.mask(), yexp)
}

pub fn zk(n: usize, k: usize) -> Result<Monomial> {
    check_nk(n, k)?;
    translate_zk(&MonotoneInjection::new(n, (1..=k).collect())?)
}

fn lex_below_top(m: &Monomial, n: usize, k: usize) -> bool {
    let w = m.weight_profile();
    let top = (n - 1) as u32;
    for j in 1..=k {
        let o = w.omega_at(j);
        if o != top {
            return o < top;
        }
    }
    false
}

fn gn_builder(
    n: usize,
    k: usize,
    degree: usize,
    limits: &Limits,
) -> Result<(DegreeBasis, EchelonBuilder)> {
    let (basis, mut b) = y_hit_builder(n, degree, limits)?;
    for (i, m) in basis.items().iter().enumerate() {
        if lex_below_top(m, n, k) {
            b.push(BitVector::unit(basis.len(), i))?;
        }
    }
    Ok((basis, b))
}

/// `G_n` in pure-y degree `degree`: `P^+(Y_n)` plus every monomial whose
/// `(ω_1, .., ω_k)` is lexicographically below `(n-1, .., n-1)`.
pub fn gn_subspace(n: usize, k: usize, degree: usize, limits: &Limits) -> Result<Subspace> {
    Ok(gn_builder(n, k, degree, limits)?.1.finish())
}

pub fn d1_usize(n: usize, k: usize) -> usize {
    (n - 1) * ((1 << k) - 1)
}

/// Everything fixed by a choice of `(n, k)`.
#[derive(Debug)]
pub struct TopLayerContext {
    n: usize,
    k: usize,
    d1: usize,
    d: usize,
    limits: Limits,
    injections: Vec<MonotoneInjection>,
    injection_of_mask: HashMap<u32, usize>,
    ybasis: DegreeBasis,
    gn: Subspace,
    basis: Arc<DegreeBasis>,
    m1: Vec<usize>,
    m0: Vec<usize>,
    u0_rank: usize,
    quotient_dim: usize,
    /// θ on each Λ^k basis monomial (indexed within the component): the
    /// injection whose unit vector it maps to, if any.
    theta_column: Vec<Option<u32>>,
    hit_component: OnceLock<Subspace>,
}

pub fn build_context(n: usize, k: usize, limits: &Limits) -> Result<TopLayerContext> {
    check_nk(n, k)?;
    let d1 = d1_usize(n, k);
    let d = k + 2 * d1;
    limits.check_cols(crate::monomial::degree_count(n, d))?;
    let (ybasis, gn_b) = gn_builder(n, k, 2 * d1, limits)?;
    let gn = gn_b.clone().finish();
    let basis = Arc::new(enumerate_degree(n, d));
    let comp = basis.component_range(k);
    let component = &basis.items()[comp.clone()];
    let ylen = ybasis.len();
    let injections = mono_injections(n, k)?;
    let injection_of_mask: HashMap<u32, usize> = injections
        .iter()
        .enumerate()
        .map(|(i, s)| (s.mask(), i))
        .collect();

    let per_block: Vec<Result<BlockData>> = injections
        .par_iter()
        .enumerate()
        .map(|(s_idx, sigma)| build_block(sigma, s_idx, k, &ybasis, &gn_b))
        .collect();

    let mut m1 = Vec::with_capacity(injections.len());
    let mut m0 = Vec::new();
    let mut u0_rank = 0;
    let mut theta_column = vec![None; component.len()];
    // Component order: masks ascending, then the pure-y order.
    let mask_pos: HashMap<u32, usize> = crate::monomial::masks_of_size(n, k)
        .into_iter()
        .enumerate()
        .map(|(i, m)| (m, i))
        .collect();
    let block_start = |mask: u32| mask_pos[&mask] * ylen;
    for (sigma, block) in injections.iter().zip(per_block) {
        let block = block?;
        let start = block_start(sigma.mask());
        m1.push(start + block.translate);
        m0.extend(block.m0.iter().map(|&i| start + i));
        u0_rank += block.u0_rank;
        for i in block.theta_ones {
            theta_column[start + i] = Some(block.sigma as u32);
        }
    }
    m0.sort_unstable();
    let quotient_dim = injections.len() * (ylen - gn.rank());
    if u0_rank + injections.len() != quotient_dim {
        return Err(Error::DecompositionFailure(format!(
            "rank U_0 + N = {} + {} differs from quotient dimension {quotient_dim}",
            u0_rank,
            injections.len()
        )));
    }
    Ok(TopLayerContext {
        n,
        k,
        d1,
        d,
        limits: *limits,
        injections,
        injection_of_mask,
        ybasis,
        gn,
        basis,
        m1,
        m0,
        u0_rank,
        quotient_dim,
        theta_column,
        hit_component: OnceLock::new(),
    })
}

struct BlockData {
    sigma: usize,
    translate: usize,
    m0: Vec<usize>,
    u0_rank: usize,
    theta_ones: Vec<usize>,
}

fn build_block(
    sigma: &MonotoneInjection,
    s_idx: usize,
    k: usize,
    ybasis: &DegreeBasis,
    gn: &EchelonBuilder,
) -> Result<BlockData> {
    let ylen = ybasis.len();
    let mask = sigma.mask();
    let mut w = gn.clone();
    let mut m0 = Vec::new();
    for (i, y) in ybasis.items().iter().enumerate() {
        let z = Monomial::from_raw(mask, y.yexp().to_vec());
        let alpha = z.weight_profile().alpha;
        if alpha.iter().any(|&a| (a as usize) < k) {
            let unit = BitVector::unit(ylen, i);
            if !gn.contains(&unit)? {
                m0.push(i);
            }
            w.push(unit)?;
        }
    }
    let u0_rank = w.rank() - gn.rank();
    let t = translate_zk(sigma)?;
    let t_idx = ybasis
        .index_of(&Monomial::from_raw(0, t.yexp().to_vec()))
        .expect("translate has degree 2 d_1 in y");
    let t_unit = BitVector::unit(ylen, t_idx);
    if w.contains(&t_unit)? {
        return Err(Error::DecompositionFailure(format!(
            "translate {t} lies in G_n + U_0 for σ = {sigma}"
        )));
    }
    w.push(t_unit.clone())?;
    if !w.is_full() {
        return Err(Error::DecompositionFailure(format!(
            "G_n + U_0 + V has rank {} < {ylen} in block σ = {sigma}",
            w.rank()
        )));
    }
    // The translate was pushed last, so its reduced row is the last row.
    let t_row = w.rank() - 1;
    let mut theta_ones = Vec::new();
    for i in 0..ylen {
        let (in_span, used) = w.reduce_tracking(&BitVector::unit(ylen, i), t_row)?;
        debug_assert!(in_span);
        if used {
            theta_ones.push(i);
        }
    }
    Ok(BlockData {
        sigma: s_idx,
        translate: t_idx,
        m0,
        u0_rank,
        theta_ones,
    })
}

/// A plain record of one verification run.
#[derive(Clone, Debug, Default, Serialize)]
pub struct VerificationReport {
    pub check: String,
    pub n: usize,
    pub k: usize,
    pub passed: bool,
    /// Boolean sub-checks; `passed` is their conjunction.
    pub checks: BTreeMap<String, bool>,
    pub ranks: BTreeMap<String, u64>,
    pub witnesses: BTreeMap<String, Vec<String>>,
    /// Reported observations that do not affect `passed`.
    pub findings: BTreeMap<String, bool>,
    #[serde(skip)]
    pub elapsed: Duration,
}

impl VerificationReport {
    fn new(check: &str, n: usize, k: usize) -> Self {
        Self {
            check: check.to_string(),
            n,
            k,
            ..Default::default()
        }
    }

    fn check(&mut self, name: &str, ok: bool) {
        self.checks.insert(name.to_string(), ok);
    }

    fn rank(&mut self, name: &str, r: usize) {
        self.ranks.insert(name.to_string(), r as u64);
    }

    fn witness(&mut self, name: &str, items: Vec<String>) {
        self.witnesses.insert(name.to_string(), items);
    }

    fn finish(mut self, started: Instant) -> Self {
        self.passed = self.checks.values().all(|&b| b);
        self.elapsed = started.elapsed();
        self
    }
}

/// One hit generator landing in the Λ^k component of degree `d`.
#[derive(Clone, Debug)]
pub struct Generator {
    pub op: Op,
    pub source: Monomial,
}

impl Generator {
    pub fn apply(&self) -> Element {
        self.op.apply(&self.source)
    }
}

impl TopLayerContext {
    pub fn n(&self) -> usize {
        self.n
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn d1(&self) -> usize {
        self.d1
    }

    pub fn degree(&self) -> usize {
        self.d
    }

    /// `N = C(n, k)`.
    pub fn n_translates(&self) -> usize {
        self.injections.len()
    }

    pub fn limits(&self) -> &Limits {
        &self.limits
    }

    pub fn injections(&self) -> &[MonotoneInjection] {
        &self.injections
    }

    pub fn basis(&self) -> &Arc<DegreeBasis> {
        &self.basis
    }

    pub fn y_basis(&self) -> &DegreeBasis {
        &self.ybasis
    }

    pub fn gn(&self) -> &Subspace {
        &self.gn
    }

    /// Λ^k ⊗ Y^{2 d_1} as a slice of the full degree-`d` basis.
    pub fn component(&self) -> &[Monomial] {
        &self.basis.items()[self.basis.component_range(self.k)]
    }

    /// Component indices of the translates, in injection order.
    pub fn m1(&self) -> &[usize] {
        &self.m1
    }

    /// Component indices of monomials with some `α_i < k` and nonzero image mod `G_n`.
    pub fn m0(&self) -> &[usize] {
        &self.m0
    }

    pub fn u0_rank(&self) -> usize {
        self.u0_rank
    }

    /// dim Λ^k ⊗ (Y/G_n)^{2 d_1}.
    pub fn quotient_dim(&self) -> usize {
        self.quotient_dim
    }

    pub fn translate(&self, sigma: usize) -> &Monomial {
        &self.component()[self.m1[sigma]]
    }

    pub fn injection_index(&self, sigma: &MonotoneInjection) -> Option<usize> {
        self.injection_of_mask.get(&sigma.mask()).copied()
    }

    /// θ of one monomial of degree `d`: the injection it maps to, if nonzero.
    pub fn theta_monomial(&self, m: &Monomial) -> Result<Option<usize>> {
        if m.degree() != self.d || m.n() != self.n {
            return Err(Error::DegreeMismatch {
                expected: self.d,
                found: m.degree(),
            });
        }
        if m.exterior_degree() != self.k {
            return Ok(None);
        }
        let i = self
            .basis
            .index_of(m)
            .expect("degree-d monomial is in the basis");
        let start = self.basis.component_range(self.k).start;
        Ok(self.theta_column[i - start].map(|s| s as usize))
    }

    pub fn theta_element(&self, u: &Element) -> Result<BitVector> {
        let mut out = BitVector::zeros(self.n_translates());
        for t in u.terms() {
            if let Some(s) = self.theta_monomial(t)? {
                out.flip(s);
            }
        }
        Ok(out)
    }

    pub fn theta(&self, u: &ElementVector) -> Result<BitVector> {
        let b = u.basis();
        if b.n() != self.n || b.degree() != self.d {
            return Err(Error::DegreeMismatch {
                expected: self.d,
                found: b.degree(),
            });
        }
        let range = self.basis.component_range(self.k);
        let mut out = BitVector::zeros(self.n_translates());
        for i in u.coeffs().iter_ones() {
            if range.contains(&i) {
                if let Some(s) = self.theta_column[i - range.start] {
                    out.flip(s as usize);
                }
            }
        }
        Ok(out)
    }

    pub fn epsilon(&self, v: &BitVector) -> Result<bool> {
        if v.len() != self.n_translates() {
            return Err(Error::LengthMismatch {
                expected: self.n_translates(),
                found: v.len(),
            });
        }
        Ok(v.parity())
    }

    /// θ of a generator image without materializing the element.
    fn theta_of(&self, op: &Op, source: &Monomial) -> BitVector {
        let mut out = BitVector::zeros(self.n_translates());
        op.for_each_term(source, |t| {
            if let Some(s) = self.theta_monomial(&t).expect("generator preserves degree") {
                out.flip(s);
            }
        });
        out
    }

    /// Generators whose images land in Λ^k: `Q_0` on Λ^{k+1} ⊗ Y^{2(d_1-1)}
    /// and `P^a` on Λ^k ⊗ Y^{2(d_1-a)}.
    pub fn hit_generators(&self) -> Result<Vec<Generator>> {
        let (n, k, d1) = (self.n, self.k, self.d1);
        let q_rows = crate::monomial::component_count(n, k + 1, d1 as u64 - 1);
        let p_rows: u128 = (1..=d1 as u64)
            .map(|a| crate::monomial::component_count(n, k, d1 as u64 - a))
            .sum();
        self.limits.check_rows(q_rows + p_rows)?;
        let mut gens = Vec::with_capacity((q_rows + p_rows) as usize);
        for source in enumerate_component(n, k + 1, d1 as u32 - 1)? {
            gens.push(Generator { op: Op::Q0, source });
        }
        for a in 1..=d1 {
            for source in enumerate_component(n, k, (d1 - a) as u32)? {
                gens.push(Generator {
                    op: Op::P(a as u64),
                    source,
                });
            }
        }
        Ok(gens)
    }

    fn generator_images(&self, gens: &[Generator]) -> Vec<BitVector> {
        gens.par_iter()
            .map(|g| self.theta_of(&g.op, &g.source))
            .collect()
    }

    /// θ(A^♯_+(N_n) ∩ N^d) as a subspace of GF(2)^N.
    pub fn theta_hit_image(&self) -> Result<Subspace> {
        let gens = self.hit_generators()?;
        echelonize(self.n_translates(), self.generator_images(&gens))
    }

    /// The hit subspace of the Λ^k component, computed once per context.
    pub fn hit_component(&self) -> Result<&Subspace> {
        if let Some(s) = self.hit_component.get() {
            return Ok(s);
        }
        let s = hit_component_subspace(self.n, self.d, self.k, &self.limits)?;
        Ok(self.hit_component.get_or_init(|| s))
    }

    /// Installs a previously computed (e.g. cached) Λ^k hit subspace.
    pub fn set_hit_component(&self, s: Subspace) -> Result<()> {
        let cols = self.component().len();
        if s.ncols() != cols {
            return Err(Error::LengthMismatch {
                expected: cols,
                found: s.ncols(),
            });
        }
        let _ = self.hit_component.set(s);
        Ok(())
    }

    /// Hit test for an element supported on the Λ^k component.
    pub fn is_hit_in_component(&self, u: &Element) -> Result<bool> {
        let range = self.basis.component_range(self.k);
        let mut v = BitVector::zeros(range.len());
        for t in u.terms() {
            if t.degree() != self.d || t.exterior_degree() != self.k {
                return Err(Error::InvalidArgs(format!(
                    "{t} is not in the Λ^{} component of degree {}",
                    self.k, self.d
                )));
            }
            let i = self.basis.index_of(t).expect("component monomial");
            v.flip(i - range.start);
        }
        self.hit_component()?.member(&v)
    }

    /// `u_S = sum_{σ ∈ S} σ(z_k)`.
    pub fn u_s(&self, set: &[usize]) -> Element {
        Element::from_terms(set.iter().map(|&s| self.translate(s).clone()))
    }
}

/// Whether `u_S` is hit; callers expect `false` for odd `|S|`.
pub fn odd_parity_nonhit_check(ctx: &TopLayerContext, set: &[MonotoneInjection]) -> Result<bool> {
    if set.is_empty() {
        return Err(Error::InvalidArgs("S must be non-empty".into()));
    }
    let idx = set
        .iter()
        .map(|s| {
            ctx.injection_index(s).ok_or_else(|| {
                Error::InvalidArgs(format!("{s} is not a k-subset for this context"))
            })
        })
        .collect::<Result<BTreeSet<_>>>()?;
    ctx.is_hit_in_component(&ctx.u_s(&idx.into_iter().collect::<Vec<_>>()))
}

fn random_odd_subset<R: Rng>(n_items: usize, rng: &mut R) -> Vec<usize> {
    loop {
        let s: Vec<usize> = (0..n_items).filter(|_| rng.gen_bool(0.5)).collect();
        if s.len() % 2 == 1 {
            return s;
        }
    }
}

/// θ(hit) = ker ε, odd-parity sums of translates are not hit, and each basis
/// vector `e_1 + e_i` of ker ε is θ of an explicitly solved hit element.
pub fn verify_parity_theorem<R: Rng>(
    ctx: &TopLayerContext,
    rng: &mut R,
) -> Result<VerificationReport> {
    let started = Instant::now();
    let mut rep = VerificationReport::new("parity_theorem", ctx.n, ctx.k);
    let big_n = ctx.n_translates();
    let gens = ctx.hit_generators()?;
    let images = ctx.generator_images(&gens);
    let image = echelonize(big_n, images.iter().cloned())?;
    let even = even_parity_subspace(big_n);
    rep.check("theorem_holds", subspace_equal(&image, &even)?);
    rep.check("rank_is_n_minus_one", image.rank() + 1 == big_n);
    rep.rank("theta_hit_image", image.rank());
    rep.rank("translates", big_n);
    rep.rank("degree", ctx.d);
    rep.rank("ambient_dim", ctx.basis.len());
    rep.rank("component_dim", ctx.component().len());
    rep.rank("quotient_dim", ctx.quotient_dim);
    rep.rank("hit_generators", gens.len());
    rep.rank("hit_component", ctx.hit_component()?.rank());

    // Odd-parity witnesses: the identity plus three random odd subsets.
    let mut sets = vec![vec![0usize]];
    for _ in 0..3 {
        sets.push(random_odd_subset(big_n, rng));
    }
    let mut odd_ok = true;
    let mut odd_text = Vec::new();
    for s in &sets {
        let u = ctx.u_s(s);
        let theta = ctx.theta_element(&u)?;
        let hit = ctx.is_hit_in_component(&u)?;
        odd_ok &= ctx.epsilon(&theta)? && !hit;
        let names: Vec<String> = s.iter().map(|&i| ctx.injections[i].to_string()).collect();
        odd_text.push(format!("S={} hit={hit}", names.join("")));
    }
    rep.check("odd_witness", odd_ok);
    rep.witness("odd_sums", odd_text);

    // Even realization through explicit preimages.
    let mut even_ok = true;
    let mut even_text = Vec::new();
    for i in 1..big_n {
        let mut target = BitVector::unit(big_n, 0);
        target.flip(i);
        match solve_preimage(&images, &target)? {
            None => {
                even_ok = false;
                even_text.push(format!("e_1+e_{}: no preimage", i + 1));
            }
            Some(coeffs) => {
                let mut h = Element::zero();
                for g in coeffs.iter_ones() {
                    h.add(&gens[g].apply());
                }
                let forward = ctx.theta_element(&h)?;
                let hit = ctx.is_hit_in_component(&h)?;
                even_ok &= forward == target && hit;
                even_text.push(format!(
                    "e_1+e_{}: {} generators, {} terms",
                    i + 1,
                    coeffs.count_ones(),
                    h.len()
                ));
            }
        }
    }
    rep.check("even_realization", even_ok);
    rep.witness("even_realizations", even_text);
    Ok(rep.finish(started))
}

/// `Q_0`-images only: each θ(Q_0 z) is even, they span ker ε, and a search
/// for the explicit edge witness `z`.
pub fn verify_q0_edge_structure(ctx: &TopLayerContext) -> Result<VerificationReport> {
    let started = Instant::now();
    let mut rep = VerificationReport::new("q0_edge_structure", ctx.n, ctx.k);
    let (n, k) = (ctx.n, ctx.k);
    let big_n = ctx.n_translates();
    let prev = enumerate_degree(n, ctx.d - 1);
    ctx.limits.check_rows(prev.len() as u128)?;

    let sigma1 = ctx
        .injection_index(&MonotoneInjection::new(
            n,
            std::iter::once(1).chain(3..=k + 1).collect(),
        )?)
        .expect("valid injection");
    let sigma2 = ctx
        .injection_index(&MonotoneInjection::new(n, (2..=k + 1).collect())?)
        .expect("valid injection");
    let mut edge = BitVector::unit(big_n, sigma1);
    edge.flip(sigma2);

    let results: Vec<(usize, BitVector)> = prev
        .items()
        .par_iter()
        .map(|z| {
            let mut v = BitVector::zeros(big_n);
            for_each_q0_term(z, |t| {
                if let Some(s) = ctx.theta_monomial(&t).expect("degree d") {
                    v.flip(s);
                }
            });
            (z.exterior_degree(), v)
        })
        .collect();

    let mut even_ok = true;
    let mut off_layer_zero = true;
    let mut rows = Vec::new();
    let mut witness = None;
    for (z, (ext, v)) in prev.items().iter().zip(&results) {
        if *ext != k + 1 {
            off_layer_zero &= v.is_zero();
            continue;
        }
        even_ok &= !v.parity();
        rows.push(v.clone());
        if witness.is_none() && *v == edge {
            let w = z.weight_profile();
            if w.omega_at(1) as usize == n - 2 && w.alpha.iter().all(|&a| a as usize == k) {
                witness = Some(z.clone());
            }
        }
    }
    let span = echelonize(big_n, rows.iter().cloned())?;
    rep.check("every_q0_image_even", even_ok);
    rep.check("off_layer_sources_vanish", off_layer_zero);
    rep.check(
        "q0_span_equals_ker_epsilon",
        subspace_equal(&span, &even_parity_subspace(big_n))?,
    );
    rep.rank("q0_span", span.rank());
    rep.rank("q0_sources", rows.len());
    rep.findings
        .insert("edge_witness_found".into(), witness.is_some());
    rep.witness(
        "edge",
        vec![
            format!("sigma1={}", ctx.injections[sigma1]),
            format!("sigma2={}", ctx.injections[sigma2]),
        ],
    );
    if let Some(z) = witness {
        rep.witness("edge_witness", vec![z.to_string()]);
    }
    Ok(rep.finish(started))
}

/// θ(P^a u) = 0 for every `a >= 1` and every monomial `u` of degree `d - 2a`.
pub fn verify_reduced_power_vanishing(ctx: &TopLayerContext) -> Result<VerificationReport> {
    let started = Instant::now();
    let mut rep = VerificationReport::new("reduced_power_vanishing", ctx.n, ctx.k);
    let mut tested = 0usize;
    let mut failures = Vec::new();
    for a in 1..=ctx.d / 2 {
        let sources = enumerate_degree(ctx.n, ctx.d - 2 * a);
        ctx.limits.check_rows((tested + sources.len()) as u128)?;
        let op = Op::P(a as u64);
        let bad: Vec<String> = sources
            .items()
            .par_iter()
            .filter(|u| !ctx.theta_of(&op, u).is_zero())
            .map(|u| format!("{op}({u})"))
            .collect();
        tested += sources.len();
        failures.extend(bad);
    }
    rep.check("all_reduced_power_images_vanish", failures.is_empty());
    rep.rank("sources_tested", tested);
    failures.truncate(10);
    rep.witness("failures", failures);
    Ok(rep.finish(started))
}

fn swap_mask(mask: u32, i: usize) -> u32 {
    let a = (mask >> i) & 1;
    let b = (mask >> (i + 1)) & 1;
    if a == b {
        mask
    } else {
        mask ^ (0b11 << i)
    }
}

/// The explicit pair `{1,3,..,k+1}`, `{2,..,k+1}` generates every edge of
/// J(n, k) under adjacent transpositions, and J(n, k) is connected.
pub fn johnson_orbit_check(n: usize, k: usize) -> Result<VerificationReport> {
    let started = Instant::now();
    if k == 0 || k >= n || n > crate::monomial::MAX_VARS - 1 {
        return Err(Error::InvalidArgs(format!(
            "need 1 <= k < n, got n = {n}, k = {k}"
        )));
    }
    let mut rep = VerificationReport::new("johnson_orbit", n, k);
    let s1 = MonotoneInjection::new(n, std::iter::once(1).chain(3..=k + 1).collect())?.mask();
    let s2 = MonotoneInjection::new(n, (2..=k + 1).collect())?.mask();
    let norm = |a: u32, b: u32| if a < b { (a, b) } else { (b, a) };

    let mut orbit = BTreeSet::new();
    let mut queue = VecDeque::new();
    orbit.insert(norm(s1, s2));
    queue.push_back(norm(s1, s2));
    while let Some((a, b)) = queue.pop_front() {
        for i in 0..n - 1 {
            let e = norm(swap_mask(a, i), swap_mask(b, i));
            if orbit.insert(e) {
                queue.push_back(e);
            }
        }
    }

    let vertices = crate::monomial::masks_of_size(n, k);
    let mut edges = BTreeSet::new();
    for (i, &a) in vertices.iter().enumerate() {
        for &b in &vertices[i + 1..] {
            if (a ^ b).count_ones() == 2 {
                edges.insert(norm(a, b));
            }
        }
    }
    rep.check("orbit_equals_edge_set", orbit == edges);

    let mut seen = BTreeSet::from([vertices[0]]);
    let mut queue = VecDeque::from([vertices[0]]);
    while let Some(v) = queue.pop_front() {
        for &(a, b) in &edges {
            let next = if a == v {
                b
            } else if b == v {
                a
            } else {
                continue;
            };
            if seen.insert(next) {
                queue.push_back(next);
            }
        }
    }
    rep.check("connected", seen.len() == vertices.len());
    rep.rank("vertices", vertices.len());
    rep.rank("edges", edges.len());
    rep.rank("orbit_edges", orbit.len());
    rep.witness(
        "explicit_pair",
        vec![
            MonotoneInjection::from_mask(n, s1).to_string(),
            MonotoneInjection::from_mask(n, s2).to_string(),
        ],
    );
    Ok(rep.finish(started))
}

/// Acts on a vector over the injections by relabelling each k-subset.
pub fn permute_translate_vector(ctx: &TopLayerContext, perm: &[usize], v: &BitVector) -> BitVector {
    let mut out = BitVector::zeros(v.len());
    for s in v.iter_ones() {
        let mask = ctx.injections[s].mask();
        let moved = (0..ctx.n)
            .filter(|&i| (mask >> i) & 1 == 1)
            .fold(0u32, |m, i| m | 1 << perm[i]);
        out.flip(ctx.injection_of_mask[&moved]);
    }
    out
}

/// Relabels variables in every term of a coordinate vector over the degree-d basis.
pub fn permute_element_vector(ctx: &TopLayerContext, perm: &[usize], u: &BitVector) -> BitVector {
    let mut out = BitVector::zeros(u.len());
    for i in u.iter_ones() {
        let m = ctx.basis.get(i).permuted(perm);
        out.flip(
            ctx.basis
                .index_of(&m)
                .expect("permutation preserves degree"),
        );
    }
    out
}

/// θ(τ·u) = τ·θ(u) for the identity and `trials` random `(τ, u)`.
pub fn s_n_equivariance_check<R: Rng>(
    ctx: &TopLayerContext,
    trials: usize,
    rng: &mut R,
) -> Result<VerificationReport> {
    let started = Instant::now();
    let mut rep = VerificationReport::new("s_n_equivariance", ctx.n, ctx.k);
    let len = ctx.basis.len();
    let mut failures = Vec::new();
    let identity: Vec<usize> = (0..ctx.n).collect();
    for t in 0..=trials {
        let mut perm = identity.clone();
        if t > 0 {
            perm.shuffle(rng);
        }
        let bits: Vec<bool> = (0..len).map(|_| rng.gen_bool(0.5)).collect();
        let u = BitVector::from_bools(&bits);
        let uv = ElementVector::new(ctx.basis.clone(), u.clone())?;
        let moved = ElementVector::new(ctx.basis.clone(), permute_element_vector(ctx, &perm, &u))?;
        let lhs = ctx.theta(&moved)?;
        let rhs = permute_translate_vector(ctx, &perm, &ctx.theta(&uv)?);
        if lhs != rhs {
            failures.push(format!("trial {t}: perm {perm:?}"));
        }
    }
    rep.check("theta_equivariant", failures.is_empty());
    rep.rank("trials", trials + 1);
    rep.witness("failures", failures);
    Ok(rep.finish(started))
}

/// Every verifier on one context, randomized parts driven by `seed`.
pub fn verify_all(
    ctx: &TopLayerContext,
    seed: u64,
    equivariance_trials: usize,
) -> Result<Vec<VerificationReport>> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    Ok(vec![
        context_report(ctx),
        verify_parity_theorem(ctx, &mut rng)?,
        verify_q0_edge_structure(ctx)?,
        verify_reduced_power_vanishing(ctx)?,
        johnson_orbit_check(ctx.n, ctx.k)?,
        s_n_equivariance_check(ctx, equivariance_trials, &mut rng)?,
    ])
}

/// The construction-time facts of a context as a report.
pub fn context_report(ctx: &TopLayerContext) -> VerificationReport {
    let started = Instant::now();
    let mut rep = VerificationReport::new("context", ctx.n, ctx.k);
    let big_n = ctx.n_translates();
    rep.check("direct_sum", ctx.u0_rank + big_n == ctx.quotient_dim);
    let ones: Vec<bool> = (0..big_n)
        .map(|s| ctx.theta_monomial(ctx.translate(s)).ok().flatten() == Some(s))
        .collect();
    rep.check("translates_map_to_unit_vectors", ones.iter().all(|&b| b));
    let zk_profile = ctx.translate(0).weight_profile();
    let consistent = (0..big_n).all(|s| {
        let t = ctx.translate(s);
        t.degree() == ctx.d && t.weight_profile().alpha == zk_profile.alpha
    });
    rep.check("translates_share_degree_and_alpha", consistent);
    let mut expected_omega = vec![ctx.k as u32];
    expected_omega.extend(std::iter::repeat_n((ctx.n - 1) as u32, ctx.k));
    rep.check("zk_weight_profile", zk_profile.omega == expected_omega);
    rep.rank("d1", ctx.d1);
    rep.rank("degree", ctx.d);
    rep.rank("translates", big_n);
    rep.rank("y_dim", ctx.ybasis.len());
    rep.rank("gn_rank", ctx.gn.rank());
    rep.rank("quotient_dim", ctx.quotient_dim);
    rep.rank("m0_size", ctx.m0.len());
    rep.rank("u0_rank", ctx.u0_rank);
    rep.witness("zk", vec![ctx.translate(0).to_string()]);
    rep.finish(started)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn m(x: &[usize], y: &[u32]) -> Monomial {
        Monomial::from_parts(x, y).unwrap()
    }

    #[test]
    fn zk_examples() {
        assert_eq!(zk(2, 1).unwrap(), m(&[1], &[0, 1]));
        let z = zk(3, 2).unwrap();
        assert_eq!(z, m(&[1, 2], &[1, 2, 3]));
        assert_eq!(z.degree(), 14);
        assert_eq!(z.weight_profile().omega, vec![2, 2, 2]);
        assert!(zk(3, 3).is_err());
        assert!(zk(3, 0).is_err());
    }

    #[test]
    fn injections() {
        let text: Vec<String> = mono_injections(3, 2)
            .unwrap()
            .iter()
            .map(ToString::to_string)
            .collect();
        assert_eq!(text, ["{1,2}", "{1,3}", "{2,3}"]);
        assert_eq!(mono_injections(4, 4).unwrap().len(), 1);
        assert_eq!(mono_injections(5, 2).unwrap().len(), 10);
        assert!(MonotoneInjection::new(3, vec![2, 1]).is_err());
    }

    #[test]
    fn translates() {
        let id = MonotoneInjection::new(3, vec![1, 2]).unwrap();
        assert_eq!(translate_zk(&id).unwrap(), zk(3, 2).unwrap());
        let s = MonotoneInjection::new(3, vec![1, 3]).unwrap();
        assert_eq!(translate_zk(&s).unwrap(), m(&[1, 3], &[1, 3, 2]));
        for s in mono_injections(3, 2).unwrap() {
            let t = translate_zk(&s).unwrap();
            assert_eq!(t.degree(), 14);
            assert_eq!(t.weight_profile().alpha, vec![2, 2, 2]);
        }
    }

    #[test]
    fn gn_examples() {
        let l = Limits::default();
        assert_eq!(gn_subspace(2, 1, 2, &l).unwrap().rank(), 0);
        let g = gn_subspace(2, 1, 4, &l).unwrap();
        assert_eq!(g.rank(), 2);
        assert_eq!(g.pivots(), &[0, 2]);
        let g = gn_subspace(3, 1, 4, &l).unwrap();
        assert_eq!(g.rank(), 3);
    }

    #[test]
    fn context_two_one() {
        let ctx = build_context(2, 1, &Limits::default()).unwrap();
        assert_eq!(ctx.quotient_dim(), 4);
        assert_eq!(ctx.n_translates(), 2);
        let m1: Vec<String> = ctx
            .m1()
            .iter()
            .map(|&i| ctx.component()[i].to_string())
            .collect();
        assert_eq!(m1, ["x{1} y[0,1]", "x{2} y[1,0]"]);
        let m0: Vec<String> = ctx
            .m0()
            .iter()
            .map(|&i| ctx.component()[i].to_string())
            .collect();
        assert_eq!(m0, ["x{1} y[1,0]", "x{2} y[0,1]"]);
        assert_eq!(ctx.theta_monomial(&m(&[1], &[1, 0])).unwrap(), None);
        assert!(build_context(3, 3, &Limits::default()).is_err());
    }

    #[test]
    fn context_three_one() {
        let ctx = build_context(3, 1, &Limits::default()).unwrap();
        assert_eq!((ctx.d1(), ctx.degree()), (2, 5));
        assert_eq!(ctx.quotient_dim(), 9);
        assert_eq!(ctx.n_translates(), 3);
        assert_eq!(ctx.m0().len(), 6);
    }

    #[test]
    fn epsilon_is_parity() {
        let ctx = build_context(3, 1, &Limits::default()).unwrap();
        let v = |s: &str| BitVector::from_bit_str(s).unwrap();
        assert!(!ctx.epsilon(&v("110")).unwrap());
        assert!(ctx.epsilon(&v("100")).unwrap());
        assert!(ctx.epsilon(&v("111")).unwrap());
        assert!(ctx.epsilon(&v("11")).is_err());
    }

    #[test]
    fn theta_degree_mismatch() {
        let ctx = build_context(2, 1, &Limits::default()).unwrap();
        let other = Arc::new(enumerate_degree(2, 5));
        let u = ElementVector::zero(other);
        assert!(matches!(ctx.theta(&u), Err(Error::DegreeMismatch { .. })));
    }

    #[test]
    fn johnson_small() {
        let r = johnson_orbit_check(2, 1).unwrap();
        assert!(r.passed);
        assert_eq!(r.ranks["edges"], 1);
        assert!(johnson_orbit_check(4, 2).unwrap().passed);
        assert!(johnson_orbit_check(5, 2).unwrap().passed);
        assert!(johnson_orbit_check(3, 3).is_err());
    }
}
