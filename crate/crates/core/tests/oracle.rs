//! Cross-checks against a deliberately naive implementation: polynomials as
//! hash sets, the total reduced power expanded by repeated multiplication,
//! and dense Gaussian elimination over `Vec<Vec<u8>>`.

use std::collections::{BTreeMap, HashMap, HashSet};

use mhl_core::f2linalg::BitVector;
use mhl_core::monomial::{enumerate_degree, Monomial};
use mhl_core::steenrod::{
    hit_component_subspace, hit_subspace, pa, q0, y_hit_subspace, ElementVector, Limits,
};
use mhl_core::toplayer::build_context;

type Term = (u32, Vec<u32>);
type Poly = HashSet<Term>;

fn toggle(p: &mut Poly, t: Term) {
    if !p.remove(&t) {
        p.insert(t);
    }
}

fn mul(a: &Poly, b: &Poly) -> Poly {
    let mut out = Poly::new();
    for (xa, ya) in a {
        for (xb, yb) in b {
            if xa & xb != 0 {
                continue;
            }
            let y = ya.iter().zip(yb).map(|(p, q)| p + q).collect();
            toggle(&mut out, (xa | xb, y));
        }
    }
    out
}

fn single(t: Term) -> Poly {
    Poly::from([t])
}

/// Total reduced power: x_i -> x_i and y_i -> y_i + y_i^2, multiplicatively.
fn total_power(m: &Monomial) -> Poly {
    let n = m.n();
    let mut acc = single((m.xmask(), vec![0; n]));
    for (i, &e) in m.yexp().iter().enumerate() {
        let mut lin = vec![0; n];
        lin[i] = 1;
        let mut sq = vec![0; n];
        sq[i] = 2;
        let factor: Poly = Poly::from([(0, lin), (0, sq)]);
        for _ in 0..e {
            acc = mul(&acc, &factor);
        }
    }
    acc
}

fn naive_pa(a: u64, m: &Monomial) -> Poly {
    let target = m.y_total() + a;
    total_power(m)
        .into_iter()
        .filter(|(_, y)| y.iter().map(|&e| e as u64).sum::<u64>() == target)
        .collect()
}

fn naive_q0(m: &Monomial) -> Poly {
    let mut out = Poly::new();
    for i in 0..m.n() {
        if m.xmask() >> i & 1 == 1 {
            let mut y = m.yexp().to_vec();
            y[i] += 1;
            toggle(&mut out, (m.xmask() & !(1 << i), y));
        }
    }
    out
}

fn as_poly(e: &mhl_core::steenrod::Element) -> Poly {
    e.terms().map(|t| (t.xmask(), t.yexp().to_vec())).collect()
}

fn dense_rank(mut rows: Vec<Vec<u8>>) -> usize {
    let cols = rows.first().map_or(0, Vec::len);
    let mut rank = 0;
    for c in 0..cols {
        let Some(p) = (rank..rows.len()).find(|&r| rows[r][c] == 1) else {
            continue;
        };
        rows.swap(rank, p);
        let pivot = rows[rank].clone();
        for (r, row) in rows.iter_mut().enumerate() {
            if r != rank && row[c] == 1 {
                for (x, y) in row.iter_mut().zip(&pivot) {
                    *x ^= y;
                }
            }
        }
        rank += 1;
    }
    rank
}

fn row_of(p: &Poly, index: &HashMap<Term, usize>, len: usize) -> Vec<u8> {
    let mut row = vec![0u8; len];
    for t in p {
        row[index[t]] ^= 1;
    }
    row
}

/// (ambient, hit rank) computed naively over a chosen set of target monomials.
fn naive_hit(n: usize, d: usize, keep: impl Fn(&Monomial) -> bool) -> (usize, usize) {
    naive_span(n, d, true, keep)
}

fn naive_span(
    n: usize,
    d: usize,
    with_q0: bool,
    keep: impl Fn(&Monomial) -> bool,
) -> (usize, usize) {
    let basis: Vec<Monomial> = enumerate_degree(n, d)
        .items()
        .iter()
        .filter(|m| keep(m))
        .cloned()
        .collect();
    let index: HashMap<Term, usize> = basis
        .iter()
        .enumerate()
        .map(|(i, m)| ((m.xmask(), m.yexp().to_vec()), i))
        .collect();
    let project = |p: Poly| -> Poly { p.into_iter().filter(|t| index.contains_key(t)).collect() };
    let mut rows = Vec::new();
    if with_q0 && d >= 1 {
        for m in enumerate_degree(n, d - 1).items() {
            rows.push(row_of(&project(naive_q0(m)), &index, basis.len()));
        }
    }
    for a in 1..=d / 2 {
        for m in enumerate_degree(n, d - 2 * a).items() {
            rows.push(row_of(&project(naive_pa(a as u64, m)), &index, basis.len()));
        }
    }
    (basis.len(), dense_rank(rows))
}

#[test]
fn operations_match_naive_expansion() {
    for n in 1..=3 {
        for d in 0..=9 {
            for m in enumerate_degree(n, d).items() {
                assert_eq!(as_poly(&q0(m)), naive_q0(m), "Q0({m})");
                for a in 0..=m.y_total() + 1 {
                    assert_eq!(as_poly(&pa(a, m)), naive_pa(a, m), "P^{a}({m})");
                }
            }
        }
    }
}

#[test]
fn hit_ranks_match_naive_and_frozen() {
    let frozen = [
        ((2, 3), (4, 1)),
        ((1, 1), (1, 0)),
        ((1, 2), (1, 1)),
        ((3, 5), (21, 17)),
        ((3, 14), (120, 113)),
        ((1, 0), (1, 0)),
        ((2, 5), (6, 6)),
    ];
    let limits = Limits::default();
    for ((n, d), (ambient, rank)) in frozen {
        let fast = hit_subspace(n, d, &limits).unwrap();
        assert_eq!((fast.ncols(), fast.rank()), (ambient, rank), "n={n} d={d}");
        assert_eq!(
            naive_hit(n, d, |_| true),
            (ambient, rank),
            "naive n={n} d={d}"
        );
    }
    let big = hit_subspace(4, 20, &limits).unwrap();
    assert_eq!((big.ncols(), big.rank()), (1771, 1701));
}

#[test]
fn component_ranks_match_naive_and_frozen() {
    let frozen = [
        ((2, 3, 1), (4, 1)),
        ((3, 5, 3), (3, 0)),
        ((3, 5, 1), (18, 17)),
        ((3, 14, 0), (36, 36)),
        ((3, 14, 2), (84, 77)),
    ];
    let limits = Limits::default();
    for ((n, d, a), (ambient, rank)) in frozen {
        let fast = hit_component_subspace(n, d, a, &limits).unwrap();
        assert_eq!(
            (fast.ncols(), fast.rank()),
            (ambient, rank),
            "n={n} d={d} a={a}"
        );
        let naive = naive_hit(n, d, |m| m.exterior_degree() == a);
        assert_eq!(naive, (ambient, rank), "naive n={n} d={d} a={a}");
    }
}

#[test]
fn pure_y_hit_matches_naive() {
    let limits = Limits::default();
    for n in 1..=3 {
        for half in 0..=6 {
            let fast = y_hit_subspace(n, 2 * half, &limits).unwrap();
            let naive = naive_span(n, 2 * half, false, |m| m.exterior_degree() == 0);
            assert_eq!(
                (fast.ncols(), fast.rank()),
                naive,
                "n={n} degree {}",
                2 * half
            );
        }
    }
}

/// θ computed densely over the whole Λ^k component in one elimination:
/// rows are G_n ⊗ Λ^k, then M_0 units, then translates; the θ-coordinate
/// of a monomial is read off from the translate rows used to express it.
fn dense_theta(n: usize, k: usize) -> BTreeMap<String, Vec<usize>> {
    let limits = Limits::default();
    let ctx = build_context(n, k, &limits).unwrap();
    let comp = ctx.component().to_vec();
    let len = comp.len();
    let index: HashMap<&Monomial, usize> = comp.iter().enumerate().map(|(i, m)| (m, i)).collect();
    let ybasis = ctx.y_basis();
    let mut gens: Vec<Vec<u8>> = Vec::new();
    for row in ctx.gn().rows() {
        for mask in comp
            .iter()
            .map(Monomial::xmask)
            .collect::<std::collections::BTreeSet<_>>()
        {
            let mut v = vec![0u8; len];
            for j in row.iter_ones() {
                let m = Monomial::new(n, mask, ybasis.get(j).yexp().to_vec()).unwrap();
                v[index[&m]] = 1;
            }
            gens.push(v);
        }
    }
    for &i in ctx.m0() {
        let mut v = vec![0u8; len];
        v[i] = 1;
        gens.push(v);
    }
    let first_translate = gens.len();
    for &i in ctx.m1() {
        let mut v = vec![0u8; len];
        v[i] = 1;
        gens.push(v);
    }
    // Solve gens^T c = e_i for each i by eliminating the augmented system.
    let g = gens.len();
    let mut out = BTreeMap::new();
    for (i, m) in comp.iter().enumerate() {
        let mut aug: Vec<Vec<u8>> = (0..len)
            .map(|r| {
                let mut row: Vec<u8> = gens.iter().map(|v| v[r]).collect();
                row.push(u8::from(r == i));
                row
            })
            .collect();
        let mut pivots = Vec::new();
        let mut rank = 0;
        for c in 0..g {
            let Some(p) = (rank..len).find(|&r| aug[r][c] == 1) else {
                continue;
            };
            aug.swap(rank, p);
            let pivot = aug[rank].clone();
            for (r, row) in aug.iter_mut().enumerate() {
                if r != rank && row[c] == 1 {
                    for (x, y) in row.iter_mut().zip(&pivot) {
                        *x ^= y;
                    }
                }
            }
            pivots.push(c);
            rank += 1;
        }
        assert!(aug[rank..].iter().all(|r| r[g] == 0), "{m} not spanned");
        // Translates sit last and are independent of the rest, so their
        // coordinates are determined even when the M_0 part is not.
        let coords: Vec<usize> = pivots
            .iter()
            .enumerate()
            .filter(|&(r, &c)| c >= first_translate && aug[r][g] == 1)
            .map(|(_, &c)| c - first_translate)
            .collect();
        out.insert(m.to_string(), coords);
    }
    out
}

#[test]
fn theta_matches_dense_solve() {
    for (n, k) in [(2, 1), (3, 1), (3, 2), (4, 1)] {
        let ctx = build_context(n, k, &Limits::default()).unwrap();
        let dense = dense_theta(n, k);
        for m in ctx.component() {
            let fast: Vec<usize> = ctx.theta_monomial(m).unwrap().into_iter().collect();
            assert_eq!(fast, dense[&m.to_string()], "θ({m}) at ({n},{k})");
        }
    }
}

#[test]
fn theta_spec_examples() {
    let ctx = build_context(2, 1, &Limits::default()).unwrap();
    let m = |s: &str| Monomial::parse(2, s).unwrap();
    assert_eq!(ctx.theta_monomial(&m("x{1} y[0,1]")).unwrap(), Some(0));
    assert_eq!(ctx.theta_monomial(&m("x{2} y[1,0]")).unwrap(), Some(1));
    assert_eq!(ctx.theta_monomial(&m("x{1} y[1,0]")).unwrap(), None);
    assert!(
        ctx.theta_monomial(&m("y[1,0]")).is_err(),
        "degree 2 is not the top degree"
    );
    let wrong = ElementVector::zero(std::sync::Arc::new(enumerate_degree(2, 4)));
    assert!(ctx.theta(&wrong).is_err());
    let image = q0(&m("x{1,2} y[0,0]"));
    let v = ctx.theta_element(&image).unwrap();
    assert_eq!(v, BitVector::from_bit_str("11").unwrap());

    // Exterior degree other than k maps to zero.
    let ctx = build_context(3, 1, &Limits::default()).unwrap();
    let top = Monomial::parse(3, "x{1,2,3} y[1,0,0]").unwrap();
    assert_eq!(ctx.theta_monomial(&top).unwrap(), None);
}
