//! Finite-dimensional quiver representations over any [`Field`].
//!
//! Local models, RH data and finite descriptions are all quiver
//! representations (vector spaces at vertices, matrices on arrows). Morphism
//! spaces, subrepresentations and composition series are computed here once.

use rand::Rng;

use crate::linalg::elim;
use crate::matrix::Matrix;
use crate::scalar::Field;

#[derive(Clone, Debug, PartialEq)]
pub struct Arrow<S> {
    pub from: usize,
    pub to: usize,
    /// `dims[to] x dims[from]`
    pub map: Matrix<S>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct QuiverRep<S> {
    pub dims: Vec<usize>,
    pub arrows: Vec<Arrow<S>>,
}

impl<S: Field> QuiverRep<S> {
    pub fn new(dims: Vec<usize>) -> Self {
        QuiverRep { dims, arrows: Vec::new() }
    }

    pub fn arrow(mut self, from: usize, to: usize, map: Matrix<S>) -> Self {
        debug_assert_eq!(map.shape(), (self.dims[to], self.dims[from]));
        self.arrows.push(Arrow { from, to, map });
        self
    }

    pub fn total_dim(&self) -> usize {
        self.dims.iter().sum()
    }

    fn offsets(&self) -> Vec<usize> {
        let mut off = Vec::with_capacity(self.dims.len());
        let mut acc = 0;
        for &d in &self.dims {
            off.push(acc);
            acc += d;
        }
        off
    }

    /// Same quiver shape (vertex count, arrow endpoints).
    pub fn same_shape(&self, other: &Self) -> bool {
        self.dims.len() == other.dims.len()
            && self.arrows.len() == other.arrows.len()
            && self.arrows.iter().zip(&other.arrows).all(|(a, b)| a.from == b.from && a.to == b.to)
    }

    /// Dual representation: arrows reversed, maps transposed.
    pub fn dual(&self) -> Self {
        QuiverRep {
            dims: self.dims.clone(),
            arrows: self.arrows.iter().map(|a| Arrow { from: a.to, to: a.from, map: a.map.transpose() }).collect(),
        }
    }

    /// Change of basis `A -> P_to^{-1} A P_from`.
    pub fn transform(&self, p: &[Matrix<S>], p_inv: &[Matrix<S>]) -> Self {
        QuiverRep {
            dims: self.dims.clone(),
            arrows: self.arrows.iter().map(|a| Arrow { from: a.from, to: a.to, map: &(&p_inv[a.to] * &a.map) * &p[a.from] }).collect(),
        }
    }

    pub fn direct_sum(&self, other: &Self) -> Self {
        assert!(self.same_shape(other));
        QuiverRep {
            dims: self.dims.iter().zip(&other.dims).map(|(a, b)| a + b).collect(),
            arrows: self
                .arrows
                .iter()
                .zip(&other.arrows)
                .map(|(a, b)| Arrow { from: a.from, to: a.to, map: a.map.direct_sum(&b.map) })
                .collect(),
        }
    }

    /// Arrows assembled into endomorphisms of the total space.
    fn total_maps(&self) -> Vec<Matrix<S>> {
        let off = self.offsets();
        let n = self.total_dim();
        self.arrows
            .iter()
            .map(|a| {
                let mut m = Matrix::zeros(n, n);
                m.set_block(off[a.to], off[a.from], &a.map);
                m
            })
            .collect()
    }

    fn split_total(&self, v: &[S]) -> Vec<Vec<S>> {
        let off = self.offsets();
        self.dims.iter().zip(&off).map(|(&d, &o)| v[o..o + d].to_vec()).collect()
    }
}

pub(crate) fn random_scalar<S: Field>(rng: &mut impl Rng) -> S {
    if S::EXACT {
        S::from_ints(rng.gen_range(-3..=3), rng.gen_range(-3..=3))
    } else {
        S::from_c64(crate::random::complex(rng))
    }
}

// ---------------------------------------------------------------------------
// Subspaces

/// Incrementally built subspace. Numeric fields keep an orthonormal basis;
/// exact fields keep a reduced echelon basis.
#[derive(Clone, Debug)]
pub struct Subspace<S> {
    dim: usize,
    tol: f64,
    vectors: Vec<Vec<S>>,
    pivots: Vec<usize>,
}

fn dot_conj<S: Field>(a: &[S], b: &[S]) -> S {
    a.iter().zip(b).fold(S::zero(), |acc, (x, y)| acc + x.conj() * y.clone())
}

fn norm<S: Field>(v: &[S]) -> f64 {
    v.iter().map(|x| x.magnitude().powi(2)).sum::<f64>().sqrt()
}

impl<S: Field> Subspace<S> {
    pub fn new(dim: usize, tol: f64) -> Self {
        Subspace { dim, tol, vectors: Vec::new(), pivots: Vec::new() }
    }

    pub fn rank(&self) -> usize {
        self.vectors.len()
    }

    pub fn is_full(&self) -> bool {
        self.vectors.len() == self.dim
    }

    /// Adds `v`; returns the new basis vector if the dimension grew.
    pub fn insert(&mut self, v: &[S]) -> Option<Vec<S>> {
        if self.is_full() {
            return None;
        }
        if S::EXACT {
            let mut w = v.to_vec();
            for (b, &p) in self.vectors.iter().zip(&self.pivots) {
                if !w[p].is_zero() {
                    let f = w[p].clone();
                    for (wi, bi) in w.iter_mut().zip(b) {
                        *wi = wi.clone() - f.clone() * bi.clone();
                    }
                }
            }
            let p = w.iter().position(|x| !x.is_zero())?;
            let inv = S::one() / w[p].clone();
            for x in w.iter_mut() {
                *x = x.clone() * inv.clone();
            }
            self.vectors.push(w.clone());
            self.pivots.push(p);
            Some(w)
        } else {
            let n0 = norm(v);
            if n0 == 0.0 {
                return None;
            }
            let mut w = v.to_vec();
            for _ in 0..2 {
                for b in &self.vectors {
                    let c = dot_conj(b, &w);
                    for (wi, bi) in w.iter_mut().zip(b) {
                        *wi = wi.clone() - c.clone() * bi.clone();
                    }
                }
            }
            let nw = norm(&w);
            if nw <= self.tol * n0.max(1.0) {
                return None;
            }
            let inv = S::from_c64(num_complex::Complex::new(1.0 / nw, 0.0));
            for x in w.iter_mut() {
                *x = x.clone() * inv.clone();
            }
            self.vectors.push(w.clone());
            Some(w)
        }
    }

    pub fn basis(&self) -> Matrix<S> {
        Matrix::from_columns(self.dim, &self.vectors)
    }
}

/// Subrepresentation generated by the seeds (pairs of vertex and vector).
/// Returns one basis matrix per vertex.
pub fn spin<S: Field>(rep: &QuiverRep<S>, seeds: &[(usize, Vec<S>)], tol: f64) -> Vec<Matrix<S>> {
    let mut spaces: Vec<Subspace<S>> = rep.dims.iter().map(|&d| Subspace::new(d, tol)).collect();
    let mut queue: Vec<(usize, Vec<S>)> = Vec::new();
    for (v, x) in seeds {
        if let Some(b) = spaces[*v].insert(x) {
            queue.push((*v, b));
        }
    }
    while let Some((v, x)) = queue.pop() {
        for a in rep.arrows.iter().filter(|a| a.from == v) {
            let y = a.map.matvec(&x);
            if let Some(b) = spaces[a.to].insert(&y) {
                queue.push((a.to, b));
            }
        }
    }
    spaces.iter().map(|s| s.basis()).collect()
}

/// Spin of a vector of the total space (every vertex component is a seed).
pub fn spin_total<S: Field>(rep: &QuiverRep<S>, v: &[S], tol: f64) -> Vec<Matrix<S>> {
    let seeds: Vec<(usize, Vec<S>)> = rep.split_total(v).into_iter().enumerate().collect();
    spin(rep, &seeds, tol)
}

fn sub_dim<S>(bases: &[Matrix<S>]) -> usize {
    bases.iter().map(|b| b.cols()).sum()
}

fn is_proper<S: Field>(rep: &QuiverRep<S>, bases: &[Matrix<S>]) -> bool {
    let d = sub_dim(bases);
    d > 0 && d < rep.total_dim()
}

/// Subrepresentation `W` and its quotient in adapted coordinates.
pub struct Split<S> {
    /// Per vertex, `[basis of W | complement]`.
    pub basis: Vec<Matrix<S>>,
    pub basis_inv: Vec<Matrix<S>>,
    pub sub: QuiverRep<S>,
    pub quotient: QuiverRep<S>,
    /// Largest entry of the lower-left blocks (zero for a true subrep).
    pub leak: f64,
}

pub fn split<S: Field>(rep: &QuiverRep<S>, sub: &[Matrix<S>], tol: f64) -> Split<S> {
    let mut basis = Vec::new();
    let mut basis_inv = Vec::new();
    for (v, w) in sub.iter().enumerate() {
        let p = w.hstack(&S::complement(w, tol));
        debug_assert_eq!(p.cols(), rep.dims[v]);
        let pinv = if S::EXACT { elim::inverse(&p).expect("adapted basis") } else { p.adjoint() };
        basis.push(p);
        basis_inv.push(pinv);
    }
    let t = rep.transform(&basis, &basis_inv);
    let k: Vec<usize> = sub.iter().map(|w| w.cols()).collect();
    let mut leak: f64 = 0.0;
    let mut sub_rep = QuiverRep::new(k.clone());
    let mut quo = QuiverRep::new(rep.dims.iter().zip(&k).map(|(d, k)| d - k).collect());
    for a in &t.arrows {
        let (kt, kf) = (k[a.to], k[a.from]);
        let (dt, df) = (rep.dims[a.to], rep.dims[a.from]);
        leak = leak.max(a.map.submatrix(kt, dt, 0, kf).max_abs());
        sub_rep = sub_rep.arrow(a.from, a.to, a.map.submatrix(0, kt, 0, kf));
        quo = quo.arrow(a.from, a.to, a.map.submatrix(kt, dt, kf, df));
    }
    Split { basis, basis_inv, sub: sub_rep, quotient: quo, leak }
}

// ---------------------------------------------------------------------------
// Morphisms

/// Basis of `Hom(x, y)`: each element is one matrix per vertex.
pub fn hom_space<S: Field>(x: &QuiverRep<S>, y: &QuiverRep<S>, tol: f64) -> Vec<Vec<Matrix<S>>> {
    assert!(x.same_shape(y), "hom_space: quivers differ");
    let nv = x.dims.len();
    let mut off = vec![0usize; nv + 1];
    for v in 0..nv {
        off[v + 1] = off[v] + x.dims[v] * y.dims[v];
    }
    let unknowns = off[nv];
    let mut rows: Vec<Vec<S>> = Vec::new();
    for (ax, ay) in x.arrows.iter().zip(&y.arrows) {
        let (u, w) = (ax.from, ax.to);
        // g_w A_x - A_y g_u = 0, entry (p, q)
        for p in 0..y.dims[w] {
            for q in 0..x.dims[u] {
                let mut row = vec![S::zero(); unknowns];
                for r in 0..x.dims[w] {
                    let i = off[w] + p * x.dims[w] + r;
                    row[i] = row[i].clone() + ax.map[(r, q)].clone();
                }
                for r in 0..y.dims[u] {
                    let i = off[u] + r * x.dims[u] + q;
                    row[i] = row[i].clone() - ay.map[(p, r)].clone();
                }
                rows.push(row);
            }
        }
    }
    let system = if rows.is_empty() { Matrix::zeros(0, unknowns) } else { Matrix::from_rows(rows) };
    // Absolute cutoff on the data scale: a relative one would call a system
    // of roundoff-sized entries (nearly equal 1-dimensional loops) regular.
    let scale = x.arrows.iter().chain(&y.arrows).map(|a| a.map.max_abs()).fold(1.0, f64::max);
    let ker = S::kernel_abs(&system, tol * scale);
    (0..ker.cols())
        .map(|j| {
            let col = ker.column(j);
            (0..nv).map(|v| Matrix::from_fn(y.dims[v], x.dims[v], |r, c| col[off[v] + r * x.dims[v] + c].clone())).collect()
        })
        .collect()
}

/// Search the morphism space for an isomorphism; `attempts` random
/// combinations are tried.
pub fn find_isomorphism<S: Field>(
    x: &QuiverRep<S>,
    y: &QuiverRep<S>,
    tol: f64,
    attempts: usize,
    rng: &mut impl Rng,
) -> Option<Vec<Matrix<S>>> {
    if !x.same_shape(y) || x.dims != y.dims {
        return None;
    }
    let basis = hom_space(x, y, tol);
    if basis.is_empty() {
        return if x.total_dim() == 0 { Some(x.dims.iter().map(|_| Matrix::zeros(0, 0)).collect()) } else { None };
    }
    let inv_tol = if S::EXACT { 0.0 } else { 1e-8 };
    for attempt in 0..attempts {
        let coeffs: Vec<S> =
            if attempt == 0 && basis.len() == 1 { vec![S::one()] } else { (0..basis.len()).map(|_| random_scalar(rng)).collect() };
        let g: Vec<Matrix<S>> = (0..x.dims.len())
            .map(|v| {
                let mut acc = Matrix::zeros(x.dims[v], x.dims[v]);
                for (b, c) in basis.iter().zip(&coeffs) {
                    acc = &acc + &b[v].scale(c);
                }
                acc
            })
            .collect();
        if g.iter().all(|m| m.rows() == 0 || S::rank(m, inv_tol) == m.rows()) {
            return Some(g);
        }
    }
    None
}

// ---------------------------------------------------------------------------
// Submodule search

#[derive(Clone, Debug)]
pub enum Simplicity<S> {
    /// Proper nonzero subrepresentation (basis per vertex).
    Proper(Vec<Matrix<S>>),
    Simple,
    Unresolved(String),
}

/// Random element of the path algebra acting on the total space.
fn random_algebra_element<S: Field>(rep: &QuiverRep<S>, rng: &mut impl Rng) -> Matrix<S> {
    let maps = rep.total_maps();
    let n = rep.total_dim();
    let off = rep.offsets();
    let combo = |rng: &mut _| {
        let mut y = Matrix::zeros(n, n);
        for m in &maps {
            y = &y + &m.scale(&random_scalar(rng));
        }
        y
    };
    let y = combo(rng);
    let z = combo(rng);
    let mut x = &y + &(&y * &z);
    for (v, &d) in rep.dims.iter().enumerate() {
        let c: S = random_scalar(rng);
        for i in 0..d {
            x[(off[v] + i, off[v] + i)] = x[(off[v] + i, off[v] + i)].clone() + c.clone();
        }
    }
    x
}

fn annihilator<S: Field>(dual_sub: &[Matrix<S>], tol: f64) -> Vec<Matrix<S>> {
    dual_sub
        .iter()
        .map(|u| {
            let n = u.rows();
            if u.cols() == 0 {
                Matrix::identity(n)
            } else {
                S::kernel(&u.transpose(), tol)
            }
        })
        .collect()
}

fn kernel_vectors<S: Field>(m: &Matrix<S>, tol: f64) -> Vec<Vec<S>> {
    S::kernel(m, tol).columns()
}

/// One round of the Norton test with algebra element `x`. Returns
/// `Some(Simple)` when an eigenvalue with one-dimensional eigenspace
/// certifies simplicity, `Some(Proper)` when a subrepresentation turns up.
fn norton_round<S: Field>(rep: &QuiverRep<S>, x: &Matrix<S>, tol: f64) -> Option<Simplicity<S>> {
    let n = x.rows();
    let dual = rep.dual();
    let ker_tol = if S::EXACT { 0.0 } else { tol.max(1e-9) * 10.0 };
    let mut eig = S::eigenvalues_c64(x);
    eig.sort_by(|a, b| (a.re, a.im).partial_cmp(&(b.re, b.im)).unwrap_or(std::cmp::Ordering::Equal));
    let mut tried: Vec<num_complex::Complex<f64>> = Vec::new();
    for lam in eig {
        if tried.iter().any(|t| (t - lam).norm() < 1e-6 * (1.0 + lam.norm())) {
            continue;
        }
        tried.push(lam);
        let shift = &Matrix::identity(n).scale(&S::from_c64(lam));
        let theta = x - shift;
        let ker = kernel_vectors(&theta, ker_tol);
        for v in &ker {
            let sub = spin_total(rep, v, tol);
            if is_proper(rep, &sub) {
                return Some(Simplicity::Proper(sub));
            }
        }
        if ker.len() == 1 {
            let w = kernel_vectors(&theta.transpose(), ker_tol);
            if w.len() != 1 {
                continue;
            }
            let dsub = spin_total(&dual, &w[0], tol);
            if is_proper(&dual, &dsub) {
                return Some(Simplicity::Proper(annihilator(&dsub, tol)));
            }
            return Some(Simplicity::Simple);
        }
    }
    None
}

/// Kernels of `f(x)` for products `f` of up to three linear factors built
/// from rationalized eigenvalues; exact fields only.
fn factor_kernels<S: Field>(rep: &QuiverRep<S>, x: &Matrix<S>, tol: f64) -> Option<Vec<Matrix<S>>> {
    let n = x.rows();
    let mut eig = S::eigenvalues_c64(x);
    eig.dedup_by(|a, b| (*a - *b).norm() < 1e-8);
    let roots: Vec<S> = eig.iter().map(|z| S::from_c64(*z)).collect();
    let mut subsets: Vec<Vec<usize>> = Vec::new();
    for i in 0..roots.len() {
        for j in i + 1..roots.len() {
            subsets.push(vec![i, j]);
            for k in j + 1..roots.len() {
                subsets.push(vec![i, j, k]);
            }
        }
    }
    subsets.truncate(300);
    for sset in subsets {
        // coefficients of prod (z - r_i), rationalized in floating point first
        let mut c = vec![num_complex::Complex::new(1.0, 0.0)];
        for &i in &sset {
            let r = eig[i];
            let mut next = vec![num_complex::Complex::new(0.0, 0.0); c.len() + 1];
            for (k, ck) in c.iter().enumerate() {
                next[k] += ck;
                next[k + 1] -= ck * r;
            }
            c = next;
        }
        let mut fx = Matrix::<S>::zeros(n, n);
        for ck in &c {
            fx = &(&fx * x) + &Matrix::identity(n).scale(&S::from_c64(*ck));
        }
        for v in kernel_vectors(&fx, 0.0) {
            let sub = spin_total(rep, &v, tol);
            if is_proper(rep, &sub) {
                return Some(sub);
            }
        }
    }
    None
}

/// Looks for a proper nonzero subrepresentation.
pub fn find_subrep<S: Field>(rep: &QuiverRep<S>, tol: f64, rng: &mut impl Rng) -> Simplicity<S> {
    let total = rep.total_dim();
    if total <= 1 {
        return Simplicity::Simple;
    }
    // several nonzero vertices: any single vertex generates a subrep, which
    // is proper unless it reaches everything
    for (v, &d) in rep.dims.iter().enumerate() {
        for i in 0..d {
            let e: Vec<S> = (0..d).map(|k| if k == i { S::one() } else { S::zero() }).collect();
            let sub = spin(rep, &[(v, e)], tol);
            if is_proper(rep, &sub) {
                return Simplicity::Proper(sub);
            }
        }
    }
    for _ in 0..16 {
        let v: Vec<S> = (0..total).map(|_| random_scalar(rng)).collect();
        let sub = spin_total(rep, &v, tol);
        if is_proper(rep, &sub) {
            return Simplicity::Proper(sub);
        }
    }
    for _ in 0..3 {
        let x = random_algebra_element(rep, rng);
        if let Some(res) = norton_round(rep, &x, tol) {
            return res;
        }
        if S::EXACT {
            if let Some(sub) = factor_kernels(rep, &x, tol) {
                return Simplicity::Proper(sub);
            }
        }
    }
    if S::EXACT {
        // floating point fallback: trust a numeric certificate of simplicity
        let numeric = to_c64_rep(rep);
        let mut rng2 = crate::random::rng(rng.gen());
        match find_subrep(&numeric, 1e-9, &mut rng2) {
            Simplicity::Simple => return Simplicity::Simple,
            Simplicity::Proper(sub) => {
                // try to recover the numeric subspace exactly
                let seeds: Vec<(usize, Vec<S>)> = sub
                    .iter()
                    .enumerate()
                    .flat_map(|(v, b)| {
                        let rref = elim::rref(&b.transpose(), 1e-9).matrix;
                        (0..b.cols()).map(|r| (v, rref.row(r).iter().map(|z| S::from_c64(*z)).collect::<Vec<S>>())).collect::<Vec<_>>()
                    })
                    .collect();
                for (v, x) in seeds {
                    let cand = spin(rep, &[(v, x)], tol);
                    if is_proper(rep, &cand) {
                        return Simplicity::Proper(cand);
                    }
                }
            }
            Simplicity::Unresolved(_) => {}
        }
    }
    Simplicity::Unresolved(format!("no certificate for a representation of total dimension {total}"))
}

fn to_c64_rep<S: Field>(rep: &QuiverRep<S>) -> QuiverRep<num_complex::Complex<f64>> {
    QuiverRep {
        dims: rep.dims.clone(),
        arrows: rep.arrows.iter().map(|a| Arrow { from: a.from, to: a.to, map: a.map.convert() }).collect(),
    }
}

// ---------------------------------------------------------------------------
// Composition series

/// Composition series in adapted coordinates: in `basis`, every arrow is
/// block upper triangular with respect to `levels`, and the diagonal blocks
/// are the `factors` (level `i` carries factor `i`).
#[derive(Clone, Debug)]
pub struct Composition<S> {
    pub factors: Vec<QuiverRep<S>>,
    pub basis: Vec<Matrix<S>>,
    /// Per vertex, the level of each basis column.
    pub levels: Vec<Vec<usize>>,
}

pub fn composition_series<S: Field>(rep: &QuiverRep<S>, tol: f64, rng: &mut impl Rng) -> Result<Composition<S>, String> {
    let ident: Vec<Matrix<S>> = rep.dims.iter().map(|&d| Matrix::identity(d)).collect();
    if rep.total_dim() == 0 {
        return Ok(Composition { factors: vec![], basis: ident, levels: rep.dims.iter().map(|_| vec![]).collect() });
    }
    match find_subrep(rep, tol, rng) {
        Simplicity::Simple => {
            Ok(Composition { factors: vec![rep.clone()], basis: ident, levels: rep.dims.iter().map(|&d| vec![0; d]).collect() })
        }
        Simplicity::Unresolved(msg) => Err(msg),
        Simplicity::Proper(sub) => {
            let sp = split(rep, &sub, tol);
            let lower = composition_series(&sp.sub, tol, rng)?;
            let upper = composition_series(&sp.quotient, tol, rng)?;
            let shift = lower.factors.len();
            let mut basis = Vec::new();
            let mut levels = Vec::new();
            for v in 0..rep.dims.len() {
                let inner = lower.basis[v].direct_sum(&upper.basis[v]);
                basis.push(&sp.basis[v] * &inner);
                let mut lv = lower.levels[v].clone();
                lv.extend(upper.levels[v].iter().map(|l| l + shift));
                levels.push(lv);
            }
            let mut factors = lower.factors;
            factors.extend(upper.factors);
            Ok(Composition { factors, basis, levels })
        }
    }
}

/// Same composition factors up to isomorphism, with multiplicity.
/// Isomorphic inputs are accepted without a composition series.
pub fn s_equivalent<S: Field>(x: &QuiverRep<S>, y: &QuiverRep<S>, tol: f64, rng: &mut impl Rng) -> Result<bool, String> {
    if !x.same_shape(y) || x.dims != y.dims {
        return Ok(false);
    }
    if find_isomorphism(x, y, tol, 32, rng).is_some() {
        return Ok(true);
    }
    let fx = composition_series(x, tol, rng)?.factors;
    let fy = composition_series(y, tol, rng)?.factors;
    Ok(same_factors(&fx, &fy, tol, rng))
}

/// Multiset equality of representations up to isomorphism.
pub fn same_factors<S: Field>(fx: &[QuiverRep<S>], fy: &[QuiverRep<S>], tol: f64, rng: &mut impl Rng) -> bool {
    if fx.len() != fy.len() {
        return false;
    }
    let mut used = vec![false; fy.len()];
    for f in fx {
        match (0..fy.len()).find(|&j| !used[j] && find_isomorphism(f, &fy[j], tol, 32, rng).is_some()) {
            Some(j) => used[j] = true,
            None => return false,
        }
    }
    true
}

/// Conjugation by `diag(tau^level)` in the adapted basis, expressed back in
/// the original coordinates. At `tau = 0` only equal-level blocks survive.
pub fn degenerate<S: Field>(rep: &QuiverRep<S>, comp: &Composition<S>, tau: &S) -> QuiverRep<S> {
    let inv: Vec<Matrix<S>> = comp.basis.iter().map(|b| elim::inverse(b).expect("adapted basis")).collect();
    let adapted = rep.transform(&comp.basis, &inv);
    let pow = |k: usize| -> S {
        let mut acc = S::one();
        for _ in 0..k {
            acc = acc * tau.clone();
        }
        acc
    };
    let arrows = adapted
        .arrows
        .iter()
        .map(|a| {
            let lt = &comp.levels[a.to];
            let lf = &comp.levels[a.from];
            let m = Matrix::from_fn(a.map.rows(), a.map.cols(), |r, c| {
                if lf[c] >= lt[r] {
                    a.map[(r, c)].clone() * pow(lf[c] - lt[r])
                } else {
                    // below the block diagonal: zero for a genuine flag
                    a.map[(r, c)].clone()
                }
            });
            Arrow { from: a.from, to: a.to, map: &(&comp.basis[a.to] * &m) * &inv[a.from] }
        })
        .collect();
    QuiverRep { dims: rep.dims.clone(), arrows }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::{ComplexMatrix, ExactMatrix};

    fn unipotent() -> QuiverRep<crate::GaussianRational> {
        QuiverRep::new(vec![2]).arrow(0, 0, ExactMatrix::from_int_rows(&[&[1, 1], &[0, 1]]))
    }

    #[test]
    fn spin_of_fixed_vector() {
        let rep = unipotent();
        let e1 = vec![crate::GaussianRational::from_ints(1, 0), crate::GaussianRational::from_ints(0, 0)];
        let sub = spin(&rep, &[(0, e1)], 0.0);
        assert_eq!(sub[0].cols(), 1);
    }

    #[test]
    fn unipotent_composition() {
        let mut rng = crate::random::rng(1);
        let c = composition_series(&unipotent(), 0.0, &mut rng).unwrap();
        assert_eq!(c.factors.len(), 2);
        for f in &c.factors {
            assert_eq!(f.dims, vec![1]);
            assert_eq!(f.arrows[0].map, ExactMatrix::identity(1));
        }
        let g = degenerate(&unipotent(), &c, &crate::GaussianRational::from_ints(0, 0));
        assert_eq!(g.arrows[0].map, ExactMatrix::identity(2));
        let same = degenerate(&unipotent(), &c, &crate::GaussianRational::from_ints(1, 0));
        assert_eq!(same, unipotent());
    }

    #[test]
    fn irrational_eigenvalues_give_no_rational_subrep() {
        // a 2x2 matrix with irrational eigenvalues generates a simple module
        // over Q(i) but not over C
        let rep = QuiverRep::new(vec![2]).arrow(0, 0, ExactMatrix::from_int_rows(&[&[0, 2], &[1, 0]]));
        let mut rng = crate::random::rng(3);
        if let Simplicity::Proper(_) = find_subrep(&rep, 0.0, &mut rng) {
            panic!("no rational eigenvector exists")
        }
        let num: QuiverRep<num_complex::Complex<f64>> = to_c64_rep(&rep);
        assert!(matches!(find_subrep(&num, 1e-9, &mut rng), Simplicity::Proper(_)));
    }

    #[test]
    fn isomorphism_of_conjugates() {
        let mut rng = crate::random::rng(5);
        let a = crate::random::matrix(&mut rng, 3, 3, 1.0);
        let g = crate::random::conjugator(&mut rng, 3);
        let gi = elim::inverse(&g).unwrap();
        let x = QuiverRep::new(vec![3]).arrow(0, 0, a.clone());
        let y = QuiverRep::new(vec![3]).arrow(0, 0, &(&g * &a) * &gi);
        let w = find_isomorphism(&x, &y, 1e-9, 32, &mut rng).unwrap();
        assert!((&(&w[0] * &a) - &(&y.arrows[0].map * &w[0])).max_abs() < 1e-9);
        let z = QuiverRep::new(vec![3]).arrow(0, 0, ComplexMatrix::identity(3));
        assert!(find_isomorphism(&x, &z, 1e-9, 32, &mut rng).is_none());
    }
}
