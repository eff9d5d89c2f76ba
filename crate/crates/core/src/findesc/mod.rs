//! Finite descriptions of perverse sheaves on a punctured surface.
//!
//! A finite description is a representation `rho` of the surface group on
//! `E` together with, for each puncture `a`, a space `F_a` with an
//! automorphism `tauF_a` and maps `C_a: E -> F_a`, `V_a: F_a -> E` with
//! `V_a C_a = rho(c_a) - 1` and `C_a V_a = tauF_a - 1`.
//!
//! Everything is generic over [`Field`]: Gaussian rationals give certified
//! Jordan-Hölder computations, floating complex numbers take data from the
//! analytic side.

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::elim;
use crate::matrix::Matrix;
use crate::quiver::{self, Composition, QuiverRep, Subspace};
use crate::report::Report;
use crate::scalar::Field;

/// Upper bound on `n + sum n_a` for Jordan-Hölder computations.
pub const JH_MAX_DIM: usize = 12;

/// Attempts at a random invertible element of a morphism space.
const ISO_ATTEMPTS: usize = 32;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "lowercase")]
pub enum Mode {
    #[default]
    Numeric,
    Exact,
}

/// Genus and puncture count. Generators `a_1, b_1, ..., a_g, b_g, c_1, ...,
/// c_k` with the single relation `[a_1, b_1] ... [a_g, b_g] c_1 ... c_k = 1`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct SurfaceData {
    pub genus: usize,
    pub punctures: usize,
}

impl SurfaceData {
    pub fn new(genus: usize, punctures: usize) -> Result<Self> {
        if punctures == 0 {
            return Err(Error::Invalid("at least one puncture is required".into()));
        }
        Ok(SurfaceData { genus, punctures })
    }

    pub fn generator_count(&self) -> usize {
        2 * self.genus + self.punctures
    }

    pub fn labels(&self) -> Vec<String> {
        let mut out = Vec::with_capacity(self.generator_count());
        for i in 1..=self.genus {
            out.push(format!("a{i}"));
            out.push(format!("b{i}"));
        }
        out.extend((1..=self.punctures).map(|a| format!("c{a}")));
        out
    }

    /// Index of `c_a` (0-based puncture) among the generators.
    pub fn boundary(&self, a: usize) -> usize {
        2 * self.genus + a
    }

    /// Left-hand side of the relation evaluated on `rho`.
    pub fn relation<S: Field>(&self, rho: &[Matrix<S>]) -> Result<Matrix<S>> {
        if rho.len() != self.generator_count() {
            return Err(Error::Shape(format!("{} generator matrices, expected {}", rho.len(), self.generator_count())));
        }
        let n = rho[0].rows();
        let mut acc = Matrix::identity(n);
        for i in 0..self.genus {
            let (a, b) = (&rho[2 * i], &rho[2 * i + 1]);
            let ai = elim::inverse(a)?;
            let bi = elim::inverse(b)?;
            acc = &(&(&(&acc * a) * b) * &ai) * &bi;
        }
        for a in 0..self.punctures {
            acc = &acc * &rho[self.boundary(a)];
        }
        Ok(acc)
    }
}

/// Data at one puncture.
#[derive(Clone, Debug, PartialEq)]
pub struct Puncture<S> {
    pub tau_f: Matrix<S>,
    /// `n_a x n`
    pub c: Matrix<S>,
    /// `n x n_a`
    pub v: Matrix<S>,
}

impl<S: Field> Puncture<S> {
    pub fn dim(&self) -> usize {
        self.tau_f.rows()
    }

    /// `F_a = 0`.
    pub fn empty(n: usize) -> Self {
        Puncture { tau_f: Matrix::zeros(0, 0), c: Matrix::zeros(0, n), v: Matrix::zeros(n, 0) }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct FiniteDescription<S> {
    pub surface: SurfaceData,
    /// One matrix per generator, in [`SurfaceData::labels`] order.
    pub rho: Vec<Matrix<S>>,
    pub local: Vec<Puncture<S>>,
}

/// Largest entry of a defect; nonzero exact defects never round to zero.
fn defect<S: Field>(m: &Matrix<S>) -> f64 {
    let x = m.max_abs();
    if S::EXACT && x == 0.0 && m.data().iter().any(|z| !z.is_zero()) {
        f64::MIN_POSITIVE
    } else {
        x
    }
}

impl<S: Field> FiniteDescription<S> {
    /// Checks shapes only.
    pub fn new(surface: SurfaceData, rho: Vec<Matrix<S>>, local: Vec<Puncture<S>>) -> Result<Self> {
        let fd = FiniteDescription { surface, rho, local };
        fd.check_shapes()?;
        Ok(fd)
    }

    pub fn n(&self) -> usize {
        self.rho.first().map_or(0, |m| m.rows())
    }

    pub fn local_dims(&self) -> Vec<usize> {
        self.local.iter().map(|p| p.dim()).collect()
    }

    pub fn total_dim(&self) -> usize {
        self.n() + self.local_dims().iter().sum::<usize>()
    }

    pub fn rho_of(&self, label: &str) -> Option<&Matrix<S>> {
        self.surface.labels().iter().position(|l| l == label).map(|i| &self.rho[i])
    }

    /// `rho(c_a)`
    pub fn tau(&self, a: usize) -> &Matrix<S> {
        &self.rho[self.surface.boundary(a)]
    }

    pub fn check_shapes(&self) -> Result<()> {
        let labels = self.surface.labels();
        if self.rho.len() != labels.len() {
            return Err(Error::Shape(format!("{} generator matrices, expected {}", self.rho.len(), labels.len())));
        }
        if self.local.len() != self.surface.punctures {
            return Err(Error::Shape(format!("{} punctures given, expected {}", self.local.len(), self.surface.punctures)));
        }
        let n = self.n();
        for (m, l) in self.rho.iter().zip(&labels) {
            m.ensure_shape(n, n, &format!("rho({l})"))?;
        }
        for (a, p) in self.local.iter().enumerate() {
            let na = p.tau_f.rows();
            p.tau_f.ensure_shape(na, na, &format!("tauF{}", a + 1))?;
            p.c.ensure_shape(na, n, &format!("C{}", a + 1))?;
            p.v.ensure_shape(n, na, &format!("V{}", a + 1))?;
        }
        Ok(())
    }

    /// Relation, gluing identities and equivariance; residuals are largest
    /// entries. Exact fields require exact vanishing.
    pub fn validate(&self, tol: f64) -> Result<Report> {
        self.check_shapes()?;
        let mut rep = Report::new(if S::EXACT { 0.0 } else { tol });
        let n = self.n();
        let inv_tol = if S::EXACT { 0.0 } else { tol };
        for (m, l) in self.rho.iter().zip(self.surface.labels()) {
            if S::rank(m, inv_tol) < n {
                rep.ok = false;
                rep.warnings.push(format!("rho({l}) is singular"));
            }
        }
        for (a, p) in self.local.iter().enumerate() {
            if S::rank(&p.tau_f, inv_tol) < p.dim() {
                rep.ok = false;
                rep.warnings.push(format!("tauF{} is singular", a + 1));
            }
        }
        if !rep.ok {
            return Ok(rep);
        }
        let rel = self.surface.relation(&self.rho)?;
        let scale = self.rho.iter().map(|m| m.max_abs()).fold(1.0, f64::max);
        rep.push("relation", defect(&(&rel - &Matrix::identity(n))), scale);
        for (i, p) in self.local.iter().enumerate() {
            let a = i + 1;
            let t = self.tau(i);
            let ie = Matrix::identity(n);
            let if_ = Matrix::identity(p.dim());
            let sc = t.max_abs().max(p.tau_f.max_abs()).max(p.c.max_abs() * p.v.max_abs());
            rep.push(format!("V{a}C{a}-(rho(c{a})-I)"), defect(&(&(&p.v * &p.c) - &(t - &ie))), sc);
            rep.push(format!("C{a}V{a}-(tauF{a}-I)"), defect(&(&(&p.c * &p.v) - &(&p.tau_f - &if_))), sc);
            let sc2 = p.c.max_abs().max(p.v.max_abs()) * t.max_abs().max(p.tau_f.max_abs());
            rep.push(format!("C{a}rho(c{a})-tauF{a}C{a}"), defect(&(&(&p.c * t) - &(&p.tau_f * &p.c))), sc2);
            rep.push(format!("V{a}tauF{a}-rho(c{a})V{a}"), defect(&(&(&p.v * &p.tau_f) - &(t * &p.v))), sc2);
        }
        Ok(rep)
    }

    /// Vertices `E, F_1, ..., F_k`; arrows: the generators on `E`, then for
    /// each puncture `tauF_a`, `C_a`, `V_a`.
    pub fn as_quiver(&self) -> QuiverRep<S> {
        let mut dims = vec![self.n()];
        dims.extend(self.local_dims());
        let mut q = QuiverRep::new(dims);
        for m in &self.rho {
            q = q.arrow(0, 0, m.clone());
        }
        for (i, p) in self.local.iter().enumerate() {
            q = q.arrow(i + 1, i + 1, p.tau_f.clone()).arrow(0, i + 1, p.c.clone()).arrow(i + 1, 0, p.v.clone());
        }
        q
    }

    /// Inverse of [`FiniteDescription::as_quiver`].
    pub fn from_quiver(surface: SurfaceData, q: &QuiverRep<S>) -> Result<Self> {
        let g = surface.generator_count();
        if q.dims.len() != surface.punctures + 1 || q.arrows.len() != g + 3 * surface.punctures {
            return Err(Error::Shape("quiver does not match the surface".into()));
        }
        let rho = q.arrows[..g].iter().map(|a| a.map.clone()).collect();
        let local =
            q.arrows[g..].chunks(3).map(|c| Puncture { tau_f: c[0].map.clone(), c: c[1].map.clone(), v: c[2].map.clone() }).collect();
        FiniteDescription::new(surface, rho, local)
    }

    pub fn direct_sum(&self, other: &Self) -> Result<Self> {
        if self.surface != other.surface {
            return Err(Error::Shape("finite descriptions over different surfaces".into()));
        }
        FiniteDescription::from_quiver(self.surface, &self.as_quiver().direct_sum(&other.as_quiver()))
    }

    /// Each `F_a = E` with `C_a = rho(c_a) - 1` and `V_a = 1`.
    pub fn with_full_local(surface: SurfaceData, rho: Vec<Matrix<S>>) -> Result<Self> {
        if rho.len() != surface.generator_count() {
            return Err(Error::Shape(format!("{} generator matrices, expected {}", rho.len(), surface.generator_count())));
        }
        let n = rho[0].rows();
        let local = (0..surface.punctures)
            .map(|a| {
                let t = rho[surface.boundary(a)].clone();
                Puncture { c: &t - &Matrix::identity(n), v: Matrix::identity(n), tau_f: t }
            })
            .collect();
        FiniteDescription::new(surface, rho, local)
    }

    /// Scalar representation `(1)` of every generator with all `F_a = 0`.
    pub fn trivial(surface: SurfaceData, n: usize) -> Self {
        FiniteDescription {
            surface,
            rho: vec![Matrix::identity(n); surface.generator_count()],
            local: (0..surface.punctures).map(|_| Puncture::empty(n)).collect(),
        }
    }

    pub fn convert<U: Field>(&self) -> FiniteDescription<U> {
        FiniteDescription {
            surface: self.surface,
            rho: self.rho.iter().map(|m| m.convert()).collect(),
            local: self.local.iter().map(|p| Puncture { tau_f: p.tau_f.convert(), c: p.c.convert(), v: p.v.convert() }).collect(),
        }
    }
}

/// `(g, g_a)` acting by `rho -> g^-1 rho g`, `tauF_a -> g_a^-1 tauF_a g_a`,
/// `C_a -> g_a^-1 C_a g`, `V_a -> g^-1 V_a g_a`.
#[derive(Clone, Debug, PartialEq)]
pub struct GroupElement<S> {
    pub g: Matrix<S>,
    pub g_a: Vec<Matrix<S>>,
}

impl<S: Field> GroupElement<S> {
    pub fn identity(fd: &FiniteDescription<S>) -> Self {
        GroupElement { g: Matrix::identity(fd.n()), g_a: fd.local_dims().into_iter().map(Matrix::identity).collect() }
    }

    fn parts(&self) -> Vec<Matrix<S>> {
        let mut v = vec![self.g.clone()];
        v.extend(self.g_a.iter().cloned());
        v
    }
}

pub fn act<S: Field>(fd: &FiniteDescription<S>, h: &GroupElement<S>) -> Result<FiniteDescription<S>> {
    fd.check_shapes()?;
    if h.g_a.len() != fd.local.len() {
        return Err(Error::Shape(format!("{} puncture factors, expected {}", h.g_a.len(), fd.local.len())));
    }
    h.g.ensure_shape(fd.n(), fd.n(), "g")?;
    for (a, (m, d)) in h.g_a.iter().zip(fd.local_dims()).enumerate() {
        m.ensure_shape(d, d, &format!("g{}", a + 1))?;
    }
    let p = h.parts();
    let p_inv = p.iter().map(elim::inverse).collect::<Result<Vec<_>>>()?;
    FiniteDescription::from_quiver(fd.surface, &fd.as_quiver().transform(&p, &p_inv))
}

/// A subobject: subspace of `E` and of each `F_a` (bases as columns).
#[derive(Clone, Debug, PartialEq)]
pub struct SubObject<S> {
    pub e: Matrix<S>,
    pub f: Vec<Matrix<S>>,
}

impl<S: Field> SubObject<S> {
    pub fn dims(&self) -> Vec<usize> {
        std::iter::once(self.e.cols()).chain(self.f.iter().map(|m| m.cols())).collect()
    }

    pub fn total_dim(&self) -> usize {
        self.dims().iter().sum()
    }

    fn bases(&self) -> Vec<Matrix<S>> {
        std::iter::once(self.e.clone()).chain(self.f.iter().cloned()).collect()
    }

    fn from_bases(mut b: Vec<Matrix<S>>) -> Self {
        let e = b.remove(0);
        SubObject { e, f: b }
    }
}

/// Smallest subobject containing the seeds, each a vector of
/// `E + F_1 + ... + F_k` (concatenated).
pub fn spin<S: Field>(fd: &FiniteDescription<S>, seeds: &[Vec<S>], tol: f64) -> Result<SubObject<S>> {
    fd.check_shapes()?;
    let q = fd.as_quiver();
    let total = fd.total_dim();
    let mut per_vertex = Vec::new();
    for s in seeds {
        if s.len() != total {
            return Err(Error::Shape(format!("seed of length {}, expected {total}", s.len())));
        }
        let mut off = 0;
        for (v, &d) in q.dims.iter().enumerate() {
            per_vertex.push((v, s[off..off + d].to_vec()));
            off += d;
        }
    }
    Ok(SubObject::from_bases(quiver::spin(&q, &per_vertex, tol)))
}

/// Composition series with its factors grouped into isomorphism classes.
#[derive(Clone, Debug)]
pub struct JordanHolder<S> {
    pub factors: Vec<FiniteDescription<S>>,
    /// `(representative factor index, multiplicity)`
    pub classes: Vec<(usize, usize)>,
    pub filtration: Composition<S>,
}

impl<S: Field> JordanHolder<S> {
    /// The semisimplification: direct sum of the factors.
    pub fn graded(&self, surface: SurfaceData) -> Result<FiniteDescription<S>> {
        let mut acc = FiniteDescription::trivial(surface, 0);
        for f in &self.factors {
            acc = acc.direct_sum(f)?;
        }
        Ok(acc)
    }
}

pub fn jordan_holder<S: Field>(fd: &FiniteDescription<S>, tol: f64, rng: &mut impl Rng) -> Result<JordanHolder<S>> {
    fd.check_shapes()?;
    if fd.total_dim() > JH_MAX_DIM {
        return Err(Error::Invalid(format!("total dimension {} exceeds {JH_MAX_DIM}", fd.total_dim())));
    }
    let comp = quiver::composition_series(&fd.as_quiver(), tol, rng).map_err(Error::Unresolved)?;
    let factors = comp.factors.iter().map(|f| FiniteDescription::from_quiver(fd.surface, f)).collect::<Result<Vec<_>>>()?;
    let mut classes: Vec<(usize, usize)> = Vec::new();
    for (i, f) in factors.iter().enumerate() {
        let q = f.as_quiver();
        match classes.iter_mut().find(|(r, _)| quiver::find_isomorphism(&factors[*r].as_quiver(), &q, tol, ISO_ATTEMPTS, rng).is_some()) {
            Some(c) => c.1 += 1,
            None => classes.push((i, 1)),
        }
    }
    Ok(JordanHolder { factors, classes, filtration: comp })
}

/// Witness `h` with `act(a, h) = b`, if one is found.
pub fn fd_isomorphic<S: Field>(
    a: &FiniteDescription<S>,
    b: &FiniteDescription<S>,
    tol: f64,
    rng: &mut impl Rng,
) -> Result<Option<GroupElement<S>>> {
    a.check_shapes()?;
    b.check_shapes()?;
    if a.surface != b.surface || a.n() != b.n() || a.local_dims() != b.local_dims() {
        return Err(Error::Shape("finite descriptions of different numerical data".into()));
    }
    let Some(phi) = quiver::find_isomorphism(&a.as_quiver(), &b.as_quiver(), tol, ISO_ATTEMPTS, rng) else {
        return Ok(None);
    };
    let mut inv = phi.iter().map(elim::inverse).collect::<Result<Vec<_>>>()?;
    let g = inv.remove(0);
    Ok(Some(GroupElement { g, g_a: inv }))
}

/// Same Jordan-Hölder factors up to isomorphism, with multiplicity.
pub fn s_equivalent<S: Field>(a: &FiniteDescription<S>, b: &FiniteDescription<S>, tol: f64, rng: &mut impl Rng) -> Result<bool> {
    a.check_shapes()?;
    b.check_shapes()?;
    if a.surface != b.surface {
        return Ok(false);
    }
    for fd in [a, b] {
        if fd.total_dim() > JH_MAX_DIM {
            return Err(Error::Invalid(format!("total dimension {} exceeds {JH_MAX_DIM}", fd.total_dim())));
        }
    }
    quiver::s_equivalent(&a.as_quiver(), &b.as_quiver(), tol, rng).map_err(Error::Unresolved)
}

/// Filtration by an increasing chain of subobjects (the whole object is
/// appended when missing). Fails if a step is not a subobject.
pub fn filtration_from_chain<S: Field>(fd: &FiniteDescription<S>, chain: &[SubObject<S>], tol: f64) -> Result<Composition<S>> {
    let q = fd.as_quiver();
    let nv = q.dims.len();
    let mut spaces: Vec<Subspace<S>> = q.dims.iter().map(|&d| Subspace::new(d, tol)).collect();
    let mut cols: Vec<Vec<Vec<S>>> = vec![Vec::new(); nv];
    let mut levels: Vec<Vec<usize>> = vec![Vec::new(); nv];
    let full = SubObject::from_bases(q.dims.iter().map(|&d| Matrix::identity(d)).collect());
    let mut steps: Vec<&SubObject<S>> = chain.iter().collect();
    if steps.last().is_none_or(|s| s.total_dim() < fd.total_dim()) {
        steps.push(&full);
    }
    let mut level = 0;
    for step in steps {
        let bases = step.bases();
        if bases.len() != nv {
            return Err(Error::Shape("subobject does not match the punctures".into()));
        }
        let mut grew = false;
        for v in 0..nv {
            if bases[v].rows() != q.dims[v] {
                return Err(Error::Shape(format!("subobject basis at vertex {v} has wrong size")));
            }
            for c in bases[v].columns() {
                if spaces[v].insert(&c).is_some() {
                    cols[v].push(c);
                    levels[v].push(level);
                    grew = true;
                }
            }
        }
        if grew {
            level += 1;
        }
    }
    let basis: Vec<Matrix<S>> = (0..nv).map(|v| Matrix::from_columns(q.dims[v], &cols[v])).collect();
    let inv = basis.iter().map(elim::inverse).collect::<Result<Vec<_>>>()?;
    let adapted = q.transform(&basis, &inv);
    let scale = q.arrows.iter().map(|a| a.map.max_abs()).fold(1.0, f64::max);
    let thr = if S::EXACT { 0.0 } else { tol * scale };
    let mut factors = Vec::with_capacity(level);
    for l in 0..level {
        let idx: Vec<Vec<usize>> = levels.iter().map(|lv| (0..lv.len()).filter(|&i| lv[i] == l).collect()).collect();
        let mut f = QuiverRep::new(idx.iter().map(|i| i.len()).collect());
        for a in &adapted.arrows {
            let m = Matrix::from_fn(idx[a.to].len(), idx[a.from].len(), |r, c| a.map[(idx[a.to][r], idx[a.from][c])].clone());
            f = f.arrow(a.from, a.to, m);
        }
        factors.push(f);
    }
    for a in &adapted.arrows {
        for r in 0..a.map.rows() {
            for c in 0..a.map.cols() {
                if levels[a.from][c] < levels[a.to][r] && !a.map[(r, c)].is_negligible(thr) {
                    return Err(Error::Invalid("filtration step is not a subobject".into()));
                }
            }
        }
    }
    Ok(Composition { factors, basis, levels })
}

/// Family over the affine line: isomorphic to `fd` for `tau != 0`, the
/// associated graded at `tau = 0`.
pub fn degenerate_family<S: Field>(fd: &FiniteDescription<S>, filtration: &Composition<S>, tau: &S) -> Result<FiniteDescription<S>> {
    let q = fd.as_quiver();
    if filtration.basis.len() != q.dims.len() || filtration.basis.iter().zip(&q.dims).any(|(b, &d)| b.rows() != d || b.cols() != d) {
        return Err(Error::Shape("filtration does not match the finite description".into()));
    }
    FiniteDescription::from_quiver(fd.surface, &quiver::degenerate(&q, filtration, tau))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::{ExactMatrix, GaussianRational};
    use num_rational::BigRational;

    fn q(p: i64, d: i64) -> GaussianRational {
        GaussianRational::new(BigRational::new(p.into(), d.into()), BigRational::from_integer(0.into()))
    }

    fn unipotent() -> FiniteDescription<GaussianRational> {
        let s = SurfaceData::new(1, 1).unwrap();
        FiniteDescription::new(
            s,
            vec![ExactMatrix::from_int_rows(&[&[1, 1], &[0, 1]]), ExactMatrix::identity(2), ExactMatrix::identity(2)],
            vec![Puncture::empty(2)],
        )
        .unwrap()
    }

    fn sign_pair(second_dim: usize) -> FiniteDescription<GaussianRational> {
        let s = SurfaceData::new(0, 2).unwrap();
        let m1 = ExactMatrix::from_int_rows(&[&[-1]]);
        let p1 = Puncture { tau_f: m1.clone(), c: ExactMatrix::from_int_rows(&[&[-4]]), v: Matrix::scalar(q(1, 2)) };
        let p2 = if second_dim == 0 { Puncture::empty(1) } else { p1.clone() };
        FiniteDescription::new(s, vec![m1.clone(), m1], vec![p1, p2]).unwrap()
    }

    #[test]
    fn validate_examples() {
        // With F_2 = 0 the gluing identity at the second puncture forces
        // rho(c_2) = 1, so only that residual fails.
        let r = sign_pair(0).validate(0.0).unwrap();
        assert!(!r.ok);
        let failing: Vec<_> = r.residuals.iter().filter(|x| x.value > 0.0).map(|x| x.name.as_str()).collect();
        assert_eq!(failing, vec!["V2C2-(rho(c2)-I)"]);
        assert!(sign_pair(1).validate(0.0).unwrap().ok);

        let triv = FiniteDescription::<GaussianRational>::trivial(SurfaceData::new(1, 2).unwrap(), 3);
        assert!(triv.validate(0.0).unwrap().ok);

        let s = SurfaceData::new(0, 1).unwrap();
        let one = ExactMatrix::identity(1);
        let bad = FiniteDescription::new(s, vec![one.clone()], vec![Puncture { tau_f: one.clone(), c: one.clone(), v: one }]).unwrap();
        assert!(!bad.validate(0.0).unwrap().ok);
        assert!(unipotent().validate(0.0).unwrap().ok);
    }

    #[test]
    fn act_examples() {
        let fd = sign_pair(1);
        assert_eq!(act(&fd, &GroupElement::identity(&fd)).unwrap(), fd);
        let lam = q(3, 1);
        let h = GroupElement { g: ExactMatrix::identity(1), g_a: vec![Matrix::scalar(lam.clone()), Matrix::scalar(lam.clone())] };
        let out = act(&fd, &h).unwrap();
        assert!(out.validate(0.0).unwrap().ok);
        assert_eq!(out.local[0].c, fd.local[0].c.scale(&(GaussianRational::from_ints(1, 0) / lam.clone())));
        assert_eq!(out.local[0].v, fd.local[0].v.scale(&lam));
        let sing = GroupElement { g: ExactMatrix::zeros(1, 1), g_a: h.g_a.clone() };
        assert!(act(&fd, &sing).is_err());
    }

    #[test]
    fn spin_examples() {
        let z = GaussianRational::from_ints(0, 0);
        let o = GaussianRational::from_ints(1, 0);
        let triv = FiniteDescription::<GaussianRational>::trivial(SurfaceData::new(0, 1).unwrap(), 2);
        assert_eq!(spin(&triv, &[vec![z.clone(), z.clone()]], 0.0).unwrap().total_dim(), 0);
        assert_eq!(spin(&triv, &[vec![o.clone(), z.clone()]], 0.0).unwrap().dims(), vec![1, 0]);
        let sub = spin(&unipotent(), &[vec![o.clone(), z.clone()]], 0.0).unwrap();
        assert_eq!(sub.e, ExactMatrix::from_int_rows(&[&[1], &[0]]));
        assert_eq!(spin(&unipotent(), &[vec![z, o]], 0.0).unwrap().e.cols(), 2);
    }

    #[test]
    fn jordan_holder_examples() {
        let mut rng = crate::random::rng(7);
        let jh = jordan_holder(&unipotent(), 0.0, &mut rng).unwrap();
        assert_eq!(jh.factors.len(), 2);
        assert_eq!(jh.classes, vec![(0, 2)]);
        let one = FiniteDescription::<GaussianRational>::trivial(SurfaceData::new(1, 1).unwrap(), 1);
        assert_eq!(jh.factors[0], one);

        let simple = sign_pair(1);
        let jh1 = jordan_holder(&simple, 0.0, &mut rng).unwrap();
        assert_eq!(jh1.factors, vec![simple.clone()]);

        // a trivial character with F = 0 next to the sign character
        let s = simple.surface;
        let other = FiniteDescription::<GaussianRational>::trivial(s, 1);
        let sum = simple.direct_sum(&other).unwrap();
        let jh2 = jordan_holder(&sum, 0.0, &mut rng).unwrap();
        assert_eq!(jh2.classes.len(), 2);
        assert_eq!(jh2.factors.iter().map(|f| f.total_dim()).sum::<usize>(), sum.total_dim());
    }

    #[test]
    fn s_equivalence_examples() {
        let mut rng = crate::random::rng(11);
        let u = unipotent();
        let diag = FiniteDescription::<GaussianRational>::trivial(u.surface, 2);
        assert!(s_equivalent(&u, &diag, 0.0, &mut rng).unwrap());
        assert!(fd_isomorphic(&u, &diag, 0.0, &mut rng).unwrap().is_none());
        let h = GroupElement { g: ExactMatrix::from_int_rows(&[&[2, 1], &[1, 1]]), g_a: vec![ExactMatrix::zeros(0, 0)] };
        let moved = act(&u, &h).unwrap();
        assert!(s_equivalent(&u, &moved, 0.0, &mut rng).unwrap());
        let w = fd_isomorphic(&u, &moved, 0.0, &mut rng).unwrap().unwrap();
        assert_eq!(act(&u, &w).unwrap(), moved);
        let bigger = FiniteDescription::<GaussianRational>::trivial(u.surface, 3);
        assert!(!s_equivalent(&u, &bigger, 0.0, &mut rng).unwrap());
    }

    #[test]
    fn rank_obstructed_isomorphism() {
        let mut rng = crate::random::rng(2);
        let s = SurfaceData::new(0, 1).unwrap();
        let one = ExactMatrix::identity(1);
        let zero = ExactMatrix::zeros(1, 1);
        // C V = 0 and V C = 0 with C = 1, V = 0 against C = 0, V = 0
        let a =
            FiniteDescription::new(s, vec![one.clone()], vec![Puncture { tau_f: one.clone(), c: one.clone(), v: zero.clone() }]).unwrap();
        let b = FiniteDescription::new(s, vec![one.clone()], vec![Puncture { tau_f: one, c: zero.clone(), v: zero }]).unwrap();
        assert!(a.validate(0.0).unwrap().ok && b.validate(0.0).unwrap().ok);
        assert!(fd_isomorphic(&a, &b, 0.0, &mut rng).unwrap().is_none());
        assert!(fd_isomorphic(&a, &a, 0.0, &mut rng).unwrap().is_some());
    }

    #[test]
    fn degeneration_examples() {
        let u = unipotent();
        let z = GaussianRational::from_ints(0, 0);
        let o = GaussianRational::from_ints(1, 0);
        let sub = spin(&u, &[vec![o.clone(), z.clone()]], 0.0).unwrap();
        let filt = filtration_from_chain(&u, &[sub], 0.0).unwrap();
        let d0 = degenerate_family(&u, &filt, &z).unwrap();
        assert_eq!(d0, FiniteDescription::trivial(u.surface, 2));
        assert_eq!(degenerate_family(&u, &filt, &o).unwrap(), u);
        let d2 = degenerate_family(&u, &filt, &GaussianRational::from_ints(2, 0)).unwrap();
        assert!(d2.validate(0.0).unwrap().ok);
        let trivial = filtration_from_chain(&u, &[], 0.0).unwrap();
        assert_eq!(degenerate_family(&u, &trivial, &z).unwrap(), u);
        let not_sub = SubObject { e: ExactMatrix::from_int_rows(&[&[0], &[1]]), f: vec![ExactMatrix::zeros(0, 0)] };
        assert!(filtration_from_chain(&u, &[not_sub], 0.0).is_err());
    }
}
