//! Fuchsian systems on the punctured sphere.
//!
//! Flat sections solve `dy/dz = -sum_a A_a / (z - p_a) y`, so a positive loop
//! around `p_a` acts by a conjugate of `expm2pi(A_a)`. The residue at
//! infinity is `-sum_a A_a`.

use num_complex::Complex;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::findesc::{FiniteDescription, Puncture, SurfaceData};
use crate::linalg::{elim, svd::Svd};
use crate::localmodel::LocalModel;
use crate::matfun::{apply_entire, char_poly_distance, resonance_report, EntireFn};
use crate::matrix::Matrix;
use crate::report::Report;
use crate::rh::rh_local;
use crate::{ComplexMatrix, C64};

/// Relation residuals above `RELATION_FACTOR * tol * scale` are errors.
const RELATION_FACTOR: f64 = 1e4;
const MAX_STEPS: usize = 200_000;
const MAX_SERIES_TERMS: usize = 400;

#[derive(Clone, Debug, PartialEq)]
pub struct FuchsianSystem {
    pub punctures: Vec<C64>,
    pub residues: Vec<ComplexMatrix>,
    pub base: C64,
}

impl FuchsianSystem {
    pub fn new(punctures: Vec<C64>, residues: Vec<ComplexMatrix>, base: C64) -> Result<Self> {
        if punctures.is_empty() || punctures.len() != residues.len() {
            return Err(Error::Shape(format!("{} punctures and {} residues", punctures.len(), residues.len())));
        }
        let n = residues[0].rows();
        for (a, r) in residues.iter().enumerate() {
            r.ensure_shape(n, n, &format!("residue {}", a + 1))?;
            r.ensure_finite(&format!("residue {}", a + 1))?;
        }
        if !base.is_finite() || punctures.iter().any(|p| !p.is_finite()) {
            return Err(Error::NonFinite("puncture positions".into()));
        }
        for (a, p) in punctures.iter().enumerate() {
            if (p - base).norm() == 0.0 {
                return Err(Error::Invalid(format!("base point equals puncture {}", a + 1)));
            }
            if punctures[..a].iter().any(|q| (p - q).norm() == 0.0) {
                return Err(Error::Invalid(format!("puncture {} is repeated", a + 1)));
            }
        }
        Ok(FuchsianSystem { punctures, residues, base })
    }

    pub fn n(&self) -> usize {
        self.residues[0].rows()
    }

    pub fn k(&self) -> usize {
        self.punctures.len()
    }

    pub fn residue_at_infinity(&self) -> ComplexMatrix {
        let mut s = ComplexMatrix::zeros(self.n(), self.n());
        for r in &self.residues {
            s = &s - r;
        }
        s
    }

    /// Infinity is an actual singular point.
    pub fn has_infinity(&self, tol: f64) -> bool {
        let scale = self.residues.iter().map(|r| r.max_abs()).fold(1.0, f64::max);
        self.residue_at_infinity().max_abs() > tol * scale
    }

    pub fn residue(&self, site: Site) -> ComplexMatrix {
        match site {
            Site::Finite(a) => self.residues[a].clone(),
            Site::Infinity => self.residue_at_infinity(),
        }
    }

    /// `-sum_a A_a / (z - p_a)`
    pub fn connection(&self, z: C64) -> ComplexMatrix {
        let mut m = ComplexMatrix::zeros(self.n(), self.n());
        for (p, r) in self.punctures.iter().zip(&self.residues) {
            m = &m - &r.scale(&(1.0 / (z - p)));
        }
        m
    }
}

// ---------------------------------------------------------------------------
// Paths

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Segment {
    Line {
        from: C64,
        to: C64,
    },
    /// `center + radius e^{i (start + s sweep)}`, `s` in `[0, 1]`
    Arc {
        center: C64,
        radius: f64,
        start: f64,
        sweep: f64,
    },
}

impl Segment {
    /// Point and `dz/ds`.
    fn eval(&self, s: f64) -> (C64, C64) {
        match *self {
            Segment::Line { from, to } => (from + (to - from) * s, to - from),
            Segment::Arc { center, radius, start, sweep } => {
                let e = Complex::from_polar(radius, start + s * sweep);
                (center + e, e * Complex::new(0.0, sweep))
            }
        }
    }

    pub fn start(&self) -> C64 {
        self.eval(0.0).0
    }

    pub fn end(&self) -> C64 {
        self.eval(1.0).0
    }

    pub fn reversed(&self) -> Segment {
        match *self {
            Segment::Line { from, to } => Segment::Line { from: to, to: from },
            Segment::Arc { center, radius, start, sweep } => Segment::Arc { center, radius, start: start + sweep, sweep: -sweep },
        }
    }

    /// Lower bound for the distance to `p` (exact for lines and arcs).
    fn distance_to(&self, p: C64) -> f64 {
        match *self {
            Segment::Line { from, to } => {
                let d = to - from;
                let l2 = d.norm_sqr();
                let s = if l2 == 0.0 { 0.0 } else { ((p - from) * d.conj()).re / l2 };
                (from + d * s.clamp(0.0, 1.0) - p).norm()
            }
            Segment::Arc { center, radius, start, sweep } => {
                let r = (p - center).norm();
                let ang = (p - center).arg();
                let turn = std::f64::consts::TAU;
                // the nearest point on the full circle lies on the arc when
                // the arc covers that angle
                let rel = if sweep >= 0.0 { (ang - start).rem_euclid(turn) } else { (start - ang).rem_euclid(turn) };
                if rel <= sweep.abs() {
                    (r - radius).abs()
                } else {
                    (p - self.start()).norm().min((p - self.end()).norm())
                }
            }
        }
    }
}

pub fn polyline(points: &[C64]) -> Vec<Segment> {
    points.windows(2).map(|w| Segment::Line { from: w[0], to: w[1] }).collect()
}

/// Full positive circle around `center` through `start`.
pub fn circle_through(center: C64, start: C64) -> Segment {
    let d = start - center;
    Segment::Arc { center, radius: d.norm(), start: d.arg(), sweep: std::f64::consts::TAU }
}

pub fn reverse_path(path: &[Segment]) -> Vec<Segment> {
    path.iter().rev().map(|s| s.reversed()).collect()
}

// ---------------------------------------------------------------------------
// Integration

// Dormand-Prince 5(4) tableau.
const C: [f64; 7] = [0.0, 0.2, 0.3, 0.8, 8.0 / 9.0, 1.0, 1.0];
const A: [[f64; 6]; 7] = [
    [0.0; 6],
    [0.2, 0.0, 0.0, 0.0, 0.0, 0.0],
    [3.0 / 40.0, 9.0 / 40.0, 0.0, 0.0, 0.0, 0.0],
    [44.0 / 45.0, -56.0 / 15.0, 32.0 / 9.0, 0.0, 0.0, 0.0],
    [19372.0 / 6561.0, -25360.0 / 2187.0, 64448.0 / 6561.0, -212.0 / 729.0, 0.0, 0.0],
    [9017.0 / 3168.0, -355.0 / 33.0, 46732.0 / 5247.0, 49.0 / 176.0, -5103.0 / 18656.0, 0.0],
    [35.0 / 384.0, 0.0, 500.0 / 1113.0, 125.0 / 192.0, -2187.0 / 6784.0, 11.0 / 84.0],
];
const B5: [f64; 7] = [35.0 / 384.0, 0.0, 500.0 / 1113.0, 125.0 / 192.0, -2187.0 / 6784.0, 11.0 / 84.0, 0.0];
const B4: [f64; 7] = [5179.0 / 57600.0, 0.0, 7571.0 / 16695.0, 393.0 / 640.0, -92097.0 / 339200.0, 187.0 / 2100.0, 1.0 / 40.0];

/// Solves `Y' = F(s) Y` on `[0, 1]`; returns `Y(1)` and the step count.
fn integrate(f: impl Fn(f64) -> ComplexMatrix, y0: ComplexMatrix, tol: f64) -> Result<(ComplexMatrix, usize)> {
    let mut y = y0;
    let mut s = 0.0;
    let mut h: f64 = 0.01;
    let mut steps = 0;
    while s < 1.0 {
        if steps > MAX_STEPS {
            return Err(Error::Integration(format!("more than {MAX_STEPS} steps")));
        }
        h = h.min(1.0 - s);
        let mut k: Vec<ComplexMatrix> = Vec::with_capacity(7);
        for i in 0..7 {
            let mut yi = y.clone();
            for (j, kj) in k.iter().enumerate() {
                if A[i][j] != 0.0 {
                    yi = &yi + &kj.scale(&Complex::new(h * A[i][j], 0.0));
                }
            }
            k.push(&f(s + C[i] * h) * &yi);
        }
        let mut y5 = y.clone();
        let mut e = ComplexMatrix::zeros(y.rows(), y.cols());
        for i in 0..7 {
            y5 = &y5 + &k[i].scale(&Complex::new(h * B5[i], 0.0));
            e = &e + &k[i].scale(&Complex::new(h * (B5[i] - B4[i]), 0.0));
        }
        let mut err: f64 = 0.0;
        for ((ei, yo), yn) in e.data().iter().zip(y.data()).zip(y5.data()) {
            let sc = tol * (1.0 + yo.norm().max(yn.norm()));
            err = err.max(ei.norm() / sc);
        }
        if !err.is_finite() {
            return Err(Error::Integration("non-finite state".into()));
        }
        if err <= 1.0 {
            s += h;
            y = y5;
            steps += 1;
        }
        let fac = if err == 0.0 { 5.0 } else { (0.9 * err.powf(-0.2)).clamp(0.2, 5.0) };
        h *= fac;
        if h < 1e-14 {
            return Err(Error::Integration(format!("step size underflow at s = {s}")));
        }
    }
    Ok((y, steps))
}

/// Transport matrix of flat sections along a path: `y(end) = T y(start)`.
/// Concatenation composes as `T(g1 g2) = T(g2) T(g1)`.
pub fn transport(sys: &FuchsianSystem, path: &[Segment], tol: f64) -> Result<ComplexMatrix> {
    let mut t = ComplexMatrix::identity(sys.n());
    for (i, seg) in path.iter().enumerate() {
        if let Some(prev) = i.checked_sub(1).map(|j| path[j]) {
            if (prev.end() - seg.start()).norm() > 1e-12 * (1.0 + seg.start().norm()) {
                return Err(Error::Invalid(format!("path is discontinuous at segment {i}")));
            }
        }
        let clearance = sys.punctures.iter().map(|p| seg.distance_to(*p)).fold(f64::INFINITY, f64::min);
        if clearance < 1e-9 {
            return Err(Error::Invalid(format!("segment {i} passes through a puncture")));
        }
        let (y, _) = integrate(
            |s| {
                let (z, dz) = seg.eval(s);
                sys.connection(z).scale(&dz)
            },
            t,
            tol,
        )?;
        t = y;
    }
    Ok(t)
}

// ---------------------------------------------------------------------------
// Loops

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Site {
    Finite(usize),
    Infinity,
}

/// Approach path from the base point to a point `q` near the site, then a
/// positive circle around the site through `q` (clockwise in `z` for
/// infinity), then back.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BasedLoop {
    pub site: Site,
    pub approach: Vec<Segment>,
    pub circle: Segment,
}

impl BasedLoop {
    pub fn q(&self) -> C64 {
        self.circle.start()
    }

    pub fn full_path(&self) -> Vec<Segment> {
        let mut p = self.approach.clone();
        p.push(self.circle);
        p.extend(reverse_path(&self.approach));
        p
    }
}

/// Loops listed in relation order: the product of the monodromies in this
/// order is the identity.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LoopBasket {
    pub loops: Vec<BasedLoop>,
}

/// Chart radius around each finite puncture.
fn chart_radius(sys: &FuchsianSystem, a: usize) -> f64 {
    let p = sys.punctures[a];
    let others = sys.punctures.iter().enumerate().filter(|&(b, _)| b != a).map(|(_, q)| (q - p).norm()).fold(f64::INFINITY, f64::min);
    (0.25 * others).min(0.5 * (sys.base - p).norm())
}

impl LoopBasket {
    /// Straight approaches from the base point. Punctures are ordered by
    /// decreasing angle measured counterclockwise from a cut ray through the
    /// widest angular gap; infinity (when singular) comes last, reached
    /// along the cut.
    pub fn standard(sys: &FuchsianSystem, tol: f64) -> Result<Self> {
        let z0 = sys.base;
        let turn = std::f64::consts::TAU;
        let mut ang: Vec<(f64, usize)> = sys.punctures.iter().enumerate().map(|(a, p)| ((p - z0).arg(), a)).collect();
        ang.sort_by(|x, y| x.0.total_cmp(&y.0));
        let mut cut = ang[0].0 + std::f64::consts::PI;
        let mut widest = -1.0;
        for i in 0..ang.len() {
            let next = if i + 1 < ang.len() { ang[i + 1].0 } else { ang[0].0 + turn };
            if next - ang[i].0 > widest {
                widest = next - ang[i].0;
                cut = ang[i].0 + widest / 2.0;
            }
        }
        let rel = |a: usize| ((sys.punctures[a] - z0).arg() - cut).rem_euclid(turn);
        let mut order: Vec<usize> = (0..sys.k()).collect();
        order.sort_by(|&x, &y| rel(y).total_cmp(&rel(x)));
        for w in order.windows(2) {
            if (rel(w[0]) - rel(w[1])).abs() < 1e-9 {
                return Err(Error::Invalid(format!(
                    "punctures {} and {} are collinear with the base point; supply a loop basket",
                    w[0] + 1,
                    w[1] + 1
                )));
            }
        }
        let mut loops = Vec::new();
        for &a in &order {
            let p = sys.punctures[a];
            let r = chart_radius(sys, a);
            let u = (p - z0) / (p - z0).norm();
            let q = p - u * r;
            let approach = polyline(&[z0, q]);
            for (b, pb) in sys.punctures.iter().enumerate() {
                if b != a && approach[0].distance_to(*pb) < chart_radius(sys, b) {
                    return Err(Error::Invalid(format!(
                        "straight path to puncture {} passes near puncture {}; supply a loop basket",
                        a + 1,
                        b + 1
                    )));
                }
            }
            loops.push(BasedLoop { site: Site::Finite(a), approach, circle: circle_through(p, q) });
        }
        if sys.has_infinity(tol) {
            let big = sys.punctures.iter().map(|p| p.norm()).fold(z0.norm(), f64::max).max(0.25);
            let radius = 4.0 * big + 1.0;
            let d = Complex::from_polar(1.0, cut);
            let b = (z0.conj() * d).re;
            let t = -b + (b * b - z0.norm_sqr() + radius * radius).sqrt();
            let q = z0 + d * t;
            let circle = Segment::Arc { center: Complex::new(0.0, 0.0), radius, start: q.arg(), sweep: -turn };
            loops.push(BasedLoop { site: Site::Infinity, approach: polyline(&[z0, q]), circle });
        }
        Ok(LoopBasket { loops })
    }

    pub fn sites(&self) -> Vec<Site> {
        self.loops.iter().map(|l| l.site).collect()
    }
}

#[derive(Clone, Debug)]
pub struct Monodromy {
    pub sites: Vec<Site>,
    pub matrices: Vec<ComplexMatrix>,
    /// `|M_1 ... M_k - I|` in basket order.
    pub relation_residual: f64,
    /// Distance of the characteristic polynomial of `M_a` to that of
    /// `expm2pi(A_a)`.
    pub char_poly_distance: Vec<f64>,
}

fn product(ms: &[ComplexMatrix], n: usize) -> ComplexMatrix {
    ms.iter().fold(ComplexMatrix::identity(n), |acc, m| &acc * m)
}

pub fn monodromy(sys: &FuchsianSystem, basket: &LoopBasket, tol: f64) -> Result<Monodromy> {
    let n = sys.n();
    let mut matrices = Vec::new();
    let mut cpd = Vec::new();
    for l in &basket.loops {
        let t_sigma = transport(sys, &l.approach, tol)?;
        let t_circle = transport(sys, &[l.circle], tol)?;
        let m = &(&elim::inverse(&t_sigma)? * &t_circle) * &t_sigma;
        cpd.push(char_poly_distance(&m, &apply_entire(&sys.residue(l.site), EntireFn::Expm2pi)?)?);
        matrices.push(m);
    }
    let residual = (&product(&matrices, n) - &ComplexMatrix::identity(n)).max_abs();
    let scale = matrices.iter().map(|m| m.max_abs()).fold(1.0, f64::max);
    if residual > RELATION_FACTOR * tol * scale {
        return Err(Error::Residual {
            what: format!("loop relation (char poly distances {cpd:?})"),
            residual,
            tol: RELATION_FACTOR * tol * scale,
        });
    }
    Ok(Monodromy { sites: basket.sites(), matrices, relation_residual: residual, char_poly_distance: cpd })
}

// ---------------------------------------------------------------------------
// Local frames

/// Residue and regular part `sum_j B_j w^j` of the system in the chart
/// `w = z - p_a` (or `w = 1/z` at infinity): `dy/dw = -(A/w + B(w)) y`.
fn chart(sys: &FuchsianSystem, site: Site) -> (ComplexMatrix, Box<dyn Fn(usize) -> ComplexMatrix + '_>) {
    let a_res = sys.residue(site);
    let n = sys.n();
    match site {
        Site::Finite(a) => {
            let p = sys.punctures[a];
            let b = move |j: usize| {
                let mut m = ComplexMatrix::zeros(n, n);
                for (c, (q, r)) in sys.punctures.iter().zip(&sys.residues).enumerate() {
                    if c != a {
                        m = &m - &r.scale(&(1.0 / (q - p).powu(j as u32 + 1)));
                    }
                }
                m
            };
            (a_res, Box::new(b))
        }
        Site::Infinity => {
            let b = move |j: usize| {
                let mut m = ComplexMatrix::zeros(n, n);
                for (q, r) in sys.punctures.iter().zip(&sys.residues) {
                    m = &m - &r.scale(&q.powu(j as u32 + 1));
                }
                m
            };
            (a_res, Box::new(b))
        }
    }
}

/// Solves `(A + k) X - X A = rhs` through the Kronecker system.
fn shifted_sylvester(a: &ComplexMatrix, k: f64, rhs: &ComplexMatrix) -> Result<ComplexMatrix> {
    let n = a.rows();
    let id = ComplexMatrix::identity(n);
    let shifted = a + &id.scale(&Complex::new(k, 0.0));
    let sys = &shifted.kron(&id) - &id.kron(&a.transpose());
    let b = Matrix::from_vec(n * n, 1, rhs.vec_rows())?;
    let x = elim::solve(&sys, &b).map_err(|_| Error::Resonant(format!("eigenvalues of the residue differ by {k}")))?;
    Matrix::from_vec(n, n, x.data().to_vec())
}

/// Fundamental solution `H(w) w^{-A}` at the point `z` of the chart.
pub fn local_frame(sys: &FuchsianSystem, site: Site, z: C64) -> Result<ComplexMatrix> {
    let (a, b) = chart(sys, site);
    let w = match site {
        Site::Finite(i) => z - sys.punctures[i],
        Site::Infinity => 1.0 / z,
    };
    let n = sys.n();
    let mut hs: Vec<ComplexMatrix> = vec![ComplexMatrix::identity(n)];
    let mut bs: Vec<ComplexMatrix> = Vec::new();
    let mut sum = ComplexMatrix::identity(n);
    let mut wk = Complex::new(1.0, 0.0);
    let mut small = 0;
    for k in 1..MAX_SERIES_TERMS {
        bs.push(b(k - 1));
        let mut rhs = ComplexMatrix::zeros(n, n);
        for j in 0..k {
            rhs = &rhs - &(&bs[j] * &hs[k - 1 - j]);
        }
        let hk = shifted_sylvester(&a, k as f64, &rhs)?;
        wk *= w;
        let term = hk.scale(&wk);
        sum = &sum + &term;
        hs.push(hk);
        if term.max_abs() <= 1e-17 * sum.max_abs() {
            small += 1;
            if small >= 3 {
                let log = apply_entire(&a.scale(&(-w.ln())), EntireFn::ExpPlain)?;
                return Ok(&sum * &log);
            }
        } else {
            small = 0;
        }
    }
    Err(Error::NoConvergence(format!("local series at {site:?} did not converge at w = {w}")))
}

// ---------------------------------------------------------------------------
// Assembly

#[derive(Clone, Debug)]
pub struct Assembled {
    pub fd: FiniteDescription<C64>,
    pub sites: Vec<Site>,
    /// `P_a`: base point to local frame.
    pub frames: Vec<ComplexMatrix>,
    /// Validation of `fd` at the tolerance budget.
    pub report: Report,
}

/// Glue local models to the global monodromy: `rho(c_a) = P^-1 T_E P`,
/// `C_a = C P`, `V_a = P^-1 V` with `P` the transport from the base point to
/// the local frame. `models` follow the puncture order, then infinity when
/// it is singular. Punctures of the result follow the basket order.
pub fn assemble_fd(sys: &FuchsianSystem, models: &[LocalModel], basket: &LoopBasket, tol: f64) -> Result<Assembled> {
    let expected = sys.k() + usize::from(sys.has_infinity(tol));
    if models.len() != expected {
        return Err(Error::Shape(format!("{} local models, expected {expected}", models.len())));
    }
    if basket.loops.len() != expected {
        return Err(Error::Shape(format!("basket has {} loops, expected {expected}", basket.loops.len())));
    }
    let n = sys.n();
    let mut rho = Vec::new();
    let mut local = Vec::new();
    let mut frames = Vec::new();
    for l in &basket.loops {
        let idx = match l.site {
            Site::Finite(a) => a,
            Site::Infinity => sys.k(),
        };
        let model = &models[idx];
        let a_res = sys.residue(l.site);
        if model.n() != n {
            return Err(Error::Shape(format!("local model {} has n = {}, expected {n}", idx + 1, model.n())));
        }
        let vr = model.validate(tol)?;
        if !vr.ok {
            return Err(Error::Residual { what: format!("local model {}", idx + 1), residual: vr.worst(), tol });
        }
        let dr = model.r.dist(&a_res);
        if dr > tol * a_res.max_abs().max(1.0) {
            return Err(Error::Invalid(format!("local model {} has R different from the residue ({dr:e})", idx + 1)));
        }
        let rr = resonance_report(&a_res, tol)?;
        if !rr.good {
            return Err(Error::Resonant(format!("residue at {:?}; apply make_good first", l.site)));
        }
        let t_sigma = transport(sys, &l.approach, tol)?;
        let y_loc = local_frame(sys, l.site, l.q())?;
        let p = elim::solve(&y_loc, &t_sigma)?;
        let sv = Svd::new(&p).sigma_f64();
        let cond = sv.first().copied().unwrap_or(1.0) / sv.last().copied().unwrap_or(1.0);
        if !(cond < 1e10) {
            return Err(Error::IllConditioned(format!("frame at {:?} has condition {cond:e}", l.site)));
        }
        let p_inv = elim::inverse(&p)?;
        let data = rh_local(model, tol)?;
        rho.push(&(&p_inv * &data.t_e) * &p);
        local.push(Puncture { tau_f: data.t_f, c: &data.c * &p, v: &p_inv * &data.v });
        frames.push(p);
    }
    let fd = FiniteDescription::new(SurfaceData::new(0, basket.loops.len())?, rho, local)?;
    let budget = (RELATION_FACTOR * tol).max(tol);
    let report = fd.validate(budget)?;
    Ok(Assembled { fd, sites: basket.sites(), frames, report })
}
