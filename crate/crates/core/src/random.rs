//! Seeded random instances: matrices, local models, Fuchsian systems.

use num_complex::Complex;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::findesc::{FiniteDescription, SurfaceData};
use crate::fuchsian::{FuchsianSystem, LoopBasket};
use crate::linalg::elim;
use crate::localmodel::LocalModel;
use crate::matrix::Matrix;
use crate::scalar::{Field, GaussianRational};
use crate::{ComplexMatrix, C64};

pub type SeededRng = ChaCha8Rng;

pub fn rng(seed: u64) -> SeededRng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Uniform on the square `[-1, 1] x [-1, 1]`.
pub fn complex(rng: &mut impl Rng) -> C64 {
    Complex::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0))
}

pub fn matrix(rng: &mut impl Rng, rows: usize, cols: usize, scale: f64) -> ComplexMatrix {
    ComplexMatrix::from_fn(rows, cols, |_, _| complex(rng) * scale)
}

/// `I + E` with `|E|_2 < 0.43`, so the condition number stays below 2.5.
pub fn conjugator(rng: &mut impl Rng, n: usize) -> ComplexMatrix {
    let e = matrix(rng, n, n, 0.3 / n.max(1) as f64);
    &ComplexMatrix::identity(n) + &e
}

/// A more strongly mixing invertible matrix, retried until reasonably
/// conditioned.
pub fn invertible(rng: &mut impl Rng, n: usize) -> ComplexMatrix {
    loop {
        let g = &ComplexMatrix::identity(n) + &matrix(rng, n, n, 0.8 / (n.max(1) as f64).sqrt());
        let svd = crate::linalg::svd::Svd::new(&g);
        let s = svd.sigma_f64();
        if n == 0 || s[n - 1] > 0.1 * s[0] {
            return g;
        }
    }
}

/// Random valid model with `R` similar to `diag(spectrum)`. When `m < n`
/// at least `n - m` entries of the spectrum must vanish.
pub fn model_with_spectrum(rng: &mut impl Rng, spectrum: &[C64], m: usize) -> LocalModel {
    let n = spectrum.len();
    // nonzero eigenvalues first
    let mut d: Vec<C64> = spectrum.iter().copied().filter(|z| z.norm() != 0.0).collect();
    let nonzero = d.len();
    assert!(nonzero <= m || m >= n, "too many nonzero eigenvalues for m = {m}");
    d.resize(n, C64::new(0.0, 0.0));
    let g = invertible(rng, n);
    let ginv = elim::inverse(&g).expect("conditioned by construction");
    let dm = ComplexMatrix::diag(&d);
    let r = &(&g * &dm) * &ginv;
    if m >= n {
        let t =
            &matrix(rng, m, n, 1.0) + &ComplexMatrix::from_fn(m, n, |i, j| if i == j { C64::new(1.5, 0.0) } else { C64::new(0.0, 0.0) });
        let th = t.adjoint();
        let pinv = elim::solve(&(&th * &t), &th).expect("full column rank");
        let s = &r * &pinv;
        let theta = &t * &s;
        LocalModel::from_parts(r, theta, t, s)
    } else {
        let h = invertible(rng, m);
        let hinv = elim::inverse(&h).expect("conditioned by construction");
        let gm = g.submatrix(0, n, 0, m);
        let ginv_m = ginv.submatrix(0, m, 0, n);
        let dmm = ComplexMatrix::diag(&d[..m]);
        let s = &(&gm * &dmm) * &hinv;
        let t = &h * &ginv_m;
        let theta = &t * &s;
        LocalModel::from_parts(r, theta, t, s)
    }
}

/// Random model with `R := st`, `thetaF := ts` for random `s`, `t`.
pub fn raw_model(rng: &mut impl Rng, n: usize, m: usize, scale: f64) -> LocalModel {
    let t = matrix(rng, m, n, scale);
    let s = matrix(rng, n, m, scale);
    LocalModel::from_parts(&s * &t, &t * &s, t, s)
}

/// Spectrum with real parts in `[lo, hi)` and small imaginary parts.
pub fn spectrum_in(rng: &mut impl Rng, n: usize, lo: f64, hi: f64) -> Vec<C64> {
    (0..n).map(|_| C64::new(rng.gen_range(lo..hi), rng.gen_range(-0.3..0.3))).collect()
}

/// Spectrum containing at least one pair with a nonzero integer gap in
/// `1..=max_gap`.
pub fn resonant_spectrum(rng: &mut impl Rng, n: usize, max_gap: i64) -> Vec<C64> {
    assert!(n >= 2);
    let base = if rng.gen_bool(0.4) { C64::new(0.0, 0.0) } else { C64::new(rng.gen_range(-1.5..1.5), rng.gen_range(-0.3..0.3)) };
    let mut out = vec![base, base + rng.gen_range(1..=max_gap) as f64];
    while out.len() < n {
        let z = match rng.gen_range(0..3) {
            0 => out[rng.gen_range(0..out.len())] + rng.gen_range(-max_gap..=max_gap) as f64,
            1 => C64::new(0.0, 0.0),
            _ => C64::new(rng.gen_range(-1.5..1.5), rng.gen_range(-0.3..0.3)),
        };
        out.push(z);
    }
    out
}

/// Random Fuchsian system on `k` punctures near the unit circle, base point
/// inside, `|A_a|_2 <= 1`. With `closed` the residues sum to zero, so
/// infinity is regular. Retried until the standard loop basket exists.
pub fn fuchsian_system(rng: &mut impl Rng, k: usize, n: usize, closed: bool) -> FuchsianSystem {
    assert!(k >= 1 && n >= 1);
    loop {
        let punctures: Vec<C64> = (0..k)
            .map(|a| {
                let ang = std::f64::consts::TAU * (a as f64 + rng.gen_range(-0.2..0.2)) / k as f64;
                Complex::from_polar(rng.gen_range(0.8..1.2), ang)
            })
            .collect();
        let base = Complex::new(rng.gen_range(-0.2..0.2), rng.gen_range(-0.2..0.2));
        let mut residues: Vec<ComplexMatrix> = (0..k).map(|_| matrix(rng, n, n, 0.4)).collect();
        if closed {
            let sum = residues[..k - 1].iter().fold(ComplexMatrix::zeros(n, n), |acc, a| &acc + a);
            residues[k - 1] = -&sum;
        }
        let big = residues.iter().map(|a| crate::linalg::svd::Svd::new(a).sigma_f64()[0]).fold(0.0, f64::max);
        if big > 1.0 {
            for a in residues.iter_mut() {
                *a = a.scale(&C64::new(1.0 / big, 0.0));
            }
        }
        let Ok(sys) = FuchsianSystem::new(punctures, residues, base) else { continue };
        if LoopBasket::standard(&sys, 1e-9).is_ok() {
            return sys;
        }
    }
}

/// Random finite description with every `F_a = E`: generators are random
/// conjugators and the last boundary generator closes the relation.
pub fn finite_description(rng: &mut impl Rng, genus: usize, punctures: usize, n: usize) -> FiniteDescription<C64> {
    let surface = SurfaceData::new(genus, punctures).expect("at least one puncture");
    let count = surface.generator_count();
    let mut rho: Vec<ComplexMatrix> = (0..count).map(|_| invertible(rng, n)).collect();
    rho[count - 1] = ComplexMatrix::identity(n);
    let partial = surface.relation(&rho).expect("invertible generators");
    rho[count - 1] = elim::inverse(&partial).expect("invertible generators");
    FiniteDescription::with_full_local(surface, rho).expect("shapes agree")
}

/// Exact finite description with unipotent upper triangular integer
/// generators, so the relation closes exactly.
pub fn unipotent_fd(rng: &mut impl Rng, genus: usize, punctures: usize, n: usize) -> FiniteDescription<GaussianRational> {
    let surface = SurfaceData::new(genus, punctures).expect("at least one puncture");
    let count = surface.generator_count();
    let unipotent = |rng: &mut dyn rand::RngCore| {
        Matrix::from_fn(n, n, |i, j| match i.cmp(&j) {
            std::cmp::Ordering::Equal => GaussianRational::from_ints(1, 0),
            std::cmp::Ordering::Less => GaussianRational::from_ints(rng.gen_range(-2..=2), 0),
            std::cmp::Ordering::Greater => GaussianRational::from_ints(0, 0),
        })
    };
    let mut rho: Vec<Matrix<GaussianRational>> = (0..count).map(|_| unipotent(rng)).collect();
    rho[count - 1] = Matrix::identity(n);
    let partial = surface.relation(&rho).expect("invertible generators");
    rho[count - 1] = elim::inverse(&partial).expect("invertible generators");
    FiniteDescription::with_full_local(surface, rho).expect("shapes agree")
}
