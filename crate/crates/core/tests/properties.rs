use num_complex::Complex;
use proptest::prelude::*;
use rand::Rng;
use rh_core::filtr::{self, JumpGraph};
use rh_core::findesc::{self, GroupElement};
use rh_core::fuchsian::{self, LoopBasket};
use rh_core::io::{FdWire, ModelWire};
use rh_core::linalg::elim;
use rh_core::localmodel::{self, Factors};
use rh_core::matfun::{self, BranchSection, EntireFn};
use rh_core::random::{self, SeededRng};
use rh_core::{modify, rh, ComplexMatrix, ExactMatrix, GaussianRational, LocalModel, C64};

fn c(re: f64, im: f64) -> C64 {
    Complex::new(re, im)
}

fn rel(x: &ComplexMatrix, y: &ComplexMatrix) -> f64 {
    x.dist(y) / x.max_abs().max(1.0)
}

fn strip_model(rng: &mut SeededRng, n: usize, m: usize) -> LocalModel {
    let mut spec = random::spectrum_in(rng, n, 0.05, 0.95);
    for z in spec.iter_mut().skip(m) {
        *z = c(0.0, 0.0);
    }
    random::model_with_spectrum(rng, &spec, m)
}

fn conjugate(g: &ComplexMatrix, a: &ComplexMatrix) -> ComplexMatrix {
    &(g * a) * &elim::inverse(g).unwrap()
}

/// Block upper triangular maps for coordinate flags with equally many steps,
/// moved to random bases together with the flags.
fn filtered_model(rng: &mut SeededRng) -> (LocalModel, filtr::Flag, filtr::Flag) {
    let steps = rng.gen_range(1..=3);
    let le: Vec<usize> = (0..steps).map(|_| rng.gen_range(1..=2)).collect();
    let lf: Vec<usize> = (0..steps).map(|_| rng.gen_range(1..=2)).collect();
    let level = |sizes: &[usize]| -> Vec<usize> { sizes.iter().enumerate().flat_map(|(l, &d)| std::iter::repeat_n(l, d)).collect() };
    let (ve, vf) = (level(&le), level(&lf));
    let (n, m) = (ve.len(), vf.len());
    let t = ComplexMatrix::from_fn(m, n, |r, k| if vf[r] <= ve[k] { random::complex(rng) * 0.5 } else { c(0.0, 0.0) });
    let s = ComplexMatrix::from_fn(n, m, |r, k| if ve[r] <= vf[k] { random::complex(rng) * 0.5 } else { c(0.0, 0.0) });
    let model = LocalModel::from_parts(&s * &t, &t * &s, t, s);
    let (ge, gf) = (random::invertible(rng, n), random::invertible(rng, m));
    let cum = |sizes: &[usize]| {
        sizes
            .iter()
            .scan(0, |acc, d| {
                *acc += d;
                Some(*acc)
            })
            .collect::<Vec<_>>()
    };
    let flag = |g: &ComplexMatrix, sizes: &[usize]| {
        let d = g.rows();
        filtr::Flag::new(d, cum(sizes).iter().map(|&k| g.submatrix(0, d, 0, k)).collect(), 1e-9).unwrap()
    };
    (model.conjugate(&ge, &gf).unwrap(), flag(&ge, &le), flag(&gf, &lf))
}

fn config(cases: u32) -> ProptestConfig {
    ProptestConfig { cases, ..ProptestConfig::default() }
}

proptest! {
    #![proptest_config(config(64))]

    #[test]
    fn expm_is_one_plus_z_phi(seed in any::<u64>(), n in 1usize..=6) {
        let a = random::matrix(&mut random::rng(seed), n, n, 0.8);
        let e = matfun::apply_entire(&a, EntireFn::Expm2pi).unwrap();
        let phi = matfun::apply_entire(&a, EntireFn::PhiM2pi).unwrap();
        let rhs = &ComplexMatrix::identity(n) + &(&a * &phi);
        prop_assert!(rel(&e, &rhs) <= 1e-10);
    }

    #[test]
    fn plain_exponential_and_phi_agree(seed in any::<u64>(), n in 1usize..=5) {
        let a = random::matrix(&mut random::rng(seed), n, n, 0.8);
        let e = matfun::apply_entire(&a, EntireFn::ExpPlain).unwrap();
        let phi = matfun::apply_entire(&a, EntireFn::PhiPlain).unwrap();
        let rhs = &ComplexMatrix::identity(n) + &(&a * &phi);
        prop_assert!(rel(&e, &rhs) <= 1e-10);
    }

    #[test]
    fn similarity_equivariance(seed in any::<u64>(), n in 1usize..=6) {
        let mut rng = random::rng(seed);
        let a = random::matrix(&mut rng, n, n, 0.8);
        let g = random::conjugator(&mut rng, n);
        for f in [EntireFn::Expm2pi, EntireFn::PhiM2pi] {
            let lhs = matfun::apply_entire(&conjugate(&g, &a), f).unwrap();
            let rhs = conjugate(&g, &matfun::apply_entire(&a, f).unwrap());
            prop_assert!(rel(&lhs, &rhs) <= 1e-8);
        }
    }

    #[test]
    fn branch_log_inverts_exponential(seed in any::<u64>(), n in 1usize..=5, anchor in -1.0f64..0.5) {
        let mut rng = random::rng(seed);
        let m = random::invertible(&mut rng, n);
        let section = BranchSection::new(anchor);
        let l = matfun::branch_log(&m, &section, 1e-12).unwrap();
        let back = matfun::apply_entire(&l, EntireFn::Expm2pi).unwrap();
        prop_assert!(rel(&m, &back) <= 1e-8);
        for z in matfun::eigenvalues(&l).unwrap() {
            prop_assert!(z.re >= anchor - 1e-8 && z.re < anchor + 1.0 + 1e-8, "eigenvalue {} outside the strip", z);
        }
    }

    #[test]
    fn spectral_projectors_resolve_identity(seed in any::<u64>(), n in 1usize..=6) {
        let mut rng = random::rng(seed);
        let spec = random::spectrum_in(&mut rng, n, -1.0, 1.0);
        let a = conjugate(&random::conjugator(&mut rng, n), &ComplexMatrix::diag(&spec));
        let tol = 1e-9;
        let split = matfun::spectral_split(&a, tol).unwrap();
        let bound = 10.0 * tol * a.norm1().max(1.0) * 1e3;
        let mut sum = ComplexMatrix::zeros(n, n);
        for (i, ci) in split.clusters.iter().enumerate() {
            let p = &ci.projector;
            prop_assert!((p * p).dist(p) <= bound);
            for cj in split.clusters.iter().skip(i + 1) {
                prop_assert!((p * &cj.projector).max_abs() <= bound);
            }
            sum = &sum + p;
        }
        prop_assert!(sum.dist(&ComplexMatrix::identity(n)) <= bound);
    }

    #[test]
    fn intertwining_of_entire_functions(seed in any::<u64>(), n in 1usize..=4, m in 0usize..=4) {
        let model = random::raw_model(&mut random::rng(seed), n, m, 0.6);
        for f in [EntireFn::Expm2pi, EntireFn::PhiM2pi, EntireFn::ExpPlain, EntireFn::PhiPlain] {
            let lhs = &model.t * &matfun::apply_entire(&model.r, f).unwrap();
            let rhs = &matfun::apply_entire(&model.theta_f, f).unwrap() * &model.t;
            prop_assert!(lhs.dist(&rhs) <= 1e-9 * lhs.max_abs().max(1.0));
        }
    }

    #[test]
    fn nonzero_spectra_agree(seed in any::<u64>(), n in 1usize..=4, m in 1usize..=4) {
        let model = random::raw_model(&mut random::rng(seed), n, m, 0.8);
        let big = |a: &ComplexMatrix| {
            let mut v: Vec<C64> = matfun::eigenvalues(a).unwrap().into_iter().filter(|z| z.norm() > 1e-6).collect();
            v.sort_by(|x, y| x.re.total_cmp(&y.re).then(x.im.total_cmp(&y.im)));
            v
        };
        let (x, y) = (big(&model.r), big(&model.theta_f));
        prop_assert_eq!(x.len(), y.len());
        for (p, q) in x.iter().zip(&y) {
            prop_assert!((p - q).norm() <= 1e-6);
        }
    }

    #[test]
    fn reduce_factor_reduce(seed in any::<u64>(), n in 1usize..=3, m in 1usize..=3) {
        let model = random::raw_model(&mut random::rng(seed), n, m, 0.8);
        let red = model.reduce();
        prop_assert!(red.validate(1e-9).ok);
        let Factors::Pair { s, t } = red.factor(1e-9).unwrap() else {
            return Err(TestCaseError::fail("nonzero u factored as zero"));
        };
        let again = LocalModel::from_parts(model.r.clone(), model.theta_f.clone(), t, s).reduce();
        prop_assert!(again.u.dist(&red.u) <= 1e-9 * red.u.max_abs().max(1.0));
    }

    #[test]
    fn scaling_keeps_the_reduced_module(seed in any::<u64>(), n in 1usize..=3, m in 1usize..=3) {
        let mut rng = random::rng(seed);
        let model = random::raw_model(&mut rng, n, m, 0.8);
        let lambda = random::complex(&mut rng) + c(1.5, 0.0);
        let scaled = model.scaled(lambda);
        prop_assert!(scaled.validate(1e-9).unwrap().ok);
        let (a, b) = (model.reduce(), scaled.reduce());
        prop_assert!(a.u.dist(&b.u) <= 1e-9 * a.u.max_abs().max(1.0));
    }

    #[test]
    fn rh_relations_hold(seed in any::<u64>(), n in 1usize..=4, m in 0usize..=4) {
        let model = random::raw_model(&mut random::rng(seed), n, m, 0.6);
        let d = rh::rh_local(&model, 1e-9).unwrap();
        prop_assert!(d.validate(1e-9).unwrap().ok);
        let ve = &d.v * &d.c;
        prop_assert!(ve.dist(&(&d.t_e - &ComplexMatrix::identity(n))) <= 1e-9);
        prop_assert!((&d.c * &d.v).dist(&(&d.t_f - &ComplexMatrix::identity(m))) <= 1e-9);
    }

    #[test]
    fn rh_is_functorial(seed in any::<u64>(), n in 1usize..=3, m in 1usize..=3) {
        let mut rng = random::rng(seed);
        let model = random::raw_model(&mut rng, n, m, 0.6);
        let (ge, gf) = (random::conjugator(&mut rng, n), random::conjugator(&mut rng, m));
        let lhs = rh::rh_local(&model.conjugate(&ge, &gf).unwrap(), 1e-9).unwrap();
        let rhs = rh::rh_local(&model, 1e-9).unwrap().conjugate(&ge, &gf).unwrap();
        for (x, y) in [(&lhs.t_e, &rhs.t_e), (&lhs.t_f, &rhs.t_f), (&lhs.c, &rhs.c), (&lhs.v, &rhs.v)] {
            prop_assert!(rel(x, y) <= 1e-8);
        }
    }

    #[test]
    fn rh_of_direct_sum(seed in any::<u64>(), n in 1usize..=3, m in 0usize..=3) {
        let mut rng = random::rng(seed);
        let a = random::raw_model(&mut rng, n, m, 0.6);
        let b = random::raw_model(&mut rng, m.max(1), n, 0.6);
        let lhs = rh::rh_local(&a.direct_sum(&b), 1e-9).unwrap();
        let rhs = rh::rh_local(&a, 1e-9).unwrap().direct_sum(&rh::rh_local(&b, 1e-9).unwrap());
        for (x, y) in [(&lhs.t_e, &rhs.t_e), (&lhs.t_f, &rhs.t_f), (&lhs.c, &rhs.c), (&lhs.v, &rhs.v)] {
            prop_assert!(x.dist(y) <= 1e-10);
        }
    }

    #[test]
    fn scaling_data_is_isomorphic(seed in any::<u64>(), n in 1usize..=3, m in 1usize..=3) {
        let mut rng = random::rng(seed);
        let model = random::raw_model(&mut rng, n, m, 0.6);
        let lambda = random::complex(&mut rng) + c(1.5, 0.0);
        let a = rh::rh_local(&model, 1e-9).unwrap();
        let b = rh::rh_local(&model.scaled(lambda), 1e-9).unwrap();
        prop_assert!(rh::isomorphic_data(&a, &b, 1e-8, &mut rng).is_some());
    }

    #[test]
    fn round_trips(seed in any::<u64>(), n in 1usize..=4, m in 0usize..=4) {
        let model = strip_model(&mut random::rng(seed), n, m);
        let section = BranchSection::default();
        let data = rh::rh_local(&model, 1e-10).unwrap();
        let back = rh::inv_rh_local(&data, &section, 1e-10).unwrap();
        for (x, y) in [(&model.r, &back.r), (&model.theta_f, &back.theta_f), (&model.t, &back.t), (&model.s, &back.s)] {
            prop_assert!(x.dist(y) <= 1e-7);
        }
        let again = rh::rh_local(&back, 1e-10).unwrap();
        prop_assert!(again.c.dist(&data.c) <= 1e-7 && again.t_e.dist(&data.t_e) <= 1e-7);
    }

    #[test]
    fn shifts_validate_and_keep_monodromy(seed in any::<u64>(), n in 2usize..=4) {
        let mut rng = random::rng(seed);
        let spec = random::resonant_spectrum(&mut rng, n, 3);
        let nonzero = spec.iter().filter(|z| z.norm() != 0.0).count();
        let model = random::model_with_spectrum(&mut rng, &spec, nonzero.max(1));
        let nonzero_spec: Vec<C64> = spec.iter().copied().filter(|z| z.norm() != 0.0).collect();
        let alpha = nonzero_spec[rng.gen_range(0..nonzero_spec.len())];
        let e = |x: &ComplexMatrix| matfun::apply_entire(x, EntireFn::Expm2pi).unwrap();
        for shifted in [modify::shift_down(&model, alpha, 1e-9), modify::shift_up(&model, alpha, 1e-9)] {
            let shifted = shifted.unwrap();
            prop_assert!(shifted.validate(1e-8).unwrap().ok);
            prop_assert!(matfun::char_poly_distance(&e(&model.r), &e(&shifted.r)).unwrap() <= 1e-8);
            prop_assert!(matfun::char_poly_distance(&e(&model.theta_f), &e(&shifted.theta_f)).unwrap() <= 1e-8);
        }
    }

    #[test]
    fn make_good_trace_is_monotone(seed in any::<u64>(), n in 2usize..=5) {
        let mut rng = random::rng(seed);
        let spec = random::resonant_spectrum(&mut rng, n, 3);
        let nonzero = spec.iter().filter(|z| z.norm() != 0.0).count();
        let model = random::model_with_spectrum(&mut rng, &spec, nonzero);
        let g = modify::make_good(&model, 1e-9).unwrap();
        prop_assert!(matfun::resonance_report(&g.model.r, 1e-9).unwrap().good);
        for w in g.moves.windows(2) {
            prop_assert!(w[0].zero_multiplicity <= w[1].zero_multiplicity);
        }
    }

    #[test]
    fn model_json_round_trip_is_exact(seed in any::<u64>(), n in 1usize..=4, m in 0usize..=4) {
        let model = random::raw_model(&mut random::rng(seed), n, m, 0.7);
        let text = serde_json::to_string(&ModelWire::from_model(&model)).unwrap();
        let back: ModelWire = serde_json::from_str(&text).unwrap();
        prop_assert_eq!(back.to_model().unwrap(), model);
    }

    #[test]
    fn exact_fd_json_round_trip(seed in any::<u64>(), genus in 0usize..=1, k in 1usize..=2, n in 1usize..=3) {
        let fd = random::unipotent_fd(&mut random::rng(seed), genus, k, n);
        let text = serde_json::to_string(&FdWire::from_fd(&fd)).unwrap();
        let back: FdWire = serde_json::from_str(&text).unwrap();
        prop_assert_eq!(back.to_fd::<GaussianRational>().unwrap(), fd);
    }
}

fn graph(len: usize, target: usize) -> impl Strategy<Value = JumpGraph> {
    proptest::collection::vec(0..=target, len).prop_map(move |mut v| {
        v.sort_unstable();
        let mut points = vec![0];
        points.extend(v);
        JumpGraph::new(points, target).unwrap()
    })
}

fn graph_pair() -> impl Strategy<Value = (JumpGraph, JumpGraph)> {
    (0usize..=5, 0usize..=5).prop_flat_map(|(la, lb)| (graph(la, lb), graph(lb, la)))
}

proptest! {
    #![proptest_config(config(256))]

    #[test]
    fn compatible_iff_weights_exist((gs, gt) in graph_pair()) {
        let comp = filtr::compatible(&gs, &gt).unwrap();
        let w = filtr::polygonal_weights(&gs, &gt).unwrap();
        prop_assert_eq!(comp, w.is_some());
        if let Some(w) = w {
            prop_assert!(filtr::weights_valid(&gs, &gt, &w));
            let table = w.sign_table();
            for (j, &k) in gs.points.iter().enumerate() {
                prop_assert!(table[j][k] >= 0);
            }
            for (k, &j) in gt.points.iter().enumerate() {
                prop_assert!(table[j][k] <= 0);
            }
        }
    }

    #[test]
    fn jumps_are_monotone((gs, _gt) in graph_pair()) {
        let jumps = gs.jumps();
        for w in jumps.windows(2) {
            prop_assert!(w[0].0 < w[1].0 && w[0].1 < w[1].1);
        }
    }
}

proptest! {
    #![proptest_config(config(24))]

    #[test]
    fn graded_is_idempotent(seed in any::<u64>()) {
        let mut rng = random::rng(seed);
        let (model, fe, ff) = filtered_model(&mut rng);
        let gr = filtr::graded(&model, &fe, &ff, None, 1e-9).unwrap();
        prop_assert!(gr.validate(1e-8).unwrap().ok);
        let gr2 = filtr::graded(&gr, &fe, &ff, None, 1e-9).unwrap();
        for (x, y) in [(&gr.r, &gr2.r), (&gr.theta_f, &gr2.theta_f), (&gr.t, &gr2.t), (&gr.s, &gr2.s)] {
            prop_assert!(x.dist(y) <= 1e-8 * x.max_abs().max(1.0));
        }
    }

    #[test]
    fn deformation_is_isomorphic_away_from_zero(seed in any::<u64>()) {
        let mut rng = random::rng(seed);
        let (model, fe, ff) = filtered_model(&mut rng);
        let tau = random::complex(&mut rng) + c(0.2, 0.0);
        let def = filtr::deform(&model, &fe, &ff, None, tau, 1e-9).unwrap();
        prop_assert!(def.validate(1e-8).unwrap().ok);
        prop_assert!(localmodel::isomorphic(&model, &def, 1e-8, &mut rng).unwrap().is_some());
    }

    #[test]
    fn group_action_keeps_validity(seed in any::<u64>(), genus in 0usize..=1, k in 1usize..=2, n in 1usize..=3) {
        let mut rng = random::rng(seed);
        let fd = random::finite_description(&mut rng, genus, k, n);
        let h = GroupElement {
            g: random::conjugator(&mut rng, n),
            g_a: fd.local_dims().into_iter().map(|d| random::conjugator(&mut rng, d)).collect(),
        };
        let moved = findesc::act(&fd, &h).unwrap();
        prop_assert!(moved.validate(1e-8).unwrap().ok);
        prop_assert!(findesc::fd_isomorphic(&fd, &moved, 1e-8, &mut rng).unwrap().is_some());
    }

    #[test]
    fn jordan_holder_conserves_dimension(seed in any::<u64>(), genus in 0usize..=1, k in 1usize..=2, n in 1usize..=3) {
        let mut rng = random::rng(seed);
        let fd = random::unipotent_fd(&mut rng, genus, k, n);
        let jh = findesc::jordan_holder(&fd, 0.0, &mut rng).unwrap();
        prop_assert_eq!(jh.factors.iter().map(|f| f.n()).sum::<usize>(), fd.n());
        for (a, d) in fd.local_dims().into_iter().enumerate() {
            prop_assert_eq!(jh.factors.iter().map(|f| f.local_dims()[a]).sum::<usize>(), d);
        }
    }

    #[test]
    fn s_equivalence_is_reflexive_and_symmetric(seed in any::<u64>(), n in 1usize..=3) {
        let mut rng = random::rng(seed);
        let a = random::unipotent_fd(&mut rng, 1, 1, n);
        let b = random::unipotent_fd(&mut rng, 1, 1, n);
        prop_assert!(findesc::s_equivalent(&a, &a, 0.0, &mut rng).unwrap());
        let ab = findesc::s_equivalent(&a, &b, 0.0, &mut rng).unwrap();
        let ba = findesc::s_equivalent(&b, &a, 0.0, &mut rng).unwrap();
        prop_assert_eq!(ab, ba);
    }

    #[test]
    fn isomorphic_models_are_found(seed in any::<u64>(), n in 1usize..=3, m in 0usize..=3) {
        let mut rng = random::rng(seed);
        let model = random::raw_model(&mut rng, n, m, 0.6);
        let moved = model.conjugate(&random::conjugator(&mut rng, n), &random::conjugator(&mut rng, m)).unwrap();
        prop_assert!(localmodel::isomorphic(&model, &moved, 1e-8, &mut rng).unwrap().is_some());
    }
}

proptest! {
    #![proptest_config(config(8))]

    #[test]
    fn transport_is_homotopy_invariant(seed in any::<u64>(), angle in 0.0f64..std::f64::consts::TAU, bend in -0.15f64..0.15) {
        let mut rng = random::rng(seed);
        let sys = random::fuchsian_system(&mut rng, 3, 2, true);
        // punctures sit at radius >= 0.8, so this triangle encloses none
        let q = sys.base + Complex::from_polar(0.35, angle);
        let w = (sys.base + q) * 0.5 + Complex::from_polar(bend, angle + std::f64::consts::FRAC_PI_2);
        let tol = 1e-10;
        let direct = fuchsian::transport(&sys, &fuchsian::polyline(&[sys.base, q]), tol).unwrap();
        let detour = fuchsian::transport(&sys, &fuchsian::polyline(&[sys.base, w, q]), tol).unwrap();
        prop_assert!(direct.dist(&detour) <= 10.0 * 1e-9);
    }

    #[test]
    fn monodromy_relation_and_determinants(seed in any::<u64>()) {
        let mut rng = random::rng(seed);
        let sys = random::fuchsian_system(&mut rng, 3, 2, true);
        let basket = LoopBasket::standard(&sys, 1e-10).unwrap();
        let mono = fuchsian::monodromy(&sys, &basket, 1e-10).unwrap();
        let prod = mono.matrices.iter().fold(ComplexMatrix::identity(2), |acc, m| &acc * m);
        prop_assert!(prod.dist(&ComplexMatrix::identity(2)) <= 1e-6);
        for (site, mat) in mono.sites.iter().zip(&mono.matrices) {
            let det = mat[(0, 0)] * mat[(1, 1)] - mat[(0, 1)] * mat[(1, 0)];
            let want = (c(0.0, -std::f64::consts::TAU) * sys.residue(*site).trace()).exp();
            prop_assert!((det - want).norm() <= 1e-7);
        }
    }
}

#[test]
fn unipotent_and_trivial_are_s_equivalent_only() {
    let s = findesc::SurfaceData::new(1, 1).unwrap();
    let u = findesc::FiniteDescription::new(
        s,
        vec![ExactMatrix::from_int_rows(&[&[1, 1], &[0, 1]]), ExactMatrix::identity(2), ExactMatrix::identity(2)],
        vec![findesc::Puncture::empty(2)],
    )
    .unwrap();
    let triv = findesc::FiniteDescription::<GaussianRational>::trivial(s, 2);
    let mut rng = random::rng(1);
    assert!(findesc::s_equivalent(&u, &triv, 0.0, &mut rng).unwrap());
    assert!(findesc::fd_isomorphic(&u, &triv, 0.0, &mut rng).unwrap().is_none());
}
