use rand::Rng;
use rh_core::filtr::Flag;
use rh_core::io::{FdWire, FlagWire, FuchsianWire, ModelWire, RhWire};
use rh_core::localmodel::CanonicalKind;
use rh_core::{random, rh, LocalModel, C64};
use serde_json::{json, Value};

use crate::{Cli, Failure, GenKind, ModeArg, Outcome};

fn to_value<T: serde::Serialize>(x: &T) -> Value {
    serde_json::to_value(x).expect("serializable")
}

/// Nested subspaces from random bases, dimensions strictly increasing.
fn random_flag(rng: &mut random::SeededRng, ambient: usize) -> Flag {
    let mut dims: Vec<usize> = (1..ambient).filter(|_| rng.gen_bool(0.5)).collect();
    dims.push(ambient);
    let basis = random::invertible(rng, ambient);
    let steps = dims.iter().map(|&d| basis.submatrix(0, ambient, 0, d)).collect();
    Flag::new(ambient, steps, 1e-9).expect("nested by construction")
}

fn sized(name: &str, x: usize, lo: usize, hi: usize) -> Result<(), Failure> {
    if x < lo || x > hi {
        return Err(Failure::Usage(format!("--{name} must lie in {lo}..={hi}, got {x}")));
    }
    Ok(())
}

pub fn run(cli: &Cli, kind: GenKind, n: usize, m: usize, k: usize, genus: usize, open: bool) -> Outcome {
    let mut rng = random::rng(cli.seed);
    sized("n", n, 1, 12)?;
    sized("m", m, 0, 12)?;
    let anchor = cli.section;
    // In the strip, with enough zeros when m < n.
    let strip_model = |rng: &mut random::SeededRng| -> LocalModel {
        let mut spec = random::spectrum_in(rng, n, anchor + 0.05, anchor + 0.95);
        for z in spec.iter_mut().skip(m) {
            *z = C64::new(0.0, 0.0);
        }
        random::model_with_spectrum(rng, &spec, m)
    };
    if m < n && !(anchor <= 0.0 && anchor > -1.0) && !matches!(kind, GenKind::ResonantModel) {
        return Err(Failure::Usage("m < n needs eigenvalue 0, so --section must lie in (-1, 0]".into()));
    }
    Ok(match kind {
        GenKind::Model => to_value(&ModelWire::from_model(&strip_model(&mut rng))),
        GenKind::ResonantModel => {
            sized("n", n, 2, 12)?;
            let spec = random::resonant_spectrum(&mut rng, n, 3);
            let nonzero = spec.iter().filter(|z| z.norm() != 0.0).count();
            let m = m.max(nonzero);
            to_value(&ModelWire::from_model(&random::model_with_spectrum(&mut rng, &spec, m)))
        }
        GenKind::BrokenModel => {
            let mut model = strip_model(&mut rng);
            if model.m() == 0 {
                return Err(Failure::Usage("a broken model needs m >= 1".into()));
            }
            model.theta_f[(0, 0)] += C64::new(0.5, 0.0);
            to_value(&ModelWire::from_model(&model))
        }
        GenKind::RhData => {
            let model = strip_model(&mut rng);
            to_value(&RhWire::from_data(&rh::rh_local(&model, cli.tol)?))
        }
        GenKind::Fd => {
            sized("k", k, 1, 8)?;
            match cli.mode {
                ModeArg::Numeric => to_value(&FdWire::from_fd(&random::finite_description(&mut rng, genus, k, n))),
                ModeArg::Exact => to_value(&FdWire::from_fd(&random::unipotent_fd(&mut rng, genus, k, n))),
            }
        }
        GenKind::Fuchsian => {
            sized("k", k, 1, 8)?;
            to_value(&FuchsianWire::from_system(&random::fuchsian_system(&mut rng, k, n, !open)))
        }
        GenKind::AssembleInput => {
            sized("k", k, 1, 8)?;
            let sys = random::fuchsian_system(&mut rng, k, n, !open);
            let mut residues = sys.residues.clone();
            if sys.has_infinity(cli.tol) {
                residues.push(sys.residue_at_infinity());
            }
            let models = residues
                .iter()
                .map(|a| {
                    let (model, _) = LocalModel::canonical_from_residue(a, CanonicalKind::Meromorphic, cli.tol)?;
                    Ok(to_value(&ModelWire::from_model(&model)))
                })
                .collect::<rh_core::Result<Vec<_>>>()?;
            json!({ "system": FuchsianWire::from_system(&sys), "models": models })
        }
        GenKind::StabilityInput => {
            let model = strip_model(&mut rng);
            let fe = random_flag(&mut rng, model.n());
            let ff = if model.m() == 0 { Flag::trivial(0) } else { random_flag(&mut rng, model.m()) };
            json!({
                "model": ModelWire::from_model(&model),
                "flagE": FlagWire::from_flag(&fe),
                "flagF": FlagWire::from_flag(&ff),
            })
        }
    })
}
