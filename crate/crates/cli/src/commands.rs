use rh_core::filtr::{self, Flag, JumpGraph};
use rh_core::findesc::{self, FiniteDescription};
use rh_core::fuchsian::{self, LoopBasket};
use rh_core::io::{FdWire, FlagWire, FuchsianWire, ModelWire, RhWire, WireScalar};
use rh_core::modify::{self, Direction};
use rh_core::rh::{self, LocalRhData};
use rh_core::{quiver, random, BranchSection, GaussianRational, LocalModel, Report, C64};
use serde::Deserialize;
use serde_json::{json, Map, Value};

use crate::input::{self, convert, detect, parse, read_json, Kind};
use crate::{Cli, Command, Failure, ModeArg, Outcome, Target};

pub fn run(cli: &Cli) -> Outcome {
    match &cli.command {
        Command::Validate { input } => validate(cli, input),
        Command::Rh { input } => rh_cmd(cli, input),
        Command::InvRh { input } => inv_rh(cli, input),
        Command::Shear { input, target, alpha } => shear(cli, input, *target, alpha.as_deref()),
        Command::Jh { input } => match cli.mode {
            ModeArg::Numeric => jh::<C64>(cli, input),
            ModeArg::Exact => jh::<GaussianRational>(cli, input),
        },
        Command::SEquiv { a, b } => s_equiv(cli, a, b),
        Command::StabilityCheck { input } => stability(cli, input),
        Command::Monodromy { input } => monodromy(cli, input),
        Command::Assemble { input } => assemble(cli, input),
        Command::Gen { kind, n, m, k, genus, open } => crate::gen::run(cli, *kind, *n, m.unwrap_or(*n), *k, *genus, *open),
    }
}

fn to_value<T: serde::Serialize>(x: &T) -> Value {
    serde_json::to_value(x).expect("serializable")
}

/// `base` (an object) with extra keys.
fn extend(base: Value, extra: Value) -> Value {
    let mut m: Map<String, Value> = match base {
        Value::Object(m) => m,
        _ => unreachable!("wire types serialize to objects"),
    };
    if let Value::Object(e) = extra {
        m.extend(e);
    }
    Value::Object(m)
}

fn load_model(path: &str) -> Result<LocalModel, Failure> {
    let w: ModelWire = parse(read_json(path)?, path)?;
    convert(w.to_model(), path)
}

fn load_rh(path: &str) -> Result<LocalRhData, Failure> {
    let w: RhWire = parse(read_json(path)?, path)?;
    convert(w.to_data(), path)
}

fn load_fd<S: WireScalar>(v: Value, at: &str) -> Result<FiniteDescription<S>, Failure> {
    let w: FdWire = parse(v, at)?;
    convert(w.to_fd(), at)
}

fn checked(report: Report) -> Result<Report, Failure> {
    if report.ok {
        Ok(report)
    } else {
        Err(Failure::Rejected(json!({ "report": report })))
    }
}

fn validate(cli: &Cli, path: &str) -> Outcome {
    let v = read_json(path)?;
    let kind = detect(&v, path)?;
    let report = match kind {
        Kind::Model => {
            let w: ModelWire = parse(v, path)?;
            convert(w.to_model(), path)?.validate(cli.tol)?
        }
        Kind::RhData => {
            let w: RhWire = parse(v, path)?;
            convert(w.to_data(), path)?.validate(cli.tol)?
        }
        Kind::Fd => match cli.mode {
            ModeArg::Numeric => load_fd::<C64>(v, path)?.validate(cli.tol)?,
            ModeArg::Exact => load_fd::<GaussianRational>(v, path)?.validate(cli.tol)?,
        },
        Kind::Fuchsian => {
            let w: FuchsianWire = parse(v, path)?;
            let sys = convert(w.to_system(), path)?;
            let mut rep = Report::new(cli.tol);
            let inf = sys.residue_at_infinity();
            rep.push("residue at infinity", inf.max_abs(), f64::INFINITY);
            if sys.has_infinity(cli.tol) {
                rep.warnings.push("infinity is a singular point".into());
            }
            LoopBasket::standard(&sys, cli.tol)?;
            rep
        }
    };
    let out = json!({ "kind": kind.name(), "report": report });
    if report.ok {
        Ok(out)
    } else {
        Err(Failure::Rejected(out))
    }
}

fn rh_cmd(cli: &Cli, path: &str) -> Outcome {
    let model = load_model(path)?;
    checked(model.validate(cli.tol)?)?;
    let data = rh::rh_local(&model, cli.tol)?;
    let report = data.validate(cli.tol)?;
    Ok(extend(to_value(&RhWire::from_data(&data)), json!({ "report": report })))
}

fn inv_rh(cli: &Cli, path: &str) -> Outcome {
    let data = load_rh(path)?;
    checked(data.validate(cli.tol)?)?;
    let model = rh::inv_rh_local(&data, &BranchSection::new(cli.section), cli.tol)?;
    let report = model.validate(cli.tol)?;
    Ok(extend(to_value(&ModelWire::from_model(&model)), json!({ "report": report })))
}

fn shear(cli: &Cli, path: &str, target: Target, alpha: Option<&str>) -> Outcome {
    let model = load_model(path)?;
    checked(model.validate(cli.tol)?)?;
    let (out, moves) = match target {
        Target::Good => {
            let g = modify::make_good(&model, cli.tol)?;
            (g.model, g.moves)
        }
        Target::Down | Target::Up => {
            let a = input::parse_complex(alpha.ok_or_else(|| Failure::Usage("--alpha is required for --target down|up".into()))?)?;
            let (next, direction) = match target {
                Target::Down => (modify::shift_down(&model, a, cli.tol)?, Direction::Down),
                _ => (modify::shift_up(&model, a, cli.tol)?, Direction::Up),
            };
            let step = json!({ "direction": direction, "alpha": [a.re, a.im] });
            return Ok(extend(to_value(&ModelWire::from_model(&next)), json!({ "moves": [step], "report": next.validate(cli.tol)? })));
        }
    };
    let good = rh_core::matfun::resonance_report(&out.r, cli.tol)?.good;
    Ok(extend(to_value(&ModelWire::from_model(&out)), json!({ "moves": moves, "good": good, "report": out.validate(cli.tol)? })))
}

fn unresolved(e: rh_core::Error) -> Failure {
    match e {
        rh_core::Error::Unresolved(msg) => Failure::Rejected(json!({ "status": "unresolved", "message": msg })),
        other => other.into(),
    }
}

fn jh<S: WireScalar>(cli: &Cli, path: &str) -> Outcome {
    let fd: FiniteDescription<S> = load_fd(read_json(path)?, path)?;
    let mut rng = random::rng(cli.seed);
    let res = findesc::jordan_holder(&fd, cli.tol, &mut rng).map_err(unresolved)?;
    let graded = res.graded(fd.surface)?;
    Ok(json!({
        "factors": res.factors.iter().map(|f| to_value(&FdWire::from_fd(f))).collect::<Vec<_>>(),
        "dims": res.factors.iter().map(|f| f.total_dim()).collect::<Vec<_>>(),
        "classes": res.classes.iter().map(|&(f, m)| json!({ "factor": f, "multiplicity": m })).collect::<Vec<_>>(),
        "graded": FdWire::from_fd(&graded),
    }))
}

fn s_equiv(cli: &Cli, a: &str, b: &str) -> Outcome {
    let (va, vb) = (read_json(a)?, read_json(b)?);
    let (ka, kb) = (detect(&va, a)?, detect(&vb, b)?);
    if ka != kb {
        return Err(Failure::Usage(format!("{a} is {} but {b} is {}", ka.name(), kb.name())));
    }
    let mut rng = random::rng(cli.seed);
    let tol = cli.tol;
    let answer = match (ka, cli.mode) {
        (Kind::Fd, ModeArg::Numeric) => {
            findesc::s_equivalent(&load_fd::<C64>(va, a)?, &load_fd::<C64>(vb, b)?, tol, &mut rng).map_err(unresolved)?
        }
        (Kind::Fd, ModeArg::Exact) => {
            findesc::s_equivalent(&load_fd::<GaussianRational>(va, a)?, &load_fd::<GaussianRational>(vb, b)?, tol, &mut rng)
                .map_err(unresolved)?
        }
        (Kind::RhData, _) => {
            let x: RhWire = parse(va, a)?;
            let y: RhWire = parse(vb, b)?;
            let (x, y) = (convert(x.to_data(), a)?, convert(y.to_data(), b)?);
            quiver_s_equiv(&x.as_quiver(), &y.as_quiver(), tol, &mut rng)?
        }
        (Kind::Model, _) => {
            let x: ModelWire = parse(va, a)?;
            let y: ModelWire = parse(vb, b)?;
            let (x, y) = (convert(x.to_model(), a)?, convert(y.to_model(), b)?);
            quiver_s_equiv(&x.as_quiver(), &y.as_quiver(), tol, &mut rng)?
        }
        (Kind::Fuchsian, _) => return Err(Failure::Usage("s-equiv takes finite descriptions, RH data or models".into())),
    };
    Ok(json!({ "kind": ka.name(), "s_equivalent": answer }))
}

fn quiver_s_equiv(x: &quiver::QuiverRep<C64>, y: &quiver::QuiverRep<C64>, tol: f64, rng: &mut random::SeededRng) -> Result<bool, Failure> {
    if x.total_dim() > findesc::JH_MAX_DIM || y.total_dim() > findesc::JH_MAX_DIM {
        return Err(Failure::Domain(format!("total dimension exceeds {}", findesc::JH_MAX_DIM)));
    }
    quiver::s_equivalent(x, y, tol, rng).map_err(|msg| Failure::Rejected(json!({ "status": "unresolved", "message": msg })))
}

#[derive(Deserialize)]
struct StabilityInput {
    model: ModelWire,
    #[serde(rename = "flagE")]
    flag_e: FlagWire,
    #[serde(rename = "flagF")]
    flag_f: FlagWire,
}

fn strings<T: ToString>(v: &[T]) -> Vec<String> {
    v.iter().map(|x| x.to_string()).collect()
}

fn graph_json(g: &JumpGraph) -> Value {
    json!({ "points": g.points, "target_len": g.target_len, "jumps": g.jumps() })
}

fn special(flag: &Flag) -> Value {
    match flag.slopes {
        Some(_) => filtr::slope_special_check(flag).map_or(Value::Null, Value::Bool),
        None => Value::Null,
    }
}

fn stability(cli: &Cli, path: &str) -> Outcome {
    let inp: StabilityInput = parse(read_json(path)?, path)?;
    let model = convert(inp.model.to_model(), &format!("{path}: model"))?;
    let fe = convert(inp.flag_e.to_flag("flagE", cli.tol), path)?;
    let ff = convert(inp.flag_f.to_flag("flagF", cli.tol), path)?;
    if fe.ambient != model.n() || ff.ambient != model.m() {
        return Err(Failure::Usage(format!(
            "{path}: flags live in dimensions ({}, {}), the model has (n, m) = ({}, {})",
            fe.ambient,
            ff.ambient,
            model.n(),
            model.m()
        )));
    }
    checked(model.validate(cli.tol)?)?;
    let (gs, mut warnings) = filtr::jump_graph(&model.s, &ff, &fe, cli.tol)?;
    let (gt, w2) = filtr::jump_graph(&model.t, &fe, &ff, cli.tol)?;
    warnings.extend(w2);
    let compatible = filtr::compatible(&gs, &gt)?;
    let weights =
        filtr::polygonal_weights(&gs, &gt)?.map(|w| json!({ "p": strings(&w.p), "q": strings(&w.q), "sign_table": w.sign_table() }));
    let mut out = json!({
        "compatible": compatible,
        "weights": weights,
        "special": { "E": special(&fe), "F": special(&ff) },
        "jump_graph_s": graph_json(&gs),
        "jump_graph_t": graph_json(&gt),
    });
    if !warnings.is_empty() {
        out["warnings"] = json!(warnings);
    }
    Ok(out)
}

fn monodromy(cli: &Cli, path: &str) -> Outcome {
    let w: FuchsianWire = parse(read_json(path)?, path)?;
    let sys = convert(w.to_system(), path)?;
    let basket = LoopBasket::standard(&sys, cli.tol)?;
    let m = fuchsian::monodromy(&sys, &basket, cli.tol)?;
    Ok(json!({
        "sites": m.sites,
        "matrices": m.matrices.iter().map(rh_core::io::MatrixWire::from_matrix).collect::<Vec<_>>(),
        "relation_residual": m.relation_residual,
        "char_poly_distance": m.char_poly_distance,
    }))
}

#[derive(Deserialize)]
struct AssembleInput {
    system: FuchsianWire,
    models: Vec<ModelWire>,
}

fn assemble(cli: &Cli, path: &str) -> Outcome {
    let inp: AssembleInput = parse(read_json(path)?, path)?;
    let sys = convert(inp.system.to_system(), &format!("{path}: system"))?;
    let models = inp
        .models
        .iter()
        .enumerate()
        .map(|(i, m)| convert(m.to_model(), &format!("{path}: models[{i}]")))
        .collect::<Result<Vec<_>, _>>()?;
    let basket = LoopBasket::standard(&sys, cli.tol)?;
    let res = fuchsian::assemble_fd(&sys, &models, &basket, cli.tol)?;
    let out = json!({ "fd": FdWire::from_fd(&res.fd), "sites": res.sites, "report": res.report });
    if res.report.ok {
        Ok(out)
    } else {
        Err(Failure::Rejected(out))
    }
}
