//! JSON formats.
//!
//! A complex scalar is `[re, im]`; exact scalars use rational strings
//! `["p/q", "r/s"]`. A matrix is `{"rows", "cols", "data"}` with `data`
//! row-major.

use std::collections::BTreeMap;

use num_complex::Complex;
use num_rational::{BigRational, Rational64};
use num_traits::{FromPrimitive, ToPrimitive};
use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::error::{Error, Result};
use crate::filtr::{Flag, Slope};
use crate::findesc::{FiniteDescription, Puncture, SurfaceData};
use crate::fuchsian::FuchsianSystem;
use crate::localmodel::LocalModel;
use crate::matrix::Matrix;
use crate::rh::LocalRhData;
use crate::scalar::{format_rational, parse_rational, Field, GaussianRational};
use crate::{ComplexMatrix, C64};

fn bad(at: &str, what: impl std::fmt::Display) -> Error {
    Error::Invalid(format!("{at}: {what}"))
}

/// Scalars with a JSON form.
pub trait WireScalar: Field {
    fn to_json(&self) -> Value;
    fn from_json(v: &Value, at: &str) -> Result<Self>;
}

fn real_part<'a>(v: &'a Value, at: &str) -> Result<(&'a Value, &'a Value)> {
    match v.as_array().map(|a| a.as_slice()) {
        Some([re, im]) => Ok((re, im)),
        _ => Err(bad(at, "expected [re, im]")),
    }
}

impl WireScalar for C64 {
    fn to_json(&self) -> Value {
        serde_json::json!([self.re, self.im])
    }

    fn from_json(v: &Value, at: &str) -> Result<Self> {
        let (re, im) = real_part(v, at)?;
        let f = |x: &Value| -> Result<f64> {
            match x {
                Value::Number(n) => n.as_f64().ok_or_else(|| bad(at, "number out of range")),
                Value::String(s) => parse_rational(s).and_then(|r| r.to_f64()).ok_or_else(|| bad(at, format!("cannot parse {s:?}"))),
                _ => Err(bad(at, "expected a number")),
            }
        };
        Ok(Complex::new(f(re)?, f(im)?))
    }
}

impl WireScalar for GaussianRational {
    fn to_json(&self) -> Value {
        serde_json::json!([format_rational(&self.re), format_rational(&self.im)])
    }

    fn from_json(v: &Value, at: &str) -> Result<Self> {
        let (re, im) = real_part(v, at)?;
        let f = |x: &Value| -> Result<BigRational> {
            match x {
                Value::String(s) => parse_rational(s).ok_or_else(|| bad(at, format!("cannot parse {s:?}"))),
                Value::Number(n) => match n.as_i64() {
                    Some(i) => Ok(BigRational::from_integer(i.into())),
                    None => n.as_f64().and_then(BigRational::from_f64).ok_or_else(|| bad(at, "number out of range")),
                },
                _ => Err(bad(at, "expected a rational string")),
            }
        };
        Ok(Complex::new(f(re)?, f(im)?))
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MatrixWire {
    pub rows: usize,
    pub cols: usize,
    pub data: Vec<Value>,
}

impl MatrixWire {
    pub fn from_matrix<S: WireScalar>(m: &Matrix<S>) -> Self {
        MatrixWire { rows: m.rows(), cols: m.cols(), data: m.data().iter().map(|x| x.to_json()).collect() }
    }

    pub fn to_matrix<S: WireScalar>(&self, at: &str) -> Result<Matrix<S>> {
        if self.data.len() != self.rows * self.cols {
            return Err(Error::Shape(format!("{at}: {} entries for a {}x{} matrix", self.data.len(), self.rows, self.cols)));
        }
        let data = self.data.iter().enumerate().map(|(i, v)| S::from_json(v, &format!("{at}.data[{i}]"))).collect::<Result<Vec<_>>>()?;
        Matrix::from_vec(self.rows, self.cols, data)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ModelWire {
    pub n: usize,
    pub m: usize,
    #[serde(rename = "R")]
    pub r: MatrixWire,
    #[serde(rename = "thetaF")]
    pub theta_f: MatrixWire,
    pub t: MatrixWire,
    pub s: MatrixWire,
}

impl ModelWire {
    pub fn from_model(x: &LocalModel) -> Self {
        ModelWire {
            n: x.n(),
            m: x.m(),
            r: MatrixWire::from_matrix(&x.r),
            theta_f: MatrixWire::from_matrix(&x.theta_f),
            t: MatrixWire::from_matrix(&x.t),
            s: MatrixWire::from_matrix(&x.s),
        }
    }

    pub fn to_model(&self) -> Result<LocalModel> {
        let r: ComplexMatrix = self.r.to_matrix("R")?;
        let th: ComplexMatrix = self.theta_f.to_matrix("thetaF")?;
        let t: ComplexMatrix = self.t.to_matrix("t")?;
        let s: ComplexMatrix = self.s.to_matrix("s")?;
        for (m, at) in [(&r, "R"), (&th, "thetaF"), (&t, "t"), (&s, "s")] {
            m.ensure_finite(at)?;
        }
        let model = LocalModel::new(r, th, t, s)?;
        if model.n() != self.n || model.m() != self.m {
            return Err(Error::Shape(format!("n, m: declared ({}, {}), matrices give ({}, {})", self.n, self.m, model.n(), model.m())));
        }
        Ok(model)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RhWire {
    #[serde(rename = "T_E")]
    pub t_e: MatrixWire,
    #[serde(rename = "T_F")]
    pub t_f: MatrixWire,
    #[serde(rename = "C")]
    pub c: MatrixWire,
    #[serde(rename = "V")]
    pub v: MatrixWire,
}

impl RhWire {
    pub fn from_data(d: &LocalRhData) -> Self {
        RhWire {
            t_e: MatrixWire::from_matrix(&d.t_e),
            t_f: MatrixWire::from_matrix(&d.t_f),
            c: MatrixWire::from_matrix(&d.c),
            v: MatrixWire::from_matrix(&d.v),
        }
    }

    pub fn to_data(&self) -> Result<LocalRhData> {
        let d = LocalRhData {
            t_e: self.t_e.to_matrix("T_E")?,
            t_f: self.t_f.to_matrix("T_F")?,
            c: self.c.to_matrix("C")?,
            v: self.v.to_matrix("V")?,
        };
        for (m, at) in [(&d.t_e, "T_E"), (&d.t_f, "T_F"), (&d.c, "C"), (&d.v, "V")] {
            m.ensure_finite(at)?;
        }
        d.check_shapes()?;
        Ok(d)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PunctureWire {
    #[serde(rename = "tauF")]
    pub tau_f: MatrixWire,
    #[serde(rename = "C")]
    pub c: MatrixWire,
    #[serde(rename = "V")]
    pub v: MatrixWire,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FdWire {
    pub genus: usize,
    pub punctures: usize,
    pub rho: BTreeMap<String, MatrixWire>,
    pub local: Vec<PunctureWire>,
}

impl FdWire {
    pub fn from_fd<S: WireScalar>(fd: &FiniteDescription<S>) -> Self {
        FdWire {
            genus: fd.surface.genus,
            punctures: fd.surface.punctures,
            rho: fd.surface.labels().into_iter().zip(&fd.rho).map(|(l, m)| (l, MatrixWire::from_matrix(m))).collect(),
            local: fd
                .local
                .iter()
                .map(|p| PunctureWire {
                    tau_f: MatrixWire::from_matrix(&p.tau_f),
                    c: MatrixWire::from_matrix(&p.c),
                    v: MatrixWire::from_matrix(&p.v),
                })
                .collect(),
        }
    }

    pub fn to_fd<S: WireScalar>(&self) -> Result<FiniteDescription<S>> {
        let surface = SurfaceData::new(self.genus, self.punctures)?;
        let labels = surface.labels();
        if let Some(extra) = self.rho.keys().find(|k| !labels.contains(k)) {
            return Err(bad(&format!("rho.{extra}"), "unknown generator"));
        }
        let rho = labels
            .iter()
            .map(|l| {
                let at = format!("rho.{l}");
                self.rho.get(l).ok_or_else(|| bad(&at, "missing generator"))?.to_matrix(&at)
            })
            .collect::<Result<Vec<_>>>()?;
        let local = self
            .local
            .iter()
            .enumerate()
            .map(|(i, p)| {
                Ok(Puncture {
                    tau_f: p.tau_f.to_matrix(&format!("local[{i}].tauF"))?,
                    c: p.c.to_matrix(&format!("local[{i}].C"))?,
                    v: p.v.to_matrix(&format!("local[{i}].V"))?,
                })
            })
            .collect::<Result<Vec<_>>>()?;
        FiniteDescription::new(surface, rho, local)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FuchsianWire {
    pub punctures: Vec<C64>,
    pub residues: Vec<MatrixWire>,
    pub base: C64,
}

impl FuchsianWire {
    pub fn from_system(s: &FuchsianSystem) -> Self {
        FuchsianWire { punctures: s.punctures.clone(), residues: s.residues.iter().map(MatrixWire::from_matrix).collect(), base: s.base }
    }

    pub fn to_system(&self) -> Result<FuchsianSystem> {
        let residues = self.residues.iter().enumerate().map(|(i, m)| m.to_matrix(&format!("residues[{i}]"))).collect::<Result<Vec<_>>>()?;
        FuchsianSystem::new(self.punctures.clone(), residues, self.base)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SlopeWire {
    pub rank: u64,
    /// Rational string.
    pub degree: String,
}

/// Steps as basis matrices (columns span the step), optional slopes.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FlagWire {
    pub ambient: usize,
    pub steps: Vec<MatrixWire>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub slopes: Option<Vec<SlopeWire>>,
}

impl FlagWire {
    pub fn from_flag(f: &Flag) -> Self {
        FlagWire {
            ambient: f.ambient,
            steps: f.steps.iter().map(MatrixWire::from_matrix).collect(),
            slopes: f.slopes.as_ref().map(|v| {
                v.iter()
                    .map(|s| SlopeWire {
                        rank: s.rank,
                        degree: if *s.degree.denom() == 1 {
                            s.degree.numer().to_string()
                        } else {
                            format!("{}/{}", s.degree.numer(), s.degree.denom())
                        },
                    })
                    .collect()
            }),
        }
    }

    pub fn to_flag(&self, at: &str, tol: f64) -> Result<Flag> {
        let steps = self.steps.iter().enumerate().map(|(i, m)| m.to_matrix(&format!("{at}.steps[{i}]"))).collect::<Result<Vec<_>>>()?;
        let flag = Flag::new(self.ambient, steps, tol)?;
        match &self.slopes {
            None => Ok(flag),
            Some(v) => {
                let slopes = v
                    .iter()
                    .enumerate()
                    .map(|(i, s)| {
                        let d = parse_rational(&s.degree)
                            .and_then(|r| Some(Rational64::new(r.numer().to_i64()?, r.denom().to_i64()?)))
                            .ok_or_else(|| bad(&format!("{at}.slopes[{i}].degree"), "expected a rational"))?;
                        Ok(Slope { rank: s.rank, degree: d })
                    })
                    .collect::<Result<Vec<_>>>()?;
                flag.with_slopes(slopes)
            }
        }
    }
}

/// Accepts a bare object or an output envelope `{"config", "result"}`.
pub fn unwrap_envelope(v: Value) -> Value {
    match v {
        Value::Object(mut m) if m.contains_key("result") && m.contains_key("config") => m.remove("result").unwrap(),
        other => other,
    }
}

/// Typed parse with the path of the offending key in the message.
pub fn from_value<T: serde::de::DeserializeOwned>(v: Value) -> Result<T> {
    serde_path_to_error::deserialize(v).map_err(|e| Error::Invalid(format!("at {}: {}", e.path(), e.inner())))
}
