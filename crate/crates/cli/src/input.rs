use std::io::Read;

use rh_core::io::{from_value, unwrap_envelope};
use serde::de::DeserializeOwned;
use serde_json::Value;

use crate::Failure;

/// Reads a JSON document from a path, or stdin for `-`. Output envelopes are
/// unwrapped to their `result`.
pub fn read_json(path: &str) -> Result<Value, Failure> {
    let text = if path == "-" {
        let mut s = String::new();
        std::io::stdin().read_to_string(&mut s).map_err(|e| Failure::Usage(format!("stdin: {e}")))?;
        s
    } else {
        std::fs::read_to_string(path).map_err(|e| Failure::Usage(format!("{path}: {e}")))?
    };
    let v: Value = serde_json::from_str(&text).map_err(|e| Failure::Usage(format!("{path}: malformed JSON: {e}")))?;
    Ok(unwrap_envelope(v))
}

pub fn parse<T: DeserializeOwned>(v: Value, at: &str) -> Result<T, Failure> {
    from_value(v).map_err(|e| Failure::Usage(format!("{at}: {e}")))
}

/// Conversion errors of already parsed wire data are input errors.
pub fn convert<T>(r: rh_core::Result<T>, at: &str) -> Result<T, Failure> {
    r.map_err(|e| Failure::Usage(format!("{at}: {e}")))
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Kind {
    Model,
    RhData,
    Fd,
    Fuchsian,
}

impl Kind {
    pub fn name(self) -> &'static str {
        match self {
            Kind::Model => "model",
            Kind::RhData => "rh-data",
            Kind::Fd => "fd",
            Kind::Fuchsian => "fuchsian",
        }
    }
}

pub fn detect(v: &Value, at: &str) -> Result<Kind, Failure> {
    let obj = v.as_object().ok_or_else(|| Failure::Usage(format!("{at}: expected a JSON object")))?;
    let kind = if obj.contains_key("rho") {
        Kind::Fd
    } else if obj.contains_key("T_E") {
        Kind::RhData
    } else if obj.contains_key("residues") {
        Kind::Fuchsian
    } else if obj.contains_key("R") {
        Kind::Model
    } else {
        return Err(Failure::Usage(format!("{at}: cannot tell the input kind (expected a key R, T_E, rho or residues)")));
    };
    Ok(kind)
}

/// `"re,im"` or `"re"`.
pub fn parse_complex(s: &str) -> Result<rh_core::C64, Failure> {
    let bad = || Failure::Usage(format!("--alpha: cannot parse {s:?}, expected re,im"));
    let mut parts = s.split(',').map(|p| p.trim().parse::<f64>());
    let re = parts.next().ok_or_else(bad)?.map_err(|_| bad())?;
    let im = match parts.next() {
        Some(x) => x.map_err(|_| bad())?,
        None => 0.0,
    };
    if parts.next().is_some() {
        return Err(bad());
    }
    Ok(rh_core::C64::new(re, im))
}
