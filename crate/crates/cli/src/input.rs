use std::path::Path;

use idp_lab::batyrev::{BatyrevParams, BatyrevStructure, CanonicalHeight};
use idp_lab::fan::{Fan, FanSpec, HeightVector};
use idp_lab::linalg::{IntVector, LatticePoint};
use idp_lab::sweep::SweepGrid;
use serde::de::DeserializeOwned;
use serde::Deserialize;
use serde_json::Value;

use crate::Failure;

pub enum Spec {
    Batyrev(BatyrevParams),
    Fan(FanSpec),
    Points { p: Vec<LatticePoint>, q: Vec<LatticePoint> },
}

#[derive(Deserialize)]
struct PointPair {
    p: Vec<LatticePoint>,
    q: Vec<LatticePoint>,
}

/// Canonical `{d, e, f}` or one raw entry per ray.
#[derive(Clone, Debug, Deserialize)]
#[serde(untagged)]
pub enum HeightInput {
    // Raw first: a derived struct also accepts a three-element array.
    Raw(IntVector),
    Canonical(CanonicalHeight),
}

#[derive(Clone, Debug, Deserialize)]
pub struct Heights {
    pub h: HeightInput,
    pub h_prime: HeightInput,
}

pub fn read_json(path: &Path) -> Result<Value, Failure> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| Failure::invalid(format!("cannot read {}: {e}", path.display())))?;
    serde_json::from_str(&text).map_err(|e| Failure::invalid(format!("{}: {e}", path.display())))
}

fn parse<T: DeserializeOwned>(value: Value, what: &str) -> Result<T, Failure> {
    serde_json::from_value(value).map_err(|e| Failure::invalid(format!("malformed {what}: {e}")))
}

/// Reads a spec file; any `h`/`h_prime` keys in it are returned as heights.
pub fn read_spec(path: &Path) -> Result<(Spec, Option<Heights>), Failure> {
    let value = read_json(path)?;
    let obj = value
        .as_object()
        .ok_or_else(|| Failure::invalid(format!("{}: expected a JSON object", path.display())))?;
    let heights = if obj.contains_key("h") || obj.contains_key("h_prime") {
        Some(parse(value.clone(), "heights")?)
    } else {
        None
    };
    let mut body = obj.clone();
    body.remove("h");
    body.remove("h_prime");
    let body = Value::Object(body);
    let spec = if obj.contains_key("points") {
        let pair: PointPair = parse(body["points"].clone(), "point sets")?;
        Spec::Points { p: pair.p, q: pair.q }
    } else if obj.contains_key("p") {
        Spec::Batyrev(parse(body, "five-collection spec")?)
    } else if obj.contains_key("rays") {
        Spec::Fan(parse(body, "fan spec")?)
    } else {
        return Err(Failure::invalid(format!(
            "{}: expected a fan spec (\"rays\"), a five-collection spec (\"p\") or point sets (\"points\")",
            path.display()
        )));
    };
    Ok((spec, heights))
}

pub fn read_heights(path: &Path) -> Result<Heights, Failure> {
    parse(read_json(path)?, "heights")
}

pub fn read_grid(path: &Path) -> Result<SweepGrid, Failure> {
    parse(read_json(path)?, "sweep grid")
}

pub fn read_plane_rays(path: &Path) -> Result<Vec<[i64; 2]>, Failure> {
    let value = read_json(path)?;
    let rays = value.get("rays").cloned().unwrap_or(value);
    parse(rays, "planar ray list")
}

pub fn parse_alpha(text: &str) -> Result<IntVector, Failure> {
    let entries = text
        .split(',')
        .map(|s| {
            s.trim()
                .parse()
                .map_err(|_| Failure::invalid(format!("--alpha: {s:?} is not an integer")))
        })
        .collect::<Result<Vec<_>, _>>()?;
    Ok(IntVector::new(entries))
}

/// A fan together with the structure it came from, if any.
pub enum BuiltFan {
    Batyrev(Box<BatyrevStructure>),
    Plain(Fan),
}

impl BuiltFan {
    pub fn fan(&self) -> &Fan {
        match self {
            BuiltFan::Batyrev(st) => st.fan(),
            BuiltFan::Plain(f) => f,
        }
    }

    pub fn resolve(&self, h: &HeightInput) -> Result<HeightVector, Failure> {
        match (h, self) {
            (HeightInput::Raw(v), _) => Ok(HeightVector::new(v.clone())),
            (HeightInput::Canonical(c), BuiltFan::Batyrev(st)) => Ok(st.heights_from_canonical(c)?),
            (HeightInput::Canonical(_), BuiltFan::Plain(_)) => Err(Failure::invalid(
                "{d, e, f} heights need a five-collection spec; give one entry per ray instead",
            )),
        }
    }
}

pub fn build_fan(spec: Spec) -> Result<BuiltFan, Failure> {
    match spec {
        Spec::Batyrev(p) => Ok(BuiltFan::Batyrev(Box::new(BatyrevStructure::build(p)?))),
        Spec::Fan(f) => Ok(BuiltFan::Plain(Fan::from_spec(&f)?)),
        Spec::Points { .. } => Err(Failure::invalid("point sets do not define a fan")),
    }
}
