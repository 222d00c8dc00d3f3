//! JSON files for models and families.
//!
//! A number is an integer or a `"p/q"` string (both exact), a JSON float,
//! or, in family files, `{"const": <number>, "terms": {"<param>": coef}}`.
//! Output is canonical: exact values become strings, floats stay JSON
//! numbers, and field order is fixed, so a parsed and re-serialized file is
//! stable byte for byte.

use num_bigint::BigInt;
use serde::Serialize;
use serde_json::{Map, Number, Value as Json};

use crate::error::{Error, Result};
use crate::model::ContactModel;
use crate::optimizer::{BoundaryTemplate, ComponentTemplate, Parameter, PotentialFamily, Value};
use crate::rational::{self, Rational};
use crate::seifert::SurgeryData;

fn err(path: &str, message: impl Into<String>) -> Error {
    Error::Parse {
        path: path.to_string(),
        message: message.into(),
    }
}

struct Ctx<'a> {
    params: &'a [Parameter],
}

fn field<'a>(obj: &'a Map<String, Json>, path: &str, key: &str) -> Result<&'a Json> {
    obj.get(key)
        .ok_or_else(|| err(path, format!("missing field \"{key}\"")))
}

fn object<'a>(v: &'a Json, path: &str) -> Result<&'a Map<String, Json>> {
    v.as_object().ok_or_else(|| err(path, "expected an object"))
}

fn array<'a>(v: &'a Json, path: &str) -> Result<&'a Vec<Json>> {
    v.as_array().ok_or_else(|| err(path, "expected an array"))
}

fn integer(v: &Json, path: &str) -> Result<i64> {
    v.as_i64().ok_or_else(|| err(path, "expected an integer"))
}

fn float(v: &Json, path: &str) -> Result<f64> {
    v.as_f64().ok_or_else(|| err(path, "expected a number"))
}

fn reject_unknown(obj: &Map<String, Json>, path: &str, known: &[&str]) -> Result<()> {
    match obj.keys().find(|k| !known.contains(&k.as_str())) {
        Some(k) => Err(err(path, format!("unknown field \"{k}\""))),
        None => Ok(()),
    }
}

impl Ctx<'_> {
    fn number(&self, v: &Json, path: &str) -> Result<Value> {
        match v {
            Json::Number(n) => {
                if n.is_i64() || n.is_u64() {
                    let i: BigInt = n.to_string().parse().expect("integer literal");
                    Ok(Value::Exact(Rational::from_integer(i)))
                } else {
                    let x = n.as_f64().ok_or_else(|| err(path, "number out of range"))?;
                    Ok(Value::Float(x))
                }
            }
            Json::String(s) => rational::parse(s)
                .map(Value::Exact)
                .map_err(|_| err(path, format!("\"{s}\" is not a rational of the form p/q"))),
            Json::Object(obj) => {
                reject_unknown(obj, path, &["const", "terms"])?;
                let constant = match obj.get("const") {
                    Some(c) => self.number(c, &format!("{path}.const"))?,
                    None => Value::Exact(rational::int(0)),
                };
                if matches!(constant, Value::Affine { .. }) {
                    return Err(err(&format!("{path}.const"), "nested affine value"));
                }
                let tpath = format!("{path}.terms");
                let terms = object(field(obj, path, "terms")?, &tpath)?;
                let mut out = Vec::new();
                for (name, coef) in terms {
                    let p = format!("{tpath}.{name}");
                    let idx = self
                        .params
                        .iter()
                        .position(|q| &q.name == name)
                        .ok_or_else(|| err(&p, format!("unknown parameter \"{name}\"")))?;
                    out.push((idx, float(coef, &p)?));
                }
                out.sort_by_key(|t| t.0);
                Ok(Value::Affine {
                    constant: Box::new(constant),
                    terms: out,
                })
            }
            _ => Err(err(path, "expected a number, a \"p/q\" string or an affine object")),
        }
    }

    fn boundary(&self, v: &Json, path: &str) -> Result<BoundaryTemplate> {
        let obj = object(v, path)?;
        reject_unknown(obj, path, &["K", "p", "id"])?;
        let k = self.number(field(obj, path, "K")?, &format!("{path}.K"))?;
        let p = integer(field(obj, path, "p")?, &format!("{path}.p"))?;
        if p < 1 {
            return Err(err(&format!("{path}.p"), "stabilizer order must be at least 1"));
        }
        let id = field(obj, path, "id")?
            .as_str()
            .ok_or_else(|| err(&format!("{path}.id"), "expected a string"))?
            .to_string();
        Ok(BoundaryTemplate { k, p, id })
    }

    fn component(&self, v: &Json, path: &str) -> Result<ComponentTemplate> {
        let obj = object(v, path)?;
        reject_unknown(
            obj,
            path,
            &["k_min", "k_max", "breaks", "pieces", "lower", "upper"],
        )?;
        let k_min = self.number(field(obj, path, "k_min")?, &format!("{path}.k_min"))?;
        let k_max = self.number(field(obj, path, "k_max")?, &format!("{path}.k_max"))?;
        let breaks = match obj.get("breaks") {
            Some(b) => {
                let bp = format!("{path}.breaks");
                array(b, &bp)?
                    .iter()
                    .enumerate()
                    .map(|(i, x)| self.number(x, &format!("{bp}[{i}]")))
                    .collect::<Result<Vec<_>>>()?
            }
            None => Vec::new(),
        };
        let pp = format!("{path}.pieces");
        let pieces = array(field(obj, path, "pieces")?, &pp)?
            .iter()
            .enumerate()
            .map(|(i, piece)| {
                let ip = format!("{pp}[{i}]");
                let coeffs = array(piece, &ip)?;
                if coeffs.is_empty() {
                    return Err(err(&ip, "a piece needs at least one coefficient"));
                }
                coeffs
                    .iter()
                    .enumerate()
                    .map(|(j, c)| self.number(c, &format!("{ip}[{j}]")))
                    .collect()
            })
            .collect::<Result<Vec<_>>>()?;
        if pieces.len() != breaks.len() + 1 {
            return Err(err(
                &pp,
                format!(
                    "{} interior breakpoints need {} pieces, found {}",
                    breaks.len(),
                    breaks.len() + 1,
                    pieces.len()
                ),
            ));
        }
        Ok(ComponentTemplate {
            k_min,
            k_max,
            breaks,
            pieces,
            lower: self.boundary(field(obj, path, "lower")?, &format!("{path}.lower"))?,
            upper: self.boundary(field(obj, path, "upper")?, &format!("{path}.upper"))?,
        })
    }
}

fn parse_json(text: &str) -> Result<Json> {
    serde_json::from_str(text).map_err(|e| {
        err(
            &format!("line {} column {}", e.line(), e.column()),
            e.to_string(),
        )
    })
}

/// Parses a family file. A model file is a family without parameters.
pub fn parse_family(text: &str) -> Result<PotentialFamily> {
    let root = parse_json(text)?;
    let obj = object(&root, "$")?;
    reject_unknown(obj, "$", &["genus", "surgeries", "components", "tame", "parameters"])?;
    let genus = field(obj, "$", "genus")?
        .as_u64()
        .and_then(|g| u32::try_from(g).ok())
        .ok_or_else(|| err("$.genus", "expected a nonnegative integer"))?;
    let surgeries = array(field(obj, "$", "surgeries")?, "$.surgeries")?
        .iter()
        .enumerate()
        .map(|(i, s)| {
            let sp = format!("$.surgeries[{i}]");
            match array(s, &sp)?.as_slice() {
                [p, q] => Ok((integer(p, &format!("{sp}[0]"))?, integer(q, &format!("{sp}[1]"))?)),
                _ => Err(err(&sp, "expected a pair [p, q]")),
            }
        })
        .collect::<Result<Vec<_>>>()?;
    SurgeryData::new(genus, surgeries.clone()).map_err(|e| err("$.surgeries", e.to_string()))?;
    let tame = match obj.get("tame") {
        Some(t) => t.as_bool().ok_or_else(|| err("$.tame", "expected a boolean"))?,
        None => false,
    };
    let parameters = match obj.get("parameters") {
        Some(ps) => array(ps, "$.parameters")?
            .iter()
            .enumerate()
            .map(|(i, p)| {
                let pp = format!("$.parameters[{i}]");
                let o = object(p, &pp)?;
                reject_unknown(o, &pp, &["name", "lo", "hi"])?;
                let name = field(o, &pp, "name")?
                    .as_str()
                    .ok_or_else(|| err(&format!("{pp}.name"), "expected a string"))?
                    .to_string();
                let lo = float(field(o, &pp, "lo")?, &format!("{pp}.lo"))?;
                let hi = float(field(o, &pp, "hi")?, &format!("{pp}.hi"))?;
                if !(lo <= hi) {
                    return Err(err(&pp, format!("empty box [{lo}, {hi}]")));
                }
                Ok(Parameter { name, lo, hi })
            })
            .collect::<Result<Vec<_>>>()?,
        None => Vec::new(),
    };
    for (i, p) in parameters.iter().enumerate() {
        if parameters[..i].iter().any(|q| q.name == p.name) {
            return Err(err(&format!("$.parameters[{i}].name"), format!("duplicate parameter \"{}\"", p.name)));
        }
    }
    let ctx = Ctx { params: &parameters };
    let components = array(field(obj, "$", "components")?, "$.components")?
        .iter()
        .enumerate()
        .map(|(i, c)| ctx.component(c, &format!("$.components[{i}]")))
        .collect::<Result<Vec<_>>>()?;
    Ok(PotentialFamily {
        parameters,
        genus,
        surgeries,
        components,
        tame,
    })
}

/// Parses a model file. Parameters are not allowed.
pub fn parse_model(text: &str) -> Result<ContactModel> {
    let fam = parse_family(text)?;
    if !fam.parameters.is_empty() {
        return Err(err("$.parameters", "a model file cannot declare parameters"));
    }
    fam.decode(&[]).map_err(|e| err("$.components", e.to_string()))
}

#[derive(Serialize)]
struct ParamOut<'a> {
    name: &'a str,
    lo: f64,
    hi: f64,
}

#[derive(Serialize)]
struct BoundaryOut<'a> {
    #[serde(rename = "K")]
    k: Json,
    p: i64,
    id: &'a str,
}

#[derive(Serialize)]
struct ComponentOut<'a> {
    k_min: Json,
    k_max: Json,
    breaks: Vec<Json>,
    pieces: Vec<Vec<Json>>,
    lower: BoundaryOut<'a>,
    upper: BoundaryOut<'a>,
}

#[derive(Serialize)]
struct FamilyOut<'a> {
    genus: u32,
    surgeries: &'a [(i64, i64)],
    tame: bool,
    #[serde(skip_serializing_if = "Vec::is_empty")]
    parameters: Vec<ParamOut<'a>>,
    components: Vec<ComponentOut<'a>>,
}

fn float_json(x: f64) -> Json {
    Number::from_f64(x).map_or(Json::Null, Json::Number)
}

fn value_json(v: &Value, params: &[Parameter]) -> Json {
    match v {
        Value::Exact(r) => Json::String(rational::format(r)),
        Value::Float(x) => float_json(*x),
        Value::Affine { constant, terms } => {
            let mut t = Map::new();
            for &(i, c) in terms {
                t.insert(params[i].name.clone(), float_json(c));
            }
            let mut m = Map::new();
            m.insert("const".into(), value_json(constant, params));
            m.insert("terms".into(), Json::Object(t));
            Json::Object(m)
        }
    }
}

/// Canonical JSON text, pretty-printed with a trailing newline.
pub fn family_to_json(fam: &PotentialFamily) -> String {
    let ps = &fam.parameters;
    fn boundary<'a>(b: &'a BoundaryTemplate, ps: &[Parameter]) -> BoundaryOut<'a> {
        BoundaryOut {
            k: value_json(&b.k, ps),
            p: b.p,
            id: &b.id,
        }
    }
    let out = FamilyOut {
        genus: fam.genus,
        surgeries: &fam.surgeries,
        tame: fam.tame,
        parameters: ps
            .iter()
            .map(|p| ParamOut {
                name: &p.name,
                lo: p.lo,
                hi: p.hi,
            })
            .collect(),
        components: fam
            .components
            .iter()
            .map(|c| ComponentOut {
                k_min: value_json(&c.k_min, ps),
                k_max: value_json(&c.k_max, ps),
                breaks: c.breaks.iter().map(|b| value_json(b, ps)).collect(),
                pieces: c
                    .pieces
                    .iter()
                    .map(|p| p.iter().map(|v| value_json(v, ps)).collect())
                    .collect(),
                lower: boundary(&c.lower, ps),
                upper: boundary(&c.upper, ps),
            })
            .collect(),
    };
    let mut s = serde_json::to_string_pretty(&out).expect("serializable");
    s.push('\n');
    s
}

/// Family without parameters describing `m`.
pub fn model_template(m: &ContactModel) -> PotentialFamily {
    let components = m
        .components
        .iter()
        .map(|c| {
            let pot = &c.potential;
            let (ends, pieces): (Vec<Value>, Vec<Vec<Value>>) = match pot.exact() {
                Some(ex) => (
                    ex.breaks.iter().cloned().map(Value::Exact).collect(),
                    ex.polys
                        .iter()
                        .map(|p| p.coeffs().iter().cloned().map(Value::Exact).collect())
                        .collect(),
                ),
                None => (
                    pot.breaks().iter().map(|&x| Value::Float(x)).collect(),
                    pot.polys()
                        .iter()
                        .map(|p| p.coeffs().iter().map(|&x| Value::Float(x)).collect())
                        .collect(),
                ),
            };
            let pieces = pieces
                .into_iter()
                .map(|p| if p.is_empty() { vec![Value::Exact(rational::int(0))] } else { p })
                .collect();
            let b = |o: &crate::model::BoundaryOrbit| BoundaryTemplate {
                k: Value::Exact(o.k_crit.clone()),
                p: o.p,
                id: o.id.clone(),
            };
            ComponentTemplate {
                k_min: ends[0].clone(),
                k_max: ends[ends.len() - 1].clone(),
                breaks: ends[1..ends.len() - 1].to_vec(),
                pieces,
                lower: b(&c.lower),
                upper: b(&c.upper),
            }
        })
        .collect();
    PotentialFamily {
        parameters: Vec::new(),
        genus: m.surgery.genus,
        surgeries: m.surgery.coefficients.clone(),
        components,
        tame: m.tame,
    }
}

pub fn model_to_json(m: &ContactModel) -> String {
    family_to_json(&model_template(m))
}

/// `%g`-style text with 12 significant digits.
pub fn format_sig(x: f64) -> String {
    if !x.is_finite() {
        return if x.is_nan() {
            "nan".into()
        } else if x > 0.0 {
            "inf".into()
        } else {
            "-inf".into()
        };
    }
    if x == 0.0 {
        return "0".into();
    }
    let sci = format!("{:.11e}", x);
    let (mant, exp) = sci.split_once('e').expect("scientific form");
    let exp: i32 = exp.parse().expect("exponent");
    let trim = |s: String| -> String {
        if s.contains('.') {
            s.trim_end_matches('0').trim_end_matches('.').to_string()
        } else {
            s
        }
    };
    if (-5..12).contains(&exp) {
        let decimals = (11 - exp).max(0) as usize;
        trim(format!("{:.*}", decimals, x))
    } else {
        format!("{}e{}", trim(mant.to_string()), exp)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const FLAT: &str = r#"{
        "genus": 0,
        "surgeries": [[1, 2]],
        "tame": true,
        "components": [{
            "k_min": -1, "k_max": "1",
            "pieces": [[1]],
            "lower": {"K": -1, "p": 1, "id": "a"},
            "upper": {"K": "1", "p": 1, "id": "b"}
        }]
    }"#;

    #[test]
    fn flat_model_loads() {
        let m = parse_model(FLAT).unwrap();
        assert!(m.is_valid());
        assert!(m.components[0].potential.is_exact());
        assert!((m.systolic_ratio().unwrap() - 0.5).abs() < 1e-12);
    }

    #[test]
    fn canonical_round_trip() {
        let once = family_to_json(&parse_family(FLAT).unwrap());
        let twice = family_to_json(&parse_family(&once).unwrap());
        assert_eq!(once, twice);
        assert!(once.ends_with("}\n"));
        assert!(once.contains("\"K\": \"-1\""));
        let m = parse_model(&once).unwrap();
        assert_eq!(model_to_json(&m), once);
    }

    #[test]
    fn floats_and_affine_survive() {
        let text = r#"{"genus": 0, "surgeries": [[1, 1]], "tame": true,
            "parameters": [{"name": "t", "lo": 0.5, "hi": 3.0}],
            "components": [{"k_min": 1, "k_max": 2,
              "pieces": [[{"const": 0.0, "terms": {"t": 1.0}}, 0.25]],
              "lower": {"K": 1, "p": 1, "id": "a"},
              "upper": {"K": 2, "p": 1, "id": "b"}}]}"#;
        let fam = parse_family(text).unwrap();
        let once = family_to_json(&fam);
        assert_eq!(parse_family(&once).unwrap(), fam);
        assert!(once.contains("0.25"));
        assert!(!fam.decode(&[1.5]).unwrap().components[0].potential.is_exact());
    }

    #[test]
    fn diagnostics_carry_paths() {
        let bad = FLAT.replace("\"p\": 1, \"id\": \"a\"", "\"p\": 0, \"id\": \"a\"");
        match parse_model(&bad) {
            Err(Error::Parse { path, .. }) => assert_eq!(path, "$.components[0].lower.p"),
            other => panic!("{other:?}"),
        }
        let bad = FLAT.replace("\"K\": \"1\"", "\"K\": \"1/0\"");
        match parse_model(&bad) {
            Err(Error::Parse { path, .. }) => assert_eq!(path, "$.components[0].upper.K"),
            other => panic!("{other:?}"),
        }
        match parse_model("{\n  \"genus\": 0,\n  oops\n}") {
            Err(Error::Parse { path, .. }) => assert!(path.starts_with("line 3")),
            other => panic!("{other:?}"),
        }
        let bad = FLAT.replace("[[1]]", "[[1], [2]]");
        assert!(matches!(parse_model(&bad), Err(Error::Parse { path, .. }) if path.ends_with("pieces")));
    }

    #[test]
    fn sig_formatting() {
        assert_eq!(format_sig(0.5), "0.5");
        assert_eq!(format_sig(1.0), "1");
        assert_eq!(format_sig(-31.0 / 30.0), "-1.03333333333");
        assert_eq!(format_sig(1e-7), "1e-7");
        assert_eq!(format_sig(123456789012345.0), "1.23456789012e14");
        assert_eq!(format_sig(0.0), "0");
        assert_eq!(format_sig(2.0 / 3.0), "0.666666666667");
    }
}
