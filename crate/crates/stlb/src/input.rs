//! Potential and boundary-condition inputs: JSON files, presets and
//! complex literals.

use std::path::Path;

use serde::Deserialize;
use stlb_core::boundary::{canonical_equivalents, CaseTag, FamilyKind};
use stlb_core::potential::{Term, DEFAULT_QUADRATURE_ORDER};
use stlb_core::{BoundaryMatrix, Complex64, Potential};

use crate::CliError;

/// A complex number written either as a bare real or as `[re, im]`.
#[derive(Debug, Clone, Copy, Deserialize)]
#[serde(untagged)]
pub enum ComplexJson {
    Real(f64),
    Pair([f64; 2]),
}

impl From<ComplexJson> for Complex64 {
    fn from(z: ComplexJson) -> Self {
        match z {
            ComplexJson::Real(r) => Complex64::new(r, 0.0),
            ComplexJson::Pair([r, i]) => Complex64::new(r, i),
        }
    }
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct TermJson {
    re: f64,
    #[serde(default)]
    im: f64,
    k: u32,
}

/// `{"terms": [{"re", "im", "k"}], "samples": null | [[re, im], ...], "quadrature_order": n}`;
/// terms mean `sum c_k cos(2 pi k x)`, samples are equispaced on `[0, 1]`.
#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct PotentialJson {
    #[serde(default)]
    terms: Vec<TermJson>,
    #[serde(default)]
    samples: Option<Vec<ComplexJson>>,
    #[serde(default)]
    quadrature_order: Option<usize>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct BoundaryJson {
    rows: [[ComplexJson; 4]; 2],
}

fn read(path: &Path) -> Result<String, CliError> {
    std::fs::read_to_string(path).map_err(|e| CliError::Input(format!("{}: {e}", path.display())))
}

pub fn parse_potential_json(text: &str) -> Result<Potential, CliError> {
    let p: PotentialJson = serde_json::from_str(text).map_err(|e| CliError::Input(format!("potential: {e}")))?;
    let terms = p.terms.iter().map(|t| Term { coeff: Complex64::new(t.re, t.im), k: t.k }).collect();
    let samples = p.samples.map(|s| s.into_iter().map(Complex64::from).collect());
    Ok(Potential::new(terms, samples, p.quadrature_order.unwrap_or(DEFAULT_QUADRATURE_ORDER))?)
}

pub fn load_potential(path: &Path) -> Result<Potential, CliError> {
    parse_potential_json(&read(path)?).map_err(|e| CliError::Input(format!("{}: {e}", path.display())))
}

pub fn parse_boundary_json(text: &str) -> Result<BoundaryMatrix, CliError> {
    let b: BoundaryJson =
        serde_json::from_str(text).map_err(|e| CliError::Input(format!("boundary conditions: {e}")))?;
    Ok(BoundaryMatrix::new(b.rows.map(|r| r.map(Complex64::from))))
}

/// Preset name or path to a JSON file with `{"rows": [[..4..], [..4..]]}`.
pub fn boundary_from_arg(arg: &str) -> Result<BoundaryMatrix, CliError> {
    let path = Path::new(arg);
    if arg.ends_with(".json") || path.is_file() {
        let text = read(path)?;
        return parse_boundary_json(&text).map_err(|e| CliError::Input(format!("{}: {e}", path.display())));
    }
    preset(arg)
}

/// Presets:
/// `periodic`, `antiperiodic`, `theorem1:b0=<z>[,case2]`,
/// `type-star:<a|b|c|d>[,d0=<z>|,b1=<z>][,case2]`.
pub fn preset(spec: &str) -> Result<BoundaryMatrix, CliError> {
    let bad = |m: String| CliError::Input(format!("boundary preset '{spec}': {m}"));
    let (name, rest) = spec.split_once(':').unwrap_or((spec, ""));
    let mut parts: Vec<&str> = rest.split(',').map(str::trim).filter(|s| !s.is_empty()).collect();
    let case2 = parts.contains(&"case2");
    parts.retain(|s| *s != "case2");
    let case_tag = if case2 { CaseTag::Case2 } else { CaseTag::Case1 };
    let mut params = Vec::new();
    let mut variant = None;
    for p in &parts {
        match p.split_once('=') {
            Some((k, v)) => params.push((k.trim(), parse_complex(v).map_err(|e| bad(e.to_string()))?)),
            None if variant.is_none() => variant = Some(*p),
            None => return Err(bad(format!("unexpected '{p}'"))),
        }
    }
    let get = |key: &str, default: Option<f64>| -> Result<Complex64, CliError> {
        params
            .iter()
            .find(|(k, _)| *k == key)
            .map(|(_, v)| *v)
            .or(default.map(|d| Complex64::new(d, 0.0)))
            .ok_or_else(|| bad(format!("missing {key}=<value>")))
    };
    let (kind, var, values) = match name {
        "periodic" if parts.is_empty() && !case2 => return Ok(BoundaryMatrix::periodic()),
        "antiperiodic" if parts.is_empty() && !case2 => return Ok(BoundaryMatrix::antiperiodic()),
        "theorem1" => (FamilyKind::Theorem1, 'a', vec![get("b0", None)?]),
        "type-star" => {
            let v = variant.ok_or_else(|| bad("expected a variant a, b, c or d".into()))?;
            match v {
                "a" => (FamilyKind::TypeStar, 'a', vec![get("d0", Some(2.0))?]),
                "b" => (FamilyKind::TypeStar, 'b', vec![get("b1", Some(2.0))?]),
                "c" => (FamilyKind::TypeStar, 'c', vec![]),
                "d" => (FamilyKind::TypeStar, 'd', vec![]),
                other => return Err(bad(format!("unknown variant '{other}'"))),
            }
        }
        _ => return Err(bad("unknown preset".into())),
    };
    let fam = canonical_equivalents(kind, case_tag)
        .into_iter()
        .find(|f| f.variant == var)
        .ok_or_else(|| bad("no such family".into()))?;
    if !fam.admits(&values) {
        return Err(bad(format!("parameters violate {}", fam.constraint)));
    }
    Ok(fam.matrix(&values)?)
}

/// `2`, `-1.5`, `1+2i`, `1-2i`, `2i`, `-i`, or `re,im`.
pub fn parse_complex(s: &str) -> Result<Complex64, CliError> {
    let t: String = s.chars().filter(|c| !c.is_whitespace()).collect();
    let bad = || CliError::Input(format!("cannot read '{s}' as a complex number"));
    if let Some((a, b)) = t.split_once(',') {
        let re = a.parse::<f64>().map_err(|_| bad())?;
        let im = b.parse::<f64>().map_err(|_| bad())?;
        return Ok(Complex64::new(re, im));
    }
    if let Some(body) = t.strip_suffix('i') {
        // split at the last sign that is not an exponent sign or the leading one
        let bytes = body.as_bytes();
        let mut cut = None;
        for k in (1..bytes.len()).rev() {
            if (bytes[k] == b'+' || bytes[k] == b'-') && !matches!(bytes[k - 1], b'e' | b'E') {
                cut = Some(k);
                break;
            }
        }
        let (re, im) = match cut {
            Some(k) => (&body[..k], &body[k..]),
            None => ("0", body),
        };
        let im = match im {
            "" | "+" => 1.0,
            "-" => -1.0,
            v => v.parse::<f64>().map_err(|_| bad())?,
        };
        let re = re.parse::<f64>().map_err(|_| bad())?;
        return Ok(Complex64::new(re, im));
    }
    t.parse::<f64>().map(|r| Complex64::new(r, 0.0)).map_err(|_| bad())
}

/// `alpha,t` for the two-term potential.
pub fn parse_pair(s: &str) -> Result<(f64, f64), CliError> {
    let bad = || CliError::Input(format!("expected 'a,b', got '{s}'"));
    let (a, b) = s.split_once(',').ok_or_else(bad)?;
    Ok((a.trim().parse().map_err(|_| bad())?, b.trim().parse().map_err(|_| bad())?))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn complex_literals() {
        let c = |s| parse_complex(s).unwrap();
        assert_eq!(c("2"), Complex64::new(2.0, 0.0));
        assert_eq!(c("1+2i"), Complex64::new(1.0, 2.0));
        assert_eq!(c("1.5e-3-2i"), Complex64::new(1.5e-3, -2.0));
        assert_eq!(c("-i"), Complex64::new(0.0, -1.0));
        assert_eq!(c("3i"), Complex64::new(0.0, 3.0));
        assert_eq!(c("2,-1"), Complex64::new(2.0, -1.0));
        assert!(parse_complex("x").is_err());
    }

    #[test]
    fn presets() {
        let a = preset("theorem1:b0=-2").unwrap();
        assert_eq!(a, BoundaryMatrix::real([1.0, -1.0, 0.0, -2.0], [0.0, 0.0, 1.0, -1.0]));
        let b = preset("type-star:a,d0=3,case2").unwrap();
        assert_eq!(b, BoundaryMatrix::real([1.0, 1.0, 0.0, 0.0], [0.0, 0.0, 1.0, 3.0]));
        assert!(preset("type-star:a,d0=-1").is_err());
        assert!(preset("nonsense").is_err());
    }

    #[test]
    fn potential_file_format() {
        let p = parse_potential_json(r#"{"terms": [{"re": 1.0, "k": 1}, {"re": 0.5, "im": 2.0, "k": 3}]}"#).unwrap();
        assert_eq!(p.terms().len(), 2);
        let e = parse_potential_json("{\n  \"terms\": [\n    {\"re\": true}\n  ]\n}").unwrap_err();
        assert!(e.to_string().contains("line 3"), "{e}");
    }
}
