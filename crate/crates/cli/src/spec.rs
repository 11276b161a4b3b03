//! The JSON system description read by every subcommand.
//!
//! Rationals are always strings (`"3/4"`, `"-2"`, `"0.5"`), so exact values
//! survive the round trip through JSON.

use std::collections::BTreeMap;

use geodecomp::polyfield::{self, PolyVectorField};
use geodecomp::rational::{format_rational, parse_rational};
use geodecomp::{Error, GeometricStructure, NumericVectorField, Poly, RatMatrix, Rational};
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SystemSpec {
    pub dimension: usize,
    pub structure: StructureSpec,
    pub field: FieldSpec,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum StructureKindSpec {
    Euclidean,
    Symplectic,
    Minkowski,
    Custom,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct StructureSpec {
    pub kind: StructureKindSpec,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub gram: Option<Vec<Vec<String>>>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Term {
    pub c: String,
    pub e: Vec<u32>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase", deny_unknown_fields)]
pub enum FieldSpec {
    Builtin {
        name: String,
        #[serde(default)]
        params: BTreeMap<String, String>,
        /// Coefficient matrix of the `linear` built-in.
        #[serde(default, skip_serializing_if = "Option::is_none")]
        matrix: Option<Vec<Vec<String>>>,
    },
    Polynomial {
        components: Vec<Vec<Term>>,
    },
}

/// A parsed spec: the structure plus the field in exact and float form.
#[derive(Debug, Clone)]
pub struct System {
    pub structure: GeometricStructure,
    pub field: PolyVectorField,
    pub numeric: NumericVectorField,
    pub label: String,
}

fn parse_matrix(rows: &[Vec<String>]) -> Result<RatMatrix, Error> {
    let parsed = rows
        .iter()
        .map(|r| r.iter().map(|v| parse_rational(v)).collect::<Result<Vec<_>, _>>())
        .collect::<Result<Vec<_>, _>>()?;
    RatMatrix::from_rows(parsed)
}

fn format_matrix(m: &RatMatrix) -> Vec<Vec<String>> {
    (0..m.nrows())
        .map(|i| m.row(i).iter().map(format_rational).collect())
        .collect()
}

fn param(params: &BTreeMap<String, String>, name: &str) -> Result<Rational, Error> {
    params
        .get(name)
        .ok_or_else(|| Error::Parse(format!("missing parameter {name:?}")))
        .and_then(|v| parse_rational(v))
}

fn expect_params(params: &BTreeMap<String, String>, names: &[&str]) -> Result<(), Error> {
    if let Some(extra) = params.keys().find(|k| !names.contains(&k.as_str())) {
        return Err(Error::Parse(format!("unknown parameter {extra:?}")));
    }
    Ok(())
}

const LV_PARAMS: [&str; 4] = ["alpha", "beta", "gamma", "delta"];
const RIKITAKE_PARAMS: [&str; 2] = ["mu", "a"];

impl SystemSpec {
    pub fn from_json(text: &str) -> Result<Self, Error> {
        serde_json::from_str(text).map_err(|e| Error::Parse(format!("spec: {e}")))
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("spec is always serializable")
    }

    fn structure(&self) -> Result<GeometricStructure, Error> {
        let n = self.dimension;
        let canonical = match self.structure.kind {
            StructureKindSpec::Euclidean => GeometricStructure::euclidean(n)?,
            StructureKindSpec::Symplectic => GeometricStructure::symplectic(n)?,
            StructureKindSpec::Minkowski => GeometricStructure::minkowski(n)?,
            StructureKindSpec::Custom => {
                let rows = self
                    .structure
                    .gram
                    .as_ref()
                    .ok_or_else(|| Error::Parse("custom structure needs \"gram\"".into()))?;
                let g = parse_matrix(rows)?;
                if g.nrows() != n || g.ncols() != n {
                    return Err(Error::DimensionMismatch {
                        expected: n,
                        found: g.nrows().max(g.ncols()),
                    });
                }
                return GeometricStructure::from_rational_gram(g);
            }
        };
        if let Some(rows) = &self.structure.gram {
            if &parse_matrix(rows)? != &canonical.exact()?.gram {
                return Err(Error::Parse(
                    "\"gram\" disagrees with the named structure; use kind \"custom\"".into(),
                ));
            }
        }
        Ok(canonical)
    }

    fn field(&self) -> Result<(PolyVectorField, String), Error> {
        let n = self.dimension;
        let (field, label) = match &self.field {
            FieldSpec::Builtin { name, params, matrix } => {
                if matrix.is_some() && name != "linear" {
                    return Err(Error::Parse(format!("\"matrix\" is only valid for linear, not {name:?}")));
                }
                match name.as_str() {
                    "lotka_volterra" => {
                        expect_params(params, &LV_PARAMS)?;
                        let p: Vec<Rational> =
                            LV_PARAMS.iter().map(|k| param(params, k)).collect::<Result<_, _>>()?;
                        (polyfield::lotka_volterra(&p[0], &p[1], &p[2], &p[3]), "lotka_volterra")
                    }
                    "rikitake" => {
                        expect_params(params, &RIKITAKE_PARAMS)?;
                        let mu = param(params, "mu")?;
                        let a = param(params, "a")?;
                        (polyfield::rikitake(&mu, &a), "rikitake")
                    }
                    "linear" => {
                        expect_params(params, &[])?;
                        let rows = matrix
                            .as_ref()
                            .ok_or_else(|| Error::Parse("linear field needs \"matrix\"".into()))?;
                        (polyfield::linear(&parse_matrix(rows)?)?, "linear")
                    }
                    other => return Err(Error::Parse(format!("unknown builtin field {other:?}"))),
                }
            }
            FieldSpec::Polynomial { components } => {
                let comps = components
                    .iter()
                    .map(|terms| {
                        Poly::from_terms(
                            n,
                            terms
                                .iter()
                                .map(|t| Ok((t.e.clone(), parse_rational(&t.c)?)))
                                .collect::<Result<Vec<_>, Error>>()?,
                        )
                    })
                    .collect::<Result<Vec<_>, _>>()?;
                (PolyVectorField::new(comps)?, "polynomial")
            }
        };
        if field.dimension() != n {
            return Err(Error::DimensionMismatch {
                expected: n,
                found: field.dimension(),
            });
        }
        Ok((field, label.to_string()))
    }

    pub fn load(&self) -> Result<System, Error> {
        if self.dimension == 0 {
            return Err(Error::InvalidDimension("dimension must be positive".into()));
        }
        let structure = self.structure()?;
        let (field, label) = self.field()?;
        let numeric = field.to_numeric(label.clone());
        Ok(System {
            structure,
            field,
            numeric,
            label,
        })
    }

    /// The same system with every rational in lowest terms, polynomial terms
    /// merged and ordered, and redundant keys dropped.
    pub fn canonical(&self) -> Result<Self, Error> {
        let sys = self.load()?;
        let structure = StructureSpec {
            kind: self.structure.kind,
            gram: match self.structure.kind {
                StructureKindSpec::Custom => Some(format_matrix(&sys.structure.exact()?.gram)),
                _ => None,
            },
        };
        let field = match &self.field {
            FieldSpec::Builtin { name, params, matrix } => FieldSpec::Builtin {
                name: name.clone(),
                params: params
                    .iter()
                    .map(|(k, v)| Ok((k.clone(), format_rational(&parse_rational(v)?))))
                    .collect::<Result<_, Error>>()?,
                matrix: matrix
                    .as_ref()
                    .map(|rows| parse_matrix(rows).map(|m| format_matrix(&m)))
                    .transpose()?,
            },
            FieldSpec::Polynomial { .. } => FieldSpec::Polynomial {
                components: sys
                    .field
                    .components()
                    .iter()
                    .map(|p| {
                        p.terms()
                            .rev()
                            .map(|(m, c)| Term {
                                c: format_rational(c),
                                e: m.exponents().to_vec(),
                            })
                            .collect()
                    })
                    .collect(),
            },
        };
        Ok(Self {
            dimension: self.dimension,
            structure,
            field,
        })
    }

    /// Polynomial spec for an arbitrary exact field.
    pub fn polynomial(structure: StructureSpec, field: &PolyVectorField) -> Self {
        let canonical = field
            .components()
            .iter()
            .map(|p| {
                p.terms()
                    .rev()
                    .map(|(m, c)| Term {
                        c: format_rational(c),
                        e: m.exponents().to_vec(),
                    })
                    .collect()
            })
            .collect();
        Self {
            dimension: field.dimension(),
            structure,
            field: FieldSpec::Polynomial {
                components: canonical,
            },
        }
    }
}

impl StructureSpec {
    pub fn named(kind: StructureKindSpec) -> Self {
        Self { kind, gram: None }
    }

    pub fn custom(gram: &RatMatrix) -> Self {
        Self {
            kind: StructureKindSpec::Custom,
            gram: Some(format_matrix(gram)),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const LV: &str = r#"{
        "dimension": 2,
        "structure": {"kind": "symplectic"},
        "field": {"kind": "builtin", "name": "lotka_volterra",
                  "params": {"alpha": "2/4", "beta": "1", "gamma": "0.5", "delta": "3"}}
    }"#;

    #[test]
    fn loads_builtin() {
        let spec = SystemSpec::from_json(LV).unwrap();
        let sys = spec.load().unwrap();
        assert_eq!(sys.field.to_string(), "-x*y + 1/2*x, 3*x*y - 1/2*y");
        let canon = spec.canonical().unwrap();
        match &canon.field {
            FieldSpec::Builtin { params, .. } => {
                assert_eq!(params["alpha"], "1/2");
                assert_eq!(params["gamma"], "1/2");
            }
            _ => unreachable!(),
        }
    }

    #[test]
    fn polynomial_terms_merge() {
        let text = r#"{"dimension": 2, "structure": {"kind": "custom", "gram": [["2/2", "0"], ["1", "3"]]},
            "field": {"kind": "polynomial", "components": [
                [{"c": "1", "e": [1, 0]}, {"c": "1/2", "e": [1, 0]}, {"c": "0", "e": [0, 2]}],
                [{"c": "-1", "e": [1, 1]}]]}}"#;
        let spec = SystemSpec::from_json(text).unwrap();
        let canon = spec.canonical().unwrap();
        let FieldSpec::Polynomial { components } = &canon.field else {
            unreachable!()
        };
        assert_eq!(components[0], vec![Term { c: "3/2".into(), e: vec![1, 0] }]);
        assert_eq!(canon.structure.gram.as_ref().unwrap()[0][0], "1");
        assert_eq!(SystemSpec::from_json(&canon.to_json()).unwrap(), canon);
    }

    #[test]
    fn rejects_bad_specs() {
        let bad = [
            r#"{"dimension": 3, "structure": {"kind": "euclidean"},
                "field": {"kind": "builtin", "name": "lotka_volterra",
                          "params": {"alpha": "1", "beta": "1", "gamma": "1", "delta": "1"}}}"#,
            r#"{"dimension": 2, "structure": {"kind": "euclidean"},
                "field": {"kind": "builtin", "name": "lotka_volterra", "params": {"alpha": "1"}}}"#,
            r#"{"dimension": 2, "structure": {"kind": "euclidean"},
                "field": {"kind": "builtin", "name": "nope"}}"#,
            r#"{"dimension": 2, "structure": {"kind": "custom"},
                "field": {"kind": "builtin", "name": "linear", "matrix": [["1","0"],["0","1"]]}}"#,
            r#"{"dimension": 2, "structure": {"kind": "euclidean", "gram": [["2","0"],["0","1"]]},
                "field": {"kind": "builtin", "name": "linear", "matrix": [["1","0"],["0","1"]]}}"#,
            r#"{"dimension": 2, "structure": {"kind": "euclidean"}, "extra": 1,
                "field": {"kind": "builtin", "name": "linear", "matrix": [["1","0"],["0","1"]]}}"#,
        ];
        for text in bad {
            let r = SystemSpec::from_json(text).and_then(|s| s.load().map(|_| ()));
            assert!(r.is_err(), "{text}");
        }
    }

    #[test]
    fn singular_gram() {
        let text = r#"{"dimension": 2, "structure": {"kind": "custom", "gram": [["1","2"],["2","4"]]},
            "field": {"kind": "builtin", "name": "linear", "matrix": [["1","0"],["0","1"]]}}"#;
        let err = SystemSpec::from_json(text).unwrap().load().unwrap_err();
        assert!(matches!(err, Error::SingularGram(_)));
    }
}
