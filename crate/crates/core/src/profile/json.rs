//! JSON profile documents.
//!
//! ```json
//! { "pieces": [ { "interval": [0, 1], "expr": "(exp (neg t))" } ] }
//! { "builtin": "cyl_caps_KM", "params": { "M": 3 } }
//! ```

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use super::{Expr, Piece, RadialProfile};
use crate::error::{Error, Result};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PieceDoc {
    pub interval: [f64; 2],
    pub expr: String,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum ProfileDoc {
    Pieces {
        pieces: Vec<PieceDoc>,
    },
    Builtin {
        builtin: String,
        #[serde(default)]
        params: BTreeMap<String, f64>,
    },
}

impl ProfileDoc {
    pub fn from_json(src: &str) -> Result<Self> {
        serde_json::from_str(src).map_err(|e| Error::InvalidProfile(format!("bad profile JSON: {e}")))
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("profile documents always serialize")
    }

    /// Builds the explicit piecewise profile. Builtin references are resolved
    /// by [`crate::families`].
    pub fn to_profile(&self) -> Result<RadialProfile> {
        match self {
            ProfileDoc::Pieces { pieces } => {
                let pieces = pieces
                    .iter()
                    .map(|p| Ok(Piece::new(p.interval[0], p.interval[1], Expr::parse(&p.expr)?)))
                    .collect::<Result<Vec<_>>>()?;
                RadialProfile::new(pieces)
            }
            ProfileDoc::Builtin { builtin, params } => crate::families::builtin_profile(builtin, params),
        }
    }
}

impl From<&RadialProfile> for ProfileDoc {
    fn from(profile: &RadialProfile) -> Self {
        ProfileDoc::Pieces {
            pieces: profile
                .pieces()
                .iter()
                .map(|p| PieceDoc { interval: [p.a, p.b], expr: p.expr.to_string() })
                .collect(),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::profile::{JetFunction, Side};

    #[test]
    fn parses_piecewise_document() {
        let doc = ProfileDoc::from_json(
            r#"{"pieces":[{"interval":[0,0.5],"expr":"1"},{"interval":[0.5,1],"expr":"(add 0.5 (mul 0 t))"}]}"#,
        );
        // values disagree at 0.5
        assert!(doc.unwrap().to_profile().is_err());
        let doc = ProfileDoc::from_json(r#"{"pieces":[{"interval":[0,1],"expr":"(exp (neg t))"}]}"#).unwrap();
        let p = doc.to_profile().unwrap();
        assert!((p.value(1.0).unwrap() - (-1f64).exp()).abs() < 1e-15);
    }

    #[test]
    fn round_trips_through_json() {
        let doc = ProfileDoc::from_json(
            r#"{"pieces":[{"interval":[0,0.7071067811865476],"expr":"(div 1 (sqrt (sub 1 (mul t t))))"},{"interval":[0.7071067811865476,1],"expr":"(div 1 t)"}]}"#,
        )
        .unwrap();
        let p = doc.to_profile().unwrap();
        let again = ProfileDoc::from_json(&ProfileDoc::from(&p).to_json()).unwrap().to_profile().unwrap();
        for &t in &[0.1, 0.5, 0.9, 1.0] {
            assert_eq!(p.jet(t, 2, Side::Both).unwrap(), again.jet(t, 2, Side::Both).unwrap());
        }
    }

    #[test]
    fn builtin_reference() {
        let doc = ProfileDoc::from_json(r#"{"builtin":"cyl_caps_KM","params":{"M":3}}"#).unwrap();
        let p = doc.to_profile().unwrap();
        assert!((p.value(1.0).unwrap() - (4.0 - 8f64.sqrt())).abs() < 1e-14);
        assert!(ProfileDoc::from_json(r#"{"builtin":"nope"}"#).unwrap().to_profile().is_err());
        assert!(ProfileDoc::from_json("[1,2]").is_err());
    }
}
