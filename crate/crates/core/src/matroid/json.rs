use serde::{Deserialize, Serialize};

use super::{GammoidSpec, LaminarFamily, Matroid, MultiGraph};
use crate::error::{Error, Result};
use crate::ground::default_names;

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Block {
    pub elements: Vec<String>,
    pub capacity: usize,
}

/// JSON description of a matroid, tagged by `"class"`.
///
/// ```json
/// {"class": "graphic", "vertices": ["u", "v"], "edges": [["e1", "u", "v"]]}
/// ```
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "class", rename_all = "snake_case")]
pub enum MatroidSpec {
    Uniform {
        #[serde(default, skip_serializing_if = "Option::is_none")]
        elements: Option<Vec<String>>,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        m: Option<usize>,
        k: usize,
    },
    Partition {
        blocks: Vec<Block>,
    },
    Laminar {
        family: Vec<Block>,
        #[serde(default, skip_serializing_if = "Vec::is_empty")]
        elements: Vec<String>,
    },
    Transversal {
        sets: Vec<Vec<String>>,
    },
    Graphic {
        vertices: Vec<String>,
        edges: Vec<(String, String, String)>,
    },
    Gammoid(GammoidSpec),
    Explicit {
        elements: Vec<String>,
        bases: Vec<Vec<String>>,
    },
}

fn blocks(b: &[Block]) -> Vec<(Vec<String>, usize)> {
    b.iter().map(|b| (b.elements.clone(), b.capacity)).collect()
}

impl MatroidSpec {
    pub fn build(&self) -> Result<Matroid> {
        match self {
            Self::Uniform { elements, m, k } => {
                let names = match (elements, m) {
                    (Some(e), _) => e.clone(),
                    (None, Some(m)) => default_names(*m),
                    (None, None) => {
                        return Err(Error::InvalidSpec("uniform matroid needs `elements` or `m`".into()))
                    }
                };
                Matroid::uniform_on(&crate::ground::GroundSet::new(names)?, *k)
            }
            Self::Partition { blocks: b } => Matroid::partition(&blocks(b)),
            Self::Laminar { family, elements } => {
                Ok(Matroid::laminar(&LaminarFamily::new(&blocks(family), elements)?))
            }
            Self::Transversal { sets } => Matroid::transversal(sets),
            Self::Graphic { vertices, edges } => MultiGraph::new(vertices, edges)?.graphic_matroid(),
            Self::Gammoid(spec) => spec.matroid(),
            Self::Explicit { elements, bases } => Matroid::explicit(elements, bases),
        }
    }

    /// Parses a matroid document; a `schema_version` field is checked and
    /// otherwise ignored.
    pub fn from_json(v: &serde_json::Value) -> Result<Self> {
        crate::check_schema_version(v)?;
        Ok(serde_json::from_value(v.clone())?)
    }
}
