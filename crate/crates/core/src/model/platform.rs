//! Declarative platform model: exception hierarchy of the runtime and
//! libraries plus the exceptions documented on external methods.

use std::collections::{HashMap, HashSet};
use std::fmt;
use std::path::{Path, PathBuf};

use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ExceptionKind {
    Checked,
    Unchecked,
    Error,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PlatformType {
    pub name: String,
    #[serde(default)]
    pub superclass: Option<String>,
    pub kind: ExceptionKind,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub recoverable: Option<bool>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PlatformMethod {
    pub signature: String,
    #[serde(default)]
    pub throws: Vec<String>,
    /// Qualified return type, used to type chained calls such as
    /// `Runtime.getRuntime().halt(1)`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub returns: Option<String>,
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct PlatformDocument {
    types: Vec<PlatformType>,
    methods: Vec<PlatformMethod>,
}

/// `Owner#name(arity)`.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct MethodSignature {
    pub owner: String,
    pub name: String,
    pub arity: usize,
}

impl MethodSignature {
    pub fn new(owner: impl Into<String>, name: impl Into<String>, arity: usize) -> Self {
        MethodSignature {
            owner: owner.into(),
            name: name.into(),
            arity,
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        let (owner, rest) = s.split_once('#')?;
        let (name, arity) = rest.strip_suffix(')')?.split_once('(')?;
        let ident_ok = |x: &str| {
            !x.is_empty()
                && x.chars().next().is_some_and(|c| c.is_alphabetic() || c == '_' || c == '$')
                && x.chars().all(|c| c.is_alphanumeric() || c == '_' || c == '$')
        };
        if owner.is_empty() || !owner.split('.').all(ident_ok) {
            return None;
        }
        if !(ident_ok(name) || name == "<init>") {
            return None;
        }
        let arity = arity.parse().ok()?;
        Some(MethodSignature::new(owner, name, arity))
    }
}

impl fmt::Display for MethodSignature {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}#{}({})", self.owner, self.name, self.arity)
    }
}

#[derive(Debug, Error)]
pub enum PlatformError {
    #[error("{path}: cannot read platform model: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("{path}: schema violation at `{pointer}`: {message}")]
    Schema {
        path: PathBuf,
        pointer: String,
        message: String,
    },
    #[error("type `{ty}` has undeclared superclass `{superclass}`")]
    DanglingSuperclass { ty: String, superclass: String },
    #[error("method `{signature}` documents undeclared exception `{exception}`")]
    DanglingThrows { signature: String, exception: String },
    #[error("type `{0}` is declared more than once")]
    DuplicateType(String),
    #[error("method signature `{0}` is declared more than once")]
    DuplicateSignature(String),
    #[error("malformed method signature `{0}`, expected `Owner#name(arity)`")]
    BadSignature(String),
    #[error("expected exactly one root exception type without a superclass, found {0}")]
    Roots(usize),
    #[error("superclass cycle through `{0}`")]
    Cycle(String),
}

/// A validated platform model.
#[derive(Debug, Clone, Default)]
pub struct PlatformModel {
    types: Vec<PlatformType>,
    methods: Vec<PlatformMethod>,
    type_index: HashMap<String, usize>,
    method_index: HashMap<MethodSignature, usize>,
}

impl PlatformModel {
    pub fn new(types: Vec<PlatformType>, methods: Vec<PlatformMethod>) -> Result<Self, PlatformError> {
        let mut type_index = HashMap::new();
        for (i, t) in types.iter().enumerate() {
            if type_index.insert(t.name.clone(), i).is_some() {
                return Err(PlatformError::DuplicateType(t.name.clone()));
            }
        }
        let mut roots = 0;
        for t in &types {
            match &t.superclass {
                None => roots += 1,
                Some(s) if !type_index.contains_key(s) => {
                    return Err(PlatformError::DanglingSuperclass {
                        ty: t.name.clone(),
                        superclass: s.clone(),
                    })
                }
                Some(_) => {}
            }
        }
        for t in &types {
            let mut cur = t;
            let mut steps = 0;
            while let Some(s) = &cur.superclass {
                steps += 1;
                if steps > types.len() {
                    return Err(PlatformError::Cycle(t.name.clone()));
                }
                cur = &types[type_index[s]];
            }
        }
        if !types.is_empty() && roots != 1 {
            return Err(PlatformError::Roots(roots));
        }
        let mut method_index = HashMap::new();
        for (i, m) in methods.iter().enumerate() {
            let sig = MethodSignature::parse(&m.signature)
                .ok_or_else(|| PlatformError::BadSignature(m.signature.clone()))?;
            for e in &m.throws {
                if !type_index.contains_key(e) {
                    return Err(PlatformError::DanglingThrows {
                        signature: m.signature.clone(),
                        exception: e.clone(),
                    });
                }
            }
            if method_index.insert(sig, i).is_some() {
                return Err(PlatformError::DuplicateSignature(m.signature.clone()));
            }
        }
        Ok(PlatformModel {
            types,
            methods,
            type_index,
            method_index,
        })
    }

    pub fn types(&self) -> &[PlatformType] {
        &self.types
    }

    pub fn methods(&self) -> &[PlatformMethod] {
        &self.methods
    }

    pub fn get_type(&self, name: &str) -> Option<&PlatformType> {
        self.type_index.get(name).map(|&i| &self.types[i])
    }

    pub fn get_method(&self, sig: &MethodSignature) -> Option<&PlatformMethod> {
        self.method_index.get(sig).map(|&i| &self.methods[i])
    }

    /// The single type without a superclass, if the model is non-empty.
    pub fn root(&self) -> Option<&PlatformType> {
        self.types.iter().find(|t| t.superclass.is_none())
    }

    /// Names this model knows about: exception types, method owners and
    /// documented return types.
    pub fn known_names(&self) -> HashSet<String> {
        let mut names: HashSet<String> = self.types.iter().map(|t| t.name.clone()).collect();
        for sig in self.method_index.keys() {
            names.insert(sig.owner.clone());
        }
        for m in &self.methods {
            if let Some(r) = &m.returns {
                names.insert(r.clone());
            }
        }
        names
    }

    pub fn to_json(&self) -> String {
        let doc = PlatformDocument {
            types: self.types.clone(),
            methods: self.methods.clone(),
        };
        serde_json::to_string_pretty(&doc).expect("platform model serializes")
    }
}

/// Reads a JSON document, reporting schema errors with their JSON path.
pub(crate) fn read_json<T: DeserializeOwned>(path: &Path) -> Result<T, PlatformError> {
    let text = std::fs::read_to_string(path).map_err(|source| PlatformError::Io {
        path: path.to_path_buf(),
        source,
    })?;
    parse_json(&text, path)
}

pub(crate) fn parse_json<T: DeserializeOwned>(text: &str, path: &Path) -> Result<T, PlatformError> {
    let de = &mut serde_json::Deserializer::from_str(text);
    serde_path_to_error::deserialize(de).map_err(|e| PlatformError::Schema {
        path: path.to_path_buf(),
        pointer: e.path().to_string(),
        message: e.inner().to_string(),
    })
}

pub fn load_platform_model(path: &Path) -> Result<PlatformModel, PlatformError> {
    load_platform_models(&[path])
}

/// Loads several files and validates their union, so a file may refer to
/// types declared in another one.
pub fn load_platform_models<P: AsRef<Path>>(paths: &[P]) -> Result<PlatformModel, PlatformError> {
    let mut types: Vec<PlatformType> = Vec::new();
    let mut methods: Vec<PlatformMethod> = Vec::new();
    for p in paths {
        let doc: PlatformDocument = read_json(p.as_ref())?;
        for t in doc.types {
            // identical redeclarations across files are harmless
            if !types.contains(&t) {
                types.push(t);
            }
        }
        for m in doc.methods {
            if !methods.contains(&m) {
                methods.push(m);
            }
        }
    }
    PlatformModel::new(types, methods)
}

pub fn parse_platform_model(text: &str) -> Result<PlatformModel, PlatformError> {
    let doc: PlatformDocument = parse_json(text, Path::new("<inline>"))?;
    PlatformModel::new(doc.types, doc.methods)
}
