use std::collections::HashMap;

use serde::{Deserialize, Serialize};

use super::platform::ExceptionKind;
use super::ModelError;
use crate::syntax::SourcePosition;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct TypeId(pub(crate) u32);

impl TypeId {
    pub fn index(self) -> usize {
        self.0 as usize
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Recoverability {
    PotentiallyRecoverable,
    PotentiallyUnrecoverable,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TypeOrigin {
    Corpus,
    Platform,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ExceptionInfo {
    pub kind: ExceptionKind,
    pub recoverability: Recoverability,
}

#[derive(Debug, Clone)]
pub struct TypeEntry {
    pub name: String,
    pub origin: TypeOrigin,
    pub position: Option<SourcePosition>,
    /// Qualified superclass name, which may lie outside the table.
    pub superclass_name: Option<String>,
    pub superclass: Option<TypeId>,
    pub interface_names: Vec<String>,
    pub is_interface: bool,
    /// Field name to qualified declared type.
    pub fields: HashMap<String, String>,
    /// `Some` iff the type belongs to the exception universe.
    pub exception: Option<ExceptionInfo>,
}

/// Corpus and platform types with their superclass edges.
#[derive(Debug, Clone, Default)]
pub struct TypeTable {
    entries: Vec<TypeEntry>,
    index: HashMap<String, TypeId>,
}

impl TypeTable {
    pub(crate) fn insert(&mut self, entry: TypeEntry) -> Result<TypeId, ModelError> {
        if let Some(&existing) = self.index.get(&entry.name) {
            let place = |p: &Option<SourcePosition>| {
                p.as_ref()
                    .map_or_else(|| "the platform model".to_string(), |p| p.to_string())
            };
            return Err(ModelError::DuplicateType {
                first: place(&self.entries[existing.index()].position),
                second: place(&entry.position),
                name: entry.name,
            });
        }
        let id = TypeId(self.entries.len() as u32);
        self.index.insert(entry.name.clone(), id);
        self.entries.push(entry);
        Ok(id)
    }

    pub fn get(&self, name: &str) -> Option<TypeId> {
        self.index.get(name).copied()
    }

    pub fn entry(&self, id: TypeId) -> &TypeEntry {
        &self.entries[id.index()]
    }

    pub fn entries(&self) -> impl Iterator<Item = (TypeId, &TypeEntry)> {
        self.entries
            .iter()
            .enumerate()
            .map(|(i, e)| (TypeId(i as u32), e))
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn name(&self, id: TypeId) -> &str {
        &self.entries[id.index()].name
    }

    /// Superclass chain starting at `id` itself.
    pub fn ancestors(&self, id: TypeId) -> impl Iterator<Item = TypeId> + '_ {
        std::iter::successors(Some(id), |t| self.entries[t.index()].superclass)
    }

    /// Links superclass ids, rejects cycles and computes exception membership.
    pub(crate) fn link(&mut self) -> Result<(), ModelError> {
        for i in 0..self.entries.len() {
            let sup = self.entries[i]
                .superclass_name
                .as_ref()
                .and_then(|s| self.index.get(s).copied());
            self.entries[i].superclass = sup;
        }
        self.check_acyclic()?;
        for i in 0..self.entries.len() {
            if self.entries[i].origin == TypeOrigin::Corpus {
                // kind comes from the nearest platform ancestor
                let info = self
                    .ancestors(TypeId(i as u32))
                    .find(|t| self.entries[t.index()].origin == TypeOrigin::Platform)
                    .and_then(|t| self.entries[t.index()].exception);
                self.entries[i].exception = info.map(|inherited| ExceptionInfo {
                    kind: inherited.kind,
                    recoverability: default_recoverability(inherited.kind),
                });
            }
        }
        Ok(())
    }

    fn check_acyclic(&self) -> Result<(), ModelError> {
        #[derive(Clone, Copy, PartialEq)]
        enum Mark {
            New,
            Active,
            Done,
        }
        let mut marks = vec![Mark::New; self.entries.len()];
        for start in 0..self.entries.len() {
            if marks[start] != Mark::New {
                continue;
            }
            // iterative DFS over superclass and interface edges
            let mut stack = vec![(start, 0usize)];
            marks[start] = Mark::Active;
            while let Some(top) = stack.last_mut() {
                let (node, k) = *top;
                top.1 += 1;
                match self.successor(node, k) {
                    Some(Some(s)) => match marks[s] {
                        Mark::New => {
                            marks[s] = Mark::Active;
                            stack.push((s, 0));
                        }
                        Mark::Active => {
                            let e = &self.entries[s];
                            return Err(ModelError::Cycle {
                                name: e.name.clone(),
                                position: e.position.clone(),
                            });
                        }
                        Mark::Done => {}
                    },
                    Some(None) => {}
                    None => {
                        marks[node] = Mark::Done;
                        stack.pop();
                    }
                }
            }
        }
        Ok(())
    }

    /// The `k`-th outgoing edge of `node`: `None` when exhausted, `Some(None)`
    /// for an edge leaving the table.
    fn successor(&self, node: usize, k: usize) -> Option<Option<usize>> {
        let e = &self.entries[node];
        e.superclass_name
            .iter()
            .chain(e.interface_names.iter())
            .nth(k)
            .map(|n| self.index.get(n).map(|id| id.index()))
    }

    pub fn exception_info(&self, id: TypeId) -> Result<ExceptionInfo, ModelError> {
        self.entries
            .get(id.index())
            .and_then(|e| e.exception)
            .ok_or(ModelError::UnknownType(id.0))
    }

    pub fn is_exception(&self, id: TypeId) -> bool {
        self.exception_info(id).is_ok()
    }

    /// Reflexive superclass reachability between exception types.
    pub fn is_subtype(&self, a: TypeId, b: TypeId) -> Result<bool, ModelError> {
        self.exception_info(a)?;
        self.exception_info(b)?;
        Ok(self.ancestors(a).any(|t| t == b))
    }

    pub fn recoverability_of(&self, e: TypeId) -> Result<Recoverability, ModelError> {
        Ok(self.exception_info(e)?.recoverability)
    }

    /// Exception universe in id order.
    pub fn exception_types(&self) -> Vec<TypeId> {
        self.entries()
            .filter(|(_, e)| e.exception.is_some())
            .map(|(id, _)| id)
            .collect()
    }
}

pub(crate) fn default_recoverability(kind: ExceptionKind) -> Recoverability {
    match kind {
        ExceptionKind::Checked => Recoverability::PotentiallyRecoverable,
        ExceptionKind::Unchecked | ExceptionKind::Error => Recoverability::PotentiallyUnrecoverable,
    }
}
