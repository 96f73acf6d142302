use std::collections::{HashMap, HashSet};

use crate::syntax::CompilationUnit;

/// Types that `java.lang` supplies implicitly, beyond whatever the platform
/// model declares.
const JAVA_LANG: &[&str] = &[
    "AutoCloseable", "Boolean", "Byte", "CharSequence", "Character", "Class", "ClassLoader",
    "Comparable", "Double", "Enum", "Float", "Integer", "Iterable", "Long", "Math", "Number",
    "Object", "Process", "ProcessBuilder", "Record", "Runnable", "Runtime", "Short", "String",
    "StringBuffer", "StringBuilder", "System", "Thread", "Void",
];

const PRIMITIVES: &[&str] = &[
    "boolean", "byte", "char", "short", "int", "long", "float", "double", "void", "var",
];

/// Maps names as written to qualified names, in the context of one unit.
#[derive(Debug, Default)]
pub(crate) struct NameResolver {
    known: HashSet<String>,
    /// Corpus type → lexically enclosing type.
    enclosing: HashMap<String, String>,
}

impl NameResolver {
    pub fn new(units: &[CompilationUnit], platform_names: HashSet<String>) -> Self {
        let mut known = platform_names;
        let mut enclosing = HashMap::new();
        for unit in units {
            for t in &unit.types {
                known.insert(t.name.clone());
                if let Some(e) = &t.enclosing {
                    enclosing.insert(t.name.clone(), e.clone());
                }
            }
        }
        NameResolver { known, enclosing }
    }

    /// Whether `name` denotes a type from inside `current`.
    pub fn is_type_name(&self, unit: &CompilationUnit, current: Option<&str>, name: &str) -> bool {
        self.lookup(unit, current, name).is_some()
    }

    /// Best-effort qualification; unknown names come back unchanged.
    pub fn resolve(&self, unit: &CompilationUnit, current: Option<&str>, name: &str) -> String {
        if let Some(base) = name.strip_suffix("[]") {
            return format!("{}[]", self.resolve(unit, current, base));
        }
        self.lookup(unit, current, name)
            .unwrap_or_else(|| name.to_string())
    }

    fn lookup(&self, unit: &CompilationUnit, current: Option<&str>, name: &str) -> Option<String> {
        if PRIMITIVES.contains(&name) {
            return Some(name.to_string());
        }
        if let Some((first, rest)) = name.split_once('.') {
            if self.known.contains(name) {
                return Some(name.to_string());
            }
            let base = self.lookup(unit, current, first)?;
            let candidate = format!("{base}.{rest}");
            return self.known.contains(&candidate).then_some(candidate);
        }
        // member types of the current type and its enclosing types
        let mut scope = current.map(str::to_string);
        while let Some(t) = scope {
            let candidate = format!("{t}.{name}");
            if self.known.contains(&candidate) {
                return Some(candidate);
            }
            scope = self.enclosing.get(&t).cloned();
        }
        for imp in &unit.imports {
            if !imp.is_static && !imp.wildcard && imp.path.rsplit('.').next() == Some(name) {
                return Some(imp.path.clone());
            }
        }
        let same_package = match &unit.package {
            Some(p) => format!("{p}.{name}"),
            None => name.to_string(),
        };
        if self.known.contains(&same_package) {
            return Some(same_package);
        }
        for imp in &unit.imports {
            if !imp.is_static && imp.wildcard {
                let candidate = format!("{}.{name}", imp.path);
                if self.known.contains(&candidate) {
                    return Some(candidate);
                }
            }
        }
        let lang = format!("java.lang.{name}");
        if self.known.contains(&lang) || JAVA_LANG.contains(&name) {
            return Some(lang);
        }
        None
    }
}
