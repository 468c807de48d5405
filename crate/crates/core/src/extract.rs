//! Static extraction of solver parameters from generated Python source.
//!
//! Nothing is executed. The extractor walks the syntax tree, finds calls to
//! configured solver-configuration functions and reads their keyword
//! arguments. Values must be numeric literals, or names bound exactly once
//! in their scope to such a literal. Anything else is recorded as
//! unresolved and scores like an omitted parameter.

use alloc::borrow::ToOwned;
use alloc::collections::{BTreeMap, BTreeSet};
use alloc::format;
use alloc::string::{String, ToString};
use alloc::vec::Vec;
use serde::{Deserialize, Serialize};

use crate::pysyntax::ast::*;
use crate::pysyntax::{parse_module, SyntaxError};
use crate::registry::Registry;

pub const DEFAULT_CALLEES: [&str; 5] = [
    "set_cosmology",
    "set_params",
    "set_dark_energy",
    "set_for_lmax",
    "InitPower.set_params",
];

/// Longest chain of name-to-name constant references followed.
const MAX_ALIAS_DEPTH: usize = 16;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ExtractionConfig {
    /// Dotted callee suffixes; `a.b` matches any call whose attribute chain
    /// ends in `a.b`.
    pub callees: Vec<String>,
}

impl Default for ExtractionConfig {
    fn default() -> Self {
        Self {
            callees: DEFAULT_CALLEES.iter().map(|s| (*s).to_owned()).collect(),
        }
    }
}

impl ExtractionConfig {
    fn matches(&self, path: &[&str]) -> bool {
        self.callees.iter().any(|pattern| {
            let parts: Vec<&str> = pattern.split('.').collect();
            parts.len() <= path.len() && path[path.len() - parts.len()..] == parts[..]
        })
    }
}

/// A source file handed to the extractor. `name` is used in provenance.
#[derive(Debug, Clone, Copy)]
pub struct SourceFile<'a> {
    pub name: &'a str,
    pub text: &'a str,
}

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
pub struct SourceLocation {
    pub file: String,
    pub line: u32,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Unresolved {
    pub name: String,
    pub reason: String,
    pub location: SourceLocation,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SkippedFile {
    pub file: String,
    pub error: String,
}

/// One keyword assignment of a parameter found in the source.
#[derive(Debug, Clone, PartialEq)]
pub struct Occurrence {
    /// Canonical parameter name, or `None` for an unresolvable `**mapping`
    /// whose keys are unknown.
    pub canonical: Option<String>,
    /// Label shown in diagnostics (keyword as written, or `**name`).
    pub label: String,
    pub value: Result<f64, String>,
    pub file_index: usize,
    pub location: SourceLocation,
    pub col: u32,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct ParameterExtraction {
    pub values: BTreeMap<String, f64>,
    /// Every occurrence of each canonical parameter, in source order.
    pub provenance: BTreeMap<String, Vec<SourceLocation>>,
    /// Parameters whose final assignment could not be resolved, plus
    /// unresolvable `**mapping` arguments.
    pub unresolved: Vec<Unresolved>,
    pub skipped_files: Vec<SkippedFile>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum ScopeKind {
    Module,
    Function,
    Class,
}

#[derive(Debug, Default)]
struct Binding<'a> {
    count: usize,
    /// Right-hand side of the binding when it is a plain `name = expr`.
    value: Option<&'a Expr>,
}

struct Scope<'a> {
    parent: Option<usize>,
    kind: ScopeKind,
    bindings: BTreeMap<&'a str, Binding<'a>>,
    globals: BTreeSet<&'a str>,
}

/// Binding census of a module plus every call site and the scope it sits in.
struct Analysis<'a> {
    scopes: Vec<Scope<'a>>,
    calls: Vec<(usize, &'a Expr)>,
}

impl<'a> Analysis<'a> {
    fn of_module(body: &'a [Stmt]) -> Self {
        let mut a = Analysis {
            scopes: alloc::vec![Scope {
                parent: None,
                kind: ScopeKind::Module,
                bindings: BTreeMap::new(),
                globals: BTreeSet::new(),
            }],
            calls: Vec::new(),
        };
        a.visit_body(body, 0);
        a
    }

    fn new_scope(&mut self, parent: usize, kind: ScopeKind) -> usize {
        self.scopes.push(Scope {
            parent: Some(parent),
            kind,
            bindings: BTreeMap::new(),
            globals: BTreeSet::new(),
        });
        self.scopes.len() - 1
    }

    fn bind(&mut self, scope: usize, name: &'a str, value: Option<&'a Expr>) {
        let target = if self.scopes[scope].globals.contains(name) {
            0
        } else {
            scope
        };
        let b = self.scopes[target].bindings.entry(name).or_default();
        b.count += 1;
        b.value = value;
    }

    fn bind_target(&mut self, scope: usize, target: &'a Expr, value: Option<&'a Expr>) {
        match &target.kind {
            ExprKind::Name(n) => self.bind(scope, n, value),
            ExprKind::Tuple(items) | ExprKind::List(items) => {
                for item in items {
                    self.bind_target(scope, item, None);
                }
            }
            ExprKind::Starred(inner) => self.bind_target(scope, inner, None),
            // attribute and subscript targets bind nothing, but may contain calls
            _ => self.visit_expr(target, scope),
        }
    }

    fn collect_globals(body: &'a [Stmt], out: &mut BTreeSet<&'a str>) {
        for stmt in body {
            match &stmt.kind {
                StmtKind::Global(names) => out.extend(names.iter().map(String::as_str)),
                StmtKind::Block { bodies, .. } => {
                    for b in bodies {
                        Self::collect_globals(b, out);
                    }
                }
                _ => {}
            }
        }
    }

    fn visit_body(&mut self, body: &'a [Stmt], scope: usize) {
        for stmt in body {
            self.visit_stmt(stmt, scope);
        }
    }

    fn visit_stmt(&mut self, stmt: &'a Stmt, scope: usize) {
        match &stmt.kind {
            StmtKind::Assign { targets, value } => {
                self.visit_expr(value, scope);
                let plain = targets.len() == 1;
                for t in targets {
                    self.bind_target(scope, t, plain.then_some(value));
                }
            }
            StmtKind::AugAssign { target, value } => {
                self.visit_expr(value, scope);
                self.bind_target(scope, target, None);
            }
            StmtKind::AnnAssign {
                target,
                annotation,
                value,
            } => {
                self.visit_expr(annotation, scope);
                if let Some(v) = value {
                    self.visit_expr(v, scope);
                    self.bind_target(scope, target, Some(v));
                }
            }
            StmtKind::Expr(e) => self.visit_expr(e, scope),
            StmtKind::FunctionDef {
                name,
                params,
                decorators,
                returns,
                body,
            } => {
                for d in decorators {
                    self.visit_expr(d, scope);
                }
                for p in params {
                    if let Some(d) = &p.default {
                        self.visit_expr(d, scope);
                    }
                    if let Some(a) = &p.annotation {
                        self.visit_expr(a, scope);
                    }
                }
                if let Some(r) = returns {
                    self.visit_expr(r, scope);
                }
                self.bind(scope, name, None);
                let inner = self.new_scope(scope, ScopeKind::Function);
                let mut globals = BTreeSet::new();
                Self::collect_globals(body, &mut globals);
                self.scopes[inner].globals = globals;
                for p in params {
                    self.bind(inner, &p.name, None);
                }
                self.visit_body(body, inner);
            }
            StmtKind::ClassDef {
                name,
                bases,
                decorators,
                body,
            } => {
                for d in decorators {
                    self.visit_expr(d, scope);
                }
                for b in bases {
                    self.visit_expr(b.value(), scope);
                }
                self.bind(scope, name, None);
                let inner = self.new_scope(scope, ScopeKind::Class);
                self.visit_body(body, inner);
            }
            StmtKind::Import(names) => {
                for n in names {
                    self.bind(scope, n, None);
                }
            }
            StmtKind::Global(_) | StmtKind::Nonlocal(_) => {}
            StmtKind::Block {
                header,
                targets,
                bodies,
            } => {
                for h in header {
                    self.visit_expr(h, scope);
                }
                for t in targets {
                    self.bind_target(scope, t, None);
                }
                for b in bodies {
                    self.visit_body(b, scope);
                }
            }
            StmtKind::Other(exprs) => {
                for e in exprs {
                    self.visit_expr(e, scope);
                }
            }
        }
    }

    fn visit_expr(&mut self, expr: &'a Expr, scope: usize) {
        match &expr.kind {
            ExprKind::Call { .. } => self.calls.push((scope, expr)),
            ExprKind::NamedExpr { target, .. } => self.bind(scope, target, None),
            ExprKind::Lambda { params, body } => {
                for p in params {
                    if let Some(d) = &p.default {
                        self.visit_expr(d, scope);
                    }
                }
                let inner = self.new_scope(scope, ScopeKind::Function);
                for p in params {
                    self.bind(inner, &p.name, None);
                }
                self.visit_expr(body, inner);
                return;
            }
            _ => {}
        }
        for child in expr.children() {
            self.visit_expr(child, scope);
        }
    }

    /// Finds the scope whose binding of `name` is visible from `scope`.
    fn lookup(&self, scope: usize, name: &str) -> Option<(usize, &Binding<'a>)> {
        let mut current = Some(scope);
        let mut first = true;
        while let Some(s) = current {
            let sc = &self.scopes[s];
            // class bodies are invisible to nested scopes
            if first || sc.kind != ScopeKind::Class {
                if let Some(b) = sc.bindings.get(name) {
                    return Some((s, b));
                }
            }
            first = false;
            current = sc.parent;
        }
        None
    }

    fn resolve_name(&self, scope: usize, name: &str, depth: usize) -> Result<(usize, &'a Expr), String> {
        if depth > MAX_ALIAS_DEPTH {
            return Err(format!("constant chain through `{name}` too deep"));
        }
        let Some((s, b)) = self.lookup(scope, name) else {
            return Err(format!("undefined name `{name}`"));
        };
        if b.count > 1 {
            return Err(format!("name `{name}` is assigned more than once"));
        }
        match b.value {
            Some(v) => Ok((s, v)),
            None => Err(format!("name `{name}` is not a literal assignment")),
        }
    }

    fn eval_number(&self, expr: &'a Expr, scope: usize, depth: usize) -> Result<f64, String> {
        match &expr.kind {
            ExprKind::Number(Some(v)) if v.is_finite() => Ok(*v),
            ExprKind::Number(_) => Err("non-real numeric literal".to_owned()),
            ExprKind::Unary {
                op: op @ (UnaryOp::Minus | UnaryOp::Plus),
                operand,
            } => {
                let v = self.eval_number(operand, scope, depth)?;
                Ok(if *op == UnaryOp::Minus { -v } else { v })
            }
            ExprKind::Name(n) => {
                let (s, value) = self.resolve_name(scope, n, depth + 1)?;
                self.eval_number(value, s, depth + 1)
            }
            ExprKind::Str { .. } | ExprKind::Constant(_) => Err("non-numeric literal".to_owned()),
            _ => Err("non-literal expression".to_owned()),
        }
    }

    /// Resolves the operand of `**x` to a literal dict and its scope.
    fn eval_mapping(&self, expr: &'a Expr, scope: usize) -> Result<(usize, &'a [DictItem]), String> {
        match &expr.kind {
            ExprKind::Dict(items) => Ok((scope, items)),
            ExprKind::Name(n) => {
                let (s, value) = self.resolve_name(scope, n, 1)?;
                match &value.kind {
                    ExprKind::Dict(items) => Ok((s, items)),
                    _ => Err(format!("`{n}` is not bound to a literal mapping")),
                }
            }
            _ => Err("non-literal mapping".to_owned()),
        }
    }
}

fn callee_path(func: &Expr) -> Vec<&str> {
    let mut parts = Vec::new();
    let mut cur = func;
    loop {
        match &cur.kind {
            ExprKind::Attribute { value, attr } => {
                parts.push(attr.as_str());
                cur = value;
            }
            ExprKind::Name(n) => {
                parts.push(n.as_str());
                break;
            }
            _ => break,
        }
    }
    parts.reverse();
    parts
}

/// Parses one file and lists every parameter occurrence in source order.
pub fn file_occurrences(
    file: &SourceFile<'_>,
    file_index: usize,
    registry: &Registry,
    config: &ExtractionConfig,
) -> Result<Vec<Occurrence>, SyntaxError> {
    let body = parse_module(file.text)?;
    let analysis = Analysis::of_module(&body);
    let mut out = Vec::new();
    let loc = |line: u32| SourceLocation {
        file: file.name.to_owned(),
        line,
    };
    for &(scope, call) in &analysis.calls {
        let ExprKind::Call { func, args } = &call.kind else {
            continue;
        };
        if !config.matches(&callee_path(func)) {
            continue;
        }
        for arg in args {
            match arg {
                Argument::Keyword { name, value } => {
                    let Some(canonical) = registry.resolve_alias(name) else {
                        continue;
                    };
                    out.push(Occurrence {
                        canonical: Some(canonical.to_owned()),
                        label: name.clone(),
                        value: analysis.eval_number(value, scope, 0),
                        file_index,
                        location: loc(value.line),
                        col: value.col,
                    });
                }
                Argument::DoubleStar(mapping) => match analysis.eval_mapping(mapping, scope) {
                    Ok((dict_scope, items)) => {
                        for item in items {
                            match item {
                                DictItem::Pair(key, value) => {
                                    let ExprKind::Str {
                                        value: key_name,
                                        formatted: false,
                                    } = &key.kind
                                    else {
                                        continue;
                                    };
                                    let Some(canonical) = registry.resolve_alias(key_name) else {
                                        continue;
                                    };
                                    out.push(Occurrence {
                                        canonical: Some(canonical.to_owned()),
                                        label: key_name.clone(),
                                        value: analysis.eval_number(value, dict_scope, 0),
                                        file_index,
                                        location: loc(mapping.line),
                                        col: mapping.col,
                                    });
                                }
                                DictItem::Splat(inner) => out.push(Occurrence {
                                    canonical: None,
                                    label: "**{...}".to_owned(),
                                    value: Err("nested mapping splat".to_owned()),
                                    file_index,
                                    location: loc(inner.line),
                                    col: inner.col,
                                }),
                            }
                        }
                    }
                    Err(reason) => out.push(Occurrence {
                        canonical: None,
                        label: match &mapping.kind {
                            ExprKind::Name(n) => format!("**{n}"),
                            _ => "**<expr>".to_owned(),
                        },
                        value: Err(reason),
                        file_index,
                        location: loc(mapping.line),
                        col: mapping.col,
                    }),
                },
                Argument::Positional(_) | Argument::Star(_) => {}
            }
        }
    }
    out.sort_by_key(|o| (o.location.line, o.col));
    Ok(out)
}

/// Folds occurrences so that the lexically last assignment of each
/// parameter wins. Occurrences are ordered by file, then position.
pub fn last_write_wins(mut occurrences: Vec<Occurrence>) -> ParameterExtraction {
    occurrences.sort_by_key(|o| (o.file_index, o.location.line, o.col));
    let mut out = ParameterExtraction::default();
    let mut last: BTreeMap<String, &Occurrence> = BTreeMap::new();
    for occ in &occurrences {
        match &occ.canonical {
            Some(c) => {
                out.provenance
                    .entry(c.clone())
                    .or_default()
                    .push(occ.location.clone());
                last.insert(c.clone(), occ);
            }
            None => out.unresolved.push(Unresolved {
                name: occ.label.clone(),
                reason: occ.value.clone().err().unwrap_or_default(),
                location: occ.location.clone(),
            }),
        }
    }
    for (name, occ) in last {
        match &occ.value {
            Ok(v) => {
                out.values.insert(name, *v);
            }
            Err(reason) => out.unresolved.push(Unresolved {
                name,
                reason: reason.clone(),
                location: occ.location.clone(),
            }),
        }
    }
    out
}

/// Extracts parameters from all files of one trial. Files that fail to
/// parse are listed in `skipped_files` and contribute nothing.
pub fn extract_parameters(
    files: &[SourceFile<'_>],
    registry: &Registry,
    config: &ExtractionConfig,
) -> ParameterExtraction {
    let mut occurrences = Vec::new();
    let mut skipped = Vec::new();
    for (index, file) in files.iter().enumerate() {
        match file_occurrences(file, index, registry, config) {
            Ok(found) => occurrences.extend(found),
            Err(err) => skipped.push(SkippedFile {
                file: file.name.to_string(),
                error: err.to_string(),
            }),
        }
    }
    let mut out = last_write_wins(occurrences);
    out.skipped_files = skipped;
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::vec;

    fn extract(src: &str) -> ParameterExtraction {
        extract_parameters(
            &[SourceFile {
                name: "main.py",
                text: src,
            }],
            &Registry::builtin(),
            &ExtractionConfig::default(),
        )
    }

    #[test]
    fn literal_keywords() {
        let ex = extract("pars.set_cosmology(H0=67.5, ombh2=0.022)\n");
        assert_eq!(ex.values["H0"], 67.5);
        assert_eq!(ex.values["ombh2"], 0.022);
        assert_eq!(ex.values.len(), 2);
        assert!(ex.unresolved.is_empty());
    }

    #[test]
    fn constant_propagation() {
        let ex = extract("h = 67.5\nset_cosmology(H0=h)\n");
        assert_eq!(ex.values["H0"], 67.5);
        let ex = extract("h = 67.5\nhh = h\nw = -1\nset_cosmology(H0=hh)\npars.set_dark_energy(w=w)\n");
        assert_eq!(ex.values["H0"], 67.5);
        assert_eq!(ex.values["w0"], -1.0);
    }

    #[test]
    fn runtime_values_unresolved() {
        let ex = extract("set_cosmology(H0=compute_h())\n");
        assert!(!ex.values.contains_key("H0"));
        assert_eq!(ex.unresolved.len(), 1);
        assert_eq!(ex.unresolved[0].name, "H0");
        assert_eq!(ex.unresolved[0].reason, "non-literal expression");

        let ex = extract("h = 0.675\nset_cosmology(H0=100 * h)\n");
        assert!(ex.values.is_empty());

        let ex = extract("h = 60\nh = 67.5\nset_cosmology(H0=h)\n");
        assert!(ex.unresolved[0].reason.contains("more than once"));

        let ex = extract("set_cosmology(H0=undefined_name)\n");
        assert!(ex.unresolved[0].reason.contains("undefined"));

        let ex = extract("for h in [1, 2]:\n    set_cosmology(H0=h)\n");
        assert!(ex.values.is_empty());
    }

    #[test]
    fn function_scopes() {
        let src = "\
h = 67.5
def configure(pars, ns=0.96):
    tau = 0.054
    pars.set_cosmology(H0=h, tau=tau)
    pars.InitPower.set_params(ns=ns)
";
        let ex = extract(src);
        assert_eq!(ex.values["H0"], 67.5);
        assert_eq!(ex.values["tau"], 0.054);
        assert!(!ex.values.contains_key("ns"));
        assert!(ex.unresolved[0].reason.contains("not a literal"));

        let shadowed = "h = 67.5\ndef f(h):\n    set_cosmology(H0=h)\n";
        assert!(extract(shadowed).values.is_empty());

        let global = "h = 67.5\ndef f():\n    global h\n    h = 70\nset_cosmology(H0=h)\n";
        assert!(extract(global).values.is_empty());
    }

    #[test]
    fn dict_splat() {
        let ex = extract("cfg = {'H0': 67.5, 'omega_b_h2': 0.0224}\npars.set_cosmology(**cfg)\n");
        assert_eq!(ex.values["H0"], 67.5);
        assert_eq!(ex.values["ombh2"], 0.0224);
        let ex = extract("set_params(**{'As': 2.1e-9})\n");
        assert_eq!(ex.values["As"], 2.1e-9);
        let ex = extract("cfg = load()\nset_params(**cfg)\n");
        assert!(ex.values.is_empty());
        assert_eq!(ex.unresolved[0].name, "**cfg");
    }

    #[test]
    fn callee_matching() {
        let ex = extract("camb.CAMBparams().set_cosmology(H0=70)\nother(H0=1)\nset_matter_power(H0=2)\n");
        assert_eq!(ex.values["H0"], 70.0);
        let cfg = ExtractionConfig {
            callees: vec!["InitPower.set_params".into()],
        };
        let ex = extract_parameters(
            &[SourceFile {
                name: "a.py",
                text: "p.set_params(As=1e-9)\np.InitPower.set_params(ns=0.9)\n",
            }],
            &Registry::builtin(),
            &cfg,
        );
        assert_eq!(ex.values.len(), 1);
        assert_eq!(ex.values["ns"], 0.9);
    }

    #[test]
    fn aliases_and_unknown_keywords() {
        let ex = extract("p.set_cosmology(hubble=70, n_s=0.96, lens_potential_accuracy=1, foo=compute())\n");
        assert_eq!(ex.values["H0"], 70.0);
        assert_eq!(ex.values["ns"], 0.96);
        assert_eq!(ex.values.len(), 2);
        assert!(ex.unresolved.is_empty());
    }

    #[test]
    fn last_write() {
        let src = "p.set_cosmology(H0=60)\n\n\n\n\n\n\n\np.set_cosmology(H0=67.5)\n";
        let ex = extract(src);
        assert_eq!(ex.values["H0"], 67.5);
        let lines: Vec<u32> = ex.provenance["H0"].iter().map(|l| l.line).collect();
        assert_eq!(lines, vec![1, 9]);
    }

    #[test]
    fn later_file_wins_and_bad_file_skipped() {
        let files = [
            SourceFile {
                name: "a.py",
                text: "set_cosmology(H0=60, ombh2=0.02)\n",
            },
            SourceFile {
                name: "broken.py",
                text: "def oops(:\n",
            },
            SourceFile {
                name: "b.py",
                text: "set_cosmology(H0=67.5)\n",
            },
        ];
        let ex = extract_parameters(&files, &Registry::builtin(), &ExtractionConfig::default());
        assert_eq!(ex.values["H0"], 67.5);
        assert_eq!(ex.values["ombh2"], 0.02);
        assert_eq!(ex.skipped_files.len(), 1);
        assert_eq!(ex.skipped_files[0].file, "broken.py");
        assert_eq!(ex.provenance["H0"][1].file, "b.py");
    }

    #[test]
    fn unresolved_last_write_removes_value() {
        let ex = extract("set_cosmology(H0=67.5)\nset_cosmology(H0=f())\n");
        assert!(!ex.values.contains_key("H0"));
        assert_eq!(ex.provenance["H0"].len(), 2);
    }
}
