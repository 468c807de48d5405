//! Syntax tree for the subset of Python structure the extractor cares about.
//!
//! Constructs that never matter for parameter extraction (binary operators,
//! comparisons, subscripts, comprehensions, sets) collapse into
//! [`ExprKind::Other`], which keeps their children for traversal.

use alloc::boxed::Box;
use alloc::string::String;
use alloc::vec::Vec;

#[derive(Debug, Clone, PartialEq)]
pub struct Expr {
    pub kind: ExprKind,
    pub line: u32,
    pub col: u32,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Constant {
    None,
    True,
    False,
    Ellipsis,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum UnaryOp {
    Plus,
    Minus,
    Invert,
    Not,
}

#[derive(Debug, Clone, PartialEq)]
pub enum ExprKind {
    Name(String),
    /// Real value of a numeric literal; `None` for imaginary literals.
    Number(Option<f64>),
    Str {
        value: String,
        formatted: bool,
    },
    Constant(Constant),
    Attribute {
        value: Box<Expr>,
        attr: String,
    },
    Call {
        func: Box<Expr>,
        args: Vec<Argument>,
    },
    Dict(Vec<DictItem>),
    Unary {
        op: UnaryOp,
        operand: Box<Expr>,
    },
    NamedExpr {
        target: String,
        value: Box<Expr>,
    },
    Lambda {
        params: Vec<Param>,
        body: Box<Expr>,
    },
    Tuple(Vec<Expr>),
    List(Vec<Expr>),
    Starred(Box<Expr>),
    Other(Vec<Expr>),
}

#[derive(Debug, Clone, PartialEq)]
pub enum Argument {
    Positional(Expr),
    Keyword { name: String, value: Expr },
    Star(Expr),
    DoubleStar(Expr),
}

#[derive(Debug, Clone, PartialEq)]
pub enum DictItem {
    Pair(Expr, Expr),
    Splat(Expr),
}

#[derive(Debug, Clone, PartialEq)]
pub struct Param {
    pub name: String,
    pub default: Option<Expr>,
    pub annotation: Option<Expr>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Stmt {
    pub kind: StmtKind,
    pub line: u32,
}

#[derive(Debug, Clone, PartialEq)]
pub enum StmtKind {
    Assign {
        targets: Vec<Expr>,
        value: Expr,
    },
    AugAssign {
        target: Expr,
        value: Expr,
    },
    AnnAssign {
        target: Expr,
        annotation: Expr,
        value: Option<Expr>,
    },
    Expr(Expr),
    FunctionDef {
        name: String,
        params: Vec<Param>,
        decorators: Vec<Expr>,
        returns: Option<Expr>,
        body: Vec<Stmt>,
    },
    ClassDef {
        name: String,
        bases: Vec<Argument>,
        decorators: Vec<Expr>,
        body: Vec<Stmt>,
    },
    /// `import` / `from ... import`; holds the names bound locally.
    Import(Vec<String>),
    Global(Vec<String>),
    Nonlocal(Vec<String>),
    /// `if`, `while`, `for`, `with`, `try`: header expressions, binding
    /// targets (loop variables, `as` names) and the nested bodies.
    Block {
        header: Vec<Expr>,
        targets: Vec<Expr>,
        bodies: Vec<Vec<Stmt>>,
    },
    /// `return`, `raise`, `del`, `assert`, `pass`, `break`, `continue`.
    Other(Vec<Expr>),
}

impl Expr {
    /// Direct sub-expressions in source order. Lambda bodies are included;
    /// callers that track scopes handle [`ExprKind::Lambda`] themselves.
    pub fn children(&self) -> Vec<&Expr> {
        match &self.kind {
            ExprKind::Name(_) | ExprKind::Number(_) | ExprKind::Str { .. } | ExprKind::Constant(_) => {
                Vec::new()
            }
            ExprKind::Attribute { value, .. } => alloc::vec![&**value],
            ExprKind::Call { func, args } => {
                let mut out = alloc::vec![&**func];
                out.extend(args.iter().map(Argument::value));
                out
            }
            ExprKind::Dict(items) => items
                .iter()
                .flat_map(|item| match item {
                    DictItem::Pair(k, v) => alloc::vec![k, v],
                    DictItem::Splat(e) => alloc::vec![e],
                })
                .collect(),
            ExprKind::Unary { operand, .. } => alloc::vec![&**operand],
            ExprKind::NamedExpr { value, .. } => alloc::vec![&**value],
            ExprKind::Lambda { params, body } => {
                let mut out: Vec<&Expr> = params.iter().filter_map(|p| p.default.as_ref()).collect();
                out.push(body);
                out
            }
            ExprKind::Tuple(items) | ExprKind::List(items) | ExprKind::Other(items) => {
                items.iter().collect()
            }
            ExprKind::Starred(e) => alloc::vec![&**e],
        }
    }
}

impl Argument {
    pub fn value(&self) -> &Expr {
        match self {
            Argument::Positional(e) | Argument::Star(e) | Argument::DoubleStar(e) => e,
            Argument::Keyword { value, .. } => value,
        }
    }
}
