//! Recursive-descent parser producing [`ast`](super::ast) nodes.

use alloc::boxed::Box;
use alloc::format;
use alloc::string::{String, ToString};
use alloc::vec;
use alloc::vec::Vec;

use super::ast::*;
use super::lexer::{tokenize, Tok, Token};
use super::SyntaxError;

const KEYWORDS: [&str; 35] = [
    "False", "None", "True", "and", "as", "assert", "async", "await", "break", "class", "continue",
    "def", "del", "elif", "else", "except", "finally", "for", "from", "global", "if", "import",
    "in", "is", "lambda", "nonlocal", "not", "or", "pass", "raise", "return", "try", "while",
    "with", "yield",
];

const AUG_OPS: [&str; 13] = [
    "+=", "-=", "*=", "/=", "//=", "%=", "@=", "&=", "|=", "^=", ">>=", "<<=", "**=",
];

const COMPARE_OPS: [&str; 6] = ["<", ">", "==", ">=", "<=", "!="];

fn is_keyword(name: &str) -> bool {
    KEYWORDS.contains(&name)
}

/// Parses a whole module.
pub fn parse_module(src: &str) -> Result<Vec<Stmt>, SyntaxError> {
    let toks = tokenize(src)?;
    let mut p = Parser { toks, pos: 0 };
    let mut body = Vec::new();
    loop {
        match p.peek() {
            Tok::End => break,
            Tok::Newline => p.pos += 1,
            _ => body.extend(p.statement()?),
        }
    }
    Ok(body)
}

/// Converts the text of a numeric literal to its real value.
pub fn number_value(text: &str) -> Option<f64> {
    let clean: String = text.chars().filter(|&c| c != '_').collect();
    if clean.ends_with(['j', 'J']) {
        return None;
    }
    let lower = clean.to_ascii_lowercase();
    let radix = match lower.get(..2) {
        Some("0x") => 16,
        Some("0o") => 8,
        Some("0b") => 2,
        _ => return clean.parse::<f64>().ok(),
    };
    lower[2..].chars().try_fold(0.0f64, |acc, c| {
        c.to_digit(radix).map(|d| acc * radix as f64 + d as f64)
    })
}

struct Parser {
    toks: Vec<Token>,
    pos: usize,
}

impl Parser {
    fn peek(&self) -> &Tok {
        &self.toks[self.pos].tok
    }

    fn peek_nth(&self, n: usize) -> &Tok {
        let i = (self.pos + n).min(self.toks.len() - 1);
        &self.toks[i].tok
    }

    fn here(&self) -> (u32, u32) {
        let t = &self.toks[self.pos];
        (t.line, t.col)
    }

    fn advance(&mut self) -> Tok {
        let t = self.toks[self.pos].tok.clone();
        if self.pos < self.toks.len() - 1 {
            self.pos += 1;
        }
        t
    }

    fn error<T>(&self, message: impl Into<String>) -> Result<T, SyntaxError> {
        let (line, col) = self.here();
        Err(SyntaxError {
            line,
            col,
            message: message.into(),
        })
    }

    fn unexpected<T>(&self) -> Result<T, SyntaxError> {
        let what = match self.peek() {
            Tok::Name(n) => format!("`{n}`"),
            Tok::Number(n) => format!("number `{n}`"),
            Tok::Str { .. } => "string".to_string(),
            Tok::Op(o) => format!("`{o}`"),
            Tok::Newline => "end of line".to_string(),
            Tok::Indent => "indent".to_string(),
            Tok::Dedent => "dedent".to_string(),
            Tok::End => "end of file".to_string(),
        };
        self.error(format!("unexpected {what}"))
    }

    fn at_op(&self, op: &str) -> bool {
        matches!(self.peek(), Tok::Op(o) if *o == op)
    }

    fn at_kw(&self, kw: &str) -> bool {
        matches!(self.peek(), Tok::Name(n) if n == kw)
    }

    fn eat_op(&mut self, op: &str) -> bool {
        if self.at_op(op) {
            self.advance();
            true
        } else {
            false
        }
    }

    fn eat_kw(&mut self, kw: &str) -> bool {
        if self.at_kw(kw) {
            self.advance();
            true
        } else {
            false
        }
    }

    fn expect_op(&mut self, op: &str) -> Result<(), SyntaxError> {
        if self.eat_op(op) {
            Ok(())
        } else {
            self.error(format!("expected `{op}`"))
        }
    }

    fn expect_kw(&mut self, kw: &str) -> Result<(), SyntaxError> {
        if self.eat_kw(kw) {
            Ok(())
        } else {
            self.error(format!("expected `{kw}`"))
        }
    }

    fn identifier(&mut self) -> Result<String, SyntaxError> {
        match self.peek() {
            Tok::Name(n) if !is_keyword(n) => {
                let n = n.clone();
                self.advance();
                Ok(n)
            }
            _ => self.error("expected identifier"),
        }
    }

    fn expr_at(&self, kind: ExprKind, at: (u32, u32)) -> Expr {
        Expr {
            kind,
            line: at.0,
            col: at.1,
        }
    }

    // ---- statements ----

    fn statement(&mut self) -> Result<Vec<Stmt>, SyntaxError> {
        let Tok::Name(name) = self.peek() else {
            if self.at_op("@") {
                return Ok(vec![self.decorated()?]);
            }
            if matches!(self.peek(), Tok::Indent) {
                return self.error("unexpected indent");
            }
            return self.simple_line();
        };
        let stmt = match name.as_str() {
            "if" => self.if_stmt()?,
            "while" => self.while_stmt()?,
            "for" => self.for_stmt()?,
            "try" => self.try_stmt()?,
            "with" => self.with_stmt()?,
            "def" => self.funcdef(Vec::new())?,
            "class" => self.classdef(Vec::new())?,
            "async" if matches!(self.peek_nth(1), Tok::Name(n) if n == "def" || n == "for" || n == "with") => {
                self.advance();
                return self.statement();
            }
            _ => return self.simple_line(),
        };
        Ok(vec![stmt])
    }

    fn simple_line(&mut self) -> Result<Vec<Stmt>, SyntaxError> {
        let mut out = vec![self.small_stmt()?];
        while self.eat_op(";") {
            if matches!(self.peek(), Tok::Newline | Tok::End) {
                break;
            }
            out.push(self.small_stmt()?);
        }
        match self.peek() {
            Tok::Newline => {
                self.advance();
                Ok(out)
            }
            Tok::End => Ok(out),
            _ => self.unexpected(),
        }
    }

    fn block(&mut self) -> Result<Vec<Stmt>, SyntaxError> {
        self.expect_op(":")?;
        if !matches!(self.peek(), Tok::Newline) {
            return self.simple_line();
        }
        self.advance();
        if !matches!(self.peek(), Tok::Indent) {
            return self.error("expected an indented block");
        }
        self.advance();
        let mut body = Vec::new();
        loop {
            match self.peek() {
                Tok::Dedent => {
                    self.advance();
                    break;
                }
                Tok::End => break,
                Tok::Newline => {
                    self.advance();
                }
                _ => body.extend(self.statement()?),
            }
        }
        Ok(body)
    }

    fn small_stmt(&mut self) -> Result<Stmt, SyntaxError> {
        let (line, _) = self.here();
        let stmt = |kind| Stmt { kind, line };
        if let Tok::Name(n) = self.peek() {
            match n.as_str() {
                "pass" | "break" | "continue" => {
                    self.advance();
                    return Ok(stmt(StmtKind::Other(Vec::new())));
                }
                "return" => {
                    self.advance();
                    let mut exprs = Vec::new();
                    if !self.at_statement_end() {
                        exprs.push(self.testlist_star()?);
                    }
                    return Ok(stmt(StmtKind::Other(exprs)));
                }
                "raise" => {
                    self.advance();
                    let mut exprs = Vec::new();
                    if !self.at_statement_end() {
                        exprs.push(self.test()?);
                        if self.eat_kw("from") {
                            exprs.push(self.test()?);
                        }
                    }
                    return Ok(stmt(StmtKind::Other(exprs)));
                }
                "del" => {
                    self.advance();
                    let target = self.exprlist()?;
                    return Ok(stmt(StmtKind::Other(vec![target])));
                }
                "assert" => {
                    self.advance();
                    let mut exprs = vec![self.test()?];
                    if self.eat_op(",") {
                        exprs.push(self.test()?);
                    }
                    return Ok(stmt(StmtKind::Other(exprs)));
                }
                "global" | "nonlocal" => {
                    let global = n == "global";
                    self.advance();
                    let mut names = vec![self.identifier()?];
                    while self.eat_op(",") {
                        names.push(self.identifier()?);
                    }
                    return Ok(stmt(if global {
                        StmtKind::Global(names)
                    } else {
                        StmtKind::Nonlocal(names)
                    }));
                }
                "import" => return Ok(stmt(self.import_stmt()?)),
                "from" => return Ok(stmt(self.from_import()?)),
                _ => {}
            }
        }
        self.expr_stmt(line)
    }

    fn at_statement_end(&self) -> bool {
        matches!(self.peek(), Tok::Newline | Tok::End) || self.at_op(";")
    }

    fn dotted_name(&mut self) -> Result<String, SyntaxError> {
        let mut name = self.identifier()?;
        while self.eat_op(".") {
            name.push('.');
            name.push_str(&self.identifier()?);
        }
        Ok(name)
    }

    fn import_stmt(&mut self) -> Result<StmtKind, SyntaxError> {
        self.expect_kw("import")?;
        let mut bound = Vec::new();
        loop {
            let dotted = self.dotted_name()?;
            if self.eat_kw("as") {
                bound.push(self.identifier()?);
            } else {
                bound.push(dotted.split('.').next().unwrap_or_default().to_string());
            }
            if !self.eat_op(",") {
                break;
            }
        }
        Ok(StmtKind::Import(bound))
    }

    fn from_import(&mut self) -> Result<StmtKind, SyntaxError> {
        self.expect_kw("from")?;
        let mut saw_module = false;
        while self.at_op(".") || self.at_op("...") {
            self.advance();
            saw_module = true;
        }
        if !self.at_kw("import") {
            self.dotted_name()?;
            saw_module = true;
        }
        if !saw_module {
            return self.error("expected module name");
        }
        self.expect_kw("import")?;
        if self.eat_op("*") {
            return Ok(StmtKind::Import(Vec::new()));
        }
        let parenthesized = self.eat_op("(");
        let mut bound = Vec::new();
        loop {
            if parenthesized && self.at_op(")") {
                break;
            }
            let name = self.identifier()?;
            bound.push(if self.eat_kw("as") { self.identifier()? } else { name });
            if !self.eat_op(",") {
                break;
            }
        }
        if parenthesized {
            self.expect_op(")")?;
        }
        if bound.is_empty() {
            return self.error("expected imported name");
        }
        Ok(StmtKind::Import(bound))
    }

    fn expr_stmt(&mut self, line: u32) -> Result<Stmt, SyntaxError> {
        let first = if self.at_kw("yield") {
            self.yield_expr()?
        } else {
            self.testlist_star()?
        };
        if self.at_op(":") {
            self.advance();
            let annotation = self.test()?;
            let value = if self.eat_op("=") {
                Some(self.assign_rhs()?)
            } else {
                None
            };
            return Ok(Stmt {
                kind: StmtKind::AnnAssign {
                    target: first,
                    annotation,
                    value,
                },
                line,
            });
        }
        if let Tok::Op(op) = self.peek() {
            if AUG_OPS.contains(op) {
                self.advance();
                let value = self.assign_rhs()?;
                return Ok(Stmt {
                    kind: StmtKind::AugAssign {
                        target: first,
                        value,
                    },
                    line,
                });
            }
        }
        if !self.at_op("=") {
            return Ok(Stmt {
                kind: StmtKind::Expr(first),
                line,
            });
        }
        let mut targets = vec![first];
        let mut value;
        loop {
            self.expect_op("=")?;
            value = self.assign_rhs()?;
            if self.at_op("=") {
                targets.push(value);
            } else {
                break;
            }
        }
        Ok(Stmt {
            kind: StmtKind::Assign { targets, value },
            line,
        })
    }

    fn assign_rhs(&mut self) -> Result<Expr, SyntaxError> {
        if self.at_kw("yield") {
            self.yield_expr()
        } else {
            self.testlist_star()
        }
    }

    fn if_stmt(&mut self) -> Result<Stmt, SyntaxError> {
        let (line, _) = self.here();
        self.expect_kw("if")?;
        let mut header = vec![self.namedexpr_test()?];
        let mut bodies = vec![self.block()?];
        loop {
            if self.eat_kw("elif") {
                header.push(self.namedexpr_test()?);
                bodies.push(self.block()?);
            } else if self.eat_kw("else") {
                bodies.push(self.block()?);
                break;
            } else {
                break;
            }
        }
        Ok(Stmt {
            kind: StmtKind::Block {
                header,
                targets: Vec::new(),
                bodies,
            },
            line,
        })
    }

    fn while_stmt(&mut self) -> Result<Stmt, SyntaxError> {
        let (line, _) = self.here();
        self.expect_kw("while")?;
        let header = vec![self.namedexpr_test()?];
        let mut bodies = vec![self.block()?];
        if self.eat_kw("else") {
            bodies.push(self.block()?);
        }
        Ok(Stmt {
            kind: StmtKind::Block {
                header,
                targets: Vec::new(),
                bodies,
            },
            line,
        })
    }

    fn for_stmt(&mut self) -> Result<Stmt, SyntaxError> {
        let (line, _) = self.here();
        self.expect_kw("for")?;
        let target = self.exprlist()?;
        self.expect_kw("in")?;
        let iter = self.testlist_star()?;
        let mut bodies = vec![self.block()?];
        if self.eat_kw("else") {
            bodies.push(self.block()?);
        }
        Ok(Stmt {
            kind: StmtKind::Block {
                header: vec![iter],
                targets: vec![target],
                bodies,
            },
            line,
        })
    }

    fn try_stmt(&mut self) -> Result<Stmt, SyntaxError> {
        let (line, _) = self.here();
        self.expect_kw("try")?;
        let mut bodies = vec![self.block()?];
        let mut header = Vec::new();
        let mut targets = Vec::new();
        let mut handlers = 0;
        while self.at_kw("except") {
            let at = self.here();
            self.advance();
            self.eat_op("*");
            if !self.at_op(":") {
                header.push(self.test()?);
                if self.eat_op(",") {
                    // py2 `except E, e` is not valid py3
                    return self.error("multiple exception types must be parenthesized");
                }
                if self.eat_kw("as") {
                    let name = self.identifier()?;
                    targets.push(self.expr_at(ExprKind::Name(name), at));
                }
            }
            bodies.push(self.block()?);
            handlers += 1;
        }
        if handlers > 0 && self.eat_kw("else") {
            bodies.push(self.block()?);
        }
        let finally = self.eat_kw("finally");
        if finally {
            bodies.push(self.block()?);
        }
        if handlers == 0 && !finally {
            return self.error("expected `except` or `finally` block");
        }
        Ok(Stmt {
            kind: StmtKind::Block {
                header,
                targets,
                bodies,
            },
            line,
        })
    }

    fn with_item(&mut self, header: &mut Vec<Expr>, targets: &mut Vec<Expr>) -> Result<(), SyntaxError> {
        header.push(self.test()?);
        if self.eat_kw("as") {
            targets.push(self.star_or_bitor()?);
        }
        Ok(())
    }

    fn with_stmt(&mut self) -> Result<Stmt, SyntaxError> {
        let (line, _) = self.here();
        self.expect_kw("with")?;
        let mut header = Vec::new();
        let mut targets = Vec::new();
        let mut parsed = false;
        if self.at_op("(") {
            // parenthesized item list, falling back to a plain expression
            let save = self.pos;
            self.advance();
            let mut h = Vec::new();
            let mut t = Vec::new();
            let attempt = (|| -> Result<(), SyntaxError> {
                loop {
                    self.with_item(&mut h, &mut t)?;
                    if !self.eat_op(",") || self.at_op(")") {
                        break;
                    }
                }
                self.expect_op(")")?;
                if !self.at_op(":") {
                    return self.error("expected `:`");
                }
                Ok(())
            })();
            if attempt.is_ok() {
                header = h;
                targets = t;
                parsed = true;
            } else {
                self.pos = save;
            }
        }
        if !parsed {
            loop {
                self.with_item(&mut header, &mut targets)?;
                if !self.eat_op(",") {
                    break;
                }
            }
        }
        let bodies = vec![self.block()?];
        Ok(Stmt {
            kind: StmtKind::Block {
                header,
                targets,
                bodies,
            },
            line,
        })
    }

    fn decorated(&mut self) -> Result<Stmt, SyntaxError> {
        let mut decorators = Vec::new();
        while self.eat_op("@") {
            decorators.push(self.namedexpr_test()?);
            if !matches!(self.advance(), Tok::Newline) {
                return self.error("expected newline after decorator");
            }
        }
        self.eat_kw("async");
        if self.at_kw("def") {
            self.funcdef(decorators)
        } else if self.at_kw("class") {
            self.classdef(decorators)
        } else {
            self.error("expected `def` or `class` after decorator")
        }
    }

    fn funcdef(&mut self, decorators: Vec<Expr>) -> Result<Stmt, SyntaxError> {
        let (line, _) = self.here();
        self.expect_kw("def")?;
        let name = self.identifier()?;
        if self.at_op("[") {
            // PEP 695 type parameters
            self.advance();
            self.subscript_list()?;
            self.expect_op("]")?;
        }
        self.expect_op("(")?;
        let params = self.params(")", true)?;
        self.expect_op(")")?;
        let returns = if self.eat_op("->") {
            Some(self.test()?)
        } else {
            None
        };
        let body = self.block()?;
        Ok(Stmt {
            kind: StmtKind::FunctionDef {
                name,
                params,
                decorators,
                returns,
                body,
            },
            line,
        })
    }

    fn classdef(&mut self, decorators: Vec<Expr>) -> Result<Stmt, SyntaxError> {
        let (line, _) = self.here();
        self.expect_kw("class")?;
        let name = self.identifier()?;
        if self.at_op("[") {
            self.advance();
            self.subscript_list()?;
            self.expect_op("]")?;
        }
        let bases = if self.eat_op("(") {
            let args = self.arglist()?;
            self.expect_op(")")?;
            args
        } else {
            Vec::new()
        };
        let body = self.block()?;
        Ok(Stmt {
            kind: StmtKind::ClassDef {
                name,
                bases,
                decorators,
                body,
            },
            line,
        })
    }

    /// Parameter list up to (not including) `close`.
    fn params(&mut self, close: &str, annotations: bool) -> Result<Vec<Param>, SyntaxError> {
        let mut params = Vec::new();
        while !self.at_op(close) {
            if self.eat_op("/") {
            } else if self.eat_op("**") || self.eat_op("*") {
                if !self.at_op(",") && !self.at_op(close) {
                    let name = self.identifier()?;
                    let annotation = if annotations && self.eat_op(":") {
                        Some(self.star_or_test()?)
                    } else {
                        None
                    };
                    params.push(Param {
                        name,
                        default: None,
                        annotation,
                    });
                }
            } else {
                let name = self.identifier()?;
                let annotation = if annotations && self.eat_op(":") {
                    Some(self.test()?)
                } else {
                    None
                };
                let default = if self.eat_op("=") {
                    Some(self.test()?)
                } else {
                    None
                };
                params.push(Param {
                    name,
                    default,
                    annotation,
                });
            }
            if !self.eat_op(",") {
                break;
            }
        }
        Ok(params)
    }

    // ---- expressions ----

    fn yield_expr(&mut self) -> Result<Expr, SyntaxError> {
        let at = self.here();
        self.expect_kw("yield")?;
        let mut children = Vec::new();
        if self.eat_kw("from") {
            children.push(self.test()?);
        } else if !self.at_statement_end() && !self.at_op(")") && !self.at_op("=") {
            children.push(self.testlist_star()?);
        }
        Ok(self.expr_at(ExprKind::Other(children), at))
    }

    fn star_or_test(&mut self) -> Result<Expr, SyntaxError> {
        if self.at_op("*") {
            let at = self.here();
            self.advance();
            let inner = self.bitor()?;
            Ok(self.expr_at(ExprKind::Starred(Box::new(inner)), at))
        } else {
            self.test()
        }
    }

    fn star_or_bitor(&mut self) -> Result<Expr, SyntaxError> {
        if self.at_op("*") {
            let at = self.here();
            self.advance();
            let inner = self.bitor()?;
            Ok(self.expr_at(ExprKind::Starred(Box::new(inner)), at))
        } else {
            self.bitor()
        }
    }

    fn starts_expression(&self) -> bool {
        match self.peek() {
            Tok::Name(n) => {
                !is_keyword(n)
                    || matches!(
                        n.as_str(),
                        "None" | "True" | "False" | "not" | "lambda" | "await" | "yield"
                    )
            }
            Tok::Number(_) | Tok::Str { .. } => true,
            Tok::Op(o) => matches!(*o, "(" | "[" | "{" | "-" | "+" | "~" | "*" | "..."),
            _ => false,
        }
    }

    /// Comma-separated tests with optional starred items; a bare trailing
    /// comma makes a tuple.
    fn testlist_star(&mut self) -> Result<Expr, SyntaxError> {
        let at = self.here();
        let first = self.star_or_test()?;
        if !self.at_op(",") {
            return Ok(first);
        }
        let mut items = vec![first];
        while self.eat_op(",") {
            if !self.starts_expression() {
                break;
            }
            items.push(self.star_or_test()?);
        }
        Ok(self.expr_at(ExprKind::Tuple(items), at))
    }

    fn exprlist(&mut self) -> Result<Expr, SyntaxError> {
        let at = self.here();
        let first = self.star_or_bitor()?;
        if !self.at_op(",") {
            return Ok(first);
        }
        let mut items = vec![first];
        while self.eat_op(",") {
            if !self.starts_expression() {
                break;
            }
            items.push(self.star_or_bitor()?);
        }
        Ok(self.expr_at(ExprKind::Tuple(items), at))
    }

    fn namedexpr_test(&mut self) -> Result<Expr, SyntaxError> {
        if let (Tok::Name(n), Tok::Op(":=")) = (self.peek(), self.peek_nth(1)) {
            if !is_keyword(n) {
                let at = self.here();
                let target = n.clone();
                self.advance();
                self.advance();
                let value = self.test()?;
                return Ok(self.expr_at(
                    ExprKind::NamedExpr {
                        target,
                        value: Box::new(value),
                    },
                    at,
                ));
            }
        }
        self.test()
    }

    fn test(&mut self) -> Result<Expr, SyntaxError> {
        if self.at_kw("lambda") {
            return self.lambda(true);
        }
        let at = self.here();
        let body = self.or_test()?;
        if self.at_kw("if") {
            self.advance();
            let cond = self.or_test()?;
            self.expect_kw("else")?;
            let orelse = self.test()?;
            return Ok(self.expr_at(ExprKind::Other(vec![body, cond, orelse]), at));
        }
        Ok(body)
    }

    fn test_nocond(&mut self) -> Result<Expr, SyntaxError> {
        if self.at_kw("lambda") {
            self.lambda(false)
        } else {
            self.or_test()
        }
    }

    fn lambda(&mut self, full: bool) -> Result<Expr, SyntaxError> {
        let at = self.here();
        self.expect_kw("lambda")?;
        let params = self.params(":", false)?;
        self.expect_op(":")?;
        let body = if full { self.test()? } else { self.test_nocond()? };
        Ok(self.expr_at(
            ExprKind::Lambda {
                params,
                body: Box::new(body),
            },
            at,
        ))
    }

    fn or_test(&mut self) -> Result<Expr, SyntaxError> {
        let at = self.here();
        let first = self.and_test()?;
        if !self.at_kw("or") {
            return Ok(first);
        }
        let mut items = vec![first];
        while self.eat_kw("or") {
            items.push(self.and_test()?);
        }
        Ok(self.expr_at(ExprKind::Other(items), at))
    }

    fn and_test(&mut self) -> Result<Expr, SyntaxError> {
        let at = self.here();
        let first = self.not_test()?;
        if !self.at_kw("and") {
            return Ok(first);
        }
        let mut items = vec![first];
        while self.eat_kw("and") {
            items.push(self.not_test()?);
        }
        Ok(self.expr_at(ExprKind::Other(items), at))
    }

    fn not_test(&mut self) -> Result<Expr, SyntaxError> {
        if self.at_kw("not") {
            let at = self.here();
            self.advance();
            let operand = self.not_test()?;
            return Ok(self.expr_at(
                ExprKind::Unary {
                    op: UnaryOp::Not,
                    operand: Box::new(operand),
                },
                at,
            ));
        }
        self.comparison()
    }

    fn comparison_op(&mut self) -> bool {
        if let Tok::Op(o) = self.peek() {
            if COMPARE_OPS.contains(o) {
                self.advance();
                return true;
            }
        }
        if self.eat_kw("in") {
            return true;
        }
        if self.at_kw("not") && matches!(self.peek_nth(1), Tok::Name(n) if n == "in") {
            self.advance();
            self.advance();
            return true;
        }
        if self.eat_kw("is") {
            self.eat_kw("not");
            return true;
        }
        false
    }

    fn comparison(&mut self) -> Result<Expr, SyntaxError> {
        let at = self.here();
        let first = self.bitor()?;
        let mut items = vec![first];
        while self.comparison_op() {
            items.push(self.bitor()?);
        }
        if items.len() == 1 {
            return Ok(items.pop().expect("one item"));
        }
        Ok(self.expr_at(ExprKind::Other(items), at))
    }

    fn binary_level(
        &mut self,
        ops: &[&str],
        next: fn(&mut Self) -> Result<Expr, SyntaxError>,
    ) -> Result<Expr, SyntaxError> {
        let at = self.here();
        let first = next(self)?;
        let mut items = vec![first];
        loop {
            let matched = matches!(self.peek(), Tok::Op(o) if ops.contains(o));
            if !matched {
                break;
            }
            self.advance();
            items.push(next(self)?);
        }
        if items.len() == 1 {
            return Ok(items.pop().expect("one item"));
        }
        Ok(self.expr_at(ExprKind::Other(items), at))
    }

    fn bitor(&mut self) -> Result<Expr, SyntaxError> {
        self.binary_level(&["|"], Self::bitxor)
    }

    fn bitxor(&mut self) -> Result<Expr, SyntaxError> {
        self.binary_level(&["^"], Self::bitand)
    }

    fn bitand(&mut self) -> Result<Expr, SyntaxError> {
        self.binary_level(&["&"], Self::shift)
    }

    fn shift(&mut self) -> Result<Expr, SyntaxError> {
        self.binary_level(&["<<", ">>"], Self::arith)
    }

    fn arith(&mut self) -> Result<Expr, SyntaxError> {
        self.binary_level(&["+", "-"], Self::term)
    }

    fn term(&mut self) -> Result<Expr, SyntaxError> {
        self.binary_level(&["*", "/", "%", "//", "@"], Self::factor)
    }

    fn factor(&mut self) -> Result<Expr, SyntaxError> {
        let op = match self.peek() {
            Tok::Op("+") => Some(UnaryOp::Plus),
            Tok::Op("-") => Some(UnaryOp::Minus),
            Tok::Op("~") => Some(UnaryOp::Invert),
            _ => None,
        };
        if let Some(op) = op {
            let at = self.here();
            self.advance();
            let operand = self.factor()?;
            return Ok(self.expr_at(
                ExprKind::Unary {
                    op,
                    operand: Box::new(operand),
                },
                at,
            ));
        }
        self.power()
    }

    fn power(&mut self) -> Result<Expr, SyntaxError> {
        let at = self.here();
        let awaited = self.eat_kw("await");
        let mut base = self.primary()?;
        if awaited {
            base = self.expr_at(ExprKind::Other(vec![base]), at);
        }
        if self.eat_op("**") {
            let exp = self.factor()?;
            return Ok(self.expr_at(ExprKind::Other(vec![base, exp]), at));
        }
        Ok(base)
    }

    fn primary(&mut self) -> Result<Expr, SyntaxError> {
        let mut expr = self.atom()?;
        loop {
            let at = (expr.line, expr.col);
            if self.eat_op("(") {
                let args = self.arglist()?;
                self.expect_op(")")?;
                expr = self.expr_at(
                    ExprKind::Call {
                        func: Box::new(expr),
                        args,
                    },
                    at,
                );
            } else if self.eat_op("[") {
                let index = self.subscript_list()?;
                self.expect_op("]")?;
                expr = self.expr_at(ExprKind::Other(vec![expr, index]), at);
            } else if self.eat_op(".") {
                let attr = match self.advance() {
                    // attribute names may be soft or hard keywords in practice only soft
                    Tok::Name(n) if !is_keyword(&n) => n,
                    _ => {
                        self.pos -= 1;
                        return self.error("expected attribute name");
                    }
                };
                expr = self.expr_at(
                    ExprKind::Attribute {
                        value: Box::new(expr),
                        attr,
                    },
                    at,
                );
            } else {
                return Ok(expr);
            }
        }
    }

    fn subscript(&mut self) -> Result<Expr, SyntaxError> {
        let at = self.here();
        let mut parts = Vec::new();
        let mut is_slice = false;
        if !self.at_op(":") {
            parts.push(self.star_or_namedexpr()?);
        }
        while self.at_op(":") {
            self.advance();
            is_slice = true;
            if !self.at_op(":") && !self.at_op("]") && !self.at_op(",") {
                parts.push(self.test()?);
            }
            if parts.len() > 3 {
                return self.error("invalid slice");
            }
        }
        if !is_slice && parts.len() == 1 {
            return Ok(parts.pop().expect("one part"));
        }
        Ok(self.expr_at(ExprKind::Other(parts), at))
    }

    fn star_or_namedexpr(&mut self) -> Result<Expr, SyntaxError> {
        if self.at_op("*") {
            self.star_or_bitor()
        } else {
            self.namedexpr_test()
        }
    }

    fn subscript_list(&mut self) -> Result<Expr, SyntaxError> {
        let at = self.here();
        let first = self.subscript()?;
        if !self.at_op(",") {
            return Ok(first);
        }
        let mut items = vec![first];
        while self.eat_op(",") {
            if self.at_op("]") {
                break;
            }
            items.push(self.subscript()?);
        }
        Ok(self.expr_at(ExprKind::Tuple(items), at))
    }

    fn arglist(&mut self) -> Result<Vec<Argument>, SyntaxError> {
        let mut args = Vec::new();
        while !self.at_op(")") {
            if self.eat_op("**") {
                args.push(Argument::DoubleStar(self.test()?));
            } else if self.eat_op("*") {
                args.push(Argument::Star(self.test()?));
            } else if let (Tok::Name(n), Tok::Op("=")) = (self.peek(), self.peek_nth(1)) {
                if is_keyword(n) {
                    return self.error(format!("keyword `{n}` used as argument name"));
                }
                let name = n.clone();
                self.advance();
                self.advance();
                args.push(Argument::Keyword {
                    name,
                    value: self.test()?,
                });
            } else {
                let at = self.here();
                let value = self.namedexpr_test()?;
                if self.at_kw("for") || self.at_kw("async") {
                    let mut parts = vec![value];
                    self.comp_for(&mut parts)?;
                    args.push(Argument::Positional(self.expr_at(ExprKind::Other(parts), at)));
                } else {
                    args.push(Argument::Positional(value));
                }
            }
            if !self.eat_op(",") {
                break;
            }
        }
        Ok(args)
    }

    /// Parses one or more `for ... in ... [if ...]` clauses into `parts`.
    fn comp_for(&mut self, parts: &mut Vec<Expr>) -> Result<(), SyntaxError> {
        loop {
            if self.at_kw("async") {
                self.advance();
            }
            if self.eat_kw("for") {
                parts.push(self.exprlist()?);
                self.expect_kw("in")?;
                parts.push(self.or_test()?);
            } else if self.eat_kw("if") {
                parts.push(self.test_nocond()?);
            } else {
                return Ok(());
            }
        }
    }

    fn atom(&mut self) -> Result<Expr, SyntaxError> {
        let at = self.here();
        match self.peek().clone() {
            Tok::Name(n) => {
                let kind = match n.as_str() {
                    "None" => ExprKind::Constant(Constant::None),
                    "True" => ExprKind::Constant(Constant::True),
                    "False" => ExprKind::Constant(Constant::False),
                    _ if is_keyword(&n) => return self.unexpected(),
                    _ => ExprKind::Name(n),
                };
                self.advance();
                Ok(self.expr_at(kind, at))
            }
            Tok::Number(text) => {
                self.advance();
                Ok(self.expr_at(ExprKind::Number(number_value(&text)), at))
            }
            Tok::Str { .. } => {
                let mut value = String::new();
                let mut formatted = false;
                while let Tok::Str {
                    value: v,
                    formatted: f,
                    ..
                } = self.peek()
                {
                    value.push_str(v);
                    formatted |= *f;
                    self.advance();
                }
                Ok(self.expr_at(ExprKind::Str { value, formatted }, at))
            }
            Tok::Op("...") => {
                self.advance();
                Ok(self.expr_at(ExprKind::Constant(Constant::Ellipsis), at))
            }
            Tok::Op("(") => {
                self.advance();
                if self.eat_op(")") {
                    return Ok(self.expr_at(ExprKind::Tuple(Vec::new()), at));
                }
                if self.at_kw("yield") {
                    let e = self.yield_expr()?;
                    self.expect_op(")")?;
                    return Ok(e);
                }
                let first = self.star_or_namedexpr()?;
                if self.at_kw("for") || self.at_kw("async") {
                    let mut parts = vec![first];
                    self.comp_for(&mut parts)?;
                    self.expect_op(")")?;
                    return Ok(self.expr_at(ExprKind::Other(parts), at));
                }
                if self.eat_op(")") {
                    return Ok(first);
                }
                let mut items = vec![first];
                while self.eat_op(",") {
                    if self.at_op(")") {
                        break;
                    }
                    items.push(self.star_or_namedexpr()?);
                }
                self.expect_op(")")?;
                Ok(self.expr_at(ExprKind::Tuple(items), at))
            }
            Tok::Op("[") => {
                self.advance();
                let mut items = Vec::new();
                if !self.at_op("]") {
                    let first = self.star_or_namedexpr()?;
                    if self.at_kw("for") || self.at_kw("async") {
                        let mut parts = vec![first];
                        self.comp_for(&mut parts)?;
                        self.expect_op("]")?;
                        return Ok(self.expr_at(ExprKind::Other(parts), at));
                    }
                    items.push(first);
                    while self.eat_op(",") {
                        if self.at_op("]") {
                            break;
                        }
                        items.push(self.star_or_namedexpr()?);
                    }
                }
                self.expect_op("]")?;
                Ok(self.expr_at(ExprKind::List(items), at))
            }
            Tok::Op("{") => {
                self.advance();
                self.dict_or_set(at)
            }
            _ => self.unexpected(),
        }
    }

    fn dict_or_set(&mut self, at: (u32, u32)) -> Result<Expr, SyntaxError> {
        if self.eat_op("}") {
            return Ok(self.expr_at(ExprKind::Dict(Vec::new()), at));
        }
        // first element decides dict vs set
        let first_item = if self.eat_op("**") {
            Some(DictItem::Splat(self.bitor()?))
        } else {
            let e = self.star_or_namedexpr()?;
            if self.eat_op(":") {
                Some(DictItem::Pair(e, self.test()?))
            } else {
                let mut items = vec![e];
                if self.at_kw("for") || self.at_kw("async") {
                    self.comp_for(&mut items)?;
                } else {
                    while self.eat_op(",") {
                        if self.at_op("}") {
                            break;
                        }
                        items.push(self.star_or_namedexpr()?);
                    }
                }
                self.expect_op("}")?;
                return Ok(self.expr_at(ExprKind::Other(items), at));
            }
        };
        let mut items: Vec<DictItem> = first_item.into_iter().collect();
        if self.at_kw("for") || self.at_kw("async") {
            let mut parts: Vec<Expr> = Vec::new();
            for item in items.drain(..) {
                match item {
                    DictItem::Pair(k, v) => {
                        parts.push(k);
                        parts.push(v);
                    }
                    DictItem::Splat(_) => return self.error("dict unpacking cannot be used in dict comprehension"),
                }
            }
            self.comp_for(&mut parts)?;
            self.expect_op("}")?;
            return Ok(self.expr_at(ExprKind::Other(parts), at));
        }
        while self.eat_op(",") {
            if self.at_op("}") {
                break;
            }
            if self.eat_op("**") {
                items.push(DictItem::Splat(self.bitor()?));
            } else {
                let k = self.test()?;
                self.expect_op(":")?;
                items.push(DictItem::Pair(k, self.test()?));
            }
        }
        self.expect_op("}")?;
        Ok(self.expr_at(ExprKind::Dict(items), at))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn parses(src: &str) {
        if let Err(e) = parse_module(src) {
            panic!("failed to parse:\n{src}\n{e}");
        }
    }

    fn fails(src: &str) {
        assert!(parse_module(src).is_err(), "expected failure:\n{src}");
    }

    #[test]
    fn numbers() {
        assert_eq!(number_value("67.5"), Some(67.5));
        assert_eq!(number_value("2.1e-9"), Some(2.1e-9));
        assert_eq!(number_value("1_000"), Some(1000.0));
        assert_eq!(number_value("0x1F"), Some(31.0));
        assert_eq!(number_value("0b101"), Some(5.0));
        assert_eq!(number_value("10."), Some(10.0));
        assert_eq!(number_value("3j"), None);
    }

    #[test]
    fn keyword_call() {
        let body = parse_module("pars.set_cosmology(H0=67.5, ombh2=0.022)\n").unwrap();
        let StmtKind::Expr(Expr {
            kind: ExprKind::Call { func, args },
            ..
        }) = &body[0].kind
        else {
            panic!("not a call: {body:?}");
        };
        assert!(matches!(&func.kind, ExprKind::Attribute { attr, .. } if attr == "set_cosmology"));
        assert_eq!(args.len(), 2);
        assert!(matches!(&args[0], Argument::Keyword { name, value } if name == "H0" && value.kind == ExprKind::Number(Some(67.5))));
    }

    #[test]
    fn realistic_script() {
        parses(
            r#"
import numpy as np
import camb
from camb import model, initialpower

# parameters
h = 0.675
H0 = 67.5
pars = camb.CAMBparams()
pars.set_cosmology(H0=H0, ombh2=0.022, omch2=0.122, mnu=0.06, omk=0, tau=0.06)
pars.InitPower.set_params(As=2e-9, ns=0.965, r=0)
pars.set_for_lmax(2500, lens_potential_accuracy=0)
results = camb.get_results(pars)
powers = results.get_cmb_power_spectra(pars, CMB_unit='muK')
totCL = powers['total']
ls = np.arange(totCL.shape[0])
data = np.column_stack((ls[2:], totCL[2:, 0]))
np.savetxt("output.csv", data, delimiter=",", header="ell,TT", comments='')

def helper(a, b=2, *args, c: int = 3, **kw) -> float:
    """docstring"""
    global counter
    if a > b and not c:
        return a ** 2
    elif a in (1, 2):
        pass
    else:
        for i, j in enumerate([x for x in range(10) if x % 2]):
            print(f"{i}: {j}", end='')
    while True:
        break
    try:
        x = {k: v for k, v in kw.items()}
    except (KeyError, ValueError) as err:
        raise RuntimeError("bad") from err
    finally:
        y = lambda q, r=1: q + r
    with open("f") as fh, open("g") as gh:
        data = fh.read()
    return y(1) if a else None

class Model(Base, metaclass=Meta):
    attr: int = 5
    @property
    def value(self):
        return self._v[1:3, ::2]

async def main():
    async with session as s:
        await s.get()
    async for item in stream():
        yield item

cfg = {"H0": 67.5, **other}
s = {1, 2, 3}
t = 1, 2,
a = b = c = 0
a += 1
print(*args, **kwargs)
if (n := len(a)) > 10: pass
del a[0], b
assert x, "msg"
matrix @ other
"#,
        );
    }

    #[test]
    fn syntax_errors() {
        fails("print 'hello'\n");
        fails("def f(:\n    pass\n");
        fails("x = (1, 2\n");
        fails("if x\n    pass\n");
        fails("  x = 1\n");
        fails("for in range(3): pass\n");
        fails("try:\n    pass\n");
        fails("except ValueError, e: pass\n");
        fails("x = = 1\n");
        fails("class:\n    pass\n");
    }

    #[test]
    fn parenthesized_with() {
        parses("with (open(a) as f, open(b) as g):\n    pass\n");
        parses("with (yield):\n    pass\n");
        parses("with (a, b):\n    pass\n");
    }

    #[test]
    fn positions() {
        let body = parse_module("a = 1\n\n\nset_params(H0=1)\n").unwrap();
        assert_eq!(body[1].line, 4);
    }
}
