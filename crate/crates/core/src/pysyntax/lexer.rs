//! Tokenizer for Python source, including INDENT/DEDENT tracking.

use alloc::format;
use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;

use super::SyntaxError;

#[derive(Debug, Clone, PartialEq)]
pub enum Tok {
    Name(String),
    Number(String),
    Str { value: String, formatted: bool, bytes: bool },
    Op(&'static str),
    Newline,
    Indent,
    Dedent,
    End,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Token {
    pub tok: Tok,
    pub line: u32,
    pub col: u32,
}

const OPERATORS: [&str; 47] = [
    "**=", "//=", ">>=", "<<=", "...", "->", ":=", "**", "//", "<<", ">>", "<=", ">=", "==", "!=",
    "+=", "-=", "*=", "/=", "%=", "&=", "|=", "^=", "@=", "+", "-", "*", "/", "%", "@", "&", "|",
    "^", "~", "<", ">", "(", ")", "[", "]", "{", "}", ",", ":", ";", ".", "=",
];

fn is_ident_start(c: char) -> bool {
    c == '_' || c.is_alphabetic()
}

fn is_ident_char(c: char) -> bool {
    c == '_' || c.is_alphanumeric()
}

struct Lexer {
    chars: Vec<char>,
    pos: usize,
    line: u32,
    col: u32,
    indents: Vec<u32>,
    brackets: Vec<char>,
    at_line_start: bool,
    out: Vec<Token>,
}

pub fn tokenize(src: &str) -> Result<Vec<Token>, SyntaxError> {
    let mut lx = Lexer {
        chars: src.chars().collect(),
        pos: 0,
        line: 1,
        col: 0,
        indents: vec![0],
        brackets: Vec::new(),
        at_line_start: true,
        out: Vec::new(),
    };
    lx.run()?;
    Ok(lx.out)
}

impl Lexer {
    fn peek(&self) -> Option<char> {
        self.chars.get(self.pos).copied()
    }

    fn peek_at(&self, offset: usize) -> Option<char> {
        self.chars.get(self.pos + offset).copied()
    }

    fn bump(&mut self) -> Option<char> {
        let c = self.chars.get(self.pos).copied()?;
        self.pos += 1;
        if c == '\n' {
            self.line += 1;
            self.col = 0;
        } else {
            self.col += 1;
        }
        Some(c)
    }

    fn err(&self, message: impl Into<String>) -> SyntaxError {
        SyntaxError {
            line: self.line,
            col: self.col,
            message: message.into(),
        }
    }

    fn push(&mut self, tok: Tok, line: u32, col: u32) {
        self.out.push(Token { tok, line, col });
    }

    fn last_is_newline(&self) -> bool {
        matches!(
            self.out.last().map(|t| &t.tok),
            None | Some(Tok::Newline) | Some(Tok::Indent) | Some(Tok::Dedent)
        )
    }

    fn run(&mut self) -> Result<(), SyntaxError> {
        loop {
            if self.at_line_start && self.brackets.is_empty() {
                if !self.handle_indentation()? {
                    break;
                }
            }
            let Some(c) = self.peek() else { break };
            match c {
                ' ' | '\t' | '\x0c' | '\r' => {
                    self.bump();
                }
                '#' => self.skip_comment(),
                '\\' => {
                    self.bump();
                    if self.peek() == Some('\r') {
                        self.bump();
                    }
                    if self.peek() != Some('\n') {
                        return Err(self.err("unexpected character after line continuation"));
                    }
                    self.bump();
                    if self.peek().is_none() {
                        return Err(self.err("unexpected end of file after line continuation"));
                    }
                }
                '\n' => {
                    let (line, col) = (self.line, self.col);
                    self.bump();
                    if self.brackets.is_empty() {
                        if !self.last_is_newline() {
                            self.push(Tok::Newline, line, col);
                        }
                        self.at_line_start = true;
                    }
                }
                '"' | '\'' => self.string(String::new())?,
                c if c.is_ascii_digit() => self.number()?,
                '.' if self.peek_at(1).is_some_and(|d| d.is_ascii_digit()) => self.number()?,
                c if is_ident_start(c) => self.name()?,
                _ => self.operator()?,
            }
        }
        if !self.brackets.is_empty() {
            return Err(self.err("unexpected end of file inside brackets"));
        }
        let (line, col) = (self.line, self.col);
        if !self.last_is_newline() {
            self.push(Tok::Newline, line, col);
        }
        while self.indents.len() > 1 {
            self.indents.pop();
            self.push(Tok::Dedent, line, col);
        }
        self.push(Tok::End, line, col);
        Ok(())
    }

    fn skip_comment(&mut self) {
        while let Some(c) = self.peek() {
            if c == '\n' {
                break;
            }
            self.bump();
        }
    }

    /// Measures indentation of a new logical line. Blank and comment-only
    /// lines are consumed. Returns false at end of input.
    fn handle_indentation(&mut self) -> Result<bool, SyntaxError> {
        loop {
            let mut width = 0u32;
            while let Some(c) = self.peek() {
                match c {
                    ' ' => width += 1,
                    '\t' => width = (width / 8 + 1) * 8,
                    '\x0c' => width = 0,
                    _ => break,
                }
                self.bump();
            }
            match self.peek() {
                None => return Ok(false),
                Some('#') => {
                    self.skip_comment();
                    self.bump();
                }
                Some('\n') => {
                    self.bump();
                }
                Some('\r') if self.peek_at(1) == Some('\n') => {
                    self.bump();
                    self.bump();
                }
                Some('\\') => {
                    // a continuation as the first token; treat as part of a line
                    self.at_line_start = false;
                    return Ok(true);
                }
                Some(_) => {
                    let (line, col) = (self.line, self.col);
                    let current = *self.indents.last().expect("indent stack never empty");
                    if width > current {
                        self.indents.push(width);
                        self.push(Tok::Indent, line, col);
                    } else {
                        while width < *self.indents.last().expect("non-empty") {
                            self.indents.pop();
                            self.push(Tok::Dedent, line, col);
                        }
                        if width != *self.indents.last().expect("non-empty") {
                            return Err(self.err("unindent does not match any outer indentation level"));
                        }
                    }
                    self.at_line_start = false;
                    return Ok(true);
                }
            }
        }
    }

    fn name(&mut self) -> Result<(), SyntaxError> {
        let (line, col) = (self.line, self.col);
        let mut ident = String::new();
        while let Some(c) = self.peek() {
            if !is_ident_char(c) {
                break;
            }
            ident.push(c);
            self.bump();
        }
        if matches!(self.peek(), Some('"') | Some('\''))
            && ident.len() <= 2
            && ident.chars().all(|c| matches!(c.to_ascii_lowercase(), 'r' | 'b' | 'u' | 'f'))
        {
            return self.string(ident);
        }
        self.push(Tok::Name(ident), line, col);
        Ok(())
    }

    fn digits(&mut self, text: &mut String, pred: impl Fn(char) -> bool) {
        while let Some(c) = self.peek() {
            if pred(c) || c == '_' {
                text.push(c);
                self.bump();
            } else {
                break;
            }
        }
    }

    fn number(&mut self) -> Result<(), SyntaxError> {
        let (line, col) = (self.line, self.col);
        let mut text = String::new();
        let radix_prefix = self.peek() == Some('0')
            && matches!(self.peek_at(1), Some('x' | 'X' | 'o' | 'O' | 'b' | 'B'));
        if radix_prefix {
            text.push(self.bump().expect("peeked"));
            text.push(self.bump().expect("peeked"));
            self.digits(&mut text, |c| c.is_ascii_hexdigit());
        } else {
            self.digits(&mut text, |c| c.is_ascii_digit());
            if self.peek() == Some('.') {
                text.push('.');
                self.bump();
                self.digits(&mut text, |c| c.is_ascii_digit());
            }
            if matches!(self.peek(), Some('e' | 'E')) {
                let sign = matches!(self.peek_at(1), Some('+' | '-'));
                let digit_at = if sign { 2 } else { 1 };
                if self.peek_at(digit_at).is_some_and(|c| c.is_ascii_digit()) {
                    text.push(self.bump().expect("peeked"));
                    if sign {
                        text.push(self.bump().expect("peeked"));
                    }
                    self.digits(&mut text, |c| c.is_ascii_digit());
                }
            }
            if matches!(self.peek(), Some('j' | 'J')) {
                text.push(self.bump().expect("peeked"));
            }
        }
        if self.peek().is_some_and(is_ident_char) {
            return Err(self.err(format!("invalid numeric literal `{text}`")));
        }
        self.push(Tok::Number(text), line, col);
        Ok(())
    }

    fn string(&mut self, prefix: String) -> Result<(), SyntaxError> {
        let line = self.line;
        let col = self.col.saturating_sub(prefix.len() as u32);
        let lower = prefix.to_ascii_lowercase();
        let raw = lower.contains('r');
        let quote = self.bump().expect("caller saw a quote");
        let triple = self.peek() == Some(quote) && self.peek_at(1) == Some(quote);
        if triple {
            self.bump();
            self.bump();
        }
        let mut value = String::new();
        loop {
            let Some(c) = self.bump() else {
                return Err(SyntaxError {
                    line,
                    col,
                    message: "unterminated string literal".into(),
                });
            };
            if c == quote {
                if !triple {
                    break;
                }
                if self.peek() == Some(quote) && self.peek_at(1) == Some(quote) {
                    self.bump();
                    self.bump();
                    break;
                }
                value.push(c);
                continue;
            }
            match c {
                '\n' if !triple => {
                    return Err(SyntaxError {
                        line,
                        col,
                        message: "unterminated string literal".into(),
                    })
                }
                '\\' => {
                    let Some(next) = self.bump() else { continue };
                    if raw {
                        value.push('\\');
                        value.push(next);
                        continue;
                    }
                    match next {
                        '\n' => {}
                        'n' => value.push('\n'),
                        't' => value.push('\t'),
                        'r' => value.push('\r'),
                        '0' => value.push('\0'),
                        '\\' | '\'' | '"' => value.push(next),
                        other => {
                            value.push('\\');
                            value.push(other);
                        }
                    }
                }
                _ => value.push(c),
            }
        }
        self.push(
            Tok::Str {
                value,
                formatted: lower.contains('f'),
                bytes: lower.contains('b'),
            },
            line,
            col,
        );
        Ok(())
    }

    fn operator(&mut self) -> Result<(), SyntaxError> {
        let (line, col) = (self.line, self.col);
        for op in OPERATORS {
            let n = op.len();
            if op.chars().enumerate().all(|(i, c)| self.peek_at(i) == Some(c)) {
                for _ in 0..n {
                    self.bump();
                }
                match op {
                    "(" | "[" | "{" => self.brackets.push(op.chars().next().expect("one char")),
                    ")" | "]" | "}" => {
                        let open = match op {
                            ")" => '(',
                            "]" => '[',
                            _ => '{',
                        };
                        if self.brackets.pop() != Some(open) {
                            return Err(SyntaxError {
                                line,
                                col,
                                message: format!("unmatched `{op}`"),
                            });
                        }
                    }
                    _ => {}
                }
                self.push(Tok::Op(op), line, col);
                return Ok(());
            }
        }
        Err(self.err(format!(
            "invalid character `{}`",
            self.peek().unwrap_or(' ')
        )))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn kinds(src: &str) -> Vec<Tok> {
        tokenize(src).unwrap().into_iter().map(|t| t.tok).collect()
    }

    fn name(s: &str) -> Tok {
        Tok::Name(s.into())
    }

    #[test]
    fn simple_assignment() {
        assert_eq!(
            kinds("h = 67.5\n"),
            vec![name("h"), Tok::Op("="), Tok::Number("67.5".into()), Tok::Newline, Tok::End]
        );
    }

    #[test]
    fn indentation() {
        let toks = kinds("if x:\n    y = 1\n\n    # c\n    z = 2\nw = 3\n");
        assert_eq!(toks.iter().filter(|t| **t == Tok::Indent).count(), 1);
        assert_eq!(toks.iter().filter(|t| **t == Tok::Dedent).count(), 1);
    }

    #[test]
    fn brackets_join_lines() {
        let toks = kinds("f(a,\n  b)\n");
        assert_eq!(toks.iter().filter(|t| **t == Tok::Newline).count(), 1);
    }

    #[test]
    fn numbers() {
        for n in ["1", "1.5", ".5", "1e-9", "2.1E+09", "0x1F", "1_000", "3j", "10."] {
            assert_eq!(kinds(n)[0], Tok::Number(n.into()), "{n}");
        }
        assert!(tokenize("1abc").is_err());
    }

    #[test]
    fn strings() {
        let toks = kinds("a = 'x\\'y' + r\"\\d\" + f'{v}' + \"\"\"multi\nline\"\"\"\n");
        let strs: Vec<_> = toks
            .iter()
            .filter_map(|t| match t {
                Tok::Str { value, .. } => Some(value.as_str()),
                _ => None,
            })
            .collect();
        assert_eq!(strs, vec!["x'y", "\\d", "{v}", "multi\nline"]);
        assert!(tokenize("s = 'open\n").is_err());
        assert!(tokenize("s = '''open\n").is_err());
    }

    #[test]
    fn errors() {
        assert!(tokenize("f(1\n").is_err());
        assert!(tokenize("x = 1)\n").is_err());
        assert!(tokenize("if x:\n    a\n  b\n").is_err());
        assert!(tokenize("x = $\n").is_err());
    }

    #[test]
    fn continuation() {
        let toks = kinds("x = 1 + \\\n    2\n");
        assert_eq!(toks.iter().filter(|t| **t == Tok::Newline).count(), 1);
        assert!(!toks.contains(&Tok::Indent));
    }

    #[test]
    fn line_numbers() {
        let toks = tokenize("a = 1\n\nb = 2\n").unwrap();
        let b = toks.iter().find(|t| t.tok == name("b")).unwrap();
        assert_eq!((b.line, b.col), (3, 0));
    }
}
