//! Recursive-descent parser for the expression language.
//!
//! ```text
//! expr   := term (('+'|'-') term)*
//! term   := factor (('*'|'/') factor)*
//! factor := base ('^' ['-'] integer)?
//! base   := rational | ident | ident '(' expr ')' | '(' expr ')' | '-' factor
//! ```
//!
//! Formal derivatives of opaque functions are written with primes,
//! `U''(q1)`, which is how the printer emits them.

use super::expr::Expr;
use super::poly::Rational;
use super::vars::VarTable;
use super::SymError;

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Ast {
    Num(Rational),
    Sym(String),
    Exp(Box<Ast>),
    Call { name: String, order: u32, arg: Box<Ast> },
    Neg(Box<Ast>),
    Add(Box<Ast>, Box<Ast>),
    Sub(Box<Ast>, Box<Ast>),
    Mul(Box<Ast>, Box<Ast>),
    Div(Box<Ast>, Box<Ast>),
    Pow(Box<Ast>, i32),
}

impl Ast {
    pub fn to_expr(&self) -> Result<Expr, SymError> {
        Ok(match self {
            Ast::Num(q) => Expr::rational(q.clone()),
            Ast::Sym(s) => Expr::sym(s),
            Ast::Exp(a) => Expr::exp(&a.to_expr()?)?,
            Ast::Call { name, order, arg } => Expr::func(name, *order, arg.to_expr()?),
            Ast::Neg(a) => a.to_expr()?.neg(),
            Ast::Add(a, b) => a.to_expr()? + b.to_expr()?,
            Ast::Sub(a, b) => a.to_expr()? - b.to_expr()?,
            Ast::Mul(a, b) => a.to_expr()? * b.to_expr()?,
            Ast::Div(a, b) => a.to_expr()?.div(&b.to_expr()?)?,
            Ast::Pow(a, k) => a.to_expr()?.pow(*k)?,
        })
    }
}

#[derive(Clone, Debug, PartialEq)]
enum Tok {
    Num(String),
    Ident(String),
    Prime,
    Op(char),
    End,
}

fn tokenize(text: &str) -> Result<Vec<(Tok, usize)>, SymError> {
    let chars: Vec<char> = text.chars().collect();
    let mut out = Vec::new();
    let mut i = 0;
    while i < chars.len() {
        let c = chars[i];
        if c.is_whitespace() {
            i += 1;
        } else if c.is_ascii_digit() || c == '.' {
            let start = i;
            while i < chars.len() && (chars[i].is_ascii_digit() || chars[i] == '.') {
                i += 1;
            }
            out.push((Tok::Num(chars[start..i].iter().collect()), start));
        } else if c.is_alphabetic() || c == '_' {
            let start = i;
            while i < chars.len() && (chars[i].is_alphanumeric() || chars[i] == '_') {
                i += 1;
            }
            out.push((Tok::Ident(chars[start..i].iter().collect()), start));
        } else if c == '\'' {
            out.push((Tok::Prime, i));
            i += 1;
        } else if "+-*/^()".contains(c) {
            out.push((Tok::Op(c), i));
            i += 1;
        } else {
            return Err(SymError::Syntax {
                pos: i,
                msg: format!("unexpected character `{c}`"),
            });
        }
    }
    out.push((Tok::End, chars.len()));
    Ok(out)
}

struct Parser<'a> {
    toks: Vec<(Tok, usize)>,
    at: usize,
    vars: &'a VarTable,
}

impl<'a> Parser<'a> {
    fn peek(&self) -> &Tok {
        &self.toks[self.at].0
    }

    fn pos(&self) -> usize {
        self.toks[self.at].1
    }

    fn bump(&mut self) -> Tok {
        let t = self.toks[self.at].0.clone();
        if self.at + 1 < self.toks.len() {
            self.at += 1;
        }
        t
    }

    fn err<T>(&self, msg: impl Into<String>) -> Result<T, SymError> {
        Err(SymError::Syntax {
            pos: self.pos(),
            msg: msg.into(),
        })
    }

    fn expect(&mut self, c: char) -> Result<(), SymError> {
        if *self.peek() == Tok::Op(c) {
            self.bump();
            Ok(())
        } else {
            self.err(format!("expected `{c}`"))
        }
    }

    fn expr(&mut self) -> Result<Ast, SymError> {
        let mut lhs = self.term()?;
        loop {
            match self.peek() {
                Tok::Op('+') => {
                    self.bump();
                    lhs = Ast::Add(Box::new(lhs), Box::new(self.term()?));
                }
                Tok::Op('-') => {
                    self.bump();
                    lhs = Ast::Sub(Box::new(lhs), Box::new(self.term()?));
                }
                _ => return Ok(lhs),
            }
        }
    }

    fn term(&mut self) -> Result<Ast, SymError> {
        let mut lhs = self.factor()?;
        loop {
            match self.peek() {
                Tok::Op('*') => {
                    self.bump();
                    lhs = Ast::Mul(Box::new(lhs), Box::new(self.factor()?));
                }
                Tok::Op('/') => {
                    self.bump();
                    lhs = Ast::Div(Box::new(lhs), Box::new(self.factor()?));
                }
                _ => return Ok(lhs),
            }
        }
    }

    fn factor(&mut self) -> Result<Ast, SymError> {
        let base = self.base()?;
        if *self.peek() != Tok::Op('^') {
            return Ok(base);
        }
        self.bump();
        let pos = self.pos();
        let neg = if *self.peek() == Tok::Op('-') {
            self.bump();
            true
        } else {
            false
        };
        match self.bump() {
            Tok::Num(s) => {
                if s.contains('.') {
                    return Err(SymError::NonIntegerExponent { pos });
                }
                let k: i32 = s.parse().map_err(|_| SymError::Syntax {
                    pos,
                    msg: "exponent out of range".into(),
                })?;
                Ok(Ast::Pow(Box::new(base), if neg { -k } else { k }))
            }
            Tok::Op('(') => Err(SymError::NonIntegerExponent { pos }),
            _ => Err(SymError::Syntax {
                pos,
                msg: "expected integer exponent".into(),
            }),
        }
    }

    fn base(&mut self) -> Result<Ast, SymError> {
        let pos = self.pos();
        match self.bump() {
            Tok::Num(s) => {
                let q = super::parse_rational(&s).ok_or(SymError::Syntax {
                    pos,
                    msg: format!("bad number `{s}`"),
                })?;
                Ok(Ast::Num(q))
            }
            Tok::Op('(') => {
                let e = self.expr()?;
                self.expect(')')?;
                Ok(e)
            }
            Tok::Op('-') => Ok(Ast::Neg(Box::new(self.factor()?))),
            Tok::Ident(name) => self.ident(name, pos),
            Tok::End => Err(SymError::Syntax {
                pos,
                msg: "unexpected end of input".into(),
            }),
            t => Err(SymError::Syntax {
                pos,
                msg: format!("unexpected token {t:?}"),
            }),
        }
    }

    fn ident(&mut self, name: String, pos: usize) -> Result<Ast, SymError> {
        let mut order = 0u32;
        while *self.peek() == Tok::Prime {
            self.bump();
            order += 1;
        }
        if name == "exp" && order == 0 {
            self.expect('(')?;
            let e = self.expr()?;
            self.expect(')')?;
            return Ok(Ast::Exp(Box::new(e)));
        }
        if self.vars.is_function(&name) {
            self.expect('(')?;
            let e = self.expr()?;
            self.expect(')')?;
            return Ok(Ast::Call {
                name,
                order,
                arg: Box::new(e),
            });
        }
        if order > 0 {
            return Err(SymError::Syntax {
                pos,
                msg: format!("`{name}` is not a function"),
            });
        }
        if self.vars.is_symbol(&name) {
            return Ok(Ast::Sym(name));
        }
        Err(SymError::UnknownIdentifier { name, pos })
    }
}

pub fn parse_ast(text: &str, vars: &VarTable) -> Result<Ast, SymError> {
    let mut p = Parser {
        toks: tokenize(text)?,
        at: 0,
        vars,
    };
    let e = p.expr()?;
    if *p.peek() != Tok::End {
        return p.err("trailing input");
    }
    Ok(e)
}

/// Parse and normalize.
pub fn parse(text: &str, vars: &VarTable) -> Result<Expr, SymError> {
    parse_ast(text, vars)?.to_expr()
}
