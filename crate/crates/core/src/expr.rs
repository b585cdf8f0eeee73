//! A small real-valued expression language for integrand definitions.
//!
//! ```text
//! expr   := term (('+' | '-') term)*
//! term   := factor (('*' | '/') factor)*
//! factor := ('-' | '+') factor | power
//! power  := atom ('^' factor)?            right associative
//! atom   := number | ident | ident '(' expr (',' expr)* ')' | '(' expr ')'
//! ```
//!
//! Identifiers are the variable `x`, the constants `pi` and `e`, function
//! names, and free parameters bound at evaluation time. There is no implicit
//! multiplication.

use std::collections::HashMap;
use std::fmt;

use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum BinOp {
    Add,
    Sub,
    Mul,
    Div,
    Pow,
}

impl BinOp {
    fn symbol(self) -> char {
        match self {
            BinOp::Add => '+',
            BinOp::Sub => '-',
            BinOp::Mul => '*',
            BinOp::Div => '/',
            BinOp::Pow => '^',
        }
    }

    #[inline]
    fn apply(self, l: f64, r: f64) -> f64 {
        match self {
            BinOp::Add => l + r,
            BinOp::Sub => l - r,
            BinOp::Mul => l * r,
            BinOp::Div => l / r,
            BinOp::Pow => pow(l, r),
        }
    }
}

/// `powi` for small integral exponents, `powf` otherwise.
#[inline]
fn pow(base: f64, exp: f64) -> f64 {
    if exp.fract() == 0.0 && exp.abs() <= 64.0 {
        base.powi(exp as i32)
    } else {
        base.powf(exp)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Constant {
    Pi,
    E,
}

impl Constant {
    fn value(self) -> f64 {
        match self {
            Constant::Pi => std::f64::consts::PI,
            Constant::E => std::f64::consts::E,
        }
    }

    fn name(self) -> &'static str {
        match self {
            Constant::Pi => "pi",
            Constant::E => "e",
        }
    }
}

/// Built-in functions.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Func {
    Sin,
    Cos,
    Tan,
    Atan,
    Atan2,
    Exp,
    Log,
    Sqrt,
    Abs,
    Tanh,
    Cosh,
    Sinh,
    Sech,
    Erf,
    Pow,
    Min,
    Max,
}

impl Func {
    pub const ALL: [Func; 17] = [
        Func::Sin,
        Func::Cos,
        Func::Tan,
        Func::Atan,
        Func::Atan2,
        Func::Exp,
        Func::Log,
        Func::Sqrt,
        Func::Abs,
        Func::Tanh,
        Func::Cosh,
        Func::Sinh,
        Func::Sech,
        Func::Erf,
        Func::Pow,
        Func::Min,
        Func::Max,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Func::Sin => "sin",
            Func::Cos => "cos",
            Func::Tan => "tan",
            Func::Atan => "atan",
            Func::Atan2 => "atan2",
            Func::Exp => "exp",
            Func::Log => "log",
            Func::Sqrt => "sqrt",
            Func::Abs => "abs",
            Func::Tanh => "tanh",
            Func::Cosh => "cosh",
            Func::Sinh => "sinh",
            Func::Sech => "sech",
            Func::Erf => "erf",
            Func::Pow => "pow",
            Func::Min => "min",
            Func::Max => "max",
        }
    }

    pub fn arity(self) -> usize {
        match self {
            Func::Atan2 | Func::Pow | Func::Min | Func::Max => 2,
            _ => 1,
        }
    }

    pub fn from_name(name: &str) -> Option<Func> {
        Func::ALL.iter().copied().find(|f| f.name() == name)
    }

    fn apply(self, args: &[f64]) -> f64 {
        let a = args[0];
        match self {
            Func::Sin => a.sin(),
            Func::Cos => a.cos(),
            Func::Tan => a.tan(),
            Func::Atan => a.atan(),
            Func::Atan2 => a.atan2(args[1]),
            Func::Exp => a.exp(),
            Func::Log => a.ln(),
            Func::Sqrt => a.sqrt(),
            Func::Abs => a.abs(),
            Func::Tanh => a.tanh(),
            Func::Cosh => a.cosh(),
            Func::Sinh => a.sinh(),
            Func::Sech => 1.0 / a.cosh(),
            Func::Erf => libm::erf(a),
            Func::Pow => pow(a, args[1]),
            Func::Min => a.min(args[1]),
            Func::Max => a.max(args[1]),
        }
    }
}

/// Expression tree.
#[derive(Clone, Debug, PartialEq)]
pub enum Expr {
    Num(f64),
    Var,
    Const(Constant),
    Param(String),
    Neg(Box<Expr>),
    Binary(BinOp, Box<Expr>, Box<Expr>),
    Call(Func, Vec<Expr>),
}

impl Expr {
    /// Names of all free parameters, sorted and deduplicated.
    pub fn params(&self) -> Vec<String> {
        let mut out = Vec::new();
        self.collect_params(&mut out);
        out.sort();
        out.dedup();
        out
    }

    fn collect_params(&self, out: &mut Vec<String>) {
        match self {
            Expr::Param(p) => out.push(p.clone()),
            Expr::Neg(e) => e.collect_params(out),
            Expr::Binary(_, l, r) => {
                l.collect_params(out);
                r.collect_params(out);
            }
            Expr::Call(_, args) => args.iter().for_each(|a| a.collect_params(out)),
            Expr::Num(_) | Expr::Var | Expr::Const(_) => {}
        }
    }

    /// Evaluates at `x` with parameters looked up in `params`.
    pub fn eval(&self, x: f64, params: &HashMap<String, f64>) -> Result<f64> {
        Ok(match self {
            Expr::Num(v) => *v,
            Expr::Var => x,
            Expr::Const(c) => c.value(),
            Expr::Param(p) => *params.get(p).ok_or_else(|| Error::UnboundParameter(p.clone()))?,
            Expr::Neg(e) => -e.eval(x, params)?,
            Expr::Binary(op, l, r) => op.apply(l.eval(x, params)?, r.eval(x, params)?),
            Expr::Call(f, args) => {
                let vals = args.iter().map(|a| a.eval(x, params)).collect::<Result<Vec<_>>>()?;
                f.apply(&vals)
            }
        })
    }

    /// Substitutes all parameters, yielding an expression of `x` alone.
    pub fn bind(&self, params: &HashMap<String, f64>) -> Result<BoundExpr> {
        Ok(BoundExpr(self.substitute(params)?))
    }

    fn substitute(&self, params: &HashMap<String, f64>) -> Result<Expr> {
        Ok(match self {
            Expr::Param(p) => Expr::Num(*params.get(p).ok_or_else(|| Error::UnboundParameter(p.clone()))?),
            Expr::Neg(e) => Expr::Neg(Box::new(e.substitute(params)?)),
            Expr::Binary(op, l, r) => {
                Expr::Binary(*op, Box::new(l.substitute(params)?), Box::new(r.substitute(params)?))
            }
            Expr::Call(f, args) => Expr::Call(*f, args.iter().map(|a| a.substitute(params)).collect::<Result<_>>()?),
            other => other.clone(),
        })
    }
}

/// Prints fully parenthesized source that parses back to the same tree.
impl fmt::Display for Expr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Expr::Num(v) => write!(f, "{v:?}"),
            Expr::Var => f.write_str("x"),
            Expr::Const(c) => f.write_str(c.name()),
            Expr::Param(p) => f.write_str(p),
            Expr::Neg(e) => write!(f, "(-{e})"),
            Expr::Binary(op, l, r) => write!(f, "({l} {} {r})", op.symbol()),
            Expr::Call(func, args) => {
                write!(f, "{}(", func.name())?;
                for (i, a) in args.iter().enumerate() {
                    if i > 0 {
                        f.write_str(", ")?;
                    }
                    write!(f, "{a}")?;
                }
                f.write_str(")")
            }
        }
    }
}

/// An expression with every parameter substituted.
#[derive(Clone, Debug, PartialEq)]
pub struct BoundExpr(Expr);

impl BoundExpr {
    pub fn expr(&self) -> &Expr {
        &self.0
    }

    pub fn eval(&self, x: f64) -> f64 {
        eval_bound(&self.0, x)
    }
}

fn eval_bound(e: &Expr, x: f64) -> f64 {
    match e {
        Expr::Num(v) => *v,
        Expr::Var => x,
        Expr::Const(c) => c.value(),
        Expr::Param(_) => f64::NAN,
        Expr::Neg(e) => -eval_bound(e, x),
        Expr::Binary(op, l, r) => op.apply(eval_bound(l, x), eval_bound(r, x)),
        Expr::Call(f, args) => match args.as_slice() {
            [a] => f.apply(&[eval_bound(a, x)]),
            [a, b] => f.apply(&[eval_bound(a, x), eval_bound(b, x)]),
            _ => f64::NAN,
        },
    }
}

#[derive(Clone, Debug, PartialEq)]
enum Tok {
    Num(f64),
    Ident(String),
    Op(char),
    LParen,
    RParen,
    Comma,
    End,
}

fn lex(src: &str) -> Result<Vec<(Tok, usize)>> {
    let bytes = src.as_bytes();
    let mut out = Vec::new();
    let mut i = 0;
    while i < bytes.len() {
        let c = bytes[i];
        if c.is_ascii_whitespace() {
            i += 1;
            continue;
        }
        let start = i;
        if c.is_ascii_digit() || c == b'.' {
            while i < bytes.len() && (bytes[i].is_ascii_digit() || bytes[i] == b'.') {
                i += 1;
            }
            if i < bytes.len() && (bytes[i] == b'e' || bytes[i] == b'E') {
                let mut j = i + 1;
                if j < bytes.len() && (bytes[j] == b'+' || bytes[j] == b'-') {
                    j += 1;
                }
                if j < bytes.len() && bytes[j].is_ascii_digit() {
                    while j < bytes.len() && bytes[j].is_ascii_digit() {
                        j += 1;
                    }
                    i = j;
                }
            }
            let text = &src[start..i];
            let v: f64 = text.parse().map_err(|_| Error::Syntax {
                offset: start,
                message: format!("malformed number `{text}`"),
            })?;
            out.push((Tok::Num(v), start));
        } else if c.is_ascii_alphabetic() || c == b'_' {
            while i < bytes.len() && (bytes[i].is_ascii_alphanumeric() || bytes[i] == b'_') {
                i += 1;
            }
            out.push((Tok::Ident(src[start..i].to_string()), start));
        } else {
            let tok = match c {
                b'+' | b'-' | b'*' | b'/' | b'^' => Tok::Op(c as char),
                b'(' => Tok::LParen,
                b')' => Tok::RParen,
                b',' => Tok::Comma,
                _ => {
                    let ch = src[start..].chars().next().unwrap_or('?');
                    return Err(Error::Syntax {
                        offset: start,
                        message: format!("unexpected character `{ch}`"),
                    });
                }
            };
            out.push((tok, start));
            i += 1;
        }
    }
    out.push((Tok::End, src.len()));
    Ok(out)
}

struct Parser<'a> {
    toks: Vec<(Tok, usize)>,
    pos: usize,
    allowed: Option<&'a [&'a str]>,
}

impl Parser<'_> {
    fn peek(&self) -> &Tok {
        &self.toks[self.pos].0
    }

    fn offset(&self) -> usize {
        self.toks[self.pos].1
    }

    fn bump(&mut self) -> (Tok, usize) {
        let t = self.toks[self.pos].clone();
        if self.pos + 1 < self.toks.len() {
            self.pos += 1;
        }
        t
    }

    fn syntax<T>(&self, message: impl Into<String>) -> Result<T> {
        Err(Error::Syntax {
            offset: self.offset(),
            message: message.into(),
        })
    }

    fn expr(&mut self) -> Result<Expr> {
        let mut lhs = self.term()?;
        loop {
            let op = match self.peek() {
                Tok::Op('+') => BinOp::Add,
                Tok::Op('-') => BinOp::Sub,
                _ => return Ok(lhs),
            };
            self.bump();
            let rhs = self.term()?;
            lhs = Expr::Binary(op, Box::new(lhs), Box::new(rhs));
        }
    }

    fn term(&mut self) -> Result<Expr> {
        let mut lhs = self.factor()?;
        loop {
            let op = match self.peek() {
                Tok::Op('*') => BinOp::Mul,
                Tok::Op('/') => BinOp::Div,
                _ => return Ok(lhs),
            };
            self.bump();
            let rhs = self.factor()?;
            lhs = Expr::Binary(op, Box::new(lhs), Box::new(rhs));
        }
    }

    fn factor(&mut self) -> Result<Expr> {
        match self.peek() {
            Tok::Op('-') => {
                self.bump();
                Ok(Expr::Neg(Box::new(self.factor()?)))
            }
            Tok::Op('+') => {
                self.bump();
                self.factor()
            }
            _ => self.power(),
        }
    }

    fn power(&mut self) -> Result<Expr> {
        let base = self.atom()?;
        if self.peek() == &Tok::Op('^') {
            self.bump();
            let exp = self.factor()?;
            return Ok(Expr::Binary(BinOp::Pow, Box::new(base), Box::new(exp)));
        }
        Ok(base)
    }

    fn atom(&mut self) -> Result<Expr> {
        match self.peek().clone() {
            Tok::Num(v) => {
                self.bump();
                Ok(Expr::Num(v))
            }
            Tok::LParen => {
                self.bump();
                let e = self.expr()?;
                self.expect_rparen()?;
                Ok(e)
            }
            Tok::Ident(name) => {
                let (_, offset) = self.bump();
                if self.peek() == &Tok::LParen {
                    self.bump();
                    return self.call(name, offset);
                }
                match name.as_str() {
                    "x" => Ok(Expr::Var),
                    "pi" => Ok(Expr::Const(Constant::Pi)),
                    "e" => Ok(Expr::Const(Constant::E)),
                    _ if Func::from_name(&name).is_some() => self.syntax(format!("function `{name}` needs arguments")),
                    _ => match self.allowed {
                        Some(list) if !list.contains(&name.as_str()) => Err(Error::UnknownIdentifier { name, offset }),
                        _ => Ok(Expr::Param(name)),
                    },
                }
            }
            Tok::End => self.syntax("unexpected end of input"),
            other => self.syntax(format!("unexpected token {}", describe(&other))),
        }
    }

    fn call(&mut self, name: String, offset: usize) -> Result<Expr> {
        let func = Func::from_name(&name).ok_or_else(|| Error::UnknownFunction {
            name: name.clone(),
            offset,
        })?;
        let mut args = vec![self.expr()?];
        while self.peek() == &Tok::Comma {
            self.bump();
            args.push(self.expr()?);
        }
        self.expect_rparen()?;
        if args.len() != func.arity() {
            return Err(Error::Arity {
                name,
                expected: func.arity(),
                got: args.len(),
            });
        }
        Ok(Expr::Call(func, args))
    }

    fn expect_rparen(&mut self) -> Result<()> {
        if self.peek() == &Tok::RParen {
            self.bump();
            Ok(())
        } else if self.peek() == &Tok::End {
            self.syntax("expected `)`, found end of input")
        } else {
            let d = describe(self.peek());
            self.syntax(format!("expected `)`, found {d}"))
        }
    }
}

fn describe(t: &Tok) -> String {
    match t {
        Tok::Num(v) => format!("number {v}"),
        Tok::Ident(s) => format!("`{s}`"),
        Tok::Op(c) => format!("`{c}`"),
        Tok::LParen => "`(`".into(),
        Tok::RParen => "`)`".into(),
        Tok::Comma => "`,`".into(),
        Tok::End => "end of input".into(),
    }
}

fn parse_inner(source: &str, allowed: Option<&[&str]>) -> Result<Expr> {
    let mut p = Parser {
        toks: lex(source)?,
        pos: 0,
        allowed,
    };
    let e = p.expr()?;
    if p.peek() != &Tok::End {
        let d = describe(p.peek());
        return p.syntax(format!("unexpected {d} after expression"));
    }
    Ok(e)
}

/// Parses `source`; any identifier other than `x`, `pi`, `e` and function
/// names becomes a free parameter.
pub fn parse(source: &str) -> Result<Expr> {
    parse_inner(source, None)
}

/// Parses `source`, rejecting identifiers not in `params`.
pub fn parse_with_params(source: &str, params: &[&str]) -> Result<Expr> {
    parse_inner(source, Some(params))
}

/// Evaluates `expr` at `x` (free function form of [`Expr::eval`]).
pub fn eval(expr: &Expr, x: f64, params: &HashMap<String, f64>) -> Result<f64> {
    expr.eval(x, params)
}
