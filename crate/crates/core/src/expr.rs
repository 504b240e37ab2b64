//! Expressions for nonlinearities `f(ξ)` and forcing terms `h(x)`.
//!
//! ```text
//! expr    := term (('+' | '-') term)*
//! term    := power (('*' | '/') power)*
//! power   := unary ('^' power)?
//! unary   := '-' unary | primary
//! primary := number | ident | ident '(' expr ')' | '(' expr ')'
//! ```
//!
//! Unary minus binds tighter than `^`, so `-2^2 = 4`; `^` is right
//! associative. Identifiers: the variables `xi` (also `ξ`) and `x`, the
//! constants `pi` and `e`, and the functions `sin cos atan exp log abs sqrt`.

use std::fmt;

use crate::scalar::Real;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum ParseError {
    #[error("syntax error at position {pos}: {msg}")]
    Syntax { pos: usize, msg: String },
    #[error("unknown identifier '{name}' at position {pos}")]
    UnknownIdent { pos: usize, name: String },
    #[error("function '{name}' at position {pos} takes 1 argument, got {got}")]
    Arity { pos: usize, name: String, got: usize },
}

impl ParseError {
    pub fn position(&self) -> usize {
        match self {
            ParseError::Syntax { pos, .. } | ParseError::UnknownIdent { pos, .. } | ParseError::Arity { pos, .. } => {
                *pos
            }
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Var {
    Xi,
    X,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Constant {
    Pi,
    E,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Func {
    Sin,
    Cos,
    Atan,
    Exp,
    Log,
    Abs,
    Sqrt,
}

impl Func {
    pub const ALL: [Func; 7] = [Func::Sin, Func::Cos, Func::Atan, Func::Exp, Func::Log, Func::Abs, Func::Sqrt];

    pub fn name(self) -> &'static str {
        match self {
            Func::Sin => "sin",
            Func::Cos => "cos",
            Func::Atan => "atan",
            Func::Exp => "exp",
            Func::Log => "log",
            Func::Abs => "abs",
            Func::Sqrt => "sqrt",
        }
    }

    fn from_name(s: &str) -> Option<Func> {
        Func::ALL.into_iter().find(|f| f.name() == s)
    }

    fn apply<T: Real>(self, v: T) -> T {
        match self {
            Func::Sin => v.sin(),
            Func::Cos => v.cos(),
            Func::Atan => v.atan(),
            Func::Exp => v.exp(),
            Func::Log => v.ln(),
            Func::Abs => v.abs(),
            Func::Sqrt => v.sqrt(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum BinOp {
    Add,
    Sub,
    Mul,
    Div,
    Pow,
}

impl BinOp {
    fn prec(self) -> u8 {
        match self {
            BinOp::Add | BinOp::Sub => 1,
            BinOp::Mul | BinOp::Div => 2,
            BinOp::Pow => 3,
        }
    }

    fn symbol(self) -> &'static str {
        match self {
            BinOp::Add => " + ",
            BinOp::Sub => " - ",
            BinOp::Mul => "*",
            BinOp::Div => "/",
            BinOp::Pow => "^",
        }
    }
}

/// Expression tree. Literals are nonnegative; negation is explicit.
#[derive(Debug, Clone, PartialEq)]
pub enum Expr {
    Num(f64),
    Var(Var),
    Const(Constant),
    Neg(Box<Expr>),
    Bin(BinOp, Box<Expr>, Box<Expr>),
    Call(Func, Box<Expr>),
}

const NEG_PREC: u8 = 4;
const ATOM_PREC: u8 = 5;

impl Expr {
    pub fn bin(op: BinOp, l: Expr, r: Expr) -> Expr {
        Expr::Bin(op, Box::new(l), Box::new(r))
    }

    #[allow(clippy::should_implement_trait)]
    pub fn neg(e: Expr) -> Expr {
        Expr::Neg(Box::new(e))
    }

    pub fn call(f: Func, e: Expr) -> Expr {
        Expr::Call(f, Box::new(e))
    }

    fn prec(&self) -> u8 {
        match self {
            Expr::Bin(op, ..) => op.prec(),
            Expr::Neg(_) => NEG_PREC,
            _ => ATOM_PREC,
        }
    }

    /// Evaluates with every variable bound to `v`.
    pub fn eval<T: Real>(&self, v: T) -> T {
        match self {
            Expr::Num(c) => T::lit(*c),
            Expr::Var(_) => v,
            Expr::Const(Constant::Pi) => T::PI(),
            Expr::Const(Constant::E) => T::E(),
            Expr::Neg(e) => -e.eval(v),
            Expr::Call(f, e) => f.apply(e.eval(v)),
            Expr::Bin(op, l, r) => {
                let a = l.eval(v);
                match op {
                    BinOp::Add => a + r.eval(v),
                    BinOp::Sub => a - r.eval(v),
                    BinOp::Mul => a * r.eval(v),
                    BinOp::Div => a / r.eval(v),
                    BinOp::Pow => {
                        let b = r.eval(v);
                        let n = b.round();
                        if b == n && n.abs() <= T::lit(64.0) {
                            a.powi(n.to_i32().unwrap_or(0))
                        } else {
                            a.powf(b)
                        }
                    }
                }
            }
        }
    }

    /// Variables appearing in the tree.
    pub fn vars(&self) -> Vec<Var> {
        let mut out = Vec::new();
        self.collect_vars(&mut out);
        out
    }

    fn collect_vars(&self, out: &mut Vec<Var>) {
        match self {
            Expr::Var(v) => {
                if !out.contains(v) {
                    out.push(*v);
                }
            }
            Expr::Neg(e) | Expr::Call(_, e) => e.collect_vars(out),
            Expr::Bin(_, l, r) => {
                l.collect_vars(out);
                r.collect_vars(out);
            }
            _ => {}
        }
    }

    pub fn depth(&self) -> usize {
        match self {
            Expr::Neg(e) | Expr::Call(_, e) => 1 + e.depth(),
            Expr::Bin(_, l, r) => 1 + l.depth().max(r.depth()),
            _ => 1,
        }
    }

    fn write_child(&self, f: &mut fmt::Formatter<'_>, paren: bool) -> fmt::Result {
        if paren {
            write!(f, "({self})")
        } else {
            write!(f, "{self}")
        }
    }
}

/// Canonical printer with the minimal parentheses that preserve the tree.
impl fmt::Display for Expr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Expr::Num(c) => write!(f, "{c}"),
            Expr::Var(Var::Xi) => f.write_str("xi"),
            Expr::Var(Var::X) => f.write_str("x"),
            Expr::Const(Constant::Pi) => f.write_str("pi"),
            Expr::Const(Constant::E) => f.write_str("e"),
            Expr::Call(func, e) => write!(f, "{}({e})", func.name()),
            Expr::Neg(e) => {
                f.write_str("-")?;
                e.write_child(f, e.prec() < NEG_PREC)
            }
            Expr::Bin(op, l, r) => {
                let p = op.prec();
                let (lp, rp) = if *op == BinOp::Pow {
                    (l.prec() <= p, r.prec() < p)
                } else {
                    (l.prec() < p, r.prec() <= p)
                };
                l.write_child(f, lp)?;
                f.write_str(op.symbol())?;
                r.write_child(f, rp)
            }
        }
    }
}

struct Parser {
    chars: Vec<char>,
    pos: usize,
}

impl Parser {
    fn skip_ws(&mut self) {
        while self.pos < self.chars.len() && self.chars[self.pos].is_whitespace() {
            self.pos += 1;
        }
    }

    fn peek(&mut self) -> Option<char> {
        self.skip_ws();
        self.chars.get(self.pos).copied()
    }

    fn err<T>(&self, pos: usize, msg: impl Into<String>) -> Result<T, ParseError> {
        Err(ParseError::Syntax { pos, msg: msg.into() })
    }

    fn expr(&mut self) -> Result<Expr, ParseError> {
        let mut lhs = self.term()?;
        while let Some(c @ ('+' | '-')) = self.peek() {
            self.pos += 1;
            let op = if c == '+' { BinOp::Add } else { BinOp::Sub };
            lhs = Expr::bin(op, lhs, self.term()?);
        }
        Ok(lhs)
    }

    fn term(&mut self) -> Result<Expr, ParseError> {
        let mut lhs = self.power()?;
        while let Some(c @ ('*' | '/')) = self.peek() {
            self.pos += 1;
            let op = if c == '*' { BinOp::Mul } else { BinOp::Div };
            lhs = Expr::bin(op, lhs, self.power()?);
        }
        Ok(lhs)
    }

    fn power(&mut self) -> Result<Expr, ParseError> {
        let base = self.unary()?;
        if self.peek() == Some('^') {
            self.pos += 1;
            return Ok(Expr::bin(BinOp::Pow, base, self.power()?));
        }
        Ok(base)
    }

    fn unary(&mut self) -> Result<Expr, ParseError> {
        if self.peek() == Some('-') {
            self.pos += 1;
            return Ok(Expr::neg(self.unary()?));
        }
        self.primary()
    }

    fn primary(&mut self) -> Result<Expr, ParseError> {
        let start = match self.peek() {
            None => return self.err(self.chars.len(), "unexpected end of input"),
            Some(_) => self.pos,
        };
        let c = self.chars[start];
        if c.is_ascii_digit() || c == '.' {
            return self.number(start);
        }
        if c == '(' {
            self.pos += 1;
            let e = self.expr()?;
            return match self.peek() {
                Some(')') => {
                    self.pos += 1;
                    Ok(e)
                }
                _ => self.err(self.pos, "expected ')'"),
            };
        }
        if c.is_alphabetic() || c == '_' {
            while self.pos < self.chars.len() && (self.chars[self.pos].is_alphanumeric() || self.chars[self.pos] == '_') {
                self.pos += 1;
            }
            let name: String = self.chars[start..self.pos].iter().collect();
            if self.peek() == Some('(') {
                let Some(func) = Func::from_name(&name) else {
                    return Err(ParseError::UnknownIdent { pos: start, name });
                };
                self.pos += 1;
                if self.peek() == Some(')') {
                    return Err(ParseError::Arity { pos: start, name, got: 0 });
                }
                let arg = self.expr()?;
                let mut got = 1;
                while self.peek() == Some(',') {
                    self.pos += 1;
                    self.expr()?;
                    got += 1;
                }
                if got != 1 {
                    return Err(ParseError::Arity { pos: start, name, got });
                }
                return match self.peek() {
                    Some(')') => {
                        self.pos += 1;
                        Ok(Expr::call(func, arg))
                    }
                    _ => self.err(self.pos, "expected ')'"),
                };
            }
            return match name.as_str() {
                "xi" | "ξ" => Ok(Expr::Var(Var::Xi)),
                "x" => Ok(Expr::Var(Var::X)),
                "pi" => Ok(Expr::Const(Constant::Pi)),
                "e" => Ok(Expr::Const(Constant::E)),
                _ if Func::from_name(&name).is_some() => self.err(self.pos, format!("expected '(' after '{name}'")),
                _ => Err(ParseError::UnknownIdent { pos: start, name }),
            };
        }
        self.err(start, format!("unexpected '{c}'"))
    }

    fn number(&mut self, start: usize) -> Result<Expr, ParseError> {
        let n = self.chars.len();
        let digits = |p: &mut usize, chars: &[char]| {
            let s = *p;
            while *p < n && chars[*p].is_ascii_digit() {
                *p += 1;
            }
            *p - s
        };
        let mut p = start;
        let mut count = digits(&mut p, &self.chars);
        if p < n && self.chars[p] == '.' {
            p += 1;
            count += digits(&mut p, &self.chars);
        }
        if count == 0 {
            return self.err(start, "malformed number");
        }
        if p < n && (self.chars[p] == 'e' || self.chars[p] == 'E') {
            let mut q = p + 1;
            if q < n && (self.chars[q] == '+' || self.chars[q] == '-') {
                q += 1;
            }
            if digits(&mut q, &self.chars) > 0 {
                p = q;
            }
        }
        let text: String = self.chars[start..p].iter().collect();
        self.pos = p;
        match text.parse::<f64>() {
            Ok(v) if v.is_finite() => Ok(Expr::Num(v)),
            _ => self.err(start, format!("number '{text}' out of range")),
        }
    }
}

pub fn parse_expr(text: &str) -> Result<Expr, ParseError> {
    let mut p = Parser { chars: text.chars().collect(), pos: 0 };
    if p.peek().is_none() {
        return p.err(0, "empty expression");
    }
    let e = p.expr()?;
    match p.peek() {
        None => Ok(e),
        Some(c) => p.err(p.pos, format!("unexpected '{c}'")),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ev(s: &str, v: f64) -> f64 {
        parse_expr(s).unwrap().eval(v)
    }

    #[test]
    fn examples() {
        assert_eq!(ev("xi*(1 + 3/(1+xi^2))", 0.0), 0.0);
        let h = 1e-6;
        let slope = (ev("xi*(1 + 3/(1+xi^2))", h) - ev("xi*(1 + 3/(1+xi^2))", -h)) / (2.0 * h);
        assert!((slope - 4.0).abs() < 1e-8);
        assert_eq!(ev("xi/(1+abs(xi))", 3.0), 0.75);
        assert_eq!(parse_expr("2*+3").unwrap_err().position(), 2);
    }

    #[test]
    fn precedence() {
        assert_eq!(ev("-2^2", 0.0), 4.0);
        assert_eq!(ev("2^3^2", 0.0), 512.0);
        assert_eq!(ev("8/4/2", 0.0), 1.0);
        assert_eq!(ev("1-2-3", 0.0), -4.0);
        assert_eq!(ev("2*3^2", 0.0), 18.0);
        assert_eq!(ev("2^-1", 0.0), 0.5);
    }

    #[test]
    fn errors() {
        assert!(matches!(parse_expr("foo"), Err(ParseError::UnknownIdent { pos: 0, .. })));
        assert!(matches!(parse_expr("sin(1,2)"), Err(ParseError::Arity { got: 2, .. })));
        assert!(matches!(parse_expr("sqrt()"), Err(ParseError::Arity { got: 0, .. })));
        assert!(matches!(parse_expr("bar(2)"), Err(ParseError::UnknownIdent { .. })));
        assert!(parse_expr("(1+2").is_err());
        assert!(parse_expr("").is_err());
        assert!(parse_expr("1 2").is_err());
    }

    #[test]
    fn printer() {
        for (src, out) in [
            ("(xi)", "xi"),
            ("-(2^2)", "-(2^2)"),
            ("(-2)^2", "-2^2"),
            ("(2^3)^2", "(2^3)^2"),
            ("a", ""),
            ("1-(2-3)", "1 - (2 - 3)"),
            ("(1-2)-3", "1 - 2 - 3"),
            ("x*-1", "x*-1"),
        ] {
            match parse_expr(src) {
                Ok(e) => assert_eq!(e.to_string(), out),
                Err(_) => assert_eq!(out, ""),
            }
        }
    }
}
