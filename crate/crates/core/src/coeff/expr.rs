//! Analytic coefficient expressions: recursive-descent parsing, exact
//! symbolic differentiation and round-trippable printing.
//!
//! Grammar (positions in errors are byte offsets):
//!
//! ```text
//! expr   := term (("+"|"-") term)*
//! term   := factor (("*"|"/") factor)*
//! factor := "-" factor | power
//! power  := primary ("^" factor)?
//! primary := NUMBER | "x" | "y" | "pi" | "e" | FUNC "(" expr ")" | "(" expr ")"
//! FUNC   := "sin"|"cos"|"exp"|"sqrt"|"log"|"abs"|"sign"
//! ```
//!
//! `^` is right-associative and binds tighter than unary minus, so
//! `-x^2` reads as `-(x^2)`.

use std::fmt;

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Var {
    X,
    Y,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Func {
    Sin,
    Cos,
    Exp,
    Sqrt,
    Log,
    Abs,
    /// Derivative of `abs`, with the convention `sign(0) = 0`. Produced by
    /// differentiation and accepted by the parser for closure.
    Sign,
}

impl Func {
    fn name(self) -> &'static str {
        match self {
            Func::Sin => "sin",
            Func::Cos => "cos",
            Func::Exp => "exp",
            Func::Sqrt => "sqrt",
            Func::Log => "log",
            Func::Abs => "abs",
            Func::Sign => "sign",
        }
    }

    fn from_name(s: &str) -> Option<Func> {
        Some(match s {
            "sin" => Func::Sin,
            "cos" => Func::Cos,
            "exp" => Func::Exp,
            "sqrt" => Func::Sqrt,
            "log" => Func::Log,
            "abs" => Func::Abs,
            "sign" => Func::Sign,
            _ => return None,
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BinOp {
    Add,
    Sub,
    Mul,
    Div,
    Pow,
}

/// Expression tree over the variables `x`, `y`.
#[derive(Debug, Clone, PartialEq)]
pub enum Expr {
    Num(f64),
    Var(Var),
    Neg(Box<Expr>),
    Bin(BinOp, Box<Expr>, Box<Expr>),
    Call(Func, Box<Expr>),
}

impl Expr {
    pub fn parse(text: &str) -> Result<Expr> {
        let tokens = lex(text)?;
        let mut p = Parser {
            tokens,
            pos: 0,
            end: text.len(),
        };
        let e = p.expr()?;
        match p.peek() {
            None => Ok(e),
            Some(tok) => Err(Error::Parse {
                pos: tok.pos,
                msg: format!("trailing token `{}`", tok.text),
            }),
        }
    }

    /// Evaluates at `(x, y)`; domain violations (division by zero, `log`
    /// of a nonpositive value, non-finite results) are reported with the
    /// offending subexpression.
    pub fn eval(&self, x: f64, y: f64) -> Result<f64> {
        let fail = |msg: &str| -> Error {
            Error::Eval {
                expr: self.to_string(),
                msg: msg.to_string(),
            }
        };
        let v = match self {
            Expr::Num(c) => *c,
            Expr::Var(Var::X) => x,
            Expr::Var(Var::Y) => y,
            Expr::Neg(e) => -e.eval(x, y)?,
            Expr::Bin(op, a, b) => {
                let u = a.eval(x, y)?;
                let w = b.eval(x, y)?;
                match op {
                    BinOp::Add => u + w,
                    BinOp::Sub => u - w,
                    BinOp::Mul => u * w,
                    BinOp::Div => {
                        if w == 0.0 {
                            return Err(fail("division by zero"));
                        }
                        u / w
                    }
                    BinOp::Pow => u.powf(w),
                }
            }
            Expr::Call(f, e) => {
                let u = e.eval(x, y)?;
                match f {
                    Func::Sin => u.sin(),
                    Func::Cos => u.cos(),
                    Func::Exp => u.exp(),
                    Func::Sqrt => {
                        if u < 0.0 {
                            return Err(fail("square root of a negative value"));
                        }
                        u.sqrt()
                    }
                    Func::Log => {
                        if u <= 0.0 {
                            return Err(fail("logarithm of a nonpositive value"));
                        }
                        u.ln()
                    }
                    Func::Abs => u.abs(),
                    Func::Sign => {
                        if u > 0.0 {
                            1.0
                        } else if u < 0.0 {
                            -1.0
                        } else {
                            0.0
                        }
                    }
                }
            }
        };
        if v.is_finite() {
            Ok(v)
        } else {
            Err(fail("non-finite result"))
        }
    }

    /// Exact symbolic partial derivative. Apply twice for second
    /// derivatives.
    pub fn derivative(&self, var: Var) -> Expr {
        let d = |e: &Expr| e.derivative(var);
        let raw = match self {
            Expr::Num(_) => Expr::Num(0.0),
            Expr::Var(v) => Expr::Num(if *v == var { 1.0 } else { 0.0 }),
            Expr::Neg(e) => neg(d(e)),
            Expr::Bin(BinOp::Add, a, b) => add(d(a), d(b)),
            Expr::Bin(BinOp::Sub, a, b) => sub(d(a), d(b)),
            Expr::Bin(BinOp::Mul, a, b) => add(mul(d(a), (**b).clone()), mul((**a).clone(), d(b))),
            Expr::Bin(BinOp::Div, a, b) => div(
                sub(mul(d(a), (**b).clone()), mul((**a).clone(), d(b))),
                pow((**b).clone(), Expr::Num(2.0)),
            ),
            Expr::Bin(BinOp::Pow, a, b) => match &**b {
                // c * u^(c-1) * u'
                Expr::Num(c) => mul(
                    mul(Expr::Num(*c), pow((**a).clone(), num(*c - 1.0))),
                    d(a),
                ),
                // u^v * (v' log u + v u'/u)
                _ => mul(
                    pow((**a).clone(), (**b).clone()),
                    add(
                        mul(d(b), Expr::Call(Func::Log, a.clone())),
                        mul((**b).clone(), div(d(a), (**a).clone())),
                    ),
                ),
            },
            Expr::Call(f, e) => {
                let inner = d(e);
                let outer = match f {
                    Func::Sin => Expr::Call(Func::Cos, e.clone()),
                    Func::Cos => neg(Expr::Call(Func::Sin, e.clone())),
                    Func::Exp => Expr::Call(Func::Exp, e.clone()),
                    Func::Sqrt => {
                        return simplify(div(
                            inner,
                            mul(Expr::Num(2.0), Expr::Call(Func::Sqrt, e.clone())),
                        ))
                    }
                    Func::Log => return simplify(div(inner, (**e).clone())),
                    Func::Abs => Expr::Call(Func::Sign, e.clone()),
                    Func::Sign => Expr::Num(0.0),
                };
                mul(outer, inner)
            }
        };
        simplify(raw)
    }
}

fn num(v: f64) -> Expr {
    if v < 0.0 {
        neg(Expr::Num(-v))
    } else {
        Expr::Num(v)
    }
}

fn neg(e: Expr) -> Expr {
    Expr::Neg(Box::new(e))
}

fn add(a: Expr, b: Expr) -> Expr {
    Expr::Bin(BinOp::Add, Box::new(a), Box::new(b))
}

fn sub(a: Expr, b: Expr) -> Expr {
    Expr::Bin(BinOp::Sub, Box::new(a), Box::new(b))
}

fn mul(a: Expr, b: Expr) -> Expr {
    Expr::Bin(BinOp::Mul, Box::new(a), Box::new(b))
}

fn div(a: Expr, b: Expr) -> Expr {
    Expr::Bin(BinOp::Div, Box::new(a), Box::new(b))
}

fn pow(a: Expr, b: Expr) -> Expr {
    Expr::Bin(BinOp::Pow, Box::new(a), Box::new(b))
}

fn is_zero(e: &Expr) -> bool {
    matches!(e, Expr::Num(v) if *v == 0.0)
}

fn is_one(e: &Expr) -> bool {
    matches!(e, Expr::Num(v) if *v == 1.0)
}

/// Identity and constant folding only; value-preserving so derivative
/// trees stay compact without changing evaluation results.
fn simplify(e: Expr) -> Expr {
    match e {
        Expr::Neg(inner) => {
            let inner = simplify(*inner);
            match inner {
                Expr::Num(v) if v == 0.0 => Expr::Num(0.0),
                Expr::Neg(e) => *e,
                other => neg(other),
            }
        }
        Expr::Bin(op, a, b) => {
            let a = simplify(*a);
            let b = simplify(*b);
            if let (Expr::Num(u), Expr::Num(w)) = (&a, &b) {
                let v = match op {
                    BinOp::Add => u + w,
                    BinOp::Sub => u - w,
                    BinOp::Mul => u * w,
                    BinOp::Div if *w != 0.0 => u / w,
                    _ => f64::NAN,
                };
                if v.is_finite() && v >= 0.0 {
                    return Expr::Num(v);
                }
            }
            match op {
                BinOp::Add if is_zero(&a) => b,
                BinOp::Add if is_zero(&b) => a,
                BinOp::Sub if is_zero(&b) => a,
                BinOp::Sub if is_zero(&a) => simplify(neg(b)),
                BinOp::Mul if is_zero(&a) || is_zero(&b) => Expr::Num(0.0),
                BinOp::Mul if is_one(&a) => b,
                BinOp::Mul if is_one(&b) => a,
                BinOp::Div if is_zero(&a) => Expr::Num(0.0),
                BinOp::Div if is_one(&b) => a,
                BinOp::Pow if is_one(&b) => a,
                BinOp::Pow if is_zero(&b) => Expr::Num(1.0),
                _ => Expr::Bin(op, Box::new(a), Box::new(b)),
            }
        }
        Expr::Call(f, e) => Expr::Call(f, Box::new(simplify(*e))),
        other => other,
    }
}

// Precedence levels for printing: higher binds tighter.
fn level(e: &Expr) -> u8 {
    match e {
        Expr::Bin(BinOp::Add | BinOp::Sub, ..) => 0,
        Expr::Bin(BinOp::Mul | BinOp::Div, ..) => 1,
        Expr::Neg(_) => 2,
        Expr::Bin(BinOp::Pow, ..) => 3,
        Expr::Num(v) if *v < 0.0 => 2,
        _ => 4,
    }
}

impl fmt::Display for Expr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fn wrap(f: &mut fmt::Formatter<'_>, e: &Expr, min_level: u8) -> fmt::Result {
            if level(e) < min_level {
                write!(f, "(")?;
                write!(f, "{e}")?;
                write!(f, ")")
            } else {
                write!(f, "{e}")
            }
        }
        match self {
            Expr::Num(v) => write!(f, "{v}"),
            Expr::Var(Var::X) => write!(f, "x"),
            Expr::Var(Var::Y) => write!(f, "y"),
            Expr::Neg(e) => {
                write!(f, "-")?;
                wrap(f, e, 2)
            }
            Expr::Bin(op, a, b) => match op {
                BinOp::Add => {
                    wrap(f, a, 0)?;
                    write!(f, "+")?;
                    wrap(f, b, 1)
                }
                BinOp::Sub => {
                    wrap(f, a, 0)?;
                    write!(f, "-")?;
                    wrap(f, b, 1)
                }
                BinOp::Mul => {
                    wrap(f, a, 1)?;
                    write!(f, "*")?;
                    wrap(f, b, 2)
                }
                BinOp::Div => {
                    wrap(f, a, 1)?;
                    write!(f, "/")?;
                    wrap(f, b, 2)
                }
                BinOp::Pow => {
                    wrap(f, a, 4)?;
                    write!(f, "^")?;
                    wrap(f, b, 2)
                }
            },
            Expr::Call(func, e) => write!(f, "{}({e})", func.name()),
        }
    }
}

struct Token {
    kind: Tok,
    pos: usize,
    text: String,
}

#[derive(Debug, Clone, PartialEq)]
enum Tok {
    Num(f64),
    Ident(String),
    Plus,
    Minus,
    Star,
    Slash,
    Caret,
    LParen,
    RParen,
}

fn lex(text: &str) -> Result<Vec<Token>> {
    let bytes = text.as_bytes();
    let mut out = Vec::new();
    let mut i = 0;
    while i < bytes.len() {
        let c = bytes[i] as char;
        let start = i;
        match c {
            ' ' | '\t' | '\n' | '\r' => {
                i += 1;
                continue;
            }
            '+' | '-' | '*' | '/' | '^' | '(' | ')' => {
                let kind = match c {
                    '+' => Tok::Plus,
                    '-' => Tok::Minus,
                    '*' => Tok::Star,
                    '/' => Tok::Slash,
                    '^' => Tok::Caret,
                    '(' => Tok::LParen,
                    _ => Tok::RParen,
                };
                out.push(Token {
                    kind,
                    pos: start,
                    text: c.to_string(),
                });
                i += 1;
            }
            '0'..='9' | '.' => {
                i += 1;
                while i < bytes.len() && (bytes[i].is_ascii_digit() || bytes[i] == b'.') {
                    i += 1;
                }
                if i < bytes.len() && (bytes[i] == b'e' || bytes[i] == b'E') {
                    let mut j = i + 1;
                    if j < bytes.len() && (bytes[j] == b'+' || bytes[j] == b'-') {
                        j += 1;
                    }
                    if j < bytes.len() && bytes[j].is_ascii_digit() {
                        i = j;
                        while i < bytes.len() && bytes[i].is_ascii_digit() {
                            i += 1;
                        }
                    }
                }
                let slice = &text[start..i];
                let v: f64 = slice.parse().map_err(|_| Error::Parse {
                    pos: start,
                    msg: format!("invalid number `{slice}`"),
                })?;
                out.push(Token {
                    kind: Tok::Num(v),
                    pos: start,
                    text: slice.to_string(),
                });
            }
            'a'..='z' | 'A'..='Z' | '_' => {
                i += 1;
                while i < bytes.len() && (bytes[i].is_ascii_alphanumeric() || bytes[i] == b'_') {
                    i += 1;
                }
                let slice = &text[start..i];
                out.push(Token {
                    kind: Tok::Ident(slice.to_string()),
                    pos: start,
                    text: slice.to_string(),
                });
            }
            _ => {
                return Err(Error::Parse {
                    pos: start,
                    msg: format!("unexpected character `{c}`"),
                })
            }
        }
    }
    Ok(out)
}

struct Parser {
    tokens: Vec<Token>,
    pos: usize,
    end: usize,
}

impl Parser {
    fn peek(&self) -> Option<&Token> {
        self.tokens.get(self.pos)
    }

    fn next_pos(&self) -> usize {
        self.peek().map_or(self.end, |t| t.pos)
    }

    fn eat(&mut self, kind: &Tok) -> bool {
        if self.peek().map(|t| &t.kind) == Some(kind) {
            self.pos += 1;
            true
        } else {
            false
        }
    }

    fn expect(&mut self, kind: Tok, what: &str) -> Result<()> {
        if self.eat(&kind) {
            Ok(())
        } else {
            Err(Error::Parse {
                pos: self.next_pos(),
                msg: format!("expected {what}"),
            })
        }
    }

    fn expr(&mut self) -> Result<Expr> {
        let mut e = self.term()?;
        loop {
            if self.eat(&Tok::Plus) {
                e = add(e, self.term()?);
            } else if self.eat(&Tok::Minus) {
                e = sub(e, self.term()?);
            } else {
                return Ok(e);
            }
        }
    }

    fn term(&mut self) -> Result<Expr> {
        let mut e = self.factor()?;
        loop {
            if self.eat(&Tok::Star) {
                e = mul(e, self.factor()?);
            } else if self.eat(&Tok::Slash) {
                e = div(e, self.factor()?);
            } else {
                return Ok(e);
            }
        }
    }

    fn factor(&mut self) -> Result<Expr> {
        if self.eat(&Tok::Minus) {
            Ok(neg(self.factor()?))
        } else {
            self.power()
        }
    }

    fn power(&mut self) -> Result<Expr> {
        let base = self.primary()?;
        if self.eat(&Tok::Caret) {
            Ok(pow(base, self.factor()?))
        } else {
            Ok(base)
        }
    }

    fn primary(&mut self) -> Result<Expr> {
        let pos = self.next_pos();
        let Some(tok) = self.peek() else {
            return Err(Error::Parse {
                pos,
                msg: "expected expression".into(),
            });
        };
        match tok.kind.clone() {
            Tok::Num(v) => {
                self.pos += 1;
                Ok(Expr::Num(v))
            }
            Tok::LParen => {
                self.pos += 1;
                let e = self.expr()?;
                self.expect(Tok::RParen, "closing `)`")?;
                Ok(e)
            }
            Tok::Ident(name) => {
                self.pos += 1;
                match name.as_str() {
                    "x" => Ok(Expr::Var(Var::X)),
                    "y" => Ok(Expr::Var(Var::Y)),
                    "pi" => Ok(Expr::Num(std::f64::consts::PI)),
                    "e" => Ok(Expr::Num(std::f64::consts::E)),
                    _ => match Func::from_name(&name) {
                        Some(f) => {
                            self.expect(Tok::LParen, "`(` after function name")?;
                            let arg = self.expr()?;
                            self.expect(Tok::RParen, "closing `)`")?;
                            Ok(Expr::Call(f, Box::new(arg)))
                        }
                        None => Err(Error::Parse {
                            pos,
                            msg: format!("unknown identifier `{name}`"),
                        }),
                    },
                }
            }
            _ => Err(Error::Parse {
                pos,
                msg: format!("unexpected token `{}`", tok.text),
            }),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn p(s: &str) -> Expr {
        Expr::parse(s).unwrap()
    }

    #[test]
    fn reference_coefficient_expressions() {
        let r = p("2+sin(x+y)");
        assert_eq!(r.eval(0.0, 0.0).unwrap(), 2.0);
        let g = p("1+50*exp(-5*(x^2+y^2))");
        assert_eq!(g.eval(0.0, 0.0).unwrap(), 51.0);
    }

    #[test]
    fn precedence() {
        assert_eq!(p("2+3*x").eval(1.0, 0.0).unwrap(), 5.0);
        assert_eq!(p("2*3^2").eval(0.0, 0.0).unwrap(), 18.0);
        assert_eq!(p("2^3^2").eval(0.0, 0.0).unwrap(), 512.0);
        assert_eq!(p("-2^2").eval(0.0, 0.0).unwrap(), -4.0);
        assert_eq!(p("(1+2)*2").eval(0.0, 0.0).unwrap(), 6.0);
        assert_eq!(p("2^-1").eval(0.0, 0.0).unwrap(), 0.5);
    }

    #[test]
    fn constants() {
        assert!((p("pi").eval(0.0, 0.0).unwrap() - std::f64::consts::PI).abs() < 1e-15);
        assert!((p("e").eval(0.0, 0.0).unwrap() - std::f64::consts::E).abs() < 1e-15);
    }

    #[test]
    fn parse_errors_carry_positions() {
        match Expr::parse("sin(") {
            Err(Error::Parse { pos, .. }) => assert_eq!(pos, 4),
            other => panic!("expected parse error, got {other:?}"),
        }
        match Expr::parse("2+3 5") {
            Err(Error::Parse { pos, msg }) => {
                assert_eq!(pos, 4);
                assert!(msg.contains("trailing"));
            }
            other => panic!("expected parse error, got {other:?}"),
        }
        match Expr::parse("foo(x)") {
            Err(Error::Parse { pos, msg }) => {
                assert_eq!(pos, 0);
                assert!(msg.contains("unknown identifier"));
            }
            other => panic!("expected parse error, got {other:?}"),
        }
        assert!(Expr::parse("(1+2").is_err());
    }

    #[test]
    fn eval_domain_errors_name_subexpression() {
        let e = p("1/(x-1)");
        match e.eval(1.0, 0.0) {
            Err(Error::Eval { expr, msg }) => {
                assert!(expr.contains("x-1"), "{expr}");
                assert!(msg.contains("division"));
            }
            other => panic!("{other:?}"),
        }
        assert!(p("log(x)").eval(0.0, 0.0).is_err());
        assert!(p("sqrt(x)").eval(-1.0, 0.0).is_err());
    }

    #[test]
    fn simple_derivatives() {
        let e = p("2+sin(x+y)");
        let dx = e.derivative(Var::X);
        for &(x, y) in &[(0.0, 0.0), (0.3, -0.7), (1.0, 1.0)] {
            let want = (x + y as f64).cos();
            assert!((dx.eval(x, y).unwrap() - want).abs() < 1e-15);
        }
        let d = p("x^2").derivative(Var::X);
        for x in [-2.0, 0.0, 0.5, 3.0] {
            assert!((d.eval(x, 0.0).unwrap() - 2.0 * x).abs() < 1e-14);
        }
        // abs differentiates to sign, with sign(0) = 0.
        let d = p("abs(x)").derivative(Var::X);
        assert_eq!(d.eval(2.0, 0.0).unwrap(), 1.0);
        assert_eq!(d.eval(-2.0, 0.0).unwrap(), -1.0);
        assert_eq!(d.eval(0.0, 0.0).unwrap(), 0.0);
    }

    #[test]
    fn derivative_matches_central_differences() {
        let exprs = [
            "2+sin(x+y)",
            "(1+50*exp(-5*(x^2+y^2)))*(2+sin(x+y))",
            "sqrt(4+x*y)",
            "log(3+x+y)/(2+cos(x-y))",
            "x^3-2*x*y+y^2",
            "exp(sin(x)*cos(y))",
        ];
        let h = 1e-5;
        for s in exprs {
            let e = p(s);
            let dx = e.derivative(Var::X);
            let dy = e.derivative(Var::Y);
            let mut t = 0.37;
            for _ in 0..25 {
                // Low-discrepancy points in (-1, 1)^2.
                t = (t * 9.7 + 0.13) % 1.0;
                let x = 2.0 * t - 1.0;
                let u = (t * 5.3 + 0.41) % 1.0;
                let y = 2.0 * u - 1.0;
                let fd_x = (e.eval(x + h, y).unwrap() - e.eval(x - h, y).unwrap()) / (2.0 * h);
                let fd_y = (e.eval(x, y + h).unwrap() - e.eval(x, y - h).unwrap()) / (2.0 * h);
                let sx = dx.eval(x, y).unwrap();
                let sy = dy.eval(x, y).unwrap();
                assert!(
                    (sx - fd_x).abs() <= 1e-6 * sx.abs().max(1.0),
                    "{s} d/dx at ({x}, {y}): {sx} vs {fd_x}"
                );
                assert!(
                    (sy - fd_y).abs() <= 1e-6 * sy.abs().max(1.0),
                    "{s} d/dy at ({x}, {y}): {sy} vs {fd_y}"
                );
            }
        }
    }

    #[test]
    fn print_parse_round_trip_evaluates_identically() {
        let exprs = [
            "2+sin(x+y)",
            "1+50*exp(-5*(x^2+y^2))",
            "-x^2",
            "x^-2",
            "(x+y)*(x-y)/(4+x*y)",
            "2^3^2",
            "-(x+1)",
            "abs(x-y)+sqrt(1+x^2)",
        ];
        for s in exprs {
            let e = p(s);
            let printed = e.to_string();
            let back = Expr::parse(&printed).unwrap_or_else(|err| panic!("reparse `{printed}`: {err}"));
            for &(x, y) in &[(0.5, 0.25), (-0.9, 0.8), (0.1, -0.2)] {
                let a = e.eval(x, y).unwrap();
                let b = back.eval(x, y).unwrap();
                assert!(
                    (a - b).abs() <= 1e-14 * a.abs().max(1.0),
                    "`{s}` -> `{printed}`: {a} vs {b}"
                );
            }
        }
    }

    #[test]
    fn derivatives_print_and_reparse() {
        for s in ["x^2*y", "sin(x*y)", "x/(1+y^2)", "sqrt(1+x^2)", "abs(x)"] {
            let d = p(s).derivative(Var::X);
            let printed = d.to_string();
            let back = Expr::parse(&printed).unwrap_or_else(|err| panic!("reparse `{printed}`: {err}"));
            let a = d.eval(0.4, -0.3).unwrap();
            let b = back.eval(0.4, -0.3).unwrap();
            assert_eq!(a.to_bits(), b.to_bits(), "`{printed}`");
        }
    }

    proptest::proptest! {
        #[test]
        fn random_linear_combinations_round_trip(a in -10.0f64..10.0, b in -10.0f64..10.0, c in -10.0f64..10.0) {
            let text = format!("{a}+{b}*x+{c}*y");
            let e = Expr::parse(&text).unwrap();
            let printed = e.to_string();
            let back = Expr::parse(&printed).unwrap();
            let v0 = e.eval(0.3, 0.7).unwrap();
            let v1 = back.eval(0.3, 0.7).unwrap();
            proptest::prop_assert_eq!(v0.to_bits(), v1.to_bits());
        }
    }
}
