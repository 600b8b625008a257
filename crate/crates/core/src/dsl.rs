//! A small operator language:
//!
//! ```text
//! expr   := term (('+' | '-') term)*
//! term   := unary (('*' | '/') unary)*
//! unary  := '-' unary | power
//! power  := factor ('^' INT)?
//! factor := atom | '(' expr ')' | 'comm(' expr ',' expr ')' | 'exp(' expr ',' expr ')'
//! atom   := x<i> | d<i> | OE | OL | LAP | X2 | INT | INT/INT | omega | nu
//! ```
//!
//! Division is only defined by scalars. `exp` cannot be turned into an
//! operator; it is applied to a vector with [`apply_ast`].

use std::fmt;

use num_bigint::BigInt;
use num_traits::Zero;
use thiserror::Error;

use crate::calogero::{CalogeroError, CalogeroModel, ModelOptions};
use crate::funcspace::{Element, GradedSeries};
use crate::opalg::{apply_exp, exp_series, DiffOp, ExpMode, ExpOutput, OpError};
use crate::scalar::{RadScalar, Rational};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum DslError {
    #[error("syntax error at position {pos}: {msg}")]
    Syntax { pos: usize, msg: String },
    #[error("unknown identifier '{name}' at position {pos}")]
    UnknownIdentifier { pos: usize, name: String },
    #[error("variable index {index} at position {pos} is out of range for {n} variables")]
    IndexOutOfRange { pos: usize, index: usize, n: usize },
    #[error("expected a scalar, got {0}")]
    NotScalar(String),
    #[error("expected a multiplication operator, got {0}")]
    NotMultiplication(String),
    #[error("exp(...) has no operator form; apply it to a vector instead")]
    ExpAsOperator,
    #[error("unsupported use of exp: {0}")]
    UnsupportedExp(String),
    #[error(transparent)]
    Op(#[from] OpError),
    #[error(transparent)]
    Model(#[from] CalogeroError),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum OpAst {
    /// `x_i`, zero-based.
    Var(usize),
    /// `∂_i`, zero-based.
    Deriv(usize),
    Euler,
    Calogero,
    Laplacian,
    RadiusSquared,
    Num(Rational),
    Omega,
    Nu,
    Neg(Box<OpAst>),
    Add(Box<OpAst>, Box<OpAst>),
    Sub(Box<OpAst>, Box<OpAst>),
    Mul(Box<OpAst>, Box<OpAst>),
    Div(Box<OpAst>, Box<OpAst>),
    Pow(Box<OpAst>, u32),
    Comm(Box<OpAst>, Box<OpAst>),
    Exp(Box<OpAst>, Box<OpAst>),
}

impl OpAst {
    fn contains_exp(&self) -> bool {
        use OpAst::*;
        match self {
            Exp(..) => true,
            Neg(a) | Pow(a, _) => a.contains_exp(),
            Add(a, b) | Sub(a, b) | Mul(a, b) | Div(a, b) | Comm(a, b) => a.contains_exp() || b.contains_exp(),
            _ => false,
        }
    }
}

impl fmt::Display for OpAst {
    /// Fully parenthesized, so that re-parsing yields the same tree.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        use OpAst::*;
        match self {
            Var(i) => write!(f, "x{}", i + 1),
            Deriv(i) => write!(f, "d{}", i + 1),
            Euler => write!(f, "OE"),
            Calogero => write!(f, "OL"),
            Laplacian => write!(f, "LAP"),
            RadiusSquared => write!(f, "X2"),
            Num(q) => write!(f, "{q}"),
            Omega => write!(f, "omega"),
            Nu => write!(f, "nu"),
            Neg(a) => write!(f, "(-{a})"),
            Add(a, b) => write!(f, "({a} + {b})"),
            Sub(a, b) => write!(f, "({a} - {b})"),
            Mul(a, b) => write!(f, "({a} * {b})"),
            Div(a, b) => write!(f, "({a} / {b})"),
            Pow(a, k) => write!(f, "({a}^{k})"),
            Comm(a, b) => write!(f, "comm({a}, {b})"),
            Exp(a, b) => write!(f, "exp({a}, {b})"),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
enum Tok {
    Ident(String),
    Int(BigInt),
    Rat(Rational),
    Plus,
    Minus,
    Star,
    Slash,
    Caret,
    LParen,
    RParen,
    Comma,
    End,
}

fn lex(text: &str) -> Result<Vec<(Tok, usize)>, DslError> {
    let bytes = text.as_bytes();
    let mut out = Vec::new();
    let mut i = 0;
    while i < bytes.len() {
        let c = bytes[i];
        if c.is_ascii_whitespace() {
            i += 1;
            continue;
        }
        let start = i;
        let tok = match c {
            b'+' => Tok::Plus,
            b'-' => Tok::Minus,
            b'*' => Tok::Star,
            b'/' => Tok::Slash,
            b'^' => Tok::Caret,
            b'(' => Tok::LParen,
            b')' => Tok::RParen,
            b',' => Tok::Comma,
            b'0'..=b'9' => {
                while i < bytes.len() && bytes[i].is_ascii_digit() {
                    i += 1;
                }
                let num: BigInt = text[start..i].parse().expect("digits");
                // `p/q` directly adjacent is a rational literal
                if i + 1 < bytes.len() && bytes[i] == b'/' && bytes[i + 1].is_ascii_digit() {
                    let dstart = i + 1;
                    i = dstart;
                    while i < bytes.len() && bytes[i].is_ascii_digit() {
                        i += 1;
                    }
                    let den: BigInt = text[dstart..i].parse().expect("digits");
                    if den.is_zero() {
                        return Err(DslError::Syntax {
                            pos: dstart,
                            msg: "zero denominator".into(),
                        });
                    }
                    out.push((Tok::Rat(Rational::new(num, den)), start));
                } else {
                    out.push((Tok::Int(num), start));
                }
                continue;
            }
            c if c.is_ascii_alphabetic() || c == b'_' => {
                while i < bytes.len() && (bytes[i].is_ascii_alphanumeric() || bytes[i] == b'_') {
                    i += 1;
                }
                out.push((Tok::Ident(text[start..i].to_string()), start));
                continue;
            }
            _ => {
                return Err(DslError::Syntax {
                    pos: start,
                    msg: format!("unexpected character '{}'", text[start..].chars().next().unwrap()),
                })
            }
        };
        out.push((tok, start));
        i += 1;
    }
    out.push((Tok::End, text.len()));
    Ok(out)
}

struct Parser {
    toks: Vec<(Tok, usize)>,
    at: usize,
    nvars: usize,
}

impl Parser {
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

    fn expect(&mut self, want: Tok, what: &str) -> Result<(), DslError> {
        if *self.peek() == want {
            self.bump();
            Ok(())
        } else {
            Err(self.error(format!("expected {what}")))
        }
    }

    fn error(&self, msg: String) -> DslError {
        let found = match self.peek() {
            Tok::End => "end of input".to_string(),
            t => format!("{t:?}"),
        };
        DslError::Syntax {
            pos: self.pos(),
            msg: format!("{msg}, found {found}"),
        }
    }

    fn expr(&mut self) -> Result<OpAst, DslError> {
        let mut lhs = self.term()?;
        loop {
            match self.peek() {
                Tok::Plus => {
                    self.bump();
                    lhs = OpAst::Add(Box::new(lhs), Box::new(self.term()?));
                }
                Tok::Minus => {
                    self.bump();
                    lhs = OpAst::Sub(Box::new(lhs), Box::new(self.term()?));
                }
                _ => return Ok(lhs),
            }
        }
    }

    fn term(&mut self) -> Result<OpAst, DslError> {
        let mut lhs = self.unary()?;
        loop {
            match self.peek() {
                Tok::Star => {
                    self.bump();
                    lhs = OpAst::Mul(Box::new(lhs), Box::new(self.unary()?));
                }
                Tok::Slash => {
                    self.bump();
                    lhs = OpAst::Div(Box::new(lhs), Box::new(self.unary()?));
                }
                _ => return Ok(lhs),
            }
        }
    }

    fn unary(&mut self) -> Result<OpAst, DslError> {
        if *self.peek() == Tok::Minus {
            self.bump();
            return Ok(OpAst::Neg(Box::new(self.unary()?)));
        }
        let base = self.factor()?;
        if *self.peek() == Tok::Caret {
            self.bump();
            let pos = self.pos();
            return match self.bump() {
                Tok::Int(k) => {
                    let k = u32::try_from(&k).map_err(|_| DslError::Syntax {
                        pos,
                        msg: "exponent too large".into(),
                    })?;
                    Ok(OpAst::Pow(Box::new(base), k))
                }
                _ => Err(DslError::Syntax {
                    pos,
                    msg: "expected a non-negative integer exponent".into(),
                }),
            };
        }
        Ok(base)
    }

    fn index(&self, name: &str, pos: usize) -> Result<Option<usize>, DslError> {
        let digits = &name[1..];
        if digits.is_empty() || !digits.bytes().all(|b| b.is_ascii_digit()) {
            return Ok(None);
        }
        let index: usize = digits.parse().map_err(|_| DslError::IndexOutOfRange {
            pos,
            index: usize::MAX,
            n: self.nvars,
        })?;
        if index == 0 || index > self.nvars {
            return Err(DslError::IndexOutOfRange {
                pos,
                index,
                n: self.nvars,
            });
        }
        Ok(Some(index - 1))
    }

    fn pair(&mut self) -> Result<(OpAst, OpAst), DslError> {
        self.expect(Tok::LParen, "'('")?;
        let a = self.expr()?;
        self.expect(Tok::Comma, "','")?;
        let b = self.expr()?;
        self.expect(Tok::RParen, "')'")?;
        Ok((a, b))
    }

    fn factor(&mut self) -> Result<OpAst, DslError> {
        let pos = self.pos();
        if !matches!(self.peek(), Tok::Int(_) | Tok::Rat(_) | Tok::LParen | Tok::Ident(_)) {
            return Err(self.error("expected an operand".into()));
        }
        match self.bump() {
            Tok::Int(k) => Ok(OpAst::Num(Rational::from_integer(k))),
            Tok::Rat(q) => Ok(OpAst::Num(q)),
            Tok::LParen => {
                let e = self.expr()?;
                self.expect(Tok::RParen, "')'")?;
                Ok(e)
            }
            Tok::Ident(name) => match name.as_str() {
                "OE" => Ok(OpAst::Euler),
                "OL" => Ok(OpAst::Calogero),
                "LAP" => Ok(OpAst::Laplacian),
                "X2" => Ok(OpAst::RadiusSquared),
                "omega" => Ok(OpAst::Omega),
                "nu" => Ok(OpAst::Nu),
                "comm" => {
                    let (a, b) = self.pair()?;
                    Ok(OpAst::Comm(Box::new(a), Box::new(b)))
                }
                "exp" => {
                    let (a, b) = self.pair()?;
                    Ok(OpAst::Exp(Box::new(a), Box::new(b)))
                }
                _ => {
                    let kind = name.as_bytes()[0];
                    if kind == b'x' || kind == b'd' {
                        if let Some(i) = self.index(&name, pos)? {
                            return Ok(if kind == b'x' { OpAst::Var(i) } else { OpAst::Deriv(i) });
                        }
                    }
                    Err(DslError::UnknownIdentifier { pos, name })
                }
            },
            _ => unreachable!("operand tokens are checked above"),
        }
    }
}

/// Parses `text` for operators on `nvars` variables.
pub fn parse_opdsl(text: &str, nvars: usize) -> Result<OpAst, DslError> {
    let toks = lex(text)?;
    let mut p = Parser { toks, at: 0, nvars };
    if *p.peek() == Tok::End {
        return Err(DslError::Syntax {
            pos: 0,
            msg: "empty expression".into(),
        });
    }
    let ast = p.expr()?;
    if *p.peek() != Tok::End {
        return Err(p.error("unexpected trailing input".into()));
    }
    Ok(ast)
}

/// Parameters and model operators that atoms evaluate to.
pub struct EvalContext {
    model: CalogeroModel,
}

impl EvalContext {
    /// `nu` is accepted without range restrictions here.
    pub fn new(nvars: usize, omega: Rational, nu: Rational) -> Result<Self, DslError> {
        let opts = ModelOptions {
            allow_nu: true,
            ..Default::default()
        };
        Ok(Self {
            model: CalogeroModel::new(nvars, omega, nu, opts)?,
        })
    }

    pub fn nvars(&self) -> usize {
        self.model.nvars()
    }

    pub fn model(&self) -> &CalogeroModel {
        &self.model
    }
}

/// Evaluates an expression without `exp` to an operator.
pub fn eval_op(ast: &OpAst, ctx: &EvalContext) -> Result<DiffOp, DslError> {
    use OpAst::*;
    let n = ctx.nvars();
    let m = &ctx.model;
    Ok(match ast {
        Var(i) => DiffOp::var(n, *i),
        Deriv(i) => DiffOp::partial(n, *i),
        Euler => m.oe().clone(),
        Calogero => m.ol().clone(),
        Laplacian => m.lap().clone(),
        RadiusSquared => m.x2().clone(),
        Num(q) => DiffOp::scalar(n, RadScalar::from_rational(q.clone())),
        Omega => DiffOp::scalar(n, RadScalar::from_rational(m.omega().clone())),
        Nu => DiffOp::scalar(n, RadScalar::from_rational(m.nu().clone())),
        Neg(a) => eval_op(a, ctx)?.neg(),
        Add(a, b) => eval_op(a, ctx)?.try_add(&eval_op(b, ctx)?)?,
        Sub(a, b) => eval_op(a, ctx)?.try_sub(&eval_op(b, ctx)?)?,
        Mul(a, b) => eval_op(a, ctx)?.compose(&eval_op(b, ctx)?)?,
        Div(a, b) => {
            let c = eval_scalar(b, ctx)?;
            let inv = c.inv().map_err(OpError::from)?;
            eval_op(a, ctx)?.scale(&inv)
        }
        Pow(a, k) => eval_op(a, ctx)?.pow(*k)?,
        Comm(a, b) => eval_op(a, ctx)?.commutator(&eval_op(b, ctx)?)?,
        Exp(..) => return Err(DslError::ExpAsOperator),
    })
}

/// Evaluates an expression that must reduce to a constant.
pub fn eval_scalar(ast: &OpAst, ctx: &EvalContext) -> Result<RadScalar, DslError> {
    let op = eval_op(ast, ctx)?;
    if op.is_zero() {
        return Ok(RadScalar::zero());
    }
    op.as_scalar().ok_or_else(|| DslError::NotScalar(op.to_string()))
}

/// Parses a vector: a multiplication expression applied to 1, then given
/// prefactor power `mu` and Gaussian exponent `gamma`.
pub fn parse_element(text: &str, ctx: &EvalContext, mu: &Rational, gamma: &Rational) -> Result<Element, DslError> {
    let ast = parse_opdsl(text, ctx.nvars())?;
    let op = eval_op(&ast, ctx)?;
    let m = op
        .as_multiplication()
        .ok_or_else(|| DslError::NotMultiplication(op.to_string()))?;
    Ok(Element::new(m.poly().clone(), m.mu() + mu, m.gamma() + gamma))
}

/// Result of applying an expression to a vector.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Value {
    Element(Element),
    Series(GradedSeries),
}

impl fmt::Display for Value {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Value::Element(e) => write!(f, "{e}"),
            Value::Series(s) => write!(f, "{s}"),
        }
    }
}

fn add_values(a: Value, b: Value, cutoff: i64) -> Result<Value, DslError> {
    Ok(match (a, b) {
        (Value::Element(x), Value::Element(y)) => Value::Element(x.try_add(&y).map_err(OpError::from)?),
        (a, b) => {
            let sa = to_series(a, cutoff);
            let sb = to_series(b, cutoff);
            Value::Series(sa.try_add(&sb).map_err(OpError::from)?)
        }
    })
}

fn to_series(v: Value, cutoff: i64) -> GradedSeries {
    match v {
        Value::Element(e) => GradedSeries::from_element(&e, cutoff),
        Value::Series(s) => s,
    }
}

/// Applies `ast` to `f`. Products act right to left; `exp(c, A)` is summed
/// according to `mode`.
pub fn apply_ast(ast: &OpAst, f: &Value, ctx: &EvalContext, mode: ExpMode) -> Result<Value, DslError> {
    let cutoff = match mode {
        ExpMode::Truncated { cutoff, .. } => cutoff,
        ExpMode::Exact { .. } => i64::MIN,
    };
    if !ast.contains_exp() {
        let op = eval_op(ast, ctx)?;
        return Ok(match f {
            Value::Element(e) => Value::Element(op.apply(e)?),
            Value::Series(s) => Value::Series(op.apply_series(s)?),
        });
    }
    use OpAst::*;
    match ast {
        Exp(c, a) => {
            let c = eval_scalar(c, ctx)?;
            let op = eval_op(a, ctx)?;
            match f {
                Value::Element(e) => Ok(match apply_exp(&c, &op, e, mode)? {
                    ExpOutput::Exact { value, .. } => Value::Element(value),
                    ExpOutput::Truncated(s) => Value::Series(s),
                }),
                Value::Series(s) => {
                    let bound = match mode {
                        ExpMode::Exact { bound } | ExpMode::Truncated { bound, .. } => bound,
                    };
                    Ok(Value::Series(exp_series(&c, &op, s, bound)?))
                }
            }
        }
        Mul(a, b) => {
            let inner = apply_ast(b, f, ctx, mode)?;
            apply_ast(a, &inner, ctx, mode)
        }
        Add(a, b) => add_values(apply_ast(a, f, ctx, mode)?, apply_ast(b, f, ctx, mode)?, cutoff),
        Sub(a, b) => {
            let rhs = apply_ast(&Neg(b.clone()), f, ctx, mode)?;
            add_values(apply_ast(a, f, ctx, mode)?, rhs, cutoff)
        }
        Neg(a) => Ok(match apply_ast(a, f, ctx, mode)? {
            Value::Element(e) => Value::Element(e.neg()),
            Value::Series(s) => Value::Series(s.scale(&RadScalar::from_int(-1))),
        }),
        Pow(a, k) => {
            let mut v = f.clone();
            for _ in 0..*k {
                v = apply_ast(a, &v, ctx, mode)?;
            }
            Ok(v)
        }
        other => Err(DslError::UnsupportedExp(other.to_string())),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalar::{rat, rat_int};

    fn ctx() -> EvalContext {
        EvalContext::new(2, rat_int(1), rat(3, 2)).unwrap()
    }

    #[test]
    fn parses_hamiltonian() {
        let ast = parse_opdsl("omega*OE - 1/2*OL", 2).unwrap();
        assert_eq!(
            ast,
            OpAst::Sub(
                Box::new(OpAst::Mul(Box::new(OpAst::Omega), Box::new(OpAst::Euler))),
                Box::new(OpAst::Mul(Box::new(OpAst::Num(rat(1, 2))), Box::new(OpAst::Calogero)))
            )
        );
        let c = ctx();
        assert_eq!(&eval_op(&ast, &c).unwrap(), c.model().h_tilde());
    }

    #[test]
    fn parses_commutator() {
        let ast = parse_opdsl("comm(LAP, X2)", 2).unwrap();
        assert_eq!(ast, OpAst::Comm(Box::new(OpAst::Laplacian), Box::new(OpAst::RadiusSquared)));
        let c = ctx();
        let want = eval_op(&parse_opdsl("4*(OE + 1)", 2).unwrap(), &c).unwrap();
        assert_eq!(eval_op(&ast, &c).unwrap(), want);
    }

    #[test]
    fn error_positions() {
        assert_eq!(
            parse_opdsl("x1*(", 2).unwrap_err(),
            DslError::Syntax {
                pos: 4,
                msg: "expected an operand, found end of input".into()
            }
        );
        assert!(matches!(parse_opdsl("x3", 2), Err(DslError::IndexOutOfRange { pos: 0, index: 3, n: 2 })));
        assert!(matches!(parse_opdsl("OE + foo", 2), Err(DslError::UnknownIdentifier { pos: 5, .. })));
        assert!(matches!(parse_opdsl("OE )", 2), Err(DslError::Syntax { pos: 3, .. })));
        assert!(matches!(parse_opdsl("", 2), Err(DslError::Syntax { pos: 0, .. })));
        assert!(matches!(parse_opdsl("1/0", 2), Err(DslError::Syntax { pos: 2, .. })));
    }

    #[test]
    fn precedence_and_associativity() {
        let ast = parse_opdsl("x1 - x2 - d1*d2*x1", 2).unwrap();
        assert_eq!(ast.to_string(), "((x1 - x2) - ((d1 * d2) * x1))");
        assert_eq!(parse_opdsl("-d1^2", 2).unwrap().to_string(), "(-(d1^2))");
    }

    #[test]
    fn render_round_trip() {
        for text in ["omega*OE - 1/2*OL", "exp(-1/(4*omega), OL)", "comm(x1*d2, d1^3) / nu"] {
            let ast = parse_opdsl(text, 2).unwrap();
            assert_eq!(parse_opdsl(&ast.to_string(), 2).unwrap(), ast);
        }
    }

    #[test]
    fn exp_application() {
        let c = ctx();
        let ast = parse_opdsl("exp(-1/(4*omega), OL)", 2).unwrap();
        assert_eq!(eval_op(&ast, &c), Err(DslError::ExpAsOperator));
        let s = parse_element("x1^2 + x2^2", &c, &rat_int(0), &rat_int(0)).unwrap();
        let out = apply_ast(&ast, &Value::Element(s.clone()), &c, ExpMode::Exact { bound: 64 }).unwrap();
        // s − (1 + 2ν)/ω = s − 4
        let want = s.try_sub(&Element::constant(2, RadScalar::from_int(4))).unwrap();
        assert_eq!(out, Value::Element(want));
        let x1sq = parse_element("x1^2", &c, &rat_int(0), &rat_int(0)).unwrap();
        assert!(apply_ast(&ast, &Value::Element(x1sq.clone()), &c, ExpMode::Exact { bound: 8 }).is_err());
        let trunc = apply_ast(&ast, &Value::Element(x1sq), &c, ExpMode::Truncated { bound: 64, cutoff: -4 }).unwrap();
        assert!(matches!(trunc, Value::Series(_)));
    }

    #[test]
    fn element_flags() {
        let c = ctx();
        let e = parse_element("2*x1*x2", &c, &rat(3, 2), &rat(-1, 2)).unwrap();
        assert_eq!(e.mu(), &rat(3, 2));
        assert_eq!(e.gamma(), &rat(-1, 2));
        assert!(matches!(parse_element("d1", &c, &rat_int(0), &rat_int(0)), Err(DslError::NotMultiplication(_))));
    }
}
