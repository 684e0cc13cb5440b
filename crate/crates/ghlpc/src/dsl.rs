//! The `.ghm` model language: a parser with positioned diagnostics, a canonical
//! printer, and an evaluator that plugs into [`VectorField`].
//!
//! ```text
//! # delayed FitzHugh-Nagumo
//! state u1 u2
//! param beta alpha
//! const c = 2.0528
//! delay tau = 1.7722
//! du1 = -(1/3)*u1^3 + (c + alpha)*u1^2 - u2 + 2*beta*tanh(u1(t - tau))
//! du2 = 0.08*(u1 - 0.9*u2)
//! ```

use std::fmt::{self, Write as _};

use ghlpc_core::model::VectorField;
use ghlpc_core::scalar::Scalar;
use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum DslError {
    #[error("{line}:{col}: syntax error: {msg}")]
    Syntax { line: usize, col: usize, msg: String },
    #[error("{line}:{col}: unknown identifier `{name}`")]
    UnknownIdentifier { line: usize, col: usize, name: String },
    #[error("expected exactly 2 parameters, found {found}")]
    ParamCount { found: usize },
    #[error("{line}:{col}: delay must be positive, got {value}")]
    NonpositiveDelay { line: usize, col: usize, value: f64 },
    #[error("{line}:{col}: `{name}` is already declared")]
    Duplicate { line: usize, col: usize, name: String },
    #[error("no equation for state `{name}`")]
    MissingEquation { name: String },
    #[error("model declares no states")]
    NoStates,
}

type Result<T> = std::result::Result<T, DslError>;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum UnOp {
    Neg,
    Exp,
    Log,
    Sin,
    Cos,
    Tanh,
    Sqrt,
}

impl UnOp {
    fn from_name(s: &str) -> Option<Self> {
        Some(match s {
            "exp" => UnOp::Exp,
            "log" => UnOp::Log,
            "sin" => UnOp::Sin,
            "cos" => UnOp::Cos,
            "tanh" => UnOp::Tanh,
            "sqrt" => UnOp::Sqrt,
            _ => return None,
        })
    }

    fn name(self) -> &'static str {
        match self {
            UnOp::Neg => "-",
            UnOp::Exp => "exp",
            UnOp::Log => "log",
            UnOp::Sin => "sin",
            UnOp::Cos => "cos",
            UnOp::Tanh => "tanh",
            UnOp::Sqrt => "sqrt",
        }
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

/// Resolved expression tree.
#[derive(Debug, Clone, PartialEq)]
pub enum Expr {
    Num(f64),
    /// Index into [`ModelDef::constants`].
    Const(usize),
    /// State `var` at lag `lag`; lag 0 is the current time, lag `j` is `delays[j - 1]`.
    State { var: usize, lag: usize },
    Param(usize),
    Unary(UnOp, Box<Expr>),
    Binary(BinOp, Box<Expr>, Box<Expr>),
}

#[derive(Debug, Clone, PartialEq)]
pub struct ModelDef {
    pub states: Vec<String>,
    pub params: Vec<String>,
    pub constants: Vec<(String, f64)>,
    /// Named delays in declaration order.
    pub delay_names: Vec<(String, f64)>,
    /// Distinct delays used by the equations, ascending.
    pub delays: Vec<f64>,
    pub equations: Vec<Expr>,
}

// ---------------------------------------------------------------- lexing

#[derive(Debug, Clone, PartialEq)]
enum Tok {
    Ident(String),
    Num(f64),
    Sym(char),
}

#[derive(Debug, Clone)]
struct Token {
    tok: Tok,
    line: usize,
    col: usize,
}

fn lex_line(src: &str, line: usize) -> Result<Vec<Token>> {
    let chars: Vec<char> = src.chars().collect();
    let mut out = Vec::new();
    let mut i = 0;
    while i < chars.len() {
        let ch = chars[i];
        let col = i + 1;
        if ch == '#' {
            break;
        }
        if ch.is_whitespace() {
            i += 1;
        } else if ch.is_ascii_alphabetic() || ch == '_' {
            let start = i;
            while i < chars.len() && (chars[i].is_ascii_alphanumeric() || chars[i] == '_') {
                i += 1;
            }
            out.push(Token { tok: Tok::Ident(chars[start..i].iter().collect()), line, col });
        } else if ch.is_ascii_digit() || (ch == '.' && chars.get(i + 1).is_some_and(|c| c.is_ascii_digit())) {
            let start = i;
            while i < chars.len() && (chars[i].is_ascii_digit() || chars[i] == '.') {
                i += 1;
            }
            if i < chars.len() && (chars[i] == 'e' || chars[i] == 'E') {
                let mut j = i + 1;
                if j < chars.len() && (chars[j] == '+' || chars[j] == '-') {
                    j += 1;
                }
                if j < chars.len() && chars[j].is_ascii_digit() {
                    i = j;
                    while i < chars.len() && chars[i].is_ascii_digit() {
                        i += 1;
                    }
                }
            }
            let text: String = chars[start..i].iter().collect();
            let v = text
                .parse::<f64>()
                .map_err(|_| DslError::Syntax { line, col, msg: format!("malformed number `{text}`") })?;
            out.push(Token { tok: Tok::Num(v), line, col });
        } else if "+-*/^()=,".contains(ch) {
            out.push(Token { tok: Tok::Sym(ch), line, col });
            i += 1;
        } else {
            return Err(DslError::Syntax { line, col, msg: format!("unexpected character `{ch}`") });
        }
    }
    Ok(out)
}

// ---------------------------------------------------------------- parsing

/// Expression tree before name resolution.
#[derive(Debug, Clone)]
enum Raw {
    Num(f64),
    Name(String, usize, usize),
    Call(String, Box<Raw>, usize, usize),
    Neg(Box<Raw>),
    Bin(BinOp, Box<Raw>, Box<Raw>),
}

struct Parser<'a> {
    toks: &'a [Token],
    pos: usize,
    line: usize,
    eol: usize,
}

impl<'a> Parser<'a> {
    fn new(toks: &'a [Token], line: usize, eol: usize) -> Self {
        Parser { toks, pos: 0, line, eol }
    }

    fn peek(&self) -> Option<&Tok> {
        self.toks.get(self.pos).map(|t| &t.tok)
    }

    fn here(&self) -> (usize, usize) {
        self.toks.get(self.pos).map(|t| (t.line, t.col)).unwrap_or((self.line, self.eol))
    }

    fn err<T>(&self, msg: impl Into<String>) -> Result<T> {
        let (line, col) = self.here();
        Err(DslError::Syntax { line, col, msg: msg.into() })
    }

    fn eat(&mut self, c: char) -> bool {
        if self.peek() == Some(&Tok::Sym(c)) {
            self.pos += 1;
            true
        } else {
            false
        }
    }

    fn expect(&mut self, c: char) -> Result<()> {
        if self.eat(c) {
            Ok(())
        } else {
            self.err(format!("expected `{c}`"))
        }
    }

    fn ident(&mut self) -> Result<(String, usize, usize)> {
        match self.toks.get(self.pos) {
            Some(Token { tok: Tok::Ident(s), line, col }) => {
                self.pos += 1;
                Ok((s.clone(), *line, *col))
            }
            _ => self.err("expected an identifier"),
        }
    }

    fn done(&self) -> Result<()> {
        if self.pos < self.toks.len() {
            self.err("unexpected trailing input")
        } else {
            Ok(())
        }
    }

    fn expr(&mut self) -> Result<Raw> {
        let mut lhs = self.term()?;
        loop {
            let op = if self.eat('+') {
                BinOp::Add
            } else if self.eat('-') {
                BinOp::Sub
            } else {
                return Ok(lhs);
            };
            lhs = Raw::Bin(op, Box::new(lhs), Box::new(self.term()?));
        }
    }

    fn term(&mut self) -> Result<Raw> {
        let mut lhs = self.unary()?;
        loop {
            let op = if self.eat('*') {
                BinOp::Mul
            } else if self.eat('/') {
                BinOp::Div
            } else {
                return Ok(lhs);
            };
            lhs = Raw::Bin(op, Box::new(lhs), Box::new(self.unary()?));
        }
    }

    // `^` binds tighter than unary minus: -x^2 = -(x^2)
    fn unary(&mut self) -> Result<Raw> {
        if self.eat('-') {
            return Ok(Raw::Neg(Box::new(self.unary()?)));
        }
        if self.eat('+') {
            return self.unary();
        }
        self.power()
    }

    fn power(&mut self) -> Result<Raw> {
        let base = self.atom()?;
        if self.eat('^') {
            return Ok(Raw::Bin(BinOp::Pow, Box::new(base), Box::new(self.unary()?)));
        }
        Ok(base)
    }

    fn atom(&mut self) -> Result<Raw> {
        match self.toks.get(self.pos).cloned() {
            Some(Token { tok: Tok::Num(v), .. }) => {
                self.pos += 1;
                Ok(Raw::Num(v))
            }
            Some(Token { tok: Tok::Ident(name), line, col }) => {
                self.pos += 1;
                if self.eat('(') {
                    let arg = self.expr()?;
                    self.expect(')')?;
                    Ok(Raw::Call(name, Box::new(arg), line, col))
                } else {
                    Ok(Raw::Name(name, line, col))
                }
            }
            Some(Token { tok: Tok::Sym('('), .. }) => {
                self.pos += 1;
                let e = self.expr()?;
                self.expect(')')?;
                Ok(e)
            }
            Some(_) => self.err("expected a number, name or `(`"),
            None => self.err("unexpected end of line"),
        }
    }
}

// ---------------------------------------------------------------- resolution

enum Kind {
    State(usize),
    Param(usize),
    Const(usize),
    Delay(usize),
}

struct Scope {
    names: Vec<(String, Kind)>,
    constants: Vec<(String, f64)>,
    delay_names: Vec<(String, f64)>,
}

impl Scope {
    fn lookup(&self, name: &str) -> Option<&Kind> {
        self.names.iter().find(|(n, _)| n == name).map(|(_, k)| k)
    }

    fn declare(&mut self, name: String, kind: Kind, line: usize, col: usize) -> Result<()> {
        if self.lookup(&name).is_some() || name == "t" || UnOp::from_name(&name).is_some() {
            return Err(DslError::Duplicate { line, col, name });
        }
        self.names.push((name, kind));
        Ok(())
    }

    /// Value of an expression built from numbers, constants and delay names.
    fn fold(&self, e: &Raw) -> Result<f64> {
        Ok(match e {
            Raw::Num(v) => *v,
            Raw::Name(n, line, col) => match self.lookup(n) {
                Some(Kind::Const(i)) => self.constants[*i].1,
                Some(Kind::Delay(i)) => self.delay_names[*i].1,
                Some(_) => {
                    return Err(DslError::Syntax {
                        line: *line,
                        col: *col,
                        msg: format!("`{n}` is not a constant"),
                    })
                }
                None => return Err(DslError::UnknownIdentifier { line: *line, col: *col, name: n.clone() }),
            },
            Raw::Neg(a) => -self.fold(a)?,
            Raw::Bin(op, a, b) => {
                let (a, b) = (self.fold(a)?, self.fold(b)?);
                match op {
                    BinOp::Add => a + b,
                    BinOp::Sub => a - b,
                    BinOp::Mul => a * b,
                    BinOp::Div => a / b,
                    BinOp::Pow => a.powf(b),
                }
            }
            Raw::Call(f, a, line, col) => {
                let v = self.fold(a)?;
                match UnOp::from_name(f) {
                    Some(op) => apply_f64(op, v),
                    None => {
                        return Err(DslError::Syntax {
                            line: *line,
                            col: *col,
                            msg: format!("`{f}(…)` is not a constant"),
                        })
                    }
                }
            }
        })
    }

    fn resolve(&self, e: &Raw, lags: &mut Vec<f64>) -> Result<Expr> {
        Ok(match e {
            Raw::Num(v) => Expr::Num(*v),
            Raw::Name(n, line, col) => match self.lookup(n) {
                Some(Kind::State(i)) => Expr::State { var: *i, lag: 0 },
                Some(Kind::Param(i)) => Expr::Param(*i),
                Some(Kind::Const(i)) => Expr::Const(*i),
                Some(Kind::Delay(_)) => {
                    return Err(DslError::Syntax {
                        line: *line,
                        col: *col,
                        msg: format!("delay `{n}` may only appear as x(t - {n})"),
                    })
                }
                None => return Err(DslError::UnknownIdentifier { line: *line, col: *col, name: n.clone() }),
            },
            Raw::Neg(a) => Expr::Unary(UnOp::Neg, Box::new(self.resolve(a, lags)?)),
            Raw::Bin(op, a, b) => Expr::Binary(*op, Box::new(self.resolve(a, lags)?), Box::new(self.resolve(b, lags)?)),
            Raw::Call(f, arg, line, col) => {
                if let Some(op) = UnOp::from_name(f) {
                    return Ok(Expr::Unary(op, Box::new(self.resolve(arg, lags)?)));
                }
                let var = match self.lookup(f) {
                    Some(Kind::State(i)) => *i,
                    Some(_) => {
                        return Err(DslError::Syntax { line: *line, col: *col, msg: format!("`{f}` is not callable") })
                    }
                    None => return Err(DslError::UnknownIdentifier { line: *line, col: *col, name: f.clone() }),
                };
                let bad = || DslError::Syntax { line: *line, col: *col, msg: format!("expected {f}(t) or {f}(t - delay)") };
                let tau = match arg.as_ref() {
                    Raw::Name(t, ..) if t == "t" => 0.0,
                    Raw::Bin(BinOp::Sub, a, b) if matches!(a.as_ref(), Raw::Name(t, ..) if t == "t") => {
                        let v = self.fold(b)?;
                        if !(v > 0.0) {
                            return Err(DslError::NonpositiveDelay { line: *line, col: *col, value: v });
                        }
                        v
                    }
                    _ => return Err(bad()),
                };
                if tau == 0.0 {
                    Expr::State { var, lag: 0 }
                } else {
                    let k = match lags.iter().position(|&d| d == tau) {
                        Some(k) => k,
                        None => {
                            lags.push(tau);
                            lags.len() - 1
                        }
                    };
                    // provisional lag numbering, fixed up after sorting
                    Expr::State { var, lag: k + 1 }
                }
            }
        })
    }
}

fn relabel(e: &mut Expr, map: &[usize]) {
    match e {
        Expr::State { lag, .. } if *lag > 0 => *lag = map[*lag - 1],
        Expr::Unary(_, a) => relabel(a, map),
        Expr::Binary(_, a, b) => {
            relabel(a, map);
            relabel(b, map);
        }
        _ => {}
    }
}

pub fn parse_model(text: &str) -> Result<ModelDef> {
    let text = text.strip_prefix('\u{feff}').unwrap_or(text);
    let mut scope = Scope { names: Vec::new(), constants: Vec::new(), delay_names: Vec::new() };
    let (mut states, mut params) = (Vec::<String>::new(), Vec::<String>::new());
    let mut equations: Vec<(usize, Raw, usize, usize)> = Vec::new();

    let lines: Vec<(usize, Vec<Token>, usize)> = text
        .split('\n')
        .enumerate()
        .map(|(i, l)| {
            let l = l.strip_suffix('\r').unwrap_or(l);
            Ok((i + 1, lex_line(l, i + 1)?, l.chars().count() + 1))
        })
        .collect::<Result<_>>()?;

    // declarations first, so equations may precede them
    let mut pending = Vec::new();
    for (line, toks, eol) in &lines {
        if toks.is_empty() {
            continue;
        }
        let mut p = Parser::new(toks, *line, *eol);
        let (kw, kl, kc) = p.ident()?;
        match kw.as_str() {
            "state" | "param" => {
                while p.peek().is_some() {
                    let (name, l, c) = p.ident()?;
                    let kind = if kw == "state" { Kind::State(states.len()) } else { Kind::Param(params.len()) };
                    scope.declare(name.clone(), kind, l, c)?;
                    if kw == "state" { states.push(name) } else { params.push(name) }
                    p.eat(',');
                }
            }
            "const" | "delay" => {
                let (name, l, c) = p.ident()?;
                p.expect('=')?;
                let (vl, vc) = p.here();
                let e = p.expr()?;
                p.done()?;
                let v = scope.fold(&e)?;
                if kw == "const" {
                    scope.declare(name.clone(), Kind::Const(scope.constants.len()), l, c)?;
                    scope.constants.push((name, v));
                } else {
                    if !(v > 0.0) {
                        return Err(DslError::NonpositiveDelay { line: vl, col: vc, value: v });
                    }
                    scope.declare(name.clone(), Kind::Delay(scope.delay_names.len()), l, c)?;
                    scope.delay_names.push((name, v));
                }
            }
            _ => {
                if !p.eat('=') {
                    return p.err(format!("expected a declaration or `d<state> = …`, found `{kw}`"));
                }
                pending.push((kw, kl, kc, p.pos, *line, *eol, toks));
            }
        }
    }
    if states.is_empty() {
        return Err(DslError::NoStates);
    }
    if params.len() != 2 {
        return Err(DslError::ParamCount { found: params.len() });
    }
    for (lhs, l, c, pos, line, eol, toks) in pending {
        let var = lhs
            .strip_prefix('d')
            .and_then(|s| states.iter().position(|n| n == s))
            .ok_or(DslError::UnknownIdentifier { line: l, col: c, name: lhs.clone() })?;
        if equations.iter().any(|e| e.0 == var) {
            return Err(DslError::Duplicate { line: l, col: c, name: lhs });
        }
        let mut p = Parser::new(toks, line, eol);
        p.pos = pos;
        let e = p.expr()?;
        p.done()?;
        equations.push((var, e, l, c));
    }

    let mut lags = Vec::new();
    let mut resolved = vec![None; states.len()];
    for (var, raw, ..) in &equations {
        resolved[*var] = Some(scope.resolve(raw, &mut lags)?);
    }
    let mut order: Vec<usize> = (0..lags.len()).collect();
    order.sort_by(|&a, &b| lags[a].total_cmp(&lags[b]));
    let mut map = vec![0; lags.len()];
    for (rank, &k) in order.iter().enumerate() {
        map[k] = rank + 1;
    }
    let equations = resolved
        .into_iter()
        .enumerate()
        .map(|(i, e)| {
            let mut e = e.ok_or_else(|| DslError::MissingEquation { name: states[i].clone() })?;
            relabel(&mut e, &map);
            Ok(e)
        })
        .collect::<Result<Vec<_>>>()?;
    let delays = order.iter().map(|&k| lags[k]).collect();
    Ok(ModelDef { states, params, constants: scope.constants, delay_names: scope.delay_names, delays, equations })
}

// ---------------------------------------------------------------- printing

fn prec(e: &Expr) -> u8 {
    match e {
        Expr::Binary(BinOp::Add | BinOp::Sub, ..) => 1,
        Expr::Binary(BinOp::Mul | BinOp::Div, ..) => 2,
        Expr::Unary(UnOp::Neg, _) => 3,
        Expr::Binary(BinOp::Pow, ..) => 4,
        _ => 5,
    }
}

impl ModelDef {
    fn write_expr(&self, out: &mut String, e: &Expr, min: u8) {
        let paren = prec(e) < min;
        if paren {
            out.push('(');
        }
        match e {
            Expr::Num(v) => {
                let _ = write!(out, "{v:?}");
            }
            Expr::Const(i) => out.push_str(&self.constants[*i].0),
            Expr::Param(i) => out.push_str(&self.params[*i]),
            Expr::State { var, lag } => {
                out.push_str(&self.states[*var]);
                if *lag > 0 {
                    let tau = self.delays[*lag - 1];
                    match self.delay_names.iter().find(|(_, v)| *v == tau) {
                        Some((n, _)) => {
                            let _ = write!(out, "(t - {n})");
                        }
                        None => {
                            let _ = write!(out, "(t - {tau:?})");
                        }
                    }
                }
            }
            Expr::Unary(UnOp::Neg, a) => {
                out.push('-');
                self.write_expr(out, a, 3);
            }
            Expr::Unary(op, a) => {
                out.push_str(op.name());
                out.push('(');
                self.write_expr(out, a, 0);
                out.push(')');
            }
            Expr::Binary(op, a, b) => {
                let (sym, l, r) = match op {
                    BinOp::Add => (" + ", 1, 2),
                    BinOp::Sub => (" - ", 1, 2),
                    BinOp::Mul => ("*", 2, 3),
                    BinOp::Div => ("/", 2, 3),
                    BinOp::Pow => ("^", 5, 3),
                };
                self.write_expr(out, a, l);
                out.push_str(sym);
                self.write_expr(out, b, r);
            }
        }
        if paren {
            out.push(')');
        }
    }

    /// Canonical text of one equation's right-hand side.
    pub fn expr_to_string(&self, e: &Expr) -> String {
        let mut s = String::new();
        self.write_expr(&mut s, e, 0);
        s
    }

    fn const_value(&self, e: &Expr) -> Option<f64> {
        match e {
            Expr::Num(v) => Some(*v),
            Expr::Const(i) => Some(self.constants[*i].1),
            Expr::Unary(UnOp::Neg, a) => self.const_value(a).map(|v| -v),
            _ => None,
        }
    }

    fn eval_expr<S: Scalar>(&self, e: &Expr, states: &[&[S]], p: &[S]) -> ghlpc_core::Result<S> {
        use ghlpc_core::Error::Evaluation;
        Ok(match e {
            Expr::Num(v) => S::from_f64(*v),
            Expr::Const(i) => S::from_f64(self.constants[*i].1),
            Expr::Param(i) => p[*i].clone(),
            Expr::State { var, lag } => states[*lag][*var].clone(),
            Expr::Unary(op, a) => {
                let a = self.eval_expr(a, states, p)?;
                match op {
                    UnOp::Neg => -a,
                    UnOp::Exp => a.exp(),
                    UnOp::Log if a.base() <= 0.0 => return Err(Evaluation(format!("log of {}", a.base()))),
                    UnOp::Log => a.ln(),
                    UnOp::Sin => a.sin(),
                    UnOp::Cos => a.cos(),
                    UnOp::Tanh => a.tanh(),
                    UnOp::Sqrt if a.base() < 0.0 => return Err(Evaluation(format!("sqrt of {}", a.base()))),
                    UnOp::Sqrt => a.sqrt(),
                }
            }
            Expr::Binary(BinOp::Pow, a, b) => {
                let x = self.eval_expr(a, states, p)?;
                match self.const_value(b) {
                    Some(r) if r.fract() == 0.0 && r.abs() <= 64.0 => {
                        if r < 0.0 && x.base() == 0.0 {
                            return Err(Evaluation("zero raised to a negative power".into()));
                        }
                        x.powi(r as i32)
                    }
                    Some(r) => {
                        if x.base() <= 0.0 {
                            return Err(Evaluation(format!("{} raised to the power {r}", x.base())));
                        }
                        x.powf(r)
                    }
                    None => {
                        if x.base() <= 0.0 {
                            return Err(Evaluation(format!("{} raised to a variable power", x.base())));
                        }
                        (self.eval_expr(b, states, p)? * x.ln()).exp()
                    }
                }
            }
            Expr::Binary(op, a, b) => {
                let (a, b) = (self.eval_expr(a, states, p)?, self.eval_expr(b, states, p)?);
                match op {
                    BinOp::Add => a + b,
                    BinOp::Sub => a - b,
                    BinOp::Mul => a * b,
                    BinOp::Div if b.base() == 0.0 => return Err(Evaluation("division by zero".into())),
                    BinOp::Div => a / b,
                    BinOp::Pow => unreachable!(),
                }
            }
        })
    }
}

impl fmt::Display for ModelDef {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "state {}", self.states.join(" "))?;
        writeln!(f, "param {}", self.params.join(" "))?;
        for (n, v) in &self.constants {
            writeln!(f, "const {n} = {v:?}")?;
        }
        for (n, v) in &self.delay_names {
            writeln!(f, "delay {n} = {v:?}")?;
        }
        for (s, e) in self.states.iter().zip(&self.equations) {
            writeln!(f, "d{s} = {}", self.expr_to_string(e))?;
        }
        Ok(())
    }
}

fn apply_f64(op: UnOp, v: f64) -> f64 {
    match op {
        UnOp::Neg => -v,
        UnOp::Exp => v.exp(),
        UnOp::Log => v.ln(),
        UnOp::Sin => v.sin(),
        UnOp::Cos => v.cos(),
        UnOp::Tanh => v.tanh(),
        UnOp::Sqrt => v.sqrt(),
    }
}

impl VectorField for ModelDef {
    fn dim(&self) -> usize {
        self.states.len()
    }

    fn delays(&self) -> &[f64] {
        &self.delays
    }

    fn eval<S: Scalar>(&self, states: &[&[S]], params: &[S]) -> ghlpc_core::Result<Vec<S>> {
        if states.len() != self.delays.len() + 1 || states.iter().any(|s| s.len() != self.dim()) || params.len() != 2 {
            return Err(ghlpc_core::Error::Invalid("state or parameter vector has the wrong shape".into()));
        }
        self.equations.iter().map(|e| self.eval_expr(e, states, params)).collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn precedence_and_printing() {
        let m = parse_model("state x\nparam a b\ndx = -x^2 + a*(b - x)/2 - (x - 1)\n").unwrap();
        assert_eq!(m.expr_to_string(&m.equations[0]), "-x^2.0 + a*(b - x)/2.0 - (x - 1.0)");
        let v = m.eval::<f64>(&[&[3.0]], &[1.0, 2.0]).unwrap()[0];
        assert_eq!(v, -9.0 + 1.0 * (2.0 - 3.0) / 2.0 - 2.0);
        let m = parse_model("state x\nparam a b\ndx = (-x)^2 + 2^-1 + x^a^b").unwrap();
        assert_eq!(m.expr_to_string(&m.equations[0]), "(-x)^2.0 + 2.0^-1.0 + x^a^b");
    }

    #[test]
    fn delays_are_sorted_and_shared() {
        let src = "state x y\r\nparam a b\r\ndelay s = 2\r\ndelay r = 0.5\r\ndx = x(t - s) + y(t - r)\r\ndy = x(t-2) + y(t)\r\n";
        let m = parse_model(src).unwrap();
        assert_eq!(m.delays, vec![0.5, 2.0]);
        assert_eq!(m.equations[0], Expr::Binary(
            BinOp::Add,
            Box::new(Expr::State { var: 0, lag: 2 }),
            Box::new(Expr::State { var: 1, lag: 1 }),
        ));
        assert_eq!(m.expr_to_string(&m.equations[1]), "x(t - s) + y");
    }

    #[test]
    fn diagnostics() {
        let e = parse_model("state x\nparam a b\ndx = q * x").unwrap_err();
        assert_eq!(e, DslError::UnknownIdentifier { line: 3, col: 6, name: "q".into() });
        assert!(matches!(parse_model("state x\nparam a\ndx = a"), Err(DslError::ParamCount { found: 1 })));
        assert!(matches!(
            parse_model("state x\nparam a b\ndelay tau = -1\ndx = x(t - tau)"),
            Err(DslError::NonpositiveDelay { line: 3, col: 13, .. })
        ));
        assert!(matches!(parse_model("state x\nparam a b\ndx = (x + 1"), Err(DslError::Syntax { line: 3, col: 12, .. })));
        assert!(matches!(parse_model("state x\nparam a b\ndx = x $ 1"), Err(DslError::Syntax { line: 3, col: 8, .. })));
        assert!(matches!(parse_model("state x y\nparam a b\ndx = y"), Err(DslError::MissingEquation { .. })));
        assert!(matches!(parse_model("state x\nparam a x\ndx = a"), Err(DslError::Duplicate { .. })));
    }

    #[test]
    fn domain_errors() {
        let m = parse_model("state x\nparam a b\ndx = log(x) + a").unwrap();
        assert!(m.eval::<f64>(&[&[-1.0]], &[0.0, 0.0]).is_err());
        let m = parse_model("state x\nparam a b\ndx = 1/x").unwrap();
        assert!(m.eval::<f64>(&[&[0.0]], &[0.0, 0.0]).is_err());
    }
}
