//! A small arithmetic language for boundary and initial data.
//!
//! ```text
//! expr    := term (('+' | '-') term)*
//! term    := unary (('*' | '/') unary)*
//! unary   := ('-' | '+') unary | power
//! power   := atom ('^' unary)?          right-associative, binds tighter than unary minus on its left
//! atom    := number | name | name '(' expr (',' expr)* ')' | '(' expr ')'
//! ```
//!
//! Variables are `t`, `x`, `y`, `z`, the constants `pi` and `e`, and any named
//! parameter supplied by the configuration. Functions: `sin cos tan asin acos
//! atan sinh cosh tanh exp log sqrt abs sign floor` (one argument), `atan2 min max
//! pow` (two arguments).

use std::collections::BTreeMap;
use std::fmt;
use std::sync::Arc;

use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
#[error("{message} at column {column} of `{source_text}`")]
pub struct ParseError {
    pub message: String,
    pub column: usize,
    pub source_text: String,
}

#[derive(Clone, Debug)]
enum Node {
    Num(f64),
    Var(usize),
    Neg(Box<Node>),
    Bin(char, Box<Node>, Box<Node>),
    Call1(fn(f64) -> f64, Box<Node>),
    Call2(fn(f64, f64) -> f64, Box<Node>, Box<Node>),
}

impl Node {
    fn eval(&self, v: &[f64; 4]) -> f64 {
        match self {
            Node::Num(c) => *c,
            Node::Var(i) => v[*i],
            Node::Neg(a) => -a.eval(v),
            Node::Bin(op, a, b) => {
                let (a, b) = (a.eval(v), b.eval(v));
                match op {
                    '+' => a + b,
                    '-' => a - b,
                    '*' => a * b,
                    '/' => a / b,
                    _ => pow(a, b),
                }
            }
            Node::Call1(f, a) => f(a.eval(v)),
            Node::Call2(f, a, b) => f(a.eval(v), b.eval(v)),
        }
    }

    fn uses(&self, var: usize) -> bool {
        match self {
            Node::Num(_) => false,
            Node::Var(i) => *i == var,
            Node::Neg(a) | Node::Call1(_, a) => a.uses(var),
            Node::Bin(_, a, b) | Node::Call2(_, a, b) => a.uses(var) || b.uses(var),
        }
    }
}

/// Integer exponents go through `powi` so that `x^2` is exactly `x*x`.
fn pow(a: f64, b: f64) -> f64 {
    if b.fract() == 0.0 && b.abs() <= 64.0 {
        a.powi(b as i32)
    } else {
        a.powf(b)
    }
}

/// A parsed expression in `(t, x, y, z)`.
#[derive(Clone)]
pub struct Expr {
    root: Arc<Node>,
    text: String,
}

impl fmt::Debug for Expr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Expr({})", self.text)
    }
}

impl PartialEq for Expr {
    fn eq(&self, other: &Self) -> bool {
        self.text == other.text
    }
}

impl Expr {
    pub fn parse(text: &str, params: &BTreeMap<String, f64>) -> Result<Expr, ParseError> {
        let mut p = Parser { src: text, chars: text.char_indices().collect(), pos: 0, params };
        let root = p.expr()?;
        p.skip_ws();
        if p.pos < p.chars.len() {
            return Err(p.error("unexpected trailing input"));
        }
        Ok(Expr { root: Arc::new(root), text: text.to_string() })
    }

    #[inline]
    pub fn eval(&self, t: f64, x: [f64; 3]) -> f64 {
        self.root.eval(&[t, x[0], x[1], x[2]])
    }

    pub fn depends_on_time(&self) -> bool {
        self.root.uses(0)
    }

    pub fn text(&self) -> &str {
        &self.text
    }
}

struct Parser<'a> {
    src: &'a str,
    chars: Vec<(usize, char)>,
    pos: usize,
    params: &'a BTreeMap<String, f64>,
}

impl Parser<'_> {
    fn error(&self, message: &str) -> ParseError {
        ParseError { message: message.to_string(), column: self.pos + 1, source_text: self.src.to_string() }
    }

    fn peek(&self) -> Option<char> {
        self.chars.get(self.pos).map(|c| c.1)
    }

    fn skip_ws(&mut self) {
        while self.peek().is_some_and(char::is_whitespace) {
            self.pos += 1;
        }
    }

    fn eat(&mut self, c: char) -> bool {
        self.skip_ws();
        if self.peek() == Some(c) {
            self.pos += 1;
            true
        } else {
            false
        }
    }

    fn expr(&mut self) -> Result<Node, ParseError> {
        let mut lhs = self.term()?;
        loop {
            if self.eat('+') {
                lhs = Node::Bin('+', Box::new(lhs), Box::new(self.term()?));
            } else if self.eat('-') {
                lhs = Node::Bin('-', Box::new(lhs), Box::new(self.term()?));
            } else {
                return Ok(lhs);
            }
        }
    }

    fn term(&mut self) -> Result<Node, ParseError> {
        let mut lhs = self.unary()?;
        loop {
            if self.eat('*') {
                lhs = Node::Bin('*', Box::new(lhs), Box::new(self.unary()?));
            } else if self.eat('/') {
                lhs = Node::Bin('/', Box::new(lhs), Box::new(self.unary()?));
            } else {
                return Ok(lhs);
            }
        }
    }

    fn unary(&mut self) -> Result<Node, ParseError> {
        if self.eat('-') {
            return Ok(Node::Neg(Box::new(self.unary()?)));
        }
        if self.eat('+') {
            return self.unary();
        }
        let base = self.atom()?;
        if self.eat('^') {
            return Ok(Node::Bin('^', Box::new(base), Box::new(self.unary()?)));
        }
        Ok(base)
    }

    fn atom(&mut self) -> Result<Node, ParseError> {
        self.skip_ws();
        let start = self.pos;
        match self.peek() {
            None => Err(self.error("unexpected end of expression")),
            Some('(') => {
                self.pos += 1;
                let e = self.expr()?;
                if !self.eat(')') {
                    return Err(self.error("expected `)`"));
                }
                Ok(e)
            }
            Some(c) if c.is_ascii_digit() || c == '.' => {
                while self.peek().is_some_and(|c| c.is_ascii_digit() || c == '.') {
                    self.pos += 1;
                }
                if matches!(self.peek(), Some('e' | 'E')) {
                    let save = self.pos;
                    self.pos += 1;
                    if matches!(self.peek(), Some('+' | '-')) {
                        self.pos += 1;
                    }
                    if self.peek().is_some_and(|c| c.is_ascii_digit()) {
                        while self.peek().is_some_and(|c| c.is_ascii_digit()) {
                            self.pos += 1;
                        }
                    } else {
                        self.pos = save;
                    }
                }
                let text = self.slice(start).to_string();
                text.parse::<f64>().map(Node::Num).map_err(|_| {
                    self.pos = start;
                    self.error("malformed number")
                })
            }
            Some(c) if c.is_alphabetic() || c == '_' => {
                while self.peek().is_some_and(|c| c.is_alphanumeric() || c == '_') {
                    self.pos += 1;
                }
                let name = self.slice(start).to_string();
                if self.eat('(') {
                    return self.call(&name, start);
                }
                match name.as_str() {
                    "t" => Ok(Node::Var(0)),
                    "x" => Ok(Node::Var(1)),
                    "y" => Ok(Node::Var(2)),
                    "z" => Ok(Node::Var(3)),
                    "pi" => Ok(Node::Num(std::f64::consts::PI)),
                    "e" => Ok(Node::Num(std::f64::consts::E)),
                    _ => match self.params.get(&name) {
                        Some(v) => Ok(Node::Num(*v)),
                        None => {
                            self.pos = start;
                            Err(self.error(&format!("unknown name `{name}`")))
                        }
                    },
                }
            }
            Some(c) => Err(self.error(&format!("unexpected character `{c}`"))),
        }
    }

    fn slice(&self, start: usize) -> &str {
        let b = self.chars[start].0;
        let e = self.chars.get(self.pos).map_or(self.src.len(), |c| c.0);
        &self.src[b..e]
    }

    fn call(&mut self, name: &str, start: usize) -> Result<Node, ParseError> {
        let mut args = vec![self.expr()?];
        while self.eat(',') {
            args.push(self.expr()?);
        }
        if !self.eat(')') {
            return Err(self.error("expected `)` after arguments"));
        }
        let one: Option<fn(f64) -> f64> = match name {
            "sin" => Some(f64::sin),
            "cos" => Some(f64::cos),
            "tan" => Some(f64::tan),
            "asin" => Some(f64::asin),
            "acos" => Some(f64::acos),
            "atan" => Some(f64::atan),
            "sinh" => Some(f64::sinh),
            "cosh" => Some(f64::cosh),
            "tanh" => Some(f64::tanh),
            "exp" => Some(f64::exp),
            "log" => Some(f64::ln),
            "sqrt" => Some(f64::sqrt),
            "abs" => Some(f64::abs),
            "sign" => Some(|v: f64| if v > 0.0 { 1.0 } else if v < 0.0 { -1.0 } else { 0.0 }),
            "floor" => Some(f64::floor),
            _ => None,
        };
        let two: Option<fn(f64, f64) -> f64> = match name {
            "atan2" => Some(f64::atan2),
            "min" => Some(f64::min),
            "max" => Some(f64::max),
            "pow" => Some(pow),
            _ => None,
        };
        let arity_error = |p: &mut Self, want: usize| {
            p.pos = start;
            Err(p.error(&format!("`{name}` takes {want} argument(s), got {}", args.len())))
        };
        match (one, two) {
            (Some(f), _) => {
                if args.len() != 1 {
                    return arity_error(self, 1);
                }
                Ok(Node::Call1(f, Box::new(args.pop().expect("one argument"))))
            }
            (_, Some(f)) => {
                if args.len() != 2 {
                    return arity_error(self, 2);
                }
                let b = args.pop().expect("two arguments");
                let a = args.pop().expect("two arguments");
                Ok(Node::Call2(f, Box::new(a), Box::new(b)))
            }
            _ => {
                self.pos = start;
                Err(self.error(&format!("unknown function `{name}`")))
            }
        }
    }
}
