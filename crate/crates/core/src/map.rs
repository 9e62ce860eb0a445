//! Lipschitz maps on a stratified complex.
//!
//! Two representations: piecewise-linear by vertex values (continuous across
//! shared faces by construction, with exact per-simplex differentials) and
//! per-stratum closed-form expressions over
//! `{+, -, *, /, min, max, abs, sqrt, constants, coordinates}` (continuity
//! across the frontier validated at sampled interface points; differentials
//! estimated by tangent-frame finite differences).

use std::collections::BTreeMap;

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::complex::StratifiedComplex;
use crate::error::{Error, Result};

// ---------------------------------------------------------------------------
// expressions
// ---------------------------------------------------------------------------

/// A closed-form scalar expression in the ambient coordinates.
#[derive(Debug, Clone)]
pub enum Expression {
    Const(f64),
    Coord(usize),
    Add(Box<Expression>, Box<Expression>),
    Sub(Box<Expression>, Box<Expression>),
    Mul(Box<Expression>, Box<Expression>),
    Div(Box<Expression>, Box<Expression>),
    Min(Box<Expression>, Box<Expression>),
    Max(Box<Expression>, Box<Expression>),
    Abs(Box<Expression>),
    Sqrt(Box<Expression>),
    Neg(Box<Expression>),
}

impl Expression {
    pub fn eval(&self, x: &DVector<f64>) -> f64 {
        match self {
            Expression::Const(c) => *c,
            Expression::Coord(i) => x[*i],
            Expression::Add(a, b) => a.eval(x) + b.eval(x),
            Expression::Sub(a, b) => a.eval(x) - b.eval(x),
            Expression::Mul(a, b) => a.eval(x) * b.eval(x),
            Expression::Div(a, b) => a.eval(x) / b.eval(x),
            Expression::Min(a, b) => a.eval(x).min(b.eval(x)),
            Expression::Max(a, b) => a.eval(x).max(b.eval(x)),
            Expression::Abs(a) => a.eval(x).abs(),
            Expression::Sqrt(a) => a.eval(x).sqrt(),
            Expression::Neg(a) => -a.eval(x),
        }
    }

    pub fn parse(text: &str, ambient_dim: usize) -> Result<Self> {
        let tokens = tokenize(text)?;
        let mut parser = Parser {
            tokens,
            pos: 0,
            ambient_dim,
        };
        let expr = parser.expression()?;
        if parser.pos != parser.tokens.len() {
            return Err(Error::ExpressionParse(format!(
                "trailing input at token {}",
                parser.pos
            )));
        }
        Ok(expr)
    }

    /// Euclidean distance to a finite point set, as an expression tree.
    pub fn distance_to_points(points: &[DVector<f64>]) -> Expression {
        let dist_one = |p: &DVector<f64>| {
            let mut sum: Option<Expression> = None;
            for (i, &c) in p.iter().enumerate() {
                let diff = Expression::Sub(
                    Box::new(Expression::Coord(i)),
                    Box::new(Expression::Const(c)),
                );
                let sq = Expression::Mul(Box::new(diff.clone()), Box::new(diff));
                sum = Some(match sum {
                    None => sq,
                    Some(s) => Expression::Add(Box::new(s), Box::new(sq)),
                });
            }
            Expression::Sqrt(Box::new(sum.expect("points have coordinates")))
        };
        let mut out: Option<Expression> = None;
        for p in points {
            let d = dist_one(p);
            out = Some(match out {
                None => d,
                Some(m) => Expression::Min(Box::new(m), Box::new(d)),
            });
        }
        out.expect("point set is nonempty")
    }
}

#[derive(Debug, Clone, PartialEq)]
enum Token {
    Number(f64),
    Ident(String),
    Plus,
    Minus,
    Star,
    Slash,
    LParen,
    RParen,
    Comma,
}

fn tokenize(text: &str) -> Result<Vec<Token>> {
    let mut tokens = Vec::new();
    let chars: Vec<char> = text.chars().collect();
    let mut i = 0;
    while i < chars.len() {
        let c = chars[i];
        match c {
            ' ' | '\t' | '\n' | '\r' => i += 1,
            '+' => {
                tokens.push(Token::Plus);
                i += 1;
            }
            '-' => {
                tokens.push(Token::Minus);
                i += 1;
            }
            '*' => {
                tokens.push(Token::Star);
                i += 1;
            }
            '/' => {
                tokens.push(Token::Slash);
                i += 1;
            }
            '(' => {
                tokens.push(Token::LParen);
                i += 1;
            }
            ')' => {
                tokens.push(Token::RParen);
                i += 1;
            }
            ',' => {
                tokens.push(Token::Comma);
                i += 1;
            }
            '0'..='9' | '.' => {
                let start = i;
                while i < chars.len()
                    && (chars[i].is_ascii_digit()
                        || chars[i] == '.'
                        || chars[i] == 'e'
                        || chars[i] == 'E'
                        || ((chars[i] == '+' || chars[i] == '-')
                            && i > start
                            && (chars[i - 1] == 'e' || chars[i - 1] == 'E')))
                {
                    i += 1;
                }
                let lit: String = chars[start..i].iter().collect();
                let value = lit
                    .parse::<f64>()
                    .map_err(|_| Error::ExpressionParse(format!("bad number literal '{lit}'")))?;
                tokens.push(Token::Number(value));
            }
            c if c.is_ascii_alphabetic() || c == '_' => {
                let start = i;
                while i < chars.len() && (chars[i].is_ascii_alphanumeric() || chars[i] == '_') {
                    i += 1;
                }
                tokens.push(Token::Ident(chars[start..i].iter().collect()));
            }
            other => {
                return Err(Error::ExpressionParse(format!(
                    "unexpected character '{other}'"
                )))
            }
        }
    }
    Ok(tokens)
}

struct Parser {
    tokens: Vec<Token>,
    pos: usize,
    ambient_dim: usize,
}

impl Parser {
    fn peek(&self) -> Option<&Token> {
        self.tokens.get(self.pos)
    }

    fn advance(&mut self) -> Option<Token> {
        let t = self.tokens.get(self.pos).cloned();
        if t.is_some() {
            self.pos += 1;
        }
        t
    }

    fn expect(&mut self, token: Token) -> Result<()> {
        match self.advance() {
            Some(t) if t == token => Ok(()),
            other => Err(Error::ExpressionParse(format!(
                "expected {token:?}, found {other:?}"
            ))),
        }
    }

    fn expression(&mut self) -> Result<Expression> {
        let mut lhs = self.term()?;
        loop {
            match self.peek() {
                Some(Token::Plus) => {
                    self.advance();
                    let rhs = self.term()?;
                    lhs = Expression::Add(Box::new(lhs), Box::new(rhs));
                }
                Some(Token::Minus) => {
                    self.advance();
                    let rhs = self.term()?;
                    lhs = Expression::Sub(Box::new(lhs), Box::new(rhs));
                }
                _ => return Ok(lhs),
            }
        }
    }

    fn term(&mut self) -> Result<Expression> {
        let mut lhs = self.factor()?;
        loop {
            match self.peek() {
                Some(Token::Star) => {
                    self.advance();
                    let rhs = self.factor()?;
                    lhs = Expression::Mul(Box::new(lhs), Box::new(rhs));
                }
                Some(Token::Slash) => {
                    self.advance();
                    let rhs = self.factor()?;
                    lhs = Expression::Div(Box::new(lhs), Box::new(rhs));
                }
                _ => return Ok(lhs),
            }
        }
    }

    fn factor(&mut self) -> Result<Expression> {
        if matches!(self.peek(), Some(Token::Minus)) {
            self.advance();
            let inner = self.factor()?;
            return Ok(Expression::Neg(Box::new(inner)));
        }
        self.primary()
    }

    fn primary(&mut self) -> Result<Expression> {
        match self.advance() {
            Some(Token::Number(v)) => Ok(Expression::Const(v)),
            Some(Token::LParen) => {
                let e = self.expression()?;
                self.expect(Token::RParen)?;
                Ok(e)
            }
            Some(Token::Ident(name)) => self.ident(name),
            other => Err(Error::ExpressionParse(format!(
                "expected a value, found {other:?}"
            ))),
        }
    }

    fn ident(&mut self, name: String) -> Result<Expression> {
        match name.as_str() {
            "min" | "max" => {
                self.expect(Token::LParen)?;
                let a = self.expression()?;
                self.expect(Token::Comma)?;
                let b = self.expression()?;
                self.expect(Token::RParen)?;
                Ok(if name == "min" {
                    Expression::Min(Box::new(a), Box::new(b))
                } else {
                    Expression::Max(Box::new(a), Box::new(b))
                })
            }
            "abs" | "sqrt" => {
                self.expect(Token::LParen)?;
                let a = self.expression()?;
                self.expect(Token::RParen)?;
                Ok(if name == "abs" {
                    Expression::Abs(Box::new(a))
                } else {
                    Expression::Sqrt(Box::new(a))
                })
            }
            _ => {
                let idx = match name.as_str() {
                    "x" => Some(0),
                    "y" => Some(1),
                    "z" => Some(2),
                    _ => name
                        .strip_prefix('x')
                        .and_then(|rest| rest.parse::<usize>().ok()),
                };
                match idx {
                    Some(i) if i < self.ambient_dim => Ok(Expression::Coord(i)),
                    Some(i) => Err(Error::ExpressionParse(format!(
                        "coordinate x{i} out of range for ambient dimension {}",
                        self.ambient_dim
                    ))),
                    None => Err(Error::ExpressionParse(format!("unknown identifier '{name}'"))),
                }
            }
        }
    }
}

// ---------------------------------------------------------------------------
// maps
// ---------------------------------------------------------------------------

/// JSON input schema for maps.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(tag = "representation", rename_all = "lowercase", deny_unknown_fields)]
pub enum MapDocument {
    Pl { values: Vec<Vec<f64>> },
    Expr { per_stratum: BTreeMap<String, String> },
}

impl MapDocument {
    pub fn from_json(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| Error::Map(e.to_string()))
    }
}

#[derive(Debug, Clone)]
enum Representation {
    /// One value vector per complex vertex; affine on each simplex.
    Pl(Vec<DVector<f64>>),
    /// One scalar expression per stratum, indexed like the strata.
    Expr(Vec<Expression>),
}

/// A Lipschitz map on a complex.
#[derive(Debug, Clone)]
pub struct DefinableMap {
    codomain_dim: usize,
    repr: Representation,
    /// Per-simplex differential in the orthonormal tangent frame (PL only).
    pl_differentials: Vec<DMatrix<f64>>,
    /// Per-simplex operator norms of the differentials (PL only).
    pl_norms: Vec<f64>,
}

impl DefinableMap {
    /// PL map from per-vertex values.
    pub fn from_vertex_values(
        complex: &StratifiedComplex,
        values: Vec<Vec<f64>>,
    ) -> Result<Self> {
        if values.len() != complex.points().len() {
            return Err(Error::Map(format!(
                "expected one value per vertex ({}), got {}",
                complex.points().len(),
                values.len()
            )));
        }
        let codomain_dim = values.first().map_or(0, Vec::len);
        if codomain_dim == 0 {
            return Err(Error::Map("codomain dimension must be positive".into()));
        }
        let mut vectors = Vec::with_capacity(values.len());
        for (i, v) in values.iter().enumerate() {
            if v.len() != codomain_dim {
                return Err(Error::Map(format!(
                    "vertex {i} has {} components, expected {codomain_dim}",
                    v.len()
                )));
            }
            if v.iter().any(|c| !c.is_finite()) {
                return Err(Error::Map(format!("vertex {i} has a non-finite value")));
            }
            vectors.push(DVector::from_vec(v.clone()));
        }
        let mut pl_differentials = Vec::with_capacity(complex.simplices().len());
        let mut pl_norms = Vec::with_capacity(complex.simplices().len());
        for (idx, verts) in complex.simplices().iter().enumerate() {
            let frame = complex.frame(idx);
            let k = frame.dim();
            let d = if k == 0 {
                DMatrix::zeros(codomain_dim, 0)
            } else {
                // solve D (U^T E) = F for the frame-coordinate differential
                let e = DMatrix::from_columns(
                    &verts[1..]
                        .iter()
                        .map(|&v| &complex.points()[v] - &complex.points()[verts[0]])
                        .collect::<Vec<_>>(),
                );
                let b = frame.tangent.transpose() * e;
                let f = DMatrix::from_columns(
                    &verts[1..]
                        .iter()
                        .map(|&v| &vectors[v] - &vectors[verts[0]])
                        .collect::<Vec<_>>(),
                );
                let b_inv = b
                    .try_inverse()
                    .ok_or_else(|| Error::Map(format!("simplex {idx} frame is singular")))?;
                f * b_inv
            };
            let norm = operator_norm(&d);
            pl_differentials.push(d);
            pl_norms.push(norm);
        }
        Ok(Self {
            codomain_dim,
            repr: Representation::Pl(vectors),
            pl_differentials,
            pl_norms,
        })
    }

    /// Scalar map from per-stratum expressions; continuity across the
    /// frontier is validated at sampled interface points.
    pub fn from_expressions(
        complex: &StratifiedComplex,
        per_stratum: &BTreeMap<String, String>,
    ) -> Result<Self> {
        let mut exprs: Vec<Option<Expression>> = vec![None; complex.strata().len()];
        for (id, text) in per_stratum {
            let s = complex
                .stratum_index(id)
                .ok_or_else(|| Error::Map(format!("expression for unknown stratum '{id}'")))?;
            exprs[s] = Some(Expression::parse(text, complex.ambient_dim())?);
        }
        let exprs: Vec<Expression> = exprs
            .into_iter()
            .enumerate()
            .map(|(s, e)| {
                e.ok_or_else(|| {
                    Error::Map(format!(
                        "stratum '{}' has no expression",
                        complex.stratum(s).id
                    ))
                })
            })
            .collect::<Result<_>>()?;
        let map = Self {
            codomain_dim: 1,
            repr: Representation::Expr(exprs),
            pl_differentials: Vec::new(),
            pl_norms: Vec::new(),
        };
        map.check_interface_continuity(complex)?;
        Ok(map)
    }

    pub fn load(complex: &StratifiedComplex, doc: &MapDocument) -> Result<Self> {
        match doc {
            MapDocument::Pl { values } => Self::from_vertex_values(complex, values.clone()),
            MapDocument::Expr { per_stratum } => Self::from_expressions(complex, per_stratum),
        }
    }

    /// Interface continuity of expression maps: on each frontier pair the
    /// upper stratum's expression must agree with the lower one's on the
    /// lower stratum.
    fn check_interface_continuity(&self, complex: &StratifiedComplex) -> Result<()> {
        let Representation::Expr(exprs) = &self.repr else {
            return Ok(());
        };
        let tol = complex.tolerances().map_continuity;
        for &(u, l) in complex.frontier() {
            for &m in &complex.stratum(l).simplices {
                let frame = complex.frame(m);
                for lambda in crate::complex::barycentric_grid(frame.dim(), 4) {
                    let p = frame.point_at(&lambda);
                    let upper = exprs[u].eval(&p);
                    let lower = exprs[l].eval(&p);
                    if (upper - lower).abs() > tol {
                        return Err(Error::Map(format!(
                            "expressions of '{}' and '{}' differ by {:.3e} at an interface point",
                            complex.stratum(u).id,
                            complex.stratum(l).id,
                            (upper - lower).abs()
                        )));
                    }
                }
            }
        }
        Ok(())
    }

    pub fn codomain_dim(&self) -> usize {
        self.codomain_dim
    }

    pub fn is_pl(&self) -> bool {
        matches!(self.repr, Representation::Pl(_))
    }

    /// Value at a point of the complex.
    pub fn eval(&self, complex: &StratifiedComplex, x: &DVector<f64>) -> Result<DVector<f64>> {
        match &self.repr {
            Representation::Pl(values) => {
                let tol = complex.tolerances().on_complex;
                for (idx, verts) in complex.simplices().iter().enumerate() {
                    let frame = complex.frame(idx);
                    let (lambda, residual) = frame.barycentric(x);
                    if residual <= tol && lambda.iter().all(|&l| l >= -tol) {
                        let mut out = DVector::zeros(self.codomain_dim);
                        for (&v, &l) in verts.iter().zip(lambda.iter()) {
                            out += &values[v] * l;
                        }
                        return Ok(out);
                    }
                }
                Err(Error::OffComplex {
                    dist: nearest_distance(complex, x),
                })
            }
            Representation::Expr(exprs) => {
                let s = complex.stratum_of(x).ok_or(Error::OffComplex {
                    dist: nearest_distance(complex, x),
                })?;
                Ok(DVector::from_vec(vec![exprs[s].eval(x)]))
            }
        }
    }

    /// Differential in the orthonormal tangent frame of a simplex: exact for
    /// PL maps, a central finite difference (an estimate) for expression
    /// maps.
    pub fn tangential_differential(
        &self,
        complex: &StratifiedComplex,
        simplex: usize,
        x: &DVector<f64>,
    ) -> Result<DMatrix<f64>> {
        match &self.repr {
            Representation::Pl(_) => Ok(self.pl_differentials[simplex].clone()),
            Representation::Expr(exprs) => {
                let frame = complex.frame(simplex);
                let s = complex.simplex_stratum(simplex);
                let k = frame.dim();
                let mut d = DMatrix::zeros(1, k);
                let h = 1e-6 * frame.diameter.max(1.0);
                for j in 0..k {
                    let dir: DVector<f64> = frame.tangent.column(j).into();
                    let hi = x + &dir * h;
                    let lo = x - &dir * h;
                    d[(0, j)] = (exprs[s].eval(&hi) - exprs[s].eval(&lo)) / (2.0 * h);
                }
                Ok(d)
            }
        }
    }

    /// Differential as a map on ambient vectors (kills normal directions).
    pub fn ambient_differential(
        &self,
        complex: &StratifiedComplex,
        simplex: usize,
        x: &DVector<f64>,
    ) -> Result<DMatrix<f64>> {
        let d = self.tangential_differential(complex, simplex, x)?;
        Ok(d * complex.frame(simplex).tangent.transpose())
    }

    /// Operator norm of the differential on a simplex (PL maps: exact and
    /// constant per simplex).
    pub fn simplex_gradient_norm(
        &self,
        complex: &StratifiedComplex,
        simplex: usize,
        x: &DVector<f64>,
    ) -> Result<f64> {
        match &self.repr {
            Representation::Pl(_) => Ok(self.pl_norms[simplex]),
            Representation::Expr(_) => {
                let d = self.tangential_differential(complex, simplex, x)?;
                Ok(operator_norm(&d))
            }
        }
    }
}

fn nearest_distance(complex: &StratifiedComplex, x: &DVector<f64>) -> f64 {
    (0..complex.strata().len())
        .map(|s| complex.closure_distance(s, x))
        .fold(f64::INFINITY, f64::min)
}

pub(crate) fn operator_norm(m: &DMatrix<f64>) -> f64 {
    if m.ncols() == 0 || m.nrows() == 0 {
        return 0.0;
    }
    m.clone()
        .svd(false, false)
        .singular_values
        .iter()
        .cloned()
        .fold(0.0, f64::max)
}
