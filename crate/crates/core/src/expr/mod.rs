//! Closed-form scalar expressions in named coordinates.
//!
//! Expressions are parsed from text, evaluated in IEEE double precision and
//! differentiated symbolically. Every partial derivative used elsewhere in the
//! crate comes from [`Expression::diff`]; there are no finite differences.
//!
//! Grammar (whitespace insignificant):
//!
//! ```text
//! expr   := term (("+" | "-") term)*
//! term   := unary (("*" | "/") unary)*
//! unary  := ("-" | "+") unary | power
//! power  := atom ("^" unary)?
//! atom   := number | "pi" | variable | func "(" expr ")" | "(" expr ")"
//! func   := sin | cos | tan | exp | log | sqrt | sinh | cosh | tanh
//! number := digits ["." digits] [("e" | "E") ["+" | "-"] digits]
//! ```
//!
//! `^` binds tighter than unary minus (`-x^2 = -(x^2)`) and is right
//! associative; the other binary operators are left associative.

mod diff;
mod display;
mod parse;

use std::fmt;
use std::ops;
use std::sync::Arc;

use crate::error::{Error, Result};

pub use parse::is_reserved;

/// Elementary functions of one argument.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Func {
    Sin,
    Cos,
    Tan,
    Exp,
    Log,
    Sqrt,
    Sinh,
    Cosh,
    Tanh,
}

impl Func {
    pub const ALL: [Func; 9] = [
        Func::Sin,
        Func::Cos,
        Func::Tan,
        Func::Exp,
        Func::Log,
        Func::Sqrt,
        Func::Sinh,
        Func::Cosh,
        Func::Tanh,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Func::Sin => "sin",
            Func::Cos => "cos",
            Func::Tan => "tan",
            Func::Exp => "exp",
            Func::Log => "log",
            Func::Sqrt => "sqrt",
            Func::Sinh => "sinh",
            Func::Cosh => "cosh",
            Func::Tanh => "tanh",
        }
    }

    pub fn from_name(name: &str) -> Option<Func> {
        Func::ALL.into_iter().find(|f| f.name() == name)
    }
}

/// Expression tree node. Variables are indices into the owning
/// [`Expression`]'s variable list.
#[derive(Debug, Clone, PartialEq)]
pub enum Node {
    Const(f64),
    Var(usize),
    Neg(Arc<Node>),
    Add(Arc<Node>, Arc<Node>),
    Sub(Arc<Node>, Arc<Node>),
    Mul(Arc<Node>, Arc<Node>),
    Div(Arc<Node>, Arc<Node>),
    Pow(Arc<Node>, Arc<Node>),
    Call(Func, Arc<Node>),
}

impl Node {
    fn max_var(&self) -> Option<usize> {
        match self {
            Node::Const(_) => None,
            Node::Var(i) => Some(*i),
            Node::Neg(a) | Node::Call(_, a) => a.max_var(),
            Node::Add(a, b)
            | Node::Sub(a, b)
            | Node::Mul(a, b)
            | Node::Div(a, b)
            | Node::Pow(a, b) => match (a.max_var(), b.max_var()) {
                (Some(x), Some(y)) => Some(x.max(y)),
                (x, y) => x.or(y),
            },
        }
    }

    fn depends_on(&self, var: usize) -> bool {
        match self {
            Node::Const(_) => false,
            Node::Var(i) => *i == var,
            Node::Neg(a) | Node::Call(_, a) => a.depends_on(var),
            Node::Add(a, b)
            | Node::Sub(a, b)
            | Node::Mul(a, b)
            | Node::Div(a, b)
            | Node::Pow(a, b) => a.depends_on(var) || b.depends_on(var),
        }
    }

    fn remap(&self, map: &[usize]) -> Node {
        let r = |n: &Arc<Node>| Arc::new(n.remap(map));
        match self {
            Node::Const(c) => Node::Const(*c),
            Node::Var(i) => Node::Var(map[*i]),
            Node::Neg(a) => Node::Neg(r(a)),
            Node::Call(f, a) => Node::Call(*f, r(a)),
            Node::Add(a, b) => Node::Add(r(a), r(b)),
            Node::Sub(a, b) => Node::Sub(r(a), r(b)),
            Node::Mul(a, b) => Node::Mul(r(a), r(b)),
            Node::Div(a, b) => Node::Div(r(a), r(b)),
            Node::Pow(a, b) => Node::Pow(r(a), r(b)),
        }
    }

    /// Number of nodes in the tree.
    pub fn size(&self) -> usize {
        match self {
            Node::Const(_) | Node::Var(_) => 1,
            Node::Neg(a) | Node::Call(_, a) => 1 + a.size(),
            Node::Add(a, b)
            | Node::Sub(a, b)
            | Node::Mul(a, b)
            | Node::Div(a, b)
            | Node::Pow(a, b) => 1 + a.size() + b.size(),
        }
    }

    pub(crate) fn eval(&self, x: &[f64], vars: &[String]) -> Result<f64> {
        let domain = |node: &Node, message: &str| Error::Domain {
            subterm: display::render(node, vars),
            message: message.to_string(),
        };
        Ok(match self {
            Node::Const(c) => *c,
            Node::Var(i) => x[*i],
            Node::Neg(a) => -a.eval(x, vars)?,
            Node::Add(a, b) => a.eval(x, vars)? + b.eval(x, vars)?,
            Node::Sub(a, b) => a.eval(x, vars)? - b.eval(x, vars)?,
            Node::Mul(a, b) => a.eval(x, vars)? * b.eval(x, vars)?,
            Node::Div(a, b) => {
                let num = a.eval(x, vars)?;
                let den = b.eval(x, vars)?;
                if den == 0.0 {
                    return Err(domain(self, "division by zero"));
                }
                num / den
            }
            Node::Pow(a, b) => {
                let base = a.eval(x, vars)?;
                let exp = b.eval(x, vars)?;
                pow_checked(base, exp).ok_or_else(|| {
                    domain(
                        self,
                        if base == 0.0 {
                            "zero raised to a negative power"
                        } else {
                            "negative base with non-integer exponent"
                        },
                    )
                })?
            }
            Node::Call(f, a) => {
                let v = a.eval(x, vars)?;
                match f {
                    Func::Sin => v.sin(),
                    Func::Cos => v.cos(),
                    Func::Tan => v.tan(),
                    Func::Exp => v.exp(),
                    Func::Log => {
                        if v <= 0.0 {
                            return Err(domain(self, "logarithm of a non-positive number"));
                        }
                        v.ln()
                    }
                    Func::Sqrt => {
                        if v < 0.0 {
                            return Err(domain(self, "square root of a negative number"));
                        }
                        v.sqrt()
                    }
                    Func::Sinh => v.sinh(),
                    Func::Cosh => v.cosh(),
                    Func::Tanh => v.tanh(),
                }
            }
        })
    }
}

pub(crate) fn pow_checked(base: f64, exp: f64) -> Option<f64> {
    if base == 0.0 && exp < 0.0 {
        return None;
    }
    if exp.fract() == 0.0 && exp.abs() <= i32::MAX as f64 {
        return Some(base.powi(exp as i32));
    }
    if base < 0.0 {
        return None;
    }
    Some(base.powf(exp))
}

/// A parsed scalar expression over an ordered list of coordinate names.
#[derive(Debug, Clone, PartialEq)]
pub struct Expression {
    node: Arc<Node>,
    vars: Arc<[String]>,
}

impl Expression {
    /// Parses `source` over the given variables.
    pub fn parse<S: AsRef<str>>(source: &str, variables: &[S]) -> Result<Expression> {
        let vars = validate_variables(variables)?;
        let node = parse::parse(source, &vars)?;
        Ok(Expression {
            node: Arc::new(node),
            vars,
        })
    }

    /// Parses against an already validated shared variable list.
    pub fn parse_shared(source: &str, vars: &Arc<[String]>) -> Result<Expression> {
        let node = parse::parse(source, vars)?;
        Ok(Expression {
            node: Arc::new(node),
            vars: vars.clone(),
        })
    }

    /// Builds an expression from a raw tree; fails if a variable index is out of range.
    pub fn from_node(node: Node, vars: Arc<[String]>) -> Result<Expression> {
        if let Some(i) = node.max_var() {
            if i >= vars.len() {
                return Err(Error::Invalid(format!(
                    "variable index {i} out of range for {} variables",
                    vars.len()
                )));
            }
        }
        Ok(Expression {
            node: Arc::new(node),
            vars,
        })
    }

    pub fn constant(value: f64, vars: &Arc<[String]>) -> Expression {
        Expression {
            node: Arc::new(Node::Const(value)),
            vars: vars.clone(),
        }
    }

    pub fn variable(index: usize, vars: &Arc<[String]>) -> Expression {
        assert!(index < vars.len(), "variable index out of range");
        Expression {
            node: Arc::new(Node::Var(index)),
            vars: vars.clone(),
        }
    }

    pub fn node(&self) -> &Node {
        &self.node
    }

    pub fn variables(&self) -> &[String] {
        &self.vars
    }

    pub fn shared_variables(&self) -> &Arc<[String]> {
        &self.vars
    }

    pub fn var_index(&self, name: &str) -> Option<usize> {
        self.vars.iter().position(|v| v == name)
    }

    pub fn eval(&self, point: &[f64]) -> Result<f64> {
        if point.len() != self.vars.len() {
            return Err(Error::PointDimension {
                expected: self.vars.len(),
                got: point.len(),
            });
        }
        self.node.eval(point, &self.vars)
    }

    /// Partial derivative with respect to the named variable.
    pub fn diff(&self, var: &str) -> Result<Expression> {
        let i = self
            .var_index(var)
            .ok_or_else(|| Error::UnknownIdentifier(var.to_string()))?;
        Ok(self.diff_index(i))
    }

    /// Partial derivative with respect to the variable at `index`.
    pub fn diff_index(&self, index: usize) -> Expression {
        Expression {
            node: diff::diff(&self.node, index),
            vars: self.vars.clone(),
        }
    }

    pub fn as_const(&self) -> Option<f64> {
        match *self.node {
            Node::Const(c) => Some(c),
            _ => None,
        }
    }

    /// True when the tree is the literal constant zero.
    pub fn is_zero(&self) -> bool {
        self.as_const() == Some(0.0)
    }

    pub fn depends_on(&self, index: usize) -> bool {
        self.node.depends_on(index)
    }

    /// Re-expresses this expression over `vars`, sending variable `i` to `map[i]`.
    pub fn rebase(&self, vars: &Arc<[String]>, map: &[usize]) -> Expression {
        assert_eq!(map.len(), self.vars.len(), "rebase map length");
        assert!(map.iter().all(|&j| j < vars.len()), "rebase target out of range");
        Expression {
            node: Arc::new(self.node.remap(map)),
            vars: vars.clone(),
        }
    }

    /// `self ^ exponent` with constant folding.
    pub fn powf(&self, exponent: f64) -> Expression {
        self.with(diff::pow(self.node.clone(), Arc::new(Node::Const(exponent))))
    }

    pub fn apply(&self, f: Func) -> Expression {
        self.with(Arc::new(Node::Call(f, self.node.clone())))
    }

    fn with(&self, node: Arc<Node>) -> Expression {
        Expression {
            node,
            vars: self.vars.clone(),
        }
    }

    fn binary(&self, other: &Expression, f: fn(Arc<Node>, Arc<Node>) -> Arc<Node>) -> Expression {
        assert_eq!(
            self.vars, other.vars,
            "arithmetic on expressions over different variable lists"
        );
        self.with(f(self.node.clone(), other.node.clone()))
    }
}

impl fmt::Display for Expression {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&display::render(&self.node, &self.vars))
    }
}

impl ops::Add for &Expression {
    type Output = Expression;
    fn add(self, rhs: &Expression) -> Expression {
        self.binary(rhs, diff::add)
    }
}

impl ops::Sub for &Expression {
    type Output = Expression;
    fn sub(self, rhs: &Expression) -> Expression {
        self.binary(rhs, diff::sub)
    }
}

impl ops::Mul for &Expression {
    type Output = Expression;
    fn mul(self, rhs: &Expression) -> Expression {
        self.binary(rhs, diff::mul)
    }
}

impl ops::Div for &Expression {
    type Output = Expression;
    fn div(self, rhs: &Expression) -> Expression {
        self.binary(rhs, diff::div)
    }
}

impl ops::Neg for &Expression {
    type Output = Expression;
    fn neg(self) -> Expression {
        self.with(diff::neg(self.node.clone()))
    }
}

/// Checks a variable list: distinct identifiers, none shadowing a function or `pi`.
pub fn validate_variables<S: AsRef<str>>(variables: &[S]) -> Result<Arc<[String]>> {
    let mut out: Vec<String> = Vec::with_capacity(variables.len());
    for v in variables {
        let v = v.as_ref();
        if !parse::is_identifier(v) {
            return Err(Error::InvalidVariables(format!("`{v}` is not an identifier")));
        }
        if is_reserved(v) {
            return Err(Error::InvalidVariables(format!("`{v}` is a reserved name")));
        }
        if out.iter().any(|o| o == v) {
            return Err(Error::InvalidVariables(format!("`{v}` listed twice")));
        }
        out.push(v.to_string());
    }
    Ok(out.into())
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    fn p(src: &str, vars: &[&str]) -> Expression {
        Expression::parse(src, vars).unwrap()
    }

    #[test]
    fn parse_and_evaluate_examples() {
        assert_eq!(p("x0^2 + sin(x1)", &["x0", "x1"]).eval(&[2.0, 0.0]).unwrap(), 4.0);
        assert_eq!(p("1", &[] as &[&str]).eval(&[]).unwrap(), 1.0);
        assert_eq!(p("x0*x1 - x1*x0", &["x0", "x1"]).eval(&[3.7, -2.0]).unwrap(), 0.0);
    }

    #[test]
    fn evaluate_examples() {
        assert_eq!(p("exp(x0)", &["x0"]).eval(&[0.0]).unwrap(), 1.0);
        assert!(matches!(
            p("sqrt(x0)", &["x0"]).eval(&[-1.0]),
            Err(Error::Domain { .. })
        ));
        let v = p("sin(x0)^2 + cos(x0)^2", &["x0"]).eval(&[0.3]).unwrap();
        assert!((v - 1.0).abs() <= 1e-15);
    }

    #[test]
    fn domain_errors_name_the_subterm() {
        let e = p("1 + log(x - 2)", &["x"]);
        match e.eval(&[1.0]) {
            Err(Error::Domain { subterm, .. }) => assert_eq!(subterm, "log(x - 2)"),
            other => panic!("unexpected {other:?}"),
        }
        assert!(p("1/x", &["x"]).eval(&[0.0]).is_err());
        assert!(p("x^(-1)", &["x"]).eval(&[0.0]).is_err());
        assert!(p("x^0.5", &["x"]).eval(&[-4.0]).is_err());
        assert_eq!(p("x^3", &["x"]).eval(&[-2.0]).unwrap(), -8.0);
    }

    #[test]
    fn differentiate_examples() {
        let e = p("x0^2", &["x0"]);
        assert_eq!(e.diff("x0").unwrap().eval(&[3.0]).unwrap(), 6.0);
        let e = p("x0", &["x0", "x1"]);
        assert!(e.diff("x1").unwrap().is_zero());
        let e = p("sin(θ)^2", &["θ"]);
        let v = e.diff("θ").unwrap().eval(&[PI / 4.0]).unwrap();
        assert!((v - 1.0).abs() < 1e-15);
    }

    #[test]
    fn diff_unknown_variable_is_an_error() {
        let e = p("x", &["x"]);
        assert_eq!(e.diff("y"), Err(Error::UnknownIdentifier("y".into())));
    }

    #[test]
    fn pi_constant() {
        assert_eq!(p("pi", &["x"]).eval(&[0.0]).unwrap(), PI);
    }

    #[test]
    fn point_length_checked() {
        assert!(matches!(
            p("x", &["x", "y"]).eval(&[1.0]),
            Err(Error::PointDimension { expected: 2, got: 1 })
        ));
    }

    #[test]
    fn rebase_moves_variables() {
        let e = p("a * b^2", &["a", "b"]);
        let vars: Arc<[String]> = vec!["b".to_string(), "z".into(), "a".into()].into();
        let r = e.rebase(&vars, &[2, 0]);
        assert_eq!(r.eval(&[3.0, 100.0, 2.0]).unwrap(), 18.0);
        assert_eq!(r.to_string(), "a * b^2");
    }

    #[test]
    fn operator_overloads_fold() {
        let vars = validate_variables(&["x"]).unwrap();
        let x = Expression::variable(0, &vars);
        let zero = Expression::constant(0.0, &vars);
        let one = Expression::constant(1.0, &vars);
        assert_eq!(&x + &zero, x);
        assert_eq!(&one * &x, x);
        assert!((&zero * &x).is_zero());
        assert_eq!(x.powf(1.0), x);
        assert_eq!((&x * &x).eval(&[3.0]).unwrap(), 9.0);
    }

    #[test]
    fn variable_validation() {
        assert!(validate_variables(&["x", "x"]).is_err());
        assert!(validate_variables(&["sin"]).is_err());
        assert!(validate_variables(&["pi"]).is_err());
        assert!(validate_variables(&["2x"]).is_err());
        assert!(validate_variables(&["θ", "φ", "x_1"]).is_ok());
    }
}
