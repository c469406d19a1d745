//! Symbolic differentiation and the folding constructors it builds with.
//!
//! Folding is limited to the identities listed on each constructor plus
//! evaluation of operations whose operands are all constants. No other
//! simplification is attempted.

use std::sync::Arc;

use super::{pow_checked, Func, Node};

type N = Arc<Node>;

fn konst(c: f64) -> N {
    Arc::new(Node::Const(c))
}

fn as_const(n: &Node) -> Option<f64> {
    match n {
        Node::Const(c) => Some(*c),
        _ => None,
    }
}

fn finite(v: f64) -> Option<N> {
    v.is_finite().then(|| konst(v))
}

/// `a + b`; folds `0 + x`, `x + 0`.
pub(crate) fn add(a: N, b: N) -> N {
    match (as_const(&a), as_const(&b)) {
        (Some(x), Some(y)) => finite(x + y).unwrap_or_else(|| Arc::new(Node::Add(a, b))),
        (Some(x), _) if x == 0.0 => b,
        (_, Some(y)) if y == 0.0 => a,
        _ => Arc::new(Node::Add(a, b)),
    }
}

/// `a - b`; folds `x - 0`, `0 - x`.
pub(crate) fn sub(a: N, b: N) -> N {
    match (as_const(&a), as_const(&b)) {
        (Some(x), Some(y)) => finite(x - y).unwrap_or_else(|| Arc::new(Node::Sub(a, b))),
        (_, Some(y)) if y == 0.0 => a,
        (Some(x), _) if x == 0.0 => neg(b),
        _ => Arc::new(Node::Sub(a, b)),
    }
}

/// `a * b`; folds `0 * x`, `1 * x`, `-1 * x` and their mirrors.
pub(crate) fn mul(a: N, b: N) -> N {
    match (as_const(&a), as_const(&b)) {
        (Some(x), Some(y)) => finite(x * y).unwrap_or_else(|| Arc::new(Node::Mul(a, b))),
        (Some(x), _) | (_, Some(x)) if x == 0.0 => konst(0.0),
        (Some(x), _) if x == 1.0 => b,
        (_, Some(y)) if y == 1.0 => a,
        (Some(x), _) if x == -1.0 => neg(b),
        (_, Some(y)) if y == -1.0 => neg(a),
        _ => Arc::new(Node::Mul(a, b)),
    }
}

/// `a / b`; folds `0 / x`, `x / 1`.
pub(crate) fn div(a: N, b: N) -> N {
    match (as_const(&a), as_const(&b)) {
        (Some(x), Some(y)) if y != 0.0 => {
            finite(x / y).unwrap_or_else(|| Arc::new(Node::Div(a, b)))
        }
        (Some(x), _) if x == 0.0 => konst(0.0),
        (_, Some(y)) if y == 1.0 => a,
        _ => Arc::new(Node::Div(a, b)),
    }
}

/// `-a`; folds constants and double negation.
pub(crate) fn neg(a: N) -> N {
    match &*a {
        Node::Const(c) => konst(-c),
        Node::Neg(inner) => inner.clone(),
        _ => Arc::new(Node::Neg(a)),
    }
}

/// `a ^ b`; folds `x ^ 1`, `x ^ 0`.
pub(crate) fn pow(a: N, b: N) -> N {
    match (as_const(&a), as_const(&b)) {
        (Some(x), Some(y)) => pow_checked(x, y)
            .and_then(finite)
            .unwrap_or_else(|| Arc::new(Node::Pow(a, b))),
        (_, Some(y)) if y == 1.0 => a,
        (_, Some(y)) if y == 0.0 => konst(1.0),
        _ => Arc::new(Node::Pow(a, b)),
    }
}

fn call(f: Func, a: N) -> N {
    Arc::new(Node::Call(f, a))
}

/// Partial derivative of `n` with respect to variable `var`.
pub(crate) fn diff(n: &N, var: usize) -> N {
    match &**n {
        Node::Const(_) => konst(0.0),
        Node::Var(i) => konst(if *i == var { 1.0 } else { 0.0 }),
        Node::Neg(a) => neg(diff(a, var)),
        Node::Add(a, b) => add(diff(a, var), diff(b, var)),
        Node::Sub(a, b) => sub(diff(a, var), diff(b, var)),
        Node::Mul(a, b) => add(
            mul(diff(a, var), b.clone()),
            mul(a.clone(), diff(b, var)),
        ),
        Node::Div(a, b) => {
            let da = diff(a, var);
            let db = diff(b, var);
            if as_const(&db) == Some(0.0) {
                return div(da, b.clone());
            }
            div(
                sub(mul(da, b.clone()), mul(a.clone(), db)),
                pow(b.clone(), konst(2.0)),
            )
        }
        Node::Pow(a, b) => {
            let da = diff(a, var);
            let db = diff(b, var);
            if let Some(c) = as_const(b) {
                // c * a^(c-1) * a'
                return mul(mul(konst(c), pow(a.clone(), konst(c - 1.0))), da);
            }
            if as_const(&db) == Some(0.0) {
                return mul(mul(b.clone(), pow(a.clone(), sub(b.clone(), konst(1.0)))), da);
            }
            // a^b * (b' log a + b a' / a)
            let log_term = mul(db, call(Func::Log, a.clone()));
            let base_term = div(mul(b.clone(), da), a.clone());
            mul(n.clone(), add(log_term, base_term))
        }
        Node::Call(f, a) => {
            let da = diff(a, var);
            if as_const(&da) == Some(0.0) {
                return konst(0.0);
            }
            let outer = match f {
                Func::Sin => call(Func::Cos, a.clone()),
                Func::Cos => neg(call(Func::Sin, a.clone())),
                Func::Tan => add(konst(1.0), pow(n.clone(), konst(2.0))),
                Func::Exp => n.clone(),
                Func::Log => div(konst(1.0), a.clone()),
                Func::Sqrt => div(konst(0.5), n.clone()),
                Func::Sinh => call(Func::Cosh, a.clone()),
                Func::Cosh => call(Func::Sinh, a.clone()),
                Func::Tanh => sub(konst(1.0), pow(n.clone(), konst(2.0))),
            };
            mul(outer, da)
        }
    }
}
