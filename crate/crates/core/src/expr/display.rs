use super::Node;

// Binding strength used when deciding where parentheses are required.
const ADD: u8 = 1;
const MUL: u8 = 2;
const NEG: u8 = 3;
const POW: u8 = 4;
const ATOM: u8 = 5;

fn prec(n: &Node) -> u8 {
    match n {
        Node::Const(c) if c.is_sign_negative() => NEG,
        Node::Const(_) | Node::Var(_) | Node::Call(..) => ATOM,
        Node::Neg(_) => NEG,
        Node::Add(..) | Node::Sub(..) => ADD,
        Node::Mul(..) | Node::Div(..) => MUL,
        Node::Pow(..) => POW,
    }
}

pub(crate) fn render(n: &Node, vars: &[String]) -> String {
    let mut s = String::new();
    write(n, vars, &mut s);
    s
}

fn wrapped(n: &Node, vars: &[String], out: &mut String, parens: bool) {
    if parens {
        out.push('(');
        write(n, vars, out);
        out.push(')');
    } else {
        write(n, vars, out);
    }
}

fn write(n: &Node, vars: &[String], out: &mut String) {
    match n {
        Node::Const(c) => {
            // `{}` on f64 prints the shortest string that reparses to the same value.
            if *c == 0.0 {
                out.push('0');
            } else {
                out.push_str(&format!("{c}"));
            }
        }
        Node::Var(i) => out.push_str(&vars[*i]),
        Node::Neg(a) => {
            out.push('-');
            // `-(2)` keeps a negated literal distinct from the literal `-2`.
            let parens = prec(a) < NEG || matches!(**a, Node::Const(c) if !c.is_sign_negative());
            wrapped(a, vars, out, parens);
        }
        Node::Call(f, a) => {
            out.push_str(f.name());
            out.push('(');
            write(a, vars, out);
            out.push(')');
        }
        Node::Add(a, b) | Node::Sub(a, b) | Node::Mul(a, b) | Node::Div(a, b) => {
            let (p, op) = match n {
                Node::Add(..) => (ADD, " + "),
                Node::Sub(..) => (ADD, " - "),
                Node::Mul(..) => (MUL, " * "),
                _ => (MUL, " / "),
            };
            wrapped(a, vars, out, prec(a) < p);
            out.push_str(op);
            wrapped(b, vars, out, prec(b) <= p);
        }
        Node::Pow(a, b) => {
            wrapped(a, vars, out, prec(a) <= POW);
            out.push('^');
            wrapped(b, vars, out, prec(b) < NEG);
        }
    }
}

#[cfg(test)]
mod tests {
    use crate::expr::Expression;

    fn rt(src: &str) -> String {
        Expression::parse(src, &["x", "y"]).unwrap().to_string()
    }

    #[test]
    fn renders_minimal_parentheses() {
        assert_eq!(rt("x + y*2"), "x + y * 2");
        assert_eq!(rt("(x + y)*2"), "(x + y) * 2");
        assert_eq!(rt("x - (y - 1)"), "x - (y - 1)");
        assert_eq!(rt("(x^2)^3"), "(x^2)^3");
        assert_eq!(rt("x^2^3"), "x^2^3");
        assert_eq!(rt("(-x)^2"), "(-x)^2");
        assert_eq!(rt("-x^2"), "-x^2");
        assert_eq!(rt("x^-2"), "x^-2");
        assert_eq!(rt("-(2)"), "-(2)");
        assert_eq!(rt("(-2)^x"), "(-2)^x");
        assert_eq!(rt("sin(x)*cos(y)"), "sin(x) * cos(y)");
    }
}
