//! Weight expressions: small arithmetic trees over one variable.

use std::fmt;

/// The free variable of a weight expression.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Variable {
    /// Position on the real line.
    X,
    /// Angle on the unit circle.
    Theta,
}

impl Variable {
    pub fn name(self) -> &'static str {
        match self {
            Variable::X => "x",
            Variable::Theta => "theta",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Func {
    Abs,
    Exp,
    Log,
    Cos,
    Sin,
    Sqrt,
}

impl Func {
    pub fn from_name(name: &str) -> Option<Func> {
        Some(match name {
            "abs" => Func::Abs,
            "exp" => Func::Exp,
            "log" => Func::Log,
            "cos" => Func::Cos,
            "sin" => Func::Sin,
            "sqrt" => Func::Sqrt,
            _ => return None,
        })
    }

    pub fn name(self) -> &'static str {
        match self {
            Func::Abs => "abs",
            Func::Exp => "exp",
            Func::Log => "log",
            Func::Cos => "cos",
            Func::Sin => "sin",
            Func::Sqrt => "sqrt",
        }
    }

    fn apply(self, v: f64) -> f64 {
        match self {
            Func::Abs => v.abs(),
            Func::Exp => v.exp(),
            Func::Log => v.ln(),
            Func::Cos => v.cos(),
            Func::Sin => v.sin(),
            Func::Sqrt => v.sqrt(),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum WeightExpr {
    Num(f64),
    Pi,
    Var(Variable),
    Neg(Box<WeightExpr>),
    Add(Box<WeightExpr>, Box<WeightExpr>),
    Sub(Box<WeightExpr>, Box<WeightExpr>),
    Mul(Box<WeightExpr>, Box<WeightExpr>),
    Div(Box<WeightExpr>, Box<WeightExpr>),
    Pow(Box<WeightExpr>, Box<WeightExpr>),
    Call(Func, Box<WeightExpr>),
}

impl WeightExpr {
    pub fn eval(&self, t: f64) -> f64 {
        use WeightExpr::*;
        match self {
            Num(v) => *v,
            Pi => std::f64::consts::PI,
            Var(_) => t,
            Neg(e) => -e.eval(t),
            Add(a, b) => a.eval(t) + b.eval(t),
            Sub(a, b) => a.eval(t) - b.eval(t),
            Mul(a, b) => a.eval(t) * b.eval(t),
            Div(a, b) => a.eval(t) / b.eval(t),
            Pow(a, b) => a.eval(t).powf(b.eval(t)),
            Call(f, e) => f.apply(e.eval(t)),
        }
    }

    pub fn is_constant(&self) -> bool {
        self.variable().is_none()
    }

    /// The variable the expression mentions, if any.
    pub fn variable(&self) -> Option<Variable> {
        use WeightExpr::*;
        match self {
            Num(_) | Pi => None,
            Var(v) => Some(*v),
            Neg(e) | Call(_, e) => e.variable(),
            Add(a, b) | Sub(a, b) | Mul(a, b) | Div(a, b) | Pow(a, b) => {
                a.variable().or_else(|| b.variable())
            }
        }
    }

    pub fn mentions(&self, var: Variable) -> bool {
        use WeightExpr::*;
        match self {
            Num(_) | Pi => false,
            Var(v) => *v == var,
            Neg(e) | Call(_, e) => e.mentions(var),
            Add(a, b) | Sub(a, b) | Mul(a, b) | Div(a, b) | Pow(a, b) => {
                a.mentions(var) || b.mentions(var)
            }
        }
    }

    /// Subexpressions whose zeros mark points where the weight may fail to be
    /// smooth: arguments of `abs`, `log`, `sqrt`, bases of non-integer powers
    /// and denominators.
    fn suspects<'a>(&'a self, out: &mut Vec<&'a WeightExpr>) {
        use WeightExpr::*;
        match self {
            Num(_) | Pi | Var(_) => {}
            Neg(e) => e.suspects(out),
            Add(a, b) | Sub(a, b) | Mul(a, b) => {
                a.suspects(out);
                b.suspects(out);
            }
            Div(a, b) => {
                if !b.is_constant() {
                    out.push(b);
                }
                a.suspects(out);
                b.suspects(out);
            }
            Pow(a, b) => {
                let integer_exponent = b.is_constant() && {
                    let p = b.eval(0.0);
                    p.fract() == 0.0 && p >= 0.0
                };
                if !integer_exponent && !a.is_constant() {
                    out.push(a);
                }
                a.suspects(out);
                b.suspects(out);
            }
            Call(f, e) => {
                if matches!(f, Func::Abs | Func::Log | Func::Sqrt) && !e.is_constant() {
                    out.push(e);
                }
                e.suspects(out);
            }
        }
    }

    /// Points in `[a, b]` where the weight may be singular or non-smooth.
    pub fn critical_points(&self, a: f64, b: f64) -> Vec<f64> {
        let mut suspects = Vec::new();
        self.suspects(&mut suspects);
        let mut points = Vec::new();
        for g in suspects {
            points.extend(sign_changes(|t| g.eval(t), a, b));
        }
        points.sort_by(|x, y| x.total_cmp(y));
        let tol = 1e-12 * (b - a).abs().max(1.0);
        points.dedup_by(|x, y| (*x - *y).abs() <= tol);
        points
    }

    fn precedence(&self) -> u8 {
        use WeightExpr::*;
        match self {
            Add(..) | Sub(..) => 1,
            Mul(..) | Div(..) => 2,
            Neg(_) => 3,
            Pow(..) => 4,
            // negative literals print with their own parentheses
            _ => 5,
        }
    }
}

/// Roots of `g` on `[a, b]` located by sampling plus bisection.
fn sign_changes<F: Fn(f64) -> f64>(g: F, a: f64, b: f64) -> Vec<f64> {
    const SAMPLES: usize = 4096;
    let h = (b - a) / SAMPLES as f64;
    let mut roots = Vec::new();
    let mut prev_t = a;
    let mut prev = g(a);
    if prev == 0.0 {
        roots.push(a);
    }
    for i in 1..=SAMPLES {
        let t = if i == SAMPLES { b } else { a + h * i as f64 };
        let v = g(t);
        if v == 0.0 {
            roots.push(t);
        } else if prev.is_finite() && v.is_finite() && prev != 0.0 && (prev < 0.0) != (v < 0.0) {
            let (mut lo, mut hi) = (prev_t, t);
            let lo_neg = prev < 0.0;
            for _ in 0..200 {
                let mid = 0.5 * (lo + hi);
                if mid <= lo || mid >= hi {
                    break;
                }
                let gm = g(mid);
                if gm == 0.0 {
                    lo = mid;
                    hi = mid;
                    break;
                }
                if (gm < 0.0) == lo_neg {
                    lo = mid;
                } else {
                    hi = mid;
                }
            }
            roots.push(0.5 * (lo + hi));
        }
        prev = v;
        prev_t = t;
    }
    roots
}

impl fmt::Display for WeightExpr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        use WeightExpr::*;
        let wrap = |f: &mut fmt::Formatter<'_>, e: &WeightExpr, parens: bool| {
            if parens {
                write!(f, "({e})")
            } else {
                write!(f, "{e}")
            }
        };
        match self {
            Num(v) => {
                if v.is_sign_negative() {
                    write!(f, "(-{})", -v)
                } else {
                    write!(f, "{v}")
                }
            }
            Pi => write!(f, "pi"),
            Var(v) => write!(f, "{}", v.name()),
            Neg(e) => {
                write!(f, "-")?;
                wrap(f, e, e.precedence() < 3)
            }
            Add(a, b) | Sub(a, b) | Mul(a, b) | Div(a, b) => {
                let (op, p) = match self {
                    Add(..) => ("+", 1),
                    Sub(..) => ("-", 1),
                    Mul(..) => ("*", 2),
                    _ => ("/", 2),
                };
                wrap(f, a, a.precedence() < p)?;
                write!(f, "{op}")?;
                wrap(f, b, b.precedence() <= p)
            }
            Pow(a, b) => {
                wrap(f, a, a.precedence() < 5)?;
                write!(f, "^")?;
                wrap(f, b, b.precedence() < 3)
            }
            Call(func, e) => write!(f, "{}({e})", func.name()),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn x() -> Box<WeightExpr> {
        Box::new(WeightExpr::Var(Variable::X))
    }

    #[test]
    fn critical_points_of_abs_and_fractional_power() {
        // abs(x) * (1 - x^2)^(-0.5)
        let one_minus = WeightExpr::Sub(
            Box::new(WeightExpr::Num(1.0)),
            Box::new(WeightExpr::Pow(x(), Box::new(WeightExpr::Num(2.0)))),
        );
        let e = WeightExpr::Mul(
            Box::new(WeightExpr::Call(Func::Abs, x())),
            Box::new(WeightExpr::Pow(Box::new(one_minus), Box::new(WeightExpr::Num(-0.5)))),
        );
        let pts = e.critical_points(-1.0, 1.0);
        assert_eq!(pts.len(), 3, "{pts:?}");
        assert!((pts[0] + 1.0).abs() < 1e-14);
        assert!(pts[1].abs() < 1e-14);
        assert!((pts[2] - 1.0).abs() < 1e-14);
    }

    #[test]
    fn integer_powers_are_smooth() {
        let e = WeightExpr::Pow(x(), Box::new(WeightExpr::Num(2.0)));
        assert!(e.critical_points(-1.0, 1.0).is_empty());
    }

    #[test]
    fn display_parenthesizes_by_precedence() {
        let e = WeightExpr::Mul(
            Box::new(WeightExpr::Sub(x(), Box::new(WeightExpr::Num(1.0)))),
            Box::new(WeightExpr::Neg(x())),
        );
        assert_eq!(e.to_string(), "(x-1)*-x");
        let p = WeightExpr::Pow(x(), Box::new(WeightExpr::Num(-0.7)));
        assert_eq!(p.to_string(), "x^(-0.7)");
    }
}
