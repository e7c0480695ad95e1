//! Scalar expressions over chart coordinates.
//!
//! Every scalar field in a spec file (immersion components, distribution
//! coefficients, claimed slant and warping functions) is an [`Expr`]. Values
//! and derivatives are produced by forward-mode propagation of [`Jet2`]s; no
//! numerical differencing happens on this path. Expressions are evaluated as
//! written and never simplified.

mod jet;
mod parser;

use std::fmt;

use thiserror::Error;

pub use jet::Jet2;
pub use parser::{line_col, parse_expression, ParseError, ParseErrorKind};

/// Byte range of a node in the text it was parsed from.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct Span {
    pub start: usize,
    pub end: usize,
}

impl Span {
    pub fn new(start: usize, end: usize) -> Self {
        Self { start, end }
    }

    pub fn join(self, other: Span) -> Span {
        Span::new(self.start.min(other.start), self.end.max(other.end))
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum UnaryOp {
    Neg,
    Sin,
    Cos,
    Tan,
    Acos,
    Asin,
    Atan,
    Sqrt,
    Exp,
    Log,
    Abs,
}

impl UnaryOp {
    pub const FUNCTIONS: [UnaryOp; 10] = [
        UnaryOp::Sin,
        UnaryOp::Cos,
        UnaryOp::Tan,
        UnaryOp::Acos,
        UnaryOp::Asin,
        UnaryOp::Atan,
        UnaryOp::Sqrt,
        UnaryOp::Exp,
        UnaryOp::Log,
        UnaryOp::Abs,
    ];

    pub fn name(self) -> &'static str {
        match self {
            UnaryOp::Neg => "-",
            UnaryOp::Sin => "sin",
            UnaryOp::Cos => "cos",
            UnaryOp::Tan => "tan",
            UnaryOp::Acos => "acos",
            UnaryOp::Asin => "asin",
            UnaryOp::Atan => "atan",
            UnaryOp::Sqrt => "sqrt",
            UnaryOp::Exp => "exp",
            UnaryOp::Log => "log",
            UnaryOp::Abs => "abs",
        }
    }

    pub fn from_name(name: &str) -> Option<UnaryOp> {
        UnaryOp::FUNCTIONS.into_iter().find(|op| op.name() == name)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum BinaryOp {
    Add,
    Sub,
    Mul,
    Div,
    Pow,
}

impl BinaryOp {
    pub fn symbol(self) -> char {
        match self {
            BinaryOp::Add => '+',
            BinaryOp::Sub => '-',
            BinaryOp::Mul => '*',
            BinaryOp::Div => '/',
            BinaryOp::Pow => '^',
        }
    }
}

#[derive(Clone, Debug)]
pub enum ExprKind {
    Const(f64),
    /// Index into the chart coordinate list.
    Var(usize),
    Unary(UnaryOp, Box<Expr>),
    Binary(BinaryOp, Box<Expr>, Box<Expr>),
}

/// Expression tree. Equality is structural and ignores source spans.
#[derive(Clone, Debug)]
pub struct Expr {
    kind: ExprKind,
    span: Span,
}

impl PartialEq for Expr {
    fn eq(&self, other: &Self) -> bool {
        match (&self.kind, &other.kind) {
            (ExprKind::Const(a), ExprKind::Const(b)) => a == b,
            (ExprKind::Var(a), ExprKind::Var(b)) => a == b,
            (ExprKind::Unary(o1, a), ExprKind::Unary(o2, b)) => o1 == o2 && a == b,
            (ExprKind::Binary(o1, a1, b1), ExprKind::Binary(o2, a2, b2)) => {
                o1 == o2 && a1 == a2 && b1 == b2
            }
            _ => false,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum DomainErrorKind {
    DivisionByZero,
    LogNonPositive,
    SqrtNonPositive,
    AcosOutOfRange,
    AsinOutOfRange,
    TanPole,
    AbsAtZero,
    NegativeBaseRealExponent,
    ZeroBaseNegativeExponent,
    NonFinite,
}

impl fmt::Display for DomainErrorKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let msg = match self {
            DomainErrorKind::DivisionByZero => "division by zero",
            DomainErrorKind::LogNonPositive => "log of a non-positive argument",
            DomainErrorKind::SqrtNonPositive => "sqrt of a non-positive argument (not differentiable)",
            DomainErrorKind::AcosOutOfRange => "acos argument outside the open interval (-1, 1)",
            DomainErrorKind::AsinOutOfRange => "asin argument outside the open interval (-1, 1)",
            DomainErrorKind::TanPole => "tan evaluated at a pole",
            DomainErrorKind::AbsAtZero => "abs is not differentiable at 0",
            DomainErrorKind::NegativeBaseRealExponent => "non-integer power of a non-positive base",
            DomainErrorKind::ZeroBaseNegativeExponent => "negative power of zero",
            DomainErrorKind::NonFinite => "non-finite intermediate value",
        };
        f.write_str(msg)
    }
}

#[derive(Clone, Copy, Debug, Error, PartialEq)]
#[error("{kind} (at bytes {}..{})", span.start, span.end)]
pub struct EvalError {
    pub kind: DomainErrorKind,
    pub span: Span,
}

impl Expr {
    pub fn new(kind: ExprKind, span: Span) -> Self {
        Self { kind, span }
    }

    pub fn constant(value: f64) -> Self {
        Self::new(ExprKind::Const(value), Span::default())
    }

    pub fn var(index: usize) -> Self {
        Self::new(ExprKind::Var(index), Span::default())
    }

    pub fn unary(op: UnaryOp, arg: Expr) -> Self {
        let span = arg.span;
        Self::new(ExprKind::Unary(op, Box::new(arg)), span)
    }

    pub fn binary(op: BinaryOp, lhs: Expr, rhs: Expr) -> Self {
        let span = lhs.span.join(rhs.span);
        Self::new(ExprKind::Binary(op, Box::new(lhs), Box::new(rhs)), span)
    }

    pub fn kind(&self) -> &ExprKind {
        &self.kind
    }

    pub fn span(&self) -> Span {
        self.span
    }

    /// Shifts every span by `offset` bytes (used when an expression was cut out
    /// of a larger line).
    pub fn offset_spans(&mut self, offset: usize) {
        self.span = Span::new(self.span.start + offset, self.span.end + offset);
        match &mut self.kind {
            ExprKind::Const(_) | ExprKind::Var(_) => {}
            ExprKind::Unary(_, a) => a.offset_spans(offset),
            ExprKind::Binary(_, a, b) => {
                a.offset_spans(offset);
                b.offset_spans(offset);
            }
        }
    }

    pub fn is_constant(&self) -> bool {
        !self.any_var(&mut |_| true)
    }

    /// True if some variable index satisfies `pred`.
    pub fn any_var(&self, pred: &mut impl FnMut(usize) -> bool) -> bool {
        match &self.kind {
            ExprKind::Const(_) => false,
            ExprKind::Var(i) => pred(*i),
            ExprKind::Unary(_, a) => a.any_var(pred),
            ExprKind::Binary(_, a, b) => a.any_var(pred) || b.any_var(pred),
        }
    }

    /// Value-only evaluation. Domain checks match [`Expr::eval_jet2`] except
    /// that boundary points with infinite derivatives (acos at ±1, sqrt at 0,
    /// abs at 0) are accepted.
    pub fn eval(&self, point: &[f64]) -> Result<f64, EvalError> {
        let err = |kind| EvalError { kind, span: self.span };
        let value = match &self.kind {
            ExprKind::Const(c) => *c,
            ExprKind::Var(i) => point[*i],
            ExprKind::Unary(op, a) => {
                let x = a.eval(point)?;
                match op {
                    UnaryOp::Neg => -x,
                    UnaryOp::Sin => x.sin(),
                    UnaryOp::Cos => x.cos(),
                    UnaryOp::Tan => {
                        if x.cos() == 0.0 {
                            return Err(err(DomainErrorKind::TanPole));
                        }
                        x.tan()
                    }
                    UnaryOp::Acos => {
                        if !(-1.0..=1.0).contains(&x) {
                            return Err(err(DomainErrorKind::AcosOutOfRange));
                        }
                        x.acos()
                    }
                    UnaryOp::Asin => {
                        if !(-1.0..=1.0).contains(&x) {
                            return Err(err(DomainErrorKind::AsinOutOfRange));
                        }
                        x.asin()
                    }
                    UnaryOp::Atan => x.atan(),
                    UnaryOp::Sqrt => {
                        if x < 0.0 {
                            return Err(err(DomainErrorKind::SqrtNonPositive));
                        }
                        x.sqrt()
                    }
                    UnaryOp::Exp => x.exp(),
                    UnaryOp::Log => {
                        if x <= 0.0 {
                            return Err(err(DomainErrorKind::LogNonPositive));
                        }
                        x.ln()
                    }
                    UnaryOp::Abs => x.abs(),
                }
            }
            ExprKind::Binary(op, a, b) => {
                let x = a.eval(point)?;
                let y = b.eval(point)?;
                match op {
                    BinaryOp::Add => x + y,
                    BinaryOp::Sub => x - y,
                    BinaryOp::Mul => x * y,
                    BinaryOp::Div => {
                        if y == 0.0 {
                            return Err(err(DomainErrorKind::DivisionByZero));
                        }
                        x / y
                    }
                    BinaryOp::Pow => power_value(x, y).map_err(err)?,
                }
            }
        };
        if value.is_finite() {
            Ok(value)
        } else {
            Err(err(DomainErrorKind::NonFinite))
        }
    }

    /// Value, gradient and Hessian at `point` by forward-mode propagation.
    pub fn eval_jet2(&self, point: &[f64]) -> Result<Jet2, EvalError> {
        let k = point.len();
        let err = |kind| EvalError { kind, span: self.span };
        let jet = match &self.kind {
            ExprKind::Const(c) => Jet2::constant(k, *c),
            ExprKind::Var(i) => Jet2::variable(k, *i, point[*i]),
            ExprKind::Unary(op, a) => {
                let g = a.eval_jet2(point)?;
                let x = g.value;
                match op {
                    UnaryOp::Neg => g.neg(),
                    UnaryOp::Sin => g.chain(x.sin(), x.cos(), -x.sin()),
                    UnaryOp::Cos => g.chain(x.cos(), -x.sin(), -x.cos()),
                    UnaryOp::Tan => {
                        let c = x.cos();
                        if c == 0.0 {
                            return Err(err(DomainErrorKind::TanPole));
                        }
                        let t = x.tan();
                        let sec2 = 1.0 / (c * c);
                        g.chain(t, sec2, 2.0 * sec2 * t)
                    }
                    UnaryOp::Acos | UnaryOp::Asin => {
                        if !(x > -1.0 && x < 1.0) {
                            return Err(err(if *op == UnaryOp::Acos {
                                DomainErrorKind::AcosOutOfRange
                            } else {
                                DomainErrorKind::AsinOutOfRange
                            }));
                        }
                        let s = 1.0 - x * x;
                        let d1 = 1.0 / s.sqrt();
                        let d2 = x / (s * s.sqrt());
                        if *op == UnaryOp::Acos {
                            g.chain(x.acos(), -d1, -d2)
                        } else {
                            g.chain(x.asin(), d1, d2)
                        }
                    }
                    UnaryOp::Atan => {
                        let s = 1.0 + x * x;
                        g.chain(x.atan(), 1.0 / s, -2.0 * x / (s * s))
                    }
                    UnaryOp::Sqrt => {
                        if x <= 0.0 {
                            return Err(err(DomainErrorKind::SqrtNonPositive));
                        }
                        let r = x.sqrt();
                        g.chain(r, 0.5 / r, -0.25 / (x * r))
                    }
                    UnaryOp::Exp => {
                        let e = x.exp();
                        g.chain(e, e, e)
                    }
                    UnaryOp::Log => {
                        if x <= 0.0 {
                            return Err(err(DomainErrorKind::LogNonPositive));
                        }
                        g.chain(x.ln(), 1.0 / x, -1.0 / (x * x))
                    }
                    UnaryOp::Abs => {
                        if x == 0.0 {
                            return Err(err(DomainErrorKind::AbsAtZero));
                        }
                        g.chain(x.abs(), x.signum(), 0.0)
                    }
                }
            }
            ExprKind::Binary(op, a, b) => {
                let ja = a.eval_jet2(point)?;
                match op {
                    BinaryOp::Add => ja.add(&b.eval_jet2(point)?),
                    BinaryOp::Sub => ja.sub(&b.eval_jet2(point)?),
                    BinaryOp::Mul => ja.mul(&b.eval_jet2(point)?),
                    BinaryOp::Div => {
                        let jb = b.eval_jet2(point)?;
                        if jb.value == 0.0 {
                            return Err(err(DomainErrorKind::DivisionByZero));
                        }
                        ja.mul(&jb.recip())
                    }
                    BinaryOp::Pow => {
                        // exponents are constant (checked at parse time)
                        let c = b.eval(point)?;
                        power_jet(&ja, c).map_err(err)?
                    }
                }
            }
        };
        let finite = jet.value.is_finite()
            && jet.grad.iter().all(|v| v.is_finite())
            && jet.hess.iter().all(|v| v.is_finite());
        if finite {
            Ok(jet)
        } else {
            Err(err(DomainErrorKind::NonFinite))
        }
    }

    /// Formats the expression with the given coordinate names. The output is
    /// fully parenthesised so that re-parsing it reproduces the same tree.
    pub fn display<'a>(&'a self, names: &'a [String]) -> ExprDisplay<'a> {
        ExprDisplay { expr: self, names }
    }
}

fn integer_exponent(c: f64) -> Option<i32> {
    (c.fract() == 0.0 && c.abs() <= i32::MAX as f64).then_some(c as i32)
}

fn power_value(x: f64, c: f64) -> Result<f64, DomainErrorKind> {
    match integer_exponent(c) {
        Some(n) => {
            if x == 0.0 && n < 0 {
                return Err(DomainErrorKind::ZeroBaseNegativeExponent);
            }
            Ok(x.powi(n))
        }
        None => {
            if x <= 0.0 {
                return Err(DomainErrorKind::NegativeBaseRealExponent);
            }
            Ok(x.powf(c))
        }
    }
}

fn power_jet(base: &Jet2, c: f64) -> Result<Jet2, DomainErrorKind> {
    let x = base.value;
    match integer_exponent(c) {
        Some(0) => Ok(Jet2::constant(base.dim(), 1.0)),
        Some(1) => Ok(base.clone()),
        Some(n) => {
            if x == 0.0 && n < 0 {
                return Err(DomainErrorKind::ZeroBaseNegativeExponent);
            }
            let nf = n as f64;
            let d2 = if n == 2 { 2.0 } else { nf * (nf - 1.0) * x.powi(n - 2) };
            Ok(base.chain(x.powi(n), nf * x.powi(n - 1), d2))
        }
        None => {
            if x <= 0.0 {
                return Err(DomainErrorKind::NegativeBaseRealExponent);
            }
            Ok(base.chain(x.powf(c), c * x.powf(c - 1.0), c * (c - 1.0) * x.powf(c - 2.0)))
        }
    }
}

pub struct ExprDisplay<'a> {
    expr: &'a Expr,
    names: &'a [String],
}

impl fmt::Display for ExprDisplay<'_> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write_expr(self.expr, self.names, f)
    }
}

fn write_expr(e: &Expr, names: &[String], f: &mut fmt::Formatter<'_>) -> fmt::Result {
    match &e.kind {
        ExprKind::Const(c) => {
            if *c < 0.0 || (*c == 0.0 && c.is_sign_negative()) {
                write!(f, "(-{:?})", -c)
            } else {
                write!(f, "{c:?}")
            }
        }
        ExprKind::Var(i) => match names.get(*i) {
            Some(name) => f.write_str(name),
            None => write!(f, "${i}"),
        },
        ExprKind::Unary(UnaryOp::Neg, a) => {
            f.write_str("(-")?;
            write_expr(a, names, f)?;
            f.write_str(")")
        }
        ExprKind::Unary(op, a) => {
            write!(f, "{}(", op.name())?;
            write_expr(a, names, f)?;
            f.write_str(")")
        }
        ExprKind::Binary(op, a, b) => {
            f.write_str("(")?;
            write_expr(a, names, f)?;
            write!(f, " {} ", op.symbol())?;
            write_expr(b, names, f)?;
            f.write_str(")")
        }
    }
}

/// Largest relative deviation between the forward-mode derivatives of `expr`
/// and central finite differences with step `h`.
///
/// The gradient is compared against differences of values; the Hessian
/// against differences of forward-mode gradients, which keeps the roundoff
/// floor at `eps / h` instead of `eps / h^2`. Deviations are relative to
/// `max(1, |exact|)`.
pub fn finite_diff_check(expr: &Expr, point: &[f64], h: f64) -> Result<f64, EvalError> {
    let exact = expr.eval_jet2(point)?;
    let k = point.len();
    let mut worst: f64 = 0.0;
    let mut shifted = point.to_vec();
    for j in 0..k {
        shifted[j] = point[j] + h;
        let plus = expr.eval_jet2(&shifted)?;
        shifted[j] = point[j] - h;
        let minus = expr.eval_jet2(&shifted)?;
        shifted[j] = point[j];

        let fd_grad = (plus.value - minus.value) / (2.0 * h);
        worst = worst.max(relative_deviation(fd_grad, exact.grad[j]));
        for i in 0..k {
            let fd_hess = (plus.grad[i] - minus.grad[i]) / (2.0 * h);
            worst = worst.max(relative_deviation(fd_hess, exact.hess[(i, j)]));
        }
    }
    Ok(worst)
}

fn relative_deviation(approx: f64, exact: f64) -> f64 {
    (approx - exact).abs() / exact.abs().max(1.0)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn chart(names: &[&str]) -> Vec<String> {
        names.iter().map(|s| s.to_string()).collect()
    }

    fn parse(text: &str, names: &[&str]) -> Expr {
        parse_expression(text, &chart(names)).unwrap()
    }

    #[test]
    fn bilinear_jet() {
        let e = parse("u*v", &["u", "v"]);
        let j = e.eval_jet2(&[2.0, 3.0]).unwrap();
        assert_eq!(j.value, 6.0);
        assert_eq!(j.grad.as_slice(), &[3.0, 2.0]);
        assert_eq!(j.hess[(0, 1)], 1.0);
        assert_eq!(j.hess[(0, 0)], 0.0);
    }

    #[test]
    fn cosine_maclaurin() {
        let e = parse("cos(v)", &["v"]);
        let j = e.eval_jet2(&[0.0]).unwrap();
        assert_eq!(j.value, 1.0);
        assert_eq!(j.grad[0], 0.0);
        assert_eq!(j.hess[(0, 0)], -1.0);
    }

    #[test]
    fn warping_function_value() {
        let e = parse("sqrt(w^2*(1+u^2))", &["u", "w"]);
        let j = e.eval_jet2(&[1.0, 1.0]).unwrap();
        assert!((j.value - 2f64.sqrt()).abs() < 1e-15);
    }

    #[test]
    fn chain_rule_against_hand_derivative() {
        // d/du exp(sin(u)) = cos(u) exp(sin(u))
        // d2/du2 = (cos^2 - sin) exp(sin)
        let e = parse("exp(sin(u))", &["u"]);
        let u: f64 = 0.3;
        let j = e.eval_jet2(&[u]).unwrap();
        let ex = u.sin().exp();
        assert!((j.grad[0] - u.cos() * ex).abs() < 1e-15);
        assert!((j.hess[(0, 0)] - (u.cos().powi(2) - u.sin()) * ex).abs() < 1e-15);
    }

    #[test]
    fn quotient_rule_against_hand_derivative() {
        // f = u / (1 + v^2); f_uv = -2v / (1+v^2)^2
        let e = parse("u/(1+v^2)", &["u", "v"]);
        let (u, v) = (0.7, 1.3);
        let j = e.eval_jet2(&[u, v]).unwrap();
        let s: f64 = 1.0 + v * v;
        assert!((j.hess[(0, 1)] + 2.0 * v / (s * s)).abs() < 1e-15);
        assert!((j.grad[1] + 2.0 * u * v / (s * s)).abs() < 1e-15);
    }

    #[test]
    fn domain_errors_carry_location() {
        let e = parse("1 + log(u - 2)", &["u"]);
        let err = e.eval_jet2(&[1.0]).unwrap_err();
        assert_eq!(err.kind, DomainErrorKind::LogNonPositive);
        assert_eq!(err.span.start, 4);

        let e = parse("acos(u)", &["u"]);
        assert_eq!(
            e.eval_jet2(&[1.0]).unwrap_err().kind,
            DomainErrorKind::AcosOutOfRange
        );
        assert_eq!(e.eval(&[1.0]).unwrap(), 0.0);

        let e = parse("1/(u-u)", &["u"]);
        assert_eq!(
            e.eval_jet2(&[3.0]).unwrap_err().kind,
            DomainErrorKind::DivisionByZero
        );

        let e = parse("u^0.5", &["u"]);
        assert_eq!(
            e.eval_jet2(&[-1.0]).unwrap_err().kind,
            DomainErrorKind::NegativeBaseRealExponent
        );
        // integer powers accept negative bases
        assert_eq!(parse("u^3", &["u"]).eval_jet2(&[-2.0]).unwrap().value, -8.0);
    }

    #[test]
    fn finite_differences_polynomial() {
        let e = parse("u^3", &["u"]);
        assert!(finite_diff_check(&e, &[1.0], 1e-5).unwrap() < 1e-8);
    }

    #[test]
    fn finite_differences_sine() {
        // central difference oracle: truncation h^2/6 * |cos| ~ 1.3e-11
        let e = parse("sin(v)", &["v"]);
        assert!(finite_diff_check(&e, &[0.7], 1e-5).unwrap() < 1e-7);
    }

    #[test]
    fn finite_differences_constant_is_exact() {
        let e = parse("3.5", &["u", "v"]);
        assert_eq!(finite_diff_check(&e, &[0.2, 0.4], 1e-5).unwrap(), 0.0);
    }

    #[test]
    fn display_round_trips() {
        let names = chart(&["u", "v", "w"]);
        for text in [
            "w*u*cos(v)",
            "acos((u^2-1)/(u^2+1))",
            "-u^2^-1 + 2e-3*abs(v)",
            "sqrt(w^2*(1+u^2))",
        ] {
            let e = parse_expression(text, &names).unwrap();
            let printed = e.display(&names).to_string();
            let again = parse_expression(&printed, &names).unwrap();
            assert_eq!(e, again, "{text} -> {printed}");
        }
    }
}
