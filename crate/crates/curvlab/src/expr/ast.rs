use num_rational::BigRational;
use num_traits::{One, Signed, Zero};

/// Symbolic expression over a chart's coordinates.
///
/// Constants are exact rationals in lowest terms; the only transcendental
/// node is `exp`. Coordinates are stored as indices into the owning chart's
/// coordinate list, so rendering an `Expr` needs that list.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Expr {
    Const(BigRational),
    Coord(usize),
    Neg(Box<Expr>),
    Sum(Vec<Expr>),
    Product(Vec<Expr>),
    Quot(Box<Expr>, Box<Expr>),
    Pow(Box<Expr>, i32),
    Exp(Box<Expr>),
}

impl Expr {
    pub fn int(v: i64) -> Self {
        Expr::Const(BigRational::from_integer(v.into()))
    }

    /// Exact rational constant. `den` must be nonzero.
    pub fn rational(num: i64, den: i64) -> Self {
        Expr::Const(BigRational::new(num.into(), den.into()))
    }

    pub fn zero() -> Self {
        Expr::Const(BigRational::zero())
    }

    pub fn one() -> Self {
        Expr::Const(BigRational::one())
    }

    pub fn coord(i: usize) -> Self {
        Expr::Coord(i)
    }

    pub fn is_zero_const(&self) -> bool {
        matches!(self, Expr::Const(c) if c.is_zero())
    }

    pub fn is_one_const(&self) -> bool {
        matches!(self, Expr::Const(c) if c.is_one())
    }

    pub fn as_const(&self) -> Option<&BigRational> {
        match self {
            Expr::Const(c) => Some(c),
            _ => None,
        }
    }

    /// Renders the expression in the surface syntax accepted by the parser.
    /// Coordinate indices are resolved against `coords`; out-of-range indices
    /// render as `#k` and will not reparse.
    pub fn render(&self, coords: &[String]) -> String {
        let mut out = String::new();
        fmt_prec(self, coords, 0, &mut out);
        out
    }
}

/// Precedence levels: 0 sum, 1 product/quotient/negation, 2 power, 3 atom.
fn level(e: &Expr) -> u8 {
    match e {
        Expr::Sum(_) => 0,
        Expr::Product(_) | Expr::Quot(..) | Expr::Neg(_) => 1,
        Expr::Const(c) => {
            if c.is_negative() || !c.denom().is_one() {
                1
            } else {
                3
            }
        }
        Expr::Pow(..) => 2,
        Expr::Coord(_) | Expr::Exp(_) => 3,
    }
}

fn fmt_prec(e: &Expr, coords: &[String], lvl: u8, out: &mut String) {
    let wrap = level(e) < lvl;
    if wrap {
        out.push('(');
    }
    match e {
        Expr::Const(c) => out.push_str(&c.to_string()),
        Expr::Coord(i) => match coords.get(*i) {
            Some(name) => out.push_str(name),
            None => out.push_str(&format!("#{i}")),
        },
        Expr::Neg(inner) => {
            // operand at level 2: "--x" is not valid surface syntax, a
            // nested negation or product needs its parentheses
            out.push('-');
            fmt_prec(inner, coords, 2, out);
        }
        Expr::Sum(items) => {
            for (k, item) in items.iter().enumerate() {
                if k == 0 {
                    fmt_prec(item, coords, 1, out);
                    continue;
                }
                match split_sign(item) {
                    Some(abs) => {
                        out.push_str(" - ");
                        fmt_prec(&abs, coords, 1, out);
                    }
                    None => {
                        out.push_str(" + ");
                        fmt_prec(item, coords, 1, out);
                    }
                }
            }
            if items.is_empty() {
                out.push('0');
            }
        }
        Expr::Product(items) => fmt_product(items, coords, out),
        Expr::Quot(n, d) => {
            fmt_prec(n, coords, 1, out);
            out.push('/');
            fmt_prec(d, coords, 2, out);
        }
        Expr::Pow(b, k) => {
            fmt_prec(b, coords, 3, out);
            out.push('^');
            out.push_str(&k.to_string());
        }
        Expr::Exp(u) => {
            out.push_str("exp(");
            fmt_prec(u, coords, 0, out);
            out.push(')');
        }
    }
    if wrap {
        out.push(')');
    }
}

/// If `e` is manifestly negative (a negation, a negative constant, or a
/// product led by a negative constant), returns its absolute value.
fn split_sign(e: &Expr) -> Option<Expr> {
    match e {
        Expr::Neg(inner) => Some((**inner).clone()),
        Expr::Const(c) if c.is_negative() => Some(Expr::Const(-c.clone())),
        Expr::Product(items) => match items.first() {
            Some(Expr::Const(c)) if c.is_negative() => {
                let mut rest = items.clone();
                rest[0] = Expr::Const(-c.clone());
                Some(Expr::Product(rest))
            }
            _ => None,
        },
        _ => None,
    }
}

fn fmt_product(items: &[Expr], coords: &[String], out: &mut String) {
    if items.is_empty() {
        out.push('1');
        return;
    }
    // A leading constant renders bare so canonical monomials read as
    // "-2*x1" or "(3/4)*exp(x1)" rather than "(-2)*x1".
    let mut rest = items;
    if let Expr::Const(c) = &items[0] {
        if c.is_negative() {
            out.push('-');
        }
        let mag = c.abs();
        rest = &items[1..];
        if rest.is_empty() {
            out.push_str(&mag.to_string());
            return;
        }
        if !mag.is_one() {
            if mag.denom().is_one() {
                out.push_str(&mag.to_string());
            } else {
                out.push('(');
                out.push_str(&mag.to_string());
                out.push(')');
            }
            out.push('*');
        }
    }
    for (k, item) in rest.iter().enumerate() {
        if k > 0 {
            out.push('*');
        }
        fmt_prec(item, coords, 2, out);
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn xy() -> Vec<String> {
        vec!["x1".into(), "x2".into()]
    }

    #[test]
    fn renders_signed_monomials() {
        let e = Expr::Product(vec![Expr::int(-2), Expr::Coord(0)]);
        assert_eq!(e.render(&xy()), "-2*x1");
        let e = Expr::Product(vec![Expr::rational(3, 4), Expr::Exp(Box::new(Expr::Coord(0)))]);
        assert_eq!(e.render(&xy()), "(3/4)*exp(x1)");
    }

    #[test]
    fn renders_quotients_with_minimal_parens() {
        let e = Expr::Quot(
            Box::new(Expr::int(1)),
            Box::new(Expr::Product(vec![Expr::Coord(0), Expr::Coord(1)])),
        );
        assert_eq!(e.render(&xy()), "1/(x1*x2)");
        let e = Expr::Quot(
            Box::new(Expr::Product(vec![Expr::int(-1), Expr::Coord(1)])),
            Box::new(Expr::Pow(Box::new(Expr::Coord(0)), 2)),
        );
        assert_eq!(e.render(&xy()), "-x2/x1^2");
    }

    #[test]
    fn renders_sums_with_sign_splitting() {
        let e = Expr::Sum(vec![
            Expr::Coord(0),
            Expr::Product(vec![Expr::int(-3), Expr::Coord(1)]),
            Expr::int(1),
        ]);
        assert_eq!(e.render(&xy()), "x1 - 3*x2 + 1");
    }
}
