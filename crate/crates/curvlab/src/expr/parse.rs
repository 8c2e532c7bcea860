//! Expression parser.
//!
//! Grammar (whitespace insignificant, positions are byte offsets):
//!
//! ```text
//! expr   := term (('+' | '-') term)*
//! term   := factor (('*' | '/') factor)*
//! factor := ['-'] atom ['^' integer]
//! atom   := number | symbol | '(' expr ')' | 'exp' '(' expr ')'
//! ```
//!
//! `number` is a decimal literal: digits with an optional fractional part.
//! Decimals become exact power-of-ten rationals (`0.25` is `1/4`), and a
//! quotient of two literals folds into a single rational constant, so `3/4`
//! parses to the constant `3/4` rather than a division node.
//!
//! `integer` after `^` is an optional minus sign and digits, nothing else:
//! parenthesised or fractional exponents are rejected as non-integer rather
//! than silently truncated. Unary minus binds looser than `^`, so `-x^2`
//! parses as `-(x^2)`.
//!
//! `exp` is a reserved word naming the exponential and cannot be used as a
//! coordinate. Symbols are resolved against the chart's coordinate list at
//! parse time; there are no free variables in a parsed expression.

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{Pow, Zero};

use super::ast::Expr;
use super::error::ParseError;

/// Check a coordinate list before any parsing against it: nonempty, distinct
/// identifier names, none of them the reserved word `exp`.
pub fn validate_coords(coords: &[String]) -> Result<(), ParseError> {
    if coords.is_empty() {
        return Err(ParseError::InvalidCoordinates(
            "coordinate list is empty".into(),
        ));
    }
    for (i, name) in coords.iter().enumerate() {
        if !is_identifier(name) {
            return Err(ParseError::InvalidCoordinates(format!(
                "coordinate {i} ({name:?}) is not an identifier"
            )));
        }
        if name == "exp" {
            return Err(ParseError::InvalidCoordinates(
                "\"exp\" is reserved and cannot name a coordinate".into(),
            ));
        }
        if coords[..i].iter().any(|prev| prev == name) {
            return Err(ParseError::InvalidCoordinates(format!(
                "coordinate name {name:?} appears twice"
            )));
        }
    }
    Ok(())
}

fn is_identifier(s: &str) -> bool {
    let mut bytes = s.bytes();
    match bytes.next() {
        Some(b) if b.is_ascii_alphabetic() || b == b'_' => {}
        _ => return false,
    }
    bytes.all(|b| b.is_ascii_alphanumeric() || b == b'_')
}

/// Parse `src` with symbols resolved against `coords`.
pub fn parse_expr(src: &str, coords: &[String]) -> Result<Expr, ParseError> {
    validate_coords(coords)?;
    let mut p = Parser { src: src.as_bytes(), pos: 0, coords };
    let e = p.expr()?;
    p.skip_ws();
    if p.pos != p.src.len() {
        return Err(p.syntax("unexpected trailing input"));
    }
    Ok(e)
}

struct Parser<'a> {
    src: &'a [u8],
    pos: usize,
    coords: &'a [String],
}

impl<'a> Parser<'a> {
    fn skip_ws(&mut self) {
        while matches!(self.src.get(self.pos), Some(b' ' | b'\t' | b'\n' | b'\r')) {
            self.pos += 1;
        }
    }

    fn peek(&mut self) -> Option<u8> {
        self.skip_ws();
        self.src.get(self.pos).copied()
    }

    fn syntax(&self, msg: &str) -> ParseError {
        ParseError::Syntax { pos: self.pos, msg: msg.into() }
    }

    fn expr(&mut self) -> Result<Expr, ParseError> {
        let first = self.term()?;
        let mut items = vec![first];
        loop {
            match self.peek() {
                Some(b'+') => {
                    self.pos += 1;
                    items.push(self.term()?);
                }
                Some(b'-') => {
                    self.pos += 1;
                    items.push(neg_node(self.term()?));
                }
                _ => break,
            }
        }
        Ok(if items.len() == 1 { items.pop().unwrap() } else { Expr::Sum(items) })
    }

    fn term(&mut self) -> Result<Expr, ParseError> {
        let mut acc = self.factor()?;
        loop {
            match self.peek() {
                Some(b'*') => {
                    self.pos += 1;
                    let rhs = self.factor()?;
                    acc = product_join(acc, rhs);
                }
                Some(b'/') => {
                    self.pos += 1;
                    let at = self.pos;
                    let rhs = self.factor()?;
                    acc = quot_fold(acc, rhs).ok_or(ParseError::Syntax {
                        pos: at,
                        msg: "division by the literal zero".into(),
                    })?;
                }
                _ => break,
            }
        }
        Ok(acc)
    }

    fn factor(&mut self) -> Result<Expr, ParseError> {
        if self.peek() == Some(b'-') {
            self.pos += 1;
            let inner = self.powered_atom()?;
            return Ok(neg_node(inner));
        }
        self.powered_atom()
    }

    fn powered_atom(&mut self) -> Result<Expr, ParseError> {
        let base = self.atom()?;
        if self.peek() != Some(b'^') {
            return Ok(base);
        }
        self.pos += 1;
        let k = self.integer_exponent()?;
        Ok(pow_fold(base, k))
    }

    fn integer_exponent(&mut self) -> Result<i32, ParseError> {
        self.skip_ws();
        let at = self.pos;
        let negative = if self.src.get(self.pos) == Some(&b'-') {
            self.pos += 1;
            true
        } else {
            false
        };
        match self.src.get(self.pos) {
            Some(b) if b.is_ascii_digit() => {}
            _ => return Err(ParseError::NonIntegerExponent { pos: at }),
        }
        let mut value: i64 = 0;
        let mut overflow = false;
        while let Some(b) = self.src.get(self.pos) {
            if !b.is_ascii_digit() {
                break;
            }
            value = value.saturating_mul(10).saturating_add((b - b'0') as i64);
            if value > i32::MAX as i64 + 1 {
                overflow = true;
            }
            self.pos += 1;
        }
        if self.src.get(self.pos) == Some(&b'.') {
            return Err(ParseError::NonIntegerExponent { pos: at });
        }
        let signed = if negative { -value } else { value };
        if overflow || signed > i32::MAX as i64 || signed < i32::MIN as i64 {
            return Err(ParseError::ExponentOverflow { pos: at });
        }
        Ok(signed as i32)
    }

    fn atom(&mut self) -> Result<Expr, ParseError> {
        match self.peek() {
            Some(b'(') => {
                self.pos += 1;
                let inner = self.expr()?;
                if self.peek() != Some(b')') {
                    return Err(self.syntax("expected ')'"));
                }
                self.pos += 1;
                Ok(inner)
            }
            Some(b) if b.is_ascii_digit() => self.number(),
            Some(b) if b.is_ascii_alphabetic() || b == b'_' => self.symbol(),
            _ => Err(self.syntax("expected a number, symbol, or '('")),
        }
    }

    fn number(&mut self) -> Result<Expr, ParseError> {
        let start = self.pos;
        while matches!(self.src.get(self.pos), Some(b) if b.is_ascii_digit()) {
            self.pos += 1;
        }
        let mut frac_digits: u32 = 0;
        if self.src.get(self.pos) == Some(&b'.') {
            self.pos += 1;
            let frac_start = self.pos;
            while matches!(self.src.get(self.pos), Some(b) if b.is_ascii_digit()) {
                self.pos += 1;
            }
            if self.pos == frac_start {
                return Err(self.syntax("expected digits after decimal point"));
            }
            frac_digits = (self.pos - frac_start) as u32;
        }
        let digits: String = std::str::from_utf8(&self.src[start..self.pos])
            .expect("digits are ascii")
            .chars()
            .filter(|c| *c != '.')
            .collect();
        let numer: BigInt = digits.parse().expect("digit run parses");
        let denom = BigInt::from(10u32).pow(frac_digits);
        Ok(Expr::Const(BigRational::new(numer, denom)))
    }

    fn symbol(&mut self) -> Result<Expr, ParseError> {
        let start = self.pos;
        while matches!(self.src.get(self.pos), Some(b) if b.is_ascii_alphanumeric() || *b == b'_')
        {
            self.pos += 1;
        }
        let name = std::str::from_utf8(&self.src[start..self.pos])
            .expect("identifier is ascii")
            .to_owned();
        if name == "exp" {
            if self.peek() != Some(b'(') {
                return Err(ParseError::Syntax {
                    pos: self.pos,
                    msg: "expected '(' after exp".into(),
                });
            }
            self.pos += 1;
            let arg = self.expr()?;
            if self.peek() != Some(b')') {
                return Err(self.syntax("expected ')'"));
            }
            self.pos += 1;
            return Ok(Expr::Exp(Box::new(arg)));
        }
        match self.coords.iter().position(|c| *c == name) {
            Some(i) => Ok(Expr::Coord(i)),
            None => Err(ParseError::UnknownSymbol { pos: start, name }),
        }
    }
}

/// Negation with constant folding, so `-2` is the constant `-2`.
fn neg_node(e: Expr) -> Expr {
    match e {
        Expr::Const(c) => Expr::Const(-c),
        Expr::Neg(inner) => *inner,
        other => Expr::Neg(Box::new(other)),
    }
}

fn product_join(lhs: Expr, rhs: Expr) -> Expr {
    match lhs {
        Expr::Product(mut items) => {
            items.push(rhs);
            Expr::Product(items)
        }
        other => Expr::Product(vec![other, rhs]),
    }
}

/// Division; folds literal/literal into one rational. `None` on a literal
/// zero divisor (a symbolic divisor that happens to vanish is fine here and
/// surfaces at evaluation instead).
fn quot_fold(lhs: Expr, rhs: Expr) -> Option<Expr> {
    if let (Expr::Const(a), Expr::Const(b)) = (&lhs, &rhs) {
        if b.is_zero() {
            return None;
        }
        return Some(Expr::Const(a / b));
    }
    if matches!(&rhs, Expr::Const(b) if b.is_zero()) {
        return None;
    }
    Some(Expr::Quot(Box::new(lhs), Box::new(rhs)))
}

fn pow_fold(base: Expr, k: i32) -> Expr {
    if k == 1 {
        return base;
    }
    if let Expr::Const(c) = &base {
        if k >= 0 || !c.is_zero() {
            return Expr::Const(c.pow(k));
        }
    }
    if k == 0 {
        // base^0 for non-literal bases is left as a node; simplify decides
        // nothing here since the base could vanish at some points.
        return Expr::Pow(Box::new(base), 0);
    }
    Expr::Pow(Box::new(base), k)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn coords() -> Vec<String> {
        vec!["x1".into(), "x2".into()]
    }

    fn parse(src: &str) -> Expr {
        parse_expr(src, &coords()).unwrap()
    }

    #[test]
    fn product_with_power_has_expected_shape() {
        let e = parse("2*(x1)^2");
        assert_eq!(
            e,
            Expr::Product(vec![Expr::int(2), Expr::Pow(Box::new(Expr::Coord(0)), 2)])
        );
    }

    #[test]
    fn decimal_literals_are_power_of_ten_rationals() {
        assert_eq!(parse("0.25"), Expr::Const(BigRational::new(1.into(), 4.into())));
        assert_eq!(parse("2.50"), Expr::Const(BigRational::new(5.into(), 2.into())));
    }

    #[test]
    fn literal_fractions_fold_to_constants() {
        assert_eq!(parse("3/4"), Expr::Const(BigRational::new(3.into(), 4.into())));
        assert_eq!(parse("-1/2"), Expr::Const(BigRational::new((-1).into(), 2.into())));
    }

    #[test]
    fn unary_minus_binds_looser_than_power() {
        assert_eq!(
            parse("-x1^2"),
            Expr::Neg(Box::new(Expr::Pow(Box::new(Expr::Coord(0)), 2)))
        );
    }

    #[test]
    fn division_is_left_associative() {
        let e = parse("x1/x2/x1");
        assert_eq!(
            e,
            Expr::Quot(
                Box::new(Expr::Quot(Box::new(Expr::Coord(0)), Box::new(Expr::Coord(1)))),
                Box::new(Expr::Coord(0)),
            )
        );
    }

    #[test]
    fn exp_requires_parentheses_and_is_reserved() {
        assert!(matches!(
            parse_expr("exp x1", &coords()),
            Err(ParseError::Syntax { .. })
        ));
        let bad: Vec<String> = vec!["exp".into()];
        assert!(matches!(
            parse_expr("exp", &bad),
            Err(ParseError::InvalidCoordinates(_))
        ));
    }

    #[test]
    fn unknown_symbol_reports_byte_offset() {
        match parse_expr("x1 + y2", &coords()) {
            Err(ParseError::UnknownSymbol { pos, name }) => {
                assert_eq!(pos, 5);
                assert_eq!(name, "y2");
            }
            other => panic!("expected unknown symbol, got {other:?}"),
        }
    }

    #[test]
    fn non_integer_exponents_are_rejected() {
        assert!(matches!(
            parse_expr("x1^(2)", &coords()),
            Err(ParseError::NonIntegerExponent { .. })
        ));
        assert!(matches!(
            parse_expr("x1^2.5", &coords()),
            Err(ParseError::NonIntegerExponent { .. })
        ));
        assert!(matches!(
            parse_expr("x1^x2", &coords()),
            Err(ParseError::NonIntegerExponent { .. })
        ));
    }

    #[test]
    fn huge_exponents_overflow_cleanly() {
        assert!(matches!(
            parse_expr("x1^99999999999", &coords()),
            Err(ParseError::ExponentOverflow { .. })
        ));
        assert!(parse_expr("x1^-2147483648", &coords()).is_ok());
        assert!(matches!(
            parse_expr("x1^-2147483649", &coords()),
            Err(ParseError::ExponentOverflow { .. })
        ));
    }

    #[test]
    fn trailing_input_is_an_error() {
        assert!(matches!(
            parse_expr("x1 x2", &coords()),
            Err(ParseError::Syntax { pos: 3, .. })
        ));
    }

    #[test]
    fn duplicate_coordinates_are_rejected() {
        let bad: Vec<String> = vec!["x".into(), "x".into()];
        assert!(matches!(
            parse_expr("x", &bad),
            Err(ParseError::InvalidCoordinates(_))
        ));
    }
}
