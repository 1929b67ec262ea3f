//! Text syntax for linear equality restrictions, one equation per line:
//!
//! ```text
//! equation := expr '=' expr
//! expr     := ['+'|'-'] term (('+'|'-') term)*
//! term     := number | [number ['*']] var
//! var      := 'b' integer          (1-based coefficient index)
//! ```
//!
//! Example: `b3 + 2 b4 + b5 = 10`. Variable terms are collected on the left
//! and constants on the right; repeated variables accumulate.

use std::fmt::Write as _;

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};
use crate::model::RestrictionSet;

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Term {
    /// `coefficient · b{index}` with a 1-based index.
    Var { coefficient: f64, index: usize },
    Const(f64),
}

/// Both sides of a parsed equation, signs folded into the coefficients.
#[derive(Debug, Clone, PartialEq)]
pub struct RestrictionAst {
    pub lhs_terms: Vec<Term>,
    pub rhs_terms: Vec<Term>,
}

#[derive(Debug, Clone, Copy, PartialEq)]
enum Tok {
    Num(f64),
    Var(usize),
    Plus,
    Minus,
    Star,
    Eq,
}

/// Tokens with their 1-based column.
fn tokenize(line: &str) -> Result<Vec<(Tok, usize)>> {
    let chars: Vec<char> = line.chars().collect();
    let mut out = Vec::new();
    let mut i = 0;
    while i < chars.len() {
        let c = chars[i];
        let col = i + 1;
        match c {
            c if c.is_whitespace() => i += 1,
            '+' => {
                out.push((Tok::Plus, col));
                i += 1;
            }
            '-' => {
                out.push((Tok::Minus, col));
                i += 1;
            }
            '*' => {
                out.push((Tok::Star, col));
                i += 1;
            }
            '=' => {
                out.push((Tok::Eq, col));
                i += 1;
            }
            'b' | 'B' => {
                let start = i + 1;
                let mut end = start;
                while end < chars.len() && chars[end].is_ascii_digit() {
                    end += 1;
                }
                if end == start {
                    return Err(Error::Syntax {
                        col,
                        msg: "expected coefficient index after 'b'".into(),
                    });
                }
                let digits: String = chars[start..end].iter().collect();
                let index = digits.parse::<usize>().map_err(|_| Error::Syntax {
                    col,
                    msg: format!("index {digits} is too large"),
                })?;
                out.push((Tok::Var(index), col));
                i = end;
            }
            c if c.is_ascii_digit() || c == '.' => {
                let end = scan_number(&chars, i);
                let text: String = chars[i..end].iter().collect();
                let value = text.parse::<f64>().map_err(|_| Error::Syntax {
                    col,
                    msg: format!("malformed number {text:?}"),
                })?;
                out.push((Tok::Num(value), col));
                i = end;
            }
            other => {
                return Err(Error::Syntax {
                    col,
                    msg: format!("unexpected character {other:?}"),
                })
            }
        }
    }
    Ok(out)
}

/// End of a decimal literal `digits[.digits][(e|E)[+-]digits]` starting at `i`.
fn scan_number(chars: &[char], mut i: usize) -> usize {
    while i < chars.len() && (chars[i].is_ascii_digit() || chars[i] == '.') {
        i += 1;
    }
    if i < chars.len() && (chars[i] == 'e' || chars[i] == 'E') {
        let mut j = i + 1;
        if j < chars.len() && (chars[j] == '+' || chars[j] == '-') {
            j += 1;
        }
        if j < chars.len() && chars[j].is_ascii_digit() {
            while j < chars.len() && chars[j].is_ascii_digit() {
                j += 1;
            }
            return j;
        }
    }
    i
}

struct Parser {
    toks: Vec<(Tok, usize)>,
    pos: usize,
    end_col: usize,
}

impl Parser {
    fn peek(&self) -> Option<Tok> {
        self.toks.get(self.pos).map(|t| t.0)
    }

    fn col(&self) -> usize {
        self.toks.get(self.pos).map_or(self.end_col, |t| t.1)
    }

    fn err<T>(&self, msg: impl Into<String>) -> Result<T> {
        Err(Error::Syntax {
            col: self.col(),
            msg: msg.into(),
        })
    }

    fn expr(&mut self) -> Result<Vec<Term>> {
        let mut terms = Vec::new();
        let mut sign = match self.peek() {
            Some(Tok::Plus) => {
                self.pos += 1;
                1.0
            }
            Some(Tok::Minus) => {
                self.pos += 1;
                -1.0
            }
            _ => 1.0,
        };
        loop {
            terms.push(self.term(sign)?);
            sign = match self.peek() {
                Some(Tok::Plus) => 1.0,
                Some(Tok::Minus) => -1.0,
                _ => return Ok(terms),
            };
            self.pos += 1;
        }
    }

    fn term(&mut self, sign: f64) -> Result<Term> {
        match self.peek() {
            Some(Tok::Var(index)) => {
                self.pos += 1;
                Ok(Term::Var {
                    coefficient: sign,
                    index,
                })
            }
            Some(Tok::Num(value)) => {
                self.pos += 1;
                let starred = self.peek() == Some(Tok::Star);
                if starred {
                    self.pos += 1;
                }
                match self.peek() {
                    Some(Tok::Var(index)) => {
                        self.pos += 1;
                        Ok(Term::Var {
                            coefficient: sign * value,
                            index,
                        })
                    }
                    _ if starred => self.err("expected variable after '*'"),
                    _ => Ok(Term::Const(sign * value)),
                }
            }
            Some(_) => self.err("expected a number or variable"),
            None => self.err("unexpected end of equation"),
        }
    }
}

/// Parses one equation into its syntax tree, checking indices against `p`.
pub fn parse_ast(line: &str, p: usize) -> Result<RestrictionAst> {
    let toks = tokenize(line)?;
    let mut parser = Parser {
        toks,
        pos: 0,
        end_col: line.chars().count() + 1,
    };
    let lhs_terms = parser.expr()?;
    if parser.peek() != Some(Tok::Eq) {
        return parser.err("expected '='");
    }
    parser.pos += 1;
    let rhs_terms = parser.expr()?;
    if parser.peek().is_some() {
        return parser.err("unexpected trailing input");
    }

    let mut any_var = false;
    for term in lhs_terms.iter().chain(&rhs_terms) {
        if let Term::Var { index, .. } = *term {
            any_var = true;
            if index == 0 || index > p {
                return Err(Error::IndexOutOfRange { index, p });
            }
        }
    }
    if !any_var {
        return Err(Error::EmptyEquation);
    }
    Ok(RestrictionAst {
        lhs_terms,
        rhs_terms,
    })
}

/// Parses one equation into a restriction row of length `p` and its
/// right-hand side.
pub fn parse_restriction(line: &str, p: usize) -> Result<(DVector<f64>, f64)> {
    let ast = parse_ast(line, p)?;
    let mut row = DVector::zeros(p);
    let mut rhs = 0.0;
    for (side, terms) in [(1.0, &ast.lhs_terms), (-1.0, &ast.rhs_terms)] {
        for term in terms {
            match *term {
                Term::Var { coefficient, index } => row[index - 1] += side * coefficient,
                Term::Const(c) => rhs -= side * c,
            }
        }
    }
    Ok((row, rhs))
}

/// Parses a restriction file: one equation per non-empty line, `#` starts a
/// comment line. LF and CRLF line endings are accepted.
pub fn parse_restriction_file(text: &str, p: usize) -> Result<RestrictionSet> {
    let mut rows = Vec::new();
    let mut rhs = Vec::new();
    for (i, raw) in text.lines().enumerate() {
        let line = raw.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let (row, r) = parse_restriction(line, p).map_err(|e| Error::Line {
            line: i + 1,
            source: Box::new(e),
        })?;
        rows.push(row);
        rhs.push(r);
    }
    if rows.is_empty() {
        return Err(Error::EmptyEquation);
    }
    let rmat = DMatrix::from_fn(rows.len(), p, |i, j| rows[i][j]);
    RestrictionSet::new(rmat, DVector::from_vec(rhs), p)
}

/// Renders restrictions in the canonical `c*bj + ... = r` form accepted by
/// [`parse_restriction_file`]. Values use Rust's shortest round-trip
/// formatting, so reparsing is exact.
pub fn render_restrictions(set: &RestrictionSet) -> String {
    let mut out = String::new();
    for i in 0..set.m() {
        let mut first = true;
        for j in 0..set.p() {
            let c = set.rmat()[(i, j)];
            if c == 0.0 {
                continue;
            }
            match (first, c < 0.0) {
                (true, false) => write!(out, "{c}*b{}", j + 1),
                (true, true) => write!(out, "-{}*b{}", -c, j + 1),
                (false, false) => write!(out, " + {c}*b{}", j + 1),
                (false, true) => write!(out, " - {}*b{}", -c, j + 1),
            }
            .expect("write to String");
            first = false;
        }
        writeln!(out, " = {}", set.rvec()[i]).expect("write to String");
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn equality_of_two_coefficients() {
        let (row, rhs) = parse_restriction("b2 = b4", 6).unwrap();
        assert_eq!(row.as_slice(), &[0.0, 1.0, 0.0, -1.0, 0.0, 0.0]);
        assert_eq!(rhs, 0.0);
    }

    #[test]
    fn weighted_sum() {
        let (row, rhs) = parse_restriction("b3 + 2 b4 + b5 = 10", 6).unwrap();
        assert_eq!(row.as_slice(), &[0.0, 0.0, 1.0, 2.0, 1.0, 0.0]);
        assert_eq!(rhs, 10.0);
    }

    #[test]
    fn single_pin() {
        let (row, rhs) = parse_restriction("b1 = 0", 3).unwrap();
        assert_eq!(row.as_slice(), &[1.0, 0.0, 0.0]);
        assert_eq!(rhs, 0.0);
    }

    #[test]
    fn star_is_optional_and_terms_accumulate() {
        assert_eq!(
            parse_restriction("2*b1 - 0.5*b2 = 3", 2).unwrap(),
            parse_restriction("2 b1 - 0.5 b2 = 3", 2).unwrap()
        );
        let (row, rhs) = parse_restriction("b1 + b1 = 2", 2).unwrap();
        assert_eq!(row[0], 2.0);
        assert_eq!(rhs, 2.0);
    }

    #[test]
    fn constants_move_right_and_variables_move_left() {
        let (row, rhs) = parse_restriction("-b1 + 3 = 2.5e1 - 4b2 + 1", 2).unwrap();
        assert_eq!(row.as_slice(), &[-1.0, 4.0]);
        assert_eq!(rhs, 23.0);
    }

    #[test]
    fn syntax_error_carries_column() {
        assert_eq!(
            parse_restriction("b1 + = 2", 3).unwrap_err(),
            Error::Syntax {
                col: 6,
                msg: "expected a number or variable".into()
            }
        );
        assert!(matches!(
            parse_restriction("b1 + b2", 3).unwrap_err(),
            Error::Syntax { col: 8, .. }
        ));
        assert!(matches!(
            parse_restriction("b1 = x", 3).unwrap_err(),
            Error::Syntax { col: 6, .. }
        ));
        assert!(matches!(
            parse_restriction("2* = b1", 3).unwrap_err(),
            Error::Syntax { col: 4, .. }
        ));
    }

    #[test]
    fn index_range() {
        assert_eq!(
            parse_restriction("b7 = 1", 6).unwrap_err(),
            Error::IndexOutOfRange { index: 7, p: 6 }
        );
        assert_eq!(
            parse_restriction("b0 = 1", 6).unwrap_err(),
            Error::IndexOutOfRange { index: 0, p: 6 }
        );
    }

    #[test]
    fn constant_only_equation_is_empty() {
        assert_eq!(parse_restriction("1 = 1", 3).unwrap_err(), Error::EmptyEquation);
    }

    #[test]
    fn simulation_restriction_file() {
        let text = "# prior information\nb2 = b4\r\nb3 + 2 b4 + b5 = 10\n\n";
        let set = parse_restriction_file(text, 6).unwrap();
        assert_eq!(set.m(), 2);
        assert_eq!(
            set.rmat().row(0).iter().copied().collect::<Vec<_>>(),
            vec![0.0, 1.0, 0.0, -1.0, 0.0, 0.0]
        );
        assert_eq!(
            set.rmat().row(1).iter().copied().collect::<Vec<_>>(),
            vec![0.0, 0.0, 1.0, 2.0, 1.0, 0.0]
        );
        assert_eq!(set.rvec().as_slice(), &[0.0, 10.0]);
    }

    #[test]
    fn research_expenditure_restriction_file() {
        let text = "b1+b2+b3+b4+b5=1.2170\nb2+3 b3+b4+2 b5=1.0904\n";
        let set = parse_restriction_file(text, 5).unwrap();
        let expected = DMatrix::from_row_slice(
            2,
            5,
            &[1.0, 1.0, 1.0, 1.0, 1.0, 0.0, 1.0, 3.0, 1.0, 2.0],
        );
        assert_eq!(set.rmat(), &expected);
        assert_eq!(set.rvec().as_slice(), &[1.2170, 1.0904]);
    }

    #[test]
    fn comments_only_file_is_empty() {
        assert_eq!(
            parse_restriction_file("# nothing\n\n#still nothing\n", 3).unwrap_err(),
            Error::EmptyEquation
        );
    }

    #[test]
    fn file_errors_report_line_and_rank() {
        let err = parse_restriction_file("b1 = 0\nb9 = 1\n", 3).unwrap_err();
        assert_eq!(
            err,
            Error::Line {
                line: 2,
                source: Box::new(Error::IndexOutOfRange { index: 9, p: 3 })
            }
        );
        let err = parse_restriction_file("b1 + b2 = 0\n2 b1 + 2 b2 = 1\n", 3).unwrap_err();
        assert_eq!(err, Error::RankDeficient { rank: 1, rows: 2 });
    }

    #[test]
    fn render_simulation_restrictions() {
        let set = parse_restriction_file("b2 = b4\nb3 + 2 b4 + b5 = 10\n", 6).unwrap();
        assert_eq!(render_restrictions(&set), "1*b2 - 1*b4 = 0\n1*b3 + 2*b4 + 1*b5 = 10\n");
    }
}
