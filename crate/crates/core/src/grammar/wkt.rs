//! Minimal WKT reader for `POINT(x y)` and `LINESTRING(x y, ...)`.

use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
#[error("WKT parse error at byte {offset}: {message}")]
pub struct WktError {
    pub offset: usize,
    pub message: String,
}

struct Cursor<'a> {
    text: &'a str,
    pos: usize,
}

impl<'a> Cursor<'a> {
    fn new(text: &'a str) -> Self {
        Cursor { text, pos: 0 }
    }

    fn err<T>(&self, message: impl Into<String>) -> Result<T, WktError> {
        Err(WktError {
            offset: self.pos,
            message: message.into(),
        })
    }

    fn rest(&self) -> &'a str {
        &self.text[self.pos..]
    }

    fn skip_ws(&mut self) -> bool {
        let before = self.pos;
        let trimmed = self.rest().trim_start();
        self.pos = self.text.len() - trimmed.len();
        self.pos > before
    }

    fn keyword(&mut self, kw: &str) -> Result<(), WktError> {
        self.skip_ws();
        let rest = self.rest();
        if rest.len() >= kw.len() && rest[..kw.len()].eq_ignore_ascii_case(kw) {
            self.pos += kw.len();
            Ok(())
        } else {
            self.err(format!("expected {kw}"))
        }
    }

    fn punct(&mut self, c: char) -> Result<(), WktError> {
        self.skip_ws();
        if self.rest().starts_with(c) {
            self.pos += c.len_utf8();
            Ok(())
        } else {
            self.err(format!("expected '{c}'"))
        }
    }

    fn peek(&mut self) -> Option<char> {
        self.skip_ws();
        self.rest().chars().next()
    }

    fn number(&mut self) -> Result<f64, WktError> {
        self.skip_ws();
        let rest = self.rest();
        let len = rest
            .find(|c: char| !(c.is_ascii_digit() || matches!(c, '+' | '-' | '.' | 'e' | 'E')))
            .unwrap_or(rest.len());
        if len == 0 {
            return self.err("expected a number");
        }
        match rest[..len].parse::<f64>() {
            Ok(v) if v.is_finite() => {
                self.pos += len;
                Ok(v)
            }
            _ => self.err(format!("malformed number {:?}", &rest[..len])),
        }
    }

    fn coordinate(&mut self) -> Result<(f64, f64), WktError> {
        let x = self.number()?;
        if !self.skip_ws() {
            return self.err("expected whitespace between coordinates");
        }
        let y = self.number()?;
        Ok((x, y))
    }

    fn end(&mut self) -> Result<(), WktError> {
        self.skip_ws();
        if self.pos == self.text.len() {
            Ok(())
        } else {
            self.err("unexpected trailing text")
        }
    }
}

pub fn parse_wkt_point(text: &str) -> Result<(f64, f64), WktError> {
    let mut c = Cursor::new(text);
    c.keyword("POINT")?;
    c.punct('(')?;
    let p = c.coordinate()?;
    c.punct(')')?;
    c.end()?;
    Ok(p)
}

/// Parses a linestring, collapsing consecutive duplicate points. At least two
/// distinct consecutive points must remain.
pub fn parse_wkt_linestring(text: &str) -> Result<Vec<(f64, f64)>, WktError> {
    let mut c = Cursor::new(text);
    c.keyword("LINESTRING")?;
    c.punct('(')?;
    let mut points: Vec<(f64, f64)> = Vec::new();
    loop {
        let p = c.coordinate()?;
        if points.last() != Some(&p) {
            points.push(p);
        }
        match c.peek() {
            Some(',') => c.punct(',')?,
            Some(')') => break,
            _ => return c.err("expected ',' or ')'"),
        }
    }
    c.punct(')')?;
    c.end()?;
    if points.len() < 2 {
        return Err(WktError {
            offset: 0,
            message: "linestring needs at least two distinct points".into(),
        });
    }
    Ok(points)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn point_examples() {
        assert_eq!(parse_wkt_point("POINT(-77.3808 38.7567)").unwrap(), (-77.3808, 38.7567));
        assert_eq!(parse_wkt_point("  point ( 0 0 ) ").unwrap(), (0.0, 0.0));
        assert_eq!(parse_wkt_point("POINT(1e2 -2.5E-1)").unwrap(), (100.0, -0.25));
    }

    #[test]
    fn point_with_comma_fails_at_comma() {
        let err = parse_wkt_point("POINT(1,2)").unwrap_err();
        assert_eq!(err.offset, 7);
        assert!(parse_wkt_point("POINT(1 2").is_err());
        assert!(parse_wkt_point("POINT(1 2) x").is_err());
        assert!(parse_wkt_point("LINESTRING(1 2)").is_err());
        assert!(parse_wkt_point("POINT(a 2)").is_err());
    }

    #[test]
    fn linestring_examples() {
        assert_eq!(parse_wkt_linestring("LINESTRING(0 0, 1 0)").unwrap(), vec![(0.0, 0.0), (1.0, 0.0)]);
        assert!(parse_wkt_linestring("LINESTRING(0 0)").is_err());
        assert!(parse_wkt_linestring("LINESTRING(0 0, 0 0)").is_err());
        assert!(parse_wkt_linestring("LINESTRING(0 0, 1)").is_err());
        assert_eq!(
            parse_wkt_linestring("LINESTRING(0 0,0 0, 1 1,1 1, 0 0)").unwrap(),
            vec![(0.0, 0.0), (1.0, 1.0), (0.0, 0.0)]
        );
    }

    proptest! {
        #[test]
        fn collapses_consecutive_duplicates(raw in proptest::collection::vec((0i32..3, 0i32..3), 2..30)) {
            let text = format!(
                "LINESTRING({})",
                raw.iter().map(|(x, y)| format!("{x} {y}")).collect::<Vec<_>>().join(", ")
            );
            // naive scan: drop a point equal to its predecessor in the input
            let mut expected: Vec<(f64, f64)> = Vec::new();
            for (i, &(x, y)) in raw.iter().enumerate() {
                if i == 0 || raw[i - 1] != (x, y) {
                    expected.push((x as f64, y as f64));
                }
            }
            match parse_wkt_linestring(&text) {
                Ok(points) => prop_assert_eq!(points, expected),
                Err(_) => prop_assert!(expected.len() < 2),
            }
        }
    }
}
