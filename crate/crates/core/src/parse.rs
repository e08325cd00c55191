//! Polynomial grammar and canonical display.
//!
//! Variables are `x1..xn` for ambient coordinates, `t` for the spray
//! parameter, and `l1..` for the fiber coordinates of a chart. Literals are
//! integers or quotients `p/q`; operators are `+ - * ^` where `^` takes a
//! nonnegative integer literal; whitespace is insignificant. The canonical
//! display writes terms grevlex-descending joined by ` + ` / ` - `, e.g.
//! `x1^2*x2 - 3/4`; parsing that string back reproduces the polynomial.

use std::collections::BTreeMap;

use num_bigint::BigInt;
use num_traits::Zero;

use crate::error::{Error, Result};
use crate::mpoly::MPoly;
use crate::rat::Rat;

#[derive(Clone, Debug)]
pub struct VarTable {
    names: Vec<String>,
    index: BTreeMap<String, usize>,
}

impl VarTable {
    pub fn custom(names: Vec<String>) -> Self {
        let mut index = BTreeMap::new();
        for (i, n) in names.iter().enumerate() {
            let prev = index.insert(n.clone(), i);
            assert!(prev.is_none(), "duplicate variable name {n}");
        }
        VarTable { names, index }
    }

    /// x1..xn.
    pub fn ambient(n: usize) -> Self {
        VarTable::custom((1..=n).map(|i| format!("x{i}")).collect())
    }

    /// x1..xn followed by l1..l{nl} (chart ring of a blow-up chart).
    pub fn chart(n: usize, nl: usize) -> Self {
        let mut names: Vec<String> = (1..=n).map(|i| format!("x{i}")).collect();
        names.extend((1..=nl).map(|i| format!("l{i}")));
        VarTable::custom(names)
    }

    /// t, x1..xn, l1..l{nl} (ring a spray and its fiber lift live in).
    pub fn spray(n: usize, nl: usize) -> Self {
        let mut names = vec!["t".to_string()];
        names.extend((1..=n).map(|i| format!("x{i}")));
        names.extend((1..=nl).map(|i| format!("l{i}")));
        VarTable::custom(names)
    }

    pub fn len(&self) -> usize {
        self.names.len()
    }

    pub fn is_empty(&self) -> bool {
        self.names.is_empty()
    }

    pub fn name(&self, i: usize) -> &str {
        &self.names[i]
    }

    pub fn lookup(&self, name: &str) -> Option<usize> {
        self.index.get(name).copied()
    }
}

/// Canonical string form of `p` in the coordinates of `table`.
pub fn canonical(p: &MPoly, table: &VarTable) -> String {
    assert_eq!(p.nvars(), table.len());
    p.render(&|i| table.name(i).to_string())
}

#[derive(Debug, Clone, PartialEq)]
enum Tok {
    Num(BigInt),
    Ident(String),
    Plus,
    Minus,
    Star,
    Slash,
    Caret,
    LParen,
    RParen,
}

fn lex(src: &str) -> Result<Vec<(Tok, usize)>> {
    let bytes = src.as_bytes();
    let mut toks = Vec::new();
    let mut i = 0;
    while i < bytes.len() {
        let b = bytes[i];
        match b {
            b' ' | b'\t' | b'\n' | b'\r' => i += 1,
            b'+' => {
                toks.push((Tok::Plus, i));
                i += 1;
            }
            b'-' => {
                toks.push((Tok::Minus, i));
                i += 1;
            }
            b'*' => {
                toks.push((Tok::Star, i));
                i += 1;
            }
            b'/' => {
                toks.push((Tok::Slash, i));
                i += 1;
            }
            b'^' => {
                toks.push((Tok::Caret, i));
                i += 1;
            }
            b'(' => {
                toks.push((Tok::LParen, i));
                i += 1;
            }
            b')' => {
                toks.push((Tok::RParen, i));
                i += 1;
            }
            b'0'..=b'9' => {
                let start = i;
                while i < bytes.len() && bytes[i].is_ascii_digit() {
                    i += 1;
                }
                let n: BigInt = src[start..i].parse().expect("digits parse as integer");
                toks.push((Tok::Num(n), start));
            }
            b'a'..=b'z' | b'A'..=b'Z' | b'_' => {
                let start = i;
                while i < bytes.len()
                    && (bytes[i].is_ascii_alphanumeric() || bytes[i] == b'_')
                {
                    i += 1;
                }
                toks.push((Tok::Ident(src[start..i].to_string()), start));
            }
            _ => {
                return Err(Error::Syntax {
                    pos: i,
                    msg: format!("unexpected character `{}`", src[i..].chars().next().unwrap()),
                })
            }
        }
    }
    Ok(toks)
}

struct Parser<'a> {
    toks: Vec<(Tok, usize)>,
    pos: usize,
    table: &'a VarTable,
    end: usize,
}

impl<'a> Parser<'a> {
    fn peek(&self) -> Option<&Tok> {
        self.toks.get(self.pos).map(|(t, _)| t)
    }

    fn here(&self) -> usize {
        self.toks
            .get(self.pos)
            .map(|&(_, p)| p)
            .unwrap_or(self.end)
    }

    fn bump(&mut self) -> Option<Tok> {
        let t = self.toks.get(self.pos).map(|(t, _)| t.clone());
        if t.is_some() {
            self.pos += 1;
        }
        t
    }

    fn expect(&mut self, tok: Tok, what: &str) -> Result<()> {
        if self.peek() == Some(&tok) {
            self.pos += 1;
            Ok(())
        } else {
            Err(Error::Syntax {
                pos: self.here(),
                msg: format!("expected {what}"),
            })
        }
    }

    fn expr(&mut self) -> Result<MPoly> {
        let mut acc = self.term()?;
        loop {
            match self.peek() {
                Some(Tok::Plus) => {
                    self.pos += 1;
                    acc = &acc + &self.term()?;
                }
                Some(Tok::Minus) => {
                    self.pos += 1;
                    acc = &acc - &self.term()?;
                }
                _ => return Ok(acc),
            }
        }
    }

    fn term(&mut self) -> Result<MPoly> {
        let mut acc = self.unary()?;
        while self.peek() == Some(&Tok::Star) {
            self.pos += 1;
            acc = &acc * &self.unary()?;
        }
        Ok(acc)
    }

    fn unary(&mut self) -> Result<MPoly> {
        if self.peek() == Some(&Tok::Minus) {
            self.pos += 1;
            return Ok(-&self.unary()?);
        }
        self.primary()
    }

    fn exponent(&mut self) -> Result<u32> {
        // only reached right after a caret
        let pos = self.here();
        match self.bump() {
            Some(Tok::Num(n)) => u32::try_from(&n).map_err(|_| Error::Syntax {
                pos,
                msg: "exponent too large".into(),
            }),
            _ => Err(Error::Syntax {
                pos,
                msg: "exponent must be a nonnegative integer literal".into(),
            }),
        }
    }

    fn primary(&mut self) -> Result<MPoly> {
        let pos = self.here();
        let base = match self.bump() {
            Some(Tok::Num(n)) => {
                // a slash directly after an integer forms a rational literal
                if self.peek() == Some(&Tok::Slash) {
                    self.pos += 1;
                    let dpos = self.here();
                    match self.bump() {
                        Some(Tok::Num(d)) => {
                            if d.is_zero() {
                                return Err(Error::Syntax {
                                    pos: dpos,
                                    msg: "zero denominator".into(),
                                });
                            }
                            MPoly::constant(self.table.len(), Rat::new(n, d))
                        }
                        _ => {
                            return Err(Error::Syntax {
                                pos: dpos,
                                msg: "expected denominator after `/`".into(),
                            })
                        }
                    }
                } else {
                    MPoly::constant(self.table.len(), Rat::from_integer(n))
                }
            }
            Some(Tok::Ident(name)) => match self.table.lookup(&name) {
                Some(i) => MPoly::var(self.table.len(), i),
                None => {
                    return Err(Error::UnknownVariable { name, pos });
                }
            },
            Some(Tok::LParen) => {
                let inner = self.expr()?;
                self.expect(Tok::RParen, "closing `)`")?;
                inner
            }
            _ => {
                return Err(Error::Syntax {
                    pos,
                    msg: "expected a literal, variable, or `(`".into(),
                })
            }
        };
        if self.peek() == Some(&Tok::Caret) {
            self.pos += 1;
            let k = self.exponent()?;
            return Ok(base.pow(k));
        }
        Ok(base)
    }
}

/// Parses `src` in the coordinates of `table`.
pub fn parse_poly(src: &str, table: &VarTable) -> Result<MPoly> {
    let toks = lex(src)?;
    let mut p = Parser {
        toks,
        pos: 0,
        table,
        end: src.len(),
    };
    let poly = p.expr()?;
    if p.pos != p.toks.len() {
        return Err(Error::Syntax {
            pos: p.here(),
            msg: "trailing input after expression".into(),
        });
    }
    Ok(poly)
}
