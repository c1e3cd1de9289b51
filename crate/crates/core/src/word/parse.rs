use crate::perm::Permutation;
use crate::word::{Letter, Sign, Var};
use crate::{Error, Result};

struct Lexer<'a> {
    src: &'a str,
    pos: usize,
}

impl<'a> Lexer<'a> {
    fn peek(&self) -> Option<char> {
        self.src[self.pos..].chars().next()
    }

    fn bump(&mut self) -> Option<char> {
        let c = self.peek()?;
        self.pos += c.len_utf8();
        Some(c)
    }

    fn skip_ws(&mut self) {
        while matches!(self.peek(), Some(c) if c.is_whitespace()) {
            self.bump();
        }
    }

    fn err<T>(&self, msg: impl Into<String>) -> Result<T> {
        Err(Error::Parse {
            pos: self.pos,
            msg: msg.into(),
        })
    }

    fn number(&mut self) -> Option<usize> {
        let start = self.pos;
        while matches!(self.peek(), Some(c) if c.is_ascii_digit()) {
            self.bump();
        }
        self.src[start..self.pos].parse().ok()
    }

    fn signed_number(&mut self) -> Result<i64> {
        let negative = match self.peek() {
            Some('-') => {
                self.bump();
                true
            }
            Some('+') => {
                self.bump();
                false
            }
            _ => false,
        };
        match self.number() {
            Some(k) if k <= i64::MAX as usize => Ok(if negative { -(k as i64) } else { k as i64 }),
            _ => self.err("expected an exponent"),
        }
    }
}

/// Letters of a word; `n = None` forbids constants (free-group input).
pub(crate) fn parse_letters(text: &str, n: Option<usize>, rank: usize) -> Result<Vec<Letter>> {
    let mut lx = Lexer { src: text, pos: 0 };
    let mut letters = Vec::new();
    loop {
        lx.skip_ws();
        let start = lx.pos;
        let Some(c) = lx.peek() else { break };
        match c {
            'x' | 'y' | 'z' => {
                lx.bump();
                let index = match lx.number() {
                    Some(i) if c == 'x' => i,
                    Some(_) => return lx.err("only x takes an index"),
                    None => match c {
                        'x' => 1,
                        'y' => 2,
                        _ => 3,
                    },
                };
                if index == 0 || index > rank {
                    return Err(Error::VariableOutOfRange { index, rank });
                }
                let exp = if lx.peek() == Some('^') {
                    lx.bump();
                    lx.signed_number()?
                } else {
                    1
                };
                let var = Var::new(index, if exp < 0 { Sign::Neg } else { Sign::Pos });
                letters.extend(std::iter::repeat_n(
                    Letter::Var(var),
                    exp.unsigned_abs() as usize,
                ));
            }
            'e' => {
                lx.bump();
                let Some(n) = n else {
                    return lx.err("constants are not allowed here");
                };
                letters.push(Letter::Const(Permutation::identity(n)));
            }
            '(' => {
                let Some(n) = n else {
                    return lx.err("constants are not allowed here");
                };
                lx.bump();
                let mut cycle = Vec::new();
                loop {
                    lx.skip_ws();
                    match lx.peek() {
                        Some(')') => {
                            lx.bump();
                            break;
                        }
                        Some(',') => {
                            lx.bump();
                        }
                        Some(d) if d.is_ascii_digit() => {
                            let p = lx.number().unwrap_or(0);
                            if p == 0 || p > n {
                                return Err(Error::PointOutOfRange { point: p, n });
                            }
                            cycle.push(p);
                        }
                        _ => return lx.err("unterminated cycle"),
                    }
                }
                if cycle.is_empty() {
                    return Err(Error::Parse {
                        pos: start,
                        msg: "empty cycle".into(),
                    });
                }
                let perm = Permutation::from_cycle(n, &cycle).map_err(|e| Error::Parse {
                    pos: start,
                    msg: e.to_string(),
                })?;
                letters.push(Letter::Const(perm));
            }
            other => return lx.err(format!("unexpected {:?}", other)),
        }
    }
    if letters.is_empty() {
        return lx.err("empty word");
    }
    Ok(letters)
}
