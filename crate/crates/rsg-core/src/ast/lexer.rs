//! Hand written lexer for model files.
//!
//! Produces a flat token stream with 1-based line/column positions. `//`
//! starts a comment running to the end of the line. String literals are
//! single-line and support the escapes `\"`, `\\`, `\n`, `\t` and `\r`;
//! raw control characters inside strings are rejected. Numbers are plain
//! decimal floats with optional sign and exponent; literals that overflow
//! to infinity are rejected here so every magnitude in a syntax tree is
//! finite.

use alloc::string::String;
use alloc::vec::Vec;
use alloc::format;

use crate::diag::{DiagCode, Diagnostic, Pos};

#[derive(Clone, Debug, PartialEq)]
pub(crate) enum Tok {
    /// Identifier or keyword; the parser decides which.
    Word(String),
    Num(f64),
    Str(String),
    LBrace,
    RBrace,
    LBracket,
    RBracket,
    LParen,
    RParen,
    Eq,
    Comma,
    Star,
    Eof,
}

impl Tok {
    /// Short human readable description for "expected X, found Y" messages.
    pub(crate) fn describe(&self) -> String {
        match self {
            Tok::Word(w) => format!("`{w}`"),
            Tok::Num(n) => format!("number `{n}`"),
            Tok::Str(_) => String::from("string literal"),
            Tok::LBrace => String::from("`{`"),
            Tok::RBrace => String::from("`}`"),
            Tok::LBracket => String::from("`[`"),
            Tok::RBracket => String::from("`]`"),
            Tok::LParen => String::from("`(`"),
            Tok::RParen => String::from("`)`"),
            Tok::Eq => String::from("`=`"),
            Tok::Comma => String::from("`,`"),
            Tok::Star => String::from("`*`"),
            Tok::Eof => String::from("end of input"),
        }
    }
}

#[derive(Clone, Debug)]
pub(crate) struct Token {
    pub kind: Tok,
    pub pos: Pos,
}

struct Lexer<'a> {
    rest: &'a str,
    line: u32,
    col: u32,
}

impl<'a> Lexer<'a> {
    fn new(src: &'a str) -> Self {
        Lexer { rest: src, line: 1, col: 1 }
    }

    fn pos(&self) -> Pos {
        Pos::new(self.line, self.col)
    }

    fn peek(&self) -> Option<char> {
        self.rest.chars().next()
    }

    fn bump(&mut self) -> Option<char> {
        let c = self.peek()?;
        self.rest = &self.rest[c.len_utf8()..];
        if c == '\n' {
            self.line += 1;
            self.col = 1;
        } else {
            self.col += 1;
        }
        Some(c)
    }

    fn skip_trivia(&mut self) {
        loop {
            match self.peek() {
                Some(c) if c.is_whitespace() => {
                    self.bump();
                }
                Some('/') if self.rest.starts_with("//") => {
                    while let Some(c) = self.peek() {
                        if c == '\n' {
                            break;
                        }
                        self.bump();
                    }
                }
                _ => break,
            }
        }
    }

    fn lex_word(&mut self) -> Token {
        let pos = self.pos();
        let mut text = String::new();
        while let Some(c) = self.peek() {
            if c.is_ascii_alphanumeric() || c == '_' {
                text.push(c);
                self.bump();
            } else {
                break;
            }
        }
        Token { kind: Tok::Word(text), pos }
    }

    fn lex_number(&mut self) -> Result<Token, Diagnostic> {
        let pos = self.pos();
        let mut text = String::new();
        if matches!(self.peek(), Some('+') | Some('-')) {
            text.push(self.bump().unwrap());
        }
        let mut saw_digit = false;
        while let Some(c) = self.peek() {
            if c.is_ascii_digit() {
                saw_digit = true;
                text.push(c);
                self.bump();
            } else {
                break;
            }
        }
        if !saw_digit {
            return Err(Diagnostic::error(
                pos,
                DiagCode::LexError,
                format!("expected digits after `{text}`"),
            ));
        }
        if self.peek() == Some('.') {
            text.push('.');
            self.bump();
            while let Some(c) = self.peek() {
                if c.is_ascii_digit() {
                    text.push(c);
                    self.bump();
                } else {
                    break;
                }
            }
        }
        if matches!(self.peek(), Some('e') | Some('E')) {
            text.push(self.bump().unwrap());
            if matches!(self.peek(), Some('+') | Some('-')) {
                text.push(self.bump().unwrap());
            }
            let mut saw_exp_digit = false;
            while let Some(c) = self.peek() {
                if c.is_ascii_digit() {
                    saw_exp_digit = true;
                    text.push(c);
                    self.bump();
                } else {
                    break;
                }
            }
            if !saw_exp_digit {
                return Err(Diagnostic::error(
                    pos,
                    DiagCode::LexError,
                    format!("malformed exponent in numeric literal `{text}`"),
                ));
            }
        }
        let value: f64 = text.parse().map_err(|_| {
            Diagnostic::error(pos, DiagCode::LexError, format!("malformed numeric literal `{text}`"))
        })?;
        if !value.is_finite() {
            return Err(Diagnostic::error(
                pos,
                DiagCode::NonFiniteLiteral,
                format!("non-finite numeric literal `{text}`"),
            ));
        }
        Ok(Token { kind: Tok::Num(value), pos })
    }

    fn lex_string(&mut self) -> Result<Token, Diagnostic> {
        let pos = self.pos();
        self.bump(); // opening quote
        let mut value = String::new();
        loop {
            let cpos = self.pos();
            match self.bump() {
                None => {
                    return Err(Diagnostic::error(
                        pos,
                        DiagCode::LexError,
                        String::from("unterminated string literal"),
                    ));
                }
                Some('"') => break,
                Some('\\') => match self.bump() {
                    Some('"') => value.push('"'),
                    Some('\\') => value.push('\\'),
                    Some('n') => value.push('\n'),
                    Some('t') => value.push('\t'),
                    Some('r') => value.push('\r'),
                    Some(c) => {
                        return Err(Diagnostic::error(
                            cpos,
                            DiagCode::LexError,
                            format!("unknown escape sequence `\\{c}`"),
                        ));
                    }
                    None => {
                        return Err(Diagnostic::error(
                            pos,
                            DiagCode::LexError,
                            String::from("unterminated string literal"),
                        ));
                    }
                },
                Some(c) if c.is_control() => {
                    return Err(Diagnostic::error(
                        cpos,
                        DiagCode::LexError,
                        String::from("raw control character in string literal; use an escape"),
                    ));
                }
                Some(c) => value.push(c),
            }
        }
        Ok(Token { kind: Tok::Str(value), pos })
    }

    fn next_token(&mut self) -> Result<Token, Diagnostic> {
        self.skip_trivia();
        let pos = self.pos();
        let Some(c) = self.peek() else {
            return Ok(Token { kind: Tok::Eof, pos });
        };
        let punct = |lexer: &mut Lexer<'_>, kind: Tok| {
            lexer.bump();
            Ok(Token { kind, pos })
        };
        match c {
            '{' => punct(self, Tok::LBrace),
            '}' => punct(self, Tok::RBrace),
            '[' => punct(self, Tok::LBracket),
            ']' => punct(self, Tok::RBracket),
            '(' => punct(self, Tok::LParen),
            ')' => punct(self, Tok::RParen),
            '=' => punct(self, Tok::Eq),
            ',' => punct(self, Tok::Comma),
            '*' => punct(self, Tok::Star),
            '"' => self.lex_string(),
            c if c.is_ascii_digit() || c == '+' || c == '-' => self.lex_number(),
            c if c.is_ascii_alphabetic() || c == '_' => Ok(self.lex_word()),
            c => Err(Diagnostic::error(
                pos,
                DiagCode::LexError,
                format!("unexpected character `{c}`"),
            )),
        }
    }
}

/// Tokenizes a whole file, failing on the first lexical error.
pub(crate) fn lex(src: &str) -> Result<Vec<Token>, Diagnostic> {
    let mut lexer = Lexer::new(src);
    let mut tokens = Vec::new();
    loop {
        let tok = lexer.next_token()?;
        let done = matches!(tok.kind, Tok::Eof);
        tokens.push(tok);
        if done {
            return Ok(tokens);
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn kinds(src: &str) -> Vec<Tok> {
        lex(src).unwrap().into_iter().map(|t| t.kind).collect()
    }

    #[test]
    fn lexes_words_numbers_strings_and_punctuation() {
        let toks = kinds("Group g1 { \"name\" = \"root\" } -1.5e3 , * [ ] ( )");
        assert_eq!(
            toks,
            alloc::vec![
                Tok::Word("Group".into()),
                Tok::Word("g1".into()),
                Tok::LBrace,
                Tok::Str("name".into()),
                Tok::Eq,
                Tok::Str("root".into()),
                Tok::RBrace,
                Tok::Num(-1500.0),
                Tok::Comma,
                Tok::Star,
                Tok::LBracket,
                Tok::RBracket,
                Tok::LParen,
                Tok::RParen,
                Tok::Eof,
            ]
        );
    }

    #[test]
    fn comments_run_to_end_of_line() {
        let toks = kinds("a // rest is ignored } {\nb");
        assert_eq!(toks, alloc::vec![Tok::Word("a".into()), Tok::Word("b".into()), Tok::Eof]);
    }

    #[test]
    fn string_escapes_are_decoded() {
        let toks = kinds(r#""a\"b\\c\nd\te\rf""#);
        assert_eq!(toks[0], Tok::Str(String::from("a\"b\\c\nd\te\rf")));
    }

    #[test]
    fn positions_are_one_based_lines_and_columns() {
        let toks = lex("a\n  bb").unwrap();
        assert_eq!((toks[0].pos.line, toks[0].pos.col), (1, 1));
        assert_eq!((toks[1].pos.line, toks[1].pos.col), (2, 3));
    }

    #[test]
    fn overflowing_literal_is_a_non_finite_error() {
        let err = lex("1e999").unwrap_err();
        assert_eq!(err.code, DiagCode::NonFiniteLiteral);
    }

    #[test]
    fn unterminated_string_is_an_error() {
        assert!(lex("\"abc").is_err());
        assert!(lex("\"ab\nc\"").is_err());
    }

    #[test]
    fn unknown_character_is_an_error() {
        let err = lex("node @").unwrap_err();
        assert_eq!(err.code, DiagCode::LexError);
        assert_eq!((err.pos.line, err.pos.col), (1, 6));
    }
}
