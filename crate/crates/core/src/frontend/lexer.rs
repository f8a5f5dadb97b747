//! Tokenizer for `.cup` source text.
//!
//! Identifiers may contain interior hyphens and end in a single `*`
//! (`uniform-discrete`, `sample*`). A hyphen only continues an identifier
//! when a letter or digit follows it, so `a-b` is one identifier while
//! `a - b` and `a -b` are subtraction.

use std::fmt;
use std::sync::Arc;

use super::span::SourceSpan;
use super::FrontendError;

#[derive(Debug, Clone, PartialEq)]
pub enum TokenKind {
    Ident(String),
    /// `'a` in type expressions; the payload excludes the quote.
    TypeVar(String),
    Int(i64),
    Real(f64),
    Str(String),
    // keywords
    Function,
    If,
    Then,
    Else,
    Case,
    Shift,
    Reset,
    Type,
    True,
    False,
    // punctuation
    LParen,
    RParen,
    LBrace,
    RBrace,
    LBracket,
    RBracket,
    Comma,
    Semi,
    Colon,
    /// `<-`
    Arrow,
    /// `=>`
    FatArrow,
    /// `->`
    RArrow,
    Eq,
    EqEq,
    NotEq,
    Lt,
    Le,
    Gt,
    Ge,
    AndAnd,
    OrOr,
    Bang,
    Plus,
    Minus,
    Star,
    Slash,
    Percent,
    Tilde,
    Bar,
}

impl TokenKind {
    /// Stable name used in diagnostics and expected-token sets.
    pub fn describe(&self) -> String {
        match self {
            TokenKind::Ident(s) => format!("identifier `{s}`"),
            TokenKind::TypeVar(s) => format!("type variable `'{s}`"),
            TokenKind::Int(i) => format!("integer `{i}`"),
            TokenKind::Real(r) => format!("real `{r}`"),
            TokenKind::Str(_) => "string literal".to_string(),
            other => format!("`{}`", other.symbol()),
        }
    }

    fn symbol(&self) -> &'static str {
        match self {
            TokenKind::Function => "function",
            TokenKind::If => "if",
            TokenKind::Then => "then",
            TokenKind::Else => "else",
            TokenKind::Case => "case",
            TokenKind::Shift => "shift",
            TokenKind::Reset => "reset",
            TokenKind::Type => "type",
            TokenKind::True => "true",
            TokenKind::False => "false",
            TokenKind::LParen => "(",
            TokenKind::RParen => ")",
            TokenKind::LBrace => "{",
            TokenKind::RBrace => "}",
            TokenKind::LBracket => "[",
            TokenKind::RBracket => "]",
            TokenKind::Comma => ",",
            TokenKind::Semi => ";",
            TokenKind::Colon => ":",
            TokenKind::Arrow => "<-",
            TokenKind::FatArrow => "=>",
            TokenKind::RArrow => "->",
            TokenKind::Eq => "=",
            TokenKind::EqEq => "==",
            TokenKind::NotEq => "!=",
            TokenKind::Lt => "<",
            TokenKind::Le => "<=",
            TokenKind::Gt => ">",
            TokenKind::Ge => ">=",
            TokenKind::AndAnd => "&&",
            TokenKind::OrOr => "||",
            TokenKind::Bang => "!",
            TokenKind::Plus => "+",
            TokenKind::Minus => "-",
            TokenKind::Star => "*",
            TokenKind::Slash => "/",
            TokenKind::Percent => "%",
            TokenKind::Tilde => "~",
            TokenKind::Bar => "|",
            TokenKind::Ident(_)
            | TokenKind::TypeVar(_)
            | TokenKind::Int(_)
            | TokenKind::Real(_)
            | TokenKind::Str(_) => "<literal>",
        }
    }
}

impl fmt::Display for TokenKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.describe())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Token {
    pub kind: TokenKind,
    pub lexeme: String,
    pub span: SourceSpan,
}

pub const KEYWORDS: &[&str] = &[
    "function", "if", "then", "else", "case", "shift", "reset", "type", "true", "false",
];

pub fn is_reserved(name: &str) -> bool {
    KEYWORDS.contains(&name)
}

pub fn tokenize(source: &str) -> Result<Vec<Token>, FrontendError> {
    tokenize_file(source, "<input>")
}

pub fn tokenize_file(source: &str, file: &str) -> Result<Vec<Token>, FrontendError> {
    Lexer::new(source, Arc::from(file)).run()
}

struct Lexer<'a> {
    src: &'a str,
    bytes: &'a [u8],
    file: Arc<str>,
    pos: usize,
    line: u32,
    col: u32,
    out: Vec<Token>,
}

impl<'a> Lexer<'a> {
    fn new(src: &'a str, file: Arc<str>) -> Self {
        Lexer {
            src,
            bytes: src.as_bytes(),
            file,
            pos: 0,
            line: 1,
            col: 1,
            out: Vec::new(),
        }
    }

    fn peek(&self) -> Option<char> {
        self.src[self.pos..].chars().next()
    }

    fn peek_at(&self, offset: usize) -> Option<char> {
        self.src[self.pos..].chars().nth(offset)
    }

    fn bump(&mut self) -> Option<char> {
        let c = self.peek()?;
        self.pos += c.len_utf8();
        if c == '\n' {
            self.line += 1;
            self.col = 1;
        } else {
            self.col += 1;
        }
        Some(c)
    }

    fn span_from(&self, start: usize, line: u32, col: u32) -> SourceSpan {
        SourceSpan {
            file: self.file.clone(),
            start_line: line,
            start_col: col,
            end_line: self.line,
            end_col: self.col,
            start,
            end: self.pos,
        }
    }

    fn run(mut self) -> Result<Vec<Token>, FrontendError> {
        loop {
            self.skip_trivia();
            let Some(c) = self.peek() else { break };
            let (start, line, col) = (self.pos, self.line, self.col);
            let kind = if c.is_ascii_alphabetic() || c == '_' {
                self.ident()
            } else if c.is_ascii_digit() {
                self.number(start, line, col)?
            } else if c == '"' {
                self.string(start, line, col)?
            } else if c == '\'' {
                self.bump();
                match self.peek() {
                    Some(n) if n.is_ascii_alphabetic() || n == '_' => match self.ident() {
                        TokenKind::Ident(name) => TokenKind::TypeVar(name),
                        kw => TokenKind::TypeVar(kw.symbol().to_string()),
                    },
                    _ => {
                        return Err(FrontendError::Lex {
                            message: "expected a type variable name after `'`".into(),
                            span: self.span_from(start, line, col),
                        })
                    }
                }
            } else {
                self.punct(c, start, line, col)?
            };
            let span = self.span_from(start, line, col);
            self.out.push(Token {
                kind,
                lexeme: self.src[start..self.pos].to_string(),
                span,
            });
        }
        Ok(self.out)
    }

    fn skip_trivia(&mut self) {
        while let Some(c) = self.peek() {
            if c.is_whitespace() {
                self.bump();
            } else if c == '/' && self.peek_at(1) == Some('/') {
                while let Some(c) = self.peek() {
                    if c == '\n' {
                        break;
                    }
                    self.bump();
                }
            } else {
                break;
            }
        }
    }

    fn ident(&mut self) -> TokenKind {
        let start = self.pos;
        while let Some(c) = self.peek() {
            if c.is_ascii_alphanumeric() || c == '_' {
                self.bump();
            } else if c == '-'
                && self
                    .peek_at(1)
                    .is_some_and(|n| n.is_ascii_alphanumeric() || n == '_')
            {
                self.bump();
            } else {
                break;
            }
        }
        if self.peek() == Some('*') {
            self.bump();
        }
        let text = &self.src[start..self.pos];
        match text {
            "function" => TokenKind::Function,
            "if" => TokenKind::If,
            "then" => TokenKind::Then,
            "else" => TokenKind::Else,
            "case" => TokenKind::Case,
            "shift" => TokenKind::Shift,
            "reset" => TokenKind::Reset,
            "type" => TokenKind::Type,
            "true" => TokenKind::True,
            "false" => TokenKind::False,
            _ => TokenKind::Ident(text.to_string()),
        }
    }

    fn number(&mut self, start: usize, line: u32, col: u32) -> Result<TokenKind, FrontendError> {
        while self.peek().is_some_and(|c| c.is_ascii_digit()) {
            self.bump();
        }
        let mut real = false;
        if self.peek() == Some('.') && self.peek_at(1).is_some_and(|c| c.is_ascii_digit()) {
            real = true;
            self.bump();
            while self.peek().is_some_and(|c| c.is_ascii_digit()) {
                self.bump();
            }
        }
        if matches!(self.peek(), Some('e') | Some('E')) {
            let digit_at = if matches!(self.peek_at(1), Some('+') | Some('-')) { 2 } else { 1 };
            if self.peek_at(digit_at).is_some_and(|c| c.is_ascii_digit()) {
                real = true;
                for _ in 0..digit_at {
                    self.bump();
                }
                while self.peek().is_some_and(|c| c.is_ascii_digit()) {
                    self.bump();
                }
            }
        }
        let text = &self.src[start..self.pos];
        let bad = |what: &str| FrontendError::Lex {
            message: format!("invalid {what} literal `{text}`"),
            span: self.span_from(start, line, col),
        };
        if real {
            text.parse::<f64>().map(TokenKind::Real).map_err(|_| bad("real"))
        } else {
            text.parse::<i64>().map(TokenKind::Int).map_err(|_| bad("integer"))
        }
    }

    fn string(&mut self, start: usize, line: u32, col: u32) -> Result<TokenKind, FrontendError> {
        self.bump();
        let mut text = String::new();
        loop {
            match self.bump() {
                None => {
                    return Err(FrontendError::Lex {
                        message: "unterminated string literal".into(),
                        span: self.span_from(start, line, col),
                    })
                }
                Some('"') => break,
                Some('\\') => match self.bump() {
                    Some('n') => text.push('\n'),
                    Some('t') => text.push('\t'),
                    Some('\\') => text.push('\\'),
                    Some('"') => text.push('"'),
                    _ => {
                        return Err(FrontendError::Lex {
                            message: "invalid escape in string literal".into(),
                            span: self.span_from(start, line, col),
                        })
                    }
                },
                Some(c) => text.push(c),
            }
        }
        Ok(TokenKind::Str(text))
    }

    fn punct(&mut self, c: char, start: usize, line: u32, col: u32) -> Result<TokenKind, FrontendError> {
        let next = self.peek_at(1);
        let two = |k: TokenKind| (k, 2usize);
        let one = |k: TokenKind| (k, 1usize);
        let (kind, len) = match (c, next) {
            ('<', Some('-')) => two(TokenKind::Arrow),
            ('<', Some('=')) => two(TokenKind::Le),
            ('<', _) => one(TokenKind::Lt),
            ('>', Some('=')) => two(TokenKind::Ge),
            ('>', _) => one(TokenKind::Gt),
            ('=', Some('=')) => two(TokenKind::EqEq),
            ('=', Some('>')) => two(TokenKind::FatArrow),
            ('=', _) => one(TokenKind::Eq),
            ('!', Some('=')) => two(TokenKind::NotEq),
            ('!', _) => one(TokenKind::Bang),
            ('-', Some('>')) => two(TokenKind::RArrow),
            ('-', _) => one(TokenKind::Minus),
            ('&', Some('&')) => two(TokenKind::AndAnd),
            ('|', Some('|')) => two(TokenKind::OrOr),
            ('|', _) => one(TokenKind::Bar),
            ('(', _) => one(TokenKind::LParen),
            (')', _) => one(TokenKind::RParen),
            ('{', _) => one(TokenKind::LBrace),
            ('}', _) => one(TokenKind::RBrace),
            ('[', _) => one(TokenKind::LBracket),
            (']', _) => one(TokenKind::RBracket),
            (',', _) => one(TokenKind::Comma),
            (';', _) => one(TokenKind::Semi),
            (':', _) => one(TokenKind::Colon),
            ('+', _) => one(TokenKind::Plus),
            ('*', _) => one(TokenKind::Star),
            ('/', _) => one(TokenKind::Slash),
            ('%', _) => one(TokenKind::Percent),
            ('~', _) => one(TokenKind::Tilde),
            _ => {
                self.bump();
                return Err(FrontendError::Lex {
                    message: format!("illegal character `{c}`"),
                    span: self.span_from(start, line, col),
                });
            }
        };
        for _ in 0..len {
            self.bump();
        }
        debug_assert!(self.bytes.len() >= self.pos);
        Ok(kind)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn kinds(src: &str) -> Vec<TokenKind> {
        tokenize(src).unwrap().into_iter().map(|t| t.kind).collect()
    }

    fn ident(s: &str) -> TokenKind {
        TokenKind::Ident(s.into())
    }

    #[test]
    fn sample_statement() {
        use TokenKind::*;
        assert_eq!(
            kinds("n <- sample(uniform-discrete(2,5));"),
            vec![
                ident("n"),
                Arrow,
                ident("sample"),
                LParen,
                ident("uniform-discrete"),
                LParen,
                Int(2),
                Comma,
                Int(5),
                RParen,
                RParen,
                Semi
            ]
        );
    }

    #[test]
    fn empty_input() {
        assert!(tokenize("").unwrap().is_empty());
        assert!(tokenize("  // only a comment\n").unwrap().is_empty());
    }

    #[test]
    fn hyphen_needs_whitespace_for_minus() {
        assert_eq!(kinds("a - b"), vec![ident("a"), TokenKind::Minus, ident("b")]);
        assert_eq!(kinds("a-b"), vec![ident("a-b")]);
        assert_eq!(kinds("-distance"), vec![TokenKind::Minus, ident("distance")]);
    }

    #[test]
    fn trailing_star_identifier() {
        assert_eq!(kinds("sample*(d)")[0], ident("sample*"));
        assert_eq!(kinds("dist-score")[0], ident("dist-score"));
        assert_eq!(kinds("a * b")[1], TokenKind::Star);
    }

    #[test]
    fn numbers_and_type_vars() {
        assert_eq!(
            kinds("1 2.5 1e3 'a ~t"),
            vec![
                TokenKind::Int(1),
                TokenKind::Real(2.5),
                TokenKind::Real(1000.0),
                TokenKind::TypeVar("a".into()),
                TokenKind::Tilde,
                ident("t")
            ]
        );
    }

    #[test]
    fn lex_errors_carry_spans() {
        let err = tokenize("x <- \"abc").unwrap_err();
        match err {
            FrontendError::Lex { span, .. } => assert_eq!((span.start_line, span.start_col), (1, 6)),
            other => panic!("unexpected {other:?}"),
        }
        let err = tokenize("a\n  #").unwrap_err();
        match err {
            FrontendError::Lex { span, .. } => assert_eq!((span.start_line, span.start_col), (2, 3)),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn lexemes_reconstruct_source() {
        let src = "model <- function() {\n  n <- sample(uniform-discrete(2,5)); // degree\n  n\n};\nmodel()";
        let toks = tokenize(src).unwrap();
        let mut rebuilt = String::new();
        let mut last = 0;
        for t in &toks {
            rebuilt.push_str(&src[last..t.span.start]);
            assert_eq!(&src[t.span.start..t.span.end], t.lexeme);
            rebuilt.push_str(&t.lexeme);
            last = t.span.end;
        }
        rebuilt.push_str(&src[last..]);
        assert_eq!(rebuilt, src);
        // skipped regions are whitespace or comments only
        let mut last = 0;
        for t in &toks {
            let gap = &src[last..t.span.start];
            assert!(gap.lines().all(|l| {
                let l = l.trim();
                l.is_empty() || l.starts_with("//")
            }));
            last = t.span.end;
        }
    }
}
