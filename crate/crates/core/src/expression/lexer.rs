use crate::error::ParseError;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Keyword {
    And,
    Or,
    Not,
    Is,
    Null,
    Like,
    True,
    False,
    Datetime,
    Asc,
    Desc,
}

impl Keyword {
    fn lookup(word: &str) -> Option<Keyword> {
        const WORDS: [(&str, Keyword); 11] = [
            ("and", Keyword::And),
            ("or", Keyword::Or),
            ("not", Keyword::Not),
            ("is", Keyword::Is),
            ("null", Keyword::Null),
            ("like", Keyword::Like),
            ("true", Keyword::True),
            ("false", Keyword::False),
            ("datetime", Keyword::Datetime),
            ("asc", Keyword::Asc),
            ("desc", Keyword::Desc),
        ];
        WORDS
            .iter()
            .find(|(w, _)| w.eq_ignore_ascii_case(word))
            .map(|(_, k)| *k)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum TokenKind {
    Ident(String),
    Keyword(Keyword),
    Integer(i64),
    Decimal(f64),
    Text(String),
    Eq,
    NotEq,
    Lt,
    LtEq,
    Gt,
    GtEq,
    LParen,
    RParen,
    Comma,
    End,
}

impl TokenKind {
    pub fn describe(&self) -> String {
        match self {
            TokenKind::Ident(s) => format!("identifier '{s}'"),
            TokenKind::Keyword(k) => format!("keyword {}", format!("{k:?}").to_lowercase()),
            TokenKind::Integer(i) => format!("number {i}"),
            TokenKind::Decimal(x) => format!("number {x}"),
            TokenKind::Text(_) => "string literal".into(),
            TokenKind::Eq => "'='".into(),
            TokenKind::NotEq => "'<>'".into(),
            TokenKind::Lt => "'<'".into(),
            TokenKind::LtEq => "'<='".into(),
            TokenKind::Gt => "'>'".into(),
            TokenKind::GtEq => "'>='".into(),
            TokenKind::LParen => "'('".into(),
            TokenKind::RParen => "')'".into(),
            TokenKind::Comma => "','".into(),
            TokenKind::End => "end of input".into(),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Token {
    pub kind: TokenKind,
    /// 1-based character offset of the first character.
    pub offset: usize,
}

/// Splits the whole input into tokens up front, so any character outside the
/// language (`;`, quotes other than `'`, comment markers, brackets) is
/// rejected before parsing starts.
pub fn tokenize(input: &str) -> Result<Vec<Token>, ParseError> {
    let chars: Vec<char> = input.chars().collect();
    let mut tokens = Vec::new();
    let mut i = 0;
    while i < chars.len() {
        let c = chars[i];
        let offset = i + 1;
        if c.is_whitespace() {
            i += 1;
            continue;
        }
        let kind = match c {
            '(' => {
                i += 1;
                TokenKind::LParen
            }
            ')' => {
                i += 1;
                TokenKind::RParen
            }
            ',' => {
                i += 1;
                TokenKind::Comma
            }
            '=' => {
                i += 1;
                TokenKind::Eq
            }
            '<' => match chars.get(i + 1) {
                Some('>') => {
                    i += 2;
                    TokenKind::NotEq
                }
                Some('=') => {
                    i += 2;
                    TokenKind::LtEq
                }
                _ => {
                    i += 1;
                    TokenKind::Lt
                }
            },
            '>' => match chars.get(i + 1) {
                Some('=') => {
                    i += 2;
                    TokenKind::GtEq
                }
                _ => {
                    i += 1;
                    TokenKind::Gt
                }
            },
            '\'' => {
                let (text, next) = lex_text(&chars, i)?;
                i = next;
                TokenKind::Text(text)
            }
            '-' if chars.get(i + 1).is_some_and(char::is_ascii_digit) => {
                let (kind, next) = lex_number(&chars, i)?;
                i = next;
                kind
            }
            c if c.is_ascii_digit() => {
                let (kind, next) = lex_number(&chars, i)?;
                i = next;
                kind
            }
            c if c.is_ascii_alphabetic() || c == '_' => {
                let start = i;
                while i < chars.len() && (chars[i].is_ascii_alphanumeric() || chars[i] == '_') {
                    i += 1;
                }
                let word: String = chars[start..i].iter().collect();
                match Keyword::lookup(&word) {
                    Some(k) => TokenKind::Keyword(k),
                    None => TokenKind::Ident(word),
                }
            }
            other => {
                return Err(ParseError {
                    offset,
                    expected: "a token".into(),
                    found: format!("character {other:?}"),
                })
            }
        };
        tokens.push(Token { kind, offset });
    }
    tokens.push(Token {
        kind: TokenKind::End,
        offset: chars.len() + 1,
    });
    Ok(tokens)
}

/// `'...'` with `''` standing for one embedded quote.
fn lex_text(chars: &[char], start: usize) -> Result<(String, usize), ParseError> {
    let mut out = String::new();
    let mut i = start + 1;
    loop {
        match chars.get(i) {
            None => {
                return Err(ParseError {
                    offset: start + 1,
                    expected: "closing quote".into(),
                    found: "end of input".into(),
                })
            }
            Some('\'') if chars.get(i + 1) == Some(&'\'') => {
                out.push('\'');
                i += 2;
            }
            Some('\'') => return Ok((out, i + 1)),
            Some(c) => {
                out.push(*c);
                i += 1;
            }
        }
    }
}

/// `-? digits ("." digits)? ([eE] [+-]? digits)?`
fn lex_number(chars: &[char], start: usize) -> Result<(TokenKind, usize), ParseError> {
    let mut i = start;
    if chars[i] == '-' {
        i += 1;
    }
    let digits = |i: &mut usize| {
        let from = *i;
        while *i < chars.len() && chars[*i].is_ascii_digit() {
            *i += 1;
        }
        *i > from
    };
    digits(&mut i);
    let mut decimal = false;
    if chars.get(i) == Some(&'.') {
        i += 1;
        if !digits(&mut i) {
            return Err(ParseError {
                offset: i + 1,
                expected: "digits after decimal point".into(),
                found: describe_char(chars.get(i)),
            });
        }
        decimal = true;
    }
    if matches!(chars.get(i), Some('e' | 'E')) {
        i += 1;
        if matches!(chars.get(i), Some('+' | '-')) {
            i += 1;
        }
        if !digits(&mut i) {
            return Err(ParseError {
                offset: i + 1,
                expected: "exponent digits".into(),
                found: describe_char(chars.get(i)),
            });
        }
        decimal = true;
    }
    if chars
        .get(i)
        .is_some_and(|c| c.is_ascii_alphabetic() || *c == '_')
    {
        return Err(ParseError {
            offset: i + 1,
            expected: "end of number".into(),
            found: describe_char(chars.get(i)),
        });
    }
    let text: String = chars[start..i].iter().collect();
    let out_of_range = || ParseError {
        offset: start + 1,
        expected: "a number in range".into(),
        found: text.clone(),
    };
    let kind = if decimal {
        let x: f64 = text.parse().map_err(|_| out_of_range())?;
        if !x.is_finite() {
            return Err(out_of_range());
        }
        TokenKind::Decimal(x)
    } else {
        TokenKind::Integer(text.parse().map_err(|_| out_of_range())?)
    };
    Ok((kind, i))
}

fn describe_char(c: Option<&char>) -> String {
    match c {
        Some(c) => format!("character {c:?}"),
        None => "end of input".into(),
    }
}
