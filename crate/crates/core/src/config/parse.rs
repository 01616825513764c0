use std::collections::{BTreeMap, HashMap};
use std::fmt;

use super::ConfigError;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Verb {
    NamedInstanceAdd,
    AlgorithmStart,
}

impl Verb {
    fn parse(s: &str) -> Option<Verb> {
        match s {
            "namedInstanceAdd" => Some(Verb::NamedInstanceAdd),
            "algorithmStart" => Some(Verb::AlgorithmStart),
            _ => None,
        }
    }
}

impl fmt::Display for Verb {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Verb::NamedInstanceAdd => "namedInstanceAdd",
            Verb::AlgorithmStart => "algorithmStart",
        })
    }
}

/// A parameter literal.
#[derive(Clone, Debug, PartialEq)]
pub enum Value {
    Int(i64),
    Real(f64),
    Str(String),
    /// `<name>`, replaced by [`substitute`].
    Placeholder(String),
    /// A bare identifier naming an instance.
    Ref(String),
    /// A dotted type path, optionally followed by a constructor argument list.
    Type { path: String, args: Option<Vec<Value>> },
}

impl fmt::Display for Value {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Value::Int(i) => write!(f, "{i}"),
            // Debug keeps a decimal point or exponent, so it re-parses as a real
            Value::Real(x) => write!(f, "{x:?}"),
            Value::Str(s) => {
                f.write_str("\"")?;
                for c in s.chars() {
                    match c {
                        '"' => f.write_str("\\\"")?,
                        '\\' => f.write_str("\\\\")?,
                        '\n' => f.write_str("\\n")?,
                        '\t' => f.write_str("\\t")?,
                        c => write!(f, "{c}")?,
                    }
                }
                f.write_str("\"")
            }
            Value::Placeholder(p) => write!(f, "<{p}>"),
            Value::Ref(r) => f.write_str(r),
            Value::Type { path, args: None } => f.write_str(path),
            Value::Type { path, args: Some(args) } => {
                write!(f, "{path}(")?;
                for (i, a) in args.iter().enumerate() {
                    if i > 0 {
                        f.write_str(", ")?;
                    }
                    write!(f, "{a}")?;
                }
                f.write_str(")")
            }
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct ConfigAction {
    pub name: String,
    pub verb: Verb,
    /// `params[0]` is `param.1`.
    pub params: Vec<Value>,
}

pub type Bindings = BTreeMap<String, Value>;

fn is_ident_start(c: char) -> bool {
    c.is_ascii_alphabetic() || c == '_'
}

fn is_ident(s: &str) -> bool {
    let mut chars = s.chars();
    chars.next().is_some_and(is_ident_start) && chars.all(|c| c.is_ascii_alphanumeric() || c == '_')
}

struct ValueParser<'a> {
    src: &'a str,
    pos: usize,
}

impl<'a> ValueParser<'a> {
    fn peek(&self) -> Option<char> {
        self.src[self.pos..].chars().next()
    }

    fn bump(&mut self) -> Option<char> {
        let c = self.peek()?;
        self.pos += c.len_utf8();
        Some(c)
    }

    fn skip_ws(&mut self) {
        while self.peek().is_some_and(char::is_whitespace) {
            self.bump();
        }
    }

    fn expect(&mut self, want: char) -> Result<(), String> {
        match self.bump() {
            Some(c) if c == want => Ok(()),
            Some(c) => Err(format!("expected {want:?}, found {c:?} at column {}", self.pos)),
            None => Err(format!("expected {want:?}, found end of line")),
        }
    }

    fn ident(&mut self) -> Result<&'a str, String> {
        let start = self.pos;
        match self.peek() {
            Some(c) if is_ident_start(c) => {}
            Some(c) => return Err(format!("unexpected {c:?} at column {}", self.pos + 1)),
            None => return Err("unexpected end of line".into()),
        }
        while self.peek().is_some_and(|c| c.is_ascii_alphanumeric() || c == '_') {
            self.bump();
        }
        Ok(&self.src[start..self.pos])
    }

    fn value(&mut self) -> Result<Value, String> {
        self.skip_ws();
        match self.peek() {
            None => Err("missing value".into()),
            Some('"') => self.string(),
            Some('<') => {
                self.bump();
                let name = self.ident()?;
                self.expect('>')?;
                Ok(Value::Placeholder(name.to_owned()))
            }
            Some(c) if c.is_ascii_digit() || c == '-' || c == '+' || c == '.' => self.number(),
            Some(_) => self.path(),
        }
    }

    fn string(&mut self) -> Result<Value, String> {
        self.expect('"')?;
        let mut out = String::new();
        loop {
            match self.bump() {
                None => return Err("unterminated string literal".into()),
                Some('"') => return Ok(Value::Str(out)),
                Some('\\') => match self.bump() {
                    Some('"') => out.push('"'),
                    Some('\\') => out.push('\\'),
                    Some('n') => out.push('\n'),
                    Some('t') => out.push('\t'),
                    Some(c) => return Err(format!("unknown escape \\{c}")),
                    None => return Err("unterminated string literal".into()),
                },
                Some(c) => out.push(c),
            }
        }
    }

    fn number(&mut self) -> Result<Value, String> {
        let start = self.pos;
        let mut real = false;
        if matches!(self.peek(), Some('-' | '+')) {
            self.bump();
        }
        while let Some(c) = self.peek() {
            match c {
                '0'..='9' => {}
                '.' | 'e' | 'E' => real = true,
                '-' | '+' if matches!(self.src[..self.pos].chars().last(), Some('e' | 'E')) => {}
                _ => break,
            }
            self.bump();
        }
        let text = &self.src[start..self.pos];
        if real {
            match text.parse::<f64>() {
                Ok(x) if x.is_finite() => Ok(Value::Real(x)),
                _ => Err(format!("invalid number {text:?}")),
            }
        } else {
            text.parse::<i64>().map(Value::Int).map_err(|_| format!("invalid integer {text:?}"))
        }
    }

    fn path(&mut self) -> Result<Value, String> {
        let start = self.pos;
        self.ident()?;
        let mut dotted = false;
        while self.peek() == Some('.') {
            self.bump();
            self.ident()?;
            dotted = true;
        }
        let path = self.src[start..self.pos].to_owned();
        self.skip_ws();
        if self.peek() != Some('(') {
            return Ok(if dotted { Value::Type { path, args: None } } else { Value::Ref(path) });
        }
        self.bump();
        let mut args = Vec::new();
        self.skip_ws();
        if self.peek() == Some(')') {
            self.bump();
            return Ok(Value::Type { path, args: Some(args) });
        }
        loop {
            args.push(self.value()?);
            self.skip_ws();
            match self.bump() {
                Some(',') => continue,
                Some(')') => return Ok(Value::Type { path, args: Some(args) }),
                Some(c) => return Err(format!("expected ',' or ')', found {c:?}")),
                None => return Err("unclosed argument list".into()),
            }
        }
    }
}

/// Parses one parameter literal, e.g. `16`, `"x"` or `Path(1, <w>)`.
pub fn parse_value(text: &str) -> Result<Value, String> {
    let mut p = ValueParser { src: text, pos: 0 };
    let v = p.value()?;
    p.skip_ws();
    if p.pos != text.len() {
        return Err(format!("unexpected trailing text {:?}", &text[p.pos..]));
    }
    Ok(v)
}

struct Draft {
    name: String,
    verb: Verb,
    /// param index -> (value, line)
    params: BTreeMap<usize, (Value, usize)>,
}

/// Parses configuration text into actions, in file order.
pub fn parse_config(text: &str) -> Result<Vec<ConfigAction>, ConfigError> {
    let mut drafts: Vec<Draft> = Vec::new();
    let mut by_name: HashMap<String, usize> = HashMap::new();
    for (n, raw) in text.lines().enumerate() {
        let line = n + 1;
        let content = raw.trim();
        if content.is_empty() || content.starts_with('#') {
            continue;
        }
        let syntax = |msg: String| ConfigError::Syntax { line, msg };
        let (lhs, rhs) = content.split_once('=').ok_or_else(|| syntax("expected `NAME = VALUE`".into()))?;
        let (lhs, rhs) = (lhs.trim(), rhs.trim());
        let parts: Vec<&str> = lhs.split('.').collect();
        match parts.as_slice() {
            [name] if is_ident(name) => {
                if !is_ident(rhs) {
                    return Err(syntax(format!("expected an action verb, found {rhs:?}")));
                }
                let verb = Verb::parse(rhs).ok_or_else(|| ConfigError::UnknownVerb { line, verb: rhs.to_owned() })?;
                if by_name.contains_key(*name) {
                    return Err(ConfigError::DuplicateAction { line, name: name.to_string() });
                }
                by_name.insert(name.to_string(), drafts.len());
                drafts.push(Draft { name: name.to_string(), verb, params: BTreeMap::new() });
            }
            [name, "param", index] if is_ident(name) => {
                let index: usize = index
                    .parse()
                    .ok()
                    .filter(|&i| i >= 1)
                    .ok_or_else(|| syntax(format!("parameter index must be a positive integer, found {index:?}")))?;
                let &slot = by_name
                    .get(*name)
                    .ok_or_else(|| ConfigError::UndeclaredAction { line, name: name.to_string() })?;
                let value = parse_value(rhs).map_err(syntax)?;
                let draft = &mut drafts[slot];
                if draft.params.insert(index, (value, line)).is_some() {
                    return Err(ConfigError::DuplicateParam { line, action: name.to_string(), index });
                }
            }
            _ => return Err(syntax(format!("malformed left-hand side {lhs:?}"))),
        }
    }
    drafts
        .into_iter()
        .map(|d| {
            let mut params = Vec::with_capacity(d.params.len());
            for (expected, (index, (value, line))) in (1..).zip(d.params) {
                if index != expected {
                    return Err(ConfigError::NonContiguousParams { line, action: d.name, missing: expected });
                }
                params.push(value);
            }
            Ok(ConfigAction { name: d.name, verb: d.verb, params })
        })
        .collect()
}

/// Renders actions back to configuration text.
pub fn render_config(actions: &[ConfigAction]) -> String {
    let mut out = String::new();
    for (i, a) in actions.iter().enumerate() {
        if i > 0 {
            out.push('\n');
        }
        out.push_str(&format!("{} = {}\n", a.name, a.verb));
        for (k, v) in a.params.iter().enumerate() {
            out.push_str(&format!("{}.param.{} = {}\n", a.name, k + 1, v));
        }
    }
    out
}

fn substitute_value(v: &Value, bindings: &Bindings, action: &str, param: usize) -> Result<Value, ConfigError> {
    Ok(match v {
        Value::Placeholder(name) => bindings.get(name).cloned().ok_or_else(|| ConfigError::UnresolvedPlaceholder {
            action: action.to_owned(),
            param,
            name: name.clone(),
        })?,
        Value::Type { path, args: Some(args) } => Value::Type {
            path: path.clone(),
            args: Some(args.iter().map(|a| substitute_value(a, bindings, action, param)).collect::<Result<_, _>>()?),
        },
        other => other.clone(),
    })
}

/// Replaces every `<name>` placeholder with its binding.
pub fn substitute(actions: &[ConfigAction], bindings: &Bindings) -> Result<Vec<ConfigAction>, ConfigError> {
    actions
        .iter()
        .map(|a| {
            let params = a
                .params
                .iter()
                .enumerate()
                .map(|(i, v)| substitute_value(v, bindings, &a.name, i + 1))
                .collect::<Result<_, _>>()?;
            Ok(ConfigAction { name: a.name.clone(), verb: a.verb, params })
        })
        .collect()
}
