use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::sync::OnceLock;

use regex::Regex;
use thiserror::Error;

use super::segments::{strip_comments, SegmentedProgram, TagKind};
use crate::types::{CoreType, TypeMappingTable};

/// Language tag of a prototype with a URL and no body in any segment.
pub const EMBED_TAG: &str = "EMBED";
/// Language tag of a prototype with neither a body nor a URL.
pub const EXTERN_TAG: &str = "EXTERN";

/// Foreign type tables consulted for declaration types, in order.
const DECL_TABLES: &[&str] = &["JAVA", "CPP"];

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FunctionPrototype {
    pub name: String,
    pub return_type: CoreType,
    pub param_types: Vec<CoreType>,
    /// Types as written in the declaration.
    pub return_decl: String,
    pub param_decls: Vec<String>,
    pub source_url: Option<String>,
    pub alias: Option<String>,
    /// The segment tag whose provider runs the function.
    pub language_tag: String,
    pub line: u32,
}

impl FunctionPrototype {
    /// Prototypes loaded from a URL are embedded code.
    pub fn internal_type(&self) -> CoreType {
        if self.source_url.is_some() {
            CoreType::Embed
        } else {
            CoreType::Function
        }
    }
}

impl fmt::Display for FunctionPrototype {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let params: Vec<String> = self.param_types.iter().map(|t| t.to_string()).collect();
        write!(
            f,
            "{} {}({})",
            self.return_type,
            self.name,
            params.join(", ")
        )?;
        if let Some(url) = &self.source_url {
            write!(f, " url \"{url}\"")?;
        }
        if let Some(alias) = &self.alias {
            write!(f, " alias {alias}")?;
        }
        write!(f, " [{}]", self.language_tag)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum DictionaryError {
    #[error("line {line}: malformed declaration: {reason}")]
    MalformedPrototype { line: u32, reason: String },
    #[error("line {line}: unknown type `{name}`")]
    UnknownType { name: String, line: u32 },
    #[error("line {line}: `{name}` is declared twice")]
    DuplicateSymbol { name: String, line: u32 },
}

impl DictionaryError {
    pub fn line(&self) -> u32 {
        match self {
            DictionaryError::MalformedPrototype { line, .. }
            | DictionaryError::UnknownType { line, .. }
            | DictionaryError::DuplicateSymbol { line, .. } => *line,
        }
    }
}

/// Symbols declared by the type and function declaration segments.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Dictionary {
    pub user_types: BTreeSet<String>,
    pub prototypes: BTreeMap<String, FunctionPrototype>,
    /// alias → prototype name
    pub aliases: BTreeMap<String, String>,
}

impl Dictionary {
    /// The prototype `name` refers to, directly or through an alias.
    pub fn resolve(&self, name: &str) -> Option<&FunctionPrototype> {
        self.prototypes
            .get(name)
            .or_else(|| self.prototypes.get(self.aliases.get(name)?))
    }

    pub fn is_empty(&self) -> bool {
        self.user_types.is_empty() && self.prototypes.is_empty()
    }
}

/// Splits `text` into `;`-terminated statements with the line each starts
/// on. Semicolons inside double quotes do not count. A trailing statement
/// without `;` is returned too, so callers can reject it.
fn statements(text: &str, first_line: u32) -> Vec<(u32, String, bool)> {
    let mut out = Vec::new();
    let mut cur = String::new();
    let mut line = first_line;
    let mut start = None;
    let mut quoted = false;
    for c in text.chars() {
        match c {
            ';' if !quoted => {
                out.push((start.unwrap_or(line), cur.trim().to_string(), true));
                cur.clear();
                start = None;
                continue;
            }
            '"' => quoted = !quoted,
            _ => {}
        }
        if !c.is_whitespace() && start.is_none() {
            start = Some(line);
        }
        if c == '\n' {
            line += 1;
        }
        cur.push(c);
    }
    if !cur.trim().is_empty() {
        out.push((start.unwrap_or(line), cur.trim().to_string(), false));
    }
    out
}

fn ident_re() -> &'static Regex {
    static RE: OnceLock<Regex> = OnceLock::new();
    RE.get_or_init(|| Regex::new(r"^[A-Za-z_][A-Za-z0-9_]*$").unwrap())
}

fn prototype_re() -> &'static Regex {
    static RE: OnceLock<Regex> = OnceLock::new();
    RE.get_or_init(|| {
        Regex::new(
            r#"(?s)^(?P<ret>[A-Za-z_][A-Za-z0-9_:]*(?:\s*\[\s*\])*)\s+(?P<name>[A-Za-z_][A-Za-z0-9_]*)\s*\((?P<params>[^()]*)\)\s*(?::\s*"(?P<url>[^"]*)"\s*)?(?::\s*(?P<alias>[A-Za-z_][A-Za-z0-9_]*)\s*)?$"#,
        )
        .unwrap()
    })
}

fn param_re() -> &'static Regex {
    static RE: OnceLock<Regex> = OnceLock::new();
    RE.get_or_init(|| {
        Regex::new(
            r"^(?P<ty>[A-Za-z_][A-Za-z0-9_:]*(?:\s*\[\s*\])*)(?:\s+[A-Za-z_][A-Za-z0-9_]*)?$",
        )
        .unwrap()
    })
}

/// User type names from a type declaration body, one `;`-terminated name
/// per declaration.
pub fn parse_typedecl(body: &str, first_line: u32) -> Result<Vec<(String, u32)>, DictionaryError> {
    let mut names = Vec::new();
    for (line, stmt, terminated) in statements(&strip_comments(body), first_line) {
        if !terminated {
            return Err(DictionaryError::MalformedPrototype {
                line,
                reason: "missing `;`".into(),
            });
        }
        if stmt.is_empty() {
            continue;
        }
        if !ident_re().is_match(&stmt) {
            return Err(DictionaryError::MalformedPrototype {
                line,
                reason: format!("`{stmt}` is not a type name"),
            });
        }
        names.push((stmt, line));
    }
    Ok(names)
}

/// Core type of a declared type: a user type, a basic foreign type or an
/// array of either.
pub fn map_declared_type(
    text: &str,
    user_types: &BTreeSet<String>,
    table: &TypeMappingTable,
    line: u32,
) -> Result<CoreType, DictionaryError> {
    let text: String = text.chars().filter(|c| !c.is_whitespace()).collect();
    if let Some(elem) = text.strip_suffix("[]") {
        let elem = map_declared_type(elem, user_types, table, line)?;
        if elem == CoreType::Void {
            return Err(DictionaryError::UnknownType { name: text, line });
        }
        return Ok(CoreType::Array(Box::new(elem)));
    }
    if user_types.contains(&text) {
        return Ok(CoreType::Object(text));
    }
    DECL_TABLES
        .iter()
        .filter(|tag| table.has_tag(tag))
        .find_map(|tag| table.map_foreign_return(&text, tag).ok())
        .ok_or(DictionaryError::UnknownType { name: text, line })
}

/// Prototypes from a function declaration body. Each gets the `EMBED` or
/// `EXTERN` language tag; [`build_dictionary`] refines it.
pub fn parse_funcdecl(
    body: &str,
    first_line: u32,
    user_types: &BTreeSet<String>,
    table: &TypeMappingTable,
) -> Result<Vec<FunctionPrototype>, DictionaryError> {
    let mut out = Vec::new();
    for (line, stmt, terminated) in statements(&strip_comments(body), first_line) {
        let malformed = |reason: String| DictionaryError::MalformedPrototype { line, reason };
        if !terminated {
            return Err(malformed(format!("`{stmt}` is missing `;`")));
        }
        if stmt.is_empty() {
            continue;
        }
        let caps = prototype_re()
            .captures(&stmt)
            .ok_or_else(|| malformed(format!("`{stmt}` does not read as `type name(types)`")))?;
        let name = caps["name"].to_string();
        let return_decl = caps["ret"].to_string();
        let params = caps["params"].trim();
        let mut param_decls = Vec::new();
        if !params.is_empty() && params != "void" {
            for p in params.split(',') {
                let p = p.trim();
                let pc = param_re()
                    .captures(p)
                    .ok_or_else(|| malformed(format!("bad parameter `{p}` in `{name}`")))?;
                param_decls.push(pc["ty"].to_string());
            }
        }
        let return_type = map_declared_type(&return_decl, user_types, table, line)?;
        let param_types = param_decls
            .iter()
            .map(|p| match map_declared_type(p, user_types, table, line)? {
                CoreType::Void => Err(DictionaryError::UnknownType {
                    name: p.clone(),
                    line,
                }),
                t => Ok(t),
            })
            .collect::<Result<Vec<_>, _>>()?;
        let source_url = caps.name("url").map(|m| m.as_str().to_string());
        let alias = caps.name("alias").map(|m| m.as_str().to_string());
        if alias.as_deref() == Some(name.as_str()) {
            return Err(malformed(format!("`{name}` is its own alias")));
        }
        let language_tag = if source_url.is_some() {
            EMBED_TAG
        } else {
            EXTERN_TAG
        }
        .to_string();
        out.push(FunctionPrototype {
            name,
            return_type,
            param_types,
            return_decl,
            param_decls,
            source_url,
            alias,
            language_tag,
            line,
        });
    }
    Ok(out)
}

/// Whether some foreign body defines `name`: a word other than a keyword
/// followed by `name(`.
fn defines(body: &str, name: &str) -> bool {
    let re = Regex::new(&format!(
        r"([A-Za-z_][A-Za-z0-9_:<>]*(?:\s*\[\s*\])*)\s+{}\s*\(",
        regex::escape(name)
    ))
    .expect("escaped name");
    let found = re.captures_iter(body).any(|c| {
        let start = c.get(0).map_or(0, |m| m.start());
        let boundary = body[..start]
            .chars()
            .next_back()
            .is_none_or(|ch| !ch.is_alphanumeric() && ch != '_');
        boundary && !matches!(&c[1], "return" | "new" | "else" | "throw" | "case" | "goto")
    });
    found
}

/// Builds the dictionary from the declaration segments. Each prototype's
/// language is the first imperative segment that defines it.
pub fn build_dictionary(
    p: &SegmentedProgram,
    table: &TypeMappingTable,
) -> Result<Dictionary, DictionaryError> {
    let mut d = Dictionary::default();
    if let Some(s) = p.find(TagKind::TypeDecl) {
        for (name, line) in parse_typedecl(&s.body, s.start_line)? {
            if !d.user_types.insert(name.clone()) {
                return Err(DictionaryError::DuplicateSymbol { name, line });
            }
        }
    }
    let Some(s) = p.find(TagKind::FuncDecl) else {
        return Ok(d);
    };
    let bodies: Vec<(String, String)> = p
        .imperative()
        .map(|s| (s.tag.clone(), strip_comments(&s.body)))
        .collect();
    for mut proto in parse_funcdecl(&s.body, s.start_line, &d.user_types, table)? {
        if let Some((tag, _)) = bodies.iter().find(|(_, b)| defines(b, &proto.name)) {
            proto.language_tag = tag.clone();
        }
        let line = proto.line;
        let dup = |name: &str| DictionaryError::DuplicateSymbol {
            name: name.to_string(),
            line,
        };
        if d.prototypes.contains_key(&proto.name) || d.aliases.contains_key(&proto.name) {
            return Err(dup(&proto.name));
        }
        if let Some(alias) = &proto.alias {
            if d.prototypes.contains_key(alias) || d.aliases.contains_key(alias) {
                return Err(dup(alias));
            }
            d.aliases.insert(alias.clone(), proto.name.clone());
        }
        d.prototypes.insert(proto.name.clone(), proto);
    }
    // an alias declared before a prototype of the same name
    for alias in d.aliases.keys() {
        if let Some(p) = d.prototypes.get(alias) {
            return Err(DictionaryError::DuplicateSymbol {
                name: alias.clone(),
                line: p.line,
            });
        }
    }
    Ok(d)
}
