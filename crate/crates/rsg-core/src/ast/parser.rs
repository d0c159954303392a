//! Recursive descent parser for model files.
//!
//! The grammar, in rough EBNF (terminals quoted, `*` repetition):
//!
//! ```text
//! model      := item*
//! item       := "root" IDENT | nodeDecl | typeDecl | blockDecl
//! nodeDecl   := ("Node"|"Group"|"Transform"|"GeometricNode") IDENT "{" section* "}"
//! section    := "attributes" "{" (STRING "=" STRING)* "}"
//!             | "cardinality" "*"
//!             | "children" "{" IDENT* "}"
//!             | "cache" "{" entry+ "}"
//!             | "geometry" shape
//! entry      := "transform" "{" "rotation" "[" NUM{9} "]"
//!                "translation" "(" qty "," qty "," qty ")" "stamp" qty "}"
//! shape      := "box" "(" qty "," qty "," qty ")"
//!             | "cylinder" "(" qty "," qty ")"
//!             | "pointcloud" IDENT "{" "points" "{" point* "}" "}"
//!             | "mesh" IDENT "{" "triangles" "{" ("{" point point point "}")* "}" "}"
//! point      := "(" qty "," qty "," qty ")"
//! qty        := NUM IDENT
//! typeDecl   := ("PointCloudType"|"MeshType") IDENT "{" ("hostType" STRING | "header" STRING)* "}"
//! blockDecl  := "FunctionBlock" IDENT "{" (hookKw IDENT)* "}"
//! hookKw     := "inputHook" | "inputStructure" | "outputHook" | "outputStructure"
//! ```
//!
//! Within a declaration each section may appear at most once and sections
//! may come in any order; the pretty printer emits them in a fixed
//! canonical order. Parsing is fail-fast: the first error aborts with a
//! single diagnostic. Sections are additionally checked against the
//! declaration kind here, so a syntactically well-formed tree already
//! satisfies the structural invariants of [`super::SourceModel`]: leaves
//! carry no children, every transform cache has at least one entry and
//! every geometric node has a shape.

use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;

use crate::diag::{DiagCode, Diagnostic, Pos};
use crate::units::{lookup_unit, Quantity};

use super::lexer::{lex, Tok, Token};
use super::{
    Attribute, CacheEntryDecl, Cardinality, Decl, DeclKind, FunctionBlockRefs, GeometryDecl,
    HostTypeDecl, Ident, NameRef, NodeProps, SourceModel,
};

/// Reserved words that cannot be used as declaration names.
const KEYWORDS: &[&str] = &[
    "Node",
    "Group",
    "Transform",
    "GeometricNode",
    "FunctionBlock",
    "PointCloudType",
    "MeshType",
    "root",
    "attributes",
    "cardinality",
    "children",
    "cache",
    "transform",
    "rotation",
    "translation",
    "stamp",
    "geometry",
    "box",
    "cylinder",
    "pointcloud",
    "mesh",
    "points",
    "triangles",
    "inputHook",
    "inputStructure",
    "outputHook",
    "outputStructure",
    "hostType",
    "header",
];

fn is_keyword(word: &str) -> bool {
    KEYWORDS.contains(&word)
}

/// Parses a model file. Fail-fast: the result carries the first error only.
pub fn parse(src: &str) -> Result<SourceModel, Vec<Diagnostic>> {
    let tokens = lex(src).map_err(|d| alloc::vec![d])?;
    let mut parser = Parser { tokens, i: 0 };
    parser.parse_model().map_err(|d| alloc::vec![d])
}

struct Parser {
    tokens: Vec<Token>,
    i: usize,
}

impl Parser {
    fn peek(&self) -> &Token {
        &self.tokens[self.i]
    }

    fn bump(&mut self) -> Token {
        let tok = self.tokens[self.i].clone();
        if self.i + 1 < self.tokens.len() {
            self.i += 1;
        }
        tok
    }

    /// True (and consumes) if the next token is the given bare word.
    fn eat_word(&mut self, word: &str) -> bool {
        if matches!(&self.peek().kind, Tok::Word(w) if w == word) {
            self.bump();
            return true;
        }
        false
    }

    fn syntax_error(&self, pos: Pos, message: String) -> Diagnostic {
        Diagnostic::error(pos, DiagCode::SyntaxError, message)
    }

    fn unexpected(&self, expected: &str) -> Diagnostic {
        let tok = self.peek();
        self.syntax_error(tok.pos, format!("expected {expected}, found {}", tok.kind.describe()))
    }

    fn expect_punct(&mut self, kind: Tok, what: &str) -> Result<Pos, Diagnostic> {
        if self.peek().kind == kind {
            Ok(self.bump().pos)
        } else {
            Err(self.unexpected(what))
        }
    }

    fn expect_ident(&mut self, what: &str) -> Result<Ident, Diagnostic> {
        match &self.peek().kind {
            Tok::Word(w) if !is_keyword(w) => {
                let w = w.clone();
                let pos = self.bump().pos;
                Ok(Ident { text: w, pos })
            }
            Tok::Word(w) => Err(self.syntax_error(
                self.peek().pos,
                format!("`{w}` is a reserved keyword and cannot be used as a name"),
            )),
            _ => Err(self.unexpected(what)),
        }
    }

    fn expect_name_ref(&mut self, what: &str) -> Result<NameRef, Diagnostic> {
        let ident = self.expect_ident(what)?;
        Ok(NameRef { name: ident.text, pos: ident.pos })
    }

    fn expect_string(&mut self, what: &str) -> Result<String, Diagnostic> {
        match &self.peek().kind {
            Tok::Str(s) => {
                let s = s.clone();
                self.bump();
                Ok(s)
            }
            _ => Err(self.unexpected(what)),
        }
    }

    fn expect_number(&mut self) -> Result<f64, Diagnostic> {
        match &self.peek().kind {
            Tok::Num(n) => {
                let n = *n;
                self.bump();
                Ok(n)
            }
            _ => Err(self.unexpected("a number")),
        }
    }

    /// `NUM IDENT` where the identifier must name a known unit.
    fn expect_quantity(&mut self) -> Result<Quantity, Diagnostic> {
        let magnitude = self.expect_number()?;
        match &self.peek().kind {
            Tok::Word(w) => match lookup_unit(w) {
                Some(unit) => {
                    self.bump();
                    Ok(Quantity::new(magnitude, unit))
                }
                None => Err(Diagnostic::error(
                    self.peek().pos,
                    DiagCode::UnknownUnit,
                    format!("unknown unit `{w}`"),
                )),
            },
            _ => Err(self.unexpected("a unit symbol")),
        }
    }

    fn parse_model(&mut self) -> Result<SourceModel, Diagnostic> {
        let mut decls = Vec::new();
        let mut root: Option<NameRef> = None;
        loop {
            let pos = self.peek().pos;
            match &self.peek().kind {
                Tok::Eof => break,
                Tok::Word(w) => match w.as_str() {
                    "root" => {
                        self.bump();
                        let name = self.expect_name_ref("the root node name")?;
                        if root.is_some() {
                            return Err(Diagnostic::error(
                                pos,
                                DiagCode::DuplicateRoot,
                                String::from("duplicate root designation"),
                            ));
                        }
                        root = Some(name);
                    }
                    "Node" | "Group" | "Transform" | "GeometricNode" => {
                        let keyword = w.clone();
                        self.bump();
                        decls.push(self.parse_node_decl(&keyword)?);
                    }
                    "PointCloudType" | "MeshType" => {
                        let keyword = w.clone();
                        self.bump();
                        decls.push(self.parse_type_decl(&keyword)?);
                    }
                    "FunctionBlock" => {
                        self.bump();
                        decls.push(self.parse_function_block()?);
                    }
                    _ => return Err(self.unexpected("a declaration or `root`")),
                },
                _ => return Err(self.unexpected("a declaration or `root`")),
            }
        }
        let root = root.ok_or_else(|| {
            Diagnostic::error(
                Pos::new(1, 1),
                DiagCode::MissingRoot,
                String::from("model has no root designation"),
            )
        })?;
        Ok(SourceModel { decls, root })
    }

    fn parse_node_decl(&mut self, keyword: &str) -> Result<Decl, Diagnostic> {
        let name = self.expect_ident("a declaration name")?;
        self.expect_punct(Tok::LBrace, "`{`")?;

        let mut props = NodeProps::default();
        let mut saw = SeenSections::default();
        let mut cache: Option<Vec<CacheEntryDecl>> = None;
        let mut geometry: Option<GeometryDecl> = None;

        loop {
            let pos = self.peek().pos;
            if self.eat_word("attributes") {
                section_once(&mut saw.attributes, pos, "attributes")?;
                props.attributes = self.parse_attributes()?;
            } else if self.eat_word("cardinality") {
                section_once(&mut saw.cardinality, pos, "cardinality")?;
                self.expect_punct(Tok::Star, "`*`")?;
                props.cardinality = Cardinality::Any;
            } else if self.eat_word("children") {
                if !matches!(keyword, "Group" | "Transform") {
                    return Err(Diagnostic::error(
                        pos,
                        DiagCode::ChildOnLeaf,
                        format!("`{keyword}` declarations are leaves and cannot carry children"),
                    ));
                }
                section_once(&mut saw.children, pos, "children")?;
                props.children = self.parse_children()?;
            } else if self.eat_word("cache") {
                if keyword != "Transform" {
                    return Err(self.syntax_error(
                        pos,
                        format!("`cache` is only allowed on Transform declarations, not `{keyword}`"),
                    ));
                }
                section_once(&mut saw.cache, pos, "cache")?;
                cache = Some(self.parse_cache(pos)?);
            } else if self.eat_word("geometry") {
                if keyword != "GeometricNode" {
                    return Err(self.syntax_error(
                        pos,
                        format!(
                            "`geometry` is only allowed on GeometricNode declarations, not `{keyword}`"
                        ),
                    ));
                }
                section_once(&mut saw.geometry, pos, "geometry")?;
                geometry = Some(self.parse_geometry()?);
            } else if self.peek().kind == Tok::RBrace {
                break;
            } else {
                return Err(self.unexpected("a declaration section or `}`"));
            }
        }
        let close = self.expect_punct(Tok::RBrace, "`}`")?;

        let kind = match keyword {
            "Node" => DeclKind::Node(props),
            "Group" => DeclKind::Group(props),
            "Transform" => {
                let cache = cache.ok_or_else(|| {
                    self.syntax_error(
                        close,
                        format!("Transform `{}` requires a cache section", name.text),
                    )
                })?;
                DeclKind::Transform(props, cache)
            }
            "GeometricNode" => {
                let geometry = geometry.ok_or_else(|| {
                    self.syntax_error(
                        close,
                        format!("GeometricNode `{}` requires a geometry section", name.text),
                    )
                })?;
                DeclKind::GeometricNode(props, geometry)
            }
            _ => unreachable!("caller filters keywords"),
        };
        Ok(Decl { name, kind })
    }

    fn parse_attributes(&mut self) -> Result<Vec<Attribute>, Diagnostic> {
        self.expect_punct(Tok::LBrace, "`{`")?;
        let mut attrs: Vec<Attribute> = Vec::new();
        loop {
            if self.peek().kind == Tok::RBrace {
                self.bump();
                return Ok(attrs);
            }
            let pos = self.peek().pos;
            let key = self.expect_string("an attribute key string or `}`")?;
            self.expect_punct(Tok::Eq, "`=`")?;
            let value = self.expect_string("an attribute value string")?;
            let attr = Attribute { key, value };
            if attrs.contains(&attr) {
                return Err(Diagnostic::error(
                    pos,
                    DiagCode::DuplicateAttribute,
                    format!("duplicate attribute pair (\"{}\", \"{}\")", attr.key, attr.value),
                ));
            }
            attrs.push(attr);
        }
    }

    fn parse_children(&mut self) -> Result<Vec<NameRef>, Diagnostic> {
        self.expect_punct(Tok::LBrace, "`{`")?;
        let mut children = Vec::new();
        loop {
            if self.peek().kind == Tok::RBrace {
                self.bump();
                return Ok(children);
            }
            children.push(self.expect_name_ref("a child name or `}`")?);
        }
    }

    fn parse_cache(&mut self, section_pos: Pos) -> Result<Vec<CacheEntryDecl>, Diagnostic> {
        self.expect_punct(Tok::LBrace, "`{`")?;
        let mut entries = Vec::new();
        loop {
            if self.peek().kind == Tok::RBrace {
                self.bump();
                break;
            }
            entries.push(self.parse_cache_entry()?);
        }
        if entries.is_empty() {
            return Err(self.syntax_error(
                section_pos,
                String::from("cache requires at least one transform entry"),
            ));
        }
        Ok(entries)
    }

    fn parse_cache_entry(&mut self) -> Result<CacheEntryDecl, Diagnostic> {
        let pos = self.peek().pos;
        if !self.eat_word("transform") {
            return Err(self.unexpected("`transform` or `}`"));
        }
        self.expect_punct(Tok::LBrace, "`{`")?;
        if !self.eat_word("rotation") {
            return Err(self.unexpected("`rotation`"));
        }
        self.expect_punct(Tok::LBracket, "`[`")?;
        let mut rotation = [0.0f64; 9];
        for slot in rotation.iter_mut() {
            *slot = self.expect_number()?;
        }
        self.expect_punct(Tok::RBracket, "`]`")?;
        if !self.eat_word("translation") {
            return Err(self.unexpected("`translation`"));
        }
        let translation = self.parse_quantity_triple()?;
        if !self.eat_word("stamp") {
            return Err(self.unexpected("`stamp`"));
        }
        let stamp = self.expect_quantity()?;
        self.expect_punct(Tok::RBrace, "`}`")?;
        Ok(CacheEntryDecl { rotation, translation, stamp, pos })
    }

    fn parse_quantity_triple(&mut self) -> Result<[Quantity; 3], Diagnostic> {
        self.expect_punct(Tok::LParen, "`(`")?;
        let a = self.expect_quantity()?;
        self.expect_punct(Tok::Comma, "`,`")?;
        let b = self.expect_quantity()?;
        self.expect_punct(Tok::Comma, "`,`")?;
        let c = self.expect_quantity()?;
        self.expect_punct(Tok::RParen, "`)`")?;
        Ok([a, b, c])
    }

    fn parse_geometry(&mut self) -> Result<GeometryDecl, Diagnostic> {
        if self.eat_word("box") {
            let [x, y, z] = self.parse_quantity_triple()?;
            return Ok(GeometryDecl::Box { x, y, z });
        }
        if self.eat_word("cylinder") {
            self.expect_punct(Tok::LParen, "`(`")?;
            let radius = self.expect_quantity()?;
            self.expect_punct(Tok::Comma, "`,`")?;
            let height = self.expect_quantity()?;
            self.expect_punct(Tok::RParen, "`)`")?;
            return Ok(GeometryDecl::Cylinder { radius, height });
        }
        if self.eat_word("pointcloud") {
            let type_ref = self.expect_name_ref("a point cloud type name")?;
            self.expect_punct(Tok::LBrace, "`{`")?;
            if !self.eat_word("points") {
                return Err(self.unexpected("`points`"));
            }
            self.expect_punct(Tok::LBrace, "`{`")?;
            let mut points = Vec::new();
            while self.peek().kind != Tok::RBrace {
                points.push(self.parse_quantity_triple()?);
            }
            self.bump(); // closing brace of points
            self.expect_punct(Tok::RBrace, "`}`")?;
            return Ok(GeometryDecl::PointCloud { type_ref, points });
        }
        if self.eat_word("mesh") {
            let type_ref = self.expect_name_ref("a mesh type name")?;
            self.expect_punct(Tok::LBrace, "`{`")?;
            if !self.eat_word("triangles") {
                return Err(self.unexpected("`triangles`"));
            }
            self.expect_punct(Tok::LBrace, "`{`")?;
            let mut triangles = Vec::new();
            while self.peek().kind != Tok::RBrace {
                self.expect_punct(Tok::LBrace, "`{`")?;
                let a = self.parse_quantity_triple()?;
                let b = self.parse_quantity_triple()?;
                let c = self.parse_quantity_triple()?;
                self.expect_punct(Tok::RBrace, "`}`")?;
                triangles.push([a, b, c]);
            }
            self.bump(); // closing brace of triangles
            self.expect_punct(Tok::RBrace, "`}`")?;
            return Ok(GeometryDecl::Mesh { type_ref, triangles });
        }
        Err(self.unexpected("a shape (`box`, `cylinder`, `pointcloud` or `mesh`)"))
    }

    fn parse_type_decl(&mut self, keyword: &str) -> Result<Decl, Diagnostic> {
        let name = self.expect_ident("a declaration name")?;
        self.expect_punct(Tok::LBrace, "`{`")?;
        let mut host_type: Option<String> = None;
        let mut header: Option<String> = None;
        loop {
            let pos = self.peek().pos;
            if self.eat_word("hostType") {
                if host_type.is_some() {
                    return Err(self.syntax_error(pos, String::from("duplicate hostType field")));
                }
                host_type = Some(self.expect_string("the host type string")?);
            } else if self.eat_word("header") {
                if header.is_some() {
                    return Err(self.syntax_error(pos, String::from("duplicate header field")));
                }
                header = Some(self.expect_string("the header path string")?);
            } else if self.peek().kind == Tok::RBrace {
                break;
            } else {
                return Err(self.unexpected("`hostType`, `header` or `}`"));
            }
        }
        let close = self.expect_punct(Tok::RBrace, "`}`")?;
        let host_type = host_type.ok_or_else(|| {
            self.syntax_error(close, format!("{keyword} `{}` requires a hostType field", name.text))
        })?;
        let decl = HostTypeDecl { host_type, header };
        let kind = if keyword == "PointCloudType" {
            DeclKind::PointCloudType(decl)
        } else {
            DeclKind::MeshType(decl)
        };
        Ok(Decl { name, kind })
    }

    fn parse_function_block(&mut self) -> Result<Decl, Diagnostic> {
        let name = self.expect_ident("a declaration name")?;
        self.expect_punct(Tok::LBrace, "`{`")?;
        let mut fields: [Option<NameRef>; 4] = [None, None, None, None];
        const FIELDS: [&str; 4] = ["inputHook", "inputStructure", "outputHook", "outputStructure"];
        loop {
            let pos = self.peek().pos;
            let Tok::Word(w) = &self.peek().kind else {
                break;
            };
            let Some(idx) = FIELDS.iter().position(|f| f == w) else {
                break;
            };
            self.bump();
            if fields[idx].is_some() {
                return Err(self.syntax_error(pos, format!("duplicate {} field", FIELDS[idx])));
            }
            fields[idx] = Some(self.expect_name_ref("a node name")?);
        }
        let close = self.expect_punct(Tok::RBrace, "`}`")?;
        let [input_hook, input_structure, output_hook, output_structure] = fields;
        let require = |field: Option<NameRef>, label: &str| {
            field.ok_or_else(|| {
                self.syntax_error(
                    close,
                    format!("FunctionBlock `{}` requires a {label} field", name.text),
                )
            })
        };
        let refs = FunctionBlockRefs {
            input_hook: require(input_hook, "inputHook")?,
            input_structure: require(input_structure, "inputStructure")?,
            output_hook: require(output_hook, "outputHook")?,
            output_structure: require(output_structure, "outputStructure")?,
        };
        Ok(Decl { name, kind: DeclKind::FunctionBlock(refs) })
    }
}

/// Tracks which sections of one declaration were already seen.
#[derive(Default)]
struct SeenSections {
    attributes: bool,
    cardinality: bool,
    children: bool,
    cache: bool,
    geometry: bool,
}

fn section_once(flag: &mut bool, pos: Pos, what: &str) -> Result<(), Diagnostic> {
    if *flag {
        return Err(Diagnostic::error(
            pos,
            DiagCode::SyntaxError,
            format!("duplicate {what} section"),
        ));
    }
    *flag = true;
    Ok(())
}
