//! Shared diagnostic types emitted by the parser, resolver and validator.

use alloc::string::String;
use core::fmt;

/// 1-based line/column position inside a source file.
///
/// Positions are carried for error reporting only; two syntax trees that
/// differ merely in where their tokens sat in the file are considered equal,
/// so `Pos` compares equal to every other `Pos`.
#[derive(Clone, Copy, Debug, Default)]
pub struct Pos {
    pub line: u32,
    pub col: u32,
}

impl Pos {
    pub fn new(line: u32, col: u32) -> Self {
        Pos { line, col }
    }
}

impl PartialEq for Pos {
    fn eq(&self, _other: &Self) -> bool {
        true
    }
}

impl Eq for Pos {}

impl fmt::Display for Pos {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}:{}", self.line, self.col)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Severity {
    Error,
    Warning,
}

impl fmt::Display for Severity {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Severity::Error => write!(f, "error"),
            Severity::Warning => write!(f, "warning"),
        }
    }
}

/// Machine readable diagnostic categories.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum DiagCode {
    LexError,
    SyntaxError,
    MissingRoot,
    DuplicateRoot,
    UnknownUnit,
    NonFiniteLiteral,
    DuplicateAttribute,
    UndefinedName,
    DuplicateName,
    RootNotGrouplike,
    InvalidReference,
    CycleDetected,
    NonpositiveDimension,
    NonmonotoneCache,
    InvalidRotation,
    ChildOnLeaf,
    DimensionMismatch,
    StampOutOfRange,
    CardinalityOutsideStructure,
    UnreachableDecl,
}

impl DiagCode {
    pub fn as_str(&self) -> &'static str {
        match self {
            DiagCode::LexError => "LEX_ERROR",
            DiagCode::SyntaxError => "SYNTAX_ERROR",
            DiagCode::MissingRoot => "MISSING_ROOT",
            DiagCode::DuplicateRoot => "DUPLICATE_ROOT",
            DiagCode::UnknownUnit => "UNKNOWN_UNIT",
            DiagCode::NonFiniteLiteral => "NON_FINITE_LITERAL",
            DiagCode::DuplicateAttribute => "DUPLICATE_ATTRIBUTE",
            DiagCode::UndefinedName => "UNDEFINED_NAME",
            DiagCode::DuplicateName => "DUPLICATE_NAME",
            DiagCode::RootNotGrouplike => "ROOT_NOT_GROUPLIKE",
            DiagCode::InvalidReference => "INVALID_REFERENCE",
            DiagCode::CycleDetected => "CYCLE_DETECTED",
            DiagCode::NonpositiveDimension => "NONPOSITIVE_DIMENSION",
            DiagCode::NonmonotoneCache => "NONMONOTONE_CACHE",
            DiagCode::InvalidRotation => "INVALID_ROTATION",
            DiagCode::ChildOnLeaf => "CHILD_ON_LEAF",
            DiagCode::DimensionMismatch => "DIMENSION_MISMATCH",
            DiagCode::StampOutOfRange => "STAMP_OUT_OF_RANGE",
            DiagCode::CardinalityOutsideStructure => "CARDINALITY_OUTSIDE_STRUCTURE",
            DiagCode::UnreachableDecl => "UNREACHABLE_DECL",
        }
    }
}

/// A single parser/validator finding, formatted as `line:col: severity: message`.
///
/// The file name is not stored here; front ends prepend it when printing.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Diagnostic {
    pub severity: Severity,
    pub pos: Pos,
    pub code: DiagCode,
    pub message: String,
}

impl Diagnostic {
    pub fn error(pos: Pos, code: DiagCode, message: String) -> Self {
        Diagnostic { severity: Severity::Error, pos, code, message }
    }

    pub fn warning(pos: Pos, code: DiagCode, message: String) -> Self {
        Diagnostic { severity: Severity::Warning, pos, code, message }
    }
}

impl fmt::Display for Diagnostic {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "{}:{}: {}: {}: {}",
            self.pos.line,
            self.pos.col,
            self.severity,
            self.code.as_str(),
            self.message
        )
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::format;
    use alloc::string::ToString;

    #[test]
    fn display_format_is_line_col_severity_message() {
        let d = Diagnostic::error(
            Pos::new(3, 7),
            DiagCode::UndefinedName,
            "reference to undefined name `ghost`".to_string(),
        );
        assert_eq!(
            format!("{d}"),
            "3:7: error: UNDEFINED_NAME: reference to undefined name `ghost`"
        );
    }

    #[test]
    fn positions_are_ignored_by_equality() {
        assert_eq!(Pos::new(1, 1), Pos::new(99, 42));
    }
}
