#pragma once

#include <string>
#include <vector>

#include "diagnostics.hpp"

namespace otsc {

enum class TokKind {
    KwModStar,
    KwModBang,
    KwOp,
    KwOps,
    KwBop,
    KwBops,
    KwEq,
    KwCeq,
    KwVar,
    KwVars,
    KwPr,
    KwIf,
    Ident,
    IntLit,
    OpName, // mixfix operator name: _+_
    Sym,    // symbol run: + - > >= == =/= = < ...
    LParen,
    RParen,
    LBrace,
    RBrace,
    LBracket,
    RBracket,
    HLBracket, // *[
    HRBracket, // ]*
    Comma,
    Colon,
    Arrow,
    Period,
    Eof,
};

struct Token {
    TokKind kind = TokKind::Eof;
    std::string text;
    long long int_value = 0;
    bool space_before = false; // equation terminator '.' must be preceded by whitespace
    SourceSpan span;
};

/// Tokenizes `.cafe` source. Comments run from `--` to end of line.
/// Returns the token stream (ending in Eof); lexical errors go to the sink.
std::vector<Token> tokenize(const std::string& text, const std::string& file,
                            DiagnosticSink& sink);

} // namespace otsc
