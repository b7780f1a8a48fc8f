#pragma once

#include <optional>
#include <string>
#include <vector>

#include "ast.hpp"
#include "lexer.hpp"

namespace otsc {

/// Parses one `mod*`/`mod!` block starting at `pos`. Advances `pos` past
/// the block (or to Eof on failure). Terms inside equations are built
/// syntactically; name resolution happens in check_modules.
std::optional<SpecModule> parse_module(const std::vector<Token>& tokens, size_t& pos,
                                       DiagnosticSink& sink);

/// Parses a term from source text against a fixed grammar (used by tests
/// and the scenario loader).
std::optional<Term> parse_term_text(const std::string& text, DiagnosticSink& sink);

/// Reads, tokenizes and parses all files; injects the builtin prelude,
/// resolves imports, orders modules by dependency (ties broken by name)
/// and runs the module checker. On errors the returned set may be
/// partial; inspect the sink.
ModuleSet parse_spec(const std::vector<std::string>& files, DiagnosticSink& sink);

/// Same pipeline for in-memory sources (name, text) pairs; used heavily
/// by tests.
ModuleSet parse_spec_sources(const std::vector<std::pair<std::string, std::string>>& sources,
                             DiagnosticSink& sink);

/// Resolves identifiers (variable vs operator), checks sorts, equation
/// executability and declaration well-formedness. Mutates terms in place
/// (identifier applications become variables).
void check_modules(ModuleSet& set, DiagnosticSink& sink);

} // namespace otsc
