#pragma once

#include <string>
#include <utility>
#include <vector>

namespace otsc {

struct SourceSpan {
    std::string file;
    int start_line = 0, start_col = 0;
    int end_line = 0, end_col = 0;

    bool valid() const { return start_line > 0; }
};

inline SourceSpan join_spans(const SourceSpan& a, const SourceSpan& b) {
    if (!a.valid()) return b;
    if (!b.valid()) return a;
    SourceSpan s = a;
    s.end_line = b.end_line;
    s.end_col = b.end_col;
    return s;
}

enum class Severity { Error, Warning };

/// One reported problem. `code` is drawn from the closed set listed in
/// docs/diagnostics.md.
struct Diagnostic {
    Severity severity = Severity::Error;
    std::string code;
    std::string message;
    SourceSpan span;
};

class DiagnosticSink {
public:
    void error(std::string code, std::string message, SourceSpan span = {}) {
        items_.push_back({Severity::Error, std::move(code), std::move(message), std::move(span)});
    }
    void warn(std::string code, std::string message, SourceSpan span = {}) {
        items_.push_back({Severity::Warning, std::move(code), std::move(message), std::move(span)});
    }
    void add(Diagnostic d) { items_.push_back(std::move(d)); }

    bool has_errors() const {
        for (const auto& d : items_)
            if (d.severity == Severity::Error) return true;
        return false;
    }
    bool empty() const { return items_.empty(); }
    const std::vector<Diagnostic>& items() const { return items_; }

    void merge_from(DiagnosticSink& other) {
        for (auto& d : other.items_) items_.push_back(std::move(d));
        other.items_.clear();
    }

private:
    std::vector<Diagnostic> items_;
};

/// Renders "file:line:col: severity: code: message", the format the CLI
/// prints on standard error.
std::string format_diagnostic(const Diagnostic& d);

} // namespace otsc
