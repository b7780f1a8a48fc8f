#include "lexer.hpp"

#include <cctype>
#include <map>

namespace otsc {

namespace {

bool ident_start(char c) { return std::isalpha(static_cast<unsigned char>(c)); }
bool ident_cont(char c) {
    return std::isalnum(static_cast<unsigned char>(c)) || c == '-' || c == '\'';
}
bool sym_char(char c) {
    static const std::string chars = "+-*/\\<>=~!@$%^&?|";
    return chars.find(c) != std::string::npos;
}

const std::map<std::string, TokKind>& keywords() {
    static const std::map<std::string, TokKind> kw = {
        {"op", TokKind::KwOp},   {"ops", TokKind::KwOps},   {"bop", TokKind::KwBop},
        {"bops", TokKind::KwBops}, {"eq", TokKind::KwEq},   {"ceq", TokKind::KwCeq},
        {"var", TokKind::KwVar}, {"vars", TokKind::KwVars}, {"pr", TokKind::KwPr},
        {"if", TokKind::KwIf},
    };
    return kw;
}

class Lexer {
public:
    Lexer(const std::string& text, std::string file, DiagnosticSink& sink)
        : text_(text), file_(std::move(file)), sink_(sink) {}

    std::vector<Token> run() {
        std::vector<Token> out;
        bool space = true;
        while (pos_ < text_.size()) {
            char c = text_[pos_];
            if (c == ' ' || c == '\t' || c == '\r' || c == '\n') {
                advance();
                space = true;
                continue;
            }
            if (c == '-' && peek(1) == '-') {
                while (pos_ < text_.size() && text_[pos_] != '\n') advance();
                space = true;
                continue;
            }
            Token t = next();
            t.space_before = space;
            space = false;
            if (t.kind != TokKind::Eof) out.push_back(std::move(t));
        }
        Token eof;
        eof.kind = TokKind::Eof;
        eof.span = {file_, line_, col_, line_, col_};
        out.push_back(eof);
        return out;
    }

private:
    char peek(size_t off = 0) const {
        return pos_ + off < text_.size() ? text_[pos_ + off] : '\0';
    }
    void advance() {
        if (text_[pos_] == '\n') {
            ++line_;
            col_ = 1;
        } else {
            ++col_;
        }
        ++pos_;
    }

    Token make(TokKind kind, size_t start, int sl, int sc) {
        Token t;
        t.kind = kind;
        t.text = text_.substr(start, pos_ - start);
        t.span = {file_, sl, sc, line_, col_ - 1};
        return t;
    }

    Token next() {
        size_t start = pos_;
        int sl = line_, sc = col_;
        char c = text_[pos_];

        if (ident_start(c)) {
            while (pos_ < text_.size() && ident_cont(text_[pos_])) advance();
            Token t = make(TokKind::Ident, start, sl, sc);
            if (t.text == "mod" && (peek() == '*' || peek() == '!')) {
                bool star = peek() == '*';
                advance();
                t = make(star ? TokKind::KwModStar : TokKind::KwModBang, start, sl, sc);
                return t;
            }
            auto it = keywords().find(t.text);
            if (it != keywords().end()) t.kind = it->second;
            return t;
        }
        if (std::isdigit(static_cast<unsigned char>(c))) {
            while (pos_ < text_.size() && std::isdigit(static_cast<unsigned char>(text_[pos_])))
                advance();
            Token t = make(TokKind::IntLit, start, sl, sc);
            t.int_value = std::stoll(t.text);
            return t;
        }
        switch (c) {
        case '(': advance(); return make(TokKind::LParen, start, sl, sc);
        case ')': advance(); return make(TokKind::RParen, start, sl, sc);
        case '{': advance(); return make(TokKind::LBrace, start, sl, sc);
        case '}': advance(); return make(TokKind::RBrace, start, sl, sc);
        case ',': advance(); return make(TokKind::Comma, start, sl, sc);
        case ':': advance(); return make(TokKind::Colon, start, sl, sc);
        case '[': advance(); return make(TokKind::LBracket, start, sl, sc);
        case '.': advance(); return make(TokKind::Period, start, sl, sc);
        case ']':
            advance();
            if (peek() == '*') {
                advance();
                return make(TokKind::HRBracket, start, sl, sc);
            }
            return make(TokKind::RBracket, start, sl, sc);
        case '_': {
            // mixfix operator name: _<symbols>_
            advance();
            while (pos_ < text_.size() && (sym_char(text_[pos_]) || ident_cont(text_[pos_])) &&
                   text_[pos_] != '_')
                advance();
            if (peek() == '_') {
                advance();
                return make(TokKind::OpName, start, sl, sc);
            }
            sink_.error("lexical-error", "stray '_' (mixfix names look like _+_)",
                        {file_, sl, sc, line_, col_});
            return make(TokKind::Sym, start, sl, sc);
        }
        default: break;
        }
        if (c == '*' && peek(1) == '[') {
            advance();
            advance();
            return make(TokKind::HLBracket, start, sl, sc);
        }
        if (c == '-' && peek(1) == '>') {
            advance();
            advance();
            return make(TokKind::Arrow, start, sl, sc);
        }
        if (sym_char(c)) {
            while (pos_ < text_.size() && sym_char(text_[pos_])) {
                // stop a symbol run before '->' so "x ->y" stays sane;
                // not expected in practice, arrows are spaced in decls
                if (text_[pos_] == '-' && peek(1) == '>') break;
                advance();
            }
            return make(TokKind::Sym, start, sl, sc);
        }
        sink_.error("lexical-error",
                    "illegal character '" + std::string(1, c) + "'",
                    {file_, sl, sc, sl, sc});
        advance();
        Token t = make(TokKind::Sym, start, sl, sc);
        t.kind = TokKind::Eof; // dropped by caller
        return t;
    }

    const std::string& text_;
    std::string file_;
    DiagnosticSink& sink_;
    size_t pos_ = 0;
    int line_ = 1, col_ = 1;
};

} // namespace

std::vector<Token> tokenize(const std::string& text, const std::string& file,
                            DiagnosticSink& sink) {
    return Lexer(text, file, sink).run();
}

} // namespace otsc
