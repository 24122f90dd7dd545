#include "specdb/parser.hpp"

#include <algorithm>
#include <cctype>
#include <set>
#include <unordered_set>

namespace specdb {

namespace {

enum class Tok { Ident, String, Sym, End };

struct Token {
    Tok kind = Tok::End;
    std::string text;
    std::size_t start = 0;
    std::size_t end = 0;
};

const std::unordered_set<std::string> kReserved = {"sig", "pred", "fact", "all", "some", "in",
                                                   "not", "and", "or",  "implies", "none", "set",
                                                   "lone"};

bool ident_start(char c) { return std::isalpha(static_cast<unsigned char>(c)) || c == '_'; }
bool ident_char(char c) { return std::isalnum(static_cast<unsigned char>(c)) || c == '_' || c == '$'; }

class Lexer {
public:
    Lexer(std::string_view text, std::string file) : text_(text), file_(std::move(file)) {}

    std::vector<Token> run() {
        std::vector<Token> out;
        std::size_t i = 0;
        const std::size_t n = text_.size();
        while (true) {
            while (i < n) {
                char c = text_[i];
                if (std::isspace(static_cast<unsigned char>(c))) {
                    ++i;
                } else if (c == '/' && i + 1 < n && text_[i + 1] == '/') {
                    while (i < n && text_[i] != '\n') ++i;
                } else if (c == '/' && i + 1 < n && text_[i + 1] == '*') {
                    std::size_t close = text_.find("*/", i + 2);
                    if (close == std::string_view::npos) fail(i, "unterminated block comment");
                    i = close + 2;
                } else {
                    break;
                }
            }
            if (i >= n) {
                out.push_back({Tok::End, "", n, n});
                return out;
            }
            const std::size_t start = i;
            char c = text_[i];
            if (ident_start(c)) {
                while (i < n && ident_char(text_[i])) ++i;
                while (i < n && text_[i] == '\'') ++i;
                out.push_back({Tok::Ident, std::string(text_.substr(start, i - start)), start, i});
            } else if (c == '"') {
                ++i;
                std::string value;
                while (i < n && text_[i] != '"') {
                    if (text_[i] == '\\' && i + 1 < n) ++i;
                    value += text_[i++];
                }
                if (i >= n) fail(start, "unterminated string literal");
                ++i;
                out.push_back({Tok::String, value, start, i});
            } else {
                static const char* const two[] = {"->", "!="};
                bool matched = false;
                for (const char* sym : two) {
                    if (text_.substr(i, 2) == sym) {
                        out.push_back({Tok::Sym, sym, start, i + 2});
                        i += 2;
                        matched = true;
                        break;
                    }
                }
                if (matched) continue;
                if (std::string_view("{}()[],:|.+&-~^=;*!").find(c) == std::string_view::npos)
                    fail(i, std::string("unexpected character '") + c + "'");
                out.push_back({Tok::Sym, std::string(1, c), start, i + 1});
                ++i;
            }
        }
    }

    [[noreturn]] void fail(std::size_t at, const std::string& msg) {
        auto src = std::make_shared<SourceText>(SourceText{file_, std::string(text_)});
        throw ParseError({Diagnostic{SourceSpan{file_, at, at}, msg}}, src);
    }

private:
    std::string_view text_;
    std::string file_;
};

class Parser {
public:
    Parser(std::string_view text, std::string file)
        : source_(std::make_shared<SourceText>(SourceText{file, std::string(text)})),
          file_(std::move(file)) {
        tokens_ = Lexer(text, file_).run();
    }

    Spec spec() {
        Spec s;
        s.source = source_;
        while (!at_end()) {
            bool state_marked = false;
            if (peek_ident("state") && peek_ident("sig", 1)) {
                advance();
                state_marked = true;
            }
            if (peek_ident("sig")) {
                for (auto& sig : sig_decl()) {
                    sig.state_marked = state_marked;
                    s.signatures.push_back(std::move(sig));
                }
            } else if (peek_ident("pred")) {
                s.predicates.push_back(pred_decl());
            } else if (peek_ident("fact")) {
                s.facts.push_back(fact_decl());
            } else {
                fail("expected `sig`, `pred` or `fact`");
            }
        }
        for (const auto& sig : s.signatures)
            if (sig.state_marked) {
                if (!s.state_sig.empty()) fail_at(sig.span, "more than one `state sig`");
                s.state_sig = sig.name;
            }
        return s;
    }

    FormulaPtr standalone_formula(const std::vector<std::string>& vars) {
        for (const auto& v : vars) bind_param(v);
        FormulaPtr f = formula();
        if (!at_end()) fail("unexpected trailing input");
        return f;
    }

    ExprPtr standalone_expr(const std::vector<std::string>& vars) {
        for (const auto& v : vars) bind_param(v);
        ExprPtr e = expr();
        if (!at_end()) fail("unexpected trailing input");
        return e;
    }

private:
    // -- token helpers ------------------------------------------------------

    const Token& peek(std::size_t ahead = 0) const {
        std::size_t i = std::min(pos_ + ahead, tokens_.size() - 1);
        return tokens_[i];
    }
    bool at_end() const { return peek().kind == Tok::End; }
    const Token& advance() {
        const Token& t = tokens_[pos_];
        if (pos_ + 1 < tokens_.size()) ++pos_;
        return t;
    }
    bool peek_sym(std::string_view s, std::size_t ahead = 0) const {
        return peek(ahead).kind == Tok::Sym && peek(ahead).text == s;
    }
    bool peek_ident(std::string_view s, std::size_t ahead = 0) const {
        return peek(ahead).kind == Tok::Ident && peek(ahead).text == s;
    }
    bool accept_sym(std::string_view s) {
        if (!peek_sym(s)) return false;
        advance();
        return true;
    }
    bool accept_ident(std::string_view s) {
        if (!peek_ident(s)) return false;
        advance();
        return true;
    }
    void expect_sym(std::string_view s) {
        if (!accept_sym(s)) fail("expected `" + std::string(s) + "`");
    }
    void expect_ident(std::string_view s) {
        if (!accept_ident(s)) fail("expected `" + std::string(s) + "`");
    }
    std::string name() {
        if (peek().kind != Tok::Ident) fail("expected a name");
        if (kReserved.count(peek().text) != 0) fail("`" + peek().text + "` is a reserved word");
        return advance().text;
    }
    SourceSpan span_from(std::size_t start) const {
        std::size_t end = pos_ > 0 ? tokens_[pos_ - 1].end : start;
        return SourceSpan{file_, start, std::max(start, end)};
    }

    [[noreturn]] void fail(const std::string& msg) {
        const Token& t = peek();
        std::string found = t.kind == Tok::End ? "end of input" : "`" + t.text + "`";
        throw ParseError({Diagnostic{SourceSpan{file_, t.start, t.end}, msg + ", found " + found}},
                         source_);
    }
    [[noreturn]] void fail_at(const SourceSpan& span, const std::string& msg) {
        throw ParseError({Diagnostic{span, msg}}, source_);
    }

    // -- scopes -------------------------------------------------------------

    // Binder names are made unique within one declaration. A binder that
    // reuses an earlier name is renamed to `name$k`.
    std::string bind(const std::string& original) {
        std::string fresh = original;
        for (int k = 1; used_.count(fresh) != 0; ++k) fresh = original + "$" + std::to_string(k);
        used_.insert(fresh);
        scope_.emplace_back(original, fresh);
        return fresh;
    }
    void bind_param(const std::string& n) {
        used_.insert(n);
        scope_.emplace_back(n, n);
    }
    std::optional<std::string> lookup(const std::string& n) const {
        for (auto it = scope_.rbegin(); it != scope_.rend(); ++it)
            if (it->first == n) return it->second;
        return std::nullopt;
    }
    void reset_scope() {
        scope_.clear();
        used_.clear();
    }

    // -- declarations -------------------------------------------------------

    std::vector<Signature> sig_decl() {
        std::size_t start = peek().start;
        expect_ident("sig");
        std::vector<std::string> names{name()};
        while (accept_sym(",")) names.push_back(name());
        expect_sym("{");
        std::vector<FieldDecl> fields;
        while (!peek_sym("}")) {
            FieldDecl f;
            std::size_t fstart = peek().start;
            f.name = name();
            expect_sym(":");
            f.items.push_back(field_item());
            while (accept_sym("->")) f.items.push_back(field_item());
            f.span = span_from(fstart);
            fields.push_back(std::move(f));
            if (!accept_sym(",")) break;
        }
        expect_sym("}");
        std::vector<Signature> out;
        for (auto& n : names) {
            Signature s;
            s.name = n;
            s.fields = fields;
            s.span = span_from(start);
            out.push_back(std::move(s));
        }
        return out;
    }

    FieldItem field_item() {
        FieldItem item;
        if (accept_ident("set")) {
            item.mult = Multiplicity::Set;
            item.explicit_mult = true;
        } else if (accept_ident("lone")) {
            item.mult = Multiplicity::Lone;
            item.explicit_mult = true;
        } else if (peek_ident("one") || peek_ident("some")) {
            fail("only `set` and `lone` multiplicities are supported");
        }
        item.name = name();
        return item;
    }

    Predicate pred_decl() {
        std::size_t start = peek().start;
        expect_ident("pred");
        Predicate p;
        p.name = name();
        reset_scope();
        expect_sym("(");
        if (!peek_sym(")")) {
            do {
                std::vector<std::string> group{name()};
                while (accept_sym(",")) group.push_back(name());
                expect_sym(":");
                std::string type = name();
                for (auto& n : group) {
                    bind_param(n);
                    p.params.push_back(Param{n, type});
                }
            } while (accept_sym(","));
        }
        expect_sym(")");
        p.body = block();
        p.span = span_from(start);
        reset_scope();
        return p;
    }

    Fact fact_decl() {
        std::size_t start = peek().start;
        expect_ident("fact");
        Fact f;
        if (peek().kind == Tok::Ident) f.name = name();
        reset_scope();
        f.body = block();
        f.span = span_from(start);
        reset_scope();
        return f;
    }

    FormulaPtr block() {
        std::size_t start = peek().start;
        expect_sym("{");
        std::vector<FormulaPtr> parts;
        while (!peek_sym("}")) {
            if (at_end()) fail("expected `}`");
            parts.push_back(formula());
        }
        expect_sym("}");
        if (parts.empty()) fail_at(span_from(start), "empty formula block");
        return fx::conjunction(parts);
    }

    // -- formulas -----------------------------------------------------------

    FormulaPtr formula() {
        std::size_t start = peek().start;
        FormulaPtr lhs = implication();
        while (accept_ident("or")) lhs = fx::or_(lhs, implication(), span_from(start));
        return lhs;
    }

    FormulaPtr implication() {
        std::size_t start = peek().start;
        FormulaPtr lhs = conjunction();
        if (accept_ident("implies")) return fx::implies(lhs, implication(), span_from(start));
        return lhs;
    }

    FormulaPtr conjunction() {
        std::size_t start = peek().start;
        FormulaPtr lhs = negation();
        while (accept_ident("and")) lhs = fx::and_(lhs, negation(), span_from(start));
        return lhs;
    }

    FormulaPtr negation() {
        std::size_t start = peek().start;
        if (accept_ident("not")) return fx::not_(negation(), span_from(start));
        return comparison();
    }

    bool continues_expression() const {
        if (peek().kind == Tok::Sym) {
            static const std::set<std::string> ops = {".", "[", "->", "&", "+", "-", "=", "!="};
            return ops.count(peek().text) != 0;
        }
        return peek_ident("in") || (peek_ident("not") && peek_ident("in", 1));
    }

    FormulaPtr comparison() {
        std::size_t start = peek().start;
        if (peek_ident("all") || peek_ident("some")) return quantified();
        if (peek_sym("(")) {
            std::size_t saved_pos = pos_;
            auto saved_scope = scope_;
            auto saved_used = used_;
            try {
                advance();
                FormulaPtr f = formula();
                expect_sym(")");
                if (!continues_expression()) return f;
            } catch (const ParseError&) {
            }
            pos_ = saved_pos;
            scope_ = std::move(saved_scope);
            used_ = std::move(saved_used);
        }
        ExprPtr lhs = expr();
        if (accept_ident("in")) return fx::in(lhs, expr(), span_from(start));
        if (accept_sym("=")) return fx::eq(lhs, expr(), span_from(start));
        if (peek_ident("not") && peek_ident("in", 1)) {
            advance();
            advance();
            return fx::not_(fx::in(lhs, expr(), span_from(start)), span_from(start));
        }
        if (accept_sym("!=")) return fx::not_(fx::eq(lhs, expr(), span_from(start)), span_from(start));
        fail("expected `in`, `=`, `not in` or `!=`");
    }

    FormulaPtr quantified() {
        std::size_t start = peek().start;
        bool universal = peek_ident("all");
        advance();
        std::vector<std::pair<std::string, ExprPtr>> decls;
        std::size_t scope_mark = scope_.size();
        do {
            std::vector<std::string> names{name()};
            while (accept_sym(",")) names.push_back(name());
            expect_sym(":");
            ExprPtr bound = expr();
            for (auto& n : names) decls.emplace_back(bind(n), bound);
        } while (accept_sym(","));
        FormulaPtr body;
        if (accept_sym("|")) {
            body = formula();
        } else if (peek_sym("{")) {
            body = block();
        } else {
            fail("expected `|` or `{`");
        }
        scope_.resize(scope_mark);
        SourceSpan span = span_from(start);
        for (auto it = decls.rbegin(); it != decls.rend(); ++it) {
            body = universal ? fx::forall(it->first, it->second, body, span)
                             : fx::exists(it->first, it->second, body, span);
        }
        return body;
    }

    // -- expressions --------------------------------------------------------

    ExprPtr expr() { return union_expr(); }

    ExprPtr union_expr() {
        std::size_t start = peek().start;
        ExprPtr lhs = diff_expr();
        while (accept_sym("+")) lhs = ex::plus(lhs, diff_expr(), span_from(start));
        return lhs;
    }

    ExprPtr diff_expr() {
        std::size_t start = peek().start;
        ExprPtr lhs = inter_expr();
        while (accept_sym("-")) lhs = ex::minus(lhs, inter_expr(), span_from(start));
        return lhs;
    }

    ExprPtr inter_expr() {
        std::size_t start = peek().start;
        ExprPtr lhs = product_expr();
        while (accept_sym("&")) lhs = ex::inter(lhs, product_expr(), span_from(start));
        return lhs;
    }

    ExprPtr product_expr() {
        std::size_t start = peek().start;
        ExprPtr lhs = join_expr();
        while (accept_sym("->")) lhs = ex::product(lhs, join_expr(), span_from(start));
        return lhs;
    }

    ExprPtr join_expr() {
        std::size_t start = peek().start;
        ExprPtr lhs = unary_expr();
        while (true) {
            if (accept_sym(".")) {
                lhs = ex::join(lhs, unary_expr(), span_from(start));
            } else if (accept_sym("[")) {
                ExprPtr arg = expr();
                expect_sym("]");
                lhs = ex::join(arg, lhs, span_from(start));
            } else {
                return lhs;
            }
        }
    }

    ExprPtr unary_expr() {
        std::size_t start = peek().start;
        if (accept_sym("~")) return ex::converse(unary_expr(), span_from(start));
        if (accept_sym("^")) return ex::closure(unary_expr(), span_from(start));
        if (peek_sym("*")) fail("reflexive closure `*` is not supported; use `^`");
        return primary_expr();
    }

    ExprPtr primary_expr() {
        std::size_t start = peek().start;
        if (accept_ident("none")) return ex::none({}, span_from(start));
        if (accept_sym("(")) {
            ExprPtr e = expr();
            expect_sym(")");
            return e;
        }
        std::string n = name();
        if (auto bound = lookup(n)) return ex::var(*bound, {}, span_from(start));
        return ex::rel(n, {}, RelTag::Plain, span_from(start));
    }

    std::shared_ptr<const SourceText> source_;
    std::string file_;
    std::vector<Token> tokens_;
    std::size_t pos_ = 0;
    std::vector<std::pair<std::string, std::string>> scope_;
    std::set<std::string> used_;
};

}  // namespace

Spec parse_spec(std::string_view text, std::string file_name) {
    return Parser(text, std::move(file_name)).spec();
}

FormulaPtr parse_formula(std::string_view text, const std::vector<std::string>& vars) {
    return Parser(text, "<formula>").standalone_formula(vars);
}

ExprPtr parse_expr(std::string_view text, const std::vector<std::string>& vars) {
    return Parser(text, "<expr>").standalone_expr(vars);
}

// ---------------------------------------------------------------------------
// Commands

namespace {

std::string trim(std::string_view s) {
    std::size_t b = 0;
    std::size_t e = s.size();
    while (b < e && std::isspace(static_cast<unsigned char>(s[b]))) ++b;
    while (e > b && std::isspace(static_cast<unsigned char>(s[e - 1]))) --e;
    return std::string(s.substr(b, e - b));
}

[[noreturn]] void command_error(std::string_view line, const std::string& msg) {
    auto src = std::make_shared<SourceText>(SourceText{"<command>", std::string(line)});
    throw ParseError({Diagnostic{SourceSpan{"<command>", 0, line.size()}, msg}}, src);
}

}  // namespace

std::optional<Command> parse_command(std::string_view raw) {
    std::string line = trim(raw);
    if (line.empty() || line[0] == '#' || line.rfind("//", 0) == 0) return std::nullopt;
    while (!line.empty() && line.back() == ';') line = trim(line.substr(0, line.size() - 1));
    if (line.empty()) return std::nullopt;

    std::vector<Token> toks;
    try {
        toks = Lexer(line, "<command>").run();
    } catch (const ParseError&) {
        toks.clear();
    }
    auto is_word = [&](std::size_t i, std::string_view w) {
        return i < toks.size() && toks[i].kind == Tok::Ident && toks[i].text == w;
    };

    if (line == "quit" || line == "exit") return Quit{};
    if (line.rfind("snapshot", 0) == 0 && (line.size() == 8 || std::isspace(static_cast<unsigned char>(line[8])))) {
        std::string path = trim(std::string_view(line).substr(8));
        if (path.empty()) command_error(line, "`snapshot` needs a path");
        return SnapshotCommand{path};
    }
    if (toks.empty()) command_error(line, "malformed command");
    if (is_word(0, "show")) {
        if (toks.size() != 3 || toks[1].kind != Tok::Ident) command_error(line, "usage: show <relation>");
        return ShowRelation{toks[1].text};
    }

    std::size_t i = 0;
    std::string binding;
    if (toks.size() > 2 && toks[0].kind == Tok::Ident && toks[1].kind == Tok::Sym && toks[1].text == "=") {
        binding = toks[0].text;
        i = 2;
    }
    if (i >= toks.size() || toks[i].kind != Tok::Ident) command_error(line, "expected a call");
    std::string callee = toks[i++].text;
    if (i >= toks.size() || toks[i].kind != Tok::Sym || toks[i].text != "(")
        command_error(line, "expected `(` after `" + callee + "`");
    ++i;
    std::vector<Token> args;
    if (!(toks[i].kind == Tok::Sym && toks[i].text == ")")) {
        while (true) {
            if (toks[i].kind != Tok::Ident && toks[i].kind != Tok::String)
                command_error(line, "expected an argument");
            args.push_back(toks[i++]);
            if (toks[i].kind == Tok::Sym && toks[i].text == ",") {
                ++i;
                continue;
            }
            break;
        }
    }
    if (!(toks[i].kind == Tok::Sym && toks[i].text == ")")) command_error(line, "expected `)`");
    ++i;
    if (toks[i].kind != Tok::End) command_error(line, "unexpected input after `)`");

    if (callee.size() > 6 && callee.rfind("Create", 0) == 0 && args.size() == 1 &&
        args[0].kind == Tok::String) {
        return CreateAtom{binding, callee.substr(6), args[0].text};
    }
    if (!binding.empty()) command_error(line, "only Create<Sig>(\"label\") calls can be bound to a name");
    InvokePredicate call{callee, {}};
    for (const auto& a : args) call.args.push_back(a.text);
    return call;
}

}  // namespace specdb
