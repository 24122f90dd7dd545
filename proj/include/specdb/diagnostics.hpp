#pragma once

#include <cstddef>
#include <memory>
#include <stdexcept>
#include <string>
#include <vector>

namespace specdb {

/// Byte range in a source file. Attached to every AST node.
struct SourceSpan {
    std::string file;
    std::size_t start = 0;
    std::size_t end = 0;
};

struct SourceText {
    std::string name;
    std::string text;

    /// 1-based line and column of a byte offset.
    std::pair<std::size_t, std::size_t> line_col(std::size_t offset) const;
};

struct Diagnostic {
    SourceSpan span;
    std::string message;
};

std::string format_diagnostic(const Diagnostic& d, const SourceText* source);

/// Base for every error that carries source diagnostics.
class SpecError : public std::runtime_error {
public:
    SpecError(std::vector<Diagnostic> diags, std::shared_ptr<const SourceText> source);

    const std::vector<Diagnostic>& diagnostics() const { return diags_; }

private:
    std::vector<Diagnostic> diags_;
    std::shared_ptr<const SourceText> source_;
};

class ParseError : public SpecError {
public:
    using SpecError::SpecError;
};

class TypeError : public SpecError {
public:
    using SpecError::SpecError;
};

}  // namespace specdb
