#pragma once

#include <string>
#include <string_view>
#include <vector>

#include "emod/ast.hpp"

namespace emod {

/// Parses MiniJ source into a fully name-resolved, type-annotated Program.
/// Throws SyntaxError, ResolveError or TypeError carrying line and column.
Program parse(std::string_view source);

/// Reads and parses a `.mj` file. Throws Error if the file cannot be read.
Program parse_file(const std::string& path);

/// Distinct extern functions called anywhere in the program ("Class.name"), sorted.
std::vector<std::string> list_library_functions(const Program& program);

/// Canonical MiniJ source for the program. Re-parsing it yields a structurally equal AST.
std::string pretty_print(const Program& program);

/// Tree-structured JSON dump of the AST. Spans are omitted when `with_spans` is false,
/// which makes the dump a structural fingerprint.
std::string dump_ast_json(const Program& program, bool with_spans = true, int indent = 2);

bool structurally_equal(const Program& a, const Program& b);

}  // namespace emod
