#pragma once

#include <string>

#include "pdemand/abs.hpp"
#include "pdemand/stack.hpp"

namespace pdemand {

/// Indented tree, one atom per line.
std::string render_tree(const AbsRes& r);

/// JSON rendering; schema in docs/result-schema.md.
std::string render_json(const AbsRes& r, int indent = -1);

/// Parses render_json output back, interning stacks in `pool`.
AbsRes parse_result_json(const std::string& text, StackPool& pool);

/// DOT digraph: one node per distinct atom, solid edges to children,
/// a dashed edge from each stub to its parent.
std::string render_dot(const AbsRes& r);

}  // namespace pdemand
