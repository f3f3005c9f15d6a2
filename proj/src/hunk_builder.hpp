#pragma once

#include "prforge/diff.hpp"

#include <cstddef>
#include <string>
#include <vector>

namespace prforge::diff::detail {

// One step of an edit script. Context runs whose text is unknown (lines we
// never observed) are folded into a single op with `known == false`; they
// can never serve as hunk context.
struct EditOp {
    LineTag tag = LineTag::context;
    std::string text;
    std::size_t count = 1;
    bool known = true;
};

std::vector<Hunk> build_hunks(const std::vector<EditOp>& ops, std::size_t context);

// Myers shortest edit script between two line sequences.
std::vector<EditOp> diff_sequences(const std::vector<std::string>& a, const std::vector<std::string>& b);

} // namespace prforge::diff::detail
