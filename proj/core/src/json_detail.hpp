#pragma once

#include "funcdec/decomp.hpp"

#include "json.hpp"

namespace funcdec::detail {

nlohmann::json tree_to_json(const ExprNode& node);
ExprPtr tree_from_json(const nlohmann::json& j);

nlohmann::json fd_to_json(const FunctionalDecomposition& fd);
FunctionalDecomposition fd_from_json(const nlohmann::json& j);

nlohmann::json parse_json(std::string_view text);

} // namespace funcdec::detail
