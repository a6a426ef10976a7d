#pragma once

#include <functional>
#include <string>

namespace oswitch {

/// Parses an arithmetic expression in the variables t and x. Supports + - * / ^,
/// parentheses, pi, and sin cos tan exp log sqrt abs tanh min max.
/// Throws ConfigError with the offending position on malformed input.
std::function<double(double, double)> compile_expression(const std::string& text);

}  // namespace oswitch
