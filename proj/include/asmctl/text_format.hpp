#pragma once

#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "asmctl/common.hpp"

// Line-oriented block format shared by procedure, workcell config and
// template manifest files:
//
//   # comment
//   keyword arg arg...
//     key = value
//
// Unindented lines open a directive; indented `key = value` lines attach to
// the most recent directive.
namespace asmctl::text {

// Malformed document. `line` is 1-based.
class SyntaxError : public std::runtime_error {
 public:
  SyntaxError(int line, const std::string& message);
  int line() const { return line_; }

 private:
  int line_;
};

struct Property {
  std::string key;
  std::string value;
  int line = 0;
};

struct Directive {
  std::string keyword;
  std::vector<std::string> args;
  std::vector<Property> properties;
  int line = 0;
};

std::vector<Directive> parse_blocks(std::string_view text);

std::string read_file(const std::string& path);

// Strict conversions; all throw SyntaxError(line, ...) on bad input.
double to_double(std::string_view s, int line);
long long to_int(std::string_view s, int line);
bool to_bool(std::string_view s, int line);
Region to_region(std::string_view s, int line);

// Shortest representation that parses back to the same double.
std::string format_double(double v);
std::string format_region(const Region& r);

}  // namespace asmctl::text

namespace asmctl {
using text::SyntaxError;
}
