#include "asmctl/text_format.hpp"

#include <charconv>
#include <fstream>
#include <sstream>

namespace asmctl {

std::string_view to_string(ToolMode mode) {
  switch (mode) {
    case ToolMode::TorqueLimit:
      return "torque_limit";
    case ToolMode::ActuationCutoff:
      return "actuation_cutoff";
  }
  return "unknown";
}

}  // namespace asmctl

namespace asmctl::text {

namespace {

bool is_space(char c) { return c == ' ' || c == '\t' || c == '\r'; }

std::string_view trim(std::string_view s) {
  while (!s.empty() && is_space(s.front())) s.remove_prefix(1);
  while (!s.empty() && is_space(s.back())) s.remove_suffix(1);
  return s;
}

std::vector<std::string> split_ws(std::string_view s) {
  std::vector<std::string> out;
  std::size_t i = 0;
  while (i < s.size()) {
    while (i < s.size() && is_space(s[i])) ++i;
    std::size_t j = i;
    while (j < s.size() && !is_space(s[j])) ++j;
    if (j > i) out.emplace_back(s.substr(i, j - i));
    i = j;
  }
  return out;
}

}  // namespace

SyntaxError::SyntaxError(int line, const std::string& message)
    : std::runtime_error("line " + std::to_string(line) + ": " + message),
      line_(line) {}

std::vector<Directive> parse_blocks(std::string_view text) {
  std::vector<Directive> out;
  int line_no = 0;
  std::size_t pos = 0;
  while (pos <= text.size()) {
    std::size_t eol = text.find('\n', pos);
    if (eol == std::string_view::npos) eol = text.size();
    std::string_view raw = text.substr(pos, eol - pos);
    pos = eol + 1;
    ++line_no;

    std::string_view body = trim(raw);
    if (body.empty() || body.front() == '#') {
      if (eol == text.size()) break;
      continue;
    }
    const bool indented = is_space(raw.front());
    if (indented) {
      if (out.empty()) {
        throw SyntaxError(line_no, "property outside of any block");
      }
      std::size_t eq = body.find('=');
      if (eq == std::string_view::npos) {
        throw SyntaxError(line_no, "expected 'key = value'");
      }
      std::string_view key = trim(body.substr(0, eq));
      std::string_view value = trim(body.substr(eq + 1));
      if (key.empty() || split_ws(key).size() != 1) {
        throw SyntaxError(line_no, "malformed property key");
      }
      out.back().properties.push_back(
          {std::string(key), std::string(value), line_no});
    } else {
      auto words = split_ws(body);
      Directive d;
      d.keyword = words.front();
      d.args.assign(words.begin() + 1, words.end());
      d.line = line_no;
      out.push_back(std::move(d));
    }
    if (eol == text.size()) break;
  }
  return out;
}

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

double to_double(std::string_view s, int line) {
  s = trim(s);
  double v = 0.0;
  auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (s.empty() || ec != std::errc() || ptr != s.data() + s.size()) {
    throw SyntaxError(line, "not a number: '" + std::string(s) + "'");
  }
  return v;
}

long long to_int(std::string_view s, int line) {
  s = trim(s);
  long long v = 0;
  auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (s.empty() || ec != std::errc() || ptr != s.data() + s.size()) {
    throw SyntaxError(line, "not an integer: '" + std::string(s) + "'");
  }
  return v;
}

bool to_bool(std::string_view s, int line) {
  s = trim(s);
  if (s == "yes" || s == "true" || s == "1") return true;
  if (s == "no" || s == "false" || s == "0") return false;
  throw SyntaxError(line, "not a flag: '" + std::string(s) + "'");
}

Region to_region(std::string_view s, int line) {
  int parts[4];
  std::size_t start = 0;
  for (int i = 0; i < 4; ++i) {
    std::size_t comma = s.find(',', start);
    if ((i < 3) == (comma == std::string_view::npos)) {
      throw SyntaxError(line, "region must be x,y,w,h");
    }
    auto field = s.substr(start, i < 3 ? comma - start : s.npos);
    parts[i] = static_cast<int>(to_int(field, line));
    start = comma + 1;
  }
  return Region{parts[0], parts[1], parts[2], parts[3]};
}

std::string format_double(double v) {
  char buf[64];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, ptr);
}

std::string format_region(const Region& r) {
  return std::to_string(r.x) + "," + std::to_string(r.y) + "," +
         std::to_string(r.w) + "," + std::to_string(r.h);
}

}  // namespace asmctl::text
