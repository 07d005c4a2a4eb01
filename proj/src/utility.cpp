#include "wme/utility.hpp"

#include "wme/error.hpp"
#include "wme/io.hpp"

namespace wme {

UtilityMatrix parse_utility_matrix(std::string_view text) {
  UtilityMatrix u;
  int row = 0;
  std::size_t line_no = 0, pos = 0;
  while (pos < text.size()) {
    auto nl = text.find('\n', pos);
    auto line = io::trim(text.substr(pos, nl == std::string_view::npos ? std::string_view::npos : nl - pos));
    pos = nl == std::string_view::npos ? text.size() : nl + 1;
    ++line_no;
    if (line.empty()) continue;
    if (row == kClassCount) throw ParseError("more than five rows", line_no);
    int col = 0;
    std::size_t i = 0;
    while (i < line.size()) {
      while (i < line.size() && (line[i] == ' ' || line[i] == '\t')) ++i;
      if (i == line.size()) break;
      auto j = i;
      while (j < line.size() && line[j] != ' ' && line[j] != '\t') ++j;
      std::int64_t v = 0;
      if (col == kClassCount || !io::parse_int(line.substr(i, j - i), v))
        throw ParseError("expected five integers", line_no);
      u(row, col++) = static_cast<int>(v);
      i = j;
    }
    if (col != kClassCount) throw ParseError("expected five integers", line_no);
    ++row;
  }
  if (row != kClassCount) throw ParseError("expected five rows", line_no);
  return u;
}

UtilityMatrix load_utility_matrix(const std::filesystem::path& path) {
  try {
    return parse_utility_matrix(io::read_file(path));
  } catch (const ParseError& e) {
    throw ParseError(e.detail(), e.line(), path.string());
  }
}

std::string format_utility_matrix(const UtilityMatrix& u) {
  std::string out;
  for (int i = 0; i < kClassCount; ++i) {
    for (int j = 0; j < kClassCount; ++j) {
      if (j) out += ' ';
      out += std::to_string(u(i, j));
    }
    out += '\n';
  }
  return out;
}

}  // namespace wme
