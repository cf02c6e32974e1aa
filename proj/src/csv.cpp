#include "narrative/csv.hpp"

#include "narrative/error.hpp"

namespace narrative::csv {

std::optional<Row> Reader::next() {
  if (in_.peek() == std::char_traits<char>::eof()) return std::nullopt;
  Row row;
  row.line = line_;
  std::string field;
  bool quoted = false;
  bool field_started_quoted = false;
  char c;
  while (in_.get(c)) {
    if (quoted) {
      if (c == '"') {
        if (in_.peek() == '"') {
          in_.get(c);
          field.push_back('"');
        } else {
          quoted = false;
        }
      } else {
        if (c == '\n') ++line_;
        field.push_back(c);
      }
      continue;
    }
    if (c == '"' && field.empty() && !field_started_quoted) {
      quoted = true;
      field_started_quoted = true;
    } else if (c == ',') {
      row.fields.push_back(std::move(field));
      field.clear();
      field_started_quoted = false;
    } else if (c == '\r') {
      // swallowed; CRLF handled by the following '\n'
    } else if (c == '\n') {
      ++line_;
      row.fields.push_back(std::move(field));
      return row;
    } else {
      field.push_back(c);
    }
  }
  if (quoted) {
    throw Error("unterminated quoted field starting on line " +
                std::to_string(row.line));
  }
  row.fields.push_back(std::move(field));
  return row;
}

std::string escape(const std::string& field) {
  if (field.find_first_of(",\"\n\r") == std::string::npos) return field;
  std::string out = "\"";
  for (char c : field) {
    if (c == '"') out.push_back('"');
    out.push_back(c);
  }
  out.push_back('"');
  return out;
}

void write_row(std::ostream& out, const std::vector<std::string>& fields) {
  for (std::size_t i = 0; i < fields.size(); ++i) {
    if (i) out << ',';
    out << escape(fields[i]);
  }
  out << '\n';
}

}  // namespace narrative::csv
