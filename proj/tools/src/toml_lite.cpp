#include "bhp_cli/toml_lite.hpp"

#include <cctype>
#include <charconv>
#include <cmath>
#include <limits>

#include "bhp/error.hpp"

namespace bhp::cli {

namespace {

using nlohmann::json;

class Parser {
 public:
  explicit Parser(std::string_view text) : s_(text) {}

  json parse() {
    json root = json::object();
    json* table = &root;
    while (true) {
      skip_blank_lines();
      if (eof()) break;
      if (peek() == '[') {
        table = &open_table(root);
      } else {
        const std::string key = parse_key();
        skip_space();
        expect('=');
        skip_space();
        json value = parse_value();
        if (table->contains(key)) fail("duplicate key '" + key + "'");
        (*table)[key] = std::move(value);
      }
      end_of_line();
    }
    return root;
  }

 private:
  std::string_view s_;
  std::size_t pos_ = 0;
  std::size_t line_ = 1;

  bool eof() const { return pos_ >= s_.size(); }
  char peek() const { return eof() ? '\0' : s_[pos_]; }
  char get() {
    const char c = s_[pos_++];
    if (c == '\n') ++line_;
    return c;
  }

  [[noreturn]] void fail(const std::string& what) const {
    throw Error(ErrorKind::configuration, "config line " + std::to_string(line_) + ": " + what);
  }

  void expect(char c) {
    if (peek() != c) fail(std::string("expected '") + c + "'");
    get();
  }

  void skip_space() {
    while (!eof() && (peek() == ' ' || peek() == '\t')) get();
  }

  void skip_comment() {
    if (peek() == '#')
      while (!eof() && peek() != '\n') get();
  }

  void skip_blank_lines() {
    while (!eof()) {
      skip_space();
      skip_comment();
      if (peek() == '\r') get();
      if (peek() == '\n') {
        get();
        continue;
      }
      break;
    }
  }

  // Whitespace, comments and newlines inside arrays.
  void skip_all() {
    while (!eof()) {
      const char c = peek();
      if (c == ' ' || c == '\t' || c == '\r' || c == '\n') get();
      else if (c == '#') skip_comment();
      else break;
    }
  }

  void end_of_line() {
    skip_space();
    skip_comment();
    if (peek() == '\r') get();
    if (!eof() && peek() != '\n') fail("unexpected trailing text");
  }

  json& open_table(json& root) {
    expect('[');
    if (peek() == '[') fail("arrays of tables are not supported");
    json* t = &root;
    while (true) {
      skip_space();
      const std::string part = parse_key();
      if (!t->contains(part)) (*t)[part] = json::object();
      t = &(*t)[part];
      if (!t->is_object()) fail("'" + part + "' is not a table");
      skip_space();
      if (peek() == '.') {
        get();
        continue;
      }
      break;
    }
    expect(']');
    return *t;
  }

  std::string parse_key() {
    if (peek() == '"') return parse_basic_string();
    if (peek() == '\'') return parse_literal_string();
    std::string key;
    while (!eof() && (std::isalnum(static_cast<unsigned char>(peek())) || peek() == '_' || peek() == '-')) key += get();
    if (key.empty()) fail("expected a key");
    return key;
  }

  std::string parse_basic_string() {
    expect('"');
    std::string out;
    while (true) {
      if (eof() || peek() == '\n') fail("unterminated string");
      char c = get();
      if (c == '"') break;
      if (c == '\\') {
        if (eof()) fail("unterminated escape");
        c = get();
        switch (c) {
          case 'n': out += '\n'; break;
          case 't': out += '\t'; break;
          case 'r': out += '\r'; break;
          case '"': out += '"'; break;
          case '\\': out += '\\'; break;
          default: fail(std::string("unsupported escape \\") + c);
        }
      } else {
        out += c;
      }
    }
    return out;
  }

  std::string parse_literal_string() {
    expect('\'');
    std::string out;
    while (true) {
      if (eof() || peek() == '\n') fail("unterminated string");
      const char c = get();
      if (c == '\'') break;
      out += c;
    }
    return out;
  }

  json parse_value() {
    const char c = peek();
    if (c == '"') return parse_basic_string();
    if (c == '\'') return parse_literal_string();
    if (c == '[') return parse_array();
    if (c == '{') return parse_inline_table();
    std::string tok;
    while (!eof()) {
      const char t = peek();
      if (t == ',' || t == ']' || t == '}' || t == ' ' || t == '\t' || t == '\r' || t == '\n' || t == '#') break;
      tok += get();
    }
    if (tok.empty()) fail("expected a value");
    if (tok == "true") return true;
    if (tok == "false") return false;
    return parse_number(tok);
  }

  json parse_number(std::string tok) {
    std::string clean;
    for (char ch : tok)
      if (ch != '_') clean += ch;
    const bool neg = !clean.empty() && clean[0] == '-';
    std::string_view body = clean;
    if (!body.empty() && (body[0] == '+' || body[0] == '-')) body.remove_prefix(1);
    if (body == "inf") return neg ? -std::numeric_limits<double>::infinity() : std::numeric_limits<double>::infinity();
    if (body == "nan") return std::numeric_limits<double>::quiet_NaN();
    const bool is_float = clean.find_first_of(".eE") != std::string::npos;
    if (!is_float) {
      std::int64_t v = 0;
      const char* b = clean.data() + (clean[0] == '+' ? 1 : 0);
      auto [p, ec] = std::from_chars(b, clean.data() + clean.size(), v);
      if (ec != std::errc() || p != clean.data() + clean.size()) fail("bad integer '" + tok + "'");
      return v;
    }
    double v = 0.0;
    const char* b = clean.data() + (clean[0] == '+' ? 1 : 0);
    auto [p, ec] = std::from_chars(b, clean.data() + clean.size(), v);
    if (ec != std::errc() || p != clean.data() + clean.size()) fail("bad number '" + tok + "'");
    return v;
  }

  json parse_array() {
    expect('[');
    json arr = json::array();
    while (true) {
      skip_all();
      if (peek() == ']') {
        get();
        break;
      }
      arr.push_back(parse_value());
      skip_all();
      if (peek() == ',') {
        get();
        continue;
      }
      expect(']');
      break;
    }
    return arr;
  }

  json parse_inline_table() {
    expect('{');
    json t = json::object();
    skip_space();
    if (peek() == '}') {
      get();
      return t;
    }
    while (true) {
      skip_space();
      const std::string key = parse_key();
      skip_space();
      expect('=');
      skip_space();
      if (t.contains(key)) fail("duplicate key '" + key + "'");
      t[key] = parse_value();
      skip_space();
      if (peek() == ',') {
        get();
        continue;
      }
      expect('}');
      break;
    }
    return t;
  }
};

}  // namespace

nlohmann::json parse_toml(std::string_view text) { return Parser(text).parse(); }

}  // namespace bhp::cli
