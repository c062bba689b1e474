#pragma once

#include <cstdio>
#include <initializer_list>
#include <ostream>
#include <string>
#include <vector>

namespace latticeq::csv {

/// Round-trippable, locale-independent number formatting.
inline std::string number(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

inline std::vector<std::string> split(const std::string& line) {
  std::vector<std::string> out;
  std::string cell;
  for (char c : line) {
    if (c == ',') {
      out.push_back(cell);
      cell.clear();
    } else if (c != '\r') {
      cell += c;
    }
  }
  out.push_back(cell);
  return out;
}

class Writer {
 public:
  Writer(std::ostream& os, std::initializer_list<std::string> header) : os_(os) {
    bool first = true;
    for (const auto& h : header) {
      if (!first) os_ << ',';
      os_ << h;
      first = false;
    }
    os_ << '\n';
  }

  Writer& cell(double v) { return raw(number(v)); }
  Writer& cell(long long v) { return raw(std::to_string(v)); }
  Writer& cell(int v) { return raw(std::to_string(v)); }
  Writer& cell(std::size_t v) { return raw(std::to_string(v)); }
  Writer& cell(const std::string& s) { return raw(s); }
  Writer& cell(const char* s) { return raw(s); }
  void end_row() {
    os_ << '\n';
    first_ = true;
  }

 private:
  Writer& raw(const std::string& s) {
    if (!first_) os_ << ',';
    os_ << s;
    first_ = false;
    return *this;
  }
  std::ostream& os_;
  bool first_ = true;
};

}  // namespace latticeq::csv
