// SPDX-License-Identifier: Apache-2.0
// Internal deterministic JSON emitter. Reports and manifests are written by
// hand (fixed key order, %.17g reals) so identical inputs yield identical
// bytes; nlohmann is used only for parsing.
#ifndef CALIBATLAS_SRC_JSONOUT_HPP_
#define CALIBATLAS_SRC_JSONOUT_HPP_

#include <cmath>
#include <cstdint>
#include <cstdio>
#include <string>
#include <vector>

namespace calibatlas {

// 17 significant digits: enough to round-trip any double exactly.
inline std::string format_real(double v) {
  if (!std::isfinite(v)) return "null";
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

inline std::string json_escape(const std::string& s) {
  std::string out;
  out.reserve(s.size() + 2);
  for (char c : s) {
    switch (c) {
      case '"': out += "\\\""; break;
      case '\\': out += "\\\\"; break;
      case '\n': out += "\\n"; break;
      case '\r': out += "\\r"; break;
      case '\t': out += "\\t"; break;
      default:
        if (static_cast<unsigned char>(c) < 0x20) {
          char buf[8];
          std::snprintf(buf, sizeof(buf), "\\u%04x", c);
          out += buf;
        } else {
          out += c;
        }
    }
  }
  return out;
}

// Streaming writer with two-space indentation. Keys are emitted in call
// order, so the caller controls byte-level layout completely.
class JsonWriter {
 public:
  std::string take() { return std::move(out_); }

  void begin_object() {
    prefix();
    out_ += "{";
    open (true);
  }
  void end_object() { close('}'); }
  void begin_array() {
    prefix();
    out_ += "[";
    open(false);
  }
  void end_array() { close(']'); }

  void key(const std::string& k) {
    prefix();
    out_ += "\"" + json_escape(k) + "\": ";
    pending_key_ = true;
  }

  void value(const std::string& s) { scalar("\"" + json_escape(s) + "\""); }
  void value(const char* s) { value(std::string(s)); }
  void value(double d) { scalar(format_real(d)); }
  void value(bool b) { scalar(b ? "true" : "false"); }
  void value(std::uint64_t n) { scalar(std::to_string(n)); }
  void value(int n) { scalar(std::to_string(n)); }

 private:
  struct Frame {
    bool object = false;
    bool first = true;
  };

  void prefix() {
    if (pending_key_) {
      pending_key_ = false;
      return;
    }
    if (stack_.empty()) return;
    Frame& f = stack_.back();
    if (!f.first) out_ += ",";
    f.first = false;
    out_ += "\n" + std::string(2 * stack_.size(), ' ');
  }

  void open(bool object) { stack_.push_back(Frame{object, true}); }

  void close(char c) {
    bool empty = stack_.back().first;
    stack_.pop_back();
    if (!empty) out_ += "\n" + std::string(2 * stack_.size(), ' ');
    out_ += c;
    if (stack_.empty()) out_ += "\n";
  }

  void scalar(const std::string& rendered) {
    prefix();
    out_ += rendered;
  }

  std::string out_;
  std::vector<Frame> stack_;
  bool pending_key_ = false;
};

}  // namespace calibatlas

#endif  // CALIBATLAS_SRC_JSONOUT_HPP_
