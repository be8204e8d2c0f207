#pragma once

// CSV (RFC 4180), JSON-lines traces and small file helpers.

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <optional>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "json.hpp"
#include "qbl/engine.hpp"
#include "qbl/equilibrium.hpp"

namespace qbl {

class io_error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Shortest text that reads back to the same double (17 significant digits).
inline std::string format_full(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

inline std::string format_fixed(double v, int decimals) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.*f", decimals, v);
  return buf;
}

inline std::string csv_escape(const std::string& s) {
  if (s.find_first_of(",\"\r\n") == std::string::npos) return s;
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += '"';
    out += c;
  }
  return out + '"';
}

// Row-by-row CSV builder; cells are rendered on insertion.
class CsvTable {
 public:
  explicit CsvTable(std::vector<std::string> header) : width_(header.size()) { rows_.push_back(std::move(header)); }

  class Row {
   public:
    explicit Row(CsvTable& t) : t_(t) {}
    Row& operator<<(const std::string& s) {
      cells_.push_back(s);
      return *this;
    }
    Row& operator<<(const char* s) { return *this << std::string(s); }
    Row& operator<<(double v) { return *this << format_full(v); }
    Row& operator<<(int v) { return *this << std::to_string(v); }
    Row& operator<<(std::size_t v) { return *this << std::to_string(v); }
    Row& operator<<(const std::optional<std::size_t>& v) { return *this << (v ? std::to_string(*v) : std::string()); }
    ~Row() noexcept(false) {
      if (cells_.size() != t_.width_) throw std::logic_error("csv row width mismatch");
      t_.rows_.push_back(std::move(cells_));
    }

   private:
    CsvTable& t_;
    std::vector<std::string> cells_;
  };

  Row row() { return Row(*this); }
  std::size_t rows() const { return rows_.size() - 1; }

  std::string str() const {
    std::string out;
    for (const auto& r : rows_) {
      for (std::size_t i = 0; i < r.size(); ++i) {
        if (i) out += ',';
        out += csv_escape(r[i]);
      }
      out += "\r\n";
    }
    return out;
  }

 private:
  std::size_t width_;
  std::vector<std::vector<std::string>> rows_;
};

// Minimal RFC 4180 reader, used by tests and tools.
inline std::vector<std::vector<std::string>> parse_csv(const std::string& text) {
  std::vector<std::vector<std::string>> rows;
  std::vector<std::string> row;
  std::string cell;
  bool quoted = false, any = false;
  for (std::size_t i = 0; i < text.size(); ++i) {
    const char c = text[i];
    if (quoted) {
      if (c == '"') {
        if (i + 1 < text.size() && text[i + 1] == '"') cell += '"', ++i;
        else quoted = false;
      } else {
        cell += c;
      }
      continue;
    }
    if (c == '"') quoted = true, any = true;
    else if (c == ',') row.push_back(std::move(cell)), cell.clear(), any = true;
    else if (c == '\r') continue;
    else if (c == '\n') {
      row.push_back(std::move(cell));
      cell.clear();
      rows.push_back(std::move(row));
      row.clear();
      any = false;
    } else {
      cell += c;
      any = true;
    }
  }
  if (any || !cell.empty()) {
    row.push_back(std::move(cell));
    rows.push_back(std::move(row));
  }
  return rows;
}

inline void write_text(const std::filesystem::path& path, const std::string& text) {
  std::error_code ec;
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path(), ec);
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw io_error("cannot open " + path.string() + " for writing");
  out << text;
  out.close();
  if (!out) throw io_error("write failed: " + path.string());
}

inline std::string read_text(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw io_error("cannot read " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

// Square matrix with kappa headers: the corner cell names the axes.
inline CsvTable gain_matrix_csv(const GainMatrix& m, const std::string& corner, bool errors = false) {
  std::vector<std::string> header{corner};
  for (int k : m.kappas()) header.push_back(std::to_string(k));
  CsvTable t(std::move(header));
  for (std::size_t i = 0; i < m.size(); ++i) {
    auto r = t.row();
    r << m.kappas()[i];
    for (std::size_t j = 0; j < m.size(); ++j) r << (errors ? m.std_error(i, j) : m(i, j));
  }
  return t;
}

// One JSON object per period; rows t = 0, stride, 2*stride, ...
inline std::string trace_jsonl(const Trace& tr, std::size_t stride = 1) {
  if (stride < 1) throw usage_error("stride must be at least 1");
  std::string out;
  const std::size_t n = tr.num_agents();
  for (std::size_t t = 0; t < tr.size(); t += stride) {
    auto acts = nlohmann::ordered_json::array(), rew = nlohmann::ordered_json::array();
    auto q = nlohmann::ordered_json::array(), d = nlohmann::ordered_json::array();
    for (std::size_t i = 0; i < n; ++i) {
      acts.push_back(tr.action(t, i));
      rew.push_back(tr.reward(t, i));
      auto s = tr.q(t, i);
      q.push_back(std::vector<double>(s.begin(), s.end()));
      d.push_back(tr.delta(t, i));
    }
    nlohmann::ordered_json rec;
    rec["t"] = t;
    rec["actions"] = std::move(acts);
    rec["rewards"] = std::move(rew);
    rec["q"] = std::move(q);
    rec["delta"] = std::move(d);
    out += rec.dump();
    out += '\n';
  }
  return out;
}

}  // namespace qbl
