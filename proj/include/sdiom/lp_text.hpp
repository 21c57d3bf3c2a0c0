#pragma once

// Reader/writer for the LP text interchange format (the CPLEX-style subset:
// Minimize / Subject To / Bounds / Binaries / Generals / End).  The writer
// emits every bound explicitly and shortest-round-trip numerals, so
// write -> read reproduces the model exactly.

#include <cctype>
#include <charconv>
#include <cmath>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include "sdiom/error.hpp"
#include "sdiom/lp.hpp"

namespace sdiom::opt {

inline std::string format_double(double v) {
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[32];
  auto res = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, res.ptr);
}

inline std::string lp_col_name(const LinearProgram& lp, int j) {
  if (!lp.col_names[j].empty()) return lp.col_names[j];
  return "c" + std::to_string(j);
}

inline std::string write_lp_text(const LinearProgram& lp) {
  std::ostringstream out;
  out << "Minimize\n obj:";
  bool first = true;
  for (int j = 0; j < lp.num_cols(); ++j) {
    double c = lp.obj[j];
    if (c == 0.0) continue;
    out << (c < 0 ? " - " : first ? " " : " + ")
        << format_double(std::abs(c)) << ' ' << lp_col_name(lp, j);
    first = false;
  }
  if (first) out << " 0 " << lp_col_name(lp, 0);
  out << "\nSubject To\n";
  for (int r = 0; r < lp.num_rows(); ++r) {
    const auto& row = lp.rows[r];
    out << ' ' << (row.name.empty() ? "r" + std::to_string(r) : row.name)
        << ':';
    if (row.cols.empty()) out << " 0 " << lp_col_name(lp, 0);
    for (std::size_t k = 0; k < row.cols.size(); ++k) {
      double v = row.vals[k];
      out << (v < 0 ? " - " : k == 0 ? " " : " + ")
          << format_double(std::abs(v)) << ' '
          << lp_col_name(lp, row.cols[k]);
    }
    const char* op = row.sense == Sense::le   ? "<="
                     : row.sense == Sense::ge ? ">="
                                              : "=";
    out << ' ' << op << ' ' << format_double(row.rhs) << '\n';
  }
  out << "Bounds\n";
  for (int j = 0; j < lp.num_cols(); ++j) {
    const std::string name = lp_col_name(lp, j);
    if (!std::isfinite(lp.lo[j]) && !std::isfinite(lp.hi[j]))
      out << ' ' << name << " free\n";
    else
      out << ' ' << format_double(lp.lo[j]) << " <= " << name
          << " <= " << format_double(lp.hi[j]) << '\n';
  }
  bool any_int = false;
  for (int j = 0; j < lp.num_cols(); ++j) any_int |= bool(lp.integer[j]);
  if (any_int) {
    out << "Generals\n";
    for (int j = 0; j < lp.num_cols(); ++j)
      if (lp.integer[j]) out << ' ' << lp_col_name(lp, j) << '\n';
  }
  out << "End\n";
  return out.str();
}

namespace detail {

struct LpTok {
  std::vector<std::string> toks;
  std::size_t pos = 0;

  bool done() const { return pos >= toks.size(); }
  const std::string& peek() const {
    static const std::string empty;
    return done() ? empty : toks[pos];
  }
  std::string take() {
    require(!done(), "lp-parse", "unexpected end of file");
    return toks[pos++];
  }
};

inline std::string lower(std::string s) {
  for (auto& ch : s) ch = char(std::tolower(static_cast<unsigned char>(ch)));
  return s;
}

inline bool parse_number(const std::string& s, double& out) {
  std::string t = lower(s);
  if (t == "inf" || t == "+inf" || t == "infinity") {
    out = kInf;
    return true;
  }
  if (t == "-inf" || t == "-infinity") {
    out = -kInf;
    return true;
  }
  const char* b = s.data();
  const char* e = b + s.size();
  auto res = std::from_chars(b, e, out);
  return res.ec == std::errc() && res.ptr == e;
}

inline bool is_section(const std::string& low) {
  return low == "minimize" || low == "min" || low == "maximize" ||
         low == "max" || low == "subject" || low == "st" || low == "s.t." ||
         low == "bounds" || low == "bound" || low == "binaries" ||
         low == "binary" || low == "bin" || low == "generals" ||
         low == "general" || low == "gen" || low == "integers" ||
         low == "integer" || low == "end";
}

}  // namespace detail

// Parses the subset written by write_lp_text plus common variations
// (implicit unit coefficients, sign tokens, one-sided bounds).
inline LinearProgram read_lp_text(const std::string& text) {
  using detail::LpTok;
  LpTok tk;
  {
    std::string cur;
    bool comment = false;
    auto push = [&] {
      if (!cur.empty()) tk.toks.push_back(cur);
      cur.clear();
    };
    for (char ch : text) {
      if (ch == '\\') comment = true;
      if (ch == '\n') comment = false;
      if (comment) continue;
      if (std::isspace(static_cast<unsigned char>(ch))) {
        push();
      } else if (ch == ':' || ch == '+' || ch == '-') {
        if (ch == ':') {
          push();
          tk.toks.push_back(":");
        } else if (!cur.empty() &&
                   (cur.back() == 'e' || cur.back() == 'E') &&
                   (std::isdigit(static_cast<unsigned char>(cur.front())) ||
                    cur.front() == '.')) {
          cur += ch;  // exponent sign inside a numeral, e.g. 1e-05
        } else {
          // stand-alone sign token; the expression parser re-joins it
          push();
          tk.toks.push_back(std::string(1, ch));
        }
      } else if (ch == '<' || ch == '>' || ch == '=') {
        if (!cur.empty() && (cur == "<" || cur == ">")) {
          cur += ch;
          push();
        } else {
          push();
          cur = std::string(1, ch);
          if (ch == '=') push();
        }
      } else {
        cur += ch;
      }
    }
    push();
  }

  LinearProgram lp;
  std::map<std::string, int> by_name;
  auto col_of = [&](const std::string& name) {
    auto it = by_name.find(name);
    if (it != by_name.end()) return it->second;
    int j = lp.add_col(0.0, 0.0, kInf, false, name);  // LP-format defaults
    by_name.emplace(name, j);
    return j;
  };

  enum class Sec { none, objective, rows, bounds, binaries, generals, done };
  Sec sec = Sec::none;
  bool maximize = false;

  // Reads a linear expression (terms until a relational operator or a new
  // section); returns terms and the sense/rhs when present.
  auto parse_terms = [&](std::map<int, double>& terms, Sense& sense,
                         double& rhs, bool expect_relation) {
    double sign = 1.0;
    bool have_coef = false;
    bool sign_seen = false;
    double coef = 1.0;
    while (!tk.done()) {
      std::string t = tk.peek();
      std::string low = detail::lower(t);
      if (detail::is_section(low)) {
        require(!have_coef && !sign_seen, "lp-parse",
                "dangling term before '" + t + "'");
        return false;
      }
      tk.pos++;
      if (t == "+") {
        sign_seen = true;
        continue;
      }
      if (t == "-") {
        sign = -sign;
        sign_seen = true;
        continue;
      }
      if (t == "<=" || t == "<" || t == ">=" || t == ">" || t == "=") {
        require(expect_relation, "lp-parse", "unexpected relation");
        require(!have_coef && !sign_seen, "lp-parse",
                "dangling term before '" + t + "'");
        sense = (t == "<=" || t == "<")   ? Sense::le
                : (t == ">=" || t == ">") ? Sense::ge
                                          : Sense::eq;
        std::string rt = tk.take();
        double mult = 1.0;
        if (rt == "-") {
          mult = -1.0;
          rt = tk.take();
        } else if (rt == "+") {
          rt = tk.take();
        }
        require(detail::parse_number(rt, rhs), "lp-parse",
                "expected numeric right-hand side, got '" + rt + "'");
        rhs *= mult;
        return true;
      }
      double num;
      if (detail::parse_number(t, num)) {
        require(!have_coef, "lp-parse", "two numbers in a row near '" + t + "'");
        coef = num;
        have_coef = true;
        continue;
      }
      // variable
      terms[col_of(t)] += sign * coef;
      sign = 1.0;
      coef = 1.0;
      have_coef = false;
      sign_seen = false;
    }
    require(!have_coef && !sign_seen, "lp-parse",
            "dangling term at end of input");
    return false;
  };

  while (!tk.done()) {
    std::string t = tk.peek();
    std::string low = detail::lower(t);
    if (low == "minimize" || low == "min") {
      maximize = false;
      sec = Sec::objective;
      tk.pos++;
      continue;
    }
    if (low == "maximize" || low == "max") {
      maximize = true;
      sec = Sec::objective;
      tk.pos++;
      continue;
    }
    if (low == "subject" || low == "st" || low == "s.t.") {
      tk.pos++;
      if (detail::lower(tk.peek()) == "to") tk.pos++;
      sec = Sec::rows;
      continue;
    }
    if (low == "bounds" || low == "bound") {
      tk.pos++;
      sec = Sec::bounds;
      continue;
    }
    if (low == "binaries" || low == "binary" || low == "bin") {
      tk.pos++;
      sec = Sec::binaries;
      continue;
    }
    if (low == "generals" || low == "general" || low == "gen" ||
        low == "integers" || low == "integer") {
      tk.pos++;
      sec = Sec::generals;
      continue;
    }
    if (low == "end") {
      tk.pos++;
      sec = Sec::done;
      break;
    }

    switch (sec) {
      case Sec::objective: {
        std::string label;
        if (tk.pos + 1 < tk.toks.size() && tk.toks[tk.pos + 1] == ":") {
          label = tk.take();
          tk.take();  // ':'
        }
        std::map<int, double> terms;
        Sense sense;
        double rhs;
        parse_terms(terms, sense, rhs, /*expect_relation=*/false);
        for (auto [j, v] : terms) lp.obj[j] += maximize ? -v : v;
        break;
      }
      case Sec::rows: {
        std::string label;
        if (tk.pos + 1 < tk.toks.size() && tk.toks[tk.pos + 1] == ":") {
          label = tk.take();
          tk.take();
        }
        std::map<int, double> terms;
        Sense sense = Sense::le;
        double rhs = 0.0;
        require(parse_terms(terms, sense, rhs, true), "lp-parse",
                "constraint without relation near '" + label + "'");
        std::vector<std::pair<int, double>> tv(terms.begin(), terms.end());
        lp.add_row(sense, rhs, tv, label);
        break;
      }
      case Sec::bounds: {
        // Forms: "lo <= name <= hi", "name <= hi", "name >= lo",
        //        "name = v", "name free".
        std::vector<std::string> line;
        double num;
        std::string first = tk.take();
        if (first == "-" || first == "+") {
          std::string next = tk.take();
          first = (first == "-" ? "-" : "") + next;
        }
        if (detail::parse_number(first, num)) {
          std::string op = tk.take();
          require(op == "<=" || op == "<", "lp-parse", "malformed bound");
          std::string name = tk.take();
          int j = col_of(name);
          lp.lo[j] = num;
          if (tk.peek() == "<=" || tk.peek() == "<") {
            tk.pos++;
            std::string hi_tok = tk.take();
            double mult = 1.0;
            if (hi_tok == "-") { mult = -1.0; hi_tok = tk.take(); }
            require(detail::parse_number(hi_tok, num), "lp-parse",
                    "malformed upper bound");
            lp.hi[j] = mult * num;
          }
        } else {
          int j = col_of(first);
          std::string op = detail::lower(tk.peek());
          if (op == "free") {
            tk.pos++;
            lp.lo[j] = -kInf;
            lp.hi[j] = kInf;
          } else if (tk.peek() == "<=" || tk.peek() == "<" ||
                     tk.peek() == ">=" || tk.peek() == ">" ||
                     tk.peek() == "=") {
            std::string rel = tk.take();
            std::string val_tok = tk.take();
            double mult = 1.0;
            if (val_tok == "-") { mult = -1.0; val_tok = tk.take(); }
            else if (val_tok == "+") { val_tok = tk.take(); }
            require(detail::parse_number(val_tok, num), "lp-parse",
                    "malformed bound value");
            num *= mult;
            if (rel == "<=" || rel == "<") lp.hi[j] = num;
            else if (rel == ">=" || rel == ">") lp.lo[j] = num;
            else { lp.lo[j] = num; lp.hi[j] = num; }
          } else {
            fail("lp-parse", "malformed bounds line near '" + first + "'");
          }
        }
        break;
      }
      case Sec::binaries: {
        int j = col_of(tk.take());
        lp.integer[j] = true;
        lp.lo[j] = std::max(lp.lo[j], 0.0);
        lp.hi[j] = std::min(lp.hi[j], 1.0);
        break;
      }
      case Sec::generals: {
        lp.integer[col_of(tk.take())] = true;
        break;
      }
      default:
        fail("lp-parse", "content before a section header: '" + t + "'");
    }
  }
  return lp;
}

}  // namespace sdiom::opt
