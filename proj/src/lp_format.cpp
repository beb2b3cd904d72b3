#include "skygrid/lp_format.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cmath>
#include <fstream>
#include <optional>
#include <sstream>
#include <unordered_map>

namespace skygrid {

namespace {

bool is_name_char(char c, int bracket_depth) {
  if (std::isalnum(static_cast<unsigned char>(c)) || c == '_' || c == '(' || c == ')' || c == '[' ||
      c == ']' || c == '.') {
    return true;
  }
  return bracket_depth > 0 && (c == ',' || c == '=');
}

constexpr int kTermsPerLine = 8;

std::string lower(std::string_view s) {
  std::string out(s);
  std::transform(out.begin(), out.end(), out.begin(),
                 [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  return out;
}

void write_expr(std::ostream& out, const MilpInstance& inst, const std::vector<Term>& terms) {
  for (std::size_t i = 0; i < terms.size(); ++i) {
    const Term& t = terms[i];
    if (i > 0 && i % kTermsPerLine == 0) out << "\n  ";
    const bool neg = std::signbit(t.coef);
    if (i == 0) {
      out << (neg ? "- " : "");
    } else {
      out << (neg ? " - " : " + ");
    }
    out << format_number(std::abs(t.coef)) << ' ' << inst.var(t.var).name;
  }
}

const char* sense_str(Sense s) {
  switch (s) {
    case Sense::le: return "<=";
    case Sense::ge: return ">=";
    case Sense::eq: return "=";
  }
  return "?";
}

std::string bound_str(double v) {
  if (v == kInf) return "+inf";
  if (v == -kInf) return "-inf";
  return format_number(v);
}

// ---------------------------------------------------------------------------
// Reader

enum class TokKind { name, number, op, colon, sign };

struct Token {
  TokKind kind;
  std::string text;
  double value = 0.0;
  int line = 0;
};

std::vector<Token> tokenize(std::string_view s, int line) {
  std::vector<Token> toks;
  std::size_t i = 0;
  while (i < s.size()) {
    const char c = s[i];
    if (std::isspace(static_cast<unsigned char>(c))) {
      ++i;
      continue;
    }
    if (c == ':') {
      toks.push_back({TokKind::colon, ":", 0.0, line});
      ++i;
    } else if (c == '+' || c == '-') {
      toks.push_back({TokKind::sign, std::string(1, c), 0.0, line});
      ++i;
    } else if (c == '<' || c == '>' || c == '=') {
      std::string op(1, c);
      ++i;
      if (i < s.size() && (s[i] == '=' || s[i] == '<' || s[i] == '>')) op += s[i++];
      if (op == "<" || op == "=<" || op == "<=") op = "<=";
      else if (op == ">" || op == "=>" || op == ">=") op = ">=";
      else if (op == "=" || op == "==") op = "=";
      else throw FormatError("bad operator '" + op + "'", line);
      toks.push_back({TokKind::op, op, 0.0, line});
    } else if (std::isdigit(static_cast<unsigned char>(c)) || c == '.') {
      std::string buf(s.substr(i));
      char* end = nullptr;
      const double v = std::strtod(buf.c_str(), &end);
      const std::size_t len = static_cast<std::size_t>(end - buf.c_str());
      if (len == 0) throw FormatError("malformed number", line);
      toks.push_back({TokKind::number, buf.substr(0, len), v, line});
      i += len;
    } else if (is_name_char(c, 0)) {
      int depth = 0;
      std::size_t j = i;
      while (j < s.size() && is_name_char(s[j], depth)) {
        if (s[j] == '[') ++depth;
        if (s[j] == ']') --depth;
        ++j;
      }
      std::string name(s.substr(i, j - i));
      const std::string lname = lower(name);
      if (lname == "inf" || lname == "infinity") {
        toks.push_back({TokKind::number, name, kInf, line});
      } else {
        toks.push_back({TokKind::name, name, 0.0, line});
      }
      i = j;
    } else {
      throw FormatError(std::string("unexpected character '") + c + "'", line);
    }
  }
  return toks;
}

enum class Section { none, objective, constraints, bounds, binaries, generals, end };

std::optional<Section> section_keyword(std::string_view line) {
  std::string l = lower(line);
  l.erase(0, l.find_first_not_of(" \t\r"));
  l.erase(l.find_last_not_of(" \t\r") + 1);
  if (l == "minimize" || l == "minimum" || l == "min") return Section::objective;
  if (l == "maximize" || l == "maximum" || l == "max") return Section::none;  // rejected below
  if (l == "subject to" || l == "such that" || l == "st" || l == "s.t.") return Section::constraints;
  if (l == "bounds" || l == "bound") return Section::bounds;
  if (l == "binaries" || l == "binary" || l == "bin") return Section::binaries;
  if (l == "generals" || l == "general" || l == "gen") return Section::generals;
  if (l == "end") return Section::end;
  return std::nullopt;
}

struct RawExpr {
  std::vector<std::pair<std::string, double>> terms;
};

struct RawRow {
  std::string name;
  RawExpr expr;
  Sense sense = Sense::le;
  double rhs = 0.0;
  int line = 0;
};

class Parser {
 public:
  explicit Parser(std::vector<Token> toks) : toks_(std::move(toks)) {}

  bool done() const { return pos_ >= toks_.size(); }
  const Token& peek(std::size_t k = 0) const { return toks_[pos_ + k]; }
  bool has(std::size_t k) const { return pos_ + k < toks_.size(); }
  Token next() { return toks_[pos_++]; }
  int line() const { return done() ? (toks_.empty() ? 0 : toks_.back().line) : peek().line; }

  std::optional<std::string> label() {
    if (has(1) && peek().kind == TokKind::name && peek(1).kind == TokKind::colon) {
      std::string n = next().text;
      next();
      return n;
    }
    return std::nullopt;
  }

  // Reads terms until an operator or end of tokens.
  RawExpr expr() {
    RawExpr e;
    while (!done() && peek().kind != TokKind::op) {
      double sign = 1.0;
      while (!done() && peek().kind == TokKind::sign) {
        if (next().text == "-") sign = -sign;
      }
      if (done()) throw FormatError("dangling sign", line());
      double coef = 1.0;
      if (peek().kind == TokKind::number) coef = next().value;
      if (done() || peek().kind != TokKind::name) {
        // A bare constant 0 is tolerated (empty objective written as "obj: 0").
        if (coef == 0.0 && (done() || peek().kind == TokKind::op)) continue;
        throw FormatError("expected variable name", line());
      }
      e.terms.emplace_back(next().text, sign * coef);
    }
    return e;
  }

  double signed_number() {
    double sign = 1.0;
    while (!done() && peek().kind == TokKind::sign) {
      if (next().text == "-") sign = -sign;
    }
    if (done() || peek().kind != TokKind::number) throw FormatError("expected number", line());
    return sign * next().value;
  }

 private:
  std::vector<Token> toks_;
  std::size_t pos_ = 0;
};

Sense parse_sense(const std::string& op) {
  if (op == "<=") return Sense::le;
  if (op == ">=") return Sense::ge;
  return Sense::eq;
}

}  // namespace

std::string sanitize_name(std::string_view name) {
  std::string out;
  out.reserve(name.size() + 1);
  for (char c : name) {
    const bool ok = std::isalnum(static_cast<unsigned char>(c)) || c == '_' || c == '(' || c == ')' ||
                    c == '[' || c == ']' || c == ',' || c == '=';
    out.push_back(ok ? c : '_');
  }
  if (out.empty() || std::isdigit(static_cast<unsigned char>(out.front()))) out.insert(out.begin(), '_');
  return out;
}

std::string format_number(double v) {
  if (v == 0.0) return "0";
  char buf[64];
  auto res = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, res.ptr);
}

void write_lp(const MilpInstance& inst, std::ostream& out) {
  out << "\\ skygrid MILP: " << inst.num_variables() << " variables, " << inst.num_constraints()
      << " constraints\n";
  out << "Minimize\n obj: ";
  if (inst.objective().empty()) {
    out << "0";
  } else {
    write_expr(out, inst, inst.objective());
  }
  out << "\nSubject To\n";
  for (const LinConstraint& c : inst.constraints()) {
    out << ' ' << c.name << ": ";
    if (c.terms.empty()) {
      out << "0";
    } else {
      write_expr(out, inst, c.terms);
    }
    out << ' ' << sense_str(c.sense) << ' ' << format_number(c.rhs) << '\n';
  }
  out << "Bounds\n";
  std::vector<std::string> binaries;
  std::vector<std::string> generals;
  for (const VarDef& v : inst.variables()) {
    if (v.lo == -kInf && v.hi == kInf) {
      out << ' ' << v.name << " free\n";
    } else if (v.hi == kInf) {
      out << ' ' << v.name << " >= " << bound_str(v.lo) << '\n';
    } else {
      out << ' ' << bound_str(v.lo) << " <= " << v.name << " <= " << bound_str(v.hi) << '\n';
    }
    if (v.kind == VarKind::binary) {
      (v.lo == 0.0 && v.hi == 1.0 ? binaries : generals).push_back(v.name);
    }
  }
  out << "Binaries\n";
  for (const auto& b : binaries) out << ' ' << b << '\n';
  if (!generals.empty()) {
    // Binaries with tightened bounds; a Binaries entry would reset them to [0,1].
    out << "Generals\n";
    for (const auto& g : generals) out << ' ' << g << '\n';
  }
  out << "End\n";
}

void write_lp_file(const MilpInstance& inst, const std::filesystem::path& path) {
  std::ofstream f(path);
  if (!f) throw IoError("cannot open '" + path.string() + "' for writing");
  write_lp(inst, f);
  if (!f) throw IoError("write to '" + path.string() + "' failed");
}

MilpInstance read_lp(std::istream& in) {
  std::vector<Token> obj_toks;
  std::vector<Token> row_toks;
  std::vector<std::vector<Token>> bound_lines;
  std::vector<Token> int_toks[2];  // binaries, generals

  Section sec = Section::none;
  bool seen_objective = false;
  std::string raw;
  int lineno = 0;
  while (std::getline(in, raw)) {
    ++lineno;
    if (auto p = raw.find('\\'); p != std::string::npos) raw.erase(p);
    if (auto kw = section_keyword(raw)) {
      if (*kw == Section::none) throw FormatError("only Minimize problems are supported", lineno);
      sec = *kw;
      if (sec == Section::objective) seen_objective = true;
      if (sec == Section::end) break;
      continue;
    }
    auto toks = tokenize(raw, lineno);
    if (toks.empty()) continue;
    switch (sec) {
      case Section::none: throw FormatError("content before Minimize section", lineno);
      case Section::objective: obj_toks.insert(obj_toks.end(), toks.begin(), toks.end()); break;
      case Section::constraints: row_toks.insert(row_toks.end(), toks.begin(), toks.end()); break;
      case Section::bounds: bound_lines.push_back(std::move(toks)); break;
      case Section::binaries: int_toks[0].insert(int_toks[0].end(), toks.begin(), toks.end()); break;
      case Section::generals: int_toks[1].insert(int_toks[1].end(), toks.begin(), toks.end()); break;
      case Section::end: break;
    }
  }
  if (!seen_objective) throw FormatError("missing Minimize section", lineno);

  // Variable order: Bounds order first, then order of first appearance.
  std::vector<std::string> order;
  std::unordered_map<std::string, int> index;
  auto touch = [&](const std::string& n) {
    if (index.emplace(n, static_cast<int>(order.size())).second) order.push_back(n);
  };
  struct Bnd {
    std::optional<double> lo, hi;
  };
  std::unordered_map<std::string, Bnd> bounds;
  for (const auto& line : bound_lines) {
    // Merge signs into numbers.
    std::vector<Token> t;
    for (std::size_t i = 0; i < line.size(); ++i) {
      if (line[i].kind == TokKind::sign && i + 1 < line.size() && line[i + 1].kind == TokKind::number) {
        Token n = line[i + 1];
        if (line[i].text == "-") n.value = -n.value;
        t.push_back(n);
        ++i;
      } else {
        t.push_back(line[i]);
      }
    }
    const int ln = line.front().line;
    auto need = [&](bool ok) {
      if (!ok) throw FormatError("malformed bound", ln);
    };
    if (t.size() == 2 && t[0].kind == TokKind::name && t[1].kind == TokKind::name &&
        lower(t[1].text) == "free") {
      touch(t[0].text);
      bounds[t[0].text] = {-kInf, kInf};
    } else if (t.size() == 5) {
      need(t[0].kind == TokKind::number && t[1].kind == TokKind::op && t[2].kind == TokKind::name &&
           t[3].kind == TokKind::op && t[4].kind == TokKind::number && t[1].text == "<=" &&
           t[3].text == "<=");
      touch(t[2].text);
      bounds[t[2].text] = {t[0].value, t[4].value};
    } else if (t.size() == 3) {
      need(t[1].kind == TokKind::op);
      const bool name_first = t[0].kind == TokKind::name;
      const Token& nm = name_first ? t[0] : t[2];
      const Token& num = name_first ? t[2] : t[0];
      need(nm.kind == TokKind::name && num.kind == TokKind::number);
      touch(nm.text);
      Bnd& b = bounds[nm.text];
      std::string op = t[1].text;
      if (!name_first && op != "=") op = (op == "<=") ? ">=" : "<=";
      if (op == "<=") b.hi = num.value;
      else if (op == ">=") b.lo = num.value;
      else b.lo = b.hi = num.value;
    } else {
      need(false);
    }
  }

  // Objective.
  Parser po(std::move(obj_toks));
  po.label();
  RawExpr obj = po.expr();
  if (!po.done()) throw FormatError("unexpected token in objective", po.line());
  for (auto& [n, c] : obj.terms) touch(n);

  std::vector<RawRow> rows;
  Parser pr(std::move(row_toks));
  while (!pr.done()) {
    RawRow r;
    r.line = pr.line();
    if (auto l = pr.label()) r.name = *l;
    r.expr = pr.expr();
    if (pr.done() || pr.peek().kind != TokKind::op) throw FormatError("constraint without sense", r.line);
    r.sense = parse_sense(pr.next().text);
    r.rhs = pr.signed_number();
    for (auto& [n, c] : r.expr.terms) touch(n);
    rows.push_back(std::move(r));
  }

  std::unordered_map<std::string, int> kinds;  // 1 = binary section, 2 = generals
  for (int s = 0; s < 2; ++s) {
    for (const Token& t : int_toks[s]) {
      if (t.kind != TokKind::name) throw FormatError("expected variable name", t.line);
      touch(t.text);
      kinds[t.text] = s + 1;
    }
  }

  MilpInstance inst;
  for (const std::string& n : order) {
    VarDef d;
    d.name = n;
    auto b = bounds.find(n);
    const int kind = kinds.contains(n) ? kinds[n] : 0;
    if (kind == 1) {
      d.kind = VarKind::binary;
      d.lo = 0.0;
      d.hi = 1.0;
    } else {
      if (b != bounds.end()) {
        d.lo = b->second.lo.value_or(0.0);
        d.hi = b->second.hi.value_or(kInf);
      }
      if (kind == 2) {
        if (d.lo < 0.0 || d.hi > 1.0) {
          throw FormatError("general integer '" + n + "' outside [0,1] is not supported", 0);
        }
        d.kind = VarKind::binary;
      }
    }
    inst.add_variable(std::move(d));
  }
  auto lookup = [&](const std::string& n) { return VarId{index.at(n)}; };

  auto to_terms = [&](const RawExpr& e, int line) {
    std::vector<Term> terms;
    std::unordered_map<int, std::size_t> pos;
    for (const auto& [n, c] : e.terms) {
      VarId v = lookup(n);
      auto [it, fresh] = pos.emplace(v.index, terms.size());
      if (fresh) {
        terms.push_back({v, c});
      } else {
        (void)line;
        terms[it->second].coef += c;
      }
    }
    return terms;
  };
  inst.set_objective(to_terms(obj, 0));
  for (RawRow& r : rows) {
    inst.add_constraint({r.name, to_terms(r.expr, r.line), r.sense, r.rhs});
  }
  return inst;
}

MilpInstance read_lp_file(const std::filesystem::path& path) {
  std::ifstream f(path);
  if (!f) throw IoError("cannot open '" + path.string() + "'");
  return read_lp(f);
}

void write_solution_file(const MilpInstance& inst, const std::vector<double>& values,
                         const std::filesystem::path& path) {
  std::ofstream f(path);
  if (!f) throw IoError("cannot open '" + path.string() + "' for writing");
  for (std::size_t j = 0; j < inst.num_variables(); ++j) {
    f << inst.variables()[j].name << ' ' << format_number(values.at(j)) << '\n';
  }
  if (!f) throw IoError("write to '" + path.string() + "' failed");
}

MilpSolution read_solution(std::istream& in, const MilpInstance& inst) {
  MilpSolution sol;
  sol.status = SolveStatus::optimal;
  sol.values.assign(inst.num_variables(), 0.0);
  std::string raw;
  int lineno = 0;
  while (std::getline(in, raw)) {
    ++lineno;
    if (auto p = raw.find('#'); p != std::string::npos) raw.erase(p);
    std::istringstream ls(raw);
    std::string name;
    if (!(ls >> name)) continue;
    std::string val;
    if (!(ls >> val)) throw FormatError("missing value for '" + name + "'", lineno);
    std::string extra;
    if (ls >> extra) throw FormatError("trailing text after value", lineno);
    char* end = nullptr;
    const double v = std::strtod(val.c_str(), &end);
    if (end == val.c_str() || *end != '\0') throw FormatError("malformed value '" + val + "'", lineno);
    const VarId id = inst.find(name);
    if (id.index < 0) throw FormatError("unknown variable '" + name + "'", lineno);
    sol.values[id.index] = v;
  }
  sol.objective = evaluate(inst, sol.values).objective;
  return sol;
}

MilpSolution read_solution_file(const std::filesystem::path& path, const MilpInstance& inst) {
  std::ifstream f(path);
  if (!f) throw IoError("cannot open '" + path.string() + "'");
  return read_solution(f, inst);
}

}  // namespace skygrid
