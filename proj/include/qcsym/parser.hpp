#pragma once

// Recursive-descent parser for the expression DSL.
//
//   expr   := ['+'|'-'] term (('+'|'-') term)*
//   term   := unary (('*'|'/') unary)*
//   unary  := '-' unary | factor
//   factor := base ('^' ['-'] integer | '^' '(' ['-'] integer ')')?
//   base   := number | ident | ident '(' args ')' | '(' expr ')'
//   ident  := name ('_' suffix)?
//
// The suffix spells a derivative multi-index in dependency letters
// (T_yz, K_uu) for declared functions, or a jet variable for u (u_yz).
// `exp` and `log` are built in. Any other bare name is a variable.

#include <cctype>
#include <map>
#include <memory>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "expr.hpp"

namespace qcsym {

class ParseError : public std::runtime_error {
 public:
  ParseError(const std::string& msg, std::size_t offset)
      : std::runtime_error(msg + " at byte " + std::to_string(offset)), offset_(offset) {}
  std::size_t offset() const { return offset_; }

 private:
  std::size_t offset_;
};

/// Canonical jet variable name: u followed by y's then z's.
inline std::string jet_name(int ny, int nz) {
  if (ny == 0 && nz == 0) return "u";
  return "u_" + std::string(static_cast<std::size_t>(ny), 'y') +
         std::string(static_cast<std::size_t>(nz), 'z');
}

/// Counts (ny, nz) if `name` is u or a jet variable u_<y..z..>, in any letter order.
inline std::optional<std::pair<int, int>> jet_orders(std::string_view name) {
  if (name == "u") return std::pair{0, 0};
  if (name.size() < 3 || name.substr(0, 2) != "u_") return std::nullopt;
  int ny = 0, nz = 0;
  for (char c : name.substr(2)) {
    if (c == 'y') {
      ++ny;
    } else if (c == 'z') {
      ++nz;
    } else {
      return std::nullopt;
    }
  }
  return std::pair{ny, nz};
}

/// Function declarations visible to the parser.
class Context {
 public:
  void declare(const FunctionSymbol& sym) {
    if (sym.name == "exp" || sym.name == "log" || sym.name == "u")
      throw std::invalid_argument("cannot redeclare reserved name " + sym.name);
    for (const auto& d : sym.deps) {
      if (d.size() != 1 || !std::isalpha(static_cast<unsigned char>(d[0])))
        throw std::invalid_argument("dependency names must be single letters: " + d);
    }
    functions_[sym.name] = std::make_shared<const FunctionSymbol>(sym);
  }

  /// Parses "declare K(y,z,u)" / "K(y,z,u)" (one declaration).
  void declare(std::string_view text);

  std::shared_ptr<const FunctionSymbol> find(const std::string& name) const {
    auto it = functions_.find(name);
    return it == functions_.end() ? nullptr : it->second;
  }

  /// K, L, f over (y,z,u); T, s, d over (y,z); phi over (w).
  static Context standard() {
    Context c;
    c.declare({"K", {"y", "z", "u"}});
    c.declare({"L", {"y", "z", "u"}});
    c.declare({"f", {"y", "z", "u"}});
    c.declare({"T", {"y", "z"}});
    c.declare({"s", {"y", "z"}});
    c.declare({"d", {"y", "z"}});
    c.declare({"phi", {"w"}});
    return c;
  }

  const std::map<std::string, std::shared_ptr<const FunctionSymbol>>& functions() const {
    return functions_;
  }

 private:
  std::map<std::string, std::shared_ptr<const FunctionSymbol>> functions_;
};

namespace detail {

class Parser {
 public:
  Parser(std::string_view text, const Context& ctx) : src_(text), ctx_(ctx) {}

  Expr parse_all() {
    Expr e = parse_expr();
    skip_ws();
    if (pos_ != src_.size()) fail("unexpected '" + std::string(1, src_[pos_]) + "'");
    return e;
  }

  // Used by declaration parsing.
  std::string parse_name() {
    skip_ws();
    std::string out;
    while (pos_ < src_.size()) {
      const unsigned char c = static_cast<unsigned char>(src_[pos_]);
      if (std::isalnum(c)) {
        out += static_cast<char>(c);
        ++pos_;
      } else if (c == 0xCF && pos_ + 1 < src_.size() &&
                 static_cast<unsigned char>(src_[pos_ + 1]) == 0x89) {
        out += 'w';  // UTF-8 omega
        pos_ += 2;
      } else {
        break;
      }
    }
    return out;
  }

  bool accept(char c) {
    skip_ws();
    if (pos_ < src_.size() && src_[pos_] == c) {
      ++pos_;
      return true;
    }
    return false;
  }

  void expect(char c) {
    if (!accept(c)) fail(std::string("expected '") + c + "'");
  }

  bool at_end() {
    skip_ws();
    return pos_ == src_.size();
  }

  [[noreturn]] void fail(const std::string& msg) const { throw ParseError(msg, pos_); }

 private:
  void skip_ws() {
    while (pos_ < src_.size() && std::isspace(static_cast<unsigned char>(src_[pos_]))) ++pos_;
  }

  Expr parse_expr() {
    std::vector<Expr> terms;
    bool neg = false;
    if (accept('-')) {
      neg = true;
    } else {
      accept('+');
    }
    Expr t = parse_term();
    terms.push_back(neg ? -t : t);
    while (true) {
      if (accept('+')) {
        terms.push_back(parse_term());
      } else if (accept('-')) {
        terms.push_back(-parse_term());
      } else {
        break;
      }
    }
    return sum(std::move(terms));
  }

  Expr parse_term() {
    std::vector<Expr> fs{parse_unary()};
    while (true) {
      if (accept('*')) {
        fs.push_back(parse_unary());
      } else if (accept('/')) {
        const std::size_t at = pos_;
        Expr d = parse_unary();
        if (is_zero_node(d)) throw ParseError("division by zero", at);
        fs.push_back(power(d, -1));
      } else {
        break;
      }
    }
    return product(std::move(fs));
  }

  Expr parse_unary() {
    if (accept('-')) return -parse_unary();
    return parse_factor();
  }

  Expr parse_factor() {
    Expr b = parse_base();
    if (accept('^')) {
      const bool paren = accept('(');
      bool neg = accept('-');
      if (!neg) accept('+');
      skip_ws();
      const std::size_t at = pos_;
      std::string digits;
      while (pos_ < src_.size() && std::isdigit(static_cast<unsigned char>(src_[pos_])))
        digits += src_[pos_++];
      if (digits.empty()) fail("expected integer exponent");
      if (paren) expect(')');
      if (digits.size() > 6) throw ParseError("exponent too large", at);
      int k = std::stoi(digits);
      if (neg) k = -k;
      if (k < 0 && is_zero_node(b)) throw ParseError("division by zero", at);
      b = power(b, k);
    }
    return b;
  }

  Expr parse_number() {
    std::string intpart, frac, expo;
    while (pos_ < src_.size() && std::isdigit(static_cast<unsigned char>(src_[pos_])))
      intpart += src_[pos_++];
    if (pos_ < src_.size() && src_[pos_] == '.') {
      ++pos_;
      while (pos_ < src_.size() && std::isdigit(static_cast<unsigned char>(src_[pos_])))
        frac += src_[pos_++];
    }
    if (intpart.empty() && frac.empty()) fail("malformed number");
    if (pos_ < src_.size() && (src_[pos_] == 'e' || src_[pos_] == 'E')) {
      std::size_t save = pos_++;
      if (pos_ < src_.size() && (src_[pos_] == '-' || src_[pos_] == '+')) expo += src_[pos_++];
      std::string ed;
      while (pos_ < src_.size() && std::isdigit(static_cast<unsigned char>(src_[pos_])))
        ed += src_[pos_++];
      if (ed.empty()) {
        pos_ = save;
        expo.clear();
      } else {
        expo += ed;
      }
    }
    Integer num(intpart.empty() ? std::string("0") : intpart);
    Integer den(1);
    for (char c : frac) {
      num = num * 10 + (c - '0');
      den *= 10;
    }
    Rational r(num, den);
    if (!expo.empty()) {
      const int k = std::stoi(expo);
      if (k > 400 || k < -400) fail("exponent out of range");
      r *= rational_pow(Rational(10), k);
    }
    return number(r);
  }

  std::vector<Expr> parse_args() {
    std::vector<Expr> args;
    if (accept(')')) return args;
    do {
      args.push_back(parse_expr());
    } while (accept(','));
    expect(')');
    return args;
  }

  Expr parse_base() {
    skip_ws();
    if (pos_ >= src_.size()) fail("unexpected end of input");
    const char c = src_[pos_];
    if (c == '(') {
      ++pos_;
      Expr e = parse_expr();
      expect(')');
      return e;
    }
    if (std::isdigit(static_cast<unsigned char>(c)) || c == '.') return parse_number();
    const std::size_t start = pos_;
    std::string name = parse_name();
    if (name.empty()) fail("unexpected '" + std::string(1, c) + "'");
    if (std::isdigit(static_cast<unsigned char>(name[0]))) throw ParseError("bad identifier", start);
    std::string suffix;
    if (pos_ < src_.size() && src_[pos_] == '_') {
      ++pos_;
      while (pos_ < src_.size() && std::isalpha(static_cast<unsigned char>(src_[pos_])))
        suffix += src_[pos_++];
      if (suffix.empty()) fail("empty derivative suffix");
    }

    if (name == "exp" || name == "log") {
      if (!suffix.empty()) throw ParseError("derivative suffix on built-in " + name, start);
      expect('(');
      auto args = parse_args();
      if (args.size() != 1) throw ParseError(name + " takes one argument", start);
      return name == "exp" ? qcsym::exp(args[0]) : qcsym::log(args[0]);
    }

    if (auto sym = ctx_.find(name)) {
      std::vector<int> index(sym->deps.size(), 0);
      for (char l : suffix) {
        bool found = false;
        for (std::size_t i = 0; i < sym->deps.size(); ++i) {
          if (sym->deps[i][0] == l) {
            ++index[i];
            found = true;
          }
        }
        if (!found)
          throw ParseError("'" + std::string(1, l) + "' is not a dependency of " + name, start);
      }
      std::vector<Expr> args;
      skip_ws();
      if (pos_ < src_.size() && src_[pos_] == '(') {
        ++pos_;
        const std::size_t at = pos_;
        args = parse_args();
        if (args.size() != sym->deps.size())
          throw ParseError("arity mismatch: " + name + " declared with " +
                               std::to_string(sym->deps.size()) + " arguments, called with " +
                               std::to_string(args.size()),
                           at);
      }
      return apply(sym, std::move(index), std::move(args));
    }

    if (!suffix.empty()) {
      if (name == "u") {
        auto ord = jet_orders("u_" + suffix);
        if (!ord) throw ParseError("jet suffix must use y and z only", start);
        return variable(jet_name(ord->first, ord->second));
      }
      throw ParseError("unknown function '" + name + "'", start);
    }
    skip_ws();
    if (pos_ < src_.size() && src_[pos_] == '(')
      throw ParseError("unknown function '" + name + "' (declare it first)", start);
    return variable(name);
  }

  std::string_view src_;
  const Context& ctx_;
  std::size_t pos_ = 0;
};

}  // namespace detail

inline Expr parse(std::string_view text, const Context& ctx = Context::standard()) {
  return detail::Parser(text, ctx).parse_all();
}

inline void Context::declare(std::string_view text) {
  detail::Parser p(text, *this);
  std::string name = p.parse_name();
  if (name == "declare") name = p.parse_name();
  if (name.empty()) p.fail("expected function name");
  p.expect('(');
  std::vector<std::string> deps;
  if (!p.accept(')')) {
    do {
      deps.push_back(p.parse_name());
      if (deps.back().empty()) p.fail("expected dependency name");
    } while (p.accept(','));
    p.expect(')');
  }
  p.accept(';');
  if (!p.at_end()) p.fail("trailing input in declaration");
  declare(FunctionSymbol{name, deps});
}

}  // namespace qcsym
