#include "fioindex/expression.hpp"

#include <cctype>
#include <cmath>
#include <memory>
#include <cstdio>
#include <numbers>

namespace fioindex {

namespace {

struct Node {
  virtual ~Node() = default;
  virtual cplx value(double x, double xi) const = 0;
  virtual Jet jet(double x, double xi, int nx, int nxi) const = 0;
  /// True when the node does not depend on x or xi.
  virtual bool is_constant() const { return false; }
};

using NodePtr = std::shared_ptr<const Node>;

struct Constant : Node {
  cplx c;
  explicit Constant(cplx v) : c(v) {}
  cplx value(double, double) const override { return c; }
  Jet jet(double, double, int nx, int nxi) const override { return Jet::constant(c, nx, nxi); }
  bool is_constant() const override { return true; }
};

struct VarX : Node {
  cplx value(double x, double) const override { return x; }
  Jet jet(double x, double, int nx, int nxi) const override { return Jet::x_variable(x, nx, nxi); }
};

struct VarXi : Node {
  cplx value(double, double xi) const override { return xi; }
  Jet jet(double, double xi, int nx, int nxi) const override { return Jet::xi_variable(xi, nx, nxi); }
};

struct Binary : Node {
  char op;
  NodePtr a, b;
  Binary(char o, NodePtr l, NodePtr r) : op(o), a(std::move(l)), b(std::move(r)) {}
  bool is_constant() const override { return a->is_constant() && b->is_constant(); }

  cplx value(double x, double xi) const override {
    const cplx l = a->value(x, xi), r = b->value(x, xi);
    switch (op) {
      case '+': return l + r;
      case '-': return l - r;
      case '*': return l * r;
      case '/': return l / r;
      default: return integer_power(r) ? ipow(l, static_cast<int>(r.real())) : std::pow(l, r);
    }
  }

  Jet jet(double x, double xi, int nx, int nxi) const override {
    if (op == '^') return power_jet(x, xi, nx, nxi);
    const Jet l = a->jet(x, xi, nx, nxi), r = b->jet(x, xi, nx, nxi);
    switch (op) {
      case '+': return l + r;
      case '-': return l - r;
      case '*': return l * r;
      default: return l / r;
    }
  }

  static bool integer_power(cplx p) {
    return p.imag() == 0 && p.real() == std::floor(p.real()) && std::abs(p.real()) <= 64;
  }

  static cplx ipow(cplx v, int n) {
    if (n < 0) return 1.0 / ipow(v, -n);
    cplx r = 1;
    for (int k = 0; k < n; ++k) r *= v;
    return r;
  }

  Jet power_jet(double x, double xi, int nx, int nxi) const {
    const Jet base = a->jet(x, xi, nx, nxi);
    if (b->is_constant()) {
      const cplx p = b->value(0, 0);
      if (integer_power(p) && p.real() >= 0) {
        Jet r = Jet::constant(1.0, nx, nxi);
        for (int k = 0; k < static_cast<int>(p.real()); ++k) r = r * base;
        return r;
      }
      return apply_unary(base, [p](const Series1& s) { return pow(s, p); });
    }
    const Jet lg = apply_unary(base, [](const Series1& s) { return log(s); });
    return apply_unary(b->jet(x, xi, nx, nxi) * lg, [](const Series1& s) { return exp(s); });
  }
};

struct Negate : Node {
  NodePtr a;
  explicit Negate(NodePtr n) : a(std::move(n)) {}
  bool is_constant() const override { return a->is_constant(); }
  cplx value(double x, double xi) const override { return -a->value(x, xi); }
  Jet jet(double x, double xi, int nx, int nxi) const override { return -a->jet(x, xi, nx, nxi); }
};

enum class Fn { Sin, Cos, Exp, Log, Sqrt, Atan, Abs, Chi };

struct Function : Node {
  Fn fn;
  NodePtr a;
  Function(Fn f, NodePtr n) : fn(f), a(std::move(n)) {}
  bool is_constant() const override { return a->is_constant(); }

  cplx value(double x, double xi) const override {
    const cplx v = a->value(x, xi);
    switch (fn) {
      case Fn::Sin: return std::sin(v);
      case Fn::Cos: return std::cos(v);
      case Fn::Exp: return std::exp(v);
      case Fn::Log: return std::log(v);
      case Fn::Sqrt: return std::sqrt(v);
      case Fn::Atan: return std::atan(v);
      case Fn::Abs: return v.imag() == 0 ? cplx(std::abs(v.real())) : cplx(std::abs(v));
      case Fn::Chi: return cutoff(v.real());
    }
    return 0;
  }

  Jet jet(double x, double xi, int nx, int nxi) const override {
    const Jet u = a->jet(x, xi, nx, nxi);
    switch (fn) {
      case Fn::Sin: return apply_unary(u, [](const Series1& s) { return sin(s); });
      case Fn::Cos: return apply_unary(u, [](const Series1& s) { return cos(s); });
      case Fn::Exp: return apply_unary(u, [](const Series1& s) { return exp(s); });
      case Fn::Log: return apply_unary(u, [](const Series1& s) { return log(s); });
      case Fn::Sqrt: return apply_unary(u, [](const Series1& s) { return pow(s, 0.5); });
      case Fn::Atan: return apply_unary(u, [](const Series1& s) { return atan(s); });
      case Fn::Abs: return apply_unary(u, [](const Series1& s) { return abs(s); });
      case Fn::Chi: return apply_unary(u, [](const Series1& s) { return cutoff(s); });
    }
    return u;
  }
};

class Parser {
 public:
  explicit Parser(const std::string& s) : s_(s) {}

  NodePtr parse() {
    NodePtr n = expr();
    skip();
    if (pos_ != s_.size()) throw ExpressionError("unexpected trailing input '" + s_.substr(pos_, 8) + "'", pos_);
    return n;
  }

 private:
  void skip() {
    while (pos_ < s_.size() && std::isspace(static_cast<unsigned char>(s_[pos_]))) ++pos_;
  }

  bool accept(char c) {
    skip();
    if (pos_ < s_.size() && s_[pos_] == c) {
      ++pos_;
      return true;
    }
    return false;
  }

  NodePtr expr() {
    NodePtr n = term();
    for (;;) {
      if (accept('+')) n = std::make_shared<Binary>('+', n, term());
      else if (accept('-')) n = std::make_shared<Binary>('-', n, term());
      else return n;
    }
  }

  NodePtr term() {
    NodePtr n = unary();
    for (;;) {
      if (accept('*')) n = std::make_shared<Binary>('*', n, unary());
      else if (accept('/')) n = std::make_shared<Binary>('/', n, unary());
      else return n;
    }
  }

  NodePtr unary() {
    if (accept('-')) return std::make_shared<Negate>(unary());
    if (accept('+')) return unary();
    return power();
  }

  NodePtr power() {
    NodePtr n = primary();
    if (accept('^')) return std::make_shared<Binary>('^', n, unary());
    return n;
  }

  NodePtr primary() {
    skip();
    if (pos_ >= s_.size()) throw ExpressionError("unexpected end of expression", pos_);
    const char c = s_[pos_];
    if (c == '(') {
      ++pos_;
      NodePtr n = expr();
      if (!accept(')')) throw ExpressionError("expected ')'", pos_);
      return n;
    }
    if (std::isdigit(static_cast<unsigned char>(c)) || c == '.') return number();
    if (std::isalpha(static_cast<unsigned char>(c))) return identifier();
    throw ExpressionError(std::string("unexpected character '") + c + "'", pos_);
  }

  NodePtr number() {
    const char* begin = s_.c_str() + pos_;
    char* end = nullptr;
    const double v = std::strtod(begin, &end);
    if (end == begin) throw ExpressionError("malformed number", pos_);
    pos_ += static_cast<std::size_t>(end - begin);
    return std::make_shared<Constant>(v);
  }

  NodePtr identifier() {
    const std::size_t start = pos_;
    while (pos_ < s_.size() && (std::isalnum(static_cast<unsigned char>(s_[pos_])) || s_[pos_] == '_')) ++pos_;
    const std::string id = s_.substr(start, pos_ - start);
    if (id == "x") return std::make_shared<VarX>();
    if (id == "xi") return std::make_shared<VarXi>();
    if (id == "pi") return std::make_shared<Constant>(std::numbers::pi);
    if (id == "i") return std::make_shared<Constant>(cplx(0, 1));
    static const std::pair<const char*, Fn> table[] = {
        {"sin", Fn::Sin},   {"cos", Fn::Cos},     {"exp", Fn::Exp}, {"log", Fn::Log}, {"sqrt", Fn::Sqrt},
        {"atan", Fn::Atan}, {"arctan", Fn::Atan}, {"abs", Fn::Abs}, {"chi", Fn::Chi}};
    for (const auto& [name, fn] : table) {
      if (id != name) continue;
      if (!accept('(')) throw ExpressionError("expected '(' after " + id, pos_);
      NodePtr arg = expr();
      if (!accept(')')) throw ExpressionError("expected ')'", pos_);
      return std::make_shared<Function>(fn, arg);
    }
    throw ExpressionError("unknown identifier '" + id + "'", start);
  }

  const std::string& s_;
  std::size_t pos_ = 0;
};

}  // namespace

Symbol parse_symbol(const std::string& text, double order, bool vanishes_near_zero_section) {
  NodePtr root = Parser(text).parse();
  Symbol s([root](double x, double xi) { return root->value(x, xi); }, order,
           [root](double x, double xi, int nx, int nxi) { return root->jet(x, xi, nx, nxi); }, text);
  s.set_vanishes_near_zero_section(vanishes_near_zero_section);
  return s;
}

std::string random_symbol_expression(std::mt19937_64& rng, int bandwidth, int terms) {
  std::uniform_real_distribution<double> u(-1, 1), scale(0.2, 0.5);
  std::uniform_int_distribution<int> mode(0, bandwidth), shape(0, 2), wave(0, 2);
  auto num = [](double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.4f", v);
    return std::string(buf);
  };
  std::string out;
  for (int t = 0; t < terms; ++t) {
    const int p = mode(rng);
    std::string xpart;
    switch (wave(rng)) {
      case 0: xpart = "cos(" + std::to_string(p) + "*x+" + num(3 * u(rng)) + ")"; break;
      case 1: xpart = "sin(" + std::to_string(p) + "*x+" + num(3 * u(rng)) + ")"; break;
      default: xpart = "exp(i*" + std::to_string(p) + "*x)"; break;
    }
    const std::string a = num(scale(rng)), b = num(u(rng));
    std::string xipart;
    switch (shape(rng)) {
      case 0: xipart = "atan(" + a + "*xi+" + b + ")"; break;
      case 1: xipart = "(" + a + "*xi+" + b + ")/sqrt(1+(" + a + "*xi+" + b + ")^2)"; break;
      default: xipart = "1/(1+(" + a + "*xi+" + b + ")^2)"; break;
    }
    if (!out.empty()) out += " + ";
    out += "(" + num(u(rng)) + "+" + num(u(rng)) + "*i)*" + xpart + "*" + xipart;
  }
  return out;
}

}  // namespace fioindex
