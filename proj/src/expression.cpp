#include "oswitch/expression.hpp"

#include <cctype>
#include <cmath>
#include <memory>
#include <numbers>
#include <vector>

#include "oswitch/errors.hpp"

namespace oswitch {

namespace {

struct Node {
  virtual ~Node() = default;
  virtual double eval(double t, double x) const = 0;
};
using NodePtr = std::shared_ptr<const Node>;

struct Constant : Node {
  double v;
  explicit Constant(double v) : v(v) {}
  double eval(double, double) const override { return v; }
};

struct Variable : Node {
  bool isTime;
  explicit Variable(bool isTime) : isTime(isTime) {}
  double eval(double t, double x) const override { return isTime ? t : x; }
};

struct Binary : Node {
  char op;
  NodePtr a, b;
  Binary(char op, NodePtr a, NodePtr b) : op(op), a(std::move(a)), b(std::move(b)) {}
  double eval(double t, double x) const override {
    const double l = a->eval(t, x), r = b->eval(t, x);
    switch (op) {
      case '+': return l + r;
      case '-': return l - r;
      case '*': return l * r;
      case '/': return l / r;
      default: return std::pow(l, r);
    }
  }
};

struct Negate : Node {
  NodePtr a;
  explicit Negate(NodePtr a) : a(std::move(a)) {}
  double eval(double t, double x) const override { return -a->eval(t, x); }
};

struct Call : Node {
  std::string name;
  std::vector<NodePtr> args;
  Call(std::string n, std::vector<NodePtr> a) : name(std::move(n)), args(std::move(a)) {}
  double eval(double t, double x) const override {
    const double u = args[0]->eval(t, x);
    if (name == "sin") return std::sin(u);
    if (name == "cos") return std::cos(u);
    if (name == "tan") return std::tan(u);
    if (name == "exp") return std::exp(u);
    if (name == "log") return std::log(u);
    if (name == "sqrt") return std::sqrt(u);
    if (name == "abs") return std::abs(u);
    if (name == "tanh") return std::tanh(u);
    const double w = args[1]->eval(t, x);
    return name == "min" ? std::min(u, w) : std::max(u, w);
  }
};

class Parser {
 public:
  explicit Parser(const std::string& s) : s_(s) {}

  NodePtr parse() {
    NodePtr n = sum();
    skip();
    if (pos_ != s_.size()) fail("unexpected character");
    return n;
  }

 private:
  const std::string& s_;
  std::size_t pos_ = 0;

  [[noreturn]] void fail(const std::string& what) const {
    throw ConfigError("expression '" + s_ + "': " + what + " at position " + std::to_string(pos_));
  }
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

  NodePtr sum() {
    NodePtr n = product();
    while (true) {
      if (accept('+')) n = std::make_shared<Binary>('+', n, product());
      else if (accept('-')) n = std::make_shared<Binary>('-', n, product());
      else return n;
    }
  }
  NodePtr product() {
    NodePtr n = unary();
    while (true) {
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
    NodePtr base = atom();
    if (accept('^')) return std::make_shared<Binary>('^', base, unary());
    return base;
  }
  NodePtr atom() {
    skip();
    if (pos_ >= s_.size()) fail("unexpected end");
    const char c = s_[pos_];
    if (accept('(')) {
      NodePtr n = sum();
      if (!accept(')')) fail("expected ')'");
      return n;
    }
    if (std::isdigit(static_cast<unsigned char>(c)) || c == '.') {
      const char* begin = s_.c_str() + pos_;
      char* end = nullptr;
      const double v = std::strtod(begin, &end);
      if (end == begin) fail("bad number");
      pos_ += static_cast<std::size_t>(end - begin);
      return std::make_shared<Constant>(v);
    }
    if (std::isalpha(static_cast<unsigned char>(c))) {
      std::size_t b = pos_;
      while (pos_ < s_.size() && (std::isalnum(static_cast<unsigned char>(s_[pos_])) || s_[pos_] == '_')) ++pos_;
      const std::string id = s_.substr(b, pos_ - b);
      if (id == "t") return std::make_shared<Variable>(true);
      if (id == "x") return std::make_shared<Variable>(false);
      if (id == "pi") return std::make_shared<Constant>(std::numbers::pi);
      const bool binary = id == "min" || id == "max";
      const bool unaryFn = id == "sin" || id == "cos" || id == "tan" || id == "exp" || id == "log" ||
                           id == "sqrt" || id == "abs" || id == "tanh";
      if (!binary && !unaryFn) fail("unknown identifier '" + id + "'");
      if (!accept('(')) fail("expected '(' after " + id);
      std::vector<NodePtr> args{sum()};
      if (binary) {
        if (!accept(',')) fail("expected ',' in " + id);
        args.push_back(sum());
      }
      if (!accept(')')) fail("expected ')'");
      return std::make_shared<Call>(id, std::move(args));
    }
    fail(std::string("unexpected '") + c + "'");
  }
};

}  // namespace

std::function<double(double, double)> compile_expression(const std::string& text) {
  NodePtr root = Parser(text).parse();
  return [root](double t, double x) { return root->eval(t, x); };
}

}  // namespace oswitch
