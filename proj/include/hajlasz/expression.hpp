#pragma once

#include <cctype>
#include <cmath>
#include <memory>
#include <numbers>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "hajlasz/core.hpp"

namespace hajlasz {

class expression_error : public std::invalid_argument {
 public:
  expression_error(const std::string& what, std::size_t pos)
      : std::invalid_argument(what + " at position " + std::to_string(pos)), position(pos) {}
  std::size_t position;
};

// Small arithmetic language for custom test functions.
//   variables: x y z (coordinates), r (Euclidean norm)
//   constants: pi e
//   functions: sin cos tan exp log sqrt abs tanh sinh cosh atan
//   operators: + - * / ^ and unary minus; ^ is right associative
class Expression {
 public:
  explicit Expression(std::string_view text) : text_(text) {
    pos_ = 0;
    root_ = parse_sum();
    skip_ws();
    if (pos_ != text_.size()) throw expression_error("unexpected trailing input", pos_);
  }

  double operator()(const Point& p, int dim) const { return eval(*root_, p, dim); }

 private:
  enum class Op { number, var, neg, add, sub, mul, div, pow, call };
  struct Node {
    Op op = Op::number;
    double value = 0.0;
    int var = 0;  // 0..2 coordinates, 3 = r
    double (*fn)(double) = nullptr;
    std::unique_ptr<Node> lhs, rhs;
  };
  using NodePtr = std::unique_ptr<Node>;

  static NodePtr make(Op op, NodePtr l = nullptr, NodePtr r = nullptr) {
    auto n = std::make_unique<Node>();
    n->op = op;
    n->lhs = std::move(l);
    n->rhs = std::move(r);
    return n;
  }

  void skip_ws() {
    while (pos_ < text_.size() && std::isspace(static_cast<unsigned char>(text_[pos_]))) ++pos_;
  }

  bool accept(char c) {
    skip_ws();
    if (pos_ < text_.size() && text_[pos_] == c) {
      ++pos_;
      return true;
    }
    return false;
  }

  NodePtr parse_sum() {
    auto lhs = parse_product();
    while (true) {
      if (accept('+')) {
        lhs = make(Op::add, std::move(lhs), parse_product());
      } else if (accept('-')) {
        lhs = make(Op::sub, std::move(lhs), parse_product());
      } else {
        return lhs;
      }
    }
  }

  NodePtr parse_product() {
    auto lhs = parse_unary();
    while (true) {
      if (accept('*')) {
        lhs = make(Op::mul, std::move(lhs), parse_unary());
      } else if (accept('/')) {
        lhs = make(Op::div, std::move(lhs), parse_unary());
      } else {
        return lhs;
      }
    }
  }

  NodePtr parse_unary() {
    if (accept('-')) return make(Op::neg, parse_unary());
    if (accept('+')) return parse_unary();
    return parse_power();
  }

  NodePtr parse_power() {
    auto base = parse_atom();
    if (accept('^')) return make(Op::pow, std::move(base), parse_unary());
    return base;
  }

  NodePtr parse_atom() {
    skip_ws();
    if (pos_ >= text_.size()) throw expression_error("unexpected end of expression", pos_);
    const char c = text_[pos_];
    if (c == '(') {
      ++pos_;
      auto inner = parse_sum();
      if (!accept(')')) throw expression_error("expected ')'", pos_);
      return inner;
    }
    if (std::isdigit(static_cast<unsigned char>(c)) || c == '.') {
      const std::string rest(text_.substr(pos_));
      std::size_t used = 0;
      double v = 0.0;
      try {
        v = std::stod(rest, &used);
      } catch (const std::exception&) {
        throw expression_error("malformed number", pos_);
      }
      pos_ += used;
      auto n = make(Op::number);
      n->value = v;
      return n;
    }
    if (std::isalpha(static_cast<unsigned char>(c))) {
      const std::size_t start = pos_;
      while (pos_ < text_.size() && std::isalnum(static_cast<unsigned char>(text_[pos_]))) ++pos_;
      const std::string_view name = text_.substr(start, pos_ - start);
      if (name == "x" || name == "y" || name == "z" || name == "r") {
        auto n = make(Op::var);
        n->var = name == "x" ? 0 : name == "y" ? 1 : name == "z" ? 2 : 3;
        return n;
      }
      if (name == "pi" || name == "e") {
        auto n = make(Op::number);
        n->value = name == "pi" ? std::numbers::pi : std::numbers::e;
        return n;
      }
      double (*fn)(double) = lookup(name);
      if (fn == nullptr) throw expression_error("unknown identifier '" + std::string(name) + "'", start);
      if (!accept('(')) throw expression_error("expected '(' after function name", pos_);
      auto n = make(Op::call, parse_sum());
      n->fn = fn;
      if (!accept(')')) throw expression_error("expected ')'", pos_);
      return n;
    }
    throw expression_error(std::string("unexpected character '") + c + "'", pos_);
  }

  static double (*lookup(std::string_view name))(double) {
    struct Entry {
      std::string_view name;
      double (*fn)(double);
    };
    static const Entry table[] = {
        {"sin", [](double v) { return std::sin(v); }},   {"cos", [](double v) { return std::cos(v); }},
        {"tan", [](double v) { return std::tan(v); }},   {"exp", [](double v) { return std::exp(v); }},
        {"log", [](double v) { return std::log(v); }},   {"sqrt", [](double v) { return std::sqrt(v); }},
        {"abs", [](double v) { return std::abs(v); }},   {"tanh", [](double v) { return std::tanh(v); }},
        {"sinh", [](double v) { return std::sinh(v); }}, {"cosh", [](double v) { return std::cosh(v); }},
        {"atan", [](double v) { return std::atan(v); }},
    };
    for (const auto& e : table) {
      if (e.name == name) return e.fn;
    }
    return nullptr;
  }

  static double eval(const Node& n, const Point& p, int dim) {
    switch (n.op) {
      case Op::number: return n.value;
      case Op::var: return n.var == 3 ? norm(p, dim) : p[n.var];
      case Op::neg: return -eval(*n.lhs, p, dim);
      case Op::add: return eval(*n.lhs, p, dim) + eval(*n.rhs, p, dim);
      case Op::sub: return eval(*n.lhs, p, dim) - eval(*n.rhs, p, dim);
      case Op::mul: return eval(*n.lhs, p, dim) * eval(*n.rhs, p, dim);
      case Op::div: return eval(*n.lhs, p, dim) / eval(*n.rhs, p, dim);
      case Op::pow: return std::pow(eval(*n.lhs, p, dim), eval(*n.rhs, p, dim));
      case Op::call: return n.fn(eval(*n.lhs, p, dim));
    }
    return 0.0;
  }

  std::string_view text_;
  std::size_t pos_ = 0;
  NodePtr root_;
};

}  // namespace hajlasz
