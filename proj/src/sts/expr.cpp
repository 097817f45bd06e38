#include "safetk/sts/expr.hpp"

#include <algorithm>

namespace safetk::sts {

namespace {

const ExprNode& node_or_die(const std::shared_ptr<const ExprNode>& n) {
  if (!n) throw std::logic_error("use of an empty expression");
  return *n;
}

}  // namespace

Expr Expr::boolean(bool v, SourcePos pos) {
  auto n = std::make_shared<ExprNode>();
  n->op = Op::bool_const;
  n->bval = v;
  n->pos = pos;
  Expr e;
  e.node_ = std::move(n);
  return e;
}

Expr Expr::integer(std::int64_t v, SourcePos pos) {
  auto n = std::make_shared<ExprNode>();
  n->op = Op::int_const;
  n->ival = v;
  n->pos = pos;
  Expr e;
  e.node_ = std::move(n);
  return e;
}

Expr Expr::ident(std::string name, SourcePos pos) {
  auto n = std::make_shared<ExprNode>();
  n->op = Op::ident;
  n->name = std::move(name);
  n->pos = pos;
  Expr e;
  e.node_ = std::move(n);
  return e;
}

Expr Expr::make(Op op, std::vector<Expr> args, SourcePos pos) {
  auto n = std::make_shared<ExprNode>();
  n->op = op;
  n->args = std::move(args);
  n->pos = pos;
  Expr e;
  e.node_ = std::move(n);
  return e;
}

Op Expr::op() const { return node_or_die(node_).op; }
bool Expr::bool_value() const { return node_or_die(node_).bval; }
std::int64_t Expr::int_value() const { return node_or_die(node_).ival; }
const std::string& Expr::name() const { return node_or_die(node_).name; }
const std::vector<Expr>& Expr::args() const { return node_or_die(node_).args; }
SourcePos Expr::pos() const { return node_ ? node_->pos : SourcePos{}; }

bool operator==(const Expr& a, const Expr& b) {
  if (a.node_ == b.node_) return true;
  if (!a.node_ || !b.node_) return false;
  const ExprNode& x = *a.node_;
  const ExprNode& y = *b.node_;
  if (x.op != y.op) return false;
  switch (x.op) {
    case Op::bool_const:
      return x.bval == y.bval;
    case Op::int_const:
      return x.ival == y.ival;
    case Op::ident:
      return x.name == y.name;
    default:
      break;
  }
  return x.args.size() == y.args.size() &&
         std::equal(x.args.begin(), x.args.end(), y.args.begin());
}

Expr operator!(const Expr& e) { return Expr::make(Op::not_, {e}); }
Expr operator&(const Expr& a, const Expr& b) { return Expr::make(Op::and_, {a, b}); }
Expr operator|(const Expr& a, const Expr& b) { return Expr::make(Op::or_, {a, b}); }
Expr implies(const Expr& a, const Expr& b) { return Expr::make(Op::implies, {a, b}); }
Expr eq(const Expr& a, const Expr& b) { return Expr::make(Op::eq, {a, b}); }
Expr ite(const Expr& c, const Expr& t, const Expr& e) { return Expr::make(Op::ite, {c, t, e}); }
Expr next(const Expr& e) { return Expr::make(Op::next, {e}); }

Expr conjoin(const std::vector<Expr>& parts) {
  if (parts.empty()) return Expr::boolean(true);
  Expr acc = parts.front();
  for (std::size_t i = 1; i < parts.size(); ++i) acc = acc & parts[i];
  return acc;
}

void flatten_conjuncts(const Expr& e, std::vector<Expr>& out) {
  if (e.op() == Op::and_) {
    for (const Expr& a : e.args()) flatten_conjuncts(a, out);
    return;
  }
  out.push_back(e);
}

namespace {

void collect_idents(const Expr& e, std::vector<std::string>& out) {
  if (e.op() == Op::ident) {
    if (std::find(out.begin(), out.end(), e.name()) == out.end()) out.push_back(e.name());
    return;
  }
  for (const Expr& a : e.args()) collect_idents(a, out);
}

}  // namespace

std::vector<std::string> identifiers(const Expr& e) {
  std::vector<std::string> out;
  collect_idents(e, out);
  return out;
}

}  // namespace safetk::sts
