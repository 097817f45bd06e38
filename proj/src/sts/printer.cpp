#include <sstream>

#include "safetk/sts/model.hpp"

namespace safetk::sts {

namespace {

// Binding strength; must mirror the parser in parser.cpp.
int level(Op op) {
  switch (op) {
    case Op::ite:
      return 1;
    case Op::iff:
      return 2;
    case Op::implies:
      return 3;
    case Op::or_:
      return 4;
    case Op::and_:
      return 5;
    case Op::eq:
    case Op::ne:
    case Op::lt:
    case Op::le:
    case Op::gt:
    case Op::ge:
    case Op::in:
      return 6;
    case Op::add:
    case Op::sub:
      return 7;
    case Op::mul:
      return 8;
    case Op::not_:
    case Op::neg:
      return 9;
    default:
      return 10;
  }
}

const char* symbol(Op op) {
  switch (op) {
    case Op::iff:
      return "<->";
    case Op::implies:
      return "->";
    case Op::or_:
      return "|";
    case Op::and_:
      return "&";
    case Op::eq:
      return "=";
    case Op::ne:
      return "!=";
    case Op::lt:
      return "<";
    case Op::le:
      return "<=";
    case Op::gt:
      return ">";
    case Op::ge:
      return ">=";
    case Op::add:
      return "+";
    case Op::sub:
      return "-";
    case Op::mul:
      return "*";
    default:
      return "?";
  }
}

void print(const Expr& e, int min_level, std::ostream& os);

void print_binary(const Expr& e, int left_min, int right_min, std::ostream& os) {
  print(e.arg(0), left_min, os);
  os << ' ' << symbol(e.op()) << ' ';
  print(e.arg(1), right_min, os);
}

void print(const Expr& e, int min_level, std::ostream& os) {
  int lv = level(e.op());
  bool paren = lv < min_level;
  if (paren) os << '(';
  switch (e.op()) {
    case Op::bool_const:
      os << (e.bool_value() ? "TRUE" : "FALSE");
      break;
    case Op::int_const:
      os << e.int_value();
      break;
    case Op::ident:
      os << e.name();
      break;
    case Op::next:
      os << "next(";
      print(e.arg(0), 0, os);
      os << ')';
      break;
    case Op::min:
    case Op::max:
      os << (e.op() == Op::min ? "min(" : "max(");
      print(e.arg(0), 0, os);
      os << ", ";
      print(e.arg(1), 0, os);
      os << ')';
      break;
    case Op::not_:
      os << '!';
      print(e.arg(0), 9, os);
      break;
    case Op::neg:
      // Always parenthesized: "-" followed by "-" would open a comment.
      os << "-(";
      print(e.arg(0), 0, os);
      os << ')';
      break;
    case Op::ite:
      print(e.arg(0), 2, os);
      os << " ? ";
      print(e.arg(1), 2, os);
      os << " : ";
      print(e.arg(2), 1, os);
      break;
    case Op::implies:
      print_binary(e, lv + 1, lv, os);
      break;
    case Op::iff:
    case Op::or_:
    case Op::and_:
    case Op::add:
    case Op::sub:
    case Op::mul:
      print_binary(e, lv, lv + 1, os);
      break;
    case Op::eq:
    case Op::ne:
    case Op::lt:
    case Op::le:
    case Op::gt:
    case Op::ge:
      print_binary(e, lv + 1, lv + 1, os);
      break;
    case Op::in:
      print(e.arg(0), 7, os);
      os << " in {";
      for (std::size_t i = 1; i < e.args().size(); ++i) {
        if (i > 1) os << ", ";
        print(e.arg(i), 7, os);
      }
      os << '}';
      break;
  }
  if (paren) os << ')';
}

}  // namespace

std::string to_string(const Expr& e) {
  std::ostringstream os;
  print(e, 0, os);
  return os.str();
}

std::string to_string(const TypeSpec& t) {
  switch (t.kind) {
    case TypeSpec::Kind::boolean:
      return "boolean";
    case TypeSpec::Kind::range:
      return std::to_string(t.lo) + ".." + std::to_string(t.hi);
    case TypeSpec::Kind::enumeration: {
      std::string s = "{";
      for (std::size_t i = 0; i < t.literals.size(); ++i) {
        if (i) s += ", ";
        s += t.literals[i];
      }
      return s + "}";
    }
  }
  return {};
}

std::string print_model(const SymbolicModel& m) {
  std::ostringstream os;
  os << "MODULE " << m.name << '\n';
  if (!m.vars.empty()) {
    os << "VAR\n";
    for (const VarDecl& v : m.vars) os << "  " << v.name << " : " << to_string(v.type) << ";\n";
  }
  if (!m.defines.empty()) {
    os << "DEFINE\n";
    for (const DefineDecl& d : m.defines) os << "  " << d.name << " := " << to_string(d.body) << ";\n";
  }
  auto section = [&](const char* kw, const std::vector<Expr>& exprs) {
    if (exprs.empty()) return;
    os << kw << '\n';
    for (const Expr& e : exprs) os << "  " << to_string(e) << ";\n";
  };
  section("INIT", m.init);
  section("TRANS", m.trans);
  section("INVAR", m.invar);
  return os.str();
}

}  // namespace safetk::sts
